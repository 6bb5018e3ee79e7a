"""Regenerates density_oracle.csv with 40-digit mpmath evaluations.

Columns: kind,a,b,c,value
  normal:   a = x, b = mean, c = variance,  value = ln N(x | mean, variance)
  gamma:    a = x, b = shape, c = rate,     value = ln Gamma(x | shape, rate)
  quantile: a = p,                          value = inverse standard normal CDF at p
"""
import random

import mpmath as mp

mp.mp.dps = 40
rng = random.Random(20070613)
rows = []

for _ in range(100):
    x = rng.uniform(-10, 10)
    mean = rng.uniform(-5, 5)
    var = 10 ** rng.uniform(-2, 2)
    v = -mp.mpf(1) / 2 * mp.log(2 * mp.pi * var) - (mp.mpf(x) - mean) ** 2 / (2 * var)
    rows.append(("normal", x, mean, var, v))

for _ in range(100):
    x = 10 ** rng.uniform(-2, 1.7)
    shape = 10 ** rng.uniform(-1.3, 1.5)
    rate = 10 ** rng.uniform(-2, 1)
    x_, a, b = mp.mpf(x), mp.mpf(shape), mp.mpf(rate)
    v = a * mp.log(b) + (a - 1) * mp.log(x_) - b * x_ - mp.loggamma(a)
    rows.append(("gamma", x, shape, rate, v))

for _ in range(100):
    # spread over the bulk and both tails
    u = rng.random()
    if u < 0.25:
        p = 10 ** rng.uniform(-12, -2)
    elif u < 0.5:
        p = 1 - 10 ** rng.uniform(-12, -2)
    else:
        p = rng.uniform(0.01, 0.99)
    v = mp.sqrt(2) * mp.erfinv(2 * mp.mpf(p) - 1)
    rows.append(("quantile", p, 0.0, 0.0, v))

with open("density_oracle.csv", "w") as f:
    f.write("kind,a,b,c,value\n")
    for kind, a, b, c, v in rows:
        f.write(f"{kind},{a!r},{b!r},{c!r},{mp.nstr(v, 25)}\n")
