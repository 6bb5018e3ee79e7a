use hiermc::io::{load_csv, samples_header, samples_to_csv, write_csv, DataError, SamplesTable};
use hiermc::mcmc::{run_multi, SamplerConfig};
use hiermc::model::{Dataset, EffectKind, Family, ModelSpec};
use hiermc::simulate::{simulate_energy, simulate_loglog, SimEnergyConfig, SimLogLogConfig};
use proptest::prelude::*;

fn dataset() -> impl Strategy<Value = Dataset> {
    (2usize..60).prop_flat_map(|n| {
        (
            proptest::collection::vec(1e-3f64..1e5, n),
            proptest::collection::vec(1e-3f64..1e5, n),
            proptest::collection::vec(-1e3f64..1e3, n),
            proptest::collection::vec(prop::bool::ANY, n),
        )
            .prop_map(|(a, b, c, e)| {
                Dataset::new(
                    a,
                    b,
                    c,
                    e.into_iter().map(|x| f64::from(u8::from(x))).collect(),
                )
                .unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn write_then_load_is_identity(d in dataset()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_csv(&d, &path).unwrap();
        let back = load_csv(&path).unwrap();
        for (x, y) in [(d.ffq(), back.ffq()), (d.dlw(), back.dlw()), (d.socdes(), back.socdes()), (d.edu(), back.edu())] {
            for (a, b) in x.iter().zip(y) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn loglog_outcomes_are_positive(seed in 0u64..1000, sigma in 0.0f64..2.0, b1 in -3.0f64..3.0) {
        let d = simulate_loglog(&SimLogLogConfig { n: 50, beta0: 2.0, beta1: b1, sigma_e: sigma, x_range: (0.5, 20.0), seed }).unwrap();
        prop_assert!(d.y.iter().all(|&y| y > 0.0));
        prop_assert!(d.x.iter().all(|&x| (0.5..=20.0).contains(&x)));
    }
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(
        load_csv("/nonexistent/d.csv"),
        Err(DataError::Io { .. })
    ));
}

#[test]
fn samples_csv_round_trips_exactly() {
    let sim = simulate_energy(&SimEnergyConfig {
        seed: 6,
        n: 12,
        effect: EffectKind::Additive,
        effect_scale: 150.0,
        ..Default::default()
    })
    .unwrap();
    let spec = ModelSpec::new(Family::Normal, EffectKind::Additive).unwrap();
    let cfg = SamplerConfig {
        iterations: 300,
        burn_in: 100,
        thin: 10,
        n_chains: 2,
        seed: 9,
        init_jitter: 1.0,
    };
    let fit = run_multi(&spec, &sim.data, &cfg);
    let text = samples_to_csv(&fit.chains, true);
    let table = SamplesTable::parse(&text).unwrap();
    assert_eq!(table.columns, samples_header(12));
    assert_eq!(table.chains.len(), 2);
    for c in &fit.chains {
        let b0 = table.trace(c.chain_id, "beta0").unwrap();
        assert_eq!(b0, c.draws.iter().map(|d| d.beta[0]).collect::<Vec<_>>());
        let e12 = table.trace(c.chain_id, "eps12").unwrap();
        assert_eq!(e12, c.draws.iter().map(|d| d.eps[11]).collect::<Vec<_>>());
        assert_eq!(
            table.trace(c.chain_id, "deviance").unwrap(),
            c.deviance_trace
        );
        assert!(table.trace(c.chain_id, "r_y").is_none());
    }
    let narrow = SamplesTable::parse(&samples_to_csv(&fit.chains, false)).unwrap();
    assert!(narrow.column_index("eps1").is_none());
}
