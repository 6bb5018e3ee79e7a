//! CSV formats: input datasets (`ffq,dlw,socdes,edu`) and posterior sample dumps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::mcmc::PosteriorSamples;
use crate::model::{Dataset, ModelError};

pub const DATA_COLUMNS: [&str; 4] = ["ffq", "dlw", "socdes", "edu"];

/// Locations are 1-based data rows; row 1 is the first line after the header.
#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required column '{0}' in header")]
    MissingColumn(&'static str),
    #[error("row {row}, column '{column}': '{value}' is not a number")]
    NonNumeric {
        row: usize,
        column: &'static str,
        value: String,
    },
    #[error("row {row}, column 'edu': {value} must be 0 or 1")]
    BadEdu { row: usize, value: String },
    #[error("row {row}, column '{column}': {value} must be strictly positive")]
    NonPositive {
        row: usize,
        column: &'static str,
        value: f64,
    },
    #[error("need at least 2 data rows, found {0}")]
    TooFewRows(usize),
    #[error("samples file: {0}")]
    Samples(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn parse_dataset<R: std::io::Read>(reader: R) -> Result<Dataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut idx = [0usize; 4];
    for (slot, name) in idx.iter_mut().zip(DATA_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or(DataError::MissingColumn(name))?;
    }
    let mut cols: [Vec<f64>; 4] = Default::default();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        for (c, name) in DATA_COLUMNS.iter().enumerate() {
            let raw = record.get(idx[c]).unwrap_or("");
            let value: f64 = raw.parse().map_err(|_| {
                if *name == "edu" {
                    DataError::BadEdu {
                        row,
                        value: raw.to_string(),
                    }
                } else {
                    DataError::NonNumeric {
                        row,
                        column: name,
                        value: raw.to_string(),
                    }
                }
            })?;
            if !value.is_finite() {
                return Err(DataError::NonNumeric {
                    row,
                    column: name,
                    value: raw.to_string(),
                });
            }
            if c < 2 && value <= 0.0 {
                return Err(DataError::NonPositive {
                    row,
                    column: name,
                    value,
                });
            }
            if c == 3 && value != 0.0 && value != 1.0 {
                return Err(DataError::BadEdu {
                    row,
                    value: raw.to_string(),
                });
            }
            cols[c].push(value);
        }
    }
    let n = cols[0].len();
    if n < 2 {
        return Err(DataError::TooFewRows(n));
    }
    let [ffq, dlw, socdes, edu] = cols;
    Ok(Dataset::new(ffq, dlw, socdes, edu)?)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_dataset(file)
}

pub fn parse_csv_str(text: &str) -> Result<Dataset, DataError> {
    parse_dataset(text.as_bytes())
}

pub fn dataset_to_csv(data: &Dataset) -> String {
    let mut s = String::from("ffq,dlw,socdes,edu\n");
    for i in 0..data.len() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            data.ffq()[i],
            data.dlw()[i],
            data.socdes()[i],
            data.edu()[i]
        );
    }
    s
}

pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> std::io::Result<()> {
    fs::write(path, dataset_to_csv(data))
}

const SAMPLE_SCALARS: [&str; 5] = ["var_y", "var_eps", "r_y", "alpha1", "alpha2"];

/// Header of `samples.csv` for `n_effects` dumped effect columns.
pub fn samples_header(n_effects: usize) -> Vec<String> {
    let mut h: Vec<String> = vec!["chain".into(), "iter".into()];
    h.extend((0..5).map(|k| format!("beta{k}")));
    h.extend(SAMPLE_SCALARS.iter().map(|s| s.to_string()));
    h.push("deviance".into());
    h.extend((0..5).map(|k| format!("var_beta{k}")));
    h.extend((1..=n_effects).map(|i| format!("eps{i}")));
    h
}

/// One row per retained draw per chain. Parameters absent from the model are
/// left empty. Effects are included only when `dump_effects` is set.
pub fn samples_to_csv(chains: &[PosteriorSamples], dump_effects: bool) -> String {
    let n_effects = if dump_effects {
        chains
            .first()
            .and_then(|c| c.draws.first())
            .map_or(0, |d| d.eps.len())
    } else {
        0
    };
    let mut s = samples_header(n_effects).join(",");
    s.push('\n');
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    for c in chains {
        for ((d, dev), iter) in c.draws.iter().zip(&c.deviance_trace).zip(&c.iterations) {
            let mut fields = vec![c.chain_id.to_string(), iter.to_string()];
            fields.extend((0..5).map(|k| opt(d.beta.get(k).copied())));
            fields.extend([d.var_y, d.var_eps, d.r_y, d.alpha1, d.alpha2].map(opt));
            fields.push(dev.to_string());
            fields.extend((0..5).map(|k| opt(d.var_beta.get(k).copied())));
            fields.extend(d.eps.iter().take(n_effects).map(|e| e.to_string()));
            s.push_str(&fields.join(","));
            s.push('\n');
        }
    }
    s
}

/// A parsed `samples.csv`: column name → values, per chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplesTable {
    pub columns: Vec<String>,
    /// chain id → rows, each row aligned with `columns` (`None` for empty cells)
    pub chains: BTreeMap<usize, Vec<Vec<Option<f64>>>>,
}

impl SamplesTable {
    pub fn parse(text: &str) -> Result<Self, DataError> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let columns: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if columns.first().map(String::as_str) != Some("chain") {
            return Err(DataError::Samples("first column must be 'chain'".into()));
        }
        let mut chains: BTreeMap<usize, Vec<Vec<Option<f64>>>> = BTreeMap::new();
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let chain: usize = rec[0]
                .parse()
                .map_err(|_| DataError::Samples(format!("row {}: bad chain id", r + 1)))?;
            let row = rec
                .iter()
                .map(|f| {
                    if f.is_empty() {
                        Ok(None)
                    } else {
                        f.parse::<f64>().map(Some).map_err(|_| {
                            DataError::Samples(format!("row {}: '{f}' is not a number", r + 1))
                        })
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            chains.entry(chain).or_default().push(row);
        }
        Ok(Self { columns, chains })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of `name` in one chain; `None` if the column is absent or empty.
    pub fn trace(&self, chain: usize, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        self.chains.get(&chain)?.iter().map(|row| row[j]).collect()
    }
}
