use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CSV_HEADER: [&str; 8] = [
    "experiment",
    "dim",
    "trial",
    "seed",
    "value",
    "reference",
    "deviation",
    "wall_ms",
];

/// One trial of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    pub dim: usize,
    pub trial: usize,
    pub seed: u64,
    pub value: f64,
    pub reference: f64,
    /// `reference − value`.
    pub deviation: f64,
    pub wall_ms: u64,
}

impl RunRecord {
    pub fn new(
        experiment: impl Into<String>,
        dim: usize,
        trial: usize,
        seed: u64,
        value: f64,
        reference: f64,
    ) -> Self {
        Self {
            experiment: experiment.into(),
            dim,
            trial,
            seed,
            value,
            reference,
            deviation: reference - value,
            wall_ms: 0,
        }
    }

    fn sort_key(&self) -> (&str, usize, usize) {
        (&self.experiment, self.dim, self.trial)
    }
}

/// Sorts by `(experiment, dim, trial)` so output order never depends on scheduling.
pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(text: &str) -> Result<Vec<RunRecord>, CliError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    Ok(rdr.deserialize().collect::<Result<Vec<RunRecord>, _>>()?)
}
