use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Telemetry for one completed outer iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub re: Option<f64>,
    pub ssim: Option<f64>,
    /// `||A u - y|| / ||y||`
    pub residual: f64,
    pub objective: f64,
    /// Wall time since the start of the run.
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceLog {
    pub records: Vec<IterationRecord>,
}

impl ConvergenceLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// Record of outer iteration `iter` (1-based).
    pub fn at(&self, iter: usize) -> Option<&IterationRecord> {
        self.records.iter().find(|r| r.iter == iter)
    }

    /// CSV with header `iter,re,ssim,residual,objective,seconds`; missing metrics are empty.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.records {
            wr.serialize(r).map_err(csv_error)?;
        }
        if self.records.is_empty() {
            wr.write_record(["iter", "re", "ssim", "residual", "objective", "seconds"]).map_err(csv_error)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let records = rd.deserialize().collect::<std::result::Result<Vec<_>, _>>().map_err(csv_error)?;
        Ok(Self { records })
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}
