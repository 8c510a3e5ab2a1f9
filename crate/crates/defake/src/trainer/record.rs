use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::metrics::MetricReport;

use super::Result;

/// Everything recorded for one training epoch.
#[derive(Debug, Clone)]
pub struct EpochRecord {
    /// 1-based epoch index.
    pub epoch: usize,
    /// Per-loss mean over the epoch's batches, weighted by batch size.
    pub train_losses: BTreeMap<String, f64>,
    /// Empty when no validation data was supplied.
    pub val_metrics: MetricReport,
    /// Learning rate in effect during this epoch.
    pub learning_rate: f64,
}

impl EpochRecord {
    /// The log-file line: `epoch=<i> lr=<r> <loss>=<v>... [<metric>=<v>...]`.
    pub fn log_line(&self) -> String {
        let mut line = format!("epoch={} lr={}", self.epoch, self.learning_rate);
        for (name, value) in &self.train_losses {
            line.push_str(&format!(" {name}={value}"));
        }
        if !self.val_metrics.is_empty() {
            line.push_str(&format!(" [{}]", self.val_metrics));
        }
        line
    }
}

/// Outcome of a `fit` call.
#[derive(Debug)]
pub struct TrainingHistory {
    pub records: Vec<EpochRecord>,
    pub stopped_early: bool,
    /// Epoch with the best monitored metric; 0 when nothing was monitored.
    pub best_epoch: usize,
    /// Checkpoint restored into the model at the end of training, if any.
    pub checkpoint_path: Option<PathBuf>,
}

/// Console + train.log + curves.csv sinks for epoch records.
pub struct EpochSinks {
    log: File,
    curves: File,
    quiet: bool,
}

impl EpochSinks {
    /// Creates (truncating) `train.log` and `curves.csv` in `output_dir`.
    pub fn create(output_dir: &Path, quiet: bool) -> Result<Self> {
        std::fs::create_dir_all(output_dir)?;
        let log = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(output_dir.join("train.log"))?;
        let mut curves = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(output_dir.join("curves.csv"))?;
        writeln!(curves, "series,epoch,value")?;
        Ok(Self { log, curves, quiet })
    }

    /// One log line per epoch, one curve row per scalar: the losses as
    /// `train/<name>`, the metrics as `val/<name>`, plus `lr`.
    pub fn record_epoch(&mut self, record: &EpochRecord) -> Result<()> {
        let line = record.log_line();
        if !self.quiet {
            println!("{line}");
        }
        writeln!(self.log, "{line}")?;
        for (name, value) in &record.train_losses {
            writeln!(self.curves, "train/{name},{},{}", record.epoch, value)?;
        }
        for (name, value) in &record.val_metrics.values {
            writeln!(self.curves, "val/{name},{},{}", record.epoch, value)?;
        }
        writeln!(self.curves, "lr,{},{}", record.epoch, record.learning_rate)?;
        self.log.flush()?;
        self.curves.flush()?;
        Ok(())
    }
}
