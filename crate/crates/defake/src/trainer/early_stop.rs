/// Maximize-mode early stopping with strict improvement against the best
/// value seen so far.
#[derive(Debug, Clone)]
pub struct EarlyStopper {
    patience: usize,
    best_value: f64,
    best_epoch: usize,
    non_improving: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Continue,
    Stop,
}

impl EarlyStopper {
    pub fn new(patience: usize) -> Self {
        assert!(patience >= 1, "patience must be >= 1");
        Self {
            patience,
            best_value: f64::NEG_INFINITY,
            best_epoch: 0,
            non_improving: 0,
        }
    }

    /// Record the monitored value for `epoch` (1-based). A value strictly
    /// greater than the best so far resets the counter; anything else
    /// (ties included) counts as non-improving.
    pub fn step(&mut self, value: f64, epoch: usize) -> Decision {
        if value > self.best_value {
            self.best_value = value;
            self.best_epoch = epoch;
            self.non_improving = 0;
            Decision::Continue
        } else {
            self.non_improving += 1;
            if self.non_improving >= self.patience {
                Decision::Stop
            } else {
                Decision::Continue
            }
        }
    }

    /// Whether the most recent `step` call observed a new best.
    pub fn improved(&self, epoch: usize) -> bool {
        self.best_epoch == epoch
    }

    pub fn best_value(&self) -> f64 {
        self.best_value
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn non_improving(&self) -> usize {
        self.non_improving
    }

    pub fn patience(&self) -> usize {
        self.patience
    }
}
