use serde::{Deserialize, Serialize};

use super::StopPolicy;
use crate::error::Result;
use crate::metrics::EvalReport;
use crate::network::NetworkParams;

/// A snapshot kept because it scored best on some criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackedModel<T> {
    pub epoch: usize,
    pub params: NetworkParams<T>,
    pub test: EvalReport,
}

/// Best test-set models by CTC loss and by label error. Replacement needs a
/// strictly lower value, so ties keep the earlier epoch.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BestModelTracker<T> {
    pub best_by_ctc: Option<TrackedModel<T>>,
    pub best_by_label: Option<TrackedModel<T>>,
}

impl<T: Clone> BestModelTracker<T> {
    pub fn new() -> Self {
        Self {
            best_by_ctc: None,
            best_by_label: None,
        }
    }

    pub fn observe(&mut self, epoch: usize, params: &NetworkParams<T>, test: &EvalReport) {
        let snapshot = || TrackedModel {
            epoch,
            params: params.clone(),
            test: test.clone(),
        };
        if self
            .best_by_ctc
            .as_ref()
            .is_none_or(|b| test.ctc_error < b.test.ctc_error)
        {
            self.best_by_ctc = Some(snapshot());
        }
        if self
            .best_by_label
            .as_ref()
            .is_none_or(|b| test.label_error < b.test.label_error)
        {
            self.best_by_label = Some(snapshot());
        }
    }
}

/// Tracks the last strict improvement of a monotone-better-when-lower value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EarlyStopper {
    pub patience: Option<usize>,
    pub best: Option<f64>,
    pub last_improvement: usize,
}

impl EarlyStopper {
    pub fn new(policy: StopPolicy) -> Self {
        Self {
            patience: match policy {
                StopPolicy::Fixed => None,
                StopPolicy::EarlyStop { patience } => Some(patience),
            },
            best: None,
            last_improvement: 0,
        }
    }

    /// Records `value` for `epoch`; true when training should stop now.
    pub fn observe(&mut self, epoch: usize, value: f64) -> bool {
        if self.best.is_none_or(|b| value < b) {
            self.best = Some(value);
            self.last_improvement = epoch;
        }
        self.patience.is_some_and(|p| epoch >= self.last_improvement + p)
    }
}

/// Drives `epoch_fn` (which returns that epoch's test label error) from
/// epoch 1 under `policy`. Returns the last epoch run.
pub fn run_schedule<F>(policy: StopPolicy, max_epochs: usize, mut epoch_fn: F) -> Result<usize>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut stopper = EarlyStopper::new(policy);
    for epoch in 1..=max_epochs {
        let value = epoch_fn(epoch)?;
        if stopper.observe(epoch, value) {
            return Ok(epoch);
        }
    }
    Ok(max_epochs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NetworkDims;

    fn report(ctc: f64, label: f64) -> EvalReport {
        EvalReport {
            dataset_name: "t".into(),
            n_sequences: 1,
            ctc_error: ctc,
            label_error: label,
            seq_error: 0.0,
            insertions: 0,
            deletions: 0,
            substitutions: 0,
        }
    }

    #[test]
    fn tracker_ties_keep_earlier_epoch() {
        let p = NetworkParams::<f64>::zeros(NetworkDims::new(1, 1, 2).unwrap());
        let mut t = BestModelTracker::new();
        t.observe(1, &p, &report(3.0, 0.5));
        t.observe(2, &p, &report(2.0, 0.5));
        t.observe(3, &p, &report(2.0, 0.4));
        t.observe(4, &p, &report(5.0, 0.4));
        assert_eq!(t.best_by_ctc.as_ref().unwrap().epoch, 2);
        assert_eq!(t.best_by_label.as_ref().unwrap().epoch, 3);
    }

    #[test]
    fn strictly_improving_never_stops_early() {
        let last = run_schedule(StopPolicy::EarlyStop { patience: 2 }, 15, |e| Ok(1.0 / e as f64)).unwrap();
        assert_eq!(last, 15);
    }

    #[test]
    fn flat_sequence_stops_after_patience() {
        let last = run_schedule(StopPolicy::EarlyStop { patience: 3 }, 50, |_| Ok(0.5)).unwrap();
        assert_eq!(last, 4);
        let last = run_schedule(StopPolicy::Fixed, 7, |_| Ok(0.5)).unwrap();
        assert_eq!(last, 7);
    }
}
