//! Online steepest descent with momentum over the BLSTM-CTC network,
//! per-epoch evaluation, best-model tracking, stopping policies and
//! checkpointing.

mod checkpoint;
mod fit;
mod optimizer;
mod select;
mod tracker;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::EvalReport;
use crate::network::DEFAULT_HIDDEN;

pub use checkpoint::{checkpoint_load, checkpoint_save, Checkpoint, FORMAT_VERSION, MAGIC};
pub use fit::{
    evaluate_model, fit, fit_with_alphabet, load_model, recognize, save_model, FitResult, PreparedData, Trainer,
};
pub use optimizer::{momentum_update, sgd_momentum_step};
pub use select::{select_best, MeanReport, RunSummary, Selection, TrackedBest};
pub use tracker::{run_schedule, BestModelTracker, EarlyStopper, TrackedModel};

/// When training ends.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopPolicy {
    /// Always run `max_epochs`.
    #[default]
    Fixed,
    /// Stop once test label error has not strictly improved for `patience`
    /// consecutive epochs, or at `max_epochs`.
    EarlyStop { patience: usize },
}

impl StopPolicy {
    pub const DEFAULT_PATIENCE: usize = 20;

    pub fn early_stop() -> Self {
        StopPolicy::EarlyStop {
            patience: Self::DEFAULT_PATIENCE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    pub stop_policy: StopPolicy,
    /// Seeds weight initialization and the per-epoch sample order.
    pub seed: u64,
    /// Element-wise gradient bound applied before each update.
    pub clip: Option<f64>,
    /// Samples whose gradients are summed per update; 1 is online descent.
    pub batch_size: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            momentum: 0.9,
            max_epochs: 80,
            stop_policy: StopPolicy::Fixed,
            seed: 0,
            clip: None,
            batch_size: 1,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum must be in [0, 1), got {}", self.momentum));
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1".into());
        }
        if let StopPolicy::EarlyStop { patience: 0 } = self.stop_policy {
            return bad("patience must be at least 1".into());
        }
        if let Some(c) = self.clip {
            if !(c > 0.0) {
                return bad(format!("clip must be positive, got {c}"));
            }
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetConfig {
    /// Memory blocks per direction.
    pub hidden: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self { hidden: DEFAULT_HIDDEN }
    }
}

/// Train and test scores after one epoch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    /// 1-based.
    pub epoch: usize,
    pub train: EvalReport,
    pub test: EvalReport,
    pub wall_time_secs: f64,
}

pub const EPOCH_CSV_HEADER: &str = "epoch,\
train_ctc_error,train_label_error,train_seq_error,train_ins,train_del,train_sub,\
test_ctc_error,test_label_error,test_seq_error,test_ins,test_del,test_sub";

impl EpochLog {
    /// Wall time is left out so identical runs give identical rows.
    pub fn csv_row(&self) -> String {
        let part = |r: &EvalReport| {
            format!(
                "{},{},{},{},{},{}",
                r.ctc_error, r.label_error, r.seq_error, r.insertions, r.deletions, r.substitutions
            )
        };
        format!("{},{},{}", self.epoch, part(&self.train), part(&self.test))
    }
}

pub fn epoch_logs_csv(logs: &[EpochLog]) -> String {
    let mut out = String::from(EPOCH_CSV_HEADER);
    out.push('\n');
    for log in logs {
        out.push_str(&log.csv_row());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_validation() {
        let hp = Hyperparams::default();
        hp.validate().unwrap();
        assert_eq!((hp.learning_rate, hp.momentum, hp.max_epochs), (1e-4, 0.9, 80));
        for bad in [
            Hyperparams {
                learning_rate: 0.0,
                ..hp.clone()
            },
            Hyperparams {
                momentum: 1.0,
                ..hp.clone()
            },
            Hyperparams {
                max_epochs: 0,
                ..hp.clone()
            },
            Hyperparams {
                stop_policy: StopPolicy::EarlyStop { patience: 0 },
                ..hp.clone()
            },
            Hyperparams {
                batch_size: 0,
                ..hp.clone()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn hyperparams_json_round_trip() {
        let hp = Hyperparams {
            stop_policy: StopPolicy::early_stop(),
            clip: Some(1.0),
            ..Hyperparams::default()
        };
        let s = serde_json::to_string(&hp).unwrap();
        assert!(s.contains("\"early_stop\":{\"patience\":20}"));
        assert_eq!(serde_json::from_str::<Hyperparams>(&s).unwrap(), hp);
        let partial: Hyperparams = serde_json::from_str(r#"{"max_epochs": 3, "stop_policy": "fixed"}"#).unwrap();
        assert_eq!(partial.max_epochs, 3);
        assert_eq!(partial.learning_rate, 1e-4);
    }
}
