use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::checkpoint::{checkpoint_load, checkpoint_save, Checkpoint};
use super::optimizer::sgd_momentum_step;
use super::select::{RunSummary, TrackedBest};
use super::tracker::{BestModelTracker, EarlyStopper, TrackedModel};
use super::{EpochLog, Hyperparams, NetConfig};
use crate::ctc::{best_path_decode, ctc_loss_and_grad};
use crate::dataset::{split_alphabet, Alphabet, DatasetSplit, Sample};
use crate::error::{Error, Result};
use crate::imaging::GrayImage;
use crate::metrics::{evaluate, EvalReport, Scored};
use crate::network::{accumulate_gradient, blstm_forward, init_params, FrameSequence, NetworkDims, NetworkParams};
use crate::scalar::Scalar;

const STATE_KIND: &str = "training_state";
const MODEL_KIND: &str = "model";

/// Samples converted to network inputs and label sequences.
#[derive(Clone, Debug)]
pub struct PreparedData<T> {
    pub name: String,
    pub frames: Vec<FrameSequence<T>>,
    pub labels: Vec<Vec<usize>>,
}

impl<T: Scalar> PreparedData<T> {
    pub fn new(name: &str, samples: &[Sample], alphabet: &Alphabet) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        let frames = samples.iter().map(|s| FrameSequence::from_image(&s.image)).collect();
        let labels = samples
            .iter()
            .map(|s| alphabet.encode(&s.transcript))
            .collect::<Result<_>>()?;
        Ok(Self {
            name: name.to_string(),
            frames,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Scores `params` on `data` with best-path decoding. Samples are processed
/// in parallel and reduced in input order.
pub fn evaluate_model<T: Scalar>(params: &NetworkParams<T>, data: &PreparedData<T>) -> Result<EvalReport> {
    let classes = params.dims().classes;
    let scored = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let state = blstm_forward(params, &data.frames[i])?;
            let ctc = ctc_loss_and_grad(&state.logits, classes, &data.labels[i])?;
            Ok(Scored {
                prediction: best_path_decode(&state.probs, classes),
                target: data.labels[i].clone(),
                ctc_loss: ctc.loss.as_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    evaluate(&data.name, &scored)
}

/// Transcribes one height-normalized word image.
pub fn recognize<T: Scalar>(params: &NetworkParams<T>, alphabet: &Alphabet, image: &GrayImage) -> Result<String> {
    let state = blstm_forward(params, &FrameSequence::from_image(image))?;
    alphabet.decode(&best_path_decode(&state.probs, params.dims().classes))
}

/// Tracker and per-epoch logs of a finished run.
#[derive(Clone, Debug)]
pub struct FitResult<T> {
    pub tracker: BestModelTracker<T>,
    pub logs: Vec<EpochLog>,
    pub stopped_early: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct StateMeta {
    kind: String,
    dataset_name: String,
    split_seed: u64,
    hyperparams: Hyperparams,
    net: NetConfig,
    stopper: EarlyStopper,
    finished: bool,
    best_by_ctc: Option<TrackedBest>,
    best_by_label: Option<TrackedBest>,
    logs: Vec<EpochLog>,
}

/// A training run that can advance one epoch at a time, checkpoint its full
/// state, and resume from it.
#[derive(Clone, Debug)]
pub struct Trainer<T> {
    hp: Hyperparams,
    net: NetConfig,
    alphabet: Alphabet,
    dataset_name: String,
    split_seed: u64,
    params: NetworkParams<T>,
    velocity: NetworkParams<T>,
    tracker: BestModelTracker<T>,
    stopper: EarlyStopper,
    logs: Vec<EpochLog>,
    finished: bool,
    train: PreparedData<T>,
    test: PreparedData<T>,
}

impl<T: Scalar> Trainer<T> {
    pub fn new(split: &DatasetSplit, alphabet: Alphabet, hp: Hyperparams, net: NetConfig) -> Result<Self> {
        hp.validate()?;
        let train = PreparedData::new(&split.dataset_name, &split.train, &alphabet)?;
        let test = PreparedData::new(&split.dataset_name, &split.test, &alphabet)?;
        let dims = NetworkDims::new(train.frames[0].dim(), net.hidden, alphabet.num_classes())?;
        let params = init_params(dims, hp.seed);
        Ok(Self {
            velocity: params.zeros_like(),
            params,
            tracker: BestModelTracker::new(),
            stopper: EarlyStopper::new(hp.stop_policy),
            logs: Vec::new(),
            finished: false,
            dataset_name: split.dataset_name.clone(),
            split_seed: split.seed,
            hp,
            net,
            alphabet,
            train,
            test,
        })
    }

    pub fn params(&self) -> &NetworkParams<T> {
        &self.params
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hp
    }

    pub fn logs(&self) -> &[EpochLog] {
        &self.logs
    }

    pub fn tracker(&self) -> &BestModelTracker<T> {
        &self.tracker
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn train_data(&self) -> &PreparedData<T> {
        &self.train
    }

    pub fn test_data(&self) -> &PreparedData<T> {
        &self.test
    }

    /// Sample order for `epoch`: a fresh permutation drawn from stream
    /// `epoch` of the run seed.
    pub fn epoch_order(&self, epoch: usize) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.hp.seed);
        rng.set_stream(epoch as u64);
        let mut order: Vec<usize> = (0..self.train.len()).collect();
        order.shuffle(&mut rng);
        order
    }

    /// One pass of per-sample updates, then evaluation on both partitions.
    pub fn run_epoch(&mut self) -> Result<&EpochLog> {
        if self.finished {
            return Err(Error::Config("training already finished".into()));
        }
        let start = Instant::now();
        let epoch = self.logs.len() + 1;
        let classes = self.params.dims().classes;
        let lr = T::of(self.hp.learning_rate);
        let momentum = T::of(self.hp.momentum);
        let clip = self.hp.clip.map(T::of);

        let mut grad = self.params.zeros_like();
        let mut pending = 0;
        for i in self.epoch_order(epoch) {
            let state = blstm_forward(&self.params, &self.train.frames[i])?;
            let ctc = ctc_loss_and_grad(&state.logits, classes, &self.train.labels[i])?;
            accumulate_gradient(&self.params, &state, &ctc.grad_logits, &mut grad)?;
            pending += 1;
            if pending == self.hp.batch_size {
                sgd_momentum_step(&mut self.params, &grad, &mut self.velocity, lr, momentum, clip)?;
                zero(&mut grad);
                pending = 0;
            }
        }
        if pending > 0 {
            sgd_momentum_step(&mut self.params, &grad, &mut self.velocity, lr, momentum, clip)?;
        }

        let train = evaluate_model(&self.params, &self.train)?;
        let test = evaluate_model(&self.params, &self.test)?;
        self.tracker.observe(epoch, &self.params, &test);
        let stop = self.stopper.observe(epoch, test.label_error);
        self.finished = stop || epoch >= self.hp.max_epochs;
        log::info!(
            "{} seed {} epoch {epoch}: train ctc {:.4} ler {:.5} | test ctc {:.4} ler {:.5} ser {:.5}",
            self.dataset_name,
            self.split_seed,
            train.ctc_error,
            train.label_error,
            test.ctc_error,
            test.label_error,
            test.seq_error
        );
        self.logs.push(EpochLog {
            epoch,
            train,
            test,
            wall_time_secs: start.elapsed().as_secs_f64(),
        });
        Ok(self.logs.last().expect("just pushed"))
    }

    /// Trains to completion, saving full state to `state_path` after every
    /// epoch when given.
    pub fn run(&mut self, state_path: Option<&Path>) -> Result<()> {
        while !self.finished {
            self.run_epoch()?;
            if let Some(path) = state_path {
                self.save_state(path)?;
            }
        }
        Ok(())
    }

    pub fn stopped_early(&self) -> bool {
        self.finished && self.logs.len() < self.hp.max_epochs
    }

    pub fn into_result(self) -> FitResult<T> {
        let stopped_early = self.stopped_early();
        FitResult {
            tracker: self.tracker,
            logs: self.logs,
            stopped_early,
        }
    }

    pub fn summary(&self) -> Result<RunSummary> {
        let best = |m: &Option<TrackedModel<T>>| {
            m.as_ref()
                .map(|m| TrackedBest {
                    epoch: m.epoch,
                    test: m.test.clone(),
                })
                .ok_or_else(|| Error::Config("no completed epochs".into()))
        };
        Ok(RunSummary {
            dataset_name: self.dataset_name.clone(),
            seed: self.split_seed,
            epochs_run: self.logs.len(),
            stopped_early: self.stopped_early(),
            best_by_ctc: best(&self.tracker.best_by_ctc)?,
            best_by_label: best(&self.tracker.best_by_label)?,
        })
    }

    fn state_checkpoint(&self) -> Result<Checkpoint> {
        let tracked = |m: &Option<TrackedModel<T>>| {
            m.as_ref().map(|m| TrackedBest {
                epoch: m.epoch,
                test: m.test.clone(),
            })
        };
        let meta = StateMeta {
            kind: STATE_KIND.into(),
            dataset_name: self.dataset_name.clone(),
            split_seed: self.split_seed,
            hyperparams: self.hp.clone(),
            net: self.net,
            stopper: self.stopper,
            finished: self.finished,
            best_by_ctc: tracked(&self.tracker.best_by_ctc),
            best_by_label: tracked(&self.tracker.best_by_label),
            logs: self.logs.clone(),
        };
        let mut c = Checkpoint::new::<T>(self.params.dims(), self.alphabet.clone(), serde_json::to_value(meta)?);
        c.push_params("params", &self.params);
        c.push_params("velocity", &self.velocity);
        if let Some(m) = &self.tracker.best_by_ctc {
            c.push_params("best_by_ctc", &m.params);
        }
        if let Some(m) = &self.tracker.best_by_label {
            c.push_params("best_by_label", &m.params);
        }
        Ok(c)
    }

    pub fn save_state(&self, path: &Path) -> Result<()> {
        checkpoint_save(path, &self.state_checkpoint()?)
    }

    /// Restores a run saved by [`Trainer::save_state`]; `split` must be the
    /// one it was trained on.
    pub fn resume(path: &Path, split: &DatasetSplit) -> Result<Self> {
        let c = checkpoint_load(path)?;
        let meta: StateMeta = serde_json::from_value(c.meta.clone())?;
        if meta.kind != STATE_KIND {
            return Err(Error::Checkpoint(format!(
                "{} holds a {}, not a training state",
                path.display(),
                meta.kind
            )));
        }
        if c.scalar != T::NAME {
            return Err(Error::Checkpoint(format!(
                "state saved as {}, resumed as {}",
                c.scalar,
                T::NAME
            )));
        }
        if meta.dataset_name != split.dataset_name || meta.split_seed != split.seed {
            return Err(Error::Checkpoint(format!(
                "state is for {} seed {}, split is {} seed {}",
                meta.dataset_name, meta.split_seed, split.dataset_name, split.seed
            )));
        }
        let mut t = Self::new(split, c.alphabet.clone(), meta.hyperparams, meta.net)?;
        if t.params.dims() != c.dims {
            return Err(Error::Checkpoint("network shape does not match the split".into()));
        }
        t.params = c.params("params")?;
        t.velocity = c.params("velocity")?;
        let restore = |tb: Option<TrackedBest>, group: &str| -> Result<Option<TrackedModel<T>>> {
            tb.map(|tb| {
                Ok(TrackedModel {
                    epoch: tb.epoch,
                    params: c.params(group)?,
                    test: tb.test,
                })
            })
            .transpose()
        };
        t.tracker.best_by_ctc = restore(meta.best_by_ctc, "best_by_ctc")?;
        t.tracker.best_by_label = restore(meta.best_by_label, "best_by_label")?;
        t.stopper = meta.stopper;
        t.logs = meta.logs;
        t.finished = meta.finished;
        Ok(t)
    }
}

fn zero<T: Scalar>(p: &mut NetworkParams<T>) {
    for t in p.tensors_mut() {
        t.iter_mut().for_each(|v| *v = T::zero());
    }
}

/// Trains on `split` with an alphabet drawn from its transcripts.
pub fn fit<T: Scalar>(split: &DatasetSplit, hp: &Hyperparams, net: &NetConfig) -> Result<FitResult<T>> {
    fit_with_alphabet(split, split_alphabet(split), hp, net)
}

pub fn fit_with_alphabet<T: Scalar>(
    split: &DatasetSplit,
    alphabet: Alphabet,
    hp: &Hyperparams,
    net: &NetConfig,
) -> Result<FitResult<T>> {
    let mut t = Trainer::new(split, alphabet, hp.clone(), *net)?;
    t.run(None)?;
    Ok(t.into_result())
}

/// Stores a single parameter set with its alphabet and free-form metadata.
pub fn save_model<T: Scalar>(
    path: &Path,
    params: &NetworkParams<T>,
    alphabet: &Alphabet,
    meta: serde_json::Value,
) -> Result<()> {
    let meta = json!({ "kind": MODEL_KIND, "info": meta });
    let mut c = Checkpoint::new::<T>(params.dims(), alphabet.clone(), meta);
    c.push_params("params", params);
    checkpoint_save(path, &c)
}

/// Loads the `params` group of a model or training-state checkpoint.
pub fn load_model<T: Scalar>(path: &Path) -> Result<(NetworkParams<T>, Alphabet, serde_json::Value)> {
    let c = checkpoint_load(path)?;
    let params = c.params("params")?;
    Ok((params, c.alphabet, c.meta))
}
