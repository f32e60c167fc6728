//! Bidirectional LSTM with peephole memory blocks and a per-frame softmax
//! output layer, with exact backpropagation through time.

mod blstm;
mod lstm;
mod params;

pub use blstm::{accumulate_gradient, blstm_forward, network_backward, FrameSequence, NetworkState};
pub use lstm::{block_backward, block_forward, lstm_cell_step, lstm_cell_step_full, DirectionTrace, StepActivations};
pub use params::{init_params, LstmBlockParams, NetworkDims, NetworkParams, INIT_RANGE, TENSOR_NAMES};

/// Default memory blocks per direction.
pub const DEFAULT_HIDDEN: usize = 100;
