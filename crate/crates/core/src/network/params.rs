use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Half-width of the uniform initialization interval.
pub const INIT_RANGE: f64 = 0.1;

/// Layer sizes: input frame height, memory blocks per direction, and output
/// classes (alphabet plus blank).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NetworkDims {
    pub input_size: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl NetworkDims {
    pub fn new(input_size: usize, hidden: usize, classes: usize) -> Result<Self> {
        if input_size == 0 || hidden == 0 {
            return Err(Error::Config("network dimensions must be positive".into()));
        }
        if classes < 2 {
            return Err(Error::Config("need at least one label plus the blank".into()));
        }
        Ok(Self {
            input_size,
            hidden,
            classes,
        })
    }
}

/// Gate slots within the stacked `4N` pre-activation vector.
pub(crate) const CELL_INPUT: usize = 0;
pub(crate) const INPUT_GATE: usize = 1;
pub(crate) const FORGET_GATE: usize = 2;
pub(crate) const OUTPUT_GATE: usize = 3;

/// Weights of one direction's layer of peephole LSTM memory blocks.
///
/// The four transforms are stacked row-wise in the order cell input, input
/// gate, forget gate, output gate, so row `g * N + j` belongs to gate `g` of
/// block `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmBlockParams<T> {
    pub input_size: usize,
    pub hidden: usize,
    /// `4N x input_size`, row-major.
    pub input_weights: Vec<T>,
    /// `4N x N`, row-major.
    pub recurrent_weights: Vec<T>,
    /// `4N`.
    pub bias: Vec<T>,
    pub peephole_input: Vec<T>,
    pub peephole_forget: Vec<T>,
    pub peephole_output: Vec<T>,
}

impl<T: Scalar> LstmBlockParams<T> {
    pub fn zeros(input_size: usize, hidden: usize) -> Self {
        let g = 4 * hidden;
        Self {
            input_size,
            hidden,
            input_weights: vec![T::zero(); g * input_size],
            recurrent_weights: vec![T::zero(); g * hidden],
            bias: vec![T::zero(); g],
            peephole_input: vec![T::zero(); hidden],
            peephole_forget: vec![T::zero(); hidden],
            peephole_output: vec![T::zero(); hidden],
        }
    }

    pub fn tensors(&self) -> [&[T]; 6] {
        [
            &self.input_weights,
            &self.recurrent_weights,
            &self.bias,
            &self.peephole_input,
            &self.peephole_forget,
            &self.peephole_output,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<T>; 6] {
        [
            &mut self.input_weights,
            &mut self.recurrent_weights,
            &mut self.bias,
            &mut self.peephole_input,
            &mut self.peephole_forget,
            &mut self.peephole_output,
        ]
    }

    /// Bias slice of gate `gate` (see the gate slot constants).
    pub fn gate_bias_mut(&mut self, gate: usize) -> &mut [T] {
        let n = self.hidden;
        &mut self.bias[gate * n..(gate + 1) * n]
    }
}

/// All trainable weights: two LSTM layers (left-to-right and right-to-left)
/// and a softmax output layer over their concatenated outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams<T> {
    pub forward: LstmBlockParams<T>,
    pub backward: LstmBlockParams<T>,
    /// `K x 2N`, row-major; columns `0..N` read the forward layer.
    pub output_weights: Vec<T>,
    pub output_bias: Vec<T>,
}

/// Names of the flattened tensors, in storage order.
pub const TENSOR_NAMES: [&str; 14] = [
    "forward.input_weights",
    "forward.recurrent_weights",
    "forward.bias",
    "forward.peephole_input",
    "forward.peephole_forget",
    "forward.peephole_output",
    "backward.input_weights",
    "backward.recurrent_weights",
    "backward.bias",
    "backward.peephole_input",
    "backward.peephole_forget",
    "backward.peephole_output",
    "output.weights",
    "output.bias",
];

impl<T: Scalar> NetworkParams<T> {
    pub fn zeros(dims: NetworkDims) -> Self {
        Self {
            forward: LstmBlockParams::zeros(dims.input_size, dims.hidden),
            backward: LstmBlockParams::zeros(dims.input_size, dims.hidden),
            output_weights: vec![T::zero(); dims.classes * 2 * dims.hidden],
            output_bias: vec![T::zero(); dims.classes],
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.dims())
    }

    pub fn dims(&self) -> NetworkDims {
        NetworkDims {
            input_size: self.forward.input_size,
            hidden: self.forward.hidden,
            classes: self.output_bias.len(),
        }
    }

    /// Every tensor in storage order (see [`TENSOR_NAMES`]).
    pub fn tensors(&self) -> Vec<&[T]> {
        let mut v: Vec<&[T]> = Vec::with_capacity(14);
        v.extend(self.forward.tensors());
        v.extend(self.backward.tensors());
        v.push(&self.output_weights);
        v.push(&self.output_bias);
        v
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<T>> {
        let mut v: Vec<&mut Vec<T>> = Vec::with_capacity(14);
        v.extend(self.forward.tensors_mut());
        v.extend(self.backward.tensors_mut());
        v.push(&mut self.output_weights);
        v.push(&mut self.output_bias);
        v
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn flat(&self) -> Vec<T> {
        self.tensors().concat()
    }

    /// Overwrites every parameter from a flat vector in storage order.
    pub fn set_flat(&mut self, values: &[T]) -> Result<()> {
        if values.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "{} values for {} parameters",
                values.len(),
                self.num_params()
            )));
        }
        let mut offset = 0;
        for t in self.tensors_mut() {
            let n = t.len();
            t.copy_from_slice(&values[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.tensors()
            .iter()
            .zip(other.tensors())
            .all(|(a, b)| a.len() == b.len())
    }

    /// Converts to another scalar type.
    pub fn cast<U: Scalar>(&self) -> NetworkParams<U> {
        let mut out = NetworkParams::<U>::zeros(self.dims());
        for (dst, src) in out.tensors_mut().into_iter().zip(self.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = U::of(s.as_f64());
            }
        }
        out
    }
}

/// Weights (including peepholes) i.i.d. uniform on `[-0.1, 0.1]`, biases
/// zero, drawn from ChaCha8 under `seed` in storage order.
pub fn init_params<T: Scalar>(dims: NetworkDims, seed: u64) -> NetworkParams<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = NetworkParams::zeros(dims);
    for (i, t) in params.tensors_mut().into_iter().enumerate() {
        if TENSOR_NAMES[i].ends_with("bias") {
            continue;
        }
        for v in t.iter_mut() {
            *v = T::of(rng.random_range(-INIT_RANGE..=INIT_RANGE));
        }
    }
    params
}
