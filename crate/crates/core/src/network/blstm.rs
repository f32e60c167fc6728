use super::lstm::{block_backward, block_forward, DirectionTrace};
use super::params::NetworkParams;
use crate::error::{Error, Result};
use crate::imaging::GrayImage;
use crate::scalar::{softmax_into, Scalar};

/// Column-wise presentation of an image: `len` frames of `dim` values in
/// `[0, 1]`, left to right.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSequence<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> FrameSequence<T> {
    pub fn new(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 || data.is_empty() || data.len() % dim != 0 {
            return Err(Error::Shape(format!(
                "{} values cannot form frames of {dim}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(Error::Shape(format!("frame value {v} outside [0, 1]")));
        }
        Ok(Self { dim, data })
    }

    pub fn from_image(img: &GrayImage) -> Self {
        let mut data = Vec::with_capacity(img.width() * img.height());
        for c in 0..img.width() {
            data.extend(img.column_unit::<T>(c));
        }
        Self {
            dim: img.height(),
            data,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame(&self, t: usize) -> &[T] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn reversed(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for t in (0..self.len()).rev() {
            data.extend_from_slice(self.frame(t));
        }
        Self { dim: self.dim, data }
    }
}

/// Everything a forward pass computed, kept for backpropagation.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkState<T> {
    pub frames: FrameSequence<T>,
    pub forward: DirectionTrace<T>,
    /// Indexed in processing order: step `k` saw frame `T - 1 - k`.
    pub backward: DirectionTrace<T>,
    pub classes: usize,
    /// `T x K`
    pub logits: Vec<T>,
    /// `T x K`, each row a softmax distribution.
    pub probs: Vec<T>,
}

impl<T: Scalar> NetworkState<T> {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn probs_at(&self, t: usize) -> &[T] {
        &self.probs[t * self.classes..(t + 1) * self.classes]
    }

    pub fn logits_at(&self, t: usize) -> &[T] {
        &self.logits[t * self.classes..(t + 1) * self.classes]
    }

    /// Concatenated `[forward; backward]` layer output seen by frame `t`.
    fn hidden_concat(&self, t: usize, out: &mut [T]) {
        let n = self.forward.hidden_size;
        let steps = self.len();
        out[..n].copy_from_slice(self.forward.hidden_at(t));
        out[n..].copy_from_slice(self.backward.hidden_at(steps - 1 - t));
    }
}

/// Left-to-right and right-to-left passes, then a per-frame softmax over
/// the concatenated layer outputs.
pub fn blstm_forward<T: Scalar>(params: &NetworkParams<T>, seq: &FrameSequence<T>) -> Result<NetworkState<T>> {
    let dims = params.dims();
    if seq.dim() != dims.input_size {
        return Err(Error::Shape(format!(
            "frames of height {} for a network expecting {}",
            seq.dim(),
            dims.input_size
        )));
    }
    if seq.is_empty() {
        return Err(Error::EmptyInput);
    }
    let fwd = block_forward(&params.forward, seq.as_slice(), false)?;
    let bwd = block_forward(&params.backward, seq.as_slice(), true)?;

    let k = dims.classes;
    let two_n = 2 * dims.hidden;
    let steps = seq.len();
    let mut state = NetworkState {
        frames: seq.clone(),
        forward: fwd,
        backward: bwd,
        classes: k,
        logits: vec![T::zero(); steps * k],
        probs: vec![T::zero(); steps * k],
    };
    let mut h = vec![T::zero(); two_n];
    for t in 0..steps {
        state.hidden_concat(t, &mut h);
        let row = &mut state.logits[t * k..(t + 1) * k];
        for (c, out) in row.iter_mut().enumerate() {
            let w = &params.output_weights[c * two_n..(c + 1) * two_n];
            *out = params.output_bias[c] + w.iter().zip(&h).map(|(&a, &b)| a * b).sum::<T>();
        }
        if !row.iter().all(|v| v.is_finite()) {
            return Err(Error::NumericOverflow { step: t });
        }
        softmax_into(&state.logits[t * k..(t + 1) * k], &mut state.probs[t * k..(t + 1) * k]);
    }
    Ok(state)
}

/// Exact gradient of the loss with respect to every parameter, given the
/// loss gradient with respect to each frame's logits (`T x K`).
pub fn network_backward<T: Scalar>(
    params: &NetworkParams<T>,
    state: &NetworkState<T>,
    d_logits: &[T],
) -> Result<NetworkParams<T>> {
    let mut grad = params.zeros_like();
    accumulate_gradient(params, state, d_logits, &mut grad)?;
    Ok(grad)
}

/// As [`network_backward`], adding into an existing gradient.
pub fn accumulate_gradient<T: Scalar>(
    params: &NetworkParams<T>,
    state: &NetworkState<T>,
    d_logits: &[T],
    grad: &mut NetworkParams<T>,
) -> Result<()> {
    let dims = params.dims();
    let steps = state.len();
    let k = dims.classes;
    let n = dims.hidden;
    let two_n = 2 * n;
    if d_logits.len() != steps * k
        || state.classes != k
        || state.forward.hidden_size != n
        || state.frames.dim() != dims.input_size
        || !grad.same_shape(params)
    {
        return Err(Error::Shape(format!(
            "gradient of length {} for {steps} frames x {k} classes, or state/params mismatch",
            d_logits.len()
        )));
    }

    let mut dh_fwd = vec![T::zero(); steps * n];
    let mut dh_bwd = vec![T::zero(); steps * n];
    let mut h = vec![T::zero(); two_n];
    for t in 0..steps {
        let dl = &d_logits[t * k..(t + 1) * k];
        state.hidden_concat(t, &mut h);
        let kb = steps - 1 - t;
        for (c, &d) in dl.iter().enumerate() {
            if d == T::zero() {
                continue;
            }
            grad.output_bias[c] += d;
            let w = &params.output_weights[c * two_n..(c + 1) * two_n];
            let gw = &mut grad.output_weights[c * two_n..(c + 1) * two_n];
            for j in 0..two_n {
                gw[j] += d * h[j];
            }
            for j in 0..n {
                dh_fwd[t * n + j] += d * w[j];
                dh_bwd[kb * n + j] += d * w[n + j];
            }
        }
    }

    let frames = state.frames.as_slice();
    block_backward(
        &params.forward,
        &state.forward,
        frames,
        false,
        &dh_fwd,
        &mut grad.forward,
    );
    block_backward(
        &params.backward,
        &state.backward,
        frames,
        true,
        &dh_bwd,
        &mut grad.backward,
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{init_params, NetworkDims};

    fn seq(t: usize, dim: usize, salt: usize) -> FrameSequence<f64> {
        let data = (0..t * dim)
            .map(|i| ((i * 37 + salt * 11) % 101) as f64 / 100.0)
            .collect();
        FrameSequence::new(dim, data).unwrap()
    }

    #[test]
    fn softmax_rows_normalized() {
        let dims = NetworkDims::new(3, 4, 5).unwrap();
        let p = init_params::<f64>(dims, 3);
        let st = blstm_forward(&p, &seq(7, 3, 1)).unwrap();
        for t in 0..7 {
            assert!((st.probs_at(t).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_frame_sequence() {
        let dims = NetworkDims::new(3, 4, 3).unwrap();
        let p = init_params::<f64>(dims, 3);
        let st = blstm_forward(&p, &seq(1, 3, 2)).unwrap();
        assert_eq!(st.forward.steps, 1);
        assert_eq!(st.backward.steps, 1);
        assert_eq!(st.probs.len(), 3);
    }

    #[test]
    fn reversal_symmetry() {
        let dims = NetworkDims::new(3, 4, 3).unwrap();
        let p = init_params::<f64>(dims, 8);
        let mut swapped = p.clone();
        std::mem::swap(&mut swapped.forward, &mut swapped.backward);
        // output columns must follow the swap too
        let n = dims.hidden;
        for c in 0..dims.classes {
            let row = &mut swapped.output_weights[c * 2 * n..(c + 1) * 2 * n];
            row.rotate_left(n);
        }
        let s = seq(6, 3, 4);
        let a = blstm_forward(&p, &s).unwrap();
        let b = blstm_forward(&swapped, &s.reversed()).unwrap();
        for t in 0..6 {
            for (x, y) in a.probs_at(t).iter().zip(b.probs_at(5 - t)) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let dims = NetworkDims::new(3, 4, 3).unwrap();
        let p = init_params::<f64>(dims, 2);
        let st = blstm_forward(&p, &seq(5, 3, 0)).unwrap();
        let g = network_backward(&p, &st, &vec![0.0; 15]).unwrap();
        assert!(g.flat().iter().all(|&v| v == 0.0));
        assert!(network_backward(&p, &st, &[0.0; 14]).is_err());
    }

    #[test]
    fn frozen_direction_has_zero_gradient() {
        let dims = NetworkDims::new(3, 4, 3).unwrap();
        let mut p = init_params::<f64>(dims, 2);
        // backward layer disconnected from the output
        let n = dims.hidden;
        for c in 0..dims.classes {
            for j in n..2 * n {
                p.output_weights[c * 2 * n + j] = 0.0;
            }
        }
        let st = blstm_forward(&p, &seq(5, 3, 0)).unwrap();
        let dl: Vec<f64> = (0..15).map(|i| (i as f64 * 0.37).sin()).collect();
        let g = network_backward(&p, &st, &dl).unwrap();
        assert!(g.backward.tensors().iter().all(|t| t.iter().all(|&v| v == 0.0)));
        assert!(g.forward.input_weights.iter().any(|&v| v != 0.0));
    }

    #[test]
    fn frame_validation() {
        assert!(FrameSequence::new(2, vec![0.0, 1.5]).is_err());
        assert!(FrameSequence::new(2, vec![0.0; 3]).is_err());
        assert!(FrameSequence::<f64>::new(2, vec![]).is_err());
        let img = GrayImage::new(2, 2, vec![0, 255, 51, 102]).unwrap();
        let f = FrameSequence::<f64>::from_image(&img);
        assert_eq!(f.len(), 2);
        assert_eq!(f.frame(0), &[0.0, 0.2]);
        assert_eq!(f.frame(1), &[1.0, 0.4]);
    }
}
