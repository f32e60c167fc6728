//! One direction of peephole LSTM memory blocks: single steps, a full pass
//! over a sequence, and its exact backward pass.

use super::params::{LstmBlockParams, CELL_INPUT, FORGET_GATE, INPUT_GATE, OUTPUT_GATE};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    // four independent partial sums so the loop vectorizes
    let mut acc = [T::zero(); 4];
    let (ac, bc) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ar, br) = (ac.remainder(), bc.remainder());
    for (x, y) in ac.zip(bc) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (&x, &y) in ar.iter().zip(br) {
        s += x * y;
    }
    s
}

#[inline]
fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Activations of one step. `gates` holds the post-nonlinearity values of
/// the cell input (tanh) and the input, forget and output gates (sigmoid),
/// stacked like the parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct StepActivations<T> {
    pub gates: Vec<T>,
    pub cell: Vec<T>,
    pub cell_tanh: Vec<T>,
    pub hidden: Vec<T>,
}

/// Core of a step writing into caller-provided buffers.
///
/// Input and forget gates see `c_prev` through their peepholes; the output
/// gate sees the freshly updated cell.
#[allow(clippy::too_many_arguments)]
fn step_into<T: Scalar>(
    p: &LstmBlockParams<T>,
    x: &[T],
    h_prev: &[T],
    c_prev: &[T],
    gates: &mut [T],
    cell: &mut [T],
    cell_tanh: &mut [T],
    hidden: &mut [T],
) {
    let n = p.hidden;
    let m = p.input_size;
    for r in 0..4 * n {
        gates[r] = p.bias[r]
            + dot(&p.input_weights[r * m..(r + 1) * m], x)
            + dot(&p.recurrent_weights[r * n..(r + 1) * n], h_prev);
    }
    for j in 0..n {
        let g = gates[CELL_INPUT * n + j].tanh();
        let i = (gates[INPUT_GATE * n + j] + p.peephole_input[j] * c_prev[j]).sigmoid();
        let f = (gates[FORGET_GATE * n + j] + p.peephole_forget[j] * c_prev[j]).sigmoid();
        let c = f * c_prev[j] + i * g;
        let o = (gates[OUTPUT_GATE * n + j] + p.peephole_output[j] * c).sigmoid();
        let tc = c.tanh();
        gates[CELL_INPUT * n + j] = g;
        gates[INPUT_GATE * n + j] = i;
        gates[FORGET_GATE * n + j] = f;
        gates[OUTPUT_GATE * n + j] = o;
        cell[j] = c;
        cell_tanh[j] = tc;
        hidden[j] = o * tc;
    }
}

/// One memory-block update `(x_t, h_{t-1}, c_{t-1}) -> (h_t, c_t)`.
pub fn lstm_cell_step<T: Scalar>(
    p: &LstmBlockParams<T>,
    x: &[T],
    h_prev: &[T],
    c_prev: &[T],
) -> Result<(Vec<T>, Vec<T>)> {
    let act = lstm_cell_step_full(p, x, h_prev, c_prev, 0)?;
    Ok((act.hidden, act.cell))
}

/// Like [`lstm_cell_step`] but returning every activation; `step` labels
/// overflow errors.
pub fn lstm_cell_step_full<T: Scalar>(
    p: &LstmBlockParams<T>,
    x: &[T],
    h_prev: &[T],
    c_prev: &[T],
    step: usize,
) -> Result<StepActivations<T>> {
    let n = p.hidden;
    if x.len() != p.input_size || h_prev.len() != n || c_prev.len() != n {
        return Err(Error::Shape(format!(
            "step inputs x={} h={} c={} for block with input {} hidden {n}",
            x.len(),
            h_prev.len(),
            c_prev.len(),
            p.input_size
        )));
    }
    let mut act = StepActivations {
        gates: vec![T::zero(); 4 * n],
        cell: vec![T::zero(); n],
        cell_tanh: vec![T::zero(); n],
        hidden: vec![T::zero(); n],
    };
    step_into(
        p,
        x,
        h_prev,
        c_prev,
        &mut act.gates,
        &mut act.cell,
        &mut act.cell_tanh,
        &mut act.hidden,
    );
    if !act.cell.iter().chain(&act.hidden).all(|v| v.is_finite()) {
        return Err(Error::NumericOverflow { step });
    }
    Ok(act)
}

/// Activations of one direction over a whole sequence, indexed in the
/// order the layer consumed its inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionTrace<T> {
    pub steps: usize,
    pub hidden_size: usize,
    /// `steps x 4N`
    pub gates: Vec<T>,
    /// `steps x N`
    pub cells: Vec<T>,
    pub cell_tanh: Vec<T>,
    pub hidden: Vec<T>,
}

impl<T: Scalar> DirectionTrace<T> {
    pub fn hidden_at(&self, k: usize) -> &[T] {
        let n = self.hidden_size;
        &self.hidden[k * n..(k + 1) * n]
    }

    pub fn cell_at(&self, k: usize) -> &[T] {
        let n = self.hidden_size;
        &self.cells[k * n..(k + 1) * n]
    }
}

/// Runs the layer over `frames` (each `input_size` long, `steps` of them).
/// With `reversed`, step `k` reads frame `steps - 1 - k`.
pub fn block_forward<T: Scalar>(p: &LstmBlockParams<T>, frames: &[T], reversed: bool) -> Result<DirectionTrace<T>> {
    let n = p.hidden;
    let m = p.input_size;
    let steps = frames.len() / m;
    let mut tr = DirectionTrace {
        steps,
        hidden_size: n,
        gates: vec![T::zero(); steps * 4 * n],
        cells: vec![T::zero(); steps * n],
        cell_tanh: vec![T::zero(); steps * n],
        hidden: vec![T::zero(); steps * n],
    };
    let zeros = vec![T::zero(); n];
    for k in 0..steps {
        let t = if reversed { steps - 1 - k } else { k };
        let x = &frames[t * m..(t + 1) * m];
        let (before, after) = tr.cells.split_at_mut(k * n);
        let c_prev = if k == 0 { &zeros[..] } else { &before[(k - 1) * n..] };
        let (hb, ha) = tr.hidden.split_at_mut(k * n);
        let h_prev = if k == 0 { &zeros[..] } else { &hb[(k - 1) * n..] };
        step_into(
            p,
            x,
            h_prev,
            c_prev,
            &mut tr.gates[k * 4 * n..(k + 1) * 4 * n],
            &mut after[..n],
            &mut tr.cell_tanh[k * n..(k + 1) * n],
            &mut ha[..n],
        );
        if !after[..n].iter().chain(&ha[..n]).all(|v| v.is_finite()) {
            return Err(Error::NumericOverflow { step: t });
        }
    }
    Ok(tr)
}

/// Backpropagation through time for one direction.
///
/// `d_hidden` is the loss gradient reaching each step's output from above
/// (indexed in processing order). Parameter gradients are accumulated into
/// `grad`.
pub fn block_backward<T: Scalar>(
    p: &LstmBlockParams<T>,
    tr: &DirectionTrace<T>,
    frames: &[T],
    reversed: bool,
    d_hidden: &[T],
    grad: &mut LstmBlockParams<T>,
) {
    let n = p.hidden;
    let m = p.input_size;
    let steps = tr.steps;
    let zeros = vec![T::zero(); n];
    let mut dh_rec = vec![T::zero(); n];
    let mut dc_carry = vec![T::zero(); n];
    let mut da = vec![T::zero(); 4 * n];
    let one = T::one();

    for k in (0..steps).rev() {
        let t = if reversed { steps - 1 - k } else { k };
        let x = &frames[t * m..(t + 1) * m];
        let gates = &tr.gates[k * 4 * n..(k + 1) * 4 * n];
        let c = tr.cell_at(k);
        let tc = &tr.cell_tanh[k * n..(k + 1) * n];
        let c_prev = if k == 0 { &zeros[..] } else { tr.cell_at(k - 1) };
        let h_prev = if k == 0 { &zeros[..] } else { tr.hidden_at(k - 1) };

        for j in 0..n {
            let g = gates[CELL_INPUT * n + j];
            let i = gates[INPUT_GATE * n + j];
            let f = gates[FORGET_GATE * n + j];
            let o = gates[OUTPUT_GATE * n + j];
            let dh = d_hidden[k * n + j] + dh_rec[j];

            let do_pre = dh * tc[j] * o * (one - o);
            let dc = dh * o * (one - tc[j] * tc[j]) + do_pre * p.peephole_output[j] + dc_carry[j];
            let di_pre = dc * g * i * (one - i);
            let df_pre = dc * c_prev[j] * f * (one - f);
            let dg_pre = dc * i * (one - g * g);

            grad.peephole_input[j] += di_pre * c_prev[j];
            grad.peephole_forget[j] += df_pre * c_prev[j];
            grad.peephole_output[j] += do_pre * c[j];

            da[CELL_INPUT * n + j] = dg_pre;
            da[INPUT_GATE * n + j] = di_pre;
            da[FORGET_GATE * n + j] = df_pre;
            da[OUTPUT_GATE * n + j] = do_pre;

            dc_carry[j] = dc * f + di_pre * p.peephole_input[j] + df_pre * p.peephole_forget[j];
        }

        dh_rec.iter_mut().for_each(|v| *v = T::zero());
        for (r, &d) in da.iter().enumerate() {
            if d == T::zero() {
                continue;
            }
            grad.bias[r] += d;
            axpy(d, x, &mut grad.input_weights[r * m..(r + 1) * m]);
            axpy(d, h_prev, &mut grad.recurrent_weights[r * n..(r + 1) * n]);
            axpy(d, &p.recurrent_weights[r * n..(r + 1) * n], &mut dh_rec);
        }
    }
}
