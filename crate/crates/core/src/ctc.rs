//! Connectionist temporal classification: log-space forward-backward loss
//! and gradient, path collapsing, and best-path decoding.
//!
//! Label `0` is the blank. A target `z` is expanded to the blank-augmented
//! sequence `z' = (blank, z1, blank, z2, ..., blank)` of length `2|z| + 1`.

use crate::dataset::BLANK;
use crate::error::{Error, Result};
use crate::scalar::{log_add, log_softmax_in_place, Scalar};

/// Loss and its gradient with respect to the per-frame logits.
#[derive(Clone, Debug, PartialEq)]
pub struct CtcResult<T> {
    /// `-ln p(z | x)` in nats.
    pub loss: T,
    /// `T x K`, row-major.
    pub grad_logits: Vec<T>,
}

/// `(blank, z1, blank, ..., zn, blank)`.
pub fn augment_labels(labels: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(2 * labels.len() + 1);
    out.push(BLANK);
    for &l in labels {
        out.push(l);
        out.push(BLANK);
    }
    out
}

/// Minimum number of frames any path collapsing to `labels` needs.
pub fn required_frames(labels: &[usize]) -> usize {
    labels.len() + labels.windows(2).filter(|w| w[0] == w[1]).count()
}

fn validate(frames: usize, classes: usize, labels: &[usize]) -> Result<()> {
    if frames == 0 {
        return Err(Error::EmptyInput);
    }
    if classes < 2 {
        return Err(Error::Shape(format!("{classes} classes; need a blank and a label")));
    }
    if labels.is_empty() {
        return Err(Error::ZeroLengthTarget(0));
    }
    if let Some(&l) = labels.iter().find(|&&l| l == BLANK || l >= classes) {
        return Err(Error::LabelOutOfRange { label: l, classes });
    }
    let required = required_frames(labels);
    if frames < required {
        return Err(Error::InfeasibleLabelLength { frames, required });
    }
    Ok(())
}

/// CTC negative log-likelihood of `labels` given per-frame `logits`
/// (`T x K`, row-major, unnormalized), and its gradient.
///
/// Log-probabilities are accepted as logits unchanged, so callers holding
/// probabilities can pass their logarithms.
pub fn ctc_loss_and_grad<T: Scalar>(logits: &[T], classes: usize, labels: &[usize]) -> Result<CtcResult<T>> {
    if classes == 0 || logits.len() % classes != 0 {
        return Err(Error::Shape(format!("{} logits for {classes} classes", logits.len())));
    }
    let frames = logits.len() / classes;
    validate(frames, classes, labels)?;

    let mut logp = logits.to_vec();
    for row in logp.chunks_exact_mut(classes) {
        log_softmax_in_place(row);
    }

    let ext = augment_labels(labels);
    let s_len = ext.len();
    let ninf = T::neg_infinity();
    let lp = |t: usize, s: usize| logp[t * classes + ext[s]];
    // a skip from s-2 to s is allowed unless z'_s is blank or repeats z'_{s-2}
    let can_skip = |s: usize| s >= 2 && ext[s] != BLANK && ext[s] != ext[s - 2];

    // alpha[t][s]: log prob of emitting z'_1..s over frames 0..=t ending in s
    let mut alpha = vec![ninf; frames * s_len];
    alpha[0] = lp(0, 0);
    if s_len > 1 {
        alpha[1] = lp(0, 1);
    }
    for t in 1..frames {
        // states that can still reach the end are s >= s_len - 2(T - t)
        let lo = s_len.saturating_sub(2 * (frames - t));
        let hi = (2 * t + 2).min(s_len);
        for s in lo..hi {
            let prev = &alpha[(t - 1) * s_len..t * s_len];
            let mut a = prev[s];
            if s >= 1 {
                a = log_add(a, prev[s - 1]);
            }
            if can_skip(s) {
                a = log_add(a, prev[s - 2]);
            }
            alpha[t * s_len + s] = if a == ninf { ninf } else { a + lp(t, s) };
        }
    }

    // beta[t][s]: log prob of completing z' from state s at frame t over
    // frames t+1..T (frame t not included)
    let mut beta = vec![ninf; frames * s_len];
    let last = (frames - 1) * s_len;
    beta[last + s_len - 1] = T::zero();
    beta[last + s_len - 2] = T::zero();
    for t in (0..frames - 1).rev() {
        for s in 0..s_len {
            let next = (t + 1) * s_len;
            let mut b = beta[next + s] + lp(t + 1, s);
            if s + 1 < s_len {
                b = log_add(b, beta[next + s + 1] + lp(t + 1, s + 1));
            }
            if s + 2 < s_len && can_skip(s + 2) {
                b = log_add(b, beta[next + s + 2] + lp(t + 1, s + 2));
            }
            beta[t * s_len + s] = b;
        }
    }

    let log_p = log_add(alpha[last + s_len - 1], alpha[last + s_len - 2]);
    if !log_p.is_finite() {
        return Err(Error::InfeasibleLabelLength {
            frames,
            required: required_frames(labels),
        });
    }

    let mut grad = vec![T::zero(); frames * classes];
    let mut occupancy = vec![ninf; classes];
    for t in 0..frames {
        occupancy.iter_mut().for_each(|v| *v = ninf);
        for s in 0..s_len {
            let ab = alpha[t * s_len + s] + beta[t * s_len + s];
            occupancy[ext[s]] = log_add(occupancy[ext[s]], ab);
        }
        for k in 0..classes {
            let y = logp[t * classes + k].exp();
            grad[t * classes + k] = y - (occupancy[k] - log_p).exp();
        }
    }

    Ok(CtcResult {
        loss: (-log_p).max(T::zero()),
        grad_logits: grad,
    })
}

/// Loss from per-frame probabilities (`T x K`), via their logarithms.
pub fn ctc_loss_from_probs<T: Scalar>(probs: &[T], classes: usize, labels: &[usize]) -> Result<CtcResult<T>> {
    let logs: Vec<T> = probs.iter().map(|p| p.ln()).collect();
    ctc_loss_and_grad(&logs, classes, labels)
}

/// Merges adjacent repeats, then removes blanks.
pub fn collapse_path(path: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = None;
    for &l in path {
        if prev != Some(l) && l != BLANK {
            out.push(l);
        }
        prev = Some(l);
    }
    out
}

/// Collapsed per-frame argmax; ties go to the lowest label.
pub fn best_path_decode<T: Scalar>(probs: &[T], classes: usize) -> Vec<usize> {
    let path: Vec<usize> = probs
        .chunks_exact(classes)
        .map(|row| {
            let mut best = 0;
            for (k, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect();
    collapse_path(&path)
}
