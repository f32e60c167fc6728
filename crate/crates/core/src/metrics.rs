//! Edit distance with operation tallies, label error rate, sequence error
//! rate, and per-dataset evaluation reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Levenshtein distance and one optimal alignment's operation counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditOps {
    pub distance: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
}

/// Unit-cost edit distance turning `p` into `q`.
///
/// Counts come from a backtrace that prefers, at every cell, a diagonal move
/// (match or substitution), then a deletion from `p`, then an insertion from
/// `q`.
pub fn edit_distance<S: PartialEq>(p: &[S], q: &[S]) -> EditOps {
    let (n, m) = (p.len(), q.len());
    let w = m + 1;
    let mut d = vec![0usize; (n + 1) * w];
    for i in 0..=n {
        d[i * w] = i;
    }
    for (j, v) in d.iter_mut().enumerate().take(w) {
        *v = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = d[(i - 1) * w + j - 1] + usize::from(p[i - 1] != q[j - 1]);
            let del = d[(i - 1) * w + j] + 1;
            let ins = d[i * w + j - 1] + 1;
            d[i * w + j] = sub.min(del).min(ins);
        }
    }

    let mut ops = EditOps {
        distance: d[n * w + m],
        ..EditOps::default()
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 {
            let cost = usize::from(p[i - 1] != q[j - 1]);
            if d[(i - 1) * w + j - 1] + cost == here {
                ops.substitutions += cost;
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && d[(i - 1) * w + j] + 1 == here {
            ops.deletions += 1;
            i -= 1;
        } else {
            ops.insertions += 1;
            j -= 1;
        }
    }
    ops
}

/// Aggregate scores of one model on one labelled set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset_name: String,
    pub n_sequences: usize,
    /// Mean CTC loss per sequence, nats.
    pub ctc_error: f64,
    /// Mean of `ED(h(x), z) / |z|` over the set.
    pub label_error: f64,
    /// Fraction of sequences not decoded exactly.
    pub seq_error: f64,
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
}

pub const REPORT_CSV_HEADER: &str =
    "dataset,n_sequences,ctc_error,label_error_pct,seq_error_pct,insertions,deletions,substitutions";

/// Percentage with five decimals, e.g. `0.0000650 -> "0.00650%"`.
pub fn format_percent(fraction: f64) -> String {
    format!("{:.5}%", fraction * 100.0)
}

impl EvalReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.5},{:.5},{},{},{}",
            self.dataset_name,
            self.n_sequences,
            self.ctc_error,
            self.label_error * 100.0,
            self.seq_error * 100.0,
            self.insertions,
            self.deletions,
            self.substitutions
        )
    }
}

/// One decoded sample: prediction, target and its CTC loss.
#[derive(Clone, Debug, PartialEq)]
pub struct Scored<S> {
    pub prediction: Vec<S>,
    pub target: Vec<S>,
    pub ctc_loss: f64,
}

/// Label error (mean normalized edit distance), sequence error and mean CTC
/// loss over `samples`, reduced in input order.
pub fn evaluate<S: PartialEq>(dataset_name: &str, samples: &[Scored<S>]) -> Result<EvalReport> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut report = EvalReport {
        dataset_name: dataset_name.to_string(),
        n_sequences: samples.len(),
        ctc_error: 0.0,
        label_error: 0.0,
        seq_error: 0.0,
        insertions: 0,
        deletions: 0,
        substitutions: 0,
    };
    let mut ler_sum = 0.0;
    let mut loss_sum = 0.0;
    let mut wrong = 0usize;
    for (i, s) in samples.iter().enumerate() {
        if s.target.is_empty() {
            return Err(Error::ZeroLengthTarget(i));
        }
        let ops = edit_distance(&s.prediction, &s.target);
        ler_sum += ops.distance as f64 / s.target.len() as f64;
        loss_sum += s.ctc_loss;
        wrong += usize::from(ops.distance != 0);
        report.insertions += ops.insertions;
        report.deletions += ops.deletions;
        report.substitutions += ops.substitutions;
    }
    let n = samples.len() as f64;
    report.label_error = ler_sum / n;
    report.seq_error = wrong as f64 / n;
    report.ctc_error = loss_sum / n;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    fn scored(p: &str, q: &str) -> Scored<char> {
        Scored {
            prediction: chars(p),
            target: chars(q),
            ctc_loss: 1.0,
        }
    }

    #[test]
    fn distance_fixed_cases() {
        assert_eq!(edit_distance(&chars("abc"), &chars("abc")), EditOps::default());
        let e = edit_distance(&chars(""), &chars("abc"));
        assert_eq!((e.distance, e.insertions), (3, 3));
        let e = edit_distance(&chars("abc"), &chars(""));
        assert_eq!((e.distance, e.deletions), (3, 3));
        assert_eq!(edit_distance(&chars("kitten"), &chars("sitting")).distance, 3);
    }

    #[test]
    fn tallies_sum_to_distance() {
        for (p, q) in [("kitten", "sitting"), ("flaw", "lawn"), ("été", "ete"), ("a", "bcd")] {
            let e = edit_distance(&chars(p), &chars(q));
            assert_eq!(e.distance, e.insertions + e.deletions + e.substitutions, "{p} {q}");
        }
        let e = edit_distance(&chars("kitten"), &chars("sitting"));
        assert_eq!((e.substitutions, e.insertions, e.deletions), (2, 1, 0));
    }

    #[test]
    fn eval_single_and_pair() {
        let r = evaluate("t", &[scored("ac", "ab")]).unwrap();
        assert_eq!(r.label_error, 0.5);
        assert_eq!(r.seq_error, 1.0);
        let r = evaluate("t", &[scored("ab", "ab"), scored("ac", "ab")]).unwrap();
        assert_eq!(r.label_error, 0.25);
        assert_eq!(r.seq_error, 0.5);
        assert_eq!(r.substitutions, 1);
        assert_eq!(r.ctc_error, 1.0);
    }

    #[test]
    fn eval_perfect_and_errors() {
        let r = evaluate("t", &[scored("le", "le"), scored("été", "été")]).unwrap();
        assert_eq!((r.label_error, r.seq_error), (0.0, 0.0));
        assert!(matches!(
            evaluate("t", &[scored("a", "a"), scored("a", "")]),
            Err(Error::ZeroLengthTarget(1))
        ));
        assert!(evaluate::<char>("t", &[]).is_err());
    }

    #[test]
    fn percent_format() {
        assert_eq!(format_percent(0.0000650), "0.00650%");
        assert_eq!(format_percent(0.0004444), "0.04444%");
        assert_eq!(format_percent(0.0), "0.00000%");
    }
}
