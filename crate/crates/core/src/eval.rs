//! Link-prediction metrics: hit rate, precision, and recall at N.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::corpus::CorpusView;
use crate::error::{Error, Result};
use crate::ranking::RankedPrediction;

/// Metric curves for one method, indexed by N−1 for N in `1..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodCurves {
    pub method: String,
    /// Fraction of test documents with at least one true link in the top N.
    pub hit: Vec<f64>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
}

/// Curves for every compared method at a shared N range.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub n_max: usize,
    pub methods: Vec<MethodCurves>,
}

/// True outgoing link targets per visible source document, deduplicated
/// (rankings cannot express link multiplicity).
pub fn truth_from_view(view: &CorpusView) -> BTreeMap<usize, BTreeSet<usize>> {
    let mut truth: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for &d in view.sources() {
        truth.entry(d).or_default();
    }
    for (src, _, target) in view.iter_links() {
        truth.entry(src).or_default().insert(target);
    }
    truth
}

/// Computes hit/precision/recall curves for one method.
///
/// Documents with an empty truth set are excluded from every average (hit
/// and precision would otherwise be systematically deflated). Every scored
/// document needs a ranking at least `n_max` long; averaging requires at
/// least one document with a non-empty truth set.
pub fn evaluate(
    method: &str,
    predictions: &BTreeMap<usize, RankedPrediction>,
    truth: &BTreeMap<usize, BTreeSet<usize>>,
    n_max: usize,
) -> Result<MethodCurves> {
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let mut hit = vec![0.0; n_max];
    let mut precision = vec![0.0; n_max];
    let mut recall = vec![0.0; n_max];
    let mut included = 0usize;

    for (&doc, targets) in truth {
        if targets.is_empty() {
            continue;
        }
        let ranking = predictions
            .get(&doc)
            .ok_or_else(|| Error::invalid(format!("method {method:?} has no ranking for test document {doc}")))?;
        if ranking.len() < n_max {
            return Err(Error::invalid(format!(
                "ranking for document {doc} has {} entries, need at least {n_max}",
                ranking.len()
            )));
        }
        if let Some(&bad) = targets.iter().find(|&&t| t >= ranking.len()) {
            return Err(Error::invalid(format!(
                "truth for document {doc} references unknown document {bad}"
            )));
        }
        included += 1;
        let mut found = 0usize;
        for (idx, target) in ranking.targets().take(n_max).enumerate() {
            if targets.contains(&target) {
                found += 1;
            }
            let n = idx + 1;
            if found > 0 {
                hit[idx] += 1.0;
            }
            precision[idx] += found as f64 / n as f64;
            recall[idx] += found as f64 / targets.len() as f64;
        }
    }
    if included == 0 {
        return Err(Error::invalid("no test documents with outgoing links to evaluate"));
    }
    for curve in [&mut hit, &mut precision, &mut recall] {
        for x in curve.iter_mut() {
            *x /= included as f64;
        }
    }
    let curves = MethodCurves { method: method.to_string(), hit, precision, recall };
    assert_monotone(&curves);
    Ok(curves)
}

/// Hit and recall grow with N by construction; violation means a bug.
fn assert_monotone(curves: &MethodCurves) {
    for series in [&curves.hit, &curves.recall] {
        for pair in series.windows(2) {
            assert!(
                pair[1] >= pair[0] - 1e-12,
                "metric curve decreased: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }
    for &x in curves.hit.iter().chain(&curves.precision).chain(&curves.recall) {
        assert!((-1e-12..=1.0 + 1e-12).contains(&x), "metric outside [0, 1]: {x}");
    }
}

/// Writes `method,N,hit,precision,recall` rows, N ascending per method.
pub fn emit_curves<W: Write>(report: &EvalReport, mut w: W) -> Result<()> {
    writeln!(w, "method,N,hit,precision,recall")?;
    for m in &report.methods {
        assert_monotone(m);
        for n in 1..=report.n_max {
            writeln!(
                w,
                "{},{},{},{},{}",
                m.method,
                n,
                m.hit[n - 1],
                m.precision[n - 1],
                m.recall[n - 1]
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred(order: &[usize], total: usize) -> RankedPrediction {
        // Build scores that produce the given prefix order, remaining docs after.
        let mut scores = vec![0.0; total];
        for (rank, &d) in order.iter().enumerate() {
            scores[d] = (total + order.len() - rank) as f64;
        }
        RankedPrediction::from_scores(scores)
    }

    #[test]
    fn definitional_example() {
        // Ranking (a=0, b=1, c=2), truth {b}.
        let mut predictions = BTreeMap::new();
        predictions.insert(0usize, pred(&[0, 1, 2], 3));
        let mut truth = BTreeMap::new();
        truth.insert(0usize, BTreeSet::from([1usize]));
        let c = evaluate("m", &predictions, &truth, 3).unwrap();
        assert_eq!(c.hit[0], 0.0);
        assert_eq!(c.hit[1], 1.0);
        assert_eq!(c.precision[1], 0.5);
        assert_eq!(c.recall[1], 1.0);
    }

    #[test]
    fn perfect_prefix_ranking() {
        let mut predictions = BTreeMap::new();
        predictions.insert(0usize, pred(&[2, 4, 0, 1, 3], 5));
        let mut truth = BTreeMap::new();
        truth.insert(0usize, BTreeSet::from([2usize, 4]));
        let c = evaluate("m", &predictions, &truth, 5).unwrap();
        assert_eq!(c.precision[1], 1.0);
        assert_eq!(c.recall[1], 1.0);
        // recall at N = D is 1 for any doc with non-empty truth.
        assert_eq!(c.recall[4], 1.0);
    }

    #[test]
    fn zero_link_docs_are_excluded() {
        let mut predictions = BTreeMap::new();
        predictions.insert(0usize, pred(&[0, 1], 2));
        predictions.insert(1usize, pred(&[1, 0], 2));
        let mut truth = BTreeMap::new();
        truth.insert(0usize, BTreeSet::from([0usize]));
        truth.insert(1usize, BTreeSet::new());
        let c = evaluate("m", &predictions, &truth, 2).unwrap();
        // Only doc 0 is averaged; its rank-1 prediction is a hit.
        assert_eq!(c.hit[0], 1.0);
    }

    #[test]
    fn missing_ranking_is_an_error() {
        let predictions = BTreeMap::new();
        let mut truth = BTreeMap::new();
        truth.insert(0usize, BTreeSet::from([1usize]));
        assert!(evaluate("m", &predictions, &truth, 1).is_err());
    }

    #[test]
    fn short_ranking_is_an_error() {
        let mut predictions = BTreeMap::new();
        predictions.insert(0usize, pred(&[0, 1], 2));
        let mut truth = BTreeMap::new();
        truth.insert(0usize, BTreeSet::from([1usize]));
        assert!(evaluate("m", &predictions, &truth, 3).is_err());
    }

    #[test]
    fn truth_outside_the_candidate_set_is_an_error() {
        let mut predictions = BTreeMap::new();
        predictions.insert(0usize, pred(&[0, 1], 2));
        let mut truth = BTreeMap::new();
        truth.insert(0usize, BTreeSet::from([7usize]));
        let err = evaluate("m", &predictions, &truth, 2).unwrap_err();
        assert!(err.to_string().contains("unknown document"), "{err}");
    }

    #[test]
    fn emit_rows_and_reemission_are_stable() {
        let report = EvalReport {
            n_max: 2,
            methods: vec![MethodCurves {
                method: "m".into(),
                hit: vec![0.25, 0.5],
                precision: vec![0.25, 0.375],
                recall: vec![0.1, 0.2],
            }],
        };
        let mut a = Vec::new();
        emit_curves(&report, &mut a).unwrap();
        let text = String::from_utf8(a.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("method,N,hit,precision,recall\n"));
        let mut b = Vec::new();
        emit_curves(&report, &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_method_set_emits_header_only() {
        let report = EvalReport { n_max: 5, methods: vec![] };
        let mut buf = Vec::new();
        emit_curves(&report, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "method,N,hit,precision,recall\n");
    }
}
