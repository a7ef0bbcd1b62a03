//! Ranked link predictions.

/// A total order over candidate target documents with scores, sorted by
/// descending score; ties broken by ascending document index so rankings are
/// deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedPrediction {
    pub entries: Vec<(usize, f64)>,
}

impl RankedPrediction {
    pub fn from_scores(scores: Vec<f64>) -> Self {
        let mut entries: Vec<(usize, f64)> = scores.into_iter().enumerate().collect();
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Self { entries }
    }

    pub fn targets(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(d, _)| d)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_descending_with_id_tiebreak() {
        let r = RankedPrediction::from_scores(vec![0.1, 0.5, 0.1, 0.9]);
        let order: Vec<usize> = r.targets().collect();
        assert_eq!(order, vec![3, 1, 0, 2]);
    }

    #[test]
    fn all_equal_scores_yield_id_order() {
        let r = RankedPrediction::from_scores(vec![0.0; 4]);
        let order: Vec<usize> = r.targets().collect();
        assert_eq!(order, vec![0, 1, 2, 3]);
    }
}
