/// Relative width of the confluence window: nodes closer than
/// `CONFLUENCE_RTOL * (1 + spread)` are treated as one repeated node.
pub const CONFLUENCE_RTOL: f64 = 1e-8;

/// Node multiset of a divided difference, canonically sorted and clustered.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMultiset {
    /// Input nodes, sorted ascending.
    sorted: Vec<f64>,
    /// Nodes after clustering: each node replaced by its cluster mean.
    canonical: Vec<f64>,
    /// (representative, multiplicity) per cluster, ascending.
    clusters: Vec<(f64, usize)>,
}

impl NodeMultiset {
    /// # Panics
    /// If `nodes` is empty or contains a non-finite value.
    pub fn new(nodes: &[f64]) -> Self {
        assert!(
            !nodes.is_empty(),
            "a divided difference needs at least one node"
        );
        assert!(nodes.iter().all(|x| x.is_finite()), "nodes must be finite");
        let mut sorted = nodes.to_vec();
        sorted.sort_by(f64::total_cmp);
        let spread = sorted[sorted.len() - 1] - sorted[0];
        let eps = CONFLUENCE_RTOL * (1.0 + spread);

        let mut clusters = Vec::new();
        let mut canonical = Vec::with_capacity(sorted.len());
        let mut start = 0;
        for i in 1..=sorted.len() {
            if i == sorted.len() || sorted[i] - sorted[i - 1] > eps {
                let group = &sorted[start..i];
                let rep = if group.len() == 1 {
                    group[0]
                } else {
                    group.iter().sum::<f64>() / group.len() as f64
                };
                clusters.push((rep, group.len()));
                canonical.extend(std::iter::repeat_n(rep, group.len()));
                start = i;
            }
        }
        Self {
            sorted,
            canonical,
            clusters,
        }
    }

    /// Order `m` of the divided difference (number of nodes minus one).
    pub fn order(&self) -> usize {
        self.sorted.len() - 1
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn canonical(&self) -> &[f64] {
        &self.canonical
    }

    pub fn clusters(&self) -> &[(f64, usize)] {
        &self.clusters
    }

    pub fn max_multiplicity(&self) -> usize {
        self.clusters.iter().map(|c| c.1).max().unwrap_or(0)
    }

    pub fn spread(&self) -> f64 {
        self.canonical[self.canonical.len() - 1] - self.canonical[0]
    }

    pub fn is_fully_confluent(&self) -> bool {
        self.clusters.len() == 1
    }

    pub fn min_gap(&self) -> f64 {
        self.clusters
            .windows(2)
            .map(|w| w[1].0 - w[0].0)
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clusters_near_coincident_nodes() {
        let n = NodeMultiset::new(&[2.0, 1.0, 1.0 + 1e-12, 3.0]);
        assert_eq!(n.order(), 3);
        assert_eq!(n.clusters().len(), 3);
        assert_eq!(n.max_multiplicity(), 2);
        assert_eq!(n.canonical()[0], n.canonical()[1]);
    }

    #[test]
    fn fully_confluent() {
        let n = NodeMultiset::new(&[0.5; 4]);
        assert!(n.is_fully_confluent());
        assert_eq!(n.spread(), 0.0);
    }
}
