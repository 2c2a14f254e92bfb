//! The graph bundle: structure, features, labels, masks and subgroup tags.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Disjoint train/validation/test index sets. Indices are kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Masks {
    #[serde(default)]
    pub train: Vec<usize>,
    #[serde(default)]
    pub val: Vec<usize>,
    #[serde(default)]
    pub test: Vec<usize>,
}

impl Masks {
    pub fn new(mut train: Vec<usize>, mut val: Vec<usize>, mut test: Vec<usize>) -> Self {
        train.sort_unstable();
        val.sort_unstable();
        test.sort_unstable();
        Masks { train, val, test }
    }

    pub fn get(&self, name: &str) -> Option<&[usize]> {
        match name {
            "train" => Some(&self.train),
            "val" | "valid" | "validation" => Some(&self.val),
            "test" => Some(&self.test),
            _ => None,
        }
    }

    /// Check ranges, duplicates and pairwise disjointness against `n` nodes.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut owner: Vec<Option<&'static str>> = vec![None; n];
        for (name, set) in [("train", &self.train), ("val", &self.val), ("test", &self.test)] {
            for &i in set {
                if i >= n {
                    return Err(Error::OutOfRange {
                        what: "mask",
                        index: i,
                        bound: n,
                    });
                }
                if let Some(first) = owner[i] {
                    if first == name {
                        return Err(Error::invalid(format!(
                            "mask `{name}` lists node {i} twice"
                        )));
                    }
                    return Err(Error::MaskOverlap {
                        first,
                        second: name,
                        node: i,
                    });
                }
                owner[i] = Some(name);
            }
        }
        Ok(())
    }
}

/// Compressed adjacency lists; neighbors of each node sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csr {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Csr {
    fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut deg = vec![0usize; n];
        for &(u, v) in edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &deg {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0usize; offsets[n]];
        // edges are sorted by (u, v) so every adjacency list comes out sorted
        for &(u, v) in edges {
            targets[fill[v]] = u;
            fill[v] += 1;
        }
        for &(u, v) in edges {
            targets[fill[u]] = v;
            fill[u] += 1;
        }
        for i in 0..n {
            targets[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Csr { offsets, targets }
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }
}

/// Immutable undirected graph with node features and labels.
#[derive(Debug, Clone)]
pub struct GraphBundle {
    name: String,
    num_classes: usize,
    edges: Vec<(usize, usize)>,
    features: Matrix,
    labels: Vec<usize>,
    masks: Option<Masks>,
    subgroups: Option<Vec<u32>>,
    adjacency: Csr,
}

impl PartialEq for GraphBundle {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.num_classes == other.num_classes
            && self.edges == other.edges
            && self.features == other.features
            && self.labels == other.labels
            && self.masks == other.masks
            && self.subgroups == other.subgroups
    }
}

impl GraphBundle {
    /// Build and validate a bundle. Edges must be canonical (`u < v`);
    /// they are sorted, and duplicates or self-loops are errors.
    pub fn new(
        name: impl Into<String>,
        num_classes: usize,
        mut edges: Vec<(usize, usize)>,
        features: Matrix,
        labels: Vec<usize>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if features.rows() != n {
            return Err(Error::invalid(format!(
                "feature matrix has {} rows for {n} nodes",
                features.rows()
            )));
        }
        if features.cols() == 0 {
            return Err(Error::invalid("feature dimension must be positive"));
        }
        if !features.is_finite() {
            return Err(Error::invalid("features contain non-finite values"));
        }
        if num_classes == 0 {
            return Err(Error::invalid("num_classes must be positive"));
        }
        for &y in &labels {
            if y >= num_classes {
                return Err(Error::OutOfRange {
                    what: "label",
                    index: y,
                    bound: num_classes,
                });
            }
        }
        for &(u, v) in &edges {
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if u > v {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) is not canonical (u < v)"
                )));
            }
            if v >= n {
                return Err(Error::OutOfRange {
                    what: "edge endpoint",
                    index: v,
                    bound: n,
                });
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge(w[0].0, w[0].1));
        }
        let adjacency = Csr::from_edges(n, &edges);
        Ok(GraphBundle {
            name: name.into(),
            num_classes,
            edges,
            features,
            labels,
            masks: None,
            subgroups: None,
            adjacency,
        })
    }

    pub fn with_masks(mut self, masks: Masks) -> Result<Self> {
        let masks = Masks::new(masks.train, masks.val, masks.test);
        masks.validate(self.num_nodes())?;
        self.masks = Some(masks);
        Ok(self)
    }

    pub fn without_masks(mut self) -> Self {
        self.masks = None;
        self
    }

    pub fn with_subgroups(mut self, tags: Vec<u32>) -> Result<Self> {
        if tags.len() != self.num_nodes() {
            return Err(Error::invalid(format!(
                "{} subgroup tags for {} nodes",
                tags.len(),
                self.num_nodes()
            )));
        }
        self.subgroups = Some(tags);
        Ok(self)
    }

    pub fn with_features(mut self, features: Matrix) -> Result<Self> {
        if features.rows() != self.num_nodes() {
            return Err(Error::invalid("replacement features have wrong row count"));
        }
        if !features.is_finite() {
            return Err(Error::invalid("features contain non-finite values"));
        }
        self.features = features;
        Ok(self)
    }

    /// New bundle with `extra` edges added; every other field is kept.
    pub fn with_added_edges(&self, extra: &[(usize, usize)]) -> Result<Self> {
        let mut edges = self.edges.clone();
        edges.extend(extra.iter().map(|&(u, v)| (u.min(v), u.max(v))));
        let mut g = GraphBundle::new(
            self.name.clone(),
            self.num_classes,
            edges,
            self.features.clone(),
            self.labels.clone(),
        )?;
        g.masks = self.masks.clone();
        g.subgroups = self.subgroups.clone();
        Ok(g)
    }

    /// Relabel nodes: node `i` becomes `perm[i]`. Edges, masks and tags follow.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.num_nodes();
        if perm.len() != n {
            return Err(Error::invalid("permutation length mismatch"));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid("not a permutation"));
            }
        }
        let mut features = Matrix::zeros(n, self.feature_dim());
        let mut labels = vec![0; n];
        for i in 0..n {
            features.row_mut(perm[i]).copy_from_slice(self.features.row(i));
            labels[perm[i]] = self.labels[i];
        }
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (perm[u], perm[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        let mut g = GraphBundle::new(self.name.clone(), self.num_classes, edges, features, labels)?;
        if let Some(m) = &self.masks {
            let map = |s: &[usize]| s.iter().map(|&i| perm[i]).collect::<Vec<_>>();
            g = g.with_masks(Masks::new(map(&m.train), map(&m.val), map(&m.test)))?;
        }
        if let Some(tags) = &self.subgroups {
            let mut t = vec![0; n];
            for i in 0..n {
                t[perm[i]] = tags[i];
            }
            g.subgroups = Some(t);
        }
        Ok(g)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn masks(&self) -> Option<&Masks> {
        self.masks.as_ref()
    }

    pub fn subgroups(&self) -> Option<&[u32]> {
        self.subgroups.as_deref()
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        self.adjacency.neighbors(i)
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.adjacency.degree(i)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Train mask, or `EmptyTrainMask` when absent or empty.
    pub fn train_nodes(&self) -> Result<&[usize]> {
        match &self.masks {
            Some(m) if !m.train.is_empty() => Ok(&m.train),
            _ => Err(Error::EmptyTrainMask),
        }
    }

    /// Test mask when present and non-empty, otherwise every node.
    pub fn eval_nodes(&self) -> Vec<usize> {
        match &self.masks {
            Some(m) if !m.test.is_empty() => m.test.clone(),
            _ => (0..self.num_nodes()).collect(),
        }
    }

    /// Nodes of each class, ascending.
    pub fn nodes_by_class(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_classes];
        for (i, &y) in self.labels.iter().enumerate() {
            out[y].push(i);
        }
        out
    }

    pub(crate) fn edge_set(&self) -> HashSet<(usize, usize)> {
        self.edges.iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feats(n: usize) -> Matrix {
        Matrix::zeros(n, 1)
    }

    #[test]
    fn rejects_structural_violations() {
        assert!(matches!(
            GraphBundle::new("g", 2, vec![(5, 5)], feats(6), vec![0; 6]),
            Err(Error::SelfLoop(5))
        ));
        assert!(matches!(
            GraphBundle::new("g", 2, vec![(0, 1), (0, 1)], feats(2), vec![0; 2]),
            Err(Error::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            GraphBundle::new("g", 2, vec![(0, 9)], feats(3), vec![0; 3]),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            GraphBundle::new("g", 2, vec![], feats(0), vec![]),
            Err(Error::EmptyGraph)
        ));
        assert!(GraphBundle::new("g", 2, vec![], feats(2), vec![0, 2]).is_err());
    }

    #[test]
    fn overlapping_masks_are_rejected() {
        let g = GraphBundle::new("g", 2, vec![], feats(4), vec![0; 4]).unwrap();
        let err = g
            .with_masks(Masks::new(vec![0, 1], vec![], vec![1, 2]))
            .unwrap_err();
        assert!(matches!(err, Error::MaskOverlap { node: 1, .. }));
    }

    #[test]
    fn adjacency_is_symmetric_and_sorted() {
        let g = GraphBundle::new("g", 1, vec![(1, 3), (0, 3), (0, 1)], feats(4), vec![0; 4]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 3), (1, 3)]);
        assert_eq!(g.neighbors(3), &[0, 1]);
        assert_eq!(g.neighbors(0), &[1, 3]);
        assert_eq!(g.degree(2), 0);
        assert!(g.has_edge(3, 1));
    }

    #[test]
    fn permutation_moves_everything_consistently() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let g = GraphBundle::new("g", 2, vec![(0, 1)], x, vec![0, 1, 1])
            .unwrap()
            .with_masks(Masks::new(vec![0], vec![], vec![2]))
            .unwrap();
        let p = g.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.labels(), &[1, 1, 0]);
        assert_eq!(p.edges(), &[(0, 2)]);
        assert_eq!(p.features().row(2), &[0.0]);
        assert_eq!(p.masks().unwrap().train, vec![2]);
        assert_eq!(p.masks().unwrap().test, vec![1]);
    }
}
