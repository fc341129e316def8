//! Undirected interaction topologies and their algebraic objects: adjacency,
//! Laplacian `L`, oriented incidence matrix `D` (with `L = D D^T`) and the
//! algebraic connectivity `lambda_2(L)`.
//!
//! Nodes are zero-based. Edges are stored canonically as `(a, b)` with
//! `a < b`, sorted lexicographically, so every derived matrix is reproducible
//! regardless of input order.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{symmetric_eigenvalues, DenseMatrix};
use crate::{Error, Result};

/// Connectivity threshold on `lambda_2`.
pub const CONNECTIVITY_EPS: f64 = 1e-8;

/// An undirected edge `{a, b}` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    neighbors: Vec<Vec<usize>>,
}

/// Named graph families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFamily {
    Path,
    Ring,
    Complete,
    /// Node 0 is the hub.
    Star,
}

impl Graph {
    /// Builds a graph with unit edge weights.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let weighted: Vec<Edge> = edges
            .iter()
            .map(|&(a, b)| Edge { a, b, weight: 1.0 })
            .collect();
        Self::from_weighted_edges(n, &weighted)
    }

    /// Builds a graph from explicit edges. Only unit weights are accepted.
    ///
    /// Rejects self-loops, out-of-range endpoints, non-unit weights and
    /// duplicate unordered pairs, naming the offending pair.
    pub fn from_weighted_edges(n: usize, edges: &[Edge]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidNodeCount(n));
        }
        let mut canonical = Vec::with_capacity(edges.len());
        for e in edges {
            if e.a >= n || e.b >= n {
                return Err(Error::NodeOutOfRange { a: e.a, b: e.b, n });
            }
            if e.a == e.b {
                return Err(Error::SelfLoop { node: e.a });
            }
            if e.weight != 1.0 {
                return Err(Error::InvalidWeight {
                    a: e.a,
                    b: e.b,
                    weight: e.weight,
                });
            }
            canonical.push(Edge {
                a: e.a.min(e.b),
                b: e.a.max(e.b),
                weight: e.weight,
            });
        }
        canonical.sort_by_key(|e| (e.a, e.b));
        if let Some(w) = canonical
            .windows(2)
            .find(|w| (w[0].a, w[0].b) == (w[1].a, w[1].b))
        {
            return Err(Error::DuplicateEdge {
                a: w[0].a,
                b: w[0].b,
            });
        }

        let mut neighbors = vec![Vec::new(); n];
        for e in &canonical {
            neighbors[e.a].push(e.b);
            neighbors[e.b].push(e.a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self {
            n,
            edges: canonical,
            neighbors,
        })
    }

    pub fn family(family: GraphFamily, n: usize) -> Result<Self> {
        let edges: Vec<(usize, usize)> = match family {
            GraphFamily::Path => (1..n).map(|i| (i - 1, i)).collect(),
            GraphFamily::Ring => {
                if n < 3 {
                    return Err(Error::InvalidNodeCount(n));
                }
                (0..n).map(|i| (i, (i + 1) % n)).collect()
            }
            GraphFamily::Complete => (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .collect(),
            GraphFamily::Star => (1..n).map(|i| (0, i)).collect(),
        };
        Self::from_edges(n, &edges)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Sorted neighbor list of node `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn adjacency(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.a, e.b)] = e.weight;
            a[(e.b, e.a)] = e.weight;
        }
        a
    }

    /// `l_ii = sum_j a_ij`, `l_ij = -a_ij`.
    pub fn laplacian(&self) -> DenseMatrix {
        let mut l = DenseMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            l[(e.a, e.b)] -= e.weight;
            l[(e.b, e.a)] -= e.weight;
            l[(e.a, e.a)] += e.weight;
            l[(e.b, e.b)] += e.weight;
        }
        l
    }

    /// Node-by-edge incidence matrix; edge `k` leaves its lower-indexed node
    /// (-1) and enters the higher one (+1).
    pub fn incidence(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.edges.len());
        for (k, e) in self.edges.iter().enumerate() {
            d[(e.a, k)] = -1.0;
            d[(e.b, k)] = 1.0;
        }
        d
    }

    /// Laplacian eigenvalues, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        symmetric_eigenvalues(&self.laplacian())
    }

    /// Second-smallest Laplacian eigenvalue, clamped at zero. A single-node
    /// graph has no second eigenvalue and reports 0.
    pub fn algebraic_connectivity(&self) -> f64 {
        self.spectrum().get(1).copied().unwrap_or(0.0).max(0.0)
    }

    /// Breadth-first reachability from node 0.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &self.neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == self.n
    }

    /// `(D^T ⊗ I_p) x` for a stacked vector `x` of `n` blocks of size `p`.
    pub fn edge_differences(&self, x: &[f64], p: usize) -> Result<Vec<f64>> {
        if x.len() != self.n * p {
            return Err(Error::DimensionMismatch {
                expected: self.n * p,
                found: x.len(),
            });
        }
        let mut out = Vec::with_capacity(self.edges.len() * p);
        for e in &self.edges {
            for c in 0..p {
                out.push(x[e.b * p + c] - x[e.a * p + c]);
            }
        }
        Ok(out)
    }

    /// `(L ⊗ I_p) x` without forming the Kronecker product.
    pub fn laplacian_apply(&self, x: &[f64], p: usize) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for i in 0..self.n {
            for &j in &self.neighbors[i] {
                for c in 0..p {
                    out[i * p + c] += x[i * p + c] - x[j * p + c];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn single_edge_adjacency() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(
            g.adjacency(),
            DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
        );
        assert_eq!(
            g.laplacian(),
            DenseMatrix::from_rows(&[&[1.0, -1.0], &[-1.0, 1.0]])
        );
    }

    #[test]
    fn path_laplacian() {
        let expected =
            DenseMatrix::from_rows(&[&[1.0, -1.0, 0.0], &[-1.0, 2.0, -1.0], &[0.0, -1.0, 1.0]]);
        assert_eq!(p3().laplacian(), expected);
    }

    #[test]
    fn complete_graph_laplacian() {
        let l = Graph::family(GraphFamily::Complete, 4).unwrap().laplacian();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(l[(i, j)], if i == j { 3.0 } else { -1.0 });
            }
        }
    }

    #[test]
    fn duplicate_edge_rejected() {
        assert_eq!(
            Graph::from_edges(3, &[(0, 1), (0, 1)]),
            Err(Error::DuplicateEdge { a: 0, b: 1 })
        );
        // reversed orientation is the same unordered pair
        assert_eq!(
            Graph::from_edges(3, &[(1, 2), (2, 1)]),
            Err(Error::DuplicateEdge { a: 1, b: 2 })
        );
    }

    #[test]
    fn self_loop_and_range_rejected() {
        assert_eq!(
            Graph::from_edges(3, &[(1, 1)]),
            Err(Error::SelfLoop { node: 1 })
        );
        assert_eq!(
            Graph::from_edges(3, &[(0, 3)]),
            Err(Error::NodeOutOfRange { a: 0, b: 3, n: 3 })
        );
        assert_eq!(Graph::from_edges(0, &[]), Err(Error::InvalidNodeCount(0)));
    }

    #[test]
    fn non_unit_weight_rejected() {
        let err = Graph::from_weighted_edges(
            2,
            &[Edge {
                a: 0,
                b: 1,
                weight: 2.0,
            }],
        );
        assert!(matches!(err, Err(Error::InvalidWeight { .. })));
    }

    #[test]
    fn canonical_edge_order() {
        let g = Graph::from_edges(4, &[(3, 2), (1, 0), (2, 0)]).unwrap();
        let pairs: Vec<_> = g.edges().iter().map(|e| (e.a, e.b)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (2, 3)]);
    }

    #[test]
    fn single_edge_incidence() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let d = g.incidence();
        assert_eq!(d, DenseMatrix::from_rows(&[&[-1.0], &[1.0]]));
        assert_eq!(d.matmul(&d.transpose()), g.laplacian());
    }

    #[test]
    fn path_incidence_gram_is_laplacian() {
        let g = p3();
        let d = g.incidence();
        assert_eq!((d.rows(), d.cols()), (3, 2));
        assert_eq!(d.matmul(&d.transpose()), g.laplacian());
    }

    #[test]
    fn connectivity() {
        assert!(p3().is_connected());
        assert!(Graph::family(GraphFamily::Ring, 4).unwrap().is_connected());
        assert!(!Graph::from_edges(4, &[(0, 1), (2, 3)])
            .unwrap()
            .is_connected());
        assert!(Graph::from_edges(1, &[]).unwrap().is_connected());
    }

    #[test]
    fn algebraic_connectivity_small_graphs() {
        assert!((p3().algebraic_connectivity() - 1.0).abs() < 1e-10);
        let k4 = Graph::family(GraphFamily::Complete, 4).unwrap();
        assert!((k4.algebraic_connectivity() - 4.0).abs() < 1e-10);
        let split = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(split.algebraic_connectivity() < 1e-10);
    }

    #[test]
    fn edge_differences_use_fixed_orientation() {
        let d = p3().edge_differences(&[1.0, 0.0, -1.0], 1).unwrap();
        assert_eq!(d, vec![-1.0, -1.0]);
    }

    #[test]
    fn laplacian_apply_matches_dense() {
        let g = Graph::family(GraphFamily::Star, 5).unwrap();
        let x = [0.3, -1.0, 2.5, 0.0, 4.0];
        let dense = g.laplacian().matvec(&x);
        for (a, b) in g.laplacian_apply(&x, 1).iter().zip(&dense) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
