//! Attributed graphs, their dense matrix representations and the
//! permutation action that reorders nodes.
//!
//! An [`AttributedGraph`] stores node attributes densely and edge attributes
//! sparsely. A [`Representation`] is the dense `n x n` array of attribute
//! vectors obtained for one particular node ordering: the diagonal holds node
//! attributes and off-diagonal cells hold edge attributes, with the zero
//! vector standing for "no edge". All orderings of the same graph form its
//! orbit under [`Permutation`]s.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::numeric::exact_dot;

/// Undirected graph whose nodes and edges carry real vectors of a common
/// dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedGraph {
    attr_dim: usize,
    nodes: Vec<f64>,
    // keyed by (i, j) with i < j
    edges: BTreeMap<(usize, usize), Vec<f64>>,
}

impl AttributedGraph {
    /// Graph with `order` nodes, all attributes zero, and no edges.
    pub fn empty(attr_dim: usize, order: usize) -> Result<Self> {
        if attr_dim == 0 {
            return Err(invalid("attribute dimension must be at least 1"));
        }
        Ok(Self {
            attr_dim,
            nodes: vec![0.0; attr_dim * order],
            edges: BTreeMap::new(),
        })
    }

    pub fn from_nodes<V: AsRef<[f64]>>(attr_dim: usize, nodes: &[V]) -> Result<Self> {
        let mut g = Self::empty(attr_dim, nodes.len())?;
        for (i, v) in nodes.iter().enumerate() {
            g.set_node(i, v.as_ref())?;
        }
        Ok(g)
    }

    /// Builds a graph from node attributes and `(i, j, attr)` edges.
    pub fn from_parts<V: AsRef<[f64]>>(
        attr_dim: usize,
        nodes: &[V],
        edges: &[(usize, usize, Vec<f64>)],
    ) -> Result<Self> {
        let mut g = Self::from_nodes(attr_dim, nodes)?;
        for (i, j, a) in edges {
            g.add_edge(*i, *j, a)?;
        }
        Ok(g)
    }

    pub fn order(&self) -> usize {
        self.nodes.len() / self.attr_dim
    }

    pub fn attr_dim(&self) -> usize {
        self.attr_dim
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.attr_dim..(i + 1) * self.attr_dim]
    }

    pub fn set_node(&mut self, i: usize, attr: &[f64]) -> Result<()> {
        self.check_dim(attr)?;
        if i >= self.order() {
            return Err(invalid(format!("node {i} out of range for order {}", self.order())));
        }
        let d = self.attr_dim;
        self.nodes[i * d..(i + 1) * d].copy_from_slice(attr);
        Ok(())
    }

    /// Inserts (or replaces) the undirected edge `{i, j}`.
    ///
    /// Self-loops are rejected because the `(i, i)` slot belongs to the node
    /// attribute, and zero vectors are rejected because they encode a
    /// non-edge.
    pub fn add_edge(&mut self, i: usize, j: usize, attr: &[f64]) -> Result<()> {
        self.check_dim(attr)?;
        let n = self.order();
        if i >= n || j >= n {
            return Err(invalid(format!("edge ({i}, {j}) out of range for order {n}")));
        }
        if i == j {
            return Err(invalid(format!("self-loop at node {i}")));
        }
        if attr.iter().all(|&a| a == 0.0) {
            return Err(invalid(format!(
                "edge ({i}, {j}) has a zero attribute vector; attach an edge flag"
            )));
        }
        self.edges.insert(edge_key(i, j), attr.to_vec());
        Ok(())
    }

    pub fn edge(&self, i: usize, j: usize) -> Option<&[f64]> {
        self.edges.get(&edge_key(i, j)).map(Vec::as_slice)
    }

    /// Edges as `(i, j, attr)` with `i < j`, in ascending key order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &[f64])> + '_ {
        self.edges.iter().map(|(&(i, j), a)| (i, j, a.as_slice()))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_finite(&self) -> bool {
        self.nodes.iter().all(|v| v.is_finite())
            && self.edges.values().flatten().all(|v| v.is_finite())
    }

    /// Fails with a validation error if any attribute is NaN or infinite.
    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(invalid("graph has non-finite attribute values"))
        }
    }

    /// Extends the graph with isolated zero-attribute nodes up to order `n`.
    pub fn pad_to_order(&self, n: usize) -> Result<Self> {
        if n < self.order() {
            return Err(Error::Size {
                expected: self.order(),
                found: n,
            });
        }
        let mut g = self.clone();
        g.nodes.resize(n * self.attr_dim, 0.0);
        Ok(g)
    }

    /// Appends one attribute dimension: `1` on every stored edge, `0` on
    /// every node.
    pub fn attach_edge_flag(&self) -> Self {
        let d = self.attr_dim;
        let mut nodes = Vec::with_capacity(self.order() * (d + 1));
        for i in 0..self.order() {
            nodes.extend_from_slice(self.node(i));
            nodes.push(0.0);
        }
        let edges = self
            .edges
            .iter()
            .map(|(&k, a)| {
                let mut a = a.clone();
                a.push(1.0);
                (k, a)
            })
            .collect();
        Self {
            attr_dim: d + 1,
            nodes,
            edges,
        }
    }

    /// Multiplies every node and edge attribute by `a`.
    ///
    /// Edges are dropped when `a == 0` so that stored edges stay non-zero.
    pub fn scaled(&self, a: f64) -> Self {
        let nodes = self.nodes.iter().map(|v| v * a).collect();
        let edges = if a == 0.0 {
            BTreeMap::new()
        } else {
            self.edges
                .iter()
                .map(|(&k, v)| (k, v.iter().map(|x| x * a).collect()))
                .collect()
        };
        Self {
            attr_dim: self.attr_dim,
            nodes,
            edges,
        }
    }

    /// Relabels node `i` as `p(i)`.
    pub fn permuted(&self, p: &Permutation) -> Result<Self> {
        if p.len() != self.order() {
            return Err(Error::Size {
                expected: self.order(),
                found: p.len(),
            });
        }
        let d = self.attr_dim;
        let mut nodes = vec![0.0; self.nodes.len()];
        for i in 0..self.order() {
            let t = p.apply(i);
            nodes[t * d..(t + 1) * d].copy_from_slice(self.node(i));
        }
        let edges = self
            .edges
            .iter()
            .map(|(&(i, j), a)| (edge_key(p.apply(i), p.apply(j)), a.clone()))
            .collect();
        Ok(Self {
            attr_dim: d,
            nodes,
            edges,
        })
    }

    pub fn to_representation(&self) -> Representation {
        let n = self.order();
        let mut r = Representation::zeros(n, self.attr_dim);
        for i in 0..n {
            r.cell_mut(i, i).copy_from_slice(self.node(i));
        }
        for (&(i, j), a) in &self.edges {
            r.cell_mut(i, j).copy_from_slice(a);
            r.cell_mut(j, i).copy_from_slice(a);
        }
        r
    }

    /// Reads a graph back from a symmetric representation; zero off-diagonal
    /// cells become non-edges.
    pub fn from_representation(r: &Representation) -> Result<Self> {
        if !r.is_symmetric() {
            return Err(invalid("representation is not symmetric"));
        }
        let n = r.order();
        let mut g = Self::empty(r.attr_dim(), n)?;
        for i in 0..n {
            g.set_node(i, r.cell(i, i))?;
            for j in i + 1..n {
                let c = r.cell(i, j);
                if c.iter().any(|&v| v != 0.0) {
                    g.edges.insert((i, j), c.to_vec());
                }
            }
        }
        Ok(g)
    }

    fn check_dim(&self, attr: &[f64]) -> Result<()> {
        if attr.len() != self.attr_dim {
            return Err(Error::DimensionMismatch {
                expected: self.attr_dim,
                found: attr.len(),
            });
        }
        Ok(())
    }
}

fn edge_key(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Dense `n x n` array of `d`-vectors, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    order: usize,
    attr_dim: usize,
    cells: Vec<f64>,
}

impl Representation {
    pub fn zeros(order: usize, attr_dim: usize) -> Self {
        Self {
            order,
            attr_dim,
            cells: vec![0.0; order * order * attr_dim],
        }
    }

    /// Wraps row-major cells of length `order * order * attr_dim`.
    pub fn from_cells(order: usize, attr_dim: usize, cells: Vec<f64>) -> Result<Self> {
        if attr_dim == 0 {
            return Err(invalid("attribute dimension must be at least 1"));
        }
        let expected = order * order * attr_dim;
        if cells.len() != expected {
            return Err(Error::Size {
                expected,
                found: cells.len(),
            });
        }
        Ok(Self {
            order,
            attr_dim,
            cells,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn attr_dim(&self) -> usize {
        self.attr_dim
    }

    pub fn cell(&self, i: usize, j: usize) -> &[f64] {
        let at = (i * self.order + j) * self.attr_dim;
        &self.cells[at..at + self.attr_dim]
    }

    pub fn cell_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let at = (i * self.order + j) * self.attr_dim;
        &mut self.cells[at..at + self.attr_dim]
    }

    /// The vectorized form, length `n * n * d`.
    pub fn as_slice(&self) -> &[f64] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<f64> {
        self.cells
    }

    pub fn dot(&self, other: &Representation) -> Result<f64> {
        if self.order != other.order || self.attr_dim != other.attr_dim {
            return Err(Error::Size {
                expected: self.cells.len(),
                found: other.cells.len(),
            });
        }
        Ok(exact_dot(&self.cells, &other.cells))
    }

    /// Correctly rounded, so it equals the exact self product bit for bit.
    pub fn norm_squared(&self) -> f64 {
        exact_dot(&self.cells, &self.cells)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_squared())
    }

    /// `self += a * other`, cellwise.
    pub fn add_scaled(&mut self, a: f64, other: &Representation) -> Result<()> {
        if self.order != other.order || self.attr_dim != other.attr_dim {
            return Err(Error::Size {
                expected: self.cells.len(),
                found: other.cells.len(),
            });
        }
        for (s, o) in self.cells.iter_mut().zip(&other.cells) {
            *s += a * o;
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.order).all(|i| (i + 1..self.order).all(|j| self.cell(i, j) == self.cell(j, i)))
    }

    /// Moves cell `(i, j)` to `(p(i), p(j))`.
    pub fn apply_permutation(&self, p: &Permutation) -> Result<Self> {
        if p.len() != self.order {
            return Err(Error::Size {
                expected: self.order,
                found: p.len(),
            });
        }
        let mut out = Self::zeros(self.order, self.attr_dim);
        for i in 0..self.order {
            for j in 0..self.order {
                out.cell_mut(p.apply(i), p.apply(j))
                    .copy_from_slice(self.cell(i, j));
            }
        }
        Ok(out)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A bijection on `{0, .., n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &t in &mapping {
            if t >= n || seen[t] {
                return Err(invalid(format!("{mapping:?} is not a permutation")));
            }
            seen[t] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.mapping[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.mapping
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &t) in self.mapping.iter().enumerate() {
            inv[t] = i;
        }
        Self { mapping: inv }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Permutation) -> Result<Self> {
        if first.len() != self.len() {
            return Err(Error::Size {
                expected: self.len(),
                found: first.len(),
            });
        }
        Ok(Self {
            mapping: first.mapping.iter().map(|&i| self.mapping[i]).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn running() -> AttributedGraph {
        AttributedGraph::from_parts(1, &[[1.0], [2.0]], &[(0, 1, vec![1.0])]).unwrap()
    }

    #[test]
    fn pad_identity_and_growth() {
        let g = running();
        assert_eq!(g.pad_to_order(2).unwrap(), g);

        let e = AttributedGraph::empty(1, 0).unwrap().pad_to_order(3).unwrap();
        assert_eq!(e.order(), 3);
        assert_eq!(e.edge_count(), 0);
        assert!((0..3).all(|i| e.node(i) == [0.0]));

        let p = g.pad_to_order(4).unwrap();
        assert_eq!(p.order(), 4);
        assert_eq!(p.edge(0, 1), Some(&[1.0][..]));
        assert_eq!(p.edge_count(), 1);
        assert_eq!(p.node(2), [0.0]);
        assert_eq!(p.node(3), [0.0]);
    }

    #[test]
    fn pad_below_order_is_size_error() {
        assert!(matches!(running().pad_to_order(1), Err(Error::Size { .. })));
    }

    #[test]
    fn edge_flag() {
        let g = AttributedGraph::from_parts(1, &[[2.5], [0.0]], &[(0, 1, vec![3.0])]).unwrap();
        let f = g.attach_edge_flag();
        assert_eq!(f.attr_dim(), 2);
        assert_eq!(f.node(0), [2.5, 0.0]);
        assert_eq!(f.edge(1, 0), Some(&[3.0, 1.0][..]));

        let bare = AttributedGraph::from_nodes(1, &[[1.0], [2.0]]).unwrap();
        let f = bare.attach_edge_flag();
        assert_eq!(f.attr_dim(), 2);
        assert_eq!(f.edge_count(), 0);
    }

    #[test]
    fn zero_edges_rejected() {
        let mut g = AttributedGraph::empty(1, 2).unwrap();
        assert!(g.add_edge(0, 1, &[0.0]).is_err());
        assert!(g.add_edge(0, 0, &[1.0]).is_err());
        assert!(g.add_edge(0, 2, &[1.0]).is_err());
        assert!(matches!(
            g.add_edge(0, 1, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn representation_cells() {
        let one = AttributedGraph::from_nodes(1, &[[3.0]]).unwrap();
        assert_eq!(one.to_representation().as_slice(), [3.0]);
        let r = running().to_representation();
        assert_eq!(r.as_slice(), [1.0, 1.0, 1.0, 2.0]);
        assert_eq!(AttributedGraph::from_representation(&r).unwrap(), running());
    }

    #[test]
    fn from_zero_representation() {
        let g = AttributedGraph::from_representation(&Representation::zeros(2, 1)).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn asymmetric_representation_rejected() {
        let r = Representation::from_cells(2, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(AttributedGraph::from_representation(&r).is_err());
    }

    #[test]
    fn swap_permutation() {
        let r = Representation::from_cells(2, 1, vec![1.0, 3.0, 3.0, 2.0]).unwrap();
        let swap = Permutation::new(vec![1, 0]).unwrap();
        assert_eq!(r.apply_permutation(&swap).unwrap().as_slice(), [2.0, 3.0, 3.0, 1.0]);
        assert_eq!(r.apply_permutation(&Permutation::identity(2)).unwrap(), r);
        assert!(r.apply_permutation(&Permutation::identity(3)).is_err());
    }

    #[test]
    fn invalid_permutations() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        assert!(Permutation::new(vec![]).is_ok());
    }

    #[test]
    fn permuted_graph_matches_permuted_representation() {
        let g = AttributedGraph::from_parts(
            1,
            &[[1.0], [2.0], [3.0]],
            &[(0, 1, vec![4.0]), (1, 2, vec![5.0])],
        )
        .unwrap();
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        assert_eq!(
            g.permuted(&p).unwrap().to_representation(),
            g.to_representation().apply_permutation(&p).unwrap()
        );
    }
}
