//! Simple undirected graphs used to define graph states.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("adjacency matrix is not square (row {row} has {len} entries, expected {n})")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("adjacency matrix is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("adjacency matrix has a self loop on vertex {0}")]
    SelfLoop(usize),
    #[error("adjacency entries must be 0 or 1, found {0}")]
    NotBinary(u8),
    #[error("graph has no vertices")]
    Empty,
    #[error("graph has {0} vertices; at most 64 are supported")]
    TooLarge(usize),
    #[error("edge ({0}, {1}) refers to a missing vertex")]
    BadEdge(usize, usize),
}

/// Undirected simple graph on `n` vertices, vertex `v` is qubit `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct Graph {
    neighbors: Vec<u64>,
}

impl Graph {
    pub fn from_adjacency(rows: &[Vec<u8>]) -> Result<Self, GraphError> {
        let n = rows.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if n > 64 {
            return Err(GraphError::TooLarge(n));
        }
        if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != n) {
            return Err(GraphError::NotSquare { row: r, len: row.len(), n });
        }
        let mut neighbors = vec![0u64; n];
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 if r == c => return Err(GraphError::SelfLoop(r)),
                    1 => neighbors[r] |= 1 << c,
                    other => return Err(GraphError::NotBinary(other)),
                }
                if rows[c][r] != v {
                    return Err(GraphError::Asymmetric(r, c));
                }
            }
        }
        Ok(Graph { neighbors })
    }

    /// Zero-based edge list.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if n > 64 {
            return Err(GraphError::TooLarge(n));
        }
        let mut neighbors = vec![0u64; n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(GraphError::BadEdge(a, b));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            neighbors[a] |= 1 << b;
            neighbors[b] |= 1 << a;
        }
        Ok(Graph { neighbors })
    }

    pub fn empty(n: usize) -> Result<Self, GraphError> {
        Self::from_edges(n, &[])
    }

    pub fn path(n: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Self::from_edges(n, &edges)
    }

    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        if n > 2 {
            edges.push((n - 1, 0));
        }
        Self::from_edges(n, &edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.neighbors.len()
    }

    /// Neighbor mask of vertex `v`.
    pub fn neighbors(&self, v: usize) -> u64 {
        self.neighbors[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n_vertices();
        (0..n)
            .flat_map(|a| (a + 1..n).filter(move |&b| self.neighbors[a] >> b & 1 == 1).map(move |b| (a, b)))
            .collect()
    }

    pub fn adjacency(&self) -> Vec<Vec<u8>> {
        let n = self.n_vertices();
        (0..n).map(|a| (0..n).map(|b| (self.neighbors[a] >> b & 1) as u8).collect()).collect()
    }
}

impl TryFrom<Vec<Vec<u8>>> for Graph {
    type Error = GraphError;

    fn try_from(rows: Vec<Vec<u8>>) -> Result<Self, Self::Error> {
        Graph::from_adjacency(&rows)
    }
}

impl From<Graph> for Vec<Vec<u8>> {
    fn from(g: Graph) -> Self {
        g.adjacency()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_matrices() {
        assert_eq!(
            Graph::from_adjacency(&[vec![0, 1], vec![0, 0]]),
            Err(GraphError::Asymmetric(0, 1))
        );
        assert_eq!(Graph::from_adjacency(&[vec![1]]), Err(GraphError::SelfLoop(0)));
        assert!(Graph::from_adjacency(&[vec![0, 2], vec![2, 0]]).is_err());
        assert!(Graph::from_adjacency(&[vec![0, 1]]).is_err());
    }

    #[test]
    fn path_and_cycle() {
        assert_eq!(Graph::path(4).unwrap().edges(), vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(Graph::cycle(5).unwrap().edges().len(), 5);
        let g = Graph::path(3).unwrap();
        assert_eq!(Graph::from_adjacency(&g.adjacency()).unwrap(), g);
    }
}
