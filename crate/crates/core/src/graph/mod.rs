//! Typed undirected graphs over a population of agents.
//!
//! A [`Population`] assigns every agent a type (color). A [`Graph`] is a
//! simple undirected graph on the same agent ids, stored as sorted neighbor
//! lists so that iteration order (and therefore tie-breaking in the
//! dynamics) is deterministic.

pub(crate) mod distance;
mod format;

pub use distance::{
    bfs_row, delta_distance_add, delta_distance_delete, diameter, distance_sum, DistanceDelta,
    DistanceMatrix, DistanceSum, UNREACHABLE,
};
pub use format::{read_graph_file, write_graph_file, GraphFile};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("agent {agent} out of range for n = {n}")]
    OutOfRange { agent: usize, n: usize },
    #[error("self-loop at agent {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) already present")]
    EdgePresent(usize, usize),
    #[error("edge ({0}, {1}) not present")]
    EdgeAbsent(usize, usize),
    #[error("invalid population: {0}")]
    InvalidPopulation(String),
    #[error("malformed graph file: {0}")]
    Format(String),
}

/// Agent type assignment with per-type counts.
///
/// Type ids are `0..k`; every type has at least one agent. The blue
/// (minority) and red (majority) sizes are the minimum and maximum counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    types: Vec<usize>,
    counts: Vec<usize>,
}

impl Population {
    pub fn new(types: Vec<usize>) -> Result<Self, GraphError> {
        if types.is_empty() {
            return Err(GraphError::InvalidPopulation("no agents".into()));
        }
        let k = types.iter().max().map_or(0, |&t| t + 1);
        let mut counts = vec![0usize; k];
        for &t in &types {
            counts[t] += 1;
        }
        if let Some(t) = counts.iter().position(|&c| c == 0) {
            return Err(GraphError::InvalidPopulation(format!(
                "type {t} has no agents"
            )));
        }
        Ok(Self { types, counts })
    }

    /// Agents `0..counts[0]` get type 0, the next `counts[1]` type 1, and so on.
    pub fn from_counts(counts: &[usize]) -> Result<Self, GraphError> {
        if counts.contains(&0) {
            return Err(GraphError::InvalidPopulation(
                "every type needs at least one agent".into(),
            ));
        }
        let types = counts
            .iter()
            .enumerate()
            .flat_map(|(t, &c)| std::iter::repeat_n(t, c))
            .collect();
        Self::new(types)
    }

    pub fn n(&self) -> usize {
        self.types.len()
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn type_of(&self, u: usize) -> usize {
        self.types[u]
    }

    pub fn types(&self) -> &[usize] {
        &self.types
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn count(&self, t: usize) -> usize {
        self.counts[t]
    }

    /// Size of a smallest type (`n_B`).
    pub fn blue_count(&self) -> usize {
        *self.counts.iter().min().expect("population has a type")
    }

    /// Size of a largest type (`n_R`).
    pub fn red_count(&self) -> usize {
        *self.counts.iter().max().expect("population has a type")
    }

    pub fn same_type(&self, u: usize, v: usize) -> bool {
        self.types[u] == self.types[v]
    }

    /// Agents of type `t` in increasing id order.
    pub fn members(&self, t: usize) -> Vec<usize> {
        (0..self.n()).filter(|&u| self.types[u] == t).collect()
    }

    /// Whether type sizes are non-decreasing in type id.
    pub fn is_sorted_by_size(&self) -> bool {
        self.counts.windows(2).all(|w| w[0] <= w[1])
    }
}

/// An unordered agent pair in canonical `(min, max)` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(usize, usize);

impl Edge {
    pub fn new(u: usize, v: usize) -> Self {
        if u <= v {
            Edge(u, v)
        } else {
            Edge(v, u)
        }
    }

    pub fn lo(self) -> usize {
        self.0
    }

    pub fn hi(self) -> usize {
        self.1
    }

    /// The endpoint that is not `u`.
    pub fn other(self, u: usize) -> usize {
        if self.0 == u {
            self.1
        } else {
            self.0
        }
    }
}

/// Same-type / other-type neighbor counts of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NeighborhoodProfile {
    pub deg: usize,
    /// Same-type neighbors.
    pub same_type: usize,
    /// Other-type neighbors.
    pub other_type: usize,
}

impl NeighborhoodProfile {
    pub fn new(same_type: usize, other_type: usize) -> Self {
        Self {
            deg: same_type + other_type,
            same_type,
            other_type,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.deg == self.same_type + self.other_type
    }
}

/// Simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    m: usize,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    /// Builds a graph with the given edges; duplicates (in either
    /// orientation) are collapsed.
    pub fn new<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            g.check_pair(u, v)?;
            if !g.has_edge(u, v) {
                g.insert_unchecked(u, v);
            }
        }
        Ok(g)
    }

    /// Builds a graph whose edges are the union of per-agent-pair
    /// predicates; used by the constructions.
    pub fn from_predicate(n: usize, mut pred: impl FnMut(usize, usize) -> bool) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                if pred(u, v) {
                    g.insert_unchecked(u, v);
                }
            }
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        Self::from_predicate(n, |_, _| true)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    /// All edges in canonical lexicographic order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.m);
        for (u, nb) in self.adj.iter().enumerate() {
            out.extend(nb.iter().filter(|&&v| v > u).map(|&v| Edge(u, v)));
        }
        out
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<(), GraphError> {
        let n = self.n();
        for a in [u, v] {
            if a >= n {
                return Err(GraphError::OutOfRange { agent: a, n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        Ok(())
    }

    fn insert_unchecked(&mut self, u: usize, v: usize) {
        for (a, b) in [(u, v), (v, u)] {
            let list = &mut self.adj[a];
            let pos = list.binary_search(&b).unwrap_err();
            list.insert(pos, b);
        }
        self.m += 1;
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        self.check_pair(u, v)?;
        if self.has_edge(u, v) {
            let e = Edge::new(u, v);
            return Err(GraphError::EdgePresent(e.0, e.1));
        }
        self.insert_unchecked(u, v);
        Ok(())
    }

    pub fn delete_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        self.check_pair(u, v)?;
        let e = Edge::new(u, v);
        let pu = self.adj[u]
            .binary_search(&v)
            .map_err(|_| GraphError::EdgeAbsent(e.0, e.1))?;
        self.adj[u].remove(pu);
        let pv = self.adj[v].binary_search(&u).expect("adjacency is symmetric");
        self.adj[v].remove(pv);
        self.m -= 1;
        Ok(())
    }

    /// Adds the edge if absent, deletes it if present.
    pub fn toggle_edge(&mut self, u: usize, v: usize) -> Result<bool, GraphError> {
        if self.has_edge(u, v) {
            self.delete_edge(u, v)?;
            Ok(false)
        } else {
            self.add_edge(u, v)?;
            Ok(true)
        }
    }

    pub fn neighborhood_profile(&self, pop: &Population, u: usize) -> NeighborhoodProfile {
        let same = self.adj[u]
            .iter()
            .filter(|&&v| pop.same_type(u, v))
            .count();
        NeighborhoodProfile::new(same, self.degree(u) - same)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        bfs_row(self, 0).iter().all(|&d| d != UNREACHABLE)
    }

    /// Subgraph induced by `nodes`, re-indexed to `0..nodes.len()` in the
    /// order given. Returns the subgraph and the mapping new id -> old id.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<(Graph, Vec<usize>), GraphError> {
        let n = self.n();
        let mut index = vec![usize::MAX; n];
        for (i, &u) in nodes.iter().enumerate() {
            if u >= n {
                return Err(GraphError::OutOfRange { agent: u, n });
            }
            index[u] = i;
        }
        let mut sub = Graph::empty(nodes.len());
        for (i, &u) in nodes.iter().enumerate() {
            for &v in &self.adj[u] {
                let j = index[v];
                if j != usize::MAX && i < j {
                    sub.insert_unchecked(i, j);
                }
            }
        }
        Ok((sub, nodes.to_vec()))
    }

    pub fn is_clique(&self) -> bool {
        let n = self.n();
        self.m == n * n.saturating_sub(1) / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_graph_dedups_and_counts() {
        let g = Graph::new(3, []).unwrap();
        assert_eq!(g.m(), 0);
        let g = Graph::new(3, [(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.m(), 1);
        assert_eq!(g.edges(), vec![Edge::new(0, 1)]);
    }

    #[test]
    fn new_graph_rejects_bad_input() {
        assert_eq!(Graph::new(2, [(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(
            Graph::new(2, [(0, 2)]),
            Err(GraphError::OutOfRange { agent: 2, n: 2 })
        );
    }

    #[test]
    fn add_delete_round_trip() {
        let mut g = Graph::empty(2);
        g.add_edge(0, 1).unwrap();
        assert_eq!(g.m(), 1);
        assert_eq!(g.add_edge(1, 0), Err(GraphError::EdgePresent(0, 1)));

        let orig = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let mut h = orig.clone();
        h.delete_edge(2, 1).unwrap();
        assert_eq!(h.m(), 2);
        assert_eq!(h.delete_edge(1, 2), Err(GraphError::EdgeAbsent(1, 2)));
        h.add_edge(1, 2).unwrap();
        assert_eq!(h, orig);
    }

    #[test]
    fn neighborhood_profiles() {
        let pop = Population::from_counts(&[4]).unwrap();
        let k4 = Graph::complete(4);
        assert_eq!(
            k4.neighborhood_profile(&pop, 2),
            NeighborhoodProfile::new(3, 0)
        );
        let g = Graph::empty(4);
        assert_eq!(g.neighborhood_profile(&pop, 0), NeighborhoodProfile::default());
    }

    #[test]
    fn induced_subgraphs() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let (empty, map) = g.induced_subgraph(&[]).unwrap();
        assert_eq!((empty.n(), empty.m(), map.len()), (0, 0, 0));
        let (all, _) = g.induced_subgraph(&[0, 1, 2, 3]).unwrap();
        assert_eq!(all, g);
        let (sub, map) = g.induced_subgraph(&[3, 0, 2]).unwrap();
        assert_eq!(map, vec![3, 0, 2]);
        assert_eq!(sub.edges(), vec![Edge::new(0, 1), Edge::new(0, 2)]);
        assert!(g.induced_subgraph(&[7]).is_err());
    }

    #[test]
    fn population_counts() {
        let pop = Population::new(vec![1, 0, 1, 1]).unwrap();
        assert_eq!(pop.counts(), &[1, 3]);
        assert_eq!((pop.blue_count(), pop.red_count()), (1, 3));
        assert!(Population::new(vec![0, 2]).is_err());
        assert!(Population::from_counts(&[2, 0]).is_err());
    }
}
