//! Breadth-first distances, all-pairs distance matrices, and the
//! distance-cost deltas of single-edge moves.
//!
//! Unreachable targets carry [`UNREACHABLE`], which compares above every
//! finite distance. Distance sums keep the number of unreachable targets
//! separately from the finite part and order lexicographically by
//! `(unreachable, finite)`: an agent that cannot reach some agent has
//! infinite cost, and among such agents fewer unreachable targets is better.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;

use super::{Edge, Graph, GraphError};

pub const UNREACHABLE: u32 = u32::MAX;

/// Sum of distances from one agent, with unreachable targets counted apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DistanceSum {
    pub unreachable: usize,
    pub finite: u64,
}

impl DistanceSum {
    pub fn is_finite(&self) -> bool {
        self.unreachable == 0
    }

    pub fn value(&self) -> Option<u64> {
        self.is_finite().then_some(self.finite)
    }

    /// `other - self`.
    pub fn delta_to(&self, other: &DistanceSum) -> DistanceDelta {
        DistanceDelta {
            unreachable: other.unreachable as i64 - self.unreachable as i64,
            finite: other.finite as i64 - self.finite as i64,
        }
    }
}

impl Ord for DistanceSum {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.unreachable, self.finite).cmp(&(other.unreachable, other.finite))
    }
}

impl PartialOrd for DistanceSum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DistanceSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_finite() {
            write!(f, "{}", self.finite)
        } else {
            write!(f, "inf")
        }
    }
}

/// Change of a [`DistanceSum`] caused by a move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DistanceDelta {
    /// Change in the number of unreachable targets; negative when a move
    /// reconnects agents.
    pub unreachable: i64,
    /// Change in the finite part of the sum.
    pub finite: i64,
}

impl DistanceDelta {
    pub fn reconnects(&self) -> bool {
        self.unreachable < 0
    }

    pub fn disconnects(&self) -> bool {
        self.unreachable > 0
    }
}

/// Exact BFS distances from `source`.
pub fn bfs_row(g: &Graph, source: usize) -> Vec<u32> {
    let mut row = vec![UNREACHABLE; g.n()];
    let mut queue = VecDeque::with_capacity(g.n());
    bfs_fill(g, source, None, &mut row, &mut queue);
    row
}

/// BFS into a caller-owned buffer, optionally ignoring one edge.
pub(crate) fn bfs_fill(
    g: &Graph,
    source: usize,
    skip: Option<Edge>,
    row: &mut [u32],
    queue: &mut VecDeque<usize>,
) {
    row.fill(UNREACHABLE);
    queue.clear();
    row[source] = 0;
    queue.push_back(source);
    while let Some(x) = queue.pop_front() {
        let next = row[x] + 1;
        for &y in g.neighbors(x) {
            if row[y] == UNREACHABLE && skip != Some(Edge::new(x, y)) {
                row[y] = next;
                queue.push_back(y);
            }
        }
    }
}

pub fn distance_sum(row: &[u32]) -> DistanceSum {
    let mut s = DistanceSum::default();
    for &d in row {
        if d == UNREACHABLE {
            s.unreachable += 1;
        } else {
            s.finite += u64::from(d);
        }
    }
    s
}

/// Change of `u`'s distance sum when the non-edge `uv` is added, from the
/// BFS rows of `u` and `v` in the current graph. After adding `uv`,
/// `d'(u, x) = min(d(u, x), 1 + d(v, x))` exactly.
pub fn delta_distance_add(row_u: &[u32], row_v: &[u32]) -> DistanceDelta {
    let mut delta = DistanceDelta::default();
    for (&du, &dv) in row_u.iter().zip(row_v) {
        if dv == UNREACHABLE {
            continue;
        }
        let via = dv + 1;
        if du == UNREACHABLE {
            delta.unreachable -= 1;
            delta.finite += i64::from(via);
        } else if via < du {
            delta.finite -= i64::from(du - via);
        }
    }
    delta
}

/// Distance saving of adding `uv` when both rows are fully finite. This is
/// the inner loop of the dynamics and is kept branch-free.
#[inline]
pub(crate) fn add_gain_connected(row_u: &[u32], row_v: &[u32]) -> u64 {
    row_u
        .iter()
        .zip(row_v)
        .map(|(&du, &dv)| u64::from(du.saturating_sub(dv + 1)))
        .sum()
}

/// Change of `u`'s distance sum when the edge `uv` is deleted, by BFS on
/// `G - uv`.
pub fn delta_distance_delete(g: &Graph, u: usize, v: usize) -> Result<DistanceDelta, GraphError> {
    if u >= g.n() || v >= g.n() {
        return Err(GraphError::OutOfRange {
            agent: u.max(v),
            n: g.n(),
        });
    }
    if !g.has_edge(u, v) {
        let e = Edge::new(u, v);
        return Err(GraphError::EdgeAbsent(e.lo(), e.hi()));
    }
    let before = distance_sum(&bfs_row(g, u));
    let mut row = vec![UNREACHABLE; g.n()];
    let mut queue = VecDeque::new();
    bfs_fill(g, u, Some(Edge::new(u, v)), &mut row, &mut queue);
    Ok(before.delta_to(&distance_sum(&row)))
}

/// Largest finite distance, or `None` when the graph is disconnected.
pub fn diameter(g: &Graph) -> Option<u32> {
    let dm = DistanceMatrix::compute(g);
    let mut best = 0;
    for &d in &dm.data {
        if d == UNREACHABLE {
            return None;
        }
        best = best.max(d);
    }
    Some(best)
}

/// All-pairs shortest-path distances, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    /// `n` BFS passes.
    pub fn compute(g: &Graph) -> Self {
        let n = g.n();
        let mut dm = Self {
            n,
            data: vec![UNREACHABLE; n * n],
        };
        dm.recompute(g);
        dm
    }

    pub fn recompute(&mut self, g: &Graph) {
        let n = g.n();
        self.n = n;
        self.data.resize(n * n, UNREACHABLE);
        let mut queue = VecDeque::with_capacity(n);
        for (u, row) in self.data.chunks_mut(n.max(1)).enumerate().take(n) {
            bfs_fill(g, u, None, row, &mut queue);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, u: usize) -> &[u32] {
        &self.data[u * self.n..(u + 1) * self.n]
    }

    pub fn get(&self, u: usize, v: usize) -> u32 {
        self.data[u * self.n + v]
    }

    pub fn sum(&self, u: usize) -> DistanceSum {
        distance_sum(self.row(u))
    }

    pub fn is_connected(&self) -> bool {
        !self.data.contains(&UNREACHABLE)
    }

    pub fn diameter(&self) -> Option<u32> {
        if self.is_connected() {
            Some(self.data.iter().copied().max().unwrap_or(0))
        } else {
            None
        }
    }

    /// Updates the matrix after the edge `uv` has been added to the graph:
    /// `d'(x, y) = min(d(x, y), d(x, u) + 1 + d(v, y), d(x, v) + 1 + d(u, y))`.
    pub fn apply_addition(&mut self, u: usize, v: usize) {
        let n = self.n;
        let col_u: Vec<u32> = (0..n).map(|x| self.get(x, u)).collect();
        let col_v: Vec<u32> = (0..n).map(|x| self.get(x, v)).collect();
        let row_u = self.row(u).to_vec();
        let row_v = self.row(v).to_vec();
        for x in 0..n {
            let (xu, xv) = (col_u[x], col_v[x]);
            if xu == UNREACHABLE && xv == UNREACHABLE {
                continue;
            }
            let row = &mut self.data[x * n..(x + 1) * n];
            for y in 0..n {
                let mut best = row[y];
                if xu != UNREACHABLE && row_v[y] != UNREACHABLE {
                    best = best.min(xu + 1 + row_v[y]);
                }
                if xv != UNREACHABLE && row_u[y] != UNREACHABLE {
                    best = best.min(xv + 1 + row_u[y]);
                }
                row[y] = best;
            }
        }
    }
}
