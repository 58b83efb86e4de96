//! Initial networks and colorings: random recursive trees, grids, and
//! integrated or segregated type assignments.
//!
//! All randomness comes from [`Xoshiro256PlusPlus`] seeded through
//! `seed_from_u64` (SplitMix64 expansion of the 64-bit seed), so a seed
//! reproduces the same network on every platform.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, Population};

pub type InitRng = Xoshiro256PlusPlus;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InitError {
    #[error("grid dimensions must be positive, got {rows}x{cols}")]
    ZeroDimension { rows: usize, cols: usize },
    #[error("type counts sum to {got}, expected {expected}")]
    CountMismatch { expected: usize, got: usize },
    #[error("segregated initialization needs exactly 2 types, got {0}")]
    RequiresTwoTypes(usize),
    #[error("cannot split {rows} grid rows at {split}")]
    BadSplit { rows: usize, split: usize },
    #[error("population needs at least one agent")]
    Empty,
    #[error("cannot parse {0:?}")]
    Parse(String),
}

/// Tree grown by attaching node `i` to a uniform node among `0..i`.
pub fn random_recursive_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Graph {
    let mut g = Graph::empty(n);
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        g.add_edge(parent, i).expect("new node");
    }
    g
}

/// 4-neighbor lattice; node `r * cols + c` sits at row `r`, column `c`.
pub fn grid(rows: usize, cols: usize) -> Result<Graph, InitError> {
    if rows == 0 || cols == 0 {
        return Err(InitError::ZeroDimension { rows, cols });
    }
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let u = r * cols + c;
            if c + 1 < cols {
                edges.push((u, u + 1));
            }
            if r + 1 < rows {
                edges.push((u, u + cols));
            }
        }
    }
    Ok(Graph::new(rows * cols, edges).expect("lattice pairs are valid"))
}

/// Uniformly random arrangement of the multiset of types with `counts`.
pub fn integrated_coloring<R: Rng + ?Sized>(
    n: usize,
    counts: &[usize],
    rng: &mut R,
) -> Result<Population, InitError> {
    let total: usize = counts.iter().sum();
    if total != n {
        return Err(InitError::CountMismatch {
            expected: n,
            got: total,
        });
    }
    let mut types: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(t, &c)| std::iter::repeat_n(t, c))
        .collect();
    types.shuffle(rng);
    Population::new(types).map_err(|_| InitError::Empty)
}

/// Two independent random recursive trees, agents `0..a` of type 0 and
/// `a..a+b` of type 1, joined by an edge between their first nodes.
pub fn segregated_tree<R: Rng + ?Sized>(
    half_counts: &[usize],
    rng: &mut R,
) -> Result<(Graph, Population), InitError> {
    let &[a, b] = half_counts else {
        return Err(InitError::RequiresTwoTypes(half_counts.len()));
    };
    if a == 0 || b == 0 {
        return Err(InitError::Empty);
    }
    let first = random_recursive_tree(a, rng);
    let second = random_recursive_tree(b, rng);
    let mut edges: Vec<(usize, usize)> = first.edges().iter().map(|e| (e.lo(), e.hi())).collect();
    edges.extend(second.edges().iter().map(|e| (e.lo() + a, e.hi() + a)));
    edges.push((0, a));
    let g = Graph::new(a + b, edges).expect("valid pairs");
    let pop = Population::from_counts(&[a, b]).expect("nonempty types");
    Ok((g, pop))
}

/// Grid whose first `split_rows` rows are type 0 and the rest type 1
/// (default split: half the rows). A split at 0 or `rows` yields a single
/// type.
pub fn segregated_grid(
    rows: usize,
    cols: usize,
    split_rows: Option<usize>,
) -> Result<(Graph, Population), InitError> {
    let g = grid(rows, cols)?;
    let split = split_rows.unwrap_or(rows / 2);
    if split > rows {
        return Err(InitError::BadSplit { rows, split });
    }
    let types = (0..rows * cols)
        .map(|u| usize::from(split > 0 && u / cols >= split))
        .collect();
    let pop = Population::new(types).map_err(|_| InitError::Empty)?;
    Ok((g, pop))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Topology {
    RandomTree,
    Grid { rows: usize, cols: usize },
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::RandomTree => f.write_str("tree"),
            Topology::Grid { rows, cols } => write!(f, "grid:{rows}x{cols}"),
        }
    }
}

impl FromStr for Topology {
    type Err = InitError;

    /// `tree` or `grid:RxC`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || InitError::Parse(s.to_string());
        match s.trim() {
            "tree" | "random_tree" => Ok(Topology::RandomTree),
            other => {
                let dims = other.strip_prefix("grid:").ok_or_else(err)?;
                let (r, c) = dims.split_once(['x', 'X']).ok_or_else(err)?;
                Ok(Topology::Grid {
                    rows: r.trim().parse().map_err(|_| err())?,
                    cols: c.trim().parse().map_err(|_| err())?,
                })
            }
        }
    }
}

impl TryFrom<String> for Topology {
    type Error = InitError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Topology> for String {
    fn from(t: Topology) -> String {
        t.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coloring {
    Integrated,
    Segregated,
}

impl fmt::Display for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coloring::Integrated => "integrated",
            Coloring::Segregated => "segregated",
        })
    }
}

impl FromStr for Coloring {
    type Err = InitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "integrated" => Ok(Coloring::Integrated),
            "segregated" => Ok(Coloring::Segregated),
            _ => Err(InitError::Parse(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InitSpec {
    pub topology: Topology,
    pub coloring: Coloring,
    pub counts: Vec<usize>,
    pub seed: u64,
}

impl InitSpec {
    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Generates the initial network and coloring. Segregated grids place
    /// type 0 in the first `counts[0] / cols` rows.
    pub fn generate(&self) -> Result<(Graph, Population), InitError> {
        let n = self.n();
        if n == 0 {
            return Err(InitError::Empty);
        }
        let mut rng = InitRng::seed_from_u64(self.seed);
        match (self.topology, self.coloring) {
            (Topology::RandomTree, Coloring::Integrated) => {
                let g = random_recursive_tree(n, &mut rng);
                let pop = integrated_coloring(n, &self.counts, &mut rng)?;
                Ok((g, pop))
            }
            (Topology::RandomTree, Coloring::Segregated) => segregated_tree(&self.counts, &mut rng),
            (Topology::Grid { rows, cols }, coloring) => {
                if rows * cols != n {
                    return Err(InitError::CountMismatch {
                        expected: rows * cols,
                        got: n,
                    });
                }
                match coloring {
                    Coloring::Integrated => {
                        let g = grid(rows, cols)?;
                        let pop = integrated_coloring(n, &self.counts, &mut rng)?;
                        Ok((g, pop))
                    }
                    Coloring::Segregated => {
                        if self.counts.len() != 2 {
                            return Err(InitError::RequiresTwoTypes(self.counts.len()));
                        }
                        let first = self.counts[0];
                        if !first.is_multiple_of(cols) || first == 0 || first == n {
                            return Err(InitError::BadSplit {
                                rows,
                                split: first / cols,
                            });
                        }
                        segregated_grid(rows, cols, Some(first / cols))
                    }
                }
            }
        }
    }
}
