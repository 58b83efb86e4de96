//! Pairwise stability, epsilon-approximate stability, best responses and an
//! exhaustive enumeration of stable graphs on small populations.
//!
//! Conventions:
//! * deletion: unstable iff some agent strictly gains by dropping an edge;
//! * addition: unstable iff both endpoints strictly gain;
//! * with a factor `eps >= 1`, the acting agent needs `new * eps < old`,
//!   while an addition partner only needs a strict gain.
//!
//! Infinite costs compare by the number of unreachable agents first.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{
    edge_kind, Action, Cost, CostDelta, CostModel, CostParams, Rational, Scalar,
};
use crate::graph::{
    bfs_row, delta_distance_add, delta_distance_delete, distance_sum, DistanceMatrix, Edge, Graph,
    Population,
};

/// Largest population accepted by [`enumerate_stable_graphs`].
pub const MAX_ENUMERATION_N: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StabilityError {
    #[error("epsilon must be at least 1, got {0}")]
    EpsilonBelowOne(Rational),
    #[error("enumeration supports at most {MAX_ENUMERATION_N} agents, got {0}")]
    TooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    AddEdge(Edge),
    DeleteEdge(Edge),
    Pass,
}

impl Move {
    pub fn edge(&self) -> Option<Edge> {
        match *self {
            Move::AddEdge(e) | Move::DeleteEdge(e) => Some(e),
            Move::Pass => None,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::AddEdge(e) => write!(f, "add {}-{}", e.lo(), e.hi()),
            Move::DeleteEdge(e) => write!(f, "delete {}-{}", e.lo(), e.hi()),
            Move::Pass => f.write_str("pass"),
        }
    }
}

/// Which moves an agent may consider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "best_move", alias = "best", alias = "full")]
    Full,
    #[serde(rename = "add_only", alias = "add-only")]
    AddOnly,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Full => "best_move",
            Mode::AddOnly => "add_only",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "best" | "best_move" | "best-move" | "full" => Ok(Mode::Full),
            "add-only" | "add_only" => Ok(Mode::AddOnly),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

/// A move that improves its agent, with the cost changes of both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<S> {
    pub mv: Move,
    pub delta: CostDelta<S>,
    /// Cost change of the other endpoint; present for additions.
    pub partner_delta: Option<CostDelta<S>>,
}

/// Proof of instability: an agent and a move it would make.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub agent: usize,
    pub mv: Move,
    pub delta: CostDelta<BigRational>,
    pub partner_delta: Option<CostDelta<BigRational>>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agent {} {} (delta {})", self.agent, self.mv, self.delta)?;
        if let Some(p) = &self.partner_delta {
            write!(f, ", partner delta {p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    witness: Option<Witness>,
}

impl StabilityReport {
    pub fn stable() -> Self {
        Self { witness: None }
    }

    pub fn unstable(witness: Witness) -> Self {
        Self {
            witness: Some(witness),
        }
    }

    pub fn is_stable(&self) -> bool {
        self.witness.is_none()
    }

    pub fn witness(&self) -> Option<&Witness> {
        self.witness.as_ref()
    }
}

/// Every move that improves `u` by more than the factor `eps` (and, for
/// additions, strictly improves the partner). Deletions come first, then
/// additions, each in increasing partner order. `dm` must be current.
pub fn available_moves<S: Scalar>(
    model: &CostModel<S>,
    pop: &Population,
    g: &Graph,
    dm: &DistanceMatrix,
    u: usize,
    mode: Mode,
    eps: &S,
) -> Vec<Candidate<S>> {
    let mut out = Vec::new();
    let profile_u = g.neighborhood_profile(pop, u);
    let old_u = model.cost_from_parts(&profile_u, dm.sum(u));

    if mode == Mode::Full {
        for &v in g.neighbors(u) {
            let dn = model
                .delta_neighborhood(&profile_u, edge_kind(pop, u, v), Action::Delete)
                .expect("profile of an existing edge");
            let dd = delta_distance_delete(g, u, v).expect("edge exists");
            let delta = CostDelta::new(dn, dd);
            if old_u.improved_by(&delta, eps) {
                out.push(Candidate {
                    mv: Move::DeleteEdge(Edge::new(u, v)),
                    delta,
                    partner_delta: None,
                });
            }
        }
    }

    let row_u = dm.row(u);
    let mut nbrs = g.neighbors(u).iter().peekable();
    for v in 0..g.n() {
        if v == u {
            continue;
        }
        while nbrs.next_if(|&&w| w < v).is_some() {}
        if nbrs.peek() == Some(&&v) {
            continue;
        }
        let kind = edge_kind(pop, u, v);
        let dn_u = model
            .delta_neighborhood(&profile_u, kind, Action::Add)
            .expect("consistent profile");
        let delta = CostDelta::new(dn_u, delta_distance_add(row_u, dm.row(v)));
        if !old_u.improved_by(&delta, eps) {
            continue;
        }
        let profile_v = g.neighborhood_profile(pop, v);
        let dn_v = model
            .delta_neighborhood(&profile_v, kind, Action::Add)
            .expect("consistent profile");
        let partner = CostDelta::new(dn_v, delta_distance_add(dm.row(v), row_u));
        if partner.is_improving() {
            out.push(Candidate {
                mv: Move::AddEdge(Edge::new(u, v)),
                delta,
                partner_delta: Some(partner),
            });
        }
    }
    out
}

/// The available move with the most negative cost change for `u`; ties go
/// to deletions before additions, then to the smallest partner. `Pass` when
/// nothing is available.
pub fn best_response<S: Scalar>(
    model: &CostModel<S>,
    pop: &Population,
    g: &Graph,
    dm: &DistanceMatrix,
    u: usize,
    mode: Mode,
    eps: &S,
) -> Move {
    let mut best: Option<Candidate<S>> = None;
    for c in available_moves(model, pop, g, dm, u, mode, eps) {
        let better = match &best {
            None => true,
            Some(b) => strictly_better(&c.delta, &b.delta),
        };
        if better {
            best = Some(c);
        }
    }
    best.map_or(Move::Pass, |c| c.mv)
}

/// `a` beats `b` beyond the comparison tolerance of `S`.
pub(crate) fn strictly_better<S: Scalar>(a: &CostDelta<S>, b: &CostDelta<S>) -> bool {
    a.unreachable < b.unreachable
        || (a.unreachable == b.unreachable && a.value.definitely_lt(&b.value))
}

fn to_witness(agent: usize, c: Candidate<BigRational>) -> Witness {
    Witness {
        agent,
        mv: c.mv,
        delta: c.delta,
        partner_delta: c.partner_delta,
    }
}

fn first_witness(
    model: &CostModel<BigRational>,
    pop: &Population,
    g: &Graph,
    dm: &DistanceMatrix,
    eps: &BigRational,
) -> Option<Witness> {
    (0..g.n()).find_map(|u| {
        available_moves(model, pop, g, dm, u, Mode::Full, eps)
            .into_iter()
            .next()
            .map(|c| to_witness(u, c))
    })
}

fn exact_cost(model: &CostModel<BigRational>, pop: &Population, g: &Graph, u: usize) -> Cost<BigRational> {
    let p = g.neighborhood_profile(pop, u);
    model.cost_from_parts(&p, distance_sum(&bfs_row(g, u)))
}

fn cost_lt(a: &Cost<BigRational>, b: &Cost<BigRational>) -> bool {
    a.unreachable < b.unreachable || (a.unreachable == b.unreachable && a.value < b.value)
}

/// Pairwise stability checked literally: every candidate graph `G - uv` and
/// `G + uv` is built and every affected cost recomputed from scratch in
/// exact arithmetic.
pub fn is_pairwise_stable(params: &CostParams, pop: &Population, g: &Graph) -> StabilityReport {
    let model = CostModel::<BigRational>::new(*params, g.n());
    let before: Vec<_> = (0..g.n()).map(|u| exact_cost(&model, pop, g, u)).collect();
    let mut h = g.clone();
    for u in 0..g.n() {
        for &v in g.neighbors(u) {
            h.delete_edge(u, v).expect("edge exists");
            let after = exact_cost(&model, pop, &h, u);
            h.add_edge(u, v).expect("edge was removed");
            if cost_lt(&after, &before[u]) {
                return StabilityReport::unstable(Witness {
                    agent: u,
                    mv: Move::DeleteEdge(Edge::new(u, v)),
                    delta: before[u].delta_to(&after),
                    partner_delta: None,
                });
            }
        }
    }
    for u in 0..g.n() {
        for v in u + 1..g.n() {
            if g.has_edge(u, v) {
                continue;
            }
            h.add_edge(u, v).expect("non-edge");
            let after_u = exact_cost(&model, pop, &h, u);
            let after_v = exact_cost(&model, pop, &h, v);
            h.delete_edge(u, v).expect("edge was added");
            if cost_lt(&after_u, &before[u]) && cost_lt(&after_v, &before[v]) {
                return StabilityReport::unstable(Witness {
                    agent: u,
                    mv: Move::AddEdge(Edge::new(u, v)),
                    delta: before[u].delta_to(&after_u),
                    partner_delta: Some(before[v].delta_to(&after_v)),
                });
            }
        }
    }
    StabilityReport::stable()
}

/// Stable iff no agent has an available move at factor `eps`.
pub fn is_approx_stable(
    params: &CostParams,
    pop: &Population,
    g: &Graph,
    eps: Rational,
) -> Result<StabilityReport, StabilityError> {
    let dm = DistanceMatrix::compute(g);
    is_approx_stable_with(params, pop, g, &dm, eps)
}

/// [`is_approx_stable`] reusing a current distance matrix.
pub fn is_approx_stable_with(
    params: &CostParams,
    pop: &Population,
    g: &Graph,
    dm: &DistanceMatrix,
    eps: Rational,
) -> Result<StabilityReport, StabilityError> {
    if eps < Rational::from_integer(1) {
        return Err(StabilityError::EpsilonBelowOne(eps));
    }
    let model = CostModel::<BigRational>::new(*params, g.n());
    let eps = BigRational::from_rational(&eps);
    Ok(match first_witness(&model, pop, g, dm, &eps) {
        Some(w) => StabilityReport::unstable(w),
        None => StabilityReport::stable(),
    })
}

/// All labeled pairwise stable graphs on `pop` accepted by `constraint`,
/// ordered by their edge bitmask (bit `i` is the `i`-th pair in
/// lexicographic order).
pub fn enumerate_stable_graphs(
    params: &CostParams,
    pop: &Population,
    constraint: Option<&(dyn Fn(&Graph) -> bool + Sync)>,
) -> Result<Vec<Graph>, StabilityError> {
    let n = pop.n();
    if n > MAX_ENUMERATION_N {
        return Err(StabilityError::TooLarge(n));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    let total = pairs.len();
    let high = total.min(6);
    let low = total - high;
    let model = CostModel::<BigRational>::new(*params, n);
    let one = BigRational::from_integer(1.into());

    let mut found: Vec<(u64, Graph)> = (0u64..1 << high)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut mask = chunk << low;
            let mut g = Graph::empty(n);
            for (i, &(u, v)) in pairs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    g.add_edge(u, v).expect("fresh pair");
                }
            }
            let mut dm = DistanceMatrix::compute(&g);
            let mut hits = Vec::new();
            for t in 0u64..1 << low {
                if t > 0 {
                    let bit = t.trailing_zeros() as usize;
                    let (u, v) = pairs[bit];
                    mask ^= 1 << bit;
                    if g.toggle_edge(u, v).expect("valid pair") {
                        dm.apply_addition(u, v);
                    } else {
                        dm.recompute(&g);
                    }
                }
                if constraint.is_some_and(|c| !c(&g)) {
                    continue;
                }
                if first_witness(&model, pop, &g, &dm, &one).is_none() {
                    hits.push((mask, g.clone()));
                }
            }
            hits
        })
        .collect();
    found.sort_by_key(|(mask, _)| *mask);
    Ok(found.into_iter().map(|(_, g)| g).collect())
}
