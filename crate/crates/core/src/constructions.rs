//! Explicit stable networks and their alpha ranges.
//!
//! Agents of type `T_j` are addressed as `t_j^1, t_j^2, ...` in increasing
//! id order. For multi-type builders the types are ordered by size, ties
//! keeping the population's type order. Two-type builders use the blue
//! (smaller) and red (larger) type of [`metrics::blue_type`] /
//! [`metrics::red_type`].

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{format_rational, Model, Rational};
use crate::graph::{DistanceMatrix, Graph, Population, UNREACHABLE};
use crate::metrics;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("population does not fit {id}: {reason}")]
    PopulationMismatch { id: String, reason: String },
    #[error("{0} needs alpha to choose its edge set")]
    AlphaRequired(String),
    #[error("{id} is not defined for the {model} model")]
    ModelMismatch { id: String, model: Model },
    #[error("unknown construction {0:?}")]
    UnknownId(String),
}

/// How Algorithm 1 picks the next far-apart pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Algo1Policy {
    /// Smallest `(u, v)` first.
    #[default]
    Lexicographic,
    /// Uniform among all far-apart pairs.
    SeededRandom(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstructionId {
    Complete,
    Star { center: usize },
    DoubleStar,
    DoubleStarSwitched,
    IcfIntermediate2,
    IcfIntermediateK,
    IcfRstarHub,
    IcfBigHub,
    DeiBstarHub,
    DeiMatching,
    DeiCentralHubK,
    DeiAlgo1(Algo1Policy),
}

impl ConstructionId {
    /// One id of every kind (star centered at agent 0, lexicographic
    /// Algorithm 1).
    pub const CATALOGUE: [ConstructionId; 12] = [
        ConstructionId::Complete,
        ConstructionId::Star { center: 0 },
        ConstructionId::DoubleStar,
        ConstructionId::DoubleStarSwitched,
        ConstructionId::IcfIntermediate2,
        ConstructionId::IcfIntermediateK,
        ConstructionId::IcfRstarHub,
        ConstructionId::IcfBigHub,
        ConstructionId::DeiBstarHub,
        ConstructionId::DeiMatching,
        ConstructionId::DeiCentralHubK,
        ConstructionId::DeiAlgo1(Algo1Policy::Lexicographic),
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ConstructionId::Complete => "COMPLETE",
            ConstructionId::Star { .. } => "STAR",
            ConstructionId::DoubleStar => "DOUBLE_STAR",
            ConstructionId::DoubleStarSwitched => "DOUBLE_STAR_SWITCHED",
            ConstructionId::IcfIntermediate2 => "ICF_INTERMEDIATE_2",
            ConstructionId::IcfIntermediateK => "ICF_INTERMEDIATE_K",
            ConstructionId::IcfRstarHub => "ICF_RSTAR_HUB",
            ConstructionId::IcfBigHub => "ICF_BIG_HUB",
            ConstructionId::DeiBstarHub => "DEI_BSTAR_HUB",
            ConstructionId::DeiMatching => "DEI_MATCHING",
            ConstructionId::DeiCentralHubK => "DEI_CENTRAL_HUB_K",
            ConstructionId::DeiAlgo1(_) => "DEI_ALGO1",
        }
    }

    /// Models for which the entry has a known alpha range.
    pub fn models(&self) -> &'static [Model] {
        match self {
            ConstructionId::Complete | ConstructionId::Star { .. } | ConstructionId::DoubleStar => {
                &[Model::Icf, Model::Dei]
            }
            ConstructionId::IcfIntermediate2
            | ConstructionId::IcfIntermediateK
            | ConstructionId::IcfRstarHub
            | ConstructionId::IcfBigHub => &[Model::Icf],
            ConstructionId::DoubleStarSwitched
            | ConstructionId::DeiBstarHub
            | ConstructionId::DeiMatching
            | ConstructionId::DeiCentralHubK
            | ConstructionId::DeiAlgo1(_) => &[Model::Dei],
        }
    }

    pub fn requires_alpha(&self) -> bool {
        matches!(
            self,
            ConstructionId::IcfIntermediate2 | ConstructionId::IcfIntermediateK
        )
    }
}

impl fmt::Display for ConstructionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstructionId {
    type Err = ConstructionError;

    /// Accepts the catalogue names (case-insensitive) and the short forms
    /// `DS` and `DSS`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase().replace('-', "_");
        let id = match upper.as_str() {
            "DS" => ConstructionId::DoubleStar,
            "DSS" => ConstructionId::DoubleStarSwitched,
            _ => *Self::CATALOGUE
                .iter()
                .find(|id| id.name() == upper)
                .ok_or_else(|| ConstructionError::UnknownId(s.to_string()))?,
        };
        Ok(id)
    }
}

/// A range of alpha values; `hi = None` means unbounded above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlphaInterval {
    pub lo: Rational,
    pub hi: Option<Rational>,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl AlphaInterval {
    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Self {
            lo,
            hi: Some(hi),
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn closed_open(lo: Rational, hi: Rational) -> Self {
        Self {
            hi_closed: false,
            ..Self::closed(lo, hi)
        }
    }

    pub fn open_closed(lo: Rational, hi: Rational) -> Self {
        Self {
            lo_closed: false,
            ..Self::closed(lo, hi)
        }
    }

    pub fn at_least(lo: Rational) -> Self {
        Self {
            lo,
            hi: None,
            lo_closed: true,
            hi_closed: false,
        }
    }

    pub fn contains(&self, alpha: Rational) -> bool {
        let above = if self.lo_closed {
            alpha >= self.lo
        } else {
            alpha > self.lo
        };
        let below = match self.hi {
            None => true,
            Some(hi) if self.hi_closed => alpha <= hi,
            Some(hi) => alpha < hi,
        };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        match self.hi {
            None => false,
            Some(hi) => hi < self.lo || (hi == self.lo && !(self.lo_closed && self.hi_closed)),
        }
    }

    /// Closed endpoints plus `interior` evenly spaced interior points (for
    /// an unbounded interval, points above `lo` spaced by 1/2).
    pub fn samples(&self, interior: usize) -> Vec<Rational> {
        if self.is_empty() {
            return Vec::new();
        }
        let mut out = Vec::new();
        if self.lo_closed {
            out.push(self.lo);
        }
        let steps = Rational::from_integer(interior as i64 + 1);
        for i in 1..=interior as i64 {
            let x = match self.hi {
                Some(hi) => self.lo + (hi - self.lo) * Rational::from_integer(i) / steps,
                None => self.lo + Rational::new(i, 2),
            };
            if self.contains(x) && !out.contains(&x) {
                out.push(x);
            }
        }
        if let (Some(hi), true) = (self.hi, self.hi_closed) {
            if !out.contains(&hi) {
                out.push(hi);
            }
        }
        out
    }
}

impl fmt::Display for AlphaInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        match self.hi {
            Some(hi) => {
                let close = if self.hi_closed { ']' } else { ')' };
                write!(
                    f,
                    "{open}{}, {}{close}",
                    format_rational(&self.lo),
                    format_rational(&hi)
                )
            }
            None => write!(f, "{open}{}, inf)", format_rational(&self.lo)),
        }
    }
}

/// A built network and, when alpha was given and lies outside the proven
/// range of every applicable model, a warning.
#[derive(Debug, Clone, PartialEq)]
pub struct Built {
    pub graph: Graph,
    pub out_of_range: Option<AlphaInterval>,
}

fn ratio(num: usize, den: usize) -> Rational {
    Rational::new(num as i64, den as i64)
}

fn mismatch(id: ConstructionId, reason: impl Into<String>) -> ConstructionError {
    ConstructionError::PopulationMismatch {
        id: id.name().to_string(),
        reason: reason.into(),
    }
}

fn require_two_types(id: ConstructionId, pop: &Population) -> Result<(), ConstructionError> {
    if pop.k() == 2 {
        Ok(())
    } else {
        Err(mismatch(id, format!("needs exactly 2 types, got {}", pop.k())))
    }
}

/// Agents of each type, types ordered by size (stable).
fn ordered_types(pop: &Population) -> Vec<Vec<usize>> {
    let mut types: Vec<usize> = (0..pop.k()).collect();
    types.sort_by_key(|&t| pop.count(t));
    types.into_iter().map(|t| pop.members(t)).collect()
}

fn blue_red(pop: &Population) -> (Vec<usize>, Vec<usize>) {
    (
        pop.members(metrics::blue_type(pop)),
        pop.members(metrics::red_type(pop)),
    )
}

fn add_clique(edges: &mut Vec<(usize, usize)>, nodes: &[usize]) {
    for (i, &u) in nodes.iter().enumerate() {
        for &v in &nodes[i + 1..] {
            edges.push((u, v));
        }
    }
}

fn intra_cliques(pop: &Population) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for t in 0..pop.k() {
        add_clique(&mut edges, &pop.members(t));
    }
    edges
}

/// Proven alpha range of `id` for `model` on `pop`.
pub fn validity_interval(
    id: ConstructionId,
    pop: &Population,
    model: Model,
) -> Result<AlphaInterval, ConstructionError> {
    if !id.models().contains(&model) {
        return Err(ConstructionError::ModelMismatch {
            id: id.name().to_string(),
            model,
        });
    }
    check_population(id, pop)?;
    let n = pop.n();
    let (nb, nr) = (pop.blue_count(), pop.red_count());
    let one = Rational::one();
    let interval = match (id, model) {
        (ConstructionId::Complete, Model::Icf) => {
            AlphaInterval::open_closed(Rational::zero(), ratio(nb, nb + 1))
        }
        (ConstructionId::Complete, Model::Dei) => {
            AlphaInterval::open_closed(Rational::zero(), ratio(n - nr, n - nr + 1))
        }
        (ConstructionId::Star { .. }, _) => AlphaInterval::at_least(one),
        (ConstructionId::DoubleStar, Model::Icf) => AlphaInterval::at_least(Rational::new(4, 3)),
        (ConstructionId::DoubleStar, Model::Dei) => AlphaInterval::at_least(one),
        (ConstructionId::DoubleStarSwitched, _) => AlphaInterval::at_least(Rational::new(4, 3)),
        (ConstructionId::IcfIntermediate2 | ConstructionId::IcfIntermediateK, _) => {
            AlphaInterval::closed_open(ratio(nb, nb + 1), one)
        }
        (ConstructionId::IcfRstarHub, _) => {
            AlphaInterval::closed(ratio(nb, nb + 1), ratio(nr, nr + 1))
        }
        (ConstructionId::IcfBigHub, _) => {
            AlphaInterval::closed(Rational::new(6, 7), ratio(nr, nr + 1))
        }
        (ConstructionId::DeiBstarHub, _) => {
            AlphaInterval::closed(Rational::new(1, 2), ratio(nr, nr + 1))
        }
        (ConstructionId::DeiMatching, _) => AlphaInterval::closed_open(Rational::new(2, 3), one),
        (ConstructionId::DeiCentralHubK, _) => {
            let types = ordered_types(pop);
            let k = types.len();
            let j_star = types.iter().position(|t| t.len() >= 2).unwrap_or(k - 1);
            if j_star == k - 1 {
                if k == 2 && types[k - 1].len() >= 2 {
                    AlphaInterval::closed(Rational::new(1, 2), one)
                } else {
                    AlphaInterval::closed(Rational::new(2, 3), one)
                }
            } else {
                let rest = n - types[j_star].len();
                AlphaInterval::closed(Rational::new(2, 3), ratio(rest, rest + 1))
            }
        }
        (ConstructionId::DeiAlgo1(_), _) => {
            let k = pop.k();
            AlphaInterval::closed(ratio(k, k + 1), one)
        }
    };
    Ok(interval)
}

fn check_population(id: ConstructionId, pop: &Population) -> Result<(), ConstructionError> {
    match id {
        ConstructionId::Complete | ConstructionId::DeiCentralHubK | ConstructionId::DeiAlgo1(_) => {
            Ok(())
        }
        ConstructionId::Star { center } => {
            if center < pop.n() {
                Ok(())
            } else {
                Err(mismatch(id, format!("center {center} out of range")))
            }
        }
        ConstructionId::IcfIntermediateK => {
            if pop.k() >= 2 {
                Ok(())
            } else {
                Err(mismatch(id, "needs at least 2 types"))
            }
        }
        ConstructionId::IcfRstarHub => {
            require_two_types(id, pop)?;
            if pop.red_count() >= 2 {
                Ok(())
            } else {
                Err(mismatch(id, "needs at least 2 red agents"))
            }
        }
        ConstructionId::IcfBigHub => {
            require_two_types(id, pop)?;
            if pop.blue_count() >= 6 {
                Ok(())
            } else {
                Err(mismatch(id, "needs at least 6 blue agents"))
            }
        }
        ConstructionId::DeiBstarHub => {
            require_two_types(id, pop)?;
            if pop.blue_count() >= 2 {
                Ok(())
            } else {
                Err(mismatch(id, "needs at least 2 blue agents"))
            }
        }
        ConstructionId::DoubleStar
        | ConstructionId::DoubleStarSwitched
        | ConstructionId::IcfIntermediate2
        | ConstructionId::DeiMatching => require_two_types(id, pop),
    }
}

/// Builds the catalogued edge set. `alpha` is mandatory for the
/// alpha-dependent entries; when given, it is also compared with the proven
/// ranges.
pub fn build(
    id: ConstructionId,
    pop: &Population,
    alpha: Option<Rational>,
) -> Result<Built, ConstructionError> {
    check_population(id, pop)?;
    if id.requires_alpha() && alpha.is_none() {
        return Err(ConstructionError::AlphaRequired(id.name().to_string()));
    }
    let n = pop.n();
    let edges: Vec<(usize, usize)> = match id {
        ConstructionId::Complete => return finish(id, pop, alpha, Graph::complete(n)),
        ConstructionId::Star { center } => (0..n).filter(|&v| v != center).map(|v| (center, v)).collect(),
        ConstructionId::DoubleStar => {
            let (blues, reds) = blue_red(pop);
            let (cb, cr) = (blues[0], reds[0]);
            let mut edges = vec![(cb, cr)];
            edges.extend(blues[1..].iter().map(|&b| (cb, b)));
            edges.extend(reds[1..].iter().map(|&r| (cr, r)));
            edges
        }
        ConstructionId::DoubleStarSwitched => {
            let (blues, reds) = blue_red(pop);
            let (cb, cr) = (blues[0], reds[0]);
            let mut edges = vec![(cb, cr)];
            edges.extend(reds[1..].iter().map(|&r| (cb, r)));
            edges.extend(blues[1..].iter().map(|&b| (cr, b)));
            edges
        }
        ConstructionId::IcfIntermediate2 => {
            let (blues, reds) = blue_red(pop);
            icf_intermediate(&[blues, reds], alpha.expect("checked"))
        }
        ConstructionId::IcfIntermediateK => {
            icf_intermediate(&ordered_types(pop), alpha.expect("checked"))
        }
        ConstructionId::IcfRstarHub => {
            let (blues, reds) = blue_red(pop);
            let mut edges = intra_cliques(pop);
            edges.extend(blues.iter().map(|&b| (b, reds[0])));
            edges
        }
        ConstructionId::IcfBigHub => {
            let (blues, reds) = blue_red(pop);
            let mut edges = Vec::new();
            add_clique(&mut edges, &reds);
            edges.extend(blues.iter().map(|&b| (b, reds[0])));
            edges
        }
        ConstructionId::DeiBstarHub => {
            let (blues, reds) = blue_red(pop);
            let mut edges = intra_cliques(pop);
            edges.extend(reds.iter().map(|&r| (blues[0], r)));
            edges
        }
        ConstructionId::DeiMatching => {
            let (blues, reds) = blue_red(pop);
            let mut edges = intra_cliques(pop);
            edges.extend(blues.iter().zip(&reds).map(|(&b, &r)| (b, r)));
            edges
        }
        ConstructionId::DeiCentralHubK => {
            let types = ordered_types(pop);
            let k = types.len();
            let j_star = types.iter().position(|t| t.len() >= 2).unwrap_or(k - 1);
            let hub = types[j_star][0];
            let mut edges = intra_cliques(pop);
            for (j, t) in types.iter().enumerate() {
                if j != j_star {
                    edges.extend(t.iter().map(|&v| (hub, v)));
                }
            }
            edges
        }
        ConstructionId::DeiAlgo1(policy) => {
            return finish(id, pop, alpha, dei_algorithm1(pop, policy))
        }
    };
    let g = Graph::new(n, edges).expect("builders emit valid pairs");
    finish(id, pop, alpha, g)
}

fn finish(
    id: ConstructionId,
    pop: &Population,
    alpha: Option<Rational>,
    graph: Graph,
) -> Result<Built, ConstructionError> {
    let mut out_of_range = None;
    if let Some(alpha) = alpha {
        let intervals: Vec<AlphaInterval> = id
            .models()
            .iter()
            .filter_map(|&m| validity_interval(id, pop, m).ok())
            .collect();
        if !intervals.iter().any(|iv| iv.contains(alpha)) {
            out_of_range = intervals.first().copied();
        }
    }
    Ok(Built {
        graph,
        out_of_range,
    })
}

/// Edge rules of the intermediate-range ICF network for types `t`
/// (ordered by size, at least two).
fn icf_intermediate(t: &[Vec<usize>], alpha: Rational) -> Vec<(usize, usize)> {
    let k = t.len();
    let m = t[k - 2].len();
    let mut edges = Vec::new();
    // per-type cliques, truncated at index m
    for tj in t {
        add_clique(&mut edges, &tj[..tj.len().min(m)]);
    }
    // aligned-index cross matchings
    for j in 0..k {
        for l in j + 1..k {
            for i in 0..t[j].len() {
                edges.push((t[j][i], t[l][i]));
            }
        }
    }
    // first block of the largest type to the rest of it
    let last = &t[k - 1];
    for &a in &last[..m] {
        for &b in &last[m..] {
            edges.push((a, b));
        }
    }
    // middle types fully joined to larger types below their threshold
    for j in 1..k - 1 {
        let nj = t[j].len();
        if alpha < ratio(nj, nj + 1) {
            for l in j + 1..k {
                for &a in &t[j] {
                    for &b in &t[l] {
                        edges.push((a, b));
                    }
                }
            }
        }
    }
    let tau = ratio(m * (m + 1), m * (m + 1) + 1);
    if alpha < tau {
        add_clique(&mut edges, &last[m..]);
    }
    edges
}

/// Algorithm 1: start from the per-type cliques and keep joining a pair at
/// distance at least 3 (or disconnected) until the diameter is at most 2.
pub fn dei_algorithm1(pop: &Population, policy: Algo1Policy) -> Graph {
    let n = pop.n();
    let mut g = Graph::new(n, intra_cliques(pop)).expect("valid pairs");
    let mut dm = DistanceMatrix::compute(&g);
    let mut rng = match policy {
        Algo1Policy::SeededRandom(seed) => Some(Xoshiro256PlusPlus::seed_from_u64(seed)),
        Algo1Policy::Lexicographic => None,
    };
    let far = |dm: &DistanceMatrix, u: usize, v: usize| {
        let d = dm.get(u, v);
        d == UNREACHABLE || d >= 3
    };
    loop {
        let pair = match rng.as_mut() {
            None => (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .find(|&(u, v)| far(&dm, u, v)),
            Some(rng) => {
                let candidates: Vec<(usize, usize)> = (0..n)
                    .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                    .filter(|&(u, v)| far(&dm, u, v))
                    .collect();
                candidates.choose(rng).copied()
            }
        };
        let Some((u, v)) = pair else { break };
        g.add_edge(u, v).expect("far pairs are non-adjacent");
        dm.apply_addition(u, v);
    }
    g
}
