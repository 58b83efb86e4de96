//! Segregation measures and structural predicates.
//!
//! * local segregation `ls = (1/n) * sum_u f(u)/deg(u)`;
//! * global segregation `gs = (#monochromatic edges) / m`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::cost::Rational;
use crate::graph::{Graph, Population};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("agent {0} has no neighbors; local segregation is undefined")]
    IsolatedAgent(usize),
    #[error("graph has no edges; global segregation is undefined")]
    EmptyGraph,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegregationValues {
    pub ls: f64,
    pub gs: f64,
}

pub fn local_segregation(g: &Graph, pop: &Population) -> Result<BigRational, MetricsError> {
    let mut sum = BigRational::zero();
    for u in 0..g.n() {
        let p = g.neighborhood_profile(pop, u);
        if p.deg == 0 {
            return Err(MetricsError::IsolatedAgent(u));
        }
        sum += BigRational::new(BigInt::from(p.same_type), BigInt::from(p.deg));
    }
    Ok(sum / BigRational::from_integer(BigInt::from(g.n().max(1))))
}

pub fn local_segregation_f64(g: &Graph, pop: &Population) -> Result<f64, MetricsError> {
    let mut sum = 0.0;
    for u in 0..g.n() {
        let p = g.neighborhood_profile(pop, u);
        if p.deg == 0 {
            return Err(MetricsError::IsolatedAgent(u));
        }
        sum += p.same_type as f64 / p.deg as f64;
    }
    Ok(sum / g.n().max(1) as f64)
}

pub fn monochromatic_edges(g: &Graph, pop: &Population) -> usize {
    g.edges()
        .into_iter()
        .filter(|e| pop.same_type(e.lo(), e.hi()))
        .count()
}

pub fn global_segregation(g: &Graph, pop: &Population) -> Result<Rational, MetricsError> {
    if g.m() == 0 {
        return Err(MetricsError::EmptyGraph);
    }
    Ok(Rational::new(
        monochromatic_edges(g, pop) as i64,
        g.m() as i64,
    ))
}

pub fn global_segregation_f64(g: &Graph, pop: &Population) -> Result<f64, MetricsError> {
    if g.m() == 0 {
        return Err(MetricsError::EmptyGraph);
    }
    Ok(monochromatic_edges(g, pop) as f64 / g.m() as f64)
}

pub fn segregation(g: &Graph, pop: &Population) -> Result<SegregationValues, MetricsError> {
    Ok(SegregationValues {
        ls: local_segregation_f64(g, pop)?,
        gs: global_segregation_f64(g, pop)?,
    })
}

/// Number of other-type neighbors of `u`.
pub fn bichromatic_degree(g: &Graph, pop: &Population, u: usize) -> usize {
    g.neighbors(u)
        .iter()
        .filter(|&&v| !pop.same_type(u, v))
        .count()
}

/// Agents incident to at least one bichromatic edge, ascending.
pub fn curious_agents(g: &Graph, pop: &Population) -> Vec<usize> {
    (0..g.n())
        .filter(|&u| bichromatic_degree(g, pop, u) > 0)
        .collect()
}

/// Types all of whose agents are curious, ascending.
pub fn curious_types(g: &Graph, pop: &Population) -> Vec<usize> {
    (0..pop.k())
        .filter(|&t| {
            pop.members(t)
                .into_iter()
                .all(|u| bichromatic_degree(g, pop, u) > 0)
        })
        .collect()
}

pub fn is_fully_intra_connected(g: &Graph, pop: &Population) -> bool {
    (0..g.n()).all(|u| g.neighborhood_profile(pop, u).same_type == pop.count(pop.type_of(u)) - 1)
}

fn bichromatic_is_matching(g: &Graph, pop: &Population) -> bool {
    (0..g.n()).all(|u| bichromatic_degree(g, pop, u) <= 1)
}

/// Bichromatic edges are pairwise disjoint and every agent of `type_id` has
/// one.
pub fn bichromatic_matching_covering(g: &Graph, pop: &Population, type_id: usize) -> bool {
    bichromatic_is_matching(g, pop)
        && type_id < pop.k()
        && pop
            .members(type_id)
            .into_iter()
            .all(|u| bichromatic_degree(g, pop, u) == 1)
}

/// The smallest type (lowest id among ties).
pub fn blue_type(pop: &Population) -> usize {
    (0..pop.k())
        .min_by_key(|&t| (pop.count(t), t))
        .unwrap_or(0)
}

/// The largest type other than [`blue_type`] (lowest id among ties).
pub fn red_type(pop: &Population) -> usize {
    let blue = blue_type(pop);
    (0..pop.k())
        .filter(|&t| t != blue || pop.k() == 1)
        .max_by_key(|&t| (pop.count(t), std::cmp::Reverse(t)))
        .unwrap_or(0)
}

/// Two types, the blue agents form a clique, the bichromatic edges form a
/// matching of size `n_B`, and every curious red agent is adjacent to all
/// other red agents.
pub fn icf_intermediate_necessary(g: &Graph, pop: &Population) -> bool {
    if pop.k() != 2 {
        return false;
    }
    let (blue, red) = (blue_type(pop), red_type(pop));
    let blues = pop.members(blue);
    let reds = pop.members(red);
    let blue_clique = blues
        .iter()
        .all(|&u| g.neighborhood_profile(pop, u).same_type == blues.len() - 1);
    let bichromatic: usize = blues.iter().map(|&u| bichromatic_degree(g, pop, u)).sum();
    let matching = bichromatic_is_matching(g, pop) && bichromatic == blues.len();
    let curious_reds_central = reds.iter().all(|&u| {
        bichromatic_degree(g, pop, u) == 0
            || g.neighborhood_profile(pop, u).same_type == reds.len() - 1
    });
    blue_clique && matching && curious_reds_central
}
