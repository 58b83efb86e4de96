//! Neighborhood and total costs of the two homophilic cost models.
//!
//! * ICF (increasing comfort among friends): `deg * alpha * (1 + 1/(f + 1))`
//! * DEI (decreasing effort of integration): `alpha * (deg + H_e)`
//!
//! where `f` and `e` count same-type and other-type neighbors and `H_e` is
//! the `e`-th harmonic number. The total cost adds the sum of distances.
//!
//! All formulas are generic over [`Scalar`], implemented for exact
//! [`BigRational`] (stability verification, enumeration) and `f64`
//! (large-scale dynamics, compared with an absolute tolerance of
//! [`FLOAT_TOLERANCE`]).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    bfs_row, delta_distance_add, distance_sum, DistanceDelta, DistanceMatrix, DistanceSum, Graph,
    NeighborhoodProfile, Population,
};
use crate::stability::Move;

/// Rational with machine-integer numerator and denominator (`alpha`, `epsilon`).
pub type Rational = Ratio<i64>;

pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CostError {
    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(Rational),
    #[error("invalid profile {profile:?} for {action:?} of a {kind:?} edge")]
    InvalidProfile {
        profile: NeighborhoodProfile,
        kind: EdgeKind,
        action: Action,
    },
    #[error("illegal move {0:?}")]
    IllegalMove(Move),
    #[error("cannot parse rational {0:?}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Icf,
    Dei,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Icf => "icf",
            Model::Dei => "dei",
        })
    }
}

impl FromStr for Model {
    type Err = CostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "icf" => Ok(Model::Icf),
            "dei" => Ok(Model::Dei),
            _ => Err(CostError::Parse(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Mono,
    Bi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Add,
    Delete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CostParams {
    pub model: Model,
    pub alpha: Rational,
}

impl CostParams {
    pub fn new(model: Model, alpha: Rational) -> Result<Self, CostError> {
        if alpha <= Rational::zero() {
            return Err(CostError::NonPositiveAlpha(alpha));
        }
        Ok(Self { model, alpha })
    }

    pub fn icf(alpha: Rational) -> Self {
        Self::new(Model::Icf, alpha).expect("positive alpha")
    }

    pub fn dei(alpha: Rational) -> Self {
        Self::new(Model::Dei, alpha).expect("positive alpha")
    }
}

/// Parses `"15"`, `"1.01"` or `"101/100"` into an exact fraction.
pub fn parse_rational(s: &str) -> Result<Rational, CostError> {
    let err = || CostError::Parse(s.to_string());
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| err())?;
        let den: i64 = den.trim().parse().map_err(|_| err())?;
        if den == 0 {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: i64 = digits.parse().map_err(|_| err())?;
    let den = 10i64.checked_pow(frac_part.len() as u32).ok_or_else(err)?;
    let r = Rational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Canonical text form: `"15"`, `"1.01"` when the decimal terminates,
/// `"1/3"` otherwise. Inverse of [`parse_rational`].
pub fn format_rational(r: &Rational) -> String {
    if *r.denom() == 1 {
        return r.numer().to_string();
    }
    let mut den = *r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while den % 2 == 0 {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    let scaled = (i128::from(*r.numer()) * 10i128.pow(places)) / i128::from(*r.denom());
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.unsigned_abs();
    let pow = 10u128.pow(places);
    format!(
        "{sign}{}.{:0width$}",
        abs / pow,
        abs % pow,
        width = places as usize
    )
}

/// Arithmetic used by the cost formulas.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_int(v: i64) -> Self;
    fn frac(num: i64, den: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    /// Strict comparison; in float mode `self` must be below `other` by more
    /// than [`FLOAT_TOLERANCE`].
    fn definitely_lt(&self, other: &Self) -> bool;

    fn zero() -> Self {
        Self::from_int(0)
    }

    fn is_definitely_negative(&self) -> bool {
        self.definitely_lt(&Self::zero())
    }
}

impl Scalar for BigRational {
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn frac(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &Rational) -> Self {
        Self::frac(*r.numer(), *r.denom())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn definitely_lt(&self, other: &Self) -> bool {
        self < other
    }

    fn is_definitely_negative(&self) -> bool {
        self.is_negative()
    }
}

impl Scalar for f64 {
    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn frac(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_rational(r: &Rational) -> Self {
        *r.numer() as f64 / *r.denom() as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn definitely_lt(&self, other: &Self) -> bool {
        *self < *other - FLOAT_TOLERANCE
    }
}

/// Total cost of one agent. An agent that cannot reach everybody has
/// infinite cost; such costs order by the number of unreachable agents
/// first.
#[derive(Debug, Clone, PartialEq)]
pub struct Cost<S> {
    pub unreachable: usize,
    /// Neighborhood cost plus the finite part of the distance sum.
    pub value: S,
}

impl<S: Scalar> Cost<S> {
    pub fn is_finite(&self) -> bool {
        self.unreachable == 0
    }

    pub fn apply(&self, delta: &CostDelta<S>) -> Cost<S> {
        Cost {
            unreachable: (self.unreachable as i64 + delta.unreachable) as usize,
            value: self.value.clone() + delta.value.clone(),
        }
    }

    /// `other - self`.
    pub fn delta_to(&self, other: &Cost<S>) -> CostDelta<S> {
        CostDelta {
            unreachable: other.unreachable as i64 - self.unreachable as i64,
            value: other.value.clone() - self.value.clone(),
        }
    }

    /// Whether `delta` improves this cost by more than the factor `eps`
    /// (`new * eps < old`).
    ///
    /// Reducing the number of unreachable agents always qualifies and
    /// increasing it never does. When the cost stays infinite with the same
    /// number of unreachable agents, only `eps = 1` with a strictly smaller
    /// finite part qualifies.
    pub fn improved_by(&self, delta: &CostDelta<S>, eps: &S) -> bool {
        match delta.unreachable.cmp(&0) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
        let one = S::from_int(1);
        if !self.is_finite() {
            return !one.definitely_lt(eps) && delta.value.is_definitely_negative();
        }
        // (old + delta) * eps < old  <=>  delta * eps < old * (1 - eps)
        let lhs = delta.value.clone() * eps.clone();
        let rhs = self.value.clone() * (one - eps.clone());
        lhs.definitely_lt(&rhs)
    }
}

impl<S: fmt::Display + Scalar> fmt::Display for Cost<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_finite() {
            write!(f, "{}", self.value)
        } else {
            write!(f, "inf({} unreachable)", self.unreachable)
        }
    }
}

/// Change of a [`Cost`]; negative means the agent is better off.
#[derive(Debug, Clone, PartialEq)]
pub struct CostDelta<S> {
    pub unreachable: i64,
    pub value: S,
}

impl<S: Scalar> CostDelta<S> {
    pub fn new(neighborhood: S, distance: DistanceDelta) -> Self {
        Self {
            unreachable: distance.unreachable,
            value: neighborhood + S::from_int(distance.finite),
        }
    }

    /// Strict improvement (factor 1).
    pub fn is_improving(&self) -> bool {
        match self.unreachable.cmp(&0) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => self.value.is_definitely_negative(),
        }
    }

    /// Lexicographic order by `(unreachable, value)`.
    pub fn lt(&self, other: &Self) -> bool {
        self.unreachable < other.unreachable
            || (self.unreachable == other.unreachable && self.value < other.value)
    }
}

impl<S: fmt::Display> fmt::Display for CostDelta<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.unreachable.cmp(&0) {
            std::cmp::Ordering::Less => write!(f, "-inf (reconnects {})", -self.unreachable),
            std::cmp::Ordering::Greater => write!(f, "+inf (disconnects {})", self.unreachable),
            std::cmp::Ordering::Equal => write!(f, "{}", self.value),
        }
    }
}

/// Cost evaluator for one parameter setting and a population size.
#[derive(Debug, Clone)]
pub struct CostModel<S> {
    params: CostParams,
    alpha: S,
    harmonic: Vec<S>,
}

impl<S: Scalar> CostModel<S> {
    /// Precomputes harmonic numbers `H_0..=H_n`.
    pub fn new(params: CostParams, n: usize) -> Self {
        let mut harmonic = Vec::with_capacity(n + 1);
        harmonic.push(S::zero());
        for k in 1..=n {
            let prev = harmonic[k - 1].clone();
            harmonic.push(prev + S::frac(1, k as i64));
        }
        Self {
            params,
            alpha: S::from_rational(&params.alpha),
            harmonic,
        }
    }

    pub fn params(&self) -> &CostParams {
        &self.params
    }

    pub fn alpha(&self) -> &S {
        &self.alpha
    }

    pub fn harmonic(&self, e: usize) -> S {
        match self.harmonic.get(e) {
            Some(h) => h.clone(),
            None => (1..=e).fold(S::zero(), |acc, k| acc + S::frac(1, k as i64)),
        }
    }

    pub fn neighborhood_cost(&self, p: &NeighborhoodProfile) -> S {
        let alpha = self.alpha.clone();
        match self.params.model {
            Model::Icf => {
                let (deg, f) = (p.deg as i64, p.same_type as i64);
                alpha * S::frac(deg * (f + 2), f + 1)
            }
            Model::Dei => alpha * (S::from_int(p.deg as i64) + self.harmonic(p.other_type)),
        }
    }

    /// Change of the neighborhood cost when one edge of `kind` is added or
    /// deleted, in closed form.
    pub fn delta_neighborhood(
        &self,
        p: &NeighborhoodProfile,
        kind: EdgeKind,
        action: Action,
    ) -> Result<S, CostError> {
        let invalid = || CostError::InvalidProfile {
            profile: *p,
            kind,
            action,
        };
        if !p.is_consistent() {
            return Err(invalid());
        }
        let (deg, f, e) = (p.deg as i64, p.same_type as i64, p.other_type as i64);
        let alpha = self.alpha.clone();
        let one = S::from_int(1);
        let delta = match (self.params.model, kind, action) {
            (Model::Icf, EdgeKind::Mono, Action::Add) => {
                alpha * (one + S::frac(f - deg + 1, (f + 1) * (f + 2)))
            }
            (Model::Icf, EdgeKind::Mono, Action::Delete) => {
                if f < 1 {
                    return Err(invalid());
                }
                -(alpha * (one + S::frac(f - deg + 1, (f + 1) * f)))
            }
            (Model::Icf, EdgeKind::Bi, Action::Add) => alpha * (one + S::frac(1, f + 1)),
            (Model::Icf, EdgeKind::Bi, Action::Delete) => {
                if e < 1 {
                    return Err(invalid());
                }
                -(alpha * (one + S::frac(1, f + 1)))
            }
            (Model::Dei, EdgeKind::Mono, Action::Add) => alpha,
            (Model::Dei, EdgeKind::Mono, Action::Delete) => {
                if f < 1 {
                    return Err(invalid());
                }
                -alpha
            }
            (Model::Dei, EdgeKind::Bi, Action::Add) => alpha * (one + S::frac(1, e + 1)),
            (Model::Dei, EdgeKind::Bi, Action::Delete) => {
                if e < 1 {
                    return Err(invalid());
                }
                -(alpha * (one + S::frac(1, e)))
            }
        };
        Ok(delta)
    }

    pub fn cost_from_parts(&self, p: &NeighborhoodProfile, dist: DistanceSum) -> Cost<S> {
        Cost {
            unreachable: dist.unreachable,
            value: self.neighborhood_cost(p) + S::from_int(dist.finite as i64),
        }
    }

    /// Total cost of `u` computed from scratch (one BFS).
    pub fn total_cost(&self, pop: &Population, g: &Graph, u: usize) -> Cost<S> {
        let p = g.neighborhood_profile(pop, u);
        self.cost_from_parts(&p, distance_sum(&bfs_row(g, u)))
    }

    /// Change of `u`'s total cost if `mv` is applied, using the closed-form
    /// neighborhood delta and the distance delta (row formula for additions,
    /// one BFS on `G - uv` for deletions). `dm` must be current for `g`.
    pub fn delta_total_for_move(
        &self,
        pop: &Population,
        g: &Graph,
        dm: &DistanceMatrix,
        u: usize,
        mv: Move,
    ) -> Result<CostDelta<S>, CostError> {
        let illegal = || CostError::IllegalMove(mv);
        let p = g.neighborhood_profile(pop, u);
        match mv {
            Move::Pass => Ok(CostDelta {
                unreachable: 0,
                value: S::zero(),
            }),
            Move::AddEdge(e) => {
                let v = e.other(u);
                if e.lo() == e.hi() || (e.lo() != u && e.hi() != u) || g.has_edge(u, v) {
                    return Err(illegal());
                }
                let kind = edge_kind(pop, u, v);
                let dn = self.delta_neighborhood(&p, kind, Action::Add)?;
                Ok(CostDelta::new(dn, delta_distance_add(dm.row(u), dm.row(v))))
            }
            Move::DeleteEdge(e) => {
                let v = e.other(u);
                if (e.lo() != u && e.hi() != u) || !g.has_edge(u, v) {
                    return Err(illegal());
                }
                let kind = edge_kind(pop, u, v);
                let dn = self.delta_neighborhood(&p, kind, Action::Delete)?;
                let dd = crate::graph::delta_distance_delete(g, u, v).map_err(|_| illegal())?;
                Ok(CostDelta::new(dn, dd))
            }
        }
    }
}

pub fn edge_kind(pop: &Population, u: usize, v: usize) -> EdgeKind {
    if pop.same_type(u, v) {
        EdgeKind::Mono
    } else {
        EdgeKind::Bi
    }
}

/// Exact rational conversion used by reports.
pub fn rational_to_big(r: &Rational) -> BigRational {
    BigRational::from_rational(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::frac(n, d)
    }

    fn exact(params: CostParams) -> CostModel<Q> {
        CostModel::new(params, 16)
    }

    #[test]
    fn neighborhood_costs() {
        let icf = exact(CostParams::icf(Rational::from_integer(1)));
        assert_eq!(icf.neighborhood_cost(&NeighborhoodProfile::new(0, 1)), q(2, 1));
        assert_eq!(icf.neighborhood_cost(&NeighborhoodProfile::new(2, 1)), q(4, 1));
        let dei = exact(CostParams::dei(Rational::from_integer(1)));
        assert_eq!(dei.neighborhood_cost(&NeighborhoodProfile::new(1, 3)), q(35, 6));
        let dei3 = exact(CostParams::dei(Rational::new(3, 7)));
        assert_eq!(dei3.neighborhood_cost(&NeighborhoodProfile::new(5, 0)), q(15, 7));
    }

    #[test]
    fn closed_form_deltas() {
        let alpha = Rational::from_integer(1);
        let icf = exact(CostParams::icf(alpha));
        assert_eq!(
            icf.delta_neighborhood(&NeighborhoodProfile::new(0, 0), EdgeKind::Bi, Action::Add),
            Ok(q(2, 1))
        );
        assert_eq!(
            icf.delta_neighborhood(&NeighborhoodProfile::new(2, 0), EdgeKind::Mono, Action::Add),
            Ok(q(13, 12))
        );
        let dei = exact(CostParams::dei(alpha));
        assert_eq!(
            dei.delta_neighborhood(&NeighborhoodProfile::new(1, 2), EdgeKind::Bi, Action::Delete),
            Ok(q(-3, 2))
        );
        assert!(matches!(
            dei.delta_neighborhood(&NeighborhoodProfile::new(2, 0), EdgeKind::Bi, Action::Delete),
            Err(CostError::InvalidProfile { .. })
        ));
        assert!(icf
            .delta_neighborhood(&NeighborhoodProfile::new(0, 2), EdgeKind::Mono, Action::Delete)
            .is_err());
    }

    #[test]
    fn total_costs() {
        let pop = Population::from_counts(&[1, 1]).unwrap();
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let icf = exact(CostParams::icf(Rational::from_integer(1)));
        assert_eq!(icf.total_cost(&pop, &g, 0).value, q(3, 1));

        let isolated = Graph::empty(3);
        let pop3 = Population::from_counts(&[3]).unwrap();
        assert!(!icf.total_cost(&pop3, &isolated, 0).is_finite());

        let k3 = Graph::complete(3);
        assert_eq!(icf.total_cost(&pop3, &k3, 1).value, q(14, 3));
    }

    #[test]
    fn move_deltas_match_scratch() {
        let pop = Population::from_counts(&[3]).unwrap();
        let k3 = Graph::complete(3);
        let icf2 = exact(CostParams::icf(Rational::from_integer(2)));
        let dm = DistanceMatrix::compute(&k3);
        let d = icf2
            .delta_total_for_move(&pop, &k3, &dm, 0, Move::DeleteEdge(Edge::new(0, 1)))
            .unwrap();
        assert_eq!(d.value, q(-4, 3));

        let pop5 = Population::from_counts(&[5]).unwrap();
        let star = Graph::new(5, (1..5).map(|i| (0, i))).unwrap();
        let dm = DistanceMatrix::compute(&star);
        let icf1 = exact(CostParams::icf(Rational::from_integer(1)));
        let d = icf1
            .delta_total_for_move(&pop5, &star, &dm, 1, Move::AddEdge(Edge::new(1, 2)))
            .unwrap();
        assert_eq!(d.value, q(1, 6));
        assert!(matches!(
            icf1.delta_total_for_move(&pop5, &star, &dm, 1, Move::AddEdge(Edge::new(0, 1))),
            Err(CostError::IllegalMove(_))
        ));
        assert!(icf1
            .delta_total_for_move(&pop5, &star, &dm, 3, Move::AddEdge(Edge::new(1, 2)))
            .is_err());
    }

    #[test]
    fn rational_text_round_trip() {
        assert_eq!(parse_rational("1.01"), Ok(Rational::new(101, 100)));
        assert_eq!(parse_rational("101/100"), Ok(Rational::new(101, 100)));
        assert_eq!(parse_rational("15"), Ok(Rational::from_integer(15)));
        assert_eq!(parse_rational(".5"), Ok(Rational::new(1, 2)));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
        for s in ["15", "1.01", "0.85", "1/3", "17/20", "-2.5", "4/3"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(parse_rational(&format_rational(&r)), Ok(r));
        }
        assert_eq!(format_rational(&Rational::new(17, 20)), "0.85");
        assert_eq!(format_rational(&Rational::new(4, 3)), "4/3");
    }

    #[test]
    fn non_positive_alpha_rejected() {
        assert!(CostParams::new(Model::Icf, Rational::from_integer(0)).is_err());
        assert!(CostParams::new(Model::Dei, Rational::new(-1, 2)).is_err());
    }

    #[test]
    fn factor_improvement_rules() {
        let old = Cost { unreachable: 0, value: q(100, 1) };
        let eps = q(101, 100);
        let small = CostDelta { unreachable: 0, value: q(-1, 2) };
        assert!(old.improved_by(&small, &q(1, 1)));
        assert!(!old.improved_by(&small, &eps));
        let big = CostDelta { unreachable: 0, value: q(-2, 1) };
        assert!(old.improved_by(&big, &eps));

        let inf = Cost { unreachable: 2, value: q(5, 1) };
        let reconnect = CostDelta { unreachable: -2, value: q(40, 1) };
        assert!(inf.improved_by(&reconnect, &q(1_000_000_000, 1)));
        let disconnect = CostDelta { unreachable: 1, value: q(-40, 1) };
        assert!(!old.improved_by(&disconnect, &q(1, 1)));
    }
}
