//! Random-activation improving-move dynamics.
//!
//! All agents start marked. Each step activates a uniformly random marked
//! agent, which plays its best response (see
//! [`stability::best_response`](crate::stability::best_response)). A pass
//! unmarks the agent; an applied move marks every agent again. The process
//! converges when no agent is marked.
//!
//! Costs are evaluated in `f64` with tolerance
//! [`FLOAT_TOLERANCE`](crate::cost::FLOAT_TOLERANCE); a converged final
//! network is re-checked in exact arithmetic.

use std::collections::VecDeque;

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{edge_kind, Action, CostModel, CostParams, EdgeKind, Rational, Scalar, FLOAT_TOLERANCE};
use crate::graph::{
    distance::{add_gain_connected, bfs_fill},
    DistanceMatrix, Edge, Graph, NeighborhoodProfile, Population, UNREACHABLE,
};
use crate::init::{InitError, InitSpec};
use crate::stability::{is_approx_stable_with, Mode, Move};

pub const DEFAULT_MAX_STEPS: u64 = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynamicsError {
    #[error("initial network is disconnected")]
    DisconnectedInit,
    #[error("epsilon must be at least 1, got {0}")]
    EpsilonBelowOne(Rational),
    #[error("max_steps must be at least 1")]
    ZeroMaxSteps,
    #[error("population has {pop} agents but the graph has {graph}")]
    SizeMismatch { pop: usize, graph: usize },
    #[error(transparent)]
    Init(#[from] InitError),
}

/// Timeline granularity used when none is configured: `n * ceil(n / 232)`.
pub fn default_stride(n: usize) -> u64 {
    (n * n.div_ceil(232)).max(1) as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsConfig {
    pub params: CostParams,
    pub mode: Mode,
    pub epsilon: Rational,
    pub init: InitSpec,
    pub max_steps: u64,
    /// `None` selects [`default_stride`].
    pub sample_stride: Option<u64>,
    /// Seed of the activation order.
    pub seed: u64,
    /// Re-check a converged network in exact arithmetic.
    pub verify_exact: bool,
}

impl DynamicsConfig {
    pub fn new(params: CostParams, mode: Mode, epsilon: Rational, init: InitSpec, seed: u64) -> Self {
        Self {
            params,
            mode,
            epsilon,
            init,
            max_steps: DEFAULT_MAX_STEPS,
            sample_stride: None,
            seed,
            verify_exact: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimelinePoint {
    pub step: u64,
    pub ls: f64,
    pub gs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub n: usize,
    pub m: usize,
    pub ls: f64,
    pub gs: f64,
    pub diameter: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub timeline: Vec<TimelinePoint>,
    pub summary: GraphSummary,
    pub final_graph: Graph,
    pub population: Population,
    pub converged: bool,
    pub steps_taken: u64,
    pub applied_moves: u64,
    pub seed: u64,
    /// Exact epsilon-stability of the final network; `None` when not
    /// converged or not requested.
    pub exact_verified: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// No agent is marked; nothing happened.
    Terminal,
    Passed(usize),
    Applied(usize, Move),
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct DynamicsState {
    pop: Population,
    g: Graph,
    dm: DistanceMatrix,
    profiles: Vec<NeighborhoodProfile>,
    row_sums: Vec<u64>,
    mono_edges: usize,
    model: CostModel<f64>,
    params: CostParams,
    epsilon: Rational,
    eps: f64,
    mode: Mode,
    marked: Vec<usize>,
    slot: Vec<usize>,
    rng: Xoshiro256PlusPlus,
    steps: u64,
    applied: u64,
    scratch: Scratch,
}

#[derive(Debug, Clone, Default)]
struct Scratch {
    hop_count: Vec<u32>,
    hop_owner: Vec<u32>,
    lower_bound: Vec<u32>,
    is_neighbor: Vec<bool>,
    row: Vec<u32>,
    queue: VecDeque<usize>,
}

const NOT_MARKED: usize = usize::MAX;

impl DynamicsState {
    /// Starts from `g`; the activation order is seeded with `seed` (after
    /// one xoshiro jump, so it never overlaps an initialization stream
    /// seeded with the same value).
    pub fn new(
        params: CostParams,
        mode: Mode,
        epsilon: Rational,
        pop: Population,
        g: Graph,
        seed: u64,
    ) -> Result<Self, DynamicsError> {
        if epsilon < Rational::one() {
            return Err(DynamicsError::EpsilonBelowOne(epsilon));
        }
        if pop.n() != g.n() {
            return Err(DynamicsError::SizeMismatch {
                pop: pop.n(),
                graph: g.n(),
            });
        }
        if !g.is_connected() {
            return Err(DynamicsError::DisconnectedInit);
        }
        let n = g.n();
        let dm = DistanceMatrix::compute(&g);
        let profiles = (0..n).map(|u| g.neighborhood_profile(&pop, u)).collect();
        let mono_edges = crate::metrics::monochromatic_edges(&g, &pop);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        rng.jump();
        let mut state = Self {
            model: CostModel::new(params, n),
            eps: f64::from_rational(&epsilon),
            params,
            epsilon,
            mode,
            row_sums: Vec::new(),
            marked: (0..n).collect(),
            slot: (0..n).collect(),
            rng,
            steps: 0,
            applied: 0,
            scratch: Scratch {
                hop_count: vec![0; n],
                hop_owner: vec![0; n],
                lower_bound: vec![0; n],
                is_neighbor: vec![false; n],
                row: vec![0; n],
                queue: VecDeque::with_capacity(n),
            },
            pop,
            g,
            dm,
            profiles,
            mono_edges,
        };
        state.refresh_sums();
        Ok(state)
    }

    pub fn graph(&self) -> &Graph {
        &self.g
    }

    pub fn population(&self) -> &Population {
        &self.pop
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.dm
    }

    pub fn marked(&self) -> &[usize] {
        &self.marked
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn applied_moves(&self) -> u64 {
        self.applied
    }

    pub fn is_terminal(&self) -> bool {
        self.marked.is_empty()
    }

    pub fn ls(&self) -> f64 {
        let n = self.profiles.len();
        if n == 0 {
            return 1.0;
        }
        let sum: f64 = self
            .profiles
            .iter()
            .map(|p| {
                if p.deg == 0 {
                    0.0
                } else {
                    p.same_type as f64 / p.deg as f64
                }
            })
            .sum();
        sum / n as f64
    }

    pub fn gs(&self) -> f64 {
        if self.g.m() == 0 {
            1.0
        } else {
            self.mono_edges as f64 / self.g.m() as f64
        }
    }

    fn refresh_sums(&mut self) {
        let n = self.g.n();
        self.row_sums = (0..n)
            .map(|u| self.dm.row(u).iter().map(|&d| u64::from(d)).sum())
            .collect();
    }

    fn unmark(&mut self, u: usize) {
        let i = self.slot[u];
        if i == NOT_MARKED {
            return;
        }
        self.marked.swap_remove(i);
        if let Some(&moved) = self.marked.get(i) {
            self.slot[moved] = i;
        }
        self.slot[u] = NOT_MARKED;
    }

    fn mark_all(&mut self) {
        let n = self.g.n();
        self.marked.clear();
        self.marked.extend(0..n);
        self.slot.clear();
        self.slot.extend(0..n);
    }

    /// One activation.
    pub fn step(&mut self) -> StepOutcome {
        if self.marked.is_empty() {
            return StepOutcome::Terminal;
        }
        let u = self.marked[self.rng.gen_range(0..self.marked.len())];
        self.steps += 1;
        match self.best_move(u) {
            Move::Pass => {
                self.unmark(u);
                StepOutcome::Passed(u)
            }
            mv => {
                self.apply(mv);
                self.mark_all();
                StepOutcome::Applied(u, mv)
            }
        }
    }

    fn apply(&mut self, mv: Move) {
        self.applied += 1;
        match mv {
            Move::AddEdge(e) => {
                let (u, v) = (e.lo(), e.hi());
                self.g.add_edge(u, v).expect("best response adds non-edges");
                self.dm.apply_addition(u, v);
                self.update_profiles(u, v, 1);
            }
            Move::DeleteEdge(e) => {
                let (u, v) = (e.lo(), e.hi());
                self.g.delete_edge(u, v).expect("best response deletes edges");
                self.dm.recompute(&self.g);
                self.update_profiles(u, v, -1);
            }
            Move::Pass => return,
        }
        self.refresh_sums();
    }

    fn update_profiles(&mut self, u: usize, v: usize, sign: isize) {
        let same = self.pop.same_type(u, v);
        for w in [u, v] {
            let p = &mut self.profiles[w];
            let bump = |x: usize| x.checked_add_signed(sign).expect("count stays valid");
            p.deg = bump(p.deg);
            if same {
                p.same_type = bump(p.same_type);
            } else {
                p.other_type = bump(p.other_type);
            }
        }
        if same {
            self.mono_edges = self.mono_edges.checked_add_signed(sign).expect("valid count");
        }
    }

    /// Best response of `u` in the current state, equal to
    /// [`stability::best_response`](crate::stability::best_response) with
    /// `f64` costs but pruned: deletions whose exact lower bound cannot
    /// qualify skip their BFS.
    pub fn best_move(&mut self, u: usize) -> Move {
        let n = self.g.n();
        let p = self.profiles[u];
        let old_sum = self.row_sums[u];
        let old = self.model.neighborhood_cost(&p) + old_sum as f64;
        let eps = self.eps;
        let rhs = old * (1.0 - eps) - FLOAT_TOLERANCE;
        let qualifies = |d: f64| d * eps < rhs;
        let mut best: Option<(f64, Move)> = None;
        let better = |best: &Option<(f64, Move)>, d: f64| {
            best.is_none_or(|(b, _)| d < b - FLOAT_TOLERANCE)
        };

        let dn = |kind: EdgeKind, action: Action| {
            self.model
                .delta_neighborhood(&p, kind, action)
                .unwrap_or(f64::INFINITY)
        };
        let add_mono = dn(EdgeKind::Mono, Action::Add);
        let add_bi = dn(EdgeKind::Bi, Action::Add);
        let del_mono = dn(EdgeKind::Mono, Action::Delete);
        let del_bi = dn(EdgeKind::Bi, Action::Delete);

        let s = &mut self.scratch;
        let neighbors = self.g.neighbors(u);
        let row_u = self.dm.row(u);

        if self.mode == Mode::Full && !neighbors.is_empty() {
            s.hop_count.fill(0);
            for (idx, &w) in neighbors.iter().enumerate() {
                let row_w = self.dm.row(w);
                for x in 0..n {
                    if row_w[x] + 1 == row_u[x] {
                        s.hop_count[x] += 1;
                        s.hop_owner[x] = idx as u32;
                    }
                }
            }
            s.lower_bound[..neighbors.len()].fill(0);
            for x in 0..n {
                if s.hop_count[x] == 1 {
                    s.lower_bound[s.hop_owner[x] as usize] += 1;
                }
            }
            for (idx, &v) in neighbors.iter().enumerate() {
                let dn = match edge_kind(&self.pop, u, v) {
                    EdgeKind::Mono => del_mono,
                    EdgeKind::Bi => del_bi,
                };
                let bound = dn + f64::from(s.lower_bound[idx]);
                if !qualifies(bound) || !better(&best, bound) {
                    continue;
                }
                bfs_fill(&self.g, u, Some(Edge::new(u, v)), &mut s.row, &mut s.queue);
                if s.row.contains(&UNREACHABLE) {
                    continue;
                }
                let new_sum: u64 = s.row.iter().map(|&d| u64::from(d)).sum();
                let d = dn + (new_sum as i64 - old_sum as i64) as f64;
                if qualifies(d) && better(&best, d) {
                    best = Some((d, Move::DeleteEdge(Edge::new(u, v))));
                }
            }
        }

        for &w in neighbors {
            s.is_neighbor[w] = true;
        }
        for v in 0..n {
            if v == u || s.is_neighbor[v] {
                continue;
            }
            let kind = edge_kind(&self.pop, u, v);
            let dn = match kind {
                EdgeKind::Mono => add_mono,
                EdgeKind::Bi => add_bi,
            };
            let row_v = self.dm.row(v);
            let d = dn - add_gain_connected(row_u, row_v) as f64;
            if !qualifies(d) || !better(&best, d) {
                continue;
            }
            let pv = self.profiles[v];
            let dn_v = self
                .model
                .delta_neighborhood(&pv, kind, Action::Add)
                .expect("consistent profile");
            let partner = dn_v - add_gain_connected(row_v, row_u) as f64;
            if partner.is_definitely_negative() {
                best = Some((d, Move::AddEdge(Edge::new(u, v))));
            }
        }
        for &w in neighbors {
            s.is_neighbor[w] = false;
        }
        best.map_or(Move::Pass, |(_, mv)| mv)
    }

    fn point(&self) -> TimelinePoint {
        TimelinePoint {
            step: self.steps,
            ls: self.ls(),
            gs: self.gs(),
        }
    }

    /// Runs until convergence or `max_steps` activations, sampling the
    /// timeline at step 0, every `stride` steps and at the end.
    pub fn run(mut self, max_steps: u64, stride: u64, verify_exact: bool, seed: u64) -> RunRecord {
        let stride = stride.max(1);
        let mut timeline = vec![self.point()];
        while self.steps < max_steps {
            if self.step() == StepOutcome::Terminal {
                break;
            }
            if self.steps.is_multiple_of(stride) {
                timeline.push(self.point());
            }
        }
        if timeline.last().map(|p| p.step) != Some(self.steps) {
            timeline.push(self.point());
        }
        let converged = self.is_terminal();
        let exact_verified = (converged && verify_exact).then(|| {
            is_approx_stable_with(&self.params, &self.pop, &self.g, &self.dm, self.epsilon)
                .map(|r| r.is_stable())
                .unwrap_or(false)
        });
        let summary = GraphSummary {
            n: self.g.n(),
            m: self.g.m(),
            ls: self.ls(),
            gs: self.gs(),
            diameter: self.dm.diameter(),
        };
        RunRecord {
            timeline,
            summary,
            converged,
            steps_taken: self.steps,
            applied_moves: self.applied,
            seed,
            exact_verified,
            final_graph: self.g,
            population: self.pop,
        }
    }
}

/// Generates the initial network from `config.init` and runs the dynamics.
pub fn run(config: &DynamicsConfig) -> Result<RunRecord, DynamicsError> {
    if config.max_steps == 0 {
        return Err(DynamicsError::ZeroMaxSteps);
    }
    let (g, pop) = config.init.generate()?;
    let n = g.n();
    let state = DynamicsState::new(config.params, config.mode, config.epsilon, pop, g, config.seed)?;
    let stride = config.sample_stride.unwrap_or_else(|| default_stride(n));
    Ok(state.run(config.max_steps, stride, config.verify_exact, config.seed))
}
