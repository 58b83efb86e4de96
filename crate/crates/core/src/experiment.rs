//! Batch experiments: configuration, replicated parallel runs, box-plot
//! statistics and CSV files.
//!
//! Quartiles use linear interpolation between closest ranks: for a sorted
//! sample `x_0..x_{n-1}` and probability `p`, with `h = (n - 1) p`, the
//! quantile is `x_floor(h) + (h - floor(h)) (x_floor(h)+1 - x_floor(h))`.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::cost::{format_rational, parse_rational, CostParams, Model, Rational};
use crate::dynamics::{self, DynamicsConfig, DynamicsError, RunRecord, DEFAULT_MAX_STEPS};
use crate::init::{Coloring, InitSpec, Topology};
use crate::stability::Mode;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("box statistics need at least one value")]
    EmptyInput,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Exact rational that reads from JSON as `"1.01"`, `"101/100"` or a number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalValue(pub Rational);

impl Serialize for RationalValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for RationalValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
            Float(f64),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Text(s) => s,
            Raw::Int(i) => i.to_string(),
            Raw::Float(f) => f.to_string(),
        };
        parse_rational(&text)
            .map(RationalValue)
            .map_err(serde::de::Error::custom)
    }
}

/// Named alpha lists: `plot` is 5, 10, ..., 40; `range` is 15 evenly
/// spaced values from 5 to 255.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaPreset {
    Plot,
    Range,
}

impl AlphaPreset {
    pub fn values(&self) -> Vec<Rational> {
        match self {
            AlphaPreset::Plot => (1..=8).map(|i| Rational::from_integer(5 * i)).collect(),
            AlphaPreset::Range => (0..15)
                .map(|i| Rational::from_integer(5) + Rational::new(250 * i, 14))
                .collect(),
        }
    }
}

fn default_runs() -> usize {
    1
}

fn default_epsilon() -> RationalValue {
    RationalValue(Rational::one())
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchConfig {
    pub models: Vec<Model>,
    #[serde(default)]
    pub alphas: Vec<RationalValue>,
    /// Used when `alphas` is empty.
    #[serde(default)]
    pub alpha_preset: Option<AlphaPreset>,
    pub topologies: Vec<Topology>,
    pub colorings: Vec<Coloring>,
    pub modes: Vec<Mode>,
    #[serde(default = "default_runs")]
    pub runs_per_cell: usize,
    pub counts: Vec<usize>,
    /// Optional consistency check against `counts`.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "default_epsilon")]
    pub epsilon: RationalValue,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub max_steps: Option<u64>,
    #[serde(default)]
    pub sample_stride: Option<u64>,
    #[serde(default = "default_true")]
    pub verify_exact: bool,
    #[serde(default)]
    pub summary_csv: Option<PathBuf>,
    #[serde(default)]
    pub stats_csv: Option<PathBuf>,
    /// Largest tolerated fraction of non-converged runs.
    #[serde(default)]
    pub max_nonconverged_fraction: Option<f64>,
}

/// One combination of batch parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub model: Model,
    pub alpha: Rational,
    pub topology: Topology,
    pub coloring: Coloring,
    pub mode: Mode,
}

impl BatchConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn alpha_values(&self) -> Vec<Rational> {
        if self.alphas.is_empty() {
            self.alpha_preset.map(|p| p.values()).unwrap_or_default()
        } else {
            self.alphas.iter().map(|a| a.0).collect()
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let err = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.models.is_empty() {
            return err("models is empty");
        }
        let alphas = self.alpha_values();
        if alphas.is_empty() {
            return err("alphas is empty");
        }
        if alphas.iter().any(|a| *a <= Rational::from_integer(0)) {
            return err("alphas must be positive");
        }
        if self.topologies.is_empty() || self.colorings.is_empty() || self.modes.is_empty() {
            return err("topologies, colorings and modes must be non-empty");
        }
        if self.runs_per_cell == 0 {
            return err("runs_per_cell must be at least 1");
        }
        if self.counts.is_empty() || self.counts.contains(&0) {
            return err("counts must be non-empty and positive");
        }
        if self.n.is_some_and(|n| n != self.n()) {
            return err("n does not match the sum of counts");
        }
        if self.epsilon.0 < Rational::one() {
            return err("epsilon must be at least 1");
        }
        if self.max_steps == Some(0) {
            return err("max_steps must be at least 1");
        }
        for t in &self.topologies {
            if let Topology::Grid { rows, cols } = t {
                if rows * cols != self.n() {
                    return err("grid size does not match the population");
                }
                if self.colorings.contains(&Coloring::Segregated) && !self.counts[0].is_multiple_of(*cols) {
                    return err("segregated grid needs counts[0] to fill whole rows");
                }
            }
        }
        if self.colorings.contains(&Coloring::Segregated) && self.counts.len() != 2 {
            return err("segregated colorings need exactly two types");
        }
        if let Some(f) = self.max_nonconverged_fraction {
            if !(0.0..=1.0).contains(&f) {
                return err("max_nonconverged_fraction must be in [0, 1]");
            }
        }
        Ok(())
    }

    /// Cartesian product in the order models, alphas, topologies,
    /// colorings, modes.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &model in &self.models {
            for alpha in self.alpha_values() {
                for &topology in &self.topologies {
                    for &coloring in &self.colorings {
                        for &mode in &self.modes {
                            cells.push(Cell {
                                index: cells.len(),
                                model,
                                alpha,
                                topology,
                                coloring,
                                mode,
                            });
                        }
                    }
                }
            }
        }
        cells
    }

    fn dynamics_config(&self, cell: &Cell, seed: u64) -> DynamicsConfig {
        let params = CostParams::new(cell.model, cell.alpha).expect("validated alpha");
        let init = InitSpec {
            topology: cell.topology,
            coloring: cell.coloring,
            counts: self.counts.clone(),
            seed,
        };
        let mut config = DynamicsConfig::new(params, cell.mode, self.epsilon.0, init, seed);
        config.max_steps = self.max_steps.unwrap_or(DEFAULT_MAX_STEPS);
        config.sample_stride = self.sample_stride;
        config.verify_exact = self.verify_exact;
        config
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run` in cell `cell`:
/// `mix(mix(mix(base + g) ^ (cell + 2g)) ^ (run + 3g))` with `mix` the
/// SplitMix64 finalizer and `g = 0x9E3779B97F4A7C15`, all wrapping.
/// `mix` is a bijection, so distinct run indices give distinct seeds.
pub fn derive_seed(base: u64, cell: u64, run: u64) -> u64 {
    let h = mix64(base.wrapping_add(GOLDEN_GAMMA));
    let h = mix64(h ^ cell.wrapping_add(GOLDEN_GAMMA.wrapping_mul(2)));
    mix64(h ^ run.wrapping_add(GOLDEN_GAMMA.wrapping_mul(3)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub count: usize,
}

/// Quantile of a sorted sample by linear interpolation between closest
/// ranks.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn box_stats(values: &[f64]) -> Result<BoxStats, ExperimentError> {
    if values.is_empty() {
        return Err(ExperimentError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(BoxStats {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
        count: sorted.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: String,
    pub alpha: String,
    pub topology: String,
    pub coloring: String,
    pub mode: String,
    pub run: usize,
    pub seed: u64,
    pub steps: u64,
    pub converged: bool,
    pub final_ls: f64,
    pub final_gs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub model: String,
    pub alpha: String,
    pub topology: String,
    pub coloring: String,
    pub mode: String,
    pub metric: String,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub cells: Vec<CellResult>,
}

impl BatchResult {
    pub fn summary_rows(&self) -> Vec<SummaryRow> {
        self.cells
            .iter()
            .flat_map(|c| {
                c.runs.iter().enumerate().map(move |(i, r)| SummaryRow {
                    model: c.cell.model.to_string(),
                    alpha: format_rational(&c.cell.alpha),
                    topology: c.cell.topology.to_string(),
                    coloring: c.cell.coloring.to_string(),
                    mode: c.cell.mode.to_string(),
                    run: i,
                    seed: r.seed,
                    steps: r.steps_taken,
                    converged: r.converged,
                    final_ls: r.summary.ls,
                    final_gs: r.summary.gs,
                })
            })
            .collect()
    }

    pub fn stats_rows(&self) -> Vec<StatsRow> {
        stats_from_summary(&self.summary_rows()).expect("every cell has runs")
    }

    pub fn nonconverged_fraction(&self) -> f64 {
        let total: usize = self.cells.iter().map(|c| c.runs.len()).sum();
        let bad: usize = self
            .cells
            .iter()
            .flat_map(|c| &c.runs)
            .filter(|r| !r.converged)
            .count();
        if total == 0 {
            0.0
        } else {
            bad as f64 / total as f64
        }
    }

    /// The cell matching the given parameters, if any.
    pub fn find(
        &self,
        model: Model,
        alpha: Rational,
        topology: Topology,
        coloring: Coloring,
        mode: Mode,
    ) -> Option<&CellResult> {
        self.cells.iter().find(|c| {
            c.cell.model == model
                && c.cell.alpha == alpha
                && c.cell.topology == topology
                && c.cell.coloring == coloring
                && c.cell.mode == mode
        })
    }
}

/// Runs every cell `runs_per_cell` times. Results are ordered by cell and
/// run index regardless of `parallel`.
pub fn run_batch(config: &BatchConfig, parallel: bool) -> Result<BatchResult, ExperimentError> {
    config.validate()?;
    let cells = config.cells();
    let tasks: Vec<(usize, usize)> = cells
        .iter()
        .flat_map(|c| (0..config.runs_per_cell).map(move |r| (c.index, r)))
        .collect();
    let run_one = |&(ci, ri): &(usize, usize)| {
        let seed = derive_seed(config.base_seed, ci as u64, ri as u64);
        dynamics::run(&config.dynamics_config(&cells[ci], seed))
    };
    let records: Vec<Result<RunRecord, DynamicsError>> = if parallel {
        tasks.par_iter().map(run_one).collect()
    } else {
        tasks.iter().map(run_one).collect()
    };
    let mut records = records.into_iter();
    let mut out = Vec::with_capacity(cells.len());
    for cell in cells {
        let runs = records
            .by_ref()
            .take(config.runs_per_cell)
            .collect::<Result<Vec<_>, _>>()?;
        out.push(CellResult { cell, runs });
    }
    Ok(BatchResult { cells: out })
}

/// Per-cell box statistics of `final_ls` and `final_gs`, cells in order of
/// first appearance.
pub fn stats_from_summary(rows: &[SummaryRow]) -> Result<Vec<StatsRow>, ExperimentError> {
    if rows.is_empty() {
        return Err(ExperimentError::EmptyInput);
    }
    type Key = (String, String, String, String, String);
    let mut order: Vec<Key> = Vec::new();
    let mut groups: HashMap<Key, (Vec<f64>, Vec<f64>)> = HashMap::new();
    for r in rows {
        let key = (
            r.model.clone(),
            r.alpha.clone(),
            r.topology.clone(),
            r.coloring.clone(),
            r.mode.clone(),
        );
        let entry = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (Vec::new(), Vec::new())
        });
        entry.0.push(r.final_ls);
        entry.1.push(r.final_gs);
    }
    let mut out = Vec::new();
    for key in order {
        let (ls, gs) = &groups[&key];
        for (metric, values) in [("ls", ls), ("gs", gs)] {
            let b = box_stats(values)?;
            out.push(StatsRow {
                model: key.0.clone(),
                alpha: key.1.clone(),
                topology: key.2.clone(),
                coloring: key.3.clone(),
                mode: key.4.clone(),
                metric: metric.to_string(),
                min: b.min,
                q1: b.q1,
                median: b.median,
                q3: b.q3,
                max: b.max,
                count: b.count,
            });
        }
    }
    Ok(out)
}

pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn rows_from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, ExperimentError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<Result<Vec<T>, _>>()?)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), ExperimentError> {
    fs::write(path, rows_to_csv(rows)?).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    rows_from_csv(&text)
}
