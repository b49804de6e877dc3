//! Dimension estimation for unweighted graphs: spectral embedding followed by
//! twoNN, repeated over a range of trial dimensions until the estimate
//! plateaus. Weighted inputs skip the embedding.

use crate::error::{Error, Result};
use crate::graph::{DissimilarityMatrix, UnweightedGraph};
use crate::spectral::{spectral_embed, EigenOptions, Embedding};
use crate::twonn::{
    estimate_dimension_with_window, neighbour_ratios_from_dissimilarity, neighbour_ratios_from_points,
    DimensionEstimate, Window,
};

/// twoNN on the embedded points of an existing embedding.
pub fn estimate_embedded(embedding: &Embedding, window: Window) -> Result<DimensionEstimate> {
    let points = embedding.to_point_cloud()?;
    let ratios = neighbour_ratios_from_points(&points)?;
    estimate_dimension_with_window(&ratios, window)
}

/// Embeds `a` into `R^s` and runs twoNN on the embedded points.
pub fn algorithm1(a: &UnweightedGraph, s: usize, eigen: &EigenOptions, window: Window) -> Result<DimensionEstimate> {
    if s < 2 {
        return Err(Error::InvalidParameter(format!("trial dimension must be at least 2, got {s}")));
    }
    let embedding = spectral_embed(a, s, eigen)?;
    estimate_embedded(&embedding, window)
}

/// twoNN straight from a dissimilarity matrix.
pub fn weighted_estimate(m: &DissimilarityMatrix, window: Window) -> Result<DimensionEstimate> {
    let ratios = neighbour_ratios_from_dissimilarity(m)?;
    estimate_dimension_with_window(&ratios, window)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub s_min: usize,
    pub s_max: usize,
    /// Largest relative step `|d(s) - d(s-1)| / d(s)` inside a plateau.
    pub plateau_epsilon: f64,
    /// Number of consecutive trial dimensions forming a plateau.
    pub plateau_len: usize,
    pub window: Window,
    pub eigen: EigenOptions,
    /// Compute one eigendecomposition for `s_max` and slice its columns for
    /// every smaller `s`, instead of a fresh solve per `s`.
    pub warm_start: bool,
    /// Stop at the first plateau rather than covering the whole range.
    pub stop_at_plateau: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            s_min: 2,
            s_max: 30,
            plateau_epsilon: 0.05,
            plateau_len: 3,
            window: Window::default(),
            eigen: EigenOptions::default(),
            warm_start: false,
            stop_at_plateau: true,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.s_min < 2 || self.s_min > self.s_max {
            return Err(Error::InvalidParameter(format!(
                "need 2 <= s_min <= s_max, got s_min = {}, s_max = {}",
                self.s_min, self.s_max
            )));
        }
        if !(self.plateau_epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("plateau epsilon must be positive, got {}", self.plateau_epsilon)));
        }
        if self.plateau_len < 2 {
            return Err(Error::InvalidParameter(format!("plateau length must be at least 2, got {}", self.plateau_len)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutcome {
    Estimate { d_star: f64, d_min: f64, d_max: f64 },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub s: usize,
    pub outcome: SweepOutcome,
}

impl SweepRecord {
    pub fn d_star(&self) -> Option<f64> {
        match self.outcome {
            SweepOutcome::Estimate { d_star, .. } => Some(d_star),
            SweepOutcome::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plateau {
    /// First and last trial dimension of the plateau, inclusive.
    pub s_first: usize,
    pub s_last: usize,
    /// Mean `d_star` over the plateau.
    pub mean_d_star: f64,
    /// `mean_d_star` rounded to the nearest integer.
    pub chosen_dimension: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// One record per evaluated `s`, ascending.
    pub records: Vec<SweepRecord>,
    /// `None` when no plateau was found in range.
    pub plateau: Option<Plateau>,
}

impl SweepResult {
    pub fn chosen_dimension(&self) -> Option<usize> {
        self.plateau.as_ref().map(|p| p.chosen_dimension)
    }
}

fn relative_step(prev: f64, cur: f64) -> f64 {
    (cur - prev).abs() / cur.abs()
}

/// Plateau ending at the last record: the last `len` records are consecutive
/// successful estimates whose neighbouring relative steps are all below
/// `epsilon`.
pub fn plateau_at_end(records: &[SweepRecord], epsilon: f64, len: usize) -> Option<Plateau> {
    if len < 2 || records.len() < len {
        return None;
    }
    let tail = &records[records.len() - len..];
    let values: Vec<f64> = tail.iter().map(SweepRecord::d_star).collect::<Option<_>>()?;
    let contiguous = tail.windows(2).all(|w| w[1].s == w[0].s + 1);
    if !contiguous || !values.windows(2).all(|w| relative_step(w[0], w[1]) < epsilon) {
        return None;
    }
    let mean_d_star = values.iter().sum::<f64>() / len as f64;
    Some(Plateau {
        s_first: tail[0].s,
        s_last: tail[len - 1].s,
        mean_d_star,
        chosen_dimension: mean_d_star.round().max(0.0) as usize,
    })
}

/// First plateau anywhere in `records`.
pub fn detect_plateau(records: &[SweepRecord], epsilon: f64, len: usize) -> Option<Plateau> {
    (len..=records.len()).find_map(|end| plateau_at_end(&records[..end], epsilon, len))
}

/// Drives a sweep with an arbitrary per-`s` estimator.
pub fn sweep_with<F>(cfg: &SweepConfig, mut estimate: F) -> Result<SweepResult>
where
    F: FnMut(usize) -> Result<DimensionEstimate>,
{
    cfg.validate()?;
    let mut records = Vec::new();
    for s in cfg.s_min..=cfg.s_max {
        let outcome = match estimate(s) {
            Ok(e) => SweepOutcome::Estimate { d_star: e.d_star, d_min: e.d_min, d_max: e.d_max },
            Err(e) => SweepOutcome::Failed(e.to_string()),
        };
        records.push(SweepRecord { s, outcome });
        if cfg.stop_at_plateau {
            if let Some(plateau) = plateau_at_end(&records, cfg.plateau_epsilon, cfg.plateau_len) {
                return Ok(SweepResult { records, plateau: Some(plateau) });
            }
        }
    }
    let plateau = detect_plateau(&records, cfg.plateau_epsilon, cfg.plateau_len);
    Ok(SweepResult { records, plateau })
}

/// Runs [`algorithm1`] for `s = s_min ..= s_max`. A failure at one `s` is
/// recorded and the sweep continues; a disconnected graph or an embedding
/// dimension beyond `n - 1` fails the whole sweep.
pub fn sweep(a: &UnweightedGraph, cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let components = a.component_count();
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    if cfg.s_max + 1 > a.n() {
        return Err(Error::InvalidParameter(format!(
            "s_max = {} needs at least {} nodes, graph has {}",
            cfg.s_max,
            cfg.s_max + 1,
            a.n()
        )));
    }
    if cfg.warm_start {
        let full = spectral_embed(a, cfg.s_max, &cfg.eigen)?;
        sweep_with(cfg, |s| estimate_embedded(&full.truncated(s)?, cfg.window))
    } else {
        sweep_with(cfg, |s| algorithm1(a, s, &cfg.eigen, cfg.window))
    }
}
