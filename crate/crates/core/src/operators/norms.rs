//! Weighted `L^p` and weak-`L^p` functionals, and the series `Σ_r ‖A_r∘ f‖`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TreeParams;
use crate::logk::{self, LOG_ZERO};
use crate::weights::{level_mass_logk, LevelWeight, Weight};

use super::levelscan::{maximal_profile_logk, sphere_average_logk, LogSupport};
use super::{Geometry, LevelFunction, SparseFunction};

/// Default number of levels scanned when locating superlevel sets.
pub const DEFAULT_LEVEL_HORIZON: usize = 500;

/// Grid density for weak profiles: points per factor of ten in `λ`.
pub const LAMBDA_POINTS_PER_DECADE: usize = 64;

/// `log_k ‖g‖^p_{L^p(w)} = log_k Σ_j |T_j| φ(j) g(j)^p`.
pub fn lp_norm_pow_logk(tree: &TreeParams, g: &LevelFunction<f64>, w: &LevelWeight, p: f64) -> f64 {
    let k = tree.k();
    let support = LogSupport::new(k, g);
    profile_norm_pow_logk(k, support.entries().iter().copied(), w, p)
}

/// `log_k ‖g‖_{L^p(w)}`.
pub fn lp_norm_logk(tree: &TreeParams, g: &LevelFunction<f64>, w: &LevelWeight, p: f64) -> f64 {
    lp_norm_pow_logk(tree, g, w, p) / p
}

/// `log_k Σ_j |T_j| φ(j) h(j)^p` for a level function given as
/// `(level, log_k h(level))` pairs.
pub fn profile_norm_pow_logk(
    k: u32,
    levels: impl IntoIterator<Item = (usize, f64)>,
    w: &LevelWeight,
    p: f64,
) -> f64 {
    logk::sum(
        k,
        levels
            .into_iter()
            .filter(|(_, h)| *h > LOG_ZERO)
            .map(|(j, h)| level_mass_logk(w, j) + p * h),
    )
}

/// `log_k ‖f‖_{L^p(w)}` for a finitely supported function.
pub fn lp_norm_sparse_logk(tree: &TreeParams, f: &SparseFunction<f64>, w: &Weight, p: f64) -> f64 {
    let k = tree.k();
    let pow = logk::sum(
        k,
        f.support()
            .iter()
            .map(|(x, v)| p * logk::from_linear(k, *v) + w.value_logk(x)),
    );
    pow / p
}

/// Superlevel masses `w({Mf > λ})` on a `λ` grid, and the weak functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakTypeProfile {
    pub p: f64,
    pub geometry: Geometry,
    pub lambdas_logk: Vec<f64>,
    /// `log_k w({Mf > λ})`; for uncertified thresholds a lower bound.
    pub masses_logk: Vec<f64>,
    /// Whether each mass is exact (the level scan certified the tail).
    pub certified: Vec<bool>,
    /// `log_k sup_λ λ w({Mf > λ})^{1/p}` over the grid.
    pub grid_sup_logk: f64,
    /// Same supremum over every certified `λ`: attained as `λ ↑ Mf(T_j)`.
    pub sup_logk: f64,
    /// Thresholds at or below this value were not certified.
    pub certified_floor_logk: f64,
    pub levels_scanned: usize,
    pub diverged: bool,
}

impl WeakTypeProfile {
    /// `log_k sup_λ λ^p w({Mf > λ})`.
    pub fn sup_pow_logk(&self) -> f64 {
        self.p * self.sup_logk
    }
}

/// Log-spaced grid with [`LAMBDA_POINTS_PER_DECADE`] points per decade
/// between the smallest and largest positive profile values.
pub fn default_lambda_grid(k: u32, profile_logk: &[f64]) -> Vec<f64> {
    let positive: Vec<f64> = profile_logk.iter().copied().filter(|v| v.is_finite()).collect();
    let (Some(lo), Some(hi)) = (
        positive.iter().copied().reduce(f64::min),
        positive.iter().copied().reduce(f64::max),
    ) else {
        return Vec::new();
    };
    let step = logk::from_linear(k, 10.0) / LAMBDA_POINTS_PER_DECADE as f64;
    let n = ((hi - lo) / step).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// Weak-type profile of the maximal function of a level function.
///
/// Levels are scanned up to `horizon`; beyond the support the maximal
/// function at level `j` is at most the geometric bound
/// [`LogSupport::tail_bound_logk`], so a threshold is certified once that
/// bound drops to it. Thresholds that stay uncertified set `diverged`.
pub fn weak_profile(
    tree: &TreeParams,
    g: &LevelFunction<f64>,
    w: &LevelWeight,
    p: f64,
    lambdas_logk: &[f64],
    geometry: Geometry,
    horizon: usize,
) -> Result<WeakTypeProfile> {
    if p <= 0.0 {
        return Err(Error::Inadmissible(format!("weak profile needs p > 0, got {p}")));
    }
    let k = tree.k();
    let support = LogSupport::new(k, g);
    let Some(depth) = support.max_depth() else {
        return Ok(WeakTypeProfile {
            p,
            geometry,
            lambdas_logk: lambdas_logk.to_vec(),
            masses_logk: vec![LOG_ZERO; lambdas_logk.len()],
            certified: vec![true; lambdas_logk.len()],
            grid_sup_logk: LOG_ZERO,
            sup_logk: LOG_ZERO,
            certified_floor_logk: LOG_ZERO,
            levels_scanned: 0,
            diverged: false,
        });
    };
    let horizon = horizon.max(depth + 1);
    let profile = maximal_profile_logk(tree, &support, horizon, geometry);
    // every level past the scan sits at or below this
    let floor = support.tail_bound_logk(k, horizon + 1);

    let mass_above = |lambda: f64, strict: bool| -> f64 {
        logk::sum(
            k,
            profile
                .values_logk
                .iter()
                .enumerate()
                .filter(|(_, v)| if strict { **v > lambda } else { **v >= lambda })
                .map(|(j, _)| level_mass_logk(w, j)),
        )
    };

    let mut masses = Vec::with_capacity(lambdas_logk.len());
    let mut certified = Vec::with_capacity(lambdas_logk.len());
    let mut grid_sup = LOG_ZERO;
    for &lambda in lambdas_logk {
        let m = mass_above(lambda, true);
        let ok = lambda >= floor;
        masses.push(m);
        certified.push(ok);
        if ok && m > LOG_ZERO {
            grid_sup = grid_sup.max(lambda + m / p);
        }
    }

    let mut sup = LOG_ZERO;
    let mut candidates: Vec<f64> = profile
        .values_logk
        .iter()
        .copied()
        .filter(|v| *v > floor)
        .collect();
    candidates.sort_by(|a, b| b.partial_cmp(a).unwrap());
    candidates.dedup();
    for v in candidates {
        sup = sup.max(v + mass_above(v, false) / p);
    }

    Ok(WeakTypeProfile {
        p,
        geometry,
        lambdas_logk: lambdas_logk.to_vec(),
        masses_logk: masses,
        diverged: certified.iter().any(|c| !c),
        certified,
        grid_sup_logk: grid_sup,
        sup_logk: sup,
        certified_floor_logk: floor,
        levels_scanned: horizon + 1,
    })
}

/// Partial sums of `Σ_{r<=R} ‖A_r∘ f‖_{L^p(w)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    /// `log_k ‖A_r∘ f‖_{L^p(w)}` for `r = 0..=R`.
    pub terms_logk: Vec<f64>,
    /// `log_k` of the partial sums.
    pub partial_sums_logk: Vec<f64>,
    /// Increase over the last ten radii relative to the final partial sum.
    pub tail_increment: f64,
    pub converged: bool,
}

/// Radii over which the convergence tail is measured.
pub const SERIES_TAIL_WINDOW: usize = 10;

/// `Σ_{r=0}^{R} ‖A_r∘ g‖_{L^p(w)}`. Each `A_r∘ g` is supported on levels
/// `<= r + J_max`, so every term is an exact finite sum.
pub fn series_norm_sum(
    tree: &TreeParams,
    g: &LevelFunction<f64>,
    w: &LevelWeight,
    p: f64,
    r_max: usize,
    tail_ratio: f64,
) -> Result<SeriesReport> {
    let k = tree.k();
    let support = LogSupport::new(k, g);
    let Some(depth) = support.max_depth() else {
        return Ok(SeriesReport {
            terms_logk: vec![LOG_ZERO; r_max + 1],
            partial_sums_logk: vec![LOG_ZERO; r_max + 1],
            tail_increment: 0.0,
            converged: true,
        });
    };
    let mut terms = Vec::with_capacity(r_max + 1);
    let mut sums = Vec::with_capacity(r_max + 1);
    let mut acc = LOG_ZERO;
    for r in 0..=r_max {
        let levels = (0..=r + depth).map(|j| (j, sphere_average_logk(tree, &support, j, r)));
        let term = profile_norm_pow_logk(k, levels, w, p) / p;
        if term.is_nan() || term == f64::INFINITY {
            return Err(Error::Horizon {
                horizon: r,
                detail: format!("‖A_{r}∘ f‖ is not finite"),
            });
        }
        terms.push(term);
        acc = logk::add(k, acc, term);
        sums.push(acc);
    }
    let back = r_max.saturating_sub(SERIES_TAIL_WINDOW);
    let tail_increment = if acc == LOG_ZERO {
        0.0
    } else {
        1.0 - logk::to_linear(k, sums[back] - acc)
    };
    Ok(SeriesReport {
        terms_logk: terms,
        partial_sums_logk: sums,
        tail_increment,
        converged: tail_increment < tail_ratio,
    })
}
