//! The pair measure `𝟙⊗w({(x, y) ∈ E×F : d(x, y) = r})` and the
//! sufficient-condition ratio built on it.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::fit::VerdictRule;
use crate::geometry::{distance, SphereLevelSlice, TreeParams, Vertex};
use crate::logk::{self, LOG_ZERO};
use crate::operators::{SparseFunction, TestFunction};
use crate::scalar::Scalar;
use crate::weights::{LevelWeight, LevelWeightPair, Weight, WeightPair};

use super::{finish, grid_entry, ConditionParams, ConditionReport, Witness};

/// `(p, β, α)` for the sufficient condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuffParams {
    pub p: f64,
    pub beta: f64,
    pub alpha: f64,
}

/// `Σ_{x∈E} w(F ∩ S(x, r))` in floating point.
pub fn pair_measure(
    tree: &TreeParams,
    w: &Weight,
    e: &BTreeSet<Vertex>,
    f: &BTreeSet<Vertex>,
    r: usize,
) -> f64 {
    logk::to_linear(tree.k(), pair_measure_logk(tree, w, e, f, r))
}

pub(crate) fn pair_measure_logk(
    tree: &TreeParams,
    w: &Weight,
    e: &BTreeSet<Vertex>,
    f: &BTreeSet<Vertex>,
    r: usize,
) -> f64 {
    logk::sum(
        tree.k(),
        e.iter().flat_map(|x| {
            f.iter()
                .filter(move |y| distance(x, y) == r)
                .map(|y| w.value_logk(y))
        }),
    )
}

/// Exact pair measure in any scalar type.
pub fn pair_measure_exact<S: Scalar>(
    tree: &TreeParams,
    w: &Weight,
    e: &BTreeSet<Vertex>,
    f: &BTreeSet<Vertex>,
    r: usize,
) -> Result<S> {
    let mut acc = S::zero();
    for y in f {
        let hits = e.iter().filter(|x| distance(x, y) == r).count() as u64;
        if hits > 0 {
            let wy = w
                .value::<S>(tree.k(), y)
                .ok_or_else(|| Error::NotRepresentable(format!("weight at {y}")))?;
            acc = acc + wy * S::from_u64(hits).expect("count fits");
        }
    }
    Ok(acc)
}

/// The same quantity written as `Σ_{x∈E} |S(x,r)| A_r∘(χ_F w)(x)`.
pub fn pair_measure_via_averages<S: Scalar>(
    tree: &TreeParams,
    w: &Weight,
    e: &BTreeSet<Vertex>,
    f: &BTreeSet<Vertex>,
    r: usize,
) -> Result<S> {
    let mut support = BTreeMap::new();
    for y in f {
        let wy = w
            .value::<S>(tree.k(), y)
            .ok_or_else(|| Error::NotRepresentable(format!("weight at {y}")))?;
        support.insert(y.clone(), wy);
    }
    let g = SparseFunction::new(support)?;
    Ok(e.iter().fold(S::zero(), |acc, x| {
        acc + S::from_count(&tree.sphere_size(x.depth(), r)) * g.sphere_average(tree, x, r)
    }))
}

/// Pair measure for `E = ∪_{j∈E} T_j` and `F = ∪_{i∈F} T_i` through the
/// closed-form level counts, as `log_k`.
pub fn pair_measure_levels_logk(
    tree: &TreeParams,
    w: &LevelWeight,
    e_levels: &[usize],
    f_levels: &[usize],
    r: usize,
) -> f64 {
    logk::sum(
        tree.k(),
        e_levels.iter().flat_map(|&j| {
            f_levels.iter().filter_map(move |&i| {
                SphereLevelSlice::between(j, i, r).map(|s| {
                    j as f64 + tree.sphere_level_count_logk(j, r, s.up_steps) + w.log_value(i)
                })
            })
        }),
    )
}

/// Exact level-slice pair measure.
pub fn pair_measure_levels<S: Scalar>(
    tree: &TreeParams,
    w: &LevelWeight,
    e_levels: &[usize],
    f_levels: &[usize],
    r: usize,
) -> Result<S> {
    let k = tree.k();
    let mut acc = S::zero();
    for &j in e_levels {
        for &i in f_levels {
            if let Some(s) = SphereLevelSlice::between(j, i, r) {
                let wi = w
                    .value::<S>(k, i)
                    .ok_or_else(|| Error::NotRepresentable(format!("weight on level {i}")))?;
                let n = tree.level_size(j) * tree.sphere_level_count(j, r, s.up_steps);
                acc = acc + S::from_count(&n) * wi;
            }
        }
    }
    Ok(acc)
}

fn ratio_logk(pair_logk: f64, r: usize, sp: SuffParams, v_e: f64, u_f: f64) -> f64 {
    let a = sp.alpha / sp.p;
    pair_logk - r as f64 * sp.beta - a * v_e - (1.0 - a) * u_f
}

/// `log_k` of `pair / (k^{rβ} v(E)^{α/p} u(F)^{1-α/p})`, with `u` in the
/// pair measure. One-weight checks pass `Pair::single(w)`.
pub fn suffcond_ratio_logk(
    tree: &TreeParams,
    weights: &WeightPair,
    sp: SuffParams,
    e: &BTreeSet<Vertex>,
    f: &BTreeSet<Vertex>,
    r: usize,
) -> Result<f64> {
    if e.is_empty() || f.is_empty() {
        return Err(Error::Precondition("E and F must be nonempty".into()));
    }
    let k = tree.k();
    let pair = pair_measure_logk(tree, &weights.u, e, f, r);
    let v_e = logk::sum(k, e.iter().map(|x| weights.v.value_logk(x)));
    let u_f = logk::sum(k, f.iter().map(|y| weights.u.value_logk(y)));
    Ok(ratio_logk(pair, r, sp, v_e, u_f))
}

/// Ratio for unions of full levels.
pub fn suffcond_ratio_levels_logk(
    tree: &TreeParams,
    weights: &LevelWeightPair,
    sp: SuffParams,
    e_levels: &[usize],
    f_levels: &[usize],
    r: usize,
) -> Result<f64> {
    if e_levels.is_empty() || f_levels.is_empty() {
        return Err(Error::Precondition("E and F must be nonempty".into()));
    }
    let k = tree.k();
    let mass = |w: &LevelWeight, levels: &[usize]| {
        logk::sum(k, levels.iter().map(|&j| j as f64 + w.log_value(j)))
    };
    let pair = pair_measure_levels_logk(tree, &weights.u, e_levels, f_levels, r);
    if pair == LOG_ZERO {
        return Ok(LOG_ZERO);
    }
    Ok(ratio_logk(
        pair,
        r,
        sp,
        mass(&weights.v, e_levels),
        mass(&weights.u, f_levels),
    ))
}

/// Sup of the ratio over single level slices `E = T_j`, `F = T_i` with
/// `j, i <= j_max`, `r <= r_max`. The verdict follows the running sup along
/// `r`.
pub fn suffcond_levels_sup(
    tree: &TreeParams,
    weights: &LevelWeightPair,
    params: &ConditionParams,
    j_max: usize,
    r_max: usize,
    rule: VerdictRule,
) -> Result<ConditionReport> {
    let sp = params.suff()?;
    let per_r = (0..=r_max)
        .into_par_iter()
        .map(|r| {
            let mut best = (LOG_ZERO, Witness::None);
            for j in 0..=j_max {
                for i in 0..=j_max {
                    if SphereLevelSlice::between(j, i, r).is_none() {
                        continue;
                    }
                    let v = suffcond_ratio_levels_logk(tree, weights, sp, &[j], &[i], r)?;
                    if v > best.0 || best.1 == Witness::None {
                        best = (v, Witness::Levels { j, i, r });
                    }
                }
            }
            Ok((r, best.0, best.1))
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = grid_entry(&[
        ("k", json!(tree.k())),
        ("j_max", json!(j_max)),
        ("r_max", json!(r_max)),
        ("u", json!(weights.u.to_string())),
        ("v", json!(weights.v.to_string())),
    ]);
    Ok(finish("suffcond", params.clone(), grid, tree.k(), per_r, rule))
}
