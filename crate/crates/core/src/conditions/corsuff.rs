//! The level pairing bound
//! `min{k^{(r-m)(p-δ)} k^{rδ} w(E_j), k^m w(F_i)}` and the optimization
//! over the splitting parameter `ρ` that turns it into the sufficient
//! condition.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{SphereLevelSlice, TreeParams, Vertex, DEFAULT_NODE_BUDGET};
use crate::oracle::MaterializedTree;
use crate::weights::{LevelWeight, Weight};

fn check_p_delta(p: f64, delta: f64) -> Result<()> {
    if !(p > 1.0) {
        return Err(Error::Inadmissible(format!("need p > 1, got p = {p}")));
    }
    if !(delta < 1.0) {
        return Err(Error::Inadmissible(format!("need delta < 1, got delta = {delta}")));
    }
    Ok(())
}

/// Min-bound for `E_j ⊆ T_j`, `F_i ⊆ T_i` at radius `r`.
#[allow(clippy::too_many_arguments)]
pub fn corsuff_pairing_bound(
    k: u32,
    j: usize,
    i: usize,
    r: usize,
    w_e: f64,
    w_f: f64,
    p: f64,
    delta: f64,
) -> Result<f64> {
    check_p_delta(p, delta)?;
    let slice = SphereLevelSlice::between(j, i, r).ok_or_else(|| {
        Error::Precondition(format!("level {i} is not reachable from level {j} at radius {r}"))
    })?;
    let m = slice.up_steps as f64;
    let k = k as f64;
    let first = k.powf((r as f64 - m) * (p - delta) + r as f64 * delta) * w_e;
    let second = k.powf(m) * w_f;
    Ok(first.min(second))
}

/// One oracle instance of the pairing bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingSample {
    pub j: usize,
    pub i: usize,
    pub r: usize,
    pub pair: f64,
    pub bound: f64,
}

impl PairingSample {
    pub fn ratio(&self) -> f64 {
        if self.bound == 0.0 {
            0.0
        } else {
            self.pair / self.bound
        }
    }
}

fn random_subset<R: Rng>(rng: &mut R, level: &[Vertex]) -> BTreeSet<Vertex> {
    let n = rng.gen_range(1..=level.len());
    level.choose_multiple(rng, n).cloned().collect()
}

/// Smallest `C` with `pair ≤ C · bound` over `samples` random subset pairs
/// of the tree truncated at `depth`, pair counts by breadth-first search.
pub fn pairing_constant(
    tree: &TreeParams,
    w: &LevelWeight,
    p: f64,
    delta: f64,
    depth: usize,
    samples: usize,
    seed: u64,
) -> Result<(f64, Vec<PairingSample>)> {
    check_p_delta(p, delta)?;
    let k = tree.k();
    let mat = MaterializedTree::new(*tree, depth, DEFAULT_NODE_BUDGET)?;
    let levels: Vec<Vec<Vertex>> = (0..=depth)
        .map(|j| tree.level_vertices(j, DEFAULT_NODE_BUDGET))
        .collect::<Result<_>>()?;
    let weight = Weight::level(w.clone());
    let wv = |x: &Vertex| crate::logk::to_linear(k, weight.value_logk(x));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    let mut c: f64 = 0.0;
    while out.len() < samples {
        let j = rng.gen_range(0..=depth);
        let i = rng.gen_range(0..=depth);
        let r = rng.gen_range(j.abs_diff(i)..=(j + i));
        if SphereLevelSlice::between(j, i, r).is_none() {
            continue;
        }
        let e: Vec<Vertex> = random_subset(&mut rng, &levels[j]).into_iter().collect();
        let f: Vec<Vertex> = random_subset(&mut rng, &levels[i]).into_iter().collect();
        let pair = mat.pair_measure(&wv, &e, &f, r)?;
        let w_e: f64 = e.iter().map(wv).sum();
        let w_f: f64 = f.iter().map(wv).sum();
        let bound = corsuff_pairing_bound(k, j, i, r, w_e, w_f, p, delta)?;
        let s = PairingSample { j, i, r, pair, bound };
        c = c.max(s.ratio());
        out.push(s);
    }
    Ok((c, out))
}

/// Minimizer of the splitting objective and the resulting bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoOptimum {
    pub rho: f64,
    /// `f(ρ*)`.
    pub value: f64,
    /// `c_{p,δ} = (p-δ)^{-(p-δ)/(p-δ+1)} + (p-δ)^{1/(p-δ+1)}`.
    pub constant: f64,
    /// `c_{p,δ} k^{pr/(p-δ+1)} w_F^{1-1/(p-δ+1)} w_E^{1/(p-δ+1)}`.
    pub bound: f64,
}

/// `f(ρ) = k^{(p+δ)r/2} k^{ρ(p-δ)/2} w_E + k^{r/2} k^{-ρ/2} w_F`.
pub fn rho_objective(k: u32, p: f64, delta: f64, r: f64, w_e: f64, w_f: f64, rho: f64) -> f64 {
    let k = k as f64;
    k.powf((p + delta) * r / 2.0 + rho * (p - delta) / 2.0) * w_e + k.powf((r - rho) / 2.0) * w_f
}

pub fn rho_optimize(k: u32, p: f64, delta: f64, r: f64, w_e: f64, w_f: f64) -> Result<RhoOptimum> {
    check_p_delta(p, delta)?;
    if !(w_e > 0.0 && w_f > 0.0) {
        return Err(Error::Inadmissible(format!(
            "need wE > 0 and wF > 0, got wE = {w_e}, wF = {w_f}"
        )));
    }
    let q = p - delta;
    let d = q + 1.0;
    let kf = k as f64;
    let rho = 2.0 * (w_f / (w_e * q)).ln() / kf.ln() / d - (p + delta - 1.0) * r / d;
    let constant = q.powf(-q / d) + q.powf(1.0 / d);
    let bound = constant * kf.powf(p * r / d) * w_f.powf(1.0 - 1.0 / d) * w_e.powf(1.0 / d);
    Ok(RhoOptimum {
        rho,
        value: rho_objective(k, p, delta, r, w_e, w_f, rho),
        constant,
        bound,
    })
}
