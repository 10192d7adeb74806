//! The distributional inequality behind the weak-type bound:
//! `w({A_r∘|f| ≥ λ})` against a weighted sum of superlevel masses of `f`.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{TreeParams, Vertex, DEFAULT_NODE_BUDGET};
use crate::logk;
use crate::operators::{SparseFunction, TestFunction};
use crate::weights::LevelWeight;

use super::pair::SuffParams;

#[derive(Debug, Clone, PartialEq)]
pub struct SumLevelsInstance {
    pub f: SparseFunction<f64>,
    pub r: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumLevelsSides {
    /// `w({A_r∘ f ≥ λ})`.
    pub lhs: f64,
    /// `Σ_{0 <= n, 2^n <= 2k^r} (2^n/k^r)^{(1-β)p/(2α)} 2^{βpn/α} w({f ≥ 2^{n-1}λ})`.
    pub rhs: f64,
}

impl SumLevelsSides {
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

/// Both sides for one instance. Only vertices within distance `r` of the
/// support can have a nonzero average, so the left side is a finite sum.
pub fn sum_levels_sides(
    tree: &TreeParams,
    w: &LevelWeight,
    sp: SuffParams,
    inst: &SumLevelsInstance,
) -> Result<SumLevelsSides> {
    let k = tree.k();
    let r = inst.r;
    let wv = |x: &Vertex| logk::to_linear(k, w.log_value(x.depth()));
    let mut reach = BTreeSet::new();
    for y in inst.f.support().keys() {
        reach.extend(tree.enumerate_sphere_with_budget(y, r, y.depth() + r, DEFAULT_NODE_BUDGET)?);
    }
    let lhs: f64 = reach
        .iter()
        .filter(|x| inst.f.sphere_average(tree, x, r) >= inst.lambda)
        .map(wv)
        .sum();

    let e1 = (1.0 - sp.beta) / 2.0 * sp.p / sp.alpha;
    let e2 = sp.beta * sp.p / sp.alpha;
    let kr = (k as f64).powi(r as i32);
    let mut rhs = 0.0;
    let mut n = 0i32;
    while 2f64.powi(n) <= 2.0 * kr {
        let level = 2f64.powi(n - 1) * inst.lambda;
        let mass: f64 = inst
            .f
            .support()
            .iter()
            .filter(|(_, v)| **v >= level)
            .map(|(x, _)| wv(x))
            .sum();
        rhs += (2f64.powi(n) / kr).powf(e1) * 2f64.powf(e2 * n as f64) * mass;
        n += 1;
    }
    Ok(SumLevelsSides { lhs, rhs })
}

fn random_vertex<R: Rng>(tree: &TreeParams, rng: &mut R, depth: usize) -> Vertex {
    let mut v = tree.root();
    for _ in 0..depth {
        v = v.child(rng.gen_range(0..tree.k()));
    }
    v
}

fn below(tree: &TreeParams, a: &Vertex, t: usize) -> Vec<Vertex> {
    let mut level = vec![a.clone()];
    for _ in 0..t {
        level = level
            .iter()
            .flat_map(|v| (0..tree.k()).map(move |d| v.child(d)))
            .collect();
    }
    level
}

/// A random instance: `f` is a sum of one to three blobs (a vertex, the
/// level slice of a subtree, or a full level) with values `2^a`, supported
/// on depths `<= max_depth`; `r` is in `1..=r_max` and `λ` a power of two.
pub fn random_instance<R: Rng>(
    tree: &TreeParams,
    rng: &mut R,
    max_depth: usize,
    r_max: usize,
) -> SumLevelsInstance {
    let mut support: BTreeMap<Vertex, f64> = BTreeMap::new();
    for _ in 0..rng.gen_range(1..=3) {
        let value = 2f64.powi(rng.gen_range(0..=6));
        let blob = match rng.gen_range(0..3) {
            0 => {
                let d = rng.gen_range(0..=max_depth);
                vec![random_vertex(tree, rng, d)]
            }
            1 => {
                let d = rng.gen_range(0..=max_depth);
                let a = random_vertex(tree, rng, d);
                below(tree, &a, rng.gen_range(0..=max_depth - d))
            }
            _ => below(tree, &tree.root(), rng.gen_range(0..=max_depth)),
        };
        for x in blob {
            *support.entry(x).or_insert(0.0) += value;
        }
    }
    SumLevelsInstance {
        f: SparseFunction::new(support).expect("positive values"),
        r: rng.gen_range(1..=r_max),
        lambda: 2f64.powi(rng.gen_range(-3..=5)),
    }
}

/// Smallest `C` with `lhs <= C rhs` over the instances, with every ratio.
pub fn calibrate(
    tree: &TreeParams,
    w: &LevelWeight,
    sp: SuffParams,
    instances: &[SumLevelsInstance],
) -> Result<(f64, Vec<f64>)> {
    let ratios = instances
        .iter()
        .map(|i| sum_levels_sides(tree, w, sp, i).map(|s| s.ratio()))
        .collect::<Result<Vec<f64>>>()?;
    let c = ratios.iter().copied().fold(0.0, f64::max);
    Ok((c, ratios))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_vertex_instance() {
        let t = TreeParams::new(2).unwrap();
        let y = t.leftmost(2);
        let inst = SumLevelsInstance {
            f: SparseFunction::delta(y),
            r: 1,
            lambda: 1.0 / 3.0,
        };
        let sp = SuffParams { p: 2.0, beta: 0.5, alpha: 1.0 };
        let s = sum_levels_sides(&t, &LevelWeight::constant(), sp, &inst).unwrap();
        // the three neighbours have A_1 δ_y = 1/3
        assert_eq!(s.lhs, 3.0);
        assert!(s.rhs > 0.0);
    }

    #[test]
    fn instances_are_reproducible() {
        let t = TreeParams::new(2).unwrap();
        let a = random_instance(&t, &mut ChaCha8Rng::seed_from_u64(3), 4, 3);
        let b = random_instance(&t, &mut ChaCha8Rng::seed_from_u64(3), 4, 3);
        assert_eq!(a, b);
        assert!(a.f.max_support_depth().unwrap() <= 4);
    }
}
