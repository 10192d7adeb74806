//! The level-wise condition
//! `w(T_i ∩ S(x, r)) ≲ k^{((r+i-j)/2)(p-δ)} k^{rδ} w(x)`.

use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::fit::VerdictRule;
use crate::geometry::TreeParams;
use crate::weights::{LevelWeight, LevelWeightPair};

use super::{finish, grid_entry, ConditionParams, ConditionReport, Witness};

/// `log_k` of one cell for centre level `j`, radius `r`, `m` upward steps,
/// with `u` measuring the slice and `v` evaluated at the centre.
pub fn two_weight_level_cell_logk(
    tree: &TreeParams,
    weights: &LevelWeightPair,
    p: f64,
    delta: f64,
    j: usize,
    r: usize,
    m: usize,
) -> f64 {
    let i = j + r - 2 * m;
    tree.sphere_level_count_logk(j, r, m) + weights.u.log_value(i)
        - (r - m) as f64 * (p - delta)
        - r as f64 * delta
        - weights.v.log_value(j)
}

pub fn levelwise_cell_logk(
    tree: &TreeParams,
    w: &LevelWeight,
    p: f64,
    delta: f64,
    j: usize,
    r: usize,
    m: usize,
) -> f64 {
    two_weight_level_cell_logk(tree, &LevelWeightPair::single(w.clone()), p, delta, j, r, m)
}

/// Sup of the level-wise ratio over `j <= j_max`, `r <= r_max` and every
/// valid `m`. The verdict follows the running sup along `r`.
pub fn levelwise_condition_sup(
    tree: &TreeParams,
    weights: &LevelWeightPair,
    params: &ConditionParams,
    j_max: usize,
    r_max: usize,
    rule: VerdictRule,
) -> Result<ConditionReport> {
    let p = params.p()?;
    let delta = params.delta()?;
    if !p.is_finite() {
        return Err(Error::Inadmissible("p must be finite".into()));
    }
    let per_r: Vec<(usize, f64, Witness)> = (0..=r_max)
        .into_par_iter()
        .map(|r| {
            let mut best = (f64::NEG_INFINITY, Witness::None);
            for j in 0..=j_max {
                for m in 0..=r.min(j) {
                    let v = two_weight_level_cell_logk(tree, weights, p, delta, j, r, m);
                    if v > best.0 {
                        best = (v, Witness::Levels { j, i: j + r - 2 * m, r });
                    }
                }
            }
            (r, best.0, best.1)
        })
        .collect();
    let grid = grid_entry(&[
        ("k", json!(tree.k())),
        ("j_max", json!(j_max)),
        ("r_max", json!(r_max)),
        ("u", json!(weights.u.to_string())),
        ("v", json!(weights.v.to_string())),
    ]);
    Ok(finish("levelwise", params.clone(), grid, tree.k(), per_r, rule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Exponent;

    fn params(p: f64, delta: f64) -> ConditionParams {
        ConditionParams {
            p: Some(p),
            delta: Some(delta),
            ..Default::default()
        }
    }

    #[test]
    fn kalpha_weight_is_bounded_by_one_plus_inverse_k() {
        for k in [2u32, 3] {
            let t = TreeParams::new(k).unwrap();
            for p in [Exponent::new(3, 2), 2.into(), 3.into()] {
                let w = LevelWeightPair::single(LevelWeight::power(p - Exponent::from(1)));
                let pf = *p.numer() as f64 / *p.denom() as f64;
                let rep = levelwise_condition_sup(&t, &w, &params(pf, 1.0 - pf), 40, 40, VerdictRule::default())
                    .unwrap();
                assert!(rep.empirical_sup(k) <= 1.0 + 1.0 / k as f64 + 1e-12);
                assert_eq!(rep.verdict, crate::fit::Verdict::BoundedOnGrid);
            }
        }
    }

    #[test]
    fn radius_zero_cells_are_one() {
        let t = TreeParams::new(3).unwrap();
        let w = LevelWeight::power(Exponent::new(-2, 3));
        for j in 0..10 {
            assert!(levelwise_cell_logk(&t, &w, 2.5, 0.3, j, 0, 0).abs() < 1e-12);
        }
    }

    #[test]
    fn lebesgue_weight_downward_branch() {
        let t = TreeParams::new(2).unwrap();
        let w = LevelWeight::constant();
        for j in 0..10 {
            for r in 0..10 {
                assert!(levelwise_cell_logk(&t, &w, 2.0, 0.0, j, r, 0) <= 1e-12);
            }
        }
    }
}
