//! `M_s u ≲ v` for level weights, with `M_s u = (M∘ u^s)^{1/s}`.

use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::fit::VerdictRule;
use crate::geometry::TreeParams;
use crate::logk::{self, LOG_ZERO};
use crate::weights::{LevelWeight, LevelWeightPair};

use super::{finish, grid_entry, ConditionParams, ConditionReport, Witness};

fn sphere_average_of_weight_logk(tree: &TreeParams, psi: &LevelWeight, j: usize, r: usize) -> f64 {
    let size = tree.sphere_size_logk(j, r);
    logk::sum(
        tree.k(),
        tree.sphere_slices(j, r).map(|s| {
            tree.sphere_level_count_logk(j, r, s.up_steps) - size + psi.log_value(s.target_depth())
        }),
    )
}

/// `log_k M∘ψ(j)` and its radius for the level function `ψ`. Radii past
/// `j` only reach levels `>= r - j`, so the scan stops once the tail sup of
/// `ψ` there cannot beat the running best.
fn maximal_of_weight_logk(
    tree: &TreeParams,
    psi: &LevelWeight,
    j: usize,
    horizon: usize,
) -> Result<(f64, usize)> {
    let mut best = (LOG_ZERO, 0);
    for r in 0..=j + horizon {
        let a = sphere_average_of_weight_logk(tree, psi, j, r);
        if a > best.0 || r == 0 {
            best = (a, r);
        }
        if r >= j && psi.tail_sup_log(r - j) <= best.0 {
            return Ok(best);
        }
    }
    Err(Error::Horizon {
        horizon,
        detail: format!("sphere averages of {psi} at level {j} are not dominated"),
    })
}

/// `log_k M_s u(j) / v(j)` and the maximizing radius.
pub fn ms_level_logk(
    tree: &TreeParams,
    weights: &LevelWeightPair,
    s: f64,
    j: usize,
    horizon: usize,
) -> Result<(f64, usize)> {
    let psi = weights.u.powered_f64(s);
    let (m, r) = maximal_of_weight_logk(tree, &psi, j, horizon)?;
    Ok((m / s - weights.v.log_value(j), r))
}

/// `sup_{j <= j_max} M_s u(j) / v(j)`. Each level is certified within
/// `horizon` radii past `j`; growing weights have no certificate.
pub fn ms_bound(
    tree: &TreeParams,
    weights: &LevelWeightPair,
    params: &ConditionParams,
    j_max: usize,
    horizon: usize,
    rule: VerdictRule,
) -> Result<ConditionReport> {
    let s = params.s()?;
    let rows: Vec<(usize, f64, Witness)> = (0..=j_max)
        .into_par_iter()
        .map(|j| {
            ms_level_logk(tree, weights, s, j, horizon).map(|(v, r)| (j, v, Witness::Radius { j, r }))
        })
        .collect::<Result<_>>()?;
    let grid = grid_entry(&[
        ("k", json!(tree.k())),
        ("j_max", json!(j_max)),
        ("horizon", json!(horizon)),
        ("u", json!(weights.u.to_string())),
        ("v", json!(weights.v.to_string())),
    ]);
    Ok(finish("ms", params.clone(), grid, tree.k(), rows, rule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::Verdict;
    use crate::operators::{Geometry, LevelFunction};
    use crate::weights::Exponent;

    fn params(s: f64) -> ConditionParams {
        ConditionParams {
            s: Some(s),
            ..Default::default()
        }
    }

    #[test]
    fn constant_weight_gives_one() {
        let t = TreeParams::new(2).unwrap();
        let w = LevelWeightPair::single(LevelWeight::constant());
        let rep = ms_bound(&t, &w, &params(1.7), 50, 100, VerdictRule::doubling()).unwrap();
        assert!(rep.empirical_sup_logk.abs() < 1e-12);
    }

    #[test]
    fn growing_weight_has_no_certificate() {
        let t = TreeParams::new(2).unwrap();
        let w = LevelWeightPair::single(LevelWeight::power(1.into()));
        assert!(matches!(
            ms_bound(&t, &w, &params(1.5), 5, 50, VerdictRule::doubling()),
            Err(Error::Horizon { .. })
        ));
    }

    #[test]
    fn decaying_weight_bounded() {
        let t = TreeParams::new(2).unwrap();
        let w = LevelWeightPair::single(LevelWeight::power(Exponent::new(-3, 4)));
        let rep = ms_bound(&t, &w, &params(1.2), 200, 400, VerdictRule::doubling()).unwrap();
        assert_eq!(rep.verdict, Verdict::BoundedOnGrid);
        assert!(rep.empirical_sup(2) >= 1.0);
    }

    #[test]
    fn matches_truncated_profile() {
        // against the exact maximal function of the truncated weight
        let t = TreeParams::new(3).unwrap();
        let w = LevelWeight::power(Exponent::new(-1, 2));
        let depth = 30;
        let g = LevelFunction::new((0..=depth).map(|i| 3f64.powf(-0.5 * i as f64)).collect()).unwrap();
        for j in 0..6 {
            let (v, _) = ms_level_logk(&t, &LevelWeightPair::single(w.clone()), 1.0, j, 200).unwrap();
            let m = g.maximal_at(&t, j, Geometry::Sphere).value;
            let want = logk::from_linear(3, m) - w.log_value(j);
            assert!((v - want).abs() < 1e-9, "j={j} {v} {want}");
        }
    }
}
