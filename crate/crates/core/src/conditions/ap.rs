//! `A_p` constants over spheres and balls for level weights.

use rayon::prelude::*;
use serde_json::json;

use crate::error::Result;
use crate::fit::VerdictRule;
use crate::geometry::TreeParams;
use crate::logk;
use crate::operators::Geometry;
use crate::weights::{dual_weight, sphere_weight_logk, LevelWeight, LevelWeightPair};

use super::{finish, grid_entry, ConditionParams, ConditionReport, Witness};

/// `log_k` of `avg(u) · avg(σ)^{p-1}` over `S(x, r)` or `B(x, r)` for every
/// `r <= r_max`, `x` at depth `j`, with `σ` the dual of `v`.
fn ap_row_logk(
    tree: &TreeParams,
    u: &LevelWeight,
    sigma: &LevelWeight,
    p: f64,
    geometry: Geometry,
    j: usize,
    r_max: usize,
) -> Vec<f64> {
    let k = tree.k();
    let mut out = Vec::with_capacity(r_max + 1);
    let (mut bu, mut bs, mut bn) = (logk::LOG_ZERO, logk::LOG_ZERO, logk::LOG_ZERO);
    for r in 0..=r_max {
        let su = sphere_weight_logk(tree, u, j, r);
        let ss = sphere_weight_logk(tree, sigma, j, r);
        let n = tree.sphere_size_logk(j, r);
        let (wu, ws, size) = match geometry {
            Geometry::Sphere => (su, ss, n),
            Geometry::Ball => {
                bu = logk::add(k, bu, su);
                bs = logk::add(k, bs, ss);
                bn = logk::add(k, bn, n);
                (bu, bs, bn)
            }
        };
        out.push((wu - size) + (p - 1.0) * (ws - size));
    }
    out
}

/// One `A_p` cell, `log_k Q(j, r)`.
pub fn ap_cell_logk(
    tree: &TreeParams,
    weights: &LevelWeightPair,
    params: &ConditionParams,
    geometry: Geometry,
    j: usize,
    r: usize,
) -> Result<f64> {
    let p = params.p_exact()?;
    let sigma = dual_weight(&weights.v, p)?;
    Ok(ap_row_logk(tree, &weights.u, &sigma, params.p()?, geometry, j, r)[r])
}

/// `sup_{j, r} avg(u) avg(σ_v)^{p-1}`; the verdict follows the running sup
/// along `j`.
pub fn ap_constant(
    tree: &TreeParams,
    weights: &LevelWeightPair,
    params: &ConditionParams,
    geometry: Geometry,
    j_max: usize,
    r_max: usize,
    rule: VerdictRule,
) -> Result<ConditionReport> {
    let pe = params.p_exact()?;
    let p = params.p()?;
    let sigma = dual_weight(&weights.v, pe)?;
    let per_j: Vec<(usize, f64, Witness)> = (0..=j_max)
        .into_par_iter()
        .map(|j| {
            let row = ap_row_logk(tree, &weights.u, &sigma, p, geometry, j, r_max);
            let mut best = (row[0], 0);
            for (r, v) in row.into_iter().enumerate() {
                if v > best.0 {
                    best = (v, r);
                }
            }
            (j, best.0, Witness::Radius { j, r: best.1 })
        })
        .collect();
    let name = match geometry {
        Geometry::Sphere => "ap-sphere",
        Geometry::Ball => "ap-ball",
    };
    let grid = grid_entry(&[
        ("k", json!(tree.k())),
        ("j_max", json!(j_max)),
        ("r_max", json!(r_max)),
        ("u", json!(weights.u.to_string())),
        ("v", json!(weights.v.to_string())),
    ]);
    Ok(finish(name, params.clone(), grid, tree.k(), per_j, rule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::{tail_slope, Verdict};
    use crate::weights::{conjugate_exponent, Exponent};

    fn params(p: f64) -> ConditionParams {
        ConditionParams {
            p: Some(p),
            ..Default::default()
        }
    }

    #[test]
    fn lebesgue_weight_is_ap_with_constant_one() {
        let t = TreeParams::new(3).unwrap();
        let w = LevelWeightPair::single(LevelWeight::constant());
        for g in [Geometry::Sphere, Geometry::Ball] {
            let rep = ap_constant(&t, &w, &params(2.5), g, 20, 20, VerdictRule::default()).unwrap();
            assert!(rep.empirical_sup_logk.abs() < 1e-12);
            assert_eq!(rep.verdict, Verdict::BoundedOnGrid);
        }
    }

    #[test]
    fn diagonal_growth_rate() {
        let t = TreeParams::new(2).unwrap();
        let w = LevelWeightPair::single(LevelWeight::power(Exponent::new(-3, 4)));
        let js: Vec<f64> = (10..=30).map(|j| j as f64).collect();
        let q: Vec<f64> = (10..=30)
            .map(|j| ap_cell_logk(&t, &w, &params(2.0), Geometry::Sphere, j, j).unwrap())
            .collect();
        let s = tail_slope(&js, &q).unwrap();
        assert!((s - 0.5).abs() < 0.1, "{s}");
    }

    #[test]
    fn dual_symmetry() {
        // Q_{p'}(σ) = Q_p(w)^{1/(p-1)}
        let t = TreeParams::new(2).unwrap();
        let p = Exponent::new(5, 2);
        let pp = conjugate_exponent(p).unwrap();
        let w = LevelWeight::power(Exponent::new(-1, 3));
        let sigma = dual_weight(&w, p).unwrap();
        let pf = 2.5;
        let ppf = *pp.numer() as f64 / *pp.denom() as f64;
        for g in [Geometry::Sphere, Geometry::Ball] {
            for j in 0..8 {
                for r in 0..8 {
                    let a = ap_cell_logk(&t, &LevelWeightPair::single(w.clone()), &params(pf), g, j, r)
                        .unwrap();
                    let b = ap_cell_logk(&t, &LevelWeightPair::single(sigma.clone()), &params(ppf), g, j, r)
                        .unwrap();
                    assert!((b - a / (pf - 1.0)).abs() < 1e-9);
                }
            }
        }
    }
}
