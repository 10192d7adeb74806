//! Sawyer testing: `∫_B M(χ_B σ)^p u ≲ σ(B)` over a family of balls.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::fit::{Verdict, VerdictRule};
use crate::geometry::{TreeParams, Vertex, DEFAULT_NODE_BUDGET};
use crate::operators::{maximal, Geometry, SparseFunction};
use crate::scalar::Scalar;
use crate::weights::{dual_weight, Exponent, LevelWeight, LevelWeightPair};

use super::ms::ms_level_logk;
use super::{finish, grid_entry, ConditionParams, ConditionReport, Witness};

/// Balls centred on the leftmost vertex of each depth `<= max_center_depth`
/// with radius `<= max_radius`, all inside the tree truncated at
/// `truncation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SawyerGrid {
    pub max_center_depth: usize,
    pub max_radius: usize,
    pub truncation: usize,
    pub budget: u128,
}

impl SawyerGrid {
    pub fn new(max_center_depth: usize, max_radius: usize, truncation: usize) -> Self {
        SawyerGrid {
            max_center_depth,
            max_radius,
            truncation,
            budget: DEFAULT_NODE_BUDGET,
        }
    }
}

fn value<S: Scalar>(w: &LevelWeight, k: u32, j: usize) -> Result<S> {
    w.value::<S>(k, j)
        .ok_or_else(|| Error::NotRepresentable(format!("{w} on level {j}")))
}

/// `∫_B M(χ_B σ)^p u / σ(B)` for `B = B(center, r)`, with `σ` dual to `v`.
/// The maximal function is exact at every vertex of `B`; radii leaving the
/// truncation only see `χ_B σ = 0` there, so their averages use the closed
/// sphere sizes.
#[allow(clippy::too_many_arguments)]
pub fn sawyer_ball_ratio<S: Scalar>(
    tree: &TreeParams,
    weights: &LevelWeightPair,
    p: Exponent,
    center: &Vertex,
    r: usize,
    truncation: usize,
    budget: u128,
    geometry: Geometry,
) -> Result<S> {
    if center.depth() + r > truncation {
        return Err(Error::Precondition(format!(
            "ball of radius {r} at depth {} is clipped by truncation {truncation}",
            center.depth()
        )));
    }
    let k = tree.k();
    let sigma = dual_weight(&weights.v, p)?;
    let ball = tree.enumerate_ball_with_budget(center, r, truncation, budget)?;
    let mut support = BTreeMap::new();
    let mut sigma_b = S::zero();
    for y in &ball {
        let s: S = value(&sigma, k, y.depth())?;
        sigma_b = sigma_b + s.clone();
        support.insert(y.clone(), s);
    }
    let f = SparseFunction::new(support)?;
    let mut integral = S::zero();
    for y in &ball {
        let m = maximal(&f, tree, y, geometry).value;
        let mp = m
            .pow_ratio(p)
            .ok_or_else(|| Error::NotRepresentable(format!("power {p} of M(χ_B σ)")))?;
        integral = integral + mp * value::<S>(&weights.u, k, y.depth())?;
    }
    Ok(integral / sigma_b)
}

/// Testing constant over the ball family. For one weight the ratio is at
/// most `(sup M∘σ/σ)^p` because `σ^p w = σ`; when that certificate is
/// finite and dominates the scan the verdict is bounded. Otherwise the
/// verdict follows the running sup along the centre depth.
pub fn sawyer_testing_constant(
    tree: &TreeParams,
    weights: &LevelWeightPair,
    params: &ConditionParams,
    grid: &SawyerGrid,
    geometry: Geometry,
    rule: VerdictRule,
) -> Result<ConditionReport> {
    let pe = params.p_exact()?;
    let p = params.p()?;
    let k = tree.k();
    if grid.max_center_depth + grid.max_radius > grid.truncation {
        return Err(Error::Precondition(format!(
            "balls up to depth {} do not fit truncation {}",
            grid.max_center_depth + grid.max_radius,
            grid.truncation
        )));
    }
    let cells: Vec<(usize, usize)> = (0..=grid.max_center_depth)
        .flat_map(|c| (0..=grid.max_radius).map(move |r| (c, r)))
        .collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(c, r)| {
            sawyer_ball_ratio::<f64>(
                tree,
                weights,
                pe,
                &tree.leftmost(c),
                r,
                grid.truncation,
                grid.budget,
                geometry,
            )
            .map(|v| crate::logk::from_linear(k, v))
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<(usize, f64, Witness)> = Vec::new();
    for c in 0..=grid.max_center_depth {
        let mut best = (f64::NEG_INFINITY, Witness::None);
        for (idx, &(cc, r)) in cells.iter().enumerate() {
            if cc == c && values[idx] > best.0 {
                best = (
                    values[idx],
                    Witness::Ball {
                        center: tree.leftmost(c),
                        r,
                    },
                );
            }
        }
        rows.push((c, best.0, best.1));
    }

    let mut entries = vec![
        ("k", json!(k)),
        ("max_center_depth", json!(grid.max_center_depth)),
        ("max_radius", json!(grid.max_radius)),
        ("truncation", json!(grid.truncation)),
        ("u", json!(weights.u.to_string())),
        ("v", json!(weights.v.to_string())),
    ];
    let certificate = if weights.u == weights.v {
        let sigma = LevelWeightPair::single(dual_weight(&weights.v, pe)?);
        let horizon = 4 * grid.truncation + 64;
        (0..=grid.truncation)
            .map(|j| ms_level_logk(tree, &sigma, 1.0, j, horizon).map(|(v, _)| v))
            .collect::<Result<Vec<f64>>>()
            .ok()
            .map(|v| p * v.into_iter().fold(f64::NEG_INFINITY, f64::max))
    } else {
        None
    };
    if let Some(c) = certificate {
        entries.push(("certificate_logk", json!(c)));
    }
    let mut report = finish("sawyer", params.clone(), grid_entry(&entries), k, rows, rule);
    if let Some(c) = certificate {
        if report.empirical_sup_logk <= c + 1e-9 {
            report.verdict = Verdict::BoundedOnGrid;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_traits::One;

    fn kalpha() -> LevelWeightPair {
        LevelWeightPair::single(LevelWeight::power(1.into()))
    }

    #[test]
    fn single_vertex_balls_are_exactly_one() {
        let t = TreeParams::new(2).unwrap();
        for c in 0..6 {
            let v: Rational =
                sawyer_ball_ratio(&t, &kalpha(), 2.into(), &t.leftmost(c), 0, 10, 1 << 20, Geometry::Ball)
                    .unwrap();
            assert!(v.is_one(), "depth {c}: {v}");
        }
    }

    #[test]
    fn clipped_balls_are_rejected() {
        let t = TreeParams::new(2).unwrap();
        let r = sawyer_ball_ratio::<f64>(&t, &kalpha(), 2.into(), &t.leftmost(4), 3, 6, 1 << 20, Geometry::Ball);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn same_depth_centres_agree() {
        let t = TreeParams::new(2).unwrap();
        let a = sawyer_ball_ratio::<f64>(&t, &kalpha(), 2.into(), &t.leftmost(4), 2, 8, 1 << 20, Geometry::Ball)
            .unwrap();
        let x = t.vertex(vec![1, 0, 1, 1]).unwrap();
        let b = sawyer_ball_ratio::<f64>(&t, &kalpha(), 2.into(), &x, 2, 8, 1 << 20, Geometry::Ball).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn small_family_bounded() {
        let t = TreeParams::new(2).unwrap();
        let params = ConditionParams {
            p: Some(2.0),
            ..Default::default()
        };
        let rep = sawyer_testing_constant(
            &t,
            &kalpha(),
            &params,
            &SawyerGrid::new(4, 3, 7),
            Geometry::Ball,
            VerdictRule::default(),
        )
        .unwrap();
        assert_eq!(rep.verdict, Verdict::BoundedOnGrid);
        assert!(rep.grid.contains_key("certificate_logk"));
    }
}
