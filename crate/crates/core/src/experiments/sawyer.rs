//! `w = k^{(p-1) j}`: the Sawyer testing condition holds while strong
//! `(p, p)` fails.

use crate::conditions::{sawyer_ball_ratio, sawyer_testing_constant, ConditionParams, SawyerGrid};
use crate::error::Result;
use crate::fit::{Verdict, VerdictRule};
use crate::geometry::{TreeParams, Vertex, DEFAULT_NODE_BUDGET};
use crate::logk;
use crate::operators::Geometry;
use crate::oracle::MaterializedTree;
use crate::scalar::Scalar;
use crate::weights::{dual_weight, LevelWeightPair};
use crate::Rational;

use super::neg2::{kalpha_weight, neg2_partial_sum_logk};
use super::{cross_check, ResultTable};

#[derive(Debug, Clone, PartialEq)]
pub struct SawyerConfig {
    pub k: u32,
    pub p: f64,
    pub grid: SawyerGrid,
    /// Level of `χ_{T_j}` in the strong-type comparison.
    pub j: usize,
    pub windows: Vec<usize>,
}

impl Default for SawyerConfig {
    fn default() -> Self {
        SawyerConfig {
            k: 2,
            p: 2.0,
            grid: SawyerGrid::new(8, 6, 14),
            j: 5,
            windows: vec![25, 50],
        }
    }
}

fn rightmost(tree: &TreeParams, depth: usize) -> Vertex {
    let mut v = tree.root();
    for _ in 0..depth {
        v = v.child(tree.k() - 1);
    }
    v
}

pub fn run_sawyer_vs_strong(cfg: &SawyerConfig) -> Result<ResultTable> {
    let tree = TreeParams::new(cfg.k)?;
    let k = cfg.k;
    let (pe, w) = kalpha_weight(cfg.p)?;
    let pair = LevelWeightPair::single(w.clone());
    let params = ConditionParams {
        p: Some(cfg.p),
        ..Default::default()
    };
    let g = cfg.grid;

    let mut t = ResultTable::new(
        "sawyer",
        k,
        cfg.p,
        &["section", "center_depth", "radius", "value_logk"],
    );
    t.meta("max_center_depth", g.max_center_depth);
    t.meta("max_radius", g.max_radius);
    t.meta("truncation", g.truncation);
    t.meta("j", cfg.j);
    t.meta("windows", &cfg.windows);
    t.meta("weight", w.to_string());

    let rep = sawyer_testing_constant(&tree, &pair, &params, &g, Geometry::Ball, VerdictRule::default())?;
    for (c, v) in &rep.trace {
        t.push(vec!["testing_sup_by_center".into(), (*c).into(), "".into(), (*v).into()]);
    }

    // single-vertex balls, exactly when the weight is rational
    let mut single_exact = true;
    for c in 0..=g.max_center_depth {
        let x = tree.leftmost(c);
        let v = match sawyer_ball_ratio::<Rational>(&tree, &pair, pe, &x, 0, g.truncation, g.budget, Geometry::Ball) {
            Ok(q) => {
                single_exact &= q == Rational::from_integer(1.into());
                q.as_f64()
            }
            Err(_) => {
                single_exact = false;
                sawyer_ball_ratio::<f64>(&tree, &pair, pe, &x, 0, g.truncation, g.budget, Geometry::Ball)?
            }
        };
        t.push(vec!["single_vertex_ball".into(), c.into(), 0usize.into(), logk::from_linear(k, v).into()]);
    }
    t.headline("single_vertex_exactly_one", single_exact);

    // the ratio depends only on the centre depth
    let mut reroot: f64 = 0.0;
    for c in 1..=g.max_center_depth {
        let r = g.max_radius.min(2);
        let a = sawyer_ball_ratio::<f64>(&tree, &pair, pe, &tree.leftmost(c), r, g.truncation, g.budget, Geometry::Ball)?;
        let b = sawyer_ball_ratio::<f64>(&tree, &pair, pe, &rightmost(&tree, c), r, g.truncation, g.budget, Geometry::Ball)?;
        reroot = reroot.max(cross_check("re-rooted centre", a, b, 1e-9)?);
    }
    t.headline("reroot_residual", reroot);

    // one small ball through breadth-first search
    let sigma = dual_weight(&w, pe)?;
    let mat = MaterializedTree::new(tree, 6, DEFAULT_NODE_BUDGET)?;
    let x = tree.leftmost(1);
    let ball: Vec<Vertex> = mat
        .vertices()
        .iter()
        .filter(|y| mat.distance(&x, y).map(|d| d <= 1).unwrap_or(false))
        .cloned()
        .collect();
    let f = |y: &Vertex| {
        if ball.contains(y) {
            logk::to_linear(k, sigma.log_value(y.depth()))
        } else {
            0.0
        }
    };
    let mut integral = 0.0;
    for y in &ball {
        let m = mat.maximal(&f, y, 6 - y.depth(), Geometry::Ball)?.value;
        integral += m.powf(cfg.p) * logk::to_linear(k, w.log_value(y.depth()));
    }
    let sigma_b: f64 = ball.iter().map(f).sum();
    let brute = integral / sigma_b;
    let fast = sawyer_ball_ratio::<f64>(&tree, &pair, pe, &x, 1, g.truncation.max(2), g.budget, Geometry::Ball)?;
    t.headline("oracle_residual", cross_check("small ball", fast, brute, 1e-9)?);

    let mut sums = Vec::new();
    for &l in &cfg.windows {
        let s = neg2_partial_sum_logk(&tree, &w, cfg.j, cfg.p, l);
        sums.push(s);
        t.push(vec!["strong_partial_sum".into(), l.into(), "".into(), s.into()]);
    }
    let growth = if sums.len() >= 2 {
        logk::to_linear(k, sums[sums.len() - 1] - sums[0])
    } else {
        f64::NAN
    };
    t.headline("testing_sup_logk", rep.empirical_sup_logk);
    t.headline("testing_verdict", rep.verdict);
    if let Some(c) = rep.grid.get("certificate_logk") {
        t.headline("testing_certificate_logk", c);
    }
    t.headline("strong_growth", growth);
    t.headline(
        "testing_bounded_strong_growing",
        rep.verdict == Verdict::BoundedOnGrid && growth > 1.5,
    );
    Ok(t)
}
