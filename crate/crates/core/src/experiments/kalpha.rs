//! `w = k^{(p-1) j}` satisfies the level-wise condition with `δ = 1 - p`,
//! hence the weak `(p, p)` and strong `(q, q)` bounds for `q > p`, but not
//! strong `(p, p)`.

use crate::conditions::{levelwise_cell_logk, levelwise_condition_sup, ConditionParams};
use crate::error::{Error, Result};
use crate::fit::VerdictRule;
use crate::geometry::{TreeParams, DEFAULT_NODE_BUDGET};
use crate::logk;
use crate::operators::levelscan::{maximal_profile_logk, LogSupport};
use crate::operators::norms::{default_lambda_grid, profile_norm_pow_logk, weak_profile};
use crate::operators::{Geometry, LevelFunction};
use crate::oracle::MaterializedTree;
use crate::weights::{level_mass_logk, LevelWeight, LevelWeightPair};

use super::neg2::{kalpha_weight, neg2_partial_sum_logk};
use super::{cross_check, ResultTable};

#[derive(Debug, Clone, PartialEq)]
pub struct KalphaConfig {
    pub k: u32,
    pub p: f64,
    pub j_max: usize,
    pub r_max: usize,
    /// Test functions are `χ_{T_j}` for `j <= family_j_max`.
    pub family_j_max: usize,
    pub windows: Vec<usize>,
    /// Levels scanned past the support; repeated at twice this.
    pub horizon: usize,
    /// Strong-type exponent as a multiple of `p`.
    pub q_factor: f64,
}

impl Default for KalphaConfig {
    fn default() -> Self {
        KalphaConfig {
            k: 2,
            p: 2.0,
            j_max: 40,
            r_max: 40,
            family_j_max: 20,
            windows: vec![25, 50],
            horizon: 100,
            q_factor: 2.0,
        }
    }
}

/// `log_k ‖M∘χ_{T_j}‖_{L^q(w)} / ‖χ_{T_j}‖_{L^q(w)}` over levels `<= j + horizon`.
pub(crate) fn strong_ratio_logk(tree: &TreeParams, w: &LevelWeight, j: usize, q: f64, horizon: usize) -> f64 {
    let support = LogSupport::from_logk(vec![(j, 0.0)]);
    let prof = maximal_profile_logk(tree, &support, j + horizon, Geometry::Sphere);
    let num = profile_norm_pow_logk(tree.k(), prof.values_logk.iter().copied().enumerate(), w, q);
    (num - level_mass_logk(w, j)) / q
}

fn weak_ratio_logk(tree: &TreeParams, w: &LevelWeight, j: usize, p: f64, horizon: usize) -> Result<f64> {
    let support = LogSupport::from_logk(vec![(j, 0.0)]);
    let prof = maximal_profile_logk(tree, &support, j + horizon, Geometry::Sphere);
    let grid = default_lambda_grid(tree.k(), &prof.values_logk);
    let g = LevelFunction::<f64>::indicator(j);
    let wp = weak_profile(tree, &g, w, p, &grid, Geometry::Sphere, j + horizon)?;
    Ok(wp.sup_logk - level_mass_logk(w, j) / p)
}

pub fn run_kalpha(cfg: &KalphaConfig) -> Result<ResultTable> {
    if !(cfg.p > 1.0) {
        return Err(Error::Inadmissible(format!("need p > 1, got p = {}", cfg.p)));
    }
    let tree = TreeParams::new(cfg.k)?;
    let k = cfg.k;
    let (_, w) = kalpha_weight(cfg.p)?;
    let delta = 1.0 - cfg.p;
    let q = cfg.q_factor * cfg.p;
    let params = ConditionParams {
        p: Some(cfg.p),
        delta: Some(delta),
        q: Some(q),
        ..Default::default()
    };
    let rule = VerdictRule::default();

    let mut t = ResultTable::new("kalpha", k, cfg.p, &["section", "index", "q", "value_logk"]);
    t.meta("j_max", cfg.j_max);
    t.meta("r_max", cfg.r_max);
    t.meta("family_j_max", cfg.family_j_max);
    t.meta("windows", &cfg.windows);
    t.meta("horizon", cfg.horizon);
    t.meta("q", q);
    t.meta("weight", w.to_string());

    let rep = levelwise_condition_sup(&tree, &LevelWeightPair::single(w.clone()), &params, cfg.j_max, cfg.r_max, rule)?;
    for (r, v) in &rep.trace {
        t.push(vec!["levelwise_sup_by_radius".into(), (*r).into(), "".into(), (*v).into()]);
    }
    t.headline("levelwise_sup", rep.empirical_sup(k));
    t.headline("levelwise_verdict", rep.verdict);
    t.headline("levelwise_witness", &rep.witness);

    // level counts by enumeration
    let depth = if k == 2 { 8 } else { 5 };
    let mat = MaterializedTree::new(tree, depth, DEFAULT_NODE_BUDGET)?;
    let mut worst: f64 = 0.0;
    for j in 0..=depth {
        for r in 0..=depth - j {
            let counts = mat.level_counts(&tree.leftmost(j), r)?;
            for m in 0..=r.min(j) {
                let i = j + r - 2 * m;
                let brute = logk::from_linear(k, counts[i] as f64) + w.log_value(i)
                    - (r - m) as f64 * (cfg.p - delta)
                    - r as f64 * delta
                    - w.log_value(j);
                let fast = levelwise_cell_logk(&tree, &w, cfg.p, delta, j, r, m);
                worst = worst.max(cross_check("levelwise cell", fast, brute, 1e-9)?);
            }
        }
    }
    t.headline("oracle_residual", worst);

    let mut sums = Vec::new();
    for &l in &cfg.windows {
        let s = neg2_partial_sum_logk(&tree, &w, cfg.family_j_max.min(5), cfg.p, l);
        sums.push(s);
        t.push(vec!["strong_q_eq_p_partial_sum".into(), l.into(), cfg.p.into(), s.into()]);
    }
    if sums.len() >= 2 {
        t.headline("strong_p_growth", logk::to_linear(k, sums[sums.len() - 1] - sums[0]));
    }

    let mut strong = Vec::new();
    let mut strong_long = Vec::new();
    let mut weak = Vec::new();
    for j in 0..=cfg.family_j_max {
        let s = strong_ratio_logk(&tree, &w, j, q, cfg.horizon);
        let s2 = strong_ratio_logk(&tree, &w, j, q, 2 * cfg.horizon);
        let wk = weak_ratio_logk(&tree, &w, j, cfg.p, cfg.horizon)?;
        strong.push(s);
        strong_long.push(s2);
        weak.push(wk);
        t.push(vec!["strong_q_ratio".into(), j.into(), q.into(), s.into()]);
        t.push(vec!["weak_p_ratio".into(), j.into(), cfg.p.into(), wk.into()]);
    }
    let sup = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    t.headline("strong_q_sup_logk", sup(&strong));
    t.headline("strong_q_verdict", rule.classify(k, &strong));
    t.headline(
        "strong_q_horizon_change",
        logk::relative_change(k, sup(&strong_long), sup(&strong)),
    );
    t.headline("weak_p_sup_logk", sup(&weak));
    t.headline("weak_p_verdict", rule.classify(k, &weak));
    Ok(t)
}
