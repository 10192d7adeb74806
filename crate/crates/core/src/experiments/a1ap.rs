//! Weights with `M_s w ≲ w`: the sufficient condition with
//! `β = s'/(s'+1)`, `α = s'p/(s'+1)`, the convergent series
//! `Σ_r ‖A_r∘ f‖`, and the strong bound for the dual weight.

use serde_json::json;

use crate::conditions::{extremal_search, ms_bound, ConditionParams, ExtremalConfig, SuffParams};
use crate::error::{Error, Result};
use crate::fit::VerdictRule;
use crate::geometry::{TreeParams, DEFAULT_NODE_BUDGET};
use crate::logk;
use crate::operators::norms::{profile_norm_pow_logk, series_norm_sum};
use crate::operators::{LevelFunction, TestFunction};
use crate::weights::{
    conjugate_exponent, dual_weight, LevelWeight, LevelWeightPair, Weight, WeightPair,
};

use super::kalpha::strong_ratio_logk;
use super::{cross_check, ResultTable};

#[derive(Debug, Clone, PartialEq)]
pub struct A1ApConfig {
    pub k: u32,
    pub p: f64,
    pub weight: LevelWeight,
    pub s: f64,
    pub ms_j_max: usize,
    pub ms_horizon: usize,
    /// The series is evaluated for `f = χ_{T_{f_level}}`.
    pub f_level: usize,
    pub series_r_max: usize,
    pub search: ExtremalConfig,
    pub family_j_max: usize,
    pub horizon: usize,
}

impl Default for A1ApConfig {
    fn default() -> Self {
        A1ApConfig {
            k: 2,
            p: 2.0,
            weight: LevelWeight::power(crate::weights::Exponent::new(-3, 4)),
            s: 1.2,
            ms_j_max: 200,
            ms_horizon: 400,
            f_level: 3,
            series_r_max: 60,
            search: ExtremalConfig::default(),
            family_j_max: 20,
            horizon: 100,
        }
    }
}

pub fn run_a1ap(cfg: &A1ApConfig) -> Result<ResultTable> {
    if !(cfg.s > 1.0) {
        return Err(Error::Inadmissible(format!("need s > 1, got s = {}", cfg.s)));
    }
    let tree = TreeParams::new(cfg.k)?;
    let k = cfg.k;
    let p = cfg.p;
    let w = cfg.weight.clone();
    let sp_ = cfg.s / (cfg.s - 1.0);
    let beta = sp_ / (sp_ + 1.0);
    let alpha = sp_ * p / (sp_ + 1.0);
    let params = ConditionParams {
        p: Some(p),
        s: Some(cfg.s),
        beta: Some(beta),
        alpha: Some(alpha),
        ..Default::default()
    };
    let sp: SuffParams = params.suff()?;
    let pe = params.p_exact()?;

    let mut t = ResultTable::new("a1ap", k, p, &["section", "index", "value_logk"]);
    t.meta("weight", w.to_string());
    t.meta("s", cfg.s);
    t.meta("ms_j_max", cfg.ms_j_max);
    t.meta("ms_horizon", cfg.ms_horizon);
    t.meta("f_level", cfg.f_level);
    t.meta("series_r_max", cfg.series_r_max);
    t.meta("search_depth", cfg.search.depth);
    t.meta("search_r_max", cfg.search.r_max);
    t.meta("seed", cfg.search.seed);
    t.meta("family_j_max", cfg.family_j_max);
    t.meta("horizon", cfg.horizon);
    t.headline("beta", beta);
    t.headline("alpha", alpha);
    t.headline("weak_exponent", beta / alpha * p);

    let pair = LevelWeightPair::single(w.clone());
    let ms = ms_bound(&tree, &pair, &params, cfg.ms_j_max, cfg.ms_horizon, VerdictRule::doubling())?;
    for (j, v) in &ms.trace {
        t.push(vec!["ms_ratio".into(), (*j).into(), (*v).into()]);
    }
    t.headline("ms_sup_logk", ms.empirical_sup_logk);
    t.headline("ms_verdict", ms.verdict);

    let search = extremal_search(
        &tree,
        &WeightPair::single(Weight::level(w.clone())),
        sp,
        &params,
        &cfg.search,
        VerdictRule::default(),
    )?;
    for (r, v) in &search.trace {
        t.push(vec!["suffcond_sup_by_radius".into(), (*r).into(), (*v).into()]);
    }
    t.headline("suffcond_sup_logk", search.empirical_sup_logk);
    t.headline("suffcond_verdict", search.verdict);

    let g = LevelFunction::<f64>::indicator(cfg.f_level);
    let series = series_norm_sum(&tree, &g, &w, p, cfg.series_r_max, 0.01)?;
    for (r, v) in series.partial_sums_logk.iter().enumerate() {
        t.push(vec!["series_partial_sum".into(), r.into(), (*v).into()]);
    }
    t.headline("series_tail_increment", series.tail_increment);
    t.headline("series_converged", series.converged);

    // series terms through distances on the explicit support
    let sparse = g.to_sparse(&tree, DEFAULT_NODE_BUDGET)?;
    let mut worst: f64 = 0.0;
    for r in 0..=4.min(cfg.series_r_max) {
        let levels = (0..=r + cfg.f_level).map(|i| {
            let a = sparse.sphere_average(&tree, &tree.leftmost(i), r);
            (i, logk::from_linear(k, a))
        });
        let term = profile_norm_pow_logk(k, levels, &w, p) / p;
        worst = worst.max(cross_check("series term", logk::to_linear(k, series.terms_logk[r]), logk::to_linear(k, term), 1e-9)?);
    }
    t.headline("oracle_residual", worst);

    let sigma = dual_weight(&w, pe)?;
    let pp = conjugate_exponent(pe)?;
    let ppf = *pp.numer() as f64 / *pp.denom() as f64;
    let mut dual = Vec::new();
    for j in 0..=cfg.family_j_max {
        let v = strong_ratio_logk(&tree, &sigma, j, ppf, cfg.horizon);
        dual.push(v);
        t.push(vec!["dual_strong_ratio".into(), j.into(), v.into()]);
    }
    let rule = VerdictRule::default();
    t.headline("dual_weight", sigma.to_string());
    t.headline("dual_exponent", ppf);
    t.headline("dual_strong_sup_logk", dual.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    t.headline("dual_strong_verdict", rule.classify(k, &dual));
    t.headline(
        "all_bounded",
        json!(
            ms.verdict == crate::fit::Verdict::BoundedOnGrid
                && search.verdict == crate::fit::Verdict::BoundedOnGrid
                && series.converged
                && rule.classify(k, &dual) == crate::fit::Verdict::BoundedOnGrid
        ),
    );
    Ok(t)
}
