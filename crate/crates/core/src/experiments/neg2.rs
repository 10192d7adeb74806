//! `w = k^{(p-1) j}`, `f = χ_{T_j}`: `‖f‖^p = k^{pj}` while
//! `Σ_{i>j} ∫_{T_i} (M∘f)^p w` grows linearly in the number of levels, and
//! the weak functional stays finite.

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::geometry::TreeParams;
use crate::logk;
use crate::operators::levelscan::{maximal_profile_logk, LogSupport};
use crate::operators::norms::{default_lambda_grid, weak_profile};
use crate::operators::{Geometry, LevelFunction};
use crate::scalar::Scalar;
use crate::weights::{exponent_from_f64, level_mass_logk, Exponent, LevelWeight};
use crate::Rational;

use super::{cross_check, ResultTable};

#[derive(Debug, Clone, PartialEq)]
pub struct Neg2Config {
    pub k: u32,
    pub p: f64,
    pub j: usize,
    pub windows: Vec<usize>,
    /// Level horizon of the weak functional; it is also run at twice this.
    pub horizon: usize,
}

impl Default for Neg2Config {
    fn default() -> Self {
        Neg2Config {
            k: 2,
            p: 2.0,
            j: 5,
            windows: vec![25, 50],
            horizon: 200,
        }
    }
}

/// `log_k Σ_{i=j+1}^{j+L} ∫_{T_i} (M∘χ_{T_j})^q w`.
pub fn neg2_partial_sum_logk(tree: &TreeParams, w: &LevelWeight, j: usize, q: f64, window: usize) -> f64 {
    let k = tree.k();
    let support = LogSupport::from_logk(vec![(j, 0.0)]);
    let prof = maximal_profile_logk(tree, &support, j + window, Geometry::Sphere);
    logk::sum(
        k,
        (j + 1..=j + window).map(|i| level_mass_logk(w, i) + q * prof.values_logk[i]),
    )
}

pub(crate) fn kalpha_weight(p: f64) -> Result<(Exponent, LevelWeight)> {
    let pe = exponent_from_f64(p)
        .ok_or_else(|| Error::Inadmissible(format!("p = {p} has no exact rational form")))?;
    Ok((pe, LevelWeight::power(pe - Exponent::from(1))))
}

pub fn run_neg2(cfg: &Neg2Config) -> Result<ResultTable> {
    if !(cfg.p > 1.0) {
        return Err(Error::Inadmissible(format!("need p > 1, got p = {}", cfg.p)));
    }
    let tree = TreeParams::new(cfg.k)?;
    let k = cfg.k;
    let (_, w) = kalpha_weight(cfg.p)?;
    let j = cfg.j;

    let mut t = ResultTable::new("neg2", k, cfg.p, &["quantity", "window", "value_logk", "exact"]);
    t.meta("j", j);
    t.meta("windows", &cfg.windows);
    t.meta("horizon", cfg.horizon);
    t.meta("weight", w.to_string());

    // ‖χ_{T_j}‖^p = |T_j| φ(j)
    let norm_logk = level_mass_logk(&w, j);
    let exact = w
        .value::<Rational>(k, j)
        .map(|phi| Rational::from_count(&tree.level_size(j)) * phi);
    let exact_text = exact.as_ref().map(|e| e.to_string()).unwrap_or_default();
    if let Some(e) = &exact {
        let lin = e.to_f64().unwrap_or(f64::NAN);
        cross_check("norm", logk::to_linear(k, norm_logk), lin, 1e-12)?;
    }
    t.push(vec!["norm_pow".into(), "".into(), norm_logk.into(), exact_text.clone().into()]);
    t.headline("norm_pow_logk", norm_logk);
    t.headline("norm_pow_exact", exact_text);

    // maximal profile against the exact rational path on the first levels
    let support = LogSupport::from_logk(vec![(j, 0.0)]);
    let fast = maximal_profile_logk(&tree, &support, j + 8, Geometry::Sphere);
    let g = LevelFunction::<Rational>::indicator(j);
    let mut worst: f64 = 0.0;
    for i in 0..=j + 8 {
        let e = g.maximal_at(&tree, i, Geometry::Sphere).value.as_f64();
        worst = worst.max(cross_check(
            "maximal profile",
            logk::to_linear(k, fast.values_logk[i]),
            e,
            1e-12,
        )?);
    }
    t.headline("profile_residual", worst);

    let mut sums = Vec::new();
    for &l in &cfg.windows {
        let s = neg2_partial_sum_logk(&tree, &w, j, cfg.p, l);
        sums.push(s);
        t.push(vec!["strong_partial_sum".into(), l.into(), s.into(), "".into()]);
    }
    if sums.len() >= 2 {
        let growth = logk::to_linear(k, sums[sums.len() - 1] - sums[0]);
        t.headline("partial_sum_growth", growth);
    }

    let mut weak = Vec::new();
    for h in [cfg.horizon, 2 * cfg.horizon] {
        let g = LevelFunction::<f64>::indicator(j);
        let prof = maximal_profile_logk(&tree, &support, h, Geometry::Sphere);
        let grid = default_lambda_grid(k, &prof.values_logk);
        let wp = weak_profile(&tree, &g, &w, cfg.p, &grid, Geometry::Sphere, h)?;
        let v = wp.sup_pow_logk();
        weak.push(v);
        t.push(vec!["weak_functional".into(), h.into(), v.into(), "".into()]);
        t.push(vec![
            "weak_functional_grid".into(),
            h.into(),
            (cfg.p * wp.grid_sup_logk).into(),
            "".into(),
        ]);
    }
    let change = logk::relative_change(k, weak[1], weak[0]);
    t.headline("weak_horizon_change", change);
    t.headline("weak_stabilized", change < 0.01);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_norm_row() {
        let t = run_neg2(&Neg2Config::default()).unwrap();
        assert_eq!(t.summary["norm_pow_exact"], "1024");
        let csv = t.to_csv().unwrap();
        assert!(csv.contains("norm_pow,,10,1024"), "{csv}");
        let g = t.summary_f64("partial_sum_growth").unwrap();
        assert!((1.7..=2.3).contains(&g), "{g}");
        assert!(t.summary_f64("weak_horizon_change").unwrap() < 0.01);
    }
}
