//! `w = k^{-δ j}`: the sphere `A_p` constant blows up along `r = j` at rate
//! `k^{j(2δ-1)}`, while `M_s w ≲ w` holds for `1 < s < 1/δ`.

use crate::conditions::{ap_cell_logk, ms_bound, ConditionParams};
use crate::error::{Error, Result};
use crate::fit::{tail_slope, VerdictRule};
use crate::geometry::{TreeParams, DEFAULT_NODE_BUDGET};
use crate::logk;
use crate::operators::Geometry;
use crate::oracle::MaterializedTree;
use crate::weights::{dual_weight, exponent_from_f64, LevelWeight, LevelWeightPair};

use super::{cross_check, ResultTable};

#[derive(Debug, Clone, PartialEq)]
pub struct ThmNeg1Config {
    pub k: u32,
    pub delta: f64,
    pub p: f64,
    pub j_max: usize,
    pub s: f64,
    pub ms_j_max: usize,
    pub ms_horizon: usize,
}

impl Default for ThmNeg1Config {
    fn default() -> Self {
        ThmNeg1Config {
            k: 2,
            delta: 0.75,
            p: 2.0,
            j_max: 30,
            s: 1.2,
            ms_j_max: 200,
            ms_horizon: 400,
        }
    }
}

/// Brute-force sphere `A_p` product for small `(j, r)`.
fn oracle_q_logk(tree: &TreeParams, w: &LevelWeight, sigma: &LevelWeight, p: f64, j: usize, r: usize) -> Result<f64> {
    let k = tree.k();
    let mat = MaterializedTree::new(*tree, j + r, DEFAULT_NODE_BUDGET)?;
    let x = tree.leftmost(j);
    let (aw, _) = mat.averages(&|v| logk::to_linear(k, w.log_value(v.depth())), &x, r)?;
    let (asg, _) = mat.averages(&|v| logk::to_linear(k, sigma.log_value(v.depth())), &x, r)?;
    Ok(logk::from_linear(k, aw[r]) + (p - 1.0) * logk::from_linear(k, asg[r]))
}

pub fn run_thmneg1(cfg: &ThmNeg1Config) -> Result<ResultTable> {
    if !(cfg.delta > 0.5 && cfg.delta < 1.0) {
        return Err(Error::Inadmissible(format!(
            "need 1/2 < delta < 1, got delta = {}",
            cfg.delta
        )));
    }
    if !(cfg.s > 1.0 && cfg.s * cfg.delta < 1.0) {
        return Err(Error::Inadmissible(format!(
            "need 1 < s < 1/delta, got s = {}",
            cfg.s
        )));
    }
    let tree = TreeParams::new(cfg.k)?;
    let a = exponent_from_f64(-cfg.delta)
        .ok_or_else(|| Error::Inadmissible(format!("delta = {} is not rational", cfg.delta)))?;
    let w = LevelWeight::power(a);
    let pair = LevelWeightPair::single(w.clone());
    let params = ConditionParams {
        p: Some(cfg.p),
        delta: Some(cfg.delta),
        s: Some(cfg.s),
        ..Default::default()
    };

    let mut t = ResultTable::new("thmneg1", cfg.k, cfg.p, &["section", "j", "r", "value_logk"]);
    t.meta("delta", cfg.delta);
    t.meta("j_max", cfg.j_max);
    t.meta("s", cfg.s);
    t.meta("ms_j_max", cfg.ms_j_max);
    t.meta("ms_horizon", cfg.ms_horizon);
    t.meta("weight", w.to_string());

    let mut js = Vec::new();
    let mut diag = Vec::new();
    for j in 0..=cfg.j_max {
        let q = ap_cell_logk(&tree, &pair, &params, Geometry::Sphere, j, j)?;
        js.push(j as f64);
        diag.push(q);
        t.push(vec!["ap_sphere_diagonal".into(), j.into(), j.into(), q.into()]);
    }
    for j in 0..=cfg.j_max {
        let q = ap_cell_logk(&tree, &pair, &params, Geometry::Sphere, j, 0)?;
        t.push(vec!["ap_sphere_radius0".into(), j.into(), 0usize.into(), q.into()]);
    }
    let slope = tail_slope(&js, &diag).unwrap_or(f64::NAN);
    t.headline("diagonal_slope", slope);
    t.headline("diagonal_slope_target", 2.0 * cfg.delta - 1.0);

    let sigma = dual_weight(&w, params.p_exact()?)?;
    let mut worst: f64 = 0.0;
    for j in 0..=4.min(cfg.j_max) {
        let o = oracle_q_logk(&tree, &w, &sigma, cfg.p, j, j)?;
        worst = worst.max(cross_check("sphere A_p against enumeration", diag[j], o, 1e-9)?);
    }
    t.headline("oracle_residual", worst);

    let ms = ms_bound(&tree, &pair, &params, cfg.ms_j_max, cfg.ms_horizon, VerdictRule::doubling())?;
    for (j, v) in &ms.trace {
        t.push(vec!["ms_ratio".into(), (*j).into(), "".into(), (*v).into()]);
    }
    let running: Vec<f64> = crate::fit::running_sup(&ms.trace.iter().map(|x| x.1).collect::<Vec<_>>());
    t.headline("ms_sup_logk", ms.empirical_sup_logk);
    t.headline("ms_verdict", ms.verdict);
    t.headline("ms_doubling_increase", VerdictRule::doubling().increase(cfg.k, &running));
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_zero_rows_are_one() {
        let t = run_thmneg1(&ThmNeg1Config { ms_j_max: 20, ms_horizon: 60, ..Default::default() }).unwrap();
        for row in t.section("ap_sphere_radius0") {
            assert_eq!(row[3], super::super::Cell::Real(0.0));
        }
    }

    #[test]
    fn near_boundary_slope_is_small() {
        let cfg = ThmNeg1Config {
            delta: 0.55,
            s: 1.5,
            ms_j_max: 20,
            ms_horizon: 60,
            ..Default::default()
        };
        let t = run_thmneg1(&cfg).unwrap();
        let s = t.summary_f64("diagonal_slope").unwrap();
        assert!((s - 0.1).abs() < 0.05, "{s}");
    }
}
