//! Numerical checkers for the weight conditions: pair-measure conditions,
//! the level-wise condition, `A_p` over spheres and balls, `M_s w ≲ w`,
//! Sawyer testing, and the pairing bound with its `ρ` optimization.
//!
//! Every checker returns a [`ConditionReport`] holding the empirical sup
//! over a declared grid together with a witness that reproduces it.

mod ap;
mod corsuff;
mod extremal;
mod levelwise;
mod ms;
mod pair;
mod sawyer;
mod sum_levels;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fit::{Verdict, VerdictRule};
use crate::geometry::Vertex;
use crate::logk;
use crate::weights::{exponent_from_f64, Exponent};

pub use ap::{ap_cell_logk, ap_constant};
pub use corsuff::{
    corsuff_pairing_bound, pairing_constant, rho_objective, rho_optimize, PairingSample,
    RhoOptimum,
};
pub use extremal::{extremal_search, extremal_search_seeds, ExtremalConfig};
pub use levelwise::{levelwise_cell_logk, levelwise_condition_sup, two_weight_level_cell_logk};
pub use ms::{ms_bound, ms_level_logk};
pub use pair::{
    pair_measure, pair_measure_exact, pair_measure_levels, pair_measure_levels_logk,
    pair_measure_via_averages, suffcond_levels_sup, suffcond_ratio_levels_logk, suffcond_ratio_logk, SuffParams,
};
pub use sawyer::{sawyer_ball_ratio, sawyer_testing_constant, SawyerGrid};
pub use sum_levels::{
    calibrate, random_instance, sum_levels_sides, SumLevelsInstance, SumLevelsSides,
};

/// Parameters shared by the checkers; each checker reads the fields it
/// needs and validates them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConditionParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

fn missing(name: &str) -> Error {
    Error::Inadmissible(format!("parameter {name} is required"))
}

impl ConditionParams {
    pub fn p(&self) -> Result<f64> {
        let p = self.p.ok_or_else(|| missing("p"))?;
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Inadmissible(format!("need p > 1, got p = {p}")));
        }
        Ok(p)
    }

    /// `p` as an exact exponent, for dual weights.
    pub fn p_exact(&self) -> Result<Exponent> {
        let p = self.p()?;
        exponent_from_f64(p)
            .ok_or_else(|| Error::Inadmissible(format!("p = {p} has no exact rational form")))
    }

    pub fn q(&self) -> Result<f64> {
        let p = self.p()?;
        let q = self.q.ok_or_else(|| missing("q"))?;
        if !(q >= p) {
            return Err(Error::Inadmissible(format!("need q >= p, got q = {q} < p = {p}")));
        }
        Ok(q)
    }

    pub fn delta(&self) -> Result<f64> {
        let d = self.delta.ok_or_else(|| missing("delta"))?;
        if !(d < 1.0) {
            return Err(Error::Inadmissible(format!("need delta < 1, got delta = {d}")));
        }
        Ok(d)
    }

    pub fn s(&self) -> Result<f64> {
        let s = self.s.ok_or_else(|| missing("s"))?;
        if !(s >= 1.0) || !s.is_finite() {
            return Err(Error::Inadmissible(format!("need s >= 1, got s = {s}")));
        }
        Ok(s)
    }

    /// `(p, β, α)` with `0 < β < 1` and `β <= α < p`.
    pub fn suff(&self) -> Result<SuffParams> {
        let p = self.p()?;
        let beta = self.beta.ok_or_else(|| missing("beta"))?;
        let alpha = self.alpha.ok_or_else(|| missing("alpha"))?;
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Inadmissible(format!(
                "need 0 < beta < 1, got beta = {beta}"
            )));
        }
        if !(beta <= alpha) {
            return Err(Error::Inadmissible(format!(
                "need beta <= alpha, got alpha = {alpha} < beta = {beta}"
            )));
        }
        if !(alpha < p) {
            return Err(Error::Inadmissible(format!(
                "need alpha < p, got alpha = {alpha} >= p = {p}"
            )));
        }
        Ok(SuffParams { p, beta, alpha })
    }
}

/// The configuration attaining a report's sup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// Level-wise cell: centre level `j`, target level `i`, radius `r`.
    Levels { j: usize, i: usize, r: usize },
    /// A sphere or ball of radius `r` around any vertex of level `j`.
    Radius { j: usize, r: usize },
    /// A ball around a specific vertex.
    Ball { center: Vertex, r: usize },
    /// Explicit vertex sets.
    Sets { e: Vec<Vertex>, f: Vec<Vertex>, r: usize },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    pub params: ConditionParams,
    pub grid: BTreeMap<String, Value>,
    /// `log_k` of the best constant found.
    pub empirical_sup_logk: f64,
    pub witness: Witness,
    pub verdict: Verdict,
    /// `(grid index, log_k value at that index)` along the axis the verdict
    /// is taken over; kept for tabular output.
    #[serde(skip)]
    pub trace: Vec<(usize, f64)>,
}

impl ConditionReport {
    pub fn empirical_sup(&self, k: u32) -> f64 {
        logk::to_linear(k, self.empirical_sup_logk)
    }

    /// In assert mode, fail when the sup exceeds `constant` (linear scale).
    pub fn check(&self, k: u32, mode: Mode) -> std::result::Result<(), Violation> {
        match mode {
            Mode::Report => Ok(()),
            Mode::Assert(c) => {
                let sup = self.empirical_sup(k);
                if sup <= c && self.verdict != Verdict::Diverged {
                    Ok(())
                } else {
                    Err(Violation {
                        constant: c,
                        found: sup,
                        witness: self.witness.clone(),
                    })
                }
            }
        }
    }
}

/// Report mode records the sup; assert mode compares it to a constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Report,
    Assert(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constant: f64,
    pub found: f64,
    pub witness: Witness,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "constant {} exceeded: found {} at {}",
            self.constant,
            self.found,
            serde_json::to_string(&self.witness).unwrap_or_default()
        )
    }
}

/// Collapse per-index values to a report. The sup over all values is the
/// empirical constant; the verdict looks at the running sup along the index.
pub(crate) fn finish(
    condition: &str,
    params: ConditionParams,
    grid: BTreeMap<String, Value>,
    k: u32,
    trace: Vec<(usize, f64, Witness)>,
    rule: VerdictRule,
) -> ConditionReport {
    let mut best = (f64::NEG_INFINITY, Witness::None);
    for (_, v, w) in &trace {
        if *v > best.0 || best.1 == Witness::None {
            best = (*v, w.clone());
        }
    }
    let values: Vec<f64> = trace.iter().map(|t| t.1).collect();
    let verdict = rule.classify(k, &values);
    ConditionReport {
        condition: condition.into(),
        params,
        grid,
        empirical_sup_logk: best.0,
        witness: best.1,
        verdict,
        trace: trace.into_iter().map(|(i, v, _)| (i, v)).collect(),
    }
}

pub(crate) fn grid_entry(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility_messages_name_the_condition() {
        let mut c = ConditionParams {
            p: Some(2.0),
            beta: Some(0.5),
            alpha: Some(0.4),
            ..Default::default()
        };
        let e = c.suff().unwrap_err().to_string();
        assert!(e.contains("beta <= alpha"), "{e}");
        c.alpha = Some(2.0);
        assert!(c.suff().unwrap_err().to_string().contains("alpha < p"));
        c.delta = Some(1.0);
        assert!(c.delta().unwrap_err().to_string().contains("delta < 1"));
        c.p = Some(1.0);
        assert!(c.p().is_err());
    }

    #[test]
    fn report_json_fields() {
        let r = finish(
            "demo",
            ConditionParams::default(),
            BTreeMap::new(),
            2,
            vec![(0, 0.0, Witness::Radius { j: 0, r: 0 })],
            VerdictRule::default(),
        );
        let v: Value = serde_json::to_value(&r).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(
            keys,
            ["condition", "empirical_sup_logk", "grid", "params", "verdict", "witness"]
        );
        assert_eq!(v["verdict"], "bounded-on-grid");
        assert!(r.check(2, Mode::Assert(1.0)).is_ok());
        assert!(r.check(2, Mode::Assert(0.5)).is_err());
    }
}
