//! Positive weights on the tree.
//!
//! Level weights depend only on depth and are stored as `log_k φ(j)`. The
//! power family `φ(j) = k^{a j}` keeps `a` as an exact rational so duals and
//! the oracle paths stay exact.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{TreeParams, Vertex};
use crate::logk;
use crate::scalar::Scalar;

/// Exact exponent of a power weight.
pub type Exponent = Rational64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LevelWeight {
    /// `φ(j) = k^{a j}`.
    Power(Exponent),
    /// Explicit `log_k φ(j)` for `j < len`, continued geometrically with the
    /// last ratio.
    Table(Vec<f64>),
}

impl LevelWeight {
    pub fn power(a: Exponent) -> Self {
        LevelWeight::Power(a)
    }

    pub fn constant() -> Self {
        LevelWeight::Power(Exponent::zero())
    }

    pub fn table(logk_values: Vec<f64>) -> Result<Self> {
        if logk_values.is_empty() || logk_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::WeightDescriptor(
                "table weights need at least one finite value".into(),
            ));
        }
        Ok(LevelWeight::Table(logk_values))
    }

    /// `log_k φ(j)`.
    pub fn log_value(&self, j: usize) -> f64 {
        match self {
            LevelWeight::Power(a) => ratio_f64(*a) * j as f64,
            LevelWeight::Table(v) => {
                if j < v.len() {
                    v[j]
                } else {
                    let last = v[v.len() - 1];
                    last + (j - (v.len() - 1)) as f64 * self.tail_slope()
                }
            }
        }
    }

    /// Exact `log_k φ(j)` for power weights.
    pub fn exact_log_value(&self, j: usize) -> Option<Exponent> {
        match self {
            LevelWeight::Power(a) => Some(*a * Exponent::from_integer(j as i64)),
            LevelWeight::Table(_) => None,
        }
    }

    /// `φ(j)` as a scalar; `None` if the value is not representable (for
    /// example an irrational power in an exact type).
    pub fn value<S: Scalar>(&self, k: u32, j: usize) -> Option<S> {
        match self {
            LevelWeight::Power(a) => S::k_pow(k, *a * Exponent::from_integer(j as i64)),
            LevelWeight::Table(_) => {
                if S::EXACT {
                    None
                } else {
                    S::from_f64(logk::to_linear(k, self.log_value(j)))
                }
            }
        }
    }

    /// Slope of `log_k φ` beyond the explicit range.
    pub fn tail_slope(&self) -> f64 {
        match self {
            LevelWeight::Power(a) => ratio_f64(*a),
            LevelWeight::Table(v) if v.len() >= 2 => v[v.len() - 1] - v[v.len() - 2],
            LevelWeight::Table(_) => 0.0,
        }
    }

    /// `sup_{i >= from} log_k φ(i)`; `+inf` for increasing tails.
    pub fn tail_sup_log(&self, from: usize) -> f64 {
        let slope = self.tail_slope();
        match self {
            LevelWeight::Power(_) => {
                if slope > 0.0 {
                    f64::INFINITY
                } else {
                    self.log_value(from)
                }
            }
            LevelWeight::Table(v) => {
                if slope > 0.0 {
                    return f64::INFINITY;
                }
                let tail_start = v.len() - 1;
                let best = self.log_value(from.max(tail_start));
                v[from.min(tail_start)..tail_start].iter().fold(best, |b, &x| b.max(x))
            }
        }
    }

    /// `φ^c`.
    pub fn powered(&self, c: Exponent) -> Self {
        match self {
            LevelWeight::Power(a) => LevelWeight::Power(*a * c),
            LevelWeight::Table(v) => {
                let c = ratio_f64(c);
                LevelWeight::Table(v.iter().map(|x| x * c).collect())
            }
        }
    }

    pub fn powered_f64(&self, c: f64) -> Self {
        match self {
            LevelWeight::Power(a) => match exponent_from_f64(c) {
                Some(c) => LevelWeight::Power(*a * c),
                None => LevelWeight::Table(vec![0.0, ratio_f64(*a) * c]),
            },
            LevelWeight::Table(v) => LevelWeight::Table(v.iter().map(|x| x * c).collect()),
        }
    }
}

pub(crate) fn ratio_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Exact rational for a float that is a short decimal (e.g. `-0.75`).
pub fn exponent_from_f64(x: f64) -> Option<Exponent> {
    if !x.is_finite() {
        return None;
    }
    for den in [1i64, 2, 3, 4, 5, 6, 8, 10, 12, 16, 20, 25, 100, 1000, 10000] {
        let num = (x * den as f64).round();
        if (num / den as f64 - x).abs() <= 1e-12 * x.abs().max(1.0) && num.abs() < 1e15 {
            return Some(Exponent::new(num as i64, den));
        }
    }
    None
}

/// Parses `3`, `-3/4` or `-0.75` into an exact rational.
pub fn parse_exponent(s: &str) -> Result<Exponent> {
    let s = s.trim();
    let bad = || Error::WeightDescriptor(s.to_string());
    if s.contains('/') {
        return Exponent::from_str(s).map_err(|_| bad());
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) || frac_part.len() > 15 {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: i64 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
    let den = 10i64.pow(frac_part.len() as u32);
    let r = Exponent::new(num, den);
    Ok(if neg { -r } else { r })
}

fn format_exponent(a: &Exponent) -> String {
    if a.is_integer() {
        a.numer().to_string()
    } else {
        format!("{}/{}", a.numer(), a.denom())
    }
}

impl fmt::Display for LevelWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelWeight::Power(a) => write!(f, "power:a={}", format_exponent(a)),
            LevelWeight::Table(v) => {
                let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                write!(f, "table:[{}]", items.join(","))
            }
        }
    }
}

impl FromStr for LevelWeight {
    type Err = Error;

    /// `power:a=<exponent>` or `table:[<log_k φ(0)>,<log_k φ(1)>,...]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::WeightDescriptor(s.to_string());
        if let Some(rest) = s.strip_prefix("power:") {
            let value = rest.trim().strip_prefix("a=").ok_or_else(bad)?;
            return parse_exponent(value).map(LevelWeight::Power).map_err(|_| bad());
        }
        if let Some(rest) = s.strip_prefix("table:") {
            let inner = rest
                .trim()
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(bad)?;
            let values = inner
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad())?;
            return LevelWeight::table(values).map_err(|_| bad());
        }
        Err(bad())
    }
}

/// The dual weight `σ_p = w^{-1/(p-1)}`.
pub fn dual_weight(w: &LevelWeight, p: Exponent) -> Result<LevelWeight> {
    if p <= Exponent::one() {
        return Err(Error::Inadmissible(format!(
            "dual weight needs p > 1, got {}",
            format_exponent(&p)
        )));
    }
    let factor = -(Exponent::one() / (p - Exponent::one()));
    Ok(w.powered(factor))
}

/// Dual exponent `p' = p / (p - 1)`.
pub fn conjugate_exponent(p: Exponent) -> Result<Exponent> {
    if p <= Exponent::one() {
        return Err(Error::Inadmissible("conjugate exponent needs p > 1".into()));
    }
    Ok(p / (p - Exponent::one()))
}

/// `log_k w(T_j) = j + log_k φ(j)`.
pub fn level_mass_logk(w: &LevelWeight, j: usize) -> f64 {
    j as f64 + w.log_value(j)
}

/// `log_k w(S(x, r))` for any `x` of depth `j`.
pub fn sphere_weight_logk(tree: &TreeParams, w: &LevelWeight, j: usize, r: usize) -> f64 {
    logk::sum(
        tree.k(),
        tree.sphere_slices(j, r).map(|s| {
            tree.sphere_level_count_logk(j, r, s.up_steps) + w.log_value(s.target_depth())
        }),
    )
}

/// `log_k w(B(x, r))` for any `x` of depth `j`.
pub fn ball_weight_logk(tree: &TreeParams, w: &LevelWeight, j: usize, r: usize) -> f64 {
    logk::sum(tree.k(), (0..=r).map(|s| sphere_weight_logk(tree, w, j, s)))
}

/// A level weight with finitely many vertex overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    pub base: LevelWeight,
    overrides: BTreeMap<Vertex, f64>,
    truncation_depth: usize,
}

impl Weight {
    pub fn level(base: LevelWeight) -> Self {
        Weight {
            base,
            overrides: BTreeMap::new(),
            truncation_depth: 0,
        }
    }

    /// Overrides are given as `log_k w(x)` and must sit at depth
    /// `<= truncation_depth`.
    pub fn with_overrides(
        base: LevelWeight,
        overrides: BTreeMap<Vertex, f64>,
        truncation_depth: usize,
    ) -> Result<Self> {
        if let Some((v, _)) = overrides.iter().find(|(v, _)| v.depth() > truncation_depth) {
            return Err(Error::Precondition(format!(
                "override at {v} lies below truncation depth {truncation_depth}"
            )));
        }
        if overrides.values().any(|x| !x.is_finite()) {
            return Err(Error::Precondition("override weights must be positive".into()));
        }
        Ok(Weight {
            base,
            overrides,
            truncation_depth,
        })
    }

    pub fn has_overrides(&self) -> bool {
        !self.overrides.is_empty()
    }

    pub fn truncation_depth(&self) -> usize {
        self.truncation_depth
    }

    pub fn value_logk(&self, x: &Vertex) -> f64 {
        self.overrides
            .get(x)
            .copied()
            .unwrap_or_else(|| self.base.log_value(x.depth()))
    }

    pub fn value<S: Scalar>(&self, k: u32, x: &Vertex) -> Option<S> {
        match self.overrides.get(x) {
            Some(lg) if S::EXACT => exponent_from_f64(*lg).and_then(|e| S::k_pow(k, e)),
            Some(lg) => S::from_f64(logk::to_linear(k, *lg)),
            None => self.base.value(k, x.depth()),
        }
    }
}

impl From<LevelWeight> for Weight {
    fn from(w: LevelWeight) -> Self {
        Weight::level(w)
    }
}

/// `w(S) = Σ_{x∈S} w(x)` in floating point.
pub fn set_weight(tree: &TreeParams, w: &Weight, set: &BTreeSet<Vertex>) -> f64 {
    set.iter()
        .map(|x| logk::to_linear(tree.k(), w.value_logk(x)))
        .sum()
}

/// `log_k w(S)`; `-inf` for the empty set.
pub fn set_weight_logk(tree: &TreeParams, w: &Weight, set: &BTreeSet<Vertex>) -> f64 {
    logk::sum(tree.k(), set.iter().map(|x| w.value_logk(x)))
}

/// `w(S)` in an arbitrary scalar type.
pub fn set_weight_exact<S: Scalar>(
    tree: &TreeParams,
    w: &Weight,
    set: &BTreeSet<Vertex>,
) -> Result<S> {
    let mut acc = S::zero();
    for x in set {
        let v = w
            .value::<S>(tree.k(), x)
            .ok_or_else(|| Error::NotRepresentable(format!("weight at {x}")))?;
        acc = acc + v;
    }
    Ok(acc)
}

/// A pair `(u, v)` for two-weight conditions: `u` measures the target set,
/// `v` the source set. One-weight checks use `u = v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pair<W> {
    pub u: W,
    pub v: W,
}

impl<W: Clone> Pair<W> {
    pub fn single(w: W) -> Self {
        Pair { u: w.clone(), v: w }
    }

    pub fn new(u: W, v: W) -> Self {
        Pair { u, v }
    }

    pub fn swapped(&self) -> Self {
        Pair {
            u: self.v.clone(),
            v: self.u.clone(),
        }
    }
}

pub type WeightPair = Pair<Weight>;
pub type LevelWeightPair = Pair<LevelWeight>;

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn tr(k: u32) -> TreeParams {
        TreeParams::new(k).unwrap()
    }

    fn q(n: i64, d: i64) -> Exponent {
        Exponent::new(n, d)
    }

    #[test]
    fn dual_examples() {
        let w = LevelWeight::power(q(1, 1));
        assert_eq!(dual_weight(&w, q(2, 1)).unwrap(), LevelWeight::power(q(-1, 1)));
        assert_eq!(
            dual_weight(&LevelWeight::constant(), q(3, 2)).unwrap(),
            LevelWeight::constant()
        );
        assert_eq!(
            dual_weight(&LevelWeight::power(q(3, 1)), q(4, 1)).unwrap(),
            LevelWeight::power(q(-1, 1))
        );
        assert!(dual_weight(&w, q(1, 1)).is_err());
    }

    #[test]
    fn level_mass_examples() {
        let k2 = 2;
        assert_eq!(logk::to_linear(k2, level_mass_logk(&LevelWeight::constant(), 5)), 32.0);
        let w = LevelWeight::power(q(1, 1));
        assert_eq!(logk::to_linear(k2, level_mass_logk(&w, 3)), 64.0);
        let w = LevelWeight::power(q(-1, 1));
        for j in 0..50 {
            assert_eq!(level_mass_logk(&w, j), 0.0);
        }
    }

    #[test]
    fn sphere_weight_examples() {
        let t = tr(2);
        let w = LevelWeight::power(q(1, 1));
        assert_eq!(sphere_weight_logk(&t, &w, 5, 0), 5.0);
        let v = logk::to_linear(2, sphere_weight_logk(&t, &w, 5, 3));
        assert!((v - 2196.0).abs() < 1e-9);
        for j in 0..10 {
            for r in 0..10 {
                let a = sphere_weight_logk(&t, &LevelWeight::constant(), j, r);
                assert!((a - t.sphere_size_logk(j, r)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn set_weight_examples() {
        let t = tr(2);
        let w = Weight::level(LevelWeight::power(q(1, 1)));
        assert_eq!(set_weight(&t, &w, &BTreeSet::new()), 0.0);
        let root: BTreeSet<_> = [t.root()].into_iter().collect();
        let w7 = Weight::level(LevelWeight::power(q(7, 3)));
        assert_eq!(set_weight(&t, &w7, &root), 1.0);
        let slice: BTreeSet<_> = t.level_vertices(2, 1 << 10).unwrap().into_iter().collect();
        assert_eq!(set_weight(&t, &w, &slice), 16.0);
        let exact: BigRational = set_weight_exact(&t, &w, &slice).unwrap();
        assert_eq!(exact, BigRational::from_integer(16.into()));
    }

    #[test]
    fn duality_exponent_algebra() {
        for (a, p) in [(q(3, 4), q(2, 1)), (q(-1, 2), q(3, 2)), (q(5, 1), q(7, 3))] {
            let pp = conjugate_exponent(p).unwrap();
            let once = dual_weight(&LevelWeight::power(a), p).unwrap();
            let twice = dual_weight(&once, pp).unwrap();
            let factor = (Exponent::one() / (p - 1)) * (Exponent::one() / (pp - 1));
            assert_eq!(twice, LevelWeight::power(a * factor));
            // (p-1)(p'-1) = 1, so the double dual is the identity
            assert_eq!(twice, LevelWeight::power(a));
            // σ^p w = σ
            if let (LevelWeight::Power(s), LevelWeight::Power(w)) = (&once, LevelWeight::power(a)) {
                assert_eq!(*s * p + w, *s);
            }
        }
    }

    #[test]
    fn table_extension_is_geometric() {
        let w = LevelWeight::table(vec![0.0, -0.5, -1.5]).unwrap();
        assert_eq!(w.log_value(2), -1.5);
        assert_eq!(w.log_value(4), -3.5);
        assert_eq!(w.tail_sup_log(1), -0.5);
        assert_eq!(w.tail_sup_log(3), -2.5);
        let grow = LevelWeight::table(vec![0.0, 1.0]).unwrap();
        assert!(grow.tail_sup_log(0).is_infinite());
        assert!(LevelWeight::table(vec![]).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        for s in ["power:a=1", "power:a=-3/4", "table:[0.0,-0.5,-1.25]"] {
            let w: LevelWeight = s.parse().unwrap();
            assert_eq!(w.to_string(), s);
        }
        let w: LevelWeight = "power:a=-0.75".parse().unwrap();
        assert_eq!(w, LevelWeight::power(q(-3, 4)));
        assert!("power:b=1".parse::<LevelWeight>().is_err());
        assert!("table:[]".parse::<LevelWeight>().is_err());
        assert!("cubic".parse::<LevelWeight>().is_err());
    }

    #[test]
    fn overrides_below_truncation_rejected() {
        let t = tr(2);
        let mut ov = BTreeMap::new();
        ov.insert(t.leftmost(5), 1.0);
        assert!(Weight::with_overrides(LevelWeight::constant(), ov.clone(), 4).is_err());
        let w = Weight::with_overrides(LevelWeight::constant(), ov, 5).unwrap();
        assert_eq!(w.value_logk(&t.leftmost(5)), 1.0);
        assert_eq!(w.value_logk(&t.leftmost(4)), 0.0);
        assert_eq!(w.value::<BigRational>(2, &t.leftmost(5)), Some(BigRational::from_integer(2.into())));
    }

    #[test]
    fn parse_exponent_forms() {
        assert_eq!(parse_exponent("3").unwrap(), q(3, 1));
        assert_eq!(parse_exponent("-0.75").unwrap(), q(-3, 4));
        assert_eq!(parse_exponent("1.5").unwrap(), q(3, 2));
        assert_eq!(parse_exponent("2/6").unwrap(), q(1, 3));
        assert!(parse_exponent("abc").is_err());
        assert!(parse_exponent("").is_err());
    }
}
