//! Combinatorics of the infinite rooted k-ary tree.
//!
//! Vertices are addressed by their root path, so no global index is needed
//! and arbitrarily deep vertices are representable. Sphere and ball
//! cardinalities come from closed forms over the number `m` of upward steps
//! a geodesic takes; [`TreeParams::enumerate_sphere`] is the brute-force
//! oracle that those closed forms are checked against.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logk::{self, LOG_ZERO};
use crate::scalar::{k_inv_pow, small, Scalar};

/// Default cap on the number of materialized vertices (2^20).
pub const DEFAULT_NODE_BUDGET: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeParams {
    k: u32,
}

/// A vertex, identified by the child indices along its path from the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vertex {
    path: Vec<u32>,
}

/// One level slice `T_i ∩ S(x, r)` for `x` of depth `center_depth`: the
/// geodesic climbs `up_steps` edges and then descends `radius - up_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SphereLevelSlice {
    pub center_depth: usize,
    pub radius: usize,
    pub up_steps: usize,
}

impl SphereLevelSlice {
    pub fn target_depth(&self) -> usize {
        self.center_depth + self.radius - 2 * self.up_steps
    }

    /// The slice reaching level `target` from depth `center` at radius `r`,
    /// if one exists.
    pub fn between(center: usize, target: usize, r: usize) -> Option<Self> {
        let total = center + r;
        if target > total || !(total - target).is_multiple_of(2) {
            return None;
        }
        let up = (total - target) / 2;
        if up > r.min(center) {
            return None;
        }
        Some(SphereLevelSlice {
            center_depth: center,
            radius: r,
            up_steps: up,
        })
    }
}

impl Vertex {
    pub fn depth(&self) -> usize {
        self.path.len()
    }

    pub fn path(&self) -> &[u32] {
        &self.path
    }

    pub fn is_root(&self) -> bool {
        self.path.is_empty()
    }

    pub fn parent(&self) -> Option<Vertex> {
        if self.path.is_empty() {
            None
        } else {
            Some(Vertex {
                path: self.path[..self.path.len() - 1].to_vec(),
            })
        }
    }

    /// The `m`-th ancestor (`m = 0` is the vertex itself).
    pub fn ancestor(&self, m: usize) -> Option<Vertex> {
        (m <= self.depth()).then(|| Vertex {
            path: self.path[..self.path.len() - m].to_vec(),
        })
    }

    pub fn child(&self, digit: u32) -> Vertex {
        let mut path = self.path.clone();
        path.push(digit);
        Vertex { path }
    }

    /// Whether `self` lies in the subtree rooted at `other`.
    pub fn descends_from(&self, other: &Vertex) -> bool {
        self.path.starts_with(&other.path)
    }

    fn common_prefix(&self, other: &Vertex) -> usize {
        self.path
            .iter()
            .zip(&other.path)
            .take_while(|(a, b)| a == b)
            .count()
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            return write!(f, "root");
        }
        let digits: Vec<String> = self.path.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", digits.join("."))
    }
}

/// Tree distance: edges on the unique path between `x` and `y`.
pub fn distance(x: &Vertex, y: &Vertex) -> usize {
    let c = x.common_prefix(y);
    x.depth() + y.depth() - 2 * c
}

impl TreeParams {
    pub fn new(k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidBranching(k));
        }
        Ok(TreeParams { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn root(&self) -> Vertex {
        Vertex { path: Vec::new() }
    }

    pub fn vertex(&self, path: Vec<u32>) -> Result<Vertex> {
        if let Some(d) = path.iter().find(|&&d| d >= self.k) {
            return Err(Error::InvalidVertex(format!(
                "digit {d} out of range for k = {}",
                self.k
            )));
        }
        Ok(Vertex { path })
    }

    /// The vertex `0.0.…` at the given depth, a canonical representative of
    /// its level.
    pub fn leftmost(&self, depth: usize) -> Vertex {
        Vertex {
            path: vec![0; depth],
        }
    }

    pub fn contains(&self, x: &Vertex) -> bool {
        x.path.iter().all(|&d| d < self.k)
    }

    fn pow(&self, e: usize) -> BigUint {
        BigUint::from(self.k).pow(e as u32)
    }

    /// `|T_j| = k^j`.
    pub fn level_size(&self, j: usize) -> BigUint {
        self.pow(j)
    }

    /// `|T_{j+r-2m} ∩ S(x, r)|` for any `x` of depth `j`.
    pub fn sphere_level_count(&self, j: usize, r: usize, m: usize) -> BigUint {
        if m > r.min(j) {
            return BigUint::zero();
        }
        if m == 0 {
            self.pow(r)
        } else if m == r {
            BigUint::one()
        } else {
            BigUint::from(self.k - 1) * self.pow(r - m - 1)
        }
    }

    /// `log_k` of [`Self::sphere_level_count`]; `-inf` for empty slices.
    pub fn sphere_level_count_logk(&self, j: usize, r: usize, m: usize) -> f64 {
        if m > r.min(j) {
            return LOG_ZERO;
        }
        if m == 0 {
            r as f64
        } else if m == r {
            0.0
        } else {
            logk::from_linear(self.k, (self.k - 1) as f64) + (r - m - 1) as f64
        }
    }

    pub fn sphere_size(&self, j: usize, r: usize) -> BigUint {
        if r == 0 {
            return BigUint::one();
        }
        let full = self.pow(r) + self.pow(r - 1);
        if j >= r {
            full
        } else {
            full - self.pow(r - j - 1)
        }
    }

    /// `log_k |S(x, r)|`, via `r + log_k(1 + 1/k - [j < r] k^{-j-1})`.
    pub fn sphere_size_logk(&self, j: usize, r: usize) -> f64 {
        if r == 0 {
            return 0.0;
        }
        let k = self.k as f64;
        let mut norm = 1.0 + 1.0 / k;
        if j < r {
            norm -= k.powi(-(j as i32) - 1);
        }
        r as f64 + logk::from_linear(self.k, norm)
    }

    pub fn ball_size(&self, j: usize, r: usize) -> BigUint {
        (0..=r).map(|s| self.sphere_size(j, s)).sum()
    }

    pub fn ball_size_logk(&self, j: usize, r: usize) -> f64 {
        logk::sum(self.k, (0..=r).map(|s| self.sphere_size_logk(j, s)))
    }

    /// `|S(x, r)| / k^r` in scalar form; never overflows.
    pub fn sphere_size_normalized<S: Scalar>(&self, j: usize, r: usize) -> S {
        if r == 0 {
            return S::one();
        }
        let mut v = S::one() + k_inv_pow::<S>(self.k, 1);
        if j < r {
            v = v - k_inv_pow::<S>(self.k, j + 1);
        }
        v
    }

    /// `|T_{j+r-2m} ∩ S(x, r)| / |S(x, r)|`, the share of the sphere lying on
    /// one level, computed without forming `k^r`.
    pub fn sphere_level_fraction<S: Scalar>(&self, j: usize, r: usize, m: usize) -> S {
        if m > r.min(j) {
            return S::zero();
        }
        let count_norm: S = if m == 0 {
            S::one()
        } else if m == r {
            k_inv_pow(self.k, r)
        } else {
            small::<S>((self.k - 1) as u64) * k_inv_pow(self.k, m + 1)
        };
        count_norm / self.sphere_size_normalized(j, r)
    }

    /// Convex weights `|S(x, s)| / |B(x, r)|` for `s = 0..=r`.
    pub fn ball_shell_weights<S: Scalar>(&self, j: usize, r: usize) -> Vec<S> {
        let raw: Vec<S> = (0..=r)
            .map(|s| self.sphere_size_normalized::<S>(j, s) * k_inv_pow(self.k, r - s))
            .collect();
        let total = raw.iter().cloned().fold(S::zero(), |a, b| a + b);
        raw.into_iter().map(|u| u / total.clone()).collect()
    }

    /// All non-empty level slices of `S(x, r)` for `x` of depth `j`.
    pub fn sphere_slices(&self, j: usize, r: usize) -> impl Iterator<Item = SphereLevelSlice> {
        (0..=r.min(j)).map(move |m| SphereLevelSlice {
            center_depth: j,
            radius: r,
            up_steps: m,
        })
    }

    /// Number of vertices in the tree truncated at `depth`.
    pub fn truncated_size(&self, depth: usize) -> u128 {
        let mut total: u128 = 0;
        let mut level: u128 = 1;
        for _ in 0..=depth {
            total = total.saturating_add(level);
            level = level.saturating_mul(self.k as u128);
        }
        total
    }

    fn check_budget(&self, depth: usize, budget: u128) -> Result<()> {
        let nodes = self.truncated_size(depth);
        if nodes > budget {
            return Err(Error::BudgetExceeded {
                depth,
                nodes,
                budget,
            });
        }
        Ok(())
    }

    /// Every vertex of depth `<= depth`, in breadth-first order.
    pub fn materialize(&self, depth: usize, budget: u128) -> Result<Vec<Vertex>> {
        self.check_budget(depth, budget)?;
        let mut out = vec![self.root()];
        let mut start = 0;
        for _ in 0..depth {
            let end = out.len();
            for idx in start..end {
                for d in 0..self.k {
                    let c = out[idx].child(d);
                    out.push(c);
                }
            }
            start = end;
        }
        Ok(out)
    }

    /// All vertices of one level, lexicographically ordered.
    pub fn level_vertices(&self, depth: usize, budget: u128) -> Result<Vec<Vertex>> {
        self.check_budget(depth, budget)?;
        let mut level = vec![self.root()];
        for _ in 0..depth {
            level = level
                .iter()
                .flat_map(|v| (0..self.k).map(move |d| v.child(d)))
                .collect();
        }
        Ok(level)
    }

    /// Brute-force sphere by breadth-first search inside the tree truncated
    /// at `depth_limit`, with the default node budget.
    pub fn enumerate_sphere(
        &self,
        x: &Vertex,
        r: usize,
        depth_limit: usize,
    ) -> Result<BTreeSet<Vertex>> {
        self.enumerate_sphere_with_budget(x, r, depth_limit, DEFAULT_NODE_BUDGET)
    }

    pub fn enumerate_sphere_with_budget(
        &self,
        x: &Vertex,
        r: usize,
        depth_limit: usize,
        budget: u128,
    ) -> Result<BTreeSet<Vertex>> {
        Ok(self
            .bfs(x, r, depth_limit, budget)?
            .into_iter()
            .filter(|(_, d)| *d == r)
            .map(|(v, _)| v)
            .collect())
    }

    /// Brute-force ball `B(x, r)` by breadth-first search.
    pub fn enumerate_ball_with_budget(
        &self,
        x: &Vertex,
        r: usize,
        depth_limit: usize,
        budget: u128,
    ) -> Result<BTreeSet<Vertex>> {
        Ok(self
            .bfs(x, r, depth_limit, budget)?
            .into_iter()
            .map(|(v, _)| v)
            .collect())
    }

    fn bfs(
        &self,
        x: &Vertex,
        r: usize,
        depth_limit: usize,
        budget: u128,
    ) -> Result<Vec<(Vertex, usize)>> {
        if !self.contains(x) {
            return Err(Error::InvalidVertex(x.to_string()));
        }
        if x.depth() + r > depth_limit {
            return Err(Error::Precondition(format!(
                "sphere of radius {r} around depth {} leaves truncation {depth_limit}",
                x.depth()
            )));
        }
        self.check_budget(depth_limit, budget)?;

        let mut seen = BTreeSet::new();
        let mut frontier = VecDeque::new();
        seen.insert(x.clone());
        frontier.push_back((x.clone(), 0usize));
        let mut out = Vec::new();
        while let Some((v, d)) = frontier.pop_front() {
            out.push((v.clone(), d));
            if d == r {
                continue;
            }
            let mut next = Vec::with_capacity(self.k as usize + 1);
            if let Some(p) = v.parent() {
                next.push(p);
            }
            if v.depth() < depth_limit {
                next.extend((0..self.k).map(|c| v.child(c)));
            }
            for n in next {
                if seen.insert(n.clone()) {
                    frontier.push_back((n, d + 1));
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn t(k: u32) -> TreeParams {
        TreeParams::new(k).unwrap()
    }

    #[test]
    fn rejects_unary_tree() {
        assert_eq!(TreeParams::new(1), Err(Error::InvalidBranching(1)));
        assert!(t(2).vertex(vec![0, 2]).is_err());
    }

    #[test]
    fn distance_examples() {
        let tr = t(2);
        let x = tr.vertex(vec![0, 1]).unwrap();
        assert_eq!(distance(&x, &x), 0);
        let deep = tr.vertex(vec![1, 0, 1, 1]).unwrap();
        assert_eq!(distance(&tr.root(), &deep), 4);
        let y = tr.vertex(vec![1, 0, 0]).unwrap();
        assert_eq!(distance(&x, &y), 5);
    }

    #[test]
    fn level_count_examples() {
        let tr = t(2);
        assert_eq!(tr.sphere_level_count(0, 3, 0), BigUint::from(8u32));
        for k in 2..6 {
            assert_eq!(t(k).sphere_level_count(4, 1, 1), BigUint::one());
        }
        assert_eq!(tr.sphere_level_count(5, 4, 2), BigUint::from(2u32));
        assert_eq!(tr.sphere_level_count(1, 4, 2), BigUint::zero());
    }

    #[test]
    fn size_examples() {
        assert_eq!(t(3).sphere_size(0, 2), BigUint::from(9u32));
        assert_eq!(t(2).sphere_size(5, 3), BigUint::from(12u32));
        assert_eq!(t(2).ball_size(7, 0), BigUint::one());
        assert_eq!(t(2).ball_size(0, 3), BigUint::from(15u32));
        assert_eq!(t(2).ball_size(6, 2), BigUint::from(10u32));
    }

    #[test]
    fn enumerate_examples() {
        let tr = t(2);
        let s = tr.enumerate_sphere(&tr.root(), 0, 3).unwrap();
        assert_eq!(s.into_iter().collect::<Vec<_>>(), vec![tr.root()]);
        let s = tr.enumerate_sphere(&tr.root(), 2, 2).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|v| v.depth() == 2));

        let x = tr.vertex(vec![1, 0, 1]).unwrap();
        let s = tr.enumerate_sphere(&x, 3, 6).unwrap();
        assert_eq!(s.len(), 12);
        let mut by_depth = std::collections::BTreeMap::new();
        for v in &s {
            *by_depth.entry(v.depth()).or_insert(0) += 1;
        }
        let got: Vec<(usize, i32)> = by_depth.into_iter().collect();
        assert_eq!(got, vec![(0, 1), (2, 1), (4, 2), (6, 8)]);
    }

    #[test]
    fn enumerate_respects_budget_and_truncation() {
        let tr = t(2);
        let err = tr
            .enumerate_sphere_with_budget(&tr.root(), 2, 10, 100)
            .unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
        assert!(tr.enumerate_sphere(&tr.leftmost(3), 3, 5).is_err());
    }

    #[test]
    fn fractions_match_exact_ratio() {
        let tr = t(3);
        for j in 0..6 {
            for r in 0..6 {
                for m in 0..=r {
                    let exact = BigRational::new(
                        tr.sphere_level_count(j, r, m).into(),
                        tr.sphere_size(j, r).into(),
                    );
                    assert_eq!(tr.sphere_level_fraction::<BigRational>(j, r, m), exact);
                }
            }
        }
    }

    #[test]
    fn shell_weights_are_exact_ball_ratios() {
        let tr = t(2);
        for j in 0..5 {
            for r in 0..5 {
                let w = tr.ball_shell_weights::<BigRational>(j, r);
                let ball = tr.ball_size(j, r);
                for (s, ws) in w.iter().enumerate() {
                    let exact =
                        BigRational::new(tr.sphere_size(j, s).into(), ball.clone().into());
                    assert_eq!(*ws, exact);
                }
            }
        }
    }

    #[test]
    fn log_forms_track_exact_counts() {
        let tr = t(3);
        for j in 0..12 {
            for r in 0..12 {
                let exact = tr.sphere_size(j, r);
                let lg = tr.sphere_size_logk(j, r);
                let lin = logk::to_linear(3, lg);
                let ex = exact.to_string().parse::<f64>().unwrap();
                assert!((lin - ex).abs() <= 1e-9 * ex);
                let b = tr.ball_size(j, r).to_string().parse::<f64>().unwrap();
                assert!((logk::to_linear(3, tr.ball_size_logk(j, r)) - b).abs() <= 1e-9 * b);
            }
        }
    }

    #[test]
    fn slice_between_checks_parity_and_range() {
        assert_eq!(SphereLevelSlice::between(5, 3, 2).unwrap().up_steps, 2);
        assert!(SphereLevelSlice::between(5, 4, 2).is_none());
        assert!(SphereLevelSlice::between(1, 0, 5).is_none());
        let s = SphereLevelSlice::between(2, 6, 4).unwrap();
        assert_eq!(s.up_steps, 0);
        assert_eq!(s.target_depth(), 6);
    }
}
