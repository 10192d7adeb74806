//! Spherical and ball averages, the maximal operators `M∘` and `M`, and the
//! unnormalized pair sums `P_r`.
//!
//! Two evaluators share the [`TestFunction`] interface: [`LevelFunction`]
//! (value depends only on depth, evaluated through closed-form level counts)
//! and [`SparseFunction`] (finite support, evaluated by distances to the
//! support). Both are generic over [`Scalar`], so the same code runs in `f64`
//! and in exact rationals. Long horizons in `f64` go through [`levelscan`],
//! which stays in the log domain.

pub mod levelscan;
pub mod norms;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, SphereLevelSlice, TreeParams, Vertex};
use crate::scalar::Scalar;

/// A finitely supported function of depth only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelFunction<S> {
    values: Vec<S>,
}

/// A finitely supported function on vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseFunction<S> {
    support: BTreeMap<Vertex, S>,
}

/// Value of a supremum over radii together with the smallest maximizing
/// radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Maximum<S> {
    pub value: S,
    pub radius: usize,
}

/// Which family of averages a maximal operator ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    /// `M∘`, spheres.
    Sphere,
    /// `M`, balls.
    Ball,
}

pub trait TestFunction<S: Scalar> {
    fn value(&self, x: &Vertex) -> S;

    /// Deepest level carrying mass, `None` for the zero function.
    fn max_support_depth(&self) -> Option<usize>;

    /// `P_r f(x) = Σ_{d(x,y)=r} f(y)`.
    fn pair_sum(&self, tree: &TreeParams, x: &Vertex, r: usize) -> S;

    /// `A_r∘ f(x)`.
    fn sphere_average(&self, tree: &TreeParams, x: &Vertex, r: usize) -> S {
        self.pair_sum(tree, x, r) / S::from_count(&tree.sphere_size(x.depth(), r))
    }

    /// `A_s∘ f(x)` for `s = 0..=r_max`.
    fn sphere_averages(&self, tree: &TreeParams, x: &Vertex, r_max: usize) -> Vec<S> {
        (0..=r_max)
            .map(|r| self.sphere_average(tree, x, r))
            .collect()
    }
}

/// Radii beyond `depth(x) + J_max` miss the support entirely, so suprema
/// over `r` are attained in `0..=radius_horizon`.
pub fn radius_horizon<S: Scalar, F: TestFunction<S> + ?Sized>(f: &F, x: &Vertex) -> usize {
    f.max_support_depth().map_or(0, |d| x.depth() + d)
}

/// Average of `f` over `B(x, r)`, as the convex combination of sphere
/// averages weighted by `|S(x, s)| / |B(x, r)|`.
pub fn ball_average<S: Scalar, F: TestFunction<S> + ?Sized>(
    f: &F,
    tree: &TreeParams,
    x: &Vertex,
    r: usize,
) -> S {
    let averages = f.sphere_averages(tree, x, r);
    ball_from_spheres(tree, x.depth(), &averages, r)
}

fn ball_from_spheres<S: Scalar>(tree: &TreeParams, j: usize, averages: &[S], r: usize) -> S {
    tree.ball_shell_weights::<S>(j, r)
        .into_iter()
        .zip(averages)
        .fold(S::zero(), |acc, (w, a)| acc + w * a.clone())
}

fn argmax<S: Scalar>(values: impl IntoIterator<Item = S>) -> Maximum<S> {
    let mut best = Maximum {
        value: S::zero(),
        radius: 0,
    };
    for (r, v) in values.into_iter().enumerate() {
        if r == 0 || v > best.value {
            best = Maximum { value: v, radius: r };
        }
    }
    best
}

/// `M∘ f(x) = sup_r A_r∘ f(x)`, exact over the finite radius horizon.
pub fn maximal_sphere<S: Scalar, F: TestFunction<S> + ?Sized>(
    f: &F,
    tree: &TreeParams,
    x: &Vertex,
) -> Maximum<S> {
    argmax(f.sphere_averages(tree, x, radius_horizon(f, x)))
}

/// `M f(x) = sup_r` of ball averages, exact over the finite radius horizon.
pub fn maximal_ball<S: Scalar, F: TestFunction<S> + ?Sized>(
    f: &F,
    tree: &TreeParams,
    x: &Vertex,
) -> Maximum<S> {
    let horizon = radius_horizon(f, x);
    let averages = f.sphere_averages(tree, x, horizon);
    let j = x.depth();
    argmax((0..=horizon).map(|r| ball_from_spheres(tree, j, &averages[..=r], r)))
}

pub fn maximal<S: Scalar, F: TestFunction<S> + ?Sized>(
    f: &F,
    tree: &TreeParams,
    x: &Vertex,
    geometry: Geometry,
) -> Maximum<S> {
    match geometry {
        Geometry::Sphere => maximal_sphere(f, tree, x),
        Geometry::Ball => maximal_ball(f, tree, x),
    }
}

impl<S: Scalar> LevelFunction<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        if values.iter().any(|v| *v < S::zero()) {
            return Err(Error::Precondition("test functions must be nonnegative".into()));
        }
        Ok(LevelFunction { values })
    }

    pub fn zero() -> Self {
        LevelFunction { values: Vec::new() }
    }

    /// `χ_{T_j}`.
    pub fn indicator(j: usize) -> Self {
        let mut values = vec![S::zero(); j + 1];
        values[j] = S::one();
        LevelFunction { values }
    }

    /// The constant `1` on levels `0..=depth`.
    pub fn ones(depth: usize) -> Self {
        LevelFunction {
            values: vec![S::one(); depth + 1],
        }
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn at(&self, j: usize) -> S {
        self.values.get(j).cloned().unwrap_or_else(S::zero)
    }

    pub fn support_depth(&self) -> Option<usize> {
        self.values.iter().rposition(|v| *v != S::zero())
    }

    fn support(&self) -> impl Iterator<Item = (usize, &S)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != S::zero())
    }

    /// `A_r∘ g` on level `j`.
    pub fn sphere_average_at(&self, tree: &TreeParams, j: usize, r: usize) -> S {
        self.support()
            .filter_map(|(i, g)| {
                SphereLevelSlice::between(j, i, r)
                    .map(|s| tree.sphere_level_fraction::<S>(j, r, s.up_steps) * g.clone())
            })
            .fold(S::zero(), |a, b| a + b)
    }

    /// `P_r g` on level `j`.
    pub fn pair_sum_at(&self, tree: &TreeParams, j: usize, r: usize) -> S {
        self.support()
            .filter_map(|(i, g)| {
                SphereLevelSlice::between(j, i, r).map(|s| {
                    S::from_count(&tree.sphere_level_count(j, r, s.up_steps)) * g.clone()
                })
            })
            .fold(S::zero(), |a, b| a + b)
    }

    pub fn ball_average_at(&self, tree: &TreeParams, j: usize, r: usize) -> S {
        let averages: Vec<S> = (0..=r).map(|s| self.sphere_average_at(tree, j, s)).collect();
        ball_from_spheres(tree, j, &averages, r)
    }

    /// `M∘ g` (or `M g`) on level `j`.
    pub fn maximal_at(&self, tree: &TreeParams, j: usize, geometry: Geometry) -> Maximum<S> {
        let horizon = self.support_depth().map_or(0, |d| j + d);
        let averages: Vec<S> = (0..=horizon)
            .map(|r| self.sphere_average_at(tree, j, r))
            .collect();
        match geometry {
            Geometry::Sphere => argmax(averages),
            Geometry::Ball => {
                argmax((0..=horizon).map(|r| ball_from_spheres(tree, j, &averages[..=r], r)))
            }
        }
    }

    /// Pointwise map, used for powers of test functions.
    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> LevelFunction<T> {
        LevelFunction {
            values: self.values.iter().map(f).collect(),
        }
    }

    /// The same function listed vertex by vertex on levels `0..=depth`.
    pub fn to_sparse(&self, tree: &TreeParams, budget: u128) -> Result<SparseFunction<S>> {
        let mut support = BTreeMap::new();
        for (i, g) in self.support() {
            for v in tree.level_vertices(i, budget)? {
                support.insert(v, g.clone());
            }
        }
        Ok(SparseFunction { support })
    }
}

/// `j ↦ M∘ g` on `T_j` for `j <= j_max`.
pub fn maximal_level_profile<S: Scalar>(
    tree: &TreeParams,
    g: &LevelFunction<S>,
    j_max: usize,
) -> LevelFunction<S> {
    LevelFunction {
        values: (0..=j_max)
            .map(|j| g.maximal_at(tree, j, Geometry::Sphere).value)
            .collect(),
    }
}

impl<S: Scalar> TestFunction<S> for LevelFunction<S> {
    fn value(&self, x: &Vertex) -> S {
        self.at(x.depth())
    }

    fn max_support_depth(&self) -> Option<usize> {
        self.support_depth()
    }

    fn pair_sum(&self, tree: &TreeParams, x: &Vertex, r: usize) -> S {
        self.pair_sum_at(tree, x.depth(), r)
    }

    fn sphere_average(&self, tree: &TreeParams, x: &Vertex, r: usize) -> S {
        self.sphere_average_at(tree, x.depth(), r)
    }
}

impl<S: Scalar> SparseFunction<S> {
    pub fn new(support: BTreeMap<Vertex, S>) -> Result<Self> {
        if support.values().any(|v| *v < S::zero()) {
            return Err(Error::Precondition("test functions must be nonnegative".into()));
        }
        let support = support.into_iter().filter(|(_, v)| *v != S::zero()).collect();
        Ok(SparseFunction { support })
    }

    /// `χ_A` for a finite set `A`.
    pub fn indicator<'a>(set: impl IntoIterator<Item = &'a Vertex>) -> Self {
        SparseFunction {
            support: set.into_iter().map(|v| (v.clone(), S::one())).collect(),
        }
    }

    pub fn delta(x: Vertex) -> Self {
        let mut support = BTreeMap::new();
        support.insert(x, S::one());
        SparseFunction { support }
    }

    pub fn support(&self) -> &BTreeMap<Vertex, S> {
        &self.support
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    /// `Σ_{d(x,y)=s} f(y)` for every `s <= r_max`, in one pass over the support.
    pub fn radial_sums(&self, x: &Vertex, r_max: usize) -> Vec<S> {
        let mut sums = vec![S::zero(); r_max + 1];
        for (y, v) in &self.support {
            let d = distance(x, y);
            if d <= r_max {
                sums[d] = sums[d].clone() + v.clone();
            }
        }
        sums
    }
}

impl<S: Scalar> TestFunction<S> for SparseFunction<S> {
    fn value(&self, x: &Vertex) -> S {
        self.support.get(x).cloned().unwrap_or_else(S::zero)
    }

    fn max_support_depth(&self) -> Option<usize> {
        self.support.keys().map(Vertex::depth).max()
    }

    fn pair_sum(&self, _tree: &TreeParams, x: &Vertex, r: usize) -> S {
        self.support
            .iter()
            .filter(|(y, _)| distance(x, y) == r)
            .fold(S::zero(), |acc, (_, v)| acc + v.clone())
    }

    fn sphere_averages(&self, tree: &TreeParams, x: &Vertex, r_max: usize) -> Vec<S> {
        let j = x.depth();
        self.radial_sums(x, r_max)
            .into_iter()
            .enumerate()
            .map(|(r, s)| s / S::from_count(&tree.sphere_size(j, r)))
            .collect()
    }
}
