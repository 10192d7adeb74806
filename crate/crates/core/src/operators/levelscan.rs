//! Log-domain evaluation of level functions over long level horizons.
//!
//! Same quantities as [`LevelFunction::maximal_at`](super::LevelFunction),
//! but every average is carried as `log_k`, so horizons of hundreds of
//! levels with weights like `k^{p j}` never overflow.

use crate::geometry::{SphereLevelSlice, TreeParams};
use crate::logk::{self, LOG_ZERO};

use super::{Geometry, LevelFunction};

/// Support of a level function as `(level, log_k g(level))`.
#[derive(Debug, Clone)]
pub struct LogSupport {
    entries: Vec<(usize, f64)>,
}

impl LogSupport {
    pub fn new(k: u32, g: &LevelFunction<f64>) -> Self {
        let entries = g
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(|(i, v)| (i, logk::from_linear(k, *v)))
            .collect();
        LogSupport { entries }
    }

    pub fn from_logk(entries: Vec<(usize, f64)>) -> Self {
        LogSupport { entries }
    }

    pub fn max_depth(&self) -> Option<usize> {
        self.entries.iter().map(|e| e.0).max()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    /// `log_k Σ_i g(i) k^i`; the geometric tail bound below is this minus `j`.
    fn moment_logk(&self, k: u32) -> f64 {
        logk::sum(k, self.entries.iter().map(|&(i, g)| g + i as f64))
    }

    /// Certified bound on `log_k M∘ g` at every level `>= j`, valid for `j`
    /// beyond the support: a geodesic from depth `j` must climb at least
    /// `j - i` edges to reach level `i`, and that slice holds at most a
    /// `k^{-(j-i)}` share of the sphere.
    pub fn tail_bound_logk(&self, k: u32, j: usize) -> f64 {
        self.moment_logk(k) - j as f64
    }
}

/// `log_k A_r∘ g` on level `j`.
pub fn sphere_average_logk(tree: &TreeParams, g: &LogSupport, j: usize, r: usize) -> f64 {
    let size = tree.sphere_size_logk(j, r);
    logk::sum(
        tree.k(),
        g.entries.iter().filter_map(|&(i, gi)| {
            SphereLevelSlice::between(j, i, r)
                .map(|s| tree.sphere_level_count_logk(j, r, s.up_steps) - size + gi)
        }),
    )
}

/// Maximal function profile on levels `0..=j_max` with the maximizing radii.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelProfile {
    pub values_logk: Vec<f64>,
    pub radii: Vec<usize>,
}

/// `log_k` of the maximal function on one level.
pub fn maximal_at_logk(
    tree: &TreeParams,
    g: &LogSupport,
    j: usize,
    geometry: Geometry,
) -> (f64, usize) {
    let Some(depth) = g.max_depth() else {
        return (LOG_ZERO, 0);
    };
    let horizon = j + depth;
    let k = tree.k();
    let mut best = (LOG_ZERO, 0);
    let mut num = LOG_ZERO;
    let mut den = LOG_ZERO;
    for r in 0..=horizon {
        let a = sphere_average_logk(tree, g, j, r);
        let value = match geometry {
            Geometry::Sphere => a,
            Geometry::Ball => {
                let size = tree.sphere_size_logk(j, r);
                num = logk::add(k, num, size + a);
                den = logk::add(k, den, size);
                num - den
            }
        };
        if value > best.0 {
            best = (value, r);
        }
    }
    best
}

pub fn maximal_profile_logk(
    tree: &TreeParams,
    g: &LogSupport,
    j_max: usize,
    geometry: Geometry,
) -> LevelProfile {
    let (values_logk, radii) = (0..=j_max)
        .map(|j| maximal_at_logk(tree, g, j, geometry))
        .unzip();
    LevelProfile { values_logk, radii }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use crate::scalar::Scalar;

    #[test]
    fn agrees_with_exact_profile() {
        for k in [2u32, 3] {
            let t = TreeParams::new(k).unwrap();
            let g = LevelFunction::<BigRational>::new(
                [0i64, 3, 0, 1, 2]
                    .iter()
                    .map(|v| BigRational::from_integer((*v).into()))
                    .collect(),
            )
            .unwrap();
            let gf = g.map(|v| v.as_f64());
            let sup = LogSupport::new(k, &gf);
            for geometry in [Geometry::Sphere, Geometry::Ball] {
                let prof = maximal_profile_logk(&t, &sup, 9, geometry);
                for j in 0..=9 {
                    let exact = g.maximal_at(&t, j, geometry);
                    let fast = logk::to_linear(k, prof.values_logk[j]);
                    let e = exact.value.as_f64();
                    assert!((fast - e).abs() <= 1e-12 * e, "k={k} j={j} {geometry:?}");
                    // float near-ties may pick another maximizing radius
                    let at = if geometry == Geometry::Sphere {
                        g.sphere_average_at(&t, j, prof.radii[j])
                    } else {
                        g.ball_average_at(&t, j, prof.radii[j])
                    };
                    assert!((at.as_f64() - e).abs() <= 1e-12 * e);
                }
            }
        }
    }

    #[test]
    fn tail_bound_dominates() {
        let t = TreeParams::new(2).unwrap();
        let g = LevelFunction::<f64>::new(vec![0.5, 0.0, 2.0]).unwrap();
        let sup = LogSupport::new(2, &g);
        let prof = maximal_profile_logk(&t, &sup, 40, Geometry::Sphere);
        for j in 3..=40 {
            assert!(prof.values_logk[j] <= sup.tail_bound_logk(2, j) + 1e-12);
        }
    }

    #[test]
    fn deep_levels_stay_finite() {
        let t = TreeParams::new(5).unwrap();
        let sup = LogSupport::new(5, &LevelFunction::indicator(3));
        let (v, r) = maximal_at_logk(&t, &sup, 900, Geometry::Sphere);
        assert!(v.is_finite());
        assert_eq!(r, 897);
    }
}
