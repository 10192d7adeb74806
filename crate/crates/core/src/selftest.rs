//! Oracle-equivalence suites: closed forms and fast paths against literal
//! enumeration on a materialized truncated tree. Each suite returns the
//! number of comparisons made, or the first mismatch.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::conditions::{
    levelwise_cell_logk, pair_measure_exact, pair_measure_levels, pair_measure_via_averages,
    rho_objective, rho_optimize, suffcond_ratio_levels_logk, suffcond_ratio_logk, SuffParams,
};
use crate::error::{Error, Result};
use crate::geometry::{TreeParams, Vertex, DEFAULT_NODE_BUDGET};
use crate::logk;
use crate::operators::{ball_average, maximal_ball, maximal_sphere, radius_horizon};
use crate::operators::{Geometry, LevelFunction, SparseFunction, TestFunction};
use crate::oracle::MaterializedTree;
use crate::scalar::Scalar;
use crate::weights::{Exponent, LevelWeight, LevelWeightPair, Weight, WeightPair};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteOutcome {
    pub suite: &'static str,
    pub checks: usize,
}

fn mismatch(what: impl std::fmt::Display) -> Error {
    Error::OracleMismatch(what.to_string())
}

fn expect_eq<T: PartialEq + std::fmt::Debug>(what: &str, fast: T, brute: T) -> Result<()> {
    if fast == brute {
        Ok(())
    } else {
        Err(mismatch(format!("{what}: fast {fast:?}, enumeration {brute:?}")))
    }
}

fn rightmost(tree: &TreeParams, depth: usize) -> Vertex {
    let mut v = tree.root();
    for _ in 0..depth {
        v = v.child(tree.k() - 1);
    }
    v
}

/// Sphere level counts, sphere sizes and ball sizes for every
/// `(j, r, m)` with `j + r <= max_total`, exactly.
pub fn geometry_suite(ks: &[u32], max_total: usize) -> Result<SuiteOutcome> {
    let mut checks = 0;
    for &k in ks {
        let tree = TreeParams::new(k)?;
        let mat = MaterializedTree::new(tree, max_total, DEFAULT_NODE_BUDGET)?;
        for j in 0..=max_total {
            for x in [tree.leftmost(j), rightmost(&tree, j)] {
                let dist = mat.distances_from(&x)?;
                let reach = max_total - j;
                // hist[r][i] = |S(x, r) ∩ T_i|
                let mut hist = vec![vec![0u64; max_total + 1]; reach + 1];
                for (v, &d) in mat.vertices().iter().zip(&dist) {
                    if d <= reach {
                        hist[d][v.depth()] += 1;
                    }
                }
                let mut ball = 0u64;
                for (r, row) in hist.iter().enumerate() {
                    for m in 0..=r {
                        let brute = if j + r >= 2 * m { row[j + r - 2 * m] } else { 0 };
                        let what = format!("k={k} j={j} r={r} m={m} level count");
                        expect_eq(&what, tree.sphere_level_count(j, r, m), BigUint::from(brute))?;
                        checks += 1;
                    }
                    let size: u64 = row.iter().sum();
                    ball += size;
                    expect_eq(&format!("k={k} j={j} r={r} sphere size"), tree.sphere_size(j, r), BigUint::from(size))?;
                    expect_eq(&format!("k={k} j={j} r={r} ball size"), tree.ball_size(j, r), BigUint::from(ball))?;
                    checks += 2;
                }
            }
        }
    }
    Ok(SuiteOutcome { suite: "geometry", checks })
}

fn random_vertex<R: Rng>(tree: &TreeParams, rng: &mut R, max_depth: usize) -> Vertex {
    let d = rng.gen_range(0..=max_depth);
    let mut v = tree.root();
    for _ in 0..d {
        v = v.child(rng.gen_range(0..tree.k()));
    }
    v
}

fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    Rational::new(rng.gen_range(1..=9i64).into(), rng.gen_range(1..=4i64).into())
}

fn random_sparse<R: Rng>(tree: &TreeParams, rng: &mut R, max_depth: usize) -> SparseFunction<Rational> {
    let n = rng.gen_range(1..=5);
    let support = (0..n)
        .map(|_| (random_vertex(tree, rng, max_depth), random_rational(rng)))
        .collect();
    SparseFunction::new(support).expect("positive values")
}

fn random_set<R: Rng>(tree: &TreeParams, rng: &mut R, max_depth: usize) -> BTreeSet<Vertex> {
    (0..rng.gen_range(1..=6))
        .map(|_| random_vertex(tree, rng, max_depth))
        .collect()
}

/// Small materialized trees for `k = 2, 3`; supports live at depth
/// `<= SUPPORT` and radii are at most `RADIUS`, so every sphere and every
/// maximal-function horizon fits.
const SUPPORT: usize = 3;
const RADIUS: usize = 3;

fn oracles() -> Result<Vec<MaterializedTree>> {
    [2u32, 3]
        .into_iter()
        .map(|k| MaterializedTree::new(TreeParams::new(k)?, 2 * SUPPORT + RADIUS, DEFAULT_NODE_BUDGET))
        .collect()
}

/// Per instance: sphere and ball averages against enumeration, `A_r 1 = 1`,
/// `M f <= M∘ f` with both maximal functions against enumeration, and
/// `Σ g P_r f = Σ f P_r g`, all in exact rationals.
pub fn operators_suite(instances: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trees = oracles()?;
    let mut checks = 0;
    for n in 0..instances {
        let mat = &trees[n % trees.len()];
        let tree = *mat.tree();
        let f = random_sparse(&tree, &mut rng, SUPPORT);
        let g = random_sparse(&tree, &mut rng, SUPPORT);
        let x = random_vertex(&tree, &mut rng, SUPPORT);
        let r = rng.gen_range(0..=RADIUS);
        let fv = |v: &Vertex| f.value(v);

        let (spheres, balls) = mat.averages(&fv, &x, r)?;
        expect_eq(&format!("instance {n}: sphere averages at {x}"), f.sphere_averages(&tree, &x, r), spheres)?;
        expect_eq(&format!("instance {n}: ball average at {x}, r={r}"), ball_average(&f, &tree, &x, r), balls[r].clone())?;

        let ones = LevelFunction::<Rational>::ones(x.depth() + r);
        expect_eq(&format!("instance {n}: A_{r} 1 at depth {}", x.depth()), ones.sphere_average(&tree, &x, r), Rational::one())?;

        let h = radius_horizon(&f, &x);
        let ms = maximal_sphere(&f, &tree, &x);
        let mb = maximal_ball(&f, &tree, &x);
        if mb.value > ms.value {
            return Err(mismatch(format!("instance {n}: M f > M∘ f at {x}")));
        }
        expect_eq(&format!("instance {n}: M∘ f at {x}"), ms.value.clone(), mat.maximal(&fv, &x, h, Geometry::Sphere)?.value)?;
        expect_eq(&format!("instance {n}: M f at {x}"), mb.value.clone(), mat.maximal(&fv, &x, h, Geometry::Ball)?.value)?;

        let lhs = g
            .support()
            .iter()
            .fold(Rational::zero(), |a, (y, gy)| a + gy * f.pair_sum(&tree, y, r));
        let rhs = f
            .support()
            .iter()
            .fold(Rational::zero(), |a, (y, fy)| a + fy * g.pair_sum(&tree, y, r));
        expect_eq(&format!("instance {n}: P_{r} self-adjointness"), lhs, rhs)?;
        checks += 6;
    }
    Ok(SuiteOutcome { suite: "operators", checks })
}

/// Per instance: the pair measure three ways (distance filter, averages of
/// `χ_F w`, breadth-first search), the level-slice closed form against
/// enumeration, and the ratio for level unions through both code paths.
pub fn conditions_suite(instances: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trees = oracles()?;
    let mut checks = 0;
    for n in 0..instances {
        let mat = &trees[n % trees.len()];
        let tree = *mat.tree();
        let k = tree.k();
        let a = Exponent::from(rng.gen_range(-2i64..=2));
        let lw = LevelWeight::power(a);
        let w = Weight::level(lw.clone());
        let wv = |v: &Vertex| Rational::k_pow(k, a * Exponent::from(v.depth() as i64)).expect("integer exponent");
        let r = rng.gen_range(0..=RADIUS);

        let e = random_set(&tree, &mut rng, SUPPORT);
        let f = random_set(&tree, &mut rng, SUPPORT);
        let el: Vec<Vertex> = e.iter().cloned().collect();
        let fl: Vec<Vertex> = f.iter().cloned().collect();
        let brute = mat.pair_measure(&wv, &el, &fl, r)?;
        expect_eq(&format!("instance {n}: pair measure"), pair_measure_exact::<Rational>(&tree, &w, &e, &f, r)?, brute.clone())?;
        expect_eq(&format!("instance {n}: pair measure via averages"), pair_measure_via_averages::<Rational>(&tree, &w, &e, &f, r)?, brute)?;

        let mut levels: Vec<usize> = (0..=SUPPORT).collect();
        levels.shuffle(&mut rng);
        let (e_lv, f_lv) = levels.split_at(rng.gen_range(1..levels.len()));
        let level_set = |ls: &[usize]| -> Result<Vec<Vertex>> {
            Ok(ls.iter().map(|&j| tree.level_vertices(j, DEFAULT_NODE_BUDGET)).collect::<Result<Vec<_>>>()?.concat())
        };
        let (es, fs) = (level_set(e_lv)?, level_set(f_lv)?);
        expect_eq(
            &format!("instance {n}: level pair measure {e_lv:?} x {f_lv:?}"),
            pair_measure_levels::<Rational>(&tree, &lw, e_lv, f_lv, r)?,
            mat.pair_measure(&wv, &es, &fs, r)?,
        )?;

        let sp = SuffParams { p: 2.0, beta: 0.5, alpha: 1.0 };
        let ratio_sets = suffcond_ratio_logk(
            &tree,
            &WeightPair::single(w.clone()),
            sp,
            &es.iter().cloned().collect(),
            &fs.iter().cloned().collect(),
            r,
        )?;
        let ratio_levels = suffcond_ratio_levels_logk(&tree, &LevelWeightPair::single(lw.clone()), sp, e_lv, f_lv, r)?;
        if !((ratio_sets - ratio_levels).abs() <= 1e-9 || ratio_sets == ratio_levels) {
            return Err(mismatch(format!("instance {n}: level ratio {ratio_levels} vs set ratio {ratio_sets}")));
        }

        let j = rng.gen_range(0..=SUPPORT);
        let counts = mat.level_counts(&tree.leftmost(j), r)?;
        let m = rng.gen_range(0..=r.min(j));
        let i = j + r - 2 * m;
        let p = 2.0;
        let delta = -1.0;
        let cell = levelwise_cell_logk(&tree, &lw, p, delta, j, r, m);
        let expect = logk::from_linear(k, counts[i] as f64) + lw.log_value(i)
            - (r - m) as f64 * (p - delta)
            - r as f64 * delta
            - lw.log_value(j);
        if (cell - expect).abs() > 1e-9 {
            return Err(mismatch(format!("instance {n}: level-wise cell ({j},{r},{m}) {cell} vs {expect}")));
        }

        let rp = rng.gen_range(1.1..4.0);
        let rd = rng.gen_range(-2.0..0.9);
        let (we, wf) = (rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0));
        let rr = rng.gen_range(0.0..6.0);
        let opt = rho_optimize(k, rp, rd, rr, we, wf)?;
        for step in [-0.01, 0.01] {
            let nearby = rho_objective(k, rp, rd, rr, we, wf, opt.rho + step);
            if nearby < opt.value * (1.0 - 1e-12) {
                return Err(mismatch(format!("instance {n}: rho* = {} is not a minimizer", opt.rho)));
            }
        }
        checks += 6;
    }
    Ok(SuiteOutcome { suite: "conditions", checks })
}

/// Which suites back each command family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Module {
    Geometry,
    Operators,
    Conditions,
    Experiments,
}

pub fn run(module: Module, seed: u64) -> Result<Vec<SuiteOutcome>> {
    Ok(match module {
        Module::Geometry => vec![geometry_suite(&[2, 3], 10)?],
        Module::Operators => vec![operators_suite(1000, seed)?],
        Module::Conditions => vec![conditions_suite(300, seed)?],
        Module::Experiments => vec![
            geometry_suite(&[2, 3], 8)?,
            operators_suite(300, seed)?,
            conditions_suite(100, seed)?,
        ],
    })
}
