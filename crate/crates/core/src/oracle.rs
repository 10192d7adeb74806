//! Brute-force reference evaluator on a materialized truncated tree.
//!
//! Distances come from breadth-first search over explicit parent/child
//! links, never from root paths, and every average is a literal sum over the
//! enumerated sphere or ball. The closed forms elsewhere in the crate are
//! checked against this module.

use std::collections::HashMap;
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geometry::{TreeParams, Vertex};
use crate::operators::{Geometry, Maximum};
use crate::scalar::Scalar;

pub struct MaterializedTree {
    tree: TreeParams,
    depth: usize,
    vertices: Vec<Vertex>,
    index: HashMap<Vertex, usize>,
    neighbors: Vec<Vec<usize>>,
}

impl MaterializedTree {
    pub fn new(tree: TreeParams, depth: usize, budget: u128) -> Result<Self> {
        let vertices = tree.materialize(depth, budget)?;
        let index: HashMap<Vertex, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let mut neighbors = vec![Vec::new(); vertices.len()];
        for (i, v) in vertices.iter().enumerate() {
            if let Some(p) = v.parent() {
                let pi = index[&p];
                neighbors[i].push(pi);
                neighbors[pi].push(i);
            }
        }
        Ok(MaterializedTree {
            tree,
            depth,
            vertices,
            index,
            neighbors,
        })
    }

    pub fn tree(&self) -> &TreeParams {
        &self.tree
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn id(&self, v: &Vertex) -> Option<usize> {
        self.index.get(v).copied()
    }

    fn require(&self, v: &Vertex) -> Result<usize> {
        self.id(v).ok_or_else(|| {
            Error::Precondition(format!("{v} lies outside the truncation at depth {}", self.depth))
        })
    }

    /// BFS distances from `x` to every materialized vertex.
    pub fn distances_from(&self, x: &Vertex) -> Result<Vec<usize>> {
        let start = self.require(x)?;
        let mut dist = vec![usize::MAX; self.vertices.len()];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &n in &self.neighbors[u] {
                if dist[n] == usize::MAX {
                    dist[n] = dist[u] + 1;
                    queue.push_back(n);
                }
            }
        }
        Ok(dist)
    }

    pub fn distance(&self, x: &Vertex, y: &Vertex) -> Result<usize> {
        let d = self.distances_from(x)?;
        Ok(d[self.require(y)?])
    }

    fn check_fits(&self, x: &Vertex, r: usize) -> Result<()> {
        if x.depth() + r > self.depth {
            return Err(Error::Precondition(format!(
                "radius {r} around depth {} leaves the truncation at {}",
                x.depth(),
                self.depth
            )));
        }
        Ok(())
    }

    /// `S(x, s)` for every `s <= r`, as vertex ids.
    pub fn shells(&self, x: &Vertex, r: usize) -> Result<Vec<Vec<usize>>> {
        self.check_fits(x, r)?;
        let dist = self.distances_from(x)?;
        let mut shells = vec![Vec::new(); r + 1];
        for (i, d) in dist.into_iter().enumerate() {
            if d <= r {
                shells[d].push(i);
            }
        }
        Ok(shells)
    }

    pub fn sphere(&self, x: &Vertex, r: usize) -> Result<Vec<&Vertex>> {
        let shells = self.shells(x, r)?;
        Ok(shells[r].iter().map(|&i| &self.vertices[i]).collect())
    }

    /// Sphere and ball averages of `f` around `x` for radii `0..=r`, by
    /// literal summation.
    pub fn averages<S: Scalar>(
        &self,
        f: &dyn Fn(&Vertex) -> S,
        x: &Vertex,
        r: usize,
    ) -> Result<(Vec<S>, Vec<S>)> {
        let shells = self.shells(x, r)?;
        let mut spheres = Vec::with_capacity(r + 1);
        let mut balls = Vec::with_capacity(r + 1);
        let mut ball_sum = S::zero();
        let mut ball_count = 0u64;
        for shell in &shells {
            let s = shell
                .iter()
                .fold(S::zero(), |a, &i| a + f(&self.vertices[i]));
            ball_sum = ball_sum + s.clone();
            ball_count += shell.len() as u64;
            let n = S::from_u64(shell.len() as u64).expect("count fits");
            spheres.push(s / n);
            balls.push(ball_sum.clone() / S::from_u64(ball_count).expect("count fits"));
        }
        Ok((spheres, balls))
    }

    /// Maximal function over radii `0..=r_max`, smallest radius on ties.
    pub fn maximal<S: Scalar>(
        &self,
        f: &dyn Fn(&Vertex) -> S,
        x: &Vertex,
        r_max: usize,
        geometry: Geometry,
    ) -> Result<Maximum<S>> {
        let (spheres, balls) = self.averages(f, x, r_max)?;
        let values = match geometry {
            Geometry::Sphere => spheres,
            Geometry::Ball => balls,
        };
        let mut best = Maximum {
            value: values[0].clone(),
            radius: 0,
        };
        for (r, v) in values.into_iter().enumerate().skip(1) {
            if v > best.value {
                best = Maximum { value: v, radius: r };
            }
        }
        Ok(best)
    }

    /// `Σ_{x∈E} Σ_{y∈F, d(x,y)=r} w(y)`.
    pub fn pair_measure<S: Scalar>(
        &self,
        w: &dyn Fn(&Vertex) -> S,
        e: &[Vertex],
        f: &[Vertex],
        r: usize,
    ) -> Result<S> {
        let f_ids = f.iter().map(|y| self.require(y)).collect::<Result<Vec<_>>>()?;
        let mut acc = S::zero();
        for x in e {
            let dist = self.distances_from(x)?;
            for (&i, y) in f_ids.iter().zip(f) {
                if dist[i] == r {
                    acc = acc + w(y);
                }
            }
        }
        Ok(acc)
    }

    /// Histogram of `|T_i ∩ S(x, r)|` over target depths `i`.
    pub fn level_counts(&self, x: &Vertex, r: usize) -> Result<Vec<usize>> {
        let mut counts = vec![0; self.depth + 1];
        for v in self.sphere(x, r)? {
            counts[v.depth()] += 1;
        }
        Ok(counts)
    }
}
