//! A brute-force truncated tree for tests: explicit adjacency lists and
//! breadth-first search, sharing no code with the library's geometry.

#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use ktree::{TreeParams, Vertex};

pub struct BruteTree {
    pub k: u32,
    pub depth: usize,
    pub paths: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    adj: Vec<Vec<usize>>,
}

impl BruteTree {
    pub fn new(k: u32, depth: usize) -> Self {
        let mut paths = vec![Vec::new()];
        let mut adj: Vec<Vec<usize>> = vec![Vec::new()];
        let mut head = 0;
        while head < paths.len() {
            if paths[head].len() < depth {
                for d in 0..k {
                    let mut c = paths[head].clone();
                    c.push(d);
                    let id = paths.len();
                    paths.push(c);
                    adj.push(vec![head]);
                    adj[head].push(id);
                }
            }
            head += 1;
        }
        let index = paths.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        BruteTree { k, depth, paths, index, adj }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn id(&self, path: &[u32]) -> usize {
        self.index[path]
    }

    pub fn id_of(&self, v: &Vertex) -> usize {
        self.index[v.path()]
    }

    pub fn vertex(&self, tree: &TreeParams, id: usize) -> Vertex {
        tree.vertex(self.paths[id].clone()).unwrap()
    }

    pub fn level(&self, id: usize) -> usize {
        self.paths[id].len()
    }

    pub fn bfs(&self, from: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        dist[from] = 0;
        let mut q = VecDeque::from([from]);
        while let Some(u) = q.pop_front() {
            for &v in &self.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        dist
    }

    pub fn leftmost(&self, depth: usize) -> usize {
        self.id(&vec![0; depth])
    }

    pub fn rightmost(&self, depth: usize) -> usize {
        self.id(&vec![self.k - 1; depth])
    }
}
