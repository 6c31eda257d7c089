//! Seeded random instances for test corpora.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::MetricError;
use crate::metric::FiniteMetricSpace;
use crate::rational::{int, ratio, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    /// Points sampled among the nodes of a random weighted tree.
    RandomTreeMetric,
    /// Leaves of a random hierarchical clustering with increasing heights.
    RandomUltrametric,
    /// Points on a cycle with edge lengths in `[1, 3/2]`.
    PerturbedNonHyperbolic,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 3] = [
        InstanceKind::RandomTreeMetric,
        InstanceKind::RandomUltrametric,
        InstanceKind::PerturbedNonHyperbolic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::RandomTreeMetric => "random-tree-metric",
            InstanceKind::RandomUltrametric => "random-ultrametric",
            InstanceKind::PerturbedNonHyperbolic => "perturbed-non-hyperbolic",
        }
    }

    /// Smallest supported size.
    pub fn min_size(self) -> usize {
        match self {
            InstanceKind::PerturbedNonHyperbolic => 4,
            _ => 1,
        }
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InstanceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown instance kind {s:?}"))
    }
}

/// Deterministic in `(kind, size, seed)`. Labels are `p00, p01, ...`; the base
/// is `p00`.
pub fn gen_instance(kind: InstanceKind, size: usize, seed: u64) -> Result<FiniteMetricSpace, MetricError> {
    if size < kind.min_size() {
        return Err(MetricError::TooFewPoints { needed: kind.min_size(), got: size });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = match kind {
        InstanceKind::RandomTreeMetric => tree_metric(&mut rng, size),
        InstanceKind::RandomUltrametric => ultrametric(&mut rng, size),
        InstanceKind::PerturbedNonHyperbolic => cycle_metric(&mut rng, size),
    };
    let width = if size > 100 { 3 } else { 2 };
    let labels: Vec<String> = (0..size).map(|i| format!("p{i:0width$}")).collect();
    let base = labels[0].clone();
    FiniteMetricSpace::new(labels, &base, dist)
}

fn length(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.gen_range(1..=12), rng.gen_range(1..=4))
}

fn tree_metric(rng: &mut ChaCha8Rng, size: usize) -> Vec<Vec<Rational>> {
    let extra = rng.gen_range(0..=size / 2 + 1);
    let nodes = size + extra;
    // parent[i] < i, so node 0 is the root
    let mut adj: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); nodes];
    for i in 1..nodes {
        let parent = rng.gen_range(0..i);
        let len = length(rng);
        adj[i].push((parent, len.clone()));
        adj[parent].push((i, len));
    }
    let mut chosen: Vec<usize> = (0..nodes).collect();
    chosen.shuffle(rng);
    chosen.truncate(size);
    chosen
        .iter()
        .map(|&src| {
            let from_src = tree_distances(&adj, src);
            chosen.iter().map(|&dst| from_src[dst].clone()).collect()
        })
        .collect()
}

fn tree_distances(adj: &[Vec<(usize, Rational)>], src: usize) -> Vec<Rational> {
    let mut dist = vec![Rational::zero(); adj.len()];
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![src];
    seen[src] = true;
    while let Some(v) = stack.pop() {
        for (w, len) in &adj[v] {
            if !seen[*w] {
                seen[*w] = true;
                dist[*w] = &dist[v] + len;
                stack.push(*w);
            }
        }
    }
    dist
}

fn ultrametric(rng: &mut ChaCha8Rng, size: usize) -> Vec<Vec<Rational>> {
    let mut dist = vec![vec![Rational::zero(); size]; size];
    let mut clusters: Vec<Vec<usize>> = (0..size).map(|i| vec![i]).collect();
    let mut height = Rational::zero();
    while clusters.len() > 1 {
        height += length(rng);
        let a = rng.gen_range(0..clusters.len());
        let first = clusters.swap_remove(a);
        let b = rng.gen_range(0..clusters.len());
        let second = clusters.swap_remove(b);
        for &x in &first {
            for &y in &second {
                dist[x][y] = height.clone();
                dist[y][x] = height.clone();
            }
        }
        clusters.push([first, second].concat());
    }
    dist
}

fn cycle_metric(rng: &mut ChaCha8Rng, size: usize) -> Vec<Vec<Rational>> {
    let edges: Vec<Rational> = (0..size).map(|_| int(1) + ratio(rng.gen_range(0..=8), 16)).collect();
    let total: Rational = edges.iter().sum();
    let mut position = vec![Rational::zero(); size];
    for i in 1..size {
        position[i] = &position[i - 1] + &edges[i - 1];
    }
    (0..size)
        .map(|i| {
            (0..size)
                .map(|j| {
                    let arc = if i <= j { &position[j] - &position[i] } else { &position[i] - &position[j] };
                    let other = &total - &arc;
                    arc.min(other)
                })
                .collect()
        })
        .collect()
}
