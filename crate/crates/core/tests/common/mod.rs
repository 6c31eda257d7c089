//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lipfree_core::generate::{gen_instance, InstanceKind};
use lipfree_core::rational::{int, ratio};
use lipfree_core::{FiniteMetricSpace, FreeVector, LipFunction, Rational, RealizedTree};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` tree metrics with sizes cycling through `lo..=hi`.
pub fn tree_corpus(count: u64, lo: usize, hi: usize) -> Vec<FiniteMetricSpace> {
    (0..count)
        .map(|seed| {
            let size = lo + (seed as usize) % (hi - lo + 1);
            gen_instance(InstanceKind::RandomTreeMetric, size, seed).unwrap()
        })
        .collect()
}

pub fn ultra_corpus(count: u64, lo: usize, hi: usize) -> Vec<FiniteMetricSpace> {
    (0..count)
        .map(|seed| {
            let size = lo + (seed as usize) % (hi - lo + 1);
            gen_instance(InstanceKind::RandomUltrametric, size, 1000 + seed).unwrap()
        })
        .collect()
}

/// The path metric on every node of a realized tree, Steiner nodes included
/// (labelled `s<id>`). Its own tree has no missing branch points.
pub fn all_nodes_space(space: &FiniteMetricSpace, tree: &RealizedTree) -> FiniteMetricSpace {
    let labels: Vec<String> = (0..tree.node_count())
        .map(|v| match tree.point_of(v) {
            Some(p) => space.label(p).to_string(),
            None => format!("s{v}"),
        })
        .collect();
    let dist = (0..tree.node_count())
        .map(|a| (0..tree.node_count()).map(|b| tree.distance(a, b).clone()).collect())
        .collect();
    FiniteMetricSpace::new(labels, space.label(space.base()), dist).unwrap()
}

/// The restriction to the points at leaves of the realized tree, based at
/// the first of them. No leaf lies between two others, so `sep > 0` once
/// there are three leaves.
pub fn leaf_space(space: &FiniteMetricSpace) -> FiniteMetricSpace {
    let tree = lipfree_core::realize(space).unwrap();
    let leaves: Vec<usize> = (0..space.len()).filter(|&p| tree.degree(tree.node_of(p)) == 1).collect();
    space.rebased(leaves[0]).subspace(&leaves)
}

pub fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.gen_range(-6..=6), rng.gen_range(1..=3))
}

pub fn random_vector(rng: &mut ChaCha8Rng, space: &FiniteMetricSpace) -> FreeVector {
    let mut pairs = Vec::new();
    for p in 0..space.len() {
        if rng.gen_bool(0.6) {
            pairs.push((p, small_rational(rng)));
        }
    }
    FreeVector::from_pairs(space, pairs)
}

/// A 1-Lipschitz function built point by point in a random order, each new
/// value chosen inside the interval allowed by the earlier ones: at an end
/// (tight to an earlier point) with probability `tight`, else inside.
pub fn random_lipschitz(rng: &mut ChaCha8Rng, space: &FiniteMetricSpace, tight: f64) -> LipFunction {
    let n = space.len();
    let mut order: Vec<usize> = (0..n).filter(|&p| p != space.base()).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), rng);
    let mut values: Vec<Option<Rational>> = vec![None; n];
    values[space.base()] = Some(Rational::zero());
    for p in order {
        let known: Vec<(usize, Rational)> = values
            .iter()
            .enumerate()
            .filter_map(|(z, v)| v.clone().map(|v| (z, v)))
            .collect();
        let lo = known.iter().map(|(z, v)| v - space.d(*z, p)).max().unwrap();
        let hi = known.iter().map(|(z, v)| v + space.d(*z, p)).min().unwrap();
        let v = if rng.gen_bool(tight) {
            if rng.gen_bool(0.5) { lo } else { hi }
        } else {
            let t = ratio(rng.gen_range(1..=7), 8);
            &lo + (&hi - &lo) * t
        };
        values[p] = Some(v);
    }
    LipFunction::new(space, values.into_iter().map(Option::unwrap).collect()).unwrap()
}

/// Minimum transport cost of a zero-sum `mass` by enumerating every vertex
/// of the bipartite transportation polytope: each basis is a spanning tree
/// of the supply/demand graph, solved by peeling leaves.
pub fn brute_transport(space: &FiniteMetricSpace, mass: &[Rational]) -> Rational {
    let supply: Vec<usize> = (0..mass.len()).filter(|&p| mass[p].is_positive()).collect();
    let demand: Vec<usize> = (0..mass.len()).filter(|&p| mass[p].is_negative()).collect();
    if supply.is_empty() {
        return Rational::zero();
    }
    let (s, t) = (supply.len(), demand.len());
    let arcs: Vec<(usize, usize)> = (0..s).flat_map(|i| (0..t).map(move |j| (i, s + j))).collect();
    let amount = |v: usize| if v < s { mass[supply[v]].clone() } else { -mass[demand[v - s]].clone() };
    let cost = |(i, j): (usize, usize)| space.d(supply[i], demand[j - s]).clone();

    let mut best: Option<Rational> = None;
    for basis in combinations(arcs.len(), s + t - 1) {
        let chosen: Vec<(usize, usize)> = basis.iter().map(|&k| arcs[k]).collect();
        let Some(flows) = solve_tree(s + t, &chosen, &amount) else { continue };
        if flows.iter().any(|f| f.is_negative()) {
            continue;
        }
        let total: Rational = chosen.iter().zip(&flows).map(|(&a, f)| cost(a) * f).sum();
        if best.as_ref().is_none_or(|b| &total < b) {
            best = Some(total);
        }
    }
    best.expect("the transportation polytope is nonempty")
}

fn solve_tree(
    nodes: usize,
    arcs: &[(usize, usize)],
    amount: &dyn Fn(usize) -> Rational,
) -> Option<Vec<Rational>> {
    let mut remaining: Vec<Rational> = (0..nodes).map(amount).collect();
    let mut flows = vec![None; arcs.len()];
    let mut alive = vec![true; arcs.len()];
    for _ in 0..arcs.len() {
        let degree = |v: usize, alive: &[bool]| {
            arcs.iter()
                .enumerate()
                .filter(|&(k, &(a, b))| alive[k] && (a == v || b == v))
                .count()
        };
        let leaf = (0..nodes).find(|&v| degree(v, &alive) == 1)?;
        let k = (0..arcs.len())
            .find(|&k| alive[k] && (arcs[k].0 == leaf || arcs[k].1 == leaf))
            .unwrap();
        let other = if arcs[k].0 == leaf { arcs[k].1 } else { arcs[k].0 };
        let f = remaining[leaf].clone();
        remaining[other] -= &f;
        remaining[leaf] = Rational::zero();
        flows[k] = Some(f);
        alive[k] = false;
    }
    // a cycle leaves some arc unsolved; a spanning tree balances every node
    if remaining.iter().any(|r| !r.is_zero()) {
        return None;
    }
    flows.into_iter().collect()
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Randomized search for a family of unit vectors of `l_inf^n` whose pairwise
/// midpoints all have norm below one. Returns the largest family found.
pub fn linf_midpoint_family(rng: &mut ChaCha8Rng, n: usize, tries: usize) -> Vec<Vec<Rational>> {
    let norm = |v: &[Rational]| v.iter().map(|x| x.abs()).max().unwrap();
    let mut best: Vec<Vec<Rational>> = Vec::new();
    for _ in 0..tries {
        let mut family: Vec<Vec<Rational>> = Vec::new();
        for _ in 0..(6 * n) {
            let mut v: Vec<Rational> = (0..n).map(|_| ratio(rng.gen_range(-4..=4), 4)).collect();
            let k = rng.gen_range(0..n);
            v[k] = if rng.gen_bool(0.5) { int(1) } else { int(-1) };
            let fits = family.iter().all(|w| {
                let mid: Vec<Rational> = v.iter().zip(w).map(|(a, b)| (a + b) / int(2)).collect();
                norm(&mid) < int(1)
            });
            if fits {
                family.push(v);
            }
        }
        if family.len() > best.len() {
            best = family;
        }
    }
    best
}
