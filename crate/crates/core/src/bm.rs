//! Banach-Mazur lower bounds between `F(M)` and `l1^n`, `n = |M| - 1`.
//!
//! When `sep(M) > 0`, each ordered pair `(x_i, x_j)` has the peaking function
//! `f_ij(z) = d(x_j, pi_ij(z))`, whose slope is one only on `{x_i, x_j}` and at
//! most `1 - sep/diam` elsewhere. Any `2n + 1` norm-one functions whose
//! pairwise midpoints have norm at most `1 - eps` force
//! `d_BM(Lip0(M), l_inf^n) > 1/(1 - eps)`, because the open `l_inf^n` ball is
//! cut out by `2n` halfspaces and each halfspace can be violated by at most one
//! member of such a family. Finite-dimensional duality carries the bound over
//! to `d_BM(F(M), l1^n)`.

use num_traits::{One, Signed, Zero};

use crate::error::BoundError;
use crate::free_space::{lip_norm, LipFunction};
use crate::metric::FiniteMetricSpace;
use crate::rational::{int, Rational};
use crate::tree::RealizedTree;

/// Family sizes up to this use the exact subset search.
pub const EXHAUSTIVE_LIMIT: usize = 30;

fn check_hypotheses(space: &FiniteMetricSpace) -> Result<(Rational, Rational), BoundError> {
    if space.len() < 3 {
        return Err(BoundError::TooFewPoints(space.len()));
    }
    let sep = space.sep().map_err(|_| BoundError::TooFewPoints(space.len()))?;
    if !sep.is_positive() {
        return Err(BoundError::SeparationZero);
    }
    Ok((sep, space.diam()))
}

/// `(1 - sep(M) / (4 diam(M)))^{-1}`.
pub fn bm_lower_formula(space: &FiniteMetricSpace) -> Result<Rational, BoundError> {
    let (sep, diam) = check_hypotheses(space)?;
    Ok((Rational::one() - sep / (int(4) * diam)).recip())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeakingFunction {
    pub i: usize,
    pub j: usize,
    pub f: LipFunction,
}

/// `f_ij` for every ordered pair `i != j`, in lexicographic pair order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeakingFamily {
    pub members: Vec<PeakingFunction>,
}

pub fn peaking_family(space: &FiniteMetricSpace, tree: &RealizedTree) -> Result<PeakingFamily, BoundError> {
    check_hypotheses(space)?;
    let n = space.len();
    let mut members = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let raw = (0..n).map(|z| tree.projection_depth_from(i, j, z)).collect();
            members.push(PeakingFunction { i, j, f: LipFunction::rebased(space, raw) });
        }
    }
    Ok(PeakingFamily { members })
}

fn midpoint_norm(space: &FiniteMetricSpace, a: &LipFunction, b: &LipFunction) -> Rational {
    lip_norm(space, &a.add(b)) / int(2)
}

/// Pairwise midpoint norms, upper triangle filled (`norms[a][b]`, `a < b`).
#[allow(clippy::needless_range_loop)]
pub fn midpoint_norms(space: &FiniteMetricSpace, family: &PeakingFamily) -> Vec<Vec<Rational>> {
    let k = family.members.len();
    let mut norms = vec![vec![Rational::zero(); k]; k];
    for a in 0..k {
        for b in a + 1..k {
            let v = midpoint_norm(space, &family.members[a].f, &family.members[b].f);
            norms[a][b] = v.clone();
            norms[b][a] = v;
        }
    }
    norms
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BmCertificate {
    pub formula_bound: Rational,
    pub certified_bound: Rational,
    pub epsilon: Rational,
    /// Indices into the peaking family, ascending; `2n + 1` of them.
    pub selected: Vec<usize>,
    /// The selected pair with the largest midpoint norm.
    pub worst_pair: (usize, usize),
    pub worst_norm: Rational,
    /// Whether `selected` is optimal (exact search) or greedy.
    pub exhaustive: bool,
    pub family: PeakingFamily,
}

pub fn bm_lower_certified(space: &FiniteMetricSpace, tree: &RealizedTree) -> Result<BmCertificate, BoundError> {
    let formula_bound = bm_lower_formula(space)?;
    let family = peaking_family(space, tree)?;
    let dim = space.len() - 1;
    let wanted = 2 * dim + 1;
    let norms = midpoint_norms(space, &family);
    let size = family.members.len();
    debug_assert!(size >= wanted);

    let (selected, exhaustive) = if size <= EXHAUSTIVE_LIMIT {
        (best_subset(&norms, wanted), true)
    } else {
        (greedy_subset(&norms, wanted), false)
    };
    let (worst_pair, worst_norm) = worst_within(&norms, &selected);
    let epsilon = Rational::one() - &worst_norm;
    let certified_bound = worst_norm.recip();
    Ok(BmCertificate {
        formula_bound,
        certified_bound,
        epsilon,
        selected,
        worst_pair,
        worst_norm,
        exhaustive,
        family,
    })
}

fn worst_within(norms: &[Vec<Rational>], subset: &[usize]) -> ((usize, usize), Rational) {
    let mut worst = ((subset[0], subset[1]), norms[subset[0]][subset[1]].clone());
    for (ia, &a) in subset.iter().enumerate() {
        for &b in &subset[ia + 1..] {
            if norms[a][b] > worst.1 {
                worst = ((a, b), norms[a][b].clone());
            }
        }
    }
    worst
}

/// Lexicographically first `k`-subset minimizing the largest pairwise
/// midpoint norm: binary search over the distinct norm values for the least
/// threshold admitting a `k`-clique in the "midpoint at most threshold" graph.
fn best_subset(norms: &[Vec<Rational>], k: usize) -> Vec<usize> {
    let size = norms.len();
    let mut levels: Vec<Rational> = (0..size)
        .flat_map(|a| (a + 1..size).map(move |b| (a, b)))
        .map(|(a, b)| norms[a][b].clone())
        .collect();
    levels.sort();
    levels.dedup();
    let (mut lo, mut hi) = (0, levels.len() - 1);
    let mut best = clique(norms, &levels[hi], k).expect("the whole family is a clique at the top level");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match clique(norms, &levels[mid], k) {
            Some(found) => {
                best = found;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    best
}

fn clique(norms: &[Vec<Rational>], threshold: &Rational, k: usize) -> Option<Vec<usize>> {
    let size = norms.len();
    let adjacent: Vec<Vec<bool>> = (0..size)
        .map(|a| (0..size).map(|b| a != b && &norms[a][b] <= threshold).collect())
        .collect();
    let mut chosen = Vec::with_capacity(k);
    let candidates: Vec<usize> = (0..size).collect();
    extend_clique(&adjacent, &mut chosen, &candidates, k).then_some(chosen)
}

fn extend_clique(adjacent: &[Vec<bool>], chosen: &mut Vec<usize>, candidates: &[usize], k: usize) -> bool {
    if chosen.len() == k {
        return true;
    }
    for (pos, &v) in candidates.iter().enumerate() {
        if chosen.len() + candidates.len() - pos < k {
            return false;
        }
        let next: Vec<usize> = candidates[pos + 1..].iter().copied().filter(|&u| adjacent[v][u]).collect();
        if chosen.len() + 1 + next.len() < k {
            continue;
        }
        chosen.push(v);
        if extend_clique(adjacent, chosen, &next, k) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Drops members until `k` remain, each time removing the endpoint of the
/// worst remaining pair whose own worst pairing is larger.
fn greedy_subset(norms: &[Vec<Rational>], k: usize) -> Vec<usize> {
    let mut kept: Vec<usize> = (0..norms.len()).collect();
    let worst_for = |kept: &[usize], v: usize| {
        kept.iter()
            .filter(|&&u| u != v)
            .map(|&u| &norms[u][v])
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    };
    while kept.len() > k {
        let ((a, b), _) = worst_within(norms, &kept);
        let drop = if worst_for(&kept, a) > worst_for(&kept, b) { a } else { b };
        kept.retain(|&v| v != drop);
    }
    kept
}

/// Whether each family member has norm one, attained only at its own pair,
/// and slope at most `1 - sep/diam` on every other pair.
pub fn family_is_peaking(space: &FiniteMetricSpace, family: &PeakingFamily) -> bool {
    let Ok((sep, diam)) = check_hypotheses(space) else {
        return false;
    };
    let cap = Rational::one() - sep / diam;
    let n = space.len();
    family.members.iter().all(|m| {
        (0..n).all(|x| {
            (x + 1..n).all(|y| {
                let slope = (m.f.value(x) - m.f.value(y)).abs() / space.d(x, y);
                let own = (x == m.i && y == m.j) || (x == m.j && y == m.i);
                if own {
                    slope.is_one()
                } else {
                    slope <= cap
                }
            })
        })
    })
}
