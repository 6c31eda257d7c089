//! Extreme points of the unit balls of `F(M)` and `Lip0(M)`, and the
//! isometry-with-`l1` verdict built from them.
//!
//! For a subset of a tree, the molecule `(delta_x - delta_y)/d(x,y)` is
//! extreme exactly when no other point of `M` lies on the tree segment
//! `[x, y]`. If some branching point `b` of `conv(M)` is missing from `M`, the
//! three nearest points around `b` give two extreme molecules at distance at
//! most one, and two extreme Lipschitz functions at distance strictly below
//! two. Neither can happen in `l1^n`, where distinct extreme points of either
//! ball sit at distance exactly two.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::ExtremalError;
use crate::free_space::{free_norm_value, godard_embed, lip_norm, FreeVector, LipFunction};
use crate::lp::{self, Constraint, Outcome, Relation};
use crate::metric::{FiniteMetricSpace, FourPoint};
use crate::rational::Rational;
use crate::tree::{realize, RealizedTree};

/// The ordered pair `(x, y)` standing for `(delta_x - delta_y)/d(x,y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Molecule {
    pub x: usize,
    pub y: usize,
}

impl Molecule {
    pub fn new(x: usize, y: usize) -> Result<Self, ExtremalError> {
        if x == y {
            return Err(ExtremalError::SamePoint);
        }
        Ok(Self { x, y })
    }

    pub fn vector(&self, space: &FiniteMetricSpace) -> FreeVector {
        FreeVector::molecule(space, self.x, self.y)
    }
}

/// Tree criterion: no point of `M` strictly inside `[x, y]`.
pub fn is_extreme_molecule_tree(tree: &RealizedTree, x: usize, y: usize) -> bool {
    x != y && tree.segment_interior_points(x, y).is_empty()
}

/// Vertex test valid in any finite metric space: the molecule is extreme iff
/// it is not a convex combination of the other signed molecules (the unit
/// ball is their convex hull).
pub fn is_extreme_molecule_lp(space: &FiniteMetricSpace, x: usize, y: usize) -> bool {
    if x == y {
        return false;
    }
    let n = space.len();
    let coords: Vec<usize> = (0..n).filter(|&p| p != space.base()).collect();
    let target = FreeVector::molecule(space, x, y);
    let others: Vec<FreeVector> = (0..n)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .filter(|&(u, v)| u != v && (u, v) != (x, y))
        .map(|(u, v)| FreeVector::molecule(space, u, v))
        .collect();
    let mut constraints: Vec<Constraint> = coords
        .iter()
        .map(|&p| {
            Constraint::new(others.iter().map(|m| m.coeff(p)).collect(), Relation::Eq, target.coeff(p))
        })
        .collect();
    constraints.push(Constraint::new(vec![Rational::one(); others.len()], Relation::Eq, Rational::one()));
    !lp::feasible(others.len(), &constraints)
}

/// Uses the tree criterion when `M` is 0-hyperbolic, the vertex LP otherwise.
pub fn is_extreme_molecule(space: &FiniteMetricSpace, x: usize, y: usize) -> bool {
    match realize(space) {
        Ok(tree) => is_extreme_molecule_tree(&tree, x, y),
        Err(_) => is_extreme_molecule_lp(space, x, y),
    }
}

/// Pairs `{x, y}`, `x < y`, where `f` has slope exactly one.
pub fn tight_graph(space: &FiniteMetricSpace, f: &LipFunction) -> Vec<(usize, usize)> {
    let n = space.len();
    let mut edges = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            if &(f.value(x) - f.value(y)).abs() == space.d(x, y) {
                edges.push((x, y));
            }
        }
    }
    edges
}

fn ensure_in_ball(space: &FiniteMetricSpace, f: &LipFunction) -> Result<(), ExtremalError> {
    let norm = lip_norm(space, f);
    if norm > Rational::one() {
        return Err(ExtremalError::NormExceedsOne(crate::rational::to_text(&norm)));
    }
    Ok(())
}

/// A function in the dual unit ball is extreme iff its tight graph connects
/// all of `M`: the active constraints then pin every value to the base.
/// (With a single point the ball is `{0}`, trivially extreme.)
pub fn is_extreme_lip(space: &FiniteMetricSpace, f: &LipFunction) -> Result<bool, ExtremalError> {
    ensure_in_ball(space, f)?;
    let n = space.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    let mut components = n;
    for (x, y) in tight_graph(space, f) {
        let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
        if rx != ry {
            parent[rx] = ry;
            components -= 1;
        }
    }
    Ok(components == 1)
}

/// Perturbation test: `f` is not extreme iff some `h != 0` keeps both
/// `f + h` and `f - h` in the ball, i.e. `|h(x) - h(y)| <= d(x,y) - |f(x) - f(y)|`
/// with `h(base) = 0`. That polytope is symmetric, so it is nontrivial iff
/// some coordinate of `h` can be made positive.
pub fn is_extreme_lip_lp(space: &FiniteMetricSpace, f: &LipFunction) -> Result<bool, ExtremalError> {
    ensure_in_ball(space, f)?;
    let n = space.len();
    let free: Vec<usize> = (0..n).filter(|&p| p != space.base()).collect();
    let width = 2 * free.len();
    let column = |p: usize| free.iter().position(|&q| q == p);
    let mut constraints = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            let slack = space.d(x, y) - (f.value(x) - f.value(y)).abs();
            // h(x) - h(y) with h = plus - minus
            let mut row = vec![Rational::zero(); width];
            if let Some(i) = column(x) {
                row[2 * i] += Rational::one();
                row[2 * i + 1] -= Rational::one();
            }
            if let Some(j) = column(y) {
                row[2 * j] -= Rational::one();
                row[2 * j + 1] += Rational::one();
            }
            let negated = row.iter().map(|v| -v).collect();
            constraints.push(Constraint::new(row, Relation::Le, slack.clone()));
            constraints.push(Constraint::new(negated, Relation::Le, slack));
        }
    }
    for i in 0..free.len() {
        let mut objective = vec![Rational::zero(); width];
        objective[2 * i] = Rational::one();
        objective[2 * i + 1] = -Rational::one();
        match lp::maximize(&objective, &constraints) {
            Outcome::Optimal { value, .. } if value.is_positive() => return Ok(false),
            Outcome::Optimal { .. } => {}
            Outcome::Unbounded => return Ok(false),
            Outcome::Infeasible => unreachable!("h = 0 is feasible"),
        }
    }
    Ok(true)
}

/// A function known on a subset `A` of the points.
pub type PartialFunction = BTreeMap<usize, Rational>;

fn check_domain(space: &FiniteMetricSpace, f: &PartialFunction) -> Result<(), ExtremalError> {
    if !f.contains_key(&space.base()) {
        return Err(ExtremalError::NotOnePointed);
    }
    for (&x, fx) in f {
        for (&y, fy) in f.range(x + 1..) {
            let slope = (fx - fy).abs() / space.d(x, y);
            if slope > Rational::one() {
                return Err(ExtremalError::NotOneLipschitz(crate::rational::to_text(&slope)));
            }
        }
    }
    Ok(())
}

/// Smallest 1-Lipschitz extension: `sup_{z in A} f(z) - d(z, x)`.
pub fn extend_sup(space: &FiniteMetricSpace, f: &PartialFunction) -> Result<LipFunction, ExtremalError> {
    check_domain(space, f)?;
    let values = (0..space.len())
        .map(|x| {
            f.iter()
                .map(|(&z, fz)| fz - space.d(z, x))
                .max()
                .expect("domain contains the base")
        })
        .collect();
    Ok(LipFunction::new(space, values).expect("extension agrees with f(base) = 0"))
}

/// Largest 1-Lipschitz extension: `inf_{z in A} f(z) + d(z, x)`.
pub fn extend_inf(space: &FiniteMetricSpace, f: &PartialFunction) -> Result<LipFunction, ExtremalError> {
    check_domain(space, f)?;
    let values = (0..space.len())
        .map(|x| {
            f.iter()
                .map(|(&z, fz)| fz + space.d(z, x))
                .min()
                .expect("domain contains the base")
        })
        .collect();
    Ok(LipFunction::new(space, values).expect("extension agrees with f(base) = 0"))
}

/// The closest point of `M` to `node` in each branch around it, ordered by
/// (distance, label). Each entry is `(point, distance, branch)`.
fn nearest_per_branch(
    space: &FiniteMetricSpace,
    tree: &RealizedTree,
    node: usize,
) -> Vec<(usize, Rational, Vec<usize>)> {
    let mut out: Vec<(usize, Rational, Vec<usize>)> = tree
        .branches_at(node)
        .into_iter()
        .map(|branch| {
            let best = branch
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    tree.distance(node, tree.node_of(a))
                        .cmp(tree.distance(node, tree.node_of(b)))
                        .then_with(|| space.label(a).cmp(space.label(b)))
                })
                .expect("every branch of conv(M) reaches a point of M");
            (best, tree.distance(node, tree.node_of(best)).clone(), branch)
        })
        .collect();
    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| space.label(a.0).cmp(space.label(b.0))));
    out
}

fn ensure_missing(tree: &RealizedTree, b: usize) -> Result<(), ExtremalError> {
    if b >= tree.node_count() || !tree.missing_branch_points().contains(&b) {
        return Err(ExtremalError::NoMissingBranchPoint(b));
    }
    Ok(())
}

/// Two extreme molecules `mu`, `nu` of `F(M)` with `||mu - nu|| <= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimalWitness {
    pub branch_node: usize,
    /// Labelled so that `d(x,z) <= d(z,y) <= d(x,y)`.
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub mu: Molecule,
    pub nu: Molecule,
    pub distance: Rational,
}

pub fn primal_witness(
    space: &FiniteMetricSpace,
    tree: &RealizedTree,
    b: usize,
) -> Result<PrimalWitness, ExtremalError> {
    ensure_missing(tree, b)?;
    let nearest = nearest_per_branch(space, tree, b);
    // nearest three: distances p <= q <= r give d(p,q) <= d(p,r) <= d(q,r)
    let (z, x, y) = (nearest[0].0, nearest[1].0, nearest[2].0);
    let mu = Molecule { x, y };
    let nu = Molecule { x: z, y };
    let distance = free_norm_value(space, &mu.vector(space).sub(&nu.vector(space)));
    Ok(PrimalWitness { branch_node: b, x, y, z, mu, nu, distance })
}

/// Two extreme functions `f`, `g` of `Lip0(M)` with `||f - g||_L < 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualWitness {
    pub branch_node: usize,
    /// The point nearest to the branch node outside the base's branch.
    pub z: usize,
    /// Points whose projection onto `[z, b]` differs from `b`.
    pub z_branch: Vec<usize>,
    pub f: LipFunction,
    pub g: LipFunction,
    pub distance: Rational,
}

/// `f = d(base, .)`; `g` agrees with `f` off the branch of `z` and equals
/// `d(base,b) - d(b,z) + d(z,w)` on it. `f - g = 2 d(b, pi_{zb}(w))` there.
pub fn dual_witness(
    space: &FiniteMetricSpace,
    tree: &RealizedTree,
    b: usize,
) -> Result<DualWitness, ExtremalError> {
    ensure_missing(tree, b)?;
    let base = space.base();
    let (z, _, z_branch) = nearest_per_branch(space, tree, b)
        .into_iter()
        .find(|(_, _, branch)| !branch.contains(&base))
        .expect("a branching node has at least two branches without the base");
    let f = LipFunction::distance_from_base(space);
    let to_b = tree.distance(tree.node_of(base), b);
    let b_to_z = tree.distance(b, tree.node_of(z));
    let values = (0..space.len())
        .map(|w| {
            if z_branch.contains(&w) {
                to_b - b_to_z + space.d(z, w)
            } else {
                space.d(base, w).clone()
            }
        })
        .collect();
    let g = LipFunction::new(space, values).expect("base lies outside the branch of z");
    let distance = lip_norm(space, &f.sub(&g));
    Ok(DualWitness { branch_node: b, z, z_branch, f, g, distance })
}

/// Outcome of the isometry test against `l1^{|M|-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Verdict {
    /// Every branching point of `conv(M)` is in `M`; the edge coordinates of
    /// the tree give a linear isometry onto `l1^{|M|-1}`.
    IsometricToL1 { tree: RealizedTree },
    NotIsometric {
        tree: RealizedTree,
        missing: Vec<usize>,
        primal: PrimalWitness,
        dual: DualWitness,
    },
    NotZeroHyperbolic { quadruple: [usize; 4] },
}

impl Verdict {
    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::IsometricToL1 { .. } => "IsometricToL1",
            Verdict::NotIsometric { .. } => "NotIsometric",
            Verdict::NotZeroHyperbolic { .. } => "NotZeroHyperbolic",
        }
    }
}

pub fn ell1_verdict(space: &FiniteMetricSpace) -> Verdict {
    if let FourPoint::Fail(quadruple) = space.four_point_check() {
        return Verdict::NotZeroHyperbolic { quadruple };
    }
    let tree = realize(space).expect("0-hyperbolic spaces realize");
    let missing = tree.missing_branch_points();
    match missing.first() {
        None => {
            debug_assert_eq!(tree.edges().len() + 1, space.len());
            Verdict::IsometricToL1 { tree }
        }
        Some(&b) => {
            let primal = primal_witness(space, &tree, b).expect("b is missing");
            let dual = dual_witness(space, &tree, b).expect("b is missing");
            Verdict::NotIsometric { tree, missing, primal, dual }
        }
    }
}

/// Edge coordinates of the Dirac at each non-base point: the matrix of the
/// tree isometry, one row per edge, one column per non-base point.
pub fn godard_matrix(space: &FiniteMetricSpace, tree: &RealizedTree) -> Vec<Vec<Rational>> {
    let points: Vec<usize> = (0..space.len()).filter(|&p| p != space.base()).collect();
    let columns: Vec<Vec<Rational>> = points
        .iter()
        .map(|&p| godard_embed(space, tree, &FreeVector::dirac(space, p)))
        .collect();
    (0..tree.edges().len())
        .map(|e| columns.iter().map(|c| c[e].clone()).collect())
        .collect()
}

/// Rank of a rational matrix by exact elimination.
#[allow(clippy::needless_range_loop)]
pub fn rank(matrix: &[Vec<Rational>]) -> usize {
    let mut rows: Vec<Vec<Rational>> = matrix.to_vec();
    let width = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank][col].clone();
        let pivot_row = rows[rank].clone();
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let factor = &rows[r][col] / &p;
                for (v, pv) in rows[r].iter_mut().zip(&pivot_row) {
                    *v -= &factor * pv;
                }
            }
        }
        rank += 1;
    }
    rank
}
