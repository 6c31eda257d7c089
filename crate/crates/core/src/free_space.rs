//! Norms on the Lipschitz-free space `F(M)` and on its dual `Lip0(M)`.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::metric::FiniteMetricSpace;
use crate::rational::Rational;
use crate::transport::{self, Shipment};
use crate::tree::RealizedTree;

/// A finitely supported `sum a_x delta_x` with `delta_base = 0`. The base
/// carries the implicit balancing mass `-sum a_x`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreeVector {
    coeffs: BTreeMap<usize, Rational>,
}

impl FreeVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds from `(point, coefficient)` pairs; coefficients on the base and
    /// zero coefficients are dropped, repeated points accumulate.
    pub fn from_pairs(space: &FiniteMetricSpace, pairs: impl IntoIterator<Item = (usize, Rational)>) -> Self {
        let mut v = Self::zero();
        for (p, c) in pairs {
            assert!(p < space.len(), "point {p} out of range");
            if p == space.base() {
                continue;
            }
            *v.coeffs.entry(p).or_insert_with(Rational::zero) += c;
        }
        v.coeffs.retain(|_, c| !c.is_zero());
        v
    }

    pub fn dirac(space: &FiniteMetricSpace, p: usize) -> Self {
        Self::from_pairs(space, [(p, Rational::from_integer(1.into()))])
    }

    /// The molecule `(delta_x - delta_y) / d(x,y)`.
    pub fn molecule(space: &FiniteMetricSpace, x: usize, y: usize) -> Self {
        assert_ne!(x, y);
        let w = space.d(x, y).recip();
        Self::from_pairs(space, [(x, w.clone()), (y, -w)])
    }

    pub fn coeff(&self, p: usize) -> Rational {
        self.coeffs.get(&p).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.coeffs.iter().map(|(&p, c)| (p, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Full signed mass over all points, base included.
    pub fn mass(&self, space: &FiniteMetricSpace) -> Vec<Rational> {
        let mut mass = vec![Rational::zero(); space.len()];
        let mut total = Rational::zero();
        for (&p, c) in &self.coeffs {
            mass[p] = c.clone();
            total += c;
        }
        mass[space.base()] = -total;
        mass
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&p, c) in &other.coeffs {
            *out.coeffs.entry(p).or_insert_with(Rational::zero) += c;
        }
        out.coeffs.retain(|_, c| !c.is_zero());
        out
    }

    pub fn scale(&self, k: &Rational) -> Self {
        let mut out = Self::zero();
        if k.is_zero() {
            return out;
        }
        for (&p, c) in &self.coeffs {
            out.coeffs.insert(p, c * k);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&Rational::from_integer((-1).into())))
    }
}

/// A function on `M` vanishing at the base point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LipFunction {
    values: Vec<Rational>,
}

impl LipFunction {
    /// Fails when the value at the base is not zero.
    pub fn new(space: &FiniteMetricSpace, values: Vec<Rational>) -> Option<Self> {
        (values.len() == space.len() && values[space.base()].is_zero()).then_some(Self { values })
    }

    /// Shifts arbitrary values so the base maps to zero.
    pub fn rebased(space: &FiniteMetricSpace, values: Vec<Rational>) -> Self {
        let shift = values[space.base()].clone();
        Self { values: values.into_iter().map(|v| v - &shift).collect() }
    }

    pub fn zero(space: &FiniteMetricSpace) -> Self {
        Self { values: vec![Rational::zero(); space.len()] }
    }

    /// `d(base, .)`.
    pub fn distance_from_base(space: &FiniteMetricSpace) -> Self {
        Self { values: (0..space.len()).map(|p| space.d(space.base(), p).clone()).collect() }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, p: usize) -> &Rational {
        &self.values[p]
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self { values: self.values.iter().map(|v| v * k).collect() }
    }

    pub fn neg(&self) -> Self {
        Self { values: self.values.iter().map(|v| -v).collect() }
    }
}

/// `max |f(x) - f(y)| / d(x,y)` over pairs.
pub fn lip_norm(space: &FiniteMetricSpace, f: &LipFunction) -> Rational {
    lip_norm_with_pair(space, f).0
}

/// Lipschitz constant with the first pair `(x, y)`, `x < y`, attaining it.
pub fn lip_norm_with_pair(space: &FiniteMetricSpace, f: &LipFunction) -> (Rational, Option<(usize, usize)>) {
    let mut best = Rational::zero();
    let mut at = None;
    let n = space.len();
    for x in 0..n {
        for y in x + 1..n {
            let slope = (&f.values[x] - &f.values[y]).abs() / space.d(x, y);
            if slope > best {
                best = slope;
                at = Some((x, y));
            }
        }
    }
    (best, at)
}

/// Free-space norm with its primal plan and dual witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeNorm {
    pub norm: Rational,
    pub plan: Vec<Shipment>,
    pub dual: LipFunction,
}

/// `||sum a_x delta_x||` as the optimal transport cost of the induced mass,
/// with a norm-one Lipschitz function attaining it.
pub fn free_norm(space: &FiniteMetricSpace, a: &FreeVector) -> FreeNorm {
    let sol = transport::solve(space, &a.mass(space));
    FreeNorm { norm: sol.cost, plan: sol.plan, dual: LipFunction { values: sol.potential } }
}

pub fn free_norm_value(space: &FiniteMetricSpace, a: &FreeVector) -> Rational {
    free_norm(space, a).norm
}

/// Net mass carried across each edge towards the base: the sum of
/// coefficients of points on the far side of the edge. Indexed by edge id.
pub fn edge_flows(space: &FiniteMetricSpace, tree: &RealizedTree, a: &FreeVector) -> Vec<Rational> {
    let root = tree.node_of(space.base());
    let mut flows = vec![Rational::zero(); tree.edges().len()];
    // iterative post-order from the base node
    let mut order = Vec::with_capacity(tree.node_count());
    let mut parent_edge = vec![usize::MAX; tree.node_count()];
    let mut seen = vec![false; tree.node_count()];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(u) = stack.pop() {
        order.push(u);
        for &(v, e) in tree.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                parent_edge[v] = e;
                stack.push(v);
            }
        }
    }
    let mut subtree = vec![Rational::zero(); tree.node_count()];
    for &u in order.iter().rev() {
        if let Some(p) = tree.point_of(u) {
            subtree[u] += a.coeff(p);
        }
        if u != root {
            let e = parent_edge[u];
            flows[e] = subtree[u].clone();
            let edge = &tree.edges()[e];
            let up = if edge.u == u { edge.v } else { edge.u };
            let carried = subtree[u].clone();
            subtree[up] += carried;
        }
    }
    flows
}

/// `sum_e len(e) * |flow(e)|`.
pub fn free_norm_tree(space: &FiniteMetricSpace, tree: &RealizedTree, a: &FreeVector) -> Rational {
    godard_embed(space, tree, a)
        .iter()
        .fold(Rational::zero(), |acc, c| acc + c.abs())
}

/// Coordinates `len(e) * flow(e)` per edge. Their `l1` norm is the free norm;
/// the map is onto `l1^{|edges|}` and is an isometry onto `l1^{|M|-1}` exactly
/// when the tree has no Steiner nodes.
pub fn godard_embed(space: &FiniteMetricSpace, tree: &RealizedTree, a: &FreeVector) -> Vec<Rational> {
    edge_flows(space, tree, a)
        .into_iter()
        .zip(tree.edges())
        .map(|(flow, e)| flow * &e.len)
        .collect()
}

/// `<a, f> = sum a_x f(x)`.
pub fn pairing(a: &FreeVector, f: &LipFunction) -> Rational {
    a.support().fold(Rational::zero(), |acc, (p, c)| acc + c * f.value(p))
}
