//! Finite pointed metric spaces and their scalar invariants.

use std::collections::HashSet;

use num_traits::{Signed, Zero};

use crate::error::MetricError;
use crate::rational::{half, Rational};

/// A finite set of labelled points with a distinguished base point and an
/// exact distance matrix. Only constructible through validation, so every
/// instance satisfies the metric axioms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    base: usize,
    dist: Vec<Vec<Rational>>,
}

/// Outcome of the four-point test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FourPoint {
    Pass,
    /// `[a, b, c, d]` with `d(a,b) + d(c,d) > max(d(a,c) + d(b,d), d(b,c) + d(a,d))`.
    Fail([usize; 4]),
}

/// Outcome of the strong-triangle test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ultrametric {
    Pass,
    /// `[i, j, k]` with `d(i,k) > max(d(i,j), d(j,k))`.
    Fail([usize; 3]),
}

/// Validates a labelled distance matrix, reporting the first violated axiom.
#[allow(clippy::needless_range_loop)]
pub fn validate_metric(
    labels: Vec<String>,
    base: usize,
    dist: Vec<Vec<Rational>>,
) -> Result<FiniteMetricSpace, MetricError> {
    let n = dist.len();
    if n == 0 {
        return Err(MetricError::Empty);
    }
    for (row, entries) in dist.iter().enumerate() {
        if entries.len() != n {
            return Err(MetricError::NotSquare { row, len: entries.len(), expected: n });
        }
    }
    if labels.len() != n {
        return Err(MetricError::LabelCount { labels: labels.len(), size: n });
    }
    let mut seen = HashSet::new();
    for label in &labels {
        if !seen.insert(label.as_str()) {
            return Err(MetricError::DuplicateLabel(label.clone()));
        }
    }
    if base >= n {
        return Err(MetricError::BaseOutOfRange(base));
    }
    for (i, row) in dist.iter().enumerate() {
        if !row[i].is_zero() {
            return Err(MetricError::NonzeroDiagonal(i));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if dist[i][j] != dist[j][i] {
                return Err(MetricError::NotSymmetric(i, j));
            }
            if !dist[i][j].is_positive() {
                return Err(MetricError::NegativeOrZeroOffDiagonal(i, j));
            }
        }
    }
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                if dist[i][k] > &dist[i][j] + &dist[j][k] {
                    return Err(MetricError::TriangleViolation(i, j, k));
                }
            }
        }
    }
    Ok(FiniteMetricSpace { labels, base, dist })
}

impl FiniteMetricSpace {
    /// Validates with the base point given by label.
    pub fn new(
        labels: Vec<String>,
        base: &str,
        dist: Vec<Vec<Rational>>,
    ) -> Result<Self, MetricError> {
        let base_index = labels
            .iter()
            .position(|l| l == base)
            .ok_or_else(|| MetricError::UnknownBase(base.to_string()))?;
        validate_metric(labels, base_index, dist)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, MetricError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| MetricError::UnknownLabel(label.to_string()))
    }

    pub fn d(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    /// Point indices ordered by label; the canonical processing order.
    pub fn sorted_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.labels[a].cmp(&self.labels[b]));
        order
    }

    /// Same points and distances, different distinguished point.
    pub fn rebased(&self, base: usize) -> Self {
        assert!(base < self.len());
        Self { base, ..self.clone() }
    }

    /// Multiplies every distance by a positive factor.
    pub fn scaled(&self, factor: &Rational) -> Self {
        assert!(factor.is_positive());
        let dist = self
            .dist
            .iter()
            .map(|row| row.iter().map(|v| v * factor).collect())
            .collect();
        Self { dist, ..self.clone() }
    }

    /// Reorders points: new point `k` is old point `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.len());
        let labels = order.iter().map(|&i| self.labels[i].clone()).collect();
        let dist = order
            .iter()
            .map(|&i| order.iter().map(|&j| self.dist[i][j].clone()).collect())
            .collect();
        let base = order.iter().position(|&i| i == self.base).expect("permutation");
        Self { labels, base, dist }
    }

    /// Restriction to a subset of points, which must contain the base.
    pub fn subspace(&self, points: &[usize]) -> Self {
        let base = points
            .iter()
            .position(|&i| i == self.base)
            .expect("subspace must keep the base point");
        let labels = points.iter().map(|&i| self.labels[i].clone()).collect();
        let dist = points
            .iter()
            .map(|&i| points.iter().map(|&j| self.dist[i][j].clone()).collect())
            .collect();
        Self { labels, base, dist }
    }

    /// Checks `d(a,b)+d(c,d) <= max(d(a,c)+d(b,d), d(b,c)+d(a,d))` over all
    /// quadruples. Quadruples with a repeated point always pass by the triangle
    /// inequality, so only 4-subsets are scanned: the condition says the
    /// largest of the three pair sums is attained at least twice.
    pub fn four_point_check(&self) -> FourPoint {
        let n = self.len();
        let d = &self.dist;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for e in c + 1..n {
                        let s1 = &d[a][b] + &d[c][e];
                        let s2 = &d[a][c] + &d[b][e];
                        let s3 = &d[a][e] + &d[b][c];
                        if s1 > s2 && s1 > s3 {
                            return FourPoint::Fail([a, b, c, e]);
                        }
                        if s2 > s1 && s2 > s3 {
                            return FourPoint::Fail([a, c, b, e]);
                        }
                        if s3 > s1 && s3 > s2 {
                            return FourPoint::Fail([a, e, b, c]);
                        }
                    }
                }
            }
        }
        FourPoint::Pass
    }

    pub fn is_zero_hyperbolic(&self) -> bool {
        self.four_point_check() == FourPoint::Pass
    }

    pub fn is_ultrametric(&self) -> Ultrametric {
        let n = self.len();
        for i in 0..n {
            for k in i + 1..n {
                for j in 0..n {
                    if j == i || j == k {
                        continue;
                    }
                    if self.dist[i][k] > self.dist[i][j] && self.dist[i][k] > self.dist[j][k] {
                        return Ultrametric::Fail([i, j, k]);
                    }
                }
            }
        }
        Ultrametric::Pass
    }

    /// `(x|y)_w = (d(x,w) + d(y,w) - d(x,y)) / 2`.
    pub fn gromov_product(&self, x: usize, y: usize, w: usize) -> Rational {
        (&self.dist[x][w] + &self.dist[y][w] - &self.dist[x][y]) * half()
    }

    pub fn diam(&self) -> Rational {
        self.dist
            .iter()
            .flat_map(|row| row.iter())
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Half the smallest triangle slack `d(x,y) + d(x,z) - d(y,z)` over
    /// ordered triples of distinct points.
    pub fn sep(&self) -> Result<Rational, MetricError> {
        let n = self.len();
        if n < 3 {
            return Err(MetricError::TooFewPoints { needed: 3, got: n });
        }
        let mut best: Option<Rational> = None;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if x == y || y == z || x == z {
                        continue;
                    }
                    let g = self.gromov_product(y, z, x);
                    if best.as_ref().is_none_or(|b| &g < b) {
                        best = Some(g);
                    }
                }
            }
        }
        Ok(best.expect("n >= 3"))
    }
}
