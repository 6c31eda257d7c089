//! Exact min-cost transport of a zero-sum signed mass on a finite metric space.
//!
//! Flow lives on the complete directed graph over all points, arc `x -> y`
//! costing `d(x,y)` with unbounded capacity. Successive shortest augmenting
//! paths (Bellman-Ford on the residual graph, since reverse arcs carry negative
//! cost) route the positive part onto the negative part. On termination the
//! residual shortest-path distances are a Kantorovich potential: negated and
//! shifted, they form a 1-Lipschitz function that is tight on every arc
//! carrying flow.

use num_traits::{Signed, Zero};

use crate::metric::FiniteMetricSpace;
use crate::rational::Rational;

/// `amount` moved from point `from` to point `to`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shipment {
    pub from: usize,
    pub to: usize,
    pub amount: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportSolution {
    pub cost: Rational,
    pub plan: Vec<Shipment>,
    /// 1-Lipschitz, zero at the base, `sum mass(x) * potential(x) = cost`.
    pub potential: Vec<Rational>,
}

/// Solves the transport problem for `mass` (one entry per point, summing to
/// zero).
pub fn solve(space: &FiniteMetricSpace, mass: &[Rational]) -> TransportSolution {
    let n = space.len();
    assert_eq!(mass.len(), n);
    assert!(
        mass.iter().fold(Rational::zero(), |a, b| a + b).is_zero(),
        "transport needs zero total mass"
    );
    let mut excess = mass.to_vec();
    let mut flow = vec![vec![Rational::zero(); n]; n];

    // Each augmentation saturates a supply, a demand or a reverse arc; the
    // bound only guards against a logic error.
    let guard = 4 * n * n * n + 16;
    let mut rounds = 0;
    while excess.iter().any(|e| e.is_positive()) {
        rounds += 1;
        assert!(rounds <= guard, "transport did not converge");
        let sources: Vec<usize> = (0..n).filter(|&v| excess[v].is_positive()).collect();
        let (dist, pred) = shortest_paths(space, &flow, &sources);
        let sink = (0..n)
            .filter(|&v| excess[v].is_negative())
            .min_by(|&a, &b| dist[a].cmp(&dist[b]).then(a.cmp(&b)))
            .expect("negative mass remains while positive does");

        let mut path = vec![sink];
        let mut cur = sink;
        while let Some(p) = pred[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        let source = path[0];

        let mut amount = excess[source].clone().min(-excess[sink].clone());
        for pair in path.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if is_reverse(&flow, a, b) {
                amount = amount.min(flow[b][a].clone());
            }
        }
        for pair in path.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if is_reverse(&flow, a, b) {
                flow[b][a] -= &amount;
            } else {
                flow[a][b] += &amount;
            }
        }
        excess[source] -= &amount;
        excess[sink] += &amount;
    }

    let everyone: Vec<usize> = (0..n).collect();
    let (dist, _) = shortest_paths(space, &flow, &everyone);
    let base = space.base();
    let potential: Vec<Rational> = dist.iter().map(|d| &dist[base] - d).collect();

    let mut plan = Vec::new();
    let mut cost = Rational::zero();
    for (from, row) in flow.iter().enumerate() {
        for (to, amount) in row.iter().enumerate() {
            if amount.is_positive() {
                cost += amount * space.d(from, to);
                plan.push(Shipment { from, to, amount: amount.clone() });
            }
        }
    }
    TransportSolution { cost, plan, potential }
}

/// A reverse residual arc `a -> b` exists while flow runs `b -> a`; at cost
/// `-d(a,b)` it always beats the forward arc.
fn is_reverse(flow: &[Vec<Rational>], a: usize, b: usize) -> bool {
    flow[b][a].is_positive()
}

/// Multi-source Bellman-Ford on the residual graph; every source starts at
/// distance zero.
fn shortest_paths(
    space: &FiniteMetricSpace,
    flow: &[Vec<Rational>],
    sources: &[usize],
) -> (Vec<Rational>, Vec<Option<usize>>) {
    let n = space.len();
    let mut dist: Vec<Option<Rational>> = vec![None; n];
    let mut pred = vec![None; n];
    for &s in sources {
        dist[s] = Some(Rational::zero());
    }
    for _ in 0..n {
        let mut changed = false;
        for a in 0..n {
            let Some(da) = dist[a].clone() else { continue };
            for b in 0..n {
                if a == b {
                    continue;
                }
                let arc = if is_reverse(flow, a, b) { -space.d(a, b) } else { space.d(a, b).clone() };
                let candidate = &da + arc;
                if dist[b].as_ref().is_none_or(|db| &candidate < db) {
                    dist[b] = Some(candidate);
                    pred[b] = Some(a);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (dist.into_iter().map(|d| d.expect("complete graph")).collect(), pred)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::fixtures::*;
    use crate::rational::int;

    fn check_certificate(space: &FiniteMetricSpace, mass: &[Rational], sol: &TransportSolution) {
        let n = space.len();
        assert!(sol.potential[space.base()].is_zero());
        for x in 0..n {
            for y in 0..n {
                assert!(&sol.potential[x] - &sol.potential[y] <= *space.d(x, y));
            }
        }
        let pairing = mass
            .iter()
            .zip(&sol.potential)
            .fold(Rational::zero(), |a, (m, f)| a + m * f);
        assert_eq!(pairing, sol.cost);
        let mut net = vec![Rational::zero(); n];
        for s in &sol.plan {
            net[s.from] += &s.amount;
            net[s.to] -= &s.amount;
        }
        assert_eq!(net, mass);
    }

    #[test]
    fn dirac_goes_to_base() {
        let m = u3();
        let mass = vec![int(-1), int(1), int(0)];
        let sol = solve(&m, &mass);
        assert_eq!(sol.cost, int(2));
        check_certificate(&m, &mass, &sol);
    }

    #[test]
    fn path_two_diracs() {
        let m = path3();
        let mass = vec![int(-2), int(1), int(1)];
        let sol = solve(&m, &mass);
        assert_eq!(sol.cost, int(3));
        check_certificate(&m, &mass, &sol);
    }

    #[test]
    fn zero_mass() {
        let m = m3();
        let mass = vec![int(0); 3];
        let sol = solve(&m, &mass);
        assert!(sol.cost.is_zero());
        assert!(sol.plan.is_empty());
        check_certificate(&m, &mass, &sol);
    }

    #[test]
    fn cycle_metric_transport() {
        let m = c4();
        // opposite corners against the other two
        let mass = vec![int(1), int(-1), int(1), int(-1)];
        let sol = solve(&m, &mass);
        assert_eq!(sol.cost, int(2));
        check_certificate(&m, &mass, &sol);
    }
}
