//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use num_traits::{One, Signed, Zero};

use lipfree_core::bm::{bm_lower_certified, bm_lower_formula, peaking_family};
use lipfree_core::extremal::{
    dual_witness, ell1_verdict, is_extreme_lip, is_extreme_lip_lp, is_extreme_molecule, is_extreme_molecule_lp,
    is_extreme_molecule_tree, primal_witness, Verdict,
};
use lipfree_core::free_space::{free_norm, free_norm_tree, free_norm_value, godard_embed, lip_norm, pairing};
use lipfree_core::generate::{gen_instance, InstanceKind};
use lipfree_core::rational::{int, ratio};
use lipfree_core::report::{analyze, cmd_verify, Command};
use lipfree_core::{realize, BoundError, FiniteMetricSpace, FourPoint, FreeVector, LipFunction, Rational};

use common::*;

type Outcome = Result<String, String>;
type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn equilateral() -> FiniteMetricSpace {
    let one = int(1);
    let zero = int(0);
    FiniteMetricSpace::new(
        vec!["0".into(), "a".into(), "b".into()],
        "0",
        vec![
            vec![zero.clone(), one.clone(), one.clone()],
            vec![one.clone(), zero.clone(), one.clone()],
            vec![one.clone(), one, zero],
        ],
    )
    .unwrap()
}

fn square() -> FiniteMetricSpace {
    let d = |i: i64, j: i64| int(((i - j).rem_euclid(4)).min((j - i).rem_euclid(4)));
    FiniteMetricSpace::new(
        (0..4).map(|i| format!("p{i}")).collect(),
        "p0",
        (0..4).map(|i| (0..4).map(|j| d(i, j)).collect()).collect(),
    )
    .unwrap()
}

fn violates_four_point(m: &FiniteMetricSpace, [a, b, c, d]: [usize; 4]) -> bool {
    let mut sums = [m.d(a, b) + m.d(c, d), m.d(a, c) + m.d(b, d), m.d(a, d) + m.d(b, c)];
    sums.sort();
    sums[1] != sums[2]
}

/// Criterion 1: Four-point check passes and the tree reproduces every distance.
fn round_trip(corpus: &[FiniteMetricSpace]) -> Outcome {
    for (k, m) in corpus.iter().enumerate() {
        ensure(m.four_point_check() == FourPoint::Pass, || format!("instance {k} fails the four-point check"))?;
        let t = realize(m).map_err(|e| format!("instance {k}: {e}"))?;
        for x in 0..m.len() {
            for y in 0..m.len() {
                ensure(t.distance(t.node_of(x), t.node_of(y)) == m.d(x, y), || {
                    format!("instance {k}: tree distance differs at ({x},{y})")
                })?;
            }
        }
    }
    Ok(format!("{} tree metrics", corpus.len()))
}

/// Criterion 2: Transport, tree formula and vertex enumeration agree; duals certify.
fn norm_oracles(corpus: &[FiniteMetricSpace]) -> Outcome {
    let (mut vectors, mut brute) = (0, 0);
    for (k, m) in corpus.iter().enumerate() {
        let t = realize(m).unwrap();
        let mut r = rng(10_000 + k as u64);
        for _ in 0..6 {
            let a = random_vector(&mut r, m);
            let cert = free_norm(m, &a);
            let tree = free_norm_tree(m, &t, &a);
            ensure(cert.norm == tree, || format!("instance {k}: transport {} vs tree {}", cert.norm, tree))?;
            if m.len() <= 6 {
                let b = brute_transport(m, &a.mass(m));
                ensure(cert.norm == b, || format!("instance {k}: transport {} vs brute force {b}", cert.norm))?;
                brute += 1;
            }
            ensure(lip_norm(m, &cert.dual) <= Rational::one(), || format!("instance {k}: dual exceeds norm one"))?;
            ensure(cert.dual.value(m.base()).is_zero(), || format!("instance {k}: dual not based"))?;
            ensure(pairing(&a, &cert.dual) == cert.norm, || format!("instance {k}: dual pairing gap"))?;
            vectors += 1;
        }
    }
    Ok(format!("{vectors} vectors, {brute} against vertex enumeration"))
}

/// Criterion 3: Without missing branch points the edge coordinates are an isometry
/// onto `l1^{|M|-1}`, and the extreme molecules look like `l1` unit vectors.
fn godard_isometry(corpus: &[FiniteMetricSpace]) -> Outcome {
    let mut instances = 0;
    for (k, base) in corpus.iter().enumerate() {
        // the path metric on every tree node has no missing branch points
        let t0 = realize(base).unwrap();
        let candidates = [base.clone(), all_nodes_space(base, &t0)];
        for m in candidates.iter().filter(|m| m.len() <= 10) {
            let t = realize(m).unwrap();
            if !t.missing_branch_points().is_empty() {
                continue;
            }
            instances += 1;
            let n = m.len();
            ensure(t.edges().len() == n - 1, || format!("instance {k}: {} coordinates", t.edges().len()))?;
            let mut r = rng(20_000 + k as u64);
            for _ in 0..50 {
                let a = random_vector(&mut r, m);
                let l1: Rational = godard_embed(m, &t, &a).iter().map(|c| c.abs()).sum();
                ensure(l1 == free_norm_value(m, &a), || format!("instance {k}: l1 norm differs from free norm"))?;
            }
            let extreme: Vec<(usize, usize)> = (0..n)
                .flat_map(|x| (x + 1..n).map(move |y| (x, y)))
                .filter(|&(x, y)| is_extreme_molecule(m, x, y))
                .collect();
            ensure(extreme.len() == n - 1, || format!("instance {k}: {} extreme molecules", extreme.len()))?;
            let signed: Vec<FreeVector> = extreme
                .iter()
                .flat_map(|&(x, y)| [FreeVector::molecule(m, x, y), FreeVector::molecule(m, y, x)])
                .collect();
            for (i, u) in signed.iter().enumerate() {
                for v in &signed[i + 1..] {
                    let d = free_norm_value(m, &u.sub(v));
                    ensure(d == int(2), || format!("instance {k}: extreme points at distance {d}"))?;
                }
            }
        }
    }
    ensure(instances >= 50, || format!("only {instances} instances without missing branch points"))?;
    Ok(format!("{instances} instances, 50 vectors each"))
}

/// Criterion 4: With a missing branch point, both witnesses exist and obstruct; stored
/// verdict reports re-verify.
fn obstructions(corpus: &[FiniteMetricSpace]) -> Outcome {
    let dir = std::env::temp_dir().join(format!("lipfree-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut witnessed = 0;
    let mut reports = 0;
    for (k, m) in corpus.iter().enumerate() {
        let t = realize(m).unwrap();
        let missing = t.missing_branch_points();
        if missing.is_empty() {
            continue;
        }
        for &b in &missing {
            let p = primal_witness(m, &t, b).map_err(|e| format!("instance {k}: {e}"))?;
            ensure(p.distance <= Rational::one(), || format!("instance {k}: primal distance {}", p.distance))?;
            for mol in [p.mu, p.nu] {
                ensure(
                    is_extreme_molecule_tree(&t, mol.x, mol.y) && is_extreme_molecule_lp(m, mol.x, mol.y),
                    || format!("instance {k}: primal molecule not extreme"),
                )?;
            }
            let d = dual_witness(m, &t, b).map_err(|e| format!("instance {k}: {e}"))?;
            ensure(d.distance < int(2), || format!("instance {k}: dual distance {}", d.distance))?;
            for g in [&d.f, &d.g] {
                ensure(
                    lip_norm(m, g) <= Rational::one()
                        && is_extreme_lip(m, g) == Ok(true)
                        && is_extreme_lip_lp(m, g) == Ok(true),
                    || format!("instance {k}: dual function not extreme"),
                )?;
            }
            witnessed += 1;
        }
        let report = analyze(Command::Verdict, m, None).map_err(|e| e.to_string())?;
        ensure(report.result["tag"] == "NotIsometric", || format!("instance {k}: verdict {}", report.result["tag"]))?;
        let path = dir.join(format!("verdict-{k}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&report).unwrap()).map_err(|e| e.to_string())?;
        let check = cmd_verify(&path).map_err(|e| e.to_string())?;
        ensure(check.passed(), || format!("instance {k}: {:?}", check.failures().collect::<Vec<_>>()))?;
        reports += 1;
    }
    let _ = std::fs::remove_dir_all(&dir);
    ensure(reports > 0, || "no instance had a missing branch point".into())?;
    Ok(format!("{witnessed} branch points witnessed, {reports} stored reports verified"))
}

/// Criterion 5: Ultrametrics with at least three points are never `l1`.
fn ultrametrics(corpus: &[FiniteMetricSpace]) -> Outcome {
    for (k, m) in corpus.iter().enumerate() {
        match ell1_verdict(m) {
            Verdict::NotIsometric { missing, .. } if !missing.is_empty() => {}
            other => return Err(format!("ultrametric {k}: {}", other.tag())),
        }
    }
    Ok(format!("{} ultrametrics", corpus.len()))
}

/// Criterion 6: Banach-Mazur bounds, and the halfspace count behind them.
fn banach_mazur(corpus: &[FiniteMetricSpace]) -> Outcome {
    let m3 = equilateral();
    let t3 = realize(&m3).unwrap();
    let formula = bm_lower_formula(&m3).unwrap();
    ensure(formula == ratio(8, 7), || format!("M3 formula bound {formula}"))?;
    let cert = bm_lower_certified(&m3, &t3).unwrap();
    ensure(cert.certified_bound >= ratio(4, 3), || format!("M3 certified bound {}", cert.certified_bound))?;

    let mut checked = 0;
    for (k, m) in corpus.iter().enumerate() {
        if !m.sep().unwrap().is_positive() {
            continue;
        }
        let t = realize(m).unwrap();
        let cert = bm_lower_certified(m, &t).map_err(|e| format!("instance {k}: {e}"))?;
        ensure(cert.formula_bound > Rational::one(), || format!("instance {k}: formula bound {}", cert.formula_bound))?;
        ensure(cert.certified_bound >= cert.formula_bound, || {
            format!("instance {k}: certified {} below formula {}", cert.certified_bound, cert.formula_bound)
        })?;
        ensure(cert.selected.len() == 2 * (m.len() - 1) + 1, || format!("instance {k}: wrong subset size"))?;
        let f = |i: usize| &cert.family.members[i].f;
        let mut worst = Rational::zero();
        for (a, &i) in cert.selected.iter().enumerate() {
            for &j in &cert.selected[a + 1..] {
                worst = worst.max(lip_norm(m, &f(i).add(f(j)).scale(&ratio(1, 2))));
            }
        }
        ensure(worst == cert.worst_norm, || format!("instance {k}: midpoint norm {} vs claimed {}", worst, cert.worst_norm))?;
        ensure(cert.certified_bound == worst.recip(), || format!("instance {k}: bound is not 1/(1 - eps)"))?;
        checked += 1;
    }
    ensure(checked > 0, || "no instance with sep > 0".into())?;

    let mut r = rng(60_000);
    let mut largest = Vec::new();
    for n in 1..=4 {
        let family = linf_midpoint_family(&mut r, n, 200);
        ensure(family.len() <= 2 * n, || format!("l_inf^{n}: family of {} with interior midpoints", family.len()))?;
        largest.push(family.len());
    }
    Ok(format!(
        "M3: formula 8/7, certified {}; {checked} instances with sep > 0; l_inf families up to {largest:?}",
        cert.certified_bound
    ))
}

/// Criterion 7: The two extremality tests agree on molecules and on functions.
fn extremality(corpus: &[FiniteMetricSpace], functions: usize) -> Outcome {
    let mut pairs = 0;
    for (k, m) in corpus.iter().enumerate().filter(|(_, m)| m.len() <= 8) {
        let t = realize(m).unwrap();
        for x in 0..m.len() {
            for y in 0..m.len() {
                if x == y {
                    continue;
                }
                let seg = is_extreme_molecule_tree(&t, x, y);
                ensure(seg == is_extreme_molecule_lp(m, x, y), || format!("instance {k}: molecule ({x},{y}) disagrees"))?;
                pairs += 1;
            }
        }
    }
    let spaces: Vec<FiniteMetricSpace> = (0..functions as u64)
        .map(|seed| {
            let kind = InstanceKind::ALL[seed as usize % 3];
            gen_instance(kind, 4 + seed as usize % 5, 70_000 + seed).unwrap()
        })
        .collect();
    let mut extreme = 0;
    for (k, m) in spaces.iter().enumerate() {
        let mut r = rng(80_000 + k as u64);
        let tight = [1.0, 0.8, 0.5, 0.0][k % 4];
        let f: LipFunction = random_lipschitz(&mut r, m, tight);
        let graph = is_extreme_lip(m, &f).map_err(|e| e.to_string())?;
        let lp = is_extreme_lip_lp(m, &f).map_err(|e| e.to_string())?;
        ensure(graph == lp, || format!("function {k}: tight graph {graph}, perturbation LP {lp}"))?;
        extreme += usize::from(graph);
    }
    Ok(format!("{pairs} ordered molecules; {functions} functions ({extreme} extreme)"))
}

/// Criterion 8: Non-tree metrics and collinear triples are refused, not analyzed.
fn negative_controls(corpus: &[FiniteMetricSpace]) -> Outcome {
    let mut cycles = vec![square()];
    cycles.extend((0..50).map(|seed| gen_instance(InstanceKind::PerturbedNonHyperbolic, 4 + seed % 7, seed as u64).unwrap()));
    for (k, m) in cycles.iter().enumerate() {
        match ell1_verdict(m) {
            Verdict::NotZeroHyperbolic { quadruple } => {
                ensure(violates_four_point(m, quadruple), || format!("cycle {k}: quadruple {quadruple:?} satisfies the condition"))?
            }
            other => return Err(format!("cycle {k}: {}", other.tag())),
        }
    }
    let mut collinear = 0;
    for (k, m) in corpus.iter().enumerate() {
        if !m.sep().unwrap().is_zero() {
            continue;
        }
        let t = realize(m).unwrap();
        ensure(bm_lower_formula(m) == Err(BoundError::SeparationZero), || format!("instance {k}: formula bound for sep = 0"))?;
        ensure(bm_lower_certified(m, &t) == Err(BoundError::SeparationZero), || format!("instance {k}: certified bound for sep = 0"))?;
        ensure(peaking_family(m, &t) == Err(BoundError::SeparationZero), || format!("instance {k}: peaking family for sep = 0"))?;
        ensure(analyze(Command::Bm, m, None).is_err(), || format!("instance {k}: bm report for sep = 0"))?;
        collinear += 1;
    }
    ensure(collinear > 0, || "no sep = 0 instance in the corpus".into())?;
    Ok(format!("{} cycle metrics refused; {collinear} sep = 0 instances refused", cycles.len()))
}

fn main() -> ExitCode {
    let trees = tree_corpus(200, 4, 12);
    let ultras = ultra_corpus(100, 3, 10);
    let mixed: Vec<FiniteMetricSpace> = trees.iter().chain(&ultras).cloned().collect();
    let separated: Vec<FiniteMetricSpace> = trees
        .iter()
        .map(leaf_space)
        .filter(|m| m.len() >= 3)
        .chain(ultras.iter().cloned())
        .collect();

    let criteria: Vec<(&str, Criterion)> = vec![
        ("metric/tree round-trip", Box::new(|| round_trip(&trees))),
        ("norm oracle equivalence", Box::new(|| norm_oracles(&trees))),
        ("Godard isometry", Box::new(|| godard_isometry(&trees))),
        ("obstruction certificates", Box::new(|| obstructions(&mixed))),
        ("ultrametric corollary", Box::new(|| ultrametrics(&ultras))),
        ("Banach-Mazur bounds", Box::new(|| banach_mazur(&separated))),
        ("extremality cross-validation", Box::new(|| extremality(&mixed, 600))),
        ("negative controls", Box::new(|| negative_controls(&mixed))),
    ];

    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({detail}; {secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({why}; {secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
