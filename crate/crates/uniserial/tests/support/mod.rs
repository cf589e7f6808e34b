//! Fixture loading, random presentations and the shared property checks.
#![allow(dead_code)]

use std::path::PathBuf;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uniserial::parse_presentation;
use uniserial_core::criteria::{check_monomial_segments, check_suf, mast_inventory};
use uniserial_core::fibers::{grid_points, int_range, iso_equivalent, normalize_point};
use uniserial_core::poly::{frac, int, occurs, SolveBudget};
use uniserial_core::variety::{analyze, variety, SlackEvidence, VarClass};
use uniserial_core::{Path, Presentation, Quiver, Scalar};

pub const FIXTURES: &[&str] = &["ex23a", "ex23d", "ex23e", "ex36", "ex42c", "ex52", "ex56a", "ex56b", "ex59"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{}.alg", name))
}

pub fn fixture(name: &str) -> Presentation {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    parse_presentation(&text).unwrap_or_else(|e| panic!("{}: {}", name, e))
}

pub fn random_quiver(rng: &mut ChaCha8Rng, max_vertices: usize, max_arrows: usize) -> Quiver {
    let n = rng.gen_range(1..=max_vertices);
    let m = rng.gen_range(1..=max_arrows);
    let arrows: Vec<(String, String, String)> = (0..m)
        .map(|i| (format!("x{}", i), format!("v{}", rng.gen_range(0..n)), format!("v{}", rng.gen_range(0..n))))
        .collect();
    Quiver::new((0..n).map(|i| format!("v{}", i)), arrows).expect("valid quiver")
}

/// A random walk of exactly `len` arrows, if one gets that far.
pub fn random_path(q: &Quiver, rng: &mut ChaCha8Rng, len: usize) -> Option<Path> {
    let vertices: Vec<_> = q.vertex_ids().collect();
    let mut p = Path::trivial(*vertices.choose(rng)?);
    for _ in 0..len {
        let a = *q.arrows_from(p.target()).choose(rng)?;
        p = q.extend(&p, a).expect("outgoing arrow");
    }
    Some(p)
}

fn path_count(q: &Quiver, loewy: usize) -> usize {
    let mut n = 0;
    for v in q.vertex_ids() {
        q.walk_paths_from(v, loewy, |_| {
            n += 1;
            true
        });
    }
    n
}

/// Monomial relations on at most four vertices with `L <= 8`. Dense quivers
/// get a smaller `L` so that every path can go through the solver.
pub fn random_monomial(seed: u64) -> Presentation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_quiver(&mut rng, 4, 6);
    let mut loewy = rng.gen_range(2..=8);
    while loewy > 2 && path_count(&q, loewy) > MAX_PATHS {
        loewy -= 1;
    }
    let mut gens = Vec::new();
    for _ in 0..rng.gen_range(0..=4) {
        let len = rng.gen_range(2..=loewy.max(3) - 1);
        if let Some(p) = random_path(&q, &mut rng, len).filter(|p| p.len() < loewy) {
            gens.push(vec![(int(1), p)]);
        }
    }
    loop {
        let pres = Presentation::new(q.clone(), gens.clone(), Some(loewy)).expect("monomial presentation");
        if pres.nonzero_paths(loewy).expect("monomial").len() <= MAX_NONZERO_PATHS {
            return pres;
        }
        if let Some(p) = random_path(&q, &mut rng, 2) {
            gens.push(vec![(int(1), p)]);
        }
    }
}

const MAX_PATHS: usize = 200;
const MAX_NONZERO_PATHS: usize = 60;

/// Monomial and binomial relations, `L <= 5`.
pub fn random_binomial(seed: u64) -> Presentation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_quiver(&mut rng, 3, 5);
    let loewy = rng.gen_range(3..=5);
    let coeffs = [int(1), int(-1), int(2), frac(1, 2)];
    let mut raw: Vec<Vec<(Scalar, Path)>> = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let len = rng.gen_range(2..loewy);
        let Some(p) = random_path(&q, &mut rng, len) else { continue };
        let others: Vec<Path> =
            q.enumerate_paths(p.source(), p.target(), 2..loewy).into_iter().filter(|o| *o != p).collect();
        match others.choose(&mut rng) {
            Some(o) if rng.gen_bool(0.7) => {
                raw.push(vec![(int(1), p), (-coeffs.choose(&mut rng).unwrap().clone(), o.clone())])
            }
            _ => raw.push(vec![(int(1), p)]),
        }
    }
    Presentation::new(q, raw, Some(loewy)).expect("presentation")
}

pub fn runner(cases: u32, seed: u8) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

/// Runs `check` on `cases` fixed-seed random `u64`s.
pub fn run_property<F>(cases: u32, seed: u8, check: F) -> Result<(), String>
where
    F: Fn(u64) -> Result<(), TestCaseError>,
{
    runner(cases, seed).run(&any::<u64>(), check).map_err(|e| e.to_string())
}

fn positive_paths(pres: &Presentation) -> Vec<Path> {
    let q = pres.quiver();
    let mut out = Vec::new();
    for v in q.vertex_ids() {
        q.walk_paths_from(v, pres.loewy(), |p| {
            if !p.is_trivial() {
                out.push(p.clone());
            }
            true
        });
    }
    out
}

/// An arrow parallel to a mast that does not start it never reaches the
/// defining polynomials through the coordinate going with the whole mast.
pub fn check_dropout(pres: &Presentation) -> Result<usize, TestCaseError> {
    let q = pres.quiver();
    let budget = SolveBudget::default();
    let mut checked = 0;
    for p in positive_paths(pres) {
        let a = analyze(pres, &p, &budget).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let Some(slack) = &a.slack else { continue };
        for alpha in q.arrow_ids() {
            let arrow = q.arrow(alpha);
            if arrow.source != p.source() || arrow.target != p.target() || p.first_arrow() == Some(alpha) {
                continue;
            }
            let d = a.ctx().detour(alpha, 0).ok_or_else(|| TestCaseError::fail("missing detour at the top"))?;
            prop_assert_eq!(*d.family.last().unwrap(), p.len());
            let x = d.var(d.family.len());
            prop_assert!(!occurs(x, &a.variety.polys), "{} occurs for {}", x.render(q), q.display(&p));
            prop_assert_eq!(slack.class(x), Some(&VarClass::Slack(SlackEvidence::Absent)));
            checked += 1;
        }
    }
    Ok(checked)
}

/// For monomial input: `V_p` is nonempty exactly when `p` avoids the ideal.
pub fn check_monomial_masthood(pres: &Presentation) -> Result<(), TestCaseError> {
    let budget = SolveBudget::default();
    for p in positive_paths(pres) {
        let v = variety(pres, &p, &budget).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let inside = pres.monomial_contains(&p).expect("monomial");
        prop_assert!(!v.status.is_nonempty() || !inside, "{} in I but V_p nonempty", pres.quiver().display(&p));
        prop_assert!(v.status.is_nonempty() || inside, "{} outside I but V_p not nonempty", pres.quiver().display(&p));
    }
    Ok(())
}

/// (Suf) on every mast of positive length agrees with the combinatorial
/// segment condition. `Ok(false)` when some classification is undecided.
pub fn check_suf_vs_segments(pres: &Presentation) -> Result<bool, TestCaseError> {
    let budget = SolveBudget::default();
    let inv = mast_inventory(pres, &budget);
    let mut all_suf = true;
    for p in inv.masts.iter().filter(|p| !p.is_trivial()) {
        let a = analyze(pres, p, &budget).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let slack = a.slack.as_ref().ok_or_else(|| TestCaseError::fail("mast without slack report"))?;
        match check_suf(a.ctx(), slack).holds {
            Some(true) => {}
            Some(false) => all_suf = false,
            None => return Ok(false),
        }
    }
    let segments = check_monomial_segments(pres).map_err(|e| TestCaseError::fail(e.to_string()))?;
    if let Some(w) = &segments.witness {
        prop_assert!(w.verify(pres), "segment witness does not verify");
    }
    prop_assert_eq!(segments.holds, all_suf, "segment condition vs (Suf) on all masts");
    Ok(true)
}

/// Some masts of `pres` with up to `max_points` small grid points each.
fn sample_points(
    pres: &Presentation,
    max_points: usize,
) -> Vec<(uniserial_core::variety::MastAnalysis, Vec<uniserial_core::poly::Point>)> {
    let budget = SolveBudget::default();
    let values = int_range(-1, 1);
    let mut out = Vec::new();
    for p in positive_paths(pres) {
        let Ok(a) = analyze(pres, &p, &budget) else { continue };
        if a.slack.is_none() {
            continue;
        }
        let Some(mut pts) = grid_points(&a.variety, &values, 300) else { continue };
        pts.truncate(max_points);
        if !pts.is_empty() {
            out.push((a, pts));
        }
    }
    out
}

/// Each point is equivalent to itself and equivalence is symmetric.
pub fn check_iso_audit(pres: &Presentation) -> Result<usize, TestCaseError> {
    let mut pairs = 0;
    for (a, pts) in sample_points(pres, 5) {
        for k in &pts {
            let o = iso_equivalent(&a.variety, k, k).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(o.is_equivalent(), "point not equivalent to itself");
        }
        for (i, k0) in pts.iter().enumerate() {
            for k in &pts[i + 1..] {
                let there = iso_equivalent(&a.variety, k0, k).unwrap().is_equivalent();
                let back = iso_equivalent(&a.variety, k, k0).unwrap().is_equivalent();
                prop_assert_eq!(there, back, "asymmetric on {}", pres.quiver().display(&a.ctx().path));
                pairs += 1;
            }
        }
    }
    Ok(pairs)
}

/// Normalizing twice changes nothing, and the result is isomorphic to the
/// input.
pub fn check_normalize(pres: &Presentation) -> Result<usize, TestCaseError> {
    let mut done = 0;
    for (a, pts) in sample_points(pres, 4) {
        let slack = a.slack.as_ref().unwrap();
        for k in &pts {
            let Ok(n) = normalize_point(&a.variety, slack, k) else { continue };
            prop_assert!(a.variety.contains(&n), "normalized point left the variety");
            prop_assert_eq!(&normalize_point(&a.variety, slack, &n).unwrap(), &n);
            prop_assert!(iso_equivalent(&a.variety, k, &n).unwrap().is_equivalent(), "class changed");
            for v in slack.slack_vars() {
                prop_assert_eq!(n.get(&v), Some(&int(0)));
            }
            done += 1;
        }
    }
    Ok(done)
}

pub fn check_opposite(pres: &Presentation) -> Result<(), TestCaseError> {
    let back = pres.opposite().opposite();
    prop_assert_eq!(back.quiver(), pres.quiver());
    prop_assert_eq!(back.relations(), pres.relations());
    prop_assert_eq!(back.loewy(), pres.loewy());
    prop_assert_eq!(pres.opposite().is_monomial(), pres.is_monomial());
    Ok(())
}

pub type Property = Box<dyn Fn() -> Result<(), String>>;

/// The property suite: name, and a runner over fixed-seed random cases.
pub fn properties() -> Vec<(&'static str, Property)> {
    vec![
        ("variable dropout", Box::new(|| run_property(128, 1, |s| check_dropout(&random_binomial(s)).map(|_| ())))),
        (
            "variable dropout (monomial)",
            Box::new(|| run_property(128, 2, |s| check_dropout(&random_monomial(s)).map(|_| ()))),
        ),
        ("monomial masthood", Box::new(|| run_property(128, 3, |s| check_monomial_masthood(&random_monomial(s))))),
        (
            "(Suf) on all masts vs segment condition",
            Box::new(|| run_property(160, 4, |s| check_suf_vs_segments(&random_monomial(s)).map(|_| ()))),
        ),
        (
            "iso reflexive and symmetric",
            Box::new(|| run_property(128, 5, |s| check_iso_audit(&random_binomial(s)).map(|_| ()))),
        ),
        (
            "normalize idempotent and class preserving",
            Box::new(|| run_property(128, 6, |s| check_normalize(&random_binomial(s)).map(|_| ()))),
        ),
        ("opposite involution", Box::new(|| run_property(128, 7, |s| check_opposite(&random_binomial(s))))),
    ]
}
