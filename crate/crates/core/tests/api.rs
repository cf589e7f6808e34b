use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use uniserial_core::decide::{decide_algebra, AlgebraStatus, DecideOptions};
use uniserial_core::fibers::{iso_equivalent, layered_graph};
use uniserial_core::poly::{int, Point, SolveBudget};
use uniserial_core::variety::{slack_report, variety, VarClass};
use uniserial_core::{Path, Presentation, Quiver, Scalar};

fn build(
    vertices: &[&str],
    arrows: &[(&str, &str, &str)],
    relations: &[&[(i64, &str)]],
    loewy: Option<usize>,
) -> Presentation {
    let q = Quiver::new(
        vertices.iter().copied(),
        arrows.iter().map(|(n, s, t)| (n.to_string(), s.to_string(), t.to_string())),
    )
    .unwrap();
    let raw = relations.iter().map(|r| r.iter().map(|(c, p)| (int(*c), q.parse_path(p).unwrap())).collect()).collect();
    Presentation::new(q, raw, loewy).unwrap()
}

fn crossed_relations() -> Presentation {
    build(
        &["1", "2", "3"],
        &[("a1", "1", "2"), ("b1", "1", "2"), ("a2", "2", "3"), ("b2", "2", "3")],
        &[&[(1, "a2 a1"), (-1, "b2 b1")], &[(1, "b2 a1"), (-1, "a2 b1")]],
        Some(3),
    )
}

fn two_cycles() -> Presentation {
    build(&["1", "2", "3"], &[("a", "1", "2"), ("b", "2", "1"), ("g", "1", "3"), ("d", "3", "1")], &[], Some(5))
}

fn path(p: &Presentation, text: &str) -> Path {
    p.quiver().parse_path(text).unwrap()
}

fn at(vars: &[uniserial_core::VarKey], values: &[i64]) -> Point {
    vars.iter().zip(values).map(|(v, x)| (*v, int(*x))).collect()
}

/// Brute force over the grid: exactly the two points `(1, 1)` and
/// `(-1, -1)` solve the system for the length-two mast.
#[test]
fn crossed_relations_grid_oracle() {
    let pres = crossed_relations();
    let v = variety(&pres, &path(&pres, "a2 a1"), &SolveBudget::default()).unwrap();
    assert_eq!(v.ctx.vars.len(), 2);
    let mut found = Vec::new();
    for x in -2..=2 {
        for y in -2..=2 {
            if v.contains(&at(&v.ctx.vars, &[x, y])) {
                found.push((x, y));
            }
        }
    }
    assert_eq!(found, vec![(-1, -1), (1, 1)]);
    let s = slack_report(&v).unwrap();
    for (_, class) in &s.vars {
        assert_eq!(class, &VarClass::Tight(vec![int(-1), int(1)]));
    }
}

#[test]
fn two_cycle_algebra_is_infinite() {
    let v = decide_algebra(&two_cycles(), &DecideOptions::default());
    let pres = two_cycles();
    assert_eq!(v.status, AlgebraStatus::InfiniteType { witness: path(&pres, "a d g b") });
}

#[test]
fn detour_graph_at_a_point() {
    let pres = two_cycles();
    let v = variety(&pres, &path(&pres, "d g b a"), &SolveBudget::default()).unwrap();
    let g = layered_graph(&v.ctx, &at(&v.ctx.vars, &[3]));
    assert_eq!(g.detours.len(), 1);
    assert!(layered_graph(&v.ctx, &at(&v.ctx.vars, &[0])).is_edge_path());
}

fn config() -> Config {
    Config { cases: 128, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..Config::default() }
}

proptest! {
    #![proptest_config(config())]

    /// On `d g b a` every point is a change of top element away from zero.
    #[test]
    fn single_class_mast(k in -40i64..40) {
        let pres = two_cycles();
        let v = variety(&pres, &path(&pres, "d g b a"), &SolveBudget::default()).unwrap();
        let zero = at(&v.ctx.vars, &[0]);
        prop_assert!(iso_equivalent(&v, &zero, &at(&v.ctx.vars, &[k])).unwrap().is_equivalent());
    }

    /// On `a d g b` the slack coordinate is an invariant.
    #[test]
    fn separated_points(k in -40i64..40, l in -40i64..40) {
        let pres = two_cycles();
        let v = variety(&pres, &path(&pres, "a d g b"), &SolveBudget::default()).unwrap();
        let same = iso_equivalent(&v, &at(&v.ctx.vars, &[k]), &at(&v.ctx.vars, &[l])).unwrap().is_equivalent();
        prop_assert_eq!(same, k == l);
    }

    /// Reversing every arrow twice gives back the presentation.
    #[test]
    fn opposite_twice(arrows in prop::collection::vec((0usize..3, 0usize..3), 1..6), loewy in 2usize..6, picks in prop::collection::vec(any::<u16>(), 0..4)) {
        let names: Vec<(String, String, String)> =
            arrows.iter().enumerate().map(|(i, (s, t))| (format!("x{}", i), s.to_string(), t.to_string())).collect();
        let q = Quiver::new(["0", "1", "2"], names).unwrap();
        let mut raw: Vec<Vec<(Scalar, Path)>> = Vec::new();
        for pick in picks {
            let v = q.vertex_ids().nth(pick as usize % 3).unwrap();
            let paths = q.enumerate_paths(v, v, 2..loewy);
            if let Some(p) = paths.get(pick as usize % paths.len().max(1)) {
                raw.push(vec![(int(1), p.clone())]);
            }
        }
        let pres = Presentation::new(q, raw, Some(loewy)).unwrap();
        let back = pres.opposite().opposite();
        prop_assert_eq!(back.quiver(), pres.quiver());
        prop_assert_eq!(back.relations(), pres.relations());
        prop_assert_eq!(back.loewy(), pres.loewy());
    }
}
