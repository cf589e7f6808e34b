//! Acceptance suite: one PASS/FAIL line per criterion.

mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;
use uniserial::report;
use uniserial_core::criteria::{
    check_all_varieties_finite, check_nec, check_suf, halyards_factor, mast_inventory, NecOutcome,
};
use uniserial_core::decide::{decide_algebra, decide_mast, AlgebraStatus, DecideOptions, InfiniteReason, MastOutcome};
use uniserial_core::fibers::{grid_points, int_range, iso_classes, layered_graph, DetourEdge};
use uniserial_core::generators::{realize_variety, tiled_order_presentation, ExponentMatrix, MultilinearSystem};
use uniserial_core::poly::{int, Point, SolveBudget};
use uniserial_core::variety::{analyze, variety, SlackEvidence, VarClass};
use uniserial_core::{Path, Presentation};

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn path(p: &Presentation, text: &str) -> Path {
    p.quiver().parse_path(text).expect("path parses")
}

fn render_polys(p: &Presentation, v: &uniserial_core::variety::VarietyPresentation) -> Vec<String> {
    v.polys.iter().map(|f| f.render(|x| x.render(p.quiver()))).collect()
}

fn at(vars: &[uniserial_core::VarKey], values: &[i64]) -> Point {
    vars.iter().zip(values).map(|(v, x)| (*v, int(*x))).collect()
}

fn criterion_1() -> Result<String, String> {
    let pres = fixture("ex23d");
    let p = path(&pres, "g b1 a");
    let v = variety(&pres, &p, &SolveBudget::default()).map_err(|e| e.to_string())?;
    let polys = render_polys(&pres, &v);
    ensure!(polys == ["X[b2,1,1] - 1"], "polys {:?}", polys);
    let a = analyze(&pres, &p, &SolveBudget::default()).map_err(|e| e.to_string())?;
    let slack = a.slack.ok_or("no slack report")?;
    let classes: Vec<(String, VarClass)> =
        slack.vars.iter().map(|(x, c)| (x.render(pres.quiver()), c.clone())).collect();
    let expected = vec![
        ("X[b2,1,1]".to_string(), VarClass::Tight(vec![int(1)])),
        ("X[b2,1,2]".to_string(), VarClass::Slack(SlackEvidence::Absent)),
    ];
    ensure!(classes == expected, "classes {:?}", classes);
    Ok("V = V(X[b2,1,1] - 1); X[b2,1,1] tight at 1, X[b2,1,2] slack".into())
}

fn criterion_2() -> Result<String, String> {
    let pres = fixture("ex23e");
    let v = variety(&pres, &path(&pres, "a2 a1"), &SolveBudget::default()).map_err(|e| e.to_string())?;
    let dec = &v.decomposition;
    ensure!(dec.is_complete(), "decomposition incomplete");
    ensure!(dec.components.iter().all(|c| c.dimension() == 0), "positive-dimensional component");
    let mut points: Vec<Vec<String>> =
        dec.components.iter().map(|c| c.witness().values().map(|x| x.to_string()).collect()).collect();
    points.sort();
    ensure!(points == [["-1", "-1"], ["1", "1"]], "solutions {:?}", points);
    let a = analyze(&pres, &path(&pres, "a2 a1"), &SolveBudget::default()).map_err(|e| e.to_string())?;
    let slack = a.slack.ok_or("no slack report")?;
    ensure!(slack.vars.iter().all(|(_, c)| *c == VarClass::Tight(vec![int(-1), int(1)])), "classes {:?}", slack.vars);
    Ok("solutions {(1,1), (-1,-1)}, both coordinates tight".into())
}

fn class_count(pres: &Presentation, mast: &str) -> Result<usize, String> {
    let v = variety(pres, &path(pres, mast), &SolveBudget::default()).map_err(|e| e.to_string())?;
    let pts = grid_points(&v, &int_range(-2, 2), 1_000_000).ok_or("grid not enumerable")?;
    Ok(iso_classes(&v, &pts).map_err(|e| e.to_string())?.class_count())
}

fn criterion_3() -> Result<String, String> {
    let pres = fixture("ex36");
    let verdict = decide_algebra(&pres, &DecideOptions::default());
    ensure!(
        verdict.status == AlgebraStatus::InfiniteType { witness: path(&pres, "a d g b") },
        "status {:?}",
        verdict.status
    );
    let m = decide_mast(&pres, &path(&pres, "d g b a"), &DecideOptions::default()).map_err(|e| e.to_string())?;
    ensure!(matches!(m.outcome, MastOutcome::FinitelyMany { count: Some(1), .. }), "outcome {:?}", m.outcome);
    let (cp, cq) = (class_count(&pres, "d g b a")?, class_count(&pres, "a d g b")?);
    ensure!((cp, cq) == (1, 5), "class counts {} and {}", cp, cq);
    Ok("InfiniteType with witness a d g b; d g b a has one class; grid classes 1 and 5".into())
}

fn criterion_4() -> Result<String, String> {
    let pres = fixture("ex42c");
    let budget = SolveBudget::default();
    let left = check_all_varieties_finite(&pres, &mast_inventory(&pres, &budget));
    ensure!(left.holds == Some(false), "left check {:?}", left.holds);
    let verdict = decide_algebra(&pres, &DecideOptions::default());
    ensure!(verdict.status == AlgebraStatus::FiniteType, "status {:?}", verdict.status);
    let opp = pres.opposite();
    let right = check_all_varieties_finite(&opp, &mast_inventory(&opp, &budget));
    ensure!(right.holds == Some(true), "opposite check {:?}", right.holds);
    let v = &left.violations[0];
    Ok(format!(
        "left fails at ({}, {}); opposite passes; FiniteType",
        pres.quiver().arrow_name(v.0),
        pres.quiver().display(&v.1)
    ))
}

fn criterion_5() -> Result<String, String> {
    let pres = fixture("ex52");
    let opts = DecideOptions::default();
    let p = decide_mast(&pres, &path(&pres, "a2 a1 a g g g"), &opts).map_err(|e| e.to_string())?;
    ensure!(
        matches!(p.outcome, MastOutcome::FinitelyMany { count: Some(1), exactly_one: true, .. }),
        "p outcome {:?}",
        p.outcome
    );
    let q = decide_mast(&pres, &path(&pres, "a3 a2 a1 a g g g"), &opts).map_err(|e| e.to_string())?;
    ensure!(
        matches!(
            q.outcome,
            MastOutcome::Infinite(InfiniteReason::NecViolation(_) | InfiniteReason::LoopCaseViolation(_))
        ),
        "q outcome {:?}",
        q.outcome
    );
    Ok("p: FinitelyMany(1, exactly one); q: infinite".into())
}

/// Outcome of (Nec) over the slack variables of a mast: true when all hold.
fn nec_all(pres: &Presentation, p: &Path) -> Result<bool, String> {
    let a = analyze(pres, p, &SolveBudget::default()).map_err(|e| e.to_string())?;
    let slack = a.slack.as_ref().ok_or("not a mast")?;
    let mut all = true;
    for v in slack.slack_vars() {
        match check_nec(a.ctx(), slack, v).map_err(|e| e.to_string())? {
            NecOutcome::Satisfied(d) => {
                if !d.verify(a.ctx(), v) {
                    return Err("decomposition does not verify".into());
                }
            }
            NecOutcome::Violated => all = false,
        }
    }
    Ok(all)
}

fn criterion_6() -> Result<String, String> {
    let pres = fixture("ex56a");
    let p = path(&pres, "a5 a4 a3 a1 a2 a1");
    ensure!(nec_all(&pres, &p)?, "(Nec) fails on p");
    ensure!(!nec_all(&pres, &path(&pres, "a5 a4 a3 a1"))?, "(Nec) holds on q");
    let opp = pres.opposite();
    let dual = pres.quiver().opposite_path(&p);
    ensure!(!nec_all(&opp, &dual)?, "(Nec) holds on the dual mast");
    let verdict = decide_algebra(&pres, &DecideOptions::default());
    ensure!(matches!(verdict.status, AlgebraStatus::InfiniteType { .. }), "status {:?}", verdict.status);
    Ok(format!("(Nec) holds on p, fails on q and on the dual mast {}; InfiniteType", opp.quiver().display(&dual)))
}

fn criterion_7() -> Result<String, String> {
    let pres = fixture("ex56b");
    let verdict = decide_algebra(&pres, &DecideOptions::default());
    ensure!(verdict.status == AlgebraStatus::FiniteType, "status {:?}", verdict.status);
    let p = "a5 a4 a3 a1 a2 a1";
    let n = class_count(&pres, p)?;
    ensure!(n == 1, "{} classes", n);
    let v = variety(&pres, &path(&pres, p), &SolveBudget::default()).map_err(|e| e.to_string())?;
    let q = pres.quiver();
    let edge = |from, to, a: &str| DetourEdge { from, to, arrow: q.arrow_id(a).unwrap() };
    let bare = at(&v.ctx.vars, &[0, 0, 1]);
    let full = at(&v.ctx.vars, &[1, 1, 1]);
    ensure!(v.contains(&bare) && v.contains(&full), "chosen points not in V_p");
    let g0 = layered_graph(&v.ctx, &bare);
    let g1 = layered_graph(&v.ctx, &full);
    ensure!(g0.detours == [edge(3, 6, "a5")], "graph at bare point {:?}", g0.detours);
    ensure!(
        g1.detours == [edge(1, 4, "a3"), edge(1, 6, "a5"), edge(3, 6, "a5")],
        "graph at full point {:?}",
        g1.detours
    );
    ensure!(g0.layers == g1.layers && g0.spine == g1.spine, "spines differ");
    Ok("FiniteType; one class on the grid; both layered graphs match".into())
}

fn criterion_8() -> Result<String, String> {
    let pres = fixture("ex59");
    let verdict = decide_algebra(&pres, &DecideOptions::default());
    ensure!(verdict.status == AlgebraStatus::FiniteType, "status {:?}", verdict.status);
    for m in verdict.masts.iter().filter(|m| !m.mast.is_trivial()) {
        let name = pres.quiver().display(&m.mast);
        let slack = m.analysis.slack.as_ref().ok_or_else(|| format!("{}: no slack report", name))?;
        ensure!(check_suf(m.analysis.ctx(), slack).holds == Some(true), "{}: (Suf) fails", name);
        ensure!(halyards_factor(m.analysis.ctx(), slack) == Some(true), "{}: hypothesis fails", name);
        ensure!(
            matches!(m.outcome, MastOutcome::FinitelyMany { exactly_one: true, .. }),
            "{}: outcome {:?}",
            name,
            m.outcome
        );
    }
    Ok(format!("FiniteType; (Suf) and the hypothesis hold on all {} masts", verdict.masts.len()))
}

fn criterion_9() -> Result<String, String> {
    let mut done = Vec::new();
    for (name, prop) in properties() {
        prop().map_err(|e| format!("{}: {}", name, e))?;
        done.push(name);
    }
    Ok(format!("{} properties", done.len()))
}

fn random_exponent_matrix(rng: &mut ChaCha8Rng) -> ExponentMatrix {
    loop {
        let mut m = vec![vec![0u32; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                if i != j {
                    *x = rng.gen_range(0..=3);
                }
            }
        }
        if let Ok(lam) = ExponentMatrix::new(m) {
            return lam;
        }
    }
}

fn criterion_10() -> Result<String, String> {
    let sys =
        MultilinearSystem::new(2, vec![vec![(vec![1, 2], int(1)), (vec![], int(-1))]]).map_err(|e| e.to_string())?;
    let r = realize_variety(&sys).map_err(|e| e.to_string())?;
    let v = variety(&r.presentation, &r.mast, &SolveBudget::default()).map_err(|e| e.to_string())?;
    ensure!(v.ctx.vars.len() == 2, "realized mast has {} variables", v.ctx.vars.len());
    for x in -2..=2 {
        for y in -2..=2 {
            let pt: Point = r.vars.iter().zip([x, y]).map(|(v, c)| (*v, int(c))).collect();
            ensure!(v.contains(&pt) == sys.vanishes_at(&[int(x), int(y)]), "zero sets differ at ({}, {})", x, y);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x7117ed);
    for k in 0..20 {
        let lam = random_exponent_matrix(&mut rng);
        let pres = tiled_order_presentation(&lam).map_err(|e| e.to_string())?;
        let verdict = decide_algebra(&pres, &DecideOptions::default());
        ensure!(verdict.status == AlgebraStatus::FiniteType, "matrix {} ({:?}): {:?}", k, lam, verdict.status);
        for m in &verdict.masts {
            let mut seen = m.mast.vertices().to_vec();
            seen.sort();
            seen.dedup();
            ensure!(
                seen.len() == m.mast.len() + 1,
                "matrix {}: {} repeats a vertex",
                k,
                pres.quiver().display(&m.mast)
            );
        }
    }
    Ok("zero sets agree on the 5x5 grid; 20 tiled presentations FiniteType with multiplicity-free masts".into())
}

fn criterion_11() -> Result<String, String> {
    let bin = env!("CARGO_BIN_EXE_uniserial");
    for name in FIXTURES {
        let run = || {
            let out = Command::new(bin).arg("decide").arg(fixture_path(name)).output().expect("binary runs");
            (out.status.code(), out.stdout)
        };
        let (first, second) = (run(), run());
        ensure!(first.0 == Some(0), "{}: exit {:?}", name, first.0);
        ensure!(first == second, "{}: outputs differ", name);
        let lib = uniserial::cli::run(["uniserial".into(), "decide".into(), fixture_path(name).into_os_string()]);
        ensure!(lib.stdout.as_bytes() == first.1.as_slice(), "{}: library and binary differ", name);
        let v: serde_json::Value = serde_json::from_slice(&first.1).map_err(|e| e.to_string())?;
        ensure!(report::render(&v).as_bytes() == first.1.as_slice(), "{}: not in canonical form", name);
    }
    Ok(format!("{} fixtures byte-identical across runs", FIXTURES.len()))
}

fn main() {
    let criteria: [(&str, Check); 11] = [
        ("parallel arrows into a loop: variety and slack", criterion_1),
        ("crossed relations: solution set", criterion_2),
        ("two cycles: witness, one class vs five", criterion_3),
        ("loop with tail: left fails, opposite passes, finite type", criterion_4),
        ("loop case masts", criterion_5),
        ("(Nec) on p, q and the dual mast", criterion_6),
        ("strengthened relation: finite type and layered graphs", criterion_7),
        ("(Suf) on every mast", criterion_8),
        ("property suite", criterion_9),
        ("generator round trips", criterion_10),
        ("determinism", criterion_11),
    ];
    let mut failed = 0;
    for (i, (label, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {}: {}", i + 1, label, detail),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {}: {}", i + 1, label, why);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
