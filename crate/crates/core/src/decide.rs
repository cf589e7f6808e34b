//! Finite uniserial type, per mast and per algebra.
//!
//! A mast is settled by the first step that applies: a finite variety,
//! the loop case, the sufficient shape condition, a violation of the
//! necessary shape condition or of the dimension bound, the same steps on
//! the dual mast of the opposite algebra, an orbit certificate, and finally
//! a grid probe. Only the probe is not exact; its results are reported as
//! uncertified and never make an algebra verdict decisive.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::criteria::{
    check_all_varieties_finite, check_condition_n, check_dimension, check_halyard_catalogue, check_loop_case,
    check_monomial_segments, check_nec, check_suf, halyards_factor, mast_inventory, CatalogueOutcome, LoopCase,
    LoopCaseReport, MastInventory, NecOutcome, PairReport,
};
use crate::fibers::{grid_points, int_range, iso_classes, orbit_certificate};
use crate::poly::{Point, SolveBudget, VarKey};
use crate::presentation::Presentation;
use crate::quiver::Path;
use crate::variety::{analyze, MastAnalysis, VarClass, VarietyError, VarietyStatus};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("path is not a mast")]
    NotAMast,
    #[error(transparent)]
    Variety(#[from] VarietyError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecideOptions {
    pub budget: SolveBudget,
    /// Use the acyclic, monomial and low Loewy length shortcuts.
    pub fast_paths: bool,
    /// Grid radii for the probe; counts must agree on the last three.
    pub probe_radii: Vec<i64>,
    /// Maximum parameter choices per component and radius.
    pub probe_limit: usize,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            budget: SolveBudget::default(),
            fast_paths: true,
            probe_radii: alloc::vec![1, 2, 3],
            probe_limit: 400,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InfiniteReason {
    NecViolation(VarKey),
    DimensionExceeds {
        lower_bound: usize,
        t: usize,
    },
    LoopCaseViolation(LoopCaseReport),
    /// The dual mast of the opposite algebra has infinitely many classes.
    Dual(Box<InfiniteReason>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FiniteReason {
    /// Every coordinate is tight, so `V_p` is finite.
    FiniteVariety,
    LoopCase,
    Suf,
    Orbit,
    Probe,
    Dual(Box<FiniteReason>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MastOutcome {
    FinitelyMany { count: Option<usize>, exactly_one: bool, certified: bool, reason: FiniteReason },
    Infinite(InfiniteReason),
    Unknown(Vec<String>),
}

impl MastOutcome {
    pub fn is_infinite(&self) -> bool {
        matches!(self, MastOutcome::Infinite(_))
    }

    /// Finite with an exact argument.
    pub fn is_certified_finite(&self) -> bool {
        matches!(self, MastOutcome::FinitelyMany { certified: true, .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MastVerdict {
    pub mast: Path,
    pub outcome: MastOutcome,
    pub analysis: MastAnalysis,
    /// Pipeline steps that ran, in order.
    pub steps: Vec<String>,
    /// `(radius, class count)` per probe level.
    pub probe: Vec<(i64, usize)>,
}

impl MastVerdict {
    /// `V_p` is an affine space.
    pub fn linear(&self) -> bool {
        self.analysis.slack.as_ref().is_some_and(|s| s.linear)
    }
}

/// Steps that only need the mast's own analysis.
fn basic_steps(pres: &Presentation, a: &MastAnalysis, steps: &mut Vec<String>) -> Option<MastOutcome> {
    let ctx = a.ctx();
    let slack = a.slack.as_ref()?;
    let dec = &a.variety.decomposition;
    if slack.slack_vars().next().is_none() && !slack.has_unknown() {
        steps.push("finite variety".into());
        let points: Vec<Point> = dec.components.iter().map(|c| c.witness()).collect();
        let points = if points.is_empty() { alloc::vec![ctx.zero_point()] } else { points };
        let part = iso_classes(&a.variety, &points).ok()?;
        let count = part.class_count();
        return Some(MastOutcome::FinitelyMany {
            count: Some(count),
            exactly_one: count == 1,
            certified: true,
            reason: FiniteReason::FiniteVariety,
        });
    }
    if let LoopCase::Applicable(report) = check_loop_case(pres, ctx, slack) {
        steps.push("loop case".into());
        match report.finite {
            Some(true) => {
                let exactly_one = report.exactly_one == Some(true);
                return Some(MastOutcome::FinitelyMany {
                    count: exactly_one.then_some(1),
                    exactly_one,
                    certified: true,
                    reason: FiniteReason::LoopCase,
                });
            }
            Some(false) => return Some(MastOutcome::Infinite(InfiniteReason::LoopCaseViolation(report))),
            None => {}
        }
    }
    steps.push("suf".into());
    if check_suf(ctx, slack).holds == Some(true) {
        let exactly_one = halyards_factor(ctx, slack) == Some(true);
        return Some(MastOutcome::FinitelyMany {
            count: exactly_one.then_some(1),
            exactly_one,
            certified: true,
            reason: FiniteReason::Suf,
        });
    }
    steps.push("nec".into());
    for v in slack.slack_vars() {
        if check_nec(ctx, slack, v) == Ok(NecOutcome::Violated) {
            return Some(MastOutcome::Infinite(InfiniteReason::NecViolation(v)));
        }
    }
    steps.push("dimension".into());
    if let Some(ex) = check_dimension(ctx, slack) {
        return Some(MastOutcome::Infinite(InfiniteReason::DimensionExceeds { lower_bound: ex.lower_bound, t: ex.t }));
    }
    None
}

/// Fills in an exact class count from an orbit certificate when possible.
fn with_count(outcome: MastOutcome, a: &MastAnalysis) -> MastOutcome {
    match outcome {
        MastOutcome::FinitelyMany { count: None, certified: true, reason, .. } => match orbit_certificate(&a.variety) {
            Some(cert) => {
                let c = cert.class_count();
                MastOutcome::FinitelyMany { count: Some(c), exactly_one: c == 1, certified: true, reason }
            }
            None => MastOutcome::FinitelyMany { count: None, exactly_one: false, certified: true, reason },
        },
        other => other,
    }
}

fn probe(a: &MastAnalysis, opts: &DecideOptions, history: &mut Vec<(i64, usize)>) -> MastOutcome {
    for &r in &opts.probe_radii {
        let Some(points) = grid_points(&a.variety, &int_range(-r, r), opts.probe_limit) else {
            return MastOutcome::Unknown(alloc::vec![format!("grid of radius {} not enumerable", r)]);
        };
        let Ok(part) = iso_classes(&a.variety, &points) else {
            return MastOutcome::Unknown(alloc::vec!["grid point outside the variety".into()]);
        };
        history.push((r, part.class_count()));
    }
    let counts: Vec<usize> = history.iter().map(|h| h.1).collect();
    if counts.len() >= 3 && counts[counts.len() - 3..].windows(2).all(|w| w[0] == w[1]) {
        let c = counts[counts.len() - 1];
        MastOutcome::FinitelyMany { count: Some(c), exactly_one: c == 1, certified: false, reason: FiniteReason::Probe }
    } else {
        MastOutcome::Unknown(alloc::vec![format!("class counts over growing grids: {:?}", counts)])
    }
}

/// Runs the per-mast pipeline with a precomputed analysis. `opposite` is
/// the opposite presentation, used for the dual mast.
pub fn decide_analyzed(
    pres: &Presentation,
    opposite: &Presentation,
    analysis: MastAnalysis,
    opts: &DecideOptions,
) -> MastVerdict {
    let mast = analysis.ctx().path.clone();
    let mut steps = Vec::new();
    let mut history = Vec::new();
    let outcome = match &analysis.variety.status {
        VarietyStatus::Unknown(why) => MastOutcome::Unknown(alloc::vec![why.clone()]),
        VarietyStatus::Empty(_) => MastOutcome::Unknown(alloc::vec!["not a mast".into()]),
        VarietyStatus::Nonempty(_) => {
            if let Some(o) = basic_steps(pres, &analysis, &mut steps) {
                with_count(o, &analysis)
            } else {
                steps.push("dual".into());
                let dual = opposite.quiver().opposite_path(&mast);
                let dual_outcome = analyze(opposite, &dual, &opts.budget)
                    .ok()
                    .and_then(|da| basic_steps(opposite, &da, &mut Vec::new()));
                match dual_outcome {
                    Some(MastOutcome::Infinite(r)) => MastOutcome::Infinite(InfiniteReason::Dual(Box::new(r))),
                    Some(MastOutcome::FinitelyMany { count, exactly_one, certified, reason }) => with_count(
                        MastOutcome::FinitelyMany {
                            count,
                            exactly_one,
                            certified,
                            reason: FiniteReason::Dual(Box::new(reason)),
                        },
                        &analysis,
                    ),
                    _ => {
                        steps.push("orbit".into());
                        match orbit_certificate(&analysis.variety) {
                            Some(cert) => {
                                let c = cert.class_count();
                                MastOutcome::FinitelyMany {
                                    count: Some(c),
                                    exactly_one: c == 1,
                                    certified: true,
                                    reason: FiniteReason::Orbit,
                                }
                            }
                            None => {
                                steps.push("probe".into());
                                probe(&analysis, opts, &mut history)
                            }
                        }
                    }
                }
            }
        }
    };
    MastVerdict { mast, outcome, analysis, steps, probe: history }
}

pub fn decide_mast(pres: &Presentation, p: &Path, opts: &DecideOptions) -> Result<MastVerdict, DecideError> {
    let analysis = analyze(pres, p, &opts.budget)?;
    if analysis.variety.status.is_empty() {
        return Err(DecideError::NotAMast);
    }
    Ok(decide_analyzed(pres, &pres.opposite(), analysis, opts))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraStatus {
    FiniteType,
    InfiniteType { witness: Path },
    Unknown(Vec<Path>),
}

impl AlgebraStatus {
    pub fn is_decisive(&self) -> bool {
        !matches!(self, AlgebraStatus::Unknown(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub step: &'static str,
    pub result: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraVerdict {
    pub status: AlgebraStatus,
    pub trace: Vec<TraceStep>,
    pub condition_n: PairReport,
    pub masts: Vec<MastVerdict>,
    pub anomalies: Vec<String>,
    pub unresolved: Vec<String>,
}

impl AlgebraVerdict {
    /// Decisive verdicts rest only on exact arguments.
    pub fn certified(&self) -> bool {
        self.status.is_decisive()
    }

    pub fn mast(&self, p: &Path) -> Option<&MastVerdict> {
        self.masts.iter().find(|m| &m.mast == p)
    }
}

fn fast_paths(
    pres: &Presentation,
    inv: &MastInventory,
    trace: &mut Vec<TraceStep>,
    anomalies: &mut Vec<String>,
) -> Option<AlgebraStatus> {
    let q = pres.quiver();
    if q.is_acyclic() {
        trace.push(TraceStep { step: "acyclic", result: "condition N decides".into() });
        return Some(AlgebraStatus::FiniteType);
    }
    if pres.is_monomial() {
        let r = check_monomial_segments(pres).expect("monomial checked");
        trace.push(TraceStep {
            step: "monomial",
            result: match &r.witness {
                Some(w) => format!("segment condition fails on {} at ({}, {})", q.display(&w.path), w.i, w.j),
                None => "segment condition holds".into(),
            },
        });
        return Some(match r.witness {
            Some(w) => AlgebraStatus::InfiniteType { witness: w.path },
            None => AlgebraStatus::FiniteType,
        });
    }
    let l = pres.loewy();
    if l <= 3 {
        trace.push(TraceStep { step: "catalogue", result: "Loewy length at most 3, condition N decides".into() });
        return Some(AlgebraStatus::FiniteType);
    }
    if l <= 6 && inv.unknown.is_empty() {
        let mut conforms = true;
        for p in &inv.masts {
            let Some(a) = inv.analyses.get(p) else { continue };
            let Some(slack) = &a.slack else {
                conforms = false;
                continue;
            };
            match check_halyard_catalogue(a.ctx(), slack) {
                Ok(CatalogueOutcome::Violates(v)) => {
                    trace.push(TraceStep {
                        step: "catalogue",
                        result: format!("{} has a halyard {} outside the catalogue", q.display(p), v.render(q)),
                    });
                    return Some(AlgebraStatus::InfiniteType { witness: p.clone() });
                }
                Ok(CatalogueOutcome::Conforms(_)) => {}
                Ok(CatalogueOutcome::Unknown(_)) => conforms = false,
                Err(e) => {
                    anomalies.push(format!("catalogue on {}: {}", q.display(p), e));
                    conforms = false;
                }
            }
        }
        if conforms && l <= 5 {
            trace.push(TraceStep { step: "catalogue", result: "every halyard matches the catalogue".into() });
            return Some(AlgebraStatus::FiniteType);
        }
        trace.push(TraceStep { step: "catalogue", result: "not decisive".into() });
    }
    None
}

/// Decides whether the algebra has finite uniserial type.
pub fn decide_algebra(pres: &Presentation, opts: &DecideOptions) -> AlgebraVerdict {
    let q = pres.quiver();
    let mut trace = Vec::new();
    let mut anomalies = Vec::new();

    let double = q.has_double_arrows();
    trace.push(TraceStep { step: "double arrows", result: if double { "present".into() } else { "none".into() } });

    let mut inv = mast_inventory(pres, &opts.budget);
    trace.push(TraceStep {
        step: "masts",
        result: format!("{} masts, {} undecided paths", inv.masts.len(), inv.unknown.len()),
    });

    let condition_n = check_condition_n(pres, &inv);
    let mut theorem: Option<AlgebraStatus> = None;
    match condition_n.holds {
        Some(false) => {
            let (a, p) = &condition_n.violations[0];
            trace.push(TraceStep {
                step: "condition N",
                result: format!("fails: {} is parallel to arrow {}", q.display(p), q.arrow_name(*a)),
            });
            theorem = Some(AlgebraStatus::InfiniteType { witness: p.clone() });
        }
        Some(true) => trace.push(TraceStep { step: "condition N", result: "holds".into() }),
        None => trace.push(TraceStep { step: "condition N", result: "undecided".into() }),
    }
    if theorem.is_none() && condition_n.holds == Some(true) && opts.fast_paths {
        theorem = fast_paths(pres, &inv, &mut trace, &mut anomalies);
    }

    // The generic pipeline, on every mast.
    let opposite = pres.opposite();
    let mut masts = Vec::new();
    for p in inv.masts.clone() {
        let analysis = match inv.analyses.remove(&p) {
            Some(a) => a,
            None => analyze(pres, &p, &opts.budget).expect("positive length"),
        };
        masts.push(decide_analyzed(pres, &opposite, analysis, opts));
    }
    let mut unresolved: Vec<String> =
        inv.unknown.iter().map(|p| format!("masthood of {} undecided", q.display(p))).collect();
    let infinite: Vec<&MastVerdict> = masts.iter().filter(|m| m.outcome.is_infinite()).collect();
    let open: Vec<&MastVerdict> =
        masts.iter().filter(|m| !m.outcome.is_infinite() && !m.outcome.is_certified_finite()).collect();
    let generic = if let Some(m) = infinite.first() {
        AlgebraStatus::InfiniteType { witness: m.mast.clone() }
    } else if open.is_empty() && inv.unknown.is_empty() {
        AlgebraStatus::FiniteType
    } else {
        let mut paths: Vec<Path> = open.iter().map(|m| m.mast.clone()).collect();
        paths.extend(inv.unknown.iter().cloned());
        AlgebraStatus::Unknown(paths)
    };
    for m in &open {
        unresolved.push(match &m.outcome {
            MastOutcome::Unknown(why) => format!("{}: {}", q.display(&m.mast), why.join("; ")),
            _ => format!("{}: class count from grid probe only", q.display(&m.mast)),
        });
    }
    trace.push(TraceStep {
        step: "per mast",
        result: format!(
            "{} infinite, {} certified finite, {} open",
            infinite.len(),
            masts.iter().filter(|m| m.outcome.is_certified_finite()).count(),
            open.len()
        ),
    });

    let status = match (theorem, generic) {
        (Some(t), g) if g.is_decisive() && core::mem::discriminant(&t) != core::mem::discriminant(&g) => {
            anomalies.push(format!("shortcut and per-mast pipeline disagree: {:?} vs {:?}", t, g));
            AlgebraStatus::Unknown(Vec::new())
        }
        (Some(AlgebraStatus::InfiniteType { witness }), g) => {
            // Prefer a witness whose own verdict is infinite.
            let confirmed = masts.iter().any(|m| m.mast == witness && m.outcome.is_infinite());
            match g {
                AlgebraStatus::InfiniteType { witness: w } if !confirmed => AlgebraStatus::InfiniteType { witness: w },
                _ => AlgebraStatus::InfiniteType { witness },
            }
        }
        (Some(t), _) => t,
        (None, g) => g,
    };
    if let AlgebraStatus::Unknown(_) = status {
        if unresolved.is_empty() {
            unresolved.extend(anomalies.iter().cloned());
        }
    } else {
        unresolved.clear();
    }
    AlgebraVerdict { status, trace, condition_n, masts, anomalies, unresolved }
}

/// Whether some `V_p` is infinite, via the arrow-first condition on masts.
pub fn all_varieties_finite(pres: &Presentation, budget: &SolveBudget) -> Option<bool> {
    check_all_varieties_finite(pres, &mast_inventory(pres, budget)).holds
}

/// Slack classes of a mast's variables, for reporting.
pub fn slack_table(a: &MastAnalysis) -> BTreeMap<VarKey, VarClass> {
    a.slack.as_ref().map(|s| s.vars.iter().cloned().collect()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::int;
    use crate::quiver::Quiver;
    use alloc::string::ToString;

    fn pres(vs: &[&str], arrows: &[(&str, &str, &str)], rels: &[&[(i64, &str)]], loewy: Option<usize>) -> Presentation {
        let q = Quiver::new(
            vs.iter().map(|s| s.to_string()),
            arrows.iter().map(|(n, s, t)| (n.to_string(), s.to_string(), t.to_string())),
        )
        .unwrap();
        let raw = rels.iter().map(|r| r.iter().map(|(c, p)| (int(*c), q.parse_path(p).unwrap())).collect()).collect();
        Presentation::new(q, raw, loewy).unwrap()
    }

    fn two_cycles() -> Presentation {
        pres(&["1", "2", "3"], &[("a", "1", "2"), ("b", "2", "1"), ("g", "1", "3"), ("d", "3", "1")], &[], Some(5))
    }

    fn relation_pair(b: bool) -> Presentation {
        let last: &[(i64, &str)] =
            if b { &[(1, "a5 a1"), (-1, "a5 a4 a3 a1")] } else { &[(1, "a5 a1 a2"), (-1, "a5 a4 a3 a1 a2")] };
        pres(
            &["1", "2", "3", "4"],
            &[("a1", "1", "2"), ("a2", "2", "1"), ("a3", "2", "3"), ("a4", "3", "2"), ("a5", "2", "4")],
            &[&[(1, "a2 a1 a2")], &[(1, "a3 a4")], &[(1, "a2 a4")], last],
            Some(7),
        )
    }

    fn path(p: &Presentation, s: &str) -> Path {
        p.quiver().parse_path(s).unwrap()
    }

    #[test]
    fn masts_of_two_cycles() {
        let p = two_cycles();
        let v = decide_mast(&p, &path(&p, "d g b a"), &DecideOptions::default()).unwrap();
        assert!(matches!(
            v.outcome,
            MastOutcome::FinitelyMany { count: Some(1), exactly_one: true, certified: true, .. }
        ));
        let v = decide_mast(&p, &path(&p, "a d g b"), &DecideOptions::default()).unwrap();
        assert!(matches!(v.outcome, MastOutcome::Infinite(InfiniteReason::NecViolation(_))));
    }

    #[test]
    fn algebra_two_cycles() {
        let p = two_cycles();
        for fast in [true, false] {
            let opts = DecideOptions { fast_paths: fast, ..DecideOptions::default() };
            let v = decide_algebra(&p, &opts);
            match &v.status {
                AlgebraStatus::InfiniteType { witness } if fast => assert_eq!(p.quiver().display(witness), "a d g b"),
                AlgebraStatus::InfiniteType { .. } => {}
                other => panic!("{:?}", other),
            }
            assert!(v.anomalies.is_empty(), "{:?}", v.anomalies);
        }
    }

    #[test]
    fn strengthened_relation_is_finite() {
        let p = relation_pair(true);
        let m = decide_mast(&p, &path(&p, "a5 a4 a3 a1 a2 a1"), &DecideOptions::default()).unwrap();
        assert!(
            matches!(m.outcome, MastOutcome::FinitelyMany { count: Some(1), certified: true, .. }),
            "{:?}",
            m.outcome
        );
        let v = decide_algebra(&p, &DecideOptions::default());
        assert_eq!(v.status, AlgebraStatus::FiniteType, "{:?}", v.unresolved);
    }

    #[test]
    fn weak_relation_is_infinite() {
        let p = relation_pair(false);
        let v = decide_algebra(&p, &DecideOptions::default());
        assert!(matches!(v.status, AlgebraStatus::InfiniteType { .. }), "{:?}", v.status);
        let m = decide_mast(&p, &path(&p, "a5 a4 a3 a1 a2 a1"), &DecideOptions::default()).unwrap();
        assert_eq!(m.outcome, MastOutcome::Infinite(InfiniteReason::DimensionExceeds { lower_bound: 2, t: 1 }));
    }

    #[test]
    fn not_a_mast() {
        let p = relation_pair(false);
        assert_eq!(
            decide_mast(&p, &path(&p, "a2 a1 a2"), &DecideOptions::default()).unwrap_err(),
            DecideError::NotAMast
        );
    }
}
