//! JSON renderings of core results. Rationals are strings so values stay
//! exact; object keys come out sorted, which makes output byte-stable.

use serde_json::{json, Value};
use uniserial_core::criteria::{MastInventory, PairReport};
use uniserial_core::decide::{AlgebraStatus, AlgebraVerdict, FiniteReason, InfiniteReason, MastOutcome, MastVerdict};
use uniserial_core::fibers::{IsoOutcome, IsoPartition, LayeredGraph};
use uniserial_core::poly::{LinearCertificate, Point};
use uniserial_core::variety::{
    EmptyCertificate, MastAnalysis, SlackEvidence, SlackReport, VarClass, VarietyPresentation, VarietyStatus,
};
use uniserial_core::{Path, Polynomial, Presentation, Quiver, Scalar, VarKey};

pub const CONVENTION: &str = "paths are written in composition order: the leftmost arrow is applied last";

pub fn scalar(x: &Scalar) -> Value {
    Value::String(x.to_string())
}

pub fn var(q: &Quiver, v: &VarKey) -> Value {
    Value::String(v.render(q))
}

pub fn path(q: &Quiver, p: &Path) -> Value {
    Value::String(q.display(p))
}

pub fn poly(q: &Quiver, f: &Polynomial) -> Value {
    Value::String(f.render(|v| v.render(q)))
}

/// Coordinates in the order of `vars`.
pub fn point(vars: &[VarKey], pt: &Point) -> Value {
    Value::Array(vars.iter().map(|v| pt.get(v).map_or(Value::Null, scalar)).collect())
}

/// Every coordinate of a point that may include auxiliary variables.
pub fn named_point(q: &Quiver, pt: &Point) -> Value {
    Value::Object(pt.iter().map(|(v, x)| (v.render(q), scalar(x))).collect())
}

pub fn linear_certificate(c: &LinearCertificate) -> Value {
    json!({
        "multipliers": c.multipliers.iter().map(scalar).collect::<Vec<_>>(),
        "constant": scalar(&c.constant),
    })
}

pub fn presentation(name: &str, p: &Presentation) -> Value {
    let q = p.quiver();
    json!({
        "algebra": name,
        "vertices": q.vertex_ids().map(|v| q.vertex_name(v)).collect::<Vec<_>>(),
        "arrows": q.arrow_ids().map(|a| {
            let arrow = q.arrow(a);
            json!({"name": arrow.name, "source": q.vertex_name(arrow.source), "target": q.vertex_name(arrow.target)})
        }).collect::<Vec<_>>(),
        "relations": p.relations().iter().map(|r| r.render(q)).collect::<Vec<_>>(),
        "loewy": p.loewy(),
        "monomial": p.is_monomial(),
        "warnings": p.warnings(),
    })
}

pub fn inventory(q: &Quiver, inv: &MastInventory) -> Value {
    json!({
        "masts": inv.masts.iter().map(|p| path(q, p)).collect::<Vec<_>>(),
        "unknown": inv.unknown.iter().map(|p| path(q, p)).collect::<Vec<_>>(),
    })
}

pub fn pair_report(q: &Quiver, r: &PairReport) -> Value {
    let pairs = |list: &[(uniserial_core::ArrowId, Path)]| {
        list.iter().map(|(a, p)| json!({"arrow": q.arrow_name(*a), "mast": q.display(p)})).collect::<Vec<_>>()
    };
    json!({"holds": r.holds, "violations": pairs(&r.violations), "unknown": pairs(&r.unknown)})
}

fn empty_certificate(c: &EmptyCertificate) -> Value {
    match c {
        EmptyCertificate::TooLong { len, loewy } => json!({"kind": "TooLong", "len": len, "loewy": loewy}),
        EmptyCertificate::Linear(c) => json!({"kind": "Linear", "certificate": linear_certificate(c)}),
        EmptyCertificate::Exhausted => json!({"kind": "Exhausted"}),
        EmptyCertificate::InIdeal => json!({"kind": "InIdeal"}),
    }
}

pub fn variety(q: &Quiver, v: &VarietyPresentation) -> Value {
    let status = match &v.status {
        VarietyStatus::Nonempty(pt) => json!({"kind": "Nonempty", "point": point(&v.ctx.vars, pt)}),
        VarietyStatus::Empty(c) => json!({"kind": "Empty", "certificate": empty_certificate(c)}),
        VarietyStatus::Unknown(why) => json!({"kind": "Unknown", "reason": why}),
    };
    json!({
        "vars": v.ctx.vars.iter().map(|x| var(q, x)).collect::<Vec<_>>(),
        "polys": v.polys.iter().map(|f| poly(q, f)).collect::<Vec<_>>(),
        "status": status,
        "components": v.decomposition.components.len(),
        "complete": v.decomposition.is_complete(),
    })
}

fn var_class(c: &VarClass) -> Value {
    match c {
        VarClass::Slack(SlackEvidence::Absent) => json!({"class": "Slack", "evidence": "absent"}),
        VarClass::Slack(SlackEvidence::Parametric { component }) => {
            json!({"class": "Slack", "evidence": "parametric", "component": component})
        }
        VarClass::Tight(values) => json!({"class": "Tight", "values": values.iter().map(scalar).collect::<Vec<_>>()}),
        VarClass::Unknown => json!({"class": "Unknown"}),
    }
}

pub fn slack_entries(q: &Quiver, s: &SlackReport) -> Value {
    Value::Array(
        s.vars
            .iter()
            .map(|(v, c)| {
                let mut obj = var_class(c);
                obj["var"] = var(q, v);
                obj
            })
            .collect(),
    )
}

pub fn slack(q: &Quiver, p: &Path, s: &SlackReport) -> Value {
    json!({
        "path": path(q, p),
        "vars": slack_entries(q, s),
        "free_count": s.free_count,
        "dimension": s.dimension,
        "dimension_lower_bound": s.dimension_lower_bound,
        "linear": s.linear,
        "detours": s.detours.iter().map(|d| json!({
            "arrow": q.arrow_name(d.arrow),
            "u_len": d.u_len,
            "halyard": d.halyard,
            "circular": d.circular,
        })).collect::<Vec<_>>(),
    })
}

fn infinite_reason(q: &Quiver, r: &InfiniteReason) -> Value {
    match r {
        InfiniteReason::NecViolation(v) => json!({"kind": "NecViolation", "var": var(q, v)}),
        InfiniteReason::DimensionExceeds { lower_bound, t } => {
            json!({"kind": "DimensionExceeds", "lower_bound": lower_bound, "t": t})
        }
        InfiniteReason::LoopCaseViolation(rep) => json!({
            "kind": "LoopCaseViolation",
            "shape_ok": rep.shape_ok,
            "mu": rep.shape.mu,
            "loop": q.arrow_name(rep.shape.gamma),
            "offending": rep.offending.iter().map(|v| var(q, v)).collect::<Vec<_>>(),
        }),
        InfiniteReason::Dual(inner) => json!({"kind": "Dual", "inner": infinite_reason(&q.opposite(), inner)}),
    }
}

fn finite_reason(r: &FiniteReason) -> Value {
    match r {
        FiniteReason::FiniteVariety => json!("FiniteVariety"),
        FiniteReason::LoopCase => json!("LoopCase"),
        FiniteReason::Suf => json!("Suf"),
        FiniteReason::Orbit => json!("Orbit"),
        FiniteReason::Probe => json!("Probe"),
        FiniteReason::Dual(inner) => json!({"Dual": finite_reason(inner)}),
    }
}

pub fn outcome_status(o: &MastOutcome) -> &'static str {
    match o {
        MastOutcome::FinitelyMany { .. } => "FinitelyMany",
        MastOutcome::Infinite(_) => "Infinite",
        MastOutcome::Unknown(_) => "Unknown",
    }
}

fn certificate(q: &Quiver, o: &MastOutcome) -> Value {
    match o {
        MastOutcome::FinitelyMany { count, exactly_one, certified, reason } => json!({
            "reason": finite_reason(reason),
            "count": count,
            "exactly_one": exactly_one,
            "certified": certified,
        }),
        MastOutcome::Infinite(r) => infinite_reason(q, r),
        MastOutcome::Unknown(why) => json!({"reasons": why}),
    }
}

fn analysis_variety(q: &Quiver, a: &MastAnalysis) -> Value {
    let mut v = variety(q, &a.variety);
    v["status"] = match &a.variety.status {
        VarietyStatus::Nonempty(_) => json!("Nonempty"),
        VarietyStatus::Empty(_) => json!("Empty"),
        VarietyStatus::Unknown(_) => json!("Unknown"),
    };
    v
}

pub fn mast(q: &Quiver, m: &MastVerdict) -> Value {
    let slack = m.analysis.slack.as_ref().map_or(Value::Array(Vec::new()), |s| slack_entries(q, s));
    json!({
        "path": path(q, &m.mast),
        "status": outcome_status(&m.outcome),
        "certificate": certificate(q, &m.outcome),
        "variety": analysis_variety(q, &m.analysis),
        "slack": slack,
        "diagnostics": {
            "steps": m.steps,
            "probe": m.probe.iter().map(|(r, c)| json!([r, c])).collect::<Vec<_>>(),
            "linear": m.linear(),
            "dimension": m.analysis.slack.as_ref().and_then(|s| s.dimension),
        },
    })
}

pub fn status_name(s: &AlgebraStatus) -> &'static str {
    match s {
        AlgebraStatus::FiniteType => "FiniteType",
        AlgebraStatus::InfiniteType { .. } => "InfiniteType",
        AlgebraStatus::Unknown(_) => "Unknown",
    }
}

pub fn algebra(name: &str, q: &Quiver, v: &AlgebraVerdict) -> Value {
    let witness = match &v.status {
        AlgebraStatus::InfiniteType { witness } => path(q, witness),
        _ => Value::Null,
    };
    let mut unresolved: Vec<Value> = Vec::new();
    if let AlgebraStatus::Unknown(paths) = &v.status {
        unresolved.extend(paths.iter().map(|p| path(q, p)));
    }
    unresolved.extend(v.unresolved.iter().map(|s| json!(s)));
    json!({
        "algebra": name,
        "convention": CONVENTION,
        "status": status_name(&v.status),
        "certified": v.certified(),
        "witness": witness,
        "trace": v.trace.iter().map(|t| json!({"step": t.step, "result": t.result})).collect::<Vec<_>>(),
        "condition_n": pair_report(q, &v.condition_n),
        "masts": v.masts.iter().map(|m| mast(q, m)).collect::<Vec<_>>(),
        "anomalies": v.anomalies,
        "unresolved": unresolved,
    })
}

pub fn iso(q: &Quiver, o: &IsoOutcome) -> Value {
    match o {
        IsoOutcome::Equivalent { z, free } => json!({
            "outcome": "Equivalent",
            "z": named_point(q, z),
            "free": free.iter().map(|v| var(q, v)).collect::<Vec<_>>(),
        }),
        IsoOutcome::Distinct(c) => json!({"outcome": "Distinct", "certificate": linear_certificate(c)}),
    }
}

pub fn classes(vars: &[VarKey], points: &[Point], part: &IsoPartition) -> Value {
    json!({
        "points": points.len(),
        "class_count": part.class_count(),
        "classes": part.classes.iter().map(|c| c.iter().map(|&i| point(vars, &points[i])).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "anomalies": part.anomalies.iter().map(|(i, j)| json!([point(vars, &points[*i]), point(vars, &points[*j])])).collect::<Vec<_>>(),
    })
}

pub fn graph(q: &Quiver, g: &LayeredGraph) -> Value {
    json!({
        "layers": g.layers.iter().map(|&v| q.vertex_name(v)).collect::<Vec<_>>(),
        "spine": g.spine.iter().map(|&a| q.arrow_name(a)).collect::<Vec<_>>(),
        "detours": g.detours.iter().map(|e| json!({"from": e.from, "to": e.to, "arrow": q.arrow_name(e.arrow)})).collect::<Vec<_>>(),
        "edge_path": g.is_edge_path(),
    })
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are serializable");
    s.push('\n');
    s
}
