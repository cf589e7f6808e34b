//! Structural conditions on masts and algebras, each with a certificate.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::poly::{SolveBudget, VarKey};
use crate::presentation::Presentation;
use crate::quiver::{ArrowId, Path, VertexId};
use crate::variety::{analyze, mast_status, MastAnalysis, MastContext, MastStatus, SlackReport, VarClass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CriteriaError {
    #[error("operation needs a monomial presentation")]
    NotMonomial,
    #[error("variable {0:?} is not a slack variable of this mast")]
    NotSlack(VarKey),
    #[error("the halyard catalogue covers masts of length at most 5, got {0}")]
    TooLong(usize),
}

/// All masts of positive length, found by extending masts one arrow at a
/// time (every subpath of a mast is a mast).
#[derive(Clone, Debug, Default)]
pub struct MastInventory {
    pub masts: Vec<Path>,
    /// Paths whose masthood could not be decided.
    pub unknown: Vec<Path>,
    /// Analyses computed while deciding masthood, keyed by path.
    pub analyses: BTreeMap<Path, MastAnalysis>,
}

impl MastInventory {
    pub fn is_mast(&self, p: &Path) -> bool {
        self.masts.binary_search(p).is_ok()
    }

    pub fn is_unknown(&self, p: &Path) -> bool {
        self.unknown.binary_search(p).is_ok()
    }
}

pub fn mast_inventory(pres: &Presentation, budget: &SolveBudget) -> MastInventory {
    let q = pres.quiver();
    let mut inv = MastInventory::default();
    if pres.is_monomial() {
        inv.masts = pres
            .nonzero_paths(pres.loewy() - 1)
            .expect("monomial checked")
            .into_iter()
            .filter(|p| !p.is_trivial())
            .collect();
        return inv;
    }
    let mut layer: Vec<Path> = q.arrow_ids().map(|a| q.arrow_path(a)).collect();
    let mut known: BTreeMap<Path, bool> = BTreeMap::new();
    while !layer.is_empty() {
        let mut next = Vec::new();
        for p in layer {
            let usable = p.len() == 1 || {
                let lower = p.right_subpath(p.len() - 1);
                let upper = p.segment(1, p.len());
                known.get(&lower).copied().unwrap_or(false) && known.get(&upper).copied().unwrap_or(false)
            };
            if !usable || p.len() >= pres.loewy() {
                continue;
            }
            let analysis = analyze(pres, &p, budget).expect("positive length");
            let status = match &analysis.variety.status {
                crate::variety::VarietyStatus::Nonempty(_) => Some(true),
                crate::variety::VarietyStatus::Empty(_) => Some(false),
                crate::variety::VarietyStatus::Unknown(_) => None,
            };
            // Unknown paths stay candidates so that nothing is skipped.
            known.insert(p.clone(), status != Some(false));
            match status {
                Some(true) => inv.masts.push(p.clone()),
                None => inv.unknown.push(p.clone()),
                Some(false) => continue,
            }
            inv.analyses.insert(p.clone(), analysis);
            for &a in q.arrows_from(p.target()) {
                next.push(q.extend(&p, a).expect("arrow leaves the target"));
            }
        }
        next.sort();
        next.dedup();
        layer = next;
    }
    inv.masts.sort();
    inv.unknown.sort();
    inv
}

/// Outcome of a check that quantifies over pairs (arrow, parallel mast).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairReport {
    /// `None` when some undecided path could be a violation.
    pub holds: Option<bool>,
    pub violations: Vec<(ArrowId, Path)>,
    pub unknown: Vec<(ArrowId, Path)>,
}

fn pair_check<F>(pres: &Presentation, inv: &MastInventory, ok: F) -> PairReport
where
    F: Fn(ArrowId, &Path) -> bool,
{
    let q = pres.quiver();
    let mut violations = Vec::new();
    let mut unknown = Vec::new();
    for (list, sink) in [(&inv.masts, &mut violations), (&inv.unknown, &mut unknown)] {
        for p in list.iter() {
            for a in q.arrow_ids() {
                let arrow = q.arrow(a);
                if arrow.source == p.source() && arrow.target == p.target() && !ok(a, p) {
                    sink.push((a, p.clone()));
                }
            }
        }
    }
    let holds = if !violations.is_empty() {
        Some(false)
    } else if unknown.is_empty() {
        Some(true)
    } else {
        None
    };
    PairReport { holds, violations, unknown }
}

/// Condition (N): every mast parallel to an arrow begins or ends with it.
pub fn check_condition_n(pres: &Presentation, inv: &MastInventory) -> PairReport {
    pair_check(pres, inv, |a, p| p.first_arrow() == Some(a) || p.last_arrow() == Some(a))
}

/// Every mast parallel to an arrow `a` is applied after `a` first, which
/// is equivalent to all varieties being finite.
pub fn check_all_varieties_finite(pres: &Presentation, inv: &MastInventory) -> PairReport {
    pair_check(pres, inv, |a, p| p.first_arrow() == Some(a))
}

/// `p = tail * alpha * gamma^mu` with `gamma` a loop at the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopCaseShape {
    pub mu: usize,
    pub nu: usize,
    pub gamma: ArrowId,
    pub alpha: Option<ArrowId>,
    /// `e_1, ..., e_nu`.
    pub tail: Vec<VertexId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopCaseReport {
    pub shape: LoopCaseShape,
    pub shape_ok: bool,
    /// Slack variables outside the allowed `(alpha, gamma^i)`, `i < mu`.
    pub offending: Vec<VarKey>,
    pub finite: Option<bool>,
    /// Finite and no tight halyards.
    pub exactly_one: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LoopCase {
    NotApplicable,
    Applicable(LoopCaseReport),
}

/// A halyard all of whose variables are tight.
fn has_tight_halyard(ctx: &MastContext, slack: &SlackReport) -> Option<bool> {
    let mut unknown = false;
    for d in &ctx.detours {
        let flags = slack.flags(d.arrow, d.u_len)?;
        let all_tight = d.vars().all(|v| matches!(slack.class(v), Some(VarClass::Tight(_))));
        match flags.halyard {
            Some(true) if all_tight => return Some(true),
            None => unknown = true,
            _ => {}
        }
    }
    (!unknown).then_some(false)
}

pub fn check_loop_case(pres: &Presentation, ctx: &MastContext, slack: &SlackReport) -> LoopCase {
    let q = pres.quiver();
    let e = ctx.vertex(0);
    let loops: Vec<ArrowId> = q.arrows_from(e).iter().copied().filter(|&a| q.arrow(a).target == e).collect();
    let Some(&gamma) = loops.iter().find(|&&a| ctx.path.first_arrow() == Some(a)).or(loops.first()) else {
        return LoopCase::NotApplicable;
    };
    let arrows = ctx.path.arrows();
    let mu = arrows.iter().take_while(|&&a| a == gamma).count();
    let l = ctx.len();
    let tail: Vec<VertexId> = (mu + 1..=l).map(|s| ctx.vertex(s)).collect();
    let alpha = arrows.get(mu).copied();
    let shape = LoopCaseShape { mu, nu: l - mu, gamma, alpha, tail };
    let mut shape_ok = !shape.tail.contains(&e);
    if mu >= 1 && shape.nu >= 2 && shape.tail[1..].contains(&shape.tail[0]) {
        shape_ok = false;
    }
    let allowed = |v: VarKey| v.detour().is_some_and(|d| Some(d.arrow) == alpha && d.u_len < mu);
    let offending: Vec<VarKey> = slack.slack_vars().filter(|&v| !allowed(v)).collect();
    let undecided = slack.vars.iter().any(|(v, c)| *c == VarClass::Unknown && !allowed(*v));
    let finite = if !shape_ok || !offending.is_empty() {
        Some(false)
    } else if undecided {
        None
    } else {
        Some(true)
    };
    let exactly_one = match finite {
        Some(true) => has_tight_halyard(ctx, slack).map(|t| !t),
        Some(false) => Some(false),
        None => None,
    };
    LoopCase::Applicable(LoopCaseReport { shape, shape_ok, offending, finite, exactly_one })
}

/// `v_r = alpha eps_mu beta_mu ... eps_1 beta_1 w`: `w` is the right
/// subpath of length `w_len` and `beta_positions[k]` is where `beta_{k+1}`
/// sits in `v_r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NecDecomposition {
    pub w_len: usize,
    pub beta_positions: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NecOutcome {
    Satisfied(NecDecomposition),
    Violated,
}

impl NecDecomposition {
    /// Re-checks the decomposition against the mast and variable.
    pub fn verify(&self, ctx: &MastContext, var: VarKey) -> bool {
        let Some(d) = var.detour() else { return false };
        let (r, mu, arrows) = (d.v_len, d.u_len, ctx.path.arrows());
        if self.beta_positions.len() != mu || self.w_len == 0 || self.w_len >= r {
            return false;
        }
        if ctx.vertex(self.w_len) != ctx.vertex(0) || arrows[r - 1] != d.arrow {
            return false;
        }
        let mut prev_end = self.w_len;
        for (k, &pos) in self.beta_positions.iter().enumerate() {
            // eps_k runs from prev_end to pos and must be a cycle at e(k).
            if pos < prev_end || ctx.vertex(pos) != ctx.vertex(k) || arrows[pos] != arrows[k] {
                return false;
            }
            if k == 0 && pos != self.w_len {
                return false;
            }
            prev_end = pos + 1;
        }
        // eps_mu runs from prev_end to r - 1 and must be a cycle at e(mu).
        prev_end < r && ctx.vertex(r - 1) == ctx.vertex(mu) && (mu > 0 || prev_end == r - 1)
    }
}

fn nec_search(ctx: &MastContext, r: usize, mu: usize, k: usize, pos: usize, acc: &mut Vec<usize>) -> bool {
    let arrows = ctx.path.arrows();
    if k == mu {
        return pos < r && ctx.vertex(r - 1) == ctx.vertex(mu) && (mu > 0 || pos == r - 1);
    }
    // beta_1 follows w directly; later betas may be preceded by a cycle.
    let candidates: Vec<usize> =
        if k == 0 { alloc::vec![pos] } else { (pos..r - 1).filter(|&t| ctx.vertex(t) == ctx.vertex(k)).collect() };
    for t in candidates {
        if t < r - 1 && arrows[t] == arrows[k] {
            acc.push(t);
            if nec_search(ctx, r, mu, k + 1, t + 1, acc) {
                return true;
            }
            acc.pop();
        }
    }
    false
}

/// The shape condition on a slack variable's target subpath.
pub fn check_nec(ctx: &MastContext, slack: &SlackReport, var: VarKey) -> Result<NecOutcome, CriteriaError> {
    if !slack.class(var).is_some_and(VarClass::is_slack) {
        return Err(CriteriaError::NotSlack(var));
    }
    let d = var.detour().ok_or(CriteriaError::NotSlack(var))?;
    let (r, mu) = (d.v_len, d.u_len);
    if ctx.path.arrows()[r - 1] == d.arrow {
        for w_len in ctx.source_cycles().into_iter().filter(|&s| s < r) {
            let mut acc = Vec::new();
            if nec_search(ctx, r, mu, 0, w_len, &mut acc) {
                return Ok(NecOutcome::Satisfied(NecDecomposition { w_len, beta_positions: acc }));
            }
        }
    }
    Ok(NecOutcome::Violated)
}

/// `dim V_p` is at least `lower_bound`, but the mast passes through its
/// source only `t + 1` times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionExcess {
    pub lower_bound: usize,
    pub t: usize,
}

pub fn check_dimension(ctx: &MastContext, slack: &SlackReport) -> Option<DimensionExcess> {
    let t = ctx.source_cycles().len();
    (slack.dimension_lower_bound > t).then_some(DimensionExcess { lower_bound: slack.dimension_lower_bound, t })
}

/// Length of `w` with `v_r = alpha u w`, if that factorization exists.
pub fn suf_factor(ctx: &MastContext, var: VarKey) -> Option<usize> {
    let d = var.detour()?;
    let (r, mu, arrows) = (d.v_len, d.u_len, ctx.path.arrows());
    let s = r.checked_sub(mu + 1).filter(|&s| s >= 1)?;
    let ok = ctx.vertex(s) == ctx.vertex(0) && arrows[s..s + mu] == arrows[..mu] && arrows[r - 1] == d.arrow;
    ok.then_some(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SufOutcome {
    Satisfied {
        w_len: usize,
    },
    Violated,
    /// The variable's class is unknown and the factorization fails.
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SufReport {
    /// Slack and undecided variables with their outcome.
    pub entries: Vec<(VarKey, SufOutcome)>,
    pub holds: Option<bool>,
}

pub fn check_suf(ctx: &MastContext, slack: &SlackReport) -> SufReport {
    let mut entries = Vec::new();
    for (v, class) in &slack.vars {
        let outcome = match (class, suf_factor(ctx, *v)) {
            (VarClass::Tight(_), _) => continue,
            (_, Some(w_len)) => SufOutcome::Satisfied { w_len },
            (VarClass::Slack(_), None) => SufOutcome::Violated,
            (VarClass::Unknown, None) => SufOutcome::Unknown,
        };
        entries.push((*v, outcome));
    }
    let holds = if entries.iter().any(|(_, o)| *o == SufOutcome::Violated) {
        Some(false)
    } else if entries.iter().any(|(_, o)| *o == SufOutcome::Unknown) {
        None
    } else {
        Some(true)
    };
    SufReport { entries, holds }
}

/// Every variable of every halyard factors as `alpha u w_i`.
pub fn halyards_factor(ctx: &MastContext, slack: &SlackReport) -> Option<bool> {
    let mut unknown = false;
    for d in &ctx.detours {
        if d.vars().all(|v| suf_factor(ctx, v).is_some()) {
            continue;
        }
        match slack.flags(d.arrow, d.u_len).and_then(|f| f.halyard) {
            Some(false) => {}
            Some(true) => return Some(false),
            None => unknown = true,
        }
    }
    (!unknown).then_some(true)
}

/// A path violating the segment condition for monomial algebras.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentWitness {
    pub path: Path,
    pub i: usize,
    pub j: usize,
    /// An arrow `e(i) -> e(j+1)` whose composite with `u_i` avoids `I`.
    pub arrow: ArrowId,
}

impl SegmentWitness {
    pub fn verify(&self, pres: &Presentation) -> bool {
        let (p, i, j) = (&self.path, self.i, self.j);
        let l = p.len();
        if !(i < j && j < l) || pres.monomial_contains(p) != Ok(false) {
            return false;
        }
        let q = pres.quiver();
        let a = q.arrow(self.arrow);
        let Ok(short) = q.extend(&p.right_subpath(i), self.arrow) else { return false };
        p.vertex(i) == p.vertex(j)
            && p.vertex(i + 1) != p.vertex(j + 1)
            && a.target == p.vertex(j + 1)
            && pres.monomial_contains(&short) == Ok(false)
            && !is_terminal_segment(p, i, j)
    }
}

/// `(e(0..=i))` equals `(e(j-i..=j))`.
fn is_terminal_segment(p: &Path, i: usize, j: usize) -> bool {
    (0..=i).all(|k| p.vertex(j - i + k) == p.vertex(k))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentReport {
    pub condition_n: PairReport,
    pub witness: Option<SegmentWitness>,
    pub holds: bool,
}

/// The combinatorial finite-type criterion for monomial presentations.
pub fn check_monomial_segments(pres: &Presentation) -> Result<SegmentReport, CriteriaError> {
    if !pres.is_monomial() {
        return Err(CriteriaError::NotMonomial);
    }
    let inv = mast_inventory(pres, &SolveBudget::default());
    let condition_n = check_condition_n(pres, &inv);
    let q = pres.quiver();
    let mut witness = None;
    'paths: for p in &inv.masts {
        let l = p.len();
        for j in 1..l {
            for i in 0..j {
                if p.vertex(i) != p.vertex(j) || p.vertex(i + 1) == p.vertex(j + 1) || is_terminal_segment(p, i, j) {
                    continue;
                }
                let u = p.right_subpath(i);
                for &a in q.arrows_from(p.vertex(i)) {
                    if q.arrow(a).target != p.vertex(j + 1) {
                        continue;
                    }
                    let short = q.extend(&u, a).expect("arrow leaves e(i)");
                    if pres.monomial_contains(&short) == Ok(false) {
                        witness = Some(SegmentWitness { path: p.clone(), i, j, arrow: a });
                        break 'paths;
                    }
                }
            }
        }
    }
    let holds = condition_n.holds == Some(true) && witness.is_none();
    Ok(SegmentReport { condition_n, witness, holds })
}

/// A layer-label pattern with allowed halyard edges `(from, to)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub name: &'static str,
    pub labels: &'static [u8],
    pub edges: &'static [(usize, usize)],
    /// Label pairs that may name the same vertex.
    pub may_coincide: &'static [(u8, u8)],
}

/// Shapes for masts of length at most 4 (matched after truncation).
pub const SHORT_SHAPES: &[Shape] = &[
    Shape { name: "loop-1", labels: &[1, 1, 1, 2, 3], edges: &[(1, 3)], may_coincide: &[] },
    Shape { name: "loop-2", labels: &[1, 1, 1, 1, 2], edges: &[(1, 4), (2, 4)], may_coincide: &[] },
    Shape { name: "bounce", labels: &[1, 2, 1, 2, 3], edges: &[(1, 4)], may_coincide: &[] },
];

/// Shapes for masts of length 5.
pub const LENGTH5_SHAPES: &[Shape] = &[
    Shape { name: "loop-1", labels: &[1, 1, 1, 2, 3, 4], edges: &[(1, 3)], may_coincide: &[(3, 4)] },
    Shape { name: "loop-2", labels: &[1, 1, 1, 1, 2, 3], edges: &[(1, 4), (2, 4)], may_coincide: &[] },
    Shape { name: "loop-3", labels: &[1, 1, 1, 1, 1, 2], edges: &[(1, 5), (2, 5), (3, 5)], may_coincide: &[] },
    Shape { name: "bounce", labels: &[1, 2, 1, 2, 3, 4], edges: &[(1, 4)], may_coincide: &[] },
    Shape { name: "triangle", labels: &[1, 2, 3, 1, 2, 4], edges: &[(1, 5)], may_coincide: &[] },
];

fn shape_matches(shape: &Shape, ctx: &MastContext, from: usize, to: usize) -> bool {
    let l = ctx.len();
    if l + 1 > shape.labels.len() || !shape.edges.contains(&(from, to)) {
        return false;
    }
    let mut map: BTreeMap<u8, VertexId> = BTreeMap::new();
    for s in 0..=l {
        let v = ctx.vertex(s);
        match map.get(&shape.labels[s]) {
            Some(&w) if w != v => return false,
            Some(_) => {}
            None => {
                map.insert(shape.labels[s], v);
            }
        }
    }
    let entries: Vec<(u8, VertexId)> = map.into_iter().collect();
    for (x, (a, va)) in entries.iter().enumerate() {
        for (b, vb) in &entries[x + 1..] {
            if va == vb && !shape.may_coincide.contains(&(*a, *b)) {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogueMatch {
    pub var: VarKey,
    pub shape: &'static str,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CatalogueOutcome {
    Conforms(Vec<CatalogueMatch>),
    Violates(VarKey),
    Unknown(Vec<VarKey>),
}

/// Matches every slack halyard not leaving the top vertex against the
/// catalogue of allowed graphs.
pub fn check_halyard_catalogue(ctx: &MastContext, slack: &SlackReport) -> Result<CatalogueOutcome, CriteriaError> {
    let l = ctx.len();
    let shapes = match l {
        0..=4 => SHORT_SHAPES,
        5 => LENGTH5_SHAPES,
        _ => return Err(CriteriaError::TooLong(l)),
    };
    let mut matches = Vec::new();
    let mut unknown = Vec::new();
    for (v, class) in &slack.vars {
        let Some(d) = v.detour() else { continue };
        if d.u_len == 0 || matches!(class, VarClass::Tight(_)) {
            continue;
        }
        match shapes.iter().find(|s| shape_matches(s, ctx, d.u_len, d.v_len)) {
            Some(s) => matches.push(CatalogueMatch { var: *v, shape: s.name }),
            None if class.is_slack() => return Ok(CatalogueOutcome::Violates(*v)),
            None => unknown.push(*v),
        }
    }
    Ok(if unknown.is_empty() { CatalogueOutcome::Conforms(matches) } else { CatalogueOutcome::Unknown(unknown) })
}

/// Convenience: the masthood of a single path as used by the checks above.
pub fn is_mast(pres: &Presentation, p: &Path, budget: &SolveBudget) -> Option<bool> {
    match mast_status(pres, p, budget).ok()? {
        MastStatus::Mast(_) => Some(true),
        MastStatus::NotMast(_) => Some(false),
        MastStatus::Unknown(_) => None,
    }
}
