//! Detours, substitution and the varieties `V_p`.
//!
//! A point of `V_p` describes a module with basis `x_0, ..., x_l` (one per
//! right subpath `u_s` of `p`, `x_s = u_s x`) on which an arrow `b` sends
//! `x_s` to `x_{s+1}` when `b` is the next arrow of `p`, to
//! `sum_i X_i(b, u_s) x_{len v_i}` when `(b, u_s)` is a detour, and to zero
//! otherwise. The defining polynomials say that every relation kills every
//! `x_s`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::poly::{
    decompose, linear_triangulate, Decomposition, DetourVar, LinearCertificate, LinearOutcome, Point, Polynomial,
    Scalar, SolveBudget, VarKey,
};
use crate::presentation::Presentation;
use crate::quiver::{ArrowId, Path, Quiver, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VarietyError {
    #[error("the mast must have positive length")]
    TrivialPath,
    #[error("word starts at a different vertex than layer {0}")]
    Endpoint(usize),
    #[error("slack analysis needs a mast, and this path is not one")]
    NotAMast,
}

/// An arrow leaving the mast at layer `u_len`, with the layers its image
/// may land on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Detour {
    pub arrow: ArrowId,
    pub u_len: usize,
    /// `len v_i` for `i = 1, 2, ...`, increasing.
    pub family: Vec<usize>,
}

impl Detour {
    pub fn var(&self, index: usize) -> VarKey {
        VarKey::Detour(DetourVar { v_len: self.family[index - 1], u_len: self.u_len, arrow: self.arrow, index })
    }

    pub fn vars(&self) -> impl Iterator<Item = VarKey> + '_ {
        (1..=self.family.len()).map(|i| self.var(i))
    }
}

/// Basis coefficients indexed by layer; zero coefficients are not stored.
pub type Evaluation = BTreeMap<usize, Polynomial>;

/// The detour inventory of a path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MastContext {
    pub path: Path,
    /// Sorted by layer, then arrow.
    pub detours: Vec<Detour>,
    /// All detour variables in canonical order.
    pub vars: Vec<VarKey>,
    index: BTreeMap<(usize, ArrowId), usize>,
}

impl MastContext {
    pub fn new(quiver: &Quiver, p: &Path) -> Result<MastContext, VarietyError> {
        if p.is_trivial() {
            return Err(VarietyError::TrivialPath);
        }
        let l = p.len();
        let mut detours = Vec::new();
        for s in 0..=l {
            for &a in quiver.arrows_from(p.vertex(s)) {
                if s < l && p.arrows()[s] == a {
                    continue;
                }
                let t = quiver.arrow(a).target;
                let family: Vec<usize> = (s + 1..=l).filter(|&r| p.vertex(r) == t).collect();
                if !family.is_empty() {
                    detours.push(Detour { arrow: a, u_len: s, family });
                }
            }
        }
        detours.sort_by_key(|d| (d.u_len, d.arrow));
        let index = detours.iter().enumerate().map(|(i, d)| ((d.u_len, d.arrow), i)).collect();
        let mut vars: Vec<VarKey> = detours.iter().flat_map(Detour::vars).collect();
        vars.sort();
        Ok(MastContext { path: p.clone(), detours, vars, index })
    }

    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_trivial()
    }

    pub fn detour(&self, arrow: ArrowId, u_len: usize) -> Option<&Detour> {
        self.index.get(&(u_len, arrow)).map(|&i| &self.detours[i])
    }

    pub fn detour_of(&self, v: VarKey) -> Option<&Detour> {
        let d = v.detour()?;
        self.detour(d.arrow, d.u_len)
    }

    /// The vertex of layer `s`.
    pub fn vertex(&self, s: usize) -> VertexId {
        self.path.vertex(s)
    }

    /// Right subpaths `u_s`, `s >= 1`, that are cycles at the source,
    /// increasing in length.
    pub fn source_cycles(&self) -> Vec<usize> {
        let e0 = self.vertex(0);
        (1..=self.len()).filter(|&s| self.vertex(s) == e0).collect()
    }

    /// One arrow applied to an evaluation.
    pub fn apply_arrow(&self, eval: &Evaluation, b: ArrowId) -> Evaluation {
        let l = self.len();
        let mut out = Evaluation::new();
        let mut add = |layer: usize, c: Polynomial| {
            let slot = out.entry(layer).or_insert_with(Polynomial::zero);
            *slot = &*slot + &c;
        };
        for (&s, c) in eval {
            if s < l && self.path.arrows()[s] == b {
                add(s + 1, c.clone());
            } else if let Some(d) = self.detour(b, s) {
                for (i, &r) in d.family.iter().enumerate() {
                    add(r, c * &Polynomial::var(d.var(i + 1)));
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Arrows applied in order, starting from `coeff * x_start`.
    pub fn eval_arrows(&self, arrows: &[ArrowId], start: usize) -> Evaluation {
        let mut eval = Evaluation::new();
        eval.insert(start, Polynomial::one());
        for &b in arrows {
            if eval.is_empty() {
                break;
            }
            eval = self.apply_arrow(&eval, b);
        }
        eval
    }

    /// The word `word` applied to `x_start`.
    pub fn substitution_eval(&self, word: &Path, start: usize) -> Result<Evaluation, VarietyError> {
        if start > self.len() || word.source() != self.vertex(start) {
            return Err(VarietyError::Endpoint(start));
        }
        Ok(self.eval_arrows(word.arrows(), start))
    }

    /// Scalar version of [`MastContext::eval_arrows`] at a point.
    pub fn eval_arrows_at(&self, point: &Point, arrows: &[ArrowId], start: usize) -> BTreeMap<usize, Scalar> {
        let l = self.len();
        let mut eval: BTreeMap<usize, Scalar> = BTreeMap::new();
        eval.insert(start, Scalar::from_integer(1.into()));
        for &b in arrows {
            let mut next: BTreeMap<usize, Scalar> = BTreeMap::new();
            for (&s, c) in &eval {
                if s < l && self.path.arrows()[s] == b {
                    *next.entry(s + 1).or_insert_with(Scalar::zero) += c;
                } else if let Some(d) = self.detour(b, s) {
                    for (i, &r) in d.family.iter().enumerate() {
                        let x = point.get(&d.var(i + 1)).cloned().unwrap_or_else(Scalar::zero);
                        *next.entry(r).or_insert_with(Scalar::zero) += c * x;
                    }
                }
            }
            next.retain(|_, c| !c.is_zero());
            eval = next;
            if eval.is_empty() {
                break;
            }
        }
        eval
    }

    /// The point with every variable zero.
    pub fn zero_point(&self) -> Point {
        self.vars.iter().map(|&v| (v, Scalar::zero())).collect()
    }
}

/// Why `V_p` is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmptyCertificate {
    /// `len p >= L`, so `p` itself lies in the ideal.
    TooLong { len: usize, loewy: usize },
    /// A combination of the (linear) defining polynomials is a nonzero constant.
    Linear(LinearCertificate),
    /// A complete case split left no branch with a rational point.
    Exhausted,
    /// Monomial presentation and `p` contains a generator.
    InIdeal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarietyStatus {
    Nonempty(Point),
    Empty(EmptyCertificate),
    Unknown(String),
}

impl VarietyStatus {
    pub fn is_nonempty(&self) -> bool {
        matches!(self, VarietyStatus::Nonempty(_))
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, VarietyStatus::Empty(_))
    }
}

/// `V_p` by its defining polynomials, plus the emptiness decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarietyPresentation {
    pub ctx: MastContext,
    /// Monic, deduplicated and sorted.
    pub polys: Vec<Polynomial>,
    pub status: VarietyStatus,
    pub decomposition: Decomposition,
}

impl VarietyPresentation {
    pub fn is_linear(&self) -> bool {
        self.polys.iter().all(|p| p.total_degree() <= 1)
    }

    /// True iff `point` assigns every variable and kills every polynomial.
    pub fn contains(&self, point: &Point) -> bool {
        self.ctx.vars.iter().all(|v| point.contains_key(v))
            && self.polys.iter().all(|f| f.eval(point).is_ok_and(|x| x.is_zero()))
    }
}

/// The raw defining polynomials: every basis coefficient of every relation
/// applied to every layer it can act on.
pub fn defining_polynomials(pres: &Presentation, ctx: &MastContext) -> Vec<Polynomial> {
    let mut out: BTreeSet<Polynomial> = BTreeSet::new();
    for r in pres.relations() {
        for s in 0..=ctx.len() {
            if ctx.vertex(s) != r.source() {
                continue;
            }
            let mut total = Evaluation::new();
            for (c, q) in r.terms() {
                for (layer, coeff) in ctx.eval_arrows(q.arrows(), s) {
                    let slot = total.entry(layer).or_insert_with(Polynomial::zero);
                    *slot = &*slot + &coeff.scale(c);
                }
            }
            for f in total.into_values() {
                if !f.is_zero() {
                    out.insert(f.monic());
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Orders candidate witnesses: small absolute values first, then positive.
fn witness_key(pt: &Point) -> Vec<(Scalar, bool)> {
    pt.values().map(|x| (x.abs(), x.is_negative())).collect()
}

pub fn variety(pres: &Presentation, p: &Path, budget: &SolveBudget) -> Result<VarietyPresentation, VarietyError> {
    let ctx = MastContext::new(pres.quiver(), p)?;
    let polys = defining_polynomials(pres, &ctx);
    let decomposition = decompose(&polys, &ctx.vars, budget);
    let status = if p.len() >= pres.loewy() {
        VarietyStatus::Empty(EmptyCertificate::TooLong { len: p.len(), loewy: pres.loewy() })
    } else {
        decide_status(&ctx, &polys, &decomposition)
    };
    Ok(VarietyPresentation { ctx, polys, status, decomposition })
}

fn decide_status(ctx: &MastContext, polys: &[Polynomial], dec: &Decomposition) -> VarietyStatus {
    if polys.is_empty() {
        return VarietyStatus::Nonempty(ctx.zero_point());
    }
    if polys.iter().all(|f| f.total_degree() <= 1) {
        return match linear_triangulate(polys, &ctx.vars).expect("degree checked") {
            LinearOutcome::Inconsistent(cert) => VarietyStatus::Empty(EmptyCertificate::Linear(cert)),
            LinearOutcome::Solved(sol) => VarietyStatus::Nonempty(sol.witness()),
        };
    }
    if let Some(best) = dec.components.iter().map(|k| k.witness()).min_by_key(witness_key) {
        return VarietyStatus::Nonempty(best);
    }
    if dec.is_complete() {
        return VarietyStatus::Empty(EmptyCertificate::Exhausted);
    }
    for radius in 2..=4 {
        for r in &dec.unresolved {
            if let Some(pt) = r.grid_witness(radius, 200_000) {
                return VarietyStatus::Nonempty(pt);
            }
        }
    }
    VarietyStatus::Unknown(alloc::format!(
        "{} unresolved branch(es) without a small integer point",
        dec.unresolved.len()
    ))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MastStatus {
    Mast(Point),
    NotMast(EmptyCertificate),
    Unknown(String),
}

impl MastStatus {
    pub fn is_mast(&self) -> bool {
        matches!(self, MastStatus::Mast(_))
    }
}

/// Whether `p` is the mast of some uniserial module. Monomial presentations
/// are decided by ideal membership.
pub fn mast_status(pres: &Presentation, p: &Path, budget: &SolveBudget) -> Result<MastStatus, VarietyError> {
    if pres.is_monomial() {
        if p.len() >= pres.loewy() {
            return Ok(MastStatus::NotMast(EmptyCertificate::TooLong { len: p.len(), loewy: pres.loewy() }));
        }
        let inside = pres.monomial_contains(p).expect("monomial checked");
        return Ok(if inside {
            MastStatus::NotMast(EmptyCertificate::InIdeal)
        } else {
            let ctx = MastContext::new(pres.quiver(), p)?;
            MastStatus::Mast(ctx.zero_point())
        });
    }
    Ok(match variety(pres, p, budget)?.status {
        VarietyStatus::Nonempty(pt) => MastStatus::Mast(pt),
        VarietyStatus::Empty(c) => MastStatus::NotMast(c),
        VarietyStatus::Unknown(why) => MastStatus::Unknown(why),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SlackEvidence {
    /// The variable occurs in no defining polynomial.
    Absent,
    /// The variable is a nonconstant function on this component.
    Parametric { component: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarClass {
    Slack(SlackEvidence),
    /// Constant on every component; the values taken, sorted.
    Tight(Vec<Scalar>),
    Unknown,
}

impl VarClass {
    pub fn is_slack(&self) -> bool {
        matches!(self, VarClass::Slack(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetourFlags {
    pub arrow: ArrowId,
    pub u_len: usize,
    /// `None` when the decomposition is incomplete and nothing was found.
    pub halyard: Option<bool>,
    pub circular: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlackReport {
    pub vars: Vec<(VarKey, VarClass)>,
    /// Variables absent from every defining polynomial.
    pub free_count: usize,
    pub detours: Vec<DetourFlags>,
    /// `dim V_p` when the decomposition is complete.
    pub dimension: Option<usize>,
    pub dimension_lower_bound: usize,
    /// `V_p` is the graph of a polynomial map on an affine space.
    pub linear: bool,
}

impl SlackReport {
    pub fn class(&self, v: VarKey) -> Option<&VarClass> {
        self.vars.iter().find(|(w, _)| *w == v).map(|(_, c)| c)
    }

    pub fn slack_vars(&self) -> impl Iterator<Item = VarKey> + '_ {
        self.vars.iter().filter(|(_, c)| c.is_slack()).map(|(v, _)| *v)
    }

    pub fn has_unknown(&self) -> bool {
        self.vars.iter().any(|(_, c)| *c == VarClass::Unknown)
    }

    pub fn flags(&self, arrow: ArrowId, u_len: usize) -> Option<&DetourFlags> {
        self.detours.iter().find(|d| d.arrow == arrow && d.u_len == u_len)
    }
}

/// Some `v_i` factors as `alpha c u` with `c` a nontrivial cycle.
pub fn is_circular(ctx: &MastContext, d: &Detour) -> bool {
    d.family
        .iter()
        .any(|&r| r - 1 > d.u_len && ctx.path.arrows()[r - 1] == d.arrow && ctx.vertex(r - 1) == ctx.vertex(d.u_len))
}

pub fn slack_report(v: &VarietyPresentation) -> Result<SlackReport, VarietyError> {
    if !v.status.is_nonempty() {
        return Err(VarietyError::NotAMast);
    }
    let dec = &v.decomposition;
    let complete = dec.is_complete();
    let absent: BTreeSet<VarKey> = v.ctx.vars.iter().copied().filter(|&x| !crate::poly::occurs(x, &v.polys)).collect();
    let vars = v
        .ctx
        .vars
        .iter()
        .map(|&x| {
            if absent.contains(&x) {
                return (x, VarClass::Slack(SlackEvidence::Absent));
            }
            if let Some(k) = dec.components.iter().position(|c| c.varies(x)) {
                return (x, VarClass::Slack(SlackEvidence::Parametric { component: k }));
            }
            if complete && !dec.components.is_empty() {
                let mut values: Vec<Scalar> = dec
                    .components
                    .iter()
                    .map(|c| c.values[&x].as_constant().expect("constant on every component"))
                    .collect();
                values.sort();
                values.dedup();
                return (x, VarClass::Tight(values));
            }
            (x, VarClass::Unknown)
        })
        .collect();
    let detours = v
        .ctx
        .detours
        .iter()
        .map(|d| {
            let nonzero_somewhere =
                d.vars().any(|x| absent.contains(&x) || dec.components.iter().any(|c| !c.values[&x].is_zero()));
            let halyard = if nonzero_somewhere {
                Some(true)
            } else if complete {
                Some(false)
            } else {
                None
            };
            DetourFlags { arrow: d.arrow, u_len: d.u_len, halyard, circular: is_circular(&v.ctx, d) }
        })
        .collect();
    let found = dec.max_dimension().unwrap_or(0);
    let dimension = complete.then_some(found);
    let linear = complete
        && dec.components.len() == 1
        && dec.components[0].nonzero.is_empty()
        && dec.components[0].values.values().all(|f| f.den.as_constant().is_some());
    Ok(SlackReport {
        vars,
        free_count: absent.len(),
        detours,
        dimension,
        dimension_lower_bound: found.max(absent.len()),
        linear,
    })
}

/// Variety and slack classification of one path, computed together.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MastAnalysis {
    pub variety: VarietyPresentation,
    /// Present exactly when the variety is known to be nonempty.
    pub slack: Option<SlackReport>,
}

impl MastAnalysis {
    pub fn ctx(&self) -> &MastContext {
        &self.variety.ctx
    }

    pub fn is_mast(&self) -> bool {
        self.variety.status.is_nonempty()
    }
}

pub fn analyze(pres: &Presentation, p: &Path, budget: &SolveBudget) -> Result<MastAnalysis, VarietyError> {
    let variety = variety(pres, p, budget)?;
    let slack = slack_report(&variety).ok();
    Ok(MastAnalysis { variety, slack })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::int;
    use alloc::string::ToString;
    use alloc::vec;

    fn quiver(vs: &[&str], arrows: &[(&str, &str, &str)]) -> Quiver {
        Quiver::new(
            vs.iter().map(|s| s.to_string()),
            arrows.iter().map(|(n, s, t)| (n.to_string(), s.to_string(), t.to_string())),
        )
        .unwrap()
    }

    fn pres(q: Quiver, rels: &[&[(i64, &str)]], loewy: Option<usize>) -> Presentation {
        let raw = rels.iter().map(|r| r.iter().map(|(c, p)| (int(*c), q.parse_path(p).unwrap())).collect()).collect();
        Presentation::new(q, raw, loewy).unwrap()
    }

    fn parallel_arrows() -> Presentation {
        let q = quiver(&["1", "2", "3"], &[("a", "1", "2"), ("b1", "2", "3"), ("b2", "2", "3"), ("g", "3", "3")]);
        pres(q, &[&[(1, "g g")], &[(1, "g b1 a"), (-1, "g b2 a")]], Some(4))
    }

    fn crossed_relations() -> Presentation {
        let q = quiver(&["1", "2", "3"], &[("a1", "1", "2"), ("b1", "1", "2"), ("a2", "2", "3"), ("b2", "2", "3")]);
        pres(q, &[&[(1, "a2 a1"), (-1, "b2 b1")], &[(1, "b2 a1"), (-1, "a2 b1")]], Some(3))
    }

    fn render(q: &Quiver, f: &Polynomial) -> String {
        f.render(|v| v.render(q))
    }

    #[test]
    fn parallel_arrows_system_and_slack() {
        let p = parallel_arrows();
        let q = p.quiver();
        let path = q.parse_path("g b1 a").unwrap();
        let v = variety(&p, &path, &SolveBudget::default()).unwrap();
        assert_eq!(v.ctx.detours.len(), 1);
        assert_eq!(v.ctx.detours[0].family, vec![2, 3]);
        let polys: Vec<String> = v.polys.iter().map(|f| render(q, f)).collect();
        assert_eq!(polys, vec!["X[b2,1,1] - 1"]);
        let VarietyStatus::Nonempty(w) = &v.status else { panic!() };
        assert_eq!(w.values().cloned().collect::<Vec<_>>(), vec![int(1), int(0)]);
        let s = slack_report(&v).unwrap();
        assert_eq!(s.vars[0].1, VarClass::Tight(vec![int(1)]));
        assert_eq!(s.vars[1].1, VarClass::Slack(SlackEvidence::Absent));
        assert_eq!(s.free_count, 1);
        assert_eq!(s.detours[0].halyard, Some(true));
    }

    #[test]
    fn crossed_relations_two_points() {
        let p = crossed_relations();
        let q = p.quiver();
        let path = q.parse_path("a2 a1").unwrap();
        let v = variety(&p, &path, &SolveBudget::default()).unwrap();
        let polys: Vec<String> = v.polys.iter().map(|f| render(q, f)).collect();
        assert_eq!(polys, vec!["X[b2,1,1] - X[b1,0,1]", "X[b1,0,1]*X[b2,1,1] - 1"]);
        let VarietyStatus::Nonempty(w) = &v.status else { panic!() };
        assert!(w.values().all(|x| *x == int(1)));
        let s = slack_report(&v).unwrap();
        for (_, c) in &s.vars {
            assert_eq!(*c, VarClass::Tight(vec![int(-1), int(1)]));
        }
        assert_eq!(s.dimension, Some(0));
    }

    #[test]
    fn substitution_examples() {
        let p = crossed_relations();
        let q = p.quiver();
        let ctx = MastContext::new(q, &q.parse_path("a2 a1").unwrap()).unwrap();
        let e = ctx.substitution_eval(&q.parse_path("b2 b1").unwrap(), 0).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(render(q, &e[&2]), "X[b1,0,1]*X[b2,1,1]");
        let p = parallel_arrows();
        let q = p.quiver();
        let ctx = MastContext::new(q, &q.parse_path("g b1 a").unwrap()).unwrap();
        let e = ctx.substitution_eval(&q.parse_path("g b2 a").unwrap(), 0).unwrap();
        assert_eq!(e.keys().copied().collect::<Vec<_>>(), vec![3]);
        assert_eq!(render(q, &e[&3]), "X[b2,1,1]");
        let trivial = Path::trivial(ctx.vertex(1));
        assert_eq!(ctx.substitution_eval(&trivial, 1).unwrap()[&1], Polynomial::one());
        assert_eq!(ctx.substitution_eval(&trivial, 0), Err(VarietyError::Endpoint(0)));
    }

    #[test]
    fn no_detours_on_a_line() {
        let q = quiver(&["1", "2", "3"], &[("a", "1", "2"), ("b", "2", "3")]);
        let ctx = MastContext::new(&q, &q.parse_path("b a").unwrap()).unwrap();
        assert!(ctx.vars.is_empty());
    }

    #[test]
    fn long_paths_are_not_masts() {
        let q = quiver(&["1"], &[("x", "1", "1")]);
        let p = pres(q, &[], Some(3));
        let path = p.quiver().parse_path("x x x").unwrap();
        let v = variety(&p, &path, &SolveBudget::default()).unwrap();
        assert!(v.status.is_empty());
        assert!(!mast_status(&p, &path, &SolveBudget::default()).unwrap().is_mast());
    }

    #[test]
    fn loop_with_tail_left_variety_is_a_line() {
        let q = quiver(&["1", "2"], &[("a", "1", "1"), ("b", "1", "2")]);
        let p = pres(q, &[&[(1, "a a")]], None);
        let path = p.quiver().parse_path("b a").unwrap();
        let v = variety(&p, &path, &SolveBudget::default()).unwrap();
        assert!(v.polys.is_empty());
        assert_eq!(v.ctx.vars.len(), 1);
        let s = slack_report(&v).unwrap();
        assert!(s.linear);
        assert_eq!(s.dimension, Some(1));
    }
}
