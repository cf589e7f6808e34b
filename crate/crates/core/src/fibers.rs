//! Isomorphism of uniserials with a fixed mast.
//!
//! Changing the top element `x` to `x + sum_j Z_j w_j x`, where the `w_j`
//! are the right subpaths of `p` that are cycles at its source, moves a
//! point `k0` of `V_p` to every point isomorphic to it. The coordinates of
//! the moved point satisfy, for each detour variable,
//!
//! `k_i - k0_i = sum_j Z_j (a_ij - sum_{m < i} k_m b_imj)`
//!
//! where `a_ij` is the `v_i` coefficient of `alpha u w_j x` and `b_imj` the
//! `v_i` coefficient of `v_m w_j x`, both at `k0`. Two points are
//! isomorphic iff this system in the `Z_j` is consistent.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;
use thiserror::Error;

use crate::criteria::suf_factor;
use crate::poly::{
    solve_consistency, Component, Consistency, LinearCertificate, LinearRow, LinearSystem, Point, Polynomial, Scalar,
    VarKey,
};
use crate::quiver::{ArrowId, Quiver, VertexId};
use crate::variety::{MastContext, SlackReport, VarietyPresentation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FiberError {
    #[error("point is not in the variety")]
    NotInVariety,
    #[error("slack variable {0:?} has no factorization through a source cycle")]
    NoFactorization(VarKey),
    #[error("changing the top element along its cycle cannot clear {0:?}")]
    Stuck(VarKey),
}

/// The unknown `Z_j` (1-based) of the fiber system.
pub fn z_var(j: usize) -> VarKey {
    VarKey::Aux(j as u32)
}

/// `a_ij` and `b_imj` as polynomials on `V_p`, before fixing a base point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberTemplate {
    /// `len w_j`, increasing.
    pub cycles: Vec<usize>,
    pub a: BTreeMap<VarKey, Vec<Polynomial>>,
    pub b: BTreeMap<VarKey, Vec<(VarKey, Vec<Polynomial>)>>,
}

impl FiberTemplate {
    pub fn new(ctx: &MastContext) -> FiberTemplate {
        let cycles = ctx.source_cycles();
        let arrows = ctx.path.arrows();
        let mut a = BTreeMap::new();
        let mut b = BTreeMap::new();
        for d in &ctx.detours {
            let column = |w: usize, tail: &[ArrowId], layer: usize| -> Polynomial {
                let mut word: Vec<ArrowId> = arrows[..w].to_vec();
                word.extend_from_slice(tail);
                ctx.eval_arrows(&word, 0).remove(&layer).unwrap_or_else(Polynomial::zero)
            };
            let mut au: Vec<ArrowId> = arrows[..d.u_len].to_vec();
            au.push(d.arrow);
            for (i, &r) in d.family.iter().enumerate() {
                let var = d.var(i + 1);
                a.insert(var, cycles.iter().map(|&w| column(w, &au, r)).collect());
                let lower = d.family[..i]
                    .iter()
                    .enumerate()
                    .map(|(m, &rm)| (d.var(m + 1), cycles.iter().map(|&w| column(w, &arrows[..rm], r)).collect()))
                    .collect();
                b.insert(var, lower);
            }
        }
        FiberTemplate { cycles, a, b }
    }

    /// Instantiates the coefficients at `k0`, which is assumed to lie in `V_p`.
    pub fn at(&self, k0: &Point) -> FiberSystem {
        let ev = |f: &Polynomial| f.eval(k0).expect("point assigns every variable");
        FiberSystem {
            base: k0.clone(),
            cycles: self.cycles.clone(),
            a: self.a.iter().map(|(v, col)| (*v, col.iter().map(ev).collect())).collect(),
            b: self
                .b
                .iter()
                .map(|(v, lower)| (*v, lower.iter().map(|(m, col)| (*m, col.iter().map(ev).collect())).collect()))
                .collect(),
        }
    }
}

/// The system at a fixed base point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberSystem {
    pub base: Point,
    pub cycles: Vec<usize>,
    pub a: BTreeMap<VarKey, Vec<Scalar>>,
    pub b: BTreeMap<VarKey, Vec<(VarKey, Vec<Scalar>)>>,
}

impl FiberSystem {
    pub fn t(&self) -> usize {
        self.cycles.len()
    }

    pub fn unknowns(&self) -> Vec<VarKey> {
        (1..=self.t()).map(z_var).collect()
    }

    /// The rows asking that `k` be reached from the base point.
    pub fn system_for(&self, k: &Point) -> LinearSystem {
        let zero = Scalar::zero();
        let rows = self
            .a
            .iter()
            .map(|(v, a_col)| {
                let mut coeffs = BTreeMap::new();
                for (j, a) in a_col.iter().enumerate() {
                    let mut c = a.clone();
                    for (m, b_col) in &self.b[v] {
                        c -= k.get(m).unwrap_or(&zero) * &b_col[j];
                    }
                    if !c.is_zero() {
                        coeffs.insert(z_var(j + 1), c);
                    }
                }
                LinearRow { coeffs, constant: k.get(v).unwrap_or(&zero) - self.base.get(v).unwrap_or(&zero) }
            })
            .collect();
        LinearSystem { rows, unknowns: self.unknowns() }
    }

    /// The point reached with top element `x + sum z_j w_j x`.
    pub fn orbit_point(&self, z: &[Scalar]) -> Point {
        let mut k = Point::new();
        for (v, a_col) in &self.a {
            let mut x = self.base[v].clone();
            for (j, zj) in z.iter().enumerate() {
                let mut c = a_col[j].clone();
                for (m, b_col) in &self.b[v] {
                    c -= &k[m] * &b_col[j];
                }
                x += zj * c;
            }
            k.insert(*v, x);
        }
        k
    }

    /// [`FiberSystem::orbit_point`] with symbolic `Z_j`.
    pub fn orbit_polys(&self) -> BTreeMap<VarKey, Polynomial> {
        let mut k: BTreeMap<VarKey, Polynomial> = BTreeMap::new();
        for (v, a_col) in &self.a {
            let mut x = Polynomial::constant(self.base[v].clone());
            for j in 0..self.t() {
                let mut c = Polynomial::constant(a_col[j].clone());
                for (m, b_col) in &self.b[v] {
                    c = &c - &k[m].scale(&b_col[j]);
                }
                x = &x + &(&c * &Polynomial::var(z_var(j + 1)));
            }
            k.insert(*v, x);
        }
        k
    }
}

pub fn fiber_system(variety: &VarietyPresentation, k0: &Point) -> Result<FiberSystem, FiberError> {
    if !variety.contains(k0) {
        return Err(FiberError::NotInVariety);
    }
    Ok(FiberTemplate::new(&variety.ctx).at(k0))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsoOutcome {
    /// Values for the `Z_j`, with the unknowns left free.
    Equivalent {
        z: Point,
        free: Vec<VarKey>,
    },
    Distinct(LinearCertificate),
}

impl IsoOutcome {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, IsoOutcome::Equivalent { .. })
    }
}

fn consistency_outcome(sys: &LinearSystem) -> IsoOutcome {
    match solve_consistency(sys) {
        Consistency::Consistent { witness, free } => IsoOutcome::Equivalent { z: witness, free },
        Consistency::Inconsistent(cert) => IsoOutcome::Distinct(cert),
    }
}

/// Whether `k` is reached from `k0` by a change of top element.
pub fn iso_equivalent(variety: &VarietyPresentation, k0: &Point, k: &Point) -> Result<IsoOutcome, FiberError> {
    if !variety.contains(k) {
        return Err(FiberError::NotInVariety);
    }
    Ok(consistency_outcome(&fiber_system(variety, k0)?.system_for(k)))
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IsoPartition {
    /// Indices into the input, each class sorted, classes by smallest member.
    pub classes: Vec<Vec<usize>>,
    /// Pairs found equivalent in one direction only.
    pub anomalies: Vec<(usize, usize)>,
}

impl IsoPartition {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Groups points by isomorphism, testing each undecided pair both ways.
pub fn iso_classes(variety: &VarietyPresentation, points: &[Point]) -> Result<IsoPartition, FiberError> {
    if points.iter().any(|k| !variety.contains(k)) {
        return Err(FiberError::NotInVariety);
    }
    let template = FiberTemplate::new(&variety.ctx);
    let systems: Vec<FiberSystem> = points.iter().map(|k| template.at(k)).collect();
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut anomalies = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if find(&mut parent, i) == find(&mut parent, j) {
                continue;
            }
            let forward = consistency_outcome(&systems[i].system_for(&points[j])).is_equivalent();
            let backward = consistency_outcome(&systems[j].system_for(&points[i])).is_equivalent();
            match (forward, backward) {
                (true, true) => {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri.max(rj)] = ri.min(rj);
                }
                (false, false) => {}
                _ => anomalies.push((i, j)),
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    Ok(IsoPartition { classes: groups.into_values().collect(), anomalies })
}

/// Moves `k` to an isomorphic point whose slack coordinates vanish, by
/// clearing slack variables in order of their cycle length. Each step
/// solves for the multiple of the cycle to subtract from the top element.
pub fn normalize_point(variety: &VarietyPresentation, slack: &SlackReport, k: &Point) -> Result<Point, FiberError> {
    if !variety.contains(k) {
        return Err(FiberError::NotInVariety);
    }
    let ctx = &variety.ctx;
    let mut steps = Vec::new();
    for v in slack.slack_vars() {
        let w = suf_factor(ctx, v).ok_or(FiberError::NoFactorization(v))?;
        steps.push((w, v));
    }
    steps.sort();
    let template = FiberTemplate::new(ctx);
    let mut cur = k.clone();
    for (w, v) in steps {
        if cur[&v].is_zero() {
            continue;
        }
        let j = template.cycles.iter().position(|&c| c == w).expect("w is a source cycle");
        let sys = template.at(&cur);
        let others: Point = (1..=sys.t()).filter(|&i| i != j + 1).map(|i| (z_var(i), Scalar::zero())).collect();
        let f = sys.orbit_polys()[&v].partial_eval(&others);
        let z = z_var(j + 1);
        let slope = f.coefficients_in(z);
        let root = match slope.as_slice() {
            [c0, c1] => match (c0.as_constant(), c1.as_constant()) {
                (Some(c0), Some(c1)) if !c1.is_zero() => -c0 / c1,
                _ => return Err(FiberError::Stuck(v)),
            },
            _ => return Err(FiberError::Stuck(v)),
        };
        let mut zs = alloc::vec![Scalar::zero(); sys.t()];
        zs[j] = root;
        cur = sys.orbit_point(&zs);
    }
    Ok(cur)
}

/// Proof that one component of `V_p` is a single isomorphism class:
/// solving `Z_j = solved[j]` (remaining `Z` set to zero) moves `base` to the
/// component's point at any parameter values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentOrbit {
    pub base: Point,
    pub solved: Vec<(VarKey, Polynomial)>,
}

impl ComponentOrbit {
    /// Recomputes the moved point symbolically and compares it with the
    /// component's parametrization.
    pub fn verify(&self, variety: &VarietyPresentation, comp: &Component) -> bool {
        let Ok(sys) = fiber_system(variety, &self.base) else { return false };
        let orbit = substitute_solution(sys.orbit_polys(), &self.solved, sys.t());
        comp.values.iter().all(|(v, f)| orbit.get(v).is_some_and(|k| (k * &f.den - f.num.clone()).is_zero()))
    }
}

fn substitute_solution(
    mut polys: BTreeMap<VarKey, Polynomial>,
    solved: &[(VarKey, Polynomial)],
    t: usize,
) -> BTreeMap<VarKey, Polynomial> {
    for (z, expr) in solved.iter().rev() {
        for p in polys.values_mut() {
            *p = p.substitute(*z, expr);
        }
    }
    let zeros: Point = (1..=t).map(|j| (z_var(j), Scalar::zero())).collect();
    for p in polys.values_mut() {
        *p = p.partial_eval(&zeros);
    }
    polys
}

/// Every component of a completely decomposed `V_p` is one orbit, and the
/// component base points fall into `partition`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitCertificate {
    pub components: Vec<ComponentOrbit>,
    pub partition: IsoPartition,
}

impl OrbitCertificate {
    pub fn class_count(&self) -> usize {
        self.partition.class_count()
    }
}

/// Solves `k(Z) = C(T)` for the parameter coordinates by eliminating one
/// `Z` at a time from an equation where it appears with constant coefficient.
fn component_orbit(variety: &VarietyPresentation, comp: &Component) -> Option<ComponentOrbit> {
    let base = comp.witness();
    let sys = fiber_system(variety, &base).ok()?;
    let orbit = sys.orbit_polys();
    let mut eqs: Vec<Polynomial> = comp.params.iter().map(|p| &orbit[p] - &Polynomial::var(*p)).collect();
    let mut solved: Vec<(VarKey, Polynomial)> = Vec::new();
    let is_z = |v: &VarKey| matches!(v, VarKey::Aux(_));
    while let Some(pos) = eqs.iter().position(|e| !e.is_zero()) {
        let e = eqs.remove(pos);
        let pick = e.variables().into_iter().filter(is_z).find(|&z| {
            let cs = e.coefficients_in(z);
            cs.len() == 2 && cs[1].as_constant().is_some()
        })?;
        let cs = e.coefficients_in(pick);
        let inv = cs[1].as_constant().expect("checked constant").recip();
        let expr = (-&cs[0]).scale(&inv);
        for other in eqs.iter_mut() {
            *other = other.substitute(pick, &expr);
        }
        for (_, prev) in solved.iter_mut() {
            *prev = prev.substitute(pick, &expr);
        }
        solved.push((pick, expr));
    }
    let cert = ComponentOrbit { base, solved };
    cert.verify(variety, comp).then_some(cert)
}

/// Exact class count for `V_p` when every component is a single orbit.
pub fn orbit_certificate(variety: &VarietyPresentation) -> Option<OrbitCertificate> {
    if !variety.decomposition.is_complete() || !variety.status.is_nonempty() {
        return None;
    }
    let components: Vec<ComponentOrbit> =
        variety.decomposition.components.iter().map(|c| component_orbit(variety, c)).collect::<Option<_>>()?;
    let bases: Vec<Point> = components.iter().map(|c| c.base.clone()).collect();
    let partition = iso_classes(variety, &bases).ok()?;
    Some(OrbitCertificate { components, partition })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetourEdge {
    pub from: usize,
    pub to: usize,
    pub arrow: ArrowId,
}

/// The graph of the uniserial at a point: one node per layer, spine edges
/// between consecutive layers and one edge per realized detour.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredGraph {
    pub layers: Vec<VertexId>,
    pub spine: Vec<ArrowId>,
    pub detours: Vec<DetourEdge>,
}

impl LayeredGraph {
    pub fn is_edge_path(&self) -> bool {
        self.detours.is_empty()
    }
}

pub fn layered_graph(ctx: &MastContext, k: &Point) -> LayeredGraph {
    let detours = ctx
        .detours
        .iter()
        .filter_map(|d| {
            let i = d.vars().position(|v| k.get(&v).is_some_and(|x| !x.is_zero()))?;
            Some(DetourEdge { from: d.u_len, to: d.family[i], arrow: d.arrow })
        })
        .collect();
    LayeredGraph { layers: ctx.path.vertices().to_vec(), spine: ctx.path.arrows().to_vec(), detours }
}

/// Graphviz rendering with layer `i` at vertex `v` named `L<i>_<v>`.
pub fn emit_dot(q: &Quiver, g: &LayeredGraph) -> String {
    let node = |i: usize| format!("L{}_{}", i, q.vertex_name(g.layers[i]));
    let mut out = String::from("digraph uniserial {\n  rankdir=TB;\n");
    for (i, &v) in g.layers.iter().enumerate() {
        out += &format!("  {} [label=\"{}\"];\n", node(i), q.vertex_name(v));
    }
    for (i, &a) in g.spine.iter().enumerate() {
        out += &format!("  {} -> {} [label=\"{}\"];\n", node(i), node(i + 1), q.arrow_name(a));
    }
    for e in &g.detours {
        out += &format!(
            "  {} -> {} [label=\"{}\", constraint=false, style=dashed];\n",
            node(e.from),
            node(e.to),
            q.arrow_name(e.arrow)
        );
    }
    out += "}\n";
    out
}

/// Points of `V_p` with every coordinate in `values`, found by running the
/// parameters of each component over `values`. `None` if the decomposition
/// is incomplete or the enumeration would exceed `limit` parameter choices.
pub fn grid_points(variety: &VarietyPresentation, values: &[Scalar], limit: usize) -> Option<Vec<Point>> {
    if !variety.decomposition.is_complete() {
        return None;
    }
    let mut out: Vec<Point> = Vec::new();
    for comp in &variety.decomposition.components {
        let d = comp.params.len() as u32;
        let total = values.len().checked_pow(d)?;
        if total > limit {
            return None;
        }
        for n in 0..total {
            let mut rest = n;
            let mut params = Point::new();
            for p in comp.params.iter().rev() {
                params.insert(*p, values[rest % values.len()].clone());
                rest /= values.len();
            }
            if let Some(pt) = comp.point_at(&params) {
                if pt.values().all(|x| values.contains(x)) {
                    out.push(pt);
                }
            }
        }
    }
    out.sort_by(|a, b| a.values().cmp(b.values()));
    out.dedup();
    Some(out)
}

/// The integer range `lo..=hi` as scalars.
pub fn int_range(lo: i64, hi: i64) -> Vec<Scalar> {
    (lo..=hi).map(|i| Scalar::from_integer(i.into())).collect()
}
