//! Decomposition of polynomial systems into rationally parametrized pieces.
//!
//! Every branch keeps, for each original variable, a fraction in the
//! variables that are still free. A branch with no equations left is a
//! [`Component`]: its free variables are parameters and its points are the
//! parameter values that avoid the recorded nonzero constraints. Branches
//! that no rule applies to are returned as [`Residual`]s.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{int, Point, Polynomial, Scalar, VarKey};

/// A rational function `num / den`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frac {
    pub num: Polynomial,
    pub den: Polynomial,
}

impl Frac {
    pub fn var(v: VarKey) -> Frac {
        Frac { num: Polynomial::var(v), den: Polynomial::one() }
    }

    pub fn constant(c: Scalar) -> Frac {
        Frac { num: Polynomial::constant(c), den: Polynomial::one() }
    }

    /// The value if the function does not depend on any variable.
    pub fn as_constant(&self) -> Option<Scalar> {
        if self.num.is_zero() {
            return Some(Scalar::zero());
        }
        let (_, n) = self.num.leading()?;
        let (_, d) = self.den.leading()?;
        let c = n / d;
        (self.num == self.den.scale(&c)).then_some(c)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `None` when the denominator vanishes or a variable is unassigned.
    pub fn eval(&self, pt: &Point) -> Option<Scalar> {
        let d = self.den.eval(pt).ok()?;
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(pt).ok()? / d)
    }

    pub fn variables(&self) -> BTreeSet<VarKey> {
        let mut vs = self.num.variables();
        vs.extend(self.den.variables());
        vs
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = Polynomial::one();
            return;
        }
        for v in self.den.variables() {
            let k = self.num.var_multiplicity(v).min(self.den.var_multiplicity(v));
            if k > 0 {
                self.num = self.num.divide_by_var(v, k).expect("multiplicity checked");
                self.den = self.den.divide_by_var(v, k).expect("multiplicity checked");
            }
        }
        if let Some((_, lc)) = self.den.leading() {
            let inv = lc.recip();
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
    }
}

/// A nonempty piece of the solution set: every point is obtained by
/// choosing values for `params` where all `nonzero` polynomials are
/// nonzero, then evaluating `values`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub params: Vec<VarKey>,
    pub values: BTreeMap<VarKey, Frac>,
    pub nonzero: Vec<Polynomial>,
}

impl Component {
    pub fn dimension(&self) -> usize {
        self.params.len()
    }

    /// The point for the given parameter values, if they are admissible.
    pub fn point_at(&self, params: &Point) -> Option<Point> {
        for q in &self.nonzero {
            if q.eval(params).ok()?.is_zero() {
                return None;
            }
        }
        self.values.iter().map(|(v, f)| Some((*v, f.eval(params)?))).collect()
    }

    /// A point of the component, choosing small parameter values greedily.
    pub fn witness(&self) -> Point {
        let mut fixed = Point::new();
        let mut guards: Vec<Polynomial> = self.nonzero.clone();
        for &p in &self.params {
            for cand in small_scalars() {
                let mut single = Point::new();
                single.insert(p, cand.clone());
                let next: Vec<Polynomial> = guards.iter().map(|g| g.partial_eval(&single)).collect();
                if next.iter().all(|g| !g.is_zero()) {
                    guards = next;
                    fixed.insert(p, cand);
                    break;
                }
            }
        }
        self.point_at(&fixed).expect("greedy choice avoids every nonzero constraint")
    }

    /// True iff `v` takes more than one value on the component.
    pub fn varies(&self, v: VarKey) -> bool {
        self.values.get(&v).is_some_and(|f| f.as_constant().is_none())
    }
}

/// A branch the rules could not finish.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    pub polys: Vec<Polynomial>,
    pub free: Vec<VarKey>,
    pub values: BTreeMap<VarKey, Frac>,
    pub nonzero: Vec<Polynomial>,
}

impl Residual {
    /// Searches integer points of `[-radius, radius]` in the free variables,
    /// skipping the search when the grid exceeds `max_points`.
    pub fn grid_witness(&self, radius: i64, max_points: u64) -> Option<Point> {
        let side = (2 * radius + 1) as u64;
        let total = side.checked_pow(self.free.len() as u32)?;
        if total > max_points {
            return None;
        }
        GridPoints::new(&self.free, -radius, radius).find_map(|pt| {
            let ok = self.polys.iter().all(|p| p.eval(&pt).is_ok_and(|x| x.is_zero()))
                && self.nonzero.iter().all(|q| q.eval(&pt).is_ok_and(|x| !x.is_zero()));
            if !ok {
                return None;
            }
            self.values.iter().map(|(v, f)| Some((*v, f.eval(&pt)?))).collect()
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Decomposition {
    pub components: Vec<Component>,
    pub unresolved: Vec<Residual>,
    pub budget_exhausted: bool,
}

impl Decomposition {
    /// Every solution lies in a listed component.
    pub fn is_complete(&self) -> bool {
        self.unresolved.is_empty() && !self.budget_exhausted
    }

    /// The largest component dimension, if any component was found.
    pub fn max_dimension(&self) -> Option<usize> {
        self.components.iter().map(Component::dimension).max()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveBudget {
    pub max_steps: usize,
    pub max_branches: usize,
    /// Univariate polynomials whose cleared coefficients exceed this are not
    /// searched for rational roots.
    pub root_coeff_limit: u64,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget { max_steps: 20_000, max_branches: 2_000, root_coeff_limit: 1_000_000_000_000 }
    }
}

#[derive(Clone, Debug)]
struct Branch {
    polys: Vec<Polynomial>,
    values: BTreeMap<VarKey, Frac>,
    nonzero: Vec<Polynomial>,
    free: BTreeSet<VarKey>,
}

impl Branch {
    /// Normalizes equations and constraints; `false` if the branch is empty.
    fn tidy(&mut self) -> bool {
        let mut polys = Vec::with_capacity(self.polys.len());
        for p in self.polys.drain(..) {
            if p.is_zero() {
                continue;
            }
            if p.as_constant().is_some() {
                return false;
            }
            polys.push(p.monic());
        }
        polys.sort();
        polys.dedup();
        let mut nonzero = Vec::with_capacity(self.nonzero.len());
        for q in self.nonzero.drain(..) {
            if q.is_zero() {
                return false;
            }
            if q.as_constant().is_none() {
                nonzero.push(q.monic());
            }
        }
        nonzero.sort();
        nonzero.dedup();
        if polys.iter().any(|p| nonzero.contains(p)) {
            return false;
        }
        self.polys = polys;
        self.nonzero = nonzero;
        true
    }

    fn knows_nonzero(&self, x: VarKey) -> bool {
        let px = Polynomial::var(x);
        self.nonzero.contains(&px)
    }

    /// Sets `x = num / den` everywhere, recording `den != 0`.
    fn assign(&mut self, x: VarKey, num: &Polynomial, den: &Polynomial) {
        let (num, den) = match den.as_constant() {
            Some(c) => (num.scale(&c.recip()), Polynomial::one()),
            None => (num.clone(), den.clone()),
        };
        for p in self.polys.iter_mut().chain(self.nonzero.iter_mut()) {
            let d = p.degree_in(x);
            if d > 0 {
                *p = p.substitute_fraction(x, &num, &den, d);
            }
        }
        for f in self.values.values_mut() {
            let d = f.num.degree_in(x).max(f.den.degree_in(x));
            if d > 0 {
                f.num = f.num.substitute_fraction(x, &num, &den, d);
                f.den = f.den.substitute_fraction(x, &num, &den, d);
                f.normalize();
            }
        }
        self.free.remove(&x);
        if den.as_constant().is_none() {
            self.nonzero.push(den);
        }
    }

    fn into_component(self) -> Component {
        Component { params: self.free.into_iter().collect(), values: self.values, nonzero: self.nonzero }
    }

    fn into_residual(self) -> Residual {
        Residual {
            polys: self.polys,
            free: self.free.into_iter().collect(),
            values: self.values,
            nonzero: self.nonzero,
        }
    }
}

enum Step {
    Replace(Vec<Branch>),
    Stuck,
}

fn step(b: &Branch, budget: &SolveBudget) -> Step {
    // Common variable factor.
    for (i, p) in b.polys.iter().enumerate() {
        for x in p.variables() {
            let k = p.var_multiplicity(x);
            if k == 0 {
                continue;
            }
            let quotient = p.divide_by_var(x, k).expect("multiplicity checked");
            let mut divided = b.clone();
            divided.polys[i] = quotient;
            if b.knows_nonzero(x) {
                return Step::Replace(alloc::vec![divided]);
            }
            divided.nonzero.push(Polynomial::var(x));
            let mut zero = b.clone();
            zero.assign(x, &Polynomial::zero(), &Polynomial::one());
            return Step::Replace(alloc::vec![zero, divided]);
        }
    }

    // Linear with a scalar coefficient, largest variable first.
    let mut best: Option<(VarKey, usize)> = None;
    for (i, p) in b.polys.iter().enumerate() {
        for x in p.variables() {
            if p.degree_in(x) == 1 && p.coefficients_in(x)[1].as_constant().is_some() && best.is_none_or(|(y, _)| x > y)
            {
                best = Some((x, i));
            }
        }
    }
    if let Some((x, i)) = best {
        let coeffs = b.polys[i].coefficients_in(x);
        let c = coeffs[1].as_constant().expect("checked scalar");
        let num = coeffs[0].scale(&(-c.recip()));
        let mut next = b.clone();
        next.assign(x, &num, &Polynomial::one());
        return Step::Replace(alloc::vec![next]);
    }

    // Univariate: branch on rational roots.
    for p in &b.polys {
        let vs = p.variables();
        if vs.len() != 1 {
            continue;
        }
        let x = *vs.iter().next().expect("one variable");
        if let Some(roots) = rational_roots(p, x, budget.root_coeff_limit) {
            let branches = roots
                .into_iter()
                .map(|r| {
                    let mut next = b.clone();
                    next.assign(x, &Polynomial::constant(r), &Polynomial::one());
                    next
                })
                .collect();
            return Step::Replace(branches);
        }
    }

    // Linear with a polynomial coefficient g: either g and the rest vanish,
    // or x is their quotient.
    let mut best: Option<(usize, VarKey, usize)> = None;
    for (i, p) in b.polys.iter().enumerate() {
        for x in p.variables() {
            if p.degree_in(x) != 1 {
                continue;
            }
            let size = p.coefficients_in(x)[1].term_count();
            if best.is_none_or(|(s, y, _)| size < s || (size == s && x > y)) {
                best = Some((size, x, i));
            }
        }
    }
    if let Some((_, x, i)) = best {
        let coeffs = b.polys[i].coefficients_in(x);
        let (rest, g) = (&coeffs[0], &coeffs[1]);
        let mut vanish = b.clone();
        vanish.polys.swap_remove(i);
        vanish.polys.push(g.clone());
        vanish.polys.push(rest.clone());
        let mut solved = b.clone();
        solved.assign(x, &-rest, g);
        return Step::Replace(alloc::vec![vanish, solved]);
    }

    Step::Stuck
}

/// Decomposes `{ polys = 0 }` over the variables `vars` (plus any that
/// occur in `polys`).
pub fn decompose(polys: &[Polynomial], vars: &[VarKey], budget: &SolveBudget) -> Decomposition {
    let mut all: BTreeSet<VarKey> = vars.iter().copied().collect();
    for p in polys {
        all.extend(p.variables());
    }
    let start = Branch {
        polys: polys.to_vec(),
        values: all.iter().map(|&v| (v, Frac::var(v))).collect(),
        nonzero: Vec::new(),
        free: all,
    };
    let mut out = Decomposition::default();
    let mut stack = alloc::vec![start];
    let (mut steps, mut created) = (0usize, 1usize);
    while let Some(mut b) = stack.pop() {
        if !b.tidy() {
            continue;
        }
        if b.polys.is_empty() {
            out.components.push(b.into_component());
            continue;
        }
        steps += 1;
        if steps > budget.max_steps || created > budget.max_branches {
            out.budget_exhausted = true;
            out.unresolved.push(b.into_residual());
            continue;
        }
        match step(&b, budget) {
            Step::Replace(branches) => {
                created += branches.len();
                stack.extend(branches.into_iter().rev());
            }
            Step::Stuck => out.unresolved.push(b.into_residual()),
        }
    }
    out
}

/// 0, 1, -1, 2, -2, ...
fn small_scalars() -> impl Iterator<Item = Scalar> {
    core::iter::once(int(0)).chain((1i64..).flat_map(|n| [int(n), int(-n)]))
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Rational roots of a univariate polynomial, or `None` if its cleared
/// coefficients are too large to search.
fn rational_roots(p: &Polynomial, x: VarKey, limit: u64) -> Option<Vec<Scalar>> {
    let coeffs: Vec<Scalar> = p.coefficients_in(x).iter().map(|c| c.as_constant().expect("univariate")).collect();
    let lcm = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = coeffs.iter().map(|c| (c * Scalar::from_integer(lcm.clone())).to_integer()).collect();
    let mut roots = Vec::new();
    let low = ints.iter().position(|c| !c.is_zero())?;
    if low > 0 {
        roots.push(Scalar::zero());
    }
    let a0 = ints[low].abs().to_u64().filter(|&n| n <= limit)?;
    let an = ints.last()?.abs().to_u64().filter(|&n| n <= limit)?;
    let (ps, qs) = (divisors(a0), divisors(an));
    if ps.len() * qs.len() > 200_000 {
        return None;
    }
    for &q in &qs {
        for &n in &ps {
            for sign in [1i64, -1] {
                let cand = Scalar::new(BigInt::from(n) * sign, BigInt::from(q));
                if roots.contains(&cand) {
                    continue;
                }
                let value = coeffs.iter().rev().fold(Scalar::zero(), |acc, c| acc * &cand + c);
                if value.is_zero() {
                    roots.push(cand);
                }
            }
        }
    }
    roots.sort();
    Some(roots)
}

/// All integer points of `[lo, hi]^vars`, in odometer order with the
/// first variable varying slowest.
pub struct GridPoints {
    vars: Vec<VarKey>,
    lo: i64,
    hi: i64,
    current: Option<Vec<i64>>,
}

impl GridPoints {
    pub fn new(vars: &[VarKey], lo: i64, hi: i64) -> GridPoints {
        let current = (lo <= hi).then(|| alloc::vec![lo; vars.len()]);
        GridPoints { vars: vars.to_vec(), lo, hi, current }
    }
}

impl Iterator for GridPoints {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        let cur = self.current.as_mut()?;
        let pt = self.vars.iter().zip(cur.iter()).map(|(v, &x)| (*v, int(x))).collect();
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if cur[i] < self.hi {
                cur[i] += 1;
                break;
            }
            cur[i] = self.lo;
        }
        Some(pt)
    }
}
