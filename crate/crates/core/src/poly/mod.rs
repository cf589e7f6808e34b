//! Sparse multivariate polynomials over the rationals.

mod linear;
mod solve;

pub use linear::{
    linear_triangulate, solve_consistency, Consistency, LinearCertificate, LinearOutcome, LinearRow, LinearSolution,
    LinearSystem,
};
pub use solve::{decompose, Component, Decomposition, Frac, GridPoints, Residual, SolveBudget};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Write as _;
use core::ops::{Add, Mul, Neg, Sub};
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::quiver::{ArrowId, Quiver};

/// Exact rational scalar; always reduced with a positive denominator.
pub type Scalar = BigRational;

/// An assignment of scalars to variables.
pub type Point = BTreeMap<VarKey, Scalar>;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Scalar {
    Scalar::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `3`, `-3/2` or `+1/4`.
pub fn parse_scalar(text: &str) -> Option<Scalar> {
    let t = text.trim();
    let t = t.strip_prefix('+').unwrap_or(t);
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let ok = |s: &str| {
        let s = s.strip_prefix('-').unwrap_or(s);
        !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
    };
    if !ok(n) || !ok(d) || d.starts_with('-') {
        return None;
    }
    let n = BigInt::from_str(n).ok()?;
    let d = BigInt::from_str(d).ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Scalar::new(n, d))
}

/// The variable attached to the `index`-th subpath of the detour
/// `(arrow, u)` with `len(u) = u_len`; that subpath has length `v_len`.
///
/// The derived order compares `v_len`, then `u_len`, then the arrow, which
/// is the canonical order of the variable set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DetourVar {
    pub v_len: usize,
    pub u_len: usize,
    pub arrow: ArrowId,
    pub index: usize,
}

/// A polynomial variable. Auxiliary variables sort after all detour
/// variables and are used for fiber-system unknowns and parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKey {
    Detour(DetourVar),
    Aux(u32),
}

impl VarKey {
    pub fn detour(&self) -> Option<&DetourVar> {
        match self {
            VarKey::Detour(d) => Some(d),
            VarKey::Aux(_) => None,
        }
    }

    /// `X[arrow,len(u),i]` for detour variables, `Z[j]` for auxiliaries.
    pub fn render(&self, q: &Quiver) -> String {
        let mut s = String::new();
        match self {
            VarKey::Detour(d) => {
                let _ = write!(s, "X[{},{},{}]", q.arrow_name(d.arrow), d.u_len, d.index);
            }
            VarKey::Aux(j) => {
                let _ = write!(s, "Z[{}]", j);
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("point does not assign variable {0:?}")]
    MissingVariable(VarKey),
    #[error("polynomial of total degree {0} where a linear one is required")]
    Nonlinear(u32),
}

/// A monomial: variables with positive exponents, sorted by variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(VarKey, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn var(v: VarKey) -> Monomial {
        Monomial(alloc::vec![(v, 1)])
    }

    pub fn from_powers(mut powers: Vec<(VarKey, u32)>) -> Monomial {
        powers.retain(|&(_, e)| e > 0);
        powers.sort();
        let mut out: Vec<(VarKey, u32)> = Vec::with_capacity(powers.len());
        for (v, e) in powers {
            match out.last_mut() {
                Some((w, f)) if *w == v => *f += e,
                _ => out.push((v, e)),
            }
        }
        Monomial(out)
    }

    pub fn powers(&self) -> &[(VarKey, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn degree_in(&self, v: VarKey) -> u32 {
        self.0.iter().find(|(w, _)| *w == v).map_or(0, |&(_, e)| e)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Removes `v` entirely, returning its exponent.
    fn split_off(&self, v: VarKey) -> (u32, Monomial) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|&&(w, f)| {
                if w == v {
                    e = f;
                    false
                } else {
                    true
                }
            })
            .copied()
            .collect();
        (e, Monomial(rest))
    }
}

// Graded order: total degree first, then lexicographic from the largest
// variable down.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let by_degree = self.degree().cmp(&other.degree());
        if by_degree != Ordering::Equal {
            return by_degree;
        }
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (a.len(), b.len());
        loop {
            match (i > 0, j > 0) {
                (false, false) => return Ordering::Equal,
                (true, false) => return Ordering::Greater,
                (false, true) => return Ordering::Less,
                (true, true) => {
                    let (va, ea) = a[i - 1];
                    let (vb, eb) = b[j - 1];
                    if va != vb {
                        return va.cmp(&vb);
                    }
                    if ea != eb {
                        return ea.cmp(&eb);
                    }
                    i -= 1;
                    j -= 1;
                }
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial with rational coefficients; zero coefficients are never
/// stored, so the zero polynomial has no terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Scalar>,
}

impl PartialOrd for Polynomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Polynomial {
    fn cmp(&self, other: &Self) -> Ordering {
        // Leading terms first.
        self.terms.iter().rev().cmp(other.terms.iter().rev())
    }
}

impl Polynomial {
    pub fn zero() -> Polynomial {
        Polynomial::default()
    }

    pub fn one() -> Polynomial {
        Polynomial::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Polynomial {
        let mut p = Polynomial::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(v: VarKey) -> Polynomial {
        let mut p = Polynomial::zero();
        p.add_term(Monomial::var(v), Scalar::one());
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Scalar)>>(terms: I) -> Polynomial {
        let mut p = Polynomial::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    /// Terms in increasing monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if the polynomial is constant (zero included).
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn constant_term(&self) -> Scalar {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn leading(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: VarKey) -> u32 {
        self.terms.keys().map(|m| m.degree_in(v)).max().unwrap_or(0)
    }

    pub fn variables(&self) -> BTreeSet<VarKey> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|&(v, _)| v)).collect()
    }

    pub fn occurs(&self, v: VarKey) -> bool {
        self.terms.keys().any(|m| m.degree_in(v) > 0)
    }

    pub fn scale(&self, c: &Scalar) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial { terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect() }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut out = Polynomial::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Divides by the leading coefficient. The zero polynomial stays zero.
    pub fn monic(&self) -> Polynomial {
        match self.leading() {
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(&inv)
            }
            None => Polynomial::zero(),
        }
    }

    /// Evaluates at a point that covers every occurring variable.
    pub fn eval(&self, point: &Point) -> Result<Scalar, PolyError> {
        let mut total = Scalar::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in &m.0 {
                let x = point.get(&v).ok_or(PolyError::MissingVariable(v))?;
                t *= pow_scalar(x, e);
            }
            total += t;
        }
        Ok(total)
    }

    /// Substitutes the scalars of `point` for the variables it covers.
    pub fn partial_eval(&self, point: &Point) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for &(v, e) in &m.0 {
                match point.get(&v) {
                    Some(x) => coeff *= pow_scalar(x, e),
                    None => rest.push((v, e)),
                }
            }
            out.add_term(Monomial(rest), coeff);
        }
        out
    }

    /// Coefficients with respect to `v`: entry `k` multiplies `v^k`.
    pub fn coefficients_in(&self, v: VarKey) -> Vec<Polynomial> {
        let mut out: Vec<Polynomial> = Vec::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            let e = e as usize;
            if out.len() <= e {
                out.resize(e + 1, Polynomial::zero());
            }
            out[e].add_term(rest, c.clone());
        }
        if out.is_empty() {
            out.push(Polynomial::zero());
        }
        out
    }

    /// Replaces `v` by `q`.
    pub fn substitute(&self, v: VarKey, q: &Polynomial) -> Polynomial {
        let coeffs = self.coefficients_in(v);
        // Horner in v.
        let mut out = Polynomial::zero();
        for c in coeffs.iter().rev() {
            out = &(&out * q) + c;
        }
        out
    }

    /// Replaces `v` by `num/den` and multiplies through by `den^deg`, where
    /// `deg` must be at least the degree of `self` in `v`.
    pub fn substitute_fraction(&self, v: VarKey, num: &Polynomial, den: &Polynomial, deg: u32) -> Polynomial {
        let coeffs = self.coefficients_in(v);
        debug_assert!(coeffs.len() as u32 <= deg + 1);
        let mut out = Polynomial::zero();
        let mut num_pow = Polynomial::one();
        for (k, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                let den_pow = den.pow(deg - k as u32);
                out = &out + &(&(c * &num_pow) * &den_pow);
            }
            num_pow = &num_pow * num;
        }
        out
    }

    /// Exact division by `v^k` when every term is divisible by it.
    pub fn divide_by_var(&self, v: VarKey, k: u32) -> Option<Polynomial> {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            if e < k {
                return None;
            }
            let mut powers = rest.0;
            powers.push((v, e - k));
            out.add_term(Monomial::from_powers(powers), c.clone());
        }
        Some(out)
    }

    /// Largest power of `v` dividing every term.
    pub fn var_multiplicity(&self, v: VarKey) -> u32 {
        self.terms.keys().map(|m| m.degree_in(v)).min().unwrap_or(0)
    }

    /// Renders the polynomial with leading terms first, e.g.
    /// `X[b1,0,1]*X[b2,1,1] - 1`.
    pub fn render<F: Fn(&VarKey) -> String>(&self, name: F) -> String {
        if self.is_zero() {
            return String::from("0");
        }
        let mut s = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if negative {
                    s.push('-');
                }
            } else {
                s.push_str(if negative { " - " } else { " + " });
            }
            let unit = abs.is_one();
            if m.is_one() {
                let _ = write!(s, "{}", abs);
                continue;
            }
            if !unit {
                let _ = write!(s, "{}*", abs);
            }
            for (i, &(v, e)) in m.0.iter().enumerate() {
                if i > 0 {
                    s.push('*');
                }
                s.push_str(&name(&v));
                if e > 1 {
                    let _ = write!(s, "^{}", e);
                }
            }
        }
        s
    }
}

pub fn pow_scalar(x: &Scalar, e: u32) -> Scalar {
    let mut out = Scalar::one();
    for _ in 0..e {
        out *= x;
    }
    out
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Scalar::one())
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl Zero for Polynomial {
    fn zero() -> Self {
        Polynomial::zero()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Polynomial {
    fn one() -> Self {
        Polynomial::one()
    }
}

/// True iff `v` occurs with positive exponent in some polynomial.
pub fn occurs(v: VarKey, polys: &[Polynomial]) -> bool {
    polys.iter().any(|p| p.occurs(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    pub(crate) fn x(i: u32) -> VarKey {
        VarKey::Aux(i)
    }

    fn px(i: u32) -> Polynomial {
        Polynomial::var(x(i))
    }

    fn c(n: i64) -> Polynomial {
        Polynomial::constant(int(n))
    }

    #[test]
    fn arithmetic_and_eval() {
        let f = &(&px(1) * &px(2)) - &c(1);
        let mut pt = Point::new();
        pt.insert(x(1), int(1));
        pt.insert(x(2), int(1));
        assert_eq!(f.eval(&pt).unwrap(), int(0));
        pt.insert(x(1), int(-1));
        pt.insert(x(2), int(-1));
        assert_eq!(f.eval(&pt).unwrap(), int(0));
        assert!((&f * &Polynomial::zero()).is_zero());
        let mut partial = Point::new();
        partial.insert(x(1), int(2));
        assert_eq!(f.eval(&partial), Err(PolyError::MissingVariable(x(2))));
        assert_eq!(f.partial_eval(&partial), &(&px(2) * &c(2)) - &c(1));
    }

    #[test]
    fn occurs_checks() {
        let sys = vec![&px(1) - &c(1)];
        assert!(!occurs(x(2), &sys));
        assert!(occurs(x(1), &sys));
        assert!(!occurs(x(1), &[]));
    }

    #[test]
    fn substitution() {
        // (x1^2 + x1*x2) with x1 := x2 + 1
        let f = &(&px(1) * &px(1)) + &(&px(1) * &px(2));
        let g = &px(2) + &c(1);
        let h = f.substitute(x(1), &g);
        let expected = &(&g * &g) + &(&g * &px(2));
        assert_eq!(h, expected);
        // x1 := x2 / x3 in x1*x2 - 1, cleared: x2^2 - x3
        let f = &(&px(1) * &px(2)) - &c(1);
        let h = f.substitute_fraction(x(1), &px(2), &px(3), 1);
        assert_eq!(h, &(&px(2) * &px(2)) - &px(3));
    }

    #[test]
    fn render_orders_leading_term_first() {
        let f = &(&px(1) * &px(2)) - &c(1);
        let s = f.render(|v| alloc::format!("{:?}", v));
        assert_eq!(s, "Aux(1)*Aux(2) - 1");
        let g = &px(2) - &px(1);
        assert_eq!(g.render(|v| alloc::format!("{:?}", v)), "Aux(2) - Aux(1)");
        assert_eq!((&c(0) - &px(1)).monic(), &px(1) - &c(0));
    }

    #[test]
    fn scalar_parsing() {
        assert_eq!(parse_scalar("3/2"), Some(frac(3, 2)));
        assert_eq!(parse_scalar("-1/2"), Some(frac(-1, 2)));
        assert_eq!(parse_scalar("+4"), Some(int(4)));
        assert_eq!(parse_scalar("1/0"), None);
        assert_eq!(parse_scalar("a"), None);
        assert_eq!(parse_scalar("1/-2"), None);
    }

    #[test]
    fn var_order_is_canonical() {
        let a = VarKey::Detour(DetourVar { v_len: 2, u_len: 1, arrow: ArrowId(5), index: 1 });
        let b = VarKey::Detour(DetourVar { v_len: 3, u_len: 0, arrow: ArrowId(0), index: 1 });
        let c = VarKey::Detour(DetourVar { v_len: 3, u_len: 1, arrow: ArrowId(0), index: 2 });
        assert!(a < b && b < c && c < VarKey::Aux(0));
    }
}
