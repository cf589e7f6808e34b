//! Exact Gaussian elimination with certificates.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::{Point, PolyError, Polynomial, Scalar, VarKey};

/// One row `sum coeffs[v] * v = constant`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LinearRow {
    pub coeffs: BTreeMap<VarKey, Scalar>,
    pub constant: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LinearSystem {
    pub rows: Vec<LinearRow>,
    /// Unknowns that must be reported even when no row mentions them.
    pub unknowns: Vec<VarKey>,
}

/// Multipliers `m` such that the combination `sum m_i * row_i` has all
/// variable coefficients zero and a nonzero constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCertificate {
    pub multipliers: Vec<Scalar>,
    pub constant: Scalar,
}

impl LinearCertificate {
    /// Checks `sum m_i p_i` is the nonzero constant recorded.
    pub fn verify_polys(&self, polys: &[Polynomial]) -> bool {
        if self.multipliers.len() != polys.len() || self.constant.is_zero() {
            return false;
        }
        let mut sum = Polynomial::zero();
        for (m, p) in self.multipliers.iter().zip(polys) {
            sum = &sum + &p.scale(m);
        }
        sum == Polynomial::constant(self.constant.clone())
    }

    /// Checks the combination of rows is `0 = constant` with constant nonzero.
    pub fn verify_system(&self, sys: &LinearSystem) -> bool {
        if self.multipliers.len() != sys.rows.len() || self.constant.is_zero() {
            return false;
        }
        let mut coeffs: BTreeMap<VarKey, Scalar> = BTreeMap::new();
        let mut constant = Scalar::zero();
        for (m, row) in self.multipliers.iter().zip(&sys.rows) {
            for (v, c) in &row.coeffs {
                *coeffs.entry(*v).or_insert_with(Scalar::zero) += m * c;
            }
            constant += m * &row.constant;
        }
        coeffs.values().all(Zero::is_zero) && constant == self.constant
    }
}

/// A solved linear system: every pivot variable equals a constant plus a
/// combination of free variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSolution {
    pub pivots: BTreeMap<VarKey, (Scalar, BTreeMap<VarKey, Scalar>)>,
    pub free: Vec<VarKey>,
}

impl LinearSolution {
    /// Pivot variables whose value does not depend on free variables.
    pub fn forced(&self) -> BTreeMap<VarKey, Scalar> {
        self.pivots.iter().filter(|(_, (_, deps))| deps.is_empty()).map(|(v, (c, _))| (*v, c.clone())).collect()
    }

    /// The solution with every free variable set by `value`.
    pub fn point_with<F: Fn(VarKey) -> Scalar>(&self, value: F) -> Point {
        let mut pt: Point = self.free.iter().map(|&v| (v, value(v))).collect();
        for (v, (c, deps)) in &self.pivots {
            let mut x = c.clone();
            for (w, k) in deps {
                x -= k * &pt[w];
            }
            pt.insert(*v, x);
        }
        pt
    }

    /// The solution with all free variables zero.
    pub fn witness(&self) -> Point {
        self.point_with(|_| Scalar::zero())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearOutcome {
    Inconsistent(LinearCertificate),
    Solved(LinearSolution),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Consistency {
    Consistent { witness: Point, free: Vec<VarKey> },
    Inconsistent(LinearCertificate),
}

struct Row {
    coeffs: Vec<Scalar>,
    rhs: Scalar,
    combo: Vec<Scalar>,
}

/// Gauss-Jordan over the given columns. Columns are eliminated from the
/// largest variable down.
fn eliminate(rows: Vec<(BTreeMap<VarKey, Scalar>, Scalar)>, columns: Vec<VarKey>) -> LinearOutcome {
    let n = rows.len();
    let index: BTreeMap<VarKey, usize> = columns.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut work: Vec<Row> = rows
        .into_iter()
        .enumerate()
        .map(|(i, (coeffs, rhs))| {
            let mut dense = alloc::vec![Scalar::zero(); columns.len()];
            for (v, c) in coeffs {
                dense[index[&v]] += c;
            }
            let mut combo = alloc::vec![Scalar::zero(); n];
            combo[i] = Scalar::one();
            Row { coeffs: dense, rhs, combo }
        })
        .collect();

    let mut pivot_of: Vec<(usize, usize)> = Vec::new();
    let mut next = 0;
    for col in (0..columns.len()).rev() {
        let Some(found) = (next..work.len()).find(|&r| !work[r].coeffs[col].is_zero()) else {
            continue;
        };
        work.swap(next, found);
        let inv = work[next].coeffs[col].recip();
        scale_row(&mut work[next], &inv);
        for r in 0..work.len() {
            if r != next && !work[r].coeffs[col].is_zero() {
                let factor = work[r].coeffs[col].clone();
                let (pivot, target) = pick_two(&mut work, next, r);
                sub_scaled(target, pivot, &factor);
            }
        }
        pivot_of.push((col, next));
        next += 1;
    }

    if let Some(row) = work[next..].iter().find(|r| !r.rhs.is_zero()) {
        // The combination reads 0 = rhs; as polynomials it sums to -rhs.
        return LinearOutcome::Inconsistent(LinearCertificate {
            multipliers: row.combo.clone(),
            constant: row.rhs.clone(),
        });
    }

    let pivot_cols: BTreeSet<usize> = pivot_of.iter().map(|&(c, _)| c).collect();
    let free: Vec<VarKey> = (0..columns.len()).filter(|c| !pivot_cols.contains(c)).map(|c| columns[c]).collect();
    let mut pivots = BTreeMap::new();
    for (col, r) in pivot_of {
        let row = &work[r];
        let deps = (0..columns.len())
            .filter(|&c| c != col && !row.coeffs[c].is_zero())
            .map(|c| (columns[c], row.coeffs[c].clone()))
            .collect();
        pivots.insert(columns[col], (row.rhs.clone(), deps));
    }
    LinearOutcome::Solved(LinearSolution { pivots, free })
}

fn scale_row(row: &mut Row, k: &Scalar) {
    for c in row.coeffs.iter_mut() {
        *c *= k;
    }
    row.rhs *= k;
    for c in row.combo.iter_mut() {
        *c *= k;
    }
}

fn sub_scaled(target: &mut Row, pivot: &Row, k: &Scalar) {
    for (t, p) in target.coeffs.iter_mut().zip(&pivot.coeffs) {
        if !p.is_zero() {
            *t -= k * p;
        }
    }
    target.rhs -= k * &pivot.rhs;
    for (t, p) in target.combo.iter_mut().zip(&pivot.combo) {
        if !p.is_zero() {
            *t -= k * p;
        }
    }
}

fn pick_two(rows: &mut [Row], a: usize, b: usize) -> (&Row, &mut Row) {
    if a < b {
        let (lo, hi) = rows.split_at_mut(b);
        (&lo[a], &mut hi[0])
    } else {
        let (lo, hi) = rows.split_at_mut(a);
        (&hi[0], &mut lo[b])
    }
}

/// Solves polynomials of total degree at most one. `vars` lists variables
/// that must appear in the answer even if no polynomial mentions them.
pub fn linear_triangulate(polys: &[Polynomial], vars: &[VarKey]) -> Result<LinearOutcome, PolyError> {
    let mut columns: BTreeSet<VarKey> = vars.iter().copied().collect();
    let mut rows = Vec::with_capacity(polys.len());
    for p in polys {
        let d = p.total_degree();
        if d > 1 {
            return Err(PolyError::Nonlinear(d));
        }
        let mut coeffs = BTreeMap::new();
        let mut constant = Scalar::zero();
        for (m, c) in p.terms() {
            match m.powers() {
                [] => constant = -c.clone(),
                [(v, 1)] => {
                    columns.insert(*v);
                    coeffs.insert(*v, c.clone());
                }
                _ => unreachable!("degree checked above"),
            }
        }
        rows.push((coeffs, constant));
    }
    Ok(match eliminate(rows, columns.into_iter().collect()) {
        // Rows stand for p = 0 with the constant moved right, so the
        // polynomial combination equals minus the row constant.
        LinearOutcome::Inconsistent(cert) => {
            LinearOutcome::Inconsistent(LinearCertificate { multipliers: cert.multipliers, constant: -cert.constant })
        }
        solved => solved,
    })
}

/// Decides a linear system exactly, with a witness when consistent.
pub fn solve_consistency(sys: &LinearSystem) -> Consistency {
    let mut columns: BTreeSet<VarKey> = sys.unknowns.iter().copied().collect();
    for row in &sys.rows {
        columns.extend(row.coeffs.keys().copied());
    }
    let rows = sys.rows.iter().map(|r| (r.coeffs.clone(), r.constant.clone())).collect();
    match eliminate(rows, columns.into_iter().collect()) {
        LinearOutcome::Inconsistent(cert) => Consistency::Inconsistent(cert),
        LinearOutcome::Solved(sol) => Consistency::Consistent { witness: sol.witness(), free: sol.free },
    }
}

impl LinearSystem {
    /// True iff `point` satisfies every row exactly.
    pub fn satisfied_by(&self, point: &Point) -> bool {
        self.rows.iter().all(|r| {
            let mut lhs = Scalar::zero();
            for (v, c) in &r.coeffs {
                match point.get(v) {
                    Some(x) => lhs += c * x,
                    None => return false,
                }
            }
            lhs == r.constant
        })
    }
}
