//! Presentations with known answers.
//!
//! [`realize_variety`] builds an algebra and a mast whose variety is a
//! given multilinear zero set. [`tiled_order_presentation`] builds the
//! quotient `O / pi O` of a tiled order from its exponent matrix; these
//! algebras have finite uniserial type.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::poly::{Scalar, VarKey};
use crate::presentation::{Presentation, PresentationError};
use crate::quiver::{Path, Quiver, QuiverError};
use crate::variety::MastContext;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("need at least one variable")]
    NoVariables,
    #[error("variable X{0} out of range")]
    VariableOutOfRange(usize),
    #[error("variable X{0} occurs squared in a monomial")]
    NotMultilinear(usize),
    #[error("exponent matrix must be square and nonempty")]
    NotSquare,
    #[error("diagonal entry {0} is not zero")]
    Diagonal(usize),
    #[error("entries ({i},{k}) exceed ({i},{j}) + ({j},{k})")]
    Triangle { i: usize, j: usize, k: usize },
    #[error("entries ({0},{1}) and ({1},{0}) are both zero")]
    NotBasic(usize, usize),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

/// Polynomials in `X_1..X_m` where no variable is squared. Each polynomial
/// maps a set of variable indices (sorted, 1-based) to its coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultilinearSystem {
    m: usize,
    polys: Vec<BTreeMap<Vec<usize>, Scalar>>,
}

impl MultilinearSystem {
    /// Terms are `(indices, coefficient)`; repeated indices are rejected.
    pub fn new(m: usize, polys: Vec<Vec<(Vec<usize>, Scalar)>>) -> Result<MultilinearSystem, GeneratorError> {
        if m == 0 {
            return Err(GeneratorError::NoVariables);
        }
        let mut out = Vec::new();
        for terms in polys {
            let mut f: BTreeMap<Vec<usize>, Scalar> = BTreeMap::new();
            for (mut set, c) in terms {
                set.sort_unstable();
                if let Some(&j) = set.iter().find(|&&j| j == 0 || j > m) {
                    return Err(GeneratorError::VariableOutOfRange(j));
                }
                if let Some(w) = set.windows(2).find(|w| w[0] == w[1]) {
                    return Err(GeneratorError::NotMultilinear(w[0]));
                }
                *f.entry(set).or_insert_with(Scalar::zero) += c;
            }
            f.retain(|_, c| !c.is_zero());
            out.push(f);
        }
        Ok(MultilinearSystem { m, polys: out })
    }

    pub fn var_count(&self) -> usize {
        self.m
    }

    pub fn polys(&self) -> &[BTreeMap<Vec<usize>, Scalar>] {
        &self.polys
    }

    /// Values of all polynomials at `x` (`x[j - 1]` is `X_j`).
    pub fn eval(&self, x: &[Scalar]) -> Vec<Scalar> {
        self.polys
            .iter()
            .map(|f| f.iter().map(|(set, c)| set.iter().fold(c.clone(), |acc, &j| acc * &x[j - 1])).sum())
            .collect()
    }

    pub fn vanishes_at(&self, x: &[Scalar]) -> bool {
        self.eval(x).iter().all(Zero::is_zero)
    }
}

/// An algebra and mast with `V_p` equal to a prescribed zero set.
#[derive(Clone, Debug)]
pub struct Realization {
    pub presentation: Presentation,
    pub mast: Path,
    /// `vars[j - 1]` is the coordinate playing the role of `X_j`.
    pub vars: Vec<VarKey>,
}

/// Vertices `0..=2m`; `g(j-1): 2j-2 -> 2j-1`, `a(j): 2j-1 -> 2j` and a loop
/// `b(j)` at `2j-1`. The mast is `a_m b_m g_(m-1) ... a_1 b_1 g_0`, and each
/// polynomial becomes the relation obtained by skipping `b_j` exactly for
/// the `j` in each monomial.
pub fn realize_variety(sys: &MultilinearSystem) -> Result<Realization, GeneratorError> {
    let m = sys.var_count();
    let vname = |i: usize| format!("{}", i);
    let mut arrows: Vec<(String, String, String)> = Vec::new();
    for j in 1..=m {
        arrows.push((format!("g{}", j - 1), vname(2 * j - 2), vname(2 * j - 1)));
        arrows.push((format!("a{}", j), vname(2 * j - 1), vname(2 * j)));
        arrows.push((format!("b{}", j), vname(2 * j - 1), vname(2 * j - 1)));
    }
    let q = Quiver::new((0..=2 * m).map(vname), arrows)?;
    let id = |n: String| q.arrow_id(&n).expect("arrow was just added");
    let word = |skip: &dyn Fn(usize) -> bool| {
        let mut w = Vec::new();
        for j in 1..=m {
            w.push(id(format!("g{}", j - 1)));
            if !skip(j) {
                w.push(id(format!("b{}", j)));
            }
            w.push(id(format!("a{}", j)));
        }
        q.path(&w).expect("composable by construction")
    };
    let mast = word(&|_| false);
    let mut raw: Vec<Vec<(Scalar, Path)>> = Vec::new();
    for f in sys.polys() {
        raw.push(f.iter().map(|(set, c)| (c.clone(), word(&|j| set.contains(&j)))).collect());
    }
    for j in 1..=m {
        let b = id(format!("b{}", j));
        raw.push(alloc::vec![(Scalar::one(), q.path(&[b, b]).expect("loop"))]);
    }
    let raw: Vec<Vec<(Scalar, Path)>> = raw.into_iter().filter(|r| !r.is_empty()).collect();
    let alphas: Vec<_> = (1..=m).map(|j| id(format!("a{}", j))).collect();
    let presentation = Presentation::new(q, raw, Some(3 * m + 1))?;
    let ctx = MastContext::new(presentation.quiver(), &mast).expect("positive length");
    let vars = (1..=m).map(|j| ctx.detour(alphas[j - 1], 3 * j - 2).expect("detour exists").var(1)).collect();
    Ok(Realization { presentation, mast, vars })
}

/// `n x n` nonnegative integers, zero on the diagonal, satisfying
/// `l[i][j] + l[j][k] >= l[i][k]` and `l[i][j] + l[j][i] >= 1` for `i != j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentMatrix {
    entries: Vec<Vec<u32>>,
}

impl ExponentMatrix {
    pub fn new(entries: Vec<Vec<u32>>) -> Result<ExponentMatrix, GeneratorError> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(GeneratorError::NotSquare);
        }
        for i in 0..n {
            if entries[i][i] != 0 {
                return Err(GeneratorError::Diagonal(i + 1));
            }
            for j in 0..n {
                if i != j && entries[i][j] + entries[j][i] == 0 {
                    return Err(GeneratorError::NotBasic(i + 1, j + 1));
                }
                for k in 0..n {
                    if entries[i][j] + entries[j][k] < entries[i][k] {
                        return Err(GeneratorError::Triangle { i: i + 1, j: j + 1, k: k + 1 });
                    }
                }
            }
        }
        Ok(ExponentMatrix { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i][j]
    }

    /// `l[i][j]` does not split as `l[i][k] + l[k][j]` through another vertex.
    pub fn is_irreducible(&self, i: usize, j: usize) -> bool {
        i != j && (0..self.n()).filter(|&k| k != i && k != j).all(|k| self.get(i, j) < self.get(i, k) + self.get(k, j))
    }
}

/// Vertices `1..n`, an arrow `i -> j` named `t<i>_<j>` for each irreducible
/// entry, and relations comparing path values: a path is zero when its
/// value exceeds the entry for its endpoints, and nonzero parallel paths
/// are equal.
pub fn tiled_order_presentation(lam: &ExponentMatrix) -> Result<Presentation, GeneratorError> {
    let n = lam.n();
    let vname = |i: usize| format!("{}", i + 1);
    let mut arrows = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if lam.is_irreducible(i, j) {
                arrows.push((format!("t{}_{}", i + 1, j + 1), vname(i), vname(j)));
            }
        }
    }
    let q = Quiver::new((0..n).map(vname), arrows)?;
    let index = |v: crate::quiver::VertexId| q.vertex_name(v).parse::<usize>().expect("numeric name") - 1;
    let value = |p: &Path| -> u32 {
        p.arrows().iter().map(|&a| lam.get(index(q.arrow(a).source), index(q.arrow(a).target))).sum()
    };
    let target_value = |p: &Path| lam.get(index(p.source()), index(p.target()));
    // Nonzero paths repeat no vertex, so J^n = 0.
    let loewy = n.max(2);
    let mut zero_minimal: Vec<Path> = Vec::new();
    let mut nonzero: BTreeMap<(usize, usize), Vec<Path>> = BTreeMap::new();
    for v in q.vertex_ids() {
        q.walk_paths_from(v, loewy, |p| {
            if p.len() < 2 {
                return true;
            }
            if value(p) > target_value(p) {
                zero_minimal.push(p.clone());
                return false;
            }
            nonzero.entry((index(p.source()), index(p.target()))).or_default().push(p.clone());
            true
        });
    }
    let mut raw: Vec<Vec<(Scalar, Path)>> = zero_minimal.into_iter().map(|p| alloc::vec![(Scalar::one(), p)]).collect();
    for paths in nonzero.values_mut() {
        paths.sort();
        for p in &paths[1..] {
            raw.push(alloc::vec![(Scalar::one(), p.clone()), (-Scalar::one(), paths[0].clone())]);
        }
    }
    Ok(Presentation::new(q, raw, Some(loewy))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decide::{decide_algebra, AlgebraStatus, DecideOptions};
    use crate::fibers::{grid_points, int_range};
    use crate::poly::{int, Point, SolveBudget};
    use crate::variety::variety;
    use alloc::vec;

    fn zero_set_matches(sys: &MultilinearSystem) {
        let r = realize_variety(sys).unwrap();
        let v = variety(&r.presentation, &r.mast, &SolveBudget::default()).unwrap();
        assert_eq!(v.ctx.vars, {
            let mut s = r.vars.clone();
            s.sort();
            s
        });
        let grid = int_range(-2, 2);
        let on_grid = grid_points(&v, &grid, 10_000).unwrap();
        let mut expected = Vec::new();
        let m = sys.var_count();
        for n in 0..grid.len().pow(m as u32) {
            let mut rest = n;
            let mut x = vec![int(0); m];
            for slot in x.iter_mut().rev() {
                *slot = grid[rest % grid.len()].clone();
                rest /= grid.len();
            }
            if sys.vanishes_at(&x) {
                let pt: Point = r.vars.iter().zip(x).map(|(v, c)| (*v, c)).collect();
                expected.push(pt);
            }
        }
        expected.sort_by(|a, b| a.values().cmp(b.values()));
        assert_eq!(on_grid, expected);
    }

    #[test]
    fn realize_hyperbola() {
        let sys = MultilinearSystem::new(2, vec![vec![(vec![1, 2], int(1)), (vec![], int(-1))]]).unwrap();
        zero_set_matches(&sys);
    }

    #[test]
    fn realize_affine_plane_and_point() {
        zero_set_matches(&MultilinearSystem::new(2, vec![]).unwrap());
        let sys = MultilinearSystem::new(1, vec![vec![(vec![1], int(1))]]).unwrap();
        zero_set_matches(&sys);
        let r = realize_variety(&sys).unwrap();
        let ctx = MastContext::new(r.presentation.quiver(), &r.mast).unwrap();
        assert!(ctx.source_cycles().is_empty());
    }

    #[test]
    fn rejects_squares() {
        let err = MultilinearSystem::new(2, vec![vec![(vec![1, 1], int(1))]]).unwrap_err();
        assert_eq!(err, GeneratorError::NotMultilinear(1));
        assert_eq!(MultilinearSystem::new(0, vec![]).unwrap_err(), GeneratorError::NoVariables);
    }

    #[test]
    fn exponent_matrix_checks() {
        assert!(ExponentMatrix::new(vec![vec![0, 0], vec![1, 0]]).is_ok());
        assert_eq!(ExponentMatrix::new(vec![vec![1]]).unwrap_err(), GeneratorError::Diagonal(1));
        assert_eq!(ExponentMatrix::new(vec![vec![0, 0], vec![0, 0]]).unwrap_err(), GeneratorError::NotBasic(1, 2));
        let bad = vec![vec![0, 0, 3], vec![1, 0, 0], vec![1, 1, 0]];
        assert!(matches!(ExponentMatrix::new(bad).unwrap_err(), GeneratorError::Triangle { .. }));
    }

    #[test]
    fn tiled_examples() {
        for entries in [vec![vec![0]], vec![vec![0, 0], vec![1, 0]], vec![vec![0, 0, 0], vec![1, 0, 0], vec![1, 1, 0]]]
        {
            let lam = ExponentMatrix::new(entries).unwrap();
            let p = tiled_order_presentation(&lam).unwrap();
            let v = decide_algebra(&p, &DecideOptions::default());
            assert_eq!(v.status, AlgebraStatus::FiniteType);
            for m in &v.masts {
                let mut seen = m.mast.vertices().to_vec();
                seen.sort();
                seen.dedup();
                assert_eq!(seen.len(), m.mast.len() + 1);
            }
        }
        let lam = ExponentMatrix::new(vec![vec![0, 0, 0], vec![1, 0, 0], vec![1, 1, 0]]).unwrap();
        let p = tiled_order_presentation(&lam).unwrap();
        let names: Vec<&str> = p.quiver().arrow_ids().map(|a| p.quiver().arrow_name(a)).collect();
        assert_eq!(names, vec!["t1_2", "t2_3", "t3_1"]);
        assert_eq!(p.loewy(), 3);
    }
}
