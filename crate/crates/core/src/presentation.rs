//! Algebras `KQ/I` given by a quiver, relations and a nilpotency bound.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;
use thiserror::Error;

use crate::poly::Scalar;
use crate::quiver::{Path, Quiver, QuiverError};

/// Longest path the bound computation for monomial input will follow
/// before declaring the quotient infinite-dimensional.
pub const MAX_COMPUTED_LOEWY: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error("relation {relation}: terms `{first}` and `{other}` are not parallel")]
    NotParallel { relation: usize, first: String, other: String },
    #[error("relation {relation}: term `{path}` has length {len}, relations need length at least 2")]
    ShortTerm { relation: usize, path: String, len: usize },
    #[error("relation {0} has no terms")]
    EmptyRelation(usize),
    #[error("loewy bound must be at least 2, got {0}")]
    LoewyTooSmall(usize),
    #[error("non-monomial relations need an explicit `loewy:` bound")]
    MissingLoewy,
    #[error("the monomial relations leave paths of length {0} or more; the algebra is not finite-dimensional")]
    Unbounded(usize),
    #[error("operation needs a monomial presentation")]
    NotMonomial,
}

/// A linear combination of parallel paths of length at least 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    terms: Vec<(Scalar, Path)>,
}

impl Relation {
    /// Terms sorted by path, nonzero coefficients, no repeated path.
    pub fn terms(&self) -> &[(Scalar, Path)] {
        &self.terms
    }

    pub fn source(&self) -> crate::quiver::VertexId {
        self.terms[0].1.source()
    }

    pub fn target(&self) -> crate::quiver::VertexId {
        self.terms[0].1.target()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// Renders `c1*p1 + c2*p2` in composition order; unit coefficients are
    /// omitted.
    pub fn render(&self, q: &Quiver) -> String {
        let mut s = String::new();
        for (i, (c, p)) in self.terms.iter().enumerate() {
            let negative = c < &Scalar::zero();
            let abs = if negative { -c.clone() } else { c.clone() };
            match (i, negative) {
                (0, true) => s.push('-'),
                (0, false) => {}
                (_, true) => s.push_str(" - "),
                (_, false) => s.push_str(" + "),
            }
            if abs != Scalar::from_integer(1.into()) {
                s.push_str(&format!("{}*", abs));
            }
            s.push_str(&q.display(p));
        }
        s
    }
}

/// `KQ/I` where `I` is generated by the relations together with all paths
/// of length at least `loewy`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    quiver: Quiver,
    relations: Vec<Relation>,
    loewy: usize,
    warnings: Vec<String>,
}

impl Presentation {
    /// Validates raw relations. Zero coefficients and repeated paths are
    /// merged away; terms of length `>= loewy` are dropped with a warning.
    /// Without `loewy`, monomial input gets `1 +` the length of the longest
    /// path avoiding every generator.
    pub fn new(
        quiver: Quiver,
        raw: Vec<Vec<(Scalar, Path)>>,
        loewy: Option<usize>,
    ) -> Result<Presentation, PresentationError> {
        if let Some(l) = loewy {
            if l < 2 {
                return Err(PresentationError::LoewyTooSmall(l));
            }
        }
        let mut warnings = Vec::new();
        let mut merged = Vec::with_capacity(raw.len());
        for (idx, terms) in raw.into_iter().enumerate() {
            let number = idx + 1;
            let Some((_, first)) = terms.first() else {
                return Err(PresentationError::EmptyRelation(number));
            };
            let first = first.clone();
            let mut by_path: BTreeMap<Path, Scalar> = BTreeMap::new();
            for (c, p) in terms {
                if p.len() < 2 {
                    return Err(PresentationError::ShortTerm {
                        relation: number,
                        path: quiver.display(&p),
                        len: p.len(),
                    });
                }
                if p.source() != first.source() || p.target() != first.target() {
                    return Err(PresentationError::NotParallel {
                        relation: number,
                        first: quiver.display(&first),
                        other: quiver.display(&p),
                    });
                }
                *by_path.entry(p).or_insert_with(Scalar::zero) += c;
            }
            by_path.retain(|_, c| !c.is_zero());
            merged.push((number, by_path));
        }

        let monomial_before_bound = merged.iter().all(|(_, t)| t.len() <= 1);
        let loewy = match loewy {
            Some(l) => l,
            None if monomial_before_bound => {
                let gens: Vec<Path> = merged.iter().flat_map(|(_, t)| t.keys().cloned()).collect();
                computed_loewy(&quiver, &gens)?
            }
            None => return Err(PresentationError::MissingLoewy),
        };

        let mut relations = Vec::new();
        for (number, mut terms) in merged {
            let long: Vec<Path> = terms.keys().filter(|p| p.len() >= loewy).cloned().collect();
            for p in &long {
                warnings.push(format!(
                    "relation {}: dropped term `{}` of length {} >= loewy bound {}",
                    number,
                    quiver.display(p),
                    p.len(),
                    loewy
                ));
                terms.remove(p);
            }
            if terms.is_empty() {
                warnings.push(format!("relation {} is implied by the loewy bound and was dropped", number));
                continue;
            }
            relations.push(Relation { terms: terms.into_iter().map(|(p, c)| (c, p)).collect() });
        }
        Ok(Presentation { quiver, relations, loewy, warnings })
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    /// Every path of length `>= loewy()` lies in the ideal.
    pub fn loewy(&self) -> usize {
        self.loewy
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn is_monomial(&self) -> bool {
        self.relations.iter().all(Relation::is_monomial)
    }

    /// Generator paths of a monomial presentation.
    pub fn monomial_generators(&self) -> Result<Vec<&Path>, PresentationError> {
        if !self.is_monomial() {
            return Err(PresentationError::NotMonomial);
        }
        Ok(self.relations.iter().map(|r| &r.terms[0].1).collect())
    }

    /// Exact ideal membership for monomial presentations.
    pub fn monomial_contains(&self, q: &Path) -> Result<bool, PresentationError> {
        let gens = self.monomial_generators()?;
        Ok(q.len() >= self.loewy || gens.iter().any(|g| g.is_subpath_of(q)))
    }

    /// Paths of length `<= min(maxlen, loewy - 1)` outside the ideal, sorted.
    pub fn nonzero_paths(&self, maxlen: usize) -> Result<Vec<Path>, PresentationError> {
        let gens = self.monomial_generators()?;
        let bound = maxlen.min(self.loewy - 1) + 1;
        let mut out = Vec::new();
        for v in self.quiver.vertex_ids() {
            self.quiver.walk_paths_from(v, bound, |p| {
                // Only subpaths ending at the newest arrow can be new.
                if gens.iter().any(|g| g.is_left_subpath_of(p)) {
                    return false;
                }
                out.push(p.clone());
                true
            });
        }
        out.sort();
        Ok(out)
    }

    /// The presentation of the opposite algebra: arrows and every relation
    /// path reversed, arrow names and the bound kept.
    pub fn opposite(&self) -> Presentation {
        let quiver = self.quiver.opposite();
        let relations = self
            .relations
            .iter()
            .map(|r| {
                let mut terms: Vec<(Scalar, Path)> =
                    r.terms.iter().map(|(c, p)| (c.clone(), self.quiver.opposite_path(p))).collect();
                terms.sort_by(|a, b| a.1.cmp(&b.1));
                Relation { terms }
            })
            .collect();
        Presentation { quiver, relations, loewy: self.loewy, warnings: Vec::new() }
    }
}

fn computed_loewy(quiver: &Quiver, gens: &[Path]) -> Result<usize, PresentationError> {
    let mut longest = 0;
    let mut unbounded = false;
    for v in quiver.vertex_ids() {
        quiver.walk_paths_from(v, MAX_COMPUTED_LOEWY + 1, |p| {
            if gens.iter().any(|g| g.is_left_subpath_of(p)) {
                return false;
            }
            longest = longest.max(p.len());
            if p.len() == MAX_COMPUTED_LOEWY {
                unbounded = true;
            }
            !unbounded
        });
        if unbounded {
            return Err(PresentationError::Unbounded(MAX_COMPUTED_LOEWY));
        }
    }
    Ok((longest + 1).max(2))
}
