//! Vertices, arrows and paths.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::Range;

use thiserror::Error;

/// Index of a vertex in a [`Quiver`]. Vertices are kept sorted by name, so
/// comparing ids compares names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

/// Index of an arrow in a [`Quiver`], ordered like the arrow names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArrowId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub source: VertexId,
    pub target: VertexId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuiverError {
    #[error("a quiver needs at least one vertex")]
    NoVertices,
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate arrow `{0}`")]
    DuplicateArrow(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown arrow `{0}`")]
    UnknownArrow(String),
    #[error("cannot compose: `{after}` starts at `{found}` but the path before it ends at `{expected}`")]
    Composition { after: String, expected: String, found: String },
    #[error("empty path text")]
    EmptyPath,
}

/// A path, stored in application order.
///
/// `vertices` lists the vertices touched, so a path of length `l` has
/// `l + 1` of them and a trivial path records only its base vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    vertices: Vec<VertexId>,
    arrows: Vec<ArrowId>,
}

#[allow(clippy::len_without_is_empty)]
impl Path {
    pub fn trivial(v: VertexId) -> Path {
        Path { vertices: alloc::vec![v], arrows: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn source(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn target(&self) -> VertexId {
        self.vertices[self.vertices.len() - 1]
    }

    /// Arrows in application order.
    pub fn arrows(&self) -> &[ArrowId] {
        &self.arrows
    }

    /// The vertex sequence `e(0), ..., e(l)`.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// Vertex reached after applying the first `s` arrows.
    pub fn vertex(&self, s: usize) -> VertexId {
        self.vertices[s]
    }

    /// First-applied arrow (the rightmost one in composition order).
    pub fn first_arrow(&self) -> Option<ArrowId> {
        self.arrows.first().copied()
    }

    /// Last-applied arrow (the leftmost one in composition order).
    pub fn last_arrow(&self) -> Option<ArrowId> {
        self.arrows.last().copied()
    }

    /// The right subpath of length `k`: the first `k` arrows applied.
    pub fn right_subpath(&self, k: usize) -> Path {
        self.segment(0, k)
    }

    /// The left subpath of length `k`: the last `k` arrows applied.
    pub fn left_subpath(&self, k: usize) -> Path {
        let l = self.len();
        self.segment(l - k, l)
    }

    /// Arrows `from..to` (application positions) as a path.
    pub fn segment(&self, from: usize, to: usize) -> Path {
        assert!(from <= to && to <= self.len(), "segment out of range");
        Path { vertices: self.vertices[from..=to].to_vec(), arrows: self.arrows[from..to].to_vec() }
    }

    /// All right subpaths in increasing length, starting with the trivial path.
    pub fn right_subpaths(&self) -> Vec<Path> {
        (0..=self.len()).map(|k| self.right_subpath(k)).collect()
    }

    pub fn is_right_subpath_of(&self, p: &Path) -> bool {
        self.len() <= p.len()
            && p.vertices[..self.vertices.len()] == self.vertices[..]
            && p.arrows[..self.len()] == self.arrows[..]
    }

    pub fn is_left_subpath_of(&self, p: &Path) -> bool {
        let off = match p.len().checked_sub(self.len()) {
            Some(off) => off,
            None => return false,
        };
        p.vertices[off..] == self.vertices[..] && p.arrows[off..] == self.arrows[..]
    }

    pub fn is_subpath_of(&self, p: &Path) -> bool {
        self.occurrences_in(p).next().is_some()
    }

    /// Start positions at which `self` occurs as a subpath of `p`.
    pub fn occurrences_in<'a>(&'a self, p: &'a Path) -> impl Iterator<Item = usize> + 'a {
        let n = self.len();
        let last = p.len().checked_sub(n);
        (0..last.map_or(0, |x| x + 1))
            .filter(move |&s| p.vertices[s..=s + n] == self.vertices[..] && p.arrows[s..s + n] == self.arrows[..])
    }

    /// `q after self`. Fails when `q` does not start where `self` ends.
    pub fn then(&self, q: &Path) -> Option<Path> {
        if q.source() != self.target() {
            return None;
        }
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&q.vertices[1..]);
        let mut arrows = self.arrows.clone();
        arrows.extend_from_slice(&q.arrows);
        Some(Path { vertices, arrows })
    }

    /// Same arrows in reverse order, read in the opposite quiver.
    pub fn reversed(&self) -> Path {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        let mut arrows = self.arrows.clone();
        arrows.reverse();
        Path { vertices, arrows }
    }
}

impl Ord for Path {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.arrows.cmp(&other.arrows))
            .then_with(|| self.vertices.cmp(&other.vertices))
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A finite quiver with vertices and arrows sorted by name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quiver {
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
    outgoing: Vec<Vec<ArrowId>>,
}

impl Quiver {
    /// Builds a quiver from vertex names and `(name, source, target)` triples.
    pub fn new<V, A>(vertices: V, arrows: A) -> Result<Quiver, QuiverError>
    where
        V: IntoIterator,
        V::Item: Into<String>,
        A: IntoIterator<Item = (String, String, String)>,
    {
        let mut names: Vec<String> = vertices.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(QuiverError::NoVertices);
        }
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(QuiverError::DuplicateVertex(w[0].clone()));
        }
        let lookup = |n: &str| {
            names
                .binary_search_by(|x| x.as_str().cmp(n))
                .map(VertexId)
                .map_err(|_| QuiverError::UnknownVertex(n.to_string()))
        };
        let mut list = Vec::new();
        for (name, s, t) in arrows {
            let source = lookup(&s)?;
            let target = lookup(&t)?;
            list.push(Arrow { name, source, target });
        }
        list.sort_by(|a, b| a.name.cmp(&b.name));
        if let Some(w) = list.windows(2).find(|w| w[0].name == w[1].name) {
            return Err(QuiverError::DuplicateArrow(w[0].name.clone()));
        }
        let mut outgoing = alloc::vec![Vec::new(); names.len()];
        for (i, a) in list.iter().enumerate() {
            outgoing[a.source.0].push(ArrowId(i));
        }
        Ok(Quiver { vertices: names, arrows: list, outgoing })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn arrow_ids(&self) -> impl Iterator<Item = ArrowId> {
        (0..self.arrows.len()).map(ArrowId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.0]
    }

    pub fn arrow(&self, a: ArrowId) -> &Arrow {
        &self.arrows[a.0]
    }

    pub fn arrow_name(&self, a: ArrowId) -> &str {
        &self.arrows[a.0].name
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.vertices.binary_search_by(|x| x.as_str().cmp(name)).ok().map(VertexId)
    }

    pub fn arrow_id(&self, name: &str) -> Option<ArrowId> {
        self.arrows.binary_search_by(|a| a.name.as_str().cmp(name)).ok().map(ArrowId)
    }

    /// Arrows leaving `v`, in name order.
    pub fn arrows_from(&self, v: VertexId) -> &[ArrowId] {
        &self.outgoing[v.0]
    }

    /// The length-one path along `a`.
    pub fn arrow_path(&self, a: ArrowId) -> Path {
        let arrow = &self.arrows[a.0];
        Path { vertices: alloc::vec![arrow.source, arrow.target], arrows: alloc::vec![a] }
    }

    /// Builds a path from arrows given in application order.
    pub fn path(&self, arrows: &[ArrowId]) -> Result<Path, QuiverError> {
        let first = arrows.first().ok_or(QuiverError::EmptyPath)?;
        let mut p = Path::trivial(self.arrow(*first).source);
        for &a in arrows {
            p = self.extend(&p, a)?;
        }
        Ok(p)
    }

    /// `a after p`.
    pub fn extend(&self, p: &Path, a: ArrowId) -> Result<Path, QuiverError> {
        let arrow = self.arrow(a);
        if arrow.source != p.target() {
            return Err(QuiverError::Composition {
                after: arrow.name.clone(),
                expected: self.vertex_name(p.target()).to_string(),
                found: self.vertex_name(arrow.source).to_string(),
            });
        }
        let mut q = p.clone();
        q.vertices.push(arrow.target);
        q.arrows.push(a);
        Ok(q)
    }

    /// `q after p`.
    pub fn compose(&self, q: &Path, p: &Path) -> Result<Path, QuiverError> {
        p.then(q).ok_or_else(|| QuiverError::Composition {
            after: self.display(q),
            expected: self.vertex_name(p.target()).to_string(),
            found: self.vertex_name(q.source()).to_string(),
        })
    }

    /// Parses a path written in composition order, e.g. `g b1 a` for "a,
    /// then b1, then g". A single token `e_<vertex>` is the trivial path.
    pub fn parse_path(&self, text: &str) -> Result<Path, QuiverError> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(QuiverError::EmptyPath);
        }
        if tokens.len() == 1 && self.arrow_id(tokens[0]).is_none() {
            if let Some(v) = tokens[0].strip_prefix("e_").and_then(|n| self.vertex_id(n)) {
                return Ok(Path::trivial(v));
            }
        }
        let mut ids = Vec::with_capacity(tokens.len());
        for t in tokens.iter().rev() {
            ids.push(self.arrow_id(t).ok_or_else(|| QuiverError::UnknownArrow(t.to_string()))?);
        }
        self.path(&ids)
    }

    /// Renders a path in composition order, arrow names separated by spaces.
    pub fn display(&self, p: &Path) -> String {
        if p.is_trivial() {
            let mut s = String::from("e_");
            s.push_str(self.vertex_name(p.source()));
            return s;
        }
        let mut s = String::new();
        for (i, a) in p.arrows.iter().rev().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(self.arrow_name(*a));
        }
        s
    }

    pub fn has_double_arrows(&self) -> bool {
        let mut ends: Vec<(VertexId, VertexId)> = self.arrows.iter().map(|a| (a.source, a.target)).collect();
        ends.sort();
        ends.windows(2).any(|w| w[0] == w[1])
    }

    pub fn is_acyclic(&self) -> bool {
        // Kahn's algorithm; loops count as cycles.
        let n = self.vertices.len();
        let mut indegree = alloc::vec![0usize; n];
        for a in &self.arrows {
            indegree[a.target.0] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for &a in &self.outgoing[v] {
                let t = self.arrows[a.0].target.0;
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    stack.push(t);
                }
            }
        }
        seen == n
    }

    /// Calls `visit` on every path starting at `from` with length `< max_len`
    /// (trivial path included), pruning a branch when `visit` returns false.
    pub fn walk_paths_from<F>(&self, from: VertexId, max_len: usize, mut visit: F)
    where
        F: FnMut(&Path) -> bool,
    {
        fn go<F: FnMut(&Path) -> bool>(q: &Quiver, p: &mut Path, max_len: usize, visit: &mut F) {
            if !visit(p) || p.len() + 1 >= max_len {
                return;
            }
            let t = p.target();
            for &a in &q.outgoing[t.0] {
                p.arrows.push(a);
                p.vertices.push(q.arrows[a.0].target);
                go(q, p, max_len, visit);
                p.arrows.pop();
                p.vertices.pop();
            }
        }
        if max_len == 0 {
            return;
        }
        let mut p = Path::trivial(from);
        go(self, &mut p, max_len, &mut visit);
    }

    /// All paths `from -> to` whose length lies in `lengths`, sorted by
    /// length and then by arrow names in application order.
    pub fn enumerate_paths(&self, from: VertexId, to: VertexId, lengths: Range<usize>) -> Vec<Path> {
        let mut out = Vec::new();
        self.walk_paths_from(from, lengths.end, |p| {
            if p.target() == to && lengths.contains(&p.len()) {
                out.push(p.clone());
            }
            true
        });
        out.sort();
        out
    }

    /// All cycles at `e` of length at most `maxlen`, the trivial one included.
    pub fn cycles_at(&self, e: VertexId, maxlen: usize) -> Vec<Path> {
        self.enumerate_paths(e, e, 0..maxlen + 1)
    }

    /// The quiver with every arrow reversed; names are kept.
    pub fn opposite(&self) -> Quiver {
        let arrows = self
            .arrows
            .iter()
            .map(|a| (a.name.clone(), self.vertices[a.target.0].clone(), self.vertices[a.source.0].clone()))
            .collect::<Vec<_>>();
        Quiver::new(self.vertices.clone(), arrows).expect("reversing a valid quiver keeps it valid")
    }

    /// Reverses a path of this quiver into the opposite quiver.
    pub fn opposite_path(&self, p: &Path) -> Path {
        p.reversed()
    }
}

/// Displays a path with its quiver.
pub struct PathDisplay<'a>(pub &'a Quiver, pub &'a Path);

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.display(self.1))
    }
}
