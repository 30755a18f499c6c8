//! Faces, intersection closure, the inclusion order and Bethe numbers.
//!
//! A [`Nerve`] is an intersection-closed set of faces (non-empty vertex sets)
//! together with the materialized inclusion order, the list of strict pairs
//! `(alpha, beta)` with `beta` strictly contained in `alpha`, and the integer
//! Bethe numbers `c_alpha` solving `sum over alpha containing beta of
//! c_alpha = 1` for every face `beta`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

pub type VertexId = u32;

/// A non-empty set of vertex ids, stored sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Face(Vec<VertexId>);

impl Face {
    /// Builds a face from any iterator of vertex ids. Duplicates collapse;
    /// an empty vertex set is rejected.
    pub fn new<I: IntoIterator<Item = VertexId>>(vertices: I) -> Result<Self> {
        let set: BTreeSet<VertexId> = vertices.into_iter().collect();
        if set.is_empty() {
            return Err(Error::EmptyFace);
        }
        Ok(Face(set.into_iter().collect()))
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Superset test: does `self` contain every vertex of `other`?
    pub fn contains(&self, other: &Face) -> bool {
        let mut it = self.0.iter();
        'outer: for v in &other.0 {
            for w in it.by_ref() {
                if w == v {
                    continue 'outer;
                }
                if w > v {
                    return false;
                }
            }
            return false;
        }
        true
    }

    /// Intersection of two faces, `None` when disjoint.
    pub fn intersection(&self, other: &Face) -> Option<Face> {
        let common: Vec<VertexId> = self
            .0
            .iter()
            .copied()
            .filter(|v| other.contains_vertex(*v))
            .collect();
        if common.is_empty() {
            None
        } else {
            Some(Face(common))
        }
    }

    /// Hyphen-joined vertex ids, e.g. `"0-2-3"`. Used as the face key in
    /// JSON documents.
    pub fn key(&self) -> String {
        self.0
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    pub fn parse_key(key: &str) -> Result<Self> {
        let ids: Vec<VertexId> = key
            .split('-')
            .map(|part| {
                part.parse::<VertexId>().map_err(|_| Error::BadFaceKey {
                    key: key.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        Face::new(ids)
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

/// An intersection-closed hypergraph with its inclusion order.
///
/// Faces are stored maximal-first: sorted by decreasing cardinality, ties
/// broken lexicographically. This is a linear extension of reverse
/// inclusion, so triangular recursions (Bethe numbers, Möbius inversion)
/// can run in a single pass over the stored order.
#[derive(Clone, Debug)]
pub struct Nerve {
    faces: Vec<Face>,
    index: HashMap<Face, usize>,
    // includes[a * n + b] is true iff faces[b] is a subset of faces[a]
    includes: Vec<bool>,
    pairs: Vec<(usize, usize)>,
    pair_index: HashMap<(usize, usize), usize>,
    bethe: Vec<i64>,
    // mobius[a * n + b] is the Möbius function of the inclusion poset on
    // the interval [faces[b], faces[a]]; zero unless faces[b] ⊆ faces[a]
    mobius: Vec<i64>,
}

impl Nerve {
    /// Smallest face set containing `input` and closed under pairwise
    /// non-empty intersection. Empty intersections are not faces.
    pub fn intersection_closure(input: &[Face]) -> Result<Self> {
        if input.is_empty() {
            return Err(Error::EmptyHypergraph);
        }
        let mut set: BTreeSet<Face> = input.iter().cloned().collect();
        loop {
            let mut fresh: Vec<Face> = Vec::new();
            for a in &set {
                for b in &set {
                    if let Some(c) = a.intersection(b) {
                        if !set.contains(&c) {
                            fresh.push(c);
                        }
                    }
                }
            }
            if fresh.is_empty() {
                break;
            }
            set.extend(fresh);
        }
        Ok(Self::build(set))
    }

    /// Builds a nerve from faces that are already closed under intersection;
    /// fails if some pairwise intersection is missing.
    pub fn new(faces: Vec<Face>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::EmptyHypergraph);
        }
        let set: BTreeSet<Face> = faces.into_iter().collect();
        for a in &set {
            for b in &set {
                if let Some(c) = a.intersection(b) {
                    if !set.contains(&c) {
                        return Err(Error::NotClosed { missing: c.key() });
                    }
                }
            }
        }
        Ok(Self::build(set))
    }

    fn build(set: BTreeSet<Face>) -> Self {
        let mut faces: Vec<Face> = set.into_iter().collect();
        faces.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        let n = faces.len();

        let index: HashMap<Face, usize> = faces
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i))
            .collect();

        let mut includes = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                includes[a * n + b] = faces[a].contains(&faces[b]);
            }
        }

        let mut pairs = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && includes[a * n + b] {
                    pairs.push((a, b));
                }
            }
        }
        let pair_index = pairs.iter().enumerate().map(|(p, &ab)| (ab, p)).collect();

        // c_alpha = 1 - sum of c over strict superfaces; superfaces always
        // precede alpha in the maximal-first order.
        let mut bethe = vec![0i64; n];
        for i in 0..n {
            let mut c = 1i64;
            for j in 0..i {
                if includes[j * n + i] {
                    c -= bethe[j];
                }
            }
            bethe[i] = c;
        }

        // Möbius function by the dual recursion mu(b, a) =
        // -sum over z in [b, a) of mu(b, z); intermediate faces are smaller
        // than a, hence already filled when iterating smallest-first.
        let mut mobius = vec![0i64; n * n];
        for a in (0..n).rev() {
            for b in 0..n {
                if !includes[a * n + b] {
                    continue;
                }
                if a == b {
                    mobius[a * n + b] = 1;
                } else {
                    let mut m = 0i64;
                    for z in (a + 1)..n {
                        if includes[a * n + z] && includes[z * n + b] {
                            m -= mobius[z * n + b];
                        }
                    }
                    mobius[a * n + b] = m;
                }
            }
        }

        Nerve {
            faces,
            index,
            includes,
            pairs,
            pair_index,
            bethe,
            mobius,
        }
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn face(&self, i: usize) -> &Face {
        &self.faces[i]
    }

    pub fn face_index(&self, face: &Face) -> Option<usize> {
        self.index.get(face).copied()
    }

    /// Whether `faces[b]` is a subset of `faces[a]`.
    pub fn includes(&self, a: usize, b: usize) -> bool {
        self.includes[a * self.faces.len() + b]
    }

    /// All strict inclusion pairs `(alpha, beta)` as face indices, in outer
    /// face order then inner face order.
    pub fn strict_pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Position of the strict pair `(a, b)` in [`strict_pairs`](Self::strict_pairs).
    pub fn pair_position(&self, a: usize, b: usize) -> Option<usize> {
        self.pair_index.get(&(a, b)).copied()
    }

    /// Möbius function of the inclusion poset on the interval
    /// `[faces[b], faces[a]]`; zero when `faces[b]` is not a subset.
    pub fn mobius_coefficient(&self, a: usize, b: usize) -> i64 {
        self.mobius[a * self.faces.len() + b]
    }

    /// Bethe numbers, aligned with `faces()`.
    pub fn bethe_numbers(&self) -> &[i64] {
        &self.bethe
    }

    pub fn bethe_number(&self, i: usize) -> i64 {
        self.bethe[i]
    }

    /// Sorted union of all face vertices (the global index set).
    pub fn vertices(&self) -> Vec<VertexId> {
        let set: BTreeSet<VertexId> = self
            .faces
            .iter()
            .flat_map(|f| f.vertices().iter().copied())
            .collect();
        set.into_iter().collect()
    }
}
