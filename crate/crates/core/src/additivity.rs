//! Valid triples, the additive set `E(π, P_q)` and its maximal elements.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{Complex, Face, FaceKind, GridPoint};
use crate::plf::PLFunction;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Triple {
    pub i: Face,
    pub j: Face,
    pub k: Face,
}

impl Triple {
    /// Builds a triple, returning `None` unless it is valid in `cx`.
    pub fn new(cx: &Complex, i: Face, j: Face, k: Face) -> Option<Triple> {
        is_valid_triple(cx, i, j, k).then_some(Triple { i, j, k })
    }

    pub fn faces(&self) -> [Face; 3] {
        [self.i, self.j, self.k]
    }

    pub fn swapped(&self) -> Triple {
        Triple {
            i: self.j,
            j: self.i,
            k: self.k,
        }
    }

    /// Componentwise face inclusion `self ⊆ other`.
    pub fn included_in(&self, cx: &Complex, other: &Triple) -> bool {
        cx.face_contains(other.i, self.i)
            && cx.face_contains(other.j, self.j)
            && cx.face_contains(other.k, self.k)
    }
}

impl std::fmt::Display for Triple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.i, self.j, self.k)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditiveSet {
    pub q: u32,
    /// All additive valid triples, sorted.
    pub triples: Vec<Triple>,
    /// Indices into `triples` of the maximal ones.
    pub maximal: Vec<usize>,
}

impl AdditiveSet {
    pub fn maximal_triples(&self) -> impl Iterator<Item = &Triple> + '_ {
        self.maximal.iter().map(move |&m| &self.triples[m])
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.binary_search(t).is_ok()
    }
}

/// `K ⊆ I ⊕ J`, `I ⊆ K ⊖ J` and `J ⊆ K ⊖ I`.
pub fn is_valid_triple(cx: &Complex, i: Face, j: Face, k: Face) -> bool {
    let (bi, bj, bk) = (cx.bounds(i, 1), cx.bounds(j, 1), cx.bounds(k, 1));
    cx.region_contains(&bi.add(&bj), k)
        && cx.region_contains(&bk.sub(&bj), i)
        && cx.region_contains(&bk.sub(&bi), j)
}

/// Lattice pairs `(u, v)` at resolution `n` with `u ∈ I`, `v ∈ J` and
/// `u ⊕ v ∈ K`.
pub fn triple_grid_pairs(cx: &Complex, t: &Triple, n: u32) -> Vec<(GridPoint, GridPoint)> {
    let us = cx.grid_points_in_face(t.i, n);
    let vs = cx.grid_points_in_face(t.j, n);
    let mut out = Vec::new();
    for u in &us {
        for v in &vs {
            if cx.contains_grid_point(t.k, u.oplus(v)) {
                out.push((*u, *v));
            }
        }
    }
    out
}

/// `Δπ ≡ 0` on `F(I, J, K)`, tested on every `(1/(4q))`-lattice pair of
/// `F`. `π` must be piecewise linear over `P_q` (any stored resolution).
pub fn is_additive_triple<S: Scalar>(pi: &PLFunction<S>, t: &Triple) -> bool {
    let cx = Complex::new(pi.q());
    triple_grid_pairs(&cx, t, 4).into_iter().all(|(u, v)| {
        let d = pi.eval_grid(u) + pi.eval_grid(v) - pi.eval_grid(u.oplus(&v));
        d.is_zero()
    })
}

/// Valid `(kind_K, offset)` completions for anchor-zero `I` and `J` of the
/// given kinds. Validity is invariant under lattice translation, so a
/// triple `(I + a, J + b, K)` is valid iff `K - a - b` is in this list.
fn valid_patterns(cx: &Complex) -> HashMap<(FaceKind, FaceKind), Vec<Face>> {
    let mut out = HashMap::new();
    for ki in FaceKind::ALL {
        for kj in FaceKind::ALL {
            let i = cx.face(ki, 0, 0);
            let j = cx.face(kj, 0, 0);
            let ks: Vec<Face> = cx
                .minkowski_sum_faces(i, j)
                .into_iter()
                .filter(|&k| is_valid_triple(cx, i, j, k))
                .collect();
            out.insert((ki, kj), ks);
        }
    }
    out
}

/// Enumerates `E(π, P_q)` for `π` stored at resolution 1.
///
/// Every vertex of `F(I, J, K)` lies on the `(1/q)`-lattice and `Δπ` is
/// affine on `F`, so additivity is decided exactly by the lattice pairs of
/// resolution 1.
pub fn enumerate_e<S: Scalar>(pi: &PLFunction<S>) -> AdditiveSet {
    assert_eq!(
        pi.n(),
        1,
        "enumerate_e expects a function on the (1/q)-lattice"
    );
    let q = pi.q();
    let cx = Complex::new(q);
    let patterns = valid_patterns(&cx);
    let faces: Vec<Face> = cx.faces().collect();
    let vertices: Vec<Vec<GridPoint>> = faces
        .iter()
        .map(|&f| cx.grid_points_in_face(f, 1))
        .collect();

    let triples: Vec<Triple> = faces
        .par_iter()
        .flat_map_iter(|&fi| {
            let cx = &cx;
            let patterns = &patterns;
            let vertices = &vertices;
            faces.iter().flat_map(move |&fj| {
                let base = &patterns[&(fi.kind, fj.kind)];
                let (a, b) = (i64::from(fi.i + fj.i), i64::from(fi.j + fj.j));
                let mut ks: Vec<Face> = base
                    .iter()
                    .map(|k| cx.face(k.kind, i64::from(k.i) + a, i64::from(k.j) + b))
                    .collect();
                ks.sort();
                ks.dedup();
                ks.into_iter().filter_map(move |fk| {
                    let us = &vertices[cx.index(fi)];
                    let vs = &vertices[cx.index(fj)];
                    let additive = us.iter().all(|u| {
                        vs.iter().all(|v| {
                            let w = u.oplus(v);
                            !cx.contains_grid_point(fk, w) || pi.delta_grid(*u, *v).is_zero()
                        })
                    });
                    additive.then_some(Triple {
                        i: fi,
                        j: fj,
                        k: fk,
                    })
                })
            })
        })
        .collect();

    let maximal = maximal_indices(&cx, &triples);
    AdditiveSet {
        q,
        triples,
        maximal,
    }
}

/// Faces containing each face, indexed by [`Complex::index`].
fn cofaces(cx: &Complex) -> Vec<Vec<Face>> {
    let mut out = vec![Vec::new(); cx.num_faces()];
    for g in cx.faces() {
        for f in cx.subfaces(g) {
            out[cx.index(f)].push(g);
        }
    }
    out
}

fn maximal_indices(cx: &Complex, triples: &[Triple]) -> Vec<usize> {
    let set: HashSet<Triple> = triples.iter().copied().collect();
    let up = cofaces(cx);
    (0..triples.len())
        .into_par_iter()
        .filter(|&idx| {
            let t = triples[idx];
            let dominated = up[cx.index(t.i)].iter().any(|&i| {
                up[cx.index(t.j)].iter().any(|&j| {
                    up[cx.index(t.k)].iter().any(|&k| {
                        let s = Triple { i, j, k };
                        s != t && set.contains(&s)
                    })
                })
            });
            !dominated
        })
        .collect()
}

fn is_axis_edge(f: &Face) -> bool {
    matches!(f.kind, FaceKind::EdgeH | FaceKind::EdgeV)
}

/// `Ok(())` when no maximal triple uses a horizontal or vertical edge,
/// otherwise the first offending maximal triple.
pub fn is_diagonally_constrained(e: &AdditiveSet) -> Result<(), Triple> {
    match e
        .maximal_triples()
        .find(|t| t.faces().iter().any(is_axis_edge))
    {
        Some(t) => Err(*t),
        None => Ok(()),
    }
}

/// The four shapes a maximal triple can take for a diagonally constrained
/// function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TripleShape {
    VerticesAndDiagonals,
    ThreeTriangles,
    VertexTwoTriangles,
    DiagonalTwoTriangles,
}

pub fn shape(t: &Triple) -> Option<TripleShape> {
    let faces = t.faces();
    let tri = faces.iter().filter(|f| f.kind.is_triangle()).count();
    let low = |f: &&Face| matches!(f.kind, FaceKind::Vertex | FaceKind::EdgeD);
    if faces.iter().all(|f| low(&f)) {
        return Some(TripleShape::VerticesAndDiagonals);
    }
    if tri == 3 {
        return Some(TripleShape::ThreeTriangles);
    }
    if tri == 2 {
        let other = faces.iter().find(|f| !f.kind.is_triangle()).unwrap();
        return match other.kind {
            FaceKind::Vertex => Some(TripleShape::VertexTwoTriangles),
            FaceKind::EdgeD => Some(TripleShape::DiagonalTwoTriangles),
            _ => None,
        };
    }
    None
}
