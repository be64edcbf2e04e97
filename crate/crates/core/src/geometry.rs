//! Torus arithmetic and the periodic triangulation `P_q` of `[0,1)^2`.
//!
//! The complex is cut by the lines `x1 = k/q`, `x2 = k/q` and
//! `x1 + x2 = k/q`. Every face is described exactly by interval bounds on
//! the three linear forms `x1`, `x2`, `x1 + x2`; because that constraint
//! matrix is totally unimodular, Minkowski sums and differences of faces are
//! obtained by adding the bounds, and the result is again a union of faces.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::{frac, Scalar};

/// A point of the torus `R^2 / Z^2`, with both coordinates in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusPoint<S> {
    pub x1: S,
    pub x2: S,
}

impl<S: Scalar> TorusPoint<S> {
    /// Builds a point, reducing both coordinates modulo one.
    pub fn new(x1: S, x2: S) -> Self {
        TorusPoint {
            x1: frac(&x1),
            x2: frac(&x2),
        }
    }

    pub fn origin() -> Self {
        TorusPoint {
            x1: S::zero(),
            x2: S::zero(),
        }
    }

    pub fn oplus(&self, other: &Self) -> Self {
        Self::new(
            self.x1.clone() + other.x1.clone(),
            self.x2.clone() + other.x2.clone(),
        )
    }

    pub fn ominus(&self, other: &Self) -> Self {
        Self::new(
            self.x1.clone() - other.x1.clone(),
            self.x2.clone() - other.x2.clone(),
        )
    }

    /// The grid point at resolution `n` equal to `self`, if there is one.
    pub fn to_grid(&self, n: u32, q: u32) -> Option<GridPoint> {
        let side = S::from_int(i64::from(n * q));
        let a = self.x1.clone() * side.clone();
        let b = self.x2.clone() * side;
        let (ai, bi) = (a.floor_i64(), b.floor_i64());
        if a == S::from_int(ai) && b == S::from_int(bi) {
            Some(GridPoint::new(ai, bi, n, q))
        } else {
            None
        }
    }
}

impl<S: fmt::Display> fmt::Display for TorusPoint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x1, self.x2)
    }
}

/// A point `(i, j) / (n q)` of the lattice `(1/(nq)) Z^2`, stored modulo `nq`.
///
/// The derived ordering is lexicographic in `(i, j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPoint {
    pub i: u32,
    pub j: u32,
    pub n: u32,
    pub q: u32,
}

impl GridPoint {
    pub fn new(i: i64, j: i64, n: u32, q: u32) -> Self {
        let side = i64::from(n * q);
        GridPoint {
            i: i.rem_euclid(side) as u32,
            j: j.rem_euclid(side) as u32,
            n,
            q,
        }
    }

    pub fn side(&self) -> u32 {
        self.n * self.q
    }

    /// Row-major index into a `side x side` array.
    pub fn index(&self) -> usize {
        self.i as usize * self.side() as usize + self.j as usize
    }

    pub fn from_index(index: usize, n: u32, q: u32) -> Self {
        let side = (n * q) as usize;
        GridPoint {
            i: (index / side) as u32,
            j: (index % side) as u32,
            n,
            q,
        }
    }

    pub fn oplus(&self, other: &GridPoint) -> GridPoint {
        debug_assert_eq!((self.n, self.q), (other.n, other.q));
        GridPoint::new(
            i64::from(self.i) + i64::from(other.i),
            i64::from(self.j) + i64::from(other.j),
            self.n,
            self.q,
        )
    }

    pub fn ominus(&self, other: &GridPoint) -> GridPoint {
        debug_assert_eq!((self.n, self.q), (other.n, other.q));
        GridPoint::new(
            i64::from(self.i) - i64::from(other.i),
            i64::from(self.j) - i64::from(other.j),
            self.n,
            self.q,
        )
    }

    /// The same point on the grid of resolution `n * factor`.
    pub fn refined(&self, factor: u32) -> GridPoint {
        GridPoint {
            i: self.i * factor,
            j: self.j * factor,
            n: self.n * factor,
            q: self.q,
        }
    }

    /// Whether the point lies in `(1/q) Z^2`.
    pub fn is_vertex(&self) -> bool {
        self.i.is_multiple_of(self.n) && self.j.is_multiple_of(self.n)
    }

    pub fn to_torus<S: Scalar>(&self) -> TorusPoint<S> {
        let side = i64::from(self.side());
        TorusPoint {
            x1: S::from_ratio(i64::from(self.i), side),
            x2: S::from_ratio(i64::from(self.j), side),
        }
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = self.side();
        write!(f, "({}/{}, {}/{})", self.i, side, self.j, side)
    }
}

/// The six face shapes of `P_q`, in their canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaceKind {
    Vertex,
    EdgeH,
    EdgeV,
    EdgeD,
    TriLower,
    TriUpper,
}

impl FaceKind {
    pub const ALL: [FaceKind; 6] = [
        FaceKind::Vertex,
        FaceKind::EdgeH,
        FaceKind::EdgeV,
        FaceKind::EdgeD,
        FaceKind::TriLower,
        FaceKind::TriUpper,
    ];

    pub fn dim(self) -> u32 {
        match self {
            FaceKind::Vertex => 0,
            FaceKind::EdgeH | FaceKind::EdgeV | FaceKind::EdgeD => 1,
            FaceKind::TriLower | FaceKind::TriUpper => 2,
        }
    }

    pub fn is_triangle(self) -> bool {
        self.dim() == 2
    }

    fn ordinal(self) -> usize {
        self as usize
    }
}

/// A face of `P_q`, identified by its shape and the lower-left lattice
/// anchor `(i, j)` taken modulo `q`.
///
/// * `Vertex(i,j) = {(i, j)/q}`
/// * `EdgeH(i,j) = [(i,j), (i+1,j)]/q`, `EdgeV(i,j) = [(i,j), (i,j+1)]/q`
/// * `EdgeD(i,j) = [(i+1,j), (i,j+1)]/q`
/// * `TriLower(i,j) = conv{(i,j), (i+1,j), (i,j+1)}/q`
/// * `TriUpper(i,j) = conv{(i+1,j), (i,j+1), (i+1,j+1)}/q`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Face {
    pub kind: FaceKind,
    pub i: u32,
    pub j: u32,
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}({},{})", self.kind, self.i, self.j)
    }
}

/// Closed box in the coordinates `(x1, x2, x1 + x2)`.
///
/// Bounds are integers in units of `1/scale` for whatever scale the caller
/// is working at (`q` for faces, `nq` for grid points).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bounds {
    pub lo: [i64; 3],
    pub hi: [i64; 3],
}

impl Bounds {
    pub fn add(&self, other: &Bounds) -> Bounds {
        let mut out = *self;
        for c in 0..3 {
            out.lo[c] += other.lo[c];
            out.hi[c] += other.hi[c];
        }
        out
    }

    /// Bounds of `self - other = {a - b : a in self, b in other}`.
    pub fn sub(&self, other: &Bounds) -> Bounds {
        let mut out = *self;
        for c in 0..3 {
            out.lo[c] -= other.hi[c];
            out.hi[c] -= other.lo[c];
        }
        out
    }

    pub fn shift(&self, dx: i64, dy: i64) -> Bounds {
        let d = [dx, dy, dx + dy];
        let mut out = *self;
        for (c, dc) in d.into_iter().enumerate() {
            out.lo[c] += dc;
            out.hi[c] += dc;
        }
        out
    }

    /// Whether `other` lies inside `self`. Both must be tight descriptions
    /// (every bound attained), which holds for faces of `P_q`.
    pub fn contains(&self, other: &Bounds) -> bool {
        (0..3).all(|c| self.lo[c] <= other.lo[c] && other.hi[c] <= self.hi[c])
    }

    pub fn contains_point(&self, x: i64, y: i64) -> bool {
        let p = [x, y, x + y];
        (0..3).all(|c| self.lo[c] <= p[c] && p[c] <= self.hi[c])
    }

    /// Relative interior membership: strict on every non-degenerate range.
    pub fn relint_contains_point(&self, x: i64, y: i64) -> bool {
        let p = [x, y, x + y];
        (0..3).all(|c| {
            if self.lo[c] == self.hi[c] {
                p[c] == self.lo[c]
            } else {
                self.lo[c] < p[c] && p[c] < self.hi[c]
            }
        })
    }
}

/// The periodic complex `P_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Complex {
    q: u32,
}

impl Complex {
    pub fn new(q: u32) -> Self {
        assert!(q >= 1, "q must be positive");
        Complex { q }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn num_faces(&self) -> usize {
        6 * (self.q * self.q) as usize
    }

    pub fn num_triangles(&self) -> usize {
        2 * (self.q * self.q) as usize
    }

    pub fn face(&self, kind: FaceKind, i: i64, j: i64) -> Face {
        let q = i64::from(self.q);
        Face {
            kind,
            i: i.rem_euclid(q) as u32,
            j: j.rem_euclid(q) as u32,
        }
    }

    /// Position of `face` in the canonical (kind, anchor) order.
    pub fn index(&self, face: Face) -> usize {
        let qq = (self.q * self.q) as usize;
        face.kind.ordinal() * qq + face.i as usize * self.q as usize + face.j as usize
    }

    pub fn face_at(&self, index: usize) -> Face {
        let qq = (self.q * self.q) as usize;
        let kind = FaceKind::ALL[index / qq];
        let r = index % qq;
        Face {
            kind,
            i: (r / self.q as usize) as u32,
            j: (r % self.q as usize) as u32,
        }
    }

    /// All `6 q^2` faces in canonical order.
    pub fn faces(&self) -> impl Iterator<Item = Face> + '_ {
        (0..self.num_faces()).map(move |k| self.face_at(k))
    }

    /// All `2 q^2` triangles in canonical order.
    pub fn triangles(&self) -> impl Iterator<Item = Face> + '_ {
        let start = 4 * (self.q * self.q) as usize;
        (start..self.num_faces()).map(move |k| self.face_at(k))
    }

    /// Index of a triangle among [`Complex::triangles`].
    pub fn triangle_index(&self, face: Face) -> usize {
        debug_assert!(face.kind.is_triangle());
        self.index(face) - 4 * (self.q * self.q) as usize
    }

    /// Bounds of the canonical lift of `face` in units of `1/(scale q)`.
    pub fn bounds(&self, face: Face, scale: u32) -> Bounds {
        lifted_bounds(
            face.kind,
            i64::from(face.i),
            i64::from(face.j),
            i64::from(scale),
        )
    }

    /// The unique face whose relative interior contains `p`.
    pub fn face_of<S: Scalar>(&self, p: &TorusPoint<S>) -> Face {
        let q = S::from_int(i64::from(self.q));
        let y1 = p.x1.clone() * q.clone();
        let y2 = p.x2.clone() * q;
        let (i, j) = (y1.floor_i64(), y2.floor_i64());
        let a = y1 - S::from_int(i);
        let b = y2 - S::from_int(j);
        let kind = classify_in_cell(a.is_zero(), b.is_zero(), || {
            let s = a.clone() + b.clone();
            s.partial_cmp(&S::one()).expect("comparable scalars")
        });
        self.face(kind, i, j)
    }

    /// Integer version of [`Complex::face_of`] for lattice points.
    pub fn face_of_grid(&self, p: GridPoint) -> Face {
        debug_assert_eq!(p.q, self.q);
        let n = p.n;
        let (i, a) = (p.i / n, p.i % n);
        let (j, b) = (p.j / n, p.j % n);
        let kind = classify_in_cell(a == 0, b == 0, || (a + b).cmp(&n));
        self.face(kind, i64::from(i), i64::from(j))
    }

    /// Faces of `P_q` (reduced modulo `q`) whose lifts fit inside `region`,
    /// a box given in units of `1/q`.
    pub fn faces_inside(&self, region: &Bounds) -> BTreeSet<Face> {
        let mut out = BTreeSet::new();
        for i in (region.lo[0] - 1)..=region.hi[0] {
            for j in (region.lo[1] - 1)..=region.hi[1] {
                for kind in FaceKind::ALL {
                    if region.contains(&lifted_bounds(kind, i, j, 1)) {
                        out.insert(self.face(kind, i, j));
                    }
                }
            }
        }
        out
    }

    /// Whether the torus face `face` is contained in `region + Z^2`.
    pub fn region_contains(&self, region: &Bounds, face: Face) -> bool {
        let b = self.bounds(face, 1);
        let q = i64::from(self.q);
        (-3..=3).any(|zx| (-3..=3).any(|zy| region.contains(&b.shift(q * zx, q * zy))))
    }

    /// Faces whose union is `a ⊕ b` on the torus.
    pub fn minkowski_sum_faces(&self, a: Face, b: Face) -> BTreeSet<Face> {
        self.faces_inside(&self.bounds(a, 1).add(&self.bounds(b, 1)))
    }

    /// Faces whose union is `k ⊖ j` on the torus.
    pub fn minkowski_diff_faces(&self, k: Face, j: Face) -> BTreeSet<Face> {
        self.faces_inside(&self.bounds(k, 1).sub(&self.bounds(j, 1)))
    }

    /// `inner ⊆ outer` as closed subsets of the torus.
    pub fn face_contains(&self, outer: Face, inner: Face) -> bool {
        self.region_contains(&self.bounds(outer, 1), inner)
    }

    /// All faces of `face` (itself included), in canonical order.
    pub fn subfaces(&self, face: Face) -> BTreeSet<Face> {
        self.faces_inside(&self.bounds(face, 1))
    }

    /// Maximal faces contained in both `a` and `b`. For `q >= 3` this is
    /// either empty or the single face `a ∩ b`.
    pub fn intersection(&self, a: Face, b: Face) -> Vec<Face> {
        let sa = self.subfaces(a);
        let sb = self.subfaces(b);
        let common: Vec<Face> = sa.intersection(&sb).copied().collect();
        common
            .iter()
            .copied()
            .filter(|&f| !common.iter().any(|&g| g != f && self.face_contains(g, f)))
            .collect()
    }

    /// Closed membership of a lattice point.
    pub fn contains_grid_point(&self, face: Face, p: GridPoint) -> bool {
        self.grid_test(face, p, Bounds::contains_point)
    }

    /// Relative-interior membership of a lattice point.
    pub fn relint_contains_grid_point(&self, face: Face, p: GridPoint) -> bool {
        self.grid_test(face, p, Bounds::relint_contains_point)
    }

    fn grid_test(&self, face: Face, p: GridPoint, test: fn(&Bounds, i64, i64) -> bool) -> bool {
        debug_assert_eq!(p.q, self.q);
        let b = self.bounds(face, p.n);
        let side = i64::from(p.side());
        let (x, y) = (i64::from(p.i), i64::from(p.j));
        (-1..=1).any(|zx| (-1..=1).any(|zy| test(&b, x + side * zx, y + side * zy)))
    }

    /// Lattice points of `(1/(nq)) Z^2` in the closed face, sorted.
    pub fn grid_points_in_face(&self, face: Face, n: u32) -> Vec<GridPoint> {
        let b = self.bounds(face, n);
        let mut pts = BTreeSet::new();
        for x in b.lo[0]..=b.hi[0] {
            for y in b.lo[1]..=b.hi[1] {
                if b.contains_point(x, y) {
                    pts.insert(GridPoint::new(x, y, n, self.q));
                }
            }
        }
        pts.into_iter().collect()
    }

    /// Lattice vertices of the canonical lift, in units of `1/q`.
    pub fn defining_vertices(&self, face: Face) -> Vec<(i64, i64)> {
        let (i, j) = (i64::from(face.i), i64::from(face.j));
        match face.kind {
            FaceKind::Vertex => vec![(i, j)],
            FaceKind::EdgeH => vec![(i, j), (i + 1, j)],
            FaceKind::EdgeV => vec![(i, j), (i, j + 1)],
            FaceKind::EdgeD => vec![(i + 1, j), (i, j + 1)],
            FaceKind::TriLower => vec![(i, j), (i + 1, j), (i, j + 1)],
            FaceKind::TriUpper => vec![(i + 1, j), (i, j + 1), (i + 1, j + 1)],
        }
    }

    /// Average of the defining vertices, reduced to the torus.
    pub fn barycenter<S: Scalar>(&self, face: Face) -> TorusPoint<S> {
        let vs = self.defining_vertices(face);
        let den = vs.len() as i64 * i64::from(self.q);
        let sx: i64 = vs.iter().map(|v| v.0).sum();
        let sy: i64 = vs.iter().map(|v| v.1).sum();
        TorusPoint::new(S::from_ratio(sx, den), S::from_ratio(sy, den))
    }
}

fn classify_in_cell(
    a_zero: bool,
    b_zero: bool,
    sum_vs_one: impl FnOnce() -> std::cmp::Ordering,
) -> FaceKind {
    use std::cmp::Ordering::*;
    match (a_zero, b_zero) {
        (true, true) => FaceKind::Vertex,
        (false, true) => FaceKind::EdgeH,
        (true, false) => FaceKind::EdgeV,
        (false, false) => match sum_vs_one() {
            Less => FaceKind::TriLower,
            Equal => FaceKind::EdgeD,
            Greater => FaceKind::TriUpper,
        },
    }
}

fn lifted_bounds(kind: FaceKind, i: i64, j: i64, scale: i64) -> Bounds {
    let (a, b, e) = (i * scale, j * scale, scale);
    let s = a + b;
    let (x, y, d) = match kind {
        FaceKind::Vertex => ((a, a), (b, b), (s, s)),
        FaceKind::EdgeH => ((a, a + e), (b, b), (s, s + e)),
        FaceKind::EdgeV => ((a, a), (b, b + e), (s, s + e)),
        FaceKind::EdgeD => ((a, a + e), (b, b + e), (s + e, s + e)),
        FaceKind::TriLower => ((a, a + e), (b, b + e), (s, s + e)),
        FaceKind::TriUpper => ((a, a + e), (b, b + e), (s + e, s + 2 * e)),
    };
    Bounds {
        lo: [x.0, y.0, d.0],
        hi: [x.1, y.1, d.1],
    }
}
