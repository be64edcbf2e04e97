//! Finite minimality test on the function's lattice.

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::GridPoint;
use crate::plf::PLFunction;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Origin,
    Nonneg,
    Subadd,
    Symmetry,
    FNotVertex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation<S> {
    pub kind: ViolationKind,
    pub witness: Vec<GridPoint>,
    /// Offending quantity: the value for `origin`/`nonneg`, `Δπ(u, v)` for
    /// `subadd`, `π(x) + π(f ⊖ x) - 1` for `symmetry`, zero for `f-not-vertex`.
    pub slack: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimalityReport<S> {
    pub minimal: bool,
    pub violations: Vec<Violation<S>>,
}

impl<S> MinimalityReport<S> {
    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

/// Checks `π(0) = 0`, `π >= 0`, `Δπ >= 0` on all lattice pairs, the
/// symmetry condition on all lattice points, and `f ∈ (1/q) Z^2`.
///
/// The lattice is the function's own, so a function stored at resolution 4
/// is tested as a piecewise linear function over `P_{4q}`. Every violation
/// is reported, ordered by kind and then lexicographically by witness.
pub fn check_minimality<S: Scalar>(pi: &PLFunction<S>) -> MinimalityReport<S> {
    let mut violations = Vec::new();
    let origin = pi.point(0);
    if !pi.value(origin).is_zero() {
        violations.push(Violation {
            kind: ViolationKind::Origin,
            witness: vec![origin],
            slack: pi.value(origin).clone(),
        });
    }
    for p in pi.points() {
        if pi.value(p).is_negative() {
            violations.push(Violation {
                kind: ViolationKind::Nonneg,
                witness: vec![p],
                slack: pi.value(p).clone(),
            });
        }
    }
    let points = pi.num_points();
    let subadd: Vec<Vec<Violation<S>>> = (0..points)
        .into_par_iter()
        .map(|ui| {
            let u = pi.point(ui);
            (ui..points)
                .filter_map(|vi| {
                    let v = pi.point(vi);
                    let d = pi.delta_grid(u, v);
                    d.is_negative().then(|| Violation {
                        kind: ViolationKind::Subadd,
                        witness: vec![u, v],
                        slack: d,
                    })
                })
                .collect()
        })
        .collect();
    violations.extend(subadd.into_iter().flatten());
    let f = pi.f();
    for x in pi.points() {
        let y = f.ominus(&x);
        let s = pi.value(x).clone() + pi.value(y).clone() - S::one();
        if !s.is_zero() {
            violations.push(Violation {
                kind: ViolationKind::Symmetry,
                witness: vec![x],
                slack: s,
            });
        }
    }
    if !f.is_vertex() {
        violations.push(Violation {
            kind: ViolationKind::FNotVertex,
            witness: vec![f],
            slack: S::zero(),
        });
    }
    MinimalityReport {
        minimal: violations.is_empty(),
        violations,
    }
}
