//! Explicit equivariant perturbations over `P_{4q}` and the certificate
//! pair `π ± (ε/3) π̄`.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Complex, Face, GridPoint};
use crate::plf::PLFunction;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PerturbationKind {
    #[serde(rename = "psi")]
    Psi2D,
    #[serde(rename = "phi")]
    PhiDiagonal,
    #[serde(rename = "kernel")]
    Kernel,
}

impl PerturbationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PerturbationKind::Psi2D => "psi",
            PerturbationKind::PhiDiagonal => "phi",
            PerturbationKind::Kernel => "kernel",
        }
    }
}

fn require_res4(p: GridPoint) -> Result<()> {
    if p.n == 4 {
        Ok(())
    } else {
        Err(Error::MalformedResidue(format!(
            "{p} is on the resolution-{} lattice, expected resolution 4",
            p.n
        )))
    }
}

/// The two-dimensional bump: on `T_0 = conv{0, e1/q, e2/q}` it is `1` at
/// the three interior lattice points and `0` at the others; elsewhere it
/// follows from `ψ(x) = ψ(g + x) = -ψ(g - x)` for `g ∈ (1/q) Z^2`.
pub fn psi_value<S: Scalar>(p: GridPoint) -> Result<S> {
    require_res4(p)?;
    let (a, b) = (p.i % 4, p.j % 4);
    let inside = |a: u32, b: u32| matches!((a, b), (1, 1) | (2, 1) | (1, 2));
    Ok(if a + b <= 4 {
        if inside(a, b) {
            S::one()
        } else {
            S::zero()
        }
    } else if inside(4 - a, 4 - b) {
        -S::one()
    } else {
        S::zero()
    })
}

/// The diagonal wave: `+1`, `0`, `-1`, `0` according to whether
/// `x1 + x2` is `1`, `2`, `3` or `0` modulo `1/q`, in units of `1/(4q)`.
pub fn phi_value<S: Scalar>(p: GridPoint) -> Result<S> {
    require_res4(p)?;
    Ok(match (p.i + p.j) % 4 {
        1 => S::one(),
        3 => -S::one(),
        _ => S::zero(),
    })
}

fn perturbation<S: Scalar>(
    q: u32,
    component: &BTreeSet<Face>,
    value: fn(GridPoint) -> Result<S>,
    member: impl Fn(&Complex, Face, GridPoint) -> bool + Sync,
) -> Result<PLFunction<S>> {
    if component.is_empty() {
        return Err(Error::Precondition(
            "perturbation needs a nonempty component".into(),
        ));
    }
    let cx = Complex::new(q);
    let side = 4 * q as usize;
    let values: Vec<S> = (0..side * side)
        .into_par_iter()
        .map(|k| {
            let p = GridPoint::from_index(k, 4, q);
            if component.iter().any(|&t| member(&cx, t, p)) {
                value(p)
            } else {
                Ok(S::zero())
            }
        })
        .collect::<Result<_>>()?;
    PLFunction::new(q, 4, GridPoint::new(0, 0, 4, q), values)
}

/// `π̄ = δ_R ψ` where `R` is the union of the open triangles of
/// `component`. The returned function carries `f = 0`; only its values
/// matter.
pub fn build_psi_perturbation<S: Scalar>(
    q: u32,
    component: &BTreeSet<Face>,
) -> Result<PLFunction<S>> {
    perturbation(q, component, psi_value::<S>, |cx, t, p| {
        cx.relint_contains_grid_point(t, p)
    })
}

/// `π̄ = δ_R φ` where `R` is the union of the closed triangles of
/// `component`; the residues removed from `R` are zeros of `φ` already.
pub fn build_phi_perturbation<S: Scalar>(
    q: u32,
    component: &BTreeSet<Face>,
) -> Result<PLFunction<S>> {
    perturbation(q, component, phi_value::<S>, |cx, t, p| {
        cx.contains_grid_point(t, p)
    })
}

/// `(π + (ε/3) π̄, π - (ε/3) π̄)` at the resolution of `π̄`.
pub fn make_pair<S: Scalar>(
    pi: &PLFunction<S>,
    pbar: &PLFunction<S>,
    epsilon: &S,
) -> Result<(PLFunction<S>, PLFunction<S>)> {
    scaled_pair(pi, pbar, &(epsilon.clone() / S::from_int(3)))
}

/// `(π + c π̄, π - c π̄)`, refining `π` to the resolution of `π̄`.
pub(crate) fn scaled_pair<S: Scalar>(
    pi: &PLFunction<S>,
    pbar: &PLFunction<S>,
    c: &S,
) -> Result<(PLFunction<S>, PLFunction<S>)> {
    if pbar.is_zero() {
        return Err(Error::ZeroPerturbation);
    }
    if pi.q() != pbar.q() || !pbar.n().is_multiple_of(pi.n()) {
        return Err(Error::Precondition(format!(
            "perturbation over q = {}, n = {} does not fit π over q = {}, n = {}",
            pbar.q(),
            pbar.n(),
            pi.q(),
            pi.n()
        )));
    }
    let base = pi.refine(pbar.n() / pi.n());
    let plus = base.add_scaled(pbar, c)?;
    let minus = base.add_scaled(pbar, &-c.clone())?;
    Ok((plus, minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rat};
    use num_traits::Zero;

    fn g(i: i64, j: i64, q: u32) -> GridPoint {
        GridPoint::new(i, j, 4, q)
    }

    #[test]
    fn psi_examples() {
        for q in 1..5 {
            assert_eq!(psi_value::<Rat>(g(1, 1, q)).unwrap(), rat(1, 1));
            assert_eq!(psi_value::<Rat>(g(3, 3, q)).unwrap(), rat(-1, 1));
            assert_eq!(psi_value::<Rat>(g(4, 0, q)).unwrap(), rat(0, 1));
            assert_eq!(psi_value::<Rat>(g(2, 2, q)).unwrap(), rat(0, 1));
        }
        assert!(psi_value::<Rat>(GridPoint::new(1, 1, 1, 3)).is_err());
    }

    #[test]
    fn phi_examples() {
        let q = 3;
        assert_eq!(phi_value::<Rat>(g(1, 0, q)).unwrap(), rat(1, 1));
        assert_eq!(phi_value::<Rat>(g(2, 0, q)).unwrap(), rat(0, 1));
        assert_eq!(phi_value::<Rat>(g(3, 0, q)).unwrap(), rat(-1, 1));
        assert_eq!(phi_value::<Rat>(g(2, 2, q)).unwrap(), rat(0, 1));
        assert!(matches!(
            phi_value::<Rat>(GridPoint::new(1, 0, 2, q)),
            Err(Error::MalformedResidue(_))
        ));
    }

    #[test]
    fn psi_perturbation_lives_in_open_triangles() {
        let cx = Complex::new(3);
        let lower = cx.face(crate::geometry::FaceKind::TriLower, 1, 2);
        let comp: BTreeSet<Face> = [lower].into_iter().collect();
        let pbar = build_psi_perturbation::<Rat>(3, &comp).unwrap();
        let nonzero: Vec<GridPoint> = pbar
            .points()
            .filter(|&p| !pbar.value(p).is_zero())
            .collect();
        assert_eq!(nonzero, vec![g(5, 9, 3), g(5, 10, 3), g(6, 9, 3)]);
        for p in &nonzero {
            assert_eq!(pbar.value(*p), &rat(1, 1));
        }
        assert!(build_psi_perturbation::<Rat>(3, &BTreeSet::new()).is_err());
    }

    #[test]
    fn phi_perturbation_uses_closed_triangles() {
        let cx = Complex::new(2);
        let upper = cx.face(crate::geometry::FaceKind::TriUpper, 0, 0);
        let comp: BTreeSet<Face> = [upper].into_iter().collect();
        let pbar = build_phi_perturbation::<Rat>(2, &comp).unwrap();
        // (4, 1) lies on the right edge of the upper triangle, residue 1.
        assert_eq!(pbar.value(g(4, 1, 2)), &rat(1, 1));
        assert_eq!(pbar.value(g(4, 3, 2)), &rat(-1, 1));
        assert_eq!(pbar.value(g(1, 0, 2)), &rat(0, 1));
        for p in pbar.points() {
            if (p.i + p.j) % 2 == 0 {
                assert!(pbar.value(p).is_zero());
            }
        }
    }

    #[test]
    fn pair_averages_back() {
        let pi = crate::generators::diagonal_lift(&crate::generators::gmic(3, rat(1, 3)).unwrap());
        let cx = Complex::new(3);
        let comp: BTreeSet<Face> = cx.triangles().take(2).collect();
        let pbar = build_psi_perturbation::<Rat>(3, &comp).unwrap();
        let (a, b) = make_pair(&pi, &pbar, &rat(1, 2)).unwrap();
        let fine = pi.refine(4);
        for p in fine.points() {
            assert_eq!(
                (a.value(p).clone() + b.value(p).clone()) / rat(2, 1),
                *fine.value(p)
            );
        }
        assert_eq!(a.f(), fine.f());
        let zero = PLFunction::new(3, 4, g(0, 0, 3), vec![rat(0, 1); 144]).unwrap();
        assert!(matches!(
            make_pair(&pi, &zero, &rat(1, 2)),
            Err(Error::ZeroPerturbation)
        ));
    }
}
