//! End-to-end decision: minimality gate, then the finite linear-system test
//! and/or the structural classification with explicit perturbations.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::additivity::{enumerate_e, is_diagonally_constrained, Triple};
use crate::checks::{check_minimality, MinimalityReport};
use crate::error::{Error, Result};
use crate::geometry::Face;
use crate::imposing::{build_graph, classify, WitnessCategory};
use crate::linsys::{assemble, kernel, kernel_to_certificate, LinSystem};
use crate::perturb::{build_phi_perturbation, build_psi_perturbation, make_pair, PerturbationKind};
use crate::plf::{min_positive_slack, PLFunction};
use crate::scalar::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fast,
    Structural,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Extreme {
    Yes,
    No,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    NotExtreme {
        pi1: PLFunction<Rat>,
        pi2: PLFunction<Rat>,
        kind: PerturbationKind,
        epsilon: Rat,
    },
    Extreme {
        /// Lattice resolution of the system, relative to the working `q`.
        resolution: u32,
        rank: usize,
        variables: usize,
        /// SHA-256 of the assembled rows, tying the certificate to `π`.
        system_digest: String,
    },
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub minimal: bool,
    pub minimality: MinimalityReport<Rat>,
    pub diagonally_constrained: bool,
    /// First maximal triple using an axis-parallel edge, if any.
    pub offending_triple: Option<Triple>,
    /// `None` when the minimality gate fails.
    pub extreme: Option<Extreme>,
    pub path: Mode,
    /// `q` of the complex the function was analysed over; differs from the
    /// input `q` when a resolution-4 input is not piecewise linear over
    /// `P_q`.
    pub working_q: u32,
    pub kernel_dimension: Option<usize>,
    pub witness: Option<(Face, WitnessCategory)>,
    pub certificate: Option<Certificate>,
    pub timings: Vec<(&'static str, Duration)>,
}

struct PathResult {
    extreme: Extreme,
    certificate: Certificate,
    kernel_dimension: Option<usize>,
    witness: Option<(Face, WitnessCategory)>,
}

fn timed<T>(
    timings: &mut Vec<(&'static str, Duration)>,
    name: &'static str,
    f: impl FnOnce() -> T,
) -> T {
    let start = Instant::now();
    let out = f();
    timings.push((name, start.elapsed()));
    out
}

/// The function on the coarsest lattice it is piecewise linear over, as a
/// resolution-1 function (over `P_{nq}` if it does not coarsen).
pub fn working_function(pi: &PLFunction<Rat>) -> PLFunction<Rat> {
    if pi.n() == 1 {
        return pi.clone();
    }
    match pi.coarsen() {
        Some(c) if c.n() == 1 => c,
        _ => pi.as_unit_resolution(),
    }
}

pub fn system_digest(sys: &LinSystem) -> String {
    let mut h = Sha256::new();
    h.update(sys.q.to_le_bytes());
    h.update(sys.n.to_le_bytes());
    for r in &sys.rows {
        for &(c, a) in &r.coeffs {
            h.update((c as u64).to_le_bytes());
            h.update(a.to_le_bytes());
        }
        h.update(r.rhs.to_le_bytes());
        h.update([0xff]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn kernel_decision(w: &PLFunction<Rat>, n: u32, dc: bool) -> Result<PathResult> {
    let sys = assemble(w, n)?;
    let k = kernel(&sys);
    if k.dimension == 0 {
        return Ok(PathResult {
            extreme: if dc {
                Extreme::Yes
            } else {
                Extreme::Inconclusive
            },
            certificate: Certificate::Extreme {
                resolution: n,
                rank: k.rank,
                variables: k.variables,
                system_digest: system_digest(&sys),
            },
            kernel_dimension: Some(0),
            witness: None,
        });
    }
    let (pi1, pi2, epsilon) = kernel_to_certificate(w, &k.basis[0], n)?;
    Ok(PathResult {
        extreme: Extreme::No,
        certificate: Certificate::NotExtreme {
            pi1,
            pi2,
            kind: PerturbationKind::Kernel,
            epsilon,
        },
        kernel_dimension: Some(k.dimension),
        witness: None,
    })
}

fn structural(
    w: &PLFunction<Rat>,
    e: &crate::additivity::AdditiveSet,
    dc: bool,
    timings: &mut Vec<(&'static str, Duration)>,
) -> Result<PathResult> {
    let c = timed(timings, "classify", || {
        let g = build_graph(e);
        let c = classify(&g, e, false);
        (g, c)
    });
    let (g, c) = c;
    if c.affine_imposing {
        return timed(timings, "structural_kernel", || kernel_decision(w, 1, dc));
    }
    let (witness, category) = c
        .witness
        .expect("non-affine-imposing classification has a witness");
    let component: BTreeSet<Face> = g.component(witness).iter().copied().collect();
    let (kind, pbar) = match category {
        WitnessCategory::OutsideBoth => (
            PerturbationKind::Psi2D,
            build_psi_perturbation(w.q(), &component)?,
        ),
        WitnessCategory::InBarS1 => (
            PerturbationKind::PhiDiagonal,
            build_phi_perturbation(w.q(), &component)?,
        ),
    };
    let epsilon = timed(timings, "epsilon", || min_positive_slack(w))?;
    let (pi1, pi2) = make_pair(w, &pbar, &epsilon)?;
    let ok = check_minimality(&pi1).minimal && check_minimality(&pi2).minimal;
    if !ok {
        if dc {
            return Err(Error::VerificationFailure(format!(
                "{} perturbation on the component of {witness} is not minimal",
                kind.as_str()
            )));
        }
        // Without the diagonal constraint the construction is not backed
        // by a proof; fall back to the finite test.
        return kernel_decision(w, 4, dc);
    }
    Ok(PathResult {
        extreme: Extreme::No,
        certificate: Certificate::NotExtreme {
            pi1,
            pi2,
            kind,
            epsilon,
        },
        kernel_dimension: None,
        witness: Some((witness, category)),
    })
}

/// Decides extremality of `π` along the requested path(s).
pub fn decide(pi: &PLFunction<Rat>, mode: Mode) -> Result<Verdict> {
    let mut timings = Vec::new();
    let minimality = timed(&mut timings, "minimality", || check_minimality(pi));
    let w = working_function(pi);
    let mut verdict = Verdict {
        minimal: minimality.minimal,
        minimality,
        diagonally_constrained: false,
        offending_triple: None,
        extreme: None,
        path: mode,
        working_q: w.q(),
        kernel_dimension: None,
        witness: None,
        certificate: None,
        timings: Vec::new(),
    };
    if !verdict.minimal {
        verdict.timings = timings;
        return Ok(verdict);
    }
    let e = timed(&mut timings, "additive_set", || enumerate_e(&w));
    let dc = is_diagonally_constrained(&e);
    verdict.diagonally_constrained = dc.is_ok();
    verdict.offending_triple = dc.err();
    let dc = verdict.diagonally_constrained;

    let fast = match mode {
        Mode::Fast | Mode::Both => Some(timed(&mut timings, "fast_kernel", || {
            kernel_decision(&w, 4, dc)
        })?),
        Mode::Structural => None,
    };
    let slow = match mode {
        Mode::Structural | Mode::Both => Some(structural(&w, &e, dc, &mut timings)?),
        Mode::Fast => None,
    };
    let result = match (fast, slow) {
        (Some(f), None) => f,
        (None, Some(s)) => s,
        (Some(f), Some(s)) => {
            let conflict = matches!(
                (f.extreme, s.extreme),
                (Extreme::Yes, Extreme::No) | (Extreme::No, Extreme::Yes)
            );
            if conflict {
                return Err(Error::PathDisagreement(format!(
                    "finite test says {:?}, structural pipeline says {:?}",
                    f.extreme, s.extreme
                )));
            }
            let kernel_dimension = f.kernel_dimension;
            let mut pick = if s.extreme == Extreme::No { s } else { f };
            pick.kernel_dimension = kernel_dimension;
            pick
        }
        (None, None) => unreachable!(),
    };
    verdict.extreme = Some(result.extreme);
    verdict.kernel_dimension = result.kernel_dimension;
    verdict.witness = result.witness;
    verdict.certificate = Some(result.certificate);
    verdict.timings = timings;
    Ok(verdict)
}

/// Brings `pi` onto the lattice of a certificate function over `q`, `n`.
fn align(pi: &PLFunction<Rat>, q: u32, n: u32) -> Option<PLFunction<Rat>> {
    let base = if pi.q() == q {
        pi.clone()
    } else if pi.q() * pi.n() == q {
        pi.as_unit_resolution()
    } else {
        return None;
    };
    n.is_multiple_of(base.n())
        .then(|| base.refine(n / base.n()))
}

/// Re-derives a certificate from scratch. `Err` carries the reason it
/// was rejected.
pub fn verify_certificate(
    pi: &PLFunction<Rat>,
    c: &Certificate,
) -> std::result::Result<(), String> {
    match c {
        Certificate::NotExtreme { pi1, pi2, .. } => {
            if (pi1.q(), pi1.n()) != (pi2.q(), pi2.n()) {
                return Err("the two functions live on different lattices".into());
            }
            let Some(base) = align(pi, pi1.q(), pi1.n()) else {
                return Err("certificate lattice does not refine the input lattice".into());
            };
            for (name, g) in [("pi1", pi1), ("pi2", pi2)] {
                let r = check_minimality(g);
                if !r.minimal {
                    return Err(format!(
                        "{name} is not minimal ({} violations)",
                        r.violations.len()
                    ));
                }
            }
            if pi1 == pi2 {
                return Err("pi1 and pi2 coincide".into());
            }
            let two = Rat::from_integer(2.into());
            let average_ok = base
                .values()
                .iter()
                .zip(pi1.values().iter().zip(pi2.values()))
                .all(|(p, (a, b))| (a + b) / two.clone() == *p);
            if !average_ok || base.f() != pi1.f() || base.f() != pi2.f() {
                return Err("the average of pi1 and pi2 is not the input".into());
            }
            Ok(())
        }
        Certificate::Extreme {
            resolution,
            rank,
            variables,
            system_digest: digest,
        } => {
            if !check_minimality(pi).minimal {
                return Err("input is not minimal".into());
            }
            let w = working_function(pi);
            let e = enumerate_e(&w);
            if is_diagonally_constrained(&e).is_err() {
                return Err("input is not diagonally constrained".into());
            }
            let sys = assemble(&w, *resolution).map_err(|e| e.to_string())?;
            if system_digest(&sys) != *digest {
                return Err(
                    "system assembled from the input differs from the certified one".into(),
                );
            }
            let k = kernel(&sys);
            if k.dimension != 0 || k.rank != *rank || k.variables != *variables {
                return Err(format!(
                    "kernel has dimension {}, rank {} of {} variables",
                    k.dimension, k.rank, k.variables
                ));
            }
            Ok(())
        }
    }
}
