//! The finite additivity system on a lattice, its exact kernel, and kernel
//! certificates.
//!
//! The kernel is computed by incremental row reduction modulo a large
//! prime, lifted back to the rationals and then checked against every row
//! with exact integer arithmetic. Since `rank_Q >= rank_p`, a full set of
//! verified vectors pins the rational kernel dimension exactly; if the
//! lifted vectors do not verify, more primes are tried and finally a plain
//! rational elimination is used.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::checks::check_minimality;
use crate::error::{Error, Result};
use crate::geometry::GridPoint;
use crate::plf::{min_positive_slack, PLFunction, SlackTable};
use crate::scalar::{Rat, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowOrigin {
    Origin,
    FValue,
    /// `φ(u) + φ(v) = φ(u ⊕ v)` for the variable indices `u <= v`.
    Additivity(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    /// Sorted `(variable, coefficient)` pairs with nonzero coefficients.
    pub coeffs: Vec<(usize, i64)>,
    pub rhs: i64,
    pub origin: RowOrigin,
}

#[derive(Clone, Debug)]
pub struct LinSystem {
    pub q: u32,
    pub n: u32,
    pub variables: usize,
    pub rows: Vec<Row>,
    pub notes: Vec<String>,
}

impl LinSystem {
    pub fn variable(&self, index: usize) -> GridPoint {
        GridPoint::from_index(index, self.n, self.q)
    }

    /// Whether `values` (one per variable) satisfies every row, optionally
    /// with all right-hand sides set to zero.
    pub fn is_satisfied_by(&self, values: &[Rat], homogeneous: bool) -> bool {
        self.rows.iter().all(|r| {
            let lhs: Rat = r
                .coeffs
                .iter()
                .map(|&(c, a)| values[c].clone() * Rat::from_int(a))
                .sum();
            let rhs = if homogeneous { 0 } else { r.rhs };
            lhs == Rat::from_int(rhs)
        })
    }
}

fn sparse(terms: &[(usize, i64)]) -> Vec<(usize, i64)> {
    let mut out: Vec<(usize, i64)> = Vec::with_capacity(terms.len());
    let mut sorted = terms.to_vec();
    sorted.sort_unstable();
    for (c, a) in sorted {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += a,
            _ => out.push((c, a)),
        }
    }
    out.retain(|&(_, a)| a != 0);
    out
}

/// Assembles `φ(0) = 0`, `φ(f) = 1` and `φ(u) + φ(v) = φ(u ⊕ v)` for every
/// unordered pair of the `(1/(nq))`-lattice with `Δπ(u, v) = 0`.
pub fn assemble<S: Scalar>(pi: &PLFunction<S>, n: u32) -> Result<LinSystem> {
    if n == 0 || !n.is_multiple_of(pi.n()) {
        return Err(Error::Precondition(format!(
            "cannot assemble at resolution {n} for a function stored at resolution {}",
            pi.n()
        )));
    }
    let fine = pi.refine(n / pi.n());
    let table = SlackTable::new(&fine);
    let mut rows = vec![
        Row {
            coeffs: vec![(0, 1)],
            rhs: 0,
            origin: RowOrigin::Origin,
        },
        Row {
            coeffs: vec![(fine.f().index(), 1)],
            rhs: 1,
            origin: RowOrigin::FValue,
        },
    ];
    for (u, v) in table.zero_pairs() {
        let w = fine.point(u).oplus(&fine.point(v)).index();
        let coeffs = sparse(&[(u, 1), (v, 1), (w, -1)]);
        if !coeffs.is_empty() {
            rows.push(Row {
                coeffs,
                rhs: 0,
                origin: RowOrigin::Additivity(u, v),
            });
        }
    }
    Ok(LinSystem {
        q: pi.q(),
        n,
        variables: fine.num_points(),
        rows,
        notes: vec!["φ(1,0), φ(0,1) and φ(1,1) are the variable φ(0,0) on the torus".into()],
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelReport {
    pub dimension: usize,
    pub rank: usize,
    pub variables: usize,
    /// Basis of the homogeneous kernel; each vector's first nonzero entry
    /// is `1`.
    #[serde(skip)]
    pub basis: Vec<Vec<Rat>>,
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(p)) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Descending primes starting just below `2^62`.
fn primes() -> impl Iterator<Item = u64> {
    let mut next = (1u64 << 62) - 1;
    std::iter::from_fn(move || {
        while !is_prime(next) {
            next -= 2;
        }
        let p = next;
        next -= 2;
        Some(p)
    })
}

fn to_mod(a: i64, p: u64) -> u64 {
    a.rem_euclid(p as i64) as u64
}

/// Reduced row echelon form modulo `p`, grown one row at a time. Pivot
/// rows are kept fully reduced, so every stored row vanishes on all other
/// pivot columns and a new row is reduced in a single pass.
struct ModRref {
    p: u64,
    n: usize,
    pivot_row: Vec<Option<usize>>,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
    free: Vec<usize>,
}

impl ModRref {
    fn new(n: usize, p: u64) -> Self {
        ModRref {
            p,
            n,
            pivot_row: vec![None; n],
            rows: Vec::new(),
            pivots: Vec::new(),
            free: (0..n).collect(),
        }
    }

    fn rank(&self) -> usize {
        self.pivots.len()
    }

    fn insert(&mut self, coeffs: &[(usize, i64)], w: &mut [u64]) {
        let p = self.p;
        for &(c, a) in coeffs {
            if self.pivot_row[c].is_none() {
                w[c] = (w[c] + to_mod(a, p)) % p;
            }
        }
        for &(c, a) in coeffs {
            if let Some(r) = self.pivot_row[c] {
                let a = to_mod(a, p);
                let row = &self.rows[r];
                for &f in &self.free {
                    if row[f] != 0 {
                        w[f] = (w[f] + p - mul_mod(a, row[f], p)) % p;
                    }
                }
            }
        }
        let lead = self.free.iter().copied().find(|&f| w[f] != 0);
        let Some(c0) = lead else {
            for &f in &self.free {
                w[f] = 0;
            }
            return;
        };
        let inv = pow_mod(w[c0], p - 2, p);
        let mut new_row = vec![0u64; self.n];
        for &f in &self.free {
            if w[f] != 0 {
                new_row[f] = mul_mod(w[f], inv, p);
                w[f] = 0;
            }
        }
        self.free.retain(|&f| f != c0);
        for row in self.rows.iter_mut() {
            let a = row[c0];
            if a != 0 {
                row[c0] = 0;
                for &f in &self.free {
                    if new_row[f] != 0 {
                        row[f] = (row[f] + p - mul_mod(a, new_row[f], p)) % p;
                    }
                }
            }
        }
        self.pivot_row[c0] = Some(self.rows.len());
        self.rows.push(new_row);
        self.pivots.push(c0);
    }

    /// Kernel basis residues, one vector per free column.
    fn kernel(&self) -> Vec<Vec<u64>> {
        let p = self.p;
        self.free
            .iter()
            .map(|&f| {
                let mut v = vec![0u64; self.n];
                v[f] = 1;
                for (r, &pc) in self.pivots.iter().enumerate() {
                    let a = self.rows[r][f];
                    if a != 0 {
                        v[pc] = p - a;
                    }
                }
                v
            })
            .collect()
    }
}

fn reduce_mod(sys: &LinSystem, p: u64) -> ModRref {
    let mut rref = ModRref::new(sys.variables, p);
    let mut w = vec![0u64; sys.variables];
    for row in &sys.rows {
        if rref.rank() == sys.variables {
            break;
        }
        rref.insert(&row.coeffs, &mut w);
    }
    rref
}

/// `r/s ≡ a (mod m)` with `|r|, s <= sqrt(m/2)`, if one exists.
fn rational_reconstruct(a: &BigInt, m: &BigInt) -> Option<Rat> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.clone());
    let (mut s0, mut s1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let t = &r0 / &r1;
        let r2 = &r0 - &t * &r1;
        let s2 = &s0 - &t * &s1;
        r0 = std::mem::replace(&mut r1, r2);
        s0 = std::mem::replace(&mut s1, s2);
    }
    if s1.is_zero() || s1.abs() > bound {
        return None;
    }
    Some(Rat::new(r1, s1))
}

fn verify_vector(sys: &LinSystem, v: &[Rat]) -> bool {
    // Clear denominators and check each row over the integers.
    let den = v.iter().fold(BigInt::one(), |acc, x| {
        num_integer::Integer::lcm(&acc, x.denom())
    });
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&den / x.denom())).collect();
    sys.rows.iter().all(|r| {
        let mut s = BigInt::zero();
        for &(c, a) in &r.coeffs {
            s += &ints[c] * a;
        }
        s.is_zero()
    })
}

fn normalize(mut v: Vec<Rat>) -> Vec<Rat> {
    if let Some(lead) = v.iter().find(|x| !x.is_zero()).cloned() {
        for x in v.iter_mut() {
            *x = x.clone() / lead.clone();
        }
    }
    v
}

const MAX_PRIMES: usize = 6;

/// Kernel of the homogenized system (all right-hand sides zero).
pub fn kernel(sys: &LinSystem) -> KernelReport {
    let n = sys.variables;
    let mut best: Option<(Vec<usize>, Vec<Vec<BigInt>>, BigInt)> = None;
    for p in primes().take(MAX_PRIMES) {
        let rref = reduce_mod(sys, p);
        if rref.rank() == n {
            return KernelReport {
                dimension: 0,
                rank: n,
                variables: n,
                basis: Vec::new(),
            };
        }
        let residues: Vec<Vec<BigInt>> = rref
            .kernel()
            .into_iter()
            .map(|v| v.into_iter().map(BigInt::from).collect())
            .collect();
        let mut pivots = rref.pivots.clone();
        pivots.sort_unstable();
        let pb = BigInt::from(p);
        best = match best.take() {
            Some((bp, acc, m)) if bp == pivots => {
                let combined = acc
                    .iter()
                    .zip(&residues)
                    .map(|(va, vb)| va.iter().zip(vb).map(|(x, y)| crt(x, &m, y, &pb)).collect())
                    .collect();
                Some((bp, combined, m * &pb))
            }
            Some((bp, acc, m)) if bp.len() > pivots.len() => Some((bp, acc, m)),
            _ => Some((pivots, residues, pb)),
        };
        let (_, acc, m) = best.as_ref().unwrap();
        let lifted: Option<Vec<Vec<Rat>>> = acc
            .iter()
            .map(|v| v.iter().map(|x| rational_reconstruct(x, m)).collect())
            .collect();
        if let Some(basis) = lifted {
            if basis.iter().all(|v| verify_vector(sys, v)) {
                let mut basis: Vec<Vec<Rat>> = basis.into_iter().map(normalize).collect();
                basis.sort_by_key(|v| v.iter().position(|x| !x.is_zero()));
                return KernelReport {
                    dimension: basis.len(),
                    rank: n - basis.len(),
                    variables: n,
                    basis,
                };
            }
        }
    }
    kernel_exact(sys)
}

fn crt(x: &BigInt, m: &BigInt, y: &BigInt, p: &BigInt) -> BigInt {
    // t = (y - x) * m^{-1} mod p; result x + m t.
    let mp = (m % p + p) % p;
    let inv = mp.modpow(&(p - BigInt::from(2)), p);
    let t = (((y - x) % p + p) % p * inv) % p;
    x + m * t
}

/// Plain rational row reduction; slow but dependency-free of the modular
/// path.
pub fn kernel_exact(sys: &LinSystem) -> KernelReport {
    let n = sys.variables;
    let mut pivot_row: Vec<Option<usize>> = vec![None; n];
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for row in &sys.rows {
        if pivots.len() == n {
            break;
        }
        let mut w = vec![Rat::zero(); n];
        for &(c, a) in &row.coeffs {
            w[c] += Rat::from_int(a);
        }
        for &(c, _) in &row.coeffs {
            if let Some(r) = pivot_row[c] {
                let a = w[c].clone();
                if !a.is_zero() {
                    for (x, y) in w.iter_mut().zip(&rows[r]) {
                        if !y.is_zero() {
                            *x -= a.clone() * y.clone();
                        }
                    }
                }
            }
        }
        let Some(c0) = (0..n).find(|&c| pivot_row[c].is_none() && !w[c].is_zero()) else {
            continue;
        };
        let inv = Rat::one() / w[c0].clone();
        for x in w.iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for r in rows.iter_mut() {
            let a = r[c0].clone();
            if !a.is_zero() {
                for (x, y) in r.iter_mut().zip(&w) {
                    if !y.is_zero() {
                        *x -= a.clone() * y.clone();
                    }
                }
            }
        }
        pivot_row[c0] = Some(rows.len());
        rows.push(w);
        pivots.push(c0);
    }
    let basis: Vec<Vec<Rat>> = (0..n)
        .filter(|&f| pivot_row[f].is_none())
        .map(|f| {
            let mut v = vec![Rat::zero(); n];
            v[f] = Rat::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[r][f].clone();
            }
            normalize(v)
        })
        .collect();
    let mut basis = basis;
    basis.sort_by_key(|v| v.iter().position(|x| !x.is_zero()));
    KernelReport {
        dimension: basis.len(),
        rank: n - basis.len(),
        variables: n,
        basis,
    }
}

/// Scaled pair `π ± ε/(3 ‖π̄‖∞) π̄` where `π̄` extends `v` piecewise
/// linearly over `P_{nq}`; both outputs are checked for minimality.
pub fn kernel_to_certificate(
    pi: &PLFunction<Rat>,
    v: &[Rat],
    n: u32,
) -> Result<(PLFunction<Rat>, PLFunction<Rat>, Rat)> {
    let q = pi.q();
    let side = (n * q) as usize;
    if v.len() != side * side {
        return Err(Error::Precondition(format!(
            "kernel vector has {} entries, expected {}",
            v.len(),
            side * side
        )));
    }
    if v.iter().all(|x| x.is_zero()) {
        return Err(Error::Precondition("kernel vector is zero".into()));
    }
    let pbar = PLFunction::new(q, n, GridPoint::new(0, 0, n, q), v.to_vec())?;
    let epsilon = min_positive_slack(pi)?;
    let scale = epsilon.clone() / (Rat::from_int(3) * pbar.max_abs());
    let (a, b) = crate::perturb::scaled_pair(pi, &pbar, &scale)?;
    for (name, g) in [("first", &a), ("second", &b)] {
        let report = check_minimality(g);
        if !report.minimal {
            return Err(Error::VerificationFailure(format!(
                "{name} kernel perturbation is not minimal ({} violations)",
                report.violations.len()
            )));
        }
    }
    Ok((a, b, epsilon))
}

/// Largest coordinate in absolute value, used to size kernel vectors.
pub fn max_abs(v: &[Rat]) -> Rat {
    v.iter()
        .map(|x| x.abs())
        .fold(Rat::zero(), |m, x| if x > m { x } else { m })
}
