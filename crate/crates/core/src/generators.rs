//! Test-function constructors: one-dimensional seeds and their diagonal
//! lift `κ(x) = ζ(x1 + x2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GridPoint;
use crate::plf::PLFunction;
use crate::scalar::{Rat, Scalar};

/// A continuous piecewise linear, period-one `ζ` with breakpoints in
/// `(1/q) Z`, stored by its values at `k/q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneDFunction<S = Rat> {
    pub q: u32,
    /// `f0 = f_index / q`.
    pub f_index: u32,
    pub values: Vec<S>,
}

impl<S: Scalar> OneDFunction<S> {
    pub fn new(q: u32, f_index: u32, values: Vec<S>) -> Result<Self> {
        if q == 0 || values.len() != q as usize {
            return Err(Error::InvalidFunction(format!(
                "expected {q} one-dimensional values, got {}",
                values.len()
            )));
        }
        if f_index == 0 || f_index >= q {
            return Err(Error::InvalidFunction(format!(
                "f0 = {f_index}/{q} must lie strictly between 0 and 1"
            )));
        }
        if !values[0].is_zero() {
            return Err(Error::InvalidFunction("ζ(0) must be 0".into()));
        }
        Ok(OneDFunction { q, f_index, values })
    }

    /// `ζ(k/q)` for any integer `k`.
    pub fn at(&self, k: i64) -> &S {
        &self.values[k.rem_euclid(i64::from(self.q)) as usize]
    }

    /// The 1D minimality conditions on `(1/q) Z`: `ζ(0) = 0`, `ζ >= 0`,
    /// subadditivity and `ζ(t) + ζ(f0 - t) = 1`.
    pub fn is_minimal(&self) -> bool {
        let q = i64::from(self.q);
        let f = i64::from(self.f_index);
        let one = S::one();
        self.at(0).is_zero()
            && self.values.iter().all(|v| !v.is_negative())
            && (0..q)
                .all(|a| (0..q).all(|b| self.at(a).clone() + self.at(b).clone() >= *self.at(a + b)))
            && (0..q).all(|a| self.at(a).clone() + self.at(f - a).clone() == one)
    }
}

/// The two-slope function `ζ(t) = t/f0` on `[0, f0]`, `(1-t)/(1-f0)` on
/// `[f0, 1]`, for `f0 = r/q`.
pub fn gmic(q: u32, f0: Rat) -> Result<OneDFunction<Rat>> {
    let scaled = f0.clone() * Rat::from_int(i64::from(q));
    if !scaled.is_integer() {
        return Err(Error::InvalidFunction(format!(
            "f0 = {f0} is not on the 1/{q} grid"
        )));
    }
    let r = i64::try_from(scaled.to_integer())
        .map_err(|_| Error::InvalidFunction("f0 out of range".into()))?;
    let qi = i64::from(q);
    if r <= 0 || r >= qi {
        return Err(Error::InvalidFunction(format!(
            "f0 = {f0} must lie in (0, 1)"
        )));
    }
    let values = (0..qi)
        .map(|k| {
            if k <= r {
                Rat::from_ratio(k, r)
            } else {
                Rat::from_ratio(qi - k, qi - r)
            }
        })
        .collect();
    OneDFunction::new(q, r as u32, values)
}

/// `κ(x) = ζ(x1 + x2)` with `f = (f0, 0)`.
pub fn diagonal_lift<S: Scalar>(zeta: &OneDFunction<S>) -> PLFunction<S> {
    let q = zeta.q;
    let f = GridPoint::new(i64::from(zeta.f_index), 0, 1, q);
    PLFunction::from_fn(q, 1, f, |p| zeta.at(i64::from(p.i + p.j)).clone())
        .expect("lift of a valid 1D function is well formed")
}

/// `κ(x) = ζ(x1)` with `f = (f0, 0)`.
pub fn horizontal_lift<S: Scalar>(zeta: &OneDFunction<S>) -> PLFunction<S> {
    let q = zeta.q;
    let f = GridPoint::new(i64::from(zeta.f_index), 0, 1, q);
    PLFunction::from_fn(q, 1, f, |p| zeta.at(i64::from(p.i)).clone())
        .expect("lift of a valid 1D function is well formed")
}

/// `π(x) = (ζ1(x1) + ζ2(x2)) / 2` with `f = (f1, f2)`, the average of the
/// two minimal functions `ζ1(x1)` and `ζ2(x2)`. Both seeds must share `q`.
pub fn separable_average(
    z1: &OneDFunction<Rat>,
    z2: &OneDFunction<Rat>,
) -> Result<PLFunction<Rat>> {
    if z1.q != z2.q {
        return Err(Error::InvalidFunction(format!(
            "seeds have q = {} and q = {}",
            z1.q, z2.q
        )));
    }
    let q = z1.q;
    let f = GridPoint::new(i64::from(z1.f_index), i64::from(z2.f_index), 1, q);
    let half = Rat::from_ratio(1, 2);
    PLFunction::from_fn(q, 1, f, |p| {
        (z1.at(i64::from(p.i)).clone() + z2.at(i64::from(p.j)).clone()) * half.clone()
    })
}

/// Member of the `q = 8`, `f0 = 1/2` family with `ζ(1/8) = a`,
/// `ζ(3/8) = 1 - a`, `ζ(5/8) = b`, `ζ(7/8) = 1 - b` and `ζ = 1/2` at the
/// quarter points.
pub fn eighths_family(a: Rat, b: Rat) -> OneDFunction<Rat> {
    let half = Rat::from_ratio(1, 2);
    let one = Rat::from_int(1);
    let values = vec![
        Rat::from_int(0),
        a.clone(),
        half.clone(),
        one.clone() - a,
        one.clone(),
        b.clone(),
        half,
        one - b,
    ];
    OneDFunction::new(8, 4, values).expect("family member is well formed")
}

/// The average of the family members `(a, b) = (1/4, 3/4)` and
/// `(3/4, 1/4)`, i.e. the lift of `(0, 1/2, 1/2, 1/2, 1, 1/2, 1/2, 1/2)`.
pub fn averaged_pair_seed() -> OneDFunction<Rat> {
    let half = Rat::from_ratio(1, 2);
    eighths_family(half.clone(), half)
}

pub fn averaged_pair_example() -> PLFunction<Rat> {
    diagonal_lift(&averaged_pair_seed())
}

/// Named corpus used by the integration suites and the `gen` subcommand.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub function: PLFunction<Rat>,
}

fn entry(name: &str, function: PLFunction<Rat>) -> CorpusEntry {
    CorpusEntry {
        name: name.to_string(),
        function,
    }
}

fn grid(q: u32, f: (i64, i64), values: &[(i64, i64)]) -> PLFunction<Rat> {
    PLFunction::new(
        q,
        1,
        GridPoint::new(f.0, f.1, 1, q),
        values.iter().map(|&(n, d)| Rat::from_ratio(n, d)).collect(),
    )
    .expect("corpus function is well formed")
}

/// The committed corpus. All members are minimal.
pub fn corpus() -> Vec<CorpusEntry> {
    let g = |q: u32, r: i64| diagonal_lift(&gmic(q, Rat::from_ratio(r, i64::from(q))).unwrap());
    let quarter = Rat::from_ratio(1, 4);
    let three_quarters = Rat::from_ratio(3, 4);
    vec![
        entry("gmic_q2_f1", g(2, 1)),
        entry("gmic_q3_f1", g(3, 1)),
        entry("gmic_q3_f2", g(3, 2)),
        entry("gmic_q4_f1", g(4, 1)),
        entry("gmic_q4_f2", g(4, 2)),
        entry("gmic_q4_f3", g(4, 3)),
        entry("gmic_q5_f2", g(5, 2)),
        entry("averaged_pair_q8", averaged_pair_example()),
        entry(
            "eighths_q8_a1_b3",
            diagonal_lift(&eighths_family(quarter.clone(), three_quarters.clone())),
        ),
        entry(
            "eighths_q8_a3_b1",
            diagonal_lift(&eighths_family(three_quarters, quarter)),
        ),
        entry(
            "horizontal_gmic_q3_f1",
            horizontal_lift(&gmic(3, Rat::from_ratio(1, 3)).unwrap()),
        ),
        entry(
            "separable_q3_f1_f2",
            separable_average(
                &gmic(3, Rat::from_ratio(1, 3)).unwrap(),
                &gmic(3, Rat::from_ratio(2, 3)).unwrap(),
            )
            .unwrap(),
        ),
        // Averages of several vertices of the minimal polytope; they keep
        // only the additivity shared by all of them.
        entry(
            "interior_q3_f10",
            grid(
                3,
                (1, 0),
                &[
                    (0, 1),
                    (5, 12),
                    (5, 12),
                    (1, 1),
                    (7, 12),
                    (7, 12),
                    (1, 2),
                    (1, 2),
                    (1, 2),
                ],
            ),
        ),
        entry(
            "interior_q3_f11",
            grid(
                3,
                (1, 1),
                &[
                    (0, 1),
                    (1, 2),
                    (1, 2),
                    (1, 2),
                    (1, 1),
                    (1, 2),
                    (1, 2),
                    (1, 2),
                    (1, 2),
                ],
            ),
        ),
        entry(
            "interior_q4_f10",
            grid(
                4,
                (1, 0),
                &[
                    (0, 1),
                    (31, 72),
                    (7, 36),
                    (11, 24),
                    (1, 1),
                    (13, 24),
                    (29, 36),
                    (41, 72),
                    (1, 3),
                    (31, 72),
                    (5, 12),
                    (37, 72),
                    (2, 3),
                    (35, 72),
                    (7, 12),
                    (41, 72),
                ],
            ),
        ),
        entry(
            "interior_q4_f21",
            grid(
                4,
                (2, 1),
                &[
                    (0, 1),
                    (5, 12),
                    (5, 12),
                    (3, 4),
                    (3, 8),
                    (5, 8),
                    (37, 72),
                    (35, 72),
                    (7, 12),
                    (1, 1),
                    (1, 4),
                    (7, 12),
                    (37, 72),
                    (35, 72),
                    (7, 24),
                    (17, 24),
                ],
            ),
        ),
    ]
}
