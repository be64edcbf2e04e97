//! Continuous piecewise linear functions over `P_{nq}`, stored by their
//! values on the lattice `(1/(nq)) Z^2`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{GridPoint, TorusPoint};
use crate::scalar::Scalar;

/// A continuous piecewise linear function on the torus, affine on every
/// triangle of `P_{nq}`. `f` is the right-hand side point, stored on the
/// function's own lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct PLFunction<S> {
    q: u32,
    n: u32,
    f: GridPoint,
    values: Vec<S>,
}

impl<S: Scalar> PLFunction<S> {
    /// Builds a function from row-major values indexed by [`GridPoint::index`].
    pub fn new(q: u32, n: u32, f: GridPoint, values: Vec<S>) -> Result<Self> {
        if q == 0 || n == 0 {
            return Err(Error::InvalidFunction("q and n must be positive".into()));
        }
        if (f.n, f.q) != (n, q) {
            return Err(Error::InvalidFunction(format!(
                "f must be given on the resolution-{n} grid of q={q}"
            )));
        }
        let side = (n * q) as usize;
        if values.len() != side * side {
            return Err(Error::InvalidFunction(format!(
                "expected {} values, got {}",
                side * side,
                values.len()
            )));
        }
        if !values[0].is_zero() {
            return Err(Error::InvalidFunction(
                "value at the origin must be 0".into(),
            ));
        }
        Ok(PLFunction { q, n, f, values })
    }

    pub fn from_fn(
        q: u32,
        n: u32,
        f: GridPoint,
        mut value: impl FnMut(GridPoint) -> S,
    ) -> Result<Self> {
        let side = (n * q) as usize;
        let values = (0..side * side)
            .map(|k| value(GridPoint::from_index(k, n, q)))
            .collect();
        Self::new(q, n, f, values)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Lattice size `nq` along each axis.
    pub fn side(&self) -> u32 {
        self.n * self.q
    }

    pub fn num_points(&self) -> usize {
        self.values.len()
    }

    pub fn f(&self) -> GridPoint {
        self.f
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn point(&self, index: usize) -> GridPoint {
        GridPoint::from_index(index, self.n, self.q)
    }

    pub fn points(&self) -> impl Iterator<Item = GridPoint> + '_ {
        (0..self.values.len()).map(|k| self.point(k))
    }

    pub fn value(&self, p: GridPoint) -> &S {
        debug_assert_eq!((p.n, p.q), (self.n, self.q));
        &self.values[p.index()]
    }

    fn at(&self, i: i64, j: i64) -> &S {
        let side = i64::from(self.side());
        let k = i.rem_euclid(side) * side + j.rem_euclid(side);
        &self.values[k as usize]
    }

    /// Affine interpolation at `(i + a/den, j + b/den)` in lattice units.
    fn interpolate(&self, i: i64, j: i64, a: S, b: S) -> S {
        let one = S::one();
        let s = a.clone() + b.clone();
        if s <= one {
            self.at(i, j).clone() * (one - s)
                + self.at(i + 1, j).clone() * a
                + self.at(i, j + 1).clone() * b
        } else {
            self.at(i + 1, j + 1).clone() * (s - one.clone())
                + self.at(i + 1, j).clone() * (one.clone() - b)
                + self.at(i, j + 1).clone() * (one - a)
        }
    }

    /// Value at an arbitrary torus point.
    pub fn eval(&self, p: &TorusPoint<S>) -> S {
        let side = S::from_int(i64::from(self.side()));
        let y1 = p.x1.clone() * side.clone();
        let y2 = p.x2.clone() * side;
        let (i, j) = (y1.floor_i64(), y2.floor_i64());
        let a = y1 - S::from_int(i);
        let b = y2 - S::from_int(j);
        self.interpolate(i, j, a, b)
    }

    /// Value at a lattice point of any resolution of the same `q`.
    pub fn eval_grid(&self, p: GridPoint) -> S {
        debug_assert_eq!(p.q, self.q);
        if p.n == self.n {
            return self.value(p).clone();
        }
        // p = (p.i, p.j) / (p.n q); in our lattice units that is p.i * n / p.n.
        let (ni, nj) = (
            i64::from(p.i) * i64::from(self.n),
            i64::from(p.j) * i64::from(self.n),
        );
        let den = i64::from(p.n);
        let (i, j) = (ni.div_euclid(den), nj.div_euclid(den));
        let a = S::from_ratio(ni.rem_euclid(den), den);
        let b = S::from_ratio(nj.rem_euclid(den), den);
        self.interpolate(i, j, a, b)
    }

    pub fn delta(&self, u: &TorusPoint<S>, v: &TorusPoint<S>) -> S {
        self.eval(u) + self.eval(v) - self.eval(&u.oplus(v))
    }

    /// Slack at a pair of points on the function's own lattice.
    pub fn delta_grid(&self, u: GridPoint, v: GridPoint) -> S {
        self.value(u).clone() + self.value(v).clone() - self.value(u.oplus(&v)).clone()
    }

    /// The same function sampled on a lattice `factor` times finer.
    pub fn refine(&self, factor: u32) -> PLFunction<S> {
        assert!(factor >= 1);
        if factor == 1 {
            return self.clone();
        }
        let n = self.n * factor;
        let side = (n * self.q) as usize;
        let values = (0..side * side)
            .into_par_iter()
            .map(|k| self.eval_grid(GridPoint::from_index(k, n, self.q)))
            .collect();
        PLFunction {
            q: self.q,
            n,
            f: self.f.refined(factor),
            values,
        }
    }

    /// Resamples at resolution one, succeeding only when the function is
    /// already affine on every triangle of `P_q`.
    pub fn coarsen(&self) -> Option<PLFunction<S>> {
        if self.n == 1 {
            return Some(self.clone());
        }
        if !self.f.is_vertex() {
            return None;
        }
        let side = self.q as usize;
        let values: Vec<S> = (0..side * side)
            .map(|k| {
                let p = GridPoint::from_index(k, 1, self.q);
                self.value(p.refined(self.n)).clone()
            })
            .collect();
        let f = GridPoint::new(
            i64::from(self.f.i / self.n),
            i64::from(self.f.j / self.n),
            1,
            self.q,
        );
        let coarse = PLFunction {
            q: self.q,
            n: 1,
            f,
            values,
        };
        (coarse.refine(self.n) == *self).then_some(coarse)
    }

    /// Views the lattice `(1/(nq)) Z^2` as the vertex set of `P_{nq}`.
    pub fn as_unit_resolution(&self) -> PLFunction<S> {
        let q = self.n * self.q;
        PLFunction {
            q,
            n: 1,
            f: GridPoint {
                i: self.f.i,
                j: self.f.j,
                n: 1,
                q,
            },
            values: self.values.clone(),
        }
    }

    /// `self + scale * other`, both on the same lattice.
    pub fn add_scaled(&self, other: &PLFunction<S>, scale: &S) -> Result<PLFunction<S>> {
        if (self.q, self.n) != (other.q, other.n) {
            return Err(Error::Precondition(
                "functions live on different lattices".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.clone() + scale.clone() * b.clone())
            .collect();
        PLFunction::new(self.q, self.n, self.f, values)
    }

    /// The function `x -> self(x2, x1)` with `f` swapped accordingly.
    pub fn swapped(&self) -> PLFunction<S> {
        let f = GridPoint {
            i: self.f.j,
            j: self.f.i,
            ..self.f
        };
        let mut out = self.clone();
        out.f = f;
        for p in self.points() {
            let t = GridPoint {
                i: p.j,
                j: p.i,
                ..p
            };
            out.values[t.index()] = self.value(p).clone();
        }
        out
    }

    pub fn max_abs(&self) -> S {
        self.values
            .iter()
            .map(|v| v.abs())
            .fold(S::zero(), |m, v| if v > m { v } else { m })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }
}

/// All slacks `Δπ(u, v) = π(u) + π(v) - π(u ⊕ v)` over pairs of lattice
/// points of one resolution, materialized once.
#[derive(Clone, Debug)]
pub struct SlackTable<S> {
    q: u32,
    n: u32,
    points: usize,
    table: Vec<S>,
}

impl<S: Scalar> SlackTable<S> {
    pub fn new(pi: &PLFunction<S>) -> Self {
        let points = pi.num_points();
        let mut table = vec![S::zero(); points * points];
        table
            .par_chunks_mut(points)
            .enumerate()
            .for_each(|(ui, row)| {
                let u = pi.point(ui);
                for (vi, slot) in row.iter_mut().enumerate() {
                    *slot = pi.delta_grid(u, pi.point(vi));
                }
            });
        SlackTable {
            q: pi.q(),
            n: pi.n(),
            points,
            table,
        }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn num_points(&self) -> usize {
        self.points
    }

    pub fn get(&self, u: GridPoint, v: GridPoint) -> &S {
        self.get_index(u.index(), v.index())
    }

    pub fn get_index(&self, u: usize, v: usize) -> &S {
        &self.table[u * self.points + v]
    }

    pub fn is_zero_index(&self, u: usize, v: usize) -> bool {
        self.get_index(u, v).is_zero()
    }

    /// Smallest strictly positive slack, if any.
    pub fn min_positive(&self) -> Option<S> {
        self.table
            .par_iter()
            .filter(|s| s.is_positive())
            .cloned()
            .reduce_with(|a, b| if b < a { b } else { a })
    }

    /// Unordered pairs `u <= v` (by index) with zero slack, sorted.
    pub fn zero_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.points {
            for v in u..self.points {
                if self.is_zero_index(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

/// The slack floor `ε`: the minimum positive `Δπ` over pairs of the
/// `(1/(4q))`-lattice.
pub fn min_positive_slack<S: Scalar>(pi: &PLFunction<S>) -> Result<S> {
    let fine;
    let at4 = if pi.n().is_multiple_of(4) {
        pi
    } else {
        fine = pi.refine(4);
        &fine
    };
    SlackTable::new(at4)
        .min_positive()
        .ok_or(Error::EverywhereAdditive)
}
