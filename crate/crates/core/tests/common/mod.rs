//! Oracles shared by the integration suites. Nothing here goes through the
//! library's lattice tables, slack tables or elimination code.

#![allow(dead_code)]

use std::collections::BTreeSet;

use groupext::scalar::rat;
use groupext::{Complex, Face, Function, GridPoint, Point, Rat};
use num_bigint::BigInt;
use num_traits::Zero;

/// The torus point `(i, j) / side`.
pub fn pt(i: i64, j: i64, side: i64) -> Point {
    Point::new(rat(i, side), rat(j, side))
}

/// `π(x) + π(y) - π(x ⊕ y)` through point evaluation only.
pub fn slack(pi: &Function, x: &Point, y: &Point) -> Rat {
    pi.eval(x) + pi.eval(y) - pi.eval(&x.oplus(y))
}

/// Homogeneous rows of the finite system on the `(1/side)`-grid: the
/// values at `0` and `f` vanish, and every zero-slack pair of `π` is
/// additive. Rows are sparse `(variable, coefficient)` lists with
/// variables numbered `i * side + j`.
pub fn homogeneous_rows(pi: &Function, side: i64) -> Vec<Vec<(usize, i64)>> {
    let idx = |i: i64, j: i64| (i.rem_euclid(side) * side + j.rem_euclid(side)) as usize;
    let f = pi.f();
    let fs = i64::from(f.side());
    let (fi, fj) = (i64::from(f.i) * side / fs, i64::from(f.j) * side / fs);
    let mut rows: BTreeSet<Vec<(usize, i64)>> = BTreeSet::new();
    rows.insert(vec![(0, 1)]);
    rows.insert(vec![(idx(fi, fj), 1)]);
    let pts: Vec<(i64, i64, Point)> = (0..side)
        .flat_map(|i| (0..side).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, pt(i, j, side)))
        .collect();
    let vals: Vec<Rat> = pts.iter().map(|(_, _, p)| pi.eval(p)).collect();
    for a in 0..pts.len() {
        for b in a..pts.len() {
            let (ui, uj, _) = pts[a];
            let (vi, vj, _) = pts[b];
            let w = idx(ui + vi, uj + vj);
            if vals[a].clone() + vals[b].clone() - vals[w].clone() != Rat::zero() {
                continue;
            }
            let mut row = std::collections::BTreeMap::new();
            *row.entry(a).or_insert(0) += 1;
            *row.entry(b).or_insert(0) += 1;
            *row.entry(w).or_insert(0) -= 1;
            let row: Vec<(usize, i64)> = row.into_iter().filter(|&(_, c)| c != 0).collect();
            if !row.is_empty() {
                rows.insert(row);
            }
        }
    }
    rows.into_iter().collect()
}

/// `A^T A` for sparse integer rows over `nvars` variables.
pub fn gram(rows: &[Vec<(usize, i64)>], nvars: usize) -> Vec<Vec<BigInt>> {
    let mut g = vec![vec![0i64; nvars]; nvars];
    for r in rows {
        for &(a, x) in r {
            for &(b, y) in r {
                g[a][b] += x * y;
            }
        }
    }
    g.into_iter()
        .map(|r| r.into_iter().map(BigInt::from).collect())
        .collect()
}

/// Rank by fraction-free (Bareiss) elimination with row pivoting.
pub fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut prev = BigInt::from(1);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..rows {
            for k in c + 1..cols {
                let v = (&m[i][k] * &m[r][c] - &m[i][c] * &m[r][k]) / &prev;
                m[i][k] = v;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// The closed face as a set of points of the `(1/(n q))`-grid.
pub fn face_points(cx: &Complex, face: Face, n: u32) -> BTreeSet<GridPoint> {
    cx.grid_points_in_face(face, n).into_iter().collect()
}
