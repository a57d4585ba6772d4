//! Exact rational arithmetic, integer lattices and rational LP feasibility.
//!
//! Everything here is exact; there is no floating point anywhere in the crate.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number, always kept in lowest terms.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix rows have unequal length")]
    Ragged,
    #[error("empty matrix")]
    Empty,
    #[error("cannot parse rational `{0}`")]
    BadRational(String),
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `a` or `a/b` with optional sign.
pub fn parse_rational(s: &str) -> Result<Rational, ExactError> {
    let s = s.trim();
    let bad = || ExactError::BadRational(s.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(n))
        }
    }
}

/// Canonical printing: `n` for integers, `n/d` otherwise.
pub fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Rectangular integer matrix stored by rows.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: Vec<Vec<BigInt>>,
    ncols: usize,
}

impl IntMatrix {
    pub fn new(rows: Vec<Vec<BigInt>>, ncols: usize) -> Result<Self, ExactError> {
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(ExactError::Ragged);
        }
        Ok(IntMatrix { rows, ncols })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self, ExactError> {
        let ncols = rows.first().map_or(0, |r| r.len());
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
            ncols,
        )
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            BigInt::one()
                        } else {
                            BigInt::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        IntMatrix { rows, ncols: n }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<BigInt>> {
        self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.rows[i][j]
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, ExactError> {
        if self.ncols != other.nrows() {
            return Err(ExactError::DimensionMismatch {
                expected: self.ncols,
                found: other.nrows(),
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                (0..other.ncols)
                    .map(|j| {
                        r.iter()
                            .zip(&other.rows)
                            .fold(BigInt::zero(), |acc, (a, row)| acc + a * &row[j])
                    })
                    .collect()
            })
            .collect();
        Ok(IntMatrix {
            rows,
            ncols: other.ncols,
        })
    }

    /// Determinant of a square matrix (Bareiss fraction-free elimination).
    pub fn det(&self) -> Result<BigInt, ExactError> {
        let n = self.nrows();
        if n != self.ncols {
            return Err(ExactError::DimensionMismatch {
                expected: n,
                found: self.ncols,
            });
        }
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut m = self.rows.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                    Some(i) => {
                        m.swap(i, k);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = v / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        Ok(sign * &m[n - 1][n - 1])
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, x) in r.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Row Hermite normal form: returns `(h, u)` with `h = u * m`, `u` unimodular,
/// `h` upper echelon with positive pivots and entries above each pivot in `[0, pivot)`.
/// Zero rows of `h` are placed last.
pub fn hnf(m: &IntMatrix) -> Result<(IntMatrix, IntMatrix), ExactError> {
    if m.nrows() == 0 {
        return Err(ExactError::Empty);
    }
    let nr = m.nrows();
    let nc = m.ncols();
    let mut h = m.rows.clone();
    let mut u = IntMatrix::identity(nr).rows;
    let mut pivot_row = 0usize;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for col in 0..nc {
        if pivot_row >= nr {
            break;
        }
        loop {
            // smallest nonzero |entry| at or below pivot_row
            let best = (pivot_row..nr)
                .filter(|&i| !h[i][col].is_zero())
                .min_by(|&a, &b| h[a][col].abs().cmp(&h[b][col].abs()).then(a.cmp(&b)));
            let Some(best) = best else { break };
            h.swap(pivot_row, best);
            u.swap(pivot_row, best);
            let mut done = true;
            for i in pivot_row + 1..nr {
                if h[i][col].is_zero() {
                    continue;
                }
                let q = h[i][col].div_floor(&h[pivot_row][col]);
                row_sub(&mut h, i, pivot_row, &q);
                row_sub(&mut u, i, pivot_row, &q);
                if !h[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[pivot_row][col].is_zero() {
            continue;
        }
        if h[pivot_row][col].is_negative() {
            for x in h[pivot_row].iter_mut() {
                *x = -x.clone();
            }
            for x in u[pivot_row].iter_mut() {
                *x = -x.clone();
            }
        }
        pivots.push((pivot_row, col));
        pivot_row += 1;
    }
    // reduce entries above pivots
    for &(pr, col) in &pivots {
        for i in 0..pr {
            let q = h[i][col].div_floor(&h[pr][col]);
            if !q.is_zero() {
                row_sub(&mut h, i, pr, &q);
                row_sub(&mut u, i, pr, &q);
            }
        }
    }
    Ok((
        IntMatrix { rows: h, ncols: nc },
        IntMatrix { rows: u, ncols: nr },
    ))
}

fn row_sub(m: &mut [Vec<BigInt>], target: usize, src: usize, q: &BigInt) {
    let (t, s) = if target < src {
        let (a, b) = m.split_at_mut(src);
        (&mut a[target], &b[0])
    } else {
        let (a, b) = m.split_at_mut(target);
        (&mut b[0], &a[src])
    };
    for (x, y) in t.iter_mut().zip(s.iter()) {
        *x -= q * y;
    }
}

/// Nonzero rows of the HNF of `m` (a canonical basis of the row lattice).
pub fn hnf_basis(m: &IntMatrix) -> Result<IntMatrix, ExactError> {
    if m.nrows() == 0 {
        return Ok(IntMatrix {
            rows: Vec::new(),
            ncols: m.ncols(),
        });
    }
    let (h, _) = hnf(m)?;
    let ncols = h.ncols();
    let rows = h
        .rows
        .into_iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    Ok(IntMatrix { rows, ncols })
}

/// Integer left kernel of `m`: a basis of `{x in Z^rows : x * m = 0}`.
pub fn integer_left_kernel(m: &IntMatrix) -> Result<Vec<Vec<BigInt>>, ExactError> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let (h, u) = hnf(m)?;
    Ok(h.rows
        .iter()
        .zip(u.rows)
        .filter(|(r, _)| r.iter().all(|x| x.is_zero()))
        .map(|(_, ur)| ur)
        .collect())
}

/// Decides whether `v` lies in the lattice `(1/denom) * rowspan(basis)`.
pub fn lattice_member(
    v: &[Rational],
    basis: &IntMatrix,
    denom: &BigInt,
) -> Result<bool, ExactError> {
    if v.len() != basis.ncols() {
        return Err(ExactError::DimensionMismatch {
            expected: basis.ncols(),
            found: v.len(),
        });
    }
    let d = Rational::from_integer(denom.clone());
    let mut w = Vec::with_capacity(v.len());
    for x in v {
        let y = x * &d;
        if !y.is_integer() {
            return Ok(false);
        }
        w.push(y.to_integer());
    }
    let h = hnf_basis(basis)?;
    lattice_coords_hnf(&w, &h).map(|c| c.is_some())
}

/// Integer coordinates of `w` with respect to the rows of an HNF basis, if any.
pub fn lattice_coords_hnf(w: &[BigInt], h: &IntMatrix) -> Result<Option<Vec<BigInt>>, ExactError> {
    if w.len() != h.ncols() {
        return Err(ExactError::DimensionMismatch {
            expected: h.ncols(),
            found: w.len(),
        });
    }
    let mut rest: Vec<BigInt> = w.to_vec();
    let mut coords = Vec::with_capacity(h.nrows());
    for row in h.rows() {
        let Some(p) = row.iter().position(|x| !x.is_zero()) else {
            coords.push(BigInt::zero());
            continue;
        };
        let (q, r) = rest[p].div_rem(&row[p]);
        if !r.is_zero() {
            return Ok(None);
        }
        for (x, y) in rest.iter_mut().zip(row) {
            *x -= &q * y;
        }
        coords.push(q);
    }
    if rest.iter().all(|x| x.is_zero()) {
        Ok(Some(coords))
    } else {
        Ok(None)
    }
}

/// Rank of a rational matrix given by rows.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    rref(&mut m).len()
}

/// Reduces `m` in place to reduced row echelon form and returns pivot columns.
pub fn rref(m: &mut Vec<Vec<Rational>>) -> Vec<usize> {
    let nrows = m.len();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r >= nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..nrows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pr = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(pr.iter()) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

/// Basis of the right null space `{x : rows * x = 0}` of a matrix with `ncols` columns.
pub fn nullspace(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Rational::zero(); ncols];
            x[f] = Rational::one();
            for (i, &p) in pivots.iter().enumerate() {
                x[p] = -m[i][f].clone();
            }
            x
        })
        .collect()
}

/// Solves `sum_i c_i * rows[i] = target` for rational `c`, if a solution exists.
pub fn solve_combination(rows: &[Vec<Rational>], target: &[Rational]) -> Option<Vec<Rational>> {
    let n = rows.len();
    let dim = target.len();
    // augmented system: columns are rows[i], plus target
    let mut m: Vec<Vec<Rational>> = (0..dim)
        .map(|k| {
            let mut r: Vec<Rational> = rows.iter().map(|row| row[k].clone()).collect();
            r.push(target[k].clone());
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.contains(&n) {
        return None;
    }
    let mut c = vec![Rational::zero(); n];
    for (i, &p) in pivots.iter().enumerate() {
        c[p] = m[i][n].clone();
    }
    Some(c)
}

/// Scales a rational vector to the primitive integer vector on the same ray.
pub fn primitive_integer(v: &[Rational]) -> Vec<BigInt> {
    let l = lcm_of_denominators(v.iter());
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| (x * Rational::from_integer(l.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Exact feasibility of `{x >= 0 : a * x = b}` by phase-one simplex with Bland's rule.
/// `a` is given by rows; every row has the same number of columns.
pub fn lp_feasible(a: &[Vec<Rational>], b: &[Rational]) -> bool {
    let m = a.len();
    if m == 0 {
        return true;
    }
    let n = a[0].len();
    // tableau rows: [x_1..x_n, art_1..art_m | rhs]
    let width = n + m + 1;
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row = vec![Rational::zero(); width];
        for j in 0..n {
            row[j] = if flip {
                -a[i][j].clone()
            } else {
                a[i][j].clone()
            };
        }
        row[n + i] = Rational::one();
        row[width - 1] = if flip { -b[i].clone() } else { b[i].clone() };
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // objective: minimize sum of artificials; reduced costs c_j - c_B B^-1 A_j
    loop {
        let mut cost = vec![Rational::zero(); width];
        for c in &mut cost[n..n + m] {
            *c = Rational::one();
        }
        let mut reduced = cost.clone();
        for (i, &bi) in basis.iter().enumerate() {
            if !cost[bi].is_zero() {
                for j in 0..width {
                    reduced[j] = &reduced[j] - &cost[bi] * &t[i][j];
                }
            }
        }
        // reduced[width-1] is -objective
        let Some(enter) = (0..n + m).find(|&j| reduced[j].is_negative()) else {
            return reduced[width - 1].is_zero();
        };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((li, _)) = leave else {
            // unbounded direction cannot occur for a phase-one objective bounded below
            return reduced[width - 1].is_zero();
        };
        let piv = t[li][enter].clone();
        for x in t[li].iter_mut() {
            *x /= &piv;
        }
        let prow = t[li].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != li && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (x, y) in row.iter_mut().zip(prow.iter()) {
                    *x -= &f * y;
                }
            }
        }
        basis[li] = enter;
    }
}
