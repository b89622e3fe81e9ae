//! Exact simplex for the homogeneous feasibility problems that arise in
//! region synthesis.
//!
//! The system solved is
//!
//! ```text
//! find x ≥ 0 with  row·x ≥ 0  for every row,  target·x ≥ 1
//! ```
//!
//! Because everything but the target constraint is homogeneous, the problem
//! is feasible iff `max target·x` subject to the rows and `target·x ≤ 1` is
//! positive. Starting from `x = 0` (always feasible) the primal simplex
//! climbs with Bland's rule and stops at the first strictly positive
//! objective value; the basic solution is then scaled to integers.
//!
//! Arithmetic is exact. Each solve first runs over `i64` rationals with
//! checked operations; on any overflow it restarts over arbitrary-precision
//! rationals, so the verdict never depends on machine word size.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, One, Signed, Zero};

/// Field operations that may fail on overflow.
trait Exact: Clone {
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn add(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn div(&self, o: &Self) -> Option<Self>;
    fn neg(&self) -> Self;
    fn lt(&self, o: &Self) -> bool;
    fn to_big(&self) -> BigRational;
}

impl Exact for Ratio<i64> {
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        self.checked_div(o)
    }
    fn neg(&self) -> Self {
        // denominators are positive and numerators never reach i64::MIN
        // (every value passes through a checked op first)
        Ratio::new_raw(-*self.numer(), *self.denom())
    }
    fn lt(&self, o: &Self) -> bool {
        self < o
    }
    fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }
}

impl Exact for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn lt(&self, o: &Self) -> bool {
        self < o
    }
    fn to_big(&self) -> BigRational {
        self.clone()
    }
}

struct Overflow;

/// Dictionary-form tableau: every basic variable is an affine function of
/// the nonbasic ones. Column 0 of each row is the constant term.
struct Dictionary<T> {
    rows: Vec<Vec<T>>,
    objective: Vec<T>,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
}

impl<T: Exact> Dictionary<T> {
    fn new(n: usize, rows: &[Vec<i64>], target: &[i64]) -> Self {
        let zero = T::from_i64(0);
        let mut dict_rows = Vec::with_capacity(rows.len() + 1);
        for r in rows {
            let mut row = Vec::with_capacity(n + 1);
            row.push(zero.clone());
            row.extend(r.iter().map(|&v| T::from_i64(v)));
            dict_rows.push(row);
        }
        let mut cap = Vec::with_capacity(n + 1);
        cap.push(T::from_i64(1));
        cap.extend(target.iter().map(|&v| T::from_i64(-v)));
        dict_rows.push(cap);
        let mut objective = Vec::with_capacity(n + 1);
        objective.push(zero);
        objective.extend(target.iter().map(|&v| T::from_i64(v)));
        Dictionary {
            basic: (n..n + dict_rows.len()).collect(),
            nonbasic: (0..n).collect(),
            rows: dict_rows,
            objective,
        }
    }

    /// Runs simplex iterations until the objective turns positive (returns
    /// the scaled structural solution) or is proven to be zero at optimum.
    fn run(&mut self, n: usize) -> Result<Option<Vec<BigRational>>, Overflow> {
        loop {
            if self.objective[0].is_positive() {
                return Ok(Some(self.solution(n)));
            }
            // Bland: smallest-label improving variable enters
            let Some(col) = (1..self.objective.len())
                .filter(|&c| self.objective[c].is_positive())
                .min_by_key(|&c| self.nonbasic[c - 1])
            else {
                return Ok(None);
            };
            let mut best: Option<(usize, T)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[col].is_negative() {
                    continue;
                }
                let ratio = row[0].div(&row[col].neg()).ok_or(Overflow)?;
                let better = match &best {
                    None => true,
                    Some((br, b)) => {
                        ratio.lt(b) || (!b.lt(&ratio) && self.basic[r] < self.basic[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            // the cap row bounds the objective, so some row always blocks
            let (row, _) = best.expect("objective is bounded by the cap row");
            self.pivot(row, col)?;
        }
    }

    fn pivot(&mut self, r: usize, c: usize) -> Result<(), Overflow> {
        let a = self.rows[r][c].clone();
        let inv = T::from_i64(1).div(&a).ok_or(Overflow)?;
        let neg_inv = inv.neg();
        let mut new_row = Vec::with_capacity(self.rows[r].len());
        for (k, v) in self.rows[r].iter().enumerate() {
            if k == c {
                new_row.push(inv.clone());
            } else if v.is_zero() {
                new_row.push(v.clone());
            } else {
                new_row.push(v.mul(&neg_inv).ok_or(Overflow)?);
            }
        }
        let substitute = |row: &mut Vec<T>| -> Result<(), Overflow> {
            let f = row[c].clone();
            if f.is_zero() {
                return Ok(());
            }
            for (k, nv) in new_row.iter().enumerate() {
                if k == c {
                    row[k] = f.mul(nv).ok_or(Overflow)?;
                } else if !nv.is_zero() {
                    let delta = f.mul(nv).ok_or(Overflow)?;
                    row[k] = row[k].add(&delta).ok_or(Overflow)?;
                }
            }
            Ok(())
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                substitute(row)?;
            }
        }
        substitute(&mut self.objective)?;
        self.rows[r] = new_row;
        std::mem::swap(&mut self.basic[r], &mut self.nonbasic[c - 1]);
        Ok(())
    }

    fn solution(&self, n: usize) -> Vec<BigRational> {
        let z = self.objective[0].to_big();
        let mut x = vec![BigRational::zero(); n];
        for (row, &label) in self.rows.iter().zip(&self.basic) {
            if label < n {
                x[label] = row[0].to_big() / &z;
            }
        }
        x
    }
}

/// Finds a nonnegative integer vector `x` with `row·x ≥ 0` for all rows and
/// `target·x ≥ 1`, or `None` if no rational (hence no integer) solution exists.
pub fn solve_cone(n: usize, rows: &[Vec<i64>], target: &[i64]) -> Option<Vec<BigInt>> {
    debug_assert!(rows.iter().all(|r| r.len() == n) && target.len() == n);
    let rational = match Dictionary::<Ratio<i64>>::new(n, rows, target).run(n) {
        Ok(r) => r,
        Err(Overflow) => match Dictionary::<BigRational>::new(n, rows, target).run(n) {
            Ok(r) => r,
            Err(Overflow) => unreachable!("arbitrary precision never overflows"),
        },
    };
    rational.map(|x| to_integers(&x))
}

/// Scales a nonnegative rational vector by the lcm of its denominators.
fn to_integers(x: &[BigRational]) -> Vec<BigInt> {
    let lcm = x
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    x.iter()
        .map(|v| v.numer() * (&lcm / v.denom()))
        .collect()
}
