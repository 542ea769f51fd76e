use alloc::vec::Vec;

use super::{CMatrix, MatConfig, ZERO};
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P·A = L·U`.
#[derive(Debug, Clone)]
pub struct Lu {
    factors: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    /// Factorizes `a`. Fails only on an exactly zero pivot; conditioning is
    /// judged separately by the callers that care.
    pub fn new(a: &CMatrix) -> Result<Self> {
        a.ensure_finite("lu input")?;
        let n = a.dim();
        let mut f = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, f[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 {
                return Err(Error::SingularMatrix {
                    condition: f64::INFINITY,
                });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = f[(p, j)];
                    f[(p, j)] = f[(k, j)];
                    f[(k, j)] = tmp;
                }
            }
            let pivot = f[(k, k)];
            for i in k + 1..n {
                let m = f[(i, k)] / pivot;
                f[(i, k)] = m;
                if m == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = f[(k, j)];
                    f[(i, j)] -= m * u;
                }
            }
        }
        Ok(Self { factors: f, perm })
    }

    pub fn dim(&self) -> usize {
        self.factors.dim()
    }

    /// Solves `A·X = B` for every column of `b`.
    pub fn solve(&self, b: &CMatrix) -> CMatrix {
        let n = self.dim();
        assert_eq!(b.dim(), n, "dimension mismatch");
        let f = &self.factors;
        let mut x = CMatrix::from_fn(n, |i, j| b[(self.perm[i], j)]);
        for col in 0..n {
            for i in 0..n {
                let mut s = x[(i, col)];
                for k in 0..i {
                    s -= f[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, col)];
                for k in i + 1..n {
                    s -= f[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = s / f[(i, i)];
            }
        }
        x
    }

    pub fn inverse(&self) -> CMatrix {
        self.solve(&CMatrix::identity(self.dim()))
    }
}

/// `‖A‖₁·‖A⁻¹‖₁`, computed with an explicit inverse.
pub fn condition_one(a: &CMatrix) -> Result<f64> {
    let lu = Lu::new(a)?;
    Ok(a.norm_one() * lu.inverse().norm_one())
}

fn checked_lu(a: &CMatrix, cfg: &MatConfig) -> Result<(Lu, CMatrix)> {
    let lu = Lu::new(a)?;
    let inv = lu.inverse();
    let condition = a.norm_one() * inv.norm_one();
    if !condition.is_finite() || condition > cfg.condition_limit {
        return Err(Error::SingularMatrix { condition });
    }
    Ok((lu, inv))
}

/// Solves `A·X = B` with one step of iterative refinement.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    solve_with(a, b, &MatConfig::default())
}

pub fn solve_with(a: &CMatrix, b: &CMatrix, cfg: &MatConfig) -> Result<CMatrix> {
    b.ensure_dim(a.dim())?;
    b.ensure_finite("solve right-hand side")?;
    let (lu, _) = checked_lu(a, cfg)?;
    let mut x = lu.solve(b);
    let residual = b - &(a * &x);
    x += &lu.solve(&residual);
    x.ensure_finite("solve result")?;
    Ok(x)
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    inverse_with(a, &MatConfig::default())
}

pub fn inverse_with(a: &CMatrix, cfg: &MatConfig) -> Result<CMatrix> {
    let (lu, mut inv) = checked_lu(a, cfg)?;
    let residual = &CMatrix::identity(a.dim()) - &(a * &inv);
    inv += &lu.solve(&residual);
    Ok(inv)
}
