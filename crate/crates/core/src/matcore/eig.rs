//! General complex eigendecomposition: Householder reduction to Hessenberg
//! form, shifted QR to a complex Schur form, then back-substitution for the
//! eigenvectors of the triangular factor.

use alloc::vec::Vec;

use num_complex::Complex64;
// f64 math comes from libm unless std happens to be linked
#[allow(unused_imports)]
use num_traits::Float;

use super::lu::Lu;
use super::{CMatrix, MatConfig, ONE, ZERO};
use crate::error::{Error, Result};

/// `A = V · diag(λ) · V⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<Complex64>,
    /// Columns are unit-norm right eigenvectors.
    pub vectors: CMatrix,
    /// Inverse of `vectors`; its rows are the left eigenvectors.
    pub inverse: CMatrix,
}

impl EigDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V · diag(f(λ_k)) · V⁻¹`.
    pub fn map(&self, f: impl FnMut(Complex64) -> Complex64) -> CMatrix {
        let d: Vec<Complex64> = self.eigenvalues.iter().copied().map(f).collect();
        self.with_diag(&d)
    }

    /// Fallible version of [`map`](Self::map).
    pub fn try_map<E>(
        &self,
        f: impl FnMut(Complex64) -> core::result::Result<Complex64, E>,
    ) -> core::result::Result<CMatrix, E> {
        let d = self
            .eigenvalues
            .iter()
            .copied()
            .map(f)
            .collect::<core::result::Result<Vec<_>, E>>()?;
        Ok(self.with_diag(&d))
    }

    /// `V · diag(d) · V⁻¹`.
    pub fn with_diag(&self, d: &[Complex64]) -> CMatrix {
        &self.vectors.mul_diag_right(d) * &self.inverse
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.with_diag(&self.eigenvalues)
    }

    /// `‖V·V⁻¹ − I‖_F`.
    pub fn inverse_defect(&self) -> f64 {
        (&(&self.vectors * &self.inverse) - &CMatrix::identity(self.dim())).frobenius_norm()
    }
}

pub fn eig_general(a: &CMatrix) -> Result<EigDecomposition> {
    eig_general_with(a, &MatConfig::default())
}

pub fn eig_general_with(a: &CMatrix, cfg: &MatConfig) -> Result<EigDecomposition> {
    a.ensure_finite("eigendecomposition input")?;
    let n = a.dim();
    if n == 0 {
        return Ok(EigDecomposition {
            eigenvalues: Vec::new(),
            vectors: CMatrix::zeros(0),
            inverse: CMatrix::zeros(0),
        });
    }
    let (mut t, mut z) = hessenberg(a);
    schur(&mut t, &mut z, cfg)?;
    let vectors = &z * &triangular_eigenvectors(&t);
    let vectors = normalize_columns(vectors);
    let lu = Lu::new(&vectors).map_err(|_| Error::NonDiagonalizable {
        condition: f64::INFINITY,
    })?;
    let inverse = lu.inverse();
    let condition = vectors.norm_one() * inverse.norm_one();
    if !condition.is_finite() || condition > cfg.condition_limit {
        return Err(Error::NonDiagonalizable { condition });
    }
    Ok(EigDecomposition {
        eigenvalues: t.diag(),
        vectors,
        inverse,
    })
}

/// Returns `(H, Q)` with `A = Q·H·Q†` and `H` upper Hessenberg.
fn hessenberg(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.dim();
    let mut h = a.clone();
    let mut q = CMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // H ← (I − 2vv†) H
        for j in 0..n {
            let s: Complex64 = v
                .iter()
                .enumerate()
                .map(|(r, vr)| vr.conj() * h[(k + 1 + r, j)])
                .sum();
            for (r, vr) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= *vr * s * 2.0;
            }
        }
        // H ← H (I − 2vv†), Q ← Q (I − 2vv†)
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let s: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(r, vr)| m[(i, k + 1 + r)] * vr)
                    .sum();
                for (r, vr) in v.iter().enumerate() {
                    m[(i, k + 1 + r)] -= s * vr.conj() * 2.0;
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Rotation `[[c, s], [−s̄, c]]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let norm = na.hypot(nb);
    (na / norm, (a / na) * b.conj() / norm)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let (m1, m2) = (mean + disc, mean - disc);
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Reduces Hessenberg `t` to upper-triangular Schur form in place,
/// accumulating the unitary similarity into `z`.
fn schur(t: &mut CMatrix, z: &mut CMatrix, cfg: &MatConfig) -> Result<()> {
    let n = t.dim();
    let scale = t.frobenius_norm().max(f64::MIN_POSITIVE);
    let max_total = cfg.qr_sweeps_per_eigenvalue * n;
    let mut total = 0;
    let mut since_deflation = 0;
    let mut hi = n - 1;
    let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(n);
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let off = t[(lo, lo - 1)].norm();
            let mut diag = t[(lo - 1, lo - 1)].norm() + t[(lo, lo)].norm();
            if diag == 0.0 {
                diag = scale;
            }
            if off <= f64::EPSILON * diag {
                t[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > max_total {
            return Err(Error::NoConvergence { iterations: total });
        }
        let shift = if since_deflation % 11 == 0 {
            t[(hi, hi)] + t[(hi, hi - 1)].norm() * 0.75
        } else {
            wilkinson_shift(
                t[(hi - 1, hi - 1)],
                t[(hi - 1, hi)],
                t[(hi, hi - 1)],
                t[(hi, hi)],
            )
        };
        for i in lo..=hi {
            t[(i, i)] -= shift;
        }
        rotations.clear();
        for k in lo..hi {
            let (c, s) = givens(t[(k, k)], t[(k + 1, k)]);
            rotations.push((c, s));
            for j in k..n {
                let (x, y) = (t[(k, j)], t[(k + 1, j)]);
                t[(k, j)] = x * c + s * y;
                t[(k + 1, j)] = -s.conj() * x + y * c;
            }
            t[(k + 1, k)] = ZERO;
        }
        for (off, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + off;
            let last = (k + 2).min(hi);
            for i in 0..=last {
                let (x, y) = (t[(i, k)], t[(i, k + 1)]);
                t[(i, k)] = x * c + y * s.conj();
                t[(i, k + 1)] = -x * s + y * c;
            }
            for i in 0..n {
                let (x, y) = (z[(i, k)], z[(i, k + 1)]);
                z[(i, k)] = x * c + y * s.conj();
                z[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in lo..=hi {
            t[(i, i)] += shift;
        }
    }
    Ok(())
}

/// Right eigenvectors of an upper-triangular matrix, as columns of an
/// upper-triangular matrix with unit diagonal.
fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let n = t.dim();
    let small = (f64::EPSILON * t.frobenius_norm()).max(f64::MIN_POSITIVE);
    let mut y = CMatrix::zeros(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = ONE;
        for i in (0..k).rev() {
            let mut s = ZERO;
            for j in i + 1..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            // scaled division: `denom` may be close to the underflow threshold
            y[(i, k)] = -s.fdiv(denom);
        }
    }
    y
}

fn normalize_columns(mut v: CMatrix) -> CMatrix {
    let n = v.dim();
    for j in 0..n {
        let norm = (0..n).map(|i| v[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for i in 0..n {
                v[(i, j)] /= norm;
            }
        }
    }
    v
}
