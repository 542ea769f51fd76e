use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matcore::{CMatrix, EigDecomposition};
use crate::special::scaled_exp1;
use crate::units::HBAR_EV_FS;

/// Distance from the real axis below which an eigenvalue counts as a pole on
/// the integration window.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// `∫_{eps_min}^{mu0} e^{iεt/ħ} / (ε − λ) dε` for a single complex `λ`.
///
/// At `t = 0` this is the difference of two principal logarithms. For
/// `t > 0` it is expressed through `g(z) = e^z E₁(z)` evaluated at both
/// window edges, plus the residue `2πi·e^{iλt/ħ}` when `λ` sits above the
/// window (the edge arguments then straddle the branch cut of `E₁`).
pub fn fermi_resolvent_scalar(lambda: Complex64, t: f64, mu0: f64, eps_min: f64) -> Result<Complex64> {
    if lambda.im.abs() < POLE_TOLERANCE && lambda.re >= eps_min && lambda.re <= mu0 {
        return Err(Error::PoleOnContour { eigenvalue: lambda });
    }
    let (a, b) = (eps_min, mu0);
    if t == 0.0 {
        return Ok((b - lambda).ln() - (a - lambda).ln());
    }
    let omega = t / HBAR_EV_FS;
    let i_omega = Complex64::new(0.0, omega);
    let lower = Complex64::from_polar(1.0, omega * a) * scaled_exp1(-i_omega * (a - lambda))?;
    let upper = Complex64::from_polar(1.0, omega * b) * scaled_exp1(-i_omega * (b - lambda))?;
    let mut value = lower - upper;
    if lambda.im > 0.0 && lambda.re > a && lambda.re < b {
        value += Complex64::new(0.0, 2.0 * PI) * (i_omega * lambda).exp();
    }
    Ok(value)
}

/// `V · diag(I_k) · V⁻¹` with `I_k` from [`fermi_resolvent_scalar`] applied
/// to each eigenvalue of the decomposed matrix.
pub fn fermi_resolvent_integral(
    decomp: &EigDecomposition,
    t: f64,
    mu0: f64,
    eps_min: f64,
) -> Result<CMatrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument("time must be finite and non-negative"));
    }
    if !(eps_min < mu0) {
        return Err(Error::InvalidArgument("eps_min must lie below mu0"));
    }
    decomp.try_map(|lambda| fermi_resolvent_scalar(lambda, t, mu0, eps_min))
}

/// Same as [`fermi_resolvent_integral`] for the decomposition shifted by
/// `shift·I`, without re-decomposing.
pub(crate) fn fermi_resolvent_shifted(
    decomp: &EigDecomposition,
    shift: f64,
    t: f64,
    mu0: f64,
    eps_min: f64,
) -> Result<CMatrix> {
    decomp.try_map(|lambda| fermi_resolvent_scalar(lambda + shift, t, mu0, eps_min))
}
