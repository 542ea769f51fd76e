//! Matrix exponential by scaling and squaring with Padé approximants
//! (Higham 2005 degree selection).


// f64 math comes from libm unless std happens to be linked
#[allow(unused_imports)]
use num_traits::Float;

use super::lu::Lu;
use super::{CMatrix, MatConfig};
use crate::error::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_230e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

pub fn mat_exp(a: &CMatrix) -> Result<CMatrix> {
    mat_exp_with(a, &MatConfig::default())
}

pub fn mat_exp_with(a: &CMatrix, cfg: &MatConfig) -> Result<CMatrix> {
    a.ensure_finite("matrix exponential input")?;
    let norm = a.norm_one();
    if norm > cfg.exp_norm_limit {
        return Err(Error::Overflow {
            norm,
            limit: cfg.exp_norm_limit,
        });
    }
    let n = a.dim();
    if n == 1 {
        return Ok(CMatrix::scalar(a[(0, 0)].exp()));
    }
    for &(m, theta) in &THETA {
        if norm <= theta {
            return pade_low(a, m);
        }
    }
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale_real(2f64.powi(-squarings));
    let mut e = pade13(&scaled)?;
    for _ in 0..squarings {
        e = &e * &e;
    }
    e.ensure_finite("matrix exponential result")?;
    Ok(e)
}

fn pade_low(a: &CMatrix, m: usize) -> Result<CMatrix> {
    let b: &[f64] = match m {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        _ => &B9,
    };
    let n = a.dim();
    let id = CMatrix::identity(n);
    let a2 = a * a;
    let mut odd = id.scale_real(b[1]);
    let mut even = id.scale_real(b[0]);
    let mut power = id;
    for k in 1..=m / 2 {
        power = &power * &a2;
        even += &power.scale_real(b[2 * k]);
        odd += &power.scale_real(b[2 * k + 1]);
    }
    finish(&(a * &odd), &even)
}

fn pade13(a: &CMatrix) -> Result<CMatrix> {
    let b = &B13;
    let id = CMatrix::identity(a.dim());
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &(&a6.scale_real(b[13]) + &a4.scale_real(b[11])) + &a2.scale_real(b[9]);
    let u = &(&a6 * &inner_u)
        + &(&(&(&a6.scale_real(b[7]) + &a4.scale_real(b[5])) + &a2.scale_real(b[3]))
            + &id.scale_real(b[1]));
    let u = a * &u;
    let inner_v = &(&a6.scale_real(b[12]) + &a4.scale_real(b[10])) + &a2.scale_real(b[8]);
    let v = &(&a6 * &inner_v)
        + &(&(&(&a6.scale_real(b[6]) + &a4.scale_real(b[4])) + &a2.scale_real(b[2]))
            + &id.scale_real(b[0]));
    finish(&u, &v)
}

/// Solves `(V − U)·X = V + U`.
fn finish(u: &CMatrix, v: &CMatrix) -> Result<CMatrix> {
    let lu = Lu::new(&(v - u))?;
    Ok(lu.solve(&(v + u)))
}
