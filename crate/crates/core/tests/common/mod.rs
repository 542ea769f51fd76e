#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdtransport_core::{CMatrix, Complex64, DeviceSpec, LeadLabel, LeadSpec, SystemSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_matrix(rng: &mut impl Rng, n: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(n, |_, _| {
        c(rng.gen_range(-1.0..1.0) * scale, rng.gen_range(-1.0..1.0) * scale)
    })
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize, scale: f64) -> CMatrix {
    random_matrix(rng, n, scale).hermitian_part()
}

/// `B·B†`, shifted to make it comfortably positive definite when `floor > 0`.
pub fn random_psd(rng: &mut impl Rng, n: usize, scale: f64, floor: f64) -> CMatrix {
    let b = random_matrix(rng, n, scale);
    (&b * &b.adjoint()).shift_diag(c(floor, 0.0))
}

pub fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).frobenius_norm() / b.frobenius_norm().max(1e-300)
}

pub fn crel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

// 20-point Gauss–Legendre nodes and weights on [-1, 1], positive half
const GL_X: [f64; 10] = [
    0.076_526_521_133_497_33,
    0.227_785_851_141_645_08,
    0.373_706_088_715_419_56,
    0.510_867_001_950_827_1,
    0.636_053_680_726_515_0,
    0.746_331_906_460_150_8,
    0.839_116_971_822_218_8,
    0.912_234_428_251_325_9,
    0.963_971_927_277_913_8,
    0.993_128_599_185_094_9,
];
const GL_W: [f64; 10] = [
    0.152_753_387_130_725_85,
    0.149_172_986_472_603_75,
    0.142_096_109_318_382_05,
    0.131_688_638_449_176_63,
    0.118_194_531_961_518_42,
    0.101_930_119_817_240_44,
    0.083_276_741_576_704_75,
    0.062_672_048_334_109_06,
    0.040_601_429_800_386_94,
    0.017_614_007_139_152_12,
];

/// Nodes and weights of the composite 20-point rule on `panels` equal panels,
/// independent of the crate's own quadrature helper.
pub fn gl_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(20 * panels);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for k in 0..10 {
            let dx = 0.5 * h * GL_X[k];
            out.push((mid - dx, 0.5 * h * GL_W[k]));
            out.push((mid + dx, 0.5 * h * GL_W[k]));
        }
    }
    out
}

pub fn gl_integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, panels: usize) -> Complex64 {
    gl_nodes(a, b, panels)
        .into_iter()
        .fold(Complex64::new(0.0, 0.0), |acc, (x, w)| acc + f(x) * w)
}

pub fn gl_integrate_matrix(f: impl Fn(f64) -> CMatrix, n: usize, a: f64, b: f64, panels: usize) -> CMatrix {
    let mut acc = CMatrix::zeros(n);
    for (x, w) in gl_nodes(a, b, panels) {
        acc += &f(x).scale_real(w);
    }
    acc
}

/// Largest singular value, from the eigenvalues of `A†A`.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    let d = tdtransport_core::matcore::eig_general(&(&a.adjoint() * a)).unwrap();
    d.eigenvalues.iter().map(|z| z.re).fold(0.0, f64::max).sqrt()
}

/// Adaptive Simpson with a relative/absolute tolerance, for oracle use.
pub fn adaptive(f: &impl Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    fn simpson(
        f: &impl Fn(f64) -> Complex64,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (fa + flm * 4.0 + fm) * ((m - a) / 6.0);
        let right = (fm + frm * 4.0 + fb) * ((b - m) / 6.0);
        let delta = left + right - whole;
        if depth == 0 || delta.norm() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (fa + fm * 4.0 + fb) * ((b - a) / 6.0);
    simpson(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Single site at zero energy with scalar line-widths and settled lead shifts.
pub fn single_site(lambda_l: f64, lambda_r: f64, shift_l: f64, shift_r: f64, a: f64, eps_min: f64) -> SystemSpec {
    let lead = |label, lambda: f64, shift| {
        LeadSpec::with_level_shift(label, CMatrix::from_diag_real(&[lambda]), shift, a)
    };
    SystemSpec {
        device: DeviceSpec::new(CMatrix::zeros(1)),
        left: lead(LeadLabel::Left, lambda_l, shift_l),
        right: lead(LeadLabel::Right, lambda_r, shift_r),
        mu0: 0.0,
        band_bottom: eps_min,
    }
}

/// The benchmark single-site junction: `Λ^L = Λ^R = 0.1 eV`, `Δε^R = 2 eV`.
pub fn benchmark() -> SystemSpec {
    single_site(0.1, 0.1, 0.0, 2.0, 0.2, -200.0)
}

/// Nearest-neighbour chain with on-site energies and uniform hopping.
pub fn chain(onsite: &[f64], hopping: f64) -> CMatrix {
    let n = onsite.len();
    CMatrix::from_fn(n, |i, j| {
        if i == j {
            c(onsite[i], 0.0)
        } else if i.abs_diff(j) == 1 {
            c(hopping, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

/// Λ acting on a single orbital.
pub fn site_lambda(n: usize, site: usize, value: f64) -> CMatrix {
    let mut diag = vec![0.0; n];
    diag[site] = value;
    CMatrix::from_diag_real(&diag)
}

/// Chain coupled at its ends, left lead to the first site and right lead to
/// the last one.
pub fn chain_spec(onsite: &[f64], hopping: f64, lambda: f64, shift_l: f64, shift_r: f64, eps_min: f64) -> SystemSpec {
    let n = onsite.len();
    SystemSpec {
        device: DeviceSpec::new(chain(onsite, hopping)),
        left: LeadSpec::with_level_shift(LeadLabel::Left, site_lambda(n, 0, lambda), shift_l, 0.2),
        right: LeadSpec::with_level_shift(LeadLabel::Right, site_lambda(n, n - 1, lambda), shift_r, 0.2),
        mu0: 0.0,
        band_bottom: eps_min,
    }
}
