mod common;

use std::f64::consts::PI;

use common::{benchmark, c, chain, chain_spec, random_hermitian, random_psd, rel, rng, single_site};
use proptest::prelude::*;
use tdtransport_core::matcore::{inverse, solve};
use tdtransport_core::propagate::equilibrium_density;
use tdtransport_core::steady::{
    greens_retarded, k_total_steady, landauer_current, p_alpha_steady, steady_residual, steady_sigma, transmission,
    transmission_curve, EnergyQuadrature,
};
use tdtransport_core::units::HBAR_EV_FS;
use tdtransport_core::{CMatrix, DeviceSpec, Error, LeadLabel, LeadSpec, SteadyConfig, SystemSpec};

fn settled(spec: &SystemSpec) -> SteadyConfig {
    SteadyConfig::settled(spec).unwrap()
}

/// `−i[h, σ] − Σ_α (K^α + {Λ^α, σ})` in eV.
fn stationarity_defect(cfg: &SteadyConfig, sigma: &CMatrix) -> f64 {
    let mut total = cfg.h_inf.commutator(sigma).scale(c(0.0, -1.0));
    total -= &k_total_steady(cfg).unwrap();
    total -= &cfg.spec.lambda_total().anticommutator(sigma);
    total.frobenius_norm()
}

#[test]
fn greens_scalar_example() {
    let cfg = settled(&single_site(0.1, 0.1, 0.0, 0.0, 0.2, -200.0));
    let g = greens_retarded(&cfg, 0.0).unwrap();
    assert!((g[(0, 0)] - c(0.0, -5.0)).norm() < 1e-14);
}

#[test]
fn greens_advanced_is_adjoint() {
    let cfg = settled(&chain_spec(&[0.1, -0.2, 0.4], -0.7, 0.3, 0.5, -0.5, -50.0));
    let lambda = cfg.spec.lambda_total();
    for eps in [-2.0, -0.3, 0.0, 0.25, 1.7] {
        let gr = greens_retarded(&cfg, eps).unwrap();
        let ga = inverse(&(&(-&cfg.h_inf) - &lambda.scale(c(0.0, 1.0))).shift_diag(c(eps, 0.0))).unwrap();
        assert!((&ga - &gr.adjoint()).max_abs() < 1e-12);
    }
}

#[test]
fn greens_matches_direct_solve() {
    let cfg = settled(&chain_spec(&[0.1, -0.2, 0.4], -0.7, 0.3, 0.0, 0.0, -50.0));
    let h = chain(&[0.1, -0.2, 0.4], -0.7);
    let lambda = cfg.spec.lambda_total();
    for eps in [-1.1, 0.0, 0.9] {
        let a = CMatrix::from_fn(3, |i, j| {
            let d = if i == j { c(eps, 0.0) } else { c(0.0, 0.0) };
            d - h[(i, j)] + c(0.0, 1.0) * lambda[(i, j)]
        });
        let direct = solve(&a, &CMatrix::identity(3)).unwrap();
        let g = greens_retarded(&cfg, eps).unwrap();
        assert!((&g - &direct).max_abs() < 1e-12);
    }
}

#[test]
fn greens_rejects_non_finite_energy() {
    let cfg = settled(&benchmark());
    assert!(matches!(greens_retarded(&cfg, f64::NAN), Err(Error::InvalidArgument(_))));
}

#[test]
fn transmission_vanishes_for_decoupled_lead() {
    let mut spec = chain_spec(&[0.1, -0.2, 0.4], -0.7, 0.3, 0.0, 1.0, -50.0);
    spec.right.lambda = CMatrix::zeros(3);
    let cfg = settled(&spec);
    for eps in [-1.0, 0.0, 0.5, 3.0] {
        assert_eq!(transmission(&cfg, eps).unwrap(), 0.0);
    }
    assert_eq!(landauer_current(&cfg).unwrap().right, 0.0);
}

#[test]
fn transmission_resonance_is_unity_and_symmetric() {
    let mut spec = single_site(0.1, 0.1, 0.0, 0.0, 0.2, -200.0);
    spec.device.h0 = CMatrix::from_diag_real(&[0.4]);
    let cfg = settled(&spec);
    let peak = transmission(&cfg, 0.4).unwrap();
    assert!((peak - 1.0).abs() < 1e-6);
    for delta in [0.01, 0.1, 0.5, 3.0] {
        let (lo, hi) = (transmission(&cfg, 0.4 - delta).unwrap(), transmission(&cfg, 0.4 + delta).unwrap());
        assert!((lo - hi).abs() < 1e-12);
        assert!(lo < peak);
    }
}

#[test]
fn transmission_on_benchmark_is_lorentzian() {
    let cfg = settled(&benchmark());
    for eps in [0.0, 0.5, 1.0, 1.3, 2.0] {
        let x = eps - 1.0;
        let expected = 4.0 * 0.1 * 0.1 / (x * x + 0.04);
        assert!((transmission(&cfg, eps).unwrap() - expected).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn transmission_is_non_negative(seed in any::<u64>(), n in 1usize..5, eps in -3.0f64..3.0) {
        let mut r = rng(seed);
        let spec = SystemSpec {
            device: DeviceSpec::new(random_hermitian(&mut r, n, 1.0)),
            left: LeadSpec::new(LeadLabel::Left, random_psd(&mut r, n, 0.4, 0.0), 0.0, 0.2),
            right: LeadSpec::new(LeadLabel::Right, random_psd(&mut r, n, 0.4, 0.0), 0.0, 0.2),
            mu0: 0.0,
            band_bottom: -100.0,
        };
        let cfg = settled(&spec);
        prop_assert!(transmission(&cfg, eps).unwrap() >= -1e-12);
    }
}

#[test]
fn transmission_curve_grid() {
    let cfg = settled(&benchmark());
    let curve = transmission_curve(&cfg, -1.0, 3.0, 41).unwrap();
    assert_eq!(curve.len(), 41);
    assert_eq!(curve[0].0, -1.0);
    assert!((curve[40].0 - 3.0).abs() < 1e-14);
    assert!((curve[20].1 - 1.0).abs() < 1e-12);
}

#[test]
fn landauer_zero_bias_is_zero() {
    let cfg = settled(&chain_spec(&[0.1, -0.2], -0.7, 0.3, 0.0, 0.0, -50.0));
    let j = landauer_current(&cfg).unwrap();
    assert_eq!((j.left, j.right), (0.0, 0.0));
}

#[test]
fn landauer_matches_analytic_lorentzian() {
    let cfg = settled(&benchmark());
    let j = landauer_current(&cfg).unwrap();
    // ∫₀² 4Λ_LΛ_R / ((ε − 1)² + Λ²) dε with Λ = 0.2
    let integral = 4.0 * 0.01 / 0.2 * 2.0 * (1.0f64 / 0.2).atan();
    let expected = integral / (PI * HBAR_EV_FS);
    assert!(((j.right - expected) / expected).abs() < 1e-10);
    assert_eq!(j.left, -j.right);
    assert_eq!(j.get(LeadLabel::Right), j.right);
    assert!((j.right - 0.26566946).abs() < 1e-7);
}

#[test]
fn landauer_linear_response() {
    let mut spec = single_site(0.1, 0.15, 0.0, 1e-4, 0.2, -200.0);
    spec.device.h0 = CMatrix::from_diag_real(&[0.3]);
    let cfg = settled(&spec);
    let j = landauer_current(&cfg).unwrap();
    let expected = transmission(&cfg, 0.0).unwrap() * 1e-4 / (PI * HBAR_EV_FS);
    assert!(((j.right - expected) / expected).abs() < 1e-3);
}

#[test]
fn landauer_is_antisymmetric_under_bias_exchange() {
    let onsite = [0.2, -0.1, 0.2];
    let forward = settled(&chain_spec(&onsite, -0.6, 0.2, 0.3, -0.9, -50.0));
    let backward = settled(&chain_spec(&onsite, -0.6, 0.2, -0.9, 0.3, -50.0));
    let (jf, jb) = (landauer_current(&forward).unwrap(), landauer_current(&backward).unwrap());
    assert!((jf.right + jb.right).abs() < 1e-12 * jf.right.abs());
    assert!(jf.right != 0.0);
}

#[test]
fn landauer_reports_unresolved_quadrature() {
    let mut spec = single_site(0.001, 0.001, 0.0, 2.0, 0.2, -200.0);
    spec.device.h0 = CMatrix::from_diag_real(&[-0.6]);
    let coarse = EnergyQuadrature { panels: 1, points: 16 };
    let cfg = SteadyConfig::settled_with(&spec, coarse).unwrap();
    assert!(matches!(landauer_current(&cfg), Err(Error::QuadratureNotConverged { .. })));
}

#[test]
fn config_rejects_invalid_input() {
    let spec = benchmark();
    let h = CMatrix::zeros(1);
    let few = EnergyQuadrature { panels: 8, points: 8 };
    assert!(matches!(SteadyConfig::new(spec.clone(), [0.0, 2.0], h.clone(), few), Err(Error::InvalidArgument(_))));
    let skew = CMatrix::from_rows(&[[c(0.0, 1.0)]]).unwrap();
    assert!(SteadyConfig::new(spec.clone(), [0.0, 2.0], skew, EnergyQuadrature::default()).is_err());
    assert!(matches!(
        SteadyConfig::new(spec, [0.0, 2.0], CMatrix::zeros(2), EnergyQuadrature::default()),
        Err(Error::DimensionMismatch { .. })
    ));
    let cfg = settled(&benchmark());
    assert_eq!(cfg.level_shifts, [0.0, 2.0]);
    assert_eq!(cfg.chemical_potential(LeadLabel::Right), 2.0);
    assert!((cfg.h_inf[(0, 0)].re - 1.0).abs() < 1e-15);
}

#[test]
fn p_alpha_steady_vanishes_for_decoupled_lead() {
    let mut spec = chain_spec(&[0.1, -0.2], -0.7, 0.3, 0.0, 1.0, -50.0);
    spec.left.lambda = CMatrix::zeros(2);
    let cfg = settled(&spec);
    assert_eq!(p_alpha_steady(&cfg, LeadLabel::Left).unwrap(), CMatrix::zeros(2));
    assert!(p_alpha_steady(&cfg, LeadLabel::Right).unwrap().max_abs() > 0.0);
}

#[test]
fn p_alpha_steady_makes_equilibrium_stationary() {
    let spec = chain_spec(&[0.1, -0.2, 0.3], -0.7, 0.3, 0.0, 0.0, -60.0);
    let cfg = settled(&spec);
    let sigma = equilibrium_density(&spec).unwrap().sigma;
    assert!(stationarity_defect(&cfg, &sigma) < 1e-6);
}

#[test]
fn steady_sigma_at_zero_bias_is_equilibrium() {
    let mut r = rng(17);
    let spec = SystemSpec {
        device: DeviceSpec::new(random_hermitian(&mut r, 3, 1.0)),
        left: LeadSpec::new(LeadLabel::Left, random_psd(&mut r, 3, 0.3, 0.02), 0.0, 0.2),
        right: LeadSpec::new(LeadLabel::Right, random_psd(&mut r, 3, 0.3, 0.0), 0.0, 0.2),
        mu0: 0.0,
        band_bottom: -80.0,
    };
    let cfg = settled(&spec);
    let sigma = steady_sigma(&cfg).unwrap();
    let eq = equilibrium_density(&spec).unwrap().sigma;
    assert!((&sigma - &eq).frobenius_norm() < 1e-8);
}

#[test]
fn steady_sigma_solves_stationarity_under_bias() {
    let cfg = settled(&chain_spec(&[0.1, -0.2, 0.3], -0.7, 0.3, 0.4, -1.1, -60.0));
    let sigma = steady_sigma(&cfg).unwrap();
    assert!(sigma.hermiticity_defect() < 1e-10);
    assert!(steady_residual(&cfg, &sigma).unwrap() < 1e-10);
    assert!(stationarity_defect(&cfg, &sigma) < 1e-10);
}

#[test]
fn steady_sigma_mirror_symmetry() {
    // reversing the sites of a symmetric chain swaps the leads
    let onsite = [0.1, -0.3, 0.1];
    let forward = steady_sigma(&settled(&chain_spec(&onsite, -0.5, 0.2, 0.4, -0.4, -50.0))).unwrap();
    let backward = steady_sigma(&settled(&chain_spec(&onsite, -0.5, 0.2, -0.4, 0.4, -50.0))).unwrap();
    let mirror = CMatrix::from_fn(3, |i, j| c(if i + j == 2 { 1.0 } else { 0.0 }, 0.0));
    let reflected = &(&mirror * &forward) * &mirror;
    assert!(rel(&reflected, &backward) < 1e-12);
}

#[test]
fn steady_sigma_needs_broadening() {
    let spec = SystemSpec {
        device: DeviceSpec::new(chain(&[0.1, -0.3], -0.5)),
        left: LeadSpec::new(LeadLabel::Left, CMatrix::zeros(2), 0.0, 0.2),
        right: LeadSpec::new(LeadLabel::Right, CMatrix::zeros(2), -1.0, 0.2),
        mu0: 0.0,
        band_bottom: -50.0,
    };
    let err = steady_sigma(&settled(&spec)).unwrap_err();
    assert!(matches!(err, Error::SingularSylvester { .. }));
}

#[test]
fn charging_fixed_point_is_self_consistent() {
    let mut spec = chain_spec(&[0.3, 0.1], -0.4, 0.2, 0.0, 1.5, -50.0);
    spec.device.charging_strength = 0.8;
    let cfg = settled(&spec);
    let reference = equilibrium_density(&spec).unwrap().occupation();
    let occupation = steady_sigma(&cfg).unwrap().trace().re;
    let expected = spec.device.h0.shift_diag(c(spec.settled_device_shift(occupation - reference), 0.0));
    assert!((&cfg.h_inf - &expected).max_abs() < 1e-10);
    assert!((occupation - reference).abs() > 1e-3);
}
