//! Kernel invariants checked on generated inputs.

use std::f64::consts::PI;

use fdbf_core::beamforming::{
    analog_alternating_projection, full_digital_design, full_digital_design_traced, hybrid_design, upper_bound_rate,
    AnalogNullTarget, DigitalBeamformerSet, LinkChannels, SolverConfig, DIGITAL_ORTHONORMAL_TOL,
    HYBRID_ORTHONORMAL_TOL, UNIT_MODULUS_TOL,
};
use fdbf_core::channel::{
    array_response, si_los_matrix, synth_channel, to_frequency, ArrayGeometry, ClusterRaySpec, FrequencyChannel,
    SiGeometry, TimeDomainChannel,
};
use fdbf_core::metrics::{
    downlink_rate, energy_efficiency, epsilon_rate, outage_probability, uplink_rate, Architecture, LinkBudget,
    PowerModel, SiCovarianceForm,
};
use fdbf_core::numerics::{
    dft_taps, dominant_left_singular_vectors, hermitian_error, identity, logdet_capacity, null_projector,
    numerical_rank, orthonormality_error, phase_only, svd, CMatrix, ORTHONORMAL_TOL, PROJECTOR_TOL,
    RECONSTRUCTION_TOL,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian(m: usize, n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(m, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(s * re, s * im)
    })
}

fn seeded(m: usize, n: usize, seed: u64) -> CMatrix {
    gaussian(m, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn freq(m: usize, n: usize, kk: usize, rng: &mut ChaCha8Rng) -> FrequencyChannel {
    FrequencyChannel { subcarriers: (0..kk).map(|_| gaussian(m, n, rng)).collect() }
}

fn links(m_bs: usize, m_ue: usize, kk: usize, seed: u64) -> LinkChannels {
    let rng = &mut ChaCha8Rng::seed_from_u64(seed);
    LinkChannels { uplink: freq(m_bs, m_ue, kk, rng), downlink: freq(m_ue, m_bs, kk, rng), si: freq(m_bs, m_bs, kk, rng) }
}

fn ray_spec(n_taps: usize) -> ClusterRaySpec {
    ClusterRaySpec {
        n_clusters: 4,
        rays_per_cluster: 10,
        angular_spread_deg: 2.0,
        pathloss_exponent: 3.0,
        n_taps,
        rolloff: 1.0,
    }
}

/// Inverse of the forward subcarrier transform, written independently of the crate.
fn inverse_dft(freq: &[CMatrix]) -> Vec<CMatrix> {
    let kk = freq.len();
    (0..kk)
        .map(|l| {
            let mut acc = CMatrix::zeros(freq[0].nrows(), freq[0].ncols());
            for (k, h) in freq.iter().enumerate() {
                acc += h * Complex64::from_polar(1.0 / kk as f64, 2.0 * PI * (k * l) as f64 / kk as f64);
            }
            acc
        })
        .collect()
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..10, 1usize..10)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn svd_reconstructs((m, n) in dims(), seed in any::<u64>()) {
        let a = seeded(m, n, seed);
        let dec = svd(&a).unwrap();
        prop_assert!((dec.reconstruct() - &a).norm() <= RECONSTRUCTION_TOL * a.norm().max(1.0));
        prop_assert!(dec.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn dominant_left_vectors_orthonormal((m, n) in dims(), pick in 0usize..10, seed in any::<u64>()) {
        let a = seeded(m, n, seed);
        let k = 1 + pick % m.min(n);
        let u = dominant_left_singular_vectors(&a, k).unwrap();
        prop_assert_eq!(u.shape(), (m, k));
        prop_assert!(orthonormality_error(&u) <= ORTHONORMAL_TOL);
    }

    #[test]
    fn null_projector_is_orthogonal_projector(m in 2usize..12, pick in 0usize..12, seed in any::<u64>()) {
        let n = 1 + pick % (m - 1);
        let c = seeded(m, n, seed);
        let p = null_projector(&c).unwrap();
        prop_assert!(hermitian_error(&p) <= PROJECTOR_TOL);
        prop_assert!((&p * &p - &p).norm() <= PROJECTOR_TOL * (m as f64).sqrt());
        prop_assert!((&p * &c).norm() <= PROJECTOR_TOL * c.norm());
        prop_assert_eq!(numerical_rank(&p).unwrap(), m - numerical_rank(&c).unwrap());
    }

    #[test]
    fn capacity_monotone_in_power(m in 1usize..6, n in 1usize..6, seed in any::<u64>()) {
        let e = seeded(m, n, seed);
        let mut prev = 0.0;
        for i in 0..10 {
            let p = 10f64.powf(-3.0 + 0.7 * i as f64);
            let c = logdet_capacity(&e, &identity(n), p).unwrap();
            prop_assert!(c >= prev - 1e-12 * c.abs().max(1.0));
            prev = c;
        }
    }

    #[test]
    fn dft_round_trip(l in 1usize..5, kk_pow in 2u32..6, seed in any::<u64>()) {
        let kk = 2usize.pow(kk_pow).max(l);
        let rng = &mut ChaCha8Rng::seed_from_u64(seed);
        let taps: Vec<CMatrix> = (0..l).map(|_| gaussian(3, 2, rng)).collect();
        let freq: Vec<CMatrix> = (0..kk).map(|k| dft_taps(&taps, k, kk).unwrap()).collect();
        let back = inverse_dft(&freq);
        let scale: f64 = taps.iter().map(|t| t.norm_squared()).sum::<f64>().sqrt();
        for (i, b) in back.iter().enumerate() {
            let expected = taps.get(i).cloned().unwrap_or_else(|| CMatrix::zeros(3, 2));
            prop_assert!((b - expected).norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn array_response_unit_norm_and_symmetric(n in 1usize..64, theta in -PI..PI) {
        let g = ArrayGeometry::half_wavelength(n);
        let a = array_response(&g, theta);
        prop_assert!((a.norm() - 1.0).abs() <= 1e-12);
        let b = array_response(&g, -theta);
        prop_assert!((b - a.map(|z| z.conj())).norm() <= 1e-12);
    }

    #[test]
    fn synth_reproducible_and_parseval(seed in any::<u64>(), l in 1usize..5) {
        let (tx, rx) = (ArrayGeometry::half_wavelength(4), ArrayGeometry::half_wavelength(8));
        let h1 = synth_channel(&tx, &rx, &ray_spec(l), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let h2 = synth_channel(&tx, &rx, &ray_spec(l), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(&h1, &h2);
        let f = to_frequency(&h1, 16).unwrap();
        let lhs: f64 = f.energies().iter().sum();
        prop_assert!((lhs - 16.0 * h1.energy()).abs() <= 1e-9 * lhs);
        let back = inverse_dft(&f.subcarriers);
        let padded = TimeDomainChannel { taps: back[..l].to_vec() };
        let err: f64 = padded.taps.iter().zip(&h1.taps).map(|(a, b)| (a - b).norm_squared()).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-9 * h1.energy().sqrt());
        prop_assert!(back[l..].iter().all(|t| t.norm() <= 1e-9 * h1.energy().sqrt()));
    }

    #[test]
    fn si_los_deterministic(n_tx in 1usize..16, n_rx in 1usize..16, angle in 0.1f64..3.0, dist in 0.5f64..5.0) {
        let geom = SiGeometry { angle_between_arrays: angle, distance_over_lambda: dist, rician_kappa: 3.0, los_tap_zero_only: false };
        let (tx, rx) = (ArrayGeometry::half_wavelength(n_tx), ArrayGeometry::half_wavelength(n_rx));
        let a = si_los_matrix(&tx, &rx, &geom);
        prop_assert_eq!(&a, &si_los_matrix(&tx, &rx, &geom));
        prop_assert!((a.norm_squared() - (n_tx * n_rx) as f64).abs() <= 1e-9 * (n_tx * n_rx) as f64);
    }

    #[test]
    fn phase_only_is_unit_modulus(m in 1usize..20, n in 1usize..4, seed in any::<u64>()) {
        let (x, zeros) = phase_only(&seeded(m, n, seed));
        prop_assert_eq!(zeros, 0);
        prop_assert!(x.iter().all(|z| (z.norm() - 1.0).abs() <= UNIT_MODULUS_TOL));
    }

    #[test]
    fn epsilon_rate_monotone(samples in prop::collection::vec(0.0f64..20.0, 1..200), e1 in 0.0f64..1.0, e2 in 0.0f64..1.0) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(epsilon_rate(&samples, lo).unwrap() <= epsilon_rate(&samples, hi).unwrap());
    }

    #[test]
    fn outage_monotone_in_target(samples in prop::collection::vec(0.0f64..20.0, 1..200), r1 in 0.0f64..25.0, r2 in 0.0f64..25.0) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(outage_probability(&samples, lo).unwrap() <= outage_probability(&samples, hi).unwrap());
    }

    #[test]
    fn ee_strictly_decreasing_in_adc(se in 0.01f64..40.0, n_rx in 1usize..256, n_rf in 1usize..16, p in 1.0f64..1000.0, dp in 0.1f64..500.0) {
        for arch in [Architecture::FullDigital, Architecture::Hybrid] {
            let a = energy_efficiency(se, arch, n_rx, n_rf, &PowerModel::with_adc(p));
            let b = energy_efficiency(se, arch, n_rx, n_rf, &PowerModel::with_adc(p + dp));
            prop_assert!(b < a);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn full_digital_beams_orthonormal(seed in any::<u64>(), m_bs in 4usize..10, kk in 1usize..4) {
        let ch = links(m_bs, 3, kk, seed);
        let cfg = SolverConfig { n_outer: 3, n_streams: 1 + (seed % 2) as usize, ..SolverConfig::default() };
        let d = full_digital_design(&ch, &cfg).unwrap();
        prop_assert!(d.beams.max_orthonormality_error() <= DIGITAL_ORTHONORMAL_TOL);
    }

    #[test]
    fn hybrid_rf_unit_modulus(seed in any::<u64>(), m_bs in 6usize..12, kk in 1usize..4, weakest in any::<bool>()) {
        let ch = links(m_bs, 3, kk, seed);
        let null_target = if weakest { AnalogNullTarget::WeakestSubcarrier } else { AnalogNullTarget::AllSubcarriers };
        let cfg = SolverConfig { n_outer: 2, n_inner: 4, null_target, ..SolverConfig::default() };
        let d = hybrid_design(&ch, &cfg).unwrap();
        prop_assert!(d.beams.max_unit_modulus_error() <= UNIT_MODULUS_TOL);
        prop_assert!(d.beams.composed.max_orthonormality_error() <= HYBRID_ORTHONORMAL_TOL);
    }

    #[test]
    fn uplink_without_si_equals_downlink_formula(seed in any::<u64>(), kk in 1usize..4, rho in 0.01f64..100.0) {
        let ch = links(6, 3, kk, seed);
        let d = full_digital_design(&ch, &SolverConfig { n_outer: 2, ..SolverConfig::default() }).unwrap();
        let budget = LinkBudget { rho_u: rho, rho_d: rho, rho_s: 0.0, sigma_u2: 1.0, sigma_d2: 1.0 };
        let up = uplink_rate(&d.beams, &ch.uplink, &ch.si, &budget, SiCovarianceForm::BsPrecoder).unwrap();
        // the uplink is a downlink whose receiver is the BS and transmitter the UE
        let mirrored = DigitalBeamformerSet {
            f_ue: d.beams.f_ue.clone(),
            w_bs: d.beams.w_bs.clone(),
            f_bs: d.beams.f_ue.clone(),
            w_ue: d.beams.w_bs.clone(),
        };
        let down = downlink_rate(&mirrored, &ch.uplink, &budget).unwrap();
        prop_assert!((up - down).abs() <= 1e-10 * up.abs().max(1.0));
    }

    #[test]
    fn hybrid_without_si_reduces_to_phase_svd(seed in any::<u64>(), m_bs in 4usize..12) {
        let mut ch = links(m_bs, 3, 1, seed);
        ch.si.subcarriers[0] = CMatrix::zeros(m_bs, m_bs);
        let cfg = SolverConfig { n_outer: 1, n_inner: 1, ..SolverConfig::default() };
        let a = ch.downlink.subcarriers[0].adjoint() * dominant_left_singular_vectors(&ch.downlink.subcarriers[0], 2).unwrap();
        let one = analog_alternating_projection(&a, &CMatrix::zeros(m_bs, 2), 2, 1).unwrap();
        let expected = phase_only(&dominant_left_singular_vectors(&a, 2).unwrap()).0;
        prop_assert!((one.x_rf - expected).norm() <= 1e-12);
        prop_assert!(hybrid_design(&ch, &cfg).is_ok());
    }
}

#[test]
fn ap_residual_non_increasing_in_inner_iterations() {
    let trials = 200;
    let mut ok = 0;
    for t in 0..trials {
        let a = seeded(16, 2, 1000 + t);
        let c = seeded(16, 4, 5000 + t);
        let r = |n| {
            let x = analog_alternating_projection(&a, &c, 2, n).unwrap().x_rf;
            (x.adjoint() * &c).norm()
        };
        ok += usize::from(r(50) <= r(10));
    }
    assert!(ok * 100 >= 95 * trials as usize, "{ok}/{trials}");
}

#[test]
fn full_digital_sum_rate_rises_across_outer_iterations() {
    let trials = 60;
    let mut ok = 0;
    let budget = LinkBudget { rho_u: 1.0, rho_d: 1.0, rho_s: 1e12, sigma_u2: 1.0, sigma_d2: 1.0 };
    for t in 0..trials {
        let ch = links(8, 3, 2, 9000 + t);
        let mut sums = Vec::new();
        full_digital_design_traced(&ch, &SolverConfig::default(), |_, b| {
            let up = uplink_rate(b, &ch.uplink, &ch.si, &budget, SiCovarianceForm::BsPrecoder).unwrap();
            sums.push(up + downlink_rate(b, &ch.downlink, &budget).unwrap());
        })
        .unwrap();
        ok += usize::from(sums.windows(2).all(|w| w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0)));
    }
    assert!(ok * 100 >= 90 * trials as usize, "{ok}/{trials}");
}

#[test]
fn outage_falls_along_snr_sweep() {
    let rng = &mut ChaCha8Rng::seed_from_u64(77);
    let chans: Vec<FrequencyChannel> = (0..100).map(|_| freq(4, 4, 4, rng)).collect();
    let mut prev = 1.0;
    for snr_db in [-10.0, -5.0, 0.0, 5.0, 10.0] {
        let snr = 10f64.powf(snr_db / 10.0) * 4.0;
        let rates: Vec<f64> = chans.iter().map(|h| upper_bound_rate(h, snr, 2).unwrap()).collect();
        let p = outage_probability(&rates, 3.0).unwrap();
        assert!(p <= prev);
        prev = p;
    }
    assert!(prev < 1.0);
}
