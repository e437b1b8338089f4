mod common;

use common::*;
use dimer_qpt::dynamics::{chi_from_kraus, propagate_chi, KrausSet, Level, ProcessMatrix, RedfieldModel, RedfieldRates, COLUMNS, ROWS};
use dimer_qpt::exciton::{PulseSpec, Vec3};
use dimer_qpt::spectroscopy::*;
use dimer_qpt::units::wavenumber_to_angular;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use Exciton::{Alpha as Xa, Beta as Xb};

fn random_chi(rng: &mut ChaCha8Rng) -> ProcessMatrix {
    let mut chi = ProcessMatrix::zeros(vec![0.0]);
    for &(c, d) in &COLUMNS {
        for &(a, b) in &ROWS {
            chi.set(0, a, b, c, d, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
    }
    // the tabulated forms take the ground state as inert
    chi.set(0, Level::G, Level::G, Level::G, Level::G, Complex64::new(1.0, 0.0));
    chi
}

fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

#[test]
fn general_evaluator_matches_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let phi: f64 = rng.gen_range(5.0..175.0);
        let e = homodimer(phi);
        let chi = random_chi(&mut rng);
        for cfg in [PolarizationConfig::zzzz(), PolarizationConfig::zzxx()] {
            let g = peak_amplitudes_general(&chi, &e, &pulses(), &cfg, Averaging::Isotropic).unwrap();
            let h = peak_amplitudes_homodimer(&chi, &e, &pulses(), &cfg).unwrap();
            for m in Exciton::BOTH {
                for n in Exciton::BOTH {
                    assert!(rel_diff(g.get(0, m, n), h.get(0, m, n)) < 1e-12, "phi {phi} {m:?}{n:?}");
                }
            }
        }
    }
}

#[test]
fn vanishing_population_coherence_weights() {
    for phi in [20.0, 65.0, 90.0, 130.0] {
        let e = homodimer(phi);
        for cfg in [PolarizationConfig::zzzz(), PolarizationConfig::zzxx()] {
            let terms = pathway_terms(&e, &pulses(), &cfg, Averaging::Isotropic);
            let mixed: Vec<_> = terms.iter().filter(|t| t.is_population_coherence()).collect();
            assert!(!mixed.is_empty());
            for t in mixed {
                assert!(t.coefficient.norm() < 1e-12, "{t:?}");
            }
        }
    }
}

#[test]
fn fixed_frame_keeps_population_coherence_terms() {
    // without averaging the homodimer does see coherence/population transfer
    let e = homodimer(65.0);
    let cfg = PolarizationConfig::from_tag("xxxy").unwrap();
    let terms = pathway_terms(&e, &pulses(), &cfg, Averaging::Fixed);
    assert!(terms.iter().any(|t| t.is_population_coherence() && t.coefficient.norm() > 1e-3));
}

#[test]
fn unitary_limit_beats_only_in_cross_peaks() {
    let e = homodimer(65.0);
    let model = RedfieldModel::new(RedfieldRates::zero(), 273.0, 350.0).unwrap();
    let times = half_periods(8);
    let chi = propagate_chi(&model, &e, &times).unwrap();
    let w_ab = wavenumber_to_angular(e.omega_alpha_beta());
    for cfg in [PolarizationConfig::zzzz(), PolarizationConfig::zzxx()] {
        let s = peak_amplitudes_general(&chi, &e, &pulses(), &cfg, Averaging::Isotropic).unwrap();
        for k in 1..times.len() {
            assert!(rel_diff(s.get(k, Xa, Xa), s.get(0, Xa, Xa)) < 1e-13);
            assert!(rel_diff(s.get(k, Xb, Xb), s.get(0, Xb, Xb)) < 1e-13);
        }
        // S_αβ = A + B·χ_βαβα(T) with χ_βαβα = e^{iω_αβ T}: successive differences rotate by ω_αβ ΔT
        let dt = times[1] - times[0];
        for k in 0..times.len() - 2 {
            let d0 = s.get(k + 1, Xa, Xb) - s.get(k, Xa, Xb);
            let d1 = s.get(k + 2, Xa, Xb) - s.get(k + 1, Xa, Xb);
            let ratio = d1 / d0;
            assert!((ratio.norm() - 1.0).abs() < 1e-10);
            let want = Complex64::from_polar(1.0, w_ab * dt);
            assert!((ratio - want).norm() < 1e-10);
        }
    }
}

#[test]
fn detuned_third_pulse_kills_signal() {
    let e = homodimer(65.0);
    let chi = redfield_chi(&e, &[50.0]);
    let mut seq = pulses();
    seq.equal_amplitude = false;
    seq.pulses[2].carrier = 30000.0;
    let s = peak_amplitudes_general(&chi, &e, &seq, &PolarizationConfig::zzzz(), Averaging::Isotropic).unwrap();
    let on = peak_amplitudes_general(&chi, &e, &pulses(), &PolarizationConfig::zzzz(), Averaging::Isotropic).unwrap();
    for m in Exciton::BOTH {
        for n in Exciton::BOTH {
            assert!(s.get(0, m, n).norm() < 1e-60 * on.get(0, m, n).norm());
        }
    }
}

#[test]
fn secular_diagonal_peaks_are_real_and_cross_peak_ratio() {
    let e = homodimer(65.0);
    let chi = redfield_chi(&e, &half_periods(20));
    let z = peak_amplitudes_general(&chi, &e, &pulses(), &PolarizationConfig::zzzz(), Averaging::Isotropic).unwrap();
    let x = peak_amplitudes_general(&chi, &e, &pulses(), &PolarizationConfig::zzxx(), Averaging::Isotropic).unwrap();
    for k in 0..chi.len() {
        for s in [&z, &x] {
            assert!(s.get(k, Xa, Xa).im.abs() < 1e-14);
            assert!(s.get(k, Xb, Xb).im.abs() < 1e-14);
        }
        let (a, b) = (z.get(k, Xa, Xb).im, x.get(k, Xa, Xb).im);
        assert!((a + 2.0 * b).abs() < 1e-13 * a.abs().max(1e-3));
    }
}

#[test]
fn right_angle_tables_are_symmetric() {
    let e = homodimer(90.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let chi = chi_from_kraus(&KrausSet::random(&mut rng, 3), 0.0).unwrap();
    // relabel α ↔ β in χ
    let swap = |l: Level| match l {
        Level::Alpha => Level::Beta,
        Level::Beta => Level::Alpha,
        Level::G => Level::G,
    };
    let mut swapped = ProcessMatrix::zeros(vec![0.0]);
    for &(c, d) in &COLUMNS {
        for &(a, b) in &ROWS {
            swapped.set(0, swap(a), swap(b), swap(c), swap(d), chi.get(0, a, b, c, d).unwrap());
        }
    }
    for cfg in [PolarizationConfig::zzzz(), PolarizationConfig::zzxx()] {
        let s = peak_amplitudes_homodimer(&chi, &e, &pulses(), &cfg).unwrap();
        let t = peak_amplitudes_homodimer(&swapped, &e, &pulses(), &cfg).unwrap();
        for m in Exciton::BOTH {
            for n in Exciton::BOTH {
                let (ms, ns) = (if m == Xa { Xb } else { Xa }, if n == Xa { Xb } else { Xa });
                assert!(rel_diff(s.get(0, m, n), t.get(0, ms, ns)) < 1e-12);
            }
        }
    }
}

#[test]
fn homodimer_tables_reject_heterodimers() {
    use dimer_qpt::exciton::{diagonalize, SiteDimer};
    let e = diagonalize(&SiteDimer::new(16000.0, 16400.0, 100.0, Vec3::x(), Vec3::y()).unwrap());
    let chi = ProcessMatrix::identity(vec![0.0]);
    assert!(peak_amplitudes_homodimer(&chi, &e, &pulses(), &PolarizationConfig::zzzz()).is_err());
    let e = homodimer(65.0);
    assert!(peak_amplitudes_homodimer(&chi, &e, &pulses(), &PolarizationConfig::from_tag("zxzx").unwrap()).is_err());
}

#[test]
fn unequal_amplitudes_at_paper_carrier() {
    // Gaussian factors for the 16546 cm⁻¹ carrier are 0.990 and 0.916, not equal
    let e = homodimer(65.0);
    let mut seq = pulses();
    seq.equal_amplitude = false;
    let c = seq.coefficients(&e);
    let fa = c[0][0].im / -1.0;
    let fb = c[0][1].im / -1.0;
    assert!((fa - 0.990).abs() < 1e-3 && (fb - 0.916).abs() < 1e-3, "{fa} {fb}");
}

fn spectrum_axis() -> Axis {
    Axis::spanning(16108.0, 1050.0, 1.0).unwrap()
}

#[test]
fn single_peak_center_value() {
    let e = homodimer(65.0);
    let g0 = 0.0134;
    let mut peaks = PeakAmplitudeSet {
        times: vec![0.0],
        values: vec![[[Complex64::new(0.0, 0.0); 2]; 2]],
        config: "zzzz".into(),
        carriers: [16546.0; 3],
    };
    peaks.values[0][0][1] = Complex64::new(1.0, 0.0);
    let ax = spectrum_axis();
    assert_eq!(ax.len, 1051);
    let s = assemble_spectrum(&peaks, 0, &e, &DephasingSet::uniform(g0), ax, ax);
    let (i, j) = ((e.omega_alpha - ax.start) as usize, (e.omega_beta - ax.start) as usize);
    let v = s.at(i, j);
    assert!((v - Complex64::new(0.0, 1.0 / (g0 * g0))).norm() < 1e-9 * v.norm());
    assert_eq!(s.argmax(), (i, j));
}

#[test]
fn zero_peaks_zero_grid() {
    let e = homodimer(65.0);
    let peaks = PeakAmplitudeSet {
        times: vec![0.0],
        values: vec![[[Complex64::new(0.0, 0.0); 2]; 2]],
        config: "zzzz".into(),
        carriers: [16546.0; 3],
    };
    let ax = Axis::new(16000.0, 5.0, 200).unwrap();
    let s = assemble_spectrum(&peaks, 0, &e, &DephasingSet::uniform(0.0134), ax, ax);
    assert!(s.values.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
}

#[test]
fn bracket_warning_reported() {
    let e = homodimer(65.0);
    let ax = Axis::new(16000.0, 1.0, 500).unwrap();
    let w = bracket_warnings(&e, &ax, &spectrum_axis());
    assert_eq!(w.len(), 1);
    assert!(bracket_warnings(&e, &spectrum_axis(), &spectrum_axis()).is_empty());
}

#[test]
fn dominant_peak_position() {
    let e = homodimer(65.0);
    let ax = Axis::new(16100.0, 3.0, 360).unwrap();
    for (m, n) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let mut peaks = PeakAmplitudeSet {
            times: vec![0.0],
            values: vec![[[Complex64::new(0.01, 0.0); 2]; 2]],
            config: "zzzz".into(),
            carriers: [16546.0; 3],
        };
        peaks.values[0][m][n] = Complex64::new(1.0, 0.5);
        let s = assemble_spectrum(&peaks, 0, &e, &DephasingSet::uniform(0.0134), ax, ax);
        let (i, j) = s.argmax();
        let centers = [e.omega_alpha, e.omega_beta];
        assert!((ax.value(i) - centers[m]).abs() <= ax.step);
        assert!((ax.value(j) - centers[n]).abs() <= ax.step);
    }
}

#[test]
fn spectrum_files_round_trip() {
    let e = homodimer(65.0);
    let chi = redfield_chi(&e, &[47.5]);
    let s = peak_amplitudes_general(&chi, &e, &pulses(), &PolarizationConfig::zzxx(), Averaging::Isotropic).unwrap();
    let ax = Axis::new(16100.0, 7.5, 90).unwrap();
    let spec = assemble_spectrum(&s, 0, &e, &pulses().dephasing, ax, ax);
    let dir = tempfile::tempdir().unwrap();
    spec.write(dir.path(), "spec").unwrap();
    let back = Spectrum2D::read(dir.path(), "spec").unwrap();
    assert_eq!(back, spec);
    std::fs::write(dir.path().join("spec.csv"), "omega_tau,omega_t,re,im\n1,2,3,4\n").unwrap();
    assert!(Spectrum2D::read(dir.path(), "spec").is_err());
}

#[test]
fn time_domain_vanishes_before_zero() {
    let e = homodimer(65.0);
    let chi = redfield_chi(&e, &[20.0]);
    let p = polarization_time_domain(&chi, 0, &e, &pulses(), &PolarizationConfig::zzzz(), Averaging::Isotropic,
        &[-5.0, -0.1, 1.0], &[-3.0, 2.0]).unwrap();
    assert_eq!(p[0], Complex64::new(0.0, 0.0));
    assert_eq!(p[1], Complex64::new(0.0, 0.0));
    assert_eq!(p[2], Complex64::new(0.0, 0.0));
    assert_eq!(p[3], Complex64::new(0.0, 0.0));
    assert_eq!(p[4], Complex64::new(0.0, 0.0));
    assert!(p[5].norm() > 0.0);
}

#[test]
fn single_branch_beats_at_alpha_only() {
    let e = homodimer(65.0);
    let chi = redfield_chi(&e, &[30.0]);
    let sigma = 200.0;
    let narrow = PulseSpec::new(Vec3::z(), e.omega_alpha, sigma, 1.0).unwrap();
    let broad = pulses().pulses[0].clone();
    let seq = PulseSequence {
        pulses: [narrow, broad.clone(), broad],
        dephasing: DephasingSet::uniform(0.0134),
        equal_amplitude: false,
    };
    let h = 0.5;
    let tau: Vec<f64> = (0..40).map(|i| h * i as f64).collect();
    let t = [0.0, 13.0, 71.5];
    let p = polarization_time_domain(&chi, 0, &e, &seq, &PolarizationConfig::zzzz(), Averaging::Isotropic, &tau, &t).unwrap();
    let step = Complex64::new(-0.0134 * h, wavenumber_to_angular(e.omega_alpha) * h).exp();
    for i in 0..tau.len() - 1 {
        for j in 0..t.len() {
            let r = p[(i + 1) * t.len() + j] / p[i * t.len() + j];
            assert!((r - step).norm() < 1e-10);
        }
    }
}

#[test]
fn transform_converges_to_lineshapes() {
    // coarse check; the acceptance suite runs the full-resolution version
    let e = homodimer(65.0);
    let chi = redfield_chi(&e, &[47.5]);
    let cfg = PolarizationConfig::zzzz();
    let seq = pulses();
    let g = seq.dephasing.alpha_g;
    let grid = TimeGrid::covering(8.0 / g, 0.5).unwrap();
    let tv = grid.values();
    let p = polarization_time_domain(&chi, 0, &e, &seq, &cfg, Averaging::Isotropic, &tv, &tv).unwrap();
    let ax = Axis::new(16108.0, 50.0, 22).unwrap();
    let ft = one_sided_ft(&p, grid, grid, ax, ax, 47.5, "zzzz").unwrap();
    let s = peak_amplitudes_general(&chi, &e, &seq, &cfg, Averaging::Isotropic).unwrap();
    let want = assemble_spectrum(&s, 0, &e, &seq.dephasing, ax, ax);
    let err = ft.values.iter().zip(&want.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err / want.max_abs() < 0.01, "{}", err / want.max_abs());
}

proptest! {
    #[test]
    fn assembly_is_linear(re in prop::array::uniform8(-2.0..2.0f64), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let e = homodimer(65.0);
        let mk = |v: &[f64]| PeakAmplitudeSet {
            times: vec![0.0],
            values: vec![[[Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])], [Complex64::new(v[4], v[5]), Complex64::new(v[6], v[7])]]],
            config: "zzzz".into(),
            carriers: [0.0; 3],
        };
        let p = mk(&re);
        let mut rev = re;
        rev.reverse();
        let q = mk(&rev);
        let mut combo = p.clone();
        for m in 0..2 { for n in 0..2 { combo.values[0][m][n] = p.values[0][m][n] * a + q.values[0][m][n] * b; } }
        let ax = Axis::new(16200.0, 20.0, 40).unwrap();
        let d = DephasingSet::uniform(0.0134);
        let sp = assemble_spectrum(&p, 0, &e, &d, ax, ax);
        let sq = assemble_spectrum(&q, 0, &e, &d, ax, ax);
        let sc = assemble_spectrum(&combo, 0, &e, &d, ax, ax);
        let scale = sp.max_abs() + sq.max_abs() + 1.0;
        for k in 0..sc.values.len() {
            prop_assert!((sc.values[k] - (sp.values[k] * a + sq.values[k] * b)).norm() < 1e-12 * scale * (a.abs() + b.abs() + 1.0));
        }
    }
}
