//! Acceptance suite: one test per release criterion, each printing a
//! pass line (run with `--nocapture` to see them).
//!
//! Run: `cargo test -p twinmon-cli --test acceptance -- --nocapture`

use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::path::Path;

use twinmon::dynamics::{
    autler_townes_spectrum, bell_sequence_moments, capture_efficiency, exponential_filter,
    shot_estimator, state_vector_oracle, BellOptions, MoleculeModel,
};
use twinmon::fit::{fit_reflectance, FitOptions, FitParams, ReflectanceDataset};
use twinmon::molecule::{coupling_coefficients, StateLabel};
use twinmon::params::{MoleculeParams, PortCouplings};
use twinmon::raman::optimal_pump;
use twinmon::scattering::{iq_circle, magic_amplitude, reflectance, DriveTone, Mode};
use twinmon::units::cyclic;
use twinmon::Port;

const GHZ: f64 = 2.0 * std::f64::consts::PI * 1e9;
const MHZ: f64 = 2.0 * std::f64::consts::PI * 1e6;

/// Run one criterion body, printing its pass/fail line either way.
fn report<F>(id: u32, name: &str, body: F)
where
    F: FnOnce() + std::panic::UnwindSafe,
{
    match std::panic::catch_unwind(body) {
        Ok(()) => println!("criterion {id:02} ({name}): PASS"),
        Err(cause) => {
            println!("criterion {id:02} ({name}): FAIL");
            std::panic::resume_unwind(cause);
        }
    }
}

#[test]
fn criterion_01_eigenstructure() {
    report(1, "eigenstructure", || {
        let params = MoleculeParams::<f64>::reference();
        let h = twinmon::molecule::build_hamiltonian(&params).unwrap();
        let eigen = twinmon::molecule::diagonalize(&h, &params).unwrap();
        let expect = [
            (StateLabel::SingleOdd, 5.6981),
            (StateLabel::SingleEven, 6.2909),
            (StateLabel::DoubleEvenLower, 11.2600),
            (StateLabel::DoubleOdd, 11.7421),
            (StateLabel::DoubleEvenUpper, 12.4711),
        ];
        for (label, ghz) in expect {
            let got = eigen.energy(label).unwrap() / GHZ;
            assert!(
                (got - ghz).abs() < 0.5e-3,
                "{label}: {got} GHz vs {ghz} GHz"
            );
        }
    });
}

#[test]
fn criterion_02_coupling_coefficients() {
    report(2, "coupling coefficients and zero pattern", || {
        let params = MoleculeParams::<f64>::reference();
        let c = coupling_coefficients(&params).unwrap();
        assert!((c.c_s_minus - 0.53).abs() < 0.01, "{}", c.c_s_minus);
        assert!((c.c_s_plus - 6.31).abs() < 0.01, "{}", c.c_s_plus);
        assert!((c.c_a_plus - 5.13).abs() < 0.01, "{}", c.c_a_plus);
        assert!((c.c_a_minus - (-0.65)).abs() < 0.01, "{}", c.c_a_minus);

        let h = twinmon::molecule::build_hamiltonian(&params).unwrap();
        let eigen = twinmon::molecule::diagonalize(&h, &params).unwrap();
        let d = twinmon::molecule::dipole_matrices(&eigen, &params).unwrap();
        // zero-pattern of the device matrices, canonical order 0,a,s,2-,2+L,2+U
        let s_allowed = [(0, 2), (1, 3), (2, 4), (2, 5)];
        let a_allowed = [(0, 1), (2, 3), (1, 4), (1, 5)];
        for i in 0..6 {
            for j in 0..6 {
                let (lo, hi) = (i.min(j), i.max(j));
                let s_on = s_allowed.contains(&(lo, hi));
                let a_on = a_allowed.contains(&(lo, hi));
                if s_on {
                    assert!(d.d_s[(i, j)].abs() > 1e-3, "missing dS[{i}{j}]");
                } else {
                    assert!(d.d_s[(i, j)].abs() < 1e-9, "spurious dS[{i}{j}]");
                }
                if a_on {
                    assert!(d.d_a[(i, j)].abs() > 1e-3, "missing dA[{i}{j}]");
                } else {
                    assert!(d.d_a[(i, j)].abs() < 1e-9, "spurious dA[{i}{j}]");
                }
            }
        }
        // convention-independent ratio of the two |s⟩-manifold couplings
        let rs = d.rescaled_d_s.as_ref().unwrap();
        let ratio = (rs[(2, 5)] / rs[(2, 4)]).abs();
        assert!(
            (ratio / (6.31 / 0.53) - 1.0).abs() < 0.02,
            "ratio {ratio} vs {}",
            6.31 / 0.53
        );
    });
}

#[test]
fn criterion_03_selectivity() {
    report(3, "symmetry selectivity", || {
        let c = PortCouplings::<f64>::reference();
        let (s_sel, a_sel) = c.selectivity();
        assert!((s_sel - 46.6).abs() < 0.5, "{s_sel}");
        assert!((a_sel - 35.3).abs() < 0.5, "{a_sel}");
        // consistent with the quoted characterization (47 and 35)
        assert_eq!(s_sel.round() as i64, 47);
        assert_eq!(a_sel.round() as i64, 35);
    });
}

#[test]
fn criterion_04_reflectance_and_global_fit() {
    report(4, "reflectance, magic power, global fit", || {
        let c = PortCouplings::<f64>::reference();
        let w0 = cyclic(5.6981e9);

        // weak-drive on-resonance reflectance of |a⟩ from waveguide A
        let r = reflectance(
            w0,
            &c,
            Mode::Antisym,
            Port::A,
            &DriveTone::new(Port::A, w0, 0.0),
        )
        .unwrap();
        assert!((r.re - (-0.945)).abs() < 0.005, "{r}");

        // magic-amplitude zero crossing
        let magic = magic_amplitude(&c, Mode::Antisym).unwrap();
        let r = reflectance(
            w0,
            &c,
            Mode::Antisym,
            Port::A,
            &DriveTone::new(Port::A, w0, magic),
        )
        .unwrap();
        assert!(r.norm() < 1e-10, "|r| at magic = {}", r.norm());

        // synthetic spectra across the saturation ladder
        let amps: Vec<f64> = [0.02, 0.05, 0.3, 0.71, 1.5, 4.0]
            .iter()
            .map(|x| x * magic)
            .collect();
        let span = cyclic(8.0 * 0.311e6);
        let synth = |n_points: usize, noise: Option<(f64, u64)>| -> Vec<ReflectanceDataset<f64>> {
            use rand::Rng;
            use rand::SeedableRng;
            amps.iter()
                .enumerate()
                .map(|(i, &om)| {
                    let mut spec =
                        iq_circle(w0, &c, Mode::Antisym, Port::A, om, span, n_points).unwrap();
                    if let Some((sigma, seed)) = noise {
                        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(
                            seed.wrapping_mul(97) + i as u64,
                        );
                        for p in spec.points.iter_mut() {
                            let dre: f64 = rng.sample(rand_distr::StandardNormal);
                            let dim: f64 = rng.sample(rand_distr::StandardNormal);
                            p.1 += Complex64::new(sigma * dre, sigma * dim);
                        }
                    }
                    ReflectanceDataset {
                        spectrum: spec,
                        nominal_amplitude: om,
                    }
                })
                .collect()
        };

        // noiseless round trip: every parameter within 0.1%
        let fit = fit_reflectance(
            &synth(201, None),
            Mode::Antisym,
            None,
            &FitOptions::default(),
        )
        .unwrap();
        let p = fit.params;
        assert!((p.gamma / c.gamma_a - 1.0).abs() < 1e-3);
        assert!((p.gamma_cross / c.gamma_a_cross - 1.0).abs() < 1e-3);
        assert!((p.amp_scale - 1.0).abs() < 1e-3);
        assert!((p.mode_freq - w0).abs() < 1e-3 * c.gamma1_a());
        // consistency: residual essentially zero at the true parameters
        let truth = FitParams {
            mode_freq: w0,
            gamma: c.gamma_a,
            gamma_cross: c.gamma_a_cross,
            gamma_phi: 0.0,
            amp_scale: 1.0,
        };
        assert!(twinmon::fit::residual_norm_at(&synth(201, None), Mode::Antisym, &truth) < 1e-9);

        // 30 dB SNR Monte Carlo over 20 seeds: within 5%
        let sigma = 10f64.powf(-30.0 / 20.0) / 2f64.sqrt();
        let worst = (0..20u64)
            .into_par_iter()
            .map(|seed| {
                let fit = fit_reflectance(
                    &synth(4001, Some((sigma, 1000 + seed))),
                    Mode::Antisym,
                    None,
                    &FitOptions::default(),
                )
                .unwrap();
                let p = fit.params;
                [
                    (p.gamma / c.gamma_a - 1.0).abs(),
                    (p.gamma_cross / c.gamma_a_cross - 1.0).abs(),
                    (p.amp_scale - 1.0).abs(),
                    (p.mode_freq - w0).abs() / c.gamma1_a(),
                ]
                .into_iter()
                .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        assert!(worst < 0.05, "worst-case noisy recovery error {worst}");
    });
}

#[test]
fn criterion_05_raman_conversion() {
    report(5, "raman conversion efficiency and optimum", || {
        let c = PortCouplings::<f64>::reference();
        let delta = cyclic(300e6);
        let opt = optimal_pump(&c, delta).unwrap();
        assert!((opt.peak_t2 - 0.952).abs() < 0.003, "{}", opt.peak_t2);
        assert!(
            (opt.closed_form / MHZ - 14.04).abs() < 0.01,
            "{}",
            opt.closed_form / MHZ
        );
        assert!(
            (opt.corrected / MHZ - 14.2).abs() < 0.3,
            "{}",
            opt.corrected / MHZ
        );
        // measured optimum of the reference device within 10%
        assert!((opt.corrected / MHZ / 15.35 - 1.0).abs() < 0.10);

        // beyond the optimum the conversion resonance splits in two
        let model = MoleculeModel::<f64>::reference();
        let cfg = twinmon::raman::RamanConfig::symmetric_pumps(
            c,
            model.eigen.energy(StateLabel::SingleEven).unwrap(),
            model.eigen.energy(StateLabel::SingleOdd).unwrap(),
            model.eigen.energy(StateLabel::DoubleOdd).unwrap(),
            delta,
            2.0 * opt.corrected,
        );
        let stark = (2.0 * opt.corrected).powi(2) / (2.0 * delta);
        let grid: Vec<f64> = (0..4001)
            .map(|k| -stark - cyclic(4e6) + 2.0 * cyclic(4e6) * k as f64 / 4000.0)
            .collect();
        let spec = twinmon::raman::conversion_spectra(&cfg, &grid).unwrap();
        let maxima = (1..4000)
            .filter(|&k| spec.t2[k] > spec.t2[k - 1] && spec.t2[k] > spec.t2[k + 1])
            .count();
        assert_eq!(maxima, 2, "split conversion peaks above the optimum");
    });
}

#[test]
fn criterion_06_bell_moments() {
    report(6, "propagating-mode moments vs state-vector oracle", || {
        let mut c = PortCouplings::<f64>::reference();
        c.gamma_s_cross = 0.0;
        c.gamma_a_cross = 0.0;
        let model = MoleculeModel::new(MoleculeParams::reference(), c).unwrap();
        let opts = BellOptions::window_in_lifetimes(&model, 20.0);

        let thetas: Vec<f64> = (0..17)
            .map(|k| 2.0 * std::f64::consts::PI * k as f64 / 16.0)
            .collect();
        let results: Vec<(f64, twinmon::dynamics::MomentSet<f64>)> = thetas
            .par_iter()
            .map(|&theta| {
                (
                    theta,
                    bell_sequence_moments(&model, theta, true, &opts).unwrap(),
                )
            })
            .collect();
        for (theta, got) in &results {
            let want = state_vector_oracle::<f64>(*theta, true);
            assert!((got.a_minus - want.a_minus).norm() < 1e-3, "a- at {theta}");
            assert!((got.a_plus - want.a_plus).norm() < 1e-3, "a+ at {theta}");
            assert!((got.n_minus - want.n_minus).abs() < 1e-3, "n- at {theta}");
            assert!((got.n_plus - want.n_plus).abs() < 1e-3, "n+ at {theta}");
            assert!((got.cross - want.cross).norm() < 1e-3, "cross at {theta}");
            assert!(got.anomalous.norm() < 1e-3, "anomalous at {theta}");
        }
        // the Bell point
        let at_pi = bell_sequence_moments(&model, std::f64::consts::PI, true, &opts).unwrap();
        assert!((at_pi.cross.re - 0.5).abs() < 1e-3, "{}", at_pi.cross.re);
        assert!(at_pi.cross.im.abs() < 1e-3);
        assert!(at_pi.anomalous.norm() < 1e-3);
    });
}

#[test]
fn criterion_07_autler_townes_calibration() {
    report(7, "pump calibration by dressed-state splitting", || {
        let model = MoleculeModel::<f64>::reference();
        let pumps_mhz = [3.0, 5.0, 7.65, 10.0, 14.0, 17.0, 20.0];
        let splits: Vec<f64> = pumps_mhz
            .par_iter()
            .map(|&p_mhz| {
                let pump = p_mhz * MHZ;
                let half = 1.3 * pump + cyclic(2e6);
                let grid: Vec<f64> = (0..6001)
                    .map(|k| -half + 2.0 * half * k as f64 / 6000.0)
                    .collect();
                let res = autler_townes_spectrum(&model, Port::S, pump, 0.0, &grid, None).unwrap();
                res.splitting.expect("resolved splitting")
            })
            .collect();
        for (p_mhz, split) in pumps_mhz.iter().zip(&splits) {
            let dev = split / (p_mhz * MHZ) - 1.0;
            assert!(
                dev.abs() < 0.02,
                "pump {p_mhz} MHz: splitting {} MHz ({:+.2}%)",
                split / MHZ,
                dev * 100.0
            );
        }
        // linear fit over the calibration range
        let xs: Vec<f64> = pumps_mhz.iter().map(|p| p * MHZ).collect();
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = splits.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&splits).map(|(x, y)| x * y).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        assert!((slope - 1.0).abs() < 0.02, "slope {slope}");
        assert!(
            intercept.abs() < 0.1 * MHZ,
            "intercept {} MHz",
            intercept / MHZ
        );
    });
}

#[test]
fn criterion_08_mode_capture() {
    report(8, "temporal mode capture efficiency", || {
        let window = 1.02e-6;
        let cases = [
            (Port::A, cyclic(0.311e6), 0.864, 0.748),
            (Port::S, cyclic(1.388e6), 0.9999, 0.989),
        ];
        for (port, gamma, model_eta, reported_eta) in cases {
            let eta: f64 = capture_efficiency(gamma, window);
            assert!((eta - model_eta).abs() < 5e-4, "port {port}: {eta}");
            // closed form against numerical integration of the filtered flux
            let mm = exponential_filter::<f64>(gamma, window, 2001).unwrap();
            assert!(
                (mm.numeric_capture() - eta).abs() < 1e-9,
                "numeric capture mismatch on port {port}"
            );
            println!(
                "  mode capture, port {port}: model eta = {eta:.4}, \
                 reported measurement = {reported_eta:.3} (documented discrepancy)"
            );
        }
    });
}

#[test]
fn criterion_09_shot_estimation() {
    report(9, "shot-level moment estimation", || {
        let truth = state_vector_oracle::<f64>(std::f64::consts::PI, true);
        let est = shot_estimator(&truth, 10.0, 10_000_000, 424242).unwrap();
        let e = est.errors.as_ref().unwrap();
        let within = |got: f64, want: f64, sigma: f64, what: &str| {
            assert!(
                (got - want).abs() <= 3.0 * sigma,
                "{what}: {got} vs {want} (sigma {sigma})"
            );
        };
        within(est.a_minus.re, truth.a_minus.re, e.a_minus.re, "a- re");
        within(est.a_minus.im, truth.a_minus.im, e.a_minus.im, "a- im");
        within(est.a_plus.re, truth.a_plus.re, e.a_plus.re, "a+ re");
        within(est.a_plus.im, truth.a_plus.im, e.a_plus.im, "a+ im");
        within(est.n_minus, truth.n_minus, e.n_minus, "n-");
        within(est.n_plus, truth.n_plus, e.n_plus, "n+");
        within(est.cross.re, truth.cross.re, e.cross.re, "cross re");
        within(est.cross.im, truth.cross.im, e.cross.im, "cross im");
        within(
            est.anomalous.re,
            truth.anomalous.re,
            e.anomalous.re,
            "anom re",
        );
        within(
            est.anomalous.im,
            truth.anomalous.im,
            e.anomalous.im,
            "anom im",
        );
        assert!(est.cauchy_schwarz_ok(5.0 * e.n_minus));

        // standard errors scale as 1/sqrt(N) between 1e5 and 1e7 shots
        let small = shot_estimator(&truth, 10.0, 100_000, 424242).unwrap();
        let ratio = small.errors.as_ref().unwrap().cross.re / est.errors.as_ref().unwrap().cross.re;
        assert!((ratio / 10.0 - 1.0).abs() < 0.10, "scaling ratio {ratio}");
    });
}

fn payload_hashes(dir: &Path) -> BTreeMap<String, String> {
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| {
            (
                f["path"].as_str().unwrap().to_string(),
                f["sha256"].as_str().unwrap().to_string(),
            )
        })
        .collect()
}

#[test]
fn criterion_10_figure_determinism() {
    report(10, "byte-identical figure reproduction", || {
        use twinmon_cli::config::{RunConfig, Task};
        use twinmon_cli::figures::{reproduce_figure, FigureId};
        let tmp = tempfile::tempdir().unwrap();
        for (k, fig) in [
            FigureId::Fig2,
            FigureId::Fig3,
            FigureId::Fig4,
            FigureId::FigS2,
            FigureId::FigS3,
            FigureId::FigS5,
        ]
        .into_iter()
        .enumerate()
        {
            let mut config = RunConfig::for_task(Task::Eigen);
            config.seed = 17;
            if fig == FigureId::Fig4 {
                // keep the doubled recipe affordable inside the suite
                config.bell = Some(twinmon_cli::config::BellConfig {
                    theta_points: 5,
                    window_s: 1.02e-6,
                    n_grid: 129,
                    export_trajectory: false,
                    export_correlations: false,
                });
            }
            let d1 = tmp.path().join(format!("{fig}-run1-{k}"));
            let d2 = tmp.path().join(format!("{fig}-run2-{k}"));
            reproduce_figure(fig, &config, &d1).unwrap();
            reproduce_figure(fig, &config, &d2).unwrap();
            let h1 = payload_hashes(&d1);
            let h2 = payload_hashes(&d2);
            assert!(!h1.is_empty(), "{fig}: no payload files");
            assert_eq!(h1, h2, "{fig}: payloads differ between identical runs");
        }
    });
}
