//! Task implementations: each produces deterministic CSV/JSON payloads
//! in the output directory.

use num_complex::Complex64;
use serde::Serialize;
use std::path::Path;

use crate::config::{parse_mode, parse_port, RunConfig, Task};
use crate::error::{CliError, Result};
use crate::output::{fmt_f, OutputSession, RunManifest};
use twinmon::dynamics::{
    autler_townes_spectrum, bell_sequence_moments, shot_estimator, state_vector_oracle,
    BellOptions, MoleculeModel, MomentSet,
};
use twinmon::fit::{fit_reflectance, FitOptions, ReflectanceDataset};
use twinmon::molecule::{
    build_hamiltonian, coupling_coefficients, diagonalize, dipole_matrices, transition_table,
    StateLabel,
};
use twinmon::raman::{optimal_pump, sweep_pump_amplitude, RamanConfig as CoreRamanConfig};
use twinmon::scattering::{iq_circle, ComplexSpectrum, Mode};
use twinmon::units::to_cyclic;

/// Run the configured task into `out_dir`, returning the manifest.
/// Identical configuration and seed produce byte-identical payloads.
pub fn run_task(config: &RunConfig, out_dir: &Path) -> Result<RunManifest> {
    config.validate()?;
    let mut session = OutputSession::create(out_dir)?;
    let outcome = dispatch(config, &mut session);
    match outcome {
        Ok(()) => session.finish(config),
        Err(e) => {
            session.discard();
            Err(e)
        }
    }
}

fn dispatch(config: &RunConfig, session: &mut OutputSession) -> Result<()> {
    match config.task {
        Task::Eigen => task_eigen(config, session),
        Task::Dipoles => task_dipoles(config, session),
        Task::Reflectance => task_reflectance(config, session),
        Task::Fit => task_fit(config, session),
        Task::Raman => write_raman_maps(config, session),
        Task::Bell => task_bell(config, session),
        Task::Autler => task_autler(config, session),
        Task::Shots => task_shots(config, session),
    }
}

/// Molecule model from the configuration, with any measured
/// second-manifold rate overrides applied.
pub(crate) fn build_model(config: &RunConfig) -> Result<MoleculeModel<f64>> {
    let params = config.molecule.to_params()?;
    let couplings = config.couplings.to_couplings()?;
    let mut model = MoleculeModel::new(params, couplings)?;
    for o in &config.decay_overrides {
        model = model.with_decay_override(
            crate::config::parse_upper_label(&o.from)?,
            crate::config::parse_lower_label(&o.to)?,
            crate::config::parse_port(&o.port)?,
            twinmon::units::cyclic(o.rate_hz),
        );
    }
    Ok(model)
}

fn task_eigen(config: &RunConfig, session: &mut OutputSession) -> Result<()> {
    let params = config.molecule.to_params()?;
    let h = build_hamiltonian(&params)?;
    let eigen = diagonalize(&h, &params)?;
    let mut rows = Vec::new();
    let canonical = eigen.canonical;
    for (k, e) in eigen.energies.iter().enumerate() {
        let label = canonical
            .and_then(|map| {
                map.iter()
                    .position(|&s| s == k)
                    .map(|i| StateLabel::CANONICAL[i].to_string())
            })
            .unwrap_or_default();
        rows.push(vec![
            k.to_string(),
            label,
            fmt_f(to_cyclic(*e)),
            eigen.symmetry[k].to_string(),
            eigen.manifold[k].to_string(),
        ]);
    }
    session.write_csv(
        "eigen.csv",
        "index,label,energy_hz,symmetry,manifold",
        &rows,
    )?;

    #[derive(Serialize)]
    struct EigenReport {
        n_levels: usize,
        energies_hz: Vec<f64>,
        symmetry: Vec<String>,
        manifold: Vec<u32>,
        canonical_labels: Vec<String>,
        warnings: Vec<String>,
    }
    session.write_json(
        "eigen.json",
        &EigenReport {
            n_levels: eigen.n_levels,
            energies_hz: eigen.energies.iter().map(|e| to_cyclic(*e)).collect(),
            symmetry: eigen.symmetry.iter().map(|s| s.to_string()).collect(),
            manifold: eigen.manifold.clone(),
            canonical_labels: StateLabel::CANONICAL
                .iter()
                .map(|l| l.to_string())
                .collect(),
            warnings: eigen.warnings.clone(),
        },
    )
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<String>> {
    (0..m.nrows())
        .map(|i| {
            let mut row = vec![StateLabel::CANONICAL[i].to_string()];
            row.extend((0..m.ncols()).map(|j| fmt_f(m[(i, j)])));
            row
        })
        .collect()
}

fn task_dipoles(config: &RunConfig, session: &mut OutputSession) -> Result<()> {
    let params = config.molecule.to_params()?;
    let h = build_hamiltonian(&params)?;
    let eigen = diagonalize(&h, &params)?;
    let dip = dipole_matrices(&eigen, &params)?;
    let header = "state,0,a,s,2-,2+L,2+U";
    session.write_csv("dipoles_s.csv", header, &matrix_rows(&dip.d_s))?;
    session.write_csv("dipoles_a.csv", header, &matrix_rows(&dip.d_a))?;
    if let (Some(rs), Some(ra)) = (&dip.rescaled_d_s, &dip.rescaled_d_a) {
        session.write_csv("dipoles_s_rescaled.csv", header, &matrix_rows(rs))?;
        session.write_csv("dipoles_a_rescaled.csv", header, &matrix_rows(ra))?;
    }
    if params.is_identical() {
        let c = coupling_coefficients(&params)?;
        #[derive(Serialize)]
        struct Coefficients {
            c_s_minus: f64,
            c_s_plus: f64,
            c_a_minus: f64,
            c_a_plus: f64,
        }
        session.write_json(
            "coupling_coefficients.json",
            &Coefficients {
                c_s_minus: c.c_s_minus,
                c_s_plus: c.c_s_plus,
                c_a_minus: c.c_a_minus,
                c_a_plus: c.c_a_plus,
            },
        )?;
    }
    let table = transition_table(&eigen, &dip)?;
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|t| {
            vec![
                t.from.to_string(),
                t.to.to_string(),
                fmt_f(to_cyclic(t.frequency)),
                t.port.to_string(),
                fmt_f(t.amplitude),
            ]
        })
        .collect();
    session.write_csv(
        "transitions.csv",
        "from,to,frequency_hz,port,dipole_amplitude",
        &rows,
    )
}

fn spectrum_rows(spec: &ComplexSpectrum<f64>, amplitude_hz: f64) -> Vec<Vec<String>> {
    spec.points
        .iter()
        .map(|&(f, r)| {
            vec![
                fmt_f(amplitude_hz),
                fmt_f(to_cyclic(f)),
                fmt_f(r.re),
                fmt_f(r.im),
                fmt_f(r.norm()),
            ]
        })
        .collect()
}

fn task_reflectance(config: &RunConfig, session: &mut OutputSession) -> Result<()> {
    let rc = config.reflectance.as_ref().expect("validated");
    let couplings = config.couplings.to_couplings()?;
    let mode = parse_mode(&rc.mode)?;
    let port = parse_port(&rc.port)?;
    let model = build_model(config)?;
    let mode_freq = match mode {
        Mode::Sym => model.eigen.energy(StateLabel::SingleEven).unwrap(),
        Mode::Antisym => model.eigen.energy(StateLabel::SingleOdd).unwrap(),
    };
    let mut rows = Vec::new();
    for &amp_hz in &rc.amplitudes_hz {
        let spec = iq_circle(
            mode_freq,
            &couplings,
            mode,
            port,
            twinmon::units::cyclic(amp_hz),
            twinmon::units::cyclic(rc.span_hz),
            rc.points,
        )?;
        rows.extend(spectrum_rows(&spec, amp_hz));
    }
    session.write_csv(
        "reflectance.csv",
        "amplitude_hz,frequency_hz,re,im,abs",
        &rows,
    )
}

fn read_measured_spectrum(path: &str, port: twinmon::Port) -> Result<ComplexSpectrum<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut points = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if k == 0 || line.trim().is_empty() {
            continue; // header
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 3 {
            return Err(CliError::Config(format!(
                "{path}:{}: expected `frequency_hz,re,im`",
                k + 1
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|e| CliError::Config(format!("{path}:{}: {e}", k + 1)))
        };
        let f_hz = parse(cols[0])?;
        points.push((
            twinmon::units::cyclic(f_hz),
            Complex64::new(parse(cols[1])?, parse(cols[2])?),
        ));
    }
    Ok(ComplexSpectrum {
        points,
        port,
        drive_amplitude: 0.0,
        model: "measured",
    })
}

fn task_fit(config: &RunConfig, session: &mut OutputSession) -> Result<()> {
    let fc = config.fit.as_ref().expect("validated");
    let couplings = config.couplings.to_couplings()?;
    let mode = parse_mode(&fc.mode)?;
    let port = mode.home_port();
    let model = build_model(config)?;
    let mode_freq = match mode {
        Mode::Sym => model.eigen.energy(StateLabel::SingleEven).unwrap(),
        Mode::Antisym => model.eigen.energy(StateLabel::SingleOdd).unwrap(),
    };

    let datasets: Vec<ReflectanceDataset<f64>> = if fc.data.is_empty() {
        // synthetic data from the configured model, optionally noisy
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(config.seed);
        let sigma = fc
            .snr_db
            .map(|snr| 10f64.powf(-snr / 20.0) / 2f64.sqrt())
            .unwrap_or(0.0);
        fc.amplitudes_hz
            .iter()
            .map(|&amp_hz| {
                let om = twinmon::units::cyclic(amp_hz);
                let mut spec = iq_circle(
                    mode_freq,
                    &couplings,
                    mode,
                    port,
                    om,
                    twinmon::units::cyclic(fc.span_hz),
                    fc.points,
                )?;
                if sigma > 0.0 {
                    for p in spec.points.iter_mut() {
                        let dre: f64 = rng.sample(rand_distr::StandardNormal);
                        let dim: f64 = rng.sample(rand_distr::StandardNormal);
                        p.1 += Complex64::new(sigma * dre, sigma * dim);
                    }
                }
                Ok(ReflectanceDataset {
                    spectrum: spec,
                    nominal_amplitude: om,
                })
            })
            .collect::<Result<_>>()?
    } else {
        fc.data
            .iter()
            .map(|d| {
                Ok(ReflectanceDataset {
                    spectrum: read_measured_spectrum(&d.file, port)?,
                    nominal_amplitude: twinmon::units::cyclic(d.amplitude_hz),
                })
            })
            .collect::<Result<_>>()?
    };

    let opts = FitOptions {
        fit_dephasing: fc.fit_dephasing,
        ..FitOptions::default()
    };
    let fit = fit_reflectance(&datasets, mode, None, &opts)?;

    #[derive(Serialize)]
    struct FitReport {
        mode: String,
        converged: bool,
        iterations: usize,
        residual_norm: f64,
        mode_freq_hz: f64,
        gamma_hz: f64,
        gamma_cross_hz: f64,
        gamma_phi_hz: f64,
        amp_scale: f64,
        err_mode_freq_hz: f64,
        err_gamma_hz: f64,
        err_gamma_cross_hz: f64,
        err_gamma_phi_hz: f64,
        err_amp_scale: f64,
        warnings: Vec<String>,
    }
    session.write_json(
        "fit.json",
        &FitReport {
            mode: fc.mode.clone(),
            converged: fit.converged,
            iterations: fit.iterations,
            residual_norm: fit.residual_norm,
            mode_freq_hz: to_cyclic(fit.params.mode_freq),
            gamma_hz: to_cyclic(fit.params.gamma),
            gamma_cross_hz: to_cyclic(fit.params.gamma_cross),
            gamma_phi_hz: to_cyclic(fit.params.gamma_phi),
            amp_scale: fit.params.amp_scale,
            err_mode_freq_hz: to_cyclic(fit.std_errors.mode_freq),
            err_gamma_hz: to_cyclic(fit.std_errors.gamma),
            err_gamma_cross_hz: to_cyclic(fit.std_errors.gamma_cross),
            err_gamma_phi_hz: to_cyclic(fit.std_errors.gamma_phi),
            err_amp_scale: fit.std_errors.amp_scale,
            warnings: fit.warnings.clone(),
        },
    )?;

    let mut rows = Vec::new();
    for ds in &datasets {
        rows.extend(spectrum_rows(&ds.spectrum, to_cyclic(ds.nominal_amplitude)));
    }
    session.write_csv("fit_data.csv", "amplitude_hz,frequency_hz,re,im,abs", &rows)
}

/// JSON header shared by the conversion-map CSVs.
#[derive(Serialize)]
struct SweepHeader {
    delta_hz: f64,
    pump_amplitudes_hz: Vec<f64>,
    probe_detunings_hz: Vec<f64>,
    optimal_pump_closed_form_hz: f64,
    optimal_pump_corrected_hz: f64,
    peak_t2: f64,
}

/// Shared by the raman task and the conversion-figure recipe.
pub(crate) fn write_raman_maps(config: &RunConfig, session: &mut OutputSession) -> Result<()> {
    let rc = config.raman.as_ref().expect("validated");
    let couplings = config.couplings.to_couplings()?;
    let model = build_model(config)?;
    let delta = twinmon::units::cyclic(rc.delta_hz);

    let omega_s = model.eigen.energy(StateLabel::SingleEven).unwrap();
    let omega_a = model.eigen.energy(StateLabel::SingleOdd).unwrap();
    let e2m = model.eigen.energy(StateLabel::DoubleOdd).unwrap();
    let template = CoreRamanConfig::symmetric_pumps(couplings, omega_s, omega_a, e2m, delta, 0.0);

    let amps: Vec<f64> = (0..rc.amp_points)
        .map(|k| twinmon::units::cyclic(rc.amp_max_hz) * (k + 1) as f64 / rc.amp_points as f64)
        .collect();
    let probes: Vec<f64> = (0..rc.probe_points)
        .map(|k| {
            let half = twinmon::units::cyclic(rc.probe_span_hz) / 2.0;
            -half + 2.0 * half * k as f64 / (rc.probe_points - 1).max(1) as f64
        })
        .collect();
    let sweep = sweep_pump_amplitude(&template, &amps, &probes)?;
    let opt = optimal_pump(&couplings, delta)?;

    session.write_json(
        "raman_header.json",
        &SweepHeader {
            delta_hz: rc.delta_hz,
            pump_amplitudes_hz: amps.iter().map(|a| to_cyclic(*a)).collect(),
            probe_detunings_hz: probes.iter().map(|p| to_cyclic(*p)).collect(),
            optimal_pump_closed_form_hz: to_cyclic(opt.closed_form),
            optimal_pump_corrected_hz: to_cyclic(opt.corrected),
            peak_t2: opt.peak_t2,
        },
    )?;

    let matrix_csv = |m: &Vec<Vec<f64>>| -> Vec<Vec<String>> {
        m.iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = vec![fmt_f(to_cyclic(amps[i]))];
                r.extend(row.iter().map(|x| fmt_f(*x)));
                r
            })
            .collect()
    };
    let mut header = String::from("amplitude_hz");
    for p in &probes {
        header.push_str(&format!(",{}", fmt_f(to_cyclic(*p))));
    }
    session.write_csv("raman_t2.csv", &header, &matrix_csv(&sweep.t2))?;
    session.write_csv("raman_r2.csv", &header, &matrix_csv(&sweep.r2))
}

fn moments_row(theta: f64, with_pi2: bool, m: &MomentSet<f64>) -> Vec<String> {
    vec![
        fmt_f(theta),
        (with_pi2 as u8).to_string(),
        fmt_f(m.a_minus.re),
        fmt_f(m.a_minus.im),
        fmt_f(m.a_plus.re),
        fmt_f(m.a_plus.im),
        fmt_f(m.n_minus),
        fmt_f(m.n_plus),
        fmt_f(m.cross.re),
        fmt_f(m.cross.im),
        fmt_f(m.anomalous.re),
        fmt_f(m.anomalous.im),
    ]
}

const MOMENTS_HEADER: &str = "theta,with_pi2,a_minus_re,a_minus_im,a_plus_re,a_plus_im,\
n_minus,n_plus,cross_re,cross_im,anomalous_re,anomalous_im";

fn task_bell(config: &RunConfig, session: &mut OutputSession) -> Result<()> {
    use rayon::prelude::*;
    let bc = config.bell.as_ref().expect("validated");
    let model = build_model(config)?;
    let mut opts = BellOptions::reference_window(&model);
    opts.window = bc.window_s;
    opts.n_grid = bc.n_grid;
    if let Some(tol) = config.tolerance {
        opts.evolve.integrator.rtol = tol;
    }

    let thetas: Vec<f64> = (0..bc.theta_points)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / (bc.theta_points - 1).max(1) as f64)
        .collect();
    let cases: Vec<(f64, bool)> = thetas
        .iter()
        .flat_map(|&t| [(t, true), (t, false)])
        .collect();
    let results: Vec<twinmon::Result<MomentSet<f64>>> = cases
        .par_iter()
        .map(|&(theta, with_pi2)| bell_sequence_moments(&model, theta, with_pi2, &opts))
        .collect();

    let mut rows = Vec::new();
    let mut oracle_rows = Vec::new();
    for ((theta, with_pi2), res) in cases.iter().zip(results) {
        rows.push(moments_row(*theta, *with_pi2, &res?));
        oracle_rows.push(moments_row(
            *theta,
            *with_pi2,
            &state_vector_oracle(*theta, *with_pi2),
        ));
    }
    session.write_csv("bell_moments.csv", MOMENTS_HEADER, &rows)?;
    session.write_csv("bell_moments_ideal.csv", MOMENTS_HEADER, &oracle_rows)?;

    if bc.export_trajectory || bc.export_correlations {
        export_bell_internals(&model, bc, &opts, session)?;
    }
    Ok(())
}

/// Trajectory and correlation-kernel exports of the θ = π sequence.
fn export_bell_internals(
    model: &MoleculeModel<f64>,
    bc: &crate::config::BellConfig,
    opts: &BellOptions<f64>,
    session: &mut OutputSession,
) -> Result<()> {
    use twinmon::dynamics::{
        lindblad_evolve, lowering, pure_state, two_time_correlation, PulseSequence, UniformGrid,
    };
    use twinmon::molecule::StateLabel as L;
    let theta = std::f64::consts::PI;
    if bc.export_trajectory {
        let seq = PulseSequence::bell(theta, true, bc.window_s);
        let traj = lindblad_evolve(model, &pure_state(L::Ground), &seq, &opts.evolve)?;
        let rows: Vec<Vec<String>> = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(t, rho)| {
                let mut row = vec![fmt_f(*t)];
                for k in 0..6 {
                    row.push(fmt_f(rho[(k, k)].re));
                }
                row.push(fmt_f(rho[(1, 0)].norm()));
                row.push(fmt_f(rho[(2, 0)].norm()));
                row.push(fmt_f(rho[(2, 1)].norm()));
                row
            })
            .collect();
        session.write_csv(
            "bell_trajectory.csv",
            "time_s,pop_0,pop_a,pop_s,pop_2m,pop_2pL,pop_2pU,coh_a0,coh_s0,coh_sa",
            &rows,
        )?;
    }
    if bc.export_correlations {
        let seq = PulseSequence::bell(theta, true, 0.0);
        let prepared = lindblad_evolve(model, &pure_state(L::Ground), &seq, &opts.evolve)?;
        let rho0 = prepared.last().clone();
        let liouv = model.free_liouvillian();
        let grid = UniformGrid::over_window(bc.window_s, bc.n_grid)?;
        let sig_a = lowering::<f64>(L::SingleOdd, L::Ground);
        let sig_s = lowering::<f64>(L::SingleEven, L::Ground);
        for (name, a, b) in [
            ("bell_g_aa.csv", sig_a.adjoint(), sig_a.clone()),
            ("bell_g_as.csv", sig_a.adjoint(), sig_s.clone()),
        ] {
            let g = two_time_correlation(&liouv, &rho0, &a, &b, &grid)?;
            let rows: Vec<Vec<String>> = (0..grid.n)
                .map(|i| {
                    let mut row = vec![fmt_f(grid.at(i))];
                    row.extend((0..grid.n).map(|j| fmt_f(g[(i, j)].norm())));
                    row
                })
                .collect();
            let mut header = String::from("time_s");
            for j in 0..grid.n {
                header.push_str(&format!(",{}", fmt_f(grid.at(j))));
            }
            session.write_csv(name, &header, &rows)?;
        }
    }
    Ok(())
}

fn task_autler(config: &RunConfig, session: &mut OutputSession) -> Result<()> {
    let ac = config.autler.as_ref().expect("validated");
    let model = build_model(config)?;
    let pump_port = parse_port(&ac.pump_port)?;

    let mut split_rows = Vec::new();
    let mut spec_rows = Vec::new();
    for &pump_hz in &ac.pump_amplitudes_hz {
        let pump = twinmon::units::cyclic(pump_hz);
        let half = 1.3 * pump + twinmon::units::cyclic(2e6);
        let grid: Vec<f64> = (0..ac.points)
            .map(|k| -half + 2.0 * half * k as f64 / (ac.points - 1) as f64)
            .collect();
        let res = autler_townes_spectrum(&model, pump_port, pump, 0.0, &grid, None)?;
        split_rows.push(vec![
            fmt_f(pump_hz),
            res.splitting
                .map(|s| fmt_f(to_cyclic(s)))
                .unwrap_or_default(),
            res.warnings.join("; "),
        ]);
        for &(f, r) in &res.spectrum.points {
            spec_rows.push(vec![
                fmt_f(pump_hz),
                fmt_f(to_cyclic(f)),
                fmt_f(r.re),
                fmt_f(r.im),
                fmt_f(r.norm()),
            ]);
        }
    }
    session.write_csv(
        "autler_splitting.csv",
        "pump_hz,splitting_hz,warnings",
        &split_rows,
    )?;
    session.write_csv(
        "autler_spectra.csv",
        "pump_hz,frequency_hz,re,im,abs",
        &spec_rows,
    )
}

fn task_shots(config: &RunConfig, session: &mut OutputSession) -> Result<()> {
    let sc = config.shots.as_ref().expect("validated");
    let truth = state_vector_oracle::<f64>(sc.theta, sc.with_pi2);
    let est = shot_estimator(&truth, sc.noise_photons, sc.n_shots, config.seed)?;

    #[derive(Serialize)]
    struct Moment {
        re: f64,
        im: f64,
        err_re: f64,
        err_im: f64,
    }
    #[derive(Serialize)]
    struct ShotReport {
        theta: f64,
        with_pi2: bool,
        noise_photons: f64,
        n_shots: u64,
        seed: u64,
        truth: Vec<(String, f64, f64)>,
        a_minus: Moment,
        a_plus: Moment,
        n_minus: Moment,
        n_plus: Moment,
        cross: Moment,
        anomalous: Moment,
        note: String,
    }
    let errs = est.errors.as_ref().expect("estimator reports errors");
    let cm = |v: Complex64, e: Complex64| Moment {
        re: v.re,
        im: v.im,
        err_re: e.re,
        err_im: e.im,
    };
    session.write_json(
        "shots.json",
        &ShotReport {
            theta: sc.theta,
            with_pi2: sc.with_pi2,
            noise_photons: sc.noise_photons,
            n_shots: sc.n_shots,
            seed: config.seed,
            truth: vec![
                ("a_minus".into(), truth.a_minus.re, truth.a_minus.im),
                ("a_plus".into(), truth.a_plus.re, truth.a_plus.im),
                ("n_minus".into(), truth.n_minus, 0.0),
                ("n_plus".into(), truth.n_plus, 0.0),
                ("cross".into(), truth.cross.re, truth.cross.im),
                ("anomalous".into(), truth.anomalous.re, truth.anomalous.im),
            ],
            a_minus: cm(est.a_minus, errs.a_minus),
            a_plus: cm(est.a_plus, errs.a_plus),
            n_minus: cm(
                Complex64::new(est.n_minus, 0.0),
                Complex64::new(errs.n_minus, 0.0),
            ),
            n_plus: cm(
                Complex64::new(est.n_plus, 0.0),
                Complex64::new(errs.n_plus, 0.0),
            ),
            cross: cm(est.cross, errs.cross),
            anomalous: cm(est.anomalous, errs.anomalous),
            note: est.normalization.note.clone(),
        },
    )
}
