//! Pre-baked recipes producing plot-ready theory curves for the standard
//! characterization figures of the reference device.

use std::path::Path;

use crate::config::{RunConfig, Task};
use crate::error::{CliError, Result};
use crate::output::{fmt_f, OutputSession, RunManifest};
use crate::tasks;
use twinmon::dynamics::{capture_efficiency, MoleculeModel};
use twinmon::molecule::StateLabel;
use twinmon::scattering::{magic_amplitude, reflectance, DriveTone, Mode};
use twinmon::units::{cyclic, to_cyclic};
use twinmon::Port;

/// Known figure recipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    /// Single-tone reflection spectroscopy: spectra and IQ circles.
    Fig2,
    /// Frequency-conversion maps and optimal-pump slices.
    Fig3,
    /// Moments of the propagating modes vs rotation angle.
    Fig4,
    /// On-resonance reflectance vs drive power.
    FigS2,
    /// Pump calibration by dressed-state splitting.
    FigS3,
    /// Transition-frequency table with port labels.
    FigS5,
}

impl std::str::FromStr for FigureId {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(FigureId::Fig2),
            "fig3" => Ok(FigureId::Fig3),
            "fig4" => Ok(FigureId::Fig4),
            "figS2" | "figs2" => Ok(FigureId::FigS2),
            "figS3" | "figs3" => Ok(FigureId::FigS3),
            "figS5" | "figs5" => Ok(FigureId::FigS5),
            other => Err(CliError::Config(format!(
                "unknown figure `{other}` (expected fig2|fig3|fig4|figS2|figS3|figS5)"
            ))),
        }
    }
}

impl std::fmt::Display for FigureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::FigS2 => "figS2",
            FigureId::FigS3 => "figS3",
            FigureId::FigS5 => "figS5",
        };
        write!(f, "{s}")
    }
}

/// Run the recipe for `figure`, writing plot data under `out_dir`.
pub fn reproduce_figure(figure: FigureId, base: &RunConfig, out_dir: &Path) -> Result<RunManifest> {
    let mut config = base.clone();
    match figure {
        FigureId::Fig2 => {
            config.task = Task::Reflectance;
            config.fill_task_defaults();
            config.validate()?;
            let mut session = OutputSession::create(out_dir)?;
            match fig2(&config, &mut session) {
                Ok(()) => session.finish(&config),
                Err(e) => {
                    session.discard();
                    Err(e)
                }
            }
        }
        FigureId::Fig3 => {
            config.task = Task::Raman;
            config.fill_task_defaults();
            let mut session = OutputSession::create(out_dir)?;
            match fig3(&config, &mut session) {
                Ok(()) => session.finish(&config),
                Err(e) => {
                    session.discard();
                    Err(e)
                }
            }
        }
        FigureId::Fig4 => {
            config.task = Task::Bell;
            config.fill_task_defaults();
            tasks::run_task(&config, out_dir)
        }
        FigureId::FigS2 => {
            config.task = Task::Reflectance;
            config.fill_task_defaults();
            let mut session = OutputSession::create(out_dir)?;
            match fig_s2(&config, &mut session) {
                Ok(()) => session.finish(&config),
                Err(e) => {
                    session.discard();
                    Err(e)
                }
            }
        }
        FigureId::FigS3 => {
            config.task = Task::Autler;
            config.fill_task_defaults();
            tasks::run_task(&config, out_dir)
        }
        FigureId::FigS5 => {
            config.task = Task::Dipoles;
            config.fill_task_defaults();
            tasks::run_task(&config, out_dir)
        }
    }
}

/// Reflectance spectra from both waveguides plus IQ circles of the two
/// over-coupled lines at a ladder of drive amplitudes.
fn fig2(config: &RunConfig, session: &mut OutputSession) -> Result<()> {
    let couplings = config.couplings.to_couplings()?;
    let params = config.molecule.to_params()?;
    let model = MoleculeModel::new(params, couplings)?;
    let omega_s = model.eigen.energy(StateLabel::SingleEven).unwrap();
    let omega_a = model.eigen.energy(StateLabel::SingleOdd).unwrap();

    // panel (a): both modes seen from each waveguide; at the magic
    // amplitude of the over-coupled line its reflection is fully
    // suppressed while the other line keeps its shallow dip
    let mut rows = Vec::new();
    for (port, label, over_coupled) in [(Port::A, "A", Mode::Antisym), (Port::S, "S", Mode::Sym)] {
        let magic = magic_amplitude(&couplings, over_coupled)?;
        for amp in [0.0, magic] {
            let f_lo = omega_a - cyclic(12e6);
            let f_hi = omega_s + cyclic(12e6);
            let n = 12001;
            for k in 0..n {
                let f = f_lo + (f_hi - f_lo) * k as f64 / (n - 1) as f64;
                let tone = DriveTone::new(port, f, amp);
                // both lines contribute; in this narrow band they are far
                // apart, so take the product of the single-line responses
                let ra = reflectance(omega_a, &couplings, Mode::Antisym, port, &tone)?;
                let rs = reflectance(omega_s, &couplings, Mode::Sym, port, &tone)?;
                let r = ra * rs;
                rows.push(vec![
                    label.to_string(),
                    fmt_f(to_cyclic(amp)),
                    fmt_f(to_cyclic(f)),
                    fmt_f(r.re),
                    fmt_f(r.im),
                    fmt_f(r.norm()),
                ]);
            }
        }
    }
    session.write_csv(
        "fig2a_spectra.csv",
        "port,amplitude_hz,frequency_hz,re,im,abs",
        &rows,
    )?;

    // panels (b, c): IQ circles vs drive amplitude
    let mut rows = Vec::new();
    for (mode, w0, label) in [(Mode::Antisym, omega_a, "a"), (Mode::Sym, omega_s, "s")] {
        let magic = magic_amplitude(&couplings, mode)?;
        for mult in [0.1, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let spec = twinmon::scattering::iq_circle(
                w0,
                &couplings,
                mode,
                mode.home_port(),
                magic * mult,
                cyclic(8e6),
                1601,
            )?;
            for &(f, r) in &spec.points {
                rows.push(vec![
                    label.to_string(),
                    fmt_f(to_cyclic(magic * mult)),
                    fmt_f(to_cyclic(f)),
                    fmt_f(r.re),
                    fmt_f(r.im),
                ]);
            }
        }
    }
    session.write_csv(
        "fig2bc_iq.csv",
        "mode,amplitude_hz,frequency_hz,re,im",
        &rows,
    )
}

/// Conversion maps plus the optimal-amplitude slice and peak curves.
fn fig3(config: &RunConfig, session: &mut OutputSession) -> Result<()> {
    use twinmon::raman::{conversion_spectra, optimal_pump, RamanConfig as CoreRamanConfig};
    // the 2D maps reuse the raman task payloads
    tasks::write_raman_maps(config, session)?;

    let rc = config.raman.as_ref().expect("filled");
    let couplings = config.couplings.to_couplings()?;
    let params = config.molecule.to_params()?;
    let model = MoleculeModel::new(params, couplings)?;
    let delta = cyclic(rc.delta_hz);
    let opt = optimal_pump(&couplings, delta)?;

    let omega_s = model.eigen.energy(StateLabel::SingleEven).unwrap();
    let omega_a = model.eigen.energy(StateLabel::SingleOdd).unwrap();
    let e2m = model.eigen.energy(StateLabel::DoubleOdd).unwrap();

    // panel (d): spectra at the optimal pump
    let n = 2001;
    let half = cyclic(4e6);
    let stark = opt.corrected.powi(2) / (2.0 * delta);
    let probes: Vec<f64> = (0..n)
        .map(|k| -stark - half + 2.0 * half * k as f64 / (n - 1) as f64)
        .collect();
    let cfg =
        CoreRamanConfig::symmetric_pumps(couplings, omega_s, omega_a, e2m, delta, opt.corrected);
    let spec = conversion_spectra(&cfg, &probes)?;
    let rows: Vec<Vec<String>> = (0..n)
        .map(|k| {
            vec![
                fmt_f(to_cyclic(spec.detuning[k])),
                fmt_f(spec.t2[k]),
                fmt_f(spec.r2[k]),
            ]
        })
        .collect();
    session.write_csv("fig3d_slice.csv", "probe_detuning_hz,t2,r2", &rows)?;

    // panel (e): best conversion and corresponding reflection vs pump
    let mut rows = Vec::new();
    let n_amp = 121;
    for k in 1..=n_amp {
        let amp = 2.5 * opt.corrected * k as f64 / n_amp as f64;
        let stark = amp * amp / (2.0 * delta);
        let coupling = amp * amp / (2.0 * delta);
        let span = 3.0 * (coupling + couplings.gamma2_s() + couplings.gamma2_a());
        let m = 1201;
        let probes: Vec<f64> = (0..m)
            .map(|j| -stark - span + 2.0 * span * j as f64 / (m - 1) as f64)
            .collect();
        let mut cfg = cfg;
        cfg.amp_plus = amp;
        cfg.amp_minus = amp;
        let spec = conversion_spectra(&cfg, &probes)?;
        let (jmax, best_t2) = spec
            .t2
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(j, v)| (j, *v))
            .unwrap();
        rows.push(vec![
            fmt_f(to_cyclic(amp)),
            fmt_f(best_t2),
            fmt_f(spec.r2[jmax]),
        ]);
    }
    session.write_csv("fig3e_peaks.csv", "amplitude_hz,max_t2,r2_at_peak", &rows)
}

/// On-resonance reflectance vs drive amplitude for both over-coupled
/// lines.
fn fig_s2(config: &RunConfig, session: &mut OutputSession) -> Result<()> {
    let couplings = config.couplings.to_couplings()?;
    let params = config.molecule.to_params()?;
    let model = MoleculeModel::new(params, couplings)?;
    let omega_s = model.eigen.energy(StateLabel::SingleEven).unwrap();
    let omega_a = model.eigen.energy(StateLabel::SingleOdd).unwrap();
    let mut rows = Vec::new();
    for (mode, w0, label) in [(Mode::Antisym, omega_a, "a"), (Mode::Sym, omega_s, "s")] {
        let magic = magic_amplitude(&couplings, mode)?;
        let n = 1201;
        for k in 0..n {
            // logarithmic amplitude ladder around the magic point
            let exp = -3.0 + 5.0 * k as f64 / (n - 1) as f64;
            let amp = magic * 10f64.powf(exp);
            let tone = DriveTone::new(mode.home_port(), w0, amp);
            let r = reflectance(w0, &couplings, mode, mode.home_port(), &tone)?;
            rows.push(vec![
                label.to_string(),
                fmt_f(to_cyclic(amp)),
                fmt_f(r.norm()),
            ]);
        }
    }
    session.write_csv("figS2_saturation.csv", "mode,amplitude_hz,abs_r", &rows)?;

    // reference note: matched-filter capture over the hardware window
    let rows = vec![
        vec![
            "A".into(),
            fmt_f(capture_efficiency(model.couplings.gamma1_a(), 1.02e-6)),
            fmt_f(0.748),
        ],
        vec![
            "S".into(),
            fmt_f(capture_efficiency(model.couplings.gamma1_s(), 1.02e-6)),
            fmt_f(0.989),
        ],
    ];
    session.write_csv(
        "capture_efficiency.csv",
        "port,model_eta_1p02us,reported_eta",
        &rows,
    )
}
