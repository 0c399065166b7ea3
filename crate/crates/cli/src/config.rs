//! Run configuration: a single TOML file with a published schema.
//!
//! All frequencies, rates and amplitudes are cyclic (Hz) with the usual
//! "/2π" reading and are converted to angular units at this boundary.
//! Unknown keys are errors. Missing molecule or coupling tables fall
//! back to the bundled reference-device characterization.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{CliError, Result};
use twinmon::scattering::Mode;
use twinmon::units::cyclic;
use twinmon::{MoleculeParams, Port, PortCouplings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Eigen,
    Dipoles,
    Reflectance,
    Fit,
    Raman,
    Bell,
    Autler,
    Shots,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Task::Eigen => "eigen",
            Task::Dipoles => "dipoles",
            Task::Reflectance => "reflectance",
            Task::Fit => "fit",
            Task::Raman => "raman",
            Task::Bell => "bell",
            Task::Autler => "autler",
            Task::Shots => "shots",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for Task {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigen" => Ok(Task::Eigen),
            "dipoles" => Ok(Task::Dipoles),
            "reflectance" => Ok(Task::Reflectance),
            "fit" => Ok(Task::Fit),
            "raman" => Ok(Task::Raman),
            "bell" => Ok(Task::Bell),
            "autler" => Ok(Task::Autler),
            "shots" => Ok(Task::Shots),
            other => Err(CliError::Config(format!(
                "unknown task `{other}` (expected eigen|dipoles|reflectance|fit|raman|bell|autler|shots)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeConfig {
    pub omega_hz: f64,
    pub alpha_hz: f64,
    pub g_hz: f64,
    pub n_levels: usize,
    /// Second-transmon overrides for non-identical studies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega2_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha2_hz: Option<f64>,
}

impl Default for MoleculeConfig {
    fn default() -> Self {
        Self {
            omega_hz: 5.9945e9,
            alpha_hz: -246.9e6,
            g_hz: 296.4e6,
            n_levels: 3,
            omega2_hz: None,
            alpha2_hz: None,
        }
    }
}

impl MoleculeConfig {
    pub fn to_params(&self) -> Result<MoleculeParams<f64>> {
        let p = MoleculeParams {
            omega1: cyclic(self.omega_hz),
            omega2: cyclic(self.omega2_hz.unwrap_or(self.omega_hz)),
            alpha1: cyclic(self.alpha_hz),
            alpha2: cyclic(self.alpha2_hz.unwrap_or(self.alpha_hz)),
            g: cyclic(self.g_hz),
            n_levels: self.n_levels,
        };
        p.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingsConfig {
    pub gamma_s_hz: f64,
    pub gamma_a_hz: f64,
    pub gamma_s_cross_hz: f64,
    pub gamma_a_cross_hz: f64,
    #[serde(default)]
    pub gamma_phi_s_hz: f64,
    #[serde(default)]
    pub gamma_phi_a_hz: f64,
}

impl Default for CouplingsConfig {
    fn default() -> Self {
        Self {
            gamma_s_hz: 1.388e6,
            gamma_a_hz: 0.311e6,
            gamma_s_cross_hz: 29.8e3,
            gamma_a_cross_hz: 8.8e3,
            gamma_phi_s_hz: 0.0,
            gamma_phi_a_hz: 0.0,
        }
    }
}

impl CouplingsConfig {
    pub fn to_couplings(&self) -> Result<PortCouplings<f64>> {
        let c = PortCouplings {
            gamma_s: cyclic(self.gamma_s_hz),
            gamma_a: cyclic(self.gamma_a_hz),
            gamma_s_cross: cyclic(self.gamma_s_cross_hz),
            gamma_a_cross: cyclic(self.gamma_a_cross_hz),
            gamma_phi_s: cyclic(self.gamma_phi_s_hz),
            gamma_phi_a: cyclic(self.gamma_phi_a_hz),
        };
        c.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(c)
    }
}

fn default_points() -> usize {
    801
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectanceConfig {
    /// Probed collective mode: "s" or "a".
    pub mode: String,
    /// Probing waveguide: "S" or "A".
    pub port: String,
    /// Rabi amplitudes of the swept tones.
    pub amplitudes_hz: Vec<f64>,
    pub span_hz: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

impl Default for ReflectanceConfig {
    fn default() -> Self {
        Self {
            mode: "a".into(),
            port: "A".into(),
            amplitudes_hz: vec![0.0, 0.11e6, 0.2199e6, 0.44e6, 0.88e6],
            span_hz: 10e6,
            points: default_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasuredSpectrum {
    /// CSV with header and columns frequency_hz, re, im.
    pub file: String,
    /// Sidecar metadata: nominal drive amplitude of this spectrum.
    pub amplitude_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub mode: String,
    /// Synthetic-data amplitudes when no measured spectra are given.
    pub amplitudes_hz: Vec<f64>,
    pub span_hz: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Additive complex-noise SNR for synthetic data, dB (omit for
    /// noiseless).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub fit_dephasing: bool,
    /// Measured spectra (overrides the synthetic generator).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub data: Vec<MeasuredSpectrum>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            mode: "a".into(),
            amplitudes_hz: vec![4.4e3, 11e3, 66e3, 155.5e3, 330e3, 880e3],
            span_hz: 2.5e6,
            points: default_points(),
            snr_db: None,
            fit_dephasing: false,
            data: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamanConfig {
    pub delta_hz: f64,
    pub amp_max_hz: f64,
    pub amp_points: usize,
    pub probe_span_hz: f64,
    pub probe_points: usize,
}

impl Default for RamanConfig {
    fn default() -> Self {
        Self {
            delta_hz: 300e6,
            amp_max_hz: 40e6,
            amp_points: 81,
            probe_span_hz: 16e6,
            probe_points: 401,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellConfig {
    pub theta_points: usize,
    /// Acquisition window, seconds.
    pub window_s: f64,
    #[serde(default = "default_bell_grid")]
    pub n_grid: usize,
    /// Also write the density-matrix trajectory of the θ = π sequence.
    #[serde(default)]
    pub export_trajectory: bool,
    /// Also write the |G(t,t′)| output-field correlation kernels of the
    /// θ = π sequence.
    #[serde(default)]
    pub export_correlations: bool,
}

fn default_bell_grid() -> usize {
    257
}

impl Default for BellConfig {
    fn default() -> Self {
        Self {
            theta_points: 17,
            window_s: 1.02e-6,
            n_grid: default_bell_grid(),
            export_trajectory: false,
            export_correlations: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutlerConfig {
    /// Pumped waveguide: "S" (pump a↔2−) or "A" (pump s↔2−).
    pub pump_port: String,
    pub pump_amplitudes_hz: Vec<f64>,
    #[serde(default = "default_autler_points")]
    pub points: usize,
}

fn default_autler_points() -> usize {
    6001
}

impl Default for AutlerConfig {
    fn default() -> Self {
        Self {
            pump_port: "S".into(),
            pump_amplitudes_hz: vec![3e6, 5e6, 7.65e6, 10e6, 14e6, 17e6, 20e6],
            points: default_autler_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotsConfig {
    /// Rotation angle of the sequence whose moments are estimated.
    pub theta: f64,
    #[serde(default = "default_true")]
    pub with_pi2: bool,
    pub noise_photons: f64,
    pub n_shots: u64,
}

fn default_true() -> bool {
    true
}

impl Default for ShotsConfig {
    fn default() -> Self {
        Self {
            theta: std::f64::consts::PI,
            with_pi2: true,
            noise_photons: 10.0,
            n_shots: 1_000_000,
        }
    }
}

/// One measured second-manifold decay rate pinned in place of the
/// dipole-ratio default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayOverride {
    /// Upper state: "2-", "2+L" or "2+U".
    pub from: String,
    /// Lower state: "a" or "s".
    pub to: String,
    /// Receiving waveguide: "S" or "A".
    pub port: String,
    pub rate_hz: f64,
}

/// The resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Integrator relative tolerance override.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub molecule: MoleculeConfig,
    #[serde(default)]
    pub couplings: CouplingsConfig,
    /// Measured overrides of the second-manifold decay rates.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decay_overrides: Vec<DecayOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reflectance: Option<ReflectanceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raman: Option<RamanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bell: Option<BellConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub autler: Option<AutlerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<ShotsConfig>,
}

impl RunConfig {
    pub fn for_task(task: Task) -> Self {
        let mut cfg = Self {
            task,
            seed: 0,
            out_dir: None,
            workers: None,
            tolerance: None,
            molecule: MoleculeConfig::default(),
            couplings: CouplingsConfig::default(),
            decay_overrides: Vec::new(),
            reflectance: None,
            fit: None,
            raman: None,
            bell: None,
            autler: None,
            shots: None,
        };
        cfg.fill_task_defaults();
        cfg
    }

    /// Populate the section of the selected task with defaults if the
    /// file omitted it, so the serialized snapshot is fully resolved.
    pub fn fill_task_defaults(&mut self) {
        match self.task {
            Task::Reflectance => {
                self.reflectance.get_or_insert_with(Default::default);
            }
            Task::Fit => {
                self.fit.get_or_insert_with(Default::default);
            }
            Task::Raman => {
                self.raman.get_or_insert_with(Default::default);
            }
            Task::Bell => {
                self.bell.get_or_insert_with(Default::default);
            }
            Task::Autler => {
                self.autler.get_or_insert_with(Default::default);
            }
            Task::Shots => {
                self.shots.get_or_insert_with(Default::default);
            }
            Task::Eigen | Task::Dipoles => {}
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.molecule.to_params()?;
        self.couplings.to_couplings()?;
        for o in &self.decay_overrides {
            parse_upper_label(&o.from)?;
            parse_lower_label(&o.to)?;
            parse_port(&o.port)?;
            if o.rate_hz < 0.0 {
                return Err(CliError::Config(format!(
                    "decay_overrides rate_hz for {}->{} must be >= 0",
                    o.from, o.to
                )));
            }
        }
        if let Some(r) = &self.reflectance {
            parse_mode(&r.mode)?;
            parse_port(&r.port)?;
            if r.amplitudes_hz.is_empty() {
                return Err(CliError::Config(
                    "reflectance.amplitudes_hz is empty".into(),
                ));
            }
            if r.points < 3 {
                return Err(CliError::Config("reflectance.points must be >= 3".into()));
            }
            if r.span_hz <= 0.0 {
                return Err(CliError::Config("reflectance.span_hz must be > 0".into()));
            }
            for a in &r.amplitudes_hz {
                if *a < 0.0 {
                    return Err(CliError::Config(
                        "reflectance.amplitudes_hz entries must be >= 0".into(),
                    ));
                }
            }
        }
        if let Some(f) = &self.fit {
            parse_mode(&f.mode)?;
            if f.data.is_empty() && f.amplitudes_hz.len() < 2 {
                return Err(CliError::Config(
                    "fit.amplitudes_hz needs >= 2 drive amplitudes".into(),
                ));
            }
            for d in &f.data {
                if !Path::new(&d.file).exists() {
                    return Err(CliError::Config(format!(
                        "fit.data file `{}` does not exist",
                        d.file
                    )));
                }
            }
        }
        if let Some(r) = &self.raman {
            if r.delta_hz == 0.0 {
                return Err(CliError::Config("raman.delta_hz must be nonzero".into()));
            }
            if r.amp_points == 0 || r.probe_points == 0 {
                return Err(CliError::Config("raman grids must be nonempty".into()));
            }
        }
        if let Some(b) = &self.bell {
            if b.theta_points == 0 {
                return Err(CliError::Config("bell.theta_points must be >= 1".into()));
            }
            if b.window_s <= 0.0 {
                return Err(CliError::Config("bell.window_s must be > 0".into()));
            }
            if b.n_grid < 3 || b.n_grid % 2 == 0 {
                return Err(CliError::Config("bell.n_grid must be odd and >= 3".into()));
            }
        }
        if let Some(a) = &self.autler {
            parse_port(&a.pump_port)?;
            if a.pump_amplitudes_hz.is_empty() {
                return Err(CliError::Config(
                    "autler.pump_amplitudes_hz is empty".into(),
                ));
            }
        }
        if let Some(s) = &self.shots {
            if s.n_shots == 0 {
                return Err(CliError::Config("shots.n_shots must be >= 1".into()));
            }
            if s.noise_photons < 0.0 {
                return Err(CliError::Config("shots.noise_photons must be >= 0".into()));
            }
        }
        Ok(())
    }
}

pub fn parse_mode(s: &str) -> Result<Mode> {
    match s {
        "s" | "S" | "sym" => Ok(Mode::Sym),
        "a" | "A" | "antisym" => Ok(Mode::Antisym),
        other => Err(CliError::Config(format!(
            "unknown mode `{other}` (expected \"s\" or \"a\")"
        ))),
    }
}

pub fn parse_upper_label(s: &str) -> Result<twinmon::molecule::StateLabel> {
    use twinmon::molecule::StateLabel as L;
    match s {
        "2-" => Ok(L::DoubleOdd),
        "2+L" => Ok(L::DoubleEvenLower),
        "2+U" => Ok(L::DoubleEvenUpper),
        other => Err(CliError::Config(format!(
            "unknown upper state `{other}` (expected \"2-\", \"2+L\" or \"2+U\")"
        ))),
    }
}

pub fn parse_lower_label(s: &str) -> Result<twinmon::molecule::StateLabel> {
    use twinmon::molecule::StateLabel as L;
    match s {
        "a" => Ok(L::SingleOdd),
        "s" => Ok(L::SingleEven),
        other => Err(CliError::Config(format!(
            "unknown lower state `{other}` (expected \"a\" or \"s\")"
        ))),
    }
}

pub fn parse_port(s: &str) -> Result<Port> {
    match s {
        "S" | "s" => Ok(Port::S),
        "A" | "a" => Ok(Port::A),
        other => Err(CliError::Config(format!(
            "unknown port `{other}` (expected \"S\" or \"A\")"
        ))),
    }
}

/// Parse and validate a configuration file, filling defaults so the
/// result is a complete snapshot.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    load_config_str(&text)
}

/// Parse and validate configuration text.
pub fn load_config_str(text: &str) -> Result<RunConfig> {
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.fill_task_defaults();
    cfg.validate()?;
    Ok(cfg)
}

/// Serialize a resolved configuration back to TOML.
pub fn serialize_config(cfg: &RunConfig) -> Result<String> {
    toml::to_string_pretty(cfg).map_err(|e| CliError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_reference_defaults() {
        let cfg = load_config_str("task = \"eigen\"").unwrap();
        assert_eq!(cfg.molecule.omega_hz, 5.9945e9);
        assert_eq!(cfg.molecule.alpha_hz, -246.9e6);
        assert_eq!(cfg.molecule.g_hz, 296.4e6);
        assert_eq!(cfg.couplings.gamma_s_hz, 1.388e6);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let err = load_config_str("task = \"eigen\"\nfrobnicate = 3").unwrap_err();
        assert!(err.to_string().contains("frobnicate"), "{err}");
        let err =
            load_config_str("task = \"eigen\"\n[molecule]\nomega_hz = 1e9\nalpha_hz = -1e8\ng_hz = 1e8\nn_levels = 3\nbogus = 1").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn negative_rate_is_named_in_the_error() {
        let text = r#"
task = "eigen"
[couplings]
gamma_s_hz = 1.388e6
gamma_a_hz = -0.311e6
gamma_s_cross_hz = 29.8e3
gamma_a_cross_hz = 8.8e3
"#;
        let err = load_config_str(text).unwrap_err();
        assert!(err.to_string().contains("gamma_a"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn round_trip_is_identity() {
        let mut cfg = RunConfig::for_task(Task::Raman);
        cfg.seed = 42;
        cfg.molecule.n_levels = 4;
        let text = serialize_config(&cfg).unwrap();
        let back = load_config_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = load_config_str("task = \"eigen\"\n= broken").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line") || msg.contains('2'), "{msg}");
    }
}
