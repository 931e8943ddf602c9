//! On-disk formats: scenario JSON, coupling matrices and saved states.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use holo_isac_core::linalg::CMat;
use holo_isac_core::math::{db_to_linear, dbm_to_watts, linear_to_db};
use holo_isac_core::optimize::{reference_scenario, PhasedArrayConfig, REFERENCE_CLUTTER_GAIN, REFERENCE_SENSING_GAIN};
use holo_isac_core::rhs::{CouplingModel, CouplingSource, GridSpec, RhsConfig, SyntheticCoupling};
use holo_isac_core::scenario::{BeamformingState, Direction, Scenario, Thresholds, User};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSpec {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub range_m: f64,
}

/// Thresholds as written in scenario files; gains in dB, rates in bps/Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub sensing_gain_db: Vec<f64>,
    #[serde(default)]
    pub clutter_gain_db: Vec<f64>,
    pub rate_bps_hz: Vec<f64>,
    #[serde(default)]
    pub ratio_lower: Vec<f64>,
    #[serde(default)]
    pub ratio_upper: Vec<f64>,
}

/// Scenario file. Power levels are in dBm and gain thresholds in dB; both
/// are converted to linear units on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default)]
    pub surface: GridSpec,
    #[serde(default)]
    pub coupling: SyntheticCoupling,
    pub users: Vec<UserSpec>,
    pub sensing: Vec<Direction>,
    #[serde(default)]
    pub clutterers: Vec<Direction>,
    pub thresholds: ThresholdSpec,
    pub power_dbm: f64,
    pub noise_dbm: f64,
    pub sensing_waveforms: usize,
}

impl ScenarioFile {
    pub fn reference() -> Self {
        let s = reference_scenario();
        ScenarioFile {
            surface: GridSpec::default(),
            coupling: SyntheticCoupling::default(),
            users: s
                .users
                .iter()
                .map(|u| UserSpec {
                    theta_deg: u.direction.theta_deg,
                    phi_deg: u.direction.phi_deg,
                    range_m: u.range_m,
                })
                .collect(),
            sensing: s.sensing_dirs.clone(),
            clutterers: s.clutterers.clone(),
            thresholds: ThresholdSpec {
                sensing_gain_db: vec![linear_to_db(REFERENCE_SENSING_GAIN); s.sensing_dirs.len()],
                clutter_gain_db: vec![linear_to_db(REFERENCE_CLUTTER_GAIN); s.clutterers.len()],
                rate_bps_hz: s.thresholds.r_th_l.clone(),
                ratio_lower: s.thresholds.gamma_l_d.clone(),
                ratio_upper: s.thresholds.gamma_u_d.clone(),
            },
            power_dbm: 43.0,
            noise_dbm: -96.0,
            sensing_waveforms: s.num_waveforms,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing scenario {}", path.display()))
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let th = &self.thresholds;
        let s = Scenario {
            users: self
                .users
                .iter()
                .map(|u| User {
                    direction: Direction::new(u.theta_deg, u.phi_deg),
                    range_m: u.range_m,
                })
                .collect(),
            sensing_dirs: self.sensing.clone(),
            clutterers: self.clutterers.clone(),
            thresholds: Thresholds {
                g_th_d: th.sensing_gain_db.iter().map(|&g| db_to_linear(g)).collect(),
                g_th_w: th.clutter_gain_db.iter().map(|&g| db_to_linear(g)).collect(),
                r_th_l: th.rate_bps_hz.clone(),
                gamma_l_d: th.ratio_lower.clone(),
                gamma_u_d: th.ratio_upper.clone(),
            },
            p_max: dbm_to_watts(self.power_dbm),
            noise_var: dbm_to_watts(self.noise_dbm),
            num_waveforms: self.sensing_waveforms,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn surface(&self) -> Result<RhsConfig> {
        Ok(self.surface.build()?)
    }
}

/// Where the coupling matrix comes from, as given on the command line:
/// `synthetic`, `zero`, or a path to a coupling file.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingChoice {
    Synthetic,
    Zero,
    File(PathBuf),
}

impl std::str::FromStr for CouplingChoice {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "synthetic" => CouplingChoice::Synthetic,
            "zero" => CouplingChoice::Zero,
            path => CouplingChoice::File(PathBuf::from(path)),
        })
    }
}

impl CouplingChoice {
    pub fn build(&self, cfg: &RhsConfig, params: &SyntheticCoupling) -> Result<CouplingModel> {
        Ok(match self {
            CouplingChoice::Synthetic => CouplingModel::synthetic(cfg, params)?,
            CouplingChoice::Zero => CouplingModel::zero(cfg.num_elements()),
            CouplingChoice::File(path) => {
                let m = read_coupling(path)?;
                let source = CouplingSource::File {
                    path: path.display().to_string(),
                };
                CouplingModel::from_matrix(cfg, m, source, params.rho_cap)?
            }
        })
    }

    pub fn from_source(source: &CouplingSource) -> (Self, SyntheticCoupling) {
        match source {
            CouplingSource::Synthetic(p) => (CouplingChoice::Synthetic, p.clone()),
            CouplingSource::Zero => (CouplingChoice::Zero, SyntheticCoupling::default()),
            CouplingSource::File { path } => (CouplingChoice::File(path.into()), SyntheticCoupling::default()),
        }
    }
}

/// Reads a coupling file: a `# coupling N=<n>` header, then `n` rows of
/// `2n` comma-separated numbers, `re,im` per entry.
pub fn read_coupling(path: &Path) -> Result<CMat> {
    let text = fs::read_to_string(path).with_context(|| format!("reading coupling file {}", path.display()))?;
    parse_coupling(&text).with_context(|| format!("parsing coupling file {}", path.display()))
}

pub fn parse_coupling(text: &str) -> Result<CMat> {
    let header = text.lines().next().unwrap_or_default().trim();
    let n: usize = header
        .strip_prefix("# coupling N=")
        .and_then(|v| v.trim().parse().ok())
        .with_context(|| format!("expected '# coupling N=<n>' header, found '{header}'"))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut m = CMat::zeros(n, n);
    let mut rows = 0;
    for (i, record) in reader.deserialize::<Vec<f64>>().enumerate() {
        let values = record.with_context(|| format!("row {i}"))?;
        if i >= n {
            bail!("more than {n} rows");
        }
        if values.len() != 2 * n {
            bail!("row {i} has {} numbers, expected {}", values.len(), 2 * n);
        }
        for j in 0..n {
            m[(i, j)] = Complex64::new(values[2 * j], values[2 * j + 1]);
        }
        rows += 1;
    }
    if rows != n {
        bail!("found {rows} rows, expected {n}");
    }
    Ok(m)
}

pub fn format_coupling(m: &CMat) -> String {
    let n = m.nrows();
    let mut out = format!("# coupling N={n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{:e},{:e}", m[(i, j)].re, m[(i, j)].im)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Designed state plus what is needed to rebuild its beamformer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub surface: GridSpec,
    pub coupling: CouplingSource,
    /// Set when the state drives a phased array instead of the surface.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phased_array: Option<PhasedArrayConfig>,
    pub scenario: ScenarioFile,
    pub state: BeamformingState,
}

impl StateFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing state {}", path.display()))
    }
}

/// Sets `key` (dot-separated path) in the JSON form of `file` to `value`,
/// which is parsed as JSON when possible and as a string otherwise.
pub fn apply_override(file: &ScenarioFile, assignment: &str) -> Result<ScenarioFile> {
    let (key, raw) = assignment
        .split_once('=')
        .with_context(|| format!("override '{assignment}' is not of the form key=value"))?;
    let value: serde_json::Value = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut doc = serde_json::to_value(file)?;
    let mut slot = &mut doc;
    for part in key.split('.') {
        slot = match slot {
            serde_json::Value::Object(map) => map.get_mut(part).with_context(|| format!("unknown field '{part}' in '{key}'"))?,
            serde_json::Value::Array(items) => {
                let idx: usize = part.parse().with_context(|| format!("'{part}' is not an index in '{key}'"))?;
                let len = items.len();
                items
                    .get_mut(idx)
                    .with_context(|| format!("index {idx} out of range ({len}) in '{key}'"))?
            }
            _ => bail!("'{key}' descends into a scalar"),
        };
    }
    *slot = value;
    serde_json::from_value(doc).with_context(|| format!("override '{assignment}' produced an invalid scenario"))
}
