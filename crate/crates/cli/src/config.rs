use std::path::{Path, PathBuf};

use bilin_core::geometry::{catalog_parameters, SurfaceDescriptor, CATALOG};
use serde::{Deserialize, Serialize};

/// A complete experiment description. Everything except `seed` and `out`
/// must be given explicitly; those two may come from the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub experiment: Experiment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairName {
    Elliptic,
    Lee,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyName {
    Transversal,
    Control,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Certify {
        surfaces: Vec<SurfaceDescriptor>,
        theta: f64,
        curve_scan: usize,
        h_per_axis: usize,
        lfw_h: Option<Vec<f64>>,
    },
    Scaling {
        pair: PairName,
        r_list: Vec<f64>,
        p_list: Vec<f64>,
    },
    Packets {
        r: f64,
        c: f64,
        decay: u32,
        n_omega: usize,
        period: f64,
        resolution: usize,
        bumps: usize,
    },
    Tables {
        r_list: Vec<f64>,
        c: f64,
        c0: u32,
        m_sub: usize,
    },
    Energy {
        configuration: EnergyName,
        r_list: Vec<f64>,
    },
    Recursion {
        n: usize,
        p_list: Vec<f64>,
        c_exp: f64,
        c_big: f64,
        r0: f64,
        r_max: f64,
        sentinel: f64,
        additive: bool,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Certify { .. } => "certify",
            Experiment::Scaling { .. } => "scaling",
            Experiment::Packets { .. } => "packets",
            Experiment::Tables { .. } => "tables",
            Experiment::Energy { .. } => "energy",
            Experiment::Recursion { .. } => "recursion",
        }
    }
}

/// Every offending field, with the reason.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationError {
    pub fields: Vec<(String, String)>,
    /// True when the config is admissible but too large to run here.
    pub resource: bool,
}

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, (k, v)) in self.fields.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{k}: {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationError {}

fn dyadic(rs: &[f64], min_len: usize) -> Option<String> {
    if rs.len() < min_len {
        return Some(format!("needs at least {min_len} values"));
    }
    if rs.iter().any(|r| !(*r > 0.0)) {
        return Some("values must be positive".into());
    }
    if rs.windows(2).any(|w| ((w[1] / w[0]) - 2.0).abs() > 1e-12) {
        return Some("values must be consecutive dyadic scales".into());
    }
    None
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut bad: Vec<(String, String)> = Vec::new();
        let mut big: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, v: String| bad.push((format!("experiment.{k}"), v));
        match &self.experiment {
            Experiment::Certify { surfaces, theta, curve_scan, h_per_axis, lfw_h } => {
                if surfaces.len() != 2 {
                    push("surfaces", format!("expected 2 surfaces, got {}", surfaces.len()));
                } else {
                    if surfaces[0].dim != surfaces[1].dim {
                        push("surfaces", "dimensions differ".into());
                    }
                    for (i, s) in surfaces.iter().enumerate() {
                        if let Err(e) = bilin_core::geometry::SurfaceSpec::from_descriptor(s) {
                            push(&format!("surfaces[{i}]"), e.to_string());
                        }
                    }
                    if let Some(h) = lfw_h {
                        if h.len() != surfaces[0].dim + 1 {
                            push("lfw_h", format!("expected {} coordinates", surfaces[0].dim + 1));
                        }
                    }
                }
                if !(*theta > 0.0) {
                    push("theta", "must be positive".into());
                }
                if *curve_scan < 8 {
                    push("curve_scan", "must be at least 8".into());
                } else if *curve_scan > 1024 {
                    big.push(("experiment.curve_scan".into(), "scan grid above 1024 per axis".into()));
                }
                if *h_per_axis == 0 {
                    push("h_per_axis", "must be at least 1".into());
                }
            }
            Experiment::Scaling { r_list, p_list, .. } => {
                if let Some(e) = dyadic(r_list, 3) {
                    push("r_list", e);
                } else if r_list[0] < 4.0 {
                    push("r_list", "scales below 4 are not admissible".into());
                } else if r_list.iter().any(|r| *r > 4096.0) {
                    big.push(("experiment.r_list".into(), "scales above 4096 exceed the grid limit".into()));
                }
                if p_list.is_empty() || p_list.iter().any(|p| !(*p >= 1.0)) {
                    push("p_list", "needs at least one exponent p ≥ 1".into());
                }
            }
            Experiment::Packets { r, c, decay, n_omega, period, resolution, bumps } => {
                if !(*r >= 4.0) {
                    push("r", "must be at least 4".into());
                } else if !(*c >= 0.5 * r.powf(-0.25) && *c <= 0.25) {
                    push("c", format!("must lie in [{:.4}, 0.25]", 0.5 * r.powf(-0.25)));
                }
                if *decay == 0 {
                    push("decay", "must be at least 1".into());
                }
                if *n_omega == 0 {
                    push("n_omega", "must be at least 1".into());
                }
                if !(*period > 0.0) {
                    push("period", "must be positive".into());
                }
                if !resolution.is_power_of_two() || *resolution < 8 {
                    push("resolution", "must be a power of two ≥ 8".into());
                } else if *resolution > 1024 {
                    big.push(("experiment.resolution".into(), "grids above 1024² are not run".into()));
                }
                if *bumps == 0 {
                    push("bumps", "must be at least 1".into());
                }
            }
            Experiment::Tables { r_list, c, c0, m_sub } => {
                if let Some(e) = dyadic(r_list, 3) {
                    push("r_list", e);
                } else if r_list[0] < 16.0 {
                    push("r_list", "scales below 16 are not admissible".into());
                } else if r_list.iter().any(|r| *r > 1024.0) {
                    big.push(("experiment.r_list".into(), "scales above 1024 exceed the dense Gram limit".into()));
                }
                if let Some(r) = r_list.first() {
                    if *r > 0.0 && !(*c >= 0.5 * r.powf(-0.25) && *c <= 0.25) {
                        push("c", "outside the packet admissibility window".into());
                    }
                }
                if *c0 == 0 {
                    push("c0", "must be at least 1".into());
                } else if *c0 > 5 {
                    big.push(("experiment.c0".into(), "depth above 5 is too large".into()));
                }
                if *m_sub == 0 {
                    push("m_sub", "must be at least 1".into());
                }
            }
            Experiment::Energy { r_list, .. } => {
                if r_list.len() < 2 || r_list.iter().any(|r| !(*r > 0.0)) {
                    push("r_list", "needs at least two positive thicknesses".into());
                } else if r_list.iter().any(|r| *r > 64.0) {
                    big.push(("experiment.r_list".into(), "thickness above 64 grid units".into()));
                }
            }
            Experiment::Recursion { n, p_list, c_exp, c_big, r0, r_max, sentinel, .. } => {
                if *n == 0 {
                    push("n", "must be at least 1".into());
                }
                if p_list.is_empty() || p_list.iter().any(|p| !(*p > 1.0)) {
                    push("p_list", "needs exponents p > 1".into());
                }
                if !(*c_exp > 0.0) {
                    push("c_exp", "must be positive".into());
                }
                if !(*c_big > 0.0) {
                    push("c_big", "must be positive".into());
                }
                if !(*r0 > 0.0) {
                    push("r0", "must be positive".into());
                }
                if !(*r_max >= *r0) {
                    push("r_max", "must be at least r0".into());
                }
                if !(*sentinel > 0.0) {
                    push("sentinel", "must be positive".into());
                }
            }
        }
        if self.out.is_none() {
            bad.push(("out".into(), "no output directory (config or --out)".into()));
        }
        if !bad.is_empty() {
            return Err(ValidationError { fields: bad, resource: false });
        }
        if !big.is_empty() {
            return Err(ValidationError { fields: big, resource: true });
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct Sidecar {
    config: ExperimentConfig,
}

/// Reads a config, or the config echoed inside a sidecar.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ValidationError> {
    let fail = |detail: String| ValidationError { fields: vec![("config".into(), detail)], resource: false };
    let text = std::fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| fail(e.to_string()))?;
    if value.get("config").is_some() && value.get("file").is_some() {
        return serde_json::from_value::<Sidecar>(value).map(|s| s.config).map_err(|e| fail(e.to_string()));
    }
    serde_json::from_value(value).map_err(|e| fail(e.to_string()))
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogParameter {
    pub name: &'static str,
    pub description: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub parameters: Vec<CatalogParameter>,
}

pub fn catalog_list() -> Vec<CatalogEntry> {
    CATALOG
        .iter()
        .map(|&name| CatalogEntry {
            name,
            parameters: catalog_parameters(name)
                .unwrap_or_default()
                .into_iter()
                .map(|(name, description)| CatalogParameter { name, description })
                .collect(),
        })
        .collect()
}
