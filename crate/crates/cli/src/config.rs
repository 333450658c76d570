//! Campaign configuration: a JSON file with every field optional, overridden by
//! command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyTheorems,
    Counterexamples,
    Bergman,
    NormEstimate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyTheorems => "verify-theorems",
            Command::Counterexamples => "counterexamples",
            Command::Bergman => "bergman",
            Command::NormEstimate => "norm-estimate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Frame-sum inequalities and equality witnesses.
    pub equality: f64,
    /// Exact identities (Hilbert-Schmidt trace identity, Parseval equality).
    pub identity: f64,
    /// `<T^p e, e> <= <T e, e>^p`.
    pub jensen: f64,
    /// Synthesis-operator certificates.
    pub certificate: f64,
    /// Scaled-copies normalization and dual evaluation.
    pub construction: f64,
    /// Quadrature against the per-mode closed form, relative.
    pub quadrature: f64,
    /// Pointwise agreement of the two Hilbert-Schmidt integrands.
    pub pointwise: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            equality: 1e-9,
            identity: 1e-10,
            jensen: 1e-10,
            certificate: 1e-9,
            construction: 1e-12,
            quadrature: 1e-3,
            pointwise: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthConfig {
    /// Truncations at which partial sums are recorded.
    pub grid: Vec<usize>,
    /// Exponents of the rank-one divergence series, all in `(0, 2)`.
    pub p: Vec<f64>,
    /// Number of distinct singular values in the scaled-copies frame.
    pub copies_terms: usize,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            grid: vec![100, 1_000, 10_000, 100_000],
            p: vec![0.5, 1.0, 1.5, 1.9],
            copies_terms: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JensenConfig {
    pub p: Vec<f64>,
    pub trials: usize,
}

impl Default for JensenConfig {
    fn default() -> Self {
        JensenConfig {
            p: vec![0.25, 0.5, 0.75, 1.0],
            trials: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BergmanConfig {
    pub n_radial: usize,
    pub n_angular: usize,
    /// Radial node counts of the refinement table.
    pub refinement: Vec<usize>,
    /// Number of seeded operators for the random checks.
    pub trials: usize,
    /// Largest truncation degree of the seeded operators.
    pub max_degree: usize,
    pub subharmonic_p: Vec<f64>,
    pub grid_step: f64,
    pub subharmonic_rmax: f64,
    pub separations: Vec<f64>,
    pub lattice_degree: usize,
}

impl Default for BergmanConfig {
    fn default() -> Self {
        BergmanConfig {
            n_radial: 64,
            n_angular: 64,
            refinement: vec![2, 4, 8, 16, 32, 64],
            trials: 20,
            max_degree: 8,
            subharmonic_p: vec![0.5, 1.0, 2.0, 3.0],
            grid_step: 0.01,
            subharmonic_rmax: 0.9,
            separations: vec![0.3, 0.5, 0.8, 1.2],
            lattice_degree: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub command: Command,
    pub seed: u64,
    pub dim: usize,
    pub trials: usize,
    pub p_grid: Vec<f64>,
    pub rmax: f64,
    pub output_dir: PathBuf,
    pub tolerances: Tolerances,
    pub growth: GrowthConfig,
    pub jensen: JensenConfig,
    pub bergman: BergmanConfig,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            command: Command::VerifyTheorems,
            seed: 1,
            dim: 8,
            trials: 200,
            p_grid: vec![0.5, 1.0, 1.5, 2.0, 3.0, 4.0],
            rmax: 0.995,
            output_dir: PathBuf::from("schatten-out"),
            tolerances: Tolerances::default(),
            growth: GrowthConfig::default(),
            jensen: JensenConfig::default(),
            bergman: BergmanConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub dim: Option<usize>,
    pub trials: Option<usize>,
    pub p_grid: Option<Vec<f64>>,
    pub rmax: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

fn positive_list(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(LabError::Config(format!("{name} must not be empty")));
    }
    if let Some(p) = values.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
        return Err(LabError::Config(format!("{name} entries must be positive, got {p}")));
    }
    Ok(())
}

fn at_least_one(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(LabError::Config(format!("{name} must be at least 1")));
    }
    Ok(())
}

fn unit_interval(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value < 1.0) {
        return Err(LabError::Config(format!("{name} must lie in (0, 1), got {value}")));
    }
    Ok(())
}

impl CampaignConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| LabError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// File (or defaults), then flags, then validation.
    pub fn resolve(command: Command, file: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut config = match file {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        config.command = command;
        config.apply(overrides);
        config.validate()?;
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.dim {
            self.dim = v;
        }
        if let Some(v) = o.trials {
            self.trials = v;
        }
        if let Some(v) = &o.p_grid {
            self.p_grid = v.clone();
        }
        if let Some(v) = o.rmax {
            self.rmax = v;
        }
        if let Some(v) = &o.output_dir {
            self.output_dir = v.clone();
        }
    }

    pub fn validate(&self) -> Result<()> {
        at_least_one("dim", self.dim)?;
        at_least_one("trials", self.trials)?;
        positive_list("p_grid", &self.p_grid)?;
        unit_interval("rmax", self.rmax)?;
        let t = &self.tolerances;
        positive_list(
            "tolerances",
            &[
                t.equality,
                t.identity,
                t.jensen,
                t.certificate,
                t.construction,
                t.quadrature,
                t.pointwise,
            ],
        )?;

        let g = &self.growth;
        if g.grid.len() < 2 || g.grid[0] == 0 || g.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LabError::Config(
                "growth.grid needs at least two increasing positive truncations".into(),
            ));
        }
        positive_list("growth.p", &g.p)?;
        if let Some(p) = g.p.iter().find(|p| **p >= 2.0) {
            return Err(LabError::Config(format!("growth.p entries must be below 2, got {p}")));
        }
        at_least_one("growth.copies_terms", g.copies_terms)?;

        positive_list("jensen.p", &self.jensen.p)?;
        if let Some(p) = self.jensen.p.iter().find(|p| **p > 1.0) {
            return Err(LabError::Config(format!("jensen.p entries must be at most 1, got {p}")));
        }
        at_least_one("jensen.trials", self.jensen.trials)?;

        let b = &self.bergman;
        at_least_one("bergman.n_radial", b.n_radial)?;
        at_least_one("bergman.n_angular", b.n_angular)?;
        at_least_one("bergman.trials", b.trials)?;
        at_least_one("bergman.max_degree", b.max_degree)?;
        at_least_one("bergman.lattice_degree", b.lattice_degree)?;
        if b.refinement.contains(&0) {
            return Err(LabError::Config("bergman.refinement entries must be at least 1".into()));
        }
        positive_list("bergman.subharmonic_p", &b.subharmonic_p)?;
        positive_list("bergman.separations", &b.separations)?;
        unit_interval("bergman.subharmonic_rmax", b.subharmonic_rmax)?;
        if !(b.grid_step > 0.0 && b.grid_step <= b.subharmonic_rmax) {
            return Err(LabError::Config(format!(
                "bergman.grid_step must lie in (0, subharmonic_rmax], got {}",
                b.grid_step
            )));
        }
        Ok(())
    }
}

/// Parses `0.5,1,2` into a list of reals.
pub fn parse_p_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| format!("'{}' is not a number: {e}", x.trim()))
        })
        .collect()
}
