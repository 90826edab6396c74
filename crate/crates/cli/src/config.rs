//! Run configuration: a versioned TOML document with defaults for every field.

use crate::error::CliError;
use infmass::galerkin::{PreconditionerKind, SolverOptions};
use infmass::geometry::{BoundaryCurve, CurveShape, RadialFourier};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use std::sync::Arc;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub forms: FormsConfig,
    #[serde(default)]
    pub lemma: LemmaConfig,
}

/// The domain boundary. `tube_half_width` optionally narrows the tubular
/// neighbourhood used by trial fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Disk {
        radius: f64,
        #[serde(default)]
        tube_half_width: Option<f64>,
    },
    Fourier {
        mean_radius: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
        #[serde(default)]
        tube_half_width: Option<f64>,
    },
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig::Disk { radius: 1.0, tube_half_width: None }
    }
}

impl DomainConfig {
    pub fn shape(&self) -> CurveShape {
        match self {
            DomainConfig::Disk { radius, .. } => CurveShape::Disk { radius: *radius },
            DomainConfig::Fourier { mean_radius, cos, sin, .. } => {
                CurveShape::Fourier(RadialFourier { mean_radius: *mean_radius, cos: cos.clone(), sin: sin.clone() })
            }
        }
    }

    fn tube_half_width(&self) -> Option<f64> {
        match self {
            DomainConfig::Disk { tube_half_width, .. } | DomainConfig::Fourier { tube_half_width, .. } => *tube_half_width,
        }
    }
}

/// Resolutions are `base · 2^level`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshConfig {
    pub angular_base: usize,
    pub interior_base: usize,
    pub exterior_base: usize,
    pub level: u32,
    /// Exterior layer depth in decay lengths.
    pub padding: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { angular_base: 32, interior_base: 8, exterior_base: 8, level: 2, padding: 20.0 }
    }
}

impl MeshConfig {
    pub fn angular(&self) -> usize {
        self.angular_base << self.level
    }

    pub fn interior_rings(&self) -> usize {
        self.interior_base << self.level
    }

    pub fn exterior_rings(&self) -> usize {
        self.exterior_base << self.level
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub guard_vectors: usize,
    pub seed: u64,
    pub preconditioner: PreconditionerKind,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            tolerance: d.tolerance,
            max_iterations: d.max_iterations,
            guard_vectors: d.guard_vectors,
            seed: d.seed,
            preconditioner: d.preconditioner,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            guard_vectors: self.guard_vectors,
            seed: self.seed,
            preconditioner: self.preconditioner,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceChoice {
    DiskOracle,
    Galerkin,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    /// Number of `|E|` values requested from the Galerkin solver.
    pub count: usize,
    /// Half-width of the oracle window `(-Λ, Λ)`.
    pub window: f64,
    pub source: SourceChoice,
    /// Optional finite mass; the infinite-mass problem is always solved.
    pub mass: Option<f64>,
    /// Angular sectors listed by the oracle; all sectors when empty.
    pub sectors: Vec<i32>,
    /// Number of eigenvectors written as CSV grids.
    pub eigenvectors: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { count: 6, window: 3.0, source: SourceChoice::Both, mass: None, sectors: Vec::new(), eigenvectors: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub masses: Vec<f64>,
    pub window: f64,
    pub edge_margin: f64,
    pub source: infmass::convergence::SpectrumSource,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            masses: vec![20.0, 40.0, 80.0, 160.0, 320.0, 640.0],
            window: 3.0,
            edge_margin: 0.05,
            source: infmass::convergence::SpectrumSource::DiskOracle,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FormsConfig {
    /// Number of random smooth fields per identity check.
    pub fields: usize,
    pub mass: f64,
    /// Exterior layer depth in decay lengths `1/mass`.
    pub padding: f64,
    /// Relative tolerance on the identities.
    pub tolerance: f64,
    /// Seed of the random field coefficients.
    pub seed: u64,
    /// Added to the turning angle in the boundary phase used by the current check.
    pub phase_offset: f64,
}

impl Default for FormsConfig {
    fn default() -> Self {
        Self { fields: 20, mass: 10.0, padding: 25.0, tolerance: 1e-4, seed: 2, phase_offset: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmaConfig {
    pub k: f64,
    pub betas: Vec<f64>,
    pub delta: f64,
    pub intervals: usize,
    /// Allowed shortfall of the discrete minimum below `k + β/2`.
    pub slack: f64,
    /// Relative tolerance against the closed-form minimum at `β = 0`.
    pub tolerance: f64,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        Self { k: 50.0, betas: vec![0.0, 0.4], delta: 0.5, intervals: 4000, slack: 0.05, tolerance: 1e-4 }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            domain: DomainConfig::default(),
            mesh: MeshConfig::default(),
            solver: SolverConfig::default(),
            spectrum: SpectrumConfig::default(),
            sweep: SweepConfig::default(),
            forms: FormsConfig::default(),
            lemma: LemmaConfig::default(),
        }
    }
}

/// A semantic validation failure, located by table and key.
#[derive(Debug, PartialEq)]
pub struct Invalid {
    /// Table name, empty for top-level keys.
    pub section: &'static str,
    pub key: &'static str,
    pub message: String,
}

fn invalid(section: &'static str, key: &'static str, message: impl Into<String>) -> Invalid {
    Invalid { section, key, message: message.into() }
}

/// 1-based line of the `key = ...` assignment inside `[section]`, falling back
/// to the table header when the key is absent (it took its default).
fn line_of(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = "";
    let mut header = None;
    for (i, line) in source.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.split(']').next()) {
            current = name.trim();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section && t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('=')) {
            return Some(i + 1);
        }
    }
    header
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let source = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Self::parse(&source, &path.display().to_string())
    }

    pub fn parse(source: &str, origin: &str) -> Result<Self, CliError> {
        let config: RunConfig =
            toml::from_str(source).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        config.validate().map_err(|e| {
            let location = line_of(source, e.section, e.key).map(|l| format!(":{l}")).unwrap_or_default();
            let name = if e.section.is_empty() { e.key.to_string() } else { format!("{}.{}", e.section, e.key) };
            CliError::Config(format!("{origin}{location}: `{name}` {}", e.message))
        })?;
        Ok(config)
    }

    /// Checks invariants serde cannot express; errors name the offending key.
    pub fn validate(&self) -> Result<(), Invalid> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "",
                "schema_version",
                format!("is {}, this build reads {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        let mesh = &self.mesh;
        for (key, base) in [
            ("angular_base", mesh.angular_base),
            ("interior_base", mesh.interior_base),
            ("exterior_base", mesh.exterior_base),
        ] {
            if base < 2 || base % 2 != 0 {
                return Err(invalid("mesh", key, "must be an even number of at least 2"));
            }
        }
        if mesh.level > 8 {
            return Err(invalid("mesh", "level", "must be at most 8"));
        }
        if mesh.interior_rings() < 4 || mesh.exterior_rings() < 4 || mesh.angular() < 8 {
            return Err(invalid("mesh", "level", "yields fewer than 4 rings or 8 angular samples"));
        }
        if !(mesh.padding >= 12.0) {
            return Err(invalid("mesh", "padding", "must be at least 12 decay lengths"));
        }
        if !(self.solver.tolerance > 0.0) {
            return Err(invalid("solver", "tolerance", "must be positive"));
        }
        if self.solver.max_iterations == 0 {
            return Err(invalid("solver", "max_iterations", "must be positive"));
        }
        let spectrum = &self.spectrum;
        if spectrum.count == 0 {
            return Err(invalid("spectrum", "count", "must be positive"));
        }
        if !(spectrum.window > 0.0) {
            return Err(invalid("spectrum", "window", "must be positive"));
        }
        if spectrum.mass.is_some_and(|m| !(m > 0.0)) {
            return Err(invalid("spectrum", "mass", "must be positive"));
        }
        let sweep = &self.sweep;
        if sweep.masses.is_empty() {
            return Err(invalid("sweep", "masses", "must list at least one mass"));
        }
        if sweep.masses.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("sweep", "masses", "must be strictly increasing"));
        }
        if !(sweep.window > 0.0) {
            return Err(invalid("sweep", "window", "must be positive"));
        }
        if !(sweep.edge_margin > 0.0) {
            return Err(invalid("sweep", "edge_margin", "must be positive"));
        }
        let forms = &self.forms;
        if forms.fields == 0 {
            return Err(invalid("forms", "fields", "must be positive"));
        }
        if !(forms.mass > 0.0) {
            return Err(invalid("forms", "mass", "must be positive"));
        }
        if !(forms.padding >= 12.0) {
            return Err(invalid("forms", "padding", "must be at least 12 decay lengths"));
        }
        if !(forms.tolerance > 0.0) {
            return Err(invalid("forms", "tolerance", "must be positive"));
        }
        let lemma = &self.lemma;
        if lemma.betas.is_empty() {
            return Err(invalid("lemma", "betas", "must list at least one value"));
        }
        if !(lemma.slack >= 0.0) {
            return Err(invalid("lemma", "slack", "must be non-negative"));
        }
        if !(lemma.tolerance > 0.0) {
            return Err(invalid("lemma", "tolerance", "must be positive"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the resolved configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("configuration serialises");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn curve(&self) -> Result<Arc<BoundaryCurve>, CliError> {
        let curve = BoundaryCurve::new(self.domain.shape(), self.mesh.angular())?;
        let curve = match self.domain.tube_half_width() {
            Some(w) => curve.with_tube_half_width(w)?,
            None => curve,
        };
        Ok(Arc::new(curve))
    }

    pub fn disk_radius(&self) -> Option<f64> {
        match self.domain {
            DomainConfig::Disk { radius, .. } => Some(radius),
            DomainConfig::Fourier { .. } => None,
        }
    }
}
