//! Run files: TOML key-value text with one table per concern.
//!
//! ```toml
//! command = "solve"
//! [mesh]
//! path = "sphere_642.obj"
//! [wave]
//! frequency = 299792458.0
//! [reference]
//! mie_radius = 1.0
//! ```

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use loopbie::bie::QuadConfig;
use loopbie::fmm::FmmConfig;
use loopbie::solver::{Formulation, SystemConfig};
use loopbie::surface::BaseRule;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Validate,
    Subdivide,
    Eigs,
    MhtStudy,
    Solve,
    Rcs,
    FmmStudy,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Subdivide => "subdivide",
            Command::Eigs => "eigs",
            Command::MhtStudy => "mht-study",
            Command::Solve => "solve",
            Command::Rcs => "rcs",
            Command::FmmStudy => "fmm-study",
        }
    }

    fn needs_frequency(self) -> bool {
        matches!(self, Command::MhtStudy | Command::Solve | Command::Rcs | Command::FmmStudy)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub threads: Option<usize>,
    pub mesh: MeshSection,
    pub wave: WaveSection,
    pub solver: SolverSection,
    pub quadrature: QuadSection,
    pub fmm: FmmSection,
    pub output: OutputSection,
    pub reference: ReferenceSection,
    pub eigs: EigsSection,
    pub mht: MhtSection,
    pub subdivide: SubdivideSection,
    pub fmm_study: FmmStudySection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSection {
    /// OBJ or OFF control mesh, relative to the run file.
    pub path: PathBuf,
    pub scale: f64,
}

impl Default for MeshSection {
    fn default() -> Self {
        MeshSection { path: PathBuf::new(), scale: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveSection {
    /// Frequencies in Hz; one summary row each.
    #[serde(deserialize_with = "one_or_many")]
    pub frequency: Vec<f64>,
    pub direction: [f64; 3],
    pub polarization: [f64; 3],
    pub amplitude: f64,
}

impl Default for WaveSection {
    fn default() -> Self {
        WaveSection { frequency: Vec::new(), direction: [0.0, 0.0, -1.0], polarization: [1.0, 0.0, 0.0], amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulationName {
    CcCfier,
    Cfie,
    Efie,
    Mfie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    Loop,
    Mh,
    /// Loop and manifold harmonic solves side by side.
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub formulation: FormulationName,
    pub cfie_alpha: f64,
    pub gmres_tol_outer: f64,
    pub gmres_tol_gram: f64,
    pub restart: usize,
    pub max_iter: usize,
    /// Support radius of the regularizer in wavelengths.
    pub localization: f64,
    pub localize: bool,
    pub basis: Basis,
    /// Manifold harmonics per current family.
    pub modes: usize,
    /// Scale the harmonics to unit reduced Gram matrix.
    pub scaled: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SystemConfig::default();
        SolverSection {
            formulation: FormulationName::CcCfier,
            cfie_alpha: 0.5,
            gmres_tol_outer: d.gmres_tol_outer,
            gmres_tol_gram: d.gmres_tol_gram,
            restart: d.restart,
            max_iter: d.max_iter,
            localization: d.localization_wavelengths.unwrap_or(1.25),
            localize: d.localization_wavelengths.is_some(),
            basis: Basis::Loop,
            modes: 0,
            scaled: true,
        }
    }
}

impl SolverSection {
    pub fn formulation(&self) -> Formulation {
        match self.formulation {
            FormulationName::CcCfier => Formulation::CcCfier,
            FormulationName::Cfie => Formulation::Cfie(self.cfie_alpha),
            FormulationName::Efie => Formulation::Efie,
            FormulationName::Mfie => Formulation::Mfie,
        }
    }

    pub fn system(&self) -> SystemConfig {
        SystemConfig {
            gmres_tol_outer: self.gmres_tol_outer,
            gmres_tol_gram: self.gmres_tol_gram,
            restart: self.restart,
            max_iter: self.max_iter,
            localization_wavelengths: self.localize.then_some(self.localization),
            formulation: self.formulation(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    One,
    Three,
    Six,
    Seven,
}

impl From<RuleName> for BaseRule {
    fn from(r: RuleName) -> Self {
        match r {
            RuleName::One => BaseRule::One,
            RuleName::Three => BaseRule::Three,
            RuleName::Six => BaseRule::Six,
            RuleName::Seven => BaseRule::Seven,
        }
    }
}

fn rule_name(r: BaseRule) -> RuleName {
    match r {
        BaseRule::One => RuleName::One,
        BaseRule::Three => RuleName::Three,
        BaseRule::Six => RuleName::Six,
        BaseRule::Seven => RuleName::Seven,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadSection {
    pub far_depth: u32,
    pub far_base: RuleName,
    pub near_depth: u32,
    pub near_base: RuleName,
    pub cell_depth: u32,
    pub cell_base: RuleName,
    pub eta: f64,
    pub max_depth: u32,
    pub duffy_order: usize,
    pub self_margin: f64,
    pub near_wavelengths: f64,
    pub near_diameters: f64,
}

impl Default for QuadSection {
    fn default() -> Self {
        let q = QuadConfig::default();
        QuadSection {
            far_depth: q.far_depth,
            far_base: rule_name(q.far_base),
            near_depth: q.near_depth,
            near_base: rule_name(q.near_base),
            cell_depth: q.cell_depth,
            cell_base: rule_name(q.cell_base),
            eta: q.eta,
            max_depth: q.max_depth,
            duffy_order: q.duffy_order,
            self_margin: q.self_margin,
            near_wavelengths: q.near_wavelengths,
            near_diameters: q.near_diameters,
        }
    }
}

impl QuadSection {
    pub fn to_config(&self) -> QuadConfig {
        QuadConfig {
            far_depth: self.far_depth,
            far_base: self.far_base.into(),
            near_depth: self.near_depth,
            near_base: self.near_base.into(),
            cell_depth: self.cell_depth,
            cell_base: self.cell_base.into(),
            eta: self.eta,
            max_depth: self.max_depth,
            duffy_order: self.duffy_order,
            self_margin: self.self_margin,
            near_wavelengths: self.near_wavelengths,
            near_diameters: self.near_diameters,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FmmSection {
    pub enabled: bool,
    /// Leaf box size in wavelengths.
    pub leaf_size: f64,
    pub order: usize,
}

impl Default for FmmSection {
    fn default() -> Self {
        FmmSection { enabled: false, leaf_size: 0.5, order: 10 }
    }
}

impl FmmSection {
    pub fn to_config(&self, wavelength: f64) -> FmmConfig {
        FmmConfig { leaf_size: self.leaf_size * wavelength, order: self.order }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Output directory, relative to the run file.
    pub dir: PathBuf,
    /// Constant-phi cuts of the far field, in degrees.
    pub phi_cuts: Vec<f64>,
    pub theta_step: f64,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out"), phi_cuts: vec![0.0, 90.0], theta_step: 1.0 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceSection {
    /// Radius of a sphere centred at the origin; enables the Mie error.
    pub mie_radius: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigsSection {
    pub count: usize,
}

impl Default for EigsSection {
    fn default() -> Self {
        EigsSection { count: 20 }
    }
}

/// A number of harmonics or `"full"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModeCount {
    Count(usize),
    Name(String),
}

impl ModeCount {
    /// Resolves against the number of nonconstant harmonics.
    pub fn resolve(&self, full: usize) -> usize {
        match self {
            ModeCount::Count(m) => *m,
            ModeCount::Name(_) => full,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MhtSection {
    pub modes: Vec<ModeCount>,
}

impl Default for MhtSection {
    fn default() -> Self {
        MhtSection { modes: vec![ModeCount::Count(20), ModeCount::Count(50), ModeCount::Count(100), ModeCount::Name("full".into())] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubdivideSection {
    pub levels: usize,
}

impl Default for SubdivideSection {
    fn default() -> Self {
        SubdivideSection { levels: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FmmStudySection {
    /// Leaf sizes in wavelengths.
    pub leaf_sizes: Vec<f64>,
    pub orders: Vec<usize>,
}

impl Default for FmmStudySection {
    fn default() -> Self {
        FmmStudySection { leaf_sizes: vec![0.125, 0.0625], orders: (1..=10).collect() }
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

/// 1-based line of byte `offset` in `text`.
pub fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]` (or at top level for an empty section),
/// falling back to the section header.
pub fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

/// A run file with its source text and location.
#[derive(Debug, Clone)]
pub struct RunFile {
    pub config: RunConfig,
    pub text: String,
    pub base_dir: PathBuf,
}

impl RunFile {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| match e.span() {
            Some(span) => CliError::ConfigAt { line: line_of_offset(text, span.start), msg: e.message().to_string() },
            None => CliError::Config(e.message().to_string()),
        })?;
        Ok(RunFile { config, text: text.to_string(), base_dir: base_dir.to_path_buf() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn error(&self, section: &str, key: &str, msg: impl Into<String>) -> CliError {
        let msg = msg.into();
        let full = match (section.is_empty(), key.is_empty()) {
            (true, _) => key.to_string(),
            (false, true) => section.to_string(),
            (false, false) => format!("{section}.{key}"),
        };
        match locate(&self.text, section, key) {
            Some(line) => CliError::ConfigAt { line, msg: format!("{full}: {msg}") },
            None => CliError::Config(format!("{full}: {msg}")),
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn mesh_path(&self) -> PathBuf {
        self.resolve(&self.config.mesh.path)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.config.output.dir)
    }

    /// Fixes the command from the command line and checks every field it uses.
    pub fn validate(&mut self, command: Command) -> Result<()> {
        if let Some(c) = self.config.command {
            if c != command {
                return Err(self.error("", "command", format!("run file is for `{}`, invoked as `{}`", c.name(), command.name())));
            }
        }
        self.config.command = Some(command);
        let c = &self.config;
        if c.threads == Some(0) {
            return Err(self.error("", "threads", "must be at least 1"));
        }
        if c.mesh.path.as_os_str().is_empty() {
            return Err(self.error("mesh", "path", "missing"));
        }
        if !self.mesh_path().is_file() {
            return Err(self.error("mesh", "path", format!("{} does not exist", self.mesh_path().display())));
        }
        if !(c.mesh.scale > 0.0 && c.mesh.scale.is_finite()) {
            return Err(self.error("mesh", "scale", "must be positive"));
        }
        if command.needs_frequency() && c.wave.frequency.is_empty() {
            return Err(self.error("wave", "frequency", "missing"));
        }
        if c.wave.frequency.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
            return Err(self.error("wave", "frequency", "must be positive"));
        }
        let d = c.wave.direction;
        if d.iter().map(|x| x * x).sum::<f64>() == 0.0 {
            return Err(self.error("wave", "direction", "must be nonzero"));
        }
        let p = c.wave.polarization;
        let (dn, pn) = (d.iter().map(|x| x * x).sum::<f64>().sqrt(), p.iter().map(|x| x * x).sum::<f64>().sqrt());
        let dot: f64 = d.iter().zip(&p).map(|(a, b)| a * b).sum();
        if pn == 0.0 || dot.abs() > 1e-9 * dn * pn {
            return Err(self.error("wave", "polarization", "must be nonzero and orthogonal to the direction"));
        }
        if !(c.wave.amplitude > 0.0) {
            return Err(self.error("wave", "amplitude", "must be positive"));
        }
        let s = &c.solver;
        if s.formulation == FormulationName::Cfie && !(s.cfie_alpha > 0.0 && s.cfie_alpha < 1.0) {
            return Err(self.error("solver", "cfie_alpha", "must lie in (0, 1)"));
        }
        if !(s.gmres_tol_outer > 0.0) {
            return Err(self.error("solver", "gmres_tol_outer", "must be positive"));
        }
        if !(s.gmres_tol_gram > 0.0) {
            return Err(self.error("solver", "gmres_tol_gram", "must be positive"));
        }
        if s.restart == 0 {
            return Err(self.error("solver", "restart", "must be positive"));
        }
        if s.max_iter == 0 {
            return Err(self.error("solver", "max_iter", "must be positive"));
        }
        if s.localize && !(s.localization > 0.0) {
            return Err(self.error("solver", "localization", "must be positive"));
        }
        if s.basis != Basis::Loop {
            if s.modes == 0 {
                return Err(self.error("solver", "modes", "required for the manifold harmonic basis"));
            }
            if s.formulation != FormulationName::CcCfier {
                return Err(self.error("solver", "basis", "the manifold harmonic basis supports cc-cfier only"));
            }
            if c.fmm.enabled {
                return Err(self.error("solver", "basis", "the manifold harmonic basis needs dense operators"));
            }
        }
        if let Err(e) = c.quadrature.to_config().validate() {
            return Err(self.error("quadrature", "", e.to_string()));
        }
        if !(c.fmm.leaf_size > 0.0) {
            return Err(self.error("fmm", "leaf_size", "must be positive"));
        }
        if !(1..=60).contains(&c.fmm.order) {
            return Err(self.error("fmm", "order", "must lie in 1..=60"));
        }
        if c.output.phi_cuts.is_empty() {
            return Err(self.error("output", "phi_cuts", "at least one cut is required"));
        }
        if !(c.output.theta_step > 0.0 && c.output.theta_step <= 180.0) {
            return Err(self.error("output", "theta_step", "must lie in (0, 180]"));
        }
        if c.reference.mie_radius.is_some_and(|r| !(r > 0.0)) {
            return Err(self.error("reference", "mie_radius", "must be positive"));
        }
        if c.eigs.count == 0 {
            return Err(self.error("eigs", "count", "must be positive"));
        }
        if c.mht.modes.is_empty() {
            return Err(self.error("mht", "modes", "at least one entry is required"));
        }
        for m in &c.mht.modes {
            match m {
                ModeCount::Count(0) => return Err(self.error("mht", "modes", "counts must be positive")),
                ModeCount::Name(n) if n != "full" => return Err(self.error("mht", "modes", format!("unknown entry `{n}`"))),
                _ => {}
            }
        }
        if c.fmm_study.leaf_sizes.is_empty() || c.fmm_study.leaf_sizes.iter().any(|l| !(*l > 0.0)) {
            return Err(self.error("fmm_study", "leaf_sizes", "must be a nonempty list of positive sizes"));
        }
        if c.fmm_study.orders.is_empty() || c.fmm_study.orders.iter().any(|p| !(1..=60).contains(p)) {
            return Err(self.error("fmm_study", "orders", "must be a nonempty list in 1..=60"));
        }
        Ok(())
    }

    /// Every setting including defaults, as TOML.
    pub fn resolved(&self) -> String {
        toml::to_string(&self.config).expect("run configuration serializes")
    }
}
