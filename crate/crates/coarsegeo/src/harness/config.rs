//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Element, GroupModel, ModelKind, PeripheralCoset, SubgroupSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Contract,
    Quasiconvex,
    Constants,
    AdmissibleMc,
    Amalgam,
    Hnn,
    Transition,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Contract => "contract",
            ExperimentKind::Quasiconvex => "quasiconvex",
            ExperimentKind::Constants => "constants",
            ExperimentKind::AdmissibleMc => "admissible-mc",
            ExperimentKind::Amalgam => "amalgam",
            ExperimentKind::Hnn => "hnn",
            ExperimentKind::Transition => "transition",
        }
    }
}

/// A group model as written in configuration files, e.g.
/// `kind = "free_product"`, `ranks = [2, 2]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peripheral: Option<Vec<bool>>,
}

impl ModelSpec {
    pub fn build(&self) -> Result<GroupModel> {
        let need_rank = || {
            self.rank.ok_or_else(|| Error::Config { path: "model.rank".into(), message: "required for this kind".into() })
        };
        let kind = match self.kind.as_str() {
            "free" => ModelKind::Free { rank: need_rank()? },
            "free_abelian" => ModelKind::FreeAbelian { rank: need_rank()? },
            "free_product" => ModelKind::FreeProduct {
                ranks: self.ranks.clone().ok_or_else(|| Error::Config {
                    path: "model.ranks".into(),
                    message: "required for free products".into(),
                })?,
            },
            other => {
                return Err(Error::Config {
                    path: "model.kind".into(),
                    message: format!("unknown model kind `{other}` (expected free, free_abelian or free_product)"),
                })
            }
        };
        GroupModel::from_kind(&kind, self.peripheral.as_deref())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubgroupConfig {
    pub generators: Vec<String>,
    #[serde(default = "default_depth")]
    pub depth: usize,
}

fn default_depth() -> usize {
    6
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosetConfig {
    pub rep: String,
    pub factor: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default = "default_max_vertices")]
    pub max_vertices: usize,
}

fn default_max_vertices() -> usize {
    1 << 22
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { max_vertices: default_max_vertices() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for `report.json` and the CSV tables, relative to the
    /// config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Adds the wall time to the report, which then differs between runs.
    #[serde(default)]
    pub record_wall_time: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateSource {
    Worked,
    Measured,
}

/// Rates used by the constants pipeline: the worked table or rates
/// measured on the factor cosets of the model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub source: RateSource,
    #[serde(default = "default_measure_radius")]
    pub measure_radius: u32,
    #[serde(default = "default_rep_radius")]
    pub rep_radius: u32,
}

fn default_measure_radius() -> u32 {
    4
}

fn default_rep_radius() -> u32 {
    1
}

impl Default for RatesConfig {
    fn default() -> Self {
        RatesConfig { source: RateSource::Measured, measure_radius: default_measure_radius(), rep_radius: default_rep_radius() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractConfig {
    pub radius: u32,
    #[serde(default = "default_max_mu")]
    pub max_mu: u32,
    /// The condition holds when the projection diameter at `mu` is at most
    /// `epsilon`.
    #[serde(default = "one")]
    pub mu: u32,
    #[serde(default = "one_u64")]
    pub epsilon: u64,
}

fn default_max_mu() -> u32 {
    3
}

fn one() -> u32 {
    1
}

fn one_u64() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasiconvexConfig {
    pub radius: u32,
    #[serde(default = "default_us")]
    pub us: Vec<u32>,
}

fn default_us() -> Vec<u32> {
    vec![0, 1, 2]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    /// `(lambda, c)` classes to evaluate.
    #[serde(default = "default_classes")]
    pub classes: Vec<(i64, i64)>,
    /// Expected values by constant name, e.g. `A = 4`.
    #[serde(default)]
    pub expect: std::collections::BTreeMap<String, i64>,
    /// Checks both conversions between intersection and projection bounds
    /// on the configured cosets against the listed `U`.
    #[serde(default)]
    pub interaction_us: Vec<u32>,
}

fn default_classes() -> Vec<(i64, i64)> {
    vec![(1, 0)]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_interior")]
    pub max_interior: usize,
    #[serde(default = "default_extra")]
    pub extra_len: usize,
    #[serde(default = "default_extra")]
    pub end_len: usize,
    #[serde(default = "default_q_len")]
    pub q_len: usize,
}

fn default_samples() -> usize {
    500
}

fn default_interior() -> usize {
    3
}

fn default_extra() -> usize {
    40
}

fn default_q_len() -> usize {
    6
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmalgamFixtureName {
    Free,
    Lattice,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmalgamConfig {
    pub fixture: AmalgamFixtureName,
    pub syllables: usize,
    /// Generator depth of the syllable alphabet.
    #[serde(default = "one_usize")]
    pub depth: usize,
    /// Lattice index; defaults to `D + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<i32>,
}

fn one_usize() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HnnConfig {
    pub max_t: usize,
    pub max_h: usize,
    #[serde(default = "default_kappa_radius")]
    pub kappa_radius: u32,
    /// Exponent of `c = a2^n`; defaults to one past the truncation threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<i32>,
    #[serde(default = "yes")]
    pub truncation: bool,
}

fn default_kappa_radius() -> u32 {
    5
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionConfig {
    pub samples: usize,
    /// Syllables per random element.
    pub syllables: usize,
    /// Largest absolute coordinate of a random syllable.
    pub max_coord: i32,
    #[serde(default = "default_transition_us")]
    pub us: Vec<u32>,
}

fn default_transition_us() -> Vec<u32> {
    vec![1, 2]
}

/// A complete experiment description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<SubgroupConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cosets: Vec<CosetConfig>,
    /// Number of random factor cosets added to `cosets`, drawn with `seed`.
    #[serde(default)]
    pub random_cosets: usize,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub rates: RatesConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contract: Option<ContractConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quasiconvex: Option<QuasiconvexConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amalgam: Option<AmalgamConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hnn: Option<HnnConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<TransitionConfig>,
}

/// Command-line overrides of scalar settings.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub radius: Option<u32>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
}

fn config_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

impl ExperimentConfig {
    /// Parses TOML text; errors name the offending key path.
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| config_err("<root>", e.message()))?;
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(if path == "." { "<root>".to_string() } else { path }, e.inner().message())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; a relative output directory is resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(dir), Some(parent)) = (cfg.output.dir.as_ref(), path.parent()) {
            if dir.is_relative() {
                cfg.output.dir = Some(parent.join(dir));
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(r) = o.radius {
            match self.kind {
                ExperimentKind::Contract => self.contract.as_mut().expect("validated").radius = r,
                ExperimentKind::Quasiconvex => self.quasiconvex.as_mut().expect("validated").radius = r,
                _ => self.rates.measure_radius = r,
            }
        }
        if let Some(n) = o.samples {
            match self.kind {
                ExperimentKind::AdmissibleMc => self.mc.as_mut().expect("validated").samples = n,
                ExperimentKind::Transition => self.transition.as_mut().expect("validated").samples = n,
                _ => return Err(config_err("--samples", format!("{} runs take no sample count", self.kind.name()))),
            }
        }
        if let Some(out) = &o.out {
            self.output.dir = Some(out.clone());
        }
        self.validate()
    }

    /// Cross-field checks that the schema alone cannot express.
    pub fn validate(&self) -> Result<()> {
        let model = self.model.build()?;
        let section = |present: bool, name: &str| {
            if present {
                Ok(())
            } else {
                Err(config_err(name, format!("required for kind = \"{}\"", self.kind.name())))
            }
        };
        match self.kind {
            ExperimentKind::Contract => section(self.contract.is_some(), "contract")?,
            ExperimentKind::Quasiconvex => section(self.quasiconvex.is_some(), "quasiconvex")?,
            ExperimentKind::Constants => section(self.constants.is_some(), "constants")?,
            ExperimentKind::AdmissibleMc => section(self.mc.is_some(), "mc")?,
            ExperimentKind::Amalgam => section(self.amalgam.is_some(), "amalgam")?,
            ExperimentKind::Hnn => section(self.hnn.is_some(), "hnn")?,
            ExperimentKind::Transition => section(self.transition.is_some(), "transition")?,
        }
        if matches!(self.kind, ExperimentKind::Contract | ExperimentKind::Quasiconvex)
            && self.subgroup.is_none()
            && self.cosets.is_empty()
            && self.random_cosets == 0
        {
            return Err(config_err("subgroup", "a subgroup or at least one coset is required"));
        }
        if let Some(sg) = &self.subgroup {
            for (i, g) in sg.generators.iter().enumerate() {
                model.parse(g).map_err(|e| config_err(format!("subgroup.generators[{i}]"), e.to_string()))?;
            }
        }
        for (i, c) in self.cosets.iter().enumerate() {
            model.parse(&c.rep).map_err(|e| config_err(format!("cosets[{i}].rep"), e.to_string()))?;
            if c.factor >= model.n_factors() {
                return Err(config_err(format!("cosets[{i}].factor"), format!("model has {} factors", model.n_factors())));
            }
        }
        if let Some(a) = &self.amalgam {
            let want = match a.fixture {
                AmalgamFixtureName::Free => GroupModel::f2(),
                AmalgamFixtureName::Lattice => GroupModel::z2_star_z2(),
            };
            if want.kind() != model.kind() {
                return Err(config_err("amalgam.fixture", format!("fixture lives in {}, the model is {}", want.name(), model.name())));
            }
        }
        if self.hnn.is_some() && model.kind() != GroupModel::z2_star_z2().kind() {
            return Err(config_err("model", "the HNN fixture lives in Z^2 * Z^2"));
        }
        if self.kind == ExperimentKind::AdmissibleMc && !matches!(model.kind(), ModelKind::Free { rank } if *rank >= 2) {
            return Err(config_err("model", "the decomposition generator needs a free group of rank at least 2"));
        }
        if self.kind == ExperimentKind::Transition && !(0..model.n_factors()).any(|f| model.is_peripheral(f)) {
            return Err(config_err("model", "transition runs need a peripheral factor"));
        }
        Ok(())
    }

    pub fn subgroup_spec(&self, model: &GroupModel) -> Result<Option<SubgroupSpec>> {
        self.subgroup
            .as_ref()
            .map(|sg| {
                let gens = sg.generators.iter().map(|g| model.parse(g)).collect::<Result<Vec<Element>>>()?;
                Ok(SubgroupSpec::new(gens, sg.depth))
            })
            .transpose()
    }

    pub fn coset_list(&self, model: &GroupModel) -> Result<Vec<PeripheralCoset>> {
        self.cosets.iter().map(|c| Ok(PeripheralCoset::new(model.parse(&c.rep)?, c.factor))).collect()
    }
}
