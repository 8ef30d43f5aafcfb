use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attack::{AttackConfig, PerturbationMask, UpdateRule};
use crate::error::{Error, Result};
use crate::evaluation::{ToleranceTable, EPSILON_GRID};
use crate::models::TrainConfig;
use crate::skeldata::DEFAULT_HELD_OUT;

/// Full configuration tree. Every section and key is optional in the file;
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub seed: u64,
    pub data: DataConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub attack: AttackSection,
    pub eval: EvalConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub per_category: usize,
    pub frames: usize,
    pub joints: usize,
    pub held_out: Vec<String>,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self { per_category: 5, frames: 40, joints: 15, held_out: DEFAULT_HELD_OUT.map(String::from).to_vec() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Tiny,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub kind: crate::models::ArchKind,
    pub preset: Preset,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { kind: crate::models::ArchKind::Tcn, preset: Preset::Tiny }
    }
}

/// Attack settings as written in a config file. κ is not set here; it is
/// resolved per objective from `eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttackSection {
    pub epsilon: f64,
    pub alpha: f64,
    pub steps: usize,
    pub lambda: f64,
    pub mask: MaskName,
    pub update_rule: RuleName,
    pub adam_learning_rate: f64,
    pub stop_on_success: bool,
    pub clamp_domain: bool,
}

impl Default for AttackSection {
    fn default() -> Self {
        let a = AttackConfig::default();
        Self {
            epsilon: a.epsilon,
            alpha: a.alpha,
            steps: a.steps,
            lambda: a.lambda,
            mask: MaskName::Depth,
            update_rule: RuleName::Pgd,
            adam_learning_rate: 1e-3,
            stop_on_success: a.stop_on_success,
            clamp_domain: a.clamp_domain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MaskName {
    Depth,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RuleName {
    Pgd,
    Adam,
}

impl AttackSection {
    /// The attack configuration for a given κ.
    pub fn to_attack(&self, kappa: f64) -> Result<AttackConfig> {
        let cfg = AttackConfig {
            epsilon: self.epsilon,
            alpha: self.alpha,
            steps: self.steps,
            lambda: self.lambda,
            kappa,
            mask: match self.mask {
                MaskName::Depth => PerturbationMask::Depth,
                MaskName::All => PerturbationMask::All,
            },
            update_rule: match self.update_rule {
                RuleName::Pgd => UpdateRule::Pgd,
                RuleName::Adam => UpdateRule::Adam { learning_rate: self.adam_learning_rate },
            },
            stop_on_success: self.stop_on_success,
            clamp_domain: self.clamp_domain,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// How per-objective tolerances are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaMode {
    /// Look labels up in `tolerances`.
    Table,
    /// Quantile of natural distance sums over the evaluated samples.
    Natural,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub epsilon_grid: Vec<f64>,
    pub objective_seed: u64,
    pub kappa_mode: KappaMode,
    pub kappa_quantile: f64,
    pub tolerances: ToleranceTable,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            epsilon_grid: EPSILON_GRID.to_vec(),
            objective_seed: 0,
            kappa_mode: KappaMode::Table,
            kappa_quantile: 0.25,
            tolerances: ToleranceTable::default(),
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.attack.to_attack(0.0)?;
        let d = &self.data;
        if d.per_category == 0 || d.frames < 2 || d.joints == 0 {
            return Err(Error::Config(format!(
                "data: need per_category ≥ 1, frames ≥ 2 and joints ≥ 1, got {}, {}, {}",
                d.per_category, d.frames, d.joints
            )));
        }
        let e = &self.eval;
        if e.epsilon_grid.is_empty() || e.epsilon_grid.iter().any(|&x| x.is_nan() || x <= 0.0) {
            return Err(Error::Config("eval: epsilon_grid must be non-empty with positive entries".into()));
        }
        if !(0.0..=1.0).contains(&e.kappa_quantile) {
            return Err(Error::Config(format!("eval: kappa_quantile must lie in [0, 1], got {}", e.kappa_quantile)));
        }
        if e.kappa_mode == KappaMode::Table && e.tolerances.is_empty() {
            return Err(Error::Config("eval: tolerance table is empty".into()));
        }
        Ok(())
    }
}

/// Parse and validate a TOML config file. Missing keys take their defaults.
pub fn load_config(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_config(text: &str) -> Result<Config> {
    let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.attack.alpha, 0.03);
        assert_eq!(c.attack.steps, 400);
        assert_eq!(c.attack.lambda, 0.1);
        assert_eq!(c.train.learning_rate, 1e-3);
        assert_eq!(c.train.epochs, 1000);
        assert_eq!(c.eval.epsilon_grid, vec![0.075, 0.15, 0.225, 0.3, 0.375, 0.45]);
    }

    #[test]
    fn overrides_apply() {
        let c = parse_config("seed = 4\n[attack]\nlambda = 0.0\nmask = \"all\"\n[model]\nkind = \"gru\"\n").unwrap();
        assert_eq!(c.seed, 4);
        assert_eq!(c.attack.lambda, 0.0);
        assert_eq!(c.attack.to_attack(1.0).unwrap().mask, PerturbationMask::All);
        assert_eq!(c.model.kind, crate::models::ArchKind::Gru);
    }

    #[test]
    fn out_of_range_lambda_rejected() {
        assert!(matches!(parse_config("[attack]\nlambda = 1.5\n"), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse_config("[attack]\nlamda = 0.5\n").is_err());
        assert!(parse_config("[plots]\nx = 1\n").is_err());
        assert!(parse_config("sed = 1\n").is_err());
    }

    #[test]
    fn tolerance_table_from_toml() {
        let c = parse_config("[eval]\ntolerances = { hugging = 12.5 }\n").unwrap();
        assert_eq!(c.eval.tolerances.get("hugging"), Some(12.5));
        assert_eq!(c.eval.tolerances.len(), 1);
        assert!(parse_config("[eval]\ntolerances = {}\n").is_err());
    }
}
