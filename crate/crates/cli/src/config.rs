//! Experiment configuration: a versioned TOML schema. Every run writes
//! the resolved config next to its outputs so artifacts are exactly
//! reproducible.

use serde::{Deserialize, Serialize};

use clusterflow_core::{Algorithm, GapLaw, IntensityMode, ReverseVariant, VerifyOptions};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    /// 0 means "use all available cores".
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_out")]
    pub out: String,
    #[serde(default)]
    pub forward: ForwardConfig,
    #[serde(default)]
    pub tree: TreeConfig,
    #[serde(default)]
    pub reverse: ReverseConfig,
    #[serde(default)]
    pub duality: DualityConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

fn default_out() -> String {
    "out".to_string()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("schema_version = 1").unwrap()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GapLawTag {
    Exponential,
    Uniform02,
    Deterministic,
    Gamma,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardConfig {
    pub n_points: usize,
    pub steps: u32,
    pub replicas: usize,
    pub algorithm: Algorithm,
    pub gap_law: GapLawTag,
    #[serde(default = "default_gamma_shape")]
    pub gamma_shape: f64,
    pub intensity_mode: IntensityMode,
    /// times at which gap CSVs / CDF panels are emitted
    pub checkpoints: Vec<u32>,
}

fn default_gamma_shape() -> f64 {
    2.0
}

impl Default for ForwardConfig {
    fn default() -> Self {
        Self {
            n_points: 200_000,
            steps: 25,
            replicas: 4,
            algorithm: Algorithm::Alg1,
            gap_law: GapLawTag::Exponential,
            gamma_shape: default_gamma_shape(),
            intensity_mode: IntensityMode::Theoretical,
            checkpoints: vec![0, 20, 25],
        }
    }
}

impl ForwardConfig {
    pub fn law(&self) -> GapLaw {
        resolve_law(self.gap_law, self.gamma_shape)
    }
}

pub fn resolve_law(tag: GapLawTag, gamma_shape: f64) -> GapLaw {
    match tag {
        GapLawTag::Exponential => GapLaw::Exponential,
        GapLawTag::Uniform02 => GapLaw::Uniform02,
        GapLawTag::Deterministic => GapLaw::Deterministic,
        GapLawTag::Gamma => GapLaw::Gamma { shape: gamma_shape },
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeConfig {
    pub n_points: usize,
    pub steps: u32,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            n_points: 64,
            steps: 6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReverseConfig {
    pub steps: u32,
    pub replicas: usize,
    pub variant: ReverseVariant,
    /// initial support indices, unit weight each
    pub eta0: Vec<i64>,
    pub s_grid: Vec<f64>,
}

impl Default for ReverseConfig {
    fn default() -> Self {
        Self {
            steps: 20,
            replicas: 2,
            variant: ReverseVariant::Gap,
            eta0: vec![0],
            s_grid: vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualityConfig {
    pub replicas: usize,
    pub n_points: usize,
    pub eta0: Vec<i64>,
    pub t_values: Vec<u32>,
    pub gap_law: GapLawTag,
    #[serde(default = "default_gamma_shape")]
    pub gamma_shape: f64,
}

impl Default for DualityConfig {
    fn default() -> Self {
        Self {
            replicas: 10_000,
            n_points: 256,
            eta0: vec![0],
            t_values: vec![1, 2, 3],
            gap_law: GapLawTag::Exponential,
            gamma_shape: default_gamma_shape(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum VerifyProfile {
    Full,
    Quick,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub profile: VerifyProfile,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            profile: VerifyProfile::Full,
        }
    }
}

impl ExperimentConfig {
    pub fn verify_options(&self) -> VerifyOptions {
        match self.verify.profile {
            VerifyProfile::Full => VerifyOptions {
                seed: self.seed,
                ..VerifyOptions::default()
            },
            VerifyProfile::Quick => VerifyOptions::quick(self.seed),
        }
    }
}

/// Parse and validate a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, String> {
    let config: ExperimentConfig =
        toml::from_str(text).map_err(|e| format!("config parse error: {e}"))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            config.schema_version
        ));
    }
    if config.tree.n_points > 512 {
        return Err("tree.n_points must be <= 512 (figure readability guard)".to_string());
    }
    if config.reverse.steps > 25 {
        return Err("reverse.steps must be <= 25 (support is O(2^t) indices)".to_string());
    }
    if let Some(&bad) = config
        .forward
        .checkpoints
        .iter()
        .find(|&&c| c > config.forward.steps)
    {
        return Err(format!(
            "forward.checkpoints contains {bad}, beyond forward.steps = {}",
            config.forward.steps
        ));
    }
    if config.forward.checkpoints.is_empty() {
        return Err("forward.checkpoints must be non-empty".to_string());
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = parse_config("schema_version = 1").unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.forward.n_points, 200_000);
        assert_eq!(c.out, "out");
    }

    #[test]
    fn wrong_version_rejected() {
        assert!(parse_config("schema_version = 99").is_err());
    }

    #[test]
    fn syntax_error_rejected() {
        assert!(parse_config("schema_version = ").is_err());
    }

    #[test]
    fn guards_enforced() {
        assert!(parse_config("schema_version = 1\n[tree]\nn_points = 600\nsteps = 2").is_err());
        assert!(parse_config(
            "schema_version = 1\n[reverse]\nsteps = 26\nreplicas = 1\nvariant = \"gap\"\neta0 = [0]\ns_grid = [0.0]"
        )
        .is_err());
    }

    #[test]
    fn roundtrips_through_toml() {
        let c = ExperimentConfig::default();
        let text = toml::to_string_pretty(&c).unwrap();
        let back = parse_config(&text).unwrap();
        assert_eq!(toml::to_string_pretty(&back).unwrap(), text);
    }
}
