//! Experiment spec files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use vsearch_core::{KinoLimits, PlannerParams, ScenarioParams, SensorModel, SimConfig, Strategy, StrategyName};

/// A batch experiment: every seed × strategy × team size.
///
/// Exactly one of `scenario` (inline generation params) and `scenario_file`
/// must be present. A relative `scenario_file` is resolved against the spec
/// file's directory. Seeds replace the scenario's own seed, so one spec
/// covers many generated worlds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_file: Option<PathBuf>,
    pub strategies: Vec<String>,
    #[serde(default = "default_agents")]
    pub n_agents: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub planner: PlannerParams,
    #[serde(default = "default_half_side")]
    pub sensor_half_side: f64,
    #[serde(default)]
    pub limits: KinoLimits,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
    #[serde(default = "default_local_radius")]
    pub local_radius: f64,
    #[serde(default = "default_radius_growth")]
    pub radius_growth: f64,
    /// Mixed into every run's agent placement seed.
    #[serde(default)]
    pub placement_seed: u64,
}

fn default_agents() -> Vec<usize> {
    vec![1]
}

fn default_half_side() -> f64 {
    SensorModel::default().half_side()
}

fn default_max_rounds() -> usize {
    5000
}

fn default_local_radius() -> f64 {
    Strategy::new(vsearch_core::StrategyKind::LocalMaxima).local_radius
}

fn default_radius_growth() -> f64 {
    Strategy::new(vsearch_core::StrategyKind::LocalMaxima).radius_growth
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading spec {}", path.display()))?;
        let mut spec = Self::parse(&text).with_context(|| format!("in spec {}", path.display()))?;
        if let (Some(file), Some(dir)) = (spec.scenario_file.as_mut(), path.parent()) {
            if file.is_relative() {
                *file = dir.join(&*file);
            }
        }
        Ok(spec)
    }

    /// Parses and validates a spec. Errors name the offending field.
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: ExperimentSpec = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow::anyhow!("field `{path}`: {}", e.into_inner())
        })?;
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> anyhow::Result<()> {
        match (&self.scenario, &self.scenario_file) {
            (Some(_), Some(_)) => bail!("field `scenario_file`: give either `scenario` or `scenario_file`, not both"),
            (None, None) => bail!("field `scenario`: missing; give inline params or `scenario_file`"),
            _ => {}
        }
        if self.strategies.is_empty() {
            bail!("field `strategies`: need at least one strategy");
        }
        if self.seeds.is_empty() {
            bail!("field `seeds`: need at least one seed");
        }
        if self.n_agents.is_empty() {
            bail!("field `n_agents`: need at least one team size");
        }
        for (i, &n) in self.n_agents.iter().enumerate() {
            if n == 0 {
                bail!("field `n_agents[{i}]`: team size must be at least 1");
            }
        }
        if self.planner.limits != KinoLimits::default() && self.planner.limits != self.limits {
            bail!("field `planner.limits`: set kinodynamic limits once, at top-level `limits`");
        }
        self.strategy_names()?;
        for cfg in self.configs()? {
            cfg.validate()
                .map_err(|e| anyhow::anyhow!("field `{}`: {e}", field_of(&e)))?;
        }
        Ok(())
    }

    pub fn strategy_names(&self) -> anyhow::Result<Vec<StrategyName>> {
        self.strategies
            .iter()
            .enumerate()
            .map(|(i, s)| s.parse().map_err(|e| anyhow::anyhow!("field `strategies[{i}]`: {e}")))
            .collect()
    }

    /// Run configurations in output order: strategy-major, then team size.
    pub fn configs(&self) -> anyhow::Result<Vec<SimConfig>> {
        let sensor =
            SensorModel::new(self.sensor_half_side).map_err(|e| anyhow::anyhow!("field `sensor_half_side`: {e}"))?;
        let mut out = Vec::new();
        for name in self.strategy_names()? {
            for &n in &self.n_agents {
                let mut cfg = SimConfig::new(name, n);
                cfg.strategy.local_radius = self.local_radius;
                cfg.strategy.radius_growth = self.radius_growth;
                cfg.planner = self.planner;
                cfg.planner.limits = self.limits;
                cfg.sensor = sensor;
                cfg.limits = self.limits;
                cfg.max_rounds = self.max_rounds;
                cfg.rng_seed = self.placement_seed;
                cfg.record_trace = true;
                out.push(cfg);
            }
        }
        Ok(out)
    }

    pub fn scenario_params(&self) -> anyhow::Result<ScenarioParams> {
        if let Some(p) = &self.scenario {
            return Ok(p.clone());
        }
        let path = self.scenario_file.as_ref().context("field `scenario`: missing")?;
        load_scenario(path)
    }
}

pub fn load_scenario(path: &Path) -> anyhow::Result<ScenarioParams> {
    let text = fs::read_to_string(path).with_context(|| format!("reading scenario {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        anyhow::anyhow!("scenario {}: field `{field}`: {}", path.display(), e.into_inner())
    })
}

/// Maps a core validation error onto the spec field it came from.
fn field_of(e: &vsearch_core::SearchError) -> &'static str {
    match e {
        vsearch_core::SearchError::InvalidParameter { name, .. } => match *name {
            "v_max" | "a_max" => "limits",
            "n_steps" | "step_time" | "n_rays" | "n_actions" | "discount" => "planner",
            other => other,
        },
        _ => "spec",
    }
}
