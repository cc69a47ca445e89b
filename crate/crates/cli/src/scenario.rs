//! Scenario files: one TOML document holding the model, the solver knobs and
//! the grids used by every subcommand. Every key has a default, so an empty
//! file is a valid scenario.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use harvest_core::game::{Depletion, GameConfig, NashSettings};
use harvest_core::limitp::ReplicaConfig;
use harvest_core::nondurable::Variant;
use harvest_core::optctrl::SweepSettings;
use harvest_core::ModelParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelParams,
    pub nondurable: NondurableKnobs,
    pub control: SweepSettings,
    pub durable: DurableKnobs,
    pub game: Option<GameConfig>,
    pub nash: NashSettings,
    pub closed_form: ClosedFormKnobs,
    pub replica: Option<ReplicaConfig>,
    pub detection: DetectionKnobs,
    pub output: OutputKnobs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NondurableKnobs {
    /// Share evaluated by `nondurable-eval`.
    pub share: f64,
    /// Spatial cells of the simulation; the closed form is used when absent.
    pub locations: Option<usize>,
    pub thetas: Vec<f64>,
    pub alphas: Vec<f64>,
}

impl Default for NondurableKnobs {
    fn default() -> Self {
        Self {
            share: 0.28,
            locations: None,
            thetas: (1..=20).map(|k| k as f64 * 0.5).collect(),
            alphas: (0..=100).map(|k| k as f64 / 100.0).collect(),
        }
    }
}

impl NondurableKnobs {
    pub fn variant(&self) -> Variant {
        match self.locations {
            Some(locations) => Variant::Oracle { locations },
            None => Variant::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DurableKnobs {
    /// Explicit growth factors. When absent they are derived from the model
    /// for `rounds` rounds.
    pub growth_factors: Option<Vec<f64>>,
    pub rounds: usize,
    pub tol: f64,
}

impl Default for DurableKnobs {
    fn default() -> Self {
        Self {
            growth_factors: None,
            rounds: 2,
            tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClosedFormKnobs {
    pub from: usize,
    pub to: usize,
}

impl Default for ClosedFormKnobs {
    fn default() -> Self {
        Self { from: 1, to: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionKnobs {
    pub players: Vec<usize>,
    /// Bracket on `ρ` for `limit-discount`.
    pub bracket: (f64, f64),
    /// Growth factors of the replica market; all ones when absent.
    pub growth_factors: Option<Vec<f64>>,
}

impl Default for DetectionKnobs {
    fn default() -> Self {
        Self {
            players: vec![10, 30, 100, 300, 1000],
            bracket: (1e-6, 10.0),
            growth_factors: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputKnobs {
    pub path: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Game used by `game-solve`: the configured one, or the two-round
    /// duopoly.
    pub fn game_or_default(&self) -> Result<GameConfig> {
        match &self.game {
            Some(g) => Ok(g.clone()),
            None => Ok(GameConfig::two_round(2)?.with_depletion(Depletion::Own)),
        }
    }

    pub fn replica_or_default(&self) -> ReplicaConfig {
        let mut r = self.replica.unwrap_or_default();
        if let Some(seed) = self.output.seed {
            r.seed = seed;
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(Scenario::from_toml("").unwrap(), Scenario::default());
    }

    #[test]
    fn round_trips_through_toml() {
        let mut s = Scenario::default();
        s.model.growth_rate = 0.1 + 0.2;
        s.game = Some(GameConfig::new(3, vec![1.0, 11.0 / 9.0, 1.0 / 3.0], 0.7).unwrap());
        s.replica = Some(ReplicaConfig {
            seed: u32::MAX as u64 + 5,
            ..ReplicaConfig::default()
        });
        s.durable.growth_factors = Some(vec![std::f64::consts::PI, 1e-300]);
        s.nondurable.locations = Some(4096);
        let text = s.to_toml().unwrap();
        assert_eq!(Scenario::from_toml(&text).unwrap(), s);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Scenario::from_toml("[model]\ngrowth = 1.0\n").is_err());
    }
}
