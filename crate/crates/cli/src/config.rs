//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use sectio::bodies::{BodySpec, Exponent, StarBody};
use sectio::bpgm::CounterexampleConfig;
use sectio::measures::{Density, DensitySpec};
use sectio::{Direction, GridSpec, Rule};

use crate::exit::ConfigError;

/// Explicit unit vectors, the nodes of the command's grid, or a seeded random sample.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DirectionSpec {
    List(Vec<Vec<f64>>),
    Named(NamedDirections),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedDirections {
    Grid,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    #[serde(default)]
    pub bodies: Vec<BodySpec>,
    #[serde(default)]
    pub densities: Vec<DensitySpec>,
    /// `f_{n-1}`; defaults to the first density.
    #[serde(default)]
    pub lower_density: Option<DensitySpec>,
    /// Gauge body `M` for the bounds command.
    #[serde(default)]
    pub reference: Option<BodySpec>,
    #[serde(default)]
    pub resolution: Option<usize>,
    /// Resolution of the subsphere rule for direct sections.
    #[serde(default)]
    pub section_resolution: Option<usize>,
    #[serde(default)]
    pub rule: Option<Rule>,
    #[serde(default)]
    pub max_degree: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub directions: Option<DirectionSpec>,
    #[serde(default = "default_direction_count")]
    pub direction_count: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Section profile CSV for reconstruct.
    #[serde(default)]
    pub profile: Option<PathBuf>,
    #[serde(default)]
    pub counterexample: Option<CounterexampleConfig>,
    /// `p` values of the volume ratio table.
    #[serde(default)]
    pub ratio_p: Option<Vec<Exponent>>,
}

fn default_direction_count() -> usize {
    20
}

pub const MAX_RESOLUTION: usize = 512;
pub const MAX_DEGREE: usize = 256;

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let n = self.dimension;
        if !(2..=16).contains(&n) {
            bail!(ConfigError(format!("field `dimension`: {n} is outside 2..=16")));
        }
        if let Some(r) = self.resolution {
            if r == 0 || r > MAX_RESOLUTION {
                bail!(ConfigError(format!(
                    "field `resolution`: {r} is outside 1..={MAX_RESOLUTION}"
                )));
            }
        }
        if let Some(m) = self.max_degree {
            if m > MAX_DEGREE {
                bail!(ConfigError(format!(
                    "field `max_degree`: {m} exceeds {MAX_DEGREE}"
                )));
            }
        }
        if let Some(DirectionSpec::List(list)) = &self.directions {
            for (i, d) in list.iter().enumerate() {
                if d.len() != n {
                    bail!(ConfigError(format!(
                        "field `directions[{i}]`: has {} coordinates, dimension is {n}",
                        d.len()
                    )));
                }
            }
        }
        for (i, b) in self.bodies.iter().enumerate() {
            b.build(n)
                .map_err(|e| ConfigError(format!("field `bodies[{i}]`: {e}")))?;
        }
        if let Some(b) = &self.reference {
            b.build(n)
                .map_err(|e| ConfigError(format!("field `reference`: {e}")))?;
        }
        for (i, d) in self.densities.iter().enumerate() {
            d.build()
                .map_err(|e| ConfigError(format!("field `densities[{i}]`: {e}")))?;
        }
        if let Some(d) = &self.lower_density {
            d.build()
                .map_err(|e| ConfigError(format!("field `lower_density`: {e}")))?;
        }
        Ok(())
    }

    pub fn bodies(&self) -> anyhow::Result<Vec<StarBody>> {
        if self.bodies.is_empty() {
            bail!(ConfigError("field `bodies`: at least one body is required".into()));
        }
        Ok(self
            .bodies
            .iter()
            .map(|b| b.build(self.dimension))
            .collect::<Result<_, _>>()?)
    }

    pub fn densities(&self) -> anyhow::Result<Vec<Density>> {
        if self.densities.is_empty() {
            return Ok(vec![Density::lebesgue()]);
        }
        Ok(self
            .densities
            .iter()
            .map(DensitySpec::build)
            .collect::<Result<_, _>>()?)
    }

    /// The single body of commands that take one.
    pub fn body(&self) -> anyhow::Result<StarBody> {
        let mut b = self.bodies()?;
        if b.len() != 1 {
            bail!(ConfigError(format!(
                "field `bodies`: this command takes one body, got {}",
                b.len()
            )));
        }
        Ok(b.remove(0))
    }

    pub fn density(&self) -> anyhow::Result<Density> {
        let mut d = self.densities()?;
        if d.len() != 1 {
            bail!(ConfigError(format!(
                "field `densities`: this command takes one density, got {}",
                d.len()
            )));
        }
        Ok(d.remove(0))
    }

    /// `(f_n, f_{n-1})`.
    pub fn density_pair(&self) -> anyhow::Result<(Density, Density)> {
        let f_n = self.density()?;
        let f_n1 = match &self.lower_density {
            Some(d) => d.build()?,
            None => f_n.clone(),
        };
        Ok((f_n, f_n1))
    }

    pub fn reference(&self) -> anyhow::Result<StarBody> {
        match &self.reference {
            Some(b) => Ok(b.build(self.dimension)?),
            None => bail!(ConfigError("field `reference`: required by this command".into())),
        }
    }

    pub fn grid_spec(&self, default_resolution: usize, default_rule: Rule) -> GridSpec {
        GridSpec {
            rule: self.rule.unwrap_or(default_rule),
            resolution: self.resolution.unwrap_or(default_resolution),
        }
    }

    pub fn section_spec(&self, default_resolution: usize) -> GridSpec {
        GridSpec {
            rule: self.rule.unwrap_or(Rule::Orthant),
            resolution: self
                .section_resolution
                .or(self.resolution)
                .unwrap_or(default_resolution),
        }
    }

    pub fn max_degree(&self, default: usize) -> usize {
        self.max_degree.unwrap_or(default)
    }

    /// Directions from the config; `grid` supplies the nodes for `"grid"`.
    pub fn directions(&self, grid: Option<&sectio::SphereGrid>) -> anyhow::Result<Vec<Direction>> {
        match &self.directions {
            Some(DirectionSpec::List(list)) => list
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    Direction::new(d.clone())
                        .map_err(|e| ConfigError(format!("field `directions[{i}]`: {e}")).into())
                })
                .collect(),
            Some(DirectionSpec::Named(NamedDirections::Grid)) => match grid {
                Some(g) => Ok(sectio::measures::grid_directions(g)),
                None => bail!(ConfigError(
                    "field `directions`: \"grid\" is not available for this command".into()
                )),
            },
            None => Ok(random_directions(self.dimension, self.direction_count, self.seed)),
        }
    }

    pub fn counterexample(&self) -> CounterexampleConfig {
        let mut c = self.counterexample.clone().unwrap_or_default();
        c.seed = self.seed;
        if self.max_degree.is_some() {
            c.max_degree = self.max_degree;
        }
        if let Some(r) = self.resolution {
            c.measure_resolution = r;
        }
        c
    }

    pub fn profile_path(&self) -> anyhow::Result<&Path> {
        self.profile
            .as_deref()
            .context("field `profile`: required by reconstruct")
            .map_err(|e| ConfigError(e.to_string()).into())
    }
}

/// Direction `i` is drawn from the ChaCha stream `i` of `seed`.
pub fn random_directions(n: usize, count: usize, seed: u64) -> Vec<Direction> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            Direction::random(n, &mut rng)
        })
        .collect()
}
