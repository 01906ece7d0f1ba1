use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context};
use ehh::sysid::{CsvColumns, NarendraLiOptions, NarxSpec};
use ehh::trainer::{NeighbourhoodMode, TrainConfig};
use serde::{Deserialize, Serialize};

/// One `(q, intermediates)` model-size candidate; the neuron budget is
/// `n * q + intermediates` for `n` regressors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeSetting {
    pub q: usize,
    pub intermediates: usize,
}

impl FromStr for SizeSetting {
    type Err = String;

    /// `QxC`, e.g. `5x40`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (q, c) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected QxC, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
        Ok(Self {
            q: parse(q)?,
            intermediates: parse(c)?,
        })
    }
}

fn narendra_li_spec() -> NarxSpec {
    NarxSpec::narendra_li()
}

/// Everything a run depends on besides the data files. Loaded from TOML,
/// then overridden by command-line flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub restarts: usize,
    /// Model sizes swept before the restarts, least training GCV wins. Empty
    /// means `train.q` and `train.neurons` are used as given.
    pub grid: Vec<SizeSetting>,
    #[serde(default = "narendra_li_spec")]
    pub narx: NarxSpec,
    pub columns: CsvColumns,
    pub train: TrainConfig,
    pub benchmark: NarendraLiOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            grid: Vec::new(),
            narx: narendra_li_spec(),
            columns: CsvColumns::default(),
            train: TrainConfig::default(),
            benchmark: NarendraLiOptions::default(),
        }
    }
}

/// Flags that override the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub cycles: Option<usize>,
    pub mode: Option<NeighbourhoodMode>,
    pub grid: Option<Vec<SizeSetting>>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.train.seed = seed;
        }
        if let Some(r) = o.restarts {
            self.restarts = r;
        }
        if let Some(c) = o.cycles {
            self.train.max_cycles = c;
        }
        if let Some(m) = o.mode {
            self.train.mode = m;
        }
        if let Some(g) = &o.grid {
            self.grid = g.clone();
        }
    }

    pub fn check(&self) -> anyhow::Result<()> {
        if self.restarts == 0 {
            bail!(ehh::Error::InvalidConfig("restarts must be at least 1".into()));
        }
        self.narx.validate()?;
        let n = self.narx.dim();
        if self.grid.is_empty() {
            self.train.validate(n)?;
        }
        for g in &self.grid {
            self.sized(*g).validate(n)?;
        }
        Ok(())
    }

    /// The training config for one grid candidate.
    pub fn sized(&self, size: SizeSetting) -> TrainConfig {
        TrainConfig {
            q: size.q,
            neurons: self.narx.dim() * size.q + size.intermediates,
            ..self.train.clone()
        }
    }
}
