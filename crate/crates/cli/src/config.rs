//! Experiment configuration, read from TOML.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use fluxindex::braiding::StringMethod;
use fluxindex::lattice::{Axis, Side};
use fluxindex::models::{ModelKind, ModelSpec};
use fluxindex::spectral_filter::FilterProfile;
use fluxindex::transport::SplitMethod;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    FfIndex,
    MbIndex,
    Lsm,
    Hall,
    Adz,
    Braid,
    Anyon,
    ProofChain,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::FfIndex => "ff-index",
            ExperimentKind::MbIndex => "mb-index",
            ExperimentKind::Lsm => "lsm",
            ExperimentKind::Hall => "hall",
            ExperimentKind::Adz => "adz",
            ExperimentKind::Braid => "braid",
            ExperimentKind::Anyon => "anyon",
            ExperimentKind::ProofChain => "proof-chain",
        }
    }
}

/// The unitary whose index is measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProcessSpec {
    Identity,
    Translation { shift: [isize; 2] },
    /// Flux through one boundary of the half torus cut along `axis`.
    Flux {
        #[serde(default = "default_axis")]
        axis: Axis,
        #[serde(default = "default_side")]
        side: Side,
    },
    /// Flux through both boundaries.
    FullFlux {
        #[serde(default = "default_axis")]
        axis: Axis,
    },
}

fn default_side() -> Side {
    Side::Minus
}

/// Every numerical threshold the drivers use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Levels within this distance of the ground energy form the ground multiplet.
    /// Unset: `1e-8` times the largest Hamiltonian matrix element.
    pub multiplet: Option<f64>,
    /// Upper bound on `‖[P, U]‖` accepted by the one-particle index.
    pub commutator: f64,
    /// Topological-order gate for degenerate ground spaces.
    pub topological_order: f64,
    /// Distance to `ℤ/p` below which an index counts as quantized.
    pub integrality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            multiplet: None,
            commutator: 1.0,
            topological_order: 0.05,
            integrality: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: ModelSpec,
    /// Required by `ff-index`, `mb-index` and `braid`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<ProcessSpec>,
    /// Direction across which the index is measured (the half torus `Γ` is cut along it).
    #[serde(default = "default_axis")]
    pub axis: Axis,
    /// Boundary strip width; unset means `max(1, L/4)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strip_width: Option<usize>,
    /// Grid points on `φ ∈ [0, 2π]` for the twist interpolation.
    #[serde(default = "default_phi_steps")]
    pub phi_steps: usize,
    #[serde(default)]
    pub filter: FilterProfile,
    #[serde(default)]
    pub split: SplitMethod,
    #[serde(default)]
    pub string: StringMethod,
    /// Number of boundary bonds in the open string of `anyon`.
    #[serde(default = "default_string_length")]
    pub string_length: usize,
    /// Translation distance (columns) for `lsm` and `adz`.
    #[serde(default = "default_shift")]
    pub shift: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    /// Directory for the result record; unset means no file is written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_axis() -> Axis {
    Axis::One
}

fn default_phi_steps() -> usize {
    100
}

fn default_string_length() -> usize {
    2
}

fn default_shift() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let field = |name: &str, msg: String| Err(CliError::Invalid { field: name.into(), message: msg });
        self.model
            .validate()
            .or_else(|e| field("model", e.to_string()))?;
        let t = &self.tolerances;
        if let Some(m) = t.multiplet {
            if !(m > 0.0) {
                return field("tolerances.multiplet", format!("must be positive, got {m}"));
            }
        }
        for (name, v) in [
            ("tolerances.commutator", t.commutator),
            ("tolerances.topological_order", t.topological_order),
            ("tolerances.integrality", t.integrality),
        ] {
            if !(v > 0.0) {
                return field(name, format!("must be positive, got {v}"));
            }
        }
        if self.strip_width == Some(0) {
            return field("strip_width", "must be at least 1".into());
        }
        if self.phi_steps < 4 {
            return field("phi_steps", format!("needs at least 4 grid points, got {}", self.phi_steps));
        }
        if self.shift == 0 {
            return field("shift", "must be at least 1".into());
        }
        if self.string_length == 0 {
            return field("string_length", "must be at least 1".into());
        }
        match self.kind {
            ExperimentKind::FfIndex | ExperimentKind::MbIndex | ExperimentKind::Braid if self.process.is_none() => {
                return field("process", format!("required for {}", self.kind.name()));
            }
            ExperimentKind::Hall | ExperimentKind::Adz | ExperimentKind::Anyon | ExperimentKind::ProofChain
                if self.model.l2 < 4 =>
            {
                return field("model.l2", format!("{} needs a two-dimensional torus (l2 ≥ 4)", self.kind.name()));
            }
            ExperimentKind::ProofChain | ExperimentKind::FfIndex if self.model.kind != ModelKind::Hofstadter && self.model.particles.is_none() => {
                return field("model.particles", "required to fix the filled band".into());
            }
            _ => {}
        }
        if self.kind != ExperimentKind::FfIndex && self.kind != ExperimentKind::ProofChain && self.model.particles.is_none() {
            return field("model.particles", format!("required for {}", self.kind.name()));
        }
        Ok(())
    }
}
