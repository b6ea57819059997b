use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Family;
use crate::schemes::Preset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    TraceIdentity,
    AqCheck,
    Holder,
    DetSemigroup,
    TemporalWeak,
    TemporalStrong,
    FullWeak,
    FullStrong,
    ChcWeak,
    HeatWeak,
    Representation,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 11] = [
        ExperimentKind::TraceIdentity,
        ExperimentKind::AqCheck,
        ExperimentKind::Holder,
        ExperimentKind::DetSemigroup,
        ExperimentKind::TemporalWeak,
        ExperimentKind::TemporalStrong,
        ExperimentKind::FullWeak,
        ExperimentKind::FullStrong,
        ExperimentKind::ChcWeak,
        ExperimentKind::HeatWeak,
        ExperimentKind::Representation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::TraceIdentity => "trace_identity",
            ExperimentKind::AqCheck => "aq_check",
            ExperimentKind::Holder => "holder",
            ExperimentKind::DetSemigroup => "det_semigroup",
            ExperimentKind::TemporalWeak => "temporal_weak",
            ExperimentKind::TemporalStrong => "temporal_strong",
            ExperimentKind::FullWeak => "full_weak",
            ExperimentKind::FullStrong => "full_strong",
            ExperimentKind::ChcWeak => "chc_weak",
            ExperimentKind::HeatWeak => "heat_weak",
            ExperimentKind::Representation => "representation",
        }
    }

    /// The result the experiment reproduces.
    pub fn theorem(self) -> &'static str {
        match self {
            ExperimentKind::TraceIdentity => {
                "Trace identity for the wave stochastic convolution: Tr int_0^T E(t)BQB*E(t)* dt = T Tr(L^-1/2 Q L^-1/2)"
            }
            ExperimentKind::AqCheck => {
                "Operator-noise inequality chain: ||L^s/2 Q^1/2||_HS^2 <= ||L^s Q||_Tr <= ||L^(s+a) Q||_B ||L^-a||_Tr, and <= ||L^(s+1/2) Q L^-1/2||_Tr, with equalities for commuting Q"
            }
            ExperimentKind::Holder => "Hoelder continuity of the wave group: ||(E(t)-E(s))x|| <= C |t-s|^a ||x||_a",
            ExperimentKind::DetSemigroup => {
                "Deterministic error of the interpolated rational approximation of the wave group: sup_t ||E_k(t)-E(t)||_B(H^a,H) <= C k^min(a p/(p+1), 1)"
            }
            ExperimentKind::TemporalWeak => "Weak error of rational time stepping for the stochastic wave equation: O(k^min(2 b p/(p+1), 1))",
            ExperimentKind::TemporalStrong => {
                "Strong error of rational time stepping for the stochastic wave equation, displacement in L2: O(k^min(b p/(p+1), 1))"
            }
            ExperimentKind::FullWeak => {
                "Weak error of the fully discrete wave approximation, displacement: O(h^min(2 b r/(r+1), r) + k^min(2 b p/(p+1), 1))"
            }
            ExperimentKind::FullStrong => {
                "Strong error of the fully discrete wave approximation, displacement in L2: O(h^min(b r/(r+1), r) + k^min(b p/(p+1), 1))"
            }
            ExperimentKind::ChcWeak => {
                "Weak error of the fully discrete linearized Cahn-Hilliard-Cook equation: O((h^2b + k^(b/2)) log(T/(h^4 + k))), b <= r/2"
            }
            ExperimentKind::HeatWeak => {
                "Fully discrete stochastic heat equation: deterministic error O((h^2 + k) t^-1); observed weak rates h^2b and k^b"
            }
            ExperimentKind::Representation => {
                "Weak error representation: e(T) = <u_x term along the deterministic paths> + 1/2 int_0^T Tr(u_xx O(t)) dt"
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    K,
    H,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalChoice {
    Sine,
    GaussExp,
    /// `exp(-|x_1|^2 / 2)` over every mode of the first component.
    GaussNorm,
    Quadratic,
}

/// One experiment, read from a flat JSON document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub family: Option<Family>,
    #[serde(default)]
    pub scheme: Option<Preset>,
    /// `q_j = lambda_j^(-gamma)`; `0` is `Q = I`.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Regularity index; must sit at least 0.05 inside the admissible range.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub j_ref: Option<usize>,
    /// Inclusive dyadic levels: `k = T 2^-l`.
    #[serde(default)]
    pub k_levels: Option<[u32; 2]>,
    /// Inclusive dyadic levels: `h = 2^-l`.
    #[serde(default)]
    pub h_levels: Option<[u32; 2]>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    /// Level of the resolution held fixed during a sweep.
    #[serde(default)]
    pub pinned_level: Option<u32>,
    #[serde(default)]
    pub functional: Option<FunctionalChoice>,
    /// Probe weights `psi_j = j^-psi_decay` on the first component.
    #[serde(default)]
    pub psi_decay: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub n_paths: usize,
    /// Output prefix; `<output>.csv` and `<output>.json` are written.
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default, rename = "T")]
    pub t_final: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Number of randomized cases for aq_check, holder and representation.
    #[serde(default)]
    pub cases: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            family: None,
            scheme: None,
            gamma: None,
            beta: None,
            j_ref: None,
            k_levels: None,
            h_levels: None,
            sweep: None,
            pinned_level: None,
            functional: None,
            psi_decay: None,
            seed: 0,
            n_paths: 0,
            output: None,
            t_final: None,
            alpha: None,
            cases: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn t(&self) -> f64 {
        self.t_final.unwrap_or(0.7)
    }

    pub fn family_or(&self, f: Family) -> Family {
        self.family.unwrap_or(f)
    }

    pub fn scheme_or(&self, p: Preset) -> Preset {
        self.scheme.unwrap_or(p)
    }

    pub fn gamma_or(&self, g: f64) -> f64 {
        self.gamma.unwrap_or(g)
    }

    pub fn j_ref(&self) -> usize {
        self.j_ref.unwrap_or(1024)
    }

    pub fn k_levels_or(&self, lo: u32, hi: u32) -> [u32; 2] {
        self.k_levels.unwrap_or([lo, hi])
    }

    pub fn h_levels_or(&self, lo: u32, hi: u32) -> [u32; 2] {
        self.h_levels.unwrap_or([lo, hi])
    }

}
