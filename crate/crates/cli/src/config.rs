//! Experiment configuration.

use crate::error::CliError;
use graphcalc_core::graph::{gen_cycle, gen_dumbbell, gen_grid, gen_tree, read_graph};
use graphcalc_core::WeightedGraph;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub suite: Vec<Check>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Overrides of per-check tolerances, keyed by parameter name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GraphSpec {
    File { file: PathBuf },
    Generated(Generator),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "lowercase", deny_unknown_fields)]
pub enum Generator {
    Grid {
        dim: usize,
        side: usize,
        #[serde(default = "one")]
        laziness: f64,
    },
    Dumbbell {
        side: usize,
    },
    Cycle {
        n: usize,
        #[serde(rename = "self", default = "one")]
        self_weight: f64,
    },
    Tree {
        #[serde(default = "two")]
        branching: usize,
        depth: usize,
    },
}

fn one() -> f64 {
    1.0
}

fn two() -> usize {
    2
}

impl Generator {
    pub fn build(&self) -> graphcalc_core::Result<WeightedGraph> {
        match *self {
            Generator::Grid { dim, side, laziness } => gen_grid(dim, side, laziness),
            Generator::Dumbbell { side } => gen_dumbbell(side),
            Generator::Cycle { n, self_weight } => gen_cycle(n, self_weight),
            Generator::Tree { branching, depth } => gen_tree(branching, depth),
        }
    }
}

impl GraphSpec {
    /// Relative file paths resolve against `base`.
    pub fn load(&self, base: &Path) -> Result<WeightedGraph, CliError> {
        match self {
            GraphSpec::File { file } => {
                let path = if file.is_absolute() { file.clone() } else { base.join(file) };
                read_graph(&path).map_err(CliError::from_core_io)
            }
            GraphSpec::Generated(gen) => gen.build().map_err(|e| CliError::Usage(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyName {
    Exact,
    Ascent,
    Sample,
}

macro_rules! defaults {
    ($($name:ident: $ty:ty = $value:expr;)*) => {
        $(fn $name() -> $ty { $value })*
    };
}

defaults! {
    d_radii: Vec<usize> = vec![1, 2, 4];
    p_grid: Vec<f64> = vec![1.0, 1.5, 2.0, 3.0, 4.0];
    twenty: usize = 20;
    fifty: usize = 50;
    hundred: usize = 100;
    k_grid: Vec<u32> = (1..=16).collect();
    c_grid: Vec<f64> = graphcalc_core::lab::DEFAULT_C_GRID.to_vec();
    cap: f64 = 100.0;
    p_radii: Vec<usize> = vec![2, 4, 8];
    spread_cap: f64 = 4.0;
    p_two: f64 = 2.0;
    p_three: f64 = 3.0;
    p_four: f64 = 4.0;
    p_rh: f64 = 2.5;
    restarts: usize = 20;
    steps: usize = 300;
    n_grid: Vec<u32> = (1..=64).collect();
    duality_tol: f64 = 1e-6;
    q_one: f64 = 1.0;
    percentile: f64 = 0.5;
    one_usize: usize = 1;
    three_usize: usize = 3;
    t_fractions: Vec<f64> = vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.85, 1.0];
    k_bound: f64 = 50.0;
    i_max: u32 = 3;
    l_grid: Vec<u32> = vec![1, 2, 4, 8, 16, 32];
    estim_len: usize = 100_000;
    alpha_c: f64 = 1.0;
    j_max: u32 = 6;
    l_max: usize = 50;
    quad_points: usize = 4096;
}

/// One entry of the suite; the tag is the check name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "SCREAMING_SNAKE_CASE", deny_unknown_fields)]
pub enum Check {
    D {
        #[serde(default)]
        centers: Option<Vec<usize>>,
        #[serde(default = "d_radii")]
        radii: Vec<usize>,
    },
    DeltaAlpha {
        #[serde(default = "p_grid")]
        p_grid: Vec<f64>,
        #[serde(default = "twenty")]
        samples: usize,
    },
    Due(KernelParams),
    Ue(KernelParams),
    Lue(KernelParams),
    Timederiv(KernelParams),
    P2 {
        #[serde(default)]
        centers: Option<Vec<usize>>,
        #[serde(default = "p_radii")]
        radii: Vec<usize>,
        #[serde(default = "spread_cap")]
        spread_cap: f64,
    },
    Pq {
        #[serde(default)]
        centers: Option<Vec<usize>>,
        #[serde(default = "p_radii")]
        radii: Vec<usize>,
        #[serde(default = "p_three")]
        p: f64,
        #[serde(default = "spread_cap")]
        spread_cap: f64,
        #[serde(default = "restarts")]
        restarts: usize,
        #[serde(default = "steps")]
        steps: usize,
    },
    Gp {
        #[serde(default = "p_two")]
        p: f64,
        #[serde(default = "n_grid")]
        n_grid: Vec<u32>,
        #[serde(default = "restarts")]
        restarts: usize,
        #[serde(default = "steps")]
        steps: usize,
    },
    Rp(RieszParams),
    Rrp(RieszParams),
    Duality {
        #[serde(default = "p_four")]
        p: f64,
        #[serde(default = "duality_tol")]
        tol: f64,
        #[serde(default = "restarts")]
        restarts: usize,
        #[serde(default = "steps")]
        steps: usize,
    },
    Gfunc {
        #[serde(default = "fifty")]
        samples: usize,
    },
    Cz {
        #[serde(default = "q_one")]
        q: f64,
        #[serde(default = "p_two")]
        p: f64,
        /// Level as a quantile of M(|∇f|^q)^{1/q}; ignored when `alpha` is set.
        #[serde(default = "percentile")]
        percentile: f64,
        #[serde(default)]
        alpha: Option<f64>,
        #[serde(default = "one_usize")]
        samples: usize,
    },
    Kfunc {
        #[serde(default = "q_one")]
        q: f64,
        /// t values as fractions of the total mass.
        #[serde(default = "t_fractions")]
        t_fractions: Vec<f64>,
        #[serde(default = "three_usize")]
        samples: usize,
        #[serde(default = "k_bound")]
        bound: f64,
    },
    Rh {
        #[serde(default)]
        center: Option<usize>,
        #[serde(default = "one_usize")]
        radius: usize,
        #[serde(default = "p_rh")]
        p: f64,
        #[serde(default = "twenty")]
        samples: usize,
    },
    Pi {
        #[serde(default = "p_two")]
        p: f64,
        #[serde(default = "hundred")]
        samples: usize,
    },
    Gaffney {
        /// (centre, radius) pairs; defaults to the central vertex at radius 2.
        #[serde(default)]
        balls: Option<Vec<(usize, usize)>>,
        #[serde(default = "i_max")]
        i_max: u32,
        #[serde(default = "l_grid")]
        l_grid: Vec<u32>,
        #[serde(default = "twenty")]
        samples: usize,
        #[serde(default = "c_grid")]
        c_grid: Vec<f64>,
    },
    CoeffEstim {
        #[serde(default = "one_usize")]
        n: usize,
        #[serde(default = "one_usize")]
        k: usize,
        #[serde(default = "estim_len")]
        len: usize,
    },
    CoeffAlpha {
        #[serde(default = "one_usize")]
        n: usize,
        #[serde(default = "one_usize")]
        k: usize,
        #[serde(default = "alpha_c")]
        c: f64,
        #[serde(default = "j_max")]
        j_max: u32,
    },
    Wallis {
        #[serde(default = "l_max")]
        l_max: usize,
        #[serde(default = "quad_points")]
        quad_points: usize,
    },
    Spectrum {},
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelParams {
    #[serde(default = "k_grid")]
    pub k_grid: Vec<u32>,
    #[serde(default = "c_grid")]
    pub c_grid: Vec<f64>,
    #[serde(default = "cap")]
    pub cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RieszParams {
    #[serde(default = "p_two")]
    pub p: f64,
    /// Defaults to exact at p = 2 and ascent otherwise.
    #[serde(default)]
    pub strategy: Option<StrategyName>,
    #[serde(default = "restarts")]
    pub restarts: usize,
    #[serde(default = "steps")]
    pub steps: usize,
}

/// Every check name the runner accepts.
pub const CHECK_NAMES: [&str; 22] = [
    "D",
    "DELTA_ALPHA",
    "DUE",
    "UE",
    "LUE",
    "TIMEDERIV",
    "P2",
    "PQ",
    "GP",
    "RP",
    "RRP",
    "DUALITY",
    "GFUNC",
    "CZ",
    "KFUNC",
    "RH",
    "PI",
    "GAFFNEY",
    "COEFF_ESTIM",
    "COEFF_ALPHA",
    "WALLIS",
    "SPECTRUM",
];

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::D { .. } => "D",
            Check::DeltaAlpha { .. } => "DELTA_ALPHA",
            Check::Due(_) => "DUE",
            Check::Ue(_) => "UE",
            Check::Lue(_) => "LUE",
            Check::Timederiv(_) => "TIMEDERIV",
            Check::P2 { .. } => "P2",
            Check::Pq { .. } => "PQ",
            Check::Gp { .. } => "GP",
            Check::Rp(_) => "RP",
            Check::Rrp(_) => "RRP",
            Check::Duality { .. } => "DUALITY",
            Check::Gfunc { .. } => "GFUNC",
            Check::Cz { .. } => "CZ",
            Check::Kfunc { .. } => "KFUNC",
            Check::Rh { .. } => "RH",
            Check::Pi { .. } => "PI",
            Check::Gaffney { .. } => "GAFFNEY",
            Check::CoeffEstim { .. } => "COEFF_ESTIM",
            Check::CoeffAlpha { .. } => "COEFF_ALPHA",
            Check::Wallis { .. } => "WALLIS",
            Check::Spectrum {} => "SPECTRUM",
        }
    }

    /// The check with every parameter at its default.
    pub fn default_for(name: &str) -> Result<Check, CliError> {
        let upper = name.trim().to_ascii_uppercase();
        serde_json::from_value(serde_json::json!({ "check": upper }))
            .map_err(|_| CliError::Usage(format!("unknown check `{name}`; expected one of {}", CHECK_NAMES.join(", "))))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn read(path: &Path) -> Result<ExperimentConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn tolerance(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_suite() {
        let cfg = ExperimentConfig::parse(
            r#"{"graph": {"generator": "grid", "dim": 2, "side": 4},
                "suite": [{"check": "RP", "p": 2.0}, {"check": "DUE", "k_grid": [1, 2]}, {"check": "SPECTRUM"}],
                "seed": 5}"#,
        )
        .unwrap();
        assert_eq!(cfg.suite.len(), 3);
        assert_eq!(cfg.suite[0].name(), "RP");
        assert!(matches!(&cfg.suite[1], Check::Due(k) if k.k_grid == vec![1, 2] && k.cap == 100.0));
        assert_eq!(cfg.graph, GraphSpec::Generated(Generator::Grid { dim: 2, side: 4, laziness: 1.0 }));
    }

    #[test]
    fn rejects_unknown_checks_and_fields() {
        let base = r#"{"graph": {"generator": "cycle", "n": 4, "self": 2}, "suite": [SUITE]}"#;
        assert!(ExperimentConfig::parse(&base.replace("SUITE", r#"{"check": "RP"}"#)).is_ok());
        assert!(ExperimentConfig::parse(&base.replace("SUITE", r#"{"check": "NOPE"}"#)).is_err());
        assert!(ExperimentConfig::parse(&base.replace("SUITE", r#"{"check": "RP", "q": 3}"#)).is_err());
        assert!(ExperimentConfig::parse(r#"{"graph": {"file": "g.json"}, "suite": [], "extra": 1}"#).is_err());
    }

    #[test]
    fn every_name_has_defaults() {
        for name in CHECK_NAMES {
            assert_eq!(Check::default_for(name).unwrap().name(), name);
        }
        assert!(Check::default_for("spectrum").is_ok());
        assert!(Check::default_for("XYZ").is_err());
    }
}
