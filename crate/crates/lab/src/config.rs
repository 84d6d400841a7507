//! Key-value config files (TOML syntax).
//!
//! ```toml
//! [params]            # drive parameters, units of g
//! n_atoms = 2
//! g = 1.0             # uniform coupling ...
//! omega = 1.05        # ... and drive
//! # couplings = [[1.0, 0.0], [0.9, 0.1]]   per-atom [re, im], replaces g
//! # drives = [[1.05, 0.0], [1.05, 0.0]]    per-atom [re, im], replaces omega
//! delta1 = 20.0
//! delta2 = 21.0
//!
//! [physical]
//! g_hz = 1.8e8        # physical g (angular, 1/s)
//! t_c = 7.6e-7        # cavity photon lifetime (s)
//! t_r = 7.6e-7        # excited-state relaxation time (s)
//! # t_d = 1e-2        # motional decoherence time (s), instead of t_c/t_r
//!
//! [plan]
//! name = "fused"
//! n_qubits = 7
//! steps = ["entangle 0 1 2", "lc 1", "cz 2 3"]
//! target = "path 7"   # or target_edges = [[0, 1], [1, 2]]
//! description = "free text"
//!
//! [sweep]
//! param = "delta-scale"        # delta-scale | omega | n-max | t
//! values = [1, 2, 4]           # or range = "0:gate:17"
//! metric = "phase-deviation"   # fidelity | leakage | phase-deviation | phase
//! ```

use std::path::Path;

use dispersive_core::graphs::{families, FusionPlan, Graph, PlanStep};
use dispersive_core::model::DriveParams;
use dispersive_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_atoms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drives: Option<Vec<[f64; 2]>>,
    pub delta1: f64,
    pub delta2: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_d: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    #[serde(default)]
    pub name: Option<String>,
    pub n_qubits: usize,
    pub steps: Vec<String>,
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default)]
    pub target_edges: Option<Vec<[usize; 2]>>,
    #[serde(default)]
    pub description: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub param: Option<String>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub range: Option<String>,
    #[serde(default)]
    pub metric: Option<String>,
}

impl Config {
    pub fn parse(text: &str) -> LabResult<Self> {
        toml::from_str(text).map_err(|e| LabError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config sections always serialize")
    }
}

impl ParamsSection {
    pub fn from_drive_params(p: &DriveParams) -> Self {
        let pairs = |v: &[C64]| v.iter().map(|c| [c.re, c.im]).collect();
        match p.uniform_values() {
            Some((g, omega)) => Self {
                n_atoms: Some(p.n_atoms()),
                g: Some(g),
                omega: Some(omega),
                delta1: p.delta1(),
                delta2: p.delta2(),
                ..Self::default()
            },
            None => Self {
                couplings: Some(pairs(p.couplings())),
                drives: Some(pairs(p.drives())),
                delta1: p.delta1(),
                delta2: p.delta2(),
                ..Self::default()
            },
        }
    }

    pub fn to_drive_params(&self) -> LabResult<DriveParams> {
        let usage = |m: &str| LabError::Usage(format!("[params] {m}"));
        let complex = |v: &Vec<[f64; 2]>| v.iter().map(|p| C64::new(p[0], p[1])).collect::<Vec<_>>();
        let per_atom = self.couplings.is_some() || self.drives.is_some();
        let n = match (self.n_atoms, &self.couplings, &self.drives) {
            (Some(n), _, _) => n,
            (None, Some(c), _) => c.len(),
            (None, None, Some(d)) => d.len(),
            (None, None, None) => 2,
        };
        if n == 0 {
            return Err(usage("n_atoms must be at least 1"));
        }
        let couplings = match (&self.couplings, self.g) {
            (Some(_), Some(_)) => return Err(usage("give either g or couplings, not both")),
            (Some(c), None) => complex(c),
            (None, g) => vec![C64::new(g.unwrap_or(1.0), 0.0); n],
        };
        let drives = match (&self.drives, self.omega) {
            (Some(_), Some(_)) => return Err(usage("give either omega or drives, not both")),
            (Some(d), None) => complex(d),
            (None, Some(w)) => vec![C64::new(w, 0.0); n],
            (None, None) => return Err(usage("omega (or drives) is required")),
        };
        if per_atom && (couplings.len() != n || drives.len() != n) {
            return Err(usage("per-atom lists must have n_atoms entries"));
        }
        let all = couplings.iter().chain(&drives);
        if all.clone().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(usage("couplings and drives must be finite"));
        }
        Ok(DriveParams::new(couplings, drives, self.delta1, self.delta2)?)
    }
}

impl PlanSection {
    pub fn to_plan(&self) -> LabResult<FusionPlan> {
        let n = self.n_qubits;
        let steps = self
            .steps
            .iter()
            .map(|s| parse_step(s))
            .collect::<LabResult<Vec<_>>>()?;
        let target = match (&self.target, &self.target_edges) {
            (Some(_), Some(_)) => {
                return Err(LabError::Usage("[plan] give target or target_edges, not both".into()))
            }
            (Some(spec), None) => parse_family(spec)?,
            (None, Some(edges)) => {
                let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e[0], e[1])).collect();
                Graph::from_edges(n, &pairs)?
            }
            (None, None) => return Err(LabError::Usage("[plan] needs a target".into())),
        };
        let plan = FusionPlan {
            name: self.name.clone().unwrap_or_else(|| "plan".into()),
            n_qubits: n,
            steps,
            target,
            description: self.description.clone().unwrap_or_default(),
            reconstructed: false,
        };
        plan.validate().map_err(|e| LabError::Usage(format!("[plan] {e}")))?;
        Ok(plan)
    }
}

/// `entangle 0 1 2`, `cz 2 3` or `lc 4`.
pub fn parse_step(text: &str) -> LabResult<PlanStep> {
    let bad = || LabError::Usage(format!("cannot parse plan step '{text}'"));
    let mut words = text.split_whitespace();
    let op = words.next().ok_or_else(bad)?;
    let args = words
        .map(|w| w.parse::<usize>().map_err(|_| bad()))
        .collect::<LabResult<Vec<_>>>()?;
    match (op, args.as_slice()) {
        ("entangle", [_, _, ..]) => Ok(PlanStep::Entangle(args)),
        ("cz", [a, b]) => Ok(PlanStep::Cz(*a, *b)),
        ("lc", [v]) => Ok(PlanStep::LocalComplement(*v)),
        _ => Err(bad()),
    }
}

/// `path N`, `cycle N`, `complete N`, `star N`, `grid W H`,
/// `grid3d X Y Z`, `h_shape` or `box4`.
pub fn parse_family(text: &str) -> LabResult<Graph> {
    let bad = || LabError::Usage(format!("unknown graph family '{text}'"));
    let mut words = text.split_whitespace();
    let name = words.next().ok_or_else(bad)?;
    let args = words
        .map(|w| w.parse::<usize>().map_err(|_| bad()))
        .collect::<LabResult<Vec<_>>>()?;
    let g = match (name, args.as_slice()) {
        ("path", [n]) => families::path(*n)?,
        ("cycle", [n]) => families::cycle(*n)?,
        ("complete", [n]) => families::complete(*n)?,
        ("star", [n]) => families::star(*n)?,
        ("grid", [w, h]) => families::grid(*w, *h)?,
        ("grid3d", [x, y, z]) => families::grid3d(*x, *y, *z)?,
        ("h_shape", []) => families::h_shape(),
        ("box4", []) => families::box4(),
        _ => return Err(bad()),
    };
    Ok(g)
}
