//! Scenario files: `key = value` lines, `#` comments, and `[section]`
//! headers that prefix the keys below them (`[potential]` followed by
//! `kind = quartic` is the same as `potential.kind = quartic`).
//!
//! [`ScenarioConfig::to_text`] writes the canonical form (every resolved key,
//! sorted); the manifest hash is taken over that text.

use crate::error::ConfigError;
use gammalab_core::potential::{make_asymmetric, make_degenerate, make_quartic, make_skewed};
use gammalab_core::Potential;
use gammalab_dynamics::{Flow, Geometry};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Stage {
    Constants,
    Profile,
    Iso,
    Weight,
    Minimize1d,
    Predict,
    Dynamics,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Constants,
        Stage::Profile,
        Stage::Iso,
        Stage::Weight,
        Stage::Minimize1d,
        Stage::Predict,
        Stage::Dynamics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Constants => "constants",
            Stage::Profile => "profile",
            Stage::Iso => "iso",
            Stage::Weight => "weight",
            Stage::Minimize1d => "minimize1d",
            Stage::Predict => "predict",
            Stage::Dynamics => "dynamics",
        }
    }

    /// Stages whose records this one reads.
    pub fn requires(self) -> &'static [Stage] {
        match self {
            Stage::Constants | Stage::Iso => &[],
            Stage::Profile | Stage::Dynamics => &[Stage::Constants],
            Stage::Weight => &[Stage::Iso],
            Stage::Minimize1d => &[Stage::Constants, Stage::Weight],
            Stage::Predict => &[Stage::Constants, Stage::Iso],
        }
    }

    /// `self` and everything it needs, in pipeline order.
    pub fn closure(self) -> Vec<Stage> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            for &r in out[i].requires() {
                if !out.contains(&r) {
                    out.push(r);
                }
            }
            i += 1;
        }
        out.sort();
        out
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown stage {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PotentialSpec {
    Quartic,
    Asymmetric { beta: f64 },
    Skewed { beta: f64 },
    Degenerate { q: f64 },
}

impl PotentialSpec {
    pub fn build(&self) -> gammalab_core::Result<Potential> {
        match *self {
            PotentialSpec::Quartic => Ok(make_quartic()),
            PotentialSpec::Asymmetric { beta } => make_asymmetric(beta),
            PotentialSpec::Skewed { beta } => make_skewed(beta),
            PotentialSpec::Degenerate { q } => make_degenerate(q),
        }
    }
}

/// Source of the isoperimetric data `(P, 𝓘'±)` at the anchor volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DomainSpec {
    /// `𝓘 ≡ level`: flat interfaces.
    Flat { level: f64, vm: f64 },
    /// Differentiable profile with value `perimeter` and slope `(n − 1)κ`.
    Smooth { perimeter: f64, kappa: f64, n: u32, vm: f64 },
    /// The rectangle `[0, w] × [0, 1/w]` through its competitor families.
    Rectangle { width: f64, vm: f64 },
}

impl DomainSpec {
    pub fn vm(&self) -> f64 {
        match *self {
            DomainSpec::Flat { vm, .. } | DomainSpec::Smooth { vm, .. } | DomainSpec::Rectangle { vm, .. } => vm,
        }
    }
}

/// Reference set `E₀` of the dynamics runs, by its defining size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ShapeSpec {
    /// Centred disk of the given area.
    Disk { area: f64 },
    Strip { width: f64 },
}

impl ShapeSpec {
    pub fn geometry(&self) -> Geometry {
        match *self {
            ShapeSpec::Disk { area } => Geometry::centred_disk(area),
            ShapeSpec::Strip { width } => Geometry::Strip { width },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsSpec {
    pub flow: Flow,
    pub shape: ShapeSpec,
    pub eps: Vec<f64>,
    pub horizon_m: f64,
    pub cells_per_eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub potential: PotentialSpec,
    pub domain: Option<DomainSpec>,
    /// ε-ladder of the weighted minimization.
    pub eps: Vec<f64>,
    pub output: PathBuf,
    pub seed: u64,
    pub stages: Vec<Stage>,
    pub dynamics: Option<DynamicsSpec>,
}

pub const BUILTINS: [(&str, &str); 4] = [
    (
        "flat",
        "scenario = flat
stages = constants, profile, iso, weight, minimize1d, predict
[potential]
kind = quartic
[domain]
kind = flat
level = 1
vm = 0.5
[ladder]
eps = 0.04, 0.02, 0.01, 0.00390625
",
    ),
    (
        "smooth",
        "scenario = smooth
stages = constants, profile, iso, weight, minimize1d, predict
[potential]
kind = quartic
[domain]
kind = smooth
perimeter = 1
kappa = 1
n = 2
vm = 0.5
[ladder]
eps = 0.04, 0.02, 0.01, 0.005
",
    ),
    (
        "rect-crossover",
        "scenario = rect-crossover
stages = constants, iso, weight, minimize1d, predict
[potential]
kind = quartic
[domain]
kind = rectangle
width = 1
[ladder]
eps = 0.04, 0.02, 0.01, 0.005
",
    ),
    (
        "slow-motion",
        "scenario = slow-motion
stages = constants, dynamics
[potential]
kind = quartic
[dynamics]
flow = allen-cahn
geometry = disk
size = 0.2
eps = 0.16, 0.08
horizon = 1
",
    ),
];

pub fn builtin(name: &str) -> Result<ScenarioConfig, ConfigError> {
    let names: Vec<&str> = BUILTINS.iter().map(|b| b.0).collect();
    let text = BUILTINS
        .iter()
        .find(|b| b.0 == name)
        .map(|b| b.1)
        .ok_or_else(|| ConfigError::UnknownScenario(name.into(), names.join(", ")))?;
    ScenarioConfig::parse(text)
}

struct Raw(BTreeMap<String, String>);

impl Raw {
    fn take(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    fn need(&mut self, key: &str) -> Result<String, ConfigError> {
        self.take(key).ok_or_else(|| ConfigError::MissingKey(key.into()))
    }

    fn num<T: FromStr>(&mut self, key: &str, default: Option<T>) -> Result<T, ConfigError> {
        match (self.take(key), default) {
            (Some(v), _) => v.parse().map_err(|_| invalid(key, &v, "not a number")),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(ConfigError::MissingKey(key.into())),
        }
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.take(key) else { return Ok(None) };
        let xs = v
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| invalid(key, &v, "expected a comma-separated list of numbers"))?;
        if xs.is_empty() || xs.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(invalid(key, &v, "values must be positive"));
        }
        Ok(Some(xs))
    }
}

fn invalid(key: &str, value: &str, reason: &str) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        value: value.into(),
        reason: reason.into(),
    }
}

fn lex(text: &str) -> Result<Raw, ConfigError> {
    let mut map = BTreeMap::new();
    let mut section = String::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax { line: i + 1, text: line.into() });
        };
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1, text: line.into() });
        }
        let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(ConfigError::Duplicate(key));
        }
    }
    Ok(Raw(map))
}

fn list_text(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = lex(text)?;
        let name = raw.take("scenario").unwrap_or_else(|| "custom".into());
        let seed = raw.num("seed", Some(0u64))?;
        let output = raw
            .take("output.dir")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out").join(&name));
        let stages = match raw.take("stages") {
            Some(v) => {
                let mut st = Vec::new();
                for s in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let stage: Stage = s.parse().map_err(|e: String| invalid("stages", &v, &e))?;
                    if st.contains(&stage) {
                        return Err(invalid("stages", &v, "stage listed twice"));
                    }
                    st.push(stage);
                }
                st.sort();
                st
            }
            None => Stage::ALL[..6].to_vec(),
        };

        let kind = raw.need("potential.kind")?;
        let potential = match kind.as_str() {
            "quartic" => PotentialSpec::Quartic,
            "asymmetric" => PotentialSpec::Asymmetric { beta: raw.num("potential.beta", None)? },
            "skewed" => PotentialSpec::Skewed { beta: raw.num("potential.beta", None)? },
            "degenerate" => PotentialSpec::Degenerate { q: raw.num("potential.q", None)? },
            _ => return Err(invalid("potential.kind", &kind, "expected quartic, asymmetric, skewed or degenerate")),
        };

        let domain = match raw.take("domain.kind") {
            None => None,
            Some(kind) => Some(match kind.as_str() {
                "flat" => DomainSpec::Flat {
                    level: raw.num("domain.level", Some(1.0))?,
                    vm: raw.num("domain.vm", Some(0.5))?,
                },
                "smooth" => DomainSpec::Smooth {
                    perimeter: raw.num("domain.perimeter", None)?,
                    kappa: raw.num("domain.kappa", None)?,
                    n: raw.num("domain.n", Some(2))?,
                    vm: raw.num("domain.vm", Some(0.5))?,
                },
                "rectangle" => {
                    let width: f64 = raw.num("domain.width", Some(1.0))?;
                    if !(width > 0.0 && width.is_finite()) {
                        return Err(invalid("domain.width", &width.to_string(), "must be positive"));
                    }
                    // Default: where the corner quarter disk and the cut across
                    // the short side have the same length.
                    let short = width.min(1.0 / width);
                    DomainSpec::Rectangle {
                        width,
                        vm: raw.num("domain.vm", Some(short * short / PI))?,
                    }
                }
                _ => return Err(invalid("domain.kind", &kind, "expected flat, smooth or rectangle")),
            }),
        };
        if let Some(d) = &domain {
            let vm = d.vm();
            if !(vm > 0.0 && vm < 1.0) {
                return Err(invalid("domain.vm", &vm.to_string(), "must lie in (0, 1)"));
            }
        }
        let eps = raw.list("ladder.eps")?.unwrap_or_default();

        let dynamics = match raw.take("dynamics.flow") {
            None => None,
            Some(flow) => {
                let flow = match flow.as_str() {
                    "allen-cahn" | "ac" => Flow::AllenCahn,
                    "cahn-hilliard" | "ch" => Flow::CahnHilliard,
                    _ => return Err(invalid("dynamics.flow", &flow, "expected allen-cahn or cahn-hilliard")),
                };
                let shape = raw.need("dynamics.geometry")?;
                let size: f64 = raw.num("dynamics.size", None)?;
                if !(size > 0.0 && size < 1.0) {
                    return Err(invalid("dynamics.size", &size.to_string(), "must lie in (0, 1)"));
                }
                let shape = match shape.as_str() {
                    "disk" => ShapeSpec::Disk { area: size },
                    "strip" => ShapeSpec::Strip { width: size },
                    _ => return Err(invalid("dynamics.geometry", &shape, "expected disk or strip")),
                };
                Some(DynamicsSpec {
                    flow,
                    shape,
                    eps: raw.list("dynamics.eps")?.ok_or_else(|| ConfigError::MissingKey("dynamics.eps".into()))?,
                    horizon_m: raw.num("dynamics.horizon", Some(1.0))?,
                    cells_per_eps: raw.num("dynamics.cells_per_eps", Some(4.0))?,
                })
            }
        };
        if let Some(key) = raw.0.keys().next() {
            return Err(ConfigError::UnknownKey(key.clone()));
        }

        let cfg = Self {
            name,
            potential,
            domain,
            eps,
            output,
            seed,
            stages,
            dynamics,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that every declared stage has its inputs and its block.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let stages = list_stages(&self.stages);
        for &s in &self.stages {
            for r in s.requires() {
                if !self.stages.contains(r) {
                    return Err(invalid("stages", &stages, &format!("stage `{s}` needs `{r}`")));
                }
            }
        }
        let uses_domain = self
            .stages
            .iter()
            .any(|s| matches!(s, Stage::Iso | Stage::Weight | Stage::Minimize1d | Stage::Predict));
        if uses_domain && self.domain.is_none() {
            return Err(ConfigError::MissingKey("domain.kind".into()));
        }
        if self.stages.contains(&Stage::Minimize1d) && self.eps.len() < 3 {
            return Err(if self.eps.is_empty() {
                ConfigError::MissingKey("ladder.eps".into())
            } else {
                invalid("ladder.eps", &list_text(&self.eps), "need at least three values")
            });
        }
        if self.stages.contains(&Stage::Dynamics) && self.dynamics.is_none() {
            return Err(ConfigError::MissingKey("dynamics.flow".into()));
        }
        Ok(())
    }

    /// Canonical text: every resolved key, sorted.
    pub fn to_text(&self) -> String {
        let mut m: BTreeMap<&str, String> = BTreeMap::new();
        m.insert("scenario", self.name.clone());
        m.insert("seed", self.seed.to_string());
        m.insert("output.dir", self.output.display().to_string());
        m.insert("stages", list_stages(&self.stages));
        match self.potential {
            PotentialSpec::Quartic => {
                m.insert("potential.kind", "quartic".into());
            }
            PotentialSpec::Asymmetric { beta } => {
                m.insert("potential.kind", "asymmetric".into());
                m.insert("potential.beta", format!("{beta:?}"));
            }
            PotentialSpec::Skewed { beta } => {
                m.insert("potential.kind", "skewed".into());
                m.insert("potential.beta", format!("{beta:?}"));
            }
            PotentialSpec::Degenerate { q } => {
                m.insert("potential.kind", "degenerate".into());
                m.insert("potential.q", format!("{q:?}"));
            }
        }
        match self.domain {
            None => {}
            Some(DomainSpec::Flat { level, vm }) => {
                m.insert("domain.kind", "flat".into());
                m.insert("domain.level", format!("{level:?}"));
                m.insert("domain.vm", format!("{vm:?}"));
            }
            Some(DomainSpec::Smooth { perimeter, kappa, n, vm }) => {
                m.insert("domain.kind", "smooth".into());
                m.insert("domain.perimeter", format!("{perimeter:?}"));
                m.insert("domain.kappa", format!("{kappa:?}"));
                m.insert("domain.n", n.to_string());
                m.insert("domain.vm", format!("{vm:?}"));
            }
            Some(DomainSpec::Rectangle { width, vm }) => {
                m.insert("domain.kind", "rectangle".into());
                m.insert("domain.width", format!("{width:?}"));
                m.insert("domain.vm", format!("{vm:?}"));
            }
        }
        if !self.eps.is_empty() {
            m.insert("ladder.eps", list_text(&self.eps));
        }
        if let Some(d) = &self.dynamics {
            let flow = match d.flow {
                Flow::AllenCahn => "allen-cahn",
                Flow::CahnHilliard => "cahn-hilliard",
            };
            m.insert("dynamics.flow", flow.into());
            let (shape, size) = match d.shape {
                ShapeSpec::Disk { area } => ("disk", area),
                ShapeSpec::Strip { width } => ("strip", width),
            };
            m.insert("dynamics.geometry", shape.into());
            m.insert("dynamics.size", format!("{size:?}"));
            m.insert("dynamics.eps", list_text(&d.eps));
            m.insert("dynamics.horizon", format!("{:?}", d.horizon_m));
            m.insert("dynamics.cells_per_eps", format!("{:?}", d.cells_per_eps));
        }
        m.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

fn list_stages(stages: &[Stage]) -> String {
    stages.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
}
