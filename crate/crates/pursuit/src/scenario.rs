//! Scenario files: one `key = value` pair per line, `#` starts a comment.
//! The grammar is documented in `docs/scenario-format.md`.

use std::fmt::Write as _;
use std::path::Path;

use pursuit_core::geom::Vec2;
use pursuit_core::policy::EvaderKind;
use pursuit_core::sim::{ScenarioConfig, TeamKind};
use pursuit_core::tmpc::Mat2;
use thiserror::Error;

/// The five-pursuer start used throughout the experiments.
pub const FIVE_PURSUERS: &str = include_str!("../scenarios/five_pursuers.scenario");

/// Scenarios addressable by name (for instance from a session reset).
pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "five_pursuers" => Some(FIVE_PURSUERS),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: key `{key}`: {message}")]
    Field { line: usize, key: String, message: String },
    #[error("override `{text}`: {message}")]
    Override { text: String, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub config: ScenarioConfig,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut b = Builder::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ScenarioError::Syntax {
                    line,
                    message: format!("expected `key = value`, found `{content}`"),
                });
            };
            let key = key.trim();
            b.set(key, value.trim()).map_err(|message| ScenarioError::Field {
                line,
                key: key.to_string(),
                message,
            })?;
        }
        b.finish()
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut s = Self::parse(&text)?;
        if s.name.is_empty() {
            s.name = path.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        }
        Ok(s)
    }

    /// Applies `key=value` overrides in order, with the same value syntax as
    /// the file.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<(), ScenarioError> {
        let mut b = Builder::from_scenario(self);
        for o in overrides {
            let text = o.as_ref();
            let err = |message: String| ScenarioError::Override {
                text: text.to_string(),
                message,
            };
            let (key, value) = text
                .split_once('=')
                .ok_or_else(|| err("expected key=value".to_string()))?;
            b.set(key.trim(), value.trim()).map_err(err)?;
        }
        *self = b.finish()?;
        Ok(())
    }

    /// Renders the scenario back to the file format. Floats use the shortest
    /// representation that parses back to the same value.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        if !self.name.is_empty() {
            let _ = writeln!(out, "name = {}", self.name);
        }
        let pts: Vec<String> = c.pursuers.iter().map(|p| format!("{:?}, {:?}", p.x, p.y)).collect();
        let _ = writeln!(out, "pursuers = {}", pts.join("; "));
        let _ = writeln!(out, "evader = {:?}, {:?}", c.evader.x, c.evader.y);
        let _ = writeln!(out, "pursuer_speed = {:?}", c.pursuer_speed);
        let _ = writeln!(out, "evader_speed = {:?}", c.evader_speed);
        let _ = writeln!(out, "capture_radius = {:?}", c.capture_radius);
        let _ = writeln!(out, "partitions = {}", c.partitions);
        let _ = writeln!(out, "horizon = {}", c.horizon);
        for (key, m) in [("q", &c.weights.q), ("r", &c.weights.r), ("p", &c.weights.p)] {
            let _ = writeln!(out, "{key} = {:?}, {:?}, {:?}, {:?}", m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        }
        let _ = writeln!(out, "max_steps = {}", c.max_steps);
        let _ = writeln!(out, "seed = {}", c.seed);
        let _ = writeln!(out, "policy = {}", team_name(c.team));
        let _ = writeln!(out, "evader_policy = {}", evader_name(c.evader_policy));
        let _ = writeln!(out, "virtual_margin = {:?}", c.virtual_margin);
        let _ = writeln!(out, "partition_eps = {:?}", c.partition_eps);
        out
    }
}

pub fn parse_team(s: &str) -> Result<TeamKind, String> {
    match s {
        "tmpc" => Ok(TeamKind::Tmpc),
        "voronoi" => Ok(TeamKind::VoronoiCentroid),
        "direct_charge" => Ok(TeamKind::DirectCharge),
        "stationary" => Ok(TeamKind::Stationary),
        _ => Err(format!(
            "unknown pursuer policy `{s}` (expected tmpc, voronoi, direct_charge or stationary)"
        )),
    }
}

pub fn team_name(t: TeamKind) -> &'static str {
    match t {
        TeamKind::Tmpc => "tmpc",
        TeamKind::VoronoiCentroid => "voronoi",
        TeamKind::DirectCharge => "direct_charge",
        TeamKind::Stationary => "stationary",
    }
}

pub fn parse_evader(s: &str) -> Result<EvaderKind, String> {
    match s {
        "static" => Ok(EvaderKind::Static),
        "random" => Ok(EvaderKind::RandomInW),
        "flee_nearest" => Ok(EvaderKind::FleeNearest),
        "boundary_seek" => Ok(EvaderKind::BoundarySeek),
        "worst_vertex" => Ok(EvaderKind::WorstVertex),
        "external" => Ok(EvaderKind::External),
        _ => Err(format!(
            "unknown evader policy `{s}` (expected static, random, flee_nearest, boundary_seek, worst_vertex or external)"
        )),
    }
}

pub fn evader_name(e: EvaderKind) -> &'static str {
    match e {
        EvaderKind::Static => "static",
        EvaderKind::RandomInW => "random",
        EvaderKind::FleeNearest => "flee_nearest",
        EvaderKind::BoundarySeek => "boundary_seek",
        EvaderKind::WorstVertex => "worst_vertex",
        EvaderKind::External => "external",
    }
}

#[derive(Default)]
struct Builder {
    name: String,
    pursuers: Option<Vec<Vec2>>,
    config: ScenarioConfig,
}

impl Builder {
    fn from_scenario(s: &Scenario) -> Self {
        Self {
            name: s.name.clone(),
            pursuers: Some(s.config.pursuers.clone()),
            config: s.config.clone(),
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let c = &mut self.config;
        match key {
            "name" => self.name = value.to_string(),
            "pursuers" => self.pursuers = Some(parse_points(value)?),
            "pursuer" => self.pursuers.get_or_insert_with(Vec::new).push(parse_point(value)?),
            "evader" => c.evader = parse_point(value)?,
            "pursuer_speed" => c.pursuer_speed = parse_real(value)?,
            "evader_speed" => c.evader_speed = parse_real(value)?,
            "capture_radius" => c.capture_radius = parse_real(value)?,
            "partitions" => c.partitions = parse_int(value)?,
            "horizon" => c.horizon = parse_int(value)?,
            "q" => c.weights.q = parse_matrix(value)?,
            "r" => c.weights.r = parse_matrix(value)?,
            "p" => c.weights.p = parse_matrix(value)?,
            "max_steps" => c.max_steps = parse_int(value)?,
            "seed" => c.seed = value.parse().map_err(|_| format!("`{value}` is not a non-negative integer"))?,
            "policy" => c.team = parse_team(value)?,
            "evader_policy" => c.evader_policy = parse_evader(value)?,
            "virtual_margin" => c.virtual_margin = parse_real(value)?,
            "partition_eps" => c.partition_eps = parse_real(value)?,
            _ => return Err("unknown key".to_string()),
        }
        Ok(())
    }

    fn finish(self) -> Result<Scenario, ScenarioError> {
        let mut config = self.config;
        config.pursuers = self.pursuers.ok_or(ScenarioError::Missing("pursuers"))?;
        Ok(Scenario { name: self.name, config })
    }
}

fn parse_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{}` is not a number", s.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{}` is not finite", s.trim()))
    }
}

fn parse_int(s: &str) -> Result<usize, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{}` is not a non-negative integer", s.trim()))
}

fn parse_point(s: &str) -> Result<Vec2, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `x, y`, found `{}`", s.trim()));
    }
    Ok(Vec2::new(parse_real(parts[0])?, parse_real(parts[1])?))
}

fn parse_points(s: &str) -> Result<Vec<Vec2>, String> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(parse_point).collect()
}

/// Either a scalar multiple of the identity or four row-major entries.
fn parse_matrix(s: &str) -> Result<Mat2, String> {
    let vals = s.split(',').map(parse_real).collect::<Result<Vec<f64>, String>>()?;
    match vals[..] {
        [k] => Ok(Mat2::identity() * k),
        [a, b, c, d] => Ok(Mat2::new(a, b, c, d)),
        _ => Err(format!("expected 1 or 4 entries, found {}", vals.len())),
    }
}
