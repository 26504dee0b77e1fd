//! Run configuration: a JSON file naming or embedding a system plus command
//! parameters. Command-line flags override file values.

use std::fs;
use std::path::{Path, PathBuf};

use hutchinson_core::hyperspace::PruneMode;
use hutchinson_core::jsonpos::line_of;
use hutchinson_core::systems::{presets, SystemSpec};
use hutchinson_core::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

/// Where the probe modulus is measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CenterSpec {
    /// `"attractor"` (solved first) or `"seed"` (the starting set).
    Named(String),
    Points(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Preset name, path or inline spec; resolved into [`RunConfig::system`].
    #[serde(skip_serializing)]
    system: Option<Box<RawValue>>,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    /// Defaults to `tol / 10` for the solver. Probes run unpruned unless an
    /// image would exceed the point cap.
    pub prune_eps: Option<f64>,
    pub prune_mode: PruneMode,
    /// Starting set; defaults to the origin (`[1:1:1]` on the projective plane).
    pub initial: Option<Vec<Vec<f64>>>,
    pub delta_grid: Vec<f64>,
    pub samples_per_delta: usize,
    pub pairs: usize,
    pub points: usize,
    pub usc_eps: f64,
    pub center: CenterSpec,
    /// A solved attractor used as probe center is thinned to at most this
    /// many points.
    pub center_max_points: usize,
    pub x0: Option<Vec<f64>>,
    pub net_radius: Option<f64>,
    pub out: PathBuf,
    pub render: bool,
    pub width: usize,
    pub height: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            system: None,
            seed: 0,
            tol: 1e-3,
            max_iter: 200,
            prune_eps: None,
            prune_mode: PruneMode::Greedy,
            initial: None,
            delta_grid: (0..7).map(|k| 0.1 * 0.5f64.powi(k)).collect(),
            samples_per_delta: 64,
            pairs: 10_000,
            points: 100,
            usc_eps: 0.1,
            center: CenterSpec::Named("attractor".into()),
            center_max_points: 2000,
            x0: None,
            net_radius: None,
            out: PathBuf::from("out"),
            render: true,
            width: 512,
            height: 512,
        }
    }
}

/// Fully resolved configuration, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub system: SystemSpec,
    #[serde(flatten)]
    pub params: Params,
}

/// Flag overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub system: Option<String>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub prune_eps: Option<f64>,
    pub out: Option<PathBuf>,
    pub max_iter: Option<usize>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))
}

/// A preset name or a path to a system JSON file.
fn named_system(name: &str, base: Option<&Path>) -> Result<SystemSpec> {
    if let Some(s) = presets::by_name(name) {
        return Ok(s);
    }
    let p = Path::new(name);
    let p = match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    };
    if !p.exists() {
        return Err(Error::invalid(format!(
            "unknown system {name:?}: not a preset ({}) and not a file",
            presets::NAMES.join(", ")
        )));
    }
    let text = read(&p)?;
    SystemSpec::from_json(&text).map_err(|e| match e {
        Error::Parse(p2) => Error::invalid(format!("{}: line {}: {}", p.display(), p2.line, p2.message)),
        e => e,
    })
}

fn check_params(p: &Params) -> std::result::Result<(), (&'static str, String)> {
    if !(p.tol > 0.0) || !p.tol.is_finite() {
        return Err(("tol", "must be a positive number".into()));
    }
    if let Some(e) = p.prune_eps {
        if !(e >= 0.0) || !e.is_finite() {
            return Err(("prune_eps", "must be >= 0".into()));
        }
    }
    if p.delta_grid.is_empty()
        || p.delta_grid.iter().any(|d| !(*d > 0.0) || !d.is_finite())
        || p.delta_grid.windows(2).any(|w| !(w[0] > w[1]))
    {
        return Err(("delta_grid", "must be nonempty, positive and strictly decreasing".into()));
    }
    if p.samples_per_delta == 0 {
        return Err(("samples_per_delta", "must be at least 1".into()));
    }
    if p.center_max_points == 0 {
        return Err(("center_max_points", "must be at least 1".into()));
    }
    if p.pairs == 0 {
        return Err(("pairs", "must be at least 1".into()));
    }
    if !(p.usc_eps > 0.0) {
        return Err(("usc_eps", "must be positive".into()));
    }
    if p.width == 0 || p.height == 0 || p.width > 16384 || p.height > 16384 {
        return Err(("width", "image size must be within 1..=16384".into()));
    }
    if let CenterSpec::Named(n) = &p.center {
        if n != "attractor" && n != "seed" {
            return Err(("center", "must be \"attractor\", \"seed\" or a list of points".into()));
        }
    }
    Ok(())
}

impl RunConfig {
    /// Loads `path` (if any) and applies the overrides. Every failure is a
    /// configuration error; JSON problems carry the line number.
    pub fn load(path: Option<&Path>, o: &Overrides) -> Result<RunConfig> {
        let (mut params, mut system, text) = match path {
            None => (Params::default(), None, None),
            Some(path) => {
                let text = read(path)?;
                let mut raw: Params = serde_json::from_str(&text)
                    .map_err(|e| Error::parse(e.line().max(1), e.to_string()))?;
                let base = path.parent();
                let system = match raw.system.take() {
                    None => None,
                    Some(v) => {
                        let offset = line_of(&text, "system") - 1;
                        if v.get().trim_start().starts_with('"') {
                            let name: String = serde_json::from_str(v.get())
                                .map_err(|e| Error::parse(offset + 1, e.to_string()))?;
                            Some(named_system(&name, base).map_err(|e| {
                                Error::parse(offset + 1, format!("system: {e}"))
                            })?)
                        } else {
                            Some(SystemSpec::from_json(v.get()).map_err(|e| match e {
                                Error::Parse(p) => {
                                    Error::parse(p.line + offset, format!("system: {}", p.message))
                                }
                                e => e,
                            })?)
                        }
                    }
                };
                check_params(&raw).map_err(|(key, msg)| {
                    Error::parse(line_of(&text, key), format!("{key}: {msg}"))
                })?;
                (raw, system, Some(text))
            }
        };
        if let Some(s) = &o.system {
            system = Some(named_system(s, None)?);
        }
        let system = system.ok_or_else(|| {
            Error::invalid("no system given: set \"system\" in the config or pass --system")
        })?;
        if let Some(v) = o.seed {
            params.seed = v;
        }
        if let Some(v) = o.tol {
            params.tol = v;
        }
        if let Some(v) = o.prune_eps {
            params.prune_eps = Some(v);
        }
        if let Some(v) = &o.out {
            params.out = v.clone();
        }
        if let Some(v) = o.max_iter {
            params.max_iter = v;
        }
        if text.is_none() || o.tol.is_some() || o.prune_eps.is_some() {
            check_params(&params)
                .map_err(|(key, msg)| Error::invalid(format!("{key}: {msg}")))?;
        }
        Ok(RunConfig { system, params })
    }

    /// Solver pruning radius.
    pub fn solver_prune_eps(&self) -> f64 {
        self.params.prune_eps.unwrap_or(self.params.tol / 10.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(text: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    fn parse_line(text: &str) -> usize {
        match RunConfig::load(Some(write(text).path()), &Overrides::default()) {
            Err(Error::Parse(p)) => p.line,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn preset_by_name_with_defaults() {
        let f = write("{\"system\": \"cantor\", \"tol\": 1e-4}");
        let c = RunConfig::load(Some(f.path()), &Overrides::default()).unwrap();
        assert_eq!(c.system.name, "cantor");
        assert_eq!(c.params.tol, 1e-4);
        assert_eq!(c.solver_prune_eps(), 1e-5);
        assert_eq!(c.params.delta_grid.len(), 7);
    }

    #[test]
    fn overrides_win() {
        let f = write("{\"system\": \"cantor\", \"seed\": 3}");
        let o = Overrides {
            seed: Some(9),
            system: Some("sierpinski".into()),
            ..Overrides::default()
        };
        let c = RunConfig::load(Some(f.path()), &o).unwrap();
        assert_eq!(c.params.seed, 9);
        assert_eq!(c.system.name, "sierpinski");
    }

    #[test]
    fn errors_carry_lines() {
        assert_eq!(parse_line("{\n\"system\": \"cantor\",\n\"tol\": -1\n}"), 3);
        assert_eq!(parse_line("{\n\"system\": \"cantor\",\n\"bogus\": 1\n}"), 3);
        assert_eq!(parse_line("{\n\"system\": \"nope\"\n}"), 2);
        let inline = "{\n  \"seed\": 1,\n  \"system\": {\n    \"name\": \"x\",\n    \"space\": \"euclidean:1\",\n    \"kind\": \"affine\",\n    \"maps\": [{\"matrix\": [[0.5, 1]]}],\n    \"declared_class\": \"contraction\"\n  }\n}";
        assert_eq!(parse_line(inline), 7);
        let unknown = "{\n  \"system\": {\n    \"name\": \"x\",\n    \"extra\": 1\n  }\n}";
        assert_eq!(parse_line(unknown), 4);
        assert_eq!(parse_line("{\"system\": \"cantor\",\n\"delta_grid\": [0.1, 0.2]}"), 2);
    }
}
