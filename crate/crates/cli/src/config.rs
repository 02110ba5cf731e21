//! Line-based `key = value` configuration with `[section]` headers.
//!
//! Strict: unknown sections, unknown keys and repeated keys are errors.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use subadd_core::domains::{DenseSubgroup, SigmaSet};
use subadd_core::envelopes::EnvelopeParams;
use subadd_core::funcdsl::{gallery, parse, FunctionExpr, SfnFile};
use subadd_core::num::{self, Rational};
use subadd_core::theorems::CheckParams;
use subadd_core::Basis;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
}

fn syntax(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Syntax {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Text,
    CsvBundle,
}

impl FromStr for Format {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            "csv-bundle" => Ok(Format::CsvBundle),
            other => Err(ConfigError::Invalid(format!(
                "unsupported format `{}` (expected json, text or csv-bundle)",
                other
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Text => "text",
            Format::CsvBundle => "csv-bundle",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FunctionSource {
    Inline(String),
    Gallery(String),
    File(PathBuf),
}

impl FunctionSource {
    /// A `.sfn` path, a gallery name, or an inline expression, in that order.
    pub fn guess(text: &str) -> FunctionSource {
        let t = text.trim();
        if t.ends_with(".sfn") {
            FunctionSource::File(PathBuf::from(t))
        } else if gallery(t).is_ok() {
            FunctionSource::Gallery(t.to_string())
        } else {
            FunctionSource::Inline(t.to_string())
        }
    }
}

#[derive(Clone, Debug)]
pub struct ResolvedFunction {
    pub expr: FunctionExpr,
    /// Name for reports: the gallery name or the printed expression.
    pub label: String,
    pub basis: Option<Arc<Basis>>,
}

impl FunctionSource {
    pub fn resolve(&self, base: &Path) -> Result<ResolvedFunction, ConfigError> {
        match self {
            FunctionSource::Inline(text) => {
                let expr = parse(text).map_err(|e| ConfigError::Invalid(format!("function `{}`: {}", text, e)))?;
                Ok(ResolvedFunction {
                    label: expr.to_string(),
                    expr,
                    basis: None,
                })
            }
            FunctionSource::Gallery(name) => {
                let expr = gallery(name).map_err(ConfigError::Invalid)?;
                Ok(ResolvedFunction {
                    expr,
                    label: name.clone(),
                    basis: None,
                })
            }
            FunctionSource::File(path) => {
                let full = if path.is_relative() { base.join(path) } else { path.clone() };
                let text = std::fs::read_to_string(&full).map_err(|e| ConfigError::Io {
                    path: full.display().to_string(),
                    message: e.to_string(),
                })?;
                let sfn = SfnFile::parse(&text).map_err(|e| ConfigError::Invalid(format!("{}: {}", full.display(), e)))?;
                Ok(ResolvedFunction {
                    label: sfn.expr.to_string(),
                    expr: sfn.expr,
                    basis: sfn.basis,
                })
            }
        }
    }
}

/// Every tunable schedule and tolerance.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Schedules {
    pub checks: CheckParams,
    pub envelope: EnvelopeParams,
}

const SCHEDULE_KEYS: &[&str] = &[
    "t_max",
    "ratio",
    "epsilon",
    "tail_window",
    "divergence_threshold",
    "zero_steps",
    "slack",
    "tol",
    "grid_radius",
    "height",
    "max_points",
    "homogeneity_n",
    "t_samples",
    "t_span",
    "star_n_max",
    "continuity_tol",
    "zero_tol",
    "delta_min_exp",
    "delta_max_exp",
    "height_cap",
    "envelope_points",
    "outer_budget",
    "envelope_tol",
    "snap_tol",
];

fn rational(value: &str) -> Result<Rational, String> {
    num::parse_rational(value).ok_or_else(|| format!("expected a rational number, got `{}`", value))
}

fn positive(value: &str) -> Result<Rational, String> {
    let q = rational(value)?;
    if q <= Rational::default() {
        return Err(format!("expected a positive number, got `{}`", value));
    }
    Ok(q)
}

fn natural<T: FromStr>(value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("expected a natural number, got `{}`", value))
}

impl Schedules {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let c = &mut self.checks;
        let a = &mut c.asymptotic;
        let e = &mut self.envelope;
        match key {
            "t_max" => a.t_max = positive(value)?,
            "ratio" => a.ratio = positive(value)?,
            "epsilon" => a.epsilon = positive(value)?,
            "tail_window" => a.tail_window = natural(value)?,
            "divergence_threshold" => a.divergence_threshold = positive(value)?,
            "zero_steps" => a.zero_steps = natural(value)?,
            "slack" => a.slack = rational(value)?,
            "tol" => c.tol = Some(positive(value)?),
            "grid_radius" => c.grid_radius = positive(value)?,
            "height" => c.grid_height = natural(value)?,
            "max_points" => c.grid_max_points = natural(value)?,
            "homogeneity_n" => c.homogeneity_n = natural(value)?,
            "t_samples" => c.t_samples = natural(value)?,
            "t_span" => c.t_span = positive(value)?,
            "star_n_max" => c.star_n_max = natural(value)?,
            "continuity_tol" => c.continuity_tol = positive(value)?,
            "zero_tol" => c.zero_tol = positive(value)?,
            "delta_min_exp" => e.delta_exponents.0 = natural(value)?,
            "delta_max_exp" => e.delta_exponents.1 = natural(value)?,
            "height_cap" => e.height_cap = natural(value)?,
            "envelope_points" => e.max_points = natural(value)?,
            "outer_budget" => e.outer_budget = natural(value)?,
            "envelope_tol" => e.tol = positive(value)?,
            "snap_tol" => e.snap_tol = positive(value)?,
            _ => return Err(format!("unknown key `{}` in [schedules]", key)),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.checks
            .asymptotic
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let (lo, hi) = self.envelope.delta_exponents;
        if lo == 0 || lo > hi {
            return Err(ConfigError::Invalid(format!(
                "delta exponents must satisfy 0 < min <= max, got {}..{}",
                lo, hi
            )));
        }
        if self.checks.t_samples == 0 || self.checks.star_n_max == 0 {
            return Err(ConfigError::Invalid("t_samples and star_n_max must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct AnalysisConfig {
    /// Basis declaration lines as written; empty for the default `{1, sqrt2}`.
    pub basis_text: String,
    pub function: Option<FunctionSource>,
    pub subgroup: Option<String>,
    pub sigma: Option<String>,
    pub schedules: Schedules,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    /// Stamp reports with the wall-clock time (excluded from the digest).
    pub timestamp: bool,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            basis_text: String::new(),
            function: None,
            subgroup: None,
            sigma: None,
            schedules: Schedules::default(),
            format: None,
            out: None,
            timestamp: false,
            base_dir: PathBuf::from("."),
        }
    }
}

pub const DEFAULT_BASIS: &str = "sqrt2 = sqrt(2)";

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Basis,
    Function,
    Subgroup,
    Sigma,
    Schedules,
    Output,
}

impl AnalysisConfig {
    pub fn load(path: &Path) -> Result<AnalysisConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = AnalysisConfig::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<AnalysisConfig, ConfigError> {
        let mut cfg = AnalysisConfig::default();
        let mut section = None;
        let mut seen: Vec<(&'static str, String)> = Vec::new();
        let mut basis_lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| syntax(line_no, "unterminated section header"))?
                    .trim();
                section = Some(match name {
                    "basis" => Section::Basis,
                    "function" => Section::Function,
                    "subgroup" => Section::Subgroup,
                    "sigma" => Section::Sigma,
                    "schedules" => Section::Schedules,
                    "output" => Section::Output,
                    other => return Err(syntax(line_no, format!("unknown section [{}]", other))),
                });
                continue;
            }
            let sec = section.ok_or_else(|| syntax(line_no, "key outside of any section"))?;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax(line_no, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(syntax(line_no, "empty key or value"));
            }
            let tag = match sec {
                Section::Basis => "basis",
                Section::Function => "function",
                Section::Subgroup => "subgroup",
                Section::Sigma => "sigma",
                Section::Schedules => "schedules",
                Section::Output => "output",
            };
            if seen.iter().any(|(s, k)| *s == tag && k == key) {
                return Err(syntax(line_no, format!("duplicate key `{}` in [{}]", key, tag)));
            }
            seen.push((tag, key.to_string()));
            match sec {
                Section::Basis => basis_lines.push(format!("{} = {}", key, value)),
                Section::Function => {
                    if cfg.function.is_some() {
                        return Err(syntax(line_no, "[function] takes exactly one of expr, gallery, file"));
                    }
                    cfg.function = Some(match key {
                        "expr" => FunctionSource::Inline(value.to_string()),
                        "gallery" => FunctionSource::Gallery(value.to_string()),
                        "file" => FunctionSource::File(PathBuf::from(value)),
                        _ => return Err(syntax(line_no, format!("unknown key `{}` in [function]", key))),
                    });
                }
                Section::Subgroup | Section::Sigma => {
                    if key != "spec" {
                        return Err(syntax(line_no, format!("unknown key `{}` in [{}]", key, tag)));
                    }
                    let slot = if sec == Section::Subgroup {
                        &mut cfg.subgroup
                    } else {
                        &mut cfg.sigma
                    };
                    *slot = Some(value.to_string());
                }
                Section::Schedules => cfg.schedules.set(key, value).map_err(|m| syntax(line_no, m))?,
                Section::Output => match key {
                    "format" => cfg.format = Some(value.parse().map_err(|e: ConfigError| syntax(line_no, e.to_string()))?),
                    "out" => cfg.out = Some(PathBuf::from(value)),
                    "timestamp" => {
                        cfg.timestamp = match value {
                            "true" => true,
                            "false" => false,
                            _ => return Err(syntax(line_no, "timestamp must be true or false")),
                        }
                    }
                    _ => return Err(syntax(line_no, format!("unknown key `{}` in [output]", key))),
                },
            }
        }
        cfg.basis_text = basis_lines.join("\n");
        cfg.schedules.validate()?;
        // resolve what can be resolved without the function
        let basis = cfg.basis()?;
        if let Some(s) = &cfg.subgroup {
            DenseSubgroup::parse(&basis, s).map_err(|e| ConfigError::Invalid(format!("[subgroup] {}", e)))?;
        }
        if let Some(s) = &cfg.sigma {
            SigmaSet::parse(&basis, s).map_err(|e| ConfigError::Invalid(format!("[sigma] {}", e)))?;
        }
        Ok(cfg)
    }

    pub fn basis(&self) -> Result<Arc<Basis>, ConfigError> {
        let text = if self.basis_text.trim().is_empty() {
            DEFAULT_BASIS
        } else {
            &self.basis_text
        };
        Basis::parse(text).map_err(|e| ConfigError::Invalid(format!("[basis] {}", e)))
    }

    pub fn subgroup(&self, basis: &Arc<Basis>) -> Result<Option<DenseSubgroup>, ConfigError> {
        self.subgroup
            .as_ref()
            .map(|s| DenseSubgroup::parse(basis, s).map_err(|e| ConfigError::Invalid(format!("subgroup: {}", e))))
            .transpose()
    }

    pub fn sigma(&self, basis: &Arc<Basis>) -> Result<Option<SigmaSet>, ConfigError> {
        self.sigma
            .as_ref()
            .map(|s| SigmaSet::parse(basis, s).map_err(|e| ConfigError::Invalid(format!("sigma: {}", e))))
            .transpose()
    }

    pub fn schedule_keys() -> &'static [&'static str] {
        SCHEDULE_KEYS
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = "\
# vee on the plane
[basis]
sqrt2 = sqrt(2)
sqrt3 = sqrt(3)

[function]
expr = max(2*t, t)

[subgroup]
spec = Q<1, sqrt2>

[sigma]
spec = dyadic(20)

[schedules]
t_max = 1e4
tol = 1/1000000
height = 4
delta_max_exp = 16

[output]
format = csv-bundle
out = run/out
";

    #[test]
    fn reads_every_section() {
        let c = AnalysisConfig::parse(FULL).unwrap();
        assert_eq!(c.basis().unwrap().len(), 3);
        assert_eq!(c.function, Some(FunctionSource::Inline("max(2*t, t)".into())));
        assert_eq!(c.subgroup.as_deref(), Some("Q<1, sqrt2>"));
        assert_eq!(c.schedules.checks.asymptotic.t_max, num::int(10_000));
        assert_eq!(c.schedules.checks.tol, Some(num::ratio(1, 1_000_000)));
        assert_eq!(c.schedules.checks.grid_height, 4);
        assert_eq!(c.schedules.envelope.delta_exponents, (4, 16));
        assert_eq!(c.format, Some(Format::CsvBundle));
        assert!(c.sigma(&c.basis().unwrap()).unwrap().is_some());
    }

    #[test]
    fn strict_mode() {
        let bad = [
            ("[schedules]\nt_maxx = 3\n", 2),
            ("[plots]\n", 1),
            ("t_max = 3\n", 1),
            ("[schedules]\nheight = 3\nheight = 4\n", 3),
            ("[function]\nexpr = t\ngallery = ABS\n", 3),
            ("[output]\nformat = xml\n", 2),
            ("[schedules]\nratio = -2\n", 2),
            ("[schedules\n", 1),
            ("[subgroup]\ngenerators = 1\n", 2),
        ];
        for (text, line) in bad {
            match AnalysisConfig::parse(text) {
                Err(ConfigError::Syntax { line: l, .. }) => assert_eq!(l, line, "{}", text),
                other => panic!("{:?} for {}", other, text),
            }
        }
        assert!(AnalysisConfig::parse("[subgroup]\nspec = <1, sqrt5>\n").is_err());
        assert!(AnalysisConfig::parse("[schedules]\nratio = 1\n").is_err());
    }

    #[test]
    fn defaults_and_guessing() {
        let c = AnalysisConfig::parse("").unwrap();
        assert_eq!(c.basis().unwrap().len(), 2);
        assert_eq!(FunctionSource::guess("VEE(2,1)"), FunctionSource::Gallery("VEE(2,1)".into()));
        assert_eq!(FunctionSource::guess("abs(t) + t"), FunctionSource::Inline("abs(t) + t".into()));
        assert_eq!(FunctionSource::guess("f.sfn"), FunctionSource::File("f.sfn".into()));
        let r = FunctionSource::Gallery("ABS".into()).resolve(Path::new(".")).unwrap();
        assert_eq!(r.label, "ABS");
        assert!(FunctionSource::Inline("t +".into()).resolve(Path::new(".")).is_err());
    }

    #[test]
    fn every_schedule_key_is_accepted() {
        let mut s = Schedules::default();
        for k in AnalysisConfig::schedule_keys() {
            s.set(k, "2").unwrap();
        }
        assert!(s.set("nope", "2").is_err());
    }
}
