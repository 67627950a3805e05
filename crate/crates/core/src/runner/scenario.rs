use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::models::Model;
use super::output::Column;
use crate::error::ModelError;

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Number(f64),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    PathCsv,
    Summary,
    Sweep,
}

impl Output {
    pub fn name(self) -> &'static str {
        match self {
            Output::PathCsv => "path_csv",
            Output::Summary => "summary",
            Output::Sweep => "sweep",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Output::PathCsv, Output::Summary, Output::Sweep]
            .into_iter()
            .find(|o| o.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: String,
    /// Strictly increasing, at least two points.
    pub grid: Vec<f64>,
    pub stats: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub model: Model,
    pub params: BTreeMap<String, ParamValue>,
    pub horizon: usize,
    pub seed: Option<u64>,
    pub outputs: Vec<Output>,
    /// Path CSV columns; `None` means every column the run can fill.
    pub columns: Option<Vec<Column>>,
    /// Truncation for the fundamental-value computation; valuation runs
    /// only when set.
    pub truncation: Option<usize>,
    pub sweep: Option<Sweep>,
}

pub const DEFAULT_HORIZON: usize = 100;

/// Source line of a key, when the scenario came from text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Line(pub Option<usize>);

impl std::fmt::Display for Line {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            Some(n) => write!(f, "line {n}"),
            None => f.write_str("(no line)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("[{scenario}] {line}: invalid value for `{key}`: {message}")]
    Value {
        scenario: String,
        key: String,
        line: Line,
        message: String,
    },

    #[error("[{scenario}] {line}: unknown key `{key}` for model {model}")]
    UnknownKey {
        scenario: String,
        key: String,
        line: Line,
        model: &'static str,
    },

    #[error("[{scenario}] missing required key `{key}`")]
    Missing { scenario: String, key: String },

    #[error("[{scenario}] {line}: `{key}`: {source}")]
    Invalid {
        scenario: String,
        key: String,
        line: Line,
        #[source]
        source: ModelError,
    },

    #[error("no scenario sections found")]
    Empty,

    #[error("expected exactly one scenario, found {0}")]
    NotSingle(usize),
}

/// A `key = value` line before interpretation.
#[derive(Debug, Clone, PartialEq)]
enum RawValue {
    Atom(String),
    List(Vec<String>),
}

#[derive(Debug, Default)]
struct RawSection {
    name: String,
    entries: Vec<(String, RawValue, usize)>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn lex(text: &str) -> Result<Vec<RawSection>, ScenarioError> {
    let mut sections: Vec<RawSection> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            if !content.contains('=') {
                let name = rest.strip_suffix(']').map(str::trim).ok_or_else(|| ScenarioError::Syntax {
                    line,
                    message: "unterminated section header".into(),
                })?;
                if !valid_name(name) {
                    return Err(ScenarioError::Syntax {
                        line,
                        message: format!("invalid scenario name `{name}`"),
                    });
                }
                if sections.iter().any(|s| s.name == name) {
                    return Err(ScenarioError::Syntax {
                        line,
                        message: format!("duplicate scenario `{name}`"),
                    });
                }
                sections.push(RawSection {
                    name: name.to_string(),
                    entries: Vec::new(),
                });
                continue;
            }
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ScenarioError::Syntax {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        if !valid_name(key) {
            return Err(ScenarioError::Syntax {
                line,
                message: format!("invalid key `{key}`"),
            });
        }
        let section = sections.last_mut().ok_or_else(|| ScenarioError::Syntax {
            line,
            message: "key outside of a [scenario] section".into(),
        })?;
        if section.entries.iter().any(|(k, _, _)| k == key) {
            return Err(ScenarioError::Syntax {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        let value = value.trim();
        let parsed = if let Some(inner) = value.strip_prefix('[') {
            let inner = inner.strip_suffix(']').ok_or_else(|| ScenarioError::Syntax {
                line,
                message: format!("unterminated list for `{key}`"),
            })?;
            let items: Vec<String> = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner.split(',').map(|s| s.trim().to_string()).collect()
            };
            if items.iter().any(|s| s.is_empty()) {
                return Err(ScenarioError::Syntax {
                    line,
                    message: format!("empty list item for `{key}`"),
                });
            }
            RawValue::List(items)
        } else if value.is_empty() {
            return Err(ScenarioError::Syntax {
                line,
                message: format!("missing value for `{key}`"),
            });
        } else {
            RawValue::Atom(value.to_string())
        };
        section.entries.push((key.to_string(), parsed, line));
    }
    Ok(sections)
}

struct Builder<'a> {
    section: &'a RawSection,
}

impl Builder<'_> {
    fn err(&self, key: &str, line: usize, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Value {
            scenario: self.section.name.clone(),
            key: key.to_string(),
            line: Line(Some(line)),
            message: message.into(),
        }
    }

    fn number(&self, key: &str, s: &str, line: usize) -> Result<f64, ScenarioError> {
        let x: f64 = s
            .parse()
            .map_err(|_| self.err(key, line, format!("`{s}` is not a number")))?;
        if !x.is_finite() {
            return Err(self.err(key, line, "must be finite"));
        }
        Ok(x)
    }

    fn count(&self, key: &str, v: &RawValue, line: usize) -> Result<u64, ScenarioError> {
        match v {
            RawValue::Atom(s) => s
                .parse()
                .map_err(|_| self.err(key, line, format!("`{s}` is not a nonnegative integer"))),
            RawValue::List(_) => Err(self.err(key, line, "expected an integer, got a list")),
        }
    }

    fn idents(&self, key: &str, v: &RawValue, line: usize) -> Result<Vec<String>, ScenarioError> {
        let items = match v {
            RawValue::Atom(s) => vec![s.clone()],
            RawValue::List(items) => items.clone(),
        };
        if let Some(bad) = items.iter().find(|s| !valid_name(s)) {
            return Err(self.err(key, line, format!("`{bad}` is not an identifier")));
        }
        Ok(items)
    }

    fn numbers(&self, key: &str, v: &RawValue, line: usize) -> Result<Vec<f64>, ScenarioError> {
        match v {
            RawValue::List(items) => items.iter().map(|s| self.number(key, s, line)).collect(),
            RawValue::Atom(_) => Err(self.err(key, line, "expected a [list]")),
        }
    }

    fn build(&self) -> Result<(Scenario, BTreeMap<String, usize>), ScenarioError> {
        let sec = self.section;
        let mut lines = BTreeMap::new();
        let mut model = None;
        let mut horizon = DEFAULT_HORIZON;
        let mut seed = None;
        let mut outputs = None;
        let mut columns = None;
        let mut truncation = None;
        let (mut sweep_param, mut sweep_values, mut sweep_range, mut sweep_stat) =
            (None, None, None, None);
        let mut params = BTreeMap::new();

        for (key, value, line) in &sec.entries {
            let line = *line;
            lines.insert(key.clone(), line);
            match key.as_str() {
                "model" => {
                    let name = match value {
                        RawValue::Atom(s) => s,
                        RawValue::List(_) => return Err(self.err(key, line, "expected a model name")),
                    };
                    model = Some(Model::from_name(name).ok_or_else(|| {
                        self.err(key, line, format!("unknown model `{name}` (see list-models)"))
                    })?);
                }
                "horizon" => horizon = self.count(key, value, line)? as usize,
                "seed" => seed = Some(self.count(key, value, line)?),
                "truncation" => truncation = Some(self.count(key, value, line)? as usize),
                "outputs" => {
                    let names = self.idents(key, value, line)?;
                    let mut out = Vec::new();
                    for n in names {
                        let o = Output::parse(&n)
                            .ok_or_else(|| self.err(key, line, format!("unknown output `{n}`")))?;
                        if !out.contains(&o) {
                            out.push(o);
                        }
                    }
                    outputs = Some(out);
                }
                "columns" => {
                    let names = self.idents(key, value, line)?;
                    let cols = names
                        .iter()
                        .map(|n| n.parse::<Column>().map_err(|e| self.err(key, line, e.to_string())))
                        .collect::<Result<Vec<_>, _>>()?;
                    columns = Some(cols);
                }
                "sweep_param" => {
                    let names = self.idents(key, value, line)?;
                    if names.len() != 1 {
                        return Err(self.err(key, line, "expected one parameter name"));
                    }
                    sweep_param = Some(names[0].clone());
                }
                "sweep_values" => sweep_values = Some(self.numbers(key, value, line)?),
                "sweep_range" => sweep_range = Some(self.numbers(key, value, line)?),
                "sweep_stat" => sweep_stat = Some(self.idents(key, value, line)?),
                _ => {
                    let v = match value {
                        RawValue::Atom(s) => ParamValue::Number(self.number(key, s, line)?),
                        RawValue::List(_) => ParamValue::List(self.numbers(key, value, line)?),
                    };
                    params.insert(key.clone(), v);
                }
            }
        }

        let model = model.ok_or_else(|| ScenarioError::Missing {
            scenario: sec.name.clone(),
            key: "model".into(),
        })?;

        let sweep_keys = [
            ("sweep_param", sweep_param.is_some()),
            ("sweep_values", sweep_values.is_some()),
            ("sweep_range", sweep_range.is_some()),
            ("sweep_stat", sweep_stat.is_some()),
        ];
        let sweep = if sweep_keys.iter().any(|(_, set)| *set) {
            if sweep_values.is_some() && sweep_range.is_some() {
                let line = lines["sweep_range"];
                return Err(self.err("sweep_range", line, "give either sweep_values or sweep_range"));
            }
            let missing = |key: &str| ScenarioError::Missing {
                scenario: sec.name.clone(),
                key: key.into(),
            };
            let param = sweep_param.ok_or_else(|| missing("sweep_param"))?;
            let stats = sweep_stat.ok_or_else(|| missing("sweep_stat"))?;
            let grid = match (sweep_values, sweep_range) {
                (Some(v), _) => v,
                (None, Some(r)) => {
                    let line = lines["sweep_range"];
                    expand_range(&r).map_err(|m| self.err("sweep_range", line, m))?
                }
                (None, None) => return Err(missing("sweep_values")),
            };
            Some(Sweep { param, grid, stats })
        } else {
            None
        };

        let outputs = outputs.unwrap_or_else(|| {
            if sweep.is_some() {
                vec![Output::Sweep]
            } else {
                vec![Output::PathCsv, Output::Summary]
            }
        });

        let scenario = Scenario {
            name: sec.name.clone(),
            model,
            params,
            horizon,
            seed,
            outputs,
            columns,
            truncation,
            sweep,
        };
        Ok((scenario, lines))
    }
}

/// `[start, end, count]` to `count` evenly spaced points, endpoints exact.
fn expand_range(r: &[f64]) -> Result<Vec<f64>, String> {
    let [start, end, count] = r else {
        return Err("expected [start, end, count]".into());
    };
    if count.fract() != 0.0 || *count < 2.0 {
        return Err("count must be an integer >= 2".into());
    }
    let n = *count as usize;
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                *end
            } else {
                start + (end - start) * i as f64 / (n - 1) as f64
            }
        })
        .collect())
}

/// Parses every section of a scenario file, validating each.
pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>, ScenarioError> {
    let sections = lex(text)?;
    if sections.is_empty() {
        return Err(ScenarioError::Empty);
    }
    sections
        .iter()
        .map(|sec| {
            let (scenario, lines) = Builder { section: sec }.build()?;
            scenario.model.validate(&scenario, &lines)?;
            Ok(scenario)
        })
        .collect()
}

/// Parses a file that holds exactly one scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut all = parse_scenarios(text)?;
    if all.len() != 1 {
        return Err(ScenarioError::NotSingle(all.len()));
    }
    Ok(all.remove(0))
}

fn write_num(out: &mut String, x: f64) {
    // `{:?}` is the shortest representation that parses back exactly
    let _ = write!(out, "{x:?}");
}

/// Text form that [`parse_scenario`] reads back to an equal value.
pub fn serialize_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[{}]", s.name);
    let _ = writeln!(out, "model = {}", s.model.name());
    let _ = writeln!(out, "horizon = {}", s.horizon);
    if let Some(seed) = s.seed {
        let _ = writeln!(out, "seed = {seed}");
    }
    let outputs: Vec<&str> = s.outputs.iter().map(|o| o.name()).collect();
    let _ = writeln!(out, "outputs = [{}]", outputs.join(", "));
    if let Some(cols) = &s.columns {
        let names: Vec<&str> = cols.iter().map(|c| c.name()).collect();
        let _ = writeln!(out, "columns = [{}]", names.join(", "));
    }
    if let Some(t) = s.truncation {
        let _ = writeln!(out, "truncation = {t}");
    }
    for (key, value) in &s.params {
        out.push_str(key);
        out.push_str(" = ");
        match value {
            ParamValue::Number(x) => write_num(&mut out, *x),
            ParamValue::List(xs) => {
                out.push('[');
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_num(&mut out, *x);
                }
                out.push(']');
            }
        }
        out.push('\n');
    }
    if let Some(sw) = &s.sweep {
        let _ = writeln!(out, "sweep_param = {}", sw.param);
        out.push_str("sweep_values = [");
        for (i, x) in sw.grid.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write_num(&mut out, *x);
        }
        out.push_str("]\n");
        let _ = writeln!(out, "sweep_stat = [{}]", sw.stats.join(", "));
    }
    out
}
