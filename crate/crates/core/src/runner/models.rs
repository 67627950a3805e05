use std::collections::BTreeMap;
use std::path::Path;

use super::output::{emit_csv, fmt_g12, Column};
use super::scenario::{Line, Output, ParamValue, Scenario, ScenarioError};
use super::RunError;
use crate::barebones::{self, BareBonesParams};
use crate::bewley::{bewley_price, BewleyParams, Existence};
use crate::error::ModelError;
use crate::olg_pure::{
    samuelson_equilibria, samuelson_price_path, weil_sample_path, weil_stationary_price,
    SamuelsonParams, WeilParams,
};
use crate::par::Execution;
use crate::path::EquilibriumPath;
use crate::recur::{SeriesVerdict, MIN_SERIES_HORIZON};
use crate::seq::Sequence;
use crate::tirole::{tirole_crowdin_steady, tirole_steady, Crowding, TiroleParams, TiroleSteadyStates};
use crate::valuation::{detect_bubble_lemma, fundamental_value, BubbleReport};
use crate::wilson::{wilson_bubble_test, wilson_path, WilsonParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Samuelson,
    Weil,
    Bewley,
    Tirole,
    TiroleCrowdin,
    Wilson,
    Barebones,
    BarebonesSwitch,
    BarebonesTimevarying,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Required,
    Optional,
    /// Scalar, list, `_scale` + `_growth` or `_scale` + `_power`.
    Sequence,
}

struct Key(&'static str, Kind);

use Kind::{Optional as Opt, Required as Req, Sequence as Seq};

impl Model {
    pub const ALL: [Model; 9] = [
        Model::Samuelson,
        Model::Weil,
        Model::Bewley,
        Model::Tirole,
        Model::TiroleCrowdin,
        Model::Wilson,
        Model::Barebones,
        Model::BarebonesSwitch,
        Model::BarebonesTimevarying,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::Samuelson => "samuelson",
            Model::Weil => "weil",
            Model::Bewley => "bewley",
            Model::Tirole => "tirole",
            Model::TiroleCrowdin => "tirole_crowdin",
            Model::Wilson => "wilson",
            Model::Barebones => "barebones",
            Model::BarebonesSwitch => "barebones_switch",
            Model::BarebonesTimevarying => "barebones_timevarying",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Model::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn description(self) -> &'static str {
        match self {
            Model::Samuelson => "pure-bubble OLG economy, deterministic price paths",
            Model::Weil => "pure bubble that survives each period with probability upsilon",
            Model::Bewley => "two-type endowment economy with borrowing constraints",
            Model::Tirole => "OLG with capital, bubble crowd-out",
            Model::TiroleCrowdin => "OLG with capital and idle savers, bubble crowd-in",
            Model::Wilson => "OLG with a dividend-paying asset and growing endowments",
            Model::Barebones => "two-sector land and capital economy",
            Model::BarebonesSwitch => "two-sector economy hit by a temporary productivity shock",
            Model::BarebonesTimevarying => "two-sector economy with productivity and rent sequences",
        }
    }

    fn keys(self) -> &'static [Key] {
        match self {
            Model::Samuelson => &[Key("beta", Req), Key("a", Req), Key("b", Req), Key("p0", Opt)],
            Model::Weil => &[Key("beta", Req), Key("a", Req), Key("b", Req), Key("upsilon", Req)],
            Model::Bewley => &[
                Key("beta", Req),
                Key("gamma", Req),
                Key("G", Req),
                Key("a", Req),
                Key("b", Req),
            ],
            Model::Tirole => &[Key("beta", Req), Key("alpha", Req), Key("delta", Req), Key("A", Req)],
            Model::TiroleCrowdin => &[
                Key("beta", Req),
                Key("alpha", Req),
                Key("delta", Req),
                Key("A", Req),
                Key("pi", Req),
            ],
            Model::Wilson => &[Key("beta", Req), Key("a", Seq), Key("D", Seq)],
            Model::Barebones => &[
                Key("pi", Req),
                Key("beta", Req),
                Key("delta", Req),
                Key("A", Req),
                Key("D", Req),
                Key("X", Opt),
                Key("p0", Opt),
                Key("w0", Opt),
                Key("k0", Opt),
            ],
            Model::BarebonesSwitch => &[
                Key("pi", Req),
                Key("beta", Req),
                Key("delta", Req),
                Key("A", Req),
                Key("A_shock", Req),
                Key("t_on", Req),
                Key("t_off", Req),
                Key("D", Req),
                Key("X", Opt),
            ],
            Model::BarebonesTimevarying => &[
                Key("pi", Req),
                Key("beta", Req),
                Key("delta", Req),
                Key("A", Seq),
                Key("D", Seq),
                Key("X", Opt),
                Key("w0", Req),
            ],
        }
    }

    /// Per-point statistics a sweep over this model can report.
    pub fn sweep_stats(self) -> &'static [&'static str] {
        match self {
            Model::Samuelson => &["stationary_price", "bubbly_upper", "autarky_rate"],
            Model::Weil => &["stationary_price"],
            Model::Bewley => &["price_level", "exists", "effective_discount"],
            Model::Tirole | Model::TiroleCrowdin => &[
                "k_fundamental",
                "r_fundamental",
                "k_bubbly",
                "bubble_price",
                "bubbly_rate",
                "crowding",
            ],
            Model::Wilson => &["yield_series"],
            Model::Barebones => &[
                "longrun_rate",
                "regime",
                "steady_price",
                "slope",
                "a_low",
                "a_high",
                "necessity",
                "wealth_bound",
            ],
            Model::BarebonesSwitch => &["peak_price", "peak_time", "final_price"],
            Model::BarebonesTimevarying => &["liminf_slope", "bubble_predicted", "yield_series"],
        }
    }

    fn has_path(self) -> bool {
        !matches!(self, Model::Tirole | Model::TiroleCrowdin)
    }

    /// Checks keys, builds the model inputs (which runs the model's own
    /// parameter validation) and checks sweep and output settings.
    pub(crate) fn validate(
        self,
        s: &Scenario,
        lines: &BTreeMap<String, usize>,
    ) -> Result<(), ScenarioError> {
        let ctx = Ctx { s, lines };
        ctx.check_keys()?;
        prepare(&ctx)?;
        if s.outputs.contains(&Output::PathCsv) && !self.has_path() {
            return Err(ctx.value("outputs", "model produces no path; use summary or sweep"));
        }
        match (&s.sweep, s.outputs.contains(&Output::Sweep)) {
            (None, true) => return Err(ctx.missing("sweep_param")),
            (Some(_), false) => {
                return Err(ctx.value("outputs", "sweep settings given but `sweep` is not an output"))
            }
            _ => {}
        }
        if let Some(sw) = &s.sweep {
            let scalar = self
                .keys()
                .iter()
                .any(|k| k.0 == sw.param && k.1 != Kind::Sequence);
            if !scalar {
                return Err(ctx.value(
                    "sweep_param",
                    format!("`{}` is not a scalar parameter of {}", sw.param, self.name()),
                ));
            }
            if sw.grid.len() < 2 || sw.grid.windows(2).any(|w| w[1] <= w[0]) {
                let key = if lines.contains_key("sweep_range") {
                    "sweep_range"
                } else {
                    "sweep_values"
                };
                return Err(ctx.value(key, "grid must be strictly increasing with at least 2 points"));
            }
            if sw.stats.is_empty() {
                return Err(ctx.value("sweep_stat", "at least one statistic is required"));
            }
            if let Some(bad) = sw.stats.iter().find(|st| !self.sweep_stats().contains(&st.as_str())) {
                return Err(ctx.value(
                    "sweep_stat",
                    format!(
                        "unknown statistic `{bad}` for {}; known: {}",
                        self.name(),
                        self.sweep_stats().join(", ")
                    ),
                ));
            }
        }
        if s.truncation.is_some() && !self.has_path() {
            return Err(ctx.value("truncation", "model produces no path to value"));
        }
        Ok(())
    }
}

struct Ctx<'a> {
    s: &'a Scenario,
    lines: &'a BTreeMap<String, usize>,
}

/// Error-name aliases from the model modules back to scenario keys.
fn key_for(name: &str) -> &str {
    match name {
        "growth" => "G",
        "survival" => "upsilon",
        "young_endow" => "a",
        "old_endow" => "b",
        "dividend" => "D",
        "p_shock" => "A_shock",
        other => other,
    }
}

impl Ctx<'_> {
    fn line(&self, key: &str) -> Line {
        Line(self.lines.get(key).copied())
    }

    fn value(&self, key: &str, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Value {
            scenario: self.s.name.clone(),
            key: key.to_string(),
            line: self.line(key),
            message: message.into(),
        }
    }

    fn missing(&self, key: &str) -> ScenarioError {
        ScenarioError::Missing {
            scenario: self.s.name.clone(),
            key: key.to_string(),
        }
    }

    fn invalid(&self, e: ModelError) -> ScenarioError {
        let key = match &e {
            ModelError::InvalidParameter { name, .. } => key_for(name).to_string(),
            ModelError::SequenceTooShort { name, .. } => key_for(name).to_string(),
            _ => self.s.model.name().to_string(),
        };
        ScenarioError::Invalid {
            scenario: self.s.name.clone(),
            line: self.line(&key),
            key,
            source: e,
        }
    }

    fn check_keys(&self) -> Result<(), ScenarioError> {
        let model = self.s.model;
        let keys = model.keys();
        let allowed = |k: &str| {
            keys.iter().any(|key| match key.1 {
                Kind::Sequence => {
                    k == key.0
                        || ["_scale", "_growth", "_power"]
                            .iter()
                            .any(|suffix| k.strip_suffix(suffix) == Some(key.0))
                }
                _ => k == key.0,
            })
        };
        // Report the earliest offending line first.
        let mut unknown: Vec<&String> = self.s.params.keys().filter(|k| !allowed(k)).collect();
        unknown.sort_by_key(|k| self.lines.get(*k).copied().unwrap_or(usize::MAX));
        if let Some(k) = unknown.first() {
            return Err(ScenarioError::UnknownKey {
                scenario: self.s.name.clone(),
                key: (*k).clone(),
                line: self.line(k),
                model: model.name(),
            });
        }
        for key in keys {
            if key.1 == Kind::Required && !self.s.params.contains_key(key.0) {
                return Err(self.missing(key.0));
            }
        }
        Ok(())
    }

    fn num(&self, key: &str) -> Result<f64, ScenarioError> {
        match self.s.params.get(key) {
            Some(ParamValue::Number(x)) => Ok(*x),
            Some(ParamValue::List(_)) => Err(self.value(key, "expected a number, got a list")),
            None => Err(self.missing(key)),
        }
    }

    fn opt(&self, key: &str) -> Result<Option<f64>, ScenarioError> {
        match self.s.params.get(key) {
            None => Ok(None),
            Some(_) => self.num(key).map(Some),
        }
    }

    fn count(&self, key: &str) -> Result<usize, ScenarioError> {
        let x = self.num(key)?;
        if x < 0.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
            return Err(self.value(key, "expected a nonnegative integer"));
        }
        Ok(x as usize)
    }

    fn sequence(&self, key: &str) -> Result<Sequence, ScenarioError> {
        let scale_key = format!("{key}_scale");
        let growth_key = format!("{key}_growth");
        let power_key = format!("{key}_power");
        let get = |k: &str| self.s.params.get(k);
        let forms = [
            get(key).is_some(),
            get(&growth_key).is_some(),
            get(&power_key).is_some(),
        ];
        let first_set = [key, &growth_key, &power_key, &scale_key]
            .into_iter()
            .find(|k| get(k).is_some());
        if forms.iter().filter(|f| **f).count() > 1 || (forms[0] && get(&scale_key).is_some()) {
            return Err(self.value(
                first_set.unwrap_or(key),
                format!("give `{key}`, or `{key}_scale` with one of `{key}_growth`/`{key}_power`"),
            ));
        }
        match self.s.params.get(key) {
            Some(ParamValue::Number(x)) => return Ok(Sequence::constant(*x)),
            Some(ParamValue::List(v)) => return Ok(Sequence::Explicit(v.clone())),
            None => {}
        }
        if forms[1] || forms[2] {
            let scale = self.num(&scale_key)?;
            return Ok(if forms[1] {
                Sequence::Geometric {
                    scale,
                    growth: self.num(&growth_key)?,
                }
            } else {
                Sequence::Polynomial {
                    scale,
                    power: self.num(&power_key)?,
                }
            });
        }
        match first_set {
            Some(k) => Err(self.value(k, format!("`{key}_scale` needs `{key}_growth` or `{key}_power`"))),
            None => Err(self.missing(key)),
        }
    }

    fn barebones(&self) -> Result<BareBonesParams, ScenarioError> {
        let p = BareBonesParams::new(
            self.num("pi")?,
            self.num("beta")?,
            self.num("delta")?,
            self.num("A")?,
            self.num("D")?,
        )
        .map_err(|e| self.invalid(e))?;
        match self.opt("X")? {
            Some(x) => p.with_land(x).map_err(|e| self.invalid(e)),
            None => Ok(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Start {
    Price(f64),
    Wealth(f64),
    Capital(f64),
    Default,
}

/// Validated model inputs.
#[derive(Debug, Clone)]
enum Prepared {
    Samuelson { p: SamuelsonParams, p0: Option<f64> },
    Weil(WeilParams),
    Bewley(BewleyParams),
    Tirole { p: TiroleParams, crowd_in: bool },
    Wilson(WilsonParams),
    Barebones { p: BareBonesParams, start: Start },
    Switch {
        base: BareBonesParams,
        shock: BareBonesParams,
        t_on: usize,
        t_off: usize,
    },
    TimeVarying {
        p: BareBonesParams,
        a: Sequence,
        d: Sequence,
        w0: f64,
    },
}

fn prepare(ctx: &Ctx<'_>) -> Result<Prepared, ScenarioError> {
    let inv = |e| ctx.invalid(e);
    Ok(match ctx.s.model {
        Model::Samuelson => Prepared::Samuelson {
            p: SamuelsonParams::new(ctx.num("beta")?, ctx.num("a")?, ctx.num("b")?).map_err(inv)?,
            p0: ctx.opt("p0")?,
        },
        Model::Weil => {
            let base = SamuelsonParams::new(ctx.num("beta")?, ctx.num("a")?, ctx.num("b")?).map_err(inv)?;
            Prepared::Weil(WeilParams::new(base, ctx.num("upsilon")?).map_err(inv)?)
        }
        Model::Bewley => Prepared::Bewley(
            BewleyParams::new(
                ctx.num("beta")?,
                ctx.num("gamma")?,
                ctx.num("G")?,
                ctx.num("a")?,
                ctx.num("b")?,
            )
            .map_err(inv)?,
        ),
        Model::Tirole => Prepared::Tirole {
            p: TiroleParams::new(ctx.num("beta")?, ctx.num("alpha")?, ctx.num("delta")?, ctx.num("A")?)
                .map_err(inv)?,
            crowd_in: false,
        },
        Model::TiroleCrowdin => Prepared::Tirole {
            p: TiroleParams::with_entrepreneurs(
                ctx.num("beta")?,
                ctx.num("alpha")?,
                ctx.num("delta")?,
                ctx.num("A")?,
                ctx.num("pi")?,
            )
            .map_err(inv)?,
            crowd_in: true,
        },
        Model::Wilson => Prepared::Wilson(
            WilsonParams::new(ctx.num("beta")?, ctx.sequence("a")?, ctx.sequence("D")?).map_err(inv)?,
        ),
        Model::Barebones => {
            let p = ctx.barebones()?;
            let given: Vec<&str> = ["p0", "w0", "k0"]
                .into_iter()
                .filter(|k| ctx.s.params.contains_key(*k))
                .collect();
            if given.len() > 1 {
                return Err(ctx.value(given[1], "give at most one of p0, w0, k0"));
            }
            let start = match given.first() {
                Some(&"p0") => Start::Price(ctx.num("p0")?),
                Some(&"w0") => Start::Wealth(ctx.num("w0")?),
                Some(_) => Start::Capital(ctx.num("k0")?),
                None => Start::Default,
            };
            Prepared::Barebones { p, start }
        }
        Model::BarebonesSwitch => {
            let base = ctx.barebones()?;
            let shock = base
                .with_productivity(ctx.num("A_shock")?)
                .map_err(|e| match e {
                    ModelError::InvalidParameter { value, constraint, .. } => {
                        ctx.invalid(ModelError::InvalidParameter {
                            name: "p_shock",
                            value,
                            constraint,
                        })
                    }
                    other => ctx.invalid(other),
                })?;
            let t_on = ctx.count("t_on")?;
            let t_off = ctx.count("t_off")?;
            if t_off < t_on {
                return Err(ctx.value("t_off", "t_off must not precede t_on"));
            }
            Prepared::Switch {
                base,
                shock,
                t_on,
                t_off,
            }
        }
        Model::BarebonesTimevarying => {
            let p = ctx.barebones_timevarying()?;
            let a = ctx.sequence("A")?;
            let d = ctx.sequence("D")?;
            let w0 = ctx.num("w0")?;
            Prepared::TimeVarying { p, a, d, w0 }
        }
    })
}

impl Ctx<'_> {
    /// Scalar parameters for the time-varying model; `A` and `D` enter
    /// through their sequences, so their first terms stand in here.
    fn barebones_timevarying(&self) -> Result<BareBonesParams, ScenarioError> {
        let a0 = self.sequence("A")?.at(0).unwrap_or(f64::NAN);
        let d0 = self.sequence("D")?.at(0).unwrap_or(f64::NAN);
        let p = BareBonesParams::new(self.num("pi")?, self.num("beta")?, self.num("delta")?, a0, d0)
            .map_err(|e| self.invalid(e))?;
        match self.opt("X")? {
            Some(x) => p.with_land(x).map_err(|e| self.invalid(e)),
            None => Ok(p),
        }
    }
}

/// Files produced by one scenario, in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    /// `(file name, contents)` in output order.
    pub files: Vec<(String, String)>,
    pub path: Option<EquilibriumPath>,
    pub valuation: Option<BubbleReport>,
}

impl RunArtifacts {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), RunError> {
        for (name, contents) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|source| RunError::Io { path, source })?;
        }
        Ok(())
    }
}

fn model_err(s: &Scenario) -> impl Fn(ModelError) -> RunError + '_ {
    move |source| RunError::Model {
        scenario: s.name.clone(),
        source,
    }
}

/// Runs a validated scenario and renders its output files.
pub fn run_scenario(s: &Scenario, exec: Execution) -> Result<RunArtifacts, RunError> {
    let lines = BTreeMap::new();
    let ctx = Ctx { s, lines: &lines };
    let prepared = prepare(&ctx)?;
    let wants_path = s.outputs.contains(&Output::PathCsv)
        || (s.outputs.contains(&Output::Summary) && s.model.has_path());
    let mut files = Vec::new();
    let mut path = None;
    let mut valuation = None;
    let mut summary = Summary::default();
    summary.text("scenario", &s.name);
    summary.text("model", s.model.name());
    for (k, v) in &s.params {
        match v {
            ParamValue::Number(x) => summary.num(k, *x),
            ParamValue::List(xs) => summary.text(k, &format!("[{} terms]", xs.len())),
        }
    }
    summary.int("horizon", s.horizon as i64);

    describe(&prepared, s, &mut summary).map_err(model_err(s))?;

    if wants_path {
        let p = build_path(&prepared, s, &mut summary).map_err(model_err(s))?;
        if let Some(trunc) = s.truncation {
            let report = fundamental_value(&p, trunc).map_err(model_err(s))?;
            summary.text("valuation_verdict", report.verdict.name());
            summary.num("limiting_rate", report.limiting_rate);
            summary.num("dividend_growth", report.dividend_growth);
            summary.text("tail_trusted", bool_name(report.tail_trusted));
            summary.text("infinite_pv", bool_name(report.infinite_pv));
            if let (Some(v), Some(b)) = (report.fundamental.first(), report.bubble.first()) {
                summary.num("V0", *v);
                summary.num("bubble0", *b);
            }
            valuation = Some(report);
        }
        if p.len() > MIN_SERIES_HORIZON && p.dividend.iter().skip(1).all(|d| *d > 0.0) {
            if let Ok(lemma) = detect_bubble_lemma(&p) {
                summary.text("lemma_verdict", lemma.verdict.name());
            }
        }
        summary.num("final_price", *p.price.last().expect("nonempty path"));
        path = Some(p);
    }

    for out in &s.outputs {
        match out {
            Output::PathCsv => {
                let p = path.as_ref().expect("path built");
                let cols = s
                    .columns
                    .clone()
                    .unwrap_or_else(|| Column::available(p, valuation.as_ref()));
                files.push((format!("{}.csv", s.name), emit_csv(p, &cols, valuation.as_ref())?));
            }
            Output::Summary => files.push((format!("{}_summary.txt", s.name), summary.render())),
            Output::Sweep => files.push((format!("{}_sweep.csv", s.name), run_sweep(s, exec)?)),
        }
    }
    Ok(RunArtifacts {
        files,
        path,
        valuation,
    })
}

/// Runs every scenario and writes their files under `out_dir`.
pub fn run_all(scenarios: &[Scenario], out_dir: &Path, exec: Execution) -> Result<Vec<RunArtifacts>, RunError> {
    std::fs::create_dir_all(out_dir).map_err(|source| RunError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut all = Vec::with_capacity(scenarios.len());
    for s in scenarios {
        let art = run_scenario(s, exec)?;
        art.write_to(out_dir)?;
        all.push(art);
    }
    Ok(all)
}

#[derive(Debug, Default)]
struct Summary(Vec<(String, String)>);

impl Summary {
    fn text(&mut self, k: &str, v: &str) {
        self.0.push((k.to_string(), v.to_string()));
    }

    fn num(&mut self, k: &str, v: f64) {
        self.text(k, &fmt_g12(v));
    }

    fn int(&mut self, k: &str, v: i64) {
        self.text(k, &v.to_string());
    }

    fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn bool_name(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn series_name(v: SeriesVerdict) -> &'static str {
    match v {
        SeriesVerdict::Convergent => "convergent",
        SeriesVerdict::Divergent => "divergent",
        SeriesVerdict::Inconclusive => "inconclusive",
    }
}

fn crowding_name(c: Crowding) -> &'static str {
    match c {
        Crowding::Out => "out",
        Crowding::In => "in",
        Crowding::None => "none",
    }
}

fn tirole_states(p: &TiroleParams, crowd_in: bool) -> TiroleSteadyStates {
    if crowd_in {
        tirole_crowdin_steady(p)
    } else {
        tirole_steady(p)
    }
}

/// Parameter-level results that need no simulated path.
fn describe(prep: &Prepared, s: &Scenario, out: &mut Summary) -> Result<(), ModelError> {
    match prep {
        Prepared::Samuelson { p, .. } => {
            let set = samuelson_equilibria(p);
            out.num("autarky_rate", p.autarky_rate());
            out.text("fundamental_exists", bool_name(set.fundamental_exists));
            if let Some(u) = set.bubbly_upper {
                out.num("bubbly_upper", u);
            }
            if let Some(sp) = set.stationary_price {
                out.num("stationary_price", sp);
            }
        }
        Prepared::Weil(p) => {
            if let Some(sp) = weil_stationary_price(p) {
                out.num("stationary_price", sp);
            }
        }
        Prepared::Bewley(p) => {
            let eq = bewley_price(p);
            out.num("effective_discount", eq.effective_discount);
            out.text("exists", bool_name(eq.exists));
            out.text(
                "existence",
                match eq.existence {
                    Existence::Exists => "exists",
                    Existence::TransversalityFails => "transversality_fails",
                    Existence::PriceNotPositive => "price_not_positive",
                },
            );
            out.num("price_level", eq.price_level);
        }
        Prepared::Tirole { p, crowd_in } => {
            let st = tirole_states(p, *crowd_in);
            out.num("k_fundamental", st.k_fundamental);
            out.num("r_fundamental", st.r_fundamental);
            if let Some(b) = st.bubbly {
                out.num("k_bubbly", b.capital);
                out.num("bubble_price", b.price);
                out.num("bubbly_rate", b.rate);
            }
            out.text("crowding", crowding_name(st.crowding));
        }
        Prepared::Wilson(p) => {
            if s.horizon >= MIN_SERIES_HORIZON {
                let c = wilson_bubble_test(p, s.horizon)?;
                out.text("yield_series", series_name(c.verdict));
                out.text("bubble", bool_name(c.verdict == SeriesVerdict::Convergent));
            }
        }
        Prepared::Barebones { p, .. } | Prepared::Switch { base: p, .. } => {
            describe_barebones(p, out);
        }
        Prepared::TimeVarying { .. } => {}
    }
    Ok(())
}

fn describe_barebones(p: &BareBonesParams, out: &mut Summary) {
    let rep = barebones::classify_regime(p);
    out.num("a_low", rep.thresholds.a_low);
    out.num("a_high", rep.thresholds.a_high);
    out.text("regime", rep.regime.name());
    out.num("slope", rep.slope);
    out.num("longrun_rate", barebones::longrun_rate(p));
    out.text("necessity", bool_name(rep.necessity.holds));
    out.num("wealth_bound", p.wealth_bound());
    if let Ok(ss) = barebones::steady_state(p) {
        out.num("steady_price", ss.price);
        out.num("steady_rate", ss.rate);
        out.num("steady_capital", ss.capital);
    }
}

fn build_path(prep: &Prepared, s: &Scenario, out: &mut Summary) -> Result<EquilibriumPath, ModelError> {
    let horizon = s.horizon;
    Ok(match prep {
        Prepared::Samuelson { p, p0 } => {
            let p0 = match p0 {
                Some(x) => *x,
                None => samuelson_equilibria(p).bubbly_upper.ok_or(ModelError::NoBubble)?,
            };
            samuelson_price_path(p, p0, horizon)?
        }
        Prepared::Weil(p) => {
            let seed = s.seed.unwrap_or(0);
            let w = weil_sample_path(p, seed, horizon)?;
            out.int("seed", seed as i64);
            match w.collapse {
                Some(c) => out.int("collapse", c as i64),
                None => out.text("collapse", "none"),
            }
            w.path
        }
        Prepared::Bewley(p) => {
            let eq = bewley_price(p);
            if !eq.exists {
                return Err(ModelError::NoBubble);
            }
            eq.path(p, horizon)
        }
        Prepared::Tirole { .. } => unreachable!("rejected during validation"),
        Prepared::Wilson(p) => wilson_path(p, horizon)?,
        Prepared::Barebones { p, start } => {
            match *start {
                Start::Price(p0) => {
                    let full = barebones::price_dynamics(p, p0, horizon)?;
                    out.int("arbitrage_violations", full.violations().len() as i64);
                    full.path
                }
                Start::Wealth(w0) => barebones::simulate_forward(p, w0, horizon)?,
                Start::Capital(k0) => {
                    let c = barebones::construct_equilibrium(p, k0, horizon)?;
                    out.int("pre_phase", c.pre_phase as i64);
                    out.num("w0", c.w0);
                    c.path
                }
                Start::Default => match barebones::steady_state_path(p, horizon) {
                    Ok(path) => path,
                    Err(ModelError::NoSteadyState { .. }) => {
                        barebones::simulate_forward(p, p.wealth_bound().max(p.min_wealth()), horizon)?
                    }
                    Err(e) => return Err(e),
                },
            }
        }
        Prepared::Switch {
            base,
            shock,
            t_on,
            t_off,
        } => {
            let full = barebones::simulate_regime_switch(base, shock, *t_on, *t_off, horizon)?;
            let (peak_t, peak) = peak(&full.path);
            out.int("peak_time", peak_t);
            out.num("peak_price", peak);
            out.int("arbitrage_violations", full.violations().len() as i64);
            full.path
        }
        Prepared::TimeVarying { p, a, d, w0 } => {
            let o = barebones::simulate_timevarying(p, a, d, *w0, horizon)?;
            out.num("liminf_slope", o.liminf_slope);
            out.text("bubble_predicted", bool_name(o.bubble_predicted()));
            if let Some(c) = o.yield_series {
                out.text("yield_series", series_name(c.verdict));
            }
            out.int("arbitrage_violations", o.full.violations().len() as i64);
            o.full.path
        }
    })
}

fn peak(path: &EquilibriumPath) -> (i64, f64) {
    path.price
        .iter()
        .enumerate()
        .fold((path.time(0), f64::NEG_INFINITY), |(bt, bp), (i, &x)| {
            if x > bp {
                (path.time(i), x)
            } else {
                (bt, bp)
            }
        })
}

/// One sweep point: the stat values as CSV cells, blank where undefined.
fn sweep_point(s: &Scenario, stats: &[String]) -> Result<Vec<String>, RunError> {
    let lines = BTreeMap::new();
    let ctx = Ctx { s, lines: &lines };
    let prep = prepare(&ctx)?;
    let mut summary = Summary::default();
    describe(&prep, s, &mut summary).map_err(model_err(s))?;
    if matches!(prep, Prepared::Switch { .. } | Prepared::TimeVarying { .. }) {
        let path = build_path(&prep, s, &mut summary).map_err(model_err(s))?;
        summary.num("final_price", *path.price.last().expect("nonempty path"));
    }
    Ok(stats
        .iter()
        .map(|st| {
            summary
                .0
                .iter()
                .rev()
                .find(|(k, _)| k == st)
                .map(|(_, v)| v.clone())
                .unwrap_or_default()
        })
        .collect())
}

fn run_sweep(s: &Scenario, exec: Execution) -> Result<String, RunError> {
    let sw = s.sweep.as_ref().expect("validated sweep");
    let points: Vec<Scenario> = sw
        .grid
        .iter()
        .map(|&x| {
            let mut point = s.clone();
            point.params.insert(sw.param.clone(), ParamValue::Number(x));
            point.sweep = None;
            point
        })
        .collect();
    let rows = exec.map(&points, |point| sweep_point(point, &sw.stats));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| super::output::OutputError::Csv(e.to_string());
    let header = std::iter::once(sw.param.as_str()).chain(sw.stats.iter().map(String::as_str));
    w.write_record(header).map_err(csv_err)?;
    for (x, row) in sw.grid.iter().zip(rows) {
        let row = row?;
        w.write_record(std::iter::once(fmt_g12(*x)).chain(row)).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| super::output::OutputError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}
