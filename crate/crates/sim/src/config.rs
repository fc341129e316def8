//! Scenario documents: strict JSON schema, defaults and validation.
//!
//! Agent and node numbers in documents are 1-based.

use std::fmt;

use dat_core::dynamics::{bound_conforms, check_bounded, estimate_lipschitz, LipschitzEstimate};
use dat_core::simulator::ValidationReport;
use dat_core::{
    DynamicsKind, DynamicsSpec, GainSetBounded, GainSetLipschitz, Gains, Graph, GraphFamily,
    IntegratorConfig, Problem, SampleBox, Scheme, SignumPolicy, SystemState, Variant,
};
use serde::de::{self, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::Deserialize;
use serde_json::{Map, Value};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_RECORD_EVERY: u64 = 10;
pub const DEFAULT_REFERENCE_BOX: [f64; 2] = [-1.0, 1.0];
/// Samples drawn when checking declared dynamics constants.
pub const DECLARATION_SAMPLES: usize = 10_000;
/// Seed for the declaration check; fixed so validation never depends on the
/// run seed.
pub const DECLARATION_SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// Not a JSON object, or a key appears twice in one object.
    Syntax(String),
    /// Every schema and validation violation found.
    Invalid(Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax(msg) => write!(f, "malformed scenario document: {msg}"),
            ConfigError::Invalid(violations) => {
                write!(f, "{} scenario violation(s)", violations.len())?;
                for v in violations {
                    write!(f, "\n  - {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// A parsed, fully validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub problem: Problem,
    pub seed: Option<u64>,
    /// File stem for outputs; the CLI falls back to the config file stem.
    pub output: Option<String>,
    pub dump_states: bool,
    pub report: ValidationReport,
    pub declaration: DeclarationCheck,
}

/// Declared dynamics constants next to their sampled estimates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DeclarationCheck {
    pub lipschitz: Option<((f64, f64), LipschitzEstimate)>,
    pub bound: Option<(f64, f64)>,
}

/// JSON value that refuses duplicate keys, which `serde_json::Value` would
/// silently collapse.
struct UniqueKeys(Value);

impl<'de> Deserialize<'de> for UniqueKeys {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer
            .deserialize_any(UniqueKeysVisitor)
            .map(UniqueKeys)
    }
}

struct UniqueKeysVisitor;

impl<'de> Visitor<'de> for UniqueKeysVisitor {
    type Value = Value;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a JSON value")
    }

    fn visit_bool<E>(self, v: bool) -> Result<Value, E> {
        Ok(Value::Bool(v))
    }

    fn visit_i64<E>(self, v: i64) -> Result<Value, E> {
        Ok(Value::from(v))
    }

    fn visit_u64<E>(self, v: u64) -> Result<Value, E> {
        Ok(Value::from(v))
    }

    fn visit_f64<E>(self, v: f64) -> Result<Value, E> {
        Ok(Value::from(v))
    }

    fn visit_str<E>(self, v: &str) -> Result<Value, E> {
        Ok(Value::String(v.to_owned()))
    }

    fn visit_unit<E>(self) -> Result<Value, E> {
        Ok(Value::Null)
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Value, A::Error> {
        let mut out = Vec::new();
        while let Some(UniqueKeys(v)) = seq.next_element()? {
            out.push(v);
        }
        Ok(Value::Array(out))
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Value, A::Error> {
        let mut out = Map::new();
        while let Some(key) = map.next_key::<String>()? {
            if out.contains_key(&key) {
                return Err(de::Error::custom(format!("duplicate key `{key}`")));
            }
            let UniqueKeys(v) = map.next_value()?;
            out.insert(key, v);
        }
        Ok(Value::Object(out))
    }
}

/// Parses JSON text, rejecting duplicate keys and non-object documents.
pub fn parse_document(text: &str) -> Result<Value, ConfigError> {
    let UniqueKeys(value) =
        serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    if !value.is_object() {
        return Err(ConfigError::Syntax(String::from(
            "top level must be a JSON object",
        )));
    }
    Ok(value)
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    from_value(&parse_document(text)?)
}

/// Sets the value at a dotted `path`, creating intermediate objects.
pub fn apply_override(doc: &mut Value, path: &str, value: Value) -> Result<(), String> {
    let mut parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("malformed override path `{path}`"));
    }
    let last = parts.pop().unwrap_or_default();
    let mut node = doc;
    for part in parts {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| format!("`{path}`: `{part}` is inside a non-object"))?;
        node = obj.entry(part).or_insert_with(|| Value::Object(Map::new()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| format!("`{path}` does not address an object member"))?;
    obj.insert(last.to_owned(), value);
    Ok(())
}

/// Interprets an override token as JSON, falling back to a bare string.
pub fn override_value(token: &str) -> Value {
    serde_json::from_str(token).unwrap_or_else(|_| Value::String(token.to_owned()))
}

// ---- key-level schema -------------------------------------------------------

const ROOT_KEYS: &[&str] = &[
    "seed",
    "graph",
    "dim",
    "variant",
    "dynamics",
    "gains",
    "integrator",
    "initial",
    "record_every",
    "output",
    "dump_states",
];
const ROOT_REQUIRED: &[&str] = &["graph", "dim", "variant", "dynamics", "gains", "integrator"];
const GRAPH_KEYS: &[&str] = &["family", "n", "edges"];
const DYNAMICS_KEYS: &[&str] = &["kind", "params", "rho1", "rho2", "fbar"];
const LIPSCHITZ_GAINS: &[&str] = &["kappa", "alpha", "gamma", "eta"];
const BOUNDED_GAINS: &[&str] = &["alpha", "eta", "acknowledged"];
const INTEGRATOR_KEYS: &[&str] = &["scheme", "dt", "duration", "signum"];
const SIGNUM_KEYS: &[&str] = &["mode", "epsilon"];
const INITIAL_KEYS: &[&str] = &[
    "agent_position",
    "agent_velocity",
    "filter_z",
    "filter_zdot",
    "reference_position",
    "reference_velocity",
    "reference_box",
];

fn kind_params(kind: &str) -> Option<&'static [&'static str]> {
    match kind {
        "zero" => Some(&[]),
        "linear_damped" | "pendulum" => Some(&["a", "b"]),
        "bounded_wave" => Some(&["c", "d", "omega"]),
        _ => None,
    }
}

fn check_keys(
    value: Option<&Value>,
    path: &str,
    allowed: &[&str],
    required: &[&str],
    issues: &mut Vec<String>,
) {
    let Some(value) = value else { return };
    let Some(map) = value.as_object() else {
        issues.push(format!("`{path}` must be an object"));
        return;
    };
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            issues.push(format!(
                "unknown key `{path}.{key}` (allowed: {})",
                allowed.join(", ")
            ));
        }
    }
    for key in required {
        if !map.contains_key(*key) {
            issues.push(format!("missing required key `{path}.{key}`"));
        }
    }
}

fn schema_issues(doc: &Value) -> Vec<String> {
    let mut issues = Vec::new();
    let root = doc.as_object().expect("checked by parse_document");
    for key in root.keys() {
        if !ROOT_KEYS.contains(&key.as_str()) {
            issues.push(format!(
                "unknown key `{key}` (allowed: {})",
                ROOT_KEYS.join(", ")
            ));
        }
    }
    for key in ROOT_REQUIRED {
        if !root.contains_key(*key) {
            issues.push(format!("missing required key `{key}`"));
        }
    }

    check_keys(root.get("graph"), "graph", GRAPH_KEYS, &["n"], &mut issues);
    check_keys(
        root.get("dynamics"),
        "dynamics",
        DYNAMICS_KEYS,
        &["kind"],
        &mut issues,
    );
    if let Some(kind) = root
        .get("dynamics")
        .and_then(|d| d.get("kind"))
        .and_then(Value::as_str)
    {
        match kind_params(kind) {
            Some(params) => {
                let given = root.get("dynamics").and_then(|d| d.get("params"));
                if given.is_none() && !params.is_empty() {
                    issues.push(format!("missing required key `dynamics.params` for kind `{kind}`"));
                }
                check_keys(given, "dynamics.params", params, params, &mut issues);
            }
            None => issues.push(format!(
                "unknown dynamics kind `{kind}` (expected zero, linear_damped, pendulum or bounded_wave)"
            )),
        }
    }

    let gain_keys: &[&str] = match root.get("variant").and_then(Value::as_str) {
        Some("lipschitz") => LIPSCHITZ_GAINS,
        Some("bounded") => BOUNDED_GAINS,
        Some(other) => {
            issues.push(format!(
                "unknown variant `{other}` (expected lipschitz or bounded)"
            ));
            &["kappa", "alpha", "gamma", "eta", "acknowledged"]
        }
        None => &["kappa", "alpha", "gamma", "eta", "acknowledged"],
    };
    let gain_required: Vec<&str> = gain_keys
        .iter()
        .copied()
        .filter(|k| *k != "acknowledged")
        .collect();
    check_keys(
        root.get("gains"),
        "gains",
        gain_keys,
        &gain_required,
        &mut issues,
    );

    check_keys(
        root.get("integrator"),
        "integrator",
        INTEGRATOR_KEYS,
        &["duration"],
        &mut issues,
    );
    check_keys(
        root.get("integrator").and_then(|i| i.get("signum")),
        "integrator.signum",
        SIGNUM_KEYS,
        &["mode"],
        &mut issues,
    );
    check_keys(
        root.get("initial"),
        "initial",
        INITIAL_KEYS,
        &[],
        &mut issues,
    );
    issues
}

// ---- typed documents --------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    seed: Option<u64>,
    graph: GraphDoc,
    dim: usize,
    variant: VariantDoc,
    dynamics: DynamicsDoc,
    gains: GainsDoc,
    integrator: IntegratorDoc,
    #[serde(default)]
    initial: InitialDoc,
    #[serde(default = "default_record_every")]
    record_every: u64,
    output: Option<String>,
    #[serde(default)]
    dump_states: bool,
}

fn default_record_every() -> u64 {
    DEFAULT_RECORD_EVERY
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    family: Option<FamilyDoc>,
    n: usize,
    edges: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FamilyDoc {
    Path,
    Ring,
    Complete,
    Star,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum VariantDoc {
    Lipschitz,
    Bounded,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DynamicsDoc {
    kind: String,
    #[serde(default)]
    params: Map<String, Value>,
    rho1: Option<f64>,
    rho2: Option<f64>,
    fbar: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GainsDoc {
    kappa: Option<f64>,
    alpha: Option<f64>,
    gamma: Option<f64>,
    eta: Option<f64>,
    acknowledged: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegratorDoc {
    #[serde(default)]
    scheme: SchemeDoc,
    #[serde(default = "default_dt")]
    dt: f64,
    duration: f64,
    signum: Option<SignumDoc>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SchemeDoc {
    #[default]
    Euler,
    Rk4,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignumDoc {
    mode: SignumMode,
    epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SignumMode {
    Exact,
    Smoothed,
}

type AgentRows = Option<Vec<Vec<f64>>>;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialDoc {
    agent_position: AgentRows,
    agent_velocity: AgentRows,
    filter_z: AgentRows,
    filter_zdot: AgentRows,
    reference_position: AgentRows,
    reference_velocity: AgentRows,
    reference_box: Option<[f64; 2]>,
}

// ---- semantic build ---------------------------------------------------------

/// Builds and validates a scenario from a parsed document, collecting every
/// violation.
pub fn from_value(doc: &Value) -> Result<ScenarioConfig, ConfigError> {
    let issues = schema_issues(doc);
    if !issues.is_empty() {
        return Err(ConfigError::Invalid(issues));
    }
    let typed: ScenarioDoc = serde_json::from_value(doc.clone())
        .map_err(|e| ConfigError::Invalid(vec![e.to_string()]))?;

    let mut v = Vec::new();
    let graph = build_graph(&typed.graph, &mut v);
    let dim = typed.dim;
    if dim == 0 {
        v.push(String::from("`dim` must be at least 1"));
    }
    let kind = build_kind(&typed.dynamics, &mut v);
    let gains = build_gains(typed.variant, &typed.gains, &mut v);
    let integrator = build_integrator(&typed.integrator, &mut v);

    let d = &typed.dynamics;
    let lipschitz = match (d.rho1, d.rho2) {
        (Some(r1), Some(r2)) => Some((r1, r2)),
        (None, None) => None,
        _ => {
            v.push(String::from(
                "`dynamics.rho1` and `dynamics.rho2` must be declared together",
            ));
            None
        }
    };
    for (name, value) in [("rho1", d.rho1), ("rho2", d.rho2), ("fbar", d.fbar)] {
        if value.is_some_and(|x| x < 0.0) {
            v.push(format!("`dynamics.{name}` must be non-negative"));
        }
    }

    let mut declaration = DeclarationCheck::default();
    let spec = kind.map(|kind| DynamicsSpec {
        kind,
        dim: dim.max(1),
        lipschitz,
        bound: d.fbar,
    });
    if let (Some(spec), true) = (&spec, dim > 0) {
        check_declared_constants(spec, &mut declaration, &mut v);
    }

    let initial = graph
        .as_ref()
        .filter(|_| dim > 0)
        .and_then(|g| build_initial(&typed.initial, g.node_count(), dim, typed.seed, &mut v));

    let (Some(graph), Some(spec), Some(gains), Some(integrator), Some(initial)) =
        (graph, spec, gains, integrator, initial)
    else {
        return Err(ConfigError::Invalid(v));
    };
    let problem = Problem {
        graph,
        dynamics: spec,
        gains,
        integrator,
        initial,
        record_every: typed.record_every,
        keep_states: typed.dump_states,
    };
    let report = problem.validate();
    v.extend(report.violations.iter().cloned());
    if let Some(out) = &typed.output {
        if out.trim().is_empty() {
            v.push(String::from("`output` must be a non-empty file stem"));
        }
    }
    if !v.is_empty() {
        return Err(ConfigError::Invalid(v));
    }
    Ok(ScenarioConfig {
        problem,
        seed: typed.seed,
        output: typed.output,
        dump_states: typed.dump_states,
        report,
        declaration,
    })
}

fn build_graph(doc: &GraphDoc, v: &mut Vec<String>) -> Option<Graph> {
    let n = doc.n;
    if n < 2 {
        v.push(format!("`graph.n` must be at least 2, got {n}"));
        return None;
    }
    match (doc.family, &doc.edges) {
        (Some(family), None) => {
            let family = match family {
                FamilyDoc::Path => GraphFamily::Path,
                FamilyDoc::Ring => GraphFamily::Ring,
                FamilyDoc::Complete => GraphFamily::Complete,
                FamilyDoc::Star => GraphFamily::Star,
            };
            Graph::family(family, n)
                .map_err(|e| v.push(format!("graph: {e}")))
                .ok()
        }
        (None, Some(edges)) => {
            let before = v.len();
            let mut zero_based = Vec::with_capacity(edges.len());
            for &[a, b] in edges {
                if a == 0 || b == 0 || a > n || b > n {
                    v.push(format!(
                        "graph edge [{a}, {b}] must use node numbers 1..={n}"
                    ));
                } else if a == b {
                    v.push(format!("graph edge [{a}, {b}] is a self-loop"));
                } else {
                    let pair = (a.min(b) - 1, a.max(b) - 1);
                    if zero_based.contains(&pair) {
                        v.push(format!("graph edge [{a}, {b}] is listed twice"));
                    }
                    zero_based.push(pair);
                }
            }
            if v.len() > before {
                return None;
            }
            Graph::from_edges(n, &zero_based)
                .map_err(|e| v.push(format!("graph: {e}")))
                .ok()
        }
        _ => {
            v.push(String::from(
                "`graph` needs exactly one of `family` or `edges`",
            ));
            None
        }
    }
}

fn build_kind(doc: &DynamicsDoc, v: &mut Vec<String>) -> Option<DynamicsKind> {
    let mut param = |name: &str| -> f64 {
        match doc.params.get(name).and_then(Value::as_f64) {
            Some(x) => x,
            None => {
                v.push(format!("`dynamics.params.{name}` must be a number"));
                f64::NAN
            }
        }
    };
    let kind = match doc.kind.as_str() {
        "zero" => DynamicsKind::Zero,
        "linear_damped" => DynamicsKind::LinearDamped {
            a: param("a"),
            b: param("b"),
        },
        "pendulum" => DynamicsKind::Pendulum {
            a: param("a"),
            b: param("b"),
        },
        "bounded_wave" => DynamicsKind::BoundedWave {
            c: param("c"),
            d: param("d"),
            omega: param("omega"),
        },
        _ => return None,
    };
    let finite = match kind {
        DynamicsKind::Zero => true,
        DynamicsKind::LinearDamped { a, b } | DynamicsKind::Pendulum { a, b } => {
            a.is_finite() && b.is_finite()
        }
        DynamicsKind::BoundedWave { c, d, omega } => {
            c.is_finite() && d.is_finite() && omega.is_finite()
        }
    };
    finite.then_some(kind)
}

fn build_gains(variant: VariantDoc, doc: &GainsDoc, v: &mut Vec<String>) -> Option<Gains> {
    let mut need = |name: &str, value: Option<f64>| {
        if value.is_none() {
            v.push(format!(
                "`gains.{name}` is required for the {} variant",
                variant_name(variant)
            ));
        }
        value
    };
    match variant {
        VariantDoc::Lipschitz => {
            let (kappa, alpha, gamma, eta) = (
                need("kappa", doc.kappa),
                need("alpha", doc.alpha),
                need("gamma", doc.gamma),
                need("eta", doc.eta),
            );
            Some(Gains::Lipschitz(GainSetLipschitz {
                kappa: kappa?,
                alpha: alpha?,
                gamma: gamma?,
                eta: eta?,
            }))
        }
        VariantDoc::Bounded => {
            let (alpha, eta) = (need("alpha", doc.alpha), need("eta", doc.eta));
            Some(Gains::Bounded(GainSetBounded {
                alpha: alpha?,
                eta: eta?,
                acknowledged: doc.acknowledged.unwrap_or(false),
            }))
        }
    }
}

fn variant_name(variant: VariantDoc) -> &'static str {
    match variant {
        VariantDoc::Lipschitz => Variant::Lipschitz.name(),
        VariantDoc::Bounded => Variant::Bounded.name(),
    }
}

fn build_integrator(doc: &IntegratorDoc, v: &mut Vec<String>) -> Option<IntegratorConfig> {
    let signum = match &doc.signum {
        None => SignumPolicy::Exact,
        Some(SignumDoc {
            mode: SignumMode::Exact,
            epsilon: None,
        }) => SignumPolicy::Exact,
        Some(SignumDoc {
            mode: SignumMode::Exact,
            epsilon: Some(_),
        }) => {
            v.push(String::from(
                "`integrator.signum.epsilon` only applies to mode `smoothed`",
            ));
            return None;
        }
        Some(SignumDoc {
            mode: SignumMode::Smoothed,
            epsilon,
        }) => match epsilon {
            Some(epsilon) => SignumPolicy::Smoothed { epsilon: *epsilon },
            None => SignumPolicy::smoothed(),
        },
    };
    let scheme = match doc.scheme {
        SchemeDoc::Euler => Scheme::Euler,
        SchemeDoc::Rk4 => Scheme::Rk4,
    };
    Some(IntegratorConfig {
        scheme,
        dt: doc.dt,
        duration: doc.duration,
        signum,
    })
}

fn check_declared_constants(
    spec: &DynamicsSpec,
    check: &mut DeclarationCheck,
    v: &mut Vec<String>,
) {
    let bounds = SampleBox::default();
    if let Some((rho1, rho2)) = spec.lipschitz {
        if let Ok(est) = estimate_lipschitz(spec, &bounds, DECLARATION_SAMPLES, DECLARATION_SEED) {
            if !est.conforms(rho1, rho2) {
                v.push(format!(
                    "declared (rho1, rho2) = ({rho1}, {rho2}) is below the sampled estimate ({}, {})",
                    est.rho1, est.rho2
                ));
            }
            check.lipschitz = Some(((rho1, rho2), est));
        }
    }
    if let Some(fbar) = spec.bound {
        if let Ok(observed) = check_bounded(spec, &bounds, DECLARATION_SAMPLES, DECLARATION_SEED) {
            if !bound_conforms(observed, fbar) {
                v.push(format!(
                    "declared fbar = {fbar} is below the sampled maximum {observed}"
                ));
            }
            check.bound = Some((fbar, observed));
        }
    }
}

fn fill_rows(
    rows: &AgentRows,
    name: &str,
    n: usize,
    dim: usize,
    out: &mut [f64],
    v: &mut Vec<String>,
) {
    let Some(rows) = rows else { return };
    if rows.len() != n || rows.iter().any(|r| r.len() != dim) {
        v.push(format!(
            "`initial.{name}` must have {n} rows of {dim} numbers"
        ));
        return;
    }
    for (dst, src) in out.chunks_mut(dim).zip(rows) {
        dst.copy_from_slice(src);
    }
}

fn build_initial(
    doc: &InitialDoc,
    n: usize,
    dim: usize,
    seed: Option<u64>,
    v: &mut Vec<String>,
) -> Option<SystemState> {
    let before = v.len();
    let mut s = SystemState::zeros(n, dim);
    if doc.reference_position.is_none() || doc.reference_velocity.is_none() {
        let [lo, hi] = doc.reference_box.unwrap_or(DEFAULT_REFERENCE_BOX);
        match seed {
            None => v.push(String::from(
                "`seed` is required when references are drawn at random (set it in the document or pass --seed)",
            )),
            Some(seed) => {
                if let Err(e) = s.draw_references(lo, hi, seed) {
                    v.push(format!("`initial.reference_box`: {e}"));
                }
            }
        }
    } else if doc.reference_box.is_some() {
        v.push(String::from(
            "`initial.reference_box` is unused when both reference rows are given",
        ));
    }
    fill_rows(&doc.agent_position, "agent_position", n, dim, &mut s.x, v);
    fill_rows(&doc.agent_velocity, "agent_velocity", n, dim, &mut s.v, v);
    fill_rows(&doc.filter_z, "filter_z", n, dim, &mut s.z, v);
    fill_rows(&doc.filter_zdot, "filter_zdot", n, dim, &mut s.zdot, v);
    fill_rows(
        &doc.reference_position,
        "reference_position",
        n,
        dim,
        &mut s.r,
        v,
    );
    fill_rows(
        &doc.reference_velocity,
        "reference_velocity",
        n,
        dim,
        &mut s.vr,
        v,
    );
    (v.len() == before).then_some(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "seed": 1,
        "graph": {"family": "ring", "n": 4},
        "dim": 2,
        "variant": "lipschitz",
        "dynamics": {"kind": "pendulum", "params": {"a": 1.0, "b": 0.5}, "rho1": 1.0, "rho2": 0.5},
        "gains": {"kappa": 2.0, "alpha": 3.5, "gamma": 0.5, "eta": 1.5},
        "integrator": {"duration": 1.0}
    }"#;

    fn violations(text: &str) -> Vec<String> {
        match parse_scenario(text) {
            Err(ConfigError::Invalid(v)) => v,
            other => panic!("expected violations, got {other:?}"),
        }
    }

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = parse_scenario(MINIMAL).unwrap();
        assert_eq!(cfg.problem.integrator.dt, 1e-3);
        assert_eq!(cfg.problem.integrator.signum, SignumPolicy::Exact);
        assert_eq!(cfg.problem.integrator.scheme, Scheme::Euler);
        assert_eq!(cfg.problem.record_every, 10);
        assert!(cfg.problem.initial.x.iter().all(|&x| x == 0.0));
        assert!(cfg
            .problem
            .initial
            .r
            .iter()
            .all(|r| (-1.0..1.0).contains(r)));
        assert!(cfg.report.gain_report.as_ref().unwrap().all_passed());
    }

    #[test]
    fn boundary_alpha_names_the_condition() {
        let text = MINIMAL.replace("\"alpha\": 3.5", "\"alpha\": 3.0");
        let v = violations(&text);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].contains("alpha > max{rho1, rho2} + kappa"));
    }

    #[test]
    fn bounded_filter_sum_violation() {
        let text = r#"{
            "seed": 1,
            "graph": {"family": "path", "n": 2},
            "dim": 1,
            "variant": "bounded",
            "dynamics": {"kind": "bounded_wave", "params": {"c": 0.4, "d": 0.6, "omega": 1.0}, "fbar": 1.0},
            "gains": {"alpha": 10.0, "eta": 5.0, "acknowledged": true},
            "integrator": {"duration": 1.0},
            "initial": {"filter_z": [[0.05], [0.05]]}
        }"#;
        let v = violations(text);
        assert_eq!(v.len(), 1, "{v:?}");
        assert!(v[0].contains("sum_i z_i(0) = 0"));
    }

    #[test]
    fn all_key_problems_are_reported_together() {
        let text = MINIMAL
            .replace("\"dim\"", "\"dimm\"")
            .replace("\"gamma\"", "\"gama\"")
            .replace("\"duration\"", "\"duraton\"");
        let v = violations(&text);
        assert!(v.iter().any(|m| m.contains("unknown key `dimm`")));
        assert!(v.iter().any(|m| m.contains("missing required key `dim`")));
        assert!(v.iter().any(|m| m.contains("gains.gama")));
        assert!(v
            .iter()
            .any(|m| m.contains("missing required key `gains.gamma`")));
        assert!(v.iter().any(|m| m.contains("integrator.duraton")));
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let text = MINIMAL.replace("\"seed\": 1,", "\"seed\": 1, \"seed\": 2,");
        assert!(
            matches!(parse_scenario(&text), Err(ConfigError::Syntax(m)) if m.contains("duplicate key"))
        );
    }

    #[test]
    fn missing_seed_with_random_references() {
        let text = MINIMAL.replace("\"seed\": 1,", "");
        assert!(violations(&text)[0].contains("`seed` is required"));
    }

    #[test]
    fn explicit_edges_are_one_based() {
        let text = MINIMAL.replace(
            "{\"family\": \"ring\", \"n\": 4}",
            "{\"n\": 4, \"edges\": [[1, 2], [2, 3], [3, 4], [4, 1]]}",
        );
        let cfg = parse_scenario(&text).unwrap();
        assert_eq!(
            cfg.problem.graph,
            Graph::family(GraphFamily::Ring, 4).unwrap()
        );
        let bad = MINIMAL.replace(
            "{\"family\": \"ring\", \"n\": 4}",
            "{\"n\": 4, \"edges\": [[0, 1], [2, 2]]}",
        );
        assert_eq!(violations(&bad).len(), 2);
    }

    #[test]
    fn under_declared_constants_are_caught() {
        let text = MINIMAL.replace("\"rho1\": 1.0", "\"rho1\": 0.5");
        let v = violations(&text);
        assert!(
            v.iter().any(|m| m.contains("below the sampled estimate")),
            "{v:?}"
        );
    }

    #[test]
    fn overrides_create_paths() {
        let mut doc = parse_document(MINIMAL).unwrap();
        apply_override(&mut doc, "gains.alpha", override_value("8")).unwrap();
        apply_override(
            &mut doc,
            "integrator.signum.mode",
            override_value("smoothed"),
        )
        .unwrap();
        let cfg = from_value(&doc).unwrap();
        assert_eq!(cfg.problem.integrator.signum, SignumPolicy::smoothed());
        match cfg.problem.gains {
            Gains::Lipschitz(g) => assert_eq!(g.alpha, 8.0),
            _ => unreachable!(),
        }
        assert!(apply_override(&mut doc, "dim.x", Value::Null).is_err());
    }
}
