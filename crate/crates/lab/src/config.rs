//! Experiment configuration: a JSON document with a closed key set.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;
use shadowlab_core::fullsolve::{Method, SolverConfig};
use shadowlab_core::model::{ModelError, ModelSpec};
use shadowlab_core::stability::ProbeNorm;
use shadowlab_core::zoo::builtin_model;

const TOP_KEYS: &[&str] = &["model", "params", "eps_list", "alpha", "solver", "stability", "outputs", "seed"];
const SOLVER_KEYS: &[&str] = &["N", "dt", "T_cap", "method"];
const STABILITY_KEYS: &[&str] = &["probe_count", "T_probe", "mu", "p_norm", "r_exponent"];
const INLINE_MODEL_KEYS: &[&str] = &["diffusion", "f", "g", "u0", "v0"];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("/model: {0}")]
    Model(#[from] ModelError),
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Schema { pointer: pointer.into(), message: message.into() }
}

/// RFC 6901 escaping of one reference token.
fn escape_token(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineModel {
    pub diffusion: Vec<f64>,
    pub f: Vec<String>,
    pub g: String,
    pub u0: Vec<String>,
    pub v0: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelChoice {
    Builtin(String),
    Inline(InlineModel),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    #[serde(rename = "N")]
    pub n: usize,
    pub dt: f64,
    #[serde(rename = "T_cap")]
    pub t_cap: f64,
    pub method: MethodName,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { n: 128, dt: 1e-3, t_cap: 50.0, method: MethodName::Etd1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Etd1,
    Picard,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
enum PNormRaw {
    Text(String),
    Number(u32),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilitySection {
    pub probe_count: usize,
    #[serde(rename = "T_probe")]
    pub t_probe: f64,
    pub mu: f64,
    #[serde(deserialize_with = "p_norm")]
    pub p_norm: ProbeNormName,
    pub r_exponent: f64,
}

impl Default for StabilitySection {
    fn default() -> Self {
        StabilitySection { probe_count: 8, t_probe: 10.0, mu: 0.0, p_norm: ProbeNormName::Inf, r_exponent: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeNormName {
    Inf,
    Two,
}

impl ProbeNormName {
    pub fn norm(self) -> ProbeNorm {
        match self {
            ProbeNormName::Inf => ProbeNorm::Sup,
            ProbeNormName::Two => ProbeNorm::L2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ProbeNormName::Inf => "inf",
            ProbeNormName::Two => "2",
        }
    }
}

fn p_norm<'de, D: serde::Deserializer<'de>>(d: D) -> Result<ProbeNormName, D::Error> {
    match PNormRaw::deserialize(d)? {
        PNormRaw::Number(2) => Ok(ProbeNormName::Two),
        PNormRaw::Text(s) if s == "2" => Ok(ProbeNormName::Two),
        PNormRaw::Text(s) if s == "inf" => Ok(ProbeNormName::Inf),
        other => Err(serde::de::Error::custom(format!("expected \"inf\" or 2, got {other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelChoice,
    pub params: BTreeMap<String, f64>,
    pub eps_list: Vec<f64>,
    pub alpha: f64,
    pub solver: SolverSection,
    pub stability: StabilitySection,
    pub outputs: PathBuf,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: Value = serde_json::from_str(text)?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, ConfigError> {
        let Value::Object(mut top) = value else {
            return Err(schema("", "expected a JSON object"));
        };
        check_keys(&top, "", TOP_KEYS)?;
        for (key, allowed) in [("solver", SOLVER_KEYS), ("stability", STABILITY_KEYS)] {
            if let Some(section) = top.get(key) {
                let Value::Object(map) = section else {
                    return Err(schema(format!("/{key}"), "expected an object"));
                };
                check_keys(map, &format!("/{key}"), allowed)?;
            }
        }

        let model = match top.remove("model") {
            None => return Err(schema("/model", "missing required key")),
            Some(Value::String(name)) => ModelChoice::Builtin(name),
            Some(Value::Object(map)) => {
                check_keys(&map, "/model", INLINE_MODEL_KEYS)?;
                ModelChoice::Inline(typed(Value::Object(map), "/model")?)
            }
            Some(_) => return Err(schema("/model", "expected a built-in model name or an inline model object")),
        };
        let eps_list: Vec<f64> = match top.remove("eps_list") {
            None => return Err(schema("/eps_list", "missing required key")),
            Some(v) => typed(v, "/eps_list")?,
        };
        let field = |top: &mut serde_json::Map<String, Value>, key: &str| top.remove(key).map(|v| (v, format!("/{key}")));

        let params = match field(&mut top, "params") {
            Some((v, p)) => typed(v, &p)?,
            None => BTreeMap::new(),
        };
        let alpha = match field(&mut top, "alpha") {
            Some((v, p)) => typed(v, &p)?,
            None => 1.0,
        };
        let solver = match field(&mut top, "solver") {
            Some((v, p)) => typed(v, &p)?,
            None => SolverSection::default(),
        };
        let stability = match field(&mut top, "stability") {
            Some((v, p)) => typed(v, &p)?,
            None => StabilitySection::default(),
        };
        let outputs = match field(&mut top, "outputs") {
            Some((v, p)) => typed(v, &p)?,
            None => PathBuf::from("out"),
        };
        let seed = match field(&mut top, "seed") {
            Some((v, p)) => typed(v, &p)?,
            None => 0,
        };
        let cfg = ExperimentConfig { model, params, eps_list, alpha, solver, stability, outputs, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.eps_list.is_empty() {
            return Err(schema("/eps_list", "must not be empty"));
        }
        if let Some(i) = self.eps_list.iter().position(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(schema(format!("/eps_list/{i}"), "epsilon must be positive and finite"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(schema("/alpha", "must lie in (0, 1]"));
        }
        let s = &self.solver;
        if s.n < 2 {
            return Err(schema("/solver/N", "need at least 2 modes"));
        }
        if !(s.dt > 0.0 && s.dt.is_finite()) {
            return Err(schema("/solver/dt", "must be positive"));
        }
        if !(s.t_cap >= s.dt && s.t_cap.is_finite()) {
            return Err(schema("/solver/T_cap", "must be finite and at least dt"));
        }
        let st = &self.stability;
        if st.probe_count == 0 {
            return Err(schema("/stability/probe_count", "must be positive"));
        }
        if !(st.t_probe >= s.dt && st.t_probe.is_finite()) {
            return Err(schema("/stability/T_probe", "must be finite and at least dt"));
        }
        if !(st.mu >= 0.0 && st.mu.is_finite()) {
            return Err(schema("/stability/mu", "must be finite and non-negative"));
        }
        if !(st.r_exponent >= 1.0 && st.r_exponent.is_finite()) {
            return Err(schema("/stability/r_exponent", "must be finite and at least 1"));
        }
        if let Some((k, _)) = self.params.iter().find(|(_, v)| !v.is_finite()) {
            return Err(schema(format!("/params/{}", escape_token(k)), "must be finite"));
        }
        self.model_spec()?;
        Ok(())
    }

    pub fn model_name(&self) -> &str {
        match &self.model {
            ModelChoice::Builtin(name) => name,
            ModelChoice::Inline(_) => "inline",
        }
    }

    pub fn model_spec(&self) -> Result<ModelSpec, ConfigError> {
        Ok(match &self.model {
            ModelChoice::Builtin(name) => builtin_model(name, &self.params)?,
            ModelChoice::Inline(m) => {
                let f: Vec<&str> = m.f.iter().map(String::as_str).collect();
                let u0: Vec<&str> = m.u0.iter().map(String::as_str).collect();
                ModelSpec::parse(&m.diffusion, &f, &m.g, &u0, &m.v0, self.params.clone())?
            }
        })
    }

    pub fn method(&self) -> Method {
        match self.solver.method {
            MethodName::Etd1 => Method::Etd1,
            MethodName::Picard => Method::Picard,
        }
    }

    /// Solver settings for horizon `t_end`. The Picard oracle runs on a
    /// uniform grid, so layer refinement is disabled with it.
    pub fn solver_config(&self, t_end: f64) -> SolverConfig {
        SolverConfig {
            n: self.solver.n,
            dt: self.solver.dt,
            t_end,
            method: self.method(),
            resolve_layer: self.method() == Method::Etd1,
            ..SolverConfig::default()
        }
    }

    /// `min(eps^(alpha - 1), T_cap)`, never below one step.
    pub fn horizon(&self, epsilon: f64) -> f64 {
        shadowlab_core::analysis::horizon(self.alpha, epsilon).min(self.solver.t_cap).max(self.solver.dt)
    }
}

fn check_keys(map: &serde_json::Map<String, Value>, prefix: &str, allowed: &[&str]) -> Result<(), ConfigError> {
    match map.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(format!("{prefix}/{}", escape_token(k)), "unknown key")),
        None => Ok(()),
    }
}

fn typed<T: serde::de::DeserializeOwned>(value: Value, prefix: &str) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let mut pointer = String::from(prefix);
        for seg in e.path().iter() {
            use serde_path_to_error::Segment;
            match seg {
                Segment::Seq { index } => pointer.push_str(&format!("/{index}")),
                Segment::Map { key } => pointer.push_str(&format!("/{}", escape_token(key))),
                Segment::Enum { variant } => pointer.push_str(&format!("/{}", escape_token(variant))),
                Segment::Unknown => {}
            }
        }
        schema(pointer, e.into_inner().to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pointer_of(text: &str) -> String {
        match ExperimentConfig::from_json(text) {
            Err(ConfigError::Schema { pointer, .. }) => pointer,
            other => panic!("expected a schema error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"model":"predator-prey","eps_list":[0.1,0.01]}"#).unwrap();
        assert_eq!(cfg.solver, SolverSection { n: 128, dt: 1e-3, t_cap: 50.0, method: MethodName::Etd1 });
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.alpha, 1.0);
        assert_eq!(cfg.stability, StabilitySection::default());
        assert_eq!(cfg.outputs, PathBuf::from("out"));
        assert_eq!(cfg.eps_list, vec![0.1, 0.01]);
    }

    #[test]
    fn unknown_keys_are_reported_with_pointers() {
        assert_eq!(pointer_of(r#"{"model":"predator-prey","eps_list":[0.1],"colour":1}"#), "/colour");
        assert_eq!(pointer_of(r#"{"model":"predator-prey","eps_list":[0.1],"solver":{"n":4}}"#), "/solver/n");
        assert_eq!(pointer_of(r#"{"model":"predator-prey","eps_list":[0.1],"stability":{"a/b":4}}"#), "/stability/a~1b");
        let inline = r#"{"model":{"diffusion":[0],"f":["0"],"g":"0","u0":["0"],"v0":"0","h":"1"},"eps_list":[0.1]}"#;
        assert_eq!(pointer_of(inline), "/model/h");
    }

    #[test]
    fn type_errors_point_into_the_document() {
        assert_eq!(pointer_of(r#"{"model":"predator-prey","eps_list":[0.1,"x"]}"#), "/eps_list/1");
        assert_eq!(pointer_of(r#"{"model":"predator-prey","eps_list":[0.1],"solver":{"dt":"big"}}"#), "/solver/dt");
        assert_eq!(pointer_of(r#"{"model":"predator-prey","eps_list":[0.1],"solver":{"method":"rk4"}}"#), "/solver/method");
        assert_eq!(pointer_of(r#"{"model":"predator-prey","eps_list":[0.1],"stability":{"p_norm":3}}"#), "/stability/p_norm");
    }

    #[test]
    fn value_checks() {
        assert_eq!(pointer_of(r#"{"model":"predator-prey","eps_list":[]}"#), "/eps_list");
        assert_eq!(pointer_of(r#"{"model":"predator-prey","eps_list":[0.1,-1]}"#), "/eps_list/1");
        assert_eq!(pointer_of(r#"{"model":"predator-prey","eps_list":[0.1],"alpha":0}"#), "/alpha");
        assert_eq!(pointer_of(r#"{"eps_list":[0.1]}"#), "/model");
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"model":"nope","eps_list":[0.1]}"#),
            Err(ConfigError::Model(ModelError::UnknownBuiltin(_)))
        ));
    }

    #[test]
    fn inline_two_component_model_validates() {
        let text = r#"{
            "model": {"diffusion": [0, 0.1], "f": ["-u1 + v", "u1 - k*u2"], "g": "-v + u2",
                      "u0": ["1", "cos(pi*x)"], "v0": "0.5"},
            "params": {"k": 2},
            "eps_list": [0.1], "stability": {"p_norm": "2"}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.model_spec().unwrap().m(), 2);
        assert_eq!(cfg.stability.p_norm, ProbeNormName::Two);
        let bad = text.replace(r#""f": ["-u1 + v", "u1 - k*u2"]"#, r#""f": ["-u1 + v"]"#);
        assert!(matches!(ExperimentConfig::from_json(&bad), Err(ConfigError::Model(_))));
    }

    #[test]
    fn horizon_is_capped() {
        let cfg = ExperimentConfig::from_json(r#"{"model":"predator-prey","eps_list":[0.1],"alpha":0.5,"solver":{"T_cap":20}}"#)
            .unwrap();
        assert!((cfg.horizon(0.01) - 10.0).abs() < 1e-12);
        assert_eq!(cfg.horizon(1e-4), 20.0);
    }
}
