//! Flat key-value configuration files for runs and sweeps.
//!
//! Format: one `key = value` pair per line, `#` comments, blank lines
//! ignored. Dotted keys group the scaling parameters. Example:
//!
//! ```text
//! problem = scalar
//! mu = 1.0
//! scaling.variant = finite
//! scaling.eta = 1.0
//! scaling.lambda = 0.5
//! magnitudes = 0.1, 1, 10
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{FtError, Result};
use crate::experiments::{ExperimentConfig, ProblemKind};
use crate::scaling::ScalingParams;

const KNOWN_KEYS: &[&str] = &[
    "problem",
    "seed",
    "n",
    "d",
    "mu",
    "scaling.variant",
    "scaling.eta",
    "scaling.lambda",
    "scaling.eta1",
    "scaling.eta2",
    "scaling.lambda1",
    "scaling.lambda2",
    "t_max",
    "rel_tol",
    "abs_tol",
    "stop_field_norm",
    "settle_delta",
    "magnitudes",
];

fn config_err(line: usize, msg: impl Into<String>) -> FtError {
    FtError::Config(format!("line {line}: {}", msg.into()))
}

/// Parses configuration text into key-value pairs with line numbers.
fn tokenize(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(lineno, format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(config_err(lineno, format!("unknown key `{key}`")));
        }
        if value.is_empty() {
            return Err(config_err(lineno, format!("empty value for key `{key}`")));
        }
        if let Some((_, (prev, _))) = map.iter().find(|(k, _)| **k == key) {
            return Err(config_err(
                lineno,
                format!("duplicate key `{key}` (first set on line {prev})"),
            ));
        }
        map.insert(key, (lineno, value));
    }
    Ok(map)
}

fn parse_f64(key: &str, line: usize, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| config_err(line, format!("key `{key}`: expected a number, got `{value}`")))
}

fn parse_usize(key: &str, line: usize, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| {
            config_err(line, format!("key `{key}`: expected a nonnegative integer, got `{value}`"))
        })
}

/// Parses and validates a configuration. `problem` and `mu` are required;
/// everything else has defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let map = tokenize(text)?;
    let get = |key: &str| map.get(key);

    let mut cfg = ExperimentConfig::default();

    let (line, value) = get("problem")
        .ok_or_else(|| FtError::Config("missing required key: problem".into()))?;
    cfg.problem = match value.as_str() {
        "scalar" => ProblemKind::Scalar,
        "fused_lasso" => ProblemKind::FusedLasso,
        "qp" => ProblemKind::Qp,
        other => {
            return Err(config_err(
                *line,
                format!("key `problem`: expected one of scalar, fused_lasso, qp; got `{other}`"),
            ))
        }
    };
    let (line, value) =
        get("mu").ok_or_else(|| FtError::Config("missing required key: mu".into()))?;
    cfg.mu = parse_f64("mu", *line, value)?;

    if let Some((line, value)) = get("seed") {
        cfg.seed = value.parse::<u64>().map_err(|_| {
            config_err(*line, format!("key `seed`: expected an unsigned integer, got `{value}`"))
        })?;
    }
    if let Some((line, value)) = get("n") {
        cfg.n = parse_usize("n", *line, value)?;
    } else {
        cfg.n = default_n(cfg.problem);
    }
    if let Some((line, value)) = get("d") {
        cfg.d = parse_usize("d", *line, value)?;
    }

    let variant = match get("scaling.variant") {
        None => "none".to_string(),
        Some((line, value)) => match value.as_str() {
            "none" | "finite" | "fixed" => value.clone(),
            other => {
                return Err(config_err(
                    *line,
                    format!(
                        "key `scaling.variant`: expected one of none, finite, fixed; got `{other}`"
                    ),
                ))
            }
        },
    };
    let scaling_key = |key: &'static str| -> Result<f64> {
        match get(key) {
            Some((line, value)) => parse_f64(key, *line, value),
            None => Err(FtError::Config(format!(
                "missing required key: {key} (scaling.variant = {variant})"
            ))),
        }
    };
    let reject_if_present = |keys: &[&str]| -> Result<()> {
        for key in keys {
            if let Some((line, _)) = get(key) {
                return Err(config_err(
                    *line,
                    format!("key `{key}` is not used with scaling.variant = {variant}"),
                ));
            }
        }
        Ok(())
    };
    cfg.scaling = match variant.as_str() {
        "none" => {
            reject_if_present(&[
                "scaling.eta",
                "scaling.lambda",
                "scaling.eta1",
                "scaling.eta2",
                "scaling.lambda1",
                "scaling.lambda2",
            ])?;
            ScalingParams::None
        }
        "finite" => {
            reject_if_present(&[
                "scaling.eta1",
                "scaling.eta2",
                "scaling.lambda1",
                "scaling.lambda2",
            ])?;
            ScalingParams::Finite {
                eta: scaling_key("scaling.eta")?,
                lambda: scaling_key("scaling.lambda")?,
            }
        }
        _ => {
            reject_if_present(&["scaling.eta", "scaling.lambda"])?;
            ScalingParams::Fixed {
                eta1: scaling_key("scaling.eta1")?,
                eta2: scaling_key("scaling.eta2")?,
                lambda1: scaling_key("scaling.lambda1")?,
                lambda2: scaling_key("scaling.lambda2")?,
            }
        }
    };

    if let Some((line, value)) = get("t_max") {
        cfg.integrator.t_max = parse_f64("t_max", *line, value)?;
    }
    if let Some((line, value)) = get("rel_tol") {
        cfg.integrator.rel_tol = parse_f64("rel_tol", *line, value)?;
    }
    if let Some((line, value)) = get("abs_tol") {
        cfg.integrator.abs_tol = parse_f64("abs_tol", *line, value)?;
    }
    if let Some((line, value)) = get("stop_field_norm") {
        cfg.integrator.stop_field_norm = parse_f64("stop_field_norm", *line, value)?;
    }
    if let Some((line, value)) = get("settle_delta") {
        cfg.settle_delta = parse_f64("settle_delta", *line, value)?;
    }
    if let Some((line, value)) = get("magnitudes") {
        let mut mags = Vec::new();
        for part in value.split(',') {
            let part = part.trim();
            if part.is_empty() {
                return Err(config_err(*line, "key `magnitudes`: empty entry in list"));
            }
            mags.push(parse_f64("magnitudes", *line, part)?);
        }
        cfg.magnitudes = mags;
    }

    cfg.validate().map_err(|e| FtError::Config(e.to_string()))?;
    Ok(cfg)
}

/// Default primal dimension per problem family when `n` is absent.
pub fn default_n(problem: ProblemKind) -> usize {
    match problem {
        ProblemKind::Scalar => 1,
        ProblemKind::FusedLasso => 40,
        ProblemKind::Qp => 20,
    }
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}
