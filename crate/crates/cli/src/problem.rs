//! JSON problem files.
//!
//! ```json
//! {
//!   "powers": [1.0, 1.0],
//!   "noise": 1.0,
//!   "utility": { "type": "linear", "weights": [2.0, 1.0] },
//!   "stepsize": { "rule": "diminishing", "alpha0": 0.1 },
//!   "max_iters": 10000,
//!   "tol": 1e-9
//! }
//! ```
//!
//! `utility` is required by `solve` only. `stepsize`, `max_iters` and `tol`
//! default to the diminishing rule with `alpha0 = 0.1`, `100000` and `1e-9`.
//! `weighted_log` utilities take an optional `epsilon` (default `0.01`).
//! Every field is validated while parsing, so errors carry the line and
//! column of the offending value.

use std::fmt;
use std::path::Path;

use macalloc::{
    ChannelConfigF64, LinearUtility, SolveSettingsF64, StepsizeRuleF64, Utility, WeightedLogUtility,
};
use serde::de::{self, Deserializer};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Positive(pub f64);

impl<'de> Deserialize<'de> for Positive {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        if x.is_finite() && x > 0.0 {
            Ok(Positive(x))
        } else {
            Err(de::Error::custom(format!(
                "expected a positive number, got {x}"
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonNegative(pub f64);

impl<'de> Deserialize<'de> for NonNegative {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        if x.is_finite() && x >= 0.0 {
            Ok(NonNegative(x))
        } else {
            Err(de::Error::custom(format!(
                "expected a nonnegative number, got {x}"
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Iterations(pub usize);

impl<'de> Deserialize<'de> for Iterations {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match u64::deserialize(d)? {
            0 => Err(de::Error::custom("max_iters must be at least 1")),
            n => usize::try_from(n)
                .map(Iterations)
                .map_err(|_| de::Error::custom(format!("max_iters {n} is too large"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilitySpec {
    Linear {
        weights: Vec<NonNegative>,
    },
    WeightedLog {
        weights: Vec<NonNegative>,
        epsilon: Option<Positive>,
    },
}

impl UtilitySpec {
    fn weights(&self) -> &[NonNegative] {
        match self {
            UtilitySpec::Linear { weights } | UtilitySpec::WeightedLog { weights, .. } => weights,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleName {
    Constant,
    Diminishing,
    TheoremCapped,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepsizeSpec {
    pub rule: RuleName,
    pub alpha0: Option<Positive>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub powers: Vec<Positive>,
    pub noise: Positive,
    pub utility: Option<UtilitySpec>,
    pub stepsize: Option<StepsizeSpec>,
    pub max_iters: Option<Iterations>,
    pub tol: Option<Positive>,
}

/// A parsed problem whose channel, utility and settings are all valid.
pub struct Problem {
    pub config: ChannelConfigF64,
    pub utility: Option<Box<dyn Utility<f64>>>,
    pub rule: StepsizeRuleF64,
    pub settings: SolveSettingsF64,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("config", &self.config)
            .field("has_utility", &self.utility.is_some())
            .field("rule", &self.rule)
            .field("settings", &self.settings)
            .finish()
    }
}

impl Problem {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses and validates problem text; `origin` prefixes error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let msg = match msg.rfind(" at line ") {
                Some(i) => msg[..i].to_string(),
                None => msg,
            };
            let (line, column) = match e.classify() {
                serde_json::error::Category::Data => value_position(text, e.line(), e.column()),
                _ => (e.line(), e.column()),
            };
            CliError::Validation(format!("{origin}:{line}:{column}: {msg}"))
        })?;
        let anchored = |key: &str, msg: String| {
            let line = key_line(text, key);
            CliError::Validation(format!("{origin}:{line}: {msg}"))
        };

        let powers: Vec<f64> = file.powers.iter().map(|p| p.0).collect();
        let config = ChannelConfigF64::new(powers, file.noise.0)
            .map_err(|e| anchored("powers", e.to_string()))?;
        let m = config.num_users();

        let utility: Option<Box<dyn Utility<f64>>> = match &file.utility {
            None => None,
            Some(spec) => {
                let weights: Vec<f64> = spec.weights().iter().map(|w| w.0).collect();
                if weights.len() != m {
                    return Err(anchored(
                        "weights",
                        format!("weights has {} entries but powers has {m}", weights.len()),
                    ));
                }
                let built: macalloc::Result<Box<dyn Utility<f64>>> = match spec {
                    UtilitySpec::Linear { .. } => {
                        LinearUtility::new(weights).map(|u| Box::new(u) as Box<dyn Utility<f64>>)
                    }
                    UtilitySpec::WeightedLog { epsilon, .. } => {
                        let eps =
                            epsilon.map_or(WeightedLogUtility::<f64>::DEFAULT_OFFSET, |e| e.0);
                        WeightedLogUtility::new(weights, eps).map(|u| Box::new(u) as _)
                    }
                };
                Some(built.map_err(|e| anchored("utility", e.to_string()))?)
            }
        };

        let rule = match file.stepsize {
            None => StepsizeRuleF64::diminishing(),
            Some(spec) => {
                let a = spec.alpha0.map_or(StepsizeRuleF64::DEFAULT_ALPHA0, |a| a.0);
                match spec.rule {
                    RuleName::Constant => StepsizeRuleF64::Constant { alpha: a },
                    RuleName::Diminishing => StepsizeRuleF64::Diminishing { alpha0: a },
                    RuleName::TheoremCapped => StepsizeRuleF64::TheoremCapped { alpha0: a },
                }
            }
        };

        let mut settings = SolveSettingsF64::default();
        if let Some(n) = file.max_iters {
            settings.max_iters = n.0;
        }
        if let Some(t) = file.tol {
            settings.tol = t.0;
        }
        Ok(Problem {
            config,
            utility,
            rule,
            settings,
        })
    }
}

/// serde_json positions validation errors just past the value, which can
/// spill onto the next line. Walks back to the last non-blank character at
/// or before the reported position.
fn value_position(text: &str, line: usize, column: usize) -> (usize, usize) {
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    let at = (line_start + column.saturating_sub(1)).min(text.len());
    let Some(end) = text[..at].rfind(|c: char| !c.is_whitespace() && c != '}' && c != ',') else {
        return (line, column);
    };
    let before = &text[..end];
    let l = before.matches('\n').count() + 1;
    let c = end - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (l, c)
}

/// One-based line of the first occurrence of `"key"`, or 1.
fn key_line(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.find(&needle)
        .map_or(1, |at| text[..at].matches('\n').count() + 1)
}
