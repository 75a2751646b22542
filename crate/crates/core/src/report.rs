//! Residual records shared by identity checks.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub identity: String,
    pub parameters: BTreeMap<String, f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Residual {
    pub fn new(identity: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Residual {
            identity: identity.into(),
            parameters: BTreeMap::new(),
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }
}
