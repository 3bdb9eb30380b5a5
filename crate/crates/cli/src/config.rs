//! TOML schema for `caloric perron`.
//!
//! ```toml
//! # Boundary data, an expression in x1..xN (or x) and t.
//! data = "x^2 + 2*t"
//!
//! [domain]
//! # Bounding box and node counts, ordered x1..xN then t.
//! lower = [-1.0, 0.0]
//! upper = [1.0, 1.0]
//! nodes = [41, 41]
//! # Optional: keep only points where this expression is negative.
//! level_set = "x^2 + (t - 0.5)^2 - 0.8"
//!
//! # Optional: restrict to a union of open boxes.
//! [[domain.boxes]]
//! lower = [-1.0, 0.0]
//! upper = [0.0, 1.0]
//!
//! # Optional: every key falls back to its default.
//! [sweep]
//! opening = 0.3
//! degree = 8
//! interpolation = "multilinear"   # or "quadratic"
//! tolerance = 1e-6
//! max_sweeps = 500
//! mode = "sequential"             # "parallel", "batched"
//! clamp = true
//! ```

use anyhow::{bail, Context, Result};
use caloric_core::perron::{DomainSpec, SweepConfig};
use caloric_core::Expression;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerronConfig {
    pub data: String,
    pub domain: DomainConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub nodes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boxes: Vec<BoxConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_set: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl PerronConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn dim(&self) -> Result<usize> {
        match self.domain.lower.len() {
            0 | 1 => bail!("domain.lower needs at least one spatial coordinate and a time"),
            n => Ok(n - 1),
        }
    }

    pub fn data(&self) -> Result<Expression> {
        let dim = self.dim()?;
        Expression::parse(&self.data, dim).with_context(|| format!("parsing data '{}'", self.data))
    }

    pub fn domain_spec(&self) -> Result<DomainSpec> {
        let d = &self.domain;
        let mut spec = DomainSpec::rectangle(d.lower.clone(), d.upper.clone(), d.nodes.clone())?;
        if !d.boxes.is_empty() {
            spec = spec.with_boxes(d.boxes.iter().map(|b| (b.lower.clone(), b.upper.clone())).collect())?;
        }
        if let Some(src) = &d.level_set {
            let f = Expression::parse(src, self.dim()?).with_context(|| format!("parsing level_set '{src}'"))?;
            spec = spec.with_level_set(f);
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_example_parses() {
        let text: String = include_str!("config.rs")
            .lines()
            .take_while(|l| l.starts_with("//!"))
            .skip_while(|l| !l.contains("```toml"))
            .skip(1)
            .take_while(|l| !l.contains("```"))
            .map(|l| l.trim_start_matches("//!").trim_start().to_string() + "\n")
            .collect();
        let config = PerronConfig::from_toml(&text).unwrap();
        assert_eq!(config.dim().unwrap(), 1);
        assert_eq!(config.domain.boxes.len(), 1);
        assert_eq!(config.sweep, SweepConfig::default());
        config.domain_spec().unwrap();
        config.data().unwrap();
    }

    #[test]
    fn sweep_section_is_optional() {
        let config = PerronConfig::from_toml(
            "data = \"1\"\n[domain]\nlower = [0.0, 0.0]\nupper = [1.0, 1.0]\nnodes = [5, 5]\n",
        )
        .unwrap();
        assert_eq!(config.sweep, SweepConfig::default());
        assert!(PerronConfig::from_toml("data = \"1\"\nextra = 2\n").is_err());
    }
}
