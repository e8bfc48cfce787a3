use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::facts::ExternalFactTable;
use crate::rational::{self, ExactRational};

pub const DEFAULT_HEIGHT: u64 = 10_000;
pub const DEFAULT_FACTOR_BOUND: u64 = 1 << 62;
pub const DEFAULT_PADIC_PRECISION: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub height: u64,
    pub factor_bound: u64,
    pub precision: usize,
    pub padic_precision: u32,
    pub allow_external_facts: bool,
    pub format: Format,
    pub cache: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            height: DEFAULT_HEIGHT,
            factor_bound: DEFAULT_FACTOR_BOUND,
            precision: crate::diagnostics::DEFAULT_PRECISION,
            padic_precision: DEFAULT_PADIC_PRECISION,
            allow_external_facts: false,
            format: Format::Json,
            cache: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.height == 0 {
            return Err(Error::InvalidParameter("--height must be positive".into()));
        }
        if self.factor_bound < 2 {
            return Err(Error::InvalidParameter("--factor-bound must be at least 2".into()));
        }
        if self.precision == 0 || self.padic_precision == 0 {
            return Err(Error::InvalidParameter("precisions must be positive".into()));
        }
        Ok(())
    }

    pub fn facts(&self) -> Option<ExternalFactTable> {
        self.allow_external_facts.then(ExternalFactTable::builtin)
    }

    /// Inputs are factored by trial division; refuse anything larger than
    /// the configured bound up front.
    pub fn check_factorable(&self, name: &str, n: i64) -> Result<()> {
        if n.unsigned_abs() > self.factor_bound {
            return Err(Error::FactorizationBudget(format!("{name} = {n} exceeds --factor-bound {}", self.factor_bound)));
        }
        Ok(())
    }
}

/// `"NxM"` with positive parts.
pub fn parse_grid(s: &str) -> std::result::Result<(u32, u32), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected NxM, got {s:?}"))?;
    let a: u32 = a.trim().parse().map_err(|_| format!("bad grid size {a:?}"))?;
    let b: u32 = b.trim().parse().map_err(|_| format!("bad grid size {b:?}"))?;
    if a == 0 || b == 0 {
        return Err("grid sizes must be positive".into());
    }
    Ok((a, b))
}

/// `"lo,hi"` with rational endpoints and `lo < hi`.
pub fn parse_interval(s: &str) -> std::result::Result<(ExactRational, ExactRational), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
    let lo = rational::parse(lo).map_err(|e| e.to_string())?;
    let hi = rational::parse(hi).map_err(|e| e.to_string())?;
    if lo >= hi {
        return Err("interval needs lo < hi".into());
    }
    Ok((lo, hi))
}

pub fn parse_rational(s: &str) -> std::result::Result<ExactRational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}
