use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// The constraint families of the joint ISAC problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintFamily {
    /// Beampattern gain towards a clutterer must stay below its threshold.
    ClutterLeakage,
    /// Gains towards sensing directions 2..D must stay within [γ_l, γ_u] × gain of direction 1.
    SensingBalance,
    /// Beampattern gain towards every sensing direction must reach its threshold.
    SensingGain,
    /// Per-user rate threshold.
    UserRate,
    /// Sum transmit power of the digital beamformer.
    TransmitPower,
    /// Polarizability magnitude range of the surface elements.
    PatternRange,
}

impl ConstraintFamily {
    pub const ALL: [ConstraintFamily; 6] = [
        ConstraintFamily::ClutterLeakage,
        ConstraintFamily::SensingBalance,
        ConstraintFamily::SensingGain,
        ConstraintFamily::UserRate,
        ConstraintFamily::TransmitPower,
        ConstraintFamily::PatternRange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstraintFamily::ClutterLeakage => "clutter_leakage",
            ConstraintFamily::SensingBalance => "sensing_balance",
            ConstraintFamily::SensingGain => "sensing_gain",
            ConstraintFamily::UserRate => "user_rate",
            ConstraintFamily::TransmitPower => "transmit_power",
            ConstraintFamily::PatternRange => "pattern_range",
        }
    }
}

impl fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Names the constraint families that make a subproblem infeasible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityReport {
    pub families: Vec<ConstraintFamily>,
    pub detail: String,
}

impl fmt::Display for InfeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.families.is_empty() {
            write!(f, "{}", self.detail)
        } else {
            let names: Vec<&str> = self.families.iter().map(|fam| fam.name()).collect();
            write!(f, "violated families [{}]: {}", names.join(", "), self.detail)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("singular linear system (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("neumann series does not converge: coupling norm {norm:.6} >= 1")]
    Divergent { norm: f64 },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("infeasible: {0}")]
    Infeasible(InfeasibilityReport),

    #[error("unbounded problem: {0}")]
    Unbounded(String),

    #[error("solver did not converge: {0}")]
    Solver(String),

    #[error("undefined sidelobe level: {0}")]
    UndefinedSidelobe(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Strips context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
