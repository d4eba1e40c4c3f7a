//! Numerical tolerances.
//!
//! Every validating constructor has a `*_with` variant taking an explicit
//! [`ToleranceConfig`]; the plain variants read the process-wide value from
//! [`current`], which may be set once with [`set_global`].

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Max |m − m†| entry.
    pub herm: f64,
    /// Max |Tr − 1|.
    pub trace: f64,
    /// Max |U†U − 𝕀| entry.
    pub unitary: f64,
    /// Lowest admissible eigenvalue of a PSD matrix (negative).
    pub psd: f64,
    /// Probabilities at or below this are treated as impossible preparations.
    pub zero_prob: f64,
    /// Tolerance for regression comparisons against closed forms.
    pub golden: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            herm: 1e-9,
            trace: 1e-9,
            unitary: 1e-9,
            psd: -1e-10,
            zero_prob: 1e-12,
            golden: 1e-10,
        }
    }
}

impl ToleranceConfig {
    /// Scale all validation tolerances from one base value: herm, trace and
    /// unitary become `base`, the PSD floor becomes `-base / 10`.
    pub fn from_base(base: f64) -> Self {
        Self {
            herm: base,
            trace: base,
            unitary: base,
            psd: -base / 10.0,
            ..Self::default()
        }
    }
}

static GLOBAL: OnceLock<ToleranceConfig> = OnceLock::new();

/// Install the process-wide tolerances. Returns `false` if already set.
pub fn set_global(tol: ToleranceConfig) -> bool {
    GLOBAL.set(tol).is_ok()
}

pub fn current() -> ToleranceConfig {
    GLOBAL.get().copied().unwrap_or_default()
}
