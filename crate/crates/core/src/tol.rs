//! Process-wide numeric knobs.
//!
//! All inequality decisions on q-values share one tolerance, [`eps`]. The
//! CLI may override it once at start-up; library users normally leave it at
//! [`DEFAULT_EPS`].

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

pub const DEFAULT_EPS: f64 = 1e-9;

/// Rank / singular-value cutoff for bases and for detecting singular `S`.
pub const RANK_TOL: f64 = 1e-10;

/// Range-membership and affine-membership tolerance.
pub const RANGE_TOL: f64 = 1e-8;

/// Off-diagonal mass at which the Jacobi sweep stops.
pub const JACOBI_TOL: f64 = 1e-12;

static EPS_BITS: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9
static Q_SIGN_FLIP: AtomicBool = AtomicBool::new(false);

pub fn eps() -> f64 {
    f64::from_bits(EPS_BITS.load(Ordering::Relaxed))
}

pub fn set_eps(value: f64) {
    assert!(value.is_finite() && value > 0.0, "tolerance must be positive");
    EPS_BITS.store(value.to_bits(), Ordering::Relaxed);
}

/// Mutation hook: when set, `q_value` returns `-½ bᵀSb`.
///
/// Exists only so the property suites can be shown to be non-vacuous; the CLI
/// exposes it behind a hidden flag and nothing else should touch it.
#[doc(hidden)]
pub fn set_q_sign_flip(on: bool) {
    Q_SIGN_FLIP.store(on, Ordering::Relaxed);
}

pub(crate) fn q_sign() -> f64 {
    if Q_SIGN_FLIP.load(Ordering::Relaxed) {
        -1.0
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bits_decode_to_1e_minus_9() {
        assert_eq!(f64::from_bits(0x3E11_2E0B_E826_D695), 1e-9);
        assert_eq!(DEFAULT_EPS, 1e-9);
    }
}
