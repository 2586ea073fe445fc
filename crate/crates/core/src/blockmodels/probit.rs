//! Standard normal CDF and its logarithms, stable far into both tails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

/// Past this point the lower tail is evaluated through the Mills ratio.
const TAIL: f64 = 6.0;

/// Standard normal CDF.
#[inline]
pub fn probit(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// `ln Phi(x)`.
#[inline]
pub fn log_probit(x: f64) -> f64 {
    if x > 0.0 {
        (-0.5 * erfc(x * FRAC_1_SQRT_2)).ln_1p()
    } else if x > -TAIL {
        (0.5 * erfc(-x * FRAC_1_SQRT_2)).ln()
    } else {
        log_lower_tail(-x)
    }
}

/// `ln(1 - Phi(x))`, computed as `ln Phi(-x)`.
#[inline]
pub fn log_one_minus_probit(x: f64) -> f64 {
    log_probit(-x)
}

/// `ln(1 - Phi(t))` for `t >= TAIL`: `ln phi(t) + ln R(t)` where the Mills
/// ratio `R(t) = 1/(t + 1/(t + 2/(t + 3/(t + ...))))` is evaluated by a
/// backward continued-fraction recurrence.
fn log_lower_tail(t: f64) -> f64 {
    let mut frac = t;
    for k in (1..=40).rev() {
        frac = t + k as f64 / frac;
    }
    -0.5 * t * t - 0.5 * (2.0 * PI).ln() - frac.ln()
}
