use crate::hamexpr::{smooth_step, smooth_step_slope};

use super::{NumericsError, Result};

/// `τ(u) = u (1 - S(u)) + S(u)` on `[0, 1]`, `u` below and 1 above.
/// It equals `u` near 0, is nondecreasing (`τ' = 1 - S + S' (1 - u) >= 0`)
/// and is smooth everywhere because `S` is flat at both ends.
fn tail(u: f64) -> (f64, f64) {
    if u <= 0.0 {
        (u, 1.0)
    } else if u >= 1.0 {
        (1.0, 0.0)
    } else {
        let s = smooth_step(u);
        (u * (1.0 - s) + s, 1.0 - s + smooth_step_slope(u) * (1.0 - u))
    }
}

/// A smooth nondecreasing `ρ_{a,b}` with `ρ(y) = y` on `[a - ε/4, b + ε/4]`
/// and values in `[a - ε/2, b + ε/2]`: below the identity window
/// `ρ(y) = lo - w τ((lo - y) / w)`, above it `hi + w τ((y - hi) / w)`, with
/// `w = ε/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothClamp {
    a: f64,
    b: f64,
    eps: f64,
}

pub fn smooth_clamp(a: f64, b: f64, eps: f64) -> Result<SmoothClamp> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(NumericsError::InvalidParameter(format!(
            "clamp needs finite a <= b, got a = {a}, b = {b}"
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(NumericsError::InvalidParameter(format!(
            "clamp needs eps > 0, got {eps}"
        )));
    }
    Ok(SmoothClamp { a, b, eps })
}

/// Value and partial derivatives of `ρ_{a,b}(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampJet {
    pub value: f64,
    pub dy: f64,
    pub da: f64,
    pub db: f64,
}

impl SmoothClamp {
    fn margin(&self) -> f64 {
        self.eps / 4.0
    }

    fn width(&self) -> f64 {
        self.eps / 4.0
    }

    pub fn apply(&self, y: f64) -> f64 {
        self.jet(y).value
    }

    pub fn derivative(&self, y: f64) -> f64 {
        self.jet(y).dy
    }

    /// The interval on which `ρ` is the identity.
    pub fn identity_region(&self) -> (f64, f64) {
        (self.a - self.margin(), self.b + self.margin())
    }

    pub fn jet(&self, y: f64) -> ClampJet {
        let (lo, hi) = self.identity_region();
        let w = self.width();
        if y < lo {
            let (t, dt) = tail((lo - y) / w);
            ClampJet {
                value: lo - w * t,
                dy: dt,
                da: 1.0 - dt,
                db: 0.0,
            }
        } else if y > hi {
            let (t, dt) = tail((y - hi) / w);
            ClampJet {
                value: hi + w * t,
                dy: dt,
                da: 0.0,
                db: 1.0 - dt,
            }
        } else {
            ClampJet {
                value: y,
                dy: 1.0,
                da: 0.0,
                db: 0.0,
            }
        }
    }
}
