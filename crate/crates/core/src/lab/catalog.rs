//! Fixed inputs for the lab suites, with hand-computed integrals.

use std::f64::consts::PI;

/// A point-model case: `h` and `f` in `s` only, with `c_h = ∫ h`,
/// `c = ∫ f` and `bound = ∫ |h - f|` worked out by hand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCase {
    pub label: &'static str,
    pub h: &'static str,
    pub f: &'static str,
    pub c_h: f64,
    pub c: f64,
    pub bound: f64,
}

impl PointCase {
    /// Whether `|c_h - c| = ∫ |h - f|`, i.e. `h - f` never changes sign.
    pub fn is_tight(&self) -> bool {
        ((self.c_h - self.c).abs() - self.bound).abs() < 1e-12
    }
}

pub fn point_cases() -> Vec<PointCase> {
    let tau = 2.0 / PI;
    vec![
        PointCase { label: "zero", h: "0", f: "0", c_h: 0.0, c: 0.0, bound: 0.0 },
        PointCase { label: "unit", h: "1", f: "0", c_h: 1.0, c: 0.0, bound: 1.0 },
        PointCase { label: "f=h linear", h: "s", f: "s", c_h: 0.5, c: 0.5, bound: 0.0 },
        PointCase { label: "linear", h: "s", f: "0", c_h: 0.5, c: 0.0, bound: 0.5 },
        PointCase { label: "sine", h: "sin(2*pi*s)", f: "0", c_h: 0.0, c: 0.0, bound: tau },
        PointCase { label: "f=h sine", h: "sin(2*pi*s)", f: "sin(2*pi*s)", c_h: 0.0, c: 0.0, bound: 0.0 },
        PointCase { label: "unit vs linear", h: "1", f: "s", c_h: 1.0, c: 0.5, bound: 0.5 },
        PointCase { label: "constants", h: "2", f: "-1", c_h: 2.0, c: -1.0, bound: 3.0 },
        PointCase { label: "crossing lines", h: "s", f: "1 - s", c_h: 0.5, c: 0.5, bound: 0.5 },
        PointCase { label: "tent", h: "1 - abs(2*s - 1)", f: "0", c_h: 0.5, c: 0.0, bound: 0.5 },
        PointCase { label: "tent vs half", h: "1 - abs(2*s - 1)", f: "1/2", c_h: 0.5, c: 0.5, bound: 0.25 },
        PointCase { label: "lifted sine", h: "sin(2*pi*s) + 1", f: "1", c_h: 1.0, c: 1.0, bound: tau },
    ]
}

/// One-degree-of-freedom Hamiltonians with closed-form flows.
#[derive(Debug, Clone, Copy)]
pub struct ExactFlow {
    pub h: &'static str,
    /// `φ^H_s(q, p)`.
    pub flow: fn(f64, f64, f64) -> (f64, f64),
}

fn rotate(q: f64, p: f64, angle: f64) -> (f64, f64) {
    let (sn, cs) = angle.sin_cos();
    (q * cs + p * sn, -q * sn + p * cs)
}

pub fn exact_flows() -> Vec<ExactFlow> {
    vec![
        ExactFlow {
            h: "(1 + s)*(q1^2 + p1^2)/2",
            flow: |q, p, s| rotate(q, p, s + s * s / 2.0),
        },
        ExactFlow {
            h: "q1*p1",
            flow: |q, p, s| (q * s.exp(), p * (-s).exp()),
        },
        ExactFlow {
            h: "cos(s)*(q1^2 + p1^2)/2",
            flow: |q, p, s| rotate(q, p, s.sin()),
        },
    ]
}

/// Compactly supported one-degree-of-freedom Hamiltonians, with a radius
/// enclosing their supports.
pub fn compact_hamiltonians() -> Vec<(&'static str, f64)> {
    vec![
        ("(q1^2 + p1^2)/2*bump(q1^2 + p1^2; 9)", 3.0),
        ("sin(2*pi*s)*q1*bump(q1^2 + p1^2; 9)", 3.0),
        ("(s*p1^2 - q1^3/3)*bump(q1^2 + p1^2; 16)", 4.0),
    ]
}

/// Two-parameter families `G_{s',s}` in one degree of freedom.
pub fn two_param_families() -> Vec<&'static str> {
    vec![
        "sp*(q1^2 + p1^2)/2",
        "sp*(q1^2*p1 + p1^2/2)",
        "sp*q1^2*p1 + s*p1^2 + sin(sp*s)*q1",
    ]
}
