//! TOML reports. Every report starts with `schema` and `command`.

use serde::Serialize;
use tamarkin_core::distances::ChainReport;
use tamarkin_core::lab::SuiteReport;
use tamarkin_core::relations::Certificate;
use tamarkin_core::{Extended, Scalar};

pub const SCHEMA: &str = "tamarkin-report/1";

#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub schema: &'static str,
    pub command: &'static str,
    #[serde(flatten)]
    pub body: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &'static str, body: T) -> Self {
        Report {
            schema: SCHEMA,
            command,
            body,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("reports are plain tables")
    }
}

#[derive(Debug, Serialize)]
pub struct DistInputs {
    pub f: String,
    pub g: String,
    pub f_bars: String,
    pub g_bars: String,
    pub kind: String,
    pub cap: usize,
}

#[derive(Debug, Serialize)]
pub struct DistEntry {
    pub kind: &'static str,
    /// `inf` when no certificate exists at any shift.
    pub value: Extended,
    pub exact: bool,
    pub attained: bool,
    pub lower: Extended,
    pub upper: Extended,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<Scalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Scalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

#[derive(Debug, Serialize)]
pub struct ChainVerdict {
    pub holds: bool,
    pub int_le_wisom: bool,
    pub wisom_le_isom: bool,
    pub isom_le_twice_wisom: bool,
}

impl From<&ChainReport> for ChainVerdict {
    fn from(r: &ChainReport) -> Self {
        ChainVerdict {
            holds: r.holds(),
            int_le_wisom: r.int_le_wisom,
            wisom_le_isom: r.wisom_le_isom,
            isom_le_twice_wisom: r.isom_le_twice_wisom,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DistBody {
    pub inputs: DistInputs,
    pub distances: Vec<DistEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainVerdict>,
}

#[derive(Debug, Serialize)]
pub struct BoundInputs {
    pub hamiltonian: String,
    pub cloud: String,
    pub dim: usize,
    /// The Hamiltonian after the cutoff was applied.
    pub expr: String,
    pub points: usize,
    pub f: String,
    pub grid_nodes: usize,
    pub step: f64,
}

#[derive(Debug, Serialize)]
pub struct BoundValues {
    /// `B(H, f, A)`.
    pub b: f64,
    /// `B(H, 0, A)`.
    pub b_zero_f: f64,
    /// `‖H‖_{osc,A}` over the fixed samples.
    pub osc_restricted: f64,
    /// The same with 0 joining the max and min candidates.
    pub osc_padded: f64,
    /// `∫ (max H_s - min H_s)` over the advected samples.
    pub osc_advected: f64,
    /// `c = ∫ f`.
    pub c: f64,
    pub note: &'static str,
}

#[derive(Debug, Serialize)]
pub struct BoundBody {
    pub inputs: BoundInputs,
    pub bound: BoundValues,
}

#[derive(Debug, Serialize)]
pub struct VerifyBody {
    pub passed: bool,
    pub scope: &'static str,
    #[serde(flatten)]
    pub report: SuiteReport,
}
