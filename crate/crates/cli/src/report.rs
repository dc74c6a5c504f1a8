//! Serialized shapes of the CLI outputs.

use kloost::counting::ObstructionPolynomial;
use kloost::KloostermanValue;
use serde::Serialize;

pub const FAMILY_HEADER: [&str; 5] = ["chi_index", "t_chi", "in_S", "value", "theta"];

#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub p: u64,
    pub k: u32,
    pub q: u64,
    pub a: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Metadata {
    pub fn new(p: u64, k: u32, q: u64, a: Vec<i64>, seed: Option<u64>) -> Self {
        Self {
            tool: Self::tool(),
            p,
            k,
            q,
            a,
            seed,
        }
    }

    pub fn tool() -> String {
        format!("kloost {}", env!("CARGO_PKG_VERSION"))
    }

    /// `key: value` pairs for the `#` block at the top of a CSV file.
    pub fn comment_lines(&self) -> Vec<(&'static str, String)> {
        let a: Vec<String> = self.a.iter().map(i64::to_string).collect();
        let mut out = vec![
            ("tool", self.tool.clone()),
            ("p", self.p.to_string()),
            ("k", self.k.to_string()),
            ("q", self.q.to_string()),
            ("a", a.join(",")),
        ];
        if let Some(seed) = self.seed {
            out.push(("seed", seed.to_string()));
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalMethod {
    pub method: &'static str,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub bound_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl EvalMethod {
    pub fn new(v: &KloostermanValue, elapsed_ms: Option<f64>) -> Self {
        Self {
            method: v.method.as_str(),
            re: v.re,
            im: v.im,
            abs: v.abs(),
            bound_margin: v.bound_margin(),
            elapsed_ms,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    pub metadata: Metadata,
    pub b: i64,
    pub chi_index: u64,
    pub t_chi: Option<u64>,
    /// `t_chi^2 + 4ab` is a unit mod `p`.
    #[serde(rename = "in_S")]
    pub in_s: Option<bool>,
    pub bound: f64,
    pub methods: Vec<EvalMethod>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentEntry {
    pub m: u32,
    /// Sum over the used characters divided by `q`.
    pub value: f64,
    /// The same sum divided by the number of characters used.
    pub value_used: f64,
    pub limit: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistReport {
    pub metadata: Metadata,
    pub q: u64,
    pub a: i64,
    pub n_characters: u64,
    #[serde(rename = "n_in_S")]
    pub n_in_s: u64,
    pub excluded_count: u64,
    pub sq_filter: bool,
    pub n_used: u64,
    pub zero_count: u64,
    pub ks_distance: f64,
    pub ks_distance_sato_tate: f64,
    /// KS distance of an i.i.d. sample from `mu` of the same size.
    pub ks_reference_sample: f64,
    pub zero_fraction: f64,
    pub out_of_band: u64,
    pub moments: Vec<MomentEntry>,
    pub runtime_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct JointReport {
    pub metadata: Metadata,
    pub q: u64,
    pub a: Vec<i64>,
    pub m: Vec<u32>,
    pub n_characters: u64,
    #[serde(rename = "n_in_S")]
    pub n_in_s: u64,
    pub value: f64,
    #[serde(rename = "value_in_S")]
    pub value_in_s: f64,
    pub limit: f64,
    pub runtime_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolynomialReport {
    pub display: String,
    pub degree: Option<usize>,
    /// Exact rational coefficients, lowest degree first.
    pub coeffs: Vec<String>,
    pub denominator: String,
    /// `denominator * F`, lowest degree first.
    pub integer_coeffs: Vec<String>,
}

impl PolynomialReport {
    pub fn new(f: &ObstructionPolynomial) -> Self {
        Self {
            display: f.to_string(),
            degree: f.degree(),
            coeffs: f.coeffs().iter().map(ToString::to_string).collect(),
            denominator: f.denominator().to_string(),
            integer_coeffs: f.integer_coeffs().iter().map(ToString::to_string).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Y0Report {
    pub y0_count: u64,
    pub y0_prime_count: u64,
    /// Distinct `t` values on `Y'_0`, ascending.
    pub t_values: Vec<u64>,
    /// `2^r deg(F) p^(l-1)`
    pub y0_prime_bound: u64,
    pub y0_prime_margin: i64,
    pub f_vanishes_on_y0: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountReport {
    pub tool: String,
    pub p: u64,
    pub l: u32,
    pub modulus: u64,
    pub a: Vec<i64>,
    pub n: Vec<i64>,
    pub y_count: u64,
    pub yprime_count: u64,
    pub yprime_formula: u64,
    pub yprime_exact: bool,
    /// `|#Y'/p^l - 1|`
    pub yprime_deviation: f64,
    /// `r 2^r / sqrt(p)`
    pub yprime_band: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0: Option<Y0Report>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<PolynomialReport>,
}
