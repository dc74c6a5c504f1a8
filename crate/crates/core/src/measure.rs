//! The limit measures on `[-2, 2]` and empirical comparisons against them.
//!
//! - `mu = 1/2 delta_0 + dx / (2 pi sqrt(4 - x^2))`, the trace law of the
//!   normalizer of a maximal torus in `SU(2)`;
//! - Sato-Tate `dx sqrt(4 - x^2) / (2 pi)`, the trace law of `SU(2)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::characters::{t_admissible, units_mod_p};
use crate::dlog::DlogTable;
use crate::kloosterman::{family_values, FamilyEntry, TwistedFamily, REAL_TOL};
use crate::{par, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Mu,
    SatoTate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LimitMeasure {
    pub variant: Variant,
}

impl LimitMeasure {
    pub const MU: Self = Self {
        variant: Variant::Mu,
    };
    pub const SATO_TATE: Self = Self {
        variant: Variant::SatoTate,
    };

    pub fn atom_weight(&self) -> f64 {
        match self.variant {
            Variant::Mu => 0.5,
            Variant::SatoTate => 0.0,
        }
    }

    /// Density of the absolutely continuous part on `(-2, 2)`.
    pub fn density(&self, x: f64) -> f64 {
        if x.abs() >= 2.0 {
            return 0.0;
        }
        match self.variant {
            Variant::Mu => 1.0 / (2.0 * PI * (4.0 - x * x).sqrt()),
            Variant::SatoTate => (4.0 - x * x).sqrt() / (2.0 * PI),
        }
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.continuous_cdf(x) + if x >= 0.0 { self.atom_weight() } else { 0.0 }
    }

    /// `P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.continuous_cdf(x) + if x > 0.0 { self.atom_weight() } else { 0.0 }
    }

    fn continuous_cdf(&self, x: f64) -> f64 {
        let x = x.clamp(-2.0, 2.0);
        let s = (x / 2.0).asin();
        match self.variant {
            Variant::Mu => (s + PI / 2.0) / (2.0 * PI),
            Variant::SatoTate => (x * (4.0 - x * x).sqrt() / 2.0 + 2.0 * s + PI) / (2.0 * PI),
        }
    }

    /// `int x^m d(measure)`.
    pub fn moment(&self, m: u32) -> f64 {
        if m == 0 {
            return 1.0;
        }
        if m % 2 == 1 {
            return 0.0;
        }
        let n = m / 2;
        let central = binomial(m, n) as f64;
        match self.variant {
            Variant::Mu => central / 2.0,
            Variant::SatoTate => central / (n + 1) as f64,
        }
    }

    /// Smallest `x` with `cdf(x) >= u`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self.variant {
            Variant::Mu if u < 0.25 => -2.0 * (2.0 * PI * u).cos(),
            Variant::Mu if u <= 0.75 => 0.0,
            Variant::Mu => -2.0 * (2.0 * PI * (u - 0.5)).cos(),
            Variant::SatoTate => {
                let (mut lo, mut hi) = (-2.0f64, 2.0f64);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
        }
    }
}

impl From<Variant> for LimitMeasure {
    fn from(variant: Variant) -> Self {
        Self { variant }
    }
}

fn binomial(n: u32, k: u32) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Right-continuous CDF of `variant` at `x`.
pub fn mu_cdf(x: f64, variant: Variant) -> f64 {
    LimitMeasure::from(variant).cdf(x)
}

pub fn mu_moment(m: u32, variant: Variant) -> f64 {
    LimitMeasure::from(variant).moment(m)
}

const SAMPLE_CHUNK: usize = 1 << 16;

/// `n` draws from `mu`: a fair coin picks either the trace 0 of the
/// non-identity coset of the torus normalizer, or `2 cos(pi U)` for a Haar
/// torus element. Chunk `i` uses ChaCha stream `i`, so the output depends
/// only on `(seed, n)`.
pub fn mu_sample(seed: u64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Empty("sample size must be positive"));
    }
    let chunks = par::map_indexed(n.div_ceil(SAMPLE_CHUNK), |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let len = SAMPLE_CHUNK.min(n - c * SAMPLE_CHUNK);
        (0..len)
            .map(|_| {
                if rng.random::<bool>() {
                    0.0
                } else {
                    2.0 * (PI * rng.random::<f64>()).cos()
                }
            })
            .collect::<Vec<f64>>()
    });
    Ok(chunks.concat())
}

/// Where an empirical family came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilySource {
    pub q: u64,
    pub a_list: Vec<i64>,
    pub sq_filtered: bool,
}

/// Sorted sample of normalized values.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalFamily {
    values: Vec<f64>,
    pub source: Option<FamilySource>,
}

impl EmpiricalFamily {
    pub fn new(mut values: Vec<f64>, source: Option<FamilySource>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values, source }
    }

    /// Normalized values of a family, restricted to `S_q` when `sq_filter`.
    pub fn from_entries(entries: &[FamilyEntry], q: u64, a: i64, sq_filter: bool) -> Self {
        let values = entries
            .iter()
            .filter(|e| !sq_filter || e.in_s)
            .map(|e| e.value.value)
            .collect();
        Self::new(
            values,
            Some(FamilySource {
                q,
                a_list: vec![a],
                sq_filtered: sq_filter,
            }),
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Share of values that are exactly 0.
    pub fn zero_fraction(&self) -> f64 {
        let zeros = self.values.iter().filter(|&&v| v == 0.0).count();
        zeros as f64 / self.values.len() as f64
    }

    /// Empirical `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }

    /// Empirical `P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v < x) as f64 / self.values.len() as f64
    }
}

/// Kolmogorov-Smirnov distance `sup_x |F_emp(x) - F(x)|`.
///
/// Between consecutive witness points both CDFs are monotone and the
/// empirical one is constant, so the supremum is attained as a one-sided
/// limit at a witness. The witnesses are every sample value and 0 (the atom
/// of `mu`), each checked from both sides.
pub fn ks_distance(fam: &EmpiricalFamily, variant: Variant) -> Result<f64> {
    if fam.is_empty() {
        return Err(Error::Empty("KS distance of an empty family"));
    }
    let measure = LimitMeasure::from(variant);
    let gap = |x: f64| {
        let right = (fam.cdf(x) - measure.cdf(x)).abs();
        let left = (fam.cdf_left(x) - measure.cdf_left(x)).abs();
        right.max(left)
    };
    let mut witnesses: Vec<f64> = fam.values.clone();
    witnesses.dedup();
    Ok(witnesses
        .into_iter()
        .chain([0.0])
        .map(gap)
        .fold(0.0, f64::max))
}

/// Exponents `(m_1, ..., m_r)` of a mixed moment, all at least 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentSpec(Vec<u32>);

impl MomentSpec {
    pub fn new(m_list: Vec<u32>) -> Result<Self> {
        if m_list.is_empty() {
            return Err(Error::Empty("moment exponents"));
        }
        if m_list.contains(&0) {
            return Err(Error::InvalidArgument(
                "moment exponents must be positive".into(),
            ));
        }
        Ok(Self(m_list))
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// `prod_j int x^(m_j) d mu`.
    pub fn limit(&self) -> f64 {
        self.0.iter().map(|&m| mu_moment(m, Variant::Mu)).product()
    }
}

/// `sum_{chi in S_q} prod_j K(a_j, chi)^(m_j)` under both normalizations.
#[derive(Clone, Debug, PartialEq)]
pub struct JointMoment {
    /// Divided by `q`.
    pub value: f64,
    /// Divided by `|S_q|`.
    pub value_in_s: f64,
    pub n_in_s: u64,
    pub q: u64,
    /// `prod_j int x^(m_j) d mu`.
    pub limit: f64,
}

/// Reject non-units and repeated parameters mod `p`.
pub(crate) fn distinct_units_mod_p(a_list: &[i64], p: u64) -> Result<Vec<u64>> {
    let reduced = units_mod_p(a_list, p)?;
    for i in 0..reduced.len() {
        for j in 0..i {
            if reduced[i] == reduced[j] {
                return Err(Error::RepeatedParameter {
                    first: a_list[j],
                    second: a_list[i],
                    p,
                });
            }
        }
    }
    Ok(reduced)
}

/// `(1/q) sum_{chi in S_q(a_1..a_r)} prod_j (q^-1/2 K_q(a_j, -a_j, chi))^(m_j)`.
pub fn joint_moment(table: &DlogTable, a_list: &[i64], spec: &MomentSpec) -> Result<JointMoment> {
    let m = table.modulus();
    if a_list.len() != spec.exponents().len() {
        return Err(Error::InvalidArgument(format!(
            "{} parameters but {} exponents",
            a_list.len(),
            spec.exponents().len()
        )));
    }
    let a_p = distinct_units_mod_p(a_list, m.p())?;
    let families = a_list
        .iter()
        .map(|&a| TwistedFamily::twisted(table, a))
        .collect::<Result<Vec<_>>>()?;
    let (p, q) = (m.p(), m.q());
    let sqrt_q = (q as f64).sqrt();

    #[derive(Default)]
    struct Acc {
        sum: f64,
        count: u64,
        max_im: f64,
    }
    let acc = par::fold_chunks(
        m.phi() as usize,
        Acc::default,
        |acc, i| {
            let m_chi = i as u64;
            let t = families[0].t_of(m_chi).value();
            if !t_admissible(t % p, &a_p, p) {
                return;
            }
            let mut prod = 1.0;
            for (fam, &e) in families.iter().zip(spec.exponents()) {
                let v = fam.value(m_chi);
                acc.max_im = acc.max_im.max(v.im.abs());
                prod *= (v.re / sqrt_q).powi(e as i32);
            }
            acc.sum += prod;
            acc.count += 1;
        },
        |l, r| Acc {
            sum: l.sum + r.sum,
            count: l.count + r.count,
            max_im: l.max_im.max(r.max_im),
        },
    );
    if acc.max_im > REAL_TOL * sqrt_q {
        return Err(Error::SelfCheck(format!(
            "imaginary part {} in a b = -a family",
            acc.max_im
        )));
    }
    Ok(JointMoment {
        value: acc.sum / q as f64,
        value_in_s: if acc.count == 0 {
            0.0
        } else {
            acc.sum / acc.count as f64
        },
        n_in_s: acc.count,
        q,
        limit: spec.limit(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub m: u32,
    /// Divided by `q`.
    pub value: f64,
    /// Divided by the number of values used.
    pub value_used: f64,
    pub limit: f64,
}

/// Distribution summary of `q^-1/2 K_q(a, -a, chi)` over the characters.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyStatistics {
    pub q: u64,
    pub a: i64,
    pub n_characters: u64,
    pub n_in_s: u64,
    pub excluded_count: u64,
    pub sq_filter: bool,
    pub n_used: u64,
    pub zero_count: u64,
    pub zero_fraction: f64,
    pub ks_distance: f64,
    pub ks_distance_sato_tate: f64,
    pub moments: Vec<MomentReport>,
    /// Values outside `[-2, 2]` among those used.
    pub out_of_band: u64,
}

pub const REPORTED_MOMENTS: u32 = 8;

pub fn family_statistics(table: &DlogTable, a: i64, sq_filter: bool) -> Result<FamilyStatistics> {
    let entries = family_values(table, a)?;
    statistics_from_entries(&entries, table.modulus().q(), a, sq_filter)
}

pub fn statistics_from_entries(
    entries: &[FamilyEntry],
    q: u64,
    a: i64,
    sq_filter: bool,
) -> Result<FamilyStatistics> {
    let fam = EmpiricalFamily::from_entries(entries, q, a, sq_filter);
    if fam.is_empty() {
        return Err(Error::Empty("no characters left after filtering"));
    }
    let used: Vec<f64> = entries
        .iter()
        .filter(|e| !sq_filter || e.in_s)
        .map(|e| e.value.value)
        .collect();
    let n_in_s = entries.iter().filter(|e| e.in_s).count() as u64;
    let n_used = used.len() as u64;
    let moments = (1..=REPORTED_MOMENTS)
        .map(|m| {
            let s = par::sum_indexed(used.len(), |i| used[i].powi(m as i32));
            MomentReport {
                m,
                value: s / q as f64,
                value_used: s / n_used as f64,
                limit: mu_moment(m, Variant::Mu),
            }
        })
        .collect();
    let zero_count = used.iter().filter(|&&v| v == 0.0).count() as u64;
    Ok(FamilyStatistics {
        q,
        a,
        n_characters: entries.len() as u64,
        n_in_s,
        excluded_count: entries.len() as u64 - n_in_s,
        sq_filter,
        n_used,
        zero_count,
        zero_fraction: zero_count as f64 / n_used as f64,
        ks_distance: ks_distance(&fam, Variant::Mu)?,
        ks_distance_sato_tate: ks_distance(&fam, Variant::SatoTate)?,
        moments,
        out_of_band: used.iter().filter(|v| v.abs() > 2.0 + 1e-9).count() as u64,
    })
}
