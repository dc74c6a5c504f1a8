//! The acceptance suite, shared by the `kloost verify` command and the
//! `acceptance` test target.
//!
//! Each criterion returns a [`CriterionReport`]; a criterion that cannot
//! even be evaluated (an error from the library) is reported as failed with
//! the error text as its detail.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use crate::characters::Character;
use crate::counting::{build_f, count_yprime_char, enum_y0, enum_yprime, CountingSpec};
use crate::dlog::DlogTable;
use crate::kloosterman::{
    cosine_magnitudes, ksum_brute, salie_magnitude, salie_values, square_roots_mod_q, TwistedFamily,
};
use crate::measure::{
    family_statistics, joint_moment, ks_distance, mu_cdf, mu_moment, mu_sample, EmpiricalFamily,
    FamilyStatistics, MomentSpec, Variant,
};
use crate::modular::{is_prime, PrimePowerModulus};
use crate::{par, Result};

pub const GRID_MODULI: [(u64, u32); 7] = [(3, 2), (5, 2), (3, 3), (7, 2), (11, 2), (5, 3), (7, 3)];
pub const GRID_RANGE: i64 = 6;
/// `|closed - brute| <= CLOSED_TOL sqrt(q)`
pub const CLOSED_TOL: f64 = 1e-6;
pub const GRID_SECONDS: f64 = 60.0;
pub const BOUND_SLACK: f64 = 1e-9;
/// `|Im K| <= REAL_TOL sqrt(q)`
pub const REAL_TOL: f64 = 1e-8;
pub const UNTWISTED_MODULI: [(u64, u32); 5] = [(3, 2), (5, 2), (3, 3), (7, 2), (5, 3)];
pub const UNTWISTED_TOL: f64 = 1e-8;
pub const SALIE_PRIMES: [u64; 2] = [13, 101];
pub const SALIE_TOL: f64 = 1e-8;
pub const LARGE_PRIME: u64 = 997;
pub const SMALL_PRIME: u64 = 101;
pub const MOMENT_TOL: f64 = 0.05;
pub const FOURTH_MOMENT_TOL: f64 = 0.25;
pub const ZERO_FRACTION_TOL: f64 = 0.05;
pub const KS_TOL: f64 = 0.05;
/// Errors below this are rounding noise on a statistic that is exactly at
/// its limit; the trend comparison treats them as equal.
pub const TREND_FLOOR: f64 = 1e-12;
pub const JOINT_PRIME: u64 = 499;
pub const JOINT_TOL: f64 = 0.1;
pub const YPRIME_PRIMES: (u64, u64) = (11, 199);
pub const YPRIME_A: [&[i64]; 4] = [&[1], &[3], &[1, 2], &[2, 5]];
pub const Y0_PRIMES: [u64; 3] = [11, 31, 61];
pub const SAMPLER_N: usize = 1_000_000;
pub const SAMPLER_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
pub const SAMPLER_KS_TOL: f64 = 0.005;
pub const STIELTJES_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

pub const CRITERIA: [(u32, &str); 10] = [
    (1, "closed form equals brute force"),
    (2, "2 sqrt(q) bound on S_q"),
    (3, "realness for b = -a"),
    (4, "untwisted sums"),
    (5, "Salie sums"),
    (6, "single-parameter distribution"),
    (7, "joint moments"),
    (8, "Y' count by quadratic residues"),
    (9, "Y'_0 bound and F(t)"),
    (10, "limit measure self-consistency"),
];

/// Run one criterion by number.
pub fn run(id: u32) -> CriterionReport {
    let title = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, t)| *t)
        .unwrap_or("unknown criterion");
    let start = Instant::now();
    let outcome = match id {
        1 => grid_scan().map(|g| g.closed_form()),
        2 => grid_scan().map(|g| g.bound()),
        3 => grid_scan().map(|g| g.realness()),
        4 => untwisted(),
        5 => salie(),
        6 => distribution(),
        7 => joint(),
        8 => yprime_count(),
        9 => y0_bound(),
        10 => limit_measure(),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionReport {
        id,
        title,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

/// Criteria 1 to 3 share one scan; this runs it once.
pub fn run_all() -> Vec<CriterionReport> {
    let start = Instant::now();
    let grid = grid_scan();
    let grid_time = start.elapsed();
    let mut out: Vec<CriterionReport> = [1u32, 2, 3]
        .into_iter()
        .map(|id| {
            let (passed, detail) = match &grid {
                Ok(g) => match id {
                    1 => g.closed_form(),
                    2 => g.bound(),
                    _ => g.realness(),
                },
                Err(e) => (false, format!("error: {e}")),
            };
            CriterionReport {
                id,
                title: CRITERIA[id as usize - 1].1,
                passed,
                detail,
                elapsed: grid_time,
            }
        })
        .collect();
    out.extend((4..=10).map(run));
    out
}

type Outcome = Result<(bool, String)>;

#[derive(Clone, Debug, Default)]
struct GridScan {
    cases: u64,
    max_diff: f64,
    worst: String,
    in_s: u64,
    bound_violations: u64,
    max_ratio: f64,
    real_cases: u64,
    max_im: f64,
    seconds: f64,
}

#[derive(Clone, Copy, Debug, Default)]
struct CaseStats {
    diff: f64,
    in_s: bool,
    violation: bool,
    ratio: f64,
    im: Option<f64>,
}

fn grid_scan() -> Result<GridScan> {
    let start = Instant::now();
    let mut g = GridScan::default();
    for (p, k) in GRID_MODULI {
        let m = PrimePowerModulus::new(p, k)?;
        let table = DlogTable::build(m);
        let sqrt_q = (m.q() as f64).sqrt();
        let params: Vec<i64> = (-GRID_RANGE..=GRID_RANGE)
            .filter(|&a| a != 0 && a.rem_euclid(p as i64) != 0)
            .collect();
        for &a in &params {
            for &b in &params {
                let fam = TwistedFamily::new(&table, a, b)?;
                let cases = par::try_map_indexed(m.phi() as usize, |i| -> Result<CaseStats> {
                    let chi = Character::new(&table, i as u64)?;
                    let brute = ksum_brute(a, b, &chi)?;
                    let closed = fam.value(i as u64);
                    let in_s = !fam.is_degenerate(i as u64);
                    Ok(CaseStats {
                        diff: (closed - brute.complex()).norm() / sqrt_q,
                        in_s,
                        violation: in_s && brute.abs() > 2.0 * sqrt_q + BOUND_SLACK,
                        ratio: if in_s {
                            brute.abs() / (2.0 * sqrt_q)
                        } else {
                            0.0
                        },
                        im: (b == -a).then(|| brute.im.abs().max(closed.im.abs()) / sqrt_q),
                    })
                })?;
                for (i, c) in cases.iter().enumerate() {
                    g.cases += 1;
                    if c.diff > g.max_diff {
                        g.max_diff = c.diff;
                        g.worst = format!("q={} a={a} b={b} chi={i}", m.q());
                    }
                    g.in_s += c.in_s as u64;
                    g.bound_violations += c.violation as u64;
                    g.max_ratio = g.max_ratio.max(c.ratio);
                    if let Some(im) = c.im {
                        g.real_cases += 1;
                        g.max_im = g.max_im.max(im);
                    }
                }
            }
        }
    }
    g.seconds = start.elapsed().as_secs_f64();
    Ok(g)
}

impl GridScan {
    fn closed_form(&self) -> (bool, String) {
        let passed = self.max_diff <= CLOSED_TOL && self.seconds < GRID_SECONDS;
        (
            passed,
            format!(
                "{} cases, max |closed - brute|/sqrt(q) = {:.2e} (tol {CLOSED_TOL:e}) at {}, scan {:.1} s (limit {GRID_SECONDS} s)",
                self.cases, self.max_diff, self.worst, self.seconds
            ),
        )
    }

    fn bound(&self) -> (bool, String) {
        (
            self.bound_violations == 0,
            format!(
                "{} violations among {} characters with t^2 + 4ab != 0 mod p, max |K|/(2 sqrt(q)) = {:.12}",
                self.bound_violations, self.in_s, self.max_ratio
            ),
        )
    }

    fn realness(&self) -> (bool, String) {
        (
            self.max_im <= REAL_TOL,
            format!(
                "{} cases with b = -a, max |Im K|/sqrt(q) = {:.2e} (tol {REAL_TOL:e})",
                self.real_cases, self.max_im
            ),
        )
    }
}

/// `|q^-1/2 K_q(a, 1, 1)|` against `2 |cos(4 pi c / q)|`; also counts how
/// many square classes match `2 |sin(4 pi c / q)|` instead.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UntwistedCheck {
    pub q: u64,
    pub squares: u64,
    pub non_squares: u64,
    pub nonzero_non_squares: u64,
    pub cos_mismatches: u64,
    pub sin_mismatches: u64,
}

pub fn untwisted_check(p: u64, k: u32) -> Result<UntwistedCheck> {
    let m = PrimePowerModulus::new(p, k)?;
    let table = DlogTable::build(m);
    let chi = Character::trivial(&table);
    let q = m.q();
    let mut out = UntwistedCheck {
        q,
        ..Default::default()
    };
    for a in (1..q as i64).filter(|&a| m.is_unit(a as u64)) {
        let v = ksum_brute(a, 1, &chi)?.normalized().norm();
        let roots = square_roots_mod_q(a, &m)?;
        if roots.is_empty() {
            out.non_squares += 1;
            out.nonzero_non_squares += (v > UNTWISTED_TOL) as u64;
            continue;
        }
        out.squares += 1;
        let cos = cosine_magnitudes(a, &m)?;
        let sin = roots
            .iter()
            .map(|&c| 2.0 * (4.0 * PI * c as f64 / q as f64).sin().abs());
        out.cos_mismatches += !cos.iter().any(|c| (c - v).abs() <= UNTWISTED_TOL) as u64;
        out.sin_mismatches += !sin.into_iter().any(|c| (c - v).abs() <= UNTWISTED_TOL) as u64;
    }
    Ok(out)
}

fn untwisted() -> Outcome {
    let table = DlogTable::build(PrimePowerModulus::new(3, 2)?);
    let chi = Character::trivial(&table);
    let k911 = ksum_brute(1, 1, &chi)?;
    let k921 = ksum_brute(2, 1, &chi)?;
    let worked = (k911.re - 6.0 * (4.0 * PI / 9.0).cos()).abs() <= UNTWISTED_TOL
        && k911.im.abs() <= UNTWISTED_TOL
        && k921.abs() <= UNTWISTED_TOL;
    let mut passed = worked;
    let mut parts = vec![format!(
        "K_9(1,1,1) = {:.5}, K_9(2,1,1) = {:.1e}",
        k911.re,
        k921.abs()
    )];
    for (p, k) in UNTWISTED_MODULI {
        let c = untwisted_check(p, k)?;
        passed &= c.cos_mismatches == 0 && c.nonzero_non_squares == 0;
        parts.push(format!(
            "q={}: {}/{} square classes off the cos form ({} off the sin form), {} nonzero non-squares",
            c.q, c.cos_mismatches, c.squares, c.sin_mismatches, c.nonzero_non_squares
        ));
    }
    Ok((passed, parts.join("; ")))
}

fn salie() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for p in SALIE_PRIMES {
        let values = salie_values(p, 1..p as i64)?;
        let mut worst = 0.0f64;
        for (a, v) in (1..p as i64).zip(&values) {
            let expected = salie_magnitude(p, a)?;
            worst = worst.max((v.normalized().norm() - expected).abs());
        }
        passed &= worst <= SALIE_TOL;
        parts.push(format!("p={p}: max deviation {worst:.2e}"));
    }
    Ok((passed, parts.join("; ")))
}

/// Distance of each criterion-6 statistic from its limit, in the order
/// `m_1, m_2, m_3, m_4, zero fraction, KS`.
pub fn distribution_errors(s: &FamilyStatistics) -> [f64; 6] {
    let moment = |m: u32| {
        let r = &s.moments[m as usize - 1];
        (r.value - r.limit).abs()
    };
    [
        moment(1),
        moment(2),
        moment(3),
        moment(4),
        (s.zero_fraction - 0.5).abs(),
        s.ks_distance,
    ]
}

pub const DISTRIBUTION_LABELS: [&str; 6] = ["m1", "m2", "m3", "m4", "zero fraction", "KS"];
pub const DISTRIBUTION_TOLS: [f64; 6] = [
    MOMENT_TOL,
    MOMENT_TOL,
    MOMENT_TOL,
    FOURTH_MOMENT_TOL,
    ZERO_FRACTION_TOL,
    KS_TOL,
];

fn distribution() -> Outcome {
    let large = family_statistics(
        &DlogTable::build(PrimePowerModulus::new(LARGE_PRIME, 2)?),
        1,
        true,
    )?;
    let small = family_statistics(
        &DlogTable::build(PrimePowerModulus::new(SMALL_PRIME, 2)?),
        1,
        true,
    )?;
    let (el, es) = (distribution_errors(&large), distribution_errors(&small));
    let mut passed = true;
    let mut parts = Vec::new();
    for i in 0..6 {
        let within = el[i] <= DISTRIBUTION_TOLS[i];
        let trend = el[i] <= es[i] || el[i] <= TREND_FLOOR;
        passed &= within && trend;
        parts.push(format!(
            "{} err {:.2e} (tol {}) vs {:.2e} at p={SMALL_PRIME}{}",
            DISTRIBUTION_LABELS[i],
            el[i],
            DISTRIBUTION_TOLS[i],
            es[i],
            if trend { "" } else { " [trend violated]" }
        ));
    }
    Ok((passed, format!("p={LARGE_PRIME}: {}", parts.join(", "))))
}

fn joint() -> Outcome {
    let table = DlogTable::build(PrimePowerModulus::new(JOINT_PRIME, 2)?);
    let m22 = joint_moment(&table, &[1, 2], &MomentSpec::new(vec![2, 2])?)?;
    let m11 = joint_moment(&table, &[1, 2], &MomentSpec::new(vec![1, 1])?)?;
    let passed = (m22.value - 1.0).abs() <= JOINT_TOL && m11.value.abs() <= JOINT_TOL;
    Ok((
        passed,
        format!(
            "p={JOINT_PRIME}, a=(1,2): m(2,2) = {:.4} (limit 1), m(1,1) = {:.2e} (limit 0), tol {JOINT_TOL}",
            m22.value, m11.value
        ),
    ))
}

fn yprime_count() -> Outcome {
    let (lo, hi) = YPRIME_PRIMES;
    let mut specs = 0;
    let mut mismatches = Vec::new();
    let mut outside_band = 0;
    let mut worst_band = 0.0f64;
    for p in (lo..=hi).filter(|&p| is_prime(p)) {
        for l in 1..=2 {
            for a in YPRIME_A {
                let spec = CountingSpec::new(p, l, a.to_vec(), vec![])?;
                let n = enum_yprime(&spec)?.len() as u64;
                let formula = count_yprime_char(&spec)?;
                specs += 1;
                if n != formula {
                    mismatches.push(format!("p={p} l={l} a={a:?}: {n} vs {formula}"));
                }
                let r = a.len() as f64;
                let dev = (n as f64 / spec.modulus() as f64 - 1.0).abs();
                let band = r * 2f64.powf(r) / (p as f64).sqrt();
                worst_band = worst_band.max(dev / band);
                outside_band += (dev > band) as u64;
            }
        }
    }
    Ok((
        mismatches.is_empty(),
        format!(
            "{specs} specs, {} mismatches{}; soft band |#Y'/p^l - 1| <= r 2^r/sqrt(p): {outside_band} outside, worst ratio {worst_band:.3}",
            mismatches.len(),
            mismatches.first().map(|s| format!(" (first {s})")).unwrap_or_default()
        ),
    ))
}

fn y0_bound() -> Outcome {
    let (a, n) = ([1i64, 2], [1i64, -1]);
    let f = build_f(&a, &n)?;
    let deg = f.degree().unwrap_or(0) as u64;
    let mut passed = !f.is_zero() && deg <= 4;
    let mut parts = vec![format!("F(t) = {f}, degree {deg}")];
    for p in Y0_PRIMES {
        for l in 1..=2 {
            let spec = CountingSpec::new(p, l, a.to_vec(), n.to_vec())?;
            let sets = enum_y0(&spec)?;
            let m = spec.modulus();
            let vanish = sets.y0_prime.iter().all(|s| f.eval_mod(s.t, m) == 0);
            let bound = 4 * deg * m / p;
            let count = sets.y0_prime.len() as u64;
            passed &= vanish && count <= bound;
            parts.push(format!(
                "p={p} l={l}: #Y'_0 = {count} <= {bound}{}",
                if vanish { "" } else { ", F does not vanish" }
            ));
        }
    }
    Ok((passed, parts.join("; ")))
}

/// `int x^m d mu` computed from `mu_cdf` alone, by parts:
/// `2^m - int_{-2}^{2} m x^(m-1) F(x) dx`, with `x = 2 sin(theta)` so the
/// integrand is smooth on each side of the atom at 0.
pub fn stieltjes_moment(m: u32, variant: Variant) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let integrand = |theta: f64| {
        let x = 2.0 * theta.sin();
        m as f64 * x.powi(m as i32 - 1) * mu_cdf(x, variant) * 2.0 * theta.cos()
    };
    let half = PI / 2.0;
    2f64.powi(m as i32)
        - gauss_legendre(integrand, -half, 0.0, 64)
        - gauss_legendre(integrand, 0.0, half, 64)
}

fn gauss_legendre(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683,
        0.538_469_310_105_683,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
        0.236_926_885_056_189,
    ];
    let h = (hi - lo) / panels as f64;
    (0..panels)
        .map(|i| {
            let mid = lo + (i as f64 + 0.5) * h;
            X.iter()
                .zip(W)
                .map(|(x, w)| w * f(mid + 0.5 * h * x))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

fn limit_measure() -> Outcome {
    let mut worst_ks = 0.0f64;
    for seed in SAMPLER_SEEDS {
        let fam = EmpiricalFamily::new(mu_sample(seed, SAMPLER_N)?, None);
        worst_ks = worst_ks.max(ks_distance(&fam, Variant::Mu)?);
    }
    let worst_moment = (1..=8)
        .map(|m| (stieltjes_moment(m, Variant::Mu) - mu_moment(m, Variant::Mu)).abs())
        .fold(0.0, f64::max);
    Ok((
        worst_ks <= SAMPLER_KS_TOL && worst_moment <= STIELTJES_TOL,
        format!(
            "sampler KS max over {} seeds = {worst_ks:.2e} (tol {SAMPLER_KS_TOL}); Stieltjes moments m<=8 max deviation {worst_moment:.2e} (tol {STIELTJES_TOL:e})",
            SAMPLER_SEEDS.len()
        ),
    ))
}
