//! Twisted Kloosterman sums `K_q(a, b, chi)`.
//!
//! [`ksum_brute`] sums all `phi(q)` terms. [`ksum_closed`] uses the
//! stationary-phase evaluation for `k >= 2`: with `l = floor(k/2)` and
//! `h(x) = a x^2 + t_chi x - b`,
//!
//! ```text
//! even k:  K = p^l * sum_{h(x) == 0 mod p^l} e_q(a x + b/x) chi(x)
//! odd k:   K = p^l * sum_{h(x) == 0 mod p^l} e_q(a x + b/x) chi(x) G(x)
//! G(x)  = sum_{y mod p} e_p(d(x) y^2 + (h(x)/p^l) y),  d(x) = ((p-1)/2) t x^2 + b x
//! ```
//!
//! Roots mod `p^l` are lifted to their canonical representative in
//! `[0, p^l)`. The summand (times `G` for odd `k`) does not depend on the
//! lift because `h(x) == 0 mod p^l`; [`ksum_closed_lifted`] exists to check
//! exactly that.
//!
//! All phases are exact integers over the common denominator
//! `D = q (p - 1) = p phi(q)` and are converted to floating point only at
//! the summation site.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::angle::cis_turns;
use crate::characters::{t_admissible, units_mod_p, Character, TChi, TParam};
use crate::dlog::DlogTable;
use crate::modular::{
    add_mod, inv_mod, legendre, lift_quadratic_roots, mul_mod, reduce, PrimePowerModulus,
    QuadraticCongruence,
};
use crate::{par, Error, Result};

/// Imaginary parts of `K(a, -a, chi)` above `REAL_TOL * sqrt(q)` are treated
/// as a defect.
pub const REAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Brute,
    ClosedEven,
    ClosedOdd,
    UntwistedFormula,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Brute => "brute",
            Method::ClosedEven => "closed-even",
            Method::ClosedOdd => "closed-odd",
            Method::UntwistedFormula => "untwisted-formula",
        }
    }
}

/// A computed `K_q(a, b, chi)`.
///
/// `in_s` and `degenerate_disc` are `None` when `k = 1` (no `t_chi`).
/// `degenerate_disc` means `t_chi^2 + 4ab == 0 (mod p)`; `in_s` is its
/// negation, which for `b = -a` is membership in `S_q(a)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KloostermanValue {
    pub re: f64,
    pub im: f64,
    pub method: Method,
    pub q: u64,
    pub in_s: Option<bool>,
    pub degenerate_disc: Option<bool>,
}

impl KloostermanValue {
    pub fn complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }

    /// `q^(-1/2) K`.
    pub fn normalized(&self) -> Complex64 {
        self.complex() / (self.q as f64).sqrt()
    }

    /// `2 sqrt(q) - |K|`; nonnegative when the sum obeys the `2 sqrt(q)` bound.
    pub fn bound_margin(&self) -> f64 {
        2.0 * (self.q as f64).sqrt() - self.abs()
    }
}

/// The quadratic Gauss factor attached to a stationary point `x` when `k`
/// is odd.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussFactor {
    pub x: u64,
    /// `((p - 1)/2) t x^2 + b x mod p`
    pub d: u64,
    /// `h(x) / p^l mod p`
    pub lin: u64,
    pub value: Complex64,
    /// `arg(value)` in `(-pi, pi]`; 0 when `value = 0`.
    pub angle: f64,
}

/// `q^(-1/2) K_q(a, -a, chi)`, with `theta` such that the value is
/// `2 cos(theta)` whenever it lies in `[-2, 2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedTwisted {
    pub value: f64,
    pub theta: Option<f64>,
}

impl NormalizedTwisted {
    pub fn from_value(value: f64) -> Self {
        // absorb rounding on values that are exactly +-2 in exact arithmetic
        let theta = (value.abs() <= 2.0 + 1e-12).then(|| (value / 2.0).clamp(-1.0, 1.0).acos());
        Self { value, theta }
    }
}

/// One row of a character family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyEntry {
    pub chi_index: u64,
    pub t_chi: u64,
    pub in_s: bool,
    /// Number of roots of `h` mod `p^l`; 0 means the value is exactly 0.
    pub stationary_points: usize,
    pub value: NormalizedTwisted,
}

/// Direct `phi(q)`-term summation.
pub fn ksum_brute(a: i64, b: i64, chi: &Character<'_>) -> Result<KloostermanValue> {
    let table = chi.table();
    let m = *table.modulus();
    let (au, bu) = (m.unit(a)?, m.unit(b)?);
    let (q, phi, p) = (m.q(), m.phi(), m.p());
    let den = q as u128 * (p - 1) as u128;
    let g = table.generator();
    let g_inv = inv_mod(g, q).expect("generator is a unit");
    let m_chi = chi.index();

    // walk x = g^e and 1/x = g^-e together inside each chunk
    let sum = par::reduce_ranges(
        phi as usize,
        |range| {
            let start = range.start as u64;
            let mut x = table.exp(start);
            let mut x_inv = table.exp(phi - start % phi);
            let mut acc = Complex64::new(0.0, 0.0);
            for e in range {
                let v = add_mod(mul_mod(au, x, q), mul_mod(bu, x_inv, q), q);
                let chi_num = mul_mod(m_chi, e as u64, phi) as u128 * p as u128;
                let num = (v as u128 * (p - 1) as u128 + chi_num) % den;
                acc += cis_turns(num as u64, den as u64);
                x = mul_mod(x, g, q);
                x_inv = mul_mod(x_inv, g_inv, q);
            }
            acc
        },
        |l, r| l + r,
    )
    .unwrap_or_default();

    let (in_s, degenerate_disc) = disc_flags(&m, au, bu, chi)?;
    Ok(KloostermanValue {
        re: sum.re,
        im: sum.im,
        method: Method::Brute,
        q,
        in_s,
        degenerate_disc,
    })
}

fn disc_flags(
    m: &PrimePowerModulus,
    a: u64,
    b: u64,
    chi: &Character<'_>,
) -> Result<(Option<bool>, Option<bool>)> {
    if m.k() < 2 {
        return Ok((None, None));
    }
    let p = m.p();
    let t = chi.t()?.value() % p;
    let disc = add_mod(mul_mod(t, t, p), mul_mod(4 * (a % p), b % p, p), p);
    Ok((Some(disc != 0), Some(disc == 0)))
}

/// Closed-form evaluation; `k >= 2`.
pub fn ksum_closed(a: i64, b: i64, chi: &Character<'_>) -> Result<KloostermanValue> {
    ksum_closed_lifted(a, b, chi, 0)
}

/// [`ksum_closed`] with every root `x0 in [0, p^l)` replaced by
/// `x0 + lift * p^l` before it enters the summand.
pub fn ksum_closed_lifted(
    a: i64,
    b: i64,
    chi: &Character<'_>,
    lift: u64,
) -> Result<KloostermanValue> {
    let table = chi.table();
    let m = *table.modulus();
    require_closed_form(&m)?;
    let (au, bu) = (m.unit(a)?, m.unit(b)?);
    let t = chi.t()?;
    let points = stationary_points(table, au, bu, t.value(), lift)?;
    let value = combine(&m, &points.points, chi.index());
    let degenerate = points.degenerate;
    Ok(KloostermanValue {
        re: value.re,
        im: value.im,
        method: if m.k().is_multiple_of(2) {
            Method::ClosedEven
        } else {
            Method::ClosedOdd
        },
        q: m.q(),
        in_s: Some(!degenerate),
        degenerate_disc: Some(degenerate),
    })
}

fn require_closed_form(m: &PrimePowerModulus) -> Result<()> {
    if m.k() < 2 {
        return Err(Error::ExponentTooSmall {
            k: m.k(),
            needed: 2,
            what: "the closed-form evaluation",
        });
    }
    Ok(())
}

/// A root `x` of `h` with everything about it that does not depend on the
/// character beyond `t_chi`.
#[derive(Clone, Copy, Debug)]
struct StationaryPoint {
    log_x: u64,
    /// `a x + b/x mod q`
    phase: u64,
    /// Gauss factor for odd `k`, 1 for even `k`.
    weight: Complex64,
}

struct StationarySet {
    points: Vec<StationaryPoint>,
    degenerate: bool,
}

fn stationary_points(
    table: &DlogTable,
    a: u64,
    b: u64,
    t: u64,
    lift: u64,
) -> Result<StationarySet> {
    let m = table.modulus();
    let (p, q, l) = (m.p(), m.q(), m.l());
    let pl = m.root_modulus();
    let h = QuadraticCongruence::new(a as i64, (t % pl) as i64, b as i64, p, l)?;
    let degenerate = !h.is_separable();
    let t_chi = TChi::new(t, m.t_modulus());
    let points = lift_quadratic_roots(&h)
        .into_iter()
        .map(|x0| -> Result<StationaryPoint> {
            let x = add_mod(x0, mul_mod(lift % (q / pl), pl, q), q);
            let x_inv = inv_mod(x, q).expect("roots of h are units");
            let phase = add_mod(mul_mod(a, x, q), mul_mod(b, x_inv, q), q);
            let weight = if m.k().is_multiple_of(2) {
                Complex64::new(1.0, 0.0)
            } else {
                gauss_factor(p, l, t_chi, a as i64, b as i64, x)?.value
            };
            Ok(StationaryPoint {
                log_x: table.log(x).expect("unit"),
                phase,
                weight,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StationarySet { points, degenerate })
}

/// `p^l * sum e_q(phase) chi_m(x) weight`.
fn combine(m: &PrimePowerModulus, points: &[StationaryPoint], m_chi: u64) -> Complex64 {
    let (p, q, phi) = (m.p(), m.q(), m.phi());
    let den = q as u128 * (p - 1) as u128;
    let sum: Complex64 = points
        .iter()
        .map(|pt| {
            let chi_num = mul_mod(m_chi, pt.log_x, phi) as u128 * p as u128;
            let num = (pt.phase as u128 * (p - 1) as u128 + chi_num) % den;
            cis_turns(num as u64, den as u64) * pt.weight
        })
        .sum();
    sum * m.root_modulus() as f64
}

/// `G(x) = sum_{y mod p} e_p(d y^2 + (h(x)/p^l) y)` for `t` taken mod
/// `p^(l+1)`.
pub fn gauss_factor(p: u64, l: u32, t: TChi, a: i64, b: i64, x: u64) -> Result<GaussFactor> {
    let pl = p.pow(l);
    let big = pl * p;
    if t.modulus() != big {
        return Err(Error::InvalidArgument(format!(
            "t_chi must be given mod p^(l+1) = {big}, got mod {}",
            t.modulus()
        )));
    }
    let (ar, br, xr) = (reduce(a, big), reduce(b, big), x % big);
    let h = QuadraticCongruence::new(ar as i64, t.value() as i64, br as i64, p, l + 1)?.eval(xr);
    if h % pl != 0 {
        return Err(Error::InvalidArgument(format!(
            "h({x}) = {h} is not divisible by p^l = {pl}"
        )));
    }
    let lin = (h / pl) % p;
    let half = (p - 1) / 2;
    let d = add_mod(
        mul_mod(
            mul_mod(half, t.value() % p, p),
            mul_mod(xr % p, xr % p, p),
            p,
        ),
        mul_mod(br % p, xr % p, p),
        p,
    );
    let value = match (d, lin) {
        (0, 0) => Complex64::new(p as f64, 0.0),
        (0, _) => Complex64::new(0.0, 0.0),
        _ => (0..p)
            .map(|y| {
                let e = add_mod(mul_mod(d, mul_mod(y, y, p), p), mul_mod(lin, y, p), p);
                cis_turns(e, p)
            })
            .sum(),
    };
    let angle = if value == Complex64::new(0.0, 0.0) {
        0.0
    } else {
        value.arg()
    };
    Ok(GaussFactor {
        x,
        d,
        lin,
        value,
        angle,
    })
}

/// `q^(-1/2) K_q(a, -a, chi)`; closed form for `k >= 2`, brute force for
/// `k = 1`.
pub fn normalized_twisted(a: i64, chi: &Character<'_>) -> Result<NormalizedTwisted> {
    let k = chi.modulus().k();
    let v = if k >= 2 {
        ksum_closed(a, -a, chi)?
    } else {
        ksum_brute(a, -a, chi)?
    };
    check_real(&v.complex(), v.q)?;
    Ok(NormalizedTwisted::from_value(v.re / (v.q as f64).sqrt()))
}

fn check_real(v: &Complex64, q: u64) -> Result<()> {
    let limit = REAL_TOL * (q as f64).sqrt();
    if v.im.abs() > limit {
        return Err(Error::SelfCheck(format!(
            "K(a, -a, chi) has imaginary part {} > {limit}",
            v.im
        )));
    }
    Ok(())
}

/// `K_q(a, 1, 1)`: exactly 0 when `a` is not a square, otherwise the closed
/// form with the trivial character (which fixes the sign).
pub fn untwisted_closed(a: i64, table: &DlogTable) -> Result<KloostermanValue> {
    let m = *table.modulus();
    require_closed_form(&m)?;
    let au = m.unit(a)?;
    let chi = Character::trivial(table);
    let mut v = if legendre(au, m.p()) == -1 {
        let (in_s, degenerate_disc) = disc_flags(&m, au, 1, &chi)?;
        KloostermanValue {
            re: 0.0,
            im: 0.0,
            method: Method::UntwistedFormula,
            q: m.q(),
            in_s,
            degenerate_disc,
        }
    } else {
        ksum_closed(a, 1, &chi)?
    };
    v.method = Method::UntwistedFormula;
    Ok(v)
}

/// Square roots of `a` modulo `q`, ascending (empty for non-squares).
pub fn square_roots_mod_q(a: i64, m: &PrimePowerModulus) -> Result<Vec<u64>> {
    let h = QuadraticCongruence::new(1, 0, a, m.p(), m.k())?;
    Ok(lift_quadratic_roots(&h))
}

/// The values `2 |cos(4 pi c / q)|` over all `c` with `c^2 == a (mod q)`.
pub fn cosine_magnitudes(a: i64, m: &PrimePowerModulus) -> Result<Vec<f64>> {
    let q = m.q() as f64;
    Ok(square_roots_mod_q(a, m)?
        .into_iter()
        .map(|c| 2.0 * (4.0 * PI * c as f64 / q).cos().abs())
        .collect())
}

/// Brute-force `K_p(a, 1, chi_2)` with `chi_2` the quadratic character mod
/// the prime `p`.
pub fn salie_values(
    p: u64,
    a_range: impl IntoIterator<Item = i64>,
) -> Result<Vec<KloostermanValue>> {
    let m = PrimePowerModulus::new(p, 1)?;
    let table = DlogTable::build(m);
    let chi = Character::quadratic(&table);
    a_range
        .into_iter()
        .map(|a| ksum_brute(a, 1, &chi))
        .collect()
}

/// Predicted `p^(-1/2) |K_p(a, 1, chi_2)|`: 0 when `a` is a non-residue,
/// else `2 |cos(4 pi c / p)|` with `c^2 == a`.
pub fn salie_magnitude(p: u64, a: i64) -> Result<f64> {
    let m = PrimePowerModulus::new(p, 1)?;
    Ok(cosine_magnitudes(a, &m)?.first().copied().unwrap_or(0.0))
}

/// The closed-form data for every `t_chi`, shared by all characters of a
/// family `K_q(a, b, chi)`.
pub struct TwistedFamily<'a> {
    table: &'a DlogTable,
    a: i64,
    b: i64,
    param: TParam,
    by_t: Vec<StationarySet>,
}

impl<'a> TwistedFamily<'a> {
    pub fn new(table: &'a DlogTable, a: i64, b: i64) -> Result<Self> {
        let m = table.modulus();
        require_closed_form(m)?;
        let (au, bu) = (m.unit(a)?, m.unit(b)?);
        let param = TParam::new(table)?;
        // t_chi is linear in the index, so checking the relation for the
        // index-1 character covers the whole group
        let t1 = Character::new(table, 1)?.t()?;
        if t1 != param.t_of(1) {
            return Err(Error::SelfCheck("t_chi of the generator character".into()));
        }
        let by_t = par::try_map_indexed(param.modulus as usize, |t| {
            stationary_points(table, au, bu, t as u64, 0)
        })?;
        Ok(Self {
            table,
            a,
            b,
            param,
            by_t,
        })
    }

    /// The `b = -a` family whose normalized values are real.
    pub fn twisted(table: &'a DlogTable, a: i64) -> Result<Self> {
        Self::new(table, a, -a)
    }

    pub fn table(&self) -> &'a DlogTable {
        self.table
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn t_of(&self, m_chi: u64) -> TChi {
        self.param.t_of(m_chi)
    }

    pub fn stationary_count(&self, m_chi: u64) -> usize {
        self.by_t[self.t_of(m_chi).value() as usize].points.len()
    }

    pub fn is_degenerate(&self, m_chi: u64) -> bool {
        self.by_t[self.t_of(m_chi).value() as usize].degenerate
    }

    /// `K_q(a, b, chi_m)`.
    pub fn value(&self, m_chi: u64) -> Complex64 {
        let set = &self.by_t[self.t_of(m_chi).value() as usize];
        combine(self.table.modulus(), &set.points, m_chi)
    }

    /// `q^(-1/2) K_q(a, b, chi_m)`, checked to be real.
    pub fn normalized(&self, m_chi: u64) -> Result<NormalizedTwisted> {
        let q = self.table.modulus().q();
        let v = self.value(m_chi);
        check_real(&v, q)?;
        Ok(NormalizedTwisted::from_value(v.re / (q as f64).sqrt()))
    }
}

/// `q^(-1/2) K_q(a, -a, chi)` for every character, in index order, each
/// tagged with `t_chi` and `S_q(a)` membership.
pub fn family_values(table: &DlogTable, a: i64) -> Result<Vec<FamilyEntry>> {
    let fam = TwistedFamily::twisted(table, a)?;
    let p = table.modulus().p();
    let a_p = units_mod_p(&[a], p)?;
    par::try_map_indexed(table.modulus().phi() as usize, |i| -> Result<FamilyEntry> {
        let m_chi = i as u64;
        let t = fam.t_of(m_chi).value();
        Ok(FamilyEntry {
            chi_index: m_chi,
            t_chi: t,
            in_s: t_admissible(t % p, &a_p, p),
            stationary_points: fam.stationary_count(m_chi),
            value: fam.normalized(m_chi)?,
        })
    })
}
