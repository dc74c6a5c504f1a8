//! The counting sets behind the moment computation.
//!
//! For distinct units `a_1, ..., a_r` mod `p` and `l >= 1`:
//!
//! ```text
//! Y(p^l)   = { x in ((Z/p^l)^*)^r : a_1 (x_1 + 1/x_1) == ... == a_r (x_r + 1/x_r) }
//! Y'(p^l)  = tuples of Y with no x_j == +-1 (mod p)
//! Y_0(p^l) = tuples of Y with x_1^n_1 ... x_r^n_r == 1 (mod p^l)
//! ```
//!
//! Tuples are enumerated per common value `t`: each `a_j (x + 1/x) == t` is
//! the quadratic `a_j x^2 - t x + a_j == 0`, so the cost is `O(p^l r)` rather
//! than `O(p^(l r))`.
//!
//! The obstruction polynomial comes from
//!
//! ```text
//! G(x) = prod_{sigma in {+-1}^r} (x_1^(sigma_1 n_1) ... x_r^(sigma_r n_r) - 1)
//! ```
//!
//! which is invariant under every `x_j -> 1/x_j` and is therefore a polynomial
//! `F~(s_1, ..., s_r)` in `s_j = x_j + 1/x_j`. On `Y` we have `s_j = t / a_j`,
//! giving `F(t) = F~(t/a_1, ..., t/a_r)`, which vanishes mod `p^l` at every
//! `t` coming from `Y_0`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::characters::t_admissible;
use crate::measure::distinct_units_mod_p;
use crate::modular::{
    inv_mod, is_prime, legendre, lift_quadratic_roots, mul_mod, pow_mod, reduce,
    QuadraticCongruence,
};
use crate::{par, Error, Result};

/// Largest `p^l` that [`enum_y`] will walk.
pub const ENUMERATION_BUDGET: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingSpec {
    p: u64,
    l: u32,
    modulus: u64,
    a_list: Vec<i64>,
    n_list: Vec<i64>,
}

impl CountingSpec {
    /// `n_list` may be empty when only `Y` and `Y'` are needed; otherwise it
    /// must have one nonzero entry per `a_j`.
    pub fn new(p: u64, l: u32, a_list: Vec<i64>, n_list: Vec<i64>) -> Result<Self> {
        if p == 2 || !is_prime(p) {
            return Err(Error::InvalidArgument(format!(
                "p = {p} is not an odd prime"
            )));
        }
        if l == 0 {
            return Err(Error::InvalidArgument("l must be at least 1".into()));
        }
        if a_list.is_empty() {
            return Err(Error::Empty("a_list"));
        }
        distinct_units_mod_p(&a_list, p)?;
        if !n_list.is_empty() {
            check_exponents(&n_list, a_list.len())?;
        }
        let modulus = p
            .checked_pow(l)
            .filter(|&m| m <= ENUMERATION_BUDGET)
            .ok_or(Error::OutOfRange {
                what: "p^l",
                value: p.saturating_pow(l),
                max: ENUMERATION_BUDGET,
            })?;
        Ok(Self {
            p,
            l,
            modulus,
            a_list,
            n_list,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    /// `p^l`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn r(&self) -> usize {
        self.a_list.len()
    }

    pub fn a_list(&self) -> &[i64] {
        &self.a_list
    }

    pub fn n_list(&self) -> &[i64] {
        &self.n_list
    }
}

fn check_exponents(n_list: &[i64], r: usize) -> Result<()> {
    if n_list.len() != r {
        return Err(Error::InvalidArgument(format!(
            "n_list has {} entries but a_list has {r}",
            n_list.len()
        )));
    }
    if n_list.contains(&0) {
        return Err(Error::InvalidArgument("every n_j must be nonzero".into()));
    }
    Ok(())
}

/// A point of `Y(p^l)` with its common value `t = a_1 (x_1 + 1/x_1) mod p^l`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SolutionTuple {
    pub x: Vec<u64>,
    pub t: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Y0Sets {
    /// `Y_0(p^l)`: the monomial condition on all of `Y`.
    pub y0: Vec<SolutionTuple>,
    /// `Y'_0(p^l)`: the same with the `+-1 mod p` exclusion.
    pub y0_prime: Vec<SolutionTuple>,
}

/// `Y(p^l)`, ordered by `t` and then lexicographically in `x`.
pub fn enum_y(spec: &CountingSpec) -> Result<Vec<SolutionTuple>> {
    let (p, l, m) = (spec.p, spec.l, spec.modulus);
    let per_t = par::try_map_indexed(m as usize, |t| -> Result<Vec<SolutionTuple>> {
        let mut roots = Vec::with_capacity(spec.r());
        for &a in &spec.a_list {
            let c = QuadraticCongruence::new(a, -(t as i64), -a, p, l)?;
            let r = lift_quadratic_roots(&c);
            if r.is_empty() {
                return Ok(Vec::new());
            }
            roots.push(r);
        }
        Ok(cartesian(&roots)
            .into_iter()
            .map(|x| SolutionTuple { x, t: t as u64 })
            .collect())
    })?;
    Ok(per_t.into_iter().flatten().collect())
}

fn cartesian(factors: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for f in factors {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                f.iter().map(move |&x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

fn avoids_plus_minus_one(x: &[u64], p: u64) -> bool {
    x.iter().all(|&xj| {
        let r = xj % p;
        r != 1 && r != p - 1
    })
}

/// `Y'(p^l)`.
pub fn enum_yprime(spec: &CountingSpec) -> Result<Vec<SolutionTuple>> {
    let mut y = enum_y(spec)?;
    y.retain(|s| avoids_plus_minus_one(&s.x, spec.p));
    Ok(y)
}

/// `#Y'(p^l)` from quadratic residues alone:
/// `2^r p^(l-1) #{t mod p : t != +-2a_j, (t^2 - 4 a_j^2 | p) = 1 for all j}`.
pub fn count_yprime_char(spec: &CountingSpec) -> Result<u64> {
    let p = spec.p;
    let a = distinct_units_mod_p(&spec.a_list, p)?;
    let good = (0..p)
        .filter(|&t| {
            t_admissible(t, &a, p)
                && a.iter().all(|&aj| {
                    let d = (mul_mod(t, t, p) + p * p - mul_mod(4, mul_mod(aj, aj, p), p)) % p;
                    legendre(d, p) == 1
                })
        })
        .count() as u64;
    Ok((1u64 << spec.r()) * spec.modulus / p * good)
}

/// `Y_0(p^l)` and `Y'_0(p^l)`; requires `n_list`.
pub fn enum_y0(spec: &CountingSpec) -> Result<Y0Sets> {
    check_exponents(&spec.n_list, spec.r())?;
    let m = spec.modulus;
    let mut y0 = enum_y(spec)?;
    y0.retain(|s| monomial(&s.x, &spec.n_list, m) == 1 % m);
    let y0_prime = y0
        .iter()
        .filter(|s| avoids_plus_minus_one(&s.x, spec.p))
        .cloned()
        .collect();
    Ok(Y0Sets { y0, y0_prime })
}

/// `prod_j x_j^(n_j) mod m` for units `x_j`.
fn monomial(x: &[u64], n: &[i64], m: u64) -> u64 {
    x.iter().zip(n).fold(1 % m, |acc, (&xj, &nj)| {
        let base = if nj < 0 {
            inv_mod(xj, m).expect("tuple entries are units")
        } else {
            xj
        };
        mul_mod(acc, pow_mod(base, nj.unsigned_abs(), m), m)
    })
}

/// `F~(s_1, ..., s_r) = sum_e c_e prod_{j : e_j > 0} V_{e_j}(s_j)` with
/// `V_n(x + 1/x) = x^n + x^-n`, i.e. `V_0 = 2`, `V_1 = s`,
/// `V_n = s V_{n-1} - V_{n-2}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricReduction {
    r: usize,
    /// keyed by nonnegative exponent vectors
    terms: BTreeMap<Vec<u64>, BigInt>,
}

impl SymmetricReduction {
    /// Reduce `G` for the exponents `n_list`.
    pub fn new(n_list: &[i64]) -> Result<Self> {
        if n_list.is_empty() {
            return Err(Error::Empty("n_list"));
        }
        check_exponents(n_list, n_list.len())?;
        let laurent = expand_g(n_list);
        let mut terms = BTreeMap::new();
        for (e, c) in &laurent {
            let rep: Vec<i64> = e.iter().map(|v| v.abs()).collect();
            if laurent.get(&rep) != Some(c) {
                return Err(Error::SelfCheck(format!(
                    "G is not symmetric under inversion at exponent {e:?}"
                )));
            }
            if e.iter().all(|&v| v >= 0) {
                terms.insert(e.iter().map(|&v| v as u64).collect(), c.clone());
            }
        }
        Ok(Self {
            r: n_list.len(),
            terms,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u64>, BigInt> {
        &self.terms
    }

    pub fn eval(&self, s: &[Complex64]) -> Complex64 {
        assert_eq!(s.len(), self.r, "one argument per variable");
        let top = self.terms.keys().flatten().copied().max().unwrap_or(0) as usize;
        let v: Vec<Vec<Complex64>> = s
            .iter()
            .map(|&sj| lucas(sj, top, Complex64::new(2.0, 0.0)))
            .collect();
        self.terms
            .iter()
            .map(|(e, c)| {
                let coeff = c.to_f64().expect("coefficients fit in f64");
                e.iter()
                    .enumerate()
                    .fold(Complex64::new(coeff, 0.0), |acc, (j, &ej)| {
                        if ej == 0 {
                            acc
                        } else {
                            acc * v[j][ej as usize]
                        }
                    })
            })
            .sum()
    }
}

/// `G` evaluated directly from its product definition.
pub fn g_direct(x: &[Complex64], n_list: &[i64]) -> Complex64 {
    let r = x.len();
    (0..1u32 << r)
        .map(|mask| {
            x.iter().zip(n_list).enumerate().fold(
                Complex64::new(1.0, 0.0),
                |acc, (j, (&xj, &nj))| {
                    let sign = if mask >> j & 1 == 1 { -1 } else { 1 };
                    acc * xj.powi((sign * nj) as i32)
                },
            ) - 1.0
        })
        .product()
}

fn lucas<T>(s: T, top: usize, two: T) -> Vec<T>
where
    T: Clone + std::ops::Mul<Output = T> + std::ops::Sub<Output = T>,
{
    let mut v = vec![two, s.clone()];
    for n in 2..=top {
        let next = s.clone() * v[n - 1].clone() - v[n - 2].clone();
        v.push(next);
    }
    v.truncate(top + 1);
    v
}

type Laurent = BTreeMap<Vec<i64>, BigInt>;

fn expand_g(n_list: &[i64]) -> Laurent {
    let r = n_list.len();
    let mut poly: Laurent = BTreeMap::from([(vec![0; r], BigInt::one())]);
    for mask in 0..1u32 << r {
        let shift: Vec<i64> = n_list
            .iter()
            .enumerate()
            .map(|(j, &n)| if mask >> j & 1 == 1 { -n } else { n })
            .collect();
        let mut next = Laurent::new();
        for (e, c) in poly {
            let moved: Vec<i64> = e.iter().zip(&shift).map(|(a, b)| a + b).collect();
            *next.entry(moved).or_insert_with(BigInt::zero) += &c;
            *next.entry(e).or_insert_with(BigInt::zero) -= c;
        }
        next.retain(|_, c| !c.is_zero());
        poly = next;
    }
    poly
}

/// `F(t)` with exact rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionPolynomial {
    coeffs: Vec<BigRational>,
}

impl ObstructionPolynomial {
    /// `F~(t/a_1, ..., t/a_r)` with no check on the parameters beyond
    /// `a_j != 0` and `n_j != 0`; the result may vanish.
    pub fn expand(a_list: &[i64], n_list: &[i64]) -> Result<Self> {
        if a_list.len() != n_list.len() {
            return Err(Error::InvalidArgument(format!(
                "a_list has {} entries but n_list has {}",
                a_list.len(),
                n_list.len()
            )));
        }
        if a_list.contains(&0) {
            return Err(Error::InvalidArgument("every a_j must be nonzero".into()));
        }
        let reduced = SymmetricReduction::new(n_list)?;
        let top = reduced.terms.keys().flatten().copied().max().unwrap_or(0) as usize;
        let v: Vec<Vec<Poly>> = a_list
            .iter()
            .map(|&a| {
                let s = Poly(vec![
                    BigRational::zero(),
                    BigRational::new(1.into(), a.into()),
                ]);
                lucas(s, top, Poly::constant(BigRational::from_integer(2.into())))
            })
            .collect();
        let mut f = Poly(Vec::new());
        for (e, c) in &reduced.terms {
            let mut term = Poly::constant(BigRational::from_integer(c.clone()));
            for (j, &ej) in e.iter().enumerate() {
                if ej > 0 {
                    term = term * v[j][ej as usize].clone();
                }
            }
            f = f + term;
        }
        f.trim();
        Ok(Self { coeffs: f.0 })
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// `D F(t)` with `D > 0` the least common denominator.
    pub fn integer_coeffs(&self) -> Vec<BigInt> {
        let d = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        self.coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(d.clone())).to_integer())
            .collect()
    }

    /// The least common denominator `D` used by [`Self::integer_coeffs`].
    pub fn denominator(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// `D F(t) mod m`.
    pub fn eval_mod(&self, t: u64, m: u64) -> u64 {
        let mb = BigInt::from(m);
        let t = t % m;
        self.integer_coeffs().iter().rev().fold(0u64, |acc, c| {
            let c = c.mod_floor(&mb).to_u64().expect("reduced below m");
            (mul_mod(acc, t, m) + c) % m
        })
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * t + c)
    }
}

impl fmt::Display for ObstructionPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            match (first, c.is_negative()) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            if i == 0 || mag.is_integer() && !mag.is_one() {
                write!(f, "{mag}")?;
            } else if !mag.is_integer() {
                write!(f, "({mag})")?;
            }
            match i {
                0 => {}
                1 => write!(f, "t")?,
                _ => write!(f, "t^{i}")?,
            }
        }
        Ok(())
    }
}

/// `F` for distinct nonzero `a_j` and nonzero `n_j`. A vanishing result is
/// reported as an internal inconsistency.
pub fn build_f(a_list: &[i64], n_list: &[i64]) -> Result<ObstructionPolynomial> {
    for i in 0..a_list.len() {
        for j in 0..i {
            if a_list[i] == a_list[j] {
                return Err(Error::InvalidArgument(format!(
                    "a_list entries must be distinct; a_{} = a_{} = {}",
                    j + 1,
                    i + 1,
                    a_list[i]
                )));
            }
        }
    }
    let f = ObstructionPolynomial::expand(a_list, n_list)?;
    if f.is_zero() {
        return Err(Error::SelfCheck(format!(
            "F vanishes identically for distinct a = {a_list:?}, n = {n_list:?}"
        )));
    }
    Ok(f)
}

#[derive(Clone, Debug, PartialEq)]
struct Poly(Vec<BigRational>);

impl Poly {
    fn constant(c: BigRational) -> Self {
        Poly(vec![c])
    }

    fn trim(&mut self) {
        while self.0.last().is_some_and(Zero::is_zero) {
            self.0.pop();
        }
    }
}

impl std::ops::Add for Poly {
    type Output = Poly;

    fn add(self, rhs: Poly) -> Poly {
        let (mut long, short) = if self.0.len() >= rhs.0.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        for (i, c) in short.0.into_iter().enumerate() {
            long.0[i] += c;
        }
        long
    }
}

impl std::ops::Sub for Poly {
    type Output = Poly;

    fn sub(mut self, rhs: Poly) -> Poly {
        if self.0.len() < rhs.0.len() {
            self.0.resize(rhs.0.len(), BigRational::zero());
        }
        for (i, c) in rhs.0.into_iter().enumerate() {
            self.0[i] -= c;
        }
        self
    }
}

impl std::ops::Mul for Poly {
    type Output = Poly;

    fn mul(self, rhs: Poly) -> Poly {
        if self.0.is_empty() || rhs.0.is_empty() {
            return Poly(Vec::new());
        }
        let mut out = vec![BigRational::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }
}

/// `t(x) = a_1 (x_1 + 1/x_1) mod p^l`.
pub fn t_of_tuple(a_1: i64, x_1: u64, modulus: u64) -> u64 {
    let inv = inv_mod(x_1, modulus).expect("tuple entries are units");
    mul_mod(reduce(a_1, modulus), (x_1 + inv) % modulus, modulus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(p: u64, l: u32, a: &[i64], n: &[i64]) -> CountingSpec {
        CountingSpec::new(p, l, a.to_vec(), n.to_vec()).unwrap()
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    /// Every tuple of units, checked against the defining relations.
    fn y_by_scan(s: &CountingSpec) -> Vec<SolutionTuple> {
        let m = s.modulus();
        let units: Vec<u64> = (1..m).filter(|x| x % s.p() != 0).collect();
        let factors = vec![units; s.r()];
        let mut out: Vec<SolutionTuple> = cartesian(&factors)
            .into_iter()
            .filter_map(|x| {
                let ts: Vec<u64> = x
                    .iter()
                    .zip(s.a_list())
                    .map(|(&xj, &aj)| t_of_tuple(aj, xj, m))
                    .collect();
                ts.iter()
                    .all(|&t| t == ts[0])
                    .then(|| SolutionTuple { t: ts[0], x })
            })
            .collect();
        out.sort_by(|u, v| (u.t, &u.x).cmp(&(v.t, &v.x)));
        out
    }

    #[test]
    fn yprime_examples() {
        let y = enum_yprime(&spec(5, 1, &[1], &[])).unwrap();
        let xs: Vec<_> = y.iter().map(|s| s.x.clone()).collect();
        assert_eq!(xs, vec![vec![2], vec![3]]);
        assert!(enum_yprime(&spec(7, 1, &[1, 2], &[])).unwrap().is_empty());
        assert_eq!(enum_yprime(&spec(7, 2, &[1], &[])).unwrap().len(), 28);
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_yprime_char(&spec(5, 1, &[1], &[])).unwrap(), 2);
        assert_eq!(count_yprime_char(&spec(7, 1, &[1, 2], &[])).unwrap(), 0);
        assert_eq!(count_yprime_char(&spec(7, 2, &[1], &[])).unwrap(), 28);
    }

    #[test]
    fn repeated_or_zero_parameters_rejected() {
        assert!(matches!(
            CountingSpec::new(7, 1, vec![1, 8], vec![]),
            Err(Error::RepeatedParameter { .. })
        ));
        assert!(CountingSpec::new(7, 1, vec![1, 2], vec![1, 0]).is_err());
        assert!(CountingSpec::new(7, 1, vec![7], vec![]).is_err());
        assert!(CountingSpec::new(9, 1, vec![1], vec![]).is_err());
        assert!(enum_y0(&spec(7, 1, &[1, 2], &[])).is_err());
    }

    #[test]
    fn enumeration_matches_tuple_scan() {
        for (p, l, a) in [
            (5, 1, vec![1, 2]),
            (7, 1, vec![1, 3]),
            (3, 2, vec![1]),
            (5, 2, vec![1, 2]),
            (3, 3, vec![2]),
        ] {
            let s = spec(p, l, &a, &[]);
            assert_eq!(enum_y(&s).unwrap(), y_by_scan(&s), "p={p} l={l} a={a:?}");
        }
    }

    #[test]
    fn tuples_satisfy_the_relation() {
        let s = spec(13, 2, &[1, 5], &[]);
        let m = s.modulus();
        for sol in enum_y(&s).unwrap() {
            for (&x, &a) in sol.x.iter().zip(s.a_list()) {
                assert_eq!(t_of_tuple(a, x, m), sol.t);
            }
        }
    }

    #[test]
    fn qr_count_matches_enumeration() {
        for p in [11u64, 13, 17, 19, 23, 29, 31] {
            for l in 1..=2 {
                for a in [vec![1], vec![3], vec![1, 2], vec![2, 5]] {
                    let s = spec(p, l, &a, &[]);
                    assert_eq!(
                        enum_yprime(&s).unwrap().len() as u64,
                        count_yprime_char(&s).unwrap(),
                        "p={p} l={l} a={a:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn y0_examples() {
        for (p, l) in [(5, 1), (7, 2), (11, 1)] {
            let sets = enum_y0(&spec(p, l, &[1], &[1])).unwrap();
            assert!(sets.y0_prime.is_empty());
            assert!(sets.y0.iter().all(|s| s.x == vec![1]));
        }
        let sets = enum_y0(&spec(7, 1, &[1], &[2])).unwrap();
        let xs: Vec<_> = sets.y0.iter().map(|s| s.x[0]).collect();
        assert_eq!(xs, vec![1, 6]);
        assert!(sets.y0_prime.is_empty());
    }

    #[test]
    fn f_examples() {
        let f = build_f(&[1], &[1]).unwrap();
        assert_eq!(f.coeffs(), &[rat(2), rat(-1)]);
        assert_eq!(f.to_string(), "2 - t");
        let f = build_f(&[1], &[2]).unwrap();
        assert_eq!(f.coeffs(), &[rat(4), rat(0), rat(-1)]);
        assert_eq!(f.to_string(), "4 - t^2");
        // G = (s_1 - s_2)^2 for n = (1, -1), and s_2 = t/2
        let f = build_f(&[1, 2], &[1, -1]).unwrap();
        assert_eq!(
            f.coeffs(),
            &[rat(0), rat(0), BigRational::new(1.into(), 4.into())]
        );
        assert_eq!(f.to_string(), "(1/4)t^2");
    }

    #[test]
    fn repeated_a_rejected_and_f_vanishes() {
        assert!(matches!(
            build_f(&[1, 1], &[1, 1]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(ObstructionPolynomial::expand(&[1, 1], &[1, 1])
            .unwrap()
            .is_zero());
        assert!(build_f(&[1, 2], &[1, 0]).is_err());
        assert!(build_f(&[0, 2], &[1, 1]).is_err());
    }

    #[test]
    fn rational_coefficients_clear_to_integers() {
        // r = 1, a = 2, n = 1: F(t) = 2 - t/2, D = 2
        let f = build_f(&[2], &[1]).unwrap();
        assert_eq!(f.denominator(), BigInt::from(2));
        assert_eq!(f.integer_coeffs(), vec![BigInt::from(4), BigInt::from(-1)]);
        assert_eq!(f.eval_mod(4, 7), 0);
        assert_eq!(f.eval(&rat(4)), rat(0));
    }

    #[test]
    fn degree_bound() {
        for (a, n) in [
            (vec![1, 2], vec![1, -1]),
            (vec![1, 2], vec![2, 3]),
            (vec![1, 3], vec![-2, 1]),
            (vec![3], vec![5]),
        ] {
            let f = build_f(&a, &n).unwrap();
            let bound =
                (1usize << a.len()) * n.iter().map(|v| v.unsigned_abs() as usize).max().unwrap();
            assert!(
                f.degree().unwrap() <= bound,
                "a={a:?} n={n:?} deg={:?}",
                f.degree()
            );
        }
    }

    #[test]
    fn chebyshev_reduction_matches_direct_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [vec![1], vec![3], vec![1, -1], vec![2, 3], vec![1, -2, 1]] {
            let red = SymmetricReduction::new(&n).unwrap();
            for _ in 0..50 {
                let x: Vec<Complex64> = (0..n.len())
                    .map(|_| {
                        Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
                    })
                    .collect();
                let s: Vec<Complex64> = x.iter().map(|&xj| xj + xj.inv()).collect();
                let diff = (g_direct(&x, &n) - red.eval(&s)).norm();
                assert!(diff < 1e-10, "n={n:?} diff={diff}");
            }
        }
    }

    #[test]
    fn f_vanishes_on_y0() {
        for (p, l) in [(11, 1), (13, 2), (29, 1), (17, 2)] {
            for (a, n) in [
                (vec![1, 2], vec![1, -1]),
                (vec![1, 3], vec![2, 1]),
                (vec![2], vec![3]),
            ] {
                let s = spec(p, l, &a, &n);
                let f = build_f(&a, &n).unwrap();
                let sets = enum_y0(&s).unwrap();
                for sol in &sets.y0 {
                    assert_eq!(
                        f.eval_mod(sol.t, s.modulus()),
                        0,
                        "p={p} l={l} a={a:?} n={n:?} {sol:?}"
                    );
                }
                let bound = (1u64 << a.len()) * f.degree().unwrap() as u64 * s.modulus() / p;
                assert!(sets.y0_prime.len() as u64 <= bound);
            }
        }
    }

    #[test]
    fn y0_prime_nonempty_when_minus_one_is_a_square() {
        // x_1 = x_2 and s = 2 s force s = 0, i.e. x^2 = -1
        let s = spec(13, 1, &[1, 2], &[1, -1]);
        let sets = enum_y0(&s).unwrap();
        let xs: Vec<_> = sets.y0_prime.iter().map(|t| t.x.clone()).collect();
        assert_eq!(xs, vec![vec![5, 5], vec![8, 8]]);
        assert!(sets.y0_prime.iter().all(|t| t.t == 0));
    }
}
