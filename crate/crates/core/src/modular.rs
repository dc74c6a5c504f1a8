//! Exact arithmetic modulo odd prime powers.
//!
//! Residues are `u64` values in `[0, m)`; products go through `u128`.
//! Moduli are capped at `u32::MAX` so that `q * phi(q)` and every dense
//! table index stay inside 64 bits.

use crate::{Error, Result};

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Canonical representative of a signed integer in `[0, m)`.
#[inline]
pub fn reduce(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return if m == 1 { Some(0) } else { None };
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Trial division; inputs here never exceed 32 bits.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime factors in ascending order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// The modulus `q = p^k` for an odd prime `p`, with `l = floor(k / 2)` and
/// `phi = phi(q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimePowerModulus {
    p: u64,
    k: u32,
    q: u64,
    l: u32,
    phi: u64,
}

impl PrimePowerModulus {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        let invalid = |reason| Error::InvalidModulus { p, k, reason };
        if k == 0 {
            return Err(invalid("exponent must be at least 1"));
        }
        if p == 2 {
            return Err(invalid("p = 2 is not supported (unit group not cyclic)"));
        }
        if !is_prime(p) {
            return Err(invalid("p must be an odd prime"));
        }
        let q = p
            .checked_pow(k)
            .filter(|&q| q <= u32::MAX as u64)
            .ok_or_else(|| invalid("p^k exceeds the 32-bit modulus cap"))?;
        Ok(Self {
            p,
            k,
            q,
            l: k / 2,
            phi: q / p * (p - 1),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    /// `p^e`; `e <= k` keeps this in range.
    pub fn p_pow(&self, e: u32) -> u64 {
        self.p.pow(e)
    }

    /// `p^l`, the modulus of the stationary-point congruence.
    pub fn root_modulus(&self) -> u64 {
        self.p_pow(self.l)
    }

    /// `p^(k - l)`, the modulus `t_chi` lives in.
    pub fn t_modulus(&self) -> u64 {
        self.p_pow(self.k - self.l)
    }

    pub fn is_unit(&self, x: u64) -> bool {
        !x.is_multiple_of(self.p)
    }

    /// Reduce a signed integer mod `q`, rejecting multiples of `p`.
    pub fn unit(&self, x: i64) -> Result<u64> {
        let r = reduce(x, self.q);
        if self.is_unit(r) {
            Ok(r)
        } else {
            Err(Error::NotAUnit {
                value: x,
                modulus: self.q,
            })
        }
    }
}

/// Smallest generator of `(Z/qZ)*`.
pub fn primitive_root(m: &PrimePowerModulus) -> u64 {
    let (q, phi) = (m.q(), m.phi());
    let factors = prime_factors(phi);
    (2..q)
        .filter(|&g| m.is_unit(g))
        .find(|&g| factors.iter().all(|&r| pow_mod(g, phi / r, q) != 1))
        .expect("unit group of an odd prime power is cyclic")
}

/// Legendre symbol `(n | p)` as -1, 0 or 1.
pub fn legendre(n: u64, p: u64) -> i8 {
    match pow_mod(n % p, (p - 1) / 2, p) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// All square roots of `n` modulo an odd prime `p`, ascending.
pub fn sqrt_mod_prime(n: u64, p: u64) -> Vec<u64> {
    let n = n % p;
    if n == 0 {
        return vec![0];
    }
    if legendre(n, p) != 1 {
        return Vec::new();
    }
    let r = tonelli_shanks(n, p);
    let (lo, hi) = if r <= p - r { (r, p - r) } else { (p - r, r) };
    vec![lo, hi]
}

fn tonelli_shanks(n: u64, p: u64) -> u64 {
    if p % 4 == 3 {
        return pow_mod(n, (p + 1) / 4, p);
    }
    let mut s = p - 1;
    let mut e = 0u32;
    while s.is_multiple_of(2) {
        s /= 2;
        e += 1;
    }
    let z = (2..p)
        .find(|&z| legendre(z, p) == -1)
        .expect("odd prime has a non-residue");
    let mut c = pow_mod(z, s, p);
    let mut x = pow_mod(n, s.div_ceil(2), p);
    let mut b = pow_mod(n, s, p);
    let mut r = e;
    while b != 1 {
        let mut m = 0;
        let mut t = b;
        while t != 1 {
            t = mul_mod(t, t, p);
            m += 1;
        }
        let g = pow_mod(c, 1 << (r - m - 1), p);
        x = mul_mod(x, g, p);
        c = mul_mod(g, g, p);
        b = mul_mod(b, c, p);
        r = m;
    }
    x
}

/// `h(x) = a x^2 + t x - b` modulo `p^l`, with `a` and `b` units.
///
/// Since `h(0) = -b` is a unit, every root is automatically a unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadraticCongruence {
    a: u64,
    t: u64,
    b: u64,
    p: u64,
    l: u32,
    modulus: u64,
}

impl QuadraticCongruence {
    /// `p` is assumed to be an odd prime.
    pub fn new(a: i64, t: i64, b: i64, p: u64, l: u32) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidArgument(
                "quadratic congruence needs l >= 1".into(),
            ));
        }
        let modulus = p
            .checked_pow(l)
            .filter(|&m| m <= u32::MAX as u64)
            .ok_or_else(|| Error::InvalidArgument(format!("{p}^{l} exceeds the modulus cap")))?;
        let (ar, br) = (reduce(a, modulus), reduce(b, modulus));
        for (v, r) in [(a, ar), (b, br)] {
            if r % p == 0 {
                return Err(Error::NotAUnit { value: v, modulus });
            }
        }
        Ok(Self {
            a: ar,
            t: reduce(t, modulus),
            b: br,
            p,
            l,
            modulus,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `h(x) mod p^l`.
    pub fn eval(&self, x: u64) -> u64 {
        let m = self.modulus;
        let x = x % m;
        let ax2 = mul_mod(self.a, mul_mod(x, x, m), m);
        sub_mod(add_mod(ax2, mul_mod(self.t, x, m), m), self.b, m)
    }

    /// Discriminant `t^2 + 4ab` reduced mod `p`.
    pub fn discriminant_mod_p(&self) -> u64 {
        let p = self.p;
        add_mod(
            mul_mod(self.t, self.t, p),
            mul_mod(4 * (self.a % p), self.b % p, p),
            p,
        )
    }

    pub fn is_separable(&self) -> bool {
        self.discriminant_mod_p() != 0
    }
}

/// All roots of `h(x) == 0 (mod p^l)` in ascending order.
///
/// Separable case: solve mod `p` and Newton-lift each root (0 or 2 roots).
/// Degenerate case (`p | t^2 + 4ab`): `h == a (x - x0)^2 (mod p)`, so every
/// root reduces to `x0`; the residue class of `x0` is scanned.
pub fn lift_quadratic_roots(c: &QuadraticCongruence) -> Vec<u64> {
    let (p, m) = (c.p, c.modulus);
    let inv_2a = inv_mod(mul_mod(2, c.a % p, p), p).expect("a is a unit");
    let minus_t = sub_mod(0, c.t % p, p);
    let disc = c.discriminant_mod_p();

    if disc == 0 {
        let x0 = mul_mod(minus_t, inv_2a, p);
        let fiber = m / p;
        return (0..fiber)
            .map(|i| x0 + i * p)
            .filter(|&x| c.eval(x) == 0)
            .collect();
    }

    let mut roots: Vec<u64> = sqrt_mod_prime(disc, p)
        .into_iter()
        .map(|s| mul_mod(add_mod(minus_t, s, p), inv_2a, p))
        .map(|x| hensel_lift(c, x))
        .collect();
    roots.sort_unstable();
    roots
}

/// Newton iteration `x <- x - h(x) / h'(x)`; precision doubles each step.
fn hensel_lift(c: &QuadraticCongruence, mut x: u64) -> u64 {
    let m = c.modulus;
    let mut precision = 1u32;
    while precision < c.l {
        let deriv = add_mod(mul_mod(mul_mod(2, c.a, m), x, m), c.t, m);
        let inv = inv_mod(deriv, m).expect("h'(x) is a unit at a simple root");
        x = sub_mod(x, mul_mod(c.eval(x), inv, m), m);
        precision *= 2;
    }
    debug_assert_eq!(c.eval(x), 0);
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn order(g: u64, q: u64) -> u64 {
        let mut x = g % q;
        let mut n = 1;
        while x != 1 {
            x = mul_mod(x, g, q);
            n += 1;
        }
        n
    }

    #[test]
    fn modulus_fields() {
        let m = PrimePowerModulus::new(7, 3).unwrap();
        assert_eq!((m.q(), m.l(), m.phi()), (343, 1, 294));
        assert_eq!((m.root_modulus(), m.t_modulus()), (7, 49));
        let m = PrimePowerModulus::new(5, 4).unwrap();
        assert_eq!((m.q(), m.l(), m.phi()), (625, 2, 500));
        assert_eq!((m.root_modulus(), m.t_modulus()), (25, 25));
    }

    #[test]
    fn modulus_rejects_bad_input() {
        assert!(PrimePowerModulus::new(2, 3).is_err());
        assert!(PrimePowerModulus::new(9, 1).is_err());
        assert!(PrimePowerModulus::new(5, 0).is_err());
        assert!(PrimePowerModulus::new(3, 40).is_err());
        assert!(PrimePowerModulus::new(65_537, 2).is_err());
    }

    #[test]
    fn primitive_root_examples() {
        // exhaustive oracle: smallest unit whose order is phi(q)
        for (p, k, expected) in [(3, 2, 2), (5, 1, 2), (7, 2, 3)] {
            let m = PrimePowerModulus::new(p, k).unwrap();
            let oracle = (2..m.q())
                .filter(|&g| m.is_unit(g))
                .find(|&g| order(g, m.q()) == m.phi())
                .unwrap();
            assert_eq!(oracle, expected);
            assert_eq!(primitive_root(&m), expected);
        }
    }

    #[test]
    fn primitive_root_small_moduli() {
        for (p, k) in [(3, 1), (3, 5), (11, 2), (13, 3), (29, 2), (31, 1)] {
            let m = PrimePowerModulus::new(p, k).unwrap();
            let g = primitive_root(&m);
            assert_eq!(order(g, m.q()), m.phi(), "p={p} k={k}");
        }
    }

    #[test]
    fn inverse_and_reduce() {
        assert_eq!(inv_mod(2, 9), Some(5));
        assert_eq!(inv_mod(3, 9), None);
        assert_eq!(reduce(-1, 25), 24);
        assert_eq!(reduce(-26, 25), 24);
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(sqrt_mod_prime(4, 7), vec![2, 5]);
        assert_eq!(sqrt_mod_prime(3, 7), Vec::<u64>::new());
        assert_eq!(sqrt_mod_prime(0, 7), vec![0]);
    }

    #[test]
    fn sqrt_matches_euler_criterion_exhaustively() {
        for p in (3..200).filter(|&p| is_prime(p)) {
            for n in 0..p {
                let roots = sqrt_mod_prime(n, p);
                let euler = pow_mod(n, (p - 1) / 2, p);
                assert_eq!(!roots.is_empty(), euler <= 1, "p={p} n={n}");
                for &r in &roots {
                    assert_eq!(mul_mod(r, r, p), n);
                }
                assert!(roots.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn lift_examples() {
        let h = QuadraticCongruence::new(1, 0, -1, 3, 1).unwrap();
        assert!(lift_quadratic_roots(&h).is_empty());
        let h = QuadraticCongruence::new(1, 0, -1, 5, 1).unwrap();
        assert_eq!(lift_quadratic_roots(&h), vec![2, 3]);
        let h = QuadraticCongruence::new(1, 0, 1, 5, 2).unwrap();
        assert_eq!(lift_quadratic_roots(&h), vec![1, 24]);
    }

    #[test]
    fn lift_degenerate_scans_fiber() {
        // x^2 - 2x + 1 = (x - 1)^2 mod 9: roots x with 3 | x - 1
        let h = QuadraticCongruence::new(1, -2, -1, 3, 2).unwrap();
        assert!(!h.is_separable());
        assert_eq!(lift_quadratic_roots(&h), vec![1, 4, 7]);
    }

    #[test]
    fn lift_rejects_non_units() {
        assert!(QuadraticCongruence::new(5, 1, 1, 5, 2).is_err());
        assert!(QuadraticCongruence::new(1, 1, 10, 5, 2).is_err());
    }

    #[test]
    fn lift_agrees_with_exhaustive_scan() {
        for p in [3u64, 5, 7] {
            for l in [1u32, 2] {
                let m = p.pow(l);
                for a in (1..m).filter(|a| a % p != 0) {
                    for t in 0..m {
                        for b in (1..m).filter(|b| b % p != 0) {
                            let h = QuadraticCongruence::new(a as i64, t as i64, b as i64, p, l)
                                .unwrap();
                            let scan: Vec<u64> =
                                (0..m).filter(|&x| x % p != 0 && h.eval(x) == 0).collect();
                            let roots = lift_quadratic_roots(&h);
                            assert_eq!(roots, scan, "p={p} l={l} a={a} t={t} b={b}");
                            if h.is_separable() {
                                assert!(roots.is_empty() || roots.len() == 2);
                            }
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn separable_lifts_are_roots(
            pi in 0usize..6, l in 1u32..5, a in 1i64..10_000, t in -10_000i64..10_000, b in 1i64..10_000
        ) {
            let p = [11u64, 13, 17, 101, 103, 211][pi];
            prop_assume!(!(a as u64).is_multiple_of(p) && !(b as u64).is_multiple_of(p));
            let h = QuadraticCongruence::new(a, t, b, p, l).unwrap();
            prop_assume!(h.is_separable());
            let roots = lift_quadratic_roots(&h);
            prop_assert!(roots.is_empty() || roots.len() == 2);
            for x in roots {
                prop_assert_eq!(h.eval(x), 0);
                prop_assert!(x % p != 0);
            }
        }
    }
}
