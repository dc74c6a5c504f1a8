//! Multiplicative characters modulo `q = p^k`.
//!
//! With `g` the table's generator, character number `m` is
//! `chi_m(x) = e(m * log_g(x) / phi(q))`. The parameter `t_chi` is read off
//! the restriction of `chi` to the subgroup `1 + p^l Z`:
//!
//! - even `k = 2l`: `chi(1 + p^l x) = e(t x / p^l)`
//! - odd `k = 2l + 1`: `chi(1 + p^l x + p^(2l) x^2 / 2) = e(t x / p^(l+1))`
//!
//! In both cases `x -> E(x)` (the argument of `chi`) is a homomorphism from
//! `Z/p^(k-l)` into the units, so `t_chi = m * tau` where `tau` depends only
//! on the table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::angle::RationalAngle;
use crate::dlog::DlogTable;
use crate::modular::{add_mod, inv_mod, mul_mod, reduce, PrimePowerModulus};
use crate::{Error, Result};

const SELF_CHECK_POINTS: usize = 8;

#[derive(Clone, Copy, Debug)]
pub struct Character<'a> {
    table: &'a DlogTable,
    m: u64,
}

impl PartialEq for Character<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.table, other.table) && self.m == other.m
    }
}

impl Eq for Character<'_> {}

impl<'a> Character<'a> {
    pub fn new(table: &'a DlogTable, m: u64) -> Result<Self> {
        let phi = table.modulus().phi();
        if m >= phi {
            return Err(Error::OutOfRange {
                what: "character index",
                value: m,
                max: phi - 1,
            });
        }
        Ok(Self { table, m })
    }

    pub fn trivial(table: &'a DlogTable) -> Self {
        Self { table, m: 0 }
    }

    /// Quadratic character, `m = phi / 2`.
    pub fn quadratic(table: &'a DlogTable) -> Self {
        Self {
            table,
            m: table.modulus().phi() / 2,
        }
    }

    pub fn index(&self) -> u64 {
        self.m
    }

    pub fn table(&self) -> &'a DlogTable {
        self.table
    }

    pub fn modulus(&self) -> &'a PrimePowerModulus {
        self.table.modulus()
    }

    pub fn is_trivial(&self) -> bool {
        self.m == 0
    }

    /// `chi(x)` as an exact angle; rejects non-units.
    pub fn eval(&self, x: i64) -> Result<RationalAngle> {
        let q = self.modulus().q();
        let log = self.table.log(reduce(x, q)).ok_or(Error::NotAUnit {
            value: x,
            modulus: q,
        })?;
        Ok(self.eval_log(log))
    }

    /// `chi(g^e)`.
    pub fn eval_log(&self, e: u64) -> RationalAngle {
        let phi = self.modulus().phi();
        RationalAngle::new(mul_mod(self.m, e, phi) as i128, phi)
    }

    /// `chi * other`.
    pub fn mul(&self, other: &Character<'a>) -> Character<'a> {
        Self {
            table: self.table,
            m: add_mod(self.m, other.m, self.modulus().phi()),
        }
    }

    pub fn inverse(&self) -> Character<'a> {
        let phi = self.modulus().phi();
        Self {
            table: self.table,
            m: (phi - self.m) % phi,
        }
    }

    /// `t_chi`, verified against the defining relation at a handful of
    /// pseudo-random points.
    pub fn t(&self) -> Result<TChi> {
        let param = TParam::new(self.table)?;
        let t = param.t_of(self.m);
        let mut rng = ChaCha8Rng::seed_from_u64(self.m);
        for _ in 0..SELF_CHECK_POINTS {
            let x = rng.random_range(0..t.modulus);
            check_t_relation(self, t, x)?;
        }
        Ok(t)
    }
}

/// `t_chi` together with the modulus `p^(k-l)` it lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TChi {
    value: u64,
    modulus: u64,
}

impl TChi {
    pub fn new(value: u64, modulus: u64) -> Self {
        Self {
            value: value % modulus,
            modulus,
        }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

/// Point `E(x)` of the subgroup `1 + p^l Z` whose character value defines
/// `t_chi`.
pub(crate) fn t_embedding(m: &PrimePowerModulus, x: u64) -> u64 {
    let (q, l) = (m.q(), m.l());
    let pl = m.p_pow(l);
    let linear = add_mod(1, mul_mod(pl, x, q), q);
    if m.k().is_multiple_of(2) {
        return linear;
    }
    // the quadratic term only matters mod p, so any inverse of 2 that is
    // valid mod p gives the same point; use the one mod p^(l+1)
    let inv2 = inv_mod(2, m.p_pow(l + 1)).expect("p is odd");
    let quad = mul_mod(mul_mod(inv2, m.p_pow(2 * l), q), mul_mod(x, x, q), q);
    add_mod(linear, quad, q)
}

/// `t_chi_m = m * tau (mod p^(k-l))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct TParam {
    pub tau: u64,
    pub modulus: u64,
}

impl TParam {
    pub fn new(table: &DlogTable) -> Result<Self> {
        let m = table.modulus();
        if m.k() < 2 {
            return Err(Error::ExponentTooSmall {
                k: m.k(),
                needed: 2,
                what: "t_chi",
            });
        }
        let modulus = m.t_modulus();
        let log_u = table.log(t_embedding(m, 1)).expect("1 + p^l x is a unit");
        let index = m.phi() / modulus;
        if !log_u.is_multiple_of(index) {
            return Err(Error::SelfCheck(format!(
                "log(E(1)) = {log_u} is not divisible by phi/p^(k-l) = {index}"
            )));
        }
        Ok(Self {
            tau: log_u / index,
            modulus,
        })
    }

    #[inline]
    pub fn t_of(&self, m: u64) -> TChi {
        TChi::new(mul_mod(m, self.tau, self.modulus), self.modulus)
    }
}

fn check_t_relation(chi: &Character<'_>, t: TChi, x: u64) -> Result<()> {
    let point = t_embedding(chi.modulus(), x);
    let lhs = chi.eval_log(chi.table.log(point).expect("unit"));
    let rhs = RationalAngle::new(mul_mod(t.value, x, t.modulus) as i128, t.modulus);
    if lhs != rhs {
        return Err(Error::SelfCheck(format!(
            "chi_{}(E({x})) = {lhs} but e(t x / {}) = {rhs} with t = {}",
            chi.m, t.modulus, t.value
        )));
    }
    Ok(())
}

/// All `phi(q)` characters in index order; index 0 is trivial.
pub fn enumerate_characters(table: &DlogTable) -> impl Iterator<Item = Character<'_>> + '_ {
    (0..table.modulus().phi()).map(move |m| Character { table, m })
}

/// `C_p(k, j)`: characters trivial on every `x == 1 (mod p^j)`.
///
/// For `j >= 1` the subgroup `1 + p^j Z` is the set of units whose log is a
/// multiple of `p^(j-1) (p - 1)`, so the annihilator is
/// `{ m : p^(k-j) | m }`, of order `p^(j-1) (p - 1)`.
pub fn subgroup_c(table: &DlogTable, j: u32) -> Result<Vec<Character<'_>>> {
    let m = table.modulus();
    if j > m.k() {
        return Err(Error::OutOfRange {
            what: "subgroup level j",
            value: j as u64,
            max: m.k() as u64,
        });
    }
    if j == 0 {
        return Ok(vec![Character::trivial(table)]);
    }
    let step = m.p_pow(m.k() - j);
    Ok((0..m.phi())
        .step_by(step as usize)
        .map(|idx| Character { table, m: idx })
        .collect())
}

/// Reduce each `a_j` mod `p`, rejecting multiples of `p`.
pub(crate) fn units_mod_p(a_list: &[i64], p: u64) -> Result<Vec<u64>> {
    a_list
        .iter()
        .map(|&a| match reduce(a, p) {
            0 => Err(Error::NotAUnit {
                value: a,
                modulus: p,
            }),
            r => Ok(r),
        })
        .collect()
}

/// `t mod p` avoids `+-2 a_j mod p` for every `j`.
#[inline]
pub(crate) fn t_admissible(t_mod_p: u64, a_mod_p: &[u64], p: u64) -> bool {
    a_mod_p.iter().all(|&a| {
        let two_a = mul_mod(2, a, p);
        t_mod_p != two_a && t_mod_p != (p - two_a) % p
    })
}

/// Membership of `chi` in `S_q(a_1, ..., a_r)`.
pub fn in_s(chi: &Character<'_>, a_list: &[i64]) -> Result<bool> {
    let p = chi.modulus().p();
    let a = units_mod_p(a_list, p)?;
    let t = chi.t()?;
    Ok(t_admissible(t.value % p, &a, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::PrimePowerModulus;

    fn table(p: u64, k: u32) -> DlogTable {
        DlogTable::build(PrimePowerModulus::new(p, k).unwrap())
    }

    #[test]
    fn enumeration_counts() {
        for (p, k, n) in [(3, 2, 6), (5, 2, 20), (3, 3, 18)] {
            let t = table(p, k);
            let chars: Vec<_> = enumerate_characters(&t).collect();
            assert_eq!(chars.len(), n);
            assert!(chars[0].is_trivial());
            assert!(chars.iter().enumerate().all(|(i, c)| c.index() == i as u64));
        }
    }

    #[test]
    fn eval_examples() {
        let t = table(3, 2);
        assert_eq!(Character::trivial(&t).eval(5).unwrap(), RationalAngle::ZERO);
        let chi1 = Character::new(&t, 1).unwrap();
        assert_eq!(chi1.eval(2).unwrap(), RationalAngle::new(1, 6));
        let chi3 = Character::new(&t, 3).unwrap();
        assert_eq!(chi3.eval(4).unwrap(), RationalAngle::ZERO);
        assert!(matches!(chi1.eval(6), Err(Error::NotAUnit { .. })));
        assert!(Character::new(&t, 6).is_err());
    }

    #[test]
    fn t_examples() {
        let t = table(3, 2);
        let tv = |m| Character::new(&t, m).unwrap().t().unwrap();
        assert_eq!(tv(0), TChi::new(0, 3));
        assert_eq!(tv(1), TChi::new(1, 3));
        assert_eq!(tv(3), TChi::new(0, 3));
        let t1 = table(7, 1);
        assert!(matches!(
            Character::trivial(&t1).t(),
            Err(Error::ExponentTooSmall { .. })
        ));
    }

    #[test]
    fn t_relation_holds_everywhere() {
        for (p, k) in [(3, 2), (3, 3), (5, 3), (3, 4), (3, 5), (7, 2), (5, 4)] {
            let t = table(p, k);
            for chi in enumerate_characters(&t) {
                let tc = chi.t().unwrap();
                assert_eq!(tc.modulus(), t.modulus().t_modulus());
                for x in 0..tc.modulus() {
                    check_t_relation(&chi, tc, x).unwrap();
                }
            }
        }
    }

    #[test]
    fn multiplicativity_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, k) in [(3, 3), (5, 2), (7, 3), (11, 2)] {
            let t = table(p, k);
            let q = t.modulus().q() as i64;
            for _ in 0..1000 {
                let chi = Character::new(&t, rng.random_range(0..t.modulus().phi())).unwrap();
                let (x, y) = loop {
                    let (x, y) = (rng.random_range(1..q), rng.random_range(1..q));
                    if x % p as i64 != 0 && y % p as i64 != 0 {
                        break (x, y);
                    }
                };
                let xy = (x * y) % q;
                assert_eq!(
                    chi.eval(xy).unwrap(),
                    chi.eval(x).unwrap() + chi.eval(y).unwrap()
                );
                assert_eq!(chi.eval(1).unwrap(), RationalAngle::ZERO);
            }
        }
    }

    #[test]
    fn t_is_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (p, k) in [(3, 3), (5, 2), (7, 3), (3, 4)] {
            let t = table(p, k);
            let phi = t.modulus().phi();
            for _ in 0..200 {
                let c1 = Character::new(&t, rng.random_range(0..phi)).unwrap();
                let c2 = Character::new(&t, rng.random_range(0..phi)).unwrap();
                let (t1, t2, t12) = (c1.t().unwrap(), c2.t().unwrap(), c1.mul(&c2).t().unwrap());
                assert_eq!(t12.value(), (t1.value() + t2.value()) % t1.modulus());
            }
        }
    }

    #[test]
    fn fibers_of_t_have_equal_size() {
        for (p, k) in [(3, 2), (5, 2), (3, 3), (7, 2), (11, 2), (5, 3), (7, 3)] {
            let t = table(p, k);
            let m = t.modulus();
            let mut counts = vec![0u64; m.t_modulus() as usize];
            for chi in enumerate_characters(&t) {
                counts[chi.t().unwrap().value() as usize] += 1;
            }
            let c_l = subgroup_c(&t, m.l()).unwrap().len() as u64;
            assert!(counts
                .iter()
                .all(|&c| c == m.phi() / m.t_modulus() && c == c_l));
        }
    }

    #[test]
    fn t_congruence_matches_subgroup_coset() {
        // t_chi == t_chi' (mod p^j) iff chi' / chi lies in C_p(k, k - j), j <= l
        for (p, k) in [(3, 4), (5, 4), (3, 5)] {
            let t = table(p, k);
            let m = t.modulus();
            let chars: Vec<_> = enumerate_characters(&t).collect();
            for j in 0..=m.l() {
                let pj = m.p_pow(j);
                let sub: Vec<u64> = subgroup_c(&t, k - j)
                    .unwrap()
                    .iter()
                    .map(|c| c.index())
                    .collect();
                for c1 in chars.iter().step_by(7) {
                    for c2 in &chars {
                        let same = c1.t().unwrap().value() % pj == c2.t().unwrap().value() % pj;
                        let ratio = c2.mul(&c1.inverse()).index();
                        assert_eq!(same, sub.binary_search(&ratio).is_ok());
                    }
                }
            }
        }
    }

    #[test]
    fn exclusion_count() {
        for (p, k) in [(3, 2), (5, 2), (3, 3), (7, 2), (11, 2), (5, 3), (7, 3)] {
            let t = table(p, k);
            for a in (1..p.min(6) as i64).filter(|a| !(*a as u64).is_multiple_of(p)) {
                let excluded = enumerate_characters(&t)
                    .filter(|c| !in_s(c, &[a]).unwrap())
                    .count() as u64;
                assert_eq!(excluded, 2 * p.pow(k - 2) * (p - 1), "p={p} k={k} a={a}");
            }
        }
    }

    #[test]
    fn subgroup_examples() {
        let t = table(3, 2);
        assert_eq!(subgroup_c(&t, 2).unwrap().len(), 6);
        let c1: Vec<u64> = subgroup_c(&t, 1)
            .unwrap()
            .iter()
            .map(|c| c.index())
            .collect();
        assert_eq!(c1, vec![0, 3]);
        assert_eq!(subgroup_c(&t, 0).unwrap().len(), 1);
        assert!(subgroup_c(&t, 3).is_err());
        assert_eq!(subgroup_c(&table(3, 3), 1).unwrap().len(), 2);
    }

    #[test]
    fn subgroup_matches_exhaustive_definition() {
        for (p, k) in [(3, 2), (3, 3), (5, 2), (7, 2), (5, 3)] {
            let t = table(p, k);
            let q = t.modulus().q();
            for j in 0..=k {
                let pj = p.pow(j);
                let oracle: Vec<u64> = enumerate_characters(&t)
                    .filter(|c| {
                        (1..q)
                            .filter(|x| x % pj == 1 % pj && x % p != 0)
                            .all(|x| c.eval(x as i64).unwrap().is_zero())
                    })
                    .map(|c| c.index())
                    .collect();
                let got: Vec<u64> = subgroup_c(&t, j)
                    .unwrap()
                    .iter()
                    .map(|c| c.index())
                    .collect();
                assert_eq!(got, oracle, "p={p} k={k} j={j}");
                if j >= 1 {
                    assert_eq!(got.len() as u64, p.pow(j - 1) * (p - 1));
                }
            }
        }
    }

    #[test]
    fn in_s_examples() {
        let t = table(3, 2);
        assert!(in_s(&Character::trivial(&t), &[1]).unwrap());
        assert!(!in_s(&Character::new(&t, 1).unwrap(), &[1]).unwrap());
        assert!(matches!(
            in_s(&Character::trivial(&t), &[3]),
            Err(Error::NotAUnit { .. })
        ));
    }
}
