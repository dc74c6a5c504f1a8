//! Twisted Kloosterman sums modulo odd prime powers.
//!
//! The crate evaluates
//!
//! ```text
//! K_q(a, b, chi) = sum over units x mod q of e_q(a x + b x^-1) chi(x)
//! ```
//!
//! for `q = p^k` with `p` an odd prime, both by direct summation (`O(q)`) and
//! through the stationary-phase closed forms (roots of `h(x) = a x^2 + t x - b`
//! modulo `p^l`, with a quadratic Gauss factor when `k` is odd). On top of the
//! evaluators it provides the limit measure `mu = 1/2 delta_0 + arcsine`,
//! empirical distribution statistics for the normalized family
//! `q^-1/2 K_q(a, -a, chi)` as `chi` varies, and the counting sets `Y'`, `Y_0`
//! together with the obstruction polynomial `F(t)`.
//!
//! Module map:
//! - [`modular`]: prime powers, primitive roots, square roots, Hensel lifting
//! - [`dlog`]: dense discrete-log tables with an on-disk cache
//! - [`angle`]: exact rational roots of unity
//! - [`characters`]: multiplicative characters, `t_chi`, the subgroups `C_p(k, j)`
//! - [`kloosterman`]: brute-force and closed-form sums, Gauss factors, families
//! - [`measure`]: the limit measures, sampler, KS distance, joint moments
//! - [`counting`]: `Y'`, `Y_0` enumeration and `F(t)`
//! - [`verify`]: the acceptance suite shared by the CLI and the test target
//!
//! With the default `parallel` feature, per-character work is spread over a
//! rayon pool. All reductions use fixed chunk boundaries, so results are
//! bit-identical with and without the feature and for any worker count.

pub mod angle;
pub mod characters;
pub mod counting;
pub mod dlog;
mod error;
pub mod kloosterman;
pub mod measure;
pub mod modular;
mod par;
pub mod verify;

pub use angle::RationalAngle;
pub use characters::{enumerate_characters, in_s, subgroup_c, Character, TChi};
pub use counting::{
    build_f, count_yprime_char, enum_y, enum_y0, enum_yprime, CountingSpec, ObstructionPolynomial,
    SolutionTuple, Y0Sets,
};
pub use dlog::DlogTable;
pub use error::{Error, Result};
pub use kloosterman::{
    family_values, gauss_factor, ksum_brute, ksum_closed, normalized_twisted, salie_values,
    untwisted_closed, FamilyEntry, GaussFactor, KloostermanValue, Method, NormalizedTwisted,
    TwistedFamily,
};
pub use measure::{
    family_statistics, joint_moment, ks_distance, mu_cdf, mu_moment, mu_sample, EmpiricalFamily,
    FamilyStatistics, JointMoment, LimitMeasure, MomentSpec, Variant,
};
pub use modular::{
    lift_quadratic_roots, primitive_root, sqrt_mod_prime, PrimePowerModulus, QuadraticCongruence,
};
