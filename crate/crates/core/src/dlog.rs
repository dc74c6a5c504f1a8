//! Dense discrete-logarithm tables for `(Z/qZ)*`.
//!
//! On-disk layout of `dlog_<p>_<k>.bin` (all little-endian):
//!
//! | offset | size        | field                                    |
//! |--------|-------------|------------------------------------------|
//! | 0      | 4           | magic `KLDL`                             |
//! | 4      | 4           | version (`u32`, currently 1)             |
//! | 8      | 4           | `p` (`u32`)                              |
//! | 12     | 4           | `k` (`u32`)                              |
//! | 16     | 8 * phi(q)  | `u64` log of the i-th unit, ascending    |

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::modular::{mul_mod, pow_mod, primitive_root, PrimePowerModulus};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"KLDL";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 16;
const NO_LOG: u32 = u32::MAX;

/// `log[x]` for every residue `x` mod `q`; non-units hold a sentinel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DlogTable {
    modulus: PrimePowerModulus,
    generator: u64,
    log: Vec<u32>,
}

impl DlogTable {
    /// Table for the smallest primitive root.
    pub fn build(modulus: PrimePowerModulus) -> Self {
        let g = primitive_root(&modulus);
        Self::with_generator(modulus, g).expect("smallest primitive root generates")
    }

    /// Walk the powers of `g`; fails if they return to 1 before covering
    /// every unit.
    pub fn with_generator(modulus: PrimePowerModulus, g: u64) -> Result<Self> {
        let (q, phi) = (modulus.q(), modulus.phi());
        let not_primitive = Error::NotPrimitiveRoot { g, q };
        if !modulus.is_unit(g % q) {
            return Err(not_primitive);
        }
        let mut log = vec![NO_LOG; q as usize];
        let mut x = 1u64;
        for e in 0..phi {
            let slot = &mut log[x as usize];
            if *slot != NO_LOG {
                return Err(not_primitive);
            }
            *slot = e as u32;
            x = mul_mod(x, g, q);
        }
        Ok(Self {
            modulus,
            generator: g % q,
            log,
        })
    }

    pub fn modulus(&self) -> &PrimePowerModulus {
        &self.modulus
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    /// Discrete log of `x mod q`, or `None` for non-units.
    #[inline]
    pub fn log(&self, x: u64) -> Option<u64> {
        match self.log[(x % self.modulus.q()) as usize] {
            NO_LOG => None,
            e => Some(e as u64),
        }
    }

    /// `generator^e mod q`.
    pub fn exp(&self, e: u64) -> u64 {
        pow_mod(self.generator, e % self.modulus.phi(), self.modulus.q())
    }

    pub fn cache_file_name(modulus: &PrimePowerModulus) -> String {
        format!("dlog_{}_{}.bin", modulus.p(), modulus.k())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.modulus.p() as u32).to_le_bytes())?;
        w.write_all(&self.modulus.k().to_le_bytes())?;
        for &e in self.log.iter().filter(|&&e| e != NO_LOG) {
            w.write_all(&(e as u64).to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Load and validate a cached table. The generator is recovered as the
    /// unit with log 1 and must be the smallest primitive root.
    pub fn load(path: &Path, modulus: PrimePowerModulus) -> Result<Self> {
        let bytes = fs::read(path)?;
        let bad = |msg: &str| Error::CacheFormat(format!("{}: {msg}", path.display()));
        if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
            return Err(bad("missing KLDL header"));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        if word(4) != VERSION {
            return Err(bad("unsupported version"));
        }
        if word(8) as u64 != modulus.p() || word(12) != modulus.k() {
            return Err(bad("header does not match the requested modulus"));
        }
        let (q, phi) = (modulus.q(), modulus.phi());
        if (bytes.len() - HEADER_LEN) as u64 != 8 * phi {
            return Err(bad("wrong number of entries"));
        }
        let mut log = vec![NO_LOG; q as usize];
        let mut seen = vec![false; phi as usize];
        let entries = bytes[HEADER_LEN..].chunks_exact(8);
        let units = (1..q).filter(|&x| modulus.is_unit(x));
        let mut generator = None;
        for (x, chunk) in units.zip(entries) {
            let e = u64::from_le_bytes(chunk.try_into().unwrap());
            if e >= phi || std::mem::replace(&mut seen[e as usize], true) {
                return Err(bad("entries are not a permutation of 0..phi"));
            }
            if e == 1 {
                generator = Some(x);
            }
            log[x as usize] = e as u32;
        }
        let generator = generator.ok_or_else(|| bad("no unit has log 1"))?;
        if generator != primitive_root(&modulus) {
            return Err(bad("generator is not the smallest primitive root"));
        }
        let table = Self {
            modulus,
            generator,
            log,
        };
        // sampled round-trip; a full check would cost as much as a rebuild
        let step = (q / 64).max(1);
        for x in (1..q)
            .step_by(step as usize)
            .filter(|&x| modulus.is_unit(x))
        {
            if table.exp(table.log(x).unwrap()) != x {
                return Err(bad("round-trip check failed"));
            }
        }
        Ok(table)
    }

    /// Load `dir/dlog_<p>_<k>.bin`, rebuilding and rewriting it on any miss
    /// or validation failure.
    pub fn load_or_build(modulus: PrimePowerModulus, dir: &Path) -> Result<Self> {
        let path: PathBuf = dir.join(Self::cache_file_name(&modulus));
        if let Ok(table) = Self::load(&path, modulus) {
            return Ok(table);
        }
        let table = Self::build(modulus);
        fs::create_dir_all(dir)?;
        table.save(&path)?;
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(p: u64, k: u32) -> DlogTable {
        DlogTable::build(PrimePowerModulus::new(p, k).unwrap())
    }

    #[test]
    fn q9_examples() {
        let t = table(3, 2);
        assert_eq!(t.generator(), 2);
        assert_eq!(t.log(4), Some(2));
        assert_eq!(t.log(8), Some(3));
        assert_eq!(t.log(1), Some(0));
        assert_eq!(t.log(2), Some(1));
        assert_eq!(t.log(3), None);
    }

    #[test]
    fn round_trip_every_unit() {
        for (p, k) in [(5, 2), (3, 3), (7, 3), (11, 2)] {
            let t = table(p, k);
            let q = t.modulus().q();
            for x in (1..q).filter(|x| x % p != 0) {
                assert_eq!(t.exp(t.log(x).unwrap()), x);
            }
        }
    }

    #[test]
    fn rejects_non_primitive_generator() {
        let m = PrimePowerModulus::new(7, 2).unwrap();
        assert!(matches!(
            DlogTable::with_generator(m, 2),
            Err(Error::NotPrimitiveRoot { .. })
        ));
        assert!(DlogTable::with_generator(m, 7).is_err());
    }

    #[test]
    fn cache_round_trip_and_layout() {
        let dir = tempfile::tempdir().unwrap();
        let m = PrimePowerModulus::new(5, 2).unwrap();
        let built = DlogTable::load_or_build(m, dir.path()).unwrap();
        let path = dir.path().join("dlog_5_2.bin");
        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"KLDL");
        assert_eq!(bytes.len(), 16 + 8 * 20);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 5);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 2);
        // first entry is log(1) = 0, second is log(2) = 1 since g = 2
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 0);
        assert_eq!(u64::from_le_bytes(bytes[24..32].try_into().unwrap()), 1);
        let loaded = DlogTable::load(&path, m).unwrap();
        assert_eq!(loaded, built);
    }

    #[test]
    fn corrupt_cache_is_rebuilt() {
        let dir = tempfile::tempdir().unwrap();
        let m = PrimePowerModulus::new(3, 3).unwrap();
        let path = dir.path().join("dlog_3_3.bin");
        fs::write(&path, b"KLDL\x01\0\0\0garbage").unwrap();
        assert!(DlogTable::load(&path, m).is_err());
        let t = DlogTable::load_or_build(m, dir.path()).unwrap();
        assert_eq!(t, DlogTable::build(m));
        assert!(DlogTable::load(&path, m).is_ok());
    }

    #[test]
    fn cache_for_other_modulus_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let m = PrimePowerModulus::new(5, 2).unwrap();
        let path = dir.path().join("x.bin");
        DlogTable::build(m).save(&path).unwrap();
        let other = PrimePowerModulus::new(5, 3).unwrap();
        assert!(matches!(
            DlogTable::load(&path, other),
            Err(Error::CacheFormat(_))
        ));
    }
}
