//! Finite-precision p-adic integers.
//!
//! A [`PadicInt`] is a residue mod p^N together with the precision exponent N.
//! Arithmetic is exact modular arithmetic; precision is monotone
//! non-increasing through operations and never silently renormalized, so a
//! value always states the congruence it is good for.  Valuations distinguish
//! three cases: exactly known, only bounded below by the precision, and the
//! exact zero of the integers.

use std::fmt;

use crate::error::{Error, Result};

/// The p-adic valuation of a finite-precision value.
///
/// `Known(v)` means ord_p = v with v strictly below the precision of the
/// source value.  `AtLeast(n)` means the residue vanishes mod p^n and nothing
/// more is visible.  `Infinite` is reserved for the exact integer 0; it never
/// arises from a truncated value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Known(u32),
    AtLeast(u32),
    Infinite,
}

impl Valuation {
    /// The exactly-known valuation, if there is one.
    pub fn known(self) -> Option<u32> {
        match self {
            Valuation::Known(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_known(self) -> bool {
        matches!(self, Valuation::Known(_))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Known(v) => write!(f, "{v}"),
            Valuation::AtLeast(n) => write!(f, ">={n}"),
            Valuation::Infinite => write!(f, "oo"),
        }
    }
}

/// Deterministic Miller-Rabin for u64.
pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut base: u64, mut exp: u64| {
        let mut acc = 1u64;
        base %= n;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul(acc, base);
            }
            base = mul(base, base);
            exp >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// ord_p of an exact (untruncated) integer.
///
/// Returns `Known(v)` for n != 0 and the distinguished `Infinite` marker for
/// n = 0, which deliberately never coincides with any `AtLeast`.
pub fn vp(n: i128, p: u64) -> Result<Valuation> {
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    if n == 0 {
        return Ok(Valuation::Infinite);
    }
    let mut m = n.unsigned_abs();
    let p = p as u128;
    let mut v = 0u32;
    while m % p == 0 {
        m /= p;
        v += 1;
    }
    Ok(Valuation::Known(v))
}

/// ord_p(j!) by Legendre's formula.
pub fn vp_factorial(j: u64, p: u64) -> u32 {
    let mut total = 0u64;
    let mut q = p;
    while q <= j {
        total += j / q;
        match q.checked_mul(p) {
            Some(next) => q = next,
            None => break,
        }
    }
    total as u32
}

/// A p-adic integer known modulo p^prec.
///
/// The residue is always reduced into [0, p^prec).  p^prec is kept below
/// 2^63 so that sums of two residues never overflow u64 and products fit in
/// u128.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadicInt {
    p: u64,
    prec: u32,
    residue: u64,
}

/// p^prec as u64, restricted to < 2^63.
fn modulus(p: u64, prec: u32) -> Result<u64> {
    let mut m: u64 = 1;
    for _ in 0..prec {
        m = m
            .checked_mul(p)
            .filter(|&m| m < (1u64 << 63))
            .ok_or_else(|| {
                Error::InvalidArgument(format!("modulus {p}^{prec} exceeds the supported range"))
            })?;
    }
    Ok(m)
}

impl PadicInt {
    /// Build a value from an exact integer, reducing it mod p^prec.
    pub fn from_int(p: u64, prec: u32, n: i128) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidArgument(format!("{p} is not prime")));
        }
        if prec == 0 {
            return Err(Error::InvalidArgument("precision must be >= 1".into()));
        }
        let m = modulus(p, prec)? as i128;
        let residue = n.rem_euclid(m) as u64;
        Ok(PadicInt { p, prec, residue })
    }

    pub fn zero(p: u64, prec: u32) -> Result<Self> {
        Self::from_int(p, prec, 0)
    }

    pub fn one(p: u64, prec: u32) -> Result<Self> {
        Self::from_int(p, prec, 1)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn modulus(&self) -> u64 {
        modulus(self.p, self.prec).expect("modulus was validated at construction")
    }

    pub fn is_zero(&self) -> bool {
        self.residue == 0
    }

    /// Lower the precision to `prec`, re-reducing the residue.
    pub fn reduce(&self, prec: u32) -> Result<Self> {
        if prec == 0 || prec > self.prec {
            return Err(Error::InvalidArgument(format!(
                "cannot reduce precision {} to {}",
                self.prec, prec
            )));
        }
        let m = modulus(self.p, prec)?;
        Ok(PadicInt {
            p: self.p,
            prec,
            residue: self.residue % m,
        })
    }

    fn aligned(&self, other: &Self) -> Result<(PadicInt, PadicInt)> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        let prec = self.prec.min(other.prec);
        Ok((self.reduce(prec)?, other.reduce(prec)?))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.aligned(other)?;
        let m = a.modulus();
        Ok(PadicInt {
            p: a.p,
            prec: a.prec,
            residue: (a.residue + b.residue) % m,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.aligned(other)?;
        let m = a.modulus();
        Ok(PadicInt {
            p: a.p,
            prec: a.prec,
            residue: (a.residue + m - b.residue) % m,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.aligned(other)?;
        let m = a.modulus() as u128;
        Ok(PadicInt {
            p: a.p,
            prec: a.prec,
            residue: ((a.residue as u128 * b.residue as u128) % m) as u64,
        })
    }

    pub fn neg(&self) -> Self {
        let m = self.modulus();
        PadicInt {
            p: self.p,
            prec: self.prec,
            residue: (m - self.residue) % m,
        }
    }

    /// The valuation visible at this precision: `Known` when the residue is
    /// nonzero, `AtLeast(prec)` when it vanishes.
    pub fn valuation(&self) -> Valuation {
        if self.residue == 0 {
            return Valuation::AtLeast(self.prec);
        }
        let mut v = 0u32;
        let mut r = self.residue;
        while r % self.p == 0 {
            r /= self.p;
            v += 1;
        }
        Valuation::Known(v)
    }

    pub fn is_unit(&self) -> bool {
        self.residue % self.p != 0
    }

    /// Multiplicative inverse mod p^prec for units.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NotInvertible(self.valuation()));
        }
        // extended Euclid on (residue, p^prec)
        let m = self.modulus() as i128;
        let (mut r0, mut r1) = (self.residue as i128, m);
        let (mut s0, mut s1) = (1i128, 0i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        Ok(PadicInt {
            p: self.p,
            prec: self.prec,
            residue: s0.rem_euclid(m) as u64,
        })
    }

    /// Exact division by p^k.  The residue must vanish mod p^k; the quotient
    /// is known to k fewer digits.
    pub fn shift_down(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Ok(*self);
        }
        if k >= self.prec {
            return Err(Error::PrecisionUnderflow {
                needed: k + 1,
                available: self.prec,
            });
        }
        let pk = modulus(self.p, k)?;
        if self.residue % pk != 0 {
            return Err(Error::InvalidArgument(format!(
                "residue {} is not divisible by {}^{}",
                self.residue, self.p, k
            )));
        }
        Ok(PadicInt {
            p: self.p,
            prec: self.prec - k,
            residue: self.residue / pk,
        })
    }

    /// The binomial coefficient C(u, j) = u(u-1)...(u-j+1)/j! as a p-adic
    /// integer.
    ///
    /// Division by j! consumes ord_p(j!) digits of precision eagerly; the
    /// result precision is prec - ord_p(j!) and the call fails when that
    /// budget is exhausted.
    pub fn binom(&self, j: u64) -> Result<Self> {
        let loss = vp_factorial(j, self.p);
        if loss >= self.prec {
            return Err(Error::PrecisionUnderflow {
                needed: loss + 1,
                available: self.prec,
            });
        }
        if j == 0 {
            return PadicInt::one(self.p, self.prec);
        }
        let m = self.modulus() as u128;
        // numerator u(u-1)...(u-j+1) mod p^prec
        let mut num = 1u128;
        let mut factor = self.residue;
        for t in 0..j {
            if t > 0 {
                factor = (factor + self.modulus() - 1) % self.modulus();
            }
            num = num * factor as u128 % m;
        }
        // unit part of j! mod p^prec
        let mut unit = 1u128;
        for t in 1..=j {
            let mut t_red = t;
            while t_red % self.p == 0 {
                t_red /= self.p;
            }
            unit = unit * (t_red as u128 % m) % m;
        }
        let num = PadicInt {
            p: self.p,
            prec: self.prec,
            residue: num as u64,
        };
        let unit = PadicInt {
            p: self.p,
            prec: self.prec,
            residue: unit as u64,
        };
        num.mul(&unit.inverse()?)?.shift_down(loss)
    }
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.residue, self.p, self.prec)
    }
}
