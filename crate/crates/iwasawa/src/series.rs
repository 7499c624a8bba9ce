//! Truncated power series over Z_p in one variable.
//!
//! A [`PowerSeries`] stores coefficients in ascending degree order, reduced
//! mod p^prec, up to an exclusive degree cutoff D.  Every operation is exact
//! modulo (p^prec, X^D) and states any extra precision loss it incurs.  A
//! series constructed from a finite coefficient list is flagged as an exact
//! polynomial: its stored zero coefficients are exact zeros and everything at
//! or beyond the cutoff is exactly zero.  The flag is what separates "the
//! constant term is zero" from "the constant term vanishes mod p^N", which
//! the Newton-polygon and square-freeness certificates rely on.

use std::fmt;

use crate::error::{Error, Result};
use crate::padic::{vp_factorial, PadicInt, Valuation};

/// Outcome of the lambda-invariant computation: the first unit-coefficient
/// index, or undetermined because no unit shows up below the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lambda {
    Known(usize),
    Undetermined { cutoff: usize },
}

impl Lambda {
    pub fn known(self) -> Option<usize> {
        match self {
            Lambda::Known(i) => Some(i),
            Lambda::Undetermined { .. } => None,
        }
    }
}

/// One-sided irreducibility decision: `Irreducible` is a certificate,
/// `Inconclusive` asserts nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Irreducibility {
    Irreducible,
    Inconclusive,
}

/// Square-freeness decision for a polynomial at finite precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SquareFreeness {
    /// Certified: the resultant of h and h' has the quoted valuation, which
    /// is visible below the precision.
    SquareFree { disc_val: u32 },
    /// Refuted by an exhibited exact repeated factor X^multiplicity.
    NotSquareFree { multiplicity: usize },
    /// The discriminant vanishes at the available precision.
    Inconclusive,
}

/// A slope in lowest terms; the sign lives in the numerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slope {
    pub num: i64,
    pub den: u64,
}

impl Slope {
    fn new(num: i64, den: u64) -> Self {
        assert!(den > 0);
        let g = gcd(num.unsigned_abs(), den);
        Slope {
            num: num / g as i64,
            den: den / g,
        }
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// Lower convex hull of the coefficient valuations of a polynomial.
/// Exact-zero coefficients contribute no point; slopes strictly increase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPolygon {
    pub vertices: Vec<(usize, u32)>,
    pub segments: Vec<(Slope, usize)>,
}

/// A truncated element of `Z_p[[X]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSeries {
    p: u64,
    prec: u32,
    cutoff: usize,
    coeffs: Vec<u64>,
    poly: bool,
}

impl PowerSeries {
    /// An exact polynomial.  `coeffs` is ascending-degree and must fit below
    /// the cutoff; omitted coefficients are exactly zero.
    pub fn polynomial(p: u64, prec: u32, cutoff: usize, coeffs: &[i128]) -> Result<Self> {
        if coeffs.len() > cutoff {
            return Err(Error::InvalidArgument(format!(
                "polynomial of degree {} does not fit below cutoff {}",
                coeffs.len().saturating_sub(1),
                cutoff
            )));
        }
        Self::build(p, prec, cutoff, coeffs, true)
    }

    /// A truncated series: nothing is known at or beyond the cutoff.
    pub fn truncated(p: u64, prec: u32, cutoff: usize, coeffs: &[i128]) -> Result<Self> {
        let kept: Vec<i128> = coeffs.iter().copied().take(cutoff).collect();
        Self::build(p, prec, cutoff, &kept, false)
    }

    fn build(p: u64, prec: u32, cutoff: usize, coeffs: &[i128], poly: bool) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidArgument("cutoff must be >= 1".into()));
        }
        let mut stored = Vec::with_capacity(cutoff);
        for &c in coeffs {
            stored.push(PadicInt::from_int(p, prec, c)?.residue());
        }
        stored.resize(cutoff, 0);
        Ok(PowerSeries {
            p,
            prec,
            cutoff,
            coeffs: stored,
            poly,
        })
    }

    pub fn zero(p: u64, prec: u32, cutoff: usize) -> Result<Self> {
        Self::polynomial(p, prec, cutoff, &[])
    }

    pub fn one(p: u64, prec: u32, cutoff: usize) -> Result<Self> {
        Self::polynomial(p, prec, cutoff, &[1])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn is_polynomial(&self) -> bool {
        self.poly
    }

    pub fn coeff(&self, i: usize) -> PadicInt {
        let r = self.coeffs.get(i).copied().unwrap_or(0);
        PadicInt::from_int(self.p, self.prec, r as i128).expect("validated at construction")
    }

    pub fn residues(&self) -> &[u64] {
        &self.coeffs
    }

    /// Index of the highest nonzero stored coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn modulus(&self) -> u64 {
        PadicInt::zero(self.p, self.prec)
            .expect("validated at construction")
            .modulus()
    }

    /// Reduce the coefficient precision (and optionally the cutoff).
    pub fn reduce(&self, prec: u32, cutoff: usize) -> Result<Self> {
        if prec == 0 || prec > self.prec {
            return Err(Error::InvalidArgument(format!(
                "cannot reduce precision {} to {}",
                self.prec, prec
            )));
        }
        if cutoff == 0 || cutoff > self.cutoff {
            return Err(Error::InvalidArgument(format!(
                "cannot reduce cutoff {} to {}",
                self.cutoff, cutoff
            )));
        }
        let m = PadicInt::zero(self.p, prec)?.modulus();
        let coeffs = self.coeffs[..cutoff].iter().map(|&c| c % m).collect();
        Ok(PowerSeries {
            p: self.p,
            prec,
            cutoff,
            coeffs,
            poly: self.poly && self.degree().is_none_or(|d| d < cutoff),
        })
    }

    fn align(&self, other: &Self) -> Result<(Self, Self)> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        let prec = self.prec.min(other.prec);
        let cutoff = self.cutoff.min(other.cutoff);
        Ok((self.reduce(prec, cutoff)?, other.reduce(prec, cutoff)?))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (mut a, b) = self.align(other)?;
        let m = a.modulus();
        for (ca, cb) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *ca = (*ca + *cb) % m;
        }
        a.poly = a.poly && b.poly;
        Ok(a)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let m = self.modulus();
        let coeffs = self.coeffs.iter().map(|&c| (m - c) % m).collect();
        PowerSeries {
            coeffs,
            ..self.clone()
        }
    }

    /// Product, exact modulo (p^prec, X^cutoff) at the aligned parameters.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.align(other)?;
        let m = a.modulus() as u128;
        let mut coeffs = vec![0u64; a.cutoff];
        for (i, &ca) in a.coeffs.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            for (j, &cb) in b.coeffs.iter().enumerate() {
                if i + j >= a.cutoff {
                    break;
                }
                if cb == 0 {
                    continue;
                }
                let prod = ca as u128 * cb as u128 % m;
                coeffs[i + j] = ((coeffs[i + j] as u128 + prod) % m) as u64;
            }
        }
        let poly = a.poly
            && b.poly
            && match (a.degree(), b.degree()) {
                (Some(da), Some(db)) => da + db < a.cutoff,
                _ => true,
            };
        Ok(PowerSeries {
            p: a.p,
            prec: a.prec,
            cutoff: a.cutoff,
            coeffs,
            poly,
        })
    }

    pub fn scalar_mul(&self, c: &PadicInt) -> Result<Self> {
        if c.p() != self.p {
            return Err(Error::PrimeMismatch(self.p, c.p()));
        }
        let prec = self.prec.min(c.prec());
        let out = self.reduce(prec, self.cutoff)?;
        let m = out.modulus();
        let cr = c.reduce(prec)?.residue();
        let coeffs = out
            .coeffs
            .iter()
            .map(|&a| (a as u128 * cr as u128 % m as u128) as u64)
            .collect();
        Ok(PowerSeries {
            coeffs,
            ..out
        })
    }

    /// Multiply by X^k.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![0u64; self.cutoff];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if i + k < self.cutoff {
                coeffs[i + k] = c;
            }
        }
        let poly = self.poly && self.degree().is_none_or(|d| d + k < self.cutoff);
        PowerSeries {
            coeffs,
            poly,
            ..self.clone()
        }
    }

    /// mu(V) = sup { i | V = 0 mod p^i }: the minimal coefficient valuation,
    /// or `AtLeast(prec)` when every stored coefficient vanishes mod p^prec.
    pub fn mu_invariant(&self) -> Valuation {
        let mut best: Option<u32> = None;
        for i in 0..self.cutoff {
            if let Valuation::Known(v) = self.coeff(i).valuation() {
                best = Some(best.map_or(v, |b| b.min(v)));
                if v == 0 {
                    break;
                }
            }
        }
        match best {
            Some(v) => Valuation::Known(v),
            None => Valuation::AtLeast(self.prec),
        }
    }

    /// lambda(V) = inf { i | coefficient i is a unit }, or undetermined below
    /// the cutoff.
    pub fn lambda_invariant(&self) -> Lambda {
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c % self.p != 0 {
                return Lambda::Known(i);
            }
        }
        Lambda::Undetermined {
            cutoff: self.cutoff,
        }
    }

    /// Formal derivative.  For a truncated series the top coefficient is
    /// unknown, so the cutoff drops by one.
    pub fn derivative(&self) -> Result<Self> {
        let cutoff = if self.poly {
            self.cutoff
        } else {
            self.cutoff - 1
        };
        if cutoff == 0 {
            return Err(Error::InvalidArgument(
                "derivative cutoff collapsed to zero".into(),
            ));
        }
        let m = self.modulus() as u128;
        let mut coeffs = vec![0u64; cutoff];
        for i in 0..cutoff {
            let c = self.coeffs.get(i + 1).copied().unwrap_or(0);
            coeffs[i] = (c as u128 * ((i as u128 + 1) % m) % m) as u64;
        }
        Ok(PowerSeries {
            p: self.p,
            prec: self.prec,
            cutoff,
            coeffs,
            poly: self.poly,
        })
    }

    /// Evaluate at a point.  Exact polynomials evaluate anywhere; truncated
    /// series need ord_p(x) >= 1 so the invisible tail contributes at least
    /// p^cutoff, and the guaranteed precision is reported on the result.
    pub fn eval(&self, x: &PadicInt) -> Result<PadicInt> {
        if x.p() != self.p {
            return Err(Error::PrimeMismatch(self.p, x.p()));
        }
        let prec = self.prec.min(x.prec());
        let guaranteed = if self.poly {
            prec
        } else {
            let vx = match x.valuation() {
                Valuation::Known(0) => return Err(Error::UnboundedTail),
                Valuation::Known(v) => v,
                Valuation::AtLeast(n) => n,
                Valuation::Infinite => unreachable!("residues are never exact integers"),
            };
            prec.min(
                (self.cutoff as u64).saturating_mul(vx as u64).min(u32::MAX as u64) as u32,
            )
        };
        let xr = x.reduce(prec)?;
        let mut acc = PadicInt::zero(self.p, prec)?;
        for i in (0..self.cutoff).rev() {
            acc = acc.mul(&xr)?.add(&self.coeff(i).reduce(prec)?)?;
        }
        acc.reduce(guaranteed)
    }

    /// Substitute a series with ord_p-positive constant term (or evaluate a
    /// polynomial at any series): sum of coeff_i * phi^i mod (p^prec, X^D).
    pub fn compose(&self, phi: &Self) -> Result<Self> {
        if phi.p != self.p {
            return Err(Error::PrimeMismatch(self.p, phi.p));
        }
        if !self.poly && phi.coeffs.first().is_some_and(|&c| c % self.p != 0) {
            return Err(Error::UnboundedTail);
        }
        let prec = self.prec.min(phi.prec);
        let cutoff = phi.cutoff;
        let mut acc = PowerSeries::zero(self.p, prec, cutoff)?;
        let top = self.degree().map_or(0, |d| d + 1).min(self.cutoff);
        for i in (0..top).rev() {
            acc = acc.mul(phi)?;
            let mut constant = PowerSeries::zero(self.p, prec, cutoff)?;
            constant.coeffs[0] = self.coeff(i).reduce(prec)?.residue();
            acc = acc.add(&constant)?;
        }
        // the tail of a truncated self contributes beyond X^cutoff only when
        // phi has positive valuation, which was checked above
        acc.poly = false;
        Ok(acc)
    }

    /// The norm-type polynomial nu_m(X) = ((1+X)^{p^m} - 1)/X: monic of
    /// degree p^m - 1 with constant term p^m.
    pub fn nu_polynomial(m: u32, p: u64, prec: u32, cutoff: usize) -> Result<Self> {
        let n = (p as u128).checked_pow(m).ok_or_else(|| {
            Error::InvalidArgument(format!("p^{m} out of range for the nu family"))
        })?;
        let out_of_range = || {
            Error::InvalidArgument(format!(
                "nu_{m} at p={p} has binomial coefficients beyond the supported range"
            ))
        };
        if n > 200 {
            return Err(out_of_range());
        }
        let n = n as u64;
        // coefficient of X^i is C(p^m, i+1), computed exactly
        let mut coeffs = Vec::with_capacity(n as usize);
        let mut binom: u128 = 1; // C(n, 0)
        for i in 0..n {
            binom = binom
                .checked_mul((n - i) as u128)
                .ok_or_else(out_of_range)?
                / (i + 1) as u128;
            if binom > i128::MAX as u128 {
                return Err(out_of_range());
            }
            coeffs.push(binom as i128);
        }
        let poly = (coeffs.len() as u64) <= cutoff as u64;
        if poly {
            Self::polynomial(p, prec, cutoff, &coeffs)
        } else {
            Self::truncated(p, prec, cutoff, &coeffs)
        }
    }

    /// The binomial series sum_j C(u, j) X^{j*stride}, i.e. (1+X^stride)^u.
    ///
    /// Division by j! consumes ord_p(j_max!) digits uniformly; the result
    /// precision is u.prec minus that loss.
    pub fn binom_series(u: &PadicInt, stride: usize, cutoff: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidArgument("stride must be >= 1".into()));
        }
        if cutoff == 0 {
            return Err(Error::InvalidArgument("cutoff must be >= 1".into()));
        }
        let jmax = ((cutoff - 1) / stride) as u64;
        let loss = vp_factorial(jmax, u.p());
        if loss >= u.prec() {
            return Err(Error::PrecisionUnderflow {
                needed: loss + 1,
                available: u.prec(),
            });
        }
        let prec = u.prec() - loss;
        let mut out = PowerSeries::zero(u.p(), prec, cutoff)?;
        for j in 0..=jmax {
            let c = u.binom(j)?.reduce(prec)?;
            out.coeffs[(j as usize) * stride] = c.residue();
        }
        out.poly = false;
        Ok(out)
    }

    /// Split off the maximal power of X: h = X^a * g with g(0) nonzero at
    /// the available precision.
    pub fn factor_out_x(&self) -> Result<(usize, Self)> {
        let a = match self.coeffs.iter().position(|&c| c != 0) {
            Some(a) => a,
            None => return Err(Error::AmbiguousMultiplicity),
        };
        let cutoff = if self.poly {
            self.cutoff
        } else {
            self.cutoff - a
        };
        let mut coeffs: Vec<u64> = self.coeffs[a..].to_vec();
        coeffs.resize(cutoff, 0);
        Ok((
            a,
            PowerSeries {
                p: self.p,
                prec: self.prec,
                cutoff,
                coeffs,
                poly: self.poly,
            },
        ))
    }

    /// Multiplicative inverse of a unit series, mod (p^prec, X^cutoff).
    pub fn invert_unit(&self) -> Result<Self> {
        let c0 = self.coeff(0);
        if !c0.is_unit() {
            return Err(Error::NotInvertible(c0.valuation()));
        }
        let c0_inv = c0.inverse()?;
        let mut inv = PowerSeries::zero(self.p, self.prec, self.cutoff)?;
        inv.coeffs[0] = c0_inv.residue();
        // b_k = -c0^{-1} * sum_{i=1}^{k} a_i b_{k-i}
        let m = self.modulus() as u128;
        for k in 1..self.cutoff {
            let mut acc: u128 = 0;
            for i in 1..=k {
                acc = (acc + self.coeffs[i] as u128 * inv.coeffs[k - i] as u128) % m;
            }
            let acc = (m - acc) % m;
            inv.coeffs[k] = (acc * c0_inv.residue() as u128 % m) as u64;
        }
        inv.poly = false;
        Ok(inv)
    }

    /// Newton polygon of a polynomial with unit leading coefficient.
    pub fn newton_polygon(&self) -> Result<NewtonPolygon> {
        if !self.poly {
            return Err(Error::InvalidArgument(
                "Newton polygon needs an exact polynomial".into(),
            ));
        }
        let deg = self.degree().ok_or(Error::ZeroSeries)?;
        let lead = self.coeff(deg);
        if !lead.is_unit() {
            return Err(Error::AmbiguousLeadingCoefficient(lead.valuation()));
        }
        let points: Vec<(usize, u32)> = (0..=deg)
            .filter_map(|i| self.coeff(i).valuation().known().map(|v| (i, v)))
            .collect();
        // lower convex hull, left to right
        let mut hull: Vec<(usize, u32)> = Vec::new();
        for &pt in &points {
            while hull.len() >= 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                // pop b unless it turns strictly upward at b
                let lhs = (b.1 as i128 - a.1 as i128) * (pt.0 as i128 - a.0 as i128);
                let rhs = (pt.1 as i128 - a.1 as i128) * (b.0 as i128 - a.0 as i128);
                if lhs < rhs {
                    break;
                }
                hull.pop();
            }
            hull.push(pt);
        }
        let segments = hull
            .windows(2)
            .map(|w| {
                let (i0, v0) = w[0];
                let (i1, v1) = w[1];
                (
                    Slope::new(v1 as i64 - v0 as i64, (i1 - i0) as u64),
                    i1 - i0,
                )
            })
            .collect();
        Ok(NewtonPolygon {
            vertices: hull,
            segments,
        })
    }

    /// Irreducibility certificate from the Newton polygon: a single segment
    /// whose slope has denominator equal to the degree.  Never asserts
    /// reducibility.
    pub fn irreducible_by_newton(&self) -> Result<Irreducibility> {
        let polygon = self.newton_polygon()?;
        let deg = self.degree().expect("polygon construction rejects zero");
        if deg == 1 {
            return Ok(Irreducibility::Irreducible);
        }
        if polygon.segments.len() == 1 {
            let (slope, len) = polygon.segments[0];
            if len == deg && slope.den == deg as u64 {
                return Ok(Irreducibility::Irreducible);
            }
        }
        Ok(Irreducibility::Inconclusive)
    }

    /// Square-freeness via the valuation of res(h, h'), guarded by the
    /// precision: `SquareFree` only when the resultant is visibly nonzero.
    pub fn squarefree_check(&self) -> Result<SquareFreeness> {
        if !self.poly {
            return Err(Error::InvalidArgument(
                "square-freeness needs an exact polynomial".into(),
            ));
        }
        let deg = match self.degree() {
            Some(d) => d,
            None => return Ok(SquareFreeness::Inconclusive),
        };
        let (mult, _) = self.factor_out_x()?;
        if mult >= 2 {
            return Ok(SquareFreeness::NotSquareFree {
                multiplicity: mult,
            });
        }
        if deg == 0 {
            return Ok(SquareFreeness::SquareFree { disc_val: 0 });
        }
        if !self.coeff(deg).is_unit() {
            return Ok(SquareFreeness::Inconclusive);
        }
        let res = self.resultant_with_derivative(deg)?;
        match res.valuation() {
            Valuation::Known(v) => Ok(SquareFreeness::SquareFree { disc_val: v }),
            _ => Ok(SquareFreeness::Inconclusive),
        }
    }

    /// res(h, h') mod p^prec via the Sylvester matrix.
    fn resultant_with_derivative(&self, deg: usize) -> Result<PadicInt> {
        let h: Vec<u64> = self.coeffs[..=deg].to_vec();
        let dh: Vec<u64> = {
            let d = self.derivative()?;
            let mut v = d.coeffs[..deg.min(d.cutoff)].to_vec();
            v.resize(deg, 0);
            v
        };
        let n = 2 * deg - 1;
        if n > 16 {
            return Err(Error::InvalidArgument(format!(
                "degree {deg} is beyond the bundled resultant routine"
            )));
        }
        let m = self.modulus();
        // Sylvester matrix: deg-1 shifted copies of h, deg copies of h'
        let mut mat = vec![vec![0u64; n]; n];
        for r in 0..deg - 1 {
            for (k, &c) in h.iter().rev().enumerate() {
                mat[r][r + k] = c;
            }
        }
        for r in 0..deg {
            for (k, &c) in dh.iter().rev().enumerate() {
                mat[deg - 1 + r][r + k] = c;
            }
        }
        let det = det_mod(&mat, m);
        PadicInt::from_int(self.p, self.prec, det as i128)
    }

    /// Hensel lift of an approximate root.  Requires
    /// ord(h(r0)) > 2 ord(h'(r0)) with both known; the returned root is a
    /// residue at the working precision with h(r) = 0 mod p^prec, asserted
    /// post hoc.
    pub fn hensel_lift_root(&self, r0: &PadicInt) -> Result<PadicInt> {
        if r0.p() != self.p {
            return Err(Error::PrimeMismatch(self.p, r0.p()));
        }
        let prec = self.prec.min(r0.prec());
        let value_val = self.eval(&r0.reduce(prec)?)?.valuation();
        let deriv = self.derivative()?;
        let deriv_val = deriv.eval(&r0.reduce(prec.min(deriv.prec()))?)?.valuation();
        let t = match deriv_val {
            Valuation::Known(t) => t,
            _ => {
                return Err(Error::HenselCondition {
                    value_val,
                    deriv_val,
                })
            }
        };
        let ok = match value_val {
            Valuation::Known(v) => v > 2 * t,
            Valuation::AtLeast(n) => n > 2 * t,
            Valuation::Infinite => true,
        };
        if !ok {
            return Err(Error::HenselCondition {
                value_val,
                deriv_val,
            });
        }
        let mut r = r0.reduce(prec)?;
        for _ in 0..(prec as usize + 2) {
            let hr = self.eval(&r)?.reduce(prec)?;
            if hr.is_zero() {
                break;
            }
            let hpr = deriv.eval(&r)?;
            // delta = h(r) / h'(r), lifted back to the working precision
            let unit = hpr.shift_down(t)?;
            let delta = hr.shift_down(t)?.mul(&unit.inverse()?)?;
            let delta_lift = PadicInt::from_int(self.p, prec, delta.residue() as i128)?;
            r = r.sub(&delta_lift)?;
        }
        let check = self.eval(&r)?.reduce(prec)?;
        if !check.is_zero() {
            return Err(Error::HenselCondition {
                value_val,
                deriv_val,
            });
        }
        Ok(r)
    }

    /// Weierstrass preparation: V = p^mu * P * U mod (p^{prec-mu}, X^cutoff)
    /// with P distinguished of degree lambda(V/p^mu) and U a unit.  The
    /// documented slack is exactly mu.
    ///
    /// Below X^cutoff the product only pins P up to corrections fed back
    /// from the invisible top window of U, so for an exact polynomial the
    /// lift runs at an internally extended cutoff, pushing that ambiguity
    /// past the output precision: P is then the true prepared polynomial
    /// mod p^{prec-mu}.  For a truncated input, P and U satisfy the stated
    /// congruence and U is pinned mod (p, X^{cutoff-lambda}).
    pub fn weierstrass_prepare(&self) -> Result<(u32, DistinguishedPoly, PowerSeries)> {
        let mu = match self.mu_invariant() {
            Valuation::Known(v) => v,
            _ => return Err(Error::ZeroSeries),
        };
        if mu >= self.prec {
            return Err(Error::PrecisionUnderflow {
                needed: mu + 1,
                available: self.prec,
            });
        }
        let work_prec = self.prec - mu;
        let unit_scaled: Vec<u64> = {
            let pmu = (0..mu).fold(1u64, |acc, _| acc * self.p);
            let m = PadicInt::zero(self.p, work_prec)?.modulus();
            self.coeffs.iter().map(|&c| (c / pmu) % m).collect()
        };
        let lambda = {
            let probe = PowerSeries {
                p: self.p,
                prec: work_prec,
                cutoff: self.cutoff,
                coeffs: unit_scaled.clone(),
                poly: false,
            };
            match probe.lambda_invariant() {
                Lambda::Known(l) => l,
                Lambda::Undetermined { cutoff } => return Err(Error::CannotPrepare { cutoff }),
            }
        };
        // the feedback from the top window pollutes one p-digit of P per
        // lambda degrees of headroom; exact polynomials can be padded so
        // every polluted digit lies beyond the output precision
        let work_cutoff = if self.poly {
            self.cutoff
                .max(lambda.max(1) * (work_prec as usize + 2) + 1)
        } else {
            self.cutoff
        };
        let w = {
            let mut coeffs = unit_scaled;
            coeffs.resize(work_cutoff, 0);
            PowerSeries {
                p: self.p,
                prec: work_prec,
                cutoff: work_cutoff,
                coeffs,
                poly: false,
            }
        };
        // Hensel-style lift of the mod-p factorization W = X^lambda * unit
        let unit_modp: Vec<u64> = (lambda..work_cutoff)
            .map(|i| w.coeffs[i] % self.p)
            .chain(std::iter::repeat_n(0, lambda))
            .collect();
        let ubar = PowerSeries {
            p: self.p,
            prec: 1,
            cutoff: work_cutoff,
            coeffs: unit_modp,
            poly: false,
        };
        let ubar_inv = ubar.invert_unit()?;

        let mut dist = PowerSeries::zero(self.p, work_prec, work_cutoff)?;
        dist.coeffs[lambda] = 1;
        let mut unit = PowerSeries::zero(self.p, work_prec, work_cutoff)?;
        for (i, &c) in ubar.coeffs.iter().enumerate() {
            unit.coeffs[i] = c;
        }
        unit.poly = false;
        let mut pk_val = 1u64; // p^k
        for _k in 1..work_prec {
            pk_val *= self.p;
            let err = w.sub(&dist.mul(&unit)?)?;
            // E = err / p^k mod p
            let mut e = PowerSeries::zero(self.p, 1, work_cutoff)?;
            for (i, &c) in err.coeffs.iter().enumerate() {
                debug_assert_eq!(c % pk_val, 0, "lift invariant");
                e.coeffs[i] = (c / pk_val) % self.p;
            }
            e.poly = false;
            let q = e.mul(&ubar_inv)?;
            // delta_P = q below X^lambda, delta_U = (q div X^lambda) * ubar
            let mut q_low = PowerSeries::zero(self.p, 1, work_cutoff)?;
            q_low.coeffs[..lambda].copy_from_slice(&q.coeffs[..lambda]);
            q_low.poly = false;
            let mut q_high = PowerSeries::zero(self.p, 1, work_cutoff)?;
            for i in lambda..work_cutoff {
                q_high.coeffs[i - lambda] = q.coeffs[i];
            }
            q_high.poly = false;
            let du = q_high.mul(&ubar)?;
            let mw = unit.modulus();
            for i in 0..work_cutoff {
                dist.coeffs[i] = (dist.coeffs[i] + q_low.coeffs[i] * pk_val) % mw;
                unit.coeffs[i] = (unit.coeffs[i] + du.coeffs[i] * pk_val) % mw;
            }
        }
        let dist_coeffs: Vec<i128> = dist.coeffs[..=lambda]
            .iter()
            .map(|&c| c as i128)
            .collect();
        let out_cutoff = self.cutoff.max(lambda + 1);
        let poly = PowerSeries::polynomial(self.p, work_prec, out_cutoff, &dist_coeffs)?;
        let prepared = DistinguishedPoly::new(poly)?;
        debug_assert_eq!(prepared.lambda(), lambda);
        let unit = unit.reduce(work_prec, self.cutoff)?;
        Ok((mu, prepared, unit))
    }

    /// Equality as congruences: same residues modulo (p^N, X^D) at the
    /// common precision and cutoff, regardless of polynomial exactness.
    pub fn congruent_to(&self, other: &Self) -> bool {
        if self.p != other.p {
            return false;
        }
        let prec = self.prec.min(other.prec);
        let cutoff = self.cutoff.min(other.cutoff);
        let a = self.reduce(prec, cutoff).expect("shrinking reduce");
        let b = other.reduce(prec, cutoff).expect("shrinking reduce");
        a.coeffs == b.coeffs
    }

    /// Render with a chosen variable name.  Exact polynomials print in
    /// descending degree; truncated series ascend and end in an O(X^D) tail.
    pub fn render(&self, var: &str, with_modulus: bool) -> String {
        let mut terms: Vec<String> = Vec::new();
        let fmt_term = |c: u64, i: usize| -> String {
            match (c, i) {
                (c, 0) => format!("{c}"),
                (1, 1) => var.to_string(),
                (1, i) => format!("{var}^{i}"),
                (c, 1) => format!("{c}*{var}"),
                (c, i) => format!("{c}*{var}^{i}"),
            }
        };
        if self.poly {
            for i in (0..self.cutoff).rev() {
                if self.coeffs[i] != 0 {
                    terms.push(fmt_term(self.coeffs[i], i));
                }
            }
            if terms.is_empty() {
                terms.push("0".into());
            }
        } else {
            for i in 0..self.cutoff {
                if self.coeffs[i] != 0 {
                    terms.push(fmt_term(self.coeffs[i], i));
                }
            }
            terms.push(format!("O({var}^{})", self.cutoff));
        }
        let body = terms.join(" + ");
        if with_modulus {
            format!("{body} (mod {}^{})", self.p, self.prec)
        } else {
            body
        }
    }
}

impl fmt::Display for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render("T", true))
    }
}

/// Determinant mod m by subset dynamic programming (division-free).
pub(crate) fn det_mod(mat: &[Vec<u64>], m: u64) -> u64 {
    let n = mat.len();
    assert!(n <= 16, "determinant routine is capped at 16x16");
    let m128 = m as u128;
    // dp[mask] = minor of the first popcount(mask) rows on columns in mask,
    // expanded along the last of those rows: term sign is (-1)^(row + t)
    // for the t-th smallest column in the mask
    let mut dp = vec![0u64; 1 << n];
    dp[0] = 1 % m;
    for mask in 1usize..(1 << n) {
        let row = mask.count_ones() as usize - 1;
        let mut acc: u128 = 0;
        let mut sign_pos = row % 2 == 0;
        for j in 0..n {
            if mask & (1 << j) == 0 {
                continue;
            }
            let sub = dp[mask & !(1 << j)] as u128;
            let term = mat[row][j] as u128 * sub % m128;
            if sign_pos {
                acc = (acc + term) % m128;
            } else {
                acc = (acc + m128 - term) % m128;
            }
            sign_pos = !sign_pos;
        }
        dp[mask] = acc as u64;
    }
    dp[(1 << n) - 1]
}

/// A distinguished polynomial: monic of exact degree lambda with every lower
/// coefficient divisible by p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistinguishedPoly {
    series: PowerSeries,
    lambda: usize,
}

impl DistinguishedPoly {
    pub fn new(series: PowerSeries) -> Result<Self> {
        if !series.is_polynomial() {
            return Err(Error::InvalidArgument(
                "a distinguished polynomial must be exact".into(),
            ));
        }
        let lambda = series.degree().ok_or(Error::ZeroSeries)?;
        if series.coeff(lambda).residue() != 1 {
            return Err(Error::InvalidArgument(
                "a distinguished polynomial is monic with leading coefficient exactly 1".into(),
            ));
        }
        for i in 0..lambda {
            if series.coeff(i).residue() % series.p() != 0 {
                return Err(Error::InvalidArgument(format!(
                    "coefficient {i} is a unit; not distinguished"
                )));
            }
        }
        Ok(DistinguishedPoly { series, lambda })
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn series(&self) -> &PowerSeries {
        &self.series
    }
}

impl fmt::Display for DistinguishedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.series)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng as _;

    fn ps(p: u64, prec: u32, cutoff: usize, coeffs: &[i128]) -> PowerSeries {
        PowerSeries::polynomial(p, prec, cutoff, coeffs).unwrap()
    }

    #[test]
    fn det_mod_small_matrices() {
        let m = 1_000_003u64;
        assert_eq!(det_mod(&[vec![7]], m), 7);
        // [[1,2],[3,4]] -> -2
        assert_eq!(det_mod(&[vec![1, 2], vec![3, 4]], m), m - 2);
        // [[2,0,1],[1,3,0],[0,1,4]] -> 2*(12-0) - 0 + 1*(1-0) = 25
        assert_eq!(
            det_mod(&[vec![2, 0, 1], vec![1, 3, 0], vec![0, 1, 4]], m),
            25
        );
        // singular
        assert_eq!(det_mod(&[vec![1, 2], vec![2, 4]], m), 0);
        // identity of every size up to the cap
        for n in 1..=6usize {
            let id: Vec<Vec<u64>> = (0..n)
                .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
                .collect();
            assert_eq!(det_mod(&id, m), 1, "identity {n}x{n}");
        }
    }

    #[test]
    fn geometric_inverse_multiplies_to_one() {
        let one_plus = ps(3, 6, 12, &[1, 1]);
        let inv = one_plus.invert_unit().unwrap();
        let prod = one_plus.mul(&inv).unwrap();
        assert!(prod.congruent_to(&PowerSeries::one(3, 6, 12).unwrap()));
        // alternating signs
        assert_eq!(inv.coeff(0).residue(), 1);
        assert_eq!(inv.coeff(1), PadicInt::from_int(3, 6, -1).unwrap());
    }

    #[test]
    fn char_poly_product_of_example_data() {
        let t = ps(3, 11, 8, &[0, 1]);
        let shifted = ps(3, 11, 8, &[64638, 1]);
        let h = t.mul(&shifted).unwrap();
        assert!(h.congruent_to(&ps(3, 11, 8, &[0, 64638, 1])));
        assert!(h.is_polynomial());
    }

    #[test]
    fn addition_identity() {
        let a = ps(5, 4, 6, &[2, 0, 7]);
        let z = PowerSeries::zero(5, 4, 6).unwrap();
        assert_eq!(a.add(&z).unwrap(), a);
    }

    #[test]
    fn mu_invariant_examples() {
        let v = ps(3, 6, 8, &[3, 3]);
        assert_eq!(v.mu_invariant(), Valuation::Known(1));
        let h = ps(3, 11, 8, &[0, 64638, 1]);
        assert_eq!(h.mu_invariant(), Valuation::Known(0));
        let z = PowerSeries::zero(3, 4, 8).unwrap();
        assert_eq!(z.mu_invariant(), Valuation::AtLeast(4));
    }

    #[test]
    fn lambda_invariant_examples() {
        assert_eq!(
            ps(3, 11, 8, &[0, 64638, 1]).lambda_invariant(),
            Lambda::Known(2)
        );
        assert_eq!(
            ps(3, 7, 8, &[0, 522, 72, 405, 1]).lambda_invariant(),
            Lambda::Known(4)
        );
        assert_eq!(ps(3, 5, 8, &[1, 3]).lambda_invariant(), Lambda::Known(0));
        assert_eq!(
            ps(3, 5, 8, &[3, 9]).lambda_invariant(),
            Lambda::Undetermined { cutoff: 8 }
        );
    }

    #[test]
    fn nu_family() {
        let nu0 = PowerSeries::nu_polynomial(0, 3, 6, 8).unwrap();
        assert!(nu0.congruent_to(&PowerSeries::one(3, 6, 8).unwrap()));
        let nu1 = PowerSeries::nu_polynomial(1, 3, 6, 8).unwrap();
        assert!(nu1.congruent_to(&ps(3, 6, 8, &[3, 3, 1])));
        for m in 0..3u32 {
            let nu = PowerSeries::nu_polynomial(m, 3, 8, 32).unwrap();
            let at_zero = nu.eval(&PadicInt::zero(3, 8).unwrap()).unwrap();
            assert_eq!(at_zero.residue() as u64, 3u64.pow(m));
        }
    }

    #[test]
    fn nu_recursion_via_composition() {
        // S*nu_m(S) + 1 = (1+S)^{p^m} and nu_{m+1} = nu_m * nu_1((1+S)^{p^m}-1)
        for p in [3u64, 5] {
            for m in 0..2u32 {
                let cutoff = (p as usize).pow(m + 1) + 2;
                let nu_m = PowerSeries::nu_polynomial(m, p, 8, cutoff).unwrap();
                let nu_next = PowerSeries::nu_polynomial(m + 1, p, 8, cutoff).unwrap();
                let w = nu_m.shift_up(1); // S*nu_m = (1+S)^{p^m} - 1
                let one = PowerSeries::one(p, 8, cutoff).unwrap();
                let power = w.add(&one).unwrap();
                // direct binomial expansion of (1+S)^{p^m}
                let u = PadicInt::from_int(p, 12, (p as i128).pow(m)).unwrap();
                let expanded = PowerSeries::binom_series(&u, 1, cutoff).unwrap();
                assert!(power.congruent_to(&expanded));
                let nu1 = PowerSeries::nu_polynomial(1, p, 8, cutoff).unwrap();
                let composed = nu1.compose(&w).unwrap();
                assert!(nu_m.mul(&composed).unwrap().congruent_to(&nu_next));
            }
        }
    }

    #[test]
    fn binom_series_basics() {
        let minus_one = PadicInt::from_int(3, 8, -1).unwrap();
        let geo = PowerSeries::binom_series(&minus_one, 1, 6).unwrap();
        for i in 0..6 {
            let want = if i % 2 == 0 { 1 } else { -1 };
            assert_eq!(
                geo.coeff(i),
                PadicInt::from_int(3, geo.prec(), want).unwrap()
            );
        }
        // freshman's dream mod p
        for p in [3u64, 5] {
            let u = PadicInt::from_int(p, 9, p as i128).unwrap();
            let s = PowerSeries::binom_series(&u, 1, p as usize + 1).unwrap();
            let reduced = s.reduce(1, p as usize + 1).unwrap();
            let mut want = PowerSeries::zero(p, 1, p as usize + 1).unwrap();
            want.coeffs[0] = 1;
            want.coeffs[p as usize] = 1;
            assert!(reduced.congruent_to(&want));
        }
    }

    #[test]
    fn binom_series_inverse_law() {
        let u = PadicInt::from_int(5, 10, 7).unwrap();
        let a = PowerSeries::binom_series(&u, 1, 10).unwrap();
        let b = PowerSeries::binom_series(&u.neg(), 1, 10).unwrap();
        let prod = a.mul(&b).unwrap();
        assert!(prod.congruent_to(&PowerSeries::one(5, prod.prec(), 10).unwrap()));
    }

    #[test]
    fn prepare_examples() {
        // (S^2+3S+3)(1+S) -> (0, S^2+3S+3, 1+S)
        let dist = ps(3, 6, 16, &[3, 3, 1]);
        let unit = ps(3, 6, 16, &[1, 1]);
        let v = dist.mul(&unit).unwrap();
        let (mu, p_out, u_out) = v.weierstrass_prepare().unwrap();
        assert_eq!(mu, 0);
        assert!(p_out.series().congruent_to(&dist));
        assert_eq!(p_out.lambda(), 2);
        let u_cut = u_out.reduce(u_out.prec(), 16 - 2).unwrap();
        assert!(u_cut.congruent_to(&unit));

        // 3(1+S) -> (1, 1, 1+S)
        let v = ps(3, 6, 8, &[3, 3]);
        let (mu, p_out, u_out) = v.weierstrass_prepare().unwrap();
        assert_eq!(mu, 1);
        assert_eq!(p_out.lambda(), 0);
        assert!(u_out.congruent_to(&ps(3, 5, 8, &[1, 1])));

        // S -> (0, S, 1)
        let v = ps(3, 6, 8, &[0, 1]);
        let (mu, p_out, u_out) = v.weierstrass_prepare().unwrap();
        assert_eq!(mu, 0);
        assert_eq!(p_out.lambda(), 1);
        assert!(u_out.congruent_to(&PowerSeries::one(3, 6, 8).unwrap()));
    }

    #[test]
    fn prepare_rejects_zero_and_undetermined() {
        let z = PowerSeries::zero(3, 4, 8).unwrap();
        assert!(matches!(z.weierstrass_prepare(), Err(Error::ZeroSeries)));
        // once p^mu is divided out, the minimal-valuation coefficient is a
        // unit, so lambda is always determinable on stored data
        let all_divisible = PowerSeries::truncated(3, 4, 4, &[3, 3, 3, 3]).unwrap();
        let (mu, dist, unit) = all_divisible.weierstrass_prepare().unwrap();
        assert_eq!(mu, 1);
        assert_eq!(dist.lambda(), 0);
        assert!(unit.congruent_to(&PowerSeries::truncated(3, 3, 4, &[1, 1, 1, 1]).unwrap()));
    }

    #[test]
    fn newton_polygon_examples() {
        let g = ps(3, 7, 8, &[522, 72, 405, 1]);
        let np = g.newton_polygon().unwrap();
        assert_eq!(np.vertices, vec![(0, 2), (3, 0)]);
        assert_eq!(np.segments, vec![(Slope::new(-2, 3), 3)]);

        let lin = ps(3, 11, 8, &[486, 1]);
        let np = lin.newton_polygon().unwrap();
        assert_eq!(np.vertices, vec![(0, 5), (1, 0)]);
        assert_eq!(np.segments, vec![(Slope::new(-5, 1), 1)]);

        let t2 = ps(3, 6, 8, &[0, 0, 1]);
        let np = t2.newton_polygon().unwrap();
        assert_eq!(np.vertices, vec![(2, 0)]);
        assert!(np.segments.is_empty());
    }

    #[test]
    fn irreducibility_certificates() {
        assert_eq!(
            ps(3, 7, 8, &[522, 72, 405, 1]).irreducible_by_newton().unwrap(),
            Irreducibility::Irreducible
        );
        assert_eq!(
            ps(3, 11, 8, &[486, 1]).irreducible_by_newton().unwrap(),
            Irreducibility::Irreducible
        );
        assert_eq!(
            ps(3, 4, 8, &[3, 3, 1]).irreducible_by_newton().unwrap(),
            Irreducibility::Irreducible
        );
        assert_eq!(
            ps(3, 6, 8, &[0, 0, 1]).irreducible_by_newton().unwrap(),
            Irreducibility::Inconclusive
        );
    }

    /// A monic distinguished polynomial factors into monic polynomials mod
    /// p^k only with distinguished factors (reduce mod p), and any proper
    /// monic factorization of a cubic or quadratic contains a linear
    /// factor, i.e. a root.  So root search over multiples of p is an
    /// exhaustive reducibility oracle in degree <= 3.
    fn has_distinguished_root(h: &PowerSeries) -> bool {
        let m = PadicInt::zero(h.p(), h.prec()).unwrap().modulus();
        let mut c = 0i128;
        while (c as u64) < m {
            let x = PadicInt::from_int(h.p(), h.prec(), -c).unwrap();
            if h.eval(&x).unwrap().is_zero() {
                return true;
            }
            c += h.p() as i128;
        }
        false
    }

    #[test]
    fn irreducibility_oracle_at_full_example_precision() {
        // the cubic cofactor mod 3^7: no monic distinguished linear factor
        let g = ps(3, 7, 8, &[522, 72, 405, 1]);
        assert!(!has_distinguished_root(&g));
        assert_eq!(g.irreducible_by_newton().unwrap(), Irreducibility::Irreducible);

        // the Eisenstein quadratic mod 3^4
        let e = ps(3, 4, 8, &[3, 3, 1]);
        assert!(!has_distinguished_root(&e));
        assert_eq!(e.irreducible_by_newton().unwrap(), Irreducibility::Irreducible);

        // sanity: the oracle does find roots of split polynomials
        let split = ps(3, 4, 8, &[18, 9, 1]); // (T+3)(T+6)
        assert!(has_distinguished_root(&split));
        assert_eq!(split.irreducible_by_newton().unwrap(), Irreducibility::Inconclusive);
    }

    #[test]
    fn squarefree_examples() {
        assert_eq!(
            ps(3, 11, 8, &[0, 64638, 1]).squarefree_check().unwrap(),
            SquareFreeness::SquareFree { disc_val: 10 }
        );
        assert_eq!(
            ps(3, 6, 8, &[0, 0, 1]).squarefree_check().unwrap(),
            SquareFreeness::NotSquareFree { multiplicity: 2 }
        );
        assert_eq!(
            ps(3, 7, 8, &[0, 1989, 1]).squarefree_check().unwrap(),
            SquareFreeness::SquareFree { disc_val: 4 }
        );
    }

    #[test]
    fn hensel_examples() {
        // T^2 + T + 5 at p=5 from r0=0: root is 20 mod 25
        let h = ps(5, 6, 8, &[5, 1, 1]);
        let r = h
            .hensel_lift_root(&PadicInt::zero(5, 6).unwrap())
            .unwrap();
        assert_eq!(r.reduce(2).unwrap().residue(), 20);
        assert!(h.eval(&r).unwrap().is_zero());

        // exact linear root
        let h = ps(3, 11, 8, &[486, 1]);
        let r0 = PadicInt::from_int(3, 11, -486).unwrap();
        let r = h.hensel_lift_root(&r0).unwrap();
        assert_eq!(r, r0);

        // T^2 + 64638T: the root -64638 certifies h = T(T+a), a = 486 mod 3^6
        let h = ps(3, 11, 8, &[0, 64638, 1]);
        let r0 = PadicInt::from_int(3, 11, -64638).unwrap();
        let r = h.hensel_lift_root(&r0).unwrap();
        assert!(h.eval(&r).unwrap().is_zero());
        let alpha = r.neg();
        assert_eq!(alpha.reduce(6).unwrap().residue(), 486);
    }

    #[test]
    fn hensel_condition_violation() {
        // ord(h(0)) = 2 is not > 2*ord(h'(0)) = 2
        let h = ps(3, 6, 8, &[9, 3, 1]);
        assert!(matches!(
            h.hensel_lift_root(&PadicInt::zero(3, 6).unwrap()),
            Err(Error::HenselCondition { .. })
        ));
    }

    #[test]
    fn factor_out_x_examples() {
        let h = ps(3, 11, 8, &[0, 64638, 1]);
        let (a, g) = h.factor_out_x().unwrap();
        assert_eq!(a, 1);
        assert!(g.congruent_to(&ps(3, 11, 8, &[64638, 1])));

        let h = ps(3, 7, 8, &[0, 522, 72, 405, 1]);
        let (a, g) = h.factor_out_x().unwrap();
        assert_eq!(a, 1);
        assert!(g.congruent_to(&ps(3, 7, 8, &[522, 72, 405, 1])));

        let h = ps(3, 6, 8, &[0, 0, 0, 1]);
        let (a, g) = h.factor_out_x().unwrap();
        assert_eq!(a, 3);
        assert!(g.congruent_to(&PowerSeries::one(3, 6, 8).unwrap()));

        let z = PowerSeries::zero(3, 6, 8).unwrap();
        assert!(matches!(z.factor_out_x(), Err(Error::AmbiguousMultiplicity)));
    }

    #[test]
    fn eval_examples() {
        let g = ps(3, 11, 8, &[64638, 1]);
        assert_eq!(
            g.eval(&PadicInt::zero(3, 11).unwrap()).unwrap().residue(),
            64638
        );
        let nu1 = PowerSeries::nu_polynomial(1, 3, 6, 8).unwrap();
        assert_eq!(nu1.eval(&PadicInt::zero(3, 6).unwrap()).unwrap().residue(), 3);
        let s = ps(3, 6, 8, &[1, 1]);
        let at_p = s.eval(&PadicInt::from_int(3, 6, 3).unwrap()).unwrap();
        assert_eq!(at_p.residue(), 4);
    }

    #[test]
    fn eval_truncated_series_contract() {
        let geo = PowerSeries::binom_series(&PadicInt::from_int(3, 8, -1).unwrap(), 1, 6).unwrap();
        // unit argument: the tail is invisible
        assert!(matches!(
            geo.eval(&PadicInt::one(3, 8).unwrap()),
            Err(Error::UnboundedTail)
        ));
        // ord >= 1 argument: reported precision is capped by cutoff * ord
        let x = PadicInt::from_int(3, 8, 3).unwrap();
        let v = geo.eval(&x).unwrap();
        assert_eq!(v.prec(), 6);
        // (1+3)^{-1} = 1/4; 4 * v = 1 mod 3^6
        let four = PadicInt::from_int(3, 6, 4).unwrap();
        assert_eq!(four.mul(&v).unwrap(), PadicInt::one(3, 6).unwrap());
    }

    #[test]
    fn display_forms() {
        let h = ps(3, 11, 8, &[0, 64638, 1]);
        assert_eq!(h.to_string(), "T^2 + 64638*T (mod 3^11)");
        let nu1 = PowerSeries::nu_polynomial(1, 3, 6, 8).unwrap();
        assert_eq!(nu1.render("S", false), "S^2 + 3*S + 3");
    }

    fn random_distinguished(
        rng: &mut impl rand::Rng,
        p: u64,
        prec: u32,
        cutoff: usize,
        max_deg: usize,
    ) -> PowerSeries {
        let deg = rng.gen_range(0..=max_deg);
        let m = 3i128.pow(prec.min(12));
        let mut coeffs: Vec<i128> = (0..deg)
            .map(|_| p as i128 * rng.gen_range(0..m / p as i128))
            .collect();
        coeffs.push(1);
        PowerSeries::polynomial(p, prec, cutoff, &coeffs).unwrap()
    }

    fn random_unit(
        rng: &mut impl rand::Rng,
        p: u64,
        prec: u32,
        cutoff: usize,
        max_deg: usize,
    ) -> PowerSeries {
        let m = 3i128.pow(prec.min(12));
        let mut coeffs: Vec<i128> = (0..=max_deg).map(|_| rng.gen_range(0..m)).collect();
        if coeffs[0] % p as i128 == 0 {
            coeffs[0] += 1;
        }
        PowerSeries::polynomial(p, prec, cutoff, &coeffs).unwrap()
    }

    #[test]
    fn lambda_mu_additivity_on_products() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            for p in [3u64, 5] {
                let cutoff = 24;
                let prec = 9;
                // both invariants known forces mu = 0: distinguished * unit
                let v = random_distinguished(&mut rng, p, prec, cutoff, 5)
                    .mul(&random_unit(&mut rng, p, prec, cutoff, 3))
                    .unwrap();
                let w = random_distinguished(&mut rng, p, prec, cutoff, 5);
                let prod = v.mul(&w).unwrap();
                let (lv, lw) = (
                    v.lambda_invariant().known().unwrap(),
                    w.lambda_invariant().known().unwrap(),
                );
                assert_eq!(prod.lambda_invariant(), Lambda::Known(lv + lw));
                let (mv, mw) = (
                    v.mu_invariant().known().unwrap(),
                    w.mu_invariant().known().unwrap(),
                );
                assert_eq!(prod.mu_invariant(), Valuation::Known(mv + mw));

                // mu additivity with genuine p-power content
                let a: u32 = rng.gen_range(0..3);
                let b: u32 = rng.gen_range(0..3);
                let scale = |x: &PowerSeries, e: u32| {
                    x.scalar_mul(&PadicInt::from_int(p, prec, (p as i128).pow(e)).unwrap())
                        .unwrap()
                };
                let scaled = scale(&v, a).mul(&scale(&w, b)).unwrap();
                assert_eq!(scaled.mu_invariant(), Valuation::Known(a + b));
            }
        }
    }

    #[test]
    fn prepare_round_trip_randomized() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            for p in [3u64, 5] {
                let cutoff = 16;
                let prec = 8;
                let dist = random_distinguished(&mut rng, p, prec, cutoff, 4);
                let unit = random_unit(&mut rng, p, prec, cutoff, 4);
                let m: u32 = rng.gen_range(0..3);
                let v = dist
                    .mul(&unit)
                    .unwrap()
                    .scalar_mul(&PadicInt::from_int(p, prec, (p as i128).pow(m)).unwrap())
                    .unwrap();
                let (mu, p_out, u_out) = v.weierstrass_prepare().unwrap();
                assert_eq!(mu, m, "mu recovered");
                assert!(
                    p_out.series().congruent_to(&dist),
                    "distinguished part recovered at slack precision"
                );
                // the product reconstitutes V at the documented slack
                let back = p_out
                    .series()
                    .mul(&u_out)
                    .unwrap()
                    .scalar_mul(&PadicInt::from_int(p, prec - m, (p as i128).pow(m)).unwrap())
                    .unwrap();
                assert!(back.congruent_to(&v), "p^mu * P * U = V mod (p^(N-mu), X^D)");
                // the unit cofactor is pinned mod (p, X^(D-lambda))
                let lam = p_out.lambda();
                let u_modp = u_out.reduce(1, cutoff - lam).unwrap();
                assert!(
                    u_modp.congruent_to(&unit.reduce(1, cutoff - lam).unwrap()),
                    "unit recovered mod (p, X^(D-lambda))"
                );
            }
        }
    }

    #[test]
    fn hensel_postcondition_always_holds() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let p = 5u64;
            let prec = 8;
            // build h = (T - r)(T - s) with r = 0 mod p, s a unit, then lift from 0
            let r = p as i128 * rng.gen_range(1..100i128);
            let s = rng.gen_range(1..100i128) * p as i128 + rng.gen_range(1..p as i128);
            let h = ps(p, prec, 8, &[r * s, -(r + s), 1]);
            let root = h
                .hensel_lift_root(&PadicInt::from_int(p, prec, 0).unwrap())
                .unwrap();
            assert!(h.eval(&root).unwrap().is_zero());
            assert_eq!(root, PadicInt::from_int(p, prec, r).unwrap());
        }
    }

    proptest! {
        #[test]
        fn invert_unit_round_trip(c0 in 1u64..200, c1 in 0u64..200, c2 in 0u64..200) {
            prop_assume!(c0 % 3 != 0);
            let s = ps(3, 7, 10, &[c0 as i128, c1 as i128, c2 as i128]);
            let inv = s.invert_unit().unwrap();
            prop_assert!(s.mul(&inv).unwrap().congruent_to(&PowerSeries::one(3, 7, 10).unwrap()));
        }
    }

}
