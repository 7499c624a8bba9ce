//! The truncated two-variable ring `Z_p[[S,T]]`.
//!
//! A [`BivarSeries`] stores a full coefficient rectangle c_{ij} for
//! S^i T^j, 0 <= i < D_S, 0 <= j < D_T, reduced mod p^prec; every operation
//! is exact modulo (p^prec, S^{D_S}, T^{D_T}).  Like the univariate layer,
//! each variable direction carries an exactness flag recording that the
//! object is a genuine polynomial in that variable, which is what the
//! substitution and coordinate-change contracts key on.
//!
//! Annihilators of the relation-matrix kind are produced by [`char_det`]:
//! the characteristic determinant det(X*I - F) of a square matrix F of
//! univariate series, monic of degree n in the chosen diagonal variable X.

use std::fmt;

use crate::error::{Error, Result};
use crate::padic::PadicInt;
use crate::series::PowerSeries;

/// Which variable carries the matrix diagonal in [`char_det`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// det(T*I - F): entries univariate in S, result monic in T.
    TDiagonal,
    /// det(S*I - F): entries univariate in T, result monic in S.
    SDiagonal,
}

/// Direction of the coordinate change between `(S,T)` and `(S,T_s)`,
/// `T_s = (1+S)^{u p^s} (1+T) - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsDirection {
    /// Rewrite f(S,T) in the (S,T_s) coordinates.
    ToTs,
    /// Rewrite g(S,T_s) back in the (S,T) coordinates.
    FromTs,
}

/// A truncated element of `Z_p[[S,T]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivarSeries {
    p: u64,
    prec: u32,
    ds: usize,
    dt: usize,
    grid: Vec<u64>, // index i*dt + j holds the coefficient of S^i T^j
    s_exact: bool,
    t_exact: bool,
}

impl BivarSeries {
    pub fn zero(p: u64, prec: u32, ds: usize, dt: usize) -> Result<Self> {
        if ds == 0 || dt == 0 {
            return Err(Error::InvalidArgument("cutoffs must be >= 1".into()));
        }
        // validates p and prec
        let _ = PadicInt::zero(p, prec)?;
        Ok(BivarSeries {
            p,
            prec,
            ds,
            dt,
            grid: vec![0; ds * dt],
            s_exact: true,
            t_exact: true,
        })
    }

    pub fn one(p: u64, prec: u32, ds: usize, dt: usize) -> Result<Self> {
        let mut out = Self::zero(p, prec, ds, dt)?;
        out.grid[0] = 1;
        Ok(out)
    }

    /// Build from sparse (i, j, coefficient) monomials; everything omitted
    /// is exactly zero.
    pub fn from_monomials(
        p: u64,
        prec: u32,
        ds: usize,
        dt: usize,
        monomials: &[(usize, usize, i128)],
    ) -> Result<Self> {
        let mut out = Self::zero(p, prec, ds, dt)?;
        for &(i, j, c) in monomials {
            if i >= ds || j >= dt {
                return Err(Error::InvalidArgument(format!(
                    "monomial S^{i} T^{j} does not fit below the cutoffs ({ds}, {dt})"
                )));
            }
            let r = PadicInt::from_int(p, prec, c)?;
            out.grid[i * dt + j] = r.residue();
        }
        Ok(out)
    }

    /// Build `sum_j coeffs[j](S) T^j` from univariate T-coefficients.
    pub fn from_t_coefficients(coeffs: &[PowerSeries], dt: usize) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidArgument("at least one T-coefficient".into()))?;
        if coeffs.len() > dt {
            return Err(Error::InvalidArgument(format!(
                "{} T-coefficients do not fit below the T-cutoff {dt}",
                coeffs.len()
            )));
        }
        let p = first.p();
        let prec = coeffs.iter().map(|c| c.prec()).min().unwrap();
        let ds = coeffs.iter().map(|c| c.cutoff()).min().unwrap();
        let mut out = Self::zero(p, prec, ds, dt)?;
        out.s_exact = true;
        for (j, c) in coeffs.iter().enumerate() {
            if c.p() != p {
                return Err(Error::PrimeMismatch(p, c.p()));
            }
            let c = c.reduce(prec, ds)?;
            out.s_exact &= c.is_polynomial();
            for i in 0..ds {
                out.grid[i * dt + j] = c.coeff(i).residue();
            }
        }
        Ok(out)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn cutoffs(&self) -> (usize, usize) {
        (self.ds, self.dt)
    }

    pub fn is_s_exact(&self) -> bool {
        self.s_exact
    }

    pub fn is_t_exact(&self) -> bool {
        self.t_exact
    }

    pub fn coeff(&self, i: usize, j: usize) -> PadicInt {
        let r = if i < self.ds && j < self.dt {
            self.grid[i * self.dt + j]
        } else {
            0
        };
        PadicInt::from_int(self.p, self.prec, r as i128).expect("validated at construction")
    }

    fn modulus(&self) -> u64 {
        PadicInt::zero(self.p, self.prec)
            .expect("validated at construction")
            .modulus()
    }

    pub fn is_zero(&self) -> bool {
        self.grid.iter().all(|&c| c == 0)
    }

    /// Highest S-degree with a nonzero coefficient.
    pub fn degree_s(&self) -> Option<usize> {
        (0..self.ds)
            .rev()
            .find(|&i| (0..self.dt).any(|j| self.grid[i * self.dt + j] != 0))
    }

    /// Highest T-degree with a nonzero coefficient.
    pub fn degree_t(&self) -> Option<usize> {
        (0..self.dt)
            .rev()
            .find(|&j| (0..self.ds).any(|i| self.grid[i * self.dt + j] != 0))
    }

    pub fn reduce(&self, prec: u32, ds: usize, dt: usize) -> Result<Self> {
        if prec == 0 || prec > self.prec || ds == 0 || ds > self.ds || dt == 0 || dt > self.dt {
            return Err(Error::InvalidArgument(
                "reduce only shrinks precision and cutoffs".into(),
            ));
        }
        let m = PadicInt::zero(self.p, prec)?.modulus();
        let mut grid = vec![0u64; ds * dt];
        for i in 0..ds {
            for j in 0..dt {
                grid[i * dt + j] = self.grid[i * self.dt + j] % m;
            }
        }
        Ok(BivarSeries {
            p: self.p,
            prec,
            ds,
            dt,
            grid,
            s_exact: self.s_exact && self.degree_s().is_none_or(|d| d < ds),
            t_exact: self.t_exact && self.degree_t().is_none_or(|d| d < dt),
        })
    }

    fn align(&self, other: &Self) -> Result<(Self, Self)> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        let prec = self.prec.min(other.prec);
        let ds = self.ds.min(other.ds);
        let dt = self.dt.min(other.dt);
        Ok((self.reduce(prec, ds, dt)?, other.reduce(prec, ds, dt)?))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (mut a, b) = self.align(other)?;
        let m = a.modulus();
        for (ca, cb) in a.grid.iter_mut().zip(&b.grid) {
            *ca = (*ca + *cb) % m;
        }
        a.s_exact &= b.s_exact;
        a.t_exact &= b.t_exact;
        Ok(a)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let m = self.modulus();
        let grid = self.grid.iter().map(|&c| (m - c) % m).collect();
        BivarSeries {
            grid,
            ..self.clone()
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.align(other)?;
        let m = a.modulus() as u128;
        let mut grid = vec![0u64; a.ds * a.dt];
        for ia in 0..a.ds {
            for ja in 0..a.dt {
                let ca = a.grid[ia * a.dt + ja];
                if ca == 0 {
                    continue;
                }
                for ib in 0..a.ds - ia {
                    for jb in 0..a.dt - ja {
                        let cb = b.grid[ib * a.dt + jb];
                        if cb == 0 {
                            continue;
                        }
                        let idx = (ia + ib) * a.dt + (ja + jb);
                        let prod = ca as u128 * cb as u128 % m;
                        grid[idx] = ((grid[idx] as u128 + prod) % m) as u64;
                    }
                }
            }
        }
        let fits = |da: Option<usize>, db: Option<usize>, cut: usize| match (da, db) {
            (Some(x), Some(y)) => x + y < cut,
            _ => true,
        };
        Ok(BivarSeries {
            p: a.p,
            prec: a.prec,
            ds: a.ds,
            dt: a.dt,
            grid,
            s_exact: a.s_exact && b.s_exact && fits(a.degree_s(), b.degree_s(), a.ds),
            t_exact: a.t_exact && b.t_exact && fits(a.degree_t(), b.degree_t(), a.dt),
        })
    }

    /// The univariate T-coefficient of T^j, as a series in S.
    pub fn t_coefficient(&self, j: usize) -> PowerSeries {
        let coeffs: Vec<i128> = (0..self.ds)
            .map(|i| self.coeff(i, j).residue() as i128)
            .collect();
        if self.s_exact {
            PowerSeries::polynomial(self.p, self.prec, self.ds, &coeffs)
        } else {
            PowerSeries::truncated(self.p, self.prec, self.ds, &coeffs)
        }
        .expect("coefficients are already reduced")
    }

    /// f(S, 0): the T = 0 specialization, a series in S.
    pub fn specialize_t0(&self) -> PowerSeries {
        self.t_coefficient(0)
    }

    /// f(0, T): the S = 0 specialization, a series in T.
    pub fn specialize_s0(&self) -> PowerSeries {
        let coeffs: Vec<i128> = (0..self.dt)
            .map(|j| self.coeff(0, j).residue() as i128)
            .collect();
        if self.t_exact {
            PowerSeries::polynomial(self.p, self.prec, self.dt, &coeffs)
        } else {
            PowerSeries::truncated(self.p, self.prec, self.dt, &coeffs)
        }
        .expect("coefficients are already reduced")
    }

    /// f(0, 0).
    pub fn specialize_both(&self) -> PadicInt {
        self.coeff(0, 0)
    }

    /// f(S, phi(S)) for a substitution series phi in S.
    ///
    /// When f is not an exact polynomial in T the invisible T-tail forces
    /// ord_p-positive phi(0) and the result is only good below
    /// S^{D_T * ord(phi)}; that bound is applied to the output cutoff.
    pub fn substitute_t(&self, phi: &PowerSeries) -> Result<PowerSeries> {
        if phi.p() != self.p {
            return Err(Error::PrimeMismatch(self.p, phi.p()));
        }
        let vphi = phi.coeff(0).valuation();
        let prec = self.prec.min(phi.prec());
        let mut out_cutoff = self.ds.min(phi.cutoff());
        if !self.t_exact {
            let v = match vphi {
                crate::padic::Valuation::Known(0) => return Err(Error::UnboundedTail),
                crate::padic::Valuation::Known(v) => v,
                crate::padic::Valuation::AtLeast(n) => n,
                crate::padic::Valuation::Infinite => u32::MAX,
            };
            out_cutoff = out_cutoff.min(self.dt.saturating_mul(v as usize).max(1));
        }
        let top = self.degree_t().map_or(0, |d| d + 1);
        let mut acc = PowerSeries::zero(self.p, prec, out_cutoff)?;
        let phi = phi.reduce(prec, out_cutoff.min(phi.cutoff()))?;
        for j in (0..top).rev() {
            acc = acc.mul(&phi)?;
            acc = acc.add(&self.t_coefficient(j).reduce(prec, out_cutoff)?)?;
        }
        Ok(acc)
    }

    /// Substitute the T variable by a bivariate series of T-degree <= 1
    /// (used by the coordinate change).  Requires an exact T-polynomial.
    fn substitute_t_bivar(&self, sub: &BivarSeries) -> Result<BivarSeries> {
        if !self.t_exact {
            return Err(Error::InvalidArgument(
                "coordinate change needs an exact polynomial in T".into(),
            ));
        }
        let top = self.degree_t().map_or(0, |d| d + 1);
        let mut acc = BivarSeries::zero(sub.p, sub.prec.min(self.prec), sub.ds, sub.dt)?;
        for j in (0..top).rev() {
            acc = acc.mul(sub)?;
            let row = BivarSeries::from_t_coefficients(&[self.t_coefficient(j)], acc.dt)?;
            acc = acc.add(&row)?;
        }
        Ok(acc)
    }

    /// Coordinate change between (S,T) and (S,T_s) with
    /// T_s = (1+S)^{u p^s}(1+T) - 1 for a unit u.
    ///
    /// The output grid is indexed by the new second variable.  The binomial
    /// expansion of (1+S)^{u p^s} costs ord_p(j_max!) digits of precision,
    /// reported on the result.
    pub fn ts_change(&self, u: &PadicInt, s: u32, direction: TsDirection) -> Result<Self> {
        if u.p() != self.p {
            return Err(Error::PrimeMismatch(self.p, u.p()));
        }
        if !u.is_unit() {
            return Err(Error::NotInvertible(u.valuation()));
        }
        let ps = (self.p as i128)
            .checked_pow(s)
            .ok_or_else(|| Error::InvalidArgument(format!("p^{s} out of range")))?;
        let scale = PadicInt::from_int(self.p, u.prec(), ps)?;
        let exponent = match direction {
            TsDirection::ToTs => u.neg().mul(&scale)?,
            TsDirection::FromTs => u.mul(&scale)?,
        };
        // w = (1+S)^exponent, the old variable reads (1+T_new) * w - 1
        let w = PowerSeries::binom_series(&exponent, 1, self.ds)?;
        let prec = w.prec().min(self.prec);
        let w = w.reduce(prec, self.ds)?;
        let one = PowerSeries::one(self.p, prec, self.ds)?;
        let w_minus_1 = w.sub(&one)?;
        let mut sub = BivarSeries::zero(self.p, prec, self.ds, self.dt)?;
        for i in 0..self.ds {
            sub.grid[i * self.dt] = w_minus_1.coeff(i).residue();
            if self.dt > 1 {
                sub.grid[i * self.dt + 1] = w.coeff(i).residue();
            }
        }
        sub.s_exact = false;
        sub.t_exact = true;
        self.reduce(prec, self.ds, self.dt)?.substitute_t_bivar(&sub)
    }

    /// Render as graded-lex monomials `c * S^i * T^j`.
    pub fn render(&self, s_var: &str, t_var: &str) -> String {
        let mut terms: Vec<(usize, usize, u64)> = Vec::new();
        for i in 0..self.ds {
            for j in 0..self.dt {
                let c = self.grid[i * self.dt + j];
                if c != 0 {
                    terms.push((i, j, c));
                }
            }
        }
        terms.sort_by_key(|&(i, j, _)| (i + j, std::cmp::Reverse(i)));
        let body = if terms.is_empty() {
            "0".to_string()
        } else {
            terms
                .iter()
                .map(|&(i, j, c)| {
                    let mut parts: Vec<String> = Vec::new();
                    if c != 1 || (i == 0 && j == 0) {
                        parts.push(format!("{c}"));
                    }
                    match i {
                        0 => {}
                        1 => parts.push(s_var.to_string()),
                        _ => parts.push(format!("{s_var}^{i}")),
                    }
                    match j {
                        0 => {}
                        1 => parts.push(t_var.to_string()),
                        _ => parts.push(format!("{t_var}^{j}")),
                    }
                    parts.join("*")
                })
                .collect::<Vec<_>>()
                .join(" + ")
        };
        format!("{body} (mod {}^{})", self.p, self.prec)
    }

    /// Congruence equality at the common precision and cutoffs.
    pub fn congruent_to(&self, other: &Self) -> bool {
        if self.p != other.p {
            return false;
        }
        let prec = self.prec.min(other.prec);
        let ds = self.ds.min(other.ds);
        let dt = self.dt.min(other.dt);
        let a = self.reduce(prec, ds, dt).expect("shrinking reduce");
        let b = other.reduce(prec, ds, dt).expect("shrinking reduce");
        a.grid == b.grid
    }
}

impl fmt::Display for BivarSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render("S", "T"))
    }
}

/// A square matrix of univariate power series over one (p, prec, cutoff).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesMatrix {
    n: usize,
    entries: Vec<PowerSeries>,
}

impl SeriesMatrix {
    pub fn new(n: usize, entries: Vec<PowerSeries>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "a {n}x{n} matrix needs {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        let p = entries[0].p();
        let prec = entries[0].prec();
        let cutoff = entries[0].cutoff();
        for e in &entries {
            if e.p() != p || e.prec() != prec || e.cutoff() != cutoff {
                return Err(Error::InvalidArgument(
                    "matrix entries must share (p, prec, cutoff)".into(),
                ));
            }
        }
        Ok(SeriesMatrix { n, entries })
    }

    pub fn identity(n: usize, p: u64, prec: u32, cutoff: usize) -> Result<Self> {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(if i == j {
                    PowerSeries::one(p, prec, cutoff)?
                } else {
                    PowerSeries::zero(p, prec, cutoff)?
                });
            }
        }
        SeriesMatrix::new(n, entries)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &PowerSeries {
        &self.entries[i * self.n + j]
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::InvalidArgument("matrix size mismatch".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        SeriesMatrix::new(self.n, entries)
    }

    pub fn mat_mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::InvalidArgument("matrix size mismatch".into()));
        }
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = PowerSeries::zero(
                    self.entries[0].p(),
                    self.entries[0].prec().min(other.entries[0].prec()),
                    self.entries[0].cutoff().min(other.entries[0].cutoff()),
                )?;
                for k in 0..n {
                    acc = acc.add(&self.entry(i, k).mul(other.entry(k, j))?)?;
                }
                entries.push(acc);
            }
        }
        SeriesMatrix::new(n, entries)
    }

    pub fn scalar_mul(&self, c: &PowerSeries) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.mul(c))
            .collect::<Result<Vec<_>>>()?;
        SeriesMatrix::new(self.n, entries)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }
}

/// Which line the cofactor expansion follows.
#[derive(Debug, Clone, Copy)]
pub(crate) enum ExpansionLine {
    Row(usize),
    #[cfg_attr(not(test), allow(dead_code))]
    Col(usize),
}

/// det(X*I - F) by cofactor expansion: monic of degree n in the diagonal
/// variable X, coefficients univariate in the other variable.
pub fn char_det(f: &SeriesMatrix, orientation: Orientation) -> Result<BivarSeries> {
    char_det_along(f, orientation, ExpansionLine::Row(0))
}

pub(crate) fn char_det_along(
    f: &SeriesMatrix,
    orientation: Orientation,
    line: ExpansionLine,
) -> Result<BivarSeries> {
    let n = f.size();
    let p = f.entry(0, 0).p();
    let prec = f.entry(0, 0).prec();
    let cutoff = f.entry(0, 0).cutoff();
    // embed entries: diagonal gets X - F_ii, off-diagonal -F_ij
    let (ds, dt) = match orientation {
        Orientation::TDiagonal => (cutoff, n + 1),
        Orientation::SDiagonal => (n + 1, cutoff),
    };
    let embed = |series: &PowerSeries, diag: bool| -> Result<BivarSeries> {
        let mut out = BivarSeries::zero(p, prec, ds, dt)?;
        let m = out.modulus();
        let neg = series.neg();
        for (k, &c) in neg.residues().iter().enumerate() {
            match orientation {
                Orientation::TDiagonal => out.grid[k * dt] = c,
                Orientation::SDiagonal => out.grid[k] = c,
            }
        }
        out.s_exact = match orientation {
            Orientation::TDiagonal => series.is_polynomial(),
            Orientation::SDiagonal => true,
        };
        out.t_exact = match orientation {
            Orientation::TDiagonal => true,
            Orientation::SDiagonal => series.is_polynomial(),
        };
        if diag {
            let idx = match orientation {
                Orientation::TDiagonal => 1,        // S^0 T^1
                Orientation::SDiagonal => dt,       // S^1 T^0
            };
            out.grid[idx] = (out.grid[idx] + 1) % m;
        }
        Ok(out)
    };
    let mut cells: Vec<BivarSeries> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            cells.push(embed(f.entry(i, j), i == j)?);
        }
    }
    let det = det_rec(&cells, n, line)?;
    // monic of degree n in the diagonal variable, by construction
    let monic_ok = match orientation {
        Orientation::TDiagonal => {
            det.coeff(0, n).residue() == 1
                && (1..det.ds).all(|i| det.coeff(i, n).is_zero())
                && det.degree_t() == Some(n)
        }
        Orientation::SDiagonal => {
            det.coeff(n, 0).residue() == 1
                && (1..det.dt).all(|j| det.coeff(n, j).is_zero())
                && det.degree_s() == Some(n)
        }
    };
    debug_assert!(monic_ok, "characteristic determinant lost its monic shape");
    Ok(det)
}

fn det_rec(cells: &[BivarSeries], n: usize, line: ExpansionLine) -> Result<BivarSeries> {
    if n == 1 {
        return Ok(cells[0].clone());
    }
    let minor = |skip_row: usize, skip_col: usize| -> Vec<BivarSeries> {
        let mut out = Vec::with_capacity((n - 1) * (n - 1));
        for i in 0..n {
            if i == skip_row {
                continue;
            }
            for j in 0..n {
                if j == skip_col {
                    continue;
                }
                out.push(cells[i * n + j].clone());
            }
        }
        out
    };
    let mut acc: Option<BivarSeries> = None;
    let indices: Vec<(usize, usize)> = match line {
        ExpansionLine::Row(r) => (0..n).map(|j| (r, j)).collect(),
        ExpansionLine::Col(c) => (0..n).map(|i| (i, c)).collect(),
    };
    for (i, j) in indices {
        let cell = &cells[i * n + j];
        if cell.is_zero() {
            continue;
        }
        // deeper minors always expand along their first row
        let term = cell.mul(&det_rec(&minor(i, j), n - 1, ExpansionLine::Row(0))?)?;
        let term = if (i + j) % 2 == 1 { term.neg() } else { term };
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    match acc {
        Some(a) => Ok(a),
        None => {
            let probe = &cells[0];
            BivarSeries::zero(probe.p, probe.prec, probe.ds, probe.dt)
        }
    }
}
