//! Field-data records: the JSON schema, bundled datasets, validation, and
//! Iwasawa-invariant fitting from class-number sequences.
//!
//! A [`FieldRecord`] collects every arithmetic fact the verdict engine may
//! consume about one pair (p, d): the p-class group of k = Q(sqrt(-d)) as
//! elementary-divisor exponents, the index exponent s with
//! p^s = [L_k \cap ktilde : k], auxiliary class numbers, the cyclotomic
//! characteristic polynomial mod p^N, class-number towers, capitulation
//! data, and ingested structural facts.  Every optional field carries a
//! provenance tag (`bundled`, `cas`, or `manual`).
//!
//! Layer sequences follow the convention that `ords[i]` is
//! ord_p(#A_{c+i}): the window starts at the stability index c, which is
//! exactly the range the stabilization criterion inspects.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::PowerSeries;

/// Source tag for record fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Bundled,
    Cas,
    Manual,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Bundled => write!(f, "bundled"),
            Provenance::Cas => write!(f, "cas"),
            Provenance::Manual => write!(f, "manual"),
        }
    }
}

/// Which tower a class-number sequence belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tower {
    #[serde(rename = "cyclotomic")]
    Cyclotomic,
    #[serde(rename = "anticyclotomic")]
    Anticyclotomic,
    #[serde(rename = "N")]
    N,
    #[serde(rename = "Nstar")]
    Nstar,
    #[serde(rename = "H")]
    H,
}

/// Auxiliary class numbers used by the Hilbert-field criteria: for p = 3 the
/// class number of Q(sqrt(3d)), for p >= 5 the class number of k(zeta_p).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HilbertAux {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_quad_class_number: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_zetap_class_number: Option<u64>,
}

/// The cyclotomic characteristic polynomial h(T) mod p^prec_exp,
/// ascending-degree coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharPolyData {
    pub prec_exp: u32,
    pub coeffs: Vec<i64>,
}

impl CharPolyData {
    /// The polynomial as a power series in T over Z_p.
    pub fn to_series(&self, p: u64) -> Result<PowerSeries> {
        let coeffs: Vec<i128> = self.coeffs.iter().map(|&c| c as i128).collect();
        let cutoff = self.coeffs.len().max(2);
        PowerSeries::polynomial(p, self.prec_exp, cutoff, &coeffs)
    }
}

/// ord_p(#A_n) along one tower, starting at the stability index c.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSequence {
    pub tower: Tower,
    pub c: u32,
    pub ords: Vec<u32>,
}

/// One capitulation fact: the class of `generator` becomes principal (or
/// not) at the named layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapitulationEntry {
    pub generator: String,
    pub layer: u32,
    pub principal: bool,
}

/// All arithmetic facts about one pair (p, d).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldRecord {
    pub p: u64,
    pub d: u64,
    /// p-power elementary-divisor exponents of the p-class group of k.
    pub class_group_k: Vec<u32>,
    /// Exponent s with p^s = [L_k intersect ktilde : k] (equal to [L_k : k]
    /// whenever the Hilbert class field lies in ktilde).
    pub s_exp: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hilbert_aux: Option<HilbertAux>,
    #[serde(rename = "char_T", default, skip_serializing_if = "Option::is_none")]
    pub char_t: Option<CharPolyData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<LayerSequence>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capitulation: Option<Vec<CapitulationEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0_exp: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normality: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_infinity_lambda_zero: Option<bool>,
    /// Defining polynomials of auxiliary layers, stored verbatim for engine
    /// script generation; never parsed algebraically here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defining_polynomials: Option<BTreeMap<String, String>>,
    /// Per-field source tag; required for every present optional field and
    /// for class_group_k and s_exp.
    pub provenance: BTreeMap<String, Provenance>,
}

/// a^((p-1)/2) mod p == 1, i.e. a is a nonzero quadratic residue mod p.
fn is_nonzero_square_mod(a: u64, p: u64) -> bool {
    let a = a % p;
    if a == 0 {
        return false;
    }
    let mut acc: u64 = 1;
    let mut base = a;
    let mut exp = (p - 1) / 2;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = (acc as u128 * base as u128 % p as u128) as u64;
        }
        base = (base as u128 * base as u128 % p as u128) as u64;
        exp >>= 1;
    }
    acc == 1
}

fn is_squarefree(mut d: u64) -> bool {
    if d == 0 {
        return false;
    }
    let mut q = 2u64;
    while q * q <= d {
        if d % q == 0 {
            d /= q;
            if d % q == 0 {
                return false;
            }
        }
        q += 1;
    }
    true
}

const OPTIONAL_FIELDS: &[&str] = &[
    "hilbert_aux",
    "char_T",
    "layers",
    "capitulation",
    "n0_exp",
    "normality",
    "h_infinity_lambda_zero",
    "defining_polynomials",
];

impl FieldRecord {
    /// Parse and validate a record from JSON bytes.  Unknown keys are
    /// rejected and schema errors carry the JSON path that failed.
    pub fn load(bytes: &[u8]) -> Result<FieldRecord> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Schema {
            path: "(document)".into(),
            message: format!("not UTF-8: {e}"),
        })?;
        let de = &mut serde_json::Deserializer::from_str(text);
        let record: FieldRecord =
            serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        record.validate()?;
        Ok(record)
    }

    pub fn load_path(path: &std::path::Path) -> Result<FieldRecord> {
        let bytes = std::fs::read(path)?;
        Self::load(&bytes)
    }

    /// Canonical serialization: pretty JSON with deterministic key order.
    pub fn serialize_canonical(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("record serialization is total");
        out.push(b'\n');
        out
    }

    pub fn validate(&self) -> Result<()> {
        if !crate::padic::is_prime(self.p) {
            return Err(Error::Schema {
                path: "p".into(),
                message: format!("{} is not prime", self.p),
            });
        }
        if self.p == 2 {
            return Err(Error::Schema {
                path: "p".into(),
                message: "p must be odd".into(),
            });
        }
        if !is_squarefree(self.d) {
            return Err(Error::Schema {
                path: "d".into(),
                message: format!("{} is not square-free", self.d),
            });
        }
        // p splits in Q(sqrt(-d)) iff -d is a nonzero square mod p
        let minus_d = (self.p - self.d % self.p) % self.p;
        if !is_nonzero_square_mod(minus_d, self.p) {
            return Err(Error::SplitCondition {
                p: self.p,
                d: self.d,
            });
        }
        if let Some(char_t) = &self.char_t {
            if char_t.coeffs.is_empty() {
                return Err(Error::Schema {
                    path: "char_T.coeffs".into(),
                    message: "empty coefficient list".into(),
                });
            }
            if char_t.coeffs[0] != 0 {
                return Err(Error::Schema {
                    path: "char_T.coeffs".into(),
                    message: "constant term must be exactly zero".into(),
                });
            }
            char_t.to_series(self.p)?;
        }
        if let Some(aux) = &self.hilbert_aux {
            if aux.real_quad_class_number.is_none() && aux.k_zetap_class_number.is_none() {
                return Err(Error::Schema {
                    path: "hilbert_aux".into(),
                    message: "at least one auxiliary class number is required".into(),
                });
            }
        }
        if let Some(layers) = &self.layers {
            for (i, entry) in layers.iter().enumerate() {
                if entry.ords.is_empty() {
                    return Err(Error::Schema {
                        path: format!("layers[{i}].ords"),
                        message: "empty sequence".into(),
                    });
                }
            }
        }
        // provenance: required fields plus every present optional
        let mut required: Vec<&str> = vec!["class_group_k", "s_exp"];
        let present: [(&str, bool); 8] = [
            ("hilbert_aux", self.hilbert_aux.is_some()),
            ("char_T", self.char_t.is_some()),
            ("layers", self.layers.is_some()),
            ("capitulation", self.capitulation.is_some()),
            ("n0_exp", self.n0_exp.is_some()),
            ("normality", self.normality.is_some()),
            ("h_infinity_lambda_zero", self.h_infinity_lambda_zero.is_some()),
            ("defining_polynomials", self.defining_polynomials.is_some()),
        ];
        for (name, is_present) in present {
            if is_present {
                required.push(name);
            }
        }
        for name in &required {
            if !self.provenance.contains_key(*name) {
                return Err(Error::Schema {
                    path: format!("provenance.{name}"),
                    message: "missing provenance tag".into(),
                });
            }
        }
        for key in self.provenance.keys() {
            let known = key == "class_group_k"
                || key == "s_exp"
                || OPTIONAL_FIELDS.contains(&key.as_str());
            if !known {
                return Err(Error::Schema {
                    path: format!("provenance.{key}"),
                    message: "provenance tag for an unknown field".into(),
                });
            }
        }
        Ok(())
    }

    /// ord_p of the class number of k implied by the stored class group.
    pub fn class_number_ord(&self) -> u32 {
        self.class_group_k.iter().sum()
    }

    /// The layer sequence for one tower, if recorded.
    pub fn layer_sequence(&self, tower: Tower) -> Option<&LayerSequence> {
        self.layers
            .as_ref()
            .and_then(|ls| ls.iter().find(|l| l.tower == tower))
    }
}

/// One line of a record comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffEntry {
    pub field: String,
    pub left: String,
    pub right: String,
}

/// Field-by-field comparison of two records for the same (p, d); the
/// provenance map is excluded because a refresh retags by design.
pub fn record_diff(a: &FieldRecord, b: &FieldRecord) -> Result<Vec<DiffEntry>> {
    if a.p != b.p || a.d != b.d {
        return Err(Error::KeyMismatch {
            left_p: a.p,
            left_d: a.d,
            right_p: b.p,
            right_d: b.d,
        });
    }
    let left = serde_json::to_value(a).expect("record serialization is total");
    let right = serde_json::to_value(b).expect("record serialization is total");
    let mut out = Vec::new();
    let render = |v: Option<&serde_json::Value>| match v {
        None => "(absent)".to_string(),
        Some(v) => v.to_string(),
    };
    let mut keys: Vec<String> = Vec::new();
    for obj in [&left, &right] {
        if let serde_json::Value::Object(map) = obj {
            for k in map.keys() {
                if k != "provenance" && !keys.contains(k) {
                    keys.push(k.clone());
                }
            }
        }
    }
    keys.sort();
    for key in keys {
        let l = left.get(&key);
        let r = right.get(&key);
        if l != r {
            out.push(DiffEntry {
                field: key,
                left: render(l),
                right: render(r),
            });
        }
    }
    Ok(out)
}

/// Exact fit of the growth model e_n = mu p^n + lambda n + nu.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitResult {
    pub mu: u32,
    pub lambda: u32,
    pub nu: i64,
    /// First n where the model reproduces the sequence exactly onward.
    pub window_start: u32,
}

/// Fit ord_p exponents e_n, indexed from `start`, against the growth model.
/// Returns the fit on the earliest tail of length >= 3 that matches
/// exactly with mu, lambda >= 0, or `None` when no tail fits.
pub fn iwasawa_fit(seq: &[u32], start: u32, p: u64) -> Result<Option<FitResult>> {
    if seq.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "the growth model needs at least 3 consecutive entries, got {}",
            seq.len()
        )));
    }
    let pow = |n: u32| -> Option<i128> { (p as i128).checked_pow(n) };
    for w in 0..=seq.len() - 3 {
        let n0 = start + w as u32;
        let e: Vec<i128> = seq[w..].iter().map(|&x| x as i128).collect();
        let p_n0 = match pow(n0) {
            Some(v) => v,
            None => return Ok(None),
        };
        let d1 = e[1] - e[0];
        let d2 = e[2] - e[1];
        let mu_num = d2 - d1;
        let mu_den = p_n0 * (p as i128 - 1) * (p as i128 - 1);
        if mu_num < 0 || mu_num % mu_den != 0 {
            continue;
        }
        let mu = mu_num / mu_den;
        let lambda = d1 - mu * p_n0 * (p as i128 - 1);
        if lambda < 0 {
            continue;
        }
        let nu = e[0] - mu * p_n0 - lambda * n0 as i128;
        let fits = e.iter().enumerate().all(|(i, &en)| {
            let n = n0 as i128 + i as i128;
            match pow(n as u32) {
                Some(pn) => en == mu * pn + lambda * n + nu,
                None => false,
            }
        });
        if fits && u32::try_from(mu).is_ok() && u32::try_from(lambda).is_ok() {
            return Ok(Some(FitResult {
                mu: mu as u32,
                lambda: lambda as u32,
                nu: nu as i64,
                window_start: n0,
            }));
        }
    }
    Ok(None)
}

const BUNDLED: &[(&str, &str)] = &[
    ("971", include_str!("../../../data/971.json")),
    ("2239", include_str!("../../../data/2239.json")),
    ("5069", include_str!("../../../data/5069.json")),
    ("17291", include_str!("../../../data/17291.json")),
];

/// All records shipped with the library, ordered by (p, d).
pub fn bundled_records() -> Vec<FieldRecord> {
    let mut out: Vec<FieldRecord> = BUNDLED
        .iter()
        .map(|(name, text)| {
            FieldRecord::load(text.as_bytes())
                .unwrap_or_else(|e| panic!("bundled record {name} must validate: {e}"))
        })
        .collect();
    out.sort_by_key(|r| (r.p, r.d));
    out
}

/// One bundled record by key.
pub fn bundled_record(p: u64, d: u64) -> Option<FieldRecord> {
    bundled_records().into_iter().find(|r| r.p == p && r.d == d)
}
