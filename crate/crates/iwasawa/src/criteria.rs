//! The verdict engine: evaluates the sufficient criteria for weak and full
//! forms of the pseudo-nullity conjecture on one field record and emits a
//! three-valued verdict with a machine-readable reason trace.
//!
//! The engine never asserts that the conjecture fails: every criterion is a
//! sufficient condition, so the only outcomes are `GgcHolds`,
//! `WeakGgcHolds`, and `Inconclusive`.  Two structural facts do the heavy
//! lifting:
//!
//! * the cyclotomic characteristic polynomial h(T) = T^a g(T) mod p^N,
//!   analyzed into lambda/mu invariants, a square-freeness certificate and
//!   the valuation of g(0);
//! * the index exponent s with p^s = [L_k intersect ktilde : k].
//!
//! The constant-term criterion compares ord_p(g_0(0)) against s as
//! exponents (not against p^s); the trace records that reading on every
//! line that uses it.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::Valuation;
use crate::record::{FieldRecord, Tower};
use crate::series::{Irreducibility, Lambda, PowerSeries, SquareFreeness};

/// A three-valued answer to a yes/no question about the record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    True,
    False,
    Unknown,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::True => write!(f, "true"),
            Decision::False => write!(f, "false"),
            Decision::Unknown => write!(f, "unknown"),
        }
    }
}

/// How square-freeness of h was certified (or not).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SquareFreeCertificate {
    /// res(h, h') has the quoted valuation, visible below the precision.
    Discriminant { disc_val: u32, prec: u32 },
    /// h = T * g with g(0) nonzero and res(g, g') visibly nonzero.
    CofactorDiscriminant { disc_val: u32, prec: u32 },
    /// h = T * g with g(0) nonzero and g certified irreducible.
    CofactorIrreducible,
    /// An exact repeated factor T^multiplicity was exhibited.
    NotSquareFree { multiplicity: usize },
    Inconclusive,
}

impl SquareFreeCertificate {
    pub fn is_squarefree(&self) -> bool {
        matches!(
            self,
            SquareFreeCertificate::Discriminant { .. }
                | SquareFreeCertificate::CofactorDiscriminant { .. }
                | SquareFreeCertificate::CofactorIrreducible
        )
    }
}

impl fmt::Display for SquareFreeCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SquareFreeCertificate::Discriminant { disc_val, prec } => {
                write!(f, "square-free: vp(disc)={disc_val} < {prec}")
            }
            SquareFreeCertificate::CofactorDiscriminant { disc_val, prec } => {
                write!(f, "square-free: cofactor vp(disc)={disc_val} < {prec}")
            }
            SquareFreeCertificate::CofactorIrreducible => {
                write!(f, "square-free: cofactor irreducible, coprime to T")
            }
            SquareFreeCertificate::NotSquareFree { multiplicity } => {
                write!(f, "not square-free: exact factor T^{multiplicity}")
            }
            SquareFreeCertificate::Inconclusive => {
                write!(f, "square-freeness inconclusive at this precision")
            }
        }
    }
}

/// Derived data of the cyclotomic characteristic polynomial.
#[derive(Debug, Clone)]
pub struct CharData {
    pub h: PowerSeries,
    /// lambda invariant of h; equals the tower lambda since mu vanishes.
    pub lambda_cyc: usize,
    pub mu: Valuation,
    pub squarefree: SquareFreeCertificate,
    /// Multiplicity of the exact T factor (>= 1: the constant term is
    /// exactly zero by the record invariant).
    pub t_multiplicity: usize,
    /// The cofactor g with h = T^a g.
    pub g: PowerSeries,
    /// ord_p(g(0)).
    pub g0_val: Valuation,
    /// lambda_cyc = 1 characterizes a trivial two-variable module.
    pub x_tilde_trivial: bool,
}

/// Analyze a characteristic polynomial: invariants, square-freeness and the
/// constant-term valuation of the T-cofactor.
///
/// Requires an exact monic distinguished polynomial with h(0) = 0.
pub fn char_analysis(h: &PowerSeries) -> Result<CharData> {
    if !h.is_polynomial() {
        return Err(Error::InvalidChar(
            "the characteristic polynomial must be exact".into(),
        ));
    }
    if !h.coeff(0).is_zero() {
        return Err(Error::InvalidChar(
            "the constant term must be exactly zero (T divides h)".into(),
        ));
    }
    let deg = h.degree().ok_or_else(|| {
        Error::InvalidChar("the characteristic polynomial must be nonzero".into())
    })?;
    if h.coeff(deg).residue() != 1 {
        return Err(Error::InvalidChar(
            "the characteristic polynomial must be monic with leading coefficient 1".into(),
        ));
    }
    let lambda_cyc = match h.lambda_invariant() {
        Lambda::Known(l) => l,
        Lambda::Undetermined { cutoff } => {
            return Err(Error::InvalidChar(format!(
                "no unit coefficient below the cutoff {cutoff}"
            )))
        }
    };
    if lambda_cyc != deg {
        return Err(Error::InvalidChar(format!(
            "not distinguished: lambda {lambda_cyc} differs from the degree {deg}"
        )));
    }
    let mu = h.mu_invariant();
    let (t_multiplicity, g) = h.factor_out_x()?;
    let g0_val = g.coeff(0).valuation();
    let squarefree = match h.squarefree_check()? {
        SquareFreeness::SquareFree { disc_val } => SquareFreeCertificate::Discriminant {
            disc_val,
            prec: h.prec(),
        },
        SquareFreeness::NotSquareFree { multiplicity } => {
            SquareFreeCertificate::NotSquareFree { multiplicity }
        }
        SquareFreeness::Inconclusive => {
            if t_multiplicity == 1 {
                // h = T * g with g(0) nonzero at precision: square-freeness
                // reduces to the cofactor
                match g.squarefree_check()? {
                    SquareFreeness::SquareFree { disc_val } => {
                        SquareFreeCertificate::CofactorDiscriminant {
                            disc_val,
                            prec: g.prec(),
                        }
                    }
                    _ => match g.irreducible_by_newton() {
                        Ok(Irreducibility::Irreducible) => {
                            SquareFreeCertificate::CofactorIrreducible
                        }
                        _ => SquareFreeCertificate::Inconclusive,
                    },
                }
            } else {
                SquareFreeCertificate::Inconclusive
            }
        }
    };
    Ok(CharData {
        h: h.clone(),
        lambda_cyc,
        mu,
        squarefree,
        t_multiplicity,
        g,
        g0_val,
        x_tilde_trivial: lambda_cyc == 1,
    })
}

/// Does the Hilbert p-class field of k lie inside the composite of all
/// Z_p-extensions?
///
/// * A non-cyclic p-class group refutes it: the intersection with the
///   composite is a cyclic extension of k.
/// * For p = 3 with d not 3 mod 9, it holds iff 3 does not divide the class
///   number of Q(sqrt(3d)).
/// * For p >= 5 it holds when k and k(zeta_p) have the same p-class number
///   (a sufficient criterion: the unequal case stays Unknown).
pub fn hilbert_in_ztilde(rec: &FieldRecord) -> (Decision, String) {
    if rec.class_group_k.len() >= 2 {
        return (
            Decision::False,
            "p-class group is not cyclic, but the intersection with the composite is a cyclic extension".into(),
        );
    }
    let aux = rec.hilbert_aux.as_ref();
    if rec.p == 3 {
        if rec.d % 9 == 3 {
            return (
                Decision::Unknown,
                "criterion needs d not congruent to 3 mod 9".into(),
            );
        }
        match aux.and_then(|a| a.real_quad_class_number) {
            Some(h) if h % 3 != 0 => (
                Decision::True,
                format!("class number {h} of Q(sqrt(3d)) is not divisible by 3"),
            ),
            Some(h) => (
                Decision::False,
                format!("class number {h} of Q(sqrt(3d)) is divisible by 3"),
            ),
            None => (
                Decision::Unknown,
                "class number of Q(sqrt(3d)) not recorded".into(),
            ),
        }
    } else {
        match aux.and_then(|a| a.k_zetap_class_number) {
            Some(h) => {
                let mut ord = 0u32;
                let mut m = h;
                while m % rec.p == 0 {
                    m /= rec.p;
                    ord += 1;
                }
                if ord == rec.class_number_ord() {
                    (
                        Decision::True,
                        format!(
                            "k and k(zeta_p) share the p-class number p^{ord} (h = {h})"
                        ),
                    )
                } else {
                    (
                        Decision::Unknown,
                        format!(
                            "p-class numbers differ (p^{ord} vs p^{}); the criterion is one-sided",
                            rec.class_number_ord()
                        ),
                    )
                }
            }
            None => (
                Decision::Unknown,
                "class number of k(zeta_p) not recorded".into(),
            ),
        }
    }
}

/// Consistency report for the index inequalities tying
/// n0 = ord_p[Gal(ktilde/k) : D_p], s, and ord_p(g_0(0)).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexBoundsReport {
    pub consistent: bool,
    /// Upper bound on n0 from the coinvariant order, when visible.
    pub n0_upper: Option<u32>,
    /// Upper bound on n0 in the normal case: min(s, ord g0(0)).
    pub n0_upper_if_normal: u32,
    /// Lower bound on n0 in the non-normal case: s + 1.
    pub n0_lower_if_nonnormal: u32,
    /// All indices collapse to 1.
    pub degenerate: bool,
    pub notes: Vec<String>,
}

/// Validate the index bounds: in the normal case
/// n0 <= min(s, ord g0(0)); otherwise s < n0 <= ord g0(0).  Reports only;
/// contradictions in ingested data are flagged, never thrown.
pub fn index_bounds_validate(
    n0_exp: Option<u32>,
    s_exp: u32,
    g0_val: Valuation,
    normal: Option<bool>,
) -> IndexBoundsReport {
    let mut notes = Vec::new();
    let mut consistent = true;
    let g0_known = g0_val.known();
    let n0_upper = g0_known;
    let n0_upper_if_normal = g0_known.map_or(s_exp, |g| g.min(s_exp));
    let n0_lower_if_nonnormal = s_exp + 1;
    let degenerate = s_exp == 0 && g0_known == Some(0);
    if degenerate {
        notes.push("degenerate: all indices are 1".into());
    }
    if let Some(g) = g0_known {
        notes.push(format!("n0 <= {g} in every case"));
        notes.push(format!(
            "if the decomposition group is normal then n0 <= {}",
            g.min(s_exp)
        ));
    } else {
        notes.push(format!(
            "ord g0(0) is only bounded below ({g0_val}); the coinvariant bound is not binding"
        ));
    }
    if let Some(n0) = n0_exp {
        if let Some(g) = g0_known {
            if n0 > g {
                consistent = false;
                notes.push(format!("contradiction: n0 = {n0} exceeds ord g0(0) = {g}"));
            }
        }
        match normal {
            Some(true) => {
                if n0 > s_exp {
                    consistent = false;
                    notes.push(format!(
                        "contradiction: normal decomposition group forces n0 <= s, but n0 = {n0} > s = {s_exp}"
                    ));
                }
            }
            Some(false) => {
                if n0 <= s_exp {
                    consistent = false;
                    notes.push(format!(
                        "contradiction: non-normal decomposition group forces n0 > s, but n0 = {n0} <= s = {s_exp}"
                    ));
                }
            }
            None => {
                if n0 > s_exp {
                    notes.push(format!(
                        "n0 = {n0} > s = {s_exp} forces a non-normal decomposition group"
                    ));
                }
            }
        }
    }
    if normal == Some(false) {
        if let Some(g) = g0_known {
            if s_exp >= g {
                consistent = false;
                notes.push(format!(
                    "contradiction: the non-normal window s < n0 <= ord g0(0) is empty (s = {s_exp}, ord = {g})"
                ));
            }
        }
    }
    IndexBoundsReport {
        consistent,
        n0_upper,
        n0_upper_if_normal,
        n0_lower_if_nonnormal,
        degenerate,
        notes,
    }
}

/// Is k p-split p-rational?  True needs the full verified conjunction
/// (normal decomposition group whose index matches ord g0(0), and
/// lambda >= 2); False on any refuted conjunct, in particular whenever
/// ord g0(0) > s; Unknown otherwise.
pub fn p_split_p_rational(rec: &FieldRecord) -> Result<(Decision, String)> {
    let (hilbert, _) = hilbert_in_ztilde(rec);
    if hilbert == Decision::False {
        return Ok((
            Decision::False,
            "the Hilbert p-class field is not contained in the composite".into(),
        ));
    }
    let char_data = match &rec.char_t {
        Some(c) => Some(char_analysis(&c.to_series(rec.p)?)?),
        None => None,
    };
    if let Some(cd) = &char_data {
        if cd.lambda_cyc < 2 {
            return Ok((
                Decision::False,
                format!("lambda_cyc = {} < 2", cd.lambda_cyc),
            ));
        }
        if let Some(g) = cd.g0_val.known() {
            if g > rec.s_exp {
                return Ok((
                    Decision::False,
                    format!(
                        "ord g0(0) = {g} > s = {} forces a non-normal decomposition group (exponent reading)",
                        rec.s_exp
                    ),
                ));
            }
        }
    }
    if rec.normality == Some(false) {
        return Ok((
            Decision::False,
            "the decomposition group is recorded as non-normal".into(),
        ));
    }
    if rec.normality == Some(true) {
        if let (Some(n0), Some(cd)) = (rec.n0_exp, &char_data) {
            if let Some(g) = cd.g0_val.known() {
                if n0 != g {
                    return Ok((
                        Decision::False,
                        format!("index exponent n0 = {n0} differs from ord g0(0) = {g}"),
                    ));
                }
                if cd.lambda_cyc >= 2 && hilbert != Decision::False {
                    return Ok((
                        Decision::True,
                        format!(
                            "normal decomposition group, n0 = ord g0(0) = {g}, lambda_cyc = {}",
                            cd.lambda_cyc
                        ),
                    ));
                }
            }
        }
    }
    Ok((Decision::Unknown, "conjunction not decidable on this record".into()))
}

/// Outcome of one sufficient criterion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CriterionOutcome {
    Holds { because: String },
    Blocked { failed: String },
}

impl CriterionOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, CriterionOutcome::Holds { .. })
    }
}

/// The constant-term criterion for the weak form: the Hilbert field lies in
/// the composite, lambda_cyc >= 2, h is square-free, and
/// ord_p(g0(0)) > s, compared as exponents.
pub fn weak_ggc_constant_term(rec: &FieldRecord) -> Result<CriterionOutcome> {
    let char_t = rec
        .char_t
        .as_ref()
        .ok_or_else(|| Error::DataMissing("char_T".into()))?;
    let cd = char_analysis(&char_t.to_series(rec.p)?)?;
    let (hilbert, why) = hilbert_in_ztilde(rec);
    if hilbert != Decision::True {
        return Ok(CriterionOutcome::Blocked {
            failed: format!("Hilbert field containment is {hilbert} ({why})"),
        });
    }
    if cd.lambda_cyc < 2 {
        return Ok(CriterionOutcome::Blocked {
            failed: format!("lambda_cyc = {} < 2", cd.lambda_cyc),
        });
    }
    if !cd.squarefree.is_squarefree() {
        return Ok(CriterionOutcome::Blocked {
            failed: format!("{}", cd.squarefree),
        });
    }
    match cd.g0_val.known() {
        Some(g) if g > rec.s_exp => Ok(CriterionOutcome::Holds {
            because: format!(
                "ord g0(0) = {g} > s = {} (exponent reading), with a square-free generator",
                rec.s_exp
            ),
        }),
        Some(g) => Ok(CriterionOutcome::Blocked {
            failed: format!("ord g0(0) = {g} is not greater than s = {}", rec.s_exp),
        }),
        None => Ok(CriterionOutcome::Blocked {
            failed: format!("ord g0(0) not visible at this precision ({})", cd.g0_val),
        }),
    }
}

/// Primality certificate for the coinvariant characteristic ideal (g),
/// which upgrades an established weak form to the full conjecture.
///
/// Automatic when lambda_cyc = 2 (the cofactor is distinguished of degree
/// one); otherwise a single-segment Newton polygon with denominator equal
/// to deg(g) certifies irreducibility.  Returns the certificate text, or
/// None when no certificate is available (the upgrade is then refused).
pub fn ggc_upgrade_certificate(cd: &CharData) -> Option<String> {
    if cd.t_multiplicity != 1 {
        return None;
    }
    if cd.lambda_cyc == 2 {
        return Some("the cofactor is distinguished of degree 1, hence prime".into());
    }
    match cd.g.irreducible_by_newton() {
        Ok(Irreducibility::Irreducible) => {
            let np = cd.g.newton_polygon().expect("polygon exists");
            let (slope, _) = np.segments[0];
            Some(format!(
                "single Newton segment of slope {slope} with denominator {} = deg(g)",
                cd.g.degree().unwrap_or(0)
            ))
        }
        _ => None,
    }
}

/// Outcome of the stabilization criterion on a class-number window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stabilization {
    /// #A_n = #A_{n+1} at some n >= c: both invariants vanish.
    LambdaMuZero { at: u32 },
    Unknown,
}

/// Fukuda-style stabilization: ord_p(#A_n) for n = start, start+1, ... with
/// total ramification above level c.  Equal consecutive entries at some
/// n >= c prove lambda = mu = 0.
pub fn fukuda_check(ords: &[u32], start: u32, c: u32) -> Result<Stabilization> {
    if ords.len() < 2 {
        return Err(Error::DataMissing(
            "class-number window too short to compare consecutive layers".into(),
        ));
    }
    let last_pair = start + (ords.len() as u32 - 2);
    if last_pair < c {
        return Err(Error::DataMissing(format!(
            "class-number window ends at n = {last_pair} before the stability index c = {c}"
        )));
    }
    for i in 0..ords.len() - 1 {
        let n = start + i as u32;
        if n >= c && ords[i] == ords[i + 1] {
            return Ok(Stabilization::LambdaMuZero { at: n });
        }
    }
    Ok(Stabilization::Unknown)
}

/// Outcome of the capitulation criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capitulation {
    /// Every recorded generator class becomes principal at some layer.
    LambdaZero,
    Unknown,
}

/// Capitulation criterion: the lambda invariant of the relevant tower
/// vanishes iff every ideal class capitulates; the record supplies
/// per-generator principality flags.
pub fn capitulation_check(rec: &FieldRecord) -> Result<Capitulation> {
    let generators = rec.class_group_k.len();
    if generators == 0 {
        return Ok(Capitulation::LambdaZero);
    }
    let entries = rec
        .capitulation
        .as_ref()
        .ok_or_else(|| Error::DataMissing("capitulation".into()))?;
    let mut seen: Vec<&str> = Vec::new();
    let mut principal: Vec<&str> = Vec::new();
    for e in entries {
        if !seen.contains(&e.generator.as_str()) {
            seen.push(&e.generator);
        }
        if e.principal && !principal.contains(&e.generator.as_str()) {
            principal.push(&e.generator);
        }
    }
    if principal.len() >= generators && principal.len() == seen.len() {
        Ok(Capitulation::LambdaZero)
    } else {
        Ok(Capitulation::Unknown)
    }
}

/// Verdict strength, ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VerdictLevel {
    Inconclusive,
    WeakGgcHolds,
    GgcHolds,
}

impl fmt::Display for VerdictLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictLevel::Inconclusive => write!(f, "inconclusive"),
            VerdictLevel::WeakGgcHolds => write!(f, "weak GGC holds"),
            VerdictLevel::GgcHolds => write!(f, "GGC holds"),
        }
    }
}

/// One step of the reason trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLine {
    /// Stable criterion id, e.g. `weak-ggc/constant-term`.
    pub id: String,
    /// The inputs the criterion consumed, as printable key/value pairs.
    pub inputs: BTreeMap<String, String>,
    pub outcome: String,
    /// The mathematical rule the step applied.
    pub rule: String,
}

/// The structured outcome of the pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub level: VerdictLevel,
    pub trace: Vec<TraceLine>,
}

impl Verdict {
    /// The first blocked precondition, when inconclusive.
    pub fn first_block(&self) -> Option<&TraceLine> {
        self.trace
            .iter()
            .find(|l| l.outcome.starts_with("blocked") || l.outcome.starts_with("skipped"))
    }
}

struct TraceBuilder {
    lines: Vec<TraceLine>,
}

impl TraceBuilder {
    fn new() -> Self {
        TraceBuilder { lines: Vec::new() }
    }

    fn push(&mut self, id: &str, inputs: &[(&str, String)], outcome: String, rule: &str) {
        self.lines.push(TraceLine {
            id: id.into(),
            inputs: inputs
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
            outcome,
            rule: rule.into(),
        });
    }
}

const RULE_CHAR: &str = "h(T) = T^a g(T) mod p^N determines lambda, mu, a square-freeness \
                         certificate and ord_p(g(0))";
const RULE_HILBERT: &str = "for p = 3, d not 3 mod 9: containment iff 3 does not divide \
                            h(Q(sqrt(3d))); for p >= 5 equal p-class numbers of k and \
                            k(zeta_p) suffice; a non-cyclic p-class group refutes it";
const RULE_RATIONAL: &str = "p-split p-rationality needs a normal decomposition group with \
                             index p^{ord g0(0)} and lambda_cyc >= 2; ord g0(0) > s refutes \
                             normality (exponent reading)";
const RULE_INDEX: &str = "normal case: n0 <= min(s, ord g0(0)); non-normal case: \
                          s < n0 <= ord g0(0)";
const RULE_CONSTANT_TERM: &str = "Hilbert containment + lambda_cyc >= 2 + square-free \
                                  generator + ord g0(0) > s (exponents) imply the weak form";
const RULE_LAMBDA_VANISHING: &str = "not p-split p-rational + lambda of the p*-unramified \
                                     tower zero + square-free generator imply the weak form";
const RULE_SPLIT_RATIONAL: &str = "p-split p-rational + vanishing lambda for the auxiliary \
                                   tower over H imply the weak form";
const RULE_CAPITULATION: &str = "lambda of the tower vanishes iff every ideal class \
                                 capitulates in it";
const RULE_STABILIZATION: &str = "equal consecutive p-class numbers at a totally ramified \
                                  level force lambda = mu = 0";
const RULE_UPGRADE: &str = "the weak form upgrades to the full form when the coinvariant \
                            characteristic ideal (g) is prime";
const RULE_ANTICYC: &str = "with n0 known, the anticyclotomic characteristic ideal is \
                            expected to be ((1+S)^{p^n0} - 1); recorded as a consistency \
                            note only";

/// Run the full decision pipeline on a record and emit the strongest
/// justified verdict with its trace.
pub fn verdict_pipeline(rec: &FieldRecord) -> Verdict {
    let mut tb = TraceBuilder::new();

    // 1. characteristic polynomial analysis
    let char_data: Option<CharData> = match &rec.char_t {
        None => {
            tb.push(
                "char/analysis",
                &[],
                "skipped: char_T missing".into(),
                RULE_CHAR,
            );
            None
        }
        Some(c) => match c.to_series(rec.p).and_then(|h| char_analysis(&h)) {
            Ok(cd) => {
                tb.push(
                    "char/analysis",
                    &[
                        ("h", cd.h.to_string()),
                        ("prec", c.prec_exp.to_string()),
                    ],
                    format!(
                        "lambda_cyc={} mu={} g0_val={} {}",
                        cd.lambda_cyc, cd.mu, cd.g0_val, cd.squarefree
                    ),
                    RULE_CHAR,
                );
                if cd.x_tilde_trivial {
                    tb.push(
                        "char/triviality-note",
                        &[("lambda_cyc", cd.lambda_cyc.to_string())],
                        "lambda_cyc = 1: the two-variable module is trivial and no criterion below applies".into(),
                        "the module vanishes iff lambda_cyc = 1",
                    );
                }
                Some(cd)
            }
            Err(e) => {
                tb.push(
                    "char/analysis",
                    &[],
                    format!("blocked: {e}"),
                    RULE_CHAR,
                );
                None
            }
        },
    };

    // 2. Hilbert field containment
    let (hilbert, hilbert_why) = hilbert_in_ztilde(rec);
    let aux_text = match &rec.hilbert_aux {
        None => "(absent)".to_string(),
        Some(a) => match (a.real_quad_class_number, a.k_zetap_class_number) {
            (Some(h), _) => format!("h(Q(sqrt(3d))) = {h}"),
            (_, Some(h)) => format!("h(k(zeta_p)) = {h}"),
            _ => "(absent)".to_string(),
        },
    };
    tb.push(
        "hilbert/in-ztilde",
        &[
            ("class_group_k", format!("{:?}", rec.class_group_k)),
            ("hilbert_aux", aux_text),
        ],
        format!("{hilbert}: {hilbert_why}"),
        RULE_HILBERT,
    );

    // 3. p-split p-rationality
    let rational = match p_split_p_rational(rec) {
        Ok((d, why)) => {
            tb.push(
                "rational/p-split-test",
                &[("s_exp", rec.s_exp.to_string())],
                format!("{d}: {why}"),
                RULE_RATIONAL,
            );
            d
        }
        Err(e) => {
            tb.push(
                "rational/p-split-test",
                &[],
                format!("blocked: {e}"),
                RULE_RATIONAL,
            );
            Decision::Unknown
        }
    };

    // 4. index bounds (reporting only)
    if let Some(cd) = &char_data {
        if cd.lambda_cyc >= 2 {
            let report =
                index_bounds_validate(rec.n0_exp, rec.s_exp, cd.g0_val, rec.normality);
            let opt = |v: Option<String>| v.unwrap_or_else(|| "(absent)".into());
            tb.push(
                "index/bounds",
                &[
                    ("s_exp", rec.s_exp.to_string()),
                    ("g0_val", cd.g0_val.to_string()),
                    ("n0_exp", opt(rec.n0_exp.map(|n| n.to_string()))),
                    ("normality", opt(rec.normality.map(|n| n.to_string()))),
                ],
                format!(
                    "{}; {}",
                    if report.consistent {
                        "consistent"
                    } else {
                        "contradictory"
                    },
                    report.notes.join("; ")
                ),
                RULE_INDEX,
            );
        }
    }
    if let Some(n0) = rec.n0_exp {
        tb.push(
            "anticyclotomic/char-note",
            &[("n0_exp", n0.to_string())],
            format!(
                "expected anticyclotomic characteristic ideal: ((1+S)^{{{}^{n0}}} - 1)",
                rec.p
            ),
            RULE_ANTICYC,
        );
    }

    // 5. weak-form criteria
    let mut weak: Option<&'static str> = None;

    // 5a. constant-term criterion
    match weak_ggc_constant_term(rec) {
        Ok(CriterionOutcome::Holds { because }) => {
            tb.push(
                "weak-ggc/constant-term",
                &[("s_exp", rec.s_exp.to_string())],
                format!("holds: {because}"),
                RULE_CONSTANT_TERM,
            );
            weak = Some("weak-ggc/constant-term");
        }
        Ok(CriterionOutcome::Blocked { failed }) => {
            tb.push(
                "weak-ggc/constant-term",
                &[("s_exp", rec.s_exp.to_string())],
                format!("blocked: {failed}"),
                RULE_CONSTANT_TERM,
            );
        }
        Err(e) => {
            tb.push(
                "weak-ggc/constant-term",
                &[],
                format!("blocked: {e}"),
                RULE_CONSTANT_TERM,
            );
        }
    }

    // 5b. vanishing-lambda criterion, via capitulation or stabilization
    if weak.is_none() {
        let mut lambda_n_zero: Option<String> = None;
        match capitulation_check(rec) {
            Ok(Capitulation::LambdaZero) => {
                let outcome = if rec.class_group_k.is_empty() {
                    "lambda = 0: trivial class group".to_string()
                } else {
                    "lambda = 0: every recorded generator capitulates".to_string()
                };
                tb.push("lambda-n/capitulation", &[], outcome.clone(), RULE_CAPITULATION);
                lambda_n_zero = Some("capitulation".into());
            }
            Ok(Capitulation::Unknown) => {
                tb.push(
                    "lambda-n/capitulation",
                    &[],
                    "blocked: some generator is never flagged principal".into(),
                    RULE_CAPITULATION,
                );
            }
            Err(e) => {
                tb.push(
                    "lambda-n/capitulation",
                    &[],
                    format!("skipped: {e}"),
                    RULE_CAPITULATION,
                );
            }
        }
        if lambda_n_zero.is_none() {
            if let Some(layer) = rec.layer_sequence(Tower::N) {
                match fukuda_check(&layer.ords, layer.c, layer.c) {
                    Ok(Stabilization::LambdaMuZero { at }) => {
                        tb.push(
                            "lambda-n/stabilization",
                            &[
                                ("ords", format!("{:?}", layer.ords)),
                                ("c", layer.c.to_string()),
                            ],
                            format!("lambda = mu = 0: stabilized at n = {at}"),
                            RULE_STABILIZATION,
                        );
                        lambda_n_zero = Some("stabilization".into());
                    }
                    Ok(Stabilization::Unknown) => {
                        tb.push(
                            "lambda-n/stabilization",
                            &[("ords", format!("{:?}", layer.ords))],
                            "blocked: no equal consecutive entries at eligible levels".into(),
                            RULE_STABILIZATION,
                        );
                    }
                    Err(e) => {
                        tb.push(
                            "lambda-n/stabilization",
                            &[],
                            format!("skipped: {e}"),
                            RULE_STABILIZATION,
                        );
                    }
                }
            } else {
                tb.push(
                    "lambda-n/stabilization",
                    &[],
                    "skipped: no class-number window for the p*-unramified tower".into(),
                    RULE_STABILIZATION,
                );
            }
        }
        let squarefree_ok = char_data
            .as_ref()
            .map(|cd| cd.squarefree.is_squarefree())
            .unwrap_or(false);
        let lambda_ge2 = char_data.as_ref().map(|cd| cd.lambda_cyc >= 2).unwrap_or(false);
        match (&lambda_n_zero, rational, squarefree_ok, lambda_ge2) {
            (Some(route), Decision::False, true, true) => {
                tb.push(
                    "weak-ggc/lambda-vanishing",
                    &[("route", route.clone())],
                    "holds: not p-split p-rational, lambda of the tower vanishes, generator square-free".into(),
                    RULE_LAMBDA_VANISHING,
                );
                weak = Some("weak-ggc/lambda-vanishing");
            }
            _ => {
                let failed = if lambda_n_zero.is_none() {
                    "lambda of the p*-unramified tower not established".to_string()
                } else if rational != Decision::False {
                    format!("p-split p-rationality is {rational}, not refuted")
                } else if !squarefree_ok {
                    "no square-freeness certificate".to_string()
                } else {
                    "lambda_cyc >= 2 not established".to_string()
                };
                tb.push(
                    "weak-ggc/lambda-vanishing",
                    &[],
                    format!("blocked: {failed}"),
                    RULE_LAMBDA_VANISHING,
                );
            }
        }
    }

    // 5c. the p-split p-rational branch
    if weak.is_none() && rational == Decision::True {
        let mut h_lambda_zero = rec.h_infinity_lambda_zero == Some(true);
        let mut route = "recorded flag".to_string();
        if !h_lambda_zero {
            if let Some(layer) = rec.layer_sequence(Tower::H) {
                if let Ok(Stabilization::LambdaMuZero { at }) =
                    fukuda_check(&layer.ords, layer.c, layer.c)
                {
                    h_lambda_zero = true;
                    route = format!("stabilization at n = {at}");
                }
            }
        }
        if h_lambda_zero {
            tb.push(
                "weak-ggc/split-rational",
                &[("route", route)],
                "holds: p-split p-rational with vanishing auxiliary lambda".into(),
                RULE_SPLIT_RATIONAL,
            );
            weak = Some("weak-ggc/split-rational");
        } else {
            tb.push(
                "weak-ggc/split-rational",
                &[],
                "blocked: lambda for the tower over H not established".into(),
                RULE_SPLIT_RATIONAL,
            );
        }
    }

    // 6. upgrade to the full form via primality of the coinvariant ideal
    let mut level = match weak {
        Some(_) => VerdictLevel::WeakGgcHolds,
        None => VerdictLevel::Inconclusive,
    };
    if weak.is_some() {
        if let Some(cd) = &char_data {
            match ggc_upgrade_certificate(cd) {
                Some(cert) => {
                    tb.push(
                        "ggc/prime-upgrade",
                        &[("g", cd.g.to_string())],
                        format!("upgraded: {cert}"),
                        RULE_UPGRADE,
                    );
                    level = VerdictLevel::GgcHolds;
                }
                None => {
                    tb.push(
                        "ggc/prime-upgrade",
                        &[("g", cd.g.to_string())],
                        "blocked: no irreducibility certificate for the cofactor".into(),
                        RULE_UPGRADE,
                    );
                }
            }
        }
    }

    let outcome = match level {
        VerdictLevel::GgcHolds => "GGC holds".to_string(),
        VerdictLevel::WeakGgcHolds => "weak GGC holds".to_string(),
        VerdictLevel::Inconclusive => {
            let first = tb
                .lines
                .iter()
                .find(|l| l.outcome.starts_with("blocked") || l.outcome.starts_with("skipped"))
                .map(|l| format!("{}: {}", l.id, l.outcome))
                .unwrap_or_else(|| "no criterion applicable".into());
            format!("inconclusive; first block: {first}")
        }
    };
    tb.push("verdict", &[], outcome, "strongest justified level");
    Verdict {
        level,
        trace: tb.lines,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::{bundled_record, CharPolyData, HilbertAux, Provenance};
    use rand::Rng;
    use rand::SeedableRng;

    fn base_record(p: u64, d: u64, class_group: &[u32], s_exp: u32) -> FieldRecord {
        let mut provenance = BTreeMap::new();
        provenance.insert("class_group_k".to_string(), Provenance::Manual);
        provenance.insert("s_exp".to_string(), Provenance::Manual);
        let rec = FieldRecord {
            p,
            d,
            class_group_k: class_group.to_vec(),
            s_exp,
            hilbert_aux: None,
            char_t: None,
            layers: None,
            capitulation: None,
            n0_exp: None,
            normality: None,
            h_infinity_lambda_zero: None,
            defining_polynomials: None,
            provenance,
        };
        rec.validate().expect("test record must be valid");
        rec
    }

    fn with_char(mut rec: FieldRecord, prec_exp: u32, coeffs: &[i64]) -> FieldRecord {
        rec.char_t = Some(CharPolyData {
            prec_exp,
            coeffs: coeffs.to_vec(),
        });
        rec.provenance
            .insert("char_T".into(), Provenance::Manual);
        rec
    }

    #[test]
    fn char_analysis_on_example_polynomials() {
        let h = PowerSeries::polynomial(3, 11, 4, &[0, 64638, 1]).unwrap();
        let cd = char_analysis(&h).unwrap();
        assert_eq!(cd.lambda_cyc, 2);
        assert_eq!(cd.mu, Valuation::Known(0));
        assert_eq!(cd.g0_val, Valuation::Known(5));
        assert_eq!(
            cd.squarefree,
            SquareFreeCertificate::Discriminant { disc_val: 10, prec: 11 }
        );

        let h = PowerSeries::polynomial(3, 7, 6, &[0, 522, 72, 405, 1]).unwrap();
        let cd = char_analysis(&h).unwrap();
        assert_eq!(cd.lambda_cyc, 4);
        assert_eq!(cd.g0_val, Valuation::Known(2));
        assert!(cd.squarefree.is_squarefree());
        // disc(h) vanishes mod 3^7; the certificate comes from the cofactor
        assert_eq!(
            cd.squarefree,
            SquareFreeCertificate::CofactorDiscriminant { disc_val: 6, prec: 7 }
        );

        let h = PowerSeries::polynomial(5, 5, 4, &[0, 3100, 1]).unwrap();
        let cd = char_analysis(&h).unwrap();
        assert_eq!(cd.lambda_cyc, 2);
        assert_eq!(cd.g0_val, Valuation::Known(2));
        assert!(cd.squarefree.is_squarefree());
    }

    #[test]
    fn char_analysis_rejects_nonzero_constant() {
        let h = PowerSeries::polynomial(3, 6, 4, &[1, 0, 1]).unwrap();
        assert!(matches!(char_analysis(&h), Err(Error::InvalidChar(_))));
    }

    #[test]
    fn hilbert_criteria() {
        let rec = base_record(3, 971, &[1], 1);
        let rec = FieldRecord {
            hilbert_aux: Some(HilbertAux {
                real_quad_class_number: Some(7),
                k_zetap_class_number: None,
            }),
            provenance: {
                let mut p = rec.provenance.clone();
                p.insert("hilbert_aux".into(), Provenance::Manual);
                p
            },
            ..rec
        };
        assert_eq!(hilbert_in_ztilde(&rec).0, Decision::True);

        let mut div = rec.clone();
        div.hilbert_aux = Some(HilbertAux {
            real_quad_class_number: Some(9),
            k_zetap_class_number: None,
        });
        assert_eq!(hilbert_in_ztilde(&div).0, Decision::False);

        let mut noncyclic = rec.clone();
        noncyclic.class_group_k = vec![1, 1];
        assert_eq!(hilbert_in_ztilde(&noncyclic).0, Decision::False);

        let mut p5 = base_record(5, 2239, &[1], 1);
        p5.hilbert_aux = Some(HilbertAux {
            real_quad_class_number: None,
            k_zetap_class_number: Some(560),
        });
        p5.provenance.insert("hilbert_aux".into(), Provenance::Manual);
        assert_eq!(hilbert_in_ztilde(&p5).0, Decision::True);

        let missing = base_record(3, 971, &[1], 1);
        assert_eq!(hilbert_in_ztilde(&missing).0, Decision::Unknown);
    }

    #[test]
    fn index_bounds_examples() {
        let r = index_bounds_validate(None, 1, Valuation::Known(5), None);
        assert!(r.consistent);
        assert_eq!(r.n0_upper, Some(5));
        assert_eq!(r.n0_upper_if_normal, 1);
        assert!(!r.degenerate);

        let r = index_bounds_validate(None, 1, Valuation::Known(2), Some(false));
        assert!(r.consistent);
        assert_eq!(r.n0_lower_if_nonnormal, 2);
        assert_eq!(r.n0_upper, Some(2));

        let r = index_bounds_validate(None, 0, Valuation::Known(0), None);
        assert!(r.degenerate);

        let r = index_bounds_validate(Some(3), 1, Valuation::Known(2), None);
        assert!(!r.consistent, "n0 beyond the coinvariant bound");
    }

    #[test]
    fn p_split_p_rational_decisions() {
        // g0_val > s refutes
        let rec = with_char(base_record(3, 971, &[1], 1), 11, &[0, 64638, 1]);
        assert_eq!(p_split_p_rational(&rec).unwrap().0, Decision::False);

        // non-cyclic class group refutes via the Hilbert test
        let rec = base_record(3, 5069, &[1, 1], 1);
        assert_eq!(p_split_p_rational(&rec).unwrap().0, Decision::False);

        // verified conjunction
        let mut rec = with_char(base_record(3, 2, &[1], 1), 6, &[0, 12, 1]);
        rec.normality = Some(true);
        rec.n0_exp = Some(1);
        rec.hilbert_aux = Some(HilbertAux {
            real_quad_class_number: Some(1),
            k_zetap_class_number: None,
        });
        assert_eq!(p_split_p_rational(&rec).unwrap().0, Decision::True);

        // nothing decidable
        let rec = base_record(3, 2, &[1], 1);
        assert_eq!(p_split_p_rational(&rec).unwrap().0, Decision::Unknown);
    }

    #[test]
    fn p_split_refuted_by_divisible_aux_class_number() {
        // the first condition of p-split p-rationality fails outright when
        // the auxiliary class number is divisible by 3
        let mut rec = base_record(3, 2, &[1], 1);
        rec.hilbert_aux = Some(HilbertAux {
            real_quad_class_number: Some(12),
            k_zetap_class_number: None,
        });
        assert_eq!(hilbert_in_ztilde(&rec).0, Decision::False);
        assert_eq!(p_split_p_rational(&rec).unwrap().0, Decision::False);
    }

    #[test]
    fn p_split_false_whenever_g0_exceeds_s() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let s_exp = rng.gen_range(0..3u32);
            let g0 = rng.gen_range(s_exp + 1..6);
            // h = T^2 + (unit * p^g0) T: g0_val = g0, lambda = 2
            let coeff = 3i64.pow(g0) * [1, 2][rng.gen_range(0..2usize)];
            let rec = with_char(base_record(3, 2, &[1], s_exp), 8, &[0, coeff, 1]);
            assert_eq!(
                p_split_p_rational(&rec).unwrap().0,
                Decision::False,
                "g0={g0} s={s_exp}"
            );
        }
    }

    #[test]
    fn constant_term_criterion_on_bundled_data() {
        for (p, d) in [(3, 971), (3, 17291), (5, 2239)] {
            let rec = bundled_record(p, d).unwrap();
            match weak_ggc_constant_term(&rec).unwrap() {
                CriterionOutcome::Holds { .. } => {}
                CriterionOutcome::Blocked { failed } => {
                    panic!("criterion should hold for ({p},{d}): {failed}")
                }
            }
        }
        // 5069 is blocked: the Hilbert field is not in the composite
        let rec = bundled_record(3, 5069).unwrap();
        assert!(!weak_ggc_constant_term(&rec).unwrap().holds());
    }

    #[test]
    fn fukuda_examples() {
        assert_eq!(
            fukuda_check(&[3, 3], 1, 1).unwrap(),
            Stabilization::LambdaMuZero { at: 1 }
        );
        assert_eq!(
            fukuda_check(&[0, 0], 0, 0).unwrap(),
            Stabilization::LambdaMuZero { at: 0 }
        );
        assert_eq!(fukuda_check(&[1, 2, 3], 0, 0).unwrap(), Stabilization::Unknown);
        // window below the stability index
        assert!(matches!(
            fukuda_check(&[2, 2], 0, 5),
            Err(Error::DataMissing(_))
        ));
        assert!(matches!(fukuda_check(&[3], 1, 1), Err(Error::DataMissing(_))));
        // equal pair below c does not count
        assert_eq!(fukuda_check(&[2, 2, 3, 4], 0, 1).unwrap(), Stabilization::Unknown);
    }

    #[test]
    fn capitulation_examples() {
        let rec = bundled_record(3, 5069).unwrap();
        assert_eq!(capitulation_check(&rec).unwrap(), Capitulation::LambdaZero);

        // trivial class group: vacuous
        let trivial = base_record(3, 2, &[], 0);
        assert_eq!(capitulation_check(&trivial).unwrap(), Capitulation::LambdaZero);

        // one generator never flagged
        let mut partial = bundled_record(3, 5069).unwrap();
        partial.capitulation = Some(vec![crate::record::CapitulationEntry {
            generator: "5".into(),
            layer: 2,
            principal: true,
        }]);
        assert_eq!(capitulation_check(&partial).unwrap(), Capitulation::Unknown);

        // missing data is an error, not an outcome
        let mut missing = bundled_record(3, 5069).unwrap();
        missing.capitulation = None;
        assert!(matches!(
            capitulation_check(&missing),
            Err(Error::DataMissing(_))
        ));
    }

    #[test]
    fn pipeline_bundled_records_reach_ggc() {
        for (p, d) in [(3u64, 971u64), (3, 17291), (5, 2239), (3, 5069)] {
            let rec = bundled_record(p, d).unwrap();
            let verdict = verdict_pipeline(&rec);
            assert_eq!(verdict.level, VerdictLevel::GgcHolds, "({p},{d})");
        }
    }

    #[test]
    fn pipeline_is_deterministic_and_trace_replays() {
        for rec in crate::record::bundled_records() {
            let a = verdict_pipeline(&rec);
            let b = verdict_pipeline(&rec);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn pipeline_empty_record_is_inconclusive_with_block() {
        let rec = base_record(3, 2, &[1], 1);
        let verdict = verdict_pipeline(&rec);
        assert_eq!(verdict.level, VerdictLevel::Inconclusive);
        assert!(verdict.first_block().is_some());
        let last = verdict.trace.last().unwrap();
        assert!(last.outcome.contains("inconclusive"));
    }

    #[test]
    fn ggc_upgrade_requires_certificate() {
        // lambda_cyc = 3 with an inconclusive polygon: only the weak form
        // h = T(T^2 + 9T + 9): cofactor polygon has slope -1, denominator 1
        let mut rec = with_char(base_record(3, 2, &[1], 0), 8, &[0, 9, 9, 1]);
        rec.hilbert_aux = Some(HilbertAux {
            real_quad_class_number: Some(1),
            k_zetap_class_number: None,
        });
        rec.provenance.insert("hilbert_aux".into(), Provenance::Manual);
        let verdict = verdict_pipeline(&rec);
        assert_eq!(verdict.level, VerdictLevel::WeakGgcHolds);
        assert!(verdict
            .trace
            .iter()
            .any(|l| l.id == "ggc/prime-upgrade" && l.outcome.starts_with("blocked")));
    }

    #[test]
    fn ggc_verdicts_carry_weak_path_and_certificate() {
        for rec in crate::record::bundled_records() {
            let verdict = verdict_pipeline(&rec);
            assert_eq!(verdict.level, VerdictLevel::GgcHolds);
            assert!(verdict
                .trace
                .iter()
                .any(|l| l.id.starts_with("weak-ggc/") && l.outcome.starts_with("holds")));
            assert!(verdict
                .trace
                .iter()
                .any(|l| l.id == "ggc/prime-upgrade" && l.outcome.starts_with("upgraded")));
        }
    }

    #[test]
    fn split_rational_branch() {
        // p-split p-rational with the auxiliary lambda flag: weak form holds
        let mut rec = with_char(base_record(3, 2, &[1], 1), 6, &[0, 12, 1]);
        rec.normality = Some(true);
        rec.n0_exp = Some(1);
        rec.hilbert_aux = Some(HilbertAux {
            real_quad_class_number: Some(1),
            k_zetap_class_number: None,
        });
        rec.h_infinity_lambda_zero = Some(true);
        rec.provenance.insert("hilbert_aux".into(), Provenance::Manual);
        rec.provenance.insert("normality".into(), Provenance::Manual);
        rec.provenance.insert("n0_exp".into(), Provenance::Manual);
        rec.provenance
            .insert("h_infinity_lambda_zero".into(), Provenance::Manual);
        let verdict = verdict_pipeline(&rec);
        assert!(verdict.level >= VerdictLevel::WeakGgcHolds);
        assert!(verdict
            .trace
            .iter()
            .any(|l| l.id == "weak-ggc/split-rational" && l.outcome.starts_with("holds")));
    }

    #[test]
    fn p_split_refuted_on_all_bundled_records() {
        for (p, d) in [(3u64, 971u64), (3, 17291), (5, 2239), (3, 5069)] {
            let rec = bundled_record(p, d).unwrap();
            assert_eq!(p_split_p_rational(&rec).unwrap().0, Decision::False, "({p},{d})");
        }
    }

    #[test]
    fn hilbert_unequal_class_numbers_stay_unknown_for_large_p() {
        // the criterion is one-sided for p >= 5
        let mut rec = base_record(5, 2239, &[1], 1);
        rec.hilbert_aux = Some(HilbertAux {
            real_quad_class_number: None,
            k_zetap_class_number: Some(11),
        });
        assert_eq!(hilbert_in_ztilde(&rec).0, Decision::Unknown);
    }

    #[test]
    fn supporting_trace_lines_recompute() {
        // every criterion the verdict relies on reproduces its outcome when
        // re-evaluated directly on the record
        for rec in crate::record::bundled_records() {
            let verdict = verdict_pipeline(&rec);
            for line in &verdict.trace {
                if line.id == "weak-ggc/constant-term" && line.outcome.starts_with("holds") {
                    assert!(weak_ggc_constant_term(&rec).unwrap().holds());
                }
                if line.id == "lambda-n/capitulation" && line.outcome.starts_with("lambda = 0") {
                    assert_eq!(capitulation_check(&rec).unwrap(), Capitulation::LambdaZero);
                }
                if line.id == "ggc/prime-upgrade" && line.outcome.starts_with("upgraded") {
                    let h = rec.char_t.as_ref().unwrap().to_series(rec.p).unwrap();
                    let cd = char_analysis(&h).unwrap();
                    assert!(ggc_upgrade_certificate(&cd).is_some());
                }
            }
        }
    }

    #[test]
    fn verdict_serializes_and_reloads() {
        let rec = bundled_record(3, 971).unwrap();
        let verdict = verdict_pipeline(&rec);
        let json = serde_json::to_string_pretty(&verdict).unwrap();
        let reloaded: Verdict = serde_json::from_str(&json).unwrap();
        assert_eq!(reloaded, verdict);
    }
}
