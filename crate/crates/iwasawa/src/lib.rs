//! Exact-arithmetic building blocks for Iwasawa-theoretic computations over
//! imaginary quadratic fields in which an odd prime p splits, together with a
//! verdict engine that evaluates Greenberg-type criteria on bundled or
//! externally computed field data.
//!
//! The layers, from the bottom up:
//!
//! * [`padic`] — residues mod p^N with explicit precision and valuation
//!   semantics; the coefficient domain for everything else.
//! * [`series`] — truncated power series over Z_p in one variable: lambda/mu
//!   invariants, Weierstrass preparation, Newton polygons, Hensel lifting and
//!   the nu_m polynomial family.
//! * [`bivar`] — the truncated two-variable ring `Z_p[[S,T]]`: characteristic
//!   determinants of relation matrices, coordinate changes between (S,T) and
//!   (S,T_s), and specializations.
//! * [`criteria`] — the decision engine: consumes a [`record::FieldRecord`]
//!   and emits a [`criteria::Verdict`] with a machine-readable reason trace.
//! * [`record`] — the JSON record schema, bundled datasets, validation, and
//!   Iwasawa-invariant fitting from class-number sequences.
//! * [`cas`] — an optional subprocess client that refreshes record fields
//!   from an external computer-algebra engine (PARI/GP style).
//!
//! All value types are immutable after construction and safe to share across
//! threads.

pub mod bivar;
pub mod cas;
pub mod criteria;
mod error;
pub mod padic;
pub mod record;
pub mod series;

pub use error::{Error, Result};
pub use padic::{vp, PadicInt, Valuation};
pub use series::{DistinguishedPoly, NewtonPolygon, PowerSeries};
pub use bivar::{BivarSeries, SeriesMatrix};
pub use criteria::{CharData, Verdict, VerdictLevel};
pub use record::{FieldRecord, FitResult};
