//! Exact algebra on complete topological rings presented as towers of
//! finitely presented quotient algebras.
//!
//! Every level is a polynomial ring over the rationals modulo an ideal held
//! as a reduced Gröbner basis. Towers, elements, and restricted power series
//! are lazy: levels are built on demand and memoized, and equality is only
//! ever decided up to a stated depth.

pub mod derivation;
pub mod element;
pub mod error;
pub mod exponential;
pub mod groebner;
mod linalg;
pub mod poly;
pub mod series;
pub mod slice;
pub mod tower;

pub use derivation::{dual_derivation, Derivation, DerivationConfig, EscapeWitness, IntegrabilityVerdict, LevelOrder, Transform, Window};
pub use element::{element_compare, Comparison, TowerElement};
pub use error::{Error, Result};
pub use exponential::{verify_coaction, CoactionReport, CoactionViolation, Combine, InvariantOutcome, LevelCoaction, OrbitRecord, RestrictedExponential, SubstitutionCoaction};
pub use groebner::{buchberger, GroebnerBasis, GroebnerLimits};
pub use poly::{rat, ratio, MonomialOrder, Poly, Rational, Universe, VarId};
pub use slice::{find_local_slice, Cylinder, SliceData};
pub use tower::{is_zero_localization, Centers, DualExhaustion, Exhaustion, LevelRing, TowerRing, ZeroLocalization};
