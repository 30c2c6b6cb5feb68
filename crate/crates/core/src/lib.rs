//! Accurate and correctly rounded integer powers `x^n` built on a fused
//! multiply-add.
//!
//! The crate layers, bottom to top:
//!
//! * [`exact`]: exact dyadic values `M·2^s`, the ground truth everything is
//!   checked against.
//! * [`softfloat`]: a radix-2 floating-point arithmetic of any precision
//!   `2 ≤ p ≤ 64` with correct rounding in the four IEEE modes and an fma.
//! * [`eft`]: error-free transformations (Fast2Sum, TwoSum, Fast2Mult) and the
//!   double-word product DblMult.
//! * [`powers`]: the linear-time and logarithmic-time powering algorithms and
//!   a correctly rounded power evaluated in a wider working precision.
//! * [`bounds`]: exact evaluation of the error bounds of those algorithms and
//!   the correct-rounding certification margin.
//! * [`oracle`]: big-integer ground truth for powers, rounding classification,
//!   run lengths and brute-force hardest-to-round search.
//! * [`sweep`]: batch verification and worst-case reports shared by the CLI
//!   and the acceptance tests.

pub mod bounds;
pub mod eft;
pub mod exact;
pub mod fixtures;
pub mod oracle;
pub mod powers;
pub mod softfloat;
pub mod sweep;

pub use eft::DoubleWord;
pub use exact::ExactValue;
pub use softfloat::{FpNumber, Precision, RoundingMode};
