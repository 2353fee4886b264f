//! Median maximal functions on exact rational step functions.
//!
//! The crate computes the median maximal function `𝓜f(x) = sup_{Q∋x} |m_f(Q)|`,
//! its τ-quantile relatives `𝓜^τ`, their dyadic variants, the
//! Hardy–Littlewood operator, Calderón–Zygmund stopping cubes and the
//! Muckenhoupt characteristics of weights, all on functions that are constant
//! on the cells of a uniform grid. Measures, medians, `L¹(w)` norms and the
//! `A₁`/`A₂` characteristics are exact rationals; `L^p` norms for `p ≠ 1` and the
//! logarithmic `A_∞` characteristic use `f64`.
//!
//! [`verify`] turns the weighted inequalities these operators satisfy into
//! replayable property suites.

pub mod error;
pub mod grid;
pub mod maximal;
pub mod median;
pub mod rational;
pub mod stepfn;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{CubeFamily, DyadicGridSpec, GridCube, Universe};
pub use maximal::MaximalKind;
pub use rational::Rational;
pub use stepfn::{IndicatorSet, StepFunction, Weight};
