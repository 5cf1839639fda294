//! Probabilistic sea-ice edge forecasts from a statistical contour model.
//!
//! The ice edge in each region is described by where it crosses a fixed set
//! of lines. Ensemble forecasts are bias-corrected per line
//! ([`shift::contour_shift`]), a logit-normal model of the crossing
//! proportions is fitted by Metropolis-within-Gibbs ([`model::fit_posterior`]),
//! sampled contours are rasterized into a probability field, and that field
//! is blended with climatology using an EM-fitted weight ([`mixture`]).
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod mixture;
pub mod model;
pub mod reference;
pub mod scalar;
pub mod shift;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{AreaWeights, BinaryField, CellLabel, CellMask, Field, GridSpec, Scope, Stamp};
pub use scalar::Scalar;

pub type Point = geometry::Point<f64>;
pub type Contour = geometry::Contour<f64>;
pub type Line = geometry::Line<f64>;
pub type RegionGeometry = geometry::RegionGeometry<f64>;
pub type ProbabilityField = grid::ProbabilityField<f64>;
pub type ConcentrationField = grid::ConcentrationField<f64>;
pub type Weights = grid::AreaWeights<f64>;
pub type LengthSeries = shift::LengthSeries<f64>;
pub type ShiftedForecast = shift::ShiftedForecast<f64>;
pub type ContourPosterior = model::ContourPosterior<f64>;
pub type PriorSpec = model::PriorSpec<f64>;
pub type TrainingTriple = mixture::TrainingTriple<f64>;
pub type PersistenceFit = reference::PersistenceFit<f64>;
