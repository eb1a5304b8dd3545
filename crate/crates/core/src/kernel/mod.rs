//! Discretisation of the Muskat right-hand side on a periodic grid.

pub mod grid;
pub mod interp;
pub mod pointwise;
pub mod quadrature;
pub mod rhs;
pub mod spectral;
pub mod symbol;

pub use grid::{InterfaceField, PeriodicGrid};
pub use interp::Interpolation;
pub use pointwise::{polar_linear_at, polar_rate_at, GridSampler, HeightSampler, PointEstimate};
pub use quadrature::{PolarRule, QuadratureSpec, TailMode};
pub use rhs::{far_field_multiplier, muskat_rhs, MuskatOperator, RateField};
pub use spectral::{halflap_rhs, Spectral2d, TrigInterpolant};
pub use symbol::{dispersion_table, fitted_constant, measure_symbol, radial_kernel_constant, SymbolMeasurement};
