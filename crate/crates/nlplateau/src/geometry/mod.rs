//! Planar geometry on pixel sets: interactions, fractional perimeter, mean
//! curvature, the angular mass at infinity, vertical rearrangement, and a few
//! explicit constructions (osculating balls, tangent paraboloids, domes).
//!
//! Sets live in R^2 as a square-celled window plus an analytic description of
//! what lies beyond it. All singular integrals are done in polar coordinates
//! around the singular point, where the radial part is exact.

mod appendix;
mod curvature;
mod perimeter;
mod pixel;
mod polar;
mod rearrange;

pub use appendix::*;
pub use curvature::*;
pub use perimeter::*;
pub use pixel::*;
pub use rearrange::*;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("the planar engine needs n = 1, got n = {0}")]
    Dimension(u32),
    #[error("window must have positive cell size and at least one cell")]
    Window,
    #[error("occupancy has {got} cells, window has {want}")]
    Occupancy { got: usize, want: usize },
    #[error("far field is not analytic: {0}")]
    UnsupportedFarField(String),
    #[error("cell {0:?} on the window ring disagrees with the far field")]
    FarFieldMismatch((usize, usize)),
    #[error("sets overlap in cell {0:?}")]
    Overlap((usize, usize)),
    #[error("both sets are unbounded; far-far interaction is not supported")]
    FarFar,
    #[error("windows differ")]
    WindowMismatch,
    #[error("region {0:?} is not inside the window")]
    Region([f64; 4]),
    #[error("point ({0}, {1}) is not on the discrete boundary")]
    NotOnBoundary(f64, f64),
    #[error("radius sequence must be positive, strictly decreasing and inside the window: {0}")]
    Radii(String),
    #[error("precondition violated: alpha_bar = {alpha_bar} must be below omega/2 = {half}")]
    AlphaTooLarge { alpha_bar: f64, half: f64 },
    #[error("set is not confined in the slab: column {col}, cell {row}")]
    Confinement { col: usize, row: usize },
    #[error("value {0} is not a multiple of the cell size")]
    Quantization(f64),
    #[error("nonpositive opening coefficient {0}")]
    Opening(f64),
    #[error("r0 = {r0} too large: 3 r0 exceeds the inradius {inradius}")]
    TubeRadius { r0: f64, inradius: f64 },
    #[error("smoothness order must be at least 2, got {0}")]
    Order(u32),
    #[error("functional: {0}")]
    Functional(#[from] crate::functional::FunctionalError),
    #[error("i/o on {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("malformed image {path}: {msg}")]
    Format { path: String, msg: String },
}

pub(crate) fn check_dimension(spec: &crate::kernel::KernelSpec) -> Result<(), GeometryError> {
    if spec.n != 1 {
        return Err(GeometryError::Dimension(spec.n));
    }
    Ok(())
}
