//! Shared numerical infrastructure: grids and quadrature, oscillatory
//! integrals, sine/line transforms, power-law fitting, and the few special
//! functions the restriction module needs.

mod fit;
mod gauss;
mod grid;
mod oscillatory;
pub mod special;
mod transform;

pub use fit::{fit_power_law, PowerLawFit};
pub use gauss::{gauss_legendre, gauss_legendre_on};
pub use grid::{LineGrid, RadialGrid};
pub use oscillatory::{oscillatory_integral, OscillatoryResult};
pub use transform::{check_sampling, LineFourier, SineTransform};
