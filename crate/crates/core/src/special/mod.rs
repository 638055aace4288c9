//! Complex Gamma function and modified Bessel functions of complex order.

mod bessel;
mod bounds;
mod gamma;

pub use bessel::*;
pub use bounds::*;
pub use gamma::*;
