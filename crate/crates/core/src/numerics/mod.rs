//! Special functions, quadrature and index structures used by the samplers.

pub mod fenwick;
pub mod polylog;
pub mod quadrature;

pub use fenwick::Fenwick;
pub use polylog::{zeta, Polylog};
pub use quadrature::{integrate, integrate_endpoints, QuadOptions, Quadrature};
