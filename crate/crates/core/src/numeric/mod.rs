pub mod quadrature;
pub mod stats;

pub use quadrature::{integrate, integrate_oscillatory_tail, wynn_epsilon, Integral, Tolerance};
