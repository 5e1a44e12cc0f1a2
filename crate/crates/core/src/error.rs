use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{quantity} = {value} is outside the domain ({domain})")]
    Domain {
        quantity: &'static str,
        value: f64,
        domain: String,
    },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("density {density:e} below node floor {floor:e} at t = {t}, r* = {r_star}")]
    NodeProximity {
        t: f64,
        r_star: f64,
        density: f64,
        floor: f64,
    },

    #[error("quadrature did not converge: last change {change:e} > tolerance {tolerance:e} after {panels} panels")]
    NonConvergence {
        change: f64,
        tolerance: f64,
        panels: usize,
    },

    #[error(
        "sampling window too small: {outside_mass:e} of the density lies outside [{lo}, {hi}]"
    )]
    WindowTooSmall { outside_mass: f64, lo: f64, hi: f64 },

    #[error("singular base metric (determinant {determinant:e})")]
    SingularMetric { determinant: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
