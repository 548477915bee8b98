//! Mechanistic model of a continuous perfusion bioreactor producing a
//! monoclonal antibody (mAb).
//!
//! The reactor holds a culture of viable cells that divide, die, and secrete
//! product. Five components are tracked as masses alongside the liquid
//! volume, giving a six-state ODE:
//!
//! ```text
//! dV/dt = F_W + F_G - F_out - F_per
//! dm/dt = C_in F_in - c F_out - C_per c F_per + R V,     c = m / V
//! ```
//!
//! Inlets are a pure-water stream `F_W` and a glucose-rich feed `F_G`. The
//! perfusion outlet `F_per` sits behind a filter that retains cells and
//! product while passing spent medium (glucose and lactate); the sampling
//! outlet `F_out` removes whole broth. Production rates `R = Sᵀ r(c, T)`
//! come from six stoichiometric reactions with temperature-, substrate-,
//! and product-dependent kinetics.
//!
//! All rate constants are per minute; time is measured in minutes
//! throughout the crate (1 day = 1440 min).

mod kinetics;
mod params;
mod rhs;
mod smooth;
mod stoichiometry;
mod types;

pub use kinetics::{kinetics, kinetics_with_derivatives, RateBundle, RateDerivatives};
pub use params::ModelParameters;
pub use rhs::{rhs, rhs_with_jacobians, RhsJacobians};
pub use smooth::{sigmoid, smooth_max};
pub use stoichiometry::Stoichiometry;
pub use types::{Component, ComponentVector, Input, State};

pub(crate) use rhs::{rhs_raw, rhs_raw_with_jacobians};

/// Errors raised by model evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("smooth_max requires at least one value")]
    EmptySmoothMax,
    #[error("non-finite {quantity} encountered in model evaluation")]
    NonFinite { quantity: &'static str },
    #[error("reactor volume must be positive, got {volume} L")]
    NonPositiveVolume { volume: f64 },
}
