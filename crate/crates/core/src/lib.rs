#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod exprdsl;
pub mod floquet;
pub mod hilger;
pub mod linalg;
pub mod matpow;
pub mod ode;
pub mod quadrature;
pub mod shifts;
pub mod stability;
pub mod timescale;
pub mod transition;
