//! Exact finite models of closed-relation dynamics, Mahavier products,
//! fans with prescribed non-smooth sets and quotient fan families.

pub mod compacta;
pub mod dynamics;
pub mod error;
pub mod fans;
pub mod geometry;
pub mod interval;
pub mod mahavier;
pub mod ns_fan;
pub mod quotients;
pub mod rational;
pub mod relations;

pub use error::{Error, Result};
pub use rational::Q;
