//! Numerical toolkit for singular Lagrangian T³-fibrations: the
//! focus-focus×S¹ normal form and the Harvey–Lawson fibration.
//!
//! Modules, bottom up: [`poly_geometry`] (spectral polynomial and Δ),
//! [`models`] (total spaces and flows), [`periods`] (period forms),
//! [`monodromy`], and [`classify`] (Moser-isotopy equivalence test).

pub mod classify;
pub mod error;
pub mod expr;
pub mod fd;
pub mod models;
pub mod monodromy;
pub mod ode;
pub mod periods;
pub mod poly_geometry;
pub mod quadrature;

pub use error::{Error, Result};
