//! Simulation and dynamic optimization of monoclonal-antibody production in
//! a continuous perfusion bioreactor.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`] — the six-state mechanistic reactor model: stoichiometry,
//!   kinetics, inhibition terms, and the ODE right-hand side.
//! - [`integrator`] — adaptive embedded Runge-Kutta integration over
//!   zero-order-hold control intervals, with forward sensitivities.
//! - [`scenario`] — the three-phase base-case operating recipe (batch,
//!   fed-batch boluses, perfusion) and open-loop simulation.
//! - [`ocp`] — the mAb-maximization optimal control problem and its direct
//!   multiple-shooting transcription to a sparse NLP.
//! - [`nlp`] — a bound-constrained augmented-Lagrangian solver and KKT
//!   diagnostics behind a solver-agnostic problem interface.
//!
//! A narrative guide with runnable examples lives in `book/`; its code
//! snippets are compiled as documentation tests of this crate.

pub mod integrator;
pub mod model;
pub mod nlp;
pub mod ocp;
pub mod scenario;

#[cfg(doctest)]
mod book;
