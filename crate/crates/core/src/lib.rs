//! Rolling-contact mechanics for a smooth rigid object on a motion-controlled
//! smooth rigid hand.
//!
//! The crate covers the full pipeline for nonprehensile rolling manipulation:
//!
//! * [`geom3d`] — rigid-body math: rotations, transforms, twists, wrenches,
//!   adjoint maps.
//! * [`surface`] — orthogonally parameterized smooth surfaces and their local
//!   geometry (metric, curvature, Christoffel arrays) through third order.
//! * [`contact`] — first- and second-order rolling contact kinematics between
//!   two surfaces, including the pure-rolling spin-acceleration constraint.
//! * [`dynamics`] — the rolling dynamics solve (contact wrench + relative
//!   accelerations), friction validity, and adaptive-step trajectory
//!   simulation.
//! * [`oracles`] — closed-form ball-on-turntable solutions and
//!   finite-difference utilities used for validation.
//! * [`planner`] — trapezoidal direct collocation with iterative refinement
//!   (coarse solve, fine rollout, knot doubling).
//! * [`control`] — finite-horizon LQR about a nominal trajectory via backward
//!   Riccati integration.
//!
//! All quantities are SI; angles are radians. Six-vectors stack the angular
//! part before the linear part throughout.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature enables the standard library.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod real;

pub mod contact;
pub mod control;
pub mod dynamics;
pub mod geom3d;
pub mod ode;
pub mod oracles;
pub mod planner;
pub mod surface;
