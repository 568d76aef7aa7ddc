//! Joint transmit and reflective beamforming for an IRS-aided NOMA downlink
//! that serves a multicast stream (also used to illuminate a sensing target)
//! and a unicast stream.
//!
//! The solver maximizes the near user's unicast rate subject to a minimum
//! multicast rate, a transmit power budget and a minimum target illumination
//! power. The fractional objective is handled with Dinkelbach's method; each
//! parametric problem is solved by alternating between the transmit
//! beamformers and the IRS phases, both through semidefinite relaxation
//! tightened to rank one by sequential rank-one constraint relaxation.
//!
//! Module map:
//!
//! - [`model`]: domain types, rates, illumination power, feasibility.
//! - [`channels`]: seeded channel generation and channel files.
//! - [`sdp`]: Hermitian SDP assembly, real embedding, interior-point backend.
//! - [`srocr`]: the rank-one tightening loop.
//! - [`optimizer`]: subproblem assembly, recovery, alternating optimization
//!   and the Dinkelbach outer loop.
//! - [`experiments`]: run configs, sweeps, convergence traces, brute-force
//!   oracle and CSV output.
//!
//! Conjugation convention: every channel is stored as a column vector `h`
//! and the received amplitude for a beamformer `w` is `h^H w`.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channels;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod optimizer;
pub mod sdp;
pub mod srocr;

mod error;

pub use error::Error;
pub use linalg::{CMatrix, CVector, C64};
pub use model::{BeamformingSolution, ChannelSet, RateBreakdown, ReflectVector, SystemConfig};
