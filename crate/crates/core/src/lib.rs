//! Deterministic simulator of a 2-player, 2-machine competitive bandit in
//! which the players' joint choices are sampled from photon-pair
//! polarization measurements.
//!
//! The layers, bottom to top:
//!
//! * [`rng`] — seedable random streams with stable child-seed derivation;
//! * [`optics`] — wave-plate / beam-splitter transforms and the joint
//!   decision distributions of correlated and entangled photon pairs;
//! * [`environment`] — the two slot machines, conflict payouts, and the
//!   periodic happy-hour schedule;
//! * [`strategy`] — the explore/check/exploit state machine the players
//!   share, plus the entangled-only baseline;
//! * [`experiment`] — seeded episodes, Monte Carlo means, and the
//!   parameter sweeps;
//! * [`output`] — CSV and SVG emitters;
//! * [`cli`] — the command-line front end.
//!
//! Everything downstream of a master seed is reproducible bit for bit,
//! including across thread counts.

pub mod cli;
pub mod environment;
pub mod experiment;
pub mod optics;
pub mod output;
pub mod rng;
pub mod strategy;
