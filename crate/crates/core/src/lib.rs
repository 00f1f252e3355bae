//! Scene-specific channel model (SSCM) toolkit.
//!
//! The crate covers the full loop of statistics-driven channel dataset
//! generation:
//!
//! * [`channel`] — channel tensor types, delay/angle transforms, power
//!   profiles for a half-wavelength ULA link.
//! * [`gbsm`] — clustered stochastic channel synthesis driven by an
//!   [`gbsm::LspSet`], with a Poisson-distributed cluster count.
//! * [`extract`] — per-sample statistics: rms delay spread, circular angle
//!   spreads, Ricean K-factor, cluster count.
//! * [`fit`] — distribution fitting, baseline parameter tables, building a
//!   scene-specific parameter set from extracted statistics, and the
//!   sub-scenario catalog with its matching metric.
//! * [`feedback`] — CSI feedback targets, a linear eigenbasis codec and a
//!   DFT-beam codebook under a feedback bit budget, SGCS scoring, and the
//!   noise-injection augmentation baseline.
//! * [`io`] — binary dataset files, text parameter files, the compact 8-byte
//!   statistics report, and CSV export.

pub mod channel;
pub mod error;
pub mod extract;
pub mod feedback;
pub mod fit;
pub mod gbsm;
pub mod io;
pub mod rng;

pub use error::{Error, Result};
