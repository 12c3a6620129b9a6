//! Diversity-multiplexing tradeoff (DMT) of MIMO fading channels when the
//! transmitter only holds a noisy channel estimate.
//!
//! The crate is split along the lines of the computation:
//!
//! * [`channel`] draws Rayleigh channels and estimation errors, computes the
//!   ordered eigenvalues of `HH†`, `ĤĤ†` and `EE†` and carries the
//!   random-matrix property checks.
//! * [`closed_form`] evaluates the closed-form achievable DMT under
//!   eigenvalue-driven power adaptation, together with the no-CSIT and
//!   rate-adaptation baselines.
//! * [`oracle`] solves the SNR-exponent minimisation by brute force, as an
//!   independent check of the closed form.
//! * [`sim`] estimates finite-SNR outage probabilities of the power
//!   adaptation scheme by Monte Carlo.
//! * [`report`] turns all of the above into plottable CSV/JSON datasets.

pub mod channel;
pub mod closed_form;
pub mod error;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod sim;

pub use channel::{ChannelConfig, ChannelDraw, EigenTriple};
pub use closed_form::{CaseTag, DmtCurve, DmtSegment};
pub use error::{DmtError, Result};
pub use oracle::{ExponentVector, OracleResult};
pub use sim::{KappaMode, OutageSweep, PowerPolicy};
