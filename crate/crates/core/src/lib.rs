//! Age-weighted replay sampling, concentration-style error bounds for
//! off-policy evaluation, and a small tabular lab for checking both against
//! exact dynamic programming.
//!
//! The crate is organized around four pieces:
//!
//! * [`replay`]: a replay buffer with O(log n) weighted sampling backed by a
//!   prefix-sum tree.
//! * [`weighting`]: sampling-weight schemes (uniform, one-over-age, the
//!   staged recency schedule and its closed forms) plus exact selection-count
//!   profiles.
//! * [`analysis`]: evaluation-error bounds driven by weighted sampling
//!   variance and policy-mismatch bias.
//! * [`mdp`]: tabular MDPs, occupancy measures, Wasserstein distances, and an
//!   off-policy training loop that measures every bound term exactly.
//!
//! [`suites`] bundles the runtime verification checks used by the CLI.

pub mod analysis;
pub mod error;
pub mod fenwick;
pub mod mdp;
pub mod profile;
pub mod replay;
pub mod suites;
pub mod weighting;

pub use analysis::{BoundInputs, BoundTerms, Horizon};
pub use error::{Error, Result};
pub use fenwick::FenwickTree;
pub use mdp::{Policy, TabularMdp};
pub use profile::SelectionProfile;
pub use replay::{ReplayBuffer, Transition};
pub use weighting::{EreParams, WeightScheme};
