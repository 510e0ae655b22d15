//! Nash equilibria of two-player bimatrix games by simulated annealing over a
//! max-based QUBO objective whose zeros are exactly the equilibria.
//!
//! * [`game`]: payoffs, regret gaps, payoff canonicalization.
//! * [`qubo`]: the max-based objective and the slack-penalty baseline.
//! * [`lattice`]: strategies quantized to multiples of `1/I`, annealing moves.
//! * [`annealer`]: two-phase evaluation and the annealing driver.
//! * [`cim_sim`]: behavioral model of the crossbar pair and WTA trees.
//! * [`oracle`]: exact support enumeration used as ground truth.
//! * [`bench`]: instance files, experiments, reports.
//!
//! Game-level math is generic over [`Scalar`]; [`Rational`] is the exact
//! default and `f64` is available for approximate work.

pub mod annealer;
pub mod bench;
pub mod cim_sim;
pub mod error;
pub mod game;
pub mod lattice;
pub mod oracle;
pub mod qubo;
pub mod rational;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact scalar used for all ground-truth computations.
pub type Rational = num_rational::Ratio<i128>;
/// Arbitrary-precision rational, for callers that outgrow `i128`.
pub type BigRational = num_rational::BigRational;

pub type ExactStrategy = game::MixedStrategy<Rational>;
pub type ExactProfile = game::StrategyProfile<Rational>;
pub type FloatStrategy = game::MixedStrategy<f64>;
pub type FloatProfile = game::StrategyProfile<f64>;
