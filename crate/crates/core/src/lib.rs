//! Leader learning in contextual Stackelberg games.
//!
//! The leader's payoff against an unknown follower type is linear in the
//! vector of payoffs it would earn against each type. Learning therefore
//! reduces to a linear contextual bandit over a finite per-round menu of
//! utility vectors, one for each δ-approximate extreme point of the follower
//! best-response regions.
//!
//! Modules:
//! - [`game`]: instances, best responses, utility vectors.
//! - [`geometry`]: best-response regions and the per-round strategy menu.
//! - [`bandit`]: OFUL and the unit-ball scaling wrapper for adversarial engines.
//! - [`reduction`]: the per-round reduction loop and the unknown-utility embedding.
//! - [`markets`]: second-price auctions and persuasion on a discretized policy grid.

pub mod bandit;
pub mod error;
pub mod game;
pub mod geometry;
pub mod linalg;
pub mod lp;
pub mod markets;
pub mod polytope;
pub mod reduction;

pub use error::{Error, Result};
pub use game::{Context, GameAtContext, GameSpec, MixedStrategy, UtilityVector};
