//! The per-round reduction from strategy selection to a linear bandit.
//!
//! Each round the context's menu `E_z(δ)` is turned into a list of vectors
//! (utility vectors when the leader knows its payoffs, `h`-embeddings when it
//! does not). An engine picks one by index, the leader commits to the matching
//! menu strategy, samples an action, and the engine is fed the realized payoff.

mod embedding;
mod episode;

pub use embedding::{embedding_parameter, flat_index, h_embedding, h_embedding_at, EmbeddingDims};
pub use episode::{
    build_action_set, play_round, run_episode, BanditSelector, EnvironmentTrace, EpisodeLog, Feedback,
    MenuCache, Mode, RoundActionSet, RoundRecord, RoundView, Selection, StrategySelector,
};
