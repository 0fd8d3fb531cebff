//! Session service for picking a harvest schedule from a precomputed
//! bundle: planners set deviation thresholds, filter and shortlist by
//! robustness score, and finalize a choice. Every state change lands in a
//! journal that can be replayed against the same bundle.

pub mod api;
pub mod bundle;
pub mod error;
pub mod session;

pub use api::{router, serve};
pub use bundle::{Bundle, BundleManifest, StageRecord};
pub use error::{Result, ServiceError};
pub use session::{
    parse_journal, replay_journal, Action, ActionOutput, CriteriaRequest, FilterRule,
    IterationRecord, ScoreCache, Session, SessionManager, SessionState,
};
