//! Screen, score, group, merge and verify in one call.

use serde::Serialize;

use crate::error::{MergeError, SimilarityError};
use crate::graph::{NetworkBundle, Time};
use crate::merge::{
    apply_merge, plan_merge, verify_merge, MergePlan, MergePolicy, MergedNetwork,
    VerificationReport,
};
use crate::structure::{screen_candidates, CandidateSet, NameFilter};
use crate::tap::{default_now, threshold_groups, validate_theta, Grouping, RedundantGroupSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DedupeConfig {
    /// Falls back to the latest end time in the bundle.
    pub now: Option<Time>,
    pub theta: f64,
    pub name_filter: NameFilter,
    pub policy: MergePolicy,
}

impl DedupeConfig {
    pub fn new(theta: f64) -> Self {
        DedupeConfig {
            now: None,
            theta,
            name_filter: NameFilter::Off,
            policy: MergePolicy::SmallestId,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Merge(#[from] MergeError),
}

#[derive(Debug, Clone)]
pub struct DedupeOutcome {
    pub now: Time,
    pub candidates: CandidateSet,
    pub grouping: Grouping,
    pub plan: MergePlan,
    pub merged: MergedNetwork,
    pub verification: VerificationReport,
}

impl DedupeOutcome {
    pub fn groups(&self) -> &RedundantGroupSet {
        &self.grouping.groups
    }
}

pub fn run_dedupe(
    bundle: &NetworkBundle,
    config: &DedupeConfig,
) -> Result<DedupeOutcome, PipelineError> {
    validate_theta(config.theta)?;
    // An empty bundle has no edges to weigh, so any anchor will do.
    let now = config.now.or_else(|| default_now(bundle)).unwrap_or(0);
    let candidates = screen_candidates(bundle, config.name_filter);
    log::info!("{} candidate pairs", candidates.len());
    let grouping = threshold_groups(&candidates, bundle, config.theta, now)?;
    log::info!(
        "{} redundant groups at theta {}",
        grouping.groups.groups.len(),
        config.theta
    );
    let plan = plan_merge(bundle, &grouping.groups, config.policy)?;
    let merged = apply_merge(bundle, &plan)?;
    let verification = verify_merge(bundle, &merged.bundle, &plan);
    for v in &verification.violations {
        log::warn!("{v}");
    }
    Ok(DedupeOutcome {
        now,
        candidates,
        grouping,
        plan,
        merged,
        verification,
    })
}
