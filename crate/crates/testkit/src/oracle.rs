//! Reference implementations by literal enumeration.
//!
//! These walk every path explicitly and sum in floating point, so they are
//! only meant for small instances.

use tapdedup::{NetworkBundle, TemporalActivityNetwork, TemporalEdge, VertexId};
use thiserror::Error;

pub const MAX_PATHS: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("instance too large: {0} paths")]
    TooLarge(usize),
    #[error("edge starts after the reference time")]
    FutureEdge,
}

fn own_edges<'a>(net: &'a TemporalActivityNetwork, v: &VertexId) -> Vec<&'a TemporalEdge> {
    net.edges().iter().filter(|e| &e.character == v).collect()
}

fn weight(e: &TemporalEdge, now: i64) -> Result<f64, OracleError> {
    let (s, t) = (e.interval.start(), e.interval.end());
    if s > now {
        return Err(OracleError::FutureEdge);
    }
    Ok(((now + 1 - s) * (t + 1 - s)) as f64)
}

/// Sum of path weights over all `a → z → b` paths, plus the path count.
fn path_sum(
    net: &TemporalActivityNetwork,
    a: &VertexId,
    b: &VertexId,
    now: i64,
) -> Result<(f64, usize), OracleError> {
    let mut sum = 0.0;
    let mut count = 0;
    for e1 in own_edges(net, a) {
        for e2 in own_edges(net, b) {
            if e1.entity == e2.entity {
                sum += weight(e1, now)? * weight(e2, now)?;
                count += 1;
            }
        }
    }
    Ok((sum, count))
}

pub fn oracle_simtap_beta(
    net: &TemporalActivityNetwork,
    x: &VertexId,
    y: &VertexId,
    now: i64,
) -> Result<f64, OracleError> {
    let (xy, n1) = path_sum(net, x, y, now)?;
    let (xx, n2) = path_sum(net, x, x, now)?;
    let (yy, n3) = path_sum(net, y, y, now)?;
    let paths = n1 + n2 + n3;
    if paths > MAX_PATHS {
        return Err(OracleError::TooLarge(paths));
    }
    if xx + yy == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * xy / (xx + yy))
}

/// Mean over every subnetwork of the bundle.
pub fn oracle_simtap(
    bundle: &NetworkBundle,
    x: &VertexId,
    y: &VertexId,
    now: i64,
) -> Result<f64, OracleError> {
    let nets = bundle.subnetworks();
    if nets.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for net in nets {
        total += oracle_simtap_beta(net, x, y, now)?;
    }
    Ok(total / nets.len() as f64)
}

/// Sorted `(relation type, entity)` labels of every edge of `v`.
pub fn edge_multiset(bundle: &NetworkBundle, v: &VertexId) -> Vec<(String, VertexId)> {
    let mut out: Vec<_> = bundle
        .edges()
        .into_iter()
        .filter(|e| &e.character == v)
        .map(|e| (e.relation_type.clone(), e.entity.clone()))
        .collect();
    out.sort();
    out
}

/// Structure error from the multiset intersection of the two edge-label
/// lists.
pub fn oracle_structure_error(bundle: &NetworkBundle, x: &VertexId, y: &VertexId) -> f64 {
    let a = edge_multiset(bundle, x);
    let mut b = edge_multiset(bundle, y);
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    let mut shared = 0;
    for label in &a {
        if let Some(pos) = b.iter().position(|l| l == label) {
            b.swap_remove(pos);
            shared += 1;
        }
    }
    1.0 - 2.0 * shared as f64 / total as f64
}
