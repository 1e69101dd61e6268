//! Temporal activity-path similarity.
//!
//! Every edge gets a temporal weight `(now + 1 − start)·(end + 1 − start)`,
//! rewarding both recency and duration. A path `x → z → y` through a shared
//! entity weighs the product of its two edge weights. Within one relation
//! type the similarity is
//!
//! ```text
//! SimTAP_β(x, y) = 2·W(P_xy) / (W(P_xx) + W(P_yy))
//! ```
//!
//! where `W(P_ab)` sums path weights over every entity and every pair of
//! edges (full double loop, diagonal included). Summing parallel edges per
//! entity first turns each of those sums into a dot product of per-entity
//! weight vectors, which is how it is computed here. The bundle-level score
//! is the plain mean over all declared relation types.
//!
//! All weights and sums are exact `u128` integers; only the final ratio is a
//! float.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::SimilarityError;
use crate::graph::{
    NetworkBundle, RelationId, TemporalActivityNetwork, TemporalEdge, Time, VertexId,
};
use crate::structure::CandidateSet;
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TemporalWeight {
    pub relation: RelationId,
    pub weight: u128,
}

/// Temporal weight of one edge relative to `now`.
pub fn edge_weight(edge: &TemporalEdge, now: Time) -> Result<TemporalWeight, SimilarityError> {
    let (start, end) = (edge.interval.start(), edge.interval.end());
    if start > now {
        return Err(SimilarityError::FutureEdge {
            relation: edge.id,
            start,
            now,
        });
    }
    // start <= now and start <= end, so both factors are >= 1.
    let recency = (now as i128 + 1 - start as i128) as u128;
    let duration = (end as i128 + 1 - start as i128) as u128;
    Ok(TemporalWeight {
        relation: edge.id,
        weight: recency * duration,
    })
}

/// A length-2 path `start → entity → end` inside one subnetwork.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TapPath {
    pub start: VertexId,
    pub entity: VertexId,
    pub end: VertexId,
    pub first: TemporalWeight,
    pub second: TemporalWeight,
}

/// Product of the two edge weights of a path.
pub fn path_weight(path: &TapPath) -> u128 {
    path.first.weight * path.second.weight
}

/// Every path from `x` to `y` in `net`: one per shared entity and per pair of
/// edges (one from each endpoint). With `x == y` this includes both orders
/// and the diagonal.
pub fn enumerate_paths(
    net: &TemporalActivityNetwork,
    x: &VertexId,
    y: &VertexId,
    now: Time,
) -> Result<Vec<TapPath>, SimilarityError> {
    let from_y: Vec<(&TemporalEdge, TemporalWeight)> = net
        .incident(y)
        .filter(|e| &e.character == y)
        .map(|e| edge_weight(e, now).map(|w| (e, w)))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for e1 in net.incident(x).filter(|e| &e.character == x) {
        let w1 = edge_weight(e1, now)?;
        for (_, w2) in from_y.iter().filter(|(e2, _)| e2.entity == e1.entity) {
            out.push(TapPath {
                start: x.clone(),
                entity: e1.entity.clone(),
                end: y.clone(),
                first: w1,
                second: *w2,
            });
        }
    }
    Ok(out)
}

/// Per-entity summed edge weights of one character in one subnetwork,
/// sorted by entity id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct WeightVector(pub Vec<(VertexId, u128)>);

impl WeightVector {
    pub fn build(
        net: &TemporalActivityNetwork,
        v: &VertexId,
        now: Time,
    ) -> Result<Self, SimilarityError> {
        let mut acc: BTreeMap<&VertexId, u128> = BTreeMap::new();
        for e in net.incident(v).filter(|e| &e.character == v) {
            let w = edge_weight(e, now)?.weight;
            *acc.entry(&e.entity).or_insert(0) += w;
        }
        Ok(WeightVector(
            acc.into_iter().map(|(z, w)| (z.clone(), w)).collect(),
        ))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn self_weight(&self) -> u128 {
        self.0.iter().map(|(_, w)| w * w).sum()
    }

    /// Dot product over shared entities, accumulated in entity order.
    pub fn cross_weight(&self, other: &WeightVector) -> u128 {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut sum) = (0, 0, 0u128);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }
}

/// The neighbor weight vectors of one character, one per relation type in
/// declaration order. Absent relation types are empty vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NeighborWeightVector {
    pub character: VertexId,
    pub per_beta: Vec<WeightVector>,
}

impl NeighborWeightVector {
    pub fn build(bundle: &NetworkBundle, v: &VertexId, now: Time) -> Result<Self, SimilarityError> {
        let per_beta = bundle
            .subnetworks()
            .iter()
            .map(|net| WeightVector::build(net, v, now))
            .collect::<Result<_, _>>()?;
        Ok(NeighborWeightVector {
            character: v.clone(),
            per_beta,
        })
    }
}

/// The three path-weight sums of one relation type, kept exact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BetaSimilarity {
    /// `W(P_xy)`
    pub cross: u128,
    /// `W(P_xx)`
    pub self_x: u128,
    /// `W(P_yy)`
    pub self_y: u128,
}

impl BetaSimilarity {
    pub fn from_vectors(x: &WeightVector, y: &WeightVector) -> Self {
        BetaSimilarity {
            cross: x.cross_weight(y),
            self_x: x.self_weight(),
            self_y: y.self_weight(),
        }
    }

    /// Exact test for a similarity of one.
    pub fn is_one(&self) -> bool {
        let denom = self.self_x + self.self_y;
        denom > 0 && 2 * self.cross == denom
    }

    /// `2·cross / (self_x + self_y)`; zero when neither side has edges.
    pub fn value(&self) -> f64 {
        let denom = self.self_x + self.self_y;
        if denom == 0 {
            0.0
        } else if self.is_one() {
            1.0
        } else {
            (2 * self.cross) as f64 / denom as f64
        }
    }
}

/// SimTAP within a single subnetwork.
pub fn simtap_beta(
    net: &TemporalActivityNetwork,
    x: &VertexId,
    y: &VertexId,
    now: Time,
) -> Result<f64, SimilarityError> {
    Ok(simtap_beta_parts(net, x, y, now)?.value())
}

pub fn simtap_beta_parts(
    net: &TemporalActivityNetwork,
    x: &VertexId,
    y: &VertexId,
    now: Time,
) -> Result<BetaSimilarity, SimilarityError> {
    let vx = WeightVector::build(net, x, now)?;
    let vy = WeightVector::build(net, y, now)?;
    Ok(BetaSimilarity::from_vectors(&vx, &vy))
}

/// Arithmetic mean over relation types; zero-valued ones count.
pub fn aggregate(per_beta: &[f64]) -> f64 {
    if per_beta.is_empty() {
        return 0.0;
    }
    per_beta.iter().sum::<f64>() / per_beta.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityResult {
    pub x: VertexId,
    pub x_name: String,
    pub y: VertexId,
    pub y_name: String,
    /// One value per declared relation type, in declaration order.
    pub per_beta: Vec<f64>,
    pub simtap: f64,
    pub now: Time,
    pub subnetworks: usize,
}

fn result_from(
    bundle: &NetworkBundle,
    x: &NeighborWeightVector,
    y: &NeighborWeightVector,
    now: Time,
) -> SimilarityResult {
    let per_beta: Vec<f64> = x
        .per_beta
        .iter()
        .zip(&y.per_beta)
        .map(|(a, b)| BetaSimilarity::from_vectors(a, b).value())
        .collect();
    let name = |v: &VertexId| {
        bundle
            .vertex(v)
            .map(|v| v.display_name.clone())
            .unwrap_or_default()
    };
    SimilarityResult {
        x: x.character.clone(),
        x_name: name(&x.character),
        y: y.character.clone(),
        y_name: name(&y.character),
        simtap: aggregate(&per_beta),
        subnetworks: per_beta.len(),
        per_beta,
        now,
    }
}

/// Bundle-level SimTAP of two characters.
pub fn simtap(
    bundle: &NetworkBundle,
    x: &VertexId,
    y: &VertexId,
    now: Time,
) -> Result<SimilarityResult, SimilarityError> {
    bundle.character(x)?;
    bundle.character(y)?;
    let vx = NeighborWeightVector::build(bundle, x, now)?;
    let vy = NeighborWeightVector::build(bundle, y, now)?;
    Ok(result_from(bundle, &vx, &vy, now))
}

/// SimTAP for many pairs, computing each character's vectors once and the
/// pairs in parallel. Output order follows `pairs`.
pub fn simtap_pairs(
    bundle: &NetworkBundle,
    pairs: &[(VertexId, VertexId)],
    now: Time,
) -> Result<Vec<SimilarityResult>, SimilarityError> {
    let mut ids: Vec<&VertexId> = pairs.iter().flat_map(|(x, y)| [x, y]).collect();
    ids.sort();
    ids.dedup();
    for id in &ids {
        bundle.character(id)?;
    }
    let vectors: Vec<NeighborWeightVector> = ids
        .par_iter()
        .map(|id| NeighborWeightVector::build(bundle, id, now))
        .collect::<Result<_, _>>()?;
    let lookup: HashMap<&VertexId, &NeighborWeightVector> =
        ids.iter().copied().zip(vectors.iter()).collect();
    Ok(pairs
        .par_iter()
        .map(|(x, y)| result_from(bundle, lookup[x], lookup[y], now))
        .collect())
}

/// Writes results as `x_id,x_name,y_id,y_name,<one column per β>,simtap`.
pub fn write_similarity_csv<W: Write>(
    relation_types: &[&str],
    results: &[SimilarityResult],
    out: W,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["x_id", "x_name", "y_id", "y_name"];
    header.extend_from_slice(relation_types);
    header.push("simtap");
    w.write_record(&header)?;
    for r in results {
        let mut row = vec![
            r.x.to_string(),
            r.x_name.clone(),
            r.y.to_string(),
            r.y_name.clone(),
        ];
        row.extend(r.per_beta.iter().map(|v| v.to_string()));
        row.push(r.simtap.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// The redundant set: disjoint groups of at least two characters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RedundantGroupSet {
    pub theta: f64,
    pub now: Time,
    pub groups: Vec<Vec<VertexId>>,
}

impl RedundantGroupSet {
    pub fn empty(theta: f64, now: Time) -> Self {
        RedundantGroupSet {
            theta,
            now,
            groups: Vec::new(),
        }
    }

    /// Drops members missing from `bundle`, then groups left with fewer than
    /// two members.
    pub fn restrict_to(&self, bundle: &NetworkBundle) -> Self {
        RedundantGroupSet {
            theta: self.theta,
            now: self.now,
            groups: self
                .groups
                .iter()
                .map(|g| {
                    g.iter()
                        .filter(|v| bundle.contains_vertex(v))
                        .cloned()
                        .collect::<Vec<_>>()
                })
                .filter(|g| g.len() >= 2)
                .collect(),
        }
    }

    /// All unordered member pairs, `a < b`.
    pub fn pairs(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for g in &self.groups {
            for (i, a) in g.iter().enumerate() {
                for b in &g[i + 1..] {
                    out.push(if a < b {
                        (a.clone(), b.clone())
                    } else {
                        (b.clone(), a.clone())
                    });
                }
            }
        }
        out.sort();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grouping {
    pub groups: RedundantGroupSet,
    /// SimTAP of every candidate pair, in candidate order.
    pub similarities: Vec<SimilarityResult>,
}

pub fn validate_theta(theta: f64) -> Result<(), SimilarityError> {
    if theta.is_finite() && theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(SimilarityError::InvalidThreshold(theta))
    }
}

/// Scores every candidate pair and joins those with `SimTAP >= theta` into
/// connected components.
pub fn threshold_groups(
    candidates: &CandidateSet,
    bundle: &NetworkBundle,
    theta: f64,
    now: Time,
) -> Result<Grouping, SimilarityError> {
    validate_theta(theta)?;
    let pairs: Vec<(VertexId, VertexId)> = candidates
        .pairs
        .iter()
        .map(|p| (p.x.clone(), p.y.clone()))
        .collect();
    let similarities = simtap_pairs(bundle, &pairs, now)?;
    let groups = group_pairs(
        similarities
            .iter()
            .filter(|r| r.simtap >= theta)
            .map(|r| (&r.x, &r.y)),
        theta,
        now,
    );
    Ok(Grouping {
        groups,
        similarities,
    })
}

/// Connected components of the given pairs, members sorted by id and groups
/// sorted by their first member.
pub fn group_pairs<'a, I>(pairs: I, theta: f64, now: Time) -> RedundantGroupSet
where
    I: IntoIterator<Item = (&'a VertexId, &'a VertexId)>,
{
    let pairs: Vec<_> = pairs.into_iter().collect();
    let mut ids: Vec<&VertexId> = pairs.iter().flat_map(|&(x, y)| [x, y]).collect();
    ids.sort();
    ids.dedup();
    let index: HashMap<&VertexId, usize> = ids.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut uf = UnionFind::new(ids.len());
    for (x, y) in &pairs {
        uf.union(index[x], index[y]);
    }
    let groups = uf
        .groups(2)
        .into_iter()
        .map(|g| g.into_iter().map(|i| ids[i].clone()).collect())
        .collect();
    RedundantGroupSet { theta, now, groups }
}

/// Default reference time: the latest end time in the bundle.
pub fn default_now(bundle: &NetworkBundle) -> Option<Time> {
    bundle.max_end()
}
