//! Structure-error screening of character pairs.
//!
//! For characters `x`, `y` let `c_x(β, z)` count the `β`-edges between `x`
//! and entity `z`. The structure error is
//!
//! ```text
//! ε(x, y) = 1 − 2·Σ min(c_x, c_y) / (deg(x) + deg(y))
//! ```
//!
//! i.e. one minus the Dice coefficient of the two per-entity edge-count
//! multisets. It is zero exactly when both characters have the same number
//! of edges of every relation type to every entity, and it is 1 when the
//! characters share nothing (including the case where both have no edges).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::GraphError;
use crate::graph::{NetworkBundle, VertexId};

/// Pairs with `|ε| <= ZERO_TOLERANCE` are reported as zero. The decision
/// itself is made on exact integer counts.
pub const ZERO_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NameFilter {
    #[default]
    Off,
    /// Only pairs whose display names are equal.
    Same,
    /// Only pairs whose display names differ.
    Different,
}

impl NameFilter {
    pub fn admits(&self, x_name: &str, y_name: &str) -> bool {
        match self {
            NameFilter::Off => true,
            NameFilter::Same => x_name == y_name,
            NameFilter::Different => x_name != y_name,
        }
    }
}

impl FromStr for NameFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(NameFilter::Off),
            "same" => Ok(NameFilter::Same),
            "different" => Ok(NameFilter::Different),
            other => Err(format!(
                "unknown name filter `{other}` (expected off, same or different)"
            )),
        }
    }
}

impl fmt::Display for NameFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NameFilter::Off => "off",
            NameFilter::Same => "same",
            NameFilter::Different => "different",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BetaBreakdown {
    pub degree_x: usize,
    pub degree_y: usize,
    pub shared: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureError {
    pub x: VertexId,
    pub y: VertexId,
    pub value: f64,
    pub degree_x: usize,
    pub degree_y: usize,
    /// `Σ min(c_x, c_y)` over all relation types and entities.
    pub shared: usize,
    /// Per relation type, in declaration order.
    pub per_beta: Vec<(String, BetaBreakdown)>,
}

impl StructureError {
    /// Exact zero test on the integer counts.
    pub fn is_zero(&self) -> bool {
        let total = self.degree_x + self.degree_y;
        total > 0 && 2 * self.shared == total
    }
}

fn error_value(shared: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        1.0 - (2 * shared) as f64 / total as f64
    }
}

/// Sorted `(relation type index, entity, count)` triples for one character.
type Profile = Vec<(usize, VertexId, usize)>;

fn profile(bundle: &NetworkBundle, v: &VertexId) -> Profile {
    let mut counts: BTreeMap<(usize, &VertexId), usize> = BTreeMap::new();
    for (bx, net) in bundle.subnetworks().iter().enumerate() {
        for e in net.incident(v) {
            *counts.entry((bx, &e.entity)).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .map(|((bx, z), c)| (bx, z.clone(), c))
        .collect()
}

/// Merge-walk of two sorted profiles, accumulating per relation type.
fn compare(px: &Profile, py: &Profile, n_beta: usize) -> Vec<BetaBreakdown> {
    let mut out = vec![BetaBreakdown::default(); n_beta];
    for (bx, _, c) in px {
        out[*bx].degree_x += c;
    }
    for (bx, _, c) in py {
        out[*bx].degree_y += c;
    }
    let (mut i, mut j) = (0, 0);
    while i < px.len() && j < py.len() {
        let a = (&px[i].0, &px[i].1);
        let b = (&py[j].0, &py[j].1);
        match a.cmp(&b) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out[px[i].0].shared += px[i].2.min(py[j].2);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn assemble(
    bundle: &NetworkBundle,
    x: &VertexId,
    y: &VertexId,
    per: Vec<BetaBreakdown>,
) -> StructureError {
    let degree_x = per.iter().map(|b| b.degree_x).sum();
    let degree_y = per.iter().map(|b| b.degree_y).sum();
    let shared = per.iter().map(|b| b.shared).sum();
    StructureError {
        x: x.clone(),
        y: y.clone(),
        value: error_value(shared, degree_x + degree_y),
        degree_x,
        degree_y,
        shared,
        per_beta: bundle
            .relation_types()
            .into_iter()
            .map(str::to_owned)
            .zip(per)
            .collect(),
    }
}

/// Structure error between two distinct characters.
pub fn structure_error(
    bundle: &NetworkBundle,
    x: &VertexId,
    y: &VertexId,
) -> Result<StructureError, GraphError> {
    bundle.character(x)?;
    bundle.character(y)?;
    if x == y {
        return Err(GraphError::SelfPair(x.clone()));
    }
    let per = compare(
        &profile(bundle, x),
        &profile(bundle, y),
        bundle.subnetworks().len(),
    );
    Ok(assemble(bundle, x, y, per))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidatePair {
    pub x: VertexId,
    pub x_name: String,
    pub y: VertexId,
    pub y_name: String,
    pub structure_error: f64,
}

/// The candidate set H: unordered pairs with zero structure error, `x < y`,
/// sorted by `(x, y)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CandidateSet {
    pub name_filter: NameFilter,
    pub pairs: Vec<CandidatePair>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x_id", "x_name", "y_id", "y_name", "structure_error"])?;
        for p in &self.pairs {
            w.write_record([
                p.x.as_str(),
                &p.x_name,
                p.y.as_str(),
                &p.y_name,
                &p.structure_error.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Exhaustive all-pairs screen. Runs on the current rayon pool; the output
/// does not depend on the pool size.
pub fn screen_candidates(bundle: &NetworkBundle, name_filter: NameFilter) -> CandidateSet {
    let characters = bundle.characters();
    let profiles: Vec<Profile> = characters
        .par_iter()
        .map(|v| profile(bundle, &v.id))
        .collect();
    // Entity ids are only compared, so intern them to speed up the merge-walk.
    let mut interned: HashMap<&VertexId, usize> = HashMap::new();
    let mut keys: Vec<&VertexId> = profiles.iter().flatten().map(|(_, z, _)| z).collect();
    keys.sort();
    keys.dedup();
    for (ix, z) in keys.into_iter().enumerate() {
        interned.insert(z, ix);
    }
    let compact: Vec<Vec<(usize, usize, usize)>> = profiles
        .iter()
        .map(|p| p.iter().map(|(b, z, c)| (*b, interned[z], *c)).collect())
        .collect();
    let degrees: Vec<usize> = compact
        .iter()
        .map(|p| p.iter().map(|t| t.2).sum())
        .collect();

    let pairs: Vec<CandidatePair> = (0..characters.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let chars = &characters;
            let compact = &compact;
            let degrees = &degrees;
            (i + 1..chars.len()).filter_map(move |j| {
                let (vx, vy) = (chars[i], chars[j]);
                if !name_filter.admits(&vx.display_name, &vy.display_name) {
                    return None;
                }
                let total = degrees[i] + degrees[j];
                // Zero needs equal degree; skip the walk otherwise.
                if total == 0 || degrees[i] != degrees[j] {
                    return None;
                }
                if compact[i] != compact[j] {
                    return None;
                }
                Some(CandidatePair {
                    x: vx.id.clone(),
                    x_name: vx.display_name.clone(),
                    y: vy.id.clone(),
                    y_name: vy.display_name.clone(),
                    structure_error: 0.0,
                })
            })
        })
        .collect();
    CandidateSet { name_filter, pairs }
}

/// Structure errors of every unordered character pair, sorted by `(x, y)`.
pub fn all_structure_errors(bundle: &NetworkBundle) -> Vec<StructureError> {
    let characters = bundle.characters();
    let n_beta = bundle.subnetworks().len();
    let profiles: Vec<Profile> = characters
        .par_iter()
        .map(|v| profile(bundle, &v.id))
        .collect();
    (0..characters.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let characters = &characters;
            let profiles = &profiles;
            (i + 1..characters.len()).map(move |j| {
                let per = compare(&profiles[i], &profiles[j], n_beta);
                assemble(bundle, &characters[i].id, &characters[j].id, per)
            })
        })
        .collect()
}
