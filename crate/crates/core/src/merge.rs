//! Collapsing redundant character groups into a representative.
//!
//! Merging works on the 2-mode bundle. Each absorbed character's edges are
//! either dropped, when the representative already holds the same
//! `(relation type, entity, interval)` fact, or re-attached to the
//! representative. Facts are never lost: for every entity, the set of
//! distinct facts linking it to the group before the merge equals the set
//! linking it to the representative afterwards.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::error::MergeError;
use crate::graph::{NetworkBundle, RelationId, TemporalEdge, TimeInterval, VertexId};
use crate::structure::structure_error;
use crate::tap::RedundantGroupSet;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MergePolicy {
    /// Keep the lexicographically smallest id.
    #[default]
    SmallestId,
    /// Keep the member with most edges; ties go to the smallest id.
    MostEdges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Disposition {
    DropAsDuplicate,
    TransferToRepresentative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeDisposition {
    pub relation: RelationId,
    pub disposition: Disposition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbsorbedVertex {
    pub id: VertexId,
    /// Ordered by relation id.
    pub edges: Vec<EdgeDisposition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupPlan {
    pub representative: VertexId,
    pub absorbed: Vec<AbsorbedVertex>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MergePlan {
    pub policy: MergePolicy,
    /// Sorted by representative.
    pub groups: Vec<GroupPlan>,
    vertex_count: usize,
    edge_count: usize,
}

impl MergePlan {
    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Absorbed id -> representative id.
    pub fn mapping(&self) -> BTreeMap<VertexId, VertexId> {
        self.groups
            .iter()
            .flat_map(|g| {
                g.absorbed
                    .iter()
                    .map(move |a| (a.id.clone(), g.representative.clone()))
            })
            .collect()
    }

    pub fn removed_vertices(&self) -> usize {
        self.groups.iter().map(|g| g.absorbed.len()).sum()
    }

    fn count(&self, which: Disposition) -> usize {
        self.groups
            .iter()
            .flat_map(|g| &g.absorbed)
            .flat_map(|a| &a.edges)
            .filter(|d| d.disposition == which)
            .count()
    }
}

type Fact = (String, VertexId, TimeInterval);

fn fact(e: &TemporalEdge) -> Fact {
    (e.relation_type.clone(), e.entity.clone(), e.interval)
}

fn sorted_incident<'a>(bundle: &'a NetworkBundle, v: &'a VertexId) -> Vec<&'a TemporalEdge> {
    let mut edges: Vec<&TemporalEdge> = bundle.incident(v).filter(|e| &e.character == v).collect();
    edges.sort_by_key(|e| e.id);
    edges
}

/// Chooses a representative per group and a disposition for every edge of
/// every absorbed member. Groups with fewer than two members are ignored.
pub fn plan_merge(
    bundle: &NetworkBundle,
    groups: &RedundantGroupSet,
    policy: MergePolicy,
) -> Result<MergePlan, MergeError> {
    let mut seen: HashSet<&VertexId> = HashSet::new();
    for member in groups.groups.iter().flatten() {
        if bundle.character(member).is_err() {
            return Err(MergeError::InvalidMember(member.clone()));
        }
        if !seen.insert(member) {
            return Err(MergeError::OverlappingGroups(member.clone()));
        }
    }

    let mut plans = Vec::new();
    for group in groups.groups.iter().filter(|g| g.len() >= 2) {
        let mut members: Vec<&VertexId> = group.iter().collect();
        members.sort();
        let representative = match policy {
            MergePolicy::SmallestId => members[0],
            MergePolicy::MostEdges => *members
                .iter()
                .max_by(|a, b| bundle.degree(a).cmp(&bundle.degree(b)).then(b.cmp(a)))
                .expect("group is non-empty"),
        };
        let mut facts: HashSet<Fact> = sorted_incident(bundle, representative)
            .into_iter()
            .map(fact)
            .collect();
        let mut absorbed = Vec::new();
        for &member in members.iter().filter(|&&m| m != representative) {
            let edges = sorted_incident(bundle, member)
                .into_iter()
                .map(|e| EdgeDisposition {
                    relation: e.id,
                    // A transferred fact becomes the representative's, so a
                    // later copy of it is a duplicate.
                    disposition: if facts.insert(fact(e)) {
                        Disposition::TransferToRepresentative
                    } else {
                        Disposition::DropAsDuplicate
                    },
                })
                .collect();
            absorbed.push(AbsorbedVertex {
                id: member.clone(),
                edges,
            });
        }
        plans.push(GroupPlan {
            representative: representative.clone(),
            absorbed,
        });
    }
    plans.sort_by(|a, b| a.representative.cmp(&b.representative));
    Ok(MergePlan {
        policy,
        groups: plans,
        vertex_count: bundle.vertex_count(),
        edge_count: bundle.edge_count(),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MergeAudit {
    pub removed_vertices: usize,
    pub dropped_edges: usize,
    pub transferred_edges: usize,
    pub mapping: BTreeMap<VertexId, VertexId>,
}

#[derive(Debug, Clone)]
pub struct MergedNetwork {
    pub bundle: NetworkBundle,
    pub audit: MergeAudit,
}

impl MergedNetwork {
    /// Surviving id for `id`: its representative if absorbed, else itself.
    pub fn resolve<'a>(&'a self, id: &'a VertexId) -> &'a VertexId {
        self.audit.mapping.get(id).unwrap_or(id)
    }
}

fn check_fresh(bundle: &NetworkBundle, plan: &MergePlan) -> Result<(), MergeError> {
    if bundle.vertex_count() != plan.vertex_count || bundle.edge_count() != plan.edge_count {
        return Err(MergeError::StalePlan(format!(
            "planned against {} vertices / {} edges, bundle has {} / {}",
            plan.vertex_count,
            plan.edge_count,
            bundle.vertex_count(),
            bundle.edge_count()
        )));
    }
    for g in &plan.groups {
        if bundle.character(&g.representative).is_err() {
            return Err(MergeError::StalePlan(format!(
                "representative `{}` missing",
                g.representative
            )));
        }
        for a in &g.absorbed {
            if bundle.character(&a.id).is_err() {
                return Err(MergeError::StalePlan(format!(
                    "absorbed `{}` missing",
                    a.id
                )));
            }
            let actual: Vec<RelationId> = sorted_incident(bundle, &a.id)
                .iter()
                .map(|e| e.id)
                .collect();
            let planned: Vec<RelationId> = a.edges.iter().map(|d| d.relation).collect();
            if actual != planned {
                return Err(MergeError::StalePlan(format!(
                    "edges of `{}` changed since planning",
                    a.id
                )));
            }
        }
    }
    Ok(())
}

/// Builds the merged bundle. Vertex and relation ids are preserved;
/// transferred edges keep their relation id.
pub fn apply_merge(bundle: &NetworkBundle, plan: &MergePlan) -> Result<MergedNetwork, MergeError> {
    check_fresh(bundle, plan)?;
    let mapping = plan.mapping();
    let dispositions: HashMap<RelationId, Disposition> = plan
        .groups
        .iter()
        .flat_map(|g| &g.absorbed)
        .flat_map(|a| &a.edges)
        .map(|d| (d.relation, d.disposition))
        .collect();

    let mut merged = bundle.empty_like();
    for v in bundle.vertices() {
        if !mapping.contains_key(&v.id) {
            merged.add_vertex_with_id(v.id.clone(), v.kind, &v.type_label, &v.display_name)?;
        }
    }
    for e in bundle.edges() {
        let edge = match mapping.get(&e.character) {
            None => e.clone(),
            Some(rep) => match dispositions[&e.id] {
                Disposition::DropAsDuplicate => continue,
                Disposition::TransferToRepresentative => TemporalEdge {
                    character: rep.clone(),
                    ..e.clone()
                },
            },
        };
        merged.insert_edge(edge)?;
    }

    let audit = MergeAudit {
        removed_vertices: plan.removed_vertices(),
        dropped_edges: plan.count(Disposition::DropAsDuplicate),
        transferred_edges: plan.count(Disposition::TransferToRepresentative),
        mapping,
    };
    log::debug!(
        "merged {} groups: -{} vertices, {} edges dropped, {} transferred",
        plan.groups.len(),
        audit.removed_vertices,
        audit.dropped_edges,
        audit.transferred_edges
    );
    Ok(MergedNetwork {
        bundle: merged,
        audit,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    VertexCountMismatch {
        expected: usize,
        actual: usize,
    },
    AbsorbedSurvived {
        id: VertexId,
    },
    MissingRepresentative {
        id: VertexId,
    },
    DanglingEdge {
        relation: RelationId,
    },
    NeighborDegreeMismatch {
        entity: VertexId,
        expected: usize,
        actual: usize,
    },
    FactsChanged {
        representative: VertexId,
        entity: VertexId,
    },
    BystanderChanged {
        id: VertexId,
    },
    StructureUncomputable {
        x: VertexId,
        y: VertexId,
        reason: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::VertexCountMismatch { expected, actual } => {
                write!(
                    f,
                    "vertex count mismatch: expected {expected}, found {actual}"
                )
            }
            Violation::AbsorbedSurvived { id } => write!(f, "absorbed vertex `{id}` survived"),
            Violation::MissingRepresentative { id } => {
                write!(f, "representative `{id}` missing")
            }
            Violation::DanglingEdge { relation } => {
                write!(f, "edge {relation} has a missing endpoint")
            }
            Violation::NeighborDegreeMismatch {
                entity,
                expected,
                actual,
            } => write!(
                f,
                "neighbor degree mismatch at `{entity}`: expected {expected}, found {actual}"
            ),
            Violation::FactsChanged {
                representative,
                entity,
            } => write!(
                f,
                "facts between `{representative}` and `{entity}` differ from the group's"
            ),
            Violation::BystanderChanged { id } => {
                write!(f, "edges of unmerged character `{id}` changed")
            }
            Violation::StructureUncomputable { x, y, reason } => {
                write!(f, "structure error of `{x}`/`{y}` not computable: {reason}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn facts_by_entity<'a, I>(edges: I) -> BTreeMap<VertexId, BTreeSet<(String, TimeInterval)>>
where
    I: IntoIterator<Item = &'a TemporalEdge>,
{
    let mut out: BTreeMap<VertexId, BTreeSet<(String, TimeInterval)>> = BTreeMap::new();
    for e in edges {
        out.entry(e.entity.clone())
            .or_default()
            .insert((e.relation_type.clone(), e.interval));
    }
    out
}

fn edge_signature(bundle: &NetworkBundle, v: &VertexId) -> Vec<(RelationId, Fact)> {
    sorted_incident(bundle, v)
        .into_iter()
        .map(|e| (e.id, fact(e)))
        .collect()
}

/// Checks a merge result against the bundle it came from.
pub fn verify_merge(
    before: &NetworkBundle,
    after: &NetworkBundle,
    plan: &MergePlan,
) -> VerificationReport {
    let mut violations = Vec::new();
    let mapping = plan.mapping();

    let expected = before.vertex_count() - plan.removed_vertices();
    if after.vertex_count() != expected {
        violations.push(Violation::VertexCountMismatch {
            expected,
            actual: after.vertex_count(),
        });
    }
    for id in mapping.keys() {
        if after.contains_vertex(id) {
            violations.push(Violation::AbsorbedSurvived { id: id.clone() });
        }
    }
    for g in &plan.groups {
        if after.character(&g.representative).is_err() {
            violations.push(Violation::MissingRepresentative {
                id: g.representative.clone(),
            });
        }
    }
    for e in after.edges() {
        if !after.contains_vertex(&e.character) || !after.contains_vertex(&e.entity) {
            violations.push(Violation::DanglingEdge { relation: e.id });
        }
    }

    // Entity side: degree drops only by the planned duplicates.
    let dropped: HashSet<RelationId> = plan
        .groups
        .iter()
        .flat_map(|g| &g.absorbed)
        .flat_map(|a| &a.edges)
        .filter(|d| d.disposition == Disposition::DropAsDuplicate)
        .map(|d| d.relation)
        .collect();
    let mut expected_degree: BTreeMap<&VertexId, usize> = BTreeMap::new();
    for e in before.edges() {
        let slot = expected_degree.entry(&e.entity).or_insert(0);
        if !dropped.contains(&e.id) {
            *slot += 1;
        }
    }
    for (entity, expected) in expected_degree {
        let actual = after.degree(entity);
        if actual != expected {
            violations.push(Violation::NeighborDegreeMismatch {
                entity: entity.clone(),
                expected,
                actual,
            });
        }
    }

    // Group side: distinct facts per entity are conserved.
    for g in &plan.groups {
        let group_edges = std::iter::once(&g.representative)
            .chain(g.absorbed.iter().map(|a| &a.id))
            .flat_map(|v| sorted_incident(before, v));
        let pre = facts_by_entity(group_edges);
        let post = facts_by_entity(sorted_incident(after, &g.representative));
        let entities: BTreeSet<&VertexId> = pre.keys().chain(post.keys()).collect();
        for z in entities {
            if pre.get(z) != post.get(z) {
                violations.push(Violation::FactsChanged {
                    representative: g.representative.clone(),
                    entity: z.clone(),
                });
            }
        }
    }

    // Characters outside every group keep exactly their edges.
    let grouped: HashSet<&VertexId> = plan
        .groups
        .iter()
        .map(|g| &g.representative)
        .chain(mapping.keys())
        .collect();
    for v in before.characters() {
        if grouped.contains(&v.id) {
            continue;
        }
        if edge_signature(before, &v.id) != edge_signature(after, &v.id) {
            violations.push(Violation::BystanderChanged { id: v.id.clone() });
        }
    }

    let reps: Vec<&VertexId> = plan.groups.iter().map(|g| &g.representative).collect();
    for (i, x) in reps.iter().enumerate() {
        for y in &reps[i + 1..] {
            if let Err(e) = structure_error(after, x, y) {
                violations.push(Violation::StructureUncomputable {
                    x: (*x).clone(),
                    y: (*y).clone(),
                    reason: e.to_string(),
                });
            }
        }
    }

    VerificationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexKind;

    fn iv(s: i64, e: i64) -> TimeInterval {
        TimeInterval::new(s, e).unwrap()
    }

    /// Three characters each linked once to the same three entities.
    fn three_clones() -> NetworkBundle {
        let mut b = NetworkBundle::new();
        for v in ["v1", "v2", "v3"] {
            b.add_vertex_with_id(v, VertexKind::Character, "person", v)
                .unwrap();
        }
        for u in ["u1", "u2", "u3"] {
            b.add_vertex_with_id(u, VertexKind::Entity, "thing", u)
                .unwrap();
        }
        for v in ["v1", "v2", "v3"] {
            for u in ["u1", "u2", "u3"] {
                b.add_edge(&v.into(), &u.into(), "r", iv(2000, 2001))
                    .unwrap();
            }
        }
        b
    }

    fn groups(gs: &[&[&str]]) -> RedundantGroupSet {
        RedundantGroupSet {
            theta: 0.8,
            now: 2001,
            groups: gs
                .iter()
                .map(|g| g.iter().map(|&v| VertexId::from(v)).collect())
                .collect(),
        }
    }

    #[test]
    fn clones_collapse_to_one_character() {
        let b = three_clones();
        let plan =
            plan_merge(&b, &groups(&[&["v3", "v1", "v2"]]), MergePolicy::SmallestId).unwrap();
        assert_eq!(plan.groups[0].representative.as_str(), "v1");
        assert!(plan.groups[0]
            .absorbed
            .iter()
            .flat_map(|a| &a.edges)
            .all(|d| d.disposition == Disposition::DropAsDuplicate));
        let merged = apply_merge(&b, &plan).unwrap();
        assert_eq!(merged.bundle.character_count(), 1);
        assert_eq!(merged.bundle.vertex_count(), 4);
        assert_eq!(merged.bundle.edge_count(), 3);
        assert_eq!(merged.audit.removed_vertices, 2);
        assert_eq!(merged.audit.dropped_edges, 6);
        assert_eq!(merged.resolve(&"v2".into()).as_str(), "v1");
        assert!(verify_merge(&b, &merged.bundle, &plan).is_ok());
    }

    #[test]
    fn near_duplicate_edges_transfer() {
        let mut b = NetworkBundle::new();
        let x = b
            .add_vertex_with_id("a", VertexKind::Character, "person", "A")
            .unwrap();
        let y = b
            .add_vertex_with_id("b", VertexKind::Character, "person", "B")
            .unwrap();
        let z = b
            .add_vertex_with_id("z", VertexKind::Entity, "institution", "Z")
            .unwrap();
        b.add_edge(&x, &z, "study", iv(2000, 2005)).unwrap();
        b.add_edge(&y, &z, "study", iv(2000, 2000)).unwrap();
        b.add_edge(&y, &z, "study", iv(2000, 2000)).unwrap();
        let plan = plan_merge(&b, &groups(&[&["a", "b"]]), MergePolicy::SmallestId).unwrap();
        let d: Vec<_> = plan.groups[0].absorbed[0]
            .edges
            .iter()
            .map(|d| d.disposition)
            .collect();
        assert_eq!(
            d,
            vec![
                Disposition::TransferToRepresentative,
                Disposition::DropAsDuplicate
            ]
        );
        let merged = apply_merge(&b, &plan).unwrap();
        assert_eq!(merged.bundle.degree(&x), 2);
        assert!(verify_merge(&b, &merged.bundle, &plan).is_ok());
    }

    #[test]
    fn empty_group_set_is_a_no_op() {
        let b = three_clones();
        let plan = plan_merge(&b, &groups(&[]), MergePolicy::SmallestId).unwrap();
        assert!(plan.is_empty());
        let merged = apply_merge(&b, &plan).unwrap();
        assert_eq!(merged.bundle.vertices(), b.vertices());
        assert_eq!(merged.bundle.edges(), b.edges());
        assert!(verify_merge(&b, &merged.bundle, &plan).is_ok());
    }

    #[test]
    fn overlapping_and_invalid_groups_are_rejected() {
        let b = three_clones();
        assert!(matches!(
            plan_merge(
                &b,
                &groups(&[&["v1", "v2"], &["v2", "v3"]]),
                MergePolicy::SmallestId
            ),
            Err(MergeError::OverlappingGroups(_))
        ));
        assert!(matches!(
            plan_merge(&b, &groups(&[&["v1", "u1"]]), MergePolicy::SmallestId),
            Err(MergeError::InvalidMember(_))
        ));
    }

    #[test]
    fn stale_plan_is_detected() {
        let mut b = three_clones();
        let plan = plan_merge(&b, &groups(&[&["v1", "v2"]]), MergePolicy::SmallestId).unwrap();
        b.add_edge(&"v2".into(), &"u1".into(), "r", iv(1990, 1991))
            .unwrap();
        assert!(matches!(
            apply_merge(&b, &plan),
            Err(MergeError::StalePlan(_))
        ));
    }

    #[test]
    fn corrupted_result_is_reported() {
        let b = three_clones();
        let plan = plan_merge(&b, &groups(&[&["v1", "v2"]]), MergePolicy::SmallestId).unwrap();
        let merged = apply_merge(&b, &plan).unwrap();
        // rebuild the merged bundle without its first edge
        let mut corrupted = merged.bundle.empty_like();
        for v in merged.bundle.vertices() {
            corrupted
                .add_vertex_with_id(v.id.clone(), v.kind, &v.type_label, &v.display_name)
                .unwrap();
        }
        for e in merged.bundle.edges().into_iter().skip(1) {
            corrupted.insert_edge(e.clone()).unwrap();
        }
        let report = verify_merge(&b, &corrupted, &plan);
        assert!(!report.is_ok());
        assert!(report
            .violations
            .iter()
            .any(|v| v.to_string().starts_with("neighbor degree mismatch")));
    }

    #[test]
    fn most_edges_policy() {
        let mut b = three_clones();
        b.add_edge(&"v3".into(), &"u1".into(), "r", iv(1990, 1991))
            .unwrap();
        let plan = plan_merge(&b, &groups(&[&["v1", "v3"]]), MergePolicy::MostEdges).unwrap();
        assert_eq!(plan.groups[0].representative.as_str(), "v3");
        let plan = plan_merge(&b, &groups(&[&["v1", "v2"]]), MergePolicy::MostEdges).unwrap();
        assert_eq!(plan.groups[0].representative.as_str(), "v1");
    }

    #[test]
    fn merging_again_with_the_same_groups_is_a_no_op() {
        let b = three_clones();
        let g = groups(&[&["v1", "v2", "v3"]]);
        let plan = plan_merge(&b, &g, MergePolicy::SmallestId).unwrap();
        let once = apply_merge(&b, &plan).unwrap().bundle;
        let again = plan_merge(&once, &g.restrict_to(&once), MergePolicy::SmallestId).unwrap();
        assert!(again.is_empty());
        let twice = apply_merge(&once, &again).unwrap().bundle;
        assert_eq!(twice.vertices(), once.vertices());
        assert_eq!(twice.edges(), once.edges());
    }
}
