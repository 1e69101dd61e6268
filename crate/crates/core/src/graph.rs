//! Heterogeneous temporal 2-mode networks.
//!
//! A [`NetworkBundle`] owns a shared vertex registry and one
//! [`TemporalActivityNetwork`] per relation type. Every edge joins a
//! character vertex to an entity vertex and carries a closed time interval.
//! Parallel edges between the same pair are kept apart by their
//! [`RelationId`].

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Integer time point. Years in every dataset seen so far.
pub type Time = i64;

/// Largest accepted time point. Keeps every weight product well inside `u128`.
pub const MAX_TIME: Time = 1_000_000;

/// Closed activity interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawInterval", into = "RawInterval")]
pub struct TimeInterval {
    start: Time,
    end: Time,
}

#[derive(Serialize, Deserialize)]
struct RawInterval {
    start: Time,
    end: Time,
}

impl TryFrom<RawInterval> for TimeInterval {
    type Error = GraphError;

    fn try_from(raw: RawInterval) -> Result<Self, Self::Error> {
        TimeInterval::new(raw.start, raw.end)
    }
}

impl From<TimeInterval> for RawInterval {
    fn from(i: TimeInterval) -> Self {
        RawInterval {
            start: i.start,
            end: i.end,
        }
    }
}

impl TimeInterval {
    pub fn new(start: Time, end: Time) -> Result<Self, GraphError> {
        if !(0..=MAX_TIME).contains(&start) || !(0..=MAX_TIME).contains(&end) {
            return Err(GraphError::TimeOutOfRange { start, end });
        }
        if end < start {
            return Err(GraphError::InvertedInterval { start, end });
        }
        Ok(TimeInterval { start, end })
    }

    pub fn start(&self) -> Time {
        self.start
    }

    pub fn end(&self) -> Time {
        self.end
    }

    /// Returns the interval moved by `delta` time units, or `None` if that
    /// leaves the accepted time range.
    pub fn shifted(&self, delta: Time) -> Option<Self> {
        TimeInterval::new(self.start.checked_add(delta)?, self.end.checked_add(delta)?).ok()
    }
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// Opaque, stable vertex identifier. Ordering is lexicographic on the
/// underlying string and is what every deterministic output sorts by.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(String);

impl VertexId {
    pub fn new(id: impl Into<String>) -> Self {
        VertexId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_owned())
    }
}

impl From<String> for VertexId {
    fn from(s: String) -> Self {
        VertexId(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Character,
    Entity,
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexKind::Character => f.write_str("character"),
            VertexKind::Entity => f.write_str("entity"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: VertexId,
    pub kind: VertexKind,
    pub type_label: String,
    pub display_name: String,
}

/// Unique relation (edge) identifier, rendered as `r<n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelationId(pub u64);

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// One timed activity fact between a character and an entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalEdge {
    pub id: RelationId,
    pub character: VertexId,
    pub entity: VertexId,
    pub relation_type: String,
    pub interval: TimeInterval,
}

/// All edges of a single relation type, with a per-vertex incidence index.
#[derive(Debug, Clone)]
pub struct TemporalActivityNetwork {
    relation_type: String,
    edges: Vec<TemporalEdge>,
    incidence: HashMap<VertexId, Vec<usize>>,
}

impl TemporalActivityNetwork {
    fn new(relation_type: &str) -> Self {
        TemporalActivityNetwork {
            relation_type: relation_type.to_owned(),
            edges: Vec::new(),
            incidence: HashMap::new(),
        }
    }

    fn push(&mut self, edge: TemporalEdge) {
        let ix = self.edges.len();
        self.incidence
            .entry(edge.character.clone())
            .or_default()
            .push(ix);
        self.incidence
            .entry(edge.entity.clone())
            .or_default()
            .push(ix);
        self.edges.push(edge);
    }

    pub fn relation_type(&self) -> &str {
        &self.relation_type
    }

    /// Edges in insertion order.
    pub fn edges(&self) -> &[TemporalEdge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges touching `vertex`, in insertion order. Empty for vertices that
    /// do not take part in this relation type.
    pub fn incident<'a>(
        &'a self,
        vertex: &VertexId,
    ) -> impl Iterator<Item = &'a TemporalEdge> + 'a {
        self.incidence
            .get(vertex)
            .map(|ixs| ixs.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |&ix| &self.edges[ix])
    }

    pub fn degree(&self, vertex: &VertexId) -> usize {
        self.incidence.get(vertex).map_or(0, Vec::len)
    }

    pub fn contains(&self, vertex: &VertexId) -> bool {
        self.incidence.contains_key(vertex)
    }
}

/// A heterogeneous temporal network: one subnetwork per declared relation
/// type over a shared vertex registry.
///
/// Construction is single-writer through `&mut self`. Once built, a bundle is
/// only ever read; merging produces a fresh bundle.
#[derive(Debug, Clone, Default)]
pub struct NetworkBundle {
    vertices: Vec<Vertex>,
    index: HashMap<VertexId, usize>,
    subnetworks: Vec<TemporalActivityNetwork>,
    declared_types: Vec<String>,
    label_kinds: HashMap<String, VertexKind>,
    relation_ids: HashSet<RelationId>,
    next_vertex: u64,
    next_relation: u64,
}

impl NetworkBundle {
    pub fn new() -> Self {
        Self::default()
    }

    /// Creates a bundle with relation types declared up front, in order.
    pub fn with_relation_types<I, S>(types: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut bundle = Self::new();
        for t in types {
            bundle.declare_relation_type(t.as_ref())?;
        }
        Ok(bundle)
    }

    /// A bundle with the same relation types, type labels and id counters
    /// but no vertices or edges.
    pub fn empty_like(&self) -> Self {
        NetworkBundle {
            vertices: Vec::new(),
            index: HashMap::new(),
            subnetworks: self
                .subnetworks
                .iter()
                .map(|n| TemporalActivityNetwork::new(&n.relation_type))
                .collect(),
            declared_types: self.declared_types.clone(),
            label_kinds: self.label_kinds.clone(),
            relation_ids: HashSet::new(),
            next_vertex: self.next_vertex,
            next_relation: self.next_relation,
        }
    }

    /// Declares a relation type. Re-declaring an existing one is a no-op.
    pub fn declare_relation_type(&mut self, relation_type: &str) -> Result<(), GraphError> {
        if relation_type.is_empty() {
            return Err(GraphError::EmptyLabel);
        }
        if self.subnetwork(relation_type).is_none() {
            self.subnetworks
                .push(TemporalActivityNetwork::new(relation_type));
        }
        Ok(())
    }

    /// Declares a vertex type label for `kind` without adding any vertex.
    pub fn declare_type_label(&mut self, kind: VertexKind, label: &str) -> Result<(), GraphError> {
        self.claim_label(kind, label)?;
        if !self.declared_types.iter().any(|t| t == label) {
            self.declared_types.push(label.to_owned());
        }
        Ok(())
    }

    fn claim_label(&mut self, kind: VertexKind, label: &str) -> Result<(), GraphError> {
        if label.is_empty() {
            return Err(GraphError::EmptyLabel);
        }
        match self.label_kinds.get(label) {
            Some(&k) if k != kind => Err(GraphError::LabelKindConflict {
                label: label.to_owned(),
                existing: k,
            }),
            Some(_) => Ok(()),
            None => {
                self.label_kinds.insert(label.to_owned(), kind);
                Ok(())
            }
        }
    }

    /// Adds a vertex under a freshly generated id.
    pub fn add_vertex(
        &mut self,
        kind: VertexKind,
        type_label: &str,
        display_name: &str,
    ) -> Result<VertexId, GraphError> {
        let id = loop {
            self.next_vertex += 1;
            let candidate = VertexId(format!("v{}", self.next_vertex));
            if !self.index.contains_key(&candidate) {
                break candidate;
            }
        };
        self.add_vertex_with_id(id, kind, type_label, display_name)
    }

    /// Adds a vertex under a caller-chosen id.
    pub fn add_vertex_with_id(
        &mut self,
        id: impl Into<VertexId>,
        kind: VertexKind,
        type_label: &str,
        display_name: &str,
    ) -> Result<VertexId, GraphError> {
        let id = id.into();
        if id.as_str().is_empty() {
            return Err(GraphError::EmptyLabel);
        }
        if self.index.contains_key(&id) {
            return Err(GraphError::DuplicateVertex(id));
        }
        self.claim_label(kind, type_label)?;
        self.index.insert(id.clone(), self.vertices.len());
        self.vertices.push(Vertex {
            id: id.clone(),
            kind,
            type_label: type_label.to_owned(),
            display_name: display_name.to_owned(),
        });
        Ok(id)
    }

    /// Appends an edge to the subnetwork of `relation_type`, declaring that
    /// relation type if it is new.
    pub fn add_edge(
        &mut self,
        character: &VertexId,
        entity: &VertexId,
        relation_type: &str,
        interval: TimeInterval,
    ) -> Result<RelationId, GraphError> {
        let id = loop {
            self.next_relation += 1;
            let candidate = RelationId(self.next_relation);
            if !self.relation_ids.contains(&candidate) {
                break candidate;
            }
        };
        self.insert_edge(TemporalEdge {
            id,
            character: character.clone(),
            entity: entity.clone(),
            relation_type: relation_type.to_owned(),
            interval,
        })?;
        Ok(id)
    }

    /// Inserts an edge that already carries its relation id.
    pub fn insert_edge(&mut self, edge: TemporalEdge) -> Result<(), GraphError> {
        self.expect_kind(&edge.character, VertexKind::Character)?;
        self.expect_kind(&edge.entity, VertexKind::Entity)?;
        // Re-validate: the fields are public.
        TimeInterval::new(edge.interval.start(), edge.interval.end())?;
        if self.relation_ids.contains(&edge.id) {
            return Err(GraphError::DuplicateRelation(edge.id));
        }
        self.declare_relation_type(&edge.relation_type)?;
        self.relation_ids.insert(edge.id);
        self.next_relation = self.next_relation.max(edge.id.0);
        let net = self
            .subnetworks
            .iter_mut()
            .find(|n| n.relation_type == edge.relation_type)
            .expect("relation type declared above");
        net.push(edge);
        Ok(())
    }

    fn expect_kind(&self, id: &VertexId, kind: VertexKind) -> Result<&Vertex, GraphError> {
        let v = self
            .vertex(id)
            .ok_or_else(|| GraphError::UnknownVertex(id.clone()))?;
        if v.kind != kind {
            return Err(GraphError::KindMismatch {
                id: id.clone(),
                expected: kind,
                found: v.kind,
            });
        }
        Ok(v)
    }

    /// Looks up a vertex that must be a character.
    pub fn character(&self, id: &VertexId) -> Result<&Vertex, GraphError> {
        self.expect_kind(id, VertexKind::Character)
    }

    pub fn vertex(&self, id: &VertexId) -> Option<&Vertex> {
        self.index.get(id).map(|&ix| &self.vertices[ix])
    }

    pub fn contains_vertex(&self, id: &VertexId) -> bool {
        self.index.contains_key(id)
    }

    /// Vertices in insertion order.
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Character vertices in id order.
    pub fn characters(&self) -> Vec<&Vertex> {
        let mut out: Vec<&Vertex> = self
            .vertices
            .iter()
            .filter(|v| v.kind == VertexKind::Character)
            .collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    pub fn character_count(&self) -> usize {
        self.vertices
            .iter()
            .filter(|v| v.kind == VertexKind::Character)
            .count()
    }

    /// Subnetworks in relation-type declaration order.
    pub fn subnetworks(&self) -> &[TemporalActivityNetwork] {
        &self.subnetworks
    }

    pub fn subnetwork(&self, relation_type: &str) -> Option<&TemporalActivityNetwork> {
        self.subnetworks
            .iter()
            .find(|n| n.relation_type == relation_type)
    }

    /// The relation label set B, in declaration order.
    pub fn relation_types(&self) -> Vec<&str> {
        self.subnetworks.iter().map(|n| n.relation_type()).collect()
    }

    /// The vertex label set A: every label carried by a vertex or declared.
    pub fn type_labels(&self) -> BTreeSet<&str> {
        self.vertices
            .iter()
            .map(|v| v.type_label.as_str())
            .chain(self.declared_types.iter().map(String::as_str))
            .collect()
    }

    /// Every edge of every subnetwork, ordered by relation id.
    pub fn edges(&self) -> Vec<&TemporalEdge> {
        let mut out: Vec<&TemporalEdge> = self
            .subnetworks
            .iter()
            .flat_map(|n| n.edges.iter())
            .collect();
        out.sort_by_key(|e| e.id);
        out
    }

    pub fn edge_count(&self) -> usize {
        self.subnetworks.iter().map(|n| n.edges.len()).sum()
    }

    /// Edges incident to `vertex` across all subnetworks, ordered by
    /// subnetwork then insertion.
    pub fn incident<'a>(
        &'a self,
        vertex: &'a VertexId,
    ) -> impl Iterator<Item = &'a TemporalEdge> + 'a {
        self.subnetworks
            .iter()
            .flat_map(move |n| n.incident(vertex))
    }

    pub fn degree(&self, vertex: &VertexId) -> usize {
        self.subnetworks.iter().map(|n| n.degree(vertex)).sum()
    }

    /// Latest end time over all edges.
    pub fn max_end(&self) -> Option<Time> {
        self.subnetworks
            .iter()
            .flat_map(|n| n.edges.iter())
            .map(|e| e.interval.end())
            .max()
    }

    /// Checks the heterogeneity requirement: at least two vertex type labels
    /// and at least one relation type.
    pub fn validate(&self) -> Result<(), GraphError> {
        let vertex_types = self.type_labels().len();
        let relation_types = self.subnetworks.len();
        if vertex_types < 2 || relation_types < 1 {
            return Err(GraphError::NotHeterogeneous {
                vertex_types,
                relation_types,
            });
        }
        Ok(())
    }
}
