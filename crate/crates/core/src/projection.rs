//! Character–character (1-mode) projection of a bundle.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::graph::{NetworkBundle, RelationId, VertexId, VertexKind};

/// One co-occurrence of two characters at an entity, induced by one edge of
/// each. `a < b` always; `via` lists `a`'s edge first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CharacterRelation {
    pub a: VertexId,
    pub b: VertexId,
    pub relation_type: String,
    pub entity: VertexId,
    pub via: (RelationId, RelationId),
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct OneModeNetwork {
    characters: Vec<VertexId>,
    relations: Vec<CharacterRelation>,
}

impl OneModeNetwork {
    pub fn characters(&self) -> &[VertexId] {
        &self.characters
    }

    pub fn relations(&self) -> &[CharacterRelation] {
        &self.relations
    }

    /// Number of relations between `x` and `y`, regardless of argument order.
    pub fn multiplicity(&self, x: &VertexId, y: &VertexId) -> usize {
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        self.relations
            .iter()
            .filter(|r| &r.a == a && &r.b == b)
            .count()
    }

    /// Distinct neighbor pairs with their multiplicity.
    pub fn pair_counts(&self) -> BTreeMap<(VertexId, VertexId), usize> {
        let mut out = BTreeMap::new();
        for r in &self.relations {
            *out.entry((r.a.clone(), r.b.clone())).or_insert(0) += 1;
        }
        out
    }
}

/// Projects the 2-mode bundle onto its characters.
///
/// Within each subnetwork, for every entity and every pair of edges from two
/// distinct characters to it, one relation is emitted.
pub fn project_one_mode(bundle: &NetworkBundle) -> OneModeNetwork {
    let characters = bundle
        .characters()
        .into_iter()
        .map(|v| v.id.clone())
        .collect();
    let mut relations = Vec::new();
    for net in bundle.subnetworks() {
        // entity -> edges, in insertion order
        let mut by_entity: BTreeMap<&VertexId, Vec<_>> = BTreeMap::new();
        for e in net.edges() {
            by_entity.entry(&e.entity).or_default().push(e);
        }
        for (entity, edges) in by_entity {
            debug_assert!(bundle
                .vertex(entity)
                .is_some_and(|v| v.kind == VertexKind::Entity));
            for (i, p) in edges.iter().enumerate() {
                for q in &edges[i + 1..] {
                    if p.character == q.character {
                        continue;
                    }
                    let (first, second) = if p.character < q.character {
                        (p, q)
                    } else {
                        (q, p)
                    };
                    relations.push(CharacterRelation {
                        a: first.character.clone(),
                        b: second.character.clone(),
                        relation_type: net.relation_type().to_owned(),
                        entity: entity.clone(),
                        via: (first.id, second.id),
                    });
                }
            }
        }
    }
    relations.sort_by(|x, y| {
        (&x.a, &x.b, &x.relation_type, &x.entity, x.via).cmp(&(
            &y.a,
            &y.b,
            &y.relation_type,
            &y.entity,
            y.via,
        ))
    });
    OneModeNetwork {
        characters,
        relations,
    }
}
