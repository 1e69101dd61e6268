//! Loading transaction-activity records into a [`NetworkBundle`] and
//! exporting bundles back out.
//!
//! Records are UTF-8 CSV with the exact header
//! `character_id,character_name,entity_name,entity_type,relation_type,start,end`.
//! A blank `character_id` keys the character by its display name. Entities are
//! keyed by `(entity_name, entity_type)` and receive the id `type/name`.
//! Every accepted row becomes one edge; identical rows become parallel edges.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GraphError, IngestError};
use crate::graph::{NetworkBundle, Time, TimeInterval, VertexId, VertexKind, MAX_TIME};

pub const RECORDS_HEADER: &str =
    "character_id,character_name,entity_name,entity_type,relation_type,start,end";

/// Type label given to every character vertex created by the loader.
pub const CHARACTER_TYPE: &str = "person";

const FIELD_NAMES: [&str; 7] = [
    "character_id",
    "character_name",
    "entity_name",
    "entity_type",
    "relation_type",
    "start",
    "end",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransactionRecord {
    pub character_id: Option<String>,
    pub character_name: String,
    pub entity_name: String,
    pub entity_type: String,
    pub relation_type: String,
    pub start: Time,
    pub end: Time,
}

impl TransactionRecord {
    pub fn character_key(&self) -> &str {
        self.character_id
            .as_deref()
            .unwrap_or(self.character_name.as_str())
    }

    fn from_fields(fields: &csv::StringRecord) -> Result<Self, String> {
        if fields.len() != FIELD_NAMES.len() {
            return Err(format!(
                "expected {} fields, found {}",
                FIELD_NAMES.len(),
                fields.len()
            ));
        }
        for (ix, name) in FIELD_NAMES.iter().enumerate().skip(1) {
            if fields[ix].is_empty() {
                return Err(format!("empty field `{name}`"));
            }
        }
        let parse = |ix: usize| -> Result<Time, String> {
            fields[ix]
                .parse::<Time>()
                .map_err(|_| format!("invalid {} `{}`", FIELD_NAMES[ix], &fields[ix]))
        };
        let start = parse(5)?;
        let end = parse(6)?;
        if !(0..=MAX_TIME).contains(&start) || !(0..=MAX_TIME).contains(&end) {
            return Err("time out of range".into());
        }
        if end < start {
            return Err("inverted interval".into());
        }
        Ok(TransactionRecord {
            character_id: Some(fields[0].to_owned()).filter(|s| !s.is_empty()),
            character_name: fields[1].to_owned(),
            entity_name: fields[2].to_owned(),
            entity_type: fields[3].to_owned(),
            relation_type: fields[4].to_owned(),
            start,
            end,
        })
    }
}

/// Optional dataset declaration accompanying a records file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub relation_types: Vec<String>,
    #[serde(default)]
    pub entity_types: Vec<String>,
    #[serde(default = "default_time_unit")]
    pub time_unit: String,
    #[serde(default)]
    pub now: Option<Time>,
}

fn default_time_unit() -> String {
    "year".to_owned()
}

impl DatasetManifest {
    pub fn new<I, S>(relation_types: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        DatasetManifest {
            relation_types: relation_types.into_iter().map(Into::into).collect(),
            entity_types: Vec::new(),
            time_unit: default_time_unit(),
            now: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.relation_types.is_empty() {
            return Err("relation_types must not be empty".into());
        }
        for list in [&self.relation_types, &self.entity_types] {
            let mut seen = HashSet::new();
            for label in list {
                if label.is_empty() {
                    return Err("empty label".into());
                }
                if !seen.insert(label) {
                    return Err(format!("duplicate label `{label}`"));
                }
            }
        }
        if self.entity_types.iter().any(|t| t == CHARACTER_TYPE) {
            return Err(format!("`{CHARACTER_TYPE}` is reserved for characters"));
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
        let manifest: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| IngestError::Manifest {
                path: path.to_owned(),
                reason: e.to_string(),
            })?;
        manifest
            .validate()
            .map_err(|reason| IngestError::Manifest {
                path: path.to_owned(),
                reason,
            })?;
        Ok(manifest)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Fail on the first bad row or undeclared relation type instead of
    /// skipping and reporting it.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedRow {
    /// 1-based line number in the input, header included.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub records: usize,
    pub loaded: usize,
    pub rejected: Vec<RejectedRow>,
    /// Relation types seen in the data but absent from the manifest.
    pub discovered_relation_types: Vec<String>,
    /// Entity types seen in the data but absent from the manifest.
    pub discovered_entity_types: Vec<String>,
    pub characters: usize,
    pub entities: usize,
}

/// Entity vertex id for a `(name, type)` key.
pub fn entity_key(entity_type: &str, entity_name: &str) -> VertexId {
    VertexId::new(format!("{entity_type}/{entity_name}"))
}

/// Loads records (and optionally a manifest) from disk.
pub fn load(
    records_path: &Path,
    manifest_path: Option<&Path>,
    options: LoadOptions,
) -> Result<(NetworkBundle, LoadReport), IngestError> {
    let manifest = manifest_path.map(DatasetManifest::read).transpose()?;
    let file = File::open(records_path).map_err(|e| IngestError::io(records_path, e))?;
    load_from_reader(file, manifest.as_ref(), options).map_err(|e| match e {
        IngestError::Header {
            found, expected, ..
        } => IngestError::Header {
            path: records_path.to_owned(),
            found,
            expected,
        },
        other => other,
    })
}

pub fn load_from_reader<R: Read>(
    reader: R,
    manifest: Option<&DatasetManifest>,
    options: LoadOptions,
) -> Result<(NetworkBundle, LoadReport), IngestError> {
    let mut bundle = NetworkBundle::new();
    let mut declared_relations: HashSet<&str> = HashSet::new();
    let mut declared_entities: HashSet<&str> = HashSet::new();
    if let Some(m) = manifest {
        m.validate().map_err(|reason| IngestError::Manifest {
            path: "<manifest>".into(),
            reason,
        })?;
        for t in &m.relation_types {
            bundle.declare_relation_type(t)?;
            declared_relations.insert(t);
        }
        bundle.declare_type_label(VertexKind::Character, CHARACTER_TYPE)?;
        for t in &m.entity_types {
            bundle.declare_type_label(VertexKind::Entity, t)?;
            declared_entities.insert(t);
        }
    }

    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut report = LoadReport::default();
    let mut rows = csv.records();

    match rows.next() {
        None => return Ok((bundle, report)),
        Some(header) => {
            let header = header?;
            let found = header.iter().collect::<Vec<_>>().join(",");
            if found != RECORDS_HEADER {
                return Err(IngestError::Header {
                    path: "<input>".into(),
                    found,
                    expected: RECORDS_HEADER,
                });
            }
        }
    }

    for row in rows {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        report.records += 1;
        let outcome = TransactionRecord::from_fields(&row).and_then(|rec| {
            if !declared_relations.contains(rec.relation_type.as_str()) {
                if options.strict && manifest.is_some() {
                    return Err(format!("undeclared relation type `{}`", rec.relation_type));
                }
                if !report
                    .discovered_relation_types
                    .contains(&rec.relation_type)
                {
                    report
                        .discovered_relation_types
                        .push(rec.relation_type.clone());
                }
            }
            if !declared_entities.contains(rec.entity_type.as_str())
                && !report.discovered_entity_types.contains(&rec.entity_type)
            {
                report.discovered_entity_types.push(rec.entity_type.clone());
            }
            insert_record(&mut bundle, &rec).map_err(|e| e.to_string())
        });
        match outcome {
            Ok(()) => report.loaded += 1,
            Err(reason) if options.strict => return Err(IngestError::Row { line, reason }),
            Err(reason) => {
                log::warn!("line {line}: {reason}");
                report.rejected.push(RejectedRow { line, reason });
            }
        }
    }
    report.characters = bundle.character_count();
    report.entities = bundle.vertex_count() - report.characters;
    Ok((bundle, report))
}

fn insert_record(bundle: &mut NetworkBundle, rec: &TransactionRecord) -> Result<(), GraphError> {
    let interval = TimeInterval::new(rec.start, rec.end)?;
    if rec.entity_type == CHARACTER_TYPE {
        return Err(GraphError::LabelKindConflict {
            label: rec.entity_type.clone(),
            existing: VertexKind::Character,
        });
    }
    let character = VertexId::new(rec.character_key());
    let entity = entity_key(&rec.entity_type, &rec.entity_name);
    if character == entity {
        return Err(GraphError::KindMismatch {
            id: entity,
            expected: VertexKind::Entity,
            found: VertexKind::Character,
        });
    }
    // Validate both endpoints before mutating so a rejected row leaves no trace.
    for (id, kind) in [
        (&character, VertexKind::Character),
        (&entity, VertexKind::Entity),
    ] {
        if let Some(v) = bundle.vertex(id) {
            if v.kind != kind {
                return Err(GraphError::KindMismatch {
                    id: id.clone(),
                    expected: kind,
                    found: v.kind,
                });
            }
        }
    }
    if !bundle.contains_vertex(&character) {
        bundle.add_vertex_with_id(
            character.clone(),
            VertexKind::Character,
            CHARACTER_TYPE,
            &rec.character_name,
        )?;
    }
    if !bundle.contains_vertex(&entity) {
        bundle.add_vertex_with_id(
            entity.clone(),
            VertexKind::Entity,
            &rec.entity_type,
            &rec.entity_name,
        )?;
    }
    bundle.add_edge(&character, &entity, &rec.relation_type, interval)?;
    Ok(())
}

/// Flattens a bundle into records, ordered by relation id. Character ids are
/// always written so identity survives a reload.
pub fn to_records(bundle: &NetworkBundle) -> Vec<TransactionRecord> {
    bundle
        .edges()
        .into_iter()
        .map(|e| {
            let c = bundle.vertex(&e.character).expect("edge endpoint exists");
            let z = bundle.vertex(&e.entity).expect("edge endpoint exists");
            TransactionRecord {
                character_id: Some(c.id.to_string()),
                character_name: c.display_name.clone(),
                entity_name: z.display_name.clone(),
                entity_type: z.type_label.clone(),
                relation_type: e.relation_type.clone(),
                start: e.interval.start(),
                end: e.interval.end(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    RecordsCsv,
    GraphJson,
    Dot,
}

impl ExportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ExportFormat::RecordsCsv => "csv",
            ExportFormat::GraphJson => "json",
            ExportFormat::Dot => "dot",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "records-csv" => Ok(ExportFormat::RecordsCsv),
            "graph-json" => Ok(ExportFormat::GraphJson),
            "dot" => Ok(ExportFormat::Dot),
            other => Err(format!(
                "unknown format `{other}` (expected records-csv, graph-json or dot)"
            )),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::RecordsCsv => "records-csv",
            ExportFormat::GraphJson => "graph-json",
            ExportFormat::Dot => "dot",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: Vec<GraphVertex>,
    pub edges: Vec<GraphEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphVertex {
    pub id: VertexId,
    pub kind: VertexKind,
    #[serde(rename = "type")]
    pub type_label: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub id: String,
    pub character: VertexId,
    pub entity: VertexId,
    pub relation_type: String,
    pub start: Time,
    pub end: Time,
}

pub fn graph_document(bundle: &NetworkBundle) -> GraphDocument {
    GraphDocument {
        vertices: bundle
            .vertices()
            .iter()
            .map(|v| GraphVertex {
                id: v.id.clone(),
                kind: v.kind,
                type_label: v.type_label.clone(),
                name: v.display_name.clone(),
            })
            .collect(),
        edges: bundle
            .edges()
            .into_iter()
            .map(|e| GraphEdge {
                id: e.id.to_string(),
                character: e.character.clone(),
                entity: e.entity.clone(),
                relation_type: e.relation_type.clone(),
                start: e.interval.start(),
                end: e.interval.end(),
            })
            .collect(),
    }
}

/// Writes records in the loader's CSV layout.
pub fn write_records<W: Write>(records: &[TransactionRecord], out: W) -> Result<(), IngestError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(FIELD_NAMES)?;
    for r in records {
        let start = r.start.to_string();
        let end = r.end.to_string();
        w.write_record([
            r.character_id.as_deref().unwrap_or(""),
            &r.character_name,
            &r.entity_name,
            &r.entity_type,
            &r.relation_type,
            &start,
            &end,
        ])?;
    }
    w.flush().map_err(|e| IngestError::io("<output>", e))?;
    Ok(())
}

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn write_dot<W: Write>(bundle: &NetworkBundle, mut out: W) -> io::Result<()> {
    writeln!(out, "graph activity {{")?;
    for v in bundle.vertices() {
        let shape = match v.kind {
            VertexKind::Character => "ellipse",
            VertexKind::Entity => "box",
        };
        writeln!(
            out,
            "  {} [label={}, shape={}, type={}];",
            dot_quote(v.id.as_str()),
            dot_quote(&v.display_name),
            shape,
            dot_quote(&v.type_label)
        )?;
    }
    for e in bundle.edges() {
        let label = format!("{} {}", e.relation_type, e.interval);
        writeln!(
            out,
            "  {} -- {} [id={}, label={}];",
            dot_quote(e.character.as_str()),
            dot_quote(e.entity.as_str()),
            dot_quote(&e.id.to_string()),
            dot_quote(&label)
        )?;
    }
    writeln!(out, "}}")
}

pub fn export<W: Write>(
    bundle: &NetworkBundle,
    format: ExportFormat,
    mut out: W,
) -> Result<(), IngestError> {
    match format {
        ExportFormat::RecordsCsv => write_records(&to_records(bundle), out),
        ExportFormat::GraphJson => {
            serde_json::to_writer_pretty(&mut out, &graph_document(bundle))?;
            writeln!(out).map_err(|e| IngestError::io("<output>", e))
        }
        ExportFormat::Dot => write_dot(bundle, out).map_err(|e| IngestError::io("<output>", e)),
    }
}

pub fn export_to_path(
    bundle: &NetworkBundle,
    format: ExportFormat,
    path: &Path,
) -> Result<(), IngestError> {
    let file = File::create(path).map_err(|e| IngestError::io(path, e))?;
    let mut out = BufWriter::new(file);
    export(bundle, format, &mut out).map_err(|e| match e {
        IngestError::Io { source, .. } => IngestError::io(path, source),
        other => other,
    })?;
    out.flush().map_err(|e| IngestError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_str(s: &str, strict: bool) -> Result<(NetworkBundle, LoadReport), IngestError> {
        load_from_reader(s.as_bytes(), None, LoadOptions { strict })
    }

    #[test]
    fn empty_input_gives_empty_bundle() {
        let (b, r) = load_str("", false).unwrap();
        assert_eq!(b.vertex_count(), 0);
        assert_eq!(r.records, 0);
        let (b, r) = load_str(&format!("{RECORDS_HEADER}\n"), false).unwrap();
        assert_eq!(b.edge_count(), 0);
        assert_eq!(r.records, 0);
    }

    #[test]
    fn header_must_match_exactly() {
        let err = load_str("character_id,name\n", false).unwrap_err();
        assert!(matches!(err, IngestError::Header { .. }));
    }

    #[test]
    fn inverted_interval_is_rejected_with_reason() {
        let csv = format!(
            "{RECORDS_HEADER}\n,Faye Wu,Jinan Univ.,institution,study,2005,2000\n,Fei Wu,Jinan Univ.,institution,study,2000,2000\n"
        );
        let (b, r) = load_str(&csv, false).unwrap();
        assert_eq!(r.records, 2);
        assert_eq!(r.loaded, 1);
        assert_eq!(r.rejected.len(), 1);
        assert_eq!(r.rejected[0].reason, "inverted interval");
        assert_eq!(r.rejected[0].line, 2);
        assert_eq!(b.edge_count(), 1);
        // the rejected character never materialized
        assert!(!b.contains_vertex(&"Faye Wu".into()));

        let err = load_str(&csv, true).unwrap_err();
        assert!(matches!(err, IngestError::Row { line: 2, .. }));
    }

    #[test]
    fn malformed_rows_are_counted() {
        let csv = format!(
            "{RECORDS_HEADER}\n,a,e,club,member,1,2\n,b,e,club\n,c,e,club,member,x,2\n,,e,club,member,1,2\n"
        );
        let (_, r) = load_str(&csv, false).unwrap();
        assert_eq!(r.records, 4);
        assert_eq!(r.loaded + r.rejected.len(), r.records);
        assert_eq!(r.rejected[0].reason, "expected 7 fields, found 4");
        assert_eq!(r.rejected[1].reason, "invalid start `x`");
        assert_eq!(r.rejected[2].reason, "empty field `character_name`");
    }

    #[test]
    fn character_id_overrides_name_key() {
        let csv = format!(
            "{RECORDS_HEADER}\nid1,Wei Zhang,e,club,member,1,2\nid2,Wei Zhang,e,club,member,1,2\n,Wei Zhang,e,club,member,1,2\n"
        );
        let (b, r) = load_str(&csv, false).unwrap();
        assert_eq!(r.characters, 3);
        assert_eq!(r.entities, 1);
        assert_eq!(b.edge_count(), 3);
    }

    #[test]
    fn undeclared_relation_type_under_strict() {
        let manifest = DatasetManifest::new(["study"]);
        let csv = format!("{RECORDS_HEADER}\n,a,e,club,member,1,2\n");
        let err = load_from_reader(
            csv.as_bytes(),
            Some(&manifest),
            LoadOptions { strict: true },
        )
        .unwrap_err();
        assert!(err
            .to_string()
            .contains("undeclared relation type `member`"));

        let (b, r) =
            load_from_reader(csv.as_bytes(), Some(&manifest), LoadOptions::default()).unwrap();
        assert_eq!(r.discovered_relation_types, vec!["member"]);
        assert_eq!(b.relation_types(), vec!["study", "member"]);
    }

    #[test]
    fn manifest_validation() {
        assert!(DatasetManifest::new(Vec::<String>::new())
            .validate()
            .is_err());
        assert!(DatasetManifest::new(["a", "a"]).validate().is_err());
        let m: DatasetManifest = serde_json::from_str(
            r#"{"relation_types":["study","work"],"entity_types":["institution"],"time_unit":"year","now":null}"#,
        )
        .unwrap();
        m.validate().unwrap();
        assert_eq!(m.now, None);
    }

    #[test]
    fn id_collision_between_kinds_is_rejected() {
        let csv = format!(
            "{RECORDS_HEADER}\n,x,e,club,member,1,2\nclub/e,y,f,club,member,1,2\nclub/g,z,g,club,member,1,2\n"
        );
        let (b, r) = load_str(&csv, false).unwrap();
        assert_eq!(r.loaded, 1);
        assert_eq!(r.rejected.len(), 2);
        assert_eq!(b.edge_count(), 1);
        assert_eq!(b.vertex_count(), 2);
    }

    #[test]
    fn format_names_parse() {
        for f in [
            ExportFormat::RecordsCsv,
            ExportFormat::GraphJson,
            ExportFormat::Dot,
        ] {
            assert_eq!(f.to_string().parse::<ExportFormat>().unwrap(), f);
        }
        assert!("xml".parse::<ExportFormat>().is_err());
    }

    #[test]
    fn graph_json_of_empty_bundle() {
        let mut buf = Vec::new();
        export(&NetworkBundle::new(), ExportFormat::GraphJson, &mut buf).unwrap();
        let doc: GraphDocument = serde_json::from_slice(&buf).unwrap();
        assert!(doc.vertices.is_empty());
        assert!(doc.edges.is_empty());
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["vertices"], serde_json::json!([]));
        assert_eq!(v["edges"], serde_json::json!([]));
    }

    #[test]
    fn dot_escapes_quotes() {
        assert_eq!(dot_quote(r#"a "b" \c"#), r#""a \"b\" \\c""#);
    }
}
