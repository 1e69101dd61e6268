//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use tapdedup::ingest::{export_to_path, ExportFormat};
use tapdedup::tap::{aggregate, enumerate_paths};
use tapdedup::{run_dedupe, screen_candidates, DedupeConfig, NameFilter, NetworkBundle, VertexId};
use tapdedup_testkit::fixtures::{activity_tables, instance_one, TABLES_NOW};
use tapdedup_testkit::suites::{
    check_oracle_equivalence, check_simtap_properties, check_structure_properties, small_instance,
};
use tapdedup_testkit::{generate, plant_duplicates, PlantMode, PlantedPair, RandomBundleSpec};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const SEEDS: u64 = 1000;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn aggregation() -> Outcome {
    let cases = [
        ([0.0, 0.4235, 1.0, 1.0], 0.6059),
        ([0.8661, 1.0, 1.0, 0.0], 0.7165),
    ];
    let mut got = Vec::new();
    for (per_beta, want) in cases {
        let v = aggregate(&per_beta);
        ensure(
            (v - want).abs() <= 5e-5,
            format!("{per_beta:?} -> {v}, expected {want}"),
        )?;
        got.push(format!("{v:.6}"));
    }
    Ok(got.join(", "))
}

fn structure_zero() -> Outcome {
    let b = activity_tables();
    let c = screen_candidates(&b, NameFilter::Off);
    let got: Vec<(&str, &str, f64)> = c
        .pairs
        .iter()
        .map(|p| (p.x.as_str(), p.y.as_str(), p.structure_error))
        .collect();
    ensure(
        got == [
            ("Faye Wu", "Fei Wu", 0.0),
            ("ShaoJia Zhu", "ShaoNan Zhu", 0.0),
        ],
        format!("{got:?}"),
    )?;
    Ok("2 pairs".into())
}

fn instance_paths() -> Outcome {
    let b = instance_one();
    let net = b.subnetwork("member").ok_or("no subnetwork")?;
    let (x, y) = (VertexId::from("v1"), VertexId::from("v2"));
    let paths = enumerate_paths(net, &x, &y, 2001).map_err(|e| e.to_string())?;
    let got: BTreeSet<(u64, u64)> = paths
        .iter()
        .map(|p| (p.first.relation.0, p.second.relation.0))
        .collect();
    ensure(paths.len() == 3, format!("{} paths", paths.len()))?;
    ensure(
        got == BTreeSet::from([(1, 4), (2, 4), (3, 5)]),
        format!("{got:?}"),
    )?;
    for z in ["c1", "c2"] {
        let z = VertexId::from(z);
        let count = |v: &VertexId| {
            net.edges()
                .iter()
                .filter(|e| &e.character == v && e.entity == z)
                .count()
        };
        let through = paths.iter().filter(|p| p.entity == z).count();
        ensure(
            through == count(&x) * count(&y),
            format!("{z}: {through} paths"),
        )?;
    }
    Ok("(r1,r4) (r2,r4) (r3,r5)".into())
}

fn over_seeds<F>(f: F) -> Outcome
where
    F: Fn(&NetworkBundle, i64) -> Vec<String>,
{
    let mut violations = Vec::new();
    for seed in 0..SEEDS {
        let (b, now) = small_instance(seed, (seed % 4) as u8);
        if b.vertex_count() > 20 || b.edge_count() > 60 || b.relation_types().len() > 4 {
            return Err(format!("seed {seed}: instance exceeds bounds"));
        }
        violations.extend(f(&b, now).into_iter().map(|v| format!("seed {seed}: {v}")));
    }
    ensure(
        violations.is_empty(),
        format!(
            "{} violations, first: {}",
            violations.len(),
            violations.first().map_or("", |s| s)
        ),
    )?;
    Ok(format!("{SEEDS} instances, 0 violations"))
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_tapdedup")
}

fn dedupe(records: &Path, out: &Path, workers: usize) -> Result<(), String> {
    let status = Command::new(bin())
        .args([
            "dedupe",
            "--theta",
            "0.80",
            "--workers",
            &workers.to_string(),
        ])
        .arg("--records")
        .arg(records)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "warn")
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), format!("dedupe exited with {status}"))
}

fn planted(mode: PlantMode, dir: &Path) -> Result<(PathBuf, Vec<PlantedPair>), String> {
    let base = generate(&RandomBundleSpec {
        characters: 580,
        entities_per_type: 40,
        relation_types: 4,
        edge_density: 0.08,
        interval_span: 30,
        max_edges: usize::MAX,
        seed: 42,
    });
    let (b, plants) = plant_duplicates(&base, 20, mode, 7).map_err(|e| e.to_string())?;
    ensure(
        b.character_count() == 600,
        format!("{} characters", b.character_count()),
    )?;
    let path = dir.join("records.csv");
    export_to_path(&b, ExportFormat::RecordsCsv, &path).map_err(|e| e.to_string())?;
    Ok((path, plants))
}

fn read_csv(path: &Path) -> Result<Vec<BTreeMap<String, String>>, String> {
    let mut r = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    let header = r.headers().map_err(|e| e.to_string())?.clone();
    r.records()
        .map(|row| {
            let row = row.map_err(|e| e.to_string())?;
            Ok(header
                .iter()
                .map(String::from)
                .zip(row.iter().map(String::from))
                .collect())
        })
        .collect()
}

fn planted_pipeline(tmp: &Path) -> Outcome {
    let dir = tmp.join("exact");
    fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let (records, plants) = planted(PlantMode::ExactClone, &dir)?;
    let out = dir.join("out");
    dedupe(&records, &out, 4)?;
    let groups: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(out.join("groups.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let mut found = BTreeSet::new();
    for g in groups["groups"].as_array().ok_or("groups missing")? {
        let ids: Vec<&str> = g
            .as_array()
            .ok_or("bad group")?
            .iter()
            .filter_map(|v| v.as_str())
            .collect();
        for (i, a) in ids.iter().enumerate() {
            for b in &ids[i + 1..] {
                found.insert((a.to_string(), b.to_string()));
            }
        }
    }
    let truth: BTreeSet<(String, String)> = plants
        .iter()
        .map(|p| {
            let (a, b) = p.ordered();
            (a.to_string(), b.to_string())
        })
        .collect();
    let hits = found.intersection(&truth).count();
    let precision = if found.is_empty() {
        0.0
    } else {
        hits as f64 / found.len() as f64
    };
    let recall = hits as f64 / truth.len() as f64;
    ensure(
        precision == 1.0 && recall == 1.0,
        format!("precision {precision}, recall {recall}"),
    )?;

    let dir = tmp.join("shifted");
    fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let (records, plants) = planted(PlantMode::TimeShifted, &dir)?;
    let out = dir.join("out");
    dedupe(&records, &out, 4)?;
    let candidates: BTreeSet<(String, String)> = read_csv(&out.join("candidates.csv"))?
        .into_iter()
        .map(|r| (r["x_id"].clone(), r["y_id"].clone()))
        .collect();
    let scores: BTreeMap<(String, String), f64> = read_csv(&out.join("similarity.csv"))?
        .into_iter()
        .map(|r| {
            (
                (r["x_id"].clone(), r["y_id"].clone()),
                r["simtap"].parse().unwrap_or(f64::NAN),
            )
        })
        .collect();
    for p in &plants {
        let (a, b) = p.ordered();
        let key = (a.to_string(), b.to_string());
        ensure(candidates.contains(&key), format!("{key:?} not screened"))?;
        let s = scores.get(&key).copied().unwrap_or(f64::NAN);
        ensure(s < 1.0, format!("{key:?} simtap {s}"))?;
    }
    Ok(format!(
        "exact: precision {precision} recall {recall}; shifted: {}/{} screened, all SimTAP < 1",
        plants.len(),
        plants.len()
    ))
}

fn merge_conservation() -> Outcome {
    let b = activity_tables();
    let mut config = DedupeConfig::new(0.8);
    config.now = Some(TABLES_NOW);
    let out = run_dedupe(&b, &config).map_err(|e| e.to_string())?;
    let after = &out.merged.bundle;
    ensure(
        after.vertex_count() == b.vertex_count() - 1,
        format!("|V| {} -> {}", b.vertex_count(), after.vertex_count()),
    )?;
    ensure(
        out.verification.is_ok(),
        format!("{:?}", out.verification.violations),
    )?;
    let facts = |bundle: &NetworkBundle, who: &[&str]| -> BTreeSet<(String, String, i64, i64)> {
        bundle
            .edges()
            .into_iter()
            .filter(|e| who.contains(&e.character.as_str()))
            .map(|e| {
                (
                    e.entity.to_string(),
                    e.relation_type.clone(),
                    e.interval.start(),
                    e.interval.end(),
                )
            })
            .collect()
    };
    let before = facts(&b, &["Faye Wu", "Fei Wu"]);
    ensure(
        before == facts(after, &["Faye Wu"]),
        "representative facts differ",
    )?;
    Ok(format!(
        "|V| {} -> {}, {} facts kept",
        b.vertex_count(),
        after.vertex_count(),
        before.len()
    ))
}

fn reproducibility(tmp: &Path) -> Outcome {
    let dir = tmp.join("repro");
    fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let (records, _) = planted(PlantMode::ExactClone, &dir)?;
    let (one, eight) = (dir.join("w1"), dir.join("w8"));
    dedupe(&records, &one, 1)?;
    dedupe(&records, &eight, 8)?;
    let names = |d: &Path| -> Result<BTreeSet<String>, String> {
        fs::read_dir(d)
            .map_err(|e| e.to_string())?
            .map(|e| {
                e.map(|e| e.file_name().to_string_lossy().into_owned())
                    .map_err(|e| e.to_string())
            })
            .collect()
    };
    let files = names(&one)?;
    ensure(files == names(&eight)?, "different file sets")?;
    ensure(files.len() == 7, format!("{} output files", files.len()))?;
    for f in &files {
        let a = fs::read(one.join(f)).map_err(|e| e.to_string())?;
        let b = fs::read(eight.join(f)).map_err(|e| e.to_string())?;
        ensure(a == b, format!("{f} differs"))?;
    }
    Ok(format!("{} files identical", files.len()))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("aggregation of per-relation values", Box::new(aggregation)),
        (
            "zero structure error on the activity tables",
            Box::new(structure_zero),
        ),
        ("two-character path structure", Box::new(instance_paths)),
        (
            "oracle equivalence",
            Box::new(|| over_seeds(check_oracle_equivalence)),
        ),
        (
            "similarity properties",
            Box::new(|| over_seeds(check_simtap_properties)),
        ),
        (
            "structure error properties",
            Box::new(|| over_seeds(|b, _| check_structure_properties(b))),
        ),
        (
            "planted duplicates through the CLI",
            Box::new(|| planted_pipeline(tmp.path())),
        ),
        ("merge conservation", Box::new(merge_conservation)),
        (
            "worker-count reproducibility",
            Box::new(|| reproducibility(tmp.path())),
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {}. {name} ({detail}) [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
