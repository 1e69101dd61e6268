//! Per-instance property checks shared by the proptests and the
//! acceptance run. Each returns a description of every violation found.

use tapdedup::structure::{screen_candidates, structure_error, NameFilter};
use tapdedup::tap::{simtap_beta, simtap_beta_parts, NeighborWeightVector};
use tapdedup::{simtap, NetworkBundle, VertexId};

use crate::generate::{generate, RandomBundleSpec};
use crate::oracle::{edge_multiset, oracle_simtap, oracle_simtap_beta, oracle_structure_error};
use crate::plant::{plant_duplicates, PlantMode};

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// A small random bundle (at most 20 vertices and 60 edges), with one planted clone,
/// shifted copy or partial copy depending on `variant % 4`, so that
/// maximal and zero-error pairs show up. Returns the bundle and a
/// reference time at or after its latest end.
pub fn small_instance(seed: u64, variant: u8) -> (NetworkBundle, i64) {
    let base = generate(&RandomBundleSpec::small(seed));
    let mode = match variant % 4 {
        1 => Some(PlantMode::ExactClone),
        2 => Some(PlantMode::TimeShifted),
        3 => Some(PlantMode::PartialClone),
        _ => None,
    };
    let bundle = mode
        .and_then(|m| plant_duplicates(&base, 1, m, seed).ok())
        .map(|(b, _)| b)
        .filter(|b| b.vertex_count() <= 20 && b.edge_count() <= 60)
        .unwrap_or(base);
    let now = bundle.max_end().unwrap_or(2000) + (seed % 7) as i64;
    (bundle, now)
}

fn characters(b: &NetworkBundle) -> Vec<VertexId> {
    b.characters().into_iter().map(|v| v.id.clone()).collect()
}

/// Per-subnetwork and aggregate SimTAP against the oracles, every ordered
/// pair including `x == y`.
pub fn check_oracle_equivalence(b: &NetworkBundle, now: i64) -> Vec<String> {
    let mut bad = Vec::new();
    let cs = characters(b);
    for x in &cs {
        for y in &cs {
            for net in b.subnetworks() {
                let got = simtap_beta(net, x, y, now).expect("valid instance");
                match oracle_simtap_beta(net, x, y, now) {
                    Ok(want) if rel_close(got, want, 1e-12) => {}
                    Ok(want) => bad.push(format!(
                        "{} {x} {y}: {got} vs oracle {want}",
                        net.relation_type()
                    )),
                    Err(e) => bad.push(format!("oracle failed: {e}")),
                }
            }
            let got = simtap(b, x, y, now).expect("valid instance").simtap;
            match oracle_simtap(b, x, y, now) {
                Ok(want) if rel_close(got, want, 1e-12) => {}
                Ok(want) => bad.push(format!("{x} {y}: {got} vs oracle {want}")),
                Err(e) => bad.push(format!("oracle failed: {e}")),
            }
        }
    }
    bad
}

/// Bounds, symmetry, self-similarity and the maximality characterization.
pub fn check_simtap_properties(b: &NetworkBundle, now: i64) -> Vec<String> {
    let mut bad = Vec::new();
    let cs = characters(b);
    let vectors: Vec<NeighborWeightVector> = cs
        .iter()
        .map(|c| NeighborWeightVector::build(b, c, now).expect("valid instance"))
        .collect();
    for (i, x) in cs.iter().enumerate() {
        for (j, y) in cs.iter().enumerate() {
            for (k, net) in b.subnetworks().iter().enumerate() {
                let beta = net.relation_type();
                let s = simtap_beta(net, x, y, now).expect("valid instance");
                if !(0.0..=1.0).contains(&s) {
                    bad.push(format!("{beta} {x} {y}: {s} out of range"));
                }
                if s != simtap_beta(net, y, x, now).expect("valid instance") {
                    bad.push(format!("{beta} {x} {y}: asymmetric"));
                }
                let (vx, vy) = (&vectors[i].per_beta[k], &vectors[j].per_beta[k]);
                let equal = vx == vy && !vx.is_empty();
                let maximal = simtap_beta_parts(net, x, y, now)
                    .expect("valid instance")
                    .is_one();
                if maximal != equal || maximal != (s == 1.0) {
                    bad.push(format!(
                        "{beta} {x} {y}: value {s}, maximal {maximal}, equal vectors {equal}"
                    ));
                }
                if i == j && (s == 1.0) != (net.degree(x) > 0) {
                    bad.push(format!("{beta} {x}: self-similarity {s}"));
                }
            }
            let r = simtap(b, x, y, now).expect("valid instance").simtap;
            if !(0.0..=1.0).contains(&r) {
                bad.push(format!("{x} {y}: aggregate {r} out of range"));
            }
            if r != simtap(b, y, x, now).expect("valid instance").simtap {
                bad.push(format!("{x} {y}: aggregate asymmetric"));
            }
        }
    }
    bad
}

/// Range, symmetry, zero exactly on equal edge multisets, and screening
/// returning exactly those pairs.
pub fn check_structure_properties(b: &NetworkBundle) -> Vec<String> {
    let mut bad = Vec::new();
    let cs = characters(b);
    let mut zero_pairs = Vec::new();
    for (i, x) in cs.iter().enumerate() {
        for y in &cs[i + 1..] {
            let e = structure_error(b, x, y).expect("distinct characters");
            if !(0.0..=1.0).contains(&e.value) {
                bad.push(format!("{x} {y}: {} out of range", e.value));
            }
            if e.value != structure_error(b, y, x).expect("distinct characters").value {
                bad.push(format!("{x} {y}: asymmetric"));
            }
            let brute = oracle_structure_error(b, x, y);
            if (e.value - brute).abs() > 1e-12 {
                bad.push(format!("{x} {y}: {} vs oracle {brute}", e.value));
            }
            let (mx, my) = (edge_multiset(b, x), edge_multiset(b, y));
            let same = !mx.is_empty() && mx == my;
            if e.is_zero() != same || (e.value == 0.0) != same {
                bad.push(format!(
                    "{x} {y}: value {} but equal multisets {same}",
                    e.value
                ));
            }
            if same {
                zero_pairs.push((x.clone(), y.clone()));
            }
        }
    }
    let screened: Vec<_> = screen_candidates(b, NameFilter::Off)
        .pairs
        .into_iter()
        .map(|p| (p.x, p.y))
        .collect();
    if screened != zero_pairs {
        bad.push(format!("screened {screened:?}, brute force {zero_pairs:?}"));
    }
    bad
}
