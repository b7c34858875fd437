//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//! Every tolerance is pinned in the assertions below.

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coxrep_core::bridges;
use coxrep_core::classifier::{
    self, build_indecomposable, coxeter_orbit_report, decompose, enumerate_indecomposables,
    locate_triple, tables, BuildOptions, ClassKey, DecomposeOptions, OrbitVerdict, Triple,
};
use coxrep_core::functor::{apply_functor, predict_dim_char, FunctorInput, FunctorOptions};
use coxrep_core::graph::{families, Graph, RootEnumeration};
use coxrep_core::linalg::{CMat, PivotOrder};
use coxrep_core::rep::{direct_sum, equivalent_seeded, CharVector, Equivalence, Representation};

fn pass(criterion: usize, detail: &str) {
    println!("[criterion {criterion:>2}] PASS - {detail}");
}

fn dynkin_families() -> Vec<(String, Graph)> {
    let mut graphs = Vec::new();
    for n in 2..=8 {
        graphs.push((format!("A{n}"), families::a_n(n).unwrap()));
    }
    for n in 4..=8 {
        graphs.push((format!("D{n}"), families::d_n(n).unwrap()));
    }
    for n in 6..=8 {
        graphs.push((format!("E{n}"), families::e_n(n).unwrap()));
    }
    graphs
}

fn expected_h(name: &str) -> usize {
    let n: usize = name[1..].parse().unwrap();
    match &name[..1] {
        "A" => n,
        "D" => 2 * n - 3,
        "E" => match n {
            6 => 11,
            7 => 17,
            8 => 29,
            _ => unreachable!(),
        },
        _ => unreachable!(),
    }
}

fn expected_faithful(name: &str) -> usize {
    let n: usize = name[1..].parse().unwrap();
    match &name[..1] {
        "A" => 1,
        "D" => {
            if n % 2 == 0 {
                2 * (n / 2 - 1)
            } else {
                2 * (n / 2) - 1
            }
        }
        "E" => match n {
            6 => 7,
            7 => 16,
            8 => 44,
            _ => unreachable!(),
        },
        _ => unreachable!(),
    }
}

fn expected_positive_roots(name: &str) -> usize {
    let n: usize = name[1..].parse().unwrap();
    match &name[..1] {
        "A" => n * (n + 1) / 2,
        "D" => n * (n - 1),
        "E" => match n {
            6 => 36,
            7 => 63,
            8 => 120,
            _ => unreachable!(),
        },
        _ => unreachable!(),
    }
}

#[test]
fn criterion_01_h_tables() {
    let start = Instant::now();
    for (name, graph) in dynkin_families() {
        let t = tables(&graph).unwrap();
        let expected = expected_h(&name);
        for (v, &h) in &t.h {
            assert_eq!(h, expected, "{name} vertex {v}: h = {h}, expected {expected}");
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "tables took {elapsed:?}, budget is 5 s"
    );
    pass(1, &format!("h values exact for A2..A8, D4..D8, E6..E8 in {elapsed:?}"));
}

#[test]
fn criterion_02_faithful_classification() {
    for (name, graph) in dynkin_families() {
        let t = tables(&graph).unwrap();
        let expected = expected_faithful(&name);
        assert_eq!(
            t.faithful_count(),
            expected,
            "{name}: sum |L_i| = {}, expected {expected}",
            t.faithful_count()
        );
        let full_support = graph.full_support_roots().unwrap();
        assert_eq!(
            full_support.len(),
            expected,
            "{name}: |full support roots| disagrees with the faithful count"
        );
    }
    pass(2, "sum |L_i| matches the lists and the full-support root count, exactly");
}

#[test]
fn criterion_03_root_counts() {
    let start = Instant::now();
    for (name, graph) in dynkin_families() {
        let expected = expected_positive_roots(&name);
        let positive = match graph.enumerate_roots().unwrap() {
            RootEnumeration::Finite { positive, .. } => positive,
            RootEnumeration::Unbounded { .. } => panic!("{name} must be finite"),
        };
        assert_eq!(positive.len(), expected, "{name}: reflection closure count");
        let oracle = common::positive_root_count_bounded_search(&graph);
        assert_eq!(oracle, expected, "{name}: bounded-search oracle count");
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "root counting took {elapsed:?}, budget is 10 s"
    );
    pass(3, &format!("closure and oracle agree on all counts in {elapsed:?}"));
}

#[test]
fn criterion_04_functor_correctness() {
    let fixtures = common::fixture_stream(200);
    for (i, fixture) in fixtures.iter().enumerate() {
        let (predicted_dims, predicted_char) = predict_dim_char(
            &fixture.graph,
            fixture.rep.dims(),
            &fixture.character,
            fixture.parity,
        )
        .unwrap_or_else(|e| panic!("fixture {i}: prediction failed: {e}"));
        let out = apply_functor(FunctorInput {
            rep: &fixture.rep,
            character: &fixture.character,
            delta: &CharVector::new(),
            parity: fixture.parity,
            options: FunctorOptions::default(),
        })
        .unwrap_or_else(|e| panic!("fixture {i}: functor failed: {e}"));
        // Integer dimension transport, exact.
        assert_eq!(out.rep.dims(), &predicted_dims, "fixture {i}: dims");
        // Block-unitarity certificates.
        assert!(
            out.max_certificate_residual() <= 1e-8,
            "fixture {i}: certificate residual {}",
            out.max_certificate_residual()
        );
        // Output is locally scalar with the predicted character.
        let report = out.rep.scalarity(1e-8);
        assert!(
            report.max_residual() <= 1e-8,
            "fixture {i}: scalarity residual {}",
            report.max_residual()
        );
        for (v, alpha) in report.character.iter() {
            let predicted = predicted_char.get(v).unwrap();
            assert!(
                (alpha - predicted).abs() <= 1e-8,
                "fixture {i}: character at {v}: measured {alpha}, predicted {predicted}"
            );
        }
    }
    pass(4, "200 fixtures: exact dims, certificates and characters within 1e-8");
}

#[test]
fn criterion_05_involution() {
    let fixtures = common::fixture_stream(200);
    for (i, fixture) in fixtures.iter().enumerate() {
        let once = apply_functor(FunctorInput {
            rep: &fixture.rep,
            character: &fixture.character,
            delta: &CharVector::new(),
            parity: fixture.parity,
            options: FunctorOptions::default(),
        })
        .unwrap();
        let twice = apply_functor(FunctorInput {
            rep: &once.rep,
            character: &once.character,
            delta: &CharVector::new(),
            parity: fixture.parity,
            options: FunctorOptions::default(),
        })
        .unwrap();
        assert_eq!(twice.rep.dims(), fixture.rep.dims(), "fixture {i}: dims restored");
        match equivalent_seeded(&fixture.rep, &twice.rep, 1e-6, 1234 + i as u64).unwrap() {
            Equivalence::Equivalent { residual, .. } => {
                assert!(
                    residual <= 1e-6,
                    "fixture {i}: witness residual {residual}"
                );
            }
            Equivalence::Inequivalent { reason } => {
                panic!("fixture {i}: double functor not equivalent to input: {reason}")
            }
        }
    }
    pass(5, "double application equivalent to the input on all 200 fixtures");
}

#[test]
fn criterion_06_uniqueness() {
    for (name, graph) in [
        ("D4", families::d_n(4).unwrap()),
        ("E6", families::e_n(6).unwrap()),
    ] {
        let positive = match graph.enumerate_roots().unwrap() {
            RootEnumeration::Finite { positive, .. } => positive,
            _ => unreachable!(),
        };
        for (i, root) in positive.iter().enumerate() {
            let triple = locate_triple(&graph, root, CharVector::constant(&graph, 1.0)).unwrap();
            let build_a = build_indecomposable(
                &graph,
                &triple,
                &BuildOptions {
                    pivot: PivotOrder::Ascending,
                    ..BuildOptions::default()
                },
            )
            .unwrap();
            let build_b = build_indecomposable(
                &graph,
                &triple,
                &BuildOptions {
                    pivot: PivotOrder::Seeded(9000 + i as u64),
                    ..BuildOptions::default()
                },
            )
            .unwrap();
            match equivalent_seeded(&build_a.0, &build_b.0, 1e-8, 55 + i as u64).unwrap() {
                Equivalence::Equivalent { .. } => {}
                Equivalence::Inequivalent { reason } => {
                    panic!("{name} root {root}: independent builds differ: {reason}")
                }
            }
        }
    }
    pass(6, "independent builds equivalent for every positive root of D4 and E6");
}

/// Samples a pairwise-compatible multiset of indecomposables: summand
/// characters must agree on support overlaps for the direct sum to stay
/// locally scalar.
fn sample_compatible<'a>(
    list: &'a [(classifier::RootPair, Representation)],
    rng: &mut ChaCha8Rng,
) -> Vec<&'a (classifier::RootPair, Representation)> {
    let count = rng.gen_range(1..=5);
    'attempt: for _ in 0..200 {
        let picks: Vec<&(classifier::RootPair, Representation)> = (0..count)
            .map(|_| &list[rng.gen_range(0..list.len())])
            .collect();
        for i in 0..picks.len() {
            for j in (i + 1)..picks.len() {
                let (p1, p2) = (&picks[i].0, &picks[j].0);
                let overlap_ok = p1.dims.iter().all(|(v, &d1)| {
                    d1 == 0
                        || p2.dims.get(v) == 0
                        || (p1.character.value_or(v, 1.0) - p2.character.value_or(v, 1.0)).abs()
                            < 1e-9
                });
                if !overlap_ok {
                    continue 'attempt;
                }
            }
        }
        return picks;
    }
    // Copies of a single class are always compatible.
    let pick = &list[rng.gen_range(0..list.len())];
    vec![pick; count]
}

#[test]
fn criterion_07_decomposition_round_trip() {
    for (trial_base, graph) in [
        (0u64, families::a_n(4).unwrap()),
        (50u64, families::d_n(4).unwrap()),
    ] {
        let list = enumerate_indecomposables(&graph, 1.0, &BuildOptions::default()).unwrap();
        for trial in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(0xdec0 + trial_base + trial);
            let picks = sample_compatible(&list, &mut rng);
            let reps: Vec<&Representation> = picks.iter().map(|(_, r)| r).collect();
            let expected: Vec<ClassKey> = picks.iter().map(|(p, _)| p.class_key()).collect();
            let sum = direct_sum(&reps).unwrap().gauge_random(rng.gen());
            let measured = sum.scalarity(1e-8);
            assert!(
                measured.is_locally_scalar,
                "trial {trial}: compatible sum must be locally scalar"
            );
            let decomposition =
                decompose(&sum, &measured.character, &DecomposeOptions::default()).unwrap();
            assert!(
                decomposition.matches_multiset(&expected, 1e-8),
                "trial {trial}: classes {:?} do not match the sampled multiset",
                decomposition.classes
            );
        }
    }
    pass(7, "100 gauged direct sums decompose to the sampled class multisets");
}

#[test]
fn criterion_08_trace_balance() {
    let mut checked = 0usize;
    // The criterion 4/5 fixture stream.
    for fixture in common::fixture_stream(200) {
        let balance = bridges::trace_obstruction(&fixture.rep, 1e-8).unwrap();
        let bound = 1e-8 * fixture.rep.total_dim().max(1) as f64;
        assert!(
            balance.difference().abs() <= bound,
            "fixture balance {} exceeds {bound}",
            balance.difference()
        );
        checked += 1;
    }
    // Every build behind criterion 6.
    for graph in [families::d_n(4).unwrap(), families::e_n(6).unwrap()] {
        for (_, rep) in enumerate_indecomposables(&graph, 1.0, &BuildOptions::default()).unwrap() {
            let balance = bridges::trace_obstruction(&rep, 1e-8).unwrap();
            let bound = 1e-8 * rep.total_dim().max(1) as f64;
            assert!(balance.difference().abs() <= bound);
            checked += 1;
        }
    }
    // Gauged sums as in criterion 7.
    for (trial_base, graph) in [(0u64, families::a_n(4).unwrap()), (50u64, families::d_n(4).unwrap())] {
        let list = enumerate_indecomposables(&graph, 1.0, &BuildOptions::default()).unwrap();
        for trial in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(0xdec0 + trial_base + trial);
            let picks = sample_compatible(&list, &mut rng);
            let reps: Vec<&Representation> = picks.iter().map(|(_, r)| r).collect();
            let sum = direct_sum(&reps).unwrap().gauge_random(rng.gen());
            let balance = bridges::trace_obstruction(&sum, 1e-8).unwrap();
            let bound = 1e-8 * sum.total_dim().max(1) as f64;
            assert!(balance.difference().abs() <= bound);
            checked += 1;
        }
    }
    pass(8, &format!("parity trace balance within 1e-8 * total dim on {checked} fixtures"));
}

#[test]
fn criterion_09_unboundedness() {
    for (name, graph) in [
        ("D~4", families::d4_tilde().unwrap()),
        ("E~6", families::e6_tilde().unwrap()),
    ] {
        for g in graph.vertex_ids() {
            let report = coxeter_orbit_report(&graph, g, 40).unwrap();
            assert_eq!(
                report.verdict,
                OrbitVerdict::Unbounded,
                "{name} from {g}: verdict {:?}",
                report.verdict
            );
            assert_eq!(report.pairs.len(), 41, "{name} from {g}: full walk");
            // Total dimension strictly increases across each double step.
            let totals: Vec<usize> = report.pairs.iter().map(|(d, _)| d.total()).collect();
            for w in totals.iter().step_by(2).collect::<Vec<_>>().windows(2) {
                assert!(w[0] < w[1], "{name} from {g}: totals not strictly increasing");
            }
            // No dimension vector repeats.
            let mut seen = std::collections::BTreeSet::new();
            for (d, _) in &report.pairs {
                let coords: Vec<usize> =
                    graph.vertex_ids().iter().map(|v| d.get(v)).collect();
                assert!(seen.insert(coords), "{name} from {g}: repeated dims");
            }
        }
    }
    pass(9, "D~4 and E~6 orbits strictly grow over 20 double steps, no repeats");
}

#[test]
fn criterion_10_projector_fixture() {
    let family = bridges::ProjectorFamily {
        ambient_dim: 2,
        projectors: (0..3)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                let mut v = CMat::zeros(2, 1);
                v[(0, 0)] = coxrep_core::linalg::creal(theta.cos());
                v[(1, 0)] = coxrep_core::linalg::creal(theta.sin());
                &v * v.adjoint()
            })
            .collect(),
    };
    let (rep, alpha) = bridges::from_projectors(&family, 1e-8).unwrap();
    assert!((alpha - 1.5).abs() <= 1e-10, "alpha = {alpha}");
    let report = rep.scalarity(1e-8);
    assert!(report.is_locally_scalar);
    assert!((report.character.get("0").unwrap() - 1.5).abs() <= 1e-10);
    for leaf in ["1", "2", "3"] {
        assert!((report.character.get(leaf).unwrap() - 1.0).abs() <= 1e-10);
    }
    let recovered = bridges::to_projectors(&rep, 1e-8).unwrap();
    let (rep2, _) = bridges::from_projectors(&recovered, 1e-8).unwrap();
    match equivalent_seeded(&rep, &rep2, 1e-8, 3).unwrap() {
        Equivalence::Equivalent { .. } => {}
        Equivalence::Inequivalent { reason } => panic!("round trip failed: {reason}"),
    }
    pass(10, "alpha = 1.5 within 1e-10; star character (1.5,1,1,1); round trip equivalent");
}

#[test]
fn criterion_11_all_ones() {
    let mut graphs = vec![];
    for n in 1..=8 {
        graphs.push(families::a_n(n).unwrap());
    }
    for n in 4..=8 {
        graphs.push(families::d_n(n).unwrap());
    }
    for n in 6..=8 {
        graphs.push(families::e_n(n).unwrap());
    }
    for graph in &graphs {
        let (rep, character) = bridges::all_ones_rep(graph);
        let report = rep.scalarity(1e-8);
        assert!(report.is_locally_scalar);
        for (vi, v) in graph.vertex_ids().iter().enumerate() {
            let degree = graph.degree(vi) as f64;
            assert_eq!(character.get(v), Some(degree), "degree character at {v}");
        }
        let decomposition =
            decompose(&rep, &character, &DecomposeOptions::default()).unwrap();
        assert!(
            decomposition.is_single_indecomposable(),
            "all-ones must be indecomposable on a connected graph"
        );
    }
    pass(11, "all-ones representation: exact degree character, indecomposable, on all 16 graphs");
}

// Keep Triple in the public surface exercised from the outside.
#[test]
fn triple_validation_from_outside() {
    let graph = families::a_n(2).unwrap();
    let mut bad = CharVector::new();
    bad.insert("1".into(), -1.0);
    assert!(Triple::new(&graph, "2", 0, bad).is_err());
}
