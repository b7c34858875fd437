//! Shared helpers for the integration and acceptance suites: the independent
//! brute-force root oracle and the seeded locally-scalar fixture stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coxrep_core::classifier::{build_indecomposable, max_steps, BuildOptions, Triple};
use coxrep_core::graph::{families, Graph};
use coxrep_core::rep::{CharVector, Representation};

/// Counts nonnegative integer vectors with Tits form exactly 1 by direct
/// bounded search. Independent of the reflection-closure implementation: the
/// search bound comes from the smallest eigenvalue of the form matrix
/// (B(x) >= lambda_min |x|^2, so B(x) = 1 forces |x|^2 <= 1/lambda_min).
pub fn positive_root_count_bounded_search(graph: &Graph) -> usize {
    let n = graph.vertex_count();
    let mut form = nalgebra::DMatrix::<f64>::identity(n, n);
    for &(a, b) in graph.edge_endpoints() {
        form[(a, b)] -= 0.5;
        form[(b, a)] -= 0.5;
    }
    let lambda_min = nalgebra::SymmetricEigen::new(form)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::MAX, f64::min);
    assert!(
        lambda_min > 0.0,
        "bounded search needs a positive definite form"
    );
    // Inflate by one percent against eigenvalue rounding.
    let norm2_bound = (1.01 / lambda_min).floor() as i64 + 1;

    // Order vertices so that each one after the first attaches to exactly
    // one earlier vertex; the partial form is then incremental.
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut placed = vec![false; n];
    order.push(0);
    placed[0] = true;
    while order.len() < n {
        let before = order.len();
        for v in 0..n {
            if placed[v] {
                continue;
            }
            if let Some(&p) = graph.neighbors(v).iter().find(|&&w| placed[w]) {
                parent[v] = Some(p);
                placed[v] = true;
                order.push(v);
            }
        }
        assert!(order.len() > before, "graph must be connected");
    }
    let position: Vec<usize> = {
        let mut pos = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        pos
    };

    let per_coord_bound = (norm2_bound as f64).sqrt().floor() as i64;
    let mut values = vec![0i64; n];
    let mut count = 0usize;
    search(
        graph,
        &order,
        &parent,
        &position,
        0,
        0,
        0,
        norm2_bound,
        per_coord_bound,
        &mut values,
        &mut count,
    );
    count
}

#[allow(clippy::too_many_arguments)]
fn search(
    graph: &Graph,
    order: &[usize],
    parent: &[Option<usize>],
    position: &[usize],
    depth: usize,
    norm2: i64,
    partial_form: i64,
    norm2_bound: i64,
    per_coord_bound: i64,
    values: &mut Vec<i64>,
    count: &mut usize,
) {
    if depth == order.len() {
        if partial_form == 1 && norm2 > 0 {
            *count += 1;
        }
        return;
    }
    let v = order[depth];
    for x in 0..=per_coord_bound {
        let new_norm2 = norm2 + x * x;
        if new_norm2 > norm2_bound {
            break;
        }
        let parent_term = match parent[v] {
            Some(p) => x * values[position[p]],
            None => 0,
        };
        values[depth] = x;
        search(
            graph,
            order,
            parent,
            position,
            depth + 1,
            new_norm2,
            partial_form + x * x - parent_term,
            norm2_bound,
            per_coord_bound,
            values,
            count,
        );
    }
}

/// One seeded fixture: a gauged indecomposable with its exact character and
/// the parity the fixture generator certifies as admissible.
#[allow(dead_code)] // not every test target reads every field
pub struct Fixture {
    pub graph: Graph,
    pub rep: Representation,
    pub character: CharVector,
    pub parity: coxrep_core::Parity,
}

/// Deterministic stream of locally scalar fixtures over A3, A4 and D4,
/// built through the functor construction with random admissible triples and
/// random positive off-vertex characters, then gauged.
pub fn fixture_stream(count: usize) -> Vec<Fixture> {
    let graphs = [
        families::a_n(3).unwrap(),
        families::a_n(4).unwrap(),
        families::d_n(4).unwrap(),
    ];
    let mut fixtures = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + i as u64);
        let graph = graphs[rng.gen_range(0..graphs.len())].clone();
        // All admissible (vertex, steps) pairs of this graph.
        let mut pairs = Vec::new();
        for g in graph.vertex_ids() {
            let max = max_steps(&graph, g).unwrap();
            for k in 0..=max {
                pairs.push((g.clone(), k));
            }
        }
        let (g, k) = pairs[rng.gen_range(0..pairs.len())].clone();
        let mut off = CharVector::new();
        for v in graph.vertex_ids() {
            off.insert(v.clone(), rng.gen_range(0.5..2.0));
        }
        let triple = Triple::new(&graph, &g, k, off).unwrap();
        let (rep, character) =
            build_indecomposable(&graph, &triple, &BuildOptions::default()).unwrap();
        let rep = rep.gauge_random(rng.gen());

        // Pick an admissible functor parity: the character must be positive
        // on that side of the support.
        let support = rep.support();
        let admissible: Vec<coxrep_core::Parity> =
            [coxrep_core::Parity::Even, coxrep_core::Parity::Odd]
                .into_iter()
                .filter(|&p| {
                    support
                        .iter()
                        .all(|v| graph.parity_of(v).unwrap() != p || character.value_or(v, 1.0) > 1e-9)
                })
                .collect();
        assert!(!admissible.is_empty());
        let parity = admissible[rng.gen_range(0..admissible.len())];
        fixtures.push(Fixture {
            graph,
            rep,
            character,
            parity,
        });
    }
    fixtures
}
