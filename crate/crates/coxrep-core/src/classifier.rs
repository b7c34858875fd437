//! The classification pipeline over Dynkin graphs: growth, construction of
//! indecomposables from simplest objects by alternating reflection functors,
//! exhaustive enumeration, the h/T/L tables, and decomposition of arbitrary
//! locally scalar representations into indecomposable classes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::functor::{
    apply_functor, predict_dim_char, root_pair_step, FunctorError, FunctorInput, FunctorOptions,
};
use crate::graph::{GVector, Graph, GraphError, Parity, RootEnumeration, VertexId};
use crate::linalg::{self, PivotOrder};
use crate::rep::{CharVector, DimVector, RepError, Representation, TOL_FLOOR};

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("graph is not a Dynkin graph; indecomposable dimensions are unbounded there")]
    NotDynkin,
    #[error("step count {steps} outside the admissible range 0..={max} for vertex `{vertex}`")]
    StepOutOfRange {
        vertex: VertexId,
        steps: usize,
        max: usize,
    },
    #[error("triple is invalid: {0}")]
    InvalidTriple(String),
    #[error("alternating orbit did not leave the positive cone within {0} steps; not a Dynkin graph or not a root")]
    NotDynkinOrNotRoot(usize),
    #[error("representation is not locally scalar with the given character at `{vertex}` (residual {residual:.3e})")]
    NotLocallyScalar { vertex: VertexId, residual: f64 },
    #[error("decomposition is stuck: {0}")]
    Stuck(String),
    #[error(transparent)]
    Functor(#[from] FunctorError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A (dimension, character) pair reachable from a simplest object; the
/// character covers the whole vertex set.
#[derive(Debug, Clone)]
pub struct RootPair {
    pub dims: DimVector,
    pub character: CharVector,
}

impl RootPair {
    pub fn new(graph: &Graph, dims: DimVector, character: CharVector) -> Result<RootPair, ClassifierError> {
        for v in graph.vertex_ids() {
            if dims.get(v) == 0 && character.value_or(v, 1.0) <= TOL_FLOOR {
                return Err(ClassifierError::InvalidTriple(format!(
                    "pair leaves S: d + f vanishes at `{v}`"
                )));
            }
        }
        Ok(RootPair { dims, character })
    }

    /// The equivalence-class label: dimensions and character restricted to
    /// the support.
    pub fn class_key(&self) -> ClassKey {
        ClassKey::new(&self.dims, &self.character)
    }
}

/// Canonical label of an indecomposable class: per support vertex, the
/// dimension and the character value.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassKey {
    entries: Vec<(VertexId, usize, f64)>,
}

impl ClassKey {
    pub fn new(dims: &DimVector, character: &CharVector) -> ClassKey {
        let entries = dims
            .iter()
            .filter(|(_, &d)| d > 0)
            .map(|(v, &d)| (v.clone(), d, character.value_or(v, f64::NAN)))
            .collect();
        ClassKey { entries }
    }

    pub fn entries(&self) -> &[(VertexId, usize, f64)] {
        &self.entries
    }

    pub fn support(&self) -> Vec<&VertexId> {
        self.entries.iter().map(|(v, _, _)| v).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.entries.iter().map(|(_, d, _)| d).sum()
    }

    /// Exact on support and dimensions, within `tol` on character values.
    pub fn approx_eq(&self, other: &ClassKey, tol: f64) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|((v1, d1, f1), (v2, d2, f2))| v1 == v2 && d1 == d2 && (f1 - f2).abs() <= tol)
    }

    /// Total order used for deterministic multiset listing.
    pub fn sort_cmp(&self, other: &ClassKey) -> std::cmp::Ordering {
        let lhs: Vec<(&VertexId, usize)> = self.entries.iter().map(|(v, d, _)| (v, *d)).collect();
        let rhs: Vec<(&VertexId, usize)> = other.entries.iter().map(|(v, d, _)| (v, *d)).collect();
        lhs.cmp(&rhs).then_with(|| {
            for ((_, _, f1), (_, _, f2)) in self.entries.iter().zip(&other.entries) {
                let c = f1.total_cmp(f2);
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            std::cmp::Ordering::Equal
        })
    }
}

impl fmt::Display for ClassKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (v, d, ch)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}: d={d}, f={ch}")?;
        }
        write!(f, "]")
    }
}

/// A triple (simple root vertex, step count, off-vertex character) labelling
/// an indecomposable via the functor construction.
#[derive(Debug, Clone)]
pub struct Triple {
    pub vertex: VertexId,
    pub steps: usize,
    /// Positive character values on the vertices other than `vertex`.
    pub off_character: CharVector,
}

impl Triple {
    pub fn new(
        graph: &Graph,
        vertex: &str,
        steps: usize,
        off_character: CharVector,
    ) -> Result<Triple, ClassifierError> {
        if graph.vertex_index(vertex).is_none() {
            return Err(ClassifierError::Graph(GraphError::UnknownVertex(
                vertex.to_string(),
            )));
        }
        for v in graph.vertex_ids() {
            if v != vertex && off_character.value_or(v, 1.0) <= TOL_FLOOR {
                return Err(ClassifierError::InvalidTriple(format!(
                    "off-vertex character must be positive at `{v}`"
                )));
            }
        }
        Ok(Triple {
            vertex: vertex.to_string(),
            steps,
            off_character,
        })
    }

    /// The uniform-character triple with value `u` off the vertex.
    pub fn uniform(graph: &Graph, vertex: &str, steps: usize, u: f64) -> Result<Triple, ClassifierError> {
        Triple::new(graph, vertex, steps, CharVector::constant(graph, u))
    }

    /// The starting character: zero at the vertex, `off_character` elsewhere.
    pub fn start_character(&self, graph: &Graph) -> CharVector {
        let mut f = CharVector::new();
        for v in graph.vertex_ids() {
            if v == &self.vertex {
                f.insert(v.clone(), 0.0);
            } else {
                f.insert(v.clone(), self.off_character.value_or(v, 1.0));
            }
        }
        f
    }
}

/// The h/T/L tables of a Dynkin graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tables {
    /// Minimal nonzero alternating step count carrying each simple root to a
    /// simple root.
    pub h: BTreeMap<VertexId, usize>,
    /// Vertices whose triples produce faithful representations.
    pub t: BTreeSet<VertexId>,
    /// Admissible step counts yielding faithful representations, per vertex
    /// of `t`.
    pub l: BTreeMap<VertexId, BTreeSet<usize>>,
}

impl Tables {
    pub fn faithful_count(&self) -> usize {
        self.l.values().map(|set| set.len()).sum()
    }
}

fn require_dynkin(graph: &Graph) -> Result<(), ClassifierError> {
    if graph.classify()?.is_dynkin() {
        Ok(())
    } else {
        Err(ClassifierError::NotDynkin)
    }
}

fn positive_root_count(graph: &Graph) -> Result<usize, ClassifierError> {
    match graph.enumerate_roots()? {
        RootEnumeration::Finite { positive, .. } => Ok(positive.len()),
        RootEnumeration::Unbounded { .. } => Err(ClassifierError::NotDynkin),
    }
}

/// The alternating walk of a simple root: vectors at steps 0..=h where h is
/// the first positive step count reaching a simple root again. The walk from
/// a vertex starts with the partial Coxeter transformation of the opposite
/// parity (the same-parity one would immediately negate the root).
struct SimpleRootWalk {
    steps: Vec<GVector>,
    h: usize,
}

fn simple_root_walk(graph: &Graph, g: &str) -> Result<SimpleRootWalk, ClassifierError> {
    let guard = 4 * positive_root_count(graph)? + 4;
    let mut parity = graph.parity_of(g)?.opposite();
    let mut current = GVector::simple_root(graph, g)?;
    let mut steps = vec![current.clone()];
    for k in 1..=guard {
        current = graph.coxeter_partial(&current, parity)?;
        parity = parity.opposite();
        steps.push(current.clone());
        debug_assert!(current.is_positive(), "walk left the positive cone");
        if is_simple(graph, &current) {
            return Ok(SimpleRootWalk { steps, h: k });
        }
    }
    Err(ClassifierError::NotDynkinOrNotRoot(guard))
}

fn is_simple(graph: &Graph, x: &GVector) -> bool {
    let mut ones = 0usize;
    for v in graph.vertex_ids() {
        let value = x.get(v);
        if value == num_rational::Rational64::from_integer(1) {
            ones += 1;
        } else if value != num_rational::Rational64::from_integer(0) {
            return false;
        }
    }
    ones == 1
}

/// The half period l(i): the integer part of h(i)/2. Kept internal to the
/// admissible-range computation.
fn half_period(h: usize) -> usize {
    h / 2
}

/// The largest admissible step count for triples at `g`: strictly below
/// h/2 for even vertices, at most h/2 for odd ones.
pub fn max_steps(graph: &Graph, g: &str) -> Result<usize, ClassifierError> {
    require_dynkin(graph)?;
    let walk = simple_root_walk(graph, g)?;
    let l = half_period(walk.h);
    Ok(match graph.parity_of(g)? {
        Parity::Even if walk.h % 2 == 0 => l - 1,
        _ => l,
    })
}

/// The minimal number of alternating partial Coxeter steps taking `d` out of
/// the positive cone, trying both starting parities.
pub fn growth(graph: &Graph, d: &DimVector) -> Result<usize, ClassifierError> {
    require_dynkin(graph)?;
    let x = d.to_gvector(graph);
    if !x.is_positive() {
        return Err(ClassifierError::InvalidTriple(
            "growth requires a positive dimension vector".into(),
        ));
    }
    let guard = positive_root_count(graph)? + 1;
    let mut even_walk = x.clone();
    let mut odd_walk = x;
    let (mut even_parity, mut odd_parity) = (Parity::Even, Parity::Odd);
    for n in 1..=guard {
        even_walk = graph.coxeter_partial(&even_walk, even_parity)?;
        odd_walk = graph.coxeter_partial(&odd_walk, odd_parity)?;
        even_parity = even_parity.opposite();
        odd_parity = odd_parity.opposite();
        if !(even_walk.is_positive() && odd_walk.is_positive()) {
            return Ok(n);
        }
    }
    Err(ClassifierError::NotDynkinOrNotRoot(guard))
}

/// Computes the h/T/L tables from first principles: orbit walks for h, full
/// support checks over the admissible step range for T and L.
pub fn tables(graph: &Graph) -> Result<Tables, ClassifierError> {
    require_dynkin(graph)?;
    let mut h = BTreeMap::new();
    let mut t = BTreeSet::new();
    let mut l = BTreeMap::new();
    for g in graph.vertex_ids() {
        let walk = simple_root_walk(graph, g)?;
        h.insert(g.clone(), walk.h);
        let lh = half_period(walk.h);
        let max_k = match graph.parity_of(g)? {
            Parity::Even if walk.h % 2 == 0 => lh - 1,
            _ => lh,
        };
        let mut faithful = BTreeSet::new();
        for (k, x) in walk.steps.iter().enumerate().take(max_k + 1) {
            let full = graph
                .vertex_ids()
                .iter()
                .all(|v| x.get(v) >= num_rational::Rational64::from_integer(1));
            if full {
                faithful.insert(k);
            }
        }
        if !faithful.is_empty() {
            t.insert(g.clone());
            l.insert(g.clone(), faithful);
        }
    }
    Ok(Tables { h, t, l })
}

/// Finds the unique admissible (vertex, steps) pair whose alternating walk
/// reaches the given positive root, as a triple with the given off-vertex
/// character.
pub fn locate_triple(
    graph: &Graph,
    root: &GVector,
    off_character: CharVector,
) -> Result<Triple, ClassifierError> {
    require_dynkin(graph)?;
    let mut ids: Vec<&VertexId> = graph.vertex_ids().iter().collect();
    ids.sort();
    for g in ids {
        let max = max_steps(graph, g)?;
        let mut current = GVector::simple_root(graph, g)?;
        let mut parity = graph.parity_of(g)?.opposite();
        for k in 0..=max {
            if k > 0 {
                current = graph.coxeter_partial(&current, parity)?;
                parity = parity.opposite();
            }
            if &current == root {
                return Triple::new(graph, g, k, off_character);
            }
        }
    }
    Err(ClassifierError::InvalidTriple(format!(
        "no admissible triple reaches {root}; not a positive root"
    )))
}

/// Options for constructions that run the matrix-level functor.
#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub tol: f64,
    pub pivot: PivotOrder,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            tol: crate::rep::DEFAULT_TOL,
            pivot: PivotOrder::Ascending,
        }
    }
}

impl BuildOptions {
    fn functor_options(&self) -> FunctorOptions {
        FunctorOptions {
            tol: self.tol,
            pivot: self.pivot,
        }
    }
}

/// Builds the indecomposable labelled by a triple: start from the simplest
/// object at the vertex and apply alternating functors, the first of the
/// parity opposite to the vertex (the only admissible one there).
pub fn build_indecomposable(
    graph: &Graph,
    triple: &Triple,
    options: &BuildOptions,
) -> Result<(Representation, CharVector), ClassifierError> {
    require_dynkin(graph)?;
    let max = max_steps(graph, &triple.vertex)?;
    if triple.steps > max {
        return Err(ClassifierError::StepOutOfRange {
            vertex: triple.vertex.clone(),
            steps: triple.steps,
            max,
        });
    }
    let mut rep = Representation::simplest(graph.clone(), &triple.vertex)?;
    let mut character = triple.start_character(graph);
    let mut parity = graph.parity_of(&triple.vertex)?.opposite();
    for _ in 0..triple.steps {
        let out = apply_functor(FunctorInput {
            rep: &rep,
            character: &character,
            delta: &CharVector::new(),
            parity,
            options: options.functor_options(),
        })?;
        rep = out.rep;
        character = out.character;
        parity = parity.opposite();
    }
    Ok((rep, character))
}

/// One representative per positive root: walks every admissible (vertex,
/// step) pair, asserting the triple-to-root correspondence is a bijection.
/// Results are ordered by vertex id, then step count.
pub fn enumerate_indecomposables(
    graph: &Graph,
    u_default: f64,
    options: &BuildOptions,
) -> Result<Vec<(RootPair, Representation)>, ClassifierError> {
    require_dynkin(graph)?;
    let expected = positive_root_count(graph)?;
    let mut seen_dims: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    let mut ids: Vec<&VertexId> = graph.vertex_ids().iter().collect();
    ids.sort();
    for g in ids {
        let max = max_steps(graph, g)?;
        let triple = Triple::uniform(graph, g, 0, u_default)?;
        let mut rep = Representation::simplest(graph.clone(), g)?;
        let mut character = triple.start_character(graph);
        let mut parity = graph.parity_of(g)?.opposite();
        for k in 0..=max {
            if k > 0 {
                let step = apply_functor(FunctorInput {
                    rep: &rep,
                    character: &character,
                    delta: &CharVector::new(),
                    parity,
                    options: options.functor_options(),
                })?;
                rep = step.rep;
                character = step.character;
                parity = parity.opposite();
            }
            let pair = RootPair::new(graph, rep.dims().clone(), character.clone())?;
            let dims_coords: Vec<usize> =
                graph.vertex_ids().iter().map(|v| pair.dims.get(v)).collect();
            if !seen_dims.insert(dims_coords) {
                return Err(ClassifierError::InvalidTriple(format!(
                    "duplicate dimension vector reached from `{g}` at step {k}"
                )));
            }
            out.push((pair, rep.clone()));
        }
    }
    if out.len() != expected {
        return Err(ClassifierError::InvalidTriple(format!(
            "enumeration produced {} classes, expected {} positive roots",
            out.len(),
            expected
        )));
    }
    Ok(out)
}

/// Options for [`decompose`].
#[derive(Debug, Clone, Copy)]
pub struct DecomposeOptions {
    pub tol: f64,
    pub pivot: PivotOrder,
    /// When set, each class is also pulled back to a concrete representation
    /// equivalent to the corresponding summand.
    pub pull_back_matrices: bool,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            tol: crate::rep::DEFAULT_TOL,
            pivot: PivotOrder::Ascending,
            pull_back_matrices: false,
        }
    }
}

/// Result of [`decompose`]: the indecomposable class multiset, plus optional
/// matrix summands when requested.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Distinct classes with multiplicities, in canonical order.
    pub classes: Vec<(ClassKey, usize)>,
    /// One pulled-back representation per summand instance, aligned with the
    /// expansion of `classes`; present when `pull_back_matrices` was set.
    pub summands: Option<Vec<(ClassKey, Representation)>>,
}

impl Decomposition {
    pub fn summand_count(&self) -> usize {
        self.classes.iter().map(|(_, m)| m).sum()
    }

    pub fn is_single_indecomposable(&self) -> bool {
        self.classes.len() == 1 && self.classes[0].1 == 1
    }

    /// Exact multiset equality of class keys at the given tolerance.
    pub fn matches_multiset(&self, keys: &[ClassKey], tol: f64) -> bool {
        let mut expanded: Vec<&ClassKey> = Vec::new();
        for (key, mult) in &self.classes {
            for _ in 0..*mult {
                expanded.push(key);
            }
        }
        if expanded.len() != keys.len() {
            return false;
        }
        let mut sorted: Vec<ClassKey> = keys.to_vec();
        sorted.sort_by(|a, b| a.sort_cmp(b));
        expanded
            .iter()
            .zip(&sorted)
            .all(|(a, b)| a.approx_eq(b, tol))
    }
}

/// Decomposes a locally scalar representation of a Dynkin graph into its
/// indecomposable class multiset.
///
/// The recursion drops zero-dimension vertices and splits into support
/// components; splits off simplest summands at zero-character vertices;
/// otherwise applies the admissible functor that strictly decreases total
/// dimension and transports the resulting class keys backwards through the
/// inverse pair step.
pub fn decompose(
    rep: &Representation,
    character: &CharVector,
    options: &DecomposeOptions,
) -> Result<Decomposition, ClassifierError> {
    require_dynkin(rep.graph())?;
    let report = rep.scalarity(options.tol);
    if !report.is_locally_scalar {
        let (vertex, &residual) = report
            .residuals
            .iter()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("non-scalar report has residuals");
        return Err(ClassifierError::NotLocallyScalar {
            vertex: vertex.clone(),
            residual,
        });
    }
    for (v, alpha) in report.character.iter() {
        let claimed = character.get(v).ok_or_else(|| {
            ClassifierError::InvalidTriple(format!("character missing at support vertex `{v}`"))
        })?;
        let deviation = (alpha - claimed).abs();
        if deviation > (10.0 * options.tol * claimed.abs().max(1.0)).max(TOL_FLOOR) {
            return Err(ClassifierError::NotLocallyScalar {
                vertex: v.clone(),
                residual: deviation,
            });
        }
    }
    // Full-vertex character: measured on the support, given or 1.0 outside.
    let mut full = CharVector::new();
    for v in rep.graph().vertex_ids() {
        let value = if rep.dim_of(v) > 0 {
            report.character.get(v).expect("support vertex measured")
        } else {
            character.get(v).unwrap_or(1.0)
        };
        full.insert(v.clone(), value);
    }

    let raw = decompose_rec(rep.graph(), rep.clone(), full, options, 0)?;
    let mut keys: Vec<(ClassKey, Option<Representation>)> = raw;
    keys.sort_by(|a, b| a.0.sort_cmp(&b.0));

    let mut classes: Vec<(ClassKey, usize)> = Vec::new();
    for (key, _) in &keys {
        match classes.last_mut() {
            Some((prev, mult)) if prev.approx_eq(key, options.tol.max(1e-8)) => *mult += 1,
            _ => classes.push((key.clone(), 1)),
        }
    }
    let summands = if options.pull_back_matrices {
        Some(
            keys.into_iter()
                .map(|(k, r)| (k, r.expect("pull-back requested")))
                .collect(),
        )
    } else {
        None
    };
    Ok(Decomposition { classes, summands })
}

const MAX_DECOMPOSE_DEPTH: usize = 10_000;

fn decompose_rec(
    graph: &Graph,
    rep: Representation,
    f: CharVector,
    options: &DecomposeOptions,
    depth: usize,
) -> Result<Vec<(ClassKey, Option<Representation>)>, ClassifierError> {
    if depth > MAX_DECOMPOSE_DEPTH {
        return Err(ClassifierError::Stuck(format!(
            "recursion depth {MAX_DECOMPOSE_DEPTH} exceeded; residual tolerance likely too loose"
        )));
    }
    if rep.total_dim() == 0 {
        return Ok(Vec::new());
    }

    let support = rep.support();
    let support_spans =
        support.len() == graph.vertex_count() && induced_components(graph, &support).len() == 1;

    if !support_spans {
        // Restrict to the support components, one subgraph each.
        let mut out = Vec::new();
        for component in induced_components(graph, &support) {
            let (sub_graph, sub_rep, sub_f) = restrict(graph, &rep, &f, &component)?;
            let sub = decompose_rec(&sub_graph, sub_rep, sub_f, options, depth + 1)?;
            for (key, summand) in sub {
                let embedded = match summand {
                    Some(s) => Some(embed(graph, &sub_graph, &s)?),
                    None => None,
                };
                out.push((key, embedded));
            }
        }
        return Ok(out);
    }

    // Zero-character support vertex: split off simplest summands.
    let zero_vertex = graph
        .vertex_ids()
        .iter()
        .find(|v| support.contains(*v) && f.value_or(v, 1.0) <= options.tol);
    if let Some(v) = zero_vertex {
        let d_v = rep.dim_of(v);
        let vi = graph.vertex_index(v).expect("support vertex");
        // The incident operators must vanish at tolerance, otherwise the
        // claimed character is inconsistent with the matrices.
        let bound = (d_v as f64 * (f.value_or(v, 0.0).max(0.0) + options.tol)).sqrt() + TOL_FLOOR;
        for (e, &(a, b)) in graph.edge_endpoints().iter().enumerate() {
            if a == vi || b == vi {
                let norm = linalg::frobenius_norm(rep.edge_op(e));
                if norm > bound {
                    return Err(ClassifierError::NotLocallyScalar {
                        vertex: v.clone(),
                        residual: norm,
                    });
                }
            }
        }
        let mut out = Vec::new();
        let key = ClassKey::new(
            &DimVector::simple(graph, v)?,
            &CharVector::from_pairs([(v.clone(), f.value_or(v, 0.0))]),
        );
        for _ in 0..d_v {
            let summand = if options.pull_back_matrices {
                Some(Representation::simplest(graph.clone(), v)?)
            } else {
                None
            };
            out.push((key.clone(), summand));
        }
        out.extend(decompose_rec(
            graph,
            drop_vertex(graph, &rep, v)?,
            f,
            options,
            depth + 1,
        )?);
        return Ok(out);
    }

    // Full support, positive character everywhere: step with the functor
    // that strictly decreases total dimension, preferring even.
    let total = rep.total_dim();
    let mut chosen: Option<(Parity, DimVector, CharVector)> = None;
    for parity in [Parity::Even, Parity::Odd] {
        match predict_dim_char(graph, rep.dims(), &f, parity) {
            Ok((d2, f2)) if d2.total() < total => {
                chosen = Some((parity, d2, f2));
                break;
            }
            _ => {}
        }
    }
    let Some((parity, predicted_dims, _)) = chosen else {
        return Err(ClassifierError::Stuck(format!(
            "no admissible functor strictly decreases the total dimension at dims {}",
            rep.dims()
        )));
    };

    let out_step = apply_functor(FunctorInput {
        rep: &rep,
        character: &f,
        delta: &CharVector::new(),
        parity,
        options: FunctorOptions {
            tol: options.tol,
            pivot: options.pivot,
        },
    })?;
    debug_assert_eq!(out_step.rep.dims(), &predicted_dims);

    let inner = decompose_rec(
        graph,
        out_step.rep,
        out_step.character.clone(),
        options,
        depth + 1,
    )?;

    // Transport each class key backwards through the inverse pair step (the
    // same-parity step, by the involution).
    let mut out = Vec::new();
    for (key, summand) in inner {
        let mut d_k = DimVector::zeros(graph);
        let mut f_k = out_step.character.clone();
        for (v, d, ch) in key.entries() {
            d_k.set(v, *d);
            f_k.insert(v.clone(), *ch);
        }
        let (d_back, f_back) = predict_dim_char(graph, &d_k, &f_k, parity)?;
        let back_key = ClassKey::new(&d_back, &f_back);
        let back_summand = match summand {
            Some(s) => {
                let pulled = apply_functor(FunctorInput {
                    rep: &s,
                    character: &f_k,
                    delta: &CharVector::new(),
                    parity,
                    options: FunctorOptions {
                        tol: options.tol,
                        pivot: options.pivot,
                    },
                })?;
                Some(pulled.rep)
            }
            None => None,
        };
        out.push((back_key, back_summand));
    }
    Ok(out)
}

/// Connected components of the subgraph induced by `keep`, each sorted, the
/// list ordered by smallest member.
fn induced_components(graph: &Graph, keep: &BTreeSet<VertexId>) -> Vec<BTreeSet<VertexId>> {
    let mut remaining: BTreeSet<&VertexId> = keep.iter().collect();
    let mut components = Vec::new();
    while let Some(start) = remaining.iter().next().cloned() {
        let mut component = BTreeSet::new();
        let mut stack = vec![start.clone()];
        remaining.remove(start);
        while let Some(v) = stack.pop() {
            component.insert(v.clone());
            let vi = graph.vertex_index(&v).expect("known vertex");
            for &w in graph.neighbors(vi) {
                let wid = graph.vertex_id(w).to_string();
                if remaining.contains(&wid) {
                    remaining.remove(&wid);
                    stack.push(wid);
                }
            }
        }
        components.push(component);
    }
    components
}

/// Restriction of (graph, rep, f) to an induced connected component.
fn restrict(
    graph: &Graph,
    rep: &Representation,
    f: &CharVector,
    component: &BTreeSet<VertexId>,
) -> Result<(Graph, Representation, CharVector), ClassifierError> {
    let vertices: Vec<VertexId> = graph
        .vertex_ids()
        .iter()
        .filter(|v| component.contains(*v))
        .cloned()
        .collect();
    let mut edges = Vec::new();
    let mut kept_ops = Vec::new();
    for (e, &(a, b)) in graph.edge_endpoints().iter().enumerate() {
        let (ida, idb) = (graph.vertex_id(a), graph.vertex_id(b));
        if component.contains(ida) && component.contains(idb) {
            edges.push((ida.to_string(), idb.to_string()));
            kept_ops.push(rep.edge_op(e).clone());
        }
    }
    let sub_graph = Graph::new(vertices.clone(), &edges)?;
    let mut dims = BTreeMap::new();
    let mut sub_f = CharVector::new();
    for v in &vertices {
        dims.insert(v.clone(), rep.dim_of(v));
        sub_f.insert(v.clone(), f.value_or(v, 1.0));
    }
    // Edge order inside the subgraph may differ; rebuild aligned matrices.
    let mut ops_by_pair: BTreeMap<(VertexId, VertexId), crate::linalg::CMat> = edges
        .iter()
        .cloned()
        .zip(kept_ops)
        .map(|((a, b), m)| ((a, b), m))
        .collect();
    let ordered_ops = sub_graph
        .edge_endpoints()
        .iter()
        .map(|&(a, b)| {
            let key = (
                sub_graph.vertex_id(a).to_string(),
                sub_graph.vertex_id(b).to_string(),
            );
            ops_by_pair.remove(&key).expect("edge present")
        })
        .collect();
    let sub_rep = Representation::new(
        sub_graph.clone(),
        DimVector::new(&sub_graph, dims)?,
        ordered_ops,
    )?;
    Ok((sub_graph, sub_rep, sub_f))
}

/// Zero-pads a subgraph representation back onto the parent graph.
fn embed(
    graph: &Graph,
    sub_graph: &Graph,
    rep: &Representation,
) -> Result<Representation, ClassifierError> {
    let mut dims = DimVector::zeros(graph);
    for v in sub_graph.vertex_ids() {
        dims.set(v, rep.dim_of(v));
    }
    let mut ops = Vec::with_capacity(graph.edge_count());
    for &(a, b) in graph.edge_endpoints() {
        let (ida, idb) = (graph.vertex_id(a), graph.vertex_id(b));
        match (sub_graph.vertex_index(ida), sub_graph.vertex_index(idb)) {
            (Some(sa), Some(sb)) => {
                let e = sub_graph
                    .edge_endpoints()
                    .iter()
                    .position(|&(x, y)| (x, y) == (sa, sb) || (x, y) == (sb, sa));
                match e {
                    Some(e) => ops.push(rep.edge_op(e).clone()),
                    None => ops.push(crate::linalg::CMat::zeros(dims.get(ida), dims.get(idb))),
                }
            }
            _ => ops.push(crate::linalg::CMat::zeros(dims.get(ida), dims.get(idb))),
        }
    }
    Ok(Representation::new(graph.clone(), dims, ops)?)
}

/// Same graph, vertex dimension zeroed, incident matrices dropped.
fn drop_vertex(
    graph: &Graph,
    rep: &Representation,
    v: &str,
) -> Result<Representation, ClassifierError> {
    let vi = graph.vertex_index(v).expect("known vertex");
    let mut dims = rep.dims().clone();
    dims.set(v, 0);
    let ops = graph
        .edge_endpoints()
        .iter()
        .enumerate()
        .map(|(e, &(a, b))| {
            if a == vi || b == vi {
                crate::linalg::CMat::zeros(
                    dims.get(graph.vertex_id(a)),
                    dims.get(graph.vertex_id(b)),
                )
            } else {
                rep.edge_op(e).clone()
            }
        })
        .collect();
    Ok(Representation::new(graph.clone(), dims, ops)?)
}

/// Verdict of the pair-level alternating orbit walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrbitVerdict {
    /// The walk reached a simple root after this many steps.
    Finite { steps_to_simple: usize },
    /// Total dimension strictly increased across every full Coxeter period
    /// and no dimension vector repeated.
    Unbounded,
    /// The walk hit the step limit without certifying either way.
    Inconclusive,
}

/// The alternating pair orbit starting at the simplest object of a vertex.
#[derive(Debug, Clone)]
pub struct OrbitReport {
    /// The (dimension, character) pair after each step, starting at step 0.
    pub pairs: Vec<(DimVector, CharVector)>,
    pub verdict: OrbitVerdict,
}

/// Walks the (d, f) orbit from the simplest object at `g` for up to `t_max`
/// alternating steps and reports boundedness.
pub fn coxeter_orbit_report(
    graph: &Graph,
    g: &str,
    t_max: usize,
) -> Result<OrbitReport, ClassifierError> {
    let triple = Triple::uniform(graph, g, 0, 1.0)?;
    let mut dims = DimVector::simple(graph, g)?;
    let mut character = triple.start_character(graph);
    let mut parity = graph.parity_of(g)?.opposite();
    let mut pairs = vec![(dims.clone(), character.clone())];
    let mut verdict = OrbitVerdict::Inconclusive;
    for k in 1..=t_max {
        match root_pair_step(graph, &dims, &character, parity) {
            Ok((d2, f2)) => {
                dims = d2;
                character = f2;
                parity = parity.opposite();
                pairs.push((dims.clone(), character.clone()));
                if dims.total() == 1 {
                    verdict = OrbitVerdict::Finite { steps_to_simple: k };
                    break;
                }
            }
            Err(FunctorError::NotAdmissible(_)) => {
                // The pair left the admissible chain: finite orbit ended at
                // the previous simple root if one was seen.
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    if verdict == OrbitVerdict::Inconclusive && pairs.len() == t_max + 1 {
        // Check strict growth across full Coxeter periods and distinctness.
        let totals: Vec<usize> = pairs.iter().map(|(d, _)| d.total()).collect();
        let strictly_growing = totals
            .iter()
            .step_by(2)
            .zip(totals.iter().step_by(2).skip(1))
            .all(|(a, b)| a < b);
        let mut seen = BTreeSet::new();
        let distinct = pairs.iter().all(|(d, _)| {
            let coords: Vec<usize> = graph.vertex_ids().iter().map(|v| d.get(v)).collect();
            seen.insert(coords)
        });
        if strictly_growing && distinct {
            verdict = OrbitVerdict::Unbounded;
        }
    }
    Ok(OrbitReport { pairs, verdict })
}
