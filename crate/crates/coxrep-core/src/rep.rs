//! Finite-dimensional representations of a graph in Hilbert spaces: storage,
//! the local-scalarity verdict, characters, direct sums, gauge changes,
//! morphisms and numerical equivalence.
//!
//! A representation stores one complex matrix per edge. For the edge `{a, b}`
//! with `a < b` in vertex-id order the stored matrix maps `H_b -> H_a`; the
//! adjoint partner is implicit and never stored.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{GVector, Graph, GraphError, VertexId};
use crate::linalg::{self, CMat};

/// Default relative tolerance for scalarity and intertwining residuals.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Absolute floor under every relative tolerance comparison.
pub const TOL_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum RepError {
    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("representations live on different graphs")]
    GraphMismatch,
    #[error("matrix at vertex `{vertex}` is not unitary (residual {residual:.3e})")]
    NotUnitary { vertex: VertexId, residual: f64 },
    #[error("representation is not locally scalar at vertex `{vertex}` (residual {residual:.3e})")]
    NotLocallyScalar { vertex: VertexId, residual: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Nonnegative-integer vector over the vertex set: dimensions per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimVector {
    entries: BTreeMap<VertexId, usize>,
}

impl DimVector {
    pub fn zeros(graph: &Graph) -> DimVector {
        DimVector {
            entries: graph
                .vertex_ids()
                .iter()
                .map(|v| (v.clone(), 0))
                .collect(),
        }
    }

    pub fn new(graph: &Graph, entries: BTreeMap<VertexId, usize>) -> Result<DimVector, RepError> {
        if entries.len() != graph.vertex_count()
            || !graph.vertex_ids().iter().all(|v| entries.contains_key(v))
        {
            return Err(RepError::ShapeMismatch(
                "dimension vector keys do not match the graph vertex set".into(),
            ));
        }
        Ok(DimVector { entries })
    }

    /// Dimension vector of the simplest representation at `g`.
    pub fn simple(graph: &Graph, g: &str) -> Result<DimVector, RepError> {
        let mut d = DimVector::zeros(graph);
        if !d.entries.contains_key(g) {
            return Err(RepError::Graph(GraphError::UnknownVertex(g.to_string())));
        }
        d.entries.insert(g.to_string(), 1);
        Ok(d)
    }

    pub fn from_ints(graph: &Graph, coords: &[usize]) -> Result<DimVector, RepError> {
        if coords.len() != graph.vertex_count() {
            return Err(RepError::ShapeMismatch(format!(
                "expected {} dimensions, got {}",
                graph.vertex_count(),
                coords.len()
            )));
        }
        Ok(DimVector {
            entries: graph
                .vertex_ids()
                .iter()
                .cloned()
                .zip(coords.iter().copied())
                .collect(),
        })
    }

    pub fn get(&self, v: &str) -> usize {
        self.entries[v]
    }

    pub fn set(&mut self, v: &str, value: usize) {
        assert!(self.entries.contains_key(v), "unknown vertex {v}");
        self.entries.insert(v.to_string(), value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, &usize)> {
        self.entries.iter()
    }

    pub fn support(&self) -> BTreeSet<VertexId> {
        self.entries
            .iter()
            .filter(|(_, &d)| d > 0)
            .map(|(v, _)| v.clone())
            .collect()
    }

    pub fn total(&self) -> usize {
        self.entries.values().sum()
    }

    pub fn to_gvector(&self, graph: &Graph) -> GVector {
        GVector::from_coords(
            graph,
            graph
                .vertex_ids()
                .iter()
                .map(|v| Rational64::from_integer(self.entries[v] as i64))
                .collect(),
        )
    }

    /// Converts an integral nonnegative G-vector back to dimensions.
    pub fn from_gvector(graph: &Graph, x: &GVector) -> Result<DimVector, RepError> {
        let mut entries = BTreeMap::new();
        for (v, r) in x.iter() {
            if !r.is_integer() || r.to_integer() < 0 {
                return Err(RepError::ShapeMismatch(format!(
                    "entry {r} at vertex `{v}` is not a nonnegative integer"
                )));
            }
            entries.insert(v.clone(), r.to_integer() as usize);
        }
        DimVector::new(graph, entries)
    }
}

impl fmt::Display for DimVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (v, d)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}: {d}")?;
        }
        write!(f, ")")
    }
}

/// Real-valued character vector. Keys cover either the support only (as in
/// [`ScalarityReport`]) or the whole vertex set (as in the functor and
/// classifier pipelines); each producer documents which.
#[derive(Debug, Clone, PartialEq)]
pub struct CharVector {
    entries: BTreeMap<VertexId, f64>,
}

impl CharVector {
    pub fn new() -> CharVector {
        CharVector {
            entries: BTreeMap::new(),
        }
    }

    pub fn constant(graph: &Graph, value: f64) -> CharVector {
        CharVector {
            entries: graph
                .vertex_ids()
                .iter()
                .map(|v| (v.clone(), value))
                .collect(),
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VertexId, f64)>) -> CharVector {
        CharVector {
            entries: pairs.into_iter().collect(),
        }
    }

    pub fn get(&self, v: &str) -> Option<f64> {
        self.entries.get(v).copied()
    }

    pub fn value_or(&self, v: &str, default: f64) -> f64 {
        self.entries.get(v).copied().unwrap_or(default)
    }

    pub fn insert(&mut self, v: VertexId, value: f64) {
        self.entries.insert(v, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, &f64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Restriction to a key subset.
    pub fn restrict(&self, keys: &BTreeSet<VertexId>) -> CharVector {
        CharVector {
            entries: self
                .entries
                .iter()
                .filter(|(v, _)| keys.contains(*v))
                .map(|(v, &x)| (v.clone(), x))
                .collect(),
        }
    }

    /// Entrywise comparison over the union of key sets, missing keys
    /// treated as unequal.
    pub fn approx_eq(&self, other: &CharVector, tol: f64) -> bool {
        self.entries.len() == other.entries.len()
            && self.entries.iter().all(|(v, &x)| {
                other
                    .entries
                    .get(v)
                    .is_some_and(|&y| (x - y).abs() <= tol)
            })
    }
}

impl Default for CharVector {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Display for CharVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (v, x)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}: {x}")?;
        }
        write!(f, ")")
    }
}

/// A concrete representation: a dimension per vertex and one complex matrix
/// per edge in the canonical orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    graph: Graph,
    dims: DimVector,
    edge_ops: Vec<CMat>,
}

impl Representation {
    /// Builds a representation from edge matrices aligned with
    /// `graph.edge_endpoints()`. For edge `(a, b)` the matrix must have shape
    /// `d_a x d_b` (it maps `H_b -> H_a`).
    pub fn new(graph: Graph, dims: DimVector, edge_ops: Vec<CMat>) -> Result<Representation, RepError> {
        if dims.entries.len() != graph.vertex_count()
            || !graph.vertex_ids().iter().all(|v| dims.entries.contains_key(v))
        {
            return Err(RepError::ShapeMismatch(
                "dimension vector does not match the graph".into(),
            ));
        }
        if edge_ops.len() != graph.edge_count() {
            return Err(RepError::ShapeMismatch(format!(
                "expected {} edge matrices, got {}",
                graph.edge_count(),
                edge_ops.len()
            )));
        }
        for (e, m) in edge_ops.iter().enumerate() {
            let (a, b) = graph.edge_endpoints()[e];
            let (da, db) = (
                dims.get(graph.vertex_id(a)),
                dims.get(graph.vertex_id(b)),
            );
            if m.nrows() != da || m.ncols() != db {
                return Err(RepError::ShapeMismatch(format!(
                    "edge {}|{} expects a {}x{} matrix, got {}x{}",
                    graph.vertex_id(a),
                    graph.vertex_id(b),
                    da,
                    db,
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Representation {
            graph,
            dims,
            edge_ops,
        })
    }

    /// The zero representation: every space zero-dimensional.
    pub fn zero(graph: Graph) -> Representation {
        let dims = DimVector::zeros(&graph);
        let edge_ops = graph
            .edge_endpoints()
            .iter()
            .map(|_| CMat::zeros(0, 0))
            .collect();
        Representation {
            graph,
            dims,
            edge_ops,
        }
    }

    /// The simplest representation at `g`: one-dimensional space at `g`,
    /// zero elsewhere.
    pub fn simplest(graph: Graph, g: &str) -> Result<Representation, RepError> {
        let dims = DimVector::simple(&graph, g)?;
        let edge_ops = graph
            .edge_endpoints()
            .iter()
            .map(|&(a, b)| {
                CMat::zeros(
                    dims.get(graph.vertex_id(a)),
                    dims.get(graph.vertex_id(b)),
                )
            })
            .collect();
        Ok(Representation {
            graph,
            dims,
            edge_ops,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn dims(&self) -> &DimVector {
        &self.dims
    }

    pub fn dim_of(&self, v: &str) -> usize {
        self.dims.get(v)
    }

    pub fn total_dim(&self) -> usize {
        self.dims.total()
    }

    pub fn support(&self) -> BTreeSet<VertexId> {
        self.dims.support()
    }

    /// The stored matrix of edge `e` (maps `H_b -> H_a` with `a < b`).
    pub fn edge_op(&self, e: usize) -> &CMat {
        &self.edge_ops[e]
    }

    pub fn edge_ops(&self) -> &[CMat] {
        &self.edge_ops
    }

    /// The operator of edge `e` oriented into vertex index `head`
    /// (`H_other -> H_head`); the adjoint of the stored matrix when `head`
    /// is the larger endpoint.
    pub fn edge_op_into(&self, e: usize, head: usize) -> CMat {
        let (a, b) = self.graph.edge_endpoints()[e];
        if head == a {
            self.edge_ops[e].clone()
        } else {
            debug_assert_eq!(head, b);
            self.edge_ops[e].adjoint()
        }
    }

    /// The vertex operator `A_v`: the sum over incident edges of the
    /// inbound-times-outbound products; for a loop both orders are added.
    pub fn vertex_operator(&self, v: usize) -> CMat {
        let d = self.dims.get(self.graph.vertex_id(v));
        let mut a_v = CMat::zeros(d, d);
        for (e, &(a, b)) in self.graph.edge_endpoints().iter().enumerate() {
            let m = &self.edge_ops[e];
            if a == v && b == v {
                a_v += m.adjoint() * m + m * m.adjoint();
            } else if a == v {
                a_v += m * m.adjoint();
            } else if b == v {
                a_v += m.adjoint() * m;
            }
        }
        a_v
    }

    /// Assembles every vertex operator, estimates the character and reports
    /// per-vertex deviations from scalarity. The character is defined on the
    /// support only and is clamped to be nonnegative.
    pub fn scalarity(&self, tol: f64) -> ScalarityReport {
        let mut character = CharVector::new();
        let mut residuals = BTreeMap::new();
        let mut is_locally_scalar = true;
        for (v, id) in self.graph.vertex_ids().iter().enumerate() {
            let d = self.dims.get(id);
            if d == 0 {
                continue;
            }
            let a_v = self.vertex_operator(v);
            let alpha = (a_v.trace().re / d as f64).max(0.0);
            let mut dev = a_v;
            for i in 0..d {
                dev[(i, i)] -= linalg::creal(alpha);
            }
            let residual = linalg::frobenius_norm(&dev);
            let scale = alpha * (d as f64).sqrt();
            if residual > (tol * scale.max(1.0)).max(TOL_FLOOR) {
                is_locally_scalar = false;
            }
            character.insert(id.clone(), alpha);
            residuals.insert(id.clone(), residual);
        }
        ScalarityReport {
            is_locally_scalar,
            character,
            residuals,
            tolerance: tol,
        }
    }

    /// Gauge change by explicit unitaries; vertices absent from the map use
    /// the identity. Each new edge matrix is `U_a Gamma U_b^*`.
    pub fn gauge(
        &self,
        unitaries: &BTreeMap<VertexId, CMat>,
        tol: f64,
    ) -> Result<Representation, RepError> {
        let mut full: BTreeMap<VertexId, CMat> = BTreeMap::new();
        for id in self.graph.vertex_ids() {
            let d = self.dims.get(id);
            match unitaries.get(id) {
                Some(u) => {
                    if u.nrows() != d || u.ncols() != d {
                        return Err(RepError::ShapeMismatch(format!(
                            "unitary at `{id}` must be {d}x{d}"
                        )));
                    }
                    let residual = linalg::identity_residual(&(u.adjoint() * u));
                    if residual > (tol * (d as f64).max(1.0)).max(TOL_FLOOR) {
                        return Err(RepError::NotUnitary {
                            vertex: id.clone(),
                            residual,
                        });
                    }
                    full.insert(id.clone(), u.clone());
                }
                None => {
                    full.insert(id.clone(), CMat::identity(d, d));
                }
            }
        }
        let edge_ops = self
            .graph
            .edge_endpoints()
            .iter()
            .zip(&self.edge_ops)
            .map(|(&(a, b), m)| {
                &full[self.graph.vertex_id(a)] * m * full[self.graph.vertex_id(b)].adjoint()
            })
            .collect();
        Ok(Representation {
            graph: self.graph.clone(),
            dims: self.dims.clone(),
            edge_ops,
        })
    }

    /// Gauge change by Haar-like random unitaries generated deterministically
    /// from the seed, one per vertex in vertex-id order.
    pub fn gauge_random(&self, seed: u64) -> Representation {
        let unitaries = self.random_gauge_unitaries(seed);
        self.gauge(&unitaries, DEFAULT_TOL)
            .expect("generated unitaries are unitary")
    }

    /// The unitaries used by [`Representation::gauge_random`] with this seed.
    pub fn random_gauge_unitaries(&self, seed: u64) -> BTreeMap<VertexId, CMat> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids: Vec<&VertexId> = self.graph.vertex_ids().iter().collect();
        ids.sort();
        ids.into_iter()
            .map(|id| (id.clone(), linalg::random_unitary(self.dims.get(id), &mut rng)))
            .collect()
    }
}

/// Block-diagonal direct sum of representations over a common graph.
pub fn direct_sum(reps: &[&Representation]) -> Result<Representation, RepError> {
    let first = reps.first().ok_or_else(|| {
        RepError::ShapeMismatch("direct sum of an empty list".into())
    })?;
    let graph = first.graph.clone();
    for rep in reps {
        if rep.graph != graph {
            return Err(RepError::GraphMismatch);
        }
    }
    let mut dims = DimVector::zeros(&graph);
    for rep in reps {
        for (v, d) in rep.dims.iter() {
            dims.set(v, dims.get(v) + d);
        }
    }
    let mut edge_ops = Vec::with_capacity(graph.edge_count());
    for (e, &(a, b)) in graph.edge_endpoints().iter().enumerate() {
        let (ida, idb) = (graph.vertex_id(a), graph.vertex_id(b));
        let mut block = CMat::zeros(dims.get(ida), dims.get(idb));
        let (mut ra, mut cb) = (0, 0);
        for rep in reps {
            let m = &rep.edge_ops[e];
            block.view_mut((ra, cb), (m.nrows(), m.ncols())).copy_from(m);
            ra += m.nrows();
            cb += m.ncols();
        }
        edge_ops.push(block);
    }
    Representation::new(graph, dims, edge_ops)
}

/// Scalarity verdict for a representation.
#[derive(Debug, Clone)]
pub struct ScalarityReport {
    pub is_locally_scalar: bool,
    /// Estimated character, keyed by the support vertices.
    pub character: CharVector,
    /// Frobenius deviation of each vertex operator from its scalar estimate,
    /// keyed by the support vertices.
    pub residuals: BTreeMap<VertexId, f64>,
    pub tolerance: f64,
}

impl ScalarityReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().cloned().fold(0.0, f64::max)
    }
}

/// A morphism between two representations over the same graph: one block per
/// vertex mapping source fiber to target fiber.
#[derive(Debug, Clone)]
pub struct Morphism {
    pub source: Representation,
    pub target: Representation,
    pub blocks: BTreeMap<VertexId, CMat>,
}

impl Morphism {
    pub fn new(
        source: Representation,
        target: Representation,
        blocks: BTreeMap<VertexId, CMat>,
    ) -> Result<Morphism, RepError> {
        if source.graph != target.graph {
            return Err(RepError::GraphMismatch);
        }
        for id in source.graph.vertex_ids() {
            let block = blocks.get(id).ok_or_else(|| {
                RepError::ShapeMismatch(format!("missing block at vertex `{id}`"))
            })?;
            if block.nrows() != target.dim_of(id) || block.ncols() != source.dim_of(id) {
                return Err(RepError::ShapeMismatch(format!(
                    "block at `{id}` must be {}x{}, got {}x{}",
                    target.dim_of(id),
                    source.dim_of(id),
                    block.nrows(),
                    block.ncols()
                )));
            }
        }
        Ok(Morphism {
            source,
            target,
            blocks,
        })
    }

    pub fn identity(rep: &Representation) -> Morphism {
        let blocks = rep
            .graph
            .vertex_ids()
            .iter()
            .map(|id| {
                let d = rep.dim_of(id);
                (id.clone(), CMat::identity(d, d))
            })
            .collect();
        Morphism {
            source: rep.clone(),
            target: rep.clone(),
            blocks,
        }
    }

    pub fn zero(source: &Representation, target: &Representation) -> Result<Morphism, RepError> {
        if source.graph != target.graph {
            return Err(RepError::GraphMismatch);
        }
        let blocks = source
            .graph
            .vertex_ids()
            .iter()
            .map(|id| {
                (
                    id.clone(),
                    CMat::zeros(target.dim_of(id), source.dim_of(id)),
                )
            })
            .collect();
        Ok(Morphism {
            source: source.clone(),
            target: target.clone(),
            blocks,
        })
    }

    /// Intertwining residuals per edge and direction; the verdict is the
    /// maximum over all of them.
    pub fn check(&self, tol: f64) -> MorphismReport {
        let graph = &self.source.graph;
        let mut per_edge = BTreeMap::new();
        let mut max_residual: f64 = 0.0;
        for (e, &(a, b)) in graph.edge_endpoints().iter().enumerate() {
            let (ida, idb) = (graph.vertex_id(a), graph.vertex_id(b));
            let gamma = &self.source.edge_ops[e];
            let gamma_t = &self.target.edge_ops[e];
            let ca = &self.blocks[ida];
            let cb = &self.blocks[idb];
            // C_a Gamma_ab = Gamma~_ab C_b and the adjoint-oriented partner.
            let r1 = linalg::frobenius_norm(&(ca * gamma - gamma_t * cb));
            let r2 = linalg::frobenius_norm(&(cb * gamma.adjoint() - gamma_t.adjoint() * ca));
            max_residual = max_residual.max(r1).max(r2);
            per_edge.insert(format!("{ida}|{idb}"), (r1, r2));
        }
        MorphismReport {
            max_residual,
            per_edge,
            tolerance: tol,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MorphismReport {
    pub max_residual: f64,
    /// Residuals of the two intertwining directions per edge key "a|b".
    pub per_edge: BTreeMap<String, (f64, f64)>,
    pub tolerance: f64,
}

impl MorphismReport {
    pub fn passes(&self) -> bool {
        let scale = 1.0_f64;
        self.max_residual <= (self.tolerance * scale).max(TOL_FLOOR)
    }
}

/// Verdict of the numerical equivalence test.
#[derive(Debug, Clone)]
pub enum Equivalence {
    Equivalent {
        /// Unitary witnesses per vertex.
        witness: BTreeMap<VertexId, CMat>,
        /// Maximum intertwining residual of the witness.
        residual: f64,
    },
    Inequivalent {
        reason: String,
    },
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent { .. })
    }
}

/// Decides unitary equivalence of two locally scalar representations.
///
/// Stage one rejects on dimension or support-character mismatch. Stage two
/// solves the full intertwining system, looks for an invertible solution in
/// its null space (sixteen seeded attempts) and returns the unitary polar
/// factors as a witness.
pub fn equivalent(
    rep1: &Representation,
    rep2: &Representation,
    tol: f64,
) -> Result<Equivalence, RepError> {
    equivalent_seeded(rep1, rep2, tol, 0)
}

pub fn equivalent_seeded(
    rep1: &Representation,
    rep2: &Representation,
    tol: f64,
    seed: u64,
) -> Result<Equivalence, RepError> {
    if rep1.graph != rep2.graph {
        return Err(RepError::GraphMismatch);
    }
    let report1 = rep1.scalarity(tol);
    let report2 = rep2.scalarity(tol);
    for (rep, report) in [(&rep1, &report1), (&rep2, &report2)] {
        if !report.is_locally_scalar {
            let (vertex, &residual) = report
                .residuals
                .iter()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .expect("non-scalar report has a residual");
            let _ = rep;
            return Err(RepError::NotLocallyScalar {
                vertex: vertex.clone(),
                residual,
            });
        }
    }

    // Stage one: dimensions and support characters must agree.
    if rep1.dims != rep2.dims {
        return Ok(Equivalence::Inequivalent {
            reason: format!(
                "dimension mismatch: {} vs {}",
                rep1.dims, rep2.dims
            ),
        });
    }
    let char_tol = (tol * 10.0).max(TOL_FLOOR);
    if !report1.character.approx_eq(&report2.character, char_tol) {
        return Ok(Equivalence::Inequivalent {
            reason: format!(
                "character mismatch on support: {} vs {}",
                report1.character, report2.character
            ),
        });
    }

    if rep1.total_dim() == 0 {
        return Ok(Equivalence::Equivalent {
            witness: BTreeMap::new(),
            residual: 0.0,
        });
    }

    // Stage two: null space of the stacked intertwining system.
    let graph = &rep1.graph;
    let mut offsets = BTreeMap::new();
    let mut total = 0usize;
    for id in graph.vertex_ids() {
        offsets.insert(id.clone(), total);
        total += rep1.dim_of(id) * rep1.dim_of(id);
    }
    let mut rows = 0usize;
    for &(a, b) in graph.edge_endpoints() {
        let (da, db) = (
            rep1.dim_of(graph.vertex_id(a)),
            rep1.dim_of(graph.vertex_id(b)),
        );
        rows += 2 * da * db;
    }
    let mut system = CMat::zeros(rows.max(1), total);
    let mut row = 0usize;
    for (e, &(a, b)) in graph.edge_endpoints().iter().enumerate() {
        let (ida, idb) = (graph.vertex_id(a), graph.vertex_id(b));
        let (da, db) = (rep1.dim_of(ida), rep1.dim_of(idb));
        let gamma = &rep1.edge_ops[e];
        let gamma_t = &rep2.edge_ops[e];
        let (oa, ob) = (offsets[ida], offsets[idb]);
        // C_a Gamma - Gamma~ C_b = 0, entry (i, j).
        for i in 0..da {
            for j in 0..db {
                for k in 0..da {
                    system[(row, oa + i * da + k)] += gamma[(k, j)];
                }
                for k in 0..db {
                    system[(row, ob + k * db + j)] -= gamma_t[(i, k)];
                }
                row += 1;
            }
        }
        // C_b Gamma* - Gamma~* C_a = 0, entry (i, j).
        for i in 0..db {
            for j in 0..da {
                for k in 0..db {
                    system[(row, ob + i * db + k)] += gamma[(j, k)].conj();
                }
                for k in 0..da {
                    system[(row, oa + k * da + j)] -= gamma_t[(k, i)].conj();
                }
                row += 1;
            }
        }
    }
    debug_assert!(rows == 0 || row == rows);

    let basis = linalg::null_space(&system);
    if basis.ncols() == 0 {
        return Ok(Equivalence::Inequivalent {
            reason: "intertwining system has no nonzero solution".into(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..16 {
        let weights: Vec<linalg::C64> = if attempt == 0 && basis.ncols() >= 1 {
            let mut w = vec![linalg::czero(); basis.ncols()];
            w[0] = linalg::creal(1.0);
            w
        } else {
            (0..basis.ncols())
                .map(|_| {
                    use rand::Rng;
                    let re: f64 = rng.gen_range(-1.0..1.0);
                    let im: f64 = rng.gen_range(-1.0..1.0);
                    num_complex::Complex::new(re, im)
                })
                .collect()
        };
        let mut candidate = nalgebra::DVector::<linalg::C64>::zeros(total);
        for (l, w) in weights.iter().enumerate() {
            candidate += basis.column(l) * *w;
        }
        // Extract blocks and test invertibility.
        let mut blocks = BTreeMap::new();
        let mut all_invertible = true;
        for id in graph.vertex_ids() {
            let d = rep1.dim_of(id);
            let o = offsets[id];
            let block = CMat::from_fn(d, d, |i, j| candidate[o + i * d + j]);
            if d > 0 {
                let smin = linalg::smallest_singular_value(&block);
                let smax = block
                    .clone()
                    .svd(false, false)
                    .singular_values
                    .iter()
                    .cloned()
                    .fold(0.0, f64::max);
                if smin <= 1e-8 * smax.max(1.0) {
                    all_invertible = false;
                    break;
                }
            }
            blocks.insert(id.clone(), block);
        }
        if !all_invertible {
            continue;
        }
        let witness: BTreeMap<VertexId, CMat> = blocks
            .into_iter()
            .map(|(id, block)| (id, linalg::polar_unitary(&block)))
            .collect();
        let morphism = Morphism::new(rep1.clone(), rep2.clone(), witness.clone())?;
        let residual = morphism.check(tol).max_residual;
        let scale = rep1
            .edge_ops
            .iter()
            .chain(&rep2.edge_ops)
            .map(linalg::frobenius_norm)
            .fold(1.0, f64::max);
        if residual <= (tol * scale).max(TOL_FLOOR) {
            return Ok(Equivalence::Equivalent { witness, residual });
        }
    }
    Ok(Equivalence::Inequivalent {
        reason: format!(
            "no invertible intertwiner found at tolerance (null space dimension {}); \
             the verdict may be conditioning-limited",
            basis.ncols()
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;
    use crate::linalg::creal;

    /// The all-ones representation in dimension one per vertex.
    fn example_rep(graph: &Graph) -> Representation {
        let dims = DimVector::from_ints(graph, &vec![1; graph.vertex_count()]).unwrap();
        let ops = graph
            .edge_endpoints()
            .iter()
            .map(|_| CMat::from_element(1, 1, creal(1.0)))
            .collect();
        Representation::new(graph.clone(), dims, ops).unwrap()
    }

    #[test]
    fn scalarity_example_one_a2() {
        let g = families::a_n(2).unwrap();
        let rep = example_rep(&g);
        let report = rep.scalarity(DEFAULT_TOL);
        assert!(report.is_locally_scalar);
        assert_eq!(report.character.get("1"), Some(1.0));
        assert_eq!(report.character.get("2"), Some(1.0));
    }

    #[test]
    fn scalarity_zero_neighbor() {
        let g = families::a_n(2).unwrap();
        let dims = DimVector::from_ints(&g, &[1, 0]).unwrap();
        let rep = Representation::new(g.clone(), dims, vec![CMat::zeros(1, 0)]).unwrap();
        let report = rep.scalarity(DEFAULT_TOL);
        assert!(report.is_locally_scalar);
        assert_eq!(report.character.get("1"), Some(0.0));
        assert_eq!(report.character.get("2"), None);
    }

    #[test]
    fn scalarity_rank_one_projector_fails() {
        let g = families::a_n(2).unwrap();
        let dims = DimVector::from_ints(&g, &[2, 1]).unwrap();
        let mut gamma = CMat::zeros(2, 1);
        gamma[(0, 0)] = creal(1.0);
        let rep = Representation::new(g.clone(), dims, vec![gamma]).unwrap();
        let report = rep.scalarity(DEFAULT_TOL);
        assert!(!report.is_locally_scalar);
        assert!(report.residuals["1"] > 0.1);
        assert!(report.residuals["2"] < 1e-12);
    }

    #[test]
    fn direct_sum_simplest_objects() {
        let g = families::a_n(2).unwrap();
        let p1 = Representation::simplest(g.clone(), "1").unwrap();
        let p2 = Representation::simplest(g.clone(), "2").unwrap();
        let sum = direct_sum(&[&p1, &p2]).unwrap();
        assert_eq!(sum.dims(), &DimVector::from_ints(&g, &[1, 1]).unwrap());
        assert_eq!(sum.edge_op(0), &CMat::zeros(1, 1));
    }

    #[test]
    fn direct_sum_with_zero_rep() {
        let g = families::a_n(3).unwrap();
        let rep = example_rep(&g);
        let zero = Representation::zero(g.clone());
        let sum = direct_sum(&[&rep, &zero]).unwrap();
        assert_eq!(sum, rep);
    }

    #[test]
    fn direct_sum_two_copies() {
        let g = families::a_n(2).unwrap();
        let rep = example_rep(&g);
        let sum = direct_sum(&[&rep, &rep]).unwrap();
        assert_eq!(sum.dims(), &DimVector::from_ints(&g, &[2, 2]).unwrap());
        assert_eq!(sum.edge_op(0), &CMat::identity(2, 2));
    }

    #[test]
    fn gauge_identity_is_noop() {
        let g = families::a_n(3).unwrap();
        let rep = example_rep(&g);
        let gauged = rep.gauge(&BTreeMap::new(), DEFAULT_TOL).unwrap();
        assert_eq!(gauged, rep);
    }

    #[test]
    fn gauge_preserves_character() {
        let g = families::star(3).unwrap();
        let rep = example_rep(&g);
        let gauged = rep.gauge_random(11);
        let before = rep.scalarity(DEFAULT_TOL);
        let after = gauged.scalarity(DEFAULT_TOL);
        assert!(after.is_locally_scalar);
        assert!(before.character.approx_eq(&after.character, 1e-10));
    }

    #[test]
    fn gauge_same_seed_is_bitwise_identical() {
        let g = families::a_n(3).unwrap();
        let rep = example_rep(&g);
        assert_eq!(rep.gauge_random(42), rep.gauge_random(42));
    }

    #[test]
    fn gauge_rejects_non_unitary() {
        let g = families::a_n(2).unwrap();
        let rep = example_rep(&g);
        let mut map = BTreeMap::new();
        map.insert("1".to_string(), CMat::from_element(1, 1, creal(2.0)));
        assert!(matches!(
            rep.gauge(&map, DEFAULT_TOL),
            Err(RepError::NotUnitary { .. })
        ));
    }

    #[test]
    fn morphism_identity_and_zero() {
        let g = families::a_n(3).unwrap();
        let rep = example_rep(&g);
        assert!(Morphism::identity(&rep).check(DEFAULT_TOL).max_residual < 1e-14);
        let zero = Morphism::zero(&rep, &rep).unwrap();
        assert!(zero.check(DEFAULT_TOL).max_residual < 1e-14);
    }

    #[test]
    fn morphism_gauge_unitaries_intertwine() {
        let g = families::star(3).unwrap();
        let rep = example_rep(&g);
        let us = rep.random_gauge_unitaries(5);
        let gauged = rep.gauge(&us, DEFAULT_TOL).unwrap();
        let m = Morphism::new(rep, gauged, us).unwrap();
        assert!(m.check(DEFAULT_TOL).max_residual < 1e-12);
    }

    #[test]
    fn equivalent_gauge_pair() {
        let g = families::a_n(3).unwrap();
        let rep = example_rep(&g);
        let gauged = rep.gauge_random(7);
        match equivalent(&rep, &gauged, DEFAULT_TOL).unwrap() {
            Equivalence::Equivalent { residual, .. } => assert!(residual < 1e-8),
            Equivalence::Inequivalent { reason } => panic!("expected equivalence: {reason}"),
        }
    }

    #[test]
    fn inequivalent_different_dims() {
        let g = families::a_n(2).unwrap();
        let p1 = Representation::simplest(g.clone(), "1").unwrap();
        let p2 = Representation::simplest(g, "2").unwrap();
        match equivalent(&p1, &p2, DEFAULT_TOL).unwrap() {
            Equivalence::Inequivalent { reason } => {
                assert!(reason.contains("dimension"));
            }
            _ => panic!("expected inequivalence"),
        }
    }

    #[test]
    fn equivalent_phase_twist() {
        // Multiplying edge matrices by phases is absorbed by vertex unitaries.
        let g = families::a_n(3).unwrap();
        let rep = example_rep(&g);
        let phases = [0.3_f64, -1.2];
        let ops = rep
            .edge_ops()
            .iter()
            .zip(phases)
            .map(|(m, theta)| m * num_complex::Complex::from_polar(1.0, theta))
            .collect();
        let twisted = Representation::new(g.clone(), rep.dims().clone(), ops).unwrap();
        match equivalent(&rep, &twisted, DEFAULT_TOL).unwrap() {
            Equivalence::Equivalent { witness, residual } => {
                assert!(residual < 1e-8);
                for u in witness.values() {
                    assert!(linalg::is_unitary(u, 1e-8));
                }
            }
            Equivalence::Inequivalent { reason } => panic!("expected equivalence: {reason}"),
        }
    }

    #[test]
    fn direct_sum_scalarity_iff_characters_agree() {
        let g = families::a_n(2).unwrap();
        // Example rep has f = (1, 1); the simplest at "1" has f(1) = 0.
        let rep = example_rep(&g);
        let p1 = Representation::simplest(g.clone(), "1").unwrap();
        let sum = direct_sum(&[&rep, &p1]).unwrap();
        assert!(!sum.scalarity(DEFAULT_TOL).is_locally_scalar);
        // Two copies of the same representation always agree.
        let sum2 = direct_sum(&[&rep, &rep]).unwrap();
        assert!(sum2.scalarity(DEFAULT_TOL).is_locally_scalar);
    }
}
