//! Entry points connecting the core to its applications: unitarization of
//! quiver representations over Dynkin graphs, translation between
//! orthoprojector families summing to a scalar and star-graph
//! representations, the all-ones representation, and the parity trace
//! balance check.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use thiserror::Error;

use crate::classifier::{self, build_indecomposable, BuildOptions, ClassifierError};
use crate::graph::{Graph, GraphClass, GraphError, Parity, VertexId};
use crate::linalg::{self, CMat};
use crate::rep::{CharVector, DimVector, RepError, Representation, TOL_FLOOR};

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("matrix {index} is not an orthoprojector (residual {residual:.3e})")]
    NotProjector { index: usize, residual: f64 },
    #[error("projector sum is not scalar (residual {residual:.3e})")]
    SumNotScalar { residual: f64 },
    #[error("leaf `{leaf}` does not carry an isometry: character {alpha} is not 1")]
    LeafNotIsometry { leaf: VertexId, alpha: f64 },
    #[error("dimension vector is not a positive root: {0}")]
    NotARoot(String),
    #[error("graph classifies as {class}; an indecomposable representation that is not unitarizable exists in twice the radical dimension")]
    NotDynkin { class: GraphClass },
    #[error("graph is not a star: {0}")]
    NotStarGraph(String),
    #[error("representation is not locally scalar at `{vertex}` (residual {residual:.3e})")]
    NotLocallyScalar { vertex: VertexId, residual: f64 },
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A quiver: an orientation on top of a pipeline graph. Arrow `i` orients
/// edge `i` of the underlying graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quiver {
    graph: Graph,
    arrows: Vec<(VertexId, VertexId)>,
}

impl Quiver {
    /// Builds a quiver from its arrows; the underlying graph forgets the
    /// orientation and must satisfy the pipeline invariants.
    pub fn new(
        vertices: Vec<VertexId>,
        arrows: Vec<(VertexId, VertexId)>,
    ) -> Result<Quiver, BridgeError> {
        let graph = Graph::new(vertices, &arrows)?;
        Ok(Quiver { graph, arrows })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn arrows(&self) -> &[(VertexId, VertexId)] {
        &self.arrows
    }

    /// The matrix of arrow `i` in a graph representation, mapping the tail
    /// fiber to the head fiber. The stored canonical matrix maps the larger
    /// endpoint to the smaller; when the arrow runs the other way the
    /// quiver-side matrix is the conjugate transpose.
    pub fn arrow_matrix(&self, rep: &Representation, arrow: usize) -> CMat {
        let (_, head) = &self.arrows[arrow];
        let head_index = self.graph.vertex_index(head).expect("known vertex");
        rep.edge_op_into(arrow, head_index)
    }
}

/// Unitarizes the unique indecomposable quiver representation in a root
/// dimension: builds the locally scalar graph representation in that
/// dimension through the functor construction. Non-Dynkin underlying graphs
/// are refused with the classification as obstruction.
pub fn unitarize(
    quiver: &Quiver,
    dims: &DimVector,
    u: Option<&CharVector>,
) -> Result<(Representation, CharVector), BridgeError> {
    let graph = quiver.graph();
    let class = graph.classify()?;
    if !class.is_dynkin() {
        return Err(BridgeError::NotDynkin { class });
    }
    let x = dims.to_gvector(graph);
    if !x.is_positive() || graph.tits_form(&x)? != num_rational::Rational64::one() {
        return Err(BridgeError::NotARoot(format!(
            "{} has Tits form {} (a positive root has value 1)",
            dims,
            graph.tits_form(&x)?
        )));
    }
    // Locate the unique admissible (vertex, steps) pair reaching this root.
    let off = match u {
        Some(c) => c.clone(),
        None => CharVector::constant(graph, 1.0),
    };
    let triple = classifier::locate_triple(graph, &x, off)?;
    let (rep, character) = build_indecomposable(graph, &triple, &BuildOptions::default())?;
    debug_assert_eq!(rep.dims(), dims);
    Ok((rep, character))
}

/// The two parity-weighted trace sums of a locally scalar representation.
#[derive(Debug, Clone, Copy)]
pub struct BalanceReport {
    pub even_sum: f64,
    pub odd_sum: f64,
}

impl BalanceReport {
    pub fn difference(&self) -> f64 {
        self.even_sum - self.odd_sum
    }
}

impl fmt::Display for BalanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "even {:.12e}, odd {:.12e}, difference {:.3e}",
            self.even_sum,
            self.odd_sum,
            self.difference()
        )
    }
}

/// Computes the parity-weighted trace sums. A difference beyond tolerance
/// certifies that no character assignment makes the representation locally
/// scalar.
pub fn trace_obstruction(rep: &Representation, tol: f64) -> Result<BalanceReport, BridgeError> {
    let report = rep.scalarity(tol);
    if !report.is_locally_scalar {
        let (vertex, &residual) = report
            .residuals
            .iter()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("non-scalar report has residuals");
        return Err(BridgeError::NotLocallyScalar {
            vertex: vertex.clone(),
            residual,
        });
    }
    let graph = rep.graph();
    let mut even_sum = 0.0;
    let mut odd_sum = 0.0;
    for (v, alpha) in report.character.iter() {
        let weighted = alpha * rep.dim_of(v) as f64;
        match graph.parity_of(v)? {
            Parity::Even => even_sum += weighted,
            Parity::Odd => odd_sum += weighted,
        }
    }
    Ok(BalanceReport { even_sum, odd_sum })
}

/// A family of orthoprojectors on a common ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorFamily {
    pub ambient_dim: usize,
    pub projectors: Vec<CMat>,
}

impl ProjectorFamily {
    /// Checks shapes, Hermitian idempotency and the scalar-sum condition;
    /// returns the scalar.
    pub fn validate(&self, tol: f64) -> Result<f64, BridgeError> {
        let d = self.ambient_dim;
        for (index, p) in self.projectors.iter().enumerate() {
            if p.nrows() != d || p.ncols() != d {
                return Err(BridgeError::NotProjector {
                    index,
                    residual: f64::INFINITY,
                });
            }
            let hermitian = linalg::frobenius_norm(&(p - p.adjoint()));
            let idempotent = linalg::frobenius_norm(&(p * p - p));
            let residual = hermitian.max(idempotent);
            if residual > (tol * (d as f64).max(1.0)).max(TOL_FLOOR) {
                return Err(BridgeError::NotProjector { index, residual });
            }
        }
        let mut sum = CMat::zeros(d, d);
        for p in &self.projectors {
            sum += p;
        }
        let alpha = if d > 0 { sum.trace().re / d as f64 } else { 0.0 };
        let mut dev = sum;
        for i in 0..d {
            dev[(i, i)] -= linalg::creal(alpha);
        }
        let residual = linalg::frobenius_norm(&dev);
        if residual > (tol * alpha.abs().max(1.0) * (d as f64).sqrt().max(1.0)).max(TOL_FLOOR) {
            return Err(BridgeError::SumNotScalar { residual });
        }
        Ok(alpha)
    }
}

/// Converts an orthoprojector family with scalar sum into the locally scalar
/// representation of the star graph with center "0": the leaf fiber is the
/// image of the projector and the edge operator is the natural isometry into
/// the ambient space.
pub fn from_projectors(
    family: &ProjectorFamily,
    tol: f64,
) -> Result<(Representation, f64), BridgeError> {
    let alpha = family.validate(tol)?;
    let n = family.projectors.len();
    let mut vertices = vec!["0".to_string()];
    vertices.extend((1..=n).map(|i| i.to_string()));
    let edges: Vec<(VertexId, VertexId)> = (1..=n)
        .map(|i| ("0".to_string(), i.to_string()))
        .collect();
    let graph = Graph::new(vertices, &edges)?;

    let mut dim_entries: BTreeMap<VertexId, usize> = BTreeMap::new();
    dim_entries.insert("0".to_string(), family.ambient_dim);
    let mut ops = Vec::with_capacity(n);
    for (i, p) in family.projectors.iter().enumerate() {
        let basis = image_basis(p);
        dim_entries.insert((i + 1).to_string(), basis.ncols());
        ops.push(basis); // H_leaf -> H_0, canonical since "0" < leaf ids
    }
    let dims = DimVector::new(&graph, dim_entries)?;
    let rep = Representation::new(graph, dims, ops)?;
    Ok((rep, alpha))
}

/// Orthonormal basis of the image of an orthoprojector, by Hermitian
/// eigendecomposition with the spectrum split at one half. Columns are
/// ordered by descending eigenvalue, ties broken lexicographically on the
/// component values, and re-orthonormalized.
fn image_basis(p: &CMat) -> CMat {
    let d = p.nrows();
    if d == 0 {
        return CMat::zeros(0, 0);
    }
    let eigen = nalgebra::SymmetricEigen::new(p.clone());
    let mut picked: Vec<(f64, nalgebra::DVector<linalg::C64>)> = Vec::new();
    for (j, &value) in eigen.eigenvalues.iter().enumerate() {
        if value > 0.5 {
            picked.push((value, eigen.eigenvectors.column(j).into_owned()));
        }
    }
    picked.sort_by(|(va, ua), (vb, ub)| {
        vb.total_cmp(va).then_with(|| {
            for (x, y) in ua.iter().zip(ub.iter()) {
                let c = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            std::cmp::Ordering::Equal
        })
    });
    if picked.is_empty() {
        return CMat::zeros(d, 0);
    }
    let raw = CMat::from_columns(
        &picked
            .into_iter()
            .map(|(_, u)| u)
            .collect::<Vec<_>>(),
    );
    // Re-orthonormalize so the leaf characters are 1 to machine precision.
    let mut columns: Vec<nalgebra::DVector<linalg::C64>> = Vec::with_capacity(raw.ncols());
    for j in 0..raw.ncols() {
        let mut v = raw.column(j).into_owned();
        for u in &columns {
            let c = u.adjoint() * &v;
            v -= u * c[(0, 0)];
        }
        let norm = v.norm();
        columns.push(v / linalg::creal(norm));
    }
    CMat::from_columns(&columns)
}

/// Converts a star-graph representation with isometric leaf operators back
/// into the orthoprojector family on the center fiber.
pub fn to_projectors(rep: &Representation, tol: f64) -> Result<ProjectorFamily, BridgeError> {
    let graph = rep.graph();
    let center = star_center(graph)?;
    let center_index = graph.vertex_index(&center).expect("known vertex");
    let report = rep.scalarity(tol);
    let mut projectors = Vec::new();
    let mut leaves: Vec<&VertexId> = graph
        .vertex_ids()
        .iter()
        .filter(|v| **v != center)
        .collect();
    leaves.sort();
    for leaf in leaves {
        if rep.dim_of(leaf) > 0 {
            let alpha = report.character.get(leaf).unwrap_or(0.0);
            if (alpha - 1.0).abs() > (tol * 10.0).max(TOL_FLOOR) {
                return Err(BridgeError::LeafNotIsometry {
                    leaf: leaf.clone(),
                    alpha,
                });
            }
        }
        let li = graph.vertex_index(leaf).expect("known vertex");
        let e = graph
            .edge_endpoints()
            .iter()
            .position(|&(a, b)| (a == center_index && b == li) || (a == li && b == center_index))
            .ok_or_else(|| BridgeError::NotStarGraph(format!("leaf `{leaf}` not adjacent to center")))?;
        let gamma = rep.edge_op_into(e, center_index); // H_leaf -> H_center
        projectors.push(&gamma * gamma.adjoint());
    }
    Ok(ProjectorFamily {
        ambient_dim: rep.dim_of(&center),
        projectors,
    })
}

/// The center of a star graph: the unique vertex adjacent to all others.
/// With exactly two vertices the tie breaks toward "0" when present,
/// otherwise toward the smaller id.
fn star_center(graph: &Graph) -> Result<VertexId, BridgeError> {
    let n = graph.vertex_count();
    if n < 2 {
        return Err(BridgeError::NotStarGraph(
            "a star needs a center and at least one leaf".into(),
        ));
    }
    if n == 2 {
        let zero = graph.vertex_ids().iter().find(|v| v.as_str() == "0");
        return Ok(match zero {
            Some(v) => v.clone(),
            None => graph.vertex_ids().iter().min().expect("nonempty").clone(),
        });
    }
    let centers: Vec<usize> = (0..n).filter(|&v| graph.degree(v) == n - 1).collect();
    match centers.as_slice() {
        [c] => {
            for v in 0..n {
                if v != *c && graph.degree(v) != 1 {
                    return Err(BridgeError::NotStarGraph(format!(
                        "vertex `{}` has degree {}",
                        graph.vertex_id(v),
                        graph.degree(v)
                    )));
                }
            }
            Ok(graph.vertex_id(*c).to_string())
        }
        _ => Err(BridgeError::NotStarGraph(
            "no unique vertex adjacent to all others".into(),
        )),
    }
}

/// The all-ones representation: one-dimensional space at every vertex and
/// the unit scalar on every edge. Locally scalar with the vertex degrees as
/// character (a loop contributes twice); indecomposable exactly when the
/// graph is connected.
pub fn all_ones_rep(graph: &Graph) -> (Representation, CharVector) {
    let dims = DimVector::from_ints(graph, &vec![1; graph.vertex_count()])
        .expect("matching length");
    let ops = graph
        .edge_endpoints()
        .iter()
        .map(|_| CMat::from_element(1, 1, linalg::creal(1.0)))
        .collect();
    let rep = Representation::new(graph.clone(), dims, ops).expect("shapes match");
    let character = rep.scalarity(crate::rep::DEFAULT_TOL).character;
    (rep, character)
}
