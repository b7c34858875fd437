//! Even and odd reflection functors on locally scalar representations, the
//! corresponding transport of morphisms, and the pure arithmetic transport of
//! (dimension, character) pairs.
//!
//! Applying the functor of parity P processes every P-vertex inside or
//! adjacent to the support. At each processed vertex the scaled column stack
//! of inbound edge operators is an isometry into the orthogonal sum of the
//! neighbor fibers; the new fiber is the orthogonal complement of its image
//! and the new edge operators are the scaled block rows of the complement
//! basis. Dimensions transform by the same-parity partial Coxeter
//! transformation, characters by the opposite-parity one on the support.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{Graph, GraphError, Parity, VertexId};
use crate::linalg::{self, CMat, PivotOrder};
use crate::rep::{CharVector, DimVector, Morphism, RepError, Representation, TOL_FLOOR};

#[derive(Debug, Error)]
pub enum FunctorError {
    #[error("not admissible: {0}")]
    NotAdmissible(String),
    #[error("representation is not locally scalar with the given character at `{vertex}` (residual {residual:.3e})")]
    NotLocallyScalar { vertex: VertexId, residual: f64 },
    #[error("numerical rank failure at `{vertex}`: complement dimension should be {expected}")]
    NumericalRankFailure { vertex: VertexId, expected: usize },
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Options controlling one functor application.
#[derive(Debug, Clone, Copy)]
pub struct FunctorOptions {
    /// Numerical tolerance for scalarity and admissibility checks.
    pub tol: f64,
    /// Pivot order of the orthonormal-complement completion. The basis choice
    /// is gauge freedom; cross-run comparisons go through equivalence, never
    /// bitwise matrix equality.
    pub pivot: PivotOrder,
}

impl Default for FunctorOptions {
    fn default() -> Self {
        FunctorOptions {
            tol: crate::rep::DEFAULT_TOL,
            pivot: PivotOrder::Ascending,
        }
    }
}

/// One functor application: the representation, its character on the support,
/// the exterior character values on the boundary of the support, and the
/// parity of the functor.
#[derive(Debug, Clone)]
pub struct FunctorInput<'a> {
    pub rep: &'a Representation,
    /// Character values; must cover the support of the representation.
    pub character: &'a CharVector,
    /// Exterior values on boundary vertices; missing entries fall back to the
    /// character map and then to 1.0.
    pub delta: &'a CharVector,
    pub parity: Parity,
    pub options: FunctorOptions,
}

/// Residuals of the block-unitarity identities at a processed vertex.
#[derive(Debug, Clone, Copy)]
pub struct UnitarityCertificate {
    /// Deviation of the inbound isometry from an isometry.
    pub isometry: f64,
    /// Deviation of the complement basis from orthonormality.
    pub complement: f64,
    /// Cross term between isometry image and complement.
    pub cross: f64,
    /// Deviation of the two projectors from resolving the identity.
    pub completeness: f64,
}

impl UnitarityCertificate {
    pub fn max(&self) -> f64 {
        self.isometry
            .max(self.complement)
            .max(self.cross)
            .max(self.completeness)
    }
}

/// Per-vertex data retained from a functor application; enough to transport
/// morphisms along the functor.
#[derive(Debug, Clone)]
pub struct ProcessedVertex {
    pub alpha: f64,
    /// Neighbor ids in ascending order; block rows of the stacked operators
    /// follow this order.
    pub neighbor_order: Vec<VertexId>,
    /// Row offset of each neighbor block in the stacked space.
    pub row_offsets: Vec<usize>,
    /// The scaled inbound isometry, shape (sum of neighbor dims) x d_i.
    pub isometry: CMat,
    /// Orthonormal basis of the complement, shape (sum of neighbor dims) x new d_i.
    pub complement: CMat,
    pub certificate: UnitarityCertificate,
}

/// Result of one functor application.
#[derive(Debug, Clone)]
pub struct FunctorOutput {
    pub rep: Representation,
    /// Transported character on the full vertex set (support values are the
    /// measured character; off-support values are the carried exterior ones).
    pub character: CharVector,
    /// The predicted dimension vector; always equals `rep.dims()`.
    pub dim_check: DimVector,
    pub processed: BTreeMap<VertexId, ProcessedVertex>,
    pub parity: Parity,
}

impl FunctorOutput {
    pub fn max_certificate_residual(&self) -> f64 {
        self.processed
            .values()
            .map(|p| p.certificate.max())
            .fold(0.0, f64::max)
    }
}

/// Resolves the character value used at a processed vertex: support vertices
/// read the character, boundary vertices read delta, then character, then 1.0.
fn resolve_alpha(
    v: &str,
    in_support: bool,
    character: &CharVector,
    delta: &CharVector,
) -> Result<f64, FunctorError> {
    if in_support {
        character.get(v).ok_or_else(|| {
            FunctorError::NotAdmissible(format!("character missing at support vertex `{v}`"))
        })
    } else {
        Ok(delta
            .get(v)
            .or_else(|| character.get(v))
            .unwrap_or(1.0))
    }
}

/// Builds the full-vertex character used for pure pair transport: measured
/// values on the support, exterior values elsewhere.
fn full_character(
    graph: &Graph,
    dims: &DimVector,
    character: &CharVector,
    delta: &CharVector,
) -> Result<CharVector, FunctorError> {
    let mut full = CharVector::new();
    for v in graph.vertex_ids() {
        let alpha = resolve_alpha(v, dims.get(v) > 0, character, delta)?;
        full.insert(v.clone(), alpha);
    }
    Ok(full)
}

/// Pure arithmetic transport of a (dimension, character) pair under the
/// functor of the given parity. Dimensions change by the same-parity partial
/// Coxeter transformation; the character flips, by the opposite-parity
/// transformation, exactly at the support vertices of the opposite parity.
///
/// The character must be positive on the parity side of the support; the
/// transported dimensions must stay nonnegative, otherwise the pair leaves
/// the admissible chain and `NotAdmissible` is returned.
pub fn predict_dim_char(
    graph: &Graph,
    d: &DimVector,
    f: &CharVector,
    parity: Parity,
) -> Result<(DimVector, CharVector), FunctorError> {
    let support = d.support();
    // Admissibility: f > 0 on the parity side of the support.
    for v in &support {
        if graph.parity_of(v)? == parity {
            let alpha = f.get(v).ok_or_else(|| {
                FunctorError::NotAdmissible(format!("character missing at support vertex `{v}`"))
            })?;
            if alpha <= TOL_FLOOR {
                return Err(FunctorError::NotAdmissible(format!(
                    "character must be positive at {parity} support vertex `{v}`, got {alpha}"
                )));
            }
        }
    }

    let mut new_dims = d.clone();
    for (vi, v) in graph.vertex_ids().iter().enumerate() {
        if graph.parity(vi)? != parity {
            continue;
        }
        let neighbor_sum: usize = graph
            .neighbors(vi)
            .iter()
            .map(|&w| d.get(graph.vertex_id(w)))
            .sum();
        let old = d.get(v);
        if neighbor_sum < old {
            return Err(FunctorError::NotAdmissible(format!(
                "dimension at `{v}` would become negative ({neighbor_sum} - {old}); \
                 the pair leaves the admissible chain"
            )));
        }
        new_dims.set(v, neighbor_sum - old);
    }

    let mut new_char = CharVector::new();
    for (vi, v) in graph.vertex_ids().iter().enumerate() {
        let old = f.value_or(v, 1.0);
        if graph.parity(vi)? == parity.opposite() && support.contains(v) {
            let neighbor_sum: f64 = graph
                .neighbors(vi)
                .iter()
                .map(|&w| f.value_or(graph.vertex_id(w), 1.0))
                .sum();
            let flipped = neighbor_sum - old;
            if flipped < -TOL_FLOOR {
                return Err(FunctorError::NotAdmissible(format!(
                    "character at `{v}` would become negative ({flipped}); \
                     the pair leaves the admissible chain"
                )));
            }
            new_char.insert(v.clone(), flipped.max(0.0));
        } else {
            new_char.insert(v.clone(), old);
        }
    }
    Ok((new_dims, new_char))
}

/// The root-pair step: identical arithmetic to [`predict_dim_char`] with the
/// additional membership check d(i) + f(i) > 0 on every vertex.
pub fn root_pair_step(
    graph: &Graph,
    d: &DimVector,
    f: &CharVector,
    parity: Parity,
) -> Result<(DimVector, CharVector), FunctorError> {
    for v in graph.vertex_ids() {
        if d.get(v) == 0 && f.value_or(v, 1.0) <= TOL_FLOOR {
            return Err(FunctorError::NotAdmissible(format!(
                "pair leaves S: d + f vanishes at `{v}`"
            )));
        }
    }
    predict_dim_char(graph, d, f, parity)
}

/// Applies the reflection functor of the given parity to a locally scalar
/// representation.
pub fn apply_functor(input: FunctorInput<'_>) -> Result<FunctorOutput, FunctorError> {
    let FunctorInput {
        rep,
        character,
        delta,
        parity,
        options,
    } = input;
    let graph = rep.graph();
    let tol = options.tol;

    // The construction divides by character values at processed vertices, so
    // the representation must actually be an f-representation.
    let report = rep.scalarity(tol);
    for (v, alpha) in report.character.iter() {
        let claimed = character.get(v).ok_or_else(|| {
            FunctorError::NotAdmissible(format!("character missing at support vertex `{v}`"))
        })?;
        let scale = claimed.abs().max(1.0);
        let deviation = (alpha - claimed).abs();
        if !report.is_locally_scalar || deviation > (10.0 * tol * scale).max(TOL_FLOOR) {
            let residual = report.residuals.get(v).copied().unwrap_or(deviation);
            return Err(FunctorError::NotLocallyScalar {
                vertex: v.clone(),
                residual: residual.max(deviation),
            });
        }
    }

    let full_f = full_character(graph, rep.dims(), character, delta)?;
    let (new_dims, new_char) = predict_dim_char(graph, rep.dims(), &full_f, parity)?;

    let support = rep.support();
    // Processed vertices: parity-side vertices inside or adjacent to support.
    let mut processed_ids: Vec<usize> = Vec::new();
    for vi in graph.vertices_of_parity(parity)? {
        let v = graph.vertex_id(vi);
        let touches = support.contains(v)
            || graph
                .neighbors(vi)
                .iter()
                .any(|&w| support.contains(graph.vertex_id(w)));
        if touches {
            processed_ids.push(vi);
        }
    }

    // Edge lookup by index pair.
    let mut edge_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (e, &(a, b)) in graph.edge_endpoints().iter().enumerate() {
        edge_of.insert((a, b), e);
    }

    let mut new_ops: Vec<CMat> = rep.edge_ops().to_vec();
    let mut processed: BTreeMap<VertexId, ProcessedVertex> = BTreeMap::new();

    for &vi in &processed_ids {
        let v = graph.vertex_id(vi).to_string();
        let d_i = rep.dim_of(&v);
        let alpha = resolve_alpha(&v, d_i > 0, character, delta)?;
        if alpha <= TOL_FLOOR {
            return Err(FunctorError::NotAdmissible(format!(
                "character must be positive at processed vertex `{v}`, got {alpha}"
            )));
        }
        let sqrt_alpha = alpha.sqrt();

        let neighbor_order: Vec<VertexId> = graph
            .neighbors(vi)
            .iter()
            .map(|&w| graph.vertex_id(w).to_string())
            .collect();
        let mut row_offsets = Vec::with_capacity(neighbor_order.len());
        let mut m = 0usize;
        for g in &neighbor_order {
            row_offsets.push(m);
            m += rep.dim_of(g);
        }

        // Stacked scaled inbound operators: block g is Gamma_{g,i} / sqrt(alpha).
        let mut iso = CMat::zeros(m, d_i);
        for (g, &offset) in neighbor_order.iter().zip(&row_offsets) {
            let gi = graph.vertex_index(g).expect("neighbor id");
            let e = edge_of[&(gi.min(vi), gi.max(vi))];
            let inbound = rep.edge_op_into(e, gi); // H_i -> H_g
            iso.view_mut((offset, 0), (inbound.nrows(), inbound.ncols()))
                .copy_from(&(inbound / linalg::creal(sqrt_alpha)));
        }

        let expected = m.checked_sub(d_i).ok_or_else(|| {
            FunctorError::NumericalRankFailure {
                vertex: v.clone(),
                expected: 0,
            }
        })?;
        let complement = linalg::orthonormal_complement(&iso, options.pivot).ok_or(
            FunctorError::NumericalRankFailure {
                vertex: v.clone(),
                expected,
            },
        )?;

        let certificate = UnitarityCertificate {
            isometry: linalg::identity_residual(&(iso.adjoint() * &iso)),
            complement: linalg::identity_residual(&(complement.adjoint() * &complement)),
            cross: linalg::frobenius_norm(&(iso.adjoint() * &complement)),
            completeness: linalg::identity_residual(
                &(&iso * iso.adjoint() + &complement * complement.adjoint()),
            ),
        };

        // New edge operators: sqrt(alpha) times the block rows of the
        // complement, oriented into the neighbor.
        for (g, &offset) in neighbor_order.iter().zip(&row_offsets) {
            let gi = graph.vertex_index(g).expect("neighbor id");
            let d_g = rep.dim_of(g);
            let e = edge_of[&(gi.min(vi), gi.max(vi))];
            let block = complement
                .view((offset, 0), (d_g, complement.ncols()))
                .into_owned()
                * linalg::creal(sqrt_alpha); // new H_i -> H_g
            let (a, _) = graph.edge_endpoints()[e];
            new_ops[e] = if a == gi { block } else { block.adjoint() };
        }

        processed.insert(
            v,
            ProcessedVertex {
                alpha,
                neighbor_order,
                row_offsets,
                isometry: iso,
                complement,
                certificate,
            },
        );
    }

    let rep_out = Representation::new(graph.clone(), new_dims.clone(), new_ops)?;
    debug_assert_eq!(rep_out.dims(), &new_dims);
    Ok(FunctorOutput {
        rep: rep_out,
        character: new_char,
        dim_check: new_dims,
        processed,
        parity,
    })
}

/// A transported morphism together with the functor applications that frame it.
#[derive(Debug)]
pub struct TransformedMorphism {
    pub morphism: Morphism,
    pub source_output: FunctorOutput,
    pub target_output: FunctorOutput,
}

/// Transports a morphism along the functor of the given parity. Source and
/// target must both be admissible with the same parity and delta. At a
/// processed vertex with differing source/target characters the transported
/// block is exactly zero.
pub fn transform_morphism(
    morphism: &Morphism,
    source_character: &CharVector,
    target_character: &CharVector,
    delta: &CharVector,
    parity: Parity,
    options: FunctorOptions,
) -> Result<TransformedMorphism, FunctorError> {
    let source_output = apply_functor(FunctorInput {
        rep: &morphism.source,
        character: source_character,
        delta,
        parity,
        options,
    })?;
    let target_output = apply_functor(FunctorInput {
        rep: &morphism.target,
        character: target_character,
        delta,
        parity,
        options,
    })?;

    let graph = morphism.source.graph();
    let mut blocks: BTreeMap<VertexId, CMat> = BTreeMap::new();
    for v in graph.vertex_ids() {
        match (source_output.processed.get(v), target_output.processed.get(v)) {
            (Some(src), Some(tgt)) => {
                let new_rows = target_output.rep.dim_of(v);
                let new_cols = source_output.rep.dim_of(v);
                let scale = src.alpha.abs().max(1.0);
                if (src.alpha - tgt.alpha).abs() > (10.0 * options.tol * scale).max(TOL_FLOOR) {
                    blocks.insert(v.clone(), CMat::zeros(new_rows, new_cols));
                    continue;
                }
                // Block-diagonal of the neighbor blocks, sandwiched between
                // the target and source complement bases.
                let m_src = src.isometry.nrows();
                let m_tgt = tgt.isometry.nrows();
                let mut middle = CMat::zeros(m_tgt, m_src);
                for ((g, &ro_s), &ro_t) in src
                    .neighbor_order
                    .iter()
                    .zip(&src.row_offsets)
                    .zip(&tgt.row_offsets)
                {
                    let c_g = &morphism.blocks[g];
                    middle
                        .view_mut((ro_t, ro_s), (c_g.nrows(), c_g.ncols()))
                        .copy_from(c_g);
                }
                let transported = tgt.complement.adjoint() * middle * &src.complement;
                blocks.insert(v.clone(), transported);
            }
            (None, None) => {
                blocks.insert(v.clone(), morphism.blocks[v].clone());
            }
            _ => {
                return Err(FunctorError::NotAdmissible(format!(
                    "source and target process different vertex sets at `{v}`"
                )));
            }
        }
    }

    let transported = Morphism::new(
        source_output.rep.clone(),
        target_output.rep.clone(),
        blocks,
    )?;
    Ok(TransformedMorphism {
        morphism: transported,
        source_output,
        target_output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;
    use crate::linalg::creal;
    use crate::rep::{equivalent, Equivalence, DEFAULT_TOL};

    fn example_rep(graph: &Graph) -> Representation {
        let dims = DimVector::from_ints(graph, &vec![1; graph.vertex_count()]).unwrap();
        let ops = graph
            .edge_endpoints()
            .iter()
            .map(|_| CMat::from_element(1, 1, creal(1.0)))
            .collect();
        Representation::new(graph.clone(), dims, ops).unwrap()
    }

    /// The D_4-star representation built from three rank-one projectors onto
    /// lines at mutual angle 120 degrees.
    fn star_projector_rep(graph: &Graph) -> Representation {
        let dims = DimVector::from_ints(graph, &[2, 1, 1, 1]).unwrap();
        let ops = (0..3)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                let mut column = CMat::zeros(2, 1);
                column[(0, 0)] = creal(theta.cos());
                column[(1, 0)] = creal(theta.sin());
                column
            })
            .collect();
        Representation::new(graph.clone(), dims, ops).unwrap()
    }

    #[test]
    fn predict_a2_example() {
        let g = families::a_n(2).unwrap();
        let d = DimVector::from_ints(&g, &[1, 1]).unwrap();
        let f = CharVector::from_pairs([("1".into(), 1.0), ("2".into(), 1.0)]);
        let (d2, f2) = predict_dim_char(&g, &d, &f, Parity::Even).unwrap();
        assert_eq!(d2, DimVector::from_ints(&g, &[0, 1]).unwrap());
        assert_eq!(f2.get("1"), Some(1.0));
        assert_eq!(f2.get("2"), Some(0.0));
    }

    #[test]
    fn predict_simple_root_at_odd_vertex() {
        // Even step on a simple root at an odd vertex: dimensions at odd
        // vertices unchanged, boundary even vertices gain the neighbor sum.
        let g = families::a_n(3).unwrap();
        let d = DimVector::simple(&g, "2").unwrap();
        let f = CharVector::from_pairs([
            ("1".into(), 1.0),
            ("2".into(), 0.0),
            ("3".into(), 1.0),
        ]);
        let (d2, _) = predict_dim_char(&g, &d, &f, Parity::Even).unwrap();
        assert_eq!(d2, DimVector::from_ints(&g, &[1, 1, 1]).unwrap());
    }

    #[test]
    fn predict_star_example() {
        let g = families::star(3).unwrap();
        let d = DimVector::from_ints(&g, &[2, 1, 1, 1]).unwrap();
        let f = CharVector::from_pairs([
            ("0".into(), 1.5),
            ("1".into(), 1.0),
            ("2".into(), 1.0),
            ("3".into(), 1.0),
        ]);
        let (d2, f2) = predict_dim_char(&g, &d, &f, Parity::Even).unwrap();
        assert_eq!(d2, DimVector::from_ints(&g, &[1, 1, 1, 1]).unwrap());
        assert_eq!(f2.get("0"), Some(1.5));
        for leaf in ["1", "2", "3"] {
            assert_eq!(f2.get(leaf), Some(0.5));
        }
    }

    #[test]
    fn apply_full_isometry_collapses_to_simplest() {
        let g = families::a_n(2).unwrap();
        let rep = example_rep(&g);
        let f = CharVector::from_pairs([("1".into(), 1.0), ("2".into(), 1.0)]);
        let out = apply_functor(FunctorInput {
            rep: &rep,
            character: &f,
            delta: &CharVector::new(),
            parity: Parity::Even,
            options: FunctorOptions::default(),
        })
        .unwrap();
        assert_eq!(out.rep.dims(), &DimVector::from_ints(&g, &[0, 1]).unwrap());
        assert_eq!(out.character.get("2"), Some(0.0));
        assert!(out.max_certificate_residual() < 1e-10);
    }

    #[test]
    fn apply_rejects_zero_character_at_processed_vertex() {
        let g = families::a_n(2).unwrap();
        let rep = Representation::simplest(g.clone(), "1").unwrap();
        let f = CharVector::from_pairs([("1".into(), 0.0), ("2".into(), 1.0)]);
        // Vertex "1" is even with zero character: the even functor divides
        // by it and must refuse.
        let err = apply_functor(FunctorInput {
            rep: &rep,
            character: &f,
            delta: &CharVector::new(),
            parity: Parity::Even,
            options: FunctorOptions::default(),
        })
        .unwrap_err();
        assert!(matches!(err, FunctorError::NotAdmissible(_)));
    }

    #[test]
    fn apply_star_projector_rep() {
        let g = families::star(3).unwrap();
        let rep = star_projector_rep(&g);
        let f = CharVector::from_pairs([
            ("0".into(), 1.5),
            ("1".into(), 1.0),
            ("2".into(), 1.0),
            ("3".into(), 1.0),
        ]);
        let out = apply_functor(FunctorInput {
            rep: &rep,
            character: &f,
            delta: &CharVector::new(),
            parity: Parity::Even,
            options: FunctorOptions::default(),
        })
        .unwrap();
        assert_eq!(
            out.rep.dims(),
            &DimVector::from_ints(&g, &[1, 1, 1, 1]).unwrap()
        );
        let report = out.rep.scalarity(DEFAULT_TOL);
        assert!(report.is_locally_scalar);
        assert!(report.character.approx_eq(
            &out.character.restrict(&out.rep.support()),
            1e-8
        ));
        assert_eq!(out.character.get("0"), Some(1.5));
        assert_eq!(out.character.get("1"), Some(0.5));
    }

    #[test]
    fn functor_squared_is_identity_up_to_equivalence() {
        let g = families::star(3).unwrap();
        let rep = star_projector_rep(&g).gauge_random(3);
        let f = CharVector::from_pairs([
            ("0".into(), 1.5),
            ("1".into(), 1.0),
            ("2".into(), 1.0),
            ("3".into(), 1.0),
        ]);
        let once = apply_functor(FunctorInput {
            rep: &rep,
            character: &f,
            delta: &CharVector::new(),
            parity: Parity::Even,
            options: FunctorOptions::default(),
        })
        .unwrap();
        let twice = apply_functor(FunctorInput {
            rep: &once.rep,
            character: &once.character,
            delta: &CharVector::new(),
            parity: Parity::Even,
            options: FunctorOptions::default(),
        })
        .unwrap();
        assert_eq!(twice.rep.dims(), rep.dims());
        match equivalent(&rep, &twice.rep, DEFAULT_TOL).unwrap() {
            Equivalence::Equivalent { residual, .. } => assert!(residual < 1e-6),
            Equivalence::Inequivalent { reason } => panic!("expected equivalence: {reason}"),
        }
    }

    #[test]
    fn transform_identity_morphism() {
        let g = families::a_n(3).unwrap();
        let rep = example_rep(&g);
        let f = CharVector::from_pairs([
            ("1".into(), 1.0),
            ("2".into(), 2.0),
            ("3".into(), 1.0),
        ]);
        let id = Morphism::identity(&rep);
        let out = transform_morphism(
            &id,
            &f,
            &f,
            &CharVector::new(),
            Parity::Even,
            FunctorOptions::default(),
        )
        .unwrap();
        for v in g.vertex_ids() {
            let block = &out.morphism.blocks[v];
            assert!(
                linalg::identity_residual(block) < 1e-10,
                "block at {v} should be the identity"
            );
        }
        assert!(out.morphism.check(DEFAULT_TOL).max_residual < 1e-10);
    }

    #[test]
    fn transform_zero_morphism() {
        let g = families::a_n(3).unwrap();
        let rep = example_rep(&g);
        let f = CharVector::from_pairs([
            ("1".into(), 1.0),
            ("2".into(), 2.0),
            ("3".into(), 1.0),
        ]);
        let zero = Morphism::zero(&rep, &rep).unwrap();
        let out = transform_morphism(
            &zero,
            &f,
            &f,
            &CharVector::new(),
            Parity::Odd,
            FunctorOptions::default(),
        )
        .unwrap();
        for block in out.morphism.blocks.values() {
            assert!(linalg::frobenius_norm(block) == 0.0);
        }
    }

    #[test]
    fn transform_respects_composition() {
        let g = families::a_n(3).unwrap();
        let rep = example_rep(&g);
        let f = CharVector::from_pairs([
            ("1".into(), 1.0),
            ("2".into(), 2.0),
            ("3".into(), 1.0),
        ]);
        let us1 = rep.random_gauge_unitaries(21);
        let mid = rep.gauge(&us1, DEFAULT_TOL).unwrap();
        let us2 = mid.random_gauge_unitaries(22);
        let top = mid.gauge(&us2, DEFAULT_TOL).unwrap();
        let c = Morphism::new(rep.clone(), mid.clone(), us1.clone()).unwrap();
        let d = Morphism::new(mid.clone(), top.clone(), us2.clone()).unwrap();
        let dc_blocks: BTreeMap<VertexId, CMat> = g
            .vertex_ids()
            .iter()
            .map(|v| (v.clone(), &us2[v] * &us1[v]))
            .collect();
        let dc = Morphism::new(rep.clone(), top.clone(), dc_blocks).unwrap();

        let options = FunctorOptions::default();
        let delta = CharVector::new();
        let tc = transform_morphism(&c, &f, &f, &delta, Parity::Even, options).unwrap();
        let td = transform_morphism(&d, &f, &f, &delta, Parity::Even, options).unwrap();
        let tdc = transform_morphism(&dc, &f, &f, &delta, Parity::Even, options).unwrap();
        for v in g.vertex_ids() {
            let composite = &td.morphism.blocks[v] * &tc.morphism.blocks[v];
            let direct = &tdc.morphism.blocks[v];
            assert!(
                linalg::frobenius_norm(&(composite - direct)) < 1e-8,
                "composition mismatch at {v}"
            );
        }
    }

    #[test]
    fn transform_vanishes_on_character_mismatch() {
        let g = families::a_n(2).unwrap();
        let rep1 = example_rep(&g);
        let ops = vec![CMat::from_element(1, 1, creal(std::f64::consts::SQRT_2))];
        let rep2 = Representation::new(g.clone(), rep1.dims().clone(), ops).unwrap();
        let f1 = CharVector::from_pairs([("1".into(), 1.0), ("2".into(), 1.0)]);
        let f2 = CharVector::from_pairs([("1".into(), 2.0), ("2".into(), 2.0)]);
        let zero = Morphism::zero(&rep1, &rep2).unwrap();
        let out = transform_morphism(
            &zero,
            &f1,
            &f2,
            &CharVector::new(),
            Parity::Even,
            FunctorOptions::default(),
        )
        .unwrap();
        // Vertex "1" is processed with differing characters: block must be
        // exactly zero, not merely small.
        let block = &out.morphism.blocks["1"];
        assert!(block.iter().all(|c| c.re == 0.0 && c.im == 0.0));
    }

    #[test]
    fn dims_transport_matches_prediction() {
        let g = families::star(3).unwrap();
        let rep = star_projector_rep(&g);
        let f = CharVector::from_pairs([
            ("0".into(), 1.5),
            ("1".into(), 1.0),
            ("2".into(), 1.0),
            ("3".into(), 1.0),
        ]);
        let (predicted, _) = predict_dim_char(&g, rep.dims(), &f, Parity::Even).unwrap();
        let out = apply_functor(FunctorInput {
            rep: &rep,
            character: &f,
            delta: &CharVector::new(),
            parity: Parity::Even,
            options: FunctorOptions::default(),
        })
        .unwrap();
        assert_eq!(out.rep.dims(), &predicted);
        assert_eq!(&out.dim_check, &predicted);
    }
}
