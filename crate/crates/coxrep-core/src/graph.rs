//! Graphs over string vertex ids, vectors on the vertex set, the Tits form,
//! simple reflections, even/odd Coxeter transformations, root enumeration and
//! classification of graphs by representation type.
//!
//! Everything in this module uses exact rational arithmetic; floating point
//! enters only through the numerical cross-check in [`Graph::classify`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type VertexId = String;

/// Orbit size beyond which root enumeration reports `Unbounded`.
pub const ORBIT_SIZE_CAP: usize = 100_000;
/// Coordinate magnitude beyond which root enumeration reports `Unbounded`.
pub const COORDINATE_CAP: i64 = 1_000_000;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(VertexId),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(VertexId),
    #[error("duplicate edge between `{0}` and `{1}`")]
    DuplicateEdge(VertexId, VertexId),
    #[error("loop at vertex `{0}` is not allowed here")]
    LoopPresent(VertexId),
    #[error("graph contains an odd cycle, so it has no bipartition")]
    OddCycle,
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph is not a tree")]
    NotATree,
    #[error("graph is not a Dynkin graph")]
    NotDynkin,
    #[error("vector does not match the graph vertex set: {0}")]
    IndexMismatch(String),
    #[error("graph has no bipartition (odd cycle or loop in verification-only graph)")]
    MissingBipartition,
}

/// Side of the canonical bipartition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn opposite(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
        }
    }
}

/// Computes the canonical proper 2-coloring of a connected loop-free graph.
///
/// The lexicographically smallest vertex id is colored even; the rest is
/// forced by propagation, so the result is deterministic.
pub fn bipartition(
    vertices: &[VertexId],
    edges: &[(VertexId, VertexId)],
) -> Result<BTreeMap<VertexId, Parity>, GraphError> {
    let graph = Graph::build(vertices.to_vec(), edges, Mode::Verification)?;
    for &(a, b) in &graph.edges {
        if a == b {
            return Err(GraphError::LoopPresent(graph.vertices[a].clone()));
        }
    }
    if !graph.is_connected() {
        return Err(GraphError::Disconnected);
    }
    match &graph.parity {
        Some(colors) => Ok(graph
            .vertices
            .iter()
            .cloned()
            .zip(colors.iter().copied())
            .collect()),
        None => Err(GraphError::OddCycle),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Pipeline,
    Verification,
}

/// A finite graph with string vertex ids and a canonical bipartition.
///
/// Graphs built with [`Graph::new`] are trees and always carry a parity map;
/// this is the form every functor and classifier entry point expects.
/// [`Graph::verification_only`] admits loops, cycles, multiple edges and
/// disconnected vertex sets for checks such as [`Graph::classify`]; such
/// graphs may lack a bipartition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<VertexId>,
    index: BTreeMap<VertexId, usize>,
    /// Edge endpoints as vertex indices, ordered so that id(a) <= id(b).
    edges: Vec<(usize, usize)>,
    /// Neighbor vertex indices, deduplicated, sorted by vertex id.
    neighbors: Vec<Vec<usize>>,
    parity: Option<Vec<Parity>>,
    verification_only: bool,
}

impl Graph {
    /// Builds a pipeline graph: connected, no loops, no repeated edges,
    /// no cycles. The canonical bipartition always exists for these.
    pub fn new(
        vertices: Vec<VertexId>,
        edges: &[(VertexId, VertexId)],
    ) -> Result<Graph, GraphError> {
        let graph = Self::build(vertices, edges, Mode::Pipeline)?;
        debug_assert!(graph.parity.is_some());
        Ok(graph)
    }

    /// Builds a graph for verification-only use; loops, cycles, multiple
    /// edges and disconnected graphs are admitted. The parity map is present
    /// only when the graph is properly 2-colorable.
    pub fn verification_only(
        vertices: Vec<VertexId>,
        edges: &[(VertexId, VertexId)],
    ) -> Result<Graph, GraphError> {
        Self::build(vertices, edges, Mode::Verification)
    }

    fn build(
        vertices: Vec<VertexId>,
        edges: &[(VertexId, VertexId)],
        mode: Mode,
    ) -> Result<Graph, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let mut index = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(v.clone()));
            }
        }
        let mut edge_indices = Vec::with_capacity(edges.len());
        let mut seen = BTreeSet::new();
        for (a, b) in edges {
            let ia = *index
                .get(a)
                .ok_or_else(|| GraphError::UnknownVertex(a.clone()))?;
            let ib = *index
                .get(b)
                .ok_or_else(|| GraphError::UnknownVertex(b.clone()))?;
            let (ia, ib) = if vertices[ia] <= vertices[ib] {
                (ia, ib)
            } else {
                (ib, ia)
            };
            if mode == Mode::Pipeline {
                if ia == ib {
                    return Err(GraphError::LoopPresent(vertices[ia].clone()));
                }
                if !seen.insert((ia, ib)) {
                    return Err(GraphError::DuplicateEdge(
                        vertices[ia].clone(),
                        vertices[ib].clone(),
                    ));
                }
            }
            edge_indices.push((ia, ib));
        }

        let mut neighbor_sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); vertices.len()];
        for &(a, b) in &edge_indices {
            neighbor_sets[a].insert(b);
            neighbor_sets[b].insert(a);
        }
        let neighbors: Vec<Vec<usize>> = neighbor_sets
            .into_iter()
            .map(|set| {
                let mut v: Vec<usize> = set.into_iter().collect();
                v.sort_by(|&x, &y| vertices[x].cmp(&vertices[y]));
                v
            })
            .collect();

        let mut graph = Graph {
            vertices,
            index,
            edges: edge_indices,
            neighbors,
            parity: None,
            verification_only: mode == Mode::Verification,
        };

        if mode == Mode::Pipeline {
            if !graph.is_connected() {
                return Err(GraphError::Disconnected);
            }
            if graph.edges.len() != graph.vertices.len() - 1 {
                return Err(GraphError::NotATree);
            }
        }
        graph.parity = graph.compute_parity();
        Ok(graph)
    }

    /// Canonical per-component 2-coloring: the smallest vertex id of each
    /// component is even. `None` when some edge joins two same-colored
    /// vertices (odd cycle or loop).
    fn compute_parity(&self) -> Option<Vec<Parity>> {
        if self.has_loop() {
            return None;
        }
        let n = self.vertices.len();
        let mut colors: Vec<Option<Parity>> = vec![None; n];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| self.vertices[x].cmp(&self.vertices[y]));
        for start in order {
            if colors[start].is_some() {
                continue;
            }
            colors[start] = Some(Parity::Even);
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                let cv = colors[v].unwrap();
                for &w in &self.neighbors[v] {
                    match colors[w] {
                        None => {
                            colors[w] = Some(cv.opposite());
                            queue.push_back(w);
                        }
                        Some(cw) if cw == cv => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(colors.into_iter().map(|c| c.unwrap()).collect())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_ids(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn vertex_id(&self, index: usize) -> &str {
        &self.vertices[index]
    }

    /// Edge endpoint indices; the first endpoint has the smaller vertex id.
    pub fn edge_endpoints(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Neighbor indices of `v`, sorted by vertex id.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn is_verification_only(&self) -> bool {
        self.verification_only
    }

    pub fn has_loop(&self) -> bool {
        self.edges.iter().any(|&(a, b)| a == b)
    }

    pub fn has_multi_edge(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.edges.iter().any(|&e| !seen.insert(e))
    }

    pub fn is_connected(&self) -> bool {
        let mut visited = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.neighbors[v] {
                if !visited[w] {
                    visited[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.vertices.len()
    }

    pub fn is_tree(&self) -> bool {
        !self.has_loop()
            && !self.has_multi_edge()
            && self.is_connected()
            && self.edges.len() == self.vertices.len() - 1
    }

    pub fn parity(&self, v: usize) -> Result<Parity, GraphError> {
        self.parity
            .as_ref()
            .map(|p| p[v])
            .ok_or(GraphError::MissingBipartition)
    }

    pub fn parity_of(&self, id: &str) -> Result<Parity, GraphError> {
        let v = self
            .vertex_index(id)
            .ok_or_else(|| GraphError::UnknownVertex(id.to_string()))?;
        self.parity(v)
    }

    pub fn parity_map(&self) -> Result<&[Parity], GraphError> {
        self.parity
            .as_deref()
            .ok_or(GraphError::MissingBipartition)
    }

    /// Vertex indices of one parity, ascending by vertex id.
    pub fn vertices_of_parity(&self, parity: Parity) -> Result<Vec<usize>, GraphError> {
        let map = self.parity_map()?;
        let mut found: Vec<usize> = (0..self.vertices.len())
            .filter(|&v| map[v] == parity)
            .collect();
        found.sort_by(|&x, &y| self.vertices[x].cmp(&self.vertices[y]));
        Ok(found)
    }

    fn check_keys(&self, x: &GVector) -> Result<(), GraphError> {
        if x.entries.len() != self.vertices.len()
            || !self.vertices.iter().all(|v| x.entries.contains_key(v))
        {
            return Err(GraphError::IndexMismatch(format!(
                "expected keys for {} vertices, got {}",
                self.vertices.len(),
                x.entries.len()
            )));
        }
        Ok(())
    }

    /// The Tits form B(x) = sum x_i^2 - sum over edges of x_i x_j.
    pub fn tits_form(&self, x: &GVector) -> Result<Rational64, GraphError> {
        self.check_keys(x)?;
        let mut b = Rational64::zero();
        for v in &self.vertices {
            let xi = x.entries[v];
            b += xi * xi;
        }
        for &(a, bb) in &self.edges {
            b -= x.entries[&self.vertices[a]] * x.entries[&self.vertices[bb]];
        }
        Ok(b)
    }

    /// The symmetric bilinear companion of the Tits form,
    /// so that `tits_bilinear(x, x) == tits_form(x)`.
    pub fn tits_bilinear(&self, x: &GVector, y: &GVector) -> Result<Rational64, GraphError> {
        self.check_keys(x)?;
        self.check_keys(y)?;
        let mut b = Rational64::zero();
        for v in &self.vertices {
            b += x.entries[v] * y.entries[v];
        }
        let half = Rational64::new(1, 2);
        for &(a, bb) in &self.edges {
            let (ia, ib) = (&self.vertices[a], &self.vertices[bb]);
            b -= half * (x.entries[ia] * y.entries[ib] + x.entries[ib] * y.entries[ia]);
        }
        Ok(b)
    }

    /// The simple reflection at vertex `v`: only coordinate `v` changes,
    /// to `-x_v + sum of x over the neighbors of v`.
    pub fn reflect(&self, v: &str, x: &GVector) -> Result<GVector, GraphError> {
        self.check_keys(x)?;
        let iv = self
            .vertex_index(v)
            .ok_or_else(|| GraphError::UnknownVertex(v.to_string()))?;
        let mut out = x.clone();
        let mut sum = Rational64::zero();
        for &w in &self.neighbors[iv] {
            sum += x.entries[&self.vertices[w]];
        }
        out.entries.insert(
            self.vertices[iv].clone(),
            sum - x.entries[&self.vertices[iv]],
        );
        Ok(out)
    }

    /// Product of the simple reflections over all vertices of one parity.
    /// Reflections at same-parity vertices commute in a bipartite graph, so
    /// the product is order-independent; coordinates are updated from the
    /// input vector in a single pass.
    pub fn coxeter_partial(&self, x: &GVector, parity: Parity) -> Result<GVector, GraphError> {
        self.check_keys(x)?;
        let map = self.parity_map()?;
        let mut out = x.clone();
        for v in 0..self.vertices.len() {
            if map[v] != parity {
                continue;
            }
            let mut sum = Rational64::zero();
            for &w in &self.neighbors[v] {
                sum += x.entries[&self.vertices[w]];
            }
            out.entries.insert(
                self.vertices[v].clone(),
                sum - x.entries[&self.vertices[v]],
            );
        }
        Ok(out)
    }

    /// `k` partial Coxeter transformations with alternating parity, the first
    /// factor applied having parity `first`. `k = 0` is the identity.
    pub fn coxeter_alternating(
        &self,
        x: &GVector,
        first: Parity,
        k: usize,
    ) -> Result<GVector, GraphError> {
        let mut out = x.clone();
        let mut parity = first;
        for _ in 0..k {
            out = self.coxeter_partial(&out, parity)?;
            parity = parity.opposite();
        }
        Ok(out)
    }

    /// Closed form of the partial Coxeter transformation computed through
    /// parity parts and the bilinear form; used to cross-check
    /// [`Graph::coxeter_partial`].
    pub fn coxeter_partial_closed_form(
        &self,
        x: &GVector,
        parity: Parity,
    ) -> Result<GVector, GraphError> {
        self.check_keys(x)?;
        let same = x.parity_part(self, parity)?;
        let other = x.parity_part(self, parity.opposite())?;
        // c(x) = x_other - x_same - 2 * sum over same-parity b of <b, x_other> b
        let mut out = other.sub(&same);
        let map = self.parity_map()?;
        for v in 0..self.vertices.len() {
            if map[v] != parity {
                continue;
            }
            let unit = GVector::simple_root(self, &self.vertices[v])?;
            let coeff = self.tits_bilinear(&unit, &other)?;
            out = out.sub(&unit.scale(coeff * Rational64::from_integer(2)));
        }
        Ok(out)
    }

    /// Closure of the simple roots under all simple reflections, split into
    /// positive and negative roots, or an unboundedness certificate when the
    /// orbit leaves the configured caps.
    pub fn enumerate_roots(&self) -> Result<RootEnumeration, GraphError> {
        if !self.is_tree() {
            return Err(GraphError::NotATree);
        }
        let mut seen: BTreeSet<Vec<Rational64>> = BTreeSet::new();
        let mut queue: VecDeque<GVector> = VecDeque::new();
        for v in self.vertices.clone() {
            let root = GVector::simple_root(self, &v)?;
            if seen.insert(root.coords(self)) {
                queue.push_back(root);
            }
        }
        while let Some(x) = queue.pop_front() {
            for v in self.vertices.clone() {
                let y = self.reflect(&v, &x)?;
                if seen.insert(y.coords(self)) {
                    if y.max_abs_value() > COORDINATE_CAP || seen.len() > ORBIT_SIZE_CAP {
                        return Ok(RootEnumeration::Unbounded { certificate: y });
                    }
                    queue.push_back(y);
                }
            }
        }
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        for coords in seen {
            let x = GVector::from_coords(self, coords);
            if x.is_positive() {
                positive.push(x);
            } else {
                negative.push(x);
            }
        }
        Ok(RootEnumeration::Finite { positive, negative })
    }

    /// Positive roots whose support is the whole vertex set.
    pub fn full_support_roots(&self) -> Result<Vec<GVector>, GraphError> {
        if !self.classify()?.is_dynkin() {
            return Err(GraphError::NotDynkin);
        }
        match self.enumerate_roots()? {
            RootEnumeration::Finite { positive, .. } => Ok(positive
                .into_iter()
                .filter(|x| self.vertices.iter().all(|v| x.get(v) >= Rational64::one()))
                .collect()),
            RootEnumeration::Unbounded { .. } => Err(GraphError::NotDynkin),
        }
    }

    /// Classifies the graph by the definiteness of its Tits form. The shape
    /// is matched structurally and the verdict is confirmed numerically by
    /// the extreme eigenvalues of the form matrix.
    pub fn classify(&self) -> Result<GraphClass, GraphError> {
        if !self.is_connected() {
            return Err(GraphError::Disconnected);
        }
        let class = self.classify_structural();
        // The definiteness correspondence holds for loop-free graphs only;
        // a loop zeroes its diagonal entry without making the form indefinite.
        debug_assert!(self.has_loop() || self.classify_numeric() == class.definiteness());
        Ok(class)
    }

    fn classify_structural(&self) -> GraphClass {
        if self.has_loop() {
            // A loop is never Dynkin and embeds no extended Dynkin subgraph.
            return GraphClass::Wild { witness: None };
        }
        if self.has_multi_edge() {
            let (a, b) = self.first_multi_edge().unwrap();
            if self.vertices.len() == 2 && self.edges.len() == 2 {
                return GraphClass::ExtendedDynkin(ExtendedDynkinType::A(1));
            }
            return GraphClass::Wild {
                witness: Some(WildWitness {
                    kind: ExtendedDynkinType::A(1),
                    vertices: vec![self.vertices[a].clone(), self.vertices[b].clone()],
                }),
            };
        }
        if self.edges.len() >= self.vertices.len() {
            // Connected with a cycle.
            let cycle = self.find_cycle();
            if cycle.len() == self.vertices.len() && self.neighbors.iter().all(|n| n.len() == 2) {
                return GraphClass::ExtendedDynkin(ExtendedDynkinType::A(self.vertices.len() - 1));
            }
            return GraphClass::Wild {
                witness: Some(WildWitness {
                    kind: ExtendedDynkinType::A(cycle.len() - 1),
                    vertices: cycle.iter().map(|&v| self.vertices[v].clone()).collect(),
                }),
            };
        }
        self.classify_tree()
    }

    fn first_multi_edge(&self) -> Option<(usize, usize)> {
        let mut seen = BTreeSet::new();
        self.edges.iter().copied().find(|&e| !seen.insert(e))
    }

    /// Any cycle in a connected non-tree simple graph, as a vertex list.
    fn find_cycle(&self) -> Vec<usize> {
        let n = self.vertices.len();
        let mut parent = vec![usize::MAX; n];
        let mut depth = vec![usize::MAX; n];
        let mut stack = vec![(0usize, usize::MAX, 0usize)];
        while let Some((v, from, d)) = stack.pop() {
            if depth[v] != usize::MAX {
                continue;
            }
            depth[v] = d;
            parent[v] = from;
            for &w in &self.neighbors[v] {
                if w == from {
                    continue;
                }
                if depth[w] != usize::MAX {
                    // Back edge: walk both endpoints up to their common
                    // ancestor to realize the cycle.
                    let mut path_v = vec![v];
                    let mut path_w = vec![w];
                    let (mut cv, mut cw) = (v, w);
                    while depth[cv] > depth[cw] {
                        cv = parent[cv];
                        path_v.push(cv);
                    }
                    while depth[cw] > depth[cv] {
                        cw = parent[cw];
                        path_w.push(cw);
                    }
                    while cv != cw {
                        cv = parent[cv];
                        path_v.push(cv);
                        cw = parent[cw];
                        path_w.push(cw);
                    }
                    path_w.pop();
                    path_w.reverse();
                    path_v.extend(path_w);
                    return path_v;
                } else {
                    stack.push((w, v, d + 1));
                }
            }
        }
        unreachable!("no cycle found in non-tree graph")
    }

    fn classify_tree(&self) -> GraphClass {
        let n = self.vertices.len();
        let branch: Vec<usize> = (0..n).filter(|&v| self.degree(v) >= 3).collect();
        if branch.is_empty() {
            return GraphClass::Dynkin(DynkinType::A(n));
        }
        if branch.len() == 1 {
            let c = branch[0];
            if self.degree(c) >= 4 {
                if self.degree(c) == 4 && n == 5 {
                    return GraphClass::ExtendedDynkin(ExtendedDynkinType::D(4));
                }
                let mut verts = vec![self.vertices[c].clone()];
                verts.extend(
                    self.neighbors[c]
                        .iter()
                        .take(4)
                        .map(|&w| self.vertices[w].clone()),
                );
                return GraphClass::Wild {
                    witness: Some(WildWitness {
                        kind: ExtendedDynkinType::D(4),
                        vertices: verts,
                    }),
                };
            }
            // Single vertex of degree 3: classify by sorted arm lengths.
            let mut arms = self.arms(c);
            arms.sort_by_key(|arm| arm.len());
            let (a, b, cc) = (arms[0].len(), arms[1].len(), arms[2].len());
            return match (a, b, cc) {
                (1, 1, _) => GraphClass::Dynkin(DynkinType::D(n)),
                (1, 2, 2) => GraphClass::Dynkin(DynkinType::E6),
                (1, 2, 3) => GraphClass::Dynkin(DynkinType::E7),
                (1, 2, 4) => GraphClass::Dynkin(DynkinType::E8),
                (2, 2, 2) => GraphClass::ExtendedDynkin(ExtendedDynkinType::E6),
                (1, 3, 3) => GraphClass::ExtendedDynkin(ExtendedDynkinType::E7),
                (1, 2, 5) => GraphClass::ExtendedDynkin(ExtendedDynkinType::E8),
                _ => {
                    // Strictly dominates one of the affine E shapes.
                    let (kind, take) = if a >= 2 {
                        (ExtendedDynkinType::E6, (2, 2, 2))
                    } else if b >= 3 {
                        (ExtendedDynkinType::E7, (1, 3, 3))
                    } else {
                        (ExtendedDynkinType::E8, (1, 2, 5))
                    };
                    let mut verts = vec![self.vertices[c].clone()];
                    for (arm, len) in arms.iter().zip([take.0, take.1, take.2]) {
                        verts.extend(arm.iter().take(len).map(|&w| self.vertices[w].clone()));
                    }
                    GraphClass::Wild {
                        witness: Some(WildWitness {
                            kind,
                            vertices: verts,
                        }),
                    }
                }
            };
        }
        // Two or more branch vertices in a tree: contains an affine D shape.
        let b1 = branch[0];
        let b2 = branch[1];
        let path = self.path_between(b1, b2);
        let is_dn_tilde = branch.len() == 2
            && self.degree(b1) == 3
            && self.degree(b2) == 3
            && n == path.len() + 4;
        if is_dn_tilde {
            return GraphClass::ExtendedDynkin(ExtendedDynkinType::D(n - 1));
        }
        let on_path: BTreeSet<usize> = path.iter().copied().collect();
        let mut verts: Vec<VertexId> = path.iter().map(|&v| self.vertices[v].clone()).collect();
        for &b in &[b1, b2] {
            verts.extend(
                self.neighbors[b]
                    .iter()
                    .filter(|w| !on_path.contains(w))
                    .take(2)
                    .map(|&w| self.vertices[w].clone()),
            );
        }
        GraphClass::Wild {
            witness: Some(WildWitness {
                kind: ExtendedDynkinType::D(path.len() + 3),
                vertices: verts,
            }),
        }
    }

    /// The arms hanging off a branch vertex: one vertex list per neighbor,
    /// walking away from the branch vertex.
    fn arms(&self, c: usize) -> Vec<Vec<usize>> {
        self.neighbors[c]
            .iter()
            .map(|&start| {
                let mut arm = vec![start];
                let mut prev = c;
                let mut cur = start;
                loop {
                    let next: Vec<usize> = self.neighbors[cur]
                        .iter()
                        .copied()
                        .filter(|&w| w != prev)
                        .collect();
                    if next.len() != 1 {
                        break;
                    }
                    prev = cur;
                    cur = next[0];
                    arm.push(cur);
                }
                arm
            })
            .collect()
    }

    /// Unique path between two vertices of a tree (inclusive).
    fn path_between(&self, from: usize, to: usize) -> Vec<usize> {
        let n = self.vertices.len();
        let mut parent = vec![usize::MAX; n];
        let mut visited = vec![false; n];
        let mut queue = VecDeque::from([from]);
        visited[from] = true;
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for &w in &self.neighbors[v] {
                if !visited[w] {
                    visited[w] = true;
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        let mut path = vec![to];
        let mut cur = to;
        while cur != from {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    fn classify_numeric(&self) -> Definiteness {
        let n = self.vertices.len();
        let mut m = nalgebra::DMatrix::<f64>::identity(n, n);
        for &(a, b) in &self.edges {
            if a == b {
                m[(a, a)] -= 1.0;
            } else {
                m[(a, b)] -= 0.5;
                m[(b, a)] -= 0.5;
            }
        }
        let mut eigen = nalgebra::SymmetricEigen::new(m)
            .eigenvalues
            .as_slice()
            .to_vec();
        eigen.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let eps = 1e-9;
        if eigen[0] > eps {
            Definiteness::PositiveDefinite
        } else if eigen[0].abs() <= eps && (eigen.len() == 1 || eigen[1] > eps) {
            Definiteness::SemidefiniteRankOneRadical
        } else {
            Definiteness::Indefinite
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Definiteness {
    PositiveDefinite,
    SemidefiniteRankOneRadical,
    Indefinite,
}

/// Classification of a connected graph by its Tits form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphClass {
    Dynkin(DynkinType),
    ExtendedDynkin(ExtendedDynkinType),
    Wild { witness: Option<WildWitness> },
}

impl GraphClass {
    fn definiteness(&self) -> Definiteness {
        match self {
            GraphClass::Dynkin(_) => Definiteness::PositiveDefinite,
            GraphClass::ExtendedDynkin(_) => Definiteness::SemidefiniteRankOneRadical,
            GraphClass::Wild { .. } => Definiteness::Indefinite,
        }
    }

    pub fn is_dynkin(&self) -> bool {
        matches!(self, GraphClass::Dynkin(_))
    }
}

impl fmt::Display for GraphClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphClass::Dynkin(t) => write!(f, "Dynkin({t})"),
            GraphClass::ExtendedDynkin(t) => write!(f, "ExtendedDynkin({t})"),
            GraphClass::Wild { witness: Some(w) } => {
                write!(f, "Wild(contains {} on {})", w.kind, w.vertices.join(","))
            }
            GraphClass::Wild { witness: None } => write!(f, "Wild"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynkinType {
    A(usize),
    D(usize),
    E6,
    E7,
    E8,
}

impl fmt::Display for DynkinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynkinType::A(n) => write!(f, "A{n}"),
            DynkinType::D(n) => write!(f, "D{n}"),
            DynkinType::E6 => write!(f, "E6"),
            DynkinType::E7 => write!(f, "E7"),
            DynkinType::E8 => write!(f, "E8"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtendedDynkinType {
    A(usize),
    D(usize),
    E6,
    E7,
    E8,
}

impl fmt::Display for ExtendedDynkinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedDynkinType::A(n) => write!(f, "A~{n}"),
            ExtendedDynkinType::D(n) => write!(f, "D~{n}"),
            ExtendedDynkinType::E6 => write!(f, "E~6"),
            ExtendedDynkinType::E7 => write!(f, "E~7"),
            ExtendedDynkinType::E8 => write!(f, "E~8"),
        }
    }
}

/// An embedded extended Dynkin subgraph certifying wildness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WildWitness {
    pub kind: ExtendedDynkinType,
    pub vertices: Vec<VertexId>,
}

/// Result of root enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RootEnumeration {
    Finite {
        positive: Vec<GVector>,
        negative: Vec<GVector>,
    },
    Unbounded {
        certificate: GVector,
    },
}

/// A rational-valued vector indexed by the vertex set of a graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GVector {
    entries: BTreeMap<VertexId, Rational64>,
}

impl GVector {
    pub fn zero(graph: &Graph) -> GVector {
        GVector {
            entries: graph
                .vertex_ids()
                .iter()
                .map(|v| (v.clone(), Rational64::zero()))
                .collect(),
        }
    }

    pub fn from_entries(
        graph: &Graph,
        entries: BTreeMap<VertexId, Rational64>,
    ) -> Result<GVector, GraphError> {
        let x = GVector { entries };
        graph.check_keys(&x)?;
        Ok(x)
    }

    /// Builds a vector from integer coordinates listed in graph vertex order.
    pub fn from_ints(graph: &Graph, coords: &[i64]) -> Result<GVector, GraphError> {
        if coords.len() != graph.vertex_count() {
            return Err(GraphError::IndexMismatch(format!(
                "expected {} coordinates, got {}",
                graph.vertex_count(),
                coords.len()
            )));
        }
        Ok(GVector {
            entries: graph
                .vertex_ids()
                .iter()
                .zip(coords)
                .map(|(v, &c)| (v.clone(), Rational64::from_integer(c)))
                .collect(),
        })
    }

    /// The coordinate vector of vertex `v`.
    pub fn simple_root(graph: &Graph, v: &str) -> Result<GVector, GraphError> {
        if graph.vertex_index(v).is_none() {
            return Err(GraphError::UnknownVertex(v.to_string()));
        }
        let mut x = GVector::zero(graph);
        x.entries.insert(v.to_string(), Rational64::one());
        Ok(x)
    }

    pub fn get(&self, v: &str) -> Rational64 {
        self.entries[v]
    }

    pub fn set(&mut self, v: &str, value: Rational64) {
        assert!(self.entries.contains_key(v), "unknown vertex {v}");
        self.entries.insert(v.to_string(), value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, &Rational64)> {
        self.entries.iter()
    }

    /// Coordinates in graph vertex order.
    pub fn coords(&self, graph: &Graph) -> Vec<Rational64> {
        graph.vertex_ids().iter().map(|v| self.entries[v]).collect()
    }

    pub fn from_coords(graph: &Graph, coords: Vec<Rational64>) -> GVector {
        GVector {
            entries: graph.vertex_ids().iter().cloned().zip(coords).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|r| r.is_zero())
    }

    /// Positive in the root-theoretic sense: nonzero with no negative entry.
    pub fn is_positive(&self) -> bool {
        !self.is_zero() && self.entries.values().all(|r| !r.is_negative())
    }

    pub fn is_negative(&self) -> bool {
        !self.is_zero() && self.entries.values().all(|r| !r.is_positive())
    }

    pub fn is_integral(&self) -> bool {
        self.entries.values().all(|r| r.is_integer())
    }

    /// Support: vertices with nonzero entries.
    pub fn support(&self) -> BTreeSet<VertexId> {
        self.entries
            .iter()
            .filter(|(_, r)| !r.is_zero())
            .map(|(v, _)| v.clone())
            .collect()
    }

    /// The projection onto one side of the bipartition (entries of the other
    /// parity set to zero).
    pub fn parity_part(&self, graph: &Graph, parity: Parity) -> Result<GVector, GraphError> {
        let map = graph.parity_map()?;
        let mut out = self.clone();
        for (v, id) in map.iter().zip(graph.vertex_ids()) {
            if *v != parity {
                out.entries.insert(id.clone(), Rational64::zero());
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &GVector) -> GVector {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GVector) -> GVector {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn neg(&self) -> GVector {
        GVector {
            entries: self.entries.iter().map(|(v, r)| (v.clone(), -r)).collect(),
        }
    }

    pub fn scale(&self, c: Rational64) -> GVector {
        GVector {
            entries: self
                .entries
                .iter()
                .map(|(v, r)| (v.clone(), r * c))
                .collect(),
        }
    }

    /// Euclidean dot product (simple roots form an orthonormal basis).
    pub fn dot(&self, other: &GVector) -> Rational64 {
        self.entries
            .iter()
            .map(|(v, r)| r * other.entries[v])
            .sum()
    }

    fn zip_with(
        &self,
        other: &GVector,
        f: impl Fn(Rational64, Rational64) -> Rational64,
    ) -> GVector {
        debug_assert_eq!(self.entries.len(), other.entries.len());
        GVector {
            entries: self
                .entries
                .iter()
                .map(|(v, r)| (v.clone(), f(*r, other.entries[v])))
                .collect(),
        }
    }

    fn max_abs_value(&self) -> i64 {
        self.entries
            .values()
            .map(|r| (r.numer() / r.denom()).abs())
            .max()
            .unwrap_or(0)
    }

    /// Sum of all entries; for dimension vectors this is the total dimension.
    pub fn total(&self) -> Rational64 {
        self.entries.values().sum()
    }
}

impl fmt::Display for GVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (v, r)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}: {r}")?;
        }
        write!(f, ")")
    }
}

/// Standard graph constructors used throughout the test corpus and the CLI.
pub mod families {
    use super::{Graph, GraphError, VertexId};

    fn ids(labels: &[&str]) -> Vec<VertexId> {
        labels.iter().map(|s| s.to_string()).collect()
    }

    fn pairs(edges: &[(&str, &str)]) -> Vec<(VertexId, VertexId)> {
        edges
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    /// Path with vertices "1".."n".
    pub fn a_n(n: usize) -> Result<Graph, GraphError> {
        let vertices: Vec<VertexId> = (1..=n).map(|i| i.to_string()).collect();
        let edges: Vec<(VertexId, VertexId)> = (1..n)
            .map(|i| (i.to_string(), (i + 1).to_string()))
            .collect();
        Graph::new(vertices, &edges)
    }

    /// Chain "1".."n-2" with both "n-1" and "n" attached to "n-2".
    pub fn d_n(n: usize) -> Result<Graph, GraphError> {
        assert!(n >= 4, "D_n needs n >= 4");
        let vertices: Vec<VertexId> = (1..=n).map(|i| i.to_string()).collect();
        let mut edges: Vec<(VertexId, VertexId)> = (1..n - 2)
            .map(|i| (i.to_string(), (i + 1).to_string()))
            .collect();
        edges.push(((n - 2).to_string(), (n - 1).to_string()));
        edges.push(((n - 2).to_string(), n.to_string()));
        Graph::new(vertices, &edges)
    }

    /// Chain 1-3-4-5-6(-7-8) with "2" attached to "4".
    pub fn e_n(n: usize) -> Result<Graph, GraphError> {
        assert!((6..=8).contains(&n), "E_n needs n in 6..=8");
        let vertices: Vec<VertexId> = (1..=n).map(|i| i.to_string()).collect();
        let mut edges = vec![
            ("1".to_string(), "3".to_string()),
            ("2".to_string(), "4".to_string()),
        ];
        for i in 3..n {
            edges.push((i.to_string(), (i + 1).to_string()));
        }
        Graph::new(vertices, &edges)
    }

    /// Star with center "0" and `leaves` leaves "1", "2", ...
    pub fn star(leaves: usize) -> Result<Graph, GraphError> {
        let mut vertices = vec!["0".to_string()];
        vertices.extend((1..=leaves).map(|i| i.to_string()));
        let edges: Vec<(VertexId, VertexId)> = (1..=leaves)
            .map(|i| ("0".to_string(), i.to_string()))
            .collect();
        Graph::new(vertices, &edges)
    }

    /// Extended Dynkin D~4: the star with four leaves.
    pub fn d4_tilde() -> Result<Graph, GraphError> {
        star(4)
    }

    /// Extended Dynkin E~6: three arms of length two from center "0".
    pub fn e6_tilde() -> Result<Graph, GraphError> {
        Graph::new(
            ids(&["0", "1", "2", "3", "4", "5", "6"]),
            &pairs(&[
                ("0", "1"),
                ("1", "2"),
                ("0", "3"),
                ("3", "4"),
                ("0", "5"),
                ("5", "6"),
            ]),
        )
    }

    /// Cycle on `n` vertices "1".."n" (verification-only).
    pub fn cycle(n: usize) -> Result<Graph, GraphError> {
        let vertices: Vec<VertexId> = (1..=n).map(|i| i.to_string()).collect();
        let mut edges: Vec<(VertexId, VertexId)> = (1..n)
            .map(|i| (i.to_string(), (i + 1).to_string()))
            .collect();
        edges.push((n.to_string(), "1".to_string()));
        Graph::verification_only(vertices, &edges)
    }

    /// One vertex "a" with a loop (verification-only).
    pub fn single_loop() -> Result<Graph, GraphError> {
        Graph::verification_only(ids(&["a"]), &pairs(&[("a", "a")]))
    }
}
