//! Finite index structures: linear orders, predicate-labelled orders, and
//! ordered clique-free hypergraphs.
//!
//! An [`IndexModel`] is a finite structure in one of three universal classes:
//! pure linear orders, linear orders with unary rational-labelled predicates
//! partitioning the domain, or such orders additionally carrying a symmetric
//! irreflexive (k+1)-ary edge relation with no clique on n+1 vertices
//! (n > k >= 2). Vertices carry exact rational coordinates (the order) and a
//! rational predicate label; which parts of that data are visible is decided
//! by the class descriptor, not the data.

mod extend;
mod qf_type;

pub use extend::{enumerate_realizations, extend_realizing, realizable};
pub use qf_type::{qf_type_of, QfCode, QfType};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{least_unused_rational, Coord};

/// Identifier of a vertex inside one index model.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct VertexId(pub u32);

/// Which universal class the model lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassDescriptor {
    /// Pure linear orders; predicates and edges are ignored/forbidden.
    LinearOrders,
    /// Linear orders with a partition into rational-labelled unary predicates.
    LinearOrdersWithPredicates,
    /// Ordered predicate-labelled (k+1)-uniform hypergraphs with no clique on
    /// `n + 1` vertices. Requires `n > k >= 2`.
    Hypergraph { n: u32, k: u32 },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("hypergraph class requires n > k >= 2, got n = {n}, k = {k}")]
    BadClassParameters { n: u32, k: u32 },
    #[error("unknown vertex {0:?}")]
    UnknownVertex(VertexId),
    #[error("qf-type refers to position {position} but only {total} positions exist")]
    PositionOutOfRange { position: usize, total: usize },
    #[error("qf-type class {0:?} does not match model class {1:?}")]
    ClassMismatch(ClassDescriptor, ClassDescriptor),
    #[error("target is not realizable in this model")]
    NotRealizable,
    #[error("extension produced an invalid model: {0}")]
    InvalidExtension(String),
    #[error("malformed qf-type: {0}")]
    MalformedType(String),
}

impl ClassDescriptor {
    pub fn hypergraph(n: u32, k: u32) -> Result<Self, StructureError> {
        if k < 2 || n <= k {
            return Err(StructureError::BadClassParameters { n, k });
        }
        Ok(ClassDescriptor::Hypergraph { n, k })
    }

    /// Arity of the edge relation (k+1), when the class has one.
    pub fn edge_arity(&self) -> Option<usize> {
        match self {
            ClassDescriptor::Hypergraph { k, .. } => Some(*k as usize + 1),
            _ => None,
        }
    }

    /// Least forbidden clique size (n+1), when the class bounds cliques.
    pub fn clique_bound(&self) -> Option<usize> {
        match self {
            ClassDescriptor::Hypergraph { n, .. } => Some(*n as usize + 1),
            _ => None,
        }
    }

    pub fn has_predicates(&self) -> bool {
        !matches!(self, ClassDescriptor::LinearOrders)
    }
}

/// Per-vertex data: position in the order and predicate label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexData {
    pub coord: Coord,
    pub pred: Coord,
}

/// A finite member of one of the index classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexModel {
    class: ClassDescriptor,
    vertices: BTreeMap<VertexId, VertexData>,
    edges: BTreeSet<BTreeSet<VertexId>>,
}

/// A single violation found by [`IndexModel::validate`]. Violations are data,
/// not errors: an invalid model can be inspected and reported.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    DuplicateCoord { a: VertexId, b: VertexId },
    EdgeWrongArity { edge: Vec<VertexId>, expected: usize },
    EdgeUnknownVertex { edge: Vec<VertexId>, vertex: VertexId },
    EdgesNotAllowed { edge: Vec<VertexId> },
    ForbiddenClique { vertices: Vec<VertexId> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl IndexModel {
    pub fn new(class: ClassDescriptor) -> Self {
        IndexModel {
            class,
            vertices: BTreeMap::new(),
            edges: BTreeSet::new(),
        }
    }

    /// Convenience constructor: vertices at integer coordinates `0..count`,
    /// each predicated by its own coordinate (the singleton-predicate cut of
    /// the canonical context) when the class has predicates.
    pub fn integer_cut(class: ClassDescriptor, count: u32) -> Self {
        let mut m = IndexModel::new(class);
        for i in 0..count {
            let c = Coord::from_int(i as i64);
            m.insert_vertex(VertexId(i), c.clone(), c);
        }
        m
    }

    pub fn class(&self) -> ClassDescriptor {
        self.class
    }

    pub fn insert_vertex(&mut self, id: VertexId, coord: Coord, pred: Coord) {
        self.vertices.insert(id, VertexData { coord, pred });
    }

    pub fn insert_edge(&mut self, edge: impl IntoIterator<Item = VertexId>) {
        self.edges.insert(edge.into_iter().collect());
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains_key(&v)
    }

    pub fn coord(&self, v: VertexId) -> Result<&Coord, StructureError> {
        self.vertices
            .get(&v)
            .map(|d| &d.coord)
            .ok_or(StructureError::UnknownVertex(v))
    }

    pub fn pred(&self, v: VertexId) -> Result<&Coord, StructureError> {
        self.vertices
            .get(&v)
            .map(|d| &d.pred)
            .ok_or(StructureError::UnknownVertex(v))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Vertex ids in increasing coordinate order.
    pub fn vertices_by_coord(&self) -> Vec<VertexId> {
        let mut ids: Vec<VertexId> = self.vertices.keys().copied().collect();
        ids.sort_by(|a, b| {
            self.vertices[a]
                .coord
                .cmp(&self.vertices[b].coord)
                .then(a.cmp(b))
        });
        ids
    }

    pub fn edges(&self) -> impl Iterator<Item = &BTreeSet<VertexId>> {
        self.edges.iter()
    }

    pub fn has_edge(&self, edge: &BTreeSet<VertexId>) -> bool {
        self.edges.contains(edge)
    }

    /// Least vertex id not yet in use.
    pub fn fresh_vertex_id(&self) -> VertexId {
        let mut id = 0u32;
        for v in self.vertices.keys() {
            if v.0 == id {
                id += 1;
            } else if v.0 > id {
                break;
            }
        }
        VertexId(id)
    }

    /// Least rational (in the fixed enumeration) unused as a predicate label.
    pub fn fresh_pred_label(&self) -> Coord {
        let used: BTreeSet<Coord> = self.vertices.values().map(|d| d.pred.clone()).collect();
        least_unused_rational(&used)
    }

    /// Predicate labels are injective over vertices (each label names one
    /// vertex), the convention of the canonical singleton-predicate contexts.
    pub fn predicates_are_singletons(&self) -> bool {
        let labels: BTreeSet<&Coord> = self.vertices.values().map(|d| &d.pred).collect();
        labels.len() == self.vertices.len()
    }

    /// Check all class invariants; violations name the offending vertex sets.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();

        let mut by_coord: BTreeMap<&Coord, VertexId> = BTreeMap::new();
        for (id, data) in &self.vertices {
            if let Some(prev) = by_coord.insert(&data.coord, *id) {
                violations.push(Violation::DuplicateCoord { a: prev, b: *id });
            }
        }

        match self.class.edge_arity() {
            None => {
                for edge in &self.edges {
                    violations.push(Violation::EdgesNotAllowed {
                        edge: edge.iter().copied().collect(),
                    });
                }
            }
            Some(arity) => {
                for edge in &self.edges {
                    let listed: Vec<VertexId> = edge.iter().copied().collect();
                    if edge.len() != arity {
                        violations.push(Violation::EdgeWrongArity {
                            edge: listed.clone(),
                            expected: arity,
                        });
                    }
                    for v in edge {
                        if !self.vertices.contains_key(v) {
                            violations.push(Violation::EdgeUnknownVertex {
                                edge: listed.clone(),
                                vertex: *v,
                            });
                        }
                    }
                }
                if let Some(clique) = self.find_forbidden_clique() {
                    violations.push(Violation::ForbiddenClique { vertices: clique });
                }
            }
        }

        ValidationReport { violations }
    }

    /// First forbidden clique in lexicographic vertex order, if any: a set of
    /// `clique_bound` vertices all of whose edge-arity subsets are edges.
    pub fn find_forbidden_clique(&self) -> Option<Vec<VertexId>> {
        let bound = self.class.clique_bound()?;
        let arity = self.class.edge_arity()?;
        // Only vertices incident to an edge can participate in a clique.
        let mut support: BTreeSet<VertexId> = BTreeSet::new();
        for edge in &self.edges {
            support.extend(edge.iter().copied());
        }
        let support: Vec<VertexId> = support.into_iter().collect();
        if support.len() < bound {
            return None;
        }
        let mut chosen: Vec<VertexId> = Vec::with_capacity(bound);
        self.extend_clique(&support, 0, bound, arity, &mut chosen)
    }

    fn extend_clique(
        &self,
        support: &[VertexId],
        from: usize,
        bound: usize,
        arity: usize,
        chosen: &mut Vec<VertexId>,
    ) -> Option<Vec<VertexId>> {
        if chosen.len() == bound {
            return Some(chosen.clone());
        }
        for i in from..support.len() {
            let v = support[i];
            if chosen.len() + 1 >= arity {
                let mut ok = true;
                'subsets: for subset in
                    itertools::Itertools::combinations(chosen.iter().copied(), arity - 1)
                {
                    let mut edge: BTreeSet<VertexId> = subset.into_iter().collect();
                    edge.insert(v);
                    if !self.edges.contains(&edge) {
                        ok = false;
                        break 'subsets;
                    }
                }
                if !ok {
                    continue;
                }
            }
            chosen.push(v);
            if let Some(found) = self.extend_clique(support, i + 1, bound, arity, chosen) {
                return Some(found);
            }
            chosen.pop();
        }
        None
    }
}

// External JSON format:
// {"class": {"kind": ..., "n": ..., "k": ...},
//  "vertices": [{"id": ..., "coord": "p/q", "pred": "p/q"}, ...],
//  "edges": [[ids], ...]}

#[derive(Serialize, Deserialize)]
struct ClassJson {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct VertexJson {
    id: u32,
    coord: Coord,
    pred: Coord,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    class: ClassJson,
    vertices: Vec<VertexJson>,
    edges: Vec<Vec<u32>>,
}

impl Serialize for ClassDescriptor {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let json = match self {
            ClassDescriptor::LinearOrders => ClassJson {
                kind: "linear-orders".into(),
                n: None,
                k: None,
            },
            ClassDescriptor::LinearOrdersWithPredicates => ClassJson {
                kind: "linear-orders-with-predicates".into(),
                n: None,
                k: None,
            },
            ClassDescriptor::Hypergraph { n, k } => ClassJson {
                kind: "hypergraph-class".into(),
                n: Some(*n),
                k: Some(*k),
            },
        };
        json.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ClassDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = ClassJson::deserialize(deserializer)?;
        match json.kind.as_str() {
            "linear-orders" => Ok(ClassDescriptor::LinearOrders),
            "linear-orders-with-predicates" => Ok(ClassDescriptor::LinearOrdersWithPredicates),
            "hypergraph-class" => {
                let n = json
                    .n
                    .ok_or_else(|| serde::de::Error::custom("hypergraph-class requires n"))?;
                let k = json
                    .k
                    .ok_or_else(|| serde::de::Error::custom("hypergraph-class requires k"))?;
                ClassDescriptor::hypergraph(n, k).map_err(serde::de::Error::custom)
            }
            other => Err(serde::de::Error::custom(format!(
                "unknown class kind {other:?}"
            ))),
        }
    }
}

impl Serialize for IndexModel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let json = ModelJson {
            class: match serde_json::to_value(self.class) {
                Ok(v) => serde_json::from_value(v).map_err(serde::ser::Error::custom)?,
                Err(e) => return Err(serde::ser::Error::custom(e)),
            },
            vertices: self
                .vertices
                .iter()
                .map(|(id, d)| VertexJson {
                    id: id.0,
                    coord: d.coord.clone(),
                    pred: d.pred.clone(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| e.iter().map(|v| v.0).collect())
                .collect(),
        };
        json.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IndexModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = ModelJson::deserialize(deserializer)?;
        let class: ClassDescriptor =
            serde_json::from_value(serde_json::to_value(json.class).map_err(serde::de::Error::custom)?)
                .map_err(serde::de::Error::custom)?;
        let mut model = IndexModel::new(class);
        for v in json.vertices {
            model.insert_vertex(VertexId(v.id), v.coord, v.pred);
        }
        for e in json.edges {
            model.insert_edge(e.into_iter().map(VertexId));
        }
        Ok(model)
    }
}
