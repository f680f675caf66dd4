//! Quantifier-free types of tuples over parameter tuples, with a canonical
//! byte encoding.
//!
//! The qf-type of `tuple` over `params` records, for the concatenation
//! `tuple ++ params`, the full comparison matrix of coordinates (so equalities
//! between any two positions are visible), the predicate label of every
//! position (when the class has predicates), and the set of position subsets
//! carrying an edge (when the class has edges). Two tuples have the same type
//! iff their codes are byte-identical; the code never mentions vertex ids or
//! raw coordinates, so it is invariant under relabeling and monotone
//! rescaling.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ClassDescriptor, IndexModel, StructureError, VertexId};
use crate::rational::Coord;

/// Hex form of a canonical qf-type encoding; the unit of comparison for all
/// invariant relations.
pub type QfCode = String;

/// Canonical quantifier-free type. `length` positions come from the tuple,
/// the remaining ones from the parameter sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QfType {
    class: ClassDescriptor,
    length: u16,
    total: u16,
    /// Upper-triangle comparison matrix, row-major: entry for (i, j), i < j,
    /// is 0 (coord_i < coord_j), 1 (equal), or 2 (greater).
    order: Vec<u8>,
    /// Predicate label per position; present iff the class has predicates.
    preds: Option<Vec<Coord>>,
    /// Sorted position subsets (each of edge arity) carrying an edge.
    edges: BTreeSet<Vec<u16>>,
}

fn tri_index(total: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < total);
    // Offset of row i in the packed upper triangle.
    i * total - i * (i + 1) / 2 + (j - i - 1)
}

/// Compute the qf-type of `tuple` over `params` in `model`. Repeated vertices
/// in `tuple` (or overlaps with `params`) are fine: the equalities are
/// recorded in the comparison matrix.
pub fn qf_type_of(
    model: &IndexModel,
    tuple: &[VertexId],
    params: &[VertexId],
) -> Result<QfType, StructureError> {
    let class = model.class();
    let all: Vec<VertexId> = tuple.iter().chain(params.iter()).copied().collect();
    for &v in &all {
        if !model.contains(v) {
            return Err(StructureError::UnknownVertex(v));
        }
    }
    let total = all.len();
    let mut order = Vec::with_capacity(total * total.saturating_sub(1) / 2);
    for i in 0..total {
        for j in (i + 1)..total {
            let cmp = model.coord(all[i])?.cmp(model.coord(all[j])?);
            order.push(match cmp {
                Ordering::Less => 0,
                Ordering::Equal => 1,
                Ordering::Greater => 2,
            });
        }
    }
    let preds = if class.has_predicates() {
        Some(
            all.iter()
                .map(|&v| model.pred(v).cloned())
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };
    let mut edges = BTreeSet::new();
    if let Some(arity) = class.edge_arity() {
        for subset in itertools::Itertools::combinations(0..total, arity) {
            let verts: BTreeSet<VertexId> = subset.iter().map(|&p| all[p]).collect();
            if verts.len() == arity && model.has_edge(&verts) {
                edges.insert(subset.into_iter().map(|p| p as u16).collect());
            }
        }
    }
    Ok(QfType {
        class,
        length: tuple.len() as u16,
        total: total as u16,
        order,
        preds,
        edges,
    })
}

impl QfType {
    pub fn class(&self) -> ClassDescriptor {
        self.class
    }

    /// Number of tuple positions (the parameters follow them).
    pub fn tuple_len(&self) -> usize {
        self.length as usize
    }

    pub fn total_positions(&self) -> usize {
        self.total as usize
    }

    pub fn param_len(&self) -> usize {
        self.total_positions() - self.tuple_len()
    }

    pub fn cmp_positions(&self, i: usize, j: usize) -> Ordering {
        match i.cmp(&j) {
            Ordering::Equal => Ordering::Equal,
            Ordering::Less => match self.order[tri_index(self.total_positions(), i, j)] {
                0 => Ordering::Less,
                1 => Ordering::Equal,
                _ => Ordering::Greater,
            },
            Ordering::Greater => self.cmp_positions(j, i).reverse(),
        }
    }

    pub fn positions_equal(&self, i: usize, j: usize) -> bool {
        self.cmp_positions(i, j) == Ordering::Equal
    }

    pub fn pred_at(&self, i: usize) -> Option<&Coord> {
        self.preds.as_ref().map(|p| &p[i])
    }

    pub fn edge_subsets(&self) -> impl Iterator<Item = &Vec<u16>> {
        self.edges.iter()
    }

    pub fn has_edge_on(&self, positions: &[u16]) -> bool {
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        self.edges.contains(&sorted)
    }

    /// For every position, the least position forced equal to it.
    pub fn equality_representatives(&self) -> Vec<usize> {
        let total = self.total_positions();
        let mut reps = vec![0usize; total];
        for i in 0..total {
            let mut rep = i;
            for j in 0..i {
                if self.positions_equal(i, j) {
                    rep = j;
                    break;
                }
            }
            reps[i] = rep;
        }
        reps
    }

    /// Structural coherence: in-range data, weak-order comparison matrix,
    /// predicates constant on forced-equal positions, edges on distinct
    /// positions of the right arity. Returns human-readable defects.
    pub fn well_formedness_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let total = self.total_positions();
        if self.tuple_len() > total {
            out.push(format!(
                "tuple length {} exceeds total positions {total}",
                self.tuple_len()
            ));
        }
        if self.order.len() != total * total.saturating_sub(1) / 2 {
            out.push("comparison matrix has the wrong size".into());
            return out;
        }
        if self.order.iter().any(|&b| b > 2) {
            out.push("comparison matrix entry out of range".into());
            return out;
        }
        for i in 0..total {
            for j in 0..total {
                for l in 0..total {
                    let ij = self.cmp_positions(i, j);
                    let jl = self.cmp_positions(j, l);
                    let il = self.cmp_positions(i, l);
                    let consistent = match (ij, jl) {
                        (Ordering::Equal, x) | (x, Ordering::Equal) => il == x,
                        (Ordering::Less, Ordering::Less) => il == Ordering::Less,
                        (Ordering::Greater, Ordering::Greater) => il == Ordering::Greater,
                        _ => true,
                    };
                    if !consistent {
                        out.push(format!(
                            "comparison matrix is not transitive at positions {i}, {j}, {l}"
                        ));
                        return out;
                    }
                }
            }
        }
        match (&self.preds, self.class.has_predicates()) {
            (Some(p), true) => {
                if p.len() != total {
                    out.push("predicate list length differs from position count".into());
                } else {
                    for i in 0..total {
                        for j in (i + 1)..total {
                            if self.positions_equal(i, j) && p[i] != p[j] {
                                out.push(format!(
                                    "positions {i} and {j} are equal but carry different predicates"
                                ));
                            }
                        }
                    }
                }
            }
            (None, false) => {}
            (Some(_), false) => out.push("predicates present in a pure-order class".into()),
            (None, true) => out.push("predicates missing in a predicate class".into()),
        }
        match self.class.edge_arity() {
            None => {
                if !self.edges.is_empty() {
                    out.push("edges present in an edgeless class".into());
                }
            }
            Some(arity) => {
                for edge in &self.edges {
                    if edge.len() != arity {
                        out.push(format!("edge {edge:?} has arity {} != {arity}", edge.len()));
                        continue;
                    }
                    if edge.iter().any(|&p| (p as usize) >= total) {
                        out.push(format!("edge {edge:?} refers to a position out of range"));
                        continue;
                    }
                    if edge.windows(2).any(|w| w[0] >= w[1]) {
                        out.push(format!("edge {edge:?} is not a sorted set of positions"));
                        continue;
                    }
                    for w in itertools::Itertools::combinations(edge.iter(), 2) {
                        if self.positions_equal(*w[0] as usize, *w[1] as usize) {
                            out.push(format!(
                                "edge {edge:?} contains positions forced equal (edges need \
                                 distinct vertices)"
                            ));
                        }
                    }
                }
            }
        }
        out
    }

    /// Canonical byte encoding; equality of types is equality of encodings.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.push(1u8); // version
        match self.class {
            ClassDescriptor::LinearOrders => out.push(0),
            ClassDescriptor::LinearOrdersWithPredicates => out.push(1),
            ClassDescriptor::Hypergraph { n, k } => {
                out.push(2);
                out.extend((n as u16).to_le_bytes());
                out.extend((k as u16).to_le_bytes());
            }
        }
        out.extend(self.length.to_le_bytes());
        out.extend(self.total.to_le_bytes());
        out.extend(&self.order);
        if let Some(preds) = &self.preds {
            for p in preds {
                let s = p.as_fraction_string();
                out.extend((s.len() as u32).to_le_bytes());
                out.extend(s.as_bytes());
            }
        }
        if self.class.edge_arity().is_some() {
            out.extend((self.edges.len() as u32).to_le_bytes());
            for edge in &self.edges {
                out.extend((edge.len() as u16).to_le_bytes());
                for &p in edge {
                    out.extend(p.to_le_bytes());
                }
            }
        }
        out
    }

    /// Hex-encoded canonical bytes: the externally visible code.
    pub fn code(&self) -> QfCode {
        hex::encode(self.to_bytes())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, StructureError> {
        let mut cur = Cursor {
            bytes,
            at: 0,
        };
        let malformed = |msg: &str| StructureError::MalformedType(msg.to_string());
        if cur.u8().ok_or_else(|| malformed("empty encoding"))? != 1 {
            return Err(malformed("unsupported encoding version"));
        }
        let class = match cur.u8().ok_or_else(|| malformed("missing class tag"))? {
            0 => ClassDescriptor::LinearOrders,
            1 => ClassDescriptor::LinearOrdersWithPredicates,
            2 => {
                let n = cur.u16().ok_or_else(|| malformed("missing n"))?;
                let k = cur.u16().ok_or_else(|| malformed("missing k"))?;
                ClassDescriptor::hypergraph(n as u32, k as u32)
                    .map_err(|e| StructureError::MalformedType(e.to_string()))?
            }
            _ => return Err(malformed("unknown class tag")),
        };
        let length = cur.u16().ok_or_else(|| malformed("missing tuple length"))?;
        let total = cur.u16().ok_or_else(|| malformed("missing position count"))?;
        if length > total {
            return Err(malformed("tuple length exceeds position count"));
        }
        let tri = (total as usize) * (total as usize).saturating_sub(1) / 2;
        let order = cur
            .take(tri)
            .ok_or_else(|| malformed("truncated comparison matrix"))?
            .to_vec();
        let preds = if class.has_predicates() {
            let mut preds = Vec::with_capacity(total as usize);
            for _ in 0..total {
                let len = cur.u32().ok_or_else(|| malformed("truncated predicate"))? as usize;
                let raw = cur
                    .take(len)
                    .ok_or_else(|| malformed("truncated predicate"))?;
                let s = std::str::from_utf8(raw).map_err(|_| malformed("bad predicate utf8"))?;
                preds.push(
                    s.parse::<Coord>()
                        .map_err(|e| StructureError::MalformedType(e.to_string()))?,
                );
            }
            Some(preds)
        } else {
            None
        };
        let mut edges = BTreeSet::new();
        if class.edge_arity().is_some() {
            let count = cur.u32().ok_or_else(|| malformed("missing edge count"))?;
            for _ in 0..count {
                let size = cur.u16().ok_or_else(|| malformed("truncated edge"))? as usize;
                let mut edge = Vec::with_capacity(size);
                for _ in 0..size {
                    edge.push(cur.u16().ok_or_else(|| malformed("truncated edge"))?);
                }
                edges.insert(edge);
            }
        }
        if cur.at != bytes.len() {
            return Err(malformed("trailing bytes after encoding"));
        }
        let ty = QfType {
            class,
            length,
            total,
            order,
            preds,
            edges,
        };
        let defects = ty.well_formedness_violations();
        if !defects.is_empty() {
            return Err(StructureError::MalformedType(defects.join("; ")));
        }
        Ok(ty)
    }

    pub fn from_code(code: &str) -> Result<Self, StructureError> {
        let bytes = hex::decode(code)
            .map_err(|_| StructureError::MalformedType("code is not valid hex".into()))?;
        Self::from_bytes(&bytes)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        if self.at + n > self.bytes.len() {
            return None;
        }
        let out = &self.bytes[self.at..self.at + n];
        self.at += n;
        Some(out)
    }

    fn u8(&mut self) -> Option<u8> {
        self.take(1).map(|b| b[0])
    }

    fn u16(&mut self) -> Option<u16> {
        self.take(2).map(|b| u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4)
            .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

impl Serialize for QfType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.code())
    }
}

impl<'de> Deserialize<'de> for QfType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let code = String::deserialize(deserializer)?;
        QfType::from_code(&code).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::IndexModel;

    fn c32() -> ClassDescriptor {
        ClassDescriptor::hypergraph(3, 2).unwrap()
    }

    fn v(ids: &[u32]) -> Vec<VertexId> {
        ids.iter().map(|&i| VertexId(i)).collect()
    }

    #[test]
    fn codes_equal_iff_data_equal() {
        let mut m = IndexModel::integer_cut(c32(), 6);
        m.insert_edge(v(&[0, 1, 2]));
        // Same order/pred pattern, different edge data.
        let with_edge = qf_type_of(&m, &v(&[0, 1, 2]), &[]).unwrap();
        let without = qf_type_of(&m, &v(&[3, 4, 5]), &[]).unwrap();
        assert_eq!(with_edge.tuple_len(), 3);
        assert_ne!(with_edge.code(), without.code());
        assert!(with_edge.has_edge_on(&[0, 1, 2]));
        assert!(!without.has_edge_on(&[0, 1, 2]));
    }

    #[test]
    fn pure_order_type_ignores_predicates() {
        let mut a = IndexModel::integer_cut(ClassDescriptor::LinearOrders, 3);
        let mut b = IndexModel::new(ClassDescriptor::LinearOrders);
        // Different coords and different (invisible) predicate labels.
        b.insert_vertex(VertexId(7), Coord::new(1, 2), Coord::from_int(9));
        b.insert_vertex(VertexId(8), Coord::new(3, 4), Coord::from_int(9));
        b.insert_vertex(VertexId(9), Coord::from_int(2), Coord::from_int(9));
        a.insert_vertex(VertexId(3), Coord::from_int(99), Coord::zero());
        let ta = qf_type_of(&a, &v(&[0, 1]), &v(&[2])).unwrap();
        let tb = qf_type_of(&b, &v(&[7, 8]), &v(&[9])).unwrap();
        assert_eq!(ta, tb);
        assert_eq!(ta.code(), tb.code());
    }

    #[test]
    fn repeated_vertices_recorded_as_equalities() {
        let m = IndexModel::integer_cut(c32(), 3);
        let t = qf_type_of(&m, &v(&[1, 1]), &v(&[2])).unwrap();
        assert!(t.positions_equal(0, 1));
        assert!(!t.positions_equal(0, 2));
        assert_eq!(t.equality_representatives(), vec![0, 0, 2]);
    }

    #[test]
    fn unknown_vertex_is_an_error() {
        let m = IndexModel::integer_cut(c32(), 2);
        assert_eq!(
            qf_type_of(&m, &v(&[0, 5]), &[]),
            Err(StructureError::UnknownVertex(VertexId(5)))
        );
    }

    #[test]
    fn byte_round_trip() {
        let mut m = IndexModel::integer_cut(c32(), 5);
        m.insert_edge(v(&[1, 2, 4]));
        let t = qf_type_of(&m, &v(&[1, 2]), &v(&[4, 0])).unwrap();
        let back = QfType::from_bytes(&t.to_bytes()).unwrap();
        assert_eq!(back, t);
        let back2 = QfType::from_code(&t.code()).unwrap();
        assert_eq!(back2, t);
        assert!(QfType::from_code("zz").is_err());
        assert!(QfType::from_bytes(&[]).is_err());
    }

    #[test]
    fn decoding_rejects_incoherent_types() {
        let m = IndexModel::integer_cut(c32(), 3);
        let t = qf_type_of(&m, &v(&[0, 1, 2]), &[]).unwrap();
        let mut bytes = t.to_bytes();
        // Corrupt one comparison entry to break transitivity: 0 < 1 < 2 but 0 > 2.
        let tri_start = bytes.len() - 4 /* edge count */ - 3 /* matrix */
            - 3 * (4 + 3) /* "p/q" preds */;
        bytes[tri_start + 1] = 2;
        assert!(matches!(
            QfType::from_bytes(&bytes),
            Err(StructureError::MalformedType(_))
        ));
    }
}
