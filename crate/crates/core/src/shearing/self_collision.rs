//! From one positive/negative collision between two realizations to a
//! collision inside a single realization.
//!
//! Given realizations `left` and `right` whose concatenated code puts a
//! positive-atom position of `left` equal to a negative-atom position of
//! `right`, the derivation (1) normalizes the pair until, between consecutive
//! shared elements, everything of `left` sits below everything of `right`,
//! substituting one adjacent inversion at a time by fresh points of the same
//! qf-type, and (2) copies the non-shared part of `right` leftward, one point
//! at a time, each copy realizing the full type of its template over all the
//! other points. The final triple carries the collision around a cycle whose
//! transitive closure lands on the diagonal: the same equality inside one
//! tuple, which makes the single formula contradictory. Every move records
//! the codes that justify it, and every membership is re-checked against the
//! labeling, so a labeling that fails to be closed under these extensions is
//! reported rather than silently repaired.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{instantiate_family, Labeling, ShearingError, ShearingInstance};
use crate::rational::Coord;
use crate::structures::{
    extend_realizing, qf_type_of, IndexModel, QfCode, StructureError, VertexId,
};

/// A positive/negative collision between two realizations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionSite {
    pub left: Vec<VertexId>,
    pub right: Vec<VertexId>,
    /// Position of the colliding parameter inside a positive atom.
    pub pos: usize,
    /// Position of the colliding parameter inside a negative atom.
    pub neg: usize,
    pub code: QfCode,
}

/// One justified rewriting of the working pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TraceMove {
    /// An adjacent inversion `right[b] < left[a]` inside one shared-element
    /// interval is flipped: fresh `new_left` and `new_right` repeat the types
    /// of the points they replace, with `right[b] < new_left < new_right <
    /// left[a]`. The two one-point codes equal the current pair code, and the
    /// doubly substituted pair keeps the collision.
    Substitution {
        left_position: usize,
        right_position: usize,
        new_left: VertexId,
        new_right: VertexId,
        left_code: QfCode,
        right_code: QfCode,
        merged_code: QfCode,
    },
    /// One non-shared point of the right tuple is copied below the remaining
    /// originals of its interval; the pair code is unchanged.
    CopyLeft {
        position: usize,
        copy: VertexId,
        pair_code: QfCode,
    },
}

/// A derived collision inside one realization, with its justification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfCollision {
    pub site: CollisionSite,
    pub trace: Vec<TraceMove>,
    /// The normalized pair the copy phase started from.
    pub left: Vec<VertexId>,
    pub right: Vec<VertexId>,
    /// The leftward copy of `right`.
    pub twin: Vec<VertexId>,
    pub left_twin_code: QfCode,
    pub twin_right_code: QfCode,
    pub diagonal_code: QfCode,
    /// Whether the single formula is contradictory once the diagonal
    /// collision is in force, checked through the oracle.
    pub single_inconsistent: bool,
    pub fresh_vertices: usize,
    pub model: IndexModel,
}

/// All positive/negative collisions among realized pairs, in enumeration
/// order.
pub fn find_pos_neg_collisions(
    inst: &ShearingInstance,
    j_model: &IndexModel,
) -> Result<Vec<CollisionSite>, ShearingError> {
    let family = instantiate_family(inst, j_model)?;
    let positive: BTreeSet<usize> = inst.formula().positive().flatten().copied().collect();
    let negative: BTreeSet<usize> = inst.formula().negative().flatten().copied().collect();
    let mut sites = Vec::new();
    for left in &family.realizations {
        for right in &family.realizations {
            let concat: Vec<VertexId> = left.iter().chain(right.iter()).copied().collect();
            let code = qf_type_of(j_model, &concat, inst.i0())?.code();
            for &i in &positive {
                for &j in &negative {
                    if collides(inst, j_model, left, right, i, j)? {
                        sites.push(CollisionSite {
                            left: left.clone(),
                            right: right.clone(),
                            pos: i,
                            neg: j,
                            code: code.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(sites)
}

/// The first positive/negative collision, if any.
pub fn find_pos_neg_collision(
    inst: &ShearingInstance,
    j_model: &IndexModel,
) -> Result<Option<CollisionSite>, ShearingError> {
    Ok(find_pos_neg_collisions(inst, j_model)?.into_iter().next())
}

pub(crate) fn collides(
    inst: &ShearingInstance,
    j_model: &IndexModel,
    left: &[VertexId],
    right: &[VertexId],
    i: usize,
    j: usize,
) -> Result<bool, ShearingError> {
    match inst.labeling() {
        Labeling::Projection { coord_map, .. } => Ok(left[coord_map[i]] == right[coord_map[j]]),
        Labeling::Collision { .. } => {
            let concat: Vec<VertexId> = left.iter().chain(right.iter()).copied().collect();
            let code = qf_type_of(j_model, &concat, inst.i0())?.code();
            Ok(inst.labeling().has_collision(i, j, &code))
        }
    }
}

struct Derivation<'a> {
    inst: &'a ShearingInstance,
    model: IndexModel,
    left: Vec<VertexId>,
    right: Vec<VertexId>,
    pos: usize,
    neg: usize,
    boundaries: Vec<Coord>,
    trace: Vec<TraceMove>,
    fresh: usize,
    budget: usize,
}

/// Carry a positive/negative collision between two realizations into a single
/// realization. Fails honestly when the labeling is not closed under the
/// extensions the derivation performs, or when the budget of fresh points
/// runs out.
pub fn derive_self_collision(
    inst: &ShearingInstance,
    j_model: &IndexModel,
    site: &CollisionSite,
    budget: usize,
) -> Result<SelfCollision, ShearingError> {
    if matches!(inst.labeling(), Labeling::Projection { .. }) {
        return Err(ShearingError::MissingCollision(
            "projection labelings collide only by sharing skeleton vertices; the derivation \
             needs an abstract collision relation"
                .into(),
        ));
    }
    let mut derivation = Derivation::new(inst, j_model, site, budget)?;
    derivation.require_in_relation(&site.code, "the starting pair")?;
    derivation.normalize()?;
    let (twin, left_twin_code, twin_right_code) = derivation.copy_right_leftward()?;
    let diag_concat: Vec<VertexId> = twin.iter().chain(twin.iter()).copied().collect();
    let diagonal_code = qf_type_of(&derivation.model, &diag_concat, inst.i0())?.code();
    derivation.require_in_relation(
        &diagonal_code,
        "the diagonal of the derived twin (transitivity over the extended model forces it)",
    )?;
    let family = instantiate_family(inst, j_model)?;
    let single_inconsistent = !family.diagrams[family.t_index]
        .consistent()
        .is_consistent();
    Ok(SelfCollision {
        site: site.clone(),
        trace: derivation.trace,
        left: derivation.left,
        right: derivation.right,
        twin,
        left_twin_code,
        twin_right_code,
        diagonal_code,
        single_inconsistent,
        fresh_vertices: derivation.fresh,
        model: derivation.model,
    })
}

impl<'a> Derivation<'a> {
    fn new(
        inst: &'a ShearingInstance,
        j_model: &IndexModel,
        site: &CollisionSite,
        budget: usize,
    ) -> Result<Self, ShearingError> {
        for &v in site.left.iter().chain(site.right.iter()) {
            if !j_model.contains(v) {
                return Err(ShearingError::Structure(StructureError::UnknownVertex(v)));
            }
        }
        let model = j_model.clone();
        let mut boundaries: BTreeSet<Coord> = BTreeSet::new();
        let left_set: BTreeSet<VertexId> = site.left.iter().copied().collect();
        for &v in site.right.iter() {
            if left_set.contains(&v) {
                boundaries.insert(model.coord(v)?.clone());
            }
        }
        for &v in inst.i0() {
            boundaries.insert(model.coord(v)?.clone());
        }
        Ok(Derivation {
            inst,
            model,
            left: site.left.clone(),
            right: site.right.clone(),
            pos: site.pos,
            neg: site.neg,
            boundaries: boundaries.into_iter().collect(),
            trace: Vec::new(),
            fresh: 0,
            budget,
        })
    }

    fn require_in_relation(&self, code: &QfCode, what: &str) -> Result<(), ShearingError> {
        if self.inst.labeling().has_collision(self.pos, self.neg, code) {
            Ok(())
        } else {
            Err(ShearingError::IncoherentLabeling(format!(
                "the collision relation at positions ({}, {}) does not accept the code of {what}",
                self.pos, self.neg
            )))
        }
    }

    fn pair_code(&self) -> Result<QfCode, ShearingError> {
        let concat: Vec<VertexId> = self.left.iter().chain(self.right.iter()).copied().collect();
        Ok(qf_type_of(&self.model, &concat, self.inst.i0())?.code())
    }

    /// Interval index of a coordinate among the shared-element boundaries;
    /// `None` when the coordinate is itself a boundary.
    fn interval_of(&self, c: &Coord) -> Option<usize> {
        if self.boundaries.binary_search(c).is_ok() {
            return None;
        }
        Some(self.boundaries.partition_point(|b| b < c))
    }

    fn crossings(&self) -> Result<Vec<(usize, usize)>, ShearingError> {
        let mut out = Vec::new();
        for (a, &va) in self.left.iter().enumerate() {
            let ca = self.model.coord(va)?.clone();
            let Some(ia) = self.interval_of(&ca) else {
                continue;
            };
            for (b, &wb) in self.right.iter().enumerate() {
                let cb = self.model.coord(wb)?.clone();
                if self.interval_of(&cb) == Some(ia) && cb < ca {
                    out.push((a, b));
                }
            }
        }
        Ok(out)
    }

    /// A crossing with nothing of either tuple strictly between its two
    /// points always exists while any crossing does.
    fn adjacent_crossing(&self, crossings: &[(usize, usize)]) -> Result<(usize, usize), ShearingError> {
        'candidates: for &(a, b) in crossings {
            let lo = self.model.coord(self.right[b])?;
            let hi = self.model.coord(self.left[a])?;
            for &v in self.left.iter().chain(self.right.iter()) {
                let c = self.model.coord(v)?;
                if lo < c && c < hi {
                    continue 'candidates;
                }
            }
            return Ok((a, b));
        }
        Err(ShearingError::BadInstance(
            "crossings without an adjacent one; the working pair is not a valid realization pair"
                .into(),
        ))
    }

    /// Fresh point strictly inside `(lo, hi)` repeating `template`'s
    /// predicate and its edges to everything else, returned after a full
    /// type-directed extension.
    fn copy_point(
        &mut self,
        template: VertexId,
        lo: &Coord,
        hi: &Coord,
    ) -> Result<VertexId, ShearingError> {
        if self.fresh + 1 > self.budget {
            return Err(ShearingError::BudgetExhausted(format!(
                "the derivation needs more than {} fresh points",
                self.budget
            )));
        }
        let params = self.model.vertices_by_coord();
        let occupied: BTreeSet<&Coord> = params
            .iter()
            .map(|&v| self.model.coord(v))
            .collect::<Result<_, _>>()?;
        let mut coord = Coord::midpoint(lo, hi);
        while occupied.contains(&coord) {
            coord = Coord::midpoint(lo, &coord);
        }
        let mut scratch = self.model.clone();
        let fresh = scratch.fresh_vertex_id();
        scratch.insert_vertex(fresh, coord, scratch.pred(template)?.clone());
        let template_edges: Vec<BTreeSet<VertexId>> = scratch
            .edges()
            .filter(|e| e.contains(&template))
            .cloned()
            .collect();
        for edge in template_edges {
            let copied: BTreeSet<VertexId> = edge
                .into_iter()
                .map(|v| if v == template { fresh } else { v })
                .collect();
            scratch.insert_edge(copied);
        }
        let target = qf_type_of(&scratch, &[fresh], &params)?;
        let (next, tuple) = extend_realizing(&self.model, &target, &params)?;
        self.model = next;
        self.fresh += 1;
        Ok(tuple[0])
    }

    /// Remove crossings one adjacent inversion at a time, keeping the
    /// collision on the working pair at every step.
    fn normalize(&mut self) -> Result<(), ShearingError> {
        loop {
            let crossings = self.crossings()?;
            if crossings.is_empty() {
                return Ok(());
            }
            let (a, b) = self.adjacent_crossing(&crossings)?;
            let current = self.pair_code()?;
            let lo = self.model.coord(self.right[b])?.clone();
            let hi = self.model.coord(self.left[a])?.clone();
            let new_left = self.copy_point(self.left[a], &lo, &hi)?;
            let mid = self.model.coord(new_left)?.clone();
            let new_right = self.copy_point(self.right[b], &mid, &hi)?;

            let mut left_sub = self.left.clone();
            left_sub[a] = new_left;
            let concat: Vec<VertexId> =
                left_sub.iter().chain(self.right.iter()).copied().collect();
            let left_code = qf_type_of(&self.model, &concat, self.inst.i0())?.code();
            if left_code != current {
                return Err(ShearingError::BadInstance(
                    "substituting the left point of an adjacent inversion changed the pair type"
                        .into(),
                ));
            }
            let mut right_sub = self.right.clone();
            right_sub[b] = new_right;
            let concat: Vec<VertexId> =
                self.left.iter().chain(right_sub.iter()).copied().collect();
            let right_code = qf_type_of(&self.model, &concat, self.inst.i0())?.code();
            if right_code != current {
                return Err(ShearingError::BadInstance(
                    "substituting the right point of an adjacent inversion changed the pair type"
                        .into(),
                ));
            }
            let before = crossings.len();
            self.left = left_sub;
            self.right = right_sub;
            let merged_code = self.pair_code()?;
            self.require_in_relation(&merged_code, "the doubly substituted pair")?;
            if self.crossings()?.len() >= before {
                return Err(ShearingError::BadInstance(
                    "an inversion substitution failed to reduce the crossing count".into(),
                ));
            }
            self.trace.push(TraceMove::Substitution {
                left_position: a,
                right_position: b,
                new_left,
                new_right,
                left_code,
                right_code,
                merged_code,
            });
        }
    }

    /// Copy the non-shared points of the right tuple below the originals of
    /// their intervals, one point at a time in increasing coordinate order,
    /// preserving the pair code throughout; returns the copy and the two
    /// codes tying it to the normalized pair.
    fn copy_right_leftward(&mut self) -> Result<(Vec<VertexId>, QfCode, QfCode), ShearingError> {
        let target_code = self.pair_code()?;
        let left_set: BTreeSet<VertexId> = self.left.iter().copied().collect();
        let mut order: Vec<usize> = (0..self.right.len())
            .filter(|&l| !left_set.contains(&self.right[l]))
            .collect();
        let coords: Result<Vec<Coord>, StructureError> = self
            .right
            .iter()
            .map(|&w| self.model.coord(w).cloned())
            .collect();
        let coords = coords?;
        order.sort_by(|&a, &b| coords[a].cmp(&coords[b]));

        let mut floors: Vec<Option<Coord>> = vec![None; self.boundaries.len() + 1];
        for (interval, floor) in floors.iter_mut().enumerate() {
            let mut best: Option<Coord> = None;
            if interval > 0 {
                best = Some(self.boundaries[interval - 1].clone());
            }
            for &v in &self.left {
                let c = self.model.coord(v)?.clone();
                if self.interval_of(&c) == Some(interval) && best.as_ref().map_or(true, |b| c > *b)
                {
                    best = Some(c);
                }
            }
            *floor = best;
        }
        let mut ceilings: Vec<Option<Coord>> = vec![None; self.boundaries.len() + 1];
        for &l in &order {
            let c = &coords[l];
            let interval = self.interval_of(c).ok_or_else(|| {
                ShearingError::BadInstance(
                    "a non-shared right point sits on a shared boundary".into(),
                )
            })?;
            let ceiling = &mut ceilings[interval];
            if ceiling.as_ref().map_or(true, |top| c < top) {
                *ceiling = Some(c.clone());
            }
        }

        let mut twin = self.right.clone();
        for &l in &order {
            let interval = self.interval_of(&coords[l]).expect("checked above");
            let ceiling = ceilings[interval].clone().expect("interval has originals");
            let floor = match &floors[interval] {
                Some(f) => f.clone(),
                None => Coord::pred(&ceiling),
            };
            let copy = self.copy_point(twin[l], &floor, &ceiling)?;
            floors[interval] = Some(self.model.coord(copy)?.clone());
            twin[l] = copy;
            let concat: Vec<VertexId> = self.left.iter().chain(twin.iter()).copied().collect();
            let pair_code = qf_type_of(&self.model, &concat, self.inst.i0())?.code();
            if pair_code != target_code {
                return Err(ShearingError::IncoherentLabeling(
                    "a leftward copy changed the pair type; the collision relation is not \
                     closed under this extension"
                        .into(),
                ));
            }
            self.trace.push(TraceMove::CopyLeft {
                position: l,
                copy,
                pair_code,
            });
        }
        let left_twin_code = target_code;
        let concat: Vec<VertexId> = twin.iter().chain(self.right.iter()).copied().collect();
        let twin_right_code = qf_type_of(&self.model, &concat, self.inst.i0())?.code();
        self.require_in_relation(&twin_right_code, "the copy against the normalized right tuple")?;
        Ok((twin, left_twin_code, twin_right_code))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::TheoryDescriptor;
    use crate::shearing::{check_shearing, FormulaPattern};
    use crate::structures::ClassDescriptor;
    use std::collections::BTreeMap;

    /// A collision relation over the (3, 2) index class identifying every
    /// pair of instances of two fixed positions: coherent, total, and with
    /// the diagonal inside, so a single formula using both signs on those
    /// positions is already contradictory. The derivation must reach that
    /// diagonal from any starting pair and leave a replayable trace. The
    /// working model carries both an interleaved and a separated extra
    /// realization.
    fn total_collision_instance() -> (ShearingInstance, IndexModel) {
        let class = ClassDescriptor::hypergraph(3, 2).unwrap();
        let base = IndexModel::integer_cut(class, 2);
        let t = vec![VertexId(0), VertexId(1)];
        let mut j_model = base.clone();
        let p0 = Coord::from_int(0);
        let p1 = Coord::from_int(1);
        j_model.insert_vertex(VertexId(2), Coord::new(1, 2), p0.clone());
        j_model.insert_vertex(VertexId(3), Coord::new(3, 2), p1.clone());
        j_model.insert_vertex(VertexId(4), Coord::from_int(4), p0);
        j_model.insert_vertex(VertexId(5), Coord::from_int(5), p1);
        let mut formula = FormulaPattern::new(2);
        formula.add_positive([0]).add_negative([1]);
        formula.add_disequal(0).add_disequal(1);
        let inst = ShearingInstance::new(
            base,
            vec![],
            t,
            TheoryDescriptor::random_graph(),
            all_pairs_labeling(class),
            formula,
        )
        .unwrap();
        (inst, j_model)
    }

    /// Accept every concatenated-pair code arising from realizations of the
    /// increasing pair type, at every position pair. Codes are enumerated
    /// over a tall alternating model, so every relative arrangement of two
    /// pairs is covered and the relation is closed under the derivation's
    /// extensions.
    fn all_pairs_labeling(class: ClassDescriptor) -> Labeling {
        let mut wide = IndexModel::new(class);
        for i in 0..12u32 {
            wide.insert_vertex(
                VertexId(i),
                Coord::from_int(i64::from(i)),
                Coord::from_int(i64::from(i % 2)),
            );
        }
        let base = IndexModel::integer_cut(class, 2);
        let r = qf_type_of(&base, &[VertexId(0), VertexId(1)], &[]).unwrap();
        let realizations = crate::structures::enumerate_realizations(&wide, &r, &[]).unwrap();
        let mut codes: BTreeSet<QfCode> = BTreeSet::new();
        for x in &realizations {
            for y in &realizations {
                let concat: Vec<VertexId> = x.iter().chain(y.iter()).copied().collect();
                codes.insert(qf_type_of(&wide, &concat, &[]).unwrap().code());
            }
        }
        let mut collisions: BTreeMap<(usize, usize), BTreeSet<QfCode>> = BTreeMap::new();
        for i in 0..2 {
            for j in 0..2 {
                collisions.insert((i, j), codes.clone());
            }
        }
        Labeling::Collision {
            width: 2,
            collisions,
            edge_rules: BTreeMap::new(),
        }
    }

    #[test]
    fn interleaved_pair_is_normalized_and_copied_to_the_diagonal() {
        let (inst, j_model) = total_collision_instance();
        let sites = find_pos_neg_collisions(&inst, &j_model).unwrap();
        assert!(!sites.is_empty());
        // Pick a pair with a genuine crossing: left strictly above right in
        // some shared-free interval.
        let site = sites
            .iter()
            .find(|s| {
                let lc = j_model.coord(s.left[0]).unwrap();
                let rc = j_model.coord(s.right[0]).unwrap();
                s.left != s.right && lc > rc
            })
            .expect("an inverted pair exists");
        let derived = derive_self_collision(&inst, &j_model, site, 16).unwrap();
        assert!(derived
            .trace
            .iter()
            .any(|m| matches!(m, TraceMove::Substitution { .. })));
        assert!(derived
            .trace
            .iter()
            .any(|m| matches!(m, TraceMove::CopyLeft { .. })));
        assert!(derived.single_inconsistent);
        assert!(inst
            .labeling()
            .has_collision(site.pos, site.neg, &derived.diagonal_code));
        // Replay: every recorded code matches a recomputation on the final
        // model.
        let concat: Vec<VertexId> = derived
            .left
            .iter()
            .chain(derived.twin.iter())
            .copied()
            .collect();
        assert_eq!(
            qf_type_of(&derived.model, &concat, inst.i0()).unwrap().code(),
            derived.left_twin_code
        );
        let concat: Vec<VertexId> = derived
            .twin
            .iter()
            .chain(derived.right.iter())
            .copied()
            .collect();
        assert_eq!(
            qf_type_of(&derived.model, &concat, inst.i0()).unwrap().code(),
            derived.twin_right_code
        );
        assert!(derived.model.validate().is_ok());
    }

    #[test]
    fn aligned_pair_skips_normalization() {
        let (inst, j_model) = total_collision_instance();
        let sites = find_pos_neg_collisions(&inst, &j_model).unwrap();
        let site = sites
            .iter()
            .find(|s| {
                let l1 = j_model.coord(s.left[1]).unwrap();
                let r0 = j_model.coord(s.right[0]).unwrap();
                s.left != s.right && l1 < r0
            })
            .expect("a separated pair exists");
        let derived = derive_self_collision(&inst, &j_model, site, 16).unwrap();
        assert!(derived
            .trace
            .iter()
            .all(|m| matches!(m, TraceMove::CopyLeft { .. })));
        assert!(derived.single_inconsistent);
    }

    #[test]
    fn derivation_respects_its_budget() {
        let (inst, j_model) = total_collision_instance();
        let sites = find_pos_neg_collisions(&inst, &j_model).unwrap();
        let site = sites
            .iter()
            .find(|s| s.left != s.right)
            .expect("distinct pair");
        let err = derive_self_collision(&inst, &j_model, site, 0).unwrap_err();
        assert!(matches!(err, ShearingError::BudgetExhausted(_)));
    }

    #[test]
    fn vertex_sharing_collision_over_a_pure_order_blocks_the_copy() {
        // Identify position 0 of one pair with position 1 of another exactly
        // when they share that vertex. Coherent, fixed-point-free, and the
        // family genuinely shears, so the derivation has to fail: the copied
        // twin cannot keep sharing a vertex it was moved away from.
        let base = IndexModel::integer_cut(ClassDescriptor::LinearOrders, 3);
        let t = vec![VertexId(0), VertexId(1)];
        let r = qf_type_of(&base, &t, &[]).unwrap();
        let realizations = crate::structures::enumerate_realizations(&base, &r, &[]).unwrap();
        let mut shared_01: BTreeSet<QfCode> = BTreeSet::new();
        let mut shared_10: BTreeSet<QfCode> = BTreeSet::new();
        let mut diagonal: BTreeSet<QfCode> = BTreeSet::new();
        for x in &realizations {
            for y in &realizations {
                let concat: Vec<VertexId> = x.iter().chain(y.iter()).copied().collect();
                let code = qf_type_of(&base, &concat, &[]).unwrap().code();
                if x[0] == y[1] {
                    shared_01.insert(code.clone());
                }
                if x[1] == y[0] {
                    shared_10.insert(code.clone());
                }
                if x == y {
                    diagonal.insert(code.clone());
                }
            }
        }
        let mut collisions: BTreeMap<(usize, usize), BTreeSet<QfCode>> = BTreeMap::new();
        collisions.insert((0, 1), shared_01);
        collisions.insert((1, 0), shared_10);
        collisions.insert((0, 0), diagonal.clone());
        collisions.insert((1, 1), diagonal);
        let mut formula = FormulaPattern::new(2);
        formula.add_positive([0]).add_negative([1]);
        let inst = ShearingInstance::new(
            base.clone(),
            vec![],
            t,
            TheoryDescriptor::random_graph(),
            Labeling::Collision {
                width: 2,
                collisions,
                edge_rules: BTreeMap::new(),
            },
            formula,
        )
        .unwrap();
        let (report, j_model) = check_shearing(&inst, 0).unwrap();
        assert!(report.is_valid_witness());
        let site = find_pos_neg_collision(&inst, &j_model).unwrap().unwrap();
        let err = derive_self_collision(&inst, &j_model, &site, 16).unwrap_err();
        assert!(matches!(err, ShearingError::IncoherentLabeling(_)));
    }

    #[test]
    fn projection_labelings_are_rejected() {
        let demo = crate::shearing::build_demo_instance(crate::shearing::DemoKind::RgLinear)
            .unwrap();
        let (_, j_model) = check_shearing(&demo.instance, 0).unwrap();
        let site = find_pos_neg_collision(&demo.instance, &j_model)
            .unwrap()
            .unwrap();
        let err =
            derive_self_collision(&demo.instance, &j_model, &site, 8).unwrap_err();
        assert!(matches!(err, ShearingError::MissingCollision(_)));
    }
}
