//! Imaginary-sorts expansion of an index model: each supplied tuple
//! equivalence relation contributes one new sort whose elements are its
//! classes, reached from the base sort by a total projection map and
//! optionally labelled by lifted tuple predicates.  Equality itself is
//! stipulated: its classes are identified with the base vertices, so passing
//! no relations reproduces the base.
//!
//! On top of the expansion sit bounded definable/algebraic closure inside the
//! base model and the search for two distinct elements of the expansion that
//! realize the same quantifier-free type over a parameter tuple.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle::InvariantRelation;
use crate::structures::{
    enumerate_realizations, extend_realizing, qf_type_of, IndexModel, QfCode, StructureError,
    VertexId,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EqError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("relation {relation} is not an equivalence: {reason}")]
    NotEquivalence { relation: usize, reason: String },
    #[error(
        "lifted predicate {lifted} is not invariant under relation {relation}: \
         {left:?} and {right:?} are equivalent but disagree"
    )]
    NotInvariant {
        lifted: usize,
        relation: usize,
        left: Vec<VertexId>,
        right: Vec<VertexId>,
    },
}

/// One class of one relation: its members among the enumerated tuples, the
/// least of them as representative, and the lifted predicates it satisfies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqClass {
    pub relation: usize,
    pub representative: Vec<VertexId>,
    pub members: BTreeSet<Vec<VertexId>>,
    pub lifted: BTreeSet<usize>,
}

/// An element of the expansion: a base vertex or a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "sort", rename_all = "snake_case")]
pub enum EqElement {
    Base { vertex: VertexId },
    Class { id: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqExtension {
    base: IndexModel,
    relations: Vec<InvariantRelation>,
    lifted: Vec<InvariantRelation>,
    classes: Vec<EqClass>,
    maps: Vec<Vec<(Vec<VertexId>, usize)>>,
}

impl EqExtension {
    pub fn base(&self) -> &IndexModel {
        &self.base
    }

    pub fn relations(&self) -> &[InvariantRelation] {
        &self.relations
    }

    pub fn lifted(&self) -> &[InvariantRelation] {
        &self.lifted
    }

    pub fn classes(&self) -> &[EqClass] {
        &self.classes
    }

    /// The class that the projection map of `relation` assigns to a tuple.
    pub fn image(&self, relation: usize, tuple: &[VertexId]) -> Option<usize> {
        self.maps.get(relation)?.iter().find_map(|(t, id)| {
            if t.as_slice() == tuple {
                Some(*id)
            } else {
                None
            }
        })
    }

    /// Whether an element belongs to the base sort.
    pub fn p_star(&self, element: &EqElement) -> bool {
        matches!(element, EqElement::Base { .. })
    }

    /// Every element, class sorts first (by id) and then base vertices (by
    /// coordinate).
    pub fn elements(&self) -> Vec<EqElement> {
        (0..self.classes.len())
            .map(|id| EqElement::Class { id })
            .chain(
                self.base
                    .vertices_by_coord()
                    .into_iter()
                    .map(|vertex| EqElement::Base { vertex }),
            )
            .collect()
    }
}

/// All tuples of the given length over the base vertices, repetitions
/// allowed, in coordinate-lexicographic order.
fn all_tuples(base: &IndexModel, len: usize) -> Vec<Vec<VertexId>> {
    let vertices = base.vertices_by_coord();
    (0..len)
        .map(|_| vertices.iter().copied())
        .multi_cartesian_product()
        .collect()
}

/// Materialize the expansion.  Each relation must be an equivalence on the
/// full set of tuples of its arity, and each lifted predicate must be
/// constant on every class of every relation of matching arity.
pub fn build_eq_extension(
    base: IndexModel,
    relations: Vec<InvariantRelation>,
    lifted: Vec<InvariantRelation>,
) -> Result<EqExtension, EqError> {
    let mut classes: Vec<EqClass> = Vec::new();
    let mut maps: Vec<Vec<(Vec<VertexId>, usize)>> = Vec::new();
    for (index, relation) in relations.iter().enumerate() {
        if relation.arity_left() != relation.arity_right() {
            return Err(EqError::NotEquivalence {
                relation: index,
                reason: format!(
                    "left arity {} differs from right arity {}",
                    relation.arity_left(),
                    relation.arity_right()
                ),
            });
        }
        let tuples = all_tuples(&base, relation.arity_left());
        let mut related = vec![vec![false; tuples.len()]; tuples.len()];
        for (a, left) in tuples.iter().enumerate() {
            for (b, right) in tuples.iter().enumerate() {
                related[a][b] = relation.relates(&base, left, right)?;
            }
        }
        let mut rep: Vec<usize> = (0..tuples.len()).collect();
        for a in 0..tuples.len() {
            for b in 0..a {
                if related[b][a] && rep[b] == b {
                    rep[a] = b;
                    break;
                }
            }
        }
        for a in 0..tuples.len() {
            for b in 0..tuples.len() {
                if related[a][b] != (rep[a] == rep[b]) {
                    return Err(EqError::NotEquivalence {
                        relation: index,
                        reason: format!(
                            "tuples {:?} and {:?} break the class partition",
                            tuples[a], tuples[b]
                        ),
                    });
                }
            }
        }
        let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
        let mut map = Vec::with_capacity(tuples.len());
        for (a, tuple) in tuples.iter().enumerate() {
            let id = *ids.entry(rep[a]).or_insert_with(|| {
                classes.push(EqClass {
                    relation: index,
                    representative: tuples[rep[a]].clone(),
                    members: BTreeSet::new(),
                    lifted: BTreeSet::new(),
                });
                classes.len() - 1
            });
            classes[id].members.insert(tuple.clone());
            map.push((tuple.clone(), id));
        }
        maps.push(map);
    }

    for (j, predicate) in lifted.iter().enumerate() {
        for class in classes.iter_mut() {
            if relations[class.relation].arity_left() != predicate.arity_left() {
                continue;
            }
            let mut verdicts = class.members.iter().map(|member| {
                predicate
                    .relates(&base, member, &[])
                    .map(|holds| (member.clone(), holds))
            });
            let (first_member, first_holds) = verdicts.next().expect("classes are nonempty")?;
            for verdict in verdicts {
                let (member, holds) = verdict?;
                if holds != first_holds {
                    return Err(EqError::NotInvariant {
                        lifted: j,
                        relation: class.relation,
                        left: first_member,
                        right: member,
                    });
                }
            }
            if first_holds {
                class.lifted.insert(j);
            }
        }
    }

    Ok(EqExtension {
        base,
        relations,
        lifted,
        classes,
        maps,
    })
}

/// Build after silently dropping the lifted candidates that fail invariance.
pub fn build_with_invariant_lifts(
    base: IndexModel,
    relations: Vec<InvariantRelation>,
    candidates: Vec<InvariantRelation>,
) -> Result<EqExtension, EqError> {
    let mut kept = Vec::new();
    for candidate in candidates {
        match build_eq_extension(base.clone(), relations.clone(), vec![candidate.clone()]) {
            Ok(_) => kept.push(candidate),
            Err(EqError::NotInvariant { .. }) => {}
            Err(other) => return Err(other),
        }
    }
    build_eq_extension(base, relations, kept)
}

/// Indicator predicates "the vertex in this slot carries label q", one per
/// slot and per label occurring in the base.  The natural lift candidates for
/// predicate-labelled classes; empty when the class has no labels.
pub fn coordinate_pred_lifts(
    base: &IndexModel,
    arity: usize,
) -> Result<Vec<InvariantRelation>, StructureError> {
    let tuples = all_tuples(base, arity);
    if tuples.is_empty() {
        return Ok(Vec::new());
    }
    if qf_type_of(base, &tuples[0], &[])?.pred_at(0).is_none() {
        return Ok(Vec::new());
    }
    let labels: BTreeSet<_> = base
        .vertices_by_coord()
        .into_iter()
        .map(|v| base.pred(v).map(Clone::clone))
        .collect::<Result<_, _>>()?;
    let mut lifts = Vec::new();
    for slot in 0..arity {
        for label in &labels {
            let mut lift = InvariantRelation::new(arity, 0, Vec::new());
            for tuple in &tuples {
                if base.pred(tuple[slot])? == label {
                    lift.insert(qf_type_of(base, tuple, &[])?.code());
                }
            }
            lifts.push(lift);
        }
    }
    Ok(lifts)
}

/// Every equivalence relation on tuples of the given arity expressible as a
/// conjunction of coordinate equalities, deduplicated, total relation last.
pub fn coordinate_equivalences(
    base: &IndexModel,
    arity: usize,
) -> Result<Vec<InvariantRelation>, StructureError> {
    let tuples = all_tuples(base, arity);
    let atoms: Vec<(usize, usize)> = (0..arity)
        .flat_map(|i| (0..arity).map(move |j| (i, j)))
        .collect();
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for size in 1..=atoms.len() {
        subsets.extend((0..atoms.len()).combinations(size));
    }
    subsets.push(Vec::new());

    let mut seen: BTreeSet<BTreeSet<QfCode>> = BTreeSet::new();
    let mut out = Vec::new();
    'subset: for subset in &subsets {
        let chosen: BTreeSet<(usize, usize)> = subset.iter().map(|&a| atoms[a]).collect();
        let holds = |left: &[VertexId], right: &[VertexId]| {
            chosen.iter().all(|&(i, j)| left[i] == right[j])
        };
        for left in &tuples {
            if !holds(left, left) {
                continue 'subset;
            }
        }
        for left in &tuples {
            for mid in &tuples {
                if holds(left, mid) != holds(mid, left) {
                    continue 'subset;
                }
                if !holds(left, mid) {
                    continue;
                }
                for right in &tuples {
                    if holds(mid, right) && !holds(left, right) {
                        continue 'subset;
                    }
                }
            }
        }
        let relation =
            InvariantRelation::from_coordinate_atoms(base, &tuples, &[], arity, &chosen)?;
        if seen.insert(relation.accepted_set().clone()) {
            out.push(relation);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureKind {
    Dcl,
    Acl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosureStatus {
    Inside,
    Outside,
    UndeterminedAtBound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub kind: ClosureKind,
    pub element: VertexId,
    pub status: ClosureStatus,
    pub bound_used: usize,
}

/// Bounded closure check inside the base model.  An element is inside when
/// its quantifier-free type over the parameters pins it — it is one of the
/// parameters, or its predicate label names it uniquely; otherwise the search
/// extends the model with up to `bound` fresh vertices looking for a second
/// realization (definable closure) or `bound`-many (algebraic closure, the
/// finite stand-in for "infinitely many").
pub fn closure(
    model: &IndexModel,
    s_params: &[VertexId],
    element: VertexId,
    kind: ClosureKind,
    bound: usize,
) -> Result<ClosureReport, EqError> {
    let target = qf_type_of(model, &[element], s_params)?;
    let pinned = s_params.contains(&element)
        || match target.pred_at(0) {
            None => false,
            Some(label) => {
                let mut matching = 0usize;
                for v in model.vertices_by_coord() {
                    if model.pred(v)? == label {
                        matching += 1;
                    }
                }
                matching == 1
            }
        };
    if pinned {
        return Ok(ClosureReport {
            kind,
            element,
            status: ClosureStatus::Inside,
            bound_used: 0,
        });
    }

    let needed = match kind {
        ClosureKind::Dcl => 2,
        ClosureKind::Acl => bound.max(2),
    };
    let mut working = model.clone();
    let mut fresh = 0usize;
    loop {
        let found = enumerate_realizations(&working, &target, s_params)?.len();
        if found >= needed {
            return Ok(ClosureReport {
                kind,
                element,
                status: ClosureStatus::Outside,
                bound_used: fresh,
            });
        }
        if fresh >= bound {
            return Ok(ClosureReport {
                kind,
                element,
                status: ClosureStatus::UndeterminedAtBound,
                bound_used: fresh,
            });
        }
        let before = working.vertex_count();
        let (extended, _) = extend_realizing(&working, &target, s_params)?;
        let added = extended.vertex_count() - before;
        if added == 0 {
            return Ok(ClosureReport {
                kind,
                element,
                status: ClosureStatus::UndeterminedAtBound,
                bound_used: fresh,
            });
        }
        working = extended;
        fresh += added;
    }
}

/// How a term's value compares inside one element's quantifier-free type:
/// either it is a constant (the image of a pure parameter tuple, shared by
/// every element) or it is only identified up to first occurrence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum ValueTag {
    Constant(usize),
    Fresh(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Fingerprint {
    Base {
        code: QfCode,
        images: Vec<(usize, Vec<Option<usize>>, ValueTag)>,
    },
    Class {
        lifted: BTreeSet<usize>,
        preimages: BTreeSet<(usize, Vec<usize>)>,
    },
}

/// Find two distinct elements of the expansion realizing the same
/// quantifier-free type over the parameters, in the expanded signature: the
/// base-sort predicate, the projection maps applied to every pattern mixing
/// the element with parameters, and the lifted predicates.  Class sorts are
/// scanned before base vertices; the first equal pair wins.  Values of
/// projection terms that no parameter tuple reaches are compared up to first
/// occurrence, since classes are not constants of the language.
pub fn find_indistinguishable_pair(
    ext: &EqExtension,
    s_params: &[VertexId],
) -> Result<Option<(EqElement, EqElement)>, EqError> {
    let mut constants: BTreeSet<usize> = BTreeSet::new();
    let mut pure_patterns: Vec<Vec<Vec<VertexId>>> = Vec::new();
    for relation in ext.relations() {
        let arity = relation.arity_left();
        let patterns: Vec<Vec<VertexId>> = if s_params.is_empty() {
            Vec::new()
        } else {
            (0..arity)
                .map(|_| s_params.iter().copied())
                .multi_cartesian_product()
                .collect()
        };
        pure_patterns.push(patterns);
    }
    for (i, patterns) in pure_patterns.iter().enumerate() {
        for pattern in patterns {
            if let Some(id) = ext.image(i, pattern) {
                constants.insert(id);
            }
        }
    }

    let fingerprint = |element: &EqElement| -> Result<Fingerprint, EqError> {
        match element {
            EqElement::Class { id } => {
                let class = &ext.classes()[*id];
                let mut preimages = BTreeSet::new();
                for (i, patterns) in pure_patterns.iter().enumerate() {
                    for pattern in patterns {
                        if ext.image(i, pattern) == Some(*id) {
                            let indices: Vec<usize> = pattern
                                .iter()
                                .map(|v| s_params.iter().position(|s| s == v).unwrap())
                                .collect();
                            preimages.insert((i, indices));
                        }
                    }
                }
                Ok(Fingerprint::Class {
                    lifted: class.lifted.clone(),
                    preimages,
                })
            }
            EqElement::Base { vertex } => {
                let code = qf_type_of(ext.base(), &[*vertex], s_params)?.code();
                let mut canonical: BTreeMap<usize, usize> = BTreeMap::new();
                let mut images = Vec::new();
                for (i, relation) in ext.relations().iter().enumerate() {
                    let arity = relation.arity_left();
                    let slot_choices: Vec<Option<usize>> = std::iter::once(None)
                        .chain((0..s_params.len()).map(Some))
                        .collect();
                    for pattern in (0..arity)
                        .map(|_| slot_choices.iter().copied())
                        .multi_cartesian_product()
                    {
                        if pattern.iter().all(Option::is_some) {
                            continue;
                        }
                        let tuple: Vec<VertexId> = pattern
                            .iter()
                            .map(|slot| match slot {
                                None => *vertex,
                                Some(k) => s_params[*k],
                            })
                            .collect();
                        let id = ext
                            .image(i, &tuple)
                            .expect("projection maps are total on enumerated tuples");
                        let tag = if constants.contains(&id) {
                            ValueTag::Constant(id)
                        } else {
                            let next = canonical.len();
                            ValueTag::Fresh(*canonical.entry(id).or_insert(next))
                        };
                        images.push((i, pattern, tag));
                    }
                }
                Ok(Fingerprint::Base { code, images })
            }
        }
    };

    let elements = ext.elements();
    let mut seen: Vec<(Fingerprint, EqElement)> = Vec::new();
    for element in elements {
        let print = fingerprint(&element)?;
        if let Some((_, first)) = seen.iter().find(|(other, _)| *other == print) {
            return Ok(Some((*first, element)));
        }
        seen.push((print, element));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::ClassDescriptor;

    fn dense_order(points: u32) -> IndexModel {
        IndexModel::integer_cut(ClassDescriptor::LinearOrders, points)
    }

    fn labelled_order(points: u32) -> IndexModel {
        IndexModel::integer_cut(ClassDescriptor::LinearOrdersWithPredicates, points)
    }

    fn coordinate_relation(
        base: &IndexModel,
        arity: usize,
        atoms: &[(usize, usize)],
    ) -> InvariantRelation {
        let tuples = all_tuples(base, arity);
        let chosen: BTreeSet<(usize, usize)> = atoms.iter().copied().collect();
        InvariantRelation::from_coordinate_atoms(base, &tuples, &[], arity, &chosen).unwrap()
    }

    #[test]
    fn equality_alone_reproduces_the_base() {
        let base = dense_order(4);
        let ext = build_eq_extension(base.clone(), Vec::new(), Vec::new()).unwrap();
        assert!(ext.classes().is_empty());
        let elements = ext.elements();
        assert_eq!(
            elements,
            base.vertices_by_coord()
                .into_iter()
                .map(|vertex| EqElement::Base { vertex })
                .collect::<Vec<_>>()
        );
        assert!(elements.iter().all(|e| ext.p_star(e)));
    }

    #[test]
    fn first_coordinate_classes_biject_with_vertices() {
        let base = dense_order(4);
        let e1 = coordinate_relation(&base, 2, &[(0, 0)]);
        let ext = build_eq_extension(base.clone(), vec![e1], Vec::new()).unwrap();
        assert_eq!(ext.classes().len(), 4);
        let least = base.vertices_by_coord()[0];
        for (class, vertex) in ext.classes().iter().zip(base.vertices_by_coord()) {
            assert_eq!(class.representative, vec![vertex, least]);
            assert!(class.members.iter().all(|t| t[0] == vertex));
        }
    }

    #[test]
    fn crossed_atoms_are_not_an_equivalence() {
        let base = dense_order(3);
        let crossed = coordinate_relation(&base, 2, &[(0, 1)]);
        let err = build_eq_extension(base, vec![crossed], Vec::new()).unwrap_err();
        assert!(matches!(err, EqError::NotEquivalence { relation: 0, .. }));
    }

    #[test]
    fn order_does_not_lift_through_first_coordinate_classes() {
        let base = dense_order(3);
        let e1 = coordinate_relation(&base, 2, &[(0, 0)]);
        let mut increasing = InvariantRelation::new(2, 0, Vec::new());
        for tuple in all_tuples(&base, 2) {
            if base.coord(tuple[0]).unwrap() < base.coord(tuple[1]).unwrap() {
                increasing.insert(qf_type_of(&base, &tuple, &[]).unwrap().code());
            }
        }
        let err = build_eq_extension(base, vec![e1], vec![increasing]).unwrap_err();
        assert!(matches!(
            err,
            EqError::NotInvariant {
                lifted: 0,
                relation: 0,
                ..
            }
        ));
    }

    #[test]
    fn label_indicators_lift_and_separate() {
        let base = labelled_order(3);
        let identity = coordinate_relation(&base, 1, &[(0, 0)]);
        let lifts = coordinate_pred_lifts(&base, 1).unwrap();
        assert_eq!(lifts.len(), 3);
        let ext = build_eq_extension(base, vec![identity], lifts).unwrap();
        let sets: BTreeSet<_> = ext.classes().iter().map(|c| c.lifted.clone()).collect();
        assert_eq!(sets.len(), ext.classes().len());
    }

    #[test]
    fn labelled_points_are_definable() {
        let model = labelled_order(3);
        let element = model.vertices_by_coord()[1];
        for kind in [ClosureKind::Dcl, ClosureKind::Acl] {
            let report = closure(&model, &[], element, kind, 4).unwrap();
            assert_eq!(report.status, ClosureStatus::Inside);
            assert_eq!(report.bound_used, 0);
        }
    }

    #[test]
    fn dense_points_are_nowhere_closed() {
        let model = dense_order(3);
        let element = model.vertices_by_coord()[1];
        let dcl = closure(&model, &[], element, ClosureKind::Dcl, 4).unwrap();
        assert_eq!(dcl.status, ClosureStatus::Outside);
        assert_eq!(dcl.bound_used, 0);
        let acl = closure(&model, &[], element, ClosureKind::Acl, 4).unwrap();
        assert_eq!(acl.status, ClosureStatus::Outside);
        assert!(acl.bound_used <= 4);
    }

    #[test]
    fn between_two_parameters_is_not_definable() {
        let model = dense_order(3);
        let vs = model.vertices_by_coord();
        let report = closure(&model, &[vs[0], vs[2]], vs[1], ClosureKind::Dcl, 2).unwrap();
        assert_eq!(report.status, ClosureStatus::Outside);
        assert!(report.bound_used <= 2);
        assert!(report.bound_used >= 1);
    }

    #[test]
    fn parameters_are_their_own_closure() {
        let model = dense_order(3);
        let vs = model.vertices_by_coord();
        let report = closure(&model, &[vs[0]], vs[0], ClosureKind::Dcl, 2).unwrap();
        assert_eq!(report.status, ClosureStatus::Inside);
    }

    #[test]
    fn closure_is_monotone_in_the_parameters() {
        let dense = dense_order(4);
        let labelled = labelled_order(4);
        for model in [&dense, &labelled] {
            let vs = model.vertices_by_coord();
            for element in &vs {
                let mut previous_inside = false;
                for take in 0..vs.len() {
                    let params: Vec<VertexId> = vs
                        .iter()
                        .copied()
                        .filter(|v| v != element)
                        .take(take)
                        .collect();
                    let report =
                        closure(model, &params, *element, ClosureKind::Dcl, 3).unwrap();
                    let inside = report.status == ClosureStatus::Inside;
                    assert!(
                        !previous_inside || inside,
                        "growing the parameters moved {element:?} outside"
                    );
                    previous_inside = inside;
                }
            }
        }
    }

    #[test]
    fn pair_class_extension_of_a_dense_order_has_twins() {
        let base = dense_order(4);
        let e1 = coordinate_relation(&base, 2, &[(0, 0)]);
        let e2 = coordinate_relation(&base, 2, &[(1, 1)]);
        let ext = build_eq_extension(base.clone(), vec![e1, e2], Vec::new()).unwrap();
        let vs = base.vertices_by_coord();
        for s_params in [vec![], vec![vs[0]], vec![vs[0], vs[2]]] {
            let pair = find_indistinguishable_pair(&ext, &s_params).unwrap();
            let (left, right) = pair.expect("dense pair classes are indistinguishable");
            assert_ne!(left, right);
            assert!(matches!(left, EqElement::Class { .. }));
            assert!(matches!(right, EqElement::Class { .. }));
        }
    }

    #[test]
    fn label_separated_extension_has_no_twins() {
        let base = labelled_order(4);
        for relation in coordinate_equivalences(&base, 2).unwrap() {
            let arity = relation.arity_left();
            let candidates = coordinate_pred_lifts(&base, arity).unwrap();
            let ext =
                build_with_invariant_lifts(base.clone(), vec![relation], candidates).unwrap();
            let vs = base.vertices_by_coord();
            for s_params in [vec![], vec![vs[0]], vec![vs[0], vs[2]]] {
                assert_eq!(
                    find_indistinguishable_pair(&ext, &s_params).unwrap(),
                    None,
                    "labels should separate every sort of {:?}",
                    ext.relations()[0]
                );
            }
        }
    }

    #[test]
    fn one_total_class_has_no_partner() {
        let base = labelled_order(3);
        let total = coordinate_relation(&base, 1, &[]);
        let lifts = coordinate_pred_lifts(&base, 1).unwrap();
        let ext = build_with_invariant_lifts(base, vec![total], lifts).unwrap();
        assert_eq!(ext.classes().len(), 1);
        assert_eq!(find_indistinguishable_pair(&ext, &[]).unwrap(), None);
    }

    #[test]
    fn reports_and_extensions_round_trip_as_json() {
        let base = dense_order(3);
        let e1 = coordinate_relation(&base, 2, &[(0, 0)]);
        let ext = build_eq_extension(base, vec![e1], Vec::new()).unwrap();
        let json = serde_json::to_string(&ext).unwrap();
        let back: EqExtension = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ext);

        let report = ClosureReport {
            kind: ClosureKind::Acl,
            element: VertexId(1),
            status: ClosureStatus::UndeterminedAtBound,
            bound_used: 3,
        };
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("undetermined-at-bound"));
        let back: ClosureReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }
}
