//! Pairs of invariant equivalence relations matched by a fixed-point-free
//! partial function, and their two-way exchange with random-graph shearing.
//!
//! A [`CircleWitness`] packages two equivalence relations `E1`, `E2` on the
//! realizations of a quantifier-free type together with a relation `F` that
//! induces a nonempty injective partial function from `E1`-classes to
//! `E2`-classes and never relates a realization to itself.  Such a witness
//! converts into a width-two collision labeling whose family shears in the
//! random graph, and every random-graph shearing witness with a genuine
//! positive/negative collision converts back.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{Diagram, TheoryDescriptor};
use crate::rational::Coord;
use crate::shearing::{
    check_labeling_coherence, instantiate_family, FormulaPattern, Labeling, ShearingError,
    ShearingInstance,
};
use crate::shearing::{find_pos_neg_collision, CollisionSite};
use crate::structures::{
    enumerate_realizations, qf_type_of, ClassDescriptor, IndexModel, QfCode, StructureError,
    VertexId,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircleError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Shearing(#[from] ShearingError),
    #[error("search class {expected:?} does not match the base model's class {got:?}")]
    ClassMismatch {
        expected: ClassDescriptor,
        got: ClassDescriptor,
    },
    #[error("witness fails verification: {0:?}")]
    InvalidWitness(Vec<CircleViolation>),
    #[error("the instance does not witness shearing: {0}")]
    NoShearing(String),
    #[error(
        "no positive/negative collision: the inconsistency is trivial forking \
         coming from equality"
    )]
    NoCollision,
    #[error("only random-graph instances convert, got {0:?}")]
    TheoryMismatch(TheoryDescriptor),
}

/// A binary relation between tuples of index-model vertices, stored as the
/// set of accepted quantifier-free codes of concatenated pairs over a fixed
/// parameter enumeration.  Membership depends only on the code, so the
/// relation is invariant under type-preserving maps by construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantRelation {
    arity_left: usize,
    arity_right: usize,
    over: Vec<VertexId>,
    accepted: BTreeSet<QfCode>,
}

impl InvariantRelation {
    pub fn new(arity_left: usize, arity_right: usize, over: Vec<VertexId>) -> Self {
        InvariantRelation {
            arity_left,
            arity_right,
            over,
            accepted: BTreeSet::new(),
        }
    }

    /// The relation holding between pairs from `tuples` whose concatenation
    /// satisfies every listed coordinate equality `left[i] == right[j]`.
    pub fn from_coordinate_atoms(
        model: &IndexModel,
        tuples: &[Vec<VertexId>],
        over: &[VertexId],
        arity: usize,
        atoms: &BTreeSet<(usize, usize)>,
    ) -> Result<Self, StructureError> {
        let mut rel = InvariantRelation::new(arity, arity, over.to_vec());
        for left in tuples {
            for right in tuples {
                if atoms.iter().all(|&(i, j)| left[i] == right[j]) {
                    let concat: Vec<VertexId> =
                        left.iter().chain(right.iter()).copied().collect();
                    rel.accepted.insert(qf_type_of(model, &concat, over)?.code());
                }
            }
        }
        Ok(rel)
    }

    pub fn arity_left(&self) -> usize {
        self.arity_left
    }

    pub fn arity_right(&self) -> usize {
        self.arity_right
    }

    pub fn over(&self) -> &[VertexId] {
        &self.over
    }

    pub fn insert(&mut self, code: QfCode) {
        self.accepted.insert(code);
    }

    pub fn contains(&self, code: &str) -> bool {
        self.accepted.contains(code)
    }

    pub fn accepted(&self) -> impl Iterator<Item = &QfCode> {
        self.accepted.iter()
    }

    pub fn accepted_set(&self) -> &BTreeSet<QfCode> {
        &self.accepted
    }

    /// Whether the relation holds between two concrete tuples in `model`.
    pub fn relates(
        &self,
        model: &IndexModel,
        left: &[VertexId],
        right: &[VertexId],
    ) -> Result<bool, StructureError> {
        let concat: Vec<VertexId> = left.iter().chain(right.iter()).copied().collect();
        Ok(self
            .accepted
            .contains(&qf_type_of(model, &concat, &self.over)?.code()))
    }
}

/// Two equivalence relations on the realizations of a type, matched by a
/// fixed-point-free partial class function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleWitness {
    pub i0: Vec<VertexId>,
    pub t_tuple: Vec<VertexId>,
    pub e1: InvariantRelation,
    pub e2: InvariantRelation,
    pub f: InvariantRelation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationRole {
    E1,
    E2,
    F,
}

/// A named defect found while checking a witness; each carries the concrete
/// tuples that exhibit it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CircleViolation {
    InsufficientRealizations {
        found: usize,
    },
    ArityMismatch {
        relation: RelationRole,
    },
    NotReflexive {
        relation: RelationRole,
        tuple: Vec<VertexId>,
    },
    NotSymmetric {
        relation: RelationRole,
        left: Vec<VertexId>,
        right: Vec<VertexId>,
    },
    NotTransitive {
        relation: RelationRole,
        a: Vec<VertexId>,
        b: Vec<VertexId>,
        c: Vec<VertexId>,
    },
    NotWellDefined {
        left_a: Vec<VertexId>,
        image_a: Vec<VertexId>,
        left_b: Vec<VertexId>,
        image_b: Vec<VertexId>,
    },
    NotInjective {
        left_a: Vec<VertexId>,
        image_a: Vec<VertexId>,
        left_b: Vec<VertexId>,
        image_b: Vec<VertexId>,
    },
    EmptyFunction,
    FixedPoint {
        tuple: Vec<VertexId>,
    },
}

/// Check a witness against the realizations of its type in `model` and list
/// every defect found.  An empty list means the witness is valid there.
pub fn check_circle_witness(
    witness: &CircleWitness,
    model: &IndexModel,
) -> Result<Vec<CircleViolation>, CircleError> {
    let r = qf_type_of(model, &witness.t_tuple, &witness.i0)?;
    let y = enumerate_realizations(model, &r, &witness.i0)?;
    let mut violations = Vec::new();
    if y.len() < 2 {
        violations.push(CircleViolation::InsufficientRealizations { found: y.len() });
        return Ok(violations);
    }
    let len = witness.t_tuple.len();
    for (rel, role) in [
        (&witness.e1, RelationRole::E1),
        (&witness.e2, RelationRole::E2),
        (&witness.f, RelationRole::F),
    ] {
        if rel.arity_left() != len || rel.arity_right() != len {
            violations.push(CircleViolation::ArityMismatch { relation: role });
        }
    }
    if !violations.is_empty() {
        return Ok(violations);
    }

    let mut holds: BTreeMap<RelationRole, Vec<Vec<bool>>> = BTreeMap::new();
    for (rel, role) in [
        (&witness.e1, RelationRole::E1),
        (&witness.e2, RelationRole::E2),
        (&witness.f, RelationRole::F),
    ] {
        let mut matrix = vec![vec![false; y.len()]; y.len()];
        for (a, left) in y.iter().enumerate() {
            for (b, right) in y.iter().enumerate() {
                matrix[a][b] = rel.relates(model, left, right)?;
            }
        }
        holds.insert(role, matrix);
    }

    for role in [RelationRole::E1, RelationRole::E2] {
        let matrix = &holds[&role];
        for (a, tuple) in y.iter().enumerate() {
            if !matrix[a][a] {
                violations.push(CircleViolation::NotReflexive {
                    relation: role,
                    tuple: tuple.clone(),
                });
            }
        }
        for a in 0..y.len() {
            for b in 0..y.len() {
                if matrix[a][b] && !matrix[b][a] {
                    violations.push(CircleViolation::NotSymmetric {
                        relation: role,
                        left: y[a].clone(),
                        right: y[b].clone(),
                    });
                }
            }
        }
        for a in 0..y.len() {
            for b in 0..y.len() {
                if !matrix[a][b] {
                    continue;
                }
                for c in 0..y.len() {
                    if matrix[b][c] && !matrix[a][c] {
                        violations.push(CircleViolation::NotTransitive {
                            relation: role,
                            a: y[a].clone(),
                            b: y[b].clone(),
                            c: y[c].clone(),
                        });
                    }
                }
            }
        }
    }

    let f = &holds[&RelationRole::F];
    let e1 = &holds[&RelationRole::E1];
    let e2 = &holds[&RelationRole::E2];
    let f_pairs: Vec<(usize, usize)> = (0..y.len())
        .flat_map(|a| (0..y.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| f[a][b])
        .collect();
    if f_pairs.is_empty() {
        violations.push(CircleViolation::EmptyFunction);
    }
    for (a, tuple) in y.iter().enumerate() {
        if f[a][a] {
            violations.push(CircleViolation::FixedPoint {
                tuple: tuple.clone(),
            });
        }
    }
    for &(a, b) in &f_pairs {
        for &(c, d) in &f_pairs {
            if e1[a][c] && !e2[b][d] {
                violations.push(CircleViolation::NotWellDefined {
                    left_a: y[a].clone(),
                    image_a: y[b].clone(),
                    left_b: y[c].clone(),
                    image_b: y[d].clone(),
                });
            }
            if e2[b][d] && !e1[a][c] {
                violations.push(CircleViolation::NotInjective {
                    left_a: y[a].clone(),
                    image_a: y[b].clone(),
                    left_b: y[c].clone(),
                    image_b: y[d].clone(),
                });
            }
        }
    }
    Ok(violations)
}

/// How many `E1`-classes meet the enumerated realizations, how many of those
/// carry an image under `F`, and how many `E2`-classes are hit.  Injectivity
/// makes the partial function a bijection onto its image, so `with_image`
/// always equals `image_classes`; totality needs a saturated model and can
/// fail at the boundary of a finite one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FClassCoverage {
    pub domain_classes: usize,
    pub with_image: usize,
    pub image_classes: usize,
}

pub fn f_class_coverage(
    witness: &CircleWitness,
    model: &IndexModel,
) -> Result<FClassCoverage, CircleError> {
    let r = qf_type_of(model, &witness.t_tuple, &witness.i0)?;
    let y = enumerate_realizations(model, &r, &witness.i0)?;
    let class_of = |rel: &InvariantRelation, a: usize| -> Result<usize, CircleError> {
        for b in 0..=a {
            if rel.relates(model, &y[b], &y[a])? {
                return Ok(b);
            }
        }
        Ok(a)
    };
    let mut domain: BTreeSet<usize> = BTreeSet::new();
    let mut with_image: BTreeSet<usize> = BTreeSet::new();
    let mut image: BTreeSet<usize> = BTreeSet::new();
    for a in 0..y.len() {
        domain.insert(class_of(&witness.e1, a)?);
        for b in 0..y.len() {
            if witness.f.relates(model, &y[a], &y[b])? {
                with_image.insert(class_of(&witness.e1, a)?);
                image.insert(class_of(&witness.e2, b)?);
            }
        }
    }
    Ok(FClassCoverage {
        domain_classes: domain.len(),
        with_image: with_image.len(),
        image_classes: image.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    /// Longest tuple tried for the type whose realizations carry the witness.
    pub tuple_len: usize,
    /// Most base vertices used as parameters.
    pub max_params: usize,
    /// Largest working model built by duplication before enumerating.
    pub max_model: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleSearchOutcome {
    pub witness: Option<CircleWitness>,
    pub bounds: SearchBounds,
}

/// Extend the base model so realizations come in pairs: each original vertex
/// gains one twin just above it, stopping at `max_model` vertices.
pub fn duplicate_realizations(
    base: &IndexModel,
    max_model: usize,
) -> Result<IndexModel, StructureError> {
    let mut model = base.clone();
    for v in base.vertices_by_coord() {
        if model.vertex_count() >= max_model {
            break;
        }
        let coords: Vec<_> = model
            .vertices_by_coord()
            .iter()
            .map(|&w| model.coord(w).unwrap().clone())
            .collect();
        let here = model.coord(v)?.clone();
        let above = coords.iter().find(|c| **c > here);
        let coord = match above {
            Some(next) => Coord::midpoint(&here, next),
            None => Coord::succ(&here),
        };
        let id = model.fresh_vertex_id();
        let pred = model.pred(v)?.clone();
        model.insert_vertex(id, coord, pred);
    }
    let report = model.validate();
    debug_assert!(report.is_ok(), "duplication broke the model: {report:?}");
    Ok(model)
}

/// Search the coordinate-equality fragment for a witness: candidate relations
/// are conjunctions of position equalities between the two tuples, tried
/// smallest-first with the empty (total) conjunction last, over every
/// parameter choice and tuple within the bounds.  Deterministic; returns the
/// first witness that passes the full check, or none within the bounds.
pub fn search_circle_witness(
    class: ClassDescriptor,
    base: &IndexModel,
    bounds: SearchBounds,
) -> Result<CircleSearchOutcome, CircleError> {
    if base.class() != class {
        return Err(CircleError::ClassMismatch {
            expected: class,
            got: base.class(),
        });
    }
    let model = duplicate_realizations(base, bounds.max_model)?;
    let base_vertices = base.vertices_by_coord();
    for tuple_len in 1..=bounds.tuple_len {
        for params_len in 0..=bounds.max_params.min(base_vertices.len()) {
            for params in combinations(&base_vertices, params_len) {
                let pool: Vec<VertexId> = base_vertices
                    .iter()
                    .copied()
                    .filter(|v| !params.contains(v))
                    .collect();
                for t_tuple in combinations(&pool, tuple_len) {
                    if let Some(witness) =
                        search_over_type(&model, &params, &t_tuple, tuple_len)?
                    {
                        return Ok(CircleSearchOutcome {
                            witness: Some(witness),
                            bounds,
                        });
                    }
                }
            }
        }
    }
    Ok(CircleSearchOutcome {
        witness: None,
        bounds,
    })
}

fn combinations(pool: &[VertexId], len: usize) -> Vec<Vec<VertexId>> {
    use itertools::Itertools;
    pool.iter().copied().combinations(len).collect()
}

fn search_over_type(
    model: &IndexModel,
    params: &[VertexId],
    t_tuple: &[VertexId],
    tuple_len: usize,
) -> Result<Option<CircleWitness>, CircleError> {
    let r = qf_type_of(model, t_tuple, params)?;
    let y = enumerate_realizations(model, &r, params)?;
    if y.len() < 2 {
        return Ok(None);
    }

    let atoms: Vec<(usize, usize)> = (0..tuple_len)
        .flat_map(|i| (0..tuple_len).map(move |j| (i, j)))
        .collect();
    let mut atom_holds: Vec<Vec<Vec<bool>>> = Vec::with_capacity(atoms.len());
    for &(i, j) in &atoms {
        let mut matrix = vec![vec![false; y.len()]; y.len()];
        for (a, left) in y.iter().enumerate() {
            for (b, right) in y.iter().enumerate() {
                matrix[a][b] = left[i] == right[j];
            }
        }
        atom_holds.push(matrix);
    }
    let candidates = atom_subsets(atoms.len());
    let satisfied = |subset: &[usize], a: usize, b: usize| -> bool {
        subset.iter().all(|&atom| atom_holds[atom][a][b])
    };

    let mut equivalences: Vec<&Vec<usize>> = Vec::new();
    'candidate: for subset in &candidates {
        for a in 0..y.len() {
            if !satisfied(subset, a, a) {
                continue 'candidate;
            }
        }
        for a in 0..y.len() {
            for b in 0..y.len() {
                if satisfied(subset, a, b) != satisfied(subset, b, a) {
                    continue 'candidate;
                }
            }
        }
        for a in 0..y.len() {
            for b in 0..y.len() {
                if !satisfied(subset, a, b) {
                    continue;
                }
                for c in 0..y.len() {
                    if satisfied(subset, b, c) && !satisfied(subset, a, c) {
                        continue 'candidate;
                    }
                }
            }
        }
        equivalences.push(subset);
    }

    let mut functions: Vec<(&Vec<usize>, Vec<(usize, usize)>)> = Vec::new();
    'function: for subset in &candidates {
        let mut pairs = Vec::new();
        for a in 0..y.len() {
            if satisfied(subset, a, a) {
                continue 'function;
            }
        }
        for a in 0..y.len() {
            for b in 0..y.len() {
                if satisfied(subset, a, b) {
                    pairs.push((a, b));
                }
            }
        }
        if !pairs.is_empty() {
            functions.push((subset, pairs));
        }
    }

    for e1 in &equivalences {
        for e2 in &equivalences {
            'f: for (f, pairs) in &functions {
                for &(a, b) in pairs {
                    for &(c, d) in pairs {
                        if satisfied(e1, a, c) != satisfied(e2, b, d) {
                            continue 'f;
                        }
                    }
                }
                let witness = CircleWitness {
                    i0: params.to_vec(),
                    t_tuple: t_tuple.to_vec(),
                    e1: relation_from_subset(model, &y, params, tuple_len, &atoms, e1)?,
                    e2: relation_from_subset(model, &y, params, tuple_len, &atoms, e2)?,
                    f: relation_from_subset(model, &y, params, tuple_len, &atoms, f)?,
                };
                if check_circle_witness(&witness, model)?.is_empty() {
                    return Ok(Some(witness));
                }
            }
        }
    }
    Ok(None)
}

/// Nonempty atom subsets ordered by size then lexicographically, with the
/// empty conjunction (the total relation) last.
fn atom_subsets(atom_count: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for size in 1..=atom_count {
        subsets.extend((0..atom_count).combinations(size));
    }
    subsets.push(Vec::new());
    subsets
}

fn relation_from_subset(
    model: &IndexModel,
    y: &[Vec<VertexId>],
    params: &[VertexId],
    tuple_len: usize,
    atoms: &[(usize, usize)],
    subset: &[usize],
) -> Result<InvariantRelation, CircleError> {
    let chosen: BTreeSet<(usize, usize)> = subset.iter().map(|&a| atoms[a]).collect();
    Ok(InvariantRelation::from_coordinate_atoms(
        model, y, params, tuple_len, &chosen,
    )?)
}

/// Convert a valid witness into a width-two collision instance over the
/// random graph: positions collide within the first position by `E1`, within
/// the second by `E2`, and across by `F`, so the formula asserting an edge to
/// the first and a non-edge to the second shears.
pub fn circle_to_shearing(
    witness: &CircleWitness,
    model: &IndexModel,
) -> Result<ShearingInstance, CircleError> {
    let violations = check_circle_witness(witness, model)?;
    if !violations.is_empty() {
        return Err(CircleError::InvalidWitness(violations));
    }
    let r = qf_type_of(model, &witness.t_tuple, &witness.i0)?;
    let y = enumerate_realizations(model, &r, &witness.i0)?;
    let mut mirror: BTreeSet<QfCode> = BTreeSet::new();
    for left in &y {
        for right in &y {
            if witness.f.relates(model, left, right)? {
                let reversed: Vec<VertexId> =
                    right.iter().chain(left.iter()).copied().collect();
                mirror.insert(qf_type_of(model, &reversed, &witness.i0)?.code());
            }
        }
    }
    let mut collisions: BTreeMap<(usize, usize), BTreeSet<QfCode>> = BTreeMap::new();
    collisions.insert((0, 0), witness.e1.accepted_set().clone());
    collisions.insert((1, 1), witness.e2.accepted_set().clone());
    collisions.insert((0, 1), witness.f.accepted_set().clone());
    collisions.insert((1, 0), mirror);
    let labeling = Labeling::Collision {
        width: 2,
        collisions,
        edge_rules: BTreeMap::new(),
    };
    check_labeling_coherence(&labeling, model, &witness.i0, &r)?;
    let mut formula = FormulaPattern::new(2);
    formula.add_positive([0]).add_negative([1]);
    Ok(ShearingInstance::new(
        model.clone(),
        witness.i0.clone(),
        witness.t_tuple.clone(),
        TheoryDescriptor::RandomGraph,
        labeling,
        formula,
    )?)
}

/// Whether every realization's formula is jointly inconsistent with some
/// other single realization's formula, allowing up to `budget` fresh points:
/// realizations at the edge of a finite model only meet their partners after
/// the model grows a little, so each round adds one twin above every current
/// vertex plus one point below the minimum and retries.
pub fn strong_pairwise_inconsistency(
    inst: &ShearingInstance,
    model: &IndexModel,
    budget: usize,
) -> Result<bool, ShearingError> {
    let originals = instantiate_family(inst, model)?.realizations;
    let mut working = model.clone();
    let mut fresh = 0usize;
    loop {
        let family = instantiate_family(inst, &working)?;
        let mut unpartnered = false;
        'original: for tuple in &originals {
            let a = family
                .realizations
                .iter()
                .position(|candidate| candidate == tuple)
                .expect("extensions keep every original realization");
            for (b, right) in family.diagrams.iter().enumerate() {
                if a != b
                    && !Diagram::union(&[&family.diagrams[a], right])?
                        .consistent()
                        .is_consistent()
                {
                    continue 'original;
                }
            }
            unpartnered = true;
            break;
        }
        if !unpartnered {
            return Ok(true);
        }
        if fresh >= budget {
            return Ok(false);
        }
        let added = margin_pass(&mut working, budget - fresh)?;
        if added == 0 {
            return Ok(false);
        }
        fresh += added;
    }
}

/// Add one twin just above every current vertex and one point below the
/// minimum, stopping after `cap` fresh vertices.  Returns how many were
/// added.
fn margin_pass(model: &mut IndexModel, cap: usize) -> Result<usize, StructureError> {
    let mut added = 0usize;
    let originals = model.vertices_by_coord();
    if let Some(&lowest) = originals.first() {
        if added < cap {
            let coord = Coord::pred(model.coord(lowest)?);
            let pred = model.pred(lowest)?.clone();
            let id = model.fresh_vertex_id();
            model.insert_vertex(id, coord, pred);
            added += 1;
        }
    }
    for v in originals {
        if added >= cap {
            break;
        }
        let here = model.coord(v)?.clone();
        let coords: Vec<_> = model
            .vertices_by_coord()
            .iter()
            .map(|&w| model.coord(w).unwrap().clone())
            .collect();
        let coord = match coords.iter().find(|c| **c > here) {
            Some(next) => Coord::midpoint(&here, next),
            None => Coord::succ(&here),
        };
        let pred = model.pred(v)?.clone();
        let id = model.fresh_vertex_id();
        model.insert_vertex(id, coord, pred);
        added += 1;
    }
    let report = model.validate();
    debug_assert!(report.is_ok(), "margin pass broke the model: {report:?}");
    Ok(added)
}

/// Convert a random-graph shearing witness back: the first positive/negative
/// collision yields `E1` (parameters at the positive position agree), `E2`
/// (at the negative position), and `F` (across).
pub fn shearing_to_circle(
    inst: &ShearingInstance,
    model: &IndexModel,
) -> Result<CircleWitness, CircleError> {
    if inst.theory() != TheoryDescriptor::RandomGraph {
        return Err(CircleError::TheoryMismatch(inst.theory()));
    }
    let family = instantiate_family(inst, model)?;
    if !family.diagrams[family.t_index].consistent().is_consistent() {
        return Err(CircleError::NoShearing(
            "the distinguished formula is already inconsistent on its own".into(),
        ));
    }
    let all: Vec<&Diagram> = family.diagrams.iter().collect();
    if Diagram::union(&all)
        .map_err(ShearingError::from)?
        .consistent()
        .is_consistent()
    {
        return Err(CircleError::NoShearing("the family is consistent".into()));
    }
    let site: CollisionSite =
        find_pos_neg_collision(inst, model)?.ok_or(CircleError::NoCollision)?;

    let len = inst.t_tuple().len();
    let mut e1 = InvariantRelation::new(len, len, inst.i0().to_vec());
    let mut e2 = InvariantRelation::new(len, len, inst.i0().to_vec());
    let mut f = InvariantRelation::new(len, len, inst.i0().to_vec());
    for left in &family.realizations {
        for right in &family.realizations {
            let concat: Vec<VertexId> = left.iter().chain(right.iter()).copied().collect();
            let code = qf_type_of(model, &concat, inst.i0())?.code();
            if crate::shearing::collides(inst, model, left, right, site.pos, site.pos)? {
                e1.insert(code.clone());
            }
            if crate::shearing::collides(inst, model, left, right, site.neg, site.neg)? {
                e2.insert(code.clone());
            }
            if crate::shearing::collides(inst, model, left, right, site.pos, site.neg)? {
                f.insert(code.clone());
            }
        }
    }
    let witness = CircleWitness {
        i0: inst.i0().to_vec(),
        t_tuple: inst.t_tuple().to_vec(),
        e1,
        e2,
        f,
    };
    let violations = check_circle_witness(&witness, model)?;
    if !violations.is_empty() {
        return Err(CircleError::InvalidWitness(violations));
    }
    Ok(witness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shearing::{build_demo_instance, check_shearing, DemoKind};

    fn dense_order(points: u32) -> IndexModel {
        IndexModel::integer_cut(ClassDescriptor::LinearOrders, points)
    }

    fn labelled_order(points: u32) -> IndexModel {
        IndexModel::integer_cut(ClassDescriptor::LinearOrdersWithPredicates, points)
    }

    fn bounds(tuple_len: usize, max_params: usize, max_model: usize) -> SearchBounds {
        SearchBounds {
            tuple_len,
            max_params,
            max_model,
        }
    }

    #[test]
    fn pair_coordinates_witness_the_dense_order() {
        let base = dense_order(4);
        let outcome =
            search_circle_witness(ClassDescriptor::LinearOrders, &base, bounds(2, 2, 8))
                .unwrap();
        let witness = outcome.witness.expect("dense orders carry a witness");
        assert!(witness.i0.is_empty());
        assert_eq!(witness.t_tuple.len(), 2);

        let model = duplicate_realizations(&base, 8).unwrap();
        assert!(check_circle_witness(&witness, &model).unwrap().is_empty());

        let r = qf_type_of(&model, &witness.t_tuple, &[]).unwrap();
        let y = enumerate_realizations(&model, &r, &[]).unwrap();
        for left in &y {
            for right in &y {
                assert_eq!(
                    witness.e1.relates(&model, left, right).unwrap(),
                    left[0] == right[0]
                );
                assert_eq!(
                    witness.e2.relates(&model, left, right).unwrap(),
                    left[1] == right[1]
                );
                assert_eq!(
                    witness.f.relates(&model, left, right).unwrap(),
                    left[0] == right[1]
                );
            }
        }
    }

    #[test]
    fn singleton_labels_admit_no_witness_in_the_fragment() {
        let base = labelled_order(4);
        let outcome = search_circle_witness(
            ClassDescriptor::LinearOrdersWithPredicates,
            &base,
            bounds(2, 2, 8),
        )
        .unwrap();
        assert!(outcome.witness.is_none());
        assert_eq!(outcome.bounds, bounds(2, 2, 8));
    }

    #[test]
    fn single_points_admit_no_witness() {
        let outcome =
            search_circle_witness(ClassDescriptor::LinearOrders, &dense_order(4), bounds(1, 2, 8))
                .unwrap();
        assert!(outcome.witness.is_none());
    }

    #[test]
    fn witness_converts_to_a_shearing_instance_and_back() {
        let base = dense_order(4);
        let outcome =
            search_circle_witness(ClassDescriptor::LinearOrders, &base, bounds(2, 2, 8))
                .unwrap();
        let witness = outcome.witness.unwrap();
        let model = duplicate_realizations(&base, 8).unwrap();

        let inst = circle_to_shearing(&witness, &model).unwrap();
        let (report, working) = check_shearing(&inst, 0).unwrap();
        assert!(report.is_valid_witness());
        assert!(report
            .witness_subfamily
            .iter()
            .all(|subfamily| subfamily.len() == 2));
        assert!(strong_pairwise_inconsistency(&inst, &working, 2 * working.vertex_count()).unwrap());

        let recovered = shearing_to_circle(&inst, &model).unwrap();
        assert!(check_circle_witness(&recovered, &model).unwrap().is_empty());
        assert_eq!(recovered.e1.accepted_set(), witness.e1.accepted_set());
        assert_eq!(recovered.e2.accepted_set(), witness.e2.accepted_set());
        assert_eq!(recovered.f.accepted_set(), witness.f.accepted_set());
    }

    #[test]
    fn projection_witness_round_trips_through_a_circle() {
        let demo = build_demo_instance(DemoKind::RgLinear).unwrap();
        let model = demo.instance.base().clone();
        let witness = shearing_to_circle(&demo.instance, &model).unwrap();
        assert!(check_circle_witness(&witness, &model).unwrap().is_empty());

        let r = qf_type_of(&model, witness.t_tuple.as_slice(), &[]).unwrap();
        let y = enumerate_realizations(&model, &r, &[]).unwrap();
        for left in &y {
            for right in &y {
                assert_eq!(
                    witness.f.relates(&model, left, right).unwrap(),
                    left[0] == right[1]
                );
            }
        }

        let inst = circle_to_shearing(&witness, &model).unwrap();
        let (report, _) = check_shearing(&inst, 0).unwrap();
        assert!(report.is_valid_witness());
        let again = shearing_to_circle(&inst, &model).unwrap();
        assert_eq!(again.f.accepted_set(), witness.f.accepted_set());
    }

    #[test]
    fn two_realizations_matched_crosswise_shear() {
        let model = dense_order(2);
        let vs = model.vertices_by_coord();
        let code = |tuple: &[VertexId]| qf_type_of(&model, tuple, &[]).unwrap().code();
        let mut e1 = InvariantRelation::new(1, 1, Vec::new());
        e1.insert(code(&[vs[0], vs[0]]));
        let e2 = e1.clone();
        let mut f = InvariantRelation::new(1, 1, Vec::new());
        f.insert(code(&[vs[0], vs[1]]));
        f.insert(code(&[vs[1], vs[0]]));
        let witness = CircleWitness {
            i0: Vec::new(),
            t_tuple: vec![vs[0]],
            e1,
            e2,
            f,
        };
        assert!(check_circle_witness(&witness, &model).unwrap().is_empty());

        let inst = circle_to_shearing(&witness, &model).unwrap();
        let (report, working) = check_shearing(&inst, 0).unwrap();
        assert!(report.single_consistent);
        assert!(report.family_inconsistent);
        assert_eq!(report.realization_count, 2);
        assert_eq!(report.witness_subfamily, vec![vec![0, 1]]);
        assert!(strong_pairwise_inconsistency(&inst, &working, 0).unwrap());
    }

    #[test]
    fn violations_name_their_witnesses() {
        let model = dense_order(3);
        let vs = model.vertices_by_coord();
        let code = |tuple: &[VertexId]| qf_type_of(&model, tuple, &[]).unwrap().code();

        let diagonal = {
            let mut rel = InvariantRelation::new(1, 1, Vec::new());
            rel.insert(code(&[vs[0], vs[0]]));
            rel
        };
        let mut skewed = InvariantRelation::new(1, 1, Vec::new());
        skewed.insert(code(&[vs[0], vs[1]]));
        let witness = CircleWitness {
            i0: Vec::new(),
            t_tuple: vec![vs[0]],
            e1: skewed.clone(),
            e2: diagonal.clone(),
            f: diagonal.clone(),
        };
        let violations = check_circle_witness(&witness, &model).unwrap();
        assert!(violations.iter().any(|v| matches!(
            v,
            CircleViolation::NotReflexive {
                relation: RelationRole::E1,
                ..
            }
        )));
        assert!(violations.iter().any(|v| matches!(
            v,
            CircleViolation::NotSymmetric {
                relation: RelationRole::E1,
                ..
            }
        )));
        assert!(violations
            .iter()
            .any(|v| matches!(v, CircleViolation::FixedPoint { tuple } if tuple == &vec![vs[0]])));

        let empty = CircleWitness {
            i0: Vec::new(),
            t_tuple: vec![vs[0]],
            e1: diagonal.clone(),
            e2: diagonal.clone(),
            f: InvariantRelation::new(1, 1, Vec::new()),
        };
        let violations = check_circle_witness(&empty, &model).unwrap();
        assert_eq!(violations, vec![CircleViolation::EmptyFunction]);
    }

    #[test]
    fn lone_realizations_are_reported() {
        let model = labelled_order(3);
        let vs = model.vertices_by_coord();
        let witness = CircleWitness {
            i0: Vec::new(),
            t_tuple: vec![vs[0]],
            e1: InvariantRelation::new(1, 1, Vec::new()),
            e2: InvariantRelation::new(1, 1, Vec::new()),
            f: InvariantRelation::new(1, 1, Vec::new()),
        };
        let violations = check_circle_witness(&witness, &model).unwrap();
        assert_eq!(
            violations,
            vec![CircleViolation::InsufficientRealizations { found: 1 }]
        );
    }

    #[test]
    fn fixed_point_checks_cover_every_diagonal_code() {
        let model = labelled_order(2);
        let doubled = duplicate_realizations(&model, 4).unwrap();
        let vs = doubled.vertices_by_coord();
        let code = |tuple: &[VertexId]| qf_type_of(&doubled, tuple, &[]).unwrap().code();

        let mut e = InvariantRelation::new(1, 1, Vec::new());
        for &v in &vs {
            e.insert(code(&[v, v]));
        }
        let mut f = InvariantRelation::new(1, 1, Vec::new());
        f.insert(code(&[vs[0], vs[0]]));
        let witness = CircleWitness {
            i0: Vec::new(),
            t_tuple: vec![vs[0]],
            e1: e.clone(),
            e2: e,
            f,
        };
        let violations = check_circle_witness(&witness, &doubled).unwrap();
        let fixed: Vec<_> = violations
            .iter()
            .filter(|v| matches!(v, CircleViolation::FixedPoint { .. }))
            .collect();
        assert!(!fixed.is_empty());
        assert!(fixed.len() < vs.len());
    }

    #[test]
    fn partial_function_is_a_bijection_onto_its_image() {
        let base = dense_order(4);
        let model = duplicate_realizations(&base, 8).unwrap();
        let witness =
            search_circle_witness(ClassDescriptor::LinearOrders, &base, bounds(2, 2, 8))
                .unwrap()
                .witness
                .unwrap();
        let coverage = f_class_coverage(&witness, &model).unwrap();
        assert_eq!(coverage.with_image, coverage.image_classes);
        assert!(coverage.with_image >= 1);
        assert!(coverage.with_image <= coverage.domain_classes);
    }

    #[test]
    fn hypergraph_instances_do_not_convert() {
        let demo = build_demo_instance(DemoKind::T32).unwrap();
        let err = shearing_to_circle(&demo.instance, demo.instance.base()).unwrap_err();
        assert!(matches!(err, CircleError::TheoryMismatch(_)));
    }

    #[test]
    fn witness_serde_round_trip() {
        let base = dense_order(4);
        let witness =
            search_circle_witness(ClassDescriptor::LinearOrders, &base, bounds(2, 2, 8))
                .unwrap()
                .witness
                .unwrap();
        let json = serde_json::to_string(&witness).unwrap();
        let back: CircleWitness = serde_json::from_str(&json).unwrap();
        assert_eq!(back, witness);
    }
}
