//! Shearing: families of formula instances indexed by the realizations of a
//! qf-type, individually consistent but jointly contradictory.
//!
//! A [`ShearingInstance`] packages an index model, a distinguished tuple with
//! its qf-type over a base enumeration, a theory, a formula sign pattern, and
//! a [`Labeling`] describing how realizations name parameter tuples in the
//! monster model. Indiscernibility is never materialized: the labeling's
//! qf-type-invariance carries all of it, so equalities and edges among
//! parameters are functions of concatenated-tuple codes alone.

mod chain;
mod demo;
mod self_collision;

pub use chain::{
    build_unsuperstable_chain, chain_union, verify_chain, Chain, ChainStep, ChainVerdict,
};
pub use demo::{build_demo_instance, DemoInstance, DemoKind};
pub(crate) use self_collision::collides;
pub use self_collision::{
    derive_self_collision, find_pos_neg_collision, find_pos_neg_collisions, CollisionSite,
    SelfCollision, TraceMove,
};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{
    minimal_inconsistent_subfamilies, Diagram, DiagramError, Node, ParamId, TheoryDescriptor,
    VarId,
};
use crate::rational::Coord;
use crate::structures::{
    enumerate_realizations, extend_realizing, qf_type_of, ClassDescriptor, IndexModel, QfCode,
    QfType, StructureError, VertexId,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ShearingError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("labeling is incoherent: {0}")]
    IncoherentLabeling(String),
    #[error("bad formula pattern: {0}")]
    BadFormula(String),
    #[error("bad instance: {0}")]
    BadInstance(String),
    #[error("extension budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("no qualifying collision: {0}")]
    MissingCollision(String),
}

/// Sign pattern of `phi(x, b)`: positive and negative edge atoms, each given
/// by the set of parameter positions joined with `x`, plus disequalities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaPattern {
    width: usize,
    positive: BTreeSet<BTreeSet<usize>>,
    negative: BTreeSet<BTreeSet<usize>>,
    disequal: BTreeSet<usize>,
}

impl FormulaPattern {
    pub fn new(width: usize) -> Self {
        FormulaPattern {
            width,
            positive: BTreeSet::new(),
            negative: BTreeSet::new(),
            disequal: BTreeSet::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn positive(&self) -> impl Iterator<Item = &BTreeSet<usize>> {
        self.positive.iter()
    }

    pub fn negative(&self) -> impl Iterator<Item = &BTreeSet<usize>> {
        self.negative.iter()
    }

    pub fn disequal(&self) -> impl Iterator<Item = usize> + '_ {
        self.disequal.iter().copied()
    }

    pub fn add_positive(&mut self, atom: impl IntoIterator<Item = usize>) -> &mut Self {
        self.positive.insert(atom.into_iter().collect());
        self
    }

    pub fn add_negative(&mut self, atom: impl IntoIterator<Item = usize>) -> &mut Self {
        self.negative.insert(atom.into_iter().collect());
        self
    }

    pub fn add_disequal(&mut self, position: usize) -> &mut Self {
        self.disequal.insert(position);
        self
    }

    fn validate(&self, theory: TheoryDescriptor) -> Result<(), ShearingError> {
        let want = theory.edge_arity() - 1;
        for atom in self.positive.iter().chain(self.negative.iter()) {
            if atom.len() != want {
                return Err(ShearingError::BadFormula(format!(
                    "atom {atom:?} joins {} positions with x, the theory needs {want}",
                    atom.len()
                )));
            }
            if atom.iter().any(|&p| p >= self.width) {
                return Err(ShearingError::BadFormula(format!(
                    "atom {atom:?} is out of range for width {}",
                    self.width
                )));
            }
        }
        if let Some(atom) = self.positive.intersection(&self.negative).next() {
            return Err(ShearingError::BadFormula(format!(
                "atom {atom:?} appears with both signs"
            )));
        }
        if self.disequal.iter().any(|&p| p >= self.width) {
            return Err(ShearingError::BadFormula(
                "disequality position out of range".into(),
            ));
        }
        Ok(())
    }
}

/// How realizations of the qf-type name parameter tuples.
///
/// `Projection` takes parameters straight from the skeleton: position `p` of
/// `b_t'` is the skeleton element of `t'[coord_map[p]]`, and when the theory
/// arity equals the class arity, edges among parameters are exactly the edges
/// of the index model. `Collision` uses abstract parameters with equalities
/// (and optionally edges) holding between `b_{t1,i}` and `b_{t2,j}` exactly
/// when the code of `t1 ++ t2` over the base lies in the given relation, so
/// both are invariants of qf-types by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Labeling {
    Projection {
        width: usize,
        coord_map: Vec<usize>,
    },
    Collision {
        width: usize,
        collisions: BTreeMap<(usize, usize), BTreeSet<QfCode>>,
        edge_rules: BTreeMap<(usize, usize), BTreeSet<QfCode>>,
    },
}

impl Labeling {
    pub fn identity_projection(width: usize) -> Self {
        Labeling::Projection {
            width,
            coord_map: (0..width).collect(),
        }
    }

    pub fn width(&self) -> usize {
        match self {
            Labeling::Projection { width, .. } | Labeling::Collision { width, .. } => *width,
        }
    }

    pub fn collision_codes(&self, i: usize, j: usize) -> Option<&BTreeSet<QfCode>> {
        match self {
            Labeling::Projection { .. } => None,
            Labeling::Collision { collisions, .. } => collisions.get(&(i, j)),
        }
    }

    pub fn has_collision(&self, i: usize, j: usize, code: &str) -> bool {
        self.collision_codes(i, j)
            .map_or(false, |set| set.contains(code))
    }
}

#[derive(Serialize, Deserialize)]
struct RelationJson {
    i: usize,
    j: usize,
    codes: Vec<QfCode>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum LabelingJson {
    Projection {
        width: usize,
        coord_map: Vec<usize>,
    },
    Collision {
        width: usize,
        collisions: Vec<RelationJson>,
        edge_rules: Vec<RelationJson>,
    },
}

fn relations_to_json(map: &BTreeMap<(usize, usize), BTreeSet<QfCode>>) -> Vec<RelationJson> {
    map.iter()
        .map(|(&(i, j), codes)| RelationJson {
            i,
            j,
            codes: codes.iter().cloned().collect(),
        })
        .collect()
}

fn relations_from_json(
    rels: Vec<RelationJson>,
) -> BTreeMap<(usize, usize), BTreeSet<QfCode>> {
    let mut map: BTreeMap<(usize, usize), BTreeSet<QfCode>> = BTreeMap::new();
    for rel in rels {
        map.entry((rel.i, rel.j))
            .or_default()
            .extend(rel.codes.into_iter());
    }
    map
}

impl Serialize for Labeling {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let json = match self {
            Labeling::Projection { width, coord_map } => LabelingJson::Projection {
                width: *width,
                coord_map: coord_map.clone(),
            },
            Labeling::Collision {
                width,
                collisions,
                edge_rules,
            } => LabelingJson::Collision {
                width: *width,
                collisions: relations_to_json(collisions),
                edge_rules: relations_to_json(edge_rules),
            },
        };
        json.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Labeling {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(match LabelingJson::deserialize(deserializer)? {
            LabelingJson::Projection { width, coord_map } => {
                Labeling::Projection { width, coord_map }
            }
            LabelingJson::Collision {
                width,
                collisions,
                edge_rules,
            } => Labeling::Collision {
                width,
                collisions: relations_from_json(collisions),
                edge_rules: relations_from_json(edge_rules),
            },
        })
    }
}

/// A candidate witness of shearing, ready to be checked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShearingInstance {
    class: ClassDescriptor,
    base: IndexModel,
    i0: Vec<VertexId>,
    t_tuple: Vec<VertexId>,
    r: QfType,
    theory: TheoryDescriptor,
    labeling: Labeling,
    formula: FormulaPattern,
}

impl ShearingInstance {
    pub fn new(
        base: IndexModel,
        i0: Vec<VertexId>,
        t_tuple: Vec<VertexId>,
        theory: TheoryDescriptor,
        labeling: Labeling,
        formula: FormulaPattern,
    ) -> Result<Self, ShearingError> {
        let class = base.class();
        formula.validate(theory)?;
        if labeling.width() != formula.width() {
            return Err(ShearingError::BadInstance(format!(
                "labeling width {} differs from formula width {}",
                labeling.width(),
                formula.width()
            )));
        }
        match &labeling {
            Labeling::Projection { width, coord_map } => {
                if coord_map.len() != *width {
                    return Err(ShearingError::BadInstance(
                        "projection coord_map length differs from width".into(),
                    ));
                }
                if coord_map.iter().any(|&c| c >= t_tuple.len()) {
                    return Err(ShearingError::BadInstance(
                        "projection coord_map points outside the tuple".into(),
                    ));
                }
            }
            Labeling::Collision { .. } => {
                if theory.edge_arity() != 2 {
                    return Err(ShearingError::BadInstance(
                        "collision labelings take abstract parameters and need a binary theory; \
                         hypergraph instances use projection labelings"
                            .into(),
                    ));
                }
            }
        }
        let r = qf_type_of(&base, &t_tuple, &i0)?;
        Ok(ShearingInstance {
            class,
            base,
            i0,
            t_tuple,
            r,
            theory,
            labeling,
            formula,
        })
    }

    pub fn class(&self) -> ClassDescriptor {
        self.class
    }

    pub fn base(&self) -> &IndexModel {
        &self.base
    }

    pub fn i0(&self) -> &[VertexId] {
        &self.i0
    }

    pub fn t_tuple(&self) -> &[VertexId] {
        &self.t_tuple
    }

    pub fn r(&self) -> &QfType {
        &self.r
    }

    pub fn theory(&self) -> TheoryDescriptor {
        self.theory
    }

    pub fn labeling(&self) -> &Labeling {
        &self.labeling
    }

    pub fn formula(&self) -> &FormulaPattern {
        &self.formula
    }
}

/// Where a parameter of an instantiated family came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamOrigin {
    SkeletonVertex(VertexId),
    AbstractClass { realization: usize, position: usize },
}

/// The family of diagrams over one shared parameter pool.
#[derive(Debug, Clone)]
pub struct FamilyInstantiation {
    pub realizations: Vec<Vec<VertexId>>,
    pub diagrams: Vec<Diagram>,
    pub t_index: usize,
    pub param_origins: BTreeMap<ParamId, ParamOrigin>,
}

/// Check that the labeling's equality specification really is an invariant
/// equivalence over the realizations of `r` in `J`: reflexive (the diagonal
/// code is accepted at every position), symmetric, and transitive over all
/// realized triples; edge rules must be symmetric and never join collided
/// positions.
pub fn check_labeling_coherence(
    labeling: &Labeling,
    j_model: &IndexModel,
    i0: &[VertexId],
    r: &QfType,
) -> Result<(), ShearingError> {
    if matches!(labeling, Labeling::Projection { .. }) {
        return Ok(());
    }
    let realizations = enumerate_realizations(j_model, r, i0)?;
    let codes = pair_code_matrix(j_model, &realizations, i0)?;
    coherence_over_matrix(labeling, &codes)
}

/// The m-by-m matrix of pair codes: entry `(a, b)` is the qf type of
/// realization `a` followed by realization `b` over the parameters.
pub(crate) fn pair_code_matrix(
    j_model: &IndexModel,
    realizations: &[Vec<VertexId>],
    i0: &[VertexId],
) -> Result<Vec<Vec<QfCode>>, StructureError> {
    let m = realizations.len();
    let mut codes = vec![vec![String::new(); m]; m];
    for a in 0..m {
        for b in 0..m {
            let concat: Vec<VertexId> = realizations[a]
                .iter()
                .chain(realizations[b].iter())
                .copied()
                .collect();
            codes[a][b] = qf_type_of(j_model, &concat, i0)?.code();
        }
    }
    Ok(codes)
}

/// [`check_labeling_coherence`] over an already-computed pair-code matrix.
pub(crate) fn coherence_over_matrix(
    labeling: &Labeling,
    codes: &[Vec<QfCode>],
) -> Result<(), ShearingError> {
    let (collisions, edge_rules, width) = match labeling {
        Labeling::Projection { .. } => return Ok(()),
        Labeling::Collision {
            width,
            collisions,
            edge_rules,
        } => (collisions, edge_rules, *width),
    };
    for &(i, j) in collisions.keys().chain(edge_rules.keys()) {
        if i >= width || j >= width {
            return Err(ShearingError::IncoherentLabeling(format!(
                "relation on positions ({i}, {j}) is out of range for width {width}"
            )));
        }
    }
    let holds = |map: &BTreeMap<(usize, usize), BTreeSet<QfCode>>,
                 i: usize,
                 j: usize,
                 code: &str| map.get(&(i, j)).map_or(false, |s| s.contains(code));

    let m = codes.len();
    for (a, row) in codes.iter().enumerate() {
        for i in 0..width {
            if !holds(collisions, i, i, &row[a]) {
                return Err(ShearingError::IncoherentLabeling(format!(
                    "reflexivity fails: position {i} does not accept the diagonal code"
                )));
            }
        }
        for (b, code_ab) in row.iter().enumerate() {
            for i in 0..width {
                for j in 0..width {
                    if holds(collisions, i, j, code_ab) != holds(collisions, j, i, &codes[b][a]) {
                        return Err(ShearingError::IncoherentLabeling(format!(
                            "symmetry fails between positions {i} and {j} at realizations \
                             {a} and {b}"
                        )));
                    }
                    if holds(edge_rules, i, j, code_ab) != holds(edge_rules, j, i, &codes[b][a]) {
                        return Err(ShearingError::IncoherentLabeling(format!(
                            "edge rule symmetry fails between positions {i} and {j} at \
                             realizations {a} and {b}"
                        )));
                    }
                    if holds(edge_rules, i, j, code_ab) && holds(collisions, i, j, code_ab) {
                        return Err(ShearingError::IncoherentLabeling(format!(
                            "edge rule joins collided positions {i} and {j} at realizations \
                             {a} and {b}"
                        )));
                    }
                }
            }
        }
    }
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for i in 0..width {
                    for j in 0..width {
                        if !holds(collisions, i, j, &codes[a][b]) {
                            continue;
                        }
                        for l in 0..width {
                            if holds(collisions, j, l, &codes[b][c])
                                && !holds(collisions, i, l, &codes[a][c])
                            {
                                return Err(ShearingError::IncoherentLabeling(format!(
                                    "transitivity fails at realizations ({a}, {b}, {c}), \
                                     positions ({i}, {j}, {l})"
                                )));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // Keep the least index as representative so parameter ids are stable.
        match ra.cmp(&rb) {
            std::cmp::Ordering::Less => self.parent[rb] = ra,
            std::cmp::Ordering::Greater => self.parent[ra] = rb,
            std::cmp::Ordering::Equal => {}
        }
    }
}

/// One diagram per realization of `inst.r` in `J`, over a single shared
/// parameter pool, so that unions of subfamilies can be fed to the oracle.
pub fn instantiate_family(
    inst: &ShearingInstance,
    j_model: &IndexModel,
) -> Result<FamilyInstantiation, ShearingError> {
    if j_model.class() != inst.class {
        return Err(ShearingError::Structure(StructureError::ClassMismatch(
            inst.class,
            j_model.class(),
        )));
    }
    let realizations = enumerate_realizations(j_model, &inst.r, &inst.i0)?;
    let codes = match &inst.labeling {
        Labeling::Projection { .. } => Vec::new(),
        Labeling::Collision { .. } => pair_code_matrix(j_model, &realizations, &inst.i0)?,
    };
    coherence_over_matrix(&inst.labeling, &codes)?;
    let ctx = FamilyContext::new(
        &inst.labeling,
        inst.theory,
        inst.class,
        j_model,
        &inst.t_tuple,
        realizations,
        &codes,
    )?;
    let diagrams = ctx.apply(&inst.formula)?;
    Ok(FamilyInstantiation {
        realizations: ctx.realizations,
        diagrams,
        t_index: ctx.t_index,
        param_origins: ctx.param_origins,
    })
}

/// The formula-independent half of a family instantiation: which parameter
/// every position of every realization maps to, and the edges the shared
/// pool carries. Splitting this out lets one pool serve many formulas
/// without recomputing the pair codes behind the collision classes.
pub(crate) struct FamilyContext {
    pub(crate) realizations: Vec<Vec<VertexId>>,
    pub(crate) t_index: usize,
    theory: TheoryDescriptor,
    param_of: Vec<Vec<ParamId>>,
    param_origins: BTreeMap<ParamId, ParamOrigin>,
    param_edges: BTreeSet<BTreeSet<ParamId>>,
}

impl FamilyContext {
    /// `codes` must be the pair-code matrix of `realizations`; it is ignored
    /// for projection labelings. Coherence is the caller's responsibility.
    pub(crate) fn new(
        labeling: &Labeling,
        theory: TheoryDescriptor,
        class: ClassDescriptor,
        j_model: &IndexModel,
        t_tuple: &[VertexId],
        realizations: Vec<Vec<VertexId>>,
        codes: &[Vec<QfCode>],
    ) -> Result<Self, ShearingError> {
        let t_index = realizations
            .iter()
            .position(|t| t == t_tuple)
            .ok_or_else(|| {
                ShearingError::BadInstance(
                    "the distinguished tuple does not realize its own type in the working model"
                        .into(),
                )
            })?;
        let width = labeling.width();

        let mut param_of: Vec<Vec<ParamId>> = Vec::with_capacity(realizations.len());
        let mut param_origins: BTreeMap<ParamId, ParamOrigin> = BTreeMap::new();
        let mut param_edges: BTreeSet<BTreeSet<ParamId>> = BTreeSet::new();

        match labeling {
            Labeling::Projection { coord_map, .. } => {
                let mut pool: BTreeSet<VertexId> = BTreeSet::new();
                for t in &realizations {
                    let ids: Vec<ParamId> = coord_map
                        .iter()
                        .map(|&c| {
                            let v = t[c];
                            pool.insert(v);
                            ParamId(v.0)
                        })
                        .collect();
                    param_of.push(ids);
                }
                for &v in &pool {
                    param_origins.insert(ParamId(v.0), ParamOrigin::SkeletonVertex(v));
                }
                if theory.edge_arity() == class.edge_arity().unwrap_or(0) {
                    for edge in j_model.edges() {
                        if edge.iter().all(|v| pool.contains(v)) {
                            param_edges.insert(edge.iter().map(|v| ParamId(v.0)).collect());
                        }
                    }
                }
            }
            Labeling::Collision {
                collisions,
                edge_rules,
                ..
            } => {
                let m = realizations.len();
                let mut uf = UnionFind::new(m * width);
                for a in 0..m {
                    for b in 0..m {
                        for (&(i, j), accepted) in collisions {
                            if accepted.contains(&codes[a][b]) {
                                uf.union(a * width + i, b * width + j);
                            }
                        }
                    }
                }
                for a in 0..realizations.len() {
                    let ids: Vec<ParamId> = (0..width)
                        .map(|p| ParamId(uf.find(a * width + p) as u32))
                        .collect();
                    param_of.push(ids);
                }
                for (a, ids) in param_of.iter().enumerate() {
                    for (p, id) in ids.iter().enumerate() {
                        param_origins
                            .entry(*id)
                            .or_insert(ParamOrigin::AbstractClass {
                                realization: a,
                                position: p,
                            });
                    }
                }
                for a in 0..m {
                    for b in 0..m {
                        for (&(i, j), accepted) in edge_rules {
                            if accepted.contains(&codes[a][b]) {
                                let (pa, pb) = (param_of[a][i], param_of[b][j]);
                                if pa == pb {
                                    return Err(ShearingError::IncoherentLabeling(format!(
                                        "edge rule joins collided positions ({i}, {j}) at \
                                         realizations {a} and {b}"
                                    )));
                                }
                                param_edges.insert([pa, pb].into_iter().collect());
                            }
                        }
                    }
                }
            }
        }

        Ok(FamilyContext {
            realizations,
            t_index,
            theory,
            param_of,
            param_origins,
            param_edges,
        })
    }

    pub(crate) fn apply(&self, formula: &FormulaPattern) -> Result<Vec<Diagram>, ShearingError> {
        let pool: BTreeSet<ParamId> = self.param_origins.keys().copied().collect();
        let var = VarId(0);
        let mut diagrams = Vec::with_capacity(self.param_of.len());
        for ids in &self.param_of {
            let mut d = Diagram::new(self.theory);
            for &p in &pool {
                d.add_param(p);
            }
            d.add_var(var);
            for edge in &self.param_edges {
                d.add_param_edge(edge.iter().copied())?;
            }
            for atom in formula.positive() {
                let args = atom_args(ids, atom, var);
                d.assert_edge(true, args)?;
            }
            for atom in formula.negative() {
                let args = atom_args(ids, atom, var);
                d.assert_edge(false, args)?;
            }
            for pos in formula.disequal() {
                d.assert_not_equal(var, Node::Param(ids[pos]))?;
            }
            diagrams.push(d);
        }
        Ok(diagrams)
    }
}

fn atom_args(ids: &[ParamId], atom: &BTreeSet<usize>, var: VarId) -> Vec<Node> {
    std::iter::once(Node::Var(var))
        .chain(atom.iter().map(|&p| Node::Param(ids[p])))
        .collect()
}

/// Outcome of [`check_shearing`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShearingReport {
    pub single_consistent: bool,
    pub family_inconsistent: bool,
    pub witness_subfamily: Vec<Vec<usize>>,
    pub realization_count: usize,
    pub extension_budget_used: usize,
    pub budget_exhausted: bool,
}

impl ShearingReport {
    pub fn is_valid_witness(&self) -> bool {
        self.single_consistent && self.family_inconsistent
    }
}

/// Grow the working model from `inst.base` one twin pass at a time, then
/// report single-formula consistency and family inconsistency with the
/// minimal witness subfamilies. Deterministic for a fixed budget; once a
/// witness is found the verdict is stable under larger budgets. Returns the
/// report together with the working model it settled on.
pub fn check_shearing(
    inst: &ShearingInstance,
    budget: usize,
) -> Result<(ShearingReport, IndexModel), ShearingError> {
    let mut j_model = inst.base.clone();
    let mut used = 0usize;
    let subfamily_cap = witness_cap(inst);
    let clique_passes = inst.class.edge_arity().is_some()
        && inst.theory.edge_arity() == inst.class.edge_arity().unwrap_or(0);
    let mut pass = 0usize;
    loop {
        let family = instantiate_family(inst, &j_model)?;
        let refs: Vec<&Diagram> = family.diagrams.iter().collect();
        let single_consistent = family.diagrams[family.t_index].consistent().is_consistent();
        let witness_subfamily =
            minimal_inconsistent_subfamilies(&refs, Some(subfamily_cap))?;
        let family_inconsistent = !witness_subfamily.is_empty();
        if family_inconsistent || used + inst.t_tuple.len() > budget {
            let report = ShearingReport {
                single_consistent,
                family_inconsistent,
                witness_subfamily,
                realization_count: family.realizations.len(),
                extension_budget_used: used,
                budget_exhausted: !family_inconsistent,
            };
            return Ok((report, j_model));
        }
        let with_edges = clique_passes && pass % 2 == 0;
        used += saturation_pass(&mut j_model, &inst.t_tuple, with_edges, inst.class)?;
        pass += 1;
    }
}

fn witness_cap(inst: &ShearingInstance) -> usize {
    let atom_bound = inst.formula.positive.len() + inst.formula.negative.len();
    let clique_bound = match (inst.class, inst.theory.clique_bound()) {
        (ClassDescriptor::Hypergraph { n, k }, Some(_)) => choose(n as usize, k as usize) + 1,
        _ => inst.theory.clique_bound().unwrap_or(0),
    };
    atom_bound.max(clique_bound).max(2)
}

fn choose(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut out = 1usize;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

/// Add one twin per original: same predicate, placed directly above, and —
/// when `with_edges` is set — joined to every k-subset of the earlier twins
/// of the same pass, so the pass closes an n-clique without ever touching the
/// originals.
fn saturation_pass(
    j_model: &mut IndexModel,
    originals: &[VertexId],
    with_edges: bool,
    class: ClassDescriptor,
) -> Result<usize, ShearingError> {
    let mut added: Vec<VertexId> = Vec::new();
    let k = class.edge_arity().map(|a| a - 1).unwrap_or(usize::MAX);
    for &orig in originals {
        let params = j_model.vertices_by_coord();
        let mut scratch = j_model.clone();
        let fresh = scratch.fresh_vertex_id();
        let above = just_above(&scratch, orig)?;
        scratch.insert_vertex(fresh, above, scratch.pred(orig)?.clone());
        if with_edges && added.len() >= k {
            for subset in itertools::Itertools::combinations(added.iter().copied(), k) {
                let mut edge: BTreeSet<VertexId> = subset.into_iter().collect();
                edge.insert(fresh);
                scratch.insert_edge(edge);
            }
        }
        let target = qf_type_of(&scratch, &[fresh], &params)?;
        let (next, tuple) = extend_realizing(j_model, &target, &params)?;
        *j_model = next;
        added.push(tuple[0]);
    }
    Ok(added.len())
}

fn just_above(model: &IndexModel, v: VertexId) -> Result<Coord, ShearingError> {
    let at = model.coord(v)?.clone();
    let next = model
        .vertices_by_coord()
        .into_iter()
        .map(|w| model.coord(w).unwrap().clone())
        .filter(|c| *c > at)
        .min();
    Ok(match next {
        Some(next) => Coord::midpoint(&at, &next),
        None => Coord::succ(&at),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Verdict;

    fn rg_pair_instance(points: u32) -> ShearingInstance {
        let base = IndexModel::integer_cut(ClassDescriptor::LinearOrders, points);
        let mut formula = FormulaPattern::new(2);
        formula.add_positive([0]).add_negative([1]);
        ShearingInstance::new(
            base,
            vec![],
            vec![VertexId(0), VertexId(1)],
            TheoryDescriptor::random_graph(),
            Labeling::identity_projection(2),
            formula,
        )
        .unwrap()
    }

    #[test]
    fn pair_family_over_a_dense_order_shears() {
        let inst = rg_pair_instance(4);
        let (report, j_model) = check_shearing(&inst, 8).unwrap();
        assert!(report.single_consistent);
        assert!(report.family_inconsistent);
        assert_eq!(report.realization_count, 6);
        assert_eq!(report.extension_budget_used, 0);
        assert!(!report.budget_exhausted);
        assert!(report.witness_subfamily.iter().all(|w| w.len() == 2));
        assert_eq!(j_model.vertex_count(), 4);
    }

    #[test]
    fn all_positive_pairs_do_not_shear_in_the_random_graph() {
        let base = IndexModel::integer_cut(ClassDescriptor::LinearOrders, 4);
        let mut formula = FormulaPattern::new(2);
        formula.add_positive([0]).add_positive([1]);
        let inst = ShearingInstance::new(
            base,
            vec![],
            vec![VertexId(0), VertexId(1)],
            TheoryDescriptor::random_graph(),
            Labeling::identity_projection(2),
            formula,
        )
        .unwrap();
        let (report, _) = check_shearing(&inst, 6).unwrap();
        assert!(report.single_consistent);
        assert!(!report.family_inconsistent);
        assert!(report.budget_exhausted);
    }

    #[test]
    fn budget_monotonicity_once_a_witness_exists() {
        let inst = rg_pair_instance(4);
        let (small, _) = check_shearing(&inst, 0).unwrap();
        let (large, _) = check_shearing(&inst, 12).unwrap();
        assert_eq!(small, large);
    }

    #[test]
    fn family_shares_one_parameter_pool() {
        let inst = rg_pair_instance(3);
        let family = instantiate_family(&inst, inst.base()).unwrap();
        assert_eq!(family.realizations.len(), 3);
        assert_eq!(family.t_index, 0);
        // Realizations (0,1) and (1,2) disagree on vertex 1: one asserts
        // R(x, a_1), the other denies it.
        let union =
            Diagram::union(&[&family.diagrams[0], &family.diagrams[2]]).unwrap();
        assert_eq!(
            union.consistent(),
            Verdict::SignConflict {
                atom: vec![Node::Param(ParamId(1)), Node::Var(VarId(0))]
            }
        );
    }

    #[test]
    fn coherence_rejects_an_asymmetric_collision() {
        let base = IndexModel::integer_cut(ClassDescriptor::LinearOrders, 3);
        let t = vec![VertexId(0), VertexId(1)];
        let r = qf_type_of(&base, &t, &[]).unwrap();
        let diag = qf_type_of(&base, &[t[0], t[1], t[0], t[1]], &[]).unwrap();
        let mut collisions: BTreeMap<(usize, usize), BTreeSet<QfCode>> = BTreeMap::new();
        collisions.insert((0, 0), [diag.code()].into_iter().collect());
        collisions.insert((1, 1), [diag.code()].into_iter().collect());
        // A pair code accepted at (0, 1) without its mirror at (1, 0).
        let ab = qf_type_of(
            &base,
            &[VertexId(0), VertexId(1), VertexId(1), VertexId(2)],
            &[],
        )
        .unwrap();
        collisions.insert((0, 1), [ab.code()].into_iter().collect());
        let labeling = Labeling::Collision {
            width: 2,
            collisions,
            edge_rules: BTreeMap::new(),
        };
        let err = check_labeling_coherence(&labeling, &base, &[], &r).unwrap_err();
        assert!(matches!(err, ShearingError::IncoherentLabeling(msg) if msg.contains("symmetry")));
    }

    #[test]
    fn formula_validation_catches_misuse() {
        let base = IndexModel::integer_cut(ClassDescriptor::LinearOrders, 2);
        let mut formula = FormulaPattern::new(2);
        formula.add_positive([0, 1]);
        let err = ShearingInstance::new(
            base.clone(),
            vec![],
            vec![VertexId(0), VertexId(1)],
            TheoryDescriptor::random_graph(),
            Labeling::identity_projection(2),
            formula,
        )
        .unwrap_err();
        assert!(matches!(err, ShearingError::BadFormula(_)));

        let mut formula = FormulaPattern::new(2);
        formula.add_positive([0]).add_negative([0]);
        let err = ShearingInstance::new(
            base,
            vec![],
            vec![VertexId(0), VertexId(1)],
            TheoryDescriptor::random_graph(),
            Labeling::identity_projection(2),
            formula,
        )
        .unwrap_err();
        assert!(matches!(err, ShearingError::BadFormula(msg) if msg.contains("both signs")));
    }

    #[test]
    fn labeling_serde_round_trip() {
        let mut collisions: BTreeMap<(usize, usize), BTreeSet<QfCode>> = BTreeMap::new();
        collisions.insert((0, 0), ["aa11".to_string()].into_iter().collect());
        let lab = Labeling::Collision {
            width: 2,
            collisions,
            edge_rules: BTreeMap::new(),
        };
        let json = serde_json::to_string(&lab).unwrap();
        let back: Labeling = serde_json::from_str(&json).unwrap();
        assert_eq!(back, lab);
        let proj = Labeling::identity_projection(3);
        let json = serde_json::to_string(&proj).unwrap();
        assert!(json.contains("\"kind\":\"projection\""));
        assert_eq!(serde_json::from_str::<Labeling>(&json).unwrap(), proj);
    }
}
