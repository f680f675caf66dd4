//! Exhaustive desk-scale sweeps.  The column sweep confirms that positive
//! within-column families over disjoint parameter columns stay consistent in
//! the 3-uniform clique-free theory for every clique-free parameter edge
//! pattern.  The labeling sweep runs every coherent collision labeling of a
//! bounded coordinate fragment over the clique-free index class against the
//! random graph and confirms that family inconsistency never outruns
//! single-formula inconsistency, re-deriving and replaying a self-collision
//! for every realized positive/negative collision.  The separation report
//! composes the two sides.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::oracle::{Diagram, DiagramError, Node, ParamId, TheoryDescriptor, VarId, Verdict};
use crate::shearing::{
    build_demo_instance, check_shearing, derive_self_collision, instantiate_family,
    pair_code_matrix, CollisionSite, DemoKind, FamilyContext, FormulaPattern, Labeling,
    SelfCollision, ShearingError, ShearingInstance, TraceMove,
};
use crate::rational::Coord;
use crate::structures::{
    enumerate_realizations, qf_type_of, ClassDescriptor, IndexModel, QfCode, StructureError,
    VertexId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSweepBounds {
    pub max_columns: usize,
    pub max_width: usize,
    /// Free variable plus parameters.
    pub max_vertices: usize,
}

impl Default for ColumnSweepBounds {
    fn default() -> Self {
        ColumnSweepBounds {
            max_columns: 4,
            max_width: 3,
            max_vertices: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnCounterexample {
    pub widths: Vec<usize>,
    pub param_edges: Vec<Vec<usize>>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSweepReport {
    pub bounds: ColumnSweepBounds,
    pub column_arrays: usize,
    pub patterns_seen: u64,
    /// Parameter patterns discarded because they already contain a forbidden
    /// clique and so describe no model of the theory.
    pub cliqued_params: u64,
    /// Patterns where some single column's own family is inconsistent, so
    /// the joint-consistency claim is vacuous.
    pub vacuous: u64,
    pub oracle_checked: u64,
    pub counterexamples: Vec<ColumnCounterexample>,
}

/// Non-increasing column width arrays within the bounds.
fn column_arrays(bounds: ColumnSweepBounds) -> Vec<Vec<usize>> {
    fn grow(
        widths: &mut Vec<usize>,
        remaining: usize,
        max_next: usize,
        max_columns: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if !widths.is_empty() {
            out.push(widths.clone());
        }
        if widths.len() == max_columns {
            return;
        }
        for next in (1..=max_next.min(remaining)).rev() {
            widths.push(next);
            grow(widths, remaining - next, next, max_columns, out);
            widths.pop();
        }
    }
    let mut out = Vec::new();
    grow(
        &mut Vec::new(),
        bounds.max_vertices.saturating_sub(1),
        bounds.max_width,
        bounds.max_columns,
        &mut out,
    );
    out.sort();
    out
}

/// For every column array and every clique-free parameter edge pattern,
/// assert through the oracle that the joint positive within-column family is
/// consistent whenever each column's own family is.
pub fn sweep_columns(bounds: ColumnSweepBounds) -> Result<ColumnSweepReport, DiagramError> {
    let theory = TheoryDescriptor::clique_free_hypergraphs(3, 2)?;
    let arrays = column_arrays(bounds);
    let mut report = ColumnSweepReport {
        bounds,
        column_arrays: arrays.len(),
        patterns_seen: 0,
        cliqued_params: 0,
        vacuous: 0,
        oracle_checked: 0,
        counterexamples: Vec::new(),
    };

    for widths in &arrays {
        let param_count: usize = widths.iter().sum();
        let mut columns: Vec<Vec<usize>> = Vec::new();
        let mut next = 0;
        for &w in widths {
            columns.push((next..next + w).collect());
            next += w;
        }

        let triples: Vec<Vec<usize>> = (0..param_count).combinations(3).collect();
        let triple_bit: BTreeMap<&[usize], usize> = triples
            .iter()
            .enumerate()
            .map(|(bit, t)| (t.as_slice(), bit))
            .collect();
        let clique_masks: Vec<u64> = (0..param_count)
            .combinations(4)
            .map(|four| {
                four.iter()
                    .copied()
                    .combinations(3)
                    .map(|t| 1u64 << triple_bit[t.as_slice()])
                    .sum()
            })
            .collect();
        let vacuous_mask: u64 = columns
            .iter()
            .filter(|col| col.len() == 3)
            .map(|col| 1u64 << triple_bit[col.as_slice()])
            .sum();

        let mut skeleton = Diagram::new(theory);
        for p in 0..param_count {
            skeleton.add_param(ParamId(p as u32));
        }
        skeleton.add_var(VarId(0));
        for col in &columns {
            for pair in col.iter().combinations(2) {
                skeleton.assert_edge(
                    true,
                    [
                        Node::Var(VarId(0)),
                        Node::Param(ParamId(*pair[0] as u32)),
                        Node::Param(ParamId(*pair[1] as u32)),
                    ],
                )?;
            }
        }

        for pattern in 0u64..(1u64 << triples.len()) {
            report.patterns_seen += 1;
            if clique_masks.iter().any(|m| pattern & m == *m) {
                report.cliqued_params += 1;
                continue;
            }
            if pattern & vacuous_mask != 0 {
                report.vacuous += 1;
                continue;
            }
            let mut diagram = skeleton.clone();
            for (bit, triple) in triples.iter().enumerate() {
                if pattern >> bit & 1 == 1 {
                    diagram.add_param_edge(triple.iter().map(|&p| ParamId(p as u32)))?;
                }
            }
            report.oracle_checked += 1;
            let verdict = diagram.consistent();
            if verdict != Verdict::Ok {
                report.counterexamples.push(ColumnCounterexample {
                    widths: widths.clone(),
                    param_edges: triples
                        .iter()
                        .enumerate()
                        .filter(|(bit, _)| pattern >> bit & 1 == 1)
                        .map(|(_, t)| t.clone())
                        .collect(),
                    verdict,
                });
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelingSweepBounds {
    pub max_tuple_len: usize,
    pub max_params: usize,
    pub max_width: usize,
    /// Fresh-point budget for the swept instances.  Derivations get at least
    /// their exact worst case on a saturated pool — a pair of tuples of
    /// length L has at most L*L inversions costing two fresh points each,
    /// and the leftward copy phase costs at most L more — so a small budget
    /// bounds the fragment without starving the normalization.
    pub budget: usize,
}

impl Default for LabelingSweepBounds {
    fn default() -> Self {
        LabelingSweepBounds {
            max_tuple_len: 3,
            max_params: 2,
            max_width: 3,
            budget: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelingSweepReport {
    pub bounds: LabelingSweepBounds,
    pub labelings: u64,
    pub incoherent: u64,
    pub instances_checked: u64,
    pub family_inconsistent: u64,
    pub single_inconsistent: u64,
    /// Random-graph shearing witnesses found in the fragment; the claim says
    /// this stays empty.
    pub witnesses: Vec<String>,
    pub collision_sites: u64,
    pub derivations: u64,
    /// Failed or non-replaying self-collision derivations; the claim says
    /// this stays empty.
    pub derivation_failures: Vec<String>,
}

/// Where one labeling position draws its parameter from.  Every labeling in
/// the swept fragment is generated by one source per position, so parameter
/// equality composes like actual equality and the collision relation stays
/// coherent in every extension of the index model — free per-cell choices do
/// not have that property and are rejected by the self-collision derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ParamSource {
    /// The vertex in this coordinate of the realization.
    Coordinate(usize),
    /// One of two globally shared constants.
    Shared(u8),
    /// A fresh parameter per realization.
    Independent,
}

fn source_menu(tuple_len: usize) -> Vec<ParamSource> {
    (0..tuple_len)
        .map(ParamSource::Coordinate)
        .chain([
            ParamSource::Shared(0),
            ParamSource::Shared(1),
            ParamSource::Independent,
        ])
        .collect()
}

fn sources_collide(
    (i, si): (usize, ParamSource),
    (j, sj): (usize, ParamSource),
    left: &[VertexId],
    right: &[VertexId],
) -> bool {
    match (si, sj) {
        (ParamSource::Coordinate(p), ParamSource::Coordinate(q)) => left[p] == right[q],
        (ParamSource::Shared(a), ParamSource::Shared(b)) => a == b,
        (ParamSource::Independent, ParamSource::Independent) => i == j && left == right,
        _ => false,
    }
}

/// Materialize the collision cells of one source assignment over a pool of
/// realizations with cached pair codes.  Empty cells are left out.
fn source_cells(
    sources: &[ParamSource],
    pool: &[Vec<VertexId>],
    pair_codes: &[Vec<QfCode>],
) -> BTreeMap<(usize, usize), BTreeSet<QfCode>> {
    let width = sources.len();
    let mut collisions = BTreeMap::new();
    for i in 0..width {
        for j in 0..width {
            let mut codes = BTreeSet::new();
            for (a, left) in pool.iter().enumerate() {
                for (b, right) in pool.iter().enumerate() {
                    if sources_collide((i, sources[i]), (j, sources[j]), left, right) {
                        codes.insert(pair_codes[a][b].clone());
                    }
                }
            }
            if !codes.is_empty() {
                collisions.insert((i, j), codes);
            }
        }
    }
    collisions
}

/// Extend the model with `generations` rounds of twins of the tuple
/// vertices, each round one point per tuple position, all above the existing
/// vertices and generation-major in the order.  Every interleaving of two
/// realizations is then realized by actual pairs, so code sets materialized
/// over the result already contain every code the normalization of a bounded
/// derivation can produce.  Base edges are duplicated across all twin
/// combinations, which keeps every copy type-faithful and cannot complete a
/// forbidden clique: any candidate clique repeats a twin block, and the block
/// only carries edges across pairwise distinct blocks.
fn order_grid(
    base: &IndexModel,
    t_tuple: &[VertexId],
    generations: usize,
) -> Result<IndexModel, StructureError> {
    let mut model = base.clone();
    let originals = base.vertices_by_coord();
    let mut block: BTreeMap<VertexId, Vec<VertexId>> =
        originals.iter().map(|&v| (v, vec![v])).collect();
    let mut top = base
        .coord(*originals.last().expect("base models are nonempty"))?
        .clone();
    for _ in 0..generations {
        for &v in t_tuple {
            top = Coord::succ(&top);
            let id = model.fresh_vertex_id();
            model.insert_vertex(id, top.clone(), base.pred(v)?.clone());
            block.get_mut(&v).expect("seeded above").push(id);
        }
    }
    for edge in base.edges().cloned().collect::<Vec<_>>() {
        for combo in edge
            .iter()
            .map(|v| block[v].iter().copied())
            .multi_cartesian_product()
        {
            model.insert_edge(combo);
        }
    }
    debug_assert!(model.validate().is_ok());
    Ok(model)
}

/// Coherence of one materialized labeling over cached pair codes: the same
/// reflexivity, symmetry, and transitivity conditions `check_labeling_coherence`
/// tests, sped up by evaluating each pair once into a bitmask of accepting
/// cells.  The sweep has no edge rules, so their conditions are vacuous.
fn coherent_over(
    collisions: &BTreeMap<(usize, usize), BTreeSet<QfCode>>,
    width: usize,
    m: usize,
    pair_codes: &[Vec<QfCode>],
) -> bool {
    let mask_of = |code: &QfCode| -> u16 {
        let mut mask = 0;
        for (&(i, j), codes) in collisions {
            if codes.contains(code) {
                mask |= 1 << (i * width + j);
            }
        }
        mask
    };
    let mut masks = vec![vec![0u16; m]; m];
    let mut code_masks: BTreeMap<&QfCode, u16> = BTreeMap::new();
    for (a, row) in pair_codes.iter().enumerate() {
        for (b, code) in row.iter().enumerate() {
            masks[a][b] = *code_masks
                .entry(code)
                .or_insert_with(|| mask_of(code));
        }
    }
    for a in 0..m {
        for i in 0..width {
            if masks[a][a] >> (i * width + i) & 1 == 0 {
                return false;
            }
        }
        for b in 0..m {
            for i in 0..width {
                for j in 0..width {
                    if masks[a][b] >> (i * width + j) & 1 != masks[b][a] >> (j * width + i) & 1 {
                        return false;
                    }
                }
            }
        }
    }
    for a in 0..m {
        for b in 0..m {
            if masks[a][b] == 0 {
                continue;
            }
            for c in 0..m {
                if masks[b][c] == 0 {
                    continue;
                }
                let mut required = 0u16;
                for i in 0..width {
                    for j in 0..width {
                        if masks[a][b] >> (i * width + j) & 1 == 0 {
                            continue;
                        }
                        for l in 0..width {
                            if masks[b][c] >> (j * width + l) & 1 == 1 {
                                required |= 1 << (i * width + l);
                            }
                        }
                    }
                }
                if required & !masks[a][c] != 0 {
                    return false;
                }
            }
        }
    }
    true
}

fn rg_formulas(width: usize) -> Vec<FormulaPattern> {
    let mut out = Vec::new();
    for assignment in (0..width).map(|_| 0..3u8).multi_cartesian_product() {
        if assignment.iter().all(|&a| a == 0) {
            continue;
        }
        let mut formula = FormulaPattern::new(width);
        for (position, &a) in assignment.iter().enumerate() {
            match a {
                1 => formula.add_positive([position]),
                2 => formula.add_negative([position]),
                _ => &mut formula,
            };
        }
        out.push(formula);
    }
    out
}

fn index_bases() -> Vec<IndexModel> {
    let class = ClassDescriptor::Hypergraph { n: 3, k: 2 };
    let plain = IndexModel::integer_cut(class, 4);
    let mut edged = plain.clone();
    let vs = edged.vertices_by_coord();
    edged.insert_edge([vs[0], vs[1], vs[2]]);
    vec![plain, edged]
}

/// Replay a derived self-collision from its recorded trace, recomputing
/// every quantifier-free code independently and checking each recorded
/// equality and collision membership.
fn replay_self_collision(inst: &ShearingInstance, sc: &SelfCollision) -> Result<(), String> {
    let labeling = inst.labeling();
    let (pos, neg) = (sc.site.pos, sc.site.neg);
    let code_of = |left: &[VertexId], right: &[VertexId]| -> Result<QfCode, String> {
        let concat: Vec<VertexId> = left.iter().chain(right.iter()).copied().collect();
        qf_type_of(&sc.model, &concat, inst.i0())
            .map(|t| t.code())
            .map_err(|e| e.to_string())
    };

    let mut left = sc.site.left.clone();
    let mut right = sc.site.right.clone();
    let mut current = code_of(&left, &right)?;
    if current != sc.site.code {
        return Err(format!(
            "site code {} differs from recomputed {current}",
            sc.site.code
        ));
    }
    let mut twin: Option<Vec<VertexId>> = None;
    for (step, mv) in sc.trace.iter().enumerate() {
        match mv {
            TraceMove::Substitution {
                left_position,
                right_position,
                new_left,
                new_right,
                left_code,
                right_code,
                merged_code,
            } => {
                if twin.is_some() {
                    return Err(format!("step {step}: substitution after a leftward copy"));
                }
                let mut one = left.clone();
                one[*left_position] = *new_left;
                if code_of(&one, &right)? != *left_code || *left_code != current {
                    return Err(format!("step {step}: left substitution changes the code"));
                }
                let mut other = right.clone();
                other[*right_position] = *new_right;
                if code_of(&left, &other)? != *right_code || *right_code != current {
                    return Err(format!("step {step}: right substitution changes the code"));
                }
                left = one;
                right = other;
                current = code_of(&left, &right)?;
                if current != *merged_code {
                    return Err(format!("step {step}: merged code differs"));
                }
                if !labeling.has_collision(pos, neg, &current) {
                    return Err(format!("step {step}: merged pair fell out of the relation"));
                }
            }
            TraceMove::CopyLeft {
                position,
                copy,
                pair_code,
            } => {
                let t = twin.get_or_insert_with(|| right.clone());
                t[*position] = *copy;
                let code = code_of(&left, t)?;
                if code != *pair_code || code != current {
                    return Err(format!("step {step}: leftward copy changes the code"));
                }
            }
        }
    }
    if left != sc.left || right != sc.right {
        return Err("trace does not reach the recorded normalized pair".into());
    }
    if twin.unwrap_or_else(|| right.clone()) != sc.twin {
        return Err("trace does not reach the recorded twin".into());
    }
    if sc.left_twin_code != current {
        return Err("recorded left/twin code differs from the normalized code".into());
    }

    for (name, pair, recorded) in [
        ("left/twin", (&sc.left, &sc.twin), &sc.left_twin_code),
        ("twin/right", (&sc.twin, &sc.right), &sc.twin_right_code),
        ("diagonal", (&sc.twin, &sc.twin), &sc.diagonal_code),
    ] {
        let code = code_of(pair.0, pair.1)?;
        if code != *recorded {
            return Err(format!("{name} code differs from the recorded one"));
        }
        if !labeling.has_collision(pos, neg, &code) {
            return Err(format!("{name} pair is not in the collision relation"));
        }
    }
    if !sc.single_inconsistent {
        return Err("diagonal collision did not make the single formula inconsistent".into());
    }
    Ok(())
}

/// Run every coherent collision labeling of the coordinate fragment over the
/// clique-free index class against the random graph.
pub fn sweep_rg_labelings(
    bounds: LabelingSweepBounds,
) -> Result<LabelingSweepReport, ShearingError> {
    let theory = TheoryDescriptor::random_graph();
    let mut report = LabelingSweepReport {
        bounds,
        labelings: 0,
        incoherent: 0,
        instances_checked: 0,
        family_inconsistent: 0,
        single_inconsistent: 0,
        witnesses: Vec::new(),
        collision_sites: 0,
        derivations: 0,
        derivation_failures: Vec::new(),
    };

    for base in index_bases() {
        for s_size in 0..=bounds.max_params {
            for tuple_len in 1..=bounds.max_tuple_len {
                if s_size + tuple_len > base.vertex_count() {
                    continue;
                }
                let vs = base.vertices_by_coord();
                let i0: Vec<VertexId> = vs[..s_size].to_vec();
                let t_tuple: Vec<VertexId> = vs[s_size..s_size + tuple_len].to_vec();
                let j_model = order_grid(&base, &t_tuple, 2 * tuple_len)?;
                let r = qf_type_of(&j_model, &t_tuple, &i0)?;
                let pool = enumerate_realizations(&j_model, &r, &i0)?;
                let pair_codes = pair_code_matrix(&j_model, &pool, &i0)?;
                let mut sampled_config = false;
                for width in 1..=bounds.max_width {
                    let formulas = rg_formulas(width);
                    let menu = source_menu(tuple_len);
                    let mut sampled_width = false;
                    let mut seen_labelings: BTreeSet<
                        BTreeMap<(usize, usize), BTreeSet<QfCode>>,
                    > = BTreeSet::new();
                    for sources in (0..width)
                        .map(|_| menu.iter().copied())
                        .multi_cartesian_product()
                    {
                        let collisions = source_cells(&sources, &pool, &pair_codes);
                        if !seen_labelings.insert(collisions.clone()) {
                            continue;
                        }
                        report.labelings += 1;
                        if !coherent_over(&collisions, width, pool.len(), &pair_codes) {
                            report.incoherent += 1;
                            continue;
                        }
                        let labeling = Labeling::Collision {
                            width,
                            collisions,
                            edge_rules: BTreeMap::new(),
                        };
                        let ctx = FamilyContext::new(
                            &labeling,
                            theory,
                            j_model.class(),
                            &j_model,
                            &t_tuple,
                            pool.clone(),
                            &pair_codes,
                        )?;

                        for formula in &formulas {
                            let diagrams = ctx.apply(formula)?;
                            let single_consistent =
                                diagrams[ctx.t_index].consistent().is_consistent();
                            let refs: Vec<&Diagram> = diagrams.iter().collect();
                            let family_inconsistent = !Diagram::union(&refs)
                                .map_err(ShearingError::from)?
                                .consistent()
                                .is_consistent();
                            if !sampled_config || (!sampled_width && pool.len() <= 36) {
                                sampled_config = true;
                                sampled_width = true;
                                let inst = ShearingInstance::new(
                                    j_model.clone(),
                                    i0.clone(),
                                    t_tuple.clone(),
                                    theory,
                                    labeling.clone(),
                                    formula.clone(),
                                )?;
                                let family = instantiate_family(&inst, &j_model)?;
                                if family.diagrams != diagrams || family.t_index != ctx.t_index
                                {
                                    return Err(ShearingError::BadInstance(format!(
                                        "pooled family disagrees with instantiate_family at \
                                         width {width}, tuple length {tuple_len}, {s_size} \
                                         parameters"
                                    )));
                                }
                            }
                            report.instances_checked += 1;
                            if family_inconsistent {
                                report.family_inconsistent += 1;
                            }
                            if !single_consistent {
                                report.single_inconsistent += 1;
                            }
                            if single_consistent && family_inconsistent {
                                report.witnesses.push(format!(
                                    "width {width}, tuple length {tuple_len}, {s_size} \
                                     parameters: family of {} splits",
                                    pool.len()
                                ));
                            }
                        }

                        for (i, j) in (0..width).cartesian_product(0..width) {
                            if i == j {
                                continue;
                            }
                            let mut probe = FormulaPattern::new(width);
                            probe.add_positive([i]).add_negative([j]);
                            let inst = ShearingInstance::new(
                                j_model.clone(),
                                i0.clone(),
                                t_tuple.clone(),
                                theory,
                                labeling.clone(),
                                probe,
                            )?;
                            let mut seen: BTreeSet<QfCode> = BTreeSet::new();
                            for (a, row) in pair_codes.iter().enumerate() {
                                for (b, code) in row.iter().enumerate() {
                                    if !inst.labeling().has_collision(i, j, code) {
                                        continue;
                                    }
                                    report.collision_sites += 1;
                                    if !seen.insert(code.clone()) {
                                        continue;
                                    }
                                    let site = CollisionSite {
                                        left: pool[a].clone(),
                                        right: pool[b].clone(),
                                        pos: i,
                                        neg: j,
                                        code: code.clone(),
                                    };
                                    report.derivations += 1;
                                    let allowance =
                                        bounds.budget.max(2 * tuple_len * tuple_len + tuple_len);
                                    match derive_self_collision(&inst, &j_model, &site, allowance)
                                    {
                                        Ok(sc) => {
                                            if let Err(msg) = replay_self_collision(&inst, &sc) {
                                                report.derivation_failures.push(format!(
                                                    "width {width}, cell ({i},{j}), tuple length \
                                                     {tuple_len}, {s_size} parameters: replay: \
                                                     {msg}"
                                                ));
                                            }
                                        }
                                        Err(e) => report.derivation_failures.push(format!(
                                            "width {width}, cell ({i},{j}), tuple length \
                                             {tuple_len}, {s_size} parameters: {e}"
                                        )),
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// The two hemispheres of the separation, checked side by side over the same
/// index class: the 3-uniform clique-free theory shears, the random graph
/// does not in the swept fragment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub hypergraph_theory: TheoryDescriptor,
    pub hypergraph_shears: bool,
    pub hypergraph_witness_size: Option<usize>,
    pub rg_sweep: LabelingSweepReport,
}

impl fmt::Display for SeparationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:?} over the (3,2) index class: {}",
            self.hypergraph_theory,
            match self.hypergraph_witness_size {
                Some(size) => format!("shears (witness family of size {size})"),
                None => "no shearing witness".into(),
            }
        )?;
        write!(
            f,
            "RandomGraph over the (3,2) index class: {} witness(es) across {} coherent \
             labelings ({} instances checked)",
            self.rg_sweep.witnesses.len(),
            self.rg_sweep.labelings - self.rg_sweep.incoherent,
            self.rg_sweep.instances_checked,
        )
    }
}

pub fn separation_report(
    rg_bounds: LabelingSweepBounds,
) -> Result<SeparationReport, ShearingError> {
    let demo = build_demo_instance(DemoKind::T32)?;
    let (shear, _) = check_shearing(&demo.instance, demo.recommended_budget)?;
    let rg_sweep = sweep_rg_labelings(rg_bounds)?;
    Ok(SeparationReport {
        hypergraph_theory: demo.instance.theory(),
        hypergraph_shears: shear.is_valid_witness(),
        hypergraph_witness_size: shear.witness_subfamily.first().map(Vec::len),
        rg_sweep,
    })
}
