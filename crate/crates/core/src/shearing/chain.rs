//! An increasing chain of formula instances over one growing index order:
//! each step shears on its own, yet the union of all the step formulas stays
//! a single consistent type because every step draws its parameters from a
//! fresh pool.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{
    check_shearing, FormulaPattern, Labeling, ShearingError, ShearingInstance, ShearingReport,
};
use crate::oracle::{Diagram, Node, ParamId, TheoryDescriptor, VarId};
use crate::rational::Coord;
use crate::structures::{ClassDescriptor, IndexModel, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub instance: ShearingInstance,
    pub report: ShearingReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub n: u32,
    pub k: u32,
    pub budget: usize,
    pub steps: Vec<ChainStep>,
}

/// Outcome of re-checking a chain from scratch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainVerdict {
    pub steps_valid: Vec<bool>,
    pub pools_disjoint: bool,
    pub union_consistent: bool,
}

impl ChainVerdict {
    pub fn is_valid(&self) -> bool {
        self.steps_valid.iter().all(|&v| v) && self.pools_disjoint && self.union_consistent
    }
}

/// At step `m`, pick `n` fresh points above everything chosen so far, and
/// shear the k-subset-completion formula against them over the whole history
/// as base. The growing union of the step formulas is checked by
/// [`verify_chain`].
pub fn build_unsuperstable_chain(
    n: u32,
    k: u32,
    steps: usize,
    budget: usize,
) -> Result<Chain, ShearingError> {
    let class = ClassDescriptor::hypergraph(n, k)?;
    let theory = TheoryDescriptor::clique_free_hypergraphs(n, k)?;
    let mut model = IndexModel::new(class);
    let mut chain = Chain {
        n,
        k,
        budget,
        steps: Vec::with_capacity(steps),
    };
    for _ in 0..steps {
        let i0 = model.vertices_by_coord();
        let mut t_tuple = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let id = model.fresh_vertex_id();
            let coord = Coord::from_int(i64::from(id.0));
            model.insert_vertex(id, coord.clone(), coord);
            t_tuple.push(id);
        }
        let mut formula = FormulaPattern::new(n as usize);
        for subset in itertools::Itertools::combinations(0..n as usize, k as usize) {
            formula.add_positive(subset);
        }
        let instance = ShearingInstance::new(
            model.clone(),
            i0,
            t_tuple,
            theory,
            Labeling::identity_projection(n as usize),
            formula,
        )?;
        let (report, _) = check_shearing(&instance, budget)?;
        chain.steps.push(ChainStep { instance, report });
    }
    Ok(chain)
}

/// The union of all step formulas as one diagram over the combined pool,
/// with whatever edges the final base carries among the pooled points.
pub fn chain_union(chain: &Chain) -> Result<Diagram, ShearingError> {
    let theory = TheoryDescriptor::clique_free_hypergraphs(chain.n, chain.k)?;
    let mut union = Diagram::new(theory);
    let var = VarId(0);
    union.add_var(var);
    let mut pool: BTreeSet<VertexId> = BTreeSet::new();
    for step in &chain.steps {
        for &v in step.instance.t_tuple() {
            pool.insert(v);
            union.add_param(ParamId(v.0));
        }
    }
    if let Some(last) = chain.steps.last() {
        for edge in last.instance.base().edges() {
            if edge.iter().all(|v| pool.contains(v)) {
                union.add_param_edge(edge.iter().map(|v| ParamId(v.0)))?;
            }
        }
    }
    for step in &chain.steps {
        for atom in step.instance.formula().positive() {
            let args = std::iter::once(Node::Var(var)).chain(
                atom.iter()
                    .map(|&p| Node::Param(ParamId(step.instance.t_tuple()[p].0))),
            );
            union.assert_edge(true, args)?;
        }
    }
    Ok(union)
}

/// Re-run every step's check, confirm the parameter pools never overlap, and
/// ask the oracle about the union of all step formulas.
pub fn verify_chain(chain: &Chain) -> Result<ChainVerdict, ShearingError> {
    let mut steps_valid = Vec::with_capacity(chain.steps.len());
    for step in &chain.steps {
        let (report, _) = check_shearing(&step.instance, chain.budget)?;
        steps_valid.push(report.is_valid_witness() && report == step.report);
    }
    let mut pools_disjoint = true;
    let mut seen: BTreeSet<VertexId> = BTreeSet::new();
    for step in &chain.steps {
        let i0: BTreeSet<VertexId> = step.instance.i0().iter().copied().collect();
        if i0 != seen {
            pools_disjoint = false;
        }
        for &v in step.instance.t_tuple() {
            if !seen.insert(v) {
                pools_disjoint = false;
            }
        }
    }
    let union_consistent = chain_union(chain)?.consistent().is_consistent();
    Ok(ChainVerdict {
        steps_valid,
        pools_disjoint,
        union_consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Verdict;
    use crate::shearing::instantiate_family;

    #[test]
    fn three_steps_shear_while_their_union_stays_a_type() {
        let chain = build_unsuperstable_chain(3, 2, 3, 3).unwrap();
        assert_eq!(chain.steps.len(), 3);
        for (m, step) in chain.steps.iter().enumerate() {
            assert_eq!(step.instance.i0().len(), 3 * m);
            assert_eq!(step.instance.base().vertex_count(), 3 * (m + 1));
            assert!(step.report.is_valid_witness());
        }
        let verdict = verify_chain(&chain).unwrap();
        assert!(verdict.is_valid());
        let union = chain_union(&chain).unwrap();
        assert!(union.realize().is_ok());
    }

    #[test]
    fn higher_arity_chain_verifies() {
        let chain = build_unsuperstable_chain(4, 3, 2, 4).unwrap();
        let verdict = verify_chain(&chain).unwrap();
        assert!(verdict.is_valid());
    }

    #[test]
    fn reusing_a_saturated_pool_breaks_the_union() {
        // Contrast: drawing a later step's parameters from an earlier step's
        // saturated working model would merge the pools, and the clique twins
        // there already carry the edges that the union formula completes to a
        // forbidden clique.
        let demo = crate::shearing::build_demo_instance(crate::shearing::DemoKind::T32).unwrap();
        let (report, j_model) = check_shearing(&demo.instance, 3).unwrap();
        let family = instantiate_family(&demo.instance, &j_model).unwrap();
        let witness = &report.witness_subfamily[0];
        let merged: Vec<&Diagram> = witness.iter().map(|&i| &family.diagrams[i]).collect();
        let union = Diagram::union(&merged).unwrap();
        assert!(matches!(
            union.consistent(),
            Verdict::ForbiddenClique { .. }
        ));
    }

    #[test]
    fn chain_serde_round_trip() {
        let chain = build_unsuperstable_chain(3, 2, 2, 3).unwrap();
        let json = serde_json::to_string(&chain).unwrap();
        let back: Chain = serde_json::from_str(&json).unwrap();
        assert_eq!(back, chain);
    }
}
