//! Ready-made shearing instances: the generic clique-free hypergraphs over
//! their own index class, the random graph over a dense linear order, and the
//! clique-free graphs over a column array.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{FormulaPattern, Labeling, ShearingError, ShearingInstance};
use crate::oracle::TheoryDescriptor;
use crate::structures::{qf_type_of, ClassDescriptor, IndexModel, QfCode, VertexId};

/// Which demonstration to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DemoKind {
    /// `T_{3,2}` over its own index class: one triangle formula, sheared by a
    /// single clique pass.
    T32,
    /// `T_{n,k}` over the `(n, k)` index class, the general form of the same
    /// construction.
    Tnk { n: u32, k: u32 },
    /// The random graph over a plain dense order: one positive and one
    /// negative edge atom against a sliding pair.
    RgLinear,
    /// `T_{n,1}` against an `m`-column array of abstract rows, edges joining
    /// every pair that disagrees in both column and row.
    Tn1 { n: u32, m: u32 },
}

/// A built demo together with what checking it is expected to show.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemoInstance {
    pub kind: DemoKind,
    pub instance: ShearingInstance,
    pub recommended_budget: usize,
    pub expected_witness_size: usize,
}

pub fn build_demo_instance(kind: DemoKind) -> Result<DemoInstance, ShearingError> {
    match kind {
        DemoKind::T32 => hypergraph_demo(kind, 3, 2),
        DemoKind::Tnk { n, k } => hypergraph_demo(kind, n, k),
        DemoKind::RgLinear => rg_linear_demo(),
        DemoKind::Tn1 { n, m } => column_array_demo(n, m),
    }
}

fn k_subsets(n: usize, k: usize) -> Vec<BTreeSet<usize>> {
    itertools::Itertools::combinations(0..n, k)
        .map(|s| s.into_iter().collect())
        .collect()
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut out = 1usize;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

/// One formula asking `x` to complete every k-subset of an n-tuple to an
/// edge. A single clique pass over the skeleton makes the family close a
/// forbidden (n+1)-clique while each member stays satisfiable.
fn hypergraph_demo(kind: DemoKind, n: u32, k: u32) -> Result<DemoInstance, ShearingError> {
    let class = ClassDescriptor::hypergraph(n, k)?;
    let theory = TheoryDescriptor::clique_free_hypergraphs(n, k)?;
    let base = IndexModel::integer_cut(class, n);
    let t_tuple: Vec<VertexId> = (0..n).map(VertexId).collect();
    let mut formula = FormulaPattern::new(n as usize);
    for subset in k_subsets(n as usize, k as usize) {
        formula.add_positive(subset);
    }
    let instance = ShearingInstance::new(
        base,
        vec![],
        t_tuple,
        theory,
        Labeling::identity_projection(n as usize),
        formula,
    )?;
    Ok(DemoInstance {
        kind,
        instance,
        recommended_budget: n as usize,
        expected_witness_size: binomial(n as usize, k as usize),
    })
}

/// `R(x, y0) & !R(x, y1)` against increasing pairs from a four-point order:
/// two overlapping pairs already disagree about the shared point.
fn rg_linear_demo() -> Result<DemoInstance, ShearingError> {
    let base = IndexModel::integer_cut(ClassDescriptor::LinearOrders, 4);
    let mut formula = FormulaPattern::new(2);
    formula.add_positive([0]).add_negative([1]);
    let instance = ShearingInstance::new(
        base,
        vec![],
        vec![VertexId(0), VertexId(1)],
        TheoryDescriptor::random_graph(),
        Labeling::identity_projection(2),
        formula,
    )?;
    Ok(DemoInstance {
        kind: DemoKind::RgLinear,
        instance,
        recommended_budget: 0,
        expected_witness_size: 2,
    })
}

/// Columns indexed by an order, rows abstract: position `s` of column `i`
/// equals position `s'` of column `j` only when `(i, s) = (j, s')`, and edges
/// join positions that differ in both coordinates. Completing `x` against
/// every row of one column is fine; against `n` columns it closes a
/// forbidden clique.
fn column_array_demo(n: u32, m: u32) -> Result<DemoInstance, ShearingError> {
    let theory = TheoryDescriptor::clique_free_graphs(n)?;
    if m < n {
        return Err(ShearingError::BadInstance(format!(
            "a column array over {m} columns cannot shear clique-free graphs of order {n}; \
             at least {n} columns are needed"
        )));
    }
    let base = IndexModel::integer_cut(ClassDescriptor::LinearOrders, m);
    let t_tuple = vec![VertexId(0)];
    let width = n as usize;

    let diagonal = qf_type_of(&base, &[VertexId(0), VertexId(0)], &[])?.code();
    let increasing = qf_type_of(&base, &[VertexId(0), VertexId(1)], &[])?.code();
    let decreasing = qf_type_of(&base, &[VertexId(1), VertexId(0)], &[])?.code();
    let strict: BTreeSet<QfCode> = [increasing, decreasing].into_iter().collect();

    let mut collisions: BTreeMap<(usize, usize), BTreeSet<QfCode>> = BTreeMap::new();
    let mut edge_rules: BTreeMap<(usize, usize), BTreeSet<QfCode>> = BTreeMap::new();
    for s in 0..width {
        collisions.insert((s, s), [diagonal.clone()].into_iter().collect());
        for s2 in 0..width {
            if s != s2 {
                edge_rules.insert((s, s2), strict.clone());
            }
        }
    }
    let mut formula = FormulaPattern::new(width);
    for s in 0..width {
        formula.add_positive([s]);
    }
    let instance = ShearingInstance::new(
        base,
        vec![],
        t_tuple,
        theory,
        Labeling::Collision {
            width,
            collisions,
            edge_rules,
        },
        formula,
    )?;
    Ok(DemoInstance {
        kind: DemoKind::Tn1 { n, m },
        instance,
        recommended_budget: 0,
        expected_witness_size: n as usize,
    })
}
