//! Literal-diagram consistency oracle for the generic graph and clique-free
//! (hyper)graph theories.
//!
//! A [`Diagram`] is a conjunction of edge literals over a fixed finite
//! parameter structure together with free variables. All three theories are
//! generic models of universal classes closed under free amalgamation, so a
//! diagram is satisfiable iff the canonical extension — one fresh vertex per
//! variable, exactly the asserted positive edges — lies in the class: any
//! identification of a variable with another vertex that repaired a forbidden
//! clique would force a positive atom onto a repeated vertex or a missing
//! parameter edge. The oracle therefore evaluates that single extension and
//! reports the first defect it finds, in a fixed order.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The ambient complete theory a diagram is interpreted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TheoryDescriptor {
    /// The random graph: binary edges, no constraint.
    RandomGraph,
    /// Generic K_{n+1}-free graphs.
    CliqueFreeGraphs { n: u32 },
    /// Generic (k+1)-uniform hypergraphs with no (n+1)-clique, n > k >= 2.
    CliqueFreeHypergraphs { n: u32, k: u32 },
}

impl TheoryDescriptor {
    pub fn random_graph() -> Self {
        TheoryDescriptor::RandomGraph
    }

    pub fn clique_free_graphs(n: u32) -> Result<Self, DiagramError> {
        if n < 2 {
            return Err(DiagramError::BadTheoryParameters { n, k: 1 });
        }
        Ok(TheoryDescriptor::CliqueFreeGraphs { n })
    }

    pub fn clique_free_hypergraphs(n: u32, k: u32) -> Result<Self, DiagramError> {
        if k < 2 || n <= k {
            return Err(DiagramError::BadTheoryParameters { n, k });
        }
        Ok(TheoryDescriptor::CliqueFreeHypergraphs { n, k })
    }

    pub fn edge_arity(&self) -> usize {
        match self {
            TheoryDescriptor::RandomGraph | TheoryDescriptor::CliqueFreeGraphs { .. } => 2,
            TheoryDescriptor::CliqueFreeHypergraphs { k, .. } => *k as usize + 1,
        }
    }

    /// Smallest forbidden clique size, if any.
    pub fn clique_bound(&self) -> Option<usize> {
        match self {
            TheoryDescriptor::RandomGraph => None,
            TheoryDescriptor::CliqueFreeGraphs { n }
            | TheoryDescriptor::CliqueFreeHypergraphs { n, .. } => Some(*n as usize + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(pub u32);

/// A vertex term of a diagram: a named parameter or a free variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Param(ParamId),
    Var(VarId),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Literal {
    /// `R(args)` or its negation; args are sorted, pairwise distinct, and
    /// contain at least one variable (all-parameter facts belong to the
    /// parameter structure itself).
    Edge { sign: bool, args: Vec<Node> },
    /// `var != other`.
    NotEqual { var: VarId, other: Node },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DiagramError {
    #[error("bad theory parameters n={n}, k={k}")]
    BadTheoryParameters { n: u32, k: u32 },
    #[error("unknown parameter {0:?}")]
    UnknownParam(ParamId),
    #[error("unknown variable {0:?}")]
    UnknownVar(VarId),
    #[error("edge arity {got} does not match the theory arity {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("edge arguments must be pairwise distinct")]
    RepeatedVertex,
    #[error("edge literal needs at least one variable")]
    NoVariable,
    #[error("diagrams over different theories cannot be combined")]
    TheoryMismatch,
    #[error("diagram is inconsistent and has no realization")]
    Inconsistent,
}

/// Outcome of a consistency check: `Ok`, or the first defect found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Ok,
    /// Some atom is forced both true and false (by literals or by the fixed
    /// parameter structure).
    SignConflict { atom: Vec<Node> },
    /// The asserted edges close a forbidden clique on these vertices.
    ForbiddenClique { vertices: Vec<Node> },
    /// A disequality of the form `x != x`.
    EqualityConflict { var: VarId },
}

impl Verdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Verdict::Ok)
    }
}

/// A conjunction of literals over a parameter structure, with free variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagram {
    theory: TheoryDescriptor,
    params: BTreeSet<ParamId>,
    param_edges: BTreeSet<BTreeSet<ParamId>>,
    vars: BTreeSet<VarId>,
    literals: BTreeSet<Literal>,
}

impl Diagram {
    pub fn new(theory: TheoryDescriptor) -> Self {
        Diagram {
            theory,
            params: BTreeSet::new(),
            param_edges: BTreeSet::new(),
            vars: BTreeSet::new(),
            literals: BTreeSet::new(),
        }
    }

    pub fn theory(&self) -> TheoryDescriptor {
        self.theory
    }

    pub fn params(&self) -> impl Iterator<Item = ParamId> + '_ {
        self.params.iter().copied()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars.iter().copied()
    }

    pub fn param_edges(&self) -> impl Iterator<Item = &BTreeSet<ParamId>> {
        self.param_edges.iter()
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.literals.iter()
    }

    pub fn add_param(&mut self, p: ParamId) {
        self.params.insert(p);
    }

    pub fn add_var(&mut self, v: VarId) {
        self.vars.insert(v);
    }

    pub fn add_param_edge(
        &mut self,
        edge: impl IntoIterator<Item = ParamId>,
    ) -> Result<(), DiagramError> {
        let edge: BTreeSet<ParamId> = edge.into_iter().collect();
        if edge.len() != self.theory.edge_arity() {
            return Err(DiagramError::ArityMismatch {
                expected: self.theory.edge_arity(),
                got: edge.len(),
            });
        }
        if let Some(&p) = edge.iter().find(|p| !self.params.contains(p)) {
            return Err(DiagramError::UnknownParam(p));
        }
        self.param_edges.insert(edge);
        Ok(())
    }

    pub fn assert_edge(
        &mut self,
        sign: bool,
        args: impl IntoIterator<Item = Node>,
    ) -> Result<(), DiagramError> {
        let mut args: Vec<Node> = args.into_iter().collect();
        args.sort_unstable();
        if args.len() != self.theory.edge_arity() {
            return Err(DiagramError::ArityMismatch {
                expected: self.theory.edge_arity(),
                got: args.len(),
            });
        }
        if args.windows(2).any(|w| w[0] == w[1]) {
            return Err(DiagramError::RepeatedVertex);
        }
        if !args.iter().any(|n| matches!(n, Node::Var(_))) {
            return Err(DiagramError::NoVariable);
        }
        for &node in &args {
            self.check_known(node)?;
        }
        self.literals.insert(Literal::Edge { sign, args });
        Ok(())
    }

    pub fn assert_not_equal(&mut self, var: VarId, other: Node) -> Result<(), DiagramError> {
        if !self.vars.contains(&var) {
            return Err(DiagramError::UnknownVar(var));
        }
        self.check_known(other)?;
        self.literals.insert(Literal::NotEqual { var, other });
        Ok(())
    }

    fn check_known(&self, node: Node) -> Result<(), DiagramError> {
        match node {
            Node::Param(p) if !self.params.contains(&p) => Err(DiagramError::UnknownParam(p)),
            Node::Var(v) if !self.vars.contains(&v) => Err(DiagramError::UnknownVar(v)),
            _ => Ok(()),
        }
    }

    /// Union of several diagrams over the same theory; shared ids refer to
    /// shared parameters and variables.
    pub fn union(instances: &[&Diagram]) -> Result<Diagram, DiagramError> {
        let theory = match instances.first() {
            Some(d) => d.theory,
            None => return Err(DiagramError::TheoryMismatch),
        };
        let mut out = Diagram::new(theory);
        for d in instances {
            if d.theory != theory {
                return Err(DiagramError::TheoryMismatch);
            }
            out.params.extend(d.params.iter().copied());
            out.vars.extend(d.vars.iter().copied());
            out.param_edges.extend(d.param_edges.iter().cloned());
            out.literals.extend(d.literals.iter().cloned());
        }
        Ok(out)
    }

    /// Decide satisfiability in the generic model, over the fixed parameter
    /// structure. Defects are reported in a fixed order: self-disequalities,
    /// then sign conflicts (by least atom), then a forbidden clique.
    pub fn consistent(&self) -> Verdict {
        for lit in &self.literals {
            if let Literal::NotEqual { var, other } = lit {
                if *other == Node::Var(*var) {
                    return Verdict::EqualityConflict { var: *var };
                }
            }
        }

        let mut positive: BTreeSet<Vec<Node>> = BTreeSet::new();
        let mut negative: BTreeSet<Vec<Node>> = BTreeSet::new();
        for lit in &self.literals {
            if let Literal::Edge { sign, args } = lit {
                if *sign {
                    positive.insert(args.clone());
                } else {
                    negative.insert(args.clone());
                }
            }
        }
        if let Some(atom) = positive.intersection(&negative).next() {
            return Verdict::SignConflict { atom: atom.clone() };
        }

        let mut edges: BTreeSet<BTreeSet<Node>> = self
            .param_edges
            .iter()
            .map(|e| e.iter().map(|&p| Node::Param(p)).collect())
            .collect();
        for atom in &positive {
            let as_set: BTreeSet<Node> = atom.iter().copied().collect();
            if atom.iter().all(|n| matches!(n, Node::Param(_))) && !edges.contains(&as_set) {
                return Verdict::SignConflict { atom: atom.clone() };
            }
            edges.insert(as_set);
        }
        for atom in &negative {
            let as_set: BTreeSet<Node> = atom.iter().copied().collect();
            if edges.contains(&as_set) {
                return Verdict::SignConflict { atom: atom.clone() };
            }
        }

        if let Some(bound) = self.theory.clique_bound() {
            if let Some(clique) = find_clique(&edges, self.theory.edge_arity(), bound) {
                return Verdict::ForbiddenClique { vertices: clique };
            }
        }
        Verdict::Ok
    }

    /// Materialize the canonical witness: parameters plus one fresh vertex
    /// per variable, with exactly the asserted positive edges.
    pub fn realize(&self) -> Result<OracleModel, DiagramError> {
        if !self.consistent().is_consistent() {
            return Err(DiagramError::Inconsistent);
        }
        let mut edges: BTreeSet<BTreeSet<Node>> = self
            .param_edges
            .iter()
            .map(|e| e.iter().map(|&p| Node::Param(p)).collect())
            .collect();
        for lit in &self.literals {
            if let Literal::Edge { sign: true, args } = lit {
                edges.insert(args.iter().copied().collect());
            }
        }
        let vertices: BTreeSet<Node> = self
            .params
            .iter()
            .map(|&p| Node::Param(p))
            .chain(self.vars.iter().map(|&v| Node::Var(v)))
            .collect();
        Ok(OracleModel {
            theory: self.theory,
            vertices,
            edges,
        })
    }
}

/// A concrete finite model of the theory's universal part, as produced by
/// [`Diagram::realize`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleModel {
    theory: TheoryDescriptor,
    vertices: BTreeSet<Node>,
    edges: BTreeSet<BTreeSet<Node>>,
}

impl OracleModel {
    pub fn theory(&self) -> TheoryDescriptor {
        self.theory
    }

    pub fn vertices(&self) -> impl Iterator<Item = Node> + '_ {
        self.vertices.iter().copied()
    }

    pub fn has_edge(&self, args: &[Node]) -> bool {
        let set: BTreeSet<Node> = args.iter().copied().collect();
        set.len() == args.len() && self.edges.contains(&set)
    }

    pub fn satisfies(&self, lit: &Literal) -> bool {
        match lit {
            Literal::Edge { sign, args } => self.has_edge(args) == *sign,
            // Every variable names its own fresh vertex here.
            Literal::NotEqual { var, other } => Node::Var(*var) != *other,
        }
    }

    /// Check the model against the theory's universal axioms.
    pub fn is_valid(&self) -> bool {
        let arity = self.theory.edge_arity();
        for edge in &self.edges {
            if edge.len() != arity || edge.iter().any(|v| !self.vertices.contains(v)) {
                return false;
            }
        }
        match self.theory.clique_bound() {
            None => true,
            Some(bound) => find_clique(&self.edges, arity, bound).is_none(),
        }
    }

    pub fn forbidden_clique(&self) -> Option<Vec<Node>> {
        let bound = self.theory.clique_bound()?;
        find_clique(&self.edges, self.theory.edge_arity(), bound)
    }
}

/// First clique of `bound` vertices, in lexicographic vertex order, in which
/// every `arity`-subset is an edge.
fn find_clique(
    edges: &BTreeSet<BTreeSet<Node>>,
    arity: usize,
    bound: usize,
) -> Option<Vec<Node>> {
    let support: Vec<Node> = edges
        .iter()
        .flat_map(|e| e.iter().copied())
        .collect::<BTreeSet<Node>>()
        .into_iter()
        .collect();
    let mut degree: BTreeMap<Node, usize> = BTreeMap::new();
    for e in edges {
        for &v in e {
            *degree.entry(v).or_insert(0) += 1;
        }
    }

    fn extend(
        stack: &mut Vec<Node>,
        from: usize,
        support: &[Node],
        edges: &BTreeSet<BTreeSet<Node>>,
        arity: usize,
        bound: usize,
    ) -> bool {
        if stack.len() == bound {
            return true;
        }
        'next: for i in from..support.len() {
            let v = support[i];
            if stack.len() + 1 >= arity {
                for subset in itertools::Itertools::combinations(stack.iter().copied(), arity - 1)
                {
                    let mut edge: BTreeSet<Node> = subset.into_iter().collect();
                    edge.insert(v);
                    if !edges.contains(&edge) {
                        continue 'next;
                    }
                }
            }
            stack.push(v);
            if extend(stack, i + 1, support, edges, arity, bound) {
                return true;
            }
            stack.pop();
        }
        false
    }

    // A clique member must lie in at least C(bound-1, arity-1) edges.
    let needed = choose(bound - 1, arity - 1);
    let support: Vec<Node> = support
        .into_iter()
        .filter(|v| degree.get(v).copied().unwrap_or(0) >= needed)
        .collect();
    if support.len() < bound {
        return None;
    }
    let mut stack = Vec::with_capacity(bound);
    if extend(&mut stack, 0, &support, edges, arity, bound) {
        Some(stack)
    } else {
        None
    }
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

/// All inclusion-minimal index sets `S` such that the union of `instances[S]`
/// is inconsistent, in size-then-lexicographic order. `max_size` bounds the
/// subfamily size searched.
pub fn minimal_inconsistent_subfamilies(
    instances: &[&Diagram],
    max_size: Option<usize>,
) -> Result<Vec<Vec<usize>>, DiagramError> {
    if instances.is_empty() {
        return Ok(Vec::new());
    }
    for d in instances {
        if d.theory() != instances[0].theory() {
            return Err(DiagramError::TheoryMismatch);
        }
    }
    if Diagram::union(instances)?.consistent().is_consistent() {
        return Ok(Vec::new());
    }
    let cap = max_size.unwrap_or(instances.len()).min(instances.len());
    let mut found: Vec<Vec<usize>> = Vec::new();
    for size in 1..=cap {
        for subset in itertools::Itertools::combinations(0..instances.len(), size) {
            if found
                .iter()
                .any(|small| small.iter().all(|i| subset.contains(i)))
            {
                continue;
            }
            let chosen: Vec<&Diagram> = subset.iter().map(|&i| instances[i]).collect();
            if !Diagram::union(&chosen)?.consistent().is_consistent() {
                found.push(subset);
            }
        }
    }
    Ok(found)
}
