//! Command-line front end: build the ready-made shearing demos, re-check
//! instances loaded from files, search for circle witnesses, grow chains of
//! shearing steps, build eq-extensions, and evaluate oracle diagrams — one
//! command per process, each emitting a deterministic machine-readable
//! report.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use serde_json::{json, Value};

use shearlab_core::circle::{
    check_circle_witness, duplicate_realizations, search_circle_witness, InvariantRelation,
    SearchBounds,
};
use shearlab_core::eq_extension::{
    build_eq_extension, build_with_invariant_lifts, coordinate_equivalences,
    coordinate_pred_lifts, find_indistinguishable_pair,
};
use shearlab_core::oracle::{Diagram, Verdict};
use shearlab_core::shearing::{
    build_demo_instance, build_unsuperstable_chain, check_labeling_coherence, check_shearing,
    instantiate_family, verify_chain, DemoInstance, DemoKind, ShearingError, ShearingInstance,
    ShearingReport,
};
use shearlab_core::{ClassDescriptor, IndexModel, VertexId};

/// Schema tag stamped on every JSON report.
pub const SCHEMA: &str = "shear-lab/1";

/// Fresh-point budget used when neither `--budget` nor [`BUDGET_ENV`] is set
/// and the command has no recommendation of its own.
pub const DEFAULT_BUDGET: usize = 64;

/// Environment variable overriding the default budget.
pub const BUDGET_ENV: &str = "SHEARLAB_BUDGET";

/// Which ready-made instance `demo` builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoSelector {
    T32,
    Tnk,
    RgLinear,
    Tn1,
}

/// The two separating index contexts: a pure dense order, and the same order
/// with a singleton predicate on every point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context {
    Dense,
    Labelled,
}

impl Context {
    fn class(self) -> ClassDescriptor {
        match self {
            Context::Dense => ClassDescriptor::LinearOrders,
            Context::Labelled => ClassDescriptor::LinearOrdersWithPredicates,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Context::Dense => "dense",
            Context::Labelled => "labelled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Demo(DemoSelector),
    Verify,
    SearchCircle(Context),
    Chain,
    Eq(Context),
    Oracle,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Demo(_) => "demo",
            Command::Verify => "verify",
            Command::SearchCircle(_) => "search-circle",
            Command::Chain => "chain",
            Command::Eq(_) => "eq",
            Command::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

/// Everything one invocation needs; flags left `None` fall back to
/// per-command defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub n: Option<u32>,
    pub k: Option<u32>,
    pub m: Option<u32>,
    pub steps: Option<usize>,
    pub budget: Option<usize>,
    /// Search bounds `L,S,N`: tuple length, parameter count, model size.
    pub bounds: Option<(usize, usize, usize)>,
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            n: None,
            k: None,
            m: None,
            steps: None,
            budget: None,
            bounds: None,
            seed: None,
            input: None,
            output: None,
            format: Format::Json,
        }
    }
}

/// What a run produced. Exit 0 means the expected verdict was reached, 1
/// that the check ran but the verdict differs, 2 that the input was bad; on
/// exit 2 the report is the diagnostic line itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub exit: u8,
    pub report: String,
}

struct Report {
    expected: bool,
    payload: Value,
    summary: Vec<String>,
}

/// Run one command and render its report; never panics on bad input.
pub fn run(config: &RunConfig) -> Outcome {
    let report = match config.command {
        Command::Demo(selector) => run_demo(selector, config),
        Command::Verify => run_verify(config),
        Command::SearchCircle(context) => run_search_circle(context, config),
        Command::Chain => run_chain(config),
        Command::Eq(context) => run_eq(context, config),
        Command::Oracle => run_oracle(config),
    };
    match report {
        Ok(report) => Outcome {
            exit: u8::from(!report.expected),
            report: render(config, &report),
        },
        Err(diagnostic) => Outcome {
            exit: 2,
            report: diagnostic,
        },
    }
}

fn render(config: &RunConfig, report: &Report) -> String {
    match config.format {
        Format::Json => {
            let envelope = json!({
                "schema": SCHEMA,
                "command": config.command.name(),
                "seed": config.seed,
                "expected_verdict": report.expected,
                "report": report.payload,
            });
            let mut out = serde_json::to_string_pretty(&envelope)
                .expect("reports contain no non-string keys");
            out.push('\n');
            out
        }
        Format::Text => {
            let mut out = format!("{} {}\n", SCHEMA, config.command.name());
            for line in &report.summary {
                out.push_str(line);
                out.push('\n');
            }
            out.push_str(if report.expected {
                "verdict: expected\n"
            } else {
                "verdict: differs\n"
            });
            out
        }
    }
}

/// `--budget` beats the environment, which beats the per-command fallback.
fn resolve_budget(config: &RunConfig, fallback: usize) -> Result<usize, String> {
    if let Some(budget) = config.budget {
        if budget < 1 {
            return Err("--budget: must be at least 1".into());
        }
        return Ok(budget);
    }
    if let Ok(raw) = std::env::var(BUDGET_ENV) {
        let budget: usize = raw
            .trim()
            .parse()
            .map_err(|_| format!("{BUDGET_ENV}: not a budget: {raw:?}"))?;
        if budget < 1 {
            return Err(format!("{BUDGET_ENV}: must be at least 1"));
        }
        return Ok(budget);
    }
    Ok(fallback)
}

fn demo_kind(selector: DemoSelector, config: &RunConfig) -> Result<DemoKind, String> {
    match selector {
        DemoSelector::T32 => Ok(DemoKind::T32),
        DemoSelector::RgLinear => Ok(DemoKind::RgLinear),
        DemoSelector::Tnk => {
            let n = config.n.unwrap_or(3);
            let k = config.k.unwrap_or(2);
            if k < 2 || n <= k {
                return Err(format!("--n/--k: tnk needs n > k >= 2, got n={n}, k={k}"));
            }
            Ok(DemoKind::Tnk { n, k })
        }
        DemoSelector::Tn1 => {
            let n = config.n.unwrap_or(2);
            let m = config.m.unwrap_or(4);
            if n < 2 {
                return Err(format!("--n: tn1 needs a clique order of at least 2, got {n}"));
            }
            if m < n {
                return Err(format!(
                    "--m: tn1 needs at least as many columns as the clique order, \
                     got n={n}, m={m}"
                ));
            }
            Ok(DemoKind::Tn1 { n, m })
        }
    }
}

fn run_demo(selector: DemoSelector, config: &RunConfig) -> Result<Report, String> {
    let kind = demo_kind(selector, config)?;
    let demo = build_demo_instance(kind).map_err(|e| format!("demo: {e}"))?;
    let budget = resolve_budget(config, demo.recommended_budget)?;
    let (check, j_model) =
        check_shearing(&demo.instance, budget).map_err(|e| format!("demo: {e}"))?;
    let defect = witness_defect(&demo.instance, &j_model, &check)?;
    let expected = demo_expectation(&demo, &check, defect.as_ref());
    let sizes: Vec<usize> = check.witness_subfamily.iter().map(Vec::len).collect();
    let summary = vec![
        format!("kind: {}", serde_json::to_string(&demo.kind).unwrap()),
        format!("budget: {budget}"),
        format!("single formula consistent: {}", check.single_consistent),
        format!("family inconsistent: {}", check.family_inconsistent),
        format!(
            "witness subfamilies: {} of expected size {} (sizes {sizes:?})",
            check.witness_subfamily.len(),
            demo.expected_witness_size
        ),
        format!("joint defect: {}", defect_line(defect.as_ref())),
    ];
    Ok(Report {
        expected,
        payload: json!({
            "kind": demo.kind,
            "budget": budget,
            "expected_witness_size": demo.expected_witness_size,
            "check": check,
            "witness_defect": defect,
            "instance": demo.instance,
        }),
        summary,
    })
}

/// The oracle's reason the first witness subfamily cannot be realized.
fn witness_defect(
    inst: &ShearingInstance,
    j_model: &IndexModel,
    check: &ShearingReport,
) -> Result<Option<Verdict>, String> {
    let Some(first) = check.witness_subfamily.first() else {
        return Ok(None);
    };
    let family = instantiate_family(inst, j_model).map_err(|e| format!("demo: {e}"))?;
    let chosen: Vec<&Diagram> = first.iter().map(|&i| &family.diagrams[i]).collect();
    let union = Diagram::union(&chosen).map_err(|e| format!("demo: {e}"))?;
    Ok(Some(union.consistent()))
}

fn defect_line(defect: Option<&Verdict>) -> String {
    match defect {
        None => "none".into(),
        Some(Verdict::Ok) => "none (union consistent)".into(),
        Some(Verdict::SignConflict { atom }) => {
            format!("sign conflict on an atom of {} vertices", atom.len())
        }
        Some(Verdict::ForbiddenClique { vertices }) => {
            format!("forbidden clique on {} vertices", vertices.len())
        }
        Some(Verdict::EqualityConflict { .. }) => "equality conflict".into(),
    }
}

fn demo_expectation(
    demo: &DemoInstance,
    check: &ShearingReport,
    defect: Option<&Verdict>,
) -> bool {
    if !check.is_valid_witness() {
        return false;
    }
    if !check
        .witness_subfamily
        .iter()
        .all(|w| w.len() == demo.expected_witness_size)
    {
        return false;
    }
    match demo.kind {
        DemoKind::T32 => clique_defect(defect, 4),
        DemoKind::Tnk { n, .. } => clique_defect(defect, n as usize + 1),
        DemoKind::Tn1 { n, .. } => {
            clique_defect(defect, n as usize + 1)
                && check.witness_subfamily.len()
                    == choose(check.realization_count, n as usize)
        }
        DemoKind::RgLinear => matches!(defect, Some(Verdict::SignConflict { .. })),
    }
}

fn clique_defect(defect: Option<&Verdict>, size: usize) -> bool {
    matches!(defect, Some(Verdict::ForbiddenClique { vertices }) if vertices.len() == size)
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

fn read_input(config: &RunConfig, what: &str) -> Result<(PathBuf, String), String> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| format!("--in: {} needs an input file", what))?;
    let text = fs::read_to_string(path).map_err(|e| format!("--in {}: {e}", path.display()))?;
    Ok((path.clone(), text))
}

fn run_verify(config: &RunConfig) -> Result<Report, String> {
    let (path, text) = read_input(config, "verify")?;
    let parsed: ShearingInstance =
        serde_json::from_str(&text).map_err(|e| format!("--in {}: {e}", path.display()))?;
    let inst = ShearingInstance::new(
        parsed.base().clone(),
        parsed.i0().to_vec(),
        parsed.t_tuple().to_vec(),
        parsed.theory(),
        parsed.labeling().clone(),
        parsed.formula().clone(),
    )
    .map_err(|e| format!("--in {}: {e}", path.display()))?;
    if inst != parsed {
        return Err(format!(
            "--in {}: the cached class or qf type disagrees with the base model",
            path.display()
        ));
    }
    match check_labeling_coherence(inst.labeling(), inst.base(), inst.i0(), inst.r()) {
        Err(ShearingError::IncoherentLabeling(violation)) => Ok(Report {
            expected: false,
            payload: json!({
                "coherent": false,
                "violation": violation,
                "check": Value::Null,
            }),
            summary: vec![format!("coherence violation: {violation}")],
        }),
        Err(other) => Err(format!("--in {}: {other}", path.display())),
        Ok(()) => {
            let budget = resolve_budget(config, DEFAULT_BUDGET)?;
            let (check, _) =
                check_shearing(&inst, budget).map_err(|e| format!("verify: {e}"))?;
            let expected = check.is_valid_witness();
            let summary = vec![
                "coherent: true".into(),
                format!("budget: {budget}"),
                format!("single formula consistent: {}", check.single_consistent),
                format!("family inconsistent: {}", check.family_inconsistent),
                format!("witness subfamilies: {}", check.witness_subfamily.len()),
            ];
            Ok(Report {
                expected,
                payload: json!({
                    "coherent": true,
                    "violation": Value::Null,
                    "budget": budget,
                    "check": check,
                }),
                summary,
            })
        }
    }
}

fn run_search_circle(context: Context, config: &RunConfig) -> Result<Report, String> {
    let (tuple_len, max_params, max_model) = config.bounds.unwrap_or((2, 2, 8));
    if tuple_len < 1 {
        return Err("--bounds: the tuple length L must be at least 1".into());
    }
    if max_model < 2 {
        return Err("--bounds: the model size N must be at least 2".into());
    }
    let bounds = SearchBounds {
        tuple_len,
        max_params,
        max_model,
    };
    let points = (max_model / 2).max(2) as u32;
    let base = IndexModel::integer_cut(context.class(), points);
    let outcome = search_circle_witness(context.class(), &base, bounds)
        .map_err(|e| format!("search-circle: {e}"))?;
    let confirmed = match &outcome.witness {
        Some(witness) => {
            let model = duplicate_realizations(&base, bounds.max_model)
                .map_err(|e| format!("search-circle: {e}"))?;
            check_circle_witness(witness, &model)
                .map_err(|e| format!("search-circle: {e}"))?
                .is_empty()
        }
        None => false,
    };
    let expected = match context {
        Context::Dense => confirmed,
        Context::Labelled => outcome.witness.is_none(),
    };
    let summary = vec![
        format!("context: {}", context.name()),
        format!("bounds: L={tuple_len}, S={max_params}, N={max_model}"),
        match &outcome.witness {
            Some(w) => format!(
                "witness: found on a tuple of length {} over {} parameters (re-checked: {})",
                w.t_tuple.len(),
                w.i0.len(),
                confirmed
            ),
            None => "witness: none up to the bounds".into(),
        },
    ];
    Ok(Report {
        expected,
        payload: json!({
            "context": context.name(),
            "base_points": points,
            "bounds": outcome.bounds,
            "witness": outcome.witness,
            "confirmed": confirmed,
        }),
        summary,
    })
}

fn run_chain(config: &RunConfig) -> Result<Report, String> {
    let n = config.n.unwrap_or(3);
    let k = config.k.unwrap_or(2);
    if k < 2 || n <= k {
        return Err(format!("--n/--k: chain needs n > k >= 2, got n={n}, k={k}"));
    }
    let steps = config.steps.unwrap_or(3);
    if steps < 1 {
        return Err("--steps: a chain needs at least one step".into());
    }
    let budget = resolve_budget(config, n as usize)?;
    let chain =
        build_unsuperstable_chain(n, k, steps, budget).map_err(|e| format!("chain: {e}"))?;
    let verdict = verify_chain(&chain).map_err(|e| format!("chain: {e}"))?;
    let expected =
        verdict.is_valid() && chain.steps.iter().all(|s| s.report.is_valid_witness());
    let witness_sizes: Vec<usize> = chain
        .steps
        .iter()
        .map(|s| s.report.witness_subfamily.first().map_or(0, Vec::len))
        .collect();
    let pool_sizes: Vec<usize> = chain
        .steps
        .iter()
        .map(|s| s.instance.i0().len() + s.instance.t_tuple().len())
        .collect();
    let summary = vec![
        format!("n={n}, k={k}, steps={steps}, budget={budget}"),
        format!("step witness sizes: {witness_sizes:?}"),
        format!(
            "steps valid: {:?}, pools disjoint: {}, union consistent: {}",
            verdict.steps_valid, verdict.pools_disjoint, verdict.union_consistent
        ),
    ];
    Ok(Report {
        expected,
        payload: json!({
            "n": n,
            "k": k,
            "steps": steps,
            "budget": budget,
            "verdict": verdict,
            "step_witness_sizes": witness_sizes,
            "step_pool_sizes": pool_sizes,
        }),
        summary,
    })
}

fn all_pairs(base: &IndexModel) -> Vec<Vec<VertexId>> {
    let vertices = base.vertices_by_coord();
    let mut out = Vec::with_capacity(vertices.len() * vertices.len());
    for &a in &vertices {
        for &b in &vertices {
            out.push(vec![a, b]);
        }
    }
    out
}

fn run_eq(context: Context, config: &RunConfig) -> Result<Report, String> {
    let points = config.m.unwrap_or(4);
    if points < 3 {
        return Err(format!("--m: the eq demo needs at least 3 base points, got {points}"));
    }
    let base = IndexModel::integer_cut(context.class(), points);
    let vs = base.vertices_by_coord();
    let param_sets: Vec<Vec<VertexId>> = vec![vec![], vec![vs[0]], vec![vs[0], vs[2]]];
    let mut trials = Vec::new();
    let mut pairs_found = 0usize;
    let mut extensions = 0usize;
    match context {
        Context::Dense => {
            let tuples = all_pairs(&base);
            let first: BTreeSet<(usize, usize)> = [(0, 0)].into_iter().collect();
            let second: BTreeSet<(usize, usize)> = [(1, 1)].into_iter().collect();
            let e1 = InvariantRelation::from_coordinate_atoms(&base, &tuples, &[], 2, &first)
                .map_err(|e| format!("eq: {e}"))?;
            let e2 = InvariantRelation::from_coordinate_atoms(&base, &tuples, &[], 2, &second)
                .map_err(|e| format!("eq: {e}"))?;
            let ext = build_eq_extension(base.clone(), vec![e1, e2], Vec::new())
                .map_err(|e| format!("eq: {e}"))?;
            extensions = 1;
            for params in &param_sets {
                let pair =
                    find_indistinguishable_pair(&ext, params).map_err(|e| format!("eq: {e}"))?;
                pairs_found += usize::from(pair.is_some());
                trials.push(json!({
                    "relation": Value::Null,
                    "params": params,
                    "pair": pair,
                }));
            }
        }
        Context::Labelled => {
            let relations = coordinate_equivalences(&base, 2).map_err(|e| format!("eq: {e}"))?;
            for (index, relation) in relations.iter().enumerate() {
                let lifts =
                    coordinate_pred_lifts(&base, 2).map_err(|e| format!("eq: {e}"))?;
                let ext =
                    build_with_invariant_lifts(base.clone(), vec![relation.clone()], lifts)
                        .map_err(|e| format!("eq: {e}"))?;
                extensions += 1;
                for params in &param_sets {
                    let pair = find_indistinguishable_pair(&ext, params)
                        .map_err(|e| format!("eq: {e}"))?;
                    pairs_found += usize::from(pair.is_some());
                    trials.push(json!({
                        "relation": index,
                        "params": params,
                        "pair": pair,
                    }));
                }
            }
        }
    }
    let trial_count = trials.len();
    let expected = match context {
        Context::Dense => pairs_found == trial_count,
        Context::Labelled => pairs_found == 0,
    };
    let summary = vec![
        format!("context: {}", context.name()),
        format!("base points: {points}, pair-class extensions: {extensions}"),
        format!("indistinguishable pairs: {pairs_found} of {trial_count} trials"),
    ];
    Ok(Report {
        expected,
        payload: json!({
            "context": context.name(),
            "base_points": points,
            "arity": 2,
            "extensions": extensions,
            "trials": trials,
            "pairs_found": pairs_found,
        }),
        summary,
    })
}

fn run_oracle(config: &RunConfig) -> Result<Report, String> {
    let (path, text) = read_input(config, "oracle")?;
    let diagram: Diagram =
        serde_json::from_str(&text).map_err(|e| format!("--in {}: {e}", path.display()))?;
    let verdict = diagram.consistent();
    let realized = if verdict.is_consistent() {
        Some(diagram.realize().map_err(|e| format!("oracle: {e}"))?)
    } else {
        None
    };
    let expected = verdict.is_consistent();
    let summary = vec![
        format!(
            "diagram: {} parameters, {} variables, {} literals",
            diagram.params().count(),
            diagram.vars().count(),
            diagram.literals().count()
        ),
        if expected {
            "verdict: consistent".into()
        } else {
            format!("verdict: {}", defect_line(Some(&verdict)))
        },
    ];
    Ok(Report {
        expected,
        payload: json!({
            "theory": diagram.theory(),
            "verdict": verdict,
            "params": diagram.params().count(),
            "vars": diagram.vars().count(),
            "literals": diagram.literals().count(),
            "realized": realized,
        }),
        summary,
    })
}
