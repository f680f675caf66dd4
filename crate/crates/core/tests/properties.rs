//! Randomized structural properties, each checked against an independent
//! brute-force oracle: type codes are relabeling-invariant, realization
//! enumeration matches a naive tuple scan, and the one-shot realizability
//! test agrees with exhaustive search over all distinguishable extensions.

use std::collections::BTreeSet;

use proptest::prelude::*;

use shearlab_core::structures::{
    enumerate_realizations, extend_realizing, qf_type_of, realizable,
};
use shearlab_core::{ClassDescriptor, Coord, IndexModel, QfType, VertexId};

#[derive(Debug, Clone)]
struct Scene {
    model: IndexModel,
    tuple: Vec<VertexId>,
    params: Vec<VertexId>,
}

fn arb_class() -> impl Strategy<Value = ClassDescriptor> {
    prop_oneof![
        Just(ClassDescriptor::LinearOrders),
        Just(ClassDescriptor::LinearOrdersWithPredicates),
        Just(ClassDescriptor::Hypergraph { n: 3, k: 2 }),
        Just(ClassDescriptor::Hypergraph { n: 4, k: 2 }),
    ]
}

fn build_model(
    class: ClassDescriptor,
    pred_labels: &[u8],
    edge_picks: &[bool],
) -> IndexModel {
    let mut model = IndexModel::new(class);
    let n = pred_labels.len();
    for (i, &label) in pred_labels.iter().enumerate() {
        let pred = if class.has_predicates() {
            Coord::from_int(label as i64)
        } else {
            Coord::zero()
        };
        model.insert_vertex(VertexId(i as u32), Coord::from_int(i as i64), pred);
    }
    if let Some(arity) = class.edge_arity() {
        let ids: Vec<VertexId> = (0..n as u32).map(VertexId).collect();
        for (pick, subset) in edge_picks
            .iter()
            .zip(itertools::Itertools::combinations(ids.into_iter(), arity))
        {
            if *pick {
                model.insert_edge(subset);
            }
        }
    }
    model
}

fn arb_scene_of(class: ClassDescriptor, max_vertices: usize) -> impl Strategy<Value = Scene> {
    (1..=max_vertices)
        .prop_flat_map(move |n| {
            let edge_slots = if class.edge_arity() == Some(3) && n >= 3 {
                n * (n - 1) * (n - 2) / 6
            } else {
                0
            };
            (
                Just(class),
                proptest::collection::vec(0..4u8, n),
                proptest::collection::vec(proptest::bool::weighted(0.2), edge_slots),
            )
        })
        .prop_map(|(class, preds, picks)| build_model(class, &preds, &picks))
        .prop_filter("forbidden clique", |model| model.validate().is_ok())
        .prop_flat_map(|model| {
            let n = model.vertex_count();
            (
                Just(model),
                proptest::collection::vec(0..n, 1..=3),
                proptest::collection::vec(0..n, 0..=2),
            )
        })
        .prop_map(|(model, tuple_picks, param_picks)| {
            let ids = model.vertices_by_coord();
            let tuple = tuple_picks.into_iter().map(|i| ids[i]).collect();
            let mut params: Vec<VertexId> = Vec::new();
            for i in param_picks {
                if !params.contains(&ids[i]) {
                    params.push(ids[i]);
                }
            }
            Scene {
                model,
                tuple,
                params,
            }
        })
}

fn arb_scene(max_vertices: usize) -> impl Strategy<Value = Scene> {
    arb_class().prop_flat_map(move |class| arb_scene_of(class, max_vertices))
}

fn arb_scene_pair(max_vertices: usize) -> impl Strategy<Value = (Scene, Scene)> {
    arb_class().prop_flat_map(move |class| {
        (
            arb_scene_of(class, max_vertices),
            arb_scene_of(class, max_vertices),
        )
    })
}

/// Rebuild the scene's model with permuted vertex ids and a strictly
/// increasing re-coordinatization, preserving predicates and edges.
fn relabel(scene: &Scene, id_salt: &[u32], gaps: &[u8]) -> Scene {
    let old_ids = scene.model.vertices_by_coord();
    let mut order: Vec<usize> = (0..old_ids.len()).collect();
    order.sort_by_key(|&i| (id_salt[i], i));
    let mut new_id = vec![VertexId(0); old_ids.len()];
    for (rank, &i) in order.iter().enumerate() {
        new_id[i] = VertexId(rank as u32);
    }

    let mut model = IndexModel::new(scene.model.class());
    let mut coord = 0i64;
    for (i, &v) in old_ids.iter().enumerate() {
        coord += 1 + gaps[i] as i64;
        model.insert_vertex(
            new_id[i],
            Coord::from_int(coord),
            scene.model.pred(v).unwrap().clone(),
        );
    }
    let index_of = |v: VertexId| old_ids.iter().position(|&w| w == v).unwrap();
    for edge in scene.model.edges() {
        model.insert_edge(edge.iter().map(|&v| new_id[index_of(v)]));
    }
    Scene {
        model,
        tuple: scene.tuple.iter().map(|&v| new_id[index_of(v)]).collect(),
        params: scene.params.iter().map(|&v| new_id[index_of(v)]).collect(),
    }
}

/// Every vertex tuple of the right length, kept iff its type matches.
fn naive_realizations(
    model: &IndexModel,
    target: &QfType,
    params: &[VertexId],
) -> Vec<Vec<VertexId>> {
    let ids = model.vertices_by_coord();
    let mut out: Vec<Vec<VertexId>> = Vec::new();
    let mut stack = vec![Vec::new()];
    while let Some(partial) = stack.pop() {
        if partial.len() == target.tuple_len() {
            if qf_type_of(model, &partial, params).as_ref() == Ok(target) {
                out.push(partial);
            }
            continue;
        }
        for &v in ids.iter().rev() {
            let mut next = partial.clone();
            next.push(v);
            stack.push(next);
        }
    }
    out.sort_by(|a, b| {
        let ka: Vec<_> = a.iter().map(|&v| model.coord(v).unwrap().clone()).collect();
        let kb: Vec<_> = b.iter().map(|&v| model.coord(v).unwrap().clone()).collect();
        ka.cmp(&kb).then_with(|| a.cmp(b))
    });
    out
}

/// Candidate coordinates for fresh points: enough distinct values in every
/// gap of the existing order, below it, and above it, to place `len` points
/// in any arrangement.
fn fresh_coordinate_grid(model: &IndexModel, len: usize) -> Vec<Coord> {
    let existing: Vec<Coord> = model
        .vertices_by_coord()
        .iter()
        .map(|&v| model.coord(v).unwrap().clone())
        .collect();
    let mut grid = Vec::new();
    if existing.is_empty() {
        for i in 0..len as i64 {
            grid.push(Coord::from_int(i));
        }
        return grid;
    }
    let mut below = existing[0].clone();
    for _ in 0..len {
        below = Coord::pred(&below);
        grid.push(below.clone());
    }
    for pair in existing.windows(2) {
        let mut hi = pair[1].clone();
        for _ in 0..len {
            hi = Coord::midpoint(&pair[0], &hi);
            grid.push(hi.clone());
        }
    }
    let mut above = existing.last().unwrap().clone();
    for _ in 0..len {
        above = Coord::succ(&above);
        grid.push(above.clone());
    }
    grid
}

#[derive(Clone, Copy)]
enum Placement {
    Existing(VertexId),
    Fresh(usize),
}

/// Exhaustive realizability: every assignment of the tuple's equality-class
/// representatives to an existing vertex or a fresh point on the coordinate
/// grid, with exactly the claimed new edges added, tried against the target.
fn brute_realizable(model: &IndexModel, target: &QfType, params: &[VertexId]) -> bool {
    let len = target.tuple_len();
    if target.param_len() != params.len() || target.class() != model.class() {
        return false;
    }
    let reps = target.equality_representatives();
    let rep_list: Vec<usize> = (0..len).filter(|&p| reps[p] == p).collect();
    let grid = fresh_coordinate_grid(model, len);
    let options: Vec<Placement> = model
        .vertices_by_coord()
        .into_iter()
        .map(Placement::Existing)
        .chain((0..grid.len()).map(Placement::Fresh))
        .collect();

    let mut assignment = vec![0usize; rep_list.len()];
    loop {
        let choices: Vec<Placement> = assignment.iter().map(|&c| options[c]).collect();
        if try_assignment(model, target, params, &rep_list, &reps, &choices, &grid) {
            return true;
        }
        let mut pos = 0;
        loop {
            if pos == assignment.len() {
                return false;
            }
            assignment[pos] += 1;
            if assignment[pos] < options.len() {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

fn try_assignment(
    model: &IndexModel,
    target: &QfType,
    params: &[VertexId],
    rep_list: &[usize],
    reps: &[usize],
    choices: &[Placement],
    grid: &[Coord],
) -> bool {
    let len = target.tuple_len();
    let coord_of = |c: &Placement| -> Coord {
        match c {
            Placement::Existing(v) => model.coord(*v).unwrap().clone(),
            Placement::Fresh(g) => grid[*g].clone(),
        }
    };
    let position_coord = |pos: usize| -> Coord {
        if pos < len {
            let slot = rep_list.iter().position(|&r| r == reps[pos]).unwrap();
            coord_of(&choices[slot])
        } else {
            model.coord(params[pos - len]).unwrap().clone()
        }
    };

    // Cheap pruning before building a model: the order pattern and the
    // predicate labels must already match the target.
    let total = target.total_positions();
    let coords: Vec<Coord> = (0..total).map(position_coord).collect();
    for i in 0..total {
        for j in (i + 1)..total {
            if coords[i].cmp(&coords[j]) != target.cmp_positions(i, j) {
                return false;
            }
        }
    }
    if model.class().has_predicates() {
        for (slot, &rep) in rep_list.iter().enumerate() {
            if let Placement::Existing(v) = choices[slot] {
                if model.pred(v).unwrap() != target.pred_at(rep).unwrap() {
                    return false;
                }
            }
        }
    }

    let mut extended = model.clone();
    let mut vertex_at: Vec<VertexId> = Vec::with_capacity(total);
    for pos in 0..total {
        if pos < len {
            let slot = rep_list.iter().position(|&r| r == reps[pos]).unwrap();
            match choices[slot] {
                Placement::Existing(v) => vertex_at.push(v),
                Placement::Fresh(g) => {
                    let already = (0..pos).find(|&q| reps[q] == reps[pos]);
                    match already {
                        Some(q) => vertex_at.push(vertex_at[q]),
                        None => {
                            let id = extended.fresh_vertex_id();
                            let pred = target
                                .pred_at(pos)
                                .cloned()
                                .unwrap_or_else(Coord::zero);
                            extended.insert_vertex(id, grid[g].clone(), pred);
                            vertex_at.push(id);
                        }
                    }
                }
            }
        } else {
            vertex_at.push(params[pos - len]);
        }
    }
    for subset in target.edge_subsets() {
        let verts: BTreeSet<VertexId> =
            subset.iter().map(|&p| vertex_at[p as usize]).collect();
        if verts.len() < subset.len() {
            return false;
        }
        if verts.iter().all(|&v| model.contains(v)) {
            // An extension is an induced superstructure: it cannot put a new
            // edge on old vertices.
            if !model.has_edge(&verts) {
                return false;
            }
        } else {
            extended.insert_edge(verts);
        }
    }
    if !extended.validate().is_ok() {
        return false;
    }
    let tuple: Vec<VertexId> = vertex_at[..len].to_vec();
    qf_type_of(&extended, &tuple, params).as_ref() == Ok(target)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn type_codes_survive_relabeling(
        scene in arb_scene(7),
        id_salt in proptest::collection::vec(any::<u32>(), 7),
        gaps in proptest::collection::vec(0..3u8, 7),
    ) {
        let original = qf_type_of(&scene.model, &scene.tuple, &scene.params).unwrap();
        let moved = relabel(&scene, &id_salt, &gaps);
        let transported = qf_type_of(&moved.model, &moved.tuple, &moved.params).unwrap();
        prop_assert_eq!(original.code(), transported.code());
    }

    #[test]
    fn enumeration_matches_the_naive_scan(scene in arb_scene(6)) {
        let target = qf_type_of(&scene.model, &scene.tuple, &scene.params).unwrap();
        let fast = enumerate_realizations(&scene.model, &target, &scene.params).unwrap();
        let naive = naive_realizations(&scene.model, &target, &scene.params);
        let fast_set: BTreeSet<&Vec<VertexId>> = fast.iter().collect();
        let naive_set: BTreeSet<&Vec<VertexId>> = naive.iter().collect();
        prop_assert_eq!(fast_set, naive_set);
        prop_assert!(fast.contains(&scene.tuple));
    }

    #[test]
    fn realizability_matches_exhaustive_search((home, away) in arb_scene_pair(5)) {
        let k = home.params.len().min(away.params.len());
        let params = &home.params[..k];

        let self_target = qf_type_of(&home.model, &home.tuple, params).unwrap();
        prop_assert!(realizable(&home.model, &self_target, params).unwrap());
        prop_assert!(brute_realizable(&home.model, &self_target, params));

        let cross_target = qf_type_of(&away.model, &away.tuple, &away.params[..k]).unwrap();
        prop_assert_eq!(
            realizable(&home.model, &cross_target, params).unwrap(),
            brute_realizable(&home.model, &cross_target, params),
            "disagree on {:?}",
            cross_target
        );
    }

    #[test]
    fn extension_realizes_and_validates(scene in arb_scene(6)) {
        let target = qf_type_of(&scene.model, &scene.tuple, &scene.params).unwrap();
        prop_assert!(realizable(&scene.model, &target, &scene.params).unwrap());
        let (extended, fresh_tuple) =
            extend_realizing(&scene.model, &target, &scene.params).unwrap();
        prop_assert!(extended.validate().is_ok());
        let realized = qf_type_of(&extended, &fresh_tuple, &scene.params).unwrap();
        prop_assert_eq!(realized.code(), target.code());
        let all = enumerate_realizations(&extended, &target, &scene.params).unwrap();
        prop_assert!(all.contains(&fresh_tuple));
        prop_assert!(
            extended.vertex_count() <= scene.model.vertex_count() + target.tuple_len()
        );
    }
}
