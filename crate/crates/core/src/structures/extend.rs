//! Realizations of qf-types: enumerating realizations inside a model,
//! deciding whether a type is realizable in some class extension, and
//! materializing such an extension.

use std::collections::BTreeSet;

use super::{qf_type_of, IndexModel, QfType, StructureError, VertexId};
use crate::rational::{least_unused_rational, Coord};

fn check_compatible(
    model: &IndexModel,
    target: &QfType,
    params: &[VertexId],
) -> Result<(), StructureError> {
    if target.class() != model.class() {
        return Err(StructureError::ClassMismatch(model.class(), target.class()));
    }
    let defects = target.well_formedness_violations();
    if !defects.is_empty() {
        return Err(StructureError::MalformedType(defects.join("; ")));
    }
    if target.param_len() != params.len() {
        return Err(StructureError::InvalidExtension(format!(
            "target expects {} parameters, got {}",
            target.param_len(),
            params.len()
        )));
    }
    for &p in params {
        if !model.contains(p) {
            return Err(StructureError::UnknownVertex(p));
        }
    }
    Ok(())
}

fn param_block_matches(
    model: &IndexModel,
    target: &QfType,
    params: &[VertexId],
) -> Result<bool, StructureError> {
    let actual = qf_type_of(model, &[], params)?;
    let offset = target.tuple_len();
    for i in 0..params.len() {
        for j in (i + 1)..params.len() {
            if actual.cmp_positions(i, j) != target.cmp_positions(offset + i, offset + j) {
                return Ok(false);
            }
        }
        if actual.pred_at(i) != target.pred_at(offset + i) {
            return Ok(false);
        }
    }
    if model.class().edge_arity().is_some() {
        let claimed: BTreeSet<Vec<u16>> = target
            .edge_subsets()
            .filter(|e| e.iter().all(|&p| (p as usize) >= offset))
            .map(|e| e.iter().map(|&p| p - offset as u16).collect())
            .collect();
        let have: BTreeSet<Vec<u16>> = actual.edge_subsets().cloned().collect();
        if claimed != have {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All tuples of model vertices realizing `target` over `params`, in
/// coordinate-lexicographic order.
pub fn enumerate_realizations(
    model: &IndexModel,
    target: &QfType,
    params: &[VertexId],
) -> Result<Vec<Vec<VertexId>>, StructureError> {
    check_compatible(model, target, params)?;
    let tuple_len = target.tuple_len();
    let candidates = model.vertices_by_coord();
    let mut out = Vec::new();
    let mut partial: Vec<VertexId> = Vec::with_capacity(tuple_len);

    fn fits(
        model: &IndexModel,
        target: &QfType,
        params: &[VertexId],
        partial: &[VertexId],
        v: VertexId,
    ) -> bool {
        let pos = partial.len();
        if let Some(p) = target.pred_at(pos) {
            if model.pred(v).unwrap() != p {
                return false;
            }
        }
        let coord = model.coord(v).unwrap();
        for (j, &w) in partial.iter().enumerate() {
            if coord.cmp(model.coord(w).unwrap()) != target.cmp_positions(pos, j) {
                return false;
            }
        }
        for (j, &w) in params.iter().enumerate() {
            let jpos = target.tuple_len() + j;
            if coord.cmp(model.coord(w).unwrap()) != target.cmp_positions(pos, jpos) {
                return false;
            }
        }
        true
    }

    fn recurse(
        model: &IndexModel,
        target: &QfType,
        params: &[VertexId],
        candidates: &[VertexId],
        partial: &mut Vec<VertexId>,
        out: &mut Vec<Vec<VertexId>>,
    ) {
        if partial.len() == target.tuple_len() {
            if let Ok(ty) = qf_type_of(model, partial, params) {
                if ty == *target {
                    out.push(partial.clone());
                }
            }
            return;
        }
        for &v in candidates {
            if fits(model, target, params, partial, v) {
                partial.push(v);
                recurse(model, target, params, candidates, partial, out);
                partial.pop();
            }
        }
    }

    recurse(model, target, params, &candidates, &mut partial, &mut out);
    Ok(out)
}

/// Whether some extension of `model` inside its class realizes `target` over
/// `params`. Classes here are closed under free amalgamation, so this reduces
/// to attempting the canonical fresh-vertex extension and checking validity.
pub fn realizable(
    model: &IndexModel,
    target: &QfType,
    params: &[VertexId],
) -> Result<bool, StructureError> {
    check_compatible(model, target, params)?;
    if !param_block_matches(model, target, params)? {
        return Ok(false);
    }
    match build_extension(model, target, params) {
        Ok(_) => Ok(true),
        Err(StructureError::NotRealizable) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Extend `model` with fresh vertices so that the returned tuple realizes
/// `target` over `params`. Tuple positions forced equal to a parameter reuse
/// that parameter; every other equality class of positions gets one fresh
/// vertex, placed at a deterministic unused coordinate in its order slot.
pub fn extend_realizing(
    model: &IndexModel,
    target: &QfType,
    params: &[VertexId],
) -> Result<(IndexModel, Vec<VertexId>), StructureError> {
    check_compatible(model, target, params)?;
    if !param_block_matches(model, target, params)? {
        return Err(StructureError::NotRealizable);
    }
    build_extension(model, target, params)
}

fn build_extension(
    model: &IndexModel,
    target: &QfType,
    params: &[VertexId],
) -> Result<(IndexModel, Vec<VertexId>), StructureError> {
    let tuple_len = target.tuple_len();
    let reps = target.equality_representatives();
    let mut extended = model.clone();
    let mut assigned: Vec<Option<VertexId>> = vec![None; tuple_len];

    // Positions pinned to a parameter take that vertex.
    for pos in 0..tuple_len {
        for (j, &p) in params.iter().enumerate() {
            if target.positions_equal(pos, tuple_len + j) {
                assigned[pos] = Some(p);
                break;
            }
        }
    }

    // Representatives of unpinned equality classes, in coordinate order.
    let mut fresh_reps: Vec<usize> = (0..tuple_len)
        .filter(|&pos| reps[pos] == pos && assigned[pos].is_none())
        .collect();
    fresh_reps.sort_by(|&a, &b| target.cmp_positions(a, b));

    let mut used: BTreeSet<Coord> = extended
        .vertices_by_coord()
        .iter()
        .map(|&v| extended.coord(v).unwrap().clone())
        .collect();
    let mut placed: Vec<(usize, Coord)> = Vec::new();

    for &rep in &fresh_reps {
        let mut lo: Option<Coord> = None;
        let mut hi: Option<Coord> = None;
        let mut bound = |coord: Coord, ord: std::cmp::Ordering| match ord {
            std::cmp::Ordering::Greater => {
                if lo.as_ref().map_or(true, |l| coord > *l) {
                    lo = Some(coord);
                }
            }
            std::cmp::Ordering::Less => {
                if hi.as_ref().map_or(true, |h| coord < *h) {
                    hi = Some(coord);
                }
            }
            std::cmp::Ordering::Equal => {}
        };
        for (j, &p) in params.iter().enumerate() {
            let coord = extended.coord(p).unwrap().clone();
            bound(coord, target.cmp_positions(rep, tuple_len + j));
        }
        for (other, coord) in &placed {
            bound(coord.clone(), target.cmp_positions(rep, *other));
        }
        let coord = pick_coord(lo.as_ref(), hi.as_ref(), &used);
        used.insert(coord.clone());
        placed.push((rep, coord.clone()));
        let id = extended.fresh_vertex_id();
        let pred = target.pred_at(rep).cloned().unwrap_or_else(Coord::zero);
        extended.insert_vertex(id, coord, pred);
        assigned[rep] = Some(id);
    }

    let tuple: Vec<VertexId> = (0..tuple_len)
        .map(|pos| assigned[reps[pos]].expect("every class is assigned"))
        .collect();

    for edge in target.edge_subsets() {
        if edge.iter().all(|&p| (p as usize) >= tuple_len) {
            continue;
        }
        let verts: BTreeSet<VertexId> = edge
            .iter()
            .map(|&p| {
                let p = p as usize;
                if p < tuple_len {
                    tuple[p]
                } else {
                    params[p - tuple_len]
                }
            })
            .collect();
        extended.insert_edge(verts);
    }

    if !extended.validate().is_ok() {
        return Err(StructureError::NotRealizable);
    }
    if qf_type_of(&extended, &tuple, params)? != *target {
        return Err(StructureError::NotRealizable);
    }
    Ok((extended, tuple))
}

fn pick_coord(lo: Option<&Coord>, hi: Option<&Coord>, used: &BTreeSet<Coord>) -> Coord {
    match (lo, hi) {
        (None, None) => least_unused_rational(used),
        (Some(lo), None) => {
            let mut c = Coord::succ(lo);
            while used.contains(&c) {
                c = Coord::succ(&c);
            }
            c
        }
        (None, Some(hi)) => {
            let mut c = Coord::pred(hi);
            while used.contains(&c) {
                c = Coord::pred(&c);
            }
            c
        }
        (Some(lo), Some(hi)) => {
            let mut c = Coord::midpoint(lo, hi);
            while used.contains(&c) {
                c = Coord::midpoint(lo, &c);
            }
            c
        }
    }
}
