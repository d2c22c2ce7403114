//! Isometric cycle covers of butterflies: construction, verification,
//! gp upper bounds derived from verified covers, and exact minimum covers of
//! tiny graphs.
//!
//! The butterfly cover uses cycles made of four monotone level-0/level-r
//! paths. A cycle is fixed by a level-0 pair whose rows differ only in bit r
//! and a level-r pair whose rows differ only in bit 1; both pairs sit at
//! graph distance `2r`, i.e. antipodally on a cycle of length `4r`. The
//! constructor matches level-0 pairs to level-r pairs by first-fit
//! backtracking so that the chosen cycles are edge-disjoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::{
    is_isometric_cycle, is_isometric_path, validate_cycle, validate_path, DistanceMatrix,
};
use crate::graph::{bit_mask, Graph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverKind {
    CycleCover,
    PathCover,
}

/// Cycles (in cyclic order) or paths claimed to cover a graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCover {
    pub graph_ref: String,
    pub kind: CoverKind,
    pub cycles: Vec<Vec<VertexId>>,
}

impl CycleCover {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }
}

/// Check outcomes. Butterfly-only checks are `None` for generic covers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverFlags {
    pub sequences_valid: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lengths_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub count_ok: Option<bool>,
    pub edge_disjoint: bool,
    pub edge_partition: bool,
    pub all_isometric: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub level0_pairs_ok: Option<bool>,
    pub vertex_cover: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub incidence_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverFailure {
    pub check: String,
    pub cycle: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverReport {
    pub graph_ref: String,
    pub kind: CoverKind,
    pub passed: bool,
    pub flags: CoverFlags,
    pub first_failure: Option<CoverFailure>,
    /// Number of cover members containing each vertex.
    pub incidence: Vec<usize>,
}

impl CoverReport {
    pub fn passed(&self) -> bool {
        self.passed
    }
}

/// Records the first failing check.
struct Checker {
    failure: Option<CoverFailure>,
}

impl Checker {
    fn note(
        &mut self,
        ok: bool,
        check: &str,
        cycle: Option<usize>,
        detail: impl FnOnce() -> String,
    ) -> bool {
        if !ok && self.failure.is_none() {
            self.failure = Some(CoverFailure {
                check: check.to_string(),
                cycle,
                detail: detail(),
            });
        }
        ok
    }
}

fn check_structure(g: &Graph, cover: &CycleCover) -> Result<()> {
    if cover.graph_ref != g.reference() {
        return Err(Error::InvalidParameter(format!(
            "cover belongs to `{}`, not `{}`",
            cover.graph_ref,
            g.reference()
        )));
    }
    let min_len = match cover.kind {
        CoverKind::CycleCover => 3,
        CoverKind::PathCover => 1,
    };
    for (index, seq) in cover.cycles.iter().enumerate() {
        if seq.len() < min_len {
            return Err(Error::InvalidCover {
                index,
                detail: format!("{} vertices, need at least {min_len}", seq.len()),
            });
        }
        if let Some(&v) = seq.iter().find(|&&v| v >= g.num_vertices()) {
            return Err(Error::InvalidCover {
                index,
                detail: format!("vertex {v} out of range"),
            });
        }
    }
    Ok(())
}

fn sequence_edges(
    seq: &[VertexId],
    kind: CoverKind,
) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
    let closing = match kind {
        CoverKind::CycleCover => seq.len(),
        CoverKind::PathCover => seq.len() - 1,
    };
    (0..closing).map(move |i| {
        let (u, v) = (seq[i], seq[(i + 1) % seq.len()]);
        (u.min(v), u.max(v))
    })
}

fn edge_index(g: &Graph, edge: (VertexId, VertexId)) -> Option<usize> {
    g.edges().binary_search(&edge).ok()
}

/// Checks that apply to any cover: validity, isometry, vertex coverage and
/// edge usage. Returns the flags and per-vertex incidence.
fn generic_checks(
    g: &Graph,
    dm: &DistanceMatrix,
    cover: &CycleCover,
    checker: &mut Checker,
    edges_required: bool,
) -> Result<(CoverFlags, Vec<usize>)> {
    let kind = cover.kind;
    let mut sequences_valid = true;
    let mut valid = Vec::with_capacity(cover.len());
    for (i, seq) in cover.cycles.iter().enumerate() {
        let outcome = match kind {
            CoverKind::CycleCover => validate_cycle(g, seq),
            CoverKind::PathCover => validate_path(g, seq),
        };
        let ok = outcome.is_ok();
        sequences_valid &= checker.note(ok, "sequences_valid", Some(i), || {
            outcome.unwrap_err().to_string()
        });
        valid.push(ok);
    }

    let mut used = vec![0usize; g.num_edges()];
    let mut edge_disjoint = true;
    for (i, seq) in cover.cycles.iter().enumerate() {
        for edge in sequence_edges(seq, kind) {
            if let Some(e) = edge_index(g, edge) {
                used[e] += 1;
                let ok = used[e] == 1;
                edge_disjoint &= ok;
                if edges_required {
                    checker.note(ok, "edge_disjoint", Some(i), || {
                        format!("edge ({}, {}) used more than once", edge.0, edge.1)
                    });
                }
            }
        }
    }
    let unused = used.iter().position(|&c| c == 0);
    let edge_partition = edge_disjoint && sequences_valid && unused.is_none();
    if edges_required {
        if let Some(e) = unused {
            let (u, v) = g.edges()[e];
            checker.note(false, "edge_partition", None, || {
                format!("edge ({u}, {v}) not covered")
            });
        }
    }

    let mut all_isometric = true;
    for (i, seq) in cover.cycles.iter().enumerate() {
        if !valid[i] {
            all_isometric = false;
            continue;
        }
        let (ok, detail) = match kind {
            CoverKind::CycleCover => {
                let check = is_isometric_cycle(g, dm, seq)?;
                (check.isometric, check.violation)
            }
            CoverKind::PathCover => (is_isometric_path(g, dm, seq)?, None),
        };
        all_isometric &= checker.note(ok, "all_isometric", Some(i), || match detail {
            Some((u, v)) => format!("pair ({u}, {v}) is closer in the graph than along the cycle"),
            None => "not a geodesic".to_string(),
        });
    }

    let mut incidence = vec![0usize; g.num_vertices()];
    for seq in &cover.cycles {
        let mut members = seq.clone();
        members.sort_unstable();
        members.dedup();
        for v in members {
            incidence[v] += 1;
        }
    }
    let missing = incidence.iter().position(|&c| c == 0);
    let flags = CoverFlags {
        sequences_valid,
        lengths_ok: None,
        count_ok: None,
        edge_disjoint,
        edge_partition,
        all_isometric,
        level0_pairs_ok: None,
        vertex_cover: missing.is_none(),
        incidence_ok: None,
    };
    Ok((flags, incidence))
}

/// Verifies a cover of any graph. It passes when every member is a valid
/// isometric cycle (or geodesic path) and every vertex is covered; edge
/// flags are reported but not required.
pub fn verify_cover(g: &Graph, dm: &DistanceMatrix, cover: &CycleCover) -> Result<CoverReport> {
    check_structure(g, cover)?;
    let mut checker = Checker { failure: None };
    let (flags, incidence) = generic_checks(g, dm, cover, &mut checker, false)?;
    if let Some(v) = incidence.iter().position(|&c| c == 0) {
        checker.note(false, "vertex_cover", None, || {
            format!("vertex {v} not covered")
        });
    }
    let passed = flags.sequences_valid && flags.all_isometric && flags.vertex_cover;
    let first_failure = if passed { None } else { checker.failure };
    Ok(CoverReport {
        graph_ref: cover.graph_ref.clone(),
        kind: cover.kind,
        passed,
        flags,
        first_failure,
        incidence,
    })
}

/// Verifies the edge-disjoint isometric cycle cover of `BF(r)`: valid cycles
/// of length `4r`, `2^(r-1)` of them, partitioning the edges, isometric,
/// two level-0 vertices each, and every degree-2 vertex in exactly one cycle,
/// every degree-4 vertex in exactly two.
pub fn verify_bf_cover(g: &Graph, dm: &DistanceMatrix, cover: &CycleCover) -> Result<CoverReport> {
    let r = g.butterfly_dim()?;
    if r < 2 {
        return Err(Error::InvalidParameter(format!(
            "butterfly cover needs r >= 2, got {r}"
        )));
    }
    if cover.kind != CoverKind::CycleCover {
        return Err(Error::InvalidParameter("expected a cycle cover".into()));
    }
    check_structure(g, cover)?;
    let width = 1usize << r;
    let mut checker = Checker { failure: None };

    // Validity first, so it is reported ahead of the butterfly-specific checks.
    for (i, seq) in cover.cycles.iter().enumerate() {
        if let Err(e) = validate_cycle(g, seq) {
            checker.note(false, "sequences_valid", Some(i), || e.to_string());
        }
    }
    let mut lengths_ok = true;
    for (i, seq) in cover.cycles.iter().enumerate() {
        lengths_ok &= checker.note(seq.len() == 4 * r, "lengths_ok", Some(i), || {
            format!("length {} instead of {}", seq.len(), 4 * r)
        });
    }
    let count_ok = checker.note(cover.len() == width / 2, "count_ok", None, || {
        format!("{} cycles instead of {}", cover.len(), width / 2)
    });

    let (mut flags, incidence) = generic_checks(g, dm, cover, &mut checker, true)?;

    let mut level0_pairs_ok = true;
    for (i, seq) in cover.cycles.iter().enumerate() {
        let level0 = seq.iter().filter(|&&v| v < width).count();
        level0_pairs_ok &= checker.note(level0 == 2, "level0_pairs_ok", Some(i), || {
            format!("{level0} level-0 vertices instead of 2")
        });
    }
    if let Some(v) = incidence.iter().position(|&c| c == 0) {
        checker.note(false, "vertex_cover", None, || {
            format!("vertex {v} not covered")
        });
    }
    let mut incidence_ok = true;
    for (v, &count) in incidence.iter().enumerate() {
        let expected = if g.degree(v) == 2 { 1 } else { 2 };
        incidence_ok &= checker.note(count == expected, "incidence_ok", None, || {
            format!("vertex {v} lies on {count} cycles instead of {expected}")
        });
    }

    flags.lengths_ok = Some(lengths_ok);
    flags.count_ok = Some(count_ok);
    flags.level0_pairs_ok = Some(level0_pairs_ok);
    flags.incidence_ok = Some(incidence_ok);
    let passed = flags.sequences_valid
        && lengths_ok
        && count_ok
        && flags.edge_disjoint
        && flags.edge_partition
        && flags.all_isometric
        && level0_pairs_ok
        && flags.vertex_cover
        && incidence_ok;
    Ok(CoverReport {
        graph_ref: cover.graph_ref.clone(),
        kind: cover.kind,
        passed,
        flags,
        first_failure: if passed { None } else { checker.failure },
        incidence,
    })
}

/// Vertices of the unique monotone path from `[from_row, 0]` to `[to_row, r]`.
fn monotone_path(r: usize, from_row: usize, to_row: usize) -> Vec<VertexId> {
    let width = 1usize << r;
    let mut row = from_row;
    let mut path = Vec::with_capacity(r + 1);
    path.push(row);
    for level in 1..=r {
        let mask = bit_mask(level, r);
        row = (row & !mask) | (to_row & mask);
        path.push(level * width + row);
    }
    path
}

/// The candidate cycle through level-0 rows `low`, `low ^ a_r` and level-r
/// rows `high`, `high ^ a_1`, starting at `[low, 0]` and climbing first.
pub fn candidate_cycle(r: usize, low: usize, high: usize) -> Vec<VertexId> {
    let low2 = low ^ bit_mask(r, r);
    let high2 = high ^ bit_mask(1, r);
    let mut cycle = monotone_path(r, low, high);
    let mut down = monotone_path(r, low2, high);
    down.reverse();
    cycle.extend_from_slice(&down[1..]);
    cycle.extend_from_slice(&monotone_path(r, low2, high2)[1..]);
    let mut back = monotone_path(r, low, high2);
    back.reverse();
    cycle.extend_from_slice(&back[1..r]);
    cycle
}

/// Default node budget for [`construct_bf_cycle_cover`].
pub const DEFAULT_COVER_BUDGET: u64 = 1_000_000;

/// Builds an edge-disjoint isometric cycle cover of `BF(r)` and checks it
/// with [`verify_bf_cover`] before returning it.
pub fn construct_bf_cycle_cover(
    g: &Graph,
    dm: &DistanceMatrix,
    node_budget: u64,
) -> Result<CycleCover> {
    let r = g.butterfly_dim()?;
    if r < 2 {
        return Err(Error::InvalidParameter(format!(
            "butterfly cover needs r >= 2, got {r}"
        )));
    }
    if node_budget == 0 {
        return Err(Error::InvalidParameter(
            "node budget must be positive".into(),
        ));
    }
    let width = 1usize << r;
    // Pair representatives: bit r clear at level 0, bit 1 clear at level r.
    let lows: Vec<usize> = (0..width).filter(|row| row & bit_mask(r, r) == 0).collect();
    let highs: Vec<usize> = (0..width).filter(|row| row & bit_mask(1, r) == 0).collect();

    let mut candidates = Vec::with_capacity(lows.len());
    for &low in &lows {
        let mut row = Vec::with_capacity(highs.len());
        for &high in &highs {
            let cycle = candidate_cycle(r, low, high);
            let isometric = is_isometric_cycle(g, dm, &cycle)?.isometric;
            let edges: Vec<usize> = sequence_edges(&cycle, CoverKind::CycleCover)
                .map(|e| edge_index(g, e).expect("candidate cycles follow graph edges"))
                .collect();
            row.push(isometric.then_some((cycle, edges)));
        }
        candidates.push(row);
    }

    let mut state = CoverSearch {
        candidates: &candidates,
        used_edges: vec![false; g.num_edges()],
        used_high: vec![false; highs.len()],
        choice: Vec::with_capacity(lows.len()),
        nodes: 0,
        budget: node_budget,
    };
    match state.assign(0) {
        Some(true) => {}
        Some(false) => {
            return Err(Error::Inconclusive(format!(
                "no edge partition within the candidate family for r = {r}"
            )))
        }
        None => {
            return Err(Error::Inconclusive(format!(
                "node budget {node_budget} exhausted for r = {r}"
            )))
        }
    }
    let cycles = state
        .choice
        .iter()
        .enumerate()
        .map(|(i, &j)| candidates[i][j].as_ref().unwrap().0.clone())
        .collect();
    let cover = CycleCover {
        graph_ref: g.reference(),
        kind: CoverKind::CycleCover,
        cycles,
    };
    let report = verify_bf_cover(g, dm, &cover)?;
    if !report.passed {
        return Err(Error::Inconclusive(format!(
            "constructed cover failed verification: {:?}",
            report.first_failure
        )));
    }
    Ok(cover)
}

type Candidate = Option<(Vec<VertexId>, Vec<usize>)>;

struct CoverSearch<'a> {
    candidates: &'a [Vec<Candidate>],
    used_edges: Vec<bool>,
    used_high: Vec<bool>,
    choice: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl CoverSearch<'_> {
    /// `Some(found)` on completion, `None` once the budget runs out.
    fn assign(&mut self, low: usize) -> Option<bool> {
        if low == self.candidates.len() {
            return Some(true);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        for high in 0..self.used_high.len() {
            if self.used_high[high] {
                continue;
            }
            let Some((_, edges)) = &self.candidates[low][high] else {
                continue;
            };
            if edges.iter().any(|&e| self.used_edges[e]) {
                continue;
            }
            for &e in edges {
                self.used_edges[e] = true;
            }
            self.used_high[high] = true;
            self.choice.push(high);
            match self.assign(low + 1) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            self.choice.pop();
            self.used_high[high] = false;
            for &e in edges {
                self.used_edges[e] = false;
            }
        }
        Some(false)
    }
}

/// Upper bounds on the gp-number certified by a verified cover: three per
/// isometric cycle, two per isometric path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GpBounds {
    pub from_ic: Option<usize>,
    pub from_ip: Option<usize>,
}

pub fn gp_upper_bounds(cover: &CycleCover, report: &CoverReport) -> Result<GpBounds> {
    let matches = report.graph_ref == cover.graph_ref
        && report.kind == cover.kind
        && report.flags.sequences_valid
        && report.flags.all_isometric
        && report.flags.vertex_cover;
    if !report.passed || !matches {
        return Err(Error::UnverifiedCover);
    }
    let k = cover.len();
    Ok(match cover.kind {
        CoverKind::CycleCover => GpBounds {
            from_ic: Some(3 * k),
            from_ip: None,
        },
        CoverKind::PathCover => GpBounds {
            from_ic: None,
            from_ip: Some(2 * k),
        },
    })
}

/// Vertex limit for [`min_cover_exact`].
pub const MIN_COVER_MAX_VERTICES: usize = 16;

/// Minimum number of isometric cycles (or paths) covering every vertex,
/// found by enumeration and exact set cover. `None` when no cover of size at
/// most `size_cap` exists.
pub fn min_cover_exact(
    g: &Graph,
    dm: &DistanceMatrix,
    kind: CoverKind,
    size_cap: usize,
) -> Result<Option<usize>> {
    let n = g.num_vertices();
    if n > MIN_COVER_MAX_VERTICES {
        return Err(Error::RefusedTooLarge {
            n,
            limit: MIN_COVER_MAX_VERTICES,
        });
    }
    if n == 0 {
        return Ok(Some(0));
    }
    let mut sets = match kind {
        CoverKind::CycleCover => isometric_cycle_sets(g, dm),
        CoverKind::PathCover => geodesic_sets(g, dm),
    };
    sets.sort_unstable();
    sets.dedup();
    // Sets contained in another set never help.
    let maximal: Vec<u32> = sets
        .iter()
        .copied()
        .filter(|&s| !sets.iter().any(|&t| t != s && s & t == s))
        .collect();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut best = size_cap + 1;
    set_cover(&maximal, full, 0, 0, &mut best);
    Ok((best <= size_cap).then_some(best))
}

fn set_cover(sets: &[u32], full: u32, covered: u32, depth: usize, best: &mut usize) {
    if covered == full {
        *best = (*best).min(depth);
        return;
    }
    let largest = sets
        .iter()
        .map(|s| (s & !covered).count_ones())
        .max()
        .unwrap_or(0);
    if largest == 0 {
        return;
    }
    let remaining = (full & !covered).count_ones();
    if depth + remaining.div_ceil(largest) as usize >= *best {
        return;
    }
    // Branch on the uncovered vertex with the fewest covering sets.
    let uncovered = full & !covered;
    let mut target = None;
    for v in 0..32 {
        if uncovered >> v & 1 == 1 {
            let count = sets.iter().filter(|&&s| s >> v & 1 == 1).count();
            if target.is_none_or(|(c, _)| count < c) {
                target = Some((count, v));
            }
        }
    }
    let (count, v) = target.unwrap();
    if count == 0 {
        return;
    }
    let mut options: Vec<u32> = sets.iter().copied().filter(|&s| s >> v & 1 == 1).collect();
    options.sort_by_key(|&s| (std::cmp::Reverse((s & !covered).count_ones()), s));
    for s in options {
        set_cover(sets, full, covered | s, depth + 1, best);
    }
}

fn mask_of(vertices: &[VertexId]) -> u32 {
    vertices.iter().fold(0, |m, &v| m | 1 << v)
}

/// Vertex sets of all isometric cycles (graph must have at most 32 vertices).
fn isometric_cycle_sets(g: &Graph, dm: &DistanceMatrix) -> Vec<u32> {
    let max_len = 2 * dm.diameter() as usize + 1;
    let mut found = Vec::new();
    let mut path = Vec::new();
    for start in 0..g.num_vertices() {
        path.clear();
        path.push(start);
        extend_cycles(g, dm, &mut path, max_len, &mut found);
    }
    found
}

fn extend_cycles(
    g: &Graph,
    dm: &DistanceMatrix,
    path: &mut Vec<VertexId>,
    limit: usize,
    found: &mut Vec<u32>,
) {
    let start = path[0];
    let last = *path.last().unwrap();
    let steps = path.len() - 1;
    // A prefix that is not a geodesic can only sit inside a cycle shorter
    // than twice its length.
    let limit = if dm.raw(start, last) as usize != steps {
        limit.min(2 * steps - 1)
    } else {
        limit
    };
    for &next in g.neighbors(last) {
        if next == start && path.len() >= 3 && path[1] < last && path.len() <= limit {
            if is_isometric_cycle(g, dm, path)
                .map(|c| c.isometric)
                .unwrap_or(false)
            {
                found.push(mask_of(path));
            }
        } else if next > start && !path.contains(&next) && path.len() < limit {
            path.push(next);
            extend_cycles(g, dm, path, limit, found);
            path.pop();
        }
    }
}

/// Vertex sets of all geodesics, including single vertices.
fn geodesic_sets(g: &Graph, dm: &DistanceMatrix) -> Vec<u32> {
    let n = g.num_vertices();
    let mut found: Vec<u32> = (0..n).map(|v| 1 << v).collect();
    for u in 0..n {
        for v in u + 1..n {
            if dm.get(u, v).is_some() {
                let mut path = vec![u];
                extend_geodesics(g, dm, v, &mut path, &mut found);
            }
        }
    }
    found
}

fn extend_geodesics(
    g: &Graph,
    dm: &DistanceMatrix,
    target: VertexId,
    path: &mut Vec<VertexId>,
    found: &mut Vec<u32>,
) {
    let last = *path.last().unwrap();
    if last == target {
        found.push(mask_of(path));
        return;
    }
    let remaining = dm.raw(last, target);
    for &next in g.neighbors(last) {
        if dm.raw(next, target) + 1 == remaining {
            path.push(next);
            extend_geodesics(g, dm, target, path, found);
            path.pop();
        }
    }
}
