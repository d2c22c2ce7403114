//! General position sets: verification, the explicit butterfly family, a
//! greedy warm start and an exact branch-and-bound solver.
//!
//! The exact solver treats the problem as a maximum independent set in the
//! 3-uniform hypergraph whose hyperedges are the collinear triples of the
//! candidate pool.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::{collinear_unchecked, middle_of, DistanceMatrix};
use crate::graph::{bit_mask, Graph, VertexId};

/// Where a vertex set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// The explicit three-family butterfly construction.
    Constructed,
    SolverExact,
    SolverLowerBound,
    User,
}

/// A set of distinct vertices of a named graph, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSet {
    pub graph_ref: String,
    ids: Vec<VertexId>,
    pub provenance: Provenance,
}

impl VertexSet {
    pub fn new(
        graph_ref: impl Into<String>,
        mut ids: Vec<VertexId>,
        provenance: Provenance,
    ) -> Result<Self> {
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!(
                "vertex {} listed twice",
                w[0]
            )));
        }
        Ok(VertexSet {
            graph_ref: graph_ref.into(),
            ids,
            provenance,
        })
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.ids.binary_search(&v).is_ok()
    }

    /// Checks the set against a graph: matching reference, ids in range,
    /// no duplicates (re-checked because deserialization bypasses `new`).
    pub fn validate_for(&self, g: &Graph) -> Result<()> {
        if self.graph_ref != g.reference() {
            return Err(Error::InvalidParameter(format!(
                "set belongs to `{}`, not `{}`",
                self.graph_ref,
                g.reference()
            )));
        }
        if let Some(&v) = self.ids.iter().find(|&&v| v >= g.num_vertices()) {
            return Err(Error::InvalidParameter(format!("vertex {v} out of range")));
        }
        if self.ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "ids must be sorted and distinct".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GpStatus {
    VerifiedGeneralPosition,
    Violation,
}

/// Three set members on a common geodesic; `y` lies between `x` and `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollinearTriple {
    pub x: VertexId,
    pub y: VertexId,
    pub z: VertexId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GpWitness {
    pub status: GpStatus,
    pub triple: Option<CollinearTriple>,
}

impl GpWitness {
    pub fn is_verified(&self) -> bool {
        self.status == GpStatus::VerifiedGeneralPosition
    }
}

/// Checks every 3-subset of `s`, reporting the lexicographically first
/// collinear one.
pub fn verify_general_position(g: &Graph, dm: &DistanceMatrix, s: &VertexSet) -> Result<GpWitness> {
    s.validate_for(g)?;
    let ids = s.ids();
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            if dm.get(a, b).is_none() {
                return Err(Error::NotConnected(a, b));
            }
        }
    }
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            for k in j + 1..ids.len() {
                let triple = [ids[i], ids[j], ids[k]];
                if let Some(y) = middle_of(dm, triple)? {
                    let mut ends = triple.iter().copied().filter(|&v| v != y);
                    let (x, z) = (ends.next().unwrap(), ends.next().unwrap());
                    return Ok(GpWitness {
                        status: GpStatus::Violation,
                        triple: Some(CollinearTriple { x, y, z }),
                    });
                }
            }
        }
    }
    Ok(GpWitness {
        status: GpStatus::VerifiedGeneralPosition,
        triple: None,
    })
}

/// The explicit general position set of `BF(r)` of size `2^r + 2^(r-2)`:
///
/// * level 0, rows ending in `a_r = 1`;
/// * level r, rows starting with `a_1 = 1`;
/// * level 1, rows with `a_1 = 0` and `a_r = 0`.
pub fn construct_bf_gp_set(r: usize) -> Result<VertexSet> {
    if !(2..=crate::graph::MAX_BUTTERFLY_DIM).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "construction needs 2 <= r <= {}, got {r}",
            crate::graph::MAX_BUTTERFLY_DIM
        )));
    }
    let width = 1usize << r;
    let (first, last) = (bit_mask(1, r), bit_mask(r, r));
    let level0 = (0..width).filter(|row| row & last != 0);
    let level_r = (0..width)
        .filter(|row| row & first != 0)
        .map(|row| r * width + row);
    let level1 = (0..width)
        .filter(|row| row & first == 0 && row & last == 0)
        .map(|row| width + row);
    let ids = level0.chain(level_r).chain(level1).collect();
    VertexSet::new(format!("butterfly-{r}"), ids, Provenance::Constructed)
}

/// Vertex order for [`greedy_gp_lower_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyOrder {
    /// Ascending degree, ties by id.
    Degree,
    Id,
    /// Seeded shuffle.
    Random(u64),
}

/// Scans vertices in `order`, keeping each one that forms no collinear
/// triple with two already kept. The result is maximal by inclusion.
pub fn greedy_gp_lower_bound(g: &Graph, dm: &DistanceMatrix, order: GreedyOrder) -> VertexSet {
    let ids = greedy_over(dm, ordered(g, (0..g.num_vertices()).collect(), order));
    VertexSet::new(g.reference(), ids, Provenance::SolverLowerBound)
        .expect("greedy picks distinct vertices")
}

fn ordered(g: &Graph, mut vertices: Vec<VertexId>, order: GreedyOrder) -> Vec<VertexId> {
    match order {
        GreedyOrder::Id => vertices.sort_unstable(),
        GreedyOrder::Degree => vertices.sort_unstable_by_key(|&v| (g.degree(v), v)),
        GreedyOrder::Random(seed) => {
            vertices.sort_unstable();
            vertices.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
    }
    vertices
}

fn greedy_over(dm: &DistanceMatrix, candidates: Vec<VertexId>) -> Vec<VertexId> {
    let mut kept: Vec<VertexId> = Vec::new();
    for v in candidates {
        let blocked = kept.iter().enumerate().any(|(i, &a)| {
            kept[i + 1..]
                .iter()
                .any(|&b| collinear_unchecked(dm, a, b, v))
        });
        if !blocked {
            kept.push(v);
        }
    }
    kept
}

/// Search limits. The node limit is deterministic; the time limit is a
/// wall-clock safety net and makes results machine dependent when it fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: u64,
    pub max_time: Option<Duration>,
}

impl Budget {
    pub fn nodes(max_nodes: u64) -> Self {
        Budget {
            max_nodes,
            max_time: None,
        }
    }

    pub fn with_time(self, limit: Duration) -> Self {
        Budget {
            max_time: Some(limit),
            ..self
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_nodes == 0 {
            return Err(Error::InvalidParameter(
                "node budget must be positive".into(),
            ));
        }
        if self.max_time == Some(Duration::ZERO) {
            return Err(Error::InvalidParameter(
                "time budget must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Default node budget for exact searches.
pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;

impl Default for Budget {
    fn default() -> Self {
        Budget::nodes(DEFAULT_NODE_BUDGET)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub best_set: VertexSet,
    pub size: usize,
    pub optimal: bool,
    pub nodes_explored: u64,
    /// Wall-clock time; kept out of serialized output so results stay
    /// byte-identical across runs.
    #[serde(skip)]
    pub elapsed: Duration,
    pub budget_exhausted: bool,
}

/// Exact maximum general position set within `pool` (all vertices when
/// `None`), warm-started from a degree-ordered greedy set.
pub fn max_general_position(
    g: &Graph,
    dm: &DistanceMatrix,
    pool: Option<&[VertexId]>,
    budget: Budget,
) -> Result<SolveResult> {
    max_general_position_with(g, dm, pool, budget, GreedyOrder::Degree)
}

/// [`max_general_position`] with an explicit warm-start order.
pub fn max_general_position_with(
    g: &Graph,
    dm: &DistanceMatrix,
    pool: Option<&[VertexId]>,
    budget: Budget,
    warm_start: GreedyOrder,
) -> Result<SolveResult> {
    if g.num_vertices() == 0 {
        return Err(Error::InvalidParameter("graph has no vertices".into()));
    }
    budget.validate()?;
    if !g.is_connected() {
        return Err(Error::InvalidParameter(
            "general position search needs a connected graph".into(),
        ));
    }
    let pool: Vec<VertexId> = match pool {
        None => (0..g.num_vertices()).collect(),
        Some(p) => {
            let mut p = p.to_vec();
            p.sort_unstable();
            if let Some(w) = p.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameter(format!(
                    "pool lists vertex {} twice",
                    w[0]
                )));
            }
            if let Some(&v) = p.iter().find(|&&v| v >= g.num_vertices()) {
                return Err(Error::InvalidParameter(format!(
                    "pool vertex {v} out of range"
                )));
            }
            p
        }
    };

    let start = Instant::now();
    let hypergraph = TripleHypergraph::new(dm, &pool);
    let warm: Vec<u32> = {
        let warm_ids = greedy_over(dm, ordered(g, pool.clone(), warm_start));
        warm_ids
            .iter()
            .map(|v| pool.binary_search(v).unwrap() as u32)
            .collect()
    };
    let mut search = Search::new(&hypergraph, warm, budget, start);
    search.run();

    let optimal = !search.exhausted;
    let ids = search.best.iter().map(|&i| pool[i as usize]).collect();
    let provenance = if optimal {
        Provenance::SolverExact
    } else {
        Provenance::SolverLowerBound
    };
    let best_set = VertexSet::new(g.reference(), ids, provenance)?;
    Ok(SolveResult {
        size: best_set.len(),
        best_set,
        optimal,
        nodes_explored: search.nodes,
        elapsed: start.elapsed(),
        budget_exhausted: search.exhausted,
    })
}

/// Collinear triples of a pool, over local indices `0..pool.len()`.
struct TripleHypergraph {
    size: usize,
    triples: Vec<[u32; 3]>,
    incidence: Vec<Vec<u32>>,
}

impl TripleHypergraph {
    fn new(dm: &DistanceMatrix, pool: &[VertexId]) -> Self {
        let size = pool.len();
        let mut triples = Vec::new();
        for i in 0..size {
            for j in i + 1..size {
                for k in j + 1..size {
                    if collinear_unchecked(dm, pool[i], pool[j], pool[k]) {
                        triples.push([i as u32, j as u32, k as u32]);
                    }
                }
            }
        }
        let mut incidence = vec![Vec::new(); size];
        for (t, triple) in triples.iter().enumerate() {
            for &v in triple {
                incidence[v as usize].push(t as u32);
            }
        }
        TripleHypergraph {
            size,
            triples,
            incidence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    Free,
    In,
    Out,
}

struct Search<'a> {
    h: &'a TripleHypergraph,
    mark: Vec<Mark>,
    in_count: Vec<u8>,
    out_count: Vec<u8>,
    /// Per vertex: incident triples with no excluded member.
    live_degree: Vec<u32>,
    chosen: Vec<u32>,
    free: usize,
    best: Vec<u32>,
    nodes: u64,
    exhausted: bool,
    budget: Budget,
    start: Instant,
    stamp: Vec<u32>,
    epoch: u32,
}

impl<'a> Search<'a> {
    fn new(h: &'a TripleHypergraph, warm: Vec<u32>, budget: Budget, start: Instant) -> Self {
        Search {
            h,
            mark: vec![Mark::Free; h.size],
            in_count: vec![0; h.triples.len()],
            out_count: vec![0; h.triples.len()],
            live_degree: h.incidence.iter().map(|inc| inc.len() as u32).collect(),
            chosen: Vec::new(),
            free: h.size,
            best: warm,
            nodes: 0,
            exhausted: false,
            budget,
            start,
            stamp: vec![0; h.size],
            epoch: 0,
        }
    }

    fn run(&mut self) {
        self.branch();
    }

    fn out_of_budget(&mut self) -> bool {
        if self.exhausted {
            return true;
        }
        if self.nodes >= self.budget.max_nodes {
            self.exhausted = true;
        } else if let Some(limit) = self.budget.max_time {
            if self.nodes.is_multiple_of(1024) && self.start.elapsed() >= limit {
                self.exhausted = true;
            }
        }
        self.exhausted
    }

    fn branch(&mut self) {
        if self.out_of_budget() {
            return;
        }
        self.nodes += 1;

        if self.chosen.len() + self.free <= self.best.len() {
            return;
        }
        if self.chosen.len() + self.free - self.packing_bound() <= self.best.len() {
            return;
        }

        // Most constrained free vertex, smallest index on ties.
        let mut pick: Option<(u32, usize)> = None;
        for v in 0..self.h.size {
            if self.mark[v] == Mark::Free && pick.is_none_or(|(d, _)| self.live_degree[v] > d) {
                pick = Some((self.live_degree[v], v));
            }
        }
        let Some((degree, v)) = pick else {
            self.record_leaf();
            return;
        };
        if degree == 0 {
            // No live triple touches a free vertex: take them all.
            let extra: Vec<u32> = (0..self.h.size)
                .filter(|&u| self.mark[u] == Mark::Free)
                .map(|u| u as u32)
                .collect();
            let before = self.chosen.len();
            self.chosen.extend(extra);
            self.record_leaf();
            self.chosen.truncate(before);
            return;
        }

        let forced = self.include(v);
        self.branch();
        self.undo_include(v, &forced);

        self.exclude(v);
        self.branch();
        self.undo_exclude(v);
    }

    fn record_leaf(&mut self) {
        if self.chosen.len() > self.best.len() {
            let mut best = self.chosen.clone();
            best.sort_unstable();
            self.best = best;
        }
    }

    /// Greedy packing of live triples that are pairwise disjoint on their
    /// free members. Each such triple costs at least one free vertex.
    fn packing_bound(&mut self) -> usize {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        let mut packed = 0;
        // Triples with one chosen member first: they need only two free slots.
        for wanted_in in [1u8, 0] {
            for (t, triple) in self.h.triples.iter().enumerate() {
                if self.out_count[t] != 0 || self.in_count[t] != wanted_in {
                    continue;
                }
                let free_members = triple
                    .iter()
                    .filter(|&&u| self.mark[u as usize] == Mark::Free);
                if free_members
                    .clone()
                    .any(|&u| self.stamp[u as usize] == self.epoch)
                {
                    continue;
                }
                for &u in free_members {
                    self.stamp[u as usize] = self.epoch;
                }
                packed += 1;
            }
        }
        packed
    }

    /// Adds `v` and excludes every free vertex that would close a collinear
    /// triple with two chosen ones. Returns the forced exclusions.
    fn include(&mut self, v: usize) -> Vec<usize> {
        self.mark[v] = Mark::In;
        self.free -= 1;
        self.chosen.push(v as u32);
        let mut forced = Vec::new();
        for &t in &self.h.incidence[v] {
            let t = t as usize;
            self.in_count[t] += 1;
            if self.in_count[t] == 2 && self.out_count[t] == 0 {
                let third = self.h.triples[t]
                    .iter()
                    .map(|&u| u as usize)
                    .find(|&u| self.mark[u] == Mark::Free)
                    .expect("live triple with two chosen members has a free third");
                forced.push(third);
            }
        }
        forced.sort_unstable();
        forced.dedup();
        for &u in &forced {
            self.exclude(u);
        }
        forced
    }

    fn undo_include(&mut self, v: usize, forced: &[usize]) {
        for &u in forced.iter().rev() {
            self.undo_exclude(u);
        }
        for &t in &self.h.incidence[v] {
            self.in_count[t as usize] -= 1;
        }
        self.chosen.pop();
        self.free += 1;
        self.mark[v] = Mark::Free;
    }

    fn exclude(&mut self, v: usize) {
        self.mark[v] = Mark::Out;
        self.free -= 1;
        for &t in &self.h.incidence[v] {
            let t = t as usize;
            self.out_count[t] += 1;
            if self.out_count[t] == 1 {
                for &u in &self.h.triples[t] {
                    self.live_degree[u as usize] -= 1;
                }
            }
        }
    }

    fn undo_exclude(&mut self, v: usize) {
        for &t in &self.h.incidence[v] {
            let t = t as usize;
            if self.out_count[t] == 1 {
                for &u in &self.h.triples[t] {
                    self.live_degree[u as usize] += 1;
                }
            }
            self.out_count[t] -= 1;
        }
        self.free += 1;
        self.mark[v] = Mark::Free;
    }
}
