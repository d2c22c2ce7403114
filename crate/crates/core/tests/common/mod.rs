//! Shared oracles and graph corpora for the integration tests.
//!
//! Everything here is deliberately naive: Floyd-Warshall instead of BFS,
//! subset enumeration instead of branch and bound, explicit geodesic listing
//! instead of distance arithmetic.

#![allow(dead_code)]

use std::collections::HashSet;

use butterfly_gp::graph::{build_butterfly, build_cycle, build_path, Family};
use butterfly_gp::Graph;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const INF: u32 = u32::MAX / 4;

/// A graph on at most 16 vertices as neighbor bitmasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Small {
    pub n: usize,
    pub adj: [u16; 16],
}

impl Small {
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.adj[u] >> v & 1 == 1 {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn to_graph(self) -> Graph {
        Graph::from_edges(self.n, self.edges(), Family::Custom).unwrap()
    }

    pub fn from_graph(g: &Graph) -> Small {
        assert!(g.num_vertices() <= 16);
        let mut adj = [0u16; 16];
        for &(u, v) in g.edges() {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        Small {
            n: g.num_vertices(),
            adj,
        }
    }
}

/// Ordered partition refinement: split every cell by the number of
/// neighbors in each current cell until nothing changes.
fn refine(adj: &[u16], mut cells: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    loop {
        let masks: Vec<u16> = cells
            .iter()
            .map(|c| c.iter().fold(0, |m, &v| m | 1 << v))
            .collect();
        let mut next = Vec::with_capacity(cells.len());
        for cell in &cells {
            if cell.len() == 1 {
                next.push(cell.clone());
                continue;
            }
            let mut keyed: Vec<(Vec<u32>, usize)> = cell
                .iter()
                .map(|&v| (masks.iter().map(|m| (adj[v] & m).count_ones()).collect(), v))
                .collect();
            keyed.sort();
            let mut start = 0;
            for i in 1..=keyed.len() {
                if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                    next.push(keyed[start..i].iter().map(|k| k.1).collect());
                    start = i;
                }
            }
        }
        if next.len() == cells.len() {
            return next;
        }
        cells = next;
    }
}

fn best_leaf(adj: &[u16], cells: Vec<Vec<usize>>, best: &mut u128) {
    let cells = refine(adj, cells);
    let Some(target) = cells.iter().position(|c| c.len() > 1) else {
        let order: Vec<usize> = cells.iter().map(|c| c[0]).collect();
        let mut word = 0u128;
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                word = word << 1 | u128::from(adj[order[i]] >> order[j] & 1);
            }
        }
        *best = (*best).max(word);
        return;
    };
    for &v in &cells[target] {
        let mut split = cells[..target].to_vec();
        split.push(vec![v]);
        split.push(cells[target].iter().copied().filter(|&w| w != v).collect());
        split.extend_from_slice(&cells[target + 1..]);
        best_leaf(adj, split, best);
    }
}

/// Exact canonical form: the largest adjacency word over every leaf of the
/// individualization-refinement tree. Two graphs on the same vertex count
/// get equal forms iff they are isomorphic.
pub fn canonical_form(g: &Small) -> u128 {
    let mut best = 0;
    best_leaf(&g.adj[..g.n], vec![(0..g.n).collect()], &mut best);
    best
}

fn is_connected_small(g: &Small) -> bool {
    if g.n == 0 {
        return false;
    }
    let full = if g.n == 16 {
        u16::MAX
    } else {
        (1u16 << g.n) - 1
    };
    let mut seen = 1u16;
    let mut frontier = 1u16;
    while frontier != 0 {
        let mut next = 0;
        for v in 0..g.n {
            if frontier >> v & 1 == 1 {
                next |= g.adj[v];
            }
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen == full
}

/// One representative of every isomorphism class of connected graphs on
/// `1..=max_n` vertices, grouped by vertex count. Built by attaching a new
/// vertex to each nonempty subset of a smaller graph; every connected graph
/// has a vertex whose removal keeps it connected, so nothing is missed.
pub fn connected_graph_classes(max_n: usize) -> Vec<Vec<Small>> {
    assert!((1..=10).contains(&max_n));
    let mut levels = vec![vec![Small { n: 1, adj: [0; 16] }]];
    for n in 2..=max_n {
        let mut seen = HashSet::new();
        let mut level = Vec::new();
        for base in &levels[n - 2] {
            for subset in 1u16..(1 << (n - 1)) {
                let mut g = *base;
                g.n = n;
                g.adj[n - 1] = subset;
                for v in 0..n - 1 {
                    if subset >> v & 1 == 1 {
                        g.adj[v] |= 1 << (n - 1);
                    }
                }
                if seen.insert(canonical_form(&g)) {
                    level.push(g);
                }
            }
        }
        levels.push(level);
    }
    levels
}

/// Number of connected graphs on n unlabeled vertices, n = 1..=9.
pub const CONNECTED_CLASS_COUNTS: [usize; 9] = [1, 1, 2, 6, 21, 112, 853, 11117, 261080];

/// Connected graph with a random spanning tree plus random extra edges.
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, extra_edge_prob: f64) -> Small {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut g = Small { n, adj: [0; 16] };
    let add = |g: &mut Small, u: usize, v: usize| {
        g.adj[u] |= 1 << v;
        g.adj[v] |= 1 << u;
    };
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        add(&mut g, order[i], parent);
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(extra_edge_prob) {
                add(&mut g, u, v);
            }
        }
    }
    assert!(is_connected_small(&g));
    g
}

/// The seeded random part of the corpus: 100 connected graphs on 2..=9 vertices.
pub fn random_corpus() -> Vec<Small> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6770);
    (0..100)
        .map(|_| {
            let n = rng.gen_range(2..=9);
            let p = rng.gen_range(0.0..0.6);
            random_connected(&mut rng, n, p)
        })
        .collect()
}

/// Random connected graph as a library graph, any size.
pub fn random_connected_graph(seed: u64, n: usize, extra_edges: usize) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut edges = HashSet::new();
    for i in 1..n {
        let (a, b) = (order[i], order[rng.gen_range(0..i)]);
        edges.insert((a.min(b), a.max(b)));
    }
    if n >= 2 {
        for _ in 0..extra_edges {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b {
                edges.insert((a.min(b), a.max(b)));
            }
        }
    }
    Graph::from_edges(n, edges, Family::Custom).unwrap()
}

/// Floyd-Warshall hop distances; `INF` when unreachable.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<u32>> {
    let n = g.num_vertices();
    let mut d = vec![vec![INF; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0;
    }
    for &(u, v) in g.edges() {
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let through = d[i][k] + d[k][j];
                if through < d[i][j] {
                    d[i][j] = through;
                }
            }
        }
    }
    d
}

/// Every shortest x-z path, listed explicitly by depth-first search.
pub fn all_geodesics(g: &Graph, d: &[Vec<u32>], x: usize, z: usize) -> Vec<Vec<usize>> {
    fn extend(
        g: &Graph,
        d: &[Vec<u32>],
        z: usize,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let last = *path.last().unwrap();
        if last == z {
            out.push(path.clone());
            return;
        }
        for &w in g.neighbors(last) {
            if d[w][z] + 1 == d[last][z] {
                path.push(w);
                extend(g, d, z, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    if d[x][z] < INF {
        extend(g, d, z, &mut vec![x], &mut out);
    }
    out
}

/// Maximum general position set size by enumerating all 2^n subsets.
pub fn brute_force_gp(g: &Graph) -> usize {
    let n = g.num_vertices();
    assert!(n <= 16);
    let d = floyd_warshall(g);
    // pairs_below[c]: masks {a, b} with a < b < c such that {a, b, c} is collinear.
    let mut pairs_below: Vec<Vec<u32>> = vec![Vec::new(); n];
    for c in 0..n {
        for b in 0..c {
            for a in 0..b {
                let (ab, bc, ac) = (d[a][b], d[b][c], d[a][c]);
                if ab + bc == ac || ab + ac == bc || ac + bc == ab {
                    pairs_below[c].push(1 << a | 1 << b);
                }
            }
        }
    }
    let mut good = vec![false; 1 << n];
    good[0] = true;
    let mut best = 0;
    for mask in 1u32..1 << n {
        let top = 31 - mask.leading_zeros() as usize;
        let rest = mask ^ 1 << top;
        good[mask as usize] =
            good[rest as usize] && pairs_below[top].iter().all(|&p| rest & p != p);
        if good[mask as usize] {
            best = best.max(mask.count_ones() as usize);
        }
    }
    best
}

/// Named generator graphs on at most `max_n` vertices.
pub fn named_graphs(max_n: usize) -> Vec<Graph> {
    let mut out = Vec::new();
    for r in 1..=5 {
        let g = build_butterfly(r).unwrap();
        if g.num_vertices() <= max_n {
            out.push(g);
        }
    }
    for n in 3..=max_n {
        out.push(build_cycle(n).unwrap());
    }
    for n in 1..=max_n {
        out.push(build_path(n).unwrap());
    }
    out
}

/// Solver against subset enumeration.
pub fn check_solver(g: &Graph) -> Result<(), String> {
    use butterfly_gp::genpos::{max_general_position, verify_general_position, Budget};
    let dm = butterfly_gp::geodesy::all_pairs_distances(g);
    let result =
        max_general_position(g, &dm, None, Budget::default()).map_err(|e| e.to_string())?;
    let expected = brute_force_gp(g);
    if !result.optimal || result.size != expected || result.best_set.len() != expected {
        return Err(format!(
            "{:?}: solver {} (optimal {}), brute force {expected}",
            g.edges(),
            result.size,
            result.optimal
        ));
    }
    if !verify_general_position(g, &dm, &result.best_set)
        .map_err(|e| e.to_string())?
        .is_verified()
    {
        return Err(format!(
            "{:?}: solver set {:?} is not in general position",
            g.edges(),
            result.best_set.ids()
        ));
    }
    Ok(())
}

/// `lies_between` against the vertex sets of explicitly listed geodesics.
pub fn check_lies_between(g: &Graph) -> Result<(), String> {
    use butterfly_gp::geodesy::{all_pairs_distances, lies_between};
    let dm = all_pairs_distances(g);
    let d = floyd_warshall(g);
    let n = g.num_vertices();
    for x in 0..n {
        for z in 0..n {
            if x == z {
                continue;
            }
            let mut on_some = vec![false; n];
            for path in all_geodesics(g, &d, x, z) {
                for v in path {
                    on_some[v] = true;
                }
            }
            for y in (0..n).filter(|&y| y != x && y != z) {
                let got = lies_between(&dm, x, y, z).map_err(|e| e.to_string())?;
                if got != on_some[y] {
                    return Err(format!(
                        "{:?}: lies_between({x}, {y}, {z}) = {got}",
                        g.edges()
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Metric axioms plus agreement with Floyd-Warshall on a connected graph.
pub fn check_metric(g: &Graph) -> Result<(), String> {
    let dm = butterfly_gp::geodesy::all_pairs_distances(g);
    let fw = floyd_warshall(g);
    let n = g.num_vertices();
    let name = g.reference();
    for (x, fw_row) in fw.iter().enumerate() {
        for (y, &expected) in fw_row.iter().enumerate() {
            let dxy = dm
                .get(x, y)
                .ok_or_else(|| format!("{name}: d({x}, {y}) unreachable"))?;
            if dxy != expected {
                return Err(format!(
                    "{name}: d({x}, {y}) = {dxy}, Floyd-Warshall {expected}"
                ));
            }
            if (dxy == 0) != (x == y) || Some(dxy) != dm.get(y, x) || (dxy == 1) != g.has_edge(x, y)
            {
                return Err(format!(
                    "{name}: identity, symmetry or adjacency fails at ({x}, {y})"
                ));
            }
        }
    }
    for x in 0..n {
        let rx = dm.row(x);
        for y in 0..n {
            let dxy = rx[y];
            let ry = dm.row(y);
            for z in 0..n {
                if rx[z] > dxy + ry[z] {
                    return Err(format!(
                        "{name}: triangle inequality fails at ({x}, {y}, {z})"
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Every graph the metric check covers: generators up to 200 vertices and
/// seeded random connected graphs of assorted sizes and densities.
pub fn metric_corpus() -> Vec<Graph> {
    let mut out = named_graphs(200);
    for (i, n) in [1usize, 2, 5, 17, 40, 64, 99, 128, 150, 200]
        .into_iter()
        .enumerate()
    {
        for extra in [0, n / 4, n, 3 * n] {
            out.push(random_connected_graph(
                1000 + i as u64 * 10 + extra as u64,
                n,
                extra,
            ));
        }
    }
    out
}

/// Result of replaying mutated covers through the verifier.
#[derive(Debug, Default)]
pub struct MutationTally {
    pub mutants: usize,
    pub killed: usize,
    pub equivalents_accepted: usize,
    pub survivors: Vec<String>,
}

/// Mutates a verified butterfly cover and counts how many mutants the
/// verifier rejects. Vertex substitutions are exhaustive when
/// `exhaustive_substitutions`, otherwise sampled per position. Rotations,
/// reversals and reorderings describe the same cover and must still pass.
pub fn mutation_kill(r: usize, exhaustive_substitutions: bool, seed: u64) -> MutationTally {
    use butterfly_gp::cover::{
        construct_bf_cycle_cover, verify_bf_cover, CycleCover, DEFAULT_COVER_BUDGET,
    };
    use butterfly_gp::geodesy::all_pairs_distances;

    let g = build_butterfly(r).unwrap();
    let dm = all_pairs_distances(&g);
    let cover = construct_bf_cycle_cover(&g, &dm, DEFAULT_COVER_BUDGET).unwrap();
    let n = g.num_vertices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = MutationTally::default();
    let rejects = |c: &CycleCover| verify_bf_cover(&g, &dm, c).map_or(true, |rep| !rep.passed);
    let mutant = |tally: &mut MutationTally, c: CycleCover, what: String| {
        tally.mutants += 1;
        if rejects(&c) {
            tally.killed += 1;
        } else {
            tally.survivors.push(what);
        }
    };

    for (i, cycle) in cover.cycles.iter().enumerate() {
        for j in 0..cycle.len() {
            let replacements: Vec<usize> = if exhaustive_substitutions {
                (0..n).filter(|&w| w != cycle[j]).collect()
            } else {
                let mut ws: Vec<usize> = g.neighbors(cycle[(j + 1) % cycle.len()]).to_vec();
                ws.extend((0..6).map(|_| rng.gen_range(0..n)));
                ws.retain(|&w| w != cycle[j]);
                ws
            };
            for w in replacements {
                let mut c = cover.clone();
                c.cycles[i][j] = w;
                mutant(&mut tally, c, format!("cycle {i} position {j} -> {w}"));
            }
            let mut c = cover.clone();
            c.cycles[i].swap(j, (j + 1) % cycle.len());
            mutant(&mut tally, c, format!("cycle {i} swap {j}"));
            let mut c = cover.clone();
            c.cycles[i].remove(j);
            mutant(&mut tally, c, format!("cycle {i} remove {j}"));
        }
        let mut c = cover.clone();
        c.cycles.remove(i);
        mutant(&mut tally, c, format!("drop cycle {i}"));
        let mut c = cover.clone();
        let other = (i + 1) % cover.len();
        c.cycles[other] = cover.cycles[i].clone();
        mutant(&mut tally, c, format!("cycle {i} copied over {other}"));
        let mut c = cover.clone();
        c.cycles.push(cover.cycles[i].clone());
        mutant(&mut tally, c, format!("cycle {i} repeated"));
    }
    let mut c = cover.clone();
    c.graph_ref = "butterfly-99".into();
    mutant(&mut tally, c, "foreign graph_ref".into());

    let mut equivalents = Vec::new();
    for (i, cycle) in cover.cycles.iter().enumerate() {
        let mut rotated = cover.clone();
        rotated.cycles[i].rotate_left(rng.gen_range(1..cycle.len()));
        equivalents.push(rotated);
        let mut reversed = cover.clone();
        reversed.cycles[i].reverse();
        equivalents.push(reversed);
    }
    let mut shuffled = cover.clone();
    shuffled.cycles.shuffle(&mut rng);
    equivalents.push(shuffled);
    for c in &equivalents {
        if !rejects(c) {
            tally.equivalents_accepted += 1;
        }
    }
    tally
}
