//! Hop distances and the predicates built on them: betweenness of a vertex
//! on a geodesic, collinear triples, and isometry of cycles and paths.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

/// Sentinel distance for unreachable pairs.
pub const UNREACHABLE: u32 = u32::MAX;

/// Dense symmetric table of all-pairs hop counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<u32>,
}

impl DistanceMatrix {
    pub fn num_vertices(&self) -> usize {
        self.n
    }

    /// Distance between `u` and `v`, or `None` when they are disconnected.
    pub fn get(&self, u: VertexId, v: VertexId) -> Option<u32> {
        match self.raw(u, v) {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    /// Distance with [`UNREACHABLE`] for disconnected pairs.
    #[inline]
    pub fn raw(&self, u: VertexId, v: VertexId) -> u32 {
        self.d[u * self.n + v]
    }

    pub fn row(&self, u: VertexId) -> &[u32] {
        &self.d[u * self.n..(u + 1) * self.n]
    }

    /// Largest finite distance.
    pub fn diameter(&self) -> u32 {
        self.d
            .iter()
            .copied()
            .filter(|&d| d != UNREACHABLE)
            .max()
            .unwrap_or(0)
    }

    fn reachable(&self, u: VertexId, v: VertexId) -> Result<u32> {
        self.get(u, v).ok_or(Error::NotConnected(u, v))
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v >= self.n {
            return Err(Error::InvalidParameter(format!(
                "vertex {v} out of range for {} vertices",
                self.n
            )));
        }
        Ok(())
    }
}

/// Breadth-first search from every vertex.
pub fn all_pairs_distances(g: &Graph) -> DistanceMatrix {
    let n = g.num_vertices();
    let mut d = vec![UNREACHABLE; n * n];
    let mut queue = VecDeque::with_capacity(n);
    for source in 0..n {
        let row = &mut d[source * n..(source + 1) * n];
        row[source] = 0;
        queue.clear();
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let next = row[u] + 1;
            for &v in g.neighbors(u) {
                if row[v] == UNREACHABLE {
                    row[v] = next;
                    queue.push_back(v);
                }
            }
        }
    }
    DistanceMatrix { n, d }
}

/// Whether `y` lies on some shortest `x`–`z` path.
pub fn lies_between(dm: &DistanceMatrix, x: VertexId, y: VertexId, z: VertexId) -> Result<bool> {
    check_triple(dm, x, y, z)?;
    let xy = dm.reachable(x, y)?;
    let yz = dm.reachable(y, z)?;
    let xz = dm.reachable(x, z)?;
    Ok(xy + yz == xz)
}

/// Whether one vertex of the triple lies on a geodesic between the other two.
pub fn is_collinear_triple(dm: &DistanceMatrix, triple: [VertexId; 3]) -> Result<bool> {
    Ok(middle_of(dm, triple)?.is_some())
}

/// The vertex of the triple lying between the other two, if any.
///
/// For distinct vertices at most one of them can be the middle one: two
/// middles would force a zero distance between distinct vertices.
pub fn middle_of(dm: &DistanceMatrix, triple: [VertexId; 3]) -> Result<Option<VertexId>> {
    let [a, b, c] = triple;
    check_triple(dm, a, b, c)?;
    let ab = dm.reachable(a, b)?;
    let bc = dm.reachable(b, c)?;
    let ac = dm.reachable(a, c)?;
    Ok(if ab + bc == ac {
        Some(b)
    } else if ab + ac == bc {
        Some(a)
    } else if ac + bc == ab {
        Some(c)
    } else {
        None
    })
}

/// Unchecked collinearity test for hot loops; callers guarantee distinct,
/// in-range vertices. Pairs in different components never count as
/// collinear: widening keeps sentinel sums from matching a finite distance.
#[inline]
pub(crate) fn collinear_unchecked(
    dm: &DistanceMatrix,
    a: VertexId,
    b: VertexId,
    c: VertexId,
) -> bool {
    let ab = u64::from(dm.raw(a, b));
    let bc = u64::from(dm.raw(b, c));
    let ac = u64::from(dm.raw(a, c));
    ab + bc == ac || ab + ac == bc || ac + bc == ab
}

fn check_triple(dm: &DistanceMatrix, x: VertexId, y: VertexId, z: VertexId) -> Result<()> {
    for v in [x, y, z] {
        dm.check_vertex(v)?;
    }
    if x == y || y == z || x == z {
        return Err(Error::InvalidParameter(format!(
            "triple ({x}, {y}, {z}) has repeated vertices"
        )));
    }
    Ok(())
}

/// Outcome of an isometry check on a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsometryCheck {
    pub isometric: bool,
    /// Lexicographically first pair `(u, v)`, `u < v`, whose distance along
    /// the cycle differs from the graph distance.
    pub violation: Option<(VertexId, VertexId)>,
}

/// Checks that `cycle` (cyclic order, first vertex not repeated) is a cycle
/// of `g` whose cyclic distances equal graph distances.
pub fn is_isometric_cycle(
    g: &Graph,
    dm: &DistanceMatrix,
    cycle: &[VertexId],
) -> Result<IsometryCheck> {
    validate_cycle(g, cycle)?;
    let len = cycle.len();
    let mut violation: Option<(VertexId, VertexId)> = None;
    for i in 0..len {
        for j in i + 1..len {
            let gap = j - i;
            let along = gap.min(len - gap) as u32;
            if dm.raw(cycle[i], cycle[j]) != along {
                let pair = (cycle[i].min(cycle[j]), cycle[i].max(cycle[j]));
                if violation.is_none_or(|best| pair < best) {
                    violation = Some(pair);
                }
            }
        }
    }
    Ok(IsometryCheck {
        isometric: violation.is_none(),
        violation,
    })
}

/// Checks that `path` is a path of `g` and a geodesic between its ends.
pub fn is_isometric_path(g: &Graph, dm: &DistanceMatrix, path: &[VertexId]) -> Result<bool> {
    validate_path(g, path)?;
    let (first, last) = (path[0], path[path.len() - 1]);
    Ok(dm.raw(first, last) as usize == path.len() - 1)
}

/// Rejects sequences that are not simple cycles of `g`.
pub fn validate_cycle(g: &Graph, cycle: &[VertexId]) -> Result<()> {
    let bad = |position, detail: String| Error::InvalidCycle { position, detail };
    if cycle.len() < 3 {
        return Err(bad(0, format!("length {} is below 3", cycle.len())));
    }
    check_distinct_in_range(g, cycle).map_err(|(position, detail)| bad(position, detail))?;
    for i in 0..cycle.len() {
        let (u, v) = (cycle[i], cycle[(i + 1) % cycle.len()]);
        if !g.has_edge(u, v) {
            return Err(bad(i, format!("{u} and {v} are not adjacent")));
        }
    }
    Ok(())
}

/// Rejects sequences that are not simple paths of `g`.
pub fn validate_path(g: &Graph, path: &[VertexId]) -> Result<()> {
    let bad = |position, detail: String| Error::InvalidPath { position, detail };
    if path.is_empty() {
        return Err(bad(0, "empty path".into()));
    }
    check_distinct_in_range(g, path).map_err(|(position, detail)| bad(position, detail))?;
    for (i, w) in path.windows(2).enumerate() {
        if !g.has_edge(w[0], w[1]) {
            return Err(bad(i, format!("{} and {} are not adjacent", w[0], w[1])));
        }
    }
    Ok(())
}

fn check_distinct_in_range(
    g: &Graph,
    seq: &[VertexId],
) -> std::result::Result<(), (usize, String)> {
    let mut seen = vec![false; g.num_vertices()];
    for (i, &v) in seq.iter().enumerate() {
        if v >= g.num_vertices() {
            return Err((i, format!("vertex {v} out of range")));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err((i, format!("vertex {v} repeated")));
        }
    }
    Ok(())
}
