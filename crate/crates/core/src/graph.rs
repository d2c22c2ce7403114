//! Immutable simple graphs and the generators used throughout the crate.
//!
//! Butterfly vertices use a level-major encoding: the vertex at `level`
//! with row bits `a_1 a_2 ... a_r` has id `level * 2^r + row`, where the row
//! is read as a binary number with `a_1` as the most significant bit. A cross
//! edge between levels `w - 1` and `w` flips bit `a_w`.

use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type VertexId = usize;

/// Largest butterfly dimension the generators accept.
pub const MAX_BUTTERFLY_DIM: usize = 16;

/// Which generator, if any, produced a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Butterfly { r: usize },
    Cycle { n: usize },
    Path { n: usize },
    Custom,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Butterfly { .. } => "butterfly",
            Family::Cycle { .. } => "cycle",
            Family::Path { .. } => "path",
            Family::Custom => "custom",
        }
    }
}

/// An undirected simple graph on vertices `0..n`.
///
/// Graphs are built once and never mutated; every analysis takes `&Graph`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(VertexId, VertexId)>,
    adj: Vec<Vec<VertexId>>,
    family: Family,
}

impl Graph {
    /// Builds a graph from an edge list, rejecting loops, duplicates and
    /// out-of-range endpoints. Edge orientation does not matter.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
        family: Family,
    ) -> Result<Self> {
        let mut normalized = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {u}")));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &normalized {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: normalized,
            adj,
            family,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        u < self.n && v < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// The butterfly dimension, or `UnsupportedFamily` for other graphs.
    pub fn butterfly_dim(&self) -> Result<usize> {
        match self.family {
            Family::Butterfly { r } => Ok(r),
            other => Err(Error::UnsupportedFamily(format!(
                "expected a butterfly graph, got {}",
                other.name()
            ))),
        }
    }

    /// A short stable name for the graph, e.g. `butterfly-3` or `cycle-5`.
    /// Custom graphs are named by vertex count and a digest of the edge list.
    pub fn reference(&self) -> String {
        match self.family {
            Family::Butterfly { r } => format!("butterfly-{r}"),
            Family::Cycle { n } => format!("cycle-{n}"),
            Family::Path { n } => format!("path-{n}"),
            Family::Custom => {
                let mut hasher = Sha256::new();
                hasher.update((self.n as u64).to_le_bytes());
                for &(u, v) in &self.edges {
                    hasher.update((u as u64).to_le_bytes());
                    hasher.update((v as u64).to_le_bytes());
                }
                let digest = hex::encode(hasher.finalize());
                format!("custom-{}-{}", self.n, &digest[..12])
            }
        }
    }

    /// Rebuilds a generator graph from its [`Graph::reference`] name.
    pub fn from_reference(reference: &str) -> Result<Self> {
        let unsupported = || {
            Error::UnsupportedFamily(format!("cannot rebuild graph from reference `{reference}`"))
        };
        let (family, param) = reference.rsplit_once('-').ok_or_else(unsupported)?;
        let param: usize = param.parse().map_err(|_| unsupported())?;
        match family {
            "butterfly" => build_butterfly(param),
            "cycle" => build_cycle(param),
            "path" => build_path(param),
            _ => Err(unsupported()),
        }
    }

    /// True when every vertex is reachable from vertex 0.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    /// Label of a butterfly vertex.
    pub fn label_of(&self, v: VertexId) -> Result<ButterflyLabel> {
        let r = self.butterfly_dim()?;
        if v >= self.n {
            return Err(Error::InvalidParameter(format!(
                "vertex {v} out of range for {} vertices",
                self.n
            )));
        }
        let width = 1usize << r;
        Ok(ButterflyLabel {
            level: v / width,
            row: v % width,
        })
    }

    /// Id of a butterfly label.
    pub fn id_of(&self, label: ButterflyLabel) -> Result<VertexId> {
        let r = self.butterfly_dim()?;
        label.validate(r)?;
        Ok(label.level * (1usize << r) + label.row)
    }
}

/// A butterfly vertex `[row, level]`.
///
/// `row` holds the bits `a_1 ... a_r` as an integer with `a_1` most
/// significant; the dimension `r` is carried by the graph, not the label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ButterflyLabel {
    pub level: usize,
    pub row: usize,
}

impl ButterflyLabel {
    pub fn new(level: usize, row: usize) -> Self {
        ButterflyLabel { level, row }
    }

    /// Parses a row written as a bit string, leftmost character = bit 1.
    pub fn from_bits(level: usize, bits: &str) -> Result<Self> {
        if bits.is_empty() || bits.len() > MAX_BUTTERFLY_DIM {
            return Err(Error::InvalidParameter(format!("bad row string `{bits}`")));
        }
        let row = usize::from_str_radix(bits, 2)
            .map_err(|_| Error::InvalidParameter(format!("bad row string `{bits}`")))?;
        Ok(ButterflyLabel { level, row })
    }

    pub fn validate(&self, r: usize) -> Result<()> {
        if self.level > r || self.row >= (1usize << r) {
            return Err(Error::InvalidParameter(format!(
                "label (level {}, row {}) out of range for r = {r}",
                self.level, self.row
            )));
        }
        Ok(())
    }

    /// Bit `a_i` of the row, for `1 <= i <= r`.
    pub fn bit(&self, i: usize, r: usize) -> bool {
        debug_assert!((1..=r).contains(&i));
        self.row >> (r - i) & 1 == 1
    }

    /// The row as an `r`-character bit string.
    pub fn row_string(&self, r: usize) -> String {
        format!("{:0width$b}", self.row, width = r)
    }

    /// Renders as `[row, level]`.
    pub fn display(&self, r: usize) -> impl fmt::Display + '_ {
        struct Shown<'a>(&'a ButterflyLabel, usize);
        impl fmt::Display for Shown<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "[{}, {}]", self.0.row_string(self.1), self.0.level)
            }
        }
        Shown(self, r)
    }
}

/// Mask selecting bit `a_i` (1-based, leftmost first) of an `r`-bit row.
pub(crate) fn bit_mask(i: usize, r: usize) -> usize {
    1 << (r - i)
}

/// The r-dimensional butterfly: `r + 1` levels of `2^r` rows.
pub fn build_butterfly(r: usize) -> Result<Graph> {
    if !(1..=MAX_BUTTERFLY_DIM).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "butterfly dimension must be in 1..={MAX_BUTTERFLY_DIM}, got {r}"
        )));
    }
    let width = 1usize << r;
    let mut edges = Vec::with_capacity(r * width * 2);
    for level in 1..=r {
        let mask = bit_mask(level, r);
        for row in 0..width {
            let upper = level * width;
            let lower = (level - 1) * width;
            edges.push((lower + row, upper + row));
            edges.push((lower + row, upper + (row ^ mask)));
        }
    }
    Graph::from_edges((r + 1) * width, edges, Family::Butterfly { r })
}

pub fn build_cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "cycle needs at least 3 vertices, got {n}"
        )));
    }
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)), Family::Cycle { n })
}

pub fn build_path(n: usize) -> Result<Graph> {
    if n < 1 {
        return Err(Error::InvalidParameter(
            "path needs at least 1 vertex".into(),
        ));
    }
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i)), Family::Path { n })
}

/// Degree classes and boundary subclasses of a butterfly.
///
/// `x0_prime`/`x0_double_prime` split level 0 by bit 1 of the row (0 / 1);
/// `xr_prime`/`xr_double_prime` split level r by bit r (1 / 0). The split is
/// a fixed bit test standing in for the four-quadrant picture of `BF(r)`
/// as four copies of `BF(r - 2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexClassification {
    pub x: Vec<VertexId>,
    pub y: Vec<VertexId>,
    pub x0: Vec<VertexId>,
    pub xr: Vec<VertexId>,
    pub x0_prime: Vec<VertexId>,
    pub x0_double_prime: Vec<VertexId>,
    pub xr_prime: Vec<VertexId>,
    pub xr_double_prime: Vec<VertexId>,
}

pub fn classify_vertices(g: &Graph) -> Result<VertexClassification> {
    let r = g.butterfly_dim()?;
    if r < 2 {
        return Err(Error::InvalidParameter(format!(
            "vertex classes need r >= 2, got {r}"
        )));
    }
    let width = 1usize << r;
    let x0: Vec<_> = (0..width).collect();
    let xr: Vec<_> = (r * width..(r + 1) * width).collect();
    let y: Vec<_> = (width..r * width).collect();
    let x: Vec<_> = x0.iter().chain(&xr).copied().collect();
    let first = bit_mask(1, r);
    let last = bit_mask(r, r);
    let (x0_double_prime, x0_prime): (Vec<_>, Vec<_>) =
        x0.iter().copied().partition(|&v| v & first != 0);
    let (xr_prime, xr_double_prime): (Vec<_>, Vec<_>) = xr
        .iter()
        .copied()
        .partition(|&v| (v - r * width) & last != 0);
    Ok(VertexClassification {
        x,
        y,
        x0,
        xr,
        x0_prime,
        x0_double_prime,
        xr_prime,
        xr_double_prime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degree_census(g: &Graph) -> std::collections::BTreeMap<usize, usize> {
        let mut census = std::collections::BTreeMap::new();
        for v in 0..g.num_vertices() {
            *census.entry(g.degree(v)).or_insert(0) += 1;
        }
        census
    }

    #[test]
    fn butterfly_counts() {
        let g = build_butterfly(3).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (32, 48));
        let g = build_butterfly(2).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (12, 16));
        let g = build_butterfly(1).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (4, 4));
        assert!((0..4).all(|v| g.degree(v) == 2));
    }

    #[test]
    fn butterfly_degrees_and_connectivity() {
        for r in 2..=8 {
            let g = build_butterfly(r).unwrap();
            let census = degree_census(&g);
            let expected: std::collections::BTreeMap<_, _> =
                [(2, 1 << (r + 1)), (4, (r - 1) << r)].into_iter().collect();
            assert_eq!(census, expected, "r = {r}");
            assert!(g.is_connected());
        }
    }

    #[test]
    fn butterfly_adjacency_rule() {
        let r = 3;
        let g = build_butterfly(r).unwrap();
        let id = |level, bits| {
            g.id_of(ButterflyLabel::from_bits(level, bits).unwrap())
                .unwrap()
        };
        // straight edges
        assert!(g.has_edge(id(0, "010"), id(1, "010")));
        // cross edge between levels 0 and 1 flips bit 1
        assert!(g.has_edge(id(0, "010"), id(1, "110")));
        // cross edge between levels 2 and 3 flips bit 3
        assert!(g.has_edge(id(2, "010"), id(3, "011")));
        assert!(!g.has_edge(id(2, "010"), id(3, "110")));
        assert!(!g.has_edge(id(0, "000"), id(2, "000")));
    }

    #[test]
    fn generator_errors() {
        assert!(matches!(
            build_butterfly(0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(build_cycle(2), Err(Error::InvalidParameter(_))));
        assert!(matches!(build_path(0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn small_generators() {
        let c = build_cycle(3).unwrap();
        assert_eq!(c.edges(), &[(0, 1), (0, 2), (1, 2)]);
        let c = build_cycle(5).unwrap();
        assert_eq!((c.num_vertices(), c.num_edges()), (5, 5));
        assert!((0..5).all(|v| c.degree(v) == 2) && c.is_connected());
        let p = build_path(1).unwrap();
        assert_eq!((p.num_vertices(), p.num_edges()), (1, 0));
        let p = build_path(2).unwrap();
        assert_eq!(p.edges(), &[(0, 1)]);
    }

    #[test]
    fn from_edges_rejects_non_simple() {
        assert!(Graph::from_edges(3, [(0, 1), (1, 0)], Family::Custom).is_err());
        assert!(Graph::from_edges(3, [(1, 1)], Family::Custom).is_err());
        assert!(Graph::from_edges(3, [(0, 3)], Family::Custom).is_err());
    }

    #[test]
    fn label_encoding() {
        let g = build_butterfly(2).unwrap();
        assert_eq!(
            g.id_of(ButterflyLabel::from_bits(0, "00").unwrap())
                .unwrap(),
            0
        );
        assert_eq!(
            g.id_of(ButterflyLabel::from_bits(1, "11").unwrap())
                .unwrap(),
            7
        );
        for v in 0..g.num_vertices() {
            assert_eq!(g.id_of(g.label_of(v).unwrap()).unwrap(), v);
        }
        assert!(g.label_of(12).is_err());
        assert!(g.id_of(ButterflyLabel::new(3, 0)).is_err());
        assert!(g.id_of(ButterflyLabel::new(0, 4)).is_err());
        let c = build_cycle(4).unwrap();
        assert!(matches!(c.label_of(0), Err(Error::UnsupportedFamily(_))));
    }

    #[test]
    fn label_bits() {
        let lbl = ButterflyLabel::from_bits(2, "100").unwrap();
        assert!(lbl.bit(1, 3) && !lbl.bit(2, 3) && !lbl.bit(3, 3));
        assert_eq!(lbl.display(3).to_string(), "[100, 2]");
    }

    #[test]
    fn classification_counts() {
        let c = classify_vertices(&build_butterfly(3).unwrap()).unwrap();
        assert_eq!((c.x.len(), c.y.len()), (16, 16));
        let c = classify_vertices(&build_butterfly(2).unwrap()).unwrap();
        assert_eq!((c.x0_prime.len(), c.x0_double_prime.len()), (2, 2));
        assert_eq!((c.xr_prime.len(), c.xr_double_prime.len()), (2, 2));
        let g = build_butterfly(4).unwrap();
        let c = classify_vertices(&g).unwrap();
        let deg4 = (0..g.num_vertices()).filter(|&v| g.degree(v) == 4).count();
        assert_eq!(deg4, 48);
        assert_eq!(c.y.len(), deg4);
        assert!(c.x.iter().all(|&v| g.degree(v) == 2));
    }

    #[test]
    fn classification_partitions() {
        for r in 2..=6 {
            let g = build_butterfly(r).unwrap();
            let c = classify_vertices(&g).unwrap();
            let mut all: Vec<_> = c.x.iter().chain(&c.y).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..g.num_vertices()).collect::<Vec<_>>());
            let mut x0: Vec<_> = c
                .x0_prime
                .iter()
                .chain(&c.x0_double_prime)
                .copied()
                .collect();
            x0.sort_unstable();
            assert_eq!(x0, c.x0);
            let mut xr: Vec<_> = c
                .xr_prime
                .iter()
                .chain(&c.xr_double_prime)
                .copied()
                .collect();
            xr.sort_unstable();
            assert_eq!(xr, c.xr);
            assert_eq!(c.x.len(), 1 << (r + 1));
            assert_eq!(c.y.len(), (r - 1) << r);
        }
        assert!(classify_vertices(&build_butterfly(1).unwrap()).is_err());
        assert!(matches!(
            classify_vertices(&build_path(3).unwrap()),
            Err(Error::UnsupportedFamily(_))
        ));
    }

    #[test]
    fn references_round_trip() {
        for g in [
            build_butterfly(3).unwrap(),
            build_cycle(7).unwrap(),
            build_path(4).unwrap(),
        ] {
            assert_eq!(Graph::from_reference(&g.reference()).unwrap(), g);
        }
        let custom = Graph::from_edges(3, [(0, 1)], Family::Custom).unwrap();
        assert!(custom.reference().starts_with("custom-3-"));
        assert!(Graph::from_reference(&custom.reference()).is_err());
    }
}
