//! Finite windows of uniformly locally finite metric spaces.
//!
//! A [`FiniteSpace`] is a finite point set with an exact integer metric. Windows
//! cut out of an infinite space (a box in the integer lattice, an initial
//! segment of the naturals) remember which of their points sit on the cut, so
//! that universally quantified checks can be restricted to points whose balls
//! never see the truncation.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Exact distance between two points.
pub type Dist = u64;

/// Default maximum number of points in a constructed space.
pub const DEFAULT_POINT_CAP: usize = 20_000;

/// Environment variable overriding [`DEFAULT_POINT_CAP`].
pub const POINT_CAP_ENV: &str = "COARSELAB_POINT_CAP";

/// Above this many triples the triangle inequality is sampled, not enumerated.
pub const TRIANGLE_TRIPLE_CAP: u64 = 8_000_000;

const TRIANGLE_SAMPLES: usize = 2_000_000;
const TRIANGLE_SEED: u64 = 0x7412_a9e3;

/// The active point cap: `COARSELAB_POINT_CAP` if set and parseable, else the default.
pub fn point_cap() -> usize {
    std::env::var(POINT_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_POINT_CAP)
}

/// Index of a point in its owning space.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub usize);

impl PointId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug)]
enum Metric {
    /// Row-major `n * n` distance table.
    Dense(Vec<u32>),
    /// l1 distance between integer coordinates.
    Lattice,
}

/// A finite metric space window.
#[derive(Clone, Debug)]
pub struct FiniteSpace {
    label: String,
    n: usize,
    metric: Metric,
    coords: Option<Vec<Vec<i64>>>,
    boundary: Vec<PointId>,
    boundary_dist: Vec<Option<Dist>>,
    interior_margin: Dist,
    nonmetric: bool,
    realized: OnceLock<Vec<Dist>>,
}

/// How [`FiniteSpace::from_matrix`] treats triangle-inequality violations.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TriangleCheck {
    /// Reject the matrix with the first violated triple.
    Require,
    /// Accept it and set the `nonmetric` flag.
    Flag,
}

impl FiniteSpace {
    /// Builds a space from a full distance matrix.
    ///
    /// Checks symmetry, zero diagonal and discreteness (off-diagonal entries at
    /// least 1); the triangle inequality is handled according to `check`.
    pub fn from_matrix(
        label: impl Into<String>,
        dist: &[Vec<Dist>],
        check: TriangleCheck,
    ) -> Result<Self> {
        let n = dist.len();
        enforce_cap(n as u128)?;
        let mut flat = vec![0u32; n * n];
        for (x, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Metric(format!(
                    "row {x} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (y, &d) in row.iter().enumerate() {
                let d32 = u32::try_from(d)
                    .map_err(|_| Error::Metric(format!("distance {d} at ({x},{y}) too large")))?;
                flat[x * n + y] = d32;
            }
        }
        for x in 0..n {
            if flat[x * n + x] != 0 {
                return Err(Error::Metric(format!("dist({x},{x}) is not 0")));
            }
            for y in (x + 1)..n {
                let (a, b) = (flat[x * n + y], flat[y * n + x]);
                if a != b {
                    return Err(Error::Metric(format!(
                        "asymmetric: dist({x},{y})={a} but dist({y},{x})={b}"
                    )));
                }
                if a == 0 {
                    return Err(Error::Metric(format!(
                        "distinct points {x} and {y} at distance 0 (minimum distance must be at least 1)"
                    )));
                }
            }
        }
        let mut space = Self::raw(label.into(), n, Metric::Dense(flat), None);
        if let Err(e) = space.check_triangle() {
            match check {
                TriangleCheck::Require => return Err(e),
                TriangleCheck::Flag => space.nonmetric = true,
            }
        }
        Ok(space)
    }

    /// A window of an integer lattice with the l1 metric.
    ///
    /// `boundary` lists the points where the window cuts the ambient lattice.
    pub fn lattice(
        label: impl Into<String>,
        coords: Vec<Vec<i64>>,
        boundary: Vec<PointId>,
    ) -> Result<Self> {
        enforce_cap(coords.len() as u128)?;
        let dim = coords.first().map_or(0, Vec::len);
        if coords.iter().any(|c| c.len() != dim) {
            return Err(Error::Metric("coordinates of mixed dimension".into()));
        }
        let mut seen = HashMap::with_capacity(coords.len());
        for (i, c) in coords.iter().enumerate() {
            if let Some(j) = seen.insert(c.clone(), i) {
                return Err(Error::Metric(format!(
                    "points {j} and {i} share coordinates {c:?}"
                )));
            }
        }
        let n = coords.len();
        let space = Self::raw(label.into(), n, Metric::Lattice, Some(coords));
        space.with_boundary(boundary)
    }

    fn raw(label: String, n: usize, metric: Metric, coords: Option<Vec<Vec<i64>>>) -> Self {
        FiniteSpace {
            label,
            n,
            metric,
            coords,
            boundary: Vec::new(),
            boundary_dist: vec![None; n],
            interior_margin: 0,
            nonmetric: false,
            realized: OnceLock::new(),
        }
    }

    /// Replaces the window boundary.
    pub fn with_boundary(mut self, mut boundary: Vec<PointId>) -> Result<Self> {
        boundary.sort_unstable();
        boundary.dedup();
        if let Some(b) = boundary.iter().find(|b| b.0 >= self.n) {
            return Err(Error::Domain(format!("boundary point {b} out of range")));
        }
        self.boundary_dist = par::map_range(self.n, |x| {
            boundary.iter().map(|&b| self.dist(PointId(x), b)).min()
        });
        self.boundary = boundary;
        Ok(self)
    }

    /// Sets how far beyond a check radius the boundary must stay away.
    pub fn with_interior_margin(mut self, margin: Dist) -> Self {
        self.interior_margin = margin;
        self
    }

    /// Attaches coordinates (display and lookup only; the metric is unchanged).
    pub fn with_coords(mut self, coords: Vec<Vec<i64>>) -> Result<Self> {
        if coords.len() != self.n {
            return Err(Error::Domain(format!(
                "{} coordinates for {} points",
                coords.len(),
                self.n
            )));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    /// Renames the space.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> + '_ {
        (0..self.n).map(PointId)
    }

    pub fn contains(&self, x: PointId) -> bool {
        x.0 < self.n
    }

    /// Whether distances come from lattice coordinates rather than a table.
    pub fn is_lattice(&self) -> bool {
        matches!(self.metric, Metric::Lattice)
    }

    pub fn is_nonmetric(&self) -> bool {
        self.nonmetric
    }

    pub fn interior_margin(&self) -> Dist {
        self.interior_margin
    }

    pub fn boundary(&self) -> &[PointId] {
        &self.boundary
    }

    pub fn coords(&self, x: PointId) -> Option<&[i64]> {
        self.coords.as_ref().map(|c| c[x.0].as_slice())
    }

    pub fn all_coords(&self) -> Option<&[Vec<i64>]> {
        self.coords.as_deref()
    }

    /// Point with the given coordinates, if any.
    pub fn point_at(&self, coords: &[i64]) -> Option<PointId> {
        self.coords
            .as_ref()?
            .iter()
            .position(|c| c.as_slice() == coords)
            .map(PointId)
    }

    /// Whether two handles describe the same space (label and size).
    pub fn same_as(&self, other: &FiniteSpace) -> bool {
        self.n == other.n && self.label == other.label
    }

    #[inline]
    pub fn dist(&self, x: PointId, y: PointId) -> Dist {
        match &self.metric {
            Metric::Dense(d) => Dist::from(d[x.0 * self.n + y.0]),
            Metric::Lattice => {
                let c = self
                    .coords
                    .as_ref()
                    .expect("lattice spaces carry coordinates");
                c[x.0]
                    .iter()
                    .zip(&c[y.0])
                    .map(|(a, b)| a.abs_diff(*b))
                    .sum()
            }
        }
    }

    /// Full distance matrix (row-major).
    pub fn distance_matrix(&self) -> Vec<Vec<Dist>> {
        par::map_range(self.n, |x| {
            (0..self.n)
                .map(|y| self.dist(PointId(x), PointId(y)))
                .collect()
        })
    }

    /// Closed ball `{y : d(x,y) <= r}`, ascending.
    pub fn ball(&self, x: PointId, r: Dist) -> Vec<PointId> {
        self.points().filter(|&y| self.dist(x, y) <= r).collect()
    }

    /// `d(x, A)`, or `None` for empty `A`.
    pub fn dist_to_set(&self, x: PointId, set: &[PointId]) -> Option<Dist> {
        set.iter().map(|&a| self.dist(x, a)).min()
    }

    /// The `K`-neighborhood `A^K = {x : d(x, A) <= K}`, ascending.
    pub fn neighborhood(&self, set: &[PointId], k: Dist) -> Vec<PointId> {
        if set.is_empty() {
            return Vec::new();
        }
        let mut mark = vec![false; self.n];
        for &a in set {
            mark[a.0] = true;
        }
        let inside = par::map_range(self.n, |x| {
            mark[x] || set.iter().any(|&a| self.dist(PointId(x), a) <= k)
        });
        inside
            .into_iter()
            .enumerate()
            .filter_map(|(x, keep)| keep.then_some(PointId(x)))
            .collect()
    }

    /// `max_x |B(x, r)|`, the finite-window local-finiteness witness.
    pub fn growth_function(&self, r: Dist) -> usize {
        par::map_range(self.n, |x| {
            self.points()
                .filter(|&y| self.dist(PointId(x), y) <= r)
                .count()
        })
        .into_iter()
        .max()
        .unwrap_or(0)
    }

    /// `max_x |{y : d(x,y) < k}|`: bounds the class count of
    /// [`separated_partition`](Self::separated_partition).
    pub fn max_open_ball(&self, k: Dist) -> usize {
        par::map_range(self.n, |x| {
            self.points()
                .filter(|&y| self.dist(PointId(x), y) < k)
                .count()
        })
        .into_iter()
        .max()
        .unwrap_or(0)
    }

    /// Smallest positive distance, `None` for spaces with fewer than two points.
    pub fn min_positive_distance(&self) -> Option<Dist> {
        self.realized_distances().get(1).copied()
    }

    pub fn diameter(&self) -> Dist {
        self.realized_distances().last().copied().unwrap_or(0)
    }

    /// All distances realized by pairs of points (including 0), ascending.
    pub fn realized_distances(&self) -> &[Dist] {
        self.realized.get_or_init(|| {
            let rows = par::map_range(self.n, |x| {
                let mut v: Vec<Dist> = (x..self.n)
                    .map(|y| self.dist(PointId(x), PointId(y)))
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            });
            let mut all: Vec<Dist> = rows.into_iter().flatten().collect();
            all.sort_unstable();
            all.dedup();
            all
        })
    }

    /// Distance from `x` to the window boundary, `None` if there is none.
    pub fn boundary_distance(&self, x: PointId) -> Option<Dist> {
        self.boundary_dist[x.0]
    }

    /// Whether `B(x, rho + interior_margin)` misses the window boundary.
    pub fn is_interior(&self, x: PointId, rho: Dist) -> bool {
        match self.boundary_dist[x.0] {
            None => true,
            Some(b) => b > rho.saturating_add(self.interior_margin),
        }
    }

    /// Greedy first-fit partition into `k`-separated classes.
    ///
    /// Points are visited in index order and each joins the lowest-numbered
    /// class containing nothing within distance `< k`.
    pub fn separated_partition(&self, k: Dist) -> Partition {
        let mut class_of: Vec<usize> = vec![usize::MAX; self.n];
        let mut classes: Vec<Vec<PointId>> = Vec::new();
        let mut blocked: Vec<bool> = Vec::new();
        for x in self.points() {
            blocked.clear();
            blocked.resize(classes.len(), false);
            for y in 0..x.0 {
                if self.dist(x, PointId(y)) < k {
                    blocked[class_of[y]] = true;
                }
            }
            let c = blocked.iter().position(|b| !b).unwrap_or(classes.len());
            if c == classes.len() {
                classes.push(Vec::new());
            }
            classes[c].push(x);
            class_of[x.0] = c;
        }
        Partition {
            classes,
            separation: k,
        }
    }

    /// Checks the triangle inequality: exhaustively when there are at most
    /// [`TRIANGLE_TRIPLE_CAP`] triples, otherwise on a seeded sample.
    pub fn check_triangle(&self) -> Result<()> {
        let n = self.n;
        if matches!(self.metric, Metric::Lattice) {
            return Ok(());
        }
        let violation = |x: usize, y: usize, z: usize| -> Option<Error> {
            let (px, py, pz) = (PointId(x), PointId(y), PointId(z));
            let xz = self.dist(px, pz);
            let via = self.dist(px, py) + self.dist(py, pz);
            (xz > via).then_some(Error::Triangle { x, y, z, xz, via })
        };
        if (n as u64).pow(3) <= TRIANGLE_TRIPLE_CAP {
            let hit = par::find_first(n, |x| {
                (0..n).find_map(|y| (0..n).find_map(|z| violation(x, y, z)))
            });
            return hit.map_or(Ok(()), |(_, e)| Err(e));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(TRIANGLE_SEED);
        for _ in 0..TRIANGLE_SAMPLES {
            let (x, y, z) = (
                rng.random_range(0..n),
                rng.random_range(0..n),
                rng.random_range(0..n),
            );
            if let Some(e) = violation(x, y, z) {
                return Err(e);
            }
        }
        Ok(())
    }
}

fn enforce_cap(points: u128) -> Result<()> {
    let cap = point_cap();
    if points > cap as u128 {
        return Err(Error::Size { points, cap });
    }
    Ok(())
}

/// `{0, ..., side-1}^dim` with the l1 (word) metric.
///
/// Points are listed in lexicographic order of their coordinates; every point
/// with a coordinate equal to `0` or `side - 1` is on the window boundary.
pub fn build_grid_window(dim: usize, side: usize) -> Result<FiniteSpace> {
    if dim == 0 || side == 0 {
        return Err(Error::Domain("dim and side must be positive".into()));
    }
    let total = (side as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    enforce_cap(total)?;
    let total = total as usize;
    let mut coords = Vec::with_capacity(total);
    let mut boundary = Vec::new();
    for idx in 0..total {
        let mut c = vec![0i64; dim];
        let mut rem = idx;
        for slot in c.iter_mut().rev() {
            *slot = (rem % side) as i64;
            rem /= side;
        }
        if c.iter().any(|&v| v == 0 || v == side as i64 - 1) {
            boundary.push(PointId(idx));
        }
        coords.push(c);
    }
    FiniteSpace::lattice(format!("Z{dim}[0..{side}]"), coords, boundary)
}

/// The integer window `[lo, hi]`, cut at both ends.
pub fn line_window(lo: i64, hi: i64) -> Result<FiniteSpace> {
    if hi < lo {
        return Err(Error::Domain(format!("empty window [{lo}, {hi}]")));
    }
    let coords: Vec<Vec<i64>> = (lo..=hi).map(|v| vec![v]).collect();
    let last = coords.len() - 1;
    FiniteSpace::lattice(
        format!("Z[{lo}..={hi}]"),
        coords,
        vec![PointId(0), PointId(last)],
    )
}

/// The naturals window `{1, ..., n}`; only `n` is a cut (1 is the genuine end of the naturals).
pub fn naturals_window(n: usize) -> Result<FiniteSpace> {
    if n == 0 {
        return Err(Error::Domain("naturals window needs n >= 1".into()));
    }
    let coords: Vec<Vec<i64>> = (1..=n as i64).map(|v| vec![v]).collect();
    FiniteSpace::lattice(format!("N[1..={n}]"), coords, vec![PointId(n - 1)])
}

/// Shortest-path metric of a connected unweighted graph.
pub fn build_graph_space(n: usize, edges: &[(usize, usize)]) -> Result<FiniteSpace> {
    build_graph_space_labeled(format!("graph{n}"), n, edges)
}

pub fn build_graph_space_labeled(
    label: impl Into<String>,
    n: usize,
    edges: &[(usize, usize)],
) -> Result<FiniteSpace> {
    enforce_cap(n as u128)?;
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(Error::Domain(format!(
                "edge ({a},{b}) out of range for {n} points"
            )));
        }
        if a != b {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let rows: Vec<Vec<u32>> = par::map_range(n, |s| {
        let mut d = vec![u32::MAX; n];
        let mut queue = VecDeque::from([s]);
        d[s] = 0;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if d[w] == u32::MAX {
                    d[w] = d[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        d
    });
    if let Some(first) = rows.first() {
        if let Some(unreachable) = first.iter().position(|&v| v == u32::MAX) {
            return Err(Error::Disconnected { unreachable });
        }
    }
    let flat = rows.into_iter().flatten().collect();
    Ok(FiniteSpace::raw(label.into(), n, Metric::Dense(flat), None))
}

/// `Y x {1..n}` with `d((y,i),(z,j)) = d(y,z) + 1` for distinct pairs.
///
/// Points are fiber-major: `(y, i)` has index `(i - 1) * |Y| + y`, so the first
/// `|Y|` points are the copy `Y x {1}`.
pub fn plus_one_product(space: &FiniteSpace, n: usize) -> Result<FiniteSpace> {
    let m = space.len();
    enforce_cap((m as u128) * (n as u128))?;
    let total = m * n;
    let mut flat = vec![0u32; total * total];
    for p in 0..total {
        for q in 0..total {
            if p != q {
                let d = space.dist(PointId(p % m), PointId(q % m)) + 1;
                flat[p * total + q] = d as u32;
            }
        }
    }
    let coords = space.all_coords().map(|c| {
        (0..total)
            .map(|p| {
                let mut v = c[p % m].clone();
                v.push((p / m) as i64 + 1);
                v
            })
            .collect()
    });
    let boundary = (0..total)
        .filter(|p| space.boundary().contains(&PointId(p % m)))
        .map(PointId)
        .collect();
    let mut z = FiniteSpace::raw(
        format!("{}x{{1..{n}}}", space.label()),
        total,
        Metric::Dense(flat),
        coords,
    );
    z.interior_margin = space.interior_margin();
    z.with_boundary(boundary)
}

/// `X x {1..n}` with `d((x,i),(y,j)) = d(x,y)` for `x != y` and `1` for
/// `x = y, i != j`.
///
/// Points are base-major: `(x, i)` has index `x * n + (i - 1)`, so each fiber
/// is a contiguous block.
pub fn fiber_product(space: &FiniteSpace, n: usize) -> Result<FiniteSpace> {
    let m = space.len();
    enforce_cap((m as u128) * (n as u128))?;
    let total = m * n;
    let mut flat = vec![0u32; total * total];
    for p in 0..total {
        for q in 0..total {
            let (x, y) = (p / n, q / n);
            flat[p * total + q] = if x != y {
                space.dist(PointId(x), PointId(y)) as u32
            } else if p != q {
                1
            } else {
                0
            };
        }
    }
    let boundary = (0..total)
        .filter(|p| space.boundary().contains(&PointId(p / n)))
        .map(PointId)
        .collect();
    let mut z = FiniteSpace::raw(
        format!("{}(x){n}", space.label()),
        total,
        Metric::Dense(flat),
        None,
    );
    z.interior_margin = space.interior_margin();
    z.with_boundary(boundary)
}

/// A partition into classes whose members are pairwise at distance `>= separation`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub classes: Vec<Vec<PointId>>,
    pub separation: Dist,
}

impl Partition {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Class index for each point of `space`.
    pub fn class_index(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (c, members) in self.classes.iter().enumerate() {
            for &x in members {
                out[x.0] = Some(c);
            }
        }
        out
    }

    /// Disjointness, coverage and separation, by direct pairwise scan.
    pub fn validate(&self, space: &FiniteSpace) -> Result<()> {
        let mut seen = vec![false; space.len()];
        for (c, members) in self.classes.iter().enumerate() {
            for (i, &x) in members.iter().enumerate() {
                if !space.contains(x) {
                    return Err(Error::Invariant(format!(
                        "class {c} holds foreign point {x}"
                    )));
                }
                if std::mem::replace(&mut seen[x.0], true) {
                    return Err(Error::Invariant(format!("point {x} appears twice")));
                }
                for &y in &members[..i] {
                    let d = space.dist(x, y);
                    if d < self.separation {
                        return Err(Error::Invariant(format!(
                            "class {c}: d({y},{x})={d} < {}",
                            self.separation
                        )));
                    }
                }
            }
        }
        if let Some(x) = seen.iter().position(|s| !s) {
            return Err(Error::Invariant(format!("point {x} not covered")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[usize]) -> Vec<PointId> {
        v.iter().copied().map(PointId).collect()
    }

    #[test]
    fn grid_window_line_and_square() {
        let line = build_grid_window(1, 4).unwrap();
        assert_eq!(line.len(), 4);
        assert_eq!(line.dist(PointId(0), PointId(3)), 3);
        let sq = build_grid_window(2, 2).unwrap();
        assert_eq!(sq.len(), 4);
        let a = sq.point_at(&[0, 0]).unwrap();
        let b = sq.point_at(&[1, 1]).unwrap();
        assert_eq!(sq.dist(a, b), 2);
    }

    #[test]
    fn grid_window_cap() {
        assert_eq!(build_grid_window(2, 100).unwrap().len(), 10_000);
        assert!(matches!(
            build_grid_window(2, 150),
            Err(Error::Size { points: 22_500, .. })
        ));
        assert!(matches!(
            build_grid_window(64, 1000),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn graph_spaces() {
        let path = build_graph_space(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.dist(PointId(0), PointId(2)), 2);
        let tri = build_graph_space(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        for x in tri.points() {
            for y in tri.points() {
                assert_eq!(tri.dist(x, y), u64::from(x != y));
            }
        }
        assert!(matches!(
            build_graph_space(4, &[(0, 1), (2, 3)]),
            Err(Error::Disconnected { unreachable: 2 })
        ));
    }

    #[test]
    fn balls_and_neighborhoods() {
        let line = build_grid_window(1, 10).unwrap();
        assert_eq!(line.ball(PointId(5), 2), ids(&[3, 4, 5, 6, 7]));
        assert_eq!(line.ball(PointId(5), 0), ids(&[5]));
        assert_eq!(line.neighborhood(&ids(&[5]), 1), ids(&[4, 5, 6]));
        assert!(line.neighborhood(&[], 3).is_empty());
        assert_eq!(
            line.neighborhood(&ids(&[0, 9]), 2),
            ids(&[0, 1, 2, 7, 8, 9])
        );
        let sq = build_grid_window(2, 5).unwrap();
        let c = sq.point_at(&[2, 2]).unwrap();
        assert_eq!(sq.ball(c, 1).len(), 5);
    }

    #[test]
    fn growth() {
        let line = build_grid_window(1, 10).unwrap();
        assert_eq!(line.growth_function(1), 3);
        assert_eq!(line.growth_function(0), 1);
        assert_eq!(build_grid_window(2, 11).unwrap().growth_function(1), 5);
    }

    #[test]
    fn partition_examples() {
        let line = build_grid_window(1, 10).unwrap();
        let p = line.separated_partition(3);
        assert_eq!(
            p.classes,
            vec![ids(&[0, 3, 6, 9]), ids(&[1, 4, 7]), ids(&[2, 5, 8])]
        );
        p.validate(&line).unwrap();
        assert_eq!(line.separated_partition(1).class_count(), 1);
        let tri = build_graph_space(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let p = tri.separated_partition(2);
        assert_eq!(p.classes, vec![ids(&[0]), ids(&[1]), ids(&[2])]);
    }

    #[test]
    fn matrix_validation() {
        let bad = vec![vec![0, 1, 5], vec![1, 0, 1], vec![5, 1, 0]];
        match FiniteSpace::from_matrix("bad", &bad, TriangleCheck::Require) {
            Err(Error::Triangle {
                x: 0,
                y: 1,
                z: 2,
                xz: 5,
                via: 2,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let flagged = FiniteSpace::from_matrix("bad", &bad, TriangleCheck::Flag).unwrap();
        assert!(flagged.is_nonmetric());
        let asym = vec![vec![0, 1], vec![2, 0]];
        assert!(FiniteSpace::from_matrix("a", &asym, TriangleCheck::Require).is_err());
        let fractional = vec![vec![0, 0], vec![0, 0]];
        assert!(FiniteSpace::from_matrix("z", &fractional, TriangleCheck::Require).is_err());
    }

    #[test]
    fn interior_points() {
        let n = naturals_window(10).unwrap();
        assert!(n.is_interior(PointId(0), 5));
        assert!(n.is_interior(PointId(5), 3));
        assert!(!n.is_interior(PointId(6), 3));
        let z = line_window(-5, 5).unwrap();
        assert!(!z.is_interior(PointId(1), 1));
        assert!(z.is_interior(PointId(5), 4));
        let g = build_graph_space(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(g.points().all(|x| g.is_interior(x, 100)));
    }

    #[test]
    fn products() {
        let y = line_window(0, 2).unwrap();
        let z = plus_one_product(&y, 2).unwrap();
        assert_eq!(z.len(), 6);
        assert_eq!(z.dist(PointId(0), PointId(3)), 1);
        assert_eq!(z.dist(PointId(0), PointId(1)), 2);
        assert_eq!(z.dist(PointId(0), PointId(5)), 3);
        z.check_triangle().unwrap();
        let w = fiber_product(&y, 3).unwrap();
        assert_eq!(w.dist(PointId(0), PointId(1)), 1);
        assert_eq!(w.dist(PointId(0), PointId(3)), 1);
        assert_eq!(w.dist(PointId(0), PointId(8)), 2);
        w.check_triangle().unwrap();
    }
}
