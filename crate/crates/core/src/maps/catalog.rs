//! Standard maps between lattice windows, used by the example corpus and tests.

use std::sync::Arc;

use super::PointMap;
use crate::error::{Error, Result};
use crate::spaces::{
    build_graph_space_labeled, line_window, naturals_window, FiniteSpace, PointId,
};

/// The box `prod [lo_i, hi_i]` of the integer lattice; points on any face are boundary.
pub fn lattice_box(ranges: &[(i64, i64)]) -> Result<FiniteSpace> {
    if ranges.is_empty() || ranges.iter().any(|(lo, hi)| hi < lo) {
        return Err(Error::Domain(format!("empty box {ranges:?}")));
    }
    let mut coords: Vec<Vec<i64>> = vec![Vec::new()];
    for &(lo, hi) in ranges {
        coords = coords
            .into_iter()
            .flat_map(|c| {
                (lo..=hi).map(move |v| {
                    let mut c = c.clone();
                    c.push(v);
                    c
                })
            })
            .collect();
    }
    let boundary = coords
        .iter()
        .enumerate()
        .filter(|(_, c)| c.iter().zip(ranges).any(|(v, (lo, hi))| v == lo || v == hi))
        .map(|(i, _)| PointId(i))
        .collect();
    let label = ranges
        .iter()
        .map(|(lo, hi)| format!("[{lo}..={hi}]"))
        .collect::<Vec<_>>()
        .join("x");
    FiniteSpace::lattice(format!("Z{}", label), coords, boundary)
}

fn lattice_map(
    domain: FiniteSpace,
    codomain: FiniteSpace,
    rule: impl Fn(&[i64]) -> Vec<i64>,
) -> Result<PointMap> {
    let (domain, codomain) = (Arc::new(domain), Arc::new(codomain));
    let mut values = Vec::with_capacity(domain.len());
    for x in domain.points() {
        let c = domain.coords(x).expect("lattice coordinates");
        let target = rule(c);
        let y = codomain.point_at(&target).ok_or_else(|| {
            Error::Domain(format!(
                "{:?} maps to {:?}, outside {}",
                c,
                target,
                codomain.label()
            ))
        })?;
        values.push(y);
    }
    PointMap::new(domain, codomain, values)
}

/// The folding bijection from an integer window onto `{1, ..., n}`:
/// `v -> 2v` for `v >= 1` and `v -> -2v + 1` for `v <= 0`.
///
/// The integer window is `[-(ceil(n/2) - 1), floor(n/2)]`, exactly the preimage of `{1..n}`.
pub fn folding(n: usize) -> Result<PointMap> {
    if n == 0 {
        return Err(Error::Domain("folding needs n >= 1".into()));
    }
    let hi = (n / 2) as i64;
    let lo = -(n.div_ceil(2) as i64 - 1);
    lattice_map(line_window(lo, hi)?, naturals_window(n)?, |c| {
        let v = c[0];
        vec![if v >= 1 { 2 * v } else { -2 * v + 1 }]
    })
}

/// Translation `[lo, hi] -> [lo + t, hi + t]`.
pub fn shift(lo: i64, hi: i64, t: i64) -> Result<PointMap> {
    lattice_map(line_window(lo, hi)?, line_window(lo + t, hi + t)?, |c| {
        vec![c[0] + t]
    })
}

/// Reflection `[lo, hi] -> [-hi, -lo]`, `v -> -v`.
pub fn reflection(lo: i64, hi: i64) -> Result<PointMap> {
    lattice_map(line_window(lo, hi)?, line_window(-hi, -lo)?, |c| {
        vec![-c[0]]
    })
}

/// `v -> floor(v / 2)` onto `[floor(lo/2), floor(hi/2)]`.
pub fn halving(lo: i64, hi: i64) -> Result<PointMap> {
    lattice_map(
        line_window(lo, hi)?,
        line_window(lo.div_euclid(2), hi.div_euclid(2))?,
        |c| vec![c[0].div_euclid(2)],
    )
}

/// Projection of the strip `[lo, hi] x [0, width - 1]` onto `[lo, hi]`.
pub fn strip_projection(lo: i64, hi: i64, width: i64) -> Result<PointMap> {
    lattice_map(
        lattice_box(&[(lo, hi), (0, width - 1)])?,
        line_window(lo, hi)?,
        |c| vec![c[0]],
    )
}

/// Standard projection `{0..side-1}^from -> {0..side-1}^to` keeping the first `to` coordinates.
pub fn projection(from: usize, to: usize, side: usize) -> Result<PointMap> {
    if to == 0 || to > from {
        return Err(Error::Domain(format!(
            "cannot project Z^{from} onto Z^{to}"
        )));
    }
    let s = side as i64 - 1;
    lattice_map(
        lattice_box(&vec![(0, s); from])?,
        lattice_box(&vec![(0, s); to])?,
        |c| c[..to].to_vec(),
    )
}

/// Inclusion of `{1..n}` into the integer window `[lo, hi]`.
pub fn naturals_inclusion(n: usize, lo: i64, hi: i64) -> Result<PointMap> {
    lattice_map(naturals_window(n)?, line_window(lo, hi)?, |c| c.to_vec())
}

/// `k -> 2k` from `{1..n}` into `{1..2n}`.
pub fn double_spacing(n: usize) -> Result<PointMap> {
    lattice_map(naturals_window(n)?, naturals_window(2 * n)?, |c| {
        vec![2 * c[0]]
    })
}

/// The 2-to-1 fold of the cycle on `2m` vertices onto the path on `m` vertices.
pub fn cycle_fold(m: usize) -> Result<PointMap> {
    if m < 2 {
        return Err(Error::Domain("cycle fold needs m >= 2".into()));
    }
    let n = 2 * m;
    let cycle: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    let path: Vec<(usize, usize)> = (0..m - 1).map(|i| (i, i + 1)).collect();
    let domain = Arc::new(build_graph_space_labeled(format!("C{n}"), n, &cycle)?);
    let codomain = Arc::new(build_graph_space_labeled(format!("P{m}"), m, &path)?);
    PointMap::from_fn(domain, codomain, |x| PointId(x.0.min(n - 1 - x.0)))
}

/// Constant map to `y`.
pub fn constant(
    domain: Arc<FiniteSpace>,
    codomain: Arc<FiniteSpace>,
    y: PointId,
) -> Result<PointMap> {
    PointMap::from_fn(domain, codomain, |_| y)
}
