//! Injectivization through `Y x {1..n}` and the net-counting bound for
//! injective co-coarse maps.

use std::sync::Arc;

use serde::Serialize;

use super::certificate::{auto_interior, cococoarse_witness_with, Interior};
use super::PointMap;
use crate::error::{Error, Result};
use crate::par;
use crate::spaces::{plus_one_product, Dist, FiniteSpace, PointId};

/// An injective replacement `g: X -> Z` of `f: X -> Y` with `Z = Y x {1..n}`.
#[derive(Clone, Debug)]
pub struct Injectivization {
    pub n: usize,
    pub z: Arc<FiniteSpace>,
    /// `x -> (f(x), j)` where `x` is the `j`-th point of its fiber.
    pub g: PointMap,
    /// `y -> (y, 1)`.
    pub inclusion: PointMap,
    /// `(y, i) -> y`.
    pub projection: PointMap,
    /// Distance between `inclusion o f` and `g`; at most 1.
    pub closeness: Dist,
    /// Distance between `inclusion o projection` and the identity of `Z`; at most 1.
    pub section_defect: Dist,
}

pub fn injectivize(f: &PointMap) -> Result<Injectivization> {
    let y = f.codomain();
    let m = y.len();
    let n = f.max_fiber().max(1);
    let z = Arc::new(plus_one_product(y, n)?);
    let mut values = vec![PointId(0); f.domain().len()];
    for target in y.points() {
        for (j, &x) in f.fiber(target).iter().enumerate() {
            values[x.0] = PointId(j * m + target.0);
        }
    }
    let g = PointMap::new(f.domain().clone(), z.clone(), values)?;
    let inclusion = PointMap::from_fn(y.clone(), z.clone(), |p| p)?;
    let projection = PointMap::from_fn(z.clone(), y.clone(), |p| PointId(p.0 % m))?;
    let closeness = f.then(&inclusion)?.closeness(&g)?;
    let section_defect = projection
        .then(&inclusion)?
        .closeness(&PointMap::identity(z.clone()))?;
    if inclusion
        .then(&projection)?
        .closeness(&PointMap::identity(y.clone()))?
        != 0
    {
        return Err(Error::Invariant(
            "inclusion is not a section of the projection".into(),
        ));
    }
    Ok(Injectivization {
        n,
        z,
        g,
        inclusion,
        projection,
        closeness,
        section_defect,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NetCover {
    pub center: PointId,
    /// Greedy net `x_1, ..., x_t`; `f^{-1}(B(center, eps))` lies in the union of `B(x_i, 3 delta)`.
    pub net: Vec<PointId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NetScale {
    pub eps: Dist,
    /// Co-coarse witness at `2 eps`.
    pub delta: Dist,
    pub max_steps: usize,
    pub covers: Vec<NetCover>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MBound {
    #[serde(rename = "K")]
    pub k: Dist,
    /// `max_y |B(y, K)|`.
    pub m: usize,
    pub scales: Vec<NetScale>,
}

/// `m = max_y |B(y, K)|` and, per scale, the greedy nets covering preimages of `eps`-balls.
///
/// A net picks `x_1` with `f(x_1)` in `B(y, eps)` and keeps adding preimage
/// points outside every `B(x_i, 3 delta)`. Each `x_i` has a companion `w_i`
/// within `delta` whose image is `K`-close to `y`; the companions are distinct,
/// so an injective map can never need more than `m` steps. Only centers whose
/// whole preimage lies in the certificate interior are checked.
pub fn injective_quotient_m_bound(f: &PointMap, k: Dist, scales: &[Dist]) -> Result<MBound> {
    f.require_injective()?;
    let cod = f.codomain();
    let dom = f.domain();
    let m = cod.growth_function(k);
    let max_eps = scales.iter().copied().max().unwrap_or(0);
    let interior = auto_interior(f, 2 * max_eps + k);
    let mut inside = vec![false; dom.len()];
    for x in &interior {
        inside[x.0] = true;
    }
    let mut out = Vec::with_capacity(scales.len());
    for &eps in scales {
        let delta = cococoarse_witness_with(f, k, 2 * eps, &Interior::Explicit(interior.clone()))
            .ok_or_else(|| {
            Error::Precondition(format!("no co-coarse witness at K={k}, scale {}", 2 * eps))
        })?;
        let centers: Vec<PointId> = cod
            .points()
            .filter(|&y| {
                let pre = f.preimage(&cod.ball(y, eps));
                !pre.is_empty() && pre.iter().all(|x| inside[x.0])
            })
            .collect();
        let nets = par::map_slice(&centers, |&y| {
            let pre = f.preimage(&cod.ball(y, eps));
            let mut net: Vec<PointId> = Vec::new();
            for &x in &pre {
                if net.iter().all(|&c| dom.dist(c, x) > 3 * delta) {
                    net.push(x);
                }
            }
            NetCover { center: y, net }
        });
        if let Some(bad) = nets.iter().find(|c| c.net.len() > m) {
            return Err(Error::Invariant(format!(
                "greedy net at {} took {} steps, above m={m}",
                bad.center,
                bad.net.len()
            )));
        }
        out.push(NetScale {
            eps,
            delta,
            max_steps: nets.iter().map(|c| c.net.len()).max().unwrap_or(0),
            covers: nets,
        });
    }
    Ok(MBound { k, m, scales: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{double_spacing, folding};
    use crate::spaces::build_graph_space_labeled;

    #[test]
    fn two_to_one_on_three_points() {
        let x = Arc::new(build_graph_space_labeled("abc", 3, &[(0, 1), (1, 2)]).unwrap());
        let y = Arc::new(build_graph_space_labeled("yz", 2, &[(0, 1)]).unwrap());
        let f = PointMap::new(x, y, vec![PointId(0), PointId(0), PointId(1)]).unwrap();
        let inj = injectivize(&f).unwrap();
        assert_eq!((inj.n, inj.z.len()), (2, 4));
        // (y,1)=0, (z,1)=1, (y,2)=2, (z,2)=3
        assert_eq!(inj.g.values(), &[PointId(0), PointId(2), PointId(1)]);
        assert!(inj.g.is_injective());
        assert!(inj.closeness <= 1 && inj.section_defect <= 1);
    }

    #[test]
    fn injective_map_lands_in_first_copy() {
        let f = folding(10).unwrap();
        let inj = injectivize(&f).unwrap();
        assert_eq!(inj.n, 1);
        assert_eq!(inj.closeness, 0);
        assert_eq!(inj.g.values(), f.values());
    }

    #[test]
    fn constant_map_fills_a_column() {
        let x = Arc::new(build_graph_space_labeled("K3", 3, &[(0, 1), (1, 2), (0, 2)]).unwrap());
        let y = Arc::new(build_graph_space_labeled("pt", 1, &[]).unwrap());
        let f = PointMap::from_fn(x, y, |_| PointId(0)).unwrap();
        let inj = injectivize(&f).unwrap();
        assert_eq!(inj.z.len(), 3);
        assert!(inj.g.is_injective() && inj.g.is_surjective());
    }

    #[test]
    fn net_bounds() {
        let f = folding(40).unwrap();
        let b = injective_quotient_m_bound(&f, 1, &[1, 2, 4]).unwrap();
        assert_eq!(b.m, 3);
        assert!(b
            .scales
            .iter()
            .all(|s| s.max_steps <= 3 && !s.covers.is_empty()));

        let d = double_spacing(20).unwrap();
        let b = injective_quotient_m_bound(&d, 1, &[1, 2]).unwrap();
        assert_eq!(b.m, 3);
        assert!(b.scales.iter().all(|s| s.max_steps <= b.m));
    }
}
