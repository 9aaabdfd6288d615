//! Coarsely n-to-1 witnesses.
//!
//! Preimages of codomain balls of radius `s` are clustered into pieces of
//! diameter at most `r`. Clustering first splits a preimage into
//! `r`-connected components and then packs each component first-fit in
//! index order, so a piece never straddles two components.

use serde::Serialize;

use super::PointMap;
use crate::error::{Error, Result};
use crate::par;
use crate::spaces::{Dist, FiniteSpace, PointId};

#[derive(Clone, Debug, Default)]
pub struct CoverOptions {
    /// Largest cover scale tried; defaults to `2 s`.
    pub cover_cap: Option<Dist>,
    /// Ball centers to check; defaults to codomain points at least `s` from the boundary.
    pub centers: Option<Vec<PointId>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BallCover {
    pub center: PointId,
    pub pieces: Vec<Vec<PointId>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NTo1Witness {
    pub s: Dist,
    pub r: Dist,
    pub n: usize,
    pub balls: Vec<BallCover>,
}

fn diameter(space: &FiniteSpace, set: &[PointId]) -> Dist {
    set.iter()
        .enumerate()
        .flat_map(|(i, &a)| set[i + 1..].iter().map(move |&b| space.dist(a, b)))
        .max()
        .unwrap_or(0)
}

/// Splits an ascending point set into pieces of diameter at most `r`.
fn cluster(space: &FiniteSpace, set: &[PointId], r: Dist) -> Vec<Vec<PointId>> {
    let mut component = vec![usize::MAX; set.len()];
    let mut count = 0;
    for start in 0..set.len() {
        if component[start] != usize::MAX {
            continue;
        }
        component[start] = count;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..set.len() {
                if component[j] == usize::MAX && space.dist(set[i], set[j]) <= r {
                    component[j] = count;
                    stack.push(j);
                }
            }
        }
        count += 1;
    }
    let mut pieces = Vec::new();
    for c in 0..count {
        let mut local: Vec<Vec<PointId>> = Vec::new();
        for (i, &x) in set.iter().enumerate() {
            if component[i] != c {
                continue;
            }
            match local
                .iter_mut()
                .find(|p| p.iter().all(|&a| space.dist(a, x) <= r))
            {
                Some(p) => p.push(x),
                None => local.push(vec![x]),
            }
        }
        pieces.extend(local);
    }
    pieces
}

impl NTo1Witness {
    /// Re-checks coverage, piece diameters and piece counts against `f`.
    pub fn validate(&self, f: &PointMap) -> Result<()> {
        let dom = f.domain();
        for ball in &self.balls {
            if ball.pieces.len() > self.n {
                return Err(Error::Invariant(format!(
                    "ball at {} uses {} pieces, more than n={}",
                    ball.center,
                    ball.pieces.len(),
                    self.n
                )));
            }
            if let Some(p) = ball.pieces.iter().find(|p| diameter(dom, p) > self.r) {
                return Err(Error::Invariant(format!(
                    "piece {p:?} has diameter above r={}",
                    self.r
                )));
            }
            let pre = f.preimage(&f.codomain().ball(ball.center, self.s));
            if let Some(x) = pre
                .iter()
                .find(|x| !ball.pieces.iter().any(|p| p.contains(x)))
            {
                return Err(Error::Invariant(format!(
                    "preimage point {x} of the ball at {} is uncovered",
                    ball.center
                )));
            }
        }
        Ok(())
    }

    /// Transfers this witness for `f` to `g` at scale `s`, with the same `n` and `r`.
    ///
    /// Needs `self.s >= s + m` where `m` is the distance between `f` and `g`:
    /// `g^{-1}(B(y, s)) ⊆ f^{-1}(B(y, s + m))`. Only the centers this witness
    /// already covers are used.
    pub fn transfer(&self, f: &PointMap, g: &PointMap, s: Dist) -> Result<NTo1Witness> {
        let m = f.closeness(g)?;
        if self.s < s + m {
            return Err(Error::Precondition(format!(
                "witness scale {} is below s + m = {}",
                self.s,
                s + m
            )));
        }
        let balls = self
            .balls
            .iter()
            .map(|ball| {
                let pre = g.preimage(&g.codomain().ball(ball.center, s));
                let pieces: Vec<Vec<PointId>> = ball
                    .pieces
                    .iter()
                    .map(|p| {
                        p.iter()
                            .copied()
                            .filter(|x| pre.binary_search(x).is_ok())
                            .collect()
                    })
                    .filter(|p: &Vec<PointId>| !p.is_empty())
                    .collect();
                BallCover {
                    center: ball.center,
                    pieces,
                }
            })
            .collect();
        let out = NTo1Witness {
            s,
            r: self.r,
            n: self.n,
            balls,
        };
        out.validate(g)?;
        Ok(out)
    }
}

/// Smallest `n <= n_max`, then smallest `r`, for which every checked ball of
/// radius `s` has a preimage covered by `n` pieces of diameter at most `r`.
pub fn n_to_1_witness(f: &PointMap, s: Dist, n_max: usize) -> Option<NTo1Witness> {
    n_to_1_witness_with(f, s, n_max, &CoverOptions::default())
}

pub fn n_to_1_witness_with(
    f: &PointMap,
    s: Dist,
    n_max: usize,
    options: &CoverOptions,
) -> Option<NTo1Witness> {
    let dom = f.domain();
    let cod = f.codomain();
    let centers: Vec<PointId> = match &options.centers {
        Some(c) => c.clone(),
        None => cod.points().filter(|&y| cod.is_interior(y, s)).collect(),
    };
    let preimages: Vec<Vec<PointId>> = par::map_slice(&centers, |&y| f.preimage(&cod.ball(y, s)));
    let cap = options.cover_cap.unwrap_or(2 * s);
    let radii: Vec<Dist> = dom
        .realized_distances()
        .iter()
        .copied()
        .filter(|&r| r <= cap)
        .collect();
    let counts: Vec<usize> = par::map_slice(&radii, |&r| {
        preimages
            .iter()
            .map(|p| cluster(dom, p, r).len())
            .max()
            .unwrap_or(0)
    });
    let n = *counts.iter().min()?;
    if n > n_max {
        return None;
    }
    let r = radii[counts.iter().position(|&c| c == n)?];
    let balls = centers
        .iter()
        .zip(&preimages)
        .map(|(&center, p)| BallCover {
            center,
            pieces: cluster(dom, p, r),
        })
        .collect();
    Some(NTo1Witness {
        s,
        r,
        n: n.max(1),
        balls,
    })
}
