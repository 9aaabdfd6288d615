//! Orbit spaces of finite permutation groups.

use std::collections::HashSet;
use std::sync::Arc;

use super::certificate::{quotient_certificate_with, Interior, QuotientCertificate};
use super::PointMap;
use crate::error::{Error, Result};
use crate::par;
use crate::spaces::{Dist, FiniteSpace, PointId, TriangleCheck};

#[derive(Clone, Debug)]
pub struct OrbitSpace {
    pub quotient: Arc<FiniteSpace>,
    pub q: PointMap,
    /// Orbits ordered by their least point, each ascending.
    pub classes: Vec<Vec<PointId>>,
    /// `max_{g, x} d(x, g x)`.
    pub displacement: Dist,
    /// Certificate for `q` at `K = displacement`.
    pub certificate: QuotientCertificate,
}

fn check_group(n: usize, perms: &[Vec<usize>]) -> Result<()> {
    if perms.is_empty() {
        return Err(Error::GroupAxiom("empty generating list".into()));
    }
    for (i, p) in perms.iter().enumerate() {
        if p.len() != n {
            return Err(Error::GroupAxiom(format!(
                "permutation {i} has length {}, expected {n}",
                p.len()
            )));
        }
        let mut seen = vec![false; n];
        for &v in p {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::GroupAxiom(format!(
                    "permutation {i} is not a bijection"
                )));
            }
        }
    }
    let set: HashSet<&[usize]> = perms.iter().map(Vec::as_slice).collect();
    let identity: Vec<usize> = (0..n).collect();
    if !set.contains(identity.as_slice()) {
        return Err(Error::GroupAxiom("identity missing".into()));
    }
    for (i, p) in perms.iter().enumerate() {
        let mut inverse = vec![0; n];
        for (x, &v) in p.iter().enumerate() {
            inverse[v] = x;
        }
        if !set.contains(inverse.as_slice()) {
            return Err(Error::GroupAxiom(format!(
                "inverse of permutation {i} missing"
            )));
        }
        for (j, r) in perms.iter().enumerate() {
            let composed: Vec<usize> = (0..n).map(|x| p[r[x]]).collect();
            if !set.contains(composed.as_slice()) {
                return Err(Error::GroupAxiom(format!(
                    "product of permutations {i} and {j} missing"
                )));
            }
        }
    }
    Ok(())
}

/// Directed term `sup_{a in A} inf_{b in B} d(a, b)`.
fn directed(space: &FiniteSpace, a: &[PointId], b: &[PointId]) -> Dist {
    a.iter()
        .map(|&p| b.iter().map(|&q| space.dist(p, q)).min().unwrap_or(0))
        .max()
        .unwrap_or(0)
}

/// The orbit space `X/G` under the distance
/// `min { sup_{x'} inf_{y'} d(x', y'), sup_{y'} inf_{x'} d(x', y') }`.
///
/// `perms` must list every element of the group. The quotient is flagged
/// nonmetric when this distance breaks the triangle inequality; it is not repaired.
pub fn orbit_space(
    space: &Arc<FiniteSpace>,
    perms: &[Vec<usize>],
    scales: &[Dist],
) -> Result<OrbitSpace> {
    let n = space.len();
    check_group(n, perms)?;
    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<PointId>> = Vec::new();
    for x in 0..n {
        if class_of[x] != usize::MAX {
            continue;
        }
        let mut orbit: Vec<usize> = perms.iter().map(|p| p[x]).collect();
        orbit.sort_unstable();
        orbit.dedup();
        for &y in &orbit {
            class_of[y] = classes.len();
        }
        classes.push(orbit.into_iter().map(PointId).collect());
    }
    let c = classes.len();
    let rows = par::map_range(c, |i| {
        (0..c)
            .map(|j| {
                if i == j {
                    0
                } else {
                    directed(space, &classes[i], &classes[j]).min(directed(
                        space,
                        &classes[j],
                        &classes[i],
                    ))
                }
            })
            .collect::<Vec<Dist>>()
    });
    let quotient = FiniteSpace::from_matrix(
        format!("{}/G{}", space.label(), perms.len()),
        &rows,
        TriangleCheck::Flag,
    )?;
    let mut boundary: Vec<PointId> = space
        .boundary()
        .iter()
        .map(|b| PointId(class_of[b.0]))
        .collect();
    boundary.sort_unstable();
    boundary.dedup();
    let quotient = Arc::new(
        quotient
            .with_boundary(boundary)?
            .with_interior_margin(space.interior_margin()),
    );
    let q = PointMap::new(
        space.clone(),
        quotient.clone(),
        class_of.into_iter().map(PointId).collect(),
    )?;
    let displacement = perms
        .iter()
        .flat_map(|p| {
            p.iter()
                .enumerate()
                .map(|(x, &v)| space.dist(PointId(x), PointId(v)))
        })
        .max()
        .unwrap_or(0);
    // The quotient metric is computed from the window itself, so every point is certified.
    let certificate = quotient_certificate_with(&q, displacement, scales, &Interior::All)?;
    Ok(OrbitSpace {
        quotient,
        q,
        classes,
        displacement,
        certificate,
    })
}
