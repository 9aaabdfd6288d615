//! Maps between finite windows and the certificates attached to them.

mod catalog;
mod certificate;
mod cover;
mod injective;
mod orbit;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::par;
use crate::spaces::{Dist, FiniteSpace, PointId};

pub use catalog::*;
pub use certificate::{
    closeness_transfer, cococoarse_witness, cococoarse_witness_with, composition_constant,
    quotient_certificate, quotient_certificate_with, CompositionReport, CompositionStep, Interior,
    QuotientCertificate, ScaleTransfer, ScaleVerdict, TransferReport, Verdict,
};
pub use cover::{n_to_1_witness, n_to_1_witness_with, BallCover, CoverOptions, NTo1Witness};
pub use injective::{
    injective_quotient_m_bound, injectivize, Injectivization, MBound, NetCover, NetScale,
};
pub use orbit::{orbit_space, OrbitSpace};

/// A total map between two finite spaces, with its fibers cached.
#[derive(Clone, Debug)]
pub struct PointMap {
    domain: Arc<FiniteSpace>,
    codomain: Arc<FiniteSpace>,
    values: Vec<PointId>,
    fibers: Vec<Vec<PointId>>,
}

impl PointMap {
    pub fn new(
        domain: Arc<FiniteSpace>,
        codomain: Arc<FiniteSpace>,
        values: Vec<PointId>,
    ) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::Domain(format!(
                "map has {} values for a domain of {} points",
                values.len(),
                domain.len()
            )));
        }
        let mut fibers = vec![Vec::new(); codomain.len()];
        for (x, &y) in values.iter().enumerate() {
            if !codomain.contains(y) {
                return Err(Error::Domain(format!(
                    "value {y} of point {x} outside codomain of {} points",
                    codomain.len()
                )));
            }
            fibers[y.0].push(PointId(x));
        }
        Ok(PointMap {
            domain,
            codomain,
            values,
            fibers,
        })
    }

    pub fn from_fn(
        domain: Arc<FiniteSpace>,
        codomain: Arc<FiniteSpace>,
        f: impl Fn(PointId) -> PointId,
    ) -> Result<Self> {
        let values = domain.points().map(f).collect();
        Self::new(domain, codomain, values)
    }

    pub fn identity(space: Arc<FiniteSpace>) -> Self {
        let values = space.points().collect();
        Self::new(space.clone(), space, values).expect("identity is total")
    }

    pub fn domain(&self) -> &Arc<FiniteSpace> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FiniteSpace> {
        &self.codomain
    }

    #[inline]
    pub fn apply(&self, x: PointId) -> PointId {
        self.values[x.0]
    }

    pub fn values(&self) -> &[PointId] {
        &self.values
    }

    /// `f^{-1}(y)`, ascending.
    pub fn fiber(&self, y: PointId) -> &[PointId] {
        &self.fibers[y.0]
    }

    /// `f^{-1}(B)` for an ascending or unordered set `B`, ascending.
    pub fn preimage(&self, set: &[PointId]) -> Vec<PointId> {
        let mut out: Vec<PointId> = set.iter().flat_map(|&y| self.fiber(y)).copied().collect();
        out.sort_unstable();
        out
    }

    /// `f(A)`, ascending and deduplicated.
    pub fn image_of(&self, set: &[PointId]) -> Vec<PointId> {
        let mut out: Vec<PointId> = set.iter().map(|&x| self.apply(x)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn image(&self) -> Vec<PointId> {
        self.codomain
            .points()
            .filter(|&y| !self.fibers[y.0].is_empty())
            .collect()
    }

    pub fn max_fiber(&self) -> usize {
        self.fibers.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_injective(&self) -> bool {
        self.max_fiber() <= 1
    }

    pub fn is_surjective(&self) -> bool {
        self.fibers.iter().all(|f| !f.is_empty())
    }

    /// The first collision, as `(first, second, value)`.
    pub fn collision(&self) -> Option<(PointId, PointId, PointId)> {
        self.fibers
            .iter()
            .enumerate()
            .find(|(_, f)| f.len() > 1)
            .map(|(y, f)| (f[0], f[1], PointId(y)))
    }

    pub fn require_injective(&self) -> Result<()> {
        match self.collision() {
            None => Ok(()),
            Some((a, b, y)) => Err(Error::NotInjective {
                first: a.0,
                second: b.0,
                value: y.0,
            }),
        }
    }

    /// The unique preimage of `y` under an injective map.
    pub fn preimage_point(&self, y: PointId) -> Option<PointId> {
        match self.fibers[y.0].as_slice() {
            [x] => Some(*x),
            _ => None,
        }
    }

    /// `g o self`.
    pub fn then(&self, g: &PointMap) -> Result<PointMap> {
        if !self.codomain.same_as(&g.domain) {
            return Err(Error::Domain(format!(
                "cannot compose: codomain {} is not domain {}",
                self.codomain.label(),
                g.domain.label()
            )));
        }
        let values = self.values.iter().map(|&y| g.apply(y)).collect();
        PointMap::new(self.domain.clone(), g.codomain.clone(), values)
    }

    /// Same values, reinterpreted into another codomain with the same points.
    pub fn with_codomain(&self, codomain: Arc<FiniteSpace>) -> Result<PointMap> {
        PointMap::new(self.domain.clone(), codomain, self.values.clone())
    }

    /// Modulus of uniform continuity: `max { d(f x, f y) : d(x, y) <= t }`.
    pub fn modulus(&self, t: Dist) -> Dist {
        let n = self.domain.len();
        par::map_range(n, |x| {
            let px = PointId(x);
            (x..n)
                .map(PointId)
                .filter(|&y| self.domain.dist(px, y) <= t)
                .map(|y| self.codomain.dist(self.apply(px), self.apply(y)))
                .max()
                .unwrap_or(0)
        })
        .into_iter()
        .max()
        .unwrap_or(0)
    }

    /// `max_x d(f x, g x)`.
    pub fn closeness(&self, other: &PointMap) -> Result<Dist> {
        if !self.domain.same_as(&other.domain) || !self.codomain.same_as(&other.codomain) {
            return Err(Error::Domain(format!(
                "closeness needs equal spaces: {}->{} vs {}->{}",
                self.domain.label(),
                self.codomain.label(),
                other.domain.label(),
                other.codomain.label()
            )));
        }
        Ok(self
            .domain
            .points()
            .map(|x| self.codomain.dist(self.apply(x), other.apply(x)))
            .max()
            .unwrap_or(0))
    }
}

/// Free-function form of [`PointMap::modulus`].
pub fn modulus(f: &PointMap, t: Dist) -> Dist {
    f.modulus(t)
}

/// Free-function form of [`PointMap::closeness`].
pub fn closeness(f: &PointMap, g: &PointMap) -> Result<Dist> {
    f.closeness(g)
}
