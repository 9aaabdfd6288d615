//! Co-coarseness witnesses and coarse-quotient certificates.
//!
//! For a map `f: X -> Y` and constants `K`, `eps`, the witness is the least
//! `delta` with `B(f(x), eps) ⊆ f(B(x, delta))^K` for every checked `x`.
//! Per point this is
//!
//! ```text
//! delta_x = max_{y in B(f(x), eps)} min { d(x, z) : d(f(z), y) <= K }
//! ```
//!
//! which is always a realized distance, so it coincides with the least value
//! found by sweeping realized distances in ascending order.

use serde::Serialize;

use super::PointMap;
use crate::error::{Error, Result};
use crate::par;
use crate::spaces::{Dist, PointId};

/// Which domain points a certificate quantifies over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Interior {
    /// Points whose image sees no codomain boundary within `max eps + K`.
    Auto,
    /// Every domain point.
    All,
    Explicit(Vec<PointId>),
}

impl Interior {
    /// Resolves to an ascending point list for `f` at constant `k` and largest scale `max_eps`.
    pub fn resolve(&self, f: &PointMap, k: Dist, max_eps: Dist) -> Vec<PointId> {
        match self {
            Interior::All => f.domain().points().collect(),
            Interior::Explicit(pts) => {
                let mut pts = pts.clone();
                pts.sort_unstable();
                pts.dedup();
                pts
            }
            Interior::Auto => auto_interior(f, max_eps.saturating_add(k)),
        }
    }
}

/// Domain points `x` with `B(f(x), rho)` clear of the codomain boundary.
pub(crate) fn auto_interior(f: &PointMap, rho: Dist) -> Vec<PointId> {
    f.domain()
        .points()
        .filter(|&x| f.codomain().is_interior(f.apply(x), rho))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    /// `uncovered` lies in `B(f(point), eps)` but is more than `K` from all of `f(X)`.
    Fail {
        point: PointId,
        uncovered: PointId,
    },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScaleVerdict {
    pub eps: Dist,
    pub delta: Option<Dist>,
    /// `omega_f(eps)`, finite on every window.
    pub modulus: Dist,
    pub verdict: Verdict,
}

/// Per-scale evidence that `f` is a `K`-co-coarse coarse map on an interior.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientCertificate {
    pub domain: String,
    pub codomain: String,
    #[serde(rename = "K")]
    pub k: Dist,
    pub interior: Vec<PointId>,
    pub scales: Vec<ScaleVerdict>,
}

impl QuotientCertificate {
    pub fn passed(&self) -> bool {
        self.scales.iter().all(|s| s.verdict.passed())
    }

    pub fn delta(&self, eps: Dist) -> Option<Dist> {
        self.scales
            .iter()
            .find(|s| s.eps == eps)
            .and_then(|s| s.delta)
    }

    pub fn first_failure(&self) -> Option<&ScaleVerdict> {
        self.scales.iter().find(|s| !s.verdict.passed())
    }
}

/// For each codomain point `y`, the domain points `z` with `d(f(z), y) <= k`, ascending.
pub(crate) fn near_lists(f: &PointMap, k: Dist) -> Vec<Vec<PointId>> {
    let cod = f.codomain();
    let image = f.image();
    par::map_range(cod.len(), |y| {
        let y = PointId(y);
        let close: Vec<PointId> = image
            .iter()
            .copied()
            .filter(|&w| cod.dist(w, y) <= k)
            .collect();
        f.preimage(&close)
    })
}

/// `Ok(delta_x)` or `Err(y)` for the first uncovered `y` in `B(f(x), eps)`.
fn point_delta(
    f: &PointMap,
    near: &[Vec<PointId>],
    x: PointId,
    eps: Dist,
) -> std::result::Result<Dist, PointId> {
    let dom = f.domain();
    let mut worst = 0;
    for y in f.codomain().ball(f.apply(x), eps) {
        let best = near[y.0].iter().map(|&z| dom.dist(x, z)).min().ok_or(y)?;
        worst = worst.max(best);
    }
    Ok(worst)
}

fn scale_delta(
    f: &PointMap,
    near: &[Vec<PointId>],
    interior: &[PointId],
    eps: Dist,
) -> std::result::Result<Dist, (PointId, PointId)> {
    let per_point = par::map_slice(interior, |&x| point_delta(f, near, x, eps));
    let mut delta = 0;
    for (&x, r) in interior.iter().zip(per_point) {
        delta = delta.max(r.map_err(|y| (x, y))?);
    }
    Ok(delta)
}

/// The least `delta` with `B(f(x), eps) ⊆ f(B(x, delta))^K` on the automatic interior.
pub fn cococoarse_witness(f: &PointMap, k: Dist, eps: Dist) -> Option<Dist> {
    cococoarse_witness_with(f, k, eps, &Interior::Auto)
}

pub fn cococoarse_witness_with(
    f: &PointMap,
    k: Dist,
    eps: Dist,
    interior: &Interior,
) -> Option<Dist> {
    let pts = interior.resolve(f, k, eps);
    scale_delta(f, &near_lists(f, k), &pts, eps).ok()
}

/// Checks `f` at constant `K` on each scale; one interior is shared by all scales.
pub fn quotient_certificate(f: &PointMap, k: Dist, scales: &[Dist]) -> Result<QuotientCertificate> {
    quotient_certificate_with(f, k, scales, &Interior::Auto)
}

pub fn quotient_certificate_with(
    f: &PointMap,
    k: Dist,
    scales: &[Dist],
    interior: &Interior,
) -> Result<QuotientCertificate> {
    let max_eps = *scales
        .iter()
        .max()
        .ok_or_else(|| Error::Precondition("certificate needs at least one scale".into()))?;
    let pts = interior.resolve(f, k, max_eps);
    if pts.is_empty() && !f.domain().is_empty() {
        return Err(Error::Precondition(format!(
            "no interior points at radius {} in {}; the window is too small for these scales",
            max_eps + k,
            f.codomain().label()
        )));
    }
    let near = near_lists(f, k);
    let scales = scales
        .iter()
        .map(|&eps| {
            let (delta, verdict) = match scale_delta(f, &near, &pts, eps) {
                Ok(d) => (Some(d), Verdict::Pass),
                Err((point, uncovered)) => (None, Verdict::Fail { point, uncovered }),
            };
            ScaleVerdict {
                eps,
                delta,
                modulus: f.modulus(eps),
                verdict,
            }
        })
        .collect();
    Ok(QuotientCertificate {
        domain: f.domain().label().to_string(),
        codomain: f.codomain().label().to_string(),
        k,
        interior: pts,
        scales,
    })
}

/// The chain of witnesses behind the composition bound at one scale.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompositionStep {
    pub eps: Dist,
    /// Witness for `g` at `eps` over `f(interior)`.
    pub delta_g: Option<Dist>,
    /// Witness for `f` at `delta_g` over the interior.
    pub delta_f: Option<Dist>,
    /// Witness for `g o f` at `L`.
    pub delta_gf: Option<Dist>,
    /// `delta_gf <= delta_f` whenever both exist.
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompositionReport {
    pub k_f: Dist,
    pub k_g: Dist,
    pub modulus_g: Dist,
    #[serde(rename = "L")]
    pub l: Dist,
    pub certificate: QuotientCertificate,
    pub steps: Vec<CompositionStep>,
}

impl CompositionReport {
    pub fn passed(&self) -> bool {
        self.certificate.passed() && self.steps.iter().all(|s| s.consistent)
    }
}

/// `L = K_g + omega_g(K_f)` together with a certificate for `g o f` at `L`.
pub fn composition_constant(
    k_f: Dist,
    k_g: Dist,
    f: &PointMap,
    g: &PointMap,
    scales: &[Dist],
) -> Result<CompositionReport> {
    let gf = f.then(g)?;
    let modulus_g = g.modulus(k_f);
    let l = k_g + modulus_g;
    let certificate = quotient_certificate(&gf, l, scales)?;
    let pts = &certificate.interior;
    let g_pts = f.image_of(pts);
    let (near_f, near_g) = (near_lists(f, k_f), near_lists(g, k_g));
    let steps = certificate
        .scales
        .iter()
        .map(|s| {
            let delta_g = scale_delta(g, &near_g, &g_pts, s.eps).ok();
            let delta_f = delta_g.and_then(|d| scale_delta(f, &near_f, pts, d).ok());
            let consistent = match (s.delta, delta_f) {
                (Some(a), Some(b)) => a <= b,
                _ => true,
            };
            CompositionStep {
                eps: s.eps,
                delta_g,
                delta_f,
                delta_gf: s.delta,
                consistent,
            }
        })
        .collect();
    Ok(CompositionReport {
        k_f,
        k_g,
        modulus_g,
        l,
        certificate,
        steps,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScaleTransfer {
    pub eps: Dist,
    /// Witness for `f` at `eps + m`.
    pub delta_f: Option<Dist>,
    /// Witness for `g` at `eps`, constant `K + m`.
    pub delta_g: Option<Dist>,
    pub holds: bool,
}

/// Transfer of a certificate from `f` at `K` to a map `g` at distance `m` from it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransferReport {
    pub m: Dist,
    #[serde(rename = "K")]
    pub k: Dist,
    pub interior: Vec<PointId>,
    pub scales: Vec<ScaleTransfer>,
}

impl TransferReport {
    pub fn holds(&self) -> bool {
        self.scales.iter().all(|s| s.holds)
    }
}

/// Checks that wherever `f` passes at `K` on scale `eps + m`, `g` passes at
/// `K + m` on scale `eps` with `delta_g(eps) <= delta_f(eps + m)`.
///
/// Both maps are quantified over the points that are automatic-interior for each.
pub fn closeness_transfer(
    f: &PointMap,
    g: &PointMap,
    k: Dist,
    scales: &[Dist],
) -> Result<TransferReport> {
    let m = f.closeness(g)?;
    let max_eps = *scales
        .iter()
        .max()
        .ok_or_else(|| Error::Precondition("transfer needs at least one scale".into()))?;
    let rho = max_eps + m + k;
    let interior: Vec<PointId> = f
        .domain()
        .points()
        .filter(|&x| {
            f.codomain().is_interior(f.apply(x), rho) && g.codomain().is_interior(g.apply(x), rho)
        })
        .collect();
    let (near_f, near_g) = (near_lists(f, k), near_lists(g, k + m));
    let scales = scales
        .iter()
        .map(|&eps| {
            let delta_f = scale_delta(f, &near_f, &interior, eps + m).ok();
            let delta_g = scale_delta(g, &near_g, &interior, eps).ok();
            let holds = match (delta_f, delta_g) {
                (None, _) => true,
                (Some(df), Some(dg)) => dg <= df,
                (Some(_), None) => false,
            };
            ScaleTransfer {
                eps,
                delta_f,
                delta_g,
                holds,
            }
        })
        .collect();
    Ok(TransferReport {
        m,
        k,
        interior,
        scales,
    })
}
