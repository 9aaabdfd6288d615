//! Spatially implemented embeddings between window algebras.
//!
//! An isometry `u: ℓ2(X) ⊗ ℂ^n -> ℓ2(Y)` is stored by its columns
//! `u(δ_x ⊗ ξ_i)`, indexed `x * n + i`. For `n > 1` the source is metrized as
//! [`fiber_product`], where distinct copies of the same point sit at distance 1.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::PointMap;
use crate::operators::{BandOperator, Scalar};
use crate::par;
use crate::spaces::{fiber_product, FiniteSpace, PointId};

/// Default entrywise tolerance for table and spatial checks.
pub const EMBEDDING_TOL: f64 = 1e-12;

type Column = Vec<(PointId, Complex64)>;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IsometryKind {
    /// `u_f δ_x = δ_{f(x)}` for an injective point map.
    Plain,
    /// Columns are arbitrary orthonormal vectors.
    Amplified,
}

#[derive(Clone, Debug)]
pub struct IsometryMap {
    kind: IsometryKind,
    base: Arc<FiniteSpace>,
    fiber: usize,
    source: Arc<FiniteSpace>,
    codomain: Arc<FiniteSpace>,
    columns: Vec<Column>,
}

impl IsometryMap {
    /// Builds an isometry from its columns, checking orthonormality within `tol`.
    pub fn from_columns(
        base: Arc<FiniteSpace>,
        fiber: usize,
        codomain: Arc<FiniteSpace>,
        columns: Vec<Column>,
        tol: f64,
    ) -> Result<Self> {
        if fiber == 0 || columns.len() != base.len() * fiber {
            return Err(Error::Domain(format!(
                "{} columns for {} points with fiber {fiber}",
                columns.len(),
                base.len()
            )));
        }
        if let Some((p, _)) = columns
            .iter()
            .flatten()
            .enumerate()
            .find(|(_, (w, _))| !codomain.contains(*w))
        {
            return Err(Error::Domain(format!(
                "column entry {p} outside {}",
                codomain.label()
            )));
        }
        let source = if fiber == 1 {
            base.clone()
        } else {
            Arc::new(fiber_product(&base, fiber)?)
        };
        let u = IsometryMap {
            kind: IsometryKind::Amplified,
            base,
            fiber,
            source,
            codomain,
            columns,
        };
        let defect = u.orthonormality_defect();
        if defect > tol {
            return Err(Error::Invariant(format!(
                "columns are not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(u)
    }

    pub fn kind(&self) -> IsometryKind {
        self.kind
    }

    pub fn base(&self) -> &Arc<FiniteSpace> {
        &self.base
    }

    pub fn fiber(&self) -> usize {
        self.fiber
    }

    /// `X` for `n = 1`, otherwise `X x {1..n}`.
    pub fn source(&self) -> &Arc<FiniteSpace> {
        &self.source
    }

    pub fn codomain(&self) -> &Arc<FiniteSpace> {
        &self.codomain
    }

    /// `u(δ_x ⊗ ξ_i)`.
    pub fn column(&self, x: PointId, i: usize) -> &[(PointId, Complex64)] {
        &self.columns[x.0 * self.fiber + i]
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    /// `max |<u e_p, u e_q> - [p = q]|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let m = self.codomain.len();
        let dense: Vec<Vec<Complex64>> = par::map_slice(&self.columns, |c| {
            let mut v = vec![Complex64::zero(); m];
            for &(w, z) in c {
                v[w.0] += z;
            }
            v
        });
        par::map_range(dense.len(), |p| {
            (p..dense.len())
                .map(|q| {
                    let ip: Complex64 = self.columns[q]
                        .iter()
                        .map(|&(w, z)| dense[p][w.0].conj() * z)
                        .sum();
                    let target = if p == q { 1.0 } else { 0.0 };
                    (ip - target).norm()
                })
                .fold(0.0, f64::max)
        })
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// `u a u*` for `a` over [`source`](Self::source).
    pub fn conjugate(&self, a: &BandOperator) -> Result<BandOperator> {
        if !a.space().same_as(&self.source) {
            return Err(Error::Domain(format!(
                "operator over {} but the isometry starts at {}",
                a.space().label(),
                self.source.label()
            )));
        }
        let mut triplets = Vec::new();
        for (p, q, v) in a.entries() {
            for &(w, cw) in &self.columns[p.0] {
                for &(t, ct) in &self.columns[q.0] {
                    triplets.push((w, t, cw.conj() * v * ct));
                }
            }
        }
        BandOperator::from_triplets(self.codomain.clone(), triplets)
    }

    /// `u I_n(a) u*` for `a` over the base space.
    pub fn conjugate_amplified(&self, a: &BandOperator) -> Result<BandOperator> {
        if !a.space().same_as(&self.base) {
            return Err(Error::Domain(format!(
                "operator over {} but the isometry's base is {}",
                a.space().label(),
                self.base.label()
            )));
        }
        let mut triplets = Vec::new();
        for (x, y, v) in a.entries() {
            for i in 0..self.fiber {
                for &(w, cw) in self.column(x, i) {
                    for &(t, ct) in self.column(y, i) {
                        triplets.push((w, t, cw.conj() * v * ct));
                    }
                }
            }
        }
        BandOperator::from_triplets(self.codomain.clone(), triplets)
    }
}

/// `u_f` for an injective map `f`.
pub fn isometry_from_map(f: &PointMap) -> Result<IsometryMap> {
    f.require_injective()?;
    let columns = f
        .values()
        .iter()
        .map(|&y| vec![(y, Complex64::one())])
        .collect();
    Ok(IsometryMap {
        kind: IsometryKind::Plain,
        base: f.domain().clone(),
        fiber: 1,
        source: f.domain().clone(),
        codomain: f.codomain().clone(),
        columns,
    })
}

/// `Ad(u_f)(a)`, exact in any scalar type: `e_xy -> e_{f(x) f(y)}`.
pub fn ad_map<T: Scalar>(f: &PointMap, a: &BandOperator<T>) -> Result<BandOperator<T>> {
    f.require_injective()?;
    if !a.space().same_as(f.domain()) {
        return Err(Error::Domain(format!(
            "operator over {} but the map starts at {}",
            a.space().label(),
            f.domain().label()
        )));
    }
    BandOperator::from_triplets(
        f.codomain().clone(),
        a.entries()
            .map(|(x, y, v)| (f.apply(x), f.apply(y), v.clone())),
    )
}

/// Free-function form of [`IsometryMap::conjugate`].
pub fn conjugate(u: &IsometryMap, a: &BandOperator) -> Result<BandOperator> {
    u.conjugate(a)
}

/// `I_n(a)`, the blocks `a[x, y] Id_n`, over `X x {1..n}`.
pub fn amplify<T: Scalar>(a: &BandOperator<T>, n: usize) -> Result<BandOperator<T>> {
    let target = Arc::new(fiber_product(a.space(), n)?);
    amplify_over(a, n, &target)
}

/// [`amplify`] into an already built `X x {1..n}`.
pub fn amplify_over<T: Scalar>(
    a: &BandOperator<T>,
    n: usize,
    target: &Arc<FiniteSpace>,
) -> Result<BandOperator<T>> {
    if n == 0 || target.len() != a.space().len() * n {
        return Err(Error::Domain(format!(
            "cannot amplify {} points by {n} into {} points",
            a.space().len(),
            target.len()
        )));
    }
    BandOperator::from_triplets(
        target.clone(),
        a.entries().flat_map(|(x, y, v)| {
            (0..n).map(move |i| (PointId(x.0 * n + i), PointId(y.0 * n + i), v.clone()))
        }),
    )
}

/// A homomorphism presented by its values on matrix units.
#[derive(Clone, Debug)]
pub struct EmbeddingTable {
    domain: Arc<FiniteSpace>,
    codomain: Arc<FiniteSpace>,
    values: BTreeMap<(PointId, PointId), BandOperator>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum RankProfile {
    RankOnePreserving,
    OneToN { n: usize },
    Irregular { ranks: Vec<(PointId, usize)> },
}

impl RankProfile {
    pub fn fiber(&self) -> Option<usize> {
        match self {
            RankProfile::RankOnePreserving => Some(1),
            RankProfile::OneToN { n } => Some(*n),
            RankProfile::Irregular { .. } => None,
        }
    }
}

fn max_diff(a: &BandOperator, b: &BandOperator) -> f64 {
    a.sub(b).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
}

const TRIPLE_SAMPLE: usize = 4096;

impl EmbeddingTable {
    pub fn new(
        domain: Arc<FiniteSpace>,
        codomain: Arc<FiniteSpace>,
        values: BTreeMap<(PointId, PointId), BandOperator>,
    ) -> Result<Self> {
        for (&(x, y), op) in &values {
            if !domain.contains(x) || !domain.contains(y) {
                return Err(Error::MalformedEmbedding(format!(
                    "unit ({x}, {y}) outside {}",
                    domain.label()
                )));
            }
            if !op.space().same_as(&codomain) {
                return Err(Error::MalformedEmbedding(format!(
                    "value at ({x}, {y}) lives on {}, expected {}",
                    op.space().label(),
                    codomain.label()
                )));
            }
        }
        Ok(EmbeddingTable {
            domain,
            codomain,
            values,
        })
    }

    /// Tabulates `phi` on every matrix unit of the domain.
    pub fn tabulate(
        domain: Arc<FiniteSpace>,
        codomain: Arc<FiniteSpace>,
        phi: impl Fn(&BandOperator) -> Result<BandOperator> + Sync + Send,
    ) -> Result<Self> {
        let pairs: Vec<(PointId, PointId)> = domain
            .points()
            .flat_map(|x| domain.points().map(move |y| (x, y)))
            .collect();
        let ops = par::map_slice(&pairs, |&(x, y)| {
            phi(&BandOperator::matrix_unit(domain.clone(), x, y)?)
        });
        let mut values = BTreeMap::new();
        for (k, op) in pairs.into_iter().zip(ops) {
            values.insert(k, op?);
        }
        Self::new(domain, codomain, values)
    }

    /// The table of `Ad(u) ∘ I_n`.
    pub fn from_isometry(u: &IsometryMap) -> Result<Self> {
        Self::tabulate(u.base().clone(), u.codomain().clone(), |a| {
            u.conjugate_amplified(a)
        })
    }

    pub fn domain(&self) -> &Arc<FiniteSpace> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FiniteSpace> {
        &self.codomain
    }

    pub fn get(&self, x: PointId, y: PointId) -> Option<&BandOperator> {
        self.values.get(&(x, y))
    }

    pub fn pairs(&self) -> impl Iterator<Item = ((PointId, PointId), &BandOperator)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks adjoints, projections, orthogonality and multiplicativity
    /// `Φ(e_yz) Φ(e_xy) = Φ(e_xz)` on tabulated units, within `tol` entrywise.
    ///
    /// Triples are exhaustive up to 4096 and sampled deterministically above that.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let bad = |what: String| Err(Error::MalformedEmbedding(what));
        for (&(x, y), op) in &self.values {
            if let Some(other) = self.get(y, x) {
                let d = max_diff(&op.adjoint(), other);
                if d > tol {
                    return bad(format!("Φ(e_{x}{y})* differs from Φ(e_{y}{x}) by {d:.3e}"));
                }
            }
        }
        let diag: Vec<PointId> = self
            .domain
            .points()
            .filter(|&x| self.get(x, x).is_some())
            .collect();
        for &x in &diag {
            let p = &self.values[&(x, x)];
            let d = max_diff(&p.compose(p)?, p).max(max_diff(&p.adjoint(), p));
            if d > tol {
                return bad(format!(
                    "Φ(e_{x}{x}) is not an orthogonal projection ({d:.3e})"
                ));
            }
        }
        let cross = par::find_first(diag.len(), |i| {
            let p = &self.values[&(diag[i], diag[i])];
            diag[i + 1..].iter().find_map(|&y| {
                let q = &self.values[&(y, y)];
                let d = p.compose(q).map(|o| o.max_abs()).unwrap_or(f64::INFINITY);
                (d > tol).then(|| {
                    format!(
                        "Φ(e_{}{}) and Φ(e_{y}{y}) are not orthogonal ({d:.3e})",
                        diag[i], diag[i]
                    )
                })
            })
        });
        if let Some((_, msg)) = cross {
            return bad(msg);
        }
        let keys: Vec<(PointId, PointId)> = self.values.keys().copied().collect();
        let mut by_first: BTreeMap<PointId, Vec<PointId>> = BTreeMap::new();
        for &(x, y) in &keys {
            by_first.entry(x).or_default().push(y);
        }
        let mut triples: Vec<(PointId, PointId, PointId)> = Vec::new();
        for &(x, y) in &keys {
            for &z in by_first.get(&y).map(Vec::as_slice).unwrap_or(&[]) {
                if self.values.contains_key(&(x, z)) {
                    triples.push((x, y, z));
                }
            }
        }
        if triples.len() > TRIPLE_SAMPLE {
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0x7ab1e);
            let mut picks = sample(&mut rng, triples.len(), TRIPLE_SAMPLE).into_vec();
            picks.sort_unstable();
            triples = picks.into_iter().map(|i| triples[i]).collect();
        }
        let hit = par::find_first(triples.len(), |i| {
            let (x, y, z) = triples[i];
            let lhs = self.values[&(y, z)].compose(&self.values[&(x, y)]).ok()?;
            let d = max_diff(&lhs, &self.values[&(x, z)]);
            (d > tol)
                .then(|| format!("Φ(e_{y}{z}) Φ(e_{x}{y}) differs from Φ(e_{x}{z}) by {d:.3e}"))
        });
        match hit {
            Some((_, msg)) => bad(msg),
            None => Ok(()),
        }
    }

    /// Validates, then reads `rank Φ(e_xx)` off the trace of each projection.
    pub fn rank_profile(&self) -> Result<RankProfile> {
        self.validate(EMBEDDING_TOL.max(1e-10))?;
        let ranks: Vec<(PointId, usize)> = self
            .domain
            .points()
            .filter_map(|x| {
                let p = self.get(x, x)?;
                let trace: f64 = p
                    .entries()
                    .filter(|(a, b, _)| a == b)
                    .map(|(_, _, v)| v.re)
                    .sum();
                Some((x, trace.round().max(0.0) as usize))
            })
            .collect();
        let first = ranks.first().map(|r| r.1);
        if ranks.len() < self.domain.len()
            || first == Some(0)
            || ranks.iter().any(|r| Some(r.1) != first)
        {
            return Ok(RankProfile::Irregular { ranks });
        }
        Ok(match first {
            Some(1) => RankProfile::RankOnePreserving,
            Some(n) => RankProfile::OneToN { n },
            None => RankProfile::Irregular { ranks },
        })
    }
}

/// Free-function form of [`EmbeddingTable::rank_profile`].
pub fn rank_profile(phi: &EmbeddingTable) -> Result<RankProfile> {
    phi.rank_profile()
}

fn dense_vec(op_cols: &DMatrix<Complex64>, j: usize) -> Vec<Complex64> {
    op_cols.column(j).iter().copied().collect()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal basis of the range of `Φ(e_x0x0)`, by Gram-Schmidt on its columns in coordinate order.
pub fn default_frame(phi: &EmbeddingTable, x0: PointId) -> Result<Vec<Vec<Complex64>>> {
    let p = phi
        .get(x0, x0)
        .ok_or_else(|| Error::Frame(format!("Φ(e_{x0}{x0}) is not tabulated")))?
        .to_dense();
    let mut frame: Vec<Vec<Complex64>> = Vec::new();
    for j in 0..p.ncols() {
        let mut v = dense_vec(&p, j);
        for _ in 0..2 {
            for b in &frame {
                let c = inner(b, &v);
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
            }
        }
        let n = norm(&v);
        if n > 1e-8 {
            v.iter_mut().for_each(|z| *z /= n);
            frame.push(v);
        }
    }
    Ok(frame)
}

/// Rebuilds `u` with `u(δ_x ⊗ ξ_i) = Φ(e_{x0 x}) v_i`.
///
/// `frame` defaults to [`default_frame`]; it must be an orthonormal basis of
/// the range of `Φ(e_x0x0)`.
pub fn reconstruct_isometry(
    phi: &EmbeddingTable,
    x0: PointId,
    frame: Option<Vec<Vec<Complex64>>>,
) -> Result<IsometryMap> {
    let n = phi.rank_profile()?.fiber().ok_or_else(|| {
        Error::Precondition("rank profile is irregular; no 1-to-n reconstruction".into())
    })?;
    if !phi.domain().contains(x0) {
        return Err(Error::Frame(format!(
            "base point {x0} outside {}",
            phi.domain().label()
        )));
    }
    let frame = match frame {
        Some(f) => f,
        None => default_frame(phi, x0)?,
    };
    let m = phi.codomain().len();
    if frame.len() != n || frame.iter().any(|v| v.len() != m) {
        return Err(Error::Frame(format!(
            "frame has {} vectors, expected {n} vectors of length {m}",
            frame.len()
        )));
    }
    for (i, a) in frame.iter().enumerate() {
        for (j, b) in frame.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            if (inner(a, b) - target).norm() > 1e-9 {
                return Err(Error::Frame(format!(
                    "frame vectors {i} and {j} are not orthonormal"
                )));
            }
        }
    }
    let p0 = &phi.values[&(x0, x0)];
    for (i, v) in frame.iter().enumerate() {
        let pv = p0.apply(v);
        let off: f64 = norm(&pv.iter().zip(v).map(|(a, b)| a - b).collect::<Vec<_>>());
        if off > 1e-9 {
            return Err(Error::Frame(format!(
                "frame vector {i} is not in the range of Φ(e_{x0}{x0})"
            )));
        }
    }
    let mut columns = Vec::with_capacity(phi.domain().len() * n);
    for x in phi.domain().points() {
        let t = phi
            .get(x0, x)
            .ok_or_else(|| Error::Precondition(format!("Φ(e_{x0}{x}) is not tabulated")))?;
        for v in &frame {
            let col = t.apply(v);
            columns.push(
                col.into_iter()
                    .enumerate()
                    .filter(|(_, z)| *z != Complex64::zero())
                    .map(|(w, z)| (PointId(w), z))
                    .collect(),
            );
        }
    }
    IsometryMap::from_columns(
        phi.domain().clone(),
        n,
        phi.codomain().clone(),
        columns,
        1e-9,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpatialVerdict {
    pub passed: bool,
    /// Largest entrywise residual over all tabulated units.
    pub residual: f64,
    /// First unit, in `(x, y)` order, whose residual exceeds the tolerance.
    pub counterexample: Option<(PointId, PointId, f64)>,
}

/// Checks `Φ(e_xy) = u I_n(e_xy) u*` on every tabulated unit.
pub fn verify_spatial(phi: &EmbeddingTable, u: &IsometryMap, tol: f64) -> Result<SpatialVerdict> {
    if !u.base().same_as(phi.domain()) || !u.codomain().same_as(phi.codomain()) {
        return Err(Error::Domain(format!(
            "isometry {} -> {} does not match table {} -> {}",
            u.base().label(),
            u.codomain().label(),
            phi.domain().label(),
            phi.codomain().label()
        )));
    }
    let pairs: Vec<(&(PointId, PointId), &BandOperator)> = phi.values.iter().collect();
    let residuals = par::map_slice(&pairs, |(&(x, y), op)| -> Result<f64> {
        let unit = BandOperator::matrix_unit(phi.domain().clone(), x, y)?;
        Ok(max_diff(&u.conjugate_amplified(&unit)?, op))
    });
    let mut residual: f64 = 0.0;
    let mut counterexample = None;
    for ((&(x, y), _), r) in pairs.iter().zip(residuals) {
        let r = r?;
        residual = residual.max(r);
        if r > tol && counterexample.is_none() {
            counterexample = Some((x, y, r));
        }
    }
    Ok(SpatialVerdict {
        passed: counterexample.is_none(),
        residual,
        counterexample,
    })
}

/// A random `n x n` unitary from the QR factorization of a complex Gaussian-ish matrix.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
        )
    });
    m.qr().q()
}

/// A random isometry `ℓ2(X) ⊗ ℂ^n -> ℓ2(Y)`: a random injection `X x {1..n} -> Y`
/// whose fibers are mixed by independent random unitaries.
pub fn random_isometry<R: Rng>(
    base: Arc<FiniteSpace>,
    n: usize,
    codomain: Arc<FiniteSpace>,
    rng: &mut R,
) -> Result<IsometryMap> {
    let need = base.len() * n;
    if n == 0 || need > codomain.len() {
        return Err(Error::Domain(format!(
            "no injection of {need} coordinates into {} points",
            codomain.len()
        )));
    }
    let targets = sample(rng, codomain.len(), need).into_vec();
    let mut columns = Vec::with_capacity(need);
    for x in 0..base.len() {
        let u = random_unitary(n, rng);
        for i in 0..n {
            columns.push(
                (0..n)
                    .map(|j| (PointId(targets[x * n + j]), u[(j, i)]))
                    .collect(),
            );
        }
    }
    IsometryMap::from_columns(base, n, codomain, columns, 1e-10)
}
