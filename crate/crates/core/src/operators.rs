//! Band operators on finite windows.
//!
//! An operator `a` is stored by its entries `a[x, y] = <a δ_x, δ_y>`, so that
//! `a δ_x = Σ_y a[x, y] δ_y` and the matrix unit `e_xy` sends `δ_x` to `δ_y`.
//! The product `a · b` applies `b` first:
//!
//! ```text
//! (a · b)[x, w] = Σ_z b[x, z] a[z, w]
//! ```
//!
//! so `e_yz · e_xy = e_xz`. In the usual column convention the matrix of `a`
//! is the transpose of its entry table; [`BandOperator::to_dense`] returns
//! that column matrix, for which products are ordinary matrix products.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;
use crate::spaces::{Dist, FiniteSpace, PointId};

/// Exact complex rationals.
pub type ComplexQ = Complex<BigRational>;

/// Entry type of a [`BandOperator`].
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn conj(&self) -> Self;
    fn to_c64(&self) -> Complex64;
}

impl Scalar for Complex64 {
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

impl Scalar for ComplexQ {
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// `p / q` as an exact real scalar.
pub fn rational(p: i64, q: i64) -> ComplexQ {
    ComplexQ::new(
        BigRational::new(BigInt::from(p), BigInt::from(q)),
        BigRational::zero(),
    )
}

/// A sparse operator over a finite space with cached propagation.
#[derive(Clone, Debug)]
pub struct BandOperator<T: Scalar = Complex64> {
    space: Arc<FiniteSpace>,
    entries: BTreeMap<(PointId, PointId), T>,
    propagation: Dist,
}

impl<T: Scalar> PartialEq for BandOperator<T> {
    fn eq(&self, other: &Self) -> bool {
        self.space.same_as(&other.space) && self.entries == other.entries
    }
}

impl<T: Scalar> BandOperator<T> {
    pub fn zero(space: Arc<FiniteSpace>) -> Self {
        BandOperator {
            space,
            entries: BTreeMap::new(),
            propagation: 0,
        }
    }

    /// Builds an operator from `(x, y, value)` triplets; repeated keys add up
    /// and exact zeros are dropped.
    pub fn from_triplets(
        space: Arc<FiniteSpace>,
        triplets: impl IntoIterator<Item = (PointId, PointId, T)>,
    ) -> Result<Self> {
        let mut entries: BTreeMap<(PointId, PointId), T> = BTreeMap::new();
        for (x, y, v) in triplets {
            if !space.contains(x) || !space.contains(y) {
                return Err(Error::Domain(format!(
                    "entry ({x}, {y}) outside {} of {} points",
                    space.label(),
                    space.len()
                )));
            }
            let slot = entries.entry((x, y)).or_insert_with(T::zero);
            *slot = slot.clone() + v;
        }
        Ok(Self::from_map(space, entries))
    }

    fn from_map(space: Arc<FiniteSpace>, mut entries: BTreeMap<(PointId, PointId), T>) -> Self {
        entries.retain(|_, v| !v.is_zero());
        let propagation = entries
            .keys()
            .map(|&(x, y)| space.dist(x, y))
            .max()
            .unwrap_or(0);
        BandOperator {
            space,
            entries,
            propagation,
        }
    }

    /// `e_xy`, the unit with `e_xy δ_x = δ_y`.
    pub fn matrix_unit(space: Arc<FiniteSpace>, x: PointId, y: PointId) -> Result<Self> {
        Self::from_triplets(space, [(x, y, T::one())])
    }

    /// The diagonal projection `χ_A`.
    pub fn indicator(space: Arc<FiniteSpace>, set: &[PointId]) -> Result<Self> {
        Self::from_triplets(space, set.iter().map(|&x| (x, x, T::one())))
    }

    pub fn identity(space: Arc<FiniteSpace>) -> Self {
        let entries = space.points().map(|x| ((x, x), T::one())).collect();
        Self::from_map(space, entries)
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn get(&self, x: PointId, y: PointId) -> T {
        self.entries.get(&(x, y)).cloned().unwrap_or_else(T::zero)
    }

    /// Nonzero entries in `(x, y)` order.
    pub fn entries(&self) -> impl Iterator<Item = (PointId, PointId, &T)> {
        self.entries.iter().map(|(&(x, y), v)| (x, y, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// `max { d(x, y) : a[x, y] != 0 }`, 0 for the zero operator.
    pub fn propagation(&self) -> Dist {
        self.propagation
    }

    /// The nonzero coordinates, ascending.
    pub fn support(&self) -> Vec<(PointId, PointId)> {
        self.entries.keys().copied().collect()
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if self.space.same_as(&other.space) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "operators live on different spaces: {} vs {}",
                self.space.label(),
                other.space.label()
            )))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        let mut entries = self.entries.clone();
        for (k, v) in &other.entries {
            let slot = entries.entry(*k).or_insert_with(T::zero);
            *slot = slot.clone() + v.clone();
        }
        Ok(Self::from_map(self.space.clone(), entries))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-T::one()))
    }

    pub fn scale(&self, c: &T) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| (*k, c.clone() * v.clone()))
            .collect();
        Self::from_map(self.space.clone(), entries)
    }

    /// `a*`, with `a*[x, y] = conj(a[y, x])`.
    pub fn adjoint(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(&(x, y), v)| ((y, x), v.conj()))
            .collect();
        BandOperator {
            space: self.space.clone(),
            entries,
            propagation: self.propagation,
        }
    }

    /// The operator product `self · other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        let mut rows: BTreeMap<PointId, Vec<(PointId, &T)>> = BTreeMap::new();
        for (&(z, w), v) in &self.entries {
            rows.entry(z).or_default().push((w, v));
        }
        let mut by_x: Vec<(PointId, Vec<(PointId, &T)>)> = Vec::new();
        for (&(x, z), v) in &other.entries {
            match by_x.last_mut() {
                Some((last, list)) if *last == x => list.push((z, v)),
                _ => by_x.push((x, vec![(z, v)])),
            }
        }
        let partial = par::map_slice(&by_x, |(x, list)| {
            let mut acc: BTreeMap<PointId, T> = BTreeMap::new();
            for &(z, b) in list {
                for &(w, a) in rows.get(&z).map(Vec::as_slice).unwrap_or(&[]) {
                    let slot = acc.entry(w).or_insert_with(T::zero);
                    *slot = slot.clone() + b.clone() * a.clone();
                }
            }
            (*x, acc)
        });
        let entries = partial
            .into_iter()
            .flat_map(|(x, acc)| acc.into_iter().map(move |(w, v)| ((x, w), v)))
            .collect();
        Ok(Self::from_map(self.space.clone(), entries))
    }

    /// `χ_A · self · χ_B`: keeps entries with `x ∈ B` and `y ∈ A`.
    pub fn restrict(&self, rows_a: &[PointId], cols_b: &[PointId]) -> Self {
        let mut in_a = vec![false; self.space.len()];
        let mut in_b = vec![false; self.space.len()];
        rows_a.iter().for_each(|p| in_a[p.0] = true);
        cols_b.iter().for_each(|p| in_b[p.0] = true);
        let entries = self
            .entries
            .iter()
            .filter(|(&(x, y), _)| in_b[x.0] && in_a[y.0])
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        Self::from_map(self.space.clone(), entries)
    }

    /// Same entries over a space with the same points.
    pub fn with_space(&self, space: Arc<FiniteSpace>) -> Result<Self> {
        if space.len() != self.space.len() {
            return Err(Error::Domain(format!(
                "{} has {} points, operator needs {}",
                space.label(),
                space.len(),
                self.space.len()
            )));
        }
        Ok(Self::from_map(space, self.entries.clone()))
    }

    pub fn to_c64(&self) -> BandOperator<Complex64> {
        let entries = self.entries.iter().map(|(k, v)| (*k, v.to_c64())).collect();
        BandOperator::from_map(self.space.clone(), entries)
    }

    /// Column matrix `M` with `M[(y, x)] = a[x, y]`.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.space.len();
        let mut m = DMatrix::zeros(n, n);
        for (&(x, y), v) in &self.entries {
            m[(y.0, x.0)] = v.to_c64();
        }
        m
    }

    /// `max |a[x, y]|` over `x, y` outside `A`.
    pub fn ghost_tail(&self, set: &[PointId]) -> f64 {
        let mut inside = vec![false; self.space.len()];
        set.iter().for_each(|p| inside[p.0] = true);
        self.entries
            .iter()
            .filter(|(&(x, y), _)| !inside[x.0] && !inside[y.0])
            .map(|(_, v)| v.to_c64().norm())
            .fold(0.0, f64::max)
    }

    /// Entry-zeroing band truncation: keeps entries with `d(x, y) <= r`.
    pub fn band(&self, r: Dist) -> Self {
        let entries = self
            .entries
            .iter()
            .filter(|(&(x, y), _)| self.space.dist(x, y) <= r)
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        Self::from_map(self.space.clone(), entries)
    }

    /// Largest absolute row and column sums of the entry table.
    pub fn schur_bound(&self) -> f64 {
        let n = self.space.len();
        let (mut rows, mut cols) = (vec![0.0; n], vec![0.0; n]);
        for (&(x, y), v) in &self.entries {
            let a = v.to_c64().norm();
            rows[x.0] += a;
            cols[y.0] += a;
        }
        let r = rows.iter().copied().fold(0.0, f64::max);
        let c = cols.iter().copied().fold(0.0, f64::max);
        (r * c).sqrt()
    }
}

impl BandOperator<Complex64> {
    /// Column matrix to operator, dropping entries at or below `cutoff` in modulus.
    pub fn from_dense(
        space: Arc<FiniteSpace>,
        m: &DMatrix<Complex64>,
        cutoff: f64,
    ) -> Result<Self> {
        let n = space.len();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Domain(format!(
                "{}x{} matrix for a space of {n} points",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut entries = BTreeMap::new();
        for x in 0..n {
            for y in 0..n {
                let v = m[(y, x)];
                if v.norm() > cutoff {
                    entries.insert((PointId(x), PointId(y)), v);
                }
            }
        }
        Ok(Self::from_map(space, entries))
    }

    /// `a v` for a coordinate vector `v`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::zero(); v.len()];
        for (&(x, y), a) in &self.entries {
            out[y.0] += a * v[x.0];
        }
        out
    }

    /// `a* v`.
    pub fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::zero(); v.len()];
        for (&(x, y), a) in &self.entries {
            out[x.0] += a.conj() * v[y.0];
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Seed of the power-iteration start vector.
pub const NORM_SEED: u64 = 0x5eed_c0a5;
/// Largest space for which the default norm is a dense singular-value solve.
pub const DENSE_NORM_LIMIT: usize = 32;
const POWER_ITERATION_CAP: usize = 20_000;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMethod {
    Auto,
    Dense,
    Power,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: NormMethod,
    pub iterations: usize,
    pub seed: u64,
}

fn vnorm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm within multiplicative tolerance `tol`.
pub fn operator_norm<T: Scalar>(a: &BandOperator<T>, tol: f64) -> Result<f64> {
    operator_norm_with(a, tol, NormMethod::Auto).map(|r| r.value)
}

pub fn operator_norm_with<T: Scalar>(
    a: &BandOperator<T>,
    tol: f64,
    method: NormMethod,
) -> Result<NormReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Precondition(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let a = a.to_c64();
    let upper = a.schur_bound();
    let n = a.space().len();
    let method = match method {
        NormMethod::Auto if n <= DENSE_NORM_LIMIT => NormMethod::Dense,
        NormMethod::Auto => NormMethod::Power,
        m => m,
    };
    if a.is_zero() {
        return Ok(NormReport {
            value: 0.0,
            lower: 0.0,
            upper: 0.0,
            method,
            iterations: 0,
            seed: NORM_SEED,
        });
    }
    if method == NormMethod::Dense {
        let value = singular_values(&a.to_dense())
            .into_iter()
            .fold(0.0, f64::max);
        return Ok(NormReport {
            value,
            lower: value,
            upper: value,
            method,
            iterations: 0,
            seed: NORM_SEED,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(NORM_SEED);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let s = vnorm(&v);
    v.iter_mut().for_each(|z| *z /= s);
    let mut lower: f64 = 0.0;
    let mut previous = 0.0;
    for it in 1..=POWER_ITERATION_CAP {
        let av = a.apply(&v);
        let estimate = vnorm(&av);
        lower = lower.max(estimate);
        let mut w = a.apply_adjoint(&av);
        let wn = vnorm(&w);
        if wn == 0.0 {
            return Ok(NormReport {
                value: lower,
                lower,
                upper,
                method,
                iterations: it,
                seed: NORM_SEED,
            });
        }
        // ||a* a v|| / ||a v|| is also a lower bound for ||a||
        lower = lower.max(wn / estimate.max(f64::MIN_POSITIVE));
        w.iter_mut().for_each(|z| *z /= wn);
        v = w;
        if it > 2 && (lower - previous).abs() <= 1e-3 * tol * lower {
            return Ok(NormReport {
                value: lower,
                lower,
                upper,
                method,
                iterations: it,
                seed: NORM_SEED,
            });
        }
        previous = lower;
    }
    Err(Error::Numeric {
        message: format!("power iteration did not settle in {POWER_ITERATION_CAP} steps"),
        lower,
        upper,
    })
}

/// Singular values of a dense complex matrix.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

/// Numerical rank: singular values above `tol * max(1, largest)`.
pub fn rank<T: Scalar>(a: &BandOperator<T>, tol: f64) -> usize {
    let sv = singular_values(&a.to_dense());
    let top = sv.iter().copied().fold(1.0, f64::max);
    sv.iter().filter(|&&s| s > tol * top).count()
}

/// The truncation `b` of `a` to propagation `r` and `err = ||a - b||`.
pub fn truncate<T: Scalar>(
    a: &BandOperator<T>,
    r: Dist,
    tol: f64,
) -> Result<(BandOperator<T>, f64)> {
    let b = a.band(r);
    let err = operator_norm(&a.sub(&b)?, tol)?;
    Ok((b, err))
}

/// `max |a[x, y]|` over `x, y ∉ A`.
pub fn ghost_tail<T: Scalar>(a: &BandOperator<T>, set: &[PointId]) -> f64 {
    a.ghost_tail(set)
}

/// A random complex band operator of propagation at most `r`, each admissible entry present with probability `density`.
pub fn random_band<R: Rng>(
    space: Arc<FiniteSpace>,
    r: Dist,
    density: f64,
    rng: &mut R,
) -> BandOperator<Complex64> {
    let mut entries = BTreeMap::new();
    for x in space.points() {
        for y in space.points() {
            if space.dist(x, y) <= r && rng.random::<f64>() < density {
                let v = Complex64::new(
                    rng.random::<f64>() * 2.0 - 1.0,
                    rng.random::<f64>() * 2.0 - 1.0,
                );
                entries.insert((x, y), v);
            }
        }
    }
    BandOperator::from_map(space, entries)
}

/// A random band operator with small exact rational entries.
pub fn random_rational_band<R: Rng>(
    space: Arc<FiniteSpace>,
    r: Dist,
    density: f64,
    rng: &mut R,
) -> BandOperator<ComplexQ> {
    let mut entries = BTreeMap::new();
    for x in space.points() {
        for y in space.points() {
            if space.dist(x, y) <= r && rng.random::<f64>() < density {
                let q = |rng: &mut R| {
                    BigRational::new(
                        BigInt::from(rng.random_range(-9i64..=9)),
                        BigInt::from(rng.random_range(1i64..=7)),
                    )
                };
                let v = ComplexQ::new(q(rng), q(rng));
                entries.insert((x, y), v);
            }
        }
    }
    BandOperator::from_map(space, entries)
}
