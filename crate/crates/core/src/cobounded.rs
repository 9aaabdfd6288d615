//! Cobounded witnesses and the constructive decompositions behind them.
//!
//! Embeddings here are `Φ = Ad(u_f)` for an injective point map `f`, which
//! lets every identity be checked in exact arithmetic when the entries are
//! rational.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::embeddings::ad_map;
use crate::error::{Error, Result};
use crate::maps::{cococoarse_witness_with, Interior, PointMap};
use crate::operators::{operator_norm, BandOperator, Scalar};
use crate::par;
use crate::spaces::{Dist, FiniteSpace, Partition, PointId};

/// Candidate witness that `b` is approximated by `Σ c_i Φ(a_i)`.
#[derive(Clone, Debug)]
pub struct CoboundedWitness<T: Scalar> {
    pub target: BandOperator<T>,
    /// Injective map with `Φ = Ad(u_f)`.
    pub map: PointMap,
    /// Pairs `(c_i, a_i)` with `c_i` over the codomain and `a_i` over the domain.
    pub terms: Vec<(BandOperator<T>, BandOperator<T>)>,
    pub eps: f64,
    pub k: Dist,
    /// Claimed bound on the number of terms and on every factor norm.
    pub ell: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessCheck {
    pub passed: bool,
    pub residual: f64,
    /// Residual is exactly zero in the witness's own arithmetic.
    pub exact: bool,
    pub max_propagation: Dist,
    pub max_norm: f64,
    pub violations: Vec<String>,
}

/// `Σ c_i Φ(a_i)`.
pub fn witness_sum<T: Scalar>(w: &CoboundedWitness<T>) -> Result<BandOperator<T>> {
    let mut sum = BandOperator::zero(w.target.space().clone());
    for (c, a) in &w.terms {
        sum = sum.add(&c.compose(&ad_map(&w.map, a)?)?)?;
    }
    Ok(sum)
}

/// Recomputes `||b - Σ c_i Φ(a_i)||` and the side conditions.
///
/// The residual passes when it is at most `eps (1 + tol) + 1e-12`.
pub fn check_witness<T: Scalar>(w: &CoboundedWitness<T>, tol: f64) -> Result<WitnessCheck> {
    if !w.target.space().same_as(w.map.codomain()) {
        return Err(Error::Domain(format!(
            "target over {} but Φ lands in {}",
            w.target.space().label(),
            w.map.codomain().label()
        )));
    }
    let diff = w.target.sub(&witness_sum(w)?)?;
    let exact = diff.is_zero();
    let residual = operator_norm(&diff, tol)?;
    let mut violations = Vec::new();
    if residual > w.eps * (1.0 + tol) + 1e-12 {
        violations.push(format!("residual {residual:.6e} exceeds eps {}", w.eps));
    }
    let max_propagation = w
        .terms
        .iter()
        .map(|(c, _)| c.propagation())
        .max()
        .unwrap_or(0);
    for (i, (c, _)) in w.terms.iter().enumerate() {
        if c.propagation() > w.k {
            violations.push(format!(
                "term {i}: propagation {} exceeds k={}",
                c.propagation(),
                w.k
            ));
        }
    }
    let norms: Vec<Result<f64>> = par::map_slice(&w.terms, |(c, a)| {
        Ok(operator_norm(c, tol)?.max(operator_norm(a, tol)?))
    });
    let mut max_norm: f64 = 0.0;
    for n in norms {
        max_norm = max_norm.max(n?);
    }
    if let Some(ell) = w.ell {
        if w.terms.len() as f64 > ell {
            violations.push(format!("{} terms exceed ell={ell}", w.terms.len()));
        }
        if max_norm > ell * (1.0 + tol) {
            violations.push(format!("factor norm {max_norm:.6e} exceeds ell={ell}"));
        }
    }
    Ok(WitnessCheck {
        passed: violations.is_empty(),
        residual,
        exact,
        max_propagation,
        max_norm,
        violations,
    })
}

/// One matched entry of a block: `b_n e_{y y'}` with `f(x) = y`, `d(x, z) <= δ`
/// and `d(f(z), y') <= K`.
type Entries<T> = Vec<(PointId, PointId, T)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchedPair {
    pub y: PointId,
    pub y_prime: PointId,
    pub x: PointId,
    pub z: PointId,
}

#[derive(Clone, Debug)]
pub struct DecompositionBlock<T: Scalar> {
    /// `block = χ_{Z_i} a χ_{Z_j}`.
    pub i: usize,
    pub j: usize,
    pub block: BandOperator<T>,
    pub pairs: Vec<MatchedPair>,
    /// `c = Σ b_n e_{x_n z_n}` over the domain.
    pub c: BandOperator<T>,
    /// `d = Σ e_{f(z_n) y'_n}` over the codomain.
    pub d: BandOperator<T>,
}

#[derive(Clone, Debug)]
pub struct QuotientDecomposition<T: Scalar> {
    pub k: Dist,
    pub delta: Dist,
    pub eps_requested: Dist,
    /// Scale actually used; at least `K + 1` so that companions stay distinct.
    pub eps: Dist,
    pub note: Option<String>,
    pub partition: Partition,
    pub blocks: Vec<DecompositionBlock<T>>,
}

impl<T: Scalar> QuotientDecomposition<T> {
    pub fn max_c_propagation(&self) -> Dist {
        self.blocks
            .iter()
            .map(|b| b.c.propagation())
            .max()
            .unwrap_or(0)
    }

    pub fn max_d_propagation(&self) -> Dist {
        self.blocks
            .iter()
            .map(|b| b.d.propagation())
            .max()
            .unwrap_or(0)
    }

    /// `Σ d Φ(c)` over all blocks.
    pub fn reassemble(&self, f: &PointMap) -> Result<BandOperator<T>> {
        let mut sum = BandOperator::zero(f.codomain().clone());
        for b in &self.blocks {
            sum = sum.add(&b.d.compose(&ad_map(f, &b.c)?)?)?;
        }
        Ok(sum)
    }

    /// The decomposition as a witness with terms `(d, c)`, exact at `eps = 0`.
    pub fn witness(&self, f: &PointMap, target: &BandOperator<T>) -> CoboundedWitness<T> {
        CoboundedWitness {
            target: target.clone(),
            map: f.clone(),
            terms: self
                .blocks
                .iter()
                .map(|b| (b.d.clone(), b.c.clone()))
                .collect(),
            eps: 0.0,
            k: self.k,
            ell: None,
        }
    }
}

/// Writes `a` over the codomain as `Σ_blocks d Φ(c)` for an injective co-coarse `f`.
///
/// The image is split into classes that are `3 eps`-separated; each block
/// `χ_{Z_i} a χ_{Z_j}` is matched entry by entry with companions `z` chosen as
/// the first point of `B(x, δ)` in index order with `d(f(z), y') <= K`.
pub fn quotient_decomposition<T: Scalar>(
    f: &PointMap,
    k: Dist,
    delta: Dist,
    a: &BandOperator<T>,
    eps: Dist,
) -> Result<QuotientDecomposition<T>> {
    f.require_injective()?;
    let cod = f.codomain();
    if !a.space().same_as(cod) {
        return Err(Error::Domain(format!(
            "operator over {} but the map lands in {}",
            a.space().label(),
            cod.label()
        )));
    }
    if a.propagation() > eps {
        return Err(Error::Precondition(format!(
            "propagation {} exceeds eps={eps}",
            a.propagation()
        )));
    }
    if let Some((y, y2, _)) = a
        .entries()
        .find(|(y, y2, _)| f.preimage_point(*y).is_none() || f.preimage_point(*y2).is_none())
    {
        return Err(Error::Domain(format!(
            "entry ({y}, {y2}) is not supported on the image of the map"
        )));
    }
    let floor = k + cod.min_positive_distance().unwrap_or(1);
    let (used, note) = if eps < floor {
        (
            floor,
            Some(format!("eps raised from {eps} to {floor} so that eps > K")),
        )
    } else {
        (eps, None)
    };
    let full = cod.separated_partition(3 * used);
    let image: Vec<bool> = cod
        .points()
        .map(|y| f.preimage_point(y).is_some())
        .collect();
    let partition = Partition {
        classes: full
            .classes
            .iter()
            .map(|c| c.iter().copied().filter(|y| image[y.0]).collect::<Vec<_>>())
            .filter(|c| !c.is_empty())
            .collect(),
        separation: full.separation,
    };
    let class_of = partition.class_index(cod.len());
    let mut grouped: BTreeMap<(usize, usize), Entries<T>> = BTreeMap::new();
    for (y, y2, v) in a.entries() {
        let (i, j) = (
            class_of[y2.0].expect("image point"),
            class_of[y.0].expect("image point"),
        );
        grouped.entry((i, j)).or_default().push((y, y2, v.clone()));
    }
    let grouped: Vec<((usize, usize), Entries<T>)> = grouped.into_iter().collect();
    let blocks = par::map_slice(&grouped, |((i, j), entries)| {
        build_block(f, k, delta, *i, *j, entries)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let out = QuotientDecomposition {
        k,
        delta,
        eps_requested: eps,
        eps: used,
        note,
        partition,
        blocks,
    };
    if out.reassemble(f)? != *a {
        return Err(Error::Invariant(
            "blocks do not reassemble the operator".into(),
        ));
    }
    Ok(out)
}

fn build_block<T: Scalar>(
    f: &PointMap,
    k: Dist,
    delta: Dist,
    i: usize,
    j: usize,
    entries: &[(PointId, PointId, T)],
) -> Result<DecompositionBlock<T>> {
    let (dom, cod) = (f.domain(), f.codomain());
    let mut pairs = Vec::with_capacity(entries.len());
    let mut c = Vec::with_capacity(entries.len());
    let mut d = Vec::with_capacity(entries.len());
    for (y, y2, v) in entries {
        let x = f.preimage_point(*y).expect("checked image support");
        let z = dom
            .ball(x, delta)
            .into_iter()
            .find(|&z| cod.dist(f.apply(z), *y2) <= k)
            .ok_or(Error::Decomposition {
                x: x.0,
                y_prime: y2.0,
                delta,
                k,
            })?;
        pairs.push(MatchedPair {
            y: *y,
            y_prime: *y2,
            x,
            z,
        });
        c.push((x, z, v.clone()));
        d.push((f.apply(z), *y2, T::one()));
    }
    let block = BandOperator::from_triplets(cod.clone(), entries.iter().cloned())?;
    let c = BandOperator::from_triplets(dom.clone(), c)?;
    let d = BandOperator::from_triplets(cod.clone(), d)?;
    if d.compose(&ad_map(f, &c)?)? != block {
        return Err(Error::Invariant(format!("block ({i}, {j}) is not d Φ(c)")));
    }
    Ok(DecompositionBlock {
        i,
        j,
        block,
        pairs,
        c,
        d,
    })
}

/// `Φ^{-1}(b)` for `b` supported on the image of an injective `f`.
pub fn pullback<T: Scalar>(f: &PointMap, b: &BandOperator<T>) -> Result<BandOperator<T>> {
    let mut triplets = Vec::with_capacity(b.nnz());
    for (y, y2, v) in b.entries() {
        match (f.preimage_point(y), f.preimage_point(y2)) {
            (Some(x), Some(x2)) => triplets.push((x, x2, v.clone())),
            _ => {
                return Err(Error::Domain(format!(
                    "entry ({y}, {y2}) is outside the image"
                )))
            }
        }
    }
    BandOperator::from_triplets(f.domain().clone(), triplets)
}

/// The four-block parity witness on an even naturals window `{1..N}` through the folding map.
///
/// With `I` odd, `P` even and the shift `c = Σ_{n ∈ P} e_{n, n-1}`:
///
/// ```text
/// a = χ_I a χ_I + χ_P a χ_P + c* (c χ_P a χ_I) + c (c* χ_I a χ_P)
/// ```
///
/// and every bracket is supported on `I x I` or `P x P`, hence lies in the range of `Φ`.
pub fn parity_decomposition<T: Scalar>(
    a: &BandOperator<T>,
    tol: f64,
) -> Result<CoboundedWitness<T>> {
    let space = a.space();
    let n = space.len();
    if !n.is_multiple_of(2) || space.label() != format!("N[1..={n}]") {
        return Err(Error::Precondition(format!(
            "parity decomposition needs an even naturals window, got {}",
            space.label()
        )));
    }
    let f = crate::maps::folding(n)?.with_codomain(space.clone())?;
    let odd: Vec<PointId> = space.points().filter(|p| p.0 % 2 == 0).collect();
    let even: Vec<PointId> = space.points().filter(|p| p.0 % 2 == 1).collect();
    let chi_i = BandOperator::<T>::indicator(space.clone(), &odd)?;
    let chi_p = BandOperator::<T>::indicator(space.clone(), &even)?;
    let shift = BandOperator::<T>::from_triplets(
        space.clone(),
        even.iter().map(|&p| (p, PointId(p.0 - 1), T::one())),
    )?;
    let shift_star = shift.adjoint();
    let identity = BandOperator::<T>::identity(space.clone());
    let sandwich = |l: &BandOperator<T>, r: &BandOperator<T>| l.compose(a)?.compose(r);
    let pieces = [
        (identity.clone(), sandwich(&chi_i, &chi_i)?),
        (identity, sandwich(&chi_p, &chi_p)?),
        (
            shift_star.clone(),
            shift.compose(&sandwich(&chi_p, &chi_i)?)?,
        ),
        (shift, shift_star.compose(&sandwich(&chi_i, &chi_p)?)?),
    ];
    let mut terms = Vec::new();
    for (c, image) in pieces {
        if !image.is_zero() {
            terms.push((c, pullback(&f, &image)?));
        }
    }
    let ell = (terms.len() as f64).max(operator_norm(a, tol)?).max(1.0);
    Ok(CoboundedWitness {
        target: a.clone(),
        map: f,
        terms,
        eps: 0.0,
        k: 1,
        ell: Some(ell),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeReport {
    pub index: usize,
    /// Lower bound on the domain propagation any witness at `(eps, k)` needs; `None` is unbounded.
    pub required_propagation: Option<Dist>,
    /// The entry attaining the bound.
    pub worst_entry: Option<(PointId, PointId)>,
    pub decomposes: bool,
    pub error: Option<String>,
    pub flagged: bool,
}

/// For each probe `b` over the codomain: the obstruction bound and the decomposition attempt.
///
/// If `|b[p, q]| > eps` then `e_qq (Σ c_i Φ(a_i)) e_pp != 0` for any witness
/// within `eps`, which forces some `a_i[f^{-1}(p), z] != 0` with
/// `d(f(z), q) <= k`. The bound is the largest such `min d(f^{-1}(p), z)`;
/// it is unbounded when `p` is off the image or no `z` exists.
pub fn almost_cobounded_diagnostic<T: Scalar>(
    f: &PointMap,
    k: Dist,
    eps: f64,
    probes: &[BandOperator<T>],
) -> Result<Vec<ProbeReport>> {
    f.require_injective()?;
    let (dom, cod) = (f.domain(), f.codomain());
    let reports = par::map_slice(probes, |b| -> Result<ProbeReport> {
        if !b.space().same_as(cod) {
            return Err(Error::Domain(format!(
                "probe over {} but the map lands in {}",
                b.space().label(),
                cod.label()
            )));
        }
        let mut required: Option<Dist> = Some(0);
        let mut worst = None;
        for (p, q, v) in b.entries() {
            if v.to_c64().norm() <= eps {
                continue;
            }
            let r = f.preimage_point(p).and_then(|x| {
                dom.points()
                    .filter(|&z| cod.dist(f.apply(z), q) <= k)
                    .map(|z| dom.dist(x, z))
                    .min()
            });
            let Some(cur) = required else { break };
            match r {
                None => {
                    required = None;
                    worst = Some((p, q));
                }
                Some(r) if worst.is_none() || r > cur => {
                    required = Some(r);
                    worst = Some((p, q));
                }
                Some(_) => {}
            }
        }
        let eps_prop = b.propagation().max(1);
        let attempt = cococoarse_witness_with(f, k, eps_prop, &Interior::All)
            .ok_or_else(|| {
                Error::Precondition(format!("map is not {k}-co-coarse at scale {eps_prop}"))
            })
            .and_then(|delta| quotient_decomposition(f, k, delta, b, eps_prop));
        let (decomposes, error) = match attempt {
            Ok(_) => (true, None),
            Err(e) => (false, Some(e.to_string())),
        };
        Ok(ProbeReport {
            index: 0,
            required_propagation: required,
            worst_entry: worst,
            decomposes,
            error,
            flagged: required.is_none() || !decomposes,
        })
    });
    reports
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map(|r| ProbeReport { index: i, ..r }))
        .collect()
}

/// Convenience: the naturals window the parity witness expects.
pub fn parity_space(n: usize) -> Result<Arc<FiniteSpace>> {
    Ok(Arc::new(crate::spaces::naturals_window(n)?))
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::maps::{cococoarse_witness, double_spacing, folding};
    use crate::operators::{random_band, random_rational_band, rational, ComplexQ};

    fn at(space: &FiniteSpace, v: i64) -> PointId {
        space.point_at(&[v]).unwrap()
    }

    #[test]
    fn single_unit_example() {
        let f = folding(40).unwrap();
        let (x_space, n) = (f.domain().clone(), f.codomain().clone());
        let a = BandOperator::<ComplexQ>::matrix_unit(n.clone(), at(&n, 2), at(&n, 1)).unwrap();
        let dec = quotient_decomposition(&f, 1, 2, &a, 1).unwrap();
        assert_eq!(dec.eps, 2);
        assert!(dec.note.is_some());
        assert_eq!(dec.blocks.len(), 1);
        let b = &dec.blocks[0];
        assert_eq!(b.pairs[0].x, at(&x_space, 1));
        assert_eq!(b.pairs[0].z, at(&x_space, 0));
        assert_eq!(
            b.c,
            BandOperator::matrix_unit(x_space.clone(), at(&x_space, 1), at(&x_space, 0)).unwrap()
        );
        assert_eq!(
            b.d,
            BandOperator::matrix_unit(n.clone(), at(&n, 1), at(&n, 1)).unwrap()
        );
        assert_eq!(dec.reassemble(&f).unwrap(), a);
    }

    #[test]
    fn diagonal_operators() {
        let f = folding(20).unwrap();
        let n = f.codomain().clone();
        let a = BandOperator::from_triplets(
            n.clone(),
            n.points().map(|p| (p, p, rational(p.0 as i64 + 1, 3))),
        )
        .unwrap();
        let dec = quotient_decomposition(&f, 1, 2, &a, 1).unwrap();
        for b in &dec.blocks {
            assert!(b.pairs.iter().all(|p| p.y == p.y_prime));
            assert!(b.d.propagation() <= 1);
        }
    }

    #[test]
    fn full_band_on_thirty_points() {
        let f = folding(30).unwrap();
        let delta = cococoarse_witness_with(&f, 1, 2, &Interior::All).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_rational_band(f.codomain().clone(), 2, 1.0, &mut rng);
        let dec = quotient_decomposition(&f, 1, delta, &a, 2).unwrap();
        assert_eq!(dec.reassemble(&f).unwrap(), a);
        assert!(dec.max_c_propagation() <= delta);
        assert!(dec.max_d_propagation() <= 1);
        let classes = dec.partition.class_count();
        assert!(dec.blocks.len() <= classes * classes);
        let check = check_witness(&dec.witness(&f, &a), 1e-9).unwrap();
        assert!(check.passed && check.exact);
    }

    #[test]
    fn missing_companion_is_reported() {
        let f = folding(20).unwrap();
        let n = f.codomain().clone();
        let a = BandOperator::<ComplexQ>::matrix_unit(n.clone(), at(&n, 10), at(&n, 7)).unwrap();
        assert!(matches!(
            quotient_decomposition(&f, 0, 0, &a, 3),
            Err(Error::Decomposition { .. })
        ));
    }

    #[test]
    fn parity_witness() {
        let space = parity_space(40).unwrap();
        let id = BandOperator::<ComplexQ>::identity(space.clone());
        let w = parity_decomposition(&id, 1e-9).unwrap();
        assert_eq!(w.terms.len(), 2);
        assert!(check_witness(&w, 1e-9).unwrap().exact);

        let e23 =
            BandOperator::<ComplexQ>::matrix_unit(space.clone(), at(&space, 2), at(&space, 3))
                .unwrap();
        let w = parity_decomposition(&e23, 1e-9).unwrap();
        assert_eq!(w.terms.len(), 1);
        assert_eq!(w.terms[0].0.propagation(), 1);
        assert!(check_witness(&w, 1e-9).unwrap().exact);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_band(space.clone(), 3, 0.8, &mut rng);
        let w = parity_decomposition(&a, 1e-9).unwrap();
        let check = check_witness(&w, 1e-9).unwrap();
        assert!(check.passed && check.residual <= 1e-12, "{check:?}");
        assert!(parity_decomposition(
            &BandOperator::<Complex64>::identity(parity_space(7).unwrap()),
            1e-9
        )
        .is_err());
    }

    #[test]
    fn witness_checks() {
        let f = folding(10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_band(f.domain().clone(), 2, 0.9, &mut rng);
        let b = ad_map(&f, &a).unwrap();
        let id = BandOperator::identity(f.codomain().clone());
        let mut w = CoboundedWitness {
            target: b,
            map: f.clone(),
            terms: vec![(id, a)],
            eps: 0.0,
            k: 0,
            ell: None,
        };
        let check = check_witness(&w, 1e-9).unwrap();
        assert!(check.passed && check.residual == 0.0);
        let n = f.codomain().clone();
        w.terms[0].0 = BandOperator::matrix_unit(n.clone(), at(&n, 1), at(&n, 2)).unwrap();
        w.eps = 100.0;
        let check = check_witness(&w, 1e-9).unwrap();
        assert!(!check.passed);
        assert!(check.violations.iter().any(|v| v.contains("propagation")));
    }

    #[test]
    fn diagnostic_flags_the_missing_unit() {
        let f = double_spacing(10).unwrap();
        let n = f.codomain().clone();
        assert!(cococoarse_witness(&f, 1, 1).is_some());
        let missing =
            BandOperator::<ComplexQ>::matrix_unit(n.clone(), at(&n, 3), at(&n, 2)).unwrap();
        let present =
            BandOperator::<ComplexQ>::matrix_unit(n.clone(), at(&n, 4), at(&n, 2)).unwrap();
        let report = almost_cobounded_diagnostic(&f, 1, 0.5, &[missing, present]).unwrap();
        assert!(report[0].flagged && report[0].required_propagation.is_none());
        assert!(!report[1].flagged && report[1].decomposes);
        assert!(almost_cobounded_diagnostic::<ComplexQ>(&f, 1, 0.5, &[])
            .unwrap()
            .is_empty());
    }
}
