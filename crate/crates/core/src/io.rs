//! JSON file formats for spaces, maps, operators, embeddings and isometries.
//!
//! Scalars are written as JSON numbers, except non-integral exact rationals,
//! which are written as `"p/q"` strings. Either form is accepted on input.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::embeddings::{EmbeddingTable, IsometryMap};
use crate::error::{Error, Result};
use crate::maps::{lattice_box, PointMap};
use crate::operators::{BandOperator, ComplexQ, Scalar};
use crate::spaces::{
    build_graph_space_labeled, build_grid_window, line_window, naturals_window, Dist, FiniteSpace,
    PointId, TriangleCheck,
};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    pub label: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<Vec<Vec<Dist>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    /// `"l1"` for lattice windows given by `coords`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior_margin: Option<Dist>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonmetric: Option<bool>,
}

impl SpaceFile {
    pub fn from_space(space: &FiniteSpace) -> Self {
        let lattice = space.is_lattice();
        SpaceFile {
            label: space.label().to_string(),
            n: space.len(),
            dist: (!lattice).then(|| space.distance_matrix()),
            edges: None,
            metric: lattice.then(|| "l1".to_string()),
            coords: space.all_coords().map(<[_]>::to_vec),
            boundary: Some(space.boundary().iter().map(|b| b.0).collect()),
            interior_margin: (space.interior_margin() > 0).then(|| space.interior_margin()),
            nonmetric: space.is_nonmetric().then_some(true),
        }
    }

    pub fn build(&self) -> Result<FiniteSpace> {
        let space = match (&self.metric, &self.dist, &self.edges) {
            (Some(m), _, _) if m == "l1" => {
                let coords = self.coords.clone().ok_or_else(|| {
                    Error::Format("field `coords` is required when metric is l1".into())
                })?;
                FiniteSpace::lattice(self.label.clone(), coords, Vec::new())?
            }
            (Some(m), _, _) => return Err(Error::Format(format!("unknown metric `{m}`"))),
            (None, Some(dist), None) => {
                let check = if self.nonmetric == Some(true) {
                    TriangleCheck::Flag
                } else {
                    TriangleCheck::Require
                };
                let s = FiniteSpace::from_matrix(self.label.clone(), dist, check)?;
                match &self.coords {
                    Some(c) => s.with_coords(c.clone())?,
                    None => s,
                }
            }
            (None, None, Some(edges)) => {
                let edges: Vec<(usize, usize)> = edges.iter().map(|e| (e[0], e[1])).collect();
                build_graph_space_labeled(self.label.clone(), self.n, &edges)?
            }
            _ => {
                return Err(Error::Format(
                    "a space needs exactly one of `dist`, `edges` or `metric: l1`".into(),
                ))
            }
        };
        if space.len() != self.n {
            return Err(Error::Format(format!(
                "field `n` is {} but the space has {} points",
                self.n,
                space.len()
            )));
        }
        let space = match &self.boundary {
            Some(b) => space.with_boundary(b.iter().copied().map(PointId).collect())?,
            None => space,
        };
        Ok(space.with_interior_margin(self.interior_margin.unwrap_or(0)))
    }
}

fn parse_range(s: &str, inclusive: bool) -> Option<(i64, i64)> {
    let inner = s.strip_prefix('[')?.strip_suffix(']')?;
    let (lo, hi) = inner.split_once(if inclusive { "..=" } else { ".." })?;
    let (lo, hi) = (lo.parse().ok()?, hi.parse().ok()?);
    Some(if inclusive { (lo, hi) } else { (lo, hi - 1) })
}

/// Builds one of the standard windows from its label, if the label names one.
pub fn space_from_label(label: &str) -> Option<Result<FiniteSpace>> {
    if let Some(rest) = label.strip_prefix('N') {
        let (lo, hi) = parse_range(rest, true)?;
        return (lo == 1 && hi >= 1).then(|| naturals_window(hi as usize));
    }
    let rest = label.strip_prefix('Z')?;
    if rest.starts_with('[') {
        let ranges: Option<Vec<(i64, i64)>> = rest
            .split('x')
            .map(|part| parse_range(part, true))
            .collect();
        let ranges = ranges?;
        return Some(if ranges.len() == 1 {
            line_window(ranges[0].0, ranges[0].1)
        } else {
            lattice_box(&ranges)
        });
    }
    let (dim, range) = rest.split_at(rest.find('[')?);
    let dim: usize = dim.parse().ok()?;
    let (lo, hi) = parse_range(range, false)?;
    (lo == 0 && hi >= 0).then(|| build_grid_window(dim, hi as usize + 1))
}

/// Spaces known by label: loaded from files first, then the standard windows.
#[derive(Clone, Debug, Default)]
pub struct SpaceRegistry {
    spaces: BTreeMap<String, Arc<FiniteSpace>>,
}

impl SpaceRegistry {
    pub fn insert(&mut self, space: Arc<FiniteSpace>) -> Arc<FiniteSpace> {
        self.spaces.insert(space.label().to_string(), space.clone());
        space
    }

    pub fn resolve(&mut self, label: &str) -> Result<Arc<FiniteSpace>> {
        if let Some(s) = self.spaces.get(label) {
            return Ok(s.clone());
        }
        match space_from_label(label) {
            Some(space) => Ok(self.insert(Arc::new(space?))),
            None => Err(Error::Format(format!(
                "unknown space `{label}`; pass its file with --space"
            ))),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn load_space(path: &Path) -> Result<FiniteSpace> {
    read_json::<SpaceFile>(path)?.build()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub domain: String,
    pub codomain: String,
    pub values: Vec<usize>,
}

impl MapFile {
    pub fn from_map(f: &PointMap) -> Self {
        MapFile {
            domain: f.domain().label().to_string(),
            codomain: f.codomain().label().to_string(),
            values: f.values().iter().map(|v| v.0).collect(),
        }
    }

    pub fn build(&self, registry: &mut SpaceRegistry) -> Result<PointMap> {
        let domain = registry.resolve(&self.domain)?;
        let codomain = registry.resolve(&self.codomain)?;
        PointMap::new(
            domain,
            codomain,
            self.values.iter().copied().map(PointId).collect(),
        )
    }
}

/// Conversion between scalars and their JSON form.
pub trait JsonScalar: Scalar {
    fn from_json(re: &Value, im: &Value) -> Result<Self>;
    fn to_json(&self) -> [Value; 2];
}

fn json_f64(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Format(format!("bad number {n}"))),
        Value::String(s) => json_rational(v)?
            .to_f64()
            .ok_or_else(|| Error::Format(format!("rational \"{s}\" out of range"))),
        other => Err(Error::Format(format!("expected a number, got {other}"))),
    }
}

fn json_rational(v: &Value) -> Result<BigRational> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from_integer(BigInt::from(i)))
            } else {
                let f = n
                    .as_f64()
                    .ok_or_else(|| Error::Format(format!("bad number {n}")))?;
                BigRational::from_float(f)
                    .ok_or_else(|| Error::Format(format!("non-finite number {n}")))
            }
        }
        Value::String(s) => {
            let bad = || Error::Format(format!("bad rational \"{s}\"; expected \"p/q\""));
            let (p, q) = s.split_once('/').unwrap_or((s, "1"));
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        other => Err(Error::Format(format!(
            "expected a number or \"p/q\", got {other}"
        ))),
    }
}

fn rational_json(q: &BigRational) -> Value {
    if q.is_integer() {
        if let Some(i) = q.to_integer().to_i64() {
            return Value::from(i);
        }
    }
    Value::from(q.to_string())
}

impl JsonScalar for Complex64 {
    fn from_json(re: &Value, im: &Value) -> Result<Self> {
        Ok(Complex64::new(json_f64(re)?, json_f64(im)?))
    }
    fn to_json(&self) -> [Value; 2] {
        [Value::from(self.re), Value::from(self.im)]
    }
}

impl JsonScalar for ComplexQ {
    fn from_json(re: &Value, im: &Value) -> Result<Self> {
        Ok(ComplexQ::new(json_rational(re)?, json_rational(im)?))
    }
    fn to_json(&self) -> [Value; 2] {
        [rational_json(&self.re), rational_json(&self.im)]
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub space: String,
    pub triplets: Vec<Vec<Value>>,
}

impl OperatorFile {
    pub fn from_operator<T: JsonScalar>(a: &BandOperator<T>) -> Self {
        OperatorFile {
            space: a.space().label().to_string(),
            triplets: a
                .entries()
                .map(|(x, y, v)| {
                    let [re, im] = v.to_json();
                    vec![Value::from(x.0), Value::from(y.0), re, im]
                })
                .collect(),
        }
    }

    pub fn build<T: JsonScalar>(&self, registry: &mut SpaceRegistry) -> Result<BandOperator<T>> {
        let space = registry.resolve(&self.space)?;
        self.build_over(space)
    }

    pub fn build_over<T: JsonScalar>(&self, space: Arc<FiniteSpace>) -> Result<BandOperator<T>> {
        let mut triplets = Vec::with_capacity(self.triplets.len());
        for (i, t) in self.triplets.iter().enumerate() {
            let ctx = |e: Error| Error::Format(format!("triplets[{i}]: {e}"));
            if t.len() != 4 {
                return Err(Error::Format(format!(
                    "triplets[{i}]: expected [x, y, re, im], got {} entries",
                    t.len()
                )));
            }
            let index = |v: &Value| {
                v.as_u64()
                    .map(|u| PointId(u as usize))
                    .ok_or_else(|| Error::Format(format!("triplets[{i}]: bad point index {v}")))
            };
            let v = T::from_json(&t[2], &t[3]).map_err(ctx)?;
            triplets.push((index(&t[0])?, index(&t[1])?, v));
        }
        BandOperator::from_triplets(space, triplets)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingFile {
    pub domain: String,
    pub codomain: String,
    pub pairs: Vec<(usize, usize, OperatorFile)>,
}

impl EmbeddingFile {
    pub fn from_table(phi: &EmbeddingTable) -> Self {
        EmbeddingFile {
            domain: phi.domain().label().to_string(),
            codomain: phi.codomain().label().to_string(),
            pairs: phi
                .pairs()
                .map(|((x, y), op)| (x.0, y.0, OperatorFile::from_operator(op)))
                .collect(),
        }
    }

    pub fn build(&self, registry: &mut SpaceRegistry) -> Result<EmbeddingTable> {
        let domain = registry.resolve(&self.domain)?;
        let codomain = registry.resolve(&self.codomain)?;
        let mut values = BTreeMap::new();
        for (i, (x, y, op)) in self.pairs.iter().enumerate() {
            if op.space != self.codomain {
                return Err(Error::Format(format!(
                    "pairs[{i}]: operator over `{}`, expected `{}`",
                    op.space, self.codomain
                )));
            }
            let op = op
                .build_over(codomain.clone())
                .map_err(|e| Error::Format(format!("pairs[{i}]: {e}")))?;
            values.insert((PointId(*x), PointId(*y)), op);
        }
        EmbeddingTable::new(domain, codomain, values)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsometryFile {
    pub domain: String,
    pub codomain: String,
    pub fiber: usize,
    /// Column `x * fiber + i` as `[point, re, im]` entries.
    pub columns: Vec<Vec<(usize, f64, f64)>>,
}

impl IsometryFile {
    pub fn from_isometry(u: &IsometryMap) -> Self {
        IsometryFile {
            domain: u.base().label().to_string(),
            codomain: u.codomain().label().to_string(),
            fiber: u.fiber(),
            columns: u
                .columns()
                .iter()
                .map(|c| c.iter().map(|(w, z)| (w.0, z.re, z.im)).collect())
                .collect(),
        }
    }

    pub fn build(&self, registry: &mut SpaceRegistry) -> Result<IsometryMap> {
        let base = registry.resolve(&self.domain)?;
        let codomain = registry.resolve(&self.codomain)?;
        let columns = self
            .columns
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&(w, re, im)| (PointId(w), Complex64::new(re, im)))
                    .collect()
            })
            .collect();
        IsometryMap::from_columns(base, self.fiber, codomain, columns, 1e-9)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionFile {
    pub space: String,
    pub permutations: Vec<Vec<usize>>,
}
