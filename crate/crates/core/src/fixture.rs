//! JSON fixtures: the ambient field, the schemes `X` and `Z`, local conditions
//! `(Y, T)` and sieve defaults.
//!
//! ```json
//! {
//!   "version": 1,
//!   "name": "plane-point",
//!   "p": 2, "a": 1, "n": 2,
//!   "X": { "generators": [], "closed_form": { "kind": "projective" } },
//!   "Z": { "generators": [{ "1,0,0": 1 }, { "0,1,0": 1 }],
//!          "closed_form": { "kind": "points", "degrees": [1] } },
//!   "config": { "m": 2, "k": 0, "l": 0 }
//! }
//! ```
//!
//! Field elements are integers whose base-`p` digits are the coefficients in
//! the tower's polynomial basis. `U = X − (X ∩ Y)`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ClosedPoint, GeomError, Scheme};
use crate::gf::{Elem, GfError, Tower};
use crate::ideals::{Admissible, IdealError, LocalConditions};
use crate::poly::Poly;
use crate::sieve::{Mode, SieveConfig, Which};
use crate::zeta::RationalZeta;

pub const FIXTURE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed fixture: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported fixture version {0} (expected {FIXTURE_VERSION})")]
    Version(u32),
    #[error("bad monomial key {0:?}")]
    Monomial(String),
    #[error("{0} is not an element of F_{{q^{1}}}")]
    Element(u32, u32),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureFile {
    pub version: u32,
    #[serde(default)]
    pub name: String,
    pub p: u64,
    #[serde(default = "one")]
    pub a: u32,
    pub n: usize,
    #[serde(rename = "X", default)]
    pub x: SchemeSpec,
    #[serde(rename = "Z", default = "SchemeSpec::empty")]
    pub z: SchemeSpec,
    #[serde(rename = "Y", default)]
    pub y: Option<LocalSpec>,
    #[serde(default)]
    pub config: ConfigSpec,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    /// Each generator maps `"e0,e1,..,en"` to a coefficient in `F_q`.
    #[serde(default)]
    pub generators: Vec<BTreeMap<String, u32>>,
    #[serde(default)]
    pub removed: Vec<PointSpec>,
    #[serde(default)]
    pub closed_form: Option<ClosedFormSpec>,
    /// The unit ideal: `Z = ∅`.
    #[serde(default)]
    pub empty: bool,
    #[serde(default = "yes")]
    pub assume_saturated: bool,
    #[serde(default = "yes")]
    pub assume_reduced: bool,
}

fn yes() -> bool {
    true
}

impl SchemeSpec {
    fn empty() -> Self {
        SchemeSpec { empty: true, assume_saturated: true, assume_reduced: true, ..Default::default() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    #[serde(default = "one")]
    pub ext: u32,
    pub coords: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClosedFormSpec {
    Projective,
    Line,
    Conic,
    TwoLines,
    Empty,
    Points { degrees: Vec<u32> },
    /// `Z(T) = Π (1 − q^k T^δ)^{−c}` given as `[k, δ, c]` triples.
    Factors { factors: Vec<(u32, u32, i64)> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalSpec {
    pub points: Vec<PointSpec>,
    #[serde(rename = "T", default)]
    pub t: TSpec,
}

/// `"all"` or a list of admissible tuples, one value per point of `Y`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TSpec {
    All(AllMarker),
    Listed(Vec<Vec<u32>>),
}

impl Default for TSpec {
    fn default() -> Self {
        TSpec::All(AllMarker)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AllMarker;

impl Serialize for AllMarker {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("all")
    }
}

impl<'de> Deserialize<'de> for AllMarker {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "all" {
            Ok(AllMarker)
        } else {
            Err(serde::de::Error::custom(format!("expected \"all\", found {s:?}")))
        }
    }
}

/// Sieve defaults; every key can be overridden from the command line.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    pub which: Option<Which>,
    pub mode: Option<Mode>,
    pub m: Option<usize>,
    pub l: Option<usize>,
    pub k: Option<usize>,
    pub r: Option<u32>,
    pub c: Option<u32>,
    #[serde(rename = "B")]
    pub b: Option<u32>,
    #[serde(rename = "E")]
    pub e: Option<u32>,
    pub ext_bound: Option<u32>,
    pub c_search_max: Option<u32>,
    pub hypothesis_degree: Option<u32>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub exhaustive_budget: Option<u64>,
    pub d_min: Option<u32>,
    pub d_max: Option<u32>,
    pub tolerance: Option<f64>,
    pub s: Option<u32>,
    pub e_max: Option<u32>,
}

/// Keys accepted by [`ConfigSpec::set`].
pub const CONFIG_KEYS: [&str; 20] = [
    "which",
    "mode",
    "m",
    "l",
    "k",
    "r",
    "c",
    "B",
    "E",
    "ext_bound",
    "c_search_max",
    "hypothesis_degree",
    "samples",
    "seed",
    "exhaustive_budget",
    "d_min",
    "d_max",
    "tolerance",
    "s",
    "e_max",
];

impl ConfigSpec {
    /// Applies `key=value`; unknown keys and unparsable values are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), FixtureError> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>, FixtureError> {
            value
                .parse()
                .map(Some)
                .map_err(|_| FixtureError::Invalid(format!("cannot parse {value:?} for {key}")))
        }
        fn parse_enum<T: clap::ValueEnum>(key: &str, value: &str) -> Result<Option<T>, FixtureError> {
            T::from_str(value, true)
                .map(Some)
                .map_err(|_| FixtureError::Invalid(format!("cannot parse {value:?} for {key}")))
        }
        match key {
            "which" => self.which = parse_enum(key, value)?,
            "mode" => self.mode = parse_enum(key, value)?,
            "m" => self.m = parse(key, value)?,
            "l" => self.l = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "r" => self.r = parse(key, value)?,
            "c" => self.c = parse(key, value)?,
            "B" => self.b = parse(key, value)?,
            "E" => self.e = parse(key, value)?,
            "ext_bound" => self.ext_bound = parse(key, value)?,
            "c_search_max" => self.c_search_max = parse(key, value)?,
            "hypothesis_degree" => self.hypothesis_degree = parse(key, value)?,
            "samples" => self.samples = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "exhaustive_budget" => self.exhaustive_budget = parse(key, value)?,
            "d_min" => self.d_min = parse(key, value)?,
            "d_max" => self.d_max = parse(key, value)?,
            "tolerance" => self.tolerance = parse(key, value)?,
            "s" => self.s = parse(key, value)?,
            "e_max" => self.e_max = parse(key, value)?,
            _ => {
                return Err(FixtureError::Invalid(format!(
                    "unknown config key {key:?}; expected one of {}",
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }
}

/// A loaded fixture.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub tower: Arc<Tower>,
    pub n: usize,
    pub x: Scheme,
    /// `X − (X ∩ Y)`.
    pub u: Scheme,
    pub z: Scheme,
    pub local: LocalConditions,
    pub config: ConfigSpec,
}

impl Fixture {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, FixtureError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| FixtureError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, FixtureError> {
        let file: FixtureFile = serde_json::from_str(text)?;
        Self::from_file(file)
    }

    pub fn from_file(file: FixtureFile) -> Result<Self, FixtureError> {
        if file.version != FIXTURE_VERSION {
            return Err(FixtureError::Version(file.version));
        }
        let tower = Tower::new(file.p, file.a)?;
        let n = file.n;
        let x = build_scheme(&tower, n, &file.x)?;
        let z = build_scheme(&tower, n, &file.z)?;
        let (local, y_points) = match &file.y {
            None => (LocalConditions::none(tower.q()), Vec::new()),
            Some(spec) => {
                let points = spec
                    .points
                    .iter()
                    .map(|p| point(&tower, n, p))
                    .collect::<Result<Vec<_>, _>>()?;
                let admissible = match &spec.t {
                    TSpec::All(_) => Admissible::All,
                    TSpec::Listed(tuples) => Admissible::Listed(
                        tuples.iter().map(|t| t.iter().map(|&v| Elem(v)).collect()).collect(),
                    ),
                };
                (LocalConditions::new(&tower, points.clone(), admissible)?, points)
            }
        };
        let mut on_x = Vec::new();
        for p in y_points {
            if x.contains(&p)? {
                on_x.push(p);
            }
        }
        let mut removed = x.removed().to_vec();
        removed.extend(on_x);
        let u = x.clone().with_removed(removed)?;
        Ok(Fixture { name: file.name, tower, n, x, u, z, local, config: file.config })
    }

    /// A sieve configuration from the fixture defaults.
    pub fn sieve_config(&self) -> Result<SieveConfig, FixtureError> {
        let c = &self.config;
        let m = match c.m {
            Some(m) => m,
            None => self
                .u
                .estimate_dimension(c.ext_bound.unwrap_or(4), None)?
                .as_option()
                .ok_or_else(|| FixtureError::Invalid("U is empty".into()))? as usize,
        };
        let mut cfg = SieveConfig::new(self.u.clone(), self.z.clone(), m);
        cfg.local = self.local.clone();
        cfg.l = c.l;
        cfg.c = c.c;
        if let Some(v) = c.which {
            cfg.which = v;
        }
        if let Some(v) = c.k {
            cfg.k = v;
        }
        if let Some(v) = c.r {
            cfg.r = v;
        }
        if let Some(v) = c.b {
            cfg.b = v;
        }
        if let Some(v) = c.e {
            cfg.e = v;
        }
        if let Some(v) = c.ext_bound {
            cfg.ext_bound = v;
        }
        if let Some(v) = c.c_search_max {
            cfg.c_search_max = v;
        }
        if let Some(v) = c.hypothesis_degree {
            cfg.hypothesis_degree = v;
        }
        if let Some(v) = c.samples {
            cfg.samples = v;
        }
        if let Some(v) = c.seed {
            cfg.seed = v;
        }
        if let Some(v) = c.exhaustive_budget {
            cfg.exhaustive_budget = v;
        }
        Ok(cfg)
    }
}

fn element(tower: &Tower, ext: u32, v: u32) -> Result<Elem, FixtureError> {
    let field = tower.field(ext)?;
    if !field.contains(Elem(v)) {
        return Err(FixtureError::Element(v, ext));
    }
    Ok(Elem(v))
}

fn point(tower: &Tower, n: usize, spec: &PointSpec) -> Result<ClosedPoint, FixtureError> {
    if spec.coords.len() != n + 1 {
        return Err(FixtureError::Invalid(format!(
            "point {:?} needs {} coordinates",
            spec.coords,
            n + 1
        )));
    }
    let coords = spec
        .coords
        .iter()
        .map(|&v| element(tower, spec.ext, v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ClosedPoint::from_coords(tower, spec.ext, &coords)?)
}

fn monomial(key: &str, n: usize) -> Result<Vec<u32>, FixtureError> {
    let exps = key
        .split(',')
        .map(|s| s.trim().parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| FixtureError::Monomial(key.to_string()))?;
    if exps.len() != n + 1 {
        return Err(FixtureError::Monomial(key.to_string()));
    }
    Ok(exps)
}

fn build_scheme(tower: &Arc<Tower>, n: usize, spec: &SchemeSpec) -> Result<Scheme, FixtureError> {
    let q = tower.q();
    let mut scheme = if spec.empty {
        if !spec.generators.is_empty() {
            return Err(FixtureError::Invalid("an empty scheme takes no generators".into()));
        }
        Scheme::empty(tower.clone(), n)
    } else if spec.generators.is_empty() {
        Scheme::projective_space(tower.clone(), n)
    } else {
        let base = tower.base();
        let mut gens = Vec::new();
        for g in &spec.generators {
            let mut terms = Vec::new();
            for (key, &c) in g {
                terms.push((monomial(key, n)?, element(tower, 1, c)?));
            }
            gens.push(Poly::from_terms(n + 1, &base, terms));
        }
        Scheme::new(tower.clone(), n, gens)?
    };
    if let Some(cf) = &spec.closed_form {
        let zeta = match cf {
            ClosedFormSpec::Projective => RationalZeta::projective_space(q, n),
            ClosedFormSpec::Line | ClosedFormSpec::Conic => RationalZeta::line(q),
            ClosedFormSpec::TwoLines => RationalZeta::two_lines(q),
            ClosedFormSpec::Empty => RationalZeta::empty(q),
            ClosedFormSpec::Points { degrees } => RationalZeta::points(q, degrees),
            ClosedFormSpec::Factors { factors } => {
                let mut z = RationalZeta::empty(q);
                for &(k, delta, c) in factors {
                    if delta == 0 {
                        return Err(FixtureError::Invalid("factor degree must be positive".into()));
                    }
                    z.add_factor(k, delta, c);
                }
                z
            }
        };
        scheme = scheme.with_closed_form(zeta);
    }
    scheme = scheme.with_flags(spec.assume_saturated, spec.assume_reduced);
    if !spec.removed.is_empty() {
        let removed = spec
            .removed
            .iter()
            .map(|p| point(tower, n, p))
            .collect::<Result<Vec<_>, _>>()?;
        scheme = scheme.with_removed(removed)?;
    }
    Ok(scheme)
}

#[cfg(test)]
mod tests {
    use super::*;

    const POINT: &str = r#"{
        "version": 1, "name": "plane-point", "p": 2, "n": 2,
        "Z": { "generators": [{ "1,0,0": 1 }, { "0,1,0": 1 }],
               "closed_form": { "kind": "points", "degrees": [1] } },
        "config": { "m": 2, "k": 0, "l": 0 }
    }"#;

    #[test]
    fn loads_point_fixture() {
        let f = Fixture::from_json(POINT).unwrap();
        assert_eq!(f.u.count_points(1).unwrap(), 7);
        assert_eq!(f.z.count_points(1).unwrap(), 1);
        let cfg = f.sieve_config().unwrap();
        assert_eq!((cfg.m, cfg.l, cfg.k), (2, Some(0), 0));
    }

    #[test]
    fn rejects_other_versions_and_unknown_keys() {
        let v2 = POINT.replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(Fixture::from_json(&v2), Err(FixtureError::Version(2))));
        let extra = POINT.replace("\"k\": 0", "\"kk\": 0");
        assert!(matches!(Fixture::from_json(&extra), Err(FixtureError::Json(_))));
        let mut cfg = ConfigSpec::default();
        assert!(cfg.set("B", "4").is_ok());
        assert_eq!(cfg.b, Some(4));
        assert!(cfg.set("bogus", "1").is_err());
        assert!(cfg.set("which", "lemma-low").is_ok());
        assert!(cfg.set("r", "x").is_err());
    }

    #[test]
    fn y_points_are_removed_from_u() {
        let text = r#"{
            "version": 1, "p": 2, "n": 2, "Z": { "empty": true },
            "Y": { "points": [{ "coords": [1, 1, 1] }], "T": [[1]] }
        }"#;
        let f = Fixture::from_json(text).unwrap();
        assert_eq!(f.u.count_points(1).unwrap(), 6);
        assert_eq!(f.local.t_size(), 1u32.into());
        let all = text.replace("[[1]]", "\"all\"");
        let f = Fixture::from_json(&all).unwrap();
        assert_eq!(f.local.t_size(), 2u32.into());
        let bad = text.replace("[[1]]", "[[5]]");
        assert!(Fixture::from_json(&bad).is_err());
    }
}
