//! The closed point sieve: membership in `P`, `P_r`, `Q_r^med`,
//! `Q^high_{U−V}`, `Q_V` and `Q`, predicted densities, and exhaustive or
//! Monte-Carlo density estimates over `I_d`.
//!
//! Every membership question reduces to linear algebra on the coordinates of
//! `f` in a basis of `I_d`: `H_f ∩ U` is singular at `P` iff the jet of `f` at
//! `P` vanishes, and the jet is a fixed `F_p`-linear map of those coordinates.
//! The maps are built once per degree, so classifying one `f` costs a few
//! word-sized dot products per closed point.

use std::collections::HashSet;
use std::io::Write;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    estimate_from_counts, plane_curve_singular_locus_is_finite, ClosedPoint, Dimension, GeomError, Scheme,
};
use crate::ideals::{self, Admissible, GradedBasis, IdealError, LocalConditions};
use crate::linalg::{FpRowSpace, FpVec};
use crate::zeta::{complement_zeta, rational_to_f64, ZetaError, ZetaValue};

pub const DEFAULT_EXHAUSTIVE_BUDGET: u64 = 1 << 22;
const CHUNK: usize = 1024;
const MAX_WITNESSES: usize = 8;

#[derive(Debug, Error)]
pub enum SieveError {
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Zeta(#[from] ZetaError),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("exhaustive enumeration of I_{d} needs {size} evaluations, over the budget of {budget}")]
    BudgetExceeded { d: u32, size: String, budget: u64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    Theorem1,
    Theorem2,
    LemmaLow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exhaustive,
    #[value(name = "mc")]
    #[serde(rename = "mc")]
    MonteCarlo,
}

/// Inputs of one sieve experiment. `V = Z ∩ U` is derived.
#[derive(Clone, Debug)]
pub struct SieveConfig {
    pub u: Scheme,
    pub z: Scheme,
    pub local: LocalConditions,
    pub which: Which,
    /// Dimension of `U`.
    pub m: usize,
    /// Dimension of `V`; estimated from point counts when absent.
    pub l: Option<usize>,
    pub k: usize,
    /// Low-degree cutoff: `P_r` looks at points of degree `< r`.
    pub r: u32,
    /// `S_1 I_d = I_{d+1}` for `d >= c`; computed when absent.
    pub c: Option<u32>,
    /// Smoothness is certified at closed points of degree `<= b`.
    pub b: u32,
    /// Zeta truncation degree when no closed form is registered.
    pub e: u32,
    pub ext_bound: u32,
    /// Largest `d` searched by `find_c`.
    pub c_search_max: u32,
    /// Degree bound for the smoothness hypothesis checks on `U` and `V`.
    pub hypothesis_degree: u32,
    pub samples: usize,
    pub seed: u64,
    pub exhaustive_budget: u64,
}

impl SieveConfig {
    pub fn new(u: Scheme, z: Scheme, m: usize) -> Self {
        let q = u.q();
        SieveConfig {
            u,
            z,
            local: LocalConditions::none(q),
            which: Which::Theorem1,
            m,
            l: None,
            k: 0,
            r: 2,
            c: None,
            b: 5,
            e: 14,
            ext_bound: 4,
            c_search_max: 8,
            hypothesis_degree: 3,
            samples: 20_000,
            seed: 0,
            exhaustive_budget: DEFAULT_EXHAUSTIVE_BUDGET,
        }
    }

    pub fn v(&self) -> Result<Scheme, SieveError> {
        Ok(self.z.intersect(&self.u)?)
    }

    pub fn resolve_c(&self) -> Result<u32, SieveError> {
        match self.c {
            Some(c) => Ok(c),
            None => Ok(ideals::find_c(&self.z, self.c_search_max)?),
        }
    }

    fn validate(&self) -> Result<(), SieveError> {
        if self.r < 1 {
            return Err(SieveError::Config("r must be at least 1".into()));
        }
        if self.b + 1 < self.r {
            return Err(SieveError::Config(format!("B = {} must be at least r - 1 = {}", self.b, self.r - 1)));
        }
        if self.u.n() != self.z.n() || self.u.q() != self.z.q() {
            return Err(SieveError::Config("U and Z must live in the same P^n over the same field".into()));
        }
        Ok(())
    }
}

/// Outcome of the hypothesis checks of the selected statement.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Hypotheses {
    pub ok: bool,
    pub checks: Vec<String>,
    pub failures: Vec<String>,
    pub l: Option<usize>,
    pub max_e_plus_dim: Option<i64>,
}

impl Hypotheses {
    fn record(&mut self, ok: bool, text: String) {
        if ok {
            self.checks.push(text);
        } else {
            self.failures.push(text);
        }
    }
}

pub fn check_hypotheses(cfg: &SieveConfig) -> Result<Hypotheses, SieveError> {
    cfg.validate()?;
    let mut h = Hypotheses::default();
    let disjoint = cfg.local.check_disjoint(&cfg.z).is_ok();
    h.record(disjoint, "Z ∩ Y = ∅".into());
    let bound = cfg.hypothesis_degree;
    let u_smooth = cfg.u.verify_smooth_of_dim(cfg.m, bound)?;
    h.record(u_smooth, format!("U smooth of dimension {} at closed points of degree <= {bound}", cfg.m));
    let v = cfg.v()?;
    match cfg.which {
        Which::Theorem1 => {
            let l = match cfg.l {
                Some(l) => Some(l),
                None => v.estimate_dimension(cfg.ext_bound, None)?.as_option().map(|d| d as usize),
            };
            h.l = l;
            if let Some(l) = l {
                let smooth = v.verify_smooth_of_dim(l, bound)?;
                h.record(smooth, format!("V smooth of dimension {l} at closed points of degree <= {bound}"));
                h.record(2 * l <= cfg.m + cfg.k, format!("2l = {} <= m + k = {}", 2 * l, cfg.m + cfg.k));
            } else {
                h.checks.push("V empty".into());
            }
        }
        Which::Theorem2 => {
            let strata = v.stratify_by_embedding_dim(bound, cfg.ext_bound)?;
            let max = strata.max_e_plus_dim();
            h.max_e_plus_dim = max;
            h.record(
                max.is_none_or(|x| x <= cfg.m as i64),
                format!("max(e + dim V_e) = {} <= m = {}", max.map_or("-inf".into(), |x| x.to_string()), cfg.m),
            );
        }
        Which::LemmaLow => {}
    }
    h.ok = h.failures.is_empty();
    Ok(h)
}

/// A predicted density with its ingredients.
#[derive(Clone, Debug, Serialize)]
pub struct Prediction {
    pub which: Which,
    pub value: f64,
    pub rational: Option<String>,
    /// `#T / #H⁰(Y, O_Y)`.
    pub local_factor: String,
    /// `ζ_{U−V}(m+1)` for the theorem modes.
    pub zeta: Option<ZetaValue>,
    pub hypotheses: Hypotheses,
    pub notes: Vec<String>,
}

pub fn theoretical_density(cfg: &SieveConfig, which: Which) -> Result<Prediction, SieveError> {
    let mut cfg = cfg.clone();
    cfg.which = which;
    let hypotheses = check_hypotheses(&cfg)?;
    if !hypotheses.ok {
        return Err(SieveError::Hypothesis(hypotheses.failures.join("; ")));
    }
    let local = cfg.local.ratio();
    let s = cfg.m as u32 + 1;
    let v = cfg.v()?;
    let mut notes = Vec::new();
    let (rational, value, zeta) = match which {
        Which::Theorem1 | Which::Theorem2 => {
            let zeta = complement_zeta(&cfg.u, &v, s, cfg.e)?;
            match zeta.inverse_rational() {
                Some(inv) => {
                    let r = &local * inv;
                    (Some(r.to_string()), rational_to_f64(&r), Some(zeta))
                }
                None => {
                    if zeta.tail_bound > 0.0 {
                        notes.push(format!("ζ truncated at degree {}; tail bound {:.3e}", cfg.e, zeta.tail_bound));
                    }
                    (None, rational_to_f64(&local) * zeta.inverse_value(), Some(zeta))
                }
            }
        }
        Which::LemmaLow => {
            let q = num_bigint::BigInt::from(cfg.u.q());
            let mut acc = local.clone();
            for d in 1..cfg.r {
                for p in cfg.u.closed_points(d)? {
                    if v.contains(&p)? {
                        continue;
                    }
                    let den = num_traits::pow(q.clone(), (s * d) as usize);
                    acc *= BigRational::new(&den - num_bigint::BigInt::one(), den);
                }
            }
            notes.push(
                "low-degree factors are (1 - q^{-(m+1) deg P}), so that r -> infinity recovers ζ_{U-V}(m+1)^{-1}; \
                 the inverted factors would give a density above 1"
                    .into(),
            );
            (Some(acc.to_string()), rational_to_f64(&acc), None)
        }
    };
    Ok(Prediction {
        which,
        value,
        rational,
        local_factor: local.to_string(),
        zeta,
        hypotheses,
        notes,
    })
}

/// Degree windows of the sieve for a given `d`: low `[1, r)`, medium
/// `[r, ⌊(d−c)/(m+1)⌋]`, high `(max(⌊(d−c)/(m+1)⌋, r−1), B]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Windows {
    pub r: u32,
    pub medium_max: i64,
    pub b: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Window {
    Low,
    Medium,
    High,
    Beyond,
}

impl Windows {
    pub fn new(d: u32, c: u32, m: usize, r: u32, b: u32) -> Self {
        let medium_max = (d as i64 - c as i64).div_euclid(m as i64 + 1);
        Windows { r, medium_max, b }
    }

    pub fn classify(&self, degree: u32) -> Window {
        let deg = degree as i64;
        if degree < self.r {
            Window::Low
        } else if deg <= self.medium_max {
            if degree <= self.b { Window::Medium } else { Window::Beyond }
        } else if degree <= self.b {
            Window::High
        } else {
            Window::Beyond
        }
    }
}

struct PointData {
    point: ClosedPoint,
    on_v: bool,
    jets: FpRowSpace,
}

/// Per-degree data: the basis of `I_d`, jet maps at every closed point of `U`
/// up to `max(B, ext_bound, r − 1)`, and the restriction map to `Y`.
pub struct SieveContext {
    cfg: SieveConfig,
    d: u32,
    c: u32,
    basis: GradedBasis,
    points: Vec<PointData>,
    restriction: Vec<FpVec>,
    admissible: Option<HashSet<Vec<u32>>>,
    windows: Windows,
    plane: bool,
    v_dim: Dimension,
    growth: f64,
    growth_v: f64,
}

/// Membership of one `f` in the sieve's sets.
#[derive(Clone, Debug, Default, Serialize)]
pub struct StrataFlags {
    pub zero: bool,
    pub restriction_ok: bool,
    pub in_p: bool,
    pub in_p_r: bool,
    pub in_q_med: bool,
    pub in_q_high: bool,
    pub in_q_v: bool,
    pub in_q: bool,
    /// Indices (into the context's point list) of the enumerated singular points.
    pub singular: Vec<usize>,
    pub singular_dim: Option<Dimension>,
    pub singular_v_dim: Option<Dimension>,
}

impl StrataFlags {
    /// The inclusion chain `P ⊆ P_r ⊆ P ∪ Q_med ∪ Q_high ∪ Q_V` (with `Q` in
    /// place of `Q_V` for the second theorem).
    pub fn chain_holds(&self, which: Which) -> bool {
        let tail = match which {
            Which::Theorem2 => self.in_q,
            _ => self.in_q_v,
        };
        (!self.in_p || self.in_p_r) && (!self.in_p_r || self.in_p || self.in_q_med || self.in_q_high || tail)
    }
}

impl SieveContext {
    pub fn new(cfg: &SieveConfig, d: u32) -> Result<Self, SieveError> {
        cfg.validate()?;
        let c = cfg.resolve_c()?;
        let v = cfg.v()?;
        let basis = ideals::graded_piece_auto(&cfg.z, d)?;
        let base = basis.field().clone();
        let tower = cfg.u.tower().clone();
        let top = cfg.b.max(cfg.ext_bound).max(cfg.r.saturating_sub(1));
        let cols = basis.dim() * base.a() as usize;
        let mut points = Vec::new();
        for p in cfg.u.closed_points_up_to(top)? {
            let rows = ideals::jet_rows(&cfg.u, &p, &basis)?;
            let jets = FpRowSpace::from_rows(base.p(), cols, ideals::fq_rows_to_fp(&base, &rows));
            let on_v = v.on_locus(&p)?;
            points.push(PointData { point: p, on_v, jets });
        }
        let mut restriction_rows = Vec::new();
        for p in cfg.local.points() {
            let field = tower.field(p.degree()).map_err(IdealError::from)?;
            let table = crate::poly::PowerTable::new(&field, p.coords(), d);
            let values = vec![basis.monomials().iter().map(|m| table.monomial(&field, m)).collect::<Vec<_>>()];
            restriction_rows.extend(ideals::rows_on_basis(&tower, p.degree(), &values, &basis)?);
        }
        let restriction = ideals::fq_rows_to_fp(&base, &restriction_rows);
        let admissible = match cfg.local.admissible() {
            Admissible::All => None,
            Admissible::Listed(t) => {
                let mut set = HashSet::new();
                for tuple in t {
                    let mut coords = Vec::new();
                    for (&y, p) in tuple.iter().zip(cfg.local.points()) {
                        coords.extend(ideals::trace_coordinates(&tower, p.degree(), y).map_err(IdealError::from)?);
                    }
                    set.insert(ideals::fq_to_fp(&base, &coords).to_digits());
                }
                Some(set)
            }
        };
        let plane = cfg.u.n() == 2 && cfg.u.generators().is_empty();
        let v_dim = v.estimate_dimension(cfg.ext_bound, None)?;
        let growth = 4.0 * (d.max(1) as f64).powi(cfg.m as i32) * cfg.u.degree_data();
        let growth_v = v.default_growth_constant();
        Ok(SieveContext {
            cfg: cfg.clone(),
            d,
            c,
            basis,
            points,
            restriction,
            admissible,
            windows: Windows::new(d, c, cfg.m, cfg.r, cfg.b),
            plane,
            v_dim,
            growth,
            growth_v,
        })
    }

    pub fn basis(&self) -> &GradedBasis {
        &self.basis
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn windows(&self) -> Windows {
        self.windows
    }

    pub fn points(&self) -> impl Iterator<Item = (&ClosedPoint, bool)> {
        self.points.iter().map(|p| (&p.point, p.on_v))
    }

    pub fn point(&self, index: usize) -> &ClosedPoint {
        &self.points[index].point
    }

    /// Length of the digit vectors describing elements of `I_d`.
    pub fn coordinate_len(&self) -> usize {
        self.basis.dim() * self.basis.field().a() as usize
    }

    /// The polynomial with the given digit coordinates.
    pub fn poly_of(&self, x: &FpVec) -> crate::Poly {
        self.basis.poly(&ideals::fp_to_fq(self.basis.field(), x))
    }

    /// Digit coordinates of `f ∈ I_d`; `None` when `f ∉ I_d`.
    pub fn coordinates_of(&self, f: &crate::Poly) -> Option<FpVec> {
        if !self.basis.contains(f) {
            return None;
        }
        // The basis is in reduced echelon form: coordinates are read off the pivots.
        let base = self.basis.field();
        let coeffs = self.basis.coefficients_of(f);
        let coords: Vec<_> = self
            .basis
            .rows()
            .iter()
            .map(|row| {
                let pivot = row.iter().position(|c| c.0 != 0).unwrap();
                coeffs[pivot]
            })
            .collect();
        Some(ideals::fq_to_fp(base, &coords))
    }

    pub fn is_singular_at(&self, x: &FpVec, index: usize) -> bool {
        self.points[index].jets.annihilates(x)
    }

    pub fn restriction_digits(&self, x: &FpVec) -> Vec<u32> {
        self.restriction.iter().map(|r| r.dot(x)).collect()
    }

    pub fn classify(&self, x: &FpVec) -> Result<StrataFlags, SieveError> {
        let which = self.cfg.which;
        let mut flags = StrataFlags { zero: x.is_zero(), ..Default::default() };
        flags.singular = (0..self.points.len()).filter(|&i| self.is_singular_at(x, i)).collect();
        flags.restriction_ok = match &self.admissible {
            None => true,
            Some(t) => t.contains(&self.restriction_digits(x)),
        };
        let mut off_v_upto_b = false;
        let mut low = false;
        for &i in &flags.singular {
            let pd = &self.points[i];
            if pd.on_v {
                continue;
            }
            match self.windows.classify(pd.point.degree()) {
                Window::Low => {
                    low = true;
                    off_v_upto_b = true;
                }
                Window::Medium => {
                    flags.in_q_med = true;
                    off_v_upto_b = true;
                }
                Window::High => {
                    flags.in_q_high = true;
                    off_v_upto_b = true;
                }
                Window::Beyond => {}
            }
        }
        flags.in_p_r = !low && flags.restriction_ok;

        let needs_sing = match which {
            Which::Theorem2 => true,
            _ => !flags.zero && !off_v_upto_b && flags.restriction_ok,
        };
        if needs_sing {
            flags.singular_dim = Some(self.singular_dimension(x, &flags)?);
        }
        let k = match which {
            Which::Theorem2 => 0,
            _ => self.cfg.k,
        };
        flags.in_p = !flags.zero
            && flags.restriction_ok
            && !off_v_upto_b
            && flags.singular_dim.is_some_and(|dim| dim.at_most(k as i64));
        match which {
            Which::Theorem2 => {
                flags.in_q = flags.singular_dim.is_some_and(|dim| dim.at_least(1));
            }
            _ => {
                let dim_v = self.singular_v_dimension(x, &flags)?;
                flags.singular_v_dim = Some(dim_v);
                flags.in_q_v = dim_v.at_least(k as i64 + 1);
            }
        }
        Ok(flags)
    }

    fn sing_counts(&self, flags: &StrataFlags, only_v: bool) -> Vec<u128> {
        (1..=self.cfg.ext_bound)
            .map(|e| {
                flags
                    .singular
                    .iter()
                    .map(|&i| &self.points[i])
                    .filter(|pd| (!only_v || pd.on_v) && e % pd.point.degree() == 0)
                    .map(|pd| pd.point.degree() as u128)
                    .sum()
            })
            .collect()
    }

    /// `dim (H_f ∩ U)_sing`: exact on open subsets of `P²`, where it is at
    /// most 0 iff `f` is squarefree; elsewhere the growth estimate.
    fn singular_dimension(&self, x: &FpVec, flags: &StrataFlags) -> Result<Dimension, SieveError> {
        if flags.zero {
            return Ok(Dimension::Finite(self.cfg.m as u32));
        }
        let enumerated = if flags.singular.is_empty() { Dimension::Empty } else { Dimension::Finite(0) };
        if self.plane {
            let f = self.poly_of(x);
            if plane_curve_singular_locus_is_finite(self.cfg.u.tower(), &f)? {
                return Ok(enumerated);
            }
            return Ok(Dimension::Finite(1));
        }
        Ok(estimate_from_counts(&self.sing_counts(flags, false), self.cfg.u.q(), self.growth))
    }

    fn singular_v_dimension(&self, x: &FpVec, flags: &StrataFlags) -> Result<Dimension, SieveError> {
        if flags.zero {
            return Ok(self.v_dim);
        }
        let on_v = flags.singular.iter().any(|&i| self.points[i].on_v);
        let enumerated = if on_v { Dimension::Finite(0) } else { Dimension::Empty };
        if self.v_dim.at_most(0) {
            return Ok(enumerated);
        }
        if self.plane {
            let finite = match flags.singular_dim {
                Some(dim) => dim.at_most(0),
                None => plane_curve_singular_locus_is_finite(self.cfg.u.tower(), &self.poly_of(x))?,
            };
            if finite {
                return Ok(enumerated);
            }
        }
        Ok(estimate_from_counts(&self.sing_counts(flags, true), self.cfg.u.q(), self.growth_v))
    }

    /// Enumerated singular points of `f`, for witnesses.
    pub fn singular_points(&self, flags: &StrataFlags) -> Vec<ClosedPoint> {
        flags.singular.iter().map(|&i| self.points[i].point.clone()).collect()
    }
}

/// Frequency of one set among the evaluated polynomials.
#[derive(Clone, Debug, Serialize)]
pub struct StratumFrequency {
    pub stratum: String,
    pub count: u64,
    pub empirical: f64,
    /// Half-width of the binomial 95% interval; 0 for exhaustive counts.
    pub radius: f64,
    pub prediction: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub index: u64,
    pub coordinates: Vec<u32>,
    pub polynomial: String,
    pub failed: Vec<String>,
    pub singular_points: Vec<ClosedPoint>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub which: Which,
    pub mode: Mode,
    pub d: u32,
    pub c: u32,
    pub dim_i_d: usize,
    pub q: u64,
    /// Number of polynomials classified.
    pub evaluated: u64,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub b: u32,
    pub e: u32,
    pub r: u32,
    pub m: usize,
    pub k: usize,
    pub windows: Windows,
    pub strata: Vec<StratumFrequency>,
    pub prediction: Prediction,
    /// The zero polynomial: counted (exhaustive mode) but never in `P`.
    pub zero_polynomials: u64,
    pub chain_violations: u64,
    /// Members of `P` with an enumerated singular point off `Z`.
    pub p_singular_off_z: u64,
    /// Members of `P` whose enumerated singular points grow like a positive-dimensional set.
    pub p_singular_dim_positive: u64,
    pub notes: Vec<String>,
    pub witnesses: Vec<Witness>,
}

impl DensityReport {
    pub fn stratum(&self, name: &str) -> Option<&StratumFrequency> {
        self.strata.iter().find(|s| s.stratum == name)
    }

    /// The set whose density the selected statement predicts.
    pub fn headline(&self) -> &StratumFrequency {
        let name = match self.which {
            Which::LemmaLow => "P_r",
            _ => "P",
        };
        self.stratum(name).expect("headline stratum is always reported")
    }

    pub fn within_tolerance(&self, tolerance: f64) -> bool {
        let h = self.headline();
        h.prediction.is_some_and(|p| (h.empirical - p).abs() <= tolerance)
    }
}

pub const CSV_HEADER: [&str; 9] = ["d", "stratum", "empirical", "radius", "prediction", "B", "E", "seed", "samples"];

/// One row per stratum and degree.
pub fn write_csv<W: Write>(reports: &[DensityReport], writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for rep in reports {
        for s in &rep.strata {
            w.write_record([
                rep.d.to_string(),
                s.stratum.clone(),
                format!("{:.6}", s.empirical),
                format!("{:.6}", s.radius),
                s.prediction.map_or(String::new(), |p| format!("{p:.6}")),
                rep.b.to_string(),
                rep.e.to_string(),
                rep.seed.map_or(String::new(), |s| s.to_string()),
                rep.evaluated.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Default)]
struct Tally {
    evaluated: u64,
    zero: u64,
    p: u64,
    p_r: u64,
    q_med: u64,
    q_high: u64,
    q_v: u64,
    q: u64,
    chain_violations: u64,
    p_singular_off_z: u64,
    p_singular_dim_positive: u64,
    witnesses: Vec<(u64, FpVec, StrataFlags)>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.evaluated += other.evaluated;
        self.zero += other.zero;
        self.p += other.p;
        self.p_r += other.p_r;
        self.q_med += other.q_med;
        self.q_high += other.q_high;
        self.q_v += other.q_v;
        self.q += other.q;
        self.chain_violations += other.chain_violations;
        self.p_singular_off_z += other.p_singular_off_z;
        self.p_singular_dim_positive += other.p_singular_dim_positive;
        self.witnesses.extend(other.witnesses);
        self.witnesses.sort_by_key(|w| w.0);
        self.witnesses.truncate(MAX_WITNESSES);
        self
    }

    fn add(&mut self, ctx: &SieveContext, index: u64, x: FpVec, flags: StrataFlags) {
        self.evaluated += 1;
        self.zero += flags.zero as u64;
        self.p += flags.in_p as u64;
        self.p_r += flags.in_p_r as u64;
        self.q_med += flags.in_q_med as u64;
        self.q_high += flags.in_q_high as u64;
        self.q_v += flags.in_q_v as u64;
        self.q += flags.in_q as u64;
        if !flags.chain_holds(ctx.cfg.which) {
            self.chain_violations += 1;
        }
        if flags.in_p {
            if flags.singular.iter().any(|&i| !ctx.points[i].on_v) {
                self.p_singular_off_z += 1;
            }
            let counts = ctx.sing_counts(&flags, false);
            if !estimate_from_counts(&counts, ctx.cfg.u.q(), ctx.growth).at_most(0) {
                self.p_singular_dim_positive += 1;
            }
        }
        if !flags.in_p && self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push((index, x, flags));
        }
    }
}

/// Counts membership over all of `I_d` (exhaustive) or over a seeded uniform
/// sample of nonzero elements (Monte Carlo), next to the prediction.
pub fn estimate_density(cfg: &SieveConfig, d: u32, mode: Mode) -> Result<DensityReport, SieveError> {
    let prediction = theoretical_density(cfg, cfg.which)?;
    let ctx = SieveContext::new(cfg, d)?;
    estimate_with_context(&ctx, prediction, mode)
}

pub fn estimate_with_context(ctx: &SieveContext, prediction: Prediction, mode: Mode) -> Result<DensityReport, SieveError> {
    let cfg = &ctx.cfg;
    let p = ctx.basis.field().p();
    let len = ctx.coordinate_len();
    let tally = match mode {
        Mode::Exhaustive => {
            let total = (p as f64).powi(len as i32);
            if total > cfg.exhaustive_budget as f64 {
                return Err(SieveError::BudgetExceeded {
                    d: ctx.d,
                    size: format!("{p}^{len}"),
                    budget: cfg.exhaustive_budget,
                });
            }
            let total = total as u64;
            let chunks = total.div_ceil(CHUNK as u64);
            (0..chunks)
                .into_par_iter()
                .map(|chunk| -> Result<Tally, SieveError> {
                    let mut t = Tally::default();
                    for idx in chunk * CHUNK as u64..((chunk + 1) * CHUNK as u64).min(total) {
                        let x = FpVec::from_index(p, len, idx);
                        let flags = ctx.classify(&x)?;
                        t.add(ctx, idx, x, flags);
                    }
                    Ok(t)
                })
                .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?
        }
        Mode::MonteCarlo => {
            if cfg.samples == 0 {
                return Err(SieveError::Config("Monte-Carlo estimation needs a positive sample size".into()));
            }
            if len == 0 {
                return Err(SieveError::Config(format!("I_{} = 0 has no nonzero element to sample", ctx.d)));
            }
            let n = cfg.samples;
            let chunks = n.div_ceil(CHUNK);
            (0..chunks)
                .into_par_iter()
                .map(|chunk| -> Result<Tally, SieveError> {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(chunk as u64);
                    let mut t = Tally::default();
                    for idx in chunk * CHUNK..((chunk + 1) * CHUNK).min(n) {
                        let x = loop {
                            let x = FpVec::random(p, len, &mut rng);
                            if !x.is_zero() {
                                break x;
                            }
                        };
                        let flags = ctx.classify(&x)?;
                        t.add(ctx, idx as u64, x, flags);
                    }
                    Ok(t)
                })
                .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?
        }
    };
    Ok(build_report(ctx, prediction, mode, tally))
}

fn build_report(ctx: &SieveContext, prediction: Prediction, mode: Mode, tally: Tally) -> DensityReport {
    let cfg = &ctx.cfg;
    let n = tally.evaluated as f64;
    let radius = |count: u64| match mode {
        Mode::Exhaustive => 0.0,
        Mode::MonteCarlo => {
            let ph = count as f64 / n;
            1.96 * (ph * (1.0 - ph) / n).sqrt()
        }
    };
    let freq = |name: &str, count: u64, pred: Option<f64>| StratumFrequency {
        stratum: name.to_string(),
        count,
        empirical: count as f64 / n,
        radius: radius(count),
        prediction: pred,
    };
    let (p_pred, pr_pred) = match prediction.which {
        Which::LemmaLow => (None, Some(prediction.value)),
        _ => (Some(prediction.value), None),
    };
    let mut strata = vec![
        freq("P", tally.p, p_pred),
        freq("P_r", tally.p_r, pr_pred),
        freq("Q_med", tally.q_med, None),
        freq("Q_high", tally.q_high, None),
    ];
    match cfg.which {
        Which::Theorem2 => strata.push(freq("Q", tally.q, None)),
        _ => strata.push(freq("Q_V", tally.q_v, None)),
    }
    let mut notes = prediction.notes.clone();
    notes.push(format!(
        "membership in P is certified at closed points of degree <= {} only",
        cfg.b
    ));
    if tally.zero > 0 {
        notes.push("the zero polynomial was enumerated and counted outside P".into());
    }
    if matches!(mode, Mode::MonteCarlo) {
        notes.push("the zero polynomial is excluded from sampling".into());
    }
    let witnesses = tally
        .witnesses
        .iter()
        .map(|(index, x, flags)| {
            let mut failed = Vec::new();
            if flags.zero {
                failed.push("zero polynomial".to_string());
            }
            if !flags.restriction_ok {
                failed.push("f|_Y not in T".to_string());
            }
            if !flags.in_p_r {
                failed.push("singular at a low-degree point".to_string());
            }
            if flags.in_q_med {
                failed.push("singular at a medium-degree point".to_string());
            }
            if flags.in_q_high {
                failed.push("singular at a high-degree point".to_string());
            }
            if flags.in_q_v {
                failed.push("singular locus on V too large".to_string());
            }
            if flags.in_q || flags.singular_dim.is_some_and(|d| !d.at_most(cfg.k as i64)) {
                failed.push("singular locus too large".to_string());
            }
            Witness {
                index: *index,
                coordinates: x.to_digits(),
                polynomial: format!("{:?}", ctx.poly_of(x)),
                failed,
                singular_points: ctx.singular_points(flags),
            }
        })
        .collect();
    DensityReport {
        which: cfg.which,
        mode,
        d: ctx.d,
        c: ctx.c,
        dim_i_d: ctx.basis.dim(),
        q: cfg.u.q(),
        evaluated: tally.evaluated,
        samples: matches!(mode, Mode::MonteCarlo).then_some(cfg.samples),
        seed: matches!(mode, Mode::MonteCarlo).then_some(cfg.seed),
        b: cfg.b,
        e: cfg.e,
        r: cfg.r,
        m: cfg.m,
        k: cfg.k,
        windows: ctx.windows,
        strata,
        prediction,
        zero_polynomials: tally.zero,
        chain_violations: tally.chain_violations,
        p_singular_off_z: tally.p_singular_off_z,
        p_singular_dim_positive: tally.p_singular_dim_positive,
        notes,
        witnesses,
    }
}

/// Exact proportion of `I_d` in `P_r` by inclusion–exclusion over the
/// low-degree points off `V`: the share of `f` singular at every point of a
/// set `S` is `p^{−rank}` of the stacked jet maps. Exponential in the number
/// of low points; meant for small fixtures.
pub fn exact_p_r_fraction(ctx: &SieveContext) -> Option<BigRational> {
    if ctx.admissible.is_some() {
        return None;
    }
    let low: Vec<&PointData> = ctx
        .points
        .iter()
        .filter(|pd| !pd.on_v && pd.point.degree() < ctx.cfg.r)
        .collect();
    if low.len() > 16 {
        return None;
    }
    let p = num_bigint::BigInt::from(ctx.basis.field().p());
    let cols = ctx.coordinate_len();
    let mut acc = BigRational::from_integer(0.into());
    for mask in 0u32..(1 << low.len()) {
        let mut space = FpRowSpace::new(ctx.basis.field().p(), cols);
        for (i, pd) in low.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for r in pd.jets.rows() {
                    space.insert(r.clone());
                }
            }
        }
        let term = BigRational::new(num_bigint::BigInt::one(), num_traits::pow(p.clone(), space.rank()));
        if mask.count_ones() % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Some(acc)
}

pub fn fraction_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
