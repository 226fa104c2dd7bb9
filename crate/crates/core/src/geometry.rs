//! Points and closed points of `P^n` over `F_q`, schemes cut out by
//! homogeneous generators (optionally minus finitely many closed points),
//! point counts, Jacobian smoothness, and embedding-dimension strata.
//!
//! Points over `F_{q^e}` are normalized so the first nonzero coordinate is 1;
//! that coordinate also selects the standard affine chart used for every
//! Jacobian computation. A closed point is stored as the lexicographically
//! least member of its Frobenius orbit, with coordinates in `F_{q^deg}`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::arith::{checked_pow, divisors, prime_factors};
use crate::gf::{Elem, Field, GfError, Tower};
use crate::linalg;
use crate::poly::{univariate, Poly};
use crate::zeta::RationalZeta;

/// Default cap on `#P^n(F_{q^e})` for brute-force enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 26;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error(transparent)]
    Field(#[from] GfError),
    #[error("enumerating P^{n} over F_{q}^{e} exceeds the budget of {budget} points")]
    BudgetExceeded { n: usize, q: u64, e: u32, budget: u64 },
    #[error("generator {index} is not homogeneous")]
    NotHomogeneous { index: usize },
    #[error("polynomial has {found} variables, expected {expected}")]
    WrongArity { expected: usize, found: usize },
    #[error("point {0} does not lie on the scheme")]
    PointNotOnScheme(String),
    #[error("coordinates do not define a projective point: {0}")]
    InvalidPoint(String),
}

/// Dimension of a (finite-type) point set; `Empty` sits below every integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Dimension {
    Empty,
    Finite(u32),
}

impl Dimension {
    pub fn at_most(self, k: i64) -> bool {
        match self {
            Dimension::Empty => true,
            Dimension::Finite(d) => (d as i64) <= k,
        }
    }

    pub fn at_least(self, k: i64) -> bool {
        !self.at_most(k - 1)
    }

    pub fn as_option(self) -> Option<u32> {
        match self {
            Dimension::Empty => None,
            Dimension::Finite(d) => Some(d),
        }
    }
}

/// A point of `P^n` over some `F_{q^e}`, first nonzero coordinate equal to 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ProjPoint {
    coords: Vec<Elem>,
}

impl ProjPoint {
    /// Scales `coords` so the first nonzero entry is 1; `None` for the zero vector.
    pub fn normalize(field: &Field, coords: &[Elem]) -> Option<Self> {
        let lead = coords.iter().position(|c| c.0 != 0)?;
        let inv = field.inv(coords[lead]).unwrap();
        Some(ProjPoint {
            coords: coords.iter().map(|&c| field.mul(c, inv)).collect(),
        })
    }

    /// Wraps already-normalized coordinates.
    pub fn from_normalized(coords: Vec<Elem>) -> Self {
        debug_assert!(coords.iter().find(|c| c.0 != 0).is_some_and(|c| c.0 == 1));
        ProjPoint { coords }
    }

    pub fn coords(&self) -> &[Elem] {
        &self.coords
    }

    /// Index of the first nonzero coordinate: the affine chart `x_j = 1`.
    pub fn chart(&self) -> usize {
        self.coords.iter().position(|c| c.0 != 0).unwrap()
    }

    /// Coordinatewise `q`-power Frobenius (keeps the normalization).
    pub fn frobenius(&self, field: &Field) -> Self {
        ProjPoint {
            coords: self.coords.iter().map(|&c| field.frobenius_q(c)).collect(),
        }
    }

    /// The full Frobenius orbit, starting with `self`.
    pub fn orbit(&self, field: &Field) -> Vec<ProjPoint> {
        let mut out = vec![self.clone()];
        loop {
            let next = out.last().unwrap().frobenius(field);
            if &next == self {
                return out;
            }
            out.push(next);
        }
    }
}

/// A closed point: a Frobenius orbit, stored as its least member over `F_{q^degree}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ClosedPoint {
    degree: u32,
    rep: ProjPoint,
}

impl Ord for ClosedPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.degree, &self.rep).cmp(&(other.degree, &other.rep))
    }
}

impl PartialOrd for ClosedPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl ClosedPoint {
    /// The closed point through the given coordinates over `F_{q^e}`. The result
    /// may have smaller degree than `e` when the coordinates lie in a subfield.
    pub fn from_coords(tower: &Tower, e: u32, coords: &[Elem]) -> Result<Self, GeomError> {
        let field = tower.field(e)?;
        if coords.iter().any(|&c| !field.contains(c)) {
            return Err(GeomError::InvalidPoint(format!("{coords:?} not in F_q^{e}")));
        }
        let pt = ProjPoint::normalize(&field, coords)
            .ok_or_else(|| GeomError::InvalidPoint("all coordinates vanish".into()))?;
        let degree = pt.orbit(&field).len() as u32;
        let pt = if degree < e {
            let emb = tower.embedding(degree, e)?;
            let pulled: Option<Vec<Elem>> = pt.coords.iter().map(|&c| emb.preimage(c)).collect();
            ProjPoint::from_normalized(pulled.expect("orbit length certifies the subfield"))
        } else {
            pt
        };
        let small = tower.field(degree)?;
        let rep = pt.orbit(&small).into_iter().min().unwrap();
        Ok(ClosedPoint { degree, rep })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn rep(&self) -> &ProjPoint {
        &self.rep
    }

    pub fn coords(&self) -> &[Elem] {
        &self.rep.coords
    }

    /// All orbit members over `F_{q^e}`, for `degree | e`.
    pub fn points_over(&self, tower: &Tower, e: u32) -> Result<Vec<ProjPoint>, GeomError> {
        let emb = tower.embedding(self.degree, e)?;
        let field = tower.field(e)?;
        let image = ProjPoint::from_normalized(self.rep.coords.iter().map(|&c| emb.apply(c)).collect());
        Ok(image.orbit(&field))
    }

    pub fn label(&self) -> String {
        let c: Vec<String> = self.rep.coords.iter().map(|c| c.0.to_string()).collect();
        format!("deg {} [{}]", self.degree, c.join(":"))
    }
}

/// Normalized points of `P^n(F)`, grouped by chart and counted in base `|F|`.
pub fn projective_points(field: &Field, n: usize) -> impl Iterator<Item = ProjPoint> + '_ {
    let size = field.size() as u64;
    (0..=n).flat_map(move |lead| {
        let free = n - lead;
        let count = size.pow(free as u32);
        (0..count).map(move |mut k| {
            let mut coords = vec![Elem(0); n + 1];
            coords[lead] = Elem(1);
            for i in (lead + 1..=n).rev() {
                coords[i] = Elem((k % size) as u32);
                k /= size;
            }
            ProjPoint { coords }
        })
    })
}

/// A closed subscheme of `P^n` cut out by homogeneous generators over `F_q`,
/// minus a finite set of closed points.
#[derive(Clone, Debug)]
pub struct Scheme {
    tower: Arc<Tower>,
    n: usize,
    generators: Vec<Poly>,
    removed: Vec<ClosedPoint>,
    assume_saturated: bool,
    assume_reduced: bool,
    closed_form: Option<RationalZeta>,
    budget: u64,
}

impl Scheme {
    pub fn new(tower: Arc<Tower>, n: usize, generators: Vec<Poly>) -> Result<Self, GeomError> {
        for (index, g) in generators.iter().enumerate() {
            if g.nvars() != n + 1 {
                return Err(GeomError::WrongArity { expected: n + 1, found: g.nvars() });
            }
            if !g.is_homogeneous() {
                return Err(GeomError::NotHomogeneous { index });
            }
        }
        Ok(Scheme {
            tower,
            n,
            generators: generators.into_iter().filter(|g| !g.is_zero()).collect(),
            removed: Vec::new(),
            assume_saturated: true,
            assume_reduced: true,
            closed_form: None,
            budget: DEFAULT_ENUMERATION_BUDGET,
        })
    }

    pub fn projective_space(tower: Arc<Tower>, n: usize) -> Self {
        let q = tower.q();
        Scheme::new(tower, n, Vec::new())
            .expect("no generators")
            .with_closed_form(RationalZeta::projective_space(q, n))
    }

    /// The empty subscheme, presented by the unit ideal.
    pub fn empty(tower: Arc<Tower>, n: usize) -> Self {
        let one = Poly::constant(n + 1, Elem(1));
        let q = tower.q();
        Scheme::new(tower, n, vec![one])
            .expect("constant is homogeneous")
            .with_closed_form(RationalZeta::empty(q))
    }

    /// Removes closed points; each must lie on the vanishing locus.
    pub fn with_removed(mut self, points: Vec<ClosedPoint>) -> Result<Self, GeomError> {
        for p in points {
            if !self.on_locus(&p)? {
                return Err(GeomError::PointNotOnScheme(p.label()));
            }
            if !self.removed.contains(&p) {
                self.removed.push(p);
            }
        }
        self.removed.sort();
        Ok(self)
    }

    pub fn with_closed_form(mut self, zeta: RationalZeta) -> Self {
        self.closed_form = Some(zeta);
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_flags(mut self, assume_saturated: bool, assume_reduced: bool) -> Self {
        self.assume_saturated = assume_saturated;
        self.assume_reduced = assume_reduced;
        self
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.tower.q()
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    pub fn removed(&self) -> &[ClosedPoint] {
        &self.removed
    }

    pub fn assume_saturated(&self) -> bool {
        self.assume_saturated
    }

    pub fn assume_reduced(&self) -> bool {
        self.assume_reduced
    }

    pub fn closed_form(&self) -> Option<&RationalZeta> {
        self.closed_form.as_ref()
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Scheme-theoretic intersection of the closed parts; removed points of
    /// either side that survive on the intersection stay removed.
    pub fn intersect(&self, other: &Scheme) -> Result<Scheme, GeomError> {
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        let mut base = Scheme::new(self.tower.clone(), self.n, gens)?
            .with_flags(false, self.assume_reduced && other.assume_reduced)
            .with_budget(self.budget.min(other.budget));
        // Intersecting with (an open part of) P^n leaves the closed part unchanged.
        if self.generators.is_empty() {
            base.closed_form = other.closed_form.clone();
            base.assume_saturated = other.assume_saturated;
        } else if other.generators.is_empty() {
            base.closed_form = self.closed_form.clone();
            base.assume_saturated = self.assume_saturated;
        }
        let mut keep = Vec::new();
        for p in self.removed.iter().chain(&other.removed) {
            if base.on_locus(p)? {
                keep.push(p.clone());
            }
        }
        base.with_removed(keep)
    }

    /// The closed part (generators only, nothing removed).
    pub fn closure(&self) -> Scheme {
        Scheme { removed: Vec::new(), ..self.clone() }
    }

    fn check_budget(&self, e: u32) -> Result<(), GeomError> {
        let q = self.q();
        // #P^n(F_{q^e}) = 1 + q^e + .. + q^{ne}
        let over = checked_pow(q, e)
            .and_then(|qe| (0..=self.n as u32).try_fold(0u64, |acc, i| acc.checked_add(checked_pow(qe, i)?)))
            .is_none_or(|total| total > self.budget);
        if over {
            return Err(GeomError::BudgetExceeded { n: self.n, q, e, budget: self.budget });
        }
        Ok(())
    }

    /// Generators and removed points realized over `F_{q^e}`.
    pub fn view(&self, e: u32) -> Result<LocusView, GeomError> {
        let field = self.tower.field(e)?;
        let emb = self.tower.embedding(1, e)?;
        let generators: Vec<Poly> = self.generators.iter().map(|g| g.embed(&emb)).collect();
        let mut removed = HashSet::new();
        for r in self.removed.iter().filter(|r| e.is_multiple_of(r.degree)) {
            removed.extend(r.points_over(&self.tower, e)?);
        }
        Ok(LocusView { field, generators, removed })
    }

    /// Whether the closed point lies on the vanishing locus (ignoring removals).
    pub fn on_locus(&self, p: &ClosedPoint) -> Result<bool, GeomError> {
        let field = self.tower.field(p.degree)?;
        let emb = self.tower.embedding(1, p.degree)?;
        Ok(self
            .generators
            .iter()
            .all(|g| g.embed(&emb).eval(&field, p.coords()) == field.zero()))
    }

    pub fn contains(&self, p: &ClosedPoint) -> Result<bool, GeomError> {
        Ok(!self.removed.contains(p) && self.on_locus(p)?)
    }

    /// `#S(F_{q^e})`: rational points of the locus minus removed points.
    pub fn count_points(&self, e: u32) -> Result<u128, GeomError> {
        if let Some(z) = &self.closed_form {
            let total = z.point_count(e);
            let removed: i128 = self
                .removed
                .iter()
                .filter(|r| e.is_multiple_of(r.degree))
                .map(|r| r.degree as i128)
                .sum();
            return Ok((total - removed).max(0) as u128);
        }
        self.enumerate_count(e)
    }

    /// Brute-force count, ignoring any registered closed form.
    pub fn enumerate_count(&self, e: u32) -> Result<u128, GeomError> {
        self.check_budget(e)?;
        let view = self.view(e)?;
        Ok(projective_points(&view.field, self.n)
            .filter(|pt| view.contains(pt))
            .count() as u128)
    }

    /// All closed points of exactly the given degree, in canonical order.
    pub fn closed_points(&self, degree: u32) -> Result<Vec<ClosedPoint>, GeomError> {
        self.check_budget(degree)?;
        let view = self.view(degree)?;
        let field = &view.field;
        let proper: Vec<u32> = prime_factors(degree as u64)
            .into_iter()
            .map(|r| degree / r as u32)
            .collect();
        let mut out = Vec::new();
        for pt in projective_points(field, self.n) {
            if !view.contains(&pt) {
                continue;
            }
            let exact = proper.iter().all(|&k| {
                pt.coords
                    .iter()
                    .any(|&c| field.frobenius_q_iter(c, k) != c)
            });
            if !exact {
                continue;
            }
            let orbit = pt.orbit(field);
            if orbit.iter().skip(1).all(|o| pt < *o) {
                out.push(ClosedPoint { degree, rep: pt });
            }
        }
        out.sort();
        Ok(out)
    }

    /// Closed points of every degree in `1..=max_degree`.
    pub fn closed_points_up_to(&self, max_degree: u32) -> Result<Vec<ClosedPoint>, GeomError> {
        let mut out = Vec::new();
        for d in 1..=max_degree {
            out.extend(self.closed_points(d)?);
        }
        Ok(out)
    }

    /// Jacobian of the generators at `p` in the chart `x_j = 1` of its
    /// representative: one row per generator, columns `x_i` for `i != j`.
    pub fn affine_jacobian(&self, p: &ClosedPoint) -> Result<Vec<Vec<Elem>>, GeomError> {
        let field = self.tower.field(p.degree)?;
        let emb = self.tower.embedding(1, p.degree)?;
        let base = self.tower.base();
        let j = p.rep.chart();
        Ok(self
            .generators
            .iter()
            .map(|g| {
                (0..=self.n)
                    .filter(|&i| i != j)
                    .map(|i| g.partial(i, &base).embed(&emb).eval(&field, p.coords()))
                    .collect()
            })
            .collect())
    }

    /// Basis of the Zariski tangent space at `p` in the affine chart of `p`.
    pub fn tangent_space(&self, p: &ClosedPoint) -> Result<Vec<Vec<Elem>>, GeomError> {
        let field = self.tower.field(p.degree)?;
        Ok(linalg::kernel(&field, &self.affine_jacobian(p)?, self.n))
    }

    fn require_point(&self, p: &ClosedPoint) -> Result<(), GeomError> {
        if self.contains(p)? {
            Ok(())
        } else {
            Err(GeomError::PointNotOnScheme(p.label()))
        }
    }

    /// Whether `H_f ∩ self` is smooth of codimension one at `p`, where `self`
    /// is assumed smooth at `p`: false iff `f(p) = 0` and the chart gradient of
    /// `f` lies in the row space of the Jacobian of the generators.
    pub fn is_smooth_section_at(&self, f: &Poly, p: &ClosedPoint) -> Result<bool, GeomError> {
        self.require_point(p)?;
        if f.nvars() != self.n + 1 {
            return Err(GeomError::WrongArity { expected: self.n + 1, found: f.nvars() });
        }
        let field = self.tower.field(p.degree)?;
        let emb = self.tower.embedding(1, p.degree)?;
        let base = self.tower.base();
        if f.embed(&emb).eval(&field, p.coords()) != field.zero() {
            return Ok(true);
        }
        let j = p.rep.chart();
        let grad: Vec<Elem> = (0..=self.n)
            .filter(|&i| i != j)
            .map(|i| f.partial(i, &base).embed(&emb).eval(&field, p.coords()))
            .collect();
        let jac = self.affine_jacobian(p)?;
        Ok(!linalg::in_row_space(&field, &jac, &grad))
    }

    /// Heuristic smoothness certificate: the Jacobian has rank `n - m` at
    /// every closed point of degree at most `degree_bound`.
    pub fn verify_smooth_of_dim(&self, m: usize, degree_bound: u32) -> Result<bool, GeomError> {
        Ok(self.first_non_smooth_point(m, degree_bound)?.is_none())
    }

    pub fn first_non_smooth_point(
        &self,
        m: usize,
        degree_bound: u32,
    ) -> Result<Option<ClosedPoint>, GeomError> {
        if m > self.n {
            return Ok(self.closed_points_up_to(degree_bound)?.into_iter().next());
        }
        for d in 1..=degree_bound {
            let field = self.tower.field(d)?;
            for p in self.closed_points(d)? {
                if linalg::rank(&field, &self.affine_jacobian(&p)?) != self.n - m {
                    return Ok(Some(p));
                }
            }
        }
        Ok(None)
    }

    /// `n - rank(Jacobian)` at `p`: the dimension of the fibre of `Ω¹` at `p`.
    pub fn embedding_dimension(&self, p: &ClosedPoint) -> Result<usize, GeomError> {
        self.require_point(p)?;
        let field = self.tower.field(p.degree)?;
        Ok(self.n - linalg::rank(&field, &self.affine_jacobian(p)?))
    }

    /// Product of the `n` smallest generator degrees (at least 1): a Bézout-style
    /// size for the growth constant of dimension estimates.
    pub fn degree_data(&self) -> f64 {
        let mut degs: Vec<u32> = self.generators.iter().filter_map(Poly::degree).collect();
        degs.sort_unstable();
        degs.iter().take(self.n).map(|&d| d.max(1) as f64).product::<f64>().max(1.0)
    }

    pub fn default_growth_constant(&self) -> f64 {
        4.0 * self.degree_data()
    }

    /// Growth-based dimension estimate from `N_1, .., N_{ext_bound}`; see
    /// [`estimate_from_counts`].
    pub fn estimate_dimension(
        &self,
        ext_bound: u32,
        growth_constant: Option<f64>,
    ) -> Result<Dimension, GeomError> {
        let counts = (1..=ext_bound)
            .map(|e| self.count_points(e))
            .collect::<Result<Vec<_>, _>>()?;
        let c = growth_constant.unwrap_or_else(|| self.default_growth_constant());
        Ok(estimate_from_counts(&counts, self.q(), c))
    }

    /// Partitions the closed points of degree `<= degree_bound` by embedding
    /// dimension and estimates each stratum's dimension from its point counts
    /// over `F_{q^e}`, `e <= ext_bound`.
    pub fn stratify_by_embedding_dim(
        &self,
        degree_bound: u32,
        ext_bound: u32,
    ) -> Result<StrataDecomposition, GeomError> {
        let points = self.closed_points_up_to(degree_bound.max(ext_bound))?;
        let mut by_dim: BTreeMap<usize, Vec<ClosedPoint>> = BTreeMap::new();
        for p in points {
            let e = self.embedding_dimension(&p)?;
            by_dim.entry(e).or_default().push(p);
        }
        let c = self.default_growth_constant();
        let strata = by_dim
            .into_iter()
            .map(|(e, pts)| {
                let counts = counts_from_closed_points(&pts, ext_bound);
                let dimension = estimate_from_counts(&counts, self.q(), c);
                let points = pts.into_iter().filter(|p| p.degree <= degree_bound).collect();
                (e, Stratum { points, dimension })
            })
            .collect();
        Ok(StrataDecomposition { strata })
    }
}

/// Whether the singular locus `V(f, ∂_0 f, ∂_1 f, ∂_2 f)` of the plane curve
/// `f = 0` is finite, i.e. whether `f` is squarefree. Exact: a curve in the
/// singular locus meets every line, while a finite singular locus of a
/// reduced curve has at most `d(d−1)/2` points and so misses some line over
/// `F_{q^K}` once `q^K >= d(d−1)/2`. Lines are tried over `F_q` first.
pub fn plane_curve_singular_locus_is_finite(tower: &Tower, f: &Poly) -> Result<bool, GeomError> {
    assert_eq!(f.nvars(), 3, "plane curves live in P^2");
    let Some(d) = f.degree() else { return Ok(false) };
    if d <= 1 {
        return Ok(true);
    }
    let base = tower.base();
    let partials: Vec<Poly> = (0..3).map(|i| f.partial(i, &base)).collect();
    let bound = (d as u64 * (d as u64 - 1) / 2).max(2);
    let mut k_max = 1;
    while checked_pow(tower.q(), k_max).is_some_and(|qk| qk < bound) {
        k_max += 1;
    }
    let mut levels = vec![1];
    if k_max > 1 {
        levels.push(k_max);
    }
    for k in levels {
        let field = tower.field(k)?;
        let emb = tower.embedding(1, k)?;
        let forms: Vec<Poly> = std::iter::once(f)
            .chain(&partials)
            .map(|g| g.embed(&emb))
            .collect();
        for line in projective_points(&field, 2) {
            if line_misses_common_zeros(&field, &forms, line.coords()) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn line_misses_common_zeros(field: &Field, forms: &[Poly], line: &[Elem]) -> bool {
    let span = linalg::kernel(field, &[line.to_vec()], 3);
    let (a, b) = (&span[0], &span[1]);
    // The point at s = ∞ of s·A + B.
    if forms.iter().all(|g| g.eval(field, a) == field.zero()) {
        return false;
    }
    let max_deg = forms.iter().filter_map(Poly::degree).max().unwrap_or(0) as usize;
    let linear: Vec<Vec<Elem>> = (0..3).map(|i| vec![b[i], a[i]]).collect();
    let powers: Vec<Vec<Vec<Elem>>> = linear
        .iter()
        .map(|l| {
            let mut out = vec![vec![field.one()]];
            for e in 1..=max_deg {
                out.push(univariate::mul(field, &out[e - 1], l));
            }
            out
        })
        .collect();
    let mut g = Vec::new();
    for form in forms {
        let mut acc: Vec<Elem> = vec![field.zero(); max_deg + 1];
        for (m, &c) in form.terms() {
            let t = univariate::mul(field, &powers[0][m[0] as usize], &powers[1][m[1] as usize]);
            let t = univariate::mul(field, &t, &powers[2][m[2] as usize]);
            for (o, &x) in acc.iter_mut().zip(&t) {
                *o = field.add(*o, field.mul(c, x));
            }
        }
        univariate::trim(&mut acc);
        g = univariate::gcd(field, &g, &acc);
        if univariate::degree(&g) == Some(0) {
            return true;
        }
    }
    false
}

/// Generators and removed points of a scheme, realized over one extension.
pub struct LocusView {
    pub field: Arc<Field>,
    generators: Vec<Poly>,
    removed: HashSet<ProjPoint>,
}

impl LocusView {
    pub fn on_locus(&self, pt: &ProjPoint) -> bool {
        self.generators
            .iter()
            .all(|g| g.eval(&self.field, &pt.coords) == self.field.zero())
    }

    pub fn contains(&self, pt: &ProjPoint) -> bool {
        self.on_locus(pt) && !self.removed.contains(pt)
    }
}

/// `N_e = Σ_{d | e} d · #{points of degree d}` for `e = 1..=ext_bound`.
pub fn counts_from_closed_points(points: &[ClosedPoint], ext_bound: u32) -> Vec<u128> {
    (1..=ext_bound)
        .map(|e| {
            points
                .iter()
                .filter(|p| e % p.degree == 0)
                .map(|p| p.degree as u128)
                .sum()
        })
        .collect()
}

/// Closed-point counts `a_e` from `N_1, .., N_E` by Möbius inversion.
pub fn closed_point_counts(counts: &[u128]) -> Vec<u128> {
    (1..=counts.len() as u64)
        .map(|e| {
            let s: i128 = divisors(e)
                .into_iter()
                .map(|d| crate::arith::mobius(e / d) as i128 * counts[d as usize - 1] as i128)
                .sum();
            debug_assert!(s >= 0 && s % e as i128 == 0);
            (s / e as i128) as u128
        })
        .collect()
}

/// Least `D >= 0` with `N_e <= c · q^{D e}` for every measured `e`, or `Empty`
/// when every count vanishes. A heuristic: exact for finite sets whose size
/// stays below `c`, and for positive-dimensional sets once `q^e` outgrows `c`.
pub fn estimate_from_counts(counts: &[u128], q: u64, c: f64) -> Dimension {
    if counts.iter().all(|&n| n == 0) {
        return Dimension::Empty;
    }
    let fits = |d: u32| {
        counts
            .iter()
            .enumerate()
            .all(|(i, &n)| (n as f64) <= c * (q as f64).powf((d as u64 * (i as u64 + 1)) as f64))
    };
    (0..).find(|&d| fits(d)).map(Dimension::Finite).unwrap()
}

#[derive(Clone, Debug, Serialize)]
pub struct Stratum {
    pub points: Vec<ClosedPoint>,
    pub dimension: Dimension,
}

/// Closed points of a scheme grouped by embedding dimension.
#[derive(Clone, Debug, Serialize)]
pub struct StrataDecomposition {
    pub strata: BTreeMap<usize, Stratum>,
}

impl StrataDecomposition {
    /// `max{e + dim V_e}`; `None` stands for the empty maximum.
    pub fn max_e_plus_dim(&self) -> Option<i64> {
        self.strata
            .iter()
            .filter_map(|(&e, s)| s.dimension.as_option().map(|l| e as i64 + l as i64))
            .max()
    }
}
