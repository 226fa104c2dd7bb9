//! Graded pieces `I_d` of the ideal of a closed subscheme `Z`, the constant
//! `c` with `S_1 I_d = I_{d+1}` for `d >= c`, the restriction `f ↦ f|_Y` to a
//! finite set of closed points, and first-order jets at a closed point.
//!
//! A value in `κ(P) = F_{q^δ}` is turned into `δ` coordinates over `F_q` by
//! `y ↦ (Tr(θ^j y))_{j<δ}` with `θ` a primitive element; the trace form is
//! nondegenerate, so `y = 0` iff all coordinates vanish and `F_q`-linear maps
//! into `κ(P)` become ordinary matrices over `F_q`.

use std::collections::BTreeSet;
use std::io::Write;
use std::sync::Arc;

use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{ClosedPoint, GeomError, Scheme};
use crate::gf::{Elem, Field, GfError, Tower};
use crate::linalg::{self, FpVec};
use crate::poly::{monomial_label, monomials, Monomial, Poly, PowerTable};

#[derive(Debug, Error)]
pub enum IdealError {
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error("generator multiples and point evaluation disagree in degree {d} ({multiples} vs {evaluation}); the presentation is probably not saturated")]
    MethodsDisagree { d: u32, multiples: usize, evaluation: usize },
    #[error("S_1 I_d = I_(d+1) fails at d = {d_max}; no c <= {d_max}")]
    NoStableDegree { d_max: u32 },
    #[error("degree {d} is below the certified degree c = {c}")]
    BelowCertification { d: u32, c: u32 },
    #[error("closed point {0} of Y lies on Z")]
    YMeetsZ(String),
    #[error("local condition tuple {0:?} does not match the components of Y")]
    BadTuple(Vec<u32>),
    #[error("{0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GeneratorMultiples,
    PointEvaluation,
}

/// A basis of `I_d` (rows in reduced echelon form) against the degree-`d`
/// monomials in graded lex order.
#[derive(Clone, Debug, Serialize)]
pub struct GradedBasis {
    pub d: u32,
    pub n: usize,
    pub method: Method,
    #[serde(skip)]
    field: Arc<Field>,
    #[serde(skip)]
    monomials: Vec<Monomial>,
    #[serde(serialize_with = "serialize_rows")]
    basis: Vec<Vec<Elem>>,
    /// Closed points whose vanishing was imposed (point evaluation only).
    pub evaluation_points: Vec<ClosedPoint>,
    /// Number of products `m·g_i` spanned (generator multiples only).
    pub generator_multiples: usize,
}

fn serialize_rows<S: serde::Serializer>(rows: &[Vec<Elem>], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(rows.len()))?;
    for r in rows {
        seq.serialize_element(&r.iter().map(|e| e.0).collect::<Vec<_>>())?;
    }
    seq.end()
}

impl GradedBasis {
    fn from_rows(field: Arc<Field>, n: usize, d: u32, method: Method, mut rows: Vec<Vec<Elem>>) -> Self {
        linalg::rref(&field, &mut rows);
        GradedBasis {
            d,
            n,
            method,
            monomials: monomials(n + 1, d),
            field,
            basis: rows,
            evaluation_points: Vec::new(),
            generator_multiples: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn rows(&self) -> &[Vec<Elem>] {
        &self.basis
    }

    pub fn basis_polys(&self) -> Vec<Poly> {
        self.basis.iter().map(|r| self.poly_of_row(r)).collect()
    }

    pub fn poly_of_row(&self, row: &[Elem]) -> Poly {
        Poly::from_coefficients(self.n + 1, &self.field, &self.monomials, row)
    }

    /// Monomial coefficients of `Σ λ_i b_i`.
    pub fn combine(&self, coords: &[Elem]) -> Vec<Elem> {
        assert_eq!(coords.len(), self.dim());
        let f = &self.field;
        let mut out = vec![f.zero(); self.monomials.len()];
        for (row, &c) in self.basis.iter().zip(coords) {
            if c == f.zero() {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(row) {
                *o = f.add(*o, f.mul(c, x));
            }
        }
        out
    }

    pub fn poly(&self, coords: &[Elem]) -> Poly {
        self.poly_of_row(&self.combine(coords))
    }

    /// Coefficient vector of `f` against the monomials of degree `d`.
    pub fn coefficients_of(&self, f: &Poly) -> Vec<Elem> {
        self.monomials.iter().map(|m| f.coeff(m)).collect()
    }

    pub fn contains(&self, f: &Poly) -> bool {
        if f.is_zero() {
            return true;
        }
        f.is_homogeneous()
            && f.degree() == Some(self.d)
            && linalg::in_row_space(&self.field, &self.basis, &self.coefficients_of(f))
    }

    pub fn same_span(&self, other: &GradedBasis) -> bool {
        self.d == other.d && self.n == other.n && self.basis == other.basis
    }

    /// `S_1 · I_d` inside `S_{d+1}`.
    pub fn times_linear_forms(&self) -> GradedBasis {
        let nvars = self.n + 1;
        let rows: Vec<Vec<Elem>> = self
            .basis_polys()
            .iter()
            .flat_map(|b| (0..nvars).map(move |i| b.mul_monomial(&unit(nvars, i))))
            .map(|p| {
                monomials(nvars, self.d + 1)
                    .iter()
                    .map(|m| p.coeff(m))
                    .collect()
            })
            .collect();
        GradedBasis::from_rows(self.field.clone(), self.n, self.d + 1, self.method, rows)
    }

    /// One row per basis vector, one column per monomial (graded lex order).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), IdealError> {
        let mut w = csv::Writer::from_writer(writer);
        let header: Vec<String> = self.monomials.iter().map(|m| monomial_label(m)).collect();
        w.write_record(&header)?;
        for row in &self.basis {
            w.write_record(row.iter().map(|e| e.0.to_string()))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn unit(nvars: usize, i: usize) -> Vec<u32> {
    let mut m = vec![0; nvars];
    m[i] = 1;
    m
}

/// `I_d` by the chosen method. Point evaluation imposes vanishing at every
/// closed point of `Z` of degree `<= d + 1`.
pub fn graded_piece(z: &Scheme, d: u32, method: Method) -> Result<GradedBasis, IdealError> {
    match method {
        Method::GeneratorMultiples => Ok(by_generator_multiples(z, d)),
        Method::PointEvaluation => by_point_evaluation(z, d, d + 1),
    }
}

/// Generator multiples when `Z` is flagged saturated, else point evaluation.
pub fn graded_piece_auto(z: &Scheme, d: u32) -> Result<GradedBasis, IdealError> {
    if z.assume_saturated() {
        graded_piece(z, d, Method::GeneratorMultiples)
    } else {
        graded_piece(z, d, Method::PointEvaluation)
    }
}

/// Both methods, with disagreement reported as a fixture error.
pub fn graded_piece_checked(z: &Scheme, d: u32) -> Result<GradedBasis, IdealError> {
    let a = graded_piece(z, d, Method::GeneratorMultiples)?;
    let b = graded_piece(z, d, Method::PointEvaluation)?;
    if !a.same_span(&b) {
        return Err(IdealError::MethodsDisagree { d, multiples: a.dim(), evaluation: b.dim() });
    }
    Ok(a)
}

fn by_generator_multiples(z: &Scheme, d: u32) -> GradedBasis {
    let base = z.tower().base();
    let nvars = z.n() + 1;
    let target = monomials(nvars, d);
    let mut rows = Vec::new();
    for g in z.generators() {
        let Some(dg) = g.degree() else { continue };
        if dg > d {
            continue;
        }
        for m in monomials(nvars, d - dg) {
            let prod = g.mul_monomial(&m);
            rows.push(target.iter().map(|t| prod.coeff(t)).collect());
        }
    }
    let count = rows.len();
    let mut basis = GradedBasis::from_rows(base, z.n(), d, Method::GeneratorMultiples, rows);
    basis.generator_multiples = count;
    basis
}

pub fn by_point_evaluation(z: &Scheme, d: u32, bound: u32) -> Result<GradedBasis, IdealError> {
    let tower = z.tower();
    let base = tower.base();
    let nvars = z.n() + 1;
    let mons = monomials(nvars, d);
    let closure = z.closure();
    let points = closure.closed_points_up_to(bound)?;
    let mut conditions: Vec<Vec<Elem>> = Vec::new();
    for p in &points {
        let field = tower.field(p.degree())?;
        let table = PowerTable::new(&field, p.coords(), d);
        let values: Vec<Elem> = mons.iter().map(|m| table.monomial(&field, m)).collect();
        conditions.extend(trace_rows(tower, p.degree(), &values)?);
        // Keep the system small: the rank never exceeds the number of monomials.
        if conditions.len() > 4 * mons.len() {
            linalg::rref(&base, &mut conditions);
        }
    }
    let kernel = linalg::kernel(&base, &conditions, mons.len());
    let mut basis = GradedBasis::from_rows(base, z.n(), d, Method::PointEvaluation, kernel);
    basis.evaluation_points = points;
    Ok(basis)
}

/// For `values[i] ∈ F_{q^δ}`, the `δ` rows `(Tr(θ^j values[i]))_i` over `F_q`.
/// The map `c ↦ Σ c_i values[i]` on `F_q^N` vanishes exactly on their common kernel.
pub fn trace_rows(tower: &Tower, delta: u32, values: &[Elem]) -> Result<Vec<Vec<Elem>>, GfError> {
    let field = tower.field(delta)?;
    let emb = tower.embedding(1, delta)?;
    let theta = field.primitive_element();
    let mut scale = field.one();
    let mut rows = Vec::with_capacity(delta as usize);
    for _ in 0..delta {
        rows.push(
            values
                .iter()
                .map(|&v| {
                    let t = trace(&field, field.mul(scale, v));
                    emb.preimage(t).expect("traces lie in F_q")
                })
                .collect(),
        );
        scale = field.mul(scale, theta);
    }
    Ok(rows)
}

/// Trace coordinates of a single element of `F_{q^δ}`.
pub fn trace_coordinates(tower: &Tower, delta: u32, y: Elem) -> Result<Vec<Elem>, GfError> {
    Ok(trace_rows(tower, delta, &[y])?.into_iter().map(|r| r[0]).collect())
}

fn trace(field: &Field, y: Elem) -> Elem {
    let mut acc = field.zero();
    let mut z = y;
    for _ in 0..field.ext() {
        acc = field.add(acc, z);
        z = field.frobenius_q(z);
    }
    acc
}

/// Rewrites `F_q`-linear functionals on `F_q^N` as `F_p`-linear functionals on
/// the digit vectors (layout: coordinate `i`, digit `t` at index `i·a + t`).
/// Functional `r` becomes `a` rows, the `k`-th computing digit `k` of its value.
pub fn fq_rows_to_fp(base: &Field, rows: &[Vec<Elem>]) -> Vec<FpVec> {
    let a = base.a() as usize;
    let p = base.p();
    let units: Vec<Elem> = (0..a)
        .map(|t| {
            let mut d = vec![0; a];
            d[t] = 1;
            base.from_digits(&d)
        })
        .collect();
    let mut out = Vec::with_capacity(rows.len() * a);
    for row in rows {
        let n = row.len();
        let mut digit_rows = vec![FpVec::zeros(p, n * a); a];
        for (i, &phi) in row.iter().enumerate() {
            for (t, &u) in units.iter().enumerate() {
                for (k, &dk) in base.digits(base.mul(phi, u)).iter().enumerate() {
                    if dk != 0 {
                        digit_rows[k].set(i * a + t, dk);
                    }
                }
            }
        }
        out.extend(digit_rows);
    }
    out
}

pub fn fq_to_fp(base: &Field, coords: &[Elem]) -> FpVec {
    let digits: Vec<u32> = coords.iter().flat_map(|&c| base.digits(c)).collect();
    FpVec::from_digits(base.p(), &digits)
}

pub fn fp_to_fq(base: &Field, v: &FpVec) -> Vec<Elem> {
    let a = base.a() as usize;
    v.to_digits().chunks(a).map(|c| base.from_digits(c)).collect()
}

/// The least `c <= d_max` with `S_1 I_d = I_{d+1}` for every `c <= d <= d_max`.
pub fn find_c(z: &Scheme, d_max: u32) -> Result<u32, IdealError> {
    let pieces: Vec<GradedBasis> = (0..=d_max + 1)
        .map(|d| graded_piece_auto(z, d))
        .collect::<Result<_, _>>()?;
    let mut c = None;
    for d in (0..=d_max).rev() {
        let grown = pieces[d as usize].times_linear_forms();
        if grown.dim() == pieces[d as usize + 1].dim() {
            c = Some(d);
        } else {
            break;
        }
    }
    c.ok_or(IdealError::NoStableDegree { d_max })
}

/// Which restricted values `f|_Y` are admissible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Admissible {
    All,
    Listed(BTreeSet<Vec<Elem>>),
}

/// A finite reduced set `Y` of closed points with admissible values `T`.
/// `f|_Y` evaluates `x_j^{-d} f` at each component, `j` the first coordinate
/// that is nonzero there; at the normalized representative `x_j = 1`, so this
/// is `f` evaluated at the representative.
#[derive(Clone, Debug)]
pub struct LocalConditions {
    points: Vec<ClosedPoint>,
    admissible: Admissible,
    q: u64,
}

impl LocalConditions {
    pub fn none(q: u64) -> Self {
        LocalConditions { points: Vec::new(), admissible: Admissible::All, q }
    }

    pub fn new(tower: &Tower, points: Vec<ClosedPoint>, admissible: Admissible) -> Result<Self, IdealError> {
        if let Admissible::Listed(t) = &admissible {
            for tuple in t {
                let ok = tuple.len() == points.len()
                    && tuple.iter().zip(&points).all(|(&v, p)| {
                        tower.field(p.degree()).map(|f| f.contains(v)).unwrap_or(false)
                    });
                if !ok {
                    return Err(IdealError::BadTuple(tuple.iter().map(|e| e.0).collect()));
                }
            }
        }
        Ok(LocalConditions { points, admissible, q: tower.q() })
    }

    pub fn points(&self) -> &[ClosedPoint] {
        &self.points
    }

    pub fn admissible(&self) -> &Admissible {
        &self.admissible
    }

    /// Chart index `j(i)` per component.
    pub fn charts(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.rep().chart()).collect()
    }

    /// Fails when some component of `Y` lies on `Z`.
    pub fn check_disjoint(&self, z: &Scheme) -> Result<(), IdealError> {
        for p in &self.points {
            if z.on_locus(p)? {
                return Err(IdealError::YMeetsZ(p.label()));
            }
        }
        Ok(())
    }

    /// `log_q #H⁰(Y, O_Y) = Σ deg Y_i`.
    pub fn h0_exponent(&self) -> u32 {
        self.points.iter().map(ClosedPoint::degree).sum()
    }

    pub fn t_size(&self) -> num_bigint::BigUint {
        match &self.admissible {
            Admissible::All => num_bigint::BigUint::from(self.q).pow(self.h0_exponent()),
            Admissible::Listed(t) => t.len().into(),
        }
    }

    /// `#T / #H⁰(Y, O_Y)`.
    pub fn ratio(&self) -> BigRational {
        let h0 = num_bigint::BigInt::from(self.q).pow(self.h0_exponent());
        BigRational::new(self.t_size().into(), h0)
    }

    pub fn contains(&self, tuple: &[Elem]) -> bool {
        match &self.admissible {
            Admissible::All => true,
            Admissible::Listed(t) => t.contains(tuple),
        }
    }

    pub fn restrict(&self, tower: &Tower, f: &Poly) -> Result<Vec<Elem>, IdealError> {
        restrict_to_y(tower, f, self)
    }
}

/// `f|_Y`: one value in `κ(Y_i)` per component.
pub fn restrict_to_y(tower: &Tower, f: &Poly, y: &LocalConditions) -> Result<Vec<Elem>, IdealError> {
    y.points
        .iter()
        .map(|p| {
            let field = tower.field(p.degree())?;
            let emb = tower.embedding(1, p.degree())?;
            Ok(f.embed(&emb).eval(&field, p.coords()))
        })
        .collect()
}

/// Values in `κ(P)` of the first-order jet of a degree-`d` form at `P ∈ U`:
/// `f(P)` followed by `⟨∇f(P), w_k⟩` for a basis `w_k` of the tangent space of
/// `U` in the chart of `P`. Returns one row per jet component, one column per
/// monomial.
pub fn jet_values(u: &Scheme, p: &ClosedPoint, mons: &[Monomial], d: u32) -> Result<Vec<Vec<Elem>>, IdealError> {
    let tower = u.tower();
    let field = tower.field(p.degree())?;
    let tangent = u.tangent_space(p)?;
    let j = p.rep().chart();
    let table = PowerTable::new(&field, p.coords(), d);
    let chart_vars: Vec<usize> = (0..=u.n()).filter(|&i| i != j).collect();
    let mut rows = vec![mons.iter().map(|m| table.monomial(&field, m)).collect::<Vec<_>>()];
    for w in &tangent {
        rows.push(
            mons.iter()
                .map(|m| {
                    chart_vars.iter().zip(w).fold(field.zero(), |acc, (&i, &wi)| {
                        field.add(acc, field.mul(table.monomial_partial(&field, m, i), wi))
                    })
                })
                .collect(),
        );
    }
    Ok(rows)
}

/// The jet map `I_d → κ(P)^{1+m}` as `F_q`-linear functionals on the
/// coordinates of `basis` (trace coordinates, `δ` rows per jet component).
pub fn jet_rows(u: &Scheme, p: &ClosedPoint, basis: &GradedBasis) -> Result<Vec<Vec<Elem>>, IdealError> {
    let values = jet_values(u, p, basis.monomials(), basis.d)?;
    rows_on_basis(u.tower(), p.degree(), &values, basis)
}

/// Trace-coordinate rows of `κ(P)`-valued functionals given on monomials,
/// pulled back to the coordinates of `basis`.
pub fn rows_on_basis(
    tower: &Tower,
    delta: u32,
    values: &[Vec<Elem>],
    basis: &GradedBasis,
) -> Result<Vec<Vec<Elem>>, IdealError> {
    let field = tower.field(delta)?;
    let emb = tower.embedding(1, delta)?;
    let mut out = Vec::new();
    for comp in values {
        let on_basis: Vec<Elem> = basis
            .rows()
            .iter()
            .map(|b| {
                b.iter().zip(comp).fold(field.zero(), |acc, (&c, &v)| {
                    if c.0 == 0 {
                        acc
                    } else {
                        field.add(acc, field.mul(emb.apply(c), v))
                    }
                })
            })
            .collect();
        out.extend(trace_rows(tower, delta, &on_basis)?);
    }
    Ok(out)
}

/// Image of `I_d → H⁰(C, O_C(d))`, `C` the first-order neighbourhood of `P` in `U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct JetImage {
    pub q: u64,
    pub rank: usize,
}

impl JetImage {
    pub fn size(&self) -> u128 {
        (self.q as u128).pow(self.rank as u32)
    }
}

/// Jet image at `P` for `d >= c`; `c` comes from [`find_c`].
pub fn jet_image_size(z: &Scheme, u: &Scheme, p: &ClosedPoint, d: u32, c: u32) -> Result<JetImage, IdealError> {
    if d < c {
        return Err(IdealError::BelowCertification { d, c });
    }
    if !u.contains(p)? {
        return Err(GeomError::PointNotOnScheme(p.label()).into());
    }
    let basis = graded_piece_auto(z, d)?;
    jet_image_for_basis(u, p, &basis)
}

pub fn jet_image_for_basis(u: &Scheme, p: &ClosedPoint, basis: &GradedBasis) -> Result<JetImage, IdealError> {
    let rows = jet_rows(u, p, basis)?;
    Ok(JetImage { q: u.q(), rank: linalg::rank(basis.field(), &rows) })
}

/// The cardinality predicted for the jet image: `q^{(m−l)δ}` on `V`,
/// `q^{(m+1)δ}` off `V`.
pub fn lowdegree_prediction(q: u64, m: usize, l: usize, delta: u32, on_v: bool) -> u128 {
    let exp = if on_v { (m - l) as u32 * delta } else { (m as u32 + 1) * delta };
    (q as u128).pow(exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::monomial_count;
    use crate::zeta::RationalZeta;

    fn setup() -> (Arc<Tower>, Scheme, Scheme) {
        let t = Tower::new(2, 1).unwrap();
        let z = Scheme::new(t.clone(), 2, vec![Poly::var(3, 0), Poly::var(3, 1)])
            .unwrap()
            .with_closed_form(RationalZeta::points(2, &[1]));
        let u = Scheme::projective_space(t.clone(), 2);
        (t, z, u)
    }

    fn conic(t: &Arc<Tower>) -> Scheme {
        let base = t.base();
        let g = Poly::from_terms(3, &base, [(vec![1, 0, 1], Elem(1)), (vec![0, 2, 0], Elem(1))]);
        Scheme::new(t.clone(), 2, vec![g]).unwrap()
    }

    #[test]
    fn point_ideal_in_degree_one() {
        let (_, z, _) = setup();
        for method in [Method::GeneratorMultiples, Method::PointEvaluation] {
            let b = graded_piece(&z, 1, method).unwrap();
            assert_eq!(b.dim(), 2);
            assert!(b.contains(&Poly::var(3, 0)) && b.contains(&Poly::var(3, 1)));
            assert!(!b.contains(&Poly::var(3, 2)));
        }
    }

    #[test]
    fn empty_subscheme_gives_full_graded_piece() {
        let t = Tower::new(2, 1).unwrap();
        let z = Scheme::empty(t, 2);
        for d in 0..5 {
            let b = graded_piece_checked(&z, d).unwrap();
            assert_eq!(b.dim(), monomial_count(3, d));
        }
        assert_eq!(find_c(&z, 5).unwrap(), 0);
    }

    #[test]
    fn conic_degree_two() {
        let t = Tower::new(2, 1).unwrap();
        let z = conic(&t);
        let b = graded_piece_checked(&z, 2).unwrap();
        assert_eq!(b.dim(), 1);
        assert!(find_c(&z, 6).unwrap() <= 2);
    }

    #[test]
    fn c_for_a_point_is_one() {
        // I_0 = 0 while I_1 = <x, y>, so S_1 I_0 = I_1 fails at d = 0.
        let (_, z, _) = setup();
        assert_eq!(find_c(&z, 5).unwrap(), 1);
    }

    #[test]
    fn restriction_examples() {
        let t = Tower::new(2, 1).unwrap();
        let base = t.base();
        let pts = vec![
            ClosedPoint::from_coords(&t, 1, &[Elem(1), Elem(0), Elem(0)]).unwrap(),
            ClosedPoint::from_coords(&t, 1, &[Elem(0), Elem(1), Elem(0)]).unwrap(),
        ];
        let y = LocalConditions::new(&t, pts, Admissible::All).unwrap();
        let f = Poly::from_terms(3, &base, [(vec![3, 0, 0], Elem(1))]);
        assert_eq!(y.restrict(&t, &f).unwrap(), vec![Elem(1), Elem(0)]);
        let one = ClosedPoint::from_coords(&t, 1, &[Elem(1), Elem(1), Elem(1)]).unwrap();
        let y = LocalConditions::new(&t, vec![one], Admissible::All).unwrap();
        let xyz = Poly::from_terms(3, &base, [(vec![1, 1, 1], Elem(1))]);
        assert_eq!(y.restrict(&t, &xyz).unwrap(), vec![Elem(1)]);
    }

    #[test]
    fn jets_match_the_lowdegree_formula() {
        let (t, z, u) = setup();
        let c = find_c(&z, 5).unwrap();
        let origin = ClosedPoint::from_coords(&t, 1, &[Elem(0), Elem(0), Elem(1)]).unwrap();
        let off = ClosedPoint::from_coords(&t, 1, &[Elem(1), Elem(0), Elem(0)]).unwrap();
        let quad = u.closed_points(2).unwrap().into_iter().find(|p| !z.on_locus(p).unwrap()).unwrap();
        for d in 6..9 {
            assert_eq!(jet_image_size(&z, &u, &origin, d, c).unwrap().size(), 4);
            assert_eq!(jet_image_size(&z, &u, &off, d, c).unwrap().size(), 8);
            assert_eq!(jet_image_size(&z, &u, &quad, d, c).unwrap().size(), 64);
        }
        // Below d = 6 the jet map is not onto everywhere; I_1 = <x, y> cannot reach κ(P)^3 off Z.
        assert_eq!(jet_image_size(&z, &u, &off, 1, c).unwrap().size(), 4);
        assert!(matches!(
            jet_image_size(&z, &u, &origin, 0, 1),
            Err(IdealError::BelowCertification { .. })
        ));
    }

    #[test]
    fn fp_conversion_over_f4() {
        let t = Tower::new(2, 2).unwrap();
        let base = t.base();
        let rows = vec![vec![Elem(2), Elem(3)], vec![Elem(1), Elem(0)]];
        let fp_rows = fq_rows_to_fp(&base, &rows);
        for x0 in base.elements() {
            for x1 in base.elements() {
                let x = fq_to_fp(&base, &[x0, x1]);
                for (r, row) in rows.iter().enumerate() {
                    let value = linalg::dot(&base, row, &[x0, x1]);
                    let digits: Vec<u32> = (0..2).map(|k| fp_rows[2 * r + k].dot(&x)).collect();
                    assert_eq!(base.from_digits(&digits), value);
                }
                assert_eq!(fp_to_fq(&base, &x), vec![x0, x1]);
            }
        }
    }

    #[test]
    fn csv_export_has_one_row_per_basis_vector() {
        let (_, z, _) = setup();
        let b = graded_piece(&z, 2, Method::GeneratorMultiples).unwrap();
        let mut out = Vec::new();
        b.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + b.dim());
        assert_eq!(lines[0], "x0^2,x0*x1,x0*x2,x1^2,x1*x2,x2^2");
    }
}
