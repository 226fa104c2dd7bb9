//! Zeta functions `ζ_X(s) = Π_P (1 − q^{−s·deg P})^{−1}` at integer `s`:
//! closed forms for fixture schemes and truncated Euler products with an
//! unconditional tail bound.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::geometry::{closed_point_counts, Dimension, GeomError, Scheme};

/// Exact products are only formed while the estimated size of the
/// denominators stays below this many bits.
const EXACT_BIT_BUDGET: f64 = 65_536.0;
const EXACT_MAX_TRUNCATION: u32 = 12;

#[derive(Debug, Error)]
pub enum ZetaError {
    #[error("the Euler product diverges at s = {s} (dimension {dim})")]
    Divergent { s: u32, dim: u32 },
    #[error("no closed form is registered for this scheme")]
    Unregistered,
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// `Z(T) = Π (1 − q^k T^δ)^{−c}` with integer multiplicities `c`, so that
/// `ζ(s) = Z(q^{−s})` and `N_e = Σ_{δ | e} c·δ·q^{k e/δ}`.
///
/// Projective spaces, lines, conics, unions of lines and complements of
/// finite point sets all have this shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalZeta {
    q: u64,
    factors: BTreeMap<(u32, u32), i64>,
}

impl RationalZeta {
    pub fn empty(q: u64) -> Self {
        RationalZeta { q, factors: BTreeMap::new() }
    }

    pub fn projective_space(q: u64, n: usize) -> Self {
        let mut z = RationalZeta::empty(q);
        for k in 0..=n as u32 {
            z.add_factor(k, 1, 1);
        }
        z
    }

    /// A smooth conic is isomorphic to `P^1`, and so is a line.
    pub fn line(q: u64) -> Self {
        RationalZeta::projective_space(q, 1)
    }

    /// Two lines meeting in a rational point: `N_e = 2q^e + 1`.
    pub fn two_lines(q: u64) -> Self {
        let mut z = RationalZeta::empty(q);
        z.add_factor(0, 1, 1);
        z.add_factor(1, 1, 2);
        z
    }

    /// A finite set of closed points with the given degrees.
    pub fn points(q: u64, degrees: &[u32]) -> Self {
        let mut z = RationalZeta::empty(q);
        for &d in degrees {
            z.add_factor(0, d, 1);
        }
        z
    }

    /// `Z(T) = Π_k (1 − q^k T)^{−c_k}` from weights `k ↦ c_k`.
    pub fn from_weights(q: u64, weights: impl IntoIterator<Item = (u32, i64)>) -> Self {
        let mut z = RationalZeta::empty(q);
        for (k, c) in weights {
            z.add_factor(k, 1, c);
        }
        z
    }

    pub fn add_factor(&mut self, k: u32, delta: u32, c: i64) {
        assert!(delta >= 1);
        let entry = self.factors.entry((k, delta)).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.factors.remove(&(k, delta));
        }
    }

    /// The zeta function after deleting one closed point of degree `delta`.
    pub fn without_point(mut self, delta: u32) -> Self {
        self.add_factor(0, delta, -1);
        self
    }

    /// `ζ_self / ζ_other`, e.g. `ζ_{U−V} = ζ_U / ζ_V`.
    pub fn ratio(&self, other: &RationalZeta) -> RationalZeta {
        assert_eq!(self.q, other.q);
        let mut z = self.clone();
        for (&(k, delta), &c) in &other.factors {
            z.add_factor(k, delta, -c);
        }
        z
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn factors(&self) -> impl Iterator<Item = ((u32, u32), i64)> + '_ {
        self.factors.iter().map(|(&k, &c)| (k, c))
    }

    pub fn point_count(&self, e: u32) -> i128 {
        self.factors
            .iter()
            .filter(|((_, delta), _)| e.is_multiple_of(*delta))
            .map(|(&(k, delta), &c)| c as i128 * delta as i128 * (self.q as i128).pow(k * e / delta))
            .sum()
    }

    /// Largest `k/δ` over factors with positive multiplicity: the dimension
    /// for every registered shape.
    pub fn dimension(&self) -> Dimension {
        self.factors
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(&(k, delta), _)| k.div_ceil(delta))
            .max()
            .map_or(Dimension::Empty, Dimension::Finite)
    }

    fn check_convergence(&self, s: u32) -> Result<(), ZetaError> {
        if let Dimension::Finite(dim) = self.dimension() {
            if s <= dim {
                return Err(ZetaError::Divergent { s, dim });
            }
        }
        if self.factors.keys().any(|&(k, delta)| k == s * delta) {
            let dim = self.dimension().as_option().unwrap_or(0);
            return Err(ZetaError::Divergent { s, dim });
        }
        Ok(())
    }

    /// Exact value at integer `s`.
    pub fn evaluate(&self, s: u32) -> Result<BigRational, ZetaError> {
        self.check_convergence(s)?;
        let q = BigInt::from(self.q);
        let mut acc = BigRational::one();
        for (&(k, delta), &c) in &self.factors {
            let x = BigRational::new(num_traits::pow(q.clone(), k as usize), num_traits::pow(q.clone(), (s * delta) as usize));
            let factor = BigRational::one() - x;
            let power = num_traits::pow(factor, c.unsigned_abs() as usize);
            acc = if c > 0 { acc / power } else { acc * power };
        }
        Ok(acc)
    }
}

impl fmt::Display for RationalZeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(&(k, delta), &c)| {
                let t = if delta == 1 { "T".to_string() } else { format!("T^{delta}") };
                let coef = if k == 0 { String::new() } else { format!("{}^{}·", self.q, k) };
                format!("(1 − {coef}{t})^{}", -c)
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

fn serialize_rational<S: Serializer>(v: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // Scale down huge numerators/denominators together before converting.
    let (n, d) = (r.numer(), r.denom());
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// A value of `ζ(s)` (not its inverse) with truncation metadata.
#[derive(Clone, Debug, Serialize)]
pub struct ZetaValue {
    pub s: u32,
    pub value: f64,
    #[serde(serialize_with = "serialize_rational")]
    pub rational: Option<BigRational>,
    pub truncation_degree: Option<u32>,
    /// Bound on `|ζ(s) − value|`; zero for closed forms.
    pub tail_bound: f64,
    pub exact: bool,
}

impl ZetaValue {
    fn closed(s: u32, r: BigRational) -> Self {
        ZetaValue {
            s,
            value: rational_to_f64(&r),
            rational: Some(r),
            truncation_degree: None,
            tail_bound: 0.0,
            exact: true,
        }
    }

    pub fn inverse_value(&self) -> f64 {
        match &self.rational {
            Some(r) => rational_to_f64(&r.recip()),
            None => self.value.recip(),
        }
    }

    pub fn inverse_rational(&self) -> Option<BigRational> {
        self.rational.as_ref().map(|r| r.recip())
    }
}

/// `ζ_S(s)` from the registered closed form of `S`'s closed part, with one
/// Euler factor divided out per removed point.
pub fn zeta_closed_form(scheme: &Scheme, s: u32) -> Result<ZetaValue, ZetaError> {
    let z = closed_form_with_removals(scheme).ok_or(ZetaError::Unregistered)?;
    Ok(ZetaValue::closed(s, z.evaluate(s)?))
}

pub fn closed_form_with_removals(scheme: &Scheme) -> Option<RationalZeta> {
    let mut z = scheme.closed_form()?.clone();
    for r in scheme.removed() {
        z = z.without_point(r.degree());
    }
    Some(z)
}

/// `ζ_{U−V}(s)` for a closed `V ⊆ U`, exactly when both closed forms are
/// registered and otherwise by truncation at `e_max`.
pub fn complement_zeta(u: &Scheme, v: &Scheme, s: u32, e_max: u32) -> Result<ZetaValue, ZetaError> {
    if let (Some(zu), Some(zv)) = (closed_form_with_removals(u), closed_form_with_removals(v)) {
        return Ok(ZetaValue::closed(s, zu.ratio(&zv).evaluate(s)?));
    }
    check_dimension(u, s, e_max)?;
    let cu = scheme_counts(u, e_max)?;
    let cv = scheme_counts(v, e_max)?;
    let au = closed_point_counts(&cu);
    let av = closed_point_counts(&cv);
    let a: Vec<i128> = au.iter().zip(&av).map(|(&x, &y)| x as i128 - y as i128).collect();
    Ok(truncated_from_closed_counts(u.q(), u.n(), s, &a))
}

fn scheme_counts(scheme: &Scheme, e_max: u32) -> Result<Vec<u128>, ZetaError> {
    (1..=e_max)
        .map(|e| scheme.count_points(e).map_err(ZetaError::from))
        .collect()
}

fn check_dimension(scheme: &Scheme, s: u32, e_max: u32) -> Result<(), ZetaError> {
    let dim = match scheme.closed_form() {
        Some(z) => z.dimension(),
        None => scheme.estimate_dimension(e_max.clamp(1, 4), None)?,
    };
    match dim {
        Dimension::Finite(d) if s <= d => Err(ZetaError::Divergent { s, dim: d }),
        _ => Ok(()),
    }
}

/// Euler product over the closed points of degree `<= e_max`. Point counts
/// come from the registered closed form when present, else from enumeration.
pub fn zeta_truncated(scheme: &Scheme, s: u32, e_max: u32) -> Result<ZetaValue, ZetaError> {
    check_dimension(scheme, s, e_max)?;
    let counts = scheme_counts(scheme, e_max)?;
    let a: Vec<i128> = closed_point_counts(&counts).into_iter().map(|x| x as i128).collect();
    Ok(truncated_from_closed_counts(scheme.q(), scheme.n(), s, &a))
}

/// `Π_{d ≤ E} (1 − q^{−s d})^{−a_d}` with `E = a.len()`, exact while the
/// numbers stay small and in floating point otherwise. The tail bound uses
/// `N_e ≤ #P^n(F_{q^e})` for `e > E`.
pub fn truncated_from_closed_counts(q: u64, n: usize, s: u32, a: &[i128]) -> ZetaValue {
    let e_max = a.len() as u32;
    let bits: f64 = a
        .iter()
        .enumerate()
        .map(|(i, &ad)| ad.unsigned_abs() as f64 * (s as f64) * (i as f64 + 1.0) * (q as f64).log2())
        .sum();
    let (value, rational) = if e_max <= EXACT_MAX_TRUNCATION && bits <= EXACT_BIT_BUDGET {
        let r = exact_product(q, s, a);
        (rational_to_f64(&r), Some(r))
    } else {
        let log: f64 = a
            .iter()
            .enumerate()
            .map(|(i, &ad)| {
                let x = (q as f64).powf(-(s as f64) * (i as f64 + 1.0));
                -(ad as f64) * (-x).ln_1p()
            })
            .sum();
        (log.exp(), None)
    };
    let log_tail = ambient_log_tail(q, n, s, e_max);
    let mut tail_bound = value * log_tail.exp_m1();
    if rational.is_none() {
        // Accumulated rounding in the logarithm sum.
        tail_bound += value * 1e-14 * (e_max as f64 + 1.0);
    }
    ZetaValue {
        s,
        value,
        rational,
        truncation_degree: Some(e_max),
        tail_bound,
        exact: false,
    }
}

fn exact_product(q: u64, s: u32, a: &[i128]) -> BigRational {
    let q = BigInt::from(q);
    let mut acc = BigRational::one();
    for (i, &ad) in a.iter().enumerate() {
        if ad == 0 {
            continue;
        }
        let den = num_traits::pow(q.clone(), s as usize * (i + 1));
        let factor = BigRational::new(&den - BigInt::one(), den);
        let power = num_traits::pow(factor, ad.unsigned_abs() as usize);
        acc = if ad > 0 { acc / power } else { acc * power };
    }
    acc
}

/// Upper bound for `Σ_{e > E} #P^n(F_{q^e}) q^{−s e} / e`, which dominates
/// `log(ζ / ζ_{≤E})`. Infinite when `s <= n`.
pub fn ambient_log_tail(q: u64, n: usize, s: u32, e_max: u32) -> f64 {
    if s as usize <= n {
        return f64::INFINITY;
    }
    let e1 = e_max as f64 + 1.0;
    (0..=n)
        .map(|i| {
            let x = (q as f64).powf(i as f64 - s as f64);
            x.powf(e1) / ((1.0 - x) * e1)
        })
        .sum()
}

/// Difference of two values as an `f64`, exact when both are rational.
pub fn abs_difference(a: &ZetaValue, b: &ZetaValue) -> f64 {
    match (&a.rational, &b.rational) {
        (Some(x), Some(y)) => rational_to_f64(&(x - y).abs()),
        _ => (a.value - b.value).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Tower;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn closed_form_values() {
        let p2 = RationalZeta::projective_space(2, 2);
        assert_eq!(p2.evaluate(3).unwrap().recip(), ratio(21, 64));
        let p1 = RationalZeta::line(2);
        assert_eq!(p1.evaluate(2).unwrap(), ratio(8, 3));
        let punctured = p2.clone().without_point(1);
        assert_eq!(punctured.evaluate(3).unwrap().recip(), ratio(3, 8));
        assert_eq!(RationalZeta::empty(2).evaluate(1).unwrap(), BigRational::one());
        assert_eq!(RationalZeta::two_lines(2).evaluate(3).unwrap(), ratio(128, 63));
        assert!(matches!(p2.evaluate(2), Err(ZetaError::Divergent { .. })));
    }

    #[test]
    fn closed_form_point_counts() {
        let p2 = RationalZeta::projective_space(2, 2);
        assert_eq!((1..=4).map(|e| p2.point_count(e)).collect::<Vec<_>>(), vec![7, 21, 73, 273]);
        let lines = RationalZeta::two_lines(2);
        assert_eq!(lines.point_count(3), 17);
        let pts = RationalZeta::points(2, &[1, 2]);
        assert_eq!((1..=4).map(|e| pts.point_count(e)).collect::<Vec<_>>(), vec![1, 3, 1, 3]);
        assert_eq!(p2.ratio(&pts).point_count(2), 18);
        assert_eq!(pts.dimension(), Dimension::Finite(0));
        assert_eq!(RationalZeta::empty(2).dimension(), Dimension::Empty);
    }

    #[test]
    fn truncation_approaches_closed_form() {
        let tower = Tower::new(2, 1).unwrap();
        let p1 = Scheme::projective_space(tower.clone(), 1);
        let exact = zeta_closed_form(&p1, 2).unwrap();
        let mut previous = 0.0;
        for e in [2, 6, 10, 12, 16] {
            let t = zeta_truncated(&p1, 2, e).unwrap();
            assert!(abs_difference(&t, &exact) <= t.tail_bound, "E = {e}");
            assert!(t.value >= previous);
            previous = t.value;
        }
        let empty = Scheme::empty(tower, 2);
        let z = zeta_truncated(&empty, 1, 5).unwrap();
        assert_eq!(z.rational, Some(BigRational::one()));
    }

    #[test]
    fn divergence_is_reported() {
        let tower = Tower::new(2, 1).unwrap();
        let p2 = Scheme::projective_space(tower, 2);
        assert!(matches!(zeta_truncated(&p2, 2, 4), Err(ZetaError::Divergent { .. })));
        assert!(matches!(zeta_closed_form(&p2, 1), Err(ZetaError::Divergent { .. })));
    }

    #[test]
    fn complement_of_a_point() {
        let tower = Tower::new(2, 1).unwrap();
        let u = Scheme::projective_space(tower.clone(), 2);
        let v = Scheme::new(tower.clone(), 2, vec![crate::Poly::var(3, 0), crate::Poly::var(3, 1)])
            .unwrap()
            .with_closed_form(RationalZeta::points(2, &[1]));
        let z = complement_zeta(&u, &v, 3, 10).unwrap();
        assert_eq!(z.inverse_rational(), Some(ratio(3, 8)));
        let unregistered = Scheme::new(tower, 2, vec![crate::Poly::var(3, 0), crate::Poly::var(3, 1)]).unwrap();
        let t = complement_zeta(&u.clone().with_budget(1 << 20), &unregistered.with_budget(1 << 20), 3, 6).unwrap();
        assert!((t.inverse_value() - 0.375).abs() < 1e-3);
    }
}
