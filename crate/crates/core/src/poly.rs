//! Sparse multivariate polynomials over a finite field, graded-lex monomial
//! bases, and the univariate helpers used by the squarefree test.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use crate::gf::{Elem, Embedding, Field};

/// Exponent vector, one entry per variable `x_0, .., x_n`.
pub type Monomial = Vec<u32>;

/// All monomials of total degree `d` in `nvars` variables, graded
/// lexicographic with `x_0 > x_1 > ...` (so `x_0^d` comes first).
pub fn monomials(nvars: usize, d: u32) -> Vec<Monomial> {
    fn go(nvars: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if prefix.len() + 1 == nvars {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=d).rev() {
            prefix.push(k);
            go(nvars, d - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    go(nvars, d, &mut Vec::with_capacity(nvars), &mut out);
    out
}

/// `C(nvars - 1 + d, d)`, the number of degree-`d` monomials.
pub fn monomial_count(nvars: usize, d: u32) -> usize {
    if nvars == 0 {
        return usize::from(d == 0);
    }
    let (n, k) = (nvars as u64 - 1 + d as u64, d as u64);
    let mut acc = 1u64;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) / (i + 1);
    }
    acc as usize
}

pub fn monomial_label(m: &[u32]) -> String {
    let parts: Vec<String> = m
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| if e == 1 { format!("x{i}") } else { format!("x{i}^{e}") })
        .collect();
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

/// A polynomial with coefficients in some finite field; the field is passed to
/// every arithmetic operation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Elem>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| format!("{}*{}", c.0, monomial_label(m)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Elem) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn monomial(exps: Monomial, c: Elem) -> Self {
        let nvars = exps.len();
        let mut terms = BTreeMap::new();
        if c.0 != 0 {
            terms.insert(exps, c);
        }
        Poly { nvars, terms }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, Elem(1))
    }

    pub fn from_terms(
        nvars: usize,
        field: &Field,
        terms: impl IntoIterator<Item = (Monomial, Elem)>,
    ) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.len(), nvars, "monomial has the wrong number of variables");
            p.add_term(m, c, field);
        }
        p
    }

    /// Coefficient vector `coeffs[i]` against `basis[i]`.
    pub fn from_coefficients(nvars: usize, field: &Field, basis: &[Monomial], coeffs: &[Elem]) -> Self {
        Self::from_terms(nvars, field, basis.iter().cloned().zip(coeffs.iter().copied()))
    }

    fn add_term(&mut self, m: Monomial, c: Elem, field: &Field) {
        if c.0 == 0 {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = field.add(*o.get(), c);
                if sum.0 == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Elem)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &[u32]) -> Elem {
        self.terms.get(m).copied().unwrap_or_default()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|m| m.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn add(&self, other: &Poly, field: &Field) -> Poly {
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c, field);
        }
        out
    }

    pub fn scale(&self, c: Elem, field: &Field) -> Poly {
        Poly::from_terms(
            self.nvars,
            field,
            self.terms.iter().map(|(m, &x)| (m.clone(), field.mul(c, x))),
        )
    }

    pub fn mul_monomial(&self, exps: &[u32]) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (m.iter().zip(exps).map(|(a, b)| a + b).collect(), c))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly, field: &Field) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m1, &c1) in &self.terms {
            for (m2, &c2) in &other.terms {
                let m: Monomial = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                out.add_term(m, field.mul(c1, c2), field);
            }
        }
        out
    }

    /// Formal partial derivative in `x_i`.
    pub fn partial(&self, i: usize, field: &Field) -> Poly {
        Poly::from_terms(
            self.nvars,
            field,
            self.terms.iter().filter(|(m, _)| m[i] > 0).map(|(m, &c)| {
                let mut dm = m.clone();
                dm[i] -= 1;
                (dm, field.mul(field.from_int(m[i] as i64), c))
            }),
        )
    }

    /// Maps every coefficient through `emb`.
    pub fn embed(&self, emb: &Embedding) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (m.clone(), emb.apply(c)))
                .filter(|(_, c)| c.0 != 0)
                .collect(),
        }
    }

    /// Evaluates at `point`, whose coordinates live in the coefficient field.
    pub fn eval(&self, field: &Field, point: &[Elem]) -> Elem {
        let powers = PowerTable::new(field, point, self.max_exponent());
        self.terms.iter().fold(field.zero(), |acc, (m, &c)| {
            field.add(acc, field.mul(c, powers.monomial(field, m)))
        })
    }

    fn max_exponent(&self) -> u32 {
        self.terms.keys().flat_map(|m| m.iter().copied()).max().unwrap_or(0)
    }

    /// Exact division by `other` when it divides `self`, by repeated
    /// leading-term elimination in lexicographic order.
    pub fn divide_exact(&self, other: &Poly, field: &Field) -> Option<Poly> {
        let (lead_m, &lead_c) = other.terms.iter().next_back()?;
        let lead_inv = field.inv(lead_c)?;
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.nvars);
        while let Some((m, &c)) = rem.terms.iter().next_back() {
            if m.iter().zip(lead_m).any(|(a, b)| a < b) {
                return None;
            }
            let qm: Monomial = m.iter().zip(lead_m).map(|(a, b)| a - b).collect();
            let qc = field.mul(c, lead_inv);
            let step = other.mul_monomial(&qm).scale(qc, field);
            rem = rem.add(&step.scale(field.neg(field.one()), field), field);
            quot.add_term(qm, qc, field);
        }
        Some(quot)
    }
}

/// Powers `x_i^k` of a point's coordinates, for repeated monomial evaluation.
pub struct PowerTable {
    powers: Vec<Vec<Elem>>,
}

impl PowerTable {
    pub fn new(field: &Field, point: &[Elem], max_exp: u32) -> Self {
        let powers = point
            .iter()
            .map(|&x| {
                let mut v = Vec::with_capacity(max_exp as usize + 1);
                let mut acc = field.one();
                for _ in 0..=max_exp {
                    v.push(acc);
                    acc = field.mul(acc, x);
                }
                v
            })
            .collect();
        PowerTable { powers }
    }

    pub fn monomial(&self, field: &Field, m: &[u32]) -> Elem {
        m.iter()
            .enumerate()
            .fold(field.one(), |acc, (i, &e)| field.mul(acc, self.powers[i][e as usize]))
    }

    /// `∂(x^m)/∂x_i` evaluated at the point.
    pub fn monomial_partial(&self, field: &Field, m: &[u32], i: usize) -> Elem {
        if m[i] == 0 {
            return field.zero();
        }
        let c = field.from_int(m[i] as i64);
        if c == field.zero() {
            return c;
        }
        let v = m.iter().enumerate().fold(field.one(), |acc, (j, &e)| {
            let e = if j == i { e - 1 } else { e };
            field.mul(acc, self.powers[j][e as usize])
        });
        field.mul(c, v)
    }
}

/// Dense univariate polynomials over a field, lowest coefficient first.
pub mod univariate {
    use crate::gf::{Elem, Field};

    pub fn trim(v: &mut Vec<Elem>) {
        while v.last().is_some_and(|c| c.0 == 0) {
            v.pop();
        }
    }

    pub fn degree(v: &[Elem]) -> Option<usize> {
        v.iter().rposition(|c| c.0 != 0)
    }

    pub fn mul(field: &Field, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![field.zero(); a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x.0 == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = field.add(out[i + j], field.mul(x, y));
            }
        }
        out
    }

    pub fn rem(field: &Field, a: &[Elem], m: &[Elem]) -> Vec<Elem> {
        let dm = degree(m).expect("division by the zero polynomial");
        let inv = field.inv(m[dm]).unwrap();
        let mut r = a.to_vec();
        trim(&mut r);
        while let Some(dr) = degree(&r) {
            if dr < dm {
                break;
            }
            let c = field.mul(r[dr], inv);
            for (i, &mi) in m[..=dm].iter().enumerate() {
                let idx = dr - dm + i;
                r[idx] = field.sub(r[idx], field.mul(c, mi));
            }
            trim(&mut r);
        }
        r
    }

    pub fn gcd(field: &Field, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = rem(field, &x, &y);
            x = y;
            y = r;
        }
        x
    }

    pub fn derivative(field: &Field, a: &[Elem]) -> Vec<Elem> {
        let mut d: Vec<Elem> = a
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| field.mul(field.from_int(i as i64), c))
            .collect();
        trim(&mut d);
        d
    }

    /// No repeated roots over the algebraic closure. Nonzero constants are squarefree.
    pub fn is_squarefree(field: &Field, a: &[Elem]) -> bool {
        match degree(a) {
            None => false,
            Some(0) => true,
            Some(_) => {
                let d = derivative(field, a);
                if d.is_empty() {
                    return false;
                }
                degree(&gcd(field, a, &d)) == Some(0)
            }
        }
    }
}
