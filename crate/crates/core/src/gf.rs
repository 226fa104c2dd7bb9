//! Finite fields `F_{q^e}` with `q = p^a`, presented as `F_p[t]/(m(t))`.
//!
//! Elements are plain [`Elem`] handles: the integer `Σ c_i p^i` built from the
//! coefficient vector `(c_0, .., c_{N-1})` of the residue class, `N = a·e`.
//! All arithmetic goes through the owning [`Field`]. With this encoding the
//! natural integer order enumerates the field with `0` first and `1` second.
//!
//! A [`Tower`] caches the fields `F_{q^e}` for one base `F_q`, together with
//! explicit embeddings `F_{q^d} -> F_{q^e}` (`d | e`) obtained by matching
//! roots of the smaller modulus.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{checked_pow, is_prime, prime_factors};

/// Default upper bound on the number of field elements.
pub const DEFAULT_SIZE_BOUND: u64 = 1 << 24;

/// Fields up to this size get log/exp multiplication tables.
const TABLE_LIMIT: u32 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u64),
    #[error("degrees must be positive (a = {a}, e = {e})")]
    ZeroDegree { a: u32, e: u32 },
    #[error("field of size {p}^{degree} exceeds the size bound {bound}")]
    TooLarge { p: u64, degree: u32, bound: u64 },
    #[error("no embedding of F_{p}^{from} into F_{p}^{to}")]
    NoEmbedding { p: u64, from: u32, to: u32 },
}

/// A field element, interpreted by the [`Field`] it came from.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Elem(pub u32);

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// The field `F_{p^{a·e}}`, viewed as a degree-`e` extension of `F_q`, `q = p^a`.
pub struct Field {
    p: u32,
    a: u32,
    ext: u32,
    degree: u32,
    size: u32,
    q: u64,
    modulus: Vec<u32>,
    place: Vec<u32>,
    tables: Option<Tables>,
    primitive: OnceLock<Elem>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p)
            .field("a", &self.a)
            .field("e", &self.ext)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl Field {
    /// `F_{q^e}` with `q = p^a`, under the default size bound.
    pub fn new(p: u64, a: u32, e: u32) -> Result<Self, GfError> {
        Self::with_bound(p, a, e, DEFAULT_SIZE_BOUND)
    }

    pub fn with_bound(p: u64, a: u32, e: u32, bound: u64) -> Result<Self, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if a == 0 || e == 0 {
            return Err(GfError::ZeroDegree { a, e });
        }
        let degree = a
            .checked_mul(e)
            .ok_or(GfError::TooLarge { p, degree: u32::MAX, bound })?;
        let size = checked_pow(p, degree)
            .filter(|&s| s <= bound && s <= u32::MAX as u64)
            .ok_or(GfError::TooLarge { p, degree, bound })?;
        let p32 = p as u32;
        let modulus = fp_poly::first_irreducible(p32, degree as usize);
        let place = (0..=degree).map(|i| p32.pow(i)).collect();
        let mut field = Field {
            p: p32,
            a,
            ext: e,
            degree,
            size: size as u32,
            q: p.pow(a),
            modulus,
            place,
            tables: None,
            primitive: OnceLock::new(),
        };
        if field.size <= TABLE_LIMIT {
            let g = field.search_primitive();
            let n = (field.size - 1) as usize;
            let mut exp = vec![0u32; 2 * n.max(1)];
            let mut log = vec![0u32; field.size as usize];
            let mut x = field.one();
            for i in 0..n {
                exp[i] = x.0;
                log[x.0 as usize] = i as u32;
                x = field.mul_slow(x, g);
            }
            for i in n..2 * n {
                exp[i] = exp[i - n];
            }
            field.tables = Some(Tables { exp, log });
            let _ = field.primitive.set(g);
        }
        Ok(field)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Degree of the base field `F_q` over `F_p`.
    pub fn a(&self) -> u32 {
        self.a
    }

    /// Extension degree over `F_q`.
    pub fn ext(&self) -> u32 {
        self.ext
    }

    /// Degree over the prime field, `a·e`.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    /// Size of the base field `F_q`.
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Monic modulus over `F_p`, coefficients from the constant term up.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> Elem {
        Elem(0)
    }

    pub fn one(&self) -> Elem {
        Elem(1)
    }

    /// The image of an integer in the prime field.
    pub fn from_int(&self, c: i64) -> Elem {
        Elem(c.rem_euclid(self.p as i64) as u32)
    }

    /// Coefficient vector over `F_p`, lowest power of `t` first.
    pub fn digits(&self, x: Elem) -> Vec<u32> {
        let mut v = x.0;
        (0..self.degree)
            .map(|_| {
                let d = v % self.p;
                v /= self.p;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, digits: &[u32]) -> Elem {
        debug_assert!(digits.len() <= self.degree as usize);
        Elem(
            digits
                .iter()
                .zip(&self.place)
                .map(|(&d, &w)| (d % self.p) * w)
                .sum(),
        )
    }

    pub fn contains(&self, x: Elem) -> bool {
        x.0 < self.size
    }

    /// All elements in encoding order: `0`, `1`, ...
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.size).map(Elem)
    }

    pub fn add(&self, x: Elem, y: Elem) -> Elem {
        if self.p == 2 {
            return Elem(x.0 ^ y.0);
        }
        let (mut u, mut v) = (x.0, y.0);
        let mut out = 0;
        for &w in &self.place[..self.degree as usize] {
            let d = (u % self.p + v % self.p) % self.p;
            out += d * w;
            u /= self.p;
            v /= self.p;
        }
        Elem(out)
    }

    pub fn neg(&self, x: Elem) -> Elem {
        if self.p == 2 {
            return x;
        }
        let mut u = x.0;
        let mut out = 0;
        for &w in &self.place[..self.degree as usize] {
            let d = (self.p - u % self.p) % self.p;
            out += d * w;
            u /= self.p;
        }
        Elem(out)
    }

    pub fn sub(&self, x: Elem, y: Elem) -> Elem {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: Elem, y: Elem) -> Elem {
        if x.0 == 0 || y.0 == 0 {
            return Elem(0);
        }
        match &self.tables {
            Some(t) => Elem(t.exp[(t.log[x.0 as usize] + t.log[y.0 as usize]) as usize]),
            None => self.mul_slow(x, y),
        }
    }

    fn mul_slow(&self, x: Elem, y: Elem) -> Elem {
        let n = self.degree as usize;
        if self.p == 2 {
            let (a, b) = (x.0 as u64, y.0 as u64);
            let mut prod = 0u64;
            for i in 0..n {
                if (b >> i) & 1 == 1 {
                    prod ^= a << i;
                }
            }
            let m: u64 = self
                .modulus
                .iter()
                .enumerate()
                .map(|(i, &c)| (c as u64) << i)
                .sum();
            for k in (n..2 * n).rev() {
                if (prod >> k) & 1 == 1 {
                    prod ^= m << (k - n);
                }
            }
            return Elem(prod as u32);
        }
        let p = self.p as u64;
        let (xd, yd) = (self.digits(x), self.digits(y));
        let mut prod = vec![0u64; 2 * n];
        for (i, &u) in xd.iter().enumerate() {
            if u == 0 {
                continue;
            }
            for (j, &v) in yd.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u as u64 * v as u64) % p;
            }
        }
        for k in (n..2 * n).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            for (i, &m) in self.modulus.iter().enumerate() {
                let idx = k - n + i;
                prod[idx] = (prod[idx] + p * p - c * m as u64) % p;
            }
        }
        let digits: Vec<u32> = prod[..n].iter().map(|&c| c as u32).collect();
        self.from_digits(&digits)
    }

    pub fn pow(&self, x: Elem, k: u64) -> Elem {
        if k == 0 {
            return self.one();
        }
        if x.0 == 0 {
            return self.zero();
        }
        if let Some(t) = &self.tables {
            let order = (self.size - 1) as u64;
            let idx = (t.log[x.0 as usize] as u64 * (k % order)) % order;
            return Elem(t.exp[idx as usize]);
        }
        let mut base = x;
        let mut acc = self.one();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul_slow(acc, base);
            }
            base = self.mul_slow(base, base);
            k >>= 1;
        }
        acc
    }

    pub fn inv(&self, x: Elem) -> Option<Elem> {
        if x.0 == 0 {
            return None;
        }
        if let Some(t) = &self.tables {
            let n = self.size - 1;
            return Some(Elem(t.exp[((n - t.log[x.0 as usize]) % n) as usize]));
        }
        Some(self.pow(x, self.size as u64 - 2))
    }

    /// `x / y`; panics on division by zero.
    pub fn div(&self, x: Elem, y: Elem) -> Elem {
        self.mul(x, self.inv(y).expect("division by zero in finite field"))
    }

    /// The `q`-power Frobenius `x -> x^q` over the base field `F_q`.
    pub fn frobenius_q(&self, x: Elem) -> Elem {
        self.pow(x, self.q)
    }

    /// `frobenius_q` applied `times` times.
    pub fn frobenius_q_iter(&self, x: Elem, times: u32) -> Elem {
        (0..times).fold(x, |y, _| self.frobenius_q(y))
    }

    /// A generator of the multiplicative group.
    pub fn primitive_element(&self) -> Elem {
        *self.primitive.get_or_init(|| self.search_primitive())
    }

    fn search_primitive(&self) -> Elem {
        if self.size == 2 {
            return self.one();
        }
        let order = (self.size - 1) as u64;
        let factors = prime_factors(order);
        (1..self.size)
            .map(Elem)
            .find(|&g| {
                factors
                    .iter()
                    .all(|&r| self.pow_slow(g, order / r) != self.one())
            })
            .expect("multiplicative group of a finite field is cyclic")
    }

    fn pow_slow(&self, x: Elem, mut k: u64) -> Elem {
        let mut base = x;
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul_slow(acc, base);
            }
            base = self.mul_slow(base, base);
            k >>= 1;
        }
        acc
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, x: Elem) -> u64 {
        assert!(x.0 != 0, "zero has no multiplicative order");
        let n = (self.size - 1) as u64;
        let mut ord = n;
        for r in prime_factors(n) {
            while ord.is_multiple_of(r) && self.pow(x, ord / r) == self.one() {
                ord /= r;
            }
        }
        ord
    }

    /// Evaluates a polynomial with prime-field coefficients (lowest first) at `x`.
    pub fn eval_prime_poly(&self, coeffs: &[u32], x: Elem) -> Elem {
        coeffs.iter().rev().fold(self.zero(), |acc, &c| {
            self.add(self.mul(acc, x), Elem(c % self.p))
        })
    }
}

/// `F_q`-linear embedding `F_{q^d} -> F_{q^e}`, determined by the image of `t`.
pub struct Embedding {
    source: Arc<Field>,
    target: Arc<Field>,
    images: Vec<Elem>,
    inverse: OnceLock<HashMap<Elem, Elem>>,
}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Embedding(F_q^{} -> F_q^{}, t -> {:?})",
            self.source.ext,
            self.target.ext,
            self.images.get(1)
        )
    }
}

impl Embedding {
    fn from_root(source: Arc<Field>, target: Arc<Field>, root: Elem) -> Self {
        let mut images = Vec::with_capacity(source.degree as usize);
        let mut x = target.one();
        for _ in 0..source.degree {
            images.push(x);
            x = target.mul(x, root);
        }
        Embedding {
            source,
            target,
            images,
            inverse: OnceLock::new(),
        }
    }

    pub fn source(&self) -> &Arc<Field> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Field> {
        &self.target
    }

    pub fn apply(&self, x: Elem) -> Elem {
        let t = &self.target;
        self.source
            .digits(x)
            .iter()
            .zip(&self.images)
            .fold(t.zero(), |acc, (&c, &img)| {
                if c == 0 {
                    acc
                } else {
                    t.add(acc, t.mul(Elem(c), img))
                }
            })
    }

    /// Pulls an element of the image back to the source field.
    pub fn preimage(&self, y: Elem) -> Option<Elem> {
        self.inverse
            .get_or_init(|| self.source.elements().map(|x| (self.apply(x), x)).collect())
            .get(&y)
            .copied()
    }
}

/// Cache of the extensions `F_{q^e}` of a fixed base field and their embeddings.
pub struct Tower {
    p: u64,
    a: u32,
    bound: u64,
    fields: RwLock<BTreeMap<u32, Arc<Field>>>,
    embeddings: RwLock<BTreeMap<(u32, u32), Arc<Embedding>>>,
}

impl fmt::Debug for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tower(F_{}^{})", self.p, self.a)
    }
}

impl Tower {
    pub fn new(p: u64, a: u32) -> Result<Arc<Self>, GfError> {
        Self::with_bound(p, a, DEFAULT_SIZE_BOUND)
    }

    pub fn with_bound(p: u64, a: u32, bound: u64) -> Result<Arc<Self>, GfError> {
        let tower = Tower {
            p,
            a,
            bound,
            fields: RwLock::new(BTreeMap::new()),
            embeddings: RwLock::new(BTreeMap::new()),
        };
        tower.field(1)?;
        Ok(Arc::new(tower))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.a)
    }

    pub fn size_bound(&self) -> u64 {
        self.bound
    }

    /// The base field `F_q`.
    pub fn base(&self) -> Arc<Field> {
        self.field(1).expect("base field is built at construction")
    }

    pub fn field(&self, e: u32) -> Result<Arc<Field>, GfError> {
        if let Some(f) = self.fields.read().unwrap().get(&e) {
            return Ok(f.clone());
        }
        let f = Arc::new(Field::with_bound(self.p, self.a, e, self.bound)?);
        Ok(self
            .fields
            .write()
            .unwrap()
            .entry(e)
            .or_insert(f)
            .clone())
    }

    /// Embedding `F_{q^d} -> F_{q^e}`; compatible with the embeddings of `F_q`.
    pub fn embedding(&self, d: u32, e: u32) -> Result<Arc<Embedding>, GfError> {
        if d == 0 || e == 0 || !e.is_multiple_of(d) {
            return Err(GfError::NoEmbedding { p: self.p, from: d, to: e });
        }
        if let Some(emb) = self.embeddings.read().unwrap().get(&(d, e)) {
            return Ok(emb.clone());
        }
        let source = self.field(d)?;
        let target = self.field(e)?;
        let emb = if d == e {
            let t = if source.degree() >= 2 { Elem(source.p()) } else { source.zero() };
            Embedding::from_root(source.clone(), target, t)
        } else {
            let check = if d > 1 && self.a > 1 {
                Some((self.embedding(1, d)?, self.embedding(1, e)?))
            } else {
                None
            };
            self.find_embedding(source, target, check)?
        };
        let emb = Arc::new(emb);
        Ok(self
            .embeddings
            .write()
            .unwrap()
            .entry((d, e))
            .or_insert(emb)
            .clone())
    }

    fn find_embedding(
        &self,
        source: Arc<Field>,
        target: Arc<Field>,
        check: Option<(Arc<Embedding>, Arc<Embedding>)>,
    ) -> Result<Embedding, GfError> {
        let sub_size = source.size() as u64;
        let cofactor = (target.size() as u64 - 1) / (sub_size - 1);
        let eta = target.pow(target.primitive_element(), cofactor);
        let candidates = std::iter::once(target.zero()).chain(
            (0..sub_size - 1).scan(target.one(), |x, _| {
                let cur = *x;
                *x = target.mul(*x, eta);
                Some(cur)
            }),
        );
        for root in candidates {
            if target.eval_prime_poly(source.modulus(), root) != target.zero() {
                continue;
            }
            let emb = Embedding::from_root(source.clone(), target.clone(), root);
            if let Some((to_source, to_target)) = &check {
                let g = Elem(self.p as u32);
                if emb.apply(to_source.apply(g)) != to_target.apply(g) {
                    continue;
                }
            }
            return Ok(emb);
        }
        Err(GfError::NoEmbedding {
            p: self.p,
            from: source.ext(),
            to: target.ext(),
        })
    }
}

/// Dense polynomials over a prime field, used for modulus selection.
mod fp_poly {
    fn trim(v: &mut Vec<u32>) {
        while v.len() > 1 && *v.last().unwrap() == 0 {
            v.pop();
        }
    }

    fn is_zero(v: &[u32]) -> bool {
        v.iter().all(|&c| c == 0)
    }

    fn inv_mod(x: u32, p: u32) -> u32 {
        let mut acc = 1u64;
        let mut base = x as u64 % p as u64;
        let mut k = p - 2;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base % p as u64;
            }
            base = base * base % p as u64;
            k >>= 1;
        }
        acc as u32
    }

    pub(super) fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = inv_mod(m[dm], p) as u64;
        while r.len() > dm && !is_zero(&r) {
            let k = r.len() - 1;
            let c = r[k] as u64 * lead_inv % p as u64;
            for (i, &mi) in m.iter().enumerate() {
                let idx = k - dm + i;
                r[idx] = ((r[idx] as u64 + p as u64 * p as u64 - c * mi as u64) % p as u64) as u32;
            }
            trim(&mut r);
            if r.len() == 1 {
                break;
            }
        }
        r
    }

    fn mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut prod = vec![0u64; a.len() + b.len()];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
        rem(&prod, m, p)
    }

    fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !is_zero(&y) {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    /// Ben-Or: `f` of degree `n` is irreducible iff `gcd(f, x^{p^i} - x) = 1` for `i <= n/2`.
    pub(super) fn is_irreducible(f: &[u32], p: u32) -> bool {
        let n = f.len() - 1;
        let x = vec![0, 1];
        let mut h = rem(&x, f, p);
        for _ in 1..=n / 2 {
            let mut acc = vec![1u32];
            for _ in 0..p {
                acc = mulmod(&acc, &h, f, p);
            }
            h = acc;
            let mut diff = h.clone();
            diff.resize(diff.len().max(2), 0);
            diff[1] = (diff[1] + p - 1) % p;
            let g = gcd(f, &diff, p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }

    /// First monic irreducible of degree `n`, counting the lower coefficients
    /// `c_0 + c_1 p + ...` upwards from zero.
    pub(super) fn first_irreducible(p: u32, n: usize) -> Vec<u32> {
        let total = (p as u64).pow(n as u32);
        for k in 0..total {
            let mut f = Vec::with_capacity(n + 1);
            let mut v = k;
            for _ in 0..n {
                f.push((v % p as u64) as u32);
                v /= p as u64;
            }
            f.push(1);
            if is_irreducible(&f, p) {
                return f;
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        #[test]
        fn known_moduli() {
            assert_eq!(first_irreducible(2, 1), vec![0, 1]);
            assert_eq!(first_irreducible(2, 2), vec![1, 1, 1]);
            assert_eq!(first_irreducible(2, 3), vec![1, 1, 0, 1]);
            assert_eq!(first_irreducible(3, 2), vec![1, 0, 1]);
            assert!(!is_irreducible(&[1, 0, 1], 2));
            assert!(!is_irreducible(&[0, 0, 1], 3));
        }
    }
}
