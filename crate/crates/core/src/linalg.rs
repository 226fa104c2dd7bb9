//! Gaussian elimination over a [`Field`], plus vectors and row spaces over the
//! prime field with a packed-bit representation for `p = 2`.

use rand::Rng;

use crate::gf::{Elem, Field};

/// Reduces `rows` to reduced row echelon form in place, dropping zero rows.
/// Returns the pivot column of each remaining row.
pub fn rref(field: &Field, rows: &mut Vec<Vec<Elem>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(pivot) = (r..rows.len()).find(|&i| rows[i][col] != field.zero()) else {
            continue;
        };
        rows.swap(r, pivot);
        let inv = field.inv(rows[r][col]).unwrap();
        for x in rows[r].iter_mut() {
            *x = field.mul(*x, inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col] == field.zero() {
                continue;
            }
            let c = row[col];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = field.sub(*x, field.mul(c, y));
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank(field: &Field, rows: &[Vec<Elem>]) -> usize {
    let mut m = rows.to_vec();
    rref(field, &mut m).len()
}

/// Basis of `{v : row · v = 0 for every row}` in `field^ncols`.
pub fn kernel(field: &Field, rows: &[Vec<Elem>], ncols: usize) -> Vec<Vec<Elem>> {
    let mut m: Vec<Vec<Elem>> = rows.to_vec();
    let pivots = rref(field, &mut m);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![field.zero(); ncols];
            v[fc] = field.one();
            for (row, &pc) in m.iter().zip(&pivots) {
                v[pc] = field.neg(row[fc]);
            }
            v
        })
        .collect()
}

/// Whether `v` lies in the span of `rows`.
pub fn in_row_space(field: &Field, rows: &[Vec<Elem>], v: &[Elem]) -> bool {
    if v.iter().all(|&x| x == field.zero()) {
        return true;
    }
    let before = rank(field, rows);
    let mut ext = rows.to_vec();
    ext.push(v.to_vec());
    rank(field, &ext) == before
}

pub fn dot(field: &Field, u: &[Elem], v: &[Elem]) -> Elem {
    u.iter()
        .zip(v)
        .fold(field.zero(), |acc, (&x, &y)| field.add(acc, field.mul(x, y)))
}

/// A vector over `F_p`; packed bits when `p = 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FpVec {
    Bits { len: usize, words: Vec<u64> },
    Digits { p: u32, digits: Vec<u32> },
}

impl FpVec {
    pub fn zeros(p: u32, len: usize) -> Self {
        if p == 2 {
            FpVec::Bits { len, words: vec![0; len.div_ceil(64)] }
        } else {
            FpVec::Digits { p, digits: vec![0; len] }
        }
    }

    pub fn from_digits(p: u32, digits: &[u32]) -> Self {
        let mut v = Self::zeros(p, digits.len());
        for (i, &d) in digits.iter().enumerate() {
            v.set(i, d % p);
        }
        v
    }

    /// The `index`-th vector in the base-`p` counting order (digit `i` has weight `p^i`).
    pub fn from_index(p: u32, len: usize, mut index: u64) -> Self {
        match Self::zeros(p, len) {
            FpVec::Bits { len, mut words } => {
                if let Some(w) = words.first_mut() {
                    *w = index;
                }
                FpVec::Bits { len, words }
            }
            FpVec::Digits { p, mut digits } => {
                for d in digits.iter_mut() {
                    *d = (index % p as u64) as u32;
                    index /= p as u64;
                }
                FpVec::Digits { p, digits }
            }
        }
    }

    pub fn random<R: Rng + ?Sized>(p: u32, len: usize, rng: &mut R) -> Self {
        match Self::zeros(p, len) {
            FpVec::Bits { len, mut words } => {
                for (i, w) in words.iter_mut().enumerate() {
                    let bits = (len - 64 * i).min(64);
                    *w = rng.gen::<u64>();
                    if bits < 64 {
                        *w &= (1u64 << bits) - 1;
                    }
                }
                FpVec::Bits { len, words }
            }
            FpVec::Digits { p, mut digits } => {
                for d in digits.iter_mut() {
                    *d = rng.gen_range(0..p);
                }
                FpVec::Digits { p, digits }
            }
        }
    }

    pub fn p(&self) -> u32 {
        match self {
            FpVec::Bits { .. } => 2,
            FpVec::Digits { p, .. } => *p,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            FpVec::Bits { len, .. } => *len,
            FpVec::Digits { digits, .. } => digits.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> u32 {
        match self {
            FpVec::Bits { words, .. } => ((words[i / 64] >> (i % 64)) & 1) as u32,
            FpVec::Digits { digits, .. } => digits[i],
        }
    }

    pub fn set(&mut self, i: usize, v: u32) {
        match self {
            FpVec::Bits { words, .. } => {
                let mask = 1u64 << (i % 64);
                if v & 1 == 1 {
                    words[i / 64] |= mask;
                } else {
                    words[i / 64] &= !mask;
                }
            }
            FpVec::Digits { p, digits } => digits[i] = v % *p,
        }
    }

    pub fn to_digits(&self) -> Vec<u32> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FpVec::Bits { words, .. } => words.iter().all(|&w| w == 0),
            FpVec::Digits { digits, .. } => digits.iter().all(|&d| d == 0),
        }
    }

    pub fn dot(&self, other: &FpVec) -> u32 {
        match (self, other) {
            (FpVec::Bits { words: a, .. }, FpVec::Bits { words: b, .. }) => {
                a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum::<u32>() & 1
            }
            (FpVec::Digits { p, digits: a }, FpVec::Digits { digits: b, .. }) => {
                let p = *p as u64;
                (a.iter().zip(b).map(|(&x, &y)| x as u64 * y as u64).sum::<u64>() % p) as u32
            }
            _ => panic!("dot product of vectors over different prime fields"),
        }
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, other: &FpVec, c: u32) {
        match (self, other) {
            (FpVec::Bits { words: a, .. }, FpVec::Bits { words: b, .. }) => {
                if c & 1 == 1 {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x ^= y;
                    }
                }
            }
            (FpVec::Digits { p, digits: a }, FpVec::Digits { digits: b, .. }) => {
                let p = *p;
                for (x, &y) in a.iter_mut().zip(b) {
                    *x = ((*x as u64 + c as u64 * y as u64) % p as u64) as u32;
                }
            }
            _ => panic!("adding vectors over different prime fields"),
        }
    }

    fn scale(&mut self, c: u32) {
        if let FpVec::Digits { p, digits } = self {
            for x in digits.iter_mut() {
                *x = ((*x as u64 * c as u64) % *p as u64) as u32;
            }
        }
    }
}

fn inv_mod_p(x: u32, p: u32) -> u32 {
    (1..p).find(|&y| (x as u64 * y as u64) % p as u64 == 1).expect("nonzero residue")
}

/// A row space over `F_p`, kept in reduced echelon form.
#[derive(Clone, Debug)]
pub struct FpRowSpace {
    p: u32,
    cols: usize,
    rows: Vec<FpVec>,
    pivots: Vec<usize>,
}

impl FpRowSpace {
    pub fn new(p: u32, cols: usize) -> Self {
        FpRowSpace { p, cols, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn from_rows(p: u32, cols: usize, rows: impl IntoIterator<Item = FpVec>) -> Self {
        let mut space = Self::new(p, cols);
        for r in rows {
            space.insert(r);
        }
        space
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[FpVec] {
        &self.rows
    }

    /// Reduces `v` against the current rows.
    pub fn reduce(&self, v: &mut FpVec) {
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let c = v.get(pc);
            if c != 0 {
                v.add_scaled(row, self.p - c);
            }
        }
    }

    /// Adds `v` to the span; returns whether the rank grew.
    pub fn insert(&mut self, mut v: FpVec) -> bool {
        assert_eq!(v.len(), self.cols);
        self.reduce(&mut v);
        let Some(pc) = (0..self.cols).find(|&i| v.get(i) != 0) else {
            return false;
        };
        let lead = v.get(pc);
        if lead != 1 {
            v.scale(inv_mod_p(lead, self.p));
        }
        for row in self.rows.iter_mut() {
            let c = row.get(pc);
            if c != 0 {
                row.add_scaled(&v, self.p - c);
            }
        }
        self.rows.push(v);
        self.pivots.push(pc);
        true
    }

    pub fn contains(&self, v: &FpVec) -> bool {
        let mut w = v.clone();
        self.reduce(&mut w);
        w.is_zero()
    }

    /// Whether every row is orthogonal to `x`, i.e. `x` lies in the common kernel.
    pub fn annihilates(&self, x: &FpVec) -> bool {
        self.rows.iter().all(|r| r.dot(x) == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_single_row_over_f2() {
        let f = Field::new(2, 1, 1).unwrap();
        let k = kernel(&f, &[vec![Elem(1), Elem(1), Elem(0)]], 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!(dot(&f, &[Elem(1), Elem(1), Elem(0)], v), f.zero());
        }
    }

    #[test]
    fn rank_and_row_space_over_extension() {
        let f = Field::new(2, 1, 3).unwrap();
        let g = f.primitive_element();
        let r1 = vec![f.one(), g, f.mul(g, g)];
        let r2: Vec<Elem> = r1.iter().map(|&x| f.mul(x, g)).collect();
        assert_eq!(rank(&f, &[r1.clone(), r2.clone()]), 1);
        assert!(in_row_space(&f, std::slice::from_ref(&r1), &r2));
        assert!(!in_row_space(&f, &[r1], &[f.one(), f.zero(), f.zero()]));
    }

    #[test]
    fn packed_and_digit_row_spaces_agree_on_f2_data() {
        let rows = [[1, 0, 1, 1], [0, 1, 1, 0], [1, 1, 0, 1]];
        let packed = FpRowSpace::from_rows(2, 4, rows.iter().map(|r| FpVec::from_digits(2, r)));
        assert_eq!(packed.rank(), 2);
        assert!(packed.contains(&FpVec::from_digits(2, &[1, 1, 0, 1])));
        assert!(!packed.contains(&FpVec::from_digits(2, &[0, 0, 0, 1])));
    }

    #[test]
    fn row_space_mod_three() {
        let rows = [[1, 2, 0], [2, 1, 0]];
        let s = FpRowSpace::from_rows(3, 3, rows.iter().map(|r| FpVec::from_digits(3, r)));
        assert_eq!(s.rank(), 1);
        assert!(s.annihilates(&FpVec::from_digits(3, &[1, 1, 2])));
        assert!(!s.annihilates(&FpVec::from_digits(3, &[1, 0, 0])));
    }

    #[test]
    fn index_vectors_enumerate_distinct_values() {
        let all: std::collections::HashSet<_> =
            (0..27).map(|i| FpVec::from_index(3, 3, i)).collect();
        assert_eq!(all.len(), 27);
        assert_eq!(FpVec::from_index(2, 5, 0b10110).to_digits(), vec![0, 1, 1, 0, 1]);
    }
}
