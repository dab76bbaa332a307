//! Dense bit rows and row reduction over GF(2).

use std::collections::BTreeMap;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct BitRow {
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        BitRow {
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut r = Self::zeros(len);
        r.set(i);
        r
    }

    pub fn from_ones(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut r = Self::zeros(len);
        for i in ones {
            r.flip(i);
        }
        r
    }

    fn grow(&mut self, i: usize) {
        let w = i / 64 + 1;
        if self.words.len() < w {
            self.words.resize(w, 0);
        }
    }

    pub fn set(&mut self, i: usize) {
        self.grow(i);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn flip(&mut self, i: usize) {
        self.grow(i);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| (w >> (i % 64)) & 1 == 1)
    }

    pub fn xor(&mut self, other: &BitRow) {
        if self.words.len() < other.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    /// Highest set bit.
    pub fn lead(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + 63 - w.leading_zeros() as usize)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            (0..64)
                .filter(move |b| (w >> b) & 1 == 1)
                .map(move |b| i * 64 + b)
        })
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Row echelon form keyed by leading bit, with an optional tag per row
/// recording which input combination produced it.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: BTreeMap<usize, (BitRow, BitRow)>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rows<'a>(rows: impl IntoIterator<Item = &'a BitRow>) -> Self {
        let mut e = Self::new();
        for r in rows {
            e.insert(r.clone());
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `row` against the basis; returns the remainder and the tag
    /// combination consumed.
    pub fn reduce(&self, mut row: BitRow, mut tag: BitRow) -> (BitRow, BitRow) {
        while let Some(l) = row.lead() {
            match self.rows.get(&l) {
                Some((r, t)) => {
                    row.xor(r);
                    tag.xor(t);
                }
                None => break,
            }
        }
        (row, tag)
    }

    pub fn contains(&self, row: &BitRow) -> bool {
        self.reduce(row.clone(), BitRow::default()).0.is_zero()
    }

    /// Inserts a row; returns false if it was dependent.
    pub fn insert(&mut self, row: BitRow) -> bool {
        self.insert_tagged(row, BitRow::default()).is_none()
    }

    /// Inserts a tagged row. A dependent row yields `Some(tag)`, the
    /// combination of inputs summing to zero.
    pub fn insert_tagged(&mut self, row: BitRow, tag: BitRow) -> Option<BitRow> {
        let (r, t) = self.reduce(row, tag);
        match r.lead() {
            Some(l) => {
                self.rows.insert(l, (r, t));
                None
            }
            None => Some(t),
        }
    }
}

pub fn rank(rows: &[BitRow]) -> usize {
    Echelon::from_rows(rows).rank()
}

/// Kernel of the map sending basis vector `i` to `images[i]`, returned as
/// combinations over the domain.
pub fn kernel(images: &[BitRow]) -> Vec<BitRow> {
    let n = images.len();
    let mut e = Echelon::new();
    let mut out = Vec::new();
    for (i, img) in images.iter().enumerate() {
        if let Some(t) = e.insert_tagged(img.clone(), BitRow::unit(n, i)) {
            out.push(t);
        }
    }
    out
}

/// Solves `sum_j x_j * cols[j] = rhs`, returning one solution.
pub fn solve(cols: &[BitRow], rhs: &BitRow) -> Option<BitRow> {
    let n = cols.len();
    let mut e = Echelon::new();
    for (j, c) in cols.iter().enumerate() {
        e.insert_tagged(c.clone(), BitRow::unit(n, j));
    }
    let (r, t) = e.reduce(rhs.clone(), BitRow::zeros(n));
    r.is_zero().then_some(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(bits: &[usize]) -> BitRow {
        BitRow::from_ones(8, bits.iter().copied())
    }

    #[test]
    fn rank_and_kernel() {
        let rows = vec![row(&[0, 1]), row(&[1, 2]), row(&[0, 2])];
        assert_eq!(rank(&rows), 2);
        let k = kernel(&rows);
        assert_eq!(k.len(), 1);
        assert_eq!(k[0], BitRow::from_ones(3, [0, 1, 2]));
    }

    #[test]
    fn solve_finds_combination() {
        let cols = vec![row(&[0]), row(&[1]), row(&[0, 1])];
        let x = solve(&cols, &row(&[0, 1])).unwrap();
        let mut acc = BitRow::default();
        for j in x.ones() {
            acc.xor(&cols[j]);
        }
        assert_eq!(acc, row(&[0, 1]));
        assert!(solve(&cols, &row(&[3])).is_none());
    }

    #[test]
    fn wide_rows() {
        let mut r = BitRow::zeros(200);
        r.set(130);
        r.set(3);
        assert_eq!(r.lead(), Some(130));
        assert_eq!(r.ones().collect::<Vec<_>>(), vec![3, 130]);
    }

    proptest! {
        #[test]
        fn rank_nullity(bits in proptest::collection::vec(0u64..256, 1..12)) {
            let rows: Vec<BitRow> = bits.iter()
                .map(|b| BitRow::from_ones(8, (0..8).filter(|i| (b >> i) & 1 == 1)))
                .collect();
            prop_assert_eq!(rank(&rows) + kernel(&rows).len(), rows.len());
        }
    }
}
