//! Bit-set subsets of a ground set `0..n` and combination enumeration.
//!
//! Subsets are value types. Up to 128 elements live inline; wider ground sets
//! spill to the heap. The representation is normalized (no trailing zero
//! words) so derived equality and hashing are structural.

use std::cmp::Ordering;
use std::fmt;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// Element identifier within a ground set.
pub type Element = usize;

const WORD: usize = 64;

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Subset {
    words: SmallVec<[u64; 2]>,
}

impl Subset {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The full ground set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        let mut s = Self::empty();
        for w in 0..n / WORD {
            s.set_word(w, u64::MAX);
        }
        let rem = n % WORD;
        if rem > 0 {
            s.set_word(n / WORD, (1u64 << rem) - 1);
        }
        s
    }

    pub fn singleton(x: Element) -> Self {
        let mut s = Self::empty();
        s.insert(x);
        s
    }

    /// Builds a subset from the low bits of `mask`.
    pub fn from_mask(mask: u64) -> Self {
        let mut s = Self::empty();
        s.set_word(0, mask);
        s
    }

    /// Low 64 bits as a mask. Only meaningful when every element is below 64.
    pub fn to_mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    fn set_word(&mut self, idx: usize, value: u64) {
        if idx >= self.words.len() {
            if value == 0 {
                return;
            }
            self.words.resize(idx + 1, 0);
        }
        self.words[idx] = value;
        self.normalize();
    }

    fn normalize(&mut self) {
        while let Some(&0) = self.words.last() {
            self.words.pop();
        }
    }

    pub fn contains(&self, x: Element) -> bool {
        self.words.get(x / WORD).is_some_and(|w| w & (1u64 << (x % WORD)) != 0)
    }

    /// Inserts `x`; returns whether it was absent.
    pub fn insert(&mut self, x: Element) -> bool {
        let idx = x / WORD;
        if idx >= self.words.len() {
            self.words.resize(idx + 1, 0);
        }
        let bit = 1u64 << (x % WORD);
        let fresh = self.words[idx] & bit == 0;
        self.words[idx] |= bit;
        fresh
    }

    /// Removes `x`; returns whether it was present.
    pub fn remove(&mut self, x: Element) -> bool {
        let idx = x / WORD;
        let Some(w) = self.words.get_mut(idx) else {
            return false;
        };
        let bit = 1u64 << (x % WORD);
        let present = *w & bit != 0;
        *w &= !bit;
        self.normalize();
        present
    }

    pub fn with(&self, x: Element) -> Self {
        let mut s = self.clone();
        s.insert(x);
        s
    }

    pub fn without(&self, x: Element) -> Self {
        let mut s = self.clone();
        s.remove(x);
        s
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// One past the largest element, or 0 for the empty set.
    pub fn span(&self) -> usize {
        match self.words.last() {
            None => 0,
            Some(&w) => (self.words.len() - 1) * WORD + (WORD - w.leading_zeros() as usize),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = long.clone();
        for (a, b) in out.words.iter_mut().zip(short.words.iter()) {
            *a |= b;
        }
        out
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut out = Subset {
            words: self.words.iter().zip(other.words.iter()).map(|(a, b)| a & b).collect(),
        };
        out.normalize();
        out
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(other.words.iter()) {
            *a &= !b;
        }
        out.normalize();
        out
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.words.iter().zip(other.words.iter()).all(|(a, b)| a & b == 0)
    }

    /// Elements in ascending order.
    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            idx: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<Element> {
        self.iter().collect()
    }

    pub fn first(&self) -> Option<Element> {
        self.iter().next()
    }
}

impl Ord for Subset {
    /// Lexicographic order on the ascending element sequences, so
    /// `{0, 5} < {1}` and `{0} < {0, 1}`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for Subset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<Element> for Subset {
    fn from_iter<I: IntoIterator<Item = Element>>(iter: I) -> Self {
        let mut s = Subset::empty();
        s.extend(iter);
        s
    }
}

impl Extend<Element> for Subset {
    fn extend<I: IntoIterator<Item = Element>>(&mut self, iter: I) {
        for x in iter {
            self.insert(x);
        }
    }
}

impl<'a> IntoIterator for &'a Subset {
    type Item = Element;
    type IntoIter = Iter<'a>;
    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

impl Serialize for Subset {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for Subset {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Vec::<Element>::deserialize(deserializer)?;
        Ok(v.into_iter().collect())
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    idx: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = Element;

    fn next(&mut self) -> Option<Element> {
        loop {
            if self.current != 0 {
                let tz = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.idx * WORD + tz);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.idx];
        }
    }
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Calls `visit` on every `r`-subset of `pool` in lexicographic order of the
/// chosen positions. `pool` is expected to be ascending, which makes the
/// visiting order lexicographic in element ids too. Stops early when
/// `visit` breaks.
pub fn for_each_combination<B>(
    pool: &[Element],
    r: usize,
    mut visit: impl FnMut(&Subset) -> ControlFlow<B>,
) -> Option<B> {
    let n = pool.len();
    if r > n {
        return None;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        let subset: Subset = idx.iter().map(|&i| pool[i]).collect();
        if let ControlFlow::Break(b) = visit(&subset) {
            return Some(b);
        }
        // advance to next combination
        let mut i = r;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if idx[i] != i + n - r {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every `r`-subset of `pool`, collected in lexicographic order.
pub fn combinations(pool: &[Element], r: usize) -> Vec<Subset> {
    let mut out = Vec::new();
    for_each_combination::<()>(pool, r, |s| {
        out.push(s.clone());
        ControlFlow::Continue(())
    });
    out
}
