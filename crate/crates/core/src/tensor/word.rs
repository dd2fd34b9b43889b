//! Words over the alphabet `{0, 1, …, d}`; letter `0` is the time coordinate.

use std::cmp::Ordering;
use std::fmt;

/// A multi-index. Ordered by length first, then lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: impl Into<Vec<u8>>) -> Self {
        Word(letters.into())
    }

    pub fn letter(l: u8) -> Self {
        Word(vec![l])
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    /// Word without its last letter.
    pub fn prefix(&self) -> Word {
        let n = self.0.len().saturating_sub(1);
        Word(self.0[..n].to_vec())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&self, l: u8) -> Word {
        let mut v = self.0.clone();
        v.push(l);
        Word(v)
    }

    pub fn reversed(&self) -> Word {
        let mut v = self.0.clone();
        v.reverse();
        Word(v)
    }

    pub fn max_letter(&self) -> Option<u8> {
        self.0.iter().copied().max()
    }

    /// All words of length `<= n` over `{0..=d}`, in canonical order.
    pub fn all_up_to(d: usize, n: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        let mut level = vec![Word::empty()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(level.len() * (d + 1));
            for w in &level {
                for l in 0..=d {
                    next.push(w.push(l as u8));
                }
            }
            out.extend(next.iter().cloned());
            level = next;
        }
        out
    }

    /// Dotted text form, `∅` for the empty word.
    pub fn to_text(&self) -> String {
        if self.0.is_empty() {
            return "∅".to_string();
        }
        self.0
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }

    pub fn parse(s: &str) -> Option<Word> {
        let s = s.trim();
        if s == "∅" || s.is_empty() {
            return Some(Word::empty());
        }
        s.split('.')
            .map(|t| t.trim().parse::<u8>().ok())
            .collect::<Option<Vec<_>>>()
            .map(Word)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e({})", self.to_text())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl From<&[u8]> for Word {
    fn from(v: &[u8]) -> Self {
        Word(v.to_vec())
    }
}

impl<const N: usize> From<[u8; N]> for Word {
    fn from(v: [u8; N]) -> Self {
        Word(v.to_vec())
    }
}

/// Shuffle of two words as (word, multiplicity) pairs, via
/// `ua ⧢ vb = (u ⧢ vb)a + (ua ⧢ v)b`.
pub fn shuffle_words(u: &[u8], v: &[u8]) -> Vec<(Vec<u8>, u64)> {
    let mut acc: std::collections::BTreeMap<Vec<u8>, u64> = Default::default();
    shuffle_rec(u, v, &mut acc);
    acc.into_iter().collect()
}

fn shuffle_rec(u: &[u8], v: &[u8], acc: &mut std::collections::BTreeMap<Vec<u8>, u64>) {
    if u.is_empty() || v.is_empty() {
        let w: Vec<u8> = if u.is_empty() { v.to_vec() } else { u.to_vec() };
        *acc.entry(w).or_insert(0) += 1;
        return;
    }
    let (ua, a) = (&u[..u.len() - 1], u[u.len() - 1]);
    let (vb, b) = (&v[..v.len() - 1], v[v.len() - 1]);
    let mut left = Default::default();
    shuffle_rec(ua, v, &mut left);
    for (mut w, c) in left {
        w.push(a);
        *acc.entry(w).or_insert(0) += c;
    }
    let mut right = Default::default();
    shuffle_rec(u, vb, &mut right);
    for (mut w, c) in right {
        w.push(b);
        *acc.entry(w).or_insert(0) += c;
    }
}
