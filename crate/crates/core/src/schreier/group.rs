use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::word::{free_reduce, GroupWord};

pub const MAX_EXPONENT: u32 = 10_000;
pub const MAX_WORD_LEN: usize = 1_000_000;
pub const DEFAULT_BALL_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupKind {
    Free { rank: usize },
    /// `<a1, b1, .., ag, bg | [a1, b1] .. [ag, bg]>`.
    Surface { genus: usize },
    FreeAbelian { rank: usize },
}

/// A finitely generated group with a fixed generating set and a solution to
/// its word problem.
#[derive(Clone, Debug)]
pub struct MarkedGroup {
    kind: GroupKind,
    names: Vec<String>,
    /// Cyclic rotations of the relator and its inverse (surface groups only).
    rotations: Vec<Vec<i8>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallElement {
    pub word: GroupWord,
    pub length: usize,
}

impl MarkedGroup {
    pub fn new(kind: GroupKind) -> Result<Self> {
        match kind {
            GroupKind::Free { rank } | GroupKind::FreeAbelian { rank } => {
                if !(1..=26).contains(&rank) {
                    return Err(Error::invalid("rank must be between 1 and 26"));
                }
                let names = (0..rank).map(|i| char::from(b'a' + i as u8).to_string()).collect();
                Ok(Self { kind, names, rotations: Vec::new() })
            }
            GroupKind::Surface { genus } => {
                if !(2..=13).contains(&genus) {
                    return Err(Error::invalid("surface genus must be between 2 and 13"));
                }
                let names = (1..=genus).flat_map(|j| [format!("a{j}"), format!("b{j}")]).collect();
                let relator: Vec<i8> = (0..genus as i8)
                    .flat_map(|j| {
                        let (a, b) = (2 * j + 1, 2 * j + 2);
                        [a, b, -a, -b]
                    })
                    .collect();
                let inverse: Vec<i8> = relator.iter().rev().map(|l| -l).collect();
                let mut rotations = Vec::new();
                for r in [&relator, &inverse] {
                    for s in 0..r.len() {
                        rotations.push(r[s..].iter().chain(&r[..s]).copied().collect());
                    }
                }
                Ok(Self { kind, names, rotations })
            }
        }
    }

    pub fn free(rank: usize) -> Result<Self> {
        Self::new(GroupKind::Free { rank })
    }

    pub fn surface(genus: usize) -> Result<Self> {
        Self::new(GroupKind::Surface { genus })
    }

    pub fn free_abelian(rank: usize) -> Result<Self> {
        Self::new(GroupKind::FreeAbelian { rank })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    /// Number of generators, which is also the rank of the abelianization.
    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn generator_names(&self) -> &[String] {
        &self.names
    }

    /// All letters in the order `g1, g1^-1, g2, g2^-1, ...`.
    pub fn letters(&self) -> Vec<i8> {
        (1..=self.rank() as i8).flat_map(|g| [g, -g]).collect()
    }

    pub fn relator(&self) -> Option<GroupWord> {
        self.rotations.first().map(|r| GroupWord::from_letters(r.clone()))
    }

    pub fn word(&self, letters: &[i8]) -> Result<GroupWord> {
        let rank = self.rank() as i8;
        if let Some(bad) = letters.iter().find(|&&l| l == 0 || l.abs() > rank) {
            return Err(Error::UnknownLetter(bad.to_string()));
        }
        Ok(self.reduce_letters(letters))
    }

    pub fn reduce(&self, w: &GroupWord) -> GroupWord {
        self.reduce_letters(w.letters())
    }

    fn reduce_letters(&self, letters: &[i8]) -> GroupWord {
        GroupWord::from_letters(match self.kind {
            GroupKind::Free { .. } => free_reduce(letters),
            GroupKind::FreeAbelian { .. } => {
                let ab = self.abelianize_letters(letters);
                ab.iter()
                    .enumerate()
                    .flat_map(|(i, &e)| {
                        let g = (i + 1) as i8;
                        std::iter::repeat(if e > 0 { g } else { -g }).take(e.unsigned_abs() as usize)
                    })
                    .collect()
            }
            GroupKind::Surface { .. } => self.dehn_reduce(letters),
        })
    }

    /// Dehn's algorithm: replace any subword that is more than half of a cyclic
    /// conjugate of the relator (or its inverse) by the inverse of the rest.
    fn dehn_reduce(&self, letters: &[i8]) -> Vec<i8> {
        let mut w = free_reduce(letters);
        let len = self.rotations[0].len();
        let half = len / 2;
        'scan: loop {
            for i in 0..w.len() {
                for rot in &self.rotations {
                    let common = w[i..].iter().zip(rot).take_while(|(a, b)| a == b).count();
                    if common > half {
                        let replacement: Vec<i8> = rot[common..].iter().rev().map(|l| -l).collect();
                        w.splice(i..i + common, replacement);
                        w = free_reduce(&w);
                        continue 'scan;
                    }
                }
            }
            return w;
        }
    }

    pub fn multiply(&self, u: &GroupWord, v: &GroupWord) -> GroupWord {
        self.reduce(&u.concat(v))
    }

    /// `u v u^-1`.
    pub fn conjugate(&self, u: &GroupWord, v: &GroupWord) -> GroupWord {
        self.reduce(&u.concat(v).concat(&u.inverse()))
    }

    pub fn is_identity(&self, w: &GroupWord) -> bool {
        self.reduce(w).is_empty()
    }

    pub fn equal(&self, u: &GroupWord, v: &GroupWord) -> bool {
        self.is_identity(&u.concat(&v.inverse()))
    }

    pub fn abelianize(&self, w: &GroupWord) -> Vec<i64> {
        self.abelianize_letters(w.letters())
    }

    fn abelianize_letters(&self, letters: &[i8]) -> Vec<i64> {
        let mut v = vec![0i64; self.rank()];
        for &l in letters {
            v[l.unsigned_abs() as usize - 1] += l.signum() as i64;
        }
        v
    }

    pub fn format(&self, w: &GroupWord) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        w.letters()
            .iter()
            .map(|&l| {
                let name = &self.names[l.unsigned_abs() as usize - 1];
                if l > 0 {
                    name.clone()
                } else {
                    name.to_uppercase()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses words such as `a b A B`, `a1*b1^-2`, or `1` for the identity.
    /// Uppercase names denote inverses; separators are whitespace and `*`.
    pub fn parse(&self, s: &str) -> Result<GroupWord> {
        let bytes = s.as_bytes();
        let mut letters: Vec<i8> = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_whitespace() || c == b'*' {
                i += 1;
                continue;
            }
            if c == b'1' && !bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphanumeric()) {
                i += 1;
                continue;
            }
            if !c.is_ascii_alphabetic() {
                return Err(Error::Parse(format!("unexpected character {:?} at byte {i}", char::from(c))));
            }
            let start = i;
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let token = &s[start..i];
            let lower = token.to_ascii_lowercase();
            let gen = self
                .names
                .iter()
                .position(|n| *n == lower)
                .ok_or_else(|| Error::UnknownLetter(token.to_string()))?;
            let mut letter = (gen + 1) as i8;
            if c.is_ascii_uppercase() {
                letter = -letter;
            }
            let mut exponent: i64 = 1;
            if bytes.get(i) == Some(&b'^') {
                i += 1;
                let estart = i;
                if matches!(bytes.get(i), Some(b'-') | Some(b'+')) {
                    i += 1;
                }
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                exponent = s[estart..i]
                    .parse::<i64>()
                    .ok()
                    .filter(|e| e.unsigned_abs() <= MAX_EXPONENT as u64)
                    .ok_or_else(|| Error::Parse(format!("bad exponent {:?}", &s[estart..i])))?;
            }
            if exponent < 0 {
                letter = -letter;
            }
            let count = exponent.unsigned_abs() as usize;
            if letters.len() + count > MAX_WORD_LEN {
                return Err(Error::Parse("word too long".into()));
            }
            letters.extend(std::iter::repeat(letter).take(count));
        }
        Ok(self.reduce_letters(&letters))
    }

    /// Nontrivial elements of word length `<= r`, in breadth-first order, each
    /// represented by its shortlex-first word.
    pub fn ball(&self, r: usize, budget: u64) -> Result<Vec<BallElement>> {
        let mut elements: Vec<BallElement> = Vec::new();
        let mut seen: HashSet<GroupWord> = HashSet::new();
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        let canonical = !matches!(self.kind, GroupKind::Surface { .. });
        seen.insert(GroupWord::identity());
        let mut frontier: Vec<GroupWord> = vec![GroupWord::identity()];
        for depth in 1..=r {
            let mut next = Vec::new();
            for w in &frontier {
                for l in self.letters() {
                    let cand = self.reduce(&w.concat(&GroupWord::from_letters(vec![l])));
                    let fresh = if canonical {
                        seen.insert(cand.clone())
                    } else if cand.is_empty() {
                        false
                    } else {
                        // Dehn normal forms are not unique: compare within an abelianization class.
                        let bucket = buckets.entry(self.abelianize(&cand)).or_default();
                        let known = bucket.iter().any(|&idx| self.equal(&cand, &elements[idx].word));
                        if !known {
                            bucket.push(elements.len());
                        }
                        !known
                    };
                    if fresh {
                        if elements.len() as u64 >= budget {
                            return Err(Error::Budget { what: "ball", needed: elements.len() as u64 + 1, limit: budget });
                        }
                        elements.push(BallElement { word: cand.clone(), length: depth });
                        next.push(cand);
                    }
                }
            }
            frontier = next;
        }
        Ok(elements)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_examples() {
        let f2 = MarkedGroup::free(2).unwrap();
        assert_eq!(f2.parse("a b B").unwrap(), f2.word(&[1]).unwrap());
        let s2 = MarkedGroup::surface(2).unwrap();
        assert!(s2.parse("a1 b1 A1 B1 a2 b2 A2 B2").unwrap().is_empty());
        let comm = s2.parse("a1 b1 A1 B1").unwrap();
        assert_eq!(comm.letters(), &[1, 2, -1, -2]);
    }

    #[test]
    fn dehn_shortens_long_relator_pieces() {
        let s2 = MarkedGroup::surface(2).unwrap();
        // Five letters of the relator equal the inverse of the remaining three.
        let w = s2.parse("a1 b1 A1 B1 a2").unwrap();
        assert_eq!(w, s2.parse("b2 a2 B2").unwrap());
        let r = s2.relator().unwrap();
        let x = s2.parse("a1 a2 b1").unwrap();
        assert!(s2.is_identity(&x.concat(&r).concat(&x.inverse())));
    }

    #[test]
    fn parse_forms_and_errors() {
        let f2 = MarkedGroup::free(2).unwrap();
        assert_eq!(f2.parse("a^3 b^-2").unwrap().letters(), &[1, 1, 1, -2, -2]);
        assert_eq!(f2.parse("A^-1").unwrap().letters(), &[1]);
        assert!(f2.parse("1").unwrap().is_empty());
        assert!(f2.parse("").unwrap().is_empty());
        assert_eq!(f2.parse("c"), Err(Error::UnknownLetter("c".into())));
        assert!(f2.parse("a^99999").is_err());
        assert!(f2.parse("a#").is_err());
        let s2 = MarkedGroup::surface(2).unwrap();
        assert_eq!(s2.parse("a1*B2").unwrap().letters(), &[1, -4]);
        assert!(s2.parse("a").is_err());
    }

    #[test]
    fn ball_sizes() {
        let f2 = MarkedGroup::free(2).unwrap();
        assert_eq!(f2.ball(1, DEFAULT_BALL_BUDGET).unwrap().len(), 4);
        assert_eq!(f2.ball(2, DEFAULT_BALL_BUDGET).unwrap().len(), 16);
        assert_eq!(f2.ball(3, DEFAULT_BALL_BUDGET).unwrap().len(), 52);
        let s2 = MarkedGroup::surface(2).unwrap();
        assert_eq!(s2.ball(1, DEFAULT_BALL_BUDGET).unwrap().len(), 8);
        // Below length 4 no two reduced words coincide (the relator has length 8);
        // at length 4 the 16 cyclic relator readings identify 8 pairs of words.
        assert_eq!(s2.ball(3, DEFAULT_BALL_BUDGET).unwrap().len(), 8 + 56 + 392);
        assert_eq!(s2.ball(4, DEFAULT_BALL_BUDGET).unwrap().len(), 8 + 56 + 392 + 2744 - 8);
        let z2 = MarkedGroup::free_abelian(2).unwrap();
        // Lattice points of l1 norm between 1 and 2.
        assert_eq!(z2.ball(2, DEFAULT_BALL_BUDGET).unwrap().len(), 12);
        assert!(matches!(f2.ball(5, 100), Err(Error::Budget { .. })));
    }
}
