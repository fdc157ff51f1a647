use std::fmt;

/// A word over generators `1..=rank`; letter `-i` is the inverse of generator `i`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupWord(Vec<i8>);

/// Letters sort as `g1 < g1^-1 < g2 < g2^-1 < ...`.
pub fn letter_rank(l: i8) -> u16 {
    2 * (l.unsigned_abs() as u16 - 1) + u16::from(l < 0)
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord(Vec::new())
    }

    pub fn from_letters(letters: Vec<i8>) -> Self {
        debug_assert!(letters.iter().all(|&l| l != 0));
        GroupWord(letters)
    }

    pub fn letters(&self) -> &[i8] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<i8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord(self.0.iter().rev().map(|l| -l).collect())
    }

    /// Concatenation followed by free reduction at the seam.
    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        let mut out = self.0.clone();
        for &l in &other.0 {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        GroupWord(out)
    }

    /// Shortlex comparison in the letter order of [`letter_rank`].
    pub fn shortlex_cmp(&self, other: &GroupWord) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            let a = self.0.iter().map(|&l| letter_rank(l));
            let b = other.0.iter().map(|&l| letter_rank(l));
            a.cmp(b)
        })
    }
}

/// Cancel adjacent inverse pairs.
pub fn free_reduce(letters: &[i8]) -> Vec<i8> {
    let mut out: Vec<i8> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

impl fmt::Display for GroupWord {
    /// Generic rendering `g1 g2^-1 ...`; groups provide named rendering.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&l| if l > 0 { format!("g{l}") } else { format!("g{}^-1", -l) })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}
