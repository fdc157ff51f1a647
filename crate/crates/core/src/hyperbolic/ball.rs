use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::moebius::{dist_unchecked, Moebius};
use super::octagon::{circumradius, OctagonGroup, I};

pub const DEFAULT_ELEMENT_BUDGET: u64 = 4_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct BallEntry {
    pub word: Vec<i8>,
    pub matrix: Moebius,
    /// `d(i, gamma i)`.
    pub displacement: f64,
    pub chi: i64,
}

/// Nontrivial group elements moving `i` by at most `cutoff`, sorted by displacement.
#[derive(Clone, Debug)]
pub struct GroupBall {
    pub entries: Vec<BallEntry>,
    pub cutoff: f64,
    pub margin: f64,
    /// Breadth-first expansion ran until no new element within `cutoff + margin`
    /// appeared; with `margin >= circumradius` every element within `cutoff` is
    /// reachable through such elements.
    pub saturated: bool,
}

impl GroupBall {
    pub fn complete(&self) -> bool {
        self.saturated && self.margin >= circumradius()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Orbit points are at least twice the inradius apart, so an element is
/// identified by `gamma i`; cells of about half a unit in `(ln y, x / y)` keep
/// lookups local.
struct OrbitIndex {
    cells: HashMap<(i64, i64), Vec<usize>>,
}

const CELL: f64 = 0.25;

impl OrbitIndex {
    fn cell(z: Complex64, row: i64) -> (i64, i64) {
        let scale = (row as f64 * CELL).exp();
        (row, (z.re / (CELL * scale)).floor() as i64)
    }

    fn row(z: Complex64) -> i64 {
        (z.im.ln() / CELL).floor() as i64
    }

    fn find(&self, z: Complex64, points: &[Complex64]) -> Option<usize> {
        let r = Self::row(z);
        for row in r - 1..=r + 1 {
            let (_, col) = Self::cell(z, row);
            for c in col - 1..=col + 1 {
                if let Some(list) = self.cells.get(&(row, c)) {
                    if let Some(&idx) = list.iter().find(|&&idx| dist_unchecked(points[idx], z) < 1e-6) {
                        return Some(idx);
                    }
                }
            }
        }
        None
    }

    fn insert(&mut self, z: Complex64, idx: usize) {
        let row = Self::row(z);
        self.cells.entry(Self::cell(z, row)).or_default().push(idx);
    }
}

/// Breadth-first closure under right multiplication by side pairings, keeping
/// elements with displacement at most `cutoff + margin`.
pub fn group_ball(group: &OctagonGroup, cutoff: f64, margin: f64, budget: u64) -> Result<GroupBall> {
    if !(cutoff > 0.0 && margin >= 0.0 && (cutoff + margin).is_finite()) {
        return Err(Error::invalid("cutoff must be positive and margin nonnegative"));
    }
    if cutoff + margin > 40.0 {
        return Err(Error::invalid("cutoff + margin above 40 is beyond double precision"));
    }
    let limit = cutoff + margin;
    let mut words: Vec<Vec<i8>> = vec![Vec::new()];
    let mut matrices = vec![Moebius::IDENTITY];
    let mut points = vec![I];
    let mut index = OrbitIndex { cells: HashMap::new() };
    index.insert(I, 0);
    let mut frontier = vec![0usize];
    let mut saturated = true;
    'grow: while !frontier.is_empty() {
        let mut next = Vec::new();
        for &parent in &frontier {
            for l in OctagonGroup::letters() {
                let m = matrices[parent] * group.pairing(l);
                if m.displacement_from_i() > limit {
                    continue;
                }
                let z = m.apply(I);
                if index.find(z, &points).is_some() {
                    continue;
                }
                if points.len() as u64 > budget {
                    saturated = false;
                    break 'grow;
                }
                let mut w = words[parent].clone();
                w.push(l);
                index.insert(z, points.len());
                next.push(points.len());
                words.push(w);
                matrices.push(m);
                points.push(z);
            }
        }
        frontier = next;
    }
    let mut entries: Vec<BallEntry> = words
        .into_iter()
        .zip(matrices)
        .skip(1)
        .map(|(word, matrix)| BallEntry { chi: OctagonGroup::chi(&word), displacement: matrix.displacement_from_i(), word, matrix })
        .filter(|e| e.displacement <= cutoff)
        .collect();
    entries.sort_by(|a, b| a.displacement.total_cmp(&b.displacement).then_with(|| a.word.cmp(&b.word)));
    Ok(GroupBall { entries, cutoff, margin, saturated })
}
