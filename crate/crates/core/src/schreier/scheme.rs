use std::collections::HashMap;
use std::collections::VecDeque;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Rational;

use super::group::{BallElement, MarkedGroup, DEFAULT_BALL_BUDGET};
use super::word::GroupWord;

pub const DEFAULT_INDEX_BUDGET: u64 = 10_000;

/// Which subgroup the sequence `Gamma_n` is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitSubgroup {
    /// `Gamma_inf = {1}`: the absolute criterion.
    Trivial,
    /// `Gamma_inf = ker chi`.
    Kernel,
}

/// `Gamma_n = chi^-1(n Z^m)` for an integer map `chi` on the abelianization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupScheme {
    chi: Vec<Vec<i64>>,
    limit: LimitSubgroup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budgets {
    pub ball: u64,
    pub index: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Self { ball: DEFAULT_BALL_BUDGET, index: DEFAULT_INDEX_BUDGET }
    }
}

impl SubgroupScheme {
    pub fn new(chi: Vec<Vec<i64>>, limit: LimitSubgroup) -> Result<Self> {
        let k = chi.first().map(Vec::len).ok_or_else(|| Error::invalid("chi needs at least one row"))?;
        if k == 0 || chi.iter().any(|r| r.len() != k) {
            return Err(Error::invalid("chi rows must have equal, nonzero length"));
        }
        if chi.iter().any(|r| r.iter().all(|&x| x == 0)) {
            return Err(Error::invalid("chi rows must be nonzero"));
        }
        if chi.iter().flatten().any(|x| x.unsigned_abs() > 1_000_000) {
            return Err(Error::invalid("chi entries must be at most 10^6 in absolute value"));
        }
        Ok(Self { chi, limit })
    }

    /// `chi` = projection onto the listed abelianization coordinates.
    pub fn coordinates(rank: usize, coords: &[usize], limit: LimitSubgroup) -> Result<Self> {
        if let Some(c) = coords.iter().find(|&&c| c >= rank) {
            return Err(Error::invalid(format!("coordinate {c} out of range for rank {rank}")));
        }
        Self::new(
            coords.iter().map(|&c| (0..rank).map(|j| i64::from(j == c)).collect()).collect(),
            limit,
        )
    }

    /// Exponent sum of the first generator.
    pub fn first_exponent(rank: usize, limit: LimitSubgroup) -> Result<Self> {
        Self::coordinates(rank, &[0], limit)
    }

    /// All homology coordinates except the first: index `n^(rank-1)`.
    pub fn congruence(rank: usize, limit: LimitSubgroup) -> Result<Self> {
        Self::coordinates(rank, &(1..rank).collect::<Vec<_>>(), limit)
    }

    /// The full homology map: index `n^rank`.
    pub fn full_homology(rank: usize, limit: LimitSubgroup) -> Result<Self> {
        Self::coordinates(rank, &(0..rank).collect::<Vec<_>>(), limit)
    }

    pub fn chi(&self) -> &[Vec<i64>] {
        &self.chi
    }

    pub fn limit(&self) -> LimitSubgroup {
        self.limit
    }

    pub fn source_rank(&self) -> usize {
        self.chi[0].len()
    }

    pub fn apply(&self, ab: &[i64]) -> Vec<i64> {
        self.chi.iter().map(|row| row.iter().zip(ab).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn in_subgroup(&self, n: u64, ab: &[i64]) -> bool {
        self.apply(ab).iter().all(|v| v.rem_euclid(n as i64) == 0)
    }

    pub fn in_limit(&self, ab: &[i64]) -> bool {
        match self.limit {
            LimitSubgroup::Trivial => false,
            LimitSubgroup::Kernel => self.apply(ab).iter().all(|&v| v == 0),
        }
    }

    fn check_group(&self, group: &MarkedGroup) -> Result<()> {
        if self.source_rank() != group.rank() {
            return Err(Error::Dimension { expected: group.rank(), got: self.source_rank() });
        }
        Ok(())
    }
}

/// Canonical coset representatives of `Gamma_n` in `G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetSystem {
    pub n: u64,
    /// Shortlex-minimal word of each coset, in discovery order.
    pub reps: Vec<GroupWord>,
    residues: HashMap<Vec<i64>, usize>,
}

impl CosetSystem {
    pub fn index(&self) -> u64 {
        self.reps.len() as u64
    }

    /// Position of the coset `g Gamma_n`, given the abelianization of `g`.
    pub fn locate(&self, scheme: &SubgroupScheme, ab: &[i64]) -> Option<usize> {
        let key: Vec<i64> = scheme.apply(ab).iter().map(|v| v.rem_euclid(self.n as i64)).collect();
        self.residues.get(&key).copied()
    }
}

/// Breadth-first search in the finite quotient `G / Gamma_n`; the first word to
/// reach a residue class is its representative, so representatives have minimal
/// length with ties broken lexicographically.
pub fn coset_representatives(
    group: &MarkedGroup,
    scheme: &SubgroupScheme,
    n: u64,
    index_budget: u64,
) -> Result<CosetSystem> {
    scheme.check_group(group)?;
    if n == 0 || n > i64::MAX as u64 {
        return Err(Error::invalid("modulus n must be positive"));
    }
    let modulus = n as i64;
    let steps: Vec<(i8, Vec<i64>)> = group
        .letters()
        .into_iter()
        .map(|l| {
            let mut ab = vec![0; group.rank()];
            ab[l.unsigned_abs() as usize - 1] = l.signum() as i64;
            (l, scheme.apply(&ab))
        })
        .collect();
    let start = vec![0i64; scheme.chi.len()];
    let mut residues = HashMap::from([(start.clone(), 0usize)]);
    let mut reps = vec![GroupWord::identity()];
    let mut queue = VecDeque::from([start]);
    while let Some(state) = queue.pop_front() {
        let word = reps[residues[&state]].clone();
        for (l, delta) in &steps {
            let next: Vec<i64> = state.iter().zip(delta).map(|(s, d)| (s + d).rem_euclid(modulus)).collect();
            if residues.contains_key(&next) {
                continue;
            }
            if reps.len() as u64 >= index_budget {
                return Err(Error::Budget { what: "coset index", needed: reps.len() as u64 + 1, limit: index_budget });
            }
            residues.insert(next.clone(), reps.len());
            reps.push(word.concat(&GroupWord::from_letters(vec![*l])));
            queue.push_back(next);
        }
    }
    Ok(CosetSystem { n, reps, residues })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelativeSums {
    pub n: u64,
    pub r: usize,
    pub index: u64,
    /// `(1/index) sum_x #(x^-1 (Gamma_n \ Gamma_inf) x within B_r)`.
    #[serde(serialize_with = "crate::report::serialize_rational")]
    pub count_sum: Rational,
    /// Fraction of cosets whose intersection is nonempty.
    #[serde(serialize_with = "crate::report::serialize_rational")]
    pub sign_sum: Rational,
    /// Largest single-coset count.
    pub max_count: u64,
}

/// Per-coset counts, indexed `[coset][r]` for `r = 0..=max_r`.
fn coset_counts(
    group: &MarkedGroup,
    scheme: &SubgroupScheme,
    cosets: &CosetSystem,
    ball: &[BallElement],
    max_r: usize,
) -> Vec<Vec<u64>> {
    cosets
        .reps
        .par_iter()
        .map(|x| {
            let mut by_len = vec![0u64; max_r + 1];
            for b in ball {
                // x^-1 gamma x = b  <=>  gamma = x b x^-1.
                let gamma = group.conjugate(x, &b.word);
                let ab = group.abelianize(&gamma);
                if scheme.in_subgroup(cosets.n, &ab) && !scheme.in_limit(&ab) {
                    by_len[b.length] += 1;
                }
            }
            let mut acc = 0;
            by_len
                .iter()
                .map(|c| {
                    acc += c;
                    acc
                })
                .collect()
        })
        .collect()
}

fn sums_from_counts(n: u64, radii: &[usize], counts: &[Vec<u64>]) -> Vec<RelativeSums> {
    let index = counts.len() as u64;
    let denom = BigInt::from(index);
    radii
        .iter()
        .map(|&r| {
            let total: u64 = counts.iter().map(|c| c[r]).sum();
            let nonempty = counts.iter().filter(|c| c[r] > 0).count() as u64;
            RelativeSums {
                n,
                r,
                index,
                count_sum: Rational::new(BigInt::from(total), denom.clone()),
                sign_sum: Rational::new(BigInt::from(nonempty), denom.clone()),
                max_count: counts.iter().map(|c| c[r]).max().unwrap_or(0),
            }
        })
        .collect()
}

/// Count and sign sums for every radius in `radii`, sharing one ball.
pub fn relative_sums(
    group: &MarkedGroup,
    scheme: &SubgroupScheme,
    n: u64,
    radii: &[usize],
    budgets: Budgets,
) -> Result<Vec<RelativeSums>> {
    let max_r = radii.iter().copied().max().unwrap_or(0);
    let ball = group.ball(max_r, budgets.ball)?;
    let cosets = coset_representatives(group, scheme, n, budgets.index)?;
    Ok(sums_from_counts(n, radii, &coset_counts(group, scheme, &cosets, &ball, max_r)))
}

pub fn relative_count_sum(group: &MarkedGroup, scheme: &SubgroupScheme, n: u64, r: usize) -> Result<Rational> {
    Ok(relative_sums(group, scheme, n, &[r], Budgets::default())?.remove(0).count_sum)
}

pub fn relative_sign_sum(group: &MarkedGroup, scheme: &SubgroupScheme, n: u64, r: usize) -> Result<Rational> {
    Ok(relative_sums(group, scheme, n, &[r], Budgets::default())?.remove(0).sign_sum)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelativeRow {
    #[serde(flatten)]
    pub sums: RelativeSums,
    /// Uniform per-coset bound over the whole scanned range of `n` at this `r`.
    pub bound: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelativeScan {
    pub rows: Vec<RelativeRow>,
}

impl RelativeScan {
    /// `sign_sum <= count_sum <= bound * sign_sum` on every row.
    pub fn sign_domination_holds(&self) -> bool {
        self.rows.iter().all(|row| {
            let s = &row.sums;
            let bound = Rational::from_integer(BigInt::from(row.bound));
            s.sign_sum <= s.count_sum && s.count_sum <= bound * &s.sign_sum
        })
    }
}

/// Rows `(n, r)` for every `n` in `ns` and `r` in `radii`, ordered by `n` then `r`.
pub fn scan_relative(
    group: &MarkedGroup,
    scheme: &SubgroupScheme,
    ns: &[u64],
    radii: &[usize],
    budgets: Budgets,
) -> Result<RelativeScan> {
    scheme.check_group(group)?;
    let max_r = radii.iter().copied().max().unwrap_or(0);
    let ball = group.ball(max_r, budgets.ball)?;
    let mut per_n = Vec::with_capacity(ns.len());
    for &n in ns {
        let cosets = coset_representatives(group, scheme, n, budgets.index)
            .map_err(|e| Error::AtMember { n, source: Box::new(e) })?;
        per_n.push(sums_from_counts(n, radii, &coset_counts(group, scheme, &cosets, &ball, max_r)));
    }
    let bounds: Vec<u64> = (0..radii.len())
        .map(|i| per_n.iter().map(|rows| rows[i].max_count).max().unwrap_or(0))
        .collect();
    let rows = per_n
        .into_iter()
        .flat_map(|rows| rows.into_iter().enumerate().map(|(i, sums)| RelativeRow { sums, bound: bounds[i] }).collect::<Vec<_>>())
        .collect();
    Ok(RelativeScan { rows })
}

/// `max_{n, x} #(x^-1 Gamma_n^* x within B_r)`.
pub fn lemma24_bound(group: &MarkedGroup, scheme: &SubgroupScheme, ns: &[u64], r: usize) -> Result<u64> {
    let scan = scan_relative(group, scheme, ns, &[r], Budgets::default())?;
    Ok(scan.rows.first().map_or(0, |row| row.bound))
}

/// Every element of `B_r` (and the identity) lies in exactly one coset `x Gamma_n`.
pub fn coset_partition_holds(
    group: &MarkedGroup,
    scheme: &SubgroupScheme,
    n: u64,
    r: usize,
    budgets: Budgets,
) -> Result<bool> {
    let cosets = coset_representatives(group, scheme, n, budgets.index)?;
    let ball = group.ball(r, budgets.ball)?;
    let identity = GroupWord::identity();
    Ok(std::iter::once(&identity).chain(ball.iter().map(|b| &b.word)).all(|g| {
        let hits = cosets
            .reps
            .iter()
            .filter(|x| {
                let h = group.multiply(&x.inverse(), g);
                scheme.in_subgroup(n, &group.abelianize(&h))
            })
            .count();
        hits == 1
    }))
}
