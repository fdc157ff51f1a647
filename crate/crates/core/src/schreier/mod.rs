//! Finitely generated discrete groups: word problems, balls, and the count and
//! sign sums over cosets of finite-index subgroups `Gamma_n = chi^-1(n Z^m)`.

mod group;
mod scheme;
mod word;

pub use group::{BallElement, GroupKind, MarkedGroup, DEFAULT_BALL_BUDGET, MAX_EXPONENT, MAX_WORD_LEN};
pub use scheme::{
    coset_partition_holds, coset_representatives, lemma24_bound, relative_count_sum, relative_sign_sum,
    relative_sums, scan_relative, Budgets, CosetSystem, LimitSubgroup, RelativeRow, RelativeScan, RelativeSums,
    SubgroupScheme, DEFAULT_INDEX_BUDGET,
};
pub use word::{free_reduce, letter_rank, GroupWord};
