//! `PSL_2(R)` acting on the upper half plane, with the genus-two octagon group
//! as the concrete cocompact lattice. The octagon is centred at `i`.

mod ball;
mod domain;
mod injrad;
mod moebius;
mod octagon;

pub use ball::{group_ball, BallEntry, GroupBall, DEFAULT_ELEMENT_BUDGET};
pub use domain::{check_octagon, check_unfolding, UnfoldingCheck};
pub use injrad::{
    bs_probability_at, inj_rad, inj_rad_at_most, mc_bs_probability, prop24_check, sample_octagon, sample_points,
    sample_rng, systole, BsEstimate, HypScheme, InjRadius, Prop24Outcome, Systole,
};
pub use moebius::{hyp_dist, translation_length, Moebius, MATRIX_TOL};
pub use octagon::{build_octagon_group, circumradius, inradius, OctagonGroup, I};
