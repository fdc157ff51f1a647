//! Euclidean lattices `L = B Z^d`: enumeration, Poisson sums, and families.

mod basis;
mod domain;
mod enumerate;
mod family;
mod sums;

pub use basis::{LatticeBasis, LatticePoint, ShortestVector};
pub use domain::{check_parallelepiped, Parallelepiped};
pub use enumerate::{enumerate_coefficients, DEFAULT_POINT_BUDGET};
pub use family::{scan_family, CountRecord, DefectRecord, FamilyScan, LatticeFamily, MemberRecord};
pub use sums::{
    dual_coset_sum, geometric_sum, geometric_sum_f64, plancherel_defect, spectral_sum, PlancherelDefect, SpectralMethod,
    SpectralSum,
};
