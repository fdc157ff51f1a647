//! Experiment configuration files (JSON, one experiment per file).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::euclid::{LatticeBasis, LatticeFamily};
use crate::hyperbolic::DEFAULT_ELEMENT_BUDGET;
use crate::schreier::{Budgets, GroupKind, LimitSubgroup, MarkedGroup, SubgroupScheme, DEFAULT_BALL_BUDGET, DEFAULT_INDEX_BUDGET};
use crate::testfn::{ScaleLiteral, TestFunction, TestFunctionSpec};
use crate::zcover::ZCoverScheme;

/// Largest family index a config may request.
pub const MAX_N: u64 = 1 << 20;
pub const MAX_SAMPLES: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ExperimentConfig {
    Euclid(EuclidConfig),
    Schreier(SchreierConfig),
    Hyperbolic(HyperbolicConfig),
    Zcover(ZCoverConfig),
}

/// Either an explicit list or an inclusive range `{"from": a, "to": b}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexList {
    List(Vec<u64>),
    Range(IndexRange),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexRange {
    pub from: u64,
    pub to: u64,
}

impl IndexList {
    pub fn values(&self) -> Result<Vec<u64>> {
        let v: Vec<u64> = match self {
            IndexList::List(v) => v.clone(),
            IndexList::Range(r) => {
                if r.from > r.to {
                    return Err(Error::invalid("n range is empty"));
                }
                if r.to > MAX_N {
                    return Err(Error::invalid(format!("n above {MAX_N}")));
                }
                (r.from..=r.to).collect()
            }
        };
        if v.is_empty() {
            return Err(Error::invalid("n list is empty"));
        }
        if let Some(bad) = v.iter().find(|&&n| n == 0 || n > MAX_N) {
            return Err(Error::invalid(format!("n = {bad} outside 1..={MAX_N}")));
        }
        Ok(v)
    }
}

/// Basis given row by row; the columns are the lattice generators.
pub type BasisRows = Vec<Vec<ScaleLiteral>>;

fn build_basis(rows: &BasisRows) -> Result<LatticeBasis> {
    LatticeBasis::new(rows.iter().map(|r| r.iter().map(ScaleLiteral::to_rational).collect()).collect::<Result<_>>()?)
}

fn build_functions(specs: &[TestFunctionSpec]) -> Result<Vec<TestFunction>> {
    specs.iter().map(TestFunctionSpec::build).collect()
}

fn default_tail_tol() -> f64 {
    1e-10
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid("tail_tol must be positive and finite"));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    Counterexample,
    Dilation { basis: BasisRows },
    Sublattice { basis: BasisRows, axis: usize },
}

impl FamilyConfig {
    pub fn build(&self) -> Result<LatticeFamily> {
        Ok(match self {
            FamilyConfig::Counterexample => LatticeFamily::Counterexample,
            FamilyConfig::Dilation { basis } => LatticeFamily::Dilation(build_basis(basis)?),
            FamilyConfig::Sublattice { basis, axis } => LatticeFamily::Sublattice { base: build_basis(basis)?, axis: *axis },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EuclidConfig {
    pub family: FamilyConfig,
    #[serde(default)]
    pub functions: Vec<TestFunctionSpec>,
    pub n: IndexList,
    #[serde(default)]
    pub radii: Vec<f64>,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchemeConfig {
    /// Exponent sum of the first generator.
    FirstExponent,
    /// Homology coordinates `2..=rank`.
    Congruence,
    FullHomology,
    /// Selected homology coordinates (0-based).
    Coordinates { coords: Vec<usize> },
    /// Explicit integer map `H_1 -> Z^m`, one row per target coordinate.
    Matrix { chi: Vec<Vec<i64>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    #[serde(default = "default_ball_budget")]
    pub ball: u64,
    #[serde(default = "default_index_budget")]
    pub index: u64,
}

fn default_ball_budget() -> u64 {
    DEFAULT_BALL_BUDGET
}

fn default_index_budget() -> u64 {
    DEFAULT_INDEX_BUDGET
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self { ball: DEFAULT_BALL_BUDGET, index: DEFAULT_INDEX_BUDGET }
    }
}

fn default_limit() -> LimitSubgroup {
    LimitSubgroup::Kernel
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchreierConfig {
    pub group: GroupKind,
    pub scheme: SchemeConfig,
    #[serde(default = "default_limit")]
    pub limit: LimitSubgroup,
    pub n: IndexList,
    pub radii: Vec<usize>,
    #[serde(default)]
    pub budgets: BudgetConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl SchreierConfig {
    pub fn build(&self) -> Result<(MarkedGroup, SubgroupScheme, Budgets)> {
        let group = MarkedGroup::new(self.group)?;
        let rank = group.rank();
        let scheme = match &self.scheme {
            SchemeConfig::FirstExponent => SubgroupScheme::first_exponent(rank, self.limit),
            SchemeConfig::Congruence => SubgroupScheme::congruence(rank, self.limit),
            SchemeConfig::FullHomology => SubgroupScheme::full_homology(rank, self.limit),
            SchemeConfig::Coordinates { coords } => SubgroupScheme::coordinates(rank, coords, self.limit),
            SchemeConfig::Matrix { chi } => SubgroupScheme::new(chi.clone(), self.limit),
        }?;
        if scheme.source_rank() != rank {
            return Err(Error::Dimension { expected: rank, got: scheme.source_rank() });
        }
        if self.radii.is_empty() {
            return Err(Error::invalid("radii list is empty"));
        }
        Ok((group, scheme, Budgets { ball: self.budgets.ball, index: self.budgets.index }))
    }
}

fn default_cutoff() -> f64 {
    10.0
}

fn default_element_budget() -> u64 {
    DEFAULT_ELEMENT_BUDGET
}

fn default_prop24_max_radius() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperbolicConfig {
    /// Indices of `Gamma_n = chi^-1(n Z)`.
    pub n: IndexList,
    /// Also report the kernel `ker chi`.
    #[serde(default)]
    pub include_kernel: bool,
    /// Absolute radii `R`.
    #[serde(default)]
    pub radii: Vec<f64>,
    /// Radii given as multiples of the systole of the full group.
    #[serde(default)]
    pub systole_fractions: Vec<f64>,
    pub samples: u64,
    /// Required: every hyperbolic experiment samples points.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
    #[serde(default = "default_element_budget")]
    pub element_budget: u64,
    /// Upper end of the uniform `R` distribution in `prop24` runs.
    #[serde(default = "default_prop24_max_radius")]
    pub prop24_max_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl HyperbolicConfig {
    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::invalid("missing field `seed`: hyperbolic experiments are Monte Carlo and need a seed"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZCoverConfig {
    pub basis: BasisRows,
    /// `chi(B m) = chi . m` on lattice coefficients.
    pub chi: Vec<i64>,
    pub functions: Vec<TestFunctionSpec>,
    pub n: IndexList,
    #[serde(default)]
    pub theta: Vec<f64>,
    /// Roots-of-unity quadrature size; defaults to `2 degree + 1` per function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<u64>,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl ZCoverConfig {
    pub fn build(&self) -> Result<(ZCoverScheme, Vec<TestFunction>)> {
        Ok((ZCoverScheme::new(build_basis(&self.basis)?, self.chi.clone())?, build_functions(&self.functions)?))
    }
}

impl EuclidConfig {
    pub fn build(&self) -> Result<(LatticeFamily, Vec<TestFunction>)> {
        Ok((self.family.build()?, build_functions(&self.functions)?))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn model(&self) -> &'static str {
        match self {
            ExperimentConfig::Euclid(_) => "euclid",
            ExperimentConfig::Schreier(_) => "schreier",
            ExperimentConfig::Hyperbolic(_) => "hyperbolic",
            ExperimentConfig::Zcover(_) => "zcover",
        }
    }

    pub fn out(&self) -> Option<&str> {
        match self {
            ExperimentConfig::Euclid(c) => c.out.as_deref(),
            ExperimentConfig::Schreier(c) => c.out.as_deref(),
            ExperimentConfig::Hyperbolic(c) => c.out.as_deref(),
            ExperimentConfig::Zcover(c) => c.out.as_deref(),
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        let slot = match self {
            ExperimentConfig::Euclid(c) => &mut c.seed,
            ExperimentConfig::Schreier(c) => &mut c.seed,
            ExperimentConfig::Hyperbolic(c) => &mut c.seed,
            ExperimentConfig::Zcover(c) => &mut c.seed,
        };
        *slot = Some(seed);
    }

    /// Checks everything that can be checked without running the experiment.
    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentConfig::Euclid(c) => {
                let (family, fs) = c.build()?;
                c.n.values()?;
                check_tol(c.tail_tol)?;
                if let Some(f) = fs.iter().find(|f| f.dim() != family.dim()) {
                    return Err(Error::Dimension { expected: family.dim(), got: f.dim() });
                }
                if c.radii.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
                    return Err(Error::invalid("radii must be finite and nonnegative"));
                }
            }
            ExperimentConfig::Schreier(c) => {
                c.build()?;
                c.n.values()?;
            }
            ExperimentConfig::Hyperbolic(c) => {
                c.seed()?;
                c.n.values()?;
                if c.samples == 0 || c.samples > MAX_SAMPLES {
                    return Err(Error::invalid(format!("samples must be in 1..={MAX_SAMPLES}")));
                }
                if !(c.cutoff > 0.0 && c.cutoff.is_finite()) {
                    return Err(Error::invalid("cutoff must be positive"));
                }
                if c.radii.iter().chain(&c.systole_fractions).chain([&c.prop24_max_radius]).any(|r| !(*r >= 0.0 && r.is_finite())) {
                    return Err(Error::invalid("radii must be finite and nonnegative"));
                }
            }
            ExperimentConfig::Zcover(c) => {
                let (scheme, fs) = c.build()?;
                c.n.values()?;
                check_tol(c.tail_tol)?;
                if fs.is_empty() {
                    return Err(Error::invalid("functions list is empty"));
                }
                if let Some(f) = fs.iter().find(|f| f.dim() != scheme.basis().dim()) {
                    return Err(Error::Dimension { expected: scheme.basis().dim(), got: f.dim() });
                }
                if c.theta.iter().any(|t| !t.is_finite()) {
                    return Err(Error::invalid("theta values must be finite"));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn large_number_literals_hash_stably() {
        let c = ExperimentConfig::parse(&format!(
            r#"{{"model":"euclid","family":{{"kind":"dilation","basis":[[2,0],[0,{}]]}},"n":[2],"radii":[14]}}"#,
            "1".repeat(87)
        ))
        .unwrap();
        let again = ExperimentConfig::parse(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c.hash(), again.hash());
    }

    #[test]
    fn parses_each_model() {
        let e = ExperimentConfig::parse(
            r#"{"model":"euclid","family":{"kind":"counterexample"},"functions":[{"kind":"bspline","k":2,"a":[1,1]}],"n":{"from":1,"to":4},"radii":[1.5]}"#,
        )
        .unwrap();
        assert_eq!(e.model(), "euclid");
        let s = ExperimentConfig::parse(
            r#"{"model":"schreier","group":{"kind":"free","rank":2},"scheme":{"kind":"full_homology"},"n":[1,2,3],"radii":[1,2]}"#,
        )
        .unwrap();
        assert_eq!(s.model(), "schreier");
        let z = ExperimentConfig::parse(
            r#"{"model":"zcover","basis":[[1,0],[0,1]],"chi":[0,1],"functions":[{"kind":"bspline","k":2,"a":[3,3]}],"n":[1,2],"theta":[0.5]}"#,
        )
        .unwrap();
        assert_eq!(z.model(), "zcover");
    }

    #[test]
    fn rejects_unknown_keys_and_missing_seed() {
        let err = ExperimentConfig::parse(
            r#"{"model":"euclid","family":{"kind":"counterexample"},"n":[1],"colour":"red"}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
        let err = ExperimentConfig::parse(r#"{"model":"hyperbolic","n":[1],"samples":10}"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("seed"));
        assert!(ExperimentConfig::parse(r#"{"model":"tropical","n":[1]}"#).is_err());
        assert!(ExperimentConfig::parse(r#"{"model":"euclid","family":{"kind":"counterexample"},"n":[0]}"#).is_err());
    }

    #[test]
    fn hash_is_stable_and_seed_sensitive() {
        let text = r#"{"model":"hyperbolic","n":[1],"samples":10,"seed":1}"#;
        let mut a = ExperimentConfig::parse(text).unwrap();
        let b = ExperimentConfig::parse(text).unwrap();
        assert_eq!(a.hash(), b.hash());
        a.set_seed(2);
        assert_ne!(a.hash(), b.hash());
    }
}
