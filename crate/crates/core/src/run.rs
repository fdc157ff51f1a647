//! Executes a parsed config and assembles its report.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{EuclidConfig, ExperimentConfig, HyperbolicConfig, SchemeConfig, SchreierConfig, ZCoverConfig};
use crate::error::{Error, Result};
use crate::euclid::{scan_family, DEFAULT_POINT_BUDGET};
use crate::exact::to_f64;
use crate::hyperbolic::{
    bs_probability_at, build_octagon_group, circumradius, group_ball, inj_rad, prop24_check, sample_points, sample_rng,
    systole, BsEstimate, HypScheme,
};
use crate::report::{cell, Report};
use crate::schreier::{scan_relative, GroupKind, LimitSubgroup, RelativeRow, RelativeScan};
use crate::zcover::{
    check_direct_integral, check_lemma42_independence, check_prop43, spectral_measure_integral, trace_polynomial,
    twisted_spectral,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    EuclidScan,
    SchreierScan,
    HypInjRad,
    HypBsProb,
    HypProp24,
    ZCoverCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::EuclidScan => "euclid scan",
            Command::SchreierScan => "schreier scan",
            Command::HypInjRad => "hyp injrad",
            Command::HypBsProb => "hyp bsprob",
            Command::HypProp24 => "hyp prop24",
            Command::ZCoverCheck => "zcover check",
        }
    }

    pub fn model(self) -> &'static str {
        match self {
            Command::EuclidScan => "euclid",
            Command::SchreierScan => "schreier",
            Command::HypInjRad | Command::HypBsProb | Command::HypProp24 => "hyperbolic",
            Command::ZCoverCheck => "zcover",
        }
    }
}

/// Runs one experiment. Failures confined to a single family member are
/// recorded in the report; anything else is returned as an error.
pub fn run(config: &ExperimentConfig, command: Command) -> Result<Report> {
    config.validate()?;
    if config.model() != command.model() {
        return Err(Error::invalid(format!(
            "`{}` needs a config with model \"{}\", got \"{}\"",
            command.name(),
            command.model(),
            config.model()
        )));
    }
    let mut report = match config {
        ExperimentConfig::Euclid(c) => run_euclid(c)?,
        ExperimentConfig::Schreier(c) => run_schreier(c)?,
        ExperimentConfig::Hyperbolic(c) => run_hyperbolic(c, command)?,
        ExperimentConfig::Zcover(c) => run_zcover(c)?,
    };
    report.config_hash = config.hash();
    report.config = serde_json::to_value(config).map_err(|e| Error::Io(e.to_string()))?;
    Ok(report)
}

fn opt_indices(len: usize) -> Vec<Option<usize>> {
    if len == 0 {
        vec![None]
    } else {
        (0..len).map(Some).collect()
    }
}

fn run_euclid(c: &EuclidConfig) -> Result<Report> {
    let (family, fs) = c.build()?;
    let ns = c.n.values()?;
    let mut report = Report::new(
        "euclid",
        Command::EuclidScan.name(),
        vec![
            "module", "n", "covol", "systole", "R", "count_R", "f", "defect_f", "spectral_defect", "poisson_resid",
            "tail_bound", "tail_tol", "point_budget", "spectral_certified", "error",
        ],
    );
    let results: Vec<_> = ns.par_iter().map(|&n| (n, scan_family(&family, &fs, &c.radii, &[n], c.tail_tol))).collect();
    let mut members = Vec::new();
    for (n, result) in results {
        let scan = match result {
            Ok(s) => s,
            Err(e) => {
                let mut row = vec![String::new(); report.columns.len()];
                row[0] = "euclid".into();
                row[1] = n.to_string();
                row[14] = e.to_string();
                report.push(row);
                report.fail(Some(n), &e);
                continue;
            }
        };
        let m = &scan.members[0];
        for d in &m.defects {
            if let (Some(resid), Some(bound)) = (d.poisson_residual, d.tail_bound) {
                if resid > bound + 1e-9 {
                    report.fail(
                        Some(n),
                        &Error::Invariant(format!("Poisson residual {resid:e} above tail bound {bound:e} for f{}", d.function)),
                    );
                }
            }
        }
        for fi in opt_indices(m.defects.len()) {
            for ri in opt_indices(m.counts.len()) {
                let count = ri.map(|i| &m.counts[i]);
                let defect = fi.map(|i| &m.defects[i]);
                report.push(vec![
                    "euclid".into(),
                    n.to_string(),
                    m.covolume.to_string(),
                    m.systole.to_string(),
                    count.map_or_else(String::new, |c| c.radius.to_string()),
                    count.map_or_else(String::new, |c| c.count.to_string()),
                    fi.map_or_else(String::new, |i| i.to_string()),
                    defect.map_or_else(String::new, |d| d.geometric.to_string()),
                    cell(defect.and_then(|d| d.spectral)),
                    cell(defect.and_then(|d| d.poisson_residual)),
                    cell(defect.and_then(|d| d.tail_bound)),
                    c.tail_tol.to_string(),
                    DEFAULT_POINT_BUDGET.to_string(),
                    defect.map_or_else(String::new, |d| d.tail_bound.is_some().to_string()),
                    String::new(),
                ]);
            }
        }
        members.push(scan.members.into_iter().next());
    }
    report.details = json!({ "members": members });
    Ok(report)
}

fn run_schreier(c: &SchreierConfig) -> Result<Report> {
    let (group, scheme, budgets) = c.build()?;
    let ns = c.n.values()?;
    let mut report = Report::new(
        "schreier",
        Command::SchreierScan.name(),
        vec![
            "module", "group", "scheme", "limit", "n", "r", "index", "count_sum", "sign_sum", "count_sum_f64",
            "sign_sum_f64", "max_count", "bound", "ball_budget", "index_budget", "saturated", "error",
        ],
    );
    let group_label = match c.group {
        GroupKind::Free { rank } => format!("free({rank})"),
        GroupKind::Surface { genus } => format!("surface({genus})"),
        GroupKind::FreeAbelian { rank } => format!("free_abelian({rank})"),
    };
    let scheme_label = match &c.scheme {
        SchemeConfig::FirstExponent => "first_exponent".to_string(),
        SchemeConfig::Congruence => "congruence".to_string(),
        SchemeConfig::FullHomology => "full_homology".to_string(),
        SchemeConfig::Coordinates { coords } => format!("coordinates{coords:?}"),
        SchemeConfig::Matrix { chi } => format!("matrix{chi:?}"),
    };
    let limit_label = match c.limit {
        LimitSubgroup::Kernel => "kernel",
        LimitSubgroup::Trivial => "trivial",
    }
    .to_string();
    let mut per_n: Vec<(u64, Result<Vec<RelativeRow>>)> = Vec::new();
    for &n in &ns {
        per_n.push((n, scan_relative(&group, &scheme, &[n], &c.radii, budgets).map(|s| s.rows)));
    }
    // Uniform bound per radius over every member that completed.
    let bounds: Vec<u64> = (0..c.radii.len())
        .map(|i| per_n.iter().filter_map(|(_, r)| r.as_ref().ok()).map(|rows| rows[i].sums.max_count).max().unwrap_or(0))
        .collect();
    let mut all_rows = Vec::new();
    for (n, result) in per_n {
        match result {
            Ok(rows) => {
                for (i, mut row) in rows.into_iter().enumerate() {
                    row.bound = bounds[i];
                    let s = &row.sums;
                    report.push(vec![
                        "schreier".into(),
                        group_label.clone(),
                        scheme_label.clone(),
                        limit_label.clone(),
                        n.to_string(),
                        s.r.to_string(),
                        s.index.to_string(),
                        s.count_sum.to_string(),
                        s.sign_sum.to_string(),
                        to_f64(&s.count_sum).to_string(),
                        to_f64(&s.sign_sum).to_string(),
                        s.max_count.to_string(),
                        row.bound.to_string(),
                        budgets.ball.to_string(),
                        budgets.index.to_string(),
                        "true".into(),
                        String::new(),
                    ]);
                    all_rows.push(row);
                }
            }
            Err(e) => {
                let mut row = vec![String::new(); report.columns.len()];
                row[0] = "schreier".into();
                row[4] = n.to_string();
                row[13] = budgets.ball.to_string();
                row[14] = budgets.index.to_string();
                row[15] = "false".into();
                row[16] = e.to_string();
                report.push(row);
                report.fail(Some(n), &e);
            }
        }
    }
    let scan = RelativeScan { rows: all_rows };
    let vanishing = scan.rows.iter().filter(|r| r.sums.n as usize > r.sums.r).all(|r| r.sums.max_count == 0);
    if !scan.sign_domination_holds() {
        report.fail(None, &Error::Invariant("sign_sum <= count_sum <= bound * sign_sum violated".into()));
    }
    report.details = json!({
        "sign_domination_holds": scan.sign_domination_holds(),
        "vanishes_for_n_above_r": vanishing,
        "rows": scan.rows,
    });
    Ok(report)
}

fn hyp_label(s: HypScheme) -> String {
    match s {
        HypScheme::Index(n) => n.to_string(),
        HypScheme::Kernel => "kernel".into(),
    }
}

fn hyp_n(s: HypScheme) -> Option<u64> {
    match s {
        HypScheme::Index(n) => Some(n),
        HypScheme::Kernel => None,
    }
}

#[allow(clippy::too_many_arguments)]
fn hyp_row(
    experiment: &str,
    scheme: HypScheme,
    quantity: &str,
    r: Option<f64>,
    estimate: f64,
    ci: f64,
    samples: u64,
    undecided: u64,
    c: &HyperbolicConfig,
    saturated: bool,
    certified: bool,
) -> Vec<String> {
    vec![
        "hyperbolic".into(),
        experiment.into(),
        hyp_label(scheme),
        quantity.into(),
        cell(r),
        estimate.to_string(),
        ci.to_string(),
        samples.to_string(),
        undecided.to_string(),
        c.cutoff.to_string(),
        saturated.to_string(),
        certified.to_string(),
        c.seed.map_or_else(String::new, |s| s.to_string()),
        String::new(),
    ]
}

fn mean_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, 1.96 * (var / n).sqrt())
}

fn run_hyperbolic(c: &HyperbolicConfig, command: Command) -> Result<Report> {
    let seed = c.seed()?;
    let group = build_octagon_group()?;
    let ball = group_ball(&group, c.cutoff, circumradius(), c.element_budget)?;
    let saturated = ball.complete();
    let base = systole(&ball, HypScheme::Index(1))?;
    let mut schemes: Vec<HypScheme> = c.n.values()?.into_iter().map(HypScheme::Index).collect();
    if c.include_kernel {
        schemes.push(HypScheme::Kernel);
    }
    let mut radii = c.radii.clone();
    radii.extend(c.systole_fractions.iter().map(|f| f * base.length));
    let points: Vec<Complex64> = sample_points(&group, c.samples, seed);
    let experiment = &command.name()[4..];
    let mut report = Report::new(
        "hyperbolic",
        command.name(),
        vec![
            "module", "experiment", "n", "quantity", "R", "estimate", "ci", "samples", "undecided", "cutoff",
            "saturated", "certified", "seed", "error",
        ],
    );
    let mut systoles = Vec::new();
    for &scheme in &schemes {
        let sys = systole(&ball, scheme)?;
        systoles.push(json!({ "n": hyp_label(scheme), "length": sys.length, "certified": sys.certified }));
        match command {
            Command::HypInjRad => {
                let inj = points.par_iter().map(|&z| inj_rad(&ball, scheme, z)).collect::<Result<Vec<_>>>()?;
                let values: Vec<f64> = inj.iter().map(|r| r.value).collect();
                let uncertified = inj.iter().filter(|r| !r.certified).count() as u64;
                let (mean, ci) = mean_ci(&values);
                let n = c.samples;
                report.push(hyp_row(experiment, scheme, "mean_injrad", None, mean, ci, n, uncertified, c, saturated, uncertified == 0));
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                report.push(hyp_row(experiment, scheme, "min_injrad", None, min, 0.0, n, uncertified, c, saturated, uncertified == 0));
                report.push(hyp_row(experiment, scheme, "systole", None, sys.length, 0.0, 0, 0, c, saturated, sys.certified));
            }
            Command::HypBsProb => {
                for &r in &radii {
                    let est = bs_probability_at(&ball, scheme, r, &points)?;
                    report.push(hyp_row(
                        experiment,
                        scheme,
                        "bs_probability",
                        Some(r),
                        est.estimate,
                        est.half_width,
                        est.samples,
                        est.undecided,
                        c,
                        saturated,
                        est.undecided == 0,
                    ));
                    if r < 0.5 * sys.length && sys.certified && est.hits > 0 {
                        report.fail(
                            hyp_n(scheme),
                            &Error::Invariant(format!("positive probability at R = {r} below half the systole")),
                        );
                    }
                }
            }
            Command::HypProp24 => {
                let outcomes = (0..c.samples)
                    .into_par_iter()
                    .map(|i| {
                        let r = c.prop24_max_radius * sample_rng(seed.wrapping_add(1), i).gen::<f64>();
                        prop24_check(&ball, scheme, points[i as usize], r)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let decided: Vec<_> = outcomes.iter().filter(|o| o.certified && !o.indeterminate).collect();
                let agree = decided.iter().filter(|o| o.side_a == o.side_b).count() as u64;
                let indeterminate = outcomes.iter().filter(|o| o.indeterminate).count() as u64;
                let uncertified = outcomes.iter().filter(|o| !o.certified).count() as u64;
                let a = BsEstimate::from_counts(agree, decided.len().max(1) as u64, uncertified);
                report.push(hyp_row(
                    experiment,
                    scheme,
                    "prop24_agreement",
                    None,
                    a.estimate,
                    a.half_width,
                    decided.len() as u64,
                    uncertified,
                    c,
                    saturated,
                    uncertified == 0,
                ));
                let ind = BsEstimate::from_counts(indeterminate, c.samples, 0);
                report.push(hyp_row(
                    experiment,
                    scheme,
                    "prop24_indeterminate",
                    None,
                    ind.estimate,
                    ind.half_width,
                    c.samples,
                    0,
                    c,
                    saturated,
                    true,
                ));
                if agree < decided.len() as u64 {
                    report.fail(
                        hyp_n(scheme),
                        &Error::Invariant(format!("{} decided samples disagree", decided.len() as u64 - agree)),
                    );
                }
            }
            _ => unreachable!("non-hyperbolic command"),
        }
    }
    report.details = json!({
        "ball_size": ball.len(),
        "cutoff": ball.cutoff,
        "margin": ball.margin,
        "saturated": saturated,
        "base_systole": base.length,
        "radii": radii,
        "systoles": systoles,
    });
    Ok(report)
}

fn run_zcover(c: &ZCoverConfig) -> Result<Report> {
    let (scheme, fs) = c.build()?;
    let ns = c.n.values()?;
    let mut report = Report::new(
        "zcover",
        Command::ZCoverCheck.name(),
        vec!["module", "f", "quantity", "n", "theta", "m", "value", "exact", "reference", "bound", "error"],
    );
    let mut degrees = Vec::new();
    let mut thresholds = Vec::new();
    let mut defects = Vec::new();
    let mut functions = Vec::new();
    let row = |fi: usize, q: &str, n: Option<u64>, theta: Option<f64>, m: Option<u64>, value: Option<f64>, exact: String, reference: Option<f64>, bound: Option<f64>, err: String| {
        vec![
            "zcover".into(),
            fi.to_string(),
            q.into(),
            n.map_or_else(String::new, |n| n.to_string()),
            cell(theta),
            m.map_or_else(String::new, |m| m.to_string()),
            cell(value),
            exact,
            cell(reference),
            cell(bound),
            err,
        ]
    };
    for (fi, f) in fs.iter().enumerate() {
        let poly = trace_polynomial(&scheme, f)?;
        let degree = poly.degree();
        degrees.push(degree);
        for &theta in &c.theta {
            let geo = poly.evaluate(theta);
            match twisted_spectral(&scheme, theta, f, c.tail_tol) {
                Ok(sp) => {
                    if (geo.re - sp.value).abs() > sp.tail_bound + 1e-9 || geo.im.abs() > 1e-9 {
                        report.fail(None, &Error::Invariant(format!("twisted Poisson fails at theta = {theta} for f{fi}")));
                    }
                    report.push(row(fi, "twisted", None, Some(theta), None, Some(geo.re), String::new(), Some(sp.value), Some(sp.tail_bound), String::new()));
                }
                Err(e) => {
                    report.push(row(fi, "twisted", None, Some(theta), None, Some(geo.re), String::new(), None, None, e.to_string()));
                    report.fail(None, &e);
                }
            }
        }
        let lemma = check_lemma42_independence(&scheme, f, &ns)?;
        for r in &lemma.rows {
            report.push(row(fi, "l2_trace", Some(r.n), None, None, Some(r.float), r.exact.to_string(), Some(to_f64(&lemma.l2_trace)), None, String::new()));
        }
        if !lemma.exact_agreement() {
            report.fail(None, &Error::Invariant(format!("relative trace depends on n for f{fi}")));
        }
        let prop = check_prop43(&scheme, f, &ns)?;
        for r in &prop.rows {
            report.push(row(fi, "defect", Some(r.n), None, None, Some(to_f64(&r.delta)), r.delta.to_string(), None, Some(prop.threshold as f64), String::new()));
        }
        if !prop.consistent() {
            report.fail(None, &Error::Invariant(format!("defect threshold inconsistent for f{fi}")));
        }
        let m = c.quadrature.unwrap_or(2 * degree + 1);
        let direct = check_direct_integral(&scheme, f, m);
        let spectral = spectral_measure_integral(&scheme, f, m, c.tail_tol);
        match (&direct, &spectral) {
            (Ok(d), Ok(s)) => {
                report.push(row(fi, "direct_integral", None, None, Some(m), Some(d.quadrature), d.quadrature_exact.to_string(), Some(to_f64(&d.l2_trace)), Some(d.error()), String::new()));
                report.push(row(fi, "spectral_integral", None, None, Some(m), Some(s.value), String::new(), Some(d.quadrature), Some(s.tail_bound), String::new()));
            }
            (Err(e), _) | (_, Err(e)) => {
                report.push(row(fi, "direct_integral", None, None, Some(m), None, String::new(), None, None, e.to_string()));
                report.fail(None, e);
            }
        }
        thresholds.push(prop.threshold);
        defects.push(prop.rows.clone());
        functions.push(json!({
            "degree": degree,
            "threshold": prop.threshold,
            "l2_trace": lemma.l2_trace.to_string(),
            "trace_polynomial": poly,
            "independence": lemma,
            "direct_integral": direct.ok(),
            "spectral_integral": spectral.ok(),
        }));
    }
    report.details = json!({
        "theta_grid": c.theta,
        "degree": degrees,
        "thresholds": thresholds,
        "defects": defects,
        "functions": functions,
    });
    Ok(report)
}
