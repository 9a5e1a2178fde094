//! Per-sigma sub-runs and the family-level checks for each experiment kind.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use thinlab_core::asymptotic::{derivative_list_residuals, deviation, solve_asymptotic};
use thinlab_core::barrier::{
    comparison_check, verify_h_bounds, verify_y_supersolution, wedge_samples, BarrierParams,
};
use thinlab_core::coefficients::validate_bounds;
use thinlab_core::norms::{product_seminorm, profile_weighted_norm};
use thinlab_core::solver::local_schauder_check;
use thinlab_core::transforms::{
    chain_rule_residual, check_rweighted_bounds, domain_samples, image_profile, p1_flatten,
    p2_straighten, p3_reflect, push_operator, Composite, PlaneMap,
};
use thinlab_core::{
    make_profile, solve_bvp, validate_ellipticity, validate_smallness, AnalyticField, BVPSpec,
    BoundaryProfile, CoefficientSet, DiscreteSolution, Poly2, Smooth1d, TwiceDifferentiable,
};

use crate::config::{ExperimentConfig, ExperimentKind, MapName};
use crate::error::{CliError, Context};

/// One line of the aggregate CSV. Quantities a kind does not produce stay empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Row {
    pub kind: String,
    pub sigma: f64,
    pub x0: Option<f64>,
    pub nx: usize,
    pub ny: usize,
    pub residual: Option<f64>,
    pub norm_ratio: Option<f64>,
    pub y_margin: Option<f64>,
    pub h_margin: Option<f64>,
    pub window_constant: Option<f64>,
    pub dev0: Option<f64>,
    pub dev1: Option<f64>,
    pub dev2: Option<f64>,
    pub fitted_slope: Option<f64>,
    pub error: Option<f64>,
    pub order: Option<f64>,
    pub round_trip: Option<f64>,
    pub chain_rule: Option<f64>,
    pub r_d1: Option<f64>,
    pub r_e1: Option<f64>,
    pub embed_ratio: Option<f64>,
}

pub struct SubRun {
    pub index: usize,
    pub sigma: f64,
    pub rows: Vec<Row>,
    pub report: Value,
    pub warnings: Vec<String>,
    pub solutions: Vec<(String, DiscreteSolution)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: &'static str,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn le(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: "<=",
            threshold,
            pass: value <= threshold,
        }
    }

    fn ge(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: ">=",
            threshold,
            pass: value >= threshold,
        }
    }

    fn lt(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: "<",
            threshold,
            pass: value < threshold,
        }
    }

    fn gt(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: ">",
            threshold,
            pass: value > threshold,
        }
    }
}

/// Problem data shared by every sub-run.
pub struct Setup<'a> {
    pub cfg: &'a ExperimentConfig,
    pub coefficients: CoefficientSet,
    pub phi: Smooth1d,
    pub psi: Option<Smooth1d>,
    pub lower: Option<Smooth1d>,
    pub gamma: f64,
    pub warnings: Vec<String>,
}

impl<'a> Setup<'a> {
    pub fn new(cfg: &'a ExperimentConfig) -> Result<Self, CliError> {
        let gamma = cfg.problem.profile.gamma;
        let coefficients = cfg
            .problem
            .coefficients
            .build(gamma)
            .ctx(|| "problem.coefficients".into())?;
        validate_ellipticity(&coefficients, 64).ctx(|| "problem.coefficients".into())?;
        let mut warnings = Vec::new();
        let bounds = validate_bounds(&coefficients, 64);
        if !bounds.pass {
            warnings.push(format!(
                "coefficient bounds exceed Lambda = {}",
                bounds.big_lambda
            ));
        }
        let seed = cfg.seed;
        let psi = cfg
            .problem
            .psi
            .as_ref()
            .map(|f| f.build(seed.wrapping_add(1)));
        let lower = cfg
            .problem
            .lower_dirichlet
            .as_ref()
            .map(|f| f.build(seed.wrapping_add(2)));
        if cfg.kind == ExperimentKind::AsymptoticStudy && (psi.is_some() || lower.is_some()) {
            warnings.push("the limit state ignores psi and lower_dirichlet".into());
        }
        Ok(Self {
            cfg,
            coefficients,
            phi: cfg.problem.phi.build(seed),
            psi,
            lower,
            gamma,
            warnings,
        })
    }

    fn profile(&self, sigma: f64, warnings: &mut Vec<String>) -> Result<BoundaryProfile, CliError> {
        let p = make_profile(&self.cfg.problem.profile.descriptor(sigma)).at(sigma)?;
        if let Some(s0) = self.cfg.tolerances.sigma0 {
            let r = validate_smallness(&p, s0).at(sigma)?;
            if !r.pass {
                warnings.push(format!(
                    "sigma = {sigma}: profile norm {} exceeds sigma0 = {s0}",
                    r.norm
                ));
            }
        }
        Ok(p)
    }

    fn spec(&self, profile: BoundaryProfile) -> BVPSpec {
        let mut s = BVPSpec::new(self.coefficients.clone(), profile, self.phi.clone());
        if let Some(p) = &self.psi {
            s = s.with_psi(p.clone());
        }
        if let Some(g) = &self.lower {
            s = s.with_lower_dirichlet(g.clone());
        }
        s
    }

    fn row(&self, sigma: f64, nx: usize, ny: usize) -> Row {
        Row {
            kind: self.cfg.kind.name().into(),
            sigma,
            nx,
            ny,
            ..Row::default()
        }
    }

    pub fn run_one(&self, index: usize, sigma: f64) -> Result<SubRun, CliError> {
        let mut warnings = Vec::new();
        let profile = self.profile(sigma, &mut warnings)?;
        let nx = self.cfg.grid.nx_for(sigma);
        let ny = self.cfg.grid.ny;
        let mut out = SubRun {
            index,
            sigma,
            rows: Vec::new(),
            report: Value::Null,
            warnings: Vec::new(),
            solutions: Vec::new(),
        };
        let summary = profile.summary();
        let report = match self.cfg.kind {
            ExperimentKind::ShrinkStudy => self.shrink(&mut out, profile, nx, ny)?,
            ExperimentKind::BarrierReport => self.barrier(&mut out, profile, nx, ny)?,
            ExperimentKind::AsymptoticStudy => self.asymptotic(&mut out, profile, nx, ny)?,
            ExperimentKind::TransformAudit => self.transform(&mut out, profile, &mut warnings)?,
            ExperimentKind::WeightedStudy => self.weighted(&mut out, profile),
            ExperimentKind::MmsConvergence => self.mms(&mut out, profile, nx, ny)?,
        };
        out.report = json!({ "profile": summary, "result": report });
        out.warnings = warnings;
        if !self.cfg.dump_solutions {
            out.solutions.clear();
        }
        Ok(out)
    }

    fn solve(
        &self,
        out: &mut SubRun,
        spec: &BVPSpec,
        nx: usize,
        ny: usize,
    ) -> Result<DiscreteSolution, CliError> {
        let u = solve_bvp(spec, nx, ny).at(out.sigma)?;
        if self.cfg.dump_solutions {
            out.solutions.push((format!("{nx}x{ny}"), u.clone()));
        }
        Ok(u)
    }

    fn shrink(
        &self,
        out: &mut SubRun,
        profile: BoundaryProfile,
        nx: usize,
        ny: usize,
    ) -> Result<Value, CliError> {
        let spec = self.spec(profile);
        let u = self.solve(out, &spec, nx, ny)?;
        let r = local_schauder_check(&u, &spec);
        out.rows.push(Row {
            residual: Some(u.residual),
            norm_ratio: Some(r.ratio_global),
            ..self.row(out.sigma, nx, ny)
        });
        Ok(json!({ "solution": u.header(), "schauder": r }))
    }

    fn barrier(
        &self,
        out: &mut SubRun,
        profile: BoundaryProfile,
        nx: usize,
        ny: usize,
    ) -> Result<Value, CliError> {
        let b = &self.cfg.barrier;
        let c = &self.coefficients;
        let spec = self.spec(profile.clone());
        let u = if b.comparison {
            Some(self.solve(out, &spec, nx, ny)?)
        } else {
            None
        };
        let mut per_x0 = Vec::new();
        for &x0 in &b.x0 {
            let mut row = Row {
                x0: Some(x0),
                residual: u.as_ref().map(|u| u.residual),
                ..self.row(out.sigma, nx, ny)
            };
            let mut entry = json!({ "x0": x0 });
            if b.margins {
                let mut params =
                    BarrierParams::new(&profile, x0, c.lambda, c.big_lambda, self.gamma)
                        .at(out.sigma)?;
                if let Some(m) = b.m {
                    params = params.weighted(m).at(out.sigma)?;
                }
                let y = verify_y_supersolution(c, &params, &wedge_samples(&params, b.nr, b.ntheta))
                    .at(out.sigma)?;
                let h = verify_h_bounds(c, &params, &profile).at(out.sigma)?;
                row.y_margin = Some(y.min_margin);
                row.h_margin = Some(h.min_margin());
                entry["y"] = json!(y);
                entry["h"] = json!(h);
            }
            if let Some(u) = &u {
                let cmp = comparison_check(u, &spec, x0, b.m).at(out.sigma)?;
                row.window_constant = Some(cmp.window_constant);
                entry["comparison"] = json!(cmp);
            }
            out.rows.push(row);
            per_x0.push(entry);
        }
        Ok(json!({ "solution": u.as_ref().map(|u| u.header()), "x0": per_x0 }))
    }

    fn asymptotic(
        &self,
        out: &mut SubRun,
        profile: BoundaryProfile,
        nx: usize,
        ny: usize,
    ) -> Result<Value, CliError> {
        let spec = self.spec(profile);
        let u = self.solve(out, &spec, nx, ny)?;
        let xs: Vec<f64> = (0..=nx).map(|i| i as f64 / nx as f64).collect();
        let c = &self.coefficients;
        let a = solve_asymptotic(c, &c.g, &self.phi, &xs).at(out.sigma)?;
        let d = deviation(&u, &a).at(out.sigma)?;
        let lists = derivative_list_residuals(&u, &spec);
        out.rows.push(Row {
            residual: Some(u.residual),
            dev0: Some(d.sup[0]),
            dev1: Some(d.sup[1]),
            dev2: Some(d.sup[2]),
            ..self.row(out.sigma, nx, ny)
        });
        Ok(json!({
            "solution": u.header(),
            "deviation": d,
            "identity_residuals": a.identity_residuals(c, &c.g),
            "derivative_lists": lists,
        }))
    }

    fn transform(
        &self,
        out: &mut SubRun,
        profile: BoundaryProfile,
        warnings: &mut Vec<String>,
    ) -> Result<Value, CliError> {
        let sigma = out.sigma;
        let c = &self.coefficients;
        let mut current = profile.clone();
        let mut maps: Vec<Arc<dyn PlaneMap>> = Vec::new();
        let mut stages = Vec::new();
        for name in &self.cfg.transform.pipeline {
            let m: Arc<dyn PlaneMap> = match name {
                MapName::P1 => Arc::new(p1_flatten(&c.g, &current).at(sigma)?),
                MapName::P2 => Arc::new(p2_straighten(&current).at(sigma)?),
                MapName::P3 => Arc::new(p3_reflect()),
            };
            let rt = round_trip(m.as_ref(), &current);
            stages.push(json!({ "map": m.tag().to_string(), "round_trip": rt }));
            current = image_profile(m.clone(), &current).at(sigma)?;
            maps.push(m);
        }
        let whole: Arc<dyn PlaneMap> = if maps.len() == 1 {
            maps[0].clone()
        } else {
            Arc::new(Composite::new(maps.clone()))
        };
        let rt_whole = round_trip(whole.as_ref(), &profile);
        let rt = stages
            .iter()
            .filter_map(|s| s["round_trip"].as_f64())
            .fold(rt_whole, f64::max);

        let mut chain = 0.0f64;
        let probe = chain_probe();
        for m in maps.iter().chain(std::iter::once(&whole)) {
            for x in CHAIN_X {
                for eta in [0.2, 0.5, 0.8] {
                    let p = [x, eta * profile.eval(x)];
                    chain = chain.max(chain_rule_residual(c, m.as_ref(), &probe, p, 2e-3));
                }
            }
        }

        let t = push_operator(c, whole.clone(), Some(&profile)).at(sigma)?;
        let ell = t.ellipticity(128, 8).at(sigma)?;
        if !ell.pass {
            warnings.push(format!(
                "sigma = {sigma}: transformed quotient {} below lambda/2 = {}",
                ell.min_quotient, ell.required
            ));
        }
        let rw = check_rweighted_bounds(&t, self.cfg.transform.c_bar).at(sigma)?;
        out.rows.push(Row {
            round_trip: Some(rt),
            chain_rule: Some(chain),
            r_d1: Some(rw.sup_r_d1),
            r_e1: Some(rw.sup_r_e1),
            ..self.row(sigma, 0, 0)
        });
        Ok(json!({
            "pipeline": whole.tag().to_string(),
            "stages": stages,
            "round_trip": rt_whole,
            "chain_rule": chain,
            "ellipticity": ell,
            "r_weighted": rw,
            "image_profile": current.summary(),
        }))
    }

    fn weighted(&self, out: &mut SubRun, profile: BoundaryProfile) -> Value {
        let r = profile_weighted_norm(&profile, self.gamma);
        let prod = product_seminorm(&profile, self.gamma, 1024);
        out.rows.push(Row {
            embed_ratio: Some(r.embed_ratio),
            ..self.row(out.sigma, 0, 0)
        });
        json!({ "weighted": r, "product_seminorm": prod, "product_quotient": prod / (r.norm.value * r.norm.value) })
    }

    fn mms(
        &self,
        out: &mut SubRun,
        profile: BoundaryProfile,
        nx: usize,
        ny: usize,
    ) -> Result<Value, CliError> {
        let exact = AnalyticField::harmonic_cosh_cos();
        let spec = BVPSpec::manufactured(self.coefficients.clone(), profile, &exact);
        let coarse = self.solve(out, &spec, nx, ny)?;
        let fine = self.solve(out, &spec, 2 * nx, 2 * ny)?;
        let (e1, e2) = (max_error(&coarse, &exact), max_error(&fine, &exact));
        let order = (e1 / e2).log2();
        out.rows.push(Row {
            residual: Some(coarse.residual.max(fine.residual)),
            error: Some(e1),
            order: Some(order),
            ..self.row(out.sigma, nx, ny)
        });
        Ok(json!({
            "exact": exact.label(),
            "coarse": { "solution": coarse.header(), "max_error": e1 },
            "fine": { "solution": fine.header(), "max_error": e2 },
            "error_ratio": e1 / e2,
            "order": order,
        }))
    }
}

const CHAIN_X: [f64; 7] = [0.15, 0.3, 0.45, 0.6, 0.7, 0.86, 0.93];

fn chain_probe() -> Poly2 {
    Poly2::new(vec![
        (1.0, 0, 0),
        (0.7, 1, 0),
        (-1.3, 0, 2),
        (0.5, 2, 1),
        (0.4, 3, 0),
        (2.0, 1, 1),
    ])
}

fn round_trip(m: &dyn PlaneMap, profile: &BoundaryProfile) -> f64 {
    domain_samples(profile, 64, 8)
        .into_iter()
        .fold(0.0, |w, p| {
            let b = m.inverse(m.forward(p));
            w.max((b[0] - p[0]).abs()).max((b[1] - p[1]).abs())
        })
}

fn max_error(u: &DiscreteSolution, exact: &AnalyticField) -> f64 {
    let g = u.grid();
    let mut e = 0.0f64;
    for i in 0..=g.nx {
        for j in 0..=g.ny {
            let (x, y) = g.point(i, j);
            e = e.max((u.value(i, j) - exact.value(x, y)).abs());
        }
    }
    e
}

/// Least-squares slope of `ln v` against `ln s`.
pub fn loglog_slope(s: &[f64], v: &[f64]) -> f64 {
    let n = s.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = s.iter().zip(v).map(|(a, b)| (a.ln(), b.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn spread(v: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = v
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
            (a.min(x), b.max(x))
        });
    hi / lo
}

fn column(runs: &[SubRun], f: impl Fn(&Row) -> Option<f64>) -> Vec<f64> {
    runs.iter()
        .flat_map(|r| r.rows.iter().filter_map(&f))
        .collect()
}

/// Family-level acceptance checks. May also fill family columns of the rows.
pub fn family_checks(cfg: &ExperimentConfig, runs: &mut [SubRun]) -> Vec<Check> {
    let tol = &cfg.tolerances;
    let sigmas: Vec<f64> = runs.iter().map(|r| r.sigma).collect();
    let family = runs.len() >= 2;
    let mut checks = Vec::new();
    match cfg.kind {
        ExperimentKind::ShrinkStudy => {
            let ratios = column(runs, |r| r.norm_ratio);
            checks.push(Check::le(
                "finite_norm_ratios",
                ratios.iter().filter(|v| !v.is_finite()).count() as f64,
                0.0,
            ));
            if family {
                match tol.expect_growth {
                    Some(g) => checks.push(Check::ge(
                        "norm_ratio_growth",
                        ratios[ratios.len() - 1] / ratios[0],
                        g,
                    )),
                    None => checks.push(Check::le(
                        "norm_ratio_spread",
                        spread(ratios),
                        tol.ratio_max,
                    )),
                }
            }
        }
        ExperimentKind::BarrierReport => {
            if cfg.barrier.margins {
                let y = column(runs, |r| r.y_margin);
                let h = column(runs, |r| r.h_margin);
                checks.push(Check::gt(
                    "min_y_margin",
                    y.iter().copied().fold(f64::INFINITY, f64::min),
                    0.0,
                ));
                checks.push(Check::gt(
                    "min_h_margin",
                    h.iter().copied().fold(f64::INFINITY, f64::min),
                    0.0,
                ));
                if family {
                    let per_sigma = runs.iter().map(|r| {
                        r.rows
                            .iter()
                            .map(|row| {
                                row.y_margin
                                    .unwrap_or(f64::NAN)
                                    .min(row.h_margin.unwrap_or(f64::NAN))
                            })
                            .fold(f64::INFINITY, f64::min)
                    });
                    checks.push(Check::le(
                        "margin_minimum_spread",
                        spread(per_sigma),
                        tol.ratio_max,
                    ));
                }
            }
            if cfg.barrier.comparison && family {
                for (k, x0) in cfg.barrier.x0.iter().enumerate() {
                    let w = runs.iter().filter_map(|r| r.rows[k].window_constant);
                    checks.push(Check::le(
                        format!("window_constant_spread_x0_{x0}"),
                        spread(w),
                        tol.ratio_max,
                    ));
                }
            }
        }
        ExperimentKind::AsymptoticStudy => {
            if family {
                let mut slopes = Vec::new();
                for i in 0..3 {
                    let dev = column(runs, |r| [r.dev0, r.dev1, r.dev2][i]);
                    let worst = dev.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
                    checks.push(Check::lt(format!("dev{i}_successive_ratio"), worst, 1.0));
                    let s = loglog_slope(&sigmas, &dev);
                    checks.push(Check::ge(
                        format!("dev{i}_slope"),
                        s,
                        cfg.problem.profile.gamma - tol.slope_margin,
                    ));
                    slopes.push(s);
                }
                let min_slope = slopes.iter().copied().fold(f64::INFINITY, f64::min);
                for row in runs.iter_mut().flat_map(|r| r.rows.iter_mut()) {
                    row.fitted_slope = Some(min_slope);
                }
            }
        }
        ExperimentKind::TransformAudit => {
            let rt = column(runs, |r| r.round_trip);
            let ch = column(runs, |r| r.chain_rule);
            checks.push(Check::le(
                "max_round_trip",
                rt.iter().copied().fold(0.0, f64::max),
                tol.round_trip,
            ));
            checks.push(Check::le(
                "max_chain_rule_residual",
                ch.iter().copied().fold(0.0, f64::max),
                tol.chain_rule,
            ));
            let d1 = column(runs, |r| r.r_d1);
            let e1 = column(runs, |r| r.r_e1);
            let nonfinite = d1.iter().chain(&e1).filter(|v| !v.is_finite()).count();
            checks.push(Check::le(
                "nonfinite_r_weighted_sups",
                nonfinite as f64,
                0.0,
            ));
            if family {
                let halving = |v: &[f64]| v.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
                checks.push(Check::le(
                    "r_d1_halving_ratio",
                    halving(&d1),
                    tol.halving_ratio,
                ));
                checks.push(Check::le(
                    "r_e1_halving_ratio",
                    halving(&e1),
                    tol.halving_ratio,
                ));
            }
        }
        ExperimentKind::WeightedStudy => {
            let e = column(runs, |r| r.embed_ratio);
            checks.push(Check::le(
                "max_embed_ratio",
                e.iter().copied().fold(0.0, f64::max),
                tol.embed_constant,
            ));
        }
        ExperimentKind::MmsConvergence => {
            let o = column(runs, |r| r.order);
            checks.push(Check::ge(
                "min_order",
                o.iter().copied().fold(f64::INFINITY, f64::min),
                tol.order_min,
            ));
            checks.push(Check::le(
                "max_order",
                o.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                tol.order_max,
            ));
        }
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let s = [0.08, 0.04, 0.02, 0.01];
        let v: Vec<f64> = s.iter().map(|x: &f64| 3.0 * x.powf(0.7)).collect();
        assert!((loglog_slope(&s, &v) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn spread_is_max_over_min() {
        assert_eq!(spread([2.0, 1.0, 4.0]), 4.0);
    }

    #[test]
    fn checks_compare_as_labelled() {
        assert!(Check::le("a", 1.0, 1.0).pass);
        assert!(!Check::lt("a", 1.0, 1.0).pass);
        assert!(!Check::ge("a", f64::NAN, 0.0).pass);
    }
}
