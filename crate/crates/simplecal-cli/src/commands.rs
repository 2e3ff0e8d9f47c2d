//! Implementations of the CLI verbs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use simplecal::aquifer::{
    build_zoning_simplification, default_proposal_sd, forward_data, forward_prediction,
    generate_data, linearize, metropolis_nonlinear_posterior, AquiferConfig, AquiferState,
};
use simplecal::conservativeness::{check_scheme, mc_oracle, ConservativenessReport};
use simplecal::model::{balanced_error_residual, propagate_prior, HighFidelityModel, Simplification};
use simplecal::schemes::{
    compensated_rank_condition, check_prediction_structure, make_filter, make_tsvd_filter,
    run_compensated, run_data_driven, run_naive, run_optimal, DataFilter, SchemeResult,
};
use simplecal::{Matrix64, Vector64};

use crate::matfile;
use crate::problem::{self, ProblemSpec, SchemeChoice};
use crate::{CliError, FilterArgs};

pub const DEFAULT_TOL: f64 = 1e-8;

fn input_error(message: String) -> CliError {
    CliError { code: 2, message }
}

fn lib_error(e: simplecal::Error) -> CliError {
    let code = match e {
        simplecal::Error::SingularInnovation { .. }
        | simplecal::Error::FilterRankError(_)
        | simplecal::Error::NumericalFailure(_)
        | simplecal::Error::InsufficientSamples(_) => 3,
        _ => 2,
    };
    CliError {
        code,
        message: e.to_string(),
    }
}

fn ensure_out_dir(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| input_error(format!("cannot create output directory {}: {e}", out.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))
}

fn save_matrix(path: &Path, m: &Matrix64) -> Result<(), CliError> {
    matfile::write_matrix(path, m).map_err(|e| input_error(e.to_string()))
}

fn require_simplification(
    spec: &ProblemSpec,
    model: &HighFidelityModel<f64>,
) -> Result<Simplification<f64>, CliError> {
    let c = spec
        .c
        .as_ref()
        .ok_or_else(|| input_error("this scheme needs a simplification matrix `c`".into()))?;
    Simplification::new(model, c.clone()).map_err(lib_error)
}

fn resolve_filter(
    args: &FilterArgs,
    spec: &ProblemSpec,
    model: &HighFidelityModel<f64>,
    simp: &Simplification<f64>,
) -> Result<DataFilter<f64>, CliError> {
    let f = if let Some(path) = &args.filter {
        matfile::read_matrix(path).map_err(|e| input_error(e.to_string()))?
    } else if let Some(k) = args.tsvd_k.or(spec.tsvd_k) {
        make_tsvd_filter(simp, k).map_err(lib_error)?
    } else if let Some(f) = &spec.f {
        f.clone()
    } else {
        Matrix64::identity(model.dim_d(), model.dim_d())
    };
    make_filter(model, simp, f).map_err(lib_error)
}

struct AuditLine {
    name: &'static str,
    holds: bool,
    detail: String,
    licenses: &'static str,
}

impl AuditLine {
    fn render(&self) -> String {
        format!(
            "{:<22} {:<4} {} — licenses: {}",
            self.name,
            if self.holds { "PASS" } else { "FAIL" },
            self.detail,
            self.licenses
        )
    }
}

fn audit_conditions(
    model: &HighFidelityModel<f64>,
    simp: &Simplification<f64>,
    filter: &DataFilter<f64>,
    tol: f64,
) -> Result<Vec<AuditLine>, CliError> {
    let mut lines = Vec::new();

    let optimality = simp.check_optimality(model, tol);
    lines.push(AuditLine {
        name: "optimal-simplification",
        holds: optimality.is_optimal,
        detail: format!(
            "data residual {:.3e}, prediction residual {:.3e} (tol {tol:.1e})",
            optimality.data_residual, optimality.pred_residual
        ),
        licenses: "naive scheme reproduces the optimal posterior",
    });

    let (sigma_v, _) = propagate_prior(model, simp);
    let residual = balanced_error_residual(model, simp, &sigma_v).map_err(lib_error)?;
    let residual_rel = residual.norm() / model.y().norm().max(f64::EPSILON);
    lines.push(AuditLine {
        name: "balanced-error",
        holds: residual_rel <= tol,
        detail: format!("relative residual {residual_rel:.3e} (tol {tol:.1e})"),
        licenses: "naive scheme stays conservative despite the simplification",
    });

    let rank_ok = compensated_rank_condition(model, simp).map_err(lib_error)?;
    lines.push(AuditLine {
        name: "rank-condition",
        holds: rank_ok,
        detail: format!(
            "stacked data/prediction map keeps its rank under the simplification: {}",
            if rank_ok { "yes" } else { "no" }
        ),
        licenses: "compensated scheme reproduces the optimal posterior",
    });

    let structure = check_prediction_structure(model, simp, filter, tol).map_err(lib_error)?;
    lines.push(AuditLine {
        name: "prediction-structure",
        holds: structure.holds,
        detail: format!(
            "relative residual {:.3e} (tol {tol:.1e})",
            structure.residual_norm
        ),
        licenses: "data-driven scheme is conservative",
    });

    Ok(lines)
}

fn matrix_inline(m: &Matrix64) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let cols: Vec<String> = (0..m.ncols()).map(|j| format!("{:.6e}", m[(i, j)])).collect();
            cols.join(", ")
        })
        .collect();
    format!("[{}]", rows.join("; "))
}

fn describe_result(result: &SchemeResult<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scheme: {}", result.kind);
    let _ = writeln!(
        out,
        "posterior mean: {}",
        matrix_inline(&Matrix64::from_fn(result.posterior.mean().len(), 1, |i, _| {
            result.posterior.mean()[i]
        }))
    );
    let _ = writeln!(
        out,
        "posterior covariance: {}",
        matrix_inline(result.posterior.covariance())
    );
    if result.prior_rowspace_inflated {
        let _ = writeln!(
            out,
            "effective prior: rowspace block inflated without bound; stored nullspace block: {}",
            matrix_inline(&result.effective_prior)
        );
    } else {
        let _ = writeln!(out, "effective prior: {}", matrix_inline(&result.effective_prior));
    }
    out
}

pub struct RunArgs {
    pub spec: PathBuf,
    pub scheme: Option<SchemeChoice>,
    pub filter: FilterArgs,
    pub tol: Option<f64>,
    pub strict: bool,
    pub out: PathBuf,
}

pub fn cmd_run(args: RunArgs) -> Result<i32, CliError> {
    let spec = problem::load(&args.spec).map_err(|e| input_error(e.to_string()))?;
    let scheme = args
        .scheme
        .or(spec.scheme)
        .unwrap_or(SchemeChoice::Optimal);
    let tol = args.tol.or(spec.tol).unwrap_or(DEFAULT_TOL);
    let model = spec.build_model().map_err(lib_error)?;
    let d = spec
        .d
        .clone()
        .ok_or_else(|| input_error("`run` needs a dataset `d` in the problem spec".into()))?;

    let mut conditions = String::new();
    let mut strict_violation = None;
    let result = match scheme {
        SchemeChoice::Optimal => run_optimal(&model, &d).map_err(lib_error)?,
        SchemeChoice::Naive => {
            let simp = require_simplification(&spec, &model)?;
            let optimality = simp.check_optimality(&model, tol);
            let (sigma_v, _) = propagate_prior(&model, &simp);
            let residual = balanced_error_residual(&model, &simp, &sigma_v).map_err(lib_error)?;
            let residual_rel = residual.norm() / model.y().norm().max(f64::EPSILON);
            let _ = writeln!(
                conditions,
                "optimal-simplification: {} (data {:.3e}, prediction {:.3e})",
                if optimality.is_optimal { "holds" } else { "fails" },
                optimality.data_residual,
                optimality.pred_residual
            );
            let _ = writeln!(
                conditions,
                "balanced-error: {} (relative residual {:.3e})",
                if residual_rel <= tol { "holds" } else { "fails" },
                residual_rel
            );
            if !optimality.is_optimal && residual_rel > tol {
                strict_violation = Some(
                    "naive scheme has no conservativeness license \
                     (simplification suboptimal and balanced-error fails)",
                );
            }
            run_naive(&model, &simp, &d).map_err(lib_error)?
        }
        SchemeChoice::Compensated => {
            let simp = require_simplification(&spec, &model)?;
            let result = run_compensated(&model, &simp, &d).map_err(lib_error)?;
            let rank_ok = result.rank_condition_holds == Some(true);
            let optimal = run_optimal(&model, &d).map_err(lib_error)?;
            let mean_gap = (result.posterior.mean() - optimal.posterior.mean()).norm()
                / optimal.posterior.mean().norm().max(1e-12);
            let cov_gap = (result.posterior.covariance() - optimal.posterior.covariance()).norm()
                / optimal.posterior.covariance().norm().max(1e-12);
            let _ = writeln!(
                conditions,
                "rank-condition: {}",
                if rank_ok {
                    "holds (optimality guaranteed)"
                } else {
                    "fails (optimality not guaranteed)"
                }
            );
            let _ = writeln!(
                conditions,
                "posterior vs optimal: relative gaps mean {mean_gap:.3e}, covariance {cov_gap:.3e}{}",
                if mean_gap.max(cov_gap) <= tol {
                    " — matches the optimal posterior within tolerance"
                } else {
                    ""
                }
            );
            if !rank_ok {
                strict_violation = Some("compensated scheme rank condition fails");
            }
            result
        }
        SchemeChoice::DataDriven => {
            let simp = require_simplification(&spec, &model)?;
            let filter = resolve_filter(&args.filter, &spec, &model, &simp)?;
            let structure = check_prediction_structure(&model, &simp, &filter, tol)
                .map_err(lib_error)?;
            let _ = writeln!(
                conditions,
                "prediction-structure: {} (relative residual {:.3e})",
                if structure.holds { "holds" } else { "fails" },
                structure.residual_norm
            );
            if !structure.holds {
                strict_violation = Some("data-driven structure condition fails");
            }
            run_data_driven(&model, &simp, &filter, &d).map_err(lib_error)?
        }
    };

    ensure_out_dir(&args.out)?;
    matfile::write_vector(&args.out.join("posterior_mean.csv"), result.posterior.mean())
        .map_err(|e| input_error(e.to_string()))?;
    save_matrix(&args.out.join("posterior_cov.csv"), result.posterior.covariance())?;
    save_matrix(&args.out.join("estimator.csv"), &result.estimator)?;
    save_matrix(&args.out.join("effective_prior.csv"), &result.effective_prior)?;
    save_matrix(&args.out.join("pred_map.csv"), &result.pred_map)?;

    let mut report = describe_result(&result);
    if !conditions.is_empty() {
        let _ = writeln!(report, "condition checks:");
        report.push_str(&conditions);
    }
    write_text(&args.out.join("report.txt"), &report)?;
    print!("{report}");
    println!("outputs written to {}", args.out.display());

    if args.strict {
        if let Some(reason) = strict_violation {
            eprintln!("strict mode: {reason}");
            return Ok(1);
        }
    }
    Ok(0)
}

pub struct AuditArgs {
    pub spec: PathBuf,
    pub filter: FilterArgs,
    pub tol: Option<f64>,
    pub strict: bool,
    pub out: Option<PathBuf>,
}

pub fn cmd_audit(args: AuditArgs) -> Result<i32, CliError> {
    let spec = problem::load(&args.spec).map_err(|e| input_error(e.to_string()))?;
    let tol = args.tol.or(spec.tol).unwrap_or(DEFAULT_TOL);
    let model = spec.build_model().map_err(lib_error)?;
    let simp = require_simplification(&spec, &model)?;
    let filter = resolve_filter(&args.filter, &spec, &model, &simp)?;
    let lines = audit_conditions(&model, &simp, &filter, tol)?;

    let mut text = String::new();
    for line in &lines {
        let _ = writeln!(text, "{}", line.render());
    }
    print!("{text}");
    if let Some(out) = &args.out {
        ensure_out_dir(out)?;
        write_text(&out.join("audit.txt"), &text)?;
    }
    if args.strict && lines.iter().any(|l| !l.holds) {
        return Ok(1);
    }
    Ok(0)
}

fn render_conservativeness(
    report: &ConservativenessReport<f64>,
    uv_note: Option<bool>,
    optimal_cov_norm: f64,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "verdict: {}", report.verdict);
    let _ = writeln!(
        out,
        "expected dominance-gap matrix: {}",
        matrix_inline(&report.omega_expected)
    );
    let _ = writeln!(out, "minimum eigenvalue: {:.6e}", report.min_eigenvalue);
    if let Some(independent) = uv_note {
        let _ = writeln!(
            out,
            "modelled/unmodelled components independent under the prior: {}",
            if independent { "yes" } else { "no" }
        );
    }
    if let Some(mc) = &report.mc_estimate {
        let discrepancy = (mc - &report.omega_expected).norm() / optimal_cov_norm.max(1e-300);
        let _ = writeln!(
            out,
            "monte carlo estimate ({} samples): {} (relative discrepancy {:.3e})",
            report.mc_samples,
            matrix_inline(mc),
            discrepancy
        );
    }
    out
}

pub struct ConservativenessArgs {
    pub spec: PathBuf,
    pub scheme: Option<SchemeChoice>,
    pub filter: FilterArgs,
    pub mc_samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

pub fn cmd_conservativeness(args: ConservativenessArgs) -> Result<i32, CliError> {
    let spec = problem::load(&args.spec).map_err(|e| input_error(e.to_string()))?;
    let scheme = args
        .scheme
        .or(spec.scheme)
        .ok_or_else(|| input_error("select a scheme with --scheme or in the problem spec".into()))?;
    let model = spec.build_model().map_err(lib_error)?;
    // The posterior covariance and the data-to-mean map fully determine the
    // verdict; the dataset itself is irrelevant.
    let zero_d = Vector64::zeros(model.dim_d());
    let mut uv_note = None;
    let result = match scheme {
        SchemeChoice::Optimal => run_optimal(&model, &zero_d).map_err(lib_error)?,
        SchemeChoice::Naive | SchemeChoice::Compensated => {
            let simp = require_simplification(&spec, &model)?;
            let (sigma_v, errs) = propagate_prior(&model, &simp);
            uv_note = Some(errs.uv_independent(&sigma_v, 1e-10));
            if scheme == SchemeChoice::Naive {
                run_naive(&model, &simp, &zero_d).map_err(lib_error)?
            } else {
                run_compensated(&model, &simp, &zero_d).map_err(lib_error)?
            }
        }
        SchemeChoice::DataDriven => {
            let simp = require_simplification(&spec, &model)?;
            let (sigma_v, errs) = propagate_prior(&model, &simp);
            uv_note = Some(errs.uv_independent(&sigma_v, 1e-10));
            let filter = resolve_filter(&args.filter, &spec, &model, &simp)?;
            run_data_driven(&model, &simp, &filter, &zero_d).map_err(lib_error)?
        }
    };

    let mut report =
        check_scheme(&model, &result.pred_map, result.posterior.covariance()).map_err(lib_error)?;
    let optimal = run_optimal(&model, &zero_d).map_err(lib_error)?;
    let mc_samples = args.mc_samples.or(spec.mc_samples).unwrap_or(0);
    if mc_samples > 0 {
        let seed = args.seed.or(spec.seed).unwrap_or(0);
        let mc = mc_oracle(
            &model,
            &result.pred_map,
            result.posterior.covariance(),
            mc_samples,
            seed,
        )
        .map_err(lib_error)?;
        report.mc_estimate = Some(mc);
        report.mc_samples = mc_samples;
    }

    let mut text = format!("scheme: {}\n", result.kind);
    text.push_str(&render_conservativeness(
        &report,
        uv_note,
        optimal.posterior.covariance().norm(),
    ));
    print!("{text}");
    if let Some(out) = &args.out {
        ensure_out_dir(out)?;
        write_text(&out.join("conservativeness.txt"), &text)?;
    }
    Ok(0)
}

pub struct FilterTsvdArgs {
    pub spec: PathBuf,
    pub tsvd_k: Option<usize>,
    pub out: PathBuf,
}

pub fn cmd_filter_tsvd(args: FilterTsvdArgs) -> Result<i32, CliError> {
    let spec = problem::load(&args.spec).map_err(|e| input_error(e.to_string()))?;
    let model = spec.build_model().map_err(lib_error)?;
    let simp = require_simplification(&spec, &model)?;
    let k = args
        .tsvd_k
        .or(spec.tsvd_k)
        .ok_or_else(|| input_error("pass the truncation index with --tsvd-k".into()))?;
    let f = make_tsvd_filter(&simp, k).map_err(lib_error)?;
    ensure_out_dir(&args.out)?;
    let path = args.out.join("f_tsvd.csv");
    save_matrix(&path, &f)?;
    println!(
        "wrote {}x{} truncation filter (k = {k}) to {}",
        f.nrows(),
        f.ncols(),
        path.display()
    );
    Ok(0)
}

pub struct ExampleArgs {
    pub out: PathBuf,
    pub seed: u64,
    pub mc_samples: usize,
    pub mcmc_iters: usize,
}

pub fn cmd_example(args: ExampleArgs) -> Result<i32, CliError> {
    let out = &args.out;
    ensure_out_dir(out)?;
    let cfg = AquiferConfig::<f64>::default();
    let model = linearize(&cfg).map_err(lib_error)?;
    let c = build_zoning_simplification(&cfg, false);
    let simp = Simplification::new(&model, c.clone()).map_err(lib_error)?;
    let filter = make_filter(&model, &simp, Matrix64::identity(1, 1)).map_err(lib_error)?;

    let measured = generate_data(&cfg).map_err(lib_error)?;
    let mean_state = AquiferState::prior_mean(&cfg);
    let data_at_mean = forward_data(&cfg, &mean_state).map_err(lib_error)?;
    let pred_at_mean = forward_prediction(&cfg, &mean_state).map_err(lib_error)?;
    let d = Vector64::from_element(1, measured - data_at_mean);

    // Model files plus a ready-to-use problem spec, so the other verbs can
    // be pointed straight at the generated directory.
    save_matrix(&out.join("g.csv"), model.g())?;
    save_matrix(&out.join("y.csv"), model.y())?;
    save_matrix(&out.join("sigma_x.csv"), model.sigma_x())?;
    save_matrix(&out.join("sigma_ed.csv"), model.sigma_ed())?;
    save_matrix(&out.join("sigma_ep.csv"), model.sigma_ep())?;
    save_matrix(&out.join("c.csv"), &c)?;
    let spec_text = format!(
        "# 1-D confined aquifer example (heads as increments about the prior mean)\n\
         g = g.csv\ny = y.csv\nsigma_x = sigma_x.csv\nsigma_ed = sigma_ed.csv\n\
         sigma_ep = sigma_ep.csv\nc = c.csv\nd = {:.16e}\nscheme = naive\n",
        d[0]
    );
    write_text(&out.join("problem.spec"), &spec_text)?;

    let optimal = run_optimal(&model, &d).map_err(lib_error)?;
    let naive = run_naive(&model, &simp, &d).map_err(lib_error)?;
    let compensated = run_compensated(&model, &simp, &d).map_err(lib_error)?;
    let data_driven = run_data_driven(&model, &simp, &filter, &d).map_err(lib_error)?;

    let (sigma_v, _) = propagate_prior(&model, &simp);
    save_matrix(&out.join("sigma_v.csv"), &sigma_v)?;
    save_matrix(&out.join("sigma_v_opt.csv"), &compensated.effective_prior)?;
    save_matrix(&out.join("sigma_v_dat.csv"), &data_driven.effective_prior)?;

    // Densities of the predicted head (absolute, meters) on a grid spanning
    // the widest scheme's mean ± 4 sd.
    let schemes = [&optimal, &naive, &compensated, &data_driven];
    let abs_mean = |r: &SchemeResult<f64>| pred_at_mean + r.posterior.mean()[0];
    let sd = |r: &SchemeResult<f64>| r.posterior.covariance()[(0, 0)].sqrt();
    let (center, width) = schemes
        .iter()
        .map(|r| (abs_mean(r), sd(r)))
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    let lo = center - 4.0 * width;
    let hi = center + 4.0 * width;
    let normal_pdf = |mu: f64, sigma: f64, p: f64| {
        let z = (p - mu) / sigma;
        (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    };
    let mut densities = String::from("head_m,optimal,naive,compensated,data_driven\n");
    for i in 0..401 {
        let p = lo + (hi - lo) * (i as f64) / 400.0;
        let row: Vec<String> = schemes
            .iter()
            .map(|r| format!("{:.16e}", normal_pdf(abs_mean(r), sd(r), p)))
            .collect();
        let _ = writeln!(densities, "{:.16e},{}", p, row.join(","));
    }
    write_text(&out.join("densities.csv"), &densities)?;

    // Metropolis run on the nonlinear posterior and its histogram over the
    // same grid range.
    let proposal = default_proposal_sd(&cfg);
    let mcmc = metropolis_nonlinear_posterior(&cfg, measured, args.mcmc_iters, &proposal, args.seed)
        .map_err(lib_error)?;
    let preds = mcmc.prediction_samples(&cfg).map_err(lib_error)?;
    let n_bins = 50;
    let mut counts = vec![0usize; n_bins];
    let bin_width = (hi - lo) / n_bins as f64;
    for &p in preds.iter() {
        if p >= lo && p < hi {
            counts[((p - lo) / bin_width) as usize] += 1;
        }
    }
    let mut histogram = String::from("bin_left,bin_right,density\n");
    for (b, &count) in counts.iter().enumerate() {
        let left = lo + b as f64 * bin_width;
        let density = count as f64 / (preds.len() as f64 * bin_width);
        let _ = writeln!(histogram, "{:.16e},{:.16e},{:.16e}", left, left + bin_width, density);
    }
    write_text(&out.join("mcmc_histogram.csv"), &histogram)?;

    let audit = audit_conditions(&model, &simp, &filter, DEFAULT_TOL)?;
    let audit_text: String = audit.iter().map(|l| l.render() + "\n").collect();
    write_text(&out.join("audit.txt"), &audit_text)?;

    for (result, name, seed_offset) in [
        (&naive, "conservativeness_naive.txt", 1),
        (&data_driven, "conservativeness_data_driven.txt", 2),
    ] {
        let mut report = check_scheme(&model, &result.pred_map, result.posterior.covariance())
            .map_err(lib_error)?;
        if args.mc_samples > 0 {
            let mc = mc_oracle(
                &model,
                &result.pred_map,
                result.posterior.covariance(),
                args.mc_samples,
                args.seed + seed_offset,
            )
            .map_err(lib_error)?;
            report.mc_estimate = Some(mc);
            report.mc_samples = args.mc_samples;
        }
        let (sigma_v, errs) = propagate_prior(&model, &simp);
        let text = format!(
            "scheme: {}\n{}",
            result.kind,
            render_conservativeness(
                &report,
                Some(errs.uv_independent(&sigma_v, 1e-10)),
                optimal.posterior.covariance().norm(),
            )
        );
        write_text(&out.join(name), &text)?;
    }

    let mut report = String::new();
    let _ = writeln!(report, "1-D confined aquifer example");
    let _ = writeln!(report, "measured head: {measured:.4} m (increment {:+.4} m)", d[0]);
    let _ = writeln!(report, "zone-propagated prior:      {}", matrix_inline(&sigma_v));
    let _ = writeln!(
        report,
        "compensating prior:         {}",
        matrix_inline(&compensated.effective_prior)
    );
    let _ = writeln!(
        report,
        "data-driven prior (finite nullspace block; rowspace inflated): {}",
        matrix_inline(&data_driven.effective_prior)
    );
    for r in schemes {
        let _ = writeln!(
            report,
            "{:<12} posterior head: mean {:.4} m, sd {:.4} m",
            r.kind.to_string(),
            abs_mean(r),
            sd(r)
        );
    }
    let _ = writeln!(
        report,
        "metropolis: {} iterations, acceptance rate {:.3}, prediction sample mean {:.4} m",
        args.mcmc_iters,
        mcmc.acceptance_rate,
        preds.mean()
    );
    let _ = writeln!(report, "condition audit:");
    report.push_str(&audit_text);
    write_text(&out.join("report.txt"), &report)?;
    print!("{report}");
    println!("example artifacts written to {}", out.display());
    Ok(0)
}
