//! Command implementations.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fock::{compare_with_gaussian, gibbs_check, OracleConfig};
use crate::gds::{GaussianState, NoiseMatrices};
use crate::linalg::{max_abs, RealMatrix, RealVector};
use crate::moments::{integrate_moments, is_hurwitz, lyapunov_solve, MomentConfig, DEFAULT_HURWITZ_TOL};
use crate::qdbc::{
    build_lindblad_vectors, build_noise, default_congruence_times, qome_coefficients, verify_congruence,
    verify_eigenoperators,
};
use crate::sampling::{random_qdbc_spec, random_qdbc_spec_with_modes, seeded};
use crate::symplectic::{williamson, POSITIVE_DEFINITE_TOL};
use crate::thermal::{closed_form_covariance, thermal_audit, ThermalAuditReport};

use super::model::{complex_pairs, load_audit_input, load_matrix, load_model, rows_from_matrix, AuditInput, Model, ModelFile};
use super::report::{write_csv, ModeRow, Report, Verdict};
use super::{base_tolerance, Cli, CliError, Command};

/// Oracle pass thresholds.
pub const ORACLE_MOMENT_TOL: f64 = 1e-4;
pub const ORACLE_GIBBS_TOL: f64 = 1e-5;
pub const ORACLE_GNS_TOL: f64 = 1e-6;

pub fn dispatch(cli: &Cli, echo: Vec<String>) -> Result<u8, CliError> {
    match &cli.command {
        Command::Build { model, out } => build(model, out.as_deref(), cli, echo),
        Command::Evolve {
            model,
            v0,
            mean0,
            tmax,
            dt,
            every,
            allow_nonstationary,
            out,
        } => {
            let opts = EvolveOptions {
                v0,
                mean0: mean0.as_deref(),
                tmax: *tmax,
                dt: *dt,
                every: *every,
                allow_nonstationary: *allow_nonstationary,
            };
            evolve(model, &opts, out.as_deref())
        }
        Command::Audit { input, out } => audit(input, out.as_deref(), cli, echo),
        Command::Sweep {
            model,
            beta_range,
            points,
            linear,
            out,
        } => sweep(model, beta_range, *points, *linear, out.as_deref(), cli.jobs),
        Command::Oracle {
            model,
            cutoff,
            tmax,
            dt,
            alpha,
            experimental,
            out,
        } => {
            let config = OracleConfig {
                cutoff: *cutoff,
                dt: *dt,
                t_max: *tmax,
                ..OracleConfig::default()
            };
            oracle(model, config, alpha.as_deref(), *experimental, out.as_deref(), cli, echo)
        }
        Command::Sample { modes, out } => sample(*modes, out.as_deref(), cli.seed),
    }
}

fn exit_code(report: &Report) -> u8 {
    if report.pass {
        0
    } else {
        1
    }
}

fn thermal_verdicts(report: &mut Report, audit: &ThermalAuditReport, tol: f64) {
    report.verdict(Verdict::at_most("comm_jd_jc", audit.comm_jd_jc, audit.threshold));
    report.verdict(Verdict::at_most("comm_jv_jd", audit.comm_jv_jd, audit.threshold));
    report.verdict(Verdict::at_most("comm_jv_jc", audit.comm_jv_jc, audit.threshold));
    report.verdict(Verdict::at_most("lyapunov", audit.lyapunov_residual, audit.threshold));
    if let Some(r) = audit.closed_form_residual {
        let scale = (audit.threshold / tol).sqrt();
        report.verdict(Verdict::at_most("closed_form", r, tol * scale));
    }
    report.notes.extend(audit.notes.iter().cloned());
}

fn noise_scale(noise: &NoiseMatrices) -> f64 {
    max_abs(&noise.d).max(max_abs(&noise.c)).max(1.0)
}

/// Congruence, eigenoperator and stationarity checks of a model against its Gibbs state.
fn model_verdicts(report: &mut Report, model: &Model, noise: &NoiseMatrices, tol: f64, eigen_required: bool) -> Result<(), CliError> {
    let profile = model.qdbc.profile()?;
    let scale = noise_scale(noise);
    let times = default_congruence_times(&profile);
    let cong = verify_congruence(noise, &model.qdbc.thermal, &times)?;
    report.verdict(Verdict::at_most("congruence_d", cong.d_defect, tol * scale));
    report.verdict(Verdict::at_most("congruence_c", cong.c_defect, tol * scale));
    report.verdict(Verdict::at_most("congruence_gamma", cong.gamma_defect, tol * scale));

    let vectors = model.lindblad_vectors()?;
    if vectors.len() == 2 * model.modes() {
        let eig = verify_eigenoperators(&vectors, &model.qdbc.thermal)?;
        let w_max = profile.frequencies.iter().cloned().fold(1.0, f64::max);
        let res = Verdict::at_most("eigenoperator_residual", eig.max_residual(), tol * w_max);
        let ratio = Verdict::at_most("eigenoperator_ratio", eig.max_ratio_defect(), tol);
        if eigen_required {
            report.verdict(res);
            report.verdict(ratio);
        } else {
            report.residual(&res.name, res.residual);
            report.residual(&ratio.name, ratio.residual);
        }
    }

    let a = crate::gds::drift_matrix(&model.b_prime, &noise.c)?;
    let hurwitz = is_hurwitz(&a, DEFAULT_HURWITZ_TOL);
    report.residual("spectral_abscissa", hurwitz.abscissa);
    if hurwitz.hurwitz {
        let v = lyapunov_solve(&a, &(&noise.d / noise.hbar))?;
        let dv = max_abs(&(&v - &profile.v_th));
        report.verdict(Verdict::at_most("stationary_vs_gibbs", dv, tol * max_abs(&profile.v_th).max(1.0)));
        report.insert("V_stationary", &rows_from_matrix(&v));
    } else {
        report.pass = false;
        report.notes.push(format!(
            "no stationary state: spectral abscissa {:e} is not negative",
            hurwitz.abscissa
        ));
    }
    report.insert("V_th", &rows_from_matrix(&profile.v_th));
    Ok(())
}

fn build(path: &Path, out: Option<&Path>, cli: &Cli, echo: Vec<String>) -> Result<u8, CliError> {
    let tol = base_tolerance()?;
    let model = load_model(path)?;
    let mut report = Report::new(echo, cli.seed);
    report.tolerance("relative", tol);
    let profile = model.qdbc.profile()?;
    let noise = build_noise(&model.qdbc)?;
    let set = build_lindblad_vectors(&model.qdbc)?;
    let audit = thermal_audit(&noise, &profile.v_th, tol)?;
    thermal_verdicts(&mut report, &audit, tol);
    let built = Model {
        explicit_vectors: None,
        b_prime: model.qdbc.thermal.b.clone(),
        ..model.clone()
    };
    model_verdicts(&mut report, &built, &noise, tol, true)?;
    report.modes = qome_coefficients(&model.qdbc)?
        .into_iter()
        .map(|m| ModeRow {
            omega: m.omega,
            occupation: m.occupation,
            coupling: m.coupling,
            loss_rate: m.loss_rate,
            gain_rate: m.gain_rate,
        })
        .collect();
    report.insert("D", &rows_from_matrix(&noise.d));
    report.insert("C", &rows_from_matrix(&noise.c));
    let vectors: Vec<_> = set.vectors.iter().map(complex_pairs).collect();
    report.insert("lindblad_vectors", &vectors);
    report.insert("frequencies", &profile.frequencies);
    report.insert("kappa", &profile.kappa);
    report.write(out)?;
    Ok(exit_code(&report))
}

struct EvolveOptions<'a> {
    v0: &'a str,
    mean0: Option<&'a str>,
    tmax: f64,
    dt: f64,
    every: usize,
    allow_nonstationary: bool,
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::input(format!("{what}: cannot parse `{t}`")))
        })
        .collect()
}

fn min_symplectic_eigenvalue(v: &RealMatrix) -> f64 {
    williamson(v, POSITIVE_DEFINITE_TOL)
        .map(|w| w.spectrum.iter().cloned().fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::NAN)
}

fn evolve(path: &Path, opts: &EvolveOptions, out: Option<&Path>) -> Result<u8, CliError> {
    if !(opts.dt > 0.0) || !opts.dt.is_finite() {
        return Err(CliError::input(format!("--dt must be positive, got {}", opts.dt)));
    }
    if !(opts.tmax > 0.0) || !opts.tmax.is_finite() {
        return Err(CliError::input(format!("--tmax must be positive, got {}", opts.tmax)));
    }
    if opts.every == 0 {
        return Err(CliError::input("--every must be at least 1"));
    }
    let model = load_model(path)?;
    let n = model.modes();
    let dim = 2 * n;
    let noise = model.noise()?;
    let a = model.drift()?;
    let hurwitz = is_hurwitz(&a, DEFAULT_HURWITZ_TOL);
    if !hurwitz.hurwitz && !opts.allow_nonstationary {
        return Err(CliError::semantic(format!(
            "no stationary state: spectral abscissa {:e} (pass --allow-nonstationary to integrate anyway)",
            hurwitz.abscissa
        )));
    }
    let v0 = match opts.v0 {
        "vacuum" => RealMatrix::identity(dim, dim) * 0.5,
        "thermal" => model.qdbc.profile()?.v_th,
        file => load_matrix(Path::new(file), dim, "v0")?,
    };
    let mean0 = match opts.mean0 {
        Some(s) => {
            let m = parse_list(s, "--mean0")?;
            if m.len() != dim {
                return Err(CliError::input(format!("--mean0: expected {dim} values")));
            }
            RealVector::from_vec(m)
        }
        None => RealVector::zeros(dim),
    };
    let initial = GaussianState::new(mean0, v0, model.hbar()).map_err(|e| CliError::input(format!("initial state: {e}")))?;
    let config = MomentConfig {
        dt: opts.dt,
        ..MomentConfig::default()
    };
    let traj = integrate_moments(&a, &model.xi_prime, &noise.d, model.hbar(), &initial, opts.tmax, opts.every, &config)?;

    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|j| format!("mean_q{j}")));
    header.extend((1..=n).map(|j| format!("mean_p{j}")));
    for i in 0..dim {
        for j in i..dim {
            header.push(format!("V_{}_{}", i + 1, j + 1));
        }
    }
    header.push("min_symplectic_eigenvalue".into());
    let rows: Vec<Vec<f64>> = traj
        .times
        .iter()
        .zip(&traj.means)
        .zip(&traj.covariances)
        .map(|((t, m), v)| {
            let mut row = vec![*t];
            row.extend(m.iter());
            for i in 0..dim {
                for j in i..dim {
                    row.push(v[(i, j)]);
                }
            }
            row.push(min_symplectic_eigenvalue(v));
            row
        })
        .collect();
    write_csv(out, "evolve", &header, &rows)?;
    Ok(0)
}

fn audit(path: &Path, out: Option<&Path>, cli: &Cli, echo: Vec<String>) -> Result<u8, CliError> {
    let tol = base_tolerance()?;
    let mut report = Report::new(echo, cli.seed);
    report.tolerance("relative", tol);
    match load_audit_input(path)? {
        AuditInput::Model(model) => {
            let noise = model.noise()?;
            let profile = model.qdbc.profile()?;
            let audit = thermal_audit(&noise, &profile.v_th, tol)?;
            thermal_verdicts(&mut report, &audit, tol);
            model_verdicts(&mut report, &model, &noise, tol, model.explicit_vectors.is_none())?;
            report.insert("D", &rows_from_matrix(&noise.d));
            report.insert("C", &rows_from_matrix(&noise.c));
        }
        AuditInput::Explicit { noise, v } => {
            let v = match v {
                Some(v) => v,
                None => match closed_form_covariance(&noise) {
                    Ok(v) => {
                        report.notes.push("V taken from the closed form".into());
                        v
                    }
                    Err(_) => {
                        return Err(CliError::input(
                            "V is required when JC is singular (closed form inapplicable)",
                        ))
                    }
                },
            };
            let audit = thermal_audit(&noise, &v, tol)?;
            thermal_verdicts(&mut report, &audit, tol);
        }
    }
    report.write(out)?;
    Ok(exit_code(&report))
}

fn parse_range(s: &str) -> Result<(f64, f64), CliError> {
    let v = parse_list(s, "--beta-range")?;
    match v.as_slice() {
        [lo, hi] if *lo > 0.0 && hi > lo => Ok((*lo, *hi)),
        _ => Err(CliError::input(format!("--beta-range: expected `lo,hi` with 0 < lo < hi, got `{s}`"))),
    }
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::input("--jobs must be at least 1"));
        }
        builder = builder.num_threads(j);
    }
    builder.build().map_err(|e| CliError::semantic(format!("thread pool: {e}")))
}

fn sweep(path: &Path, range: &str, points: usize, linear: bool, out: Option<&Path>, jobs: Option<usize>) -> Result<u8, CliError> {
    let (lo, hi) = parse_range(range)?;
    if points < 2 {
        return Err(CliError::input("--points must be at least 2"));
    }
    let model = load_model(path)?;
    let n = model.modes();
    let hbar = model.hbar();
    let betas: Vec<f64> = (0..points)
        .map(|k| {
            let s = k as f64 / (points - 1) as f64;
            if k == 0 {
                lo
            } else if k == points - 1 {
                hi
            } else if linear {
                lo + s * (hi - lo)
            } else {
                (lo.ln() + s * (hi.ln() - lo.ln())).exp()
            }
        })
        .collect();
    let pool = thread_pool(jobs)?;
    let rows: Result<Vec<Vec<f64>>, CliError> = pool.install(|| {
        betas
            .par_iter()
            .map(|&beta| {
                let spec = model.qdbc.with_beta(beta)?;
                let profile = spec.profile()?;
                let noise = build_noise(&spec)?;
                let mut row = vec![beta];
                row.extend(&profile.kappa);
                row.push(max_abs(&noise.d));
                row.push(max_abs(&noise.c));
                let mut high: f64 = 0.0;
                let mut low: f64 = 0.0;
                for j in 0..n {
                    let x = hbar * beta * profile.frequencies[j];
                    high = high.max((x * profile.kappa[j] - 1.0).abs());
                    // (k − ½) e^{x} → 1; past x ≈ 700 both factors leave f64 range.
                    let ratio = if x < 700.0 { profile.occupations[j] * x.exp() } else { 1.0 };
                    low = low.max((ratio - 1.0).abs());
                }
                row.push(high);
                row.push(low);
                Ok(row)
            })
            .collect()
    });
    let rows = rows?;
    let mut header = vec!["beta".to_string()];
    header.extend((1..=n).map(|j| format!("k_th_{j}")));
    header.extend(
        ["d_max_abs", "c_max_abs", "high_limit_residual", "low_limit_residual"]
            .iter()
            .map(|s| s.to_string()),
    );
    write_csv(out, "sweep", &header, &rows)?;
    Ok(0)
}

fn parse_alphas(s: Option<&str>, n: usize) -> Result<Vec<Complex64>, CliError> {
    match s {
        None => Ok(vec![Complex64::from(std::f64::consts::FRAC_1_SQRT_2); n]),
        Some(s) => {
            let out: Vec<Complex64> = s
                .split(';')
                .map(|p| {
                    let v = parse_list(p, "--alpha")?;
                    match v.as_slice() {
                        [re] => Ok(Complex64::new(*re, 0.0)),
                        [re, im] => Ok(Complex64::new(*re, *im)),
                        _ => Err(CliError::input(format!("--alpha: expected `re,im`, got `{p}`"))),
                    }
                })
                .collect::<Result<_, _>>()?;
            if out.len() != n {
                return Err(CliError::input(format!("--alpha: expected {n} amplitudes")));
            }
            Ok(out)
        }
    }
}

fn oracle(
    path: &Path,
    config: OracleConfig,
    alpha: Option<&str>,
    experimental: bool,
    out: Option<&Path>,
    cli: &Cli,
    echo: Vec<String>,
) -> Result<u8, CliError> {
    config.validate().map_err(|e| CliError::input(e.to_string()))?;
    let model = load_model(path)?;
    let n = model.modes();
    match n {
        1 => {}
        2 if experimental => {}
        2 => return Err(CliError::input("two-mode oracle runs require --experimental")),
        _ => return Err(CliError::input(format!("oracle supports at most two modes, got {n}"))),
    }
    let alphas = parse_alphas(alpha, n)?;
    let mut report = Report::new(echo, cli.seed);
    report.tolerance("moment_deviation", ORACLE_MOMENT_TOL);
    report.tolerance("gibbs_residual", ORACLE_GIBBS_TOL);
    report.tolerance("gns_defect", ORACLE_GNS_TOL);
    report.tolerance("trace_drift", config.trace_tol);

    let profile = model.qdbc.profile()?;
    let nbar = profile.occupations.iter().cloned().fold(0.0, f64::max);
    let recommended = OracleConfig::recommended_cutoff(nbar);
    if config.cutoff < recommended {
        let msg = format!(
            "cutoff below rule of thumb: N = {} < 20 (n̄ + 1) = {recommended}",
            config.cutoff
        );
        eprintln!("warning: {msg}");
        report.warnings.push(msg);
    }

    let spec = model.gds_spec()?;
    let sample_every = ((0.1 / config.dt).round() as usize).max(1);
    let cmp = compare_with_gaussian(&spec, &alphas, &config, sample_every)?;
    let check = gibbs_check(&spec, &model.qdbc.thermal, config.cutoff)?;
    let dev = cmp.max_mean_deviation.max(cmp.max_cov_deviation);
    report.verdict(Verdict::at_most("moment_deviation", dev, ORACLE_MOMENT_TOL));
    report.verdict(Verdict::at_most("gibbs_residual", check.stationarity_residual, ORACLE_GIBBS_TOL));
    report.verdict(Verdict::at_most("gns_defect", check.detailed_balance.defect(), ORACLE_GNS_TOL));
    report.residual("mean_deviation", cmp.max_mean_deviation);
    report.residual("covariance_deviation", cmp.max_cov_deviation);
    report.residual("trace_drift", cmp.fock.max_trace_drift);
    report.residual("min_density_eigenvalue", cmp.fock.min_eigenvalue);
    report.residual("edge_population", cmp.fock.edge_population);
    report.residual("gns_dissipative_defect", check.detailed_balance.dissipative_defect);
    report.residual("gns_hamiltonian_defect", check.detailed_balance.hamiltonian_defect);
    if let Some(p) = check.planck_defect {
        report.residual("planck_defect", p);
    }
    report.insert("cutoff", &config.cutoff);
    report.insert("t_max", &config.t_max);
    report.insert("dt", &config.dt);
    report.write(out)?;
    Ok(exit_code(&report))
}

fn sample(modes: Option<usize>, out: Option<&Path>, seed: Option<u64>) -> Result<u8, CliError> {
    let seed = seed.ok_or_else(|| CliError::input("sample requires --seed"))?;
    let mut rng = seeded(seed);
    let spec = match modes {
        Some(n) if (1..=3).contains(&n) => random_qdbc_spec_with_modes(n, &mut rng)?,
        Some(n) => return Err(CliError::input(format!("--modes must be 1, 2 or 3, got {n}"))),
        None => random_qdbc_spec(&mut rng)?,
    };
    let file = ModelFile {
        n: spec.modes(),
        hbar: spec.hbar(),
        b: rows_from_matrix(&spec.thermal.b),
        beta: spec.beta(),
        gamma: spec.gamma(),
        b_prime: None,
        xi_prime: None,
        lindblad_vectors: None,
        regime: None,
    };
    let text = serde_json::to_string_pretty(&file).expect("model serializes");
    match out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| CliError::io(p, e))?,
        None => super::report::print_stdout(&text)?,
    }
    Ok(0)
}
