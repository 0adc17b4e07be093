use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use htldp::experiments::{
    planted_spike_run, rate_slope_summary, trial_stream, ExperimentRecord, TailRunConfig,
};
use htldp::heavy_tail::{sample_wigner, EntrySampler};
use htldp::semicircle::{rate_j, RateFunctionParams};
use htldp::spike::{bbp_outlier, isotropy_gap};
use htldp::variational::{brute_force_c, closed_form_c, BruteForceBudget, WitnessExport};

use crate::config::{BbpConfig, IsotropyConfig, RateConfig, SolveConfig, TailConfig};
use crate::output::{svg_plot, write_file, Series, Table};
use crate::CliError;

/// Relative gap above which closed form and oracle are reported as disagreeing.
pub const ORACLE_REL_TOL: f64 = 1e-3;

pub fn rate(cfg: RateConfig) -> Result<(), CliError> {
    let params = cfg.model.params()?;
    let c = match cfg.c {
        Some(c) => c,
        None => closed_form_c(&params)
            .map_err(|e| CliError::Validation(format!("{e}; pass --c to supply the constant")))?
            .c,
    };
    let rp = RateFunctionParams::new(params.alpha, c)?;
    let mut table = Table::new(&["x", "J"]);
    for &x in &cfg.x {
        table.push(vec![x, rate_j(x, &rp)]);
    }
    println!("# alpha = {}, c = {c}", params.alpha);
    table.print();
    write_file(&cfg.out.join("rate.csv"), &table.to_csv())?;
    let points = table.rows.iter().map(|r| (r[0], r[1])).collect();
    let svg = svg_plot(
        &format!("Rate function J (alpha = {}, c = {:.4})", params.alpha, c),
        "x",
        "J(x)",
        &[Series { label: "J", points, scatter: false }],
    );
    write_file(&cfg.out.join("rate.svg"), &svg)?;
    Ok(())
}

#[derive(Serialize)]
struct SolveReport {
    closed_form: Option<ClosedReport>,
    oracle: Option<OracleReport>,
    relative_gap: Option<f64>,
}

#[derive(Serialize)]
struct ClosedReport {
    c: f64,
    witness: WitnessExport,
}

#[derive(Serialize)]
struct OracleReport {
    c_est: f64,
    max_n: usize,
    patterns: usize,
    argmin: WitnessExport,
}

pub fn solve_c(cfg: SolveConfig) -> Result<(), CliError> {
    let params = cfg.model.params()?;
    let closed = closed_form_c(&params);
    if let (Err(e), None) = (&closed, cfg.oracle) {
        return Err(e.clone().into());
    }
    let mut report = SolveReport { closed_form: None, oracle: None, relative_gap: None };
    match &closed {
        Ok(cf) => {
            println!("closed form: c = {}  case {}", cf.c, cf.case);
            println!("witness ({0}x{0}):\n{1}", cf.witness.n(), cf.witness);
            report.closed_form =
                Some(ClosedReport { c: cf.c, witness: WitnessExport::new(&cf.witness, &params, Some(cf.case)) });
        }
        Err(e) => println!("closed form: unavailable ({e})"),
    }
    if let Some(max_n) = cfg.oracle {
        let budget = BruteForceBudget { restarts: cfg.restarts, seed: cfg.seed, ..Default::default() };
        let bf = brute_force_c(&params, max_n, &budget)?;
        println!("oracle (n <= {max_n}, {} patterns): c = {}", bf.patterns_searched, bf.c_est);
        println!("argmin ({0}x{0}):\n{1}", bf.argmin.n(), bf.argmin);
        report.oracle = Some(OracleReport {
            c_est: bf.c_est,
            max_n,
            patterns: bf.patterns_searched,
            argmin: WitnessExport::new(&bf.argmin, &params, None),
        });
        if let Ok(cf) = &closed {
            report.relative_gap = Some((cf.c - bf.c_est).abs() / cf.c);
        }
    }
    if let Some(path) = &cfg.json {
        let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
        write_file(path, &(text + "\n"))?;
    }
    if let Some(gap) = report.relative_gap {
        println!("relative gap: {gap:.3e}");
        if gap > ORACLE_REL_TOL {
            return Err(CliError::Disagreement(format!("relative gap {gap:.3e} exceeds {ORACLE_REL_TOL:e}")));
        }
    }
    Ok(())
}

pub fn bbp(cfg: BbpConfig) -> Result<(), CliError> {
    let params = cfg.model.params()?;
    let sampler = EntrySampler::new(&params, cfg.model.law)?;
    if cfg.trials == 0 || cfg.theta.is_empty() {
        return Err(CliError::Validation("need at least one theta and one trial".into()));
    }
    let mut table = Table::new(&["theta", "mean_lambda", "sd_lambda", "reference", "trials"]);
    for &theta in &cfg.theta {
        let samples = planted_spike_run(cfg.n, theta, cfg.planting, cfg.trials, &sampler, cfg.seed)?;
        let m = htldp::experiments::mean(&samples);
        let var = samples.iter().map(|l| (l - m).powi(2)).sum::<f64>() / (samples.len().max(2) - 1) as f64;
        table.push(vec![theta, m, var.sqrt(), bbp_outlier(theta), cfg.trials as f64]);
    }
    table.print();
    write_file(&cfg.out.join("bbp.csv"), &table.to_csv())?;
    let lo = cfg.theta.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0);
    let hi = cfg.theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let reference = (0..=200).map(|k| lo + (hi - lo) * k as f64 / 200.0).map(|t| (t, bbp_outlier(t))).collect();
    let empirical = table.rows.iter().map(|r| (r[0], r[1])).collect();
    let svg = svg_plot(
        &format!("Planted spike, N = {}", cfg.n),
        "theta",
        "largest eigenvalue",
        &[
            Series { label: "theta + 1/theta", points: reference, scatter: false },
            Series { label: "sample mean", points: empirical, scatter: true },
        ],
    );
    write_file(&cfg.out.join("bbp.svg"), &svg)?;
    Ok(())
}

pub fn tail(cfg: TailConfig, dry_run: bool) -> Result<(), CliError> {
    let params = cfg.model.params()?;
    EntrySampler::new(&params, cfg.model.law)?;
    if cfg.n.is_empty() {
        return Err(CliError::Validation("need at least one N".into()));
    }
    let runs: Vec<TailRunConfig> = cfg
        .n
        .iter()
        .map(|&n| TailRunConfig {
            n,
            x_grid: cfg.x.clone(),
            trials: cfg.trials,
            seed: cfg.seed,
            params: params.clone(),
            law: cfg.model.law,
        })
        .collect();
    for r in &runs {
        r.validate()?;
    }
    if dry_run {
        for r in &runs {
            println!("N = {:>6}  trials = {}  config {}", r.n, r.trials, r.hash());
        }
        println!("configuration valid; nothing written");
        return Ok(());
    }
    let start = Instant::now();
    let mut records = Vec::new();
    for r in &runs {
        let rec = ExperimentRecord::run(r)?;
        rec.save(&cfg.out).map_err(CliError::from)?;
        eprintln!("N = {}: {} trials in {:.1}s", rec.n, rec.trials, rec.wall_time);
        records.push(rec);
    }
    let mut summary = Table::new(&["n", "x", "p_hat", "ci_low", "ci_high"]);
    for rec in &records {
        for e in &rec.tail_estimates {
            summary.push(vec![rec.n as f64, e.x, e.p_hat, e.ci_low, e.ci_high]);
        }
    }
    summary.print();
    write_file(&cfg.out.join("summary.csv"), &summary.to_csv())?;

    let c = closed_form_c(&params).ok().map(|cf| cf.c);
    let mut slopes = Table::new(&["x", "slope", "intercept", "points", "J"]);
    for &x in &cfg.x {
        match rate_slope_summary(&records, x, c) {
            Ok(s) => {
                let j = s.j_reference.unwrap_or(f64::NAN);
                println!("x = {x}: slope {:.4} over {} sizes (J(x) = {j})", s.slope, s.points);
                slopes.push(vec![x, s.slope, s.intercept, s.points as f64, j]);
            }
            Err(e) => println!("x = {x}: {e}"),
        }
    }
    write_file(&cfg.out.join("slopes.csv"), &slopes.to_csv())?;
    let config_json = serde_json::to_string_pretty(&runs).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_file(&cfg.out.join("config.json"), &(config_json + "\n"))?;
    eprintln!("campaign finished in {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

pub fn isotropy(cfg: IsotropyConfig) -> Result<(), CliError> {
    let params = cfg.model.params()?;
    let sampler = EntrySampler::new(&params, cfg.model.law)?;
    let mut table = Table::new(&["n", "median_gap_orthogonal", "median_gap_parallel", "used"]);
    for &n in &cfg.n {
        if n < 2 {
            return Err(CliError::Validation("isotropy needs N >= 2".into()));
        }
        let mut e1 = vec![Complex64::default(); n];
        let mut e2 = e1.clone();
        e1[0] = Complex64::new(1.0, 0.0);
        e2[1] = Complex64::new(1.0, 0.0);
        let mut orth = Vec::new();
        let mut par = Vec::new();
        for t in 0..cfg.trials {
            let h = sample_wigner(n, &sampler, &mut trial_stream(cfg.seed, n, t))?.normalized();
            // samples whose spectrum reaches x carry no resolvent information
            if let (Ok(g1), Ok(g2)) = (isotropy_gap(&h, &e1, &e2, cfg.x), isotropy_gap(&h, &e1, &e1, cfg.x)) {
                orth.push(g1);
                par.push(g2);
            }
        }
        let used = orth.len() as f64;
        table.push(vec![n as f64, median(orth), median(par), used]);
    }
    table.print();
    write_file(&cfg.out.join("isotropy.csv"), &table.to_csv())?;
    Ok(())
}
