use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sparselogit::analysis::{
    evaluate, log_w_grid, loocv, save_path_csv, select_features, solution_path, summarize_with,
    CvReport, Metrics, PredictionReport,
};
use sparselogit::data::{
    apply_standardization, load_csv, simulate_binary_p200, simulate_multiclass_p2000, standardize,
    write_csv, SyntheticSpecA, SyntheticSpecB,
};
use sparselogit::engine::{initialize_chain, run_chain_from, Phase, Progress};
use sparselogit::model::{
    log_prior_delta_row, log_sigma_sq_prior, sample_prior_beta, ScaleMixture,
};
use sparselogit::{Dataset, McmcSettings, PriorSpec, SampleStore, WMode};

use crate::args::{
    CvArgs, Design, FitArgs, PathArgs, PredictArgs, PriorArgs, PriorSampleArgs, RankArgs,
    SimulateArgs,
};

/// Invalid configuration detected before any work starts; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Writes one whole line to standard error under the lock so concurrent lines never
/// interleave.
pub fn log_line(line: &str) {
    let mut err = std::io::stderr().lock();
    let _ = err.write_all(format!("{line}\n").as_bytes());
}

fn require_input(path: &Path, flag: &str) -> Result<()> {
    if !path.is_file() {
        return Err(UsageError(format!("--{flag} {}: no such file", path.display())).into());
    }
    Ok(())
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("output: cannot create directory {}", dir.display()))
}

fn load(path: &Path, no_header: bool, stage: &str) -> Result<Dataset> {
    load_csv(path, !no_header).with_context(|| format!("{stage}: reading {}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("output: writing {}", path.display()))
}

/// Key/value record of everything needed to repeat a run.
struct Manifest(Metrics);

impl Manifest {
    fn new(command: &str) -> Self {
        let mut m = Metrics::new();
        m.insert("tool", concat!("sparselogit ", env!("CARGO_PKG_VERSION")))
            .insert("command", command)
            .insert("argv", std::env::args().collect::<Vec<_>>().join(" "));
        Manifest(m)
    }

    fn entry(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.0.insert(key, value);
        self
    }

    fn prior(&mut self, spec: &PriorSpec) -> &mut Self {
        self.entry("prior", spec.family)
            .entry("alpha", spec.alpha)
            .entry("sigma0_sq", spec.sigma0_sq);
        match spec.w_mode {
            WMode::Fixed => self.entry("log_w", spec.log_w).entry("w_mode", "fixed"),
            WMode::Hyper { prior_variance } => self
                .entry("log_w_start", spec.log_w)
                .entry("w_mode", "hyper")
                .entry("hyper_w_var", prior_variance),
        }
    }

    fn settings(&mut self, s: &McmcSettings) -> &mut Self {
        self.entry("n1", s.n1)
            .entry("l1", s.l1)
            .entry("n2", s.n2)
            .entry("l2", s.l2)
            .entry("eps", s.eps)
            .entry("zeta", s.zeta)
            .entry("thin", s.thin)
            .entry("seed", s.seed)
    }

    fn input(&mut self, key: &str, path: &Path, ds: &Dataset) -> &mut Self {
        self.entry(key, path.display())
            .entry(&format!("{key}_fingerprint"), ds.fingerprint())
    }

    fn save(&self, dir: &Path) -> Result<()> {
        self.0
            .save(dir.join("manifest.txt"))
            .context("output: writing manifest")
    }
}

fn check_prior(prior: &PriorArgs) -> Result<PriorSpec> {
    let spec = prior.spec();
    spec.validate()
        .map_err(|e| UsageError(format!("prior: {e}")))?;
    Ok(spec)
}

fn check_settings(settings: McmcSettings) -> Result<McmcSettings> {
    settings
        .validate()
        .map_err(|e| UsageError(format!("settings: {e}")))?;
    Ok(settings)
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    prepare_out(&args.out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut manifest = Manifest::new("simulate");
    let (train, test) = match args.design {
        Design::A => {
            let spec = SyntheticSpecA {
                n_train: args.n_train,
                n_test: args.n_test.unwrap_or(1000),
                n_features: args.features,
            };
            manifest
                .entry("design", "a")
                .entry("n_test", spec.n_test)
                .entry("features", spec.n_features);
            let (train, test, _) = simulate_binary_p200(&spec, &mut rng).context("simulate")?;
            (train, test)
        }
        Design::B => {
            let spec = SyntheticSpecB {
                n_train: args.n_train,
                n_test: args.n_test.unwrap_or(2000),
                noise_features: args.noise_features,
            };
            manifest
                .entry("design", "b")
                .entry("n_test", spec.n_test)
                .entry("noise_features", spec.noise_features);
            simulate_multiclass_p2000(&spec, &mut rng).context("simulate")?
        }
    };
    manifest
        .entry("n_train", args.n_train)
        .entry("seed", args.seed);
    let train_path = args.out.join("train.csv");
    write_csv(&train, &train_path).context("output: writing train.csv")?;
    manifest.input("train", &train_path, &train);
    if test.n_cases() > 0 {
        let test_path = args.out.join("test.csv");
        write_csv(&test, &test_path).context("output: writing test.csv")?;
        manifest.input("test", &test_path, &test);
    }
    manifest.save(&args.out)
}

/// Log joint density of the current state: likelihood, contrast rows and variances.
fn log_posterior(progress: &Progress<'_>, prior: &PriorSpec) -> f64 {
    let state = progress.state;
    let spec = match state.log_w() {
        Some(lw) => prior.with_log_w(lw),
        None => *prior,
    };
    let delta = state.delta();
    let c = delta.n_contrasts() + 1;
    let mut total = progress.log_likelihood;
    let row = |j: usize| delta.row(j).to_vec();
    total += log_prior_delta_row(&row(0), prior.sigma0_sq, c).unwrap_or(f64::NAN);
    for (j, &s) in state.sigma_sq().as_slice().iter().enumerate() {
        total += log_prior_delta_row(&row(j + 1), s, c).unwrap_or(f64::NAN);
        total += log_sigma_sq_prior(s, &spec).unwrap_or(f64::NAN);
    }
    total
}

fn progress_line(tag: &str, p: &Progress<'_>, prior: &PriorSpec) -> String {
    let phase = match p.phase {
        Phase::Initial => "initial",
        Phase::Sampling => "sampling",
    };
    format!(
        "[{tag}] {phase} {}/{} log-posterior {:.4} acceptance {:.3} active {}",
        p.done,
        p.total,
        log_posterior(p, prior),
        1.0 - p.stats.rejection_rate(),
        p.active_features
    )
}

fn prediction_csv(report: &PredictionReport, labels: &[usize]) -> String {
    let c = report.probs.ncols();
    let mut out = String::from("case,label,predicted");
    for k in 1..=c {
        let _ = write!(out, ",p_{k}");
    }
    out.push('\n');
    for (i, row) in report.probs.rows().into_iter().enumerate() {
        let probs = row.to_vec();
        let _ = write!(
            out,
            "{},{},{}",
            i + 1,
            labels[i],
            sparselogit::analysis::predicted_class(&probs)
        );
        for v in probs {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn fit(args: &FitArgs, quiet: bool) -> Result<()> {
    require_input(&args.train, "train")?;
    if let Some(t) = &args.test {
        require_input(t, "test")?;
    }
    let prior = check_prior(&args.prior)?;
    let settings = check_settings(args.chain.settings())?;
    prepare_out(&args.out)?;

    let raw_train = load(&args.train, args.no_header, "train")?;
    let raw_test = args
        .test
        .as_ref()
        .map(|p| load(p, args.no_header, "test"))
        .transpose()?;
    let others: Vec<&Dataset> = raw_test.iter().collect();
    let (train, rest) = standardize(&raw_train, &others).context("standardize")?;
    let test = rest.into_iter().next();

    let mut manifest = Manifest::new("fit");
    manifest
        .prior(&prior)
        .settings(&settings)
        .input("train", &args.train, &raw_train)
        .entry("summary", format!("{:?}", args.summary).to_lowercase());
    if let (Some(p), Some(t)) = (&args.test, &raw_test) {
        manifest.input("test", p, t);
    }
    manifest.save(&args.out)?;

    let state = initialize_chain(&train, &prior).context("initialize")?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut observer = |p: &Progress<'_>| {
        if !quiet {
            log_line(&progress_line("fit", p, &prior));
        }
    };
    let store = match run_chain_from(state, &train, &prior, &settings, &mut rng, &mut observer) {
        Ok(store) => store,
        Err(failure) => {
            let partial = args.out.join("store.partial.txt");
            let saved = failure.partial.save(&partial).is_ok();
            let note = if saved {
                format!(
                    "; {} stored draws kept in {}",
                    failure.partial.len(),
                    partial.display()
                )
            } else {
                String::new()
            };
            bail!("chain: {}{note}", failure.error);
        }
    };
    store
        .save(args.out.join("store.txt"))
        .context("output: writing store")?;

    let summary = summarize_with(&store, args.summary.into()).context("summarize")?;
    summary
        .save_csv(args.out.join("summary.csv"))
        .context("output: writing summary")?;

    let meta = store.metadata();
    let mut metrics = Metrics::new();
    metrics
        .insert("stored_draws", store.len())
        .insert("rejection_rate_initial", meta.initial.rejection_rate())
        .insert("rejection_rate_sampling", meta.sampling.rejection_rate())
        .insert("divergent_sampling", meta.sampling.divergent)
        .insert("mean_active_sampling", meta.sampling.mean_active())
        .insert("top_feature", summary.order.first().copied().unwrap_or(0));
    if let Some(test) = &test {
        let report = evaluate(&store, test).context("predict")?;
        metrics
            .insert("test_amlp", report.amlp)
            .insert("test_error_rate", report.error_rate);
        write_file(
            &args.out.join("predictions.csv"),
            &prediction_csv(&report, test.labels()),
        )?;
    }
    metrics
        .save(args.out.join("metrics.txt"))
        .context("output: writing metrics")?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn load_store(path: &Path) -> Result<SampleStore> {
    require_input(path, "store")?;
    SampleStore::load(path).with_context(|| format!("store: reading {}", path.display()))
}

pub fn rank(args: &RankArgs) -> Result<()> {
    let store = load_store(&args.store)?;
    if !(args.threshold >= 0.0 && args.threshold <= 1.0) {
        return Err(UsageError(format!("--threshold {} is outside [0, 1]", args.threshold)).into());
    }
    prepare_out(&args.out)?;
    let summary = summarize_with(&store, args.summary.into()).context("summarize")?;
    summary
        .save_csv(args.out.join("summary.csv"))
        .context("output: writing summary")?;
    let selected = select_features(&summary, args.threshold).context("select")?;
    let text: String = selected.iter().map(|j| format!("{j}\n")).collect();
    write_file(&args.out.join("selected.txt"), &text)?;
    let mut manifest = Manifest::new("rank");
    manifest
        .entry("store", args.store.display())
        .entry("store_fingerprint", &store.metadata().fingerprint)
        .entry("threshold", args.threshold)
        .entry("summary", format!("{:?}", args.summary).to_lowercase())
        .entry("selected", selected.len());
    manifest.save(&args.out)?;
    println!(
        "selected {} of {} features",
        selected.len(),
        summary.n_features()
    );
    Ok(())
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let store = load_store(&args.store)?;
    require_input(&args.test, "test")?;
    prepare_out(&args.out)?;
    let raw = load(&args.test, args.no_header, "test")?;
    let test = match &store.metadata().standardization {
        Some(map) => apply_standardization(&raw, map).context("standardize")?,
        None => raw.clone(),
    };
    let report = evaluate(&store, &test).context("predict")?;
    write_file(
        &args.out.join("predictions.csv"),
        &prediction_csv(&report, test.labels()),
    )?;
    let mut metrics = Metrics::new();
    metrics
        .insert("amlp", report.amlp)
        .insert("error_rate", report.error_rate)
        .insert("n_cases", test.n_cases());
    metrics
        .save(args.out.join("metrics.txt"))
        .context("output: writing metrics")?;
    let mut manifest = Manifest::new("predict");
    manifest
        .entry("store", args.store.display())
        .input("test", &args.test, &raw);
    manifest.save(&args.out)?;
    println!(
        "amlp {:.6} error rate {:.4}",
        report.amlp, report.error_rate
    );
    Ok(())
}

fn cv_csv(report: &CvReport, class_count: usize) -> String {
    let mut out = String::from("case,seed,status,label,log_prob,correct,rejection_rate");
    for k in 1..=class_count {
        let _ = write!(out, ",p_{k}");
    }
    out.push('\n');
    for f in &report.folds {
        match &f.outcome {
            Ok(o) => {
                let _ = write!(
                    out,
                    "{},{},ok,{},{:.16e},{},{:.16e}",
                    f.fold + 1,
                    f.seed,
                    o.label,
                    o.log_prob,
                    o.correct,
                    o.rejection_rate
                );
                for v in &o.probs {
                    let _ = write!(out, ",{v:.16e}");
                }
            }
            Err(msg) => {
                let _ = write!(
                    out,
                    "{},{},\"error: {}\",,,,",
                    f.fold + 1,
                    f.seed,
                    msg.replace('"', "'")
                );
                out.push_str(&",".repeat(class_count));
            }
        }
        out.push('\n');
    }
    out
}

pub fn cv(args: &CvArgs, quiet: bool) -> Result<()> {
    require_input(&args.train, "train")?;
    let prior = check_prior(&args.prior)?;
    let settings = check_settings(args.chain.settings())?;
    prepare_out(&args.out)?;
    let raw = load(&args.train, args.no_header, "train")?;
    let mut manifest = Manifest::new("cv");
    manifest
        .prior(&prior)
        .settings(&settings)
        .input("train", &args.train, &raw);
    manifest.save(&args.out)?;
    if !quiet {
        log_line(&format!(
            "[cv] {} folds on {} threads",
            raw.n_cases(),
            rayon::current_num_threads()
        ));
    }
    let report = loocv(&raw, &prior, &settings).context("cv")?;
    write_file(
        &args.out.join("cv.csv"),
        &cv_csv(&report, raw.class_count()),
    )?;
    let mut metrics = Metrics::new();
    metrics
        .insert("amlp", report.amlp)
        .insert("error_rate", report.error_rate)
        .insert("folds_succeeded", report.n_succeeded)
        .insert("folds_failed", report.n_failed)
        .insert("mean_rejection_rate", report.rejection_rate);
    metrics
        .save(args.out.join("metrics.txt"))
        .context("output: writing metrics")?;
    if report.n_succeeded == 0 {
        bail!("cv: every fold failed; see cv.csv");
    }
    println!(
        "amlp {:.6} error rate {:.4} ({} of {} folds)",
        report.amlp,
        report.error_rate,
        report.n_succeeded,
        report.folds.len()
    );
    Ok(())
}

pub fn path(args: &PathArgs, quiet: bool) -> Result<()> {
    require_input(&args.train, "train")?;
    if let Some(t) = &args.test {
        require_input(t, "test")?;
    }
    if args.grid_n == 0 || !(args.grid_lo <= args.grid_hi) {
        return Err(UsageError(format!(
            "grid needs --grid-n >= 1 and --grid-lo <= --grid-hi (got {}, {}, {})",
            args.grid_n, args.grid_lo, args.grid_hi
        ))
        .into());
    }
    if args.prior.hyper_w_var.is_some() {
        return Err(
            UsageError("path fixes log(w) at each grid point; drop --hyper-w-var".into()).into(),
        );
    }
    let prior = check_prior(&args.prior)?;
    let settings = check_settings(args.chain.settings())?;
    prepare_out(&args.out)?;
    let raw_train = load(&args.train, args.no_header, "train")?;
    let raw_test = args
        .test
        .as_ref()
        .map(|p| load(p, args.no_header, "test"))
        .transpose()?;
    let others: Vec<&Dataset> = raw_test.iter().collect();
    let (train, rest) = standardize(&raw_train, &others).context("standardize")?;
    let grid = log_w_grid(args.grid_lo, args.grid_hi, args.grid_n);

    let mut manifest = Manifest::new("path");
    manifest
        .prior(&prior)
        .settings(&settings)
        .input("train", &args.train, &raw_train)
        .entry("grid_lo", args.grid_lo)
        .entry("grid_hi", args.grid_hi)
        .entry("grid_n", args.grid_n);
    if let (Some(p), Some(t)) = (&args.test, &raw_test) {
        manifest.input("test", p, t);
    }
    manifest.save(&args.out)?;
    if !quiet {
        log_line(&format!(
            "[path] {} grid points on {} threads",
            grid.len(),
            rayon::current_num_threads()
        ));
    }
    let points = solution_path(&train, rest.first(), &prior, &settings, &grid).context("path")?;
    save_path_csv(&points, args.out.join("path.csv")).context("output: writing path")?;
    let failed = points.iter().filter(|p| p.outcome.is_err()).count();
    if failed == points.len() {
        bail!("path: every grid point failed; see path.csv");
    }
    println!("{} grid points, {} failed", points.len(), failed);
    Ok(())
}

pub fn prior_sample(args: &PriorSampleArgs) -> Result<()> {
    if args.count == 0 {
        return Err(UsageError("--count must be at least 1".into()).into());
    }
    prepare_out(&args.out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let family: ScaleMixture = args.prior.into();
    let draws = sample_prior_beta(family, args.alpha, args.log_w / 2.0, args.count, &mut rng)
        .map_err(|e| UsageError(format!("prior: {e}")))?;
    let mut text = String::from("beta\n");
    for d in &draws {
        let _ = writeln!(text, "{d:.16e}");
    }
    write_file(&args.out.join("prior_draws.csv"), &text)?;
    let mut logs: Vec<f64> = draws.iter().map(|d| d.abs().log10()).collect();
    logs.sort_by(f64::total_cmp);
    let median = logs[logs.len() / 2];
    let mut manifest = Manifest::new("prior-sample");
    manifest
        .entry("prior", family)
        .entry("alpha", args.alpha)
        .entry("log_w", args.log_w)
        .entry("count", args.count)
        .entry("seed", args.seed)
        .entry("median_log10_abs", median);
    manifest.save(&args.out)?;
    println!("median log10|beta| {median:.4}");
    Ok(())
}
