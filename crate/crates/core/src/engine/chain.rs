//! HMC-within-Gibbs driver.
//!
//! Each iteration (1) updates the contrast rows of the active features jointly by
//! HMC given the variances, then (2) redraws every variance from its conditional
//! given `V` of its row, and the log square-scale when it is a hyperparameter.

use ndarray::Array2;
use rand::Rng;

use crate::engine::store::{Draw, PhaseStats, SampleStore, StoreMetadata};
use crate::engine::McmcSettings;
use crate::error::{Error, Result};
use crate::model::{
    log_normalizer, v_value, CoefficientMatrix, Dataset, PriorSpec, VarianceVector, WMode,
};
use crate::samplers::{
    hmc_update, improper_at_zero, sample_log_w, sample_sigma_sq, HmcConfig, Potential,
};

/// Iterations between full recomputations of the cached linear predictors.
pub const CACHE_REFRESH_INTERVAL: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Initial,
    Sampling,
}

/// Current values of all unknowns plus the linear predictors they imply.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    delta: CoefficientMatrix,
    sigma_sq: VarianceVector,
    log_w: Option<f64>,
    /// `n x K` matrix of `eta_ik`.
    cache: Array2<f64>,
    iteration: usize,
    phase: Phase,
}

/// `eta_ik = delta_0k + sum_j x_ij delta_jk` for every case.
pub fn compute_linear_predictors(dataset: &Dataset, delta: &CoefficientMatrix) -> Array2<f64> {
    let d = delta.as_array();
    let mut eta = dataset.features().dot(&d.slice(ndarray::s![1.., ..]));
    eta += &d.row(0);
    eta
}

impl ChainState {
    /// Assembles a state from explicit values. `log_w` is tracked only when the
    /// prior samples it, starting from `prior.log_w`.
    pub fn from_parts(
        dataset: &Dataset,
        prior: &PriorSpec,
        delta: CoefficientMatrix,
        sigma_sq: VarianceVector,
    ) -> Result<Self> {
        prior.validate()?;
        delta.check_against(dataset.n_features(), dataset.class_count())?;
        if sigma_sq.len() != dataset.n_features() {
            return Err(Error::dims(
                "variance vector",
                dataset.n_features(),
                sigma_sq.len(),
            ));
        }
        let cache = compute_linear_predictors(dataset, &delta);
        Ok(Self {
            delta,
            sigma_sq,
            log_w: matches!(prior.w_mode, WMode::Hyper { .. }).then_some(prior.log_w),
            cache,
            iteration: 0,
            phase: Phase::Initial,
        })
    }

    pub fn delta(&self) -> &CoefficientMatrix {
        &self.delta
    }

    pub fn sigma_sq(&self) -> &VarianceVector {
        &self.sigma_sq
    }

    /// Sampled log square-scale; `None` when it is fixed by the prior.
    pub fn log_w(&self) -> Option<f64> {
        self.log_w
    }

    pub fn cache(&self) -> &Array2<f64> {
        &self.cache
    }

    /// Completed Gibbs iterations.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    fn effective_log_w(&self, prior: &PriorSpec) -> f64 {
        self.log_w.unwrap_or(prior.log_w)
    }

    /// Maximum absolute difference between the cache and a full recomputation.
    pub fn cache_drift(&self, dataset: &Dataset) -> f64 {
        let fresh = compute_linear_predictors(dataset, &self.delta);
        max_abs_diff(&fresh, &self.cache)
    }

    /// `log L` evaluated from the cached linear predictors.
    pub fn log_likelihood(&self, dataset: &Dataset) -> f64 {
        dataset
            .labels()
            .iter()
            .zip(self.cache.rows())
            .map(|(&y, eta)| {
                let eta = eta.to_vec();
                let own = if y == 1 { 0.0 } else { eta[y - 2] };
                own - log_normalizer(&eta)
            })
            .sum()
    }
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Recomputes the cache in full and returns the drift it removed.
pub fn refresh_cache(state: &mut ChainState, dataset: &Dataset) -> f64 {
    let fresh = compute_linear_predictors(dataset, &state.delta);
    let drift = max_abs_diff(&fresh, &state.cache);
    state.cache = fresh;
    drift
}

/// Starting state from a diagonal-covariance Gaussian discriminant.
///
/// Feature rows are `(mean_{j,k+1} - mean_{j,1}) / s_j^2`, where `s_j^2` averages the
/// pooled within-class variance of feature `j` with 1. Intercepts are log class
/// proportions relative to class 1, and `sigma^2_j = max(w, V(delta_j) / C)`.
pub fn initialize_chain(dataset: &Dataset, prior: &PriorSpec) -> Result<ChainState> {
    prior.validate()?;
    let counts = dataset.class_counts();
    if let Some(missing) = counts.iter().position(|&c| c == 0) {
        return Err(Error::MissingClass { class: missing + 1 });
    }
    let (n, p) = (dataset.n_cases(), dataset.n_features());
    let c = dataset.class_count();
    let k_count = c - 1;
    let x = dataset.features();
    let labels = dataset.labels();

    let mut means = Array2::<f64>::zeros((c, p));
    for (row, &y) in x.rows().into_iter().zip(labels) {
        let mut m = means.row_mut(y - 1);
        m += &row;
    }
    for (mut m, &cnt) in means.rows_mut().into_iter().zip(&counts) {
        m /= cnt as f64;
    }
    let mut pooled = vec![0.0; p];
    for (row, &y) in x.rows().into_iter().zip(labels) {
        for j in 0..p {
            let d = row[j] - means[[y - 1, j]];
            pooled[j] += d * d;
        }
    }
    let dof = if n > c { n - c } else { n };
    let mut delta = CoefficientMatrix::zeros(p, k_count);
    {
        let d = delta.as_array_mut();
        for k in 0..k_count {
            d[[0, k]] = (counts[k + 1] as f64 / counts[0] as f64).ln();
        }
        for j in 0..p {
            let s2 = (pooled[j] / dof as f64 + 1.0) / 2.0;
            for k in 0..k_count {
                d[[j + 1, k]] = (means[[k + 1, j]] - means[[0, j]]) / s2;
            }
        }
    }
    let w = prior.w();
    let sigma_sq: Vec<f64> = (1..=p)
        .map(|j| {
            let row = delta.row(j).to_vec();
            w.max(v_value(&row, c) / c as f64)
        })
        .collect();
    ChainState::from_parts(dataset, prior, delta, VarianceVector::new(sigma_sq)?)
}

/// Row indices updated by HMC: the intercept row and every feature with `sigma_j > zeta`.
pub fn restricted_update_set(sigma_sq: &VarianceVector, zeta: f64) -> Vec<usize> {
    std::iter::once(0)
        .chain(
            sigma_sq
                .as_slice()
                .iter()
                .enumerate()
                .filter(|(_, s)| s.sqrt() > zeta)
                .map(|(j, _)| j + 1),
        )
        .collect()
}

/// Which coefficient rows take part in the HMC step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UpdateScope {
    /// Intercepts plus features with `sigma_j > zeta`.
    Restricted(f64),
    /// Every row, without consulting the variances.
    Full,
}

/// What happened during one Gibbs iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationReport {
    pub accepted: bool,
    pub delta_h: f64,
    pub divergent: bool,
    /// Feature rows (excluding the intercept row) updated by HMC.
    pub active_features: usize,
    /// Variances left unchanged because `V = 0` made their conditional improper.
    pub skipped_variances: usize,
}

/// Precomputed design columns and column norms for repeated Gibbs iterations.
pub struct GibbsKernel<'a> {
    dataset: &'a Dataset,
    prior: PriorSpec,
    scope: UpdateScope,
    /// Column-major `n x (p + 1)` design with a leading column of ones.
    design: Vec<f64>,
    col_sum_sq: Vec<f64>,
}

impl<'a> GibbsKernel<'a> {
    pub fn new(dataset: &'a Dataset, prior: PriorSpec, scope: UpdateScope) -> Result<Self> {
        prior.validate()?;
        if let UpdateScope::Restricted(z) = scope {
            if !(z >= 0.0 && z.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "zeta",
                    value: z,
                });
            }
        }
        let (n, p) = (dataset.n_cases(), dataset.n_features());
        let mut design = Vec::with_capacity(n * (p + 1));
        design.extend(std::iter::repeat(1.0).take(n));
        for col in dataset.features().columns() {
            design.extend(col.iter());
        }
        let col_sum_sq = design
            .chunks(n.max(1))
            .take(p + 1)
            .map(|c| c.iter().map(|v| v * v).sum())
            .collect();
        let col_sum_sq = if n == 0 { vec![0.0; p + 1] } else { col_sum_sq };
        Ok(Self {
            dataset,
            prior,
            scope,
            design,
            col_sum_sq,
        })
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    fn column(&self, j: usize) -> &[f64] {
        let n = self.dataset.n_cases();
        &self.design[j * n..(j + 1) * n]
    }

    fn active_set(&self, state: &ChainState) -> Vec<usize> {
        match self.scope {
            UpdateScope::Restricted(zeta) => restricted_update_set(&state.sigma_sq, zeta),
            UpdateScope::Full => (0..=self.dataset.n_features()).collect(),
        }
    }

    fn row_variance(&self, state: &ChainState, j: usize) -> f64 {
        if j == 0 {
            self.prior.sigma0_sq
        } else {
            state.sigma_sq.feature(j)
        }
    }

    /// One full Gibbs scan; `state` is updated in place.
    pub fn iterate<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        trajectory_length: usize,
        eps: f64,
        rng: &mut R,
    ) -> Result<IterationReport> {
        let k_count = self.dataset.n_contrasts();
        let c = self.dataset.class_count() as f64;
        let active = self.active_set(state);

        // Step 1: HMC on the active rows.
        let mut q = Vec::with_capacity(active.len() * k_count);
        let mut curvatures = Vec::with_capacity(active.len() * k_count);
        let mut variances = Vec::with_capacity(active.len());
        for &j in &active {
            q.extend(state.delta.row(j).iter());
            let var = self.row_variance(state, j);
            variances.push(var);
            let curv = self.col_sum_sq[j] / 4.0 + (c - 1.0) / c / var;
            curvatures.extend(std::iter::repeat(curv).take(k_count));
        }
        let mut block = ActiveBlock::new(self, &active, variances, state, &q);
        let outcome = hmc_update(
            &q,
            &mut block,
            &HmcConfig::new(trajectory_length, eps),
            &curvatures,
            rng,
        )?;
        if outcome.accepted {
            debug_assert!(block.q_at == outcome.new_position);
            let d = state.delta.as_array_mut();
            for (a, &j) in active.iter().enumerate() {
                for k in 0..k_count {
                    d[[j, k]] = outcome.new_position[a * k_count + k];
                }
            }
            block.write_cache(&mut state.cache);
        }

        // Step 2: variances, then the scale if it is sampled.
        let family = self.prior.family;
        let alpha = self.prior.alpha;
        let w = state.effective_log_w(&self.prior).exp();
        let mut skipped = 0;
        let mut row = vec![0.0; k_count];
        for j in 1..=self.dataset.n_features() {
            for (k, slot) in row.iter_mut().enumerate() {
                *slot = state.delta.as_array()[[j, k]];
            }
            let v = v_value(&row, self.dataset.class_count());
            if v == 0.0 && improper_at_zero(family, k_count) {
                skipped += 1;
                continue;
            }
            let s = sample_sigma_sq(family, alpha, w, k_count, v, rng)?;
            state.sigma_sq.set_feature(j, s);
        }
        if let WMode::Hyper { prior_variance } = self.prior.w_mode {
            state.log_w = Some(sample_log_w(
                &state.sigma_sq,
                family,
                alpha,
                prior_variance,
                rng,
            )?);
        }

        state.iteration += 1;
        Ok(IterationReport {
            accepted: outcome.accepted,
            delta_h: outcome.delta_h,
            divergent: outcome.divergent,
            active_features: active.len() - 1,
            skipped_variances: skipped,
        })
    }
}

/// Potential energy of the active rows with the remaining rows held fixed.
///
/// Linear predictors are kept for the most recently evaluated position and moved
/// by the coordinate differences at each evaluation, so one evaluation costs
/// `O(n |active| K)`.
struct ActiveBlock<'k> {
    kernel: &'k GibbsKernel<'k>,
    active: &'k [usize],
    variances: Vec<f64>,
    /// `K x n`, contrast-major.
    eta: Vec<f64>,
    q_at: Vec<f64>,
    resid: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'k> ActiveBlock<'k> {
    fn new(
        kernel: &'k GibbsKernel<'k>,
        active: &'k [usize],
        variances: Vec<f64>,
        state: &ChainState,
        q: &[f64],
    ) -> Self {
        let n = kernel.dataset.n_cases();
        let k_count = kernel.dataset.n_contrasts();
        let mut eta = vec![0.0; n * k_count];
        for ((i, k), &v) in state.cache.indexed_iter() {
            eta[k * n + i] = v;
        }
        Self {
            kernel,
            active,
            variances,
            eta,
            q_at: q.to_vec(),
            resid: vec![0.0; n * k_count],
            scratch: vec![0.0; k_count],
        }
    }

    fn write_cache(&self, cache: &mut Array2<f64>) {
        let n = cache.nrows();
        for ((i, k), v) in cache.indexed_iter_mut() {
            *v = self.eta[k * n + i];
        }
    }
}

impl Potential for ActiveBlock<'_> {
    fn evaluate(&mut self, q: &[f64], grad: &mut [f64]) -> f64 {
        let ds = self.kernel.dataset;
        let n = ds.n_cases();
        let k_count = ds.n_contrasts();
        let class_count = ds.class_count();

        for (a, &j) in self.active.iter().enumerate() {
            let col = self.kernel.column(j);
            for k in 0..k_count {
                let idx = a * k_count + k;
                let step = q[idx] - self.q_at[idx];
                if step != 0.0 {
                    let eta_k = &mut self.eta[k * n..(k + 1) * n];
                    for (e, &x) in eta_k.iter_mut().zip(col) {
                        *e += x * step;
                    }
                }
            }
        }
        self.q_at.copy_from_slice(q);

        let mut u = 0.0;
        for (i, &y) in ds.labels().iter().enumerate() {
            for k in 0..k_count {
                self.scratch[k] = self.eta[k * n + i];
            }
            let lse = log_normalizer(&self.scratch);
            u += lse - if y == 1 { 0.0 } else { self.scratch[y - 2] };
            for k in 0..k_count {
                let hit = if y == k + 2 { 1.0 } else { 0.0 };
                self.resid[k * n + i] = (self.scratch[k] - lse).exp() - hit;
            }
        }

        for (a, &j) in self.active.iter().enumerate() {
            let col = self.kernel.column(j);
            let row = &q[a * k_count..(a + 1) * k_count];
            let var = self.variances[a];
            let mean = row.iter().sum::<f64>() / class_count as f64;
            u += v_value(row, class_count) / (2.0 * var);
            for k in 0..k_count {
                let r = &self.resid[k * n..(k + 1) * n];
                let g: f64 = col.iter().zip(r).map(|(x, r)| x * r).sum();
                grad[a * k_count + k] = g + (row[k] - mean) / var;
            }
        }
        u
    }
}

/// Runs one Gibbs iteration with a throwaway kernel restricted by `settings.zeta`.
pub fn gibbs_iteration<R: Rng + ?Sized>(
    state: &mut ChainState,
    dataset: &Dataset,
    prior: &PriorSpec,
    settings: &McmcSettings,
    trajectory_length: usize,
    rng: &mut R,
) -> Result<IterationReport> {
    GibbsKernel::new(dataset, *prior, UpdateScope::Restricted(settings.zeta))?.iterate(
        state,
        trajectory_length,
        settings.eps,
        rng,
    )
}

/// Snapshot handed to a progress observer.
pub struct Progress<'a> {
    pub phase: Phase,
    /// Iterations completed in this phase.
    pub done: usize,
    pub total: usize,
    pub stats: &'a PhaseStats,
    pub state: &'a ChainState,
    pub log_likelihood: f64,
    pub active_features: usize,
}

/// A chain that stopped early, with every draw stored before the failure.
#[derive(Debug)]
pub struct ChainFailure {
    pub error: Error,
    pub partial: SampleStore,
}

impl std::fmt::Display for ChainFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({} draws kept)", self.error, self.partial.len())
    }
}

impl std::error::Error for ChainFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

fn empty_store(dataset: &Dataset, prior: &PriorSpec, settings: &McmcSettings) -> SampleStore {
    SampleStore::new(StoreMetadata {
        n_features: dataset.n_features(),
        class_count: dataset.class_count(),
        settings: *settings,
        prior: *prior,
        fingerprint: dataset.fingerprint(),
        initial: PhaseStats::default(),
        sampling: PhaseStats::default(),
        standardization: dataset.standardization().cloned(),
    })
}

/// Initializes and runs a chain: `n1` iterations with `l1` leapfrog steps, then `n2`
/// with `l2`, storing every `thin`-th sampling-phase state.
pub fn run_chain<R: Rng + ?Sized>(
    dataset: &Dataset,
    prior: &PriorSpec,
    settings: &McmcSettings,
    rng: &mut R,
) -> std::result::Result<SampleStore, ChainFailure> {
    let state = match initialize_chain(dataset, prior) {
        Ok(s) => s,
        Err(error) => {
            return Err(ChainFailure {
                error,
                partial: empty_store(dataset, prior, settings),
            })
        }
    };
    run_chain_from(state, dataset, prior, settings, rng, &mut |_| {})
}

/// Runs both phases from a given state. `observer` is called about 100 times per phase.
pub fn run_chain_from<R: Rng + ?Sized>(
    mut state: ChainState,
    dataset: &Dataset,
    prior: &PriorSpec,
    settings: &McmcSettings,
    rng: &mut R,
    observer: &mut dyn FnMut(&Progress<'_>),
) -> std::result::Result<SampleStore, ChainFailure> {
    let mut store = empty_store(dataset, prior, settings);
    let fail = |error: Error, store: SampleStore| ChainFailure {
        error,
        partial: store,
    };
    if let Err(e) = settings.validate() {
        return Err(fail(e, store));
    }
    let kernel = match GibbsKernel::new(dataset, *prior, UpdateScope::Restricted(settings.zeta)) {
        Ok(k) => k,
        Err(e) => return Err(fail(e, store)),
    };

    for (phase, total, length) in [
        (Phase::Initial, settings.n1, settings.l1),
        (Phase::Sampling, settings.n2, settings.l2),
    ] {
        state.phase = phase;
        let every = (total / 100).max(1);
        let mut stats = PhaseStats::default();
        for done in 1..=total {
            let report = match kernel.iterate(&mut state, length, settings.eps, rng) {
                Ok(r) => r,
                Err(e) => {
                    let error = Error::Chain {
                        iteration: state.iteration + 1,
                        source: Box::new(e),
                    };
                    store.set_stats(phase, stats);
                    return Err(fail(error, store));
                }
            };
            stats.record(&report);
            if state.iteration % CACHE_REFRESH_INTERVAL == 0 {
                refresh_cache(&mut state, dataset);
            }
            if phase == Phase::Sampling && done % settings.thin == 0 {
                store.push(Draw::from_state(&state, &report));
            }
            if done % every == 0 || done == total {
                observer(&Progress {
                    phase,
                    done,
                    total,
                    stats: &stats,
                    state: &state,
                    log_likelihood: state.log_likelihood(dataset),
                    active_features: report.active_features,
                });
            }
        }
        store.set_stats(phase, stats);
    }
    Ok(store)
}
