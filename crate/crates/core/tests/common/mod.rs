//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

/// Numerically stable `log(1 + exp(t))`.
pub fn log1p_exp(t: f64) -> f64 {
    if t > 35.0 {
        t
    } else {
        t.exp().ln_1p()
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the mean from non-overlapping batch means.
pub fn batch_means_se(xs: &[f64], batches: usize) -> f64 {
    let size = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| mean(&xs[b * size..(b + 1) * size]))
        .collect();
    (variance(&means) / batches as f64).sqrt()
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_one_sample(draws: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = draws.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Kolmogorov-Smirnov distance between two samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// CDF of an unnormalized 1-D density tabulated on a fine grid by the trapezoid rule.
pub struct GridCdf {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl GridCdf {
    /// Tabulates `exp(log_f)` over the region where it is within `e^-40` of its
    /// maximum. Returns `None` when that region reaches the scan limits `[-300, 300]`,
    /// i.e. when the density has no normalizable bulk there.
    pub fn from_log_density(log_f: impl Fn(f64) -> f64) -> Option<Self> {
        let (lo_scan, hi_scan, step) = (-300.0, 300.0, 0.05);
        let n_scan = ((hi_scan - lo_scan) / step) as usize + 1;
        let scan: Vec<(f64, f64)> = (0..n_scan)
            .map(|i| {
                let x = lo_scan + step * i as f64;
                (x, log_f(x))
            })
            .collect();
        let max = scan
            .iter()
            .map(|p| p.1)
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return None;
        }
        let first = scan.iter().position(|p| p.1 > max - 40.0)?;
        let last = scan.iter().rposition(|p| p.1 > max - 40.0)?;
        if first == 0 || last == n_scan - 1 {
            return None;
        }
        let lo = scan[first - 1].0;
        let hi = scan[last + 1].0;
        let n = 40_001;
        let h = (hi - lo) / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
        let dens: Vec<f64> = xs.iter().map(|&x| (log_f(x) - max).exp()).collect();
        let mut cdf = vec![0.0; n];
        for i in 1..n {
            cdf[i] = cdf[i - 1] + 0.5 * h * (dens[i - 1] + dens[i]);
        }
        let total = cdf[n - 1];
        cdf.iter_mut().for_each(|c| *c /= total);
        Some(Self { xs, cdf })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return 1.0;
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.cdf[i] + t * (self.cdf[i + 1] - self.cdf[i])
    }
}

/// Log density of `xi = log sigma^2` given `V`, written from the variance-scale
/// densities: prior on `sigma^2` times `sigma^(-K) exp(-V / (2 sigma^2))` times the
/// Jacobian `sigma^2`.
pub mod xi_density {
    use super::log1p_exp;

    pub fn ig(alpha: f64, log_w: f64, k: usize, v: f64, xi: f64) -> f64 {
        let b = (alpha * log_w.exp() + v) / 2.0;
        -((alpha + k as f64) / 2.0) * xi - b * (-xi).exp()
    }

    pub fn ghs(alpha: f64, log_w: f64, k: usize, v: f64, xi: f64) -> f64 {
        let k = k as f64;
        -(k / 2.0) * xi
            - v / 2.0 * (-xi).exp()
            - (alpha + 1.0) / 2.0 * log1p_exp(xi - alpha.ln() - log_w)
            + xi / 2.0
    }

    pub fn neg(alpha: f64, log_w: f64, k: usize, v: f64, xi: f64) -> f64 {
        let k = k as f64;
        let log_lambda = (alpha / 2.0).ln() + log_w;
        -(k / 2.0) * xi - v / 2.0 * (-xi).exp() - (alpha / 2.0 + 1.0) * log1p_exp(xi - log_lambda)
            + xi
    }
}

/// Empirical quantile with linear interpolation.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let t = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - t) + sorted[i + 1] * t
    } else {
        sorted[i]
    }
}
