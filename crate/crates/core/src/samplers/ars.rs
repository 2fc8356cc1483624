//! Adaptive rejection sampling (tangent-hull variant) for log-concave densities
//! on an interval.

use rand::Rng;

use crate::error::{Error, Result};

/// Proposals tried by one draw before giving up.
pub const MAX_PROPOSALS: usize = 10_000;
/// Upper bound on hull size; beyond it the hull stops growing but sampling stays exact.
const MAX_HULL_POINTS: usize = 64;
const VIOLATION_TOLERANCE: f64 = 1e-8;

/// A univariate log-concave target, known up to an additive constant.
pub trait LogConcave {
    /// `(log f(x), d/dx log f(x))` for `x` inside the support.
    fn log_density_and_derivative(&self, x: f64) -> (f64, f64);

    /// Open support interval; endpoints may be infinite.
    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

impl<F: Fn(f64) -> (f64, f64)> LogConcave for F {
    fn log_density_and_derivative(&self, x: f64) -> (f64, f64) {
        self(x)
    }
}

/// Wraps a target with finite support bounds.
#[derive(Clone, Copy, Debug)]
pub struct Bounded<T> {
    pub target: T,
    pub lower: f64,
    pub upper: f64,
}

impl<T: LogConcave> LogConcave for Bounded<T> {
    fn log_density_and_derivative(&self, x: f64) -> (f64, f64) {
        self.target.log_density_and_derivative(x)
    }

    fn support(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }
}

fn tolerance(u: f64) -> f64 {
    VIOLATION_TOLERANCE * u.abs().max(1.0)
}

/// `log(exp(a) + exp(b))`.
fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// Log of `integral_a^b exp(top + d (x - anchor)) dx` for the segment `[a, b]`,
/// computed from the endpoint where the exponent is largest.
fn log_segment_mass(h: f64, d: f64, x: f64, a: f64, b: f64) -> f64 {
    let len = b - a;
    if len <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let scaled = d.abs() * len;
    if scaled < 1e-12 {
        // flat enough that the mass is the width times the midpoint height
        let mid = if len.is_finite() { 0.5 * (a + b) } else { x };
        return h + d * (mid - x) + len.ln();
    }
    let peak = if d > 0.0 { b } else { a };
    let top = h + d * (peak - x);
    // (1 - exp(-|d| L)) / |d|
    top + (-(-scaled).exp_m1()).ln() - d.abs().ln()
}

/// Inverse-CDF draw inside a segment of the piecewise-exponential envelope.
fn sample_in_segment(d: f64, a: f64, b: f64, uniform: f64) -> f64 {
    let len = b - a;
    let scaled = d.abs() * len;
    if scaled < 1e-12 {
        return a + uniform * len;
    }
    // distance from the peak end, truncated exponential with rate |d|
    let t = -(-uniform * -(-scaled).exp_m1()).ln_1p() / d.abs();
    let t = t.min(len);
    if d > 0.0 {
        b - t
    } else {
        a + t
    }
}

/// Log-density drop, relative to the best starting abscissa, beyond which a new edge
/// point is pulled back toward the interior. Tangents anchored far down a steep tail
/// lose all precision in the hull arithmetic.
const EDGE_DROP: f64 = 50.0;
/// Largest allowed log mass of an exponential tail beyond an edge point, relative to
/// the best starting abscissa. A nearly flat edge tangent would otherwise send
/// proposals to where the density underflows and the hull cannot be refined.
const EDGE_TAIL: f64 = 10.0;

/// Steps outward from the given abscissae, doubling the step each time, until each
/// infinite edge has a point whose slope points inward and whose tangent tail is not
/// dominant. An overshooting edge point is then bisected back toward its inner
/// neighbour while it keeps both properties. Returns the sorted abscissae.
pub fn expand_bracket<T: LogConcave + ?Sized>(target: &T, init: &[f64]) -> Result<Vec<f64>> {
    let (lo, hi) = target.support();
    let mut xs: Vec<f64> = init
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    if xs.is_empty() {
        return Err(Error::BracketFailure);
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let spread = (xs[xs.len() - 1] - xs[0]).max(1.0);
    let reference = xs
        .iter()
        .map(|&x| target.log_density_and_derivative(x).0)
        .filter(|h| h.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !reference.is_finite() {
        return Err(Error::BracketFailure);
    }
    let floor = reference - EDGE_DROP;
    // slope `d` of the correct sign, and a tail mass exp(h) / |d| that is not dominant
    let edge_ok = |x: f64, sign: f64| {
        let (h, d) = target.log_density_and_derivative(x);
        let d = d * sign;
        d > 0.0 && !h.is_nan() && h - d.ln() <= reference + EDGE_TAIL
    };

    if !lo.is_finite() {
        let mut step = spread;
        let mut tries = 0;
        while !edge_ok(xs[0], 1.0) {
            tries += 1;
            if tries > 60 {
                return Err(Error::BracketFailure);
            }
            xs.insert(0, xs[0] - step);
            step *= 2.0;
        }
        if xs.len() > 1 {
            xs[0] = pull_back(target, xs[0], xs[1], floor, |x| edge_ok(x, 1.0));
        }
    }
    if !hi.is_finite() {
        let mut step = spread;
        let mut tries = 0;
        while !edge_ok(xs[xs.len() - 1], -1.0) {
            tries += 1;
            if tries > 60 {
                return Err(Error::BracketFailure);
            }
            let last = xs[xs.len() - 1];
            xs.push(last + step);
            step *= 2.0;
        }
        let n = xs.len();
        if n > 1 {
            xs[n - 1] = pull_back(target, xs[n - 1], xs[n - 2], floor, |x| edge_ok(x, -1.0));
        }
    }
    if xs.len() < 2 {
        // a single point with an already-bracketing derivative needs a partner
        let x = xs[0];
        let partner = if hi.is_finite() {
            0.5 * (x + hi)
        } else {
            x + spread
        };
        xs.push(partner);
    }
    Ok(xs)
}

/// Bisects between an acceptable edge point `outer` and its neighbour `inner`,
/// keeping the outer end acceptable, until the log density there is above `floor`.
fn pull_back<T: LogConcave + ?Sized>(
    target: &T,
    mut outer: f64,
    mut inner: f64,
    floor: f64,
    acceptable: impl Fn(f64) -> bool,
) -> f64 {
    for _ in 0..200 {
        if target.log_density_and_derivative(outer).0 >= floor {
            break;
        }
        let mid = 0.5 * (outer + inner);
        if mid == outer || mid == inner {
            break;
        }
        if acceptable(mid) {
            outer = mid;
        } else {
            inner = mid;
        }
    }
    outer
}

/// Hull state for repeated draws from one target.
pub struct ArsSampler<'a, T: LogConcave + ?Sized> {
    target: &'a T,
    lower: f64,
    upper: f64,
    xs: Vec<f64>,
    hs: Vec<f64>,
    ds: Vec<f64>,
    /// Tangent intersections; `zs[i]..zs[i + 1]` is segment `i`, so `zs.len() = xs.len() + 1`.
    zs: Vec<f64>,
    log_masses: Vec<f64>,
    log_total: f64,
}

impl<'a, T: LogConcave + ?Sized> ArsSampler<'a, T> {
    /// Builds the initial hull. Requires at least two abscissae inside the support; on
    /// an infinite edge the nearest abscissa must have a log-density slope pointing
    /// toward the interior of the support.
    pub fn new(target: &'a T, init: &[f64]) -> Result<Self> {
        let (lower, upper) = target.support();
        if !(lower < upper) {
            return Err(Error::InvalidParameter {
                name: "support width",
                value: upper - lower,
            });
        }
        let mut xs: Vec<f64> = init.to_vec();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.len() < 2 {
            return Err(Error::BracketFailure);
        }
        if xs
            .iter()
            .any(|x| !(x.is_finite() && *x > lower && *x < upper))
        {
            return Err(Error::BracketFailure);
        }
        let mut hs = Vec::with_capacity(xs.len());
        let mut ds = Vec::with_capacity(xs.len());
        for &x in &xs {
            let (h, d) = target.log_density_and_derivative(x);
            if !(h.is_finite() && d.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "log density at abscissa",
                    value: x,
                });
            }
            hs.push(h);
            ds.push(d);
        }
        if !lower.is_finite() && ds[0] <= 0.0 {
            return Err(Error::BracketFailure);
        }
        if !upper.is_finite() && ds[ds.len() - 1] >= 0.0 {
            return Err(Error::BracketFailure);
        }
        for i in 1..ds.len() {
            if ds[i] > ds[i - 1] + tolerance(ds[i - 1]) {
                return Err(Error::NotLogConcave {
                    x: xs[i],
                    violation: ds[i] - ds[i - 1],
                });
            }
        }
        let mut sampler = Self {
            target,
            lower,
            upper,
            xs,
            hs,
            ds,
            zs: Vec::new(),
            log_masses: Vec::new(),
            log_total: 0.0,
        };
        sampler.rebuild()?;
        Ok(sampler)
    }

    pub fn hull_size(&self) -> usize {
        self.xs.len()
    }

    fn rebuild(&mut self) -> Result<()> {
        let n = self.xs.len();
        self.zs.clear();
        self.zs.push(self.lower);
        for i in 0..n - 1 {
            let (x0, x1) = (self.xs[i], self.xs[i + 1]);
            let (h0, h1) = (self.hs[i], self.hs[i + 1]);
            let (d0, d1) = (self.ds[i], self.ds[i + 1]);
            let gap = d0 - d1;
            let z = if gap.abs() <= 1e-12 * d0.abs().max(d1.abs()).max(1.0) {
                0.5 * (x0 + x1)
            } else {
                (h1 - h0 - x1 * d1 + x0 * d0) / gap
            };
            self.zs.push(if z.is_finite() {
                z.clamp(x0, x1)
            } else {
                0.5 * (x0 + x1)
            });
        }
        self.zs.push(self.upper);

        self.log_masses.clear();
        let mut total = f64::NEG_INFINITY;
        for i in 0..n {
            let m = log_segment_mass(
                self.hs[i],
                self.ds[i],
                self.xs[i],
                self.zs[i],
                self.zs[i + 1],
            );
            if m.is_nan() || m == f64::INFINITY {
                return Err(Error::BracketFailure);
            }
            total = log_add(total, m);
            self.log_masses.push(m);
        }
        if !total.is_finite() {
            return Err(Error::BracketFailure);
        }
        self.log_total = total;
        Ok(())
    }

    fn segment_of(&self, x: f64) -> usize {
        // zs[1..n] are the interior boundaries
        let interior = &self.zs[1..self.zs.len() - 1];
        interior.partition_point(|&z| z < x)
    }

    fn upper_hull(&self, x: f64) -> f64 {
        let i = self.segment_of(x);
        self.hs[i] + self.ds[i] * (x - self.xs[i])
    }

    fn squeeze(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return f64::NEG_INFINITY;
        }
        let j = self.xs.partition_point(|&v| v <= x).clamp(1, n - 1);
        let (x0, x1) = (self.xs[j - 1], self.xs[j]);
        let (h0, h1) = (self.hs[j - 1], self.hs[j]);
        ((x1 - x) * h0 + (x - x0) * h1) / (x1 - x0)
    }

    fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let target = self.log_total + rng.random::<f64>().ln();
        let mut acc = f64::NEG_INFINITY;
        let mut seg = self.log_masses.len() - 1;
        for (i, &m) in self.log_masses.iter().enumerate() {
            acc = log_add(acc, m);
            if acc >= target {
                seg = i;
                break;
            }
        }
        let x = sample_in_segment(
            self.ds[seg],
            self.zs[seg],
            self.zs[seg + 1],
            rng.random::<f64>(),
        );
        x.clamp(self.zs[seg], self.zs[seg + 1])
    }

    fn insert(&mut self, x: f64, h: f64, d: f64) -> Result<()> {
        if self.xs.len() >= MAX_HULL_POINTS {
            return Ok(());
        }
        let pos = self.xs.partition_point(|&v| v < x);
        if self.xs.get(pos) == Some(&x) {
            return Ok(());
        }
        if pos > 0 && d > self.ds[pos - 1] + tolerance(self.ds[pos - 1]) {
            return Err(Error::NotLogConcave {
                x,
                violation: d - self.ds[pos - 1],
            });
        }
        if pos < self.ds.len() && self.ds[pos] > d + tolerance(d) {
            return Err(Error::NotLogConcave {
                x,
                violation: self.ds[pos] - d,
            });
        }
        self.xs.insert(pos, x);
        self.hs.insert(pos, h);
        self.ds.insert(pos, d);
        self.rebuild()
    }

    /// Point at which to refine the hull after rejecting `x`. A rejection far out in
    /// a tail is replaced by a bisected point between `x` and the nearest abscissa whose
    /// log density is within reach of the hull maximum, which keeps tangent arithmetic
    /// in range. Any abscissa gives a valid hull, so exactness is unaffected.
    fn refinement_point(&self, x: f64, h: f64, d: f64) -> (f64, f64, f64) {
        let n = self.xs.len();
        let floor = self.hs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - EDGE_DROP;
        let inner = if x < self.xs[0] {
            self.xs[0]
        } else if x > self.xs[n - 1] {
            self.xs[n - 1]
        } else {
            return (x, h, d);
        };
        if h >= floor && h.is_finite() && d.is_finite() {
            return (x, h, d);
        }
        let mut outer = x;
        let mut best = (x, h, d);
        for _ in 0..200 {
            let mid = 0.5 * (outer + inner);
            if mid == outer || mid == inner {
                break;
            }
            let (hm, dm) = self.target.log_density_and_derivative(mid);
            best = (mid, hm, dm);
            if hm >= floor {
                break;
            }
            outer = mid;
        }
        best
    }

    /// One exact draw from the normalized target; the hull is refined on rejection.
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        for _ in 0..MAX_PROPOSALS {
            let x = self.propose(rng);
            let u = self.upper_hull(x);
            let log_v = rng.random::<f64>().ln();
            let lower = self.squeeze(x);
            if log_v <= lower - u {
                return Ok(x);
            }
            let (h, d) = self.target.log_density_and_derivative(x);
            if h.is_nan() || d.is_nan() {
                return Err(Error::InvalidParameter {
                    name: "log density",
                    value: x,
                });
            }
            if h > u + tolerance(u) {
                return Err(Error::NotLogConcave {
                    x,
                    violation: h - u,
                });
            }
            if h < lower - tolerance(lower) {
                return Err(Error::NotLogConcave {
                    x,
                    violation: lower - h,
                });
            }
            let accept = log_v <= h - u;
            if accept {
                return Ok(x);
            }
            let (x, h, d) = self.refinement_point(x, h, d);
            if h.is_finite() && d.is_finite() {
                self.insert(x, h, d)?;
            }
        }
        Err(Error::ArsExhausted(MAX_PROPOSALS))
    }
}

/// One draw from `target` using a fresh hull built on `init_abscissae`.
pub fn ars_sample<T, R>(target: &T, init_abscissae: &[f64], rng: &mut R) -> Result<f64>
where
    T: LogConcave + ?Sized,
    R: Rng + ?Sized,
{
    ArsSampler::new(target, init_abscissae)?.draw(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn std_normal(x: f64) -> (f64, f64) {
        (-0.5 * x * x, -x)
    }

    fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn standard_normal_passes_ks() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut sampler = ArsSampler::new(&std_normal, &[-1.0, 0.5, 2.0]).unwrap();
        let draws: Vec<f64> = (0..10_000)
            .map(|_| sampler.draw(&mut rng).unwrap())
            .collect();
        let n = Normal::new(0.0, 1.0).unwrap();
        let d = ks_statistic(draws.clone(), |x| n.cdf(x));
        // 1% critical value for n = 10^4
        assert!(d < 1.628 / 100.0, "KS {d}");
        let mean = draws.iter().sum::<f64>() / 1e4;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (1e4 - 1.0);
        assert!(mean.abs() < 3.0 / 100.0);
        assert!((var - 1.0).abs() < 3.0 * (2.0f64 / 1e4).sqrt());
    }

    #[test]
    fn exponential_on_half_line() {
        let target = Bounded {
            target: |x: f64| (-x, -1.0),
            lower: 0.0,
            upper: f64::INFINITY,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut sampler = ArsSampler::new(&target, &[0.5, 2.0]).unwrap();
        let draws: Vec<f64> = (0..10_000)
            .map(|_| sampler.draw(&mut rng).unwrap())
            .collect();
        assert!(draws.iter().all(|&x| x > 0.0));
        let mean = draws.iter().sum::<f64>() / 1e4;
        assert!((mean - 1.0).abs() < 3.0 / 100.0, "mean {mean}");
    }

    #[test]
    fn shift_moves_draws_exactly() {
        let c = 3.25;
        let shifted = move |x: f64| std_normal(x - c);
        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let a = ars_sample(&std_normal, &[-1.0, 1.0], &mut r1).unwrap();
            let b = ars_sample(&shifted, &[-1.0 + c, 1.0 + c], &mut r2).unwrap();
            assert!((b - a - c).abs() < 1e-9);
        }
    }

    #[test]
    fn convex_target_is_detected() {
        let convex = |x: f64| (0.5 * x * x - x.powi(4), x - 4.0 * x.powi(3));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut failed = false;
        for _ in 0..200 {
            match ars_sample(&convex, &[-0.9, -0.1, 0.1, 0.9], &mut rng) {
                Err(Error::NotLogConcave { .. }) => {
                    failed = true;
                    break;
                }
                Err(e) => panic!("unexpected error {e}"),
                Ok(_) => {}
            }
        }
        assert!(failed);
    }

    #[test]
    fn unbracketed_abscissae_fail_and_expansion_recovers() {
        let shifted = |x: f64| std_normal(x - 50.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(matches!(
            ars_sample(&shifted, &[0.0, 1.0], &mut rng),
            Err(Error::BracketFailure)
        ));
        let xs = expand_bracket(&shifted, &[0.0, 1.0]).unwrap();
        assert!(xs[xs.len() - 1] > 50.0 && xs[0] < 50.0);
        assert!(ars_sample(&shifted, &xs, &mut rng).is_ok());
    }

    #[test]
    fn expansion_fails_for_monotone_target() {
        let increasing = |x: f64| (x, 1.0);
        assert!(matches!(
            expand_bracket(&increasing, &[0.0]),
            Err(Error::BracketFailure)
        ));
    }

    #[test]
    fn segment_sampler_stays_in_bounds() {
        for &d in &[-50.0, -1.0, 0.0, 1e-14, 2.0, 80.0] {
            for &u in &[0.0, 1e-12, 0.5, 1.0 - 1e-12] {
                let x = sample_in_segment(d, -1.0, 2.0, u);
                assert!((-1.0..=2.0).contains(&x), "d {d} u {u} x {x}");
            }
        }
    }
}
