//! Small statistics helpers shared by the verification paths: two-sample
//! Kolmogorov-Smirnov distance, total variation, empirical moments.

/// Two-sample Kolmogorov-Smirnov statistic (max CDF gap).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Total variation distance between two distributions on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p
        .iter()
        .zip(q.iter())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    xs.iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (xs.len() as f64 - 1.0)
}

/// Inverse-CDF sampler over a tabulated one-dimensional density.
/// `values[i]` is the density at `x0 + i·step`; draws are piecewise-linear
/// within a cell, which is enough to feed two-sample tests.
pub fn sample_tabulated(values: &[f64], x0: f64, step: f64, us: &[f64]) -> Vec<f64> {
    let total: f64 = values.iter().map(|v| v.max(0.0)).sum();
    let mut cdf = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for v in values {
        acc += v.max(0.0) / total;
        cdf.push(acc);
    }
    us.iter()
        .map(|&u| {
            let idx = cdf.partition_point(|&c| c < u).min(values.len() - 1);
            let lo = if idx == 0 { 0.0 } else { cdf[idx - 1] };
            let frac = if cdf[idx] > lo {
                (u - lo) / (cdf[idx] - lo)
            } else {
                0.5
            };
            x0 + (idx as f64 + frac - 0.5) * step
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_identical_samples_is_zero() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
    }

    #[test]
    fn ks_disjoint_samples_is_one() {
        let a = [0.0, 1.0, 2.0];
        let b = [10.0, 11.0];
        assert_eq!(ks_two_sample(&a, &b), 1.0);
    }

    #[test]
    fn tabulated_sampler_reproduces_moments() {
        // discrete Gaussian table
        let step = 0.01;
        let x0 = -6.0;
        let n = 1201;
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let x = x0 + i as f64 * step;
                (-0.5 * x * x).exp()
            })
            .collect();
        let us: Vec<f64> = (0..20000).map(|i| (i as f64 + 0.5) / 20000.0).collect();
        let draws = sample_tabulated(&values, x0, step, &us);
        assert!(mean(&draws).abs() < 0.01);
        assert!((variance(&draws) - 1.0).abs() < 0.01);
    }
}
