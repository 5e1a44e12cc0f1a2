//! Kolmogorov-Smirnov distances.

/// `sup |F_n - F|` of a sample against a continuous reference CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((f - i as f64 / n).abs())
            .max(((i + 1) as f64 / n - f).abs())
    })
}

/// `sup |F_a - F_b|` between two empirical distributions.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0_f64);
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn stratified_normal_sample_is_close() {
        let n = Normal::new(0.0, 1.0).unwrap();
        let xs: Vec<f64> = (0..1000)
            .map(|i| n.inverse_cdf((i as f64 + 0.5) / 1000.0))
            .collect();
        let d = ks_one_sample(&xs, |x| n.cdf(x));
        assert!((d - 0.0005).abs() < 1e-9, "{d}");
    }

    #[test]
    fn shifted_samples_detected() {
        let n = Normal::new(0.0, 1.0).unwrap();
        let xs: Vec<f64> = (0..1000)
            .map(|i| n.inverse_cdf((i as f64 + 0.5) / 1000.0) + 1.0)
            .collect();
        assert!(ks_one_sample(&xs, |x| n.cdf(x)) > 0.3);
    }

    #[test]
    fn two_sample_extremes() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        assert_eq!(ks_two_sample(&a, &[4.0, 5.0]), 1.0);
        assert!((ks_two_sample(&[1.0, 3.0], &[2.0, 4.0]) - 0.5).abs() < 1e-15);
    }
}
