use statrs::distribution::{ContinuousCDF, StudentsT};

/// Sample mean.
pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Sample standard deviation with Bessel's correction.
pub fn std_dev(samples: &[f64]) -> f64 {
    let m = mean(samples);
    let ss: f64 = samples.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (samples.len() - 1) as f64).sqrt()
}

/// Two-sided 97.5% quantile of Student's t with `df` degrees of freedom.
pub fn t_critical(df: usize) -> f64 {
    StudentsT::new(0.0, 1.0, df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975)
}

/// Mean and 95% Student-t half-width; the half-width is 0 for a single
/// sample. Panics on an empty slice.
pub fn confidence_interval(samples: &[f64]) -> (f64, f64) {
    assert!(!samples.is_empty(), "confidence interval of no samples");
    let n = samples.len();
    let m = mean(samples);
    if n == 1 {
        return (m, 0.0);
    }
    let half = t_critical(n - 1) * std_dev(samples) / (n as f64).sqrt();
    (m, half)
}
