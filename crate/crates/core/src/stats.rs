//! Small statistics helpers for the Monte Carlo checks.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std_dev: f64,
    /// Standard error of the mean.
    pub std_err: f64,
    pub max: f64,
}

pub fn summarize<I: IntoIterator<Item = f64>>(samples: I) -> Summary {
    let values: Vec<f64> = samples.into_iter().collect();
    let count = values.len();
    if count == 0 {
        return Summary {
            count,
            mean: 0.0,
            std_dev: 0.0,
            std_err: 0.0,
            max: 0.0,
        };
    }
    let mean = values.iter().sum::<f64>() / count as f64;
    let var = if count > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
    } else {
        0.0
    };
    let std_dev = var.sqrt();
    Summary {
        count,
        mean,
        std_dev,
        std_err: std_dev / (count as f64).sqrt(),
        max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Standard error of a frequency estimate of `p` from `n` Bernoulli trials.
pub fn binomial_std_err(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Two-sample chi-square homogeneity test on paired category counts.
/// Categories empty in both samples are dropped.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquareTest {
    assert_eq!(a.len(), b.len(), "category counts must be paired");
    let na: f64 = a.iter().sum::<u64>() as f64;
    let nb: f64 = b.iter().sum::<u64>() as f64;
    let ka = (nb / na).sqrt();
    let kb = (na / nb).sqrt();
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        if x + y == 0 {
            continue;
        }
        cells += 1;
        let diff = ka * x as f64 - kb * y as f64;
        statistic += diff * diff / (x + y) as f64;
    }
    let dof = cells.saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
        1.0 - dist.cdf(statistic)
    };
    ChiSquareTest {
        statistic,
        dof,
        p_value,
    }
}
