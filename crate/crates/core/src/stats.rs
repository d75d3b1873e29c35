//! Ensemble summaries and the paired Student's t-test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean and sample standard deviation (`n - 1` denominator). The standard
/// deviation is `None` for a single observation.
pub fn mean_std(xs: &[f64]) -> Result<(f64, Option<f64>)> {
    if xs.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return Ok((mean, None));
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    Ok((mean, Some((ss / (n - 1.0)).sqrt())))
}

/// Natural log of the gamma function, Lanczos approximation (g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    #[allow(clippy::excessive_precision)]
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let series = COEF[1..]
        .iter()
        .enumerate()
        .fold(COEF[0], |acc, (i, c)| acc + c / (x + i as f64 + 1.0));
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`. `y` must equal `1 - x`; passing
/// it separately keeps precision when `x` is close to one.
pub fn beta_reg(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * y.ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, y) / b
    }
}

/// Student-t cumulative distribution function.
pub fn t_cdf(t: f64, df: f64) -> Result<f64> {
    if !(df >= 1.0) {
        return Err(Error::invalid(format!("degrees of freedom {df} must be >= 1")));
    }
    if t.is_nan() {
        return Err(Error::invalid("t statistic is NaN"));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 1.0 } else { 0.0 });
    }
    let t2 = t * t;
    let x = df / (df + t2);
    let y = t2 / (df + t2);
    // one tail: P(T > |t|)
    let tail = 0.5 * beta_reg(0.5 * df, 0.5, x, y);
    Ok(if t > 0.0 { 1.0 - tail } else { tail })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    TwoSided,
    /// mean(a − b) < 0
    Less,
    /// mean(a − b) > 0
    Greater,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub t_stat: f64,
    pub df: usize,
    /// Two-sided p-value.
    pub p_value: f64,
    pub p_less: f64,
    pub p_greater: f64,
    /// `p_value < 0.05`.
    pub significant: bool,
}

impl TestResult {
    pub fn p(&self, alt: Alternative) -> f64 {
        match alt {
            Alternative::TwoSided => self.p_value,
            Alternative::Less => self.p_less,
            Alternative::Greater => self.p_greater,
        }
    }
}

pub const SIGNIFICANCE: f64 = 0.05;

/// Paired t-test on `d = a − b`. Zero-variance differences are decided
/// directly: a nonzero mean gives `p = 0`, a zero mean gives `p = 1`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: a.len(),
        });
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len();
    let (mean, sd) = mean_std(&d)?;
    let sd = sd.expect("n >= 2");
    let df = n - 1;
    let result = |t_stat: f64, p_value: f64, p_less: f64, p_greater: f64| TestResult {
        t_stat,
        df,
        p_value,
        p_less,
        p_greater,
        significant: p_value < SIGNIFICANCE,
    };
    if sd == 0.0 {
        return Ok(if mean == 0.0 {
            result(0.0, 1.0, 1.0, 1.0)
        } else if mean < 0.0 {
            result(f64::NEG_INFINITY, 0.0, 0.0, 1.0)
        } else {
            result(f64::INFINITY, 0.0, 1.0, 0.0)
        });
    }
    let t = mean / (sd / (n as f64).sqrt());
    let lower = t_cdf(t, df as f64)?;
    let upper = t_cdf(-t, df as f64)?;
    let two_sided = (2.0 * lower.min(upper)).min(1.0);
    Ok(result(t, two_sided, lower, upper))
}
