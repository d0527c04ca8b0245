use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_pair(a: &[f64], b: &[f64], min_len: usize) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < min_len {
        return Err(Error::InvalidArgument(format!(
            "need at least {min_len} values, got {}",
            a.len()
        )));
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(pred: &[f64], gold: &[f64]) -> Result<f64> {
    check_pair(pred, gold, 1)?;
    Ok(pred.iter().zip(gold).map(|(p, g)| (p - g).abs()).sum::<f64>() / pred.len() as f64)
}

/// A correlation coefficient, or `Undefined` when either input is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correlation {
    Value(f64),
    Undefined,
}

impl Correlation {
    pub fn value(self) -> Option<f64> {
        match self {
            Correlation::Value(r) => Some(r),
            Correlation::Undefined => None,
        }
    }
}

impl std::fmt::Display for Correlation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Correlation::Value(r) => write!(f, "{r:.3}"),
            Correlation::Undefined => f.write_str("undefined"),
        }
    }
}

/// Sample Pearson correlation, computed from mean-centered sums.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    check_pair(x, y, 2)?;
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return Ok(Correlation::Undefined);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Ok(Correlation::Undefined);
    }
    Ok(Correlation::Value((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), 1.5);
        assert_eq!(mae(&[0.3, -1.2], &[0.3, -1.2]).unwrap(), 0.0);
        assert_eq!(mae(&[-3.0], &[3.0]).unwrap(), 6.0);
        assert!(mae(&[], &[]).is_err());
        assert!(mae(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn pearson_examples() {
        let x = [0.5, -1.0, 2.0, 2.5];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &x).unwrap().value().unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &neg).unwrap().value().unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap(), Correlation::Undefined);
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn pearson_small_case_matches_direct_formula() {
        // x=[1,2,3], y=[1,2,4]: cov = 1.5, sx = 1, sy = sqrt(7/3)
        let expected = 1.5 / (7.0f64 / 3.0).sqrt();
        let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap().value().unwrap();
        assert!((r - expected).abs() < 1e-12, "{r} vs {expected}");
    }
}
