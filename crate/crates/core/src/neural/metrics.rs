//! Test-set metrics.

use crate::{Error, Result};

fn check(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::invalid("empty evaluation set"));
    }
    Ok(())
}

/// Fraction of correct decisions with the threshold p ≥ 0.5 → feasible.
pub fn correct_rate(prob: &[f64], labels: &[f64]) -> Result<f64> {
    check(prob, labels)?;
    let hits = prob
        .iter()
        .zip(labels)
        .filter(|(p, y)| (**p >= 0.5) == (**y >= 0.5))
        .count();
    Ok(hits as f64 / prob.len() as f64)
}

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    Ok(pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / pred.len() as f64)
}

/// Mean of `|pred − truth| / truth`.
pub fn are(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    if truth.contains(&0.0) {
        return Err(Error::invalid("relative error against a zero target"));
    }
    Ok(pred
        .iter()
        .zip(truth)
        .map(|(p, t)| ((p - t) / t).abs())
        .sum::<f64>()
        / pred.len() as f64)
}

pub fn mean_signed_error(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    Ok(pred.iter().zip(truth).map(|(p, t)| p - t).sum::<f64>() / pred.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        assert_eq!(
            correct_rate(&[0.5, 0.49, 0.9, 0.1], &[1.0, 0.0, 0.0, 0.0]).unwrap(),
            0.75
        );
        assert_eq!(mae(&[1.0, 2.0, 4.0], &[2.0, 2.0, 1.0]).unwrap(), 4.0 / 3.0);
        assert!((are(&[1100.0, 900.0], &[1000.0, 1000.0]).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(mean_signed_error(&[3.0, 1.0], &[2.0, 2.0]).unwrap(), 0.0);
        assert!(are(&[1.0], &[0.0]).is_err());
        assert!(mae(&[], &[]).is_err());
    }
}
