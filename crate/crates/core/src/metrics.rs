//! Prediction quality metrics.

use num_traits::Float;

/// `2·TP / (2·TP + FP + FN)`; zero when the denominator is zero.
pub fn f1_score<F: Float>(tp: u64, fp: u64, fn_: u64) -> F {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        return F::zero();
    }
    F::from(2 * tp).unwrap() / F::from(denom).unwrap()
}

pub fn precision<F: Float>(tp: u64, fp: u64) -> F {
    if tp + fp == 0 {
        return F::zero();
    }
    F::from(tp).unwrap() / F::from(tp + fp).unwrap()
}

pub fn recall<F: Float>(tp: u64, fn_: u64) -> F {
    if tp + fn_ == 0 {
        return F::zero();
    }
    F::from(tp).unwrap() / F::from(tp + fn_).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_perfect() {
        assert_eq!(f1_score::<f64>(10, 0, 0), 1.0);
    }

    #[test]
    fn f1_all_zero() {
        assert_eq!(f1_score::<f64>(0, 0, 0), 0.0);
    }

    #[test]
    fn f1_formula() {
        // TP=2, FP=1, FN=1 -> 4/6
        assert!((f1_score::<f64>(2, 1, 1) - 2.0 / 3.0).abs() < 1e-12);
        assert!((f1_score::<f32>(2, 1, 1) - 2.0f32 / 3.0).abs() < 1e-6);
    }
}
