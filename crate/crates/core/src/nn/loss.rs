use crate::error::{Error, Result};

/// Probability clamp applied before taking logarithms.
pub const BCE_EPSILON: f64 = 1e-7;

/// Binary cross-entropy for one sample.
///
/// Returns `(loss, d loss / d p)`. The probability given to the true
/// label is clamped to `[BCE_EPSILON, 1 - BCE_EPSILON]`; outside that band
/// the derivative is that of the clamped expression, i.e. zero.
pub fn bce(label: f64, p: f64) -> Result<(f64, f64)> {
    if label != 0.0 && label != 1.0 {
        return Err(Error::Domain(format!("label must be 0 or 1, got {label}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability must lie in [0, 1], got {p}")));
    }
    // Clamp the probability assigned to the true label so that
    // bce(0, p) and bce(1, 1 - p) evaluate the same expression.
    let q = if label == 1.0 { p } else { 1.0 - p };
    let clamped = q.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
    let loss = -clamped.ln();
    let dq = if clamped == q { -1.0 / clamped } else { 0.0 };
    let grad = if label == 1.0 { dq } else { -dq };
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    #[test]
    fn half_probability_costs_ln2_for_either_label() {
        assert_eq!(bce(1.0, 0.5).unwrap().0, LN_2);
        assert_eq!(bce(0.0, 0.5).unwrap().0, LN_2);
    }

    #[test]
    fn loss_vanishes_as_prediction_approaches_label() {
        let mut last = f64::INFINITY;
        for p in [0.9, 0.99, 0.999, 0.9999, 1.0] {
            let (l, _) = bce(1.0, p).unwrap();
            assert!(l < last);
            last = l;
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn clamp_keeps_loss_finite() {
        let (l, g) = bce(1.0, 0.0).unwrap();
        assert!((l - (-BCE_EPSILON.ln())).abs() < 1e-12);
        assert_eq!(g, 0.0);
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(matches!(bce(1.0, 1.5), Err(Error::Domain(_))));
        assert!(matches!(bce(1.0, -0.1), Err(Error::Domain(_))));
        assert!(matches!(bce(1.0, f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(bce(0.5, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn gradient_matches_central_difference() {
        let h = 1e-6;
        for &y in &[0.0, 1.0] {
            for &p in &[0.1, 0.37, 0.5, 0.82] {
                let (_, g) = bce(y, p).unwrap();
                let n = (bce(y, p + h).unwrap().0 - bce(y, p - h).unwrap().0) / (2.0 * h);
                assert!((g - n).abs() / g.abs() < 1e-6, "y={y} p={p} {g} vs {n}");
            }
        }
    }

    proptest! {
        #[test]
        fn label_flip_symmetry(p in 0.0f64..=1.0) {
            let (a, _) = bce(0.0, p).unwrap();
            let (b, _) = bce(1.0, 1.0 - p).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn strictly_decreasing_for_positive_label(p in BCE_EPSILON..(1.0 - BCE_EPSILON - 1e-9)) {
            let q = p + 1e-9;
            prop_assert!(bce(1.0, q).unwrap().0 < bce(1.0, p).unwrap().0);
        }
    }
}
