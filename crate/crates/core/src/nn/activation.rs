use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
}

impl Activation {
    /// Returns `(value, derivative)` at `x`.
    pub fn apply(self, x: f64) -> (f64, f64) {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    (x, 1.0)
                } else if x.is_nan() {
                    (x, x)
                } else {
                    // derivative at exactly 0 is taken as 0
                    (0.0, 0.0)
                }
            }
            Activation::Sigmoid => {
                let s = sigmoid(x);
                (s, s * (1.0 - s))
            }
        }
    }

    pub fn value(self, x: f64) -> f64 {
        match self {
            Activation::Relu => relu(x),
            Activation::Sigmoid => sigmoid(x),
        }
    }
}

/// `max(0, x)`; NaN passes through so divergence stays visible.
pub fn relu(x: f64) -> f64 {
    if x > 0.0 || x.is_nan() {
        x
    } else {
        0.0
    }
}

/// Logistic function `1 / (1 + e^{-x})`.
///
/// Evaluated on the branch that never exponentiates a positive number, so
/// it cannot overflow. Results saturate to exactly 0.0 or 1.0 only for
/// |x| beyond ~37 (upper side) and ~745 (lower side).
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
