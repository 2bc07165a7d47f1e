//! Log-likelihood ratio frames and the scalar helpers shared by all
//! soft-in soft-out blocks.
//!
//! LLRs are natural-log odds of the symbol `+1` against `-1`, which under the
//! fixed bit mapping is the odds of bit `0` against bit `1`.

/// Magnitude at which every LLR produced by this crate is clamped.
pub const L_MAX: f64 = 50.0;

/// What an [`LlrFrame`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlrRole {
    APriori,
    Extrinsic,
    Posterior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlrFrame {
    pub values: Vec<f64>,
    pub role: LlrRole,
}

impl LlrFrame {
    /// Builds a frame, clamping every value to `±L_MAX`. NaN maps to zero.
    pub fn new(values: Vec<f64>, role: LlrRole) -> Self {
        let values = values.into_iter().map(clamp).collect();
        Self { values, role }
    }

    pub fn zeros(len: usize, role: LlrRole) -> Self {
        Self {
            values: vec![0.0; len],
            role,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_role(mut self, role: LlrRole) -> Self {
        self.role = role;
        self
    }

    /// Hard decisions with the `L >= 0 -> +1` tie rule.
    pub fn hard_symbols(&self) -> Vec<f64> {
        self.values.iter().map(|&l| hard_symbol(l)).collect()
    }
}

#[inline]
pub fn clamp(l: f64) -> f64 {
    if l.is_nan() {
        0.0
    } else {
        l.clamp(-L_MAX, L_MAX)
    }
}

#[inline]
pub fn hard_symbol(l: f64) -> f64 {
    if l >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// `E(x) = tanh(L/2)`; saturates cleanly for large `|L|`.
#[inline]
pub fn soft_mean(l: f64) -> f64 {
    (0.5 * l).tanh()
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(e^x / (1 + e^x))`.
#[inline]
pub fn ln_sigmoid(x: f64) -> f64 {
    -softplus(-x)
}

/// `ln(e^a + e^b)` with the exact correction term.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, log_add)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_and_nan() {
        assert_eq!(clamp(1e9), L_MAX);
        assert_eq!(clamp(-1e9), -L_MAX);
        assert_eq!(clamp(f64::NAN), 0.0);
        let f = LlrFrame::new(vec![f64::INFINITY, -3.0], LlrRole::Extrinsic);
        assert_eq!(f.values, vec![L_MAX, -3.0]);
    }

    #[test]
    fn tie_rule() {
        assert_eq!(hard_symbol(0.0), 1.0);
        assert_eq!(hard_symbol(-0.0), 1.0);
        assert_eq!(hard_symbol(-1e-300), -1.0);
    }

    #[test]
    fn log_domain_helpers() {
        for &x in &[-800.0, -30.0, -1.0, 0.0, 2.5, 40.0, 800.0] {
            let direct = (1.0 + f64::exp(x)).ln();
            if direct.is_finite() {
                assert!((softplus(x) - direct).abs() < 1e-12, "{x}");
            }
            assert!(softplus(x).is_finite());
        }
        assert!((log_add(1.0, 2.0) - (1f64.exp() + 2f64.exp()).ln()).abs() < 1e-14);
        assert_eq!(log_add(f64::NEG_INFINITY, 3.0), 3.0);
        assert!((ln_sigmoid(0.0) - 0.5f64.ln()).abs() < 1e-15);
        let lse = log_sum_exp([0.0, 0.0, 0.0, 0.0]);
        assert!((lse - 4f64.ln()).abs() < 1e-14);
    }
}
