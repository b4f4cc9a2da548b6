use std::fmt;

use serde::{Deserialize, Serialize};

/// Relative slack applied before flooring, so that ratios such as `exp(-ln 2)`
/// that land one ulp below a decimal boundary truncate to the boundary.
const FLOOR_GUARD: f64 = 1e-11;

/// A non-negative decimal truncated to `scale_digits` digits after the point:
/// the represented value is `scaled_value / 10^scale_digits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FixedPointLabel {
    pub scaled_value: u64,
    pub scale_digits: u32,
}

impl FixedPointLabel {
    /// The label `1` at `t` digits.
    pub fn one(t: u32) -> Self {
        FixedPointLabel {
            scaled_value: 10u64.pow(t),
            scale_digits: t,
        }
    }

    pub fn value(&self) -> f64 {
        self.scaled_value as f64 / 10f64.powi(self.scale_digits as i32)
    }
}

impl fmt::Display for FixedPointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scale = 10u64.pow(self.scale_digits);
        let int = self.scaled_value / scale;
        if self.scale_digits == 0 {
            return write!(f, "{int}");
        }
        let frac = self.scaled_value % scale;
        write!(f, "{int}.{frac:0width$}", width = self.scale_digits as usize)
    }
}

/// Truncates `value` toward zero at `t` decimal digits.
///
/// Panics if `value` is negative or not finite.
pub fn truncate_label(value: f64, t: u32) -> FixedPointLabel {
    assert!(value >= 0.0 && value.is_finite(), "label value must be finite and non-negative");
    let scaled = value * 10f64.powi(t as i32);
    FixedPointLabel {
        scaled_value: (scaled * (1.0 + FLOOR_GUARD)).floor() as u64,
        scale_digits: t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_examples() {
        assert_eq!(truncate_label(std::f64::consts::PI, 2).to_string(), "3.14");
        assert_eq!(truncate_label(2.0, 3).to_string(), "2.000");
        assert_eq!(truncate_label(1.0 / 3.0, 2).to_string(), "0.33");
        assert_eq!(truncate_label(0.999, 2).to_string(), "0.99");
        assert_eq!(truncate_label(7.5, 0).to_string(), "7");
    }

    #[test]
    fn truncation_is_floor_not_round() {
        assert_eq!(truncate_label(0.679, 2).scaled_value, 67);
        assert_eq!(truncate_label(2.0f64.sqrt(), 4).scaled_value, 14142);
    }

    #[test]
    fn exp_of_log_two_lands_on_the_boundary() {
        let ln2 = std::f64::consts::LN_2;
        for k in 1..8 {
            let down = (-(k as f64) * ln2 - (-(0.0) * ln2)).exp();
            let up = ((k as f64) * ln2).exp();
            assert_eq!(truncate_label(up, 3).scaled_value, 1000 * (1 << k));
            assert_eq!(
                truncate_label(down, 6).scaled_value,
                1_000_000 / (1 << k),
                "2^-{k}"
            );
        }
    }

    #[test]
    fn one_is_exact() {
        assert_eq!(FixedPointLabel::one(3), truncate_label(1.0, 3));
        assert_eq!(FixedPointLabel::one(0).value(), 1.0);
    }
}
