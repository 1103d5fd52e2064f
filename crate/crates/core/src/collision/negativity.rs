//! Pointwise checks of the uniform negativity inequalities.
//!
//! Each inequality compares `e^{E}·k_c` with a constant times `k_{c/2}` and is
//! evaluated on exponents, so the common `1/|ζ|` factor never appears and
//! `ζ = 0` needs no special case beyond the energy quotient.

use super::{kernel_exponent, KernelParams};
use crate::Vec3;

/// Pass flags; `None` when the hypothesis of that inequality fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct NegativityFlags {
    /// `e^{−ϖ⟨v⟩²s + ϖ⟨v+ζ⟩²s} k_c(v, v+ζ) ≤ k_{c/2}(v, v+ζ)` for `|ϖs| < c`.
    pub ws_nega: Option<bool>,
    /// `e^{−ϖ⟨v̄⟩²s + ϖ⟨v̄+ζ⟩²s} k_c(v, v+ζ) ≤ e^{2ϖs} k_{c/2}(v, v+ζ)`.
    pub ws_nega_bar: Option<bool>,
    /// Both weighted forms for `𝐤_c`, with the same constant `e^{2ϖs}`.
    pub bf_nega: Option<bool>,
}

fn log_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Slack for rounding in the exponent comparisons.
fn slack(terms: &[f64]) -> f64 {
    1e-12 * (1.0 + terms.iter().map(|t| t.abs()).fold(0.0, f64::max))
}

pub fn negativity_check(params: &KernelParams, s: f64, v: &Vec3, v_bar: &Vec3, zeta: &Vec3) -> NegativityFlags {
    let c = params.c;
    let ws = params.varpi * s;
    let lift = |w: &Vec3| ws * ((w + zeta).norm_squared() - w.norm_squared());
    let kc_v = kernel_exponent(c, v, zeta);
    let kh_v = kernel_exponent(0.5 * c, v, zeta);
    let kc_b = kernel_exponent(c, v_bar, zeta);
    let kh_b = kernel_exponent(0.5 * c, v_bar, zeta);

    let ws_nega = (ws.abs() < c).then(|| {
        let lhs = lift(v) + kc_v;
        lhs <= kh_v + slack(&[lhs, kh_v])
    });

    let barred = (v - v_bar).norm() <= 1.0 && ws < (20f64.sqrt() - 4.0) * c / 2.0;
    let ws_nega_bar = barred.then(|| {
        let lhs = lift(v_bar) + kc_v;
        let rhs = kh_v + 2.0 * ws.max(0.0);
        lhs <= rhs + slack(&[lhs, rhs])
    });
    let bf_nega = barred.then(|| {
        let sum_c = log_add(kc_v, kc_b);
        let rhs = log_add(kh_v, kh_b) + 2.0 * ws.max(0.0);
        [lift(v), lift(v_bar)].iter().all(|e| {
            let lhs = e + sum_c;
            lhs <= rhs + slack(&[lhs, rhs])
        })
    });
    NegativityFlags { ws_nega, ws_nega_bar, bf_nega }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_reduces_to_monotonicity_in_c() {
        let p = KernelParams::default();
        let f = negativity_check(&p, 0.0, &Vec3::new(1.0, 2.0, 0.0), &Vec3::new(1.2, 2.0, 0.3), &Vec3::new(0.4, -0.1, 0.2));
        assert_eq!(f, NegativityFlags { ws_nega: Some(true), ws_nega_bar: Some(true), bf_nega: Some(true) });
    }

    #[test]
    fn zero_zeta_is_finite() {
        let p = KernelParams::default();
        let f = negativity_check(&p, 0.5, &Vec3::x(), &Vec3::y(), &Vec3::zeros());
        assert_eq!(f.ws_nega, Some(true));
    }

    #[test]
    fn hypotheses_gate_the_flags() {
        let p = KernelParams { c: 0.5, varpi: 1.0, ..KernelParams::default() };
        let f = negativity_check(&p, 1.0, &Vec3::x(), &(Vec3::x() * 3.0), &Vec3::y());
        assert_eq!(f, NegativityFlags { ws_nega: None, ws_nega_bar: None, bf_nega: None });
    }
}
