//! Closed-form lower-bound functions and the analytic checks behind them.
//!
//! `normal_tail_bound` is G(c) = ½(1 − ½·Φ̄(c^{−1/2})/Φ̄(√2)) and
//! `quadratic_bound` is F(c) = ½(1 − 3c²). Both decrease in c, and
//! G(¼) ≈ 0.42768 is the headline lower bound for P(|S| ≤ 1).

use serde::Serialize;
use serde_json::json;

use crate::error::{domain, ensure_finite, Result};
use crate::numerics::{cdf, pdf, upper_tail};
use crate::report::VerificationReport;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Tolerance for the concavity checks.
pub const CONCAVITY_TOL: f64 = 1e-9;

/// Default step for the grid-based inequality checks.
pub const DEFAULT_GRID_STEP: f64 = 1e-3;

/// Φ̄(√2).
pub fn tail_at_sqrt2() -> f64 {
    upper_tail(SQRT_2)
}

/// The Rademacher tail constant c* = 1/(4Φ̄(√2)) ≈ 3.1787.
pub fn bd_constant() -> f64 {
    1.0 / (4.0 * tail_at_sqrt2())
}

/// G(c). Defined for c > 0; the c → 0 limit ½ is left to callers.
pub fn normal_tail_bound(c: f64) -> Result<f64> {
    ensure_finite("c", c)?;
    if c <= 0.0 {
        return Err(domain(format!("G(c) needs c > 0, got {c}")));
    }
    Ok(g_unchecked(c))
}

#[inline]
fn g_unchecked(c: f64) -> f64 {
    0.5 * (1.0 - 0.5 * upper_tail(1.0 / c.sqrt()) / tail_at_sqrt2())
}

/// F(c) = ½(1 − 3c²).
pub fn quadratic_bound(c: f64) -> Result<f64> {
    ensure_finite("c", c)?;
    if c < 0.0 {
        return Err(domain(format!("F(c) needs c >= 0, got {c}")));
    }
    Ok(0.5 * (1.0 - 3.0 * c * c))
}

/// U_K(i) = ((K+1)² − i)/(2K+1)², the variance budget left after stopping at i.
pub fn variance_budget(k: u32, i: f64) -> Result<f64> {
    if k < 1 {
        return Err(domain("U_K needs K >= 1"));
    }
    ensure_finite("i", i)?;
    let k = f64::from(k);
    Ok(((k + 1.0) * (k + 1.0) - i) / ((2.0 * k + 1.0) * (2.0 * k + 1.0)))
}

fn stop_weight(k: u32) -> f64 {
    // 2^{1-k}
    (2.0_f64).powi(1 - k as i32)
}

/// h(k) = 2^{1−k}·G(U_k(k)) + (1 − 2^{1−k})·G(U_k(k+2)), for k ≥ 2.
pub fn mixture_bound(k: u32) -> Result<f64> {
    if k < 2 {
        return Err(domain(format!("h(k) needs k >= 2, got {k}")));
    }
    let p = stop_weight(k);
    let early = normal_tail_bound(variance_budget(k, f64::from(k))?)?;
    let late = normal_tail_bound(variance_budget(k, f64::from(k) + 2.0)?)?;
    Ok(p * early + (1.0 - p) * late)
}

/// 2^{1−k}·G(U_k(k)) + (1 − 2^{1−k})·½, the variant used when K = n − 3.
pub fn half_mixture_bound(k: u32) -> Result<f64> {
    if k < 2 {
        return Err(domain(format!("half mixture needs k >= 2, got {k}")));
    }
    let p = stop_weight(k);
    let early = normal_tail_bound(variance_budget(k, f64::from(k))?)?;
    Ok(p * early + (1.0 - p) * 0.5)
}

/// H(y) = y⁴·Φ̄(y).
pub fn quartic_tail(y: f64) -> Result<f64> {
    positive("y", y)?;
    Ok(y.powi(4) * upper_tail(y))
}

/// L(y) = y³·φ(y). Dominates H via the Mills-ratio step yΦ̄(y) ≤ φ(y).
pub fn cubic_density(y: f64) -> Result<f64> {
    positive("y", y)?;
    Ok(y.powi(3) * pdf(y))
}

fn positive(name: &str, x: f64) -> Result<()> {
    ensure_finite(name, x)?;
    if x <= 0.0 {
        return Err(domain(format!("{name} must be > 0, got {x}")));
    }
    Ok(())
}

/// Z_ξ(ε) = 2/√(1 + ξε).
pub fn inverse_sqrt_map(xi: f64, eps: f64) -> Result<f64> {
    ensure_finite("xi", xi)?;
    ensure_finite("eps", eps)?;
    let base = 1.0 + xi * eps;
    if base <= 0.0 {
        return Err(domain(format!("Z needs 1 + xi*eps > 0, got {base}")));
    }
    Ok(2.0 / base.sqrt())
}

/// Closed-form (Φ∘Z_ξ)''(ε) = −½·φ(Z_ξ(ε))·(1+ξε)^{−7/2}·ξ²·(1 − 3ξε).
pub fn composed_second_derivative(xi: f64, eps: f64) -> Result<f64> {
    let z = inverse_sqrt_map(xi, eps)?;
    let base = 1.0 + xi * eps;
    Ok(-0.5 * pdf(z) * base.powf(-3.5) * xi * xi * (1.0 - 3.0 * xi * eps))
}

/// min(1, c*·Φ̄(y)): the Rademacher tail majorant at and beyond √2.
pub fn bd_tail_bound(y: f64) -> Result<f64> {
    ensure_finite("y", y)?;
    Ok((bd_constant() * upper_tail(y)).min(1.0))
}

/// The threshold 3/(2c*) = 6Φ̄(√2) ≈ 0.4719 that H must stay under for G > F.
pub fn dominance_threshold() -> f64 {
    1.5 / bd_constant()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundTable {
    pub c_star: f64,
    pub phi_bar_sqrt2: f64,
    pub g_quarter: f64,
    pub f_quarter: f64,
}

impl BoundTable {
    pub fn compute() -> Self {
        let phi_bar_sqrt2 = tail_at_sqrt2();
        Self {
            c_star: 1.0 / (4.0 * phi_bar_sqrt2),
            phi_bar_sqrt2,
            g_quarter: g_unchecked(0.25),
            f_quarter: 13.0 / 32.0,
        }
    }
}

/// G(¼), the target lower bound.
pub fn g_quarter() -> f64 {
    g_unchecked(0.25)
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceCheck {
    pub threshold: f64,
    pub max_quartic_tail: f64,
    pub argmax_quartic_tail: f64,
    pub max_cubic_density: f64,
    pub argmax_cubic_density: f64,
    /// Smallest G(c) − F(c) over the image grid c = 1/y².
    pub min_gap: f64,
    pub argmin_gap: f64,
    pub violations: usize,
    pub report: VerificationReport,
}

/// Grid check of G(c) > F(c) through H(y) < 3/(2c*) on y ∈ (0, grid_max].
///
/// Also records L on the same grid and checks G > F directly at every
/// c = 1/y².
pub fn check_g_dominates_f(grid_max: f64, grid_step: f64) -> Result<DominanceCheck> {
    positive("grid_max", grid_max)?;
    positive("grid_step", grid_step)?;
    let threshold = dominance_threshold();
    let steps = (grid_max / grid_step + 1e-9).floor() as u64;

    let mut max_h = (f64::MIN, 0.0);
    let mut max_l = (f64::MIN, 0.0);
    let mut min_gap = (f64::MAX, 0.0);
    let mut violations = 0;
    for k in 1..=steps {
        let y = k as f64 * grid_step;
        let h = y.powi(4) * upper_tail(y);
        let l = y.powi(3) * pdf(y);
        if h > max_h.0 {
            max_h = (h, y);
        }
        if l > max_l.0 {
            max_l = (l, y);
        }
        if h >= threshold || h > l {
            violations += 1;
        }
        let c = 1.0 / (y * y);
        let gap = g_unchecked(c) - 0.5 * (1.0 - 3.0 * c * c);
        if gap <= 0.0 {
            violations += 1;
        }
        if gap < min_gap.0 {
            min_gap = (gap, c);
        }
    }

    let margin = threshold - max_h.0;
    let pass = violations == 0 && margin > 0.0;
    let report = VerificationReport::new("G_dominates_F", pass, margin)
        .with_worst_point(json!({
            "y": max_h.1,
            "H": max_h.0,
            "threshold": threshold,
            "max_L": max_l.0,
            "argmax_L": max_l.1,
            "min_G_minus_F": min_gap.0,
            "argmin_c": min_gap.1,
        }))
        .with_grid_spec(json!({"y_min": grid_step, "y_max": grid_max, "step": grid_step}));
    Ok(DominanceCheck {
        threshold,
        max_quartic_tail: max_h.0,
        argmax_quartic_tail: max_h.1,
        max_cubic_density: max_l.0,
        argmax_cubic_density: max_l.1,
        min_gap: min_gap.0,
        argmin_gap: min_gap.1,
        violations,
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcavityReport {
    pub xi: f64,
    pub interval: [f64; 2],
    pub grid_size: usize,
    /// Largest centered second difference of ε ↦ Φ(Z_ξ(ε)), divided by h².
    pub max_second_difference: f64,
    pub max_closed_form_second_derivative: f64,
    pub pass: bool,
}

impl ConcavityReport {
    pub fn to_report(&self, claim_id: &str) -> VerificationReport {
        let worst = self
            .max_second_difference
            .max(self.max_closed_form_second_derivative);
        VerificationReport::new(claim_id, self.pass, CONCAVITY_TOL - worst)
            .with_worst_point(json!({
                "max_second_difference": self.max_second_difference,
                "max_closed_form": self.max_closed_form_second_derivative,
            }))
            .with_grid_spec(json!({
                "xi": self.xi,
                "lo": self.interval[0],
                "hi": self.interval[1],
                "grid_size": self.grid_size,
            }))
    }
}

/// Concavity of ε ↦ Φ(Z_ξ(ε)) on [lo, hi], checked two ways on the same grid.
pub fn check_concavity(xi: f64, lo: f64, hi: f64, grid_size: usize) -> Result<ConcavityReport> {
    if grid_size < 3 {
        return Err(domain("concavity grid needs at least 3 points"));
    }
    if lo >= hi || lo.is_nan() || hi.is_nan() {
        return Err(domain(format!("empty interval [{lo}, {hi}]")));
    }
    // Z must be defined on the whole interval.
    inverse_sqrt_map(xi, lo)?;
    inverse_sqrt_map(xi, hi)?;

    let h = (hi - lo) / (grid_size - 1) as f64;
    let point = |k: usize| {
        if k + 1 == grid_size {
            hi
        } else {
            lo + k as f64 * h
        }
    };
    let values = (0..grid_size)
        .map(|k| inverse_sqrt_map(xi, point(k)).map(cdf))
        .collect::<Result<Vec<_>>>()?;

    let max_second_difference = values
        .windows(3)
        .map(|w| (w[0] - 2.0 * w[1] + w[2]) / (h * h))
        .fold(f64::MIN, f64::max);
    let max_closed_form_second_derivative = (0..grid_size)
        .map(|k| composed_second_derivative(xi, point(k)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::MIN, f64::max);

    Ok(ConcavityReport {
        xi,
        interval: [lo, hi],
        grid_size,
        max_second_difference,
        max_closed_form_second_derivative,
        pass: max_second_difference <= CONCAVITY_TOL
            && max_closed_form_second_derivative <= CONCAVITY_TOL,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EndpointCheck {
    /// ½Φ(√3) + ½Φ(3).
    pub mixed: f64,
    pub cdf_at_2: f64,
    pub report: VerificationReport,
}

/// The endpoint chain ½Φ(√3) + ½Φ(3) ≥ 0.9785 > 0.9773 > Φ(2).
pub fn check_endpoint_value() -> EndpointCheck {
    let mixed = 0.5 * cdf(3.0_f64.sqrt()) + 0.5 * cdf(3.0);
    let cdf_at_2 = cdf(2.0);
    let pass = mixed > 0.9785 && 0.9785 > 0.9773 && 0.9773 > cdf_at_2;
    let report = VerificationReport::new("endpoint_chain", pass, mixed - cdf_at_2)
        .with_worst_point(json!({"half_cdf_sqrt3_plus_half_cdf_3": mixed, "cdf_2": cdf_at_2}))
        .with_grid_spec(json!("chain: mixed > 0.9785 > 0.9773 > cdf(2)"));
    EndpointCheck {
        mixed,
        cdf_at_2,
        report,
    }
}
