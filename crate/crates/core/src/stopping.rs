//! Stopping-time machinery on concrete weight vectors.
//!
//! After the zigzag reordering vₙ ≥ v₁ ≥ vₙ₋₁ ≥ v₂ ≥ v₃ ≥ … ≥ vₙ₋₂ ≥ 0,
//! every sign path ε gets a stopping time
//!
//!   T = min({t ≤ n−1 : |X_t| > 1 − v_{t+1}} ∪ {n−1}),  X_t = Σ_{i≤t} εᵢvᵢ,
//!
//! and K is the same construction on the all-plus path (prefix sums M_t).
//! All 2ⁿ paths are enumerated, grouped by T, and checked against the
//! variance budget U_K and the conditional bounds built on it.
//!
//! Indices in this module are 1-based wherever they name a time t.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::bounds::{
    g_quarter, half_mixture_bound, mixture_bound, normal_tail_bound, variance_budget,
};
use crate::dist::{Caps, ExactWeights, WeightVector, BOUNDARY_TOL};
use crate::error::{domain, Error, Result};
use crate::report::VerificationReport;
use crate::surd::floor_mul_sqrt;

/// Slack allowed in float comparisons of the variance inequalities.
pub const INEQUALITY_TOL: f64 = 1e-12;

/// Weights in the zigzag order, all nonnegative, padded to n ≥ 4.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalOrdering {
    ordered: WeightVector,
    /// `permutation[j]` is the 0-based canonical slot of input weight j.
    permutation: Vec<usize>,
    padded_zeros: usize,
    /// Input indices whose sign was absorbed into εᵢ.
    flipped: Vec<usize>,
}

impl CanonicalOrdering {
    pub fn weights(&self) -> &[f64] {
        self.ordered.weights()
    }

    pub fn ordered(&self) -> &WeightVector {
        &self.ordered
    }

    pub fn n(&self) -> usize {
        self.ordered.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn padded_zeros(&self) -> usize {
        self.padded_zeros
    }

    pub fn flipped(&self) -> &[usize] {
        &self.flipped
    }

    /// vₙ ≥ v₁ ≥ vₙ₋₁ ≥ v₂ ≥ v₃ ≥ … ≥ vₙ₋₂ ≥ 0.
    pub fn is_zigzag(&self) -> bool {
        let n = self.n();
        let order = zigzag_slots(n);
        match self.ordered.exact() {
            Some(e) => {
                let a = e.numerators();
                order.windows(2).all(|p| a[p[0]] >= a[p[1]]) && a.iter().all(|&x| x >= 0)
            }
            None => {
                let v = self.weights();
                order.windows(2).all(|p| v[p[0]] >= v[p[1]]) && v.iter().all(|&x| x >= 0.0)
            }
        }
    }

    /// vₙ + v₁ + vₙ₋₁ + v₂ and v₁ + v₂.
    pub fn leading_sums(&self) -> (f64, f64) {
        let v = self.weights();
        let n = v.len();
        (v[n - 1] + v[0] + v[n - 2] + v[1], v[0] + v[1])
    }
}

// Canonical slots in descending-magnitude order: n, 1, n−1, 2, 3, …, n−2 (0-based).
fn zigzag_slots(n: usize) -> Vec<usize> {
    let mut slots = vec![n - 1, 0, n - 2, 1];
    slots.extend(2..n - 2);
    slots
}

/// Pads to n ≥ 4 and arranges |weights| in the zigzag order.
/// Ties keep input order.
pub fn canonical_reorder(w: &WeightVector) -> Result<CanonicalOrdering> {
    let input_n = w.len();
    let n = input_n.max(4);
    let padded_zeros = n - input_n;
    let flipped: Vec<usize> = (0..input_n).filter(|&j| w.weights()[j] < 0.0).collect();

    let mut by_size: Vec<usize> = (0..n).collect();
    match w.exact() {
        Some(e) => {
            let key = |j: usize| e.numerators().get(j).map_or(0, |a| a.abs());
            by_size.sort_by_key(|&j| std::cmp::Reverse(key(j)));
        }
        None => {
            let key = |j: usize| w.weights().get(j).map_or(0.0, |a| a.abs());
            by_size.sort_by(|&a, &b| key(b).total_cmp(&key(a)));
        }
    }

    let slots = zigzag_slots(n);
    let mut permutation = vec![0; input_n];
    let mut slot_source = vec![usize::MAX; n];
    for (rank, &source) in by_size.iter().enumerate() {
        slot_source[slots[rank]] = source;
        if source < input_n {
            permutation[source] = slots[rank];
        }
    }

    let ordered = match w.exact() {
        Some(e) => {
            let nums = slot_source
                .iter()
                .map(|&j| e.numerators().get(j).map_or(0, |a| a.abs()))
                .collect();
            WeightVector::from_exact(e.permuted(nums))
        }
        None => WeightVector::from_f64(
            slot_source
                .iter()
                .map(|&j| w.weights().get(j).map_or(0.0, |a| a.abs()))
                .collect(),
        )?,
    };
    Ok(CanonicalOrdering {
        ordered,
        permutation,
        padded_zeros,
        flipped,
    })
}

trait Scalar:
    Copy
    + Default
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
{
    fn abs(self) -> Self;
}

impl Scalar for i64 {
    fn abs(self) -> Self {
        i64::abs(self)
    }
}

impl Scalar for f64 {
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

/// Path arithmetic over either exact scaled integers or floats.
/// Values compared against 1 are compared against `unit` (⌊D/√r⌋ when
/// exact, so `v > unit` ⇔ the real value exceeds 1).
struct Walker<V> {
    w: Vec<V>,
    unit: V,
    // extra slack for the closed event |S| ≤ 1 (float only)
    slack: V,
    scale: f64,
}

impl<V: Scalar> Walker<V> {
    fn n(&self) -> usize {
        self.w.len()
    }

    fn term(&self, mask: u32, i: usize) -> V {
        if mask >> i & 1 == 1 {
            -self.w[i]
        } else {
            self.w[i]
        }
    }

    /// (T, X_T, S) for the sign path `mask` (bit i set ⇒ ε_{i+1} = −1).
    fn walk(&self, mask: u32) -> (usize, V, V) {
        let n = self.n();
        let mut x = V::default();
        let mut stop = n - 1;
        for t in 1..=n - 2 {
            x = x + self.term(mask, t - 1);
            if x.abs() + self.w[t] > self.unit {
                stop = t;
                break;
            }
        }
        if stop == n - 1 {
            x = x + self.term(mask, n - 2);
        }
        let mut s = x;
        for i in stop..n {
            s = s + self.term(mask, i);
        }
        (stop, x, s)
    }

    fn inside(&self, v: V) -> (bool, bool) {
        let a = v.abs();
        if a <= self.unit {
            (true, false)
        } else {
            (a <= self.unit + self.slack, true)
        }
    }
}

impl Walker<f64> {
    fn to_f64(&self, v: f64) -> f64 {
        v
    }
}

impl Walker<i64> {
    fn to_f64(&self, v: i64) -> f64 {
        v as f64 * self.scale
    }
}

enum Arith {
    Exact(Walker<i64>),
    Float(Walker<f64>),
}

impl Arith {
    fn of(c: &CanonicalOrdering) -> Self {
        match c.ordered.exact().and_then(exact_walker) {
            Some(w) => Self::Exact(w),
            None => Self::Float(Walker {
                w: c.weights().to_vec(),
                unit: 1.0,
                slack: BOUNDARY_TOL,
                scale: 1.0,
            }),
        }
    }
}

fn exact_walker(e: &ExactWeights) -> Option<Walker<i64>> {
    let r = e.radicand();
    // ⌊D/√r⌋ = ⌊(D/r)·√r⌋
    let c = BigRational::new(e.denominator().clone(), BigInt::from(r));
    let unit = floor_mul_sqrt(&c, &BigUint::from(r)).to_i64()?;
    let d = e.denominator().to_f64()?;
    Some(Walker {
        w: e.numerators().to_vec(),
        unit,
        slack: 0,
        scale: (r as f64).sqrt() / d,
    })
}

macro_rules! with_walker {
    ($arith:expr, $w:ident => $body:expr) => {
        match $arith {
            Arith::Exact($w) => $body,
            Arith::Float($w) => $body,
        }
    };
}

/// K = min({t ≤ n−1 : M_t > 1 − v_{t+1}} ∪ {n−1}); the all-plus path's T.
pub fn compute_k(c: &CanonicalOrdering) -> usize {
    with_walker!(&Arith::of(c), w => w.walk(0).0)
}

/// T and X_T for one sign path (`signs[i]` is ±1).
pub fn compute_t(c: &CanonicalOrdering, signs: &[i8]) -> Result<(usize, f64)> {
    let mask = signs_to_mask(c.n(), signs)?;
    Ok(with_walker!(&Arith::of(c), w => {
        let (t, x, _) = w.walk(mask);
        (t, w.to_f64(x))
    }))
}

fn signs_to_mask(n: usize, signs: &[i8]) -> Result<u32> {
    if signs.len() != n {
        return Err(domain(format!("expected {n} signs, got {}", signs.len())));
    }
    if n > 31 {
        return Err(domain("sign paths are limited to 31 weights"));
    }
    signs
        .iter()
        .enumerate()
        .try_fold(0u32, |m, (i, &s)| match s {
            1 => Ok(m),
            -1 => Ok(m | 1 << i),
            other => Err(domain(format!("sign must be ±1, got {other}"))),
        })
}

/// One sign path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathRecord {
    /// Bit i set ⇒ ε_{i+1} = −1.
    pub signs: u32,
    pub t: usize,
    pub x_t: f64,
    /// Σ_{i>T} vᵢ².
    pub tail_norm_sq: f64,
    /// |S| ≤ 1.
    pub inside: bool,
}

/// K, prefix sums and every path record of an instance.
#[derive(Debug, Clone)]
pub struct StoppingProfile {
    pub k: usize,
    /// M_t for t = 1..=n.
    pub prefix_sums: Vec<f64>,
    pub records: Vec<PathRecord>,
    canonical: CanonicalOrdering,
}

impl StoppingProfile {
    pub fn build(c: &CanonicalOrdering, caps: &Caps) -> Result<Self> {
        check_path_cap(c.n(), caps)?;
        let arith = Arith::of(c);
        let tails = tail_norms(c.weights());
        let records = with_walker!(&arith, w => (0..1u32 << c.n())
            .into_par_iter()
            .map(|mask| {
                let (t, x, s) = w.walk(mask);
                PathRecord {
                    signs: mask,
                    t,
                    x_t: w.to_f64(x),
                    tail_norm_sq: tails[t],
                    inside: w.inside(s).0,
                }
            })
            .collect::<Vec<_>>());
        let prefix_sums = c
            .weights()
            .iter()
            .scan(0.0, |m, v| {
                *m += v;
                Some(*m)
            })
            .collect();
        Ok(Self {
            k: compute_k(c),
            prefix_sums,
            records,
            canonical: c.clone(),
        })
    }

    /// Re-derives every path invariant from the signs alone.
    /// Returns the number of violations.
    pub fn invariant_violations(&self) -> usize {
        let v = self.canonical.weights();
        let n = v.len();
        let tol = INEQUALITY_TOL;
        let mut bad = 0;
        if !(2..=n - 1).contains(&self.k) {
            bad += 1;
        }
        for r in &self.records {
            let sign = |i: usize| if r.signs >> i & 1 == 1 { -1.0 } else { 1.0 };
            let x: Vec<f64> = (0..n)
                .scan(0.0, |acc, i| {
                    *acc += sign(i) * v[i];
                    Some(*acc)
                })
                .collect();
            let t = r.t;
            let ok = (2..=n - 1).contains(&t)
                && self.k <= t
                && (x[t - 1] - r.x_t).abs() <= tol
                && r.x_t.abs() <= 1.0 + tol
                && (1..t).all(|s| x[s - 1].abs() <= 1.0 - v[s] + tol)
                && (t > n - 2 || r.x_t.abs() > 1.0 - v[t] - tol);
            if !ok {
                bad += 1;
            }
        }
        bad
    }
}

fn check_path_cap(n: usize, caps: &Caps) -> Result<()> {
    if n > caps.path_n {
        return Err(Error::Capacity {
            n,
            cap: caps.path_n,
            engine: "path",
        });
    }
    Ok(())
}

// tails[t] = Σ_{i>t} vᵢ² for t = 0..=n
fn tail_norms(v: &[f64]) -> Vec<f64> {
    let mut tails = vec![0.0; v.len() + 1];
    for t in (0..v.len()).rev() {
        tails[t] = tails[t + 1] + v[t] * v[t];
    }
    tails
}

/// Per-T totals over all 2ⁿ paths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TStats {
    pub count: u64,
    /// Paths with |S| ≤ 1.
    pub inside: u64,
    /// Of those, how many needed the float boundary tolerance.
    pub boundary: u64,
}

fn per_t_stats(c: &CanonicalOrdering) -> Vec<TStats> {
    let n = c.n();
    let arith = Arith::of(c);
    with_walker!(&arith, w => (0..1u32 << n)
    .into_par_iter()
    .fold(
        || vec![TStats::default(); n],
        |mut acc, mask| {
            let (t, _, s) = w.walk(mask);
            let (inside, boundary) = w.inside(s);
            let e = &mut acc[t];
            e.count += 1;
            e.inside += u64::from(inside);
            e.boundary += u64::from(inside && boundary);
            acc
        },
    )
    .reduce(
        || vec![TStats::default(); n],
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.count += y.count;
                x.inside += y.inside;
                x.boundary += y.boundary;
            }
            a
        },
    ))
}

/// inside/count for the paths with T = i.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalProbability {
    pub numerator: u64,
    pub denominator: u64,
    pub value: f64,
    pub boundary_resolved: u64,
}

/// P(|S| ≤ 1 | T = i) by exhaustive enumeration.
pub fn conditional_prob_given_t(c: &CanonicalOrdering, i: usize) -> Result<ConditionalProbability> {
    check_path_cap(c.n(), &Caps::default())?;
    let stats = per_t_stats(c);
    conditional_from(&stats, i)
}

fn conditional_from(stats: &[TStats], i: usize) -> Result<ConditionalProbability> {
    match stats.get(i) {
        Some(s) if s.count > 0 => Ok(ConditionalProbability {
            numerator: s.inside,
            denominator: s.count,
            value: s.inside as f64 / s.count as f64,
            boundary_resolved: s.boundary,
        }),
        _ => Err(Error::UndefinedConditional(i)),
    }
}

/// Which variance-budget inequality governs a stopped path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundCase {
    /// K ≤ T ≤ (3K+2)/2, budget U_K(T).
    Case3,
    /// T ≥ (3K+2)/2, budget U_K((3K+2)/2).
    Case4,
    /// T ∈ {n−2, n−1}, conditional bound ½.
    Case12,
}

/// The lower bound on P(|S| ≤ 1 | T = i) given K and n.
pub fn conditional_bound(k: usize, n: usize, i: usize) -> Result<(BoundCase, f64)> {
    if i + 2 >= n {
        return Ok((BoundCase::Case12, 0.5));
    }
    let (case, u) = budget_for(k, i)?;
    Ok((case, normal_tail_bound(u)?))
}

// (3K+2)/2 closes as T ≤ ⌊(3K+2)/2⌋ for case 3 and T ≥ ⌈(3K+2)/2⌉ for case 4;
// at an integral threshold both give the same budget.
fn budget_for(k: usize, t: usize) -> Result<(BoundCase, f64)> {
    let k32 = u32::try_from(k).map_err(|_| domain("K too large"))?;
    let half = (3 * k + 2) as f64 / 2.0;
    if (t as f64) <= half {
        Ok((BoundCase::Case3, variance_budget(k32, t as f64)?))
    } else {
        Ok((BoundCase::Case4, variance_budget(k32, half)?))
    }
}

/// Proof-internal quantities for one stopped path (T ≤ n−3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseDiagnostics {
    pub t: usize,
    /// |X_T|.
    pub x_t: f64,
    pub lambda: f64,
    pub b1: f64,
    pub b2: f64,
    pub b_mix: f64,
    /// K₀ = X_T/(1 − X_T); `None` stands for +∞ (X_T = 1).
    pub k0: Option<f64>,
    pub bound_used: BoundCase,
    pub u_value: f64,
    /// U·(1+|X_T|)² − Σ_{i>T} vᵢ².
    pub slack: f64,
    /// Σ_{i≤T} vᵢ² − min(B₁, B₂).
    pub head_slack: f64,
}

fn diagnostics(k: usize, head: f64, rec: &PathRecord) -> Result<CaseDiagnostics> {
    let (kf, tf) = (k as f64, rec.t as f64);
    let x = rec.x_t.abs();
    let gap = (1.0 - x) * (1.0 - x);
    let lambda = (2.0 * tf - kf - 1.0) / (2.0 * kf + 1.0);
    let b1 = 1.0 / (kf + 1.0) + (tf - kf - 1.0) * gap;
    let b2 = tf * gap;
    let b_mix = lambda * b1 + (1.0 - lambda) * b2;
    let (bound_used, u_value) = budget_for(k, rec.t)?;
    let slack = u_value * (1.0 + x) * (1.0 + x) - rec.tail_norm_sq;
    Ok(CaseDiagnostics {
        t: rec.t,
        x_t: x,
        lambda,
        b1,
        b2,
        b_mix,
        k0: (x < 1.0).then(|| x / (1.0 - x)),
        bound_used,
        u_value,
        slack,
        head_slack: head - b1.min(b2),
    })
}

/// Outcome of the variance-budget sweep over all stopped paths.
#[derive(Debug, Clone, Serialize)]
pub struct VarianceCheck {
    pub k: usize,
    pub n: usize,
    pub checked_paths: u64,
    pub violations: u64,
    /// Paths where the mixing identity or the B₁/B₂ ordering rule failed.
    pub diagnostic_failures: u64,
    pub worst: Option<CaseDiagnostics>,
    /// A path sitting on X_T = K/(K+1), if any was met.
    pub tie_path: Option<CaseDiagnostics>,
    pub report: VerificationReport,
}

/// Checks Σ_{i>T} vᵢ² ≤ U·(1+|X_T|)² on every path with T ≤ n−3, plus the
/// internal chain Σ_{i≤T} vᵢ² ≥ min(B₁, B₂) and the λ-mixing identity.
pub fn verify_variance_bounds(c: &CanonicalOrdering) -> Result<VarianceCheck> {
    if !c.ordered.is_sub_unit(INEQUALITY_TOL) {
        return Err(domain("variance bounds need Σvᵢ² ≤ 1"));
    }
    let profile = StoppingProfile::build(c, &Caps::default())?;
    let n = c.n();
    let k = profile.k;
    let heads: Vec<f64> = {
        let total: f64 = c.weights().iter().map(|v| v * v).sum();
        let tails = tail_norms(c.weights());
        tails.iter().map(|t| total - t).collect()
    };
    let (kf, tol) = (k as f64, INEQUALITY_TOL);
    let tie = kf / (kf + 1.0);

    let mut checked = 0;
    let mut violations = 0;
    let mut diag_fail = 0;
    let mut worst: Option<CaseDiagnostics> = None;
    let mut tie_path = None;
    for rec in profile.records.iter().filter(|r| r.t + 3 <= n) {
        checked += 1;
        let d = diagnostics(k, heads[rec.t], rec)?;
        if d.slack < -tol || d.head_slack < -tol {
            violations += 1;
        }
        // at an integral (3K+2)/2 both budgets must coincide
        let half2 = 3 * k + 2;
        if half2 % 2 == 0 && rec.t == half2 / 2 {
            let (k32, tf) = (k as u32, rec.t as f64);
            if variance_budget(k32, tf)? != variance_budget(k32, half2 as f64 / 2.0)? {
                diag_fail += 1;
            }
        }
        let closed = (2.0 * rec.t as f64 - kf - 1.0) / ((kf + 1.0) * (2.0 * kf + 1.0))
            + ((kf + 1.0).powi(2) - rec.t as f64) / (2.0 * kf + 1.0) * (1.0 - d.x_t).powi(2);
        let mixing_ok = (d.b_mix - closed).abs() <= 1e-12;
        let between_ok = !(0.0..=1.0).contains(&d.lambda)
            || (d.b1.min(d.b2) - tol <= d.b_mix && d.b_mix <= d.b1.max(d.b2) + tol);
        let order_ok = (d.x_t - tie).abs() <= 1e-12 || ((d.b1 >= d.b2) == (d.x_t >= tie));
        if !(mixing_ok && between_ok && order_ok) {
            diag_fail += 1;
        }
        if (d.x_t - tie).abs() <= 1e-12 && tie_path.is_none() {
            tie_path = Some(d);
        }
        if worst.is_none_or(|w| d.slack < w.slack) {
            worst = Some(d);
        }
    }
    let margin = worst.map_or(0.0, |w| w.slack);
    let pass = violations == 0 && diag_fail == 0;
    let report = VerificationReport::new("variance_bounds", pass, margin)
        .with_worst_point(json!(worst))
        .with_grid_spec(json!({"n": n, "K": k, "paths": 1u64 << n, "checked": checked}));
    Ok(VarianceCheck {
        k,
        n,
        checked_paths: checked,
        violations,
        diagnostic_failures: diag_fail,
        worst,
        tie_path,
        report,
    })
}

/// Tally behind the all-equal-signs rule.
#[derive(Debug, Clone, Serialize)]
pub struct EqualSignsCheck {
    pub k: usize,
    pub n: usize,
    pub stop_at_k: u64,
    /// 2·2^{n−K}, the paths whose first K signs agree.
    pub expected_stop_at_k: u64,
    pub stop_at_k_plus_1: u64,
    pub report: VerificationReport,
}

/// T = K exactly on the paths whose first K signs agree (probability
/// 2^{1−K}), and T ≥ K+2 on every other path when K ≤ n−4.
pub fn verify_all_equal_signs_rule(c: &CanonicalOrdering) -> Result<EqualSignsCheck> {
    check_path_cap(c.n(), &Caps::default())?;
    let n = c.n();
    let k = compute_k(c);
    let expected = 2u64 << (n - k);
    if k + 3 > n {
        return Ok(EqualSignsCheck {
            k,
            n,
            stop_at_k: 0,
            expected_stop_at_k: expected,
            stop_at_k_plus_1: 0,
            report: VerificationReport::not_applicable(
                "all_equal_signs_rule",
                format!("K = {k} > n - 3 = {}", n - 3),
            ),
        });
    }
    let arith = Arith::of(c);
    let prefix = (1u32 << k) - 1;
    // (stop at K, stop at K+1, all-equal paths that did not stop at K, first bad mask)
    let (at_k, at_k1, missed, first_bad) = with_walker!(&arith, w => (0..1u32 << n)
    .into_par_iter()
    .map(|mask| {
        let t = w.walk(mask).0;
        let equal = mask & prefix == 0 || mask & prefix == prefix;
        let bad = equal != (t == k) || (k + 4 <= n && t == k + 1);
        (u64::from(t == k), u64::from(t == k + 1), u64::from(equal && t != k), bad.then_some(mask))
    })
    .reduce(
        || (0, 0, 0, None),
        |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, match (a.3, b.3) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        }),
    ));
    let full_rule = k + 4 <= n;
    let pass = at_k == expected && missed == 0 && (!full_rule || at_k1 == 0);
    let violations = at_k.abs_diff(expected) + missed + if full_rule { at_k1 } else { 0 };
    let mut report = VerificationReport::new("all_equal_signs_rule", pass, -(violations as f64))
        .with_worst_point(
            json!({"first_bad_mask": first_bad, "stop_at_k": at_k, "stop_at_k_plus_1": at_k1}),
        )
        .with_grid_spec(json!({"n": n, "K": k, "paths": 1u64 << n}));
    if !full_rule {
        report = report.with_note(format!(
            "K = n - 3: only P(T = K) checked; T = K + 1 on {at_k1} of {} paths",
            1u64 << n
        ));
    }
    Ok(EqualSignsCheck {
        k,
        n,
        stop_at_k: at_k,
        expected_stop_at_k: expected,
        stop_at_k_plus_1: at_k1,
        report,
    })
}

/// Which closing argument applies to an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// K ≤ n−4: mixture h(K).
    Mixture,
    /// K = n−3: 2^{1−K}G(U_K(K)) + (1−2^{1−K})·½.
    HalfMixture,
    /// K ≥ n−2: every path has T ≥ n−2, bound ½.
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerT {
    pub count: u64,
    pub cond_prob: f64,
    pub bound: f64,
    pub margin: f64,
    pub case: BoundCase,
}

/// The whole case split replayed on one instance.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    #[serde(rename = "K")]
    pub k: usize,
    pub n: usize,
    pub branch: Branch,
    pub per_t: BTreeMap<usize, PerT>,
    /// Exact P(|S| ≤ 1) as numerator/2ⁿ.
    pub final_numerator: u64,
    pub final_prob: f64,
    /// The branch bound (h(K), the half mixture, or ½).
    pub final_bound: f64,
    /// Σᵢ P(T=i)·bound(i) for this instance.
    pub mixture_bound: f64,
    pub g_quarter: f64,
    pub boundary_resolved: u64,
    pub pass: bool,
}

impl Certificate {
    pub fn to_report(&self, claim_id: &str) -> VerificationReport {
        let min_margin = self
            .per_t
            .values()
            .map(|p| p.margin)
            .fold(self.final_prob - self.g_quarter, f64::min);
        VerificationReport::new(claim_id, self.pass, min_margin)
            .with_worst_point(json!({"K": self.k, "n": self.n, "final_prob": self.final_prob}))
            .with_grid_spec(json!({"paths": 1u64 << self.n, "branch": self.branch}))
    }
}

/// Replays the full case analysis on `w` and checks that every step holds.
pub fn theorem_certificate(w: &WeightVector) -> Result<Certificate> {
    theorem_certificate_with_caps(w, &Caps::default())
}

pub fn theorem_certificate_with_caps(w: &WeightVector, caps: &Caps) -> Result<Certificate> {
    if !w.is_sub_unit(INEQUALITY_TOL) {
        return Err(domain("certificate needs Σvᵢ² ≤ 1"));
    }
    let c = canonical_reorder(w)?;
    let n = c.n();
    check_path_cap(n, caps)?;
    let k = compute_k(&c);
    let stats = per_t_stats(&c);
    let total = 1u64 << n;

    let mut per_t = BTreeMap::new();
    let mut mixture = 0.0;
    let mut margins_ok = true;
    for (i, s) in stats.iter().enumerate().filter(|(_, s)| s.count > 0) {
        let cond = conditional_from(&stats, i)?;
        let (case, bound) = conditional_bound(k, n, i)?;
        let margin = cond.value - bound;
        margins_ok &= margin >= 0.0 && i >= k && i >= 2;
        mixture += s.count as f64 / total as f64 * bound;
        per_t.insert(
            i,
            PerT {
                count: s.count,
                cond_prob: cond.value,
                bound,
                margin,
                case,
            },
        );
    }

    let k32 = k as u32;
    let (branch, final_bound) = if k + 4 <= n {
        (Branch::Mixture, mixture_bound(k32)?)
    } else if k + 3 == n {
        (Branch::HalfMixture, half_mixture_bound(k32)?)
    } else {
        (Branch::Direct, 0.5)
    };
    let inside: u64 = stats.iter().map(|s| s.inside).sum();
    let boundary: u64 = stats.iter().map(|s| s.boundary).sum();
    let final_prob = inside as f64 / total as f64;
    let gq = g_quarter();
    let pass = margins_ok
        && final_prob >= mixture - INEQUALITY_TOL
        && mixture >= final_bound - INEQUALITY_TOL
        && final_bound >= gq
        && final_prob >= gq;
    Ok(Certificate {
        k,
        n,
        branch,
        per_t,
        final_numerator: inside,
        final_prob,
        final_bound,
        mixture_bound: mixture,
        g_quarter: gq,
        boundary_resolved: boundary,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(ratios: &[(i64, i64)]) -> WeightVector {
        WeightVector::from_ratios(ratios).unwrap()
    }

    #[test]
    fn reorder_examples() {
        let c = canonical_reorder(&exact(&[(9, 10), (3, 10), (2, 10), (1, 10)])).unwrap();
        assert_eq!(c.weights(), &[0.3, 0.1, 0.2, 0.9]);
        assert_eq!(c.permutation(), &[3, 0, 2, 1]);
        assert!(c.is_zigzag());

        let c = canonical_reorder(&exact(&[(1, 2); 4])).unwrap();
        assert_eq!(c.weights(), &[0.5; 4]);

        let c = canonical_reorder(&exact(&[(1, 1)])).unwrap();
        assert_eq!(c.weights(), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(c.padded_zeros(), 3);
    }

    #[test]
    fn reorder_absorbs_signs() {
        let w = WeightVector::from_f64(vec![-0.6, 0.8]).unwrap();
        let c = canonical_reorder(&w).unwrap();
        assert_eq!(c.weights(), &[0.6, 0.0, 0.0, 0.8]);
        assert_eq!(c.flipped(), &[0]);
    }

    #[test]
    fn k_examples() {
        let c = canonical_reorder(&exact(&[(1, 2); 4])).unwrap();
        assert_eq!(compute_k(&c), 2);
        let c = canonical_reorder(&WeightVector::from_f64(vec![1e-3; 10]).unwrap()).unwrap();
        assert_eq!(compute_k(&c), 9);
    }

    #[test]
    fn t_examples() {
        let c = canonical_reorder(&exact(&[(1, 2); 4])).unwrap();
        assert_eq!(compute_t(&c, &[1, 1, 1, 1]).unwrap(), (2, 1.0));
        assert_eq!(compute_t(&c, &[1, 1, -1, 1]).unwrap(), (2, 1.0));
        assert_eq!(compute_t(&c, &[1, -1, 1, -1]).unwrap(), (3, 0.5));
        assert!(compute_t(&c, &[1, 1]).is_err());
        assert!(compute_t(&c, &[1, 1, 0, 1]).is_err());
    }

    #[test]
    fn equal_signs_rule_example() {
        let mut w = vec![(1, 2); 4];
        w.extend([(1, 10); 4]);
        let c = canonical_reorder(&exact(&w)).unwrap();
        let r = verify_all_equal_signs_rule(&c).unwrap();
        assert_eq!(r.k, 2);
        assert!(r.report.pass, "{:?}", r.report);
        assert_eq!(r.stop_at_k, 128);
        assert_eq!(r.stop_at_k_plus_1, 0);

        let c = canonical_reorder(&WeightVector::from_f64(vec![1e-3; 10]).unwrap()).unwrap();
        let r = verify_all_equal_signs_rule(&c).unwrap();
        assert!(r.report.skipped && r.report.pass);
    }

    #[test]
    fn half_weights_variance_and_certificate() {
        let mut w = vec![(2, 5); 4];
        w.extend([(1, 5); 4]);
        let c = canonical_reorder(&exact(&w)).unwrap();
        let v = verify_variance_bounds(&c).unwrap();
        assert_eq!(v.k, 3);
        assert!(v.report.pass, "{:?}", v.report);
        assert!(v.checked_paths > 0);

        let cert = theorem_certificate(&exact(&[(1, 2); 4])).unwrap();
        assert_eq!(cert.final_numerator, 14);
        assert!(cert.pass);
        assert_eq!(cert.branch, Branch::Direct);
    }

    #[test]
    fn certificate_examples() {
        let cert = theorem_certificate(&WeightVector::equal_unit(9).unwrap()).unwrap();
        assert!(cert.pass);
        assert!(cert.final_prob >= 0.5);
        let cert = theorem_certificate(&exact(&[(1, 1), (0, 1), (0, 1), (0, 1)])).unwrap();
        assert_eq!(cert.final_prob, 1.0);
        assert!(cert.pass);
        assert!(theorem_certificate(&exact(&[(1, 1), (1, 1)])).is_err());
    }

    #[test]
    fn conditional_bounds() {
        let c = canonical_reorder(&WeightVector::equal_unit(9).unwrap()).unwrap();
        let n = c.n();
        assert!(conditional_prob_given_t(&c, n - 1).unwrap().value >= 0.5);
        assert!(matches!(
            conditional_prob_given_t(&c, 1),
            Err(Error::UndefinedConditional(1))
        ));
        assert_eq!(
            conditional_bound(2, 9, 8).unwrap(),
            (BoundCase::Case12, 0.5)
        );
        // K = 3: (3K+2)/2 = 5.5, so T = 5 is case 3 and T = 6 is case 4
        assert_eq!(conditional_bound(3, 12, 5).unwrap().0, BoundCase::Case3);
        assert_eq!(conditional_bound(3, 12, 6).unwrap().0, BoundCase::Case4);
        // K = 2: threshold 4 is integral and both readings agree
        let (case, b) = conditional_bound(2, 12, 4).unwrap();
        assert_eq!(case, BoundCase::Case3);
        assert_eq!(
            b,
            normal_tail_bound(variance_budget(2, 4.0).unwrap()).unwrap()
        );
    }

    #[test]
    fn profile_invariants() {
        let w = WeightVector::from_f64(vec![0.5, 0.4, 0.35, 0.3, 0.3, 0.25, 0.2, 0.3]).unwrap();
        let w =
            WeightVector::from_f64(w.weights().iter().map(|x| x / w.norm_sq().sqrt()).collect())
                .unwrap();
        let c = canonical_reorder(&w).unwrap();
        let p = StoppingProfile::build(&c, &Caps::default()).unwrap();
        assert_eq!(p.records.len(), 256);
        assert_eq!(p.invariant_violations(), 0);
        assert_eq!(p.prefix_sums.len(), 8);
        let (four, two) = c.leading_sums();
        assert!(four <= 2.0 && two <= 1.0);
    }
}
