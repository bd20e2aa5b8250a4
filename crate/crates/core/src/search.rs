//! Seeded instance generation, empirical verification batches and a local
//! search for weight vectors that minimize P(|S| ≤ 1).
//!
//! Every trial draws from its own ChaCha8 stream (`seed`, stream = trial
//! index), so results do not depend on thread scheduling.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::bounds::{bd_constant, g_quarter, normal_tail_bound};
use crate::dist::{Counter, ExactProbability, WeightVector};
use crate::error::{domain, Result};
use crate::numerics::std_normal_upper_tail;
use crate::report::VerificationReport;
use crate::surd::Surd;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Style {
    UniformSphere,
    /// About a third of the coordinates nonzero.
    Sparse,
    /// Two runs of equal weights at a random ratio.
    TwoBlock,
    /// vᵢ = √(1/n), exact.
    Equal,
}

impl Style {
    pub const RANDOM: [Style; 3] = [Style::UniformSphere, Style::Sparse, Style::TwoBlock];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InstanceGenerator {
    pub n: usize,
    pub seed: u64,
    pub style: Style,
}

/// ChaCha8 seeded with `seed`, on stream `stream`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Unit-norm weights, deterministic in (n, seed, style).
pub fn random_unit_weights(gen: &InstanceGenerator) -> Result<WeightVector> {
    sample_unit(gen.n, gen.style, &mut trial_rng(gen.seed, 0))
}

fn sample_unit(n: usize, style: Style, rng: &mut ChaCha8Rng) -> Result<WeightVector> {
    if n == 0 {
        return Err(domain("need at least one weight"));
    }
    let raw: Vec<f64> = match style {
        Style::Equal => return WeightVector::equal_unit(n),
        Style::UniformSphere => gaussian(n, rng),
        Style::Sparse => {
            let keep = n.div_ceil(3);
            let mut v = vec![0.0; n];
            for i in rand::seq::index::sample(rng, n, keep) {
                v[i] = rng.sample::<f64, _>(StandardNormal);
            }
            v
        }
        Style::TwoBlock => {
            let split = rng.random_range(1..=n);
            let ratio = rng.random_range(0.05..1.0);
            (0..n)
                .map(|i| if i < split { 1.0 } else { ratio })
                .collect()
        }
    };
    normalized(raw, rng)
}

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

// Scales to unit norm; a zero draw falls back to a fresh Gaussian one.
fn normalized(mut v: Vec<f64>, rng: &mut ChaCha8Rng) -> Result<WeightVector> {
    let mut norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    while norm == 0.0 {
        v = gaussian(v.len(), rng);
        norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    WeightVector::from_f64(v.into_iter().map(|x| x / norm).collect())
}

/// Random exact weights on a small integer lattice, Σvᵢ² ≤ 1.
/// Many sign sums land exactly on ±1, which exercises closed endpoints.
pub fn random_lattice_weights(n: usize, rng: &mut ChaCha8Rng) -> Result<WeightVector> {
    let nums: Vec<i64> = (0..n).map(|_| rng.random_range(0..=6)).collect();
    let sq: i64 = nums.iter().map(|a| a * a).sum();
    // smallest integer D with D² ≥ Σa²
    let d = ((sq as f64).sqrt().ceil() as i64).max(1);
    let d = if (d - 1) * (d - 1) >= sq && d > 1 {
        d - 1
    } else {
        d
    };
    WeightVector::from_ratios(&nums.iter().map(|&a| (a, d)).collect::<Vec<_>>())
}

/// #{b : |n − 2b| ≤ √n}·C(n, b), the count of sign vectors with |S| ≤ 1 for
/// n equal weights √(1/n).
pub fn binomial_inside_count(n: usize) -> u64 {
    let mut total: u128 = 0;
    let mut choose: u128 = 1;
    for b in 0..=n {
        let d = n as i128 - 2 * b as i128;
        if d * d <= n as i128 {
            total += choose;
        }
        choose = choose * (n - b) as u128 / (b + 1) as u128;
    }
    total as u64
}

/// The instance behind a batch extreme.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub trial: usize,
    pub style: Option<Style>,
    pub weights: Vec<f64>,
    pub value: f64,
}

// Smallest (value, ordinal); the ordinal makes the choice schedule-independent.
fn keep_min<T>(a: Option<(f64, usize, T)>, b: Option<(f64, usize, T)>) -> Option<(f64, usize, T)> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if (y.0, y.1) < (x.0, x.1) { y } else { x }),
        (x, y) => x.or(y),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EqualFamilyRow {
    pub n: usize,
    pub numerator: u64,
    pub oracle: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremBatch {
    pub min_prob: f64,
    pub witness: Option<Witness>,
    pub equal_family: Vec<EqualFamilyRow>,
    pub boundary_resolved: u64,
    pub report: VerificationReport,
}

/// Exact P(|S| ≤ 1) over `trials` random unit instances (n ≤ `n_max`) and the
/// equal-weights family n = 2..=`n_max`, which is checked against the
/// binomial count.
pub fn verify_theorem_batch(trials: usize, n_max: usize, seed: u64) -> Result<TheoremBatch> {
    if !(1..=26).contains(&n_max) {
        return Err(domain(format!("n_max must be in 1..=26, got {n_max}")));
    }
    let counter = Counter::default();
    let gq = g_quarter();
    let random = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial as u64);
            let n = rng.random_range(1..=n_max);
            let style = Style::RANDOM[trial % 3];
            let w = sample_unit(n, style, &mut rng)?;
            let p = counter.prob_in_interval(&w, -1.0, 1.0)?;
            let witness = Witness {
                trial,
                style: Some(style),
                weights: w.weights().to_vec(),
                value: p.value(),
            };
            Ok((Some((p.value(), trial, witness)), p.boundary_resolved))
        })
        .collect::<Result<Vec<_>>>()?;
    let equal_family = (2..=n_max)
        .into_par_iter()
        .map(|n| {
            let p = counter.prob_in_interval(&WeightVector::equal_unit(n)?, -1.0, 1.0)?;
            Ok(EqualFamilyRow {
                n,
                numerator: p.numerator,
                oracle: binomial_inside_count(n),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let boundary: u64 = random.iter().map(|r| r.1).sum();
    let mut best = random.into_iter().map(|r| r.0).reduce(keep_min).flatten();
    for row in &equal_family {
        let value = row.numerator as f64 / (1u64 << row.n) as f64;
        let w = Witness {
            trial: trials + row.n,
            style: Some(Style::Equal),
            weights: vec![(1.0 / row.n as f64).sqrt(); row.n],
            value,
        };
        best = keep_min(best, Some((value, trials + row.n, w)));
    }
    let min_prob = best.as_ref().map_or(1.0, |b| b.0);
    let oracle_ok = equal_family.iter().all(|r| r.numerator == r.oracle);
    let pass = min_prob >= gq && oracle_ok;
    let witness = best.map(|b| b.2);
    let report = VerificationReport::new("theorem_batch", pass, min_prob - gq)
        .with_worst_point(json!(witness))
        .with_grid_spec(json!({
            "trials": trials,
            "n_max": n_max,
            "seed": seed,
            "equal_family": [2, n_max],
            "equal_family_matches_binomial": oracle_ok,
            "boundary_resolved": boundary,
        }));
    Ok(TheoremBatch {
        min_prob,
        witness,
        equal_family,
        boundary_resolved: boundary,
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaBatch {
    pub budget: f64,
    pub bound: f64,
    pub min_margin: f64,
    pub witness: Option<Witness>,
    /// Trials that pass only because of float boundary hits.
    pub ambiguous: usize,
    pub report: VerificationReport,
}

/// P(|x + Y| ≤ 1) ≥ G(U) on random (x, w) with Σvᵢ² ≤ U(1+|x|)².
/// Trial 0 is the degenerate all-zero vector.
pub fn verify_lemma2_batch(budget: f64, trials: usize, seed: u64) -> Result<LemmaBatch> {
    if !(budget > 0.0 && budget <= 0.5) {
        return Err(domain(format!("budget must be in (0, 1/2], got {budget}")));
    }
    let bound = normal_tail_bound(budget)?;
    let counter = Counter::default();
    let results = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial as u64);
            let n = rng.random_range(1..=12usize);
            let x: f64 = rng.random_range(-1.0..=1.0);
            let sigma = if trial == 0 {
                0.0
            } else {
                rng.random_range(0.0..=1.0) * budget.sqrt() * (1.0 + x.abs())
            };
            let dir = normalized(gaussian(n, &mut rng), &mut rng)?;
            let w = WeightVector::from_f64(dir.weights().iter().map(|v| v * sigma).collect())?;
            let p = counter.shifted_prob(x, &w)?;
            let strict = (p.numerator - p.boundary_resolved) as f64 / (1u64 << n) as f64;
            let margin = p.value() - bound;
            let mut weights = vec![x];
            weights.extend_from_slice(w.weights());
            let witness = Witness {
                trial,
                style: None,
                weights,
                value: p.value(),
            };
            Ok((
                Some((margin, trial, witness)),
                usize::from(strict < bound && margin >= 0.0),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let ambiguous = results.iter().map(|r| r.1).sum();
    let best = results.into_iter().map(|r| r.0).reduce(keep_min).flatten();
    let min_margin = best.as_ref().map_or(f64::INFINITY, |b| b.0);
    let witness = best.map(|b| b.2);
    let pass = min_margin > 0.0;
    let claim = format!("shifted_bound_{budget}");
    let report = VerificationReport::new(claim, pass, min_margin)
        .with_worst_point(json!({"shift_then_weights": witness}))
        .with_grid_spec(
            json!({"budget": budget, "trials": trials, "seed": seed, "ambiguous": ambiguous}),
        );
    Ok(LemmaBatch {
        budget,
        bound,
        min_margin,
        witness,
        ambiguous,
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TailBatch {
    pub max_ratio: f64,
    pub witness: Option<Witness>,
    pub witness_y: f64,
    pub report: VerificationReport,
}

/// Tail grid used when none is supplied: √2, 1.6, 2, 3.
pub fn default_tail_grid() -> Vec<Surd> {
    let two = BigRational::from_integer(2.into());
    let mut grid = vec![Surd::sqrt_of(&two).expect("√2")];
    for q in [(8, 5), (2, 1), (3, 1)] {
        grid.push(Surd::rational(BigRational::new(q.0.into(), q.1.into())));
    }
    grid
}

/// P(Y ≥ yσ) ≤ c*·Φ̄(y) for y ≥ √2, reported as the largest ratio.
/// Trial 0 is the sharp instance (√½, √½).
pub fn verify_bd_batch(trials: usize, y_grid: &[Surd], seed: u64) -> Result<TailBatch> {
    let sqrt2 = Surd::sqrt_of(&BigRational::from_integer(2.into()))?;
    if y_grid.iter().any(|y| *y < sqrt2) {
        return Err(domain("tail grid points must be at least √2"));
    }
    let counter = Counter::default();
    let cstar = bd_constant();
    let results = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial as u64);
            let w = if trial == 0 {
                WeightVector::equal_unit(2)?
            } else {
                let n = rng.random_range(1..=16usize);
                let style = [
                    Style::UniformSphere,
                    Style::Sparse,
                    Style::TwoBlock,
                    Style::Equal,
                ][trial % 4];
                sample_unit(n, style, &mut rng)?
            };
            let mut best = None;
            for y in y_grid {
                let p = tail_beyond(&counter, &w, y)?;
                let ratio = p.value() / (cstar * std_normal_upper_tail(y.to_f64())?);
                let candidate = Witness {
                    trial,
                    style: None,
                    weights: w.weights().to_vec(),
                    value: ratio,
                };
                // negated so the minimum tracks the largest ratio
                best = keep_min(best, Some((-ratio, trial, (candidate, y.to_f64()))));
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = results.into_iter().reduce(keep_min).flatten();
    let max_ratio = worst.as_ref().map_or(0.0, |w| -w.0);
    let (witness, worst_y) = match worst {
        Some((_, _, (w, y))) => (Some(w), y),
        None => (None, 0.0),
    };
    let pass = max_ratio <= 1.0 + 1e-12;
    let grid: Vec<String> = y_grid.iter().map(ToString::to_string).collect();
    let report = VerificationReport::new("bd_tail_batch", pass, 1.0 - max_ratio)
        .with_worst_point(json!({"instance": witness, "y": worst_y}))
        .with_grid_spec(json!({"trials": trials, "y_grid": grid, "seed": seed}));
    Ok(TailBatch {
        max_ratio,
        witness,
        witness_y: worst_y,
        report,
    })
}

/// Exact P(Y ≥ y·σ) with σ² = Σvᵢ².
pub fn tail_beyond(counter: &Counter, w: &WeightVector, y: &Surd) -> Result<ExactProbability> {
    match w.exact() {
        Some(e) => {
            let t = y.mul(&Surd::sqrt_of(e.norm_sq())?)?;
            counter.prob_between(w, Some(&t), None)
        }
        None => counter.tail_prob(w, y.to_f64() * w.norm_sq().sqrt()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub best_weights: WeightVector,
    pub best_prob: ExactProbability,
    pub restarts: usize,
    pub evaluations: u64,
    pub seed: u64,
}

const ANGLE_STEPS: usize = 24;
const MOVES_PER_ANGLE: usize = 12;

/// Pair-rotation local search on the unit sphere. A move rotates (vᵢ, vⱼ) by
/// an angle from a shrinking schedule and is kept only if the exact count of
/// |S| ≤ 1 strictly drops.
pub fn minimize_prob(n: usize, restarts: usize, seed: u64) -> Result<SearchResult> {
    if !(1..=20).contains(&n) {
        return Err(domain(format!("search needs 1 <= n <= 20, got {n}")));
    }
    let restarts = restarts.max(1);
    let counter = Counter::default();
    let eval = |v: &[f64]| -> Result<ExactProbability> {
        counter.prob_in_interval(&WeightVector::from_f64(v.to_vec())?, -1.0, 1.0)
    };
    let runs = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = trial_rng(seed, r as u64);
            let mut v = sample_unit(n, Style::UniformSphere, &mut rng)?
                .weights()
                .to_vec();
            let mut best = eval(&v)?;
            let mut evals = 1u64;
            if n >= 2 {
                for step in 0..ANGLE_STEPS {
                    let angle = std::f64::consts::FRAC_PI_4 * 0.8f64.powi(step as i32);
                    for _ in 0..MOVES_PER_ANGLE {
                        let i = rng.random_range(0..n);
                        let j = (i + rng.random_range(1..n)) % n;
                        let theta = if rng.random_bool(0.5) { angle } else { -angle };
                        let mut cand = v.clone();
                        let (s, c) = theta.sin_cos();
                        cand[i] = c * v[i] - s * v[j];
                        cand[j] = s * v[i] + c * v[j];
                        let norm = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
                        cand.iter_mut().for_each(|x| *x /= norm);
                        let p = eval(&cand)?;
                        evals += 1;
                        if p.numerator < best.numerator {
                            v = cand;
                            best = p;
                        }
                    }
                }
            }
            Ok((best, r, v, evals))
        })
        .collect::<Result<Vec<_>>>()?;
    let evaluations = runs.iter().map(|r| r.3).sum();
    let (best_prob, _, v, _) = runs
        .into_iter()
        .min_by(|a, b| a.0.numerator.cmp(&b.0.numerator).then(a.1.cmp(&b.1)))
        .expect("at least one restart");
    Ok(SearchResult {
        best_weights: WeightVector::from_f64(v)?,
        best_prob,
        restarts,
        evaluations,
        seed,
    })
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StoppingBatch {
    pub instances: usize,
    pub invariant_failures: usize,
    pub equal_signs_failures: usize,
    pub variance_failures: usize,
    pub certificate_failures: usize,
    /// Instances with K ≤ n−4, K = n−3 and K ≥ n−2.
    pub branch_counts: [usize; 3],
    /// Over K = n−3 instances: paths with T = K+1 and paths in total.
    pub k_plus_1_at_n_minus_3: (u64, u64),
    pub min_certificate_margin: f64,
    pub min_final_bound: f64,
    pub worst_instance: Option<Witness>,
}

impl StoppingBatch {
    pub fn pass(&self) -> bool {
        self.invariant_failures
            + self.equal_signs_failures
            + self.variance_failures
            + self.certificate_failures
            == 0
    }

    pub fn to_report(&self, seed: u64, n_max: usize) -> VerificationReport {
        VerificationReport::new(
            "stopping_certificates",
            self.pass(),
            self.min_certificate_margin,
        )
        .with_worst_point(json!(self.worst_instance))
        .with_grid_spec(json!({
            "instances": self.instances,
            "n_max": n_max,
            "seed": seed,
            "branch_counts": self.branch_counts,
            "k_plus_1_at_n_minus_3": self.k_plus_1_at_n_minus_3,
            "failures": {
                "invariants": self.invariant_failures,
                "equal_signs": self.equal_signs_failures,
                "variance": self.variance_failures,
                "certificate": self.certificate_failures,
            },
        }))
    }
}

/// Runs every stopping-time check on `instances` seeded unit vectors with
/// 4 ≤ n ≤ `n_max`, cycling through all four styles.
pub fn verify_stopping_batch(instances: usize, n_max: usize, seed: u64) -> Result<StoppingBatch> {
    use crate::dist::Caps;
    use crate::stopping::{
        canonical_reorder, theorem_certificate_with_caps, verify_all_equal_signs_rule,
        verify_variance_bounds, StoppingProfile,
    };
    if !(4..=crate::dist::PATH_MAX).contains(&n_max) {
        return Err(domain(format!(
            "n_max must be in 4..={}",
            crate::dist::PATH_MAX
        )));
    }
    let styles = [
        Style::TwoBlock,
        Style::UniformSphere,
        Style::Sparse,
        Style::Equal,
    ];
    let caps = Caps {
        path_n: n_max,
        ..Caps::default()
    };
    let rows = (0..instances)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial as u64);
            let n = rng.random_range(4..=n_max);
            let w = sample_unit(n, styles[trial % 4], &mut rng)?;
            let c = canonical_reorder(&w)?;
            let profile = StoppingProfile::build(&c, &caps)?;
            let rule = verify_all_equal_signs_rule(&c)?;
            let variance = verify_variance_bounds(&c)?;
            let cert = theorem_certificate_with_caps(&w, &caps)?;
            let margin = cert.to_report("").margin;
            Ok((
                trial,
                w,
                profile.invariant_violations(),
                rule,
                variance.report.pass,
                cert,
                margin,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut batch = StoppingBatch {
        instances,
        min_certificate_margin: f64::INFINITY,
        min_final_bound: f64::INFINITY,
        ..StoppingBatch::default()
    };
    for (trial, w, bad, rule, variance_ok, cert, margin) in rows {
        batch.invariant_failures += usize::from(bad > 0);
        batch.equal_signs_failures += usize::from(!rule.report.pass);
        batch.variance_failures += usize::from(!variance_ok);
        batch.certificate_failures += usize::from(!cert.pass);
        let n = cert.n;
        let branch = if cert.k + 4 <= n {
            0
        } else if cert.k + 3 == n {
            1
        } else {
            2
        };
        batch.branch_counts[branch] += 1;
        if branch == 1 {
            batch.k_plus_1_at_n_minus_3.0 += rule.stop_at_k_plus_1;
            batch.k_plus_1_at_n_minus_3.1 += 1u64 << n;
        }
        batch.min_final_bound = batch.min_final_bound.min(cert.final_bound);
        if margin < batch.min_certificate_margin {
            batch.min_certificate_margin = margin;
            batch.worst_instance = Some(Witness {
                trial,
                style: Some(styles[trial % 4]),
                weights: w.weights().to_vec(),
                value: cert.final_prob,
            });
        }
    }
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_unit_and_deterministic() {
        for style in [
            Style::UniformSphere,
            Style::Sparse,
            Style::TwoBlock,
            Style::Equal,
        ] {
            for n in 1..12 {
                let gen = InstanceGenerator { n, seed: 42, style };
                let a = random_unit_weights(&gen).unwrap();
                let b = random_unit_weights(&gen).unwrap();
                assert_eq!(a, b);
                assert!((a.norm_sq() - 1.0).abs() <= 1e-12, "{style:?} {n}");
            }
        }
        let one = random_unit_weights(&InstanceGenerator {
            n: 1,
            seed: 7,
            style: Style::UniformSphere,
        })
        .unwrap();
        assert_eq!(one.weights()[0].abs(), 1.0);
        let eq = random_unit_weights(&InstanceGenerator {
            n: 5,
            seed: 42,
            style: Style::Equal,
        })
        .unwrap();
        assert_eq!(
            eq.exact().unwrap().norm_sq(),
            &BigRational::from_integer(1.into())
        );
    }

    #[test]
    fn lattice_weights_are_sub_unit() {
        let mut rng = trial_rng(1, 0);
        for n in 1..15 {
            let w = random_lattice_weights(n, &mut rng).unwrap();
            assert!(w.is_exact());
            assert!(w.exact().unwrap().norm_sq() <= &BigRational::from_integer(1.into()));
        }
    }

    #[test]
    fn binomial_counts() {
        assert_eq!(binomial_inside_count(2), 2);
        assert_eq!(binomial_inside_count(3), 6);
        assert_eq!(binomial_inside_count(20), 772_616);
    }

    #[test]
    fn small_batches_pass() {
        let t = verify_theorem_batch(60, 10, 42).unwrap();
        assert!(t.report.pass);
        assert_eq!(t.min_prob, 0.5);
        let l = verify_lemma2_batch(0.25, 40, 42).unwrap();
        assert!(l.report.pass, "{:?}", l.report);
        let b = verify_bd_batch(20, &default_tail_grid(), 42).unwrap();
        assert!(b.report.pass);
        assert_eq!(b.max_ratio, 1.0);
        assert!(verify_lemma2_batch(0.6, 1, 42).is_err());
        assert!(verify_bd_batch(1, &[Surd::one()], 42).is_err());
    }

    #[test]
    fn search_small_cases() {
        let r = minimize_prob(1, 1, 3).unwrap();
        assert_eq!(r.best_prob.value(), 1.0);
        let r = minimize_prob(2, 10, 42).unwrap();
        assert_eq!(r.best_prob.value(), 0.5);
        let again = minimize_prob(2, 10, 42).unwrap();
        assert_eq!(r.best_weights, again.best_weights);
        assert!(minimize_prob(21, 1, 1).is_err());
    }

    #[test]
    fn stopping_batch_small() {
        let b = verify_stopping_batch(12, 9, 42).unwrap();
        assert!(b.pass(), "{b:?}");
        assert_eq!(b.branch_counts.iter().sum::<usize>(), 12);
        assert!(b.min_final_bound >= g_quarter());
    }
}
