//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::Rng;
use signsum_core::bounds::{
    bd_tail_bound, check_concavity, check_endpoint_value, check_g_dominates_f, g_quarter,
    mixture_bound, normal_tail_bound, quadratic_bound, BoundTable,
};
use signsum_core::dist::{Counter, Engine, WeightVector};
use signsum_core::search::{
    default_tail_grid, minimize_prob, random_lattice_weights, tail_beyond, trial_rng,
    verify_bd_batch, verify_lemma2_batch, verify_stopping_batch, verify_theorem_batch,
    InstanceGenerator, Style,
};
use signsum_core::Surd;

const SEED: u64 = 42;

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion(id: u32, name: &str, limit: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = run();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = out.pass && in_time;
    println!(
        "criterion {id} [{}] {name}: {} ({:.2}s of {}s){}",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        limit.as_secs(),
        if in_time { "" } else { " over time limit" },
    );
    pass
}

fn constants() -> Outcome {
    let g = normal_tail_bound(0.25).unwrap();
    let f = quadratic_bound(0.25).unwrap();
    let c = BoundTable::compute().c_star;
    let g27 = normal_tail_bound(2.0 / 7.0).unwrap();
    Outcome {
        pass: (g - 0.42768).abs() <= 1e-5
            && f == 13.0 / 32.0
            && (c - 3.178).abs() <= 1e-3
            && (g27 - 0.40246).abs() <= 1e-5,
        detail: format!("G(1/4)={g:.6} F(1/4)={f} c*={c:.6} G(2/7)={g27:.6}"),
    }
}

fn dominance() -> Outcome {
    let d = check_g_dominates_f(8.0, 1e-3).unwrap();
    let paper_threshold = 0.4714;
    let margin = paper_threshold - d.max_quartic_tail;
    Outcome {
        pass: d.report.pass && margin >= 0.004 && d.violations == 0 && d.min_gap > 0.0,
        detail: format!(
            "max H={:.6} at y={:.3}, margin vs 0.4714 = {margin:.4}, min G-F={:.3e}",
            d.max_quartic_tail, d.argmax_quartic_tail, d.min_gap
        ),
    }
}

fn mixture_and_concavity() -> Outcome {
    let gq = g_quarter();
    let min_h = (2..=64)
        .map(|k| mixture_bound(k).unwrap())
        .fold(f64::INFINITY, f64::min);
    let conc = check_concavity(0.75, 0.0, 4.0 / 9.0, 1000).unwrap();
    let end = check_endpoint_value();
    let digits =
        format!("{:.4}", end.mixed) == "0.9785" && format!("{:.4}", end.cdf_at_2) == "0.9772";
    Outcome {
        pass: min_h >= gq && conc.pass && end.report.pass && digits,
        detail: format!(
            "min h(k)-G(1/4)={:.3e}, concavity max {:.2e}/{:.2e}, chain {:.5} > 0.9785 > 0.9773 > {:.5}",
            min_h - gq,
            conc.max_closed_form_second_derivative,
            conc.max_second_difference,
            end.mixed,
            end.cdf_at_2
        ),
    }
}

fn engines() -> Outcome {
    let naive = Counter::new(Engine::Naive);
    let mim = Counter::new(Engine::Mim);
    let (mut exact, mut float, mut bad) = (0, 0, 0);
    for trial in 0..200u64 {
        let mut rng = trial_rng(SEED, trial);
        let n = rng.random_range(2..=20usize);
        let w = if trial % 2 == 0 {
            exact += 1;
            random_lattice_weights(n, &mut rng).unwrap()
        } else {
            float += 1;
            let style = Style::RANDOM[(trial as usize / 2) % 3];
            signsum_core::search::random_unit_weights(&InstanceGenerator {
                n,
                seed: SEED + trial,
                style,
            })
            .unwrap()
        };
        for (lo, hi) in [(-1.0, 1.0), (-0.5, 0.25), (0.0, 2.0)] {
            let a = naive.prob_in_interval(&w, lo, hi).unwrap();
            let b = mim.prob_in_interval(&w, lo, hi).unwrap();
            let same = if w.is_exact() {
                a.numerator == b.numerator
            } else {
                (a.value() - b.value()).abs() <= 1e-12
            };
            bad += usize::from(!same);
        }
    }
    Outcome {
        pass: bad == 0,
        detail: format!(
            "{exact} exact + {float} float instances, 3 intervals each, {bad} mismatches"
        ),
    }
}

fn tail_bound() -> Outcome {
    let sqrt2 = Surd::sqrt_of(&BigRational::from_integer(2.into())).unwrap();
    let p = tail_beyond(
        &Counter::default(),
        &WeightVector::equal_unit(2).unwrap(),
        &sqrt2,
    )
    .unwrap();
    let bound = bd_tail_bound(std::f64::consts::SQRT_2).unwrap();
    let batch = verify_bd_batch(500, &default_tail_grid(), SEED).unwrap();
    Outcome {
        pass: p.to_string() == "1/4"
            && (p.value() - bound).abs() <= 1e-10
            && batch.max_ratio <= 1.0,
        detail: format!(
            "sharp tail {p} vs {bound:.12}, max ratio {:.12} over 500 instances",
            batch.max_ratio
        ),
    }
}

fn lemma() -> Outcome {
    let q = verify_lemma2_batch(0.25, 500, SEED).unwrap();
    let s = verify_lemma2_batch(2.0 / 7.0, 500, SEED).unwrap();
    Outcome {
        pass: q.min_margin > 0.0 && s.min_margin > 0.0,
        detail: format!(
            "min margin U=1/4: {:.5}, U=2/7: {:.5}, boundary-only passes {}/{}",
            q.min_margin, s.min_margin, q.ambiguous, s.ambiguous
        ),
    }
}

fn stopping() -> Outcome {
    let b = verify_stopping_batch(100, 14, SEED).unwrap();
    Outcome {
        pass: b.pass() && b.min_final_bound >= g_quarter(),
        detail: format!(
            "branches K<=n-4/K=n-3/K>=n-2 = {:?}, failures inv/rule/var/cert = {}/{}/{}/{}, min final bound {:.5}, T=K+1 at K=n-3: {}/{} paths",
            b.branch_counts,
            b.invariant_failures,
            b.equal_signs_failures,
            b.variance_failures,
            b.certificate_failures,
            b.min_final_bound,
            b.k_plus_1_at_n_minus_3.0,
            b.k_plus_1_at_n_minus_3.1,
        ),
    }
}

fn theorem_floor() -> Outcome {
    let t = verify_theorem_batch(1000, 20, SEED).unwrap();
    let oracle_ok =
        t.equal_family.iter().all(|r| r.numerator == r.oracle) && t.equal_family.len() == 19;
    let search_min = (2..=9)
        .map(|n| minimize_prob(n, 40, SEED).unwrap().best_prob.value())
        .fold(1.0, f64::min);
    Outcome {
        pass: t.min_prob >= g_quarter() && oracle_ok && search_min >= 0.5,
        detail: format!(
            "min P(|S|<=1)={:.6}, equal family matches binomial: {oracle_ok}, search min over n<=9: {search_min}",
            t.min_prob
        ),
    }
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "constants", secs(1), constants),
        criterion(2, "G dominates F", secs(5), dominance),
        criterion(
            3,
            "mixture, concavity, endpoint",
            secs(5),
            mixture_and_concavity,
        ),
        criterion(4, "engine equivalence", secs(60), engines),
        criterion(5, "tail bound sharpness", secs(60), tail_bound),
        criterion(6, "shifted interval bound", secs(120), lemma),
        criterion(7, "stopping machinery", secs(300), stopping),
        criterion(8, "theorem floor", secs(600), theorem_floor),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
