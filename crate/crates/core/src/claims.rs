//! The consolidated claim suite: every headline constant and check in one
//! versioned, byte-reproducible report.

use num_rational::BigRational;
use serde::Serialize;
use serde_json::json;

use crate::bounds::{
    bd_tail_bound, check_concavity, check_endpoint_value, check_g_dominates_f, cubic_density,
    g_quarter, half_mixture_bound, mixture_bound, normal_tail_bound, quadratic_bound, BoundTable,
    DEFAULT_GRID_STEP,
};
use crate::dist::{Counter, WeightVector};
use crate::error::Result;
use crate::report::VerificationReport;
use crate::search::{
    default_tail_grid, tail_beyond, verify_bd_batch, verify_lemma2_batch, verify_stopping_batch,
    verify_theorem_batch, DEFAULT_SEED,
};
use crate::surd::Surd;

pub const SCHEMA_VERSION: u32 = 1;

/// Claim ids in report order.
pub const CLAIM_IDS: [&str; 15] = [
    "G_quarter_value",
    "F_quarter_value",
    "c_star_value",
    "corollary_2_7",
    "G_dominates_F",
    "h_k_ge_G_quarter",
    "half_mix_ge_G_quarter",
    "concavity_xi_3_4",
    "endpoint_chain",
    "L_max_sqrt3",
    "bd_sharpness",
    "lemma2_quarter",
    "lemma2_2_7",
    "theorem_batch",
    "stopping_certificates",
];

/// Sizes of the randomized parts of the suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub grid_step: f64,
    pub lemma_trials: usize,
    pub tail_trials: usize,
    pub theorem_trials: usize,
    pub theorem_n_max: usize,
    pub stopping_instances: usize,
    pub stopping_n_max: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            grid_step: DEFAULT_GRID_STEP,
            lemma_trials: 500,
            tail_trials: 500,
            theorem_trials: 1000,
            theorem_n_max: 20,
            stopping_instances: 100,
            stopping_n_max: 14,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub seed: u64,
    pub constants: BoundTable,
    pub claims: Vec<VerificationReport>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite report serializes")
    }

    pub fn claim(&self, id: &str) -> Option<&VerificationReport> {
        self.claims.iter().find(|c| c.claim_id == id)
    }
}

fn within(id: &str, value: f64, target: f64, tol: f64) -> VerificationReport {
    let err = (value - target).abs();
    VerificationReport::new(id, err <= tol, tol - err)
        .with_worst_point(json!({"value": value}))
        .with_grid_spec(json!({"target": target, "tolerance": tol}))
}

fn min_over_k(id: &str, f: impl Fn(u32) -> Result<f64>) -> Result<VerificationReport> {
    let gq = g_quarter();
    let mut worst = (f64::INFINITY, 0);
    for k in 2..=64 {
        let gap = f(k)? - gq;
        if gap < worst.0 {
            worst = (gap, k);
        }
    }
    Ok(VerificationReport::new(id, worst.0 >= 0.0, worst.0)
        .with_worst_point(json!({"k": worst.1}))
        .with_grid_spec(json!({"k": [2, 64]})))
}

fn l_max_claim(step: f64) -> Result<VerificationReport> {
    let dom = check_g_dominates_f(8.0, step)?;
    let at_sqrt3 = cubic_density(3.0_f64.sqrt())?;
    let argmax_err = (dom.argmax_cubic_density - 3.0_f64.sqrt()).abs();
    let value_err = (at_sqrt3 - 0.4625).abs();
    let pass = argmax_err <= step && value_err <= 5e-4;
    Ok(
        VerificationReport::new("L_max_sqrt3", pass, 5e-4 - value_err)
            .with_worst_point(json!({
                "L_sqrt3": at_sqrt3,
                "grid_max": dom.max_cubic_density,
                "grid_argmax": dom.argmax_cubic_density,
            }))
            .with_grid_spec(json!({"y_max": 8.0, "step": step})),
    )
}

fn bd_claim(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let sqrt2 = Surd::sqrt_of(&BigRational::from_integer(2.into()))?;
    let sharp = tail_beyond(&Counter::default(), &WeightVector::equal_unit(2)?, &sqrt2)?;
    let bound = bd_tail_bound(std::f64::consts::SQRT_2)?;
    let err = (sharp.value() - bound).abs();
    let batch = verify_bd_batch(cfg.tail_trials, &default_tail_grid(), cfg.seed)?;
    let pass = sharp.to_string() == "1/4" && err <= 1e-10 && batch.report.pass;
    Ok(VerificationReport::new("bd_sharpness", pass, 1e-10 - err)
        .with_worst_point(json!({
            "sharp_tail": sharp.to_string(),
            "bound_at_sqrt2": bound,
            "batch_max_ratio": batch.max_ratio,
            "batch_witness": batch.witness,
            "batch_witness_y": batch.witness_y,
        }))
        .with_grid_spec(batch.report.grid_spec))
}

fn renamed(mut r: VerificationReport, id: &str) -> VerificationReport {
    r.claim_id = id.to_string();
    r
}

/// Runs all fifteen claims.
pub fn report_all(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let table = BoundTable::compute();
    let dominance = check_g_dominates_f(8.0, cfg.grid_step)?;
    let (lemma_quarter, lemma_27, theorem, stopping) = (
        verify_lemma2_batch(0.25, cfg.lemma_trials, cfg.seed)?,
        verify_lemma2_batch(2.0 / 7.0, cfg.lemma_trials, cfg.seed)?,
        verify_theorem_batch(cfg.theorem_trials, cfg.theorem_n_max, cfg.seed)?,
        verify_stopping_batch(cfg.stopping_instances, cfg.stopping_n_max, cfg.seed)?,
    );
    let f_quarter = quadratic_bound(0.25)?;
    let claims = vec![
        within("G_quarter_value", normal_tail_bound(0.25)?, 0.42768, 1e-5),
        VerificationReport::new(
            "F_quarter_value",
            f_quarter == 13.0 / 32.0,
            0.0 - (f_quarter - 13.0 / 32.0).abs(),
        )
        .with_worst_point(json!({"value": f_quarter}))
        .with_grid_spec(json!({"target": "13/32"})),
        within("c_star_value", table.c_star, 3.178, 1e-3),
        within(
            "corollary_2_7",
            normal_tail_bound(2.0 / 7.0)?,
            0.40246,
            1e-5,
        ),
        dominance.report,
        min_over_k("h_k_ge_G_quarter", mixture_bound)?,
        min_over_k("half_mix_ge_G_quarter", half_mixture_bound)?,
        check_concavity(0.75, 0.0, 4.0 / 9.0, 1000)?.to_report("concavity_xi_3_4"),
        check_endpoint_value().report,
        l_max_claim(cfg.grid_step)?,
        bd_claim(cfg)?,
        renamed(lemma_quarter.report, "lemma2_quarter"),
        renamed(lemma_27.report, "lemma2_2_7"),
        theorem.report,
        stopping.to_report(cfg.seed, cfg.stopping_n_max),
    ];
    let pass = claims.iter().all(|c| c.pass);
    Ok(SuiteReport {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        constants: table,
        claims,
        pass,
    })
}
