//! Acceptance run. Prints one line per criterion and exits non-zero if any
//! criterion fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};

use loewner::bounds::{
    contour_integral_check, log_gap_bound, proposition_gap, theorem_power_bound, verify_inverse_inequality,
    verify_log_inequality, verify_power_inequality,
};
use loewner::harness::{
    gen_monotone_instance, gen_ordered_pair, gen_pd_matrix, random_orthogonal, sharpness_sweep, EnsembleSpec,
    DEFAULT_R_GRID,
};
use loewner::linalg::{eigh, opnorm, order_gap, HermitianMatrix, ToleranceConfig};
use loewner::matfun::{apply_spectral, frac_power_quad, log_via_limit, lowner_rep_eval};
use loewner::QuadratureConfig;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SUITE_SEED: u64 = 42;
const FRACTIONAL_R: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Smallest `slack + allowance` over the default ensemble for one check.
fn ensemble_margin<F>(mut per_pair: F) -> Result<(f64, usize), String>
where
    F: FnMut(&HermitianMatrix, &HermitianMatrix) -> Result<Vec<f64>, String>,
{
    let spec = EnsembleSpec::default();
    let mut worst = f64::INFINITY;
    let mut checks = 0;
    for i in 0..spec.trials as u64 {
        let pair = gen_ordered_pair(SUITE_SEED, i, &spec).map_err(|e| format!("trial {i}: {e}"))?;
        for margin in per_pair(&pair.a, &pair.b).map_err(|e| format!("trial {i}: {e}"))? {
            worst = worst.min(margin);
            checks += 1;
        }
    }
    Ok((worst, checks))
}

fn theorem_suite() -> Outcome {
    let tol = ToleranceConfig::default();
    let (worst, checks) = ensemble_margin(|a, b| {
        let norm_a = opnorm(a).map_err(|e| e.to_string())?;
        DEFAULT_R_GRID
            .iter()
            .map(|&r| {
                let rep = verify_power_inequality(a, b, r, &tol).map_err(|e| e.to_string())?;
                Ok(rep.slack + 1e-8 * (1.0 + norm_a.powf(r)))
            })
            .collect()
    })?;
    check(worst >= 0.0, format!("{checks} checks, min(slack + allowance) = {worst:e}"))
}

fn lemma_suite() -> Outcome {
    let tol = ToleranceConfig::default();
    let (worst, checks) = ensemble_margin(|a, b| {
        let inv_b_norm = 1.0 / eigh(b).map_err(|e| e.to_string())?.min();
        let rep = verify_inverse_inequality(a, b, &tol).map_err(|e| e.to_string())?;
        Ok(vec![rep.slack + 1e-8 * (1.0 + inv_b_norm)])
    })?;
    check(worst >= 0.0, format!("{checks} checks, min(slack + allowance) = {worst:e}"))
}

fn log_suite() -> Outcome {
    let tol = ToleranceConfig::default();
    let (worst, checks) = ensemble_margin(|a, b| {
        let log_norm = apply_spectral(a, "log", f64::ln)
            .and_then(|l| opnorm(&l))
            .map_err(|e| e.to_string())?;
        let rep = verify_log_inequality(a, b, &tol).map_err(|e| e.to_string())?;
        Ok(vec![rep.slack + 1e-8 * (1.0 + log_norm)])
    })?;
    check(worst >= 0.0, format!("{checks} checks, min(slack + allowance) = {worst:e}"))
}

fn sharpness() -> Outcome {
    let tol = ToleranceConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    let mut worst_ratio = 0.0f64;
    let mut checks = 0;
    for _ in 0..100 {
        // b in [a/2, a) keeps a - (a - b) == b exact, so the scalar case
        // attains the bound to rounding of the powers alone
        let a = 10f64.powf(rng.gen_range(-3.0..3.0));
        let b = a * rng.gen_range(0.5..1.0);
        if b >= a {
            continue;
        }
        let ma = HermitianMatrix::scalar(a).map_err(|e| e.to_string())?;
        let mb = HermitianMatrix::scalar(b).map_err(|e| e.to_string())?;
        for &r in &DEFAULT_R_GRID {
            let rep = verify_power_inequality(&ma, &mb, r, &tol).map_err(|e| e.to_string())?;
            worst_ratio = worst_ratio.max(rep.slack.abs() / (1e-12 * a.powf(r).max(1.0)));
            checks += 1;
        }
        let rep = verify_log_inequality(&ma, &mb, &tol).map_err(|e| e.to_string())?;
        worst_ratio = worst_ratio.max(rep.slack.abs() / (1e-12 * a.ln().abs().max(1.0)));
        checks += 1;
    }
    let rows = sharpness_sweep(
        &[0.5, 1.0, 2.0, 4.0, 10.0, 100.0],
        &[0.01, 0.1, 0.5, 1.0, 3.0],
        &DEFAULT_R_GRID,
    );
    let unsharp = rows.iter().filter(|r| !r.is_sharp()).count();
    check(
        worst_ratio <= 1.0 && unsharp == 0,
        format!(
            "{checks} scalar checks, max |slack|/allowance = {worst_ratio:e}; sweep {} rows, {unsharp} not sharp",
            rows.len()
        ),
    )
}

fn contour_identity() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut worst = 0.0f64;
    let mut points = 0;
    for norm_a in [1.0, 2.0, 10.0] {
        for m in [0.1, 0.5, norm_a / 2.0] {
            for k in 1..=9 {
                let c = contour_integral_check(norm_a, m, k as f64 / 10.0, &cfg).map_err(|e| e.to_string())?;
                worst = worst.max(c.rel_err);
                points += 1;
            }
        }
    }
    let spot = contour_integral_check(2.0, 1.0, 0.5, &cfg).map_err(|e| e.to_string())?;
    let exact = PI * (2f64.sqrt() - 1.0);
    let spot_err = ((spot.quadrature_value - exact) / exact)
        .abs()
        .max(((spot.closed_form - exact) / exact).abs());
    check(
        worst <= 1e-9 && spot_err <= 1e-9,
        format!("{points} grid points, max rel_err = {worst:e}; spot value rel err = {spot_err:e}"),
    )
}

fn quadrature_vs_oracle() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut worst = 0.0f64;
    for i in 0..200 {
        let a = gen_pd_matrix(SUITE_SEED, i, (2, 20), 1e4);
        let norm_a = opnorm(&a).map_err(|e| e.to_string())?;
        for &r in &FRACTIONAL_R {
            let q = frac_power_quad(&a, r, &cfg).map_err(|e| format!("matrix {i}: {e}"))?;
            let o = apply_spectral(&a, "t^r", |t| t.powf(r)).map_err(|e| e.to_string())?;
            let err = opnorm(&q.sub(&o).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            worst = worst.max(err / (1e-8 * norm_a.powf(r)));
        }
    }
    check(worst <= 1.0, format!("1000 checks, max error/allowance = {worst:e}"))
}

/// PD matrix with spectrum in [0.5, 4], the log-limit ensemble.
fn log_limit_matrix(index: u64) -> HermitianMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    rng.set_stream(index);
    let n = rng.gen_range(2..=12);
    let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..=4.0)).collect();
    let q = random_orthogonal(&mut rng, n);
    let m = &q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)) * q.transpose();
    let sym = (&m + m.transpose()) * 0.5;
    HermitianMatrix::from_dmatrix(sym).expect("symmetric by construction")
}

fn log_limit_convergence() -> Outcome {
    let mut worst_ratio = 0.0f64;
    for i in 0..20 {
        let a = log_limit_matrix(i);
        let log_a = apply_spectral(&a, "log", f64::ln).map_err(|e| e.to_string())?;
        let err = |n: u64| -> Result<f64, String> {
            let approx = log_via_limit(&a, n).map_err(|e| e.to_string())?;
            opnorm(&approx.sub(&log_a).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
        };
        let mut previous = err(16)?;
        for k in 5..=11 {
            let current = err(1 << k)?;
            worst_ratio = worst_ratio.max(current / previous);
            previous = current;
        }
    }
    // the gap to the limit is about (ln^2 ||A|| - ln^2 (||A|| - m)) / 2n,
    // which stays below 1e-6 at n = 1e6 only while the numerator is below 2
    let n = 1_000_000.0;
    let mut worst_gap = 0.0f64;
    for norm_a in [1.0, 2.0, 3.0] {
        for m in [0.1, 0.5, norm_a / 2.0] {
            let scaled = n * theorem_power_bound(norm_a, m, 1.0 / n).map_err(|e| e.to_string())?;
            let log = log_gap_bound(norm_a, m).map_err(|e| e.to_string())?;
            worst_gap = worst_gap.max((scaled - log).abs());
        }
    }
    check(
        worst_ratio <= 0.51 && worst_gap <= 1e-6,
        format!("max error ratio per doubling (n = 16..2048) = {worst_ratio:.5}; max |n bound(1/n) - log bound| = {worst_gap:e}"),
    )
}

fn proposition_positivity() -> Outcome {
    let mut min_gap = f64::INFINITY;
    let mut min_m_lambda = f64::INFINITY;
    let mut atoms = 0;
    for i in 0..100 {
        let (spec, pair) = gen_monotone_instance(SUITE_SEED, i, (1, 20)).map_err(|e| e.to_string())?;
        let fa = lowner_rep_eval(&spec, &pair.a).map_err(|e| e.to_string())?;
        let fb = lowner_rep_eval(&spec, &pair.b).map_err(|e| e.to_string())?;
        min_gap = min_gap.min(eigh(&fa.sub(&fb).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?.min());
        let m = order_gap(&pair.a, &pair.b).map_err(|e| e.to_string())?.m;
        for atom in spec.measure.atoms() {
            let side = if atom.lambda >= 0.0 { &pair.b } else { &pair.a };
            let norm_term = opnorm(&side.scale(-atom.lambda).shift(1.0)).map_err(|e| e.to_string())?;
            let m_lambda = proposition_gap(atom.lambda, m, norm_term).map_err(|e| e.to_string())?;
            min_m_lambda = min_m_lambda.min(m_lambda);
            atoms += 1;
        }
    }
    check(
        min_gap > 0.0 && min_m_lambda > 0.0,
        format!("100 specs, {atoms} atoms; min lambda_min(f(A) - f(B)) = {min_gap:e}, min m_lambda = {min_m_lambda:e}"),
    )
}

fn suite_output() -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_loewner"))
        .args(["suite", "--seed", "42"])
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.code() != Some(0) {
        return Err(format!("suite exited with {:?}", out.status.code()));
    }
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    Ok(text
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"runtime_secs\""))
        .collect::<Vec<_>>()
        .join("\n"))
}

fn determinism() -> Outcome {
    let first = suite_output()?;
    let second = suite_output()?;
    check(
        first == second,
        format!("two `suite --seed 42` runs, {} bytes each without runtime", first.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("theorem suite", theorem_suite),
        ("lemma suite", lemma_suite),
        ("log suite", log_suite),
        ("sharpness", sharpness),
        ("contour identity", contour_identity),
        ("quadrature vs oracle", quadrature_vs_oracle),
        ("log-limit convergence", log_limit_convergence),
        ("proposition positivity", proposition_positivity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
