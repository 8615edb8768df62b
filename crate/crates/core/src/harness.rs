//! Seeded random instances and the property suites run over them.
//!
//! Every trial draws from its own ChaCha stream keyed by `(seed, index)`,
//! so a trial's pair does not depend on which thread ran it or in which
//! order. Results are collected by trial index and aggregated in that
//! order, which makes a [`SuiteReport`] a pure function of its inputs
//! (apart from `runtime_secs`).

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{
    log_gap_bound, theorem_power_bound, verify_inverse_inequality, verify_log_inequality,
    verify_power_inequality, BoundKind, BoundReport,
};
use crate::error::{Error, Result};
use crate::linalg::{eigh, HermitianMatrix, ToleranceConfig, MAX_DIM};
use crate::matfun::{Atom, DiscreteMeasure, MonotoneSpec};
use crate::report::MatrixFile;

/// Parameters of a random ensemble of ordered pairs `A > B > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub seed: u64,
    pub trials: usize,
    pub dim_range: (usize, usize),
    /// Range of the target gap `m`.
    pub gap_range: (f64, f64),
    /// Range of the spectrum of `B`.
    pub eig_range: (f64, f64),
    pub r_grid: Vec<f64>,
}

pub const DEFAULT_R_GRID: [f64; 6] = [0.1, 0.25, 0.5, 0.75, 0.9, 1.0];

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: 1000,
            dim_range: (1, 50),
            gap_range: (1e-3, 10.0),
            eig_range: (1e-3, 1e3),
            r_grid: DEFAULT_R_GRID.to_vec(),
        }
    }
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Precondition(format!("invalid ensemble: {what}")));
        if self.trials < 1 {
            return bad("trials must be >= 1");
        }
        let (dlo, dhi) = self.dim_range;
        if dlo < 1 || dlo > dhi || dhi > MAX_DIM {
            return bad("dim_range must satisfy 1 <= min <= max <= 512");
        }
        let (glo, ghi) = self.gap_range;
        if !(glo > 0.0 && glo <= ghi && ghi.is_finite()) {
            return bad("gap_range must be positive and ordered");
        }
        let (elo, ehi) = self.eig_range;
        if !(elo > 0.0 && elo <= ehi && ehi.is_finite()) {
            return bad("eig_range must be positive and ordered");
        }
        if self.r_grid.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return bad("r values must lie in (0, 1]");
        }
        Ok(())
    }
}

/// An ordered pair together with the gap it was built to have.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedPair {
    pub a: HermitianMatrix,
    pub b: HermitianMatrix,
    pub target_m: f64,
}

fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Haar-distributed orthogonal matrix from QR of a Gaussian matrix.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn conjugate(q: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    let mut scaled = q.clone();
    for (j, &v) in d.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v);
    }
    scaled * q.transpose()
}

/// Builds `B = Q diag(d) Q^T` and `A = B + m I + W` with `0 <= W <= m I`,
/// so that `lambda_min(A - B) >= m`. Pure in `(seed, index, spec)`.
pub fn gen_ordered_pair(seed: u64, index: u64, spec: &EnsembleSpec) -> Result<OrderedPair> {
    let mut rng = trial_rng(seed, index);
    let (dlo, dhi) = spec.dim_range;
    let n = rng.gen_range(dlo..=dhi);
    let (elo, ehi) = spec.eig_range;
    let d: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, elo, ehi)).collect();
    let (glo, ghi) = spec.gap_range;
    let m = if glo == ghi { glo } else { rng.gen_range(glo..ghi) };
    let w_eigs: Vec<f64> = (0..n).map(|_| m * rng.gen::<f64>()).collect();

    let q = random_orthogonal(&mut rng, n);
    let u = random_orthogonal(&mut rng, n);
    let b = HermitianMatrix::symmetrized(conjugate(&q, &d));
    let w = HermitianMatrix::symmetrized(conjugate(&u, &w_eigs));
    let a = b.add(&w)?.shift(m);
    Ok(OrderedPair { a, b, target_m: m })
}

// Distinct seed domains keep the auxiliary ensembles independent of the
// ordered-pair stream for the same user seed.
const PD_DOMAIN: u64 = 0x9e37_79b9_7f4a_7c15;
const MONOTONE_DOMAIN: u64 = 0xc2b2_ae3d_27d4_eb4f;

/// Random positive definite matrix with dimension in `dim_range` and
/// condition number at most `max_condition`. The smallest eigenvalue is
/// log-uniform in `[1e-2, 10]`.
pub fn gen_pd_matrix(seed: u64, index: u64, dim_range: (usize, usize), max_condition: f64) -> HermitianMatrix {
    let mut rng = trial_rng(seed ^ PD_DOMAIN, index);
    let n = rng.gen_range(dim_range.0..=dim_range.1);
    let lo = log_uniform(&mut rng, 1e-2, 10.0);
    let cond = log_uniform(&mut rng, 1.0, max_condition.max(1.0));
    let mut d: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, lo, lo * cond)).collect();
    if n > 1 {
        // pin both ends so the requested condition number is attained
        d[0] = lo;
        d[n - 1] = lo * cond;
    }
    let q = random_orthogonal(&mut rng, n);
    HermitianMatrix::symmetrized(conjugate(&q, &d))
}

/// Random discrete-measure monotone function with `f'(0) > 0` and at
/// least one positive atom, and a pair `A > B` with both spectra inside
/// `[-0.85, 0.7]`.
pub fn gen_monotone_instance(seed: u64, index: u64, dim_range: (usize, usize)) -> Result<(MonotoneSpec, OrderedPair)> {
    let mut rng = trial_rng(seed ^ MONOTONE_DOMAIN, index);
    let atoms = (0..rng.gen_range(1..=5))
        .map(|_| Atom {
            lambda: rng.gen_range(-0.95..0.95),
            weight: rng.gen_range(0.01..2.0),
        })
        .collect();
    let spec = MonotoneSpec::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(0.1..3.0),
        DiscreteMeasure::new(atoms)?,
    )?;

    let n = rng.gen_range(dim_range.0..=dim_range.1);
    let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.85..0.3)).collect();
    let m = rng.gen_range(0.01..0.2);
    let w_eigs: Vec<f64> = (0..n).map(|_| m * rng.gen::<f64>()).collect();
    let q = random_orthogonal(&mut rng, n);
    let u = random_orthogonal(&mut rng, n);
    let b = HermitianMatrix::symmetrized(conjugate(&q, &d));
    let w = HermitianMatrix::symmetrized(conjugate(&u, &w_eigs));
    let a = b.add(&w)?.shift(m);
    Ok((spec, OrderedPair { a, b, target_m: m }))
}

/// Hex SHA-256 of the pair serialized as two matrix files.
pub fn fingerprint(a: &HermitianMatrix, b: &HermitianMatrix) -> String {
    #[derive(Serialize)]
    struct Pair {
        a: MatrixFile,
        b: MatrixFile,
    }
    let json = serde_json::to_vec(&Pair {
        a: MatrixFile::from(a),
        b: MatrixFile::from(b),
    })
    .expect("matrix files serialize");
    let digest = Sha256::digest(&json);
    digest.iter().map(|byte| format!("{byte:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub trial: u64,
    /// `power`, `inverse`, `log`, or `hypothesis` for a pair that failed
    /// its construction contract.
    pub kind: String,
    pub r: Option<f64>,
    pub slack: Option<f64>,
    pub fingerprint: String,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub trials: usize,
    pub total: usize,
    pub passed: usize,
    pub failures: Vec<Failure>,
    pub min_slack: f64,
    /// Smallest `slack / (1 + scale)`, where `scale` is the norm the
    /// tolerance of that check is relative to.
    pub min_scaled_slack: f64,
    pub runtime_secs: f64,
}

struct TrialOutcome {
    reports: Vec<(BoundKind, Option<f64>, Result<BoundReport>)>,
    hypothesis_error: Option<String>,
    fingerprint: String,
}

fn check_hypotheses(pair: &OrderedPair, tol: &ToleranceConfig) -> Result<()> {
    let eig_b = eigh(&pair.b)?;
    if !(eig_b.min() > 0.0) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: eig_b.min(),
        });
    }
    let diff = eigh(&pair.a.sub(&pair.b)?)?;
    if diff.min() < pair.target_m - tol.threshold(diff.spectral_radius()) {
        return Err(Error::Precondition(format!(
            "lambda_min(A - B) = {} below target gap {}",
            diff.min(),
            pair.target_m
        )));
    }
    Ok(())
}

fn run_trial(pair: &OrderedPair, spec: &EnsembleSpec, tol: &ToleranceConfig) -> TrialOutcome {
    let fingerprint = fingerprint(&pair.a, &pair.b);
    if let Err(e) = check_hypotheses(pair, tol) {
        return TrialOutcome {
            reports: Vec::new(),
            hypothesis_error: Some(e.to_string()),
            fingerprint,
        };
    }
    let mut reports = Vec::with_capacity(spec.r_grid.len() + 2);
    for &r in &spec.r_grid {
        reports.push((
            BoundKind::Power,
            Some(r),
            verify_power_inequality(&pair.a, &pair.b, r, tol),
        ));
    }
    reports.push((
        BoundKind::Inverse,
        None,
        verify_inverse_inequality(&pair.a, &pair.b, tol),
    ));
    reports.push((BoundKind::Log, None, verify_log_inequality(&pair.a, &pair.b, tol)));
    TrialOutcome {
        reports,
        hypothesis_error: None,
        fingerprint,
    }
}

/// Runs the power, inverse and log verifiers on every trial of the
/// ensemble. Errors in single trials become failures.
pub fn run_suite(spec: &EnsembleSpec, tol: &ToleranceConfig) -> Result<SuiteReport> {
    run_suite_with(spec, tol, |index| gen_ordered_pair(spec.seed, index, spec))
}

/// [`run_suite`] with a caller-supplied pair generator.
pub fn run_suite_with<G>(spec: &EnsembleSpec, tol: &ToleranceConfig, generate: G) -> Result<SuiteReport>
where
    G: Fn(u64) -> Result<OrderedPair> + Sync,
{
    spec.validate()?;
    let start = Instant::now();
    let checks_per_trial = spec.r_grid.len() + 2;

    let outcomes: Vec<std::result::Result<TrialOutcome, String>> = (0..spec.trials as u64)
        .into_par_iter()
        .map(|i| {
            generate(i)
                .map(|pair| run_trial(&pair, spec, tol))
                .map_err(|e| e.to_string())
        })
        .collect();

    let mut failures = Vec::new();
    let mut passed = 0;
    let mut min_slack = f64::INFINITY;
    let mut min_scaled_slack = f64::INFINITY;
    for (trial, outcome) in (0u64..).zip(outcomes) {
        let outcome = match outcome {
            Ok(o) => o,
            Err(reason) => {
                failures.push(Failure {
                    trial,
                    kind: "hypothesis".into(),
                    r: None,
                    slack: None,
                    fingerprint: String::new(),
                    reason: Some(reason),
                });
                continue;
            }
        };
        if let Some(reason) = outcome.hypothesis_error {
            // none of this trial's checks ran
            for &r in &spec.r_grid {
                failures.push(Failure {
                    trial,
                    kind: "hypothesis".into(),
                    r: Some(r),
                    slack: None,
                    fingerprint: outcome.fingerprint.clone(),
                    reason: Some(reason.clone()),
                });
            }
            for _ in 0..2 {
                failures.push(Failure {
                    trial,
                    kind: "hypothesis".into(),
                    r: None,
                    slack: None,
                    fingerprint: outcome.fingerprint.clone(),
                    reason: Some(reason.clone()),
                });
            }
            continue;
        }
        for (kind, r, res) in outcome.reports {
            match res {
                Ok(rep) => {
                    min_slack = min_slack.min(rep.slack);
                    min_scaled_slack = min_scaled_slack.min(rep.slack * tol.psd_tol / rep.tolerance);
                    if rep.pass {
                        passed += 1;
                    } else {
                        failures.push(Failure {
                            trial,
                            kind: kind.as_str().into(),
                            r,
                            slack: Some(rep.slack),
                            fingerprint: outcome.fingerprint.clone(),
                            reason: None,
                        });
                    }
                }
                Err(e) => failures.push(Failure {
                    trial,
                    kind: kind.as_str().into(),
                    r,
                    slack: None,
                    fingerprint: outcome.fingerprint.clone(),
                    reason: Some(e.to_string()),
                }),
            }
        }
    }

    Ok(SuiteReport {
        seed: spec.seed,
        trials: spec.trials,
        total: spec.trials * checks_per_trial,
        passed,
        failures,
        min_slack,
        min_scaled_slack,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

/// One scalar instance `b = a - m` of the power or log inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRow {
    pub kind: BoundKind,
    pub a: f64,
    pub m: f64,
    pub r: Option<f64>,
    pub lhs: Option<f64>,
    pub bound: Option<f64>,
    pub slack: Option<f64>,
    /// Why a grid point was skipped.
    pub note: Option<String>,
}

impl SharpnessRow {
    /// `|slack| <= 1e-12 * max(1, |lhs|)`; skipped rows count as sharp.
    pub fn is_sharp(&self) -> bool {
        match (self.slack, self.lhs) {
            (Some(s), Some(l)) => s.abs() <= 1e-12 * l.abs().max(1.0),
            _ => true,
        }
    }
}

/// Scalar equality sweep over `a_grid x gap_grid x r_grid`, plus one log
/// row per `(a, m)`.
pub fn sharpness_sweep(a_grid: &[f64], gap_grid: &[f64], r_grid: &[f64]) -> Vec<SharpnessRow> {
    let mut rows = Vec::new();
    for &a in a_grid {
        for &m in gap_grid {
            for &r in r_grid {
                let mut row = SharpnessRow {
                    kind: BoundKind::Power,
                    a,
                    m,
                    r: Some(r),
                    lhs: None,
                    bound: None,
                    slack: None,
                    note: None,
                };
                if !(a >= m && m > 0.0) {
                    row.note = Some("skipped: requires a >= m > 0".into());
                } else {
                    match theorem_power_bound(a, m, r) {
                        Ok(bound) => {
                            let lhs = a.powf(r) - (a - m).powf(r);
                            row.lhs = Some(lhs);
                            row.bound = Some(bound);
                            row.slack = Some(lhs - bound);
                        }
                        Err(e) => row.note = Some(format!("skipped: {e}")),
                    }
                }
                rows.push(row);
            }
            let mut row = SharpnessRow {
                kind: BoundKind::Log,
                a,
                m,
                r: None,
                lhs: None,
                bound: None,
                slack: None,
                note: None,
            };
            if !(a > m && m > 0.0) {
                row.note = Some("skipped: requires a > m > 0".into());
            } else {
                match log_gap_bound(a, m) {
                    Ok(bound) => {
                        let lhs = a.ln() - (a - m).ln();
                        row.lhs = Some(lhs);
                        row.bound = Some(bound);
                        row.slack = Some(lhs - bound);
                    }
                    Err(e) => row.note = Some(format!("skipped: {e}")),
                }
            }
            rows.push(row);
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::loewner_gt;

    fn small_spec(trials: usize) -> EnsembleSpec {
        EnsembleSpec {
            trials,
            dim_range: (1, 8),
            ..EnsembleSpec::default()
        }
    }

    #[test]
    fn scalar_ensemble_gives_ordered_scalars() {
        let spec = EnsembleSpec {
            dim_range: (1, 1),
            ..EnsembleSpec::default()
        };
        for i in 0..20 {
            let p = gen_ordered_pair(7, i, &spec).unwrap();
            assert_eq!(p.a.dim(), 1);
            assert!(p.a.get(0, 0) > p.b.get(0, 0) && p.b.get(0, 0) > 0.0);
        }
    }

    #[test]
    fn generated_pairs_satisfy_hypotheses() {
        let spec = small_spec(1);
        let tol = ToleranceConfig::default();
        for i in 0..30 {
            let p = gen_ordered_pair(3, i, &spec).unwrap();
            assert!(loewner_gt(&p.a, &p.b, &tol).unwrap());
            assert!(eigh(&p.b).unwrap().min() > 0.0);
            check_hypotheses(&p, &tol).unwrap();
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = small_spec(1);
        let p = gen_ordered_pair(11, 5, &spec).unwrap();
        let q = gen_ordered_pair(11, 5, &spec).unwrap();
        assert_eq!(p, q);
        assert_ne!(p, gen_ordered_pair(11, 6, &spec).unwrap());
    }

    #[test]
    fn single_scalar_trial_passes() {
        let spec = EnsembleSpec {
            trials: 1,
            dim_range: (1, 1),
            ..EnsembleSpec::default()
        };
        let rep = run_suite(&spec, &ToleranceConfig::default()).unwrap();
        assert_eq!(rep.total, 8);
        assert_eq!(rep.passed, rep.total);
        assert!(rep.failures.is_empty());
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(run_suite(&small_spec(0), &ToleranceConfig::default()).is_err());
    }

    #[test]
    fn corrupted_pair_is_recorded_not_fatal() {
        let spec = small_spec(4);
        let rep = run_suite_with(&spec, &ToleranceConfig::default(), |i| {
            let p = gen_ordered_pair(spec.seed, i, &spec)?;
            if i == 2 {
                // swap roles so that B > A
                Ok(OrderedPair {
                    a: p.b,
                    b: p.a,
                    target_m: p.target_m,
                })
            } else {
                Ok(p)
            }
        })
        .unwrap();
        assert_eq!(rep.total, 32);
        assert_eq!(rep.passed, 24);
        assert_eq!(rep.failures.len(), 8);
        assert!(rep.failures.iter().all(|f| f.trial == 2 && f.kind == "hypothesis"));
        assert_eq!(rep.failures[0].fingerprint.len(), 64);
    }

    #[test]
    fn failing_generator_is_recorded() {
        let spec = small_spec(3);
        let rep = run_suite_with(&spec, &ToleranceConfig::default(), |i| {
            if i == 0 {
                Err(Error::Precondition("boom".into()))
            } else {
                gen_ordered_pair(spec.seed, i, &spec)
            }
        })
        .unwrap();
        assert_eq!(rep.passed, 16);
        assert_eq!(rep.failures.len(), 1);
    }

    #[test]
    fn sharpness_boundary_rows() {
        let rows = sharpness_sweep(&[1.0], &[1.0], &[0.5]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].lhs, Some(1.0));
        assert_eq!(rows[0].bound, Some(1.0));
        assert_eq!(rows[0].slack, Some(0.0));
        assert!(rows[1].note.is_some() && rows[1].slack.is_none());

        let rows = sharpness_sweep(&[4.0], &[1.0], &[0.5]);
        assert!((rows[0].lhs.unwrap() - 0.267_949_192_431_122_7).abs() < 1e-15);
        assert!(rows.iter().all(SharpnessRow::is_sharp));

        let rows = sharpness_sweep(&[1.0], &[2.0], &[0.5]);
        assert!(rows.iter().all(|r| r.note.is_some()));
    }
}
