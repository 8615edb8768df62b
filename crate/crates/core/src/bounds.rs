//! Closed-form lower bounds for the gaps `B^{-1} - A^{-1}`, `A^r - B^r`,
//! `log A - log B` and `f(A) - f(B)` when `A - B >= m > 0`, together with
//! verifiers that compare each bound to the smallest eigenvalue of the
//! actual difference.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, HermitianMatrix, SpectralDecomposition, ToleranceConfig};
use crate::matfun::{apply_to_decomposition, lowner_rep_eval, MonotoneSpec};
use crate::quadrature::{integrate_log_scale, QuadratureConfig, TailDecay};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Inverse,
    Power,
    Log,
    PropositionGap,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Inverse => "inverse",
            BoundKind::Power => "power",
            BoundKind::Log => "log",
            BoundKind::PropositionGap => "proposition_gap",
        }
    }
}

/// Outcome of checking one inequality on one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub r: Option<f64>,
    pub m: f64,
    pub norm_a: f64,
    pub bound: f64,
    pub lhs_min_eig: f64,
    /// `lhs_min_eig - bound`.
    pub slack: f64,
    /// Absolute slack allowance; `pass` iff `slack >= -tolerance`.
    pub tolerance: f64,
    pub pass: bool,
}

impl BoundReport {
    fn new(
        kind: BoundKind,
        r: Option<f64>,
        m: f64,
        norm_a: f64,
        bound: f64,
        lhs_min_eig: f64,
        tolerance: f64,
    ) -> Self {
        let slack = lhs_min_eig - bound;
        Self {
            kind,
            r,
            m,
            norm_a,
            bound,
            lhs_min_eig,
            slack,
            tolerance,
            pass: slack >= -tolerance,
        }
    }
}

fn positive_finite(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter {
            name,
            value: v,
            expected: "(0, inf)",
        })
    }
}

/// `m / ((||A|| - m) ||A||)`, the lower bound on `B^{-1} - A^{-1}`.
pub fn lemma_inverse_bound(norm_a: f64, m: f64) -> Result<f64> {
    positive_finite("m", m)?;
    if !(norm_a > m && norm_a.is_finite()) {
        return Err(Error::Precondition(format!(
            "inverse bound needs ||A|| > m, got ||A|| = {norm_a}, m = {m}"
        )));
    }
    Ok(m / ((norm_a - m) * norm_a))
}

/// `||A||^r - (||A|| - m)^r`, the lower bound on `A^r - B^r`.
pub fn theorem_power_bound(norm_a: f64, m: f64, r: f64) -> Result<f64> {
    positive_finite("m", m)?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Parameter {
            name: "r",
            value: r,
            expected: "(0, 1]",
        });
    }
    if !(norm_a >= m && norm_a.is_finite()) {
        return Err(Error::Precondition(format!(
            "power bound needs ||A|| >= m, got ||A|| = {norm_a}, m = {m}"
        )));
    }
    if r == 1.0 {
        return Ok(m);
    }
    Ok(norm_a.powf(r) - (norm_a - m).powf(r))
}

/// `log ||A|| - log(||A|| - m)`, the lower bound on `log A - log B`.
pub fn log_gap_bound(norm_a: f64, m: f64) -> Result<f64> {
    positive_finite("m", m)?;
    if !(norm_a > m && norm_a.is_finite()) {
        return Err(Error::Precondition(format!(
            "log bound needs ||A|| > m, got ||A|| = {norm_a}, m = {m}"
        )));
    }
    Ok(norm_a.ln() - (norm_a - m).ln())
}

/// Per-atom lower bound `m_lambda` on `f_lambda(A) - f_lambda(B)` where
/// `f_lambda(t) = t / (1 - lambda t)`.
///
/// `norm_term` is `||I - lambda B||` when `lambda >= 0` and
/// `||I - lambda A||` when `lambda < 0`.
pub fn proposition_gap(lambda: f64, m: f64, norm_term: f64) -> Result<f64> {
    if lambda.abs() >= 1.0 {
        return Err(Error::Parameter {
            name: "lambda",
            value: lambda,
            expected: "(-1, 1)",
        });
    }
    positive_finite("m", m)?;
    positive_finite("norm_term", norm_term)?;
    // lambda >= 0: (N - lambda m) N;  lambda < 0: (N + lambda m) N
    let first = if lambda >= 0.0 {
        norm_term - lambda * m
    } else {
        norm_term + lambda * m
    };
    let denom = first * norm_term;
    if !(denom > 0.0) {
        return Err(Error::Precondition(format!(
            "m_lambda denominator is {denom} for lambda = {lambda}, m = {m}, norm = {norm_term}"
        )));
    }
    Ok(m / denom)
}

/// Closed form of `I = int_0^inf lambda^r / ((lambda + ||A||)(lambda + ||A|| - m)) d lambda`
/// next to its numerical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourCheck {
    pub norm_a: f64,
    pub m: f64,
    pub r: f64,
    pub closed_form: f64,
    pub quadrature_value: f64,
    pub rel_err: f64,
}

pub fn contour_closed_form(norm_a: f64, m: f64, r: f64) -> f64 {
    PI / (m * (r * PI).sin()) * (norm_a.powf(r) - (norm_a - m).powf(r))
}

/// `int_0^inf lambda^r / ((lambda + p)(lambda + q)) d lambda` by the
/// log-scale quadrature. Poles `p > 0`, `q >= 0`.
pub fn contour_quadrature(p: f64, q: f64, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    // in x = ln(lambda): lambda^(r+1) / ((lambda+p)(lambda+q))
    let g = |x: f64| -> Result<f64> {
        Ok(if x <= 0.0 {
            let l = x.exp();
            ((r + 1.0) * x).exp() / ((l + p) * (l + q))
        } else {
            let mu = (-x).exp();
            ((r - 1.0) * x).exp() / ((1.0 + p * mu) * (1.0 + q * mu))
        })
    };
    integrate_log_scale(
        g,
        TailDecay {
            lower: r + 1.0,
            upper: 1.0 - r,
        },
        cfg,
    )
}

pub fn contour_integral_check(norm_a: f64, m: f64, r: f64, cfg: &QuadratureConfig) -> Result<ContourCheck> {
    positive_finite("m", m)?;
    if !(norm_a > m && norm_a.is_finite()) {
        return Err(Error::Precondition(format!(
            "contour integral needs ||A|| > m, got ||A|| = {norm_a}, m = {m}"
        )));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Parameter {
            name: "r",
            value: r,
            expected: "(0, 1)",
        });
    }
    let closed_form = contour_closed_form(norm_a, m, r);
    let quadrature_value = contour_quadrature(norm_a, norm_a - m, r, cfg)?;
    Ok(ContourCheck {
        norm_a,
        m,
        r,
        closed_form,
        quadrature_value,
        rel_err: (closed_form - quadrature_value).abs() / closed_form,
    })
}

/// Gap data shared by the verifiers: `(m, ||A||)`, where
/// `m = lambda_min(A - B)`. Fails unless `A > B`.
fn strict_gap(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    eig_a: &SpectralDecomposition,
    tol: &ToleranceConfig,
) -> Result<(f64, f64)> {
    let diff = eigh(&a.sub(b)?)?;
    let m = diff.min();
    if !(m > tol.threshold(diff.spectral_radius())) {
        return Err(Error::Order { gap: m });
    }
    Ok((m, eig_a.spectral_radius()))
}

fn require_pd(eig: &SpectralDecomposition) -> Result<()> {
    if eig.min() > 0.0 {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite {
            min_eigenvalue: eig.min(),
        })
    }
}

/// Checks `A^r - B^r >= ||A||^r - (||A|| - m)^r` for `A > B >= 0`.
pub fn verify_power_inequality(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    r: f64,
    tol: &ToleranceConfig,
) -> Result<BoundReport> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Parameter {
            name: "r",
            value: r,
            expected: "(0, 1]",
        });
    }
    let eig_b = eigh(b)?;
    if eig_b.min() < -tol.threshold(eig_b.spectral_radius()) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: eig_b.min(),
        });
    }
    let eig_a = eigh(a)?;
    let (m, norm_a) = strict_gap(a, b, &eig_a, tol)?;
    // rounding can push m a hair above ||A|| when B is (nearly) zero
    let m_eff = if m > norm_a && m - norm_a <= tol.threshold(norm_a) {
        norm_a
    } else {
        m
    };
    let bound = theorem_power_bound(norm_a, m_eff, r)?;
    let pow = |t: f64| t.max(0.0).powf(r);
    let ar = apply_to_decomposition(&eig_a, "t^r", pow)?;
    let br = apply_to_decomposition(&eig_b, "t^r", pow)?;
    let lhs = eigh(&ar.sub(&br)?)?.min();
    Ok(BoundReport::new(
        BoundKind::Power,
        Some(r),
        m_eff,
        norm_a,
        bound,
        lhs,
        tol.threshold(norm_a.powf(r)),
    ))
}

/// Checks `B^{-1} - A^{-1} >= m / ((||A|| - m) ||A||)` for positive
/// definite `A > B`.
pub fn verify_inverse_inequality(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    tol: &ToleranceConfig,
) -> Result<BoundReport> {
    let eig_a = eigh(a)?;
    let eig_b = eigh(b)?;
    require_pd(&eig_a)?;
    require_pd(&eig_b)?;
    let (m, norm_a) = strict_gap(a, b, &eig_a, tol)?;
    let bound = lemma_inverse_bound(norm_a, m)?;
    let inv = |t: f64| 1.0 / t;
    let a_inv = apply_to_decomposition(&eig_a, "1/t", inv)?;
    let b_inv = apply_to_decomposition(&eig_b, "1/t", inv)?;
    let lhs = eigh(&b_inv.sub(&a_inv)?)?.min();
    let norm_b_inv = 1.0 / eig_b.min();
    Ok(BoundReport::new(
        BoundKind::Inverse,
        None,
        m,
        norm_a,
        bound,
        lhs,
        tol.threshold(norm_b_inv),
    ))
}

/// Checks `log A - log B >= log ||A|| - log(||A|| - m)` for positive
/// definite `A > B`.
pub fn verify_log_inequality(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    tol: &ToleranceConfig,
) -> Result<BoundReport> {
    let eig_a = eigh(a)?;
    let eig_b = eigh(b)?;
    require_pd(&eig_a)?;
    require_pd(&eig_b)?;
    let (m, norm_a) = strict_gap(a, b, &eig_a, tol)?;
    let bound = log_gap_bound(norm_a, m)?;
    let log_a = apply_to_decomposition(&eig_a, "log", f64::ln)?;
    let log_b = apply_to_decomposition(&eig_b, "log", f64::ln)?;
    let lhs = eigh(&log_a.sub(&log_b)?)?.min();
    let norm_log_a = eig_a.min().ln().abs().max(eig_a.max().ln().abs());
    Ok(BoundReport::new(
        BoundKind::Log,
        None,
        m,
        norm_a,
        bound,
        lhs,
        tol.threshold(norm_log_a),
    ))
}

/// Lower bound `f'(0) * sum_i w_i m_{lambda_i}` on `f(A) - f(B)` for a
/// discrete-measure monotone function.
pub fn monotone_gap_bound(spec: &MonotoneSpec, a: &HermitianMatrix, b: &HermitianMatrix, m: f64) -> Result<f64> {
    let n = a.dim();
    let mut total = 0.0;
    for atom in spec.measure.atoms() {
        let x = if atom.lambda >= 0.0 { b } else { a };
        let shifted = HermitianMatrix::identity(n)?.sub(&x.scale(atom.lambda))?;
        let norm_term = eigh(&shifted)?.spectral_radius();
        total += atom.weight * proposition_gap(atom.lambda, m, norm_term)?;
    }
    Ok(spec.fprime0 * total)
}

/// Checks `f(A) - f(B) >= f'(0) sum_i w_i m_{lambda_i} > 0` for `A > B`
/// with spectra in `(-1, 1)`.
pub fn verify_monotone_inequality(
    spec: &MonotoneSpec,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    tol: &ToleranceConfig,
) -> Result<BoundReport> {
    let (m, norm_a) = strict_gap(a, b, &eigh(a)?, tol)?;
    let fa = lowner_rep_eval(spec, a)?;
    let fb = lowner_rep_eval(spec, b)?;
    let diff = eigh(&fa.sub(&fb)?)?;
    let bound = monotone_gap_bound(spec, a, b, m)?;
    Ok(BoundReport::new(
        BoundKind::PropositionGap,
        None,
        m,
        norm_a,
        bound,
        diff.min(),
        tol.threshold(diff.spectral_radius()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::{Atom, DiscreteMeasure};

    fn diag(d: &[f64]) -> HermitianMatrix {
        HermitianMatrix::from_diagonal(d).unwrap()
    }

    #[test]
    fn inverse_bound_examples() {
        assert_eq!(lemma_inverse_bound(2.0, 1.0).unwrap(), 0.5);
        // scalar pair b = a - m is the equality case
        let (a, m) = (5.0_f64, 1.5_f64);
        let b = a - m;
        assert!((1.0 / b - 1.0 / a - lemma_inverse_bound(a, m).unwrap()).abs() < 1e-16);
        assert!(lemma_inverse_bound(3.0, 1e-300).unwrap() < 1e-299);
        assert!(lemma_inverse_bound(1.0, 1.0).is_err());
        assert!(lemma_inverse_bound(1.0, 0.0).is_err());
    }

    #[test]
    fn power_bound_examples() {
        for &a in &[0.5, 1.0, 7.0] {
            assert_eq!(theorem_power_bound(a, 0.5, 1.0).unwrap(), 0.5);
        }
        let v = theorem_power_bound(4.0, 1.0, 0.5).unwrap();
        assert!((v - 0.267_949_192_431_122_7).abs() < 1e-15);
        assert_eq!(theorem_power_bound(2.0, 2.0, 0.3).unwrap(), 2.0_f64.powf(0.3));
        assert!(theorem_power_bound(1.0, 2.0, 0.5).is_err());
        assert!(theorem_power_bound(1.0, 0.0, 0.5).is_err());
        assert!(theorem_power_bound(1.0, 0.5, 1.5).is_err());
    }

    #[test]
    fn log_bound_examples() {
        assert!((log_gap_bound(2.0, 1.0).unwrap() - std::f64::consts::LN_2).abs() < 1e-16);
        let (a, m) = (3.0_f64, 0.25_f64);
        assert!((a.ln() - (a - m).ln() - log_gap_bound(a, m).unwrap()).abs() < 1e-16);
        assert!(log_gap_bound(2.0, 1e-300).unwrap() < 1e-299);
        assert!(log_gap_bound(1.0, 1.0).is_err());
    }

    #[test]
    fn proposition_gap_examples() {
        assert_eq!(proposition_gap(0.0, 0.37, 1.0).unwrap(), 0.37);
        assert!((proposition_gap(0.5, 0.2, 1.0).unwrap() - 2.0 / 9.0).abs() < 1e-16);
        let v = proposition_gap(-0.5, 0.2, 1.25).unwrap();
        assert!((v - 0.139_130_434_782_608_7).abs() < 1e-15);
        assert!(proposition_gap(0.5, 3.0, 1.0).is_err());
        assert!(proposition_gap(1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn contour_spot_value() {
        let c = contour_integral_check(2.0, 1.0, 0.5, &QuadratureConfig::default()).unwrap();
        assert!((c.closed_form - 1.301_290_284_568_573).abs() < 1e-14);
        assert!(c.rel_err <= 1e-9);
        assert!(contour_integral_check(1.0, 1.0, 0.5, &QuadratureConfig::default()).is_err());
        assert!(contour_integral_check(2.0, 1.0, 1.0, &QuadratureConfig::default()).is_err());
    }

    #[test]
    fn contour_integrand_symmetric_in_poles() {
        let cfg = QuadratureConfig::default();
        let v1 = contour_quadrature(3.0, 0.5, 0.3, &cfg).unwrap();
        let v2 = contour_quadrature(0.5, 3.0, 0.3, &cfg).unwrap();
        assert_eq!(v1, v2);
    }

    #[test]
    fn verify_power_scalar_equality() {
        let rep = verify_power_inequality(&diag(&[4.0]), &diag(&[3.0]), 0.5, &ToleranceConfig::default())
            .unwrap();
        assert_eq!(rep.slack, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn verifiers_reject_equal_pairs() {
        let a = diag(&[2.0, 3.0]);
        let tol = ToleranceConfig::default();
        assert!(matches!(verify_power_inequality(&a, &a, 0.5, &tol), Err(Error::Order { .. })));
        assert!(matches!(verify_log_inequality(&a, &a, &tol), Err(Error::Order { .. })));
        assert!(matches!(verify_inverse_inequality(&a, &a, &tol), Err(Error::Order { .. })));
        assert!(matches!(
            verify_power_inequality(&a, &a, 0.0, &tol),
            Err(Error::Parameter { name: "r", .. })
        ));
    }

    #[test]
    fn verify_inverse_diagonal() {
        let rep =
            verify_inverse_inequality(&diag(&[2.0, 2.0]), &diag(&[1.0, 1.0]), &ToleranceConfig::default())
                .unwrap();
        assert_eq!((rep.m, rep.bound), (1.0, 0.5));
        assert!((rep.lhs_min_eig - 0.5).abs() < 1e-15);
        assert!(rep.pass);
        let singular = verify_inverse_inequality(&diag(&[2.0, 2.0]), &diag(&[1.0, 0.0]), &ToleranceConfig::default());
        assert!(matches!(singular, Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn verify_log_scalar_equality() {
        let rep = verify_log_inequality(&diag(&[2.0]), &diag(&[1.0]), &ToleranceConfig::default()).unwrap();
        assert!((rep.lhs_min_eig - std::f64::consts::LN_2).abs() < 1e-16);
        assert!(rep.slack.abs() < 1e-16);
        assert!(verify_log_inequality(&diag(&[2.0]), &diag(&[0.0]), &ToleranceConfig::default()).is_err());
    }

    #[test]
    fn monotone_gap_scalar() {
        let spec = MonotoneSpec::new(
            0.1,
            2.0,
            DiscreteMeasure::new(vec![
                Atom {
                    lambda: 0.5,
                    weight: 1.0,
                },
                Atom {
                    lambda: -0.5,
                    weight: 0.5,
                },
            ])
            .unwrap(),
        )
        .unwrap();
        let rep = verify_monotone_inequality(&spec, &diag(&[0.5]), &diag(&[0.3]), &ToleranceConfig::default())
            .unwrap();
        assert!(rep.pass);
        assert!(rep.bound > 0.0);
        // scalar pairs attain the per-atom bound
        assert!(rep.slack.abs() < 1e-15, "{}", rep.slack);
    }
}
