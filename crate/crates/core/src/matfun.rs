//! Matrix functions built from integral and limit representations of
//! operator monotone functions, plus the spectral oracle they are checked
//! against.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, HermitianMatrix, SpectralDecomposition};
use crate::quadrature::{integrate_log_scale, QuadratureConfig, TailDecay};

/// Spectral oracle: `V diag(f(lambda_i)) V^T`.
///
/// Any non-finite `f(lambda_i)` is reported as a domain error naming the
/// eigenvalue.
pub fn apply_spectral<F>(a: &HermitianMatrix, name: &'static str, f: F) -> Result<HermitianMatrix>
where
    F: Fn(f64) -> f64,
{
    apply_to_decomposition(&eigh(a)?, name, f)
}

pub fn apply_to_decomposition<F>(
    eig: &SpectralDecomposition,
    name: &'static str,
    f: F,
) -> Result<HermitianMatrix>
where
    F: Fn(f64) -> f64,
{
    let values = eig
        .eigenvalues
        .iter()
        .map(|&l| {
            let v = f(l);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Domain {
                    function: name,
                    eigenvalue: l,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(eig.reconstruct_with(&values))
}

fn check_power_exponent(r: f64, allow_one: bool) -> Result<()> {
    let ok = r > 0.0 && (r < 1.0 || (allow_one && r == 1.0));
    if ok {
        Ok(())
    } else {
        Err(Error::Parameter {
            name: "r",
            value: r,
            expected: if allow_one { "(0, 1]" } else { "(0, 1)" },
        })
    }
}

fn require_positive_definite(a: &HermitianMatrix) -> Result<()> {
    let min = eigh(a)?.min();
    if min > 0.0 {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
        })
    }
}

/// `t^r` from `sin(r pi)/pi * int_0^inf t/(lambda+t) lambda^(r-1) d lambda`.
pub fn scalar_power_quad(t: f64, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Parameter {
            name: "t",
            value: t,
            expected: "(0, inf)",
        });
    }
    check_power_exponent(r, false)?;
    // In x = ln(lambda) the integrand is lambda^r t/(lambda+t); for x > 0
    // it is rewritten with mu = 1/lambda.
    let g = |x: f64| -> Result<f64> {
        Ok(if x <= 0.0 {
            let lambda = x.exp();
            (r * x).exp() * t / (lambda + t)
        } else {
            let mu = (-x).exp();
            ((r - 1.0) * x).exp() * t / (1.0 + mu * t)
        })
    };
    let integral = integrate_log_scale(
        g,
        TailDecay {
            lower: r,
            upper: 1.0 - r,
        },
        cfg,
    )?;
    Ok((r * PI).sin() / PI * integral)
}

/// `A^r` for positive definite `A` by quadrature of the resolvent
/// integral. Each node solves a linear system with the original matrix;
/// no eigendecomposition enters the integrand.
pub fn frac_power_quad(a: &HermitianMatrix, r: f64, cfg: &QuadratureConfig) -> Result<HermitianMatrix> {
    check_power_exponent(r, true)?;
    require_positive_definite(a)?;
    if r == 1.0 {
        return Ok(a.clone());
    }
    let n = a.dim();
    let am = a.as_dmatrix();
    let identity = DMatrix::<f64>::identity(n, n);

    // x <= 0:  lambda^r * (lambda I + A)^{-1} A
    // x >  0:  mu^(1-r) * (I + mu A)^{-1} A,  mu = 1/lambda
    let g = |x: f64| -> Result<DMatrix<f64>> {
        let (system, weight) = if x <= 0.0 {
            (&identity * x.exp() + am, (r * x).exp())
        } else {
            (&identity + am * (-x).exp(), ((r - 1.0) * x).exp())
        };
        if weight == 0.0 {
            return Ok(DMatrix::zeros(n, n));
        }
        let chol = Cholesky::new(system).ok_or(Error::Solve("resolvent system not positive definite"))?;
        Ok(chol.solve(am) * weight)
    };
    let integral = integrate_log_scale(
        g,
        TailDecay {
            lower: r,
            upper: 1.0 - r,
        },
        cfg,
    )?;
    Ok(HermitianMatrix::symmetrized(integral * ((r * PI).sin() / PI)))
}

/// `n (A^{1/n} - I)`, with `A^{1/n}` from the spectral oracle. Converges to
/// `log A` as `n` grows.
pub fn log_via_limit(a: &HermitianMatrix, n_limit: u64) -> Result<HermitianMatrix> {
    if n_limit == 0 {
        return Err(Error::Parameter {
            name: "n_limit",
            value: 0.0,
            expected: "[1, inf)",
        });
    }
    require_positive_definite(a)?;
    let p = 1.0 / n_limit as f64;
    let root = apply_spectral(a, "t^(1/n)", |t| t.powf(p))?;
    Ok(root.shift(-1.0).scale(n_limit as f64))
}

fn check_unit_interval_lambda(lambda: f64) -> Result<()> {
    if lambda.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter {
            name: "lambda",
            value: lambda,
            expected: "(-1, 1)",
        })
    }
}

fn require_spectrum_in_unit_interval(a: &HermitianMatrix) -> Result<()> {
    let eig = eigh(a)?;
    for &l in [eig.min(), eig.max()].iter() {
        if l.abs() >= 1.0 {
            return Err(Error::Domain {
                function: "t/(1 - lambda t) on (-1, 1)",
                eigenvalue: l,
            });
        }
    }
    Ok(())
}

fn resolvent_unchecked(a: &HermitianMatrix, lambda: f64) -> Result<HermitianMatrix> {
    let n = a.dim();
    let am = a.as_dmatrix();
    let system = DMatrix::<f64>::identity(n, n) - am * lambda;
    let chol = Cholesky::new(system).ok_or(Error::Solve("I - lambda A not positive definite"))?;
    Ok(HermitianMatrix::symmetrized(chol.solve(am)))
}

/// `f_lambda(A) = A (I - lambda A)^{-1}` for `A` with spectrum in `(-1, 1)`.
pub fn resolvent_term(a: &HermitianMatrix, lambda: f64) -> Result<HermitianMatrix> {
    check_unit_interval_lambda(lambda)?;
    require_spectrum_in_unit_interval(a)?;
    resolvent_unchecked(a, lambda)
}

/// Finite nonnegative atomic measure on `(-1, 1)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub lambda: f64,
    pub weight: f64,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for atom in &atoms {
            check_unit_interval_lambda(atom.lambda)?;
            if !(atom.weight >= 0.0 && atom.weight.is_finite()) {
                return Err(Error::Parameter {
                    name: "weight",
                    value: atom.weight,
                    expected: "[0, inf)",
                });
            }
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// True when some atom carries positive weight.
    pub fn is_nonzero(&self) -> bool {
        self.atoms.iter().any(|a| a.weight > 0.0)
    }
}

/// `f(t) = f0 + f'(0) * sum_i w_i * t / (1 - lambda_i t)`: an operator
/// monotone function on `(-1, 1)` with a discrete representing measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneSpec {
    pub f0: f64,
    pub fprime0: f64,
    pub measure: DiscreteMeasure,
}

impl MonotoneSpec {
    pub fn new(f0: f64, fprime0: f64, measure: DiscreteMeasure) -> Result<Self> {
        if !(fprime0 >= 0.0 && fprime0.is_finite()) {
            return Err(Error::Parameter {
                name: "fprime0",
                value: fprime0,
                expected: "[0, inf)",
            });
        }
        if !f0.is_finite() {
            return Err(Error::Parameter {
                name: "f0",
                value: f0,
                expected: "finite",
            });
        }
        Ok(Self {
            f0,
            fprime0,
            measure,
        })
    }

    /// Scalar evaluation.
    pub fn eval_scalar(&self, t: f64) -> f64 {
        let sum: f64 = self
            .measure
            .atoms()
            .iter()
            .map(|a| a.weight * t / (1.0 - a.lambda * t))
            .sum();
        self.f0 + self.fprime0 * sum
    }
}

/// Evaluates a [`MonotoneSpec`] at a matrix with spectrum in `(-1, 1)`.
pub fn lowner_rep_eval(spec: &MonotoneSpec, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    require_spectrum_in_unit_interval(a)?;
    let n = a.dim();
    let mut acc = HermitianMatrix::zeros(n)?;
    for atom in spec.measure.atoms() {
        acc = acc.add(&resolvent_unchecked(a, atom.lambda)?.scale(atom.weight))?;
    }
    Ok(acc.scale(spec.fprime0).shift(spec.f0))
}
