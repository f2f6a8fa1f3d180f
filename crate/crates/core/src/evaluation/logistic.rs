//! Logistic regression of binary relevance on a single similarity score,
//! fitted by Newton-Raphson and compared through AIC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct RegressionFit<F: Scalar> {
    pub intercept: F,
    pub slope: F,
    pub log_likelihood: F,
    /// `2k - 2 * log_likelihood` with k = 2.
    pub aic: F,
    pub n: usize,
    pub iterations: usize,
}

fn sigmoid<F: Scalar>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

/// log(1 + e^z) without overflow.
fn softplus<F: Scalar>(z: F) -> F {
    if z > F::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn log_likelihood<F: Scalar>(pairs: &[(F, bool)], a: F, b: F) -> F {
    pairs
        .iter()
        .map(|&(x, y)| {
            let z = a + b * x;
            // log sigma(z) = -softplus(-z); log(1 - sigma(z)) = -softplus(z)
            if y {
                -softplus(-z)
            } else {
                -softplus(z)
            }
        })
        .sum()
}

fn counts<F: Scalar>(pairs: &[(F, bool)]) -> Result<(usize, usize)> {
    let pos = pairs.iter().filter(|p| p.1).count();
    let neg = pairs.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateLabels);
    }
    if pairs.iter().any(|p| !p.0.is_finite()) {
        return Err(Error::InvalidArgument("non-finite similarity".into()));
    }
    Ok((pos, neg))
}

/// Intercept-only model (k = 1): returns (log-likelihood, AIC).
pub fn fit_intercept_only<F: Scalar>(pairs: &[(F, bool)]) -> Result<(F, F)> {
    let (pos, _) = counts(pairs)?;
    let rate = F::of_usize(pos) / F::of_usize(pairs.len());
    let a = (rate / (F::one() - rate)).ln();
    let ll = log_likelihood(pairs, a, F::zero());
    Ok((ll, F::of(2.0) - F::of(2.0) * ll))
}

/// Fits `P(relevant) = sigma(intercept + slope * sim)`.
///
/// Separated data (every relevant pair on one side of every irrelevant one)
/// has no finite maximum and is reported as non-convergence.
pub fn fit_loglinear_aic<F: Scalar>(pairs: &[(F, bool)]) -> Result<RegressionFit<F>> {
    let (pos, _) = counts(pairs)?;
    let n = pairs.len();
    let two = F::of(2.0);
    let finish = |a: F, b: F, iterations: usize| {
        let ll = log_likelihood(pairs, a, b);
        RegressionFit {
            intercept: a,
            slope: b,
            log_likelihood: ll,
            aic: two * two - two * ll,
            n,
            iterations,
        }
    };

    let min_max = |want: bool| {
        pairs
            .iter()
            .filter(|p| p.1 == want)
            .fold((F::infinity(), F::neg_infinity()), |(lo, hi), p| {
                (lo.min(p.0), hi.max(p.0))
            })
    };
    let (rel_lo, rel_hi) = min_max(true);
    let (irr_lo, irr_hi) = min_max(false);
    let x_lo = rel_lo.min(irr_lo);
    let x_hi = rel_hi.max(irr_hi);
    let rate = F::of_usize(pos) / F::of_usize(n);
    let base_logit = (rate / (F::one() - rate)).ln();
    if x_lo == x_hi {
        // no variation in the predictor: the slope carries no information
        return Ok(finish(base_logit, F::zero(), 0));
    }
    if irr_hi <= rel_lo || rel_hi <= irr_lo {
        return Err(Error::NonConvergence {
            iterations: 0,
            separated: true,
        });
    }

    let tol = F::of(1e-8).max(F::epsilon() * F::of(100.0) * F::of_usize(n));
    let (mut a, mut b) = (base_logit, F::zero());
    let mut ll = log_likelihood(pairs, a, b);
    for it in 0..=MAX_ITERATIONS {
        let (mut g0, mut g1) = (F::zero(), F::zero());
        let (mut h00, mut h01, mut h11) = (F::zero(), F::zero(), F::zero());
        for &(x, y) in pairs {
            let p = sigmoid(a + b * x);
            let r = if y { F::one() - p } else { -p };
            g0 = g0 + r;
            g1 = g1 + r * x;
            let w = p * (F::one() - p);
            h00 = h00 + w;
            h01 = h01 + w * x;
            h11 = h11 + w * x * x;
        }
        let grad_norm = (g0 * g0 + g1 * g1).sqrt();
        if grad_norm < tol {
            return Ok(finish(a, b, it));
        }
        if it == MAX_ITERATIONS {
            break;
        }
        let det = h00 * h11 - h01 * h01;
        if det.is_nan() || det <= F::zero() {
            return Err(Error::NonConvergence {
                iterations: it,
                separated: true,
            });
        }
        let da = (h11 * g0 - h01 * g1) / det;
        let db = (h00 * g1 - h01 * g0) / det;
        // step halving keeps the likelihood monotone up to summation rounding
        let slack = F::epsilon() * F::of_usize(n) * (ll.abs() + F::one());
        let mut step = F::one();
        let mut accepted = false;
        for _ in 0..40 {
            let (na, nb) = (a + step * da, b + step * db);
            if na == a && nb == b {
                break;
            }
            let nll = log_likelihood(pairs, na, nb);
            if nll >= ll - slack {
                a = na;
                b = nb;
                ll = nll;
                accepted = true;
                break;
            }
            step = step / two;
        }
        if !accepted && grad_norm < F::epsilon().sqrt() * F::of_usize(n) {
            // at the optimum up to rounding: no representable step improves it
            return Ok(finish(a, b, it));
        }
        if !accepted || !(a.is_finite() && b.is_finite()) || b.abs() > F::of(1e6) {
            return Err(Error::NonConvergence {
                iterations: it + 1,
                separated: b.abs() > F::of(1e6),
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
        separated: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng as _;

    #[test]
    fn degenerate_labels() {
        let all_pos = [(0.1, true), (0.5, true)];
        assert!(matches!(fit_loglinear_aic(&all_pos), Err(Error::DegenerateLabels)));
        assert!(matches!(fit_loglinear_aic::<f64>(&[]), Err(Error::DegenerateLabels)));
    }

    #[test]
    fn separated_is_nonconvergence() {
        let pairs = [(0.9, false), (0.8, false), (0.2, true), (0.1, true)];
        assert!(matches!(
            fit_loglinear_aic(&pairs),
            Err(Error::NonConvergence { separated: true, .. })
        ));
        let quasi = [(0.9, true), (0.5, true), (0.5, false), (0.1, false)];
        assert!(fit_loglinear_aic(&quasi).is_err());
    }

    #[test]
    fn constant_similarity_gives_base_rate() {
        let pairs: Vec<(f64, bool)> = (0..40).map(|i| (0.3, i % 4 == 0)).collect();
        let fit = fit_loglinear_aic(&pairs).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert!((fit.intercept - (0.25f64 / 0.75).ln()).abs() < 1e-12);
        assert!((fit.aic - (4.0 - 2.0 * fit.log_likelihood)).abs() < 1e-12);
    }

    #[test]
    fn small_overlapping_fit_has_zero_gradient() {
        let pairs = [
            (0.1, false),
            (0.2, true),
            (0.3, false),
            (0.4, true),
            (0.5, true),
            (0.35, false),
        ];
        let fit = fit_loglinear_aic(&pairs).unwrap();
        assert!(fit.slope > 0.0);
        // independent check: finite-difference gradient of the log-likelihood vanishes
        let h = 1e-6;
        let ll = |a: f64, b: f64| log_likelihood(&pairs, a, b);
        let ga = (ll(fit.intercept + h, fit.slope) - ll(fit.intercept - h, fit.slope)) / (2.0 * h);
        let gb = (ll(fit.intercept, fit.slope + h) - ll(fit.intercept, fit.slope - h)) / (2.0 * h);
        assert!(ga.abs() < 1e-6 && gb.abs() < 1e-6, "{ga} {gb}");
    }

    fn simulated(n: usize, seed: u64) -> Vec<(f64, bool)> {
        let mut r = rng::stream(seed, "logistic-test");
        (0..n)
            .map(|_| {
                let x: f64 = r.gen();
                let p = 1.0 / (1.0 + (-(-2.0 + 5.0 * x)).exp());
                (x, r.gen::<f64>() < p)
            })
            .collect()
    }

    #[test]
    fn recovers_generating_parameters() {
        let fit = fit_loglinear_aic(&simulated(5000, 1)).unwrap();
        assert!((fit.intercept + 2.0).abs() <= 0.3, "{fit:?}");
        assert!((fit.slope - 5.0).abs() <= 0.3, "{fit:?}");
        assert!(fit.iterations < MAX_ITERATIONS);
    }

    #[test]
    fn nested_models_and_aic() {
        let pairs = simulated(800, 2);
        let (ll0, aic0) = fit_intercept_only(&pairs).unwrap();
        let fit = fit_loglinear_aic(&pairs).unwrap();
        assert!(fit.log_likelihood >= ll0);
        assert!((aic0 - (2.0 - 2.0 * ll0)).abs() < 1e-9);
        // informative predictor: AIC improves despite the extra parameter
        assert!(fit.aic < aic0);
        // uninformative predictor: likelihood can only rise, by less than the penalty on average
        let mut r = rng::stream(3, "noise");
        let noise: Vec<(f64, bool)> = pairs.iter().map(|&(_, y)| (r.gen::<f64>(), y)).collect();
        let (ll0n, _) = fit_intercept_only(&noise).unwrap();
        let fitn = fit_loglinear_aic(&noise).unwrap();
        assert!(fitn.log_likelihood >= ll0n - 1e-9);
    }

    #[test]
    fn f32_fit() {
        let pairs: Vec<(f32, bool)> = simulated(3000, 4).into_iter().map(|(x, y)| (x as f32, y)).collect();
        let fit = fit_loglinear_aic(&pairs).unwrap();
        assert!((fit.slope - 5.0).abs() < 0.6);
    }
}
