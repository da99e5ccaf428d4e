//! Dirichlet sampling via normalized independent Gamma draws.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};

/// Validated parameter vector of a Dirichlet distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct DirichletParams {
    alphas: Vec<f64>,
}

impl DirichletParams {
    /// Requires at least two concentrations, all strictly positive and finite.
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.len() < 2 {
            return Err(Error::invalid(format!(
                "Dirichlet needs >= 2 concentrations, got {}",
                alphas.len()
            )));
        }
        for (i, &a) in alphas.iter().enumerate() {
            if a.is_nan() || a <= 0.0 || !a.is_finite() {
                return Err(Error::invalid(format!(
                    "Dirichlet concentration {i} must be positive and finite, got {a}"
                )));
            }
        }
        Ok(DirichletParams { alphas })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Analytic marginal mean of component `i`: alpha_i / sum(alpha).
    pub fn mean(&self, i: usize) -> f64 {
        self.alphas[i] / self.alphas.iter().sum::<f64>()
    }
}

/// Reusable sampler; amortizes the per-component Gamma setup across draws.
pub struct DirichletSampler {
    gammas: Vec<Gamma<f64>>,
}

impl DirichletSampler {
    pub fn new(params: &DirichletParams) -> Self {
        let gammas = params
            .alphas
            .iter()
            .map(|&a| Gamma::new(a, 1.0).expect("validated alpha"))
            .collect();
        DirichletSampler { gammas }
    }

    /// Fills `out` with one draw from the simplex. `out.len()` must equal the
    /// number of concentrations.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.gammas.len());
        let mut sum = 0.0;
        for (slot, gamma) in out.iter_mut().zip(&self.gammas) {
            // Keep components strictly positive even if a tiny-shape draw
            // underflows.
            let g = gamma.sample(rng).max(f64::MIN_POSITIVE);
            *slot = g;
            sum += g;
        }
        for slot in out.iter_mut() {
            *slot /= sum;
        }
    }
}

/// One draw of a probability vector from `params`.
pub fn sample_dirichlet<R: Rng + ?Sized>(params: &DirichletParams, rng: &mut R) -> Vec<f64> {
    let sampler = DirichletSampler::new(params);
    let mut out = vec![0.0; params.len()];
    sampler.sample_into(rng, &mut out);
    out
}
