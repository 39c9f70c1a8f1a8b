//! Depolarizing noise models, the name-keyed noise factory and the
//! per-gate fidelity product estimate.

use crate::circuit::{GateKind, LogicalCircuit};
use crate::error::{Error, Result};
use crate::transpile::PhysicalCircuit;

/// Per-gate depolarizing probabilities, selected by gate arity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub eps_1q: f64,
    pub eps_2q: f64,
    /// Also used for multi-controlled gates wider than three qubits.
    pub eps_3q: f64,
}

/// Order-of-magnitude defaults for a superconducting device with 2-local
/// connectivity. Not calibrated against any real backend.
pub const OSAKA_LIKE_EPS_1Q: f64 = 0.0003;
pub const OSAKA_LIKE_EPS_2Q: f64 = 0.008;

impl NoiseModel {
    pub fn new(eps_1q: f64, eps_2q: f64, eps_3q: f64) -> Result<Self> {
        for (name, p) in [("eps_1q", eps_1q), ("eps_2q", eps_2q), ("eps_3q", eps_3q)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {p} is not a probability"
                )));
            }
        }
        Ok(Self {
            eps_1q,
            eps_2q,
            eps_3q,
        })
    }

    pub fn ideal() -> Self {
        Self {
            eps_1q: 0.0,
            eps_2q: 0.0,
            eps_3q: 0.0,
        }
    }

    pub fn osaka_like() -> Self {
        Self {
            eps_1q: OSAKA_LIKE_EPS_1Q,
            eps_2q: OSAKA_LIKE_EPS_2Q,
            eps_3q: 3.0 * OSAKA_LIKE_EPS_2Q,
        }
    }

    pub fn eps_for_arity(&self, arity: usize) -> f64 {
        match arity {
            0 => 0.0,
            1 => self.eps_1q,
            2 => self.eps_2q,
            _ => self.eps_3q,
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.eps_1q == 0.0 && self.eps_2q == 0.0 && self.eps_3q == 0.0
    }
}

/// Registered profile names accepted by [`noise_model_factory`].
pub const NOISE_PROFILES: &[&str] = &["ideal", "uniform-depolarizing", "osaka-like"];

/// Resolves a noise profile by name. `uniform-depolarizing` takes exactly
/// three parameters `(eps_1q, eps_2q, eps_3q)`; the other profiles take none.
pub fn noise_model_factory(profile: &str, params: &[f64]) -> Result<NoiseModel> {
    let expect_none = |m: NoiseModel| {
        if params.is_empty() {
            Ok(m)
        } else {
            Err(Error::InvalidArgument(format!(
                "profile `{profile}` takes no parameters"
            )))
        }
    };
    match profile {
        "ideal" => expect_none(NoiseModel::ideal()),
        "osaka-like" => expect_none(NoiseModel::osaka_like()),
        "uniform-depolarizing" | "uniform" => match params {
            [e1, e2, e3] => NoiseModel::new(*e1, *e2, *e3),
            _ => Err(Error::InvalidArgument(format!(
                "uniform-depolarizing takes 3 parameters, got {}",
                params.len()
            ))),
        },
        other => Err(Error::UnknownProfile(other.to_string())),
    }
}

/// Product of `(1 - eps)` over the gates of a circuit. Measurements are free.
pub fn fidelity_product_logical(circuit: &LogicalCircuit, noise: &NoiseModel) -> f64 {
    circuit
        .gates()
        .iter()
        .filter(|g| g.kind != GateKind::Measure)
        .map(|g| 1.0 - noise.eps_for_arity(g.qubits.len()))
        .product()
}

/// Analytic survival estimate: each gate keeps the computation correct with
/// probability `1 - eps_arity`, independently.
pub fn fidelity_product(physical: &PhysicalCircuit, noise: &NoiseModel) -> f64 {
    fidelity_product_logical(physical.circuit(), noise)
}
