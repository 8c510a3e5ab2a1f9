use std::collections::BTreeMap;

use ndarray::ArrayD;

use crate::tensor::{ParamId, ParamStore};

use super::{Result, TrainerError};

/// Name + learning rate; extras beyond Adam's fixed moments are not needed
/// by the built-in optimizers.
#[derive(Debug, Clone)]
pub struct OptimizerSpec {
    pub name: String,
    pub learning_rate: f64,
}

impl OptimizerSpec {
    pub fn new(name: &str, learning_rate: f64) -> Self {
        Self {
            name: name.to_string(),
            learning_rate,
        }
    }

    pub fn build(&self) -> Result<Box<dyn Optimizer>> {
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return Err(TrainerError::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        match self.name.to_lowercase().as_str() {
            "sgd" => Ok(Box::new(Sgd)),
            "adam" => Ok(Box::new(Adam::default())),
            other => Err(TrainerError::InvalidConfig(format!(
                "unknown optimizer {other:?}; known: [\"sgd\", \"adam\"]"
            ))),
        }
    }
}

/// One parameter update from a gradient map. The learning rate is passed
/// per step so schedulers can change it between epochs.
pub trait Optimizer {
    fn step(
        &mut self,
        store: &mut ParamStore,
        grads: &BTreeMap<ParamId, ArrayD<f64>>,
        learning_rate: f64,
    );
}

/// Plain stochastic gradient descent.
pub struct Sgd;

impl Optimizer for Sgd {
    fn step(
        &mut self,
        store: &mut ParamStore,
        grads: &BTreeMap<ParamId, ArrayD<f64>>,
        learning_rate: f64,
    ) {
        for (&id, g) in grads {
            store
                .value_mut(id)
                .zip_mut_with(g, |v, &d| *v -= learning_rate * d);
        }
    }
}

/// Adam with the standard moment estimates and bias correction.
pub struct Adam {
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    step: u64,
    first: BTreeMap<ParamId, ArrayD<f64>>,
    second: BTreeMap<ParamId, ArrayD<f64>>,
}

impl Default for Adam {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            first: BTreeMap::new(),
            second: BTreeMap::new(),
        }
    }
}

impl Optimizer for Adam {
    fn step(
        &mut self,
        store: &mut ParamStore,
        grads: &BTreeMap<ParamId, ArrayD<f64>>,
        learning_rate: f64,
    ) {
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for (&id, g) in grads {
            let m = self
                .first
                .entry(id)
                .or_insert_with(|| ArrayD::zeros(g.raw_dim()));
            let v = self
                .second
                .entry(id)
                .or_insert_with(|| ArrayD::zeros(g.raw_dim()));
            m.zip_mut_with(g, |m, &d| *m = self.beta1 * *m + (1.0 - self.beta1) * d);
            v.zip_mut_with(g, |v, &d| *v = self.beta2 * *v + (1.0 - self.beta2) * d * d);
            let value = store.value_mut(id);
            ndarray::Zip::from(value)
                .and(&*m)
                .and(&*v)
                .for_each(|p, &m, &v| {
                    let m_hat = m / bc1;
                    let v_hat = v / bc2;
                    *p -= learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
                });
        }
    }
}

/// Scale all gradients so their global L2 norm is at most `max_norm`.
/// Returns the factor applied (1 when no clipping was needed).
pub fn clip_gradient_norm(
    grads: &mut BTreeMap<ParamId, ArrayD<f64>>,
    max_norm: f64,
) -> Result<f64> {
    if max_norm <= 0.0 || !max_norm.is_finite() {
        return Err(TrainerError::InvalidConfig(format!(
            "clip_max_norm must be positive, got {max_norm}"
        )));
    }
    let mut sum_sq = 0.0;
    for g in grads.values() {
        for &v in g.iter() {
            if !v.is_finite() {
                return Err(TrainerError::NonFiniteGradient);
            }
            sum_sq += v * v;
        }
    }
    let norm = sum_sq.sqrt();
    if norm <= max_norm {
        return Ok(1.0);
    }
    let factor = max_norm / norm;
    for g in grads.values_mut() {
        g.mapv_inplace(|v| v * factor);
    }
    Ok(factor)
}
