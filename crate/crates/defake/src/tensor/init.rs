use ndarray::{ArrayD, IxDyn};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded parameter initializer.
///
/// Affine weights are uniform in +-sqrt(1/fan_in), embeddings are normal
/// with standard deviation 0.1.
pub struct ParamInit {
    rng: ChaCha8Rng,
}

impl ParamInit {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn affine_weight(&mut self, fan_in: usize, fan_out: usize) -> ArrayD<f64> {
        let bound = (1.0 / fan_in as f64).sqrt();
        self.uniform(&[fan_in, fan_out], bound)
    }

    /// Convolution kernels stored flattened as [channels, width * dim].
    pub fn conv_weight(&mut self, channels: usize, width: usize, dim: usize) -> ArrayD<f64> {
        let bound = (1.0 / (width * dim) as f64).sqrt();
        self.uniform(&[channels, width * dim], bound)
    }

    pub fn zeros(&mut self, shape: &[usize]) -> ArrayD<f64> {
        ArrayD::zeros(IxDyn(shape))
    }

    pub fn embedding(&mut self, vocab: usize, dim: usize) -> ArrayD<f64> {
        let mut out = ArrayD::zeros(IxDyn(&[vocab, dim]));
        for v in out.iter_mut() {
            *v = self.normal() * 0.1;
        }
        out
    }

    fn uniform(&mut self, shape: &[usize], bound: f64) -> ArrayD<f64> {
        let mut out = ArrayD::zeros(IxDyn(shape));
        for v in out.iter_mut() {
            *v = self.rng.gen_range(-bound..bound);
        }
        out
    }

    // Box-Muller; avoids pulling a distribution crate for one call site.
    fn normal(&mut self) -> f64 {
        let u1: f64 = self.rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = self.rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}
