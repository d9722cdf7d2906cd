//! One-dimensional GAN: an affine generator of `[z; c]` against a small
//! tanh discriminator of `[x; c]`, on Gaussian data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{mean, Activation, MlpParams, MlpShape, Rng, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyGanConfig {
    pub data_mean: f64,
    pub data_std: f64,
    pub batch_size: usize,
    pub code_size: usize,
    pub disc_hidden: usize,
}

impl Default for ToyGanConfig {
    fn default() -> Self {
        ToyGanConfig {
            data_mean: 2.0,
            data_std: 0.5,
            batch_size: 32,
            code_size: 2,
            disc_hidden: 16,
        }
    }
}

/// One training minibatch: real samples and generator noise.
#[derive(Clone, Debug, PartialEq)]
pub struct GanBatch {
    pub real: Vec<f64>,
    pub noise: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ToyGan {
    pub config: ToyGanConfig,
    gen_shape: MlpShape,
    disc_shape: MlpShape,
}

impl ToyGan {
    pub fn new(config: ToyGanConfig) -> Result<Self> {
        let c = config.code_size;
        let gen_shape = MlpShape::new(vec![1 + c, 1], vec![])?;
        let h = config.disc_hidden;
        let disc_shape = MlpShape::uniform(1 + c, &[h, h], 1, Activation::Tanh)?;
        Ok(ToyGan {
            config,
            gen_shape,
            disc_shape,
        })
    }

    pub fn gen_shape(&self) -> &MlpShape {
        &self.gen_shape
    }

    pub fn disc_shape(&self) -> &MlpShape {
        &self.disc_shape
    }

    /// Generator starting as `x = z` around zero, small random discriminator.
    pub fn init(&self, rng: &mut Rng) -> (MlpParams, MlpParams) {
        let mut gen = MlpParams::zeros(self.gen_shape.clone());
        gen.flat_mut()[0] = 1.0;
        let disc = MlpParams::init(self.disc_shape.clone(), 1.0, rng);
        (gen, disc)
    }

    pub fn sample_batch(&self, rng: &mut Rng) -> GanBatch {
        let n = self.config.batch_size;
        let real = (0..n)
            .map(|_| self.config.data_mean + self.config.data_std * rng.normal())
            .collect();
        let noise = rng.normals(n);
        GanBatch { real, noise }
    }

    /// Generator output for noise `z` under `code`.
    pub fn generate<S: Scalar>(&self, gen: &[S], z: S, code: &[S]) -> Result<S> {
        let mut input = Vec::with_capacity(1 + code.len());
        input.push(z);
        input.extend_from_slice(code);
        Ok(self.gen_shape.forward(gen, &input)?[0])
    }

    /// Discriminator logit for sample `x` under `code`.
    pub fn score<S: Scalar>(&self, disc: &[S], x: S, code: &[S]) -> Result<S> {
        let mut input = Vec::with_capacity(1 + code.len());
        input.push(x);
        input.extend_from_slice(code);
        Ok(self.disc_shape.forward(disc, &input)?[0])
    }

    fn check(&self, code_len: usize, batch: &GanBatch) -> Result<()> {
        if batch.real.is_empty() || batch.noise.is_empty() {
            return Err(Error::config("toy GAN batch is empty"));
        }
        if code_len != self.config.code_size {
            return Err(Error::config(format!(
                "code has length {}, expected {}",
                code_len, self.config.code_size
            )));
        }
        Ok(())
    }

    /// `mean ln σ(d(x))` over the real samples; independent of the generator.
    pub fn real_term<S: Scalar>(&self, disc: &[S], code: &[S], batch: &GanBatch) -> Result<S> {
        self.check(code.len(), batch)?;
        let anchor = disc[0];
        let terms = batch
            .real
            .iter()
            .map(|&x| Ok(self.score(disc, anchor.lift(x), code)?.log_sigmoid()))
            .collect::<Result<Vec<S>>>()?;
        Ok(mean(&terms))
    }

    /// `mean ln(1 − σ(d(g(z))))` over the noise samples.
    pub fn fake_term<S: Scalar>(&self, gen: &[S], disc: &[S], code: &[S], batch: &GanBatch) -> Result<S> {
        self.check(code.len(), batch)?;
        let anchor = disc[0];
        let terms = batch
            .noise
            .iter()
            .map(|&z| {
                let x = self.generate(gen, anchor.lift(z), code)?;
                Ok((-self.score(disc, x, code)?).log_sigmoid())
            })
            .collect::<Result<Vec<S>>>()?;
        Ok(mean(&terms))
    }

    /// `L = mean ln σ(d(x)) + mean ln(1 − σ(d(g(z))))`.
    pub fn value<S: Scalar>(&self, gen: &[S], disc: &[S], code: &[S], batch: &GanBatch) -> Result<S> {
        Ok(self.real_term(disc, code, batch)? + self.fake_term(gen, disc, code, batch)?)
    }

    /// `(loss_π, loss_D) = (L, −L)`.
    pub fn losses<S: Scalar>(&self, gen: &[S], disc: &[S], code: &[S], batch: &GanBatch) -> Result<(S, S)> {
        let v = self.value(gen, disc, code, batch)?;
        Ok((v, -v))
    }

    /// Generated samples for fresh noise under a fixed code.
    pub fn samples(&self, gen: &MlpParams, code: &[f64], n: usize, rng: &mut Rng) -> Result<Vec<f64>> {
        (0..n).map(|_| self.generate(gen.flat(), rng.normal(), code)).collect()
    }
}

/// `(mean, population std)`.
pub fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, v.sqrt())
}
