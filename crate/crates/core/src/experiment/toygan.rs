//! The one-dimensional GAN under FTNPL and under plain alternating gradient.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ftnpl::{FtnplConfig, Mediator};
use crate::analytics::rolling_std;
use crate::error::{Error, Result};
use crate::games::{moments, GanBatch, ToyGan, ToyGanConfig};
use crate::learners::{ftl_queue_step, HistoryQueue};
use crate::mediator::{CodeMode, MediatorInfo};
use crate::numerics::{MlpParams, Rng, Tape, Var};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GanOptions {
    pub game: ToyGanConfig,
    pub steps: usize,
    /// Step size of the alternating baseline. FTNPL sums its losses over a
    /// queue of `K` opponents and steps with `lr / K`.
    pub lr: f64,
    /// Generator samples drawn for the final moment estimate.
    pub eval_samples: usize,
}

impl Default for GanOptions {
    fn default() -> Self {
        GanOptions {
            game: ToyGanConfig::default(),
            steps: 5_000,
            lr: 0.05,
            eval_samples: 4_000,
        }
    }
}

#[derive(Clone, Debug)]
pub enum GanLearner {
    /// Generator step, then a discriminator step against the new generator.
    Alternating,
    Ftnpl(FtnplConfig),
}

/// One training step of the toy GAN.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GanRow {
    pub t: u64,
    /// Moments of the generated half of the batch.
    pub fake_mean: f64,
    pub fake_std: f64,
    pub code: Vec<f64>,
    pub loss_pi: f64,
    pub loss_d: f64,
    pub r_m: f64,
    pub step_norm_sq: f64,
}

#[derive(Clone, Debug)]
pub struct GanOutcome {
    pub rows: Vec<GanRow>,
    pub code_size: usize,
    /// Moments of fresh generator samples under the final code.
    pub sample_mean: f64,
    pub sample_std: f64,
}

impl GanOutcome {
    pub fn step_norms(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.step_norm_sq).collect()
    }

    /// Mean rolling std of the step-norm series over its final quarter.
    pub fn final_rolling_std(&self, window: usize) -> f64 {
        let norms = self.step_norms();
        let tail = &norms[norms.len() * 3 / 4..];
        let rs = rolling_std(tail, window);
        if rs.is_empty() {
            return f64::NAN;
        }
        rs.iter().sum::<f64>() / rs.len() as f64
    }

    pub fn header(code_size: usize) -> Vec<String> {
        let mut h: Vec<String> = ["t", "fake_mean", "fake_std"].iter().map(|s| s.to_string()).collect();
        h.extend((0..code_size).map(|i| format!("c_{i}")));
        h.extend(["loss_pi", "loss_D", "r_m", "step_norm_sq"].iter().map(|s| s.to_string()));
        h
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::header(self.code_size))?;
        for r in &self.rows {
            let mut rec = vec![r.t.to_string(), r.fake_mean.to_string(), r.fake_std.to_string()];
            rec.extend(r.code.iter().map(f64::to_string));
            rec.extend([r.loss_pi, r.loss_d, r.r_m, r.step_norm_sq].iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn generated(game: &ToyGan, gen: &[f64], code: &[f64], batch: &GanBatch) -> Result<Vec<f64>> {
    batch.noise.iter().map(|&z| game.generate(gen, z, code)).collect()
}

fn squared_change(before: &[f64], after: &[f64]) -> f64 {
    before.iter().zip(after).map(|(a, b)| (b - a) * (b - a)).sum()
}

/// `∇_θ` of the single-opponent loss, for the alternating baseline.
fn gradient_step(own: &[f64], eta: f64, f: impl for<'t> Fn(&[Var<'t>]) -> Result<Var<'t>>) -> Result<Vec<f64>> {
    let tape = Tape::new();
    let vars = tape.vars(own);
    let out = f(&vars)?;
    tape.check_finite()?;
    let g = tape.gradient(out, &vars);
    Ok(own.iter().zip(&g).map(|(p, gi)| p - eta * gi).collect())
}

/// Queue step of the discriminator on `−Σ_g L(g, d)`, with the shared
/// real-data term taped once and weighted by the queue length.
fn disc_queue_step(
    game: &ToyGan,
    disc: &[f64],
    gens: &HistoryQueue<Vec<f64>>,
    code: &[f64],
    batch: &GanBatch,
    eta: f64,
) -> Result<Vec<f64>> {
    if gens.is_empty() {
        return Err(Error::precondition("follow-the-leader step needs a nonempty opponent queue"));
    }
    gradient_step(disc, eta, |d| {
        let tape = d[0].tape();
        let c = tape.constants(code);
        let mut total = game.real_term(d, &c, batch)? * gens.len() as f64;
        for g in gens.iter() {
            total = total + game.fake_term(&tape.constants(g), d, &c, batch)?;
        }
        Ok(-total)
    })
}

pub fn run_toygan(opts: &GanOptions, learner: &GanLearner, rng: &mut Rng) -> Result<GanOutcome> {
    if !(opts.lr > 0.0) {
        return Err(Error::usage("lr", "must be positive"));
    }
    let game = ToyGan::new(opts.game.clone())?;
    let mut init_rng = rng.split();
    let (gen, disc) = game.init(&mut init_rng);
    let gen_shape = gen.shape().clone();
    let (mut gen, mut disc) = (gen.flat().to_vec(), disc.flat().to_vec());
    let c = opts.game.code_size;
    let mut rows = Vec::with_capacity(opts.steps);
    let final_code = match learner {
        GanLearner::Alternating => {
            let zero = vec![0.0; c];
            for t in 0..opts.steps {
                let batch = game.sample_batch(rng);
                let (loss_pi, loss_d) = game.losses(&gen, &disc, &zero, &batch)?;
                let fake = generated(&game, &gen, &zero, &batch)?;
                let next_gen = gradient_step(&gen, opts.lr, |g| {
                    let tape = g[0].tape();
                    game.value(g, &tape.constants(&disc), &tape.constants(&zero), &batch)
                })?;
                let next_disc = gradient_step(&disc, opts.lr, |d| {
                    let tape = d[0].tape();
                    Ok(-game.value(&tape.constants(&next_gen), d, &tape.constants(&zero), &batch)?)
                })?;
                let step = squared_change(&gen, &next_gen) + squared_change(&disc, &next_disc);
                let (fake_mean, fake_std) = moments(&fake);
                rows.push(GanRow {
                    t: t as u64,
                    fake_mean,
                    fake_std,
                    code: zero.clone(),
                    loss_pi,
                    loss_d,
                    r_m: 0.0,
                    step_norm_sq: step,
                });
                gen = next_gen;
                disc = next_disc;
            }
            zero
        }
        GanLearner::Ftnpl(cfg) => {
            cfg.validate()?;
            if cfg.code_size != c {
                return Err(Error::usage("code_size", "must match the GAN's code size"));
            }
            let mode = cfg.code_mode.unwrap_or(CodeMode::Sample);
            let mut mediator = Mediator::new(cfg, mode, 2 + c, &mut init_rng)?;
            let mut h_pi: HistoryQueue<Vec<f64>> = HistoryQueue::new(cfg.k);
            let mut h_d: HistoryQueue<Vec<f64>> = HistoryQueue::new(cfg.k);
            h_pi.push(gen.clone());
            h_d.push(disc.clone());
            let eta = opts.lr / cfg.k as f64;
            let mut code = vec![0.0; c];
            let mut info = MediatorInfo(Vec::new());
            for t in 0..opts.steps {
                let batch = game.sample_batch(rng);
                let (real_mean, real_std) = moments(&batch.real);
                info = MediatorInfo::concat(&[&[real_mean, real_std], &code]);
                code = mediator.code(&info, rng)?;
                let mut losses = |code: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
                    let real = h_d
                        .iter()
                        .map(|d| game.real_term(d, code, &batch))
                        .collect::<Result<Vec<f64>>>()?;
                    let table = h_pi
                        .iter()
                        .map(|g| {
                            h_d.iter()
                                .zip(&real)
                                .map(|(d, r)| Ok(r + game.fake_term(g, d, code, &batch)?))
                                .collect::<Result<Vec<f64>>>()
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let u_pi = table.iter().map(|row| row.iter().sum()).collect();
                    let u_d = (0..h_d.len()).map(|j| -table.iter().map(|row| row[j]).sum::<f64>()).collect();
                    Ok((u_pi, u_d))
                };
                let r_m = mediator.reward(&code, &mut losses)?;
                let (loss_pi, loss_d) = game.losses(&gen, &disc, &code, &batch)?;
                let fake = generated(&game, &gen, &code, &batch)?;

                // the real-data term does not depend on the generator
                let next_gen = ftl_queue_step(&gen, &h_d, eta, |g, d| {
                    let tape = g[0].tape();
                    game.fake_term(g, &tape.constants(d), &tape.constants(&code), &batch)
                })?;
                let next_disc = disc_queue_step(&game, &disc, &h_pi, &code, &batch, eta)?;
                mediator.learn(&info, &code, r_m, rng, losses)?;

                let step = squared_change(&gen, &next_gen) + squared_change(&disc, &next_disc);
                let (fake_mean, fake_std) = moments(&fake);
                rows.push(GanRow {
                    t: t as u64,
                    fake_mean,
                    fake_std,
                    code: code.clone(),
                    loss_pi,
                    loss_d,
                    r_m,
                    step_norm_sq: step,
                });
                gen = next_gen;
                disc = next_disc;
                h_pi.push(gen.clone());
                h_d.push(disc.clone());
            }
            if opts.steps == 0 {
                code
            } else {
                mediator.policy.head(&info.0)?.mean
            }
        }
    };
    let gen = MlpParams::from_flat(gen_shape, gen)?;
    let samples = game.samples(&gen, &final_code, opts.eval_samples, rng)?;
    let (sample_mean, sample_std) = moments(&samples);
    Ok(GanOutcome {
        rows,
        code_size: c,
        sample_mean,
        sample_std,
    })
}
