//! Continuous matching pennies under FTRL, FTPL and FTNPL.

use serde::{Deserialize, Serialize};

use super::ftnpl::{FtnplConfig, Mediator};
use crate::analytics::{step_metrics, RegretPoint, TrajectoryLog, TrajectoryRow};
use crate::error::Result;
use crate::games::{PenniesVariant, PAYOFF};
use crate::learners::{
    ftpl_step, pennies_queue_step, pennies_regret, CumulativeGradient, FtplConfig, HistoryQueue, Role,
};
use crate::mediator::{CodeMode, MediatorInfo};
use crate::numerics::Rng;

/// Order of the two players' moves within an FTRL round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateOrder {
    /// The discriminator responds to the agent's freshly updated strategy.
    #[default]
    Alternating,
    Simultaneous,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PenniesOptions {
    pub variant: PenniesVariant,
    pub steps: usize,
    pub lr: f64,
    pub phi0: [f64; 2],
    pub omega0: [f64; 2],
    pub order: UpdateOrder,
    /// Box half-width of the comparator set used for regret.
    pub regret_bound: f64,
    /// Number of points on the regret curve.
    pub regret_points: usize,
}

#[derive(Clone, Debug)]
pub enum PenniesLearner {
    FtrlL2,
    Ftpl(FtplConfig),
    Ftnpl(FtnplConfig),
}

/// Everything a pennies run produces.
#[derive(Clone, Debug)]
pub struct PenniesOutcome {
    pub log: TrajectoryLog,
    pub plays: Vec<([f64; 2], [f64; 2])>,
    pub regret: Vec<RegretPoint>,
}

fn mat_vec(x: &[f64]) -> [f64; 2] {
    [
        PAYOFF[0][0] * x[0] + PAYOFF[0][1] * x[1],
        PAYOFF[1][0] * x[0] + PAYOFF[1][1] * x[1],
    ]
}

/// Gradient of the uncoded agent loss in `φ`: `Aω`.
pub fn agent_gradient(omega: &[f64]) -> [f64; 2] {
    mat_vec(omega)
}

/// Gradient of the uncoded discriminator loss in `ω`.
pub fn disc_gradient(variant: PenniesVariant, phi: &[f64], omega: &[f64]) -> [f64; 2] {
    let a_phi = mat_vec(phi);
    let active = match variant {
        PenniesVariant::Convex => true,
        PenniesVariant::Relu => crate::games::payoff(phi, omega) < 0.0,
    };
    if active {
        [-a_phi[0], -a_phi[1]]
    } else {
        [0.0, 0.0]
    }
}

fn to2(v: &[f64]) -> [f64; 2] {
    [v[0], v[1]]
}

struct Recorder {
    log: TrajectoryLog,
    plays: Vec<([f64; 2], [f64; 2])>,
    prev: Option<Vec<f64>>,
    variant: PenniesVariant,
}

impl Recorder {
    fn new(variant: PenniesVariant, code_size: usize, steps: usize) -> Self {
        Recorder {
            log: TrajectoryLog::new(code_size),
            plays: Vec::with_capacity(steps),
            prev: None,
            variant,
        }
    }

    fn record(&mut self, phi: [f64; 2], omega: [f64; 2], code: &[f64], r_m: f64) -> Result<()> {
        let state = vec![phi[0], phi[1], omega[0], omega[1]];
        let (step, dist) = step_metrics(&state, self.prev.as_deref().unwrap_or(&state), Some(&[0.0; 4]));
        let t = self.log.len() as u64;
        self.log.push(TrajectoryRow {
            t,
            phi,
            omega,
            code: code.to_vec(),
            loss_pi: self.variant.loss_pi(&phi, &omega, code),
            loss_d: self.variant.loss_d(&phi, &omega, code),
            r_m,
            step_norm_sq: step,
            dist_mne: dist,
        })?;
        self.plays.push((phi, omega));
        self.prev = Some(state);
        Ok(())
    }

    fn finish(self, opts: &PenniesOptions) -> Result<PenniesOutcome> {
        let regret = regret_curve(opts.variant, &self.plays, opts.regret_bound, opts.regret_points)?;
        Ok(PenniesOutcome {
            log: self.log,
            plays: self.plays,
            regret,
        })
    }
}

/// Regret of both players at evenly spaced prefixes of the run.
pub fn regret_curve(
    variant: PenniesVariant,
    plays: &[([f64; 2], [f64; 2])],
    bound: f64,
    points: usize,
) -> Result<Vec<RegretPoint>> {
    if plays.is_empty() || points == 0 {
        return Ok(Vec::new());
    }
    let n = plays.len();
    let mut ts: Vec<usize> = (1..=points).map(|i| (i * n).div_ceil(points)).collect();
    ts.dedup();
    ts.into_iter()
        .map(|t| {
            Ok(RegretPoint {
                t: t as u64,
                agent: pennies_regret(variant, &plays[..t], Role::Agent, bound)?,
                discriminator: pennies_regret(variant, &plays[..t], Role::Discriminator, bound)?,
            })
        })
        .collect()
}

pub fn run_pennies(opts: &PenniesOptions, learner: &PenniesLearner, rng: &mut Rng) -> Result<PenniesOutcome> {
    match learner {
        PenniesLearner::FtrlL2 => run_ftrl(opts),
        PenniesLearner::Ftpl(cfg) => run_ftpl(opts, cfg, rng),
        PenniesLearner::Ftnpl(cfg) => run_ftnpl(opts, cfg, rng),
    }
}

/// Lazy ℓ2 FTRL on the full history of true losses, centred at the initial
/// strategies.
fn run_ftrl(opts: &PenniesOptions) -> Result<PenniesOutcome> {
    let mut agent = PenniesHistory::new(opts.variant, Role::Agent);
    let mut disc = PenniesHistory::new(opts.variant, Role::Discriminator);
    let mut rec = Recorder::new(opts.variant, 0, opts.steps);
    let (mut phi, mut omega) = (opts.phi0, opts.omega0);
    for _ in 0..opts.steps {
        rec.record(phi, omega, &[], 0.0)?;
        agent.push(&omega);
        let next_phi = agent.leader(&opts.phi0, opts.lr);
        disc.push(match opts.order {
            UpdateOrder::Alternating => &next_phi,
            UpdateOrder::Simultaneous => &phi,
        });
        omega = disc.leader(&opts.omega0, opts.lr);
        phi = next_phi;
    }
    rec.finish(opts)
}

/// Cumulative past loss of one pennies player, kept in closed form.
///
/// Every loss depends on the opponent only through `A·opponent`, a multiple
/// of `v = (1, −1)`, so the history reduces to sums of the opponent's
/// projections `x = θ[0] − θ[1]`.
struct PenniesHistory {
    variant: PenniesVariant,
    role: Role,
    sum: f64,
    sum_pos: f64,
    sum_neg: f64,
}

impl PenniesHistory {
    fn new(variant: PenniesVariant, role: Role) -> Self {
        PenniesHistory {
            variant,
            role,
            sum: 0.0,
            sum_pos: 0.0,
            sum_neg: 0.0,
        }
    }

    /// `argmin_θ Σ L_i(θ) + ‖θ − center‖²/(2η)`.
    ///
    /// The losses only see `y = θ·v`, so the minimizer moves `center` along
    /// `v` to the minimizer `y*` of `f(y) + (y − y_c)²/(4η)`, where `f` is the
    /// one-dimensional cumulative loss and `y_c = center·v`.
    fn leader(&self, center: &[f64; 2], eta: f64) -> [f64; 2] {
        let yc = center[0] - center[1];
        let y = match (self.role, self.variant) {
            (Role::Agent, _) => yc - 2.0 * eta * self.sum,
            (Role::Discriminator, PenniesVariant::Convex) => yc + 2.0 * eta * self.sum,
            (Role::Discriminator, PenniesVariant::Relu) => {
                // f has slope −sum_neg ≥ 0 right of 0 and −sum_pos ≤ 0 left of it
                let right = yc + 2.0 * eta * self.sum_neg;
                let left = yc + 2.0 * eta * self.sum_pos;
                if right > 0.0 {
                    right
                } else if left < 0.0 {
                    left
                } else {
                    0.0
                }
            }
        };
        let t = (y - yc) / 2.0;
        [center[0] + t, center[1] - t]
    }

    fn push(&mut self, opponent: &[f64]) {
        let x = opponent[0] - opponent[1];
        self.sum += x;
        if x > 0.0 {
            self.sum_pos += x;
        } else {
            self.sum_neg += x;
        }
    }
}

fn run_ftpl(opts: &PenniesOptions, cfg: &FtplConfig, rng: &mut Rng) -> Result<PenniesOutcome> {
    cfg.validate()?;
    let mut agent_hist = CumulativeGradient::zeros(2);
    let mut disc_hist = CumulativeGradient::zeros(2);
    let mut rec = Recorder::new(opts.variant, 0, opts.steps);
    let (mut phi, mut omega) = (opts.phi0, opts.omega0);
    for _ in 0..opts.steps {
        rec.record(phi, omega, &[], 0.0)?;
        agent_hist.accumulate(&agent_gradient(&omega));
        disc_hist.accumulate(&disc_gradient(opts.variant, &phi, &omega));
        let sigma_a = cfg.draw_perturbation(2, rng)?;
        let sigma_d = cfg.draw_perturbation(2, rng)?;
        phi = to2(&ftpl_step(&agent_hist, &phi, &sigma_a, cfg));
        omega = to2(&ftpl_step(&disc_hist, &omega, &sigma_d, cfg));
    }
    rec.finish(opts)
}

/// Marginal losses of every queued strategy against the opponent's queue.
fn queue_losses(
    variant: PenniesVariant,
    h_pi: &HistoryQueue<Vec<f64>>,
    h_d: &HistoryQueue<Vec<f64>>,
    code: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let u_pi = h_pi
        .iter()
        .map(|p| h_d.iter().map(|w| variant.loss_pi(p, w, code)).sum())
        .collect();
    let u_d = h_d
        .iter()
        .map(|w| h_pi.iter().map(|p| variant.loss_d(p, w, code)).sum())
        .collect();
    (u_pi, u_d)
}

fn run_ftnpl(opts: &PenniesOptions, cfg: &FtnplConfig, rng: &mut Rng) -> Result<PenniesOutcome> {
    cfg.validate()?;
    let mode = cfg.code_mode.unwrap_or(match opts.variant {
        PenniesVariant::Convex => CodeMode::Mean,
        PenniesVariant::Relu => CodeMode::Sample,
    });
    let mut init_rng = rng.split();
    let mut mediator = Mediator::new(cfg, mode, 4, &mut init_rng)?;
    let mut h_pi: HistoryQueue<Vec<f64>> = HistoryQueue::new(cfg.k);
    let mut h_d: HistoryQueue<Vec<f64>> = HistoryQueue::new(cfg.k);
    h_pi.push(opts.phi0.to_vec());
    h_d.push(opts.omega0.to_vec());
    let mut rec = Recorder::new(opts.variant, cfg.code_size, opts.steps);
    let (mut phi, mut omega) = (opts.phi0, opts.omega0);
    for _ in 0..opts.steps {
        let info = MediatorInfo::concat(&[&phi, &omega]);
        let code = mediator.code(&info, rng)?;
        let mut losses = |c: &[f64]| Ok(queue_losses(opts.variant, &h_pi, &h_d, c));
        let r_m = mediator.reward(&code, &mut losses)?;
        rec.record(phi, omega, &code, r_m)?;

        let next_phi = pennies_queue_step(opts.variant, Role::Agent, &phi, &h_d, &code, opts.lr)?;
        let next_omega = pennies_queue_step(opts.variant, Role::Discriminator, &omega, &h_pi, &code, opts.lr)?;
        mediator.learn(&info, &code, r_m, rng, losses)?;

        phi = to2(&next_phi);
        omega = to2(&next_omega);
        h_pi.push(next_phi);
        h_d.push(next_omega);
    }
    rec.finish(opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{grad, relative_error};

    #[test]
    fn closed_form_gradients_match_the_tape() {
        let mut rng = Rng::new(4);
        for variant in [PenniesVariant::Convex, PenniesVariant::Relu] {
            for _ in 0..50 {
                let p = [rng.normal(), rng.normal()];
                let w = [rng.normal(), rng.normal()];
                let ga = grad(|x| variant.loss_pi(x, &x[0].tape().constants(&w), &[]), &p).unwrap();
                let gd = grad(|x| variant.loss_d(&x[0].tape().constants(&p), x, &[]), &w).unwrap();
                assert!(relative_error(&ga, &agent_gradient(&w), 1e-12) < 1e-12);
                assert!(relative_error(&gd, &disc_gradient(variant, &p, &w), 1e-12) < 1e-12);
            }
        }
    }

    #[test]
    fn ftrl_leader_minimizes_the_regularized_history() {
        let mut rng = Rng::new(8);
        let eta = 0.05;
        for variant in [PenniesVariant::Convex, PenniesVariant::Relu] {
            for role in [Role::Agent, Role::Discriminator] {
                let mut hist = PenniesHistory::new(variant, role);
                let opp: Vec<[f64; 2]> = (0..rng.uniform_range(1.0, 12.0) as usize)
                    .map(|_| [rng.normal(), rng.normal()])
                    .collect();
                for o in &opp {
                    hist.push(o);
                }
                let center = [rng.normal(), rng.normal()];
                let objective = |th: &[f64; 2]| {
                    let losses: f64 = opp
                        .iter()
                        .map(|o| match role {
                            Role::Agent => variant.loss_pi(th, o, &[]),
                            Role::Discriminator => variant.loss_d(o, th, &[]),
                        })
                        .sum();
                    losses + ((th[0] - center[0]).powi(2) + (th[1] - center[1]).powi(2)) / (2.0 * eta)
                };
                let best = hist.leader(&center, eta);
                // brute force over a grid around the centre
                let mut grid_min = f64::INFINITY;
                for i in -400..=400 {
                    for j in -40..=40 {
                        let th = [center[0] + i as f64 * 5e-3, center[1] + j as f64 * 5e-3 + i as f64 * -5e-3];
                        grid_min = grid_min.min(objective(&th));
                    }
                }
                assert!(objective(&best) <= grid_min + 1e-9, "{variant:?} {role:?}");
            }
        }
    }

    fn opts(variant: PenniesVariant, steps: usize) -> PenniesOptions {
        PenniesOptions {
            variant,
            steps,
            lr: 0.01,
            phi0: [0.5, -0.5],
            omega0: [0.5, -0.5],
            order: UpdateOrder::Alternating,
            regret_bound: 5.0,
            regret_points: 4,
        }
    }

    #[test]
    fn every_learner_logs_one_row_per_step() {
        for learner in [
            PenniesLearner::FtrlL2,
            PenniesLearner::Ftpl(FtplConfig::default()),
            PenniesLearner::Ftnpl(FtnplConfig::default()),
        ] {
            let out = run_pennies(&opts(PenniesVariant::Convex, 30), &learner, &mut Rng::new(1)).unwrap();
            assert_eq!(out.log.len(), 30);
            assert_eq!(out.log.rows()[0].step_norm_sq, 0.0);
            assert_eq!(out.regret.last().unwrap().t, 30);
        }
    }

    #[test]
    fn disabled_mediator_reduces_to_queue_ftl() {
        let cfg = FtnplConfig {
            disable_mediator: true,
            ..Default::default()
        };
        for variant in [PenniesVariant::Convex, PenniesVariant::Relu] {
            let o = opts(variant, 60);
            let out = run_ftnpl(&o, &cfg, &mut Rng::new(2)).unwrap();
            let mut h_pi = HistoryQueue::new(cfg.k);
            let mut h_d = HistoryQueue::new(cfg.k);
            let (mut p, mut w) = (o.phi0.to_vec(), o.omega0.to_vec());
            h_pi.push(p.clone());
            h_d.push(w.clone());
            for row in out.log.rows() {
                assert_eq!(row.phi.to_vec(), p);
                assert_eq!(row.omega.to_vec(), w);
                assert_eq!(row.code, vec![0.0; 2]);
                let np = pennies_queue_step(variant, Role::Agent, &p, &h_d, &[], o.lr).unwrap();
                let nw = pennies_queue_step(variant, Role::Discriminator, &w, &h_pi, &[], o.lr).unwrap();
                h_pi.push(np.clone());
                h_d.push(nw.clone());
                (p, w) = (np, nw);
            }
        }
    }
}
