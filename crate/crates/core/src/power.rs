//! Power allocation for a fixed coded schedule by iterative function
//! evaluation.
//!
//! Setting the partial derivative of `sum_t |tau_t| * min_n R(n, t)` with
//! respect to `P_t` to zero gives
//!
//! ```text
//! P_t = |tau_t| * S_t / (1 + S_t)
//!       / sum_{l != t} |tau_l| * S_l^2 / (1 + S_l) * g[u_l][t] / (P_l * g[u_l][l])
//! ```
//!
//! where `u_l` is the bottleneck user of transmitter `l` and `S_l` its SINR.
//! The right-hand side is evaluated at the current powers for every
//! transmitter at once and projected onto `[0, P_max]`.
//!
//! A transmitter whose bottleneck sits on a binding fronthaul cap gains
//! nothing from extra power but still interferes with everyone else, so it is
//! backed off to the smallest power that keeps all its targets at the cap.

use serde::{Deserialize, Serialize};

use crate::channel::{achievable_rate, fronthaul_limited, interference, sinr, ChannelState, PowerVector};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::scalar::Scalar;
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IfeConfig {
    /// Stop once no power moves by more than `epsilon * P_max`.
    pub epsilon: f64,
    pub k_max: usize,
}

impl Default for IfeConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            k_max: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerIterationReport<S> {
    /// Iterate with the highest objective, the starting point included.
    pub powers: PowerVector<S>,
    /// Objective at `powers`.
    pub objective: S,
    /// Last iterate.
    pub final_powers: PowerVector<S>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective at the starting point and after every update.
    pub trace: Vec<S>,
    /// Every iterate, the starting point first.
    pub power_trace: Vec<PowerVector<S>>,
}

/// `sum_t |tau_t| * min_{n in tau_t} R(n, t)` with fronthaul caps applied.
pub fn objective<S: Scalar>(instance: &Instance, schedule: &Schedule<S>, channel: &ChannelState<S>, powers: &PowerVector<S>) -> S {
    let mut total = S::zero();
    for (t, x) in schedule.transmissions.iter().enumerate() {
        if let Some(min) = x
            .users
            .iter()
            .map(|&n| achievable_rate(instance, channel, powers, n, t))
            .reduce(S::min)
        {
            total = total + S::lit(x.users.len() as f64) * min;
        }
    }
    total
}

/// Targeted user of `t` with the smallest rate; ties go to the smaller id.
pub fn bottleneck_user<S: Scalar>(
    instance: &Instance,
    schedule: &Schedule<S>,
    channel: &ChannelState<S>,
    powers: &PowerVector<S>,
    t: usize,
) -> Result<usize> {
    let mut best: Option<(usize, S)> = None;
    for &n in schedule.targets(t) {
        let r = achievable_rate(instance, channel, powers, n, t);
        match best {
            Some((b, br)) if r > br || (r == br && n > b) => {}
            _ => best = Some((n, r)),
        }
    }
    best.map(|(n, _)| n).ok_or(Error::EmptyTargetSet { transmitter: t })
}

/// Per-transmitter quantities the update map needs at one power vector.
struct ActiveLink<S> {
    transmitter: usize,
    targets: S,
    bottleneck: usize,
    /// `S / (1 + S)` at the bottleneck user.
    efficiency: S,
    /// `1 + interference` at the bottleneck user.
    impairment: S,
    /// Bottleneck rate is held at the fronthaul capacity, so its local
    /// derivative with respect to every power is zero.
    capped: bool,
}

/// SINR at which the link rate reaches the fronthaul capacity.
fn cap_sinr<S: Scalar>(instance: &Instance) -> S {
    S::lit(2f64.powf(instance.scenario.fronthaul_capacity / instance.scenario.bandwidth) - 1.0)
}

fn active_links<S: Scalar>(
    instance: &Instance,
    schedule: &Schedule<S>,
    channel: &ChannelState<S>,
    powers: &PowerVector<S>,
) -> Vec<ActiveLink<S>> {
    // rounding after a back-off must not flip the link out of the cap
    let threshold = cap_sinr::<S>(instance) * (S::one() - S::epsilon() * S::lit(64.0));
    (0..schedule.num_transmitters())
        .filter(|&t| schedule.is_active(t))
        .map(|t| {
            let u = bottleneck_user(instance, schedule, channel, powers, t).expect("active transmitter");
            let s = sinr(channel, powers, u, t);
            ActiveLink {
                transmitter: t,
                targets: S::lit(schedule.targets(t).len() as f64),
                bottleneck: u,
                efficiency: s / (S::one() + s),
                impairment: interference(channel, powers, u, t),
                capped: fronthaul_limited(instance, u, t) && s >= threshold,
            }
        })
        .collect()
}

/// One simultaneous evaluation of the stationarity map, projected onto
/// `[0, p_max]`. Silent transmitters are switched off; transmitters whose
/// bottleneck is fronthaul-capped drop to the least power that still meets
/// the cap for every target.
pub fn power_update_step<S: Scalar>(
    instance: &Instance,
    schedule: &Schedule<S>,
    channel: &ChannelState<S>,
    powers: &PowerVector<S>,
    p_max: S,
) -> PowerVector<S> {
    let links = active_links(instance, schedule, channel, powers);
    let mut next = PowerVector::uniform(schedule.num_transmitters(), S::zero());
    for link in &links {
        let t = link.transmitter;
        if link.capped {
            let needed = schedule
                .targets(t)
                .iter()
                .map(|&n| cap_sinr::<S>(instance) * interference(channel, powers, n, t) / channel.gain(n, t))
                .fold(S::zero(), S::max);
            next.0[t] = needed.min(p_max);
            continue;
        }
        let numerator = link.targets * link.efficiency;
        let denominator = links
            .iter()
            .filter(|l| l.transmitter != t && !l.capped)
            .map(|l| l.targets * l.efficiency * channel.gain(l.bottleneck, t) / l.impairment)
            .fold(S::zero(), |a, b| a + b);
        next.0[t] = if denominator > S::zero() {
            (numerator / denominator).max(S::zero()).min(p_max)
        } else {
            p_max
        };
    }
    next
}

pub fn run_ife<S: Scalar>(
    instance: &Instance,
    schedule: &Schedule<S>,
    channel: &ChannelState<S>,
    initial: &PowerVector<S>,
    p_max: S,
    config: IfeConfig,
) -> PowerIterationReport<S> {
    let tolerance = S::lit(config.epsilon) * p_max;
    let mut current = initial.clone();
    let mut best = (objective(instance, schedule, channel, &current), current.clone());
    let mut trace = vec![best.0];
    let mut power_trace = vec![current.clone()];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.k_max.max(1) {
        iterations += 1;
        let next = power_update_step(instance, schedule, channel, &current, p_max);
        let moved = next
            .0
            .iter()
            .zip(&current.0)
            .map(|(&a, &b)| (a - b).abs())
            .fold(S::zero(), S::max);
        current = next;
        let value = objective(instance, schedule, channel, &current);
        trace.push(value);
        power_trace.push(current.clone());
        if value > best.0 {
            best = (value, current.clone());
        }
        if moved < tolerance {
            converged = true;
            break;
        }
    }
    PowerIterationReport {
        objective: best.0,
        powers: best.1,
        final_powers: current,
        iterations,
        converged,
        trace,
        power_trace,
    }
}

impl<S: Scalar> PowerIterationReport<S> {
    /// Delimited trace: `iteration,objective,p0,p1,...`.
    pub fn write_trace<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let t_count = self.final_powers.len();
        let header: Vec<String> = (0..t_count).map(|t| format!("p{t}")).collect();
        writeln!(out, "iteration,objective_bps,{}", header.join(","))?;
        for (k, (obj, p)) in self.trace.iter().zip(&self.power_trace).enumerate() {
            let powers: Vec<String> = p.0.iter().map(|x| format!("{:.16e}", x.as_f64())).collect();
            writeln!(out, "{k},{:.16e},{}", obj.as_f64(), powers.join(","))?;
        }
        Ok(())
    }
}
