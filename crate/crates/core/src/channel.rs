//! Node placement, channel realizations, SINR and achievable rates.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{stream_rng, Instance, Scenario, TransmitterKind, STREAM_CHANNEL, STREAM_PLACEMENT};
use crate::scalar::Scalar;

/// Node coordinates in metres. Users are on the ground.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub transmitters: Vec<[f64; 3]>,
    pub users: Vec<[f64; 2]>,
}

impl Placement {
    pub fn distance_km(&self, user: usize, transmitter: usize) -> f64 {
        let [ux, uy] = self.users[user];
        let [tx, ty, tz] = self.transmitters[transmitter];
        ((ux - tx).powi(2) + (uy - ty).powi(2) + tz.powi(2)).sqrt() / 1e3
    }

    pub fn check(&self, scenario: &Scenario) -> Result<()> {
        if self.transmitters.len() != scenario.num_transmitters() {
            return Err(Error::PlacementMismatch(format!(
                "{} transmitter positions for {} transmitters",
                self.transmitters.len(),
                scenario.num_transmitters()
            )));
        }
        if self.users.len() != scenario.num_users {
            return Err(Error::PlacementMismatch(format!(
                "{} user positions for {} users",
                self.users.len(),
                scenario.num_users
            )));
        }
        Ok(())
    }
}

/// Flat-topped regular hexagon with circumradius `radius`, centred at the origin.
pub fn in_hexagon(x: f64, y: f64, radius: f64) -> bool {
    let s3 = 3f64.sqrt();
    y.abs() <= radius * s3 / 2.0 && s3 * x.abs() + y.abs() <= s3 * radius
}

fn sample_hexagon<R: Rng>(rng: &mut R, radius: f64) -> [f64; 2] {
    let half_h = radius * 3f64.sqrt() / 2.0;
    loop {
        let x = rng.random_range(-radius..=radius);
        let y = rng.random_range(-half_h..=half_h);
        if in_hexagon(x, y, radius) {
            return [x, y];
        }
    }
}

/// SBSs and UAVs sit on a ring of radius `cell_radius / 2`; UAV angles are
/// offset by half a step so the two tiers interleave. D2D transmitters and
/// users are uniform over the hexagonal cell.
pub fn place_nodes(scenario: &Scenario, seed: u64) -> Placement {
    let ring = scenario.cell_radius / 2.0;
    let mut rng = stream_rng(seed, STREAM_PLACEMENT);
    let mut transmitters = Vec::with_capacity(scenario.num_transmitters());
    for _ in 0..scenario.num_d2d {
        let [x, y] = sample_hexagon(&mut rng, scenario.cell_radius);
        transmitters.push([x, y, 0.0]);
    }
    let k = scenario.num_sbs as f64;
    for i in 0..scenario.num_sbs {
        let a = std::f64::consts::TAU * i as f64 / k;
        transmitters.push([ring * a.cos(), ring * a.sin(), 0.0]);
    }
    let u = scenario.num_uav as f64;
    for i in 0..scenario.num_uav {
        let a = std::f64::consts::TAU * (i as f64 + 0.5) / u;
        transmitters.push([ring * a.cos(), ring * a.sin(), scenario.uav_altitude]);
    }
    let users = (0..scenario.num_users)
        .map(|_| sample_hexagon(&mut rng, scenario.cell_radius))
        .collect();
    Placement { transmitters, users }
}

/// Large- and small-scale fading switches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelOptions {
    pub shadowing_std_db: f64,
    pub rayleigh: bool,
}

impl Default for ChannelOptions {
    fn default() -> Self {
        Self {
            shadowing_std_db: 4.0,
            rayleigh: true,
        }
    }
}

impl ChannelOptions {
    /// Deterministic path loss only.
    pub fn path_loss_only() -> Self {
        Self {
            shadowing_std_db: 0.0,
            rayleigh: false,
        }
    }
}

pub fn path_loss_db(distance_km: f64) -> f64 {
    128.1 + 37.6 * distance_km.log10()
}

/// Channel-gain-to-noise ratios `gamma[n][t]`, linear, normalised by the
/// total noise power so that SINR denominators read `1 + interference`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState<S> {
    users: usize,
    transmitters: usize,
    cnr: Vec<S>,
}

impl<S: Scalar> ChannelState<S> {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let users = rows.len();
        let transmitters = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == transmitters), "ragged CNR matrix");
        Self {
            users,
            transmitters,
            cnr: rows.iter().flatten().map(|&g| S::lit(g)).collect(),
        }
    }

    #[inline]
    pub fn gain(&self, user: usize, transmitter: usize) -> S {
        self.cnr[user * self.transmitters + transmitter]
    }

    pub fn num_users(&self) -> usize {
        self.users
    }

    pub fn num_transmitters(&self) -> usize {
        self.transmitters
    }

    /// Same channel with transmitters reordered: column `i` of the result is
    /// column `order[i]` of `self`.
    pub fn permute_transmitters(&self, order: &[usize]) -> Self {
        let rows: Vec<Vec<f64>> = (0..self.users)
            .map(|n| order.iter().map(|&t| self.gain(n, t).as_f64()).collect())
            .collect();
        Self::from_rows(&rows)
    }
}

pub fn draw_channel<S: Scalar>(scenario: &Scenario, placement: &Placement, seed: u64) -> Result<ChannelState<S>> {
    draw_channel_with(scenario, placement, seed, ChannelOptions::default())
}

pub fn draw_channel_with<S: Scalar>(
    scenario: &Scenario,
    placement: &Placement,
    seed: u64,
    options: ChannelOptions,
) -> Result<ChannelState<S>> {
    placement.check(scenario)?;
    let noise = scenario.noise_power_watts();
    let mut rng = stream_rng(seed, STREAM_CHANNEL);
    let shadow = Normal::new(0.0, options.shadowing_std_db.max(0.0)).expect("finite std");
    let component = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("finite std");
    let t_count = scenario.num_transmitters();
    let mut cnr = Vec::with_capacity(scenario.num_users * t_count);
    for n in 0..scenario.num_users {
        for t in 0..t_count {
            let d = placement.distance_km(n, t);
            if d <= 0.0 {
                return Err(Error::CoLocated { user: n, transmitter: t });
            }
            let mut gain_db = -path_loss_db(d);
            if options.shadowing_std_db > 0.0 {
                gain_db += shadow.sample(&mut rng);
            }
            if options.rayleigh {
                let (re, im): (f64, f64) = (component.sample(&mut rng), component.sample(&mut rng));
                gain_db += 10.0 * (re * re + im * im).log10();
            }
            cnr.push(S::lit(10f64.powf(gain_db / 10.0) / noise));
        }
    }
    Ok(ChannelState {
        users: scenario.num_users,
        transmitters: t_count,
        cnr,
    })
}

/// Transmit power per transmitter, in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerVector<S>(pub Vec<S>);

impl<S: Scalar> PowerVector<S> {
    pub fn uniform(transmitters: usize, power: S) -> Self {
        Self(vec![power; transmitters])
    }

    #[inline]
    pub fn get(&self, t: usize) -> S {
        self.0[t]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn within(&self, max: S) -> bool {
        self.0.iter().all(|&p| p >= S::zero() && p <= max)
    }
}

/// Interference-plus-noise (noise normalised to one) seen by `user` when
/// decoding `transmitter`.
#[inline]
pub fn interference<S: Scalar>(channel: &ChannelState<S>, powers: &PowerVector<S>, user: usize, transmitter: usize) -> S {
    let mut acc = S::one();
    for m in 0..channel.num_transmitters() {
        if m != transmitter {
            acc = acc + powers.get(m) * channel.gain(user, m);
        }
    }
    acc
}

/// `P[t] g[n][t] / (1 + sum_{m != t} P[m] g[n][m])`.
#[inline]
pub fn sinr<S: Scalar>(channel: &ChannelState<S>, powers: &PowerVector<S>, user: usize, transmitter: usize) -> S {
    powers.get(transmitter) * channel.gain(user, transmitter) / interference(channel, powers, user, transmitter)
}

#[inline]
pub fn shannon_rate<S: Scalar>(bandwidth: S, sinr: S) -> S {
    bandwidth * sinr.ln_1p() / S::LN_2()
}

/// Whether the link goes through the fronthaul: SBS serving a cache-miss user.
pub fn fronthaul_limited(instance: &Instance, user: usize, transmitter: usize) -> bool {
    instance.kinds[transmitter] == TransmitterKind::Sbs && instance.classes.is_miss(user)
}

/// Rate of `user` from `transmitter`; capped by the fronthaul on SBS links
/// to cache-miss users.
pub fn achievable_rate<S: Scalar>(
    instance: &Instance,
    channel: &ChannelState<S>,
    powers: &PowerVector<S>,
    user: usize,
    transmitter: usize,
) -> S {
    let sc = &instance.scenario;
    let rate = shannon_rate(S::lit(sc.bandwidth), sinr(channel, powers, user, transmitter));
    if fronthaul_limited(instance, user, transmitter) {
        rate.min(S::lit(sc.fronthaul_capacity))
    } else {
        rate
    }
}

/// All `M x T` achievable rates, row-major by user.
pub fn rate_matrix<S: Scalar>(instance: &Instance, channel: &ChannelState<S>, powers: &PowerVector<S>) -> Vec<S> {
    let t_count = channel.num_transmitters();
    let mut out = Vec::with_capacity(channel.num_users() * t_count);
    for n in 0..channel.num_users() {
        for t in 0..t_count {
            out.push(achievable_rate(instance, channel, powers, n, t));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_instance;

    #[test]
    fn noise_power_over_ten_megahertz() {
        let s = Scenario::default();
        let expected_mw = 10f64.powf(-9.86);
        let got_mw = s.noise_power_watts() * 1e3;
        assert!((got_mw / expected_mw - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_kilometre_without_fading_is_pure_path_loss() {
        let s = Scenario {
            num_d2d: 0,
            num_uav: 0,
            num_sbs: 1,
            num_users: 1,
            ..Scenario::default()
        };
        let p = Placement {
            transmitters: vec![[0.0, 0.0, 0.0]],
            users: vec![[1000.0, 0.0]],
        };
        let ch: ChannelState<f64> = draw_channel_with(&s, &p, 1, ChannelOptions::path_loss_only()).unwrap();
        let gain_db = 10.0 * (ch.gain(0, 0) * s.noise_power_watts()).log10();
        assert!((gain_db + 128.1).abs() < 1e-9, "{gain_db}");
    }

    #[test]
    fn equidistant_users_see_equal_gain() {
        let s = Scenario {
            num_d2d: 0,
            num_uav: 0,
            num_sbs: 1,
            num_users: 2,
            ..Scenario::default()
        };
        let p = Placement {
            transmitters: vec![[10.0, 10.0, 0.0]],
            users: vec![[310.0, 10.0], [10.0, -290.0]],
        };
        let ch: ChannelState<f64> = draw_channel_with(&s, &p, 1, ChannelOptions::path_loss_only()).unwrap();
        assert!((ch.gain(0, 0) / ch.gain(1, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn colocated_nodes_are_rejected() {
        let s = Scenario {
            num_d2d: 0,
            num_uav: 0,
            num_sbs: 1,
            num_users: 1,
            ..Scenario::default()
        };
        let p = Placement {
            transmitters: vec![[5.0, 5.0, 0.0]],
            users: vec![[5.0, 5.0]],
        };
        let err = draw_channel::<f64>(&s, &p, 0).unwrap_err();
        assert!(matches!(err, Error::CoLocated { user: 0, transmitter: 0 }));
    }

    #[test]
    fn sinr_formula() {
        let ch = ChannelState::<f64>::from_rows(&[vec![1.0]]);
        assert_eq!(sinr(&ch, &PowerVector(vec![1.0]), 0, 0), 1.0);
        let ch = ChannelState::<f64>::from_rows(&[vec![3.0, 0.5, 0.5]]);
        assert_eq!(sinr(&ch, &PowerVector(vec![1.0, 1.0, 1.0]), 0, 0), 1.5);
        assert_eq!(sinr(&ch, &PowerVector(vec![0.0, 0.0, 0.0]), 0, 0), 0.0);
    }

    #[test]
    fn shannon_rate_at_unit_sinr() {
        assert!((shannon_rate(1.0f64, 1.0) - 1.0).abs() < 1e-15);
        assert!((shannon_rate(1.0f32, 1.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_sbs_sits_at_angle_zero() {
        let s = Scenario {
            num_sbs: 1,
            ..Scenario::default()
        };
        let p = place_nodes(&s, 9);
        assert_eq!(p.transmitters[s.num_d2d], [450.0, 0.0, 0.0]);
        let uav = p.transmitters[s.num_d2d + s.num_sbs];
        assert_eq!(uav[2], s.uav_altitude);
    }

    #[test]
    fn users_stay_inside_the_cell() {
        let s = Scenario {
            num_users: 1000,
            ..Scenario::default()
        };
        let p = place_nodes(&s, 1);
        for &[x, y] in &p.users {
            assert!(in_hexagon(x, y, 900.0));
            assert!((x * x + y * y).sqrt() <= 900.0 + 1e-9);
        }
        assert_eq!(p, place_nodes(&s, 1));
        assert_ne!(p, place_nodes(&s, 2));
    }

    #[test]
    fn fronthaul_caps_only_cache_miss_sbs_links() {
        let s = Scenario {
            num_d2d: 1,
            num_sbs: 1,
            num_uav: 1,
            num_users: 4,
            num_files: 5,
            caching_ratio: 0.0,
            fronthaul_capacity: 1.0,
            bandwidth: 1.0,
            ..Scenario::default()
        };
        let inst = generate_instance(&s).unwrap();
        let ch = ChannelState::<f64>::from_rows(&vec![vec![1.0, 1e6, 1.0]; 4]);
        let p = PowerVector(vec![1.0, 1.0, 1.0]);
        for n in 0..4 {
            assert_eq!(achievable_rate(&inst, &ch, &p, n, 1), 1.0);
            let uncapped = shannon_rate(1.0, sinr(&ch, &p, n, 0));
            assert_eq!(achievable_rate(&inst, &ch, &p, n, 0), uncapped);
        }
    }
}
