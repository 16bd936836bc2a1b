//! Coded schedules and the feasibility checks every scheme's output must pass.

use std::fmt;

use serde::Serialize;

use crate::channel::{achievable_rate, ChannelState, PowerVector};
use crate::model::{Instance, TransmitterKind};
use crate::scalar::Scalar;

/// Which layer of the scheduling graph produced an association: the file is
/// cached at the transmitter (`Cached`), or an SBS fetches it over the
/// fronthaul for a cache-miss user (`Fronthaul`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Layer {
    Cached,
    Fronthaul,
}

/// One transmitter's share of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transmission<S> {
    /// Targeted users, ascending.
    pub users: Vec<usize>,
    /// Layer of each targeted user, parallel to `users`.
    pub layers: Vec<Layer>,
    /// Files XOR-ed into the coded packet, ascending and distinct.
    pub files: Vec<usize>,
    /// Adopted transmission rate in bits/s.
    pub rate: S,
}

impl<S: Scalar> Transmission<S> {
    pub fn silent() -> Self {
        Self {
            users: Vec::new(),
            layers: Vec::new(),
            files: Vec::new(),
            rate: S::zero(),
        }
    }

    pub fn is_active(&self) -> bool {
        !self.users.is_empty()
    }
}

/// Per-transmitter coded transmissions for one frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule<S> {
    pub transmissions: Vec<Transmission<S>>,
}

impl<S: Scalar> Schedule<S> {
    pub fn empty(transmitters: usize) -> Self {
        Self {
            transmissions: (0..transmitters).map(|_| Transmission::silent()).collect(),
        }
    }

    pub fn num_transmitters(&self) -> usize {
        self.transmissions.len()
    }

    pub fn targets(&self, t: usize) -> &[usize] {
        &self.transmissions[t].users
    }

    pub fn is_active(&self, t: usize) -> bool {
        self.transmissions[t].is_active()
    }

    pub fn served_users(&self) -> usize {
        self.transmissions.iter().map(|x| x.users.len()).sum()
    }

    /// `sum_t |tau_t| * R_t` at the adopted rates.
    pub fn throughput(&self) -> S {
        self.transmissions
            .iter()
            .map(|x| S::lit(x.users.len() as f64) * x.rate)
            .fold(S::zero(), |a, b| a + b)
    }

    /// Re-adopt every rate as the bottleneck capacity under `powers`.
    pub fn readopt_rates(&mut self, instance: &Instance, channel: &ChannelState<S>, powers: &PowerVector<S>) {
        for (t, x) in self.transmissions.iter_mut().enumerate() {
            x.rate = x
                .users
                .iter()
                .map(|&n| achievable_rate(instance, channel, powers, n, t))
                .fold(None, |acc: Option<S>, r| Some(acc.map_or(r, |a| a.min(r))))
                .unwrap_or_else(S::zero);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateUser { user: usize },
    EmptyCombination { transmitter: usize },
    NotDecodable { user: usize, transmitter: usize, unknown: usize },
    RateInfeasible { user: usize, transmitter: usize },
    NotCached { user: usize, transmitter: usize, file: usize },
    IllegalFronthaul { user: usize, transmitter: usize },
    Malformed { transmitter: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateUser { user } => write!(f, "user {user} targeted more than once"),
            Violation::EmptyCombination { transmitter } => {
                write!(f, "transmitter {transmitter} targets users with no coded files")
            }
            Violation::NotDecodable { user, transmitter, unknown } => write!(
                f,
                "user {user} cannot decode transmitter {transmitter}: {unknown} unknown files"
            ),
            Violation::RateInfeasible { user, transmitter } => {
                write!(f, "rate of transmitter {transmitter} exceeds capacity of user {user}")
            }
            Violation::NotCached { user, transmitter, file } => write!(
                f,
                "transmitter {transmitter} sends uncached file {file} to user {user}"
            ),
            Violation::IllegalFronthaul { user, transmitter } => write!(
                f,
                "user {user} is served over the fronthaul by non-SBS or as cache-hit at {transmitter}"
            ),
            Violation::Malformed { transmitter } => write!(f, "transmitter {transmitter} entry is malformed"),
        }
    }
}

impl std::error::Error for Violation {}

fn payload(file: usize) -> u64 {
    let mut z = (file as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// XOR the coded packet with every known file and return what is left,
/// together with the number of files the user could not cancel.
pub fn decode_xor(files: &[usize], has: &crate::bits::BitSet) -> (u64, usize) {
    let packet = files.iter().fold(0u64, |acc, &f| acc ^ payload(f));
    let mut unknown = 0;
    let mut residue = packet;
    for &f in files {
        if has.contains(f) {
            residue ^= payload(f);
        } else {
            unknown += 1;
        }
    }
    (residue, unknown)
}

/// Check user uniqueness, instant decodability, rate feasibility at
/// `powers`, and the cache / fronthaul association rules.
pub fn validate<S: Scalar>(
    instance: &Instance,
    channel: &ChannelState<S>,
    powers: &PowerVector<S>,
    schedule: &Schedule<S>,
) -> Result<(), Violation> {
    let mut seen = vec![false; instance.num_users()];
    for (t, x) in schedule.transmissions.iter().enumerate() {
        if x.layers.len() != x.users.len() {
            return Err(Violation::Malformed { transmitter: t });
        }
        if !x.is_active() {
            continue;
        }
        if x.files.is_empty() {
            return Err(Violation::EmptyCombination { transmitter: t });
        }
        for (&n, &layer) in x.users.iter().zip(&x.layers) {
            if std::mem::replace(&mut seen[n], true) {
                return Err(Violation::DuplicateUser { user: n });
            }
            let want = instance.wants(n);
            let (residue, unknown) = decode_xor(&x.files, instance.has(n));
            if unknown != 1 || residue != payload(want) {
                return Err(Violation::NotDecodable {
                    user: n,
                    transmitter: t,
                    unknown,
                });
            }
            if x.rate > achievable_rate(instance, channel, powers, n, t) {
                return Err(Violation::RateInfeasible { user: n, transmitter: t });
            }
            match layer {
                Layer::Cached => {
                    if !instance.caches.files(t).contains(want) {
                        return Err(Violation::NotCached {
                            user: n,
                            transmitter: t,
                            file: want,
                        });
                    }
                }
                Layer::Fronthaul => {
                    if instance.kinds[t] != TransmitterKind::Sbs || !instance.classes.is_miss(n) {
                        return Err(Violation::IllegalFronthaul { user: n, transmitter: t });
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitSet;

    #[test]
    fn xor_decoding_recovers_the_single_unknown_file() {
        let has = BitSet::from_indices(8, [2, 5]);
        let (residue, unknown) = decode_xor(&[1, 2, 5], &has);
        assert_eq!(unknown, 1);
        assert_eq!(residue, payload(1));
        let (_, unknown) = decode_xor(&[1, 3], &has);
        assert_eq!(unknown, 2);
    }

    #[test]
    fn throughput_counts_targets_times_rate() {
        let mut s = Schedule::<f64>::empty(2);
        s.transmissions[0] = Transmission {
            users: vec![0, 1],
            layers: vec![Layer::Cached; 2],
            files: vec![3],
            rate: 2.5,
        };
        assert_eq!(s.throughput(), 5.0);
        assert_eq!(Schedule::<f64>::empty(3).throughput(), 0.0);
    }
}
