//! Network scenario: transmitters, caches, user side information and demands.
//!
//! Transmitters are indexed `0..T` with D2D transmitters first, then SBSs,
//! then UAVs. Users are indexed `0..M` and never act as transmitters.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::error::{Error, Result};

/// RNG stream ids; one seed drives several independent streams.
pub(crate) const STREAM_INSTANCE: u64 = 0;
pub(crate) const STREAM_PLACEMENT: u64 = 1;
pub(crate) const STREAM_CHANNEL: u64 = 2;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransmitterKind {
    D2d,
    Sbs,
    Uav,
}

impl TransmitterKind {
    /// Only UAV and D2D caches make a user cache-hit.
    pub fn serves_cache_hits(self) -> bool {
        !matches!(self, TransmitterKind::Sbs)
    }
}

/// How requested files are drawn from a user's Lacks set.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandModel {
    #[default]
    Uniform,
    /// Rank popularity `1/(rank+1)^exponent`, file 0 most popular.
    Zipf { exponent: f64 },
}

/// Which transmitter tiers keep their caches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CachingLevel {
    /// SBS, UAV and D2D caches.
    #[default]
    ThreeLevel,
    /// SBS and UAV caches; D2D caches empty.
    TwoLevel,
    /// Every cache empty.
    NoCaching,
}

impl CachingLevel {
    pub fn label(self) -> &'static str {
        match self {
            CachingLevel::ThreeLevel => "three-level",
            CachingLevel::TwoLevel => "two-level",
            CachingLevel::NoCaching => "no-caching",
        }
    }

    fn keeps(self, kind: TransmitterKind) -> bool {
        match self {
            CachingLevel::ThreeLevel => true,
            CachingLevel::TwoLevel => kind != TransmitterKind::D2d,
            CachingLevel::NoCaching => false,
        }
    }
}

/// Static network description. Powers and noise are spectral densities;
/// capacities and bandwidth are in bits/s and Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub num_d2d: usize,
    pub num_sbs: usize,
    pub num_uav: usize,
    pub num_users: usize,
    pub num_files: usize,
    pub caching_ratio: f64,
    pub fronthaul_capacity: f64,
    pub bandwidth: f64,
    pub noise_psd_dbm_hz: f64,
    pub max_power_psd_dbm_hz: f64,
    pub cell_radius: f64,
    pub uav_altitude: f64,
    pub side_info_ratio: f64,
    pub demand: DemandModel,
    pub rng_seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            num_d2d: 3,
            num_sbs: 3,
            num_uav: 2,
            num_users: 15,
            num_files: 30,
            caching_ratio: 0.6,
            fronthaul_capacity: 10e6,
            bandwidth: 10e6,
            noise_psd_dbm_hz: -168.60,
            max_power_psd_dbm_hz: -42.60,
            cell_radius: 900.0,
            uav_altitude: 100.0,
            side_info_ratio: 0.3,
            demand: DemandModel::Uniform,
            rng_seed: 0,
        }
    }
}

fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

impl Scenario {
    pub fn num_transmitters(&self) -> usize {
        self.num_d2d + self.num_sbs + self.num_uav
    }

    pub fn kinds(&self) -> Vec<TransmitterKind> {
        let mut kinds = Vec::with_capacity(self.num_transmitters());
        kinds.extend(std::iter::repeat_n(TransmitterKind::D2d, self.num_d2d));
        kinds.extend(std::iter::repeat_n(TransmitterKind::Sbs, self.num_sbs));
        kinds.extend(std::iter::repeat_n(TransmitterKind::Uav, self.num_uav));
        kinds
    }

    /// Files stored per transmitter, `floor(mu * F)`.
    pub fn cache_size(&self) -> usize {
        // The epsilon absorbs products such as 0.29 * 100 = 28.999...
        ((self.caching_ratio * self.num_files as f64 + 1e-9).floor() as usize).min(self.num_files)
    }

    pub fn has_size(&self) -> usize {
        (self.side_info_ratio * self.num_files as f64 + 1e-9).floor() as usize
    }

    /// Total transmit power budget in watts (density integrated over the band).
    pub fn max_power_watts(&self) -> f64 {
        dbm_to_watts(self.max_power_psd_dbm_hz) * self.bandwidth
    }

    /// Total noise power in watts.
    pub fn noise_power_watts(&self) -> f64 {
        dbm_to_watts(self.noise_psd_dbm_hz) * self.bandwidth
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("num_d2d", self.num_d2d),
            ("num_sbs", self.num_sbs),
            ("num_uav", self.num_uav),
            ("num_users", self.num_users),
            ("num_files", self.num_files),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidScenario(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..=1.0).contains(&self.caching_ratio) {
            return Err(Error::InvalidScenario(format!(
                "caching_ratio {} outside [0, 1]",
                self.caching_ratio
            )));
        }
        if !(0.0..1.0).contains(&self.side_info_ratio) {
            return Err(Error::InvalidScenario(format!(
                "side_info_ratio {} outside [0, 1)",
                self.side_info_ratio
            )));
        }
        // Zero fronthaul is accepted: it models a disconnected cloud link.
        if !(self.fronthaul_capacity >= 0.0) {
            return Err(Error::InvalidScenario("fronthaul_capacity must be non-negative".into()));
        }
        if !(self.bandwidth > 0.0) {
            return Err(Error::InvalidScenario("bandwidth must be positive".into()));
        }
        if !(self.cell_radius > 0.0) {
            return Err(Error::InvalidScenario("cell_radius must be positive".into()));
        }
        if let DemandModel::Zipf { exponent } = self.demand {
            if !(exponent >= 0.0) {
                return Err(Error::InvalidScenario("zipf exponent must be non-negative".into()));
            }
        }
        Ok(())
    }
}

/// Per-transmitter cached file sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CacheAllocation(pub Vec<BitSet>);

impl CacheAllocation {
    pub fn files(&self, t: usize) -> &BitSet {
        &self.0[t]
    }
}

/// Has sets and the single wanted file of every user. Lacks sets are the
/// complement of Has and are never stored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideInformation {
    pub has: Vec<BitSet>,
    pub wants: Vec<usize>,
}

impl SideInformation {
    pub fn lacks(&self, user: usize) -> BitSet {
        let has = &self.has[user];
        let mut lacks = BitSet::full(has.capacity());
        lacks.difference_with(has);
        lacks
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UserClass {
    CacheHit,
    CacheMiss,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserClassification(pub Vec<UserClass>);

impl UserClassification {
    pub fn class(&self, user: usize) -> UserClass {
        self.0[user]
    }

    pub fn is_miss(&self, user: usize) -> bool {
        self.0[user] == UserClass::CacheMiss
    }

    pub fn count(&self, class: UserClass) -> usize {
        self.0.iter().filter(|&&c| c == class).count()
    }
}

/// A user is cache-hit iff some UAV or D2D transmitter caches its wanted file.
pub fn classify_users(
    caches: &CacheAllocation,
    side: &SideInformation,
    kinds: &[TransmitterKind],
) -> UserClassification {
    UserClassification(
        side.wants
            .iter()
            .map(|&f| {
                let hit = kinds
                    .iter()
                    .enumerate()
                    .any(|(t, k)| k.serves_cache_hits() && caches.files(t).contains(f));
                if hit {
                    UserClass::CacheHit
                } else {
                    UserClass::CacheMiss
                }
            })
            .collect(),
    )
}

/// A generated network instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub scenario: Scenario,
    pub kinds: Vec<TransmitterKind>,
    pub caches: CacheAllocation,
    pub side: SideInformation,
    pub classes: UserClassification,
}

impl Instance {
    /// Assemble an instance from explicit caches and side information.
    pub fn from_parts(scenario: Scenario, caches: Vec<BitSet>, side: SideInformation) -> Result<Self> {
        scenario.validate()?;
        let f = scenario.num_files;
        let kinds = scenario.kinds();
        if caches.len() != kinds.len() {
            return Err(Error::InvalidScenario(format!(
                "{} cache sets for {} transmitters",
                caches.len(),
                kinds.len()
            )));
        }
        if side.has.len() != scenario.num_users || side.wants.len() != scenario.num_users {
            return Err(Error::InvalidScenario("side information size differs from num_users".into()));
        }
        if caches.iter().chain(&side.has).any(|s| s.capacity() != f) {
            return Err(Error::InvalidScenario("file set capacity differs from num_files".into()));
        }
        for (n, (&w, has)) in side.wants.iter().zip(&side.has).enumerate() {
            if w >= f || has.contains(w) {
                return Err(Error::InvalidScenario(format!("user {n} wants file {w} it cannot request")));
            }
        }
        let caches = CacheAllocation(caches);
        let classes = classify_users(&caches, &side, &kinds);
        Ok(Self {
            scenario,
            kinds,
            caches,
            side,
            classes,
        })
    }

    pub fn num_users(&self) -> usize {
        self.side.wants.len()
    }

    pub fn num_transmitters(&self) -> usize {
        self.kinds.len()
    }

    pub fn wants(&self, user: usize) -> usize {
        self.side.wants[user]
    }

    pub fn has(&self, user: usize) -> &BitSet {
        &self.side.has[user]
    }

    /// Drop the caches of tiers excluded by `level` and reclassify users.
    pub fn with_caching_level(&self, level: CachingLevel) -> Self {
        let mut out = self.clone();
        for (t, kind) in self.kinds.iter().enumerate() {
            if !level.keeps(*kind) {
                out.caches.0[t].clear();
            }
        }
        out.classes = classify_users(&out.caches, &out.side, &out.kinds);
        out
    }
}

/// Draw caches, Has sets and demands; fully determined by `rng_seed`.
pub fn generate_instance(scenario: &Scenario) -> Result<Instance> {
    scenario.validate()?;
    let f = scenario.num_files;
    let has_size = scenario.has_size();
    if has_size >= f {
        return Err(Error::NoFileToRequest { has: has_size, files: f });
    }
    let cache_size = scenario.cache_size();
    let mut rng = stream_rng(scenario.rng_seed, STREAM_INSTANCE);

    let caches = (0..scenario.num_transmitters())
        .map(|_| BitSet::from_indices(f, index::sample(&mut rng, f, cache_size)))
        .collect();

    let zipf = match scenario.demand {
        DemandModel::Uniform => None,
        DemandModel::Zipf { exponent } => Some(
            rand_distr::Zipf::new(f as f64, exponent)
                .map_err(|e| Error::InvalidScenario(format!("zipf demand: {e}")))?,
        ),
    };

    let mut has = Vec::with_capacity(scenario.num_users);
    let mut wants = Vec::with_capacity(scenario.num_users);
    for _ in 0..scenario.num_users {
        let h = BitSet::from_indices(f, index::sample(&mut rng, f, has_size));
        let want = match &zipf {
            None => {
                let lacks: Vec<usize> = (0..f).filter(|&x| !h.contains(x)).collect();
                lacks[rng.random_range(0..lacks.len())]
            }
            Some(z) => loop {
                let rank = rng.sample(z) as usize - 1;
                if !h.contains(rank) {
                    break rank;
                }
            },
        };
        has.push(h);
        wants.push(want);
    }

    Instance::from_parts(scenario.clone(), caches, SideInformation { has, wants })
}
