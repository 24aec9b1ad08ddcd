//! Synthetic startup-current transients and period-aligned trimming.
//!
//! A line-start permanent magnet synchronous motor drawn from standstill
//! pulls a large inrush current that decays toward the rated steady state
//! as the rotor synchronises. A machine with broken rotor bars synchronises
//! more slowly and its cage asymmetry amplitude-modulates the envelope at a
//! low fault frequency while the rotor still slips. [`generate_signal`]
//! models one phase current as
//!
//! ```text
//! i(t) = A(t) * sin(2 pi f' t) * m(t) + n(t)
//! A(t) = A_ss + (peak - 1) * A_ss * exp(-t / tau)
//! m(t) = 1 + depth * sin(2 pi f_m t) * exp(-t / tau)   (faulty only)
//! ```
//!
//! where `A_ss = rated * sqrt(2)`, `tau` is a third of the load-dependent
//! synchronisation time (stretched by a configured factor when faulty, and
//! the modulation decays on that same stretched constant), `f'` is the
//! mains frequency with a small per-record jitter, and `n` is white
//! Gaussian noise. Every record derives from a single seed, so datasets
//! are exactly reproducible.
//!
//! [`preprocess`] trims a raw capture to a whole number of fundamental
//! periods, anchored on zero crossings, so that the feature statistics are
//! not biased by fractional cycles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeding;

/// Health state of the simulated machine. Doubles as the class label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Healthy,
    Faulty,
}

impl Condition {
    /// Both conditions, in label order (healthy = class 0).
    pub const ALL: [Condition; 2] = [Condition::Healthy, Condition::Faulty];

    /// Class index used by counting code: healthy 0, faulty 1.
    pub fn class_index(self) -> usize {
        match self {
            Condition::Healthy => 0,
            Condition::Faulty => 1,
        }
    }

    /// The condition for a class index; panics on anything but 0 or 1.
    pub fn from_class_index(idx: usize) -> Self {
        match idx {
            0 => Condition::Healthy,
            1 => Condition::Faulty,
            _ => panic!("class index {idx} out of range"),
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Condition::Healthy => "healthy",
            Condition::Faulty => "faulty",
        })
    }
}

impl std::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "healthy" => Ok(Condition::Healthy),
            "faulty" => Ok(Condition::Faulty),
            _ => Err(Error::InvalidConfig(format!(
                "unrecognized condition {s:?}; expected \"healthy\" or \"faulty\""
            ))),
        }
    }
}

/// Mechanical load level, as a multiple of the rated torque.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Load {
    #[serde(rename = "0.0")]
    L0,
    #[serde(rename = "0.5")]
    L0_5,
    #[serde(rename = "1.0")]
    L1_0,
    #[serde(rename = "1.5")]
    L1_5,
}

impl Load {
    /// All four load points of the measurement plan.
    pub const ALL: [Load; 4] = [Load::L0, Load::L0_5, Load::L1_0, Load::L1_5];

    /// The torque multiple as a number.
    pub fn torque_multiple(self) -> f64 {
        match self {
            Load::L0 => 0.0,
            Load::L0_5 => 0.5,
            Load::L1_0 => 1.0,
            Load::L1_5 => 1.5,
        }
    }
}

impl std::fmt::Display for Load {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.1}", self.torque_multiple())
    }
}

impl std::str::FromStr for Load {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0.0" => Ok(Load::L0),
            "0.5" => Ok(Load::L0_5),
            "1.0" => Ok(Load::L1_0),
            "1.5" => Ok(Load::L1_5),
            _ => Err(Error::InvalidConfig(format!(
                "unrecognized load {s:?}; expected one of 0.0, 0.5, 1.0, 1.5"
            ))),
        }
    }
}

/// One value per load point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadTable<F> {
    pub l0: F,
    pub l0_5: F,
    pub l1_0: F,
    pub l1_5: F,
}

impl<F: Scalar> LoadTable<F> {
    pub fn get(&self, load: Load) -> F {
        match load {
            Load::L0 => self.l0,
            Load::L0_5 => self.l0_5,
            Load::L1_0 => self.l1_0,
            Load::L1_5 => self.l1_5,
        }
    }

    fn values(&self) -> [F; 4] {
        [self.l0, self.l0_5, self.l1_0, self.l1_5]
    }
}

/// Synchronisation completes after roughly three envelope time constants,
/// so the configured sync time maps to `tau = sync_time / 3`.
pub const SYNC_SETTLE_TIME_CONSTANTS: f64 = 3.0;

/// Number of fundamental periods every analysis window keeps.
pub const ANALYSIS_PERIODS: u32 = 40;

/// Knobs of the synthetic signal generator.
///
/// The defaults are tuned as a set. The fault modulation sits just below
/// the mains frequency, so its beat against the carrier leaves a slowly
/// decaying offset that raises the signed mean of a faulty window, and it
/// alternates sign between adjacent half-cycles, boosting the largest
/// peaks relative to the window's average level. The class structure is
/// therefore carried by `mean_index` first and the peak-ratio family
/// (`impulsion`, `crest_factor`, ...) second, while the near-unity sync
/// factor keeps scale features (`rms`, `energy`) almost flat: the fault
/// changes the waveform's shape, not its size. Change one value and that
/// balance shifts, so treat the defaults as a unit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default = "GeneratorConfig::default_f", bound = "F: Scalar")]
pub struct GeneratorConfig<F> {
    /// Mains frequency in Hz.
    pub fundamental_hz: F,
    /// Sampling frequency in Hz.
    pub sample_rate_hz: F,
    /// Rated phase current (RMS) in amperes.
    pub rated_current_a: F,
    /// Inrush envelope start, as a multiple of the steady-state amplitude.
    pub startup_peak_multiple: F,
    /// Healthy synchronisation time per load point, in seconds.
    pub sync_time_s: LoadTable<F>,
    /// Multiplier on the sync time when rotor bars are broken (> 1):
    /// degraded starting torque synchronises later. Kept close to 1 by
    /// default so the fault shows up in waveform shape, not window energy.
    pub fault_sync_time_factor: F,
    /// Amplitude modulation depth of the fault signature, in [0, 1).
    pub fault_modulation_depth: F,
    /// Frequency of the fault modulation in Hz, below the fundamental.
    /// The default is the lower sideband `f·(1 − 2s)` for a late-startup
    /// slip of about 0.04, i.e. a few hertz under the mains frequency.
    pub fault_modulation_hz: F,
    /// Standard deviation of the additive white noise, in amperes.
    pub noise_std_a: F,
    /// Half-width of the uniform relative jitter applied to the mains
    /// frequency per record.
    pub frequency_jitter_fraction: F,
    /// Fundamental periods synthesised per raw record. Must leave headroom
    /// over the trimmed analysis window.
    pub captured_periods: u32,
    /// Optional uniform amplitude quantisation (ADC bit depth). `None`
    /// keeps continuous amplitudes.
    pub quantize_bits: Option<u8>,
}

impl<F: Scalar> GeneratorConfig<F> {
    fn default_f() -> Self {
        let c = |v: f64| F::from_f64_lossy(v);
        GeneratorConfig {
            fundamental_hz: c(50.0),
            sample_rate_hz: c(5000.0),
            rated_current_a: c(1.3),
            startup_peak_multiple: c(5.0),
            sync_time_s: LoadTable {
                l0: c(0.58),
                l0_5: c(0.60),
                l1_0: c(0.62),
                l1_5: c(0.64),
            },
            fault_sync_time_factor: c(1.02),
            fault_modulation_depth: c(0.085),
            fault_modulation_hz: c(46.0),
            noise_std_a: c(0.03),
            frequency_jitter_fraction: c(0.006),
            captured_periods: 46,
            quantize_bits: None,
        }
    }

    /// Checks every field against its documented range.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        let finite_pos = |v: F| v.is_finite() && v > F::zero();
        if !finite_pos(self.fundamental_hz) {
            return bad("fundamental_hz must be finite and positive");
        }
        if !finite_pos(self.sample_rate_hz) {
            return bad("sample_rate_hz must be finite and positive");
        }
        let two = F::from_f64_lossy(2.0);
        if self.sample_rate_hz <= two * self.fundamental_hz {
            return bad("sample_rate_hz must exceed twice fundamental_hz");
        }
        if !finite_pos(self.rated_current_a) {
            return bad("rated_current_a must be finite and positive");
        }
        if !self.startup_peak_multiple.is_finite() || self.startup_peak_multiple < F::one() {
            return bad("startup_peak_multiple must be at least 1");
        }
        if self.sync_time_s.values().iter().any(|v| !finite_pos(*v)) {
            return bad("sync_time_s entries must be finite and positive");
        }
        if !self.fault_sync_time_factor.is_finite() || self.fault_sync_time_factor < F::one() {
            return bad("fault_sync_time_factor must be at least 1");
        }
        if !self.fault_modulation_depth.is_finite()
            || self.fault_modulation_depth < F::zero()
            || self.fault_modulation_depth >= F::one()
        {
            return bad("fault_modulation_depth must lie in [0, 1)");
        }
        if !self.fault_modulation_hz.is_finite()
            || self.fault_modulation_hz < F::zero()
            || self.fault_modulation_hz >= self.sample_rate_hz / two
        {
            return bad("fault_modulation_hz must lie in [0, sample_rate_hz / 2)");
        }
        if !self.noise_std_a.is_finite() || self.noise_std_a < F::zero() {
            return bad("noise_std_a must be finite and non-negative");
        }
        if !self.frequency_jitter_fraction.is_finite()
            || self.frequency_jitter_fraction < F::zero()
            || self.frequency_jitter_fraction > F::from_f64_lossy(0.05)
        {
            return bad("frequency_jitter_fraction must lie in [0, 0.05]");
        }
        if self.captured_periods < ANALYSIS_PERIODS + 5 {
            return bad("captured_periods must leave at least 5 periods of headroom over the 40-period analysis window");
        }
        if let Some(bits) = self.quantize_bits {
            if !(2..=24).contains(&bits) {
                return bad("quantize_bits must lie in 2..=24");
            }
        }
        Ok(())
    }
}

impl<F: Scalar> Default for GeneratorConfig<F> {
    fn default() -> Self {
        Self::default_f()
    }
}

/// One captured (or synthesised) startup transient with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalRecord<F> {
    pub condition: Condition,
    pub load: Load,
    /// Index of the record within its dataset.
    pub trial_id: u32,
    pub sample_rate_hz: F,
    /// The seed this record was generated from.
    pub seed: u64,
    pub samples: Vec<F>,
}

/// Synthesises one startup transient.
///
/// The record is a pure function of `(cfg, condition, load, seed)`;
/// `trial_id` is carried through as provenance only. Draw order inside the
/// record's RNG stream is fixed: one uniform for the frequency jitter,
/// then one normal per sample.
pub fn generate_signal<F: Scalar>(
    cfg: &GeneratorConfig<F>,
    condition: Condition,
    load: Load,
    trial_id: u32,
    seed: u64,
) -> Result<SignalRecord<F>> {
    cfg.validate()?;
    let mut rng = seeding::rng(seed);
    let one = F::one();
    let two = F::from_f64_lossy(2.0);
    let tau_pi = F::from_f64_lossy(std::f64::consts::TAU);

    let jitter = (two * F::unit_uniform(&mut rng) - one) * cfg.frequency_jitter_fraction;
    let freq = cfg.fundamental_hz * (one + jitter);
    let omega = tau_pi * freq;
    let omega_mod = tau_pi * cfg.fault_modulation_hz;

    let a_ss = cfg.rated_current_a * two.sqrt();
    let excess = (cfg.startup_peak_multiple - one) * a_ss;
    let sync = cfg.sync_time_s.get(load)
        * match condition {
            Condition::Healthy => one,
            Condition::Faulty => cfg.fault_sync_time_factor,
        };
    let tau = sync / F::from_f64_lossy(SYNC_SETTLE_TIME_CONSTANTS);

    let periods = F::from_u32(cfg.captured_periods).expect("period count fits the scalar");
    let n = (periods * cfg.sample_rate_hz / freq)
        .ceil()
        .to_usize()
        .ok_or_else(|| Error::InvalidConfig("record length overflows".to_string()))?
        + 1;

    let quant = cfg.quantize_bits.map(|bits| {
        let full_scale =
            cfg.startup_peak_multiple * a_ss * (one + cfg.fault_modulation_depth);
        let levels = F::from_f64_lossy((1u64 << bits) as f64);
        (full_scale, two * full_scale / levels)
    });

    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let t = F::from_usize(k).expect("sample index fits the scalar") / cfg.sample_rate_hz;
        let decay = (-t / tau).exp();
        let envelope = a_ss + excess * decay;
        let modulation = match condition {
            Condition::Healthy => one,
            Condition::Faulty => {
                one + cfg.fault_modulation_depth * (omega_mod * t).sin() * decay
            }
        };
        let mut x = envelope * (omega * t).sin() * modulation
            + cfg.noise_std_a * F::standard_normal(&mut rng);
        if let Some((full_scale, step)) = quant {
            x = (x / step).round() * step;
            x = x.max(-full_scale).min(full_scale);
        }
        samples.push(x);
    }

    Ok(SignalRecord {
        condition,
        load,
        trial_id,
        sample_rate_hz: cfg.sample_rate_hz,
        seed,
        samples,
    })
}

/// Synthesises the full measurement plan: `trials_per_cell` records for
/// every (condition, load) cell, 8 cells total.
///
/// Record `i` uses the child seed `derive_seed(seed, i)`, so any record can
/// be regenerated alone and extending the dataset never changes existing
/// records. Records are ordered condition-major (all healthy first), then
/// by load, then by trial.
pub fn generate_dataset<F: Scalar>(
    cfg: &GeneratorConfig<F>,
    trials_per_cell: u32,
    seed: u64,
) -> Result<Vec<SignalRecord<F>>> {
    if trials_per_cell == 0 {
        return Err(Error::InvalidConfig(
            "trials_per_cell must be at least 1".to_string(),
        ));
    }
    cfg.validate()?;
    let mut records =
        Vec::with_capacity(2 * Load::ALL.len() * trials_per_cell as usize);
    let mut index: u32 = 0;
    for condition in Condition::ALL {
        for load in Load::ALL {
            for _ in 0..trials_per_cell {
                let child = seeding::derive_seed(seed, u64::from(index));
                records.push(generate_signal(cfg, condition, load, index, child)?);
                index += 1;
            }
        }
    }
    Ok(records)
}

/// How close (in samples) a projected crossing must be to the window edge
/// for the edge sample to stand in for the crossing itself.
const EDGE_GRACE_SAMPLES: f64 = 2.0;

/// A linearly interpolated zero crossing between two samples.
struct Crossing {
    /// Sub-sample position of the sign change.
    pos: f64,
    /// Sample index nearest to `pos`.
    nearest: usize,
    /// True when the signal passes from negative to non-negative.
    rising: bool,
}

fn find_crossings<F: Scalar>(s: &[F]) -> Vec<Crossing> {
    let neg = |v: F| v < F::zero();
    let mut out = Vec::new();
    for k in 0..s.len().saturating_sub(1) {
        if neg(s[k]) != neg(s[k + 1]) {
            let a = s[k].into_f64();
            let b = s[k + 1].into_f64();
            let pos = k as f64 + a / (a - b);
            out.push(Crossing {
                pos,
                nearest: pos.round() as usize,
                rising: neg(s[k]),
            });
        }
    }
    out
}

/// Trims a raw record to exactly `periods` fundamental periods.
///
/// The window starts at the sample nearest the first rising zero crossing
/// and ends at the sample nearest the crossing `2 * periods` sign changes
/// later. Two grace rules make the operation a projection (applying it to
/// its own output returns the input bit for bit) even though the trimmed
/// window hides the half-samples beyond its edge crossings:
///
/// * if the first detected crossing is falling but sits about half a
///   period in (within [`EDGE_GRACE_SAMPLES`] of the median crossing
///   spacing), sample 0 is taken as the rising start that was trimmed to;
/// * if exactly one crossing is missing at the end and the final sample
///   sits within [`EDGE_GRACE_SAMPLES`] of where that crossing projects to,
///   the final sample closes the window.
pub fn preprocess<F: Scalar>(raw: &SignalRecord<F>, periods: u32) -> Result<SignalRecord<F>> {
    if periods == 0 {
        return Err(Error::InvalidConfig("periods must be at least 1".to_string()));
    }
    let s = &raw.samples;
    if s.len() < 2 {
        return Err(Error::EmptySignal);
    }

    let crossings = find_crossings(s);
    if crossings.is_empty() {
        return Err(Error::NoCrossings);
    }
    let insufficient = |found_crossings: usize| Error::InsufficientSignal {
        needed: periods,
        found: (found_crossings / 2) as u32,
    };
    if crossings.len() < 2 {
        return Err(insufficient(0));
    }

    // Median spacing between consecutive crossings estimates the
    // half-period; robust to the odd spurious crossing.
    let mut spacings: Vec<f64> = crossings
        .windows(2)
        .map(|w| w[1].pos - w[0].pos)
        .collect();
    spacings.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite spacing"));
    let half_period = spacings[spacings.len() / 2];

    // Anchor the start: a rising crossing, or sample 0 standing in for one.
    let (start, counted_from) = if !crossings[0].rising
        && (crossings[0].pos - half_period).abs() <= EDGE_GRACE_SAMPLES
    {
        (0usize, 0usize)
    } else {
        match crossings.iter().position(|c| c.rising) {
            Some(i) => (crossings[i].nearest, i + 1),
            None => return Err(insufficient(0)),
        }
    };

    let needed = 2 * periods as usize;
    let available = crossings.len() - counted_from;
    let end = if available >= needed {
        crossings[counted_from + needed - 1].nearest
    } else if available == needed - 1 {
        let last = crossings.last().expect("nonempty");
        let projected = last.pos + half_period;
        let final_index = (s.len() - 1) as f64;
        if (final_index - projected).abs() <= EDGE_GRACE_SAMPLES {
            s.len() - 1
        } else {
            return Err(insufficient(available));
        }
    } else {
        return Err(insufficient(available));
    };

    if end <= start {
        return Err(insufficient(available));
    }

    Ok(SignalRecord {
        condition: raw.condition,
        load: raw.load,
        trial_id: raw.trial_id,
        sample_rate_hz: raw.sample_rate_hz,
        seed: raw.seed,
        samples: s[start..=end].to_vec(),
    })
}
