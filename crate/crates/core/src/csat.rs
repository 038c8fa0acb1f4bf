//! Energy-based carrier-sense adaptive transmission (CSAT).
//!
//! The LTE-U BS listens during each OFF window and records the strongest
//! Wi-Fi energy it saw. After `n_windows` windows it decides: if at least
//! `k_required` windows carried energy at or above the threshold, and the
//! mean energy of those windows is also above it, Wi-Fi is present and the
//! low duty cycle is used; otherwise the high one.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, CsatError};
use crate::params::DutyCycle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsatConfig {
    /// OFF windows per observation round.
    pub n_windows: u32,
    /// Detections needed in a round to declare Wi-Fi present.
    pub k_required: u32,
    pub ed_threshold_dbm: f64,
    /// Used while no Wi-Fi is detected.
    pub high_duty: DutyCycle,
    /// Used once Wi-Fi is detected.
    pub low_duty: DutyCycle,
    /// Extra latency between a decision and the duty change.
    pub hw_delay_us: u64,
    /// Start at `high_duty` instead of `low_duty`.
    pub start_high: bool,
}

impl Default for CsatConfig {
    fn default() -> Self {
        Self {
            n_windows: 30,
            k_required: 5,
            ed_threshold_dbm: -70.0,
            high_duty: DutyCycle::PCT80,
            low_duty: DutyCycle::PCT50,
            hw_delay_us: 0,
            start_high: false,
        }
    }
}

impl CsatConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k_required == 0 || self.n_windows < self.k_required {
            return Err(ConfigError::CsatWindows {
                n: self.n_windows,
                k: self.k_required,
            });
        }
        self.high_duty.validate()?;
        self.low_duty.validate()?;
        if self.high_duty.fraction() <= self.low_duty.fraction() {
            return Err(ConfigError::CsatOrdering {
                high: self.high_duty.to_string(),
                low: self.low_duty.to_string(),
            });
        }
        Ok(())
    }

    pub fn initial_duty(&self) -> DutyCycle {
        if self.start_high {
            self.high_duty
        } else {
            self.low_duty
        }
    }
}

/// A Wi-Fi transmission as seen by the LTE-U BS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowOccupant {
    pub start_us: u64,
    pub end_us: u64,
    pub power_dbm: f64,
}

/// Strongest energy from any transmission overlapping `[start, end)`, or the
/// noise floor when the window was empty.
pub fn measure_window(
    window_start_us: u64,
    window_end_us: u64,
    occupants: &[WindowOccupant],
    noise_floor_dbm: f64,
) -> f64 {
    occupants
        .iter()
        .filter(|o| o.start_us < window_end_us && window_start_us < o.end_us)
        .map(|o| o.power_dbm)
        .fold(noise_floor_dbm, f64::max)
}

/// Mean of dBm values taken in the milliwatt domain.
pub fn linear_mean_dbm(samples: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = samples
        .into_iter()
        .fold((0.0, 0usize), |(s, n), dbm| (s + 10f64.powf(dbm / 10.0), n + 1));
    (n > 0).then(|| 10.0 * (sum / n as f64).log10())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsatState {
    pub current_duty: DutyCycle,
    /// Windows at or above the threshold this round.
    pub count1: u32,
    /// Windows below the threshold this round. Telemetry only.
    pub count2: u32,
    pub ed_samples_dbm: Vec<f64>,
    pub windows_observed: u32,
}

/// Result of closing an observation round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub duty: DutyCycle,
    pub wifi_detected: bool,
    pub count1: u32,
    pub count2: u32,
    /// Linear mean over the detected windows, if any.
    pub mean_detected_dbm: Option<f64>,
}

impl CsatState {
    pub fn new(config: &CsatConfig) -> Self {
        Self {
            current_duty: config.initial_duty(),
            count1: 0,
            count2: 0,
            ed_samples_dbm: Vec::with_capacity(config.n_windows as usize),
            windows_observed: 0,
        }
    }

    pub fn round_complete(&self, config: &CsatConfig) -> bool {
        self.windows_observed >= config.n_windows
    }

    pub fn observe(&mut self, config: &CsatConfig, window_dbm: f64) -> Result<(), CsatError> {
        if self.windows_observed >= config.n_windows {
            return Err(CsatError::RoundOverflow(self.windows_observed));
        }
        self.ed_samples_dbm.push(window_dbm);
        if window_dbm >= config.ed_threshold_dbm {
            self.count1 += 1;
        } else {
            self.count2 += 1;
        }
        self.windows_observed += 1;
        Ok(())
    }

    /// Close the round and pick the duty cycle for the coming cycles.
    pub fn decide(&mut self, config: &CsatConfig) -> Result<Decision, CsatError> {
        if self.windows_observed < config.n_windows {
            return Err(CsatError::CalledEarly {
                observed: self.windows_observed,
                required: config.n_windows,
            });
        }
        let threshold = config.ed_threshold_dbm;
        let mean_detected_dbm =
            linear_mean_dbm(self.ed_samples_dbm.iter().copied().filter(|&d| d >= threshold));
        let wifi_detected = self.count1 >= config.k_required
            && mean_detected_dbm.is_some_and(|m| m >= threshold);
        let decision = Decision {
            duty: if wifi_detected {
                config.low_duty
            } else {
                config.high_duty
            },
            wifi_detected,
            count1: self.count1,
            count2: self.count2,
            mean_detected_dbm,
        };
        self.current_duty = decision.duty;
        self.count1 = 0;
        self.count2 = 0;
        self.ed_samples_dbm.clear();
        self.windows_observed = 0;
        Ok(decision)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> CsatConfig {
        CsatConfig::default()
    }

    fn occ(start_us: u64, end_us: u64, power_dbm: f64) -> WindowOccupant {
        WindowOccupant {
            start_us,
            end_us,
            power_dbm,
        }
    }

    #[test]
    fn measure_empty_window_is_noise_floor() {
        assert_eq!(measure_window(0, 1_000, &[], -95.0), -95.0);
    }

    #[test]
    fn measure_takes_strongest_overlap() {
        let beacon = occ(100, 527, -60.0);
        let probe = occ(600, 780, -65.0);
        assert_eq!(measure_window(0, 1_000, &[beacon], -95.0), -60.0);
        assert_eq!(measure_window(0, 1_000, &[probe, beacon], -95.0), -60.0);
        // Half-open windows: touching at an edge is not overlap.
        assert_eq!(measure_window(527, 1_000, &[beacon], -95.0), -95.0);
        assert_eq!(measure_window(0, 100, &[beacon], -95.0), -95.0);
        // Partial overlap counts.
        assert_eq!(measure_window(500, 1_000, &[beacon], -95.0), -60.0);
    }

    #[test]
    fn observe_counts_against_threshold() {
        let c = cfg();
        let mut s = CsatState::new(&c);
        s.observe(&c, -60.0).unwrap();
        assert_eq!((s.count1, s.count2), (1, 0));
        s.observe(&c, -95.0).unwrap();
        assert_eq!((s.count1, s.count2), (1, 1));
        s.observe(&c, -70.0).unwrap();
        assert_eq!((s.count1, s.count2), (2, 1));
        assert_eq!(s.windows_observed, 3);
    }

    #[test]
    fn observe_past_round_is_an_error() {
        let c = CsatConfig {
            n_windows: 2,
            k_required: 1,
            ..cfg()
        };
        let mut s = CsatState::new(&c);
        s.observe(&c, -95.0).unwrap();
        s.observe(&c, -95.0).unwrap();
        assert_eq!(s.observe(&c, -95.0), Err(CsatError::RoundOverflow(2)));
    }

    #[test]
    fn decide_before_round_end_is_an_error() {
        let c = cfg();
        let mut s = CsatState::new(&c);
        s.observe(&c, -60.0).unwrap();
        assert_eq!(
            s.decide(&c),
            Err(CsatError::CalledEarly {
                observed: 1,
                required: 30
            })
        );
    }

    fn round(c: &CsatConfig, samples: &[f64]) -> Decision {
        let mut s = CsatState {
            current_duty: c.high_duty,
            ..CsatState::new(c)
        };
        for &d in samples {
            s.observe(c, d).unwrap();
        }
        let d = s.decide(c).unwrap();
        assert_eq!(s.windows_observed, 0);
        assert_eq!((s.count1, s.count2), (0, 0));
        assert!(s.ed_samples_dbm.is_empty());
        assert_eq!(s.current_duty, d.duty);
        d
    }

    #[test]
    fn six_detections_switch_low() {
        let c = cfg();
        let mut samples = vec![-60.0; 6];
        samples.extend(std::iter::repeat_n(-95.0, 24));
        let d = round(&c, &samples);
        assert!(d.wifi_detected);
        assert_eq!(d.duty, c.low_duty);
        assert_eq!(d.count1, 6);
        assert!((d.mean_detected_dbm.unwrap() + 60.0).abs() < 1e-9);
    }

    #[test]
    fn no_detections_stay_high() {
        let c = cfg();
        let d = round(&c, &[-95.0; 30]);
        assert!(!d.wifi_detected);
        assert_eq!(d.duty, c.high_duty);
        assert_eq!(d.mean_detected_dbm, None);
    }

    #[test]
    fn four_strong_detections_are_not_enough() {
        let c = cfg();
        let mut samples = vec![-50.0; 4];
        samples.extend(std::iter::repeat_n(-95.0, 26));
        let d = round(&c, &samples);
        assert!(!d.wifi_detected);
        assert_eq!(d.duty, c.high_duty);
    }

    #[test]
    fn linear_mean_differs_from_dbm_mean() {
        let m = linear_mean_dbm([-60.0, -80.0]).unwrap();
        // 10 log10((1e-6 + 1e-8) / 2)
        assert!((m - (-62.967_086_218_813_4)).abs() < 1e-9, "{m}");
        assert_eq!(linear_mean_dbm(std::iter::empty()), None);
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        let bad = CsatConfig {
            k_required: 31,
            ..cfg()
        };
        assert!(matches!(bad.validate(), Err(ConfigError::CsatWindows { .. })));
        let bad = CsatConfig {
            high_duty: DutyCycle::PCT50,
            low_duty: DutyCycle::PCT80,
            ..cfg()
        };
        assert!(matches!(bad.validate(), Err(ConfigError::CsatOrdering { .. })));
    }

    proptest! {
        #[test]
        fn only_configured_duty_cycles_are_reachable(
            samples in proptest::collection::vec(-100.0f64..-30.0, 30..300),
            start_high in any::<bool>(),
        ) {
            let c = CsatConfig { start_high, ..cfg() };
            let mut s = CsatState::new(&c);
            prop_assert!(s.current_duty == c.low_duty || s.current_duty == c.high_duty);
            for d in samples {
                s.observe(&c, d).unwrap();
                prop_assert_eq!(s.count1 + s.count2, s.windows_observed);
                if s.round_complete(&c) {
                    let dec = s.decide(&c).unwrap();
                    prop_assert!(dec.duty == c.low_duty || dec.duty == c.high_duty);
                }
            }
        }
    }
}
