//! The seven measurement cases as ready-made scenarios.

use std::fmt;
use std::str::FromStr;

use coexist_core::{CsatConfig, DutyCycle, LteMode, Scenario};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    /// Two Wi-Fi cells, no LTE-U.
    CaseA,
    /// Fixed 5 ms ON / 5 ms OFF.
    CaseB,
    /// Fixed 20 ms ON / 20 ms OFF.
    CaseC,
    /// Fixed 20 ms ON / 1 ms OFF.
    CaseD,
    /// Fixed 20 ms ON / 5 ms OFF.
    CaseE,
    /// CSAT between 80% and 50%, starting at 80%.
    CaseF,
    /// CSAT between 95% and 50%, starting at 95%.
    CaseG,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::CaseA,
        Preset::CaseB,
        Preset::CaseC,
        Preset::CaseD,
        Preset::CaseE,
        Preset::CaseF,
        Preset::CaseG,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::CaseA => "case_a",
            Preset::CaseB => "case_b",
            Preset::CaseC => "case_c",
            Preset::CaseD => "case_d",
            Preset::CaseE => "case_e",
            Preset::CaseF => "case_f",
            Preset::CaseG => "case_g",
        }
    }

    pub fn scenario(self) -> Scenario {
        let csat = |high| {
            LteMode::Csat(CsatConfig {
                high_duty: high,
                low_duty: DutyCycle::PCT50,
                start_high: true,
                ..CsatConfig::default()
            })
        };
        let (lte_mode, second_ap_enabled) = match self {
            Preset::CaseA => (LteMode::Off, true),
            Preset::CaseB => (LteMode::Fixed(DutyCycle::PCT50_SHORT), false),
            Preset::CaseC => (LteMode::Fixed(DutyCycle::PCT50), false),
            Preset::CaseD => (LteMode::Fixed(DutyCycle::PCT95), false),
            Preset::CaseE => (LteMode::Fixed(DutyCycle::PCT80), false),
            Preset::CaseF => (csat(DutyCycle::PCT80), false),
            Preset::CaseG => (csat(DutyCycle::PCT95), false),
        };
        Scenario {
            name: self.name().into(),
            lte_mode,
            second_ap_enabled,
            ..Scenario::default()
        }
    }

    /// Modelling choices worth recording next to the batch output.
    pub fn notes(self) -> Vec<String> {
        match self {
            Preset::CaseA => vec![
                "Cell A is a second Wi-Fi AP (node 2) with an always-full queue of 1500-byte data frames; \
                 its traffic load is not given by the measurement setup, so saturation is assumed."
                    .into(),
            ],
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| CliError::UnknownPreset(s.into()))
    }
}

/// Scenario for a preset name, `custom` giving the plain defaults.
pub fn resolve(name: &str) -> Result<Scenario, CliError> {
    if name == "custom" {
        return Ok(Scenario::default());
    }
    Ok(name.parse::<Preset>()?.scenario())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve_to_their_cases() {
        let duty = |p: Preset| p.scenario().lte_mode;
        assert_eq!(duty(Preset::CaseA), LteMode::Off);
        assert!(Preset::CaseA.scenario().second_ap_enabled);
        assert_eq!(
            duty(Preset::CaseB),
            LteMode::Fixed(DutyCycle::new(5_000, 5_000).unwrap())
        );
        assert_eq!(
            duty(Preset::CaseC),
            LteMode::Fixed(DutyCycle::new(20_000, 20_000).unwrap())
        );
        assert_eq!(
            duty(Preset::CaseD),
            LteMode::Fixed(DutyCycle::new(20_000, 1_000).unwrap())
        );
        assert_eq!(
            duty(Preset::CaseE),
            LteMode::Fixed(DutyCycle::new(20_000, 5_000).unwrap())
        );
        for (p, high) in [(Preset::CaseF, 5_000), (Preset::CaseG, 1_000)] {
            let LteMode::Csat(c) = duty(p) else {
                panic!("{p} is not CSAT")
            };
            assert_eq!(c.high_duty, DutyCycle::new(20_000, high).unwrap());
            assert_eq!(c.low_duty, DutyCycle::new(20_000, 20_000).unwrap());
            assert!(c.start_high);
        }
        for p in Preset::ALL {
            let s = p.scenario();
            assert_eq!(s.name, p.name());
            assert_eq!(s.probe_rate_per_s, 5.0);
            assert_eq!(s.duration_us, 300_000_000);
            s.validate().unwrap();
            assert_eq!(s, p.scenario());
        }
    }

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!(matches!(resolve("case_h"), Err(CliError::UnknownPreset(_))));
        assert_eq!(resolve("custom").unwrap(), Scenario::default());
    }
}
