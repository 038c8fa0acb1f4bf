//! Closed-form beacon loss under periodic LTE-U ON/OFF occupancy.
//!
//! A beacon is generated uniformly in time. It is lost when any of the
//! `ceil(T_b / t_s)` slots it occupies overlaps the start of an ON period,
//! which makes the drop probability depend only on the cycle length, not on
//! how the cycle is split between ON and OFF. Successful detections are then
//! spaced by a geometric number of beacon periods.

use crate::error::ModelError;
use crate::params::{beacon_airtime_slots, DutyCycle, PhyParams};
use crate::scalar::Scalar;

/// Output of [`expected_delay_k_beacons`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticResult<T> {
    /// Probability that a beacon is generated in one particular slot.
    pub p_t: T,
    /// Beacon drop probability.
    pub p_d: T,
    /// Mean spacing between successfully detected beacons.
    pub e_interval_us: T,
    /// Mean time to collect `k` detections.
    pub delay_us: T,
    pub k: u32,
    /// Beacon period.
    pub t_d_us: u64,
}

/// The three duty cycles compared against measurements, in
/// `(t_on_us, t_off_us)` order: 5/5, 20/1, 20/5 ms.
pub const TABLE3_GRID: [DutyCycle; 3] = [
    DutyCycle::PCT50_SHORT,
    DutyCycle::PCT95,
    DutyCycle::PCT80,
];

/// Probability that a uniformly generated beacon starts in a given slot:
/// `t_s / (T_on + T_off)`.
pub fn slot_generation_probability<T: Scalar>(dc: &DutyCycle, p: &PhyParams) -> T {
    T::of_u64(p.slot_us) / T::of_u64(dc.cycle_us())
}

/// `P_d = P_t * ceil(T_b / t_s)`.
pub fn beacon_drop_probability<T: Scalar>(dc: &DutyCycle, p: &PhyParams) -> Result<T, ModelError> {
    let p_t: T = slot_generation_probability(dc, p);
    let p_d = p_t * T::of_u64(beacon_airtime_slots(p));
    if p_d >= T::one() {
        return Err(ModelError::OutOfRange(p_d.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(p_d)
}

fn check_probability<T: Scalar>(p: T) -> Result<(), ModelError> {
    if p.is_nan() || p < T::zero() || p >= T::one() {
        return Err(ModelError::Probability(p.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(())
}

/// Probability that the next detection arrives exactly `i` beacon periods
/// after the previous one: `(1 - p_d) p_d^(i - 1)`.
pub fn success_interval_pmf<T: Scalar>(p_d: T, i: u64) -> Result<T, ModelError> {
    if i == 0 {
        return Err(ModelError::ZeroIndex);
    }
    check_probability(p_d)?;
    // powi takes i32; beyond that the term underflows for any p_d < 1 anyway.
    let exp = i32::try_from(i - 1).unwrap_or(i32::MAX);
    Ok((T::one() - p_d) * p_d.powi(exp))
}

/// Mean spacing between detections, `T_d / (1 - p_d)`.
pub fn expected_success_interval<T: Scalar>(p_d: T, t_d_us: T) -> Result<T, ModelError> {
    check_probability(p_d)?;
    Ok(t_d_us / (T::one() - p_d))
}

/// Mean time for the LTE-U BS to detect `k` beacons, `k T_d / (1 - p_d)`,
/// with the beacon period taken from `p.beacon_interval_us`.
pub fn expected_delay_k_beacons<T: Scalar>(
    dc: &DutyCycle,
    p: &PhyParams,
    k: u32,
) -> Result<AnalyticResult<T>, ModelError> {
    expected_delay_with_period(dc, p, k, p.beacon_interval_us)
}

/// As [`expected_delay_k_beacons`] with an explicit beacon period, for
/// sensitivity sweeps.
pub fn expected_delay_with_period<T: Scalar>(
    dc: &DutyCycle,
    p: &PhyParams,
    k: u32,
    t_d_us: u64,
) -> Result<AnalyticResult<T>, ModelError> {
    if k == 0 {
        return Err(ModelError::ZeroK);
    }
    let p_t = slot_generation_probability(dc, p);
    let p_d = beacon_drop_probability(dc, p)?;
    let e_interval_us = expected_success_interval(p_d, T::of_u64(t_d_us))?;
    Ok(AnalyticResult {
        p_t,
        p_d,
        e_interval_us,
        delay_us: T::of_u64(u64::from(k)) * e_interval_us,
        k,
        t_d_us,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn phy() -> PhyParams {
        PhyParams::table1()
    }

    #[test]
    fn slot_probability_examples() {
        let p = phy();
        let v: f64 = slot_generation_probability(&DutyCycle::PCT50_SHORT, &p);
        assert_relative_eq!(v, 9.0e-4, max_relative = 1e-15);
        let v: f64 = slot_generation_probability(&DutyCycle::PCT95, &p);
        assert_relative_eq!(v, 9.0 / 21_000.0, max_relative = 1e-15);

        let mut degenerate = p;
        degenerate.slot_us = DutyCycle::PCT95.cycle_us();
        let v: f64 = slot_generation_probability(&DutyCycle::PCT95, &degenerate);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn drop_probability_examples() {
        let p = phy();
        let cases = [
            (DutyCycle::PCT95, 0.020_571_428_571_428_57),
            (DutyCycle::PCT80, 0.017_28),
            (DutyCycle::PCT50_SHORT, 0.043_2),
        ];
        for (dc, want) in cases {
            let got: f64 = beacon_drop_probability(&dc, &p).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn drop_probability_rejects_short_cycles() {
        let mut p = phy();
        // 48 slots of 1000 µs against a 21 ms cycle.
        p.slot_us = 1_000;
        p.preamble_us = 47_000;
        let r = beacon_drop_probability::<f64>(&DutyCycle::PCT95, &p);
        assert!(matches!(r, Err(ModelError::OutOfRange(_))));
    }

    #[test]
    fn pmf_examples() {
        assert_eq!(success_interval_pmf(0.0_f64, 1).unwrap(), 1.0);
        assert_relative_eq!(success_interval_pmf(0.5_f64, 3).unwrap(), 0.125);
        assert_relative_eq!(
            success_interval_pmf(0.0432_f64, 2).unwrap(),
            0.9568 * 0.0432,
            max_relative = 1e-14
        );
        assert_eq!(success_interval_pmf(0.1_f64, 0), Err(ModelError::ZeroIndex));
        assert!(success_interval_pmf(1.0_f64, 2).is_err());
    }

    #[test]
    fn expected_interval_examples() {
        assert_eq!(expected_success_interval(0.0_f64, 102_400.0).unwrap(), 102_400.0);
        assert_eq!(expected_success_interval(0.5_f64, 102_400.0).unwrap(), 204_800.0);
        let v = expected_success_interval(0.020_571_f64, 102_400.0).unwrap();
        assert!((v - 104_551.0).abs() < 1.0, "{v}");
        assert!(expected_success_interval(1.0_f64, 102_400.0).is_err());
        assert!(expected_success_interval(-0.1_f64, 102_400.0).is_err());
    }

    #[test]
    fn delay_examples() {
        let p = phy();
        let r: AnalyticResult<f64> = expected_delay_k_beacons(&DutyCycle::PCT95, &p, 5).unwrap();
        assert!((r.delay_us / 1000.0 - 522.76).abs() < 0.05, "{}", r.delay_us);
        let r: AnalyticResult<f64> = expected_delay_k_beacons(&DutyCycle::PCT80, &p, 5).unwrap();
        assert!((r.delay_us / 1000.0 - 521.0).abs() < 0.5, "{}", r.delay_us);
        let r: AnalyticResult<f64> =
            expected_delay_k_beacons(&DutyCycle::PCT50_SHORT, &p, 5).unwrap();
        assert_relative_eq!(r.delay_us, 512_000.0 / (1.0 - 0.0432), max_relative = 1e-12);
        assert!((r.delay_us / 1000.0 - 535.12).abs() < 0.05);
        assert_eq!(r.t_d_us, 102_400);
        assert_eq!(r.k, 5);
        assert!(expected_delay_k_beacons::<f64>(&DutyCycle::PCT95, &p, 0).is_err());
    }

    #[test]
    fn single_precision_agrees() {
        let p = phy();
        let r32: AnalyticResult<f32> = expected_delay_k_beacons(&DutyCycle::PCT95, &p, 5).unwrap();
        let r64: AnalyticResult<f64> = expected_delay_k_beacons(&DutyCycle::PCT95, &p, 5).unwrap();
        assert!((f64::from(r32.delay_us) - r64.delay_us).abs() < 0.1);
    }

    #[test]
    fn drop_probability_ignores_on_off_split() {
        let p = phy();
        let splits = [(15_000, 5_000), (10_000, 10_000), (5_000, 15_000)];
        let values: Vec<f64> = splits
            .iter()
            .map(|&(on, off)| beacon_drop_probability(&DutyCycle::new(on, off).unwrap(), &p).unwrap())
            .collect();
        assert_eq!(values[0], values[1]);
        assert_eq!(values[1], values[2]);
    }

    #[test]
    fn pmf_normalizes_and_matches_mean() {
        for p_d in [0.0, 0.0172_8, 0.020_571, 0.0432, 0.3, 0.9_f64] {
            // Truncate once p_d^N < 1e-12.
            let n = if p_d == 0.0 { 1 } else { ((1e-12_f64).ln() / p_d.ln()).ceil() as u64 + 1 };
            let mut total = 0.0;
            let mut mean = 0.0;
            for i in 1..=n {
                let m = success_interval_pmf(p_d, i).unwrap();
                total += m;
                mean += i as f64 * 102_400.0 * m;
            }
            assert!((total - 1.0).abs() < 1e-9, "p_d {p_d}: {total}");
            let closed = expected_success_interval(p_d, 102_400.0).unwrap();
            assert!(((mean - closed) / closed).abs() < 1e-6, "p_d {p_d}");
        }
    }

    proptest! {
        #[test]
        fn drop_probability_decreases_with_cycle(on in 1_000u64..=20_000, off in 1_000u64..40_000, extra in 1u64..10_000) {
            let p = phy();
            let a: f64 = beacon_drop_probability(&DutyCycle::new(on, off).unwrap(), &p).unwrap();
            let b: f64 = beacon_drop_probability(&DutyCycle::new(on, off + extra).unwrap(), &p).unwrap();
            prop_assert!(b < a);
        }

        #[test]
        fn delay_linear_in_k_and_increasing_in_p(p_d in 0.0f64..0.9, dp in 1e-6f64..0.05, k in 1u32..50) {
            let e = expected_success_interval(p_d, 102_400.0).unwrap();
            let e2 = expected_success_interval(p_d + dp, 102_400.0).unwrap();
            prop_assert!(e2 > e);
            let d = f64::from(k) * e;
            prop_assert!((d / f64::from(k) - e).abs() <= e * 1e-12);
        }
    }
}
