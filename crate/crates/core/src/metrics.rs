//! Beacon counts, interval distributions, delay to K detections and CSAT
//! scale-back time, all computed from a trace.

use std::fmt::Write as _;

use crate::error::MetricsError;
use crate::params::PacketKind;
use crate::scalar::Scalar;
use crate::sim::channel::Outcome;
use crate::sim::trace::{Detail, TraceEvent, TraceLog};
use crate::sim::AP_B;

pub const SUMMARY_HEADER: &str =
    "scenario,seed,expected,transmitted,received,suppressed,reception_frac,delay_to_k_us,scale_back_us";
pub const CDF_HEADER: &str = "value_us,cum_frac";

/// Everything measured about the Cell B AP's beacons in one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub k: u32,
    pub beacons_expected: u64,
    pub beacons_transmitted: u64,
    pub beacons_received: u64,
    pub beacons_suppressed: u64,
    pub beacons_dropped_on: u64,
    pub beacons_dropped_collision: u64,
    pub tx_interval_samples_us: Vec<u64>,
    pub rx_interval_samples_us: Vec<u64>,
    pub first_attempt_us: Option<u64>,
    /// Transmission start of every beacon detected at the LTE-U BS after
    /// the first attempt.
    pub detection_times_us: Vec<u64>,
    /// Due time of every detected beacon, first attempt included.
    pub detected_due_us: Vec<u64>,
    pub delay_to_k_us: Option<u64>,
    pub scale_back_time_us: Option<u64>,
}

impl RunMetrics {
    /// Received over transmitted; `None` before the first transmission.
    pub fn reception_frac(&self) -> Option<f64> {
        (self.beacons_transmitted > 0)
            .then(|| self.beacons_received as f64 / self.beacons_transmitted as f64)
    }

    /// Beacons whose outcome is known (delivered or dropped).
    pub fn beacons_completed(&self) -> u64 {
        self.beacons_received + self.beacons_dropped_on + self.beacons_dropped_collision
    }

    pub fn delay_to_k(&self, k: u32) -> Result<u64, MetricsError> {
        let k = k as usize;
        match (self.first_attempt_us, self.detection_times_us.get(k.wrapping_sub(1))) {
            (Some(first), Some(&t)) if k > 0 => Ok(t - first),
            _ => Err(MetricsError::InsufficientDetections {
                found: self.detection_times_us.len(),
                required: k,
            }),
        }
    }

    /// Gaps between detected beacons in whole beacon periods.
    pub fn success_intervals(&self, period_us: u64) -> Vec<u64> {
        self.detected_due_us
            .windows(2)
            .map(|w| (w[1] - w[0] + period_us / 2) / period_us)
            .collect()
    }

    pub fn summary_row(&self, scenario: &str, seed: u64) -> String {
        let opt = |v: Option<u64>| v.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{scenario},{seed},{},{},{},{},{},{},{}",
            self.beacons_expected,
            self.beacons_transmitted,
            self.beacons_received,
            self.beacons_suppressed,
            self.reception_frac()
                .map(|f| format!("{f:.6}"))
                .unwrap_or_default(),
            opt(self.delay_to_k_us),
            opt(self.scale_back_time_us),
        )
    }
}

/// Single pass over `trace`. Fails if timestamps ever go backwards.
pub fn summarize(trace: &TraceLog, k: u32) -> Result<RunMetrics, MetricsError> {
    let mut m = RunMetrics {
        k,
        beacons_expected: 0,
        beacons_transmitted: 0,
        beacons_received: 0,
        beacons_suppressed: 0,
        beacons_dropped_on: 0,
        beacons_dropped_collision: 0,
        tx_interval_samples_us: Vec::new(),
        rx_interval_samples_us: Vec::new(),
        first_attempt_us: None,
        detection_times_us: Vec::new(),
        detected_due_us: Vec::new(),
        delay_to_k_us: None,
        scale_back_time_us: None,
    };
    let mut prev_t = 0;
    let mut last_due = None;
    let mut on_air: Option<(u64, u64)> = None;
    let mut last_tx: Option<u64> = None;
    let mut last_rx: Option<u64> = None;

    for (row, r) in trace.records.iter().enumerate() {
        if r.t_us < prev_t {
            return Err(MetricsError::OutOfOrder {
                row,
                t_us: r.t_us,
                prev_us: prev_t,
            });
        }
        prev_t = r.t_us;

        if r.event == TraceEvent::CsatSwitch {
            if let (Detail::SwitchedFrom(from), Some(to), Some(first)) =
                (r.detail, r.duty, m.first_attempt_us)
            {
                if m.scale_back_time_us.is_none() && to.fraction() < from.fraction() {
                    m.scale_back_time_us = Some(r.t_us - first);
                }
            }
            continue;
        }
        if r.node != AP_B || r.packet_kind != Some(PacketKind::Beacon) {
            continue;
        }
        match r.event {
            TraceEvent::BeaconDue => {
                m.beacons_expected += 1;
                last_due = Some(r.t_us);
            }
            TraceEvent::BeaconSuppressed => m.beacons_suppressed += 1,
            TraceEvent::TxStart => {
                m.beacons_transmitted += 1;
                m.first_attempt_us.get_or_insert(r.t_us);
                if let Some(prev) = last_tx.replace(r.t_us) {
                    m.tx_interval_samples_us.push(r.t_us - prev);
                }
                on_air = Some((r.t_us, last_due.unwrap_or(r.t_us)));
            }
            TraceEvent::TxComplete => match r.detail {
                Detail::Outcome(Outcome::Delivered) => {
                    m.beacons_received += 1;
                    if let Some(prev) = last_rx.replace(r.t_us) {
                        m.rx_interval_samples_us.push(r.t_us - prev);
                    }
                }
                Detail::Outcome(Outcome::DroppedOverlapOn) => m.beacons_dropped_on += 1,
                Detail::Outcome(Outcome::DroppedCollision) => m.beacons_dropped_collision += 1,
                _ => {}
            },
            TraceEvent::BeaconDetected => {
                if let Some((start, due)) = on_air {
                    m.detected_due_us.push(due);
                    if m.first_attempt_us.is_some_and(|first| start > first) {
                        m.detection_times_us.push(start);
                    }
                }
            }
            _ => {}
        }
    }
    m.delay_to_k_us = m.delay_to_k(k).ok();
    Ok(m)
}

/// Time from the first beacon attempt to the start of the `k`-th detected
/// beacon after it.
pub fn delay_to_k(trace: &TraceLog, k: u32) -> Result<u64, MetricsError> {
    summarize(trace, k)?.delay_to_k(k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfPoint<T> {
    pub value_us: u64,
    pub cum_frac: T,
}

/// Right-continuous step CDF: one point per distinct value, ascending.
pub fn empirical_cdf<T: Scalar>(samples: &[u64]) -> Result<Vec<CdfPoint<T>>, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptySamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let n = T::of_u64(sorted.len() as u64);
    let mut out: Vec<CdfPoint<T>> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let frac = T::of_u64(i as u64 + 1) / n;
        match out.last_mut() {
            Some(last) if last.value_us == v => last.cum_frac = frac,
            _ => out.push(CdfPoint {
                value_us: v,
                cum_frac: frac,
            }),
        }
    }
    if let Some(last) = out.last_mut() {
        last.cum_frac = T::one();
    }
    Ok(out)
}

pub fn cdf_csv<T: Scalar>(points: &[CdfPoint<T>]) -> String {
    let mut out = String::from(CDF_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(out, "{},{:.6}", p.value_us, p.cum_frac);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::DutyCycle;
    use crate::sim::trace::TraceRecord;
    use crate::sim::LTE_BS;

    fn rec(t_us: u64, event: TraceEvent, detail: Detail) -> TraceRecord {
        TraceRecord {
            t_us,
            event,
            node: AP_B,
            packet_kind: Some(PacketKind::Beacon),
            detail,
            duty: None,
        }
    }

    /// Beacons due every period; `dropped` lists the indices that overlap ON.
    fn synthetic(n: u64, dropped: &[u64]) -> TraceLog {
        let mut records = Vec::new();
        for i in 0..n {
            let due = i * 102_400;
            records.push(rec(due, TraceEvent::BeaconDue, Detail::None));
            records.push(rec(due + 34, TraceEvent::TxStart, Detail::None));
            let outcome = if dropped.contains(&i) {
                Outcome::DroppedOverlapOn
            } else {
                Outcome::Delivered
            };
            records.push(rec(due + 461, TraceEvent::TxComplete, Detail::Outcome(outcome)));
            if outcome == Outcome::Delivered {
                records.push(rec(due + 461, TraceEvent::BeaconDetected, Detail::None));
            }
        }
        TraceLog { records }
    }

    #[test]
    fn lossless_delay_is_k_periods_after_first_attempt() {
        let m = summarize(&synthetic(10, &[]), 5).unwrap();
        assert_eq!(m.delay_to_k_us, Some(5 * 102_400));
        assert_eq!(m.beacons_expected, 10);
        assert_eq!(m.beacons_received, 10);
        assert_eq!(m.reception_frac(), Some(1.0));
        assert_eq!(m.tx_interval_samples_us, vec![102_400; 9]);
        assert_eq!(m.rx_interval_samples_us.len(), 9);
    }

    #[test]
    fn drops_push_the_kth_detection_out() {
        let t = synthetic(10, &[2, 3]);
        assert_eq!(delay_to_k(&t, 5).unwrap(), 7 * 102_400);
        let m = summarize(&t, 5).unwrap();
        assert_eq!(m.beacons_dropped_on, 2);
        assert_eq!(m.success_intervals(102_400), vec![1, 3, 1, 1, 1, 1, 1]);
        assert_eq!(
            delay_to_k(&synthetic(3, &[]), 5),
            Err(MetricsError::InsufficientDetections {
                found: 2,
                required: 5
            })
        );
    }

    #[test]
    fn scale_back_counts_from_first_attempt() {
        let mut t = synthetic(3, &[]);
        t.records.push(TraceRecord {
            t_us: 250_000,
            event: TraceEvent::CsatSwitch,
            node: LTE_BS,
            packet_kind: None,
            detail: Detail::SwitchedFrom(DutyCycle::PCT95),
            duty: Some(DutyCycle::PCT50),
        });
        let m = summarize(&t, 5).unwrap();
        assert_eq!(m.scale_back_time_us, Some(250_000 - 34));
        assert_eq!(
            m.summary_row("case_g", 7),
            "case_g,7,3,3,3,0,1.000000,,249966"
        );
    }

    #[test]
    fn out_of_order_trace_is_rejected() {
        let mut t = synthetic(2, &[]);
        t.records.swap(1, 4);
        assert!(matches!(
            summarize(&t, 5),
            Err(MetricsError::OutOfOrder { row: 2, .. })
        ));
    }

    #[test]
    fn csv_round_trip_preserves_metrics() {
        let t = synthetic(12, &[4]);
        let back = TraceLog::read_csv(t.to_csv_string().as_bytes()).unwrap();
        assert_eq!(summarize(&back, 5).unwrap(), summarize(&t, 5).unwrap());
    }

    #[test]
    fn cdf_examples() {
        let c = empirical_cdf::<f64>(&[100, 200, 100]).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].value_us, 100);
        assert!((c[0].cum_frac - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!((c[1].value_us, c[1].cum_frac), (200, 1.0));
        let single = empirical_cdf::<f32>(&[102_400]).unwrap();
        assert_eq!(single, vec![CdfPoint { value_us: 102_400, cum_frac: 1.0 }]);
        assert_eq!(empirical_cdf::<f64>(&[]), Err(MetricsError::EmptySamples));
        assert_eq!(cdf_csv(&c), "value_us,cum_frac\n100,0.666667\n200,1.000000\n");
    }
}
