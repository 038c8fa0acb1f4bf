//! Analytic delay table as CSV.

use coexist_core::analytic::expected_delay_k_beacons;
use coexist_core::{AnalyticResult, DutyCycle, ModelError, PhyParams};

pub const TABLE_HEADER: &str = "t_on_us,t_off_us,p_t,p_d,e_interval_us,delay_us";

pub fn rows(
    grid: &[DutyCycle],
    phy: &PhyParams,
    k: u32,
) -> Result<Vec<(DutyCycle, AnalyticResult<f64>)>, ModelError> {
    grid.iter()
        .map(|dc| Ok((*dc, expected_delay_k_beacons(dc, phy, k)?)))
        .collect()
}

pub fn to_csv(rows: &[(DutyCycle, AnalyticResult<f64>)]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for (dc, r) in rows {
        out.push_str(&format!(
            "{},{},{:.8},{:.6},{:.3},{:.3}\n",
            dc.t_on_us, dc.t_off_us, r.p_t, r.p_d, r.e_interval_us, r.delay_us
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use coexist_core::analytic::TABLE3_GRID;

    #[test]
    fn table3_csv() {
        let r = rows(&TABLE3_GRID, &PhyParams::table1(), 5).unwrap();
        let csv = to_csv(&r);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], TABLE_HEADER);
        assert_eq!(lines.len(), 4);
        // 5 * 102400 / (1 - 48 * 9 / 21000)
        assert!(lines.iter().any(|l| l.starts_with("20000,1000,") && l.ends_with(",522753.792")), "{csv}");
        assert!(lines.iter().any(|l| l.starts_with("5000,5000,") && l.contains(",0.043200,")));
    }
}
