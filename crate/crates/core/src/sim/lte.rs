use super::event::SimTime;
use crate::params::DutyCycle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LteState {
    On,
    Off,
}

/// State of a fixed square wave at `t` (measured from the LTE-U start) and
/// the time until the next edge. Cycles are half-open: the instant
/// `t_on + t_off` already belongs to the next ON period.
pub fn lte_occupancy(dc: &DutyCycle, t: SimTime) -> (LteState, SimTime) {
    let pos = t % dc.cycle_us();
    if pos < dc.t_on_us {
        (LteState::On, dc.t_on_us - pos)
    } else {
        (LteState::Off, dc.cycle_us() - pos)
    }
}
