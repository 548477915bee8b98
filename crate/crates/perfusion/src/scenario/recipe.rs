use serde::{Deserialize, Serialize};

use crate::model::Input;
use crate::ocp::ControlGrid;

pub const MINUTES_PER_DAY: f64 = 1440.0;

/// Daily feed bolus during the fed-batch phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BolusSpec {
    /// Start-of-day offset [min].
    pub offset_min: f64,
    /// Bolus duration [min].
    pub duration_min: f64,
    /// Water flow during the bolus [L/min].
    pub f_water: f64,
    /// Glucose-feed flow during the bolus [L/min].
    pub f_glucose: f64,
}

impl Default for BolusSpec {
    fn default() -> Self {
        // F_W + F_G = 0.018 L/min exactly; the published F_G = 0.0177 is this
        // value rounded. Mixed glucose concentration: F_G·32.5/0.018 = 32 g/L.
        let f_water = 2.7692e-4;
        BolusSpec {
            offset_min: 0.0,
            duration_min: 30.0,
            f_water,
            f_glucose: 0.018 - f_water,
        }
    }
}

/// Continuous flows during the perfusion phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerfusionSpec {
    /// Perfusion outlet flow [L/min].
    pub f_perfusion: f64,
    /// Water inlet flow [L/min].
    pub f_water: f64,
    /// Glucose-feed inlet flow [L/min].
    pub f_glucose: f64,
}

impl Default for PerfusionSpec {
    fn default() -> Self {
        // Inlets exactly balance the outlet so the perfusion-phase volume is
        // constant; F_G gives the 8.65 g/L feed mix (0.0015·8.65/32.5).
        let f_perfusion = 0.0015;
        let f_glucose = 3.9923e-4;
        PerfusionSpec {
            f_perfusion,
            f_water: f_perfusion - f_glucose,
            f_glucose,
        }
    }
}

/// One sampling draw through the whole-broth outlet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingDraw {
    /// Draw start [min from t0].
    pub start_min: f64,
    /// Draw duration [min].
    pub duration_min: f64,
    /// Outlet flow during the draw [L/min].
    pub f_out: f64,
}

/// The three-phase operating recipe.
///
/// Phase boundaries are not published numerically; the defaults (batch ends
/// at day 2, fed-batch at day 6) keep the fed-batch volume budget — four
/// boluses of 0.54 L on top of V₀ = 5.65 L — inside the 8 L ceiling. Both
/// are ordinary fields so they can be recalibrated.
///
/// The default sampling plan is one 0.005 L/min draw at noon of each
/// fed-batch day, lasting one 30-minute control interval (0.15 L/day) so it
/// is exactly representable under zero-order hold. Draws are kept out of
/// the batch phase (which has no active outlets) and out of the perfusion
/// phase (whose volume balance is exact).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseSchedule {
    /// End of the batch phase [min].
    pub t_batch_end_min: f64,
    /// End of the fed-batch phase [min].
    pub t_fedbatch_end_min: f64,
    /// End of the fermentation [min].
    pub t_final_min: f64,
    pub bolus: BolusSpec,
    pub perfusion: PerfusionSpec,
    /// Sampling draws, superimposed on `F_out`.
    pub sampling: Vec<SamplingDraw>,
    /// Culture temperature held over the whole run [K].
    pub temperature: f64,
}

impl Default for PhaseSchedule {
    fn default() -> Self {
        let t_batch_end_min = 2.0 * MINUTES_PER_DAY;
        let t_fedbatch_end_min = 6.0 * MINUTES_PER_DAY;
        let sampling = (2..6)
            .map(|day| SamplingDraw {
                start_min: day as f64 * MINUTES_PER_DAY + 720.0,
                duration_min: 30.0,
                f_out: 0.005,
            })
            .collect();
        PhaseSchedule {
            t_batch_end_min,
            t_fedbatch_end_min,
            t_final_min: 14.0 * MINUTES_PER_DAY,
            bolus: BolusSpec::default(),
            perfusion: PerfusionSpec::default(),
            sampling,
            temperature: 310.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScheduleError {
    #[error("phase boundaries must satisfy 0 <= batch <= fed-batch <= final, got {batch}, {fedbatch}, {t_final} min")]
    BadPhaseOrder { batch: f64, fedbatch: f64, t_final: f64 },
    #[error("{what} flow {value} L/min outside [{min}, {max}]")]
    FlowOutOfRange { what: &'static str, value: f64, min: f64, max: f64 },
    #[error("bolus total flow {total} L/min is not the specified 0.018 L/min")]
    BolusTotalMismatch { total: f64 },
    #[error("{what} at t = {t} min does not align with the {interval}-min control grid")]
    Misaligned { what: &'static str, t: f64, interval: f64 },
    #[error("schedule final time {t_final} min does not match the grid horizon {horizon} min")]
    HorizonMismatch { t_final: f64, horizon: f64 },
    #[error("invalid control grid: {0}")]
    BadGrid(String),
}

impl PhaseSchedule {
    /// Validates ordering and flow magnitudes against the operating bounds.
    pub fn validate(&self, f_min: f64, f_max: f64) -> Result<(), ScheduleError> {
        if !(0.0 <= self.t_batch_end_min
            && self.t_batch_end_min <= self.t_fedbatch_end_min
            && self.t_fedbatch_end_min <= self.t_final_min)
        {
            return Err(ScheduleError::BadPhaseOrder {
                batch: self.t_batch_end_min,
                fedbatch: self.t_fedbatch_end_min,
                t_final: self.t_final_min,
            });
        }
        let flows = [
            ("bolus water", self.bolus.f_water),
            ("bolus glucose", self.bolus.f_glucose),
            ("perfusion outlet", self.perfusion.f_perfusion),
            ("perfusion water", self.perfusion.f_water),
            ("perfusion glucose", self.perfusion.f_glucose),
        ];
        for (what, value) in flows {
            if !(f_min..=f_max).contains(&value) {
                return Err(ScheduleError::FlowOutOfRange { what, value, min: f_min, max: f_max });
            }
        }
        for draw in &self.sampling {
            if !(f_min..=f_max).contains(&draw.f_out) {
                return Err(ScheduleError::FlowOutOfRange {
                    what: "sampling",
                    value: draw.f_out,
                    min: f_min,
                    max: f_max,
                });
            }
        }
        let total = self.bolus.f_water + self.bolus.f_glucose;
        if (total - 0.018).abs() > 1e-4 {
            return Err(ScheduleError::BolusTotalMismatch { total });
        }
        Ok(())
    }

    /// The sampling outlet flow at time `t` [L/min].
    pub fn sampling_f_out(&self, t: f64) -> f64 {
        for draw in &self.sampling {
            if t >= draw.start_min && t < draw.start_min + draw.duration_min {
                return draw.f_out;
            }
        }
        0.0
    }

    /// The per-interval `F_out` sequence induced by the sampling draws.
    pub fn sampling_sequence(&self, grid: &ControlGrid) -> Result<Vec<f64>, ScheduleError> {
        for draw in &self.sampling {
            check_aligned("sampling draw start", draw.start_min, grid)?;
            check_aligned("sampling draw end", draw.start_min + draw.duration_min, grid)?;
        }
        Ok((0..grid.num_intervals)
            .map(|k| self.sampling_f_out(grid.node_time(k)))
            .collect())
    }
}

fn check_aligned(what: &'static str, t: f64, grid: &ControlGrid) -> Result<(), ScheduleError> {
    let ratio = t / grid.interval_min;
    if (ratio - ratio.round()).abs() > 1e-9 {
        return Err(ScheduleError::Misaligned { what, t, interval: grid.interval_min });
    }
    Ok(())
}

/// Expands the recipe into one zero-order-hold input per grid interval.
///
/// Every recipe event (phase boundary, bolus start and end, sampling draw)
/// must land exactly on the grid; misaligned events are rejected rather
/// than silently rounded. The default 30-min interval represents the
/// published recipe exactly.
pub fn build_base_case(schedule: &PhaseSchedule, grid: &ControlGrid) -> Result<Vec<Input>, ScheduleError> {
    grid.validate().map_err(ScheduleError::BadGrid)?;
    if (schedule.t_final_min - grid.horizon_min()).abs() > 1e-9 {
        return Err(ScheduleError::HorizonMismatch {
            t_final: schedule.t_final_min,
            horizon: grid.horizon_min(),
        });
    }
    check_aligned("batch phase end", schedule.t_batch_end_min, grid)?;
    check_aligned("fed-batch phase end", schedule.t_fedbatch_end_min, grid)?;
    check_aligned("bolus offset", schedule.bolus.offset_min, grid)?;
    check_aligned("bolus duration", schedule.bolus.duration_min, grid)?;
    for draw in &schedule.sampling {
        check_aligned("sampling draw start", draw.start_min, grid)?;
        check_aligned("sampling draw end", draw.start_min + draw.duration_min, grid)?;
    }

    let mut inputs = Vec::with_capacity(grid.num_intervals);
    for k in 0..grid.num_intervals {
        let t = grid.node_time(k);
        let mut u = Input::batch(schedule.temperature);
        if t >= schedule.t_fedbatch_end_min {
            u.f_water = schedule.perfusion.f_water;
            u.f_glucose = schedule.perfusion.f_glucose;
            u.f_perfusion = schedule.perfusion.f_perfusion;
        } else if t >= schedule.t_batch_end_min {
            let time_of_day = t - (t / MINUTES_PER_DAY).floor() * MINUTES_PER_DAY;
            let in_bolus = time_of_day >= schedule.bolus.offset_min
                && time_of_day < schedule.bolus.offset_min + schedule.bolus.duration_min;
            if in_bolus {
                u.f_water = schedule.bolus.f_water;
                u.f_glucose = schedule.bolus.f_glucose;
            }
        }
        u.f_out = schedule.sampling_f_out(t);
        inputs.push(u);
    }
    Ok(inputs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> ControlGrid {
        ControlGrid::default()
    }

    #[test]
    fn default_schedule_is_valid() {
        PhaseSchedule::default().validate(0.0, 0.02).unwrap();
    }

    #[test]
    fn batch_interval_has_no_flows() {
        let inputs = build_base_case(&PhaseSchedule::default(), &grid()).unwrap();
        assert_eq!(inputs[0], Input::new(0.0, 0.0, 0.0, 0.0, 310.15));
        // Entire batch phase: first 2 days = 96 intervals.
        for u in &inputs[..96] {
            assert_eq!(*u, Input::batch(310.15));
        }
    }

    #[test]
    fn bolus_interval_matches_published_flows() {
        let inputs = build_base_case(&PhaseSchedule::default(), &grid()).unwrap();
        // First fed-batch interval: day 2, offset 0.
        let u = inputs[96];
        assert_eq!(u.f_water, 2.7692e-4);
        assert!((u.f_glucose - 0.0177).abs() < 1e-4);
        assert_eq!(u.f_water + u.f_glucose, 0.018);
        assert_eq!(u.f_perfusion, 0.0);
        assert_eq!(u.f_out, 0.0);
        assert_eq!(u.temperature, 310.15);
        // Next interval the bolus is over.
        assert_eq!(inputs[97].f_glucose, 0.0);
    }

    #[test]
    fn perfusion_interval_matches_published_flows() {
        let inputs = build_base_case(&PhaseSchedule::default(), &grid()).unwrap();
        // Day 6 onward.
        let u = inputs[6 * 48];
        assert!((u.f_water - 0.0011).abs() < 1e-5);
        assert!((u.f_glucose - 3.9923e-4).abs() < 1e-9);
        assert_eq!(u.f_perfusion, 0.0015);
        // Inlets balance the outlet exactly.
        assert_eq!(u.f_water + u.f_glucose, u.f_perfusion);
    }

    #[test]
    fn sampling_draw_rides_on_f_out() {
        let schedule = PhaseSchedule::default();
        let inputs = build_base_case(&schedule, &grid()).unwrap();
        // Noon of day 2 = minute 3600 = interval 120.
        assert_eq!(inputs[120].f_out, 0.005);
        assert_eq!(inputs[121].f_out, 0.0);
        let seq = schedule.sampling_sequence(&grid()).unwrap();
        assert_eq!(seq[120], 0.005);
        assert_eq!(seq.iter().filter(|&&f| f > 0.0).count(), 4);
    }

    #[test]
    fn misaligned_events_are_rejected() {
        let mut schedule = PhaseSchedule::default();
        schedule.sampling[0].start_min += 7.0;
        assert!(matches!(
            build_base_case(&schedule, &grid()),
            Err(ScheduleError::Misaligned { .. })
        ));

        let mut schedule = PhaseSchedule::default();
        schedule.t_batch_end_min = 2.0 * MINUTES_PER_DAY + 11.0;
        assert!(matches!(
            build_base_case(&schedule, &grid()),
            Err(ScheduleError::Misaligned { .. })
        ));
    }

    #[test]
    fn flows_outside_bounds_are_rejected() {
        let mut schedule = PhaseSchedule::default();
        schedule.bolus.f_glucose = 0.05;
        assert!(schedule.validate(0.0, 0.02).is_err());
    }
}
