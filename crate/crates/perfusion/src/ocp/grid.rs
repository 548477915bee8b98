use serde::{Deserialize, Serialize};

/// Uniform control grid: the horizon splits into `num_intervals` intervals
/// of `interval_min` minutes, with inputs held constant (zero-order hold)
/// over each. `move_blocking` aggregates consecutive intervals into blocks
/// that share one control move, shrinking the decision space without
/// touching the shooting grid.
///
/// The default is a 14-day horizon at 30-minute resolution (672 intervals)
/// with 8-interval blocking (controls change every 4 h). A blocking factor
/// of 1 recovers one move per interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlGrid {
    /// Number of control intervals N.
    pub num_intervals: usize,
    /// Interval length T_s [min].
    pub interval_min: f64,
    /// Intervals per control block; must divide `num_intervals`.
    pub move_blocking: usize,
}

impl Default for ControlGrid {
    fn default() -> Self {
        ControlGrid {
            num_intervals: 672,
            interval_min: 30.0,
            move_blocking: 8,
        }
    }
}

impl ControlGrid {
    pub fn validate(&self) -> Result<(), String> {
        if self.num_intervals == 0 {
            return Err("control grid needs at least one interval".into());
        }
        if !(self.interval_min > 0.0 && self.interval_min.is_finite()) {
            return Err("control interval length must be positive".into());
        }
        if self.move_blocking == 0 || self.num_intervals % self.move_blocking != 0 {
            return Err(format!(
                "move blocking factor {} must divide the interval count {}",
                self.move_blocking, self.num_intervals
            ));
        }
        Ok(())
    }

    /// Horizon length N·T_s [min].
    pub fn horizon_min(&self) -> f64 {
        self.num_intervals as f64 * self.interval_min
    }

    pub fn num_blocks(&self) -> usize {
        self.num_intervals / self.move_blocking
    }

    /// Block index owning interval `k`.
    pub fn block_of(&self, k: usize) -> usize {
        k / self.move_blocking
    }

    /// Start time of node `k` (node N is the end of the horizon).
    pub fn node_time(&self, k: usize) -> f64 {
        k as f64 * self.interval_min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_matches_fourteen_days() {
        let g = ControlGrid::default();
        g.validate().unwrap();
        assert_eq!(g.horizon_min(), 14.0 * 1440.0);
        assert_eq!(g.num_blocks(), 84);
    }

    #[test]
    fn blocking_must_divide() {
        let g = ControlGrid { num_intervals: 10, interval_min: 30.0, move_blocking: 3 };
        assert!(g.validate().is_err());
    }
}
