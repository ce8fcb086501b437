//! Partition inspection for a start configuration.

use std::fmt;

use pursuit_core::geom::Vec2;
use pursuit_core::partition::{self, PartitionError};
use pursuit_core::sim::is_encircled;
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EgpDump {
    pub start_angle: f64,
    pub angles: Vec<f64>,
    pub ray_angles: Vec<f64>,
    /// Sector holding each pursuer's bearing.
    pub pursuer_sectors: Vec<usize>,
    /// Pursuer placed in each sector at construction.
    pub assigned: Vec<usize>,
}

pub fn inspect(pursuers: &[Vec2], evader: Vec2, m: usize, eps: f64) -> Result<EgpDump, PartitionError> {
    let egp = partition::build_egp(pursuers, evader, m, eps)?;
    let p = &egp.partition;
    Ok(EgpDump {
        start_angle: p.start_angle(),
        angles: p.angles().to_vec(),
        ray_angles: p.ray_angles(),
        pursuer_sectors: pursuers
            .iter()
            .map(|&q| p.sector_of_angle((q - evader).angle()))
            .collect(),
        assigned: egp.assigned,
    })
}

impl fmt::Display for EgpDump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "start angle: {:.6}", self.start_angle)?;
        for (m, (a, r)) in self.angles.iter().zip(&self.ray_angles).enumerate() {
            writeln!(
                f,
                "sector {m}: ray {r:.6}, width {a:.6}, assigned pursuer {}",
                self.assigned[m]
            )?;
        }
        for (i, s) in self.pursuer_sectors.iter().enumerate() {
            writeln!(f, "pursuer {i}: sector {s}")?;
        }
        Ok(())
    }
}

/// `n` pursuers uniform in `[-half_width, half_width]²`, redrawn until the
/// origin lies in their hull.
pub fn sample_encircling<R: Rng>(rng: &mut R, n: usize, half_width: f64) -> Vec<Vec2> {
    loop {
        let pts: Vec<Vec2> = (0..n)
            .map(|_| {
                Vec2::new(
                    rng.random_range(-half_width..=half_width),
                    rng.random_range(-half_width..=half_width),
                )
            })
            .collect();
        if is_encircled(&pts, Vec2::ZERO) {
            return pts;
        }
    }
}
