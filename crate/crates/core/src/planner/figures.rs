// SPDX-License-Identifier: Apache-2.0

//! Parameter-landscape series: the angle that yields a target `nbar`.

use super::solve_theta;
use crate::series::{FigureData, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanFigure {
    /// theta versus N (log grid) for k = 1..=6 at nbar = 3.
    F1,
    /// theta versus k at N = 10^4 for several nbar targets.
    F2,
}

pub const F1_NBAR: f64 = 3.0;
pub const F2_N: usize = 10_000;
pub const F2_TARGETS: [f64; 6] = [1.0, 3.0, 5.0, 10.0, 30.0, 100.0];

/// `points_per_decade` controls the N grid of F1 (10 to 10^7).
pub fn fig_data(which: PlanFigure, points_per_decade: usize) -> FigureData {
    match which {
        PlanFigure::F1 => {
            let steps = 6 * points_per_decade.max(1);
            let series = (1..=6)
                .map(|k| {
                    let mut s = Series::new(format!("k={k}"));
                    for i in 0..=steps {
                        let n = 10f64.powf(1.0 + 6.0 * i as f64 / steps as f64).round() as usize;
                        if let Ok(t) = solve_theta(n, k, F1_NBAR) {
                            s.push(n as f64, t.radians());
                        }
                    }
                    s
                })
                .collect();
            FigureData {
                figure: "F1".into(),
                x_label: "N".into(),
                y_label: "theta".into(),
                series,
            }
        }
        PlanFigure::F2 => {
            let series = F2_TARGETS
                .iter()
                .map(|&nbar| {
                    let mut s = Series::new(format!("nbar={nbar}"));
                    for k in 1..=8 {
                        if let Ok(t) = solve_theta(F2_N, k, nbar) {
                            s.push(k as f64, t.radians());
                        }
                    }
                    s
                })
                .collect();
            FigureData {
                figure: "F2".into(),
                x_label: "k".into(),
                y_label: "theta".into(),
                series,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Theta;
    use crate::planner::{conclusive_probability, expected_known_bits};

    #[test]
    fn curves_hold_the_target() {
        for s in &fig_data(PlanFigure::F1, 10).series {
            let k: usize = s.name[2..].parse().unwrap();
            assert!(!s.points.is_empty());
            for p in &s.points {
                let nbar = expected_known_bits(p.x as usize, conclusive_probability(Theta::new(p.y).unwrap()), k);
                assert!((nbar - F1_NBAR).abs() < 1e-9);
            }
        }
        let f2 = fig_data(PlanFigure::F2, 1);
        for (s, target) in f2.series.iter().zip(F2_TARGETS) {
            for p in &s.points {
                let nbar = expected_known_bits(F2_N, conclusive_probability(Theta::new(p.y).unwrap()), p.x as usize);
                assert!((nbar - target).abs() < 1e-9);
            }
        }
    }
}
