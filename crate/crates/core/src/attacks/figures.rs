// SPDX-License-Identifier: Apache-2.0

//! Attack-landscape series.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use super::joint_usd_bound;
use crate::linalg::Theta;
use crate::series::{FigureData, Point, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackFigure {
    /// Individual USD `1 - cos` against honest `sin^2 / 2`, versus theta.
    F3,
    /// Joint parity-USD bound versus k for several angles.
    F4,
    /// Bob's steered conclusive rate `cos^2(theta/2)` versus theta.
    F5,
}

pub const F4_THETAS: [f64; 4] = [0.2, 0.4, 0.6, FRAC_PI_4];
/// Final-key length used for the expected-count series of F4.
pub const F4_N: usize = 10_000;
const F4_MAX_K: usize = 8;

/// Open grid of `points` angles in (0, pi/2), with pi/4 always included.
fn theta_grid(points: usize) -> Vec<f64> {
    let n = points.max(2);
    let mut g: Vec<f64> = (1..=n).map(|i| FRAC_PI_2 * i as f64 / (n + 1) as f64).collect();
    g.push(FRAC_PI_4);
    g.sort_by(f64::total_cmp);
    g.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    g
}

fn figure(name: &str, x: &str, y: &str, series: Vec<Series>) -> FigureData {
    FigureData {
        figure: name.into(),
        x_label: x.into(),
        y_label: y.into(),
        series,
    }
}

/// `points` sets the angle grid of F3 and F5.
pub fn fig_data(which: AttackFigure, points: usize) -> FigureData {
    match which {
        AttackFigure::F3 => {
            let mut usd = Series::new("usd");
            let mut honest = Series::new("honest");
            for t in theta_grid(points) {
                usd.push(t, 1.0 - t.cos());
                honest.push(t, t.sin().powi(2) / 2.0);
            }
            figure("F3", "theta", "success_probability", vec![usd, honest])
        }
        AttackFigure::F4 => {
            let mut series = Vec::new();
            for t in F4_THETAS {
                let theta = Theta::new(t).expect("grid angle");
                let mut bound = Series::new(format!("bound theta={t:.4}"));
                let mut count = Series::new(format!("expected_bits theta={t:.4} N={F4_N}"));
                for k in 1..=F4_MAX_K {
                    let b = joint_usd_bound(theta, k).expect("k within capacity");
                    bound.push(k as f64, b);
                    count.push(k as f64, F4_N as f64 * b);
                }
                series.push(bound);
                series.push(count);
            }
            figure("F4", "k", "success_probability", series)
        }
        AttackFigure::F5 => {
            let mut pc = Series::new("p_c");
            for t in theta_grid(points) {
                pc.push(t, (t / 2.0).cos().powi(2));
            }
            let reference = Series {
                name: "reference theta=pi/4".into(),
                points: vec![Point {
                    x: FRAC_PI_4,
                    y: (FRAC_PI_4 / 2.0).cos().powi(2),
                    sigma: None,
                }],
            };
            figure("F5", "theta", "p_c", vec![pc, reference])
        }
    }
}
