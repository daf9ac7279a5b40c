// SPDX-License-Identifier: Apache-2.0

//! Plot-ready (x, y[, sigma]) series with CSV and JSON emission.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<Point>,
}

impl Series {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            points: Vec::new(),
        }
    }

    pub fn push(&mut self, x: f64, y: f64) {
        self.points.push(Point { x, y, sigma: None });
    }

    /// Linear interpolation-free lookup of the point nearest to `x`.
    pub fn nearest(&self, x: f64) -> Option<&Point> {
        self.points
            .iter()
            .min_by(|a, b| (a.x - x).abs().total_cmp(&(b.x - x).abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    pub figure: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

impl FigureData {
    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    /// Long format: `series,x,y,sigma`, sigma empty when absent.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["series", "x", "y", "sigma"]).unwrap();
        for s in &self.series {
            for p in &s.points {
                let sigma = p.sigma.map(|v| v.to_string()).unwrap_or_default();
                w.write_record([s.name.as_str(), &p.x.to_string(), &p.y.to_string(), &sigma])
                    .unwrap();
            }
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("figure serializes")
    }
}
