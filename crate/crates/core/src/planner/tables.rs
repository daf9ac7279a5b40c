// SPDX-License-Identifier: Apache-2.0

//! Regeneration of the four parameter tables and comparison against the
//! published values.

use serde::{Deserialize, Serialize};

use super::{choose_k_for_p, failure_probability, plan_min_k, solve_theta, PlanResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableId {
    T1,
    T2,
    T3,
    T4,
}

impl TableId {
    pub const ALL: [TableId; 4] = [TableId::T1, TableId::T2, TableId::T3, TableId::T4];

    pub fn name(self) -> &'static str {
        match self {
            TableId::T1 => "T1",
            TableId::T2 => "T2",
            TableId::T3 => "T3",
            TableId::T4 => "T4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellFormat {
    Integer,
    Decimals(usize),
    /// Three decimals, or one significant digit in scientific form below 1e-3.
    Probability,
    /// Shortest form after rounding to four significant digits.
    Significant,
}

impl CellFormat {
    pub fn render(self, v: f64) -> String {
        match self {
            CellFormat::Integer => format!("{}", v.round() as i64),
            CellFormat::Decimals(d) => format!("{v:.d$}"),
            CellFormat::Probability if v >= 1e-3 => format!("{v:.3}"),
            CellFormat::Probability => format!("{v:.0e}"),
            CellFormat::Significant => {
                let digits = 4 - 1 - v.abs().log10().floor() as i32;
                let scale = 10f64.powi(digits);
                format!("{}", (v * scale).round() / scale)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub name: String,
    pub format: CellFormat,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub id: TableId,
    pub caption: String,
    pub n_values: Vec<usize>,
    pub rows: Vec<TableRow>,
    /// Full planning result behind each column.
    pub plans: Vec<PlanResult>,
}

impl Table {
    pub fn row(&self, name: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// One column per N, one row per quantity, at printed precision.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["N".to_owned()];
        header.extend(self.n_values.iter().map(|n| n.to_string()));
        w.write_record(&header).unwrap();
        for row in &self.rows {
            let mut rec = vec![row.name.clone()];
            rec.extend(row.values.iter().map(|&v| row.format.render(v)));
            w.write_record(&rec).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    /// Full-precision JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

const T1_N: [usize; 6] = [1_000, 5_000, 10_000, 50_000, 100_000, 1_000_000];
const T23_N: [usize; 7] = [12, 50, 100, 200, 500, 1000, 5000];
const T3_N: [usize; 7] = [20, 50, 100, 200, 500, 1000, 5000];
const T1_P: f64 = 0.15;
const T1_MAX_P0: f64 = 0.1;
const T4_THETA_MIN: f64 = 0.2;

fn row(name: &str, format: CellFormat, values: Vec<f64>) -> TableRow {
    TableRow {
        name: name.to_owned(),
        format,
        values,
    }
}

fn theta_for_p(p: f64) -> crate::linalg::Theta {
    crate::linalg::Theta::new((2.0 * p).sqrt().asin()).expect("p < 1/2")
}

/// Recomputes a table from the closed forms.
pub fn table_generator(id: TableId) -> Table {
    match id {
        TableId::T1 => {
            let plans: Vec<PlanResult> = T1_N
                .iter()
                .map(|&n| {
                    let k = choose_k_for_p(n, T1_P, T1_MAX_P0).expect("k exists for p = 0.15");
                    PlanResult::new(n, k, theta_for_p(T1_P))
                })
                .collect();
            Table {
                id,
                caption: format!("Choice of k with p = {T1_P}: the largest k keeping P0 ≤ {T1_MAX_P0}"),
                n_values: T1_N.to_vec(),
                rows: vec![
                    row("k", CellFormat::Integer, plans.iter().map(|r| r.k as f64).collect()),
                    row("n_bar", CellFormat::Decimals(2), plans.iter().map(|r| r.n_bar).collect()),
                    row("p0", CellFormat::Probability, plans.iter().map(|r| r.p0).collect()),
                ],
                plans,
            }
        }
        TableId::T2 | TableId::T3 => {
            let (ns, nbar): (&[usize], f64) = if id == TableId::T2 {
                (&T23_N, 3.0)
            } else {
                (&T3_N, 5.0)
            };
            let plans: Vec<PlanResult> = ns
                .iter()
                .map(|&n| {
                    let theta = solve_theta(n, 1, nbar).expect("k = 1 feasible for these N");
                    PlanResult::new(n, 1, theta)
                })
                .collect();
            Table {
                id,
                caption: format!("θ with k = 1 and nbar = {nbar}"),
                n_values: ns.to_vec(),
                rows: vec![
                    row("p", CellFormat::Significant, plans.iter().map(|r| r.p).collect()),
                    row(
                        "p0",
                        CellFormat::Decimals(3),
                        plans.iter().map(|r| failure_probability(r.n_items, r.p, 1)).collect(),
                    ),
                    row("theta", CellFormat::Decimals(3), plans.iter().map(|r| r.theta.radians()).collect()),
                ],
                plans,
            }
        }
        TableId::T4 => {
            let plans: Vec<PlanResult> = T1_N
                .iter()
                .map(|&n| plan_min_k(n, 3.0, T4_THETA_MIN).expect("feasible"))
                .collect();
            Table {
                id,
                caption: format!("Smallest k with θ in [{T4_THETA_MIN}, π/4] and nbar = 3"),
                n_values: T1_N.to_vec(),
                rows: vec![
                    row("k", CellFormat::Integer, plans.iter().map(|r| r.k as f64).collect()),
                    row("theta", CellFormat::Decimals(3), plans.iter().map(|r| r.theta.radians()).collect()),
                ],
                plans,
            }
        }
    }
}

/// Published cells at their printed precision.
fn reference(id: TableId) -> &'static [(&'static str, &'static [&'static str])] {
    match id {
        TableId::T1 => &[
            ("k", &["3", "4", "4", "5", "5", "6"]),
            ("n_bar", &["3.38", "2.53", "5.06", "3.79", "7.59", "11.39"]),
            ("p0", &["0.034", "0.080", "0.006", "0.022", "5e-4", "1e-5"]),
        ],
        TableId::T2 => &[
            ("p", &["0.25", "0.06", "0.03", "0.015", "0.006", "0.003", "6e-4"]),
            ("p0", &["0.032", "0.045", "0.048", "0.049", "0.049", "0.050", "0.050"]),
            ("theta", &["0.785", "0.354", "0.247", "0.174", "0.110", "0.078", "0.035"]),
        ],
        TableId::T3 => &[
            ("p", &["0.25", "0.1", "0.05", "0.025", "0.01", "0.005", "0.001"]),
            ("p0", &["0.003", "0.005", "0.005", "0.006", "0.006", "0.006", "0.006"]),
            ("theta", &["0.785", "0.464", "0.322", "0.226", "0.142", "0.100", "0.045"]),
        ],
        TableId::T4 => &[
            ("k", &["2", "2", "3", "3", "3", "4"]),
            ("theta", &["0.337", "0.223", "0.375", "0.284", "0.252", "0.293"]),
        ],
    }
}

/// One unit in the last printed place: `"0.034"` -> 1e-3, `"5e-4"` -> 1e-4.
fn last_place_unit(printed: &str) -> f64 {
    let (mantissa, exp) = match printed.split_once('e') {
        Some((m, e)) => (m, e.parse::<i32>().expect("exponent")),
        None => (printed, 0),
    };
    let decimals = mantissa.split_once('.').map_or(0, |(_, d)| d.len() as i32);
    10f64.powi(exp - decimals)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCheck {
    pub table: TableId,
    pub row: String,
    pub n_items: usize,
    pub printed: String,
    pub computed: f64,
    pub ok: bool,
}

/// Compares every regenerated cell with its published value. A cell passes
/// when it lies within one unit of the last printed digit, which absorbs
/// both rounded and truncated printing.
pub fn check_tables(ids: &[TableId]) -> Vec<CellCheck> {
    let mut out = Vec::new();
    for &id in ids {
        let table = table_generator(id);
        for (name, printed) in reference(id) {
            let row = table.row(name).expect("row exists");
            for ((&n, &computed), &printed) in table.n_values.iter().zip(&row.values).zip(printed.iter()) {
                let expect: f64 = printed.parse().expect("reference parses");
                out.push(CellCheck {
                    table: id,
                    row: (*name).to_owned(),
                    n_items: n,
                    printed: printed.to_owned(),
                    computed,
                    ok: (computed - expect).abs() < last_place_unit(printed),
                });
            }
        }
    }
    out
}
