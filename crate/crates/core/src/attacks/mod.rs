// SPDX-License-Identifier: Apache-2.0

//! Dishonest-party models. Alice attacks database security with individual
//! USD, joint Helstrom, or joint parity-USD measurements; Bob attacks user
//! privacy by steering which of Alice's bits come out conclusive.

mod bob;
mod figures;
mod parity;
mod usd;

use serde::{Deserialize, Serialize};

pub use bob::{bob_branch_weights, bob_conclusiveness_attack};
pub use figures::{fig_data, AttackFigure, F4_N, F4_THETAS};
pub use parity::{
    alice_joint_helstrom, helstrom_guess, helstrom_numeric, joint_usd_bound, joint_usd_report, parity_mixtures,
    ParityPair, MAX_PARITY_K,
};
pub use usd::{alice_honest, alice_individual_usd, usd_povm, UsdPovm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    IndividualUsd,
    Honest,
    Helstrom,
    JointUsd,
    BobConclusive,
    BobInconclusive,
}

/// Analytic value of an attack metric next to its Monte Carlo estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub kind: AttackKind,
    pub theta: f64,
    pub k: usize,
    pub n_items: Option<usize>,
    /// What `analytic` and `estimate` measure.
    pub metric: String,
    pub analytic: f64,
    /// Independent numerical evaluation of `analytic`, where one exists.
    pub numeric_check: Option<f64>,
    pub estimate: Option<f64>,
    /// Binomial standard deviation of `estimate` under the analytic value.
    pub sigma: Option<f64>,
    pub trials: u64,
    pub seed: Option<u64>,
    /// Conclusive identifications that named the wrong state.
    pub wrong_identifications: Option<u64>,
    /// Bob's attack only: fraction of conclusive results inferring bit 0.
    pub conditional_bit0: Option<f64>,
    pub conditional_sigma: Option<f64>,
}

impl AttackReport {
    fn analytic_only(kind: AttackKind, theta: f64, k: usize, metric: &str, analytic: f64) -> Self {
        Self {
            kind,
            theta,
            k,
            n_items: None,
            metric: metric.to_owned(),
            analytic,
            numeric_check: None,
            estimate: None,
            sigma: None,
            trials: 0,
            seed: None,
            wrong_identifications: None,
            conditional_bit0: None,
            conditional_sigma: None,
        }
    }

    /// `|estimate - analytic| <= z * sigma`; false without an estimate.
    pub fn within_sigmas(&self, z: f64) -> bool {
        match (self.estimate, self.sigma) {
            (Some(e), Some(s)) => (e - self.analytic).abs() <= z * s,
            _ => false,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Header plus one record; absent values are empty cells.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let kind = serde_json::to_value(self.kind).unwrap();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "kind", "theta", "k", "n_items", "metric", "analytic", "numeric_check", "estimate", "sigma",
            "trials", "seed", "wrong_identifications", "conditional_bit0", "conditional_sigma",
        ])
        .unwrap();
        w.write_record([
            kind.as_str().unwrap().to_owned(),
            self.theta.to_string(),
            self.k.to_string(),
            self.n_items.map(|n| n.to_string()).unwrap_or_default(),
            self.metric.clone(),
            self.analytic.to_string(),
            opt(self.numeric_check),
            opt(self.estimate),
            opt(self.sigma),
            self.trials.to_string(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
            self.wrong_identifications.map(|s| s.to_string()).unwrap_or_default(),
            opt(self.conditional_bit0),
            opt(self.conditional_sigma),
        ])
        .unwrap();
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}
