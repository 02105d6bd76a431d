//! Built-in sweeps. `configs/*.toml` in the repository holds the same
//! experiments as editable files.

use std::path::PathBuf;

use crate::model::GossipPolicy::{self, *};

use super::config::{ExperimentConfig, Mode, PolicyChoice, RateCase};

/// The four clustered DC configurations.
pub const DC_PAIRS: [[GossipPolicy; 2]; 4] = [
    [DcNoRc, DcNoRc],
    [DcNoRc, DcRc],
    [DcRc, DcNoRc],
    [DcRc, DcRc],
];

/// The three clustered FC configurations.
pub const FC_PAIRS: [[GossipPolicy; 2]; 3] = [[DcNoRc, FcNoRc], [DcRc, FcNoRc], [DcRc, FcAllRc]];

/// Rate cases for the clustered sweeps: equal stage rates, a faster
/// source stage, a fast-changing source, and a faster cluster stage.
pub fn clustered_cases(lambda_g: f64) -> Vec<RateCase> {
    vec![
        RateCase::explicit(1.0, 10.0, 10.0, lambda_g).labeled("case1"),
        RateCase::explicit(1.0, 20.0, 10.0, lambda_g).labeled("case2"),
        RateCase::explicit(5.0, 10.0, 10.0, lambda_g).labeled("case3"),
        RateCase::explicit(1.0, 10.0, 20.0, lambda_g).labeled("case4"),
    ]
}

/// Flat networks, all five policies, n = 1..=50, alpha in {0.1, 1}.
pub fn fig3() -> ExperimentConfig {
    ExperimentConfig {
        name: "fig3".into(),
        mode: Mode::FlatSweepN,
        policies: GossipPolicy::ALL.into_iter().map(PolicyChoice::Flat).collect(),
        n: None,
        n_range: Some([1, 50]),
        k: None,
        output: Some(PathBuf::from("fig3.csv")),
        cases: vec![
            RateCase::with_alpha(0.1, 1.0, 1.0),
            RateCase::with_alpha(1.0, 1.0, 1.0),
        ],
        sim: None,
    }
}

/// Clustered DC networks at n = 120 over every cluster size.
pub fn fig4() -> ExperimentConfig {
    ExperimentConfig {
        name: "fig4".into(),
        mode: Mode::ClusteredSweepK,
        policies: DC_PAIRS.into_iter().map(PolicyChoice::Clustered).collect(),
        n: Some(120),
        n_range: None,
        k: None,
        output: Some(PathBuf::from("fig4.csv")),
        cases: clustered_cases(0.0),
        sim: None,
    }
}

/// Clustered FC networks at n = 120 over every cluster size.
pub fn fig5() -> ExperimentConfig {
    ExperimentConfig {
        name: "fig5".into(),
        mode: Mode::ClusteredSweepK,
        policies: FC_PAIRS.into_iter().map(PolicyChoice::Clustered).collect(),
        n: Some(120),
        n_range: None,
        k: None,
        output: Some(PathBuf::from("fig5.csv")),
        cases: clustered_cases(10.0),
        sim: None,
    }
}

pub fn by_name(name: &str) -> Option<ExperimentConfig> {
    match name {
        "fig3" => Some(fig3()),
        "fig4" => Some(fig4()),
        "fig5" => Some(fig5()),
        _ => None,
    }
}
