//! The reference experiments, with their parameters built in.

use mixtilt::math::CovMatrix;
use mixtilt::models::{CevSpec, PyramidSpec, RainbowSpec, TwoSidedTailSpec};

use crate::config::{
    AsianConfig, CeSection, ExperimentConfig, InitConfig, ModelConfig, OutputSection,
    SamplingSection,
};
use crate::experiment::{run_experiment, ResultRow};
use crate::RunError;

pub const TABLE_IDS: std::ops::RangeInclusive<u8> = 1..=9;

const TWO_SIDED_CASES: [(f64, f64); 3] = [(1.0, -1.5), (2.0, -2.5), (2.0, -3.0)];

fn corr(rows: &[&[f64]]) -> CovMatrix {
    CovMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).expect("valid correlation matrix")
}

fn experiment(
    table: u8,
    row: String,
    model: ModelConfig,
    init: InitConfig,
    ce: CeSection,
    n: usize,
    seed: u64,
) -> ExperimentConfig {
    ExperimentConfig {
        model,
        init,
        ce,
        sampling: SamplingSection {
            n,
            seed,
            baseline: true,
        },
        output: OutputSection {
            path: None,
            table: table.to_string(),
            row,
        },
    }
}

fn ce(pilot_size: usize, iterations: usize) -> CeSection {
    CeSection {
        pilot_size,
        iterations,
        ..CeSection::default()
    }
}

fn two_sided(a: f64, b: f64) -> ModelConfig {
    ModelConfig::TwoSidedTail(TwoSidedTailSpec { a, b })
}

/// `(½, ½; 0, −0.1)`, the fixed start of the rarity scheme.
fn two_sided_start() -> InitConfig {
    InitConfig::RarityCe {
        rho: 0.05,
        pilot_size: Some(20_000),
        max_stages: 50,
        start_tilts: Some(vec![vec![0.0], vec![-0.1]]),
        scale: mixtilt::init::DEFAULT_PERTURBATION_SCALE,
        adaptive_min_weight: None,
    }
}

/// The perturbation-initialized runs of the two-sided tail problem. Row
/// `k` of a `{a, b}` pair uses seed `seed + k`.
pub fn table1_config(a: f64, b: f64, seed: u64) -> ExperimentConfig {
    experiment(
        1,
        String::new(),
        two_sided(a, b),
        InitConfig::Perturbation {
            components: 2,
            base: None,
            scale: mixtilt::init::DEFAULT_PERTURBATION_SCALE,
        },
        ce(20_000, 5),
        1_000_000,
        seed,
    )
}

pub fn table2_config(a: f64, b: f64, seed: u64) -> ExperimentConfig {
    experiment(
        2,
        String::new(),
        two_sided(a, b),
        two_sided_start(),
        ce(20_000, 5),
        1_000_000,
        seed,
    )
}

pub fn table3_config(a: f64, b: f64, seed: u64) -> ExperimentConfig {
    experiment(
        3,
        String::new(),
        two_sided(a, b),
        InitConfig::Approx,
        ce(20_000, 5),
        1_000_000,
        seed,
    )
}

pub const ASIAN_STRIKES: [f64; 5] = [50.0, 60.0, 70.0, 80.0, 90.0];

pub fn asian_config(strike: f64, seed: u64) -> ExperimentConfig {
    experiment(
        4,
        String::new(),
        ModelConfig::AsianCall(AsianConfig {
            s0: 50.0,
            r: 0.05,
            sigma: 0.3,
            maturity: 1.0,
            strike,
            dates: Some(30),
            times: None,
        }),
        InitConfig::Approx,
        ce(10_000, 5),
        100_000,
        seed,
    )
}

pub const RAINBOW_STRIKES: [f64; 3] = [50.0, 60.0, 70.0];

pub fn rainbow_spec(assets: usize, strike: f64) -> RainbowSpec {
    match assets {
        2 => RainbowSpec {
            s0: vec![50.0, 45.0],
            sigma: vec![0.1, 0.15],
            corr: corr(&[&[1.0, 0.2], &[0.2, 1.0]]),
            r: 0.03,
            maturity: 1.0,
            strike,
        },
        4 => RainbowSpec {
            s0: vec![45.0, 50.0, 47.0, 50.0],
            sigma: vec![0.1, 0.1, 0.2, 0.2],
            corr: corr(&[
                &[1.0, 0.3, -0.2, 0.4],
                &[0.3, 1.0, -0.3, 0.1],
                &[-0.2, -0.3, 1.0, 0.5],
                &[0.4, 0.1, 0.5, 1.0],
            ]),
            r: 0.02,
            maturity: 0.5,
            strike,
        },
        _ => panic!("rainbow tables use 2 or 4 assets"),
    }
}

/// Rainbow run with rarity (`ini_ce`) or approximation (`ini_ap`) start.
pub fn rainbow_config(assets: usize, strike: f64, rarity: bool, seed: u64) -> ExperimentConfig {
    let (table, iterations) = if assets == 2 { (5, 5) } else { (6, 10) };
    let (row, init) = if rarity {
        (
            "ini_ce",
            InitConfig::RarityCe {
                rho: 0.05,
                pilot_size: Some(10_000),
                max_stages: 50,
                start_tilts: None,
                scale: mixtilt::init::DEFAULT_PERTURBATION_SCALE,
                adaptive_min_weight: None,
            },
        )
    } else {
        ("ini_ap", InitConfig::Approx)
    };
    experiment(
        table,
        row.into(),
        ModelConfig::Rainbow(rainbow_spec(assets, strike)),
        init,
        ce(10_000, iterations),
        100_000,
        seed,
    )
}

pub const PYRAMID2_STRIKES: [f64; 5] = [10.0, 20.0, 30.0, 40.0, 50.0];
pub const PYRAMID4_STRIKES: [f64; 5] = [20.0, 30.0, 40.0, 50.0, 60.0];

pub fn pyramid_spec(assets: usize, strike: f64) -> PyramidSpec {
    match assets {
        2 => PyramidSpec {
            s0: vec![50.0, 45.0],
            sigma: vec![0.2, 0.25],
            asset_strikes: vec![55.0, 50.0],
            corr: corr(&[&[1.0, 0.3], &[0.3, 1.0]]),
            r: 0.03,
            maturity: 1.0,
            strike,
            discount: true,
        },
        4 => PyramidSpec {
            s0: vec![50.0, 45.0, 45.0, 30.0],
            sigma: vec![0.15, 0.15, 0.2, 0.2],
            asset_strikes: vec![55.0, 50.0, 50.0, 35.0],
            corr: corr(&[
                &[1.0, 0.1, -0.2, 0.3],
                &[0.1, 1.0, -0.5, 0.4],
                &[-0.2, -0.5, 1.0, 0.2],
                &[0.3, 0.4, 0.2, 1.0],
            ]),
            r: 0.03,
            maturity: 1.0,
            strike,
            discount: true,
        },
        _ => panic!("pyramid tables use 2 or 4 assets"),
    }
}

pub fn pyramid_config(assets: usize, strike: f64, seed: u64) -> ExperimentConfig {
    let table = if assets == 2 { 7 } else { 8 };
    experiment(
        table,
        String::new(),
        ModelConfig::Pyramid(pyramid_spec(assets, strike)),
        InitConfig::Approx,
        ce(10_000, 5),
        100_000,
        seed,
    )
}

pub const CEV_STRIKES: [f64; 5] = [50.0, 55.0, 60.0, 65.0, 70.0];

/// The digital option as tabulated: 50 Euler steps, undiscounted.
pub fn cev_spec(strike: f64) -> CevSpec {
    CevSpec {
        s0: 50.0,
        h0: 48.0,
        sigma1: 0.3,
        sigma2: 0.35,
        gamma1: 0.5,
        gamma2: 0.7,
        rho: 0.3,
        r: 0.03,
        maturity: 1.0,
        strike,
        c1: 1.0,
        c2: 1.0,
        steps: 50,
        discount: false,
    }
}

pub fn cev_config(strike: f64, seed: u64) -> ExperimentConfig {
    experiment(
        9,
        String::new(),
        ModelConfig::CevDigital(cev_spec(strike)),
        InitConfig::Approx,
        ce(10_000, 5),
        100_000,
        seed,
    )
}

fn numbered(mut rows: Vec<ExperimentConfig>) -> Vec<ExperimentConfig> {
    for (i, r) in rows.iter_mut().enumerate() {
        if r.output.row.is_empty() {
            r.output.row = (i + 1).to_string();
        }
    }
    rows
}

/// Every row of table `id`.
pub fn table_configs(id: u8, seed: u64) -> Result<Vec<ExperimentConfig>, RunError> {
    let rows = match id {
        1 => {
            // one run for the easy case, several seeds where the outcome varies
            let repeats = [1, 3, 2];
            TWO_SIDED_CASES
                .iter()
                .zip(repeats)
                .flat_map(|(&(a, b), k)| (0..k).map(move |i| table1_config(a, b, seed + i)))
                .collect()
        }
        2 => TWO_SIDED_CASES
            .iter()
            .map(|&(a, b)| table2_config(a, b, seed))
            .collect(),
        3 => TWO_SIDED_CASES
            .iter()
            .map(|&(a, b)| table3_config(a, b, seed))
            .collect(),
        4 => ASIAN_STRIKES
            .iter()
            .map(|&k| asian_config(k, seed))
            .collect(),
        5 | 6 => {
            let assets = if id == 5 { 2 } else { 4 };
            RAINBOW_STRIKES
                .iter()
                .flat_map(|&k| {
                    [
                        rainbow_config(assets, k, true, seed),
                        rainbow_config(assets, k, false, seed),
                    ]
                })
                .collect()
        }
        7 => PYRAMID2_STRIKES
            .iter()
            .map(|&k| pyramid_config(2, k, seed))
            .collect(),
        8 => PYRAMID4_STRIKES
            .iter()
            .map(|&k| pyramid_config(4, k, seed))
            .collect(),
        9 => CEV_STRIKES.iter().map(|&k| cev_config(k, seed)).collect(),
        _ => {
            return Err(RunError::Config(format!(
                "no table {id}; tables are 1 to 9"
            )))
        }
    };
    Ok(numbered(rows))
}

/// Run every row of table `id`; a failing row does not stop the others.
pub fn reproduce_table(
    id: u8,
    seed: u64,
) -> Result<Vec<(ExperimentConfig, Result<ResultRow, RunError>)>, RunError> {
    Ok(table_configs(id, seed)?
        .into_iter()
        .map(|cfg| {
            let out = run_experiment(&cfg);
            (cfg, out)
        })
        .collect())
}
