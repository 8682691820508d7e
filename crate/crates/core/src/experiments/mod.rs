//! Experiment runner: multi-seed comparisons, landscapes, trajectories and
//! threshold tables, written as CSV with a `.meta` sidecar.

mod compare;
mod config;
mod landscape;
mod output;
mod table;
mod trajectory;

pub use compare::{aggregate, run_compare, AgentCurve, CompareResult, RunLog};
pub use config::{Agent, AnsatzSpec, ExperimentConfig, ExperimentKind, TableParams, Theta0};
pub use landscape::{linspace_closed, run_landscape, LandscapePoint};
pub use output::{write_meta, write_text, CsvTable};
pub use table::{threshold_table, ThresholdTable, THRESHOLDS};
pub use trajectory::{first_hit, preset_theta0, run_trajectory, TrajectoryResult};

/// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent seed for `(master, label, index)`.
///
/// The label is folded in with FNV-1a so different agents, the environment
/// and the shared initialization never share a stream.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix(splitmix(master ^ h).wrapping_add(index))
}
