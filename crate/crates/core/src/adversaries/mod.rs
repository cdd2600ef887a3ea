//! Attack procedures: cap adversaries, the two emulation reductions, the
//! binary-search line attack and white-box best responses.

mod cap;
mod emulate;
mod line;
mod perturbation;
mod whitebox;

pub use cap::{
    cap_adversary_deterministic, cap_adversary_randomized, cap_push, sample_query_sets,
    CapAdversary, DeterministicCapAdversary,
};
pub use emulate::{
    emulate_general, emulate_iid, sphere_swap, EmulateGeneral, EmulateIid, EmulationRecord,
};
pub use line::{binary_search_line_attack, LineSearchAdversary};
pub use perturbation::{EpsBall, MassAccounting, Perturbation, PerturbationKind};
pub use whitebox::{whitebox_best_response, Whitebox};

use crate::classifiers::{CountedOracle, LabelOracle, QueryRecord};
use crate::error::Result;
use crate::rng::RngStream;
use std::io::Write;

/// What an attack returns besides the oracle's own accounting.
#[derive(Clone, Debug)]
pub struct AttackOutput {
    pub perturbation: Perturbation,
    /// Queries whose answers the attack knew beforehand (still forwarded).
    pub free_queries: u64,
    /// Set when the attack could not produce a meaningful perturbation.
    pub failure: Option<String>,
    pub emulation: Option<EmulationRecord>,
}

impl AttackOutput {
    pub fn new(perturbation: Perturbation) -> Self {
        Self {
            perturbation,
            free_queries: 0,
            failure: None,
            emulation: None,
        }
    }
}

/// A query-based attack producing a perturbation.
pub trait Adversary: Send + Sync {
    fn attack(&self, oracle: &mut dyn LabelOracle, rng: &mut RngStream) -> Result<AttackOutput>;

    /// Whether the attack consumes randomness.
    fn is_randomized(&self) -> bool;
}

/// Outcome of one attack run against a counted oracle.
#[derive(Clone, Debug)]
pub struct AdversaryReport {
    pub perturbation: Perturbation,
    pub queries_used: u64,
    pub free_queries: u64,
    pub transcript: Vec<QueryRecord>,
    pub randomized: bool,
    pub failure: Option<String>,
    pub emulation: Option<EmulationRecord>,
}

impl AdversaryReport {
    /// One `{"q": [...], "a": -1|1}` object per line.
    pub fn write_transcript_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.transcript {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Runs `adversary` against `oracle`; the report's query count is the
/// counter delta and the transcript the newly recorded queries.
pub fn run_adversary(
    adversary: &dyn Adversary,
    oracle: &mut CountedOracle<'_>,
    rng: &mut RngStream,
) -> Result<AdversaryReport> {
    let before = oracle.query_count();
    let recorded_before = oracle.transcript().map_or(0, <[QueryRecord]>::len);
    let out = adversary.attack(oracle, rng)?;
    let transcript = oracle
        .transcript()
        .map(|t| t[recorded_before..].to_vec())
        .unwrap_or_default();
    Ok(AdversaryReport {
        perturbation: out.perturbation,
        queries_used: oracle.query_count() - before,
        free_queries: out.free_queries,
        transcript,
        randomized: adversary.is_randomized(),
        failure: out.failure,
        emulation: out.emulation,
    })
}
