//! Randomness tests on blocks of the restricted sequence and the battery
//! that runs them over an ensemble.
//!
//! Every test takes unpacked `0`/`1` bits (bit `1` ↔ `μ̂ = +1`) and returns a
//! [`TestResult`]. [`run_battery`] applies a selection of tests to every block
//! of an [`Ensemble`], then checks pass proportions and P-value uniformity per
//! test.

mod entropy;
mod excursions;
mod frequency;
mod maurer;
mod rank;
mod spectral;
mod template;

use std::collections::BTreeMap;
use std::io::Write;

use rand::RngCore;
use serde::Serialize;
use serde_json::{json, Value};

pub use entropy::{approximate_entropy, approximate_entropy_checked, phi, EntropyScale};
pub use excursions::{
    augmented_walk, cycle_visits, excursion_probabilities, random_excursions, Excursions, EXCURSION_STATES, MIN_CYCLES,
};
pub use frequency::{
    cumulative_sums, cusum_asymptote, cusum_distribution, cusum_tail, kinks, longest_run_class, longest_run_of_ones,
    monobit, oscillation, serial_frequency, LONGEST_RUN_LEN, LONGEST_RUN_PI,
};
pub use maurer::{
    maurer_trace, maurer_universal, MaurerTrace, MAURER_K, MAURER_LEN, MAURER_M, MAURER_MEAN, MAURER_Q, MAURER_SIGMA,
};
pub use rank::{gf2_rank, matrix_rank, rank_probability, rank_probability_exact};
pub use spectral::{
    autocorrelation, block_autocorrelation, correlation_dft, cross_correlation_random, dft_threshold, spectral_dft,
};
pub use template::{
    is_aperiodic, nonoverlapping_template, template_hits, template_moments, DEFAULT_SUB_BLOCKS, DEFAULT_TEMPLATE,
};

use crate::error::{arg, Result};
use crate::mertens::{BlockSource, Ensemble};
use crate::par;
use crate::rng::substream;
use crate::statcore::{proportion_check, pvalue_uniformity, BatchProportion, PValue, Uniformity};
use crate::statcore::{DEFAULT_ALPHA, UNIFORMITY_MIN_SAMPLES};

pub(crate) fn mu_hat_sum(bits: &[u8]) -> i64 {
    let ones = bits.iter().filter(|&&b| b != 0).count() as i64;
    2 * ones - bits.len() as i64
}

/// Outcome of one test on one block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub test_name: String,
    pub params: BTreeMap<String, Value>,
    pub statistic: f64,
    pub p_value: PValue,
    pub aux: Option<BTreeMap<String, Value>>,
}

/// Parameters that describe the block rather than the test variant.
const NON_KEY_PARAMS: [&str; 3] = ["n", "seed", "sub_block_len"];

impl TestResult {
    pub(crate) fn new(name: &str, statistic: f64, p_value: PValue) -> Self {
        TestResult { test_name: name.into(), params: BTreeMap::new(), statistic, p_value, aux: None }
    }

    pub(crate) fn param(mut self, k: &str, v: impl Into<Value>) -> Self {
        self.params.insert(k.into(), v.into());
        self
    }

    pub(crate) fn aux(mut self, k: &str, v: impl Into<Value>) -> Self {
        self.aux.get_or_insert_with(BTreeMap::new).insert(k.into(), v.into());
        self
    }

    /// Name plus variant parameters, e.g. `serial_frequency[m=3]`; results
    /// sharing a key are pooled for proportions and uniformity.
    pub fn key(&self) -> String {
        let parts: Vec<String> = self
            .params
            .iter()
            .filter(|(k, _)| !NON_KEY_PARAMS.contains(&k.as_str()))
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect();
        if parts.is_empty() {
            self.test_name.clone()
        } else {
            format!("{}[{}]", self.test_name, parts.join(","))
        }
    }
}

/// A test together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum TestSpec {
    Monobit,
    SerialFrequency { m: u32 },
    Oscillation,
    LongestRunOfOnes,
    MatrixRank { h: usize },
    SpectralDft,
    NonOverlappingTemplate { template: Vec<u8>, sub_blocks: usize },
    MaurerUniversal,
    ApproximateEntropy { m: usize, scale: EntropyScale },
    CumulativeSums,
    RandomExcursions,
    CrossCorrelationRandom,
}

/// Test names accepted by [`TestSpec::parse_list`].
pub const TEST_NAMES: [&str; 12] = [
    "monobit",
    "serial_frequency",
    "oscillation",
    "longest_run_of_ones",
    "matrix_rank",
    "spectral_dft",
    "nonoverlapping_template",
    "maurer_universal",
    "approximate_entropy",
    "cumulative_sums",
    "random_excursions",
    "cross_correlation_random",
];

impl TestSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TestSpec::Monobit => TEST_NAMES[0],
            TestSpec::SerialFrequency { .. } => TEST_NAMES[1],
            TestSpec::Oscillation => TEST_NAMES[2],
            TestSpec::LongestRunOfOnes => TEST_NAMES[3],
            TestSpec::MatrixRank { .. } => TEST_NAMES[4],
            TestSpec::SpectralDft => TEST_NAMES[5],
            TestSpec::NonOverlappingTemplate { .. } => TEST_NAMES[6],
            TestSpec::MaurerUniversal => TEST_NAMES[7],
            TestSpec::ApproximateEntropy { .. } => TEST_NAMES[8],
            TestSpec::CumulativeSums => TEST_NAMES[9],
            TestSpec::RandomExcursions => TEST_NAMES[10],
            TestSpec::CrossCorrelationRandom => TEST_NAMES[11],
        }
    }

    /// Every variant run by default.
    pub fn default_selection() -> Vec<TestSpec> {
        TEST_NAMES.iter().flat_map(|n| Self::variants(n).expect("known name")).collect()
    }

    fn variants(name: &str) -> Result<Vec<TestSpec>> {
        Ok(match name {
            "monobit" => vec![TestSpec::Monobit],
            "serial_frequency" => (2..=4).map(|m| TestSpec::SerialFrequency { m }).collect(),
            "oscillation" => vec![TestSpec::Oscillation],
            "longest_run_of_ones" => vec![TestSpec::LongestRunOfOnes],
            "matrix_rank" => vec![TestSpec::MatrixRank { h: 10 }, TestSpec::MatrixRank { h: 32 }],
            "spectral_dft" => vec![TestSpec::SpectralDft],
            "nonoverlapping_template" => vec![TestSpec::NonOverlappingTemplate {
                template: DEFAULT_TEMPLATE.to_vec(),
                sub_blocks: DEFAULT_SUB_BLOCKS,
            }],
            "maurer_universal" => vec![TestSpec::MaurerUniversal],
            "approximate_entropy" => vec![TestSpec::ApproximateEntropy { m: 4, scale: EntropyScale::Standard }],
            "cumulative_sums" => vec![TestSpec::CumulativeSums],
            "random_excursions" => vec![TestSpec::RandomExcursions],
            "cross_correlation_random" => vec![TestSpec::CrossCorrelationRandom],
            other => return arg(format!("unknown test {other:?}; known: {}", TEST_NAMES.join(", "))),
        })
    }

    /// Parses a comma-separated list of test names; `all` selects the default battery.
    pub fn parse_list(list: &str) -> Result<Vec<TestSpec>> {
        let mut out = Vec::new();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if name == "all" {
                out.extend(Self::default_selection());
            } else {
                out.extend(Self::variants(name)?);
            }
        }
        Ok(out)
    }

    /// Shortest block this test can be applied to.
    pub fn min_len(&self) -> usize {
        match self {
            TestSpec::Monobit | TestSpec::Oscillation | TestSpec::CumulativeSums => 100,
            TestSpec::SerialFrequency { m } => 5 * (1 << m) * *m as usize,
            TestSpec::LongestRunOfOnes => LONGEST_RUN_LEN,
            TestSpec::MatrixRank { h } => 38 * h * h,
            TestSpec::SpectralDft => 1000,
            TestSpec::NonOverlappingTemplate { template, sub_blocks } => sub_blocks * (template.len() + 1),
            TestSpec::MaurerUniversal => MAURER_LEN,
            TestSpec::ApproximateEntropy { m, .. } => 1 << (m + 5),
            TestSpec::RandomExcursions | TestSpec::CrossCorrelationRandom => 1,
        }
    }

    /// Runs the test on `bits`, taking the prefix the test is defined on
    /// where it uses a fixed window.
    pub fn run(&self, bits: &[u8], seed: u64) -> Result<Outcome> {
        if bits.len() < self.min_len() {
            return Ok(Outcome::Skipped(format!("block shorter than {} bits", self.min_len())));
        }
        let one = |r: TestResult| Ok(Outcome::Results(vec![r]));
        match self {
            TestSpec::Monobit => one(monobit(bits)?),
            TestSpec::SerialFrequency { m } => one(serial_frequency(bits, *m)?),
            TestSpec::Oscillation => one(oscillation(bits)?),
            TestSpec::LongestRunOfOnes => one(longest_run_of_ones(&bits[..LONGEST_RUN_LEN])?),
            TestSpec::MatrixRank { h } => one(matrix_rank(bits, *h)?),
            TestSpec::SpectralDft => one(spectral_dft(&bits[..bits.len() & !1])?),
            TestSpec::NonOverlappingTemplate { template, sub_blocks } => {
                one(nonoverlapping_template(bits, template, *sub_blocks)?)
            }
            TestSpec::MaurerUniversal => one(maurer_universal(bits)?),
            TestSpec::ApproximateEntropy { m, scale } => one(approximate_entropy_checked(bits, *m, *scale)?),
            TestSpec::CumulativeSums => one(cumulative_sums(bits)?),
            TestSpec::RandomExcursions => Ok(match random_excursions(bits)? {
                Excursions::Tested(v) => Outcome::Results(v),
                Excursions::InsufficientCycles { cycles } => {
                    Outcome::Skipped(format!("insufficient cycles ({cycles} < {MIN_CYCLES})"))
                }
            }),
            TestSpec::CrossCorrelationRandom => one(cross_correlation_random(bits, seed)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Results(Vec<TestResult>),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockRecord {
    pub block: usize,
    pub block_start: u64,
    pub block_len: u64,
    pub result: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkipRecord {
    pub block: usize,
    pub block_start: u64,
    pub test: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatteryReport {
    pub alpha: f64,
    pub blocks: usize,
    pub results: Vec<BlockRecord>,
    pub skipped: Vec<SkipRecord>,
    /// Pass proportion per test key over all blocks it ran on.
    pub proportions: BTreeMap<String, BatchProportion>,
    /// P-value uniformity per test key with at least 50 samples.
    pub uniformity: BTreeMap<String, Uniformity>,
}

impl BatteryReport {
    /// Keys whose proportion falls outside its interval.
    pub fn proportion_failures(&self) -> Vec<&str> {
        self.proportions.iter().filter(|(_, p)| !p.inside).map(|(k, _)| k.as_str()).collect()
    }

    /// Keys whose P-values are not uniform.
    pub fn uniformity_failures(&self) -> Vec<&str> {
        self.uniformity.iter().filter(|(_, u)| !u.uniform).map(|(k, _)| k.as_str()).collect()
    }

    pub fn all_pass(&self) -> bool {
        self.proportion_failures().is_empty() && self.uniformity_failures().is_empty()
    }

    /// One JSON object per result, then one per skipped test, then one summary per test key.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.results {
            let line = json!({
                "test": r.result.test_name,
                "params": r.result.params,
                "block_start": r.block_start,
                "block_len": r.block_len,
                "statistic": r.result.statistic,
                "p_value": r.result.p_value.value,
                "pass": r.result.p_value.pass,
            });
            writeln!(out, "{line}")?;
        }
        for s in &self.skipped {
            let line = json!({
                "test": s.test,
                "block_start": s.block_start,
                "skipped": s.reason,
            });
            writeln!(out, "{line}")?;
        }
        for (key, p) in &self.proportions {
            let u = self.uniformity.get(key);
            let line = json!({
                "summary": key,
                "samples": p.n,
                "passed": p.passed,
                "proportion": p.proportion,
                "interval": [p.interval.lo, p.interval.hi],
                "proportion_ok": p.inside,
                "p_bar": u.map(|u| u.p_bar),
                "uniform": u.map(|u| u.uniform),
            });
            writeln!(out, "{line}")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Runs `selection` on every block of `ens`. Block `i` draws any reference
/// randomness from substream `(seed, i)`.
pub fn run_battery(
    ens: &Ensemble,
    source: &dyn BlockSource,
    selection: &[TestSpec],
    seed: u64,
) -> Result<BatteryReport> {
    run_battery_at(ens, source, selection, seed, DEFAULT_ALPHA)
}

/// [`run_battery`] with pass decisions and proportion intervals at `alpha`.
pub fn run_battery_at(
    ens: &Ensemble,
    source: &dyn BlockSource,
    selection: &[TestSpec],
    seed: u64,
    alpha: f64,
) -> Result<BatteryReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return arg(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let per_block = par::try_map_range(ens.blocks.len(), |i| {
        if selection.is_empty() {
            return Ok((Vec::new(), Vec::new()));
        }
        let spec = ens.blocks[i];
        let bits = source.block_bits(i, spec)?;
        let block_seed = substream(seed, i as u64).next_u64();
        let mut done = Vec::new();
        let mut skipped = Vec::new();
        for t in selection {
            match t.run(&bits, block_seed)? {
                Outcome::Results(rs) => done.extend(rs.into_iter().map(|mut result| {
                    result.p_value = result.p_value.with_alpha(alpha);
                    BlockRecord { block: i, block_start: spec.start, block_len: spec.len, result }
                })),
                Outcome::Skipped(reason) => {
                    skipped.push(SkipRecord { block: i, block_start: spec.start, test: t.name().into(), reason })
                }
            }
        }
        Ok::<_, crate::Error>((done, skipped))
    })?;
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for (r, s) in per_block {
        results.extend(r);
        skipped.extend(s);
    }
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in &results {
        groups.entry(r.result.key()).or_default().push(r.result.p_value.value);
    }
    let mut proportions = BTreeMap::new();
    let mut uniformity = BTreeMap::new();
    for (key, pv) in groups {
        let batch = proportion_check(&pv, alpha, pv.len())?;
        proportions.insert(key.clone(), batch.into_iter().next().expect("non-empty group"));
        if pv.len() >= UNIFORMITY_MIN_SAMPLES {
            uniformity.insert(key, pvalue_uniformity(&pv)?);
        }
    }
    Ok(BatteryReport { alpha, blocks: ens.blocks.len(), results, skipped, proportions, uniformity })
}
