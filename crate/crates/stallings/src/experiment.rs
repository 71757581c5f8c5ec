//! Randomized property checking over seeded sample streams.
//!
//! Word distributions: a random reduced word is drawn letter by letter,
//! uniformly among the signed letters that do not cancel the previous one; a
//! random positive word draws uniformly among the plain generators. Both hit
//! the requested length exactly.
//!
//! An experiment is deterministic under its seed: the same configuration
//! always produces the same report, byte for byte.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposition::{
    find_sources_sinks, positive_basis, trail_decomposition, PositiveBasisOutcome,
    TrailDecompositionOutcome,
};
use crate::folding::SubgroupPresentation;
use crate::graph::{is_strongly_connected, verify_decomposition};
use crate::intersection::hnc_check;
use crate::words::{Alphabet, SignedLetter, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExperimentError {
    #[error("samples must be at least 1")]
    NoSamples,
    #[error("empty range {0}..{1}")]
    EmptyRange(usize, usize),
    #[error("range must start at 1 or above")]
    ZeroRange,
    #[error("invalid ambient rank: {0}")]
    InvalidRank(String),
    #[error("unknown distribution '{0}' (expected 'positive-words' or 'reduced-words')")]
    UnknownDistribution(String),
}

/// Which word distribution drives the primary sampled subgroup.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum WordDistribution {
    PositiveWords,
    ReducedWords,
}

impl fmt::Display for WordDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordDistribution::PositiveWords => write!(f, "positive-words"),
            WordDistribution::ReducedWords => write!(f, "reduced-words"),
        }
    }
}

impl FromStr for WordDistribution {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive-words" => Ok(WordDistribution::PositiveWords),
            "reduced-words" => Ok(WordDistribution::ReducedWords),
            other => Err(ExperimentError::UnknownDistribution(other.into())),
        }
    }
}

/// Configuration of one experiment run. Ranges are inclusive.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub samples: usize,
    pub generator_count: (usize, usize),
    pub word_length: (usize, usize),
    pub distribution: WordDistribution,
    pub ambient_rank: u8,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.samples == 0 {
            return Err(ExperimentError::NoSamples);
        }
        for (lo, hi) in [self.generator_count, self.word_length] {
            if lo == 0 {
                return Err(ExperimentError::ZeroRange);
            }
            if lo > hi {
                return Err(ExperimentError::EmptyRange(lo, hi));
            }
        }
        Alphabet::new(self.ambient_rank as usize)
            .map_err(|e| ExperimentError::InvalidRank(e.to_string()))?;
        Ok(())
    }
}

/// Uniform positive word of exactly `len` letters.
pub fn random_positive_word(rng: &mut impl Rng, alphabet: Alphabet, len: usize) -> Word {
    let letters = (0..len)
        .map(|_| SignedLetter::positive(rng.gen_range(1..=alphabet.rank())))
        .collect::<Vec<_>>();
    Word::reduce(alphabet, letters).expect("letters lie in the alphabet")
}

/// Uniform freely reduced word of exactly `len` letters: each letter is
/// drawn uniformly among the signed letters not cancelling the previous one.
pub fn random_reduced_word(rng: &mut impl Rng, alphabet: Alphabet, len: usize) -> Word {
    let signed = |i: u8| {
        if i <= alphabet.rank() {
            SignedLetter::positive(i)
        } else {
            SignedLetter::negative(i - alphabet.rank())
        }
    };
    let mut letters: Vec<SignedLetter> = Vec::with_capacity(len);
    for _ in 0..len {
        let letter = loop {
            let candidate = signed(rng.gen_range(1..=2 * alphabet.rank()));
            match letters.last() {
                Some(prev) if prev.cancels(&candidate) => continue,
                _ => break candidate,
            }
        };
        letters.push(letter);
    }
    Word::reduce(alphabet, letters).expect("letters lie in the alphabet")
}

/// Random presentation: generator count uniform in `gen_count`, each word
/// of uniform length in `word_length` from the given distribution.
pub fn random_presentation(
    rng: &mut impl Rng,
    alphabet: Alphabet,
    distribution: WordDistribution,
    gen_count: (usize, usize),
    word_length: (usize, usize),
) -> SubgroupPresentation {
    let count = rng.gen_range(gen_count.0..=gen_count.1);
    let gens = (0..count)
        .map(|_| {
            let len = rng.gen_range(word_length.0..=word_length.1);
            match distribution {
                WordDistribution::PositiveWords => random_positive_word(rng, alphabet, len),
                WordDistribution::ReducedWords => random_reduced_word(rng, alphabet, len),
            }
        })
        .collect();
    SubgroupPresentation::new(alphabet, gens).expect("uniform alphabet")
}

/// Pass counts for one checked property. `total` counts the samples where
/// the property applied.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PropertyStat {
    pub name: String,
    pub passed: usize,
    pub total: usize,
}

/// A sample that violated a property, with enough data to replay it.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub sample: usize,
    pub property: String,
    /// The conjectured inequality failing is reportable; a proved theorem
    /// failing indicates an implementation bug.
    pub theorem_backed: bool,
    pub presentation_h: String,
    pub presentation_k: Option<String>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub properties: Vec<PropertyStat>,
    pub violations: Vec<Violation>,
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "experiment seed={} samples={} distribution={} generators={}..{} length={}..{} rank={}",
            self.config.seed,
            self.config.samples,
            self.config.distribution,
            self.config.generator_count.0,
            self.config.generator_count.1,
            self.config.word_length.0,
            self.config.word_length.1,
            self.config.ambient_rank,
        )?;
        for p in &self.properties {
            writeln!(f, "{}: {}/{}", p.name, p.passed, p.total)?;
        }
        writeln!(f, "violations: {}", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  sample {} violated '{}'", v.sample, v.property)?;
        }
        Ok(())
    }
}

struct PropertyTracker {
    name: &'static str,
    theorem_backed: bool,
    passed: usize,
    total: usize,
}

impl PropertyTracker {
    fn new(name: &'static str, theorem_backed: bool) -> Self {
        PropertyTracker { name, theorem_backed, passed: 0, total: 0 }
    }

    fn record(
        &mut self,
        ok: bool,
        sample: usize,
        h: &SubgroupPresentation,
        k: Option<&SubgroupPresentation>,
        violations: &mut Vec<Violation>,
    ) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else {
            violations.push(Violation {
                sample,
                property: self.name.into(),
                theorem_backed: self.theorem_backed,
                presentation_h: h.to_string(),
                presentation_k: k.map(|p| p.to_string()),
            });
        }
    }
}

/// Run the configured number of samples and evaluate every applicable
/// property on each. Per sample, the primary subgroup H follows the
/// configured distribution and the partner K is always drawn from reduced
/// words.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let alphabet = Alphabet::new(config.ambient_rank as usize)
        .map_err(|e| ExperimentError::InvalidRank(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let positive_expected = config.distribution == WordDistribution::PositiveWords;
    let mut strong_conn = PropertyTracker::new(
        "positive generating set gives a strongly connected folding",
        true,
    );
    let mut basis_trip = PropertyTracker::new(
        "strongly connected folding yields a positive basis (round trip)",
        true,
    );
    let mut strong_decomp = PropertyTracker::new(
        "strong decomposition verifies with strongly connected prefixes",
        true,
    );
    let mut equivalence = PropertyTracker::new(
        "trail decomposition exists iff source- and sink-free",
        true,
    );
    let mut balanced = PropertyTracker::new("trail decomposition implies 3-balanced", true);
    let mut contrapositive =
        PropertyTracker::new("unbalanced folding has a source or sink", true);
    let mut proved_bounds =
        PropertyTracker::new("proved intersection bounds (neumann, burns, tardos)", true);
    let mut hnc = PropertyTracker::new("hanna neumann conjecture bound", false);
    let mut positive_hnc = PropertyTracker::new(
        "positively generated factor satisfies the conjecture bound",
        true,
    );
    let mut source_free_hnc = PropertyTracker::new(
        "source/sink-free factor satisfies the conjecture bound",
        true,
    );

    let mut violations = Vec::new();

    for sample in 0..config.samples {
        let ph = random_presentation(
            &mut rng,
            alphabet,
            config.distribution,
            config.generator_count,
            config.word_length,
        );
        let pk = random_presentation(
            &mut rng,
            alphabet,
            WordDistribution::ReducedWords,
            config.generator_count,
            config.word_length,
        );
        let fh = ph.folding();
        let strongly_connected = is_strongly_connected(fh.graph());

        if positive_expected {
            strong_conn.record(strongly_connected, sample, &ph, None, &mut violations);
        }

        if strongly_connected {
            let ok = match positive_basis(&fh) {
                PositiveBasisOutcome::Basis(basis) => {
                    let all_positive = basis.iter().all(|w| w.is_positive());
                    let sized = basis.len() == fh.rank();
                    let refolded = SubgroupPresentation::new(alphabet, basis.into_iter().collect())
                        .expect("uniform alphabet")
                        .folding();
                    all_positive && sized && refolded.is_isomorphic_to(&fh)
                }
                PositiveBasisOutcome::NotStronglyConnected => false,
            };
            basis_trip.record(ok, sample, &ph, None, &mut violations);

            let ok = match crate::graph::strong_trail_decomposition(fh.graph(), fh.base()) {
                Ok(d) => {
                    verify_decomposition(fh.graph(), &d, true)
                        && d.trails().iter().all(|t| t.is_self_avoiding(fh.graph()))
                        && (0..d.trails().len()).all(|i| {
                            is_strongly_connected(&d.prefix_union(fh.graph(), i).unwrap())
                        })
                }
                Err(_) => false,
            };
            strong_decomp.record(ok, sample, &ph, None, &mut violations);
        }

        let report = find_sources_sinks(&fh);
        let decomposition = trail_decomposition(&fh).expect("generators are non-empty words");
        match &decomposition {
            TrailDecompositionOutcome::Decomposition(d) => {
                equivalence.record(
                    report.is_empty() && verify_decomposition(fh.graph(), d, false),
                    sample,
                    &ph,
                    None,
                    &mut violations,
                );
                if alphabet.rank() == 2 {
                    balanced.record(
                        fh.is_3_balanced().expect("rank 2"),
                        sample,
                        &ph,
                        None,
                        &mut violations,
                    );
                }
            }
            TrailDecompositionOutcome::NoDecomposition(r) => {
                equivalence.record(!r.is_empty(), sample, &ph, None, &mut violations);
            }
        }
        if alphabet.rank() == 2 && !fh.is_3_balanced().expect("rank 2") {
            contrapositive.record(!report.is_empty(), sample, &ph, None, &mut violations);
        }

        let pair = hnc_check(&ph, &pk).expect("same alphabet");
        proved_bounds.record(pair.proved_bounds_hold(), sample, &ph, Some(&pk), &mut violations);
        hnc.record(pair.verdict_hn_conjecture, sample, &ph, Some(&pk), &mut violations);
        if pair.h_positively_generated || pair.k_positively_generated {
            positive_hnc.record(pair.verdict_hn_conjecture, sample, &ph, Some(&pk), &mut violations);
        }
        if alphabet.rank() == 2 && (pair.h_source_sink_free || pair.k_source_sink_free) {
            source_free_hnc.record(
                pair.verdict_hn_conjecture,
                sample,
                &ph,
                Some(&pk),
                &mut violations,
            );
        }
    }

    let trackers = [
        strong_conn,
        basis_trip,
        strong_decomp,
        equivalence,
        balanced,
        contrapositive,
        proved_bounds,
        hnc,
        positive_hnc,
        source_free_hnc,
    ];
    let properties = trackers
        .into_iter()
        .filter(|t| t.total > 0)
        .map(|t| PropertyStat { name: t.name.into(), passed: t.passed, total: t.total })
        .collect();

    Ok(ExperimentReport { config: config.clone(), properties, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(distribution: WordDistribution) -> ExperimentConfig {
        ExperimentConfig {
            seed: 1,
            samples: 50,
            generator_count: (1, 3),
            word_length: (1, 4),
            distribution,
            ambient_rank: 2,
        }
    }

    #[test]
    fn zero_samples_is_a_config_error() {
        let mut c = config(WordDistribution::PositiveWords);
        c.samples = 0;
        assert_eq!(c.validate(), Err(ExperimentError::NoSamples));
    }

    #[test]
    fn empty_range_is_a_config_error() {
        let mut c = config(WordDistribution::PositiveWords);
        c.word_length = (3, 2);
        assert_eq!(c.validate(), Err(ExperimentError::EmptyRange(3, 2)));
    }

    #[test]
    fn reduced_words_are_reduced_and_sized() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let alphabet = Alphabet::new(2).unwrap();
        for len in 1..10 {
            let w = random_reduced_word(&mut rng, alphabet, len);
            assert_eq!(w.len(), len);
        }
        for len in 1..10 {
            let w = random_positive_word(&mut rng, alphabet, len);
            assert_eq!(w.len(), len);
            assert!(w.is_positive());
        }
    }

    #[test]
    fn reports_are_deterministic_under_seed() {
        for distribution in [WordDistribution::PositiveWords, WordDistribution::ReducedWords] {
            let c = config(distribution);
            let a = run_experiment(&c).unwrap();
            let b = run_experiment(&c).unwrap();
            assert_eq!(a.to_string(), b.to_string());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn positive_distribution_checks_pass() {
        let report = run_experiment(&config(WordDistribution::PositiveWords)).unwrap();
        assert!(report.violations.is_empty(), "{}", report);
        let strong = &report.properties[0];
        assert_eq!(strong.passed, strong.total);
        assert_eq!(strong.total, 50);
    }

    #[test]
    fn reduced_distribution_checks_pass() {
        let report = run_experiment(&config(WordDistribution::ReducedWords)).unwrap();
        assert!(report.violations.is_empty(), "{}", report);
    }

    #[test]
    fn distribution_parses_and_displays() {
        assert_eq!(
            "positive-words".parse::<WordDistribution>().unwrap(),
            WordDistribution::PositiveWords
        );
        assert_eq!(WordDistribution::ReducedWords.to_string(), "reduced-words");
        assert!("gibberish".parse::<WordDistribution>().is_err());
    }
}
