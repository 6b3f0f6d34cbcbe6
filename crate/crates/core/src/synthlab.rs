//! Controlled-overlap corpora.
//!
//! The overlapping tokens of an HRL–LRL pair are found under a pair-trained
//! vocabulary, a fraction of them is retained, and every other codepoint of
//! the HRL side is remapped into the Private Use Area. Words are segmented
//! with the same vocabulary, so a retained token survives verbatim exactly
//! where the vocabulary produced it, and nothing outside the retained set can
//! be shared with the LRL afterwards.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::corpus::{LanguageId, MultilingualCorpus, ResourceClass, WordTable};
use crate::error::{Error, Result};
use crate::tokenizer::{encode_corpus, Tokenizer};
use crate::trainer::{train, TrainerConfig};
use crate::vocab::Vocabulary;

/// Retained tokens plus the codepoint remapping applied to everything else.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSpec {
    pub retained: BTreeSet<String>,
    pub fraction: f64,
    pub seed: u64,
    pub mapping: BTreeMap<char, char>,
}

#[derive(Serialize, Deserialize)]
struct ShiftSpecJson {
    retained: Vec<String>,
    fraction: f64,
    seed: u64,
    mapping: BTreeMap<String, String>,
}

fn hex(c: char) -> String {
    format!("{:04X}", c as u32)
}

fn unhex(s: &str) -> Result<char> {
    u32::from_str_radix(s, 16)
        .ok()
        .and_then(char::from_u32)
        .ok_or_else(|| Error::ShiftSpec(format!("bad codepoint {s:?}")))
}

impl ShiftSpec {
    pub fn new(retained: BTreeSet<String>, fraction: f64, seed: u64) -> Self {
        ShiftSpec {
            retained,
            fraction,
            seed,
            mapping: BTreeMap::new(),
        }
    }

    /// A full-retention spec leaves text untouched.
    pub fn is_identity(&self) -> bool {
        self.fraction >= 1.0
    }

    pub fn to_json(&self) -> String {
        let json = ShiftSpecJson {
            retained: self.retained.iter().cloned().collect(),
            fraction: self.fraction,
            seed: self.seed,
            mapping: self.mapping.iter().map(|(k, v)| (hex(*k), hex(*v))).collect(),
        };
        serde_json::to_string_pretty(&json).expect("plain data serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: ShiftSpecJson = serde_json::from_str(text).map_err(|e| Error::ShiftSpec(e.to_string()))?;
        if !(0.0..=1.0).contains(&json.fraction) {
            return Err(Error::ShiftSpec(format!(
                "fraction {} outside [0, 1]",
                json.fraction
            )));
        }
        let mut mapping = BTreeMap::new();
        let mut targets = HashSet::new();
        for (k, v) in &json.mapping {
            let (src, dst) = (unhex(k)?, unhex(v)?);
            if !is_pua(dst) {
                return Err(Error::ShiftSpec(format!(
                    "target {v} is outside the private use area"
                )));
            }
            if !targets.insert(dst) {
                return Err(Error::ShiftSpec(format!("target {v} is used twice")));
            }
            mapping.insert(src, dst);
        }
        Ok(ShiftSpec {
            retained: json.retained.into_iter().collect(),
            fraction: json.fraction,
            seed: json.seed,
            mapping,
        })
    }

    fn inverse(&self) -> HashMap<char, char> {
        self.mapping.iter().map(|(k, v)| (*v, *k)).collect()
    }
}

fn is_pua(c: char) -> bool {
    matches!(c as u32, 0xE000..=0xF8FF | 0xF0000..=0xFFFFD | 0x100000..=0x10FFFD)
}

fn pua_targets() -> impl Iterator<Item = char> {
    (0xE000u32..=0xF8FF)
        .chain(0xF0000..=0xFFFFD)
        .chain(0x100000..=0x10FFFD)
        .filter_map(char::from_u32)
}

/// Tokens that occur in both languages' encodings, marker excluded.
pub fn find_overlapping_tokens(
    vocab: &Vocabulary,
    corpus: &MultilingualCorpus,
    li: &LanguageId,
    lh: &LanguageId,
) -> Result<BTreeSet<String>> {
    let i = corpus.index_of(li)?;
    let h = corpus.index_of(lh)?;
    let enc = encode_corpus(&Tokenizer::new(vocab), corpus)?;
    Ok(vocab
        .tokens()
        .iter()
        .zip(&enc.token_freqs)
        .filter(|(t, f)| t.as_str() != vocab.marker() && f[i] > 0.0 && f[h] > 0.0)
        .map(|(t, _)| t.clone())
        .collect())
}

/// Uniform sample without replacement of `round(fraction · |set|)` tokens.
///
/// The set is shuffled once per seed and a prefix is taken, so samples drawn
/// with the same seed are nested across fractions.
pub fn sample_retained(set: &BTreeSet<String>, fraction: f64, seed: u64) -> Result<BTreeSet<String>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "retention fraction must lie in [0, 1], got {fraction}"
        )));
    }
    let mut items: Vec<&String> = set.iter().collect();
    items.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let k = (fraction * set.len() as f64).round() as usize;
    Ok(items.into_iter().take(k).cloned().collect())
}

/// Remaps words; the mapping is grown in first-appearance order.
struct Shifter<'a> {
    tokenizer: Tokenizer<'a>,
    vocab: &'a Vocabulary,
}

impl<'a> Shifter<'a> {
    fn new(vocab: &'a Vocabulary) -> Self {
        Shifter {
            tokenizer: Tokenizer::new(vocab),
            vocab,
        }
    }

    /// Surface pieces of a word with a flag telling whether each is kept.
    fn pieces(&self, word: &str, spec: &ShiftSpec) -> Result<Vec<(String, bool)>> {
        let tokens = self.vocab.tokens();
        Ok(self
            .tokenizer
            .segment(word)?
            .into_iter()
            .filter(|s| !s.surface.is_empty())
            .map(|s| {
                let keep =
                    s.id.is_some_and(|id| spec.retained.contains(&tokens[id as usize]));
                (s.surface, keep)
            })
            .collect())
    }

    fn extend_mapping<'w>(
        &self,
        words: impl Iterator<Item = &'w str> + Clone,
        spec: &mut ShiftSpec,
    ) -> Result<()> {
        let mut avoid: HashSet<char> = self
            .vocab
            .alphabet()
            .iter()
            .filter_map(|t| {
                let mut cs = t.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => Some(c),
                    _ => None,
                }
            })
            .collect();
        let targets: HashSet<char> = spec.mapping.values().copied().collect();
        for w in words.clone() {
            for c in w.chars() {
                if targets.contains(&c) {
                    return Err(Error::CodepointCollision(c as u32));
                }
                avoid.insert(c);
            }
        }
        let mut free = pua_targets().filter(|c| !avoid.contains(c) && !targets.contains(c));
        for w in words {
            for (surface, keep) in self.pieces(w, spec)? {
                if keep {
                    continue;
                }
                for c in surface.chars() {
                    if !spec.mapping.contains_key(&c) {
                        let t = free.next().ok_or(Error::PuaExhausted(spec.mapping.len()))?;
                        spec.mapping.insert(c, t);
                    }
                }
            }
        }
        Ok(())
    }

    fn shift_word(&self, word: &str, spec: &ShiftSpec) -> Result<String> {
        let mut out = String::with_capacity(word.len() * 2);
        for (surface, keep) in self.pieces(word, spec)? {
            if keep {
                out.push_str(&surface);
            } else {
                out.extend(surface.chars().map(|c| spec.mapping[&c]));
            }
        }
        Ok(out)
    }
}

/// Shifts one language's word table; weights are carried over.
pub fn shift_corpus(table: &WordTable, spec: &mut ShiftSpec, vocab: &Vocabulary) -> Result<WordTable> {
    if spec.is_identity() {
        return Ok(table.clone());
    }
    let shifter = Shifter::new(vocab);
    shifter.extend_mapping(table.keys().map(String::as_str), spec)?;
    let entries: Vec<(&String, &f64)> = table.iter().collect();
    let spec = &*spec;
    let shifted = entries
        .par_iter()
        .map(|(w, _)| shifter.shift_word(w, spec))
        .collect::<Result<Vec<_>>>()?;
    let mut out = WordTable::new();
    for ((_, &weight), word) in entries.into_iter().zip(shifted) {
        *out.entry(word).or_insert(0.0) += weight;
    }
    Ok(out)
}

/// Applies the same transform to free text, line by line. Words are
/// NFC-normalized and rejoined with single spaces.
pub fn shift_text(lines: &[String], spec: &mut ShiftSpec, vocab: &Vocabulary) -> Result<Vec<String>> {
    let normalized: Vec<String> = lines.iter().map(|l| l.nfc().collect()).collect();
    if spec.is_identity() {
        return Ok(normalized);
    }
    let shifter = Shifter::new(vocab);
    shifter.extend_mapping(normalized.iter().flat_map(|l| l.split_whitespace()), spec)?;
    let spec = &*spec;
    normalized
        .par_iter()
        .map(|line| {
            let words = line
                .split_whitespace()
                .map(|w| shifter.shift_word(w, spec))
                .collect::<Result<Vec<_>>>()?;
            Ok(words.join(" "))
        })
        .collect()
}

/// Maps shifted codepoints back to their sources.
pub fn unshift_text(text: &str, spec: &ShiftSpec) -> String {
    let inverse = spec.inverse();
    text.chars()
        .map(|c| inverse.get(&c).copied().unwrap_or(c))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub li: LanguageId,
    pub lh: LanguageId,
    pub fractions: Vec<f64>,
    pub seed: u64,
    /// Draw each fraction's sample with its own seed instead of nesting.
    pub independent: bool,
    pub trainer: TrainerConfig,
}

#[derive(Debug, Clone)]
pub struct SynthRun {
    pub fraction: f64,
    pub spec: ShiftSpec,
    pub shifted: WordTable,
    /// Overlap of shifted HRL and LRL under the pair vocabulary.
    pub post_shift_overlap: BTreeSet<String>,
    /// Vocabulary retrained on the shifted pair.
    pub vocab: Vocabulary,
    /// Overlap of shifted HRL and LRL under the retrained vocabulary.
    pub retrained_overlap: BTreeSet<String>,
}

#[derive(Debug, Clone)]
pub struct SynthOutcome {
    pub pair_vocab: Vocabulary,
    pub overlap: BTreeSet<String>,
    pub runs: Vec<SynthRun>,
}

/// Pair-train, find the overlap, then sample, shift and retrain per fraction.
pub fn synth_run(corpus: &MultilingualCorpus, cfg: &SynthConfig) -> Result<SynthOutcome> {
    let pair = corpus.subset(&[cfg.li.clone(), cfg.lh.clone()])?;
    let li_class = pair.languages()[pair.index_of(&cfg.li)?].class;
    let lh_class = pair.languages()[pair.index_of(&cfg.lh)?].class;
    if li_class != ResourceClass::Low || lh_class != ResourceClass::High {
        return Err(Error::InvalidParameter(format!(
            "{} must be LRL and {} must be HRL",
            cfg.li, cfg.lh
        )));
    }
    let pair_vocab = train(&pair, &cfg.trainer)?;
    let overlap = find_overlapping_tokens(&pair_vocab, &pair, &cfg.li, &cfg.lh)?;
    let hrl_table = pair.table(pair.index_of(&cfg.lh)?);

    let mut runs = Vec::with_capacity(cfg.fractions.len());
    for (k, &fraction) in cfg.fractions.iter().enumerate() {
        let seed = if cfg.independent {
            cfg.seed.wrapping_add(k as u64 + 1)
        } else {
            cfg.seed
        };
        let retained = sample_retained(&overlap, fraction, seed)?;
        let mut spec = ShiftSpec::new(retained, fraction, seed);
        let shifted = shift_corpus(hrl_table, &mut spec, &pair_vocab)?;
        let shifted_pair = pair.replace_table(&cfg.lh, shifted.clone())?;
        let post_shift_overlap = find_overlapping_tokens(&pair_vocab, &shifted_pair, &cfg.li, &cfg.lh)?;
        let vocab = train(&shifted_pair, &cfg.trainer)?;
        let retrained_overlap = find_overlapping_tokens(&vocab, &shifted_pair, &cfg.li, &cfg.lh)?;
        runs.push(SynthRun {
            fraction,
            spec,
            shifted,
            post_shift_overlap,
            vocab,
            retrained_overlap,
        });
    }
    Ok(SynthOutcome {
        pair_vocab,
        overlap,
        runs,
    })
}
