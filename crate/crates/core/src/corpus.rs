//! Language-tagged word tables and exponentiated size smoothing.
//!
//! A [`MultilingualCorpus`] holds one word table per language. Tables map a
//! whitespace-delimited, NFC-normalized word to a non-negative weight, which
//! starts out as the raw occurrence count and becomes real-valued once
//! smoothing multipliers are applied.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Short language code such as `hi` or `mr`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LanguageId(String);

impl LanguageId {
    pub fn new(code: impl Into<String>) -> Result<Self> {
        let code = code.into();
        let valid = !code.is_empty() && !code.chars().any(|c| c.is_whitespace() || c == ':' || c == ',');
        if valid {
            Ok(LanguageId(code))
        } else {
            Err(Error::InvalidLanguage(code))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for LanguageId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        LanguageId::new(s)
    }
}

impl From<LanguageId> for String {
    fn from(id: LanguageId) -> String {
        id.0
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for LanguageId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LanguageId::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ResourceClass {
    #[serde(rename = "HRL")]
    High,
    #[serde(rename = "LRL")]
    Low,
}

impl ResourceClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ResourceClass::High => "HRL",
            ResourceClass::Low => "LRL",
        }
    }
}

impl fmt::Display for ResourceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResourceClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "HRL" => Ok(ResourceClass::High),
            "LRL" => Ok(ResourceClass::Low),
            other => Err(Error::InvalidParameter(format!(
                "resource class must be HRL or LRL, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Language {
    pub id: LanguageId,
    pub class: ResourceClass,
}

impl Language {
    pub fn new(code: &str, class: ResourceClass) -> Result<Self> {
        Ok(Language {
            id: LanguageId::new(code)?,
            class,
        })
    }
}

/// Word → weight. Iteration is in code-point order of the word.
/// Language code, class and `(word, count)` pairs.
pub type CountEntry<'a> = (&'a str, ResourceClass, &'a [(&'a str, u64)]);

pub type WordTable = BTreeMap<String, f64>;

/// Which per-language quantity smoothing treats as the language size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeBasis {
    /// Total word-token mass.
    #[default]
    Words,
    /// Number of non-blank input lines (documents).
    Lines,
}

impl FromStr for SizeBasis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "words" => Ok(SizeBasis::Words),
            "lines" => Ok(SizeBasis::Lines),
            other => Err(Error::InvalidParameter(format!(
                "size basis must be words or lines, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for SizeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SizeBasis::Words => "words",
            SizeBasis::Lines => "lines",
        })
    }
}

/// Per-language word tables with an HRL/LRL partition.
///
/// Languages are kept sorted by code so every reduction over languages runs
/// in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilingualCorpus {
    languages: Vec<Language>,
    tables: Vec<WordTable>,
    lines: Vec<u64>,
}

impl MultilingualCorpus {
    /// Builds a corpus from explicit tables. Line counts default to zero.
    pub fn new(entries: Vec<(Language, WordTable)>) -> Result<Self> {
        let entries = entries
            .into_iter()
            .map(|(lang, table)| (lang, table, 0))
            .collect();
        Self::with_lines(entries)
    }

    pub fn with_lines(mut entries: Vec<(Language, WordTable, u64)>) -> Result<Self> {
        entries.sort_by(|a, b| a.0.id.cmp(&b.0.id));
        for pair in entries.windows(2) {
            if pair[0].0.id == pair[1].0.id {
                return Err(Error::DuplicateLanguage(pair[0].0.id.to_string()));
            }
        }
        for (lang, table, _) in &entries {
            for (word, &weight) in table {
                validate_word(lang, word, weight)?;
            }
        }
        let mut languages = Vec::with_capacity(entries.len());
        let mut tables = Vec::with_capacity(entries.len());
        let mut lines = Vec::with_capacity(entries.len());
        for (lang, table, n) in entries {
            languages.push(lang);
            tables.push(table);
            lines.push(n);
        }
        Ok(MultilingualCorpus {
            languages,
            tables,
            lines,
        })
    }

    /// Convenience constructor for integer-count tables.
    pub fn from_counts(entries: &[CountEntry<'_>]) -> Result<Self> {
        let mut out = Vec::new();
        for (code, class, words) in entries {
            let mut table = WordTable::new();
            for (w, c) in words.iter() {
                *table.entry(w.to_string()).or_insert(0.0) += *c as f64;
            }
            out.push((Language::new(code, *class)?, table));
        }
        Self::new(out)
    }

    /// Counts whitespace-separated words in each language's text.
    pub fn from_texts(entries: &[(&str, ResourceClass, &str)]) -> Result<Self> {
        let mut out = Vec::new();
        for (code, class, text) in entries {
            let lang = Language::new(code, *class)?;
            let (counts, lines) = count_text(text);
            out.push((lang, to_weights(counts), lines));
        }
        Self::with_lines(out)
    }

    pub fn languages(&self) -> &[Language] {
        &self.languages
    }

    pub fn len(&self) -> usize {
        self.languages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.languages.is_empty()
    }

    pub fn tables(&self) -> &[WordTable] {
        &self.tables
    }

    pub fn table(&self, index: usize) -> &WordTable {
        &self.tables[index]
    }

    pub fn line_counts(&self) -> &[u64] {
        &self.lines
    }

    pub fn index_of(&self, id: &LanguageId) -> Result<usize> {
        self.languages
            .binary_search_by(|l| l.id.cmp(id))
            .map_err(|_| Error::UnknownLanguage(id.to_string()))
    }

    pub fn classes(&self) -> Vec<ResourceClass> {
        self.languages.iter().map(|l| l.class).collect()
    }

    /// Total weight per language.
    pub fn word_mass(&self) -> Vec<f64> {
        self.tables.iter().map(|t| t.values().sum()).collect()
    }

    pub fn sizes(&self, basis: SizeBasis) -> Vec<(LanguageId, f64)> {
        let values: Vec<f64> = match basis {
            SizeBasis::Words => self.word_mass(),
            SizeBasis::Lines => self.lines.iter().map(|&n| n as f64).collect(),
        };
        self.languages
            .iter()
            .zip(values)
            .map(|(l, v)| (l.id.clone(), v))
            .collect()
    }

    /// Restricts the corpus to the listed languages.
    pub fn subset(&self, ids: &[LanguageId]) -> Result<Self> {
        let mut entries = Vec::new();
        for id in ids {
            let i = self.index_of(id)?;
            entries.push((self.languages[i].clone(), self.tables[i].clone(), self.lines[i]));
        }
        Self::with_lines(entries)
    }

    /// Returns a copy with one language's table replaced.
    pub fn replace_table(&self, id: &LanguageId, table: WordTable) -> Result<Self> {
        let i = self.index_of(id)?;
        let lang = &self.languages[i];
        for (word, &weight) in &table {
            validate_word(lang, word, weight)?;
        }
        let mut out = self.clone();
        out.tables[i] = table;
        Ok(out)
    }

    /// Multiplies every word weight by its language's multiplier.
    pub fn apply_weights(&self, weights: &SmoothingWeights) -> Result<Self> {
        let mut out = self.clone();
        for (lang, table) in out.languages.iter().zip(out.tables.iter_mut()) {
            let m = weights
                .get(&lang.id)
                .ok_or_else(|| Error::UnknownLanguage(lang.id.to_string()))?;
            for w in table.values_mut() {
                *w *= m;
            }
        }
        Ok(out)
    }
}

fn validate_word(lang: &Language, word: &str, weight: f64) -> Result<()> {
    let bad = |reason| Error::InvalidWord {
        lang: lang.id.to_string(),
        word: word.to_string(),
        reason,
    };
    if word.is_empty() {
        return Err(bad("empty word"));
    }
    if word.chars().any(char::is_whitespace) {
        return Err(bad("word contains whitespace"));
    }
    if !(weight.is_finite() && weight >= 0.0) {
        return Err(bad("weight must be finite and non-negative"));
    }
    Ok(())
}

/// NFC-normalizes `text` and counts whitespace-separated words.
/// Returns the counts and the number of non-blank lines.
pub fn count_text(text: &str) -> (BTreeMap<String, u64>, u64) {
    let mut counts = BTreeMap::new();
    let mut lines = 0;
    for line in text.lines() {
        let normalized: String = line.nfc().collect();
        let mut any = false;
        for word in normalized.split_whitespace() {
            any = true;
            *counts.entry(word.to_string()).or_insert(0) += 1;
        }
        if any {
            lines += 1;
        }
    }
    (counts, lines)
}

fn to_weights(counts: BTreeMap<String, u64>) -> WordTable {
    counts.into_iter().map(|(w, c)| (w, c as f64)).collect()
}

#[derive(Debug, Deserialize)]
struct ManifestEntry {
    lang: String,
    class: ResourceClass,
    paths: Vec<PathBuf>,
}

/// Loads the JSON manifest `[{"lang", "class", "paths"}]`. Relative paths are
/// resolved against the manifest's directory.
pub fn load_corpus(manifest: &Path) -> Result<MultilingualCorpus> {
    let raw = fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&raw).map_err(|e| Error::Manifest {
        path: manifest.to_path_buf(),
        reason: e.to_string(),
    })?;
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));

    let mut seen = HashSet::new();
    for e in &entries {
        if !seen.insert(e.lang.clone()) {
            return Err(Error::DuplicateLanguage(e.lang.clone()));
        }
        if e.paths.is_empty() {
            return Err(Error::EmptyLanguage(e.lang.clone()));
        }
    }

    let mut out = Vec::with_capacity(entries.len());
    for e in entries {
        let lang = Language {
            id: LanguageId::new(e.lang)?,
            class: e.class,
        };
        let files: Vec<PathBuf> = e
            .paths
            .iter()
            .map(|p| if p.is_absolute() { p.clone() } else { base.join(p) })
            .collect();
        // Files are counted in parallel and reduced in listing order.
        let per_file = files
            .par_iter()
            .map(|path| {
                let text = fs::read_to_string(path).map_err(|err| Error::io(path, err))?;
                Ok(count_text(&text))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut lines = 0;
        for (c, n) in per_file {
            lines += n;
            for (w, k) in c {
                *counts.entry(w).or_insert(0) += k;
            }
        }
        if lines == 0 {
            return Err(Error::EmptyLanguage(lang.id.to_string()));
        }
        out.push((lang, to_weights(counts), lines));
    }
    MultilingualCorpus::with_lines(out)
}

/// Per-language multipliers produced by exponentiated smoothing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothingWeights {
    multipliers: BTreeMap<LanguageId, f64>,
}

impl SmoothingWeights {
    pub fn get(&self, id: &LanguageId) -> Option<f64> {
        self.multipliers.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LanguageId, f64)> {
        self.multipliers.iter().map(|(k, v)| (k, *v))
    }

    pub fn uniform(ids: impl IntoIterator<Item = LanguageId>) -> Self {
        SmoothingWeights {
            multipliers: ids.into_iter().map(|id| (id, 1.0)).collect(),
        }
    }
}

/// Share q_i = size_i / Σ size, smoothed share q'_i = q_i^S / Σ q_j^S, and
/// multiplier q'_i / q_i.
pub fn smoothing_multipliers(sizes: &[(LanguageId, f64)], exponent: f64) -> Result<SmoothingWeights> {
    if !(exponent > 0.0 && exponent <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "smoothing exponent must lie in (0, 1], got {exponent}"
        )));
    }
    for (id, s) in sizes {
        if !(s.is_finite() && *s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "size of {id} must be positive, got {s}"
            )));
        }
    }
    if exponent == 1.0 {
        return Ok(SmoothingWeights::uniform(sizes.iter().map(|(id, _)| id.clone())));
    }
    let total: f64 = sizes.iter().map(|(_, s)| s).sum();
    let shares: Vec<f64> = sizes.iter().map(|(_, s)| s / total).collect();
    let powered: Vec<f64> = shares.iter().map(|q| q.powf(exponent)).collect();
    let norm: f64 = powered.iter().sum();
    let multipliers = sizes
        .iter()
        .zip(shares.iter().zip(&powered))
        .map(|((id, _), (q, qs))| (id.clone(), (qs / norm) / q))
        .collect();
    Ok(SmoothingWeights { multipliers })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> LanguageId {
        LanguageId::new(s).unwrap()
    }

    #[test]
    fn counts_words_after_whitespace_split() {
        let c = MultilingualCorpus::from_texts(&[("aa", ResourceClass::High, "x y x")]).unwrap();
        let t = c.table(0);
        assert_eq!(t.get("x"), Some(&2.0));
        assert_eq!(t.get("y"), Some(&1.0));
        assert_eq!(c.line_counts(), &[1]);
    }

    #[test]
    fn nfc_merges_decomposed_forms() {
        let c =
            MultilingualCorpus::from_texts(&[("aa", ResourceClass::High, "caf\u{e9} cafe\u{301}")]).unwrap();
        assert_eq!(c.table(0).get("caf\u{e9}"), Some(&2.0));
    }

    #[test]
    fn punctuation_stays_attached() {
        let c = MultilingualCorpus::from_texts(&[("aa", ResourceClass::High, "hi, hi")]).unwrap();
        assert_eq!(c.table(0).len(), 2);
    }

    #[test]
    fn counting_ignores_line_order() {
        let a = count_text("a b\nc a\nb b");
        let b = count_text("b b\nc a\na b");
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_duplicate_languages() {
        let err = MultilingualCorpus::from_counts(&[
            ("aa", ResourceClass::High, &[("x", 1)]),
            ("aa", ResourceClass::Low, &[("y", 1)]),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateLanguage(_)));
    }

    #[test]
    fn rejects_bad_language_codes() {
        assert!(LanguageId::new("").is_err());
        assert!(LanguageId::new("a b").is_err());
        assert!(LanguageId::new("a:b").is_err());
    }

    #[test]
    fn smoothing_identity_at_one() {
        let w = smoothing_multipliers(&[(id("A"), 900.0), (id("B"), 100.0)], 1.0).unwrap();
        assert_eq!(w.get(&id("A")), Some(1.0));
        assert_eq!(w.get(&id("B")), Some(1.0));
    }

    #[test]
    fn smoothing_equal_sizes_is_identity() {
        for s in [0.1, 0.5, 0.7, 1.0] {
            let w = smoothing_multipliers(&[(id("A"), 42.0), (id("B"), 42.0)], s).unwrap();
            assert!((w.get(&id("A")).unwrap() - 1.0).abs() < 1e-15);
            assert!((w.get(&id("B")).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn smoothing_rejects_bad_inputs() {
        assert!(smoothing_multipliers(&[(id("A"), 0.0)], 0.7).is_err());
        assert!(smoothing_multipliers(&[(id("A"), 1.0)], 0.0).is_err());
        assert!(smoothing_multipliers(&[(id("A"), 1.0)], 1.5).is_err());
    }

    #[test]
    fn apply_weights_scales_and_keeps_zeros() {
        let c = MultilingualCorpus::from_counts(&[
            ("A", ResourceClass::High, &[("x", 10), ("z", 0)]),
            ("B", ResourceClass::Low, &[("y", 10)]),
        ])
        .unwrap();
        let w = SmoothingWeights {
            multipliers: [(id("A"), 1.0), (id("B"), 1.7679)].into_iter().collect(),
        };
        let out = c.apply_weights(&w).unwrap();
        assert_eq!(out.table(0).get("x"), Some(&10.0));
        assert_eq!(out.table(0).get("z"), Some(&0.0));
        assert!((out.table(1)["y"] - 17.679).abs() < 1e-12);

        let missing = SmoothingWeights::uniform([id("A")]);
        assert!(c.apply_weights(&missing).is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.txt"), "x y x\n").unwrap();
        let manifest = dir.path().join("m.json");
        fs::write(&manifest, r#"[{"lang":"aa","class":"HRL","paths":["a.txt"]}]"#).unwrap();
        let c = load_corpus(&manifest).unwrap();
        assert_eq!(c.table(0).get("x"), Some(&2.0));

        fs::write(
            &manifest,
            r#"[{"lang":"aa","class":"HRL","paths":["a.txt"]},{"lang":"aa","class":"LRL","paths":["a.txt"]}]"#,
        )
        .unwrap();
        assert!(matches!(load_corpus(&manifest), Err(Error::DuplicateLanguage(_))));

        fs::write(
            &manifest,
            r#"[{"lang":"aa","class":"HRL","paths":["missing.txt"]}]"#,
        )
        .unwrap();
        assert!(matches!(load_corpus(&manifest), Err(Error::Io { .. })));

        fs::write(dir.path().join("empty.txt"), "\n  \n").unwrap();
        fs::write(
            &manifest,
            r#"[{"lang":"aa","class":"HRL","paths":["empty.txt"]}]"#,
        )
        .unwrap();
        assert!(matches!(load_corpus(&manifest), Err(Error::EmptyLanguage(_))));

        fs::write(&manifest, r#"{"lang":"aa"}"#).unwrap();
        assert!(matches!(load_corpus(&manifest), Err(Error::Manifest { .. })));
    }
}
