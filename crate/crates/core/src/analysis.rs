//! Vocabulary composition and cross-lingual overlap statistics.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;

use crate::corpus::{LanguageId, MultilingualCorpus, ResourceClass};
use crate::error::{Error, Result};
use crate::overlap_math::{generalized_mean, PowerParam};
use crate::tokenizer::{encode_corpus, CorpusEncoding, Tokenizer};
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Category {
    #[serde(rename = "LRL-only")]
    LrlOnly,
    #[serde(rename = "HRL-only")]
    HrlOnly,
    #[serde(rename = "shared")]
    Shared,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::LrlOnly, Category::HrlOnly, Category::Shared];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::LrlOnly => "LRL-only",
            Category::HrlOnly => "HRL-only",
            Category::Shared => "shared",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which occurrences weight the frequency-weighted fractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    All,
    Lrl,
    Hrl,
}

impl FromStr for Weighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Weighting::All),
            "lrl" => Ok(Weighting::Lrl),
            "hrl" => Ok(Weighting::Hrl),
            other => Err(Error::InvalidParameter(format!(
                "weighting must be all, lrl or hrl, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weighting::All => "all",
            Weighting::Lrl => "lrl",
            Weighting::Hrl => "hrl",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryStats {
    pub category: Category,
    pub tokens: usize,
    /// Share of occurring lexical vocabulary tokens.
    pub vocab_frac: f64,
    /// Share of occurrences across all languages.
    pub weighted_frac: f64,
    pub lrl_weighted_frac: f64,
    pub hrl_weighted_frac: f64,
}

impl CategoryStats {
    pub fn weighted(&self, w: Weighting) -> f64 {
        match w {
            Weighting::All => self.weighted_frac,
            Weighting::Lrl => self.lrl_weighted_frac,
            Weighting::Hrl => self.hrl_weighted_frac,
        }
    }
}

/// How vocabulary tokens split into LRL-only, HRL-only and shared. The
/// end-of-word marker and unknown-character tokens are not counted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionReport {
    pub categories: Vec<CategoryStats>,
    /// Lexical vocabulary tokens that never occur in the corpus.
    pub unused: usize,
}

impl CompositionReport {
    pub fn get(&self, c: Category) -> &CategoryStats {
        self.categories
            .iter()
            .find(|s| s.category == c)
            .expect("all categories present")
    }

    pub fn occurring(&self) -> usize {
        self.categories.iter().map(|c| c.tokens).sum()
    }

    pub fn to_csv(&self, weighting: Weighting) -> String {
        let mut out = String::from("category,tokens,vocab_frac,weighted_frac\n");
        for c in &self.categories {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                c.category,
                c.tokens,
                c.vocab_frac,
                c.weighted(weighting)
            );
        }
        let _ = writeln!(out, "unused,{},,", self.unused);
        out
    }
}

fn check_languages(vocab: &Vocabulary, corpus: &MultilingualCorpus) -> Result<()> {
    if vocab.languages.as_slice() != corpus.languages() {
        let show = |ls: &[crate::corpus::Language]| {
            ls.iter()
                .map(|l| format!("{}:{}", l.id, l.class))
                .collect::<Vec<_>>()
                .join(",")
        };
        return Err(Error::LanguageMismatch(format!(
            "vocabulary has [{}], corpus has [{}]",
            show(&vocab.languages),
            show(corpus.languages())
        )));
    }
    Ok(())
}

fn frac(part: f64, whole: f64) -> f64 {
    if whole > 0.0 {
        part / whole
    } else {
        0.0
    }
}

/// Classifies a token from its per-language frequencies.
pub fn classify(freqs: &[f64], classes: &[ResourceClass]) -> Option<Category> {
    let in_class = |c| freqs.iter().zip(classes).any(|(f, k)| *k == c && *f > 0.0);
    match (in_class(ResourceClass::Low), in_class(ResourceClass::High)) {
        (true, true) => Some(Category::Shared),
        (true, false) => Some(Category::LrlOnly),
        (false, true) => Some(Category::HrlOnly),
        (false, false) => None,
    }
}

pub fn composition_from_encoding(
    vocab: &Vocabulary,
    enc: &CorpusEncoding,
    classes: &[ResourceClass],
) -> CompositionReport {
    let marker = vocab.marker();
    let mut counts = [0usize; 3];
    let mut mass = [[0.0f64; 3]; 3];
    let mut unused = 0;
    for (token, freqs) in vocab.tokens().iter().zip(&enc.token_freqs) {
        if token == marker {
            continue;
        }
        let Some(cat) = classify(freqs, classes) else {
            unused += 1;
            continue;
        };
        let slot = Category::ALL.iter().position(|c| *c == cat).unwrap();
        counts[slot] += 1;
        for (f, k) in freqs.iter().zip(classes) {
            mass[slot][0] += f;
            let w = if *k == ResourceClass::Low { 1 } else { 2 };
            mass[slot][w] += f;
        }
    }
    let occurring: usize = counts.iter().sum();
    let totals: Vec<f64> = (0..3).map(|w| mass.iter().map(|m| m[w]).sum()).collect();
    let categories = Category::ALL
        .iter()
        .enumerate()
        .map(|(i, &category)| CategoryStats {
            category,
            tokens: counts[i],
            vocab_frac: frac(counts[i] as f64, occurring as f64),
            weighted_frac: frac(mass[i][0], totals[0]),
            lrl_weighted_frac: frac(mass[i][1], totals[1]),
            hrl_weighted_frac: frac(mass[i][2], totals[2]),
        })
        .collect();
    CompositionReport { categories, unused }
}

pub fn vocab_composition(vocab: &Vocabulary, corpus: &MultilingualCorpus) -> Result<CompositionReport> {
    check_languages(vocab, corpus)?;
    let enc = encode_corpus(&Tokenizer::new(vocab), corpus)?;
    Ok(composition_from_encoding(vocab, &enc, &corpus.classes()))
}

/// Σ over vocabulary tokens of GM(f_ki, f_kh, p), with both languages
/// encoded by `vocab`.
pub fn corpus_overlap(
    vocab: &Vocabulary,
    corpus: &MultilingualCorpus,
    li: &LanguageId,
    lh: &LanguageId,
    p: PowerParam,
) -> Result<f64> {
    check_languages(vocab, corpus)?;
    let i = corpus.index_of(li)?;
    let h = corpus.index_of(lh)?;
    if corpus.languages()[i].class != ResourceClass::Low {
        return Err(Error::InvalidParameter(format!(
            "{li} is not a low-resource language"
        )));
    }
    if corpus.languages()[h].class != ResourceClass::High {
        return Err(Error::InvalidParameter(format!(
            "{lh} is not a high-resource language"
        )));
    }
    let enc = encode_corpus(&Tokenizer::new(vocab), corpus)?;
    let mut total = 0.0;
    for f in &enc.token_freqs {
        total += generalized_mean(f[i], f[h], p)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryDelta {
    pub category: Category,
    pub delta_tokens: i64,
    pub delta_vocab_frac: f64,
    pub delta_weighted_frac: f64,
    /// Relative change of the weighted fraction, in percent.
    pub rise_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub a: CompositionReport,
    pub b: CompositionReport,
    pub deltas: Vec<CategoryDelta>,
    pub weighting: String,
}

fn rise(before: f64, after: f64) -> f64 {
    if before == after {
        0.0
    } else if before == 0.0 {
        f64::INFINITY
    } else {
        100.0 * (after - before) / before
    }
}

pub fn compare_reports(a: CompositionReport, b: CompositionReport, weighting: Weighting) -> Comparison {
    let deltas = Category::ALL
        .iter()
        .map(|&c| {
            let (x, y) = (a.get(c), b.get(c));
            CategoryDelta {
                category: c,
                delta_tokens: y.tokens as i64 - x.tokens as i64,
                delta_vocab_frac: y.vocab_frac - x.vocab_frac,
                delta_weighted_frac: y.weighted(weighting) - x.weighted(weighting),
                rise_pct: rise(x.weighted(weighting), y.weighted(weighting)),
            }
        })
        .collect();
    Comparison {
        a,
        b,
        deltas,
        weighting: weighting.to_string(),
    }
}

/// Composition of `b` relative to `a` on the same corpus.
pub fn compare_vocabs(
    a: &Vocabulary,
    b: &Vocabulary,
    corpus: &MultilingualCorpus,
    weighting: Weighting,
) -> Result<Comparison> {
    let ra = vocab_composition(a, corpus)?;
    let rb = vocab_composition(b, corpus)?;
    Ok(compare_reports(ra, rb, weighting))
}

impl Comparison {
    fn weighting(&self) -> Weighting {
        self.weighting.parse().unwrap_or_default()
    }

    pub fn to_csv(&self) -> String {
        let w = self.weighting();
        let mut out = String::from("vocab,category,tokens,vocab_frac,weighted_frac,rise_pct\n");
        for (label, report) in [("a", &self.a), ("b", &self.b)] {
            for (c, d) in report.categories.iter().zip(&self.deltas) {
                let rise = if label == "a" { 0.0 } else { d.rise_pct };
                let _ = writeln!(
                    out,
                    "{label},{},{},{},{},{}",
                    c.category,
                    c.tokens,
                    c.vocab_frac,
                    c.weighted(w),
                    rise
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ResourceClass::{High, Low};
    use crate::overlap_math::MixWeight;
    use crate::trainer::{train, TrainerConfig};

    fn config(budget: usize, alpha: f64) -> TrainerConfig {
        TrainerConfig {
            budget,
            alpha: MixWeight::new(alpha).unwrap(),
            ..TrainerConfig::default()
        }
    }

    #[test]
    fn identical_languages_are_fully_shared() {
        let c = MultilingualCorpus::from_counts(&[
            ("h", High, &[("abc", 4), ("bca", 2)]),
            ("l", Low, &[("abc", 1), ("bca", 3)]),
        ])
        .unwrap();
        let v = train(&c, &config(8, 0.5)).unwrap();
        let r = vocab_composition(&v, &c).unwrap();
        assert_eq!(r.get(Category::Shared).vocab_frac, 1.0);
        assert_eq!(r.get(Category::Shared).weighted_frac, 1.0);
    }

    #[test]
    fn disjoint_scripts_share_nothing() {
        let c = MultilingualCorpus::from_counts(&[("h", High, &[("abc", 4)]), ("l", Low, &[("αβγ", 2)])])
            .unwrap();
        let v = train(&c, &config(7, 0.5)).unwrap();
        let r = vocab_composition(&v, &c).unwrap();
        assert_eq!(r.get(Category::Shared).tokens, 0);
        let sum: f64 = r.categories.iter().map(|c| c.vocab_frac).sum();
        assert!((sum - 1.0).abs() < 1e-9);
        let p = PowerParam::MIN;
        let l = LanguageId::new("l").unwrap();
        let h = LanguageId::new("h").unwrap();
        // Only the marker is common.
        assert_eq!(corpus_overlap(&v, &c, &l, &h, p).unwrap(), 2.0);
    }

    #[test]
    fn overlap_identity_for_identical_corpora() {
        let c = MultilingualCorpus::from_counts(&[
            ("h", High, &[("ab", 3), ("b", 2)]),
            ("l", Low, &[("ab", 3), ("b", 2)]),
        ])
        .unwrap();
        let v = train(&c, &config(5, 0.0)).unwrap();
        let l = LanguageId::new("l").unwrap();
        let h = LanguageId::new("h").unwrap();
        let enc = encode_corpus(&Tokenizer::new(&v), &c).unwrap();
        let expected: f64 = enc.token_freqs.iter().map(|f| f[0]).sum();
        for p in [1.0, 0.0, -1.0] {
            let got = corpus_overlap(&v, &c, &l, &h, PowerParam::new(p).unwrap()).unwrap();
            assert!((got - expected).abs() < 1e-9);
        }
        assert!(corpus_overlap(&v, &c, &h, &l, PowerParam::MIN).is_err());
    }

    #[test]
    fn mismatched_languages_rejected() {
        let c =
            MultilingualCorpus::from_counts(&[("h", High, &[("ab", 3)]), ("l", Low, &[("ab", 1)])]).unwrap();
        let v = train(&c, &config(5, 0.0)).unwrap();
        let other =
            MultilingualCorpus::from_counts(&[("h", High, &[("ab", 3)]), ("x", Low, &[("ab", 1)])]).unwrap();
        assert!(matches!(
            vocab_composition(&v, &other),
            Err(Error::LanguageMismatch(_))
        ));
    }

    #[test]
    fn identical_vocabularies_have_zero_deltas() {
        let c =
            MultilingualCorpus::from_counts(&[("h", High, &[("ab", 3)]), ("l", Low, &[("ac", 1)])]).unwrap();
        let v = train(&c, &config(6, 0.0)).unwrap();
        let cmp = compare_vocabs(&v, &v, &c, Weighting::All).unwrap();
        for d in &cmp.deltas {
            assert_eq!(d.delta_tokens, 0);
            assert_eq!(d.rise_pct, 0.0);
        }
    }
}
