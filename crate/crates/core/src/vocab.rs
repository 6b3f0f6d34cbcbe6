//! Trained vocabularies and their text serialization.
//!
//! ```text
//! #obpe v1
//! #budget 300
//! #alpha 0.5
//! #p -inf
//! #marker ⟨/w⟩
//! #langs de:LRL,en:HRL
//! #smoothing none
//! #basis words
//! #tie_break lex
//! #seed
//! #chars a b c ⟨/w⟩
//! #early_stop false
//! #merges 2
//! a b
//! ab c
//! ```
//!
//! Headers end at `#merges <count>`, after which exactly `count` merge lines
//! follow in rank order. Tokens never contain whitespace; a token ending with
//! the end-of-word marker is written with the marker spelled `⟨/w⟩`.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::{Language, ResourceClass, SizeBasis};
use crate::error::{Error, Result};
use crate::overlap_math::{MixWeight, PowerParam};
use crate::trainer::{TieBreak, TrainerConfig};

/// Spelling of the end-of-word marker in vocabulary files.
pub const MARKER_ESCAPE: &str = "⟨/w⟩";
/// Token emitted for characters outside the vocabulary.
pub const UNK_TOKEN: &str = "⟨unk⟩";

const MAGIC: &str = "#obpe v1";

#[derive(Debug, Clone, PartialEq)]
pub struct MergeRule {
    pub left: String,
    pub right: String,
    pub merged: String,
    pub rank: usize,
    /// Score at induction time; absent for rules read back from a file.
    pub score: Option<f64>,
}

impl MergeRule {
    pub fn new(left: &str, right: &str, rank: usize, score: Option<f64>) -> Self {
        MergeRule {
            left: left.to_string(),
            right: right.to_string(),
            merged: format!("{left}{right}"),
            rank,
            score,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    pub config: TrainerConfig,
    pub languages: Vec<Language>,
    alphabet: Vec<String>,
    merges: Vec<MergeRule>,
    tokens: Vec<String>,
    token_freqs: Vec<Vec<f64>>,
    pub early_stop: bool,
}

impl Vocabulary {
    /// Assembles a vocabulary; `token_freqs` is indexed like `tokens()` or empty.
    pub(crate) fn from_parts(
        config: TrainerConfig,
        languages: Vec<Language>,
        alphabet: Vec<String>,
        merges: Vec<MergeRule>,
        token_freqs: Vec<Vec<f64>>,
        early_stop: bool,
    ) -> Self {
        let tokens = token_order(&alphabet, &merges);
        debug_assert!(token_freqs.is_empty() || token_freqs.len() == tokens.len());
        Vocabulary {
            config,
            languages,
            alphabet,
            merges,
            tokens,
            token_freqs,
            early_stop,
        }
    }

    /// Builds a vocabulary directly from an alphabet and merge pairs.
    pub fn from_merges(
        config: TrainerConfig,
        languages: Vec<Language>,
        alphabet: Vec<String>,
        pairs: &[(&str, &str)],
    ) -> Result<Self> {
        let merges = pairs
            .iter()
            .enumerate()
            .map(|(rank, (l, r))| MergeRule::new(l, r, rank, None))
            .collect::<Vec<_>>();
        check_merges(&alphabet, &merges)?;
        Ok(Self::from_parts(
            config,
            languages,
            alphabet,
            merges,
            Vec::new(),
            false,
        ))
    }

    pub fn marker(&self) -> &str {
        &self.config.marker
    }

    /// Initial symbols: characters in code-point order, then the marker.
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    /// Distinct tokens: the alphabet, then merged tokens by rank.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Per-language frequency of each token under the training corpus's final
    /// segmentation. Empty for vocabularies loaded from disk.
    pub fn token_freqs(&self) -> &[Vec<f64>] {
        &self.token_freqs
    }

    pub fn token_freq(&self, token: &str) -> Option<&[f64]> {
        let i = self.tokens.iter().position(|t| t == token)?;
        self.token_freqs.get(i).map(Vec::as_slice)
    }

    /// The vocabulary truncated to its first `k` merges.
    pub fn prefix(&self, k: usize) -> Vocabulary {
        let merges = self.merges[..k.min(self.merges.len())].to_vec();
        Self::from_parts(
            self.config.clone(),
            self.languages.clone(),
            self.alphabet.clone(),
            merges,
            Vec::new(),
            false,
        )
    }

    pub fn to_text(&self) -> String {
        let marker = self.marker();
        let esc = |t: &str| escape(t, marker);
        let mut out = String::new();
        let cfg = &self.config;
        let langs = self
            .languages
            .iter()
            .map(|l| format!("{}:{}", l.id, l.class))
            .collect::<Vec<_>>()
            .join(",");
        let smoothing = cfg
            .smoothing
            .map(|s| s.to_string())
            .unwrap_or_else(|| "none".into());
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "#budget {}", cfg.budget);
        let _ = writeln!(out, "#alpha {}", cfg.alpha);
        let _ = writeln!(out, "#p {}", cfg.p);
        let _ = writeln!(out, "#marker {}", cfg.marker);
        let _ = writeln!(out, "#langs {langs}");
        let _ = writeln!(out, "#smoothing {smoothing}");
        let _ = writeln!(out, "#basis {}", cfg.size_basis);
        let _ = writeln!(out, "#tie_break {}", cfg.tie_break);
        push_list(&mut out, "seed", cfg.seed_tokens.iter().map(String::as_str));
        push_list(&mut out, "chars", self.alphabet.iter().map(|t| esc(t)));
        let _ = writeln!(out, "#early_stop {}", self.early_stop);
        let _ = writeln!(out, "#merges {}", self.merges.len());
        for m in &self.merges {
            let _ = writeln!(out, "{} {}", esc(&m.left), esc(&m.right));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse(&text)
    }
}

pub fn save_vocab(vocab: &Vocabulary, path: &Path) -> Result<()> {
    vocab.save(path)
}

pub fn load_vocab(path: &Path) -> Result<Vocabulary> {
    Vocabulary::load(path)
}

fn push_list(out: &mut String, key: &str, items: impl Iterator<Item = impl AsRef<str>>) {
    out.push('#');
    out.push_str(key);
    for item in items {
        out.push(' ');
        out.push_str(item.as_ref());
    }
    out.push('\n');
}

fn escape(token: &str, marker: &str) -> String {
    match token.strip_suffix(marker) {
        Some(stem) if marker != MARKER_ESCAPE => format!("{stem}{MARKER_ESCAPE}"),
        _ => token.to_string(),
    }
}

fn unescape(token: &str, marker: &str) -> String {
    match token.strip_suffix(MARKER_ESCAPE) {
        Some(stem) if marker != MARKER_ESCAPE => format!("{stem}{marker}"),
        _ => token.to_string(),
    }
}

fn token_order(alphabet: &[String], merges: &[MergeRule]) -> Vec<String> {
    let mut seen: HashSet<&str> = HashSet::new();
    let mut tokens = Vec::with_capacity(alphabet.len() + merges.len());
    for t in alphabet.iter().chain(merges.iter().map(|m| &m.merged)) {
        if seen.insert(t) {
            tokens.push(t.clone());
        }
    }
    tokens
}

/// Each merge must combine known tokens and appear once.
fn check_merges(alphabet: &[String], merges: &[MergeRule]) -> Result<()> {
    let mut known: HashSet<&str> = alphabet.iter().map(String::as_str).collect();
    let mut pairs: HashSet<(&str, &str)> = HashSet::new();
    for (i, m) in merges.iter().enumerate() {
        if !known.contains(m.left.as_str()) || !known.contains(m.right.as_str()) {
            return Err(Error::MalformedVocab {
                line: i + 1,
                reason: format!("merge {} {} uses an unknown token", m.left, m.right),
            });
        }
        if !pairs.insert((&m.left, &m.right)) {
            return Err(Error::DuplicateMerge {
                left: m.left.clone(),
                right: m.right.clone(),
                line: i + 1,
            });
        }
        known.insert(&m.merged);
    }
    Ok(())
}

const HEADER_KEYS: [&str; 11] = [
    "budget",
    "alpha",
    "p",
    "marker",
    "langs",
    "smoothing",
    "basis",
    "tie_break",
    "seed",
    "chars",
    "early_stop",
];

fn parse(text: &str) -> Result<Vocabulary> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, MAGIC)) => {}
        Some((_, l)) if l.starts_with("#obpe ") => {
            return Err(Error::VersionMismatch(l["#obpe ".len()..].to_string()))
        }
        _ => {
            return Err(Error::MalformedVocab {
                line: 1,
                reason: "missing #obpe header".into(),
            })
        }
    }

    let bad = |line: usize, reason: String| Error::MalformedVocab { line, reason };

    let mut header: HashMap<&str, (usize, &str)> = HashMap::new();
    let merge_count = loop {
        let (n, line) = lines
            .next()
            .ok_or_else(|| bad(0, "missing #merges header".into()))?;
        let body = line
            .strip_prefix('#')
            .ok_or_else(|| bad(n, "expected a header line".into()))?;
        let (key, value) = body.split_once(' ').unwrap_or((body, ""));
        if key == "merges" {
            break value
                .parse::<usize>()
                .map_err(|_| bad(n, format!("bad merge count {value:?}")))?;
        }
        if !HEADER_KEYS.contains(&key) {
            return Err(Error::UnknownHeaderKey(key.to_string()));
        }
        if header.insert(key, (n, value)).is_some() {
            return Err(bad(n, format!("repeated header key {key:?}")));
        }
    };

    let get = |key: &str| -> Result<(usize, &str)> {
        header
            .get(key)
            .copied()
            .ok_or_else(|| bad(0, format!("missing header key {key:?}")))
    };
    let field = |key: &str| -> Result<(usize, &str)> { get(key) };

    let (n, v) = field("budget")?;
    let budget = v
        .parse::<usize>()
        .map_err(|_| bad(n, format!("bad budget {v:?}")))?;
    let (n, v) = field("alpha")?;
    let alpha: MixWeight = v.parse().map_err(|e: Error| bad(n, e.to_string()))?;
    let (n, v) = field("p")?;
    let p: PowerParam = v.parse().map_err(|e: Error| bad(n, e.to_string()))?;
    let (n, marker) = field("marker")?;
    if marker.is_empty() {
        return Err(bad(n, "empty marker".into()));
    }
    let (n, v) = field("langs")?;
    let mut languages = Vec::new();
    if !v.is_empty() {
        for item in v.split(',') {
            let (code, class) = item
                .split_once(':')
                .ok_or_else(|| bad(n, format!("bad language entry {item:?}")))?;
            let class: ResourceClass = class.parse().map_err(|e: Error| bad(n, e.to_string()))?;
            languages.push(Language::new(code, class).map_err(|e| bad(n, e.to_string()))?);
        }
    }
    let (n, v) = field("smoothing")?;
    let smoothing = match v {
        "none" => None,
        s => Some(
            s.parse::<f64>()
                .map_err(|_| bad(n, format!("bad smoothing exponent {s:?}")))?,
        ),
    };
    let (n, v) = field("basis")?;
    let size_basis: SizeBasis = v.parse().map_err(|e: Error| bad(n, e.to_string()))?;
    let (n, v) = field("tie_break")?;
    let tie_break: TieBreak = v.parse().map_err(|e: Error| bad(n, e.to_string()))?;
    let (_, v) = field("seed")?;
    let seed_tokens = v.split(' ').filter(|s| !s.is_empty()).map(String::from).collect();
    let (n, v) = field("chars")?;
    let alphabet: Vec<String> = v
        .split(' ')
        .filter(|s| !s.is_empty())
        .map(|t| unescape(t, marker))
        .collect();
    if alphabet.is_empty() {
        return Err(bad(n, "empty alphabet".into()));
    }
    let (n, v) = field("early_stop")?;
    let early_stop = v
        .parse::<bool>()
        .map_err(|_| bad(n, format!("bad early_stop {v:?}")))?;

    let config = TrainerConfig {
        budget,
        alpha,
        p,
        smoothing,
        size_basis,
        tie_break,
        marker: marker.to_string(),
        seed_tokens,
    };

    let mut merges = Vec::with_capacity(merge_count);
    let mut known: HashSet<String> = alphabet.iter().cloned().collect();
    let mut pairs: HashSet<(String, String)> = HashSet::new();
    for rank in 0..merge_count {
        let (n, line) = lines
            .next()
            .ok_or_else(|| bad(0, format!("expected {merge_count} merges, found {rank}")))?;
        let mut parts = line.split(' ');
        let (left, right) = match (parts.next(), parts.next(), parts.next()) {
            (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => {
                (unescape(l, marker), unescape(r, marker))
            }
            _ => return Err(bad(n, format!("expected two tokens, got {line:?}"))),
        };
        if !known.contains(&left) || !known.contains(&right) {
            return Err(bad(n, format!("merge {line:?} uses an unknown token")));
        }
        if !pairs.insert((left.clone(), right.clone())) {
            return Err(Error::DuplicateMerge { left, right, line: n });
        }
        let rule = MergeRule::new(&left, &right, rank, None);
        known.insert(rule.merged.clone());
        merges.push(rule);
    }
    if let Some((n, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(bad(n, "trailing content after merges".into()));
    }

    let vocab = Vocabulary::from_parts(config, languages, alphabet, merges, Vec::new(), early_stop);
    if vocab.len() > budget {
        return Err(bad(0, format!("{} tokens exceed budget {budget}", vocab.len())));
    }
    Ok(vocab)
}
