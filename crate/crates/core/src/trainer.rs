//! The greedy merge loop.
//!
//! Every word starts as its characters followed by a separate end-of-word
//! marker symbol. Pair statistics are kept per language so the overlap term
//! can be evaluated, and are updated incrementally after each merge: only
//! words that contain the merged pair are rewritten, and only the pairs whose
//! counts actually changed are rescored.
//!
//! The best candidate is tracked with a lazily invalidated max-heap. Each
//! pair carries a version that is bumped whenever its statistics change; heap
//! entries with an old version are discarded when they surface.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{smoothing_multipliers, Language, MultilingualCorpus, ResourceClass, SizeBasis};
use crate::error::{Error, Result};
use crate::overlap_math::{merge_score, MixWeight, Partition, PowerParam, Scorer};
use crate::vocab::{MergeRule, Vocabulary, MARKER_ESCAPE};

/// How equal-score candidates are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Smallest merged string by code point, then lowest rank of the left part.
    #[default]
    Lexicographic,
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TieBreak::Lexicographic => f.write_str("lex"),
        }
    }
}

impl FromStr for TieBreak {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lex" => Ok(TieBreak::Lexicographic),
            other => Err(Error::InvalidParameter(format!(
                "unknown tie-break policy {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainerConfig {
    /// Target vocabulary size, counting initial characters and the marker.
    pub budget: usize,
    pub alpha: MixWeight,
    pub p: PowerParam,
    /// Exponent for size smoothing applied before training.
    pub smoothing: Option<f64>,
    pub size_basis: SizeBasis,
    pub tie_break: TieBreak,
    pub marker: String,
    /// Tokens forced into the vocabulary, each built left to right from its
    /// characters, before greedy induction starts.
    pub seed_tokens: Vec<String>,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            budget: 30_000,
            alpha: MixWeight::default(),
            p: PowerParam::MIN,
            smoothing: None,
            size_basis: SizeBasis::Words,
            tie_break: TieBreak::Lexicographic,
            marker: MARKER_ESCAPE.to_string(),
            seed_tokens: Vec::new(),
        }
    }
}

type Pair = (u32, u32);

#[derive(Debug, Clone)]
struct Word {
    symbols: Vec<u32>,
    weight: f64,
    lang: usize,
}

#[derive(Debug, Clone)]
struct PairStat {
    freqs: Vec<f64>,
    counts: Vec<u32>,
    total: u64,
    version: u64,
}

impl PairStat {
    fn new(n: usize) -> Self {
        PairStat {
            freqs: vec![0.0; n],
            counts: vec![0; n],
            total: 0,
            version: 0,
        }
    }
}

#[derive(Debug)]
struct Candidate {
    score: f64,
    merged: Box<str>,
    pair: Pair,
    version: u64,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        candidate_order(
            (self.score, &self.merged, self.pair.0),
            (other.score, &other.merged, other.pair.0),
        )
        .then_with(|| self.version.cmp(&other.version))
    }
}

/// Greater is better: higher score, then smaller merged string, then lower
/// left-token id.
fn candidate_order(a: (f64, &str, u32), b: (f64, &str, u32)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then_with(|| b.1.cmp(a.1))
        .then_with(|| b.2.cmp(&a.2))
}

/// Replaces adjacent `(left, right)` occurrences left to right, never
/// overlapping. Returns `None` when the pair does not occur.
fn replace_pair(symbols: &[u32], left: u32, right: u32, merged: u32) -> Option<Vec<u32>> {
    let mut out = Vec::with_capacity(symbols.len());
    let mut hit = false;
    let mut i = 0;
    while i < symbols.len() {
        if i + 1 < symbols.len() && symbols[i] == left && symbols[i + 1] == right {
            out.push(merged);
            i += 2;
            hit = true;
        } else {
            out.push(symbols[i]);
            i += 1;
        }
    }
    hit.then_some(out)
}

/// Words, per-language pair statistics and the merge history of one
/// training session.
#[derive(Debug)]
pub struct TrainerState {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
    alphabet_len: usize,
    languages: Vec<Language>,
    words: Vec<Word>,
    pairs: HashMap<Pair, PairStat>,
    locations: HashMap<Pair, Vec<u32>>,
    heap: BinaryHeap<Candidate>,
    merged_pairs: HashSet<Pair>,
    merges: Vec<MergeRule>,
    scorer: Scorer,
    config: TrainerConfig,
    next_version: u64,
}

const PARALLEL_SCORING_THRESHOLD: usize = 4096;

impl TrainerState {
    /// Splits every word into characters plus the marker and counts pairs.
    pub fn new(corpus: &MultilingualCorpus, config: &TrainerConfig) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::InvalidParameter("corpus has no languages".into()));
        }
        if config.marker.is_empty() || config.marker.chars().any(char::is_whitespace) {
            return Err(Error::InvalidParameter(format!(
                "invalid end-of-word marker {:?}",
                config.marker
            )));
        }
        let classes = corpus.classes();
        if config.alpha.value() > 0.0 {
            let has = |c| classes.contains(&c);
            if !has(ResourceClass::High) || !has(ResourceClass::Low) {
                return Err(Error::InvalidParameter(
                    "overlap training (alpha > 0) needs at least one HRL and one LRL".into(),
                ));
            }
        }

        let smoothed;
        let corpus = match config.smoothing {
            Some(s) => {
                let weights = smoothing_multipliers(&corpus.sizes(config.size_basis), s)?;
                smoothed = corpus.apply_weights(&weights)?;
                &smoothed
            }
            None => corpus,
        };

        let mut chars = std::collections::BTreeSet::new();
        for (lang, table) in corpus.languages().iter().zip(corpus.tables()) {
            for (word, &weight) in table {
                if word.contains(config.marker.as_str()) {
                    return Err(Error::InvalidWord {
                        lang: lang.id.to_string(),
                        word: word.clone(),
                        reason: "word contains the end-of-word marker",
                    });
                }
                if weight > 0.0 {
                    chars.extend(word.chars());
                }
            }
        }
        let mut tokens: Vec<String> = chars.iter().map(|c| c.to_string()).collect();
        tokens.push(config.marker.clone());
        let alphabet_len = tokens.len();
        if config.budget < alphabet_len {
            return Err(Error::BudgetTooSmall {
                budget: config.budget,
                alphabet: alphabet_len,
            });
        }
        let ids: HashMap<String, u32> = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let marker_id = (alphabet_len - 1) as u32;

        let mut words = Vec::new();
        for (lang, table) in corpus.tables().iter().enumerate() {
            for (word, &weight) in table {
                if weight <= 0.0 {
                    continue;
                }
                let mut symbols: Vec<u32> = word.chars().map(|c| ids[c.to_string().as_str()]).collect();
                symbols.push(marker_id);
                words.push(Word {
                    symbols,
                    weight,
                    lang,
                });
            }
        }

        let n_langs = corpus.len();
        let mut pairs: HashMap<Pair, PairStat> = HashMap::new();
        let mut locations: HashMap<Pair, Vec<u32>> = HashMap::new();
        for (idx, w) in words.iter().enumerate() {
            for win in w.symbols.windows(2) {
                let pair = (win[0], win[1]);
                let stat = pairs.entry(pair).or_insert_with(|| PairStat::new(n_langs));
                stat.freqs[w.lang] += w.weight;
                stat.counts[w.lang] += 1;
                stat.total += 1;
                let locs = locations.entry(pair).or_default();
                if locs.last() != Some(&(idx as u32)) {
                    locs.push(idx as u32);
                }
            }
        }

        let scorer = Scorer::new(config.alpha, config.p, Partition::new(&classes));
        let mut state = TrainerState {
            tokens,
            ids,
            alphabet_len,
            languages: corpus.languages().to_vec(),
            words,
            pairs,
            locations,
            heap: BinaryHeap::new(),
            merged_pairs: HashSet::new(),
            merges: Vec::new(),
            scorer,
            config: config.clone(),
            next_version: 1,
        };
        let all: Vec<Pair> = state.pairs.keys().copied().collect();
        state.rescore(all);
        state.apply_seeds()?;
        Ok(state)
    }

    fn apply_seeds(&mut self) -> Result<()> {
        let seeds = self.config.seed_tokens.clone();
        for seed in &seeds {
            let mut chars = seed.chars().map(|c| c.to_string());
            let Some(first) = chars.next() else { continue };
            let mut acc = self.lookup(&first)?;
            for c in chars {
                let next = self.lookup(&c)?;
                let pair = (acc, next);
                if self.merged_pairs.contains(&pair) {
                    acc = self.ids[&format!("{}{}", self.tokens[acc as usize], c)];
                    continue;
                }
                let score = self
                    .pairs
                    .get(&pair)
                    .map(|s| self.scorer.score(&s.freqs))
                    .unwrap_or(0.0);
                acc = self.merge_pair(pair, score);
            }
        }
        if self.tokens.len() > self.config.budget {
            return Err(Error::BudgetTooSmall {
                budget: self.config.budget,
                alphabet: self.tokens.len(),
            });
        }
        Ok(())
    }

    fn lookup(&self, token: &str) -> Result<u32> {
        self.ids
            .get(token)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("token {token:?} is not in the vocabulary")))
    }

    /// Number of distinct tokens so far.
    pub fn vocab_len(&self) -> usize {
        self.tokens.len()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.tokens[..self.alphabet_len]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    pub fn languages(&self) -> &[Language] {
        &self.languages
    }

    /// Current segmentation of every (language, word) entry, in corpus order.
    pub fn segmentations(&self) -> Vec<(usize, Vec<&str>)> {
        self.words
            .iter()
            .map(|w| {
                (
                    w.lang,
                    w.symbols
                        .iter()
                        .map(|&s| self.tokens[s as usize].as_str())
                        .collect(),
                )
            })
            .collect()
    }

    /// Incrementally maintained pair statistics keyed by token strings.
    pub fn pair_stats(&self) -> BTreeMap<(String, String), Vec<f64>> {
        self.pairs
            .iter()
            .map(|(&(l, r), s)| {
                (
                    (self.tokens[l as usize].clone(), self.tokens[r as usize].clone()),
                    s.freqs.clone(),
                )
            })
            .collect()
    }

    /// Pair statistics counted from scratch over the current segmentation.
    pub fn recount_pair_stats(&self) -> BTreeMap<(String, String), Vec<f64>> {
        let mut out: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
        for w in &self.words {
            for win in w.symbols.windows(2) {
                let key = (
                    self.tokens[win[0] as usize].clone(),
                    self.tokens[win[1] as usize].clone(),
                );
                out.entry(key).or_insert_with(|| vec![0.0; self.languages.len()])[w.lang] += w.weight;
            }
        }
        out
    }

    fn rescore(&mut self, mut touched: Vec<Pair>) {
        touched.retain(|p| self.pairs.contains_key(p) && !self.merged_pairs.contains(p));
        let scorer = &self.scorer;
        let pairs = &self.pairs;
        let score_one = |p: &Pair| scorer.score(&pairs[p].freqs);
        let scores: Vec<f64> = if touched.len() >= PARALLEL_SCORING_THRESHOLD {
            touched.par_iter().map(score_one).collect()
        } else {
            touched.iter().map(score_one).collect()
        };
        for (pair, score) in touched.into_iter().zip(scores) {
            let version = self.next_version;
            self.next_version += 1;
            self.pairs.get_mut(&pair).expect("retained above").version = version;
            let merged = format!("{}{}", self.tokens[pair.0 as usize], self.tokens[pair.1 as usize]);
            self.heap.push(Candidate {
                score,
                merged: merged.into_boxed_str(),
                pair,
                version,
            });
        }
    }

    fn compact_heap(&mut self) {
        if self.heap.len() <= 4 * self.pairs.len() + 1024 {
            return;
        }
        let pairs = &self.pairs;
        let merged = &self.merged_pairs;
        let entries: Vec<Candidate> = std::mem::take(&mut self.heap)
            .into_vec()
            .into_iter()
            .filter(|c| {
                !merged.contains(&c.pair) && pairs.get(&c.pair).is_some_and(|s| s.version == c.version)
            })
            .collect();
        self.heap = BinaryHeap::from(entries);
    }

    fn rule_for(&self, pair: Pair, score: f64) -> MergeRule {
        MergeRule::new(
            &self.tokens[pair.0 as usize],
            &self.tokens[pair.1 as usize],
            self.merges.len(),
            Some(score),
        )
    }

    /// The highest-scoring pair not merged before, or `None` when no
    /// candidate remains.
    pub fn best_pair(&mut self) -> Option<MergeRule> {
        loop {
            let top = self.heap.peek()?;
            let live = !self.merged_pairs.contains(&top.pair)
                && self
                    .pairs
                    .get(&top.pair)
                    .is_some_and(|s| s.version == top.version);
            if live {
                return Some(self.rule_for(top.pair, top.score));
            }
            self.heap.pop();
        }
    }

    /// Exhaustive search over a fresh recount of the current segmentation.
    /// Meant as an oracle for [`TrainerState::best_pair`] on small inputs.
    pub fn brute_force_best_pair(&self) -> Option<MergeRule> {
        let n = self.languages.len();
        let mut freqs: HashMap<Pair, Vec<f64>> = HashMap::new();
        for w in &self.words {
            for win in w.symbols.windows(2) {
                freqs.entry((win[0], win[1])).or_insert_with(|| vec![0.0; n])[w.lang] += w.weight;
            }
        }
        let partition = self.scorer.partition();
        let mut best: Option<(f64, String, Pair)> = None;
        for (pair, f) in freqs {
            if self.merged_pairs.contains(&pair) {
                continue;
            }
            let score = merge_score(&f, self.config.alpha, self.config.p, partition)
                .expect("frequencies are non-negative");
            let merged = format!("{}{}", self.tokens[pair.0 as usize], self.tokens[pair.1 as usize]);
            let better = match &best {
                None => true,
                Some((s, m, p)) => {
                    candidate_order((score, &merged, pair.0), (*s, m, p.0)) == Ordering::Greater
                }
            };
            if better {
                best = Some((score, merged, pair));
            }
        }
        best.map(|(score, _, pair)| self.rule_for(pair, score))
    }

    /// Rewrites every occurrence of the rule's pair and updates statistics.
    pub fn apply_merge(&mut self, rule: &MergeRule) -> Result<()> {
        let pair = (self.lookup(&rule.left)?, self.lookup(&rule.right)?);
        let score = rule.score.unwrap_or_else(|| {
            self.pairs
                .get(&pair)
                .map(|s| self.scorer.score(&s.freqs))
                .unwrap_or(0.0)
        });
        self.merge_pair(pair, score);
        Ok(())
    }

    fn merge_pair(&mut self, pair: Pair, score: f64) -> u32 {
        let merged_str = format!("{}{}", self.tokens[pair.0 as usize], self.tokens[pair.1 as usize]);
        let merged = match self.ids.get(&merged_str) {
            Some(&id) => id,
            None => {
                let id = self.tokens.len() as u32;
                self.tokens.push(merged_str.clone());
                self.ids.insert(merged_str, id);
                id
            }
        };
        let rule = self.rule_for(pair, score);
        self.merges.push(rule);
        self.merged_pairs.insert(pair);

        let mut affected = self.locations.remove(&pair).unwrap_or_default();
        affected.sort_unstable();
        affected.dedup();

        let mut touched: HashSet<Pair> = HashSet::new();
        let mut delta: Vec<(Pair, i64)> = Vec::new();
        for idx in affected {
            let word = &mut self.words[idx as usize];
            let Some(next) = replace_pair(&word.symbols, pair.0, pair.1, merged) else {
                continue;
            };
            delta.clear();
            delta.extend(word.symbols.windows(2).map(|w| ((w[0], w[1]), -1)));
            delta.extend(next.windows(2).map(|w| ((w[0], w[1]), 1)));
            delta.sort_unstable_by_key(|d| d.0);
            let (lang, weight) = (word.lang, word.weight);
            word.symbols = next;

            let mut i = 0;
            while i < delta.len() {
                let p = delta[i].0;
                let mut d = 0;
                while i < delta.len() && delta[i].0 == p {
                    d += delta[i].1;
                    i += 1;
                }
                if d == 0 {
                    continue;
                }
                touched.insert(p);
                let n = self.languages.len();
                let stat = self.pairs.entry(p).or_insert_with(|| PairStat::new(n));
                stat.freqs[lang] += d as f64 * weight;
                stat.counts[lang] = (stat.counts[lang] as i64 + d) as u32;
                stat.total = (stat.total as i64 + d) as u64;
                if stat.counts[lang] == 0 {
                    stat.freqs[lang] = 0.0;
                }
                if stat.total == 0 {
                    self.pairs.remove(&p);
                } else if d > 0 {
                    let locs = self.locations.entry(p).or_default();
                    if locs.last() != Some(&idx) {
                        locs.push(idx);
                    }
                }
            }
        }
        debug_assert!(!self.pairs.contains_key(&pair));

        let mut touched: Vec<Pair> = touched.into_iter().collect();
        touched.sort_unstable();
        self.rescore(touched);
        self.compact_heap();
        merged
    }

    /// Final vocabulary with per-language token frequencies.
    pub fn into_vocabulary(self, early_stop: bool) -> Vocabulary {
        let n = self.languages.len();
        let mut freqs = vec![vec![0.0; n]; self.tokens.len()];
        for w in &self.words {
            for &s in &w.symbols {
                freqs[s as usize][w.lang] += w.weight;
            }
        }
        let alphabet = self.tokens[..self.alphabet_len].to_vec();
        Vocabulary::from_parts(
            self.config,
            self.languages,
            alphabet,
            self.merges,
            freqs,
            early_stop,
        )
    }
}

pub fn init_state(corpus: &MultilingualCorpus, config: &TrainerConfig) -> Result<TrainerState> {
    TrainerState::new(corpus, config)
}

/// Runs the merge loop until the budget is reached or no pair remains.
pub fn train(corpus: &MultilingualCorpus, config: &TrainerConfig) -> Result<Vocabulary> {
    let mut state = TrainerState::new(corpus, config)?;
    let mut early_stop = false;
    while state.vocab_len() < config.budget {
        match state.best_pair() {
            Some(rule) => state.apply_merge(&rule)?,
            None => {
                early_stop = true;
                break;
            }
        }
    }
    Ok(state.into_vocabulary(early_stop))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ResourceClass::{High, Low};

    fn cfg(budget: usize, alpha: f64, p: PowerParam) -> TrainerConfig {
        TrainerConfig {
            budget,
            alpha: MixWeight::new(alpha).unwrap(),
            p,
            ..TrainerConfig::default()
        }
    }

    const M: &str = MARKER_ESCAPE;

    #[test]
    fn init_splits_characters_and_marker() {
        let c = MultilingualCorpus::from_counts(&[("A", High, &[("ab", 5)])]).unwrap();
        let s = init_state(&c, &cfg(10, 0.0, PowerParam::MIN)).unwrap();
        assert_eq!(s.segmentations(), vec![(0, vec!["a", "b", M])]);
        assert_eq!(s.alphabet(), &["a", "b", M]);
        let stats = s.pair_stats();
        assert_eq!(stats[&("a".into(), "b".into())], vec![5.0]);
        assert_eq!(stats[&("b".into(), M.into())], vec![5.0]);
    }

    #[test]
    fn runs_count_every_adjacent_position() {
        let c = MultilingualCorpus::from_counts(&[("A", High, &[("aaa", 1)])]).unwrap();
        let s = init_state(&c, &cfg(10, 0.0, PowerParam::MIN)).unwrap();
        assert_eq!(s.pair_stats()[&("a".into(), "a".into())], vec![2.0]);
    }

    #[test]
    fn leftmost_non_overlapping_replacement() {
        assert_eq!(replace_pair(&[0, 0, 0], 0, 0, 9), Some(vec![9, 0]));
        assert_eq!(replace_pair(&[0, 0, 0, 0], 0, 0, 9), Some(vec![9, 9]));
        assert_eq!(replace_pair(&[0, 1, 2], 1, 0, 9), None);

        let c = MultilingualCorpus::from_counts(&[("A", High, &[("aaa", 1)])]).unwrap();
        let mut s = init_state(&c, &cfg(10, 0.0, PowerParam::MIN)).unwrap();
        s.apply_merge(&MergeRule::new("a", "a", 0, None)).unwrap();
        assert_eq!(s.segmentations()[0].1, vec!["aa", "a", M]);
        assert_eq!(s.pair_stats(), s.recount_pair_stats());
    }

    #[test]
    fn budget_below_alphabet_is_an_error() {
        let c = MultilingualCorpus::from_counts(&[("A", High, &[("abc", 1)])]).unwrap();
        assert!(matches!(
            init_state(&c, &cfg(3, 0.0, PowerParam::MIN)),
            Err(Error::BudgetTooSmall {
                budget: 3,
                alphabet: 4
            })
        ));
    }

    #[test]
    fn overlap_training_needs_both_classes() {
        let c = MultilingualCorpus::from_counts(&[("A", High, &[("ab", 1)])]).unwrap();
        assert!(init_state(&c, &cfg(10, 0.5, PowerParam::MIN)).is_err());
        assert!(init_state(&c, &cfg(10, 0.0, PowerParam::MIN)).is_ok());
    }

    #[test]
    fn marker_in_text_is_rejected() {
        let c = MultilingualCorpus::from_counts(&[("A", High, &[("a⟨/w⟩", 1)])]).unwrap();
        assert!(matches!(
            init_state(&c, &cfg(10, 0.0, PowerParam::MIN)),
            Err(Error::InvalidWord { .. })
        ));
    }

    fn two_lang() -> MultilingualCorpus {
        MultilingualCorpus::from_counts(&[("A", High, &[("ab", 5)]), ("B", Low, &[("ab", 2), ("ac", 3)])])
            .unwrap()
    }

    #[test]
    fn bpe_tie_goes_to_smaller_merged_string() {
        let mut s = init_state(&two_lang(), &cfg(20, 0.0, PowerParam::MIN)).unwrap();
        let best = s.best_pair().unwrap();
        assert_eq!((best.left.as_str(), best.right.as_str()), ("a", "b"));
        assert_eq!(best.score, Some(7.0));
        assert_eq!(s.brute_force_best_pair(), Some(best));
    }

    #[test]
    fn overlap_scores_match_hand_values() {
        let mut s = init_state(&two_lang(), &cfg(20, 0.5, PowerParam::MIN)).unwrap();
        let best = s.best_pair().unwrap();
        assert_eq!(best.merged, "ab");
        assert_eq!(best.score, Some(4.5));
        let part = Partition::new(&[High, Low]);
        let ac = merge_score(&[0.0, 3.0], MixWeight::new(0.5).unwrap(), PowerParam::MIN, &part).unwrap();
        assert_eq!(ac, 1.5);
    }

    #[test]
    fn budget_equal_to_alphabet_makes_no_merges() {
        let v = train(&two_lang(), &cfg(4, 0.0, PowerParam::MIN)).unwrap();
        assert!(v.merges().is_empty());
        assert!(!v.early_stop);
    }

    #[test]
    fn early_stop_is_recorded() {
        let c = MultilingualCorpus::from_counts(&[("A", High, &[("ab", 1)])]).unwrap();
        let v = train(&c, &cfg(100, 0.0, PowerParam::MIN)).unwrap();
        assert!(v.early_stop);
        assert_eq!(v.merges().len(), 2);
        assert_eq!(v.tokens(), &["a", "b", M, "ab", &format!("ab{M}")]);
    }

    #[test]
    fn empty_and_single_pair_states() {
        let c = MultilingualCorpus::from_counts(&[("A", High, &[("a", 1)])]).unwrap();
        let mut s = init_state(&c, &cfg(10, 0.0, PowerParam::MIN)).unwrap();
        let only = s.brute_force_best_pair().unwrap();
        assert_eq!(only.merged, format!("a{M}"));
        s.apply_merge(&only).unwrap();
        assert_eq!(s.brute_force_best_pair(), None);
        assert_eq!(s.best_pair(), None);
    }

    #[test]
    fn seeds_build_tokens_from_characters() {
        let c = MultilingualCorpus::from_counts(&[("A", High, &[("abc", 1)])]).unwrap();
        let config = TrainerConfig {
            seed_tokens: vec!["abc".into()],
            ..cfg(10, 0.0, PowerParam::MIN)
        };
        let s = init_state(&c, &config).unwrap();
        let merged: Vec<_> = s.merges().iter().map(|m| m.merged.as_str()).collect();
        assert_eq!(merged, ["ab", "abc"]);
        assert_eq!(s.segmentations()[0].1, vec!["abc", M]);
        assert_eq!(s.pair_stats(), s.recount_pair_stats());

        let bad = TrainerConfig {
            seed_tokens: vec!["xy".into()],
            ..cfg(10, 0.0, PowerParam::MIN)
        };
        assert!(init_state(&c, &bad).is_err());
    }

    #[test]
    fn final_frequencies_follow_segmentation() {
        let v = train(&two_lang(), &cfg(5, 0.0, PowerParam::MIN)).unwrap();
        assert_eq!(v.token_freq("ab").unwrap(), &[5.0, 2.0]);
        assert_eq!(v.token_freq("a").unwrap(), &[0.0, 3.0]);
        assert_eq!(v.token_freq(M).unwrap(), &[5.0, 5.0]);
    }
}
