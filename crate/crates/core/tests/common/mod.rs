//! Test support shared by the integration suites: random corpora and an
//! independent plain greedy-BPE reference.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use obpe::{MultilingualCorpus, ResourceClass, WordTable};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MARKER: &str = "⟨/w⟩";

/// Random corpus: `n_langs` languages (first HRL, second LRL, rest random),
/// up to `max_words` distinct words drawn from a small alphabet so pairs
/// repeat, integer counts.
pub fn random_corpus(seed: u64, n_langs: usize, max_words: usize) -> MultilingualCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet: Vec<char> = "abcdeé".chars().collect();
    let mut entries = Vec::new();
    for li in 0..n_langs {
        let class = match li {
            0 => ResourceClass::High,
            1 => ResourceClass::Low,
            _ if rng.gen_bool(0.5) => ResourceClass::High,
            _ => ResourceClass::Low,
        };
        let mut table = WordTable::new();
        let n_words = rng.gen_range(1..=(max_words / n_langs).max(1));
        for _ in 0..n_words {
            let len = rng.gen_range(1..=6);
            let w: String = (0..len).map(|_| *alphabet.choose(&mut rng).unwrap()).collect();
            *table.entry(w).or_insert(0.0) += rng.gen_range(1..=20) as f64;
        }
        entries.push((obpe::Language::new(&format!("l{li}"), class).unwrap(), table));
    }
    MultilingualCorpus::new(entries).unwrap()
}

/// Random word mixing Latin, Greek, Devanagari and CJK characters.
pub fn random_word(rng: &mut impl Rng) -> String {
    const POOLS: [&str; 4] = ["abcdefgh", "αβγδεζ", "कखगघनमर", "日本語中文字"];
    let len = rng.gen_range(1..=8);
    (0..len)
        .map(|_| {
            let pool: Vec<char> = POOLS.choose(rng).unwrap().chars().collect();
            *pool.choose(rng).unwrap()
        })
        .collect()
}

/// Plain greedy BPE, recounting every pair from scratch at each step.
///
/// Ties: smallest merged string, then earliest left token. A pair merged
/// once is never merged again. Returns the merge list as string pairs.
pub fn reference_bpe(corpus: &MultilingualCorpus, budget: usize) -> Vec<(String, String)> {
    let mut words: Vec<(Vec<String>, f64)> = Vec::new();
    let mut chars = BTreeSet::new();
    for table in corpus.tables() {
        for (w, &weight) in table {
            if weight <= 0.0 {
                continue;
            }
            chars.extend(w.chars());
            let mut syms: Vec<String> = w.chars().map(String::from).collect();
            syms.push(MARKER.to_string());
            words.push((syms, weight));
        }
    }
    let mut order: Vec<String> = chars.into_iter().map(String::from).collect();
    order.push(MARKER.to_string());

    let mut done: HashSet<(String, String)> = HashSet::new();
    let mut merges = Vec::new();
    while order.len() < budget {
        let mut freq: BTreeMap<(String, String), f64> = BTreeMap::new();
        for (syms, weight) in &words {
            for win in syms.windows(2) {
                *freq.entry((win[0].clone(), win[1].clone())).or_insert(0.0) += weight;
            }
        }
        let rank = |t: &str| order.iter().position(|o| o == t).unwrap();
        let best = freq
            .into_iter()
            .filter(|(p, _)| !done.contains(p))
            .max_by(|(pa, fa), (pb, fb)| {
                fa.total_cmp(fb)
                    .then_with(|| format!("{}{}", pb.0, pb.1).cmp(&format!("{}{}", pa.0, pa.1)))
                    .then_with(|| rank(&pb.0).cmp(&rank(&pa.0)))
            });
        let Some(((l, r), _)) = best else { break };
        let merged = format!("{l}{r}");
        for (syms, _) in words.iter_mut() {
            let mut out = Vec::with_capacity(syms.len());
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && syms[i] == l && syms[i + 1] == r {
                    out.push(merged.clone());
                    i += 2;
                } else {
                    out.push(syms[i].clone());
                    i += 1;
                }
            }
            *syms = out;
        }
        if !order.contains(&merged) {
            order.push(merged);
        }
        done.insert((l.clone(), r.clone()));
        merges.push((l, r));
    }
    merges
}

/// Two related languages built from shared roots and language-specific
/// suffixes. The HRL carries `hrl_scale` times the LRL counts.
pub fn related_pair_corpus(seed: u64, roots: usize, hrl_scale: u64) -> MultilingualCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters: Vec<char> = "bcdfghjklmnprstvz".chars().collect();
    let vowels: Vec<char> = "aeiou".chars().collect();
    let mut root_set = BTreeSet::new();
    while root_set.len() < roots {
        let syl = rng.gen_range(2..=3);
        let mut r = String::new();
        for _ in 0..syl {
            r.push(*letters.choose(&mut rng).unwrap());
            r.push(*vowels.choose(&mut rng).unwrap());
        }
        root_set.insert(r);
    }
    let hrl_suffixes = ["ing", "ed", "s", "er"];
    let lrl_suffixes = ["en", "te", "ij", "kje"];
    let mut hrl = WordTable::new();
    let mut lrl = WordTable::new();
    let mut roots: Vec<&String> = root_set.iter().collect();
    roots.shuffle(&mut rng);
    for (rank, root) in roots.into_iter().enumerate() {
        // Zipf-like root frequencies with per-suffix jitter
        let base = 1 + 400 / (rank as u64 + 1);
        for (hs, ls) in hrl_suffixes.iter().zip(&lrl_suffixes) {
            let c = base * rng.gen_range(1..=3);
            *hrl.entry(format!("{root}{hs}")).or_insert(0.0) += (c * hrl_scale) as f64;
            *lrl.entry(format!("{root}{ls}")).or_insert(0.0) += c as f64;
        }
    }
    MultilingualCorpus::new(vec![
        (obpe::Language::new("hh", ResourceClass::High).unwrap(), hrl),
        (obpe::Language::new("ll", ResourceClass::Low).unwrap(), lrl),
    ])
    .unwrap()
}

/// The four-language university example.
pub fn university_corpus() -> MultilingualCorpus {
    MultilingualCorpus::from_counts(&[
        ("en", ResourceClass::High, &[("University", 10), ("versity", 6)]),
        ("de", ResourceClass::Low, &[("Universitaten", 2)]),
        ("nl", ResourceClass::Low, &[("Universiteit", 1)]),
        ("fy", ResourceClass::Low, &[("Universiteiten", 1)]),
    ])
    .unwrap()
}
