mod common;

use common::{random_corpus, reference_bpe};
use obpe::{
    encode_corpus, init_state, train, MixWeight, MultilingualCorpus, PowerParam, Tokenizer, TrainerConfig,
    WordTable,
};

fn config(budget: usize, alpha: f64, p: f64) -> TrainerConfig {
    TrainerConfig {
        budget,
        alpha: MixWeight::new(alpha).unwrap(),
        p: PowerParam::new(p).unwrap(),
        ..TrainerConfig::default()
    }
}

#[test]
fn incremental_stats_match_recount_every_step() {
    for seed in 0..100 {
        let corpus = random_corpus(seed, 2 + (seed % 3) as usize, 30);
        let cfg = config(60, 0.5, f64::NEG_INFINITY);
        let mut state = init_state(&corpus, &cfg).unwrap();
        assert_eq!(state.pair_stats(), state.recount_pair_stats(), "seed {seed} init");
        while state.vocab_len() < cfg.budget {
            let Some(rule) = state.best_pair() else { break };
            state.apply_merge(&rule).unwrap();
            assert_eq!(
                state.pair_stats(),
                state.recount_pair_stats(),
                "seed {seed} after {rule:?}"
            );
        }
    }
}

#[test]
fn best_pair_matches_brute_force_over_grid() {
    for seed in 100..130 {
        let corpus = random_corpus(seed, 3, 30);
        for alpha in [0.0, 0.5, 1.0] {
            for p in [1.0, 0.0, -1.0, f64::NEG_INFINITY] {
                let cfg = config(60, alpha, p);
                let mut state = init_state(&corpus, &cfg).unwrap();
                while state.vocab_len() < cfg.budget {
                    let expected = state.brute_force_best_pair();
                    let got = state.best_pair();
                    assert_eq!(got, expected, "seed {seed} alpha {alpha} p {p}");
                    let Some(rule) = got else { break };
                    state.apply_merge(&rule).unwrap();
                }
            }
        }
    }
}

#[test]
fn alpha_zero_equals_plain_bpe() {
    for seed in 200..260 {
        let corpus = random_corpus(seed, 2 + (seed % 3) as usize, 40);
        for p in [1.0, f64::NEG_INFINITY] {
            let vocab = train(&corpus, &config(70, 0.0, p)).unwrap();
            let got: Vec<(String, String)> = vocab
                .merges()
                .iter()
                .map(|m| (m.left.clone(), m.right.clone()))
                .collect();
            assert_eq!(got, reference_bpe(&corpus, 70), "seed {seed} p {p}");
        }
    }
}

#[test]
fn trainer_frequencies_match_tokenizer() {
    for seed in 300..330 {
        let corpus = random_corpus(seed, 3, 30);
        let vocab = train(&corpus, &config(50, 0.5, -1.0)).unwrap();
        let enc = encode_corpus(&Tokenizer::new(&vocab), &corpus).unwrap();
        assert_eq!(enc.token_freqs, vocab.token_freqs(), "seed {seed}");
    }
}

#[test]
fn tokenizer_on_prefix_matches_training_state() {
    let corpus = random_corpus(7, 3, 30);
    let cfg = config(60, 0.5, 0.0);
    let full = train(&corpus, &cfg).unwrap();
    let mut state = init_state(&corpus, &cfg).unwrap();
    for k in 0..=full.merges().len() {
        let prefix = full.prefix(k);
        let tok = Tokenizer::new(&prefix);
        let segs = state.segmentations();
        let words = corpus
            .tables()
            .iter()
            .enumerate()
            .flat_map(|(lang, t)| t.iter().filter(|(_, &c)| c > 0.0).map(move |(w, _)| (lang, w)));
        let mut n = 0;
        for ((lang, w), (seg_lang, seg)) in words.zip(&segs) {
            assert_eq!(lang, *seg_lang);
            assert_eq!(tok.encode_word(w).unwrap(), *seg, "word {w} after {k} merges");
            n += 1;
        }
        assert_eq!(n, segs.len());
        if k < full.merges().len() {
            state.apply_merge(&full.merges()[k]).unwrap();
        }
    }
}

#[test]
fn training_is_deterministic_and_scale_invariant() {
    let corpus = random_corpus(11, 4, 40);
    let cfg = config(60, 0.5, -1.0);
    let a = train(&corpus, &cfg).unwrap();
    let b = train(&corpus, &cfg).unwrap();
    assert_eq!(a.to_text(), b.to_text());

    let scaled: Vec<_> = corpus
        .languages()
        .iter()
        .zip(corpus.tables())
        .map(|(l, t)| {
            (
                l.clone(),
                t.iter().map(|(w, c)| (w.clone(), c * 8.0)).collect::<WordTable>(),
            )
        })
        .collect();
    let scaled = MultilingualCorpus::new(scaled).unwrap();
    let c = train(&scaled, &cfg).unwrap();
    let pairs = |v: &obpe::Vocabulary| v.merges().iter().map(|m| m.merged.clone()).collect::<Vec<_>>();
    assert_eq!(pairs(&a), pairs(&c));
}
