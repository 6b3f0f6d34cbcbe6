mod common;

use common::university_corpus;
use obpe::{init_state, train, MixWeight, PowerParam, Tokenizer, TrainerConfig};

fn seeded(alpha: f64, budget: usize) -> TrainerConfig {
    TrainerConfig {
        budget,
        alpha: MixWeight::new(alpha).unwrap(),
        p: PowerParam::MIN,
        seed_tokens: vec!["Uni".into(), "versit".into()],
        ..TrainerConfig::default()
    }
}

fn next_token(alpha: f64) -> (String, f64) {
    let corpus = university_corpus();
    let mut state = init_state(&corpus, &seeded(alpha, 1000)).unwrap();
    let rule = state.best_pair().unwrap();
    (rule.merged, rule.score.unwrap())
}

#[test]
fn bpe_adds_versity() {
    assert_eq!(next_token(0.0), ("versity".to_string(), 16.0));
}

#[test]
fn obpe_adds_universit() {
    // en 10, de 2, nl 1, fy 1: 0.5 * 14 + 0.5 * (2 + 1 + 1)
    assert_eq!(next_token(0.5), ("Universit".to_string(), 9.0));
}

#[test]
fn university_encodes_with_universit() {
    let corpus = university_corpus();
    let cfg = seeded(0.5, 1000);
    let start = init_state(&corpus, &cfg).unwrap().vocab_len();
    let vocab = train(
        &corpus,
        &TrainerConfig {
            budget: start + 1,
            ..cfg
        },
    )
    .unwrap();
    let tokens = Tokenizer::new(&vocab).encode_word("University").unwrap();
    assert_eq!(tokens[0], "Universit");
}
