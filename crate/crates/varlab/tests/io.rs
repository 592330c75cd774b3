//! File formats: exact round trips and located errors.

use std::path::Path;

use proptest::prelude::*;
use varlab::config::RunConfig;
use varlab::corpus::{read_corpus, read_weak_corpus, write_corpus, write_weak_corpus};
use varlab::log::{read_train_log, LogHeader, LogWriter};
use varlab::{checkpoint, jsonl, Error};
use varlab_core::avagrpo::StepRecord;
use varlab_core::corpus::{generate_corpus, CorpusSpec, WeakExample};
use varlab_core::policy::{ObservationMode, PolicyConfig, PolicyParams};

fn params_from(config: PolicyConfig, values: &[f64]) -> PolicyParams {
    let mut p = PolicyParams::zeros(config);
    for (slot, v) in p.values_mut().iter_mut().zip(values.iter().cycle()) {
        *slot = *v;
    }
    p
}

proptest! {
    #[test]
    fn checkpoint_round_trip_is_bit_exact(
        values in prop::collection::vec(prop_oneof![-1e300f64..1e300, -1.0f64..1.0, Just(0.0), Just(-0.0), Just(5e-324)], 1..64),
        prefix in prop::option::of(1usize..=16),
    ) {
        let config = PolicyConfig {
            mode: prefix.map_or(ObservationMode::Full, ObservationMode::Prefix),
            ..PolicyConfig::default()
        };
        let p = params_from(config, &values);
        let text = checkpoint::to_string(&p, &["a note".into(), "two\nlines".into()]);
        let q = checkpoint::parse(&text, Path::new("x")).unwrap();
        prop_assert_eq!(q.config(), p.config());
        for (a, b) in q.values().iter().zip(p.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

fn format_line(e: Error) -> usize {
    match e {
        Error::Format { line, .. } => line,
        other => panic!("expected a format error, got {other}"),
    }
}

#[test]
fn checkpoint_errors_name_the_line() {
    let p = params_from(PolicyConfig::default(), &[0.5, -1.5]);
    let good = checkpoint::to_string(&p, &[]);
    let at = Path::new("ck");
    assert_eq!(format_line(checkpoint::parse(&good.replacen("varlab-checkpoint 1", "varlab-checkpoint 9", 1), at).unwrap_err()), 1);
    let lines: Vec<&str> = good.lines().collect();
    // Drop one value from the segment block on line 7.
    let mut short: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
    let cut = short[6].rfind(' ').unwrap();
    short[6].truncate(cut);
    let e = checkpoint::parse(&short.join("\n"), at).unwrap_err();
    assert!(e.to_string().contains("seg"), "{e}");
    assert_eq!(format_line(e), 7);
    let nan = good.replacen(" 0.5", " NaN", 1);
    assert!(checkpoint::parse(&nan, at).unwrap_err().to_string().contains("non-finite"));
    assert!(checkpoint::parse(&lines[..5].join("\n"), at).is_err());
    assert!(checkpoint::parse(&format!("{good}extra 1\n"), at).is_err());
    let bad_shape = good.replacen("bins 8", "bins 99", 1);
    assert!(checkpoint::parse(&bad_shape, at).is_err());
}

#[test]
fn saving_non_finite_params_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let p = params_from(PolicyConfig::default(), &[f64::NAN]);
    assert!(checkpoint::save(&dir.path().join("c.txt"), &p, &[]).is_err());
}

#[test]
fn corpus_round_trip_and_weak_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let videos = generate_corpus(&CorpusSpec { n_videos: 40, ..CorpusSpec::default() }).unwrap();
    let full = dir.path().join("full.jsonl");
    write_corpus(&full, &videos).unwrap();
    assert_eq!(read_corpus(&full).unwrap(), videos);
    let weak: Vec<WeakExample> = videos.iter().map(WeakExample::from).collect();
    assert_eq!(read_weak_corpus(&full).unwrap(), weak);
    let wpath = dir.path().join("weak.jsonl");
    write_weak_corpus(&wpath, &weak).unwrap();
    assert_eq!(read_weak_corpus(&wpath).unwrap(), weak);
    let e = read_corpus(&wpath).unwrap_err().to_string();
    assert!(e.contains("weak-label"), "{e}");
}

#[test]
fn jsonl_errors_carry_line_and_offset() {
    let text = "{\"video_id\":\"a\",\"text\":\"x\"}\n\n{\"video_id\":\"b\",\"txt\":\"y\"}\n";
    let e = jsonl::parse_str::<varlab_core::eval::OutputRecord>(text, Path::new("o.jsonl")).unwrap_err();
    match e {
        Error::Format { line, offset, .. } => {
            assert_eq!(line, 3);
            assert!(offset >= text.find("{\"video_id\":\"b\"").unwrap());
        }
        other => panic!("{other}"),
    }
}

#[test]
fn duplicate_ids_and_empty_corpora_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.jsonl");
    std::fs::write(&p, "{\"id\":\"a\",\"frames\":[1],\"label\":\"Normal\"}\n{\"id\":\"a\",\"frames\":[2],\"label\":\"Normal\"}\n").unwrap();
    assert!(read_weak_corpus(&p).unwrap_err().to_string().contains("duplicate"));
    std::fs::write(&p, "\n").unwrap();
    assert!(read_weak_corpus(&p).is_err());
}

#[test]
fn config_snapshot_round_trips() {
    let c = RunConfig::from_toml("seed = 4\n[policy]\nmode = \"prefix\"\nprefix_len = 3\n[train]\nmax_steps = 10\n")
        .unwrap()
        .resolve(None)
        .unwrap();
    let back = RunConfig::from_toml(&c.to_toml()).unwrap();
    assert_eq!(back, c);
    assert_eq!(c.corpus.seed, 4);
    assert_eq!(c.train.seed, 4);
    assert_eq!(c.policy_config().mode, ObservationMode::Prefix(3));
    // The command-line seed wins.
    assert_eq!(c.clone().resolve(Some(9)).unwrap().train.seed, 9);
}

fn config_field(text: &str) -> String {
    match RunConfig::from_toml(text).and_then(|c| c.resolve(Some(1))) {
        Err(Error::Config { field, .. }) => field,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn config_errors_name_the_field() {
    assert_eq!(config_field("[corpus]\nabnormal_fraction = 1.5\n"), "corpus.abnormal_fraction");
    assert_eq!(config_field("[train]\ngroup_size = 1\n"), "train.group_size");
    assert_eq!(config_field("[policy]\nframes = 4\n"), "policy.frames");
    assert_eq!(config_field("[sft]\nholdout = 1.0\n"), "sft.holdout");
    assert_eq!(config_field("[train]\nbogus = 1\n"), "bogus");
    match RunConfig::default().resolve(None) {
        Err(Error::Config { field, .. }) => assert_eq!(field, "seed"),
        other => panic!("{other:?}"),
    }
}

fn record(step: usize) -> StepRecord {
    StepRecord {
        step,
        epoch: 0,
        video_id: format!("v{step}"),
        loss: -0.1 * step as f64,
        mean_total: 1.0 + 0.1 * step as f64,
        std_total: 0.3,
        mean_acc: 0.5,
        mean_fmt: 1.0,
        mean_ano: 0.125,
        mean_len: 0.2,
        mean_kl: 1e-7,
        mean_words: 201.5,
        ano_confirmed: 1,
        ano_contradicted: step,
    }
}

#[test]
fn train_log_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.jsonl");
    let header = LogHeader {
        tool: varlab::TOOL.into(),
        command: "train".into(),
        seed: 3,
        init: "scratch".into(),
        corpus: "c.jsonl".into(),
        rewards: vec!["acc".into(), "fmt".into()],
    };
    let mut w = LogWriter::create(&path, &header).unwrap();
    let records: Vec<StepRecord> = (0..5).map(record).collect();
    for r in &records {
        w.record(r).unwrap();
    }
    w.finish().unwrap();
    let (h, back) = read_train_log(&path).unwrap();
    assert_eq!(h, header);
    assert_eq!(back, records);
}

#[test]
fn unknown_fields_and_truncation_are_located() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.jsonl");
    std::fs::write(&p, "{\"id\":\"a\",\"frames\":[1],\"label\":\"Normal\",\"colour\":3}\n").unwrap();
    let e = read_weak_corpus(&p).unwrap_err().to_string();
    assert!(e.contains("colour") && e.contains(":1:"), "{e}");
    let videos = generate_corpus(&CorpusSpec { n_videos: 4, ..CorpusSpec::default() }).unwrap();
    write_corpus(&p, &videos).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    let cut = text.len() - 20;
    std::fs::write(&p, &text[..cut]).unwrap();
    match read_corpus(&p).unwrap_err() {
        Error::Format { line, offset, .. } => {
            assert_eq!(line, 4);
            let line_start = text[..cut].rfind('\n').unwrap() + 1;
            assert!(offset >= line_start && offset <= cut, "offset {offset}");
        }
        other => panic!("{other}"),
    }
}
