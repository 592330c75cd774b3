//! The binary end to end, run in scratch directories.

use std::path::Path;
use std::process::{Command, Output};

use varlab::checkpoint;
use varlab::cli::{holdout_split, read_report, split_records};
use varlab::log::read_train_log;
use varlab::mock_judge::{MockJudge, Reply};
use varlab_core::policy::{PolicyConfig, PolicyParams};
use varlab_core::rng::stream;

fn varlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varlab"))
        .args(args)
        .current_dir(dir)
        .env_remove("JUDGE_API_KEY")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = varlab(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn bytes(p: impl AsRef<Path>) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn gen_corpus_is_reproducible_and_summarized() {
    let d = tempfile::tempdir().unwrap();
    let stdout = ok(d.path(), &["gen-corpus", "--seed", "5", "--n-videos", "100", "--out", "a"]);
    assert!(stdout.contains("50 normal, 50 abnormal"));
    assert!(stdout.contains("duration histogram"));
    ok(d.path(), &["gen-corpus", "--seed", "5", "--n-videos", "100", "--out", "b"]);
    ok(d.path(), &["gen-corpus", "--seed", "6", "--n-videos", "100", "--out", "c"]);
    let a = bytes(d.path().join("a/corpus.jsonl"));
    assert_eq!(a, bytes(d.path().join("b/corpus.jsonl")));
    assert_ne!(a, bytes(d.path().join("c/corpus.jsonl")));
    for f in ["config.toml", "VERSION", "run.log"] {
        assert!(d.path().join("a").join(f).exists(), "{f}");
    }
    assert!(std::fs::read_to_string(d.path().join("a/config.toml")).unwrap().contains("seed = 5"));
}

#[test]
fn invalid_config_names_the_field() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("c.toml"), "seed = 1\n[corpus]\nabnormal_fraction = 1.5\n").unwrap();
    let out = varlab(d.path(), &["--config", "c.toml", "gen-corpus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("corpus.abnormal_fraction"));
    let out = varlab(d.path(), &["gen-corpus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn sft_rejects_weak_corpora_and_zero_steps_keeps_init() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["gen-corpus", "--seed", "1", "--n-videos", "40", "--weak", "--out", "w"]);
    let out = varlab(d.path(), &["sft", "--seed", "1", "--corpus", "w/corpus.jsonl", "--out", "s"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("weak-label"));

    ok(d.path(), &["gen-corpus", "--seed", "1", "--n-videos", "40", "--out", "g"]);
    ok(d.path(), &["sft", "--seed", "1", "--corpus", "g/corpus.jsonl", "--steps", "0", "--out", "s0"]);
    let p = checkpoint::load(&d.path().join("s0/checkpoint.txt")).unwrap();
    assert_eq!(p, PolicyParams::zeros(PolicyConfig::default()));
}

#[test]
fn sft_on_separable_corpus_reports_high_accuracy() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("c.toml"), "seed = 2\n[corpus]\nnoise = 0.0\nn_videos = 160\n").unwrap();
    ok(d.path(), &["--config", "c.toml", "gen-corpus", "--out", "g"]);
    let stdout = ok(d.path(), &["--config", "c.toml", "sft", "--corpus", "g/corpus.jsonl", "--out", "s"]);
    let acc: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("held-out accuracy "))
        .and_then(|l| l.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(acc >= 0.9, "{stdout}");
    assert!(d.path().join("s/sft.log.jsonl").exists());
}

#[test]
fn train_honors_seed_ablation_and_provenance() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["gen-corpus", "--seed", "3", "--n-videos", "24", "--out", "g"]);
    ok(d.path(), &["sft", "--seed", "3", "--corpus", "g/corpus.jsonl", "--steps", "50", "--out", "s"]);
    let base = ["train", "--seed", "3", "--corpus", "g/corpus.jsonl", "--lr", "0.5", "--max-steps", "30", "--epochs", "2"];
    let run = |extra: &[&str], out: &str| {
        let mut args: Vec<&str> = base.to_vec();
        args.extend_from_slice(extra);
        args.extend_from_slice(&["--out", out]);
        ok(d.path(), &args);
    };
    run(&["--init", "s/checkpoint.txt"], "t1");
    run(&["--init", "s/checkpoint.txt"], "t2");
    run(&[], "t3");
    run(&["--reward-ablation", "no-ano", "--ckpt-every", "10"], "t4");
    let ck = |r: &str| bytes(d.path().join(r).join("checkpoint.txt"));
    assert_eq!(ck("t1"), ck("t2"));
    assert_eq!(bytes(d.path().join("t1/train.log.jsonl")), bytes(d.path().join("t2/train.log.jsonl")));
    assert_ne!(ck("t1"), ck("t3"));

    let (h1, r1) = read_train_log(&d.path().join("t1/train.log.jsonl")).unwrap();
    assert_eq!(h1.init, "s/checkpoint.txt");
    assert_eq!(h1.seed, 3);
    assert_eq!(r1.len(), 30);
    let (h3, _) = read_train_log(&d.path().join("t3/train.log.jsonl")).unwrap();
    assert_eq!(h3.init, "scratch");

    let (h4, r4) = read_train_log(&d.path().join("t4/train.log.jsonl")).unwrap();
    assert!(!h4.rewards.contains(&"ano".to_string()));
    assert!(r4.iter().all(|r| r.mean_ano == 0.0));
    assert!(d.path().join("t4/ckpt/step-000030.txt").exists());
    let snapshot = std::fs::read_to_string(d.path().join("t4/config.toml")).unwrap();
    assert!(snapshot.contains("verification = false"), "{snapshot}");
}

#[test]
fn eval_oracle_is_perfect_and_reports_round_trip() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["gen-corpus", "--seed", "4", "--n-videos", "30", "--out", "g"]);
    ok(d.path(), &["eval", "--seed", "4", "--corpus", "g/corpus.jsonl", "--oracle", "--out", "e"]);
    let report = read_report(&d.path().join("e/report.json")).unwrap();
    assert_eq!(report.accuracy, 1.0);
    assert_eq!(report.miou, 1.0);
    assert_eq!(report.bleu2, 1.0);
    assert!(report.meteor_lite > 0.99);
    let again = serde_json::to_string_pretty(&report).unwrap() + "\n";
    assert_eq!(again, std::fs::read_to_string(d.path().join("e/report.json")).unwrap());
    // Scoring the written outputs again gives the same report.
    ok(d.path(), &["eval", "--seed", "4", "--corpus", "g/corpus.jsonl", "--outputs", "e/outputs.jsonl", "--out", "e2"]);
    assert_eq!(read_report(&d.path().join("e2/report.json")).unwrap(), report);
}

#[test]
fn random_checkpoint_scores_near_chance() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["gen-corpus", "--seed", "8", "--n-videos", "400", "--out", "g"]);
    let mut rng = stream(8, &[]);
    let mut p = PolicyParams::zeros(PolicyConfig::default());
    for v in p.values_mut() {
        *v = rand::Rng::gen_range(&mut rng, -0.05..0.05);
    }
    checkpoint::save(&d.path().join("r.txt"), &p, &["random".into()]).unwrap();
    ok(d.path(), &["eval", "--seed", "8", "--checkpoint", "r.txt", "--corpus", "g/corpus.jsonl", "--stochastic", "--out", "e"]);
    let r = read_report(&d.path().join("e/report.json")).unwrap();
    // The untrained format head makes about half the samples unparseable;
    // those count as wrong, so chance level applies to the parseable rest.
    let n = r.n_videos as f64;
    let parseable = n - r.unextractable as f64;
    assert!((r.unextractable as f64 / n - 0.5).abs() <= 0.1, "unextractable {}", r.unextractable);
    let acc = r.accuracy * n / parseable;
    assert!((acc - 0.5).abs() <= 0.1, "accuracy on parseable outputs {acc}");
}

#[test]
fn eval_rejects_vocabulary_mismatch() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("c.toml"), "seed = 1\n[corpus]\nvocab_size = 32\nn_videos = 20\n").unwrap();
    ok(d.path(), &["--config", "c.toml", "gen-corpus", "--out", "g"]);
    checkpoint::save(&d.path().join("z.txt"), &PolicyParams::zeros(PolicyConfig::default()), &[]).unwrap();
    let out = varlab(d.path(), &["eval", "--seed", "1", "--checkpoint", "z.txt", "--corpus", "g/corpus.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vocabulary"));
}

#[test]
fn parse_exit_status_follows_the_records() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["gen-corpus", "--seed", "4", "--n-videos", "6", "--out", "g"]);
    ok(d.path(), &["eval", "--seed", "4", "--corpus", "g/corpus.jsonl", "--oracle", "--out", "e"]);
    let outputs: Vec<String> = std::fs::read_to_string(d.path().join("e/outputs.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["text"].as_str().unwrap().to_string())
        .collect();
    std::fs::write(d.path().join("good.txt"), outputs.join("\n\n")).unwrap();
    let out = varlab(d.path(), &["parse", "good.txt"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("6 records, 0 malformed"));

    let mut bad = outputs.clone();
    bad[1] = bad[1].replace("</answer>", "");
    std::fs::write(d.path().join("bad.txt"), bad.join("\n\n\n")).unwrap();
    let out = varlab(d.path(), &["parse", "bad.txt"]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("record 2") && stdout.contains("malformed"), "{stdout}");

    std::fs::write(d.path().join("empty.txt"), "\n\n").unwrap();
    let out = varlab(d.path(), &["parse", "empty.txt"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("warning"));

    assert_eq!(varlab(d.path(), &["parse", "e/outputs.jsonl"]).status.code(), Some(0));
    assert_eq!(varlab(d.path(), &["parse", "missing.txt"]).status.code(), Some(2));
}

#[test]
fn judge_command_uses_the_endpoint_and_key() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["gen-corpus", "--seed", "4", "--n-videos", "4", "--out", "g"]);
    ok(d.path(), &["eval", "--seed", "4", "--corpus", "g/corpus.jsonl", "--oracle", "--out", "e"]);
    let mock = MockJudge::start(Reply::Content("0.7".into())).unwrap();
    let url = mock.base_url();
    let args = ["judge", "--outputs", "e/outputs.jsonl", "--corpus", "g/corpus.jsonl", "--base-url", &url, "--out", "j"];
    let out = varlab(d.path(), &args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("JUDGE_API_KEY"));
    let out = Command::new(env!("CARGO_BIN_EXE_varlab"))
        .args(args)
        .current_dir(d.path())
        .env("JUDGE_API_KEY", "test")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(mock.hits(), 12);
    let run: serde_json::Value = serde_json::from_slice(&bytes(d.path().join("j/judge.json"))).unwrap();
    assert_eq!(run["complete"], true);
    assert_eq!(run["mean"]["detail"], 0.7);
}

#[test]
fn holdout_and_record_splitting() {
    let items: Vec<usize> = (0..100).collect();
    let (fit, held) = holdout_split(&items, 0.2);
    assert_eq!((fit.len(), held.len()), (80, 20));
    assert_eq!(holdout_split(&items, 0.0).1.len(), 0);
    let recs = split_records("a\nb\n\n\nc\n  \nd");
    assert_eq!(recs, vec![(1, "a\nb".to_string()), (5, "c".to_string()), (7, "d".to_string())]);
    assert!(split_records("\n \n").is_empty());
}
