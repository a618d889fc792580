//! End-to-end tests for the `sp-lab` binary: each subcommand is exercised
//! through a real process, and the outputs are checked against direct
//! library calls (the thin-wrapper contract) plus the documented exit
//! codes.

use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sp_lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sp-lab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should spawn")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

const SPEC_CMM: &str = r#"{
  "kind": "cmm",
  "m": 3,
  "ground_truth": [1, 0, 2],
  "proportions": [0.4, 0.6],
  "dispersions": [0.2, 0.8]
}"#;

#[test]
fn simulate_is_deterministic_and_parses() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("spec.json"), SPEC_CMM).unwrap();
    let common = [
        "simulate", "--model", "spec.json", "--n", "40", "--seed", "7",
    ];

    assert_ok(&sp_lab(dir.path(), &[&common[..], &["--out", "a.csv"]].concat()));
    assert_ok(&sp_lab(dir.path(), &[&common[..], &["--out", "b.csv"]].concat()));
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b, "same seed must give identical bytes");

    assert_ok(&sp_lab(
        dir.path(),
        &[
            "simulate", "--model", "spec.json", "--n", "40", "--seed", "8", "--out", "c.csv",
        ],
    ));
    let c = fs::read(dir.path().join("c.csv")).unwrap();
    assert_ne!(a, c, "a different seed must change the draws");

    let questions = sp_core::io::load_profiles(dir.path().join("a.csv")).unwrap();
    assert_eq!(questions.len(), 1);
    let q = &questions[&("synthetic".to_string(), "q0".to_string())];
    assert_eq!(q.profile.reports().len(), 40);
    assert_eq!(q.profile.m(), 3);
    assert_eq!(q.alternatives, vec!["a0", "a1", "a2"]);
}

/// Three votes, no two alike: 0 beats 1 and 2 head-to-head, 1 beats 2.
const THREE_VOTES: &str = "\
domain,question_id,participant_id,vote,prediction_type,prediction_value
demo,q1,v1,0>1>2,top,0
demo,q1,v2,0>2>1,top,0
demo,q1,v3,1>0>2,top,1
";

#[test]
fn aggregate_copeland_matches_hand_tally() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("prof.csv"), THREE_VOTES).unwrap();
    let out = sp_lab(
        dir.path(),
        &["aggregate", "--rule", "copeland", "--in", "prof.csv"],
    );
    assert_ok(&out);
    let records: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(records.as_array().unwrap().len(), 1);
    assert_eq!(records[0]["winner"], "0>1>2");
    assert_eq!(records[0]["rule"], "copeland");
    assert_eq!(records[0]["domain"], "demo");
}

const RANK_PREDICTIONS: &str = "\
domain,question_id,participant_id,vote,prediction_type,prediction_value
geo,q1,u1,ca>mx>us,rank,us>ca>mx
geo,q1,u2,us>ca>mx,rank,ca>us>mx
geo,q1,u3,ca>us>mx,rank,ca>mx>us
geo,q1,u4,mx>ca>us,rank,ca>mx>us
geo,q1,u5,us>mx>ca,rank,us>mx>ca
";

#[test]
fn aggregate_is_a_thin_wrapper_over_the_library() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("prof.csv"), RANK_PREDICTIONS).unwrap();
    let out = sp_lab(
        dir.path(),
        &["aggregate", "--rule", "sp-modal", "--in", "prof.csv"],
    );
    assert_ok(&out);
    let records: Value = serde_json::from_slice(&out.stdout).unwrap();

    let questions = sp_core::io::load_profiles(dir.path().join("prof.csv")).unwrap();
    let q = &questions[&("geo".to_string(), "q1".to_string())];
    let winner = sp_core::sp::sp_vote_modal(&q.profile).unwrap();
    let rendered: Vec<&str> = winner
        .as_slice()
        .iter()
        .map(|&a| q.alternatives[a].as_str())
        .collect();
    assert_eq!(records[0]["winner"], rendered.join(">"));
}

#[test]
fn check_identifiability_evaluates_all_four_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let out = sp_lab(
        dir.path(),
        &[
            "check-identifiability", "--lemma", "cmm2", "--p1", "0.4", "--phi", "0.1,0.9",
            "--m", "3",
        ],
    );
    assert_ok(&out);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["satisfied"], true);
    assert_eq!(report["lemma"], "CMM-2");

    let direct = sp_core::identifiability::cmm_g2_condition(0.4, 0.1, 0.9, 3).unwrap();
    assert_eq!(report["lhs"].as_f64().unwrap(), direct.lhs);
    assert_eq!(report["rhs"].as_f64().unwrap(), direct.rhs);

    let general = sp_lab(
        dir.path(),
        &[
            "check-identifiability", "--lemma", "cmm-general", "--p", "0.2,0.3,0.5",
            "--phi", "0.05,0.3,0.8", "--m", "4", "--split", "2",
        ],
    );
    assert_ok(&general);
    let report: Value = serde_json::from_slice(&general.stdout).unwrap();
    assert_eq!(report["lemma"], "CMM-G");
    assert_eq!(report["partition_s"], 2);

    let cmpl = sp_lab(
        dir.path(),
        &[
            "check-identifiability", "--lemma", "cmpl2", "--p1", "0.3",
            "--theta", "0.7,0.2,0.1;0.4,0.35,0.25",
        ],
    );
    assert_ok(&cmpl);
    let report: Value = serde_json::from_slice(&cmpl.stdout).unwrap();
    assert_eq!(report["lemma"], "CMPL-2");

    let cmpl_general = sp_lab(
        dir.path(),
        &[
            "check-identifiability", "--lemma", "cmpl-general", "--p", "0.3,0.7",
            "--theta", "0.7,0.2,0.1;0.4,0.35,0.25", "--split", "1",
        ],
    );
    assert_ok(&cmpl_general);

    let unknown = sp_lab(dir.path(), &["check-identifiability", "--lemma", "borda"]);
    assert_eq!(exit_code(&unknown), 1);
    let missing = sp_lab(
        dir.path(),
        &["check-identifiability", "--lemma", "cmm2", "--p1", "0.4"],
    );
    assert_eq!(exit_code(&missing), 1, "cmm2 without --phi/--m is a usage error");
}

#[test]
fn infer_writes_a_deterministic_posterior_summary() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("spec.json"), SPEC_CMM).unwrap();
    fs::write(
        dir.path().join("gt.csv"),
        "domain,question_id,ranking\nsynthetic,q0,a1>a0>a2\n",
    )
    .unwrap();
    assert_ok(&sp_lab(
        dir.path(),
        &[
            "simulate", "--model", "spec.json", "--n", "80", "--seed", "3", "--out", "prof.csv",
        ],
    ));
    let run = |out: &str| {
        assert_ok(&sp_lab(
            dir.path(),
            &[
                "infer", "--family", "cmm", "--groups", "2", "--data", "prof.csv",
                "--truth", "gt.csv", "--seed", "5", "--chains", "2", "--iterations", "500",
                "--warmup", "200", "--out", out,
            ],
        ));
        fs::read_to_string(dir.path().join(out)).unwrap()
    };
    let first = run("post1.csv");
    let second = run("post2.csv");
    assert_eq!(first, second, "same seed must give identical summaries");
    assert!(first.starts_with("parameter,mean,sd,q05,q95,rhat,ess\n"));
    // G=2 Mallows: proportions, vote dispersions, prediction dispersions
    assert_eq!(first.lines().count(), 1 + 6);
}

#[test]
fn experiment_output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
  "model": {
    "kind": "cmm",
    "m": 3,
    "ground_truth": [1, 0, 2],
    "proportions": [0.4, 0.6],
    "dispersions": [0.1, 0.9]
  },
  "aggregators": ["sp-full-posterior", "copeland", "borda"],
  "sample_sizes": [10, 30],
  "trials": 8,
  "bootstrap_reps": 100,
  "seed": 0
}"#;
    fs::write(dir.path().join("cfg.json"), config).unwrap();
    let run = |threads: &str, out: &str| {
        assert_ok(&sp_lab(
            dir.path(),
            &[
                "experiment", "--config", "cfg.json", "--seed", "11", "--threads", threads,
                "--out", out,
            ],
        ));
        fs::read(dir.path().join(out)).unwrap()
    };
    let single = run("1", "r1.csv");
    let multi = run("4", "r4.csv");
    assert_eq!(single, multi, "results must not depend on --threads");

    let text = String::from_utf8(single).unwrap();
    assert!(text.starts_with("aggregator,n,mean_kt,ci_lo,ci_hi,trials\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 2, "3 aggregators x 2 sizes");

    // the CLI seed overrides whatever the config carries
    let reseeded = run("4", "r5.csv");
    assert_eq!(multi, reseeded);
}

#[test]
fn experiment_real_mode_subsamples_a_dataset() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("prof.csv"), RANK_PREDICTIONS).unwrap();
    fs::write(
        dir.path().join("gt.csv"),
        "domain,question_id,ranking\ngeo,q1,us>ca>mx\n",
    )
    .unwrap();
    let out = sp_lab(
        dir.path(),
        &[
            "experiment", "--data", "prof.csv", "--truth", "gt.csv",
            "--aggregators", "sp-modal,copeland", "--sizes", "3,5", "--trials", "4",
            "--reps", "60", "--seed", "2", "--out", "res.csv",
        ],
    );
    assert_ok(&out);
    let result = sp_core::io::load_results(dir.path().join("res.csv")).unwrap();
    assert_eq!(result.rows.len(), 4);
    assert!(result.rows.iter().all(|r| r.trials == 4));

    // sp-full-posterior has no model to consult on real data
    let rejected = sp_lab(
        dir.path(),
        &[
            "experiment", "--data", "prof.csv", "--truth", "gt.csv",
            "--aggregators", "sp-full-posterior", "--sizes", "3", "--trials", "2",
            "--seed", "2", "--out", "res2.csv",
        ],
    );
    assert_eq!(exit_code(&rejected), 1);
}

const TWO_QUESTIONS: &str = "\
domain,question_id,participant_id,vote,prediction_type,prediction_value
geo,q1,u1,a>b>c,rank,a>b>c
geo,q1,u2,b>a>c,rank,a>b>c
geo,q1,u3,a>c>b,rank,a>b>c
geo,q1,u4,a>b>c,rank,b>a>c
geo,q1,u5,c>b>a,rank,a>b>c
geo,q1,u6,a>b>c,rank,a>c>b
geo,q2,u1,b>c>d,rank,b>c>d
geo,q2,u2,c>b>d,rank,b>c>d
geo,q2,u3,b>d>c,rank,b>c>d
geo,q2,u4,b>c>d,rank,c>b>d
geo,q2,u5,d>c>b,rank,b>c>d
geo,q2,u6,b>c>d,rank,b>d>c
";

const TWO_TRUTHS: &str = "\
domain,question_id,ranking
geo,q1,a>b>c
geo,q2,b>c>d
";

#[test]
fn predict_full_stitches_overlapping_questions() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("prof.csv"), TWO_QUESTIONS).unwrap();
    fs::write(dir.path().join("gt.csv"), TWO_TRUTHS).unwrap();
    let out = sp_lab(
        dir.path(),
        &[
            "predict-full", "--data", "prof.csv", "--truth", "gt.csv", "--groups", "2",
            "--reference", "a>b>c>d", "--bootstrap", "40", "--seed", "9",
            "--chains", "2", "--iterations", "400", "--warmup", "150", "--out", "pred.json",
        ],
    );
    assert_ok(&out);
    let pred: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("pred.json")).unwrap()).unwrap();
    assert_eq!(pred["universe"], serde_json::json!(["a", "b", "c", "d"]));
    assert_eq!(pred["bootstrap"], 40);
    let groups = pred["groups"].as_array().unwrap();
    assert_eq!(groups.len(), 2);
    for group in groups {
        let mode = group["mode"].as_str().unwrap();
        let mut ids: Vec<&str> = mode.split('>').collect();
        ids.sort_unstable();
        assert_eq!(ids, vec!["a", "b", "c", "d"], "mode must rank the universe");
        let hist: Vec<u64> = group["kt_histogram"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap())
            .collect();
        assert_eq!(hist.len(), 4 * 3 / 2 + 1, "one bin per Kendall tau value");
        assert_eq!(hist.iter().sum::<u64>(), 40);
        assert!(group["mean_kt"].as_f64().unwrap() >= 0.0);
    }

    // a reference that skips an alternative present in the data is rejected
    let bad = sp_lab(
        dir.path(),
        &[
            "predict-full", "--data", "prof.csv", "--truth", "gt.csv", "--groups", "2",
            "--reference", "a>b>c", "--bootstrap", "10", "--seed", "9", "--out", "bad.json",
        ],
    );
    assert_eq!(exit_code(&bad), 1);
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("prof.csv"), THREE_VOTES).unwrap();

    let usage = sp_lab(dir.path(), &["aggregate", "--bogus", "x"]);
    assert_eq!(exit_code(&usage), 1, "unknown flag is a usage error");
    let stderr = String::from_utf8_lossy(&usage.stderr);
    assert!(stderr.contains("Usage"), "usage text expected, got: {stderr}");

    let help = sp_lab(dir.path(), &["--help"]);
    assert_eq!(exit_code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("sp-lab"));

    let bad_rule = sp_lab(
        dir.path(),
        &["aggregate", "--rule", "kemeny", "--in", "prof.csv"],
    );
    assert_eq!(exit_code(&bad_rule), 1);

    let missing_file = sp_lab(
        dir.path(),
        &["aggregate", "--rule", "copeland", "--in", "absent.csv"],
    );
    assert_eq!(exit_code(&missing_file), 2, "I/O failures are runtime errors");
    assert!(
        String::from_utf8_lossy(&missing_file.stderr).contains("absent.csv"),
        "the error should name the file"
    );

    let no_match = sp_lab(
        dir.path(),
        &[
            "aggregate", "--rule", "copeland", "--in", "prof.csv", "--domain", "nowhere",
        ],
    );
    assert_eq!(exit_code(&no_match), 1);
}
