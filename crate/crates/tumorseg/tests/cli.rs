use std::path::Path;
use std::process::{Command, Output};

fn tumorseg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tumorseg"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_code(out: &Output, want: i32) {
    let got = out.status.code().expect("no signal");
    assert_eq!(
        got,
        want,
        "exit {got}, wanted {want}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn make_dataset(dir: &Path, seed: &str) {
    let out = tumorseg(
        dir,
        &[
            "make-synthetic",
            "--train",
            "2",
            "--test",
            "1",
            "--dims",
            "16",
            "--radius-frac",
            "0.25",
            "--seed",
            seed,
            "--out",
            "data",
        ],
    );
    assert_code(&out, 0);
}

const FAST_CFG: &str = "patch_dims=8,8,8\niterations=4\nlr=0.01\nscales=1\nwindow_size=8,8\nproposals_per_window=20\n";

#[test]
fn help_and_version_exit_zero_and_bad_flags_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(&tumorseg(dir.path(), &["--help"]), 0);
    assert_code(&tumorseg(dir.path(), &["--version"]), 0);
    assert_code(&tumorseg(dir.path(), &["--frobnicate"]), 1);
    assert_code(&tumorseg(dir.path(), &["evaluate"]), 1);
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.cfg", "warp_speed=9\n");
    let out = tumorseg(
        dir.path(),
        &["--config", "bad.cfg", "make-synthetic", "--train", "1", "--test", "0", "--dims", "8"],
    );
    assert_code(&out, 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warp_speed"));
}

#[test]
fn convert_rejects_blob_size_mismatch_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("raw.bin"), vec![0u8; 10]).unwrap();
    write(
        dir.path(),
        "conv.spec",
        "input=raw.bin\noutput=v.vvl\ndims=2,2,2\ndtype=u8\nspacing=1,1,1\n",
    );
    let out = tumorseg(dir.path(), &["convert", "--spec", "conv.spec"]);
    assert_code(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("8"));
}

#[test]
fn convert_then_reuse_as_labels() {
    let dir = tempfile::tempdir().unwrap();
    let mut blob = vec![0u8; 27];
    blob[13] = 4;
    blob[12] = 1;
    blob[14] = 2;
    std::fs::write(dir.path().join("raw.bin"), &blob).unwrap();
    write(
        dir.path(),
        "conv.spec",
        "input=raw.bin\noutput=lab.vvl\ndims=3,3,3\ndtype=u8\nspacing=1,1,1\n",
    );
    assert_code(&tumorseg(dir.path(), &["convert", "--spec", "conv.spec"]), 0);
    let vol = volcore::read_volume(&dir.path().join("lab.vvl")).unwrap();
    assert_eq!(vol.as_u8().unwrap()[13], 4);
}

#[test]
fn windows_command_writes_per_scan_files_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    make_dataset(dir.path(), "5");
    write(dir.path(), "run.cfg", FAST_CFG);
    let args = [
        "--config",
        "run.cfg",
        "--out",
        "w1",
        "windows",
        "--manifest",
        "data/train_manifest.txt",
    ];
    assert_code(&tumorseg(dir.path(), &args), 0);
    let mut args2 = args;
    args2[3] = "w2";
    assert_code(&tumorseg(dir.path(), &args2), 0);
    let a = std::fs::read(dir.path().join("w1/train_00.windows.txt")).unwrap();
    let b = std::fs::read(dir.path().join("w2/train_00.windows.txt")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn windows_on_empty_labels_warns_and_emits_no_positives() {
    let dir = tempfile::tempdir().unwrap();
    make_dataset(dir.path(), "6");
    // blank out the labels of train_00
    let dims = [16, 16, 16];
    let zeros = volcore::Volume::u8(dims, [1.0; 3], vec![0u8; 4096]).unwrap();
    volcore::write_volume(&zeros, &dir.path().join("data/train_00_labels.vvl")).unwrap();
    write(dir.path(), "run.cfg", FAST_CFG);
    let out = tumorseg(
        dir.path(),
        &[
            "--config",
            "run.cfg",
            "--out",
            "w",
            "windows",
            "--manifest",
            "data/train_manifest.txt",
        ],
    );
    assert_code(&out, 0);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("train_00") && stderr.contains("empty labels"));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let line = stdout.lines().find(|l| l.starts_with("train_00")).unwrap();
    assert!(line.contains("0 positive"));
}

#[test]
fn full_pipeline_runs_and_perfect_oracle_labels_score_one() {
    let dir = tempfile::tempdir().unwrap();
    make_dataset(dir.path(), "7");
    write(dir.path(), "run.cfg", FAST_CFG);

    let out = tumorseg(
        dir.path(),
        &[
            "--config",
            "run.cfg",
            "--out",
            "run",
            "train",
            "seg",
            "--manifest",
            "data/train_manifest.txt",
        ],
    );
    assert_code(&out, 0);
    assert!(dir.path().join("run/seg.ckp").is_file());

    let out = tumorseg(
        dir.path(),
        &[
            "--config",
            "run.cfg",
            "--out",
            "run",
            "train",
            "detector",
            "--manifest",
            "data/train_manifest.txt",
        ],
    );
    assert_code(&out, 0);
    assert!(dir.path().join("run/detector.ckp").is_file());

    let out = tumorseg(
        dir.path(),
        &[
            "--config",
            "run.cfg",
            "--out",
            "pred",
            "--jobs",
            "2",
            "infer",
            "--manifest",
            "data/test_manifest.txt",
            "--seg-ckpt",
            "run/seg.ckp",
            "--detection",
            "oracle",
        ],
    );
    assert_code(&out, 0);
    assert!(dir.path().join("pred/test_00_pred.vvl").is_file());
    assert!(dir.path().join("pred/pred_manifest.txt").is_file());

    // an untrained-run prediction may be poor; scoring truth against itself
    // checks the evaluate plumbing end to end
    let out = tumorseg(
        dir.path(),
        &[
            "--out",
            "eval",
            "evaluate",
            "--pred-manifest",
            "data/truth_test.txt",
            "--truth-manifest",
            "data/truth_test.txt",
        ],
    );
    assert_code(&out, 0);
    let text = std::fs::read_to_string(dir.path().join("eval/test_00_report.json")).unwrap();
    let report: segmetrics::ScanReport = serde_json::from_str(&text).unwrap();
    for region in &report.regions {
        assert_eq!(region.dice, 1.0);
    }
    assert!(dir.path().join("eval/aggregate.csv").is_file());

    // real predictions evaluate cleanly too
    let out = tumorseg(
        dir.path(),
        &[
            "--out",
            "eval2",
            "evaluate",
            "--pred-manifest",
            "pred/pred_manifest.txt",
            "--truth-manifest",
            "data/truth_test.txt",
        ],
    );
    assert_code(&out, 0);
}

#[test]
fn infer_with_wrong_checkpoint_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    make_dataset(dir.path(), "8");
    write(dir.path(), "run.cfg", FAST_CFG);
    assert_code(
        &tumorseg(
            dir.path(),
            &[
                "--config",
                "run.cfg",
                "--out",
                "run",
                "train",
                "detector",
                "--manifest",
                "data/train_manifest.txt",
            ],
        ),
        0,
    );
    // a detector checkpoint is not a segmentation checkpoint
    let out = tumorseg(
        dir.path(),
        &[
            "--config",
            "run.cfg",
            "--out",
            "pred",
            "infer",
            "--manifest",
            "data/test_manifest.txt",
            "--seg-ckpt",
            "run/detector.ckp",
            "--detection",
            "oracle",
        ],
    );
    assert_code(&out, 2);
}

#[test]
fn evaluate_rejects_mismatched_scan_sets() {
    let dir = tempfile::tempdir().unwrap();
    make_dataset(dir.path(), "9");
    write(dir.path(), "short.txt", "test_00 data/test_00_labels.vvl\n");
    let out = tumorseg(
        dir.path(),
        &[
            "--out",
            "eval",
            "evaluate",
            "--pred-manifest",
            "short.txt",
            "--truth-manifest",
            "data/truth_train.txt",
        ],
    );
    assert_code(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("different scans"));
}

#[test]
fn same_seed_training_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    make_dataset(dir.path(), "10");
    write(dir.path(), "run.cfg", FAST_CFG);
    for out_dir in ["r1", "r2"] {
        assert_code(
            &tumorseg(
                dir.path(),
                &[
                    "--config",
                    "run.cfg",
                    "--seed",
                    "3",
                    "--out",
                    out_dir,
                    "train",
                    "seg",
                    "--manifest",
                    "data/train_manifest.txt",
                ],
            ),
            0,
        );
    }
    let a = std::fs::read(dir.path().join("r1/seg.ckp")).unwrap();
    let b = std::fs::read(dir.path().join("r2/seg.ckp")).unwrap();
    assert_eq!(a, b);
    let a = std::fs::read(dir.path().join("r1/seg_report.json")).unwrap();
    let b = std::fs::read(dir.path().join("r2/seg_report.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn commands_do_not_mutate_their_inputs() {
    let dir = tempfile::tempdir().unwrap();
    make_dataset(dir.path(), "11");
    let flair = dir.path().join("data/train_00_flair.vvl");
    let before = std::fs::read(&flair).unwrap();
    write(dir.path(), "run.cfg", FAST_CFG);
    assert_code(
        &tumorseg(
            dir.path(),
            &[
                "--config",
                "run.cfg",
                "--out",
                "run",
                "train",
                "seg",
                "--manifest",
                "data/train_manifest.txt",
            ],
        ),
        0,
    );
    assert_eq!(std::fs::read(&flair).unwrap(), before);
}
