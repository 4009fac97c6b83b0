//! Subcommand-level tests of the `emorec` binary: happy paths, exit codes,
//! and the config-file overlay.

use std::path::Path;
use std::process::{Command, Output};

use emorec::synth::write_synth_corpus;
use emorec::wav::write_wav;
use emorec_core::audio::AudioClip;

fn emorec(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emorec"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn assert_validation_error(out: &Output) {
    assert_eq!(
        out.status.code(),
        Some(2),
        "stderr:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Build a tiny corpus and run the whole subcommand chain in one tempdir.
#[test]
fn full_subcommand_chain_works() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    write_synth_corpus(&cwd.join("corpus"), 40, 3).unwrap();

    assert_success(&emorec(
        &[
            "extract",
            "--input",
            "corpus",
            "--layout",
            "generic",
            "--out",
            "features.csv",
        ],
        cwd,
    ));
    let features = std::fs::read_to_string(cwd.join("features.csv")).unwrap();
    assert!(features.starts_with("#version=1\n"));
    assert!(features.contains("file,label,energy_max"));

    assert_success(&emorec(
        &[
            "select",
            "--features",
            "features.csv",
            "--out",
            "selection.txt",
            "--train-only",
            "--seed",
            "5",
            "--train-frac",
            "0.75",
        ],
        cwd,
    ));
    let selection = std::fs::read_to_string(cwd.join("selection.txt")).unwrap();
    assert!(selection.starts_with("#version=1\n"));
    assert_eq!(selection.lines().count(), 1 + 12, "12 selected features");

    assert_success(&emorec(
        &[
            "train",
            "--features",
            "features.csv",
            "--selection",
            "selection.txt",
            "--out",
            "models",
            "--seed",
            "5",
            "--epochs",
            "120",
        ],
        cwd,
    ));
    for file in [
        "run.meta",
        "selection.txt",
        "standardizer.model",
        "knn.model",
        "tree.model",
        "nn.model",
        "svm.model",
    ] {
        assert!(cwd.join("models").join(file).is_file(), "{file} missing");
    }

    let eval = emorec(
        &[
            "eval",
            "--models",
            "models",
            "--features",
            "features.csv",
            "--report",
            "report.csv",
        ],
        cwd,
    );
    assert_success(&eval);
    let stdout = String::from_utf8_lossy(&eval.stdout);
    for table in [
        "== knn ==",
        "== tree ==",
        "== nn ==",
        "== svm ==",
        "== ensemble",
    ] {
        assert!(stdout.contains(table), "missing table {table}");
    }
    assert!(stdout.contains("average accuracy:"));
    assert!(cwd.join("report.csv").is_file());

    // a second feature file turns on the cross-dataset summary
    let multi = emorec(
        &[
            "eval",
            "--models",
            "models",
            "--features",
            "features.csv",
            "--features",
            "features.csv",
        ],
        cwd,
    );
    assert_success(&multi);
    assert!(
        String::from_utf8_lossy(&multi.stdout).contains("cross-dataset average accuracy"),
        "missing cross-dataset summary"
    );

    let predict = emorec(
        &[
            "predict",
            "--models",
            "models",
            "--wav",
            "corpus/happy/happy_002.wav",
        ],
        cwd,
    );
    assert_success(&predict);
    let stdout = String::from_utf8_lossy(&predict.stdout);
    assert!(stdout.contains("votes:"));
    assert!(stdout.contains("decision:"));
}

#[test]
fn extract_reads_berlin_names() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    let corpus = cwd.join("berlin");
    std::fs::create_dir(&corpus).unwrap();
    // synthesize clips, then name them in the corpus convention
    for (i, code) in ['W', 'F', 'N', 'T'].iter().enumerate() {
        for version in ['a', 'b'] {
            let class = emorec_core::functionals::EmotionClass::from_index(i).unwrap();
            let clip = emorec::synth::synth_clip(class, version as usize, 11);
            write_wav(&corpus.join(format!("0{i}a01{code}{version}.wav")), &clip).unwrap();
        }
    }
    // out-of-scope emotion and junk name are skipped, not fatal
    let clip = emorec::synth::synth_clip(emorec_core::functionals::EmotionClass::Angry, 9, 11);
    write_wav(&corpus.join("03a01La.wav"), &clip).unwrap();
    write_wav(&corpus.join("readme_audio.wav"), &clip).unwrap();

    let out = emorec(
        &[
            "extract",
            "--input",
            "berlin",
            "--layout",
            "berlin",
            "--out",
            "features.csv",
        ],
        cwd,
    );
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("extracted 8 utterances"),
        "stdout: {stdout}"
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("skipped"), "stderr: {stderr}");
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    write_synth_corpus(&cwd.join("corpus"), 40, 1).unwrap();
    assert_success(&emorec(
        &[
            "extract",
            "--input",
            "corpus",
            "--layout",
            "generic",
            "--out",
            "features.csv",
        ],
        cwd,
    ));
    std::fs::write(cwd.join("run.conf"), "target = 5\nbins = 8\n").unwrap();

    // config file sets the target
    assert_success(&emorec(
        &[
            "select",
            "--features",
            "features.csv",
            "--out",
            "sel5.txt",
            "--config",
            "run.conf",
        ],
        cwd,
    ));
    assert_eq!(
        std::fs::read_to_string(cwd.join("sel5.txt"))
            .unwrap()
            .lines()
            .count(),
        1 + 5
    );

    // an explicit flag overrides it
    assert_success(&emorec(
        &[
            "select",
            "--features",
            "features.csv",
            "--out",
            "sel3.txt",
            "--config",
            "run.conf",
            "--target",
            "3",
        ],
        cwd,
    ));
    assert_eq!(
        std::fs::read_to_string(cwd.join("sel3.txt"))
            .unwrap()
            .lines()
            .count(),
        1 + 3
    );

    // unknown keys are validation errors
    std::fs::write(cwd.join("bad.conf"), "banana = 1\n").unwrap();
    assert_validation_error(&emorec(
        &[
            "select",
            "--features",
            "features.csv",
            "--out",
            "x.txt",
            "--config",
            "bad.conf",
        ],
        cwd,
    ));
}

#[test]
fn validation_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();

    // missing corpus directory
    assert_validation_error(&emorec(
        &[
            "extract", "--input", "nowhere", "--layout", "generic", "--out", "f.csv",
        ],
        cwd,
    ));

    // malformed feature file
    std::fs::write(cwd.join("bad.csv"), "not a feature file\n").unwrap();
    assert_validation_error(&emorec(
        &["select", "--features", "bad.csv", "--out", "s.txt"],
        cwd,
    ));

    // missing model directory
    assert_validation_error(&emorec(
        &["eval", "--models", "nothing", "--features", "bad.csv"],
        cwd,
    ));

    // train fraction outside its range
    write_synth_corpus(&cwd.join("corpus"), 4, 1).unwrap();
    assert_success(&emorec(
        &[
            "extract", "--input", "corpus", "--layout", "generic", "--out", "f.csv",
        ],
        cwd,
    ));
    assert_validation_error(&emorec(
        &[
            "select",
            "--features",
            "f.csv",
            "--out",
            "s.txt",
            "--train-only",
            "--seed",
            "1",
            "--train-frac",
            "0.2",
        ],
        cwd,
    ));
}

#[test]
fn predict_rejects_an_unvoiced_clip() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    write_synth_corpus(&cwd.join("corpus"), 40, 2).unwrap();
    assert_success(&emorec(
        &[
            "extract",
            "--input",
            "corpus",
            "--layout",
            "generic",
            "--out",
            "features.csv",
        ],
        cwd,
    ));
    assert_success(&emorec(
        &[
            "select",
            "--features",
            "features.csv",
            "--out",
            "selection.txt",
        ],
        cwd,
    ));
    assert_success(&emorec(
        &[
            "train",
            "--features",
            "features.csv",
            "--selection",
            "selection.txt",
            "--out",
            "models",
            "--seed",
            "1",
            "--epochs",
            "60",
        ],
        cwd,
    ));

    let silence = AudioClip::new(vec![0.0; 16000], 16000, "silence").unwrap();
    write_wav(&cwd.join("silence.wav"), &silence).unwrap();
    let out = emorec(
        &["predict", "--models", "models", "--wav", "silence.wav"],
        cwd,
    );
    assert_validation_error(&out);
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("no voiced frames"),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}
