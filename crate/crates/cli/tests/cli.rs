//! End-to-end checks of the `amsme` binary: subcommand plumbing, file
//! formats, exit codes, and the flat config file.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn amsme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amsme"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Two 12-point blobs in 4 dimensions, features as rows.
fn write_blobs(path: &Path) {
    let mut rows = vec![String::new(); 4];
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for j in 0..24 {
        let center = if j < 12 { 0.0 } else { 6.0 };
        for (i, row) in rows.iter_mut().enumerate() {
            if j > 0 {
                row.push(',');
            }
            let _ = i;
            row.push_str(&format!("{}", center + next()));
        }
    }
    std::fs::write(path, rows.join("\n") + "\n").unwrap();
}

#[test]
fn run_pipeline_and_score_artifacts() {
    let dir = tempdir().unwrap();
    let data = dir.path().join("x.csv");
    write_blobs(&data);
    let truth = dir.path().join("truth.txt");
    let labels: Vec<String> = (0..24).map(|i| usize::from(i >= 12).to_string()).collect();
    std::fs::write(&truth, labels.join("\n") + "\n").unwrap();

    let out_dir = dir.path().join("results");
    let out = amsme(&[
        "run",
        "--in",
        data.to_str().unwrap(),
        "--clusters",
        "2",
        "--seed",
        "7",
        "--neighbors",
        "5",
        "--epochs",
        "80",
        "--truth",
        truth.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_success(&out);
    for name in ["D.fmat", "O.fmat", "S.fmat", "DO.fmat", "Y1.csv", "labels.txt", "DM.fmat", "Y2.csv", "metrics.json", "provenance.json"] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }

    // score the written labels with the acc subcommand
    let acc_out = amsme(&[
        "acc",
        "--pred",
        out_dir.join("labels.txt").to_str().unwrap(),
        "--truth",
        truth.to_str().unwrap(),
    ]);
    assert_success(&acc_out);
    let parsed: serde_json::Value =
        serde_json::from_slice(&acc_out.stdout).expect("acc prints JSON");
    assert_eq!(parsed["n"], 24);
    assert!(parsed["acc"].as_f64().unwrap() >= 0.5);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempdir().unwrap();
    let data = dir.path().join("x.csv");
    write_blobs(&data);
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        format!(
            "# pipeline settings\nin={}\nclusters=2\nneighbors=5\nepochs=60\nseed=3\nsecondary=hadamard\nout={}\n",
            data.display(),
            dir.path().join("from_conf").display()
        ),
    )
    .unwrap();

    let out = amsme(&["run", "--config", cfg.to_str().unwrap()]);
    assert_success(&out);
    assert!(dir.path().join("from_conf/Y2.csv").exists());

    // the flag must beat the file value
    let out = amsme(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("overridden").to_str().unwrap(),
    ]);
    assert_success(&out);
    assert!(dir.path().join("overridden/Y2.csv").exists());
}

#[test]
fn cluster_sweep_writes_one_dir_per_count() {
    let dir = tempdir().unwrap();
    let data = dir.path().join("x.csv");
    write_blobs(&data);
    let out_dir = dir.path().join("sweep");
    let out = amsme(&[
        "run",
        "--in",
        data.to_str().unwrap(),
        "--clusters",
        "2,3",
        "--neighbors",
        "5",
        "--epochs",
        "40",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_success(&out);
    assert!(out_dir.join("nc_2/Y2.csv").exists());
    assert!(out_dir.join("nc_3/Y2.csv").exists());
}

#[test]
fn ordinal_graph_embed_cluster_chain() {
    let dir = tempdir().unwrap();
    let data = dir.path().join("x.csv");
    write_blobs(&data);

    let s_path = dir.path().join("S.fmat");
    let edges = dir.path().join("edges.csv");
    let out = amsme(&[
        "graph",
        "--in",
        data.to_str().unwrap(),
        "--clusters",
        "2",
        "--out",
        s_path.to_str().unwrap(),
        "--edge-report",
        edges.to_str().unwrap(),
    ]);
    assert_success(&out);
    let report = std::fs::read_to_string(&edges).unwrap();
    assert!(report.starts_with("i,j,similarity"));
    assert!(report.lines().count() > 1, "no edges above threshold");

    // ordinal of the similarity complement is a valid matrix input
    let o_path = dir.path().join("O.fmat");
    let out = amsme(&[
        "ordinal",
        "--in",
        s_path.to_str().unwrap(),
        "--out",
        o_path.to_str().unwrap(),
    ]);
    // S has a unit diagonal, so it is not a distance matrix
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(3));

    // production path: distances come from the pipeline artifacts
    let run_dir = dir.path().join("run");
    assert_success(&amsme(&[
        "run",
        "--in",
        data.to_str().unwrap(),
        "--clusters",
        "2",
        "--neighbors",
        "5",
        "--epochs",
        "40",
        "--out",
        run_dir.to_str().unwrap(),
    ]));
    assert_success(&amsme(&[
        "ordinal",
        "--in",
        run_dir.join("D.fmat").to_str().unwrap(),
        "--out",
        o_path.to_str().unwrap(),
    ]));

    let y_path = dir.path().join("Y.csv");
    assert_success(&amsme(&[
        "embed",
        "--in",
        run_dir.join("DO.fmat").to_str().unwrap(),
        "--neighbors",
        "5",
        "--epochs",
        "60",
        "--seed",
        "1",
        "--out",
        y_path.to_str().unwrap(),
    ]));

    let labels_path = dir.path().join("labels.txt");
    assert_success(&amsme(&[
        "cluster",
        "--in",
        y_path.to_str().unwrap(),
        "--clusters",
        "2",
        "--out",
        labels_path.to_str().unwrap(),
    ]));
    let labels = std::fs::read_to_string(&labels_path).unwrap();
    assert_eq!(labels.lines().count(), 24);

    let dm_path = dir.path().join("DM.fmat");
    assert_success(&amsme(&[
        "reweight",
        "--in",
        run_dir.join("D.fmat").to_str().unwrap(),
        "--labels",
        labels_path.to_str().unwrap(),
        "--alpha",
        "2.0",
        "--out",
        dm_path.to_str().unwrap(),
    ]));
    assert!(dm_path.exists());
}

#[test]
fn theory_fig2_writes_expected_columns() {
    let dir = tempdir().unwrap();
    let csv = dir.path().join("fig2.csv");
    let svg = dir.path().join("fig2.svg");
    // full-size run stays under the acceptance budget; keep this smoke test
    // on the default settings it documents
    let out = amsme(&[
        "theory",
        "--experiment",
        "fig2",
        "--out",
        csv.to_str().unwrap(),
        "--plot",
        svg.to_str().unwrap(),
    ]);
    assert_success(&out);
    let body = std::fs::read_to_string(&csv).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("d,estimate,stderr,cantelli_bound"));
    assert_eq!(lines.count(), 8);
    assert!(svg.exists());
}

#[test]
fn missing_input_is_a_data_error() {
    let out = amsme(&[
        "ordinal",
        "--in",
        "/nonexistent/D.fmat",
        "--out",
        "/tmp/na.fmat",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn degenerate_input_is_a_numerical_failure() {
    // an all-zero distance matrix is structurally valid but cannot be
    // embedded; the failure surfaces in the first embedding stage
    let dir = tempdir().unwrap();
    let dmat = dir.path().join("zero.fmat");
    let n: u64 = 30;
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"FMAT");
    bytes.extend_from_slice(&n.to_le_bytes());
    bytes.extend_from_slice(&n.to_le_bytes());
    bytes.extend(std::iter::repeat(0u8).take((n * n * 4) as usize));
    std::fs::write(&dmat, bytes).unwrap();

    let out = amsme(&[
        "run",
        "--in",
        dmat.to_str().unwrap(),
        "--format",
        "dmat",
        "--clusters",
        "2",
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    // artifacts from the completed steps were still written
    assert!(dir.path().join("o/S.fmat").exists());
    assert!(!dir.path().join("o/Y1.csv").exists());
}

#[test]
fn metrics_json_schema() {
    let dir = tempdir().unwrap();
    let data = dir.path().join("x.csv");
    write_blobs(&data);
    let truth = dir.path().join("truth.txt");
    let labels: Vec<String> = (0..24).map(|i| usize::from(i >= 12).to_string()).collect();
    std::fs::write(&truth, labels.join("\n") + "\n").unwrap();

    let out_dir = dir.path().join("m");
    assert_success(&amsme(&[
        "run",
        "--in",
        data.to_str().unwrap(),
        "--clusters",
        "2",
        "--neighbors",
        "5",
        "--epochs",
        "40",
        "--truth",
        truth.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]));
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("metrics.json")).unwrap())
            .unwrap();
    assert!(metrics["acc_stage1"].is_number());
    assert!(metrics["acc_stage2"].is_number());
    assert_eq!(metrics["n"], 24);
    assert_eq!(metrics["n_c"], 2);
    assert!(metrics["k_budget"].is_u64());
    let runtimes = metrics["runtime_seconds"].as_object().unwrap();
    for step in ["load", "distance", "ordinal", "scales", "similarity", "embed_stage1", "kmeans", "reweight", "embed_stage2"] {
        assert!(runtimes.contains_key(step), "missing runtime for {step}");
    }

    // without truth labels the accuracy fields serialize as null
    let out_dir2 = dir.path().join("m2");
    assert_success(&amsme(&[
        "run",
        "--in",
        data.to_str().unwrap(),
        "--clusters",
        "2",
        "--neighbors",
        "5",
        "--epochs",
        "40",
        "--out",
        out_dir2.to_str().unwrap(),
    ]));
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir2.join("metrics.json")).unwrap())
            .unwrap();
    assert!(metrics["acc_stage1"].is_null());
    assert!(metrics["acc_stage2"].is_null());
}

#[test]
fn bad_alpha_is_a_config_error() {
    let dir = tempdir().unwrap();
    let data = dir.path().join("x.csv");
    write_blobs(&data);
    let out = amsme(&[
        "run",
        "--in",
        data.to_str().unwrap(),
        "--clusters",
        "2",
        "--alpha",
        "0.5",
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
