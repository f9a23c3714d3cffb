//! End-to-end tests of the `cagm` binary: artifact layout, exit codes,
//! config-file precedence, and byte-level sample determinism.

use std::path::Path;
use std::process::{Command, Output};

use cagm::io::{write_attribute_matrix, write_edge_list, write_partition};
use cagm::synth::{planted_partition_graph, PlantedConfig};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cagm"))
}

/// Writes a small planted graph into `dir`, returning the three file paths.
fn fixture(dir: &Path, seed: u64) -> (String, String, String) {
    let cfg = PlantedConfig {
        communities: 3,
        community_size: 40,
        intra_degree: 8.0,
        inter_degree: 2.0,
        ..PlantedConfig::default()
    };
    let mut rng = StdRng::seed_from_u64(seed);
    let (g, p) = planted_partition_graph(&cfg, &mut rng).unwrap();
    let edges = dir.join("g.edges");
    let attrs = dir.join("g.attrs");
    let part = dir.join("g.partition");
    write_edge_list(&edges, &g).unwrap();
    write_attribute_matrix(&attrs, &g).unwrap();
    write_partition(&part, &p).unwrap();
    (
        edges.display().to_string(),
        attrs.display().to_string(),
        part.display().to_string(),
    )
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary should launch");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn pipeline_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, attrs, part) = fixture(dir.path(), 1);
    let out_dir = dir.path().join("out");
    let out = run_ok(bin().args([
        "pipeline",
        "--edges", &edges,
        "--attrs", &attrs,
        "--partition", &part,
        "--samples", "2",
        "--seed", "7",
        "--out", &out_dir.display().to_string(),
    ]));

    for artifact in [
        "params.txt",
        "partition.txt",
        "census.txt",
        "samples.txt",
        "report.txt",
        "ccdf_degree_original.txt",
        "ccdf_degree_sample_000.txt",
        "ccdf_degree_sample_001.txt",
        "sample_000.edges",
        "sample_000.attrs",
        "sample_001.edges",
        "sample_001.attrs",
    ] {
        assert!(out_dir.join(artifact).exists(), "missing artifact {artifact}");
    }
    let report = std::fs::read_to_string(out_dir.join("report.txt")).unwrap();
    assert!(report.contains("sample_000") && report.contains("mean"), "report:\n{report}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("avg_f1"), "stdout should include the report table:\n{stdout}");
}

#[test]
fn missing_input_exits_with_validation_code() {
    let out = bin()
        .args(["fit", "--edges", "/no/such/file", "--attrs", "/no/such/file"])
        .output()
        .expect("binary should launch");
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error:"), "stderr: {stderr}");
}

#[test]
fn config_file_supplies_defaults_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, attrs, part) = fixture(dir.path(), 2);
    let out_dir = dir.path().join("out");
    let config = dir.path().join("run.conf");
    std::fs::write(
        &config,
        format!(
            "# pipeline settings\nedges = {edges}\nattrs = {attrs}\npartition = {part}\n\
             samples = 1\nseed = 3\nout = {}\n",
            out_dir.display()
        ),
    )
    .unwrap();

    // --samples 2 must beat the config file's samples = 1
    run_ok(bin().args([
        "pipeline",
        "--config", &config.display().to_string(),
        "--samples", "2",
    ]));
    assert!(out_dir.join("sample_001.edges").exists());

    // unknown keys are validation failures
    std::fs::write(&config, "bogus = 1\n").unwrap();
    let out = bin()
        .args(["fit", "--config", &config.display().to_string()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dp_fit_writes_exact_budget_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, attrs, _) = fixture(dir.path(), 3);
    let out_dir = dir.path().join("out");
    run_ok(bin().args([
        "dp-fit",
        "--edges", &edges,
        "--attrs", &attrs,
        "--eps", "12",
        "--seed", "5",
        "--out", &out_dir.display().to_string(),
    ]));
    let budget = std::fs::read_to_string(out_dir.join("budget.txt")).unwrap();
    assert!(budget.contains("epsilon = 12"), "budget:\n{budget}");
    assert!(budget.contains("6/12"), "community share missing:\n{budget}");
    assert!(budget.contains("total = 12"), "total missing:\n{budget}");

    // dp-fit without --eps is a usage error
    let out = bin()
        .args(["dp-fit", "--edges", &edges, "--attrs", &attrs])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, attrs, part) = fixture(dir.path(), 4);
    let fit_dir = dir.path().join("fit");
    run_ok(bin().args([
        "fit",
        "--edges", &edges,
        "--attrs", &attrs,
        "--partition", &part,
        "--out", &fit_dir.display().to_string(),
    ]));
    let params = fit_dir.join("params.txt").display().to_string();

    let read = |name: &str, seed: &str| -> Vec<u8> {
        let out_dir = dir.path().join(name);
        run_ok(bin().args([
            "sample",
            &params,
            "--seed", seed,
            "--out", &out_dir.display().to_string(),
        ]));
        std::fs::read(out_dir.join("sample_000.edges")).unwrap()
    };
    let a = read("s-a", "11");
    let b = read("s-b", "11");
    let c = read("s-c", "12");
    assert_eq!(a, b, "same seed must give byte-identical samples");
    assert_ne!(a, c, "different seeds should give different samples");
}
