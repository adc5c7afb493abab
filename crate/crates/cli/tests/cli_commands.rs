//! End-to-end runs of the smarket binary against the shipped configs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn smarket() -> Command {
    Command::new(env!("CARGO_BIN_EXE_smarket"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn allocate_clears_the_demo_scenario_and_balances_the_books() {
    let out = smarket().arg("allocate").arg(config("demo-small.toml")).output().unwrap();
    let text = stdout_of(&out);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert!(text.contains("social_welfare_cents 12870"), "{text}");
    assert!(text.contains("budget_balanced true"), "{text}");
    assert!(text.contains("user,slot,provider"), "{text}");
}

#[test]
fn a_scenario_without_users_allocates_nothing() {
    let out = smarket().arg("allocate").arg(config("sim-default.toml")).output().unwrap();
    let text = stdout_of(&out);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert!(text.contains("winners_count 0"), "{text}");
    assert!(text.contains("social_welfare_cents 0"), "{text}");
}

#[test]
fn a_rising_price_curve_is_rejected_with_the_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rising.toml");
    std::fs::write(
        &path,
        r#"
types = 1

[[providers]]
id = 1
supply = [20]
window = [0, 8]
curves = [[[40, 1], [50, 15]]]
"#,
    )
    .unwrap();
    let out = smarket().arg("allocate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("must not increase"), "{}", stderr_of(&out));
}

#[test]
fn an_unparseable_config_is_rejected_with_the_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "types = \"three\"").unwrap();
    let out = smarket().arg("allocate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exporting_a_scenario_preserves_its_fingerprint() {
    let dir = tempfile::tempdir().unwrap();
    let exported = dir.path().join("exported.toml");
    let first = smarket()
        .arg("allocate")
        .arg(config("amazon-standard.toml"))
        .arg("--export")
        .arg(&exported)
        .output()
        .unwrap();
    assert!(first.status.success(), "stderr: {}", stderr_of(&first));
    let second = smarket().arg("allocate").arg(&exported).output().unwrap();
    assert!(second.status.success(), "stderr: {}", stderr_of(&second));

    let fingerprint = |text: &str| {
        text.lines()
            .find(|l| l.starts_with("scenario_fingerprint "))
            .unwrap()
            .to_string()
    };
    assert_eq!(fingerprint(&stdout_of(&first)), fingerprint(&stdout_of(&second)));
}

#[test]
fn form_groups_with_zero_sweeps_keeps_the_initial_structure() {
    let out = smarket()
        .arg("form-groups")
        .arg(config("demo-small.toml"))
        .args(["--seed", "3", "--max-iters", "0"])
        .output()
        .unwrap();
    let text = stdout_of(&out);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert!(text.contains("sweeps_count 0"), "{text}");
    // all eight users still sit where the seeded initializer put them
    let structure_line = text.lines().find(|l| l.starts_with("w{")).unwrap();
    for user in 1..=8 {
        assert!(structure_line.contains(&format!("u{user}")), "{structure_line}");
    }
}

#[test]
fn an_unseeded_invocation_draws_and_prints_a_seed() {
    let out = smarket().arg("form-groups").arg(config("demo-small.toml")).output().unwrap();
    let text = stdout_of(&out);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert!(
        text.lines().any(|l| {
            l.strip_prefix("seed ").map(|s| s.parse::<u64>().is_ok()).unwrap_or(false)
        }),
        "{text}"
    );
}

#[test]
fn form_groups_writes_the_trace_file_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = smarket()
        .arg("form-groups")
        .arg(config("demo-small.toml"))
        .args(["--seed", "0"])
        .arg("--trace")
        .arg(&trace)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let body = std::fs::read_to_string(&trace).unwrap();
    assert!(body.starts_with("sweep,welfare_cents,epsilon_user,epsilon_provider"), "{body}");
    assert!(body.lines().count() >= 2, "{body}");
}

#[test]
fn the_same_seed_writes_byte_identical_reports() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [dir_a.path(), dir_b.path()] {
        let out = smarket()
            .arg("simulate")
            .arg(config("demo-small.toml"))
            .args(["--scheme", "formed-groups", "--runs", "1", "--seed", "7", "--out"])
            .arg(dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    }
    for name in ["report-formed-groups-7.json", "events-formed-groups-7.csv"] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical invocations");
    }
}

#[test]
fn simulate_honors_the_output_directory_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let out = smarket()
        .env("SMARKET_OUT_DIR", dir.path())
        .arg("simulate")
        .arg(config("demo-small.toml"))
        .args(["--scheme", "fcfs", "--runs", "1", "--seed", "1"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    assert!(dir.path().join("report-fcfs-1.json").exists());
}

#[test]
fn compare_reports_all_three_schemes_with_direction_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = smarket()
        .arg("--out-dir")
        .arg(dir.path())
        .arg("compare")
        .arg(config("demo-small.toml"))
        .args(["--runs", "2", "--seed", "0"])
        .output()
        .unwrap();
    let text = stdout_of(&out);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    for scheme in ["fcfs,", "single-group,", "formed-groups,"] {
        assert!(text.contains(scheme), "{text}");
    }
    assert!(text.contains("ordering acceptance_rate"), "{text}");
    assert!(text.contains("improvements formed-groups vs fcfs"), "{text}");
    assert!(dir.path().join("compare-summary.csv").exists());
}

#[test]
fn oracle_reports_the_gap_on_a_small_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.toml");
    std::fs::write(
        &path,
        r#"
types = 1

[[providers]]
id = 1
supply = [8]
window = [0, 5]
curves = [[[60, 1], [25, 6]]]

[[providers]]
id = 2
supply = [6]
window = [0, 5]
curves = [[[50, 1]]]

[[users]]
id = 1
demand = [4]
length = 2
window = [0, 4]
valuation_cents = 900

[[users]]
id = 2
demand = [4]
length = 2
window = [0, 4]
valuation_cents = 900

[[users]]
id = 3
demand = [2]
length = 3
window = [1, 5]
valuation_cents = 400
"#,
    )
    .unwrap();
    let out = smarket().arg("oracle").arg(&path).output().unwrap();
    let text = stdout_of(&out);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));

    let cents = |prefix: &str| -> i64 {
        text.lines()
            .find(|l| l.starts_with(prefix))
            .unwrap_or_else(|| panic!("missing {prefix} in {text}"))
            .split_whitespace()
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };
    let optimum = cents("optimum_welfare_cents");
    let heuristic = cents("heuristic_welfare_cents");
    assert!(optimum > 0, "{text}");
    assert!(heuristic <= optimum, "{text}");
    assert!(text.contains("welfare_ratio"), "{text}");
}

#[test]
fn oracle_over_budget_exits_three_and_reports_the_bound() {
    let out = smarket()
        .arg("oracle")
        .arg(config("demo-small.toml"))
        .args(["--budget", "10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr_of(&out));
    let err = stderr_of(&out);
    assert!(err.contains("node budget"), "{err}");
    assert!(err.contains("mappings"), "{err}");
}
