mod common;

use std::fs;
use std::path::Path;

use common::*;
use rankreinforce::io::cli::{run, EXIT_INVARIANT, EXIT_OK, EXIT_VALIDATION};
use rankreinforce::io::{InstanceFile, PlanFile};
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("rankreinforce").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn solve_to(dir: &TempDir, fixture_name: &str) -> PlanFile {
    let out = dir.path().join(format!("{fixture_name}.plan.json"));
    let r = cli(&[
        "solve",
        "--in",
        path(&fixture(fixture_name)),
        "--out",
        path(&out),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    PlanFile::from_json(&fs::read_to_string(out).unwrap()).unwrap()
}

#[test]
fn solve_micro() {
    let dir = TempDir::new().unwrap();
    let plan = solve_to(&dir, "micro.json");
    let moves: Vec<(f64, f64)> = plan.assignments.iter().map(|a| (a.from, a.to)).collect();
    assert_eq!(moves, [(5.0, 10.0), (12.0, 20.0)]);
    assert_eq!(plan.utility_after, 0.5);
    assert_eq!(plan.budget_used, 13.0);
    assert_eq!(plan.slack, 0.0);
    assert_eq!(plan.instance_sha256, load_fixture("micro.json").sha256());
}

#[test]
fn solve_writes_to_stdout_without_out() {
    let r = cli(&["solve", "--in", path(&fixture("micro.json"))]);
    assert_eq!(r.code, EXIT_OK);
    let plan = PlanFile::from_json(&r.stdout).unwrap();
    assert_eq!(plan.assignments.len(), 2);
}

#[test]
fn per_entry_budget_matches_total() {
    let dir = TempDir::new().unwrap();
    let total = solve_to(&dir, "micro.json");
    let mut file = load_fixture("micro.json");
    file.budget = rankreinforce::io::BudgetField::PerEntry(6.5);
    let p = dir.path().join("per_entry.json");
    fs::write(&p, file.to_json()).unwrap();
    let r = cli(&["solve", "--in", path(&p)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let per_entry = PlanFile::from_json(&r.stdout).unwrap();
    assert_eq!(per_entry.assignments, total.assignments);
    assert_eq!(per_entry.budget_total, 13.0);
}

#[test]
fn solve_is_idempotent() {
    let a = cli(&["solve", "--in", path(&fixture("four_entry_120.json"))]);
    let b = cli(&["solve", "--in", path(&fixture("four_entry_120.json"))]);
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a.stdout, b.stdout);
    let plan = PlanFile::from_json(&a.stdout).unwrap();
    assert_eq!(plan.to_json(), a.stdout);
}

#[test]
fn fastpath_on_views() {
    let r = cli(&["solve", "--in", path(&fixture("views.json")), "--fastpath"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let plan = PlanFile::from_json(&r.stdout).unwrap();
    let added: Vec<f64> = plan.assignments.iter().map(|a| a.to - a.from).collect();
    for (got, want) in added.iter().zip([3475.0, 3075.0, 2875.0, 575.0, 0.0]) {
        assert!((got - want).abs() < 1e-6, "{added:?}");
    }
}

#[test]
fn fastpath_rejects_empirical() {
    let r = cli(&["solve", "--in", path(&fixture("micro.json")), "--fastpath"]);
    assert_eq!(r.code, EXIT_VALIDATION);
    assert!(!r.stderr.is_empty());
}

#[test]
fn malformed_instances_exit_2() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [
        ("broken.json", "{\"supported\": [1, 2"),
        ("unknown.json", "{\"supported\": [1], \"complement\": {\"empirical\": [2]}, \"budget\": {\"total\": 1}, \"extra\": 1}"),
        ("empty.json", "{\"supported\": [1], \"complement\": {\"empirical\": []}, \"budget\": {\"total\": 1}}"),
        ("negative.json", "{\"supported\": [1], \"complement\": {\"empirical\": [2]}, \"budget\": {\"total\": -1}}"),
    ] {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        let r = cli(&["solve", "--in", path(&p)]);
        assert_eq!(r.code, EXIT_VALIDATION, "{name}: {}", r.stderr);
    }
    let r = cli(&["solve", "--in", path(&dir.path().join("missing.json"))]);
    assert_eq!(r.code, EXIT_VALIDATION);
}

#[test]
fn analytic_epsilon_defaults_and_rejects_zero() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("ln.json");
    fs::write(
        &p,
        "{\"supported\": [0.5, 3.0], \"complement\": {\"lognormal\": {\"mu\": 0, \"sigma\": 1}}, \"budget\": {\"total\": 0.2}}",
    )
    .unwrap();
    // analytic instances fall back to a default tolerance
    assert_eq!(cli(&["solve", "--in", path(&p)]).code, EXIT_OK);
    let r = cli(&["solve", "--in", path(&p), "--epsilon", "0"]);
    assert_eq!(r.code, EXIT_VALIDATION);
}

#[test]
fn sweep_csv() {
    let r = cli(&[
        "sweep",
        "--in",
        path(&fixture("micro.json")),
        "--alpha-min",
        "0.01",
        "--alpha-max",
        "1",
        "--steps",
        "5",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next(), Some("alpha,budget_used,next_alpha,utility"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][0], 1.0);
    assert_eq!(rows[4][0], 0.01);
    for w in rows.windows(2) {
        assert!(w[0][0] > w[1][0]);
        assert!(w[0][1] <= w[1][1]);
    }
}

#[test]
fn sweep_rejects_bad_range() {
    let r = cli(&[
        "sweep",
        "--in",
        path(&fixture("micro.json")),
        "--alpha-min",
        "1",
        "--alpha-max",
        "0.1",
    ]);
    assert_eq!(r.code, EXIT_VALIDATION);
}

#[test]
fn plot_four_entry() {
    let dir = TempDir::new().unwrap();
    let plan_path = dir.path().join("t1.plan.json");
    let r = cli(&[
        "solve",
        "--in",
        path(&fixture("four_entry_120.json")),
        "--out",
        path(&plan_path),
    ]);
    assert_eq!(r.code, EXIT_OK);
    let svg_path = dir.path().join("t1.svg");
    let r = cli(&[
        "plot",
        "--in",
        path(&fixture("four_entry_120.json")),
        "--plan",
        path(&plan_path),
        "--out",
        path(&svg_path),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    let plan = PlanFile::from_json(&fs::read_to_string(&plan_path).unwrap()).unwrap();
    assert_eq!(
        svg.matches("class=\"segment\"").count(),
        plan.segments.len()
    );
    assert_eq!(plan.segments.len(), 3);
    let csv = fs::read_to_string(dir.path().join("t1.csv")).unwrap();
    assert!(csv.starts_with("series,x,y"));
}

#[test]
fn plot_rejects_foreign_plan() {
    let dir = TempDir::new().unwrap();
    let plan_path = dir.path().join("micro.plan.json");
    assert_eq!(
        cli(&[
            "solve",
            "--in",
            path(&fixture("micro.json")),
            "--out",
            path(&plan_path)
        ])
        .code,
        EXIT_OK
    );
    let r = cli(&[
        "plot",
        "--in",
        path(&fixture("four_entry_120.json")),
        "--plan",
        path(&plan_path),
        "--out",
        path(&dir.path().join("x.svg")),
    ]);
    assert_eq!(r.code, EXIT_VALIDATION);
    assert!(
        r.stderr.contains("sha256") || r.stderr.contains("instance"),
        "{}",
        r.stderr
    );
}

#[test]
fn oracle_output() {
    let r = cli(&["oracle", "--in", path(&fixture("micro.json"))]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines[0], "best_utility 1/2");
    assert_eq!(lines[1], "explored 9");
    assert!(
        lines[2].contains("5->10") && lines[2].contains("12->20") && lines[2].ends_with("cost 13")
    );
}

#[test]
fn oracle_rejects_analytic() {
    let r = cli(&["oracle", "--in", path(&fixture("views.json"))]);
    assert_eq!(r.code, EXIT_VALIDATION);
    assert!(r.stderr.contains("oracle requires empirical complement"));
}

#[test]
fn utility_of_instance_and_plan() {
    let dir = TempDir::new().unwrap();
    let r = cli(&["utility", "--in", path(&fixture("micro.json"))]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(r.stdout.trim().parse::<f64>().unwrap(), -0.5);
    let plan_path = dir.path().join("micro.plan.json");
    cli(&[
        "solve",
        "--in",
        path(&fixture("micro.json")),
        "--out",
        path(&plan_path),
    ]);
    let r = cli(&[
        "utility",
        "--in",
        path(&fixture("micro.json")),
        "--plan",
        path(&plan_path),
    ]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(r.stdout.trim().parse::<f64>().unwrap(), 0.5);
}

#[test]
fn exit_codes_are_distinct() {
    assert_ne!(EXIT_VALIDATION, EXIT_INVARIANT);
    let r = cli(&["nonsense"]);
    assert_eq!(r.code, EXIT_VALIDATION);
}

#[test]
fn instance_round_trip() {
    let file = load_fixture("views.json");
    assert_eq!(InstanceFile::from_json(&file.to_json()).unwrap(), file);
}
