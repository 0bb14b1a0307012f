use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use smgark::tableau::{mr_lpfr, write_tableau};

fn smgark(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smgark")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_builtin_leapfrog() {
    let o = smgark(&["check", "mr-lpfr", "--M", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = stdout(&o);
    assert!(report.starts_with("condition_id,lhs,rhs,residual,pass,required\n"));
    assert!(report.lines().any(|l| l.starts_with("symplectic.a,")));
}

#[test]
fn check_rejects_odd_leapfrog() {
    let o = smgark(&["check", "mr-lpfr", "--M", "3"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("M must be even"), "{}", stderr(&o));
}

#[test]
fn corrupted_weight_names_the_failing_condition() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("lpfr.tab");
    let text = write_tableau(&mr_lpfr(2).unwrap());
    fs::write(&file, &text).unwrap();
    assert!(smgark(&["check", path(&file)]).status.success());

    // first slow weight of the bar half: 1/2 -> 0.6
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    let at = lines.iter().position(|l| l == "[bar.b.s]").unwrap() + 1;
    let mut w: Vec<&str> = lines[at].split_whitespace().collect();
    w[0] = "0.6";
    lines[at] = w.join(" ");
    fs::write(&file, lines.join("\n") + "\n").unwrap();

    let o = smgark(&["check", path(&file)]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("FAIL p1.slow.bar"), "{err}");
}

#[test]
fn tableau_parse_errors_report_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.tab");
    fs::write(&file, "M = 2\n[bar.ss]\n0 0\n0.5 x\n").unwrap();
    let o = smgark(&["check", path(&file)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 4, column 5"), "{}", stderr(&o));
}

#[test]
fn composed_tableau_checks_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("tj.tab");
    let o = smgark(&["compose", "mr-lpfr", "--M", "2", "--family", "tj", "--order", "4", "-o", path(&file)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = smgark(&["check", path(&file), "--order", "3", "--require", "symmetric"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn trajectory_has_one_row_per_macro_step() {
    let o = smgark(&["integrate", "--scheme", "mr-imex2", "--H", "0.1", "--M", "50", "--t-end", "1", "--initial", "paper"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,p_1,p_2,p_3,p_4,p_5,p_6,q_1,q_2,q_3,q_4,q_5,q_6,H,I,slow_evals,fast_evals"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.split(',').count() == 17));
    // I(0) = 1 for the benchmark start
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first[14].parse::<f64>().unwrap(), 1.0);
    assert!(!csv.contains('\r'));
}

#[test]
fn zero_length_run_is_a_single_row() {
    let o = smgark(&["integrate", "--t-end", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = smgark(&["integrate", "--scheme", "mr-imim2", "--M", "4", "--t-end", "2", "-o", path(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn unknown_scheme_lists_the_available_ones() {
    let o = smgark(&["integrate", "--scheme", "rk45"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    for name in ["mr-lpfr", "mr-imex2", "mr-imim2", "forward-euler", "rk2"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# leapfrog run\nscheme = mr-lpfr\nM = 4\nH = 2^-4\nt_end = 0.5\n").unwrap();
    let o = smgark(&["integrate", "--config", path(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 10);
    let o = smgark(&["integrate", "--config", path(&cfg), "--t-end", "1"]);
    assert_eq!(stdout(&o).lines().count(), 18);
}

#[test]
fn config_errors_report_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "scheme = mr-lpfr\nspeed = 3\n").unwrap();
    let o = smgark(&["integrate", "--config", path(&cfg)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 2, column 1"), "{}", stderr(&o));
}

#[test]
fn failed_steps_report_their_index() {
    // explicit leapfrog far beyond its stability limit
    let o = smgark(&["integrate", "--scheme", "mr-lpfr", "--M", "1", "--H", "0.1", "--t-end", "220"]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("step"), "{err}");
    // rows up to the failure are still written
    assert!(stdout(&o).lines().count() > 2);
}

#[test]
fn convergence_experiment_writes_a_slope_footer() {
    let dir = tempfile::tempdir().unwrap();
    let o = smgark(&[
        "experiment",
        "convergence",
        "--compose",
        "triple-jump",
        "--steps",
        "2^-4,2^-5,2^-6",
        "--t-end",
        "1",
        "--output-dir",
        path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert!(csv.starts_with("H,error\n"));
    assert_eq!(csv.lines().count(), 5);
    let slope: f64 = csv.lines().last().unwrap().strip_prefix("slope,").unwrap().parse().unwrap();
    assert!(slope.is_finite() && slope > 1.0, "{slope}");
}

#[test]
fn energy_experiment_writes_its_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = smgark(&["experiment", "energy", "--t-end", "10", "--output-dir", path(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    assert!(csv.starts_with("t,H,I_1,I_2,I_3,I\n"));
    assert_eq!(csv.lines().count(), 102);
    assert!(stdout(&o).contains("drift slope"));
}

#[test]
fn small_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let o = smgark(&[
        "experiment",
        "sweep",
        "--omegas",
        "50,500",
        "--steps",
        "2^-5,2^-6",
        "--t-end",
        "0.5",
        "--output-dir",
        path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    // two schemes and their compositions, two stiffnesses, two steps
    assert_eq!(csv.lines().count(), 1 + 4 * 2 * 2);
    assert!(csv.contains("mr-imex2+tj4,"));
}

#[test]
fn list_shows_composition_counts() {
    let o = smgark(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("tj   4:3 6:9 8:27 10:81"), "{text}");
    assert!(text.contains("ac*  4:5 6:9 8:17 10:33"), "{text}");
}
