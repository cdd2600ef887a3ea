use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qclab(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qclab"));
    cmd.args(args).env_remove("QCLAB_WORKERS");
    if let Some(w) = workers {
        cmd.env("QCLAB_WORKERS", w);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, out: &Path, body: &str) -> String {
    let path = dir.join(name);
    let text = format!(
        "seed = 11\noutput = {:?}\n{body}",
        out.display().to_string()
    );
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

/// Upper normal quantile: Simpson's rule on the density, then bisection.
fn normal_upper_quantile(p: f64) -> f64 {
    let tail = |t: f64| {
        let (a, b, n) = (t, t + 12.0, 20_000);
        let h = (b - a) / n as f64;
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let (mut lo, mut hi) = (0.0, 10.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn tau_matches_quoted_range_and_normal_quantile() {
    let out = qclab(&["tau", "--delta", "0.01", "--d", "500"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((2.2..=2.4).contains(&row[2]), "{text}");

    let out = qclab(
        &[
            "tau", "--delta", "0.01", "--d", "500", "--model", "gaussian",
        ],
        None,
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let scaled: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!(
        (scaled - normal_upper_quantile(0.01)).abs() < 1e-6,
        "{scaled}"
    );

    let out = qclab(&["tau", "--delta", "0.5", "--d", "30"], None);
    let text = String::from_utf8(out.stdout).unwrap();
    let tau: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(tau.abs() < 1e-12);
}

#[test]
fn domain_and_config_errors_exit_2() {
    assert_eq!(
        qclab(&["tau", "--delta", "1.5", "--d", "10"], None)
            .status
            .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write_config(
        dir.path(),
        "bad.toml",
        &out,
        "[experiment]\nkind = \"tau\"\ndelta = 0.1\nd = [5]\ncolour = \"red\"\n",
    );
    let res = qclab(&["run", &cfg], None);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8(res.stderr).unwrap();
    assert!(err.contains("line") && err.contains("colour"), "{err}");
    assert!(!out.exists());

    let cfg = write_config(
        dir.path(),
        "ok.toml",
        &out,
        "[experiment]\nkind = \"tau\"\ndelta = 0.1\nd = [5]\n",
    );
    assert_eq!(qclab(&["run", &cfg], Some("zero")).status.code(), Some(2));
}

#[test]
fn boundary_dump_rows_are_valid_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let s = p.display().to_string();
        let args = [
            "boundary-dump",
            "--m",
            "20",
            "--z",
            "2",
            "--seed",
            "4",
            "--resolution",
            "30",
            "--output",
            &s,
        ];
        assert!(qclab(&args, None).status.success());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,label,in_error_set"));
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let (x, y): (f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        assert!((0.0..=20.0).contains(&x) && (0.0..=2.0).contains(&y));
        assert!(f[2] == "1" || f[2] == "-1");
        let truth = if y < 1.0 { "-1" } else { "1" };
        assert_eq!(f[3] == "true", f[2] != truth, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 900);

    let s = a.display().to_string();
    let args = [
        "boundary-dump",
        "--m",
        "20",
        "--z",
        "2",
        "--resolution",
        "5",
        "--output",
        &s,
    ];
    assert_eq!(qclab(&args, None).status.code(), Some(2));
}

fn results_of(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "run.meta.json")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        (
            "qc",
            "[experiment]\nkind = \"qc-curve\"\nalpha = 0.5\nkappa = 0.2\nbudgets = [2, 6]\ntrials = 6\nmc_samples = 2000\n\
             [experiment.learner]\nkind = \"one-nn\"\nm = 40.0\nz = 2.0\n[experiment.adversary]\nkind = \"line-search\"\n",
        ),
        (
            "emulate",
            "[experiment]\nkind = \"emulate\"\nd = 30\ndelta = 0.02\nk = 2\ninner_s = 60\ntrials = 4\nmc_samples = 1000\n",
        ),
        (
            "defense",
            "[experiment]\nkind = \"defense-eval\"\nd = 10\ndelta = 0.05\nside = 0.3\ndisplacements = [0.05, 0.2]\n\
             points = 20\nshifts = 6\nmc_samples = 500\n",
        ),
    ];
    for (name, body) in configs {
        let mut runs = Vec::new();
        for (i, w) in ["1", "3", "1"].iter().enumerate() {
            let out = dir.path().join(format!("{name}{i}"));
            let cfg = write_config(dir.path(), &format!("{name}{i}.toml"), &out, body);
            let res = qclab(&["run", &cfg], Some(w));
            assert!(
                res.status.success(),
                "{}",
                String::from_utf8_lossy(&res.stderr)
            );
            assert!(out.join("run.meta.json").exists());
            runs.push(results_of(&out));
        }
        // the echoed output path differs between runs
        let strip = |files: &[(String, Vec<u8>)]| -> Vec<(String, Vec<u8>)> {
            files
                .iter()
                .filter(|(n, _)| n != "report.json")
                .cloned()
                .collect()
        };
        assert_eq!(strip(&runs[0]), strip(&runs[1]), "{name}");
        assert_eq!(runs[0].len(), runs[1].len());
        assert!(runs[0].len() >= 2);
    }
}

#[test]
fn same_config_file_gives_identical_outputs_including_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write_config(
        dir.path(),
        "c.toml",
        &out,
        "workers = 2\n[experiment]\nkind = \"two-intervals\"\nm = 60.0\nz = 3.0\ndatasets = 2\n",
    );
    assert!(qclab(&["run", &cfg], None).status.success());
    let first = results_of(&out);
    assert!(qclab(&["run", &cfg], Some("1")).status.success());
    assert_eq!(first, results_of(&out));

    let report: serde_json::Value =
        serde_json::from_slice(&first.iter().find(|(n, _)| n == "report.json").unwrap().1).unwrap();
    assert_eq!(report["config"]["experiment"]["kind"], "two-intervals");
    assert_eq!(report["config"]["seed"], 11);
    assert_eq!(report["config"]["workers"], 2);
    assert!(report["config"]["experiment"].get("grid_step").is_some());
}

#[test]
fn qc_summary_json_has_one_entry_per_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write_config(
        dir.path(),
        "c.toml",
        &out,
        "[experiment]\nkind = \"cap-attack\"\nd = 20\ndelta = 0.05\ns = 40\ntrials = 5\nmc_samples = 1000\n",
    );
    let res = qclab(&["run", &cfg], None);
    assert!(res.status.success());
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    let entry = summary["80"].as_array().unwrap();
    assert_eq!(entry.len(), 3);
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("budget,trial,queries_used,ar_p,ar_opt,success")
    );
    assert_eq!(csv.lines().count(), 6);
}
