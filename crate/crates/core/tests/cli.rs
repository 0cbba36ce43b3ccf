use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const MODEL: &str = "[model]\nalpha = 10.0\nb_field = 0.5\ngamma_coll = 0.05\n";

struct Csv {
    scalars: HashMap<String, String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn read(path: &Path) -> Csv {
        let text = std::fs::read_to_string(path).unwrap();
        let mut scalars = HashMap::new();
        let mut lines = text.lines();
        let mut columns = Vec::new();
        for line in lines.by_ref() {
            match line.strip_prefix("# ") {
                Some(rest) => {
                    let (k, v) = rest.split_once(": ").unwrap_or((rest, ""));
                    scalars.insert(k.to_string(), v.to_string());
                }
                None => {
                    columns = line.split(',').map(String::from).collect();
                    break;
                }
            }
        }
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Csv { scalars, columns, rows }
    }

    fn scalar(&self, key: &str) -> f64 {
        self.scalars[key].parse().unwrap()
    }

    fn column(&self, name: &str) -> Vec<f64> {
        let j = self.columns.iter().position(|c| c == name).unwrap();
        self.rows.iter().map(|r| r[j].parse().unwrap()).collect()
    }
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

fn trispin(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trispin"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn error_json(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("error.json")).unwrap()).unwrap()
}

#[test]
fn invalid_configs_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (format!("{MODEL}nbar = -1.0\n[ensemble]\nmaster_seed = 1\n"), "nbar"),
        (
            "[model]\nalpha = 10.0\nb_field = 0.5\ngama_coll = 0.05\n[ensemble]\nmaster_seed = 1\n"
                .to_string(),
            "gama_coll",
        ),
        (MODEL.to_string(), "master_seed"),
    ];
    for (i, (body, field)) in cases.iter().enumerate() {
        let out = tmp.path().join(format!("out{i}"));
        let cfg = write_config(tmp.path(), body);
        let res = trispin(&["spectrum"], &cfg, &out);
        assert_eq!(res.status.code(), Some(2), "{}", String::from_utf8_lossy(&res.stderr));
        let record = error_json(&out);
        assert_eq!(record["exit_code"], 2);
        assert_eq!(record["command"], "spectrum");
        assert!(record["message"].as_str().unwrap().contains(field), "{record}");
        let stderr = String::from_utf8_lossy(&res.stderr);
        assert!(stderr.contains(field));
    }
}

#[test]
fn missing_config_file_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let res = trispin(&["dark"], &tmp.path().join("absent.toml"), tmp.path());
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn spectrum_reports_both_kinks_at_finite_temperature() {
    let tmp = tempfile::tempdir().unwrap();
    let body = format!("{MODEL}nbar = 5.0\n[scan]\nn_points = 41\n[ensemble]\nmaster_seed = 3\n");
    let cfg = write_config(tmp.path(), &body);
    let out = tmp.path().join("spec");
    let res = trispin(&["spectrum"], &cfg, &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let spectrum = Csv::read(&out.join("spectrum.csv"));
    assert_eq!(spectrum.columns, ["s", "theta", "activity"]);
    assert_eq!(spectrum.rows.len(), 41);
    assert_eq!(spectrum.scalars["master_seed"], "3");
    assert_eq!(spectrum.scalars["convention"], "unhalved");
    assert_eq!(spectrum.scalars["config_sha256"].len(), 64);
    assert!(spectrum.scalars.contains_key(&format!("trispin {}", env!("CARGO_PKG_VERSION"))));
    let s0 = 1.2f64.ln();
    assert!((spectrum.scalar("s0") - s0).abs() < 1e-12);
    assert!(spectrum.scalar("gc_residual") < 1e-10);

    let kinks = Csv::read(&out.join("kinks.csv"));
    let s_star = kinks.column("s_star");
    assert_eq!(s_star.len(), 2, "{s_star:?}");
    assert!(s_star[0].abs() < 1e-6);
    assert!((s_star[1] - s0).abs() < 1e-6);
}

#[test]
fn dark_dimension_matches_trapped_fraction() {
    let tmp = tempfile::tempdir().unwrap();
    let body = format!("{MODEL}[ensemble]\nmaster_seed = 8\nn_trajectories = 400\nn_jumps = 200\n");
    let cfg = write_config(tmp.path(), &body);
    let out = tmp.path().join("o");

    let res = trispin(&["dark"], &cfg, &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let dark = Csv::read(&out.join("dark.csv"));
    let dim = dark.scalar("dimension");
    assert_eq!(dark.rows.len(), dim as usize);

    let res = trispin(&["trajectories"], &cfg, &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let acts = Csv::read(&out.join("activities.csv"));
    assert_eq!(acts.scalar("n_trajectories"), 400.0);
    let zero = acts.scalar("zero_fraction");
    // Haar initial states fall into the dark subspace with probability dim/8
    let expected = dim / 8.0;
    let se = (expected * (1.0 - expected) / 400.0).sqrt();
    assert!((zero - expected).abs() < 3.0 * se, "{zero} vs {expected}");
    for name in ["histogram.csv", "events.csv", "blinking.csv"] {
        assert!(out.join(name).exists(), "{name}");
    }
}

#[test]
fn output_is_independent_of_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let body = format!("{MODEL}nbar = 1.0\n[ensemble]\nmaster_seed = 21\nn_trajectories = 16\nn_jumps = 100\n");
    let cfg = write_config(tmp.path(), &body);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(trispin(&["trajectories", "--workers", "1"], &cfg, &a).status.success());
    assert!(trispin(&["trajectories", "--workers", "3"], &cfg, &b).status.success());
    for name in ["activities.csv", "events.csv"] {
        let x = std::fs::read_to_string(a.join(name)).unwrap();
        let y = std::fs::read_to_string(b.join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn seed_override_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), MODEL);
    let out = tmp.path().join("o");
    let res = trispin(&["dark", "--seed", "77"], &cfg, &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(Csv::read(&out.join("dark.csv")).scalars["master_seed"], "77");
}
