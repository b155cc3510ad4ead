use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gapbound::bounds::BoundKind;
use gapbound::ode::IntegratorConfig;
use gapbound::powermodels::{stator_solve, GeneratorParams};
use gapbound_cli::output::{csv_string, svg_string};
use gapbound_cli::scenario::{constant_scenario, governor_scenario, sine_scenario, Disturbance};
use gapbound_cli::{builtin_scenarios, run_scenario, Scenario};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gapbound"));
    c.env_remove("GAPBOUND_OUT_DIR");
    c
}

fn write_config(dir: &Path, name: &str, cfg: &Scenario) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, cfg.to_json()).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn short(mut cfg: Scenario, horizon: f64) -> Scenario {
    cfg.horizon = horizon;
    cfg
}

#[test]
fn builtin_configs_round_trip() {
    for cfg in builtin_scenarios() {
        let text = cfg.to_json();
        let back = Scenario::from_json(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_json(), text);
    }
}

#[test]
fn malformed_configs_exit_2_with_a_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"name": "x", "model": "generator2", "disturbance": {"kind": "constant", "epsilon": "big"}, "bounds": ["bound1"]}"#, "disturbance"),
        (r#"{"name": "x", "model": "generator2", "disturbance": {"kind": "constant", "epsilon": 0.1}, "bounds": ["bound9"]}"#, "bounds"),
        (r#"{"name": "x", "model": "generator2", "disturbance": {"kind": "constant", "epsilon": 0.1}, "bounds": ["bound1"], "horizon": -1}"#, "horizon"),
        (r#"{"name": "x", "model": "generator2", "disturbance": {"kind": "sine", "magnitude": 0.1, "frequency": "resonant"}, "bounds": ["bound1"]}"#, "bounds"),
        (r#"{"name": "x", "model": "generator2", "disturbance": {"kind": "constant", "epsilon": 0.1}, "bounds": ["bound1"], "params": {"generator": {"Q": 1}}}"#, "params.generator"),
        ("{\"name\": \"x\",\n \"model\": ", "line 2"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let p = dir.path().join(format!("bad{i}.json"));
        std::fs::write(&p, text).unwrap();
        for sub in ["validate", "run"] {
            let mut c = bin();
            c.arg(sub).arg("--config").arg(&p);
            if sub == "run" {
                c.arg("--out").arg(dir.path());
            }
            let o = c.output().unwrap();
            assert_eq!(code(&o), 2, "{sub} case {i}: {}", stderr(&o));
            assert!(stderr(&o).contains(needle), "case {i}: {}", stderr(&o));
        }
    }
    let o = bin().args(["validate", "--config"]).arg(dir.path().join("missing.json")).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn validate_accepts_builtins() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in builtin_scenarios() {
        let p = write_config(dir.path(), "c.json", &cfg);
        let o = bin().args(["validate", "--config"]).arg(&p).output().unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(String::from_utf8_lossy(&o.stdout).contains(&cfg.name));
    }
}

#[test]
fn run_writes_one_row_per_grid_time() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = short(constant_scenario(), 3.0);
    cfg.grid_step = 0.007;
    let p = write_config(dir.path(), "c.json", &cfg);
    let out = dir.path().join("out");
    let o = bin().args(["run", "--svg", "--seed", "7", "--config"]).arg(&p).arg("--out").arg(&out).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("constant.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len() - 1, (3.0f64 / 0.007).floor() as usize + 1);
    assert!(!csv.contains('\r'));
    let header: Vec<&str> = lines[0].split(',').collect();
    assert_eq!(&header[..3], &["t", "gap_delta", "gap_omega"]);
    assert_eq!(&header[3..7], &["bound1_lower_delta", "bound1_upper_delta", "bound1_lower_omega", "bound1_upper_omega"]);
    assert_eq!(header.len(), 3 + 4 * cfg.bounds.len());
    // 17 significant digits
    let first = lines[1].split(',').nth(1).unwrap();
    assert_eq!(first.split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == header.len()));
    assert!(out.join("constant.svg").exists());
    let summary = std::fs::read_to_string(out.join("constant.summary.json")).unwrap();
    assert!(summary.contains("\"seed\": 7") && summary.contains("\"version\""));
}

#[test]
fn zero_disturbance_has_zero_gap() {
    let mut cfg = short(constant_scenario(), 5.0);
    cfg.disturbance = Disturbance::Constant { epsilon: 0.0 };
    let r = run_scenario(&cfg).unwrap();
    assert!(r.gap.iter().all(|g| g[0].abs() <= 1e-9 && g[1].abs() <= 1e-9));
    assert!(r.bounds.iter().all(|b| b.radius.iter().all(|v| *v == 0.0)));
}

#[test]
fn fixed_step_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = short(constant_scenario(), 4.0);
    cfg.integrator = IntegratorConfig::fixed(0.001);
    let p = write_config(dir.path(), "c.json", &cfg);
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("o{i}"));
        let o = bin().args(["run", "--config"]).arg(&p).arg("--out").arg(&out).output().unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        outputs.push(std::fs::read(out.join("constant.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

fn polylines(doc: &roxmltree::Document) -> Vec<(String, Vec<(f64, f64)>)> {
    doc.descendants()
        .filter(|n| n.has_tag_name("polyline"))
        .map(|n| {
            let pts = n
                .attribute("points")
                .unwrap()
                .split(' ')
                .map(|p| {
                    let (x, y) = p.split_once(',').unwrap();
                    (x.parse().unwrap(), y.parse().unwrap())
                })
                .collect();
            (n.attribute("class").unwrap().to_string(), pts)
        })
        .collect()
}

#[test]
fn svg_is_well_formed_and_brackets_contained_gaps() {
    let r = run_scenario(&short(sine_scenario(), 8.0)).unwrap();
    assert!(r.contained(0) && r.contained(1));
    let svg = svg_string(&r);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.root_element().attribute("version"), Some("1.1"));
    let lines = polylines(&doc);
    // gap, lower, upper per panel
    assert_eq!(lines.len(), 6);
    assert!(lines.iter().all(|(_, p)| p.len() == r.grid.len()));
    for panel in lines.chunks(3) {
        let find = |c: &str| &panel.iter().find(|(n, _)| n == c).unwrap().1;
        let (lo, hi, gap) = (find("theorem2-lower"), find("theorem2-upper"), find("gap"));
        for i in 0..gap.len() {
            // pixel y grows downwards; allow the 4-decimal rounding
            assert!(lo[i].1 + 1e-3 >= gap[i].1 && gap[i].1 + 1e-3 >= hi[i].1, "i={i}");
        }
    }
    let text = svg.as_str();
    assert!(text.contains("t (s)") && text.contains("δ gap (rad)") && text.contains("ω gap (p.u.)"));
}

#[test]
fn csv_matches_the_report() {
    let r = run_scenario(&short(governor_scenario(), 6.0)).unwrap();
    let csv = csv_string(&r);
    let row: Vec<f64> = csv.lines().nth(101).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], r.grid[100]);
    assert_eq!(row[1], r.gap[100][0]);
    let b = r.bound(BoundKind::Theorem2).unwrap();
    assert_eq!((row[3], row[4]), (b.lower(100, 0), b.upper(100, 0)));
}

#[test]
fn paper_figs_writes_three_plots() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().arg("paper-figs").env("GAPBOUND_OUT_DIR", dir.path()).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let count = |ext: &str| {
        std::fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(ext))
            .count()
    };
    assert_eq!(count(".csv"), 3);
    assert_eq!(count(".svg"), 3);
    let stdout = String::from_utf8_lossy(&o.stdout);
    for name in ["constant", "sine", "governor"] {
        assert!(stdout.contains(name));
    }
}

#[test]
fn assert_containment_sets_exit_4_on_violation() {
    let dir = tempfile::tempdir().unwrap();
    let sine = write_config(dir.path(), "s.json", &sine_scenario());
    let o = bin().args(["run", "--assert-containment", "--config"]).arg(&sine).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    // the δ gap settles a second-order amount away from the linear prediction,
    // where the bound1 radius has already decayed to zero
    let constant = write_config(dir.path(), "c.json", &constant_scenario());
    let o = bin().args(["run", "--assert-containment", "--config"]).arg(&constant).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("NOT contained"));
}

#[test]
fn unstable_operating_point_exits_3() {
    let p = GeneratorParams::default();
    // the unstable root of P_e(δ) = P_m, where dP_e/dδ < 0
    let f = |d: f64| stator_solve(d, &p).unwrap().pe - p.pm;
    let peak = (0..=2000).map(|i| -std::f64::consts::PI + i as f64 * std::f64::consts::PI / 1000.0).fold(0.0, |b: f64, d| {
        if stator_solve(d, &p).unwrap().pe > stator_solve(b, &p).unwrap().pe {
            d
        } else {
            b
        }
    });
    let (mut lo, mut hi) = (peak, peak + 2.0);
    assert!(f(lo) > 0.0 && f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut cfg = short(constant_scenario(), 2.0);
    cfg.x0 = [0.5 * (lo + hi), 1.0];
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "u.json", &cfg);
    let o = bin().args(["run", "--config"]).arg(&path).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("Hurwitz"), "{}", stderr(&o));
}

#[test]
fn out_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "c.json", &short(constant_scenario(), 6.0));
    let out = dir.path().join("env-out");
    let o = bin().args(["run", "--config"]).arg(&p).env("GAPBOUND_OUT_DIR", &out).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(out.join("constant.csv").exists());
    let o = bin().args(["run", "--config"]).arg(&p).output().unwrap();
    assert_eq!(code(&o), 2);
}
