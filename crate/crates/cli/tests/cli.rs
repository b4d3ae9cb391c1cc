use std::path::Path;
use std::process::Command;

fn stadapt(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_stadapt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn greedy_time_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.cfg",
        "field.name = time-power\nfield.params = 0.25\n\
         sweep.start = 0.05\nsweep.stop = 0.0005\nsweep.points = 5\n",
    );
    let out = dir.path().join("out");
    let o = stadapt(&["greedy-time", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 9);
    assert_eq!(report["mode"], "greedy-time");
    assert!(out.join("curve_adaptive.dat").exists());
    assert!(out.join("curve_uniform.dat").exists());
}

#[test]
fn identical_runs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "r.cfg",
        "field.name = tensor-singular\nfield.params = 0.25\nr2 = 2\n\
         sweep.start = 0.25\nsweep.stop = 0.03125\nsweep.points = 4\n",
    );
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("o{k}"));
        let o = stadapt(&["greedy-st", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
        let stripped: Vec<String> = csv
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect();
        outputs.push((stripped, std::fs::read(out.join("report.json")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "b.cfg", "field.name = nope\nsweep.start = 1\nsweep.stop = 2\nsweep.points = 4\n");
    assert_eq!(stadapt(&["moduli", "--config", &bad]).status.code(), Some(2));
    let missing = dir.path().join("missing.cfg");
    assert_eq!(stadapt(&["moduli", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
    let wrong_mode = write(
        dir.path(),
        "w.cfg",
        "mode = besov\nfield.name = constant\nfield.params = 1\nsweep.start = 1\nsweep.stop = 2\nsweep.points = 4\n",
    );
    assert_eq!(stadapt(&["moduli", "--config", &wrong_mode]).status.code(), Some(2));
    assert_eq!(stadapt(&["moduli"]).status.code(), Some(2));
}

#[test]
fn refinement_caps_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    // A jump cannot be resolved to 1e-12 within the level cap.
    let samples = "t,x,value\n0,0,0\n0,1,0\n0.3,0,0\n0.3,1,0\n0.30000001,0,1\n0.30000001,1,1\n1,0,1\n1,1,1\n";
    let csv = write(dir.path(), "jump.csv", samples);
    let cfg = write(
        dir.path(),
        "c.cfg",
        &format!("field.name = csv\nfield.path = {csv}\nsweep.start = 1e-10\nsweep.stop = 1e-12\nsweep.points = 4\n"),
    );
    let o = stadapt(&["greedy-time", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
