use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn slvw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slvw")).args(args).output().expect("spawn slvw")
}

fn template(study: &str, dir: &Path) -> PathBuf {
    let out = slvw(&["template", study]);
    assert!(out.status.success());
    let p = dir.join(format!("{study}.toml"));
    std::fs::write(&p, out.stdout).unwrap();
    p
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const STUDIES: [&str; 6] = ["fields-audit", "oam-transfer", "dichroism", "rvb-spectra", "streak", "reconstruct"];

#[test]
fn every_template_validates() {
    let dir = tempfile::tempdir().unwrap();
    for s in STUDIES {
        let p = template(s, dir.path());
        let o = slvw(&["validate", "--config", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{s}: {}", stderr(&o));
        assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "ok");
    }
}

#[test]
fn fields_audit_passes_its_gates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = template("fields-audit", dir.path());
    let out = dir.path().join("out");
    let o = slvw(&["fields-audit", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("fields-audit.csv")).unwrap();
    assert!(csv.starts_with("beam_index,x_au,y_au,z_au,t_au,divergence_rel,gradient_rel\n"));
    assert_eq!(csv.lines().count(), 1 + 6 * 64);
    let m = manifest(&out);
    let gates = m["gates"].as_array().unwrap();
    assert_eq!(gates.len(), 12);
    assert!(gates.iter().all(|g| g["passed"] == true));
    assert!(m["artifacts"][0]["sha256"].as_str().unwrap().len() == 64);
}

#[test]
fn missing_laser_frequency_is_a_field_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "c.toml",
        "study = \"fields-audit\"\n[[beam]]\nkind = \"radial\"\namplitude = 0.1\nfocus_angle = \"28 deg\"\n",
    );
    let o = slvw(&["fields-audit", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("beam[0].photon_energy: required"), "{}", stderr(&o));
}

#[test]
fn dispersion_and_class_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "d.toml",
        "study = \"fields-audit\"\n[[beam]]\nkind = \"radial\"\nphoton_energy = 0.057\namplitude = 0.1\nq_perp = 2e-4\nq_z = 3e-4\n",
    );
    let o = slvw(&["validate", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dispersion invariant"));

    let p = write(
        dir.path(),
        "s.toml",
        "study = \"fields-audit\"\n[[beam]]\nkind = \"vortex-parallel\"\nphoton_energy = \"1.55 eV\"\namplitude = 0.1\nfocus_angle = \"30 deg\"\nm = 2\nsigma = -1\n",
    );
    let o = slvw(&["validate", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("parallel-class constraint"));
}

#[test]
fn unknown_keys_and_units_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "u.toml", "study = \"fields-audit\"\nbogus = 1\n");
    assert_eq!(slvw(&["validate", "--config", p.to_str().unwrap()]).status.code(), Some(2));
    let p = write(
        dir.path(),
        "v.toml",
        "study = \"fields-audit\"\n[[beam]]\nkind = \"radial\"\nphoton_energy = \"1.55 furlong\"\namplitude = 0.1\nfocus_angle = \"28 deg\"\n",
    );
    let o = slvw(&["validate", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("beam[0].photon_energy"));
}

#[test]
fn study_mismatch_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = template("fields-audit", dir.path());
    let o = slvw(&["streak", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = slvw(&["validate", "--config", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    // output "directory" is an existing file
    let blocker = write(dir.path(), "blocker", "");
    let o = slvw(&["fields-audit", "--config", cfg.to_str().unwrap(), "--output", blocker.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn failed_gate_exits_with_numeric_status() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(template("fields-audit", dir.path())).unwrap();
    let p = write(dir.path(), "t.toml", &format!("{text}\n[tolerance]\ngradient = 1e-14\n"));
    let out = dir.path().join("o");
    let o = slvw(&["fields-audit", "--config", p.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(manifest(&out)["gates"].as_array().unwrap().iter().any(|g| g["passed"] == false));
}

#[test]
fn streak_outputs_are_deterministic_and_feed_reconstruction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = template("streak", dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for o in [&a, &b] {
        let r = slvw(&["streak", "--config", cfg.to_str().unwrap(), "--output", o.to_str().unwrap(), "--plot"]);
        assert_eq!(r.status.code(), Some(0), "{}", stderr(&r));
    }
    for f in ["streak.csv", "spectrogram.csv", "plot.py"] {
        assert!(std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let strip = |d: &Path| {
        let mut m = manifest(d);
        m["config"]["output_dir"] = serde_json::Value::Null;
        m
    };
    assert_eq!(strip(&a), strip(&b));
    let text = std::fs::read_to_string(template("reconstruct", dir.path())).unwrap();
    // same azimuth count as the streak run
    let p = write(dir.path(), "r.toml", &text.replace("azimuths = 12", "azimuths = 8"));
    let out = dir.path().join("r");
    let r = slvw(&[
        "reconstruct",
        "--config",
        p.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
        "--scans",
        a.join("streak.csv").to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(0), "{}", stderr(&r));
    let rec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("reconstruction.json")).unwrap()).unwrap();
    assert_eq!(rec["samples"].as_array().unwrap().len(), 8);
}

#[test]
fn manifest_echoes_inputs_in_atomic_units() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = template("reconstruct", dir.path());
    let out = dir.path().join("o");
    let r = slvw(&["reconstruct", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", stderr(&r));
    let m = manifest(&out);
    let c = &m["config"];
    let ev = 1.0 / 27.211386245988;
    assert!((c["xuv"]["omega"].as_f64().unwrap() - 60.0 * ev).abs() < 1e-12);
    assert!((c["beams"][0]["spec"]["omega"].as_f64().unwrap() - 1.55 * ev).abs() < 1e-12);
    assert!((c["beams"][0]["spec"]["a0"].as_f64().unwrap() - 0.0126).abs() < 1e-15);
    let w = c["xuv"]["spot"]["width"].as_f64().unwrap();
    assert!((w - 2.4e-6 / 5.29177210903e-11).abs() < 1e-6 * w);
    assert!(c["beams"][0]["spec"]["q_perp"].as_f64().unwrap() > 0.0);
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert!(m["gates"][0]["passed"] == true);
}

#[test]
fn oam_transfer_reproduces_curve_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = template("oam-transfer", dir.path());
    let out = dir.path().join("o");
    let r = slvw(&["oam-transfer", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", stderr(&r));
    let mut rd = csv::Reader::from_path(out.join("oam-transfer.csv")).unwrap();
    let rows: Vec<Vec<f64>> = rd.records().map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect();
    let lz = |beam: f64| rows.iter().filter(|r| r[0] == beam).map(|r| r[6]).collect::<Vec<_>>();
    // antiparallel m = -1 climbs from near 1 towards 2, parallel m = 1 sits at 2
    let anti = lz(1.0);
    assert!(anti.windows(2).all(|w| w[1] > w[0]));
    assert!((anti[2] - 2.0).abs() < 0.01);
    assert!(lz(0.0).iter().all(|v| (v - 2.0).abs() < 0.01));
}
