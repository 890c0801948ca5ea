use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_panelconv")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_file(dir: &Path) -> String {
    let mut csv = String::from("region,year,sector,output_per_worker,employment,capital_output_ratio,flat\n");
    for (r, region) in ["Norte", "Centro", "Lisboa", "Alentejo", "Algarve"].iter().enumerate() {
        for y in 1995..=1999 {
            for (s, sector) in ["agriculture", "industry", "services"].iter().enumerate() {
                let i = (r * 31 + (y as usize - 1995) * 7 + s * 13) % 17;
                let p = 5000.0 + 900.0 * r as f64 + 120.0 * i as f64 + 40.0 * (y - 1995) as f64;
                let e = 10_000.0 + 1_500.0 * ((r + 2 * s + i) % 9) as f64;
                let k = 1.5 + 0.1 * ((i * 5) % 11) as f64;
                csv.push_str(&format!("{region},{y},{sector},{p},{e},{k},1\n"));
            }
        }
    }
    let path = dir.join("panel.csv");
    std::fs::write(&path, csv).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(dir.path());

    let usage = run(&["fit", "--input", &input, "--sector", "industry", "--bogus"]);
    assert_eq!(usage.status.code(), Some(1));
    assert_eq!(run(&[]).status.code(), Some(1));

    let missing = run(&["fit", "--input", &input, "--sector", "missing"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("empty selection"));

    let no_file = run(&["sigma", "--input", "/nonexistent/panel.csv", "--sector", "industry"]);
    assert_eq!(no_file.status.code(), Some(2));

    // a constant regressor duplicates the intercept
    let collinear = run(&["fit", "--input", &input, "--sector", "industry", "--method", "pooled", "--conditional", "flat"]);
    assert_eq!(collinear.status.code(), Some(3), "{}", String::from_utf8_lossy(&collinear.stderr));
    let stderr = String::from_utf8_lossy(&collinear.stderr);
    assert_eq!(stderr.lines().count(), 1, "{stderr}");

    let bad_sim = run(&["simulate", "--seed", "1", "--regions", "1", "--periods", "9", "--b-true", "-0.3"]);
    assert_eq!(bad_sim.status.code(), Some(2));
}

#[test]
fn json_output_parses_for_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(dir.path());
    let base = ["--input", input.as_str(), "--sector", "industry", "--format", "json"];
    let parse = |text: String| serde_json::from_str::<serde_json::Value>(&text).unwrap();

    let fit = parse(stdout(&[&["fit"], &base[..], &["--conditional", "capital_output,lq"]].concat()));
    let rows = fit["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        for key in ["method", "estimates", "tc", "dw", "r2", "df"] {
            assert!(row.get(key).is_some(), "missing {key} in {row}");
        }
        let b = &row["estimates"]["Coef.1"];
        assert!(b["value"].is_f64() && b["t"].is_f64() && b["stars"].is_string());
    }
    assert_eq!(rows.iter().map(|r| r["df"].as_u64().unwrap()).collect::<Vec<_>>(), [16, 12, 16]);
    assert!(fit["spec"].is_object());

    let sigma = parse(stdout(&[&["sigma"], &base[..]].concat()));
    assert_eq!(sigma["points"].as_array().unwrap().len(), 5);

    let lq = parse(stdout(&[&["lq"], &base[..]].concat()));
    assert_eq!(lq["entries"].as_array().unwrap().len(), 25);

    let recover = parse(stdout(&[
        "recover", "--seed", "3", "--regions", "5", "--periods", "9", "--b-true", "-0.3", "--reps", "20", "--format",
        "json",
    ]));
    assert_eq!(recover["methods"].as_array().unwrap().len(), 3);
}

#[test]
fn markdown_table_layout() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(dir.path());
    let md = stdout(&["fit", "--input", &input, "--sector", "services"]);
    assert!(md.starts_with("### services"), "{md}");
    let header = md.lines().find(|l| l.starts_with("| Method")).unwrap();
    for col in ["Const.", "D1", "D5", "Coef.1", "T.C.", "DW", "R²", "G.L."] {
        assert!(header.contains(col), "{header}");
    }
    let lsdv = md.lines().find(|l| l.starts_with("| LSDV")).unwrap();
    let const_cell = lsdv.split('|').nth(2).unwrap().trim();
    assert!(const_cell.is_empty(), "{lsdv}");
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(dir.path());
    for args in [
        vec!["fit", "--input", &input, "--sector", "agriculture", "--format", "tsv"],
        vec!["sigma", "--input", &input, "--sector", "agriculture"],
        vec!["lq", "--input", &input, "--sector", "agriculture", "--from", "1996"],
        vec!["simulate", "--seed", "9", "--regions", "4", "--periods", "6", "--b-true", "-0.2"],
        vec!["recover", "--seed", "9", "--regions", "4", "--periods", "6", "--b-true", "-0.2", "--reps", "30"],
    ] {
        assert_eq!(stdout(&args), stdout(&args), "{args:?}");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    let printed = stdout(&["simulate", "--seed", "4", "--regions", "3", "--periods", "4", "--b-true", "-0.1"]);
    stdout(&["simulate", "--seed", "4", "--regions", "3", "--periods", "4", "--b-true", "-0.1", "--out", out.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), printed);
}
