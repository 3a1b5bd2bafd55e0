use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use tempfile::TempDir;

use smimc::cli::{DecompositionFile, SeriesFile};
use smimc::densela::{from_real_rows, identity, zeros};
use smimc::polymat::LaurentMatrix;

fn smimc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smimc"))
        .args(args)
        .env_remove("SMIMC_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn origin() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn write_series(dir: &TempDir, name: &str, m: &LaurentMatrix) -> PathBuf {
    let path = dir.path().join(name);
    let text = serde_json::to_string_pretty(&SeriesFile::from_matrix(m)).unwrap();
    std::fs::write(&path, text).unwrap();
    path
}

fn diag_013() -> LaurentMatrix {
    let e = |k: usize| {
        let mut c = zeros(3, 3);
        c[(k, k)] = Complex64::new(1.0, 0.0);
        c
    };
    LaurentMatrix::polynomial(origin(), vec![e(0), e(1), zeros(3, 3), e(2)]).unwrap()
}

fn pole_diag() -> LaurentMatrix {
    LaurentMatrix::new(
        origin(),
        -1,
        vec![
            from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            zeros(2, 2),
            from_real_rows(2, 2, &[0.0, 0.0, 0.0, 1.0]),
        ],
        true,
    )
    .unwrap()
}

fn jordan() -> LaurentMatrix {
    LaurentMatrix::polynomial(
        origin(),
        vec![from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]), identity(2)],
    )
    .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn analyze_prints_the_indices() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("diag.json", diag_013(), "sigma: 0 1 3"),
        (
            "id.json",
            LaurentMatrix::constant(origin(), identity(2)),
            "sigma: 0 0",
        ),
        ("pole.json", pole_diag(), "sigma: -1 1"),
    ];
    for (name, m, expected) in cases {
        let path = write_series(&dir, name, &m);
        let o = smimc(&["analyze", p(&path)]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        assert!(
            stdout(&o).lines().any(|l| l == expected),
            "{name}: {}",
            stdout(&o)
        );
        let o = smimc(&["oracle", p(&path)]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        assert!(
            stdout(&o).lines().any(|l| l == expected),
            "{name}: {}",
            stdout(&o)
        );
    }
    let id = write_series(
        &dir,
        "id3.json",
        &LaurentMatrix::constant(origin(), identity(3)),
    );
    assert!(stdout(&smimc(&["analyze", p(&id)])).contains("d': 0\n"));
}

#[test]
fn oracle_prints_the_rank_table() {
    let dir = TempDir::new().unwrap();
    let path = write_series(&dir, "jordan.json", &jordan());
    let o = smimc(&["oracle", p(&path)]);
    assert!(o.status.success());
    let out = stdout(&o);
    let ranks: Vec<usize> = out
        .lines()
        .skip(1)
        .take(3)
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ranks, vec![1, 2, 4]);
    assert!(out.contains("sigma: 0 2\n"));
}

#[test]
fn oracle_rejects_the_zero_function() {
    let dir = TempDir::new().unwrap();
    let path = write_series(&dir, "zero.json", &LaurentMatrix::zero(2, 2, origin()));
    let o = smimc(&["oracle", p(&path)]);
    assert_eq!(o.status.code(), Some(10));
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).contains("EmptyProfile"));
}

#[test]
fn analyze_then_verify_passes() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("inst.json");
    let o = smimc(&[
        "gen",
        "--preset",
        "table1",
        "--param",
        "3",
        "--seed",
        "7",
        "-o",
        p(&input),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("sigma: 0 1 3"));
    let decomp = dir.path().join("dec.json");
    let o = smimc(&["analyze", p(&input), "--emit-full-n", "-o", p(&decomp)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("sigma: 0 1 3"));
    let o = smimc(&["verify", "--input", p(&input), "--decomp", p(&decomp)]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert_eq!(stdout(&o).matches("PASS").count(), 5);
}

#[test]
fn verify_catches_a_corrupted_factor() {
    let dir = TempDir::new().unwrap();
    let input = write_series(&dir, "diag.json", &diag_013());
    let decomp = dir.path().join("dec.json");
    assert!(smimc(&["analyze", p(&input), "-o", p(&decomp)])
        .status
        .success());
    let mut file = DecompositionFile::read(&decomp).unwrap();
    file.nr.coeffs[0].re[0][0] += 1e-2;
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&file).unwrap()).unwrap();
    let o = smimc(&["verify", "--input", p(&input), "--decomp", p(&bad)]);
    assert_eq!(o.status.code(), Some(9));
    assert!(stderr(&o).contains("FAIL residual"), "{}", stderr(&o));
}

#[test]
fn verify_reports_unsorted_indices() {
    let dir = TempDir::new().unwrap();
    let input = write_series(&dir, "diag.json", &diag_013());
    let decomp = dir.path().join("dec.json");
    assert!(smimc(&["analyze", p(&input), "-o", p(&decomp)])
        .status
        .success());
    let mut file = DecompositionFile::read(&decomp).unwrap();
    file.sigma.swap(0, 2);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&file).unwrap()).unwrap();
    let o = smimc(&["verify", "--input", p(&input), "--decomp", p(&bad)]);
    assert_eq!(o.status.code(), Some(9));
    assert!(stderr(&o).contains("FAIL sigma sorted"));
}

#[test]
fn verify_rejects_mismatched_files() {
    let dir = TempDir::new().unwrap();
    let input = write_series(&dir, "diag.json", &diag_013());
    let other = write_series(
        &dir,
        "id.json",
        &LaurentMatrix::constant(origin(), identity(2)),
    );
    let decomp = dir.path().join("dec.json");
    assert!(smimc(&["analyze", p(&other), "-o", p(&decomp)])
        .status
        .success());
    let o = smimc(&["verify", "--input", p(&input), "--decomp", p(&decomp)]);
    assert_eq!(o.status.code(), Some(7));
    assert!(stderr(&o).contains("MismatchedShapes"));
}

#[test]
fn files_round_trip_exactly() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("inst.json");
    let o = smimc(&[
        "gen",
        "--rows",
        "3",
        "--cols",
        "4",
        "--exponents",
        "0,2",
        "--degree",
        "2",
        "--complex",
        "--power",
        "3",
        "-o",
        p(&input),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let decomp = dir.path().join("dec.json");
    assert!(
        smimc(&["analyze", p(&input), "--emit-full-n", "-o", p(&decomp)])
            .status
            .success()
    );

    let series = SeriesFile::read(&input).unwrap();
    let again: SeriesFile = serde_json::from_str(&serde_json::to_string(&series).unwrap()).unwrap();
    assert_eq!(series, again);
    assert_eq!(
        SeriesFile::from_matrix(&series.to_matrix().unwrap()),
        series
    );

    let file = DecompositionFile::read(&decomp).unwrap();
    let again: DecompositionFile =
        serde_json::from_str(&serde_json::to_string(&file).unwrap()).unwrap();
    assert_eq!(file, again);
    let rebuilt = DecompositionFile::from_decomposition(&file.to_decomposition().unwrap(), true);
    assert_eq!(rebuilt, file);
}

#[test]
fn tolerance_from_env_and_flag() {
    let dir = TempDir::new().unwrap();
    let m = LaurentMatrix::constant(origin(), from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.1]));
    let path = write_series(&dir, "m.json", &m);
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_smimc"));
        cmd.arg("analyze")
            .arg(&path)
            .args(extra)
            .env_remove("SMIMC_TOL");
        if let Some(v) = env {
            cmd.env("SMIMC_TOL", v);
        }
        stdout(&cmd.output().unwrap())
    };
    assert!(run(None, &[]).contains("sigma: 0 0\n"));
    assert!(run(Some("0.5"), &[]).contains("sigma: 0\n"));
    assert!(run(Some("0.5"), &["--tol", "1e-12"]).contains("sigma: 0 0\n"));
}

#[test]
fn point_flag_reexpands() {
    let dir = TempDir::new().unwrap();
    // diag(λ - 1, λ - 1) in the monomial basis has a double zero at 1
    let f = serde_json::json!({
        "rows": 2, "cols": 2, "basis": "monomial",
        "coeffs": [
            {"re": [[-1.0, 0.0], [0.0, -1.0]], "im": [[0.0, 0.0], [0.0, 0.0]]},
            {"re": [[1.0, 0.0], [0.0, 1.0]], "im": [[0.0, 0.0], [0.0, 0.0]]}
        ]
    });
    let path = dir.path().join("m.json");
    std::fs::write(&path, f.to_string()).unwrap();
    assert!(stdout(&smimc(&["analyze", p(&path)])).contains("sigma: 0 0\n"));
    let o = smimc(&["analyze", p(&path), "--point", "1+0i"]);
    assert!(stdout(&o).contains("sigma: 1 1\n"), "{}", stderr(&o));
    let o = smimc(&["analyze", p(&path), "--point", "1+2x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn error_exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(smimc(&["analyze", p(&missing)]).status.code(), Some(3));

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(smimc(&["analyze", p(&garbage)]).status.code(), Some(3));

    let truncated = LaurentMatrix::new(
        origin(),
        0,
        vec![from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0])],
        false,
    )
    .unwrap();
    let path = write_series(&dir, "trunc.json", &truncated);
    let o = smimc(&["analyze", p(&path), "--normal-rank", "2"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).contains("InsufficientSeriesOrder"));
    assert_eq!(smimc(&["analyze", p(&path)]).status.code(), Some(4));

    let singular = LaurentMatrix::constant(origin(), from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0]));
    let path = write_series(&dir, "sing.json", &singular);
    let o = smimc(&["analyze", p(&path), "--normal-rank", "2"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("MaxOrderExceeded"));

    let laurent = write_series(&dir, "pole.json", &pole_diag());
    assert_eq!(
        smimc(&["analyze", p(&laurent), "--point", "1"])
            .status
            .code(),
        Some(7)
    );

    let out = dir.path().join("x.json");
    let o = smimc(&["gen", "--exponents", "0,1,2,3,4", "-o", p(&out)]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bench_is_deterministic() {
    let run = || {
        let o = smimc(&["bench", "table1", "--seed", "3"]);
        assert!(o.status.success(), "{}", stderr(&o));
        stdout(&o)
            .lines()
            .filter(|l| !l.starts_with("elapsed"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let a = run();
    assert_eq!(a, run());
    assert_eq!(a.lines().count(), 12);
    assert!(a.contains("indices recovered: 10/10"));
}
