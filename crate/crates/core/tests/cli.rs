use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toeplitz-qrng"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn plan_reports_published_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    for (h, m) in [("12.9", "519"), ("13.5", "548"), ("14.2", "581")] {
        let out = run(&["plan", "--hmin", h], dir.path());
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).contains(&format!("m: {m}\n")), "{}", stdout(&out));
    }
    let out = run(&["plan", "--hmin", "2", "--report", "r.kv"], dir.path());
    assert_eq!(code(&out), 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(&[], d)), 1);
    assert_eq!(code(&run(&["plan", "--bogus"], d)), 1);
    assert_eq!(code(&run(&["plan"], d)), 1);
    assert_eq!(code(&run(&["--help"], d)), 0);
    assert_eq!(code(&run(&["plan", "--hmin", "12.9", "--k", "17"], d)), 1);

    std::fs::write(d.join("bad.toml"), "[[channel]]\nm = 900\nn = 768\nk = 16\ninput = \"x\"\n").unwrap();
    assert_eq!(code(&run(&["extract", "--config", "bad.toml", "--out", "o.bin"], d)), 2);

    std::fs::write(d.join("odd.raw"), [0u8; 7]).unwrap();
    let out = run(&["extract", "--input", "odd.raw", "--m", "519", "--out", "o.bin"], d);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset 6"));
    assert_eq!(code(&run(&["plan", "--raw", "odd.raw"], d)), 3);
}

#[test]
fn simulate_extract_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(&["simulate", "--out-dir", "raw", "--samples", "96000", "--seed", "4"], d);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for i in 0..3 {
        assert!(d.join(format!("raw/ch{i}.raw.meta")).exists());
    }
    let extract = |name: &str| {
        run(
            &[
                "extract", "--input", "raw/ch0.raw", "raw/ch1.raw", "raw/ch2.raw", "--m", "519,548,581", "--out",
                name,
            ],
            d,
        )
    };
    let a = extract("a.bin");
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(code(&extract("b.bin")), 0);
    assert_eq!(std::fs::read(d.join("a.bin")).unwrap(), std::fs::read(d.join("b.bin")).unwrap());
    let manifest = std::fs::read_to_string(d.join("a.bin.manifest")).unwrap();
    assert_eq!(manifest, std::fs::read_to_string(d.join("b.bin.manifest")).unwrap());
    assert!(manifest.contains(&format!("total_bits: {}\n", 2000 * (519 + 548 + 581))));

    let out = run(
        &["analyze", "--input", "a.bin", "--acf", "20", "--tests", "--seq-bits", "100000", "--export-sts", "a.sts"],
        d,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(d.join("a.bin.acf.tsv").exists());
    assert!(d.join("a.bin.tests.kv").exists());
    assert_eq!(std::fs::metadata(d.join("a.sts")).unwrap().len(), (2000 * 1648u64).div_ceil(8));
    assert_eq!(code(&run(&["analyze", "--input", "a.bin"], d)), 1);

    let out = run(&["plan", "--raw", "raw/ch0.raw"], d);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("empirical"));
}

#[test]
fn zero_filled_input_gives_zero_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("zero.raw"), vec![0u8; 2 * 48 * 4]).unwrap();
    let out = run(&["extract", "--input", "zero.raw", "--m", "519", "--out", "z.bin"], d);
    assert_eq!(code(&out), 0);
    let bytes = std::fs::read(d.join("z.bin")).unwrap();
    assert_eq!(bytes.len(), (4 * 519usize).div_ceil(8));
    assert!(bytes.iter().all(|&b| b == 0));
}
