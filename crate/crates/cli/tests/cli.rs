use std::path::Path;
use std::process::{Command, Output};

use etcident::bench::synthetic_scene;
use etcident::PixelImage;

fn etcident(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etcident"))
        .args(args)
        .env_remove("ETCIDENT_SEED_FILE")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_scene(path: &Path, w: usize, h: usize, seed: u64) {
    synthetic_scene(w, h, seed).unwrap().save_png(path).unwrap();
}

#[test]
fn missing_seed_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    write_scene(&input, 64, 64, 1);
    let out = etcident(&["encrypt", "-i", s(&input), "-o", s(&dir.path().join("o.jpg")), "--k", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unaligned_input_needs_crop() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    write_scene(&input, 479, 640, 2);
    let output = dir.path().join("o.jpg");
    let args = ["encrypt", "-i", s(&input), "-o", s(&output), "--k0", "1", "--k", "2"];
    let out = etcident(&args);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("479"));
    assert!(!output.exists());

    let mut cropped = args.to_vec();
    cropped.push("--crop");
    assert_eq!(code(&etcident(&cropped)), 0);
    let img = PixelImage::open(&output).unwrap();
    assert_eq!((img.width(), img.height()), (472, 640));
}

#[test]
fn bad_seed_text_is_a_key_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    write_scene(&input, 16, 16, 1);
    let out = etcident(&["encrypt", "-i", s(&input), "-o", s(&dir.path().join("o.jpg")), "--k0", "x1", "--k", "1"]);
    assert_eq!(code(&out), 5);
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = etcident(&[
        "encrypt",
        "-i",
        s(&dir.path().join("nope.png")),
        "-o",
        s(&dir.path().join("o.jpg")),
        "--k0",
        "1",
        "--k",
        "1",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn encrypt_decrypt_round_trip_through_keyfile_and_env() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    write_scene(&input, 128, 96, 3);
    let enc = dir.path().join("enc.jpg");
    let out = etcident(&["encrypt", "-i", s(&input), "-o", s(&enc), "--k0", "0xdeadbeef", "--k", "42", "--qf", "95"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let key = dir.path().join("enc.jpg.key");
    assert!(key.exists());

    let dec = dir.path().join("dec.png");
    assert_eq!(code(&etcident(&["decrypt", "-i", s(&enc), "-o", s(&dec), "--keyfile", s(&key)])), 0);
    let original = PixelImage::open(&input).unwrap();
    let restored = PixelImage::open(&dec).unwrap();
    let mae = original
        .samples()
        .iter()
        .zip(restored.samples())
        .map(|(&a, &b)| (a as f64 - b as f64).abs())
        .sum::<f64>()
        / original.samples().len() as f64;
    assert!(mae < 3.0, "mae {mae}");

    let dec_env = dir.path().join("dec_env.png");
    let out = Command::new(env!("CARGO_BIN_EXE_etcident"))
        .args(["decrypt", "-i", s(&enc), "-o", s(&dec_env)])
        .env("ETCIDENT_SEED_FILE", &key)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&dec).unwrap(), std::fs::read(&dec_env).unwrap());

    let out = etcident(&["decrypt", "-i", s(&enc), "-o", s(&dec_env)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn reencrypted_copy_is_identified() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    write_scene(&p("a.png"), 160, 120, 4);
    write_scene(&p("b.png"), 160, 120, 5);
    for name in ["a", "b"] {
        let out = etcident(&[
            "encrypt",
            "-i",
            s(&p(&format!("{name}.png"))),
            "-o",
            s(&p(&format!("{name}.jpg"))),
            "--k0",
            "7",
            "--k",
            "1",
        ]);
        assert_eq!(code(&out), 0);
    }
    let out = etcident(&[
        "reencrypt",
        "-i",
        s(&p("a.jpg")),
        "-o",
        s(&p("a2.jpg")),
        "--keyfile",
        s(&p("a.jpg.key")),
        "--k-new",
        "99",
        "--qf",
        "70",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(p("a2.jpg.key")).unwrap().contains("k = 99"));

    for (jpg, etcf) in [("a2.jpg", "a2.etcf"), ("b.jpg", "b.etcf"), ("a.jpg", "q.etcf")] {
        let out = etcident(&["extract", "-i", s(&p(jpg)), "-o", s(&p(etcf))]);
        assert_eq!(code(&out), 0);
    }
    let out = etcident(&["extract", "-i", s(&p("a.jpg")), "-o", s(&p("q.etcf")), "--text", s(&p("q.txt"))]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read_to_string(p("q.txt")).unwrap().lines().count(), 30);

    let manifest = p("manifest.jsonl");
    let line = |id: &str, file: &str| {
        format!(
            r#"{{"image":"{file}.jpg","feature":"{file}.etcf","id":"{id}","origin":0,"origin_name":"x","j":2,"k0":7,"k":1,"key":"k","n_fixed":30,"qf_chain":[85,70]}}"#
        )
    };
    std::fs::write(&manifest, format!("{}\n{}\n", line("other", "b"), line("same", "a2"))).unwrap();

    let out = etcident(&["identify", "-q", s(&p("q.etcf")), "-m", s(&manifest)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "same\n");

    let out = etcident(&["identify", "-q", s(&p("q.etcf")), "-m", s(&manifest), "--d", "0"]);
    assert_eq!(code(&out), 1);

    std::fs::write(p("junk.etcf"), b"nope").unwrap();
    let out = etcident(&["identify", "-q", s(&p("junk.etcf")), "-m", s(&manifest)]);
    assert_eq!(code(&out), 6);
}

#[test]
fn bench_smoke_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let json = dir.path().join(name);
        let out = etcident(&[
            "bench",
            "--scale",
            "1",
            "--condition",
            "2",
            "--width",
            "128",
            "--height",
            "96",
            "--json",
            s(&json),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        (String::from_utf8(out.stdout).unwrap(), std::fs::read(json).unwrap())
    };
    let (text_a, json_a) = run("a.json");
    let (text_b, json_b) = run("b.json");
    assert_eq!(text_a, text_b);
    assert_eq!(json_a, json_b);
    assert!(text_a.contains("proposed   (2)        |   100.00   100.00 |   100.00   100.00"), "{text_a}");
}

#[test]
fn bench_writes_a_usable_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("data");
    let out = etcident(&[
        "bench",
        "--scale",
        "2",
        "--condition",
        "3",
        "--mode",
        "same",
        "--width",
        "64",
        "--height",
        "64",
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let cond = out_dir.join("condition-3");
    let manifest = cond.join("manifest.jsonl");
    assert!(manifest.exists());
    let first = std::fs::read_dir(cond.join("features"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .min()
        .unwrap();
    let out = etcident(&["identify", "-q", s(&first), "-m", s(&manifest)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bench_rejects_equal_keys_and_zero_scale() {
    assert_eq!(code(&etcident(&["bench", "--k", "3", "--k-prime", "3", "--scale", "1"])), 5);
    assert_eq!(code(&etcident(&["bench", "--scale", "0"])), 2);
    assert_eq!(code(&etcident(&["bench", "--condition", "4"])), 2);
}

#[test]
fn edge_cases_from_the_command_contract() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    write_scene(&p("a.png"), 64, 64, 6);
    let out = etcident(&["encrypt", "-i", s(&p("a.png")), "-o", s(&p("a.jpg")), "--k0", "1", "--k", "2", "--qf", "95"]);
    assert_eq!(code(&out), 0);

    // N > M
    assert_eq!(code(&etcident(&["extract", "-i", s(&p("a.jpg")), "-o", s(&p("f.etcf")), "--n", "65"])), 4);
    assert_eq!(code(&etcident(&["extract", "-i", s(&p("a.jpg")), "-o", s(&p("f.etcf")), "--n", "64"])), 0);

    // empty manifest: no match
    std::fs::write(p("empty.jsonl"), "").unwrap();
    let out = etcident(&["identify", "-q", s(&p("f.etcf")), "-m", s(&p("empty.jsonl"))]);
    assert_eq!(code(&out), 1);
    assert!(out.stdout.is_empty());

    // malformed key file
    std::fs::write(p("bad.key"), "k0 = 1\nk = banana\nn = 6\n").unwrap();
    assert_eq!(code(&etcident(&["decrypt", "-i", s(&p("a.jpg")), "-o", s(&p("x.png")), "--keyfile", s(&p("bad.key"))])), 5);

    // wrong seed: decrypts without error, but the picture stays scrambled
    let ok = etcident(&["decrypt", "-i", s(&p("a.jpg")), "-o", s(&p("good.png")), "--k0", "1", "--k", "2", "--n", "6"]);
    let bad = etcident(&["decrypt", "-i", s(&p("a.jpg")), "-o", s(&p("bad.png")), "--k0", "1", "--k", "3", "--n", "6"]);
    assert_eq!((code(&ok), code(&bad)), (0, 0));
    let orig = PixelImage::open(p("a.png")).unwrap();
    let err = |path: &Path| {
        let img = PixelImage::open(path).unwrap();
        orig.samples().iter().zip(img.samples()).map(|(&a, &b)| a.abs_diff(b) as f64).sum::<f64>() / orig.samples().len() as f64
    };
    let (good, scrambled) = (err(&p("good.png")), err(&p("bad.png")));
    assert!(good < 3.0 && scrambled > 10.0 * good, "{good} vs {scrambled}");
}
