use std::path::Path;
use std::process::Command;

const HEADER: &str = include_str!("../include/henlab.h");

#[test]
fn header_declares_every_entry_point() {
    let src = include_str!("../src/lib.rs");
    let names: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(names.len() >= 10);
    for n in names {
        assert!(HEADER.contains(&format!("{n}(")), "{n} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else { return };
    if !cc.status.success() {
        return;
    }
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let out = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", "-std=c11", "-I"])
        .arg(&dir)
        .arg("-")
        .stdin(std::process::Stdio::piped())
        .spawn()
        .and_then(|mut child| {
            use std::io::Write;
            child.stdin.take().unwrap().write_all(b"#include \"henlab.h\"\nint main(void) { HenlabMap *m = 0; return henlab_map_new(HENLAB_FAMILY_QR, HENLAB_PERTURBATION_XY, -1, 0.0, 0.0, 0.3, &m); }\n")?;
            child.wait_with_output()
        })
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
