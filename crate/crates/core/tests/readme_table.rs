//! Runs every cell of the README verdict table through the binary.

use std::path::{Path, PathBuf};
use std::process::Command;

const BEGIN: &str = "<!-- verdicts:begin -->";
const END: &str = "<!-- verdicts:end -->";

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn table_rows(readme: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let start = readme.find(BEGIN).expect("table start marker") + BEGIN.len();
    let end = readme.find(END).expect("table end marker");
    let cells = |line: &str| -> Vec<String> {
        line.trim().trim_matches('|').split('|').map(|c| c.trim().to_string()).collect()
    };
    let mut lines = readme[start..end].lines().filter(|l| l.trim().starts_with('|'));
    let header = cells(lines.next().expect("header row"));
    let rows = lines.skip(1).map(cells).collect();
    (header, rows)
}

fn verdict(rel: &str, left: &Path, right: &Path) -> bool {
    let out = Command::new(env!("CARGO_BIN_EXE_arboreal"))
        .args(["check", "--rel", rel, "-k", "2"])
        .arg(left)
        .arg(right)
        .output()
        .expect("run arboreal");
    match out.status.code() {
        Some(0) => true,
        Some(1) => false,
        other => panic!("{rel} {left:?} {right:?} exited with {other:?}: {}", String::from_utf8_lossy(&out.stderr)),
    }
}

#[test]
fn readme_verdicts_match_binary() {
    let readme = std::fs::read_to_string(manifest().join("../../README.md")).expect("read README");
    let (header, rows) = table_rows(&readme);
    assert_eq!(&header[..2], ["left", "right"]);
    assert!(rows.len() >= 36, "only {} rows", rows.len());
    let fixtures = manifest().join("fixtures");
    let mut mismatches = Vec::new();
    for row in &rows {
        assert_eq!(row.len(), header.len(), "row {row:?}");
        let left = fixtures.join(format!("{}.json", row[0]));
        let right = fixtures.join(format!("{}.json", row[1]));
        for (rel, cell) in header[2..].iter().zip(&row[2..]) {
            let expected = match cell.as_str() {
                "T" => true,
                "F" => false,
                other => panic!("bad cell `{other}`"),
            };
            if verdict(rel, &left, &right) != expected {
                mismatches.push(format!("{} {} {rel}: expected {cell}", row[0], row[1]));
            }
        }
    }
    assert!(mismatches.is_empty(), "{mismatches:#?}");
}
