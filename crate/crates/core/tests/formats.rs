//! The committed `FORMATS.md` is the generated one.

use kinetic_maxwell::harness::formats_markdown;

#[test]
fn committed_formats_md_matches_the_generator() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../FORMATS.md");
    let committed = std::fs::read_to_string(path).expect("FORMATS.md at the workspace root");
    assert_eq!(committed, formats_markdown(), "regenerate with `kinetic trace --out <dir>` and copy FORMATS.md");
}
