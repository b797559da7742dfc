mod common;

#[test]
fn corpus_labels_match_exactly() {
    let dirs = common::corpus_dirs();
    assert!(dirs.len() >= 20, "corpus has only {} programs", dirs.len());
    let mut failures = Vec::new();
    for d in &dirs {
        for msg in common::check_corpus_program(d) {
            failures.push(format!("{}: {msg}", d.file_name().unwrap().to_string_lossy()));
        }
    }
    assert!(failures.is_empty(), "label deviations:\n{}", failures.join("\n"));
}
