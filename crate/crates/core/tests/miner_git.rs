//! Miner behavior against scripted git repositories.

mod common;

use common::FixtureRepo;
use perfpatch_core::corpus_miner::{
    crawl_all, materialize_tree, mine_single_file_perf_commits, MinerConfig, MinerError,
};

fn three_commit_repo() -> FixtureRepo {
    let mut repo = FixtureRepo::new();
    repo.write("readme.md", "hello\n");
    repo.commit("initial docs");
    repo.write("src/a.cs", "class A { void F() { int x = 1; } }\n");
    repo.commit("add A");
    repo.write("readme.md", "hello again\n");
    repo.commit("update docs");
    repo
}

#[test]
fn crawl_counts_subject_file_changes() {
    let repo = three_commit_repo();
    let records = crawl_all(repo.path(), "main", &MinerConfig::default()).unwrap();
    assert_eq!(records.len(), 3);
    // Newest first: docs update, add A, initial docs.
    assert_eq!(records[0].file_changes.len(), 0);
    assert_eq!(records[1].file_changes.len(), 1);
    assert_eq!(records[1].file_changes[0].path, "src/a.cs");
    assert!(records[1].file_changes[0].before_text.is_empty());
    assert_eq!(records[2].file_changes.len(), 0);
}

#[test]
fn non_subject_files_are_filtered() {
    let repo = three_commit_repo();
    let records = crawl_all(repo.path(), "main", &MinerConfig::default()).unwrap();
    let docs_only = &records[0];
    assert!(docs_only.file_changes.is_empty());
    assert!(!docs_only.message.is_empty());
}

#[test]
fn whitespace_only_change_is_still_emitted() {
    let mut repo = FixtureRepo::new();
    repo.write("a.cs", "class A { void F() { int x = 1; } }\n");
    repo.commit("add");
    repo.write("a.cs", "class A { void F() { int  x = 1; } }\n");
    repo.commit("reformat");
    let records = crawl_all(repo.path(), "main", &MinerConfig::default()).unwrap();
    // The raw texts differ, so the change is emitted; normalization discards
    // it downstream during method pairing.
    assert_eq!(records[0].file_changes.len(), 1);
    let before = perfpatch_core::code_model::parse_source(&records[0].file_changes[0].before_text)
        .unwrap();
    let after =
        perfpatch_core::code_model::parse_source(&records[0].file_changes[0].after_text).unwrap();
    assert!(perfpatch_core::code_model::pair_methods(&before, &after).is_empty());
}

#[test]
fn crawl_is_deterministic() {
    let repo = three_commit_repo();
    let a = crawl_all(repo.path(), "main", &MinerConfig::default()).unwrap();
    let b = crawl_all(repo.path(), "main", &MinerConfig::default()).unwrap();
    let a_json: Vec<String> = a.iter().map(|r| serde_json::to_string(r).unwrap()).collect();
    let b_json: Vec<String> = b.iter().map(|r| serde_json::to_string(r).unwrap()).collect();
    assert_eq!(a_json, b_json);
}

#[test]
fn unknown_branch_is_reported() {
    let repo = three_commit_repo();
    let err = crawl_all(repo.path(), "nope", &MinerConfig::default()).unwrap_err();
    assert!(matches!(err, MinerError::BranchNotFound { .. }));
}

#[test]
fn deleted_file_has_empty_after_text() {
    let mut repo = FixtureRepo::new();
    repo.write("a.cs", "class A { }\n");
    repo.commit("add");
    repo.remove("a.cs");
    repo.commit("drop");
    let records = crawl_all(repo.path(), "main", &MinerConfig::default()).unwrap();
    assert_eq!(records[0].file_changes.len(), 1);
    assert!(records[0].file_changes[0].after_text.is_empty());
    assert!(!records[0].file_changes[0].before_text.is_empty());
}

#[test]
fn merge_commits_diff_against_first_parent() {
    let mut repo = FixtureRepo::new();
    repo.write("a.cs", "class A { void F() { int x = 1; } }\n");
    repo.commit("base");
    repo.git(&["checkout", "-q", "-b", "side"]);
    repo.write("b.cs", "class B { }\n");
    repo.commit("side adds b");
    repo.git(&["checkout", "-q", "main"]);
    repo.write("a.cs", "class A { void F() { int x = 2; } }\n");
    repo.commit("main edits a");
    repo.git(&["merge", "-q", "--no-ff", "-m", "merge side", "side"]);

    let records = crawl_all(repo.path(), "main", &MinerConfig::default()).unwrap();
    let merge = &records[0];
    assert_eq!(merge.message, "merge side");
    // Relative to the first parent (main), only b.cs is new.
    assert_eq!(merge.file_changes.len(), 1);
    assert_eq!(merge.file_changes[0].path, "b.cs");
}

#[test]
fn single_file_perf_filter() {
    let mut repo = FixtureRepo::new();
    repo.write("a.cs", "class A { void F() { int x = 1; } }\n");
    repo.write("b.cs", "class B { void G() { int y = 1; } }\n");
    repo.commit("initial import");

    // Perf commit touching two subject files: excluded.
    repo.write("a.cs", "class A { void F() { int x = 2; } }\n");
    repo.write("b.cs", "class B { void G() { int y = 2; } }\n");
    repo.commit("perf: speed up both");

    // Perf commit touching one subject file: included.
    repo.write("a.cs", "class A { void F() { int x = 3; } }\n");
    repo.commit("optimize F");

    // Non-perf commit touching one subject file: excluded.
    repo.write("b.cs", "class B { void G() { int y = 3; } }\n");
    repo.commit("tidy G");

    let config = MinerConfig::default();
    let mined = mine_single_file_perf_commits(repo.path(), "main", &config).unwrap();
    assert_eq!(mined.len(), 1);
    assert_eq!(mined[0].message, "optimize F");
    assert!(mined[0].is_perf);
    assert_eq!(mined[0].file_changes.len(), 1);

    for record in &mined {
        assert!(record.is_perf && record.file_changes.len() == 1);
    }
}

#[test]
fn no_perf_commits_yields_empty() {
    let repo = three_commit_repo();
    let mined = mine_single_file_perf_commits(repo.path(), "main", &MinerConfig::default())
        .unwrap();
    assert!(mined.is_empty());
}

#[test]
fn max_commits_caps_the_stream() {
    let repo = three_commit_repo();
    let config = MinerConfig {
        max_commits: Some(2),
        ..MinerConfig::default()
    };
    let records = crawl_all(repo.path(), "main", &config).unwrap();
    assert_eq!(records.len(), 2);
}

#[test]
fn materialize_tree_reproduces_commit_state() {
    let mut repo = FixtureRepo::new();
    repo.write("src/a.cs", "class A { void F() { int x = 1; } }\n");
    repo.write("readme.md", "v1\n");
    repo.commit("first");
    repo.write("src/a.cs", "class A { void F() { int x = 2; } }\n");
    repo.commit("second");

    let records = crawl_all(repo.path(), "main", &MinerConfig::default()).unwrap();
    let first_commit = &records[1].commit_id;

    let dest = tempfile::tempdir().unwrap();
    materialize_tree(repo.path(), first_commit, dest.path()).unwrap();
    let a = std::fs::read_to_string(dest.path().join("src/a.cs")).unwrap();
    assert_eq!(a, "class A { void F() { int x = 1; } }\n");
    let readme = std::fs::read_to_string(dest.path().join("readme.md")).unwrap();
    assert_eq!(readme, "v1\n");
}
