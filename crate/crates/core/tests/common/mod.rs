//! Shared helpers for integration tests: scripted git fixture repositories.

use std::path::{Path, PathBuf};
use std::process::Command;

pub struct FixtureRepo {
    pub dir: tempfile::TempDir,
    commit_seq: u32,
}

impl FixtureRepo {
    pub fn new() -> FixtureRepo {
        let dir = tempfile::tempdir().expect("create tempdir");
        let repo = FixtureRepo { dir, commit_seq: 0 };
        repo.git(&["init", "-q", "-b", "main"]);
        repo
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn git(&self, args: &[&str]) {
        let status = Command::new("git")
            .arg("-C")
            .arg(self.dir.path())
            .args([
                "-c",
                "user.name=fixture",
                "-c",
                "user.email=fixture@example.com",
            ])
            .args(args)
            .env("GIT_AUTHOR_DATE", "2024-01-01T00:00:00 +0000")
            .env("GIT_COMMITTER_DATE", "2024-01-01T00:00:00 +0000")
            .status()
            .expect("run git");
        assert!(status.success(), "git {args:?} failed");
    }

    pub fn write(&self, rel: &str, content: &str) -> PathBuf {
        let path = self.dir.path().join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).unwrap();
        }
        std::fs::write(&path, content).unwrap();
        path
    }

    pub fn remove(&self, rel: &str) {
        std::fs::remove_file(self.dir.path().join(rel)).unwrap();
    }

    pub fn commit(&mut self, message: &str) {
        self.commit_seq += 1;
        let date = format!("2024-01-01T00:{:02}:00 +0000", self.commit_seq % 60);
        self.git(&["add", "-A"]);
        let status = Command::new("git")
            .arg("-C")
            .arg(self.dir.path())
            .args([
                "-c",
                "user.name=fixture",
                "-c",
                "user.email=fixture@example.com",
            ])
            .args(["commit", "-q", "--allow-empty", "-m", message])
            .env("GIT_AUTHOR_DATE", &date)
            .env("GIT_COMMITTER_DATE", &date)
            .status()
            .expect("run git commit");
        assert!(status.success(), "git commit failed");
    }
}
