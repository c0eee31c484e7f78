//! Mining commit histories for performance changes.
//!
//! Walks a branch newest-to-oldest via git plumbing commands, classifies
//! commits by performance keywords in the message, and emits before/after
//! file pairs for subject-language files whose raw text changed. Merge
//! commits are diffed against their first parent; renames are surfaced as
//! delete+add so downstream signature pairing keeps a stable file identity.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MinerError {
    #[error("repository unreadable at {path}: {reason}")]
    RepositoryUnreadable { path: PathBuf, reason: String },
    #[error("branch {branch} not found in {path}")]
    BranchNotFound { path: PathBuf, branch: String },
    #[error("git {args} failed: {stderr}")]
    Git { args: String, stderr: String },
    #[error("io error running git: {0}")]
    Io(#[from] std::io::Error),
}

/// Default performance keyword list; overridable via configuration.
pub const DEFAULT_PERF_KEYWORDS: &[&str] = &[
    "perf",
    "performance",
    "reduce allocation",
    "optimiz",
    "speed up",
    "faster",
    "memory usage",
    "alloc",
];

/// Mining knobs: subject-language extension, keyword list, commit cap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinerConfig {
    pub extension: String,
    pub keywords: Vec<String>,
    pub max_commits: Option<usize>,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            extension: ".cs".to_string(),
            keywords: DEFAULT_PERF_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            max_commits: None,
        }
    }
}

/// Before/after text of one changed file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileChange {
    /// Repository-relative path.
    pub path: String,
    /// Full file text at the (first) parent commit; empty if the file was added.
    pub before_text: String,
    /// Full file text at the commit; empty if the file was deleted.
    pub after_text: String,
}

/// One mined commit with its subject-language file changes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommitRecord {
    pub commit_id: String,
    pub message: String,
    pub is_perf: bool,
    /// First parent id; empty for a root commit.
    pub parent_id: String,
    pub file_changes: Vec<FileChange>,
}

/// True iff any keyword occurs case-insensitively as a substring of the
/// message. Total: an empty keyword list matches nothing.
pub fn classify_perf_commit(message: &str, keywords: &[String]) -> bool {
    let message = message.to_lowercase();
    keywords
        .iter()
        .any(|k| !k.is_empty() && message.contains(&k.to_lowercase()))
}

fn git(repo: &Path, args: &[&str]) -> Result<Vec<u8>, MinerError> {
    let output = Command::new("git").arg("-C").arg(repo).args(args).output()?;
    if !output.status.success() {
        return Err(MinerError::Git {
            args: args.join(" "),
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
        });
    }
    Ok(output.stdout)
}

fn git_text(repo: &Path, args: &[&str]) -> Result<String, MinerError> {
    Ok(String::from_utf8_lossy(&git(repo, args)?).into_owned())
}

fn check_repo(repo: &Path) -> Result<(), MinerError> {
    let probe = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(["rev-parse", "--git-dir"])
        .output();
    match probe {
        Ok(out) if out.status.success() => Ok(()),
        Ok(out) => Err(MinerError::RepositoryUnreadable {
            path: repo.to_path_buf(),
            reason: String::from_utf8_lossy(&out.stderr).trim().to_string(),
        }),
        Err(e) => Err(MinerError::RepositoryUnreadable {
            path: repo.to_path_buf(),
            reason: e.to_string(),
        }),
    }
}

fn check_branch(repo: &Path, branch: &str) -> Result<(), MinerError> {
    let spec = format!("{branch}^{{commit}}");
    let ok = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(["rev-parse", "--verify", "--quiet", &spec])
        .output()?
        .status
        .success();
    if ok {
        Ok(())
    } else {
        Err(MinerError::BranchNotFound {
            path: repo.to_path_buf(),
            branch: branch.to_string(),
        })
    }
}

/// Commit ids, first parents and messages of the branch, newest first.
fn list_commits(repo: &Path, branch: &str) -> Result<Vec<(String, String, String)>, MinerError> {
    let raw = git(repo, &["rev-list", "--parents", "--format=%B%x00", branch])?;
    let text = String::from_utf8_lossy(&raw);
    let mut commits = Vec::new();
    for chunk in text.split('\0') {
        let chunk = chunk.strip_prefix('\n').unwrap_or(chunk);
        if chunk.trim().is_empty() {
            continue;
        }
        let (header, body) = chunk.split_once('\n').unwrap_or((chunk, ""));
        let Some(ids) = header.strip_prefix("commit ") else {
            continue;
        };
        let mut parts = ids.split_whitespace();
        let id = parts.next().unwrap_or_default().to_string();
        let first_parent = parts.next().unwrap_or_default().to_string();
        commits.push((id, first_parent, body.trim_end_matches('\n').to_string()));
    }
    Ok(commits)
}

fn read_blob(repo: &Path, sha: &str) -> Result<String, MinerError> {
    if sha.chars().all(|c| c == '0') {
        return Ok(String::new());
    }
    git_text(repo, &["cat-file", "blob", sha])
}

/// Changed subject-language files of one commit, diffed against `parent`.
fn file_changes(
    repo: &Path,
    commit: &str,
    parent: &str,
    extension: &str,
) -> Result<Vec<FileChange>, MinerError> {
    let raw = if parent.is_empty() {
        git_text(repo, &["diff-tree", "-r", "--root", "--no-renames", commit])?
    } else {
        git_text(repo, &["diff-tree", "-r", "--no-renames", parent, commit])?
    };
    let mut changes = Vec::new();
    for line in raw.lines().filter(|l| l.starts_with(':')) {
        // :<old mode> <new mode> <old sha> <new sha> <status>\t<path>
        let Some((meta, path)) = line.split_once('\t') else {
            continue;
        };
        if !path.ends_with(extension) {
            continue;
        }
        let fields: Vec<&str> = meta.trim_start_matches(':').split_whitespace().collect();
        if fields.len() < 5 {
            continue;
        }
        let (old_sha, new_sha) = (fields[2], fields[3]);
        let before_text = read_blob(repo, old_sha)?;
        let after_text = read_blob(repo, new_sha)?;
        if before_text == after_text {
            continue;
        }
        changes.push(FileChange {
            path: path.to_string(),
            before_text,
            after_text,
        });
    }
    Ok(changes)
}

/// Streaming crawl of a branch's history, newest to oldest.
pub struct Crawl<'a> {
    repo: PathBuf,
    config: &'a MinerConfig,
    commits: std::vec::IntoIter<(String, String, String)>,
    yielded: usize,
}

impl<'a> Iterator for Crawl<'a> {
    type Item = Result<CommitRecord, MinerError>;

    fn next(&mut self) -> Option<Self::Item> {
        if let Some(max) = self.config.max_commits {
            if self.yielded >= max {
                return None;
            }
        }
        let (id, parent, message) = self.commits.next()?;
        self.yielded += 1;
        let changes = match file_changes(&self.repo, &id, &parent, &self.config.extension) {
            Ok(c) => c,
            Err(e) => return Some(Err(e)),
        };
        Some(Ok(CommitRecord {
            is_perf: classify_perf_commit(&message, &self.config.keywords),
            commit_id: id,
            message,
            parent_id: parent,
            file_changes: changes,
        }))
    }
}

/// Walk `branch` of the repository at `repo_path`, newest to oldest,
/// populating file changes for subject-language files whose text differs
/// from the first-parent version.
pub fn crawl_history<'a>(
    repo_path: &Path,
    branch: &str,
    config: &'a MinerConfig,
) -> Result<Crawl<'a>, MinerError> {
    check_repo(repo_path)?;
    check_branch(repo_path, branch)?;
    let commits = list_commits(repo_path, branch)?;
    Ok(Crawl {
        repo: repo_path.to_path_buf(),
        config,
        commits: commits.into_iter(),
        yielded: 0,
    })
}

/// Crawl and collect every commit record.
pub fn crawl_all(
    repo_path: &Path,
    branch: &str,
    config: &MinerConfig,
) -> Result<Vec<CommitRecord>, MinerError> {
    crawl_history(repo_path, branch, config)?.collect()
}

/// Performance commits that change exactly one subject-language file
/// (filters out squash merges mixing many changes).
pub fn mine_single_file_perf_commits(
    repo_path: &Path,
    branch: &str,
    config: &MinerConfig,
) -> Result<Vec<CommitRecord>, MinerError> {
    Ok(crawl_all(repo_path, branch, config)?
        .into_iter()
        .filter(|r| r.is_perf && r.file_changes.len() == 1)
        .collect())
}

/// Write the full tree of `commit` under `dest` (used to build isolated
/// baseline working copies without touching the repository's worktree).
pub fn materialize_tree(repo: &Path, commit: &str, dest: &Path) -> Result<(), MinerError> {
    let listing = git(repo, &["ls-tree", "-r", "-z", commit])?;
    let text = String::from_utf8_lossy(&listing);
    for entry in text.split('\0').filter(|e| !e.is_empty()) {
        let Some((meta, path)) = entry.split_once('\t') else {
            continue;
        };
        let fields: Vec<&str> = meta.split_whitespace().collect();
        if fields.len() < 3 || fields[1] != "blob" {
            continue;
        }
        let bytes = git(repo, &["cat-file", "blob", fields[2]])?;
        let target = dest.join(path);
        if let Some(parent) = target.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(target, bytes)?;
    }
    Ok(())
}
