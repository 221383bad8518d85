//! Commit graphs and checkouts from a live git repository.
//!
//! Everything goes through the `git` executable, so the usual discovery
//! variables (`GIT_DIR`, `GIT_WORK_TREE`, ...) apply.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use thiserror::Error;

use crate::dag::format::parse_graph;
use crate::dag::{DagError, Radag, Vertex, VertexId};

#[derive(Debug, Error)]
pub enum VcsError {
    #[error("`{0}` is not a git repository")]
    NotARepository(PathBuf),
    #[error("ref `{0}` does not name a commit")]
    RefNotFound(String),
    #[error("unexpected rev-list output at line {line}: {text}")]
    PlumbingParseError { line: usize, text: String },
    #[error("worktree has uncommitted changes")]
    DirtyWorktree,
    #[error("unknown commit `{0}`")]
    UnknownCommit(String),
    #[error("`git {args}` failed: {stderr}")]
    Git { args: String, stderr: String },
    #[error("could not run git: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Dag(DagError),
}

/// A repository plus the refs bounding the extracted history.
#[derive(Debug, Clone)]
pub struct RepoHandle {
    path: PathBuf,
    scope: Vec<String>,
}

/// Where HEAD pointed before we started moving it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeadState {
    Branch(String),
    Detached(String),
}

impl RepoHandle {
    /// Opens `path`. An empty `scope` means every local branch head.
    pub fn open(path: impl Into<PathBuf>, scope: Vec<String>) -> Result<Self, VcsError> {
        let path = path.into();
        let probe = git_at(&path, &["rev-parse", "--git-dir"]).output()?;
        if !probe.status.success() {
            return Err(VcsError::NotARepository(path));
        }
        let mut repo = RepoHandle { path, scope };
        if repo.scope.is_empty() {
            let out = repo.run(&["for-each-ref", "--format=%(refname)", "refs/heads"])?;
            repo.scope = out.lines().map(str::to_string).collect();
            if repo.scope.is_empty() {
                return Err(VcsError::RefNotFound("refs/heads/*".into()));
            }
        }
        Ok(repo)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn scope(&self) -> &[String] {
        &self.scope
    }

    fn run(&self, args: &[&str]) -> Result<String, VcsError> {
        let out = git_at(&self.path, args).output()?;
        check(args, out)
    }

    /// Full hash of the commit `rev` names.
    pub fn resolve(&self, rev: &str) -> Result<VertexId, VcsError> {
        let spec = format!("{rev}^{{commit}}");
        let out = git_at(&self.path, &["rev-parse", "--verify", "--quiet", &spec]).output()?;
        if !out.status.success() {
            return Err(VcsError::RefNotFound(rev.to_string()));
        }
        let hash = String::from_utf8_lossy(&out.stdout).trim().to_string();
        VertexId::new(hash).map_err(VcsError::Dag)
    }

    pub fn is_dirty(&self) -> Result<bool, VcsError> {
        let out = self.run(&["status", "--porcelain", "--untracked-files=no"])?;
        Ok(!out.trim().is_empty())
    }

    pub fn head(&self) -> Result<HeadState, VcsError> {
        let out = git_at(&self.path, &["symbolic-ref", "-q", "--short", "HEAD"]).output()?;
        if out.status.success() {
            let branch = String::from_utf8_lossy(&out.stdout).trim().to_string();
            return Ok(HeadState::Branch(branch));
        }
        Ok(HeadState::Detached(self.resolve("HEAD")?.to_string()))
    }

    pub fn restore(&self, head: &HeadState) -> Result<(), VcsError> {
        let target = match head {
            HeadState::Branch(b) => b.as_str(),
            HeadState::Detached(h) => h.as_str(),
        };
        let mut args = vec!["checkout", "-q", "--force"];
        if matches!(head, HeadState::Detached(_)) {
            args.push("--detach");
        }
        args.push(target);
        self.run(&args).map(drop)
    }
}

fn git_at(path: &Path, args: &[&str]) -> Command {
    let mut cmd = Command::new("git");
    cmd.arg("-C").arg(path).args(args);
    cmd
}

fn check(args: &[&str], out: Output) -> Result<String, VcsError> {
    if !out.status.success() {
        return Err(VcsError::Git {
            args: args.join(" "),
            stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
        });
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

/// Builds the commit DAG reachable from the scoped refs; leaves are the
/// commits without children inside that history.
pub fn extract_commit_graph(repo: &RepoHandle) -> Result<(Radag, Vec<Vertex>), VcsError> {
    let mut revs = Vec::with_capacity(repo.scope.len());
    for r in &repo.scope {
        revs.push(repo.resolve(r)?.to_string());
    }
    let mut args = vec!["rev-list", "--parents", "--topo-order", "--reverse"];
    args.extend(revs.iter().map(String::as_str));
    let listing = repo.run(&args)?;
    let graph = parse_graph(&listing).map_err(|e| match e {
        DagError::Parse { line, .. } => VcsError::PlumbingParseError {
            line,
            text: listing
                .lines()
                .nth(line - 1)
                .unwrap_or_default()
                .to_string(),
        },
        other => VcsError::Dag(other),
    })?;
    let leaves = graph.sinks();
    Ok((graph, leaves))
}

/// Detaches HEAD at `commit`. Refuses a dirty worktree unless `force`.
pub fn checkout(repo: &RepoHandle, commit: &VertexId, force: bool) -> Result<(), VcsError> {
    let spec = format!("{commit}^{{commit}}");
    let exists = git_at(&repo.path, &["cat-file", "-e", &spec]).output()?;
    if !exists.status.success() {
        return Err(VcsError::UnknownCommit(commit.to_string()));
    }
    if !force && repo.is_dirty()? {
        return Err(VcsError::DirtyWorktree);
    }
    let mut args = vec!["checkout", "-q", "--detach"];
    if force {
        args.push("--force");
    }
    args.push(commit.as_str());
    repo.run(&args).map(drop)
}
