#![allow(dead_code)]

use std::collections::VecDeque;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use regpred_core::bench::BenchmarkInstance;
use regpred_core::Vertex;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_regpred"))
}

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

pub fn run_with_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Breadth-first edge count over the instance's own adjacency.
pub fn bfs(inst: &BenchmarkInstance, from: Vertex, to: Vertex) -> Option<u32> {
    let g = &inst.graph;
    let mut dist = vec![None; g.vertex_count()];
    dist[from.index()] = Some(0u32);
    let mut q = VecDeque::from([from]);
    while let Some(v) = q.pop_front() {
        for &c in g.successors(v) {
            if dist[c.index()].is_none() {
                dist[c.index()] = Some(dist[v.index()].unwrap() + 1);
                q.push_back(c);
            }
        }
    }
    dist[to.index()]
}

/// Full-evaluation check of the regression-predecessor definition.
pub fn is_regression_predecessor(inst: &BenchmarkInstance, u: &str, v: &str, leaf: &str) -> bool {
    let g = &inst.graph;
    let (Ok(u), Ok(v), Ok(l)) = (g.lookup(u), g.lookup(v), g.lookup(leaf)) else {
        return false;
    };
    g.predecessors(v).contains(&u)
        && inst.is_valid(u)
        && !inst.is_valid(v)
        && bfs(inst, v, l).is_some()
}

pub struct GitFixture {
    pub dir: tempfile::TempDir,
    pub commits: Vec<String>,
}

pub fn git(dir: &Path, args: &[&str]) -> String {
    let out = Command::new("git")
        .arg("-C")
        .arg(dir)
        .args([
            "-c",
            "user.name=t",
            "-c",
            "user.email=t@example.com",
            "-c",
            "commit.gpgsign=false",
        ])
        .args(args)
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "git {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap().trim().to_string()
}

/// `count` linear commits on `main`; the file `status` reads `fail` from
/// commit `bad` onward and `ok` before it.
pub fn linear_repo(count: usize, bad: usize) -> GitFixture {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    git(p, &["init", "-q", "-b", "main"]);
    let mut commits = Vec::new();
    for i in 0..count {
        fs::write(p.join("status"), if i >= bad { "fail\n" } else { "ok\n" }).unwrap();
        fs::write(p.join("counter"), format!("{i}\n")).unwrap();
        git(p, &["add", "status", "counter"]);
        git(p, &["commit", "-q", "-m", &format!("commit {i}")]);
        commits.push(git(p, &["rev-parse", "HEAD"]));
    }
    GitFixture { dir, commits }
}

pub fn fs_read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}
