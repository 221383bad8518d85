use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::Duration;

use wait_timeout::ChildExt;

use super::{OracleError, VerdictSource};
use crate::dag::VertexId;
use crate::vcs::{self, RepoHandle};

/// How to run the test for one commit.
#[derive(Debug, Clone)]
pub struct CommandSpec {
    pub workdir: PathBuf,
    pub test_command: Vec<String>,
    pub timeout: Duration,
}

impl CommandSpec {
    pub fn new(
        workdir: impl Into<PathBuf>,
        test_command: Vec<String>,
        timeout: Duration,
    ) -> Result<Self, String> {
        if test_command.is_empty() {
            return Err("test command is empty".into());
        }
        if timeout.is_zero() {
            return Err("timeout must be positive".into());
        }
        Ok(CommandSpec {
            workdir: workdir.into(),
            test_command,
            timeout,
        })
    }
}

/// Checks out each commit and runs the test command there.
///
/// Exit status 0 means valid, 1-127 except 125 invalid. Status 125, any
/// status above 127 and death by signal abort the run.
pub struct CommandSource {
    spec: CommandSpec,
    repo: Option<RepoHandle>,
    force_checkout: bool,
}

impl CommandSource {
    /// `repo` is checked out before each run; `None` runs in place.
    pub fn new(spec: CommandSpec, repo: Option<RepoHandle>) -> Self {
        CommandSource {
            spec,
            repo,
            force_checkout: false,
        }
    }

    pub fn force_checkout(mut self, force: bool) -> Self {
        self.force_checkout = force;
        self
    }

    fn run_test(&self, id: &VertexId) -> Result<bool, OracleError> {
        let (program, args) = self
            .spec
            .test_command
            .split_first()
            .expect("validated non-empty");
        // Test output goes to stderr so our stdout stays machine-readable.
        let mut child = Command::new(program)
            .args(args)
            .current_dir(&self.spec.workdir)
            .env("REGPRED_COMMIT", id.as_str())
            .stdin(Stdio::null())
            .stdout(Stdio::from(std::io::stderr()))
            .spawn()
            .map_err(OracleError::Spawn)?;
        let status = match child.wait_timeout(self.spec.timeout)? {
            Some(status) => status,
            None => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(OracleError::CommandTimeout {
                    commit: id.to_string(),
                    seconds: self.spec.timeout.as_secs(),
                });
            }
        };
        match status.code() {
            Some(0) => Ok(true),
            Some(125) => Err(OracleError::CommandAbort {
                commit: id.to_string(),
                status: "125".into(),
            }),
            Some(1..=127) => Ok(false),
            _ => Err(OracleError::CommandAbort {
                commit: id.to_string(),
                status: status.to_string(),
            }),
        }
    }
}

impl VerdictSource for CommandSource {
    fn evaluate(&mut self, id: &VertexId) -> Result<bool, OracleError> {
        if let Some(repo) = &self.repo {
            vcs::checkout(repo, id, self.force_checkout).map_err(|e| {
                OracleError::CheckoutFailure {
                    commit: id.to_string(),
                    message: e.to_string(),
                }
            })?;
        }
        self.run_test(id)
    }
}
