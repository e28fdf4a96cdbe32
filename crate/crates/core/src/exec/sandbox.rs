//! Child processes under OS resource limits.
//!
//! Each child runs in its own session so the whole process group can be
//! killed on timeout or when it overruns the output cap.

use std::io::{Read, Write};
use std::os::unix::process::CommandExt;
use std::path::Path;
use std::process::{Command, ExitStatus, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use crate::{Error, Result};

const STDERR_KEEP: usize = 64 * 1024;

#[derive(Debug, Clone)]
pub(crate) struct Limits {
    pub timeout: Duration,
    pub memory: Option<u64>,
    pub cpu_seconds: Option<u64>,
    pub max_output: u64,
}

#[derive(Debug)]
pub(crate) struct Outcome {
    pub status: Option<ExitStatus>,
    pub timed_out: bool,
    pub output_exceeded: bool,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub wall: Duration,
}

impl Outcome {
    pub fn success(&self) -> bool {
        !self.timed_out && !self.output_exceeded && self.status.is_some_and(|s| s.success())
    }
}

fn set_limit(resource: libc::__rlimit_resource_t, value: u64) -> std::io::Result<()> {
    let lim = libc::rlimit { rlim_cur: value as libc::rlim_t, rlim_max: value as libc::rlim_t };
    // SAFETY: plain syscall on a stack value.
    if unsafe { libc::setrlimit(resource, &lim) } != 0 {
        return Err(std::io::Error::last_os_error());
    }
    Ok(())
}

fn kill_group(pgid: i32) {
    // SAFETY: signalling a process group we created; errors (already gone) are ignored.
    unsafe {
        libc::killpg(pgid, libc::SIGKILL);
    }
}

/// Runs `argv` in `cwd`, feeding `stdin`, until exit or a limit trips.
///
/// Errors only when the process cannot be started; anything the child does
/// is reported through [`Outcome`].
pub(crate) fn run(argv: &[String], cwd: &Path, stdin: &[u8], limits: &Limits) -> Result<Outcome> {
    let (program, args) = argv.split_first().ok_or_else(|| Error::Sandbox("empty command line".into()))?;
    let mut cmd = Command::new(program);
    cmd.args(args)
        .current_dir(cwd)
        .env_clear()
        .env("PATH", std::env::var_os("PATH").unwrap_or_else(|| "/usr/bin:/bin".into()))
        .env("HOME", cwd)
        .env("LANG", "C.UTF-8")
        .env("PYTHONHASHSEED", "0")
        .env("PYTHONIOENCODING", "utf-8")
        .env("PYTHONDONTWRITEBYTECODE", "1")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    let memory = limits.memory;
    let cpu = limits.cpu_seconds;
    let fsize = limits.max_output;
    // SAFETY: only async-signal-safe calls between fork and exec.
    unsafe {
        cmd.pre_exec(move || {
            if libc::setsid() < 0 {
                return Err(std::io::Error::last_os_error());
            }
            set_limit(libc::RLIMIT_CORE, 0)?;
            set_limit(libc::RLIMIT_FSIZE, fsize)?;
            if let Some(bytes) = memory {
                set_limit(libc::RLIMIT_AS, bytes)?;
            }
            if let Some(secs) = cpu {
                set_limit(libc::RLIMIT_CPU, secs)?;
            }
            Ok(())
        });
    }

    let start = Instant::now();
    let mut child = cmd.spawn().map_err(|e| Error::Sandbox(format!("cannot start `{program}`: {e}")))?;
    let pgid = child.id() as i32;

    let mut child_stdin = child.stdin.take().expect("piped stdin");
    let input = stdin.to_vec();
    let writer = thread::spawn(move || {
        // A child that exits without reading its input closes the pipe early.
        let _ = child_stdin.write_all(&input);
    });

    let exceeded = Arc::new(AtomicBool::new(false));
    let mut child_stdout = child.stdout.take().expect("piped stdout");
    let cap = limits.max_output;
    let flag = Arc::clone(&exceeded);
    let reader = thread::spawn(move || {
        let mut out = Vec::new();
        let mut buf = [0u8; 64 * 1024];
        loop {
            match child_stdout.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    if (out.len() + n) as u64 > cap {
                        flag.store(true, Ordering::SeqCst);
                        kill_group(pgid);
                        break;
                    }
                    out.extend_from_slice(&buf[..n]);
                }
            }
        }
        out
    });

    let mut child_stderr = child.stderr.take().expect("piped stderr");
    let err_reader = thread::spawn(move || {
        let mut kept = Vec::new();
        let mut buf = [0u8; 16 * 1024];
        loop {
            match child_stderr.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    let room = STDERR_KEEP.saturating_sub(kept.len());
                    kept.extend_from_slice(&buf[..n.min(room)]);
                }
            }
        }
        kept
    });

    let mut timed_out = false;
    let mut pause = Duration::from_millis(1);
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) => {}
            Err(e) => {
                kill_group(pgid);
                return Err(Error::Sandbox(format!("waiting for `{program}`: {e}")));
            }
        }
        if start.elapsed() >= limits.timeout {
            kill_group(pgid);
            timed_out = true;
            break child.wait().ok();
        }
        thread::sleep(pause.min(limits.timeout.saturating_sub(start.elapsed())));
        pause = (pause * 2).min(Duration::from_millis(20));
    };
    let wall = start.elapsed();
    // Reap anything the child left behind holding the pipes open.
    kill_group(pgid);

    let stdout = reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();
    let _ = writer.join();
    Ok(Outcome { status, timed_out, output_exceeded: exceeded.load(Ordering::SeqCst), stdout, stderr, wall })
}

/// Counting gate that bounds how many compilers run at once.
pub(crate) struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

pub(crate) struct Permit<'a>(&'a Gate);

impl Gate {
    pub const fn new(permits: usize) -> Self {
        Self { free: Mutex::new(permits), cv: Condvar::new() }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn limits(timeout_ms: u64, max_output: u64) -> Limits {
        Limits { timeout: Duration::from_millis(timeout_ms), memory: Some(1 << 30), cpu_seconds: Some(5), max_output }
    }

    fn sh(script: &str) -> Vec<String> {
        vec!["/bin/sh".into(), "-c".into(), script.into()]
    }

    #[test]
    fn captures_output_and_stdin() {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&sh("cat; echo err >&2"), dir.path(), b"hello", &limits(5000, 1024)).unwrap();
        assert!(out.success());
        assert_eq!(out.stdout, b"hello");
        assert_eq!(out.stderr, b"err\n");
    }

    #[test]
    fn kills_on_timeout() {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&sh("sleep 30"), dir.path(), b"", &limits(300, 1024)).unwrap();
        assert!(out.timed_out);
        assert!(out.wall >= Duration::from_millis(300));
        assert!(out.wall < Duration::from_secs(10));
    }

    #[test]
    fn kills_on_output_flood() {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&sh("yes"), dir.path(), b"", &limits(10_000, 4096)).unwrap();
        assert!(out.output_exceeded);
        assert!(!out.success());
    }

    #[test]
    fn nonzero_exit() {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&sh("exit 3"), dir.path(), b"", &limits(5000, 1024)).unwrap();
        assert_eq!(out.status.and_then(|s| s.code()), Some(3));
        assert!(run(&["/no/such/binary".to_string()], dir.path(), b"", &limits(100, 10)).is_err());
    }
}
