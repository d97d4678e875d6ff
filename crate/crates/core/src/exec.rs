//! Subprocess execution with wall-clock and memory limits.

use std::io::{Read, Write};
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::process::{Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub wall: Duration,
    /// Address-space cap in bytes; `None` leaves it unlimited.
    pub memory: Option<u64>,
}

impl Default for Limits {
    /// 2 s wall clock, 256 MiB.
    fn default() -> Self {
        Limits {
            wall: Duration::from_secs(2),
            memory: Some(256 << 20),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub status: Option<ExitStatus>,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub timed_out: bool,
    pub duration: Duration,
}

impl RunOutput {
    pub fn code(&self) -> Option<i32> {
        self.status.and_then(|s| s.code())
    }

    pub fn signal(&self) -> Option<i32> {
        self.status.and_then(|s| s.signal())
    }

    pub fn success(&self) -> bool {
        !self.timed_out && self.status.map(|s| s.success()).unwrap_or(false)
    }

    pub fn stderr_text(&self) -> String {
        String::from_utf8_lossy(&self.stderr).into_owned()
    }
}

/// How the memory cap is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemoryEnforcement {
    /// `RLIMIT_AS` on the child.
    AddressSpace,
    /// Left to the sanitizer runtime (shadow memory breaks `RLIMIT_AS`).
    Sanitizer,
}

/// Runs `cmd` feeding `stdin`, killing its whole process group once the
/// wall limit passes.
pub fn run(
    mut cmd: Command,
    stdin: &[u8],
    limits: &Limits,
    enforcement: MemoryEnforcement,
) -> std::io::Result<RunOutput> {
    cmd.stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0);
    match (limits.memory, enforcement) {
        (Some(bytes), MemoryEnforcement::AddressSpace) => {
            // SAFETY: setrlimit is async-signal-safe; nothing is allocated
            // between fork and exec.
            unsafe {
                cmd.pre_exec(move || {
                    let lim = libc::rlimit {
                        rlim_cur: bytes as libc::rlim_t,
                        rlim_max: bytes as libc::rlim_t,
                    };
                    if libc::setrlimit(libc::RLIMIT_AS, &lim) != 0 {
                        return Err(std::io::Error::last_os_error());
                    }
                    Ok(())
                });
            }
        }
        (Some(bytes), MemoryEnforcement::Sanitizer) => {
            let mb = (bytes >> 20).max(1);
            let mut asan = std::env::var("ASAN_OPTIONS").unwrap_or_default();
            if !asan.is_empty() {
                asan.push(':');
            }
            asan.push_str(&format!("hard_rss_limit_mb={mb}:allocator_may_return_null=0"));
            cmd.env("ASAN_OPTIONS", asan);
        }
        (None, _) => {}
    }

    let start = Instant::now();
    let mut child = cmd.spawn()?;
    let pid = child.id() as i32;

    let mut child_in = child.stdin.take().expect("piped stdin");
    let input = stdin.to_vec();
    let writer = thread::spawn(move || {
        // The child may exit without reading; a broken pipe is expected.
        let _ = child_in.write_all(&input);
    });
    let mut out = child.stdout.take().expect("piped stdout");
    let mut err = child.stderr.take().expect("piped stderr");
    let out_reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = out.read_to_end(&mut buf);
        buf
    });
    let err_reader = thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = err.read_to_end(&mut buf);
        buf
    });

    let mut timed_out = false;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break Some(status);
        }
        if start.elapsed() >= limits.wall {
            timed_out = true;
            // SAFETY: plain syscall on a process group we created.
            unsafe {
                libc::kill(-pid, libc::SIGKILL);
            }
            let _ = child.kill();
            break child.wait().ok();
        }
        thread::sleep(Duration::from_millis(2));
    };
    let duration = start.elapsed();
    // Reap stragglers left in the group so they cannot hold the pipes open.
    // SAFETY: as above; ESRCH is harmless.
    unsafe {
        libc::kill(-pid, libc::SIGKILL);
    }
    let _ = writer.join();
    let stdout = out_reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();
    Ok(RunOutput {
        status,
        stdout,
        stderr,
        timed_out,
        duration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn captures_output() {
        let mut cmd = Command::new("sh");
        cmd.args(["-c", "cat; echo err >&2; exit 3"]);
        let out = run(cmd, b"hello", &Limits::default(), MemoryEnforcement::AddressSpace).unwrap();
        assert_eq!(out.stdout, b"hello");
        assert_eq!(out.stderr, b"err\n");
        assert_eq!(out.code(), Some(3));
        assert!(!out.timed_out);
    }

    #[test]
    fn kills_on_timeout() {
        let mut cmd = Command::new("sh");
        cmd.args(["-c", "sleep 5 & sleep 5"]);
        let limits = Limits {
            wall: Duration::from_millis(200),
            memory: None,
        };
        let out = run(cmd, b"", &limits, MemoryEnforcement::AddressSpace).unwrap();
        assert!(out.timed_out);
        assert!(out.duration < Duration::from_secs(3));
    }

    #[test]
    fn large_output_does_not_deadlock() {
        let mut cmd = Command::new("sh");
        cmd.args(["-c", "head -c 1000000 /dev/zero"]);
        let out = run(cmd, b"", &Limits::default(), MemoryEnforcement::AddressSpace).unwrap();
        assert_eq!(out.stdout.len(), 1_000_000);
    }
}
