//! External-command backend: one child process per generation, prompt on
//! stdin, completion on stdout. Lets users wrap any local model runner.

use super::{
    BackendError, GenerationBackend, GenerationRequest, GenerationResponse,
    DEFAULT_REQUEST_TIMEOUT_MS,
};
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

pub struct CommandBackend {
    program: String,
    args: Vec<String>,
    timeout_ms: u64,
    name: String,
}

impl CommandBackend {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> CommandBackend {
        let program = program.into();
        CommandBackend {
            name: format!("cmd:{program}"),
            program,
            args,
            timeout_ms: DEFAULT_REQUEST_TIMEOUT_MS,
        }
    }

    pub fn with_timeout_ms(mut self, timeout_ms: u64) -> CommandBackend {
        self.timeout_ms = timeout_ms;
        self
    }

    /// Split a `--cmd "prog arg1 arg2"` style string on whitespace.
    pub fn from_command_line(command: &str) -> Result<CommandBackend, BackendError> {
        let mut parts = command.split_whitespace().map(str::to_string);
        let program = parts
            .next()
            .ok_or_else(|| BackendError::Config("empty command line".to_string()))?;
        Ok(CommandBackend::new(program, parts.collect()))
    }
}

impl GenerationBackend for CommandBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError> {
        let started = Instant::now();
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| BackendError::ChildProcessFailure {
                status: None,
                stderr: format!("failed to spawn {}: {e}", self.program),
            })?;

        // writer and readers run on their own threads so neither side can
        // deadlock on a full pipe
        let mut stdin = child.stdin.take().expect("piped stdin");
        let prompt = request.prompt.text().to_string();
        let writer = std::thread::spawn(move || {
            let _ = stdin.write_all(prompt.as_bytes());
        });
        let mut stdout_pipe = child.stdout.take().expect("piped stdout");
        let stdout_reader = std::thread::spawn(move || {
            let mut buf = String::new();
            let _ = stdout_pipe.read_to_string(&mut buf);
            buf
        });
        let mut stderr_pipe = child.stderr.take().expect("piped stderr");
        let stderr_reader = std::thread::spawn(move || {
            let mut buf = String::new();
            let _ = stderr_pipe.read_to_string(&mut buf);
            buf
        });

        let deadline = started + Duration::from_millis(self.timeout_ms);
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) => {
                    if Instant::now() >= deadline {
                        let _ = child.kill();
                        let _ = child.wait();
                        return Err(BackendError::Timeout {
                            limit_ms: self.timeout_ms,
                        });
                    }
                    std::thread::sleep(Duration::from_millis(5));
                }
                Err(e) => {
                    return Err(BackendError::ChildProcessFailure {
                        status: None,
                        stderr: format!("wait failed: {e}"),
                    })
                }
            }
        };

        let _ = writer.join();
        let stdout = stdout_reader.join().unwrap_or_default();
        let stderr = stderr_reader.join().unwrap_or_default();

        if !status.success() {
            return Err(BackendError::ChildProcessFailure {
                status: status.code(),
                stderr: tail(&stderr, 2000),
            });
        }

        Ok(GenerationResponse {
            raw_text: stdout,
            backend_name: self.name.clone(),
            latency_ms: started.elapsed().as_millis() as u64,
        })
    }
}

fn tail(text: &str, max: usize) -> String {
    if text.len() <= max {
        return text.to_string();
    }
    let start = text.len() - max;
    let boundary = (start..text.len())
        .find(|i| text.is_char_boundary(*i))
        .unwrap_or(text.len());
    format!("…{}", &text[boundary..])
}
