//! Black-box maps driven through a child process.
//!
//! The child reads one state per line on stdin (comma-separated decimals)
//! and answers each with the next state on one line of stdout.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use koopman_equiv::corpus::IterativeMap;
use koopman_equiv::Error;

struct StepProcess {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl Drop for StepProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl StepProcess {
    fn spawn(cmd: &str) -> Result<Self, Error> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(cmd)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Step(format!("cannot start `{cmd}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(StepProcess { child, stdin, stdout })
    }

    fn step(&mut self, x: &[f64]) -> Result<Vec<f64>, Error> {
        let line: Vec<String> = x.iter().map(f64::to_string).collect();
        writeln!(self.stdin, "{}", line.join(","))
            .and_then(|_| self.stdin.flush())
            .map_err(|e| Error::Step(format!("write to step process failed: {e}")))?;
        let mut reply = String::new();
        let n = self
            .stdout
            .read_line(&mut reply)
            .map_err(|e| Error::Step(format!("read from step process failed: {e}")))?;
        if n == 0 {
            return Err(Error::Step("step process closed its output".into()));
        }
        reply
            .trim()
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Step(format!("unparsable reply `{}`", reply.trim())))
            })
            .collect()
    }
}

pub fn external_map(cmd: &str, dim: usize) -> Result<IterativeMap, Error> {
    let proc = Mutex::new(StepProcess::spawn(cmd)?);
    IterativeMap::custom(format!("external `{cmd}`"), dim, move |x| {
        proc.lock()
            .map_err(|_| Error::Step("step process lock poisoned".into()))?
            .step(x)
    })
}
