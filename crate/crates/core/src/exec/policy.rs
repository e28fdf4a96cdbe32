use std::process::Command;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::{CodeLanguage, Error, Result};

/// Resource limits applied to every compile and test process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SandboxPolicy {
    /// Wall-clock limit per test, seconds.
    pub per_test_timeout: f64,
    /// Address-space limit, bytes.
    pub memory_limit: u64,
    /// Cap on captured stdout, bytes.
    pub max_output: u64,
    /// Wall-clock limit for the compiler, seconds.
    pub compile_timeout: f64,
}

impl Default for SandboxPolicy {
    fn default() -> Self {
        Self { per_test_timeout: 10.0, memory_limit: 1 << 30, max_output: 8 << 20, compile_timeout: 60.0 }
    }
}

impl SandboxPolicy {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.per_test_timeout) || !positive(self.compile_timeout) {
            return Err(Error::Validation("sandbox timeouts must be positive".into()));
        }
        if self.memory_limit == 0 || self.max_output == 0 {
            return Err(Error::Validation("sandbox memory and output limits must be positive".into()));
        }
        Ok(())
    }

    pub fn test_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.per_test_timeout)
    }

    pub fn compile_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.compile_timeout)
    }
}

/// Compiler and interpreter invocations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Toolchain {
    pub cxx: String,
    pub cxx_flags: Vec<String>,
    pub python: String,
    pub python_flags: Vec<String>,
}

impl Default for Toolchain {
    fn default() -> Self {
        Self {
            cxx: "g++".into(),
            cxx_flags: vec!["-std=c++17".into(), "-O2".into()],
            python: "python3".into(),
            python_flags: vec!["-I".into()],
        }
    }
}

impl Toolchain {
    /// Human-readable command line for a language, stored with results.
    pub fn describe(&self, language: CodeLanguage) -> String {
        match language {
            CodeLanguage::Cpp => format!("{} {}", self.cxx, self.cxx_flags.join(" ")),
            CodeLanguage::Python => format!("{} {}", self.python, self.python_flags.join(" ")),
        }
    }

    /// First line of `--version` for the compiler and the interpreter.
    pub fn versions(&self) -> Result<Vec<(String, String)>> {
        [&self.cxx, &self.python]
            .into_iter()
            .map(|tool| {
                let out = Command::new(tool)
                    .arg("--version")
                    .output()
                    .map_err(|e| Error::Sandbox(format!("cannot run `{tool} --version`: {e}")))?;
                let text = if out.stdout.is_empty() { out.stderr } else { out.stdout };
                let line = String::from_utf8_lossy(&text).lines().next().unwrap_or("").trim().to_string();
                Ok((tool.clone(), line))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let p = SandboxPolicy::default();
        assert_eq!(p.per_test_timeout, 10.0);
        assert_eq!(p.memory_limit, 1024 * 1024 * 1024);
        assert_eq!(p.max_output, 8 * 1024 * 1024);
        assert_eq!(p.compile_timeout, 60.0);
        p.validate().unwrap();
        let bad = SandboxPolicy { per_test_timeout: 0.0, ..p };
        assert!(bad.validate().is_err());
        assert_eq!(Toolchain::default().describe(CodeLanguage::Cpp), "g++ -std=c++17 -O2");
    }
}
