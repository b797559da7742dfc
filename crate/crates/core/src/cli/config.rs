//! Pipeline configuration: defaults, overridden by a TOML file, overridden by command-line flags.
//!
//! Recognized keys (all optional):
//!
//! ```toml
//! max_repair_iterations = 5
//! output = "out"
//! force = false
//! compile_check = ["cargo", "check", "--message-format=json", "--quiet"]
//!
//! [preprocessor]
//! command = "clang"
//! flags = ["-E"]
//!
//! [backend]
//! kind = "mock"            # or "http"
//! fixtures = "fixtures/quadtree_rs" # mock only: directory of replay answers
//! endpoint = "https://api.openai.com/v1/chat/completions"
//! model = "gpt-4o"
//! credential_env = "OPENAI_API_KEY"
//! temperature = 0.0
//! timeout_secs = 120
//! retries = 3
//!
//! [analysis]
//! allocators = ["malloc", "calloc", "realloc", "strdup"]
//! deallocators = ["free"]
//! std_writers = ["strcpy", "strcat", "memset", "memcpy", "memmove", "sprintf", "snprintf", "fread"]
//!
//! [report]
//! lint_command = ["cargo", "clippy", "--message-format=json", "--quiet"]
//! unsafe_command = ["cargo", "geiger", "--output-format", "Json", "--quiet"]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// File looked up in the working directory when no `--config` is given.
pub const DEFAULT_CONFIG_FILE: &str = "ptrkg.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub preprocessor: PreprocessorConfig,
    pub compile_check: Vec<String>,
    pub backend: BackendConfig,
    pub max_repair_iterations: u32,
    pub analysis: AnalysisConfig,
    pub output: PathBuf,
    pub force: bool,
    pub report: ReportConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            preprocessor: PreprocessorConfig::default(),
            compile_check: ["cargo", "check", "--message-format=json", "--quiet"]
                .map(String::from)
                .to_vec(),
            backend: BackendConfig::default(),
            max_repair_iterations: 5,
            analysis: AnalysisConfig::default(),
            output: PathBuf::from("out"),
            force: false,
            report: ReportConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessorConfig {
    pub command: String,
    pub flags: Vec<String>,
}

impl Default for PreprocessorConfig {
    fn default() -> Self {
        PreprocessorConfig {
            command: "clang".into(),
            flags: vec!["-E".into()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Mock,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub fixtures: Option<PathBuf>,
    pub endpoint: String,
    pub model: String,
    pub credential_env: String,
    pub temperature: f64,
    pub timeout_secs: u64,
    pub retries: u32,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Mock,
            fixtures: None,
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4o".into(),
            credential_env: "OPENAI_API_KEY".into(),
            temperature: 0.0,
            timeout_secs: 120,
            retries: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub allocators: Vec<String>,
    pub deallocators: Vec<String>,
    pub std_writers: Vec<String>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let strings = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        AnalysisConfig {
            allocators: strings(&["malloc", "calloc", "realloc", "strdup"]),
            deallocators: strings(&["free"]),
            std_writers: strings(&[
                "strcpy", "strcat", "memset", "memcpy", "memmove", "sprintf", "snprintf", "fread",
            ]),
        }
    }
}

impl AnalysisConfig {
    pub fn is_allocator(&self, name: &str) -> bool {
        self.allocators.iter().any(|a| a == name)
    }

    pub fn is_deallocator(&self, name: &str) -> bool {
        self.deallocators.iter().any(|a| a == name)
    }

    pub fn is_std_writer(&self, name: &str) -> bool {
        self.std_writers.iter().any(|a| a == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub lint_command: Vec<String>,
    pub unsafe_command: Vec<String>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            lint_command: ["cargo", "clippy", "--message-format=json", "--quiet"]
                .map(String::from)
                .to_vec(),
            unsafe_command: ["cargo", "geiger", "--output-format", "Json", "--quiet"]
                .map(String::from)
                .to_vec(),
        }
    }
}

/// Values given on the command line; `None` leaves the file/default value in place.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub output: Option<PathBuf>,
    pub backend: Option<BackendKind>,
    pub max_repairs: Option<u32>,
    pub force: bool,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads `path` if given (it must exist), else `ptrkg.toml` from the working directory
    /// if present, else the defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let path = match path {
            Some(p) => Some(p.to_path_buf()),
            None => {
                let p = PathBuf::from(DEFAULT_CONFIG_FILE);
                p.exists().then_some(p)
            }
        };
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                Self::from_toml_str(&text)
            }
            None => Ok(Self::default()),
        }
    }

    pub fn apply(mut self, overrides: &ConfigOverrides) -> Result<Self> {
        if let Some(o) = &overrides.output {
            self.output = o.clone();
        }
        if let Some(b) = overrides.backend {
            self.backend.kind = b;
        }
        if let Some(n) = overrides.max_repairs {
            self.max_repair_iterations = n;
        }
        if overrides.force {
            self.force = true;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_repair_iterations < 1 {
            return Err(Error::Config("max_repair_iterations must be at least 1".into()));
        }
        if self.compile_check.is_empty() {
            return Err(Error::Config("compile_check command is empty".into()));
        }
        if self.preprocessor.command.trim().is_empty() {
            return Err(Error::Config("preprocessor command is empty".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_documented_values() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.max_repair_iterations, 5);
        assert_eq!(cfg.backend.temperature, 0.0);
        assert_eq!(cfg.analysis.allocators, ["malloc", "calloc", "realloc", "strdup"]);
        assert_eq!(cfg.analysis.deallocators, ["free"]);
        assert!(cfg.analysis.is_std_writer("memcpy"));
    }

    #[test]
    fn three_layer_precedence() {
        let file = r#"
            max_repair_iterations = 3
            output = "from-file"
            [backend]
            kind = "http"
            model = "m1"
        "#;
        let from_file = PipelineConfig::from_toml_str(file).unwrap();
        // file beats defaults
        assert_eq!(from_file.max_repair_iterations, 3);
        assert_eq!(from_file.backend.kind, BackendKind::Http);
        assert_eq!(from_file.backend.model, "m1");
        // untouched keys keep defaults
        assert_eq!(from_file.preprocessor.command, "clang");

        let flags = ConfigOverrides {
            output: Some("from-flag".into()),
            backend: Some(BackendKind::Mock),
            max_repairs: None,
            force: true,
        };
        let merged = from_file.apply(&flags).unwrap();
        assert_eq!(merged.output, PathBuf::from("from-flag"));
        assert_eq!(merged.backend.kind, BackendKind::Mock);
        assert_eq!(merged.max_repair_iterations, 3);
        assert!(merged.force);
    }

    #[test]
    fn zero_repairs_rejected() {
        let err = PipelineConfig::from_toml_str("max_repair_iterations = 0").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = PipelineConfig::default()
            .apply(&ConfigOverrides {
                max_repairs: Some(0),
                ..Default::default()
            })
            .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(PipelineConfig::from_toml_str("bogus = 1").is_err());
    }
}
