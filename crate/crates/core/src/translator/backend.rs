//! Code-generation backends: a deterministic replay backend and an HTTP chat-completion client.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::project::begin_marker;
use super::prompt::{PromptDocument, PromptKind};
use crate::cli::config::BackendConfig;
use crate::error::{Error, Result};

pub trait TranslatorBackend {
    fn translate(&mut self, prompt: &PromptDocument) -> Result<String>;
    fn repair(&mut self, prompt: &PromptDocument) -> Result<String>;
}

/// Code that never compiles (a type error), used for injected faults.
pub const BROKEN_CODE: &str =
    "pub fn ptrkg_injected_fault() -> i32 {\n    \"this is not an integer\"\n}\n";

/// Replay data keyed by code unit id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayFixtures {
    pub translate: BTreeMap<String, String>,
    /// Successive repair answers; the last one repeats.
    #[serde(default)]
    pub repair: BTreeMap<String, Vec<String>>,
    /// Named alternative translations (`id -> tag -> code`).
    #[serde(default)]
    pub variants: BTreeMap<String, BTreeMap<String, String>>,
}

impl ReplayFixtures {
    /// Reads a JSON map, or a directory of `.rs` files each starting with a directive line:
    /// `//@ unit <id>`, `//@ repair <id>` (ordered by file name) or `//@ variant <id> <tag>`.
    pub fn load(path: &Path) -> Result<Self> {
        if path.is_file() {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            return Ok(serde_json::from_str(&text)?);
        }
        let mut files: Vec<_> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "rs"))
            .collect();
        files.sort();
        let mut fx = ReplayFixtures::default();
        for f in files {
            let text = std::fs::read_to_string(&f).map_err(|e| Error::io(&f, e))?;
            let (first, body) = text.split_once('\n').unwrap_or((&text, ""));
            let words: Vec<&str> = first
                .strip_prefix("//@")
                .map(|d| d.split_whitespace().collect())
                .unwrap_or_default();
            let body = body.to_string();
            match words.as_slice() {
                ["unit", id] => {
                    fx.translate.insert(id.to_string(), body);
                }
                ["repair", id] => fx.repair.entry(id.to_string()).or_default().push(body),
                ["variant", id, tag] => {
                    fx.variants
                        .entry(id.to_string())
                        .or_default()
                        .insert(tag.to_string(), body);
                }
                _ => {
                    return Err(Error::Config(format!(
                        "{}: missing `//@ unit|repair|variant` directive",
                        f.display()
                    )))
                }
            }
        }
        Ok(fx)
    }

    /// Uses variant `tag` of `id` as its translation (e.g. a known-broken first attempt).
    pub fn use_variant(&mut self, id: &str, tag: &str) -> Result<()> {
        let code = self
            .variants
            .get(id)
            .and_then(|v| v.get(tag))
            .ok_or_else(|| Error::NotFound(format!("variant {tag} of {id}")))?;
        self.translate.insert(id.to_string(), code.clone());
        Ok(())
    }
}

/// How a replayed unit misbehaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fault {
    /// The first answer is broken; repairs stay broken until attempt `fixed_after` (1-based),
    /// which returns the fixture. `None` never fixes.
    Broken { fixed_after: Option<u32> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendCall {
    pub kind: PromptKind,
    pub units: Vec<String>,
}

/// Deterministic backend answering from [`ReplayFixtures`], with scriptable faults.
#[derive(Debug, Clone, Default)]
pub struct ReplayBackend {
    pub fixtures: ReplayFixtures,
    pub faults: BTreeMap<String, Fault>,
    /// Every answer is [`BROKEN_CODE`].
    pub adversarial: bool,
    pub calls: Vec<BackendCall>,
    repairs: BTreeMap<String, u32>,
}

impl ReplayBackend {
    pub fn new(fixtures: ReplayFixtures) -> Self {
        ReplayBackend {
            fixtures,
            ..Default::default()
        }
    }

    /// A backend whose every answer fails to compile.
    pub fn adversarial() -> Self {
        ReplayBackend {
            adversarial: true,
            ..Default::default()
        }
    }

    pub fn with_faults(mut self, faults: impl IntoIterator<Item = (String, Fault)>) -> Self {
        self.faults.extend(faults);
        self
    }

    pub fn repair_calls(&self, unit: &str) -> usize {
        self.calls
            .iter()
            .filter(|c| c.kind == PromptKind::Correction && c.units.iter().any(|u| u == unit))
            .count()
    }

    fn fault(&self, units: &[String]) -> Option<Fault> {
        units.iter().find_map(|u| self.faults.get(u).copied())
    }

    fn faithful(&self, units: &[String]) -> Result<String> {
        let mut out = String::new();
        for u in units {
            let code = self
                .fixtures
                .translate
                .get(u)
                .ok_or_else(|| Error::Backend(format!("no replay fixture for {u}")))?;
            if units.len() > 1 {
                out.push_str(&begin_marker(u));
                out.push('\n');
            }
            out.push_str(code);
            if !out.ends_with('\n') {
                out.push('\n');
            }
        }
        Ok(out)
    }
}

impl TranslatorBackend for ReplayBackend {
    fn translate(&mut self, prompt: &PromptDocument) -> Result<String> {
        self.calls.push(BackendCall {
            kind: PromptKind::Translation,
            units: prompt.unit_ids.clone(),
        });
        if self.adversarial || self.fault(&prompt.unit_ids).is_some() {
            return Ok(BROKEN_CODE.to_string());
        }
        self.faithful(&prompt.unit_ids)
    }

    fn repair(&mut self, prompt: &PromptDocument) -> Result<String> {
        self.calls.push(BackendCall {
            kind: PromptKind::Correction,
            units: prompt.unit_ids.clone(),
        });
        if self.adversarial {
            return Ok(BROKEN_CODE.to_string());
        }
        let key = prompt.unit_ids.join("+");
        let attempt = {
            let n = self.repairs.entry(key).or_insert(0);
            *n += 1;
            *n
        };
        if let Some(Fault::Broken { fixed_after }) = self.fault(&prompt.unit_ids) {
            return match fixed_after {
                Some(k) if attempt >= k => self.faithful(&prompt.unit_ids),
                _ => Ok(BROKEN_CODE.to_string()),
            };
        }
        let scripted: Vec<&String> = prompt
            .unit_ids
            .iter()
            .filter_map(|u| self.fixtures.repair.get(u))
            .filter_map(|answers| answers.get((attempt as usize - 1).min(answers.len() - 1)))
            .collect();
        if scripted.len() == prompt.unit_ids.len() && prompt.unit_ids.len() == 1 {
            return Ok(scripted[0].clone());
        }
        self.faithful(&prompt.unit_ids)
    }
}

/// Chat-completion client. The bearer credential is read from the environment variable
/// named in the configuration.
pub struct HttpBackend {
    client: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    temperature: f64,
    retries: u32,
    credential: String,
}

const SYSTEM_MESSAGE: &str =
    "You are a careful C-to-Rust translator. Answer with Rust code in a single ```rust block.";

impl HttpBackend {
    pub fn from_config(cfg: &BackendConfig) -> Result<Self> {
        let credential = std::env::var(&cfg.credential_env).map_err(|_| {
            Error::Config(format!(
                "credential environment variable {} is not set",
                cfg.credential_env
            ))
        })?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| Error::Backend(e.to_string()))?;
        Ok(HttpBackend {
            client,
            endpoint: cfg.endpoint.clone(),
            model: cfg.model.clone(),
            temperature: cfg.temperature,
            retries: cfg.retries,
            credential,
        })
    }

    fn complete(&self, prompt: &PromptDocument) -> Result<String> {
        let body = serde_json::json!({
            "model": self.model,
            "temperature": self.temperature,
            "messages": [
                {"role": "system", "content": SYSTEM_MESSAGE},
                {"role": "user", "content": prompt.render()},
            ],
        });
        let mut last = String::new();
        for attempt in 0..=self.retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(500 << attempt.min(6)));
            }
            let resp = self
                .client
                .post(&self.endpoint)
                .bearer_auth(&self.credential)
                .json(&body)
                .send();
            match resp {
                Ok(r) if r.status().is_success() => {
                    let v: serde_json::Value =
                        r.json().map_err(|e| Error::Backend(e.to_string()))?;
                    let content = v
                        .pointer("/choices/0/message/content")
                        .and_then(|c| c.as_str())
                        .ok_or_else(|| {
                            Error::Backend("response has no choices[0].message.content".into())
                        })?;
                    return Ok(extract_code(content));
                }
                Ok(r) => {
                    let status = r.status();
                    last = format!("HTTP {status}");
                    if !(status.is_server_error() || status.as_u16() == 429) {
                        break;
                    }
                }
                Err(e) => last = e.to_string(),
            }
            tracing::warn!(attempt, error = %last, "backend request failed");
        }
        Err(Error::Backend(last))
    }
}

impl TranslatorBackend for HttpBackend {
    fn translate(&mut self, prompt: &PromptDocument) -> Result<String> {
        self.complete(prompt)
    }

    fn repair(&mut self, prompt: &PromptDocument) -> Result<String> {
        self.complete(prompt)
    }
}

/// Concatenates fenced code blocks (preferring ```rust ones); unfenced replies are taken whole.
pub fn extract_code(reply: &str) -> String {
    let mut blocks: Vec<(bool, String)> = Vec::new();
    let mut cur: Option<(bool, String)> = None;
    for line in reply.lines() {
        let t = line.trim_start();
        if let Some(info) = t.strip_prefix("```") {
            match cur.take() {
                Some(b) => blocks.push(b),
                None => {
                    let lang = info.trim().to_ascii_lowercase();
                    cur = Some((lang == "rust" || lang == "rs", String::new()));
                }
            }
            continue;
        }
        if let Some((_, b)) = cur.as_mut() {
            b.push_str(line);
            b.push('\n');
        }
    }
    if blocks.is_empty() {
        return reply.trim().to_string() + "\n";
    }
    let rusty: BTreeSet<usize> = (0..blocks.len()).filter(|&i| blocks[i].0).collect();
    blocks
        .into_iter()
        .enumerate()
        .filter(|(i, _)| rusty.is_empty() || rusty.contains(i))
        .map(|(_, (_, b))| b)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_blocks_are_extracted() {
        let reply = "Here:\n```rust\npub fn a() {}\n```\nand\n```\nnot rust\n```\n";
        assert_eq!(extract_code(reply), "pub fn a() {}\n");
        assert_eq!(extract_code("pub fn b() {}"), "pub fn b() {}\n");
    }

    #[test]
    fn missing_credential_is_a_config_error() {
        let cfg = BackendConfig {
            credential_env: "PTRKG_TEST_SURELY_UNSET_VAR".into(),
            ..Default::default()
        };
        assert!(matches!(HttpBackend::from_config(&cfg), Err(Error::Config(_))));
    }
}
