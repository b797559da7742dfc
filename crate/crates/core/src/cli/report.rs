//! Pipeline report: per-unit outcomes, compile ratio, lint and unsafe counts.

use std::path::Path;
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::depgraph::UnitKind;
use crate::error::{Error, Result};

pub const REPORT_SCHEMA_VERSION: &str = "ptrkg-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnitStatus {
    Translated,
    Stubbed,
    Dropped,
    /// Neither a translation nor a stub compiled; nothing was integrated.
    Abandoned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitReport {
    pub id: String,
    pub kind: UnitKind,
    pub status: UnitStatus,
    /// Position of the translation unit in the plan; `None` for dropped units.
    pub translation_unit: Option<usize>,
    pub repair_cycles: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A measurement that may be missing because its tool is not installed or failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Measured<T> {
    Available { value: T },
    Unavailable { reason: String },
}

impl<T> Measured<T> {
    pub fn not_measured() -> Self {
        Measured::Unavailable {
            reason: "not measured".into(),
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Measured::Available { value } => Some(value),
            Measured::Unavailable { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintCounts {
    pub style: usize,
    pub complexity: usize,
    pub correctness: usize,
    pub performance: usize,
}

impl LintCounts {
    pub fn total(&self) -> usize {
        self.style + self.complexity + self.correctness + self.performance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema_version: String,
    pub units: Vec<UnitReport>,
    pub translated_func_count: usize,
    pub compiled_func_count: usize,
    pub compiled_ratio: f64,
    /// Whether the generated project passed the compile check at the end of the run.
    pub final_check_green: bool,
    pub lint: Measured<LintCounts>,
    pub unsafe_usages: Measured<u64>,
}

impl PipelineReport {
    pub fn new(units: Vec<UnitReport>, final_check_green: bool) -> Self {
        let funcs = || units.iter().filter(|u| u.kind == UnitKind::Func);
        let translated = funcs().filter(|u| u.status != UnitStatus::Dropped).count();
        let compiled = funcs().filter(|u| u.status == UnitStatus::Translated).count();
        PipelineReport {
            schema_version: REPORT_SCHEMA_VERSION.into(),
            compiled_ratio: compiled_ratio(compiled, translated),
            translated_func_count: translated,
            compiled_func_count: compiled,
            units,
            final_check_green,
            lint: Measured::not_measured(),
            unsafe_usages: Measured::not_measured(),
        }
    }

    pub fn status_of(&self, id: &str) -> Option<UnitStatus> {
        self.units.iter().find(|u| u.id == id).map(|u| u.status)
    }

    pub fn count(&self, status: UnitStatus) -> usize {
        self.units.iter().filter(|u| u.status == status).count()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let r: PipelineReport = serde_json::from_str(&text)?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "report schema {} is not {REPORT_SCHEMA_VERSION}",
                r.schema_version
            )));
        }
        Ok(r)
    }

    /// Short human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "units: {} translated, {} stubbed, {} dropped, {} abandoned\n\
             functions compiled: {}/{} ({:.1}%)\nfinal check: {}\n",
            self.count(UnitStatus::Translated),
            self.count(UnitStatus::Stubbed),
            self.count(UnitStatus::Dropped),
            self.count(UnitStatus::Abandoned),
            self.compiled_func_count,
            self.translated_func_count,
            self.compiled_ratio * 100.0,
            if self.final_check_green { "green" } else { "red" },
        );
        match &self.lint {
            Measured::Available { value: l } => s.push_str(&format!(
                "lints: style {} complexity {} correctness {} perf {} (total {})\n",
                l.style,
                l.complexity,
                l.correctness,
                l.performance,
                l.total()
            )),
            Measured::Unavailable { reason } => s.push_str(&format!("lints: unavailable ({reason})\n")),
        }
        match &self.unsafe_usages {
            Measured::Available { value } => s.push_str(&format!("unsafe usages: {value}\n")),
            Measured::Unavailable { reason } => {
                s.push_str(&format!("unsafe usages: unavailable ({reason})\n"))
            }
        }
        s
    }
}

/// Compiled over translated functions; an empty denominator counts as complete.
pub fn compiled_ratio(compiled: usize, translated: usize) -> f64 {
    if translated == 0 {
        1.0
    } else {
        compiled as f64 / translated as f64
    }
}

fn run(cmd: &[String], extra: &[&str], dir: &Path) -> std::result::Result<String, String> {
    let (prog, args) = cmd.split_first().ok_or("empty command")?;
    let out = Command::new(prog)
        .args(args)
        .args(extra)
        .current_dir(dir)
        .output()
        .map_err(|e| format!("cannot run {prog}: {e}"))?;
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    if !out.status.success() && stdout.trim().is_empty() {
        let err = String::from_utf8_lossy(&out.stderr);
        let last = err.lines().last().unwrap_or("").trim().to_string();
        return Err(format!("{prog} exited with {}: {last}", out.status));
    }
    Ok(stdout)
}

/// Counts `clippy::` diagnostics in JSON compiler output.
pub fn count_lints(json_lines: &str) -> usize {
    json_lines
        .lines()
        .filter_map(|l| serde_json::from_str::<serde_json::Value>(l).ok())
        .filter(|v| v.get("reason").and_then(|r| r.as_str()) == Some("compiler-message"))
        .filter(|v| {
            v.pointer("/message/code/code")
                .and_then(|c| c.as_str())
                .is_some_and(|c| c.starts_with("clippy::"))
        })
        .count()
}

fn touch(path: &Path) {
    if let Ok(f) = std::fs::OpenOptions::new().append(true).open(path) {
        let _ = f.set_modified(std::time::SystemTime::now());
    }
}

/// Runs the lint command once per category with only that category enabled.
pub fn measure_lints(lint_command: &[String], root: &Path) -> Measured<LintCounts> {
    let mut counts = LintCounts::default();
    for (group, slot) in [
        ("style", &mut counts.style),
        ("complexity", &mut counts.complexity),
        ("correctness", &mut counts.correctness),
        ("perf", &mut counts.performance),
    ] {
        // Force re-linting; cached builds replay no diagnostics otherwise.
        touch(&root.join("src/lib.rs"));
        let lint = format!("clippy::{group}");
        match run(lint_command, &["--", "-A", "clippy::all", "-W", &lint], root) {
            Ok(out) => *slot = count_lints(&out),
            Err(reason) => return Measured::Unavailable { reason },
        }
    }
    Measured::Available { value: counts }
}

/// Sums used unsafe items of `package` in the unsafe-scanner JSON output.
pub fn count_unsafe(json: &str, package: &str) -> Option<u64> {
    let start = json.find('{')?;
    let v: serde_json::Value = serde_json::from_str(json[start..].trim()).ok()?;
    let pkgs = v.get("packages")?.as_array()?;
    let p = pkgs.iter().find(|p| {
        p.pointer("/package/id/name").and_then(|n| n.as_str()) == Some(package)
    })?;
    let used = p.pointer("/unsafety/used")?.as_object()?;
    Some(
        used.values()
            .filter_map(|c| c.get("unsafe_").and_then(|n| n.as_u64()))
            .sum(),
    )
}

pub fn measure_unsafe(unsafe_command: &[String], root: &Path, package: &str) -> Measured<u64> {
    match run(unsafe_command, &[], root) {
        Ok(out) => match count_unsafe(&out, package) {
            Some(value) => Measured::Available { value },
            None => Measured::Unavailable {
                reason: "unsafe scanner output has no entry for the generated crate".into(),
            },
        },
        Err(reason) => Measured::Unavailable { reason },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_of_nothing_is_complete() {
        assert_eq!(compiled_ratio(0, 0), 1.0);
        assert_eq!(compiled_ratio(3, 4), 0.75);
    }

    #[test]
    fn lint_lines_are_counted() {
        let out = concat!(
            r#"{"reason":"compiler-message","message":{"code":{"code":"clippy::needless_return"}}}"#,
            "\n",
            r#"{"reason":"compiler-message","message":{"code":{"code":"E0308"}}}"#,
            "\n",
            r#"{"reason":"build-finished","success":true}"#,
            "\n"
        );
        assert_eq!(count_lints(out), 1);
    }

    #[test]
    fn unsafe_counts_sum_used_categories() {
        let j = r#"noise
{"packages":[{"package":{"id":{"name":"gen"}},"unsafety":{"used":{"functions":{"safe":3,"unsafe_":1},"exprs":{"safe":9,"unsafe_":2}},"unused":{"exprs":{"safe":0,"unsafe_":7}}}}]}"#;
        assert_eq!(count_unsafe(j, "gen"), Some(3));
        assert_eq!(count_unsafe(j, "other"), None);
    }

    #[test]
    fn report_counts_functions_only() {
        let u = |id: &str, kind, status| UnitReport {
            id: id.into(),
            kind,
            status,
            translation_unit: None,
            repair_cycles: 0,
            note: None,
        };
        let r = PipelineReport::new(
            vec![
                u("Func:a", UnitKind::Func, UnitStatus::Translated),
                u("Func:b", UnitKind::Func, UnitStatus::Stubbed),
                u("Func:c", UnitKind::Func, UnitStatus::Dropped),
                u("Struct:s", UnitKind::Struct, UnitStatus::Stubbed),
            ],
            true,
        );
        assert_eq!((r.compiled_func_count, r.translated_func_count), (1, 2));
        assert_eq!(r.compiled_ratio, 0.5);
    }
}
