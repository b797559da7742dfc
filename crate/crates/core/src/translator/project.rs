//! The generated Rust project: layout, per-unit sections, checkpoints and the compile check.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Component, Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::depgraph::CodeUnit;
use crate::error::{Error, Result};
use crate::frontend::OriginKind;

pub const ENTRY: &str = "src/lib.rs";
const MARK_BEGIN: &str = "// ---- ptrkg unit ";
const MARK_END: &str = "// ---- ptrkg end ";
const MARK_TAIL: &str = " ----";

/// Opaque stand-in for types the stub mapping cannot express.
pub const OPAQUE_TYPE: &str = "Opaque";

const RUST_KEYWORDS: &[&str] = &[
    "as", "async", "await", "box", "break", "const", "continue", "crate", "dyn", "else", "enum",
    "extern", "false", "fn", "for", "if", "impl", "in", "let", "lib", "loop", "match", "mod",
    "move", "mut", "pub", "ref", "return", "self", "static", "struct", "super", "trait", "true",
    "try", "type", "unsafe", "use", "where", "while", "yield",
];

/// Header-origin units go to `common/<stem>_mod.rs`, source-origin units to `src/<stem>.rs`.
pub fn placement_for(unit: &CodeUnit) -> String {
    let stem = Path::new(&unit.origin_file)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "unit".into());
    let mut stem: String = stem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if stem.is_empty() || stem.starts_with(|c: char| c.is_ascii_digit()) {
        stem.insert(0, '_');
    }
    match unit.origin_kind {
        OriginKind::Header => format!("common/{stem}_mod.rs"),
        OriginKind::Source => {
            if RUST_KEYWORDS.contains(&stem.as_str()) {
                stem.push_str("_c");
            }
            format!("src/{stem}.rs")
        }
    }
}

fn module_name(rel: &str) -> String {
    Path::new(rel)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn begin_marker(unit: &str) -> String {
    format!("{MARK_BEGIN}{unit}{MARK_TAIL}")
}

fn end_marker(unit: &str) -> String {
    format!("{MARK_END}{unit}{MARK_TAIL}")
}

/// Splits text on begin markers. Text before the first marker is returned under `None`.
pub fn split_sections(text: &str) -> Vec<(Option<String>, String)> {
    let mut out: Vec<(Option<String>, String)> = vec![(None, String::new())];
    for line in text.lines() {
        let t = line.trim();
        if let Some(id) = t.strip_prefix(MARK_BEGIN).and_then(|r| r.strip_suffix(MARK_TAIL)) {
            out.push((Some(id.to_string()), String::new()));
        } else if t.starts_with(MARK_END) {
            continue;
        } else {
            let cur = &mut out.last_mut().expect("nonempty").1;
            cur.push_str(line);
            cur.push('\n');
        }
    }
    if out[0].1.trim().is_empty() {
        out.remove(0);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub unit: String,
    pub text: String,
}

/// The full file content of the generated sources, as sections in integration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectState {
    pub files: BTreeMap<String, Vec<Section>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: Option<String>,
    pub message: String,
    pub file: Option<String>,
    pub line_start: u32,
    pub line_end: u32,
    /// Code unit owning the primary span.
    pub unit: Option<String>,
    pub rendered: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompileOutcome {
    Clean,
    Diagnostics(Vec<Diagnostic>),
}

#[derive(Debug)]
pub struct GeneratedProject {
    pub root: PathBuf,
    pub crate_name: String,
    state: ProjectState,
    last_good: ProjectState,
    ranges: BTreeMap<String, Vec<(u32, u32, String)>>,
    compile_check: Vec<String>,
    last_integrated: Option<String>,
}

pub fn crate_name_for(dir: &Path) -> String {
    let raw = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name: String = raw
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    if name.is_empty() || name.starts_with(|c: char| c.is_ascii_digit() || c == '_') {
        format!("translated{name}")
    } else {
        name
    }
}

impl GeneratedProject {
    /// Creates the manifest and an entry file. Refuses a nonempty directory unless `force`.
    pub fn scaffold(root: &Path, compile_check: &[String], force: bool) -> Result<Self> {
        if root.exists() {
            let nonempty = std::fs::read_dir(root)
                .map_err(|e| Error::io(root, e))?
                .next()
                .is_some();
            if nonempty && !force {
                return Err(Error::ScaffoldRefused(root.to_path_buf()));
            }
            for stale in ["src", "common", "artifacts"] {
                let p = root.join(stale);
                if p.exists() {
                    std::fs::remove_dir_all(&p).map_err(|e| Error::io(&p, e))?;
                }
            }
        }
        std::fs::create_dir_all(root.join("src")).map_err(|e| Error::io(root, e))?;
        let crate_name = crate_name_for(root);
        let manifest = format!(
            "[package]\nname = \"{crate_name}\"\nversion = \"0.1.0\"\nedition = \"2021\"\n\
             autobins = false\nautoexamples = false\nautotests = false\nautobenches = false\n\n\
             [lib]\npath = \"src/lib.rs\"\n\n[dependencies]\n\n[workspace]\n"
        );
        let path = root.join("Cargo.toml");
        std::fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
        let mut p = GeneratedProject {
            root: root.to_path_buf(),
            crate_name,
            state: ProjectState::default(),
            last_good: ProjectState::default(),
            ranges: BTreeMap::new(),
            compile_check: compile_check.to_vec(),
            last_integrated: None,
        };
        p.render()?;
        match p.check()? {
            CompileOutcome::Clean => Ok(p),
            CompileOutcome::Diagnostics(d) => Err(Error::Toolchain(format!(
                "freshly scaffolded project does not compile: {}",
                d.first().map(|d| d.message.as_str()).unwrap_or("")
            ))),
        }
    }

    pub fn state(&self) -> &ProjectState {
        &self.state
    }

    pub fn last_good(&self) -> &ProjectState {
        &self.last_good
    }

    /// Replaces (or appends) the section of `unit` in `file`.
    pub fn put_section(&mut self, file: &str, unit: &str, text: &str) {
        for (f, secs) in self.state.files.iter_mut() {
            if f != file {
                secs.retain(|s| s.unit != unit);
            }
        }
        self.state.files.retain(|_, secs| !secs.is_empty());
        let secs = self.state.files.entry(file.to_string()).or_default();
        let text = normalize_section(text);
        match secs.iter_mut().find(|s| s.unit == unit) {
            Some(s) => s.text = text,
            None => secs.push(Section {
                unit: unit.to_string(),
                text,
            }),
        }
        self.last_integrated = Some(unit.to_string());
    }

    pub fn section(&self, unit: &str) -> Option<&str> {
        self.state
            .files
            .values()
            .flatten()
            .find(|s| s.unit == unit)
            .map(|s| s.text.as_str())
    }

    /// Marks the current state as the last compilable one.
    pub fn commit(&mut self) {
        self.last_good = self.state.clone();
    }

    /// Restores the last compilable state on disk.
    pub fn revert(&mut self) -> Result<()> {
        self.state = self.last_good.clone();
        self.render()
    }

    fn file_text(&mut self, rel: &str, secs: &[Section]) -> String {
        let origin = if rel.starts_with("common/") { "header" } else { "source" };
        let mut head: BTreeSet<String> = BTreeSet::new();
        let mut bodies = Vec::new();
        for s in secs {
            let mut body = String::new();
            for line in s.text.lines() {
                if is_top_level_use(line) {
                    head.insert(line.trim_end().to_string());
                } else {
                    body.push_str(line);
                    body.push('\n');
                }
            }
            bodies.push((s.unit.clone(), body));
        }
        let mut out = format!(
            "//! Translated from {origin} `{}`.\n#![allow(unused_imports)]\n\nuse crate::*;\n",
            module_name(rel)
        );
        for h in &head {
            out.push_str(h);
            out.push('\n');
        }
        let mut ranges = Vec::new();
        for (unit, body) in bodies {
            out.push('\n');
            out.push_str(&begin_marker(&unit));
            out.push('\n');
            let start = out.lines().count() as u32 + 1;
            out.push_str(&body);
            let end = out.lines().count() as u32;
            out.push_str(&end_marker(&unit));
            out.push('\n');
            ranges.push((start, end.max(start), unit));
        }
        self.ranges.insert(rel.to_string(), ranges);
        out
    }

    fn entry_text(&self) -> String {
        let mut out = String::from(
            "//! Generated crate root: one module per translated C file.\n\n\
             /// Placeholder for a type that could not be mapped.\n\
             #[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]\n\
             pub struct Opaque(pub usize);\n",
        );
        for rel in self.state.files.keys() {
            let m = module_name(rel);
            out.push('\n');
            if rel.starts_with("common/") {
                out.push_str(&format!("#[path = \"../{rel}\"]\n"));
            }
            out.push_str(&format!("pub mod {m};\npub use {m}::*;\n"));
        }
        out
    }

    /// Writes the current state to disk and removes generated files no longer in it.
    pub fn render(&mut self) -> Result<()> {
        self.ranges.clear();
        let files: Vec<(String, Vec<Section>)> = self
            .state
            .files
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let mut wanted: BTreeSet<PathBuf> = BTreeSet::new();
        for (rel, secs) in &files {
            let text = self.file_text(rel, secs);
            let path = self.root.join(rel);
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            write_if_changed(&path, &text)?;
            wanted.insert(path);
        }
        let entry = self.root.join(ENTRY);
        write_if_changed(&entry, &self.entry_text())?;
        wanted.insert(entry);
        for dir in ["src", "common"] {
            let d = self.root.join(dir);
            if !d.exists() {
                continue;
            }
            for e in std::fs::read_dir(&d).map_err(|e| Error::io(&d, e))? {
                let p = e.map_err(|e| Error::io(&d, e))?.path();
                if p.extension().is_some_and(|x| x == "rs") && !wanted.contains(&p) {
                    std::fs::remove_file(&p).map_err(|e| Error::io(&p, e))?;
                }
            }
        }
        Ok(())
    }

    /// Runs the configured compile check and attributes error diagnostics to units.
    pub fn check(&self) -> Result<CompileOutcome> {
        let (prog, args) = self
            .compile_check
            .split_first()
            .ok_or_else(|| Error::Config("compile_check command is empty".into()))?;
        let out = Command::new(prog)
            .args(args)
            .current_dir(&self.root)
            .output()
            .map_err(|e| Error::Toolchain(format!("cannot run `{prog}`: {e}")))?;
        let stdout = String::from_utf8_lossy(&out.stdout);
        let mut diags: Vec<Diagnostic> = stdout
            .lines()
            .filter_map(|l| parse_diagnostic(l, &self.root))
            .collect();
        for d in &mut diags {
            d.unit = self.owner_of(d.file.as_deref(), d.line_start);
        }
        if out.status.success() && diags.is_empty() {
            return Ok(CompileOutcome::Clean);
        }
        if diags.is_empty() {
            let stderr = String::from_utf8_lossy(&out.stderr);
            let tail: Vec<&str> = stderr.lines().rev().take(20).collect();
            let msg = tail.into_iter().rev().collect::<Vec<_>>().join("\n");
            if msg.contains("could not find `Cargo.toml`") || msg.contains("no such command") {
                return Err(Error::Toolchain(msg));
            }
            diags.push(Diagnostic {
                code: None,
                message: format!("compile check failed: {msg}"),
                file: None,
                line_start: 0,
                line_end: 0,
                unit: self.last_integrated.clone(),
                rendered: msg,
            });
        }
        Ok(CompileOutcome::Diagnostics(diags))
    }

    fn owner_of(&self, file: Option<&str>, line: u32) -> Option<String> {
        file.and_then(|f| self.ranges.get(f))
            .and_then(|rs| {
                rs.iter()
                    .find(|(a, b, _)| *a <= line && line <= *b)
                    .map(|(_, _, u)| u.clone())
            })
            .or_else(|| self.last_integrated.clone())
    }
}

fn write_if_changed(path: &Path, text: &str) -> Result<()> {
    if std::fs::read_to_string(path).is_ok_and(|t| t == text) {
        return Ok(());
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn is_top_level_use(line: &str) -> bool {
    (line.starts_with("use ") || line.starts_with("pub use ")) && line.trim_end().ends_with(';')
}

fn normalize_section(text: &str) -> String {
    let t = text.trim_matches('\n');
    let mut s: String = t
        .lines()
        .filter(|l| {
            let l = l.trim();
            !(l.starts_with(MARK_BEGIN) || l.starts_with(MARK_END))
        })
        .map(|l| format!("{}\n", l.trim_end()))
        .collect();
    if s.is_empty() {
        s.push('\n');
    }
    s
}

/// Lexically normalizes `src/../common/x.rs` to `common/x.rs` relative to the project root.
fn relative_to_root(file: &str, root: &Path) -> String {
    let p = Path::new(file);
    let p = p.strip_prefix(root).unwrap_or(p);
    let mut parts: Vec<String> = Vec::new();
    for c in p.components() {
        match c {
            Component::ParentDir => {
                parts.pop();
            }
            Component::Normal(s) => parts.push(s.to_string_lossy().into_owned()),
            _ => {}
        }
    }
    parts.join("/")
}

/// One line of cargo's JSON message stream; only error-level compiler messages are kept.
pub fn parse_diagnostic(line: &str, root: &Path) -> Option<Diagnostic> {
    let v: serde_json::Value = serde_json::from_str(line).ok()?;
    if v.get("reason")?.as_str()? != "compiler-message" {
        return None;
    }
    let msg = v.get("message")?;
    let level = msg.get("level")?.as_str()?;
    if !level.starts_with("error") || level == "error: internal compiler error" {
        return None;
    }
    let spans = msg.get("spans")?.as_array()?;
    let code = msg
        .get("code")
        .and_then(|c| c.get("code"))
        .and_then(|c| c.as_str())
        .map(str::to_string);
    let text = msg.get("message")?.as_str()?.to_string();
    if spans.is_empty() && code.is_none() && text.starts_with("aborting due to") {
        return None;
    }
    let primary = spans
        .iter()
        .find(|s| s.get("is_primary").and_then(|b| b.as_bool()) == Some(true))
        .or(spans.first());
    let (file, l0, l1) = match primary {
        Some(s) => (
            s.get("file_name")
                .and_then(|f| f.as_str())
                .map(|f| relative_to_root(f, root)),
            s.get("line_start").and_then(|x| x.as_u64()).unwrap_or(0) as u32,
            s.get("line_end").and_then(|x| x.as_u64()).unwrap_or(0) as u32,
        ),
        None => (None, 0, 0),
    };
    let rendered = msg
        .get("rendered")
        .and_then(|r| r.as_str())
        .unwrap_or(&text)
        .to_string();
    Some(Diagnostic {
        code,
        message: text,
        file,
        line_start: l0,
        line_end: l1,
        unit: None,
        rendered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_split_on_markers() {
        let text = format!(
            "{}\npub fn a() {{}}\n{}\npub fn b() {{}}\n",
            begin_marker("Func:a"),
            begin_marker("Func:b")
        );
        let s = split_sections(&text);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].0.as_deref(), Some("Func:a"));
        assert_eq!(s[1].1, "pub fn b() {}\n");
        let plain = split_sections("pub fn c() {}\n");
        assert_eq!(plain, vec![(None, "pub fn c() {}\n".to_string())]);
    }

    #[test]
    fn paths_normalize_through_parent() {
        assert_eq!(
            relative_to_root("src/../common/q_mod.rs", Path::new("/x")),
            "common/q_mod.rs"
        );
        assert_eq!(relative_to_root("/x/src/a.rs", Path::new("/x")), "src/a.rs");
    }

    #[test]
    fn diagnostic_json_is_parsed() {
        let line = r#"{"reason":"compiler-message","message":{"level":"error","message":"mismatched types","code":{"code":"E0308"},"rendered":"error[E0308]","spans":[{"file_name":"src/q.rs","line_start":7,"line_end":7,"is_primary":true}]}}"#;
        let d = parse_diagnostic(line, Path::new("/x")).unwrap();
        assert_eq!(d.code.as_deref(), Some("E0308"));
        assert_eq!((d.file.as_deref(), d.line_start), (Some("src/q.rs"), 7));
        let warn = line.replace("\"error\"", "\"warning\"");
        assert!(parse_diagnostic(&warn, Path::new("/x")).is_none());
    }
}
