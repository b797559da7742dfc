//! Project discovery and macro expansion through an external preprocessor.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::cli::config::PipelineConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OriginKind {
    Header,
    Source,
}

impl OriginKind {
    pub fn from_path(path: &str) -> Option<OriginKind> {
        if path.ends_with(".h") {
            Some(OriginKind::Header)
        } else if path.ends_with(".c") {
            Some(OriginKind::Source)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    /// Path relative to the project root, `/`-separated.
    pub rel_path: String,
    pub kind: OriginKind,
    pub text: String,
}

impl SourceFile {
    pub fn line(&self, line: u32) -> Option<&str> {
        self.text.lines().nth(line.checked_sub(1)? as usize)
    }
}

/// A C project on disk: every `.c`/`.h` file under the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectSource {
    pub root: PathBuf,
    pub files: Vec<SourceFile>,
}

impl ProjectSource {
    /// Walks `root` for `.c`/`.h` files. Files are sorted by relative path.
    pub fn load(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref();
        if !root.is_dir() {
            return Err(Error::PreprocessFailure(format!(
                "{} is not a readable directory",
                root.display()
            )));
        }
        let mut files = Vec::new();
        for entry in WalkDir::new(root).sort_by_file_name() {
            let entry = entry.map_err(|e| Error::PreprocessFailure(e.to_string()))?;
            if !entry.file_type().is_file() {
                continue;
            }
            let rel = entry
                .path()
                .strip_prefix(root)
                .expect("walkdir yields paths under root");
            let rel_path = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            let Some(kind) = OriginKind::from_path(&rel_path) else {
                continue;
            };
            let text =
                std::fs::read_to_string(entry.path()).map_err(|e| Error::io(entry.path(), e))?;
            files.push(SourceFile {
                rel_path,
                kind,
                text,
            });
        }
        files.sort_by(|a, b| a.rel_path.cmp(&b.rel_path));
        Ok(ProjectSource {
            root: root.to_path_buf(),
            files,
        })
    }

    pub fn get(&self, rel_path: &str) -> Option<&SourceFile> {
        self.files.iter().find(|f| f.rel_path == rel_path)
    }

    pub fn sources(&self) -> impl Iterator<Item = &SourceFile> {
        self.files.iter().filter(|f| f.kind == OriginKind::Source)
    }

    /// Project name used for output files: the root directory's name.
    pub fn name(&self) -> String {
        self.root
            .canonicalize()
            .unwrap_or_else(|_| self.root.clone())
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "project".into())
    }
}

/// Where one expanded line came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineOrigin {
    /// Project-relative path for project files; the marker's spelling otherwise.
    pub file: String,
    pub line: u32,
    pub system: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandedFile {
    /// The `.c` file that was expanded.
    pub rel_path: String,
    pub text: String,
    /// One entry per line of `text`.
    pub line_origins: Vec<LineOrigin>,
}

impl ExpandedFile {
    pub fn origin(&self, line_idx: usize) -> &LineOrigin {
        &self.line_origins[line_idx.min(self.line_origins.len().saturating_sub(1))]
    }

    /// Number of lines that come from project files (marker lines excluded).
    pub fn project_line_count(&self) -> usize {
        self.text
            .lines()
            .zip(&self.line_origins)
            .filter(|(l, o)| !o.system && !is_directive(l))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessedProject {
    pub source: ProjectSource,
    pub files: Vec<ExpandedFile>,
}

/// Expands every `.c` file of `project` with the configured preprocessor.
///
/// The command runs in the project root as `<command> <flags...> <file>`; its standard
/// output must carry `# <line> "<file>"` markers.
pub fn preprocess(project: &ProjectSource, config: &PipelineConfig) -> Result<PreprocessedProject> {
    let sources: Vec<&SourceFile> = project.sources().collect();
    if sources.is_empty() {
        return Err(Error::PreprocessFailure("no source files".into()));
    }
    let project_files: BTreeSet<&str> = project.files.iter().map(|f| f.rel_path.as_str()).collect();
    let mut files = Vec::with_capacity(sources.len());
    for src in sources {
        let output = Command::new(&config.preprocessor.command)
            .args(&config.preprocessor.flags)
            .arg(&src.rel_path)
            .current_dir(&project.root)
            .output()
            .map_err(|e| {
                Error::PreprocessFailure(format!(
                    "failed to launch `{}`: {e}",
                    config.preprocessor.command
                ))
            })?;
        if !output.status.success() {
            return Err(Error::PreprocessFailure(format!(
                "`{}` exited with {} on {}:\n{}",
                config.preprocessor.command,
                output.status,
                src.rel_path,
                String::from_utf8_lossy(&output.stderr)
            )));
        }
        let text = String::from_utf8_lossy(&output.stdout).into_owned();
        let line_origins = map_line_origins(&text, &src.rel_path, &project.root, &project_files);
        files.push(ExpandedFile {
            rel_path: src.rel_path.clone(),
            text,
            line_origins,
        });
    }
    Ok(PreprocessedProject {
        source: project.clone(),
        files,
    })
}

fn is_directive(line: &str) -> bool {
    line.trim_start().starts_with('#')
}

/// A parsed `# <line> "<file>" <flags>` marker.
#[derive(Debug, PartialEq, Eq)]
pub(crate) struct LineMarker {
    pub line: u32,
    pub file: String,
    pub flags: Vec<u32>,
}

pub(crate) fn parse_line_marker(line: &str) -> Option<LineMarker> {
    let rest = line.trim_start().strip_prefix('#')?.trim_start();
    let rest = rest.strip_prefix("line").map(str::trim_start).unwrap_or(rest);
    let digits_end = rest.find(|c: char| !c.is_ascii_digit())?;
    if digits_end == 0 {
        return None;
    }
    let number: u32 = rest[..digits_end].parse().ok()?;
    let rest = rest[digits_end..].trim_start();
    let rest = rest.strip_prefix('"')?;
    let mut file = String::new();
    let mut chars = rest.char_indices();
    let mut end = None;
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => {
                if let Some((_, n)) = chars.next() {
                    file.push(n);
                }
            }
            '"' => {
                end = Some(i + 1);
                break;
            }
            c => file.push(c),
        }
    }
    let flags = rest[end?..]
        .split_whitespace()
        .filter_map(|f| f.parse().ok())
        .collect();
    Some(LineMarker {
        line: number,
        file,
        flags,
    })
}

fn normalize_marker_path(
    file: &str,
    root: &Path,
    project_files: &BTreeSet<&str>,
) -> Option<String> {
    let trimmed = file.trim_start_matches("./");
    if project_files.contains(trimmed) {
        return Some(trimmed.to_string());
    }
    let path = Path::new(file);
    let abs_root = root.canonicalize().ok()?;
    let abs = if path.is_absolute() {
        path.canonicalize().ok()?
    } else {
        root.join(path).canonicalize().ok()?
    };
    let rel = abs.strip_prefix(&abs_root).ok()?;
    let rel = rel
        .components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/");
    project_files.contains(rel.as_str()).then_some(rel)
}

fn map_line_origins(
    text: &str,
    main_file: &str,
    root: &Path,
    project_files: &BTreeSet<&str>,
) -> Vec<LineOrigin> {
    let mut current = LineOrigin {
        file: main_file.to_string(),
        line: 1,
        system: false,
    };
    let mut origins = Vec::new();
    for line in text.lines() {
        if let Some(marker) = parse_line_marker(line) {
            let project = normalize_marker_path(&marker.file, root, project_files);
            let system = project.is_none() || marker.flags.contains(&3);
            current = LineOrigin {
                file: project.unwrap_or(marker.file),
                line: marker.line,
                system,
            };
            // the marker names the number of the *next* line
            origins.push(LineOrigin {
                line: marker.line.saturating_sub(1),
                ..current.clone()
            });
            continue;
        }
        origins.push(current.clone());
        current.line += 1;
    }
    origins
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marker_parsing() {
        let m = parse_line_marker(r#"# 12 "/usr/include/stdlib.h" 1 3 4"#).unwrap();
        assert_eq!(m.line, 12);
        assert_eq!(m.file, "/usr/include/stdlib.h");
        assert_eq!(m.flags, vec![1, 3, 4]);
        let m = parse_line_marker(r#"#line 7 "a b.c""#).unwrap();
        assert_eq!((m.line, m.file.as_str()), (7, "a b.c"));
        assert!(parse_line_marker("#pragma once").is_none());
        assert!(parse_line_marker("int x;").is_none());
    }

    #[test]
    fn origins_follow_markers() {
        let files: BTreeSet<&str> = ["m.c", "m.h"].into_iter().collect();
        let text = "# 1 \"m.c\"\n# 1 \"m.h\" 1\nint a;\n# 2 \"m.c\" 2\nint b;\n# 1 \"/usr/include/x.h\" 1 3\nint c;\n";
        let o = map_line_origins(text, "m.c", Path::new("/nonexistent"), &files);
        assert_eq!(o.len(), 7);
        assert_eq!((o[2].file.as_str(), o[2].line, o[2].system), ("m.h", 1, false));
        assert_eq!((o[4].file.as_str(), o[4].line, o[4].system), ("m.c", 2, false));
        assert_eq!((o[6].file.as_str(), o[6].line, o[6].system), ("/usr/include/x.h", 1, true));
    }
}
