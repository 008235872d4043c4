//! Reading inputs and writing outputs.

use std::io::Write;
use std::path::Path;

use regplan_core::suite::{load_suite_with, LoadOptions, TestSuite};
use regplan_core::tree::{default_tree_document, parse_tree, parse_tree_unchecked, DecisionTree};

use crate::failure::Failure;

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display())))
}

pub fn load_suite(path: &Path, lenient: bool) -> Result<TestSuite, Failure> {
    let text = read(path)?;
    load_suite_with(&text, LoadOptions { lenient })
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

/// Tree document text for `default` or a file path.
pub fn tree_text(source: &str) -> Result<String, Failure> {
    if source == "default" {
        Ok(default_tree_document().to_string())
    } else {
        read(Path::new(source))
    }
}

/// Parses and validates a tree; structural violations are rejected.
pub fn load_tree(source: &str) -> Result<DecisionTree, Failure> {
    parse_tree(&tree_text(source)?).map_err(|e| Failure::invalid(format!("{source}: {e}")))
}

/// Parses a tree without rejecting structural violations, for reporting them.
pub fn load_tree_unchecked(source: &str) -> Result<DecisionTree, Failure> {
    parse_tree_unchecked(&tree_text(source)?).map_err(|e| Failure::invalid(format!("{source}: {e}")))
}

/// Writes `contents` next to `path` under a temporary name, then renames it
/// into place so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let fail = |e: &dyn std::fmt::Display| Failure::io(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

/// Where a command's report goes: `--out` file, stdout, or nowhere with `--quiet`.
pub struct Sink<'a> {
    pub out: Option<&'a Path>,
    pub quiet: bool,
}

impl Sink<'_> {
    pub fn emit(&self, text: &str) -> Result<(), Failure> {
        match self.out {
            Some(path) => write_atomic(path, text),
            None => {
                self.print(text);
                Ok(())
            }
        }
    }

    /// Stdout only, regardless of `--out`.
    pub fn print(&self, text: &str) {
        if !self.quiet {
            print!("{text}");
        }
    }

    pub fn warn(&self, text: &str) {
        if !self.quiet {
            eprintln!("warning: {text}");
        }
    }
}
