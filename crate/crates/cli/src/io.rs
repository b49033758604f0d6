use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use msa_core::learn::{read_jsonl, write_jsonl, Dataset, Task};
use serde::Serialize;

use crate::failure::{CliResult, Context, Failure};

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_text(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).context(format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).context(format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> CliResult<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text)
}

pub fn write_dataset(dir: &Path, name: &str, data: &Dataset) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).context(format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path).context(format!("writing {}", path.display()))?;
    let mut out = BufWriter::new(file);
    write_jsonl(data, &mut out).context(format!("writing {}", path.display()))?;
    out.flush().context(format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn read_dataset(path: &Path) -> CliResult<Dataset> {
    let file = File::open(path).context(format!("opening {}", path.display()))?;
    read_jsonl(BufReader::new(file)).context(format!("reading {}", path.display()))
}

/// Like [`read_dataset`], but a missing file gives an empty dataset.
pub fn read_optional_dataset(path: &Path) -> CliResult<Dataset> {
    if path.exists() {
        read_dataset(path)
    } else {
        Ok(Dataset::default())
    }
}

pub fn parse_task(s: &str) -> Result<Task, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown task `{s}`; expected 0u, 0d, 1 or 2"))
}

pub fn task_name(task: Task) -> String {
    match serde_json::to_value(task) {
        Ok(serde_json::Value::String(s)) => s,
        _ => format!("{task:?}"),
    }
}

pub fn require<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| Failure::usage(format!("missing required option --{flag}")))
}
