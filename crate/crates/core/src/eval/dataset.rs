use crate::eval::{EvalError, EvalItem};
use crate::pairwise::PairItem;
use serde::de::DeserializeOwned;
use std::collections::BTreeSet;
use std::io::{BufRead, BufReader};
use std::path::Path;

fn load_jsonl<T, F>(path: &Path, slice_size: Option<usize>, id_of: F, validate: impl Fn(&T) -> Result<(), String>) -> Result<Vec<T>, EvalError>
where
    T: DeserializeOwned,
    F: Fn(&T) -> &str,
{
    let file = std::fs::File::open(path).map_err(EvalError::io(path))?;
    let mut records = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(EvalError::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| EvalError::Dataset {
            path: path.to_path_buf(),
            line: i + 1,
            reason,
        };
        let record: T = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        validate(&record).map_err(bad)?;
        if !seen.insert(id_of(&record).to_string()) {
            return Err(bad(format!("duplicate id {}", id_of(&record))));
        }
        records.push(record);
    }
    records.sort_by(|a, b| id_of(a).cmp(id_of(b)));
    if let Some(size) = slice_size {
        if size > records.len() {
            log::warn!(
                "{}: slice of {size} requested but only {} records present; using all",
                path.display(),
                records.len()
            );
        }
        records.truncate(size);
    }
    Ok(records)
}

/// Loads listwise items, sorted by id and cut to the first `slice_size`.
pub fn load_listwise_dataset(path: &Path, slice_size: Option<usize>) -> Result<Vec<EvalItem>, EvalError> {
    load_jsonl(path, slice_size, |it: &EvalItem| &it.id, |it| {
        it.validate().map_err(|e| e.to_string())
    })
}

/// Loads pairwise items, sorted by id and cut to the first `slice_size`.
pub fn load_pair_dataset(path: &Path, slice_size: Option<usize>) -> Result<Vec<PairItem>, EvalError> {
    load_jsonl(path, slice_size, |it: &PairItem| &it.id, |it| {
        it.validate().map_err(|e| e.to_string())
    })
}
