//! Append-only JSONL persistence for raw responses, one record per line,
//! laid out `<run_dir>/<backend_id>/<task>/<scenario>.jsonl`.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use super::{GatewayError, RawResponse};

pub struct RunStore {
    root: PathBuf,
    // appends serialized per store; files stay line-atomic
    write_lock: Mutex<()>,
}

impl RunStore {
    pub fn open(run_dir: &Path) -> Result<Self, GatewayError> {
        fs::create_dir_all(run_dir)?;
        Ok(RunStore {
            root: run_dir.to_path_buf(),
            write_lock: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn response_path(&self, backend_id: &str, task_slug: &str, scenario_id: &str) -> PathBuf {
        self.root
            .join(backend_id)
            .join(task_slug)
            .join(format!("{scenario_id}.jsonl"))
    }

    /// Write-ahead append: the record is on disk before the caller sees Ok.
    pub fn append(
        &self,
        backend_id: &str,
        task_slug: &str,
        scenario_id: &str,
        response: &RawResponse,
    ) -> Result<(), GatewayError> {
        let path = self.response_path(backend_id, task_slug, scenario_id);
        let _guard = self.write_lock.lock().unwrap();
        fs::create_dir_all(path.parent().expect("response path has parent"))?;
        let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
        let mut line = serde_json::to_vec(response)?;
        line.push(b'\n');
        file.write_all(&line)?;
        file.sync_data()?;
        Ok(())
    }

    pub fn load(
        &self,
        backend_id: &str,
        task_slug: &str,
        scenario_id: &str,
    ) -> Result<Vec<RawResponse>, GatewayError> {
        let path = self.response_path(backend_id, task_slug, scenario_id);
        if !path.exists() {
            return Ok(Vec::new());
        }
        read_jsonl(&path)
    }

    /// Every persisted response in the run, in deterministic path order.
    /// Only `<backend>/<task>/<scenario>.jsonl` files count; JSONL files at
    /// the run root (labeling output, learned fingerprints) are not responses.
    pub fn load_all(&self) -> Result<Vec<RawResponse>, GatewayError> {
        let mut files = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let path = entry?.path();
            if path.is_dir() {
                collect_jsonl(&path, &mut files)?;
            }
        }
        files.sort();
        let mut responses = Vec::new();
        for path in files {
            responses.extend(read_jsonl(&path)?);
        }
        Ok(responses)
    }

    /// Attempts already persisted per case, for resume accounting.
    pub fn completed_attempts(&self) -> Result<HashMap<String, u32>, GatewayError> {
        let mut counts = HashMap::new();
        for response in self.load_all()? {
            *counts.entry(response.case_id).or_insert(0) += 1;
        }
        Ok(counts)
    }
}

fn collect_jsonl(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), GatewayError> {
    if !dir.is_dir() {
        return Ok(());
    }
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_jsonl(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "jsonl") {
            out.push(path);
        }
    }
    Ok(())
}

fn read_jsonl(path: &Path) -> Result<Vec<RawResponse>, GatewayError> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(GatewayError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::TransportStatus;

    fn response(case_id: &str, attempt: u32) -> RawResponse {
        RawResponse {
            case_id: case_id.to_string(),
            attempt,
            backend_id: "mock".into(),
            request_fingerprint: "f".into(),
            response_text: "text".into(),
            token_usage: Some(3),
            timestamp: 1,
            transport_status: TransportStatus::Ok,
        }
    }

    #[test]
    fn append_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let store = RunStore::open(dir.path()).unwrap();
        store
            .append("mock", "generation", "speech-recognition", &response("a", 0))
            .unwrap();
        store
            .append("mock", "generation", "speech-recognition", &response("a", 1))
            .unwrap();
        let loaded = store.load("mock", "generation", "speech-recognition").unwrap();
        assert_eq!(loaded, vec![response("a", 0), response("a", 1)]);
    }

    #[test]
    fn layout_matches_convention() {
        let dir = tempfile::tempdir().unwrap();
        let store = RunStore::open(dir.path()).unwrap();
        store
            .append("gpt", "debugging", "translation", &response("a", 0))
            .unwrap();
        assert!(dir
            .path()
            .join("gpt/debugging/translation.jsonl")
            .is_file());
    }

    #[test]
    fn completed_attempts_counts_per_case() {
        let dir = tempfile::tempdir().unwrap();
        let store = RunStore::open(dir.path()).unwrap();
        for attempt in 0..3 {
            store
                .append("mock", "generation", "s", &response("a", attempt))
                .unwrap();
        }
        store.append("mock", "generation", "s", &response("b", 0)).unwrap();
        let counts = store.completed_attempts().unwrap();
        assert_eq!(counts["a"], 3);
        assert_eq!(counts["b"], 1);
    }

    #[test]
    fn missing_file_loads_empty() {
        let dir = tempfile::tempdir().unwrap();
        let store = RunStore::open(dir.path()).unwrap();
        assert!(store.load("mock", "generation", "nope").unwrap().is_empty());
    }
}
