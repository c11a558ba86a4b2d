use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::{CampaignError, SessionEvent};

/// Durable home of session event logs.
pub trait EventStore: Send + Sync {
    /// Appends one event; returns only once it is durable.
    fn append(&self, id: &str, event: &SessionEvent) -> Result<(), CampaignError>;

    /// Every stored session log, in creation order.
    fn load(&self) -> Result<Vec<(String, Vec<SessionEvent>)>, CampaignError>;
}

/// Creation order, and each session's events.
type Logs = (Vec<String>, BTreeMap<String, Vec<SessionEvent>>);

#[derive(Default)]
pub struct MemoryStore {
    logs: Mutex<Logs>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl EventStore for MemoryStore {
    fn append(&self, id: &str, event: &SessionEvent) -> Result<(), CampaignError> {
        let mut guard = self.logs.lock().expect("memory store poisoned");
        let (order, logs) = &mut *guard;
        if !logs.contains_key(id) {
            order.push(id.to_string());
        }
        logs.entry(id.to_string()).or_default().push(event.clone());
        Ok(())
    }

    fn load(&self) -> Result<Vec<(String, Vec<SessionEvent>)>, CampaignError> {
        let guard = self.logs.lock().expect("memory store poisoned");
        let (order, logs) = &*guard;
        Ok(order.iter().map(|id| (id.clone(), logs[id].clone())).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IndexEntry {
    id: String,
    file: String,
}

/// One JSONL file per session under `sessions/`, plus `index.jsonl`.
pub struct FileStore {
    root: PathBuf,
    index: Mutex<Vec<IndexEntry>>,
}

impl FileStore {
    /// Opens (creating if needed) a data directory and recovers it: partial
    /// trailing lines are cut off and session files missing from the index
    /// are re-indexed.
    pub fn open(root: impl AsRef<Path>) -> Result<Self, CampaignError> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(root.join("sessions"))?;
        let index_path = root.join("index.jsonl");
        let mut index: Vec<IndexEntry> = if index_path.exists() {
            let (entries, _) = read_lines::<IndexEntry>(&index_path, true)?;
            entries
        } else {
            Vec::new()
        };
        let mut seen: std::collections::HashSet<String> = index.iter().map(|e| e.id.clone()).collect();
        index.retain(|e| root.join("sessions").join(&e.file).exists());

        let mut orphans = Vec::new();
        for entry in fs::read_dir(root.join("sessions"))? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_string) else {
                continue;
            };
            if seen.insert(id.clone()) {
                orphans.push(id);
            }
        }
        orphans.sort();
        let store = Self {
            root,
            index: Mutex::new(index),
        };
        for id in orphans {
            store.write_index(&id)?;
        }
        Ok(store)
    }

    fn session_path(&self, id: &str) -> PathBuf {
        self.root.join("sessions").join(format!("{id}.jsonl"))
    }

    fn write_index(&self, id: &str) -> Result<(), CampaignError> {
        let entry = IndexEntry {
            id: id.to_string(),
            file: format!("{id}.jsonl"),
        };
        append_line(&self.root.join("index.jsonl"), &entry)?;
        self.index.lock().expect("index poisoned").push(entry);
        Ok(())
    }
}

impl EventStore for FileStore {
    fn append(&self, id: &str, event: &SessionEvent) -> Result<(), CampaignError> {
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(CampaignError::field("id", format!("unsafe session id {id:?}")));
        }
        append_line(&self.session_path(id), event)?;
        if matches!(event, SessionEvent::Created { .. }) {
            self.write_index(id)?;
        }
        Ok(())
    }

    fn load(&self) -> Result<Vec<(String, Vec<SessionEvent>)>, CampaignError> {
        let index = self.index.lock().expect("index poisoned").clone();
        index
            .into_iter()
            .map(|e| {
                let (events, _) = read_lines(&self.root.join("sessions").join(&e.file), true)?;
                Ok((e.id, events))
            })
            .collect()
    }
}

fn append_line<T: Serialize>(path: &Path, value: &T) -> Result<(), CampaignError> {
    let mut line = serde_json::to_vec(value).expect("event serializes");
    line.push(b'\n');
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    file.write_all(&line)?;
    file.sync_all()?;
    Ok(())
}

/// Parses a JSONL file. A final line that is unterminated or unparsable is
/// a torn write: it is dropped and, when `repair` is set, truncated away.
/// Returns the values and whether a torn tail was found.
fn read_lines<T: for<'de> Deserialize<'de>>(path: &Path, repair: bool) -> Result<(Vec<T>, bool), CampaignError> {
    let bytes = fs::read(path)?;
    let mut values = Vec::new();
    let mut good = 0usize;
    let mut torn = false;
    let mut start = 0usize;
    while start < bytes.len() {
        let end = bytes[start..].iter().position(|&b| b == b'\n').map(|i| start + i);
        let (line, next, terminated) = match end {
            Some(e) => (&bytes[start..e], e + 1, true),
            None => (&bytes[start..], bytes.len(), false),
        };
        let parsed = serde_json::from_slice::<T>(line);
        match parsed {
            Ok(v) if terminated => {
                values.push(v);
                good = next;
            }
            Ok(_) | Err(_) if next == bytes.len() => {
                torn = true;
                break;
            }
            Ok(_) => unreachable!("unterminated lines are always last"),
            Err(e) => {
                if line.iter().all(u8::is_ascii_whitespace) {
                    good = next;
                } else {
                    return Err(CampaignError::Corrupt {
                        path: path.display().to_string(),
                        message: format!("byte {start}: {e}"),
                    });
                }
            }
        }
        start = next;
    }
    if torn && repair {
        File::options().write(true).open(path)?.set_len(good as u64)?;
    }
    Ok((values, torn))
}

/// Reads one session log file without modifying it.
pub fn read_log(path: impl AsRef<Path>) -> Result<Vec<SessionEvent>, CampaignError> {
    read_lines(path.as_ref(), false).map(|(v, _)| v)
}
