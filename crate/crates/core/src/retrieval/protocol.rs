use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolQuery {
    pub id: String,
    pub positives: Vec<String>,
    #[serde(default)]
    pub junk: Vec<String>,
}

/// Queries with their positive and junk sets over an ordered database.
/// Serialised as `{"database": [...], "queries": [{"id", "positives", "junk"}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalProtocol {
    pub database: Vec<String>,
    pub queries: Vec<ProtocolQuery>,
}

impl RetrievalProtocol {
    pub fn new(database: Vec<String>, queries: Vec<ProtocolQuery>) -> Result<Self> {
        let p = Self { database, queries };
        p.validate()?;
        Ok(p)
    }

    /// Checks the invariants, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let mut db = HashSet::with_capacity(self.database.len());
        for (i, id) in self.database.iter().enumerate() {
            if id.is_empty() {
                return Err(Error::Protocol(format!("database[{i}]: empty id")));
            }
            if !db.insert(id.as_str()) {
                return Err(Error::Protocol(format!("database[{i}]: duplicate id `{id}`")));
            }
        }
        let mut seen = HashSet::with_capacity(self.queries.len());
        for (qi, q) in self.queries.iter().enumerate() {
            if !seen.insert(q.id.as_str()) {
                return Err(Error::Protocol(format!("queries[{qi}].id: duplicate query `{}`", q.id)));
            }
            let mut pos = HashSet::new();
            for (field, list) in [("positives", &q.positives), ("junk", &q.junk)] {
                for (k, id) in list.iter().enumerate() {
                    let at = format!("queries[{qi}].{field}[{k}]");
                    if *id == q.id {
                        return Err(Error::Protocol(format!("{at}: query `{id}` lists itself")));
                    }
                    if !db.contains(id.as_str()) {
                        return Err(Error::Protocol(format!("{at}: `{id}` is not in the database")));
                    }
                    if field == "positives" {
                        pos.insert(id.as_str());
                    } else if pos.contains(id.as_str()) {
                        return Err(Error::Protocol(format!("{at}: `{id}` is both positive and junk")));
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn load_protocol(path: impl AsRef<Path>) -> Result<RetrievalProtocol> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let p: RetrievalProtocol = serde_json::from_str(&text).map_err(|e| Error::Decode {
        path: path.into(),
        message: e.to_string(),
    })?;
    p.validate().map_err(|e| Error::Decode {
        path: path.into(),
        message: e.to_string(),
    })?;
    Ok(p)
}

pub fn save_protocol(p: &RetrievalProtocol, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(p).expect("protocol serialises");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
