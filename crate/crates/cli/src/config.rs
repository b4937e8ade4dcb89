//! JSON configuration files. A config file is a flat object whose keys
//! mirror the long command-line flags; a flag given explicitly always wins
//! over the file. Keys that do not apply to the command being run are
//! ignored, so one file can serve several commands, but keys that exist for
//! no command are rejected outright.

use std::path::Path;

use serde_json::Value;

const KNOWN_KEYS: &[&str] = &[
    "scenario",
    "direction",
    "rr-uy-a1",
    "rr-su-a1",
    "rr-uy-a0",
    "rr-su-a0",
    "rr-uy",
    "rr-su",
    "rr-uy-s1",
    "rr-au-s1",
    "approx-su",
    "approx-sa",
    "est",
    "lo",
    "hi",
    "scale",
    "true",
    "bound",
    "output",
    "precision",
    "k",
    "n",
    "seed",
    "search",
];

pub struct FileConfig {
    map: serde_json::Map<String, Value>,
}

pub fn load(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| format!("config {} is not valid JSON: {e}", path.display()))?;
    let Value::Object(map) = value else {
        return Err(format!("config {} must be a JSON object", path.display()));
    };
    for key in map.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(format!(
                "unknown config key {key:?}; known keys: {}",
                KNOWN_KEYS.join(", ")
            ));
        }
    }
    Ok(FileConfig { map })
}

impl FileConfig {
    pub fn empty() -> Self {
        Self {
            map: serde_json::Map::new(),
        }
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.map.get(key)
    }

    pub fn string(&self, key: &str) -> Result<Option<String>, String> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(format!("config key {key:?} must be a string (got {other})")),
        }
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>, String> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Number(n)) => match n.as_f64() {
                Some(v) => Ok(Some(v)),
                None => Err(format!("config key {key:?} is out of numeric range")),
            },
            Some(other) => Err(format!("config key {key:?} must be a number (got {other})")),
        }
    }

    pub fn integer(&self, key: &str) -> Result<Option<u64>, String> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Number(n)) => match n.as_u64() {
                Some(v) => Ok(Some(v)),
                None => Err(format!(
                    "config key {key:?} must be a non-negative whole number (got {n})"
                )),
            },
            Some(other) => Err(format!("config key {key:?} must be a number (got {other})")),
        }
    }

    pub fn boolean(&self, key: &str) -> Result<Option<bool>, String> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(*b)),
            Some(other) => Err(format!(
                "config key {key:?} must be true or false (got {other})"
            )),
        }
    }

    /// Sensitivity parameters and the upper limit accept a number or a
    /// string (ranges like "1:4:7", or "inf"); either is handed to the same
    /// parser the flags use.
    pub fn raw(&self, key: &str) -> Result<Option<String>, String> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(Value::Number(n)) => Ok(Some(n.to_string())),
            Some(other) => Err(format!(
                "config key {key:?} must be a number or string (got {other})"
            )),
        }
    }
}
