//! Flat key-value configuration files: one `key value...` pair per line,
//! repeated keys for lists, `#` comments. Chosen for diffability in test
//! fixtures.

use std::collections::BTreeMap;

#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    /// Key → list of values in file order.
    pub entries: Vec<(String, String)>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<KvConfig, String> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = match line.split_once(char::is_whitespace) {
                Some((k, v)) => (k.trim(), v.trim()),
                None => (line, ""),
            };
            if key.is_empty() {
                return Err(format!("line {}: missing key", lineno + 1));
            }
            entries.push((key.to_string(), value.to_string()));
        }
        Ok(KvConfig { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_all(&self, key: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    /// Sub-fields of a value like "r=1 word=1:0,1:1".
    pub fn fields(value: &str) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for part in value.split_whitespace() {
            if let Some((k, v)) = part.split_once('=') {
                out.insert(k.to_string(), v.to_string());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_repeated_keys_and_comments() {
        let text = "# correlator\nalgebra A1\nscreening 1\nscreening 1\nprimary r=1 word=1:0\n";
        let cfg = KvConfig::parse(text).unwrap();
        assert_eq!(cfg.get("algebra"), Some("A1"));
        assert_eq!(cfg.get_all("screening"), vec!["1", "1"]);
        let f = KvConfig::fields(cfg.get("primary").unwrap());
        assert_eq!(f.get("r").map(String::as_str), Some("1"));
        assert_eq!(f.get("word").map(String::as_str), Some("1:0"));
    }
}
