//! Line-oriented `key: value` reports with stable key order, plus content
//! hashes used to tie a report to its inputs.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::graph::Graph;
use crate::kernel::JointKernel;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Ordered key-value document. Keys are dotted lowercase paths; values are
/// single-line strings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    /// Starts a report with the tool version and command name.
    pub fn new(command: &str) -> Self {
        let mut r = Self::default();
        r.push("version", VERSION);
        r.push("command", command);
        r
    }

    /// Appends an entry; newlines in the value are replaced by spaces.
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        let value = value.to_string().replace(['\n', '\r'], " ");
        self.entries.push((key.into(), value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}: {v}");
        }
        out
    }

    /// Parses the output of [`Report::to_text`].
    pub fn parse(text: &str) -> Option<Report> {
        let mut r = Report::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line.split_once(": ").or_else(|| line.strip_suffix(':').map(|k| (k, "")))?;
            r.entries.push((k.to_string(), v.to_string()));
        }
        Some(r)
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    let digest = Sha256::digest(data);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Hash of the canonical edge-list text of `g`.
pub fn graph_hash(g: &Graph) -> String {
    sha256_hex(g.to_text().as_bytes())
}

/// Hash of the header-free kernel text.
pub fn kernel_hash(k: &JointKernel) -> String {
    sha256_hex(k.to_text(&[]).as_bytes())
}
