//! CSV dataset manifests.
//!
//! ```text
//! # profile=cube
//! path,r,g,b,r2,g2,b2
//! images/0001.ppm,0.301,0.512,0.188,0.297,0.520,0.183
//! images/0002.ppm,0.233,0.498,0.269
//! ```
//!
//! Lines starting with `#` are comments, except `# profile=<name>` which names
//! the preprocessing profile. The second ground-truth triplet is optional per
//! row. Relative paths are resolved against the manifest's directory.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::color::{normalize, Illuminant};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub ground_truth: Illuminant,
    pub second_ground_truth: Option<Illuminant>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    /// Preprocessing profile name, `plain` unless the file says otherwise.
    pub profile: String,
}

impl DatasetManifest {
    pub fn ground_truths(&self) -> Vec<Illuminant> {
        self.entries.iter().map(|e| e.ground_truth).collect()
    }

    pub fn kfold(&self, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
        super::kfold(self.entries.len(), k, seed)
    }

    /// Serializes with full-precision ground truths and paths as stored.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if self.profile != "plain" {
            let _ = writeln!(out, "# profile={}", self.profile);
        }
        let two = self.entries.iter().any(|e| e.second_ground_truth.is_some());
        out.push_str(if two { "path,r,g,b,r2,g2,b2\n" } else { "path,r,g,b\n" });
        for e in &self.entries {
            let g = e.ground_truth.to_array();
            let _ = write!(out, "{},{},{},{}", e.path.display(), g[0], g[1], g[2]);
            if let Some(s) = e.second_ground_truth {
                let s = s.to_array();
                let _ = write!(out, ",{},{},{}", s[0], s[1], s[2]);
            }
            out.push('\n');
        }
        out
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_triplet(fields: &[&str], line: usize) -> Result<Illuminant> {
    let mut v = [0.0; 3];
    for (slot, f) in v.iter_mut().zip(fields) {
        *slot = f.trim().parse().map_err(|_| parse_err(line, format!("bad number {f:?}")))?;
    }
    normalize(v).map_err(|_| Error::InvalidGroundTruth(line))
}

/// Parses manifest text. Relative paths are joined onto `base_dir`; when
/// `check_files` is set every referenced image must exist.
pub fn parse_manifest(text: &str, base_dir: &Path, check_files: bool) -> Result<DatasetManifest> {
    let mut profile = "plain".to_string();
    let mut header_seen = false;
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(name) = comment.trim().strip_prefix("profile=") {
                profile = name.trim().to_string();
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if !header_seen {
            let names: Vec<String> = fields.iter().map(|f| f.trim().to_ascii_lowercase()).collect();
            if names != ["path", "r", "g", "b"] && names != ["path", "r", "g", "b", "r2", "g2", "b2"] {
                return Err(parse_err(line_no, "expected header path,r,g,b[,r2,g2,b2]"));
            }
            header_seen = true;
            continue;
        }
        if fields.len() != 4 && fields.len() != 7 {
            return Err(parse_err(line_no, format!("expected 4 or 7 fields, got {}", fields.len())));
        }
        let rel = fields[0].trim();
        if rel.is_empty() {
            return Err(parse_err(line_no, "empty path"));
        }
        if !seen.insert(rel.to_string()) {
            return Err(parse_err(line_no, format!("duplicate path {rel}")));
        }
        let ground_truth = parse_triplet(&fields[1..4], line_no)?;
        let second_ground_truth =
            if fields.len() == 7 { Some(parse_triplet(&fields[4..7], line_no)?) } else { None };
        let path = base_dir.join(rel);
        if check_files && !path.is_file() {
            return Err(Error::MissingImage(path));
        }
        entries.push(ManifestEntry { path, ground_truth, second_ground_truth });
    }
    if !header_seen {
        return Err(parse_err(1, "missing header"));
    }
    if entries.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(DatasetManifest { entries, profile })
}

/// Reads and validates a manifest file; every image must exist.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_manifest(&text, base, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_well_formed_manifest() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["a.ppm", "b.ppm", "c.ppm"] {
            fs::write(dir.path().join(name), b"").unwrap();
        }
        let text = "# profile=cube\npath,r,g,b\na.ppm,1,2,3\nb.ppm,0.3,0.5,0.2\n\nc.ppm,1,1,1\n";
        fs::write(dir.path().join("m.csv"), text).unwrap();
        let m = load_manifest(&dir.path().join("m.csv")).unwrap();
        assert_eq!(m.entries.len(), 3);
        assert_eq!(m.profile, "cube");
        assert_eq!(m.entries[0].path, dir.path().join("a.ppm"));
        assert_eq!(m.entries[0].ground_truth, normalize([1.0, 2.0, 3.0]).unwrap());
    }

    #[test]
    fn error_cases() {
        let base = Path::new("");
        let zero = parse_manifest("path,r,g,b\na.ppm,0,0,0\n", base, false);
        assert!(matches!(zero, Err(Error::InvalidGroundTruth(2))));
        let bad = parse_manifest("path,r,g,b\na.ppm,1,x,0\n", base, false);
        assert!(matches!(bad, Err(Error::Parse { line: 2, .. })));
        let dup = parse_manifest("path,r,g,b\na.ppm,1,1,1\na.ppm,1,1,1\n", base, false);
        assert!(matches!(dup, Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_manifest("a.ppm,1,1,1\n", base, false), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_manifest("path,r,g,b\n", base, false), Err(Error::EmptyInput)));
        let missing = parse_manifest("path,r,g,b\nnope.ppm,1,1,1\n", Path::new("/nonexistent"), true);
        assert!(matches!(missing, Err(Error::MissingImage(_))));
    }

    #[test]
    fn second_ground_truth_and_round_trip() {
        let text = "path,r,g,b,r2,g2,b2\na.ppm,0.3,0.5,0.2,0.25,0.5,0.25\nb.ppm,0.2,0.5,0.3\n";
        let m = parse_manifest(text, Path::new(""), false).unwrap();
        assert!(m.entries[0].second_ground_truth.is_some());
        assert!(m.entries[1].second_ground_truth.is_none());
        let again = parse_manifest(&m.to_csv(), Path::new(""), false).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn cube_plus_sized_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut text = String::from("# profile=cube\npath,r,g,b,r2,g2,b2\n");
        for i in 0..1707 {
            let name = format!("{i:04}.ppm");
            fs::write(dir.path().join(&name), b"").unwrap();
            let _ = writeln!(text, "{name},0.3,0.5,0.2,0.31,0.5,0.19");
        }
        fs::write(dir.path().join("gt.csv"), text).unwrap();
        let m = load_manifest(&dir.path().join("gt.csv")).unwrap();
        assert_eq!(m.entries.len(), 1707);
        assert!(m.kfold(3, 1).unwrap().iter().all(|f| f.len() == 569));
    }
}
