use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

/// A pass/fail comparison of a measured value against a threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `measured <= threshold`.
    pub fn at_most(name: &str, measured: f64, threshold: f64, detail: &str) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold,
            passed: measured <= threshold,
            detail: detail.into(),
        }
    }

    /// Passes when `measured >= threshold`.
    pub fn at_least(name: &str, measured: f64, threshold: f64, detail: &str) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold,
            passed: measured >= threshold,
            detail: detail.into(),
        }
    }
}

/// Files produced by one run, keyed by file name, plus its checks.
#[derive(Debug, Clone, Default)]
pub struct Bundle {
    pub files: BTreeMap<String, String>,
    pub checks: Vec<Check>,
}

impl Bundle {
    pub fn add(&mut self, name: &str, contents: String) {
        self.files.insert(name.into(), contents);
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.get(name).map(String::as_str)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        for (name, contents) in &self.files {
            fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

pub fn fmt_float(v: f64) -> String {
    format!("{v:.8e}")
}

/// Comma-separated table with a header row and a trailing newline.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_float(0.1), "1.00000000e-1");
        assert_eq!(fmt_float(-12.345678912), "-1.23456789e1");
    }

    #[test]
    fn csv_layout() {
        let t = csv(&["a", "b"], vec![vec!["1".into(), fmt_float(2.0)]]);
        assert_eq!(t, "a,b\n1,2.00000000e0\n");
    }

    #[test]
    fn checks_compare_in_the_right_direction() {
        assert!(Check::at_most("x", 1.0, 2.0, "").passed);
        assert!(!Check::at_most("x", 3.0, 2.0, "").passed);
        assert!(Check::at_least("x", 3.0, 2.0, "").passed);
    }

    #[test]
    fn bundle_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = Bundle::default();
        b.add("a.csv", "x\n".into());
        b.write_to(&dir.path().join("sub")).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("sub/a.csv")).unwrap(), "x\n");
    }
}
