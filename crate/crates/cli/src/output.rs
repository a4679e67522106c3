use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub const OUT_DIR_VAR: &str = "LOGCOUNT_OUT_DIR";

/// A float printed in the shortest form that parses back to the same value.
#[derive(Clone, Copy, Debug)]
pub struct Num(pub f64);

impl Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.fract() == 0.0 && self.0.abs() < 1e15 {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:?}", self.0)
        }
    }
}

/// CSV body plus a trailing `# key=value` metadata line.
pub struct Table {
    text: String,
    meta: Vec<(String, String)>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        let mut table = Self { text, meta: Vec::new() };
        table.meta("version", env!("CARGO_PKG_VERSION"));
        table
    }

    /// Appends a row; wrap floats in [`Num`].
    pub fn row(&mut self, cells: &[&dyn Display]) {
        let cells: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn meta(&mut self, key: &str, value: impl Display) {
        self.meta.push((key.to_owned(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let meta: Vec<String> = self.meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}# {}\n", self.text, meta.join(" "))
    }
}

fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_owned(),
    }
}

/// Writes to `path` (resolved against the output directory) or stdout.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(path) => {
            let path = resolve(path);
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [1.0, 0.5, -3.0, 1.3501081901637822e-11, 37.43641095807596, 1e20, 0.1 + 0.2, f64::MIN_POSITIVE] {
            let s = Num(v).to_string();
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(Num(1.0).to_string(), "1");
        assert_eq!(Num(1e-6).to_string(), "1e-6");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.row(&[&1, &Num(0.25)]);
        t.meta("seed", 3);
        assert_eq!(t.render(), format!("a,b\n1,0.25\n# version={} seed=3\n", env!("CARGO_PKG_VERSION")));
    }
}
