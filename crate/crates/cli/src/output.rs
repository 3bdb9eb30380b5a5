use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Output directory, or nothing when `--out` is absent.
pub struct Bundle {
    dir: Option<PathBuf>,
}

impl Bundle {
    pub fn new(dir: Option<&Path>) -> Result<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        }
        Ok(Bundle { dir: dir.map(Path::to_path_buf) })
    }

    fn path(&self, name: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(name))
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        if let Some(p) = self.path(name) {
            let mut text = serde_json::to_string_pretty(value)?;
            text.push('\n');
            fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
        }
        Ok(())
    }

    pub fn text(&self, name: &str, text: &str) -> Result<()> {
        if let Some(p) = self.path(name) {
            fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
        }
        Ok(())
    }

    /// Writes through `f` into a buffered file.
    pub fn with_file(&self, name: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        if let Some(p) = self.path(name) {
            let file = fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = std::io::BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        Ok(())
    }

    pub fn csv<S: Serialize>(&self, name: &str, rows: &[S]) -> Result<()> {
        self.with_file(name, |w| {
            let mut out = csv::Writer::from_writer(w);
            for row in rows {
                out.serialize(row)?;
            }
            out.flush()?;
            Ok(())
        })
    }
}

pub fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}
