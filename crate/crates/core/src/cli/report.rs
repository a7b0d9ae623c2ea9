//! Output writers. Every file opens with the config hash and software
//! version; CSV files carry them as leading `#` lines, JSON files in `meta`.

use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;

pub const SOFTWARE: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub software: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub experiment: &'static str,
    pub seed: u64,
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Collects files under one directory; names may not escape it.
pub struct OutputDir {
    root: PathBuf,
    meta: Meta,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path, meta: Meta) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            meta,
            written: Vec::new(),
        })
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    fn path(&mut self, name: &str) -> PathBuf {
        assert!(
            !name.contains(['/', '\\']) && name != ".." && name != ".",
            "output name `{name}` must be a plain file name"
        );
        let p = self.root.join(name);
        self.written.push(p.clone());
        p
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut buf = Vec::new();
        write!(buf, "# software={} version={}\r\n", self.meta.software, self.meta.version)?;
        write!(buf, "# config_sha256={}\r\n", self.meta.config_sha256)?;
        write!(buf, "# experiment={} seed={}\r\n", self.meta.experiment, self.meta.seed)?;
        {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(&mut buf);
            w.write_record(header)?;
            for row in rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        let path = self.path(name);
        fs::write(path, buf)?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<()> {
        #[derive(Serialize)]
        struct Doc<'a, T> {
            meta: &'a Meta,
            #[serde(flatten)]
            body: &'a T,
        }
        let mut text = serde_json::to_string_pretty(&Doc { meta: &self.meta, body })?;
        text.push('\n');
        let path = self.path(name);
        fs::write(path, text)?;
        Ok(())
    }

    pub fn text(&mut self, name: &str, lines: &[String]) -> Result<()> {
        let mut text = format!(
            "{} {}  config {}\nexperiment {}  seed {}\n\n",
            self.meta.software, self.meta.version, self.meta.config_sha256, self.meta.experiment, self.meta.seed
        );
        for l in lines {
            text.push_str(l);
            text.push('\n');
        }
        let path = self.path(name);
        fs::write(path, text)?;
        Ok(())
    }

    pub fn into_files(self) -> Vec<PathBuf> {
        self.written
    }
}
