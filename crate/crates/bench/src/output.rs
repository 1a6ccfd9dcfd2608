//! Stamped output files. CSVs start with a `#` comment line naming the tool
//! version and config hash; JSON documents carry the same in a `generator`
//! object.

use std::path::Path;

use serde::Serialize;

use crate::{io_err, Result};

pub const TOOL: &str = "gsee-bench";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stamp {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
}

impl Stamp {
    pub fn new(config_hash: String) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            config_hash,
        }
    }

    pub fn comment(&self) -> String {
        format!(
            "# {} {} config={}",
            self.tool, self.version, self.config_hash
        )
    }
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, contents).map_err(io_err(path))
}

pub fn write_csv<I, R>(path: &Path, stamp: &Stamp, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut buf = format!("{}\n", stamp.comment()).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush().map_err(io_err(path))?;
    }
    write_file(path, &buf)
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    generator: &'a Stamp,
    data: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, stamp: &Stamp, data: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&Stamped {
        generator: stamp,
        data,
    })?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// Reads a stamped CSV back, skipping the comment line.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok((header, rows))
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_with_stamp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b.csv");
        let stamp = Stamp::new("abc".into());
        write_csv(
            &path,
            &stamp,
            &["x".into(), "y".into()],
            vec![vec!["1".to_string(), "2,5".to_string()]],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# gsee-bench "));
        let (h, rows) = read_csv(&path).unwrap();
        assert_eq!(h, ["x", "y"]);
        assert_eq!(rows, [["1", "2,5"]]);
    }
}
