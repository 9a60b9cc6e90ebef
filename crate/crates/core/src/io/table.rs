use std::io::{BufRead, Write};

use super::IoError;

/// Comma-separated numeric table with a header row. Values are written with
/// 12 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:.11e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_string_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), IoError> {
        let f = std::fs::File::create(path).map_err(|e| IoError::file(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        self.write(&mut w).map_err(|e| IoError::file(path, e))?;
        w.flush().map_err(|e| IoError::file(path, e))
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self, IoError> {
        let mut lines = r.lines();
        let header = match lines.next() {
            Some(h) => h.map_err(|e| IoError::Format(e.to_string()))?,
            None => return Err(IoError::Format("empty table".into())),
        };
        let mut t = Table::new(header.split(',').map(str::trim));
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| IoError::Format(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|c| match c.trim() {
                    "" => Ok(f64::NAN),
                    c => c.parse::<f64>(),
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| IoError::Format(format!("line {}: {e}", n + 2)))?;
            if row.len() != t.header.len() {
                return Err(IoError::Format(format!("line {} has {} cells, header has {}", n + 2, row.len(), t.header.len())));
            }
            t.rows.push(row);
        }
        Ok(t)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, IoError> {
        let f = std::fs::File::open(path).map_err(|e| IoError::file(path, e))?;
        Self::read(std::io::BufReader::new(f))
    }
}
