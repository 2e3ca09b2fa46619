//! Rectangular numeric CSV output: UTF-8, comma separators, LF endings,
//! every value printed with 17 significant digits so reruns are
//! byte-identical and nothing is lost to rounding.

use layerlab_core::{Error, Result};
use std::io::Write;
use std::path::Path;

pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        for (i, name) in header.iter().enumerate() {
            assert!(!name.is_empty(), "empty column name");
            assert!(
                !header[..i].contains(name),
                "duplicate column name {name}"
            );
        }
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "ragged CSV row");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)
            .map_err(|e| Error::Domain(format!("cannot create {}: {e}", path.display())))?;
        file.write_all(self.render().as_bytes())
            .map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display())))
    }
}
