//! Line-oriented key/value + table documents.
//!
//! ```text
//! projshape <kind>
//! <key> <value>
//! table <name>
//! <column> <column> ...
//! <cell> <cell> ...
//! end
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Fields and tables
//! keep their order, so rendering a parsed document reproduces it.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const MAGIC: &str = "projshape";

/// Formats a double with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// source line of each row, 0 for documents built in memory
    pub lines: Vec<usize>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
        self.lines.push(0);
    }

    fn line_of(&self, r: usize) -> usize {
        self.lines.get(r).copied().unwrap_or(0)
    }

    /// Cell `c` of row `r` parsed as a float.
    pub fn f64_at(&self, r: usize, c: usize) -> Result<f64> {
        let cell = &self.rows[r][c];
        cell.parse().map_err(|_| Error::Parse {
            line: self.line_of(r),
            message: format!("column '{}': '{cell}' is not a number", self.columns[c]),
        })
    }

    pub fn i64_at(&self, r: usize, c: usize) -> Result<i64> {
        let cell = &self.rows[r][c];
        cell.parse().map_err(|_| Error::Parse {
            line: self.line_of(r),
            message: format!("column '{}': '{cell}' is not an integer", self.columns[c]),
        })
    }

    pub fn usize_at(&self, r: usize, c: usize) -> Result<usize> {
        let cell = &self.rows[r][c];
        cell.parse().map_err(|_| Error::Parse {
            line: self.line_of(r),
            message: format!("column '{}': '{cell}' is not a nonnegative integer", self.columns[c]),
        })
    }

    /// Fails unless the header is exactly `expected`.
    pub fn expect_columns(&self, expected: &[String]) -> Result<()> {
        if self.columns != expected {
            return Err(Error::Parse {
                line: 0,
                message: format!(
                    "table '{}' has columns [{}], expected [{}]",
                    self.name,
                    self.columns.join(" "),
                    expected.join(" ")
                ),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub kind: String,
    pub fields: Vec<(String, String)>,
    pub tables: Vec<Table>,
}

impl Document {
    pub fn new(kind: &str) -> Self {
        Document { kind: kind.into(), ..Default::default() }
    }

    pub fn field(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.fields.push((key.into(), value.to_string()));
        self
    }

    pub fn field_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.field(key, fmt_f64(value))
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Parse { line: 0, message: format!("missing field '{key}'") })
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.get(key)?;
        v.parse().map_err(|_| Error::Parse { line: 0, message: format!("field '{key}': cannot parse '{v}'") })
    }

    pub fn table(&self, name: &str) -> Result<&Table> {
        self.tables
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::Parse { line: 0, message: format!("missing table '{name}'") })
    }

    pub fn expect_kind(&self, kinds: &[&str]) -> Result<()> {
        if !kinds.contains(&self.kind.as_str()) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected a {} document, found '{}'", kinds.join(" or "), self.kind),
            });
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{MAGIC} {}", self.kind).unwrap();
        for (k, v) in &self.fields {
            writeln!(out, "{k} {v}").unwrap();
        }
        for t in &self.tables {
            writeln!(out, "table {}", t.name).unwrap();
            writeln!(out, "{}", t.columns.join(" ")).unwrap();
            for row in &t.rows {
                writeln!(out, "{}", row.join(" ")).unwrap();
            }
            writeln!(out, "end").unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Document> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let err = |line: usize, message: String| Error::Parse { line, message };

        let (n, first) = lines.next().ok_or_else(|| err(1, "empty document".into()))?;
        let kind = match first.split_whitespace().collect::<Vec<_>>()[..] {
            [MAGIC, kind] => kind.to_string(),
            _ => return Err(err(n, format!("expected '{MAGIC} <kind>' header"))),
        };
        let mut doc = Document::new(&kind);
        while let Some((n, line)) = lines.next() {
            let words: Vec<&str> = line.split_whitespace().collect();
            if words[0] == "table" {
                if words.len() != 2 {
                    return Err(err(n, "expected 'table <name>'".into()));
                }
                let name = words[1];
                if doc.tables.iter().any(|t| t.name == name) {
                    return Err(err(n, format!("duplicate table '{name}'")));
                }
                let (_, header) = lines.next().ok_or_else(|| err(n, format!("table '{name}' has no header")))?;
                let columns: Vec<&str> = header.split_whitespace().collect();
                let mut table = Table::new(name, &columns);
                loop {
                    let (n, row) =
                        lines.next().ok_or_else(|| err(n, format!("table '{name}' is not closed by 'end'")))?;
                    if row == "end" {
                        break;
                    }
                    let cells: Vec<String> = row.split_whitespace().map(String::from).collect();
                    if cells.len() != columns.len() {
                        return Err(err(
                            n,
                            format!("table '{name}': row has {} cells, header has {}", cells.len(), columns.len()),
                        ));
                    }
                    table.rows.push(cells);
                    table.lines.push(n);
                }
                doc.tables.push(table);
            } else {
                if words.len() != 2 {
                    return Err(err(n, format!("expected '<key> <value>', got '{line}'")));
                }
                if doc.fields.iter().any(|(k, _)| k == words[0]) {
                    return Err(err(n, format!("duplicate field '{}'", words[0])));
                }
                doc.fields.push((words[0].into(), words[1].into()));
            }
        }
        Ok(doc)
    }

    pub fn read(path: &std::path::Path) -> Result<Document> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Document::parse(&text)
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.render()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}
