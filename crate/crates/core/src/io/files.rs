//! Typed files: correspondences, point sets and shape samples.

use crate::error::{Error, Result};
use crate::projective::ProjectivePoint;
use crate::shape::ProjectiveShape;
use crate::stats::ShapeSample;

use super::document::{fmt_f64, Document, Table};

/// Largest deviation from unit norm accepted for a stored axis.
pub const AXIS_NORM_TOL: f64 = 1e-6;

fn coord_columns(prefix: &[&str], dim: usize) -> Vec<String> {
    prefix.iter().map(|s| s.to_string()).chain((1..=dim).map(|j| format!("x{j}"))).collect()
}

fn parse_label_list(s: &str) -> Result<Vec<i64>> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|w| {
            w.parse().map_err(|_| Error::Parse { line: 0, message: format!("bad landmark label '{w}' in list '{s}'") })
        })
        .collect()
}

fn render_label_list(labels: &[i64]) -> String {
    if labels.is_empty() {
        return "-".into();
    }
    labels.iter().map(i64::to_string).collect::<Vec<_>>().join(",")
}

fn check_count(doc: &Document, key: &str, got: usize) -> Result<()> {
    let expected: usize = doc.get_parsed(key)?;
    if expected != got {
        return Err(Error::Parse { line: 0, message: format!("field '{key}' says {expected}, found {got}") });
    }
    Ok(())
}

/// Matched affine pixel coordinates of k landmarks in two images.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceFile {
    pub pair: String,
    pub rows: Vec<(i64, [f64; 4])>,
}

impl CorrespondenceFile {
    pub const KIND: &'static str = "correspondences";

    pub fn to_document(&self) -> Document {
        let mut doc = Document::new(Self::KIND);
        doc.field("pair", &self.pair).field("k", self.rows.len());
        let mut t = Table::new("matches", &["label", "x1", "y1", "x2", "y2"]);
        for (label, p) in &self.rows {
            let mut row = vec![label.to_string()];
            row.extend(p.iter().map(|&v| fmt_f64(v)));
            t.push(row);
        }
        doc.tables.push(t);
        doc
    }

    pub fn from_document(doc: &Document) -> Result<Self> {
        doc.expect_kind(&[Self::KIND])?;
        let t = doc.table("matches")?;
        t.expect_columns(&["label", "x1", "y1", "x2", "y2"].map(String::from))?;
        let mut rows = Vec::with_capacity(t.rows.len());
        for r in 0..t.rows.len() {
            let mut p = [0.0; 4];
            for (j, v) in p.iter_mut().enumerate() {
                *v = t.f64_at(r, j + 1)?;
            }
            rows.push((t.i64_at(r, 0)?, p));
        }
        check_count(doc, "k", rows.len())?;
        Ok(CorrespondenceFile { pair: doc.get("pair")?.to_string(), rows })
    }
}

/// Labelled points of ℝPᵐ as unit homogeneous rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PointsFile {
    pub labels: Vec<i64>,
    pub points: Vec<ProjectivePoint>,
}

impl PointsFile {
    pub const KIND: &'static str = "points";

    pub fn m(&self) -> usize {
        self.points.first().map_or(0, |p| p.dim())
    }

    pub fn table(&self) -> Table {
        let cols = coord_columns(&["label"], self.m() + 1);
        let mut t = Table { name: "points".into(), columns: cols, ..Default::default() };
        for (l, p) in self.labels.iter().zip(&self.points) {
            let mut row = vec![l.to_string()];
            row.extend(p.coords().iter().map(|&v| fmt_f64(v)));
            t.push(row);
        }
        t
    }

    pub fn to_document(&self) -> Document {
        let mut doc = Document::new(Self::KIND);
        doc.field("m", self.m()).field("k", self.points.len());
        doc.tables.push(self.table());
        doc
    }

    /// Reads the `points` table of a points or reconstruction document.
    pub fn from_document(doc: &Document) -> Result<Self> {
        doc.expect_kind(&[Self::KIND, super::RECONSTRUCTION_KIND])?;
        let m: usize = doc.get_parsed("m")?;
        let t = doc.table("points")?;
        t.expect_columns(&coord_columns(&["label"], m + 1))?;
        let mut labels = Vec::with_capacity(t.rows.len());
        let mut points = Vec::with_capacity(t.rows.len());
        for r in 0..t.rows.len() {
            labels.push(t.i64_at(r, 0)?);
            let x = (1..=m + 1).map(|c| t.f64_at(r, c)).collect::<Result<Vec<_>>>()?;
            points.push(
                ProjectivePoint::from_slice(&x)
                    .map_err(|e| Error::Parse { line: t.lines[r], message: e.to_string() })?,
            );
        }
        check_count(doc, "k", points.len())?;
        Ok(PointsFile { labels, points })
    }
}

/// A sample of n projective shapes sharing (m, k, q) and frame labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapesFile {
    pub m: usize,
    /// frame landmark labels, empty when unknown
    pub frame: Vec<i64>,
    pub shapes: Vec<ProjectiveShape>,
}

impl ShapesFile {
    pub const KIND: &'static str = "shapes";

    pub fn q(&self) -> usize {
        self.shapes.first().map_or(0, |s| s.q())
    }

    pub fn to_document(&self) -> Document {
        let mut doc = Document::new(Self::KIND);
        doc.field("m", self.m)
            .field("k", self.m + 2 + self.q())
            .field("q", self.q())
            .field("frame", render_label_list(&self.frame))
            .field("n", self.shapes.len());
        let mut t =
            Table { name: "axes".into(), columns: coord_columns(&["obs", "axis"], self.m + 1), ..Default::default() };
        for (r, s) in self.shapes.iter().enumerate() {
            for (a, axis) in s.axes().iter().enumerate() {
                let mut row = vec![(r + 1).to_string(), (a + 1).to_string()];
                row.extend(axis.coords().iter().map(|&v| fmt_f64(v)));
                t.push(row);
            }
        }
        doc.tables.push(t);
        doc
    }

    /// Parses and renormalizes each axis after checking its norm.
    pub fn from_document(doc: &Document) -> Result<Self> {
        doc.expect_kind(&[Self::KIND])?;
        let m: usize = doc.get_parsed("m")?;
        let q: usize = doc.get_parsed("q")?;
        let n: usize = doc.get_parsed("n")?;
        let k: usize = doc.get_parsed("k")?;
        if m == 0 || q == 0 || k != m + 2 + q {
            return Err(Error::Parse { line: 0, message: format!("inconsistent header m={m} k={k} q={q}") });
        }
        let frame = parse_label_list(doc.get("frame")?)?;
        if !frame.is_empty() && frame.len() != m + 2 {
            return Err(Error::Parse {
                line: 0,
                message: format!("frame lists {} labels, need {}", frame.len(), m + 2),
            });
        }
        let t = doc.table("axes")?;
        t.expect_columns(&coord_columns(&["obs", "axis"], m + 1))?;
        if t.rows.len() != n * q {
            return Err(Error::Parse {
                line: 0,
                message: format!("expected {} axis rows, found {}", n * q, t.rows.len()),
            });
        }
        let mut shapes = Vec::with_capacity(n);
        for r in 0..n {
            let mut axes = Vec::with_capacity(q);
            for a in 0..q {
                let row = r * q + a;
                if t.usize_at(row, 0)? != r + 1 || t.usize_at(row, 1)? != a + 1 {
                    return Err(Error::Parse {
                        line: t.lines[row],
                        message: format!("expected observation {} axis {}", r + 1, a + 1),
                    });
                }
                let x = (2..m + 3).map(|c| t.f64_at(row, c)).collect::<Result<Vec<_>>>()?;
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if !((norm - 1.0).abs() <= AXIS_NORM_TOL) {
                    return Err(Error::Parse {
                        line: t.lines[row],
                        message: format!("axis has norm {norm}, expected 1"),
                    });
                }
                axes.push(ProjectivePoint::from_slice(&x)?);
            }
            shapes.push(ProjectiveShape::new(axes)?);
        }
        Ok(ShapesFile { m, frame, shapes })
    }

    pub fn sample(&self) -> Result<ShapeSample> {
        ShapeSample::new(self.shapes.clone())
    }

    /// The single shape of a file with n = 1.
    pub fn single(&self) -> Result<&ProjectiveShape> {
        match &self.shapes[..] {
            [s] => Ok(s),
            _ => Err(Error::InvalidInput(format!("expected exactly one shape, file holds {}", self.shapes.len()))),
        }
    }
}
