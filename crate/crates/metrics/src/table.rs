//! Long-format result tables with a deterministic CSV encoding.
//!
//! One row per cell: the axis coordinates followed by the value. The CSV is
//! byte-deterministic for a given table: header mandatory, UTF-8, LF line
//! endings, rows in lexicographic order over the coordinates, floats in
//! shortest round-trip form. Missing cells are written as `NA`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{MetricsError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub coords: Vec<String>,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub metric_name: String,
    pub axes: Vec<String>,
    pub rows: Vec<TableRow>,
    /// Config snapshot, content hash, and similar provenance strings.
    pub metadata: BTreeMap<String, String>,
}

impl ResultTable {
    pub fn new(metric_name: impl Into<String>, axes: Vec<String>) -> Self {
        ResultTable {
            metric_name: metric_name.into(),
            axes,
            rows: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, coords: Vec<String>, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(MetricsError::Table(format!(
                "non-finite cell at {coords:?}; mark missing cells explicitly"
            )));
        }
        self.push_cell(coords, Some(value))
    }

    pub fn push_missing(&mut self, coords: Vec<String>) -> Result<()> {
        self.push_cell(coords, None)
    }

    fn push_cell(&mut self, coords: Vec<String>, value: Option<f64>) -> Result<()> {
        if coords.len() != self.axes.len() {
            return Err(MetricsError::Table(format!(
                "row has {} coordinates, table has {} axes",
                coords.len(),
                self.axes.len()
            )));
        }
        self.rows.push(TableRow { coords, value });
        Ok(())
    }

    pub fn insert_metadata(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.metadata.insert(key.into(), value.into());
    }

    /// Cells matching a (axis, coordinate) filter.
    pub fn select(&self, axis: &str, coord: &str) -> Vec<&TableRow> {
        let Some(k) = self.axes.iter().position(|a| a == axis) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter(|r| r.coords[k] == coord)
            .collect()
    }

    /// Deterministic CSV bytes.
    pub fn to_csv(&self) -> String {
        let mut sorted: Vec<&TableRow> = self.rows.iter().collect();
        sorted.sort_by(|a, b| a.coords.cmp(&b.coords));
        let mut out = String::new();
        out.push_str(&self.axes.join(","));
        out.push_str(",value\n");
        for row in sorted {
            out.push_str(&row.coords.join(","));
            out.push(',');
            match row.value {
                Some(v) => out.push_str(&format_value(v)),
                None => out.push_str("NA"),
            }
            out.push('\n');
        }
        out
    }
}

/// Shortest round-trip decimal form of a float.
pub fn format_value(v: f64) -> String {
    format!("{v}")
}

/// Fixed-width zero-padded coordinate so lexicographic CSV order matches
/// numeric order.
pub fn index_coord(i: usize) -> String {
    format!("{i:06}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_sorted_and_stable() {
        let mut t = ResultTable::new("m", vec!["a".into(), "b".into()]);
        t.push(vec!["2".into(), "x".into()], 1.5).unwrap();
        t.push(vec!["1".into(), "y".into()], -0.25).unwrap();
        t.push_missing(vec!["1".into(), "x".into()]).unwrap();
        let csv = t.to_csv();
        assert_eq!(csv, "a,b,value\n1,x,NA\n1,y,-0.25\n2,x,1.5\n");

        let mut t2 = ResultTable::new("m", vec!["a".into(), "b".into()]);
        t2.push_missing(vec!["1".into(), "x".into()]).unwrap();
        t2.push(vec!["1".into(), "y".into()], -0.25).unwrap();
        t2.push(vec!["2".into(), "x".into()], 1.5).unwrap();
        assert_eq!(csv, t2.to_csv());
    }

    #[test]
    fn non_finite_cells_are_rejected() {
        let mut t = ResultTable::new("m", vec!["a".into()]);
        assert!(t.push(vec!["1".into()], f64::NAN).is_err());
        assert!(t.push(vec!["1".into()], f64::INFINITY).is_err());
    }

    #[test]
    fn coordinate_arity_is_checked() {
        let mut t = ResultTable::new("m", vec!["a".into(), "b".into()]);
        assert!(t.push(vec!["1".into()], 0.0).is_err());
    }
}
