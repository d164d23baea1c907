//! Report emission: CSV rows with a fixed column order and a JSON summary.
//! All floats are serialized with 17 significant digits, so reruns with the
//! same seed produce byte-identical files.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{HarnessError, Result};

/// One emitted game round.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub seed: u64,
    pub round: usize,
    pub expert: usize,
    pub loss: f64,
    /// Cumulative regret against each tracked comparator, in declaration
    /// order.
    pub regrets: Vec<f64>,
}

/// 17 significant digits: one leading digit plus 16 after the point.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write the CSV: `seed,round,expert,loss` then one regret column per
/// comparator.
pub fn write_csv(path: &Path, comparator_names: &[String], rows: &[ReportRow]) -> Result<()> {
    let mut out = String::new();
    out.push_str("seed,round,expert,loss");
    for name in comparator_names {
        out.push_str(",regret_");
        out.push_str(name);
    }
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.regrets.len(), comparator_names.len());
        out.push_str(&format!(
            "{},{},{},{}",
            row.seed,
            row.round,
            row.expert,
            fmt_float(row.loss)
        ));
        for r in &row.regrets {
            out.push(',');
            out.push_str(&fmt_float(*r));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| HarnessError::io(path, e))
}

/// serde_json formatter that pins every f64 to 17 significant digits.
struct Digits17 {
    pretty: serde_json::ser::PrettyFormatter<'static>,
}

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        serde_json::ser::Formatter::begin_array(&mut self.pretty, writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        serde_json::ser::Formatter::end_array(&mut self.pretty, writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        serde_json::ser::Formatter::begin_array_value(&mut self.pretty, writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        serde_json::ser::Formatter::end_array_value(&mut self.pretty, writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        serde_json::ser::Formatter::begin_object(&mut self.pretty, writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        serde_json::ser::Formatter::end_object(&mut self.pretty, writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        serde_json::ser::Formatter::begin_object_key(&mut self.pretty, writer, first)
    }

    fn end_object_key<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        serde_json::ser::Formatter::end_object_key(&mut self.pretty, writer)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        serde_json::ser::Formatter::begin_object_value(&mut self.pretty, writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        serde_json::ser::Formatter::end_object_value(&mut self.pretty, writer)
    }
}

/// Serialize any summary value to pretty JSON with 17-digit floats.
pub fn to_json_17<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let fmt = Digits17 {
        pretty: serde_json::ser::PrettyFormatter::new(),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits utf-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let body = to_json_17(value)?;
    fs::write(path, body).map_err(|e| HarnessError::io(path, e))
}
