//! File helpers: atomic writes and the radii table format.
//!
//! A radii file is CSV with the header
//! `index,class_id,epsilon,density,stop_reason`, one row per point in dataset
//! order. Reals are printed with 17 significant digits.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::dataset::{format_real, Dataset};
use crate::error::{Error, Result};
use crate::expansion::{RadiusResult, StopReason};

/// Write `path` through a sibling temporary file and a rename.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::io(path, std::io::Error::other("not a file path")))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp: PathBuf = path.with_file_name(tmp_name);

    let result = (|| {
        let file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        fill(&mut w)?;
        let file = w
            .into_inner()
            .map_err(|e| Error::io(&tmp, e.into_error()))?;
        file.sync_all().map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::io(path, e))
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<csv>", io),
        other => Error::Format(format!("{other:?}")),
    }
}

/// Side-by-side oracle radii for the optional extra columns.
pub struct OracleColumn<'a>(pub &'a [f64]);

pub fn write_radii(
    sink: &mut dyn Write,
    ds: &Dataset,
    result: &RadiusResult,
    oracle: Option<OracleColumn<'_>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["index", "class_id", "epsilon", "density", "stop_reason"];
    if oracle.is_some() {
        header.extend(["oracle_epsilon", "oracle_abs_diff"]);
    }
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..ds.len() {
        let mut row = vec![
            i.to_string(),
            ds.class_id(i).to_string(),
            format_real(result.epsilons[i]),
            format_real(result.densities[i]),
            result.stop_reasons[i].to_string(),
        ];
        if let Some(OracleColumn(o)) = &oracle {
            row.push(format_real(o[i]));
            row.push(format_real((o[i] - result.epsilons[i]).abs()));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<radii>", e))
}

/// Contents of a radii file.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiiTable {
    pub epsilons: Vec<f64>,
    pub class_ids: Option<Vec<String>>,
    pub densities: Option<Vec<f64>>,
    pub stop_reasons: Option<Vec<StopReason>>,
}

impl RadiiTable {
    /// Check that the table lines up with `ds` row for row.
    pub fn check_against(&self, ds: &Dataset) -> Result<()> {
        if self.epsilons.len() != ds.len() {
            return Err(Error::LengthMismatch {
                expected: ds.len(),
                found: self.epsilons.len(),
            });
        }
        if let Some(ids) = &self.class_ids {
            if let Some(i) = (0..ds.len()).find(|&i| ids[i] != ds.class_id(i).as_str()) {
                return Err(Error::Format(format!(
                    "radii row {i} has class {:?} but the dataset has {:?}",
                    ids[i],
                    ds.class_id(i).as_str()
                )));
            }
        }
        Ok(())
    }
}

pub fn read_radii<R: Read>(source: R) -> Result<RadiiTable> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = r.headers().map_err(csv_err)?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let eps_col =
        col("epsilon").ok_or_else(|| Error::Format("radii file has no `epsilon` column".into()))?;
    let (idx_col, class_col, dens_col, stop_col) = (
        col("index"),
        col("class_id"),
        col("density"),
        col("stop_reason"),
    );

    let mut table = RadiiTable {
        epsilons: Vec::new(),
        class_ids: class_col.map(|_| Vec::new()),
        densities: dens_col.map(|_| Vec::new()),
        stop_reasons: stop_col.map(|_| Vec::new()),
    };
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let field = |c: usize| {
            rec.get(c)
                .ok_or_else(|| Error::Format(format!("radii row {row}: missing column {c}")))
        };
        let real = |c: usize| -> Result<f64> {
            let s = field(c)?;
            s.parse::<f64>().map_err(|_| Error::NonNumeric {
                row: row + 1,
                column: c,
                value: s.to_owned(),
            })
        };
        if let Some(c) = idx_col {
            if field(c)? != row.to_string() {
                return Err(Error::Format(format!(
                    "radii row {row} has index {:?}",
                    field(c)?
                )));
            }
        }
        let eps = real(eps_col)?;
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "radii row {row}: epsilon must be non-negative and finite, got {eps}"
            )));
        }
        table.epsilons.push(eps);
        if let (Some(c), Some(v)) = (class_col, table.class_ids.as_mut()) {
            v.push(field(c)?.to_owned());
        }
        if let (Some(c), Some(v)) = (dens_col, table.densities.as_mut()) {
            v.push(real(c)?);
        }
        if let (Some(c), Some(v)) = (stop_col, table.stop_reasons.as_mut()) {
            v.push(field(c)?.parse()?);
        }
    }
    if table.epsilons.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(table)
}
