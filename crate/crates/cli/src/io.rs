//! CSV ingestion and the sample, summary and plot-ready writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use pig_core::{CountMatrix, PosteriorSamples, SummaryReport};

use crate::error::{CliError, CliResult};

/// Scientific notation with 17 significant digits; every `f64` round-trips.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn reader(path: &Path) -> CliResult<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::parse(path, format!("{other:?}")),
    }
}

/// Counts with `id_cols` leading label columns joined by `|` into unit labels.
pub fn parse_counts_csv(path: &Path, id_cols: usize) -> CliResult<CountMatrix> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.len() <= id_cols {
        return Err(CliError::parse(
            path,
            format!(
                "header has {} columns; need more than {id_cols} label columns",
                header.len()
            ),
        ));
    }
    let categories: Vec<String> = header.iter().skip(id_cols).map(str::to_string).collect();
    let mut counts = Vec::new();
    let mut units = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != header.len() {
            return Err(CliError::parse(
                path,
                format!(
                    "line {line}: {} fields, header has {}",
                    record.len(),
                    header.len()
                ),
            ));
        }
        let label = record.iter().take(id_cols).collect::<Vec<_>>().join("|");
        let label = if id_cols == 0 {
            format!("unit_{}", i + 1)
        } else {
            label
        };
        let mut row = Vec::with_capacity(categories.len());
        for (j, cell) in record.iter().enumerate().skip(id_cols) {
            let v: u64 = cell.parse().map_err(|_| {
                CliError::parse(
                    path,
                    format!(
                        "line {line}, column {} ({}): {cell:?} is not a nonnegative integer",
                        j + 1,
                        &header[j]
                    ),
                )
            })?;
            row.push(v);
        }
        if row.iter().all(|&v| v == 0) {
            return Err(CliError::parse(
                path,
                format!("line {line}: unit {label} has no counts"),
            ));
        }
        units.push(label);
        counts.push(row);
    }
    if counts.is_empty() {
        return Err(CliError::parse(path, "no data rows"));
    }
    Ok(CountMatrix::new(counts, units, categories)?)
}

/// One positive value per line; a first line that is not a number is taken as a header.
pub fn parse_reals_csv(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let cell = raw.trim();
        if cell.is_empty() {
            continue;
        }
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => out.push(v),
            Ok(v) => {
                return Err(CliError::parse(
                    path,
                    format!("line {}: {v} is not positive", i + 1),
                ))
            }
            Err(_) if i == 0 => {}
            Err(_) => {
                return Err(CliError::parse(
                    path,
                    format!("line {}: {cell:?} is not a number", i + 1),
                ))
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::parse(path, "no observations"));
    }
    Ok(out)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| CliError::io(path, e))?,
    ))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> CliResult<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `iter,<name>...`; `iter` counts sweeps from 1 within each chain.
pub fn write_samples_csv(path: &Path, samples: &PosteriorSamples) -> CliResult<()> {
    let mut w = create(path)?;
    let io = |e| CliError::io(path, e);
    writeln!(w, "iter,{}", samples.names.join(",")).map_err(io)?;
    for (iter, row) in samples.iters.iter().zip(&samples.draws) {
        let cells: Vec<String> = row.iter().map(|&x| fmt_real(x)).collect();
        writeln!(w, "{iter},{}", cells.join(",")).map_err(io)?;
    }
    finish(path, w)
}

/// Parameter names, `iter` values and draw rows.
pub type SampleTable = (Vec<String>, Vec<usize>, Vec<Vec<f64>>);

/// Reads a file written by [`write_samples_csv`].
pub fn read_samples_csv(path: &Path) -> CliResult<SampleTable> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.get(0) != Some("iter") || header.len() < 2 {
        return Err(CliError::parse(path, "expected header iter,<parameter>..."));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut iters = Vec::new();
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != header.len() {
            return Err(CliError::parse(
                path,
                format!("line {line}: wrong number of fields"),
            ));
        }
        let iter = record[0].parse().map_err(|_| {
            CliError::parse(path, format!("line {line}: bad iter {:?}", &record[0]))
        })?;
        let row = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>().map_err(|_| {
                    CliError::parse(path, format!("line {line}, column {}: {cell:?}", j + 2))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        iters.push(iter);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::parse(path, "no samples"));
    }
    Ok((names, iters, rows))
}

/// Long format `<key>,value`.
pub fn write_long_csv<'a>(
    path: &Path,
    key: &str,
    rows: impl IntoIterator<Item = (&'a str, f64)>,
) -> CliResult<()> {
    let mut w = create(path)?;
    let io = |e| CliError::io(path, e);
    writeln!(w, "{key},value").map_err(io)?;
    for (k, v) in rows {
        writeln!(w, "{k},{}", fmt_real(v)).map_err(io)?;
    }
    finish(path, w)
}

/// `parameter,value` with one row per retained draw and parameter.
pub fn write_plot_csv(path: &Path, samples: &PosteriorSamples) -> CliResult<()> {
    let rows = samples.draws.iter().flat_map(|row| {
        samples
            .names
            .iter()
            .map(String::as_str)
            .zip(row.iter().copied())
    });
    write_long_csv(path, "parameter", rows)
}

/// The summary with extra `meta` fields merged in.
pub fn write_summary_json(
    path: &Path,
    report: &SummaryReport,
    extra_meta: serde_json::Value,
) -> CliResult<()> {
    let mut value = serde_json::to_value(report).expect("summary is serialisable");
    if let (Some(meta), serde_json::Value::Object(extra)) = (
        value.get_mut("meta").and_then(|m| m.as_object_mut()),
        extra_meta,
    ) {
        meta.extend(extra);
    }
    let text = serde_json::to_string_pretty(&value).expect("valid json");
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file_with(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn counts_with_labels() {
        let f = file_with("state,year,a,b\nCT,2015,118,96\nMD,2016,0,4\n");
        let c = parse_counts_csv(f.path(), 2).unwrap();
        assert_eq!(c.unit_labels(), &["CT|2015", "MD|2016"]);
        assert_eq!(c.category_labels(), &["a", "b"]);
        assert_eq!(c.row(0), &[118, 96]);
    }

    #[test]
    fn counts_errors_cite_the_cell() {
        let f = file_with("state,year,cocaine,heroin\nCT,2015,12.5,3\n");
        let e = parse_counts_csv(f.path(), 2).unwrap_err().to_string();
        assert!(
            e.contains("line 2")
                && e.contains("column 3")
                && e.contains("cocaine")
                && e.contains("12.5"),
            "{e}"
        );
        let f = file_with("s,a,b\nX,0,0\n");
        let e = parse_counts_csv(f.path(), 1).unwrap_err().to_string();
        assert!(e.contains("unit X"), "{e}");
    }

    #[test]
    fn reals() {
        assert_eq!(
            parse_reals_csv(file_with("y\n1.5\n2.0\n").path()).unwrap(),
            vec![1.5, 2.0]
        );
        assert_eq!(
            parse_reals_csv(file_with("1.5\n2.0\n").path()).unwrap(),
            vec![1.5, 2.0]
        );
        let e = parse_reals_csv(file_with("y\n1.0\n-1.0\n").path())
            .unwrap_err()
            .to_string();
        assert!(e.contains("line 3"), "{e}");
        let e = parse_reals_csv(file_with("y\n").path())
            .unwrap_err()
            .to_string();
        assert!(e.contains("no observations"));
    }

    #[test]
    fn fmt_has_seventeen_digits() {
        let s = fmt_real(1.0 / 3.0);
        assert_eq!(s, "3.3333333333333331e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 1.0 / 3.0);
    }
}
