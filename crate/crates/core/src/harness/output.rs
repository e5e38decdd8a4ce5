//! CSV and plot-data writers.

use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::sweep::{SeRow, SweepResult, UeLabel};
use crate::txrx::MethodId;

pub const CSV_HEADER: [&str; 7] = ["method", "power_dbm", "ue", "mean_se", "std_se", "ci95", "realizations"];

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}, record {record}: {message}")]
    Parse { path: String, record: usize, message: String },
}

/// Rounds to 9 significant digits and prints the shortest decimal form.
pub fn sig9(x: f64) -> String {
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

/// Writes the CSV body to any sink.
pub fn write_csv<W: Write>(result: &SweepResult, sink: W) -> csv::Result<()> {
    let mut sorted = result.clone();
    sorted.sort();
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in &sorted.rows {
        w.write_record([
            r.method.name().to_string(),
            sig9(r.power_dbm),
            r.ue.as_str().to_string(),
            sig9(r.mean_se),
            sig9(r.std_se),
            sig9(r.ci95),
            r.realizations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(result: &SweepResult) -> String {
    let mut buf = Vec::new();
    write_csv(result, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<(), OutputError> {
    let label = path.display().to_string();
    let file = std::fs::File::create(path).map_err(|source| OutputError::Io { path: label.clone(), source })?;
    write_csv(result, std::io::BufWriter::new(file)).map_err(|source| OutputError::Csv { path: label, source })
}

pub fn parse_csv_str(text: &str, label: &str) -> Result<SweepResult, OutputError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let perr = |record: usize, message: String| OutputError::Parse { path: label.into(), record, message };
    let header = rdr.headers().map_err(|source| OutputError::Csv { path: label.into(), source })?;
    if header.iter().ne(CSV_HEADER) {
        return Err(perr(0, format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|source| OutputError::Csv { path: label.into(), source })?;
        let n = i + 1;
        let f = |k: usize| rec[k].parse::<f64>().map_err(|e| perr(n, format!("{}: {e}", CSV_HEADER[k])));
        rows.push(SeRow {
            method: rec[0].parse::<MethodId>().map_err(|e| perr(n, e))?,
            power_dbm: f(1)?,
            ue: rec[2].parse::<UeLabel>().map_err(|e| perr(n, e))?,
            mean_se: f(3)?,
            std_se: f(4)?,
            ci95: f(5)?,
            realizations: rec[6].parse().map_err(|e| perr(n, format!("realizations: {e}")))?,
        });
    }
    Ok(SweepResult { rows })
}

pub fn parse_csv(path: &Path) -> Result<SweepResult, OutputError> {
    let label = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| OutputError::Io { path: label.clone(), source })?;
    parse_csv_str(&text, &label)
}

fn write_text(path: &Path, text: &str) -> Result<(), OutputError> {
    std::fs::write(path, text).map_err(|source| OutputError::Io { path: path.display().to_string(), source })
}

/// Per-method columnar series: power, then mean and ci95 for UE1, UE2, sum.
pub fn method_series_text(result: &SweepResult, method: MethodId) -> String {
    let mut out = String::from("# power_dbm ue1_mean ue1_ci95 ue2_mean ue2_ci95 sum_mean sum_ci95\n");
    let cols: Vec<Vec<&SeRow>> = UeLabel::ALL.iter().map(|&u| result.series(method, u)).collect();
    for i in 0..cols[0].len() {
        out.push_str(&sig9(cols[0][i].power_dbm));
        for c in &cols {
            out.push(' ');
            out.push_str(&sig9(c[i].mean_se));
            out.push(' ');
            out.push_str(&sig9(c[i].ci95));
        }
        out.push('\n');
    }
    out
}

/// Sum SE of every method side by side.
pub fn comparison_text(result: &SweepResult) -> String {
    let methods = result.methods();
    let mut out = String::from("# power_dbm");
    for m in &methods {
        out.push_str(&format!(" {m}_mean {m}_ci95"));
    }
    out.push('\n');
    let series: Vec<Vec<&SeRow>> = methods.iter().map(|&m| result.series(m, UeLabel::Sum)).collect();
    let points = series.first().map_or(0, Vec::len);
    for i in 0..points {
        out.push_str(&sig9(series[0][i].power_dbm));
        for s in &series {
            out.push_str(&format!(" {} {}", sig9(s[i].mean_se), sig9(s[i].ci95)));
        }
        out.push('\n');
    }
    out
}

/// Writes `se_<method>.dat` per method and `sum_se_comparison.dat` into `dir`.
pub fn emit_plot_data(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    std::fs::create_dir_all(dir).map_err(|source| OutputError::Io { path: dir.display().to_string(), source })?;
    let mut written = Vec::new();
    for m in result.methods() {
        let path = dir.join(format!("se_{}.dat", m.name().to_ascii_lowercase()));
        write_text(&path, &method_series_text(result, m))?;
        written.push(path);
    }
    let path = dir.join("sum_se_comparison.dat");
    write_text(&path, &comparison_text(result))?;
    written.push(path);
    Ok(written)
}
