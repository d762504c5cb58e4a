//! File formats: datasets as CSV behind a one-line JSON header, posterior
//! samples as CSV with a JSON sidecar, dense matrices as CSV.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::data::{Dataset, Design, ParamPoint};
use crate::error::{domain, Error, Result};
use crate::gibbs::PosteriorSamples;

/// Prefix of the JSON header line.
const HEADER_PREFIX: &str = "# ";

/// Writes `header` as a `# {json}` line, then a CSV table with feature
/// columns `x0..` (or `row,col` for entry designs), `label` and `p`.
pub fn write_dataset_csv(path: &Path, data: &Dataset, header: &Value) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "{HEADER_PREFIX}{}", serde_json::to_string(header)?)?;
    let mut w = csv::Writer::from_writer(file);
    let p = data.true_cond_prob();
    match data.design() {
        Design::Dense(x) => {
            let mut names: Vec<String> = (0..x.ncols()).map(|j| format!("x{j}")).collect();
            names.push("label".into());
            names.push("p".into());
            w.write_record(&names)?;
            for (i, row) in x.rows().into_iter().enumerate() {
                let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                rec.push(data.labels()[i].to_string());
                rec.push(p.map_or(String::new(), |p| p[i].to_string()));
                w.write_record(&rec)?;
            }
        }
        Design::Entries { rows, cols, index } => {
            w.write_record([format!("row/{rows}"), format!("col/{cols}"), "label".into(), "p".into()])?;
            for (i, &(r, c)) in index.iter().enumerate() {
                w.write_record([
                    r.to_string(),
                    c.to_string(),
                    data.labels()[i].to_string(),
                    p.map_or(String::new(), |p| p[i].to_string()),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn parse(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| domain(format!("bad number {s:?}: {e}")))
}

/// Inverse of [`write_dataset_csv`].
pub fn read_dataset_csv(path: &Path) -> Result<(Dataset, Value)> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let header: Value = serde_json::from_str(
        first
            .strip_prefix(HEADER_PREFIX)
            .ok_or_else(|| domain("dataset file lacks its JSON header line"))?,
    )?;
    let mut r = csv::Reader::from_reader(reader);
    let names = r.headers()?.clone();
    let width = names.len();
    if width < 3 {
        return Err(domain("dataset table needs at least three columns"));
    }
    let dims = |name: &str, tag: &str| name.strip_prefix(tag).and_then(|v| v.parse::<usize>().ok());
    let entries = match (dims(&names[0], "row/"), dims(&names[1], "col/")) {
        (Some(rows), Some(cols)) => Some((rows, cols)),
        _ => None,
    };
    let mut labels = Vec::new();
    let mut probs = Vec::new();
    let mut has_p = true;
    let mut feats = Vec::new();
    let mut index = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != width {
            return Err(domain("ragged dataset row"));
        }
        match entries {
            Some(_) => index.push((
                rec[0].parse::<usize>().map_err(|e| domain(e.to_string()))?,
                rec[1].parse::<usize>().map_err(|e| domain(e.to_string()))?,
            )),
            None => {
                for v in rec.iter().take(width - 2) {
                    feats.push(parse(v)?);
                }
            }
        }
        labels.push(parse(&rec[width - 2])?);
        if rec[width - 1].is_empty() {
            has_p = false;
        } else {
            probs.push(parse(&rec[width - 1])?);
        }
    }
    let design = match entries {
        Some((rows, cols)) => Design::Entries { rows, cols, index },
        None => Design::Dense(Array2::from_shape_vec((labels.len(), width - 2), feats).map_err(|e| domain(e.to_string()))?),
    };
    let p = if has_p { Some(probs) } else { None };
    Ok((Dataset::new(design, labels, p)?, header))
}

/// Sidecar describing a samples CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplesMeta {
    pub draws: usize,
    /// `vector`, `factors` (L, R, gamma flattened row-major) or `matrix`.
    pub layout: String,
    pub shape: Vec<usize>,
    pub acceptance_rate: f64,
    pub final_scales: Vec<f64>,
    #[serde(default)]
    pub extra: Value,
}

fn layout(p: &ParamPoint) -> (String, Vec<usize>) {
    match p {
        ParamPoint::Vector(v) => ("vector".into(), vec![v.len()]),
        ParamPoint::Matrix(m) => ("matrix".into(), vec![m.nrows(), m.ncols()]),
        ParamPoint::Factors(f) => ("factors".into(), vec![f.l.nrows(), f.r.nrows(), f.rank()]),
    }
}

/// Writes one row per draw (`log_target, c0, c1, ...`) to `path` and the
/// metadata to `path` with extension `json`.
pub fn write_samples(path: &Path, samples: &PosteriorSamples, extra: Value) -> Result<SamplesMeta> {
    let first = samples.draws.first().ok_or(Error::Empty("posterior samples"))?;
    let (layout, shape) = layout(first);
    let mut w = csv::Writer::from_path(path)?;
    let width = first.flatten().len();
    let mut head = vec!["log_target".to_string()];
    head.extend((0..width).map(|j| format!("c{j}")));
    w.write_record(&head)?;
    for (d, lt) in samples.draws.iter().zip(&samples.log_unnorm_target) {
        let mut rec = vec![lt.to_string()];
        rec.extend(d.flatten().iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    let meta = SamplesMeta {
        draws: samples.draws.len(),
        layout,
        shape,
        acceptance_rate: samples.acceptance_rate,
        final_scales: samples.final_scales.clone(),
        extra,
    };
    std::fs::write(path.with_extension("json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(meta)
}

/// Dense matrix as headerless CSV, one matrix row per line.
pub fn write_matrix_csv(path: &Path, m: &Array2<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in m.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut vals = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    for rec in r.records() {
        let rec = rec?;
        if *cols.get_or_insert(rec.len()) != rec.len() {
            return Err(domain("ragged matrix row"));
        }
        for v in rec.iter() {
            vals.push(parse(v)?);
        }
        rows += 1;
    }
    Array2::from_shape_vec((rows, cols.unwrap_or(0)), vals).map_err(|e| domain(e.to_string()))
}
