//! CSV interchange: `id,f0,f1,...,f{d-1},label[,noise_tag]`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Dataset, Instance};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, path.display().to_string())
}

/// Parses CSV text. Line numbers in errors are 1-based and count the header.
pub fn read_csv<R: Read>(reader: R, provenance: String) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = records
        .next()
        .ok_or_else(|| parse_err(1, "missing header"))??;
    let cols: Vec<&str> = header.iter().collect();
    if cols.first() != Some(&"id") {
        return Err(parse_err(1, "first column must be `id`"));
    }
    let has_tag = cols.last() == Some(&"noise_tag");
    let label_pos = if has_tag { cols.len().checked_sub(2) } else { cols.len().checked_sub(1) };
    let label_pos = match label_pos {
        Some(p) if p >= 1 && cols[p] == "label" => p,
        _ => return Err(parse_err(1, "header must end with `label` or `label,noise_tag`")),
    };
    let dim = label_pos - 1;
    for (j, name) in cols[1..label_pos].iter().enumerate() {
        if *name != format!("f{j}") {
            return Err(parse_err(1, format!("expected feature column `f{j}`, found `{name}`")));
        }
    }
    let width = cols.len();

    let mut instances = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != width {
            return Err(parse_err(line, format!("expected {width} cells, found {}", rec.len())));
        }
        let id = &rec[0];
        if id.is_empty() {
            return Err(parse_err(line, "empty id"));
        }
        let mut features = Vec::with_capacity(dim);
        for j in 0..dim {
            let cell = &rec[1 + j];
            if cell.is_empty() {
                return Err(parse_err(line, format!("missing value in column f{j}")));
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(line, format!("bad number `{cell}` in column f{j}")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("non-finite value `{cell}` in column f{j}")));
            }
            features.push(v);
        }
        let label = match &rec[label_pos] {
            "0" => 0,
            "1" => 1,
            other => return Err(parse_err(line, format!("label must be 0 or 1, found `{other}`"))),
        };
        let noise_tag = if has_tag {
            match &rec[label_pos + 1] {
                "0" | "false" => Some(false),
                "1" | "true" => Some(true),
                other => return Err(parse_err(line, format!("noise_tag must be 0 or 1, found `{other}`"))),
            }
        } else {
            None
        };
        instances.push(Instance {
            id: id.to_string(),
            features,
            label,
            noise_tag,
        });
    }
    Dataset::new(instances, provenance).map_err(|e| match e {
        Error::Argument(m) => parse_err(0, m),
        other => other,
    })
}

pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(to_csv_string(ds).as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Serializes with shortest round-trip float formatting, so reloading is bit-exact.
pub fn to_csv_string(ds: &Dataset) -> String {
    let tagged = ds.has_noise_tags();
    let mut out = String::from("id");
    for j in 0..ds.feature_dim() {
        out.push_str(&format!(",f{j}"));
    }
    out.push_str(",label");
    if tagged {
        out.push_str(",noise_tag");
    }
    out.push('\n');
    for inst in ds.instances() {
        out.push_str(&inst.id);
        for v in &inst.features {
            out.push(',');
            out.push_str(&format!("{v:?}"));
        }
        out.push_str(&format!(",{}", inst.label));
        if tagged {
            out.push_str(if inst.is_noisy() { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    out
}
