//! Labeled CSV data: a header row naming every domain parameter plus a label
//! column, then one row of integers per example. Column order is free.

use std::path::Path;

use fairprobe_core::{InputDomain, Label, LabeledDataset, PointInput};

use crate::error::{Error, Result};

pub fn load_csv(path: &Path, domain: &InputDomain, label_column: &str) -> Result<LabeledDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut dataset = read_csv(file, domain, label_column)?;
    dataset.source = path.display().to_string();
    Ok(dataset)
}

/// [`load_csv`] over any reader. Rows are numbered from 1, header excluded.
pub fn read_csv<R: std::io::Read>(reader: R, domain: &InputDomain, label_column: &str) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Schema(e.to_string()))?.clone();
    let column = |name: &str| -> Result<usize> {
        let mut hits = header.iter().enumerate().filter(|(_, h)| *h == name);
        let (i, _) = hits
            .next()
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))?;
        if hits.next().is_some() {
            return Err(Error::Schema(format!("column `{name}` appears twice")));
        }
        Ok(i)
    };
    let positions: Vec<usize> = domain.params().iter().map(|p| column(&p.name)).collect::<Result<_>>()?;
    let label_pos = column(label_column)?;

    let mut rows = Vec::new();
    for (n, record) in rdr.records().enumerate() {
        let row = n + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        let cell = |pos: usize, name: &str| -> Result<i64> {
            let text = record.get(pos).unwrap_or("");
            text.parse().map_err(|_| Error::Parse {
                row,
                column: name.to_string(),
                message: format!("`{text}` is not an integer"),
            })
        };
        let mut values = Vec::with_capacity(domain.len());
        for (p, &pos) in domain.params().iter().zip(&positions) {
            let v = cell(pos, &p.name)?;
            if !p.contains(v) {
                return Err(Error::Bound {
                    row,
                    column: p.name.clone(),
                    value: v,
                    min: p.min_value,
                    max: p.max_value,
                });
            }
            values.push(v);
        }
        let label = Label(cell(label_pos, label_column)?);
        rows.push((PointInput(values), label));
    }
    Ok(LabeledDataset::new(domain.clone(), rows, "")?)
}

/// Writes parameters in domain order followed by the label column.
pub fn write_csv(path: &Path, data: &LabeledDataset, label_column: &str) -> Result<()> {
    let mut buf = Vec::new();
    render_csv(&mut buf, data, label_column)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn render_csv<W: std::io::Write>(writer: W, data: &LabeledDataset, label_column: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    let mut header: Vec<&str> = data.domain().params().iter().map(|p| p.name.as_str()).collect();
    header.push(label_column);
    w.write_record(&header).map_err(csv_err)?;
    for (x, y) in data.rows() {
        let mut cells: Vec<String> = x.values().iter().map(i64::to_string).collect();
        cells.push(y.0.to_string());
        w.write_record(&cells).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}
