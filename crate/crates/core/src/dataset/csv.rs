use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use super::LabeledDataset;
use crate::error::{Error, Result};

/// Position of the class label within each record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelColumn {
    /// UCI letter-recognition layout.
    #[default]
    First,
    Last,
    Index(usize),
}

#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    pub has_header: bool,
    pub label_column: LabelColumn,
    /// Fixed class vocabulary. Without one, classes are numbered in order of
    /// first appearance.
    pub class_order: Option<Vec<String>>,
}

pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<LabeledDataset> {
    let file = File::open(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_csv(file, options)
}

/// Parses comma-separated records. Row numbers in errors are 1-based file
/// lines.
pub fn read_csv(reader: impl Read, options: &CsvOptions) -> Result<LabeledDataset> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(reader);

    let mut names: Vec<String> = options.class_order.clone().unwrap_or_default();
    let mut index: HashMap<String, usize> = names.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
    let fixed = options.class_order.is_some();

    let mut width = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(labels.len() + 1, |p| p.line() as usize);
        let fields = record.len();
        match width {
            None => {
                if fields < 2 {
                    return Err(Error::Parse {
                        row,
                        message: format!("need a label and at least one feature, found {fields} field(s)"),
                    });
                }
                width = Some(fields);
            }
            Some(w) if w != fields => {
                return Err(Error::Parse {
                    row,
                    message: format!("expected {w} fields, found {fields}"),
                });
            }
            Some(_) => {}
        }
        let label_at = match options.label_column {
            LabelColumn::First => 0,
            LabelColumn::Last => fields - 1,
            LabelColumn::Index(i) if i < fields => i,
            LabelColumn::Index(i) => {
                return Err(Error::Parse {
                    row,
                    message: format!("label column {i} beyond {fields} fields"),
                })
            }
        };
        for (column, field) in record.iter().enumerate() {
            if column == label_at {
                continue;
            }
            let value: f64 = field.parse().map_err(|_| Error::ParseFeature {
                row,
                column: column + 1,
                value: field.to_string(),
            })?;
            values.push(value);
        }
        let label = &record[label_at];
        let class = match index.get(label) {
            Some(&c) => c,
            None if fixed => {
                return Err(Error::UnknownLabel {
                    row,
                    label: label.to_string(),
                })
            }
            None => {
                names.push(label.to_string());
                index.insert(label.to_string(), names.len() - 1);
                names.len() - 1
            }
        };
        labels.push(class);
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let d = width.expect("at least one record") - 1;
    let x = Array2::from_shape_vec((labels.len(), d), values).expect("rows have uniform width");
    LabeledDataset::new(x, labels, names)
}

/// Writes label-first records that [`read_csv`] reads back unchanged.
pub fn write_csv(dataset: &LabeledDataset, mut writer: impl Write) -> Result<()> {
    for (row, class) in dataset.rows() {
        write!(writer, "{}", dataset.class_names()[class])?;
        for v in row {
            write!(writer, ",{v}")?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LabeledDataset> {
        read_csv(text.as_bytes(), &CsvOptions::default())
    }

    #[test]
    fn two_rows() {
        let ds = parse("A,1,2\nB,3,4\n").unwrap();
        assert_eq!((ds.n(), ds.d(), ds.k()), (2, 2, 2));
        assert_eq!(ds.class_names(), ["A", "B"]);
        assert_eq!(ds.x()[[1, 0]], 3.0);
    }

    #[test]
    fn letter_row_shape() {
        let ds = parse("T,2,8,3,5,1,8,13,0,6,6,10,8,0,8,0,8\n").unwrap();
        assert_eq!(ds.d(), 16);
        assert_eq!(ds.class_names(), ["T"]);
    }

    #[test]
    fn parse_error_names_row_and_column() {
        let err = parse("A,1,2\nB,x,4\n").unwrap_err();
        assert_eq!(
            err,
            Error::ParseFeature {
                row: 2,
                column: 2,
                value: "x".into()
            }
        );
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = parse("A,1,2\nB,3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }), "{err:?}");
    }

    #[test]
    fn fixed_class_order() {
        let opts = CsvOptions {
            class_order: Some(vec!["B".into(), "A".into()]),
            ..Default::default()
        };
        let ds = read_csv("A,1\nB,2\n".as_bytes(), &opts).unwrap();
        assert_eq!(ds.y(), [1, 0]);
        let err = read_csv("C,1\n".as_bytes(), &opts).unwrap_err();
        assert!(matches!(err, Error::UnknownLabel { row: 1, .. }));
    }

    #[test]
    fn header_and_last_label() {
        let opts = CsvOptions {
            has_header: true,
            label_column: LabelColumn::Last,
            class_order: None,
        };
        let ds = read_csv("f1,f2,label\n0.5,1,yes\n2,3,no\n".as_bytes(), &opts).unwrap();
        assert_eq!(ds.x()[[0, 0]], 0.5);
        assert_eq!(ds.class_names(), ["yes", "no"]);
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse(""), Err(Error::EmptyInput));
    }
}
