use std::io::Write;

use fairprobe::{load_csv, read_csv, write_csv, Error};
use fairprobe_core::{InputDomain, Label, LabeledDataset, ParameterSpec, PointInput};
use proptest::prelude::*;

fn domain() -> InputDomain {
    InputDomain::new(vec![
        ParameterSpec::new("age", 0, 9, false),
        ParameterSpec::new("sex", 0, 1, true),
    ])
    .unwrap()
}

fn file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn three_rows_load_in_order() {
    let f = file("age,sex,label\n1,0,1\n9,1,-1\n4,0,1\n");
    let data = load_csv(f.path(), &domain(), "label").unwrap();
    assert_eq!(data.len(), 3);
    assert_eq!(data.rows()[1], (PointInput(vec![9, 1]), Label(-1)));
    assert_eq!(data.source, f.path().display().to_string());
}

#[test]
fn out_of_range_value_names_row_column_and_value() {
    let f = file("age,sex,label\n1,0,1\n10,1,-1\n");
    match load_csv(f.path(), &domain(), "label").unwrap_err() {
        Error::Bound {
            row,
            column,
            value,
            min,
            max,
        } => {
            assert_eq!((row, column.as_str(), value, min, max), (2, "age", 10, 0, 9));
        }
        other => panic!("{other}"),
    }
}

#[test]
fn missing_column_is_a_schema_error() {
    let err = read_csv("age,label\n1,1\n".as_bytes(), &domain(), "label").unwrap_err();
    assert!(matches!(&err, Error::Schema(m) if m.contains("`sex`")), "{err}");
    let err = read_csv("age,sex\n1,1\n".as_bytes(), &domain(), "label").unwrap_err();
    assert!(matches!(&err, Error::Schema(m) if m.contains("`label`")), "{err}");
}

#[test]
fn non_integer_cell_reports_its_row() {
    let err = read_csv("age,sex,label\n1,0,1\n2,0,1\n3,x,1\n".as_bytes(), &domain(), "label").unwrap_err();
    assert!(
        matches!(&err, Error::Parse { row: 3, column, .. } if column == "sex"),
        "{err}"
    );
}

#[test]
fn column_order_does_not_matter() {
    let rows: Vec<(i64, i64, i64)> = (0..10)
        .map(|i| (i % 10, i % 2, if i % 3 == 0 { 1 } else { -1 }))
        .collect();
    let mut ordered = String::from("age,sex,label\n");
    let mut shuffled = String::from("label,sex,age\n");
    for (a, s, y) in &rows {
        ordered.push_str(&format!("{a},{s},{y}\n"));
        shuffled.push_str(&format!("{y},{s},{a}\n"));
    }
    let a = read_csv(ordered.as_bytes(), &domain(), "label").unwrap();
    let b = read_csv(shuffled.as_bytes(), &domain(), "label").unwrap();
    assert_eq!(a.rows(), b.rows());
}

proptest! {
    #[test]
    fn write_then_load_keeps_the_numbers(rows in prop::collection::vec((0i64..10, 0i64..2, prop::sample::select(vec![-1i64, 1])), 0..40)) {
        let d = domain();
        let data = LabeledDataset::new(
            d.clone(),
            rows.iter().map(|&(a, s, y)| (PointInput(vec![a, s]), Label(y))).collect(),
            "generated",
        )
        .unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_csv(out.path(), &data, "label").unwrap();
        let back = load_csv(out.path(), &d, "label").unwrap();
        prop_assert_eq!(back.rows(), data.rows());

        // Whitespace around cells is ignored on the way back in.
        let text = std::fs::read_to_string(out.path()).unwrap().replace(',', " , ");
        let spaced = read_csv(text.as_bytes(), &d, "label").unwrap();
        prop_assert_eq!(spaced.rows(), data.rows());
    }
}
