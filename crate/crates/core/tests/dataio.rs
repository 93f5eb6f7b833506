use std::io::Write;

use fairot::dataio::{
    load_dataset_with_stats, read_repaired, standardize, write_dataset, write_repaired_to, SchemaConfig,
};
use fairot::repair::total_repair_b;
use fairot::Group;

const SCHEMA: &str = r#"
features = ["age", "hours"]
na_scope = "all"

[protected]
column = "sex"
minority = "Female"
default = "Male"

[target]
column = "income"
success = [">50K", ">50K."]
failure = ["<=50K", "<=50K."]
"#;

const CSV: &str = "\
age,sex,hours,work,income
39,Male,40,State-gov,<=50K
50,Female,13,?,>50K
38, Male ,40,Private,<=50K.
53,Female,?,Private,>50K.
28,Female,40,Private,<=50K
37,Male,45,Private,>50K
";

#[test]
fn schema_file_loads_and_drops_incomplete_rows() {
    let dir = tempfile::tempdir().unwrap();
    let schema_path = dir.path().join("schema.toml");
    let data_path = dir.path().join("data.csv");
    std::fs::write(&schema_path, SCHEMA).unwrap();
    std::fs::File::create(&data_path).unwrap().write_all(CSV.as_bytes()).unwrap();

    let schema = SchemaConfig::from_path(&schema_path).unwrap();
    let (data, stats) = load_dataset_with_stats(&data_path, &schema).unwrap();
    assert_eq!((stats.rows_read, stats.rows_dropped, stats.rows_kept), (6, 2, 4));
    assert_eq!(data.features(), &[39.0, 40.0, 38.0, 40.0, 28.0, 40.0, 37.0, 45.0]);
    assert_eq!(
        data.groups(),
        &[Group::Default, Group::Default, Group::Minority, Group::Default]
    );
    assert_eq!(data.labels().unwrap(), &[false, false, false, true]);
    assert_eq!(data.feature_names(), &["age", "hours"]);

    // Written back and reloaded through the same schema.
    let mut buf = Vec::new();
    write_dataset(&mut buf, &data, &schema).unwrap();
    let (again, _) = fairot::dataio::read_dataset(buf.as_slice(), &schema).unwrap();
    assert_eq!(again.features(), data.features());
    assert_eq!(again.groups(), data.groups());
    assert_eq!(again.labels(), data.labels());
}

#[test]
fn repaired_file_round_trip_and_standardization() {
    let schema = SchemaConfig::from_toml(SCHEMA).unwrap();
    let (data, _) = fairot::dataio::read_dataset(CSV.as_bytes(), &schema).unwrap();
    let (train, test, params) = standardize(&data, &data.subset(&[0, 1])).unwrap();
    let back = params.invert(&train).unwrap();
    for (a, b) in back.features().iter().zip(data.features()) {
        assert!((a - b).abs() < 1e-12);
    }
    assert_eq!(test.x(0), train.x(0));

    let repaired = total_repair_b(&train).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("repaired.csv");
    write_repaired_to(&path, &repaired).unwrap();
    let read = read_repaired(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(read.rows, repaired.rows);
    assert_eq!(read.method, repaired.method);
}
