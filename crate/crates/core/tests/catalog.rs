use std::fs;

use projpack::catalog::format::serialize_packing;
use projpack::catalog::table::TableFormat;
use projpack::catalog::{Catalog, Decision, FsckIssue, Key, AUTO_NOTE};
use projpack::constructions::{mub_maximal, remove_vector, simplex};
use projpack::{Error, Field};

fn key(d: usize, n: usize, field: Field) -> Key {
    Key { d, n, field }
}

#[test]
fn reopen_sees_the_same_entries() {
    let dir = tempfile::tempdir().unwrap();
    {
        let mut cat = Catalog::open(dir.path()).unwrap();
        cat.submit(&simplex(3, Field::Real), "simplex").unwrap();
    }
    let cat = Catalog::open(dir.path()).unwrap();
    let e = cat.get(&key(3, 4, Field::Real)).unwrap();
    assert_eq!(e.creator_note, "simplex");
    assert!((e.coherence - 1.0 / 3.0).abs() < 1e-12);
    let f = cat.load_packing(&e.key()).unwrap();
    assert_eq!(
        serialize_packing(&f),
        serialize_packing(&simplex(3, Field::Real))
    );
    assert!(cat.fsck().is_empty());
}

#[test]
fn worse_submission_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let mut cat = Catalog::open(dir.path()).unwrap();
    cat.submit(&mub_maximal(3).unwrap(), "mub").unwrap();
    let before = fs::read_to_string(dir.path().join("index.jsonl")).unwrap();

    // a repeated vector has coherence one
    let mut m = mub_maximal(3).unwrap().into_vectors();
    let first = m.column(0).clone_owned();
    m.set_column(1, &first);
    let worse = projpack::UnitFrame::new(Field::Complex, m).unwrap();
    let out = cat.submit(&worse, "dup").unwrap();
    assert!(matches!(out.decision, Decision::RejectedWorse { .. }));
    let again = cat.submit(&mub_maximal(3).unwrap(), "mub again").unwrap();
    assert!(matches!(again.decision, Decision::RejectedWorse { .. }));
    assert_eq!(
        fs::read_to_string(dir.path().join("index.jsonl")).unwrap(),
        before
    );
}

#[test]
fn propagation_stops_at_existing_better_entry() {
    let dir = tempfile::tempdir().unwrap();
    let mut cat = Catalog::open(dir.path()).unwrap();
    let mub = mub_maximal(2).unwrap();
    // an octahedron-like packing of 5 lines first
    let five = remove_vector(&mub, 5).unwrap();
    cat.submit(&five, "five").unwrap();
    let out = cat.submit(&mub, "six").unwrap();
    assert_eq!(out.decision, Decision::Accepted);
    assert!(out.propagated.is_empty());
    assert_eq!(
        cat.get(&key(2, 5, Field::Complex)).unwrap().creator_note,
        "five"
    );
    assert!(cat.auto_propagate(2, 6, Field::Complex).unwrap().is_empty());
}

#[test]
fn auto_entries_chain_down() {
    let dir = tempfile::tempdir().unwrap();
    let mut cat = Catalog::open(dir.path()).unwrap();
    let out = cat.submit(&simplex(4, Field::Real), "simplex").unwrap();
    let ns: Vec<usize> = out.propagated.iter().map(|k| k.n).collect();
    assert_eq!(ns, vec![4, 3, 2]);
    for n in 2..=4 {
        let e = cat.get(&key(4, n, Field::Real)).unwrap();
        assert_eq!(e.creator_note, AUTO_NOTE);
        assert!(e.coherence <= 0.25 + 1e-12);
    }
    assert!(cat.fsck().is_empty());
}

#[test]
fn fsck_reports_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let mut cat = Catalog::open(dir.path()).unwrap();
    cat.submit(&simplex(2, Field::Real), "triangle").unwrap();
    let path = dir.path().join("packings/R/2/3.txt");
    fs::remove_file(&path).unwrap();
    let cat = Catalog::open(dir.path()).unwrap();
    let issues = cat.fsck();
    assert!(issues.iter().any(
        |i| matches!(i, FsckIssue::MissingPacking { key: k, .. } if *k == key(2, 3, Field::Real))
    ));
}

#[test]
fn lock_blocks_second_writer() {
    let dir = tempfile::tempdir().unwrap();
    let mut cat = Catalog::open(dir.path()).unwrap();
    fs::write(dir.path().join(".lock"), b"").unwrap();
    let err = cat.submit(&simplex(2, Field::Real), "x").unwrap_err();
    assert!(matches!(err, Error::Locked(_)));
    fs::remove_file(dir.path().join(".lock")).unwrap();
    cat.submit(&simplex(2, Field::Real), "x").unwrap();
}

#[test]
fn tables_are_sorted_and_stable() {
    let dir = tempfile::tempdir().unwrap();
    let mut cat = Catalog::open(dir.path()).unwrap();
    cat.submit(&simplex(3, Field::Complex), "c").unwrap();
    cat.submit(&simplex(2, Field::Real), "r").unwrap();
    let csv = cat.render_table(TableFormat::Csv);
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(rows[0].starts_with("2,2,C,") || rows[0].starts_with("3,2,C,"));
    assert!(rows.last().unwrap().starts_with("2,3,R,"));
    for row in &rows {
        let gap: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
        assert!(gap >= -1e-10);
    }
    assert_eq!(csv, cat.render_table(TableFormat::Csv));
    let json: serde_json::Value =
        serde_json::from_str(&cat.render_table(TableFormat::Json)).unwrap();
    assert_eq!(json.as_array().unwrap().len(), rows.len());
}
