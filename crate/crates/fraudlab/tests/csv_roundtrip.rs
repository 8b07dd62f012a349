use fraudlab::io::{read_csv, write_csv};
use fraudlab_core::dataset::{generate_synthetic, Dataset, SyntheticSpec};
use fraudlab_core::resampling::smote;
use proptest::prelude::*;

fn round_trip(ds: &Dataset) -> Dataset {
    let mut buf = Vec::new();
    write_csv(ds, &mut buf).unwrap();
    read_csv(buf.as_slice()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn written_files_reload_with_the_same_fingerprint(
        rows in proptest::collection::vec((proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 3), 0u8..2), 1..40)
    ) {
        let (x, y): (Vec<Vec<f64>>, Vec<u8>) = rows.into_iter().unzip();
        let ds = Dataset::from_rows(vec!["a".into(), "b".into(), "c".into()], &x, y).unwrap();
        prop_assert_eq!(round_trip(&ds).fingerprint(), ds.fingerprint());
    }
}

#[test]
fn synthetic_row_ids_survive_a_round_trip() {
    let ds = generate_synthetic(&SyntheticSpec::new(50, 10, 2, 2.0, 1)).unwrap();
    let grown = smote(&ds, 30, 3, 4).unwrap();
    let back = round_trip(&grown);
    assert_eq!(back.row_ids(), grown.row_ids());
    assert_eq!(back.fingerprint(), grown.fingerprint());
}
