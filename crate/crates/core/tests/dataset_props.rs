use std::collections::BTreeSet;

use fraudlab_core::dataset::{
    fit_robust_scaler, generate_synthetic, quantile_linear, random_split, stratified_split,
    Dataset, RowId, SyntheticSpec,
};
use proptest::prelude::*;

fn ids(ds: &Dataset) -> BTreeSet<RowId> {
    ds.row_ids().iter().copied().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn stratified_split_partitions_each_class(
        n0 in 2usize..400, n1 in 2usize..60, f in 0.05f64..0.95, seed in any::<u64>()
    ) {
        let ds = generate_synthetic(&SyntheticSpec::new(n0.max(n1), n1, 2, 1.0, 5)).unwrap();
        let (train, test) = stratified_split(&ds, f, seed).unwrap();
        prop_assert!(ids(&train).is_disjoint(&ids(&test)));
        prop_assert_eq!(train.len() + test.len(), ds.len());
        for (c, &count) in ds.class_counts().iter().enumerate() {
            let expected = ((count as f64 * f).round() as usize).clamp(1, count - 1);
            prop_assert_eq!(test.class_counts()[c], expected);
        }
    }

    #[test]
    fn random_split_partitions_rows(n in 2usize..500, f in 0.05f64..0.95, seed in any::<u64>()) {
        let ds = generate_synthetic(&SyntheticSpec::new(n, 1, 2, 1.0, 5)).unwrap();
        let (train, test) = random_split(&ds, f, seed).unwrap();
        let mut all = ids(&train);
        all.extend(ids(&test));
        prop_assert_eq!(all, ids(&ds));
        prop_assert_eq!(test.len(), (ds.len() as f64 * f).round() as usize);
    }

    #[test]
    fn scaler_maps_median_to_zero_and_inverts(
        values in proptest::collection::vec(-1e3f64..1e3, 4..100)
    ) {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        let labels = vec![0u8; rows.len()];
        let ds = Dataset::from_rows(vec!["Amount".into()], &rows, labels).unwrap();
        let params = fit_robust_scaler(&ds, &["Amount"]).unwrap();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let col = &params.columns[0];
        prop_assert_eq!(col.center, quantile_linear(&sorted, 0.5));
        let scaled = params.apply(&ds).unwrap();
        let back = params.invert(&scaled).unwrap();
        for i in 0..ds.len() {
            prop_assert!((back.row(i)[0] - ds.row(i)[0]).abs() <= 1e-9 * (1.0 + ds.row(i)[0].abs()));
        }
        prop_assert_eq!(&params.fitted_on, &ds.id_set_hash());
    }
}

#[test]
fn fingerprint_tracks_any_row_change() {
    let ds = generate_synthetic(&SyntheticSpec::new(50, 5, 3, 1.0, 2)).unwrap();
    let base = ds.fingerprint();
    let mut rows: Vec<Vec<f64>> = ds.rows().map(<[f64]>::to_vec).collect();
    rows[17][1] += 1e-9;
    let changed = Dataset::new(
        ds.feature_names().to_vec(),
        rows.concat(),
        ds.labels().to_vec(),
        ds.row_ids().to_vec(),
    )
    .unwrap();
    assert_ne!(changed.fingerprint().sha256, base.sha256);
    assert_eq!(ds.fingerprint(), base);
}

#[test]
fn full_size_split_counts() {
    let ds = generate_synthetic(&SyntheticSpec::new(284_315, 492, 1, 1.0, 0)).unwrap();
    let (train, test) = stratified_split(&ds, 0.25, 42).unwrap();
    assert_eq!(test.class_counts(), [71_079, 123]);
    assert_eq!(train.class_counts(), [213_236, 369]);
}
