//! Acceptance suite. Prints one PASS / FAIL / SKIP line per criterion and
//! exits non-zero if any criterion fails.
//!
//! Criteria 12 to 14 need the public card-transaction CSV; point
//! `FRAUDLAB_TRANSACTIONS_CSV` at it to run them.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use fraudlab::config::{parse_model, DataSource, ExperimentConfig};
use fraudlab::experiments::{self, ExperimentKind, ExperimentResult, Fault, RunOptions};
use fraudlab::RayonExecutor;
use fraudlab_core::dataset::{generate_synthetic, Dataset, RowId, SyntheticSpec};
use fraudlab_core::metrics::{accuracy, f1, precision, recall, ConfusionMatrix};
use fraudlab_core::models::mlp::MlpModel;
use fraudlab_core::models::{forest, gbt, knn, Family, ForestParams, GbtParams, KnnParams};
use fraudlab_core::neighbors::squared_distance;
use fraudlab_core::resampling::{hybrid, smote, undersample};
use fraudlab_core::{rng, Sequential};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::Rng;

const TRANSACTIONS_ENV: &str = "FRAUDLAB_TRANSACTIONS_CSV";

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = fn() -> Outcome;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn proptest_outcome<T: std::fmt::Debug>(
    result: Result<(), proptest::test_runner::TestError<T>>,
    detail: String,
) -> Outcome {
    match result {
        Ok(()) => Outcome::Pass(detail),
        Err(e) => Outcome::Fail(e.to_string()),
    }
}

// 1 -------------------------------------------------------------------------

fn rational(num: u64, den: u64) -> BigRational {
    if den == 0 {
        BigRational::from_integer(BigInt::from(0))
    } else {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

fn distance(x: f64, q: &BigRational) -> BigRational {
    let d = BigRational::from_float(x).expect("finite") - q;
    if d < BigRational::from_integer(BigInt::from(0)) {
        -d
    } else {
        d
    }
}

/// The closest double to `q`: neither neighbouring double is nearer.
fn is_nearest_double(x: f64, q: &BigRational) -> bool {
    let err = distance(x, q);
    let up = f64::from_bits(x.to_bits() + 1);
    let ok_up = distance(up, q) >= err;
    let ok_down = x == 0.0 || distance(f64::from_bits(x.to_bits() - 1), q) >= err;
    ok_up && ok_down
}

fn metric_exactness() -> Outcome {
    let count = prop_oneof![0u64..5, 0u64..1_000, 0u64..10_000_000];
    let strategy = (count.clone(), count.clone(), count.clone(), count);
    let result = runner(1000).run(&strategy, |(tp, tn, fp, fn_)| {
        let cm = ConfusionMatrix::new(tp, tn, fp, fn_);
        let cases = [
            ("accuracy", accuracy(&cm), rational(tp + tn, cm.total())),
            ("precision", precision(&cm), rational(tp, tp + fp)),
            ("recall", recall(&cm), rational(tp, tp + fn_)),
            ("f1", f1(&cm), rational(2 * tp, 2 * tp + fp + fn_)),
        ];
        for (name, value, q) in cases {
            prop_assert!(is_nearest_double(value, &q), "{name} = {value}, exact {q}");
        }
        Ok(())
    });
    proptest_outcome(
        result,
        "1000 confusion matrices, all four scores equal the rounded rational value".into(),
    )
}

// 2 -------------------------------------------------------------------------

fn feature_names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("x{j}")).collect()
}

fn smote_geometry() -> Outcome {
    let strategy = (1usize..=10, 2usize..=200)
        .prop_flat_map(|(d, n)| {
            let coord = prop_oneof![(-3i32..=3).prop_map(f64::from), -10.0..10.0f64];
            (
                Just(d),
                proptest::collection::vec(proptest::collection::vec(coord, d), n),
            )
        })
        .prop_flat_map(|(d, minority)| {
            (
                Just(d),
                Just(minority),
                1usize..=8,
                1usize..300,
                any::<u64>(),
            )
        });
    let result = runner(500).run(&strategy, |(d, minority, k, extra, seed)| {
        let m = minority.len();
        let k = k.min(m - 1);
        let mut rows = minority.clone();
        let mut labels = vec![1u8; m];
        for i in 0..3 {
            rows.push(vec![50.0 + i as f64; d]);
            labels.push(0);
        }
        let ds = Dataset::from_rows(feature_names(d), &rows, labels).unwrap();
        let out = smote(&ds, m + extra, k, seed).unwrap();
        prop_assert_eq!(out.class_counts(), [3, m + extra]);
        let pos: BTreeMap<RowId, usize> = ds
            .row_ids()
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect();
        for i in 0..out.len() {
            let Some(origin) = out.origin(i) else {
                continue;
            };
            prop_assert!((0.0..=1.0).contains(&origin.u));
            let a = ds.row(pos[&origin.base]);
            let b = ds.row(pos[&origin.neighbor]);
            // Least-squares estimate of u along the segment.
            let (num, den) = out
                .row(i)
                .iter()
                .zip(a)
                .zip(b)
                .fold((0.0, 0.0), |(n, dd), ((s, x), y)| {
                    (n + (s - x) * (y - x), dd + (y - x) * (y - x))
                });
            if den > 0.0 {
                prop_assert!(
                    (num / den - origin.u).abs() <= 1e-9,
                    "u {} reconstructed as {}",
                    origin.u,
                    num / den
                );
            }
            prop_assert!(
                squared_distance(out.row(i), a) <= squared_distance(a, b) * (1.0 + 1e-12) + 1e-18
            );
        }
        Ok(())
    });
    proptest_outcome(
        result,
        "500 minority sets, u reconstructed within 1e-9, exact class counts".into(),
    )
}

// 3 -------------------------------------------------------------------------

fn sampler_determinism() -> Outcome {
    let subset = runner(200).run(
        &(5usize..300, 1usize..50, 0usize..300, any::<u64>()),
        |(n0, n1, pick, seed)| {
            let ds = generate_synthetic(&SyntheticSpec::new(n0.max(n1), n1, 2, 1.0, 3)).unwrap();
            let out = undersample(&ds, pick % (ds.class_counts()[0] + 1), seed).unwrap();
            let input: BTreeMap<RowId, usize> = ds
                .row_ids()
                .iter()
                .enumerate()
                .map(|(i, &id)| (id, i))
                .collect();
            for i in 0..out.len() {
                let j = input.get(&out.row_id(i)).copied();
                prop_assert!(
                    j.is_some_and(|j| out.row(i) == ds.row(j) && out.label(i) == ds.label(j))
                );
            }
            Ok(())
        },
    );
    if let Err(e) = subset {
        return Outcome::Fail(format!("undersample subset: {e}"));
    }

    let ds = generate_synthetic(&SyntheticSpec::new(2000, 40, 4, 2.0, 2)).unwrap();
    let run_all = || {
        (
            undersample(&ds, 40, 7).unwrap().fingerprint(),
            smote(&ds, 400, 5, 7).unwrap().fingerprint(),
            hybrid(&ds, 0.2, 4.0, 5, 7).unwrap().fingerprint(),
        )
    };
    let first = run_all();
    if (0..10).any(|_| run_all() != first) {
        return Outcome::Fail("sampler output changed between runs with the same seed".into());
    }

    let dir = tempfile::tempdir().unwrap();
    for plan in ["undersample", "smote", "hybrid"] {
        let mut per_threads = Vec::new();
        for threads in ["1", "8"] {
            let path = dir.path().join(format!("{plan}-{threads}.csv"));
            let code = fraudlab::cli::run([
                "fraudlab",
                "--threads",
                threads,
                "resample",
                "--synthetic",
                "n_majority=3000,n_minority=60,seed=5",
                "--plan",
                plan,
                "--ratio",
                "0.1",
                "--multiplier",
                "3",
                "--seed",
                "11",
                "--out",
                path.to_str().unwrap(),
            ]);
            if code != 0 {
                return Outcome::Fail(format!("resample --plan {plan} exited with {code}"));
            }
            per_threads.push(std::fs::read(&path).unwrap());
        }
        if per_threads[0] != per_threads[1] {
            return Outcome::Fail(format!(
                "{plan}: --threads 1 and --threads 8 wrote different files"
            ));
        }
    }
    Outcome::Pass(
        "subset on 200 cases; identical over 10 runs; CLI files identical for 1 and 8 threads"
            .into(),
    )
}

// 4 -------------------------------------------------------------------------

fn hybrid_ratio() -> Outcome {
    let ds = generate_synthetic(&SyntheticSpec::new(20_000, 100, 4, 2.0, 3)).unwrap();
    let mut detail = Vec::new();
    for ratio in [0.01, 0.02, 0.1, 0.5] {
        let out = match hybrid(&ds, ratio, 2.0, 5, 11) {
            Ok(out) => out,
            Err(e) => return Outcome::Fail(format!("ratio {ratio}: {e}")),
        };
        let gap = (out.fraud_fraction() - ratio).abs();
        let bound = 1.0 / out.len() as f64;
        if gap > bound {
            return Outcome::Fail(format!(
                "ratio {ratio}: |{} - {ratio}| > 1/{}",
                out.fraud_fraction(),
                out.len()
            ));
        }
        detail.push(format!("{ratio}->{:.5}", out.fraud_fraction()));
    }
    Outcome::Pass(detail.join(", "))
}

// 5 -------------------------------------------------------------------------

fn knn_oracle() -> Outcome {
    let strategy = (1usize..=4, 1usize..=60).prop_flat_map(|(d, n)| {
        let coord = (-2i32..=2).prop_map(f64::from);
        (
            proptest::collection::vec(proptest::collection::vec(coord.clone(), d), n),
            proptest::collection::vec(0u8..2, n),
            proptest::collection::vec(coord, d),
            1usize..=n,
        )
    });
    let result = runner(200).run(&strategy, |(rows, labels, query, k)| {
        let ds = Dataset::from_rows(feature_names(query.len()), &rows, labels.clone()).unwrap();
        let model = knn::fit(&ds, &KnnParams { k }).unwrap();
        let mut order: Vec<(f64, u64)> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                (
                    r.iter().zip(&query).map(|(a, b)| (a - b) * (a - b)).sum(),
                    i as u64,
                )
            })
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let expected: Vec<RowId> = order.iter().take(k).map(|o| RowId(o.1)).collect();
        prop_assert_eq!(model.neighbors(&query), expected);
        let frauds = order
            .iter()
            .take(k)
            .filter(|o| labels[o.1 as usize] == 1)
            .count();
        prop_assert_eq!(model.predict_proba(&query), frauds as f64 / k as f64);
        Ok(())
    });
    proptest_outcome(
        result,
        "200 lattice queries with ties, neighbours and votes identical".into(),
    )
}

// 6 -------------------------------------------------------------------------

fn mlp_gradient() -> Outcome {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for (net, sizes) in [vec![3, 4, 1], vec![4, 6, 3, 1], vec![2, 5, 5, 2, 1]]
        .into_iter()
        .enumerate()
    {
        let ds =
            generate_synthetic(&SyntheticSpec::new(5, 5, sizes[0], 1.5, 20 + net as u64)).unwrap();
        let rows: Vec<usize> = (0..ds.len()).collect();
        let mut model = MlpModel::init(sizes, 300 + net as u64);
        let mut rng = rng::stream_for(net as u64, "acceptance-bias");
        for p in model.params.iter_mut().filter(|p| **p == 0.0) {
            *p = rng.random_range(-0.5..0.5);
        }
        let (_, analytic) = model.loss_and_gradient(&ds, &rows);
        for (i, a) in analytic.iter().enumerate() {
            let orig = model.params[i];
            model.params[i] = orig + h;
            let up = model.loss(&ds, &rows);
            model.params[i] = orig - h;
            let down = model.loss(&ds, &rows);
            model.params[i] = orig;
            let n = (up - down) / (2.0 * h);
            let scale = a.abs().max(n.abs());
            if scale > 0.0 {
                worst = worst.max((a - n).abs() / scale);
            }
        }
    }
    verdict(
        worst <= 1e-4,
        format!("3 networks, 10-row batch, max relative error {worst:.2e} (limit 1e-4)"),
    )
}

// 7 -------------------------------------------------------------------------

fn forest_mean() -> Outcome {
    let ds = generate_synthetic(&SyntheticSpec::new(400, 60, 5, 1.5, 8)).unwrap();
    let p = ForestParams {
        n_trees: 30,
        ..ForestParams::default()
    };
    let model = forest::fit(&ds, &p, 4, &Sequential).unwrap();
    let mut rng = rng::stream_for(2, "acceptance-forest");
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(-4.0..4.0)).collect();
        let mean =
            model.trees.iter().map(|t| t.predict(&x)).sum::<f64>() / model.trees.len() as f64;
        worst = worst.max((model.predict_proba(&x) - mean).abs());
    }
    verdict(
        worst <= 1e-12,
        format!("50 inputs, max deviation {worst:.1e} (limit 1e-12)"),
    )
}

// 8 -------------------------------------------------------------------------

fn gbt_checks() -> Outcome {
    let ds = generate_synthetic(&SyntheticSpec::new(900, 45, 3, 2.0, 6)).unwrap();
    let zero = gbt::fit(
        &ds,
        &GbtParams {
            n_rounds: 0,
            ..GbtParams::default()
        },
    )
    .unwrap();
    let prevalence = 45.0 / 945.0;
    let gap = [[0.0, 0.0, 0.0], [3.0, -2.0, 7.0]]
        .iter()
        .map(|x| (zero.predict_proba(x) - prevalence).abs())
        .fold(0.0, f64::max);
    if gap > 1e-12 {
        return Outcome::Fail(format!("zero rounds: |p - prevalence| = {gap:e}"));
    }
    let full = gbt::fit(
        &ds,
        &GbtParams {
            n_rounds: 50,
            ..GbtParams::default()
        },
    )
    .unwrap();
    if let Some(r) = full.train_loss.windows(2).position(|w| w[1] > w[0]) {
        return Outcome::Fail(format!("training loss rose at round {}", r + 1));
    }
    Outcome::Pass(format!(
        "prevalence gap {gap:.1e}; loss {:.5} -> {:.5} over 50 rounds, never rising",
        full.train_loss[0], full.train_loss[50]
    ))
}

// 9 -------------------------------------------------------------------------

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        data: DataSource::Synthetic(SyntheticSpec::new(3000, 60, 4, 2.0, 9)),
        models: vec![parse_model("logreg").unwrap(), parse_model("knn").unwrap()],
        formats: Vec::new(),
        ..ExperimentConfig::default()
    }
}

fn leakage_guards() -> Outcome {
    let cfg = small_config();
    let exec = RayonExecutor::new(1).unwrap();
    for kind in ExperimentKind::ALL {
        let mut cfg = cfg.clone();
        cfg.sweep.ratios = vec![0.05, 0.2];
        if let Err(e) = experiments::run(kind, &cfg, &exec) {
            return Outcome::Fail(format!("clean {} run failed: {e}", kind.name()));
        }
    }
    let mut tripped = Vec::new();
    for fault in [
        Fault::LeakTrainRow,
        Fault::ScalerOnTest,
        Fault::SyntheticInTest,
    ] {
        let kind = if fault == Fault::SyntheticInTest {
            ExperimentKind::Smote
        } else {
            ExperimentKind::Baseline
        };
        match experiments::run_with(kind, &cfg, &exec, RunOptions { fault }) {
            Ok(_) => return Outcome::Fail(format!("{fault:?} was not detected")),
            Err(e) if matches!(e.core(), Some(fraudlab_core::Error::Leakage(_))) => {
                tripped.push(format!("{fault:?}"))
            }
            Err(e) => {
                return Outcome::Fail(format!("{fault:?} failed with a non-leakage error: {e}"))
            }
        }
    }
    Outcome::Pass(format!(
        "4 clean experiments pass; {} tripped the guard",
        tripped.join(", ")
    ))
}

// 10, 11 --------------------------------------------------------------------

/// 20,000 rows, 0.5% fraud, class means 2.5 apart in 8 dimensions.
fn directional_config() -> ExperimentConfig {
    ExperimentConfig {
        data: DataSource::Synthetic(SyntheticSpec::new(19_900, 100, 8, 2.5, 7)),
        models: ["logreg", "forest", "gbt", "knn", "mlp:batch_size=64"]
            .iter()
            .map(|m| parse_model(m).unwrap())
            .collect(),
        formats: Vec::new(),
        ..ExperimentConfig::default()
    }
}

fn run_directional(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
) -> Result<ExperimentResult, String> {
    experiments::run(kind, cfg, &RayonExecutor::new(0).unwrap()).map_err(|e| e.to_string())
}

fn undersampling_trap() -> Outcome {
    let cfg = directional_config();
    let (base, under) = match (
        run_directional(ExperimentKind::Baseline, &cfg),
        run_directional(ExperimentKind::Undersample, &cfg),
    ) {
        (Ok(b), Ok(u)) => (b, u),
        (Err(e), _) | (_, Err(e)) => return Outcome::Fail(e),
    };
    let mut ok = true;
    let mut detail = Vec::new();
    for family in Family::ALL {
        let b = &base.find("baseline", family).unwrap().class_1;
        let u = &under.find("undersample-original", family).unwrap().class_1;
        ok &= u.precision < b.precision && u.recall > b.recall;
        detail.push(format!(
            "{}: P {:.3}->{:.3} R {:.3}->{:.3}",
            family.slug(),
            b.precision,
            u.precision,
            b.recall,
            u.recall
        ));
    }
    verdict(ok, detail.join("; "))
}

fn hybrid_gain() -> Outcome {
    let mut cfg = directional_config();
    // With 75 training frauds, a tenfold SMOTE cannot reach ratios below 5%.
    cfg.sampling.minority_multiplier = 2.0;
    let result = match run_directional(ExperimentKind::Hybrid, &cfg) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail(e),
    };
    let mut ok = true;
    let mut detail = Vec::new();
    for family in Family::ALL {
        let b = &result.find("hybrid-baseline", family).unwrap().class_1;
        let h = &result.find("hybrid", family).unwrap().class_1;
        if matches!(family, Family::Logreg | Family::Mlp) {
            ok &= h.recall >= b.recall;
        }
        ok &= h.f1 >= b.f1 - 0.05;
        detail.push(format!(
            "{}: R {:.3}->{:.3} F1 {:.3}->{:.3}",
            family.slug(),
            b.recall,
            h.recall,
            b.f1,
            h.f1
        ));
    }
    verdict(ok, detail.join("; "))
}

// 12, 13, 14 ----------------------------------------------------------------

fn transactions_config(models: &[&str]) -> Option<ExperimentConfig> {
    let path = PathBuf::from(std::env::var_os(TRANSACTIONS_ENV)?);
    Some(ExperimentConfig {
        data: DataSource::Csv(path),
        models: models.iter().map(|m| parse_model(m).unwrap()).collect(),
        formats: Vec::new(),
        ..ExperimentConfig::default()
    })
}

fn skip() -> Outcome {
    Outcome::Skip(format!(
        "set {TRANSACTIONS_ENV} to the transaction CSV to run"
    ))
}

fn within(value: f64, target: f64) -> bool {
    (value - target).abs() <= 0.05
}

fn transactions_baseline() -> Outcome {
    let Some(cfg) = transactions_config(&["logreg", "forest"]) else {
        return skip();
    };
    let result = match run_directional(ExperimentKind::Baseline, &cfg) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail(e),
    };
    let rf = &result.find("baseline", Family::Forest).unwrap().class_1;
    let lr = &result.find("baseline", Family::Logreg).unwrap().class_1;
    let ok = within(rf.precision, 0.942)
        && within(rf.recall, 0.789)
        && within(rf.f1, 0.858)
        && within(lr.precision, 0.848)
        && within(lr.recall, 0.634)
        && within(lr.f1, 0.726);
    verdict(
        ok,
        format!(
            "forest P/R/F1 {:.3}/{:.3}/{:.3} (0.942/0.789/0.858); logreg {:.3}/{:.3}/{:.3} (0.848/0.634/0.726); band 0.05",
            rf.precision, rf.recall, rf.f1, lr.precision, lr.recall, lr.f1
        ),
    )
}

fn transactions_undersampling() -> Outcome {
    let Some(cfg) = transactions_config(&["logreg", "knn", "gbt", "mlp"]) else {
        return skip();
    };
    let result = match run_directional(ExperimentKind::Undersample, &cfg) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail(e),
    };
    let mut ok = true;
    let mut detail = Vec::new();
    for family in [Family::Logreg, Family::Knn, Family::Gbt, Family::Mlp] {
        let r = &result.find("undersample-original", family).unwrap().class_1;
        ok &= r.precision <= 0.15 && r.recall >= 0.80;
        detail.push(format!(
            "{}: P {:.4} R {:.4}",
            family.slug(),
            r.precision,
            r.recall
        ));
    }
    verdict(
        ok,
        format!("{} (need P <= 0.15, R >= 0.80)", detail.join("; ")),
    )
}

fn transactions_hybrid() -> Outcome {
    let Some(cfg) = transactions_config(&["logreg", "mlp"]) else {
        return skip();
    };
    let result = match run_directional(ExperimentKind::Hybrid, &cfg) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail(e),
    };
    let mut ok = true;
    let mut detail = Vec::new();
    for (family, floor) in [(Family::Logreg, 0.73), (Family::Mlp, 0.76)] {
        let recall = result.find("hybrid", family).unwrap().class_1.recall;
        let ratio = result
            .sweeps
            .iter()
            .find(|s| s.model == family)
            .unwrap()
            .selected_ratio;
        ok &= recall >= floor && (0.01..=0.05).contains(&ratio);
        detail.push(format!(
            "{}: R {recall:.3} (>= {floor}) at ratio {ratio:.4}",
            family.slug()
        ));
    }
    verdict(
        ok,
        format!("{} (ratio must lie in [0.01, 0.05])", detail.join("; ")),
    )
}

fn main() {
    let checks: [(&str, Check); 14] = [
        ("metric exactness", metric_exactness),
        ("SMOTE geometry", smote_geometry),
        ("sampler determinism and subset", sampler_determinism),
        ("hybrid ratio", hybrid_ratio),
        ("KNN oracle", knn_oracle),
        ("MLP gradient check", mlp_gradient),
        ("forest is the mean of its trees", forest_mean),
        ("GBT prevalence and monotone loss", gbt_checks),
        ("leakage guards", leakage_guards),
        ("undersampling trap", undersampling_trap),
        ("hybrid gain", hybrid_gain),
        ("transaction data: baseline", transactions_baseline),
        (
            "transaction data: undersampling",
            transactions_undersampling,
        ),
        ("transaction data: hybrid", transactions_hybrid),
    ];
    // Panics become FAIL lines; the default hook would add a backtrace.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::Fail(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failures += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} {:>2} {name} [{secs:.1}s]: {detail}", i + 1);
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
