//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints its own PASS/FAIL line; exits nonzero if any fails.
//!
//! Criteria 11 and 12 use the UCI letter-recognition file when
//! `BOOKMAKER_LETTER_DATA` names it, and the 26-class surrogate otherwise.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bookmaker::boost::{boost_train, BoostConfig, Booster, StopReason};
use bookmaker::contingency::{ContingencyTable, DichotomousCounts};
use bookmaker::dataset::{self, gen_synthetic, CsvOptions, KOfNDisjunction, LabeledDataset, PrototypeClasses, SeparableBlobs, SyntheticKind};
use bookmaker::linear::{train, Direction, Informatron, LinearModel, LinearParams, Rule, RuleConfig};
use bookmaker::metrics::{
    delta_p, delta_p_prime, gain_matrix, harmonic_information, informedness, informedness_bookmaker, kappa_cohen,
    markedness, matthews_correlation, Measure,
};
use bookmaker::stump::{train_stump, weighted_accuracy};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_dichotomous(rng: &mut ChaCha8Rng) -> DichotomousCounts {
    let mut cell = || f64::from(rng.random_range(1..500u32));
    DichotomousCounts::new(cell(), cell(), cell(), cell())
}

fn random_marginal(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

fn c1_dual_informedness() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = rng.random_range(2..=6);
        let counts = Array2::from_shape_fn((k, k), |_| f64::from(rng.random_range(1..100u32)));
        let t = ContingencyTable::from_counts(counts).map_err(|e| e.to_string())?;
        let a = informedness(&t).map_err(|e| e.to_string())?;
        let b = informedness_bookmaker(&t).map_err(|e| e.to_string())?;
        worst = worst.max((a - b).abs());
    }
    let took = start.elapsed();
    check(worst <= 1e-10 && took < Duration::from_secs(5), format!("max diff {worst:.3e} in {took:?}"))
}

fn c2_kappa_forms() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = random_dichotomous(&mut rng);
        let n = d.total();
        let (prev, bias) = ((d.tp + d.fn_) / n, (d.tp + d.fp) / n);
        let recall = d.tp / (d.tp + d.fn_);
        let precision = d.tp / (d.tp + d.fp);
        let e1 = (delta_p_prime(&d).unwrap() - (recall - bias) / (1.0 - prev)).abs();
        let e2 = (delta_p(&d).unwrap() - (precision - prev) / (1.0 - bias)).abs();
        worst = worst.max(e1).max(e2);
    }
    check(worst <= 1e-12, format!("max diff {worst:.3e}"))
}

fn c3_correlation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst, mut seen) = (0.0f64, 0);
    while seen < 1000 {
        let d = random_dichotomous(&mut rng);
        let (i, m) = (delta_p_prime(&d).unwrap(), delta_p(&d).unwrap());
        if i * m < 0.0 {
            continue;
        }
        seen += 1;
        let r = matthews_correlation(&d.to_table().unwrap()).map_err(|e| e.to_string())?;
        let (pp, pn) = (d.tp + d.fp, d.fn_ + d.tn);
        let (rp, rn) = (d.tp + d.fn_, d.fp + d.tn);
        let det = (d.tp * d.tn - d.fp * d.fn_) / (pp * pn * rp * rn).sqrt();
        worst = worst.max((r - det).abs());
    }
    check(worst <= 1e-10, format!("max diff {worst:.3e} over {seen} tables"))
}

fn c4_guessing_example() -> Verdict {
    // 90 real positives, 10 real negatives, everything predicted positive
    let d = DichotomousCounts::new(90.0, 10.0, 0.0, 0.0);
    let r = d.rates();
    let b = informedness(&d.to_table().unwrap()).map_err(|e| e.to_string())?;
    let ok = r.tpr == Some(1.0) && r.prec == Some(0.9) && r.acc == 0.9 && b == 0.0;
    check(ok, format!("recall {:?} precision {:?} accuracy {} informedness {b}", r.tpr, r.prec, r.acc))
}

fn c5_four_horses() -> Verdict {
    let g = gain_matrix(&[0.25; 4]).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for p in 0..4 {
        for r in 0..4 {
            let want = if p == r { 4.0 } else { -4.0 / 3.0 };
            worst = worst.max((g.gain(p, r) - want).abs());
        }
    }
    let guess = ContingencyTable::from_counts(Array2::from_elem((4, 4), 25.0)).unwrap();
    let b = informedness(&guess).map_err(|e| e.to_string())?;
    check(worst <= 1e-15 && b.abs() <= 1e-12, format!("gain diff {worst:.3e}, guessing informedness {b:.3e}"))
}

fn c6_chance_nullity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = rng.random_range(2..=6);
        let bias = random_marginal(&mut rng, k);
        let prev = random_marginal(&mut rng, k);
        let t = ContingencyTable::independent(&bias, &prev, 1000.0).map_err(|e| e.to_string())?;
        for v in [informedness(&t), markedness(&t), kappa_cohen(&t)] {
            worst = worst.max(v.map_err(|e| e.to_string())?.abs());
        }
    }
    check(worst <= 1e-10, format!("max |value| {worst:.3e}"))
}

fn c7_informatron_bridge() -> Verdict {
    let (d, k) = (8, 3);
    let mut worst = 0.0f64;
    let mut undefined = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + seed);
        let mut model = Informatron::new(d, k);
        let mut joint = vec![vec![0u64; k]; d];
        let (mut classes, mut features) = (vec![0u64; k], vec![0u64; d]);
        for _ in 0..1000 {
            let class = rng.random_range(0..k);
            let active: Vec<usize> = (0..d).filter(|_| rng.random_bool(0.3)).collect();
            model.observe(&active, class).map_err(|e| e.to_string())?;
            classes[class] += 1;
            for &j in &active {
                features[j] += 1;
                joint[j][class] += 1;
            }
        }
        for j in 0..d {
            for c in 0..k {
                let tp = joint[j][c];
                let table = DichotomousCounts::new(
                    tp as f64,
                    (features[j] - tp) as f64,
                    (classes[c] - tp) as f64,
                    (1000 - features[j] - classes[c] + tp) as f64,
                );
                for (dir, oracle) in [(Direction::Backward, delta_p_prime(&table)), (Direction::Forward, delta_p(&table))] {
                    match (model.score(j, c, dir), oracle) {
                        (Ok(a), Ok(b)) => worst = worst.max((a - b).abs()),
                        (Err(_), Err(_)) => undefined += 1,
                        (a, b) => return Err(format!("definedness differs: {a:?} vs {b:?}")),
                    }
                }
            }
        }
    }
    check(worst <= 1e-12, format!("max diff {worst:.3e}, {undefined} jointly undefined"))
}

fn c8_perceptron_convergence() -> Verdict {
    let mut epochs = Vec::new();
    for seed in 0..10 {
        let ds = gen_synthetic(&SyntheticKind::SeparableBlobs(SeparableBlobs { n: 200, d: 2, margin: 1.0 }), seed)
            .map_err(|e| e.to_string())?;
        let out = train(&ds, &RuleConfig::new(Rule::Perceptron).epochs(100).seed(seed)).map_err(|e| e.to_string())?;
        match out.epoch_errors.iter().position(|&e| e == 0) {
            Some(epoch) => epochs.push(epoch + 1),
            None => return Err(format!("seed {seed} never reached 0 errors")),
        }
    }
    check(true, format!("clean epoch per seed {epochs:?}"))
}

fn c9_winnow_mistakes() -> Verdict {
    let stream = |n, seed| {
        gen_synthetic(
            &SyntheticKind::KOfNDisjunction(KOfNDisjunction { n, attributes: 100, relevant: 3, p_active: 0.05 }),
            seed,
        )
    };
    let params = LinearParams { promotion: 2.0, ..LinearParams::for_rule(Rule::Winnow) };
    let mut model = LinearModel::new(Rule::Winnow, 100, 2, params).map_err(|e| e.to_string())?;
    let mut mistakes = 0;
    for (row, y) in stream(5000, 9).map_err(|e| e.to_string())?.rows() {
        if model.step(&row.to_vec(), y).map_err(|e| e.to_string())? != y {
            mistakes += 1;
        }
    }
    let held = stream(1000, 90).map_err(|e| e.to_string())?;
    let errors = held.rows().filter(|(r, y)| model.predict(&r.to_vec()).unwrap() != *y).count();
    check(mistakes <= 100 && errors == 0, format!("{mistakes} online mistakes, {errors} errors on 1000 more"))
}

fn brute_force_best(ds: &LabeledDataset, weights: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for j in 0..ds.d() {
        let mut cuts: Vec<f64> = ds.x().column(j).to_vec();
        cuts.push(f64::NEG_INFINITY);
        for &t in &cuts {
            for below in 0..ds.k() {
                for above in 0..ds.k() {
                    let acc: f64 = ds
                        .rows()
                        .zip(weights)
                        .filter(|((row, y), _)| (if row[j] <= t { below } else { above }) == *y)
                        .map(|(_, w)| w)
                        .sum();
                    best = best.max(acc);
                }
            }
        }
    }
    best
}

fn c10_stump_optimality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for case in 0..200 {
        let (n, d, k) = (rng.random_range(1..=50), rng.random_range(1..=5), rng.random_range(2..=4));
        let x = Array2::from_shape_fn((n, d), |_| f64::from(rng.random_range(0..8u8)));
        let y = (0..n).map(|_| rng.random_range(0..k)).collect();
        let mut w: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..16u8))).collect();
        w[0] += 1.0;
        let ds = LabeledDataset::new(x, y, LabeledDataset::numbered_classes(k)).map_err(|e| e.to_string())?;
        let s = train_stump(&ds, &w).map_err(|e| e.to_string())?;
        let (got, want) = (weighted_accuracy(&s, &ds, &w), brute_force_best(&ds, &w));
        if got != want {
            return Err(format!("case {case}: stump {got} vs brute force {want}"));
        }
    }
    check(true, "200 cases exact".into())
}

struct Letter {
    source: String,
    train: LabeledDataset,
    test: LabeledDataset,
}

fn letter_split() -> Result<Letter, String> {
    let (data, source) = match std::env::var_os("BOOKMAKER_LETTER_DATA") {
        Some(path) => (
            dataset::load_csv(&path, &CsvOptions::default()).map_err(|e| e.to_string())?,
            format!("UCI file {}", path.to_string_lossy()),
        ),
        None => (
            gen_synthetic(&SyntheticKind::PrototypeClasses(PrototypeClasses::letter_surrogate()), 1)
                .map_err(|e| e.to_string())?,
            "surrogate".to_string(),
        ),
    };
    let (train, test) = dataset::split(&data, 0.8, 1, false).map_err(|e| e.to_string())?;
    Ok(Letter { source, train, test })
}

fn test_accuracy(pred: &[usize], data: &LabeledDataset) -> f64 {
    pred.iter().zip(data.y()).filter(|(p, y)| p == y).count() as f64 / data.n() as f64
}

fn c11_adaboost_stall(letter: &Letter) -> Verdict {
    let start = Instant::now();
    let config = BoostConfig::new(Measure::Accuracy).rounds(200).seed(1);
    let (ensemble, trace) = boost_train(&letter.train, &config, Some(&letter.test)).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let stump = train_stump(&letter.train, &vec![1.0; letter.train.n()]).map_err(|e| e.to_string())?;
    let single = test_accuracy(&stump.predict_all(&letter.test), &letter.test);
    let boosted = test_accuracy(&ensemble.predict_all(&letter.test).map_err(|e| e.to_string())?, &letter.test);
    let g = trace.rounds.first().map_or(f64::NAN, |r| r.g);
    let ok = trace.rounds.len() == 1
        && trace.stop == StopReason::Chance
        && g < 0.5
        && boosted == single
        && took < Duration::from_secs(60);
    check(
        ok,
        format!(
            "{}: {} round(s), g {g:.4}, test accuracy {boosted:.4} vs stump {single:.4}, {took:?}",
            letter.source,
            trace.rounds.len()
        ),
    )
}

fn c12_adabook(letter: &Letter) -> Verdict {
    let start = Instant::now();
    let run = |m: Measure| boost_train(&letter.train, &BoostConfig::new(m).rounds(200).seed(1), Some(&letter.test));
    let (_, ada) = run(Measure::Accuracy).map_err(|e| e.to_string())?;
    let baseline = ada.rounds[0].test_acc.unwrap();
    let flat = ada.rounds.iter().all(|r| r.test_acc == Some(baseline));
    let mut detail = format!("{}: baseline {baseline:.4}", letter.source);
    let mut ok = flat;
    for m in [Measure::Informedness, Measure::Kappa] {
        let (_, trace) = run(m).map_err(|e| e.to_string())?;
        let last = trace.rounds.last().unwrap();
        let ratio = last.test_acc.unwrap() / baseline;
        let at_50 = trace.rounds.iter().take(50).last().and_then(|r| r.test_acc).unwrap();
        ok &= ratio >= 2.0 && at_50 > baseline;
        detail += &format!(
            ", {m} {at_50:.4} at round 50 and {:.4} after {} rounds ({ratio:.2}x)",
            last.test_acc.unwrap(),
            last.round
        );
    }
    let took = start.elapsed();
    ok &= took < Duration::from_secs(600);
    check(ok, format!("{detail}, accuracy curve flat: {flat}, {took:?}"))
}

fn c13_booster_invariants() -> Verdict {
    let ds = gen_synthetic(
        &SyntheticKind::PrototypeClasses(PrototypeClasses { n: 2000, ..PrototypeClasses::letter_surrogate() }),
        13,
    )
    .map_err(|e| e.to_string())?;
    let blobs = gen_synthetic(&SyntheticKind::SeparableBlobs(SeparableBlobs { n: 200, d: 3, margin: 0.2 }), 13)
        .map_err(|e| e.to_string())?;
    let (mut sum_err, mut alpha_err, mut rounds) = (0.0f64, 0.0f64, 0);
    for (data, measure) in [(&ds, Measure::Informedness), (&ds, Measure::Kappa), (&blobs, Measure::Accuracy)] {
        let mut b = Booster::new(data, &BoostConfig::new(measure).rounds(60), None).map_err(|e| e.to_string())?;
        while let Some(r) = b.step().map_err(|e| e.to_string())? {
            rounds += 1;
            sum_err = sum_err.max((b.weights().iter().sum::<f64>() - 1.0).abs());
            if r.alpha > 0.0 {
                alpha_err = alpha_err.max((r.alpha - (r.g / (1.0 - r.g)).ln()).abs());
            }
        }
        for m in b.ensemble().map_err(|e| e.to_string())?.members() {
            if m.alpha.is_nan() || m.alpha <= 0.0 {
                return Err(format!("stored alpha {}", m.alpha));
            }
        }
    }
    check(
        sum_err <= 1e-12 && alpha_err <= 1e-12,
        format!("{rounds} rounds, weight sum err {sum_err:.3e}, alpha err {alpha_err:.3e}"),
    )
}

fn c14_harmonic() -> Verdict {
    let mut previous = f64::INFINITY;
    for p in 1..=10_000u64 {
        let h = harmonic_information(p).map_err(|e| e.to_string())?;
        let err = h.error().abs();
        if err > 1.01 / (2.0 * p as f64) {
            return Err(format!("P={p}: error {err:.3e} over bound"));
        }
        if p >= 2 && err >= previous {
            return Err(format!("P={p}: error {err:.3e} did not decrease"));
        }
        previous = err;
    }
    check(true, format!("error at 10^4 is {previous:.3e}"))
}

fn c15_deterministic_compare() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("letter.csv");
    let ds = gen_synthetic(
        &SyntheticKind::PrototypeClasses(PrototypeClasses { n: 4000, ..PrototypeClasses::letter_surrogate() }),
        15,
    )
    .map_err(|e| e.to_string())?;
    dataset::write_csv(&ds, std::fs::File::create(&data).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let compare = |jobs: &str| {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let args = ["bookmaker", "compare", "--data", data.to_str().unwrap(), "--rounds", "60", "--seed", "15", "--jobs", jobs];
        let code = bookmaker_cli::run(args, &mut out, &mut err);
        (code, out)
    };
    let (code_a, a) = compare("0");
    let (code_b, b) = compare("0");
    let (code_c, c) = compare("1");
    let ok = a == b && a == c && code_a == code_b && code_a == code_c && a.len() > 30;
    check(ok, format!("{} bytes, exit code {code_a}, parallel and single-threaded identical: {}", a.len(), a == c))
}

fn main() -> ExitCode {
    let letter = letter_split();
    let letter_case = |f: fn(&Letter) -> Verdict| -> Verdict {
        match &letter {
            Ok(l) => f(l),
            Err(e) => Err(format!("letter data: {e}")),
        }
    };
    let results: Vec<(u32, Verdict)> = vec![
        (1, c1_dual_informedness()),
        (2, c2_kappa_forms()),
        (3, c3_correlation()),
        (4, c4_guessing_example()),
        (5, c5_four_horses()),
        (6, c6_chance_nullity()),
        (7, c7_informatron_bridge()),
        (8, c8_perceptron_convergence()),
        (9, c9_winnow_mistakes()),
        (10, c10_stump_optimality()),
        (11, letter_case(c11_adaboost_stall)),
        (12, letter_case(c12_adabook)),
        (13, c13_booster_invariants()),
        (14, c14_harmonic()),
        (15, c15_deterministic_compare()),
    ];
    let mut failed = 0;
    for (n, verdict) in &results {
        match verdict {
            Ok(detail) => println!("criterion {n:2}: PASS  {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:2}: FAIL  {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
