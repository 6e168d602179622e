//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use readscore::align::{align_tokens, BinaryScoreVector};
use readscore::analysis::{default_grid, evaluate, sweep_threshold, Objective, SystemSpec};
use readscore::classify::{confusion, ConfusionMatrix};
use readscore::corpus::{load_corpus, normalize_tokens, Prompt, TaskType, WordToken};
use readscore::metrics::{cohens_kappa, mcc, precision_recall_f, Class, ClassScores, Rates};
use readscore::protocol::{run_accuracy_item, run_fluency_session, MiscueReader, RateJudge, MAX_ATTEMPTS};
use readscore::report::SavedReport;
use readscore::synth::{expected_confusion, generate_corpus, ConfidenceModel, GeneratorConfig, PiecewiseConstant};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{name}: got {got:.5}, want {want} ± {tol}"))
}

fn pct_cells(s: &ClassScores) -> [f64; 3] {
    [s.precision, s.recall, s.f1].map(|v| v.expect("defined") * 100.0)
}

fn table_arithmetic() -> Check {
    // (matrix, kappa, mcc, [P_CA, P_CR, R_CA, R_CR, F_CA, F_CR])
    let rows = [
        (ConfusionMatrix::new(724, 99, 76, 100), 0.422, 0.423, [90.5, 49.8, 87.8, 56.6, 89.1, 53.0]),
        (ConfusionMatrix::new(673, 153, 23, 151), 0.533, 0.568, [96.7, 50.2, 81.6, 87.1, 88.6, 63.7]),
    ];
    let mut worst = 0.0f64;
    for (cm, k, m, table) in rows {
        within("kappa", cohens_kappa(&cm).unwrap().unwrap(), k, 0.005)?;
        within("mcc", mcc(&cm).unwrap().unwrap(), m, 0.005)?;
        let ca = pct_cells(&precision_recall_f(&cm, Class::CA).unwrap());
        let cr = pct_cells(&precision_recall_f(&cm, Class::CR).unwrap());
        let got = [ca[0], cr[0], ca[1], cr[1], ca[2], cr[2]];
        for (g, w) in got.iter().zip(table) {
            within("P/R/F cell", *g, w, 0.2)?;
            worst = worst.max((g - w).abs());
        }
    }
    Ok(format!("2 systems, 12 P/R/F cells, worst cell gap {worst:.3} pp"))
}

fn brute_force_cost(r: &[WordToken], o: &[WordToken]) -> u32 {
    match (r.split_first(), o.split_first()) {
        (None, _) => o.len() as u32,
        (_, None) => r.len() as u32,
        (Some((a, ra)), Some((b, ob))) => (brute_force_cost(ra, ob) + u32::from(!a.matches(b)))
            .min(brute_force_cost(ra, o) + 1)
            .min(brute_force_cost(r, ob) + 1),
    }
}

fn alignment_oracle() -> Check {
    const ALPHABET: [&str; 5] = ["de", "kat", "zit", "op", "kat-"];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draw = |rng: &mut ChaCha8Rng| {
        let n = rng.random_range(0..=6);
        normalize_tokens(&(0..n).map(|_| ALPHABET[rng.random_range(0..5)]).collect::<Vec<_>>())
    };
    let cases = 2000;
    for _ in 0..cases {
        let (r, o) = (draw(&mut rng), draw(&mut rng));
        let got = align_tokens(&o, &r).cost;
        let want = brute_force_cost(&r, &o);
        ensure(got == want, || format!("{r:?} vs {o:?}: dp {got}, exhaustive {want}"))?;
    }
    Ok(format!("{cases}/{cases} pairs agree"))
}

fn metric_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cases = 2000;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.random_range(1..=50);
        let a: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let b: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let cm = confusion(&BinaryScoreVector::new(a.clone()), &BinaryScoreVector::new(b.clone())).unwrap();

        let nf = n as f64;
        let pa = a.iter().filter(|&&x| x).count() as f64 / nf;
        let pb = b.iter().filter(|&&x| x).count() as f64 / nf;
        let po = a.iter().zip(&b).filter(|(x, y)| x == y).count() as f64 / nf;
        let pe = pa * pb + (1.0 - pa) * (1.0 - pb);
        let kappa = (pe < 1.0).then(|| (po - pe) / (1.0 - pe));
        let cov = a.iter().zip(&b).map(|(&x, &y)| (f64::from(u8::from(x)) - pa) * (f64::from(u8::from(y)) - pb)).sum::<f64>() / nf;
        let (va, vb) = (pa * (1.0 - pa), pb * (1.0 - pb));
        let pearson = (va > 0.0 && vb > 0.0).then(|| cov / (va * vb).sqrt());

        for (name, lib, oracle) in [("kappa", cohens_kappa(&cm).unwrap(), kappa), ("mcc", mcc(&cm).unwrap(), pearson)] {
            match (lib, oracle) {
                (Some(x), Some(y)) => {
                    worst = worst.max((x - y).abs());
                    within(name, x, y, 1e-9)?
                }
                (None, None) => {}
                other => return Err(format!("{name} definedness differs on {cm:?}: {other:?}")),
            }
        }
    }
    Ok(format!("{cases} vector pairs, max deviation {worst:.1e}"))
}

fn metric_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let cm = ConfusionMatrix::new(
            rng.random_range(0..1000),
            rng.random_range(0..1000),
            rng.random_range(0..1000),
            rng.random_range(1..1000),
        );
        for k in [2, 10, 1000] {
            let big = cm.scaled(k);
            for (x, y) in [(cohens_kappa(&cm), cohens_kappa(&big)), (mcc(&cm), mcc(&big))] {
                match (x.unwrap(), y.unwrap()) {
                    (Some(x), Some(y)) => within("scaled", y, x, 1e-12)?,
                    (x, y) => ensure(x == y, || format!("scaling changed definedness of {cm:?}"))?,
                }
            }
            for class in [Class::CA, Class::CR] {
                let (a, b) = (precision_recall_f(&cm, class).unwrap(), precision_recall_f(&big, class).unwrap());
                for (x, y) in [(a.precision, b.precision), (a.recall, b.recall), (a.f1, b.f1)] {
                    if let (Some(x), Some(y)) = (x, y) {
                        within("scaled P/R/F", y, x, 1e-12)?;
                    }
                }
            }
        }
        let sw = cm.swap_classes();
        ensure(cohens_kappa(&cm).unwrap() == cohens_kappa(&sw).unwrap(), || format!("kappa swap {cm:?}"))?;
        ensure(mcc(&cm).unwrap() == mcc(&sw).unwrap(), || format!("mcc swap {cm:?}"))?;
        ensure(
            precision_recall_f(&cm, Class::CA).unwrap() == precision_recall_f(&sw, Class::CR).unwrap()
                && precision_recall_f(&cm, Class::CR).unwrap() == precision_recall_f(&sw, Class::CA).unwrap(),
            || format!("class triples not swapped for {cm:?}"),
        )?;
    }
    for (ca, cr) in [(1, 1), (50, 7), (1000, 3)] {
        let perfect = ConfusionMatrix::new(ca, cr, 0, 0);
        ensure(cohens_kappa(&perfect).unwrap() == Some(1.0), || "perfect kappa".into())?;
        ensure(mcc(&perfect).unwrap() == Some(1.0), || "perfect mcc".into())?;
    }
    Ok("500 matrices × k∈{2,10,1000}, class swap, perfect matrices".into())
}

fn synthesis_closure() -> Check {
    let target = Rates {
        car: 0.70,
        crr: 0.10,
        far: 0.08,
        frr: 0.12,
    };
    let cfg = GeneratorConfig::targeting(target, 100_000, 5).map_err(|e| e.to_string())?;
    let expected = expected_confusion(&cfg).map_err(|e| e.to_string())?;
    let synthetic = generate_corpus(&cfg).map_err(|e| e.to_string())?;
    ensure(synthetic.corpus.word_count() == 100_000, || "word count".into())?;
    let e = evaluate(&synthetic.corpus, &SystemSpec::Hypothesis(cfg.system_name.clone())).map_err(|e| e.to_string())?;
    let got = e.metrics.rates;
    for (name, g, w) in [
        ("CA", got.car, expected.car),
        ("CR", got.crr, expected.crr),
        ("FA", got.far, expected.far),
        ("FR", got.frr, expected.frr),
    ] {
        within(name, g, w, 0.01)?;
    }
    // Analytic kappa of the target rates, from observed and chance agreement.
    let po = target.car + target.crr;
    let ref_ok = target.car + target.frr;
    let sys_ok = target.car + target.far;
    let pe = ref_ok * sys_ok + (1.0 - ref_ok) * (1.0 - sys_ok);
    let analytic = (po - pe) / (1.0 - pe);
    let k = e.metrics.kappa.ok_or("kappa undefined")?;
    within("kappa", k, analytic, 0.01)?;
    Ok(format!(
        "rates ({:.4}, {:.4}, {:.4}, {:.4}), kappa {k:.4} vs analytic {analytic:.4}",
        got.car, got.crr, got.far, got.frr
    ))
}

fn sweep_correctness() -> Check {
    let cfg = GeneratorConfig {
        seed: 6,
        confidence: Some(ConfidenceModel {
            correct: PiecewiseConstant::uniform(60, 90),
            miscue: PiecewiseConstant::uniform(10, 50),
        }),
        ..GeneratorConfig::default()
    };
    let synthetic = generate_corpus(&cfg).map_err(|e| e.to_string())?;
    let sweep = sweep_threshold(&synthetic.corpus, &default_grid(), Objective::Kappa).map_err(|e| e.to_string())?;
    ensure(sweep.best_threshold == 51.0, || format!("best threshold {}", sweep.best_threshold))?;
    ensure(sweep.best_kappa == Some(1.0), || format!("best kappa {:?}", sweep.best_kappa))?;
    // At the chosen threshold the decisions coincide with the generator's truth.
    let at_best = &sweep.points[51].matrix;
    let truth_ok = synthetic.truth.iter().filter(|t| t.true_label == 1).count() as u64;
    ensure(at_best.fa == 0 && at_best.fr == 0 && at_best.ca == truth_ok, || format!("{at_best:?}"))?;
    Ok(format!("best threshold {} with kappa {:?}", sweep.best_threshold, sweep.best_kappa.unwrap()))
}

fn protocol_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let vocab = ["de", "kat", "zit", "op", "mat", "hond", "bal", "rood"];
    let sentence = |rng: &mut ChaCha8Rng, lo: usize, hi: usize| -> Vec<WordToken> {
        let n = rng.random_range(lo..=hi);
        normalize_tokens(&(0..n).map(|_| vocab[rng.random_range(0..vocab.len())]).collect::<Vec<_>>())
    };
    let mut judge = RateJudge::new(0.8, 0.3, 8).map_err(|e| e.to_string())?;
    let mut reader = MiscueReader::new(0.3, None, 9).map_err(|e| e.to_string())?;
    let mut histogram = BTreeMap::new();
    for i in 0..10_000 {
        let (task, words) = if i % 2 == 0 {
            (TaskType::IsolatedWord, sentence(&mut rng, 1, 1))
        } else {
            (TaskType::Sentence, sentence(&mut rng, 3, 8))
        };
        let prompt = Prompt::new(format!("a{i}"), task, words).unwrap();
        let o = run_accuracy_item(&prompt, &mut judge, &mut reader).map_err(|e| e.to_string())?;
        ensure(o.attempts_used <= MAX_ATTEMPTS && o.attempts_used == o.attempts.len(), || format!("{o:?}"))?;
        let (last, before) = o.attempts.split_last().ok_or("no attempts")?;
        ensure(before.iter().all(|a| !a.accepted), || "continued after an accept".into())?;
        ensure(last.accepted == o.final_accepted, || "final decision mismatch".into())?;
        ensure(o.final_accepted || o.attempts_used == MAX_ATTEMPTS, || "stopped early without accept".into())?;
        *histogram.entry(o.attempts_used).or_insert(0usize) += 1;
    }
    let sessions = 1000;
    for i in 0..sessions {
        let prompt = Prompt::new(format!("f{i}"), TaskType::WordList, sentence(&mut rng, 6, 12)).unwrap();
        let log = run_fluency_session(&prompt, &mut judge, &mut reader).map_err(|e| e.to_string())?;
        let rejected: Vec<usize> = log.round1.iter().filter(|d| !d.accepted).map(|d| d.item).collect();
        ensure(log.retry_set == rejected, || format!("retry set {:?} vs {rejected:?}", log.retry_set))?;
        let retried: Vec<usize> = log.retry.iter().map(|d| d.item).collect();
        ensure(retried == rejected, || "retry phase does not follow the retry set".into())?;
        let all: Vec<usize> = (0..prompt.len()).collect();
        let reread: Vec<usize> = log.round2.iter().map(|d| d.item).collect();
        ensure(reread == all, || "round 2 does not present the full list".into())?;
    }
    Ok(format!("10000 accuracy items, attempts histogram {histogram:?}; {sessions} fluency sessions"))
}

fn threshold_monotonicity() -> Check {
    let grid = default_grid();
    for seed in 0..100u64 {
        let mut cfg = GeneratorConfig {
            seed: 1000 + seed,
            ..GeneratorConfig::default()
        };
        for n in cfg.words_per_task.values_mut() {
            *n = 60;
        }
        let synthetic = generate_corpus(&cfg).map_err(|e| e.to_string())?;
        let sweep = sweep_threshold(&synthetic.corpus, &grid, Objective::Kappa).map_err(|e| e.to_string())?;
        let accepted: Vec<u64> = sweep.points.iter().map(|p| p.matrix.accepted()).collect();
        ensure(accepted.windows(2).all(|w| w[0] >= w[1]), || format!("seed {seed}: {accepted:?}"))?;
        // Independent count straight from the confidences.
        let confs: Vec<f64> = synthetic.truth.iter().filter_map(|t| t.confidence).collect();
        for (t, got) in grid.iter().zip(&accepted) {
            let want = confs.iter().filter(|&&c| c >= *t).count() as u64;
            ensure(*got == want, || format!("seed {seed}, threshold {t}: {got} vs {want}"))?;
        }
    }
    Ok(format!("100 corpora × {} thresholds", grid.len()))
}

fn cli_thin_shell() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = GeneratorConfig {
        seed: 10,
        ..GeneratorConfig::default()
    };
    let path = dir.path().join("corpus.json");
    generate_corpus(&cfg)
        .and_then(|s| s.corpus.save(&path))
        .map_err(|e| e.to_string())?;

    let run = |out: &Path| {
        Command::new(env!("CARGO_BIN_EXE_readscore"))
            .args(["evaluate", "--corpus"])
            .arg(&path)
            .args(["--system", "threshold:46", "--format", "json,csv", "--out"])
            .arg(out)
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let (ra, rb) = (run(&a)?, run(&b)?);
    ensure(ra.status.success() && rb.status.success(), || String::from_utf8_lossy(&ra.stderr).into_owned())?;
    ensure(ra.stdout == rb.stdout, || "stdout differs between runs".into())?;
    for f in ["evaluate.json", "evaluate.csv", "labels.csv"] {
        let (x, y) = (fs::read(a.join(f)).map_err(|e| e.to_string())?, fs::read(b.join(f)).map_err(|e| e.to_string())?);
        ensure(x == y, || format!("{f} differs between runs"))?;
    }
    let text = fs::read_to_string(a.join("evaluate.json")).map_err(|e| e.to_string())?;
    let saved = SavedReport::from_json(&text).map_err(|e| e.to_string())?;
    let corpus = load_corpus(&path).map_err(|e| e.to_string())?;
    let lib = evaluate(&corpus, &SystemSpec::Threshold(46.0)).map_err(|e| e.to_string())?;
    ensure(saved == SavedReport::Evaluate(lib.clone()), || "CLI result differs from the library".into())?;
    Ok(format!("kappa {:?}, identical across 2 runs", lib.metrics.kappa.unwrap_or(f64::NAN)))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("published metric arithmetic", table_arithmetic),
        ("alignment oracle equivalence", alignment_oracle),
        ("metric definition oracle", metric_oracle),
        ("metric identities", metric_identities),
        ("synthesis closure", synthesis_closure),
        ("sweep correctness", sweep_correctness),
        ("protocol invariants", protocol_invariants),
        ("threshold monotonicity", threshold_monotonicity),
        ("CLI thin shell", cli_thin_shell),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
