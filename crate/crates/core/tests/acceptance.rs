//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Pass criterion numbers as arguments to run a subset.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use torus_lab::approxfn::{
    h_fourier, h_fourier_zero_exact, psi_times_ramp_factor, trapezoid_fourier_1d, Approximant, Side, TrapezoidSpec,
};
use torus_lab::cli::{random_matrix, random_vector};
use torus_lab::lattice::{kernel_sum, GeneralLattice, Overlattice, DEFAULT_ENUMERATION_CAP, DEFAULT_POINT_CAP};
use torus_lab::linalg::{IntMatrix, MatrixSequence};
use torus_lab::measures::{sample_rng, MeasureModel};
use torus_lab::oracle::{pairing_quadrature, trapezoid_fourier_quadrature};
use torus_lab::orbit::{count_hits, psi_cumulative, Radii, TargetSpec, TorusPoint};
use torus_lab::stats::{
    counting_experiment, del_series_term, dichotomy_experiment, measure_of_target_fourier, measure_of_target_mc,
    median, weyl_sum, ExperimentConfig, Regime,
};

type Outcome = (bool, String);

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn c1_exp_sum_dichotomy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let (mut dual, mut off, mut bad) = (0, 0, Vec::new());
    let mut worst_off: f64 = 0.0;
    for _ in 0..500 {
        let d = rng.random_range(1..=3);
        let a = random_matrix(&mut rng, d, 5, 60);
        let lat = Overlattice::new(a.clone()).unwrap();
        let det = lat.index().abs();
        let detf = det.to_f64().unwrap();
        let reps = lat.coset_reps(DEFAULT_ENUMERATION_CAP).unwrap();
        if BigInt::from(reps.len()) != det {
            bad.push(format!("coset count {} != {det} for {a}", reps.len()));
        }
        for _ in 0..50 {
            let k = random_vector(&mut rng, d, 20);
            let s = lat.exp_sum_over(&reps.reps, &k);
            if lat.dual_contains(&k).unwrap() {
                dual += 1;
                if s != Complex64::new(detf, 0.0) {
                    bad.push(format!("dual k={k:?}: {s} != {det}"));
                }
            } else {
                off += 1;
                worst_off = worst_off.max(s.norm() / detf);
                if s.norm() >= 1e-9 * detf {
                    bad.push(format!("k={k:?}: |S|={} for {a}", s.norm()));
                }
            }
        }
    }
    (
        bad.is_empty(),
        format!(
            "{dual} dual / {off} off-dual frequencies, max |S|/|det| off dual {worst_off:.2e}, {} violations{}",
            bad.len(),
            bad.first().map(|b| format!(" (first: {b})")).unwrap_or_default()
        ),
    )
}

fn c2_trapezoid_transforms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let r = rng.random_range(0.01..0.49);
        let eps = rng.random_range(0.01..1.0);
        let k = rng.random_range(-60i64..=60) as f64;
        let side = if rng.random::<bool>() { Side::Upper } else { Side::Lower };
        let spec = TrapezoidSpec::new(r, eps, side).unwrap();
        let v = trapezoid_fourier_1d(&spec, k);
        let q = trapezoid_fourier_quadrature(&spec, k);
        worst = worst.max((v - q).abs() / v.abs().max(1e-6));
    }
    let mut exact_ok = true;
    for _ in 0..100 {
        let d = rng.random_range(1..=3);
        let radii: Vec<BigRational> = (0..d)
            .map(|_| BigRational::new(rng.random_range(1..=499).into(), 1000.into()))
            .collect();
        let eps = BigRational::new(rng.random_range(1..=1000).into(), 1000.into());
        for side in [Side::Upper, Side::Lower] {
            exact_ok &= h_fourier_zero_exact(&radii, &eps, side) == psi_times_ramp_factor(&radii, &eps, side);
        }
    }
    let mut off_nonzero = 0;
    let mut tested = 0;
    while tested < 200 {
        let d = rng.random_range(1..=3);
        let a = random_matrix(&mut rng, d, 5, 60);
        if a.determinant().abs() == BigInt::from(1) {
            continue;
        }
        let k = random_vector(&mut rng, d, 20);
        if Overlattice::new(a.clone()).unwrap().dual_contains(&k).unwrap() {
            continue;
        }
        tested += 1;
        let y = TorusPoint::from_fractions(&vec![(rng.random_range(0..50), 50); d]).unwrap();
        let v = h_fourier(&a, &y, &vec![0.2; d], 0.5, Side::Upper, &k).unwrap();
        if v != Complex64::new(0.0, 0.0) {
            off_nonzero += 1;
        }
    }
    (
        worst <= 1e-8 && exact_ok && off_nonzero == 0,
        format!(
            "max relative error {worst:.2e} (floor 1e-6); exact h(0) identity {}; {off_nonzero}/200 off-dual transforms nonzero",
            if exact_ok { "holds" } else { "FAILS" }
        ),
    )
}

fn c3_parseval_and_sandwich() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut worst: f64 = 0.0;
    let mut misses = Vec::new();
    for case in 0..50 {
        let d = rng.random_range(1..=2);
        let base = loop {
            let a = random_matrix(&mut rng, d, 2, 3);
            if a.determinant().abs() >= BigInt::from(2) {
                break a;
            }
        };
        let n = rng.random_range(1..=3u64);
        let an = base.pow(n);
        let m = if case % 2 == 0 {
            MeasureModel::lebesgue(d)
        } else {
            MeasureModel::smooth(d)
        };
        let y =
            TorusPoint::from_fractions(&(0..d).map(|_| (rng.random_range(0..101), 101)).collect::<Vec<_>>()).unwrap();
        let radii: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..0.3)).collect();
        let eps = rng.random_range(0.1..1.0);
        let target = TargetSpec::constant(y.clone(), radii.clone()).unwrap();
        let mut bounds = [0.0; 2];
        for (i, side) in [Side::Lower, Side::Upper].into_iter().enumerate() {
            let f = measure_of_target_fourier(&m, &an, &target, n as usize, eps, side).unwrap();
            let h = Approximant::new(an.clone(), y.clone(), &radii, eps, side).unwrap();
            let mm = m;
            let w = move |x: &[f64]| Complex64::new(mm.density(x).unwrap_or(1.0), 0.0);
            let q = pairing_quadrature(&h, &w, 4).unwrap();
            worst = worst.max((f.value - q.re).abs() + f.truncation_bound);
            bounds[i] = f.value;
        }
        let mc = measure_of_target_mc(&m, &an, &target, n as usize, 10_000, 5000 + case).unwrap();
        if !(bounds[0] - mc.radius <= mc.estimate && mc.estimate <= bounds[1] + mc.radius) {
            misses.push(format!(
                "case {case}: {} not in [{}, {}] ± {}",
                mc.estimate, bounds[0], bounds[1], mc.radius
            ));
        }
    }
    (
        worst <= 1e-6 && misses.is_empty(),
        format!(
            "max |Fourier − quadrature| {worst:.2e}; {} of 50 MC estimates outside the sandwich{}",
            misses.len(),
            misses.first().map(|m| format!(" (first: {m})")).unwrap_or_default()
        ),
    )
}

fn c4_kernel_sweep() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut problems = Vec::new();
    let rs = [0.05, 0.1, 0.25];
    let mut cases = 0;
    for d in [1usize, 2] {
        let radii_sets: Vec<Vec<f64>> = if d == 1 {
            rs.iter().map(|&r| vec![r]).collect()
        } else {
            rs.iter().flat_map(|&a| rs.iter().map(move |&b| vec![a, b])).collect()
        };
        for sigma in [2i64, 4, 8, 16, 32, 64] {
            let lattice = GeneralLattice::scaled_integer(d, sigma).unwrap();
            for eps in [1.0, 0.25, 0.0625] {
                for radii in &radii_sets {
                    cases += 1;
                    let runs: Vec<_> = [10.5, 21.0, 42.0]
                        .iter()
                        .map(|&f| kernel_sum(&lattice, radii, eps, f * sigma as f64, DEFAULT_POINT_CAP).unwrap())
                        .collect();
                    let norm = runs[2].normalized(sigma as f64, eps, d);
                    worst = worst.max(norm);
                    if norm > 50.0 {
                        problems.push(format!("d={d} σ={sigma} ε={eps} r={radii:?}: {norm}"));
                    }
                    for w in runs.windows(2) {
                        let inc = w[1].value - w[0].value;
                        if inc < -1e-12 * w[1].value || inc > w[0].tail_bound * (1.0 + 1e-12) {
                            problems.push(format!(
                                "d={d} σ={sigma} ε={eps} r={radii:?}: increment {inc} vs tail {}",
                                w[0].tail_bound
                            ));
                        }
                    }
                }
            }
        }
    }
    (
        problems.is_empty(),
        format!(
            "{cases} grid points, max kernel_sum·σ·ε^(d/2) = {worst:.3}; {} problems{}",
            problems.len(),
            problems.first().map(|p| format!(" (first: {p})")).unwrap_or_default()
        ),
    )
}

fn d2_sequence() -> MatrixSequence {
    MatrixSequence::power(IntMatrix::from_i64([[2, 1], [0, 2]])).unwrap()
}

fn c5_counting_theorem() -> Outcome {
    let seq = d2_sequence();
    let k = seq.gap_constant(4096).unwrap();
    let target = TargetSpec::constant(TorusPoint::zero(2), vec![0.25, 0.25]).unwrap();
    let mut cfg = ExperimentConfig::new(MeasureModel::lebesgue(2), seq, target, 4096, 100, 5005);
    cfg.precision_bits = Some(2 * 4096 + 64);
    let rep = counting_experiment(&cfg).unwrap();
    let psi = rep.records[0].psi;
    let bound = psi.powf(2.0 / 3.0) * (psi.ln() + 2.0).powf(2.5);
    let within = rep.records.iter().filter(|r| r.err.abs() <= bound).count();
    let abs_errs: Vec<f64> = rep.records.iter().map(|r| r.err.abs()).collect();
    let med = median(&abs_errs);
    let ok = (psi - 1024.0).abs() < 1e-9
        && (k - 1.5616).abs() < 1e-4
        && within >= 95
        && med <= 3.0 * psi.sqrt()
        && rep.fit.slope <= 0.85;
    (
        ok,
        format!(
            "K = {k:.6}, Ψ = {psi}, {within}/100 within Ψ^(2/3)(log Ψ+2)^2.5 = {bound:.0}, median |R−Ψ| = {med} (≤ {}), slope {:.4} (≤ 0.85, {} checkpoints)",
            3.0 * psi.sqrt(),
            rep.fit.slope,
            rep.fit.n_points
        ),
    )
}

fn doubling() -> MatrixSequence {
    MatrixSequence::power(IntMatrix::from_i64([[2]])).unwrap()
}

fn c6_divergent() -> Outcome {
    let n = 1 << 14;
    let target = TargetSpec::new(
        TorusPoint::from_fractions(&[(1, 3)]).unwrap(),
        Radii::Power { c: 0.5, exponent: -1.0 },
        None,
    )
    .unwrap();
    let cfg = ExperimentConfig::new(MeasureModel::lebesgue(1), doubling(), target, n, 100, 6006);
    let s = dichotomy_experiment(&cfg, Regime::Divergent, None).unwrap();
    let harmonic: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
    let hits = s.rows.iter().filter(|r| r.r >= 1).count();
    let ok = (s.psi - harmonic).abs() < 1e-5 && hits >= 98 && (0.5..=1.5).contains(&s.median_ratio);
    (
        ok,
        format!(
            "Ψ = {:.4} (H_N = {harmonic:.4}), R ≥ 1 for {hits}/100, median R/Ψ = {:.3}, verdict {}",
            s.psi, s.median_ratio, s.verdict
        ),
    )
}

fn c7_convergent() -> Outcome {
    let target = TargetSpec::new(
        TorusPoint::from_fractions(&[(1, 3)]).unwrap(),
        Radii::Power { c: 0.5, exponent: -2.0 },
        None,
    )
    .unwrap();
    let cfg = ExperimentConfig::new(MeasureModel::lebesgue(1), doubling(), target, 100_000, 50, 7007);
    let s = dichotomy_experiment(&cfg, Regime::Convergent, Some(1000)).unwrap();
    let settled = s.rows.iter().filter(|r| r.last_hit.is_none_or(|l| l <= 1000)).count();
    let ok = s.max_r <= 10 && settled * 10 >= 50 * 9;
    (
        ok,
        format!(
            "max R = {}, last hit ≤ 1000 for {settled}/50, Ψ = {:.4}, verdict {}",
            s.max_r, s.psi, s.verdict
        ),
    )
}

fn c8_negative_control() -> Outcome {
    let three = MatrixSequence::power(IntMatrix::from_i64([[3]])).unwrap();
    let target = TargetSpec::constant(TorusPoint::from_fractions(&[(1, 2)]).unwrap(), vec![0.05]).unwrap();
    let cantor = MeasureModel::cantor(1);
    let n = 1000;
    let psi = psi_cumulative(&target, n).total();
    let bits = 2 * n as u64 + 64;
    let mut max_r = 0;
    for id in 0..50 {
        let x = cantor.sample(&mut sample_rng(8008, id), bits);
        max_r = max_r.max(count_hits(&x, &three, &target, n).unwrap().count);
    }
    let big_n = 10_000;
    let wbits = 2 * big_n as u64 + 64;
    let mut close = 0;
    let mut values = Vec::new();
    for id in 0..50 {
        let x = cantor.sample(&mut sample_rng(8009, id), wbits);
        let s = weyl_sum(&x, &three, &big(&[1]), big_n).unwrap().norm();
        values.push(s);
        if (s - 0.37160).abs() <= 0.05 {
            close += 1;
        }
    }
    let ok = max_r == 0 && (psi - 100.0).abs() < 1e-9 && close * 10 >= 50 * 8;
    (
        ok,
        format!(
            "max R = {max_r} with Ψ = {psi}; |S_N(1)| within 0.05 of 0.37160 for {close}/50 (median {:.5}, |μ̂(1)| = {:.5})",
            median(&values),
            cantor.fourier_1d(1.0).norm()
        ),
    )
}

fn c9_equidistribution() -> Outcome {
    let seq = d2_sequence();
    let m = MeasureModel::lebesgue(2);
    let n = 4096;
    let bits = 2 * n as u64 + 64;
    let bound = 3.0 / (n as f64).sqrt();
    let ks = [[1i64, 0], [0, 1], [1, 1]];
    let points: Vec<TorusPoint> = (0..100).map(|id| m.sample(&mut sample_rng(9009, id), bits)).collect();
    let mut counts = Vec::new();
    let mut del_err: f64 = 0.0;
    for k in ks {
        let kb = big(&k);
        counts.push(
            points
                .iter()
                .filter(|x| weyl_sum(x, &seq, &kb, n).unwrap().norm() <= bound)
                .count(),
        );
        let v = del_series_term(&m, &seq, &kb, n).unwrap();
        del_err = del_err.max((v - 1.0 / (n * n) as f64).abs());
    }
    let ok = counts.iter().all(|&c| c >= 95) && del_err <= 1e-15;
    (
        ok,
        format!("|S_N(k)| ≤ 3/√N for {counts:?} of 100 samples; max |DEL − 1/N²| = {del_err:.1e}"),
    )
}

fn tool(args: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_torus-lab"))
        .env_remove("TORUS_LAB_THREADS")
        .args(args)
        .output()
        .unwrap();
    (
        o.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

fn c10_determinism_and_interfaces() -> Outcome {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let small = tmp.path().join("small.json");
    fs::write(
        &small,
        r#"{
  "measure": {"kind": "lebesgue", "dim": 1},
  "sequence": {"kind": "power", "base": [[2]]},
  "target": {"center": ["1/3"], "radii": {"kind": "power", "c": 0.5, "exponent": -1}},
  "N": 1024, "samples": 10000, "seed": 10,
  "weyl": {"k": [[1], [3]], "del": true},
  "dichotomy": {"regime": "divergent"},
  "pairs": {"pairs": [[2, 5], [4, 4]]}
}"#,
    )
    .unwrap();
    let small = small.to_str().unwrap().to_string();
    let runs: Vec<(&str, String, Vec<&str>)> = vec![
        (
            "count",
            root.join("configs/count_doubling.json").display().to_string(),
            vec!["samples.csv", "fit.csv", "variance.csv"],
        ),
        ("weyl", small.clone(), vec!["weyl.csv", "del.csv"]),
        (
            "decay",
            root.join("configs/decay_cantor.json").display().to_string(),
            vec!["decay.csv", "decay_values.csv"],
        ),
        ("dichotomy", small.clone(), vec!["dichotomy.csv", "summary.csv"]),
        ("pairs", small.clone(), vec!["pairs.csv", "pairs_summary.csv"]),
        (
            "verify-lemmas",
            root.join("configs/verify.json").display().to_string(),
            vec!["verify.csv"],
        ),
    ];
    let mut problems = Vec::new();
    for (cmd, cfg, files) in &runs {
        let outs: Vec<_> = ["a", "b"]
            .iter()
            .map(|s| tmp.path().join(format!("{cmd}-{s}")))
            .collect();
        for out in &outs {
            let (code, err) = tool(&[cmd, "--config", cfg, "--out", out.to_str().unwrap()]);
            if code != 0 {
                problems.push(format!("{cmd} exited {code}: {err}"));
            }
        }
        for f in files {
            let a = fs::read(outs[0].join(f)).unwrap_or_default();
            let b = fs::read(outs[1].join(f)).unwrap_or_default();
            if a.is_empty() || a != b {
                problems.push(format!("{cmd}: {f} differs between reruns"));
            }
        }
    }
    let out = tmp.path().join("v");
    let (default_code, _) = tool(&["verify-lemmas", "--out", out.to_str().unwrap()]);
    let fault = root.join("tests/fixtures/verify_fault.json");
    let (fault_code, _) = tool(&[
        "verify-lemmas",
        "--config",
        fault.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    if default_code != 0 {
        problems.push(format!("verify-lemmas defaults exited {default_code}"));
    }
    if fault_code == 0 {
        problems.push("injected fault did not fail".into());
    }
    (
        problems.is_empty(),
        format!(
            "6 commands rerun byte-identically: {}; verify-lemmas default exit {default_code}, fault fixture exit {fault_code}{}",
            problems.iter().all(|p| !p.contains("differs")),
            problems.first().map(|p| format!(" (first problem: {p})")).unwrap_or_default()
        ),
    )
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Outcome); 10] = [
        (1, "exponential-sum dichotomy", 60, c1_exp_sum_dichotomy),
        (2, "trapezoid transforms", 30, c2_trapezoid_transforms),
        (3, "Parseval pairing and sandwich", 300, c3_parseval_and_sandwich),
        (4, "kernel-sum sweep", 120, c4_kernel_sweep),
        (5, "counting theorem, d = 2", 600, c5_counting_theorem),
        (6, "divergent shrinking targets", 300, c6_divergent),
        (7, "convergent shrinking targets", 300, c7_convergent),
        (8, "Cantor negative control", 180, c8_negative_control),
        (9, "equidistribution positive control", 300, c9_equidistribution),
        (10, "determinism and interfaces", 120, c10_determinism_and_interfaces),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (id, name, limit, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = run();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(limit);
        let pass = ok && in_time;
        failures += !pass as u32;
        println!(
            "criterion {id:>2} {} {name}: {detail} [{:.1} s, limit {limit} s{}]",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            if in_time { "" } else { ", OVER TIME" }
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
