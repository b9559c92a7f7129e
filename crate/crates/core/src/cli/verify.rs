use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::approxfn::{
    h_fourier_zero_exact, psi_times_ramp_factor, trapezoid_fourier_1d, Approximant, Side, TrapezoidSpec,
};
use crate::config::VerifyConfig;
use crate::error::Result;
use crate::lattice::{kernel_sum, GeneralLattice, Overlattice, DEFAULT_ENUMERATION_CAP, DEFAULT_POINT_CAP};
use crate::linalg::IntMatrix;
use crate::measures::MeasureModel;
use crate::oracle::{pairing_quadrature, trapezoid_fourier_quadrature};
use crate::orbit::{TargetSpec, TorusPoint};
use crate::stats::measure_of_target_fourier;

pub const FAMILIES: [&str; 8] = [
    "coset_count",
    "exp_sum_dichotomy",
    "trapezoid_transform",
    "fourier_at_zero",
    "fourier_off_dual",
    "parseval_pairing",
    "kernel_sum_bound",
    "integer_transform",
];

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub family: &'static str,
    pub trial: usize,
    pub instance: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Random nonsingular `d×d` matrix with entries in `[−bound, bound]` and
/// `|det| ≤ detmax`.
pub fn random_matrix<R: Rng>(rng: &mut R, d: usize, bound: i64, detmax: u64) -> IntMatrix {
    loop {
        let rows: Vec<Vec<i64>> = (0..d)
            .map(|_| (0..d).map(|_| rng.random_range(-bound..=bound)).collect())
            .collect();
        let a = IntMatrix::from_i64_rows(&rows).expect("square");
        let det = a.determinant().abs();
        if !det.is_zero() && det <= BigInt::from(detmax) {
            return a;
        }
    }
}

pub fn random_vector<R: Rng>(rng: &mut R, d: usize, bound: i64) -> Vec<BigInt> {
    (0..d).map(|_| BigInt::from(rng.random_range(-bound..=bound))).collect()
}

fn fmt_vec(v: &[BigInt]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(","))
}

fn fmt_matrix(a: &IntMatrix) -> String {
    let parts: Vec<String> = (0..a.dim()).map(|i| fmt_vec(a.row(i))).collect();
    format!("[{}]", parts.join(","))
}

struct Suite {
    rows: Vec<CheckRow>,
    scale: f64,
}

impl Suite {
    fn push(&mut self, family: &'static str, trial: usize, instance: String, value: f64, tolerance: f64, passed: bool) {
        self.rows.push(CheckRow {
            family,
            trial,
            instance,
            value,
            tolerance,
            passed,
        });
    }

    /// `value ≤ base·scale`.
    fn within(&mut self, family: &'static str, trial: usize, instance: String, value: f64, base: f64) {
        let tol = base * self.scale;
        self.push(family, trial, instance, value, tol, value <= tol);
    }
}

/// Run every check family `cfg.trials` times from `seed`.
pub fn verify_lemmas(cfg: &VerifyConfig, seed: u64) -> Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Suite {
        rows: Vec::new(),
        scale: cfg.tolerance,
    };
    let dmax = cfg.dmax.clamp(1, 3);
    for t in 0..cfg.trials {
        let d = rng.random_range(1..=dmax);
        let a = random_matrix(&mut rng, d, 5, cfg.detmax);
        let lat = Overlattice::new(a.clone())?;
        let det = lat.index().abs();
        let reps = lat.coset_reps(DEFAULT_ENUMERATION_CAP)?;
        s.push(
            "coset_count",
            t,
            fmt_matrix(&a),
            reps.len() as f64,
            0.0,
            BigInt::from(reps.len()) == det,
        );

        let detf = det.to_f64().unwrap();
        for _ in 0..10 {
            let k = random_vector(&mut rng, d, 20);
            let sum = lat.exp_sum_over(&reps.reps, &k);
            let inst = format!("A={} k={}", fmt_matrix(&a), fmt_vec(&k));
            if lat.dual_contains(&k)? {
                s.push(
                    "exp_sum_dichotomy",
                    t,
                    inst,
                    sum.re,
                    detf,
                    sum == Complex64::new(detf, 0.0),
                );
            } else {
                s.within("exp_sum_dichotomy", t, inst, sum.norm(), 1e-9 * detf);
            }
        }

        let r = rng.random_range(0.01..0.49);
        let eps = rng.random_range(0.01..1.0);
        let kf = rng.random_range(-60i64..=60) as f64;
        let side = if rng.random::<bool>() { Side::Upper } else { Side::Lower };
        let spec = TrapezoidSpec::new(r, eps, side)?;
        let v = trapezoid_fourier_1d(&spec, kf);
        let q = trapezoid_fourier_quadrature(&spec, kf);
        s.within(
            "trapezoid_transform",
            t,
            format!("r={r} eps={eps} k={kf} side={}", side.name()),
            (v - q).abs() / v.abs().max(1e-6),
            1e-8,
        );

        // exact ĥ(0) and its float evaluation
        let den = 1000i64;
        let rq: Vec<BigRational> = (0..d)
            .map(|_| BigRational::new(rng.random_range(1..=499).into(), den.into()))
            .collect();
        let eq = BigRational::new(rng.random_range(1..=den).into(), den.into());
        let exact = h_fourier_zero_exact(&rq, &eq, side);
        let inst = format!(
            "r={:?} eps={} side={}",
            rq.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            eq,
            side.name()
        );
        let same = exact == psi_times_ramp_factor(&rq, &eq, side);
        s.push(
            "fourier_at_zero",
            t,
            inst.clone(),
            exact.to_f64().unwrap_or(f64::NAN),
            0.0,
            same,
        );
        let rf: Vec<f64> = rq.iter().map(|x| x.to_f64().unwrap()).collect();
        let h = Approximant::new(a.clone(), TorusPoint::zero(d), &rf, eq.to_f64().unwrap(), side)?;
        let float0 = h.fourier(&vec![BigInt::zero(); d])?;
        let ex = exact.to_f64().unwrap();
        s.within("fourier_at_zero", t, inst, (float0 - ex).norm() / ex, 1e-12);

        // off the dual lattice ĥ vanishes identically
        if !det.is_one() {
            let k = loop {
                let k = random_vector(&mut rng, d, 20);
                if !lat.dual_contains(&k)? {
                    break k;
                }
            };
            let v = h.fourier(&k)?;
            s.push(
                "fourier_off_dual",
                t,
                format!("A={} k={}", fmt_matrix(&a), fmt_vec(&k)),
                v.norm(),
                0.0,
                v == Complex64::new(0.0, 0.0),
            );
        }

        parseval_trial(&mut s, &mut rng, t, dmax.min(2))?;

        let kd = rng.random_range(1..=dmax.min(2));
        let sigma = 1i64 << rng.random_range(1..=6);
        let keps = [1.0, 0.25, 0.0625][rng.random_range(0..3)];
        let kr: Vec<f64> = (0..kd).map(|_| [0.05, 0.1, 0.25][rng.random_range(0..3)]).collect();
        let lattice = GeneralLattice::scaled_integer(kd, sigma)?;
        let ks = kernel_sum(&lattice, &kr, keps, 16.0 * sigma as f64, DEFAULT_POINT_CAP)?;
        let norm = (ks.value + ks.tail_bound) * sigma as f64 * keps.powf(kd as f64 / 2.0);
        s.push(
            "kernel_sum_bound",
            t,
            format!("d={kd} sigma={sigma} eps={keps} r={kr:?}"),
            norm,
            50.0,
            norm <= 50.0,
        );

        let kk = BigInt::from(rng.random_range(1i64..=2000) * if rng.random::<bool>() { 1 } else { -1 });
        let leb = MeasureModel::lebesgue(1).fourier_int_1d(&kk);
        s.push(
            "integer_transform",
            t,
            format!("lebesgue k={kk}"),
            leb.norm(),
            0.0,
            leb.norm() == 0.0,
        );
        for m in [MeasureModel::smooth(1), MeasureModel::cantor(1)] {
            let kv = kk.to_f64().unwrap();
            let diff = (m.fourier_int_1d(&kk) - m.fourier_1d(kv)).norm();
            s.within("integer_transform", t, format!("{} k={kk}", m.name()), diff, 1e-9);
        }
    }
    Ok(s.rows)
}

fn parseval_trial(s: &mut Suite, rng: &mut ChaCha8Rng, t: usize, dmax: usize) -> Result<()> {
    let d = rng.random_range(1..=dmax);
    let a = random_matrix(rng, d, 3, 12);
    let y = TorusPoint::from_fractions(&(0..d).map(|_| (rng.random_range(0..97), 97)).collect::<Vec<_>>())?;
    let radii: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..0.3)).collect();
    let eps = rng.random_range(0.1..1.0);
    let side = if rng.random::<bool>() { Side::Upper } else { Side::Lower };
    let m = if rng.random::<bool>() {
        MeasureModel::lebesgue(d)
    } else {
        MeasureModel::smooth(d)
    };
    let target = TargetSpec::constant(y.clone(), radii.clone())?;
    let fourier = measure_of_target_fourier(&m, &a, &target, 1, eps, side)?;
    let h = Approximant::new(a.clone(), y.clone(), &target.radii_at(1), eps, side)?;
    let mm = m;
    let w = move |x: &[f64]| Complex64::new(mm.density(x).unwrap_or(1.0), 0.0);
    let quad = pairing_quadrature(&h, &w, 4)?;
    s.within(
        "parseval_pairing",
        t,
        format!(
            "{} A={} y={y} r={radii:?} eps={eps} side={}",
            m.name(),
            fmt_matrix(&a),
            side.name()
        ),
        (fourier.value - quad.re).abs(),
        1e-6,
    );
    Ok(())
}
