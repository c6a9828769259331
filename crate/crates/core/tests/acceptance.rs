//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! worst-case error, its tolerance and the runtime.  Runs as a plain binary
//! (`harness = false`) and exits non-zero if any criterion fails.

use annulus_sle::correlations::{gff_n_point, gff_two_point, green, BoundaryCondition};
use annulus_sle::coulomb_gas::{
    drift_lambda, observable_drift_coefficient, one_leg_partition, ForceDivisor, ForcePoint,
    SleParams,
};
use annulus_sle::loewner::{advance, DriftFn, DriverConfig, LoewnerState};
use annulus_sle::martingale_mc::{
    martingale_test_with, MartingaleReport, McConfig, ObservableKind, ObservableSpec,
};
use annulus_sle::screening::{
    degenerate_ode_residual, null_vector_residual, partition_closed_form, partition_euler,
    partition_residue, z_infinity, ClosedFormTable, FdSteps, QuadratureControl,
};
use annulus_sle::special_fn::{
    kernel_jet, loewner_kernel_h, theta, theta_deriv, theta_i, theta_prime_zero, theta_tilde,
    weierstrass_zeta, weierstrass_zeta_deriv, zeta_pi, SeriesControl, ThetaKind,
};
use annulus_sle::Result;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use BoundaryCondition::{Dirichlet, Er};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// One measured quantity of a criterion.
struct Measure {
    what: String,
    value: f64,
    limit: f64,
    /// `true` when `value` must stay below `limit`, `false` when above.
    below: bool,
}

impl Measure {
    fn ok(&self) -> bool {
        if self.below {
            self.value < self.limit
        } else {
            self.value > self.limit
        }
    }
}

#[derive(Default)]
struct Outcome {
    measures: Vec<Measure>,
}

impl Outcome {
    fn below(&mut self, what: impl Into<String>, value: f64, limit: f64) {
        self.measures.push(Measure {
            what: what.into(),
            value,
            limit,
            below: true,
        });
    }

    fn above(&mut self, what: impl Into<String>, value: f64, limit: f64) {
        self.measures.push(Measure {
            what: what.into(),
            value,
            limit,
            below: false,
        });
    }

    fn flag(&mut self, what: impl Into<String>, ok: bool) {
        self.below(what, if ok { 0.0 } else { 1.0 }, 0.5);
    }
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter()
        .fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v) })
}

/// Criterion 1: special-function identities.
fn special_functions(o: &mut Outcome) -> Result<()> {
    let ctl = SeriesControl::default();
    let ctl = &ctl;
    let zs = [c(0.7, 0.3), c(2.1, -0.4), c(-1.2, 0.9), c(4.0, 0.2)];
    let rs = [0.5, 1.0, 2.0];

    let mut heat = 0.0f64;
    let h = 1e-4;
    for &r in &rs {
        // Samples inside the strip 0 < Im z < r.
        for (x, f) in [(0.7, 0.3), (2.1, 0.8), (-1.2, 0.5), (4.0, 0.1)] {
            let z = c(x, f * r);
            let d_plain = (theta(r + h, z, ctl)? - theta(r - h, z, ctl)?) / (2.0 * h);
            let d_inner = (theta_i(r + h, z, ctl)? - theta_i(r - h, z, ctl)?) / (2.0 * h);
            heat = heat.max((d_plain - theta_deriv(r, z, 2, ThetaKind::Plain, ctl)?).norm());
            heat = heat.max((d_inner - theta_deriv(r, z, 2, ThetaKind::I, ctl)?).norm());
        }
    }
    o.below("heat equation residual", heat, 1e-7);

    let mut per = 0.0f64;
    for &r in &rs {
        for &z in &zs {
            let t = theta(r, z, ctl)?;
            let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm();
            per = per.max(rel(theta(r, z + 2.0 * PI, ctl)?, -t));
            let quasi = -t * (c(r, 0.0) - c(0.0, 1.0) * z).exp();
            per = per.max(rel(theta(r, z + c(0.0, 2.0 * r), ctl)?, quasi));
            per = per.max(rel(theta_i(r, z + 2.0 * PI, ctl)?, theta_i(r, z, ctl)?));
            let tt = theta_tilde(r, z, ctl)?;
            per = per.max(rel(theta_tilde(r, z + c(0.0, 2.0 * r), ctl)?, -tt));
        }
    }
    o.below("periodicity (relative)", per, 1e-11);

    // Random triples x + y + z = 0, kept away from the lattice 2πℤ + 2irℤ.
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let far = |r: f64, w: Complex64| {
        let re = (w.re / (2.0 * PI)).round() * 2.0 * PI;
        let im = (w.im / (2.0 * r)).round() * 2.0 * r;
        (w - c(re, im)).norm() > 0.4
    };
    let (mut zeta_add, mut kernel_add) = (0.0f64, 0.0f64);
    let mut triples = 0;
    while triples < 200 {
        let r = rs[triples % 3];
        let x = c(rng.random_range(-PI..PI), rng.random_range(-r..r));
        let y = c(rng.random_range(-PI..PI), rng.random_range(-r..r));
        let z = -x - y;
        if !(far(r, x) && far(r, y) && far(r, z)) {
            continue;
        }
        triples += 1;
        let s = weierstrass_zeta(r, x, ctl)?
            + weierstrass_zeta(r, y, ctl)?
            + weierstrass_zeta(r, z, ctl)?;
        let d = weierstrass_zeta_deriv(r, x, ctl)?
            + weierstrass_zeta_deriv(r, y, ctl)?
            + weierstrass_zeta_deriv(r, z, ctl)?;
        zeta_add = zeta_add.max((s * s + d).norm());
        // Kernel form at (z, w) = (x, −y).
        let (zz, ww) = (x, -y);
        let a = kernel_jet(r, zz - ww, ctl)?;
        let b = kernel_jet(r, zz, ctl)?;
        let e = kernel_jet(r, ww, ctl)?;
        let lhs = a.h * (b.h - e.h);
        let rhs = 0.5 * a.h * a.h
            + 0.5 * (b.h - e.h) * (b.h - e.h)
            + a.dh
            + b.dh
            + e.dh
            + 6.0 / PI * zeta_pi(r, ctl)?;
        kernel_add = kernel_add.max((lhs - rhs).norm());
    }
    o.below("zeta pseudo-addition, 200 triples", zeta_add, 1e-9);
    o.below("kernel addition form, 200 pairs", kernel_add, 1e-9);

    let mut special = 0.0f64;
    for &r in &rs {
        special = special.max(loewner_kernel_h(r, c(PI, 0.0), ctl)?.norm());
        special = special.max((loewner_kernel_h(r, c(0.0, r), ctl)? + c(0.0, 1.0)).norm());
        special = special.max((loewner_kernel_h(r, c(PI, r), ctl)? + c(0.0, 1.0)).norm());
    }
    o.below("kernel special values", special, 1e-11);

    let mut modular = 0.0f64;
    for &r in &rs {
        let t3 = theta_deriv(r, c(0.0, 0.0), 3, ThetaKind::Plain, ctl)?.re;
        let lhs = zeta_pi(r, ctl)? / (2.0 * PI);
        modular = modular.max((lhs + t3 / (6.0 * theta_prime_zero(r, ctl)?)).abs());
    }
    o.below("modular constant", modular, 1e-10);
    Ok(())
}

/// All perfect matchings of `0..n`, enumerated through permutations in
/// canonical form (pairs increasing internally and by first element).
fn matchings_by_permutation(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn permute(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == p.len() {
            out.push(p.clone());
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permute(k + 1, p, out);
            p.swap(k, i);
        }
    }
    let mut perms = vec![];
    permute(0, &mut (0..n).collect(), &mut perms);
    perms
        .into_iter()
        .filter(|p| {
            (0..n / 2).all(|j| p[2 * j] < p[2 * j + 1])
                && (1..n / 2).all(|j| p[2 * j - 2] < p[2 * j])
        })
        .map(|p| (0..n / 2).map(|j| (p[2 * j], p[2 * j + 1])).collect())
        .collect()
}

/// Criterion 2: Green's functions and correlators.
fn green_correlators(o: &mut Outcome) -> Result<()> {
    let ctl = SeriesControl::default();
    let ctl = &ctl;
    let r = 1.3;
    let zeta = c(0.9, 0.6);

    // Linear vanishing at both boundaries: Richardson from heights h and h/2.
    let mut boundary = 0.0f64;
    let h = 1e-3;
    for x in [0.0, 1.7, 4.0] {
        for (base, sign) in [(0.0, 1.0), (r, -1.0)] {
            let g = |e: f64| green(Dirichlet, r, zeta, c(x, base + sign * e), ctl);
            boundary = boundary.max((2.0 * g(h / 2.0)? - g(h)?).abs());
        }
    }
    o.below("Dirichlet Green boundary limit", boundary, 1e-8);

    let mut diff = 0.0f64;
    for (a, b) in [
        (c(0.3, 0.5), c(1.9, 1.1)),
        (zeta, c(-2.0, 0.2)),
        (c(3.0, 1.2), c(3.1, 0.1)),
    ] {
        let d = green(Er, r, a, b, ctl)? - green(Dirichlet, r, a, b, ctl)?;
        diff = diff.max((d - a.im * b.im / r).abs());
    }
    o.below("ER minus Dirichlet difference", diff, 1e-11);

    let pts = [
        c(0.2, 0.3),
        c(1.1, 0.9),
        c(2.5, 0.4),
        c(3.3, 1.0),
        c(4.4, 0.7),
        c(5.6, 0.2),
    ];
    let mut wick = 0.0f64;
    for bc in [Er, Dirichlet] {
        for n in [4, 6] {
            let p = &pts[..n];
            let mut oracle = 0.0;
            for m in matchings_by_permutation(n) {
                let mut prod = 1.0;
                for (i, j) in m {
                    prod *= gff_two_point(bc, r, p[i], p[j], ctl)?;
                }
                oracle += prod;
            }
            let v = gff_n_point(bc, r, p, ctl)?;
            wick = wick.max((v - oracle).abs() / oracle.abs());
        }
    }
    o.below("Wick sums vs matching oracle (relative)", wick, 1e-10);
    o.flag(
        "matching counts 3 and 15",
        matchings_by_permutation(4).len() == 3 && matchings_by_permutation(6).len() == 15,
    );
    Ok(())
}

/// Criterion 3: partition functions and drift.
fn partition_drift(o: &mut Outcome) -> Result<()> {
    let ctl = SeriesControl::default();
    let ctl = &ctl;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for k in 0..3 {
        let kappa = rng.random_range(2.0..7.0);
        let params = SleParams::new(kappa)?;
        let r = rng.random_range(0.8..2.0);
        let xi = rng.random_range(-0.5..0.5);
        let q1 = rng.random_range(1.5..2.5);
        let q2 = rng.random_range(3.5..5.0);
        let b1 = rng.random_range(-1.0..0.5);
        // The last configuration puts the second force point on the inner boundary.
        let im2 = if k == 2 { r } else { 0.0 };
        let force = ForceDivisor::new(
            params.a,
            vec![
                ForcePoint {
                    q: c(q1, 0.0),
                    beta: b1,
                },
                ForcePoint {
                    q: c(q2, im2),
                    beta: -params.a - b1,
                },
            ],
        )?;
        let l = drift_lambda(Dirichlet, r, xi, &force, &params, ctl)?;
        let h = 1e-5;
        let lz = |x: f64| one_leg_partition(Dirichlet, r, x, &force, ctl).map(f64::ln);
        let fd = kappa * (lz(xi + h)? - lz(xi - h)?) / (2.0 * h);
        worst = worst.max((l - fd).abs() / l.abs());
    }
    o.below("drift vs κ∂ log Z, 3 random configs", worst, 1e-5);

    let params = SleParams::new(4.0)?;
    let force = ForceDivisor::one_leg(&params, c(0.0, 0.0));
    let mut expo = 0.0f64;
    for (bc, r) in [(Er, 1.2), (Dirichlet, 0.9)] {
        let s = |x: f64| -> Result<f64> {
            Ok(match bc {
                Er => theta(r, c(x, 0.0), ctl)?.re,
                Dirichlet => theta_tilde(r, c(x, 0.0), ctl)?.re,
            })
        };
        let (x1, x2) = (1.0, 2.5);
        let z1 = one_leg_partition(bc, r, x1, &force, ctl)?;
        let z2 = one_leg_partition(bc, r, x2, &force, ctl)?;
        expo = expo.max(((z2 / z1).ln() / (s(x2)? / s(x1)?).ln() + 0.5).abs());
    }
    o.below("κ=4 one-point exponent −1/2", expo, 1e-10);
    Ok(())
}

fn x_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 0.3 + 5.6 * k as f64 / (n - 1) as f64)
        .collect()
}

/// Criterion 4: null-vector equations.
fn null_vector(o: &mut Outcome) -> Result<()> {
    let ctl = SeriesControl::default();
    let ctl = &ctl;
    let fd = FdSteps::default();
    let mut annulus_closed = 0.0f64;
    for kappa in [4.0, 2.0, 4.0 / 3.0, 1.0] {
        for r in [0.8, 1.5] {
            for x in x_grid(40) {
                let f = |r: f64, x: f64| {
                    partition_closed_form(r, x, kappa, ClosedFormTable::AnnulusEr, ctl)
                };
                annulus_closed =
                    annulus_closed.max(null_vector_residual(f, Er, r, x, kappa, &fd, ctl)?);
            }
        }
    }
    o.below(
        "annulus closed forms, PDE residual (40 x, 2 r, 4 κ)",
        annulus_closed,
        1e-6,
    );

    let quad = QuadratureControl::default();
    let fd_euler = FdSteps { dx: 1e-2, dr: 1e-2 };
    let mut euler = 0.0f64;
    for kappa in [4.5, 6.0, 8.0] {
        for x in [0.8, 2.0, 3.1, 4.5, 5.5] {
            let f = |r: f64, x: f64| partition_euler(Er, r, x, 0.0, kappa, &quad, ctl);
            euler = euler.max(null_vector_residual(f, Er, 1.0, x, kappa, &fd_euler, ctl)?);
        }
    }
    o.below("Euler integral, PDE residual (κ 4.5, 6, 8)", euler, 1e-3);

    let mut degenerate = 0.0f64;
    for x in x_grid(40) {
        for kappa in [4.0, 2.0, 4.0 / 3.0, 1.0] {
            let f = |x: f64| {
                partition_closed_form(f64::INFINITY, x, kappa, ClosedFormTable::Degenerate, ctl)
            };
            degenerate = degenerate.max(degenerate_ode_residual(f, x, kappa, 1e-3)?);
        }
        for kappa in [6.0, 8.0 / 3.0, 3.0, 4.0] {
            degenerate = degenerate.max(degenerate_ode_residual(
                |x| z_infinity(x, kappa),
                x,
                kappa,
                1e-3,
            )?);
        }
    }
    o.below(
        "degenerate tables and hypergeometric limit, ODE residual",
        degenerate,
        1e-6,
    );

    // Negative control: κ = 4 closed form with its exponent moved from −1/2 to −0.6.
    let mut control = f64::INFINITY;
    for x in [1.0, 2.0, 4.0] {
        let f = |r: f64, x: f64| -> Result<f64> {
            Ok(theta_prime_zero(r, ctl)?.sqrt() * theta(r, c(x, 0.0), ctl)?.re.powf(-0.6))
        };
        control = control.min(null_vector_residual(f, Er, 1.0, x, 4.0, &fd, ctl)?);
    }
    o.above("perturbed exponent control residual", control, 1e-2);
    Ok(())
}

/// Criterion 5: consistency between screening evaluations.
fn screening_consistency(o: &mut Outcome) -> Result<()> {
    let ctl = SeriesControl::default();
    let ctl = &ctl;
    let spread = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        max_of(v.iter().map(|x| (x / m - 1.0).abs()))
    };
    let xs = [0.5, 1.3, 2.2, 3.0, 4.1, 5.0, 5.8];

    let mut residue = 0.0f64;
    for kappa in [4.0, 2.0, 4.0 / 3.0] {
        let mut ratios = vec![];
        for &x in &xs {
            let z = partition_residue(Er, 1.0, x, kappa, ctl)?;
            let t = partition_closed_form(1.0, x, kappa, ClosedFormTable::AnnulusEr, ctl)?;
            ratios.push(z / t);
        }
        residue = residue.max(spread(&ratios));
    }
    o.below("residue / closed form spread", residue, 1e-8);

    let quad = QuadratureControl::default();
    let ratios: Vec<f64> = xs
        .iter()
        .map(|&x| Ok(partition_euler(Er, 8.0, x, 0.0, 6.0, &quad, ctl)? / z_infinity(x, 6.0)?))
        .collect::<Result<_>>()?;
    o.below(
        "Euler(r=8) / hypergeometric limit spread, κ=6",
        spread(&ratios),
        1e-6,
    );

    let mut degenerate_ratio = 0.0f64;
    for kappa in [4.0, 2.0, 4.0 / 3.0, 1.0] {
        let ratios: Vec<f64> = xs
            .iter()
            .map(|&x| {
                let t = partition_closed_form(
                    f64::INFINITY,
                    x,
                    kappa,
                    ClosedFormTable::Degenerate,
                    ctl,
                )?;
                Ok(z_infinity(x, kappa)? / t)
            })
            .collect::<Result<_>>()?;
        degenerate_ratio = degenerate_ratio.max(spread(&ratios));
    }
    o.below(
        "hypergeometric limit / degenerate table spread",
        degenerate_ratio,
        1e-8,
    );
    Ok(())
}

/// Criterion 6: Loewner flow integration.
fn loewner_flow(o: &mut Outcome) -> Result<()> {
    let constant: DriftFn = Arc::new(|_, _, _: &[Complex64]| Ok(0.7));
    let run = |dt: f64| -> Result<Complex64> {
        let cfg = DriverConfig {
            dt,
            drift: Some(constant.clone()),
            ..Default::default()
        };
        let mut s = LoewnerState::new(2.0, 0.0, vec![("z".into(), c(1.3, 0.4))], vec![], &cfg)?;
        advance(&mut s, &cfg, (0.8 / dt).round() as usize)?;
        Ok(s.tracked[0].image)
    };
    let (a, b, d) = (run(0.04)?, run(0.02)?, run(0.01)?);
    let ratio = (a - b).norm() / (b - d).norm();
    o.below(
        "RK4 step-halving ratio, |ratio/16 − 1|",
        (ratio / 16.0 - 1.0).abs(),
        0.1,
    );

    let cfg = DriverConfig {
        kappa: 4.0,
        dt: 1e-3,
        rng_seed: 31,
        ..Default::default()
    };
    let z = c(0.4, 0.9);
    let start = vec![
        ("inner".to_string(), c(PI, 2.0)),
        ("z".to_string(), z),
        ("z+2pi".to_string(), z + 2.0 * PI),
    ];
    let mut s = LoewnerState::new(2.0, 0.0, start.clone(), vec![], &cfg)?;
    advance(&mut s, &cfg, 1000)?;
    o.below(
        "inner boundary Im drift over 1e3 steps",
        (s.tracked[0].image.im - (2.0 - s.t)).abs(),
        1e-6,
    );
    let per = (s.tracked[2].image - s.tracked[1].image - 2.0 * PI).norm();
    o.below("flow 2π-periodicity", per, 1e-9);

    let mut s2 = LoewnerState::new(2.0, 0.0, start, vec![], &cfg)?;
    advance(&mut s2, &cfg, 1000)?;
    let identical = s.history == s2.history
        && s.tracked
            .iter()
            .zip(&s2.tracked)
            .all(|(a, b)| a.image == b.image);
    o.flag("bit-identical paths for identical seeds", identical);
    Ok(())
}

fn one_point_spec(force: ForceDivisor) -> Result<ObservableSpec> {
    Ok(ObservableSpec {
        kind: ObservableKind::OnePointBoson,
        bc: Dirichlet,
        eval_points: vec![c(PI, 1.0)],
        params: SleParams::new(4.0)?,
        force,
        p: 0.0,
        r0: 2.0,
    })
}

fn mc_line(tag: &str, rep: &MartingaleReport) -> String {
    format!(
        "    {tag}: max|z| = {:.2}, n_stopped = {}, z = [{}]",
        rep.max_abs_z(),
        rep.n_stopped,
        rep.z_scores
            .iter()
            .map(|z| format!("{z:.2}"))
            .collect::<Vec<_>>()
            .join(", ")
    )
}

/// Criterion 7: Monte Carlo martingale test with negative controls.
fn martingale(o: &mut Outcome, notes: &mut Vec<String>) -> Result<()> {
    let params = SleParams::new(4.0)?;
    let balanced = ForceDivisor::one_leg(&params, c(PI, 0.0));
    let spec = one_point_spec(balanced.clone())?;
    let base = McConfig {
        n_paths: 5000,
        t_end: 0.1,
        dt: 1e-4,
        seed: 1,
        ..Default::default()
    };

    // Single-failure rerun policy: one retry with the next seed.
    let mut rep = martingale_test_with(&spec, &base)?;
    notes.push(mc_line("seed 1", &rep));
    if !rep.pass {
        rep = martingale_test_with(&spec, &McConfig { seed: 2, ..base })?;
        notes.push(mc_line("rerun seed 2", &rep));
    }
    o.below("observable, all checkpoint |z|", rep.max_abs_z(), 3.0);

    let drift = martingale_test_with(
        &spec,
        &McConfig {
            drift_offset: 0.5,
            n_paths: 20000,
            ..base
        },
    )?;
    notes.push(mc_line("drift +0.5, 20000 paths", &drift));
    o.above("broken-drift control max |z|", drift.max_abs_z(), 5.0);

    let broken = ForceDivisor::unbalanced(
        params.a,
        vec![ForcePoint {
            q: c(PI, 0.0),
            beta: -params.a + 0.5,
        }],
    )?;
    let neutral = martingale_test_with(&one_point_spec(broken)?, &base)?;
    notes.push(mc_line("neutrality broken by 0.5", &neutral));
    o.above(
        "broken-neutrality control max |z|",
        neutral.max_abs_z(),
        5.0,
    );

    let ctl = SeriesControl::default();
    let mut coef = 0.0f64;
    for z in [c(1.0, 1.0), c(PI, 0.3), c(5.0, 1.7)] {
        for bc in [Er, Dirichlet] {
            coef = coef.max(observable_drift_coefficient(bc, 2.0, z, &balanced, &ctl)?.norm());
        }
    }
    o.below("drift coefficient under neutrality", coef, 1e-14);
    Ok(())
}

type Criterion = fn(&mut Outcome, &mut Vec<String>) -> Result<()>;

fn main() {
    let criteria: [(&str, Duration, Criterion); 7] = [
        (
            "special-function identities",
            Duration::from_secs(10),
            |o, _| special_functions(o),
        ),
        (
            "Green's functions and correlators",
            Duration::from_secs(10),
            |o, _| green_correlators(o),
        ),
        (
            "partition functions and drift",
            Duration::from_secs(600),
            |o, _| partition_drift(o),
        ),
        ("null-vector equations", Duration::from_secs(120), |o, _| {
            null_vector(o)
        }),
        ("screening consistency", Duration::from_secs(600), |o, _| {
            screening_consistency(o)
        }),
        ("Loewner flow", Duration::from_secs(600), |o, _| {
            loewner_flow(o)
        }),
        (
            "martingale Monte Carlo",
            Duration::from_secs(300),
            martingale,
        ),
    ];
    let mut failures = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let mut outcome = Outcome::default();
        let mut notes = vec![];
        let start = Instant::now();
        let result = run(&mut outcome, &mut notes);
        let elapsed = start.elapsed();
        let mut pass = result.is_ok() && outcome.measures.iter().all(Measure::ok);
        let mut lines = vec![];
        if elapsed > *budget {
            pass = false;
            lines.push(format!("    runtime {elapsed:.1?} exceeds {budget:?}"));
        }
        for m in &outcome.measures {
            lines.push(format!(
                "    [{}] {}: {:.3e} ({} {:.0e})",
                if m.ok() { "ok" } else { "FAIL" },
                m.what,
                m.value,
                if m.below { "<" } else { ">" },
                m.limit
            ));
        }
        if let Err(e) = &result {
            lines.push(format!("    error: {e}"));
        }
        lines.extend(notes);
        println!(
            "{} criterion {}: {name} ({:.2?})",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            elapsed
        );
        for l in lines {
            println!("{l}");
        }
        if !pass {
            failures += 1;
        }
    }
    println!("{} of 7 criteria passed", 7 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
