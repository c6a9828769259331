//! Quick invariant suite behind the `selftest` command: one line per check,
//! each a fast deterministic identity from a different module.

use crate::correlations::{green, BoundaryCondition};
use crate::coulomb_gas::{
    drift_lambda, observable_drift_coefficient, one_leg_partition, ForceDivisor, SleParams,
};
use crate::error::Result;
use crate::loewner::{advance, DriverConfig, LoewnerState};
use crate::screening::{
    degenerate_ode_residual, null_vector_residual, partition_closed_form, partition_residue,
    z_infinity, ClosedFormTable, FdSteps,
};
use crate::special_fn::{
    loewner_kernel_h, theta, theta_deriv, theta_prime_zero, zeta_pi, SeriesControl, ThetaKind,
};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheck {
    /// Short name.
    pub name: &'static str,
    /// Measured error.
    pub error: f64,
    /// Tolerance it must stay below.
    pub tolerance: f64,
    /// Error message if the computation itself failed.
    pub failure: Option<String>,
}

impl SelfCheck {
    /// `true` when the computation succeeded within tolerance.
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.error < self.tolerance
    }
}

fn check(name: &'static str, tolerance: f64, f: impl FnOnce() -> Result<f64>) -> SelfCheck {
    match f() {
        Ok(error) => SelfCheck {
            name,
            error,
            tolerance,
            failure: None,
        },
        Err(e) => SelfCheck {
            name,
            error: f64::NAN,
            tolerance,
            failure: Some(e.to_string()),
        },
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Runs every check.
pub fn run_selftest() -> Vec<SelfCheck> {
    let ctl = SeriesControl::default();
    let ctl = &ctl;
    vec![
        check("kernel special values", 1e-11, || {
            let r = 1.3;
            let a = loewner_kernel_h(r, c(PI, 0.0), ctl)?.norm();
            let b = (loewner_kernel_h(r, c(0.0, r), ctl)? + c(0.0, 1.0)).norm();
            let d = (loewner_kernel_h(r, c(PI, r), ctl)? + c(0.0, 1.0)).norm();
            Ok(a.max(b).max(d))
        }),
        check("heat equation", 1e-7, || {
            let (r, z, h) = (1.1, c(0.7, 0.4), 1e-4);
            let dr = (theta(r + h, z, ctl)? - theta(r - h, z, ctl)?) / (2.0 * h);
            let d2 = theta_deriv(r, z, 2, ThetaKind::Plain, ctl)?;
            Ok((dr - d2).norm() / d2.norm())
        }),
        check("modular constant", 1e-10, || {
            let r = 1.0;
            let t3 = theta_deriv(r, c(0.0, 0.0), 3, ThetaKind::Plain, ctl)?.re;
            let lhs = zeta_pi(r, ctl)? / (2.0 * PI);
            Ok((lhs + t3 / (6.0 * theta_prime_zero(r, ctl)?)).abs())
        }),
        check("ER minus Dirichlet Green", 1e-11, || {
            let (r, a, b) = (1.4, c(0.3, 0.5), c(1.9, 1.1));
            let d = green(BoundaryCondition::Er, r, a, b, ctl)?
                - green(BoundaryCondition::Dirichlet, r, a, b, ctl)?;
            Ok((d - a.im * b.im / r).abs())
        }),
        check("one-leg exponent at kappa 4", 1e-10, || {
            let p = SleParams::new(4.0)?;
            let f = ForceDivisor::one_leg(&p, c(0.0, 0.0));
            let r = 1.2;
            let (x1, x2) = (1.0, 2.5);
            let z1 = one_leg_partition(BoundaryCondition::Er, r, x1, &f, ctl)?;
            let z2 = one_leg_partition(BoundaryCondition::Er, r, x2, &f, ctl)?;
            let t1 = theta(r, c(x1, 0.0), ctl)?.re;
            let t2 = theta(r, c(x2, 0.0), ctl)?.re;
            Ok(((z2 / z1).ln() / (t2 / t1).ln() + 0.5).abs())
        }),
        check("drift equals log-derivative", 1e-6, || {
            let p = SleParams::new(3.0)?;
            let f = ForceDivisor::one_leg(&p, c(2.0, 0.0));
            let l = drift_lambda(BoundaryCondition::Dirichlet, 1.0, 0.5, &f, &p, ctl)?;
            let h = 1e-5;
            let z = |x: f64| one_leg_partition(BoundaryCondition::Dirichlet, 1.0, x, &f, ctl);
            let fd = p.kappa * (z(0.5 + h)?.ln() - z(0.5 - h)?.ln()) / (2.0 * h);
            Ok((l - fd).abs() / l.abs().max(1.0))
        }),
        check("closed form solves null-vector PDE", 1e-6, || {
            let f =
                |r: f64, x: f64| partition_closed_form(r, x, 2.0, ClosedFormTable::AnnulusEr, ctl);
            null_vector_residual(
                f,
                BoundaryCondition::Er,
                1.0,
                2.0,
                2.0,
                &FdSteps::default(),
                ctl,
            )
        }),
        check("residue proportional to closed form", 1e-8, || {
            let ratio = |x: f64| -> Result<f64> {
                Ok(
                    partition_residue(BoundaryCondition::Er, 1.0, x, 4.0 / 3.0, ctl)?
                        / partition_closed_form(
                            1.0,
                            x,
                            4.0 / 3.0,
                            ClosedFormTable::AnnulusEr,
                            ctl,
                        )?,
                )
            };
            Ok((ratio(1.0)? / ratio(4.0)? - 1.0).abs())
        }),
        check("degenerate ODE", 1e-6, || {
            degenerate_ode_residual(|x| z_infinity(x, 6.0), 2.0, 6.0, 1e-3)
        }),
        check("flow periodicity", 1e-9, || {
            let cfg = DriverConfig {
                kappa: 4.0,
                dt: 1e-3,
                rng_seed: 7,
                ..Default::default()
            };
            let z = c(0.5, 0.8);
            let mut s = LoewnerState::new(
                2.0,
                0.0,
                vec![("a".into(), z), ("b".into(), z + 2.0 * PI)],
                vec![],
                &cfg,
            )?;
            advance(&mut s, &cfg, 200)?;
            Ok((s.tracked[1].image - s.tracked[0].image - 2.0 * PI).norm())
        }),
        check("observable drift vanishes under neutrality", 1e-12, || {
            let p = SleParams::new(4.0)?;
            let f = ForceDivisor::one_leg(&p, c(PI, 0.0));
            Ok(observable_drift_coefficient(
                BoundaryCondition::Dirichlet,
                2.0,
                c(1.0, 1.0),
                &f,
                ctl,
            )?
            .norm())
        }),
    ]
}
