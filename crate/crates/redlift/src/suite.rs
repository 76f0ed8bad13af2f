//! Verification suites behind `redlift verify`.

use redlift_core::lifting::{
    inverse_construction, omega_to_data_set, phi_coeffs, underlying_contraction, validate,
    verify_interpolant, interpolant, LiftingDataSet, UnderlyingContraction,
};
use redlift_core::opcore::linalg;
use redlift_core::random::{random_open_ball_parameters, random_unit_vector, seeded};
use redlift_core::redheffer::{
    bounds_check, coefficient_matrix, k_v, k_v_cross_check, kernel_inclusion_check,
    max_principle_suite, RedhefferQuadruple, SchurKind, SchurParameter,
};
use redlift_core::systems::{observable_reduction, taylor_distance};
use redlift_core::{Check, CheckReport, LinearSystem, ToleranceConfig, C64};
use serde::Serialize;

use crate::instance::Instance;

/// Slack allowed below the norm bounds.
const BOUND_SLACK: f64 = 1e-10;
/// Tolerance for the kernel inclusion residual.
const INCLUSION_TOL: f64 = 1e-8;
/// Number of random open-ball parameters besides `V = 0`.
const SAMPLES: usize = 4;

#[derive(Debug, Clone, Serialize)]
pub struct CheckJson {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportJson {
    pub kind: String,
    pub degree: usize,
    pub seed: u64,
    pub checks: Vec<CheckJson>,
    pub notes: Vec<String>,
    pub summary: &'static str,
}

impl ReportJson {
    pub fn pass(&self) -> bool {
        self.summary == "pass"
    }
}

/// Collects checks and notes; a failed stage becomes a failing flag.
pub struct Suite {
    report: CheckReport,
    notes: Vec<String>,
    tol: ToleranceConfig,
}

impl Suite {
    pub fn new(tol: ToleranceConfig) -> Self {
        Self {
            report: CheckReport::new(),
            notes: Vec::new(),
            tol,
        }
    }

    pub fn check(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        self.report.push(Check::new(name, residual, tolerance));
    }

    pub fn flag(&mut self, name: impl Into<String>, ok: bool) {
        self.report.push(Check::flag(name, ok));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn extend(&mut self, prefix: &str, other: CheckReport) {
        for mut c in other.checks {
            c.name = format!("{}{}", prefix, c.name);
            self.report.push(c);
        }
    }

    /// Runs a stage; an error is recorded as the failing flag `stage:<name>`.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> redlift_core::Result<T>) -> Option<T> {
        match f(self) {
            Ok(t) => Some(t),
            Err(e) => {
                self.flag(format!("stage:{}", name), false);
                self.note(format!("{}: {}", name, e));
                None
            }
        }
    }

    pub fn finish(self, kind: &str, degree: usize, seed: u64) -> ReportJson {
        let pass = self.report.pass();
        ReportJson {
            kind: kind.to_string(),
            degree,
            seed,
            checks: self
                .report
                .checks
                .into_iter()
                .map(|c| CheckJson {
                    name: c.name,
                    residual: c.residual,
                    tolerance: c.tolerance,
                    pass: c.pass,
                })
                .collect(),
            notes: self.notes,
            summary: if pass { "pass" } else { "fail" },
        }
    }
}

pub fn verify(inst: &Instance, k: usize, seed: u64, tol: &ToleranceConfig) -> ReportJson {
    let mut s = Suite::new(*tol);
    let kind = match inst {
        Instance::DataSet(d) => {
            data_set_suite(&mut s, &d.with_degree(k), k, seed);
            "data_set"
        }
        Instance::Omega(w) => {
            data_set_suite(&mut s, &omega_to_data_set(w, k), k, seed);
            "omega"
        }
        Instance::Quadruple(q) => {
            quadruple_suite(&mut s, q, k, seed, None);
            "quadruple"
        }
        Instance::System(sys) => {
            system_suite(&mut s, sys, k);
            "system"
        }
        Instance::SchurParam(v) => {
            schur_suite(&mut s, v, k);
            "schur_param"
        }
    };
    s.finish(kind, k, seed)
}

fn data_set_suite(s: &mut Suite, data: &LiftingDataSet, k: usize, seed: u64) {
    let tol = s.tol;
    s.extend("", validate(data, &tol));
    let Some(omega) = s.stage("underlying-contraction", |_| underlying_contraction(data, &tol)) else {
        return;
    };
    s.check("omega:contraction", (omega.stacked().norm() - 1.0).max(0.0), tol.check_tol);
    s.stage("omega:round-trip", |s| {
        let back = underlying_contraction(&omega_to_data_set(&omega, k), &tol)?;
        s.check("omega:round-trip", back.distance(&omega), tol.check_tol);
        Ok(())
    });
    let Some(phi) = s.stage("coefficients", |_| phi_coeffs(&omega, &tol)) else {
        return;
    };
    let params = parameters(&phi, seed);
    s.stage("interpolants", |s| {
        for (i, v) in params.iter().enumerate() {
            let b = interpolant(data, &phi, v, &tol)?;
            s.extend(&format!("v{}:", i), verify_interpolant(&b, data, &tol)?);
        }
        Ok(())
    });
    quadruple_suite(s, &phi, k, seed, Some(&omega));
}

fn parameters(q: &RedhefferQuadruple, seed: u64) -> Vec<SchurParameter> {
    let d = q.dims();
    let mut rng = seeded(seed);
    let mut out = vec![SchurParameter::zero(d.param_in, d.param_out)];
    out.extend(random_open_ball_parameters(&mut rng, d.param_in, d.param_out, SAMPLES, 0.9));
    out
}

fn quadruple_suite(
    s: &mut Suite,
    q: &RedhefferQuadruple,
    k: usize,
    seed: u64,
    omega: Option<&UnderlyingContraction>,
) {
    let tol = s.tol;
    let sysmat = q.realization().system_matrix();
    let coisometric = linalg::coisometry_defect(sysmat.as_matrix()) <= tol.check_tol;
    let k0 = coefficient_matrix(q, k);
    let assembled = k0.assemble();
    s.check("coefficients:contraction", (assembled.norm() - 1.0).max(0.0), tol.check_tol);
    if coisometric {
        s.check(
            "coefficients:coisometry",
            linalg::coisometry_defect(assembled.as_matrix()),
            tol.check_tol,
        );
    } else {
        s.note("realization is not co-isometric: co-isometry and inverse checks skipped");
    }
    s.check("coefficients:isometry-defect", k0.isometry_defect(), 1.0 + tol.check_tol);

    let params = parameters(q, seed);
    let mut rng = seeded(seed ^ 0x5eed);
    let d = q.dims();
    s.stage("rotated-matrices", |s| {
        for (i, v) in params.iter().enumerate() {
            s.check(format!("v{}:kv-cross-check", i), k_v_cross_check(q, v, k, &tol)?, tol.check_tol);
            let kv = k_v(q, v, k, &tol)?.assemble();
            s.check(format!("v{}:kv-contraction", i), (kv.norm() - 1.0).max(0.0), tol.check_tol);
            if coisometric {
                s.check(
                    format!("v{}:kv-coisometry", i),
                    linalg::coisometry_defect(kv.as_matrix()),
                    tol.check_tol,
                );
            }
        }
        Ok(())
    });
    s.stage("bounds", |s| {
        for (i, v) in params.iter().enumerate() {
            let u = random_unit_vector(&mut rng, d.state);
            let rep = bounds_check(q, v, &u, k, &tol)?;
            s.check(format!("v{}:bounds", i), (-rep.min_slack()).max(0.0), BOUND_SLACK);
            s.check(format!("v{}:bounds-order", i), (rep.rhs1 - rep.rhs2).max(0.0), BOUND_SLACK);
        }
        Ok(())
    });
    s.stage("kernel-inclusion", |s| {
        let mut worst: f64 = 0.0;
        for v in &params {
            for other in &params {
                worst = worst.max(kernel_inclusion_check(q, v, other, k, &tol)?.inclusion_residual);
            }
        }
        s.check("kernel-inclusion", worst, INCLUSION_TOL);
        Ok(())
    });
    s.stage("max-principle", |s| {
        let rep = max_principle_suite(q, &params, k, &tol)?;
        s.flag("max-principle:dichotomy", rep.dichotomy_holds());
        s.note(format!("max-principle verdict: {:?}", rep.verdict));
        Ok(())
    });
    if coisometric {
        s.stage("inverse", |s| {
            let inv = inverse_construction(q, k, &tol)?;
            s.check("inverse:relation", inv.relation_residual, tol.check_tol);
            if let Some(w) = omega {
                s.check("inverse:omega", inv.omega.distance(w), tol.check_tol);
            }
            Ok(())
        });
    }
}

fn system_suite(s: &mut Suite, sys: &LinearSystem, k: usize) {
    let tol = s.tol;
    let sysmat = sys.system_matrix();
    s.check("system:contraction", (sysmat.norm() - 1.0).max(0.0), tol.check_tol);
    s.stage("system:taylor", |s| {
        let lambda = C64::new(0.3, 0.2);
        let (f, _) = sys.taylor(k);
        let mut partial = linalg::zeros(sys.output_dim(), sys.input_dim());
        let mut power = C64::new(1.0, 0.0);
        for c in &f {
            partial += c * power;
            power *= lambda;
        }
        let value = sys.transfer_eval(lambda)?;
        let r = lambda.norm();
        let bound = r.powi(k as i32 + 1) / (1.0 - r);
        s.check("system:taylor-tail", linalg::norm(&(value.as_matrix() - partial)), bound + tol.check_tol);
        Ok(())
    });
    if linalg::coisometry_defect(sysmat.as_matrix()) <= tol.check_tol {
        s.check("system:truncation-coisometry", sys.coisometry_defect(k), tol.check_tol);
        s.stage("system:observable-reduction", |s| {
            let red = observable_reduction(sys, &tol)?;
            s.check(
                "system:reduction-coisometry",
                linalg::coisometry_defect(red.system_matrix().as_matrix()),
                tol.check_tol,
            );
            s.check(
                "system:reduction-taylor",
                taylor_distance(&red, sys, 2 * sys.state_dim().max(1)),
                tol.check_tol,
            );
            s.note(format!("observable state dimension {} of {}", red.state_dim(), sys.state_dim()));
            Ok(())
        });
    } else {
        s.note("system matrix is not co-isometric: reduction checks skipped");
    }
}

fn schur_suite(s: &mut Suite, v: &SchurParameter, k: usize) {
    let tol = s.tol;
    match v.kind() {
        SchurKind::Constant(m) => {
            s.check("schur:contraction", (m.norm() - 1.0).max(0.0), tol.check_tol);
        }
        SchurKind::Realized(sys) => system_suite(s, sys, k),
    }
    s.check(
        "schur:truncated-contraction",
        (linalg::norm(v.multiplication(k).as_matrix()) - 1.0).max(0.0),
        tol.check_tol,
    );
    s.note(format!("open ball: {}", v.open_ball()));
}
