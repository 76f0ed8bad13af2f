use anyhow::{anyhow, bail, Context, Result};
use redlift_core::lifting::{
    interpolant, inverse_construction, omega_equivalence, omega_to_data_set, phi_coeffs,
    underlying_contraction, validate, verify_interpolant, LiftingDataSet,
};
use redlift_core::opcore::linalg;
use redlift_core::random::{
    dressed_data_set, random_coisometric_system, random_constant_parameter,
    random_contractive_system, random_isometric_omega_with_radius, random_omega,
    random_realized_parameter, random_strict_data_set, seeded, OmegaRegime,
};
use redlift_core::redheffer::{
    block_class, norm_bounds, redheffer_product, transform_eval, BlockOperator2,
    RedhefferQuadruple, SchurParameter,
};
use redlift_core::systems::unitary_equivalence;
use redlift_core::{LinearSystem, ToleranceConfig, C64};
use serde::Serialize;

use crate::instance::{
    expect_kind, read_instance, to_json, BlockJson, Instance, InstanceFile, Kind, MatrixJson, Meta,
};
use crate::suite::{ReportJson, Suite};

/// Result of a command: the text to write and whether every check passed.
pub struct Output {
    pub text: String,
    pub pass: bool,
}

impl Output {
    fn json<T: Serialize>(t: &T, pass: bool) -> Self {
        Self {
            text: to_json(t),
            pass,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct GenOptions {
    pub dims: Option<Vec<usize>>,
    pub isometric: bool,
    pub rho: Option<f64>,
    pub norm: Option<f64>,
    pub strict: bool,
    pub a_norm: f64,
    pub f_zero: bool,
    pub g_zero: bool,
    pub state: usize,
    pub from_omega: Option<String>,
}

fn dims_or(opts: &GenOptions, default: &[usize]) -> Result<Vec<usize>> {
    let d = opts.dims.clone().unwrap_or_else(|| default.to_vec());
    if d.len() != default.len() {
        bail!(redlift_core::Error::BadDims(format!(
            "expected {} dimensions, got {}",
            default.len(),
            d.len()
        )));
    }
    Ok(d)
}

fn gen_omega(
    rng: &mut redlift_core::random::InstanceRng,
    opts: &GenOptions,
) -> Result<redlift_core::lifting::UnderlyingContraction> {
    let d = dims_or(opts, &[2, 3, 2])?;
    let (t, a) = (d[0], d[1]);
    let f = if opts.f_zero {
        0
    } else if opts.g_zero {
        a
    } else {
        d[2]
    };
    if opts.f_zero && opts.g_zero && a > 0 {
        bail!(redlift_core::Error::BadDims(
            "F = {0} and G = {0} together need dim D_A = 0".into()
        ));
    }
    let w = if opts.isometric {
        match opts.rho {
            Some(rho) => random_isometric_omega_with_radius(rng, t, a, f, 0.0, rho)?,
            None => random_omega(rng, t, a, f, OmegaRegime::Isometric { state_norm: 0.5 })?,
        }
    } else {
        let norm = opts.norm.unwrap_or(0.9);
        random_omega(rng, t, a, f, OmegaRegime::Contraction { norm })?
    };
    Ok(w)
}

fn load_omega(path: &str, tol: &ToleranceConfig) -> Result<redlift_core::lifting::UnderlyingContraction> {
    match read_instance(path, tol)? {
        Instance::Omega(w) => Ok(w),
        Instance::DataSet(d) => Ok(underlying_contraction(&d, tol)?),
        other => Err(anyhow!("expected an omega or data_set instance, got {:?}", other.kind())),
    }
}

pub fn gen(kind: Kind, opts: &GenOptions, k: usize, seed: u64, tol: &ToleranceConfig) -> Result<Output> {
    let mut rng = seeded(seed);
    let inst = match kind {
        Kind::Omega => Instance::Omega(gen_omega(&mut rng, opts)?),
        Kind::DataSet => {
            if let Some(path) = &opts.from_omega {
                Instance::DataSet(omega_to_data_set(&load_omega(path, tol)?, k))
            } else if opts.strict {
                let d = dims_or(opts, &[2, 5, 2])?;
                let t_norm = opts.norm.unwrap_or(0.7);
                Instance::DataSet(random_strict_data_set(
                    &mut rng, d[0], d[1], d[2], opts.a_norm, t_norm, 0.05, k,
                )?)
            } else {
                let w = gen_omega(&mut rng, opts)?;
                Instance::DataSet(dressed_data_set(&mut rng, &w, k))
            }
        }
        Kind::Quadruple => {
            let w = match &opts.from_omega {
                Some(path) => load_omega(path, tol)?,
                None => gen_omega(&mut rng, opts)?,
            };
            Instance::Quadruple(phi_coeffs(&w, tol)?)
        }
        Kind::System => {
            let d = dims_or(opts, &[3, 3, 2])?;
            let sys = match opts.norm {
                Some(norm) => random_contractive_system(&mut rng, d[0], d[1], d[2], norm),
                None => {
                    if d[2] > d[0] + d[1] {
                        bail!(redlift_core::Error::BadDims(format!(
                            "a co-isometric system needs outputs <= state + inputs, got {} > {} + {}",
                            d[2], d[0], d[1]
                        )));
                    }
                    random_coisometric_system(&mut rng, d[0], d[1], d[2])
                }
            };
            Instance::System(sys)
        }
        Kind::SchurParam => {
            let d = dims_or(opts, &[1, 1])?;
            let norm = opts.norm.unwrap_or(0.5);
            if !(0.0..=1.0).contains(&norm) {
                bail!(redlift_core::Error::BadDims(format!("norm {} outside [0, 1]", norm)));
            }
            Instance::SchurParam(if opts.state == 0 {
                random_constant_parameter(&mut rng, d[0], d[1], norm)
            } else {
                random_realized_parameter(&mut rng, opts.state, d[0], d[1], norm)
            })
        }
    };
    let meta = Meta {
        generator: "chacha8".into(),
        seed,
        args: gen_args(kind, opts, k),
    };
    Ok(Output::json(&inst.to_file(Some(meta)), true))
}

fn gen_args(kind: Kind, opts: &GenOptions, k: usize) -> Vec<String> {
    let mut a = vec![format!("kind={}", kind_name(kind)), format!("K={}", k)];
    if let Some(d) = &opts.dims {
        let d: Vec<String> = d.iter().map(|x| x.to_string()).collect();
        a.push(format!("dims={}", d.join(",")));
    }
    if opts.isometric {
        a.push("isometric".into());
    }
    if let Some(r) = opts.rho {
        a.push(format!("rho={}", r));
    }
    if let Some(n) = opts.norm {
        a.push(format!("norm={}", n));
    }
    if opts.strict {
        a.push("strict".into());
        a.push(format!("a-norm={}", opts.a_norm));
    }
    if opts.f_zero {
        a.push("f-zero".into());
    }
    if opts.g_zero {
        a.push("g-zero".into());
    }
    if opts.state > 0 {
        a.push(format!("state={}", opts.state));
    }
    if let Some(p) = &opts.from_omega {
        a.push(format!("from-omega={}", p));
    }
    a
}

pub fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::DataSet => "data_set",
        Kind::Omega => "omega",
        Kind::Quadruple => "quadruple",
        Kind::System => "system",
        Kind::SchurParam => "schur_param",
    }
}

pub fn verify(path: &str, k: usize, seed: u64, tol: &ToleranceConfig) -> Result<Output> {
    let inst = read_instance(path, tol)?;
    let report = crate::suite::verify(&inst, k, seed, tol);
    let pass = report.pass();
    Ok(Output::json(&report, pass))
}

/// Coefficient quadruple of a quadruple, omega or data set file.
fn load_quadruple(path: &str, tol: &ToleranceConfig) -> Result<RedhefferQuadruple> {
    match read_instance(path, tol)? {
        Instance::Quadruple(q) => Ok(q),
        Instance::Omega(w) => Ok(phi_coeffs(&w, tol)?),
        Instance::DataSet(d) => Ok(phi_coeffs(&underlying_contraction(&d, tol)?, tol)?),
        other => Err(anyhow!(
            "expected a quadruple, omega or data_set instance, got {:?}",
            other.kind()
        )),
    }
}

fn load_param(path: Option<&str>, q: &RedhefferQuadruple, tol: &ToleranceConfig) -> Result<SchurParameter> {
    let d = q.dims();
    match path {
        None => Ok(SchurParameter::zero(d.param_in, d.param_out)),
        Some(p) => match expect_kind(read_instance(p, tol)?, &[Kind::SchurParam])? {
            Instance::SchurParam(v) => Ok(v),
            _ => unreachable!(),
        },
    }
}

pub struct SweepOptions {
    pub v0: Option<String>,
    pub t_max: f64,
    pub steps: usize,
}

pub fn sweep(path: &str, opts: &SweepOptions, k: usize, seed: u64, tol: &ToleranceConfig) -> Result<Output> {
    if !(0.0..1.0).contains(&opts.t_max) {
        bail!("t-max must lie in [0, 1), got {}", opts.t_max);
    }
    if opts.steps == 0 {
        bail!("steps must be positive");
    }
    let q = load_quadruple(path, tol)?;
    let d = q.dims();
    let v0 = match &opts.v0 {
        Some(_) => load_param(opts.v0.as_deref(), &q, tol)?,
        None => random_constant_parameter(&mut seeded(seed), d.param_in, d.param_out, 1.0),
    };
    let mut text = String::from("t,norm,bound2,bound3\n");
    for i in 0..=opts.steps {
        let t = opts.t_max * i as f64 / opts.steps as f64;
        let v = v0.scaled(t, tol)?;
        let nb = norm_bounds(&q, &v, k, tol).with_context(|| format!("at t = {}", t))?;
        let b3 = nb.bound3.map(|b| b.to_string()).unwrap_or_default();
        text.push_str(&format!("{},{},{},{}\n", t, nb.norm, nb.bound2, b3));
    }
    Ok(Output { text, pass: true })
}

#[derive(Serialize)]
struct InverseOut {
    data_set: InstanceFile,
    omega: InstanceFile,
    psi: MatrixJson,
    phi: MatrixJson,
    unitary_input: bool,
    phi_unitary: bool,
    report: ReportJson,
}

pub fn inverse(path: &str, split: Option<usize>, k: usize, seed: u64, tol: &ToleranceConfig) -> Result<Output> {
    let q = match read_instance(path, tol)? {
        Instance::Quadruple(q) => q,
        Instance::System(sys) => {
            let split = split.ok_or_else(|| anyhow!("a system file needs --split"))?;
            RedhefferQuadruple::new(sys, split, tol)?
        }
        other => bail!("expected a quadruple or system instance, got {:?}", other.kind()),
    };
    let inv = inverse_construction(&q, k, tol)?;
    let mut s = Suite::new(*tol);
    s.check("inverse:relation", inv.relation_residual, tol.check_tol);
    s.extend("data-set:", validate(&inv.data, tol));
    s.stage("data-set:omega", |s| {
        let w = underlying_contraction(&inv.data, tol)?;
        s.check("data-set:omega", w.distance(&inv.omega), tol.check_tol);
        Ok(())
    });
    let report = s.finish("quadruple", k, seed);
    let pass = report.pass();
    let out = InverseOut {
        data_set: Instance::DataSet(inv.data.clone()).to_file(None),
        omega: Instance::Omega(inv.omega.clone()).to_file(None),
        psi: (&inv.psi).into(),
        phi: (&inv.phi).into(),
        unitary_input: inv.unitary_input,
        phi_unitary: inv.phi_is_unitary(tol),
        report,
    };
    Ok(Output::json(&out, pass))
}

fn load_block(path: &str, tol: &ToleranceConfig) -> Result<BlockOperator2> {
    let sys = match read_instance(path, tol)? {
        Instance::System(s) => s,
        Instance::Quadruple(q) => q.realization().clone(),
        other => bail!("expected a system or quadruple instance, got {:?}", other.kind()),
    };
    Ok(system_block(&sys)?)
}

fn system_block(sys: &LinearSystem) -> redlift_core::Result<BlockOperator2> {
    BlockOperator2::new(
        sys.state_op().as_matrix().clone(),
        sys.input_op().as_matrix().clone(),
        sys.output_op().as_matrix().clone(),
        sys.feed_op().as_matrix().clone(),
    )
}

#[derive(Serialize)]
struct ProductOut {
    product: BlockJson,
    class: &'static str,
}

pub fn product(left: &str, right: &str, tol: &ToleranceConfig) -> Result<Output> {
    let m1 = load_block(left, tol)?;
    let m2 = load_block(right, tol)?;
    let p = redheffer_product(&m1, &m2)?;
    let class = block_class(&p, tol)?;
    Ok(Output::json(
        &ProductOut {
            product: (&p).into(),
            class: class.name(),
        },
        true,
    ))
}

#[derive(Serialize)]
struct EquivOut {
    equivalent: bool,
    theta: Option<MatrixJson>,
    residuals: Vec<(String, f64)>,
}

pub fn equiv(left: &str, right: &str, tol: &ToleranceConfig) -> Result<Output> {
    let a = read_instance(left, tol)?;
    let b = read_instance(right, tol)?;
    let out = match (a, b) {
        (Instance::Omega(w1), Instance::Omega(w2)) => match omega_equivalence(&w1, &w2, tol)? {
            Some(e) => EquivOut {
                equivalent: true,
                theta: Some((&e.theta).into()),
                residuals: vec![
                    ("reducing".into(), e.reducing_residual),
                    ("omega1".into(), e.omega1_residual),
                    ("omega2-theta".into(), e.theta_reading_residual),
                    ("omega2-adjoint".into(), e.adjoint_reading_residual),
                ],
            },
            None => EquivOut {
                equivalent: false,
                theta: None,
                residuals: Vec::new(),
            },
        },
        (Instance::System(s1), Instance::System(s2)) => match unitary_equivalence(&s1, &s2, tol)? {
            Some(theta) => {
                let conj = s1.conjugate_state(&theta)?;
                let residual = [
                    conj.state_op().distance(s2.state_op()),
                    conj.input_op().distance(s2.input_op()),
                    conj.output_op().distance(s2.output_op()),
                ]
                .into_iter()
                .fold(0.0, f64::max);
                EquivOut {
                    equivalent: true,
                    theta: Some((&theta).into()),
                    residuals: vec![("conjugation".into(), residual)],
                }
            }
            None => EquivOut {
                equivalent: false,
                theta: None,
                residuals: Vec::new(),
            },
        },
        (x, y) => bail!(
            "equiv compares two omega or two system instances, got {:?} and {:?}",
            x.kind(),
            y.kind()
        ),
    };
    let pass = out.equivalent;
    Ok(Output::json(&out, pass))
}

#[derive(Serialize)]
struct TransformOut {
    lambda: [f64; 2],
    value: MatrixJson,
    gamma_norm: Option<f64>,
}

pub fn transform(
    path: &str,
    param: Option<&str>,
    lambda: C64,
    k: usize,
    tol: &ToleranceConfig,
) -> Result<Output> {
    if lambda.norm() >= 1.0 {
        bail!("lambda must lie in the open unit disc, |lambda| = {}", lambda.norm());
    }
    let q = load_quadruple(path, tol)?;
    let v = load_param(param, &q, tol)?;
    let value = transform_eval(&q, &v, lambda)?;
    let gamma_norm = if v.open_ball() {
        Some(norm_bounds(&q, &v, k, tol)?.norm)
    } else {
        None
    };
    Ok(Output::json(
        &TransformOut {
            lambda: [lambda.re, lambda.im],
            value: (&value).into(),
            gamma_norm,
        },
        true,
    ))
}

#[derive(Serialize)]
struct InterpolantOut {
    matrix: MatrixJson,
    report: ReportJson,
}

pub fn interpolant_cmd(
    path: &str,
    param: Option<&str>,
    k: usize,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<Output> {
    let data: LiftingDataSet = match read_instance(path, tol)? {
        Instance::DataSet(d) => d.with_degree(k),
        Instance::Omega(w) => omega_to_data_set(&w, k),
        other => bail!("expected a data_set or omega instance, got {:?}", other.kind()),
    };
    let omega = underlying_contraction(&data, tol)?;
    let phi = phi_coeffs(&omega, tol)?;
    let v = load_param(param, &phi, tol)?;
    let b = interpolant(&data, &phi, &v, tol)?;
    let mut s = Suite::new(*tol);
    s.extend("", verify_interpolant(&b, &data, tol)?);
    s.check(
        "interpolant:norm",
        (linalg::norm(b.matrix().as_matrix()) - 1.0).max(0.0),
        tol.check_tol,
    );
    let report = s.finish("data_set", k, seed);
    let pass = report.pass();
    Ok(Output::json(
        &InterpolantOut {
            matrix: (&b.matrix()).into(),
            report,
        },
        pass,
    ))
}
