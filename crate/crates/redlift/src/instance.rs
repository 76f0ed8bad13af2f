//! JSON instance files.
//!
//! Complex numbers are `[re, im]` pairs and matrices are
//! `{"rows": r, "cols": c, "data": [[re, im], ...]}` in row-major order.

use std::fs;
use std::io::{self, Read, Write};

use anyhow::{anyhow, bail, Context, Result};
use redlift_core::lifting::{LiftingDataSet, UnderlyingContraction};
use redlift_core::redheffer::{BlockOperator2, RedhefferQuadruple, SchurKind, SchurParameter};
use redlift_core::{LinearSystem, OperatorMatrix, ToleranceConfig, C64};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&OperatorMatrix> for MatrixJson {
    fn from(m: &OperatorMatrix) -> Self {
        let a = m.as_matrix();
        let mut data = Vec::with_capacity(a.len());
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                let z = a[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        Self {
            rows: a.nrows(),
            cols: a.ncols(),
            data,
        }
    }
}

impl MatrixJson {
    pub fn from_mat(m: &redlift_core::opcore::linalg::Mat) -> Self {
        Self::from(&OperatorMatrix::from(m.clone()))
    }

    pub fn to_operator(&self) -> Result<OperatorMatrix> {
        if self.data.len() != self.rows * self.cols {
            bail!(
                "matrix declares {}x{} but holds {} entries",
                self.rows,
                self.cols,
                self.data.len()
            );
        }
        let entries: Vec<C64> = self.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
        let m = OperatorMatrix::from_complex(self.rows, self.cols, &entries);
        if !m.is_finite() {
            bail!("matrix has non-finite entries");
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    pub z: MatrixJson,
    pub b: MatrixJson,
    pub c: MatrixJson,
    pub d: MatrixJson,
}

impl From<&LinearSystem> for SystemJson {
    fn from(s: &LinearSystem) -> Self {
        Self {
            z: s.state_op().into(),
            b: s.input_op().into(),
            c: s.output_op().into(),
            d: s.feed_op().into(),
        }
    }
}

impl SystemJson {
    pub fn to_system(&self, tol: &ToleranceConfig) -> Result<LinearSystem> {
        Ok(LinearSystem::new(
            self.z.to_operator()?,
            self.b.to_operator()?,
            self.c.to_operator()?,
            self.d.to_operator()?,
            tol,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSetJson {
    pub a: MatrixJson,
    pub t_prime: MatrixJson,
    pub r: MatrixJson,
    pub q: MatrixJson,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaJson {
    pub omega1: MatrixJson,
    pub omega2: MatrixJson,
    pub f_embedding: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadrupleJson {
    pub system: SystemJson,
    pub split: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchurJson {
    Constant(MatrixJson),
    Realized(SystemJson),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockJson {
    pub top_left: MatrixJson,
    pub top_right: MatrixJson,
    pub bottom_left: MatrixJson,
    pub bottom_right: MatrixJson,
}

impl From<&BlockOperator2> for BlockJson {
    fn from(b: &BlockOperator2) -> Self {
        Self {
            top_left: MatrixJson::from_mat(&b.top_left),
            top_right: MatrixJson::from_mat(&b.top_right),
            bottom_left: MatrixJson::from_mat(&b.bottom_left),
            bottom_right: MatrixJson::from_mat(&b.bottom_right),
        }
    }
}

/// Generator settings recorded with a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub generator: String,
    pub seed: u64,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Kind {
    DataSet,
    Omega,
    Quadruple,
    System,
    SchurParam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub kind: Kind,
    pub payload: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

/// A parsed instance.
#[derive(Debug, Clone)]
pub enum Instance {
    DataSet(LiftingDataSet),
    Omega(UnderlyingContraction),
    Quadruple(RedhefferQuadruple),
    System(LinearSystem),
    SchurParam(SchurParameter),
}

impl Instance {
    pub fn kind(&self) -> Kind {
        match self {
            Instance::DataSet(_) => Kind::DataSet,
            Instance::Omega(_) => Kind::Omega,
            Instance::Quadruple(_) => Kind::Quadruple,
            Instance::System(_) => Kind::System,
            Instance::SchurParam(_) => Kind::SchurParam,
        }
    }

    pub fn to_file(&self, meta: Option<Meta>) -> InstanceFile {
        let payload = match self {
            Instance::DataSet(d) => to_value(&DataSetJson {
                a: (&d.a).into(),
                t_prime: (&d.t_prime).into(),
                r: (&d.r).into(),
                q: (&d.q).into(),
                degree: d.degree,
            }),
            Instance::Omega(w) => to_value(&OmegaJson {
                omega1: (&w.omega1).into(),
                omega2: (&w.omega2).into(),
                f_embedding: (&w.f_embedding).into(),
            }),
            Instance::Quadruple(q) => to_value(&QuadrupleJson {
                system: q.realization().into(),
                split: q.split(),
            }),
            Instance::System(s) => to_value(&SystemJson::from(s)),
            Instance::SchurParam(v) => to_value(&match v.kind() {
                SchurKind::Constant(m) => SchurJson::Constant(m.into()),
                SchurKind::Realized(s) => SchurJson::Realized(s.into()),
            }),
        };
        InstanceFile {
            kind: self.kind(),
            payload,
            meta,
        }
    }

    pub fn from_file(file: &InstanceFile, tol: &ToleranceConfig) -> Result<Self> {
        let p = file.payload.clone();
        Ok(match file.kind {
            Kind::DataSet => {
                let d: DataSetJson = from_value(p)?;
                Instance::DataSet(LiftingDataSet::new(
                    d.a.to_operator()?,
                    d.t_prime.to_operator()?,
                    d.r.to_operator()?,
                    d.q.to_operator()?,
                    d.degree,
                )?)
            }
            Kind::Omega => {
                let w: OmegaJson = from_value(p)?;
                Instance::Omega(UnderlyingContraction::new(
                    w.omega1.to_operator()?,
                    w.omega2.to_operator()?,
                    w.f_embedding.to_operator()?,
                    tol,
                )?)
            }
            Kind::Quadruple => {
                let q: QuadrupleJson = from_value(p)?;
                Instance::Quadruple(RedhefferQuadruple::new(q.system.to_system(tol)?, q.split, tol)?)
            }
            Kind::System => {
                let s: SystemJson = from_value(p)?;
                Instance::System(s.to_system(tol)?)
            }
            Kind::SchurParam => {
                let v: SchurJson = from_value(p)?;
                Instance::SchurParam(match v {
                    SchurJson::Constant(m) => SchurParameter::constant(m.to_operator()?, tol)?,
                    SchurJson::Realized(s) => SchurParameter::realized(s.to_system(tol)?, tol)?,
                })
            }
        })
    }
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("instance payloads serialize")
}

fn from_value<T: for<'de> Deserialize<'de>>(v: Value) -> Result<T> {
    serde_json::from_value(v).context("malformed payload")
}

/// Reads a file, or stdin for `-`.
pub fn read_text(path: &str) -> Result<String> {
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path))
    }
}

pub fn read_instance(path: &str, tol: &ToleranceConfig) -> Result<Instance> {
    let text = read_text(path)?;
    let file: InstanceFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path))?;
    Instance::from_file(&file, tol).with_context(|| format!("loading {}", path))
}

/// Writes `text` to a file, or stdout for `-`. Files are written through a
/// temporary sibling and renamed into place.
pub fn write_text(path: &str, text: &str) -> Result<()> {
    if path == "-" {
        let mut out = io::stdout().lock();
        out.write_all(text.as_bytes())?;
        out.flush()?;
        return Ok(());
    }
    let tmp = format!("{}.tmp", path);
    fs::write(&tmp, text).with_context(|| format!("writing {}", tmp))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp, path))?;
    Ok(())
}

pub fn to_json<T: Serialize>(t: &T) -> String {
    let mut s = serde_json::to_string_pretty(t).expect("output serializes");
    s.push('\n');
    s
}

pub fn expect_kind(inst: Instance, kinds: &[Kind]) -> Result<Instance> {
    if kinds.contains(&inst.kind()) {
        Ok(inst)
    } else {
        Err(anyhow!(
            "expected an instance of kind {:?}, got {:?}",
            kinds,
            inst.kind()
        ))
    }
}
