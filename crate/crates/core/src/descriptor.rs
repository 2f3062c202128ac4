//! JSON documents. Every document carries a `"kind"` discriminator and
//! optional `"degree_bound"` (default 6) and `"field"` (`"rational"` by
//! default, or `"gaussian"`). Polynomials are strings in the polynomial
//! grammar; scalars are integers or strings such as `"-3/2"`.
//!
//! Validation errors name the offending field with a path such as
//! `ops[1].matrix[0][2]`.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::actions::{AlgebroidAction, LieAlgebraAction};
use crate::algebroid::{LieAlgebroid, StructureTable};
use crate::bundle::{Connection, DerivativeOp, LinearVectorField, TrivialBundle};
use crate::error::{Error, Result};
use crate::geometry::{AffineMap, Chart, FiberedChart, VectorField};
use crate::global::{
    BundleAutomorphism, DualAutomorphismFamily, FPGroup, FiberedMap, GroupoidActionModel, GroupoidRepModel,
    SemiLinearIso,
};
use crate::pseudolinear::AffDiffOperator;
use crate::ring::{Field, MatrixPoly, Poly, Scalar, ScalarMatrix};

pub const DEFAULT_DEGREE_BOUND: u32 = crate::ring::DEFAULT_DEGREE_BOUND;

/// Document-level configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    pub degree_bound: u32,
    pub field: Field,
}

impl Default for Config {
    fn default() -> Self {
        Config { degree_bound: DEFAULT_DEGREE_BOUND, field: Field::Rational }
    }
}

/// A parsed document: its kind, configuration and body.
#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub kind: String,
    pub config: Config,
    pub body: Value,
}

pub fn parse_field(s: &str) -> Result<Field> {
    match s {
        "rational" => Ok(Field::Rational),
        "gaussian" => Ok(Field::Gaussian),
        other => Err(Error::descriptor("field", format!("expected \"rational\" or \"gaussian\", got \"{other}\""))),
    }
}

pub fn field_name(f: Field) -> &'static str {
    match f {
        Field::Rational => "rational",
        Field::Gaussian => "gaussian",
    }
}

impl Document {
    pub fn parse(text: &str) -> Result<Document> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::descriptor("document", format!("not valid JSON: {e}")))?;
        let Value::Object(mut map) = value else {
            return Err(Error::descriptor("document", "expected a JSON object"));
        };
        let kind = match map.remove("kind") {
            Some(Value::String(s)) => s,
            Some(_) => return Err(Error::descriptor("kind", "expected a string")),
            None => return Err(Error::descriptor("kind", "missing")),
        };
        let mut config = Config::default();
        if let Some(v) = map.remove("degree_bound") {
            config.degree_bound = v
                .as_u64()
                .and_then(|n| u32::try_from(n).ok())
                .ok_or_else(|| Error::descriptor("degree_bound", "expected a non-negative integer"))?;
        }
        if let Some(v) = map.remove("field") {
            config.field = parse_field(v.as_str().ok_or_else(|| Error::descriptor("field", "expected a string"))?)?;
        }
        Ok(Document { kind, config, body: Value::Object(map) })
    }

    pub fn new(kind: &str, config: Config, body: impl Serialize) -> Document {
        let body = serde_json::to_value(body).expect("descriptors serialize");
        Document { kind: kind.into(), config, body }
    }

    pub fn body<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.body.clone()).map_err(|e| Error::descriptor(self.kind.clone(), e.to_string()))
    }

    pub fn to_json(&self) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("kind".into(), Value::String(self.kind.clone()));
        if self.config.degree_bound != DEFAULT_DEGREE_BOUND {
            map.insert("degree_bound".into(), self.config.degree_bound.into());
        }
        if self.config.field != Field::Rational {
            map.insert("field".into(), field_name(self.config.field).into());
        }
        if let Value::Object(body) = &self.body {
            map.extend(body.clone());
        }
        Value::Object(map)
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("values serialize") + "\n"
    }
}

/// A scalar given as a JSON integer or a string like `"2/3"` or `"1 + 2*i"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarDesc {
    Int(i64),
    Text(String),
}

impl ScalarDesc {
    pub fn to_scalar(&self, field: Field, path: &str) -> Result<Scalar> {
        match self {
            ScalarDesc::Int(n) => Ok(Scalar::from_int(*n)),
            ScalarDesc::Text(s) => {
                let p = Chart::point(field).parse(s).map_err(|e| Error::descriptor(path, e.to_string()))?;
                p.as_constant().ok_or_else(|| Error::descriptor(path, "expected a constant"))
            }
        }
    }

    pub fn from_scalar(s: &Scalar) -> ScalarDesc {
        let text = Chart::point(s.field()).print(&Poly::constant(0, s.clone()));
        match text.parse::<i64>() {
            Ok(n) => ScalarDesc::Int(n),
            Err(_) => ScalarDesc::Text(text),
        }
    }
}

fn poly(chart: &Chart, s: &str, path: &str) -> Result<Poly> {
    chart.parse(s).map_err(|e| Error::descriptor(path, e.to_string()))
}

fn polys(chart: &Chart, v: &[String], path: &str) -> Result<Vec<Poly>> {
    v.iter().enumerate().map(|(i, s)| poly(chart, s, &format!("{path}[{i}]"))).collect()
}

fn square(chart: &Chart, rows: &[Vec<String>], k: usize, path: &str) -> Result<MatrixPoly> {
    if rows.len() != k || rows.iter().any(|r| r.len() != k) {
        return Err(Error::descriptor(path, format!("expected a {k}x{k} matrix")));
    }
    let rows =
        rows.iter().enumerate().map(|(i, r)| polys(chart, r, &format!("{path}[{i}]"))).collect::<Result<Vec<_>>>()?;
    MatrixPoly::from_rows(rows, chart.dim())
}

fn scalars(v: &[ScalarDesc], field: Field, path: &str) -> Result<Vec<Scalar>> {
    v.iter().enumerate().map(|(i, s)| s.to_scalar(field, &format!("{path}[{i}]"))).collect()
}

fn scalar_matrix(rows: &[Vec<ScalarDesc>], n: usize, field: Field, path: &str) -> Result<ScalarMatrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::descriptor(path, format!("expected a {n}x{n} matrix")));
    }
    rows.iter().enumerate().map(|(i, r)| scalars(r, field, &format!("{path}[{i}]"))).collect()
}

fn print_polys(chart: &Chart, v: &[Poly]) -> Vec<String> {
    v.iter().map(|p| chart.print(p)).collect()
}

fn print_matrix(chart: &Chart, m: &MatrixPoly) -> Vec<Vec<String>> {
    m.row_vecs().iter().map(|r| print_polys(chart, r)).collect()
}

fn field_of(explicit: &Option<String>, cfg: &Config) -> Result<Field> {
    explicit.as_deref().map_or(Ok(cfg.field), parse_field)
}

pub fn make_chart(dim: usize, variables: &Option<Vec<String>>, prefix: &str, field: Field) -> Result<Chart> {
    match variables {
        None => Ok(Chart::standard(prefix, dim, field)),
        Some(v) if v.len() == dim => {
            Chart::new(v.clone(), field).map_err(|e| Error::descriptor("variables", e.to_string()))
        }
        Some(v) => Err(Error::descriptor("variables", format!("{} names for dimension {dim}", v.len()))),
    }
}

// ---- bundles and operators ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleDesc {
    pub base_dim: usize,
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variables: Option<Vec<String>>,
}

impl BundleDesc {
    pub fn build(&self, cfg: &Config) -> Result<TrivialBundle> {
        let chart = make_chart(self.base_dim, &self.variables, "x", field_of(&self.field, cfg)?)?;
        TrivialBundle::new(&chart, self.rank).map_err(|e| Error::descriptor("rank", e.to_string()))
    }

    pub fn from_bundle(e: &TrivialBundle) -> BundleDesc {
        let chart = e.base();
        let standard = Chart::standard("x", chart.dim(), chart.field());
        BundleDesc {
            base_dim: e.base_dim(),
            rank: e.rank(),
            field: (chart.field() != Field::Rational).then(|| field_name(chart.field()).into()),
            variables: (standard.names() != chart.names()).then(|| chart.names().to_vec()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpDesc {
    pub anchor: Vec<String>,
    pub matrix: Vec<Vec<String>>,
}

impl OpDesc {
    pub fn build(&self, bundle: &TrivialBundle, path: &str) -> Result<DerivativeOp> {
        let chart = bundle.base();
        if self.anchor.len() != chart.dim() {
            return Err(Error::descriptor(format!("{path}.anchor"), format!("expected {} components", chart.dim())));
        }
        let anchor = VectorField::new(chart, polys(chart, &self.anchor, &format!("{path}.anchor"))?)?;
        let m = square(chart, &self.matrix, bundle.rank(), &format!("{path}.matrix"))?;
        DerivativeOp::new(bundle, anchor, m)
    }

    pub fn from_op(d: &DerivativeOp) -> OpDesc {
        let chart = d.bundle().base();
        OpDesc { anchor: print_polys(chart, d.anchor().components()), matrix: print_matrix(chart, d.matrix()) }
    }
}

fn build_ops(bundle: &TrivialBundle, ops: &[OpDesc]) -> Result<Vec<DerivativeOp>> {
    ops.iter().enumerate().map(|(i, o)| o.build(bundle, &format!("ops[{i}]"))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivativeOpDesc {
    pub bundle: BundleDesc,
    #[serde(flatten)]
    pub op: OpDesc,
}

impl DerivativeOpDesc {
    pub fn build(&self, cfg: &Config) -> Result<DerivativeOp> {
        self.op.build(&self.bundle.build(cfg)?, "op")
    }

    pub fn from_op(d: &DerivativeOp) -> Self {
        DerivativeOpDesc { bundle: BundleDesc::from_bundle(d.bundle()), op: OpDesc::from_op(d) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearFieldDesc {
    pub bundle: BundleDesc,
    pub base_field: Vec<String>,
    pub matrix: Vec<Vec<String>>,
}

impl LinearFieldDesc {
    pub fn build(&self, cfg: &Config) -> Result<LinearVectorField> {
        let e = self.bundle.build(cfg)?;
        let chart = e.base();
        if self.base_field.len() != chart.dim() {
            return Err(Error::descriptor("base_field", format!("expected {} components", chart.dim())));
        }
        let x = VectorField::new(chart, polys(chart, &self.base_field, "base_field")?)?;
        LinearVectorField::new(&e, x, square(chart, &self.matrix, e.rank(), "matrix")?)
    }

    pub fn from_field(l: &LinearVectorField) -> Self {
        let chart = l.bundle().base();
        LinearFieldDesc {
            bundle: BundleDesc::from_bundle(l.bundle()),
            base_field: print_polys(chart, l.base_field().components()),
            matrix: print_matrix(chart, l.matrix()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionDesc {
    pub bundle: BundleDesc,
    pub gamma: Vec<Vec<Vec<String>>>,
}

impl ConnectionDesc {
    pub fn build(&self, cfg: &Config) -> Result<Connection> {
        let e = self.bundle.build(cfg)?;
        if self.gamma.len() != e.base_dim() {
            return Err(Error::descriptor("gamma", format!("expected {} matrices", e.base_dim())));
        }
        let gamma = self
            .gamma
            .iter()
            .enumerate()
            .map(|(i, m)| square(e.base(), m, e.rank(), &format!("gamma[{i}]")))
            .collect::<Result<_>>()?;
        Connection::new(&e, gamma)
    }
}

// ---- algebroids and actions ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebroidDesc {
    pub base_dim: usize,
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variables: Option<Vec<String>>,
    /// One list of `base_dim` components per frame element; omitted means
    /// zero anchor.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub anchor: Vec<Vec<String>>,
    /// `"(a,b,g)" -> c^g_ab`, one-based; omitted entries are zero.
    #[serde(default)]
    pub structure: BTreeMap<String, String>,
}

fn parse_index_triple(key: &str, rank: usize) -> Result<(usize, usize, usize)> {
    let path = format!("structure.{key}");
    let inner = key
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::descriptor(&path, "expected a key of the form \"(a,b,g)\""))?;
    let idx: Vec<usize> = inner
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::descriptor(&path, "indices must be positive integers"))?;
    match idx.as_slice() {
        &[a, b, g] if (1..=rank).contains(&a) && (1..=rank).contains(&b) && (1..=rank).contains(&g) => {
            Ok((a - 1, b - 1, g - 1))
        }
        _ => Err(Error::descriptor(&path, format!("expected three indices in 1..={rank}"))),
    }
}

impl AlgebroidDesc {
    pub fn chart(&self, field: Field) -> Result<Chart> {
        make_chart(self.base_dim, &self.variables, "x", field)
    }

    pub fn build(&self, cfg: &Config) -> Result<LieAlgebroid> {
        let chart = self.chart(cfg.field)?;
        let anchor = if self.anchor.is_empty() {
            vec![VectorField::zero(&chart); self.rank]
        } else {
            if self.anchor.len() != self.rank {
                return Err(Error::descriptor("anchor", format!("expected {} fields", self.rank)));
            }
            self.anchor
                .iter()
                .enumerate()
                .map(|(a, comps)| {
                    let path = format!("anchor[{a}]");
                    if comps.len() != chart.dim() {
                        return Err(Error::descriptor(&path, format!("expected {} components", chart.dim())));
                    }
                    VectorField::new(&chart, polys(&chart, comps, &path)?)
                })
                .collect::<Result<_>>()?
        };
        let mut table = StructureTable::new();
        for (key, value) in &self.structure {
            let idx = parse_index_triple(key, self.rank)?;
            table.insert(idx, poly(&chart, value, &format!("structure.{key}"))?);
        }
        LieAlgebroid::new(&chart, anchor, &table).map_err(|e| match e {
            Error::Descriptor { .. } => e,
            other => Error::descriptor("structure", other.to_string()),
        })
    }

    pub fn from_algebroid(a: &LieAlgebroid) -> Self {
        let chart = a.base();
        let standard = Chart::standard("x", chart.dim(), chart.field());
        let anchor = if a.anchor_frame().iter().all(VectorField::is_zero) {
            Vec::new()
        } else {
            a.anchor_frame().iter().map(|x| print_polys(chart, x.components())).collect()
        };
        let structure = a
            .structure_table()
            .into_iter()
            .map(|((x, y, g), p)| (format!("({},{},{})", x + 1, y + 1, g + 1), chart.print(&p)))
            .collect();
        AlgebroidDesc {
            base_dim: chart.dim(),
            rank: a.rank(),
            variables: (standard.names() != chart.names()).then(|| chart.names().to_vec()),
            anchor,
            structure,
        }
    }
}

/// An action of an algebroid on `F = M x N`. With `base_dim = 0` the
/// algebroid is a Lie algebra and the fields live on `N` itself, with
/// coordinates `x1..xm` by default; otherwise fiber coordinates default to
/// `y1..ym` and fields are over `(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionDesc {
    pub algebroid: AlgebroidDesc,
    pub fiber_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_variables: Option<Vec<String>>,
    pub lifted: Vec<Vec<String>>,
}

/// A built action: of a Lie algebra on a chart, or of an algebroid on a
/// fibered chart.
#[derive(Clone, Debug, PartialEq)]
pub enum ActionModel {
    Algebra(LieAlgebraAction),
    Algebroid(AlgebroidAction),
}

impl ActionModel {
    pub fn check(&self) -> crate::report::Report {
        match self {
            ActionModel::Algebra(a) => a.check(),
            ActionModel::Algebroid(a) => a.check(),
        }
    }

    pub fn action_algebroid(&self) -> Result<LieAlgebroid> {
        match self {
            ActionModel::Algebra(a) => crate::actions::action_algebroid_algebra(a),
            ActionModel::Algebroid(a) => crate::actions::action_algebroid_fibered(a),
        }
    }

    /// The chart carrying representations of the action algebroid.
    pub fn total_chart(&self) -> &Chart {
        match self {
            ActionModel::Algebra(a) => a.chart(),
            ActionModel::Algebroid(a) => a.fibered().total(),
        }
    }
}

impl ActionDesc {
    pub fn build(&self, cfg: &Config) -> Result<ActionModel> {
        let algebroid = self.algebroid.build(cfg)?;
        let prefix = if self.algebroid.base_dim == 0 { "x" } else { "y" };
        let fiber = make_chart(self.fiber_dim, &self.fiber_variables, prefix, cfg.field)?;
        if self.lifted.len() != algebroid.rank() {
            return Err(Error::descriptor("lifted", format!("expected {} fields", algebroid.rank())));
        }
        let fibered = FiberedChart::new(algebroid.base(), &fiber)
            .map_err(|e| Error::descriptor("fiber_variables", e.to_string()))?;
        let total = fibered.total();
        let fields = self
            .lifted
            .iter()
            .enumerate()
            .map(|(a, comps)| {
                let path = format!("lifted[{a}]");
                if comps.len() != total.dim() {
                    return Err(Error::descriptor(&path, format!("expected {} components", total.dim())));
                }
                VectorField::new(total, polys(total, comps, &path)?)
            })
            .collect::<Result<Vec<_>>>()?;
        if self.algebroid.base_dim == 0 {
            for (a, p) in self.algebroid.structure.iter() {
                if !poly(algebroid.base(), p, a)?.is_constant() {
                    return Err(Error::descriptor(format!("structure.{a}"), "Lie algebra constants must be constant"));
                }
            }
            Ok(ActionModel::Algebra(LieAlgebraAction::new(&algebroid, total, fields)?))
        } else {
            Ok(ActionModel::Algebroid(AlgebroidAction::new(&algebroid, &fibered, fields)?))
        }
    }

    pub fn from_algebra_action(a: &LieAlgebraAction) -> Self {
        let chart = a.chart();
        let standard = Chart::standard("x", chart.dim(), chart.field());
        ActionDesc {
            algebroid: AlgebroidDesc::from_algebroid(a.algebra()),
            fiber_dim: chart.dim(),
            fiber_variables: (standard.names() != chart.names()).then(|| chart.names().to_vec()),
            lifted: a.fundamental().iter().map(|x| print_polys(chart, x.components())).collect(),
        }
    }

    pub fn from_algebroid_action(a: &AlgebroidAction) -> Self {
        let f = a.fibered();
        let standard = Chart::standard("y", f.fiber().dim(), f.fiber().field());
        ActionDesc {
            algebroid: AlgebroidDesc::from_algebroid(a.algebroid()),
            fiber_dim: f.fiber().dim(),
            fiber_variables: (standard.names() != f.fiber().names()).then(|| f.fiber().names().to_vec()),
            lifted: a.lifted().iter().map(|x| print_polys(f.total(), x.components())).collect(),
        }
    }

    pub fn from_model(m: &ActionModel) -> Self {
        match m {
            ActionModel::Algebra(a) => ActionDesc::from_algebra_action(a),
            ActionModel::Algebroid(a) => ActionDesc::from_algebroid_action(a),
        }
    }
}

/// Derivative representation of an action: one operator per frame
/// element, on a bundle of the given rank over the acted-on chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrepDesc {
    pub action: ActionDesc,
    pub rank: usize,
    pub ops: Vec<OpDesc>,
}

/// Representation of an algebroid, either given directly or as the action
/// algebroid of an action (which enables the inverse transforms).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepDesc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebroid: Option<AlgebroidDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionDesc>,
    pub rank: usize,
    pub ops: Vec<OpDesc>,
}

pub fn bundle_over(chart: &Chart, rank: usize) -> Result<TrivialBundle> {
    TrivialBundle::new(chart, rank).map_err(|e| Error::descriptor("rank", e.to_string()))
}

impl DrepDesc {
    pub fn build(&self, cfg: &Config) -> Result<(ActionModel, TrivialBundle, Vec<DerivativeOp>)> {
        let model = self.action.build(cfg)?;
        let bundle = bundle_over(model.total_chart(), self.rank)?;
        let ops = build_ops(&bundle, &self.ops)?;
        Ok((model, bundle, ops))
    }
}

impl RepDesc {
    /// The algebroid, the bundle and the operators.
    pub fn build(&self, cfg: &Config) -> Result<(LieAlgebroid, TrivialBundle, Vec<DerivativeOp>)> {
        let algebroid = match (&self.algebroid, &self.action) {
            (Some(a), None) => a.build(cfg)?,
            (None, Some(act)) => act.build(cfg)?.action_algebroid()?,
            _ => return Err(Error::descriptor("algebroid", "give exactly one of \"algebroid\" and \"action\"")),
        };
        let bundle = bundle_over(algebroid.base(), self.rank)?;
        let ops = build_ops(&bundle, &self.ops)?;
        Ok((algebroid, bundle, ops))
    }
}

// ---- global ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineDesc {
    #[serde(rename = "A")]
    pub a: Vec<Vec<ScalarDesc>>,
    pub b: Vec<ScalarDesc>,
}

impl AffineDesc {
    pub fn build(&self, n: usize, field: Field, path: &str) -> Result<AffineMap> {
        let a = scalar_matrix(&self.a, n, field, &format!("{path}.A"))?;
        if self.b.len() != n {
            return Err(Error::descriptor(format!("{path}.b"), format!("expected {n} entries")));
        }
        let b = scalars(&self.b, field, &format!("{path}.b"))?;
        AffineMap::new(a, b).map_err(|e| Error::descriptor(format!("{path}.A"), e.to_string()))
    }

    pub fn from_map(m: &AffineMap) -> Self {
        AffineDesc {
            a: m.linear().iter().map(|r| r.iter().map(ScalarDesc::from_scalar).collect()).collect(),
            b: m.shift().iter().map(ScalarDesc::from_scalar).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomorphismDesc {
    #[serde(rename = "A")]
    pub a: Vec<Vec<ScalarDesc>>,
    pub b: Vec<ScalarDesc>,
    pub g: Vec<Vec<String>>,
}

impl AutomorphismDesc {
    pub fn build(&self, bundle: &TrivialBundle, path: &str) -> Result<BundleAutomorphism> {
        let n = bundle.base_dim();
        let field = bundle.field();
        let base = AffineDesc { a: self.a.clone(), b: self.b.clone() }.build(n, field, path)?;
        let g = square(bundle.base(), &self.g, bundle.rank(), &format!("{path}.g"))?;
        BundleAutomorphism::new(bundle, base, g).map_err(|e| Error::descriptor(format!("{path}.g"), e.to_string()))
    }

    pub fn from_automorphism(nu: &BundleAutomorphism) -> Self {
        let base = AffineDesc::from_map(nu.base_map());
        AutomorphismDesc { a: base.a, b: base.b, g: print_matrix(nu.bundle().base(), nu.fiber()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDesc {
    pub generators: Vec<String>,
    #[serde(default)]
    pub relators: Vec<String>,
}

impl GroupDesc {
    pub fn build(&self) -> Result<FPGroup> {
        FPGroup::new(&self.generators, &self.relators)
    }
}

/// One atom `coeff * (d^deriv psi) o pullback`. `coeff` is a polynomial
/// (a multiple of the identity) or a matrix; `deriv` is a variable name, a
/// list of names, or null.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDesc {
    pub coeff: CoeffDesc,
    #[serde(default)]
    pub deriv: Option<DerivDesc>,
    #[serde(default)]
    pub pullback: Option<AffineDesc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffDesc {
    Poly(String),
    Matrix(Vec<Vec<String>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DerivDesc {
    One(String),
    Many(Vec<String>),
}

pub fn build_operator(chart: &Chart, k: usize, atoms: &[AtomDesc], path: &str) -> Result<AffDiffOperator> {
    let n = chart.dim();
    let mut op = AffDiffOperator::zero(chart, k, k);
    for (i, atom) in atoms.iter().enumerate() {
        let p = format!("{path}[{i}]");
        let coeff = match &atom.coeff {
            CoeffDesc::Poly(s) => MatrixPoly::diagonal(k, &poly(chart, s, &format!("{p}.coeff"))?),
            CoeffDesc::Matrix(m) => square(chart, m, k, &format!("{p}.coeff"))?,
        };
        let names: Vec<&String> = match &atom.deriv {
            None => Vec::new(),
            Some(DerivDesc::One(s)) => vec![s],
            Some(DerivDesc::Many(v)) => v.iter().collect(),
        };
        let mut deriv = vec![0u32; n];
        for name in names {
            let j = chart
                .names()
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::descriptor(format!("{p}.deriv"), format!("unknown variable `{name}`")))?;
            deriv[j] += 1;
        }
        let pullback = match &atom.pullback {
            None => AffineMap::identity(n),
            Some(a) => a.build(n, chart.field(), &format!("{p}.pullback"))?,
        };
        op = op.add(&AffDiffOperator::atom(chart, coeff, deriv, pullback)?);
    }
    Ok(op)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemilinearOperatorDesc {
    pub op: Vec<AtomDesc>,
    pub base: Vec<AtomDesc>,
}

/// A single automorphism, a hand-built semi-linear map, or a group
/// representation by automorphisms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemilinearDesc {
    pub bundle: BundleDesc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub automorphism: Option<AutomorphismDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<SemilinearOperatorDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Vec<AutomorphismDesc>>,
    /// Base action per generator; defaults to the automorphisms' base maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Vec<AffineDesc>>,
}

pub enum SemilinearModel {
    Automorphism(BundleAutomorphism),
    Operator(SemiLinearIso),
    Representation(crate::global::SemiLinearRepresentation, Vec<AffineMap>),
}

impl SemilinearDesc {
    pub fn build(&self, cfg: &Config) -> Result<SemilinearModel> {
        let e = self.bundle.build(cfg)?;
        match (&self.automorphism, &self.operator, &self.group) {
            (Some(a), None, None) => Ok(SemilinearModel::Automorphism(a.build(&e, "automorphism")?)),
            (None, Some(o), None) => {
                let op = build_operator(e.base(), e.rank(), &o.op, "operator.op")?;
                let base = build_operator(e.base(), 1, &o.base, "operator.base")?;
                Ok(SemilinearModel::Operator(SemiLinearIso::new(&e, op, base)?))
            }
            (None, None, Some(g)) => {
                let group = g.build()?;
                let assignment = self
                    .assignment
                    .as_ref()
                    .ok_or_else(|| Error::descriptor("assignment", "required with \"group\""))?
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a.build(&e, &format!("assignment[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                let action = match &self.action {
                    Some(v) => v
                        .iter()
                        .enumerate()
                        .map(|(i, a)| a.build(e.base_dim(), e.field(), &format!("action[{i}]")))
                        .collect::<Result<Vec<_>>>()?,
                    None => assignment.iter().map(|a| a.base_map().clone()).collect(),
                };
                let rep = crate::global::SemiLinearRepresentation::new(&group, assignment)?;
                Ok(SemilinearModel::Representation(rep, action))
            }
            _ => Err(Error::descriptor(
                "automorphism",
                "give exactly one of \"automorphism\", \"operator\" and \"group\"",
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftDesc {
    #[serde(rename = "A")]
    pub a: Vec<Vec<ScalarDesc>>,
    pub b: Vec<ScalarDesc>,
    /// Fiber matrix `T(x)`; identity when omitted.
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub t_matrix: Option<Vec<Vec<String>>>,
    /// Fiber shift `t(x)`; zero when omitted.
    #[serde(default, rename = "t", skip_serializing_if = "Option::is_none")]
    pub t_shift: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoDesc {
    pub rank: usize,
    pub matrices: Vec<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupoidActionDesc {
    pub group: GroupDesc,
    pub base_dim: usize,
    pub fiber_dim: usize,
    pub lifts: Vec<LiftDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<RhoDesc>,
    /// Longest word used when checking the bisection maps.
    #[serde(default = "default_word_length")]
    pub max_word_length: usize,
}

fn default_word_length() -> usize {
    3
}

impl GroupoidActionDesc {
    pub fn build(&self, cfg: &Config) -> Result<(GroupoidActionModel, Option<GroupoidRepModel>)> {
        let group = self.group.build()?;
        let base = Chart::standard("x", self.base_dim, cfg.field);
        let fiber = Chart::standard("y", self.fiber_dim, cfg.field);
        let fibered = FiberedChart::new(&base, &fiber)?;
        if self.lifts.len() != group.rank() {
            return Err(Error::descriptor("lifts", format!("expected {} lifts", group.rank())));
        }
        let lifts = self
            .lifts
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let path = format!("lifts[{i}]");
                let phi = AffineDesc { a: l.a.clone(), b: l.b.clone() }.build(self.base_dim, cfg.field, &path)?;
                let t = match &l.t_matrix {
                    Some(m) => square(&base, m, self.fiber_dim, &format!("{path}.T"))?,
                    None => MatrixPoly::identity(self.fiber_dim, self.base_dim),
                };
                let s = match &l.t_shift {
                    Some(v) if v.len() == self.fiber_dim => polys(&base, v, &format!("{path}.t"))?,
                    Some(_) => {
                        return Err(Error::descriptor(
                            format!("{path}.t"),
                            format!("expected {} entries", self.fiber_dim),
                        ))
                    }
                    None => vec![base.zero(); self.fiber_dim],
                };
                FiberedMap::new(&fibered, phi, t, s).map_err(|e| Error::descriptor(&path, e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let model = GroupoidActionModel::new(&group, &fibered, lifts)?;
        let rep = match &self.rho {
            None => None,
            Some(r) => {
                let total = fibered.total();
                let mats = r
                    .matrices
                    .iter()
                    .enumerate()
                    .map(|(i, m)| square(total, m, r.rank, &format!("rho.matrices[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                Some(GroupoidRepModel::new(&model, r.rank, mats).map_err(|e| Error::descriptor("rho", e.to_string()))?)
            }
        };
        Ok((model, rep))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDesc {
    pub bundle: BundleDesc,
    #[serde(rename = "A1")]
    pub a1: Vec<Vec<ScalarDesc>>,
    pub b1: Vec<ScalarDesc>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<String>>,
}

impl FamilyDesc {
    pub fn build(&self, cfg: &Config) -> Result<DualAutomorphismFamily> {
        let e = self.bundle.build(cfg)?;
        let n = e.base_dim();
        let a1 = scalar_matrix(&self.a1, n, e.field(), "A1")?;
        if self.b1.len() != n {
            return Err(Error::descriptor("b1", format!("expected {n} entries")));
        }
        let b1 = scalars(&self.b1, e.field(), "b1")?;
        let b = square(e.base(), &self.b, e.rank(), "B")?;
        DualAutomorphismFamily::new(&e, a1, b1, b)
    }
}

/// Operators `u` on sections, `twist = u^M` and `derivation = u_M` on
/// functions. `twist` defaults to the identity and `derivation` to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PseudolinearDesc {
    pub bundle: BundleDesc,
    pub u: Vec<AtomDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist: Option<Vec<AtomDesc>>,
    #[serde(default)]
    pub derivation: Vec<AtomDesc>,
}

impl PseudolinearDesc {
    pub fn build(&self, cfg: &Config) -> Result<(TrivialBundle, AffDiffOperator, AffDiffOperator, AffDiffOperator)> {
        let e = self.bundle.build(cfg)?;
        let chart = e.base();
        let u = build_operator(chart, e.rank(), &self.u, "u")?;
        let twist = match &self.twist {
            Some(t) => build_operator(chart, 1, t, "twist")?,
            None => AffDiffOperator::identity(chart, 1),
        };
        let derivation = build_operator(chart, 1, &self.derivation, "derivation")?;
        Ok((e, u, twist, derivation))
    }
}

/// Prequantization data on `R^n` over the Gaussian rationals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrequantizeDesc {
    pub base_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variables: Option<Vec<String>>,
    pub omega: Vec<Vec<ScalarDesc>>,
    pub alpha: Vec<String>,
    #[serde(default)]
    pub functions: Vec<String>,
}

impl PrequantizeDesc {
    pub fn chart(&self) -> Result<Chart> {
        make_chart(self.base_dim, &self.variables, "x", Field::Gaussian)
    }

    pub fn build(&self) -> Result<(crate::representations::SymplecticForm, Vec<Poly>, Vec<Poly>)> {
        let chart = self.chart()?;
        let omega = scalar_matrix(&self.omega, self.base_dim, Field::Gaussian, "omega")?;
        let form = crate::representations::SymplecticForm::new(&chart, omega)
            .map_err(|e| Error::descriptor("omega", e.to_string()))?;
        if self.alpha.len() != self.base_dim {
            return Err(Error::descriptor("alpha", format!("expected {} components", self.base_dim)));
        }
        let alpha = polys(&chart, &self.alpha, "alpha")?;
        let functions = polys(&chart, &self.functions, "functions")?;
        Ok((form, alpha, functions))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SO3: &str = r#"{
        "kind": "action",
        "algebroid": {"base_dim": 0, "rank": 3,
                      "structure": {"(1,2,3)": "-1", "(2,3,1)": "-1", "(3,1,2)": "-1"}},
        "fiber_dim": 3,
        "lifted": [["0", "-x3", "x2"], ["x3", "0", "-x1"], ["-x2", "x1", "0"]]
    }"#;

    #[test]
    fn action_document_round_trip() {
        let doc = Document::parse(SO3).unwrap();
        assert_eq!(doc.kind, "action");
        assert_eq!(doc.config, Config::default());
        let desc: ActionDesc = doc.body().unwrap();
        let model = desc.build(&doc.config).unwrap();
        assert!(model.check().passed());
        let again = ActionDesc::from_model(&model);
        assert_eq!(again.build(&doc.config).unwrap(), model);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = SO3.replace("\"-x3\"", "\"-x3 +\"");
        let doc = Document::parse(&bad).unwrap();
        let err = doc.body::<ActionDesc>().unwrap().build(&doc.config).unwrap_err();
        match err {
            Error::Descriptor { field, .. } => assert_eq!(field, "lifted[0][1]"),
            other => panic!("unexpected {other:?}"),
        }
        let err = Document::parse("{\"degree_bound\": 3}").unwrap_err();
        assert!(matches!(err, Error::Descriptor { ref field, .. } if field == "kind"));
        let bad = SO3.replace("(1,2,3)", "(1,2,4)");
        let doc = Document::parse(&bad).unwrap();
        let err = doc.body::<ActionDesc>().unwrap().build(&doc.config).unwrap_err();
        assert!(matches!(err, Error::Descriptor { ref field, .. } if field == "structure.(1,2,4)"));
    }

    #[test]
    fn scalars_and_atoms() {
        assert_eq!(ScalarDesc::Text("-3/2".into()).to_scalar(Field::Rational, "s").unwrap(), Scalar::ratio(-3, 2));
        assert_eq!(ScalarDesc::from_scalar(&Scalar::from_int(4)), ScalarDesc::Int(4));
        assert_eq!(ScalarDesc::from_scalar(&Scalar::ratio(1, 2)), ScalarDesc::Text("1/2".into()));
        let chart = Chart::standard("x", 1, Field::Rational);
        let atoms: Vec<AtomDesc> = serde_json::from_str(
            r#"[{"coeff": "1", "deriv": "x1", "pullback": null},
                {"coeff": "x1", "deriv": null, "pullback": {"A": [[2]], "b": [1]}}]"#,
        )
        .unwrap();
        let op = build_operator(&chart, 1, &atoms, "u").unwrap();
        let f = chart.parse("x1^2").unwrap();
        assert_eq!(op.apply_fn(&f), chart.parse("4*x1^3 + 4*x1^2 + 3*x1").unwrap());
    }
}
