//! Command-line front end. [`run`] parses arguments, loads one document,
//! and returns the process exit code: 0 when everything checked passes,
//! 1 when a check failed (a witness is printed), 2 for malformed input.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use derivo::actions::{AlgebroidAction, LieAlgebraAction};
use derivo::algebroid::{doe_algebroid, trivial_algebroid, AConnection, LieAlgebroid};
use derivo::bundle::{DerivativeOp, TrivialBundle};
use derivo::descriptor::{
    ActionDesc, ActionModel, AlgebroidDesc, BundleDesc, Config, ConnectionDesc, DerivativeOpDesc, Document, DrepDesc,
    FamilyDesc, GroupoidActionDesc, LinearFieldDesc, OpDesc, PrequantizeDesc, PseudolinearDesc, RepDesc,
    SemilinearDesc, SemilinearModel,
};
use derivo::global::{
    check_bisections, check_groupoid_action, check_groupoid_rep, check_semilinear, check_semilinear_rep,
    differentiate_family,
};
use derivo::pseudolinear::{check_prop_a, is_pseudo_linear};
use derivo::report::{CheckResult, Report, Status};
use derivo::representations::{
    drep_to_rep, drepoid_to_rep, rep_to_drep, rep_to_drepoid, AlgebroidDerivativeRep, AlgebroidRep, DerivativeRep,
    Prequantization,
};
use derivo::Error;

#[derive(Parser, Debug)]
#[command(
    name = "derivo",
    version,
    about = "Check and transform derivative endomorphisms, algebroids and their representations"
)]
pub struct Cli {
    /// Degree bound for pointwise checks; overrides the document's value.
    #[arg(long, global = true, value_name = "N")]
    pub degree_bound: Option<u32>,
    /// Write the JSON report (or the produced document) to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a checker on a document.
    Check { what: CheckKind, file: PathBuf },
    /// Build an algebroid document.
    Build { what: BuildKind, file: PathBuf },
    /// Transform a document into another one.
    Transform { what: TransformKind, file: PathBuf },
    /// Verify a prequantization and list delta(f) for the given functions.
    Prequantize { file: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    Algebroid,
    Action,
    Drep,
    Rep,
    Semilinear,
    GroupoidAction,
    Pseudolinear,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuildKind {
    ActionAlgebroid,
    Doe,
    Trivial,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    DrepToRep,
    RepToDrep,
    DrepoidToRep,
    RepToDrepoid,
    Differentiate,
    Lieder,
    LinearField,
}

/// Outcome of a command before it is written out.
enum Outcome {
    Report(Report),
    Document(Document),
}

/// Exit code for an error: 1 when a check ran and failed, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CheckFailed(_)
        | Error::NotFlat(_)
        | Error::AnchorMismatch(_)
        | Error::CurvatureMismatch(_)
        | Error::MomentMapMismatch(_)
        | Error::PoissonBracketMismatch(_)
        | Error::RelatorFailure { .. } => 1,
        _ => 2,
    }
}

/// Turns a failed-check error into a report carrying its witness.
fn failure_report(subject: &str, e: Error) -> std::result::Result<Report, Error> {
    let (name, witness) = match e {
        Error::CheckFailed(r) => return Ok(*r),
        Error::NotFlat(w) => ("flatness", *w),
        Error::AnchorMismatch(w) => ("anchor", *w),
        Error::CurvatureMismatch(w) => ("curvature", *w),
        Error::MomentMapMismatch(w) => ("moment-map", *w),
        Error::PoissonBracketMismatch(w) => ("poisson-bracket", *w),
        Error::RelatorFailure { witness, .. } => ("relators", *witness),
        other => return Err(other),
    };
    let mut report = Report::new(subject);
    report.push(CheckResult::fail(name, witness));
    Ok(report)
}

fn or_report(subject: &str, r: derivo::Result<Report>) -> derivo::Result<Report> {
    r.or_else(|e| failure_report(subject, e))
}

fn load(path: &Path) -> derivo::Result<Document> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::descriptor("document", format!("cannot read {}: {e}", path.display())))?;
    Document::parse(&text)
}

fn expect_kind(doc: &Document, kinds: &[&str]) -> derivo::Result<()> {
    if kinds.contains(&doc.kind.as_str()) {
        Ok(())
    } else {
        let want = kinds.iter().map(|k| format!("\"{k}\"")).collect::<Vec<_>>().join(" or ");
        Err(Error::descriptor("kind", format!("expected {want}, got \"{}\"", doc.kind)))
    }
}

fn check_algebroid(doc: &Document, cfg: &Config) -> derivo::Result<Report> {
    expect_kind(doc, &["algebroid", "action"])?;
    if doc.kind == "algebroid" {
        return Ok(doc.body::<AlgebroidDesc>()?.build(cfg)?.check_axioms());
    }
    let model = doc.body::<ActionDesc>()?.build(cfg)?;
    let mut report = model.check();
    report.subject = "action algebroid".into();
    if report.passed() {
        report.extend(model.action_algebroid()?.check_axioms());
    }
    Ok(report)
}

fn build_drep(doc: &Document, cfg: &Config) -> derivo::Result<Result<DerivativeRep, AlgebroidDerivativeRep>> {
    let (model, bundle, ops) = doc.body::<DrepDesc>()?.build(cfg)?;
    Ok(match model {
        ActionModel::Algebra(a) => Ok(DerivativeRep::new(&a, &bundle, ops)?),
        ActionModel::Algebroid(a) => Err(AlgebroidDerivativeRep::new(&a, &bundle, ops)?),
    })
}

fn check_rep(doc: &Document, cfg: &Config) -> derivo::Result<Report> {
    let (algebroid, bundle, ops) = doc.body::<RepDesc>()?.build(cfg)?;
    let mut report = algebroid.check_axioms();
    report.subject = "algebroid representation".into();
    let flat =
        or_report("algebroid representation", AConnection::new(&algebroid, &bundle, ops).map(|c| c.check_flat()))?;
    report.extend(flat);
    Ok(report)
}

fn check_semilinear_doc(doc: &Document, cfg: &Config) -> derivo::Result<Report> {
    Ok(match doc.body::<SemilinearDesc>()?.build(cfg)? {
        SemilinearModel::Automorphism(nu) => check_semilinear(&nu.induced(), cfg.degree_bound),
        SemilinearModel::Operator(mu) => check_semilinear(&mu, cfg.degree_bound),
        SemilinearModel::Representation(rep, action) => check_semilinear_rep(&rep, &action),
    })
}

fn check_groupoid(doc: &Document, cfg: &Config) -> derivo::Result<Report> {
    let desc = doc.body::<GroupoidActionDesc>()?;
    let (model, rep) = desc.build(cfg)?;
    Ok(match rep {
        None => check_groupoid_action(&model),
        Some(rep) => {
            let mut report = check_groupoid_rep(&rep);
            if report.passed() {
                report.extend(check_bisections(&rep, desc.max_word_length, cfg.degree_bound));
            }
            report
        }
    })
}

fn check_pseudolinear(doc: &Document, cfg: &Config) -> derivo::Result<Report> {
    let (bundle, u, twist, derivation) = doc.body::<PseudolinearDesc>()?.build(cfg)?;
    let (mut report, _) = is_pseudo_linear(&bundle, &u, &twist, &derivation, cfg.degree_bound);
    report.extend(check_prop_a(&bundle, &twist, &derivation, &u, cfg.degree_bound)?.report);
    Ok(report)
}

fn check(what: CheckKind, doc: &Document, cfg: &Config) -> derivo::Result<Report> {
    let subject = format!("{what:?}").to_lowercase();
    let result = match what {
        CheckKind::Algebroid => check_algebroid(doc, cfg),
        CheckKind::Action => {
            expect_kind(doc, &["action"])?;
            Ok(doc.body::<ActionDesc>()?.build(cfg)?.check())
        }
        CheckKind::Drep => {
            expect_kind(doc, &["drep"])?;
            build_drep(doc, cfg).map(|r| match r {
                Ok(d) => d.check(),
                Err(d) => d.check(),
            })
        }
        CheckKind::Rep => {
            expect_kind(doc, &["rep"])?;
            check_rep(doc, cfg)
        }
        CheckKind::Semilinear => {
            expect_kind(doc, &["semilinear"])?;
            check_semilinear_doc(doc, cfg)
        }
        CheckKind::GroupoidAction => {
            expect_kind(doc, &["groupoid-action"])?;
            check_groupoid(doc, cfg)
        }
        CheckKind::Pseudolinear => {
            expect_kind(doc, &["pseudolinear"])?;
            check_pseudolinear(doc, cfg)
        }
    };
    or_report(&subject, result)
}

fn algebroid_doc(a: &LieAlgebroid, cfg: &Config) -> Document {
    Document::new("algebroid", *cfg, AlgebroidDesc::from_algebroid(a))
}

fn build(what: BuildKind, doc: &Document, cfg: &Config) -> derivo::Result<Document> {
    let algebroid = match what {
        BuildKind::ActionAlgebroid => {
            expect_kind(doc, &["action"])?;
            doc.body::<ActionDesc>()?.build(cfg)?.action_algebroid()?
        }
        BuildKind::Doe => {
            expect_kind(doc, &["bundle"])?;
            doe_algebroid(&doc.body::<BundleDesc>()?.build(cfg)?)
        }
        BuildKind::Trivial => {
            expect_kind(doc, &["connection"])?;
            trivial_algebroid(&doc.body::<ConnectionDesc>()?.build(cfg)?)?
        }
    };
    Ok(algebroid_doc(&algebroid, cfg))
}

fn ops_desc(ops: &[DerivativeOp]) -> Vec<OpDesc> {
    ops.iter().map(OpDesc::from_op).collect()
}

fn rep_doc(action: ActionDesc, sigma: &AlgebroidRep, cfg: &Config) -> Document {
    let bundle: &TrivialBundle = sigma.connection().bundle();
    let desc =
        RepDesc { algebroid: None, action: Some(action), rank: bundle.rank(), ops: ops_desc(sigma.connection().ops()) };
    Document::new("rep", *cfg, desc)
}

fn rep_from_doc(doc: &Document, cfg: &Config) -> derivo::Result<(RepDesc, AlgebroidRep)> {
    expect_kind(doc, &["rep"])?;
    let desc = doc.body::<RepDesc>()?;
    if desc.action.is_none() {
        return Err(Error::descriptor("action", "the inverse transform needs the action the algebroid comes from"));
    }
    let (algebroid, bundle, ops) = desc.build(cfg)?;
    let sigma = AlgebroidRep::new(AConnection::new(&algebroid, &bundle, ops)?)?;
    Ok((desc, sigma))
}

fn algebra_action(model: ActionModel) -> derivo::Result<LieAlgebraAction> {
    match model {
        ActionModel::Algebra(a) => Ok(a),
        ActionModel::Algebroid(_) => Err(Error::descriptor("action.algebroid.base_dim", "expected 0 (a Lie algebra)")),
    }
}

fn algebroid_action(model: ActionModel) -> derivo::Result<AlgebroidAction> {
    match model {
        ActionModel::Algebroid(a) => Ok(a),
        ActionModel::Algebra(_) => {
            Err(Error::descriptor("action.algebroid.base_dim", "expected a positive base dimension"))
        }
    }
}

fn transform(what: TransformKind, doc: &Document, cfg: &Config) -> derivo::Result<Document> {
    match what {
        TransformKind::DrepToRep | TransformKind::DrepoidToRep => {
            expect_kind(doc, &["drep"])?;
            let desc = doc.body::<DrepDesc>()?;
            let (model, bundle, ops) = desc.build(cfg)?;
            let sigma = if what == TransformKind::DrepToRep {
                drep_to_rep(&DerivativeRep::new(&algebra_action(model)?, &bundle, ops)?)?
            } else {
                drepoid_to_rep(&AlgebroidDerivativeRep::new(&algebroid_action(model)?, &bundle, ops)?)?
            };
            Ok(rep_doc(desc.action, &sigma, cfg))
        }
        TransformKind::RepToDrep => {
            let (desc, sigma) = rep_from_doc(doc, cfg)?;
            let rho = rep_to_drep(&sigma)?;
            let out =
                DrepDesc { action: desc.action.expect("checked"), rank: rho.bundle().rank(), ops: ops_desc(rho.ops()) };
            Ok(Document::new("drep", *cfg, out))
        }
        TransformKind::RepToDrepoid => {
            let (desc, sigma) = rep_from_doc(doc, cfg)?;
            let rho = rep_to_drepoid(&sigma)?;
            let out =
                DrepDesc { action: desc.action.expect("checked"), rank: rho.bundle().rank(), ops: ops_desc(rho.ops()) };
            Ok(Document::new("drep", *cfg, out))
        }
        TransformKind::Differentiate => {
            expect_kind(doc, &["family"])?;
            let d = differentiate_family(&doc.body::<FamilyDesc>()?.build(cfg)?);
            Ok(Document::new("derivative-op", *cfg, DerivativeOpDesc::from_op(&d)))
        }
        TransformKind::Lieder => {
            expect_kind(doc, &["linear-field"])?;
            let d = doc.body::<LinearFieldDesc>()?.build(cfg)?.lie_derivation();
            Ok(Document::new("derivative-op", *cfg, DerivativeOpDesc::from_op(&d)))
        }
        TransformKind::LinearField => {
            expect_kind(doc, &["derivative-op"])?;
            let l = doc.body::<DerivativeOpDesc>()?.build(cfg)?.linear_field();
            Ok(Document::new("linear-field", *cfg, LinearFieldDesc::from_field(&l)))
        }
    }
}

fn prequantize(doc: &Document) -> derivo::Result<Report> {
    expect_kind(doc, &["prequantize"])?;
    let (form, alpha, functions) = doc.body::<PrequantizeDesc>()?.build()?;
    let pq = match Prequantization::new(&form, &alpha) {
        Ok(pq) => pq,
        Err(e) => return failure_report("prequantization", e),
    };
    let chart = pq.bundle().base().clone();
    let mut report = Report::new("prequantization");
    report.push(CheckResult::pass("curvature").with_detail("d(alpha) = i*omega"));
    let deltas = functions.iter().map(|f| pq.delta(f)).collect::<derivo::Result<Vec<_>>>()?;
    for (f, d) in functions.iter().zip(&deltas) {
        report.push(CheckResult::pass(format!("delta({})", chart.print(f))).with_detail(d.to_string()));
    }
    let mut brackets = CheckResult::pass("bracket-preservation");
    'outer: for (i, f) in functions.iter().enumerate() {
        for (j, g) in functions.iter().enumerate().skip(i + 1) {
            let lhs = deltas[i].commutator(&deltas[j])?;
            let rhs = pq.delta(&form.poisson(f, g)?)?;
            let diff = lhs.sub(&rhs);
            if !diff.anchor().is_zero() || !diff.matrix().is_zero() {
                let mut residual = diff.anchor().components().to_vec();
                residual.extend(diff.matrix().entries().iter().cloned());
                let w = derivo::report::Witness::new("[delta(f), delta(g)] - delta({f,g})", chart.names())
                    .poly_input("f", f)
                    .poly_input("g", g)
                    .residual(residual);
                brackets = CheckResult::fail("bracket-preservation", w);
                break 'outer;
            }
        }
    }
    report.push(brackets);
    Ok(report)
}

fn execute(cli: &Cli) -> derivo::Result<(Outcome, i32)> {
    let file = match &cli.command {
        Command::Check { file, .. } | Command::Build { file, .. } | Command::Transform { file, .. } => file,
        Command::Prequantize { file } => file,
    };
    let doc = load(file)?;
    let mut cfg = doc.config;
    if let Some(n) = cli.degree_bound {
        cfg.degree_bound = n;
    }
    let outcome = match &cli.command {
        Command::Check { what, .. } => Outcome::Report(check(*what, &doc, &cfg)?),
        Command::Build { what, .. } => Outcome::Document(build(*what, &doc, &cfg)?),
        Command::Transform { what, .. } => Outcome::Document(transform(*what, &doc, &cfg)?),
        Command::Prequantize { .. } => Outcome::Report(prequantize(&doc)?),
    };
    let code = match &outcome {
        Outcome::Report(r) => match r.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        },
        Outcome::Document(_) => 0,
    };
    Ok((outcome, code))
}

/// Runs the command line `args` (including the program name), writing
/// human-readable output to `stdout` and diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    let (outcome, code) = match execute(&cli) {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &outcome {
        Outcome::Report(r) => {
            let _ = write!(stdout, "{r}");
            cli.out.as_ref().map(|p| {
                let json = serde_json::to_string_pretty(r).expect("reports serialize") + "\n";
                std::fs::write(p, json)
            })
        }
        Outcome::Document(d) => match &cli.out {
            Some(p) => {
                let _ = writeln!(stdout, "wrote {} document to {}", d.kind, p.display());
                Some(std::fs::write(p, d.to_text()))
            }
            None => {
                let _ = write!(stdout, "{}", d.to_text());
                None
            }
        },
    };
    if let Some(Err(e)) = written {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return 2;
    }
    code
}
