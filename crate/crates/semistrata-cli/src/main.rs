//! `semistrata`: batch front end over JSON job files.
//!
//! Exit codes: 0 ok, 2 bad input, 3 unsupported, 4 undecided, 5 refuted.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use semistrata::arith::{fmat, Field, FieldSpec};
use semistrata::cert::Certificate;
use semistrata::forms::{HermForm, Lambda};
use semistrata::lattices::LatticeSeq;
use semistrata::lifting::{budget, lift_idempotent, lift_isometry, ResidualIsometryData};
use semistrata::selftest::{self, Profile};
use semistrata::strata::conj::{match_minimal, reverify, conjugate_gl};
use semistrata::strata::classical::conjugate_classical;
use semistrata::strata::graded::analyze_fundamental;
use semistrata::strata::split::split_stratum;
use semistrata::strata::{is_fundamental, stratum_invariants, Stratum};
use semistrata::witt::{verify_trace_theorem, TraceSpec, WittTable};
use semistrata::{Error, Result};

#[derive(Parser)]
#[command(name = "semistrata", version, about = "p-adic strata, forms and Witt groups")]
struct Cli {
    /// p-adic digits of working precision (overrides the field file)
    #[arg(long, global = true)]
    precision: Option<u32>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// seed for every randomized search
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    #[command(subcommand)]
    Witt(WittCmd),
    #[command(subcommand)]
    Form(FormCmd),
    #[command(subcommand)]
    Lattice(LatticeCmd),
    #[command(subcommand)]
    Stratum(StratumCmd),
    #[command(subcommand)]
    Lift(LiftCmd),
    /// Run the acceptance suite: `quick` or `full`.
    Selftest { profile: String },
}

#[derive(Subcommand)]
enum WittCmd {
    /// Group table and the maximal anisotropic element.
    Table {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
        epsilon: i32,
    },
    /// Check the trace map from the top of the tower down to a prefix.
    Trace {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
        epsilon: i32,
        /// number of tower steps kept in the base field
        #[arg(long, default_value_t = 0)]
        base_steps: usize,
    },
}

#[derive(Subcommand)]
enum FormCmd {
    /// Isometry class and Witt class of {"field", "epsilon", "gram"}.
    Class { input: PathBuf },
}

#[derive(Subcommand)]
enum LatticeCmd {
    /// Residual profile, and self-duality when a form is given.
    Check { input: PathBuf },
}

#[derive(Subcommand)]
enum StratumCmd {
    Analyze { input: PathBuf },
    Split { input: PathBuf },
    Match { first: PathBuf, second: PathBuf },
    Conjugate { first: PathBuf, second: PathBuf },
    /// Re-run every check of a serialized certificate.
    Verify { first: PathBuf, second: PathBuf, certificate: PathBuf },
}

#[derive(Subcommand)]
enum LiftCmd {
    /// {"field", "source", "source_lattice", "target", "target_lattice", "f"}
    Isometry { input: PathBuf },
    /// {"field", "lattice", "alpha", "r"}
    Idempotent { input: PathBuf },
}

struct Ctx {
    precision: Option<u32>,
    seed: u64,
}

/// A finished job: the payload plus the verdict that decides the exit code.
struct Report {
    verdict: String,
    body: Value,
    code: i32,
}

impl Report {
    fn ok(verdict: &str, body: Value) -> Report {
        Report { verdict: verdict.into(), body, code: 0 }
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&s).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

fn field_of(ctx: &Ctx, v: &Value) -> Result<Field> {
    let spec = match v.get("field") {
        Some(f) => f.clone(),
        None if v.get("p").is_some() => v.clone(),
        None => return Err(Error::Schema("input needs a field".into())),
    };
    let spec: FieldSpec = serde_json::from_value(spec).map_err(|e| Error::Schema(format!("field: {e}")))?;
    Field::new(&spec, ctx.precision)
}

fn get<'a>(v: &'a Value, k: &str) -> Result<&'a Value> {
    v.get(k).ok_or_else(|| Error::Schema(format!("input needs {k:?}")))
}

fn load_stratum(ctx: &Ctx, path: &Path, field: Option<&Field>) -> Result<(Field, Stratum)> {
    let v = read_json(path)?;
    let f = match field {
        Some(f) if v.get("field").is_none() => f.clone(),
        _ => field_of(ctx, &v)?,
    };
    if let Some(g) = field {
        if g.spec() != f.spec() {
            return Err(Error::ContextMismatch);
        }
    }
    let body = v.get("stratum").unwrap_or(&v);
    let s = Stratum::from_json(&f, body)?;
    Ok((f, s))
}

fn witt_table(ctx: &Ctx, path: &Path, eps: i32) -> Result<(Report, Option<String>)> {
    let f = field_of(ctx, &read_json(path)?)?;
    let t = WittTable::new(&f, eps)?;
    Ok((Report::ok("ok", t.to_json()?), Some(t.to_text()?)))
}

fn witt_trace(ctx: &Ctx, path: &Path, eps: i32, base: usize) -> Result<Report> {
    let f = field_of(ctx, &read_json(path)?)?;
    let r = verify_trace_theorem(&TraceSpec::new(&f, base, Lambda::Trace)?, eps)?;
    let body = serde_json::to_value(&r).map_err(|e| Error::Schema(e.to_string()))?;
    Ok(if r.passed() { Report::ok("trace theorem holds", body) } else { Report { verdict: "trace checks fail".into(), body, code: 5 } })
}

fn form_class(ctx: &Ctx, path: &Path) -> Result<Report> {
    let v = read_json(path)?;
    let f = field_of(ctx, &v)?;
    let h = HermForm::from_json(&f, v.get("form").unwrap_or(&v))?;
    let cls = h.classify()?;
    let w = WittTable::new(&f, h.eps())?;
    let c = w.class_of(&h)?;
    Ok(Report::ok(
        "ok",
        json!({
            "class": cls,
            "witt_class": c,
            "witt_label": w.rep_label(c),
            "anisotropic_dim": w.aniso_dim(c),
        }),
    ))
}

fn lattice_check(ctx: &Ctx, path: &Path) -> Result<Report> {
    let v = read_json(path)?;
    let f = field_of(ctx, &v)?;
    let lat = LatticeSeq::from_json(&f, get(&v, "lattice")?)?;
    let mut body = json!({
        "dim": lat.dim(),
        "period": lat.period(),
        "residual_dims": lat.residual_dims(None)?,
        "chain": lat.is_chain(),
    });
    if let Some(hv) = v.get("hermitian") {
        let h = HermForm::from_json(&f, hv)?;
        let (_, shift) = lat.dual(h.gram())?;
        body["self_dual_shift"] = json!(shift);
    }
    Ok(Report::ok("ok", body))
}

fn stratum_analyze(ctx: &Ctx, path: &Path) -> Result<Report> {
    let (_, s) = load_stratum(ctx, path, None)?;
    let a = stratum_invariants(&s)?;
    let mut body = json!({ "invariants": a.to_json(), "fundamental": is_fundamental(&s)? });
    if s.r == s.q - 1 {
        body["fundamental_analysis"] = analyze_fundamental(&s)?.to_json();
    }
    Ok(Report::ok("ok", body))
}

fn pair(ctx: &Ctx, a: &Path, b: &Path) -> Result<(Stratum, Stratum)> {
    let (f, s) = load_stratum(ctx, a, None)?;
    let (_, t) = load_stratum(ctx, b, Some(&f))?;
    Ok((s, t))
}

fn stratum_match(ctx: &Ctx, a: &Path, b: &Path) -> Result<Report> {
    let (s, t) = pair(ctx, a, b)?;
    let m = match_minimal(&s, &t, ctx.seed)?;
    let mut body = m.to_json();
    let verdict = if m.condition {
        "condition holds"
    } else {
        body["report"] = json!(m.profile_report());
        "condition fails"
    };
    Ok(Report::ok(verdict, body))
}

fn stratum_conjugate(ctx: &Ctx, a: &Path, b: &Path) -> Result<Report> {
    let (s, t) = pair(ctx, a, b)?;
    let m = match_minimal(&s, &t, ctx.seed)?;
    let c = match &s.herm {
        Some(_) => conjugate_classical(&s, &t, &m, ctx.seed)?,
        None => conjugate_gl(&s, &t, &m, ctx.seed)?,
    };
    if !c.ok() {
        return Err(Error::Rejected(format!("conjugator fails {:?}", c.failed())));
    }
    Ok(Report::ok("conjugate", json!({ "certificate": c.to_json() })))
}

fn stratum_verify(ctx: &Ctx, a: &Path, b: &Path, cert: &Path) -> Result<Report> {
    let (s, t) = pair(ctx, a, b)?;
    let v = read_json(cert)?;
    let v = v.get("certificate").unwrap_or(&v);
    let g = Certificate::g_from_json(s.field(), v)?;
    let names: Vec<String> = get(v, "checks")?
        .as_array()
        .ok_or_else(|| Error::Schema("checks must be an array".into()))?
        .iter()
        .map(|c| c.get("name").and_then(|n| n.as_str()).map(String::from).ok_or_else(|| Error::Schema("check needs a name".into())))
        .collect::<Result<_>>()?;
    if names.is_empty() {
        return Err(Error::Schema("certificate has no checks".into()));
    }
    let c = reverify(&g, &names, &s, &t)?;
    if !c.ok() {
        return Err(Error::Rejected(format!("failed checks {:?}", c.failed())));
    }
    Ok(Report::ok("verified", json!({ "checks": c.checks })))
}

fn lift_iso(ctx: &Ctx, path: &Path) -> Result<Report> {
    let v = read_json(path)?;
    let f = field_of(ctx, &v)?;
    let d = ResidualIsometryData {
        h: HermForm::from_json(&f, get(&v, "source")?)?,
        lat: LatticeSeq::from_json(&f, get(&v, "source_lattice")?)?,
        h2: HermForm::from_json(&f, get(&v, "target")?)?,
        lat2: LatticeSeq::from_json(&f, get(&v, "target_lattice")?)?,
        f: fmat::square_from_json(&f, get(&v, "f")?)?,
    };
    let c = lift_isometry(&d)?;
    Ok(Report::ok("lifted", json!({ "certificate": c.to_json() })))
}

fn lift_idem(ctx: &Ctx, path: &Path) -> Result<Report> {
    let v = read_json(path)?;
    let f = field_of(ctx, &v)?;
    let lat = LatticeSeq::from_json(&f, get(&v, "lattice")?)?;
    let alpha = fmat::square_from_json(&f, get(&v, "alpha")?)?;
    let r = get(&v, "r")?.as_i64().ok_or_else(|| Error::Schema("r must be an integer".into()))?;
    let nu = |m: &fmat::FMat| lat.nu(m);
    let l = lift_idempotent(&alpha, r, &nu, None, budget(&f, lat.period()))?;
    Ok(Report::ok(
        "lifted",
        json!({
            "idempotent": fmat::to_json(&l.value),
            "depths": l.depths,
            "doubling": l.doubling_holds(r),
        }),
    ))
}

fn selftest_cmd(ctx: &Ctx, profile: &str) -> Result<(Report, Option<String>)> {
    let profile = Profile::parse(profile)?;
    let outs = selftest::run(profile, ctx.precision.unwrap_or(selftest::DEFAULT_PRECISION));
    let all = outs.iter().all(|o| o.pass);
    let text = outs.iter().map(|o| o.line()).collect::<Vec<_>>().join("\n");
    let body = json!({
        "criteria": outs.iter().map(|o| json!({"id": o.id, "name": o.name, "pass": o.pass, "detail": o.detail, "seconds": o.seconds})).collect::<Vec<_>>(),
    });
    let verdict = if all { "all pass" } else { "failures" };
    Ok((Report { verdict: verdict.into(), body, code: if all { 0 } else { 5 } }, Some(text)))
}

fn dispatch(cli: &Cli) -> Result<(Report, Option<String>)> {
    let ctx = Ctx { precision: cli.precision, seed: cli.seed };
    let plain = |r: Result<Report>| r.map(|r| (r, None));
    match &cli.cmd {
        Cmd::Witt(WittCmd::Table { field, epsilon }) => witt_table(&ctx, field, check_eps(*epsilon)?),
        Cmd::Witt(WittCmd::Trace { field, epsilon, base_steps }) => plain(witt_trace(&ctx, field, check_eps(*epsilon)?, *base_steps)),
        Cmd::Form(FormCmd::Class { input }) => plain(form_class(&ctx, input)),
        Cmd::Lattice(LatticeCmd::Check { input }) => plain(lattice_check(&ctx, input)),
        Cmd::Stratum(StratumCmd::Analyze { input }) => plain(stratum_analyze(&ctx, input)),
        Cmd::Stratum(StratumCmd::Split { input }) => plain(load_stratum(&ctx, input, None).and_then(|(_, s)| Ok(Report::ok("ok", split_stratum(&s)?.to_json())))),
        Cmd::Stratum(StratumCmd::Match { first, second }) => plain(stratum_match(&ctx, first, second)),
        Cmd::Stratum(StratumCmd::Conjugate { first, second }) => plain(stratum_conjugate(&ctx, first, second)),
        Cmd::Stratum(StratumCmd::Verify { first, second, certificate }) => plain(stratum_verify(&ctx, first, second, certificate)),
        Cmd::Lift(LiftCmd::Isometry { input }) => plain(lift_iso(&ctx, input)),
        Cmd::Lift(LiftCmd::Idempotent { input }) => plain(lift_idem(&ctx, input)),
        Cmd::Selftest { profile } => selftest_cmd(&ctx, profile),
    }
}

fn check_eps(e: i32) -> Result<i32> {
    match e {
        1 | -1 => Ok(e),
        _ => Err(Error::Schema(format!("epsilon must be 1 or -1, got {e}"))),
    }
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Witt(WittCmd::Table { .. }) => "witt table",
        Cmd::Witt(WittCmd::Trace { .. }) => "witt trace",
        Cmd::Form(_) => "form class",
        Cmd::Lattice(_) => "lattice check",
        Cmd::Stratum(StratumCmd::Analyze { .. }) => "stratum analyze",
        Cmd::Stratum(StratumCmd::Split { .. }) => "stratum split",
        Cmd::Stratum(StratumCmd::Match { .. }) => "stratum match",
        Cmd::Stratum(StratumCmd::Conjugate { .. }) => "stratum conjugate",
        Cmd::Stratum(StratumCmd::Verify { .. }) => "stratum verify",
        Cmd::Lift(LiftCmd::Isometry { .. }) => "lift isometry",
        Cmd::Lift(LiftCmd::Idempotent { .. }) => "lift idempotent",
        Cmd::Selftest { .. } => "selftest",
    }
}

fn text_lines(out: &mut String, prefix: &str, v: &Value) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                text_lines(out, &key, x);
            }
        }
        _ => out.push_str(&format!("{prefix}: {v}\n")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut head = Map::new();
    head.insert("command".into(), json!(command_name(&cli.cmd)));
    head.insert("seed".into(), json!(cli.seed));
    head.insert("precision".into(), json!(cli.precision.unwrap_or(selftest::DEFAULT_PRECISION)));
    let (mut report, code, extra) = match dispatch(&cli) {
        Ok((r, extra)) => {
            head.insert("verdict".into(), json!(r.verdict));
            head.insert("result".into(), r.body);
            (head, r.code, extra)
        }
        Err(e) => {
            head.insert("verdict".into(), json!("error"));
            head.insert("error".into(), json!(e.to_string()));
            head.insert("exit_code".into(), json!(e.exit_code()));
            (head, e.exit_code(), None)
        }
    };
    match cli.format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&Value::Object(std::mem::take(&mut report))).unwrap());
        }
        Format::Text => {
            let mut out = String::new();
            if let Some(t) = &extra {
                report.remove("result");
                text_lines(&mut out, "", &Value::Object(report));
                out.push_str(t);
                if !t.ends_with('\n') {
                    out.push('\n');
                }
            } else {
                text_lines(&mut out, "", &Value::Object(report));
            }
            print!("{out}");
        }
    }
    ExitCode::from(code as u8)
}
