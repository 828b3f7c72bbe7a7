//! `crl`: validate structures, compute Ramsey values, search presets for
//! witnesses, compute group decay profiles and verify certificates.
//!
//! Exit codes: 0 success, 1 input error, 2 verification failure or
//! invariant violation, 3 search exhausted.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use crl_core::embeddings::EmbeddingSpace;
use crl_core::groups::{
    decay_profile, group_value, parse_group_table, write_decay_csv, FGGroupOracle,
    FiniteGroupTable, Group, GroupCriterionInstance, MetricMode,
};
use crl_core::ramsey::{
    decide_witness, search_witness, verify_certificate_text, write_certificate, AdaptiveOptions,
    Degeneracy, FailureClass, Mode, RamseyInstance, Verdict,
};
use crl_core::scalar::{parse_rational, to_decimal};
use crl_core::structures::{parse_structure, write_structure, ClassPreset, PresetKind};
use crl_core::{Rational, Structure};
use report::RunReport;
use sha2::{Digest, Sha256};

#[derive(Parser, Debug)]
#[command(
    name = "crl",
    version,
    about = "Exact convex Ramsey computations on finite metric structures"
)]
struct Cli {
    /// Write a JSON run report here.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a structure file against the metric and Lipschitz axioms.
    Validate { path: PathBuf },
    /// Write the size-n member of a preset class.
    Preset {
        name: PresetKind,
        n: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// List Emb(A,C).
    Enumerate { a: PathBuf, c: PathBuf },
    /// Compute the value of the triple (A,B,C) and decide it against eps.
    Value {
        a: PathBuf,
        b: PathBuf,
        c: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Uniform)]
        mode: ModeArg,
        #[arg(long, value_parser = rational_arg)]
        eps: Rational,
        /// Certificate output path.
        #[arg(long, default_value = "witness.crlcert")]
        cert: PathBuf,
        #[arg(long, default_value_t = AdaptiveOptions::default().budget)]
        budget: usize,
        #[arg(long, default_value_t = AdaptiveOptions::default().seed)]
        seed: u64,
    },
    /// Scan a preset class by size for the first C witnessing (A,B,eps).
    Search {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_parser = rational_arg)]
        eps: Rational,
        #[arg(long)]
        preset: PresetKind,
        #[arg(long)]
        max_size: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Uniform)]
        mode: ModeArg,
        #[arg(long, env = "CRL_JOBS")]
        jobs: Option<usize>,
        /// Write the witnessing structure here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the witness certificate here.
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value_t = AdaptiveOptions::default().budget)]
        budget: usize,
        #[arg(long, default_value_t = AdaptiveOptions::default().seed)]
        seed: u64,
    },
    /// Group criterion values, as CSV.
    Group {
        /// `free k`, `abelian k`, or the path of a `crl-group` table.
        #[arg(long)]
        group: String,
        /// Comma-separated elements of F.
        #[arg(long = "F")]
        f: String,
        /// Largest ball radius (oracles only).
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long, value_enum, default_value_t = MetricArg::Discrete)]
        metric: MetricArg,
        /// Comma-separated point indices A for the action metric; all points by default.
        #[arg(long)]
        subset: Option<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, env = "CRL_JOBS")]
        jobs: Option<usize>,
    },
    /// Check a witness certificate.
    Verify { cert: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Uniform,
    Adaptive,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MetricArg {
    Discrete,
    Action,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.0)
}

fn mode(arg: ModeArg, budget: usize, seed: u64) -> Mode {
    match arg {
        ModeArg::Uniform => Mode::Uniform,
        ModeArg::Adaptive => Mode::Adaptive(AdaptiveOptions { budget, seed }),
    }
}

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read(path: &Path, role: &str, report: &mut RunReport) -> Result<String> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    report.input(role, path, sha256(text.as_bytes()));
    Ok(text)
}

/// Parse and validate; any problem is an input error.
fn load_structure(path: &Path, role: &str, report: &mut RunReport) -> Result<Arc<Structure>> {
    let text = read(path, role, report)?;
    let s = parse_structure(&text).with_context(|| format!("parsing {}", path.display()))?;
    let v = s.validate(s.signature());
    if !v.passed() {
        bail!(
            "{} is not a valid structure: {}",
            path.display(),
            v.describe(&s).join("; ")
        );
    }
    Ok(Arc::new(s))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn degeneracy_line(d: Degeneracy) -> &'static str {
    match d {
        Degeneracy::NoCopiesOfA => "degenerate: Emb(A,B) is empty, the property holds vacuously",
        Degeneracy::NoCopiesOfB => "degenerate: Emb(B,C) is empty, no measure exists",
    }
}

fn init_pool(jobs: Option<usize>) -> usize {
    let jobs = jobs
        .filter(|&j| j > 0)
        .unwrap_or_else(rayon::current_num_threads);
    // Fails only if a pool already exists, which is harmless.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global();
    jobs
}

fn cmd_validate(path: &Path, report: &mut RunReport) -> Result<u8> {
    let text = read(path, "structure", report)?;
    let s = parse_structure(&text).with_context(|| format!("parsing {}", path.display()))?;
    let v = s.validate(s.signature());
    if v.passed() {
        report.note(format!("{}: valid ({} points)", path.display(), s.len()));
        Ok(0)
    } else {
        for line in v.describe(&s) {
            report.note(format!("{}: {line}", path.display()));
        }
        Ok(2)
    }
}

fn cmd_preset(
    kind: PresetKind,
    n: usize,
    out: Option<&Path>,
    report: &mut RunReport,
) -> Result<u8> {
    let s: Structure = ClassPreset::new(kind).generate(n)?;
    let text = write_structure(&s);
    write_out(out, &text)?;
    if let Some(p) = out {
        report.notes.push(format!("wrote {}", p.display()));
    }
    Ok(0)
}

fn cmd_enumerate(a: &Path, c: &Path, report: &mut RunReport) -> Result<u8> {
    let a = load_structure(a, "A", report)?;
    let c = load_structure(c, "C", report)?;
    let space = EmbeddingSpace::enumerate(a, c)?;
    report.note(format!("{} embeddings", space.len()));
    for e in space.embeddings() {
        println!("{e}");
    }
    Ok(0)
}

fn cmd_value(
    paths: [&Path; 3],
    mode: Mode,
    eps: Rational,
    cert: &Path,
    report: &mut RunReport,
) -> Result<u8> {
    let a = load_structure(paths[0], "A", report)?;
    let b = load_structure(paths[1], "B", report)?;
    let c = load_structure(paths[2], "C", report)?;
    let inst = RamseyInstance::new(a, b, c, eps)?;
    let d = decide_witness(&inst, mode)?;
    report.verdict = Some(d.verdict.name().to_string());
    if let Some(deg) = d.degenerate {
        report.note(degeneracy_line(deg));
        println!("{}", d.verdict.name());
        return Ok(0);
    }
    let uniform = d
        .uniform
        .as_ref()
        .expect("nondegenerate decisions carry a value");
    println!("{}, {}", uniform, d.verdict.name());
    report.value("value", uniform);
    if let Some(lower) = &d.adaptive_lower {
        report.value("adaptive lower bound", lower);
    }
    if let Some(certificate) = &d.certificate {
        std::fs::write(cert, write_certificate(certificate))
            .with_context(|| format!("writing {}", cert.display()))?;
        report.note(format!("certificate: {}", cert.display()));
        report.certificates.push(cert.display().to_string());
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    a: &Path,
    b: &Path,
    eps: Rational,
    kind: PresetKind,
    max_size: usize,
    mode: Mode,
    jobs: usize,
    out: Option<&Path>,
    cert: Option<&Path>,
    report: &mut RunReport,
) -> Result<u8> {
    let a = load_structure(a, "A", report)?;
    let b = load_structure(b, "B", report)?;
    let preset = ClassPreset::new(kind);
    let top = max_size.min(preset.max_size);
    // Members smaller than B hold no copy of it.
    let sizes = preset.min_size.max(b.len())..=top;
    let candidates = sizes
        .clone()
        .map(|n| preset.generate(n).map(Arc::new))
        .collect::<Result<Vec<_>, _>>()?;
    let outcome = search_witness(a, b, eps, &candidates, mode, jobs)?;
    if outcome.vacuous {
        report.note("Emb(A,B) is empty: every C is a witness, vacuously");
        report.verdict = Some(Verdict::Yes.name().to_string());
        return Ok(0);
    }
    for row in &outcome.trace {
        let value = match (&row.degenerate, &row.uniform) {
            (Some(d), _) => degeneracy_line(*d).to_string(),
            (None, Some(v)) => format!("{v} ({})", to_decimal(v, 12)),
            (None, None) => "-".to_string(),
        };
        report.note(format!(
            "candidate {} size {}: {} {}",
            row.index,
            row.size,
            value,
            row.verdict.name()
        ));
    }
    match outcome.found {
        Some((index, decision)) => {
            let c = &candidates[index];
            report.note(format!("witness: {} of size {}", kind.name(), c.len()));
            report.verdict = Some(Verdict::Yes.name().to_string());
            if let Some(v) = &decision.uniform {
                report.value("value", v);
            }
            if let Some(p) = out {
                std::fs::write(p, write_structure(c))
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            if let (Some(p), Some(certificate)) = (cert, &decision.certificate) {
                std::fs::write(p, write_certificate(certificate))
                    .with_context(|| format!("writing {}", p.display()))?;
                report.certificates.push(p.display().to_string());
            }
            Ok(0)
        }
        None => {
            report.note(format!(
                "exhausted: no witness in {} up to size {top}",
                kind.name()
            ));
            report.verdict = Some("EXHAUSTED".to_string());
            Ok(3)
        }
    }
}

fn elements<G: Group>(group: &G, list: &str) -> Result<Vec<G::Elem>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| group.parse_element(s).map_err(|e| anyhow!(e)))
        .collect()
}

fn cmd_group(
    spec: &str,
    f: &str,
    radius: Option<usize>,
    metric: MetricArg,
    subset: Option<&str>,
    out: Option<&Path>,
    report: &mut RunReport,
) -> Result<u8> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = read(path, "group", report)?;
        let group: FiniteGroupTable = parse_group_table(&text)?;
        let f = elements(&group, f)?;
        let metric = match metric {
            MetricArg::Discrete => MetricMode::Discrete,
            MetricArg::Action => {
                let points = group
                    .action_structure()
                    .ok_or_else(|| anyhow!("the group table has no action"))?
                    .len();
                MetricMode::Action(match subset {
                    Some(list) => list
                        .split(',')
                        .map(|x| {
                            x.trim()
                                .parse::<usize>()
                                .with_context(|| format!("bad point index `{x}`"))
                        })
                        .collect::<Result<_>>()?,
                    None => (0..points).collect(),
                })
            }
        };
        let inst = GroupCriterionInstance::new(&group, f, group.elements(), metric)?;
        let v = group_value::<_, Rational>(&inst)?;
        report.outputs.push(report::Value::new("all", &v.value));
        write_out(
            out,
            &format!(
                "radius,value,decimal\nall,{},{}\n",
                v.value,
                to_decimal(&v.value, 12)
            ),
        )?;
        return Ok(0);
    }
    let group: FGGroupOracle = spec.parse()?;
    if matches!(metric, MetricArg::Action) {
        bail!("`{spec}` has no action; use --metric discrete");
    }
    let radius = radius.ok_or_else(|| anyhow!("--radius is required for `{spec}`"))?;
    let f = elements(&group, f)?;
    let rows = decay_profile::<Rational>(&group, &f, radius)?;
    for r in &rows {
        report
            .outputs
            .push(report::Value::new(format!("radius {}", r.radius), &r.value));
    }
    write_out(out, &write_decay_csv(&rows))?;
    Ok(0)
}

fn cmd_verify(path: &Path, report: &mut RunReport) -> Result<u8> {
    let text = read(path, "certificate", report)?;
    match verify_certificate_text(&text) {
        Ok(r) => {
            report.note(format!("certificate OK ({} mode)", r.mode.name()));
            report.value("eps", &r.eps);
            report.value("value", &r.value);
            if let Some(lower) = &r.lower {
                report.value("lower bound", lower);
            }
            let verdict = if r.verdict_yes { "YES" } else { "NO" };
            report.note(format!("verdict: {verdict}"));
            report.verdict = Some(verdict.to_string());
            Ok(0)
        }
        Err(e) => {
            report.note(format!("certificate rejected: {e}"));
            Ok(if e.class == FailureClass::Parse { 1 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let name = match &cli.command {
        Command::Validate { .. } => "validate",
        Command::Preset { .. } => "preset",
        Command::Enumerate { .. } => "enumerate",
        Command::Value { .. } => "value",
        Command::Search { .. } => "search",
        Command::Group { .. } => "group",
        Command::Verify { .. } => "verify",
    };
    let mut report = RunReport::start(name);
    let code = match &cli.command {
        Command::Validate { path } => cmd_validate(path, &mut report)?,
        Command::Preset { name, n, out } => cmd_preset(*name, *n, out.as_deref(), &mut report)?,
        Command::Enumerate { a, c } => cmd_enumerate(a, c, &mut report)?,
        Command::Value {
            a,
            b,
            c,
            mode: m,
            eps,
            cert,
            budget,
            seed,
        } => cmd_value(
            [a, b, c],
            mode(*m, *budget, *seed),
            eps.clone(),
            cert,
            &mut report,
        )?,
        Command::Search {
            a,
            b,
            eps,
            preset,
            max_size,
            mode: m,
            jobs,
            out,
            cert,
            budget,
            seed,
        } => {
            let jobs = init_pool(*jobs);
            cmd_search(
                a,
                b,
                eps.clone(),
                *preset,
                *max_size,
                mode(*m, *budget, *seed),
                jobs,
                out.as_deref(),
                cert.as_deref(),
                &mut report,
            )?
        }
        Command::Group {
            group,
            f,
            radius,
            metric,
            subset,
            out,
            jobs,
        } => {
            init_pool(*jobs);
            cmd_group(
                group,
                f,
                *radius,
                *metric,
                subset.as_deref(),
                out.as_deref(),
                &mut report,
            )?
        }
        Command::Verify { cert } => cmd_verify(cert, &mut report)?,
    };
    report.finish(cli.report.as_deref())?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
