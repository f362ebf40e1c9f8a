use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use sched_core::adversary::{delta_recurrence, run_adversary, AdversaryTranscript, CommitOnArrival, MechanismScheduler, Outcome};
use sched_core::bounds::{accounted_bound, mechanism_bound};
use sched_core::committed::responsiveness_report;
use sched_core::dualfit::{certify_ratio, Certification, DualSolution};
use sched_core::io::{instance_to_json, run_report, InstanceFile};
use sched_core::mechanism::{MechanismSpec, MECHANISM_NAMES};
use sched_core::model::Instance;
use sched_core::noncommitted::AtParams;
use sched_core::oracle::{ratio_of, Ratio};
use sched_core::payments::{critical_payment, monotonicity_probe_report, Coordinate};
use sched_core::rational::{format_rational, parse_rational, Exact, Rational};
use sched_core::workload::Workload;
use sched_core::Error;

pub type Result<T> = std::result::Result<T, Error>;

pub enum Status {
    Clean,
    Violation,
}

#[derive(Parser)]
#[command(name = "schedlab", version, about = "Truthful online scheduling experiments")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mechanism on an instance file and print trace and outcomes as JSON.
    Simulate {
        #[command(flatten)]
        mech: MechArgs,
        /// Also compute critical payments.
        #[arg(long)]
        payments: bool,
        instance: PathBuf,
    },
    /// Empirical competitive ratios on random instances, as CSV.
    Ratio {
        #[command(flatten)]
        mech: MechArgs,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Target slackness of the generated instances.
        #[arg(long, value_parser = rational)]
        s: Rational,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fuzz monotonicity of a mechanism on an instance; exit 2 on a violation.
    Monotone {
        #[command(flatten)]
        mech: MechArgs,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 400)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Coordinates to perturb, from v, D, a, d.
        #[arg(long, value_delimiter = ',', default_value = "v,D,a,d")]
        coords: Vec<String>,
    },
    /// Critical payments for every job of an instance.
    Payments {
        #[command(flatten)]
        mech: MechArgs,
        instance: PathBuf,
    },
    /// Run the adaptive adversary against a single-server committed scheduler.
    Adversary {
        /// `naive` (commit on arrival) or `committed-single`.
        #[arg(long, default_value = "naive")]
        scheduler: String,
        #[arg(long, value_parser = rational)]
        s: Rational,
        #[arg(long, value_parser = rational, default_value = "1")]
        c: Rational,
        #[arg(long, default_value_t = 50)]
        rounds: usize,
        #[arg(long, value_parser = rational)]
        omega: Option<Rational>,
        /// Also print the free-time recurrence up to this many terms.
        #[arg(long)]
        delta: Option<usize>,
    },
    /// Check a dual solution and certify a ratio bound.
    DualCheck {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        dual: PathBuf,
        #[arg(long)]
        servers: Option<usize>,
        /// Value of the mechanism's schedule; defaults to running `--mech`.
        #[arg(long, value_parser = rational)]
        mech_value: Option<Rational>,
        #[arg(long, default_value = "at")]
        mech: String,
    },
    /// Emit a random instance as JSON.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = rational)]
        s: Rational,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        servers: usize,
    },
    /// Tabulate a mechanism's closed-form bound over a range of slackness, as CSV.
    Bounds {
        /// Mechanism family.
        #[arg(long)]
        family: String,
        #[arg(long, value_parser = rational)]
        from: Rational,
        #[arg(long, value_parser = rational)]
        to: Rational,
        #[arg(long, value_parser = rational, default_value = "1")]
        step: Rational,
        #[arg(long, default_value_t = 1)]
        servers: usize,
        /// Charge the reduction blowup to the beta part of the dual only.
        #[arg(long)]
        accounted: bool,
    },
}

#[derive(Args, Clone)]
struct MechArgs {
    /// Mechanism name.
    #[arg(long = "mech")]
    name: String,
    /// Server count; defaults to the instance file's.
    #[arg(long)]
    servers: Option<usize>,
    /// `auto` or `gamma=G,mu=M` for the class-based scheduler.
    #[arg(long, default_value = "auto")]
    params: String,
    #[arg(long, value_parser = rational)]
    omega: Option<Rational>,
    #[arg(long, value_parser = rational)]
    sigma: Option<Rational>,
}

fn rational(text: &str) -> std::result::Result<Rational, String> {
    parse_rational(text).map_err(|e| e.0)
}

impl MechArgs {
    /// `--params auto` takes the instance file's parameters when it has any.
    fn build_for(&self, file: &InstanceFile, s: &Rational, servers: usize) -> Result<MechanismSpec> {
        let mut spec = self.build(s, servers)?;
        if self.params == "auto" {
            if let Some(p) = file.at_params()? {
                set_class_params(&mut spec, p);
            }
        }
        Ok(spec)
    }

    fn build(&self, s: &Rational, servers: usize) -> Result<MechanismSpec> {
        if !MECHANISM_NAMES.contains(&self.name.as_str()) {
            return Err(Error::InvalidParams(format!(
                "unknown mechanism {}; expected one of {}",
                self.name,
                MECHANISM_NAMES.join(", ")
            )));
        }
        let mut spec = MechanismSpec::auto(&self.name, s, servers, self.omega.clone(), self.sigma.clone())?;
        if self.params != "auto" {
            let p = parse_params(&self.params)?;
            set_class_params(&mut spec, p);
        }
        Ok(spec)
    }
}

fn parse_params(text: &str) -> Result<AtParams> {
    let (mut gamma, mut mu) = (None, None);
    for part in text.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidParams(format!("expected key=value in --params, got {part}")))?;
        let v = parse_rational(v.trim())?;
        match k.trim() {
            "gamma" => gamma = Some(v),
            "mu" => mu = Some(v),
            other => return Err(Error::InvalidParams(format!("unknown parameter {other}"))),
        }
    }
    match (gamma, mu) {
        (Some(g), Some(m)) => AtParams::new(g, m),
        _ => Err(Error::InvalidParams("--params needs both gamma and mu".into())),
    }
}

fn set_class_params(spec: &mut MechanismSpec, p: AtParams) {
    use sched_core::committed::Inner;
    match spec {
        MechanismSpec::At { params, .. } | MechanismSpec::Greedy { params } | MechanismSpec::Phantom { params, .. } => *params = p,
        MechanismSpec::CommittedSingle { inner, .. }
        | MechanismSpec::CommittedNonMigratory { inner, .. }
        | MechanismSpec::CommittedMigratory { inner, .. } => *inner = Inner::At(p),
    }
}

fn read_instance(path: &Path) -> Result<(Instance, usize, InstanceFile)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let file: InstanceFile = serde_json::from_str(&text)?;
    let instance = file.to_instance()?;
    Ok((instance, file.servers, file))
}

/// Writes to stdout; a closed pipe is not an error worth reporting.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn print_json<T: Serialize>(value: &T) {
    emit(&serde_json::to_string_pretty(value).expect("serializable"));
}

pub fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Simulate { mech, payments, instance } => simulate(&mech, payments, &instance),
        Command::Ratio { mech, n, trials, s, seed } => ratio(&mech, n, trials, &s, seed),
        Command::Monotone { mech, instance, trials, seed, coords } => monotone(&mech, &instance, trials, seed, &coords),
        Command::Payments { mech, instance } => payments(&mech, &instance),
        Command::Adversary { scheduler, s, c, rounds, omega, delta } => adversary(&scheduler, &s, &c, rounds, omega, delta),
        Command::DualCheck { instance, dual, servers, mech_value, mech } => dual_check(&instance, &dual, servers, mech_value, &mech),
        Command::Gen { n, s, seed, servers } => {
            let inst = Workload::new(n, s, seed).generate()?;
            emit(&instance_to_json(&inst, servers));
            Ok(Status::Clean)
        }
        Command::Bounds { family, from, to, step, servers, accounted } => bounds(&family, &from, &to, &step, servers, accounted),
    }
}

fn simulate(mech: &MechArgs, with_payments: bool, path: &Path) -> Result<Status> {
    let (inst, file_servers, file) = read_instance(path)?;
    let servers = mech.servers.unwrap_or(file_servers);
    let spec = mech.build_for(&file, &inst.slackness()?, servers)?;
    let mut run = spec.run(&inst)?;
    let mut status = Status::Clean;
    if with_payments {
        for j in 0..inst.len() {
            match critical_payment(&inst, j, &spec) {
                Ok(p) => run.outcomes[j].payment = p,
                Err(Error::MonotonicityViolation(m)) => {
                    eprintln!("monotonicity violation: {m}");
                    status = Status::Violation;
                }
                Err(e) => return Err(e),
            }
        }
    }
    if run.broken_commitments() > 0 || !run.invariant_violations.is_empty() {
        status = Status::Violation;
    }
    print_json(&run_report(&inst, servers, spec.name(), &run));
    Ok(status)
}

#[derive(Serialize)]
struct CsvRow {
    seed: u64,
    n: usize,
    s: String,
    mechanism: String,
    params: String,
    mech_value: String,
    opt_value: String,
    ratio: String,
    bound: String,
    min_lead_add: String,
    min_lead_mult: String,
    broken_commitments: usize,
    #[serde(skip)]
    within_bound: bool,
}

pub const CSV_HEADER: &str =
    "seed,n,s,mechanism,params,mech_value,opt_value,ratio,bound,min_lead_add,min_lead_mult,broken_commitments";

fn ratio_row(mech: &MechArgs, n: usize, s: &Rational, seed: u64, servers: usize) -> Result<CsvRow> {
    let inst = Workload::new(n, s.clone(), seed).generate()?;
    let spec = mech.build(s, servers)?;
    let run = spec.run(&inst)?;
    let report = ratio_of(&inst, servers, run.completed_value(&inst))?;
    let bound = mechanism_bound(&spec, s).ok();
    let within_bound = match &bound {
        Some(b) => report.ratio.at_most(b),
        None => true,
    };
    let (lead_add, lead_mult) = if spec.is_committed() {
        let r = responsiveness_report(&inst, &run)?;
        (r.min_additive, r.min_multiplicative)
    } else {
        (None, None)
    };
    let na = |x: Option<Rational>| x.map(|v| format_rational(&v)).unwrap_or_else(|| "NA".into());
    Ok(CsvRow {
        seed,
        n,
        s: format_rational(s),
        mechanism: spec.name().to_string(),
        params: spec.describe_params(),
        mech_value: format_rational(&report.mechanism_value),
        opt_value: format_rational(&report.opt.value),
        ratio: match &report.ratio {
            Ratio::Finite(r) => format_rational(r),
            Ratio::Infinite => "inf".into(),
        },
        bound: na(bound),
        min_lead_add: na(lead_add),
        min_lead_mult: na(lead_mult),
        broken_commitments: run.broken_commitments(),
        within_bound,
    })
}

fn ratio(mech: &MechArgs, n: usize, trials: usize, s: &Rational, seed: u64) -> Result<Status> {
    let servers = mech.servers.unwrap_or(1);
    // Fail fast on configuration errors before fanning out.
    mech.build(s, servers)?;
    let rows: Vec<CsvRow> = (0..trials as u64)
        .into_par_iter()
        .map(|i| ratio_row(mech, n, s, seed + i, servers))
        .collect::<Result<_>>()?;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{CSV_HEADER}");
    let mut status = Status::Clean;
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.seed, r.n, r.s, r.mechanism, r.params, r.mech_value, r.opt_value, r.ratio, r.bound, r.min_lead_add, r.min_lead_mult, r.broken_commitments
        );
        if !r.within_bound || r.broken_commitments > 0 {
            status = Status::Violation;
        }
    }
    Ok(status)
}

fn coordinate(name: &str) -> Result<Coordinate> {
    match name.trim() {
        "v" | "value" => Ok(Coordinate::Value),
        "D" | "demand" => Ok(Coordinate::Demand),
        "a" | "arrival" => Ok(Coordinate::Arrival),
        "d" | "deadline" => Ok(Coordinate::Deadline),
        other => Err(Error::InvalidParams(format!("unknown coordinate {other}"))),
    }
}

fn monotone(mech: &MechArgs, path: &Path, trials: usize, seed: u64, coords: &[String]) -> Result<Status> {
    let (inst, file_servers, file) = read_instance(path)?;
    let servers = mech.servers.unwrap_or(file_servers);
    let spec = mech.build_for(&file, &inst.slackness()?, servers)?;
    let coords: Vec<Coordinate> = coords.iter().map(|c| coordinate(c)).collect::<Result<_>>()?;
    let report = monotonicity_probe_report(&inst, &spec, trials, seed, &coords)?;
    let mut scan_failures = Vec::new();
    for j in 0..inst.len() {
        match critical_payment(&inst, j, &spec) {
            Ok(_) => {}
            Err(Error::MonotonicityViolation(m)) => scan_failures.push(m),
            Err(e) => return Err(e),
        }
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        mechanism: &'a str,
        runs: usize,
        violations: &'a [sched_core::payments::ProbeViolation],
        value_scan_violations: &'a [String],
        audit_messages: &'a [String],
    }
    print_json(&Summary {
        mechanism: spec.name(),
        runs: report.runs,
        violations: &report.violations,
        value_scan_violations: &scan_failures,
        audit_messages: &report.audit_messages,
    });
    let clean = report.violations.is_empty() && scan_failures.is_empty() && report.audit_messages.is_empty();
    Ok(if clean { Status::Clean } else { Status::Violation })
}

fn payments(mech: &MechArgs, path: &Path) -> Result<Status> {
    let (inst, file_servers, file) = read_instance(path)?;
    let servers = mech.servers.unwrap_or(file_servers);
    let spec = mech.build_for(&file, &inst.slackness()?, servers)?;
    let run = spec.run(&inst)?;
    #[derive(Serialize)]
    struct Row {
        id: String,
        accepted: bool,
        value: Exact,
        payment: Option<Exact>,
        error: Option<String>,
    }
    let mut rows = Vec::new();
    let mut status = Status::Clean;
    for (j, job) in inst.jobs().iter().enumerate() {
        let (payment, error) = match critical_payment(&inst, j, &spec) {
            Ok(p) => (Some(Exact(p)), None),
            Err(Error::MonotonicityViolation(m)) => {
                status = Status::Violation;
                (None, Some(m))
            }
            Err(e) => return Err(e),
        };
        rows.push(Row { id: job.id.0.clone(), accepted: run.outcomes[j].accepted(), value: Exact(job.value.clone()), payment, error });
    }
    print_json(&rows);
    Ok(status)
}

fn adversary(name: &str, s: &Rational, c: &Rational, rounds: usize, omega: Option<Rational>, delta: Option<usize>) -> Result<Status> {
    let transcript = match name {
        "naive" => run_adversary(&mut CommitOnArrival, s, c, rounds)?,
        "committed-single" => match MechanismSpec::auto("committed-single", s, 1, omega, None) {
            Ok(spec) => run_adversary(&mut MechanismScheduler::new(spec)?, s, c, rounds)?,
            // No inner parameters exist at this slackness: the reduction
            // does not claim it.
            Err(Error::Domain(reason)) => AdversaryTranscript {
                s: Exact(s.clone()),
                c: Exact(c.clone()),
                rounds: Vec::new(),
                outcome: Outcome::NotApplicable { reason },
            },
            Err(e) => return Err(e),
        },
        other => return Err(Error::InvalidParams(format!("unknown scheduler {other}; expected naive or committed-single"))),
    };
    emit(&transcript.to_json());
    if let Some(n_max) = delta {
        let rep = delta_recurrence(s, n_max, 32)?;
        #[derive(Serialize)]
        struct Delta {
            first_negative: Option<usize>,
            prefix: Vec<Exact>,
        }
        print_json(&Delta { first_negative: rep.first_negative, prefix: rep.prefix.into_iter().map(Exact).collect() });
    }
    Ok(Status::Clean)
}

fn dual_check(path: &Path, dual_path: &Path, servers: Option<usize>, mech_value: Option<Rational>, mech: &str) -> Result<Status> {
    let (inst, file_servers, file) = read_instance(path)?;
    let servers = servers.unwrap_or(file_servers);
    let text = fs::read_to_string(dual_path).map_err(|e| Error::Parse(format!("{}: {e}", dual_path.display())))?;
    let dual = DualSolution::from_json(&text)?;
    let value = match mech_value {
        Some(v) => v,
        None => {
            let mut spec = MechanismSpec::auto(mech, &inst.slackness()?, servers, None, None)?;
            if let Some(p) = file.at_params()? {
                set_class_params(&mut spec, p);
            }
            spec.run(&inst)?.completed_value(&inst)
        }
    };
    let cost = sched_core::dualfit::dual_cost(&inst, &dual);
    match certify_ratio(&inst, &dual, &value, servers)? {
        Certification::Certified(r) => {
            emit(
                &serde_json::json!({"feasible": true, "dual_cost": format_rational(&cost), "mechanism_value": format_rational(&value), "certified_ratio": format_rational(&r)}).to_string(),
            );
            Ok(Status::Clean)
        }
        Certification::Rejected(v) => {
            emit(
                &serde_json::json!({"feasible": false, "job": v.job.0, "server": v.server, "time": format_rational(&v.time), "deficit": format_rational(&v.deficit)}).to_string(),
            );
            Ok(Status::Violation)
        }
    }
}

fn bounds(family: &str, from: &Rational, to: &Rational, step: &Rational, servers: usize, accounted: bool) -> Result<Status> {
    if step <= &Rational::from_integer(0.into()) || to < from {
        return Err(Error::InvalidParams("need from <= to and a positive step".into()));
    }
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "s,family,params,bound,bound_decimal");
    let mut s = from.clone();
    while &s <= to {
        match MechanismSpec::auto(family, &s, servers, None, None) {
            Ok(spec) => {
                let b = if accounted { accounted_bound(&spec, &s) } else { mechanism_bound(&spec, &s) };
                match b {
                    Ok(b) => {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{:.6}",
                            format_rational(&s),
                            family,
                            spec.describe_params(),
                            format_rational(&b),
                            sched_core::rational::to_f64(&b)
                        );
                    }
                    Err(Error::Domain(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            Err(Error::Domain(_)) => {}
            Err(e) => return Err(e),
        }
        s += step;
    }
    Ok(Status::Clean)
}
