//! Adaptive adversary against single-server committed schedulers with no
//! early processing, and the extremal free-time recurrence behind it.
//!
//! All jobs share the deadline `s`. Job `n` arrives at `a_n` with demand
//! `(s - a_n) / s` (slackness exactly `s`) and value `(c + 1)^(n - 1)`, which
//! exceeds `c` times the total of all earlier values. The next job is issued
//! only after the scheduler decides the current one.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanism::MechanismSpec;
use crate::model::{Decision, Instance, Job};
use crate::rational::{format_rational, pow_i, Exact, Rational, TimePoint};

/// Reply of an interactive scheduler to one submitted job.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Response {
    /// Committed at `at`. `first_processing` is when the job first runs, if
    /// the scheduler exposes it.
    Commit { at: TimePoint, first_processing: Option<TimePoint> },
    Reject { at: TimePoint },
}

/// A scheduler driven one job at a time. Submissions arrive in time order;
/// the scheduler never sees a job before its arrival.
pub trait InteractiveScheduler {
    /// Called once with the slackness the session will use; a domain error
    /// means the scheduler does not claim to handle it.
    fn prepare(&mut self, _s: &Rational) -> Result<()> {
        Ok(())
    }

    /// Decides `job`, no earlier than its arrival and no later than its deadline.
    fn submit(&mut self, job: &Job) -> Result<Response>;
}

/// Commits every job at its arrival.
#[derive(Debug, Default)]
pub struct CommitOnArrival;

impl InteractiveScheduler for CommitOnArrival {
    fn submit(&mut self, job: &Job) -> Result<Response> {
        Ok(Response::Commit { at: job.arrival.clone(), first_processing: None })
    }
}

/// Wraps a committed mechanism: each submission re-runs it on every job
/// seen so far and reports the decision for the newest one.
pub struct MechanismScheduler {
    spec: MechanismSpec,
    jobs: Vec<Job>,
    decided: Vec<Decision>,
}

impl MechanismScheduler {
    pub fn new(spec: MechanismSpec) -> Result<Self> {
        if !spec.is_committed() || spec.servers() != 1 {
            return Err(Error::InvalidParams("the adversary needs a single-server committed mechanism".into()));
        }
        Ok(MechanismScheduler { spec, jobs: Vec::new(), decided: Vec::new() })
    }
}

impl InteractiveScheduler for MechanismScheduler {
    fn prepare(&mut self, s: &Rational) -> Result<()> {
        let need = self.spec.min_report_slack();
        if s < &need {
            return Err(Error::Domain(format!(
                "{} needs slackness at least {}, got {}",
                self.spec.name(),
                format_rational(&need),
                format_rational(s)
            )));
        }
        Ok(())
    }

    fn submit(&mut self, job: &Job) -> Result<Response> {
        self.jobs.push(job.clone());
        let instance = Instance::new(self.jobs.clone())?;
        let run = self.spec.run(&instance)?;
        let index = |id| instance.index_of(id).expect("known job");
        for (k, earlier) in self.decided.iter().enumerate() {
            if &run.outcomes[index(&self.jobs[k].id)].decision != earlier {
                return Err(Error::ContractBreach(format!("decision of {} changed after a later arrival", self.jobs[k].id)));
            }
        }
        let j = index(&job.id);
        let decision = run.outcomes[j].decision.clone();
        self.decided.push(decision.clone());
        match decision {
            Decision::Committed(at) => {
                let first_processing = run.trace.first_start(j);
                Ok(Response::Commit { at, first_processing })
            }
            Decision::Rejected(at) => Ok(Response::Reject { at }),
            Decision::Uncommitted => Err(Error::Undecided(job.id.clone())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Round {
    pub n: usize,
    pub value: Exact,
    pub demand: Exact,
    pub arrival: Exact,
    pub deadline: Exact,
    pub accepted: bool,
    /// Decision time `t_n`.
    pub decided_at: Exact,
    /// `t_n - (t_{n-1} + D_{n-1})`; absent for the first job.
    pub ell: Option<Exact>,
    /// Committed work still unprocessed just after the decision, assuming
    /// the scheduler never idles with open commitments.
    pub load: Exact,
    /// Delay before the next submission, `max(0, load - D_n)`.
    pub wait: Exact,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    /// The committed load at round `round` cannot be finished by `s`.
    Overcommitted { round: usize },
    /// The scheduler rejected a job worth more than `c` times all earlier ones.
    RatioWitness { round: usize },
    RoundCap,
    /// The scheduler does not claim the requested slackness.
    NotApplicable { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdversaryTranscript {
    pub s: Exact,
    pub c: Exact,
    pub rounds: Vec<Round>,
    pub outcome: Outcome,
}

impl AdversaryTranscript {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Plays the adversary for at most `round_cap` jobs.
pub fn run_adversary(
    scheduler: &mut dyn InteractiveScheduler,
    s: &Rational,
    c: &Rational,
    round_cap: usize,
) -> Result<AdversaryTranscript> {
    if !s.is_positive() {
        return Err(Error::InvalidParams("slackness must be positive".into()));
    }
    if c < &Rational::one() {
        return Err(Error::InvalidParams("c must be at least 1".into()));
    }
    let mut transcript = AdversaryTranscript { s: Exact(s.clone()), c: Exact(c.clone()), rounds: Vec::new(), outcome: Outcome::RoundCap };
    if let Err(e) = scheduler.prepare(s) {
        return match e {
            Error::Domain(reason) => {
                transcript.outcome = Outcome::NotApplicable { reason };
                Ok(transcript)
            }
            other => Err(other),
        };
    }

    let mut arrival = Rational::zero();
    // Unprocessed committed work at time `clock`.
    let mut load = Rational::zero();
    let mut clock = Rational::zero();
    let mut previous: Option<(TimePoint, Rational)> = None;
    let base = c + Rational::one();
    for n in 1..=round_cap {
        if &arrival >= s {
            break;
        }
        let demand = (s - &arrival) / s;
        let value = pow_i(&base, n as i64 - 1);
        let job = Job::new(format!("j{n:06}"), value.clone(), demand.clone(), arrival.clone(), s.clone());
        let response = scheduler.submit(&job)?;
        let (accepted, at) = match &response {
            Response::Commit { at, first_processing } => {
                if let Some(start) = first_processing {
                    if start < at {
                        return Err(Error::ContractBreach(format!("job {} processed before its commitment", job.id)));
                    }
                }
                (true, at.clone())
            }
            Response::Reject { at } => (false, at.clone()),
        };
        if at < arrival || &at > s {
            return Err(Error::ContractBreach(format!("job {} decided outside its window", job.id)));
        }
        load = (&load - (&at - &clock)).max(Rational::zero());
        clock = at.clone();
        if accepted {
            load += &demand;
        }
        let ell = previous.as_ref().map(|(t, d)| Exact(&at - (t + d)));
        let wait = if accepted { (&load - &demand).max(Rational::zero()) } else { Rational::zero() };
        transcript.rounds.push(Round {
            n,
            value: Exact(value),
            demand: Exact(demand.clone()),
            arrival: Exact(arrival.clone()),
            deadline: Exact(s.clone()),
            accepted,
            decided_at: Exact(at.clone()),
            ell,
            load: Exact(load.clone()),
            wait: Exact(wait.clone()),
        });
        if load > s - &at {
            transcript.outcome = Outcome::Overcommitted { round: n };
            return Ok(transcript);
        }
        if !accepted {
            transcript.outcome = Outcome::RatioWitness { round: n };
            return Ok(transcript);
        }
        previous = Some((at.clone(), demand));
        arrival = at + wait;
    }
    Ok(transcript)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaReport {
    /// `Delta_0, Delta_1, ...` up to the first negative term or `prefix_len`
    /// terms, whichever comes first.
    pub prefix: Vec<Rational>,
    pub first_negative: Option<usize>,
}

/// Iterates `Delta_{n+1} = Delta_n - Delta_{n-1} / s` from
/// `Delta_0 = Delta_1 = s`, the free time before the common deadline when
/// every job is admitted as early as the adversary allows, and reports the
/// first index `<= n_max` with a negative term.
///
/// With `s = p / q` the scaled terms `Y_n = Delta_n q p^(n-1)` are integers
/// with `Y_0 = 1`, `Y_1 = p` and `Y_{n+1} = p (Y_n - q Y_{n-1})`, so the sign
/// test is exact.
pub fn delta_recurrence(s: &Rational, n_max: usize, prefix_len: usize) -> Result<DeltaReport> {
    if !s.is_positive() {
        return Err(Error::InvalidParams("slackness must be positive".into()));
    }
    let p = s.numer().clone();
    let qd = s.denom().clone();
    let mut prev = BigInt::one();
    let mut cur = p.clone();
    // q p^(n-1) for the current n.
    let mut scale = qd.clone();
    let mut prefix = vec![s.clone()];
    for n in 1..=n_max {
        if prefix.len() < prefix_len {
            prefix.push(Rational::new(cur.clone(), scale.clone()));
        }
        if cur.is_negative() {
            return Ok(DeltaReport { prefix, first_negative: Some(n) });
        }
        let next = &p * (&cur - &qd * &prev);
        prev = std::mem::replace(&mut cur, next);
        scale *= &p;
    }
    prefix.truncate(prefix_len);
    Ok(DeltaReport { prefix, first_negative: None })
}
