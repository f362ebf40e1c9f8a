//! Deterministic event-driven executor for online mechanisms.
//!
//! Events at one instant are delivered in two groups: first every job that
//! finished (completed, or reached its deadline while running), then every
//! arrival. Each group is ordered by ascending job index, which is ascending
//! id. Allocation is constant between instants.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::{Instance, Job, ScheduleTrace};
use crate::rational::{format_rational, Duration, Rational, TimePoint};

/// Read/write view a mechanism gets during a callback.
pub struct Control<'a> {
    instance: &'a Instance,
    now: TimePoint,
    processed: Vec<Duration>,
    finished: Vec<bool>,
    completed: Vec<bool>,
    running: Vec<Option<usize>>,
}

impl<'a> Control<'a> {
    pub fn now(&self) -> &TimePoint {
        &self.now
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn job(&self, index: usize) -> &'a Job {
        self.instance.job(index)
    }

    pub fn servers(&self) -> usize {
        self.running.len()
    }

    pub fn processed(&self, job: usize) -> &Duration {
        &self.processed[job]
    }

    pub fn remaining(&self, job: usize) -> Duration {
        &self.instance.job(job).demand - &self.processed[job]
    }

    /// Completed, or expired at its deadline.
    pub fn is_finished(&self, job: usize) -> bool {
        self.finished[job]
    }

    pub fn is_completed(&self, job: usize) -> bool {
        self.completed[job]
    }

    pub fn running(&self, server: usize) -> Option<usize> {
        self.running[server]
    }

    pub fn server_of(&self, job: usize) -> Option<usize> {
        self.running.iter().position(|r| *r == Some(job))
    }

    /// Sets the job on `server` from now on. Checked once the callback returns.
    pub fn assign(&mut self, server: usize, job: Option<usize>) {
        self.running[server] = job;
    }

    fn check(&self) -> Result<()> {
        let mut seen = vec![false; self.instance.len()];
        for (server, slot) in self.running.iter().enumerate() {
            let Some(j) = *slot else { continue };
            let job = self.instance.job(j);
            let breach = |why: &str| {
                Err(Error::ContractBreach(format!(
                    "job {} assigned to server {server} at {}: {why}",
                    job.id,
                    format_rational(&self.now)
                )))
            };
            if seen[j] {
                return breach("already running on another server");
            }
            seen[j] = true;
            if self.now < job.arrival || self.now >= job.deadline {
                return breach("outside its window");
            }
            if self.finished[j] {
                return breach("already finished");
            }
        }
        Ok(())
    }
}

/// Behavioral contract of an online mechanism.
pub trait Mechanism {
    fn on_arrival(&mut self, job: usize, ctl: &mut Control<'_>);
    fn on_completion(&mut self, job: usize, server: usize, ctl: &mut Control<'_>);
    /// A running job reached its deadline unfinished. Defaults to the
    /// completion handler since the server is freed either way.
    fn on_expiry(&mut self, job: usize, server: usize, ctl: &mut Control<'_>) {
        self.on_completion(job, server, ctl)
    }
    /// Invariant checks run after every instant; returns violation messages.
    fn audit(&mut self, _ctl: &Control<'_>) -> Vec<String> {
        Vec::new()
    }
}

/// Everything the engine observed during one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimRun {
    pub trace: ScheduleTrace,
    pub completion: Vec<Option<TimePoint>>,
    pub processed: Vec<Duration>,
    pub invariant_violations: Vec<String>,
}

impl SimRun {
    pub fn completed(&self, job: usize) -> bool {
        self.completion[job].is_some()
    }
}

/// Runs `mechanism` over `instance` on `servers` servers.
pub fn simulate<M: Mechanism + ?Sized>(instance: &Instance, servers: usize, mechanism: &mut M) -> Result<SimRun> {
    if servers == 0 {
        return Err(Error::InvalidParams("at least one server is required".into()));
    }
    let n = instance.len();
    let mut trace = ScheduleTrace::new(servers);
    let mut completion: Vec<Option<Rational>> = vec![None; n];
    let mut violations = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| instance.job(x).arrival.cmp(&instance.job(y).arrival).then(x.cmp(&y)));

    let mut ctl = Control {
        instance,
        now: order.first().map(|&j| instance.job(j).arrival.clone()).unwrap_or_else(Rational::zero),
        processed: vec![Rational::zero(); n],
        finished: vec![false; n],
        completed: vec![false; n],
        running: vec![None; servers],
    };
    let mut next_arrival = 0;

    loop {
        let arrival_time = order.get(next_arrival).map(|&j| instance.job(j).arrival.clone());
        let finish_time = ctl
            .running
            .iter()
            .flatten()
            .map(|&j| {
                let job = instance.job(j);
                let done = &ctl.now + &job.demand - &ctl.processed[j];
                if done < job.deadline {
                    done
                } else {
                    job.deadline.clone()
                }
            })
            .min();
        let next = match (arrival_time, finish_time) {
            (None, None) => break,
            (Some(a), None) => a,
            (None, Some(f)) => f,
            (Some(a), Some(f)) => a.min(f),
        };

        for server in 0..servers {
            if let Some(j) = ctl.running[server] {
                trace.push(server, ctl.now.clone(), next.clone(), j);
                ctl.processed[j] += &next - &ctl.now;
            }
        }
        ctl.now = next;

        let mut finished: Vec<(usize, usize, bool)> = Vec::new();
        for server in 0..servers {
            if let Some(j) = ctl.running[server] {
                let job = instance.job(j);
                if ctl.processed[j] >= job.demand {
                    finished.push((j, server, true));
                } else if ctl.now >= job.deadline {
                    finished.push((j, server, false));
                }
            }
        }
        finished.sort();
        for &(j, server, done) in &finished {
            ctl.running[server] = None;
            ctl.finished[j] = true;
            if done {
                ctl.completed[j] = true;
                completion[j] = Some(ctl.now.clone());
            }
        }
        for &(j, server, done) in &finished {
            if done {
                mechanism.on_completion(j, server, &mut ctl);
            } else {
                mechanism.on_expiry(j, server, &mut ctl);
            }
            ctl.check()?;
        }
        while let Some(&j) = order.get(next_arrival) {
            if instance.job(j).arrival != ctl.now {
                break;
            }
            next_arrival += 1;
            mechanism.on_arrival(j, &mut ctl);
            ctl.check()?;
        }
        violations.extend(
            mechanism
                .audit(&ctl)
                .into_iter()
                .map(|v| format!("t={}: {v}", format_rational(&ctl.now))),
        );
    }

    Ok(SimRun { trace, completion, processed: ctl.processed, invariant_violations: violations })
}
