//! Domain model: job types, instances, schedule traces and per-job outcomes.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rational::{format_rational, Duration, Rational, TimePoint};

/// Opaque job identifier. Ids are totally ordered and the order is the final
/// tie-breaker everywhere a rule would otherwise be ambiguous.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JobId(pub String);

impl JobId {
    pub fn new(id: impl Into<String>) -> Self {
        JobId(id.into())
    }
}

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One job request `<v, D, a, d>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Job {
    pub id: JobId,
    pub value: Rational,
    pub demand: Duration,
    pub arrival: TimePoint,
    pub deadline: TimePoint,
}

impl Job {
    pub fn new(
        id: impl Into<String>,
        value: Rational,
        demand: Rational,
        arrival: Rational,
        deadline: Rational,
    ) -> Self {
        Job { id: JobId::new(id), value, demand, arrival, deadline }
    }

    /// Value per unit of demand.
    pub fn density(&self) -> Rational {
        &self.value / &self.demand
    }

    pub fn window(&self) -> Duration {
        &self.deadline - &self.arrival
    }

    /// `(d - a) / D`.
    pub fn slack(&self) -> Rational {
        self.window() / &self.demand
    }

    /// Checks the field invariants of a single job type.
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |why: &str| Err(Error::InvalidJob { id: self.id.clone(), reason: why.to_string() });
        if !self.value.is_positive() {
            return bad("value must be positive");
        }
        if !self.demand.is_positive() {
            return bad("demand must be positive");
        }
        if self.arrival.is_negative() {
            return bad("arrival must be non-negative");
        }
        if self.window() < self.demand {
            return bad("window d - a is shorter than the demand");
        }
        Ok(())
    }
}

/// A validated set of jobs, stored in ascending id order. Job indices are
/// therefore consistent with the id order used for tie-breaking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    jobs: Vec<Job>,
}

impl Instance {
    pub fn new(mut jobs: Vec<Job>) -> Result<Self, Error> {
        let mut seen = BTreeSet::new();
        for job in &jobs {
            job.validate()?;
            if !seen.insert(job.id.clone()) {
                return Err(Error::DuplicateJobId(job.id.clone()));
            }
        }
        jobs.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(Instance { jobs })
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn job(&self, index: usize) -> &Job {
        &self.jobs[index]
    }

    pub fn index_of(&self, id: &JobId) -> Option<usize> {
        self.jobs.binary_search_by(|j| j.id.cmp(id)).ok()
    }

    /// `min_j (d_j - a_j) / D_j`.
    pub fn slackness(&self) -> Result<Rational, Error> {
        self.jobs.iter().map(Job::slack).min().ok_or(Error::NoJobs)
    }

    pub fn total_value(&self) -> Rational {
        self.jobs.iter().map(|j| j.value.clone()).sum()
    }

    /// Returns a copy with the job at `index` replaced by `job` (same id).
    pub fn with_job(&self, index: usize, job: Job) -> Result<Self, Error> {
        let mut jobs = self.jobs.clone();
        jobs[index] = job;
        Instance::new(jobs)
    }

    /// Keeps only jobs accepted by `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&Job) -> bool) -> Self {
        Instance { jobs: self.jobs.iter().filter(|j| keep(j)).cloned().collect() }
    }

    /// Every demand multiplied by `f`. Windows are unchanged, so the result may
    /// fail job validation when `f > 1`; this is intended for dual checking
    /// only and therefore bypasses the window check.
    pub fn with_scaled_demands(&self, f: &Rational) -> Self {
        let jobs = self
            .jobs
            .iter()
            .map(|j| Job { demand: &j.demand * f, ..j.clone() })
            .collect();
        Instance { jobs }
    }

    /// Deadlines stretched to `d + f (d - a)`.
    pub fn with_stretched_deadlines(&self, f: &Rational) -> Self {
        let jobs = self
            .jobs
            .iter()
            .map(|j| Job { deadline: &j.deadline + f * j.window(), ..j.clone() })
            .collect();
        Instance { jobs }
    }
}

/// The class index `l` with `gamma^l <= rho < gamma^(l+1)`, found by exact
/// search over powers of `gamma` outward from zero.
pub fn class_of_density(density: &Rational, gamma: &Rational) -> i64 {
    assert!(gamma > &Rational::one(), "class base must exceed 1");
    assert!(density.is_positive(), "density must be positive");
    let mut level = 0i64;
    if density >= &Rational::one() {
        let mut next = gamma.clone();
        while &next <= density {
            next *= gamma;
            level += 1;
        }
    } else {
        let mut power = gamma.recip();
        level = -1;
        while &power > density {
            power /= gamma;
            level -= 1;
        }
    }
    level
}

pub fn class_of(job: &Job, gamma: &Rational) -> i64 {
    class_of_density(&job.density(), gamma)
}

/// One maximal run of a job on a server over `[start, end)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub start: TimePoint,
    pub end: TimePoint,
    pub job: usize,
}

impl Segment {
    pub fn len(&self) -> Duration {
        &self.end - &self.start
    }
}

/// Piecewise-constant allocation: per server an ordered list of segments.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ScheduleTrace {
    pub servers: Vec<Vec<Segment>>,
}

impl ScheduleTrace {
    pub fn new(servers: usize) -> Self {
        ScheduleTrace { servers: vec![Vec::new(); servers] }
    }

    pub fn server_count(&self) -> usize {
        self.servers.len()
    }

    /// Appends a segment, merging with the previous one when contiguous.
    pub fn push(&mut self, server: usize, start: TimePoint, end: TimePoint, job: usize) {
        if end <= start {
            return;
        }
        let lane = &mut self.servers[server];
        if let Some(last) = lane.last_mut() {
            if last.job == job && last.end == start {
                last.end = end;
                return;
            }
        }
        lane.push(Segment { start, end, job });
    }

    /// Earliest time `job` runs anywhere.
    pub fn first_start(&self, job: usize) -> Option<TimePoint> {
        self.servers.iter().flatten().filter(|s| s.job == job).map(|s| s.start.clone()).min()
    }

    /// Servers a job ever ran on.
    pub fn servers_of(&self, job: usize) -> BTreeSet<usize> {
        self.servers
            .iter()
            .enumerate()
            .filter(|(_, lane)| lane.iter().any(|s| s.job == job))
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobReport {
    pub processed: Duration,
    pub completed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TraceViolation {
    #[error("segment on server {server} references unknown job index {job}")]
    UnknownJob { server: usize, job: usize },
    #[error("empty or inverted segment [{}, {}) on server {server}", format_rational(.start), format_rational(.end))]
    BadSegment { server: usize, start: Rational, end: Rational },
    #[error("overlap-on-server: server {server} at [{}, {})", format_rational(.start), format_rational(.end))]
    OverlapOnServer { server: usize, start: Rational, end: Rational },
    #[error("job-on-two-servers: job {job} at [{}, {})", format_rational(.start), format_rational(.end))]
    JobOnTwoServers { job: JobId, start: Rational, end: Rational },
    #[error("segment-outside-window: job {job} on server {server} at [{}, {})", format_rational(.start), format_rational(.end))]
    SegmentOutsideWindow { job: JobId, server: usize, start: Rational, end: Rational },
}

impl TraceViolation {
    /// Short kind tag used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            TraceViolation::UnknownJob { .. } => "unknown-job",
            TraceViolation::BadSegment { .. } => "bad-segment",
            TraceViolation::OverlapOnServer { .. } => "overlap-on-server",
            TraceViolation::JobOnTwoServers { .. } => "job-on-two-servers",
            TraceViolation::SegmentOutsideWindow { .. } => "segment-outside-window",
        }
    }
}

/// Checks the trace invariants and returns per-job processed totals.
#[allow(clippy::result_large_err)]
pub fn validate_trace(instance: &Instance, trace: &ScheduleTrace) -> Result<Vec<JobReport>, TraceViolation> {
    let jobs = instance.jobs();
    let mut per_job: Vec<Vec<(Rational, Rational)>> = vec![Vec::new(); jobs.len()];
    for (server, lane) in trace.servers.iter().enumerate() {
        let mut prev_end: Option<&Rational> = None;
        for seg in lane {
            if seg.job >= jobs.len() {
                return Err(TraceViolation::UnknownJob { server, job: seg.job });
            }
            if seg.end <= seg.start {
                return Err(TraceViolation::BadSegment { server, start: seg.start.clone(), end: seg.end.clone() });
            }
            if let Some(end) = prev_end {
                if &seg.start < end {
                    return Err(TraceViolation::OverlapOnServer {
                        server,
                        start: seg.start.clone(),
                        end: end.clone(),
                    });
                }
            }
            let job = &jobs[seg.job];
            if seg.start < job.arrival || seg.end > job.deadline {
                return Err(TraceViolation::SegmentOutsideWindow {
                    job: job.id.clone(),
                    server,
                    start: seg.start.clone(),
                    end: seg.end.clone(),
                });
            }
            per_job[seg.job].push((seg.start.clone(), seg.end.clone()));
            prev_end = Some(&seg.end);
        }
    }
    let mut reports = Vec::with_capacity(jobs.len());
    for (index, mut segments) in per_job.into_iter().enumerate() {
        segments.sort();
        for pair in segments.windows(2) {
            if pair[1].0 < pair[0].1 {
                return Err(TraceViolation::JobOnTwoServers {
                    job: jobs[index].id.clone(),
                    start: pair[1].0.clone(),
                    end: crate::rational::min_of(&pair[0].1, &pair[1].1).clone(),
                });
            }
        }
        let processed: Rational = segments.iter().map(|(s, e)| e - s).sum();
        let completed = processed >= jobs[index].demand;
        reports.push(JobReport { processed, completed });
    }
    Ok(reports)
}

/// Accept/reject record of a job.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    /// Guaranteed completion, decided at the given time.
    Committed(TimePoint),
    /// Rejected at the given time.
    Rejected(TimePoint),
    /// No advance commitment (non-committed mechanisms).
    Uncommitted,
}

impl Decision {
    pub fn time(&self) -> Option<&TimePoint> {
        match self {
            Decision::Committed(t) | Decision::Rejected(t) => Some(t),
            Decision::Uncommitted => None,
        }
    }

    pub fn is_committed(&self) -> bool {
        matches!(self, Decision::Committed(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Decision::Committed(_) => "committed",
            Decision::Rejected(_) => "rejected",
            Decision::Uncommitted => "uncommitted",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobOutcome {
    pub decision: Decision,
    pub completed: bool,
    pub completion_time: Option<TimePoint>,
    /// When the job learns its fate.
    pub notification: TimePoint,
    pub processed: Duration,
    pub payment: Rational,
}

impl JobOutcome {
    /// Whether the allocation rule grants the job: committed for committed
    /// mechanisms, completed otherwise.
    pub fn accepted(&self) -> bool {
        match self.decision {
            Decision::Committed(_) => true,
            Decision::Rejected(_) => false,
            Decision::Uncommitted => self.completed,
        }
    }

    pub fn broken_commitment(&self) -> bool {
        self.decision.is_committed() && !self.completed
    }
}

/// Result of running a mechanism on an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MechanismRun {
    pub trace: ScheduleTrace,
    pub outcomes: Vec<JobOutcome>,
    /// Messages from the mechanism's own invariant audit.
    pub invariant_violations: Vec<String>,
}

impl MechanismRun {
    /// Total value of completed jobs.
    pub fn completed_value(&self, instance: &Instance) -> Rational {
        self.outcomes
            .iter()
            .zip(instance.jobs())
            .filter(|(o, _)| o.completed)
            .map(|(_, j)| j.value.clone())
            .sum()
    }

    pub fn broken_commitments(&self) -> usize {
        self.outcomes.iter().filter(|o| o.broken_commitment()).count()
    }

    pub fn completed_set(&self) -> BTreeSet<usize> {
        self.outcomes.iter().enumerate().filter(|(_, o)| o.completed).map(|(i, _)| i).collect()
    }
}
