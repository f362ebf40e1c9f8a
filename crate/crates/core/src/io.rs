//! JSON interchange: instances, traces and outcome reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noncommitted::AtParams;
use crate::model::{Decision, Instance, Job, JobId, MechanismRun, ScheduleTrace};
use crate::rational::{format_rational, Exact, Rational};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    pub v: Exact,
    #[serde(rename = "D")]
    pub demand: Exact,
    pub a: Exact,
    pub d: Exact,
}

/// Class-scheduler parameters an instance was built for.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ParamsRecord {
    pub gamma: Exact,
    pub mu: Exact,
}

/// `{"servers": C, "jobs": [...]}` with rationals as strings, and optionally
/// `"params": {"gamma": .., "mu": ..}` for instances tuned to specific
/// parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(default = "default_servers")]
    pub servers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsRecord>,
    pub jobs: Vec<JobRecord>,
}

fn default_servers() -> usize {
    1
}

impl InstanceFile {
    pub fn from_instance(instance: &Instance, servers: usize) -> Self {
        let jobs = instance
            .jobs()
            .iter()
            .map(|j| JobRecord {
                id: j.id.0.clone(),
                v: Exact(j.value.clone()),
                demand: Exact(j.demand.clone()),
                a: Exact(j.arrival.clone()),
                d: Exact(j.deadline.clone()),
            })
            .collect();
        InstanceFile { servers, params: None, jobs }
    }

    pub fn to_instance(&self) -> Result<Instance> {
        if self.servers == 0 {
            return Err(Error::InvalidParams("servers must be at least 1".into()));
        }
        let jobs = self
            .jobs
            .iter()
            .map(|r| Job {
                id: JobId(r.id.clone()),
                value: r.v.0.clone(),
                demand: r.demand.0.clone(),
                arrival: r.a.0.clone(),
                deadline: r.d.0.clone(),
            })
            .collect();
        Instance::new(jobs)
    }

    pub fn at_params(&self) -> Result<Option<AtParams>> {
        self.params.as_ref().map(|p| AtParams::new(p.gamma.0.clone(), p.mu.0.clone())).transpose()
    }
}

pub fn parse_instance(text: &str) -> Result<(Instance, usize)> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let instance = file.to_instance()?;
    Ok((instance, file.servers))
}

pub fn instance_to_json(instance: &Instance, servers: usize) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(instance, servers)).expect("serializable")
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SegmentRecord {
    pub server: usize,
    pub start: Exact,
    pub end: Exact,
    pub job: String,
}

pub fn trace_segments(instance: &Instance, trace: &ScheduleTrace) -> Vec<SegmentRecord> {
    let mut out = Vec::new();
    for (server, lane) in trace.servers.iter().enumerate() {
        for seg in lane {
            out.push(SegmentRecord {
                server,
                start: Exact(seg.start.clone()),
                end: Exact(seg.end.clone()),
                job: instance.job(seg.job).id.0.clone(),
            });
        }
    }
    out
}

/// Rebuilds a trace from exported segments.
pub fn trace_from_segments(instance: &Instance, servers: usize, segments: &[SegmentRecord]) -> Result<ScheduleTrace> {
    let mut trace = ScheduleTrace::new(servers);
    for seg in segments {
        if seg.server >= servers {
            return Err(Error::InvalidParams(format!("segment on server {} of {servers}", seg.server)));
        }
        let job = instance
            .index_of(&JobId(seg.job.clone()))
            .ok_or_else(|| Error::UnknownJob(seg.job.clone()))?;
        trace.servers[seg.server].push(crate::model::Segment {
            start: seg.start.0.clone(),
            end: seg.end.0.clone(),
            job,
        });
    }
    Ok(trace)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub id: String,
    pub decision: String,
    pub decision_time: Option<Exact>,
    pub completed: bool,
    pub completion_time: Option<Exact>,
    pub notification: Exact,
    pub processed: Exact,
    pub payment: Exact,
    pub lead_additive: Option<Exact>,
    pub lead_multiplicative: Option<Exact>,
}

pub fn outcome_records(instance: &Instance, run: &MechanismRun) -> Vec<OutcomeRecord> {
    instance
        .jobs()
        .iter()
        .zip(&run.outcomes)
        .map(|(job, o)| {
            let t = o.decision.time();
            let lead = |t: &Rational| (&job.deadline - t) / &job.demand;
            let lead_mult = |t: &Rational| (&job.deadline - t) / job.window();
            OutcomeRecord {
                id: job.id.0.clone(),
                decision: o.decision.label().to_string(),
                decision_time: t.map(|t| Exact(t.clone())),
                completed: o.completed,
                completion_time: o.completion_time.clone().map(Exact),
                notification: Exact(o.notification.clone()),
                processed: Exact(o.processed.clone()),
                payment: Exact(o.payment.clone()),
                lead_additive: t.map(|t| Exact(lead(t))),
                lead_multiplicative: t.map(|t| Exact(lead_mult(t))),
            }
        })
        .collect()
}

#[derive(Serialize)]
pub struct RunReport {
    pub servers: usize,
    pub mechanism: String,
    pub completed_value: Exact,
    pub broken_commitments: usize,
    pub outcomes: Vec<OutcomeRecord>,
    pub segments: Vec<SegmentRecord>,
}

pub fn run_report(instance: &Instance, servers: usize, mechanism: &str, run: &MechanismRun) -> RunReport {
    RunReport {
        servers,
        mechanism: mechanism.to_string(),
        completed_value: Exact(run.completed_value(instance)),
        broken_commitments: run.broken_commitments(),
        outcomes: outcome_records(instance, run),
        segments: trace_segments(instance, &run.trace),
    }
}

/// Short human form of a decision, used in logs and test output.
pub fn describe_decision(d: &Decision) -> String {
    match d.time() {
        Some(t) => format!("{}@{}", d.label(), format_rational(t)),
        None => d.label().to_string(),
    }
}
