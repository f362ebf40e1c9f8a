//! Non-committed schedulers: the class-preemption mechanism for one or many
//! servers, and the density-threshold baseline it is compared against.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::engine::{simulate, Control, Mechanism, SimRun};
use crate::error::{Error, Result};
use crate::model::{class_of_density, Decision, Instance, JobOutcome, MechanismRun};
use crate::rational::{format_rational, int, Rational};

/// Class base `gamma` and latest-start factor `mu`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtParams {
    pub gamma: Rational,
    pub mu: Rational,
}

impl AtParams {
    /// Requires `gamma > 1` and `mu >= 1`. The competitive bound additionally
    /// needs [`AtParams::meets_bound_condition`].
    pub fn new(gamma: Rational, mu: Rational) -> Result<Self> {
        let one = Rational::one();
        if gamma <= one {
            return Err(Error::InvalidParams(format!("gamma = {} must exceed 1", format_rational(&gamma))));
        }
        if mu < one {
            return Err(Error::InvalidParams(format!("mu = {} must be at least 1", format_rational(&mu))));
        }
        Ok(AtParams { gamma, mu })
    }

    /// `(gamma - 1)(mu - 1) > 1`.
    pub fn meets_bound_condition(&self) -> bool {
        let one = Rational::one();
        (&self.gamma - &one) * (&self.mu - &one) > one
    }

    pub fn describe(&self) -> String {
        format!("gamma={};mu={}", format_rational(&self.gamma), format_rational(&self.mu))
    }
}

fn exact_cube_root(n: &BigInt) -> Option<BigInt> {
    let r = n.cbrt();
    (&r * &r * &r == *n).then_some(r)
}

/// `mu = r^2`, `gamma = r / (r - 1)` with `r` the cube root of `s`: exact for
/// perfect cubes, otherwise rounded down on a decimal grid fine enough to keep
/// `r > 1`. Rounding down keeps `mu < s`, and `(gamma - 1)(mu - 1) = r + 1 > 1`
/// holds for every `r > 1`.
pub fn recommended_params(s: &Rational) -> Result<AtParams> {
    if s <= &Rational::one() {
        return Err(Error::Domain(format!("slackness {} must exceed 1", format_rational(s))));
    }
    let r = match (exact_cube_root(s.numer()), exact_cube_root(s.denom())) {
        (Some(p), Some(q)) => Rational::new(p, q),
        _ => {
            let mut scale = BigInt::from(1_000_000);
            loop {
                let cube = &scale * &scale * &scale;
                let floor = (s * Rational::from_integer(cube)).floor().to_integer();
                let r = Rational::new(floor.cbrt(), scale.clone());
                if r > Rational::one() {
                    break r;
                }
                scale *= 1000;
            }
        }
    };
    let mu = &r * &r;
    let gamma = &r / (&r - Rational::one());
    let params = AtParams::new(gamma, mu)?;
    debug_assert!(params.meets_bound_condition() && params.mu < *s);
    Ok(params)
}

/// How a waiting job may displace the running one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreemptionRule {
    /// Strictly higher class.
    Class,
    /// Density strictly above `gamma` times the running density.
    Threshold,
}

/// Online state of the class-preemption scheduler (and of the baseline, which
/// differs only in its preemption test).
pub struct AtScheduler {
    params: AtParams,
    rule: PreemptionRule,
    allow_migration: bool,
    density: Vec<Rational>,
    class: Vec<i64>,
    cutoff: Vec<Rational>,
    live: BTreeSet<usize>,
    first_start: Vec<Option<Rational>>,
    ran_on: Vec<BTreeSet<usize>>,
    /// Server that last preempted each job; a job is partial there only.
    last_on: Vec<Option<usize>>,
    /// Start of the current stint, the `last_on` value it replaced and
    /// whether the server was new to the job, to undo a stint displaced in
    /// the instant it began.
    stint: Vec<Option<(Rational, Option<usize>, bool)>>,
    late_starts: Vec<String>,
}

impl AtScheduler {
    pub fn new(instance: &Instance, params: AtParams, rule: PreemptionRule, allow_migration: bool) -> Self {
        let density: Vec<Rational> = instance.jobs().iter().map(|j| j.density()).collect();
        let class = density.iter().map(|r| class_of_density(r, &params.gamma)).collect();
        let cutoff = instance.jobs().iter().map(|j| &j.deadline - &params.mu * &j.demand).collect();
        let n = instance.len();
        AtScheduler {
            params,
            rule,
            allow_migration,
            density,
            class,
            cutoff,
            live: BTreeSet::new(),
            first_start: vec![None; n],
            ran_on: vec![BTreeSet::new(); n],
            last_on: vec![None; n],
            stint: vec![None; n],
            late_starts: Vec::new(),
        }
    }

    pub fn class(&self, job: usize) -> i64 {
        self.class[job]
    }

    /// `J_i^P(t)`: waiting jobs last preempted on `server`, deadline not
    /// passed. A job that migrated away belongs to its new server only, so
    /// each server keeps at most one partial job per class.
    pub fn partial_set(&self, server: usize, ctl: &Control<'_>) -> Vec<usize> {
        self.live
            .iter()
            .copied()
            .filter(|&j| {
                !ctl.is_finished(j)
                    && ctl.server_of(j).is_none()
                    && self.last_on[j] == Some(server)
                    && *ctl.now() < ctl.job(j).deadline
            })
            .collect()
    }

    /// `J_i^E(t)`: waiting jobs never run on `server` whose latest start has
    /// not passed. Without migration only never-started jobs qualify.
    pub fn eligible_set(&self, server: usize, ctl: &Control<'_>) -> Vec<usize> {
        let now = ctl.now();
        self.live
            .iter()
            .copied()
            .filter(|&j| {
                !ctl.is_finished(j)
                    && ctl.server_of(j).is_none()
                    && !self.ran_on[j].contains(&server)
                    && (self.allow_migration || self.first_start[j].is_none())
                    && ctl.job(j).arrival <= *now
                    && *now <= self.cutoff[j]
            })
            .collect()
    }

    /// Highest density, then earlier first start (never-started last), then id.
    fn best(&self, candidates: &[usize]) -> Option<usize> {
        candidates.iter().copied().min_by(|&x, &y| {
            self.density[y]
                .cmp(&self.density[x])
                .then_with(|| match (&self.first_start[x], &self.first_start[y]) {
                    (Some(a), Some(b)) => a.cmp(b),
                    (Some(_), None) => std::cmp::Ordering::Less,
                    (None, Some(_)) => std::cmp::Ordering::Greater,
                    (None, None) => std::cmp::Ordering::Equal,
                })
                .then(x.cmp(&y))
        })
    }

    fn beats(&self, challenger: usize, incumbent: Option<usize>) -> bool {
        let Some(j) = incumbent else { return true };
        match self.rule {
            PreemptionRule::Class => self.class[challenger] > self.class[j],
            PreemptionRule::Threshold => self.density[challenger] > &self.params.gamma * &self.density[j],
        }
    }

    fn run(&mut self, server: usize, job: Option<usize>, ctl: &mut Control<'_>) {
        if let Some(prev) = ctl.running(server) {
            // A stint displaced in the instant it began never really ran.
            if let Some((start, before, fresh)) = self.stint[prev].take() {
                if start == *ctl.now() {
                    if fresh {
                        self.ran_on[prev].remove(&server);
                    }
                    self.last_on[prev] = before;
                    if self.first_start[prev].as_ref() == Some(ctl.now()) && ctl.processed(prev).is_zero() {
                        self.first_start[prev] = None;
                    }
                }
            }
        }
        if let Some(j) = job {
            if !self.ran_on[j].contains(&server) && *ctl.now() > self.cutoff[j] {
                self.late_starts.push(format!("job {} started on server {server} after its latest start", ctl.job(j).id));
            }
            self.first_start[j].get_or_insert_with(|| ctl.now().clone());
            let fresh = self.ran_on[j].insert(server);
            self.stint[j] = Some((ctl.now().clone(), self.last_on[j], fresh));
            self.last_on[j] = Some(server);
        }
        ctl.assign(server, job);
    }

    fn preemption_rule(&mut self, server: usize, ctl: &mut Control<'_>) {
        let candidates = self.eligible_set(server, ctl);
        if let Some(star) = self.best(&candidates) {
            if self.beats(star, ctl.running(server)) {
                self.run(server, Some(star), ctl);
            }
        }
    }

    /// Server whose running job has the lowest class (idle counts as lowest),
    /// ties to the later-started job, then the larger id, then lower index.
    fn lowest_server(&self, ctl: &Control<'_>) -> usize {
        (0..ctl.servers())
            .min_by(|&x, &y| {
                let key = |i: usize| ctl.running(i).map(|j| (self.class[j], self.first_start[j].clone(), j));
                match (key(x), key(y)) {
                    (None, None) => x.cmp(&y),
                    (None, Some(_)) => std::cmp::Ordering::Less,
                    (Some(_), None) => std::cmp::Ordering::Greater,
                    (Some((cx, sx, jx)), Some((cy, sy, jy))) => {
                        cx.cmp(&cy).then(sy.cmp(&sx)).then(jy.cmp(&jx)).then(x.cmp(&y))
                    }
                }
            })
            .expect("at least one server")
    }
}

impl Mechanism for AtScheduler {
    fn on_arrival(&mut self, job: usize, ctl: &mut Control<'_>) {
        self.live.insert(job);
        let server = self.lowest_server(ctl);
        self.preemption_rule(server, ctl);
    }

    fn on_completion(&mut self, job: usize, server: usize, ctl: &mut Control<'_>) {
        self.live.remove(&job);
        let partial = self.partial_set(server, ctl);
        let resume = self.best(&partial);
        self.run(server, resume, ctl);
        self.preemption_rule(server, ctl);
    }

    fn audit(&mut self, ctl: &Control<'_>) -> Vec<String> {
        let mut out = std::mem::take(&mut self.late_starts);
        if self.rule != PreemptionRule::Class {
            return out;
        }
        for server in 0..ctl.servers() {
            let running = ctl.running(server);
            let partial = self.partial_set(server, ctl);
            let eligible = self.eligible_set(server, ctl);
            for &j in partial.iter().chain(&eligible) {
                if self.beats(j, running) {
                    out.push(format!(
                        "server {server}: waiting job {} outranks the running job",
                        ctl.job(j).id
                    ));
                }
            }
            let mut classes = BTreeSet::new();
            for j in partial.iter().copied().chain(running) {
                if !classes.insert(self.class[j]) {
                    out.push(format!("server {server}: two partially processed jobs in class {}", self.class[j]));
                }
            }
        }
        out
    }
}

/// Outcomes of a non-committed run: decisions are deferred to the deadline.
pub fn uncommitted_outcomes(instance: &Instance, sim: SimRun) -> MechanismRun {
    let outcomes = instance
        .jobs()
        .iter()
        .enumerate()
        .map(|(j, job)| JobOutcome {
            decision: Decision::Uncommitted,
            completed: sim.completion[j].is_some(),
            completion_time: sim.completion[j].clone(),
            notification: job.deadline.clone(),
            processed: sim.processed[j].clone(),
            payment: Rational::zero(),
        })
        .collect();
    MechanismRun { trace: sim.trace, outcomes, invariant_violations: sim.invariant_violations }
}

pub fn run_at_multi(instance: &Instance, params: &AtParams, servers: usize) -> Result<MechanismRun> {
    let mut mech = AtScheduler::new(instance, params.clone(), PreemptionRule::Class, true);
    let sim = simulate(instance, servers, &mut mech)?;
    Ok(uncommitted_outcomes(instance, sim))
}

pub fn run_at_single(instance: &Instance, params: &AtParams) -> Result<MechanismRun> {
    run_at_multi(instance, params, 1)
}

pub fn run_greedy_baseline(instance: &Instance, params: &AtParams) -> Result<MechanismRun> {
    let mut mech = AtScheduler::new(instance, params.clone(), PreemptionRule::Threshold, true);
    let sim = simulate(instance, 1, &mut mech)?;
    Ok(uncommitted_outcomes(instance, sim))
}

/// `(gamma, mu)` used by tests and examples when a literal pair is wanted.
pub fn params(gamma: i64, mu: i64) -> AtParams {
    AtParams::new(int(gamma), int(mu)).expect("valid literal parameters")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_trace, Job};
    use crate::rational::q;

    fn job(id: &str, v: Rational, d_: i64, a: i64, d: i64) -> Job {
        Job::new(id, v, int(d_), int(a), int(d))
    }

    #[test]
    fn recommended_params_examples() {
        assert_eq!(recommended_params(&int(8)).unwrap(), AtParams { gamma: int(2), mu: int(4) });
        assert_eq!(recommended_params(&int(27)).unwrap(), AtParams { gamma: q(3, 2), mu: int(9) });
        let p = recommended_params(&int(10)).unwrap();
        assert!(p.mu < int(10));
        assert!(p.meets_bound_condition());
        assert!(recommended_params(&int(1)).is_err());
        let tight = recommended_params(&q(1_000_000_001, 1_000_000_000)).unwrap();
        assert!(tight.mu < q(1_000_000_001, 1_000_000_000));
    }

    #[test]
    fn single_job_completes() {
        let inst = Instance::new(vec![job("1", int(1), 1, 0, 8)]).unwrap();
        let run = run_at_single(&inst, &params(2, 4)).unwrap();
        assert!(run.outcomes[0].completed);
        assert_eq!(run.outcomes[0].notification, int(8));
        assert_eq!(run.outcomes[0].decision, Decision::Uncommitted);
    }

    #[test]
    fn same_class_arrival_does_not_preempt() {
        // Both class 0 under gamma = 2. Job 2 waits for job 1 and then starts
        // at 4, before its cutoff 20 - 4*2 = 12.
        let inst = Instance::new(vec![job("1", int(4), 4, 0, 40), job("2", int(3), 2, 1, 20)]).unwrap();
        let run = run_at_single(&inst, &params(2, 4)).unwrap();
        assert_eq!(run.outcomes[0].completion_time, Some(int(4)));
        assert_eq!(run.outcomes[1].completion_time, Some(int(6)));
        assert!(run.invariant_violations.is_empty());
    }

    #[test]
    fn higher_class_preempts_and_low_job_resumes() {
        let inst = Instance::new(vec![job("1", int(4), 4, 0, 40), job("2", int(8), 2, 1, 20)]).unwrap();
        let run = run_at_single(&inst, &params(2, 4)).unwrap();
        assert_eq!(run.outcomes[1].completion_time, Some(int(3)));
        assert_eq!(run.outcomes[0].completion_time, Some(int(6)));
        assert_eq!(run.trace.servers[0].len(), 3);
    }

    #[test]
    fn never_starts_after_cutoff() {
        // Job 2 (cutoff 10 - 4 = 6) waits behind a same-class job until 8.
        let inst = Instance::new(vec![job("1", int(8), 8, 0, 80), job("2", int(1), 1, 0, 10)]).unwrap();
        let run = run_at_single(&inst, &params(2, 4)).unwrap();
        assert!(!run.outcomes[1].completed);
        assert_eq!(run.outcomes[1].processed, int(0));
    }

    #[test]
    fn two_servers_take_two_jobs() {
        let inst = Instance::new(vec![job("1", int(1), 2, 0, 20), job("2", int(16), 2, 0, 20)]).unwrap();
        let run = run_at_multi(&inst, &params(2, 4), 2).unwrap();
        assert_eq!(run.outcomes[0].completion_time, Some(int(2)));
        assert_eq!(run.outcomes[1].completion_time, Some(int(2)));
        validate_trace(&inst, &run.trace).unwrap();
    }

    #[test]
    fn preempted_job_migrates_to_a_freed_server() {
        // Three jobs on two servers. Job 3 preempts job 2 on the later-started
        // server; when job 1 completes at 2 on server 0, job 2 (still before its
        // cutoff) migrates there.
        let inst = Instance::new(vec![
            job("1", int(2), 2, 0, 40),
            job("2", int(1), 4, 0, 40),
            job("3", int(64), 4, 1, 40),
        ])
        .unwrap();
        let run = run_at_multi(&inst, &params(2, 4), 2).unwrap();
        let reports = validate_trace(&inst, &run.trace).unwrap();
        assert!(reports.iter().all(|r| r.completed));
        assert_eq!(run.trace.servers_of(1).len(), 2);
        assert_eq!(run.outcomes[2].completion_time, Some(int(5)));
        assert_eq!(run.outcomes[1].completion_time, Some(int(5)));
    }

    #[test]
    fn without_migration_a_preempted_job_stays_home() {
        let inst = Instance::new(vec![
            job("1", int(2), 2, 0, 40),
            job("2", int(1), 4, 0, 40),
            job("3", int(64), 4, 1, 40),
        ])
        .unwrap();
        let mut mech = AtScheduler::new(&inst, params(2, 4), PreemptionRule::Class, false);
        let sim = simulate(&inst, 2, &mut mech).unwrap();
        assert_eq!(sim.trace.servers_of(1).len(), 1);
        assert_eq!(sim.completion[1], Some(int(8)));
    }

    #[test]
    fn baseline_preempts_only_past_threshold() {
        // Density 3 vs 2: same class is irrelevant here, 3 > 2*2 fails.
        let inst = Instance::new(vec![job("1", int(4), 2, 0, 40), job("2", int(3), 1, 1, 20)]).unwrap();
        let run = run_greedy_baseline(&inst, &params(2, 4)).unwrap();
        assert_eq!(run.outcomes[0].completion_time, Some(int(2)));
        let inst = Instance::new(vec![job("1", int(4), 2, 0, 40), job("2", int(5), 1, 1, 20)]).unwrap();
        let run = run_greedy_baseline(&inst, &params(2, 4)).unwrap();
        assert_eq!(run.outcomes[1].completion_time, Some(int(2)));
    }
}
