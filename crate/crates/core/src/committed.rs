//! Committed (responsive) schedulers built from a non-committed simulator:
//! the single-server reduction, its non-migratory and migratory multi-server
//! forms, and the phantom-interval mechanism that is truthful in every
//! coordinate including arrival time.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::engine::{simulate, Control, Mechanism, SimRun};
use crate::error::{Error, Result};
use crate::feasibility::{edf_global, edf_single};
use crate::model::{Decision, Instance, Job, JobId, JobOutcome, MechanismRun, ScheduleTrace};
use crate::noncommitted::{AtParams, AtScheduler, PreemptionRule};
use crate::rational::{ceil_int, floor_int, format_rational, int, pow_i, q, Rational, TimePoint};

/// `2(3 + 2 sqrt 2)` rounded as `2 * 5.828`.
pub fn migratory_factor() -> Rational {
    q(11656, 1000)
}

/// Non-committed scheduler used as the simulator of a reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inner {
    /// Class preemption.
    At(AtParams),
    /// Density-threshold baseline (not monotone).
    Greedy(AtParams),
}

impl Inner {
    fn build(&self, instance: &Instance, allow_migration: bool) -> AtScheduler {
        match self {
            Inner::At(p) => AtScheduler::new(instance, p.clone(), PreemptionRule::Class, allow_migration),
            Inner::Greedy(p) => AtScheduler::new(instance, p.clone(), PreemptionRule::Threshold, allow_migration),
        }
    }
}

/// Proxy fed to the simulator: `<v, factor * D / omega, a, d - omega (d - a)>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VirtualType {
    pub value: Rational,
    pub demand: Rational,
    pub arrival: TimePoint,
    pub deadline: TimePoint,
}

fn check_omega(omega: &Rational) -> Result<()> {
    if *omega <= Rational::zero() || *omega >= Rational::one() {
        return Err(Error::InvalidParams(format!("omega = {} must lie in (0, 1)", format_rational(omega))));
    }
    Ok(())
}

pub fn virtualize(job: &Job, omega: &Rational, factor: &Rational) -> Result<VirtualType> {
    check_omega(omega)?;
    if *factor < Rational::one() {
        return Err(Error::InvalidParams("demand factor must be at least 1".into()));
    }
    let deadline = &job.deadline - omega * job.window();
    let demand = factor * &job.demand / omega;
    if demand > &deadline - &job.arrival {
        return Err(Error::InfeasibleVirtualDemand(job.id.clone()));
    }
    Ok(VirtualType { value: job.value.clone(), demand, arrival: job.arrival.clone(), deadline })
}

fn virtual_instance(instance: &Instance, omega: &Rational, factor: &Rational) -> Result<Instance> {
    let jobs = instance
        .jobs()
        .iter()
        .map(|j| {
            let v = virtualize(j, omega, factor)?;
            Ok(Job { id: j.id.clone(), value: v.value, demand: v.demand, arrival: v.arrival, deadline: v.deadline })
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(jobs)
}

/// Least slackness at which every virtual demand fits its virtual window:
/// `factor / (omega (1 - omega))`.
pub fn reduction_threshold(omega: &Rational, factor: &Rational) -> Rational {
    factor / (omega * (Rational::one() - omega))
}

fn require_slackness(instance: &Instance, threshold: &Rational, strict: bool) -> Result<()> {
    if instance.is_empty() {
        return Ok(());
    }
    let s = instance.slackness()?;
    let ok = if strict { s > *threshold } else { s >= *threshold };
    if !ok {
        return Err(Error::Domain(format!(
            "slackness {} must be {} {}",
            format_rational(&s),
            if strict { "above" } else { "at least" },
            format_rational(threshold)
        )));
    }
    Ok(())
}

/// Real-server execution of admitted jobs, each released at `release[j]`.
struct Admission {
    release: Vec<Option<TimePoint>>,
    /// Server each admitted job is pinned to, when execution is partitioned.
    pinned: Option<Vec<Option<usize>>>,
}

fn admitted_instance(instance: &Instance, release: &[Option<TimePoint>], keep: impl Fn(usize) -> bool) -> (Instance, Vec<usize>) {
    let mut index = Vec::new();
    let mut jobs = Vec::new();
    for (j, r) in release.iter().enumerate() {
        if let Some(r) = r {
            if keep(j) {
                let job = instance.job(j);
                index.push(j);
                jobs.push(Job { arrival: r.clone(), ..job.clone() });
            }
        }
    }
    (Instance::new(jobs).expect("admitted windows hold their demand"), index)
}

struct RealRun {
    trace: ScheduleTrace,
    completion: Vec<Option<TimePoint>>,
    processed: Vec<Rational>,
}

fn execute(instance: &Instance, servers: usize, admission: &Admission) -> Result<RealRun> {
    let n = instance.len();
    let mut out = RealRun {
        trace: ScheduleTrace::new(servers),
        completion: vec![None; n],
        processed: vec![Rational::zero(); n],
    };
    let mut absorb = |sim: SimRun, index: &[usize], lane: Option<usize>| {
        for (k, &j) in index.iter().enumerate() {
            out.completion[j] = sim.completion[k].clone();
            out.processed[j] = sim.processed[k].clone();
        }
        for (i, segs) in sim.trace.servers.into_iter().enumerate() {
            let target = lane.unwrap_or(i);
            for s in segs {
                out.trace.push(target, s.start, s.end, index[s.job]);
            }
        }
    };
    match &admission.pinned {
        None => {
            let (sub, index) = admitted_instance(instance, &admission.release, |_| true);
            absorb(edf_global(&sub, servers)?, &index, None);
        }
        Some(pins) => {
            for server in 0..servers {
                let (sub, index) = admitted_instance(instance, &admission.release, |j| pins[j] == Some(server));
                absorb(edf_single(&sub)?, &index, Some(server));
            }
        }
    }
    Ok(out)
}

/// A committed run together with its simulator run.
pub struct CommittedDetail {
    pub run: MechanismRun,
    pub simulator: SimRun,
    /// Release on the real servers for admitted jobs.
    pub release: Vec<Option<TimePoint>>,
}

fn assemble(instance: &Instance, decisions: Vec<Decision>, real: RealRun, violations: Vec<String>) -> MechanismRun {
    let outcomes = decisions
        .into_iter()
        .enumerate()
        .map(|(j, decision)| JobOutcome {
            notification: decision.time().cloned().unwrap_or_else(|| instance.job(j).deadline.clone()),
            decision,
            completed: real.completion[j].is_some(),
            completion_time: real.completion[j].clone(),
            processed: real.processed[j].clone(),
            payment: Rational::zero(),
        })
        .collect();
    MechanismRun { trace: real.trace, outcomes, invariant_violations: violations }
}

fn reduction(
    instance: &Instance,
    omega: &Rational,
    servers: usize,
    inner: &Inner,
    factor: Rational,
    migratory: bool,
) -> Result<CommittedDetail> {
    check_omega(omega)?;
    require_slackness(instance, &reduction_threshold(omega, &factor), false)?;
    let virt = virtual_instance(instance, omega, &factor)?;
    let mut sim_mech = inner.build(&virt, migratory);
    let simulator = simulate(&virt, servers, &mut sim_mech)?;

    let mut decisions = Vec::with_capacity(instance.len());
    let mut release = vec![None; instance.len()];
    let mut pins = vec![None; instance.len()];
    for j in 0..instance.len() {
        let virtual_deadline = virt.job(j).deadline.clone();
        match &simulator.completion[j] {
            Some(t) => {
                decisions.push(Decision::Committed(t.clone()));
                release[j] = Some(virtual_deadline);
                if !migratory {
                    let used = simulator.trace.servers_of(j);
                    if used.len() != 1 {
                        return Err(Error::ContractBreach(format!(
                            "job {} migrated between virtual servers",
                            instance.job(j).id
                        )));
                    }
                    pins[j] = used.into_iter().next();
                }
            }
            None => decisions.push(Decision::Rejected(virtual_deadline)),
        }
    }
    let admission = Admission { release: release.clone(), pinned: (!migratory).then_some(pins) };
    let real = execute(instance, servers, &admission)?;
    let run = assemble(instance, decisions, real, simulator.invariant_violations.clone());
    Ok(CommittedDetail { run, simulator, release })
}

/// Single server. Requires slackness at least `1 / (omega (1 - omega))`.
pub fn run_committed_single_detail(instance: &Instance, omega: &Rational, inner: &Inner) -> Result<CommittedDetail> {
    reduction(instance, omega, 1, inner, Rational::one(), false)
}

pub fn run_committed_single(instance: &Instance, omega: &Rational, inner: &Inner) -> Result<MechanismRun> {
    run_committed_single_detail(instance, omega, inner).map(|d| d.run)
}

/// Each virtual server feeds the real server with the same index; the inner
/// scheduler runs with migration disabled.
pub fn run_committed_nonmigratory(
    instance: &Instance,
    omega: &Rational,
    servers: usize,
    inner: &Inner,
) -> Result<MechanismRun> {
    reduction(instance, omega, servers, inner, Rational::one(), false).map(|d| d.run)
}

/// Demands inflated by [`migratory_factor`]; admitted jobs go to global EDF.
/// Requires slackness at least `11.656 / (omega (1 - omega))`.
pub fn run_committed_migratory(
    instance: &Instance,
    omega: &Rational,
    servers: usize,
    inner: &Inner,
) -> Result<MechanismRun> {
    reduction(instance, omega, servers, inner, migratory_factor(), true).map(|d| d.run)
}

/// Minimal integer `k` (possibly negative) with `2^k >= 2 sigma D`.
pub fn k_min(demand: &Rational, sigma: &Rational) -> i64 {
    let target = int(2) * sigma * demand;
    let two = int(2);
    let mut k = 0i64;
    if target > Rational::one() {
        while pow_i(&two, k) < target {
            k += 1;
        }
    } else {
        while pow_i(&two, k - 1) >= target {
            k -= 1;
        }
    }
    k
}

/// Maximal aligned intervals of `[a, d]` at levels `k >= k_j`, in time order.
/// An interval `[t 2^k, (t+1) 2^k]` is aligned when it and its equal-length
/// successor both lie in the window.
pub fn aligned_intervals(arrival: &Rational, deadline: &Rational, k_j: i64) -> Vec<(Rational, Rational)> {
    let two = int(2);
    let window = deadline - arrival;
    let mut top = k_j;
    if int(2) * pow_i(&two, top) > window {
        return Vec::new();
    }
    while int(2) * pow_i(&two, top + 1) <= window {
        top += 1;
    }
    let mut out: Vec<(Rational, Rational)> = Vec::new();
    let mut covered: Option<(Rational, Rational)> = None;
    for k in (k_j..=top).rev() {
        let len = pow_i(&two, k);
        let lo = ceil_int(&(arrival / &len));
        let hi = floor_int(&(deadline / &len)) - BigInt::from(2);
        let mut t = lo;
        while t <= hi {
            let start = Rational::from_integer(t.clone()) * &len;
            let end = &start + &len;
            if let Some((c0, c1)) = &covered {
                if start >= *c0 && end <= *c1 {
                    // Jump past the covered stretch.
                    t = floor_int(&(c1 / &len));
                    continue;
                }
            }
            out.push((start, end));
            t += 1;
        }
        let lo_all = out.iter().map(|(s, _)| s.clone()).min();
        let hi_all = out.iter().map(|(_, e)| e.clone()).max();
        covered = lo_all.zip(hi_all);
    }
    out.sort();
    out
}

/// Drops phantoms of jobs that already have a completed phantom.
pub struct PhantomFilter<M> {
    inner: M,
    owner: Vec<usize>,
    done: Vec<bool>,
}

impl<M: Mechanism> PhantomFilter<M> {
    pub fn new(inner: M, owner: Vec<usize>, jobs: usize) -> Self {
        PhantomFilter { inner, owner, done: vec![false; jobs] }
    }
}

impl<M: Mechanism> Mechanism for PhantomFilter<M> {
    fn on_arrival(&mut self, job: usize, ctl: &mut Control<'_>) {
        if !self.done[self.owner[job]] {
            self.inner.on_arrival(job, ctl);
        }
    }

    fn on_completion(&mut self, job: usize, server: usize, ctl: &mut Control<'_>) {
        self.done[self.owner[job]] = true;
        self.inner.on_completion(job, server, ctl);
    }

    fn on_expiry(&mut self, job: usize, server: usize, ctl: &mut Control<'_>) {
        self.inner.on_expiry(job, server, ctl);
    }

    fn audit(&mut self, ctl: &Control<'_>) -> Vec<String> {
        self.inner.audit(ctl)
    }
}

/// Phantom plan of one job: its simulation intervals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhantomPlan {
    pub k: i64,
    pub intervals: Vec<(Rational, Rational)>,
}

impl PhantomPlan {
    /// When the job learns its fate at the latest.
    pub fn horizon(&self, job: &Job) -> TimePoint {
        self.intervals.last().map(|(_, b)| b.clone()).unwrap_or_else(|| job.arrival.clone())
    }
}

/// Demand inflation of phantoms beyond the factor 2: 1 on one server,
/// [`migratory_factor`] on several.
pub fn phantom_inflation(servers: usize) -> Rational {
    if servers > 1 {
        migratory_factor()
    } else {
        Rational::one()
    }
}

pub fn phantom_plan(job: &Job, sigma: &Rational, servers: usize) -> PhantomPlan {
    let demand = phantom_inflation(servers) * &job.demand;
    let k = k_min(&demand, sigma);
    PhantomPlan { k, intervals: aligned_intervals(&job.arrival, &job.deadline, k) }
}

/// Minimal slackness for the phantom mechanism: `12 sigma`, times the
/// migratory factor on several servers.
pub fn phantom_threshold(sigma: &Rational, servers: usize) -> Rational {
    int(12) * sigma * phantom_inflation(servers)
}

pub struct PhantomDetail {
    pub run: MechanismRun,
    pub plans: Vec<PhantomPlan>,
    pub phantoms: Instance,
    pub owner: Vec<usize>,
    pub simulator: SimRun,
}

/// Phantom-interval mechanism with an explicit inner parameter choice.
pub fn run_phantom_detail(instance: &Instance, sigma: &Rational, servers: usize, params: &AtParams) -> Result<PhantomDetail> {
    if *sigma <= Rational::one() {
        return Err(Error::InvalidParams(format!("sigma = {} must exceed 1", format_rational(sigma))));
    }
    require_slackness(instance, &phantom_threshold(sigma, servers), false)?;
    let inflation = phantom_inflation(servers);
    let plans: Vec<PhantomPlan> = instance.jobs().iter().map(|j| phantom_plan(j, sigma, servers)).collect();
    let mut phantom_jobs = Vec::new();
    for (j, (job, plan)) in instance.jobs().iter().zip(&plans).enumerate() {
        for (i, (a, b)) in plan.intervals.iter().enumerate() {
            phantom_jobs.push((
                j,
                Job {
                    id: JobId(format!("{}#{:06}", job.id, i)),
                    value: job.value.clone(),
                    demand: int(2) * &inflation * &job.demand,
                    arrival: a.clone(),
                    deadline: b.clone(),
                },
            ));
        }
    }
    let phantoms = Instance::new(phantom_jobs.iter().map(|(_, p)| p.clone()).collect())?;
    let owner: Vec<usize> = phantoms
        .jobs()
        .iter()
        .map(|p| phantom_jobs.iter().find(|(_, q)| q.id == p.id).map(|(j, _)| *j).expect("phantom owner"))
        .collect();
    let inner = AtScheduler::new(&phantoms, params.clone(), PreemptionRule::Class, true);
    let mut mech = PhantomFilter::new(inner, owner.clone(), instance.len());
    let simulator = simulate(&phantoms, servers, &mut mech)?;

    let mut decisions: Vec<Decision> =
        instance.jobs().iter().zip(&plans).map(|(job, plan)| Decision::Rejected(plan.horizon(job))).collect();
    let mut release: Vec<Option<TimePoint>> = vec![None; instance.len()];
    for (p, done) in simulator.completion.iter().enumerate() {
        let Some(t) = done else { continue };
        let j = owner[p];
        let better = match &decisions[j] {
            Decision::Committed(prev) => t < prev,
            _ => true,
        };
        if better {
            decisions[j] = Decision::Committed(t.clone());
            release[j] = Some(phantoms.job(p).deadline.clone());
        }
    }
    let real = execute(instance, servers, &Admission { release, pinned: None })?;
    let run = assemble(instance, decisions, real, simulator.invariant_violations.clone());
    Ok(PhantomDetail { run, plans, phantoms, owner, simulator })
}

pub fn run_phantom_truthful(instance: &Instance, sigma: &Rational, servers: usize, params: &AtParams) -> Result<MechanismRun> {
    run_phantom_detail(instance, sigma, servers, params).map(|d| d.run)
}

/// Lead times of one decided job.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lead {
    /// `(d - t) / D`.
    pub additive: Rational,
    /// `(d - t) / (d - a)`.
    pub multiplicative: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Responsiveness {
    pub per_job: Vec<Lead>,
    pub min_additive: Option<Rational>,
    pub min_multiplicative: Option<Rational>,
}

pub fn responsiveness_report(instance: &Instance, run: &MechanismRun) -> Result<Responsiveness> {
    let mut per_job = Vec::with_capacity(instance.len());
    for (job, o) in instance.jobs().iter().zip(&run.outcomes) {
        let t = o.decision.time().ok_or_else(|| Error::Undecided(job.id.clone()))?;
        let lead = &job.deadline - t;
        per_job.push(Lead { additive: &lead / &job.demand, multiplicative: lead / job.window() });
    }
    let min_additive = per_job.iter().map(|l| l.additive.clone()).min();
    let min_multiplicative = per_job.iter().map(|l| l.multiplicative.clone()).min();
    Ok(Responsiveness { per_job, min_additive, min_multiplicative })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_trace;
    use crate::noncommitted::{params, recommended_params};

    fn job(id: &str, v: i64, d_: i64, a: i64, d: i64) -> Job {
        Job::new(id, int(v), int(d_), int(a), int(d))
    }

    fn half() -> Rational {
        q(1, 2)
    }

    #[test]
    fn virtualize_examples() {
        let v = virtualize(&job("2", 10, 2, 0, 100), &half(), &int(1)).unwrap();
        assert_eq!((v.value, v.demand, v.arrival, v.deadline), (int(10), int(4), int(0), int(50)));
        let v = virtualize(&job("1", 1, 1, 0, 8), &half(), &int(1)).unwrap();
        assert_eq!((v.demand, v.deadline), (int(2), int(4)));
        assert!(matches!(
            virtualize(&job("x", 1, 1, 0, 2), &half(), &int(1)),
            Err(Error::InfeasibleVirtualDemand(_))
        ));
        let v = virtualize(&job("m", 1, 1, 0, 100), &half(), &migratory_factor()).unwrap();
        assert_eq!(v.demand, q(23312, 1000));
    }

    fn section_example(arrival_of_job_1: i64) -> Instance {
        Instance::new(vec![job("1", 1, 1, arrival_of_job_1, 8), job("2", 10, 2, 0, 100)]).unwrap()
    }

    #[test]
    fn arrival_manipulation_example() {
        // Declaring arrival 4 leaves job 1 a virtual window of exactly its
        // virtual demand, so the simulator may not hold back any start slack.
        let inner = Inner::At(AtParams::new(int(2), int(1)).unwrap());
        let truthful = run_committed_single(&section_example(0), &half(), &inner).unwrap();
        assert_eq!(truthful.outcomes[0].decision, Decision::Rejected(int(4)));
        assert!(truthful.outcomes[1].decision.is_committed());
        assert!(truthful.outcomes[1].completed);

        let late = run_committed_single(&section_example(4), &half(), &inner).unwrap();
        let Decision::Committed(t) = &late.outcomes[0].decision else { panic!("job 1 should be committed") };
        assert!(*t <= int(6));
        assert!(late.outcomes[0].completed);
    }

    #[test]
    fn lone_job_commits_after_virtual_demand() {
        let inst = Instance::new(vec![job("1", 1, 1, 3, 13)]).unwrap();
        let run = run_committed_single(&inst, &half(), &Inner::At(params(2, 2))).unwrap();
        assert_eq!(run.outcomes[0].decision, Decision::Committed(int(5)));
        assert!(run.outcomes[0].completed);
        // Released at the virtual deadline 8.
        assert_eq!(run.trace.servers[0][0].start, int(8));
    }

    #[test]
    fn reductions_refuse_outside_their_domain() {
        let inst = Instance::new(vec![job("1", 1, 1, 0, 3)]).unwrap();
        assert!(matches!(run_committed_single(&inst, &half(), &Inner::At(params(2, 4))), Err(Error::Domain(_))));
        let inst = Instance::new(vec![job("1", 1, 1, 0, 40)]).unwrap();
        assert!(matches!(
            run_committed_migratory(&inst, &half(), 2, &Inner::At(params(2, 4))),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn nonmigratory_on_one_server_matches_single() {
        let inst = Instance::new(vec![job("1", 3, 1, 0, 9), job("2", 5, 2, 1, 20), job("3", 1, 1, 2, 12)]).unwrap();
        let inner = Inner::At(params(2, 2));
        let a = run_committed_single(&inst, &half(), &inner).unwrap();
        let b = run_committed_nonmigratory(&inst, &half(), 1, &inner).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn k_min_examples() {
        assert_eq!(k_min(&q(3, 2), &int(1)), 2);
        assert_eq!(k_min(&int(2), &int(1)), 2);
        assert_eq!(k_min(&q(1, 2), &int(1)), 0);
        assert_eq!(k_min(&q(1, 16), &int(1)), -3);
    }

    #[test]
    fn aligned_interval_worked_example() {
        let got = aligned_intervals(&int(9), &int(50), 2);
        let want: Vec<_> = [(12, 16), (16, 32), (32, 40), (40, 44)].iter().map(|&(a, b)| (int(a), int(b))).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn short_window_has_no_aligned_interval() {
        assert!(aligned_intervals(&int(1), &int(8), 2).is_empty());
        assert_eq!(aligned_intervals(&int(0), &int(8), 2), vec![(int(0), int(4))]);
    }

    #[test]
    fn phantom_lone_job_commits_after_first_phantom() {
        // sigma = 2, D = 1: k = 2 and the window [0, 24] splits into three
        // simulation intervals. The first phantom <1, 2, 0, 8> runs at once.
        let inst = Instance::new(vec![job("1", 1, 1, 0, 24)]).unwrap();
        let plan = phantom_plan(inst.job(0), &int(2), 1);
        assert_eq!(plan.intervals, vec![(int(0), int(8)), (int(8), int(16)), (int(16), int(20))]);
        let detail = run_phantom_detail(&inst, &int(2), 1, &params(2, 3)).unwrap();
        assert_eq!(detail.run.outcomes[0].decision, Decision::Committed(int(2)));
        assert!(detail.run.outcomes[0].completed);
        assert_eq!(detail.run.trace.servers[0][0].start, int(8));
        validate_trace(&inst, &detail.run.trace).unwrap();
    }

    #[test]
    fn later_phantoms_are_dropped_after_a_success() {
        let inst = Instance::new(vec![job("1", 1, 1, 0, 96)]).unwrap();
        let sigma = int(2);
        let detail = run_phantom_detail(&inst, &sigma, 1, &recommended_params(&sigma).unwrap()).unwrap();
        assert!(detail.plans[0].intervals.len() > 1);
        let completed = detail.simulator.completion.iter().filter(|c| c.is_some()).count();
        assert_eq!(completed, 1);
        let processed: Rational = detail.simulator.processed.iter().cloned().sum();
        assert_eq!(processed, int(2));
    }

    #[test]
    fn responsiveness_examples() {
        let inst = Instance::new(vec![job("1", 1, 1, 0, 10)]).unwrap();
        let mk = |d: Decision| MechanismRun {
            trace: ScheduleTrace::new(1),
            outcomes: vec![JobOutcome {
                decision: d,
                completed: false,
                completion_time: None,
                notification: int(0),
                processed: int(0),
                payment: int(0),
            }],
            invariant_violations: vec![],
        };
        let r = responsiveness_report(&inst, &mk(Decision::Rejected(int(8)))).unwrap();
        assert_eq!(r.per_job[0].additive, int(2));
        let r = responsiveness_report(&inst, &mk(Decision::Committed(int(0)))).unwrap();
        assert_eq!(r.min_multiplicative, Some(int(1)));
        assert!(responsiveness_report(&inst, &mk(Decision::Uncommitted)).is_err());
    }
}
