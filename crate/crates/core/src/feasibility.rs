//! Deadline feasibility: EDF on one or many servers, the latest-fit placement
//! used to argue admitted sets are schedulable, and an exact max-flow test for
//! preemptive migratory schedules.

use std::collections::{BTreeSet, VecDeque};

use num_traits::{One, Zero};

use crate::engine::{simulate, Control, Mechanism, SimRun};
use crate::error::{Error, Result};
use crate::model::{Instance, ScheduleTrace};
use crate::rational::{int, Duration, Rational, TimePoint};

/// Global EDF: at every instant the (at most) `C` released unfinished jobs
/// with earliest deadlines run, ties by id. A selected job keeps its server.
#[derive(Default)]
pub struct EdfScheduler {
    live: BTreeSet<usize>,
}

impl EdfScheduler {
    pub fn new() -> Self {
        Self::default()
    }

    fn reassign(&mut self, ctl: &mut Control<'_>) {
        self.live.retain(|&j| !ctl.is_finished(j));
        let now = ctl.now().clone();
        let mut ready: Vec<usize> = self.live.iter().copied().filter(|&j| ctl.job(j).deadline > now).collect();
        ready.sort_by(|&x, &y| ctl.job(x).deadline.cmp(&ctl.job(y).deadline).then(x.cmp(&y)));
        ready.truncate(ctl.servers());
        let chosen: BTreeSet<usize> = ready.iter().copied().collect();
        for server in 0..ctl.servers() {
            if let Some(j) = ctl.running(server) {
                if !chosen.contains(&j) {
                    ctl.assign(server, None);
                }
            }
        }
        for j in ready {
            if ctl.server_of(j).is_some() {
                continue;
            }
            let free = (0..ctl.servers()).find(|&i| ctl.running(i).is_none()).expect("a free server");
            ctl.assign(free, Some(j));
        }
    }
}

impl Mechanism for EdfScheduler {
    fn on_arrival(&mut self, job: usize, ctl: &mut Control<'_>) {
        self.live.insert(job);
        self.reassign(ctl);
    }

    fn on_completion(&mut self, _job: usize, _server: usize, ctl: &mut Control<'_>) {
        self.reassign(ctl);
    }
}

/// EDF on `servers` servers, with each job released at its arrival.
pub fn edf_global(instance: &Instance, servers: usize) -> Result<SimRun> {
    simulate(instance, servers, &mut EdfScheduler::new())
}

pub fn edf_single(instance: &Instance) -> Result<SimRun> {
    edf_global(instance, 1)
}

/// Places jobs in decreasing `release` order (then decreasing deadline, then
/// id), each into the latest `D` free units before its deadline. Fails when a
/// job would need time before its release.
pub fn latest_fit(instance: &Instance, release: &[TimePoint]) -> Result<ScheduleTrace> {
    assert_eq!(release.len(), instance.len());
    let mut order: Vec<usize> = (0..instance.len()).collect();
    order.sort_by(|&x, &y| {
        release[y]
            .cmp(&release[x])
            .then_with(|| instance.job(y).deadline.cmp(&instance.job(x).deadline))
            .then(x.cmp(&y))
    });
    // Busy intervals, disjoint and sorted by start.
    let mut busy: Vec<(Rational, Rational, usize)> = Vec::new();
    for j in order {
        let job = instance.job(j);
        let mut need = job.demand.clone();
        let mut cursor = job.deadline.clone();
        let mut pieces = Vec::new();
        for (s, e, _) in busy.iter().rev() {
            if need.is_zero() {
                break;
            }
            if *s >= cursor {
                continue;
            }
            let gap_start = if *e > release[j] { e.clone() } else { release[j].clone() };
            if cursor > gap_start {
                let take = (&cursor - &gap_start).min(need.clone());
                pieces.push((&cursor - &take, cursor.clone()));
                need -= &take;
            }
            cursor = s.clone().min(cursor);
            if cursor <= release[j] {
                break;
            }
        }
        if !need.is_zero() && cursor > release[j] {
            let take = (&cursor - &release[j]).min(need.clone());
            pieces.push((&cursor - &take, cursor.clone()));
            need -= &take;
        }
        if !need.is_zero() {
            return Err(Error::PlacementFailed(job.id.clone()));
        }
        busy.extend(pieces.into_iter().map(|(s, e)| (s, e, j)));
        busy.sort();
    }
    let mut trace = ScheduleTrace::new(1);
    for (s, e, j) in busy {
        trace.push(0, s, e, j);
    }
    Ok(trace)
}

/// A bare demand window, used where demands are rescaled beyond what a valid
/// job type allows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowJob {
    pub demand: Duration,
    pub release: TimePoint,
    pub deadline: TimePoint,
}

impl WindowJob {
    pub fn of(instance: &Instance) -> Vec<WindowJob> {
        instance
            .jobs()
            .iter()
            .map(|j| WindowJob { demand: j.demand.clone(), release: j.arrival.clone(), deadline: j.deadline.clone() })
            .collect()
    }
}

/// Exact preemptive-with-migration feasibility on `servers` servers.
pub fn feasible_migratory(jobs: &[WindowJob], servers: usize) -> bool {
    if jobs.iter().any(|j| &j.deadline - &j.release < j.demand) {
        return false;
    }
    if servers == 1 {
        return feasible_single(jobs);
    }
    max_flow_feasible(jobs, servers)
}

/// Single server: every window `[r, d]` spanned by a release and a deadline
/// must hold the demand of all jobs nested inside it.
fn feasible_single(jobs: &[WindowJob]) -> bool {
    for a in jobs {
        for b in jobs {
            if b.deadline <= a.release {
                continue;
            }
            let load: Rational = jobs
                .iter()
                .filter(|j| j.release >= a.release && j.deadline <= b.deadline)
                .map(|j| j.demand.clone())
                .sum();
            if load > &b.deadline - &a.release {
                return false;
            }
        }
    }
    true
}

/// Jobs x elementary intervals flow network with rational capacities.
fn max_flow_feasible(jobs: &[WindowJob], servers: usize) -> bool {
    let mut points: Vec<Rational> = jobs.iter().flat_map(|j| [j.release.clone(), j.deadline.clone()]).collect();
    points.sort();
    points.dedup();
    let intervals: Vec<(Rational, Rational)> =
        points.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    let n = jobs.len();
    let m = intervals.len();
    let source = n + m;
    let sink = source + 1;
    let mut net = FlowNet::new(n + m + 2);
    let mut total = Rational::zero();
    for (j, job) in jobs.iter().enumerate() {
        net.add(source, j, job.demand.clone());
        total += &job.demand;
        for (k, (s, e)) in intervals.iter().enumerate() {
            if *s >= job.release && *e <= job.deadline {
                net.add(j, n + k, e - s);
            }
        }
    }
    let c = int(servers as i64);
    for (k, (s, e)) in intervals.iter().enumerate() {
        net.add(n + k, sink, &c * (e - s));
    }
    net.max_flow(source, sink) == total
}

struct FlowNet {
    cap: Vec<Vec<Rational>>,
    adj: Vec<Vec<usize>>,
}

impl FlowNet {
    fn new(size: usize) -> Self {
        FlowNet { cap: vec![vec![Rational::zero(); size]; size], adj: vec![Vec::new(); size] }
    }

    fn add(&mut self, u: usize, v: usize, c: Rational) {
        if self.cap[u][v].is_zero() && self.cap[v][u].is_zero() {
            self.adj[u].push(v);
            self.adj[v].push(u);
        }
        self.cap[u][v] += c;
    }

    /// Edmonds-Karp; terminates on rationals because it only uses shortest paths.
    fn max_flow(&mut self, s: usize, t: usize) -> Rational {
        let mut flow = Rational::zero();
        loop {
            let mut prev = vec![usize::MAX; self.cap.len()];
            prev[s] = s;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &v in &self.adj[u] {
                    if prev[v] == usize::MAX && self.cap[u][v] > Rational::zero() {
                        prev[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            if prev[t] == usize::MAX {
                return flow;
            }
            let mut bottleneck: Option<Rational> = None;
            let mut v = t;
            while v != s {
                let u = prev[v];
                let c = &self.cap[u][v];
                if bottleneck.as_ref().is_none_or(|b| c < b) {
                    bottleneck = Some(c.clone());
                }
                v = u;
            }
            let b = bottleneck.unwrap_or_else(Rational::one);
            let mut v = t;
            while v != s {
                let u = prev[v];
                self.cap[u][v] -= &b;
                self.cap[v][u] += &b;
                v = u;
            }
            flow += b;
        }
    }
}
