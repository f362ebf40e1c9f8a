//! Critical-value payments and a dominance fuzzer for allocation rules.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanism::MechanismSpec;
use crate::model::{class_of_density, Instance, Job, JobId};
use crate::rational::{format_rational, int, pow_i, q, Rational};

/// Instance the mechanism's decision for `job` depends on: for committed
/// mechanisms only jobs arriving by the decision horizon can matter.
fn decision_instance(instance: &Instance, job: usize, spec: &MechanismSpec) -> (Instance, usize) {
    let target = instance.job(job);
    match spec.decision_horizon(target) {
        None => (instance.clone(), job),
        Some(h) => {
            let cut = instance.filtered(|k| k.arrival <= h || k.id == target.id);
            let idx = cut.index_of(&target.id).expect("target kept");
            (cut, idx)
        }
    }
}

fn accepted_with_value(instance: &Instance, job: usize, value: &Rational, spec: &MechanismSpec) -> Result<bool> {
    let j = Job { value: value.clone(), ..instance.job(job).clone() };
    let inst = instance.with_job(job, j)?;
    Ok(spec.run(&inst)?.outcomes[job].accepted())
}

/// Values of `job` at which the allocation can change, inside
/// `[lo, hi]`: class boundaries of the job, and the points where its
/// density (as the deciding scheduler sees it) ties another job's density
/// or is a factor `gamma` away from it.
fn breakpoints(instance: &Instance, job: usize, spec: &MechanismSpec, lo: i64, hi: i64) -> Vec<Rational> {
    let gamma = &spec.class_params().gamma;
    let scale = spec.value_scale(instance.job(job));
    let low = pow_i(gamma, lo) * &scale;
    let high = pow_i(gamma, hi) * &scale;
    let mut points: BTreeSet<Rational> = (lo..=hi).map(|l| pow_i(gamma, l) * &scale).collect();
    for (k, other) in instance.jobs().iter().enumerate() {
        if k == job {
            continue;
        }
        let rho = &other.value / spec.value_scale(other);
        for m in -1..=1 {
            let v = &rho * pow_i(gamma, m) * &scale;
            if v > low && v < high {
                points.insert(v);
            }
        }
    }
    points.into_iter().collect()
}

/// Exact critical value of `job`: the infimum of reported values at which
/// the job is still accepted, all other fields of the report fixed.
///
/// Acceptance is evaluated at every breakpoint between class `m - 1` (with
/// `m` the least class present) and the class above the report, at one
/// point inside each gap, and at the report. These points cover every
/// distinct allocation, so the returned value is exact. It is the class
/// boundary `gamma^l * D` whenever the allocation depends on the value only
/// through its class. A job still accepted at the lowest probed value pays
/// zero, as does a rejected job.
pub fn critical_payment(instance: &Instance, job: usize, spec: &MechanismSpec) -> Result<Rational> {
    let (inst, j) = decision_instance(instance, job, spec);
    let base = spec.run(&inst)?;
    if !base.outcomes[j].accepted() {
        return Ok(Rational::zero());
    }
    let gamma = spec.class_params().gamma.clone();
    let reported = inst.job(j).value.clone();
    let class = |job: &Job| class_of_density(&(&job.value / spec.value_scale(job)), &gamma);
    let own = class(inst.job(j));
    let floor = inst.jobs().iter().map(class).min().expect("non-empty") - 1;
    let bps = breakpoints(&inst, j, spec, floor, own + 1);

    // (value, is_breakpoint) sorted by value.
    let mut probes: Vec<(Rational, bool)> = Vec::new();
    for (i, b) in bps.iter().enumerate() {
        probes.push((b.clone(), true));
        if let Some(next) = bps.get(i + 1) {
            probes.push(((b + next) / int(2), false));
        }
    }
    if !probes.iter().any(|(v, _)| *v == reported) {
        let pos = probes.partition_point(|(v, _)| *v < reported);
        probes.insert(pos, (reported.clone(), false));
    }

    let mut verdicts = Vec::with_capacity(probes.len());
    for (v, _) in &probes {
        let ok = if *v == reported { true } else { accepted_with_value(&inst, j, v, spec)? };
        verdicts.push(ok);
    }
    if let Some(first) = verdicts.iter().position(|&ok| ok) {
        if let Some(gap) = verdicts[first..].iter().position(|&ok| !ok) {
            let at = first + gap;
            return Err(Error::MonotonicityViolation(format!(
                "job {} accepted at value {} but rejected at higher value {}",
                inst.job(j).id,
                format_rational(&probes[first].0),
                format_rational(&probes[at].0)
            )));
        }
        if first == 0 {
            return Ok(Rational::zero());
        }
        // The first accepted probe is a breakpoint or the interior of the gap
        // just above one; either way the infimum is that breakpoint.
        let bp = probes[..=first].iter().rev().find(|(_, is_bp)| *is_bp).expect("first probe is a breakpoint");
        return Ok(bp.0.clone());
    }
    unreachable!("the report itself is accepted")
}

/// Critical payments for every job, in instance order.
pub fn all_payments(instance: &Instance, spec: &MechanismSpec) -> Result<Vec<Rational>> {
    (0..instance.len()).map(|j| critical_payment(instance, j, spec)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coordinate {
    Value,
    Demand,
    Arrival,
    Deadline,
}

impl Coordinate {
    pub const ALL: [Coordinate; 4] = [Coordinate::Value, Coordinate::Demand, Coordinate::Arrival, Coordinate::Deadline];
    /// Coordinates a mechanism with public arrival times may be probed on.
    pub const PRIVATE_WINDOW: [Coordinate; 3] = [Coordinate::Value, Coordinate::Demand, Coordinate::Deadline];
}

/// Direction of a report change relative to the true type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Higher value, lower demand, earlier arrival or later deadline.
    Dominating,
    Dominated,
}

/// A report change that broke monotonicity: an accepted job lost acceptance
/// under a dominating report, or a rejected job gained it under a dominated
/// one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeViolation {
    pub job: JobId,
    pub coordinate: Coordinate,
    pub direction: Direction,
    #[serde(with = "crate::rational::serde_rational")]
    pub original: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub perturbed: Rational,
    pub accepted_before: bool,
}

const VALUE_FACTORS: [(i64, i64); 5] = [(5, 4), (3, 2), (2, 1), (3, 1), (8, 1)];
const SHRINK: [(i64, i64); 5] = [(1, 4), (1, 2), (2, 3), (3, 4), (9, 10)];
const FRACTIONS: [(i64, i64); 4] = [(1, 8), (1, 4), (1, 2), (1, 1)];

fn pick(rng: &mut ChaCha8Rng, table: &[(i64, i64)]) -> Rational {
    let (n, d) = *table.choose(rng).expect("non-empty table");
    q(n, d)
}

/// One random change of `coord` in `direction`, keeping the job's own
/// slack at least `min_slack`; `None` if no such change exists.
fn perturb(job: &Job, coord: Coordinate, direction: Direction, min_slack: &Rational, rng: &mut ChaCha8Rng) -> Option<Job> {
    let mut out = job.clone();
    // Room to shrink the window or grow the demand without leaving the domain.
    let spare = job.window() - min_slack * &job.demand;
    match (coord, direction) {
        (Coordinate::Value, Direction::Dominating) => out.value = &job.value * pick(rng, &VALUE_FACTORS),
        (Coordinate::Value, Direction::Dominated) => out.value = &job.value / pick(rng, &VALUE_FACTORS),
        (Coordinate::Demand, Direction::Dominating) => out.demand = &job.demand * pick(rng, &SHRINK),
        (Coordinate::Demand, Direction::Dominated) => {
            let max = job.window() / min_slack;
            if max <= job.demand {
                return None;
            }
            out.demand = &job.demand + pick(rng, &FRACTIONS) * (max - &job.demand);
        }
        (Coordinate::Arrival, Direction::Dominating) => {
            if job.arrival.is_zero() {
                return None;
            }
            out.arrival = &job.arrival * (Rational::one() - pick(rng, &FRACTIONS));
        }
        (Coordinate::Arrival, Direction::Dominated) => {
            if spare <= Rational::zero() {
                return None;
            }
            out.arrival = &job.arrival + pick(rng, &FRACTIONS) * spare;
        }
        (Coordinate::Deadline, Direction::Dominating) => out.deadline = &job.deadline + pick(rng, &FRACTIONS) * job.window(),
        (Coordinate::Deadline, Direction::Dominated) => {
            if spare <= Rational::zero() {
                return None;
            }
            out.deadline = &job.deadline - pick(rng, &FRACTIONS) * spare;
        }
    }
    Some(out)
}

fn field(job: &Job, coord: Coordinate) -> &Rational {
    match coord {
        Coordinate::Value => &job.value,
        Coordinate::Demand => &job.demand,
        Coordinate::Arrival => &job.arrival,
        Coordinate::Deadline => &job.deadline,
    }
}

/// Fuzzes monotonicity of `spec` on `instance` over all four coordinates.
/// See [`monotonicity_probe_on`].
pub fn monotonicity_probe(instance: &Instance, spec: &MechanismSpec, trials: usize, seed: u64) -> Result<Vec<ProbeViolation>> {
    monotonicity_probe_on(instance, spec, trials, seed, &Coordinate::ALL)
}

/// Like [`monotonicity_probe_report`], keeping only the violations.
pub fn monotonicity_probe_on(
    instance: &Instance,
    spec: &MechanismSpec,
    trials: usize,
    seed: u64,
    coords: &[Coordinate],
) -> Result<Vec<ProbeViolation>> {
    monotonicity_probe_report(instance, spec, trials, seed, coords).map(|r| r.violations)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProbeReport {
    pub violations: Vec<ProbeViolation>,
    /// Mechanism runs performed, the unperturbed one included.
    pub runs: usize,
    /// Messages of the mechanism's own invariant audit, over all runs.
    pub audit_messages: Vec<String>,
}

/// Trial `i` perturbs job `i mod n` on coordinate `(i / n) mod |coords|`,
/// so every pair is covered once `trials >= n * |coords|`; the magnitude of
/// each change is drawn from a seeded generator. Accepted jobs receive a
/// dominating change and must stay accepted; rejected jobs receive a
/// dominated change and must stay rejected.
pub fn monotonicity_probe_report(
    instance: &Instance,
    spec: &MechanismSpec,
    trials: usize,
    seed: u64,
    coords: &[Coordinate],
) -> Result<ProbeReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = spec.run(instance)?;
    let min_slack = spec.min_report_slack();
    let n = instance.len();
    let mut report = ProbeReport { runs: 1, audit_messages: base.invariant_violations.clone(), ..ProbeReport::default() };
    for i in 0..trials {
        let j = i % n;
        let coord = coords[(i / n) % coords.len()];
        let before = base.outcomes[j].accepted();
        let direction = if before { Direction::Dominating } else { Direction::Dominated };
        // One sub-seed per trial keeps later trials independent of skips.
        let mut trial_rng = ChaCha8Rng::seed_from_u64(rng.gen());
        let job = instance.job(j);
        let Some(changed) = perturb(job, coord, direction, &min_slack, &mut trial_rng) else { continue };
        let perturbed = instance.with_job(j, changed.clone())?;
        let run = spec.run(&perturbed)?;
        report.runs += 1;
        report.audit_messages.extend(run.invariant_violations.iter().cloned());
        if run.outcomes[j].accepted() != before {
            report.violations.push(ProbeViolation {
                job: job.id.clone(),
                coordinate: coord,
                direction,
                original: field(job, coord).clone(),
                perturbed: field(&changed, coord).clone(),
                accepted_before: before,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noncommitted::params;
    use crate::scenarios::{baseline_counterexample, baseline_counterexample_params};

    fn job(id: &str, v: Rational, d_: i64, a: i64, d: i64) -> Job {
        Job::new(id, v, int(d_), int(a), int(d))
    }

    fn at(gamma: i64, mu: i64) -> MechanismSpec {
        MechanismSpec::At { params: params(gamma, mu), servers: 1 }
    }

    #[test]
    fn sole_job_pays_nothing() {
        let inst = Instance::new(vec![job("1", int(7), 1, 0, 10)]).unwrap();
        assert_eq!(critical_payment(&inst, 0, &at(2, 2)).unwrap(), int(0));
    }

    #[test]
    fn preempting_job_pays_next_class_boundary() {
        // "1" (density 1, class 0) runs from 0; "2" arrives at 1 and must start
        // immediately, so it completes only by preempting "1".
        let inst = Instance::new(vec![job("1", int(4), 4, 0, 40), job("2", int(10), 1, 1, 3)]).unwrap();
        let spec = at(2, 2);
        assert!(spec.run(&inst).unwrap().outcomes[1].completed);
        assert_eq!(critical_payment(&inst, 1, &spec).unwrap(), int(2));
        // The payment of "1" is zero: it is accepted at the lowest class.
        assert_eq!(critical_payment(&inst, 0, &spec).unwrap(), int(0));
    }

    #[test]
    fn rejected_job_pays_nothing() {
        let inst = Instance::new(vec![job("1", int(40), 4, 0, 4), job("2", int(1), 1, 1, 2)]).unwrap();
        let spec = at(2, 1);
        assert!(!spec.run(&inst).unwrap().outcomes[1].completed);
        assert_eq!(critical_payment(&inst, 1, &spec).unwrap(), int(0));
    }

    #[test]
    fn baseline_counterexample_breaks_payment_scan() {
        let spec = MechanismSpec::Greedy { params: baseline_counterexample_params() };
        let inst = baseline_counterexample(&q(1, 2));
        let a = inst.index_of(&JobId::new("A")).unwrap();
        assert!(matches!(critical_payment(&inst, a, &spec), Err(Error::MonotonicityViolation(_))));
    }

    #[test]
    fn baseline_counterexample_found_by_probe() {
        let spec = MechanismSpec::Greedy { params: baseline_counterexample_params() };
        for rho in [q(1, 2), int(1)] {
            let inst = baseline_counterexample(&rho);
            let found = monotonicity_probe_on(&inst, &spec, 60, 7, &[Coordinate::Value]).unwrap();
            assert!(found.iter().any(|v| v.job == JobId::new("A")), "rho {rho}");
        }
    }

    #[test]
    fn probe_is_deterministic() {
        let spec = MechanismSpec::Greedy { params: baseline_counterexample_params() };
        let inst = baseline_counterexample(&int(1));
        let a = monotonicity_probe(&inst, &spec, 200, 3).unwrap();
        let b = monotonicity_probe(&inst, &spec, 200, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn perturbations_respect_direction_and_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let j = Job::new("x", int(3), int(2), int(4), int(20));
        let m = int(4);
        for _ in 0..50 {
            for coord in Coordinate::ALL {
                if let Some(p) = perturb(&j, coord, Direction::Dominating, &m, &mut rng) {
                    assert!(p.value >= j.value && p.demand <= j.demand && p.arrival <= j.arrival && p.deadline >= j.deadline);
                    assert!(p.slack() >= m);
                }
                if let Some(p) = perturb(&j, coord, Direction::Dominated, &m, &mut rng) {
                    assert!(p.value <= j.value && p.demand >= j.demand && p.arrival >= j.arrival && p.deadline <= j.deadline);
                    assert!(p.slack() >= m);
                }
            }
        }
    }
}
