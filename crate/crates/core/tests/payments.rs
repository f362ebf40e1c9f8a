//! Critical payments against a brute-force scan of reported values.

mod common;

use sched_core::mechanism::MechanismSpec;
use sched_core::model::{class_of_density, Instance, Job};
use sched_core::payments::critical_payment;
use sched_core::rational::{int, pow_i, q, Rational};
use sched_core::workload::Workload;

fn accepted_at(inst: &Instance, j: usize, v: &Rational, spec: &MechanismSpec) -> bool {
    let job = Job { value: v.clone(), ..inst.job(j).clone() };
    spec.run(&inst.with_job(j, job).unwrap()).unwrap().outcomes[j].accepted()
}

fn contended(n: usize, s: &Rational, seed: u64) -> Instance {
    let mut w = Workload::new(n, s.clone(), seed);
    w.mean_interarrival = 0.25;
    w.mean_extra_slack = 0.0;
    w.generate().unwrap()
}

/// For accepted jobs, every value on a dense grid above the payment is
/// accepted and every value below it rejected.
fn check_sharpness(spec: &MechanismSpec, s: &Rational, seeds: std::ops::Range<u64>) -> usize {
    let mut priced = 0;
    for seed in seeds {
        let inst = contended(5, s, seed);
        let run = spec.run(&inst).unwrap();
        for j in 0..inst.len() {
            let v = &inst.job(j).value;
            let p = critical_payment(&inst, j, spec).unwrap();
            if !run.outcomes[j].accepted() {
                assert_eq!(p, int(0));
                continue;
            }
            assert!(&p <= v, "payment above the report");
            if p > int(0) {
                priced += 1;
            }
            for k in 1..=64 {
                let probe = v * q(k, 32);
                if probe == p {
                    continue;
                }
                assert_eq!(accepted_at(&inst, j, &probe, spec), probe > p, "seed {seed} job {j}: value {probe}, payment {p}");
            }
        }
    }
    priced
}

#[test]
fn at_payments_are_sharp() {
    let s = int(8);
    for servers in [1, 2] {
        let spec = MechanismSpec::auto("at", &s, servers, None, None).unwrap();
        assert!(check_sharpness(&spec, &s, 0..30) > 0, "no job paid anything on {servers} servers");
    }
}

#[test]
fn committed_payments_are_sharp() {
    let s = q(9, 2);
    let spec = MechanismSpec::auto("committed-single", &s, 1, None, None).unwrap();
    check_sharpness(&spec, &s, 0..20);
}

#[test]
fn phantom_payments_are_sharp() {
    let s = int(18);
    let spec = MechanismSpec::auto("phantom", &s, 1, None, None).unwrap();
    check_sharpness(&spec, &s, 0..20);
}

/// A job whose class lies below every other job's is accepted at every
/// lower value too: it preempts nobody and is preempted by everybody.
#[test]
fn acceptance_below_the_lowest_class_is_settled() {
    let s = int(8);
    let spec = MechanismSpec::auto("at", &s, 1, None, None).unwrap();
    let gamma = spec.class_params().gamma.clone();
    for seed in 0..40 {
        let inst = common::tiny_instance(seed, 4);
        let floor = inst.jobs().iter().map(|j| class_of_density(&j.density(), &gamma)).min().unwrap() - 1;
        for j in 0..inst.len() {
            let d = inst.job(j).demand.clone();
            let at_floor = pow_i(&gamma, floor) * &d;
            let verdict = accepted_at(&inst, j, &at_floor, &spec);
            for k in 1..=8 {
                let lower = &at_floor * q(k, 9);
                assert_eq!(accepted_at(&inst, j, &lower, &spec), verdict, "seed {seed} job {j}");
            }
        }
    }
}
