//! Test-only oracles, independent of the library's flow and EDF code.
#![allow(dead_code)]

use std::collections::HashMap;

use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sched_core::model::{Instance, Job};
use sched_core::rational::{q, Rational};

/// Integer slot data: times scaled by the common denominator.
struct Slots {
    release: Vec<usize>,
    deadline: Vec<usize>,
    demand: Vec<u16>,
    value: Vec<Rational>,
    horizon: usize,
}

fn to_slots(instance: &Instance) -> Slots {
    let mut den = num_bigint::BigInt::from(1);
    for j in instance.jobs() {
        for x in [&j.arrival, &j.deadline, &j.demand] {
            den = den.lcm(x.denom());
        }
    }
    let scale = Rational::from(den);
    let conv = |x: &Rational| (x * &scale).to_integer().to_usize().expect("small integer");
    let jobs = instance.jobs();
    let horizon = jobs.iter().map(|j| conv(&j.deadline)).max().unwrap_or(0);
    assert!(horizon <= 2000, "instance too fine for the slot oracle");
    Slots {
        release: jobs.iter().map(|j| conv(&j.arrival)).collect(),
        deadline: jobs.iter().map(|j| conv(&j.deadline)).collect(),
        demand: jobs.iter().map(|j| conv(&j.demand) as u16).collect(),
        value: jobs.iter().map(|j| j.value.clone()).collect(),
        horizon,
    }
}

/// Maximum completed value over all unit-slot schedules on `servers`
/// servers, by dynamic programming over (slot, remaining demands). Exact for
/// preemptive migratory scheduling once times are integral: integral flow
/// solutions exist and wrap-around packing splits them at integer points.
pub fn slot_dp_opt(instance: &Instance, servers: usize) -> Rational {
    let slots = to_slots(instance);
    let mut memo: HashMap<(usize, Vec<u16>), Rational> = HashMap::new();
    let start = slots.demand.clone();
    dp(&slots, servers, 0, start, &mut memo)
}

fn dp(s: &Slots, servers: usize, t: usize, mut rem: Vec<u16>, memo: &mut HashMap<(usize, Vec<u16>), Rational>) -> Rational {
    // Drop jobs that can no longer finish; remaining 0 means done or dead.
    for (j, r) in rem.iter_mut().enumerate() {
        if *r > 0 && (t >= s.deadline[j] || *r as usize > s.deadline[j] - t.max(s.release[j])) {
            *r = 0;
        }
    }
    if t >= s.horizon || rem.iter().all(|&r| r == 0) {
        return Rational::from_integer(0.into());
    }
    if let Some(v) = memo.get(&(t, rem.clone())) {
        return v.clone();
    }
    let avail: Vec<usize> = (0..rem.len()).filter(|&j| rem[j] > 0 && s.release[j] <= t && t < s.deadline[j]).collect();
    let k = servers.min(avail.len());
    let mut best = Rational::from_integer(0.into());
    // Running more jobs never hurts, so only full selections are explored.
    let mut pick = Vec::new();
    choose(&avail, k, 0, &mut pick, &mut |sel| {
        let mut next = rem.clone();
        let mut gained = Rational::from_integer(0.into());
        for &j in sel {
            next[j] -= 1;
            if next[j] == 0 {
                gained += &s.value[j];
            }
        }
        let v = gained + dp(s, servers, t + 1, next, memo);
        if v > best {
            best = v;
        }
    });
    memo.insert((t, rem), best.clone());
    best
}

fn choose(items: &[usize], k: usize, from: usize, pick: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if pick.len() == k {
        f(pick);
        return;
    }
    for i in from..items.len() {
        if items.len() - i < k - pick.len() {
            break;
        }
        pick.push(items[i]);
        choose(items, k, i + 1, pick, f);
        pick.pop();
    }
}

/// Whether every job of `instance` can complete, by the same slot DP.
pub fn slot_feasible(instance: &Instance, servers: usize) -> bool {
    slot_dp_opt(instance, servers) == instance.total_value()
}

/// Small instance on the half grid: arrivals in `[0, 6]`, demands in
/// `[1/2, 2]`, windows of `1..=3` times the demand, integer values.
pub fn tiny_instance(seed: u64, n: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs = (0..n)
        .map(|i| {
            let a = q(rng.gen_range(0..=12), 2);
            let d_ = q(rng.gen_range(1..=4), 2);
            let w = &d_ * q(rng.gen_range(2..=6), 2);
            Job::new(format!("t{i}"), q(rng.gen_range(1..=9), 1), d_, a.clone(), a + w)
        })
        .collect();
    Instance::new(jobs).expect("valid")
}

/// Every mechanism with a slackness inside its domain, as `(spec, s)`.
pub fn mechanism_zoo() -> Vec<(sched_core::mechanism::MechanismSpec, Rational)> {
    use sched_core::mechanism::MechanismSpec;
    use sched_core::rational::int;
    [
        ("at", 1, int(8)),
        ("at", 2, int(8)),
        ("at", 3, int(6)),
        ("greedy-baseline", 1, int(8)),
        ("committed-single", 1, q(9, 2)),
        ("committed-nonmigratory", 2, q(9, 2)),
        ("committed-migratory", 2, int(48)),
        ("phantom", 1, int(18)),
        ("phantom", 2, int(210)),
    ]
    .into_iter()
    .map(|(name, servers, s)| (MechanismSpec::auto(name, &s, servers, None, None).expect("in domain"), s))
    .collect()
}
