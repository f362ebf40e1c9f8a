//! Hand-built instances that exhibit specific behaviour of the mechanisms.

use crate::model::{Instance, Job};
use crate::noncommitted::AtParams;
use crate::rational::{int, q, Rational};

/// Slackness of every job in [`baseline_counterexample`].
pub fn baseline_counterexample_slackness() -> Rational {
    int(12)
}

/// Parameters the baseline counterexample is tuned for: `gamma = 2`, `mu = 3`.
pub fn baseline_counterexample_params() -> AtParams {
    AtParams::new(int(2), int(3)).expect("valid parameters")
}

/// Counterexample to truthfulness of the density-threshold baseline.
///
/// A blocker `H` occupies the server on `[0, 38)`, so `A` starts at 38.
/// `B` (density 2) arrives at 79/2 and twelve `C` jobs (density 4) at 41.
/// With `rho_a < 1` B preempts A, the C jobs cannot preempt B and reach their
/// start cutoff 59 before B ends at 59.125, so A resumes and completes at
/// 62.875. With `rho_a = 1` B cannot preempt A, the C jobs can, and A
/// collects only 5 of its 21/4 units by its deadline 63.
pub fn baseline_counterexample(rho_a: &Rational) -> Instance {
    let mut jobs = vec![
        Job::new("A", rho_a * q(21, 4), q(21, 4), int(0), int(63)),
        Job::new("B", q(157, 4), q(157, 8), q(79, 2), int(275)),
        Job::new("H", int(1024 * 38), int(38), int(0), int(456)),
    ];
    for i in 1..=12 {
        jobs.push(Job::new(format!("C{i:02}"), int(8), int(2), int(41), int(65)));
    }
    Instance::new(jobs).expect("valid instance")
}

/// Two-job instance where a committed reduction with public arrivals can be
/// gamed: job 1 `<1, 1, a1, 8>` and job 2 `<10, 2, 0, 100>`.
pub fn arrival_exhibit(arrival_of_job_1: &Rational) -> Instance {
    Instance::new(vec![
        Job::new("1", int(1), int(1), arrival_of_job_1.clone(), int(8)),
        Job::new("2", int(10), int(2), int(0), int(100)),
    ])
    .expect("valid instance")
}

/// Variant of [`arrival_exhibit`] with job 1's deadline moved to 32 so that
/// the instance has slackness 32, enough for the phantom mechanism at
/// `sigma = 2` for every declared arrival in `[0, 8]`.
pub fn phantom_arrival_exhibit(arrival_of_job_1: &Rational) -> Instance {
    Instance::new(vec![
        Job::new("1", int(1), int(1), arrival_of_job_1.clone(), int(32)),
        Job::new("2", int(10), int(2), int(0), int(100)),
    ])
    .expect("valid instance")
}
