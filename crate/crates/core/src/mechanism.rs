//! Uniform handle over every mechanism in the crate, used by payments, the
//! monotonicity probe, ratio experiments and the CLI.

use num_traits::One;

use crate::committed::{
    migratory_factor, phantom_inflation, phantom_plan, phantom_threshold, reduction_threshold,
    run_committed_migratory, run_committed_nonmigratory, run_committed_single, run_phantom_truthful, Inner,
};
use crate::error::{Error, Result};
use crate::model::{Instance, Job, MechanismRun};
use crate::noncommitted::{recommended_params, run_at_multi, run_greedy_baseline, AtParams};
use crate::rational::{format_rational, int, q, Rational, TimePoint};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MechanismSpec {
    /// Class-preemption scheduler, non-committed.
    At { params: AtParams, servers: usize },
    /// Density-threshold baseline, one server.
    Greedy { params: AtParams },
    CommittedSingle { omega: Rational, inner: Inner },
    CommittedNonMigratory { omega: Rational, servers: usize, inner: Inner },
    CommittedMigratory { omega: Rational, servers: usize, inner: Inner },
    /// Phantom-interval mechanism with simulation slackness `sigma`.
    Phantom { sigma: Rational, servers: usize, params: AtParams },
}

/// Mechanism names accepted by [`MechanismSpec::auto`].
pub const MECHANISM_NAMES: [&str; 6] =
    ["at", "greedy-baseline", "committed-single", "committed-nonmigratory", "committed-migratory", "phantom"];

impl MechanismSpec {
    /// Builds a mechanism with parameters derived from the slackness `s`:
    /// recommended inner parameters at the slackness each simulator sees,
    /// `omega = 1/2` and `sigma = s / 12` (divided further by the migratory
    /// factor on several servers) unless given.
    pub fn auto(name: &str, s: &Rational, servers: usize, omega: Option<Rational>, sigma: Option<Rational>) -> Result<Self> {
        let omega = omega.unwrap_or_else(|| q(1, 2));
        let inner_at = |factor: Rational| -> Result<Inner> {
            let inner_s = s * &omega * (Rational::one() - &omega) / factor;
            Ok(Inner::At(recommended_params(&inner_s)?))
        };
        let spec = match name {
            "at" => MechanismSpec::At { params: recommended_params(s)?, servers },
            "greedy-baseline" => {
                if servers != 1 {
                    return Err(Error::InvalidParams("the baseline runs on one server".into()));
                }
                MechanismSpec::Greedy { params: recommended_params(s)? }
            }
            "committed-single" => {
                if servers != 1 {
                    return Err(Error::InvalidParams("committed-single runs on one server".into()));
                }
                MechanismSpec::CommittedSingle { inner: inner_at(Rational::one())?, omega }
            }
            "committed-nonmigratory" => {
                MechanismSpec::CommittedNonMigratory { inner: inner_at(Rational::one())?, omega, servers }
            }
            "committed-migratory" => {
                MechanismSpec::CommittedMigratory { inner: inner_at(migratory_factor())?, omega, servers }
            }
            "phantom" => {
                let sigma = sigma.unwrap_or_else(|| s / phantom_threshold(&Rational::one(), servers));
                MechanismSpec::Phantom { params: recommended_params(&sigma)?, sigma, servers }
            }
            other => return Err(Error::InvalidParams(format!("unknown mechanism {other}"))),
        };
        Ok(spec)
    }

    pub fn name(&self) -> &'static str {
        match self {
            MechanismSpec::At { .. } => "at",
            MechanismSpec::Greedy { .. } => "greedy-baseline",
            MechanismSpec::CommittedSingle { .. } => "committed-single",
            MechanismSpec::CommittedNonMigratory { .. } => "committed-nonmigratory",
            MechanismSpec::CommittedMigratory { .. } => "committed-migratory",
            MechanismSpec::Phantom { .. } => "phantom",
        }
    }

    pub fn servers(&self) -> usize {
        match self {
            MechanismSpec::At { servers, .. }
            | MechanismSpec::CommittedNonMigratory { servers, .. }
            | MechanismSpec::CommittedMigratory { servers, .. }
            | MechanismSpec::Phantom { servers, .. } => *servers,
            MechanismSpec::Greedy { .. } | MechanismSpec::CommittedSingle { .. } => 1,
        }
    }

    pub fn run(&self, instance: &Instance) -> Result<MechanismRun> {
        match self {
            MechanismSpec::At { params, servers } => run_at_multi(instance, params, *servers),
            MechanismSpec::Greedy { params } => run_greedy_baseline(instance, params),
            MechanismSpec::CommittedSingle { omega, inner } => run_committed_single(instance, omega, inner),
            MechanismSpec::CommittedNonMigratory { omega, servers, inner } => {
                run_committed_nonmigratory(instance, omega, *servers, inner)
            }
            MechanismSpec::CommittedMigratory { omega, servers, inner } => {
                run_committed_migratory(instance, omega, *servers, inner)
            }
            MechanismSpec::Phantom { sigma, servers, params } => run_phantom_truthful(instance, sigma, *servers, params),
        }
    }

    pub fn is_committed(&self) -> bool {
        !matches!(self, MechanismSpec::At { .. } | MechanismSpec::Greedy { .. })
    }

    /// Parameters of the class-based scheduler that decides acceptance.
    pub fn class_params(&self) -> &AtParams {
        match self {
            MechanismSpec::At { params, .. }
            | MechanismSpec::Greedy { params }
            | MechanismSpec::Phantom { params, .. } => params,
            MechanismSpec::CommittedSingle { inner, .. }
            | MechanismSpec::CommittedNonMigratory { inner, .. }
            | MechanismSpec::CommittedMigratory { inner, .. } => match inner {
                Inner::At(p) | Inner::Greedy(p) => p,
            },
        }
    }

    /// Demand whose density the deciding scheduler sees for `job`: the
    /// accepted values of `job` are determined by the class of `v / scale`.
    pub fn value_scale(&self, job: &Job) -> Rational {
        match self {
            MechanismSpec::At { .. } | MechanismSpec::Greedy { .. } => job.demand.clone(),
            MechanismSpec::CommittedSingle { omega, .. } | MechanismSpec::CommittedNonMigratory { omega, .. } => {
                &job.demand / omega
            }
            MechanismSpec::CommittedMigratory { omega, .. } => migratory_factor() * &job.demand / omega,
            MechanismSpec::Phantom { servers, .. } => int(2) * phantom_inflation(*servers) * &job.demand,
        }
    }

    /// Least per-job slackness the mechanism accepts.
    pub fn min_report_slack(&self) -> Rational {
        match self {
            MechanismSpec::At { .. } | MechanismSpec::Greedy { .. } => Rational::one(),
            MechanismSpec::CommittedSingle { omega, .. } | MechanismSpec::CommittedNonMigratory { omega, .. } => {
                reduction_threshold(omega, &Rational::one())
            }
            MechanismSpec::CommittedMigratory { omega, .. } => reduction_threshold(omega, &migratory_factor()),
            MechanismSpec::Phantom { sigma, servers, .. } => phantom_threshold(sigma, *servers),
        }
    }

    /// Latest time at which the mechanism decides `job`; `None` for
    /// non-committed mechanisms, which decide at the deadline.
    pub fn decision_horizon(&self, job: &Job) -> Option<TimePoint> {
        match self {
            MechanismSpec::At { .. } | MechanismSpec::Greedy { .. } => None,
            MechanismSpec::CommittedSingle { omega, .. }
            | MechanismSpec::CommittedNonMigratory { omega, .. }
            | MechanismSpec::CommittedMigratory { omega, .. } => Some(&job.deadline - omega * job.window()),
            MechanismSpec::Phantom { sigma, servers, .. } => Some(phantom_plan(job, sigma, *servers).horizon(job)),
        }
    }

    pub fn describe_params(&self) -> String {
        let p = self.class_params().describe();
        match self {
            MechanismSpec::At { .. } | MechanismSpec::Greedy { .. } => p,
            MechanismSpec::CommittedSingle { omega, .. }
            | MechanismSpec::CommittedNonMigratory { omega, .. }
            | MechanismSpec::CommittedMigratory { omega, .. } => format!("omega={};{p}", format_rational(omega)),
            MechanismSpec::Phantom { sigma, .. } => format!("sigma={};{p}", format_rational(sigma)),
        }
    }
}
