//! Exact offline optimum for small instances and empirical competitive ratios.

use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::feasibility::{feasible_migratory, WindowJob};
use crate::mechanism::MechanismSpec;
use crate::model::Instance;
use crate::rational::{format_rational, Rational};

/// Largest instance [`offline_opt`] accepts by default.
pub const DEFAULT_SIZE_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptSolution {
    pub value: Rational,
    /// Indices of an optimal feasible subset, ascending.
    pub witness: Vec<usize>,
}

struct Search {
    windows: Vec<WindowJob>,
    values: Vec<Rational>,
    /// `suffix[i]` = total value of jobs `i..`.
    suffix: Vec<Rational>,
    servers: usize,
    infeasible: HashSet<u32>,
    best: Rational,
    best_set: Vec<usize>,
    chosen: Vec<usize>,
}

impl Search {
    fn feasible(&mut self, mask: u32) -> bool {
        if self.infeasible.contains(&mask) {
            return false;
        }
        let jobs: Vec<WindowJob> = (0..self.windows.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| self.windows[i].clone())
            .collect();
        let ok = feasible_migratory(&jobs, self.servers);
        if !ok {
            self.infeasible.insert(mask);
        }
        ok
    }

    /// Include-first depth-first search in index order. Only strict
    /// improvements replace the incumbent, so among optimal subsets the
    /// lexicographically least index list wins.
    fn dfs(&mut self, i: usize, mask: u32, value: Rational) {
        if value > self.best {
            self.best = value.clone();
            self.best_set = self.chosen.clone();
        }
        if i == self.windows.len() || &value + &self.suffix[i] <= self.best {
            return;
        }
        let with = mask | (1 << i);
        if self.feasible(with) {
            self.chosen.push(i);
            let v = &value + &self.values[i];
            self.dfs(i + 1, with, v);
            self.chosen.pop();
        }
        self.dfs(i + 1, mask, value);
    }
}

/// Maximum total value of a subset that is feasible on `servers` servers
/// with preemption and migration.
pub fn offline_opt(instance: &Instance, servers: usize, size_cap: usize) -> Result<OptSolution> {
    let n = instance.len();
    let cap = size_cap.min(31);
    if n > cap {
        return Err(Error::SizeCap { n, cap });
    }
    let values: Vec<Rational> = instance.jobs().iter().map(|j| j.value.clone()).collect();
    let mut suffix = vec![Rational::zero(); n + 1];
    for i in (0..n).rev() {
        suffix[i] = &suffix[i + 1] + &values[i];
    }
    let mut search = Search {
        windows: WindowJob::of(instance),
        values,
        suffix,
        servers,
        infeasible: HashSet::new(),
        best: Rational::zero(),
        best_set: Vec::new(),
        chosen: Vec::new(),
    };
    search.dfs(0, 0, Rational::zero());
    Ok(OptSolution { value: search.best, witness: search.best_set })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ratio {
    Finite(Rational),
    /// The mechanism completed nothing while the optimum is positive.
    Infinite,
}

impl Ratio {
    pub fn at_most(&self, bound: &Rational) -> bool {
        match self {
            Ratio::Finite(r) => r <= bound,
            Ratio::Infinite => false,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(r) => f.write_str(&format_rational(r)),
            Ratio::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioReport {
    pub opt: OptSolution,
    pub mechanism_value: Rational,
    pub ratio: Ratio,
}

/// `OPT / value(mechanism)` on one instance, with the optimum taken over
/// migratory schedules on the mechanism's server count.
pub fn empirical_ratio(instance: &Instance, spec: &MechanismSpec) -> Result<RatioReport> {
    let run = spec.run(instance)?;
    ratio_of(instance, spec.servers(), run.completed_value(instance))
}

/// Ratio report for an externally obtained mechanism value.
pub fn ratio_of(instance: &Instance, servers: usize, mechanism_value: Rational) -> Result<RatioReport> {
    let opt = offline_opt(instance, servers, DEFAULT_SIZE_CAP)?;
    let ratio = if mechanism_value.is_zero() {
        if opt.value.is_zero() {
            Ratio::Finite(Rational::one())
        } else {
            Ratio::Infinite
        }
    } else {
        Ratio::Finite(&opt.value / &mechanism_value)
    };
    Ok(RatioReport { opt, mechanism_value, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Job;
    use crate::noncommitted::params;
    use crate::rational::{int, q};
    use crate::scenarios::arrival_exhibit;
    use crate::committed::Inner;

    fn job(id: &str, v: i64, d_: i64, a: i64, d: i64) -> Job {
        Job::new(id, int(v), int(d_), int(a), int(d))
    }

    #[test]
    fn jointly_feasible_takes_everything() {
        let inst = Instance::new(vec![job("1", 3, 1, 0, 4), job("2", 5, 2, 1, 6), job("3", 1, 1, 2, 9)]).unwrap();
        let opt = offline_opt(&inst, 1, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(opt.value, int(9));
        assert_eq!(opt.witness, vec![0, 1, 2]);
    }

    #[test]
    fn counting_identical_unit_jobs() {
        for c in 1..=3usize {
            let jobs = (0..=c).map(|i| job(&format!("{i}"), 7, 1, 0, 1)).collect();
            let inst = Instance::new(jobs).unwrap();
            let opt = offline_opt(&inst, c, DEFAULT_SIZE_CAP).unwrap();
            assert_eq!(opt.value, int(7 * c as i64));
            // Lexicographically least witness among the ties.
            assert_eq!(opt.witness, (0..c).collect::<Vec<_>>());
        }
    }

    #[test]
    fn size_cap_enforced() {
        let jobs = (0..5).map(|i| job(&format!("{i}"), 1, 1, 0, 10)).collect();
        let inst = Instance::new(jobs).unwrap();
        assert!(matches!(offline_opt(&inst, 1, 4), Err(Error::SizeCap { n: 5, cap: 4 })));
    }

    #[test]
    fn ratio_of_single_job_is_one() {
        let inst = Instance::new(vec![job("1", 2, 1, 0, 3)]).unwrap();
        let spec = MechanismSpec::At { params: params(2, 2), servers: 1 };
        assert_eq!(empirical_ratio(&inst, &spec).unwrap().ratio, Ratio::Finite(int(1)));
    }

    #[test]
    fn arrival_exhibit_ratio() {
        let spec = MechanismSpec::CommittedSingle { omega: q(1, 2), inner: Inner::At(crate::noncommitted::AtParams::new(int(2), int(1)).unwrap()) };
        let report = empirical_ratio(&arrival_exhibit(&int(0)), &spec).unwrap();
        assert_eq!(report.opt.value, int(11));
        assert_eq!(report.mechanism_value, int(10));
        assert_eq!(report.ratio, Ratio::Finite(q(11, 10)));
    }

    #[test]
    fn infinite_marker() {
        let inst = Instance::new(vec![job("1", 2, 1, 0, 3)]).unwrap();
        assert_eq!(ratio_of(&inst, 1, int(0)).unwrap().ratio, Ratio::Infinite);
        assert!(!Ratio::Infinite.at_most(&int(1000)));
    }
}
