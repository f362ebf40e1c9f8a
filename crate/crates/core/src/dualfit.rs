//! Dual certificates: step-function duals, exact feasibility checking, cost
//! evaluation and the demand-resizing transform.
//!
//! The dual has one `alpha_j >= 0` per job and one step function
//! `beta_i(t) >= 0` per server; the gap variables are fixed to zero. A dual
//! is feasible when `alpha_j + beta_i(t) >= rho_j` for every job, server and
//! time in the job's window. By weak duality its cost bounds the offline
//! optimum from above.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, JobId};
use crate::rational::{Exact, Rational, TimePoint};

/// Right-open piecewise-constant function: `points[k] = (t_k, v_k)` means
/// value `v_k` on `[t_k, t_{k+1})`. Zero before the first breakpoint; the
/// last value is zero, so the support is bounded.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepFunction {
    points: Vec<(TimePoint, Rational)>,
}

impl StepFunction {
    pub fn new(points: Vec<(TimePoint, Rational)>) -> Result<Self> {
        for w in points.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::InvalidParams("step breakpoints must be strictly increasing".into()));
            }
        }
        if points.iter().any(|(_, v)| v < &Rational::zero()) {
            return Err(Error::InvalidParams("step values must be non-negative".into()));
        }
        if points.last().is_some_and(|(_, v)| !v.is_zero()) {
            return Err(Error::InvalidParams("last step value must be zero".into()));
        }
        Ok(StepFunction { points })
    }

    pub fn zero() -> Self {
        StepFunction::default()
    }

    /// Value `c` on `[from, to)`, zero elsewhere.
    pub fn constant(from: TimePoint, to: TimePoint, c: Rational) -> Result<Self> {
        StepFunction::new(vec![(from, c), (to, Rational::zero())])
    }

    pub fn points(&self) -> &[(TimePoint, Rational)] {
        &self.points
    }

    pub fn value_at(&self, t: &TimePoint) -> Rational {
        let k = self.points.partition_point(|(p, _)| p <= t);
        if k == 0 {
            Rational::zero()
        } else {
            self.points[k - 1].1.clone()
        }
    }

    pub fn integral(&self) -> Rational {
        self.points.windows(2).map(|w| &w[0].1 * (&w[1].0 - &w[0].0)).sum()
    }

    /// Minimum over `[from, to)` and the earliest time attaining it.
    /// Requires `from < to`.
    pub fn min_on(&self, from: &TimePoint, to: &TimePoint) -> (Rational, TimePoint) {
        let mut best = (self.value_at(from), from.clone());
        for (t, v) in &self.points {
            if t > from && t < to && *v < best.0 {
                best = (v.clone(), t.clone());
            }
        }
        best
    }

    pub fn scaled(&self, f: &Rational) -> Self {
        StepFunction { points: self.points.iter().map(|(t, v)| (t.clone(), v * f)).collect() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DualSolution {
    /// Missing jobs have `alpha = 0`.
    pub alpha: BTreeMap<JobId, Rational>,
    /// One function per server; missing servers have `beta = 0`.
    pub beta: Vec<StepFunction>,
}

impl DualSolution {
    pub fn alpha_of(&self, id: &JobId) -> Rational {
        self.alpha.get(id).cloned().unwrap_or_else(Rational::zero)
    }

    fn beta_of(&self, server: usize) -> StepFunction {
        self.beta.get(server).cloned().unwrap_or_default()
    }

    /// `alpha_j = rho_j` for every job and `beta = 0`.
    pub fn densities(instance: &Instance) -> Self {
        let alpha = instance.jobs().iter().map(|j| (j.id.clone(), j.density())).collect();
        DualSolution { alpha, beta: Vec::new() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DualFile = serde_json::from_str(text)?;
        file.into_dual()
    }

    pub fn to_json(&self) -> String {
        let file = DualFile {
            alpha: self.alpha.iter().map(|(id, v)| (id.0.clone(), Exact(v.clone()))).collect(),
            beta: self
                .beta
                .iter()
                .map(|b| b.points.iter().map(|(t, v)| (Exact(t.clone()), Exact(v.clone()))).collect())
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }
}

/// `{"alpha": {id: "p/q"}, "beta": [[[t, v], ...] per server]}`.
#[derive(Serialize, Deserialize)]
struct DualFile {
    #[serde(default)]
    alpha: BTreeMap<String, Exact>,
    #[serde(default)]
    beta: Vec<Vec<(Exact, Exact)>>,
}

impl DualFile {
    fn into_dual(self) -> Result<DualSolution> {
        let mut alpha = BTreeMap::new();
        for (id, Exact(v)) in self.alpha {
            if v < Rational::zero() {
                return Err(Error::InvalidParams(format!("alpha of {id} is negative")));
            }
            alpha.insert(JobId::new(id), v);
        }
        let beta = self
            .beta
            .into_iter()
            .map(|pts| StepFunction::new(pts.into_iter().map(|(t, v)| (t.0, v.0)).collect()))
            .collect::<Result<_>>()?;
        Ok(DualSolution { alpha, beta })
    }
}

/// `sum_j D_j alpha_j + sum_i integral of beta_i`.
pub fn dual_cost(instance: &Instance, dual: &DualSolution) -> Rational {
    let alpha: Rational = instance.jobs().iter().map(|j| &j.demand * dual.alpha_of(&j.id)).sum();
    let beta: Rational = dual.beta.iter().map(StepFunction::integral).sum();
    alpha + beta
}

/// First violated dual constraint: job, server and earliest time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualViolation {
    pub job: JobId,
    pub server: usize,
    pub time: TimePoint,
    /// `rho_j - alpha_j - beta_i(time) > 0`.
    pub deficit: Rational,
}

/// Checks `alpha_j + beta_i(t) >= rho_j` for every job, every server
/// `i < servers` and every `t` in `[a_j, d_j)`. The constraint is needed
/// almost everywhere on the window only, so the right endpoint is excluded.
/// Jobs are scanned in id order, servers in index order.
#[allow(clippy::result_large_err)]
pub fn check_feasible(instance: &Instance, dual: &DualSolution, servers: usize) -> std::result::Result<(), DualViolation> {
    for job in instance.jobs() {
        let need = job.density() - dual.alpha_of(&job.id);
        if need <= Rational::zero() {
            continue;
        }
        for server in 0..servers {
            let (low, at) = dual.beta_of(server).min_on(&job.arrival, &job.deadline);
            if low < need {
                return Err(DualViolation { job: job.id.clone(), server, time: at, deficit: &need - low });
            }
        }
    }
    Ok(())
}

/// `(alpha / f, beta / f)`: feasible for the instance with demands `f D`
/// whenever the input is feasible for demands `D`.
pub fn resize(dual: &DualSolution, f: &Rational) -> Result<DualSolution> {
    if f <= &Rational::zero() {
        return Err(Error::InvalidParams("resize factor must be positive".into()));
    }
    let inv = Rational::one() / f;
    Ok(DualSolution {
        alpha: dual.alpha.iter().map(|(id, a)| (id.clone(), a * &inv)).collect(),
        beta: dual.beta.iter().map(|b| b.scaled(&inv)).collect(),
    })
}

/// Cost charged for a dual of the instance whose deadlines are stretched to
/// `d + f (d - a)`, once carried back to the original deadlines: only the
/// `beta` term grows, by `1 + f`.
pub fn stretched_cost(stretched: &Instance, dual: &DualSolution, f: &Rational) -> Rational {
    let alpha: Rational = stretched.jobs().iter().map(|j| &j.demand * dual.alpha_of(&j.id)).sum();
    let beta: Rational = dual.beta.iter().map(StepFunction::integral).sum();
    alpha + (Rational::one() + f) * beta
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certification {
    /// The instance's competitive ratio is at most this value.
    Certified(Rational),
    Rejected(DualViolation),
}

/// `dual_cost / mechanism_value` if the dual is feasible.
pub fn certify_ratio(instance: &Instance, dual: &DualSolution, mechanism_value: &Rational, servers: usize) -> Result<Certification> {
    if mechanism_value <= &Rational::zero() {
        return Err(Error::InvalidParams("mechanism value must be positive".into()));
    }
    Ok(match check_feasible(instance, dual, servers) {
        Ok(()) => Certification::Certified(dual_cost(instance, dual) / mechanism_value),
        Err(v) => Certification::Rejected(v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Job;
    use crate::rational::{int, q};

    fn inst() -> Instance {
        Instance::new(vec![
            Job::new("1", int(6), int(2), int(0), int(4)),
            Job::new("2", int(3), int(3), int(1), int(9)),
        ])
        .unwrap()
    }

    #[test]
    fn step_function_shape() {
        assert!(StepFunction::new(vec![(int(1), int(1)), (int(1), int(0))]).is_err());
        assert!(StepFunction::new(vec![(int(0), int(1))]).is_err());
        assert!(StepFunction::new(vec![(int(0), int(-1)), (int(1), int(0))]).is_err());
        let f = StepFunction::new(vec![(int(0), int(2)), (int(2), int(1)), (int(5), int(0))]).unwrap();
        assert_eq!(f.value_at(&int(-1)), int(0));
        assert_eq!(f.value_at(&int(2)), int(1));
        assert_eq!(f.value_at(&int(5)), int(0));
        assert_eq!(f.integral(), int(7));
        assert_eq!(f.min_on(&int(1), &int(3)), (int(1), int(2)));
        assert_eq!(f.min_on(&int(0), &int(2)), (int(2), int(0)));
    }

    #[test]
    fn cost_examples() {
        let i = inst();
        assert_eq!(dual_cost(&i, &DualSolution::densities(&i)), int(9));
        let beta_only = DualSolution { alpha: BTreeMap::new(), beta: vec![StepFunction::constant(int(0), int(5), int(1)).unwrap()] };
        assert_eq!(dual_cost(&i, &beta_only), int(5));
        let mixed = DualSolution { alpha: DualSolution::densities(&i).alpha, beta: beta_only.beta.clone() };
        assert_eq!(dual_cost(&i, &mixed), int(14));
    }

    #[test]
    fn feasibility_examples() {
        let i = inst();
        assert_eq!(check_feasible(&i, &DualSolution::densities(&i), 2), Ok(()));
        let flat = DualSolution { alpha: BTreeMap::new(), beta: vec![StepFunction::constant(int(0), int(9), int(3)).unwrap(); 2] };
        assert_eq!(check_feasible(&i, &flat, 2), Ok(()));
        let err = check_feasible(&i, &DualSolution::default(), 1).unwrap_err();
        assert_eq!((err.job, err.server, err.time, err.deficit), (JobId::new("1"), 0, int(0), int(3)));
        // Second server missing means beta = 0 there.
        let one = DualSolution { alpha: BTreeMap::new(), beta: vec![flat.beta[0].clone()] };
        assert_eq!(check_feasible(&i, &one, 2).unwrap_err().server, 1);
    }

    #[test]
    fn resize_examples() {
        let i = Instance::new(vec![Job::new("1", int(1), int(1), int(0), int(1))]).unwrap();
        let d = DualSolution {
            alpha: [(JobId::new("1"), int(1))].into_iter().collect(),
            beta: vec![StepFunction::constant(int(0), int(1), int(1)).unwrap()],
        };
        assert_eq!(resize(&d, &int(1)).unwrap(), d);
        let r = resize(&d, &int(2)).unwrap();
        assert_eq!(dual_cost(&i.with_scaled_demands(&int(2)), &r), q(3, 2));
        assert!(resize(&d, &int(0)).is_err());
    }

    #[test]
    fn certify_examples() {
        let i = inst();
        assert_eq!(certify_ratio(&i, &DualSolution::densities(&i), &int(9), 1).unwrap(), Certification::Certified(int(1)));
        assert!(matches!(certify_ratio(&i, &DualSolution::default(), &int(9), 1).unwrap(), Certification::Rejected(_)));
        assert!(certify_ratio(&i, &DualSolution::default(), &int(0), 1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"alpha": {"1": "3/2"}, "beta": [[["0", "1"], ["5/2", 0]]]}"#;
        let d = DualSolution::from_json(text).unwrap();
        assert_eq!(d.alpha_of(&JobId::new("1")), q(3, 2));
        assert_eq!(d.beta[0].integral(), q(5, 2));
        assert_eq!(DualSolution::from_json(&d.to_json()).unwrap(), d);
        assert!(DualSolution::from_json(r#"{"beta": [[["0", "1"]]]}"#).is_err());
    }

    #[test]
    fn stretched_accounting() {
        let i = inst();
        let f = q(1, 2);
        let stretched = i.with_stretched_deadlines(&f);
        let d = DualSolution { alpha: DualSolution::densities(&i).alpha, beta: vec![StepFunction::constant(int(0), int(4), int(1)).unwrap()] };
        assert!(matches!(certify_ratio(&stretched, &d, &int(9), 1).unwrap(), Certification::Certified(_)));
        assert_eq!(stretched_cost(&stretched, &d, &f), int(9) + q(3, 2) * int(4));
    }
}
