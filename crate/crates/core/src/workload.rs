//! Seeded random instances.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::model::{Instance, Job};
use crate::rational::{from_f64_grid, int, max_of, q, Rational};

/// Time and demand values are drawn on the grid `1 / GRID`.
pub const GRID: i64 = 4;

#[derive(Clone, Debug, PartialEq)]
pub enum DemandDist {
    /// Uniform on `[lo, hi]` over the grid.
    Uniform { lo: Rational, hi: Rational },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ValueDist {
    /// Density `2^K (1 + m / 4)` with `P(K = k) = 2^-(k+1)` truncated at
    /// `max_exponent` and `m` uniform on `0..4`; spreads jobs over many classes.
    HeavyTail { max_exponent: u32 },
    /// Density uniform on `[lo, hi]` over the grid.
    UniformDensity { lo: Rational, hi: Rational },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Workload {
    pub n: usize,
    pub s_target: Rational,
    pub seed: u64,
    /// Mean of the exponential gaps between arrivals.
    pub mean_interarrival: f64,
    /// Mean of the exponential excess slack added on top of `s_target`.
    pub mean_extra_slack: f64,
    pub demand: DemandDist,
    pub value: ValueDist,
}

impl Workload {
    /// Defaults: unit mean interarrival, demands uniform on `[1, 4]`, heavy
    /// tailed densities up to `2^10`, excess slack with mean `s_target / 2`.
    pub fn new(n: usize, s_target: Rational, seed: u64) -> Self {
        let extra = crate::rational::to_f64(&s_target) / 2.0;
        Workload {
            n,
            s_target,
            seed,
            mean_interarrival: 1.0,
            mean_extra_slack: extra,
            demand: DemandDist::Uniform { lo: int(1), hi: int(4) },
            value: ValueDist::HeavyTail { max_exponent: 10 },
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        if self.s_target < Rational::one() {
            return bad("target slackness must be at least 1");
        }
        if !(self.mean_interarrival >= 0.0 && self.mean_interarrival.is_finite()) {
            return bad("mean interarrival must be a non-negative number");
        }
        if !(self.mean_extra_slack >= 0.0 && self.mean_extra_slack.is_finite()) {
            return bad("mean extra slack must be a non-negative number");
        }
        let DemandDist::Uniform { lo, hi } = &self.demand;
        if lo < &q(1, GRID) || hi < lo {
            return bad("demand range must satisfy 1/4 <= lo <= hi");
        }
        if let ValueDist::UniformDensity { lo, hi } = &self.value {
            if lo < &q(1, GRID) || hi < lo {
                return bad("density range must satisfy 1/4 <= lo <= hi");
            }
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Instance> {
        self.check()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let gap = (self.mean_interarrival > 0.0).then(|| Exp::new(1.0 / self.mean_interarrival).expect("positive rate"));
        let excess = (self.mean_extra_slack > 0.0).then(|| Exp::new(1.0 / self.mean_extra_slack).expect("positive rate"));
        let width = (self.n - 1).to_string().len();
        let mut arrival = Rational::zero();
        let mut jobs = Vec::with_capacity(self.n);
        let (lo, hi) = self.demand_range();
        for i in 0..self.n {
            if i > 0 {
                if let Some(e) = &gap {
                    arrival += from_f64_grid(e.sample(&mut rng), GRID);
                }
            }
            let demand = grid_uniform(&mut rng, &lo, &hi);
            let sampled = match &excess {
                Some(e) => &self.s_target + from_f64_grid(e.sample(&mut rng), GRID),
                None => self.s_target.clone(),
            };
            let slack = max_of(&self.s_target, &sampled).clone();
            let deadline = &arrival + &slack * &demand;
            let density = match &self.value {
                ValueDist::HeavyTail { max_exponent } => {
                    let mut k = 0;
                    while k < *max_exponent && rng.gen_bool(0.5) {
                        k += 1;
                    }
                    let m: i64 = rng.gen_range(0..4);
                    int(1i64 << k) * q(4 + m, 4)
                }
                ValueDist::UniformDensity { lo, hi } => grid_uniform(&mut rng, lo, hi),
            };
            let value = density * &demand;
            jobs.push(Job::new(format!("j{i:0width$}"), value, demand, arrival.clone(), deadline));
        }
        Instance::new(jobs)
    }

    fn demand_range(&self) -> (Rational, Rational) {
        let DemandDist::Uniform { lo, hi } = &self.demand;
        (lo.clone(), hi.clone())
    }
}

fn grid_uniform(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational) -> Rational {
    let scale = int(GRID);
    let a = (lo * &scale).ceil().to_integer();
    let b = (hi * &scale).floor().to_integer();
    let a: i64 = a.try_into().expect("small range");
    let b: i64 = b.try_into().expect("small range");
    q(rng.gen_range(a..=b), GRID)
}

/// [`Workload::new`] with defaults, generated.
pub fn gen_random(n: usize, s_target: &Rational, seed: u64) -> Result<Instance> {
    Workload::new(n, s_target.clone(), seed).generate()
}
