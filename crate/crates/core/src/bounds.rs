//! Closed-form competitive-ratio bounds for every mechanism, evaluated exactly.

use num_traits::One;

use crate::committed::migratory_factor;
use crate::error::{Error, Result};
use crate::mechanism::MechanismSpec;
use crate::noncommitted::AtParams;
use crate::rational::{format_rational, int, Rational};

fn bracket(p: &AtParams) -> Result<Rational> {
    let denom = (&p.gamma - Rational::one()) * (&p.mu - Rational::one()) - Rational::one();
    if denom <= Rational::from_integer(0.into()) {
        return Err(Error::Domain(format!("(gamma - 1)(mu - 1) must exceed 1 for {}", p.describe())));
    }
    Ok(Rational::one() + &p.gamma / denom)
}

fn stretch(s: &Rational, p: &AtParams) -> Result<Rational> {
    if s <= &p.mu {
        return Err(Error::Domain(format!("slackness {} must exceed mu = {}", format_rational(s), format_rational(&p.mu))));
    }
    Ok(&p.gamma * s / (s - &p.mu))
}

/// Single server: `1 + gamma s / (s - mu) * [1 + gamma / ((gamma - 1)(mu - 1) - 1)]`.
pub fn single_server_bound(s: &Rational, p: &AtParams) -> Result<Rational> {
    Ok(Rational::one() + stretch(s, p)? * bracket(p)?)
}

/// Several servers: `[1 + gamma s / (s - mu)] * [1 + gamma / ((gamma - 1)(mu - 1) - 1)]`.
pub fn multi_server_bound(s: &Rational, p: &AtParams) -> Result<Rational> {
    Ok((Rational::one() + stretch(s, p)?) * bracket(p)?)
}

fn at_bound(s: &Rational, p: &AtParams, servers: usize) -> Result<Rational> {
    if servers == 1 {
        single_server_bound(s, p)
    } else {
        multi_server_bound(s, p)
    }
}

/// Demand blowup a reduction applies on top of its inner scheduler, and the
/// slackness the inner scheduler is analysed at.
fn composition(spec: &MechanismSpec, s: &Rational) -> Option<(Rational, Rational)> {
    let w = |omega: &Rational| omega * (Rational::one() - omega);
    match spec {
        MechanismSpec::At { .. } | MechanismSpec::Greedy { .. } => None,
        MechanismSpec::CommittedSingle { omega, .. } | MechanismSpec::CommittedNonMigratory { omega, .. } => {
            Some((Rational::one() / w(omega), s * w(omega)))
        }
        MechanismSpec::CommittedMigratory { omega, .. } => {
            let f = migratory_factor();
            Some((&f / w(omega), s * w(omega) / f))
        }
        MechanismSpec::Phantom { sigma, servers, .. } => {
            let blowup = if *servers == 1 { int(8) } else { int(8) * migratory_factor() };
            Some((blowup, sigma.clone()))
        }
    }
}

/// Proven bound on the competitive ratio of `spec` on instances of
/// slackness at least `s`: the inner scheduler's bound at its own
/// slackness, multiplied by the reduction's demand blowup.
pub fn mechanism_bound(spec: &MechanismSpec, s: &Rational) -> Result<Rational> {
    if let MechanismSpec::Greedy { .. } = spec {
        return Err(Error::Domain("no closed-form bound for the baseline".into()));
    }
    let p = spec.class_params();
    let servers = spec.servers();
    match composition(spec, s) {
        None => at_bound(s, p, servers),
        Some((blowup, inner_s)) => Ok(blowup * at_bound(&inner_s, p, servers)?),
    }
}

/// The same composition with the blowup charged to the `beta` part of the
/// dual only: `1 + B (cr - 1)`. Tends to `1 + B` as `s` grows.
pub fn accounted_bound(spec: &MechanismSpec, s: &Rational) -> Result<Rational> {
    let p = spec.class_params();
    let servers = spec.servers();
    match composition(spec, s) {
        None => mechanism_bound(spec, s),
        Some((blowup, inner_s)) => Ok(Rational::one() + blowup * (at_bound(&inner_s, p, servers)? - Rational::one())),
    }
}

/// Limit of [`accounted_bound`] for large slackness, `1 + B`.
pub fn accounted_constant(spec: &MechanismSpec) -> Option<Rational> {
    composition(spec, &Rational::one()).map(|(b, _)| Rational::one() + b)
}
