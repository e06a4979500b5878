//! The reversible regime `mu > 1`.
//!
//! The item count has the negative binomial stationary law
//! `lambda(n) = theta_(n)/n! mu^{-n} (1 - 1/mu)^theta`. For `0 < alpha < 1`
//! the partition chain is reversible with respect to
//!
//! ```text
//! pi(m) = C (theta/alpha)_(k) prod_{i>=1} Po(m_i; alpha_i mu^{-i}),
//! C     = exp(1 - (1 - 1/mu)^alpha) (1 - 1/mu)^theta,
//! ```
//!
//! which is also the mixture `sum_n PSF_n(m) lambda(n)`. This module
//! evaluates both forms independently and measures detailed-balance
//! residuals on finite windows of the state space.
//!
//! For `theta < 0` the same expressions define a signed measure: `lambda(n)`
//! and `pi(m)` are negative off the empty state. The balance identities are
//! algebraic and still hold with the formal rate `theta + alpha k`, so the
//! verifiers accept that range and report relative residuals.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formulae::{self, ln_factorial, log_ascending_factorial, ModelParams, SignedLogValue};
use crate::partitions::{self, AllelicPartition, TransitionEvent};

/// Largest item count accepted by [`check_detailed_balance_m`].
pub const MAX_BALANCE_TRUNCATION: usize = 14;

fn require_mu(mu: f64) -> Result<()> {
    if mu > 1.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "reversible regime requires mu > 1, got mu = {mu}"
        )))
    }
}

fn require_alpha_regime(params: &ModelParams) -> Result<()> {
    if params.alpha() <= 0.0 {
        return Err(Error::domain(
            "the closed-form stationary law needs alpha in (0, 1); use the Poisson limit rates at alpha = 0",
        ));
    }
    params.require_reversible()
}

/// `lambda(n)` for any real `theta`, as a signed value.
pub fn lambda_signed(n: usize, theta: f64, mu: f64) -> Result<SignedLogValue> {
    require_mu(mu)?;
    formulae::neg_bin_signed(n, theta, 1.0 / mu)
}

/// Stationary law of the item count, `NBin(theta, 1/mu)` at `n`.
pub fn lambda_pmf(n: usize, theta: f64, mu: f64) -> Result<f64> {
    require_mu(mu)?;
    if !(theta > 0.0) {
        return Err(Error::domain(format!(
            "lambda requires theta > 0, got {theta}"
        )));
    }
    formulae::neg_bin_pmf(n, theta, 1.0 / mu)
}

/// `sum_{i>=1} alpha_i mu^{-i} = 1 - (1 - 1/mu)^alpha`.
pub fn alpha_series_sum(alpha: f64, mu: f64) -> f64 {
    -(alpha * (-1.0 / mu).ln_1p()).exp_m1()
}

/// `C = exp(1 - (1 - 1/mu)^alpha) (1 - 1/mu)^theta`.
pub fn normalizing_constant(params: &ModelParams) -> Result<f64> {
    require_alpha_regime(params)?;
    let mu = params.mu();
    Ok((alpha_series_sum(params.alpha(), mu) + params.theta() * (-1.0 / mu).ln_1p()).exp())
}

/// Closed-form stationary weight `pi(m)`. Negative off `e0` when `theta < 0`.
pub fn pi_pmf(m: &AllelicPartition, params: &ModelParams) -> Result<f64> {
    Ok(pi_signed(m, params)?.to_f64())
}

pub fn pi_signed(m: &AllelicPartition, params: &ModelParams) -> Result<SignedLogValue> {
    let ln_c = normalizing_constant(params)?.ln();
    let (alpha, theta, mu) = (params.alpha(), params.theta(), params.mu());
    let ln_alpha = alpha.ln();
    let ln_mu = mu.ln();
    // Poisson factors: every index contributes exp(-alpha_i mu^-i); summed in
    // closed form. Stored indices add m_i ln(alpha_i mu^-i) - ln m_i!.
    let mut ln_rest = -alpha_series_sum(alpha, mu);
    for (i, mi) in m.iter() {
        let ln_alpha_i =
            ln_alpha + log_ascending_factorial(1.0 - alpha, i - 1).ln_abs() - ln_factorial(i);
        ln_rest += mi as f64 * (ln_alpha_i - i as f64 * ln_mu) - ln_factorial(mi);
    }
    let new_families = log_ascending_factorial(theta / alpha, m.num_groups());
    Ok(new_families.scale_ln(ln_c + ln_rest))
}

/// `sum_{n=0}^{n_trunc} PSF_n(m) lambda(n)`; only `n = s(m)` contributes, so
/// the sum is exact once `n_trunc >= s(m)` and zero before.
pub fn pi_via_mixture(m: &AllelicPartition, params: &ModelParams, n_trunc: usize) -> Result<f64> {
    require_alpha_regime(params)?;
    let mut total = 0.0;
    for n in 0..=n_trunc {
        let w = formulae::psf(n, params, m)?;
        if w != 0.0 {
            total += w * lambda_signed(n, params.theta(), params.mu())?.to_f64();
        }
    }
    Ok(total)
}

/// Result of a detailed-balance sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    pub max_residual: f64,
    /// State (encoded partition or integer) where the maximum was attained.
    pub worst_state: String,
    pub pairs_checked: usize,
}

fn relative_residual(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else if lhs == 0.0 {
        f64::INFINITY
    } else {
        ((lhs - rhs) / lhs).abs()
    }
}

/// Max over `n < n_max` of `|lambda(n) r(n+1|n) - lambda(n+1) r(n|n+1)| / lambda(n) r(n+1|n)`
/// for a supplied weight function.
pub fn balance_residual_s<F>(lambda: F, params: &ModelParams, n_max: usize) -> Result<BalanceReport>
where
    F: Fn(usize) -> Result<f64>,
{
    let (theta, mu) = (params.theta(), params.mu());
    let mut report = BalanceReport {
        max_residual: 0.0,
        worst_state: "0".into(),
        pairs_checked: 0,
    };
    let mut here = lambda(0)?;
    for n in 0..n_max {
        let next = lambda(n + 1)?;
        let lhs = here * (theta + n as f64);
        let rhs = next * mu * (n + 1) as f64;
        let r = relative_residual(lhs, rhs);
        report.pairs_checked += 1;
        if !(r <= report.max_residual) {
            report.max_residual = r;
            report.worst_state = n.to_string();
        }
        here = next;
    }
    Ok(report)
}

/// Detailed balance of the item-count chain against `lambda`. For
/// `theta <= 0` the signed weights [`lambda_signed`] are used.
pub fn check_detailed_balance_s(params: &ModelParams, n_max: usize) -> Result<BalanceReport> {
    params.require_reversible()?;
    let (theta, mu) = (params.theta(), params.mu());
    balance_residual_s(|n| Ok(lambda_signed(n, theta, mu)?.to_f64()), params, n_max)
}

/// Detailed balance of the partition chain for a supplied weight function,
/// over every up-jump out of every `m` with `s(m) <= n_max`.
///
/// Each up-jump `m -> m'` is paired with its reverse death jump; together
/// they cover every nonzero off-diagonal rate between states of size
/// `<= n_max + 1` exactly once.
pub fn balance_residual_m<F>(pi: F, params: &ModelParams, n_max: usize) -> Result<BalanceReport>
where
    F: Fn(&AllelicPartition) -> Result<f64>,
{
    if n_max > MAX_BALANCE_TRUNCATION {
        return Err(Error::BoundExceeded {
            what: "balance truncation",
            value: n_max as u64,
            limit: MAX_BALANCE_TRUNCATION as u64,
        });
    }
    let (alpha, theta, mu) = (params.alpha(), params.theta(), params.mu());
    let mut report = BalanceReport {
        max_residual: 0.0,
        worst_state: AllelicPartition::empty().encode(),
        pairs_checked: 0,
    };
    for m in partitions::enumerate_up_to(n_max)? {
        let pi_m = pi(&m)?;
        let mut ups = vec![(
            TransitionEvent::NewFamily,
            theta + alpha * m.num_groups() as f64,
        )];
        ups.extend(
            m.iter()
                .map(|(i, mi)| (TransitionEvent::GrowthAt(i), (i as f64 - alpha) * mi as f64)),
        );
        for (event, forward) in ups {
            let next = m.apply_event(event)?;
            let back_size = match event {
                TransitionEvent::NewFamily => 1,
                TransitionEvent::GrowthAt(i) => i + 1,
                TransitionEvent::DeathAt(_) => unreachable!("only up-jumps are listed"),
            };
            let backward = mu * back_size as f64 * next.multiplicity(back_size) as f64;
            let lhs = pi_m * forward;
            let rhs = pi(&next)? * backward;
            let r = relative_residual(lhs, rhs);
            report.pairs_checked += 1;
            if !(r <= report.max_residual) {
                report.max_residual = r;
                report.worst_state = m.encode();
            }
        }
    }
    Ok(report)
}

/// Detailed balance of the partition chain against [`pi_pmf`].
pub fn check_detailed_balance_m(params: &ModelParams, n_max: usize) -> Result<BalanceReport> {
    require_alpha_regime(params)?;
    balance_residual_m(|m| pi_pmf(m, params), params, n_max)
}

/// Marginal law of `M(t)` at `alpha = 0`: `prod_i Po(m_i; theta b_t^i / i)`.
pub fn alpha0_marginal(m: &AllelicPartition, theta: f64, mu: f64, t: f64) -> Result<f64> {
    formulae::poisson_product_prob(m, theta, formulae::b_t(mu, t)?)
}

/// Rate of the Poisson limit of `M_i(t)` at `alpha = 0`: `theta / i` when
/// `mu <= 1`, `theta mu^{-i} / i` when `mu > 1`.
pub fn alpha0_limit_rate(i: usize, theta: f64, mu: f64) -> Result<f64> {
    if i == 0 {
        return Err(Error::domain("group sizes start at 1"));
    }
    if !(theta > 0.0) || !(mu >= 0.0) {
        return Err(Error::domain(format!(
            "limit rates need theta > 0 and mu >= 0, got theta = {theta}, mu = {mu}"
        )));
    }
    let i_f = i as f64;
    Ok(if mu <= 1.0 {
        theta / i_f
    } else {
        theta * mu.powf(-i_f) / i_f
    })
}

/// A finite window onto a distribution over a countable set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedDistribution<K: Ord> {
    /// Support bound (largest item count, or largest integer) covered.
    pub bound: usize,
    probs: BTreeMap<K, f64>,
    mass: f64,
}

impl<K: Ord> TruncatedDistribution<K> {
    pub fn new(bound: usize, probs: BTreeMap<K, f64>) -> Result<Self> {
        if let Some(bad) = probs.values().find(|p| !(**p >= 0.0)) {
            return Err(Error::domain(format!(
                "probabilities must be >= 0, found {bad}"
            )));
        }
        let mass: f64 = probs.values().sum();
        if mass > 1.0 + 1e-12 {
            return Err(Error::domain(format!("captured mass {mass} exceeds 1")));
        }
        Ok(Self { bound, probs, mass })
    }

    pub fn probs(&self) -> &BTreeMap<K, f64> {
        &self.probs
    }

    pub fn get(&self, key: &K) -> f64 {
        self.probs.get(key).copied().unwrap_or(0.0)
    }

    /// Sum of the stored probabilities.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn into_probs(self) -> BTreeMap<K, f64> {
        self.probs
    }
}

/// `pi` on all partitions with `s(m) <= n_max`. Needs `theta > 0`.
pub fn pi_truncated(
    params: &ModelParams,
    n_max: usize,
) -> Result<TruncatedDistribution<AllelicPartition>> {
    if !(params.theta() > 0.0) {
        return Err(Error::domain("pi is a probability law only for theta > 0"));
    }
    let mut probs = BTreeMap::new();
    for m in partitions::enumerate_up_to(n_max)? {
        let w = pi_pmf(&m, params)?;
        probs.insert(m, w);
    }
    TruncatedDistribution::new(n_max, probs)
}

/// `lambda` on `0..=n_max`.
pub fn lambda_truncated(theta: f64, mu: f64, n_max: usize) -> Result<TruncatedDistribution<usize>> {
    let probs = (0..=n_max)
        .map(|n| Ok((n, lambda_pmf(n, theta, mu)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    TruncatedDistribution::new(n_max, probs)
}

/// Restricts to `{m : s(m) = n}` and renormalizes.
pub fn conditional_given_size(
    dist: &TruncatedDistribution<AllelicPartition>,
    n: usize,
) -> Result<TruncatedDistribution<AllelicPartition>> {
    let slice: BTreeMap<AllelicPartition, f64> = dist
        .probs()
        .iter()
        .filter(|(m, _)| m.size() == n)
        .map(|(m, &p)| (m.clone(), p))
        .collect();
    let total: f64 = slice.values().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroMassSlice(n));
    }
    let probs = slice.into_iter().map(|(m, p)| (m, p / total)).collect();
    TruncatedDistribution::new(n, probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulae::psf;

    fn p(pairs: &[(usize, usize)]) -> AllelicPartition {
        AllelicPartition::from_multiplicities(pairs.iter().copied()).unwrap()
    }

    fn params(a: f64, t: f64, mu: f64) -> ModelParams {
        ModelParams::new(a, t, mu).unwrap()
    }

    #[test]
    fn lambda_examples() {
        assert!((lambda_pmf(0, 1.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
        for n in 0..40 {
            let expected = 0.5f64.powi(n as i32 + 1);
            assert!(
                (lambda_pmf(n, 1.0, 2.0).unwrap() - expected).abs() < 1e-15 * expected.max(1e-3)
            );
        }
        let total: f64 = (0..=300).map(|n| lambda_pmf(n, 2.5, 1.5).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(lambda_pmf(1, 1.0, 1.0).is_err());
        assert!(lambda_pmf(1, -0.1, 2.0).is_err());
    }

    #[test]
    fn pi_examples() {
        let pr = params(0.5, 1.0, 2.0);
        assert!((pi_pmf(&AllelicPartition::empty(), &pr).unwrap() - 0.5).abs() < 1e-15);
        assert!((pi_pmf(&p(&[(1, 1)]), &pr).unwrap() - 0.25).abs() < 1e-15);
        assert!((normalizing_constant(&pr).unwrap() - 0.670151).abs() < 1e-5);
    }

    #[test]
    fn pi_rejects_outside_regime() {
        assert!(pi_pmf(&AllelicPartition::empty(), &params(0.5, 1.0, 1.0)).is_err());
        assert!(pi_pmf(&AllelicPartition::empty(), &params(0.0, 1.0, 2.0)).is_err());
    }

    #[test]
    fn mixture_examples() {
        let pr = params(0.5, 1.0, 2.0);
        let m = p(&[(2, 1)]);
        let mix = pi_via_mixture(&m, &pr, 10).unwrap();
        let direct = psf(2, &pr, &m).unwrap() * lambda_pmf(2, 1.0, 2.0).unwrap();
        assert!((mix - direct).abs() < 1e-15);
        assert!((mix - pi_pmf(&m, &pr).unwrap()).abs() <= 1e-12 * mix);
        let e0 = AllelicPartition::empty();
        assert!(
            (pi_via_mixture(&e0, &pr, 0).unwrap() - lambda_pmf(0, 1.0, 2.0).unwrap()).abs() < 1e-15
        );
        assert_eq!(pi_via_mixture(&p(&[(5, 1)]), &pr, 4).unwrap(), 0.0);
    }

    #[test]
    fn negative_theta_gives_signed_weights() {
        let pr = params(0.5, -0.25, 1.2);
        assert!(pi_pmf(&AllelicPartition::empty(), &pr).unwrap() > 0.0);
        let m = p(&[(1, 2), (3, 1)]);
        let w = pi_pmf(&m, &pr).unwrap();
        assert!(w < 0.0);
        let mix = pi_via_mixture(&m, &pr, 12).unwrap();
        assert!(((w - mix) / w).abs() < 1e-12);
        assert!(pi_truncated(&pr, 4).is_err());
    }

    #[test]
    fn balance_s_examples() {
        assert!(
            check_detailed_balance_s(&params(0.0, 1.0, 2.0), 100)
                .unwrap()
                .max_residual
                < 1e-12
        );
        assert!(
            check_detailed_balance_s(&params(0.0, 0.5, 1.5), 100)
                .unwrap()
                .max_residual
                < 1e-12
        );
        assert!(check_detailed_balance_s(&params(0.0, 0.5, 0.9), 100).is_err());
    }

    #[test]
    fn balance_s_detects_perturbation() {
        let pr = params(0.0, 1.0, 2.0);
        let report = balance_residual_s(
            |n| Ok(lambda_pmf(n, 1.0, 2.0)? * if n == 17 { 1.01 } else { 1.0 }),
            &pr,
            100,
        )
        .unwrap();
        assert!(report.max_residual > 1e-3);
        assert!(report.worst_state == "16" || report.worst_state == "17");
    }

    #[test]
    fn balance_m_examples() {
        let r = check_detailed_balance_m(&params(0.5, 1.0, 2.0), 10).unwrap();
        assert!(r.max_residual < 1e-11, "{r:?}");
        assert!(r.pairs_checked > 100);
        let r = check_detailed_balance_m(&params(0.5, -0.25, 1.2), 10).unwrap();
        assert!(r.max_residual < 1e-11, "{r:?}");
        assert!(check_detailed_balance_m(&params(0.5, 1.0, 2.0), 15).is_err());
    }

    #[test]
    fn balance_m_detects_perturbation() {
        let pr = params(0.5, 1.0, 2.0);
        let target = p(&[(1, 1), (2, 1)]);
        let report = balance_residual_m(
            |m| Ok(pi_pmf(m, &pr)? * if *m == target { 1.001 } else { 1.0 }),
            &pr,
            8,
        )
        .unwrap();
        assert!(report.max_residual > 1e-4, "{report:?}");
    }

    #[test]
    fn alpha0_limits() {
        assert!((alpha0_limit_rate(1, 1.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((alpha0_limit_rate(3, 1.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // t -> infinity with mu = 2: b_t -> 1/2
        let m = p(&[(1, 1), (2, 2)]);
        let at_inf = alpha0_marginal(&m, 1.0, 2.0, 200.0).unwrap();
        let limit: f64 = (1..200)
            .map(|i| {
                formulae::poisson_pmf(m.multiplicity(i), alpha0_limit_rate(i, 1.0, 2.0).unwrap())
                    .unwrap()
            })
            .product();
        assert!((at_inf - limit).abs() < 1e-14);
    }

    #[test]
    fn conditional_slices() {
        let pr = params(0.5, 1.0, 2.0);
        let pi = pi_truncated(&pr, 6).unwrap();
        let slice = conditional_given_size(&pi, 3).unwrap();
        for m in partitions::enumerate(3).unwrap() {
            assert!((slice.get(&m) - psf(3, &pr, &m).unwrap()).abs() < 1e-12);
        }
        let single = TruncatedDistribution::new(
            3,
            [(p(&[(1, 1)]), 0.2), (p(&[(3, 1)]), 0.1)]
                .into_iter()
                .collect(),
        )
        .unwrap();
        let s3 = conditional_given_size(&single, 3).unwrap();
        assert_eq!(s3.probs().len(), 1);
        assert_eq!(s3.get(&p(&[(3, 1)])), 1.0);
        assert!(matches!(
            conditional_given_size(&single, 2),
            Err(Error::ZeroMassSlice(2))
        ));
    }

    #[test]
    fn truncated_distribution_invariants() {
        let bad: BTreeMap<usize, f64> = [(0, 0.7), (1, 0.4)].into_iter().collect();
        assert!(TruncatedDistribution::new(1, bad).is_err());
        let neg: BTreeMap<usize, f64> = [(0, -0.1)].into_iter().collect();
        assert!(TruncatedDistribution::new(0, neg).is_err());
        let lam = lambda_truncated(1.0, 2.0, 20).unwrap();
        assert!((lam.mass() - (1.0 - 0.5f64.powi(21))).abs() < 1e-14);
    }
}
