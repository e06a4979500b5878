//! Exact probability evaluators, computed in log space.
//!
//! Products of many factors (`n!`, ascending factorials, Poisson weights)
//! are accumulated as sums of logarithms and exponentiated once at the end.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::partitions::AllelicPartition;

/// Below this distance from 1, `b_t` uses its `mu = 1` branch.
pub const MU_ONE_TOLERANCE: f64 = 1e-8;

/// Model parameters `(alpha, theta, mu)`.
///
/// `alpha` in `[0, 1)` is the discount, `theta > -alpha` the immigration
/// strength and `mu >= 0` the per-individual death rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    alpha: f64,
    theta: f64,
    mu: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, theta: f64, mu: f64) -> Result<Self> {
        if !(alpha.is_finite() && theta.is_finite() && mu.is_finite()) {
            return Err(Error::domain("alpha, theta and mu must be finite"));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::domain(format!(
                "alpha must lie in [0, 1), got {alpha}"
            )));
        }
        if theta <= -alpha {
            return Err(Error::domain(format!(
                "theta must exceed -alpha = {}, got {theta}",
                -alpha
            )));
        }
        if mu < 0.0 {
            return Err(Error::domain(format!("mu must be non-negative, got {mu}")));
        }
        Ok(Self { alpha, theta, mu })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Fails unless `mu > 1`, the regime with a stationary law.
    pub fn require_reversible(&self) -> Result<()> {
        if self.mu > 1.0 {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "reversible regime requires mu > 1, got mu = {}",
                self.mu
            )))
        }
    }
}

/// A real number stored as `sign * exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogValue {
    sign: i8,
    ln_abs: f64,
}

impl SignedLogValue {
    pub const ONE: Self = Self {
        sign: 1,
        ln_abs: 0.0,
    };
    pub const ZERO: Self = Self {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn from_parts(sign: i8, ln_abs: f64) -> Self {
        if sign == 0 {
            Self::ZERO
        } else {
            Self {
                sign: sign.signum(),
                ln_abs,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_abs: x.abs().ln(),
            }
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// `ln |x|`; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.ln_abs
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_abs.exp(),
        }
    }

    pub fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return Self::ZERO;
        }
        Self {
            sign: self.sign * other.sign,
            ln_abs: self.ln_abs + other.ln_abs,
        }
    }

    /// Division; `None` when dividing by zero.
    pub fn div(self, other: Self) -> Option<Self> {
        if other.sign == 0 {
            return None;
        }
        if self.sign == 0 {
            return Some(Self::ZERO);
        }
        Some(Self {
            sign: self.sign * other.sign,
            ln_abs: self.ln_abs - other.ln_abs,
        })
    }

    /// Multiplies by a positive factor given by its logarithm.
    pub fn scale_ln(self, ln_factor: f64) -> Self {
        if self.sign == 0 {
            self
        } else {
            Self {
                sign: self.sign,
                ln_abs: self.ln_abs + ln_factor,
            }
        }
    }
}

/// `x (x+1) ... (x+n-1)` as a signed log value; `n = 0` gives one.
pub fn log_ascending_factorial(x: f64, n: usize) -> SignedLogValue {
    let mut sign = 1i8;
    let mut ln_abs = 0.0;
    for j in 0..n {
        let v = x + j as f64;
        if v == 0.0 {
            return SignedLogValue::ZERO;
        }
        if v < 0.0 {
            sign = -sign;
        }
        ln_abs += v.abs().ln();
    }
    SignedLogValue { sign, ln_abs }
}

/// `ln x_(n)` for a product known to be positive.
fn ln_rising(x: f64, n: usize) -> f64 {
    let v = log_ascending_factorial(x, n);
    debug_assert!(
        v.sign() > 0,
        "rising factorial of {x} over {n} terms is not positive"
    );
    v.ln_abs()
}

const LN_FACTORIAL_TABLE: usize = 4096;

/// `ln n!`, tabulated for small `n` and by Stirling's series beyond.
pub fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACTORIAL_TABLE);
        let mut acc = 0.0;
        t.push(0.0);
        for j in 1..LN_FACTORIAL_TABLE {
            acc += (j as f64).ln();
            t.push(acc);
        }
        t
    });
    if n < LN_FACTORIAL_TABLE {
        return table[n];
    }
    let x = n as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

fn ln_indicator_product(m: &AllelicPartition, term: impl Fn(usize) -> f64) -> f64 {
    m.iter()
        .map(|(i, mi)| mi as f64 * term(i) - ln_factorial(mi))
        .sum()
}

/// Ewens sampling formula `ESF_n^theta(m)`.
pub fn esf(n: usize, theta: f64, m: &AllelicPartition) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::domain(format!(
            "ESF requires theta > 0, got {theta}"
        )));
    }
    if m.size() != n {
        return Ok(0.0);
    }
    let ln_theta = theta.ln();
    let ln_p = ln_factorial(n) - ln_rising(theta, n)
        + ln_indicator_product(m, |i| ln_theta - (i as f64).ln());
    Ok(ln_p.exp())
}

/// Pitman sampling formula `PSF_n^{alpha,theta}(m)`.
///
/// For `alpha > 0` this is
/// `n! (theta/alpha)_(k) alpha^k / theta_(n) * prod_j [(1-alpha)_(j-1)/j!]^{m_j} / m_j!`.
/// The leading `theta` factor of `(theta/alpha)_(k) alpha^k = prod_{i<k} (theta + i alpha)`
/// and of `theta_(n)` cancels, which leaves only positive factors for every
/// `theta > -alpha` (including `theta = 0`). At `alpha = 0` it is [`esf`].
pub fn psf(n: usize, params: &ModelParams, m: &AllelicPartition) -> Result<f64> {
    let alpha = params.alpha();
    let theta = params.theta();
    if alpha == 0.0 {
        return esf(n, theta, m);
    }
    if m.size() != n {
        return Ok(0.0);
    }
    if n == 0 {
        return Ok(1.0);
    }
    let k = m.num_groups();
    let ln_alpha = alpha.ln();
    // prod_{i=1}^{k-1} (theta + i alpha) = alpha^{k-1} (theta/alpha + 1)_(k-1)
    let ln_new_families = (k - 1) as f64 * ln_alpha + ln_rising(theta / alpha + 1.0, k - 1);
    let ln_norm = ln_rising(theta + 1.0, n - 1);
    let ln_p = ln_factorial(n) + ln_new_families - ln_norm
        + ln_indicator_product(m, |j| ln_rising(1.0 - alpha, j - 1) - ln_factorial(j));
    Ok(ln_p.exp())
}

/// `alpha_i = alpha (1-alpha)_(i-1) / i!`.
pub fn alpha_weight(alpha: f64, i: usize) -> Result<f64> {
    check_open_unit(alpha)?;
    if i == 0 {
        return Err(Error::domain("alpha weights are indexed from 1"));
    }
    Ok((alpha.ln() + ln_rising(1.0 - alpha, i - 1) - ln_factorial(i)).exp())
}

/// `alpha_1, ..., alpha_n` via `alpha_{i+1} / alpha_i = (i - alpha) / (i + 1)`.
pub fn alpha_weights(alpha: f64, n: usize) -> Result<Vec<f64>> {
    check_open_unit(alpha)?;
    let mut out = Vec::with_capacity(n);
    let mut w = alpha;
    for i in 1..=n {
        out.push(w);
        w *= (i as f64 - alpha) / (i as f64 + 1.0);
    }
    Ok(out)
}

fn check_open_unit(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

fn check_prob(b: f64) -> Result<()> {
    if (0.0..1.0).contains(&b) {
        Ok(())
    } else {
        Err(Error::domain(format!("b must lie in [0, 1), got {b}")))
    }
}

/// Negative binomial weight `theta_(n)/n! (1-b)^theta b^n` for any real
/// `theta`; negative when `theta_(n) < 0`.
pub fn neg_bin_signed(n: usize, theta: f64, b: f64) -> Result<SignedLogValue> {
    check_prob(b)?;
    if n > 0 && b == 0.0 {
        return Ok(SignedLogValue::ZERO);
    }
    let ln_b_term = if n == 0 { 0.0 } else { n as f64 * b.ln() };
    Ok(log_ascending_factorial(theta, n)
        .scale_ln(-ln_factorial(n) + theta * (-b).ln_1p() + ln_b_term))
}

/// Negative binomial `NBin(theta, b)` probability of `n`.
pub fn neg_bin_pmf(n: usize, theta: f64, b: f64) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::domain(format!(
            "negative binomial requires theta > 0, got {theta}"
        )));
    }
    Ok(neg_bin_signed(n, theta, b)?.to_f64())
}

/// Poisson probability `e^{-rate} rate^x / x!`.
pub fn poisson_pmf(x: usize, rate: f64) -> Result<f64> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::domain(format!(
            "Poisson rate must be >= 0, got {rate}"
        )));
    }
    if rate == 0.0 {
        return Ok(if x == 0 { 1.0 } else { 0.0 });
    }
    Ok((-rate + x as f64 * rate.ln() - ln_factorial(x)).exp())
}

/// `b_t = (e^{(1-mu)t} - 1) / (e^{(1-mu)t} - mu)`, or `t / (1 + t)` at `mu = 1`.
pub fn b_t(mu: f64, t: f64) -> Result<f64> {
    if !(mu >= 0.0) || mu.is_infinite() {
        return Err(Error::domain(format!(
            "mu must be finite and >= 0, got {mu}"
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::domain(format!("t must be >= 0, got {t}")));
    }
    if (mu - 1.0).abs() < MU_ONE_TOLERANCE {
        return Ok(if t.is_infinite() { 1.0 } else { t / (1.0 + t) });
    }
    let x = (1.0 - mu) * t;
    if x <= 0.0 {
        // mu > 1: e^x decays
        let e = x.exp_m1();
        Ok(e / (e + 1.0 - mu))
    } else {
        // mu < 1: divide through by e^x
        let y = -x;
        Ok(-y.exp_m1() / (1.0 - mu * y.exp()))
    }
}

/// `prod_{i>=1} Po(m_i; theta b^i / i)`, the empty indices folded in via
/// `sum_i theta b^i / i = -theta ln(1 - b)`.
pub fn poisson_product_prob(m: &AllelicPartition, theta: f64, b: f64) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::domain(format!("theta must be > 0, got {theta}")));
    }
    check_prob(b)?;
    if b == 0.0 {
        return Ok(if m.is_empty() { 1.0 } else { 0.0 });
    }
    let ln_tail = theta * (-b).ln_1p();
    let (ln_theta, ln_b) = (theta.ln(), b.ln());
    let ln_p = ln_tail + ln_indicator_product(m, |i| ln_theta + i as f64 * ln_b - (i as f64).ln());
    Ok(ln_p.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::enumerate;

    fn p(pairs: &[(usize, usize)]) -> AllelicPartition {
        AllelicPartition::from_multiplicities(pairs.iter().copied()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 1.0, 2.0).is_ok());
        assert!(ModelParams::new(0.5, -0.4, 0.0).is_ok());
        assert!(ModelParams::new(1.0, 1.0, 2.0).is_err());
        assert!(ModelParams::new(-0.1, 1.0, 2.0).is_err());
        assert!(ModelParams::new(0.5, -0.5, 2.0).is_err());
        assert!(ModelParams::new(0.0, 0.0, 2.0).is_err());
        assert!(ModelParams::new(0.2, 1.0, -1.0).is_err());
        assert!(ModelParams::new(0.2, f64::NAN, 1.0).is_err());
        let err = ModelParams::new(0.2, 1.0, 0.9)
            .unwrap()
            .require_reversible()
            .unwrap_err();
        assert!(err
            .to_string()
            .contains("reversible regime requires mu > 1"));
    }

    #[test]
    fn ascending_factorial_examples() {
        let v = log_ascending_factorial(1.0, 3);
        assert_eq!(v.sign(), 1);
        assert!(close(v.ln_abs(), 6f64.ln(), 1e-15));
        assert_eq!(log_ascending_factorial(-3.7, 0), SignedLogValue::ONE);
        let v = log_ascending_factorial(-0.25, 2);
        assert_eq!(v.sign(), -1);
        assert!(close(v.to_f64(), -0.1875, 1e-15));
        assert!(log_ascending_factorial(-2.0, 4).is_zero());
    }

    #[test]
    fn signed_log_arithmetic() {
        let a = SignedLogValue::from_f64(-3.0);
        let b = SignedLogValue::from_f64(0.5);
        assert!(close(a.mul(b).to_f64(), -1.5, 1e-15));
        assert!(close(a.div(b).unwrap().to_f64(), -6.0, 1e-14));
        assert!(a.div(SignedLogValue::ZERO).is_none());
        assert!(SignedLogValue::ZERO.mul(a).is_zero());
    }

    #[test]
    fn ln_factorial_matches_direct_sum_past_the_table() {
        let direct: f64 = (1..=5000).map(|j| (j as f64).ln()).sum();
        assert!(close(ln_factorial(5000), direct, 1e-9));
        assert_eq!(ln_factorial(0), 0.0);
        assert!(close(ln_factorial(5), 120f64.ln(), 1e-14));
    }

    #[test]
    fn esf_examples() {
        assert!(close(esf(3, 1.0, &p(&[(1, 3)])).unwrap(), 1.0 / 6.0, 1e-15));
        assert!(close(
            esf(3, 1.0, &p(&[(1, 1), (2, 1)])).unwrap(),
            0.5,
            1e-15
        ));
        assert_eq!(esf(3, 1.0, &p(&[(2, 1)])).unwrap(), 0.0);
        assert!(esf(3, 0.0, &p(&[(1, 3)])).is_err());
    }

    #[test]
    fn psf_examples() {
        let params = ModelParams::new(0.5, 0.5, 0.0).unwrap();
        assert!(close(
            psf(2, &params, &p(&[(1, 2)])).unwrap(),
            2.0 / 3.0,
            1e-15
        ));
        assert!(close(
            psf(2, &params, &p(&[(2, 1)])).unwrap(),
            1.0 / 3.0,
            1e-15
        ));
        let ewens = ModelParams::new(0.0, 2.0, 0.0).unwrap();
        for m in enumerate(5).unwrap() {
            assert_eq!(psf(5, &ewens, &m).unwrap(), esf(5, 2.0, &m).unwrap());
        }
    }

    #[test]
    fn psf_at_theta_zero_is_finite_and_normalized() {
        let params = ModelParams::new(0.4, 0.0, 0.0).unwrap();
        let total: f64 = enumerate(9)
            .unwrap()
            .iter()
            .map(|m| psf(9, &params, m).unwrap())
            .sum();
        assert!(close(total, 1.0, 1e-12));
    }

    #[test]
    fn alpha_weight_examples() {
        assert!(close(alpha_weight(0.5, 1).unwrap(), 0.5, 1e-15));
        assert!(close(alpha_weight(0.5, 2).unwrap(), 0.125, 1e-15));
        let r = alpha_weight(0.5, 2).unwrap() / alpha_weight(0.5, 1).unwrap();
        assert!(close(r, 0.25, 1e-15));
        assert!(alpha_weight(0.0, 1).is_err());
        assert!(alpha_weight(1.0, 1).is_err());
        let ws = alpha_weights(0.3, 50).unwrap();
        for (i, w) in ws.iter().enumerate() {
            assert!((w - alpha_weight(0.3, i + 1).unwrap()).abs() <= 1e-13 * w);
        }
    }

    #[test]
    fn neg_bin_examples() {
        assert!(close(neg_bin_pmf(0, 1.0, 0.5).unwrap(), 0.5, 1e-15));
        assert!(close(neg_bin_pmf(1, 1.0, 0.5).unwrap(), 0.25, 1e-15));
        let total: f64 = (0..=200).map(|n| neg_bin_pmf(n, 2.5, 0.6).unwrap()).sum();
        assert!(close(total, 1.0, 1e-10));
        assert_eq!(neg_bin_pmf(3, 1.0, 0.0).unwrap(), 0.0);
        assert!(neg_bin_pmf(1, 0.0, 0.5).is_err());
        assert!(neg_bin_pmf(1, 1.0, 1.0).is_err());
    }

    #[test]
    fn neg_bin_signed_for_negative_theta() {
        let v = neg_bin_signed(1, -0.25, 0.5).unwrap();
        assert!(close(v.to_f64(), -0.25 * 0.5f64.powf(-0.25) * 0.5, 1e-15));
    }

    #[test]
    fn poisson_examples() {
        assert_eq!(poisson_pmf(0, 0.0).unwrap(), 1.0);
        assert_eq!(poisson_pmf(2, 0.0).unwrap(), 0.0);
        assert!(close(
            poisson_pmf(1, 0.25).unwrap(),
            0.25 * (-0.25f64).exp(),
            1e-16
        ));
        let total: f64 = (0..=100).map(|x| poisson_pmf(x, 3.0).unwrap()).sum();
        assert!(close(total, 1.0, 1e-12));
        assert!(poisson_pmf(1, -1.0).is_err());
    }

    #[test]
    fn b_t_examples() {
        assert!(close(b_t(1.0, 1.0).unwrap(), 0.5, 1e-15));
        assert!(close(b_t(2.0, f64::INFINITY).unwrap(), 0.5, 1e-15));
        assert!(close(b_t(2.0, 1.0).unwrap(), 0.387301, 1e-6));
        assert_eq!(b_t(3.0, 0.0).unwrap(), 0.0);
        assert_eq!(b_t(0.5, 0.0).unwrap(), 0.0);
        assert!(close(b_t(2.0, 60.0).unwrap(), 0.5, 1e-15));
        assert!(close(b_t(0.5, 2000.0).unwrap(), 1.0, 1e-15));
        assert!(close(b_t(0.0, 1.0).unwrap(), 1.0 - (-1f64).exp(), 1e-15));
    }

    #[test]
    fn b_t_is_continuous_at_mu_one() {
        for &t in &[0.1, 1.0, 5.0, 40.0] {
            let at_one = b_t(1.0, t).unwrap();
            for &d in &[2e-8, 1e-6, -1e-6, -2e-8] {
                let near = b_t(1.0 + d, t).unwrap();
                assert!(
                    close(near, at_one, 1e-8 + 10.0 * d.abs() * t),
                    "t={t} d={d}"
                );
            }
        }
    }

    #[test]
    fn poisson_product_examples() {
        let e0 = AllelicPartition::empty();
        assert!(close(
            poisson_product_prob(&e0, 2.0, 0.3).unwrap(),
            0.7f64.powf(2.0),
            1e-15
        ));
        assert_eq!(poisson_product_prob(&e0, 1.0, 0.0).unwrap(), 1.0);
        assert!(close(
            poisson_product_prob(&p(&[(1, 1)]), 1.0, 0.5).unwrap(),
            0.25,
            1e-15
        ));
    }

    #[test]
    fn poisson_product_matches_truncated_product() {
        let m = p(&[(1, 2), (3, 1)]);
        let (theta, b) = (1.7, 0.4f64);
        let direct: f64 = (1..400)
            .map(|i| poisson_pmf(m.multiplicity(i), theta * b.powi(i as i32) / i as f64).unwrap())
            .product();
        let closed = poisson_product_prob(&m, theta, b).unwrap();
        assert!((direct - closed).abs() <= 1e-14);
    }
}
