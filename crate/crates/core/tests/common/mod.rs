//! Independent reference implementations used by the integration tests.
//! Everything here is plain products in f64, valid for small arguments.

#![allow(dead_code)]

use std::collections::BTreeMap;

use allelic::AllelicPartition;

/// `x (x+1) ... (x+n-1)`.
pub fn rising(x: f64, n: usize) -> f64 {
    (0..n).map(|j| x + j as f64).product()
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

/// Partitions of `n` as dense multiplicity vectors (index `i - 1` holds `m_i`),
/// by brute force over all compositions of `n` into non-increasing parts.
pub fn brute_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(
        rest: usize,
        max_part: usize,
        parts: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        n: usize,
    ) {
        if rest == 0 {
            let mut m = vec![0; n];
            for &p in parts.iter() {
                m[p - 1] += 1;
            }
            out.push(m);
            return;
        }
        for p in (1..=max_part.min(rest)).rev() {
            parts.push(p);
            go(rest - p, p, parts, out, n);
            parts.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out, n);
    out
}

pub fn dense_to_partition(m: &[usize]) -> AllelicPartition {
    AllelicPartition::from_multiplicities(
        m.iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i + 1, c)),
    )
    .unwrap()
}

/// Ewens formula `n! / theta_(n) prod (theta/i)^{m_i} / m_i!`.
pub fn esf(theta: f64, m: &AllelicPartition) -> f64 {
    let n = m.size();
    let mut p = factorial(n) / rising(theta, n);
    for (i, mi) in m.iter() {
        p *= (theta / i as f64).powi(mi as i32) / factorial(mi);
    }
    p
}

/// Pitman formula with the product `prod_{i<k} (theta + i alpha)` written out.
pub fn psf(alpha: f64, theta: f64, m: &AllelicPartition) -> f64 {
    if alpha == 0.0 {
        return esf(theta, m);
    }
    let n = m.size();
    if n == 0 {
        return 1.0;
    }
    let k = m.num_groups();
    let mut p = factorial(n) / rising(theta + 1.0, n - 1);
    p *= (1..k).map(|i| theta + i as f64 * alpha).product::<f64>();
    for (j, mj) in m.iter() {
        p *= (rising(1.0 - alpha, j - 1) / factorial(j)).powi(mj as i32) / factorial(mj);
    }
    p
}

/// `Gamma(theta + n) / (Gamma(theta) n!) b^n (1 - b)^theta`.
pub fn neg_bin(n: usize, theta: f64, b: f64) -> f64 {
    rising(theta, n) / factorial(n) * b.powi(n as i32) * (1.0 - b).powf(theta)
}

pub fn b_t(mu: f64, t: f64) -> f64 {
    if mu == 1.0 {
        return t / (1.0 + t);
    }
    let e = ((mu - 1.0) * t).exp();
    (e - 1.0) / (mu * e - 1.0)
}

/// `prod_i Po(m_i; theta b^i / i)` over `i <= 2000`.
pub fn poisson_product(m: &AllelicPartition, theta: f64, b: f64) -> f64 {
    (1..=2000)
        .map(|i| {
            let rate = theta * b.powi(i as i32) / i as f64;
            let x = m.multiplicity(i);
            (-rate).exp() * rate.powi(x as i32) / factorial(x)
        })
        .product()
}

/// Stationary law as the negative binomial mixture of Pitman laws.
pub fn pi(alpha: f64, theta: f64, mu: f64, m: &AllelicPartition) -> f64 {
    psf(alpha, theta, m) * neg_bin(m.size(), theta, 1.0 / mu)
}

/// Every partition with at most `n_max` items, from the brute-force generator.
pub fn partitions_up_to(n_max: usize) -> Vec<AllelicPartition> {
    (0..=n_max)
        .flat_map(|n| {
            if n == 0 {
                vec![AllelicPartition::empty()]
            } else {
                brute_partitions(n)
                    .iter()
                    .map(|m| dense_to_partition(m))
                    .collect()
            }
        })
        .collect()
}

pub fn table<K: Ord + Clone>(keys: &[K], f: impl Fn(&K) -> f64) -> BTreeMap<K, f64> {
    keys.iter().map(|k| (k.clone(), f(k))).collect()
}
