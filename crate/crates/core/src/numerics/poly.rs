//! Polynomial roots by Aberth–Ehrlich simultaneous iteration.

use serde::Serialize;

use super::matrix::{complex_pair, C64, ONE, ZERO};
use crate::error::{NchoError, Result};

pub const DEFAULT_MERGE_TOL: f64 = 1e-8;

/// A root and the number of computed roots merged into it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    #[serde(with = "complex_pair")]
    pub value: C64,
    pub multiplicity: usize,
}

impl Root {
    pub fn is_multiple(&self) -> bool {
        self.multiplicity > 1
    }
}

/// Horner evaluation; coefficients ascending.
pub fn poly_eval(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// Value and derivative.
pub fn poly_eval_with_derivative(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn poly_derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Ascending coefficients of Π (z − r).
pub fn poly_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut out = vec![ONE];
    for &r in roots {
        let mut next = vec![ZERO; out.len() + 1];
        for (k, &c) in out.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * r;
        }
        out = next;
    }
    out
}

/// All roots of the polynomial with ascending `coeffs`, clustered within
/// `tol·max(1,|root|)`. Exact zero low-order coefficients give exact zero roots.
pub fn poly_roots(coeffs: &[C64], tol: f64) -> Result<Vec<Root>> {
    let raw = poly_roots_raw(coeffs)?;
    let mut roots = cluster_roots(&raw, tol);
    for root in roots.iter_mut().filter(|r| r.multiplicity > 1 && r.value != ZERO) {
        refine_cluster(coeffs, root, tol);
    }
    Ok(roots)
}

/// A root of multiplicity m is a simple root of the (m−1)-th derivative, so
/// Newton there recovers full accuracy; the split members only carry √ε.
fn refine_cluster(coeffs: &[C64], root: &mut Root, tol: f64) {
    let mut d = coeffs.to_vec();
    for _ in 1..root.multiplicity {
        d = poly_derivative(&d);
    }
    let dd = poly_derivative(&d);
    let start = root.value;
    let radius = tol * start.norm().max(1.0);
    let mut z = start;
    for _ in 0..8 {
        let slope = poly_eval(&dd, z);
        if slope == ZERO {
            break;
        }
        let step = poly_eval(&d, z) / slope;
        z -= step;
        if step.norm() <= 2.0 * f64::EPSILON * z.norm() {
            break;
        }
    }
    if z.re.is_finite() && z.im.is_finite() && (z - start).norm() <= radius {
        root.value = z;
    }
}

/// Unclustered roots, each listed once per multiplicity.
pub fn poly_roots_raw(coeffs: &[C64]) -> Result<Vec<C64>> {
    let degree = match coeffs.iter().rposition(|&c| c != ZERO) {
        Some(d) => d,
        None => return Err(NchoError::DegenerateInput("zero polynomial".into())),
    };
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(NchoError::DegenerateInput("non-finite coefficient".into()));
    }
    let zeros = coeffs.iter().position(|&c| c != ZERO).unwrap_or(0);
    let mut roots = vec![ZERO; zeros];
    let reduced: Vec<C64> = coeffs[zeros..=degree].to_vec();
    match reduced.len() - 1 {
        0 => {}
        1 => roots.push(-reduced[0] / reduced[1]),
        _ => roots.extend(aberth(&reduced)),
    }
    Ok(roots)
}

fn aberth(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let monic: Vec<C64> = coeffs.iter().map(|&c| c / lead).collect();
    let deriv = poly_derivative(&monic);

    // Start on a circle at the geometric-mean root modulus.
    let radius = monic[0].norm().powf(1.0 / n as f64).max(1e-3);
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            C64::from_polar(radius, theta)
        })
        .collect();

    let mut converged = vec![false; n];
    for _ in 0..500 {
        let mut all_done = true;
        for k in 0..n {
            if converged[k] {
                continue;
            }
            let p = poly_eval(&monic, z[k]);
            if p == ZERO {
                converged[k] = true;
                continue;
            }
            let dp = poly_eval(&deriv, z[k]);
            let ratio = p / dp;
            let repulsion: C64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d == ZERO {
                        ZERO
                    } else {
                        ONE / d
                    }
                })
                .sum();
            let denom = ONE - ratio * repulsion;
            let step = if denom.norm() == 0.0 || !denom.re.is_finite() {
                ratio
            } else {
                ratio / denom
            };
            if !step.re.is_finite() || !step.im.is_finite() {
                converged[k] = true;
                continue;
            }
            z[k] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z[k].norm().max(f64::MIN_POSITIVE) {
                converged[k] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }

    for r in z.iter_mut() {
        polish_newton(&monic, &deriv, r);
    }
    z
}

/// A few Newton steps, kept only while they reduce |p|.
fn polish_newton(coeffs: &[C64], deriv: &[C64], r: &mut C64) {
    let mut best = poly_eval(coeffs, *r).norm();
    for _ in 0..3 {
        let dp = poly_eval(deriv, *r);
        if dp == ZERO || best == 0.0 {
            return;
        }
        let cand = *r - poly_eval(coeffs, *r) / dp;
        let val = poly_eval(coeffs, cand).norm();
        if val < best && cand.re.is_finite() && cand.im.is_finite() {
            *r = cand;
            best = val;
        } else {
            return;
        }
    }
}

/// Single-linkage clustering within tol·max(1,|r|); the cluster value is the mean.
/// Output ordered by modulus, then argument in [0, 2π).
pub fn cluster_roots(raw: &[C64], tol: f64) -> Vec<Root> {
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut k = i;
        while parent[k] != r {
            let next = parent[k];
            parent[k] = r;
            k = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = raw[i].norm().max(raw[j].norm()).max(1.0);
            if (raw[i] - raw[j]).norm() <= tol * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<C64>)> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, members)) => members.push(raw[i]),
            None => groups.push((root, vec![raw[i]])),
        }
    }
    let mut roots: Vec<Root> = groups
        .into_iter()
        .map(|(_, members)| {
            let m = members.len();
            let value = if members.iter().all(|&z| z == ZERO) {
                ZERO
            } else {
                members.iter().sum::<C64>() / m as f64
            };
            Root {
                value,
                multiplicity: m,
            }
        })
        .collect();
    roots.sort_by(|a, b| {
        let key = |z: C64| (z.norm(), positive_arg(z));
        let (ka, kb) = (key(a.value), key(b.value));
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    roots
}

/// Argument in [0, 2π), with values within 1e-12 of 2π wrapped to 0.
pub fn positive_arg(z: C64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let mut a = z.arg();
    if a < 0.0 {
        a += tau;
    }
    if tau - a < 1e-12 {
        a = 0.0;
    }
    a
}
