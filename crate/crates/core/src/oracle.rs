//! Exact diagonalization of the two- and three-body fibers on the discrete
//! torus with `L` momenta `2πj/L` per axis.
//!
//! The three-body matrix acts on functions `f(p, q)` with
//! `(H f)(p, q) = E(K; p, q) f(p, q) + μ/L^d [Σ_t f(p, t) + Σ_t f(t, q) + Σ_t f(t, p + q - t)]`.
//! The last channel sum is written with the pair sum `p + q` held fixed, which
//! keeps the matrix symmetric on the whole pair space and agrees with the
//! `Σ_t f(t, K - p - q)` form on bosonic functions.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg;
use crate::torus::{dispersion, three_body_symbol, two_body_symbol, wrap_angle, Interval, TorusPoint, TWO_PI};
use crate::twobody::Side;

/// Default cap on the pair-space dimension `L^{2d}` for dense diagonalization.
pub const DENSE_BUDGET: usize = 6000;

/// Momenta `2πj/L` per axis, enumerated row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Lattice {
    pub dim: usize,
    pub l: usize,
}

impl Lattice {
    pub fn new(dim: usize, l: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidArgument(format!("dimension must be 1 or 2, got {dim}")));
        }
        if l < 2 {
            return Err(Error::InvalidArgument(format!("need L ≥ 2, got {l}")));
        }
        Ok(Self { dim, l })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.l.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    fn split(&self, i: usize) -> [usize; 2] {
        if self.dim == 1 {
            [i, 0]
        } else {
            [i / self.l, i % self.l]
        }
    }

    #[inline]
    fn join(&self, a: [usize; 2]) -> usize {
        if self.dim == 1 {
            a[0] % self.l
        } else {
            (a[0] % self.l) * self.l + a[1] % self.l
        }
    }

    pub fn momentum(&self, i: usize) -> TorusPoint {
        let a = self.split(i);
        let c = [
            TWO_PI * a[0] as f64 / self.l as f64,
            TWO_PI * a[1] as f64 / self.l as f64,
        ];
        TorusPoint::new(&c[..self.dim]).expect("finite coordinates")
    }

    /// Index of `p` if every component is a multiple of `2π/L` (to 1e-9 rad).
    pub fn index_of(&self, p: &TorusPoint) -> Option<usize> {
        if p.dim() != self.dim {
            return None;
        }
        let mut a = [0usize; 2];
        for (ax, &x) in p.coords().iter().enumerate() {
            let j = (x * self.l as f64 / TWO_PI).round();
            if wrap_angle(x - TWO_PI * j / self.l as f64).abs() > 1e-9 {
                return None;
            }
            a[ax] = (j as i64).rem_euclid(self.l as i64) as usize;
        }
        Some(self.join(a))
    }

    pub fn require(&self, p: &TorusPoint) -> Result<usize> {
        self.index_of(p).ok_or_else(|| Error::OffGrid {
            point: p.coords().to_vec(),
            l: self.l,
        })
    }

    /// Index of `p_a + p_b - p_c`.
    #[inline]
    pub fn sum_diff(&self, a: usize, b: usize, c: usize) -> usize {
        let (x, y, z) = (self.split(a), self.split(b), self.split(c));
        let l = self.l;
        self.join([(x[0] + y[0] + l - z[0]) % l, (x[1] + y[1] + l - z[1]) % l])
    }

    /// Index of `p_a - p_b`.
    #[inline]
    pub fn diff(&self, a: usize, b: usize) -> usize {
        self.sum_diff(a, 0, b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiberKind {
    TwoBody,
    /// Full pair space `f(p, q)`, dimension `L^{2d}`.
    ThreeBody,
    /// Symmetric functions only, one basis vector per unordered momentum triple.
    ThreeBodyBosonic,
}

/// Dense real symmetric fiber matrix at finite `L`.
#[derive(Clone, Debug)]
pub struct FiniteFiber {
    pub lattice: Lattice,
    pub mu: f64,
    pub quasimomentum: TorusPoint,
    pub kind: FiberKind,
    /// Row-major.
    pub matrix: Vec<f64>,
    /// Bosonic basis: sorted momentum-index triples.
    pub triples: Vec<[usize; 3]>,
}

impl FiniteFiber {
    #[inline]
    pub fn size(&self) -> usize {
        (self.matrix.len() as f64).sqrt().round() as usize
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::symmetric_eigenvalues(self.size(), &self.matrix)
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..i).all(|j| self.matrix[i * n + j] == self.matrix[j * n + i]))
    }
}

/// `diag(E_k(p_j)) + μ/L^d · (all ones)`.
pub fn finite_two_body(mu: f64, k: &TorusPoint, l: usize) -> Result<FiniteFiber> {
    let lat = Lattice::new(k.dim(), l)?;
    lat.require(k)?;
    let n = lat.len();
    let c = mu / n as f64;
    let mut matrix = vec![c; n * n];
    for j in 0..n {
        matrix[j * n + j] += two_body_symbol(k, &lat.momentum(j));
    }
    Ok(FiniteFiber {
        lattice: lat,
        mu,
        quasimomentum: *k,
        kind: FiberKind::TwoBody,
        matrix,
        triples: Vec::new(),
    })
}

/// Root of `1 + μ/L^d Σ_j 1/(E_k(p_j) - z)` on the bound-state side.
pub fn discrete_two_body_root(mu: f64, k: &TorusPoint, l: usize) -> Result<f64> {
    if mu == 0.0 {
        return Err(Error::InvalidCoupling);
    }
    let lat = Lattice::new(k.dim(), l)?;
    lat.require(k)?;
    let energies: Vec<f64> = (0..lat.len()).map(|j| two_body_symbol(k, &lat.momentum(j))).collect();
    let w = 1.0 / lat.len() as f64;
    let det = |z: f64| 1.0 + mu * w * energies.iter().map(|e| 1.0 / (e - z)).sum::<f64>();
    let side = Side::of_coupling(mu);
    let edge = match side {
        Side::Below => energies.iter().copied().fold(f64::INFINITY, f64::min),
        Side::Above => energies.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    // Δ → -∞ at the edge and → 1 far away; the root lies within |μ| of the edge.
    let mut near = 0.0;
    let mut far = mu.abs() + 1.0;
    let at = |s: f64| det(edge + side.sign() * s);
    while at(far) <= 0.0 {
        far *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (near + far);
        if mid == near || mid == far {
            break;
        }
        if mid == 0.0 || at(mid) < 0.0 {
            near = mid;
        } else {
            far = mid;
        }
    }
    Ok(edge + side.sign() * 0.5 * (near + far))
}

/// Full pair-space matrix, dimension `L^{2d}` capped by `budget`.
pub fn finite_three_body(mu: f64, total: &TorusPoint, l: usize, budget: usize) -> Result<FiniteFiber> {
    let lat = Lattice::new(total.dim(), l)?;
    lat.require(total)?;
    let m = lat.len();
    let dim = m * m;
    if dim > budget {
        return Err(Error::SizeBudget { dim, budget });
    }
    let c = mu / m as f64;
    let momenta: Vec<TorusPoint> = (0..m).map(|i| lat.momentum(i)).collect();
    let mut matrix = vec![0.0; dim * dim];
    for p in 0..m {
        for q in 0..m {
            let row = (p * m + q) * dim;
            matrix[row + p * m + q] += three_body_symbol(total, &momenta[p], &momenta[q]);
            for t in 0..m {
                matrix[row + p * m + t] += c;
                matrix[row + t * m + q] += c;
                matrix[row + t * m + lat.sum_diff(p, q, t)] += c;
            }
        }
    }
    Ok(FiniteFiber {
        lattice: lat,
        mu,
        quasimomentum: *total,
        kind: FiberKind::ThreeBody,
        matrix,
        triples: Vec::new(),
    })
}

/// Number of distinct orderings of a sorted triple.
fn orbit_size(t: &[usize; 3]) -> usize {
    match (t[0] == t[1], t[1] == t[2]) {
        (true, true) => 1,
        (false, false) => 6,
        _ => 3,
    }
}

/// Ordered pairs `(x, ·)` in the orbit of `t` with first entry `x`.
fn first_count(t: &[usize; 3], x: usize) -> usize {
    let rest: Vec<usize> = match t.iter().position(|&v| v == x) {
        None => return 0,
        Some(i) => (0..3).filter(|&j| j != i).map(|j| t[j]).collect(),
    };
    if rest[0] == rest[1] {
        1
    } else {
        2
    }
}

/// Bosonic sector: basis `|α⟩ = |α|^{-1/2} Σ_{(p,q) ∈ α} |p, q⟩` over unordered triples
/// `α = {p, q, K - p - q}`. Each channel sum contributes
/// `μ/L^d · Σ_x n_α(x) n_β(x) / (|α||β|)^{1/2}` with `n_α(x)` the orderings of `α`
/// that start with `x`.
pub fn finite_three_body_bosonic(mu: f64, total: &TorusPoint, l: usize) -> Result<FiniteFiber> {
    let lat = Lattice::new(total.dim(), l)?;
    let k = lat.require(total)?;
    let m = lat.len();
    let mut triples = Vec::new();
    for a in 0..m {
        for b in a..m {
            let c = lat.sum_diff(k, 0, a);
            let c = lat.diff(c, b);
            if c >= b {
                triples.push([a, b, c]);
            }
        }
    }
    let dim = triples.len();
    let mut members: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
    for (beta, t) in triples.iter().enumerate() {
        let norm = (orbit_size(t) as f64).sqrt();
        let mut seen = [usize::MAX; 3];
        for (slot, &x) in t.iter().enumerate() {
            if seen.contains(&x) {
                continue;
            }
            seen[slot] = x;
            members
                .entry(x)
                .or_default()
                .push((beta, first_count(t, x) as f64 / norm));
        }
    }
    let momenta: Vec<TorusPoint> = (0..m).map(|i| lat.momentum(i)).collect();
    let c = 3.0 * mu / m as f64;
    let mut matrix = vec![0.0; dim * dim];
    for (alpha, t) in triples.iter().enumerate() {
        let row = alpha * dim;
        matrix[row + alpha] +=
            dispersion(&momenta[t[0]]) + dispersion(&momenta[t[1]]) + dispersion(&momenta[t[2]]);
        let mut seen = [usize::MAX; 3];
        let norm = (orbit_size(t) as f64).sqrt();
        for (slot, &x) in t.iter().enumerate() {
            if seen.contains(&x) {
                continue;
            }
            seen[slot] = x;
            let na = first_count(t, x) as f64 / norm;
            for &(beta, nb) in &members[&x] {
                matrix[row + beta] += c * na * nb;
            }
        }
    }
    // Round-off in the accumulation order must not break exact symmetry.
    for i in 0..dim {
        for j in 0..i {
            let v = 0.5 * (matrix[i * dim + j] + matrix[j * dim + i]);
            matrix[i * dim + j] = v;
            matrix[j * dim + i] = v;
        }
    }
    Ok(FiniteFiber {
        lattice: lat,
        mu,
        quasimomentum: *total,
        kind: FiberKind::ThreeBodyBosonic,
        matrix,
        triples,
    })
}

/// Symmetrizer over the six permutations of `(p, q, K - p - q)` on pair-space vectors.
fn symmetrize(lat: &Lattice, k: usize, v: &[f64]) -> Vec<f64> {
    let m = lat.len();
    let mut out = vec![0.0; v.len()];
    for p in 0..m {
        for q in 0..m {
            let r = lat.diff(lat.diff(k, p), q);
            let s = v[p * m + q] + v[q * m + p] + v[p * m + r] + v[r * m + p] + v[q * m + r] + v[r * m + q];
            out[p * m + q] = s / 6.0;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassifyOptions {
    /// Multiple of the local level spacing added to each side of the essential cluster.
    pub fattening: f64,
    /// Largest `‖P v - v‖` for an eigenvector to count as bosonic.
    pub symmetry_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            fattening: 3.0,
            symmetry_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub l: usize,
    /// Bosonic eigenvalues, ascending.
    pub bosonic: Vec<f64>,
    pub isolated_below: Vec<f64>,
    pub isolated_above: Vec<f64>,
    /// Fattened finite-volume essential cluster.
    pub cluster: Interval,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extrapolated: Option<Extrapolation>,
}

/// Discrete essential set `{e^{(L)}(K - p_j) + ε(p_j)} ∪ {E(K; p_i, p_j)}`, sorted.
fn essential_set(mu: f64, total: &TorusPoint, lat: &Lattice) -> Result<Vec<f64>> {
    let m = lat.len();
    let momenta: Vec<TorusPoint> = (0..m).map(|i| lat.momentum(i)).collect();
    let mut set = Vec::with_capacity(m * m + m);
    for p in &momenta {
        if mu != 0.0 {
            set.push(discrete_two_body_root(mu, &(*total - *p), lat.l)? + dispersion(p));
        }
        for q in &momenta {
            set.push(three_body_symbol(total, p, q));
        }
    }
    set.sort_by(f64::total_cmp);
    Ok(set)
}

/// Bosonic eigenvalues of the fiber, sorted.
///
/// For the full pair space, each numerically degenerate cluster of
/// eigenvectors is projected onto the symmetric sector; the rotated vectors
/// whose projection residual is below the tolerance are counted.
pub fn bosonic_eigenvalues(fiber: &FiniteFiber, tol: f64) -> Result<Vec<f64>> {
    match fiber.kind {
        FiberKind::ThreeBodyBosonic => Ok(fiber.eigenvalues()),
        FiberKind::TwoBody => Ok(fiber.eigenvalues()),
        FiberKind::ThreeBody => {
            let lat = fiber.lattice;
            let k = lat.require(&fiber.quasimomentum)?;
            let n = fiber.size();
            let eig = linalg::symmetric_eigen(n, &fiber.matrix);
            let scale = eig.values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            let mut out = Vec::new();
            let mut start = 0;
            while start < n {
                let mut end = start + 1;
                while end < n && eig.values[end] - eig.values[end - 1] < 1e-9 * scale {
                    end += 1;
                }
                let projected: Vec<Vec<f64>> = (start..end)
                    .map(|i| symmetrize(&lat, k, &eig.vectors[i]))
                    .collect();
                let c = end - start;
                let mut gram = vec![0.0; c * c];
                for a in 0..c {
                    for b in 0..c {
                        gram[a * c + b] = dot(&projected[a], &eig.vectors[start + b]);
                    }
                }
                for a in 0..c {
                    for b in 0..a {
                        let v = 0.5 * (gram[a * c + b] + gram[b * c + a]);
                        gram[a * c + b] = v;
                        gram[b * c + a] = v;
                    }
                }
                let g = linalg::symmetric_eigen(c, &gram);
                for (gi, coeffs) in g.values.iter().zip(&g.vectors) {
                    if *gi < 0.5 {
                        continue;
                    }
                    let mut w = vec![0.0; n];
                    let mut pw = vec![0.0; n];
                    for (a, &ca) in coeffs.iter().enumerate() {
                        axpy(&mut w, ca, &eig.vectors[start + a]);
                        axpy(&mut pw, ca, &projected[a]);
                    }
                    let r: f64 = w.iter().zip(&pw).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
                    if r < tol {
                        let e = (start..end).map(|i| eig.values[i]).sum::<f64>() / c as f64;
                        out.push(e);
                    }
                }
                start = end;
            }
            Ok(out)
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Splits the bosonic spectrum of a three-body fiber into the essential
/// cluster and the isolated levels on either side of it.
pub fn classify_spectrum(fiber: &FiniteFiber, opts: &ClassifyOptions) -> Result<OracleReport> {
    if fiber.kind == FiberKind::TwoBody {
        return Err(Error::InvalidArgument("classification needs a three-body fiber".into()));
    }
    let bosonic = bosonic_eigenvalues(fiber, opts.symmetry_tol)?;
    let set = essential_set(fiber.mu, &fiber.quasimomentum, &fiber.lattice)?;
    let lo = set[0];
    let hi = set[set.len() - 1];
    let spacing_lo = set.iter().find(|&&v| v > lo + 1e-12).map_or(0.0, |v| v - lo);
    let spacing_hi = set.iter().rev().find(|&&v| v < hi - 1e-12).map_or(0.0, |v| hi - v);
    let cluster = Interval {
        lo: lo - opts.fattening * spacing_lo,
        hi: hi + opts.fattening * spacing_hi,
    };
    Ok(OracleReport {
        l: fiber.lattice.l,
        isolated_below: bosonic.iter().copied().filter(|&e| e < cluster.lo).collect(),
        isolated_above: bosonic.iter().copied().filter(|&e| e > cluster.hi).collect(),
        bosonic,
        cluster,
        extrapolated: None,
    })
}

/// The extremal bosonic eigenvalue on the bound-state side: lowest for `μ < 0`, highest for `μ > 0`.
pub fn bound_state_energy(mu: f64, total: &TorusPoint, l: usize) -> Result<f64> {
    if mu == 0.0 {
        return Err(Error::InvalidCoupling);
    }
    let fiber = finite_three_body_bosonic(mu, total, l)?;
    let ev = fiber.eigenvalues();
    Ok(match Side::of_coupling(mu) {
        Side::Below => ev[0],
        Side::Above => ev[ev.len() - 1],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extrapolation {
    pub energy: f64,
    pub error: f64,
    /// Successive-difference ratio of the last three values.
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Richardson extrapolation from successive differences of a sequence taken
/// at geometrically growing `L`. Each consecutive triple gives
/// `e_3 + d_2 / (d_1/d_2 - 1)`; the error estimate is the change between the
/// last two extrapolants (or the last correction when only one exists).
pub fn extrapolate(values: &[f64]) -> Result<Extrapolation> {
    if values.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "extrapolation needs at least 3 values, got {}",
            values.len()
        )));
    }
    let last = values[values.len() - 1];
    let prev = values[values.len() - 2];
    let mut estimates = Vec::new();
    let mut ratio = None;
    for w in values.windows(3) {
        let (d1, d2) = (w[1] - w[0], w[2] - w[1]);
        if d2 == 0.0 {
            estimates.push(w[2]);
            ratio = None;
            continue;
        }
        let rho = d1 / d2;
        if !(rho > 1.0) {
            return Ok(Extrapolation {
                energy: last,
                error: (last - prev).abs().max(d1.abs()),
                ratio: Some(rho),
                warning: Some(format!(
                    "non-monotone sequence (difference ratio {rho}); returning last value"
                )),
            });
        }
        ratio = Some(rho);
        estimates.push(w[2] + d2 / (rho - 1.0));
    }
    let energy = estimates[estimates.len() - 1];
    let error = match estimates.len() {
        1 => (energy - last).abs(),
        k => (energy - estimates[k - 2]).abs(),
    };
    Ok(Extrapolation {
        energy,
        error,
        ratio,
        warning: None,
    })
}

/// Finite-volume bound-state energies over an `L` sequence and their extrapolation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSweep {
    pub ls: Vec<usize>,
    pub energies: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extrapolated: Option<Extrapolation>,
}

pub fn sweep(mu: f64, total: &TorusPoint, ls: &[usize], exec: Exec) -> Result<OracleSweep> {
    let energies = exec
        .map(ls, |&l| bound_state_energy(mu, total, l))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let extrapolated = if energies.len() >= 3 {
        Some(extrapolate(&energies)?)
    } else {
        None
    };
    Ok(OracleSweep {
        ls: ls.to_vec(),
        energies,
        extrapolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_by_two_hand_diagonalization() {
        let f = finite_two_body(-1.0, &TorusPoint::zero(1), 2).unwrap();
        let ev = f.eigenvalues();
        assert_abs_diff_eq!(ev[0], (7.0 - 65f64.sqrt()) / 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(ev[1], (7.0 + 65f64.sqrt()) / 2.0, epsilon = 1e-13);
    }

    #[test]
    fn zero_coupling_is_diagonal() {
        let k = TorusPoint::new(&[TWO_PI / 8.0]).unwrap();
        let f = finite_two_body(0.0, &k, 8).unwrap();
        let mut diag: Vec<f64> = (0..8).map(|j| f.matrix[j * 9]).collect();
        diag.sort_by(f64::total_cmp);
        assert_eq!(f.eigenvalues().len(), 8);
        for (a, b) in f.eigenvalues().iter().zip(&diag) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn discrete_root_is_lowest_eigenvalue() {
        for (mu, j) in [(-1.0, 0usize), (-2.5, 3), (1.5, 5), (0.3, 1)] {
            let k = Lattice::new(1, 16).unwrap().momentum(j);
            let root = discrete_two_body_root(mu, &k, 16).unwrap();
            let ev = finite_two_body(mu, &k, 16).unwrap().eigenvalues();
            let e = if mu < 0.0 { ev[0] } else { ev[15] };
            assert_abs_diff_eq!(root, e, epsilon = 1e-10);
        }
    }

    #[test]
    fn off_grid_and_budget_errors() {
        let k = TorusPoint::new(&[0.1]).unwrap();
        assert!(matches!(finite_two_body(-1.0, &k, 8), Err(Error::OffGrid { .. })));
        let z = TorusPoint::zero(1);
        assert!(matches!(
            finite_three_body(-1.0, &z, 100, DENSE_BUDGET),
            Err(Error::SizeBudget { .. })
        ));
    }

    #[test]
    fn bosonic_sector_matches_filtered_full_space() {
        for (mu, j) in [(-2.0, 0usize), (1.3, 3)] {
            let lat = Lattice::new(1, 12).unwrap();
            let k = lat.momentum(j);
            let full = finite_three_body(mu, &k, 12, DENSE_BUDGET).unwrap();
            assert!(full.is_symmetric());
            let a = bosonic_eigenvalues(&full, 1e-8).unwrap();
            let b = finite_three_body_bosonic(mu, &k, 12).unwrap().eigenvalues();
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn extrapolation_examples() {
        let c = extrapolate(&[1.5, 1.5, 1.5]).unwrap();
        assert_eq!((c.energy, c.error), (1.5, 0.0));
        let s: Vec<f64> = [16.0, 32.0, 64.0].iter().map(|l: &f64| 0.25 + 3.0 / (l * l)).collect();
        assert_abs_diff_eq!(extrapolate(&s).unwrap().energy, 0.25, epsilon = 1e-12);
        let bad = extrapolate(&[1.0, 2.0, 1.5]).unwrap();
        assert!(bad.warning.is_some());
        assert_eq!(bad.energy, 1.5);
    }
}
