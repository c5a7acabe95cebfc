//! Channel determinant and the Birman-Schwinger operator
//! `L(z) = -2μ Δ^{-1/2}(p) Δ^{-1/2}(q) / (E(K; p, q) - z)`.
//!
//! Energies on the bound-state side are parametrized by the distance `t > 0`
//! to the threshold `τ`, `z = τ + σ t` with `σ = -1` below and `+1` above, so
//! the per-node determinants stay accurate when `t` is tiny.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg;
use crate::torus::{
    adaptive_quadrature, dispersion, three_body_symbol, TorusPoint, UniformGrid, TWO_PI,
};
use crate::twobody::{self, Side};

use super::SpectrumDecomposition;

/// `Δ_μ(K, p; z) = Δ_μ(K - p; z - ε(p))`.
pub fn channel_determinant(mu: f64, total: &TorusPoint, p: &TorusPoint, z: f64) -> Result<f64> {
    twobody::determinant(mu, &(*total - *p), z - dispersion(p))
}

/// `1 + μ ∫ η(dq) / (E(K; p, q) - z)` by the rectangle rule over `q`.
pub fn channel_determinant_quadrature(
    mu: f64,
    total: &TorusPoint,
    p: &TorusPoint,
    z: f64,
) -> Result<f64> {
    let range = twobody::continuum_edges(&(*total - *p));
    let (lo, hi) = (range.lo + dispersion(p), range.hi + dispersion(p));
    if (lo..=hi).contains(&z) {
        return Err(Error::Domain {
            op: "channel_determinant_quadrature",
            z,
            lo,
            hi,
        });
    }
    let g = adaptive_quadrature(|q| 1.0 / (three_body_symbol(total, p, q) - z), p.dim())?;
    Ok(1.0 + mu * g.value)
}

/// Geometry shared by every `L(z)` at fixed `(μ, K, n)`: shifted nodes, the
/// free symbol on node pairs and each channel's continuum edge.
///
/// The grid is the uniform `n`-point rule translated so that a node sits on
/// the threshold point of the channel branch.
#[derive(Clone, Debug)]
pub struct BsKernel {
    pub mu: f64,
    pub total: TorusPoint,
    pub spectrum: SpectrumDecomposition,
    pub side: Side,
    /// Threshold `τ` on the bound-state side.
    pub threshold: f64,
    pub grid: UniformGrid,
    /// Translation applied to every grid node.
    pub shift: TorusPoint,
    nodes: Vec<TorusPoint>,
    /// `E(K; p_i, p_j)`, row-major.
    energies: Vec<f64>,
    /// Distance from `τ` to the continuum of channel `i`, measured away from the bound side.
    offsets: Vec<f64>,
}

impl BsKernel {
    pub fn new(
        mu: f64,
        total: &TorusPoint,
        spectrum: &SpectrumDecomposition,
        n: usize,
        exec: Exec,
    ) -> Result<Self> {
        if mu == 0.0 || !mu.is_finite() {
            return Err(Error::InvalidCoupling);
        }
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "Birman-Schwinger grid needs an even number of points per axis, got {n}"
            )));
        }
        let d = total.dim();
        let grid = UniformGrid::new(d, n)?;
        let side = Side::of_coupling(mu);
        let threshold = spectrum.threshold(side);
        let anchor = spectrum.threshold_point(side);
        let h = TWO_PI / n as f64;
        let mut s = [0.0; 2];
        for (si, &a) in s.iter_mut().zip(anchor.coords()) {
            *si = a + PI - h * ((a + PI) / h).round();
        }
        let shift = TorusPoint::from_raw(&s[..d]);
        let nodes: Vec<TorusPoint> = grid.nodes().map(|g| g + shift).collect();
        let eps: Vec<f64> = nodes.iter().map(dispersion).collect();
        let size = nodes.len();
        let mut energies = vec![0.0; size * size];
        exec.fill_rows(&mut energies, size, |i, row| {
            let pi = nodes[i];
            for (j, e) in row.iter_mut().enumerate() {
                // Written so that (i, j) and (j, i) round identically.
                *e = dispersion(&(*total - (pi + nodes[j]))) + (eps[i] + eps[j]);
            }
        });
        let offsets = nodes
            .iter()
            .zip(&eps)
            .map(|(p, e)| channel_offset(side, threshold, total, p, *e))
            .collect();
        Ok(Self {
            mu,
            total: *total,
            spectrum: *spectrum,
            side,
            threshold,
            grid,
            shift,
            nodes,
            energies,
            offsets,
        })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[TorusPoint] {
        &self.nodes
    }

    /// `E(K; p_i, p_j)`.
    #[inline]
    pub fn energy(&self, i: usize, j: usize) -> f64 {
        self.energies[i * self.size() + j]
    }

    /// `σ = -1` below, `+1` above.
    #[inline]
    pub fn sigma(&self) -> f64 {
        self.side.sign()
    }

    /// `z = τ + σ t`.
    #[inline]
    pub fn energy_at_gap(&self, t: f64) -> f64 {
        self.threshold + self.sigma() * t
    }

    /// `E - z` at `z = τ + σ t`.
    #[inline]
    pub fn denominator(&self, e: f64, t: f64) -> f64 {
        (e - self.threshold) - self.sigma() * t
    }

    /// `Δ_μ(K, x; τ + σ t)` at an arbitrary point `x`.
    pub fn determinant_at(&self, x: &TorusPoint, t: f64) -> f64 {
        let off = channel_offset(self.side, self.threshold, &self.total, x, dispersion(x));
        twobody::determinant_at_gap(self.mu, &(self.total - *x), off + t).0
    }

    /// Channel determinants at the nodes for `z = τ + σ t`.
    pub fn node_determinants(&self, t: f64) -> Result<Vec<f64>> {
        let z = self.energy_at_gap(t);
        self.nodes
            .iter()
            .zip(&self.offsets)
            .map(|(p, off)| {
                let delta = twobody::determinant_at_gap(self.mu, &(self.total - *p), off + t).0;
                if delta > 0.0 && delta.is_finite() {
                    Ok(delta)
                } else {
                    Err(Error::InvalidEnergy {
                        op: "bs_matrix",
                        z,
                        node: p.coords().to_vec(),
                        delta,
                    })
                }
            })
            .collect()
    }

    /// `L` at distance `t > 0` from the threshold on the bound-state side.
    pub fn operator_at_gap(&self, t: f64, exec: Exec) -> Result<BsOperator> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "distance to the threshold must be positive, got {t}"
            )));
        }
        let scale: Vec<f64> = self
            .node_determinants(t)?
            .into_iter()
            .map(|d| 1.0 / d.sqrt())
            .collect();
        let c = self.grid.weight() * 2.0 * self.mu.abs();
        let size = self.size();
        let tau = self.threshold;
        let st = self.sigma() * t;
        let mut matrix = vec![0.0; size * size];
        exec.fill_rows(&mut matrix, size, |i, row| {
            let e = &self.energies[i * size..(i + 1) * size];
            let si = c * scale[i];
            for (j, m) in row.iter_mut().enumerate() {
                // |E - z| = σ-oriented distance from τ plus t.
                *m = si * scale[j] / ((e[j] - tau) - st).abs();
            }
        });
        Ok(BsOperator {
            mu: self.mu,
            total: self.total,
            z: self.energy_at_gap(t),
            gap: Some(t),
            grid: self.grid,
            shift: self.shift,
            matrix,
            scale,
        })
    }

    /// `L(z)` for any `z` outside `[τ_b, τ_t]`, including the side where no
    /// bound state exists. The kernel keeps its sign there.
    pub fn operator_at(&self, z: f64, exec: Exec) -> Result<BsOperator> {
        let ess = self.spectrum.interval();
        if ess.contains(z) {
            return Err(Error::Domain {
                op: "bs_matrix",
                z,
                lo: ess.lo,
                hi: ess.hi,
            });
        }
        let t = self.sigma() * (z - self.threshold);
        if t > 0.0 {
            return self.operator_at_gap(t, exec);
        }
        let scale = self
            .nodes
            .iter()
            .map(|p| {
                let delta = channel_determinant(self.mu, &self.total, p, z)?;
                if delta > 0.0 {
                    Ok(1.0 / delta.sqrt())
                } else {
                    Err(Error::InvalidEnergy {
                        op: "bs_matrix",
                        z,
                        node: p.coords().to_vec(),
                        delta,
                    })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        let c = -2.0 * self.mu * self.grid.weight();
        let size = self.size();
        let mut matrix = vec![0.0; size * size];
        exec.fill_rows(&mut matrix, size, |i, row| {
            let e = &self.energies[i * size..(i + 1) * size];
            for (j, m) in row.iter_mut().enumerate() {
                *m = c * scale[i] * scale[j] / (e[j] - z);
            }
        });
        Ok(BsOperator {
            mu: self.mu,
            total: self.total,
            z,
            gap: None,
            grid: self.grid,
            shift: self.shift,
            matrix,
            scale,
        })
    }

    /// Largest eigenvalue of `L` at gap `t`.
    pub fn lambda_max_at_gap(&self, t: f64, exec: Exec) -> Result<f64> {
        let op = self.operator_at_gap(t, exec)?;
        Ok(op.lambda_max())
    }
}

/// Distance from `τ` to the pair continuum of channel `p`, positive away from the bound side.
fn channel_offset(side: Side, tau: f64, total: &TorusPoint, p: &TorusPoint, eps: f64) -> f64 {
    let edges = twobody::continuum_edges(&(*total - *p));
    match side {
        Side::Below => edges.lo + eps - tau,
        Side::Above => tau - (edges.hi + eps),
    }
}

/// Nyström matrix of `L(z)` on a (possibly shifted) uniform grid.
#[derive(Clone, Debug, Serialize)]
pub struct BsOperator {
    pub mu: f64,
    pub total: TorusPoint,
    pub z: f64,
    /// Distance to the threshold when `z` is on the bound-state side.
    pub gap: Option<f64>,
    pub grid: UniformGrid,
    pub shift: TorusPoint,
    /// Row-major, `grid.len()` squared.
    #[serde(skip)]
    pub matrix: Vec<f64>,
    /// `Δ^{-1/2}` at the nodes.
    #[serde(skip)]
    pub scale: Vec<f64>,
}

impl BsOperator {
    #[inline]
    pub fn size(&self) -> usize {
        self.scale.len()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..i).all(|j| self.matrix[i * n + j] == self.matrix[j * n + i]))
    }

    pub fn min_entry(&self) -> f64 {
        self.matrix.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn lambda_max(&self) -> f64 {
        let ev = linalg::symmetric_eigenvalues(self.size(), &self.matrix);
        ev.last().copied().unwrap_or(0.0)
    }
}

/// `L(z)` on `UniformGrid(d, n)` (shifted onto the branch threshold point).
pub fn bs_matrix(mu: f64, total: &TorusPoint, z: f64, n: usize) -> Result<BsOperator> {
    let spectrum = super::essential_spectrum(mu, total)?;
    BsKernel::new(mu, total, &spectrum, n, Exec::default())?.operator_at(z, Exec::default())
}

/// Largest eigenvalue with its unit eigenvector, oriented to have a
/// nonnegative sum.
pub fn bs_lambda_max(op: &BsOperator) -> (f64, Vec<f64>) {
    let n = op.size();
    let mut e = linalg::symmetric_eigen(n, &op.matrix);
    let lambda = e.values.last().copied().unwrap_or(0.0);
    let mut v = e.vectors.pop().unwrap_or_default();
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    (lambda, v)
}

/// `det(I - L(z))`.
pub fn fredholm_det(op: &BsOperator) -> f64 {
    let n = op.size();
    let mut a: Vec<f64> = op.matrix.iter().map(|x| -x).collect();
    for i in 0..n {
        a[i * n + i] += 1.0;
    }
    linalg::determinant(n, &a)
}
