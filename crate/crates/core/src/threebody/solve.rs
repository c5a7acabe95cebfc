//! `E_μ(K)` as the root of `λ_max(L(z)) = 1` and the eigenfunction
//! `f = -μ [φ(p) + φ(q) + φ(K - p - q)] / (E(K; p, q) - z)`, `φ = Δ^{-1/2} ψ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::roots::illinois;
use crate::torus::{three_body_symbol, TorusPoint, UniformGrid};
use crate::twobody::Side;

use super::bs::{bs_lambda_max, fredholm_det, BsKernel};
use super::{essential_spectrum, SpectrumDecomposition};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolveOptions {
    /// Nyström points per axis; must be even.
    pub n: usize,
    /// Absolute tolerance on the energy.
    pub z_tol: f64,
    /// Re-evaluate `λ_max` at `2n` and estimate the resulting energy shift.
    pub check_convergence: bool,
    /// Number of log-spaced `λ_max` samples for the monotonicity check.
    pub monotonicity_samples: usize,
    /// Build the eigenfunction and its residuals.
    pub reconstruct: bool,
    #[serde(skip)]
    pub exec: Exec,
}

impl SolveOptions {
    pub fn for_dim(dim: usize) -> Self {
        Self {
            n: if dim == 1 { 512 } else { 48 },
            z_tol: 1e-10,
            check_convergence: dim == 1,
            monotonicity_samples: 10,
            reconstruct: true,
            exec: Exec::default(),
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    /// Energy only: no refinement, sampling or reconstruction.
    pub fn bare(mut self) -> Self {
        self.check_convergence = false;
        self.monotonicity_samples = 0;
        self.reconstruct = false;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    /// Eigenvalue problems solved.
    pub evaluations: usize,
    /// Distance from the threshold at the near end of the bracket and `λ_max` there.
    pub near_gap: f64,
    pub lambda_near: f64,
    pub far_gap: f64,
    /// `(z, λ_max(z))` used for the monotonicity check, ordered toward the threshold.
    pub lambda_samples: Vec<[f64; 2]>,
    pub monotone: bool,
    /// Estimated change of the energy when the grid is doubled.
    pub refined_shift: Option<f64>,
    /// `f` has one sign on the product grid.
    pub one_signed: Option<bool>,
}

/// Samples of the three-body eigenfunction on the product of the (shifted) grid with itself.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSamples {
    pub grid: UniformGrid,
    pub shift: TorusPoint,
    /// `f(p_i, p_j)` row-major, unit norm `(Σ w² f²)^{1/2} = 1`.
    pub values: Vec<f64>,
    /// `φ` at the nodes and at `K - p_i - p_j`, indexed by the node of `p_i + p_j - 2 shift`.
    phi: Vec<f64>,
    chi: Vec<f64>,
}

impl PairSamples {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.len() + j]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThreeBodySolution {
    pub mu: f64,
    pub total: TorusPoint,
    pub energy: f64,
    pub spectrum: SpectrumDecomposition,
    pub n: usize,
    /// Distance from the energy to the essential spectrum.
    pub gap: f64,
    /// `λ_max` at the returned energy.
    pub lambda: f64,
    pub grid: UniformGrid,
    pub shift: TorusPoint,
    /// Perron vector of `L(E)`.
    #[serde(skip)]
    pub bs_vector: Vec<f64>,
    #[serde(skip)]
    pub f_samples: Option<PairSamples>,
    /// `‖(E - z) f + μ 𝕍 f‖ / ‖f‖` with discrete channel sums.
    pub residual: Option<f64>,
    pub symmetry_residual: Option<f64>,
    pub diagnostics: SolveDiagnostics,
}

impl ThreeBodySolution {
    pub fn side(&self) -> Side {
        Side::of_coupling(self.mu)
    }

    /// Strictly below `τ_b` for attraction, strictly above `τ_t` for repulsion.
    pub fn on_bound_side(&self) -> bool {
        match self.side() {
            Side::Below => self.energy < self.spectrum.tau_bottom,
            Side::Above => self.energy > self.spectrum.tau_top,
        }
    }
}

pub fn bound_state_energy(mu: f64, total: &TorusPoint) -> Result<ThreeBodySolution> {
    bound_state_energy_with(mu, total, &SolveOptions::for_dim(total.dim()))
}

/// Bracket `[t_near, t_far]` in the distance to the threshold with
/// `λ_max(t_near) ≥ 1 > λ_max(t_far)`.
struct Bracket {
    near: (f64, f64),
    far: (f64, f64),
}

fn bracket<F>(kernel: &BsKernel, n: usize, mut lambda: F) -> Result<Bracket>
where
    F: FnMut(f64) -> Result<f64>,
{
    let scale = kernel.threshold.abs().max(1.0);
    let mut t_near = 1e-8 * scale;
    let mut l_near = lambda(t_near)?;
    for _ in 0..2 {
        if l_near >= 1.0 {
            break;
        }
        t_near *= 1e-3;
        l_near = lambda(t_near)?;
    }
    if l_near < 1.0 {
        return Err(Error::UnresolvedBoundState {
            lambda_near: l_near,
            delta: t_near,
            threshold: kernel.threshold,
            n,
        });
    }
    let mut t_far = scale;
    let mut l_far = lambda(t_far)?;
    let mut expansions = 0;
    while l_far >= 1.0 {
        if expansions == 40 {
            return Err(Error::Bracket {
                op: "threebody::bound_state_energy",
                detail: format!("largest eigenvalue {l_far} still ≥ 1 at distance {t_far}"),
            });
        }
        t_far *= 4.0;
        l_far = lambda(t_far)?;
        expansions += 1;
    }
    Ok(Bracket {
        near: (t_near, l_near),
        far: (t_far, l_far),
    })
}

/// Solves `λ_max(L(z)) = 1` on the bound-state side.
///
/// The root is bracketed in `t = |z - τ|` between `δ = 1e-8·max(1, |τ|)` (shrunk
/// twice by 1e-3 if needed) and a far point expanded until `λ_max < 1`, then
/// located by regula falsi on `ln λ_max` against `ln t`.
pub fn bound_state_energy_with(
    mu: f64,
    total: &TorusPoint,
    opts: &SolveOptions,
) -> Result<ThreeBodySolution> {
    let spectrum = essential_spectrum(mu, total)?;
    let kernel = BsKernel::new(mu, total, &spectrum, opts.n, opts.exec)?;
    let exec = opts.exec;
    let mut evaluations = 0usize;
    let mut lambda = |t: f64| {
        evaluations += 1;
        kernel.lambda_max_at_gap(t, exec)
    };

    let br = bracket(&kernel, opts.n, &mut lambda)?;
    let (t_near, l_near) = br.near;
    let (t_far, l_far) = br.far;
    let t = if l_near == 1.0 {
        t_near
    } else {
        let (u, _) = illinois(
            |u: f64| Ok(lambda(u.exp())?.ln()),
            t_near.ln(),
            t_far.ln(),
            l_near.ln(),
            l_far.ln(),
            opts.z_tol / t_far,
        )?;
        u.exp()
    };

    let mut samples = Vec::new();
    if opts.monotonicity_samples >= 2 {
        let m = opts.monotonicity_samples;
        let (a, b) = (t_far.ln(), t_near.ln());
        for s in 0..m {
            let ts = (a + (b - a) * s as f64 / (m - 1) as f64).exp();
            let l = match s {
                0 => l_far,
                _ if s == m - 1 => l_near,
                _ => lambda(ts)?,
            };
            samples.push([kernel.energy_at_gap(ts), l]);
        }
    }
    let monotone = samples.windows(2).all(|w| w[1][1] > w[0][1]);

    let refined_shift = if opts.check_convergence {
        let h = 1e-4 * t;
        let slope = (lambda(t + h)? - lambda(t - h)?) / (2.0 * h);
        let fine = BsKernel::new(mu, total, &spectrum, 2 * opts.n, exec)?;
        evaluations += 1;
        let l2 = fine.lambda_max_at_gap(t, exec)?;
        Some(-kernel.sigma() * (l2 - 1.0) / slope)
    } else {
        None
    };

    let op = kernel.operator_at_gap(t, exec)?;
    evaluations += 1;
    let (lam, psi) = bs_lambda_max(&op);
    let energy = kernel.energy_at_gap(t);

    let mut diagnostics = SolveDiagnostics {
        evaluations,
        near_gap: t_near,
        lambda_near: l_near,
        far_gap: t_far,
        lambda_samples: samples,
        monotone,
        refined_shift,
        one_signed: None,
    };
    let (f_samples, residual, symmetry_residual) = if opts.reconstruct {
        let f = reconstruct_eigenfunction(&kernel, t, lam, &psi, exec);
        let (lo, hi) = f
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        diagnostics.one_signed = Some(lo * hi > 0.0);
        let r = schrodinger_residual(&kernel, t, &f);
        let s = symmetry_residual(&kernel, t, &f);
        (Some(f), Some(r), Some(s))
    } else {
        (None, None, None)
    };

    Ok(ThreeBodySolution {
        mu,
        total: *total,
        energy,
        spectrum,
        n: opts.n,
        gap: t,
        lambda: lam,
        grid: kernel.grid,
        shift: kernel.shift,
        bs_vector: psi,
        f_samples,
        residual,
        symmetry_residual,
        diagnostics,
    })
}

/// Root of `det(I - L(z))` found independently of the eigenvalue path: from
/// the far side toward the threshold until the determinant changes sign, then
/// regula falsi in `ln t`.
pub fn fredholm_root(mu: f64, total: &TorusPoint, n: usize, z_tol: f64, exec: Exec) -> Result<f64> {
    let spectrum = essential_spectrum(mu, total)?;
    let kernel = BsKernel::new(mu, total, &spectrum, n, exec)?;
    let det = |t: f64| -> Result<f64> { Ok(fredholm_det(&kernel.operator_at_gap(t, exec)?)) };
    let br = bracket(&kernel, n, |t| kernel.lambda_max_at_gap(t, exec))?;
    let (t_near, _) = br.near;
    let mut hi = br.far.0;
    let mut d_hi = det(hi)?;
    let mut lo = hi * 0.7;
    let mut d_lo = det(lo)?;
    while d_lo > 0.0 {
        if lo < t_near {
            return Err(Error::Bracket {
                op: "threebody::fredholm_root",
                detail: "Fredholm determinant keeps its sign up to the threshold".into(),
            });
        }
        hi = lo;
        d_hi = d_lo;
        lo *= 0.7;
        d_lo = det(lo)?;
    }
    let (u, _) = illinois(
        |u: f64| det(u.exp()),
        lo.ln(),
        hi.ln(),
        d_lo,
        d_hi,
        z_tol / hi,
    )?;
    Ok(kernel.energy_at_gap(u.exp()))
}

/// Builds `f` on the product grid from the Perron vector `psi` of `L` at gap `t`.
///
/// `φ` at the off-grid points `K - p_i - p_j` comes from the Nyström extension
/// `ψ(x) = λ^{-1} Σ_j w L(x, p_j) ψ_j`.
pub fn reconstruct_eigenfunction(
    kernel: &BsKernel,
    t: f64,
    lambda: f64,
    psi: &[f64],
    exec: Exec,
) -> PairSamples {
    let nodes = kernel.nodes();
    let size = nodes.len();
    let grid = kernel.grid;
    let w = grid.weight();
    let mu = kernel.mu;
    let total = kernel.total;
    let dets = kernel
        .node_determinants(t)
        .expect("gap already validated by the solver");
    let mut phi: Vec<f64> = psi
        .iter()
        .zip(&dets)
        .map(|(p, d)| p / d.sqrt())
        .collect();
    let two_shift = kernel.shift + kernel.shift;
    let mut chi = exec.map_range(size, |m| {
        let x = total - two_shift - grid.node(m);
        let sum: f64 = nodes
            .iter()
            .zip(&phi)
            .map(|(pj, fj)| fj / kernel.denominator(three_body_symbol(&total, &x, pj), t))
            .sum();
        -2.0 * mu * w / lambda * sum / kernel.determinant_at(&x, t)
    });
    let zero = grid.index_of(&TorusPoint::zero(grid.dim())).expect("even grid contains 0");
    let mut values = vec![0.0; size * size];
    exec.fill_rows(&mut values, size, |i, row| {
        for (j, v) in row.iter_mut().enumerate() {
            let m = grid.index_sum_diff(i, j, zero);
            *v = -mu * (phi[i] + phi[j] + chi[m]) / kernel.denominator(kernel.energy(i, j), t);
        }
    });
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt() * w;
    for v in values.iter_mut().chain(phi.iter_mut()).chain(chi.iter_mut()) {
        *v /= norm;
    }
    PairSamples {
        grid,
        shift: kernel.shift,
        values,
        phi,
        chi,
    }
}

/// `max |f(p,q) - f(q,p)|, |f(p,q) - f(p, K-p-q)|` over the product grid.
///
/// When `K - p - q` falls on the grid the stored sample is used; otherwise `f`
/// is evaluated there from `φ`.
pub fn symmetry_residual(kernel: &BsKernel, t: f64, f: &PairSamples) -> f64 {
    let grid = f.grid;
    let size = grid.len();
    let nodes = kernel.nodes();
    let zero = grid.index_of(&TorusPoint::zero(grid.dim())).expect("even grid contains 0");
    let three_shift = kernel.shift + kernel.shift + kernel.shift;
    let anchor = grid.index_of(&(kernel.total - three_shift));
    let mut worst = 0.0f64;
    for i in 0..size {
        for j in 0..size {
            let v = f.get(i, j);
            worst = worst.max((v - f.get(j, i)).abs());
            let m = grid.index_sum_diff(i, j, zero);
            let other = match anchor {
                Some(c) => f.get(i, grid.index_sum_diff(c, zero, m)),
                None => {
                    let y = kernel.total - (nodes[i] + nodes[j]);
                    let e = three_body_symbol(&kernel.total, &nodes[i], &y);
                    -kernel.mu * (f.phi[i] + f.chi[m] + f.phi[j]) / kernel.denominator(e, t)
                }
            };
            worst = worst.max((v - other).abs());
        }
    }
    worst
}

/// `‖(E(K; ·,·) - z) f + μ 𝕍 f‖ / ‖f‖` on the product grid, where `𝕍` is the
/// sum of the three discrete channel sums `Σ_t f(p, t)`, `Σ_t f(t, q)` and
/// `Σ_t f(t, p + q - t)`.
pub fn schrodinger_residual(kernel: &BsKernel, t: f64, f: &PairSamples) -> f64 {
    let grid = f.grid;
    let size = grid.len();
    let w = grid.weight();
    let zero = grid.index_of(&TorusPoint::zero(grid.dim())).expect("even grid contains 0");
    let rows: Vec<f64> = (0..size)
        .map(|i| f.values[i * size..(i + 1) * size].iter().sum::<f64>() * w)
        .collect();
    let pairs: Vec<f64> = (0..size)
        .map(|m| (0..size).map(|l| f.get(l, grid.index_sum_diff(m, zero, l))).sum::<f64>() * w)
        .collect();
    let (mut r2, mut f2) = (0.0, 0.0);
    for i in 0..size {
        for j in 0..size {
            let v = f.get(i, j);
            let m = grid.index_sum_diff(i, j, zero);
            let r = kernel.denominator(kernel.energy(i, j), t) * v
                + kernel.mu * (rows[i] + rows[j] + pairs[m]);
            r2 += r * r;
            f2 += v * v;
        }
    }
    (r2 / f2).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn one_dimensional_attractive_ground_state() {
        let k = TorusPoint::zero(1);
        let sol = bound_state_energy_with(-2.0, &k, &SolveOptions::for_dim(1).with_n(256)).unwrap();
        assert!(sol.on_bound_side());
        assert!((sol.energy - -2.0386077).abs() < 1e-4, "{}", sol.energy);
        assert!(sol.diagnostics.monotone);
        assert_eq!(sol.diagnostics.one_signed, Some(true));
        assert!(sol.symmetry_residual.unwrap() < 1e-8);
        assert!(sol.residual.unwrap() < 1e-6, "{:?}", sol.residual);
    }

    #[test]
    fn fredholm_root_matches_eigenvalue_root() {
        let k = TorusPoint::new(&[PI / 2.0]).unwrap();
        let opts = SolveOptions::for_dim(1).with_n(128).bare();
        let a = bound_state_energy_with(-2.0, &k, &opts).unwrap().energy;
        let b = fredholm_root(-2.0, &k, 128, 1e-10, Exec::default()).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}
