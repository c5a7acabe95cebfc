//! Band scans over the quasimomentum, the edge-divergence diagnostic and
//! wrong-side probes.

use std::f64::consts::PI;

use quadrature::double_exponential;

use crate::band::{BandReport, BandRow};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::torus::{TorusPoint, UniformGrid};
use crate::twobody::Side;

use super::bs::BsKernel;
use super::solve::{bound_state_energy_with, SolveOptions};
use super::{essential_spectrum, free_band};

/// `E_μ(K)` over `UniformGrid(d, n_k)`. Fibers are solved independently;
/// a failed fiber is recorded in its row.
pub fn band_scan(mu: f64, dim: usize, n_k: usize, opts: &SolveOptions) -> Result<BandReport> {
    if mu == 0.0 || !mu.is_finite() {
        return Err(Error::InvalidCoupling);
    }
    let grid = UniformGrid::new(dim, n_k)?;
    let inner = SolveOptions {
        exec: Exec::Sequential,
        ..*opts
    };
    let rows = opts.exec.map_range(grid.len(), |i| {
        let k = grid.node(i);
        match bound_state_energy_with(mu, &k, &inner) {
            Ok(sol) => BandRow::solved(
                k,
                sol.energy,
                sol.spectrum.interval(),
                sol.spectrum.three_particle_band,
            ),
            Err(e) => {
                let free = free_band(&k);
                let ess = essential_spectrum(mu, &k).map_or(free, |s| s.interval());
                BandRow::failed(k, ess, free, &e)
            }
        }
    });
    Ok(BandReport::assemble(mu, grid, rows))
}

/// Integral over `[c - π, c + π]` split at geometric distances `w·10^j` from
/// the peak `c`.
fn peaked_integral<F: Fn(f64) -> f64>(f: F, c: f64, w: f64, tol: f64) -> f64 {
    let mut cuts = vec![0.0];
    let mut r = w;
    while r < PI {
        cuts.push(r);
        r *= 10.0;
    }
    cuts.push(PI);
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        total += double_exponential::integrate(|x| f(c + x), a, b, tol).integral;
        total += double_exponential::integrate(|x| f(c - x), a, b, tol).integral;
    }
    total / (2.0 * PI)
}

/// `‖F_z‖² = ∫ η(dp) / Δ_μ(K, p; z)` at each `z`, which must lie strictly on
/// the bound-state side of the threshold.
pub fn edge_divergence_diagnostic(mu: f64, total: &TorusPoint, zs: &[f64]) -> Result<Vec<f64>> {
    let spectrum = essential_spectrum(mu, total)?;
    // Only the geometry is needed; a two-point kernel is enough.
    let kernel = BsKernel::new(mu, total, &spectrum, 2, Exec::Sequential)?;
    let centre = spectrum.threshold_point(kernel.side);
    let c = centre.coords();
    zs.iter()
        .map(|&z| {
            let t = kernel.sigma() * (z - kernel.threshold);
            if !(t > 0.0) {
                let ess = spectrum.interval();
                return Err(Error::Domain {
                    op: "edge_divergence_diagnostic",
                    z,
                    lo: ess.lo,
                    hi: ess.hi,
                });
            }
            let w = t.sqrt();
            let value = match total.dim() {
                1 => peaked_integral(
                    |x| 1.0 / kernel.determinant_at(&TorusPoint::from_raw(&[x]), t),
                    c[0],
                    w,
                    1e-12,
                ),
                _ => peaked_integral(
                    |x| {
                        peaked_integral(
                            |y| 1.0 / kernel.determinant_at(&TorusPoint::from_raw(&[x, y]), t),
                            c[1],
                            w,
                            1e-10,
                        )
                    },
                    c[0],
                    w,
                    1e-9,
                ),
            };
            if value.is_finite() {
                Ok(value)
            } else {
                Err(Error::NonFinite {
                    op: "edge_divergence_diagnostic",
                    node: vec![z],
                    value,
                })
            }
        })
        .collect()
}

/// `λ_max(L(z))` at the given distances beyond the essential edge opposite
/// to the bound-state side, where no eigenvalue may exist.
pub fn wrong_side_lambdas(
    mu: f64,
    total: &TorusPoint,
    distances: &[f64],
    n: usize,
    exec: Exec,
) -> Result<Vec<[f64; 2]>> {
    let spectrum = essential_spectrum(mu, total)?;
    let kernel = BsKernel::new(mu, total, &spectrum, n, exec)?;
    distances
        .iter()
        .map(|&r| {
            let z = match kernel.side {
                Side::Below => spectrum.tau_top + r,
                Side::Above => spectrum.tau_bottom - r,
            };
            Ok([z, kernel.operator_at(z, exec)?.lambda_max()])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divergence_grows_toward_threshold() {
        let k = TorusPoint::zero(1);
        let spec = essential_spectrum(-2.0, &k).unwrap();
        let zs: Vec<f64> = (1..=6).map(|m| spec.tau_bottom - 10f64.powi(-m)).collect();
        let v = edge_divergence_diagnostic(-2.0, &k, &zs).unwrap();
        assert!(v.windows(2).all(|w| w[1] > w[0]), "{v:?}");
        let slope = (v[5].ln() - v[3].ln()) / ((1e-6f64).ln() - (1e-4f64).ln());
        assert!((slope + 0.5).abs() < 0.15, "slope {slope}");
        let far = edge_divergence_diagnostic(-2.0, &k, &[spec.tau_bottom - 10.0]).unwrap();
        assert!(far[0].is_finite() && far[0] < 10.0);
        assert!(edge_divergence_diagnostic(-2.0, &k, &[spec.tau_bottom + 0.1]).is_err());
    }

    #[test]
    fn no_eigenvalue_on_wrong_side() {
        let k = TorusPoint::zero(1);
        for mu in [-2.0, 2.0] {
            for [_, l] in wrong_side_lambdas(mu, &k, &[0.1, 1.0, 10.0], 128, Exec::default()).unwrap() {
                assert!(l < 1.0);
            }
        }
    }
}
