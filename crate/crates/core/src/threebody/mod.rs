//! Three-boson fiber `H_μ(K)`: essential spectrum, Birman-Schwinger solver for
//! the bound state `E_μ(K)`, eigenfunction reconstruction and band scans.
//!
//! The channel branch `Z_μ(K, p) = e_μ(K - p) + ε(p)` is the energy of a bound
//! pair plus a spectator; together with the free band `[E_min(K), E_max(K)]`
//! it makes up the essential spectrum.

mod bs;
mod scan;
mod solve;

pub use bs::{
    bs_lambda_max, bs_matrix, channel_determinant, channel_determinant_quadrature, fredholm_det,
    BsKernel, BsOperator,
};
pub use scan::{band_scan, edge_divergence_diagnostic, wrong_side_lambdas};
pub use solve::{
    bound_state_energy, bound_state_energy_with, fredholm_root, reconstruct_eigenfunction,
    PairSamples, SolveDiagnostics, SolveOptions, ThreeBodySolution,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::torus::{
    dispersion, dispersion_raw, extremum_on_torus, refine_extremum, ExtremumMode, Interval,
    TorusPoint, UniformGrid, TWO_PI,
};
use crate::twobody::{self, Side};

/// Essential spectrum of `H_μ(K)` split into its two pieces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumDecomposition {
    /// Range of `Z_μ(K, ·)`.
    pub two_particle_branch: Interval,
    /// `[E_min(K), E_max(K)]`.
    pub three_particle_band: Interval,
    pub tau_bottom: f64,
    pub tau_top: f64,
    /// Minimizer and maximizer of `Z_μ(K, ·)`.
    #[serde(skip)]
    pub branch_argmin: TorusPoint,
    #[serde(skip)]
    pub branch_argmax: TorusPoint,
}

impl SpectrumDecomposition {
    pub fn interval(&self) -> Interval {
        Interval {
            lo: self.tau_bottom,
            hi: self.tau_top,
        }
    }

    /// The essential-spectrum edge facing the bound state.
    pub fn threshold(&self, side: Side) -> f64 {
        match side {
            Side::Below => self.tau_bottom,
            Side::Above => self.tau_top,
        }
    }

    /// Point of the branch where the threshold is attained.
    pub fn threshold_point(&self, side: Side) -> TorusPoint {
        match side {
            Side::Below => self.branch_argmin,
            Side::Above => self.branch_argmax,
        }
    }
}

/// `[E_min(K), E_max(K)]` for the free symbol `E(K; p, q)`.
pub fn free_band(total: &TorusPoint) -> Interval {
    // The symbol is a sum over axes, and for fixed p the q-extrema on one axis
    // are 4 ∓ 4|cos((K - p)/2)|; one scalar extremum per axis remains.
    let mut band = Interval { lo: 0.0, hi: 0.0 };
    for &k in total.coords() {
        let g = |sign: f64| {
            move |x: &[f64]| 4.0 + sign * 4.0 * (0.5 * (k - x[0])).cos().abs() + 2.0 - 2.0 * x[0].cos()
        };
        band.lo += extremum_on_torus(g(-1.0), 1, ExtremumMode::Min).value;
        band.hi += extremum_on_torus(g(1.0), 1, ExtremumMode::Max).value;
    }
    band
}

/// `Z_μ(K, p)`.
pub fn channel_energy(mu: f64, total: &TorusPoint, p: &TorusPoint) -> Result<f64> {
    Ok(twobody::bound_state_energy(mu, &(*total - *p))?.energy + dispersion(p))
}

/// `Z_μ(K, ·)` sampled on a grid, with its refined range.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelBranch {
    pub grid: UniformGrid,
    pub samples: Vec<f64>,
    pub range: Interval,
    pub argmin: TorusPoint,
    pub argmax: TorusPoint,
}

/// Default branch sampling per axis.
pub fn default_branch_points(dim: usize) -> usize {
    if dim == 1 {
        256
    } else {
        64
    }
}

/// Samples `Z_μ(K, ·)` on `UniformGrid(d, n_p)` and refines both extrema with
/// fresh two-body solves.
pub fn channel_branch(mu: f64, total: &TorusPoint, n_p: usize) -> Result<ChannelBranch> {
    if mu == 0.0 || !mu.is_finite() {
        return Err(Error::InvalidCoupling);
    }
    let d = total.dim();
    let grid = UniformGrid::new(d, n_p)?;
    let samples = grid
        .nodes()
        .map(|p| channel_energy(mu, total, &p))
        .collect::<Result<Vec<_>>>()?;
    let z = |x: &[f64]| channel_energy(mu, total, &TorusPoint::from_raw(x)).unwrap_or(f64::NAN);
    let step = TWO_PI / n_p as f64;
    let pick = |better: fn(f64, f64) -> bool| {
        let mut best = 0;
        for (i, &v) in samples.iter().enumerate() {
            if better(v, samples[best]) {
                best = i;
            }
        }
        best
    };
    let i_min = pick(|a, b| a < b);
    let i_max = pick(|a, b| a > b);
    let lo = refine_extremum(z, grid.node(i_min).coords(), step, ExtremumMode::Min);
    let hi = refine_extremum(z, grid.node(i_max).coords(), step, ExtremumMode::Max);
    Ok(ChannelBranch {
        grid,
        range: Interval {
            lo: lo.value.min(samples[i_min]),
            hi: hi.value.max(samples[i_max]),
        },
        argmin: TorusPoint::from_raw(&lo.arg),
        argmax: TorusPoint::from_raw(&hi.arg),
        samples,
    })
}

/// Essential spectrum with the default branch sampling.
pub fn essential_spectrum(mu: f64, total: &TorusPoint) -> Result<SpectrumDecomposition> {
    essential_spectrum_with(mu, total, default_branch_points(total.dim()))
}

/// Assembles branch and band; fails with [`Error::Invariant`] if the branch
/// does not stick out of the band on the side of the coupling.
pub fn essential_spectrum_with(
    mu: f64,
    total: &TorusPoint,
    n_p: usize,
) -> Result<SpectrumDecomposition> {
    let branch = channel_branch(mu, total, n_p)?;
    let band = free_band(total);
    let spec = SpectrumDecomposition {
        two_particle_branch: branch.range,
        three_particle_band: band,
        tau_bottom: branch.range.lo.min(band.lo),
        tau_top: branch.range.hi.max(band.hi),
        branch_argmin: branch.argmin,
        branch_argmax: branch.argmax,
    };
    if branch_margin(mu, total, &spec) <= 0.0 {
        return Err(Error::Invariant(format!(
            "channel branch {:?} does not extend past the free band {:?} at K = {:?}",
            branch.range,
            band,
            total.coords()
        )));
    }
    Ok(spec)
}

/// How far the branch sticks out of the free band on the side of the coupling.
///
/// At weak coupling in d = 2 the pair binding can fall below the spacing of
/// doubles near the band edge, so the two edges compare equal. In that case
/// the margin is certified by the binding at the spectator momentum `p*` where
/// the band edge is attained: `E_edge(K) = edge(K - p*) + ε(p*)` exactly, and
/// `Z_μ(K, p*)` exceeds it by that binding.
pub fn branch_margin(mu: f64, total: &TorusPoint, spec: &SpectrumDecomposition) -> f64 {
    let band = spec.three_particle_band;
    let (plain, edge) = if mu < 0.0 {
        (band.lo - spec.tau_bottom, band.lo)
    } else {
        (spec.tau_top - band.hi, band.hi)
    };
    if plain > 0.0 || plain < -16.0 * f64::EPSILON * edge.abs().max(1.0) {
        return plain;
    }
    let d = total.dim();
    let mode = if mu < 0.0 {
        ExtremumMode::Min
    } else {
        ExtremumMode::Max
    };
    let g = |x: &[f64]| {
        let p = TorusPoint::from_raw(x);
        let pair = twobody::continuum_edges(&(*total - p));
        let e = if mu < 0.0 { pair.lo } else { pair.hi };
        e + dispersion_raw(x)
    };
    let star = extremum_on_torus(g, d, mode);
    match twobody::bound_state_energy(mu, &(*total - TorusPoint::from_raw(&star.arg))) {
        Ok(pair) if (star.value - edge).abs() <= 16.0 * f64::EPSILON * edge.abs().max(1.0) => {
            pair.binding
        }
        _ => plain,
    }
}

/// Essential spectra over a list of quasimomenta.
pub fn essential_spectra(
    mu: f64,
    totals: &[TorusPoint],
    exec: Exec,
) -> Vec<Result<SpectrumDecomposition>> {
    exec.map(totals, |k| essential_spectrum(mu, k))
}
