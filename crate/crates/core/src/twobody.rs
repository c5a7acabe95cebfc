//! Two-boson fiber `h_μ(k)`: lattice Green's function, the determinant
//! `Δ_μ(k; z) = 1 + μ ∫ η(dq) / (E_k(q) - z)`, the unique bound state and the
//! two-body band.
//!
//! The pair energy factorizes per axis as
//! `E_k(q) = Σ_i [4 - c_i cos(q_i - k_i/2)]` with `c_i = 4 cos(k_i/2) ≥ 0`,
//! so the continuum is `[4d - Σc_i, 4d + Σc_i]` and the Green's function has
//! closed forms in both dimensions: an inverse square root for `d = 1` and an
//! inverse arithmetic-geometric mean for `d = 2`. Both are written in terms of
//! the gap `s` between `z` and the nearest continuum edge, so bound states
//! exponentially close to the edge (weak coupling in `d = 2`) stay resolvable.

use serde::Serialize;

use crate::band::{BandReport, BandRow};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::torus::{
    adaptive_quadrature, doubling_schedule, quadrature, two_body_symbol, Interval, TorusPoint,
    UniformGrid,
};

/// Which side of the continuum an energy lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Below,
    Above,
}

impl Side {
    /// The bound-state side for a coupling: attraction binds below, repulsion above.
    pub fn of_coupling(mu: f64) -> Side {
        if mu < 0.0 {
            Side::Below
        } else {
            Side::Above
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Side::Below => -1.0,
            Side::Above => 1.0,
        }
    }
}

/// Evaluation route for the Green's integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreensMethod {
    /// Inverse square root (`d = 1`) or inverse AGM (`d = 2`).
    ClosedForm,
    /// Inner axis in closed form, outer axis by the rectangle rule (`d = 2` only;
    /// falls back to the closed form for `d = 1`).
    SemiAnalytic,
    /// Full rectangle rule over the torus.
    Quadrature,
}

#[inline]
fn half_bandwidths(k: &TorusPoint) -> [f64; 2] {
    let mut c = [0.0; 2];
    for (ci, &ki) in c.iter_mut().zip(k.coords()) {
        *ci = (4.0 * (0.5 * ki).cos()).abs();
    }
    c
}

/// The continuum `[min_q E_k(q), max_q E_k(q)]` of `h_μ(k)`.
pub fn continuum_edges(k: &TorusPoint) -> Interval {
    let d = k.dim() as f64;
    let spread: f64 = half_bandwidths(k)[..k.dim()].iter().sum();
    Interval {
        lo: 4.0 * d - spread,
        hi: 4.0 * d + spread,
    }
}

/// Side and gap `s > 0` of `z` relative to the continuum of `h(k)`.
fn locate(op: &'static str, k: &TorusPoint, z: f64) -> Result<(Side, f64)> {
    let ess = continuum_edges(k);
    if z < ess.lo {
        Ok((Side::Below, ess.lo - z))
    } else if z > ess.hi {
        Ok((Side::Above, z - ess.hi))
    } else {
        Err(Error::Domain {
            op,
            z,
            lo: ess.lo,
            hi: ess.hi,
        })
    }
}

/// `(F, dF/ds)` for `F(s) = ∫ η(du) / (s + Σc_i - Σ c_i cos u_i)`, `s > 0`.
fn gap_integral(c: &[f64], s: f64) -> (f64, f64) {
    match c.len() {
        1 => {
            let c1 = c[0];
            let r = s * (s + 2.0 * c1);
            let f = 1.0 / r.sqrt();
            (f, -(s + c1) * f / r)
        }
        _ => {
            let (c1, c2) = (c[0], c[1]);
            // F = 1 / AGM(x, y) with x² = s (s + 2c1 + 2c2), y² = (s + 2c1)(s + 2c2).
            let x2 = s * (s + 2.0 * c1 + 2.0 * c2);
            let y2 = (s + 2.0 * c1) * (s + 2.0 * c2);
            let x = x2.sqrt();
            let y = y2.sqrt();
            let dx = (2.0 * s + 2.0 * c1 + 2.0 * c2) / (2.0 * x);
            let dy = (2.0 * s + 2.0 * c1 + 2.0 * c2) / (2.0 * y);
            let (m, dm) = agm_dual((x, dx), (y, dy));
            (1.0 / m, -dm / (m * m))
        }
    }
}

/// Arithmetic-geometric mean carried with its derivative.
fn agm_dual(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let (mut a, mut da) = a;
    let (mut b, mut db) = b;
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a.abs() {
            break;
        }
        let g = (a * b).sqrt();
        let dg = (da * b + a * db) / (2.0 * g);
        let m = 0.5 * (a + b);
        let dm = 0.5 * (da + db);
        a = m;
        da = dm;
        b = g;
        db = dg;
    }
    (0.5 * (a + b), 0.5 * (da + db))
}

/// Green's integral `∫ η(dq) / (E_k(q) - z)` for `z` outside the continuum.
pub fn greens_integral(k: &TorusPoint, z: f64) -> Result<f64> {
    greens_integral_with(k, z, GreensMethod::ClosedForm)
}

pub fn greens_integral_with(k: &TorusPoint, z: f64, method: GreensMethod) -> Result<f64> {
    let (side, s) = locate("greens_integral", k, z)?;
    match method {
        GreensMethod::ClosedForm => Ok(greens_at_gap(k, side, s).0),
        GreensMethod::SemiAnalytic if k.dim() == 2 => semi_analytic(k, z),
        GreensMethod::SemiAnalytic => Ok(greens_at_gap(k, side, s).0),
        GreensMethod::Quadrature => {
            let q = adaptive_quadrature(|q| 1.0 / (two_body_symbol(k, q) - z), k.dim())?;
            Ok(q.value)
        }
    }
}

/// Green's integral and its `z`-derivative `∫ η(dq) / (E_k(q) - z)²` at gap `s`.
#[inline]
pub(crate) fn greens_at_gap(k: &TorusPoint, side: Side, s: f64) -> (f64, f64) {
    let c = half_bandwidths(k);
    let (f, df) = gap_integral(&c[..k.dim()], s);
    // z = edge ∓ s: G = ±F, dG/dz = -dF/ds on both sides.
    (-side.sign() * f, -df)
}

/// `∫ η(dq) / (E_k(q) - z)²`.
pub fn greens_derivative(k: &TorusPoint, z: f64) -> Result<f64> {
    let (side, s) = locate("greens_derivative", k, z)?;
    Ok(greens_at_gap(k, side, s).1)
}

fn semi_analytic(k: &TorusPoint, z: f64) -> Result<f64> {
    let c2 = half_bandwidths(k)[1];
    let k1 = TorusPoint::from_raw(&k.coords()[..1]);
    let outer = |q1: &TorusPoint| {
        // E_k(q) - z = a(q1) - c2 cos(q2 - k2/2)
        let a = two_body_symbol(&k1, q1) + 4.0 - z;
        a.signum() / ((a - c2) * (a + c2)).sqrt()
    };
    let (mut n, tol, cap) = doubling_schedule(1);
    let mut prev = quadrature(&outer, 1, n)?;
    while n < cap {
        n *= 2;
        let cur = quadrature(&outer, 1, n)?;
        if (cur - prev).abs() <= tol * cur.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Ok(prev)
}

/// `Δ_μ(k; z) = 1 + μ G_k(z)`.
pub fn determinant(mu: f64, k: &TorusPoint, z: f64) -> Result<f64> {
    Ok(1.0 + mu * greens_integral(k, z)?)
}

/// `Δ` on the bound-state side as a function of the gap `s` to the continuum edge,
/// with its `s`-derivative.
#[inline]
pub(crate) fn determinant_at_gap(mu: f64, k: &TorusPoint, s: f64) -> (f64, f64) {
    let c = half_bandwidths(k);
    let (f, df) = gap_integral(&c[..k.dim()], s);
    (1.0 - mu.abs() * f, -mu.abs() * df)
}

/// Discrete-grid samples of a function on the torus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSamples {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
}

impl GridSamples {
    /// `(Σ_j w f_j²)^{1/2}` with the grid weight `w`.
    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.weight()).sqrt()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TorusPoint, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.grid.node(i), v))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoBodySolution {
    pub mu: f64,
    pub k: TorusPoint,
    pub energy: f64,
    /// Distance from the energy to the nearest continuum edge.
    pub binding: f64,
    pub ess: Interval,
    pub iterations: usize,
    /// `|Δ_μ(k; energy)|`.
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenfunction_samples: Option<GridSamples>,
}

impl TwoBodySolution {
    pub fn side(&self) -> Side {
        Side::of_coupling(self.mu)
    }

    /// Unnormalized eigenfunction `|μ| / |E_k(p) - e|`, positive everywhere.
    pub fn amplitude(&self, p: &TorusPoint) -> f64 {
        let gap = match self.side() {
            Side::Below => two_body_symbol(&self.k, p) - self.ess.lo + self.binding,
            Side::Above => self.ess.hi - two_body_symbol(&self.k, p) + self.binding,
        };
        self.mu.abs() / gap
    }

    /// Attaches normalized eigenfunction samples on `grid`.
    pub fn with_eigenfunction(mut self, grid: &UniformGrid) -> Self {
        self.eigenfunction_samples = Some(eigenfunction(&self, grid));
        self
    }
}

/// Relative bracket tolerance on the gap for the root search.
fn root_tolerance(dim: usize) -> f64 {
    if dim == 1 {
        1e-12
    } else {
        1e-10
    }
}

/// The unique eigenvalue `e_μ(k)` of `h_μ(k)` outside the continuum.
///
/// The root of `Δ` is bracketed in the gap variable `s` between `δ` (where
/// `Δ < 0`) and `2|μ|` (where `Δ ≥ 1/2`), bisected geometrically until the
/// bracket is narrower than `1e-12` (d = 1) / `1e-10` (d = 2) both absolutely
/// and relative to `s`, then polished by one Newton step.
pub fn bound_state_energy(mu: f64, k: &TorusPoint) -> Result<TwoBodySolution> {
    if mu == 0.0 || !mu.is_finite() {
        return Err(Error::InvalidCoupling);
    }
    let ess = continuum_edges(k);
    let side = Side::of_coupling(mu);
    let edge = match side {
        Side::Below => ess.lo,
        Side::Above => ess.hi,
    };
    let delta_at = |s: f64| determinant_at_gap(mu, k, s).0;

    let mut s_far = 2.0 * mu.abs();
    let mut expansions = 0;
    while delta_at(s_far) <= 0.0 {
        if expansions == 3 {
            return Err(Error::Bracket {
                op: "twobody::bound_state_energy",
                detail: format!("determinant nonpositive at gap {s_far}"),
            });
        }
        s_far *= 2.0;
        expansions += 1;
    }

    // Near end: halve up to 40 times, then keep shrinking geometrically; the
    // d = 2 Green's function diverges only logarithmically at the edge.
    let mut s_near = 1e-13 * edge.abs().max(1.0);
    let mut halvings = 0;
    while delta_at(s_near) >= 0.0 {
        if halvings < 40 {
            s_near *= 0.5;
        } else {
            s_near *= 1e-8;
        }
        halvings += 1;
        if s_near < 1e-300 {
            return Err(Error::Bracket {
                op: "twobody::bound_state_energy",
                detail: "determinant stays nonnegative up to the continuum edge".into(),
            });
        }
    }

    let tol = root_tolerance(k.dim());
    let (mut lo, mut hi) = (s_near, s_far);
    let mut iterations = 0;
    while hi - lo > tol.min(tol * lo).max(lo * 4.0 * f64::EPSILON) && iterations < 400 {
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if delta_at(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let mut s = 0.5 * (lo + hi);
    let (d0, dd) = determinant_at_gap(mu, k, s);
    let newton = s - d0 / dd;
    if newton > lo && newton < hi && delta_at(newton).abs() <= d0.abs() {
        s = newton;
    }
    let residual = delta_at(s).abs();
    Ok(TwoBodySolution {
        mu,
        k: *k,
        energy: edge + side.sign() * s,
        binding: s,
        ess,
        iterations,
        residual,
        eigenfunction_samples: None,
    })
}

/// Eigenfunction `μ / (E_k(p) - e)` sampled on `grid`, unit weighted norm,
/// positive at the node nearest `p = 0`.
pub fn eigenfunction(sol: &TwoBodySolution, grid: &UniformGrid) -> GridSamples {
    let mut values: Vec<f64> = grid.nodes().map(|p| sol.amplitude(&p)).collect();
    let mut samples = GridSamples {
        grid: *grid,
        values: Vec::new(),
    };
    let norm = (values.iter().map(|v| v * v).sum::<f64>() * grid.weight()).sqrt();
    let origin = TorusPoint::zero(grid.dim());
    let nearest = (0..grid.len())
        .min_by(|&a, &b| {
            grid.node(a)
                .distance(&origin)
                .total_cmp(&grid.node(b).distance(&origin))
        })
        .unwrap_or(0);
    let sign = if values[nearest] < 0.0 { -1.0 } else { 1.0 };
    for v in values.iter_mut() {
        *v *= sign / norm;
    }
    samples.values = values;
    samples
}

/// `‖(E_k - e) f + μ ∫ f‖ / ‖f‖` on the grid of the samples.
pub fn eigenfunction_residual(sol: &TwoBodySolution, f: &GridSamples) -> f64 {
    let w = f.grid.weight();
    let mean: f64 = f.values.iter().sum::<f64>() * w;
    let r2: f64 = f
        .iter()
        .map(|(p, v)| {
            let r = (two_body_symbol(&sol.k, &p) - sol.energy) * v + sol.mu * mean;
            r * r
        })
        .sum::<f64>()
        * w;
    r2.sqrt() / f.norm()
}

/// `e_μ(k)` over the quasimomentum grid `UniformGrid(d, n_k)`.
pub fn band_scan(mu: f64, dim: usize, n_k: usize, exec: Exec) -> Result<BandReport> {
    if mu == 0.0 {
        return Err(Error::InvalidCoupling);
    }
    let grid = UniformGrid::new(dim, n_k)?;
    let rows = exec.map_range(grid.len(), |i| {
        let k = grid.node(i);
        let ess = continuum_edges(&k);
        match bound_state_energy(mu, &k) {
            Ok(sol) => BandRow::solved(k, sol.energy, ess, ess),
            Err(e) => BandRow::failed(k, ess, ess, &e),
        }
    });
    Ok(BandReport::assemble(mu, grid, rows))
}
