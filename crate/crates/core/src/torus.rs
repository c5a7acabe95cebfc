//! Geometry of the torus `(-π, π]^d` for `d ∈ {1, 2}`: quasimomenta, uniform
//! grids, the lattice dispersion and its two- and three-particle sums,
//! rectangle-rule quadrature and a scan-and-refine extremum finder.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * PI;

/// Wraps an angle into `(-π, π]`. The tie at `-π` goes to `+π`.
#[inline]
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TWO_PI);
    if r > PI {
        r - TWO_PI
    } else {
        r
    }
}

/// A quasimomentum on the `d`-dimensional torus.
#[derive(Clone, Copy, PartialEq)]
pub struct TorusPoint {
    coords: [f64; 2],
    dim: usize,
}

impl TorusPoint {
    /// Builds a point from raw radians, wrapping each component.
    pub fn new(coords: &[f64]) -> Result<Self> {
        if !(1..=2).contains(&coords.len()) {
            return Err(Error::InvalidArgument(format!(
                "torus dimension must be 1 or 2, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite quasimomentum {coords:?}"
            )));
        }
        Ok(Self::from_raw(coords))
    }

    /// Same as [`TorusPoint::new`] for callers that already hold 1 or 2 finite values.
    #[inline]
    pub(crate) fn from_raw(coords: &[f64]) -> Self {
        let mut c = [0.0; 2];
        for (dst, &src) in c.iter_mut().zip(coords) {
            *dst = wrap_angle(src);
        }
        Self {
            coords: c,
            dim: coords.len(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_raw(&[0.0, 0.0][..dim])
    }

    /// The corner `(π, …, π)`.
    pub fn corner(dim: usize) -> Self {
        Self::from_raw(&[PI, PI][..dim])
    }

    /// A point with every component equal to `value`.
    pub fn splat(dim: usize, value: f64) -> Self {
        Self::from_raw(&[value, value][..dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    /// Largest componentwise angular distance to `other`.
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| wrap_angle(a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TorusPoint{:?}", self.coords())
    }
}

impl Add for TorusPoint {
    type Output = TorusPoint;

    #[inline]
    fn add(self, rhs: TorusPoint) -> TorusPoint {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut c = [0.0; 2];
        for i in 0..self.dim {
            c[i] = self.coords[i] + rhs.coords[i];
        }
        TorusPoint::from_raw(&c[..self.dim])
    }
}

impl Sub for TorusPoint {
    type Output = TorusPoint;

    #[inline]
    fn sub(self, rhs: TorusPoint) -> TorusPoint {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut c = [0.0; 2];
        for i in 0..self.dim {
            c[i] = self.coords[i] - rhs.coords[i];
        }
        TorusPoint::from_raw(&c[..self.dim])
    }
}

impl Neg for TorusPoint {
    type Output = TorusPoint;

    #[inline]
    fn neg(self) -> TorusPoint {
        let mut c = [0.0; 2];
        for i in 0..self.dim {
            c[i] = -self.coords[i];
        }
        TorusPoint::from_raw(&c[..self.dim])
    }
}

impl Serialize for TorusPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TorusPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        TorusPoint::new(&v).map_err(serde::de::Error::custom)
    }
}

/// Product grid with `n` nodes `-π + 2πj/n` per axis and equal weights `1/n^d`.
///
/// Nodes are enumerated row-major: index `j0 * n + j1` for `d = 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformGrid {
    dim: usize,
    n: usize,
}

impl UniformGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidArgument(format!(
                "grid dimension must be 1 or 2, got {dim}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("grid needs at least one node per axis".into()));
        }
        Ok(Self { dim, n })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes per axis.
    #[inline]
    pub fn per_axis(&self) -> usize {
        self.n
    }

    /// Total node count `n^d`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn weight(&self) -> f64 {
        1.0 / self.len() as f64
    }

    #[inline]
    pub fn axis_value(&self, j: usize) -> f64 {
        -PI + TWO_PI * (j as f64) / (self.n as f64)
    }

    /// Per-axis indices of a flat node index.
    #[inline]
    pub fn axis_indices(&self, index: usize) -> [usize; 2] {
        match self.dim {
            1 => [index, 0],
            _ => [index / self.n, index % self.n],
        }
    }

    #[inline]
    pub fn flat_index(&self, axes: [usize; 2]) -> usize {
        match self.dim {
            1 => axes[0] % self.n,
            _ => (axes[0] % self.n) * self.n + axes[1] % self.n,
        }
    }

    #[inline]
    pub fn node(&self, index: usize) -> TorusPoint {
        let a = self.axis_indices(index);
        let c = [self.axis_value(a[0]), self.axis_value(a[1])];
        TorusPoint::from_raw(&c[..self.dim])
    }

    pub fn nodes(&self) -> impl Iterator<Item = TorusPoint> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// Flat index of `p` if it coincides with a node (to 1e-9 rad).
    pub fn index_of(&self, p: &TorusPoint) -> Option<usize> {
        if p.dim() != self.dim {
            return None;
        }
        let mut axes = [0usize; 2];
        for (ax, &x) in p.coords().iter().enumerate() {
            let t = (x + PI) * self.n as f64 / TWO_PI;
            let j = (t.round() as i64).rem_euclid(self.n as i64) as usize;
            if wrap_angle(self.axis_value(j) - x).abs() > 1e-9 {
                return None;
            }
            axes[ax] = j;
        }
        Some(self.flat_index(axes))
    }

    /// Index of the node `a + b - c` (always on the grid).
    #[inline]
    pub fn index_sum_diff(&self, a: usize, b: usize, c: usize) -> usize {
        let (aa, bb, cc) = (self.axis_indices(a), self.axis_indices(b), self.axis_indices(c));
        let n = self.n;
        self.flat_index([
            (aa[0] + bb[0] + n - cc[0]) % n,
            (aa[1] + bb[1] + n - cc[1]) % n,
        ])
    }
}

/// Closed energy interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidArgument(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Distance from `x` to the interval, zero inside.
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Smallest interval containing every value; `None` for an empty iterator.
    pub fn enclosing(values: impl IntoIterator<Item = f64>) -> Option<Interval> {
        values.into_iter().fold(None, |acc, v| {
            Some(match acc {
                None => Interval::point(v),
                Some(i) => i.hull(&Interval::point(v)),
            })
        })
    }
}

/// Single-particle lattice kinetic energy `2 Σ (1 - cos p_i)`.
#[inline]
pub fn dispersion(p: &TorusPoint) -> f64 {
    dispersion_raw(p.coords())
}

#[inline]
pub(crate) fn dispersion_raw(p: &[f64]) -> f64 {
    p.iter().map(|x| 2.0 * (1.0 - x.cos())).sum()
}

/// Free energy of a pair with total quasimomentum `k` and relative coordinate `p`.
#[inline]
pub fn two_body_symbol(k: &TorusPoint, p: &TorusPoint) -> f64 {
    dispersion(&(*k - *p)) + dispersion(p)
}

/// Free energy of three particles with total quasimomentum `K` and momenta `p`, `q`, `K-p-q`.
#[inline]
pub fn three_body_symbol(total: &TorusPoint, p: &TorusPoint, q: &TorusPoint) -> f64 {
    dispersion(&(*total - *p - *q)) + dispersion(q) + dispersion(p)
}

/// Rectangle rule `n^{-d} Σ f(node)` for the normalized Haar integral.
pub fn quadrature<F>(f: F, dim: usize, n: usize) -> Result<f64>
where
    F: Fn(&TorusPoint) -> f64,
{
    let grid = UniformGrid::new(dim, n)?;
    quadrature_on(&grid, f)
}

pub fn quadrature_on<F>(grid: &UniformGrid, f: F) -> Result<f64>
where
    F: Fn(&TorusPoint) -> f64,
{
    let mut sum = 0.0;
    for p in grid.nodes() {
        let v = f(&p);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                op: "quadrature",
                node: p.coords().to_vec(),
                value: v,
            });
        }
        sum += v;
    }
    Ok(sum * grid.weight())
}

/// Result of [`adaptive_quadrature`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Points per axis of the last rule evaluated.
    pub n: usize,
    pub converged: bool,
}

/// Doubling schedule of the rectangle rule: start, relative tolerance and cap per axis.
pub fn doubling_schedule(dim: usize) -> (usize, f64, usize) {
    match dim {
        1 => (32, 1e-12, 4096),
        _ => (16, 1e-9, 256),
    }
}

/// Rectangle rule with `n` doubled until two successive values agree to the
/// dimension's relative tolerance or the cap is reached.
pub fn adaptive_quadrature<F>(f: F, dim: usize) -> Result<Quadrature>
where
    F: Fn(&TorusPoint) -> f64,
{
    let (start, tol, cap) = doubling_schedule(dim);
    let mut n = start;
    let mut prev = quadrature(&f, dim, n)?;
    while n < cap {
        n *= 2;
        let cur = quadrature(&f, dim, n)?;
        if (cur - prev).abs() <= tol * cur.abs().max(f64::MIN_POSITIVE) {
            return Ok(Quadrature {
                value: cur,
                n,
                converged: true,
            });
        }
        prev = cur;
    }
    Ok(Quadrature {
        value: prev,
        n,
        converged: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtremumMode {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extremum {
    pub value: f64,
    /// Wrapped coordinates of the extremal point.
    pub arg: Vec<f64>,
}

/// Scan density used by [`extremum_on_torus`] for a given total dimension.
pub fn scan_points(total_dim: usize) -> usize {
    if total_dim <= 2 {
        256
    } else {
        48
    }
}

/// Global extremum of `f` over `(T)^total_dim` by a dense scan followed by
/// compass refinement down to a step of 1e-12.
pub fn extremum_on_torus<F>(f: F, total_dim: usize, mode: ExtremumMode) -> Extremum
where
    F: Fn(&[f64]) -> f64,
{
    assert!((1..=4).contains(&total_dim), "total dimension must be 1..=4");
    let n = scan_points(total_dim);
    let sign = match mode {
        ExtremumMode::Min => 1.0,
        ExtremumMode::Max => -1.0,
    };
    let count = n.pow(total_dim as u32);
    let mut x = vec![0.0; total_dim];
    let mut best = (f64::INFINITY, vec![0.0; total_dim]);
    for idx in 0..count {
        let mut r = idx;
        for c in x.iter_mut().rev() {
            *c = -PI + TWO_PI * ((r % n) as f64) / n as f64;
            r /= n;
        }
        let v = sign * f(&x);
        if v < best.0 {
            best = (v, x.clone());
        }
    }
    refine_extremum(f, &best.1, TWO_PI / n as f64, mode)
}

/// Compass search from `start` with initial step `step`, halving on failure
/// until the step drops below 1e-12.
pub fn refine_extremum<F>(f: F, start: &[f64], step: f64, mode: ExtremumMode) -> Extremum
where
    F: Fn(&[f64]) -> f64,
{
    let sign = match mode {
        ExtremumMode::Min => 1.0,
        ExtremumMode::Max => -1.0,
    };
    let mut x: Vec<f64> = start.iter().map(|&c| wrap_angle(c)).collect();
    let mut fx = sign * f(&x);
    let mut step = step;
    let mut trial = x.clone();
    let mut budget = 200_000usize;
    while step >= 1e-12 && budget > 0 {
        let mut moved = false;
        'axes: for i in 0..x.len() {
            for s in [1.0, -1.0] {
                trial.copy_from_slice(&x);
                trial[i] = wrap_angle(x[i] + s * step);
                let ft = sign * f(&trial);
                budget -= 1;
                if ft < fx {
                    x.copy_from_slice(&trial);
                    fx = ft;
                    moved = true;
                    break 'axes;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Extremum {
        value: sign * fx,
        arg: x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pt(c: &[f64]) -> TorusPoint {
        TorusPoint::new(c).unwrap()
    }

    #[test]
    fn wrap_window() {
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(PI), PI);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(-0.5 - TWO_PI), -0.5, epsilon = 1e-14);
        assert_eq!(wrap_angle(0.0), 0.0);
        let p = pt(&[-PI, 7.0]);
        assert_eq!(p.coords()[0], PI);
        assert!(p.coords()[1] > -PI && p.coords()[1] <= PI);
    }

    #[test]
    fn rejects_bad_points() {
        assert!(TorusPoint::new(&[]).is_err());
        assert!(TorusPoint::new(&[0.0, 0.0, 0.0]).is_err());
        assert!(TorusPoint::new(&[f64::NAN]).is_err());
    }

    #[test]
    fn dispersion_values() {
        assert_eq!(dispersion(&pt(&[0.0])), 0.0);
        assert_abs_diff_eq!(dispersion(&pt(&[PI])), 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dispersion(&pt(&[PI / 2.0, PI / 2.0])), 4.0, epsilon = 1e-15);
    }

    #[test]
    fn symbol_values() {
        let z = TorusPoint::zero(1);
        assert_eq!(two_body_symbol(&z, &z), 0.0);
        assert_abs_diff_eq!(two_body_symbol(&z, &pt(&[PI])), 8.0, epsilon = 1e-14);
        // k = π: the pair energy is flat, 4 - 4 cos(π/2) cos(p - π/2) = 4.
        let k = pt(&[PI]);
        for j in 0..1000 {
            let p = pt(&[-PI + TWO_PI * j as f64 / 1000.0]);
            assert_abs_diff_eq!(two_body_symbol(&k, &p), 4.0, epsilon = 1e-12);
        }
        assert_eq!(three_body_symbol(&z, &z, &z), 0.0);
        assert_abs_diff_eq!(three_body_symbol(&z, &pt(&[PI]), &pt(&[PI])), 8.0, epsilon = 1e-14);
    }

    #[test]
    fn grid_nodes_and_weights() {
        let g = UniformGrid::new(2, 6).unwrap();
        assert_eq!(g.len(), 36);
        let total: f64 = g.nodes().map(|_| g.weight()).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-14);
        for i in 0..g.len() {
            let p = g.node(i);
            assert_eq!(g.index_of(&p), Some(i));
            // closed under negation for even n
            assert!(g.index_of(&-p).is_some());
            for j in 0..i {
                assert!(g.node(j).distance(&p) > 1e-9);
            }
        }
        assert_eq!(g.index_of(&pt(&[0.1, 0.0])), None);
        let a = g.node(7);
        let b = g.node(20);
        let c = g.node(33);
        assert_eq!(g.index_of(&(a + b - c)), Some(g.index_sum_diff(7, 20, 33)));
    }

    #[test]
    fn quadrature_examples() {
        assert_abs_diff_eq!(quadrature(|_| 1.0, 1, 7).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(quadrature(|_| 1.0, 2, 5).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            quadrature(|p| p.coords()[0].cos(), 1, 16).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        let v = quadrature(|p| 1.0 / (5.0 - p.coords()[0].cos()), 1, 64).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 24f64.sqrt(), epsilon = 1e-14);
        let err = quadrature(|p| if p.coords()[0] == 0.0 { f64::NAN } else { 1.0 }, 1, 8)
            .unwrap_err();
        assert!(matches!(err, Error::NonFinite { ref node, .. } if node == &vec![0.0]));
    }

    #[test]
    fn adaptive_quadrature_converges() {
        let q = adaptive_quadrature(|p| 1.0 / (5.0 - p.coords()[0].cos()), 1).unwrap();
        assert!(q.converged);
        assert_abs_diff_eq!(q.value, 1.0 / 24f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn extremum_examples() {
        let e = extremum_on_torus(|x| dispersion_raw(x), 1, ExtremumMode::Min);
        assert_abs_diff_eq!(e.value, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.arg[0], 0.0, epsilon = 1e-7);

        let k = pt(&[PI / 2.0]);
        let e = extremum_on_torus(
            |x| two_body_symbol(&k, &TorusPoint::from_raw(x)),
            1,
            ExtremumMode::Min,
        );
        assert_abs_diff_eq!(e.value, 4.0 - 4.0 * (PI / 4.0).cos(), epsilon = 1e-10);

        let e = extremum_on_torus(|x| dispersion_raw(x), 2, ExtremumMode::Max);
        assert_abs_diff_eq!(e.value, 8.0, epsilon = 1e-12);
    }

    #[test]
    fn three_body_extrema_match_brute_force() {
        // Brute force over a 512 x 512 grid is the reference; the refined
        // extremum must not be worse than it.
        let zero = TorusPoint::zero(1);
        let n = 512;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            for j in 0..n {
                let p = pt(&[-PI + TWO_PI * i as f64 / n as f64]);
                let q = pt(&[-PI + TWO_PI * j as f64 / n as f64]);
                let v = three_body_symbol(&zero, &p, &q);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        let f = |x: &[f64]| {
            three_body_symbol(&zero, &TorusPoint::from_raw(&x[..1]), &TorusPoint::from_raw(&x[1..]))
        };
        let emin = extremum_on_torus(f, 2, ExtremumMode::Min);
        let emax = extremum_on_torus(f, 2, ExtremumMode::Max);
        assert!(emin.value <= lo + 1e-12);
        assert!(emax.value >= hi - 1e-12);
        assert!(lo - emin.value < 1e-4 && emax.value - hi < 1e-4);
    }
}
