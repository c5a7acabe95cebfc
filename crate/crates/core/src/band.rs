//! Per-fiber energies over a quasimomentum grid.

use serde::Serialize;

use crate::error::Error;
use crate::torus::{Interval, TorusPoint, UniformGrid};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandRow {
    pub k: TorusPoint,
    pub energy: Option<f64>,
    /// Bottom and top of the essential spectrum of the fiber.
    pub tau_bottom: f64,
    pub tau_top: f64,
    /// Extrema of the free symbol of the fiber.
    pub e_min: f64,
    pub e_max: f64,
    /// Distance from the energy to the essential spectrum.
    pub gap: Option<f64>,
    pub status: String,
}

impl BandRow {
    pub fn solved(k: TorusPoint, energy: f64, ess: Interval, free: Interval) -> Self {
        Self {
            k,
            energy: Some(energy),
            tau_bottom: ess.lo,
            tau_top: ess.hi,
            e_min: free.lo,
            e_max: free.hi,
            gap: Some(ess.distance(energy)),
            status: "ok".into(),
        }
    }

    pub fn failed(k: TorusPoint, ess: Interval, free: Interval, err: &Error) -> Self {
        Self {
            k,
            energy: None,
            tau_bottom: ess.lo,
            tau_top: ess.hi,
            e_min: free.lo,
            e_max: free.hi,
            gap: None,
            status: err.to_string(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.energy.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandReport {
    pub mu: f64,
    pub grid: UniformGrid,
    /// One row per grid node, in grid order.
    pub rows: Vec<BandRow>,
    /// `[min E, max E]` over the solved rows.
    pub band: Option<Interval>,
    /// Smallest per-fiber distance to the essential spectrum.
    pub gap: Option<f64>,
    /// Every row solved and the gap is positive.
    pub isolated: bool,
    /// The band does not meet the union of the fiber essential spectra.
    pub separated: bool,
    pub all_ok: bool,
}

impl BandReport {
    pub fn assemble(mu: f64, grid: UniformGrid, rows: Vec<BandRow>) -> Self {
        let band = Interval::enclosing(rows.iter().filter_map(|r| r.energy));
        let gap = rows
            .iter()
            .filter_map(|r| r.gap)
            .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))));
        let all_ok = rows.iter().all(BandRow::is_ok);
        let separated = match band {
            Some(b) if all_ok => {
                if mu < 0.0 {
                    rows.iter().all(|r| b.hi < r.tau_bottom)
                } else {
                    rows.iter().all(|r| b.lo > r.tau_top)
                }
            }
            _ => false,
        };
        Self {
            mu,
            grid,
            isolated: all_ok && gap.is_some_and(|g| g > 0.0),
            rows,
            band,
            gap,
            separated,
            all_ok,
        }
    }
}
