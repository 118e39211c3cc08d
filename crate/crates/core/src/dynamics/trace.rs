use rayon::prelude::*;

use super::single_mode::single_mode_variance;
use super::two_mode::TwoModeEvaluator;
use super::{Instant, VACUUM_VARIANCE, VACUUM_VARIANCE_SUM};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAxis {
    /// Squeezing parameter u.
    U,
    /// Time in seconds.
    T,
}

impl GridAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            GridAxis::U => "u",
            GridAxis::T => "t",
        }
    }
}

/// Uniform grid over u or t, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub axis: GridAxis,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(axis: GridAxis, min: f64, max: f64, points: usize) -> Result<Self> {
        let g = Grid { axis, min, max, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::validation("grid.points must be at least 2"));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min >= 0.0 && self.min < self.max) {
            return Err(Error::validation(format!(
                "grid range must be finite, non-negative and ordered (got {} .. {})",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n)
            .map(|i| if i == n { self.max } else { self.min + (self.max - self.min) * i as f64 / n as f64 })
            .collect()
    }

    fn instants(&self) -> Vec<Instant> {
        self.values()
            .into_iter()
            .map(|v| match self.axis {
                GridAxis::U => Instant::Squeezing(v),
                GridAxis::T => Instant::Time(v),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    SingleMode,
    TwoMode,
}

impl TraceKind {
    /// 1/4 for one mode, 2 for two modes.
    pub fn threshold(self) -> f64 {
        match self {
            TraceKind::SingleMode => VACUUM_VARIANCE,
            TraceKind::TwoMode => VACUUM_VARIANCE_SUM,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub t: f64,
    pub u: f64,
    pub value: f64,
    /// Single mode: inside the validity window. Two modes: sum below 2.
    pub flag: bool,
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceTrace {
    pub kind: TraceKind,
    pub coupling: f64,
    pub damping: f64,
    pub points: Vec<TracePoint>,
    /// Times where the value crosses the threshold, linearly interpolated.
    pub threshold_crossings: Vec<f64>,
}

impl VarianceTrace {
    fn new(kind: TraceKind, coupling: f64, damping: f64, points: Vec<TracePoint>) -> Self {
        let thr = kind.threshold();
        let mut threshold_crossings = Vec::new();
        for w in points.windows(2) {
            let (a, b) = (w[0].value - thr, w[1].value - thr);
            // A start exactly on the threshold is not a crossing.
            if (a < 0.0) != (b < 0.0) && a.abs() > 1e-12 * thr {
                let frac = a / (a - b);
                threshold_crossings.push(w[0].t + frac * (w[1].t - w[0].t));
            }
        }
        VarianceTrace { kind, coupling, damping, points, threshold_crossings }
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn min_value(&self) -> f64 {
        self.points.iter().map(|p| p.value).fold(f64::INFINITY, f64::min)
    }

    pub fn clamped_points(&self) -> usize {
        self.points.iter().filter(|p| p.clamped).count()
    }

    /// Points where the formula has left its physical range (value < 0).
    pub fn negative_points(&self) -> usize {
        self.points.iter().filter(|p| p.value < 0.0).count()
    }
}

/// Single-mode variance along a grid; points are evaluated in parallel.
pub fn single_mode_trace(coupling: f64, damping: f64, grid: &Grid) -> Result<VarianceTrace> {
    grid.validate()?;
    let points = grid
        .instants()
        .into_par_iter()
        .map(|at| {
            single_mode_variance(coupling, damping, at).map(|p| TracePoint {
                t: p.t,
                u: p.u,
                value: p.variance,
                flag: p.in_window,
                clamped: p.clamped,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VarianceTrace::new(TraceKind::SingleMode, coupling, damping, points))
}

/// Two-mode variance sum along a grid.
pub fn two_mode_trace(c_k: f64, damping: f64, grid: &Grid) -> Result<VarianceTrace> {
    grid.validate()?;
    let ev = TwoModeEvaluator::new(c_k, damping)?;
    let rate = ev.u_rate();
    let times: Vec<f64> = match grid.axis {
        GridAxis::T => grid.values(),
        GridAxis::U => {
            if rate == 0.0 {
                return Err(Error::Singular("u grid undefined at critical damping"));
            }
            grid.values().into_iter().map(|u| u / rate).collect()
        }
    };
    let evaluated = match ev.path {
        super::EvalPath::ClosedForm => times
            .par_iter()
            .map(|&t| ev.at_times(&[t]).map(|mut v| v.pop().expect("one point")))
            .collect::<Result<Vec<_>>>()?,
        super::EvalPath::OdeOracle => ev.at_times(&times)?,
    };
    let values = grid.values();
    let points = evaluated
        .into_iter()
        .zip(values)
        .map(|(p, v)| TracePoint {
            t: p.t,
            u: if grid.axis == GridAxis::U { v } else { p.u },
            value: p.sum,
            flag: p.sum < VACUUM_VARIANCE_SUM,
            clamped: p.clamped,
        })
        .collect();
    Ok(VarianceTrace::new(TraceKind::TwoMode, c_k.abs(), damping, points))
}
