//! One-dimensional grid integration of unnormalised log densities, used as
//! ground truth for the samplers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest log-density change tolerated between adjacent grid points.
pub const MAX_LOG_JUMP: f64 = 0.5;
/// The last grid point must sit below this fraction of the peak.
pub const TAIL_CUTOFF: f64 = 1e-10;
/// Jumps are only policed where the density exceeds this fraction of the peak.
const JUMP_FLOOR: f64 = 1e-8;

/// A trapezoid-normalised density on an increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

impl GridDensity {
    /// Normalise `exp(log_density)` over `grid`.
    ///
    /// Refuses grids that are not increasing and positive, that are too
    /// coarse (an adjacent log-density jump above [`MAX_LOG_JUMP`] where the
    /// density matters), or that stop before the tail has decayed to
    /// [`TAIL_CUTOFF`] of the peak.
    pub fn from_log_density(grid: &[f64], log_density: &[f64]) -> Result<Self> {
        if grid.len() < 3 || grid.len() != log_density.len() {
            return Err(Error::Grid(
                "need at least 3 points and one value per point".into(),
            ));
        }
        if !(grid[0] > 0.0)
            || grid.windows(2).any(|w| !(w[1] > w[0]))
            || !grid.iter().all(|x| x.is_finite())
        {
            return Err(Error::Grid(
                "grid must be positive, finite and strictly increasing".into(),
            ));
        }
        if log_density
            .iter()
            .any(|v| v.is_nan() || *v == f64::INFINITY)
        {
            return Err(Error::Grid("log density is NaN or +inf on the grid".into()));
        }
        let peak = log_density
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        if !peak.is_finite() {
            return Err(Error::Grid("density vanishes on the whole grid".into()));
        }
        let floor = peak + JUMP_FLOOR.ln();
        for (i, w) in log_density.windows(2).enumerate() {
            if w[0].max(w[1]) >= floor && (w[1] - w[0]).abs() > MAX_LOG_JUMP {
                return Err(Error::Grid(format!(
                    "log density jumps by {:.3} between {} and {}; refine the grid",
                    (w[1] - w[0]).abs(),
                    grid[i],
                    grid[i + 1]
                )));
            }
        }
        let last = log_density[log_density.len() - 1];
        if last - peak >= TAIL_CUTOFF.ln() {
            return Err(Error::Grid(format!(
                "density at the last point {} is {:.3e} of the peak; extend the grid",
                grid[grid.len() - 1],
                (last - peak).exp()
            )));
        }
        let mut density: Vec<f64> = log_density.iter().map(|v| (v - peak).exp()).collect();
        let z = trapezoid(grid, &density);
        for d in density.iter_mut() {
            *d /= z;
        }
        Ok(Self {
            grid: grid.to_vec(),
            density,
        })
    }

    /// Evaluate `log_density` on `grid` and normalise.
    pub fn from_log_fn(grid: &[f64], log_density: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = grid.iter().map(|&x| log_density(x)).collect();
        Self::from_log_density(grid, &values)
    }

    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }

    pub fn mean(&self) -> f64 {
        let f: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.density)
            .map(|(x, d)| x * d)
            .collect();
        trapezoid(&self.grid, &f)
    }

    pub fn sd(&self) -> f64 {
        let m = self.mean();
        let f: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.density)
            .map(|(x, d)| (x - m).powi(2) * d)
            .collect();
        trapezoid(&self.grid, &f).sqrt()
    }

    /// Grid point with the largest density.
    pub fn mode(&self) -> f64 {
        let mut best = 0;
        for i in 1..self.density.len() {
            if self.density[i] > self.density[best] {
                best = i;
            }
        }
        self.grid[best]
    }

    /// Cumulative trapezoid integral at each grid point, starting at 0.
    pub fn cdf_values(&self) -> Vec<f64> {
        let mut cdf = Vec::with_capacity(self.grid.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 1..self.grid.len() {
            acc +=
                0.5 * (self.density[i] + self.density[i - 1]) * (self.grid[i] - self.grid[i - 1]);
            cdf.push(acc);
        }
        cdf
    }

    /// Piecewise-linear CDF; mass below the first grid point is ignored.
    pub fn cdf(&self, x: f64) -> f64 {
        interpolate(&self.grid, &self.cdf_values(), x)
    }

    /// Kolmogorov–Smirnov distance between `draws` and this density.
    pub fn ks_statistic(&self, draws: &[f64]) -> f64 {
        let cdf = self.cdf_values();
        let mut sorted = draws.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &x) in sorted.iter().enumerate() {
            let f = interpolate(&self.grid, &cdf, x);
            d = d
                .max((f - i as f64 / n).abs())
                .max(((i + 1) as f64 / n - f).abs());
        }
        d
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let i = xs.partition_point(|&g| g <= x);
    let (x0, x1) = (xs[i - 1], xs[i]);
    ys[i - 1] + (ys[i] - ys[i - 1]) * (x - x0) / (x1 - x0)
}

pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| 0.5 * (y[0] + y[1]) * (x[1] - x[0]))
        .sum()
}

/// Maximiser of a unimodal `f` on `[lo, hi]` by golden-section search.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// A grid on `(0, upper]` that passes the checks of
/// [`GridDensity::from_log_density`].
///
/// `upper` is grown from 1 by doubling until `log_density` has fallen 30 nats
/// below the largest value seen. The grid starts uniform with `points` nodes
/// and intervals whose log-density jump is too large are bisected until none
/// remain.
pub fn auto_grid(log_density: impl Fn(f64) -> f64, points: usize) -> Result<Vec<f64>> {
    if points < 3 {
        return Err(Error::Grid("need at least 3 points".into()));
    }
    let mut upper: f64 = 1.0;
    let mut found = false;
    for _ in 0..60 {
        let probe: Vec<f64> = (1..=256)
            .map(|i| upper * i as f64 / 256.0)
            .map(&log_density)
            .collect();
        let peak = probe.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if peak.is_finite() && probe[255] < peak - 30.0 {
            found = true;
            break;
        }
        upper *= 2.0;
    }
    if !found {
        return Err(Error::Grid(
            "log density does not decay; cannot place a grid".into(),
        ));
    }
    let h = upper / points as f64;
    let mut grid: Vec<f64> = (1..=points).map(|i| h * i as f64).collect();
    let mut values: Vec<f64> = grid.iter().map(|&x| log_density(x)).collect();
    for _ in 0..40 {
        let peak = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let floor = peak + JUMP_FLOOR.ln() - 1.0;
        let coarse: Vec<usize> = (0..grid.len() - 1)
            .filter(|&i| {
                values[i].max(values[i + 1]) >= floor
                    && (values[i + 1] - values[i]).abs() > 0.8 * MAX_LOG_JUMP
            })
            .collect();
        if coarse.is_empty() {
            return Ok(grid);
        }
        let mut g = Vec::with_capacity(grid.len() + coarse.len());
        let mut v = Vec::with_capacity(grid.len() + coarse.len());
        let mut next = coarse.iter().peekable();
        for i in 0..grid.len() {
            g.push(grid[i]);
            v.push(values[i]);
            if next.peek() == Some(&&i) {
                next.next();
                let mid = 0.5 * (grid[i] + grid[i + 1]);
                g.push(mid);
                v.push(log_density(mid));
            }
        }
        grid = g;
        values = v;
    }
    Err(Error::Grid("grid refinement did not converge".into()))
}
