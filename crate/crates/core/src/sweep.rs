//! Parameter sweeps over the Gisin family, before and after optimal
//! filtering.

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filtering::{concurrence, filtered_key_rate, StateSummary};
use crate::metrics::{key_rate_symmetric, qber, Region};
use crate::states::gisin;

/// Concurrence below which a state is treated as separable.
pub const SEPARABLE_TOL: f64 = 1e-12;

/// Inclusive, evenly spaced axis written `start:end:count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridAxis {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(start: f64, end: f64, count: usize) -> Result<Self> {
        if count == 0 || !start.is_finite() || !end.is_finite() {
            return Err(Error::Config(format!("bad grid axis {start}:{end}:{count}")));
        }
        if count == 1 && start != end {
            return Err(Error::Config("a single-point axis needs start == end".into()));
        }
        Ok(Self { start, end, count })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| if k + 1 == self.count { self.end } else { self.start + step * k as f64 })
            .collect()
    }
}

impl FromStr for GridAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(Error::Config(format!("expected start:end:count, got `{s}`")));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| Error::Config(format!("`{t}`: {e}")));
        let count = n.trim().parse::<usize>().map_err(|e| Error::Config(format!("`{n}`: {e}")))?;
        GridAxis::new(num(a)?, num(b)?, count)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub mu: f64,
    pub lam_sq_sum: f64,
    pub lam_sum: f64,
    pub region: Region,
    pub filterable: bool,
    pub p_succ: f64,
    pub lam_sq_sum_after: f64,
    pub lam_sum_after: f64,
    pub r_filtered: f64,
}

/// One row at `(alpha, mu)`. A state is filterable when it is entangled and
/// its Mueller matrix has a diagonal normal form; otherwise the row carries
/// the unfiltered state with `p_succ = 1`.
pub fn gisin_row(alpha: f64, mu: f64) -> Result<SweepRow> {
    let state = gisin(alpha, mu)?;
    let entangled = concurrence(&state) > SEPARABLE_TOL;
    let outcome = if entangled { filtered_key_rate(&state).ok() } else { None };
    let row = match outcome {
        Some(o) => SweepRow {
            alpha,
            mu,
            lam_sq_sum: o.before.lam_sq_sum,
            lam_sum: o.before.lam_sum,
            region: o.before.region,
            filterable: true,
            p_succ: o.p_succ,
            lam_sq_sum_after: o.after.lam_sq_sum,
            lam_sum_after: o.after.lam_sum,
            r_filtered: o.r_filtered,
        },
        None => {
            let s = StateSummary::of(&state);
            let r = key_rate_symmetric(qber(&s.spectrum, 2)?).r_min.max(0.0);
            SweepRow {
                alpha,
                mu,
                lam_sq_sum: s.lam_sq_sum,
                lam_sum: s.lam_sum,
                region: s.region,
                filterable: false,
                p_succ: 1.0,
                lam_sq_sum_after: s.lam_sq_sum,
                lam_sum_after: s.lam_sum,
                r_filtered: r,
            }
        }
    };
    Ok(row)
}

/// Rows in alpha-major order, independent of evaluation order.
pub fn gisin_sweep(alpha: &GridAxis, mu: &GridAxis) -> Result<Vec<SweepRow>> {
    let check = |name: &'static str, v: f64, ok: bool, range: &'static str| {
        if ok { Ok(()) } else { Err(Error::OutOfRange { name, value: v, range }) }
    };
    for v in [alpha.start, alpha.end] {
        check("alpha", v, v > 0.0 && v < 1.0, "(0, 1)")?;
    }
    for v in [mu.start, mu.end] {
        check("mu", v, v > 0.0 && v <= 1.0, "(0, 1]")?;
    }
    let grid: Vec<(f64, f64)> =
        alpha.points().into_iter().flat_map(|a| mu.points().into_iter().map(move |m| (a, m))).collect();
    grid.into_par_iter().map(|(a, m)| gisin_row(a, m)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let ax: GridAxis = "0.1:0.9:5".parse().unwrap();
        let pts = ax.points();
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0], 0.1);
        assert_eq!(pts[4], 0.9);
        assert!((pts[2] - 0.5).abs() < 1e-15);
        assert!("0.1:0.9".parse::<GridAxis>().is_err());
        assert!("a:0.9:3".parse::<GridAxis>().is_err());
        assert!("0.1:0.9:0".parse::<GridAxis>().is_err());
    }

    #[test]
    fn worked_example_row() {
        let row = gisin_row(0.9, 0.85).unwrap();
        assert_eq!(row.region, Region::NonviolatingUnusable);
        assert!(row.filterable);
        assert!(row.lam_sum_after + 1e-9 > std::f64::consts::SQRT_2);
    }

    #[test]
    fn separable_corner_is_not_filterable() {
        let row = gisin_row(0.5, 0.01).unwrap();
        assert!(!row.filterable || row.r_filtered == 0.0);
        assert_eq!(row.r_filtered, 0.0);
    }

    #[test]
    fn out_of_domain_axis_rejected() {
        let a = GridAxis::new(0.0, 0.9, 3).unwrap();
        let m = GridAxis::new(0.5, 1.0, 3).unwrap();
        assert!(gisin_sweep(&a, &m).is_err());
    }
}
