//! Parameter sweeps over `(N, d)` grids with CSV output.
//!
//! Grid points are solved on the rayon pool and written by a single writer
//! in grid order, one flushed row at a time. In deterministic mode
//! everything runs on the calling thread.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::mpsc;

use rayon::prelude::*;

use crate::eigen::{power_iteration, SolverConfig, ViolationResult};
use crate::entropy::{approx_state, entropy, kl_vs_maxent};
use crate::error::{Error, Result};
use crate::matrix::{bell_value, BellMatrix};
use crate::model::Scenario;

/// Largest `d` a sweep accepts unless [`SweepSpec::allow_large`] is set.
pub const DESK_SCALE_MAX_D: usize = 200_000;

pub const CSV_HEADER: &str =
    "N,d,B_opt,B_maxent,B_approx,E_opt,E_approx,KL_opt,KL_approx,iterations,residual";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Grid {
    #[default]
    Geometric,
    Linear,
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometric" => Ok(Grid::Geometric),
            "linear" => Ok(Grid::Linear),
            other => Err(Error::InvalidArgument(format!(
                "unknown grid '{other}' (expected geometric|linear)"
            ))),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Grid::Geometric => "geometric",
            Grid::Linear => "linear",
        })
    }
}

/// Which quantities to compute for each row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outputs {
    pub opt: bool,
    pub maxent: bool,
    pub approx: bool,
    pub entropy: bool,
    pub kl: bool,
}

impl Outputs {
    pub fn all() -> Self {
        Self {
            opt: true,
            maxent: true,
            approx: true,
            entropy: true,
            kl: true,
        }
    }

    pub fn none() -> Self {
        Self {
            opt: false,
            maxent: false,
            approx: false,
            entropy: false,
            kl: false,
        }
    }
}

impl Default for Outputs {
    fn default() -> Self {
        Self::all()
    }
}

impl FromStr for Outputs {
    type Err = Error;

    /// Comma-separated subset of `opt,maxent,approx,entropy,kl`, or `all`.
    fn from_str(s: &str) -> Result<Self> {
        let mut out = Outputs::none();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match item {
                "all" => out = Outputs::all(),
                "opt" => out.opt = true,
                "maxent" => out.maxent = true,
                "approx" => out.approx = true,
                "entropy" => out.entropy = true,
                "kl" => out.kl = true,
                other => return Err(Error::InvalidArgument(format!("unknown output '{other}'"))),
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n_values: Vec<usize>,
    pub d_min: usize,
    pub d_max: usize,
    pub grid: Grid,
    /// Step factor of the geometric grid.
    pub ratio: f64,
    pub solver: SolverConfig,
    pub outputs: Outputs,
    /// Lift the [`DESK_SCALE_MAX_D`] cap.
    pub allow_large: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            n_values: vec![2],
            d_min: 2,
            d_max: 1000,
            grid: Grid::Geometric,
            ratio: 1.25,
            solver: SolverConfig::default(),
            outputs: Outputs::all(),
            allow_large: false,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::InvalidArgument("no N values given".into()));
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n < 2) {
            return Err(Error::TooFewSettings(n));
        }
        if self.d_min < 2 {
            return Err(Error::InvalidArgument(format!(
                "d_min must be ≥ 2 (got {})",
                self.d_min
            )));
        }
        if self.d_min > self.d_max {
            return Err(Error::EmptyGrid);
        }
        if self.grid == Grid::Geometric && !(self.ratio > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "geometric ratio must be > 1 (got {})",
                self.ratio
            )));
        }
        if self.d_max > DESK_SCALE_MAX_D && !self.allow_large {
            return Err(Error::InvalidArgument(format!(
                "d_max = {} exceeds the desk-scale cap {DESK_SCALE_MAX_D}; pass allow_large to override",
                self.d_max
            )));
        }
        self.solver.validate()
    }

    /// Outcome counts of the grid, ascending and deduplicated.
    pub fn d_values(&self) -> Result<Vec<usize>> {
        self.validate()?;
        let values = match self.grid {
            Grid::Linear => (self.d_min..=self.d_max).collect(),
            Grid::Geometric => geometric_grid(self.d_min, self.d_max, self.ratio),
        };
        if values.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(values)
    }

    /// All `(N, d)` points in output order.
    pub fn points(&self) -> Result<Vec<(usize, usize)>> {
        let ds = self.d_values()?;
        Ok(self
            .n_values
            .iter()
            .flat_map(|&n| ds.iter().map(move |&d| (n, d)))
            .collect())
    }
}

/// `round(d_min · r^k)` for `d_min · r^k < d_max`, then `d_max`; sorted and
/// deduplicated.
pub fn geometric_grid(d_min: usize, d_max: usize, ratio: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut x = d_min as f64;
    while x < d_max as f64 {
        out.push(x.round() as usize);
        x *= ratio;
    }
    out.push(d_max);
    out.sort_unstable();
    out.dedup();
    out
}

/// One grid point. Quantities that were not requested are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub d: usize,
    pub b_opt: Option<f64>,
    pub b_maxent: Option<f64>,
    pub b_approx: Option<f64>,
    pub e_opt: Option<f64>,
    pub e_approx: Option<f64>,
    pub kl_opt: Option<f64>,
    pub kl_approx: Option<f64>,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
}

fn fmt_float(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

impl SweepRow {
    pub fn compute(n: usize, d: usize, solver: &SolverConfig, outputs: &Outputs) -> Result<Self> {
        let scenario = Scenario::new(n, d)?;
        let matrix = BellMatrix::new(scenario);
        let mut row = SweepRow {
            n,
            d,
            b_opt: None,
            b_maxent: None,
            b_approx: None,
            e_opt: None,
            e_approx: None,
            kl_opt: None,
            kl_approx: None,
            iterations: None,
            residual: None,
        };

        if outputs.opt {
            let result: ViolationResult = match power_iteration(&matrix, solver) {
                Ok(r) => r,
                Err(Error::NotConverged { partial }) => *partial,
                Err(e) => return Err(e),
            };
            row.b_opt = Some(result.min_eigenvalue);
            row.iterations = Some(result.iterations_used);
            row.residual = Some(result.residual);
            if outputs.entropy {
                row.e_opt = Some(entropy(&result.optimal_state)?);
            }
            if outputs.kl {
                row.kl_opt = Some(kl_vs_maxent(&result.optimal_state));
            }
        }
        if outputs.maxent {
            row.b_maxent = Some(matrix.maxent_value());
        }
        if outputs.approx {
            let approx = approx_state(scenario);
            row.b_approx = Some(bell_value(&matrix, &approx.vector)?);
            if outputs.entropy {
                row.e_approx = Some(entropy(&approx.vector)?);
            }
            if outputs.kl {
                row.kl_approx = Some(kl_vs_maxent(&approx.vector));
            }
        }
        Ok(row)
    }

    /// One CSV line (no newline) in [`CSV_HEADER`] order.
    pub fn to_csv(&self) -> String {
        [
            self.n.to_string(),
            self.d.to_string(),
            fmt_float(self.b_opt),
            fmt_float(self.b_maxent),
            fmt_float(self.b_approx),
            fmt_float(self.e_opt),
            fmt_float(self.e_approx),
            fmt_float(self.kl_opt),
            fmt_float(self.kl_approx),
            self.iterations.map(|i| i.to_string()).unwrap_or_default(),
            fmt_float(self.residual),
        ]
        .join(",")
    }

    /// Parse a line produced by [`SweepRow::to_csv`].
    pub fn from_csv(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != 11 {
            return Err(Error::InvalidArgument(format!(
                "expected 11 CSV fields, got {}",
                fields.len()
            )));
        }
        let bad = |f: &str| Error::InvalidArgument(format!("bad CSV field '{f}'"));
        let int = |f: &str| f.parse::<usize>().map_err(|_| bad(f));
        let float = |f: &str| -> Result<Option<f64>> {
            if f.is_empty() {
                Ok(None)
            } else {
                f.parse::<f64>().map(Some).map_err(|_| bad(f))
            }
        };
        Ok(SweepRow {
            n: int(fields[0])?,
            d: int(fields[1])?,
            b_opt: float(fields[2])?,
            b_maxent: float(fields[3])?,
            b_approx: float(fields[4])?,
            e_opt: float(fields[5])?,
            e_approx: float(fields[6])?,
            kl_opt: float(fields[7])?,
            kl_approx: float(fields[8])?,
            iterations: if fields[9].is_empty() {
                None
            } else {
                Some(int(fields[9])?)
            },
            residual: float(fields[10])?,
        })
    }
}

fn write_row<W: Write>(out: &mut W, row: &SweepRow) -> Result<()> {
    writeln!(out, "{}", row.to_csv())?;
    out.flush()?;
    Ok(())
}

/// Run a sweep, streaming CSV (header first) to `out`. Returns the rows in
/// grid order.
pub fn run_sweep<W: Write>(spec: &SweepSpec, mut out: W) -> Result<Vec<SweepRow>> {
    let points = spec.points()?;
    writeln!(out, "{CSV_HEADER}")?;
    out.flush()?;

    let mut rows = Vec::with_capacity(points.len());
    if spec.solver.deterministic {
        for &(n, d) in &points {
            let row = SweepRow::compute(n, d, &spec.solver, &spec.outputs)?;
            write_row(&mut out, &row)?;
            rows.push(row);
        }
        return Ok(rows);
    }

    let (tx, rx) = mpsc::channel::<(usize, Result<SweepRow>)>();
    let solver = spec.solver;
    let outputs = spec.outputs;
    std::thread::scope(|scope| -> Result<()> {
        let points = &points;
        scope.spawn(move || {
            points
                .par_iter()
                .enumerate()
                .for_each_with(tx, |tx, (i, &(n, d))| {
                    // The receiver is gone only after an earlier failure.
                    let _ = tx.send((i, SweepRow::compute(n, d, &solver, &outputs)));
                });
        });

        let mut pending = BTreeMap::new();
        for (i, row) in rx {
            pending.insert(i, row);
            while let Some(row) = pending.remove(&rows.len()) {
                let row = row?;
                write_row(&mut out, &row)?;
                rows.push(row);
            }
        }
        Ok(())
    })?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_grid_rounds_and_dedups() {
        let g = geometric_grid(2, 20, 1.25);
        assert_eq!(g, vec![2, 3, 4, 5, 6, 8, 10, 12, 15, 19, 20]);
        assert_eq!(geometric_grid(7, 7, 2.0), vec![7]);
        let g = geometric_grid(2, 2000, 1.25);
        assert_eq!(*g.first().unwrap(), 2);
        assert_eq!(*g.last().unwrap(), 2000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn spec_validation() {
        let spec = SweepSpec {
            d_min: 5,
            d_max: 4,
            ..Default::default()
        };
        let err = spec.d_values().unwrap_err();
        assert_eq!(err.to_string(), "empty grid");

        let spec = SweepSpec {
            ratio: 1.0,
            ..Default::default()
        };
        assert!(spec.validate().is_err());
        let spec = SweepSpec {
            d_min: 1,
            ..Default::default()
        };
        assert!(spec.validate().is_err());
        let spec = SweepSpec {
            d_max: 300_000,
            ..Default::default()
        };
        assert!(spec.validate().is_err());
        let spec = SweepSpec {
            d_max: 300_000,
            allow_large: true,
            ..Default::default()
        };
        assert!(spec.validate().is_ok());
        let spec = SweepSpec {
            n_values: vec![2, 1],
            ..Default::default()
        };
        assert!(matches!(spec.validate(), Err(Error::TooFewSettings(1))));
    }

    #[test]
    fn linear_grid() {
        let spec = SweepSpec {
            grid: Grid::Linear,
            d_min: 3,
            d_max: 6,
            n_values: vec![2, 3],
            ..Default::default()
        };
        assert_eq!(spec.d_values().unwrap(), vec![3, 4, 5, 6]);
        assert_eq!(spec.points().unwrap().len(), 8);
        assert_eq!(spec.points().unwrap()[4], (3, 3));
    }

    #[test]
    fn outputs_parse() {
        let o: Outputs = "opt,kl".parse().unwrap();
        assert!(o.opt && o.kl && !o.maxent && !o.approx && !o.entropy);
        assert_eq!("all".parse::<Outputs>().unwrap(), Outputs::all());
        assert!("opt,bogus".parse::<Outputs>().is_err());
        assert_eq!("linear".parse::<Grid>().unwrap(), Grid::Linear);
        assert!("log".parse::<Grid>().is_err());
    }

    #[test]
    fn small_sweep_values() {
        let spec = SweepSpec {
            n_values: vec![2],
            d_min: 2,
            d_max: 3,
            grid: Grid::Linear,
            ..Default::default()
        };
        let mut buf = Vec::new();
        let rows = run_sweep(&spec, &mut buf).unwrap();
        assert_eq!(rows.len(), 2);
        assert!((rows[0].b_opt.unwrap() - 0.7928932).abs() < 1e-7);
        assert!((rows[1].b_opt.unwrap() - 0.6950486).abs() < 1e-7);
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(SweepRow::from_csv(lines[1]).unwrap(), rows[0]);
        assert_eq!(SweepRow::from_csv(lines[2]).unwrap(), rows[1]);
    }

    #[test]
    fn maxent_only_row() {
        let outputs: Outputs = "maxent".parse().unwrap();
        let row = SweepRow::compute(3, 2, &SolverConfig::default(), &outputs).unwrap();
        let m = BellMatrix::new(Scenario::new(3, 2).unwrap());
        let t = m.symbol();
        assert!((row.b_maxent.unwrap() - (2.0 * t[0] + 2.0 * t[1]) / 2.0).abs() < 1e-15);
        assert!(row.b_opt.is_none() && row.e_opt.is_none() && row.iterations.is_none());
        assert_eq!(
            row.to_csv(),
            format!("3,2,,{:.16e},,,,,,,", row.b_maxent.unwrap())
        );
    }

    #[test]
    fn non_convergence_is_recorded_in_row() {
        let solver = SolverConfig {
            max_iterations: 1,
            residual_tolerance: 1e-15,
            ..Default::default()
        };
        let row = SweepRow::compute(2, 500, &solver, &Outputs::all()).unwrap();
        assert_eq!(row.iterations, Some(1));
        assert!(row.residual.unwrap() > 1e-15);
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let mut spec = SweepSpec {
            n_values: vec![2, 3, 5],
            d_min: 2,
            d_max: 300,
            ..Default::default()
        };
        let mut a = Vec::new();
        run_sweep(&spec, &mut a).unwrap();
        spec.solver.deterministic = true;
        let mut b = Vec::new();
        run_sweep(&spec, &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn float_format_is_lossless() {
        for x in [0.1, 1.0 / 3.0, 0.6950485948291084, 1e-300, 123456.789] {
            let s = format!("{x:.16e}");
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(Some(f64::INFINITY)), "inf");
    }
}
