//! Environment spectral densities `J(w)`: the parametric ohmic family and
//! tabulated samples under monotone cubic (PCHIP) interpolation.

use std::path::Path;

use crate::error::{Error, Result};

pub const MIN_TABULATED_POINTS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensity {
    /// `J(w) = eta * w * exp(-w / lambda)` for `w >= 0`.
    Ohmic {
        eta: f64,
        lambda: f64,
    },
    Tabulated(Tabulated),
}

impl SpectralDensity {
    pub fn ohmic(eta: f64, lambda: f64) -> Result<Self> {
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::InvalidDensity(format!("coupling eta = {eta} must be finite and >= 0")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidDensity(format!("cutoff lambda = {lambda} must be finite and > 0")));
        }
        Ok(Self::Ohmic { eta, lambda })
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Tabulated::new(grid, values).map(Self::Tabulated)
    }

    /// Closed hull on which `J` may be evaluated.
    pub fn hull(&self) -> (f64, f64) {
        match self {
            Self::Ohmic { .. } => (0.0, f64::INFINITY),
            Self::Tabulated(t) => (t.grid[0], *t.grid.last().unwrap()),
        }
    }

    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        let (lo, hi) = self.hull();
        if !(omega >= lo && omega <= hi) {
            return Err(Error::OutOfHull { omega, lo, hi });
        }
        Ok(match self {
            Self::Ohmic { eta, lambda } => eta * omega * (-omega / lambda).exp(),
            Self::Tabulated(t) => t.eval(omega),
        })
    }

    /// `dJ/dw`, used where the subtracted integrand has a removable singularity.
    pub fn derivative(&self, omega: f64) -> Result<f64> {
        let (lo, hi) = self.hull();
        if !(omega >= lo && omega <= hi) {
            return Err(Error::OutOfHull { omega, lo, hi });
        }
        Ok(match self {
            Self::Ohmic { eta, lambda } => eta * (-omega / lambda).exp() * (1.0 - omega / lambda),
            Self::Tabulated(t) => t.slope_at(omega),
        })
    }

    /// Unchecked evaluation for quadrature nodes known to lie in the hull.
    pub(crate) fn eval_inner(&self, omega: f64) -> f64 {
        match self {
            Self::Ohmic { eta, lambda } => eta * omega * (-omega / lambda).exp(),
            Self::Tabulated(t) => t.eval(omega),
        }
    }
}

/// Samples `(w_j, J_j)` with Fritsch-Carlson monotone cubic interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    grid: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Tabulated {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidDensity(format!("grid has {} points but {} values", grid.len(), values.len())));
        }
        if grid.len() < MIN_TABULATED_POINTS {
            return Err(Error::InvalidDensity(format!(
                "tabulated density needs at least {MIN_TABULATED_POINTS} points, got {}",
                grid.len()
            )));
        }
        if grid.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::InvalidDensity("non-finite sample".into()));
        }
        if grid[0] < 0.0 {
            return Err(Error::InvalidDensity(format!("negative frequency {}", grid[0])));
        }
        if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidDensity(format!("grid not strictly increasing at {} -> {}", w[0], w[1])));
        }
        if let Some(v) = values.iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidDensity(format!("negative density value {v}")));
        }
        let slopes = pchip_slopes(&grid, &values);
        Ok(Self { grid, values, slopes })
    }

    /// Reads a two-column `omega,J` CSV; a non-numeric first row is taken as a header.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() < 2 {
                return Err(Error::Parse(format!("{}: row {} needs two columns", path.display(), row + 1)));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(w), Ok(j)) => {
                    grid.push(w);
                    values.push(j);
                }
                _ if row == 0 => continue,
                _ => return Err(Error::Parse(format!("{}: row {} is not numeric", path.display(), row + 1))),
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn interval(&self, x: f64) -> usize {
        let k = self.grid.partition_point(|&g| g <= x);
        k.saturating_sub(1).min(self.grid.len() - 2)
    }

    fn eval(&self, x: f64) -> f64 {
        self.eval_piece(self.interval(x), x).max(0.0)
    }

    /// Cubic of interval `k`, evaluated (without clamping) at any `x`.
    pub(crate) fn eval_piece(&self, k: usize, x: f64) -> f64 {
        let (x0, x1) = (self.grid[k], self.grid[k + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.slopes[k], self.slopes[k + 1]);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
    }

    fn slope_at(&self, x: f64) -> f64 {
        let k = self.interval(x);
        let (x0, x1) = (self.grid[k], self.grid[k + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.slopes[k], self.slopes[k + 1]);
        let dh00 = 6.0 * s * (s - 1.0);
        let dh10 = (1.0 - s) * (1.0 - 3.0 * s);
        let dh01 = -dh00;
        let dh11 = s * (3.0 * s - 2.0);
        (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

// Non-centered three-point end derivative, limited to keep monotonicity.
fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ohmic_table(n: usize, hi: f64) -> SpectralDensity {
        let grid: Vec<f64> = (0..n).map(|k| hi * k as f64 / (n - 1) as f64).collect();
        let values = grid.iter().map(|w| 0.01 * w * (-w / 10.0).exp()).collect();
        SpectralDensity::tabulated(grid, values).unwrap()
    }

    #[test]
    fn ohmic_closed_form() {
        let j = SpectralDensity::ohmic(0.01, 10.0).unwrap();
        assert!((j.evaluate(1.0).unwrap() - 0.01 * (-0.1_f64).exp()).abs() < 1e-16);
        assert!((j.evaluate(1.0).unwrap() - 9.0484e-3).abs() < 1e-7);
        assert_eq!(j.evaluate(0.0).unwrap(), 0.0);
        assert!(matches!(j.evaluate(-1.0), Err(Error::OutOfHull { .. })));
    }

    #[test]
    fn tabulated_ohmic_converges() {
        let t = ohmic_table(200, 20.0);
        let exact = 0.01 * (-0.1_f64).exp();
        assert!((t.evaluate(1.0).unwrap() - exact).abs() < 1e-6);
    }

    #[test]
    fn tabulated_reproduces_knots_and_refuses_extrapolation() {
        let t = ohmic_table(50, 20.0);
        let SpectralDensity::Tabulated(tab) = &t else { unreachable!() };
        for (w, j) in tab.grid().iter().zip(tab.values()) {
            assert!((t.evaluate(*w).unwrap() - j).abs() < 1e-15);
        }
        assert!(matches!(t.evaluate(20.5), Err(Error::OutOfHull { .. })));
    }

    #[test]
    fn monotone_data_stays_monotone_and_nonnegative() {
        let grid: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let values = vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 5.0, 5.1, 5.1, 0.0];
        let t = SpectralDensity::tabulated(grid, values).unwrap();
        let mut prev = t.evaluate(2.0).unwrap();
        for k in 1..=600 {
            let x = 2.0 + k as f64 * 0.01;
            let v = t.evaluate(x).unwrap();
            assert!(v >= prev - 1e-14, "not monotone at {x}");
            prev = v;
        }
        for k in 0..=900 {
            assert!(t.evaluate(k as f64 * 0.01).unwrap() >= 0.0);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for j in [SpectralDensity::ohmic(0.02, 5.0).unwrap(), ohmic_table(100, 30.0)] {
            for &w in &[0.7, 3.3, 12.1] {
                let h = 1e-6;
                let fd = (j.evaluate(w + h).unwrap() - j.evaluate(w - h).unwrap()) / (2.0 * h);
                assert!((j.derivative(w).unwrap() - fd).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn invalid_tables_rejected() {
        let g: Vec<f64> = (0..8).map(f64::from).collect();
        assert!(SpectralDensity::tabulated(g[..7].to_vec(), vec![1.0; 7]).is_err());
        assert!(SpectralDensity::tabulated(g.clone(), vec![-1.0; 8]).is_err());
        let mut unsorted = g.clone();
        unsorted.swap(2, 3);
        assert!(SpectralDensity::tabulated(unsorted, vec![1.0; 8]).is_err());
        let mut nan = vec![1.0; 8];
        nan[4] = f64::NAN;
        assert!(SpectralDensity::tabulated(g, nan).is_err());
        assert!(SpectralDensity::ohmic(-0.1, 1.0).is_err());
        assert!(SpectralDensity::ohmic(0.1, 0.0).is_err());
    }

    #[test]
    fn csv_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.csv");
        let mut body = String::from("omega,J\n");
        for k in 0..10 {
            body.push_str(&format!("{},{}\n", k, 0.1 * k as f64));
        }
        std::fs::write(&path, body).unwrap();
        let t = Tabulated::from_csv_path(&path).unwrap();
        assert_eq!(t.grid().len(), 10);
        assert!((SpectralDensity::Tabulated(t).evaluate(4.5).unwrap() - 0.45).abs() < 1e-12);
    }
}
