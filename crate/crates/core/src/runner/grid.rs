//! Time grids in natural units.

use super::scenario::{GridSpec, Spacing, TimeUnit};

/// Natural-unit times for `grid`. `relaxation_time` is `1/gamma0` and
/// `time_scale` converts natural to physical time.
///
/// A log grid with `include_zero` gets `t = 0` in front of its `count` points.
pub fn natural_times(grid: &GridSpec, relaxation_time: f64, time_scale: f64) -> Vec<f64> {
    let unit = match grid.unit {
        TimeUnit::Relaxation => relaxation_time,
        TimeUnit::Absolute => 1.0 / time_scale,
    };
    let (lo, hi, n) = (grid.t_min, grid.t_max, grid.count);
    let mut out = Vec::with_capacity(n + 1);
    match grid.spacing {
        Spacing::Linear => {
            let step = (hi - lo) / (n - 1) as f64;
            out.extend((0..n).map(|i| if i + 1 == n { hi } else { lo + step * i as f64 }));
        }
        Spacing::Log => {
            if grid.include_zero {
                out.push(0.0);
            }
            let (a, b) = (lo.ln(), hi.ln());
            let step = (b - a) / (n - 1) as f64;
            out.extend((0..n).map(|i| match i {
                0 => lo,
                _ if i + 1 == n => hi,
                _ => (a + step * i as f64).exp(),
            }));
        }
    }
    out.iter().map(|t| t * unit).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(spacing: Spacing, unit: TimeUnit) -> GridSpec {
        GridSpec { t_min: 1e-3, t_max: 1e2, count: 11, spacing, unit, include_zero: true }
    }

    #[test]
    fn log_grid_has_zero_and_endpoints() {
        let t = natural_times(&spec(Spacing::Log, TimeUnit::Relaxation), 20.0, 1.0);
        assert_eq!(t.len(), 12);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[1], 1e-3 * 20.0);
        assert_eq!(t[11], 1e2 * 20.0);
        assert!((t[2] / t[1] - 10f64.sqrt()).abs() < 1e-12);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn linear_absolute() {
        let mut g = spec(Spacing::Linear, TimeUnit::Absolute);
        g.t_min = 0.0;
        g.t_max = 10.0;
        let t = natural_times(&g, 20.0, 2.0);
        assert_eq!(t.len(), 11);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[10], 5.0);
        assert!((t[3] - 1.5).abs() < 1e-15);
    }
}
