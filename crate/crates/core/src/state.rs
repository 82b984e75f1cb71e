//! Lane-by-cell density arrays and initial-data projection.

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::scalar::Scalar;

/// Cell averages `ρ_{j,k}` of every lane at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneGridState<T> {
    pub t: T,
    rho: Vec<Vec<T>>,
}

impl<T: Scalar> LaneGridState<T> {
    /// `rho[j][k]` is lane `j`, cell `k`. All lanes must have equal length.
    pub fn new(t: T, rho: Vec<Vec<T>>) -> Result<Self> {
        let n = rho.first().map_or(0, Vec::len);
        if let Some(bad) = rho.iter().find(|l| l.len() != n) {
            return Err(Error::LengthMismatch(n, bad.len()));
        }
        Ok(LaneGridState { t, rho })
    }

    pub fn zeros(lanes: usize, cells: usize) -> Self {
        LaneGridState {
            t: T::zero(),
            rho: vec![vec![T::zero(); cells]; lanes],
        }
    }

    pub fn lane_count(&self) -> usize {
        self.rho.len()
    }

    pub fn n_cells(&self) -> usize {
        self.rho.first().map_or(0, Vec::len)
    }

    #[inline]
    pub fn lane(&self, j: usize) -> &[T] {
        &self.rho[j]
    }

    pub fn lanes(&self) -> &[Vec<T>] {
        &self.rho
    }

    pub fn lanes_mut(&mut self) -> &mut [Vec<T>] {
        &mut self.rho
    }

    pub fn into_lanes(self) -> Vec<Vec<T>> {
        self.rho
    }

    /// Densities of all lanes at cell `k`.
    pub fn column(&self, k: usize) -> Vec<T> {
        self.rho.iter().map(|l| l[k]).collect()
    }

    /// First entry outside `[0, 1]`, as `(lane, cell, value)`.
    pub fn first_out_of_range(&self) -> Option<(usize, usize, T)> {
        self.rho.iter().enumerate().find_map(|(j, lane)| {
            lane.iter()
                .position(|v| !(*v >= T::zero() && *v <= T::one()))
                .map(|k| (j, k, lane[k]))
        })
    }

    pub(crate) fn ensure_in_range(&self, phase: &'static str) -> Result<()> {
        match self.first_out_of_range() {
            None => Ok(()),
            Some((lane, cell, v)) => Err(Error::RangeViolation {
                lane,
                cell,
                value: v.to_f64_lossy(),
                phase,
            }),
        }
    }

    /// Index range `(first, last)` of cells where any lane is nonzero.
    pub fn support(&self) -> Option<(usize, usize)> {
        let nonzero = |k: &usize| self.rho.iter().any(|l| l[*k] != T::zero());
        let n = self.n_cells();
        let first = (0..n).find(nonzero)?;
        let last = (0..n).rev().find(nonzero)?;
        Some((first, last))
    }
}

/// Closed-form initial profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile<T> {
    /// `sin(πx/2)²` on `[lo, hi]`, zero elsewhere.
    SinSq { lo: T, hi: T },
    /// `q(scale x + shift)` with `q(y) = 4y²(1-y)²` on `(0, 1)`.
    BumpQ { scale: T, shift: T },
    /// The same value everywhere.
    Constant { value: T },
    /// `left` for `x < x_jump`, `right` otherwise.
    Riemann { x_jump: T, left: T, right: T },
}

impl<T: Scalar> Profile<T> {
    pub fn eval(&self, x: T) -> T {
        match *self {
            Profile::SinSq { lo, hi } => {
                if x < lo || x > hi {
                    T::zero()
                } else {
                    let s = (T::PI() * x / T::two()).sin();
                    s * s
                }
            }
            Profile::BumpQ { scale, shift } => {
                let y = scale * x + shift;
                if y > T::zero() && y < T::one() {
                    let z = y * (T::one() - y);
                    T::lit(4.0) * z * z
                } else {
                    T::zero()
                }
            }
            Profile::Constant { value } => value,
            Profile::Riemann { x_jump, left, right } => {
                if x < x_jump {
                    left
                } else {
                    right
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::SinSq { .. } => "sin_sq",
            Profile::BumpQ { .. } => "bump_q",
            Profile::Constant { .. } => "constant",
            Profile::Riemann { .. } => "riemann",
        }
    }
}

const GAUSS_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Cell averages of `f` by five-point Gauss–Legendre quadrature.
pub fn cell_averages<T: Scalar>(grid: &Grid1D<T>, f: impl Fn(T) -> T) -> Vec<T> {
    let half = grid.dx() / T::two();
    (0..grid.n_cells())
        .map(|k| {
            let mid = grid.center(k);
            let sum: T = GAUSS_NODES
                .iter()
                .zip(GAUSS_WEIGHTS)
                .map(|(&s, w)| T::lit(w) * f(mid + half * T::lit(s)))
                .sum();
            sum / T::two()
        })
        .collect()
}

/// Projects one profile per lane onto the mesh at `t = 0`.
pub fn init_from_profile<T: Scalar>(profiles: &[Profile<T>], grid: &Grid1D<T>) -> Result<LaneGridState<T>> {
    let mut lanes = Vec::with_capacity(profiles.len());
    for p in profiles {
        let avg = cell_averages(grid, |x| p.eval(x));
        for (k, v) in avg.iter().enumerate() {
            if !(*v >= T::zero() && *v <= T::one()) {
                return Err(Error::ProfileOutOfRange {
                    x: grid.center(k).to_f64_lossy(),
                    value: v.to_f64_lossy(),
                });
            }
        }
        lanes.push(avg);
    }
    LaneGridState::new(T::zero(), lanes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_profile() {
        let g = Grid1D::<f64>::new(0.0, 1.0, 0.1).unwrap();
        let s = init_from_profile(&[Profile::Constant { value: 0.3 }], &g).unwrap();
        assert!(s.lane(0).iter().all(|v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn bump_first_cell_average() {
        // (1/h) ∫_0^h 4x²(1-x)² dx = 4 (h²/3 - h³/2 + h⁴/5).
        let h: f64 = 0.01;
        let exact = 4.0 * (h * h / 3.0 - h.powi(3) / 2.0 + h.powi(4) / 5.0);
        let g = Grid1D::<f64>::new(0.0, 1.0, h).unwrap();
        let s = init_from_profile(&[Profile::BumpQ { scale: 1.0, shift: 0.0 }], &g).unwrap();
        assert!((s.lane(0)[0] - exact).abs() < 1e-15);
        assert!((exact - 1.313_413_333_333_333_4e-4).abs() < 1e-16);
    }

    #[test]
    fn sin_sq_peak_cell_below_one() {
        let g = Grid1D::<f64>::new(0.0, 2.0, 0.01).unwrap();
        let s = init_from_profile(&[Profile::SinSq { lo: 0.0, hi: 2.0 }], &g).unwrap();
        let peak = s.lane(0).iter().cloned().fold(0.0, f64::max);
        assert!(peak < 1.0 && peak > 0.9999);
    }

    #[test]
    fn out_of_range_profile() {
        let g = Grid1D::<f64>::new(0.0, 1.0, 0.1).unwrap();
        assert!(matches!(
            init_from_profile(&[Profile::Constant { value: 1.2 }], &g),
            Err(Error::ProfileOutOfRange { .. })
        ));
    }

    #[test]
    fn support_and_range() {
        let s = LaneGridState::new(0.0, vec![vec![0.0, 0.2, 0.0, 0.0], vec![0.0, 0.0, 0.5, 0.0]]).unwrap();
        assert_eq!(s.support(), Some((1, 2)));
        assert_eq!(s.first_out_of_range(), None);
        let bad = LaneGridState::new(0.0, vec![vec![0.0, 1.0 + 1e-16 * 3.0]]).unwrap();
        assert_eq!(bad.first_out_of_range().map(|t| (t.0, t.1)), Some((0, 1)));
        assert!(LaneGridState::new(0.0, vec![vec![0.0; 3], vec![0.0; 2]]).is_err());
    }
}
