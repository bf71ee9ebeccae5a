use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on the unit torus `[0,1)^d`.
///
/// Samples are stored row-major with axis 0 varying slowest; the same layout
/// indexes Fourier coefficients, with index `j` on an axis mapped to the
/// wavenumber `j` for `j <= N/2` and `j - N` above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct TorusGrid {
    dim: usize,
    n: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    dim: usize,
    n: usize,
}

impl TryFrom<RawGrid> for TorusGrid {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        TorusGrid::new(raw.dim, raw.n)
    }
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis {n} must be a power of two >= 8"
            )));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    /// Total number of grid points, `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        (self.len() as f64).recip()
    }

    pub fn spacing(&self) -> f64 {
        (self.n as f64).recip()
    }

    /// Largest shell index carrying lattice modes: `log2(N/2) + 1`.
    pub fn q_max(&self) -> i32 {
        (self.n / 2).trailing_zeros() as i32 + 1
    }

    /// Stride of `axis` in the flat layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.dim - 1 - axis) as u32)
    }

    pub fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for axis in (0..self.dim).rev() {
            out[axis] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    pub fn flat_index(&self, multi: [usize; 3]) -> usize {
        (0..self.dim).fold(0, |acc, axis| acc * self.n + multi[axis])
    }

    /// Physical coordinates of grid point `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        let h = self.spacing();
        [m[0] as f64 * h, m[1] as f64 * h, m[2] as f64 * h]
    }

    fn axis_wavenumber(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Lattice wavevector of Fourier index `idx`. The Nyquist index maps to `+N/2`.
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let m = self.multi_index(idx);
        let mut k = [0i64; 3];
        for axis in 0..self.dim {
            k[axis] = self.axis_wavenumber(m[axis]);
        }
        k
    }

    /// Wavevector used by derivative multipliers: Nyquist components are zeroed so
    /// that differentiated real fields stay real.
    pub fn derivative_wavevector(&self, idx: usize) -> [i64; 3] {
        let mut k = self.wavevector(idx);
        let nyq = (self.n / 2) as i64;
        for c in k.iter_mut().take(self.dim) {
            if *c == nyq {
                *c = 0;
            }
        }
        k
    }

    pub fn wavenumber_sq(&self, idx: usize) -> i64 {
        let k = self.wavevector(idx);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    /// True if any component of the wavevector sits on the Nyquist line.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let nyq = (self.n / 2) as i64;
        self.wavevector(idx)[..self.dim].contains(&nyq)
    }

    /// Flat index of the mode `-k` for the mode at `idx`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let m = self.multi_index(idx);
        let mut c = [0usize; 3];
        for axis in 0..self.dim {
            c[axis] = (self.n - m[axis]) % self.n;
        }
        self.flat_index(c)
    }

    /// Flat index of the Fourier mode with wavevector `k` (components reduced mod N).
    pub fn index_of_wavevector(&self, k: [i64; 3]) -> usize {
        let mut m = [0usize; 3];
        for axis in 0..self.dim {
            m[axis] = k[axis].rem_euclid(self.n as i64) as usize;
        }
        self.flat_index(m)
    }

    /// Index of the point `x + lag` where `lag` is given in grid cells.
    pub fn shifted_index(&self, idx: usize, lag: [i64; 3]) -> usize {
        let m = self.multi_index(idx);
        let mut s = [0usize; 3];
        for axis in 0..self.dim {
            s[axis] = (m[axis] as i64 + lag[axis]).rem_euclid(self.n as i64) as usize;
        }
        self.flat_index(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(TorusGrid::new(0, 16).is_err());
        assert!(TorusGrid::new(4, 16).is_err());
        assert!(TorusGrid::new(2, 4).is_err());
        assert!(TorusGrid::new(2, 24).is_err());
        assert!(TorusGrid::new(3, 8).is_ok());
    }

    #[test]
    fn shell_bound() {
        assert_eq!(TorusGrid::new(2, 64).unwrap().q_max(), 6);
        assert_eq!(TorusGrid::new(2, 128).unwrap().q_max(), 7);
        assert_eq!(TorusGrid::new(1, 8).unwrap().q_max(), 3);
    }

    #[test]
    fn index_roundtrip_and_conjugates() {
        let g = TorusGrid::new(3, 8).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.flat_index(g.multi_index(idx)), idx);
            let k = g.wavevector(idx);
            assert_eq!(g.index_of_wavevector(k), idx);
            let c = g.conjugate_index(idx);
            assert_eq!(g.conjugate_index(c), idx);
            if !g.is_nyquist(idx) {
                let kc = g.wavevector(c);
                assert_eq!([kc[0], kc[1], kc[2]], [-k[0], -k[1], -k[2]]);
            }
        }
        assert_eq!(g.shifted_index(0, [-1, 0, 0]), g.flat_index([7, 0, 0]));
    }
}
