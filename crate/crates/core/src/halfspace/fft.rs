use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::linalg::C64;

/// Signed index of DFT bin `k` of `n`: `0, 1, .., n/2 - 1, -n/2, .., -1`.
pub fn frequency_index(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) || (n % 2 == 0 && k < n / 2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// In-place DFT along the given axes of a field stored with `components`
/// interleaved fastest. Forward uses the kernel `e^{-i 2 pi jk/n}`;
/// neither direction is normalized.
pub fn fft_axes(data: &mut [C64], dims: &[usize], components: usize, axes: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    for &axis in axes {
        let n = dims[axis];
        if n <= 1 {
            continue;
        }
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let inner: usize = dims[axis + 1..].iter().product::<usize>() * components;
        let outer: usize = dims[..axis].iter().product();
        let mut line = vec![C64::new(0.0, 0.0); n];
        let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for o in 0..outer {
            let base = o * n * inner;
            for i in 0..inner {
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[base + k * inner + i];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * inner + i] = *v;
                }
            }
        }
    }
}

/// Angular frequencies of a tangential grid `(t, y_1, ..)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub dims: Vec<usize>,
    pub spacings: Vec<f64>,
}

impl Lattice {
    pub fn new(dims: Vec<usize>, spacings: Vec<f64>) -> Self {
        Self { dims, spacings }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(tau, eta)` of flat bin `index`.
    pub fn frequency(&self, index: usize) -> Vec<f64> {
        let mut rem = index;
        let mut out = vec![0.0; self.dims.len()];
        for a in (0..self.dims.len()).rev() {
            let n = self.dims[a];
            let k = rem % n;
            rem /= n;
            out[a] = 2.0 * PI * frequency_index(k, n) as f64 / (n as f64 * self.spacings[a]);
        }
        out
    }

    /// Cell volume of the tangential grid.
    pub fn cell(&self) -> f64 {
        self.spacings.iter().product()
    }

    /// Factor turning `sum |unnormalized DFT|^2` into the grid `L2` norm squared.
    pub fn parseval_factor(&self) -> f64 {
        self.cell() / self.len() as f64
    }
}
