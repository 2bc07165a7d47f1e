//! Dense SPD solves for filter design and cepstral spectral factorization.

use rustfft::{num_complex::Complex64, FftPlanner};

use crate::signal::IsiChannel;
use crate::{Error, Result};

/// Largest system [`solve_spd`] accepts unless a different cap is set.
pub const DEFAULT_SIZE_CAP: usize = 64;

/// Relative diagonal loadings tried, in order, when a plain Cholesky fails.
const JITTER_STEPS: [f64; 3] = [1e-12, 1e-10, 1e-8];

/// Row-major dense matrix. Only what the equalizers need.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Columns `start..end` as a new matrix.
    pub fn columns(&self, start: usize, end: usize) -> Matrix {
        let mut out = Matrix::zeros(self.rows, end - start);
        for i in 0..self.rows {
            for j in start..end {
                out[(i, j - start)] = self[(i, j)];
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ v`.
    pub fn tr_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `A x = b` with `A` symmetric positive definite.
#[derive(Debug, Clone)]
pub struct SpdSystem {
    pub a: Matrix,
    pub b: Vec<f64>,
    /// Symbol index that produced `a`, reported on failure.
    pub time_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpdSolution {
    pub x: Vec<f64>,
    /// Diagonal loading that was needed, if any.
    pub jitter: Option<f64>,
}

pub fn solve_spd(sys: &SpdSystem) -> Result<SpdSolution> {
    solve_spd_with_cap(sys, DEFAULT_SIZE_CAP)
}

pub fn solve_spd_with_cap(sys: &SpdSystem, cap: usize) -> Result<SpdSolution> {
    let n = sys.a.rows();
    if sys.a.cols() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: sys.a.cols(),
        });
    }
    if sys.b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: sys.b.len(),
        });
    }
    if n > cap {
        return Err(Error::SystemTooLarge { size: n, cap });
    }
    let scale = sys
        .a
        .as_slice()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let asym = sys.a.max_asymmetry();
    if asym > 1e-12 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let mut work = SpdWorkspace::new(n);
    let x = work.solve(sys.a.as_slice(), &sys.b, sys.time_index)?;
    Ok(SpdSolution {
        x,
        jitter: work.last_jitter,
    })
}

/// Reusable Cholesky scratch space for the per-symbol filter solves.
#[derive(Debug, Clone)]
pub struct SpdWorkspace {
    n: usize,
    factor: Vec<f64>,
    pub last_jitter: Option<f64>,
}

impl SpdWorkspace {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            factor: vec![0.0; n * n],
            last_jitter: None,
        }
    }

    /// Solves `A x = b` for a row-major `n × n` SPD matrix. Only the lower
    /// triangle of `a` is read.
    pub fn solve(&mut self, a: &[f64], b: &[f64], time_index: Option<usize>) -> Result<Vec<f64>> {
        let n = self.n;
        debug_assert_eq!(a.len(), n * n);
        let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
        let mean_diag = trace / n.max(1) as f64;
        let min_pivot = 1e-12 * mean_diag.abs();
        self.last_jitter = None;
        if self.factorize(a, 0.0, min_pivot) {
            return Ok(self.substitute(b));
        }
        for step in JITTER_STEPS {
            let jitter = step * mean_diag.abs();
            if self.factorize(a, jitter, min_pivot) {
                self.last_jitter = Some(jitter);
                return Ok(self.substitute(b));
            }
        }
        Err(Error::NotPositiveDefinite { time_index })
    }

    fn factorize(&mut self, a: &[f64], jitter: f64, min_pivot: f64) -> bool {
        let n = self.n;
        let l = &mut self.factor;
        for j in 0..n {
            let mut diag = a[j * n + j] + jitter;
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if !(diag > min_pivot) {
                return false;
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in j + 1..n {
                let mut v = a[i * n + j];
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = v / ljj;
            }
        }
        true
    }

    fn substitute(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let l = &self.factor;
        let mut x = b.to_vec();
        for i in 0..n {
            let mut v = x[i];
            for k in 0..i {
                v -= l[i * n + k] * x[k];
            }
            x[i] = v / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for k in i + 1..n {
                v -= l[k * n + i] * x[k];
            }
            x[i] = v / l[i * n + i];
        }
        x
    }
}

/// `R_ss(D) = Px·R_hh(D) + N0 = P0 · g(D) · g*(D^-*)` with monic,
/// minimum-phase `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFactorization {
    pub p0: f64,
    pub g: Vec<f64>,
    pub grid_size: usize,
}

pub const DEFAULT_GRID: usize = 4096;

/// Channel frequency response `H(e^{jθ_k}) = Σ h_m e^{-jθ_k m}` on
/// `θ_k = 2πk/grid`.
pub fn frequency_response(taps: &[f64], grid: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = (0..grid)
        .map(|k| Complex64::new(taps.get(k).copied().unwrap_or(0.0), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(grid).process(&mut buf);
    buf
}

pub fn spectral_factorize(
    ch: &IsiChannel,
    px: f64,
    n0: f64,
    grid: usize,
) -> Result<SpectralFactorization> {
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::InvalidNoiseVariance(n0));
    }
    if !grid.is_power_of_two() || grid < 8 * ch.len() {
        return Err(Error::InvalidGrid(grid));
    }
    let response = frequency_response(ch.taps(), grid);
    let spectrum: Vec<f64> = response.iter().map(|h| px * h.norm_sqr() + n0).collect();
    let min = spectrum.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::NonPositiveSpectrum(min));
    }

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(grid);
    let inv = planner.plan_fft_inverse(grid);
    let scale = 1.0 / grid as f64;

    // Real cepstrum of the (even) log spectrum.
    let mut cep: Vec<Complex64> = spectrum
        .iter()
        .map(|s| Complex64::new(s.ln(), 0.0))
        .collect();
    inv.process(&mut cep);
    let log_p0 = cep[0].re * scale;

    // Causal part, exponentiated back to the frequency domain.
    let half = grid / 2;
    let mut causal: Vec<Complex64> = (0..grid)
        .map(|k| {
            if (1..half).contains(&k) {
                Complex64::new(cep[k].re * scale, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    fwd.process(&mut causal);
    let mut gf: Vec<Complex64> = causal.iter().map(|c| c.exp()).collect();
    inv.process(&mut gf);

    let mut g: Vec<f64> = gf[..half].iter().map(|c| c.re * scale).collect();
    g[0] = 1.0;
    let keep = g.iter().rposition(|v| v.abs() >= 1e-12).unwrap_or(0) + 1;
    g.truncate(keep);

    Ok(SpectralFactorization {
        p0: log_p0.exp(),
        g,
        grid_size: grid,
    })
}
