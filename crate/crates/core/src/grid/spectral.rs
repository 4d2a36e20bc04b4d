//! Horizontal Fourier calculus, one 2D transform per level.
//!
//! Forward coefficients are unnormalized (`X(k) = Σ f e^{-2πi k·x}`); the
//! inverse divides by `n1·n2`. Derivative multipliers treat the Nyquist
//! mode as zero so that derivatives of real fields stay real.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use super::{BoundaryField, Face, GridSpec, ScalarField};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_rows(buf: &mut [Complex64], n: usize, dir: FftDirection) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft(n, dir));
    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
    plan.process_with_scratch(buf, &mut scratch);
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

/// In-place 2D transform of every `n1 × n2` plane in `buf`.
fn fft2(buf: &mut [Complex64], n1: usize, n2: usize, dir: FftDirection) {
    fft_rows(buf, n1, dir);
    let plane = n1 * n2;
    let mut tmp = vec![Complex64::default(); buf.len()];
    for (s, d) in buf.chunks(plane).zip(tmp.chunks_mut(plane)) {
        transpose(s, d, n2, n1);
    }
    fft_rows(&mut tmp, n2, dir);
    for (s, d) in tmp.chunks(plane).zip(buf.chunks_mut(plane)) {
        transpose(s, d, n1, n2);
    }
}

/// Signed integer wavenumber of index `i` on a period-`n` grid; Nyquist maps to `-n/2`.
#[inline]
pub fn signed_mode(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// `2πk` for differentiation; zero at Nyquist.
#[inline]
pub fn derivative_wavenumber(i: usize, n: usize) -> f64 {
    if 2 * i == n {
        0.0
    } else {
        2.0 * PI * signed_mode(i, n) as f64
    }
}

/// `2πk` including Nyquist, for multipliers that are even in `k`.
#[inline]
pub fn true_wavenumber(i: usize, n: usize) -> f64 {
    2.0 * PI * signed_mode(i, n) as f64
}

/// Horizontal spectra of a stack of planes (all levels of a field, or both faces).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: GridSpec,
    data: Vec<Complex64>,
}

impl Spectrum {
    fn from_planes(grid: GridSpec, planes: &[&[f64]]) -> Self {
        let np = grid.plane_len();
        let (n1, n2) = (grid.n1(), grid.n2());
        let mut data = vec![Complex64::default(); np * planes.len()];
        let pairs = planes.len().div_ceil(2);
        let mut packed = vec![Complex64::default(); np * pairs];
        for (p, chunk) in planes.chunks(2).enumerate() {
            let dst = &mut packed[p * np..(p + 1) * np];
            for (j, z) in dst.iter_mut().enumerate() {
                let im = if chunk.len() == 2 { chunk[1][j] } else { 0.0 };
                *z = Complex64::new(chunk[0][j], im);
            }
        }
        fft2(&mut packed, n1, n2, FftDirection::Forward);
        for p in 0..pairs {
            let x = &packed[p * np..(p + 1) * np];
            let a0 = 2 * p;
            let has_b = a0 + 1 < planes.len();
            for i2 in 0..n2 {
                let m2 = (n2 - i2) % n2;
                for i1 in 0..n1 {
                    let m1 = (n1 - i1) % n1;
                    let xk = x[i1 + n1 * i2];
                    let xm = x[m1 + n1 * m2].conj();
                    let j = i1 + n1 * i2;
                    data[a0 * np + j] = (xk + xm) * 0.5;
                    if has_b {
                        data[(a0 + 1) * np + j] = (xk - xm) * Complex64::new(0.0, -0.5);
                    }
                }
            }
        }
        Self { grid, data }
    }

    fn to_planes(&self) -> Vec<Vec<f64>> {
        let np = self.grid.plane_len();
        let nplanes = self.planes();
        let pairs = nplanes.div_ceil(2);
        let mut packed = vec![Complex64::default(); np * pairs];
        let i = Complex64::new(0.0, 1.0);
        for p in 0..pairs {
            let a = &self.data[2 * p * np..(2 * p + 1) * np];
            let dst = &mut packed[p * np..(p + 1) * np];
            if 2 * p + 1 < nplanes {
                let b = &self.data[(2 * p + 1) * np..(2 * p + 2) * np];
                for j in 0..np {
                    dst[j] = a[j] + i * b[j];
                }
            } else {
                dst.copy_from_slice(a);
            }
        }
        fft2(&mut packed, self.grid.n1(), self.grid.n2(), FftDirection::Inverse);
        let scale = 1.0 / np as f64;
        let mut out = Vec::with_capacity(nplanes);
        for p in 0..pairs {
            let x = &packed[p * np..(p + 1) * np];
            out.push(x.iter().map(|z| z.re * scale).collect());
            if 2 * p + 1 < nplanes {
                out.push(x.iter().map(|z| z.im * scale).collect());
            }
        }
        out
    }

    pub fn of_field(f: &ScalarField) -> Self {
        let g = f.grid();
        let planes: Vec<&[f64]> = (0..g.levels()).map(|k| f.level(k)).collect();
        Self::from_planes(g, &planes)
    }

    pub fn of_boundary(g: &BoundaryField) -> Self {
        Self::from_planes(g.grid(), &[g.face(Face::Bottom), g.face(Face::Top)])
    }

    /// Plane `p` of the coefficient stack, laid out like a physical plane.
    pub fn plane(&self, p: usize) -> &[Complex64] {
        let np = self.grid.plane_len();
        &self.data[p * np..(p + 1) * np]
    }

    pub fn plane_mut(&mut self, p: usize) -> &mut [Complex64] {
        let np = self.grid.plane_len();
        &mut self.data[p * np..(p + 1) * np]
    }

    pub fn planes(&self) -> usize {
        self.data.len() / self.grid.plane_len()
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Panics unless this spectrum has one plane per level.
    pub fn to_field(&self) -> ScalarField {
        assert_eq!(self.planes(), self.grid.levels());
        ScalarField::from_vec(self.grid, self.to_planes().concat())
    }

    /// Panics unless this spectrum has exactly two planes.
    pub fn to_boundary(&self) -> BoundaryField {
        assert_eq!(self.planes(), 2);
        let mut p = self.to_planes();
        let top = p.pop().expect("two planes");
        let bottom = p.pop().expect("two planes");
        BoundaryField::from_faces(self.grid, bottom, top)
    }

    /// Multiply every mode by `m(i1, i2)`, the same on every plane.
    pub fn apply(&self, m: impl Fn(usize, usize) -> Complex64) -> Self {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        let mut mult = Vec::with_capacity(n1 * n2);
        for i2 in 0..n2 {
            for i1 in 0..n1 {
                mult.push(m(i1, i2));
            }
        }
        let mut out = self.clone();
        for chunk in out.data.chunks_mut(n1 * n2) {
            for (z, &w) in chunk.iter_mut().zip(&mult) {
                *z *= w;
            }
        }
        out
    }

    /// Multiply by a real multiplier of the true wavenumber vector `(2πk1, 2πk2)`.
    pub fn apply_real(&self, m: impl Fn(f64, f64) -> f64) -> Self {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        self.apply(|i1, i2| Complex64::new(m(true_wavenumber(i1, n1), true_wavenumber(i2, n2)), 0.0))
    }

    /// Tangential derivative along `axis` (1 or 2).
    pub fn derivative(&self, axis: usize) -> Self {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        match axis {
            1 => self.apply(|i1, _| Complex64::new(0.0, derivative_wavenumber(i1, n1))),
            2 => self.apply(|_, i2| Complex64::new(0.0, derivative_wavenumber(i2, n2))),
            _ => panic!("tangential axis must be 1 or 2, got {axis}"),
        }
    }

    /// `Δ∗ = ∂̄₁² + ∂̄₂²`.
    pub fn laplacian(&self) -> Self {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        self.apply(|i1, i2| {
            let k1 = derivative_wavenumber(i1, n1);
            let k2 = derivative_wavenumber(i2, n2);
            Complex64::new(-(k1 * k1 + k2 * k2), 0.0)
        })
    }

    /// Zero-mean solution of `Δ∗u = ℙg`; modes annihilated by `Δ∗` are dropped.
    pub fn inverse_laplacian(&self) -> Self {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        self.apply(|i1, i2| {
            let k1 = derivative_wavenumber(i1, n1);
            let k2 = derivative_wavenumber(i2, n2);
            let k2sum = k1 * k1 + k2 * k2;
            if k2sum == 0.0 {
                Complex64::default()
            } else {
                Complex64::new(-1.0 / k2sum, 0.0)
            }
        })
    }

    /// Two-thirds truncation: keeps `|k_j| < n_j/3`.
    pub fn truncate_two_thirds(&self) -> Self {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        self.apply(|i1, i2| {
            let keep = 3 * signed_mode(i1, n1).unsigned_abs() < n1 as u64
                && 3 * signed_mode(i2, n2).unsigned_abs() < n2 as u64;
            Complex64::new(if keep { 1.0 } else { 0.0 }, 0.0)
        })
    }
}

pub fn tangential_derivative(f: &ScalarField, axis: usize) -> ScalarField {
    Spectrum::of_field(f).derivative(axis).to_field()
}

/// `(∂̄₁f, ∂̄₂f)` from a single forward transform.
pub fn horizontal_gradient(f: &ScalarField) -> [ScalarField; 2] {
    let s = Spectrum::of_field(f);
    [s.derivative(1).to_field(), s.derivative(2).to_field()]
}

pub fn tangential_derivative_boundary(g: &BoundaryField, axis: usize) -> BoundaryField {
    Spectrum::of_boundary(g).derivative(axis).to_boundary()
}

pub fn surface_laplacian(g: &BoundaryField) -> BoundaryField {
    Spectrum::of_boundary(g).laplacian().to_boundary()
}

pub fn inverse_surface_laplacian(g: &BoundaryField) -> BoundaryField {
    Spectrum::of_boundary(g).inverse_laplacian().to_boundary()
}

/// Two-thirds-rule truncation of the horizontal spectrum on every level.
pub fn dealias(f: &ScalarField) -> ScalarField {
    Spectrum::of_field(f).truncate_two_thirds().to_field()
}
