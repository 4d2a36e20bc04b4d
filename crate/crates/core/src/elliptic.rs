//! Dirichlet problems on the slab.
//!
//! Every operator here is second order in `x3` whatever the grid's
//! [`FdOrder`](crate::grid::FdOrder): the flat Laplacian uses the compact
//! three-point stencil, and the variable-coefficient operator is written in
//! flux form so that `E = I` reproduces it exactly. The flat inverse is then
//! an exact preconditioner at `E = I`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{cofactor_rate, directional, directional_scalar, gradient, partial, CofactorData, FlowMap};
use crate::grid::spectral::derivative_wavenumber;
use crate::grid::{BoundaryField, Face, GridSpec, ScalarField, Spectrum, TensorField, VectorField};

/// Smallest admissible eigenvalue of the coefficient matrix.
pub const DEFAULT_E_MIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative residual target.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Forward transform of the interior rhs, Thomas sweep per mode, inverse.
/// `bottom`/`top` are the spectra of the Dirichlet data.
fn flat_solve_spectral(rhs: &Spectrum, bottom: &[Complex64], top: &[Complex64]) -> Spectrum {
    let g = rhs.grid();
    let (n1, n2, n3) = (g.n1(), g.n2(), g.n3());
    let h2 = g.h3() * g.h3();
    let inv_h2 = 1.0 / h2;
    let m = n3 - 1;
    let mut out = rhs.clone();
    out.plane_mut(0).copy_from_slice(bottom);
    out.plane_mut(n3).copy_from_slice(top);
    let mut cp = vec![0.0; m];
    let mut d = vec![Complex64::default(); m];
    for i2 in 0..n2 {
        let k2 = derivative_wavenumber(i2, n2);
        for i1 in 0..n1 {
            let k1 = derivative_wavenumber(i1, n1);
            let j = i1 + n1 * i2;
            let diag = 2.0 * inv_h2 + k1 * k1 + k2 * k2;
            let off = -inv_h2;
            for (r, dr) in d.iter_mut().enumerate() {
                *dr = rhs.plane(r + 1)[j];
            }
            d[0] += bottom[j] * inv_h2;
            d[m - 1] += top[j] * inv_h2;
            // Constant-coefficient Thomas sweep.
            cp[0] = off / diag;
            d[0] /= diag;
            for r in 1..m {
                let den = diag - off * cp[r - 1];
                cp[r] = off / den;
                d[r] = (d[r] - d[r - 1] * off) / den;
            }
            for r in (0..m - 1).rev() {
                let next = d[r + 1];
                d[r] -= next * cp[r];
            }
            for (r, dr) in d.iter().enumerate() {
                out.plane_mut(r + 1)[j] = *dr;
            }
        }
    }
    out
}

/// `−Δu = rhs` at interior levels, `u = dirichlet` on both faces. Direct.
pub fn solve_flat_poisson(rhs: &ScalarField, dirichlet: &BoundaryField) -> ScalarField {
    let bs = Spectrum::of_boundary(dirichlet);
    flat_solve_spectral(&Spectrum::of_field(rhs), bs.plane(0), bs.plane(1)).to_field()
}

fn flat_solve_homogeneous(rhs: &ScalarField) -> ScalarField {
    let z = vec![Complex64::default(); rhs.grid().plane_len()];
    flat_solve_spectral(&Spectrum::of_field(rhs), &z, &z).to_field()
}

/// Discrete `−Δu` at interior levels, zero on the face levels.
pub fn flat_laplacian(u: &ScalarField) -> ScalarField {
    let g = u.grid();
    let s = Spectrum::of_field(u).laplacian().to_field();
    let inv_h2 = 1.0 / (g.h3() * g.h3());
    let mut out = ScalarField::zeros(g);
    for k in 1..g.n3() {
        let (lo, mid, hi, lap) = (u.level(k - 1), u.level(k), u.level(k + 1), s.level(k));
        let dst = out.level_mut(k);
        for p in 0..dst.len() {
            dst[p] = -(hi[p] - 2.0 * mid[p] + lo[p]) * inv_h2 - lap[p];
        }
    }
    out
}

/// Harmonic function with the given trace.
pub fn harmonic_extension(g: &BoundaryField) -> ScalarField {
    solve_flat_poisson(&ScalarField::zeros(g.grid()), g)
}

pub fn harmonic_extension_vector(g: &[BoundaryField; 3]) -> VectorField {
    VectorField::new([harmonic_extension(&g[0]), harmonic_extension(&g[1]), harmonic_extension(&g[2])])
}

/// Smallest eigenvalue of a symmetric 3×3 matrix (trigonometric closed form).
pub fn min_eigenvalue_sym3(m: &[[f64; 3]; 3]) -> f64 {
    let p1 = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
    let tr = m[0][0] + m[1][1] + m[2][2];
    if p1 == 0.0 {
        return m[0][0].min(m[1][1]).min(m[2][2]);
    }
    let q = tr / 3.0;
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (m[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let detb = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (detb / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos()
}

/// `Mq = −Div(E∇q)` on interior levels, in flux form with face-averaged `E33`.
#[derive(Debug, Clone)]
pub struct VariableOperator {
    e: TensorField,
    e33_face: Vec<f64>,
}

impl VariableOperator {
    /// Rejects non-symmetric `E` or `λ_min(E) < e_min`.
    pub fn new(e: TensorField, e_min: f64) -> Result<Self> {
        let g = e.grid();
        if !e.is_finite() {
            return Err(Error::NonFinite("elliptic coefficient"));
        }
        let mut lmin = f64::INFINITY;
        for p in 0..g.len() {
            let m = e.at(p);
            let scale = m.iter().flatten().fold(1.0_f64, |a, x| a.max(x.abs()));
            for i in 0..3 {
                for j in 0..i {
                    if (m[i][j] - m[j][i]).abs() > 1e-12 * scale {
                        return Err(Error::Coefficient(format!("E not symmetric at node {p}")));
                    }
                }
            }
            lmin = lmin.min(min_eigenvalue_sym3(&m));
        }
        if lmin < e_min {
            return Err(Error::Coefficient(format!("smallest eigenvalue {lmin:.4e} below {e_min}")));
        }
        let e33 = e.get(2, 2);
        let mut e33_face = Vec::with_capacity(g.n3() * g.plane_len());
        for k in 0..g.n3() {
            e33_face.extend(e33.level(k).iter().zip(e33.level(k + 1)).map(|(a, b)| 0.5 * (a + b)));
        }
        Ok(Self { e, e33_face })
    }

    pub fn grid(&self) -> GridSpec {
        self.e.grid()
    }

    pub fn coefficient(&self) -> &TensorField {
        &self.e
    }

    /// Applies the operator using all levels of `q`; output is zero on the faces.
    pub fn apply(&self, q: &ScalarField) -> ScalarField {
        let g = q.grid();
        let n3 = g.n3();
        let np = g.plane_len();
        let inv_h = 1.0 / g.h3();
        let sq = Spectrum::of_field(q);
        let d1 = sq.derivative(1).to_field();
        let d2 = sq.derivative(2).to_field();
        // Centered vertical difference, zero on the face levels.
        let mut d3 = ScalarField::zeros(g);
        for k in 1..n3 {
            let (lo, hi) = (q.level(k - 1), q.level(k + 1));
            for (p, x) in d3.level_mut(k).iter_mut().enumerate() {
                *x = 0.5 * inv_h * (hi[p] - lo[p]);
            }
        }
        let e = &self.e;
        let flux = |a: usize| {
            let mut f = e.get(a, 0) * &d1;
            f += &(e.get(a, 1) * &d2);
            f += &(e.get(a, 2) * &d3);
            f
        };
        let f1 = Spectrum::of_field(&flux(0)).derivative(1);
        let f2 = Spectrum::of_field(&flux(1)).derivative(2);
        let mut div_h = f1;
        for p in 0..div_h.planes() {
            let src = f2.plane(p).to_vec();
            for (z, w) in div_h.plane_mut(p).iter_mut().zip(src) {
                *z += w;
            }
        }
        let div_h = div_h.to_field();
        let mut w = e.get(2, 0) * &d1;
        w += &(e.get(2, 1) * &d2);
        let mut out = ScalarField::zeros(g);
        for k in 1..n3 {
            let (qlo, qmid, qhi) = (q.level(k - 1), q.level(k), q.level(k + 1));
            let (wlo, whi) = (w.level(k - 1), w.level(k + 1));
            let (flo, fhi) = (&self.e33_face[(k - 1) * np..k * np], &self.e33_face[k * np..(k + 1) * np]);
            let dh = div_h.level(k);
            let dst = out.level_mut(k);
            for p in 0..np {
                let vert = (fhi[p] * (qhi[p] - qmid[p]) - flo[p] * (qmid[p] - qlo[p])) * inv_h * inv_h;
                dst[p] = -dh[p] - 0.5 * inv_h * (whi[p] - wlo[p]) - vert;
            }
        }
        out
    }
}

fn interior_dot(a: &ScalarField, b: &ScalarField) -> f64 {
    let g = a.grid();
    let np = g.plane_len();
    a.values()[np..np * g.n3()].iter().zip(&b.values()[np..np * g.n3()]).map(|(x, y)| x * y).sum()
}

fn zero_faces(f: &mut ScalarField) {
    let n3 = f.grid().n3();
    f.level_mut(0).fill(0.0);
    f.level_mut(n3).fill(0.0);
}

/// `Mq = rhs` on interior levels, `q = dirichlet` on the faces; PCG with the flat inverse.
pub fn solve_variable(
    op: &VariableOperator,
    rhs: &ScalarField,
    dirichlet: &BoundaryField,
    guess: Option<&ScalarField>,
    cfg: &SolverConfig,
) -> Result<(ScalarField, SolveStats)> {
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidParameter("solver tolerance must be positive".into()));
    }
    let g = op.grid();
    if rhs.grid() != g || dirichlet.grid() != g {
        return Err(Error::GridMismatch);
    }
    let lift = ScalarField::zeros(g).with_trace(dirichlet);
    let mut b = rhs - &op.apply(&lift);
    zero_faces(&mut b);
    let bnorm = interior_dot(&b, &b).sqrt();
    let mut x = match guess {
        Some(x0) => {
            let mut x = x0.clone();
            zero_faces(&mut x);
            x
        }
        None => ScalarField::zeros(g),
    };
    if bnorm == 0.0 {
        return Ok((lift, SolveStats::default()));
    }
    let mut r = &b - &op.apply(&x);
    zero_faces(&mut r);
    let mut rnorm = interior_dot(&r, &r).sqrt();
    let mut iterations = 0;
    if rnorm > cfg.tol * bnorm {
        let mut z = flat_solve_homogeneous(&r);
        let mut p = z.clone();
        let mut rz = interior_dot(&r, &z);
        loop {
            iterations += 1;
            let ap = op.apply(&p);
            let alpha = rz / interior_dot(&p, &ap);
            x.axpy(alpha, &p);
            r.axpy(-alpha, &ap);
            rnorm = interior_dot(&r, &r).sqrt();
            if !rnorm.is_finite() {
                return Err(Error::NonFinite("conjugate gradient"));
            }
            if rnorm <= cfg.tol * bnorm {
                break;
            }
            if iterations >= cfg.max_iter {
                return Err(Error::NoConvergence { iterations, residual: rnorm / bnorm });
            }
            z = flat_solve_homogeneous(&r);
            let rz_new = interior_dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            p = &z + &p.scaled(beta);
        }
    }
    x += &lift;
    Ok((x, SolveStats { iterations, residual: rnorm / bnorm }))
}

/// `E = J(𝒜ᵀ𝒜)`.
pub fn pressure_coefficient(a: &TensorField, j: &ScalarField) -> TensorField {
    TensorField::from_pointwise(a.grid(), |p| {
        let m = a.at(p);
        let jp = j.values()[p];
        let mut e = [[0.0; 3]; 3];
        for (l, row) in e.iter_mut().enumerate() {
            for (n, x) in row.iter_mut().enumerate() {
                *x = jp * (0..3).map(|k| m[k][l] * m[k][n]).sum::<f64>();
            }
        }
        e
    })
}

/// Source terms of the pressure equation; `g = g1 + b₀·∇g2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureSources {
    pub g1: ScalarField,
    pub g2: ScalarField,
    pub g: ScalarField,
}

/// `Σ_ij J𝒜_ij ∂_j u_i`.
fn j_div_a(ja: &TensorField, u: &VectorField) -> ScalarField {
    let mut out = ScalarField::zeros(u.grid());
    for i in 0..3 {
        let d = gradient(u.component(i));
        for (j, dj) in d.iter().enumerate() {
            out += &(ja.get(i, j) * dj);
        }
    }
    out
}

/// Assembles `G¹`, `G²` and `G` with the commutator `[X, Y]w = X(Yw) − Y(Xw)`
/// expanded literally. `dt_a` is `∂_t𝒜^κ`.
pub fn pressure_sources(
    eta: &FlowMap,
    v: &VectorField,
    cof_kappa: &CofactorData,
    dt_a: &TensorField,
    b0: &VectorField,
) -> PressureSources {
    let g = v.grid();
    let ja = cof_kappa.j_a();
    let jdta = dt_a.map(|e| e * &cof_kappa.j);
    let mut g1 = j_div_a(&jdta, v);
    if b0.max_abs() == 0.0 {
        let z = ScalarField::zeros(g);
        return PressureSources { g1: g1.clone(), g2: z, g: g1 };
    }
    let b = &directional(b0, eta.displacement()) + b0;
    let g2 = j_div_a(&ja, &b);
    let xy = j_div_a(&ja, &directional(b0, &b));
    let yx = directional_scalar(b0, &g2);
    g1 += &(&xy - &yx);
    let gsum = &g1 + &directional_scalar(b0, &g2);
    PressureSources { g1, g2, g: gsum }
}

/// Pressure with `q = 0` on the faces. Solves `Div(E∇q) = G`, which is the
/// sign consistent with the initial-pressure problem.
pub fn solve_pressure(
    sources: &PressureSources,
    cof_kappa: &CofactorData,
    guess: Option<&ScalarField>,
    cfg: &SolverConfig,
) -> Result<(ScalarField, SolveStats)> {
    let e = pressure_coefficient(&cof_kappa.a, &cof_kappa.j);
    let op = VariableOperator::new(e, DEFAULT_E_MIN)?;
    solve_variable(&op, &(-&sources.g), &BoundaryField::zeros(sources.g.grid()), guess, cfg)
}

/// `∂_t𝒜` induced by the rate `w = ∂_tη` through `∂𝒜_ij = −𝒜_iℓ ∂_ℓ w_m 𝒜_mj`.
pub fn cofactor_time_derivative(a: &TensorField, rate: &VectorField) -> TensorField {
    cofactor_rate(a, &crate::geometry::vector_gradient(rate))
}

/// `−Δq₀ = ∂_j v_i ∂_i v_j − ∂_j b_i ∂_i b_j`, `q₀ = 0` on the faces.
pub fn initial_pressure(v0: &VectorField, b0: &VectorField) -> ScalarField {
    let g = v0.grid();
    let quad = |u: &VectorField| {
        let d: Vec<[ScalarField; 3]> = u.components().iter().map(gradient).collect();
        let mut s = ScalarField::zeros(g);
        for i in 0..3 {
            for j in 0..3 {
                s += &(&d[i][j] * &d[j][i]);
            }
        }
        s
    };
    let mut rhs = quad(v0);
    if b0.max_abs() > 0.0 {
        rhs -= &quad(b0);
    }
    solve_flat_poisson(&rhs, &BoundaryField::zeros(g))
}

/// `min_Γ(−∇q·N)`; with `q = 0` on the faces this is `∓∂₃q` on top/bottom.
pub fn taylor_minimum(q: &ScalarField) -> f64 {
    let d3 = partial(q, 2).trace();
    let mut m = f64::INFINITY;
    for face in Face::BOTH {
        let s = face.normal_sign();
        for &x in d3.face(face) {
            m = m.min(-s * x);
        }
    }
    m
}
