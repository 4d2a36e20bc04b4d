//! Flow-map calculus: deformation gradient, cofactor matrix, Jacobian and the
//! derivative operators they induce.

use crate::error::{Band, Error, Result};
use crate::grid::{
    horizontal_gradient, vertical_derivative, volume_norm, BoundaryField, Face, GridSpec,
    ScalarField, TensorField, VectorField,
};

/// Hard floor on `J` below which a map is rejected.
pub const DEFAULT_J_MIN: f64 = 0.5;
/// Working band for `|J − 1|` and `|𝒜 − I|`.
pub const BAND_WIDTH: f64 = 0.125;

/// `(∂₁f, ∂₂f, ∂₃f)`.
pub fn gradient(f: &ScalarField) -> [ScalarField; 3] {
    let [d1, d2] = horizontal_gradient(f);
    [d1, d2, vertical_derivative(f, 1)]
}

/// `∂_j f` with `j ∈ {0, 1, 2}`.
pub fn partial(f: &ScalarField, j: usize) -> ScalarField {
    match j {
        0 => crate::grid::tangential_derivative(f, 1),
        1 => crate::grid::tangential_derivative(f, 2),
        2 => vertical_derivative(f, 1),
        _ => panic!("axis {j} out of range"),
    }
}

/// `(∇u)_ij = ∂_j u_i`.
pub fn vector_gradient(u: &VectorField) -> TensorField {
    let mut e = Vec::with_capacity(9);
    for c in u.components() {
        e.extend(gradient(c));
    }
    TensorField::from_entries(e)
}

/// `Σ_j ∂_j u_j`.
pub fn divergence(u: &VectorField) -> ScalarField {
    let mut out = partial(u.component(0), 0);
    out += &partial(u.component(1), 1);
    out += &partial(u.component(2), 2);
    out
}

/// Positions `η = Id + d`; only the horizontally periodic displacement `d` is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap {
    disp: VectorField,
}

impl FlowMap {
    pub fn identity(grid: GridSpec) -> Self {
        Self { disp: VectorField::zeros(grid) }
    }
    pub fn from_displacement(disp: VectorField) -> Self {
        Self { disp }
    }
    pub fn grid(&self) -> GridSpec {
        self.disp.grid()
    }
    pub fn displacement(&self) -> &VectorField {
        &self.disp
    }
    pub fn into_displacement(self) -> VectorField {
        self.disp
    }
    /// `η_i = x_i + d_i` sampled on the grid.
    pub fn positions(&self) -> VectorField {
        let g = self.grid();
        let id = VectorField::from_fn(g, |x, y, z| [x, y, z]);
        &id + &self.disp
    }
    /// `∇η = I + ∇d`.
    pub fn gradient(&self) -> TensorField {
        let mut f = vector_gradient(&self.disp);
        for i in 0..3 {
            f.get_mut(i, i).values_mut().iter_mut().for_each(|x| *x += 1.0);
        }
        f
    }
    /// Advance by a displacement increment.
    pub fn shifted(&self, delta: &VectorField, scale: f64) -> Self {
        let mut d = self.disp.clone();
        d.axpy(scale, delta);
        Self { disp: d }
    }
}

/// Guards applied while inverting `∇η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CofactorOptions {
    pub j_min: f64,
    /// Reject maps with `|𝒜 − I| > 1/8` or `|J − 1| > 1/8`.
    pub enforce_band: bool,
}

impl Default for CofactorOptions {
    fn default() -> Self {
        Self { j_min: DEFAULT_J_MIN, enforce_band: false }
    }
}

/// `∇η`, `𝒜 = (∇η)^{-T}` and `J = det ∇η`.
#[derive(Debug, Clone, PartialEq)]
pub struct CofactorData {
    pub grad_eta: TensorField,
    pub a: TensorField,
    pub j: ScalarField,
}

impl CofactorData {
    pub fn grid(&self) -> GridSpec {
        self.j.grid()
    }
    pub fn identity(grid: GridSpec) -> Self {
        Self {
            grad_eta: TensorField::identity(grid),
            a: TensorField::identity(grid),
            j: ScalarField::constant(grid, 1.0),
        }
    }
    pub fn j_deviation(&self) -> f64 {
        self.j.values().iter().fold(0.0_f64, |m, &x| m.max((x - 1.0).abs()))
    }
    pub fn a_deviation(&self) -> f64 {
        self.a.max_deviation_from_identity()
    }
    /// `J𝒜`, the cofactor matrix of `∇η`.
    pub fn j_a(&self) -> TensorField {
        self.a.map(|e| e * &self.j)
    }
}

/// Adjugate-based inverse transpose and determinant of a 3×3 matrix.
#[inline]
pub fn inverse_transpose(f: &[[f64; 3]; 3]) -> ([[f64; 3]; 3], f64) {
    let mut c = [[0.0; 3]; 3];
    for (i, row) in c.iter_mut().enumerate() {
        let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
        for (j, x) in row.iter_mut().enumerate() {
            let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
            *x = f[i1][j1] * f[i2][j2] - f[i1][j2] * f[i2][j1];
        }
    }
    let det = f[0][0] * c[0][0] + f[0][1] * c[0][1] + f[0][2] * c[0][2];
    for row in c.iter_mut() {
        for x in row.iter_mut() {
            *x /= det;
        }
    }
    (c, det)
}

pub fn cofactor(eta: &FlowMap) -> Result<CofactorData> {
    cofactor_with(eta, CofactorOptions::default())
}

pub fn cofactor_with(eta: &FlowMap, opts: CofactorOptions) -> Result<CofactorData> {
    cofactor_from_gradient(eta.gradient(), opts)
}

/// Inverts a precomputed deformation gradient `(∇η)_ij = ∂_j η_i`.
pub fn cofactor_from_gradient(grad_eta: TensorField, opts: CofactorOptions) -> Result<CofactorData> {
    let g = grad_eta.grid();
    if !grad_eta.is_finite() {
        return Err(Error::NonFinite("deformation gradient"));
    }
    let mut a: Vec<Vec<f64>> = (0..9).map(|_| Vec::with_capacity(g.len())).collect();
    let mut j = Vec::with_capacity(g.len());
    for p in 0..g.len() {
        let (m, det) = inverse_transpose(&grad_eta.at(p));
        for r in 0..3 {
            for c in 0..3 {
                a[3 * r + c].push(m[r][c]);
            }
        }
        j.push(det);
    }
    let j = ScalarField::from_vec(g, j);
    let a = TensorField::from_entries(a.into_iter().map(|d| ScalarField::from_vec(g, d)).collect());
    let data = CofactorData { grad_eta, a, j };
    let min_j = data.j.min();
    if !(min_j >= opts.j_min) {
        return Err(Error::SingularMap { min_j, j_min: opts.j_min, a_dev: data.a_deviation() });
    }
    if opts.enforce_band {
        let jd = data.j_deviation();
        if jd > BAND_WIDTH {
            return Err(Error::BandExit { band: Band::Jacobian, value: jd, limit: BAND_WIDTH });
        }
        let ad = data.a_deviation();
        if ad > BAND_WIDTH {
            return Err(Error::BandExit { band: Band::Cofactor, value: ad, limit: BAND_WIDTH });
        }
    }
    Ok(data)
}

/// `∂_j(J𝒜_ij)` per component `i`; zero in the continuum.
pub fn piola_residual(cof: &CofactorData) -> VectorField {
    let ja = cof.j_a();
    let comp = |i: usize| {
        let mut out = partial(ja.get(i, 0), 0);
        out += &partial(ja.get(i, 1), 1);
        out += &partial(ja.get(i, 2), 2);
        out
    };
    VectorField::new([comp(0), comp(1), comp(2)])
}

/// `(b₀·∇)u`, componentwise.
pub fn directional(b0: &VectorField, u: &VectorField) -> VectorField {
    u.map(|c| directional_scalar(b0, c))
}

pub fn directional_scalar(b0: &VectorField, f: &ScalarField) -> ScalarField {
    let d = gradient(f);
    let mut out = b0.component(0) * &d[0];
    out += &(b0.component(1) * &d[1]);
    out += &(b0.component(2) * &d[2]);
    out
}

/// `b = (b₀·∇)η`.
pub fn pullback_field(b0: &VectorField, eta: &FlowMap) -> VectorField {
    &directional(b0, eta.displacement()) + b0
}

/// `(b₀·∇)²η`.
pub fn lorentz_force(b0: &VectorField, eta: &FlowMap) -> VectorField {
    directional(b0, &pullback_field(b0, eta))
}

/// `(∇_𝒜 q)_i = 𝒜_ij ∂_j q`.
pub fn grad_a(q: &ScalarField, cof: &CofactorData) -> VectorField {
    let d = gradient(q);
    grad_a_from_partials(&d, &cof.a)
}

pub(crate) fn grad_a_from_partials(d: &[ScalarField; 3], a: &TensorField) -> VectorField {
    let comp = |i: usize| {
        let mut out = a.get(i, 0) * &d[0];
        out += &(a.get(i, 1) * &d[1]);
        out += &(a.get(i, 2) * &d[2]);
        out
    };
    VectorField::new([comp(0), comp(1), comp(2)])
}

/// `𝒜_ij ∂_j u_i`.
pub fn div_a(u: &VectorField, cof: &CofactorData) -> ScalarField {
    div_a_with(u, &cof.a)
}

pub fn div_a_with(u: &VectorField, a: &TensorField) -> ScalarField {
    let mut out = ScalarField::zeros(u.grid());
    for i in 0..3 {
        let d = gradient(u.component(i));
        for (j, dj) in d.iter().enumerate() {
            out += &(a.get(i, j) * dj);
        }
    }
    out
}

/// `(curl_𝒜 u)_i = ε_ijℓ 𝒜_jm ∂_m u_ℓ`.
pub fn curl_a(u: &VectorField, cof: &CofactorData) -> VectorField {
    let grads: Vec<[ScalarField; 3]> = u.components().iter().map(gradient).collect();
    // dA[l][j] = 𝒜_jm ∂_m u_l
    let da = |l: usize, j: usize| {
        let mut out = cof.a.get(j, 0) * &grads[l][0];
        out += &(cof.a.get(j, 1) * &grads[l][1]);
        out += &(cof.a.get(j, 2) * &grads[l][2]);
        out
    };
    let comp = |i: usize| {
        let (j, l) = ((i + 1) % 3, (i + 2) % 3);
        &da(l, j) - &da(j, l)
    };
    VectorField::new([comp(0), comp(1), comp(2)])
}

/// `∂𝒜_ij = −𝒜_iℓ ∂𝒻_mℓ 𝒜_mj` with `∂𝒻 = ∇w` for the rate `w`.
pub fn cofactor_rate(a: &TensorField, grad_rate: &TensorField) -> TensorField {
    let g = a.grid();
    TensorField::from_pointwise(g, |p| {
        let am = a.at(p);
        let df = grad_rate.at(p);
        // t = 𝒜 · (∂𝒻)ᵀ, t_im = 𝒜_iℓ ∂𝒻_mℓ
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            for m in 0..3 {
                t[i][m] = (0..3).map(|l| am[i][l] * df[m][l]).sum();
            }
        }
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = -(0..3).map(|m| t[i][m] * am[m][j]).sum::<f64>();
            }
        }
        out
    })
}

/// Outward unit normal `n = 𝒜N/|𝒜N|` on both faces, returned per component.
pub fn normals(cof: &CofactorData) -> [BoundaryField; 3] {
    let traces: Vec<BoundaryField> = (0..3).map(|i| cof.a.get(i, 2).trace()).collect();
    let g = cof.grid();
    let mut out = [BoundaryField::zeros(g), BoundaryField::zeros(g), BoundaryField::zeros(g)];
    for face in Face::BOTH {
        let s = face.normal_sign();
        for p in 0..g.plane_len() {
            let v = [traces[0].face(face)[p], traces[1].face(face)[p], traces[2].face(face)[p]];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            for (i, o) in out.iter_mut().enumerate() {
                o.face_mut(face)[p] = s * v[i] / norm;
            }
        }
    }
    out
}

/// Divergence-free, tangential-at-the-faces background field `b₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagneticParam {
    b0: VectorField,
}

impl MagneticParam {
    /// Rejects `b₀` whose third component is nonzero on a face or whose
    /// divergence exceeds `tol` in `L²`.
    pub fn new(b0: VectorField, tol: f64) -> Result<Self> {
        if !b0.is_finite() {
            return Err(Error::NonFinite("b0"));
        }
        if b0.component(2).trace().max_abs() != 0.0 {
            return Err(Error::InvalidParameter("b0 has a normal component on a face".into()));
        }
        let div = volume_norm(&divergence(&b0), 0)?;
        if div > tol {
            return Err(Error::InvalidParameter(format!("div b0 = {div:e} exceeds {tol:e}")));
        }
        Ok(Self { b0 })
    }
    /// A field read back from storage; validated when it was first built.
    pub(crate) fn from_stored(b0: VectorField) -> Self {
        Self { b0 }
    }
    pub fn zero(grid: GridSpec) -> Self {
        Self { b0: VectorField::zeros(grid) }
    }
    pub fn field(&self) -> &VectorField {
        &self.b0
    }
    pub fn is_zero(&self) -> bool {
        self.b0.max_abs() == 0.0
    }
    pub fn grid(&self) -> GridSpec {
        self.b0.grid()
    }
}

/// `‖(J(t+δ) − J(t))/δ − J𝒜_ij ∂_t𝒻_ij‖₀` with `∂_t𝒻` the forward difference of `∇η`.
pub fn identity_dj_check(eta0: &FlowMap, eta1: &FlowMap, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    let opts = CofactorOptions { j_min: f64::NEG_INFINITY, enforce_band: false };
    let c0 = cofactor_with(eta0, opts)?;
    let c1 = cofactor_with(eta1, opts)?;
    let mut res = (&c1.j - &c0.j).scaled(1.0 / delta);
    for i in 0..3 {
        for j in 0..3 {
            let df = (c1.grad_eta.get(i, j) - c0.grad_eta.get(i, j)).scaled(1.0 / delta);
            res -= &(&(&c0.j * c0.a.get(i, j)) * &df);
        }
    }
    volume_norm(&res, 0)
}
