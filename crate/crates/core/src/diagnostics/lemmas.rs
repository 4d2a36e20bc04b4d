//! Monte-Carlo ratios `LHS/RHS` of the product, commutator, mollifier,
//! Hodge and normal-trace inequalities over random band-limited fields.
//! Only boundedness and stability of the ratios is meaningful.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::{divergence, gradient, partial};
use crate::grid::{
    boundary_norm, tangential_derivative, tangential_derivative_boundary, vector_boundary_norm_sq, volume_norm,
    BoundaryField, Face, GridSpec, ScalarField, VectorField,
};
use crate::smoothing::{mollifier_commutator, mollify_boundary, MollifierSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LemmaId {
    /// `|Λ_κh|_s ≤ |h|_s`.
    Test3,
    /// `|∂̄Λ_κh|₀ ≤ κ⁻¹|h|₀`.
    Loss,
    /// `|[Λ_κ, h]g|₀ ≲ |h|_{L∞}|g|₀`.
    Es00,
    /// `|[Λ_κ, h]∂̄g|₀ ≲ |h|_{W^{1,∞}}|g|₀`.
    Es10,
    /// `‖D^α(gh)‖₀ ≲ ‖g‖₂‖h‖₃ + ‖g‖₃‖h‖₂`, `|α| = 2`.
    Co0,
    /// `‖[D^α, g]h‖₀ ≲ ‖Dg‖₁‖h‖₂ + ‖Dg‖₂‖h‖₁`, `|α| = 2`.
    Co1,
    /// `‖[D^α, g, h]‖₀ ≲ ‖Dg‖₀‖Dh‖₂ + ‖Dg‖₂‖Dh‖₀`, `|α| = 2`.
    Co2,
    /// `|gh|_{1/2} ≲ |g|_{W^{1,∞}}|h|_{1/2}`.
    Co123,
    /// `‖ω‖₁ ≲ ‖ω‖₀ + ‖curl ω‖₀ + ‖div ω‖₀ + |∂̄ω·N|_{−1/2}` on harmonic gradients.
    Hodd,
    /// `|∂̄ω·N|_{−1/2} ≲ ‖∂̄ω‖₀ + ‖div ω‖₀`.
    Gga,
}

impl LemmaId {
    pub const ALL: [LemmaId; 10] = [
        LemmaId::Test3,
        LemmaId::Loss,
        LemmaId::Es00,
        LemmaId::Es10,
        LemmaId::Co0,
        LemmaId::Co1,
        LemmaId::Co2,
        LemmaId::Co123,
        LemmaId::Hodd,
        LemmaId::Gga,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::Test3 => "test3",
            LemmaId::Loss => "loss",
            LemmaId::Es00 => "es0-0",
            LemmaId::Es10 => "es1-0",
            LemmaId::Co0 => "co0",
            LemmaId::Co1 => "co1",
            LemmaId::Co2 => "co2",
            LemmaId::Co123 => "co123",
            LemmaId::Hodd => "hodd",
            LemmaId::Gga => "gga",
        }
    }

    /// Whether the inequality involves `Λ_κ`.
    pub fn uses_kappa(self) -> bool {
        matches!(self, LemmaId::Test3 | LemmaId::Loss | LemmaId::Es00 | LemmaId::Es10)
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        LemmaId::ALL.into_iter().find(|l| l.name() == s).ok_or_else(|| format!("unknown lemma {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaSetup {
    pub grid: GridSpec,
    pub kappa: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaCheck {
    pub lemma: LemmaId,
    /// Supremum of `LHS/RHS` over the samples.
    pub ratio: f64,
    pub samples: usize,
}

/// Base wavenumber of the mollifier samples. It doubles as `κ` halves, so
/// `κ·k` and with it the multiplier seen by each mode stay fixed.
pub fn kappa_scale(kappa: f64) -> i64 {
    ((0.2 / kappa).round() as i64).max(1)
}

struct Mode {
    k: [f64; 2],
    amp: f64,
    phase: f64,
}

fn modes(rng: &mut ChaCha8Rng, count: usize, base: i64, reach: i64) -> Vec<Mode> {
    (0..count)
        .map(|_| {
            let mut m = [0i64; 2];
            while m == [0, 0] {
                m = [rng.gen_range(-reach..=reach), rng.gen_range(-reach..=reach)];
            }
            Mode {
                k: [(m[0] * base) as f64, (m[1] * base) as f64],
                amp: rng.gen_range(-1.0..1.0),
                phase: rng.gen_range(0.0..2.0 * PI),
            }
        })
        .collect()
}

fn eval(ms: &[Mode], x1: f64, x2: f64) -> f64 {
    ms.iter().map(|m| m.amp * (2.0 * PI * (m.k[0] * x1 + m.k[1] * x2) + m.phase).cos()).sum()
}

/// Random band-limited trace with an offset, independent on each face.
fn random_boundary(grid: GridSpec, rng: &mut ChaCha8Rng, base: i64) -> BoundaryField {
    let faces: Vec<(f64, Vec<Mode>)> = (0..2).map(|_| (rng.gen_range(-1.0..1.0), modes(rng, 4, base, 2))).collect();
    BoundaryField::from_fn(grid, |face, x1, x2| {
        let (c, ms) = &faces[match face {
            Face::Bottom => 0,
            Face::Top => 1,
        }];
        c + eval(ms, x1, x2)
    })
}

/// Random smooth volume field: horizontal modes times vertical cosines.
fn random_volume(grid: GridSpec, rng: &mut ChaCha8Rng) -> ScalarField {
    let ms = modes(rng, 4, 1, 2);
    let vert: Vec<(f64, f64)> = ms.iter().map(|_| (rng.gen_range(0..=2) as f64, rng.gen_range(0.0..PI))).collect();
    let c = rng.gen_range(-1.0..1.0);
    ScalarField::from_fn(grid, |x1, x2, x3| {
        c + ms
            .iter()
            .zip(&vert)
            .map(|(m, (n, ph))| {
                m.amp * (2.0 * PI * (m.k[0] * x1 + m.k[1] * x2) + m.phase).cos() * (PI * n * x3 + ph).cos()
            })
            .sum::<f64>()
    })
}

/// `∇φ` for a random harmonic `φ = Σ c cos(2πk·x + θ) cosh(2π|k|(x₃ − z))/cosh(2π|k|)`.
fn harmonic_gradient(grid: GridSpec, rng: &mut ChaCha8Rng) -> VectorField {
    let ms = modes(rng, 3, 1, 2);
    let centers: Vec<f64> = ms.iter().map(|_| rng.gen_range(0.0..1.0)).collect();
    let phi = ScalarField::from_fn(grid, |x1, x2, x3| {
        ms.iter()
            .zip(&centers)
            .map(|(m, z)| {
                let kk = 2.0 * PI * (m.k[0].hypot(m.k[1]));
                m.amp * (2.0 * PI * (m.k[0] * x1 + m.k[1] * x2) + m.phase).cos() * (kk * (x3 - z)).cosh() / kk.cosh()
            })
            .sum()
    });
    VectorField::new(gradient(&phi))
}

fn w1_inf(h: &BoundaryField) -> f64 {
    h.max_abs() + tangential_derivative_boundary(h, 1).max_abs() + tangential_derivative_boundary(h, 2).max_abs()
}

/// `D^α` with `α = (a, b, c)`: spectral horizontally, repeated first differences vertically.
fn d_alpha(f: &ScalarField, alpha: [usize; 3]) -> ScalarField {
    let mut out = f.clone();
    for _ in 0..alpha[0] {
        out = tangential_derivative(&out, 1);
    }
    for _ in 0..alpha[1] {
        out = tangential_derivative(&out, 2);
    }
    for _ in 0..alpha[2] {
        out = partial(&out, 2);
    }
    out
}

const ORDER_TWO: [[usize; 3]; 6] = [[2, 0, 0], [0, 2, 0], [0, 0, 2], [1, 1, 0], [1, 0, 1], [0, 1, 1]];

fn grad_norm(f: &ScalarField, s: usize) -> Result<f64> {
    let mut t = 0.0;
    for d in gradient(f) {
        t += volume_norm(&d, s)?.powi(2);
    }
    Ok(t.sqrt())
}

fn vector_norm(u: &VectorField, s: usize) -> Result<f64> {
    Ok(crate::grid::vector_volume_norm_sq(u, s)?.sqrt())
}

/// `|∂̄ω·N|_{−1/2}` with `N = ∓e₃` on the two faces; both tangential directions.
fn normal_trace(omega: &VectorField) -> Result<f64> {
    let w3 = omega.component(2);
    let parts: Vec<BoundaryField> = (1..=2)
        .map(|axis| {
            let d = tangential_derivative(w3, axis).trace();
            let mut out = d.clone();
            for face in Face::BOTH {
                let s = face.normal_sign();
                out.face_mut(face).iter_mut().for_each(|x| *x *= s);
            }
            out
        })
        .collect();
    Ok(vector_boundary_norm_sq(&parts, -0.5)?.sqrt())
}

fn curl(u: &VectorField) -> VectorField {
    let d = |c: usize, j: usize| partial(u.component(c), j);
    VectorField::new([&d(2, 1) - &d(1, 2), &d(0, 2) - &d(2, 0), &d(1, 0) - &d(0, 1)])
}

fn sample_ratio(lemma: LemmaId, setup: &LemmaSetup, spec: &MollifierSpec, rng: &mut ChaCha8Rng) -> Result<f64> {
    let g = setup.grid;
    let base = kappa_scale(setup.kappa);
    Ok(match lemma {
        LemmaId::Test3 => {
            let h = random_boundary(g, rng, base);
            let lh = mollify_boundary(&h, spec, 1);
            let mut r = 0.0_f64;
            for s in [0.0, 0.5, 1.0, 2.0, 3.0] {
                r = r.max(boundary_norm(&lh, s)? / boundary_norm(&h, s)?);
            }
            r
        }
        LemmaId::Loss => {
            let h = random_boundary(g, rng, base);
            let lh = mollify_boundary(&h, spec, 1);
            let d = vector_boundary_norm_sq(
                &[tangential_derivative_boundary(&lh, 1), tangential_derivative_boundary(&lh, 2)],
                0.0,
            )?
            .sqrt();
            setup.kappa * d / boundary_norm(&h, 0.0)?
        }
        LemmaId::Es00 => {
            let (h, gg) = (random_boundary(g, rng, base), random_boundary(g, rng, base));
            boundary_norm(&mollifier_commutator(&h, &gg, spec), 0.0)? / (h.max_abs() * boundary_norm(&gg, 0.0)?)
        }
        LemmaId::Es10 => {
            let (h, gg) = (random_boundary(g, rng, base), random_boundary(g, rng, base));
            let mut lhs = 0.0_f64;
            for axis in 1..=2 {
                let c = mollifier_commutator(&h, &tangential_derivative_boundary(&gg, axis), spec);
                lhs = lhs.max(boundary_norm(&c, 0.0)?);
            }
            lhs / (w1_inf(&h) * boundary_norm(&gg, 0.0)?)
        }
        LemmaId::Co123 => {
            let (a, b) = (random_boundary(g, rng, 1), random_boundary(g, rng, 1));
            boundary_norm(&(&a * &b), 0.5)? / (w1_inf(&a) * boundary_norm(&b, 0.5)?)
        }
        LemmaId::Co0 | LemmaId::Co1 | LemmaId::Co2 => {
            let (a, b) = (random_volume(g, rng), random_volume(g, rng));
            let ab = &a * &b;
            let mut lhs = 0.0_f64;
            for alpha in ORDER_TWO {
                let mut t = d_alpha(&ab, alpha);
                if lemma != LemmaId::Co0 {
                    t -= &(&a * &d_alpha(&b, alpha));
                }
                if lemma == LemmaId::Co2 {
                    t -= &(&d_alpha(&a, alpha) * &b);
                }
                lhs = lhs.max(volume_norm(&t, 0)?);
            }
            let rhs = match lemma {
                LemmaId::Co0 => volume_norm(&a, 2)? * volume_norm(&b, 3)? + volume_norm(&a, 3)? * volume_norm(&b, 2)?,
                LemmaId::Co1 => grad_norm(&a, 1)? * volume_norm(&b, 2)? + grad_norm(&a, 2)? * volume_norm(&b, 1)?,
                _ => grad_norm(&a, 0)? * grad_norm(&b, 2)? + grad_norm(&a, 2)? * grad_norm(&b, 0)?,
            };
            lhs / rhs
        }
        LemmaId::Hodd => {
            let w = harmonic_gradient(g, rng);
            let rhs = vector_norm(&w, 0)?
                + vector_norm(&curl(&w), 0)?
                + volume_norm(&divergence(&w), 0)?
                + normal_trace(&w)?;
            vector_norm(&w, 1)? / rhs
        }
        LemmaId::Gga => {
            let w = VectorField::new([random_volume(g, rng), random_volume(g, rng), random_volume(g, rng)]);
            let mut dbar = 0.0;
            for axis in 1..=2 {
                dbar += vector_norm(&w.map(|c| tangential_derivative(c, axis)), 0)?.powi(2);
            }
            normal_trace(&w)? / (dbar.sqrt() + volume_norm(&divergence(&w), 0)?)
        }
    })
}

/// Supremum of the sampled ratios for one inequality.
pub fn lemma_harness(lemma: LemmaId, setup: &LemmaSetup) -> Result<LemmaCheck> {
    let spec = MollifierSpec::new(setup.kappa)?;
    let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
    let mut ratio = 0.0_f64;
    for _ in 0..setup.samples {
        let r = sample_ratio(lemma, setup, &spec, &mut rng)?;
        if !r.is_finite() {
            return Err(crate::Error::NonFinite("lemma ratio"));
        }
        ratio = ratio.max(r);
    }
    Ok(LemmaCheck { lemma, ratio, samples: setup.samples })
}
