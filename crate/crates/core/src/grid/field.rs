use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use super::GridSpec;

/// Grid-sampled scalar on the slab, stored with `x1` fastest, then `x2`, then level.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, data: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self { grid, data: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for i3 in 0..grid.levels() {
            let x3 = grid.x3(i3);
            for i2 in 0..grid.n2() {
                let x2 = grid.x2(i2);
                for i1 in 0..grid.n1() {
                    data.push(f(grid.x1(i1), x2, x3));
                }
            }
        }
        Self { grid, data }
    }

    /// Panics if the length does not match the grid.
    pub fn from_vec(grid: GridSpec, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), grid.len(), "field length does not match grid");
        Self { grid, data }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.data
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
    pub fn level(&self, i3: usize) -> &[f64] {
        let n = self.grid.plane_len();
        &self.data[i3 * n..(i3 + 1) * n]
    }
    pub fn level_mut(&mut self, i3: usize) -> &mut [f64] {
        let n = self.grid.plane_len();
        &mut self.data[i3 * n..(i3 + 1) * n]
    }
    pub fn at(&self, i1: usize, i2: usize, i3: usize) -> f64 {
        self.data[self.grid.index(i1, i2, i3)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid, data }
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Self) {
        assert_eq!(self.grid, x.grid, "fields live on different grids");
        for (y, &xv) in self.data.iter_mut().zip(&x.data) {
            *y += a * xv;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|x| a * x)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
    }
    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Horizontally periodic trace on both faces.
    pub fn trace(&self) -> BoundaryField {
        BoundaryField::from_faces(self.grid, self.level(0).to_vec(), self.level(self.grid.n3()).to_vec())
    }

    /// Copy of `self` with the face levels replaced by `g`.
    pub fn with_trace(&self, g: &BoundaryField) -> Self {
        let mut out = self.clone();
        let n3 = self.grid.n3();
        out.level_mut(0).copy_from_slice(g.face(Face::Bottom));
        out.level_mut(n3).copy_from_slice(g.face(Face::Top));
        out
    }
}

macro_rules! scalar_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: &ScalarField) -> ScalarField {
                self.zip_map(rhs, |a, b| a $op b)
            }
        }
        impl $tr<ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: ScalarField) -> ScalarField {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: &ScalarField) -> ScalarField {
                (&self).$m(rhs)
            }
        }
    };
}
scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scaled(rhs)
    }
}
impl Mul<f64> for ScalarField {
    type Output = ScalarField;
    fn mul(mut self, rhs: f64) -> ScalarField {
        self.data.iter_mut().for_each(|x| *x *= rhs);
        self
    }
}
impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scaled(-1.0)
    }
}
impl Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self * -1.0
    }
}
impl AddAssign<&ScalarField> for ScalarField {
    fn add_assign(&mut self, rhs: &ScalarField) {
        self.axpy(1.0, rhs);
    }
}
impl SubAssign<&ScalarField> for ScalarField {
    fn sub_assign(&mut self, rhs: &ScalarField) {
        self.axpy(-1.0, rhs);
    }
}

/// Three scalar components on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    c: [ScalarField; 3],
}

impl VectorField {
    pub fn new(c: [ScalarField; 3]) -> Self {
        assert!(
            c[0].grid == c[1].grid && c[1].grid == c[2].grid,
            "vector components live on different grids"
        );
        Self { c }
    }
    pub fn zeros(grid: GridSpec) -> Self {
        Self::new([ScalarField::zeros(grid), ScalarField::zeros(grid), ScalarField::zeros(grid)])
    }
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        Self::new([
            ScalarField::from_fn(grid, |a, b, c| f(a, b, c)[0]),
            ScalarField::from_fn(grid, |a, b, c| f(a, b, c)[1]),
            ScalarField::from_fn(grid, |a, b, c| f(a, b, c)[2]),
        ])
    }
    pub fn grid(&self) -> GridSpec {
        self.c[0].grid
    }
    pub fn components(&self) -> &[ScalarField; 3] {
        &self.c
    }
    pub fn into_components(self) -> [ScalarField; 3] {
        self.c
    }
    pub fn component(&self, i: usize) -> &ScalarField {
        &self.c[i]
    }
    pub fn component_mut(&mut self, i: usize) -> &mut ScalarField {
        &mut self.c[i]
    }
    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self::new([f(&self.c[0]), f(&self.c[1]), f(&self.c[2])])
    }
    pub fn try_map<E>(&self, f: impl Fn(&ScalarField) -> Result<ScalarField, E>) -> Result<Self, E> {
        Ok(Self::new([f(&self.c[0])?, f(&self.c[1])?, f(&self.c[2])?]))
    }
    pub fn zip_map(&self, other: &Self, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        Self::new([f(&self.c[0], &other.c[0]), f(&self.c[1], &other.c[1]), f(&self.c[2], &other.c[2])])
    }
    pub fn axpy(&mut self, a: f64, x: &Self) {
        for i in 0..3 {
            self.c[i].axpy(a, &x.c[i]);
        }
    }
    pub fn scaled(&self, a: f64) -> Self {
        self.map(|f| f.scaled(a))
    }
    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(ScalarField::max_abs).fold(0.0, f64::max)
    }
    pub fn is_finite(&self) -> bool {
        self.c.iter().all(ScalarField::is_finite)
    }
    /// Pointwise `sum_i self_i * other_i`.
    pub fn dot(&self, other: &Self) -> ScalarField {
        let mut out = &self.c[0] * &other.c[0];
        out += &(&self.c[1] * &other.c[1]);
        out += &(&self.c[2] * &other.c[2]);
        out
    }
}

impl Add<&VectorField> for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        self.zip_map(rhs, |a, b| a + b)
    }
}
impl Sub<&VectorField> for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        self.zip_map(rhs, |a, b| a - b)
    }
}
impl Mul<f64> for &VectorField {
    type Output = VectorField;
    fn mul(self, rhs: f64) -> VectorField {
        self.scaled(rhs)
    }
}
impl AddAssign<&VectorField> for VectorField {
    fn add_assign(&mut self, rhs: &VectorField) {
        self.axpy(1.0, rhs);
    }
}
impl SubAssign<&VectorField> for VectorField {
    fn sub_assign(&mut self, rhs: &VectorField) {
        self.axpy(-1.0, rhs);
    }
}

/// 3×3 matrix-valued field; entry `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    c: Vec<ScalarField>,
}

impl TensorField {
    pub fn from_entries(entries: Vec<ScalarField>) -> Self {
        assert_eq!(entries.len(), 9);
        let g = entries[0].grid;
        assert!(entries.iter().all(|e| e.grid == g), "tensor entries live on different grids");
        Self { c: entries }
    }
    pub fn zeros(grid: GridSpec) -> Self {
        Self { c: (0..9).map(|_| ScalarField::zeros(grid)).collect() }
    }
    pub fn identity(grid: GridSpec) -> Self {
        Self {
            c: (0..9)
                .map(|k| ScalarField::constant(grid, if k % 4 == 0 { 1.0 } else { 0.0 }))
                .collect(),
        }
    }
    /// Build from a pointwise map `node index -> matrix`.
    pub fn from_pointwise(grid: GridSpec, f: impl Fn(usize) -> [[f64; 3]; 3]) -> Self {
        let mut c: Vec<Vec<f64>> = (0..9).map(|_| Vec::with_capacity(grid.len())).collect();
        for p in 0..grid.len() {
            let m = f(p);
            for i in 0..3 {
                for j in 0..3 {
                    c[3 * i + j].push(m[i][j]);
                }
            }
        }
        Self { c: c.into_iter().map(|d| ScalarField::from_vec(grid, d)).collect() }
    }
    pub fn grid(&self) -> GridSpec {
        self.c[0].grid
    }
    pub fn get(&self, i: usize, j: usize) -> &ScalarField {
        &self.c[3 * i + j]
    }
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut ScalarField {
        &mut self.c[3 * i + j]
    }
    pub fn entries(&self) -> &[ScalarField] {
        &self.c
    }
    #[inline]
    pub fn at(&self, p: usize) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.c[3 * i + j].data[p];
            }
        }
        m
    }
    pub fn transpose(&self) -> Self {
        let mut c = Vec::with_capacity(9);
        for i in 0..3 {
            for j in 0..3 {
                c.push(self.get(j, i).clone());
            }
        }
        Self { c }
    }
    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self { c: self.c.iter().map(f).collect() }
    }
    pub fn zip_map(&self, other: &Self, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        Self { c: self.c.iter().zip(&other.c).map(|(a, b)| f(a, b)).collect() }
    }
    pub fn is_finite(&self) -> bool {
        self.c.iter().all(ScalarField::is_finite)
    }
    /// `max_{p,i,j} |T_ij(p) - delta_ij|`
    pub fn max_deviation_from_identity(&self) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                let d = if i == j { 1.0 } else { 0.0 };
                for &x in self.get(i, j).values() {
                    m = m.max((x - d).abs());
                }
            }
        }
        m
    }
    /// Pointwise matrix-vector product `(T u)_i = T_ij u_j`.
    pub fn apply(&self, u: &VectorField) -> VectorField {
        let row = |i: usize| {
            let mut out = self.get(i, 0) * u.component(0);
            out += &(self.get(i, 1) * u.component(1));
            out += &(self.get(i, 2) * u.component(2));
            out
        };
        VectorField::new([row(0), row(1), row(2)])
    }
}

/// Which face of the slab.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    /// `x3 = 0`, outward normal `-e3`.
    Bottom,
    /// `x3 = 1`, outward normal `+e3`.
    Top,
}

impl Face {
    pub const BOTH: [Face; 2] = [Face::Bottom, Face::Top];

    /// Third component of the outward unit normal.
    pub fn normal_sign(self) -> f64 {
        match self {
            Face::Bottom => -1.0,
            Face::Top => 1.0,
        }
    }
    pub fn level(self, grid: &GridSpec) -> usize {
        match self {
            Face::Bottom => 0,
            Face::Top => grid.n3(),
        }
    }
}

/// Scalar data on both faces of the slab, each an `n1 × n2` periodic plane.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    grid: GridSpec,
    faces: [Vec<f64>; 2],
}

impl BoundaryField {
    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.plane_len();
        Self { grid, faces: [vec![0.0; n], vec![0.0; n]] }
    }
    pub fn constant(grid: GridSpec, c: f64) -> Self {
        let n = grid.plane_len();
        Self { grid, faces: [vec![c; n], vec![c; n]] }
    }
    pub fn from_faces(grid: GridSpec, bottom: Vec<f64>, top: Vec<f64>) -> Self {
        assert_eq!(bottom.len(), grid.plane_len());
        assert_eq!(top.len(), grid.plane_len());
        Self { grid, faces: [bottom, top] }
    }
    pub fn from_fn(grid: GridSpec, f: impl Fn(Face, f64, f64) -> f64) -> Self {
        let face = |fc: Face| {
            let mut v = Vec::with_capacity(grid.plane_len());
            for i2 in 0..grid.n2() {
                for i1 in 0..grid.n1() {
                    v.push(f(fc, grid.x1(i1), grid.x2(i2)));
                }
            }
            v
        };
        Self { grid, faces: [face(Face::Bottom), face(Face::Top)] }
    }
    pub fn grid(&self) -> GridSpec {
        self.grid
    }
    pub fn face(&self, f: Face) -> &[f64] {
        &self.faces[f as usize]
    }
    pub fn face_mut(&mut self, f: Face) -> &mut [f64] {
        &mut self.faces[f as usize]
    }
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            faces: [
                self.faces[0].iter().map(|&x| f(x)).collect(),
                self.faces[1].iter().map(|&x| f(x)).collect(),
            ],
        }
    }
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let z = |a: &Vec<f64>, b: &Vec<f64>| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect();
        Self { grid: self.grid, faces: [z(&self.faces[0], &other.faces[0]), z(&self.faces[1], &other.faces[1])] }
    }
    pub fn scaled(&self, a: f64) -> Self {
        self.map(|x| a * x)
    }
    pub fn max_abs(&self) -> f64 {
        self.faces.iter().flatten().fold(0.0_f64, |m, &x| m.max(x.abs()))
    }
    pub fn min(&self) -> f64 {
        self.faces.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn max(&self) -> f64 {
        self.faces.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }
    pub fn is_finite(&self) -> bool {
        self.faces.iter().flatten().all(|x| x.is_finite())
    }
}

impl Add<&BoundaryField> for &BoundaryField {
    type Output = BoundaryField;
    fn add(self, rhs: &BoundaryField) -> BoundaryField {
        self.zip_map(rhs, |a, b| a + b)
    }
}
impl Sub<&BoundaryField> for &BoundaryField {
    type Output = BoundaryField;
    fn sub(self, rhs: &BoundaryField) -> BoundaryField {
        self.zip_map(rhs, |a, b| a - b)
    }
}
impl Mul<&BoundaryField> for &BoundaryField {
    type Output = BoundaryField;
    fn mul(self, rhs: &BoundaryField) -> BoundaryField {
        self.zip_map(rhs, |a, b| a * b)
    }
}
