//! Discretization of the slab `T² × (0,1)`.
//!
//! Horizontal directions have period 1 and are sampled at `x = i/n`; all
//! horizontal calculus is spectral. The vertical direction is sampled at
//! `n3 + 1` uniform levels including both faces and differentiated with
//! finite differences of selectable accuracy.

mod fd;
mod field;
mod norms;
pub(crate) mod spectral;

pub use fd::{second_vertical_derivative, vertical_derivative, vertical_derivative_order};
pub use field::{BoundaryField, Face, ScalarField, TensorField, VectorField};
pub use norms::{
    boundary_norm, boundary_norm_sq, integral, tensor_volume_norm_sq, vector_boundary_norm_sq,
    vector_volume_norm_sq, volume_norm, volume_norm_sq, MAX_VOLUME_INDEX,
};
pub use spectral::{
    dealias, horizontal_gradient, inverse_surface_laplacian, surface_laplacian,
    tangential_derivative, tangential_derivative_boundary, Spectrum,
};

use crate::error::{Error, Result};

/// Accuracy order of the vertical finite-difference stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FdOrder {
    #[default]
    Second,
    Fourth,
}

impl FdOrder {
    pub fn as_usize(self) -> usize {
        match self {
            FdOrder::Second => 2,
            FdOrder::Fourth => 4,
        }
    }

    pub fn from_usize(p: usize) -> Option<Self> {
        match p {
            2 => Some(FdOrder::Second),
            4 => Some(FdOrder::Fourth),
            _ => None,
        }
    }
}

/// Node counts of the slab grid. `n3` counts vertical intervals, so a field
/// has `n3 + 1` levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    n1: usize,
    n2: usize,
    n3: usize,
    order: FdOrder,
}

impl GridSpec {
    pub fn new(n1: usize, n2: usize, n3: usize) -> Result<Self> {
        Self::with_order(n1, n2, n3, FdOrder::Second)
    }

    pub fn with_order(n1: usize, n2: usize, n3: usize, order: FdOrder) -> Result<Self> {
        for (name, n) in [("n1", n1), ("n2", n2)] {
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!("{name} = {n} must be even and >= 8")));
            }
        }
        if n3 < 8 {
            return Err(Error::InvalidGrid(format!("n3 = {n3} must be >= 8")));
        }
        if n1.max(n2).max(n3) > 4096 {
            return Err(Error::InvalidGrid("dimension above 4096".into()));
        }
        Ok(Self { n1, n2, n3, order })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }
    pub fn n2(&self) -> usize {
        self.n2
    }
    pub fn n3(&self) -> usize {
        self.n3
    }
    pub fn order(&self) -> FdOrder {
        self.order
    }
    pub fn levels(&self) -> usize {
        self.n3 + 1
    }
    /// Points per horizontal plane.
    pub fn plane_len(&self) -> usize {
        self.n1 * self.n2
    }
    pub fn len(&self) -> usize {
        self.plane_len() * self.levels()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn h1(&self) -> f64 {
        1.0 / self.n1 as f64
    }
    pub fn h2(&self) -> f64 {
        1.0 / self.n2 as f64
    }
    pub fn h3(&self) -> f64 {
        1.0 / self.n3 as f64
    }
    /// Smallest spacing over all three directions.
    pub fn min_spacing(&self) -> f64 {
        self.h1().min(self.h2()).min(self.h3())
    }
    #[inline]
    pub fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        i1 + self.n1 * (i2 + self.n2 * i3)
    }
    pub fn x1(&self, i1: usize) -> f64 {
        i1 as f64 / self.n1 as f64
    }
    pub fn x2(&self, i2: usize) -> f64 {
        i2 as f64 / self.n2 as f64
    }
    pub fn x3(&self, i3: usize) -> f64 {
        i3 as f64 / self.n3 as f64
    }

    /// Same horizontal resolution and order, different vertical resolution.
    pub fn with_n3(&self, n3: usize) -> Result<Self> {
        Self::with_order(self.n1, self.n2, n3, self.order)
    }
}
