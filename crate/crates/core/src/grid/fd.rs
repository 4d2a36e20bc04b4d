//! Vertical finite differences on the uniform levels `x3 = k/n3`.
//!
//! A first derivative of accuracy `p` uses `p + 1` nodes; a second
//! derivative uses `p + 1` nodes when centered and `p + 2` when the window
//! must be shifted against a face.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use super::{FdOrder, ScalarField};

/// Weights for derivatives `0..=m` at `x0` on nodes `xs` (Fornberg's recursion).
pub(crate) fn fornberg(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[derive(Debug)]
pub(crate) struct Stencil {
    pub start: usize,
    pub weights: Vec<f64>,
}

type Key = (usize, usize, usize);

thread_local! {
    static CACHE: RefCell<HashMap<Key, Rc<Vec<Stencil>>>> = RefCell::new(HashMap::new());
}

/// One stencil per level, weights already divided by `h3^deriv`.
pub(crate) fn stencils(n3: usize, order: FdOrder, deriv: usize) -> Rc<Vec<Stencil>> {
    assert!(deriv == 1 || deriv == 2, "vertical derivative order must be 1 or 2");
    let p = order.as_usize();
    CACHE.with(|c| {
        c.borrow_mut()
            .entry((n3, p, deriv))
            .or_insert_with(|| Rc::new(build(n3, p, deriv)))
            .clone()
    })
}

fn build(n3: usize, p: usize, deriv: usize) -> Vec<Stencil> {
    let half = p / 2;
    (0..=n3)
        .map(|i| {
            let centered = i >= half && i + half <= n3;
            let width = if centered || deriv == 1 { p + 1 } else { p + 2 };
            let start = if centered { i - half } else { i.saturating_sub(half).min(n3 + 1 - width) };
            // Work in units of h3 so the weights are O(1), then rescale.
            let xs: Vec<f64> = (start..start + width).map(|k| k as f64).collect();
            let w = fornberg(i as f64, &xs, deriv);
            let scale = (n3 as f64).powi(deriv as i32);
            Stencil { start, weights: w[deriv].iter().map(|x| x * scale).collect() }
        })
        .collect()
}

/// `∂₃^deriv f` at the grid's configured accuracy.
pub fn vertical_derivative(f: &ScalarField, deriv: usize) -> ScalarField {
    vertical_derivative_order(f, deriv, f.grid().order())
}

pub fn second_vertical_derivative(f: &ScalarField) -> ScalarField {
    vertical_derivative(f, 2)
}

/// `∂₃^deriv f` with an explicit accuracy order.
pub fn vertical_derivative_order(f: &ScalarField, deriv: usize, order: FdOrder) -> ScalarField {
    let g = f.grid();
    let st = stencils(g.n3(), order, deriv);
    let mut out = ScalarField::zeros(g);
    for (i3, s) in st.iter().enumerate() {
        let dst = out.level_mut(i3);
        for (k, &w) in s.weights.iter().enumerate() {
            let src = f.level(s.start + k);
            for (d, &x) in dst.iter_mut().zip(src) {
                *d += w * x;
            }
        }
    }
    out
}
