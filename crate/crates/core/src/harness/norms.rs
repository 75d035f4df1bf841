//! Errors of the projected discrete solution `Π∇u_h` against an exact
//! solution.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::mesh::Point;
use crate::quadrature::polygon_rule;
use crate::vem_local::LocalOperators;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// `|u - Π∇u_h|_{1,h}`, the broken H¹ seminorm.
    pub h1_broken: f64,
    pub l2: f64,
}

/// Integrate `|∇(u - Π∇u_h)|²` and `(u - Π∇u_h)²` cell by cell with rules of
/// degree `2p + 4`.
pub fn error_norms(
    locals: &[LocalOperators],
    cell_dofs: &[DVector<f64>],
    u: &(dyn Fn(&Point) -> f64 + Sync),
    grad_u: &(dyn Fn(&Point) -> [f64; 2] + Sync),
) -> Result<ErrorNorms> {
    let parts: Vec<(f64, f64)> = locals
        .par_iter()
        .zip(cell_dofs)
        .map(|(ops, dofs)| {
            let coeffs = ops.project(dofs);
            let rule = polygon_rule(&ops.polygon, 2 * ops.p() + 4)?;
            let (mut h1, mut l2) = (0.0, 0.0);
            for (x, &w) in rule.points.iter().zip(&rule.weights) {
                let g = ops.basis.combine_gradient(coeffs.as_slice(), x);
                let gu = grad_u(x);
                h1 += w * ((gu[0] - g[0]).powi(2) + (gu[1] - g[1]).powi(2));
                l2 += w * (u(x) - ops.basis.combine(coeffs.as_slice(), x)).powi(2);
            }
            Ok((h1, l2))
        })
        .collect::<Result<_>>()?;
    let (h1, l2) = parts.iter().fold((0.0, 0.0), |(a, b), (h, l)| (a + h, b + l));
    Ok(ErrorNorms { h1_broken: h1.max(0.0).sqrt(), l2: l2.max(0.0).sqrt() })
}
