//! Gram-Schmidt re-basis of the internal dofs against the local discrete
//! bilinear form.
//!
//! The internal basis functions are virtual, so orthogonalization only uses
//! the entries of the internal block `A_II` of the local stiffness. Row `l` of
//! the unit lower-triangular `Λ` holds the coefficients of the new function
//! `φ̃_l = Σ_k λ_{l,k} φ_k`:
//!
//! ```text
//! λ_{l,l} = 1
//! λ_{l,k} = -Σ_{j=k}^{l-1} λ_{j,k} â(φ_l, φ̃_j) / â(φ̃_j, φ̃_j)
//! â(φ̃_j, φ̃_j) = Λ(j,:) A_II Λ(j,:)ᵀ
//! â(φ_l, φ̃_j) = A_II(l,:) Λ(j,:)ᵀ
//! ```
//!
//! The recursion is classical Gram-Schmidt and loses orthogonality as the
//! internal block becomes ill-conditioned at high degree.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GsTransform {
    pub boundary: usize,
    pub internal: usize,
    /// Unnormalized unit lower-triangular coefficients.
    pub lambda: DMatrix<f64>,
    /// `â(φ̃_j, φ̃_j)` for every internal function.
    pub pivots: DVector<f64>,
    /// `|â(φ̃_j, φ̃_j)|^{-1/2}`.
    pub d_half_inv: DVector<f64>,
    /// `[[I, 0], [0, diag(d_half_inv) Λ]]`, size `G_d × G_d`.
    pub lambda_full: DMatrix<f64>,
}

const PIVOT_FLOOR: f64 = 1e-14;

pub fn virtual_gram_schmidt(a_hat: &DMatrix<f64>, boundary: usize, internal: usize) -> Result<GsTransform> {
    let nd = boundary + internal;
    if a_hat.nrows() != nd || a_hat.ncols() != nd {
        return Err(Error::InvalidArgument(format!(
            "stiffness is {}x{}, expected {nd}x{nd}",
            a_hat.nrows(),
            a_hat.ncols()
        )));
    }
    let a_ii = a_hat.view((boundary, boundary), (internal, internal));
    let max_diag = (0..internal).map(|i| a_ii[(i, i)].abs()).fold(0.0, f64::max);
    let mut lambda = DMatrix::<f64>::zeros(internal, internal);
    let mut pivots = DVector::<f64>::zeros(internal);

    for l in 0..internal {
        lambda[(l, l)] = 1.0;
        // numerators â(φ_l, φ̃_j) for j < l
        let ratios: Vec<f64> = (0..l)
            .map(|j| {
                let num: f64 = (0..=j).map(|i| a_ii[(l, i)] * lambda[(j, i)]).sum();
                num / pivots[j]
            })
            .collect();
        for k in 0..l {
            let s: f64 = (k..l).map(|j| lambda[(j, k)] * ratios[j]).sum();
            lambda[(l, k)] = -s;
        }
        let mut den = 0.0;
        for i in 0..=l {
            for h in 0..=l {
                den += lambda[(l, i)] * a_ii[(i, h)] * lambda[(l, h)];
            }
        }
        if den.abs() <= PIVOT_FLOOR * max_diag {
            return Err(Error::GramSchmidtPivot { index: l, value: den });
        }
        pivots[l] = den;
    }

    let d_half_inv = pivots.map(|d| 1.0 / d.abs().sqrt());
    let mut lambda_full = DMatrix::identity(nd, nd);
    for l in 0..internal {
        for k in 0..=l {
            lambda_full[(boundary + l, boundary + k)] = d_half_inv[l] * lambda[(l, k)];
        }
    }
    Ok(GsTransform { boundary, internal, lambda, pivots, d_half_inv, lambda_full })
}

impl GsTransform {
    /// Identity transform for cells without internal dofs.
    pub fn identity(boundary: usize) -> Self {
        GsTransform {
            boundary,
            internal: 0,
            lambda: DMatrix::zeros(0, 0),
            pivots: DVector::zeros(0),
            d_half_inv: DVector::zeros(0),
            lambda_full: DMatrix::identity(boundary, boundary),
        }
    }

    fn internal_block(&self) -> DMatrix<f64> {
        let (b, i) = (self.boundary, self.internal);
        self.lambda_full.view((b, b), (i, i)).into_owned()
    }
}

/// `Λ̃̃ A Λ̃̃ᵀ`, computed blockwise so that `A_BB` is copied unchanged.
pub fn transform_stiffness(a_hat: &DMatrix<f64>, t: &GsTransform) -> DMatrix<f64> {
    if t.internal == 0 {
        return a_hat.clone();
    }
    let (b, i) = (t.boundary, t.internal);
    let m = t.internal_block();
    let mut out = a_hat.clone();
    let a_bi = a_hat.view((0, b), (b, i)) * m.transpose();
    let a_ii = &m * a_hat.view((b, b), (i, i)) * m.transpose();
    out.view_mut((0, b), (b, i)).copy_from(&a_bi);
    out.view_mut((b, 0), (i, b)).copy_from(&a_bi.transpose());
    let a_ii = (&a_ii + a_ii.transpose()) * 0.5;
    out.view_mut((b, b), (i, i)).copy_from(&a_ii);
    out
}

/// Load vector in the new basis, `Λ̃̃ f`.
pub fn transform_load(f_local: &DVector<f64>, t: &GsTransform) -> DVector<f64> {
    if t.internal == 0 {
        return f_local.clone();
    }
    let (b, i) = (t.boundary, t.internal);
    let mut out = f_local.clone();
    let fi = t.internal_block() * f_local.rows(b, i);
    out.rows_mut(b, i).copy_from(&fi);
    out
}

/// Original-basis dof values `Λ̃̃ᵀ c` from new-basis coefficients `c`.
pub fn untransform_solution(coeffs: &DVector<f64>, t: &GsTransform) -> DVector<f64> {
    if t.internal == 0 {
        return coeffs.clone();
    }
    let (b, i) = (t.boundary, t.internal);
    let mut out = coeffs.clone();
    let ci = t.internal_block().transpose() * coeffs.rows(b, i);
    out.rows_mut(b, i).copy_from(&ci);
    out
}

/// Inverse of [`untransform_solution`]: new-basis coefficients of a dof vector.
pub fn transform_solution(dofs: &DVector<f64>, t: &GsTransform) -> DVector<f64> {
    if t.internal == 0 {
        return dofs.clone();
    }
    let (b, i) = (t.boundary, t.internal);
    let mut out = dofs.clone();
    let upper = t.internal_block().transpose();
    let ci = upper
        .solve_upper_triangular(&dofs.rows(b, i).into_owned())
        .expect("gram-schmidt transform is triangular with nonzero diagonal");
    out.rows_mut(b, i).copy_from(&ci);
    out
}
