use super::real::Mat;

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix,
/// or `None` when a pivot is not strictly positive.
pub fn cholesky(a: &Mat) -> Option<Mat> {
    let n = a.rows();
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` given the Cholesky factor `L`.
pub fn cholesky_solve(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[(i, k)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            y[i] -= l[(k, i)] * y[k];
        }
        y[i] /= l[(i, i)];
    }
    y
}

/// Inverse of a symmetric positive definite matrix from its Cholesky factor.
pub fn cholesky_inverse(l: &Mat) -> Mat {
    let n = l.rows();
    let mut inv = Mat::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[j] = 1.0;
        let col = cholesky_solve(l, &e);
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    inv.symmetric_part()
}

/// `L⁻¹ M L⁻ᵀ` for lower-triangular `L`.
pub fn congruence_inverse(l: &Mat, m: &Mat) -> Mat {
    let n = l.rows();
    // Y = L⁻¹ M (forward substitution column by column)
    let mut y = m.clone();
    for j in 0..n {
        for i in 0..n {
            let mut s = y[(i, j)];
            for k in 0..i {
                s -= l[(i, k)] * y[(k, j)];
            }
            y[(i, j)] = s / l[(i, i)];
        }
    }
    // Z = Y L⁻ᵀ, i.e. Zᵀ = L⁻¹ Yᵀ
    let mut z = y.transpose();
    for j in 0..n {
        for i in 0..n {
            let mut s = z[(i, j)];
            for k in 0..i {
                s -= l[(i, k)] * z[(k, j)];
            }
            z[(i, j)] = s / l[(i, i)];
        }
    }
    z.transpose().symmetric_part()
}

/// Singular values (descending) by one-sided Jacobi (Hestenes) orthogonalisation.
///
/// Small singular values are computed to high relative accuracy, which the
/// rank decisions downstream rely on.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return singular_values(&a.transpose());
    }
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = c * xp - s * xq;
                    *y = s * xp + c * xq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}
