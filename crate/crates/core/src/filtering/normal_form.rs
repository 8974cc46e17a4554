//! Lorentz normal form `M = L1 Sigma L2^T` of a Mueller matrix.
//!
//! The columns of `L1` are eigenvectors of `W_A = M G M^T G`; since
//! `W_A = L1 diag(sigma_k^2) L1^-1`, a Minkowski-orthonormal eigenbasis fixes
//! `L1` up to rotations inside degenerate eigenspaces. The rows of
//! `N = L1^-1 M = Sigma L2^T` are then mutually G-orthogonal, so `L2` is
//! read off row by row, which keeps the pairing between the two sides exact
//! even when eigenvalues are degenerate. When `W_A` is not diagonalisable
//! over a Minkowski frame (complex eigenvalues, a defective eigenspace or a
//! light-like eigenvector) the matrix only reduces to the X-form.

use nalgebra::{Matrix3, Matrix4, Schur, Vector4};
use serde::Serialize;

use super::lorentz::LorentzTransform;
use crate::error::{Error, Result};
use crate::linalg::{max_abs4, minkowski};
use crate::states::MuellerMatrix;

/// Relative imaginary part of an eigenvalue of `W` that routes to the X-form.
pub const COMPLEX_EIG_TOL: f64 = 1e-8;
/// Relative spacing under which eigenvalues are treated as one eigenspace.
const CLUSTER_TOL: f64 = 1e-6;
/// Relative singular value of `W - lambda` accepted as a null direction.
const NULL_TOL: f64 = 1e-6;
/// `|v^T G v|` below which a vector counts as light-like.
const LIGHTLIKE_TOL: f64 = 1e-10;
const SIGMA_OFFDIAG_TOL: f64 = 1e-8;
const SCHUR_EPS: f64 = 1e-13;
const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalFormKind {
    Diagonal,
    XForm,
}

/// Fit of the reduced matrix to
/// `[[a,0,0,b],[0,d,0,0],[0,0,-d,0],[c,0,0,a+c-b]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XFormParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Max-abs deviation of the reduced matrix from the fitted pattern.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    pub kind: NormalFormKind,
    pub l1: LorentzTransform,
    pub l2: LorentzTransform,
    /// `L1^-1 M L2^-T`; diagonal for `Diagonal`, the partially reduced
    /// matrix for `XForm`.
    pub sigma: Matrix4<f64>,
    pub xform_params: Option<XFormParams>,
}

impl NormalForm {
    pub fn reconstruct(&self) -> Matrix4<f64> {
        self.l1.matrix() * self.sigma * self.l2.matrix().transpose()
    }
}

enum Reduction {
    Diagonal(NormalForm),
    NotDiagonalizable,
}

pub fn normal_form(m: &MuellerMatrix) -> Result<NormalForm> {
    let mm = m.matrix();
    let mut rest = *mm;
    rest[(0, 0)] = 0.0;
    if max_abs4(&rest) <= 1e-12 {
        return Err(Error::TrivialNormalForm);
    }
    match diagonal_form(mm)? {
        Reduction::Diagonal(nf) => Ok(nf),
        Reduction::NotDiagonalizable => Ok(x_form(mm)),
    }
}

struct Column {
    v: Vector4<f64>,
    timelike: bool,
    eigenvalue: f64,
}

fn diagonal_form(mm: &Matrix4<f64>) -> Result<Reduction> {
    let g = minkowski();
    let w = mm * g * mm.transpose() * g;
    let scale = max_abs4(&w).max(f64::MIN_POSITIVE);

    let eigs = Schur::try_new(w, SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::Eigen("Schur iteration on M G M^T G did not converge".into()))?
        .complex_eigenvalues();
    if eigs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue of M G M^T G".into()));
    }
    if eigs.iter().any(|z| z.im.abs() > COMPLEX_EIG_TOL * scale) {
        return Ok(Reduction::NotDiagonalizable);
    }
    let mut values: Vec<f64> = eigs.iter().map(|z| z.re).collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for v in values {
        match clusters.last_mut() {
            Some(c) if (c[c.len() - 1] - v).abs() <= CLUSTER_TOL * scale => c.push(v),
            _ => clusters.push(vec![v]),
        }
    }

    let mut columns: Vec<Column> = Vec::with_capacity(4);
    for cluster in &clusters {
        let k = cluster.len();
        let lambda = cluster.iter().sum::<f64>() / k as f64;
        let shifted = w - Matrix4::identity() * lambda;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.ok_or_else(|| Error::Eigen("SVD without right vectors".into()))?;
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].partial_cmp(&svd.singular_values[b]).unwrap());
        if svd.singular_values[order[k - 1]] > NULL_TOL * scale {
            // defective eigenspace
            return Ok(Reduction::NotDiagonalizable);
        }
        let basis: Vec<Vector4<f64>> = order[..k].iter().map(|&i| v_t.row(i).transpose()).collect();
        // Project the coordinate axes onto the eigenspace so that degenerate
        // spaces get a frame aligned with the input axes where possible.
        let mut candidates: Vec<Vector4<f64>> = (0..4)
            .map(|j| basis.iter().map(|b| b * b[j]).sum())
            .collect();
        for _ in 0..k {
            let (best, q) = candidates
                .iter()
                .enumerate()
                .map(|(j, c)| (j, c.dot(&(g * c))))
                .fold((usize::MAX, 0.0_f64), |acc, (j, q)| {
                    if q.abs() > acc.1.abs() * (1.0 + 1e-9) { (j, q) } else { acc }
                });
            if best == usize::MAX || q.abs() < LIGHTLIKE_TOL {
                return Ok(Reduction::NotDiagonalizable);
            }
            let v = candidates[best] / q.abs().sqrt();
            let sign = q.signum();
            for c in candidates.iter_mut() {
                let overlap = v.dot(&(g * *c));
                *c -= v * (overlap * sign);
            }
            columns.push(Column { v, timelike: q > 0.0, eigenvalue: lambda });
        }
    }

    if columns.iter().filter(|c| c.timelike).count() != 1 {
        return Ok(Reduction::NotDiagonalizable);
    }
    let time_pos = columns.iter().position(|c| c.timelike).unwrap();
    let time = columns.remove(time_pos);
    // stable: degenerate eigenvalues keep the axis-aligned order
    columns.sort_by(|a, b| b.eigenvalue.abs().partial_cmp(&a.eigenvalue.abs()).unwrap());

    let mut l1 = Matrix4::zeros();
    let t = if time.v[0] < 0.0 { -time.v } else { time.v };
    l1.set_column(0, &t);
    for (i, c) in columns.iter().enumerate() {
        l1.set_column(i + 1, &canonical_sign(c.v));
    }
    if l1.determinant() < 0.0 {
        let last = -l1.column(3);
        l1.set_column(3, &last);
    }
    let l1 = LorentzTransform::new(l1).map_err(|e| Error::Eigen(format!("L1 assembly: {e}")))?;

    let n = l1.inverse().matrix() * mm;
    let row = |i: usize| -> Vector4<f64> { n.row(i).transpose() };

    let q0 = row(0).dot(&(g * row(0)));
    if q0 <= LIGHTLIKE_TOL * scale {
        return Ok(Reduction::NotDiagonalizable);
    }
    let mut sigma_diag = [0.0_f64; 4];
    let mut l2 = Matrix4::zeros();
    let mut filled = [false; 4];
    sigma_diag[0] = q0.sqrt();
    let mut c0 = row(0) / sigma_diag[0];
    if c0[0] < 0.0 {
        c0 = -c0;
        sigma_diag[0] = -sigma_diag[0];
    }
    l2.set_column(0, &c0);
    filled[0] = true;
    let floor = 1e-7 * sigma_diag[0].abs();
    for i in 1..4 {
        let qi = -row(i).dot(&(g * row(i)));
        if qi > floor * floor {
            let s = qi.sqrt();
            let c = row(i) / s;
            let flipped = canonical_sign(c);
            sigma_diag[i] = if flipped == c { s } else { -s };
            l2.set_column(i, &flipped);
            filled[i] = true;
        }
    }
    complete_spacelike(&mut l2, &mut filled)?;
    if l2.determinant() < 0.0 {
        let last = -l2.column(3);
        l2.set_column(3, &last);
        sigma_diag[3] = -sigma_diag[3];
    }
    let l2 = LorentzTransform::new(l2).map_err(|e| Error::Eigen(format!("L2 assembly: {e}")))?;

    let sigma = l1.inverse().matrix() * mm * l2.inverse().matrix().transpose();
    let mut off = sigma;
    for i in 0..4 {
        off[(i, i)] = 0.0;
    }
    if max_abs4(&off) > SIGMA_OFFDIAG_TOL * sigma_diag[0].abs().max(1.0) || sigma[(0, 0)] <= 0.0 {
        return Ok(Reduction::NotDiagonalizable);
    }
    Ok(Reduction::Diagonal(NormalForm {
        kind: NormalFormKind::Diagonal,
        l1,
        l2,
        sigma,
        xform_params: None,
    }))
}

/// Flip so that the largest-magnitude component is positive.
fn canonical_sign(v: Vector4<f64>) -> Vector4<f64> {
    if v[v.iamax()] < 0.0 { -v } else { v }
}

/// Fills missing space-like columns of a partial Minkowski frame from the
/// coordinate axes.
fn complete_spacelike(frame: &mut Matrix4<f64>, filled: &mut [bool; 4]) -> Result<()> {
    let g = minkowski();
    for slot in 1..4 {
        if filled[slot] {
            continue;
        }
        let mut best: Option<(Vector4<f64>, f64)> = None;
        for axis in 0..4 {
            let mut v = Vector4::zeros();
            v[axis] = 1.0;
            for k in 0..4 {
                if filled[k] {
                    let c: Vector4<f64> = frame.column(k).into_owned();
                    let norm = c.dot(&(g * c));
                    v -= c * (c.dot(&(g * v)) / norm);
                }
            }
            let q = v.dot(&(g * v));
            if q < 0.0 && best.is_none_or(|(_, bq)| q < bq * (1.0 + 1e-9)) {
                best = Some((v, q));
            }
        }
        let (v, q) = best.ok_or_else(|| Error::Eigen("cannot complete Minkowski frame".into()))?;
        if q.abs() < LIGHTLIKE_TOL {
            return Err(Error::Eigen("cannot complete Minkowski frame".into()));
        }
        frame.set_column(slot, &canonical_sign(v / (-q).sqrt()));
        filled[slot] = true;
    }
    Ok(())
}

/// Local rotations that diagonalise the correlation block with the axis
/// carrying the Bloch vectors moved to z, followed by a least-squares fit of
/// the X-form pattern.
fn x_form(mm: &Matrix4<f64>) -> NormalForm {
    let m = mm / mm[(0, 0)];
    let t: Matrix3<f64> = m.fixed_view::<3, 3>(1, 1).into_owned();
    let r = m.fixed_view::<3, 1>(1, 0).into_owned();
    let s = m.fixed_view::<1, 3>(0, 1).transpose();
    let svd = t.svd(true, true);
    let u = svd.u.expect("u requested");
    let v = svd.v_t.expect("v_t requested").transpose();

    let z_axis = (0..3)
        .max_by(|&a, &b| {
            let wa = u.column(a).dot(&r).abs() + v.column(a).dot(&s).abs();
            let wb = u.column(b).dot(&r).abs() + v.column(b).dot(&s).abs();
            wa.partial_cmp(&wb).unwrap()
        })
        .unwrap();
    let mut order: Vec<usize> = (0..3).filter(|&k| k != z_axis).collect();
    order.push(z_axis);

    let mut ua = Matrix3::zeros();
    let mut vb = Matrix3::zeros();
    for (slot, &k) in order.iter().enumerate() {
        ua.set_column(slot, &u.column(k));
        vb.set_column(slot, &v.column(k));
    }
    if ua.determinant() < 0.0 {
        let c = -ua.column(2);
        ua.set_column(2, &c);
    }
    // Bob's x and y axes signed so the reduced block reads (d, -d) with d >= 0.
    for (slot, want_positive) in [(0usize, true), (1usize, false)] {
        let val = ua.column(slot).dot(&(t * vb.column(slot)));
        if (val >= 0.0) != want_positive {
            let c = -vb.column(slot);
            vb.set_column(slot, &c);
        }
    }
    if vb.determinant() < 0.0 {
        let c = -vb.column(2);
        vb.set_column(2, &c);
    }

    let mut ra = Matrix4::identity();
    let mut rb = Matrix4::identity();
    ra.fixed_view_mut::<3, 3>(1, 1).copy_from(&ua);
    rb.fixed_view_mut::<3, 3>(1, 1).copy_from(&vb);
    let k = ra.transpose() * mm * rb;

    let d = 0.5 * (k[(1, 1)] - k[(2, 2)]);
    let w = nalgebra::Vector3::new(1.0, -1.0, 1.0);
    let x0 = nalgebra::Vector3::new(k[(0, 0)], k[(0, 3)], k[(3, 0)]);
    let x = x0 + w * ((k[(3, 3)] - w.dot(&x0)) / 4.0);
    let (a, b, c) = (x[0], x[1], x[2]);
    #[rustfmt::skip]
    let pattern = Matrix4::new(
        a, 0.0, 0.0, b,
        0.0, d, 0.0, 0.0,
        0.0, 0.0, -d, 0.0,
        c, 0.0, 0.0, a + c - b,
    );
    let residual = max_abs4(&(k - pattern));
    NormalForm {
        kind: NormalFormKind::XForm,
        l1: LorentzTransform::new_unchecked(ra),
        l2: LorentzTransform::new_unchecked(rb),
        sigma: k,
        xform_params: Some(XFormParams { a, b, c, d, residual }),
    }
}
