//! Operations on products of zero cones, nonnegative orthants and
//! second-order cones: Nesterov–Todd scaling, Jordan algebra and step lengths.

use crate::scalar::{dot, Real};

use super::lower::Cone;

#[derive(Debug, Clone)]
pub(crate) enum ConeScaling<T> {
    Zero,
    NonNeg {
        w: Vec<T>,
    },
    /// `W = η·W̄` with `W̄ = [[w0, w1ᵀ], [w1, I + w1 w1ᵀ/(1 + w0)]]`.
    Soc {
        eta: T,
        wbar: Vec<T>,
    },
}

/// Iterates over `(cone, start offset)`.
pub(crate) fn offsets(cones: &[Cone]) -> impl Iterator<Item = (Cone, usize)> + '_ {
    cones.iter().scan(0usize, |off, &c| {
        let start = *off;
        *off += c.dim();
        Some((c, start))
    })
}

fn soc_residual<T: Real>(v: &[T]) -> T {
    v[0] * v[0] - v[1..].iter().fold(T::zero(), |a, &x| a + x * x)
}

/// Smallest "eigenvalue" per cone, minimized over cones (zero cones ignored).
pub(crate) fn min_eig<T: Real>(cones: &[Cone], v: &[T]) -> T {
    let mut out = T::infinity();
    for (c, o) in offsets(cones) {
        let blk = &v[o..o + c.dim()];
        match c {
            Cone::Zero(_) => {}
            Cone::NonNeg(_) => {
                for &x in blk {
                    out = out.min(x);
                }
            }
            Cone::Soc(_) => {
                let nrm = blk[1..].iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
                out = out.min(blk[0] - nrm);
            }
        }
    }
    out
}

/// Adds `t·e` on every non-zero cone.
pub(crate) fn add_identity<T: Real>(cones: &[Cone], v: &mut [T], t: T) {
    for (c, o) in offsets(cones) {
        match c {
            Cone::Zero(_) => {}
            Cone::NonNeg(k) => v[o..o + k].iter_mut().for_each(|x| *x += t),
            Cone::Soc(_) => v[o] += t,
        }
    }
}

/// Moves `v` into the interior of the cone, or sets it to zero on zero cones.
pub(crate) fn shift_to_interior<T: Real>(cones: &[Cone], v: &mut [T]) {
    for (c, o) in offsets(cones) {
        if let Cone::Zero(k) = c {
            v[o..o + k].iter_mut().for_each(|x| *x = T::zero());
        }
    }
    let alpha = min_eig(cones, v);
    if alpha.is_finite() && alpha < T::one() {
        add_identity(cones, v, T::one() - alpha);
    }
}

/// Computes the NT scaling at `(s, z)` and `λ = W z`.
pub(crate) fn nt_scaling<T: Real>(
    cones: &[Cone],
    s: &[T],
    z: &[T],
) -> (Vec<ConeScaling<T>>, Vec<T>) {
    let mut scal = Vec::with_capacity(cones.len());
    let mut lambda = vec![T::zero(); s.len()];
    for (c, o) in offsets(cones) {
        let k = c.dim();
        let (sb, zb) = (&s[o..o + k], &z[o..o + k]);
        match c {
            Cone::Zero(_) => scal.push(ConeScaling::Zero),
            Cone::NonNeg(_) => {
                let w: Vec<T> = sb.iter().zip(zb).map(|(&a, &b)| (a / b).sqrt()).collect();
                for i in 0..k {
                    lambda[o + i] = (sb[i] * zb[i]).sqrt();
                }
                scal.push(ConeScaling::NonNeg { w });
            }
            Cone::Soc(_) => {
                let sres = soc_residual(sb).max(T::min_positive_value()).sqrt();
                let zres = soc_residual(zb).max(T::min_positive_value()).sqrt();
                let sbar: Vec<T> = sb.iter().map(|&x| x / sres).collect();
                let zbar: Vec<T> = zb.iter().map(|&x| x / zres).collect();
                let gamma = ((T::one() + dot(&sbar, &zbar)) / T::of(2.0)).sqrt();
                let mut wbar: Vec<T> = (0..k)
                    .map(|i| {
                        let jz = if i == 0 { zbar[0] } else { -zbar[i] };
                        (sbar[i] + jz) / (T::of(2.0) * gamma)
                    })
                    .collect();
                let w1sq = wbar[1..].iter().fold(T::zero(), |a, &x| a + x * x);
                wbar[0] = (T::one() + w1sq).sqrt();
                let eta = (sres / zres).sqrt();
                let sc = ConeScaling::Soc { eta, wbar };
                let mut lz = vec![T::zero(); k];
                mul_w_block(&sc, zb, &mut lz);
                lambda[o..o + k].copy_from_slice(&lz);
                scal.push(sc);
            }
        }
    }
    (scal, lambda)
}

fn wbar_mul<T: Real>(wbar: &[T], v: &[T], out: &mut [T], inverse: bool) {
    let w0 = wbar[0];
    let w1 = &wbar[1..];
    let (v0, v1) = (v[0], &v[1..]);
    let w1v1 = dot(w1, v1);
    if !inverse {
        out[0] = w0 * v0 + w1v1;
        let f = v0 + w1v1 / (T::one() + w0);
        for i in 0..w1.len() {
            out[i + 1] = v1[i] + f * w1[i];
        }
    } else {
        out[0] = w0 * v0 - w1v1;
        let f = -v0 + w1v1 / (T::one() + w0);
        for i in 0..w1.len() {
            out[i + 1] = v1[i] + f * w1[i];
        }
    }
}

fn mul_w_block<T: Real>(sc: &ConeScaling<T>, v: &[T], out: &mut [T]) {
    match sc {
        ConeScaling::Zero => out.iter_mut().for_each(|x| *x = T::zero()),
        ConeScaling::NonNeg { w } => {
            for i in 0..w.len() {
                out[i] = w[i] * v[i];
            }
        }
        ConeScaling::Soc { eta, wbar } => {
            wbar_mul(wbar, v, out, false);
            out.iter_mut().for_each(|x| *x *= *eta);
        }
    }
}

fn mul_winv_block<T: Real>(sc: &ConeScaling<T>, v: &[T], out: &mut [T]) {
    match sc {
        ConeScaling::Zero => out.iter_mut().for_each(|x| *x = T::zero()),
        ConeScaling::NonNeg { w } => {
            for i in 0..w.len() {
                out[i] = v[i] / w[i];
            }
        }
        ConeScaling::Soc { eta, wbar } => {
            wbar_mul(wbar, v, out, true);
            out.iter_mut().for_each(|x| *x /= *eta);
        }
    }
}

/// `W v` (zero on zero cones).
pub(crate) fn mul_w<T: Real>(cones: &[Cone], scal: &[ConeScaling<T>], v: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); v.len()];
    for ((c, o), sc) in offsets(cones).zip(scal) {
        let k = c.dim();
        mul_w_block(sc, &v[o..o + k], &mut out[o..o + k]);
    }
    out
}

/// `W⁻¹ v` (zero on zero cones).
pub(crate) fn mul_winv<T: Real>(cones: &[Cone], scal: &[ConeScaling<T>], v: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); v.len()];
    for ((c, o), sc) in offsets(cones).zip(scal) {
        let k = c.dim();
        mul_winv_block(sc, &v[o..o + k], &mut out[o..o + k]);
    }
    out
}

/// Upper-triangular entries of the dense block `WᵀW` of one cone, row-major by column.
/// For an orthant this is the diagonal `w²`; for a second-order cone it is
/// `η²(2 w̄ w̄ᵀ - J)`.
pub(crate) fn h_block_upper<T: Real>(sc: &ConeScaling<T>, k: usize, out: &mut Vec<T>) {
    out.clear();
    match sc {
        ConeScaling::Zero => out.extend(std::iter::repeat_n(T::zero(), k)),
        ConeScaling::NonNeg { w } => out.extend(w.iter().map(|&x| x * x)),
        ConeScaling::Soc { eta, wbar } => {
            let e2 = *eta * *eta;
            for col in 0..k {
                for row in 0..=col {
                    let mut v = T::of(2.0) * wbar[row] * wbar[col];
                    if row == col {
                        v += if row == 0 { -T::one() } else { T::one() };
                    }
                    out.push(e2 * v);
                }
            }
        }
    }
}

/// Jordan product `x ∘ y`.
pub(crate) fn jordan_prod<T: Real>(cones: &[Cone], x: &[T], y: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); x.len()];
    for (c, o) in offsets(cones) {
        let k = c.dim();
        match c {
            Cone::Zero(_) => {}
            Cone::NonNeg(_) => {
                for i in o..o + k {
                    out[i] = x[i] * y[i];
                }
            }
            Cone::Soc(_) => {
                let (xb, yb) = (&x[o..o + k], &y[o..o + k]);
                out[o] = dot(xb, yb);
                for i in 1..k {
                    out[o + i] = xb[0] * yb[i] + yb[0] * xb[i];
                }
            }
        }
    }
    out
}

/// Solves `λ ∘ x = d` for `x`.
pub(crate) fn jordan_div<T: Real>(cones: &[Cone], lambda: &[T], d: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); d.len()];
    for (c, o) in offsets(cones) {
        let k = c.dim();
        match c {
            Cone::Zero(_) => {}
            Cone::NonNeg(_) => {
                for i in o..o + k {
                    out[i] = d[i] / lambda[i];
                }
            }
            Cone::Soc(_) => {
                let (l, db) = (&lambda[o..o + k], &d[o..o + k]);
                let det = soc_residual(l);
                let l1d1 = dot(&l[1..], &db[1..]);
                let x0 = (l[0] * db[0] - l1d1) / det;
                out[o] = x0;
                for i in 1..k {
                    out[o + i] = (db[i] - x0 * l[i]) / l[0];
                }
            }
        }
    }
    out
}

/// Largest `α ≤ cap` keeping `x + α·dx` in the cone.
pub(crate) fn step_length<T: Real>(cones: &[Cone], x: &[T], dx: &[T], cap: T) -> T {
    let mut alpha = cap;
    for (c, o) in offsets(cones) {
        let k = c.dim();
        match c {
            Cone::Zero(_) => {}
            Cone::NonNeg(_) => {
                for i in o..o + k {
                    if dx[i] < T::zero() {
                        alpha = alpha.min(-x[i] / dx[i]);
                    }
                }
            }
            Cone::Soc(_) => {
                alpha = alpha.min(soc_step(&x[o..o + k], &dx[o..o + k], cap));
            }
        }
    }
    alpha.max(T::zero())
}

fn soc_step<T: Real>(x: &[T], d: &[T], cap: T) -> T {
    let a = soc_residual(d);
    let b = x[0] * d[0] - dot(&x[1..], &d[1..]);
    let c = soc_residual(x).max(T::zero());
    let mut alpha = cap;
    if d[0] < T::zero() {
        alpha = alpha.min(-x[0] / d[0]);
    }
    let scale = T::one().max(a.abs()).max(b.abs());
    if a.abs() <= T::epsilon() * scale {
        if b < T::zero() {
            alpha = alpha.min(-c / (T::of(2.0) * b));
        }
        return alpha;
    }
    let disc = b * b - a * c;
    if disc < T::zero() {
        return alpha;
    }
    let sq = disc.sqrt();
    let qv = -(b + b.signum() * sq);
    let mut roots = [T::infinity(); 2];
    if qv != T::zero() {
        roots[0] = qv / a;
        roots[1] = c / qv;
    } else {
        roots[0] = -b / a;
    }
    for r in roots {
        if r > T::zero() && r.is_finite() {
            alpha = alpha.min(r);
        }
    }
    alpha
}
