//! Homogeneous self-dual interior-point method with Mehrotra predictor–corrector
//! steps for `min qᵀx s.t. Ax + s = b, s ∈ K`.

use crate::error::{Error, Result};
use crate::scalar::{dot, norm_inf, Real};

use super::cones::{self, offsets, ConeScaling};
use super::ldl::{sym_upper_mul, LdlSolver};
use super::lower::{Cone, RawSolution, StandardForm};
use super::sparse::CscMatrix;
use super::{SolveStatus, SolverSettings};

const STEP_FRACTION: f64 = 0.99;
const STATIC_REG: f64 = 1e-8;
const RUIZ_PASSES: usize = 15;
/// Factor by which the termination tolerance may be relaxed when the method
/// stalls or runs out of iterations and falls back to its best iterate.
const REDUCED_ACCURACY: f64 = 100.0;

struct Equilibration<T> {
    d: Vec<T>,
    e: Vec<T>,
    c: T,
}

fn equilibrate<T: Real>(
    a: &mut CscMatrix<T>,
    q: &mut [T],
    b: &mut [T],
    cones: &[Cone],
    enabled: bool,
) -> Equilibration<T> {
    let (n, m) = (a.ncols, a.nrows);
    let mut d = vec![T::one(); n];
    let mut e = vec![T::one(); m];
    let lo = T::of(1e-4);
    let hi = T::of(1e4);
    let clamp = |v: T| {
        if v == T::zero() {
            T::one()
        } else {
            (T::one() / v.sqrt()).max(lo).min(hi)
        }
    };
    if enabled {
        for _ in 0..RUIZ_PASSES {
            let dc: Vec<T> = a.col_inf_norms().into_iter().map(clamp).collect();
            let mut ec: Vec<T> = a.row_inf_norms().into_iter().map(clamp).collect();
            for (c, o) in offsets(cones) {
                if let Cone::Soc(k) = c {
                    let mean = ec[o..o + k].iter().copied().sum::<T>() / T::of_usize(k);
                    ec[o..o + k].iter_mut().for_each(|x| *x = mean);
                }
            }
            a.scale(&ec, &dc);
            for i in 0..n {
                d[i] *= dc[i];
            }
            for i in 0..m {
                e[i] *= ec[i];
            }
        }
    }
    for i in 0..n {
        q[i] *= d[i];
    }
    for i in 0..m {
        b[i] *= e[i];
    }
    let mut c = T::one();
    if enabled {
        let qn = norm_inf(q);
        if qn > T::zero() {
            c = (T::one() / qn).max(lo).min(hi);
        }
        q.iter_mut().for_each(|v| *v *= c);
    }
    Equilibration { d, e, c }
}

/// Positions of the mutable entries inside the upper-triangular KKT matrix.
struct KktLayout {
    x_diag: Vec<usize>,
    /// Per cone, the slots of its upper-triangular block in the order produced
    /// by [`cones::h_block_upper`].
    z_blocks: Vec<Vec<usize>>,
    z_diag: Vec<usize>,
}

fn build_kkt<T: Real>(a: &CscMatrix<T>, cones: &[Cone]) -> (CscMatrix<T>, KktLayout, Vec<i8>) {
    let (n, m) = (a.ncols, a.nrows);
    let mut row_ptr = vec![0usize; m + 1];
    for &r in &a.rowind {
        row_ptr[r + 1] += 1;
    }
    for i in 0..m {
        row_ptr[i + 1] += row_ptr[i];
    }
    let mut next = row_ptr.clone();
    let mut row_cols = vec![(0usize, T::zero()); a.nnz()];
    for c in 0..n {
        for p in a.colptr[c]..a.colptr[c + 1] {
            let r = a.rowind[p];
            row_cols[next[r]] = (c, a.values[p]);
            next[r] += 1;
        }
    }
    let dim = n + m;
    let mut colptr = Vec::with_capacity(dim + 1);
    let mut rowind = Vec::new();
    let mut values = Vec::new();
    colptr.push(0);
    let mut x_diag = Vec::with_capacity(n);
    for j in 0..n {
        x_diag.push(rowind.len());
        rowind.push(j);
        values.push(T::zero());
        colptr.push(rowind.len());
    }
    let mut block_of_row = vec![(0usize, 0usize, Cone::Zero(0)); m];
    for (ci, (c, o)) in offsets(cones).enumerate() {
        for i in o..o + c.dim() {
            block_of_row[i] = (ci, o, c);
        }
    }
    let mut z_blocks: Vec<Vec<usize>> = cones.iter().map(|_| Vec::new()).collect();
    let mut z_diag = vec![0usize; m];
    for i in 0..m {
        for &(c, v) in &row_cols[row_ptr[i]..row_ptr[i + 1]] {
            rowind.push(c);
            values.push(v);
        }
        let (ci, o, cone) = block_of_row[i];
        match cone {
            Cone::Soc(_) => {
                for r in o..=i {
                    z_blocks[ci].push(rowind.len());
                    if r == i {
                        z_diag[i] = rowind.len();
                    }
                    rowind.push(n + r);
                    values.push(T::zero());
                }
            }
            _ => {
                z_blocks[ci].push(rowind.len());
                z_diag[i] = rowind.len();
                rowind.push(n + i);
                values.push(T::zero());
            }
        }
        colptr.push(rowind.len());
    }
    let k = CscMatrix {
        nrows: dim,
        ncols: dim,
        colptr,
        rowind,
        values,
    };
    let mut signs = vec![1i8; n];
    signs.extend(std::iter::repeat_n(-1i8, m));
    (
        k,
        KktLayout {
            x_diag,
            z_blocks,
            z_diag,
        },
        signs,
    )
}

struct KktSystem<T> {
    k_true: CscMatrix<T>,
    k_reg: CscMatrix<T>,
    layout: KktLayout,
    ldl: LdlSolver<T>,
    n: usize,
    reg: T,
}

impl<T: Real> KktSystem<T> {
    fn new(a: &CscMatrix<T>, cones: &[Cone]) -> Result<Self> {
        let (k, layout, signs) = build_kkt(a, cones);
        let ldl = LdlSolver::new(&k, &signs)?;
        Ok(KktSystem {
            k_true: k.clone(),
            k_reg: k,
            layout,
            ldl,
            n: a.ncols,
            reg: T::of(STATIC_REG),
        })
    }

    /// Sets the `-WᵀW` blocks (or `-I` when `scal` is `None`) and refactors.
    fn update(&mut self, cones: &[Cone], scal: Option<&[ConeScaling<T>]>) -> Result<()> {
        let mut buf = Vec::new();
        for (ci, c) in cones.iter().enumerate() {
            match scal {
                Some(s) => cones::h_block_upper(&s[ci], c.dim(), &mut buf),
                None => {
                    buf.clear();
                    match c {
                        Cone::Zero(k) => buf.extend(std::iter::repeat_n(T::zero(), *k)),
                        Cone::NonNeg(k) => buf.extend(std::iter::repeat_n(T::one(), *k)),
                        Cone::Soc(k) => {
                            for col in 0..*k {
                                for row in 0..=col {
                                    buf.push(if row == col { T::one() } else { T::zero() });
                                }
                            }
                        }
                    }
                }
            }
            for (&slot, &v) in self.layout.z_blocks[ci].iter().zip(&buf) {
                self.k_true.values[slot] = -v;
                self.k_reg.values[slot] = -v;
            }
        }
        let max_diag = self
            .layout
            .z_diag
            .iter()
            .map(|&p| self.k_true.values[p].abs())
            .fold(T::one(), |a, b| a.max(b));
        self.reg = T::of(STATIC_REG) * max_diag.min(T::one()).max(T::of(1e-2));
        for &p in &self.layout.x_diag {
            self.k_reg.values[p] = self.reg;
        }
        for &p in &self.layout.z_diag {
            self.k_reg.values[p] = self.k_true.values[p] - self.reg;
        }
        self.ldl.factor(&self.k_reg)
    }

    /// Solves `K [x; z] = [rx; rz]` with iterative refinement against the unregularized matrix.
    fn solve(&self, rx: &[T], rz: &[T]) -> (Vec<T>, Vec<T>) {
        let rhs: Vec<T> = rx.iter().chain(rz).copied().collect();
        let mut sol = rhs.clone();
        self.ldl.solve(&mut sol);
        let dim = rhs.len();
        let mut kx = vec![T::zero(); dim];
        let rhs_norm = norm_inf(&rhs);
        let mut last = T::infinity();
        for _ in 0..8 {
            sym_upper_mul(&self.k_true, &sol, &mut kx);
            let mut res: Vec<T> = rhs.iter().zip(&kx).map(|(&a, &b)| a - b).collect();
            let rn = norm_inf(&res);
            if rn <= T::of(1e-14) * (T::one() + rhs_norm) || !(rn < last * T::of(0.9)) {
                break;
            }
            last = rn;
            self.ldl.solve(&mut res);
            for (s, d) in sol.iter_mut().zip(&res) {
                *s += *d;
            }
        }
        let z = sol.split_off(self.n);
        (sol, z)
    }
}

struct Problem<'a, T> {
    a: &'a CscMatrix<T>,
    q: &'a [T],
    b: &'a [T],
    cones: &'a [Cone],
}

struct Iterate<T> {
    x: Vec<T>,
    s: Vec<T>,
    z: Vec<T>,
    tau: T,
    kappa: T,
}

struct Direction<T> {
    x: Vec<T>,
    s: Vec<T>,
    z: Vec<T>,
    tau: T,
    kappa: T,
}

struct Residuals<T> {
    rx: Vec<T>,
    rz: Vec<T>,
    rtau: T,
}

fn residuals<T: Real>(p: &Problem<'_, T>, it: &Iterate<T>) -> Residuals<T> {
    let mut rx: Vec<T> = p.q.iter().map(|&v| v * it.tau).collect();
    p.a.gemv_t(&mut rx, &it.z, T::one());
    let mut rz: Vec<T> =
        it.s.iter()
            .zip(p.b)
            .map(|(&s, &b)| s - b * it.tau)
            .collect();
    p.a.gemv(&mut rz, &it.x, T::one());
    let rtau = dot(p.q, &it.x) + dot(p.b, &it.z) + it.kappa;
    Residuals { rx, rz, rtau }
}

#[allow(clippy::too_many_arguments)]
fn direction<T: Real>(
    p: &Problem<'_, T>,
    kkt: &KktSystem<T>,
    scal: &[ConeScaling<T>],
    lambda: &[T],
    it: &Iterate<T>,
    sol1: &(Vec<T>, Vec<T>),
    dx: &[T],
    dz: &[T],
    dtau: T,
    ds: &[T],
    dkappa: T,
) -> Direction<T> {
    let w = cones::jordan_div(p.cones, lambda, ds);
    let ww = cones::mul_w(p.cones, scal, &w);
    let rx: Vec<T> = dx.iter().map(|&v| -v).collect();
    let rz: Vec<T> = dz.iter().zip(&ww).map(|(&a, &b)| -a + b).collect();
    let (x2, z2) = kkt.solve(&rx, &rz);
    let (x1, z1) = sol1;
    let num = -dtau + dkappa / it.tau - dot(p.q, &x2) - dot(p.b, &z2);
    let den = dot(p.q, x1) + dot(p.b, z1) - it.kappa / it.tau;
    let t = num / den;
    let x: Vec<T> = x2.iter().zip(x1).map(|(&a, &b)| a + t * b).collect();
    let z: Vec<T> = z2.iter().zip(z1).map(|(&a, &b)| a + t * b).collect();
    let wz = cones::mul_w(p.cones, scal, &z);
    let inner: Vec<T> = w.iter().zip(&wz).map(|(&a, &b)| a + b).collect();
    let s: Vec<T> = cones::mul_w(p.cones, scal, &inner)
        .into_iter()
        .map(|v| -v)
        .collect();
    let kappa = -(dkappa + it.kappa * t) / it.tau;
    Direction {
        x,
        s,
        z,
        tau: t,
        kappa,
    }
}

fn max_step<T: Real>(cones: &[Cone], it: &Iterate<T>, d: &Direction<T>) -> T {
    let mut a = cones::step_length(cones, &it.s, &d.s, T::one());
    a = a.min(cones::step_length(cones, &it.z, &d.z, T::one()));
    if d.tau < T::zero() {
        a = a.min(-it.tau / d.tau);
    }
    if d.kappa < T::zero() {
        a = a.min(-it.kappa / d.kappa);
    }
    a.max(T::zero())
}

struct Unscaled<T> {
    x: Vec<T>,
    s: Vec<T>,
    z: Vec<T>,
}

fn unscale<T: Real>(eq: &Equilibration<T>, it: &Iterate<T>) -> Unscaled<T> {
    Unscaled {
        x: it.x.iter().zip(&eq.d).map(|(&v, &d)| v * d).collect(),
        s: it.s.iter().zip(&eq.e).map(|(&v, &e)| v / e).collect(),
        z: it
            .z
            .iter()
            .zip(&eq.e)
            .map(|(&v, &e)| v * e / eq.c)
            .collect(),
    }
}

/// The best iterate seen, if it meets the reduced-accuracy tolerance.
fn fallback<T: Real>(best: Option<(T, RawSolution<T>)>, tol: T) -> Option<RawSolution<T>> {
    best.filter(|(merit, _)| *merit <= T::of(REDUCED_ACCURACY) * tol)
        .map(|(_, sol)| sol)
}

pub(crate) fn solve<T: Real>(
    form: &StandardForm<T>,
    settings: &SolverSettings<T>,
) -> Result<RawSolution<T>> {
    let (n, m) = (form.n, form.m());
    let tol = settings.tolerance;
    let mut a = form.a.clone();
    let mut q = form.q.clone();
    let mut b = form.b.clone();
    let eq = equilibrate(&mut a, &mut q, &mut b, &form.cones, settings.equilibrate);
    let prob = Problem {
        a: &a,
        q: &q,
        b: &b,
        cones: &form.cones,
    };
    let nu = form.cones.iter().map(|c| c.degree()).sum::<usize>();

    let mut kkt = KktSystem::new(&a, &form.cones)?;
    kkt.update(&form.cones, None)?;
    let zeros_n = vec![T::zero(); n];
    let zeros_m = vec![T::zero(); m];
    let (x0, y0) = kkt.solve(&zeros_n, &b);
    let mut s: Vec<T> = y0.iter().map(|&v| -v).collect();
    let neg_q: Vec<T> = q.iter().map(|&v| -v).collect();
    let (_, mut z) = kkt.solve(&neg_q, &zeros_m);
    cones::shift_to_interior(&form.cones, &mut s);
    cones::shift_to_interior(&form.cones, &mut z);
    let mut it = Iterate {
        x: x0,
        s,
        z,
        tau: T::one(),
        kappa: T::one(),
    };

    let b_norm = norm_inf(&form.b);
    let q_norm = norm_inf(&form.q);
    let mut stalls = 0;
    let mut last_metrics = (T::infinity(), T::infinity());
    let mut best: Option<(T, RawSolution<T>)> = None;
    for iter in 0..=settings.max_iter {
        let res = residuals(&prob, &it);
        if res.rx.iter().chain(&res.rz).any(|v| !v.is_finite()) || !it.tau.is_finite() {
            return fallback(best, tol)
                .ok_or_else(|| Error::NumericalFailure("non-finite iterate".into()));
        }
        let u = unscale(&eq, &it);
        let tau = it.tau;
        let xs: Vec<T> = u.x.iter().map(|&v| v / tau).collect();
        let ss: Vec<T> = u.s.iter().map(|&v| v / tau).collect();
        let zs: Vec<T> = u.z.iter().map(|&v| v / tau).collect();
        let rp: Vec<T> = res
            .rz
            .iter()
            .zip(&eq.e)
            .map(|(&r, &e)| r / e / tau)
            .collect();
        let rd: Vec<T> = res
            .rx
            .iter()
            .zip(&eq.d)
            .map(|(&r, &d)| r / d / eq.c / tau)
            .collect();
        let pres = norm_inf(&rp) / (T::one() + b_norm.max(norm_inf(&xs)).max(norm_inf(&ss)));
        let dres = norm_inf(&rd) / (T::one() + q_norm.max(norm_inf(&zs)));
        let pcost = dot(&form.q, &xs);
        let dcost = -dot(&form.b, &zs);
        let gap = (pcost - dcost).abs() / T::one().max(pcost.abs().min(dcost.abs()));
        last_metrics = (pres, gap);
        let done = |f: T| pres <= f * tol && dres <= f * tol && gap <= f * tol;
        let merit = pres.max(dres).max(gap);
        if merit.is_finite() && best.as_ref().is_none_or(|(b, _)| merit < *b) {
            best = Some((
                merit,
                RawSolution {
                    status: SolveStatus::Optimal,
                    x: xs.clone(),
                    z: zs.clone(),
                    ray: None,
                    iterations: iter,
                    primal_residual: pres,
                    gap,
                },
            ));
        }
        if done(T::one()) {
            return Ok(RawSolution {
                status: SolveStatus::Optimal,
                x: xs,
                z: zs,
                ray: None,
                iterations: iter,
                primal_residual: pres,
                gap,
            });
        }
        if it.kappa > it.tau {
            let bz = dot(&form.b, &u.z);
            if bz < T::zero() {
                let mut atz = vec![T::zero(); n];
                form.a.gemv_t(&mut atz, &u.z, T::one());
                if norm_inf(&atz) <= -bz * tol {
                    return Ok(RawSolution {
                        status: SolveStatus::Infeasible,
                        x: xs,
                        z: u.z.iter().map(|&v| v / -bz).collect(),
                        ray: None,
                        iterations: iter,
                        primal_residual: pres,
                        gap,
                    });
                }
            }
            let qx = dot(&form.q, &u.x);
            if qx < T::zero() {
                let mut axs = u.s.clone();
                form.a.gemv(&mut axs, &u.x, T::one());
                if norm_inf(&axs) <= -qx * tol {
                    return Ok(RawSolution {
                        status: SolveStatus::Unbounded,
                        x: xs,
                        z: Vec::new(),
                        ray: Some(u.x.iter().map(|&v| v / -qx).collect()),
                        iterations: iter,
                        primal_residual: pres,
                        gap,
                    });
                }
            }
        }
        if iter == settings.max_iter {
            break;
        }

        let (scal, lambda) = cones::nt_scaling(&form.cones, &it.s, &it.z);
        if let Err(e) = kkt.update(&form.cones, Some(&scal)) {
            return fallback(best, tol).ok_or(e);
        }
        let sol1 = kkt.solve(&neg_q, &b);
        let mu = (dot(&it.s, &it.z) + it.tau * it.kappa) / T::of_usize(nu + 1);

        let ds_aff = cones::jordan_prod(&form.cones, &lambda, &lambda);
        let aff = direction(
            &prob,
            &kkt,
            &scal,
            &lambda,
            &it,
            &sol1,
            &res.rx,
            &res.rz,
            res.rtau,
            &ds_aff,
            it.tau * it.kappa,
        );
        let alpha_aff = max_step(&form.cones, &it, &aff);
        let sigma = (T::one() - alpha_aff).powi(3);
        let eta = T::one() - sigma;

        let ws = cones::mul_winv(&form.cones, &scal, &aff.s);
        let wz = cones::mul_w(&form.cones, &scal, &aff.z);
        let mut ds = cones::jordan_prod(&form.cones, &ws, &wz);
        for (d, l) in ds.iter_mut().zip(&ds_aff) {
            *d += *l;
        }
        cones::add_identity(&form.cones, &mut ds, -sigma * mu);
        let dkappa = it.tau * it.kappa + aff.tau * aff.kappa - sigma * mu;
        let dx: Vec<T> = res.rx.iter().map(|&v| v * eta).collect();
        let dz: Vec<T> = res.rz.iter().map(|&v| v * eta).collect();
        let step = direction(
            &prob,
            &kkt,
            &scal,
            &lambda,
            &it,
            &sol1,
            &dx,
            &dz,
            res.rtau * eta,
            &ds,
            dkappa,
        );
        let alpha = (max_step(&form.cones, &it, &step) * T::of(STEP_FRACTION)).min(T::one());
        if !(alpha > T::of(1e-10)) {
            stalls += 1;
            if stalls >= 3 {
                if let Some(sol) = fallback(best, tol) {
                    return Ok(sol);
                }
                return Err(Error::NumericalFailure(format!(
                    "interior-point method stalled at iteration {iter} (residual {:e}, gap {:e})",
                    pres.to_f64_lossy(),
                    gap.to_f64_lossy()
                )));
            }
        } else {
            stalls = 0;
        }
        for i in 0..n {
            it.x[i] += alpha * step.x[i];
        }
        for i in 0..m {
            it.s[i] += alpha * step.s[i];
            it.z[i] += alpha * step.z[i];
        }
        it.tau += alpha * step.tau;
        it.kappa += alpha * step.kappa;
    }
    if let Some(sol) = fallback(best, tol) {
        return Ok(sol);
    }
    let u = unscale(&eq, &it);
    Ok(RawSolution {
        status: SolveStatus::IterationLimit,
        x: u.x.iter().map(|&v| v / it.tau).collect(),
        z: u.z.iter().map(|&v| v / it.tau).collect(),
        ray: None,
        iterations: settings.max_iter,
        primal_residual: last_metrics.0,
        gap: last_metrics.1,
    })
}
