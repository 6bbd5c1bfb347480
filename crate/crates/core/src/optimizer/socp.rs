//! Dense primal-dual interior-point solver for cone programs over products
//! of the nonnegative orthant and second-order cones:
//!
//! ```text
//! minimize    c^T x
//! subject to  G x + s = h,   s ∈ R_+^l × Q^{q_1} × … × Q^{q_p}
//! ```
//!
//! with `Q^q = { (u_0, u_1) ∈ R × R^{q-1} : u_0 ≥ ‖u_1‖ }`. Search directions
//! use Nesterov–Todd scaling and a Mehrotra predictor–corrector; the Newton
//! system is reduced to the `n × n` normal equations `Ĝ^T Ĝ Δx = …` with
//! `Ĝ = W^{-1} G` and solved by Cholesky.

use thiserror::Error;

use super::dense::{cholesky_in_place, cholesky_solve, dot, norm2, RealMatrix};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SocpError {
    #[error("malformed cone program: {0}")]
    Malformed(String),
    #[error("normal equations are singular (rank-deficient G)")]
    Singular,
}

/// Cone dimensions: `linear` orthant rows followed by second-order cones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeDims {
    pub linear: usize,
    pub soc: Vec<usize>,
}

impl ConeDims {
    pub fn total(&self) -> usize {
        self.linear + self.soc.iter().sum::<usize>()
    }

    /// Barrier degree `l + p`.
    pub fn degree(&self) -> usize {
        self.linear + self.soc.len()
    }

    fn soc_blocks(&self) -> Vec<(usize, usize)> {
        let mut off = self.linear;
        self.soc
            .iter()
            .map(|&q| {
                let b = (off, q);
                off += q;
                b
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ConeProgram<T> {
    pub c: Vec<T>,
    pub g: RealMatrix<T>,
    pub h: Vec<T>,
    pub dims: ConeDims,
}

#[derive(Debug, Clone, Copy)]
pub struct IpmOptions<T> {
    pub max_iterations: usize,
    /// Stop once `s^T z` falls below this.
    pub abs_gap: T,
    /// Stop once `s^T z / |c^T x|` falls below this.
    pub rel_gap: T,
    /// Relative primal and dual residual bound required for termination.
    pub feasibility: T,
    /// Fraction of the maximum step to the cone boundary.
    pub step_fraction: T,
}

impl<T: Scalar> Default for IpmOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            abs_gap: T::lit(1e-10),
            rel_gap: T::lit(1e-10),
            feasibility: T::lit(1e-10),
            step_fraction: T::lit(0.99),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpmStatus {
    /// Gap and residual tolerances met.
    Optimal,
    /// The caller's monitor accepted the iterate.
    Accepted,
    MaxIterations,
    /// Step length collapsed or the scaling broke down before convergence.
    Stalled,
}

/// Strictly interior starting point.
#[derive(Debug, Clone)]
pub struct IpmStart<T> {
    pub x: Vec<T>,
    pub s: Vec<T>,
    pub z: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct IpmSolution<T> {
    pub x: Vec<T>,
    pub s: Vec<T>,
    pub z: Vec<T>,
    pub status: IpmStatus,
    pub iterations: usize,
    pub gap: T,
    pub primal_residual: T,
    pub dual_residual: T,
}

/// Snapshot handed to the monitor before each Newton step.
pub struct Iterate<'a, T> {
    pub iteration: usize,
    pub x: &'a [T],
    pub s: &'a [T],
    pub z: &'a [T],
    pub gap: T,
    pub primal_residual: T,
    pub dual_residual: T,
}

// ---- cone arithmetic -------------------------------------------------------

/// `u_0² − ‖u_1‖²` computed as a product to limit cancellation.
fn jdet<T: Scalar>(u: &[T]) -> T {
    let r = norm2(&u[1..]);
    (u[0] - r) * (u[0] + r)
}

fn in_interior<T: Scalar>(dims: &ConeDims, u: &[T]) -> bool {
    u[..dims.linear].iter().all(|&v| v > T::zero())
        && dims
            .soc_blocks()
            .iter()
            .all(|&(o, q)| u[o] > norm2(&u[o + 1..o + q]))
}

/// Jordan product `u ∘ v`.
fn jordan<T: Scalar>(dims: &ConeDims, u: &[T], v: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); u.len()];
    for i in 0..dims.linear {
        out[i] = u[i] * v[i];
    }
    for (o, q) in dims.soc_blocks() {
        out[o] = dot(&u[o..o + q], &v[o..o + q]);
        for i in 1..q {
            out[o + i] = u[o] * v[o + i] + v[o] * u[o + i];
        }
    }
    out
}

/// Solves `λ ∘ x = r` for `x`.
fn jordan_div<T: Scalar>(dims: &ConeDims, lambda: &[T], r: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); r.len()];
    for i in 0..dims.linear {
        out[i] = r[i] / lambda[i];
    }
    for (o, q) in dims.soc_blocks() {
        let l = &lambda[o..o + q];
        let rr = &r[o..o + q];
        let x0 = (l[0] * rr[0] - dot(&l[1..], &rr[1..])) / jdet(l);
        out[o] = x0;
        for i in 1..q {
            out[o + i] = (rr[i] - x0 * l[i]) / l[0];
        }
    }
    out
}

fn identity_element<T: Scalar>(dims: &ConeDims) -> Vec<T> {
    let mut e = vec![T::zero(); dims.total()];
    for v in e.iter_mut().take(dims.linear) {
        *v = T::one();
    }
    for (o, _) in dims.soc_blocks() {
        e[o] = T::one();
    }
    e
}

/// Largest `α ≥ 0` keeping `u + α d` in the cone (`u` interior); may be infinite.
fn max_step<T: Scalar>(dims: &ConeDims, u: &[T], d: &[T]) -> T {
    let mut alpha = T::infinity();
    for i in 0..dims.linear {
        if d[i] < T::zero() {
            alpha = alpha.min(-u[i] / d[i]);
        }
    }
    for (o, q) in dims.soc_blocks() {
        let (uu, dd) = (&u[o..o + q], &d[o..o + q]);
        let a = jdet(dd);
        let b = T::lit(2.0) * (uu[0] * dd[0] - dot(&uu[1..], &dd[1..]));
        let c = jdet(uu);
        let root = smallest_positive_root(a, b, c, dd[0]);
        alpha = alpha.min(root);
    }
    alpha
}

/// Smallest positive root of `a α² + b α + c` (`c > 0`), the first exit from
/// the cone; `lead` is the direction's leading coordinate.
fn smallest_positive_root<T: Scalar>(a: T, b: T, c: T, lead: T) -> T {
    let two = T::lit(2.0);
    if a == T::zero() {
        return if b < T::zero() { -c / b } else { T::infinity() };
    }
    if a > T::zero() && lead >= T::zero() {
        // direction lies in the cone itself
        return T::infinity();
    }
    let disc = b * b - T::lit(4.0) * a * c;
    if disc < T::zero() {
        return T::infinity();
    }
    let sq = disc.sqrt();
    let qv = if b >= T::zero() {
        -(b + sq) / two
    } else {
        -(b - sq) / two
    };
    let mut best = T::infinity();
    for r in [
        qv / a,
        if qv != T::zero() {
            c / qv
        } else {
            T::infinity()
        },
    ] {
        if r > T::zero() && r < best {
            best = r;
        }
    }
    best
}

// ---- Nesterov–Todd scaling -------------------------------------------------

struct SocScale<T> {
    beta: T,
    /// Hyperbolic Householder vector, `v^T J v = 1`.
    w: Vec<T>,
}

struct Scaling<T> {
    dims: ConeDims,
    blocks: Vec<(usize, usize)>,
    /// Diagonal of `W` on the orthant: `√(s/z)`.
    lin: Vec<T>,
    soc: Vec<SocScale<T>>,
    lambda: Vec<T>,
}

impl<T: Scalar> Scaling<T> {
    /// `None` if `s` or `z` has left the cone interior numerically.
    fn new(dims: &ConeDims, s: &[T], z: &[T]) -> Option<Self> {
        let blocks = dims.soc_blocks();
        let mut lin = Vec::with_capacity(dims.linear);
        let mut lambda = vec![T::zero(); s.len()];
        for i in 0..dims.linear {
            if !(s[i] > T::zero() && z[i] > T::zero()) {
                return None;
            }
            lin.push((s[i] / z[i]).sqrt());
            lambda[i] = (s[i] * z[i]).sqrt();
        }
        let mut soc = Vec::with_capacity(blocks.len());
        for &(o, q) in &blocks {
            let (sb, zb) = (&s[o..o + q], &z[o..o + q]);
            let (js, jz) = (jdet(sb), jdet(zb));
            if !(js > T::zero() && jz > T::zero() && sb[0] > T::zero() && zb[0] > T::zero()) {
                return None;
            }
            let (js, jz) = (js.sqrt(), jz.sqrt());
            let sbar: Vec<T> = sb.iter().map(|&v| v / js).collect();
            let zbar: Vec<T> = zb.iter().map(|&v| v / jz).collect();
            let gamma = ((T::one() + dot(&sbar, &zbar)) / T::lit(2.0)).sqrt();
            // NT point w̄ of the normalized pair, then its hyperbolic square
            // root v = (w̄ + e)/√(2(w̄₀ + 1)) so that W = β(2vv^T − J).
            let mut w = Vec::with_capacity(q);
            w.push((sbar[0] + zbar[0]) / (gamma + gamma));
            for i in 1..q {
                w.push((sbar[i] - zbar[i]) / (gamma + gamma));
            }
            let root = (T::lit(2.0) * (w[0] + T::one())).sqrt();
            w[0] += T::one();
            for v in &mut w {
                *v /= root;
            }
            soc.push(SocScale {
                beta: (js / jz).sqrt(),
                w,
            });
        }
        let mut scaling = Self {
            dims: dims.clone(),
            blocks,
            lin,
            soc,
            lambda: Vec::new(),
        };
        let mut l = z.to_vec();
        scaling.apply_w(&mut l);
        l[..dims.linear].copy_from_slice(&lambda[..dims.linear]);
        scaling.lambda = l;
        Some(scaling)
    }

    /// `v ← W v`.
    fn apply_w(&self, v: &mut [T]) {
        for (d, x) in self.lin.iter().zip(v.iter_mut()) {
            *x *= *d;
        }
        for (&(o, q), sc) in self.blocks.iter().zip(&self.soc) {
            let blk = &mut v[o..o + q];
            let wv = dot(&sc.w, blk);
            let two = T::lit(2.0);
            blk[0] = sc.beta * (two * sc.w[0] * wv - blk[0]);
            for i in 1..q {
                blk[i] = sc.beta * (two * sc.w[i] * wv + blk[i]);
            }
        }
    }

    /// `v ← W^{-1} v`.
    fn apply_w_inv(&self, v: &mut [T]) {
        for (d, x) in self.lin.iter().zip(v.iter_mut()) {
            *x /= *d;
        }
        for (&(o, q), sc) in self.blocks.iter().zip(&self.soc) {
            let blk = &mut v[o..o + q];
            let eta = sc.w[0] * blk[0] - dot(&sc.w[1..], &blk[1..]);
            let two = T::lit(2.0);
            let inv = T::one() / sc.beta;
            blk[0] = inv * (two * sc.w[0] * eta - blk[0]);
            for i in 1..q {
                blk[i] = inv * (-two * sc.w[i] * eta + blk[i]);
            }
        }
    }

    fn degree(&self) -> usize {
        self.dims.degree()
    }
}

// ---- solver ----------------------------------------------------------------

struct Kkt<'a, T> {
    scaling: &'a Scaling<T>,
    /// `W^{-1} G`.
    g_hat: RealMatrix<T>,
    chol: RealMatrix<T>,
}

impl<'a, T: Scalar> Kkt<'a, T> {
    fn factor(
        prob: &ConeProgram<T>,
        scaling: &'a Scaling<T>,
        supports: &[Vec<usize>],
    ) -> Result<Self, SocpError> {
        let (m, n) = (prob.g.rows, prob.g.cols);
        let mut g_hat = prob.g.clone();
        for i in 0..prob.dims.linear {
            let d = scaling.lin[i];
            for v in &mut g_hat.data[i * n..(i + 1) * n] {
                *v /= d;
            }
        }
        let mut col = Vec::new();
        for ((&(o, q), sc), support) in scaling.blocks.iter().zip(&scaling.soc).zip(supports) {
            let _ = sc;
            for &j in support {
                col.clear();
                col.extend((o..o + q).map(|i| prob.g.get(i, j)));
                let mut tmp = vec![T::zero(); m];
                tmp[o..o + q].copy_from_slice(&col);
                scaling.apply_w_inv(&mut tmp);
                for i in 0..q {
                    g_hat.set(o + i, j, tmp[o + i]);
                }
            }
        }

        // lower triangle of Ĝ^T Ĝ
        let mut normal = RealMatrix::zeros(n, n);
        for i in 0..prob.dims.linear {
            let row = g_hat.row(i);
            for (a, &ra) in row.iter().enumerate() {
                if ra == T::zero() {
                    continue;
                }
                let base = a * n;
                for (b, &rb) in row.iter().enumerate().take(a + 1) {
                    normal.data[base + b] += ra * rb;
                }
            }
        }
        for (&(o, q), support) in scaling.blocks.iter().zip(supports) {
            for i in o..o + q {
                let row = g_hat.row(i);
                for (ia, &a) in support.iter().enumerate() {
                    let ra = row[a];
                    if ra == T::zero() {
                        continue;
                    }
                    for &b in &support[..=ia] {
                        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
                        normal.data[hi * n + lo] += ra * row[b];
                    }
                }
            }
        }

        let trace = (0..n)
            .map(|i| normal.get(i, i))
            .fold(T::zero(), |a: T, b: T| a + b.abs());
        let mut reg = T::zero();
        for _ in 0..8 {
            let mut f = normal.clone();
            for i in 0..n {
                let v = f.get(i, i) + reg;
                f.set(i, i, v);
            }
            if cholesky_in_place(&mut f) {
                return Ok(Self {
                    scaling,
                    g_hat,
                    chol: f,
                });
            }
            reg = if reg == T::zero() {
                T::epsilon() * trace.max(T::one())
            } else {
                reg * T::lit(100.0)
            };
        }
        Err(SocpError::Singular)
    }

    /// Solves for `(Δx, ds̃, dz̃)` given `−r_x`, `r_z` and `q = λ ⧵ r_s`.
    fn solve(&self, neg_rx: &[T], rz: &[T], q: &[T]) -> (Vec<T>, Vec<T>, Vec<T>) {
        let mut rhat = rz.to_vec();
        self.scaling.apply_w_inv(&mut rhat);
        for (r, qi) in rhat.iter_mut().zip(q) {
            *r += *qi;
        }
        let gt = self.g_hat.mul_t_vec(&rhat);
        let b: Vec<T> = neg_rx.iter().zip(&gt).map(|(a, g)| *a - *g).collect();
        let dx = cholesky_solve(&self.chol, &b);
        let mut dz_t = self.g_hat.mul_vec(&dx);
        for (d, r) in dz_t.iter_mut().zip(&rhat) {
            *d += *r;
        }
        let ds_t: Vec<T> = q.iter().zip(&dz_t).map(|(a, b)| *a - *b).collect();
        (dx, ds_t, dz_t)
    }
}

fn validate<T: Scalar>(prob: &ConeProgram<T>) -> Result<(), SocpError> {
    let m = prob.dims.total();
    if prob.g.rows != m || prob.h.len() != m {
        return Err(SocpError::Malformed(format!(
            "G has {} rows and h has {} entries, cone dimension is {m}",
            prob.g.rows,
            prob.h.len()
        )));
    }
    if prob.g.cols != prob.c.len() || prob.c.is_empty() {
        return Err(SocpError::Malformed(
            "c and G disagree on the variable count".into(),
        ));
    }
    if prob.dims.soc.contains(&0) {
        return Err(SocpError::Malformed(
            "second-order cones need dimension >= 1".into(),
        ));
    }
    Ok(())
}

/// Least-squares start shifted into the cone interior.
fn default_start<T: Scalar>(prob: &ConeProgram<T>) -> Result<IpmStart<T>, SocpError> {
    let n = prob.c.len();
    let mut gtg = RealMatrix::zeros(n, n);
    for i in 0..prob.g.rows {
        let row = prob.g.row(i);
        for a in 0..n {
            if row[a] == T::zero() {
                continue;
            }
            for b in 0..=a {
                gtg.data[a * n + b] += row[a] * row[b];
            }
        }
    }
    if !cholesky_in_place(&mut gtg) {
        return Err(SocpError::Singular);
    }
    let x = cholesky_solve(&gtg, &prob.g.mul_t_vec(&prob.h));
    let gx = prob.g.mul_vec(&x);
    let s: Vec<T> = prob.h.iter().zip(&gx).map(|(h, g)| *h - *g).collect();
    let y = cholesky_solve(&gtg, &prob.c);
    let z: Vec<T> = prob.g.mul_vec(&y).into_iter().map(|v| -v).collect();
    Ok(IpmStart {
        x,
        s: shift_into_cone(&prob.dims, s),
        z: shift_into_cone(&prob.dims, z),
    })
}

fn shift_into_cone<T: Scalar>(dims: &ConeDims, mut u: Vec<T>) -> Vec<T> {
    // smallest α with u + α e in the cone
    let mut alpha = T::neg_infinity();
    for &v in &u[..dims.linear] {
        alpha = alpha.max(-v);
    }
    for (o, q) in dims.soc_blocks() {
        alpha = alpha.max(norm2(&u[o + 1..o + q]) - u[o]);
    }
    if alpha >= T::zero() || !alpha.is_finite() {
        let shift = T::one() + alpha.max(T::zero());
        let e = identity_element::<T>(dims);
        for (x, ei) in u.iter_mut().zip(e) {
            *x += shift * ei;
        }
    }
    u
}

/// Runs the interior-point method. The `monitor` sees every iterate before
/// the Newton step and may accept it early by returning `true`.
pub fn solve<T: Scalar>(
    prob: &ConeProgram<T>,
    options: &IpmOptions<T>,
    start: Option<IpmStart<T>>,
    mut monitor: impl FnMut(&Iterate<'_, T>) -> bool,
) -> Result<IpmSolution<T>, SocpError> {
    validate(prob)?;
    let dims = &prob.dims;
    let start = match start {
        Some(s) => s,
        None => default_start(prob)?,
    };
    let IpmStart {
        mut x,
        mut s,
        mut z,
    } = start;
    if x.len() != prob.c.len() || s.len() != dims.total() || z.len() != dims.total() {
        return Err(SocpError::Malformed(
            "starting point has wrong dimensions".into(),
        ));
    }
    if !(in_interior(dims, &s) && in_interior(dims, &z)) {
        return Err(SocpError::Malformed(
            "starting point is not strictly interior".into(),
        ));
    }

    // columns touched by each second-order cone block
    let supports: Vec<Vec<usize>> = dims
        .soc_blocks()
        .iter()
        .map(|&(o, q)| {
            (0..prob.c.len())
                .filter(|&j| (o..o + q).any(|i| prob.g.get(i, j) != T::zero()))
                .collect()
        })
        .collect();

    let h_scale = norm2(&prob.h).max(T::one());
    let c_scale = norm2(&prob.c).max(T::one());
    let e = identity_element::<T>(dims);
    let nu = T::of_usize(dims.degree());

    let mut status = IpmStatus::MaxIterations;
    let mut iterations = 0;
    let (mut gap, mut pres, mut dres);
    loop {
        // r_z = G x + s − h, r_x = G^T z + c
        let gx = prob.g.mul_vec(&x);
        let rz: Vec<T> = gx
            .iter()
            .zip(&s)
            .zip(&prob.h)
            .map(|((g, s), h)| *g + *s - *h)
            .collect();
        let gtz = prob.g.mul_t_vec(&z);
        let rx: Vec<T> = gtz.iter().zip(&prob.c).map(|(g, c)| *g + *c).collect();
        gap = dot(&s, &z);
        pres = norm2(&rz) / h_scale;
        dres = norm2(&rx) / c_scale;

        let view = Iterate {
            iteration: iterations,
            x: &x,
            s: &s,
            z: &z,
            gap,
            primal_residual: pres,
            dual_residual: dres,
        };
        if monitor(&view) {
            status = IpmStatus::Accepted;
            break;
        }
        let pobj = dot(&prob.c, &x);
        if pres <= options.feasibility
            && dres <= options.feasibility
            && (gap <= options.abs_gap || gap <= options.rel_gap * pobj.abs())
        {
            status = IpmStatus::Optimal;
            break;
        }
        if iterations >= options.max_iterations {
            break;
        }
        iterations += 1;

        let Some(scaling) = Scaling::new(dims, &s, &z) else {
            status = IpmStatus::Stalled;
            break;
        };
        let mu = gap / nu;
        let kkt = Kkt::factor(prob, &scaling, &supports)?;
        let neg_rx: Vec<T> = rx.iter().map(|v| -*v).collect();
        let lambda = &scaling.lambda;

        // predictor: λ∘(ds̃ + dz̃) = −λ∘λ  ⇒  q = −λ
        let q_aff: Vec<T> = lambda.iter().map(|v| -*v).collect();
        let (_, ds_a, dz_a) = kkt.solve(&neg_rx, &rz, &q_aff);
        let alpha_aff = max_step(dims, lambda, &ds_a)
            .min(max_step(dims, lambda, &dz_a))
            .min(T::one());
        let s_aff: Vec<T> = lambda
            .iter()
            .zip(&ds_a)
            .map(|(l, d)| *l + alpha_aff * *d)
            .collect();
        let z_aff: Vec<T> = lambda
            .iter()
            .zip(&dz_a)
            .map(|(l, d)| *l + alpha_aff * *d)
            .collect();
        let mu_aff = dot(&s_aff, &z_aff) / T::of_usize(scaling.degree());
        let sigma = if mu > T::zero() {
            (mu_aff / mu).max(T::zero()).min(T::one()).powi(3)
        } else {
            T::zero()
        };

        // corrector: λ∘(ds̃ + dz̃) = −λ∘λ + σμe − ds̃_a∘dz̃_a
        let cross = jordan(dims, &ds_a, &dz_a);
        let target: Vec<T> = e
            .iter()
            .zip(&cross)
            .map(|(ei, c)| sigma * mu * *ei - *c)
            .collect();
        let corr = jordan_div(dims, lambda, &target);
        let q: Vec<T> = lambda.iter().zip(&corr).map(|(l, c)| -*l + *c).collect();
        let (dx, ds_t, dz_t) = kkt.solve(&neg_rx, &rz, &q);
        let alpha_max = max_step(dims, lambda, &ds_t).min(max_step(dims, lambda, &dz_t));
        let alpha = (options.step_fraction * alpha_max).min(T::one());
        if !(alpha > T::lit(1e-12)) {
            status = IpmStatus::Stalled;
            break;
        }

        let mut ds = ds_t;
        scaling.apply_w(&mut ds);
        let mut dz = dz_t;
        scaling.apply_w_inv(&mut dz);
        let new_s: Vec<T> = s.iter().zip(&ds).map(|(a, d)| *a + alpha * *d).collect();
        let new_z: Vec<T> = z.iter().zip(&dz).map(|(a, d)| *a + alpha * *d).collect();
        if !(in_interior(dims, &new_s) && in_interior(dims, &new_z)) {
            status = IpmStatus::Stalled;
            break;
        }
        for (a, d) in x.iter_mut().zip(&dx) {
            *a += alpha * *d;
        }
        s = new_s;
        z = new_z;
    }

    Ok(IpmSolution {
        x,
        s,
        z,
        status,
        iterations,
        gap,
        primal_residual: pres,
        dual_residual: dres,
    })
}
