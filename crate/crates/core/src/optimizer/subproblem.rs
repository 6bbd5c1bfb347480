//! One SCA step: the convexified problem around the current codebook `w`.
//!
//! Dividing by `‖h_k‖²` and substituting `f_ℓ = √P g_ℓ`, `w_ℓ = √P u_ℓ` gives
//!
//! ```text
//! maximize τ  s.t.  Σ_ℓ 2 Re(a_kℓ^H g_ℓ) − c_k ≥ τ  (k = 1…K),   ‖g_ℓ‖ ≤ 1
//! ```
//!
//! with `ĥ_k = h_k/‖h_k‖`, `ρ_kℓ = ĥ_k^H u_ℓ`, `a_kℓ = ĥ_k ρ_kℓ` and
//! `c_k = Σ_ℓ |ρ_kℓ|²`; the original epigraph value is `t = P τ`. The program
//! is solved in real coordinates `x = (τ, Re g_1, Im g_1, …)` by the cone
//! solver with `K` linear rows and `L` second-order cones.
//!
//! Optimality is certified without trusting the solver: any simplex weight
//! `μ` bounds the optimum by `Σ_ℓ 2‖Σ_k μ_k a_kℓ‖ − Σ_k μ_k c_k`, and any
//! `g` inside the unit balls attains `min_k(…)`. The solver's linear-cone
//! multipliers supply `μ`; the returned point is the projected primal iterate
//! evaluated exactly, so it is feasible by construction.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::codebook::{check_channels, feasibility_tolerance};
use super::dense::RealMatrix;
use super::socp::{self, ConeDims, ConeProgram, IpmOptions, IpmStart, IpmStatus};
use super::OptimizerError;
use crate::numerics::{inner_slices, CVector};
use crate::Scalar;

/// `2 Re(f^H h h^H w) − |h^H w|²`, the tangent minorant of `|h^H f|²` at `w`.
pub fn taylor_minorant<T: Scalar>(
    h: &CVector<T>,
    f: &CVector<T>,
    w: &CVector<T>,
) -> Result<T, OptimizerError> {
    for v in [f, w] {
        if v.dim() != h.dim() {
            return Err(OptimizerError::DimensionMismatch {
                expected: h.dim(),
                found: v.dim(),
            });
        }
    }
    let hf = inner_slices(h.as_slice(), f.as_slice());
    let hw = inner_slices(h.as_slice(), w.as_slice());
    // f^H h h^H w = conj(h^H f) · (h^H w)
    Ok(T::lit(2.0) * (hf.conj() * hw).re - hw.norm_sqr())
}

/// Per-step solver statistics, recorded in the design report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemDiagnostics {
    pub ipm_iterations: usize,
    /// Certified bound on `t* − t` for the returned point.
    pub certificate_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// The solver's point was worse than the linearization point, which was
    /// returned instead.
    pub kept_previous: bool,
}

#[derive(Debug, Clone)]
pub struct SubproblemSolution<T> {
    pub vectors: Vec<CVector<T>>,
    /// Epigraph value `min_k Σ_ℓ minorant(h_k, f_ℓ, w_ℓ) / ‖h_k‖²`.
    pub t: T,
    /// The same quantity at `f = w`, i.e. the true objective of `w`.
    pub t_start: T,
    pub diagnostics: SubproblemDiagnostics,
}

struct Linearization<T> {
    m: usize,
    l: usize,
    /// `a[k][ℓ]`, each of length `M`.
    a: Vec<Vec<Vec<Complex<T>>>>,
    c: Vec<T>,
}

impl<T: Scalar> Linearization<T> {
    fn n(&self) -> usize {
        1 + 2 * self.m * self.l
    }

    /// `min_k Σ_ℓ 2 Re(a_kℓ^H g_ℓ) − c_k` for complex `g` in the unit balls.
    fn primal_value(&self, g: &[Vec<Complex<T>>]) -> T {
        let two = T::lit(2.0);
        self.a
            .iter()
            .zip(&self.c)
            .map(|(ak, &ck)| {
                ak.iter()
                    .zip(g)
                    .map(|(a, gl)| two * inner_slices(a, gl).re)
                    .fold(T::zero(), |x, y| x + y)
                    - ck
            })
            .fold(T::infinity(), |x, y| x.min(y))
    }

    /// `Σ_ℓ 2‖Σ_k μ_k a_kℓ‖ − Σ_k μ_k c_k` for simplex weights `μ`.
    fn dual_bound(&self, mu: &[T]) -> T {
        let mut bound = T::zero();
        for l in 0..self.l {
            let mut acc = vec![Complex::new(T::zero(), T::zero()); self.m];
            for (ak, &w) in self.a.iter().zip(mu) {
                for (x, &y) in acc.iter_mut().zip(&ak[l]) {
                    *x += y * w;
                }
            }
            bound += T::lit(2.0)
                * acc
                    .iter()
                    .map(|z| z.norm_sqr())
                    .fold(T::zero(), |x, y| x + y)
                    .sqrt();
        }
        bound
            - mu.iter()
                .zip(&self.c)
                .map(|(&w, &c)| w * c)
                .fold(T::zero(), |x, y| x + y)
    }

    /// Complex beamformers from the real embedding, projected onto the unit balls.
    fn extract(&self, x: &[T]) -> Vec<Vec<Complex<T>>> {
        (0..self.l)
            .map(|l| {
                let base = 1 + 2 * self.m * l;
                let mut g: Vec<Complex<T>> = (0..self.m)
                    .map(|i| Complex::new(x[base + i], x[base + self.m + i]))
                    .collect();
                let norm = g
                    .iter()
                    .map(|z| z.norm_sqr())
                    .fold(T::zero(), |a, b| a + b)
                    .sqrt();
                if norm > T::one() {
                    for z in &mut g {
                        *z /= norm;
                    }
                }
                g
            })
            .collect()
    }

    /// Simplex weights from the linear-cone multipliers.
    fn weights(&self, z: &[T]) -> Vec<T> {
        let k = self.c.len();
        let total = z[..k].iter().fold(T::zero(), |a, &b| a + b.max(T::zero()));
        if total > T::zero() {
            z[..k].iter().map(|&v| v.max(T::zero()) / total).collect()
        } else {
            vec![T::one() / T::of_usize(k); k]
        }
    }

    fn program(&self) -> ConeProgram<T> {
        let (k, m, l) = (self.c.len(), self.m, self.l);
        let n = self.n();
        let rows = k + l * (1 + 2 * m);
        let mut g = RealMatrix::zeros(rows, n);
        let mut h = vec![T::zero(); rows];
        let two = T::lit(2.0);
        for (row, (ak, &ck)) in self.a.iter().zip(&self.c).enumerate() {
            g.set(row, 0, T::one());
            for (li, a) in ak.iter().enumerate() {
                let base = 1 + 2 * m * li;
                for (i, z) in a.iter().enumerate() {
                    g.set(row, base + i, -two * z.re);
                    g.set(row, base + m + i, -two * z.im);
                }
            }
            h[row] = -ck;
        }
        for li in 0..l {
            let top = k + li * (1 + 2 * m);
            h[top] = T::one();
            let base = 1 + 2 * m * li;
            for j in 0..2 * m {
                g.set(top + 1 + j, base + j, -T::one());
            }
        }
        let mut c = vec![T::zero(); n];
        c[0] = -T::one();
        ConeProgram {
            c,
            g,
            h,
            dims: ConeDims {
                linear: k,
                soc: vec![1 + 2 * m; l],
            },
        }
    }

    /// Primal point `g = 0` with slack 1 on every row, and a dual-feasible
    /// `z` with uniform linear multipliers.
    fn start(&self) -> IpmStart<T> {
        let (k, m, l) = (self.c.len(), self.m, self.l);
        let mut x = vec![T::zero(); self.n()];
        let tau0 = self.c.iter().fold(T::infinity(), |a, &c| a.min(-c)) - T::one();
        x[0] = tau0;
        let mut s = Vec::with_capacity(k + l * (1 + 2 * m));
        let mut z = Vec::with_capacity(s.capacity());
        let uniform = T::one() / T::of_usize(k);
        for &ck in &self.c {
            s.push(-ck - tau0);
            z.push(uniform);
        }
        let two = T::lit(2.0);
        for li in 0..l {
            s.push(T::one());
            s.extend(std::iter::repeat_n(T::zero(), 2 * m));
            let mut tail = vec![T::zero(); 2 * m];
            for ak in &self.a {
                for (i, a) in ak[li].iter().enumerate() {
                    tail[i] -= two * uniform * a.re;
                    tail[m + i] -= two * uniform * a.im;
                }
            }
            let norm = tail.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
            z.push(norm + T::one());
            z.extend(tail);
        }
        IpmStart { x, s, z }
    }
}

/// Solves the convexified step around `w` (each `‖w_ℓ‖² ≤ P`).
///
/// The result is feasible, satisfies `t ≥ t_start`, and its optimality gap is
/// certified below `eps_inner`; otherwise an error carrying the solver's last
/// residuals is returned.
pub fn solve_subproblem<T: Scalar>(
    channels: &[CVector<T>],
    w: &[CVector<T>],
    power: T,
    eps_inner: T,
) -> Result<SubproblemSolution<T>, OptimizerError> {
    if !(power.is_finite() && power > T::zero()) {
        return Err(OptimizerError::InvalidConfig(format!(
            "power budget must be positive, got {power}"
        )));
    }
    if !(eps_inner.is_finite() && eps_inner > T::zero()) {
        return Err(OptimizerError::InvalidConfig(
            "inner tolerance must be positive".into(),
        ));
    }
    let Some(first) = w.first() else {
        return Err(OptimizerError::InvalidConfig(
            "codebook size must be at least 1".into(),
        ));
    };
    let m = first.dim();
    check_channels(channels, m)?;
    let tol = feasibility_tolerance(power);
    for (index, wl) in w.iter().enumerate() {
        if wl.dim() != m {
            return Err(OptimizerError::DimensionMismatch {
                expected: m,
                found: wl.dim(),
            });
        }
        if wl.squared_norm() > power + tol {
            return Err(OptimizerError::PowerViolation {
                index,
                squared_norm: wl.squared_norm().as_f64(),
                power: power.as_f64(),
            });
        }
    }

    let root = power.sqrt();
    let u: Vec<Vec<Complex<T>>> = w
        .iter()
        .map(|wl| wl.iter().map(|&z| z / root).collect())
        .collect();
    let mut a = Vec::with_capacity(channels.len());
    let mut c = Vec::with_capacity(channels.len());
    for h in channels {
        let hn = h.norm();
        let hhat: Vec<Complex<T>> = h.iter().map(|&z| z / hn).collect();
        let mut ak = Vec::with_capacity(w.len());
        let mut ck = T::zero();
        for ul in &u {
            let rho = inner_slices(&hhat, ul);
            ck += rho.norm_sqr();
            ak.push(hhat.iter().map(|&z| z * rho).collect::<Vec<_>>());
        }
        a.push(ak);
        c.push(ck);
    }
    let lin = Linearization {
        m,
        l: w.len(),
        a,
        c,
    };

    // gap tolerance in the normalized problem, with headroom for rounding
    let target = eps_inner / power;
    let start_value = lin.primal_value(&u);
    let options = IpmOptions {
        max_iterations: 100,
        abs_gap: target * T::lit(0.01),
        rel_gap: T::zero(),
        feasibility: T::lit(1e-9).max(T::lit(100.0) * T::epsilon()),
        step_fraction: T::lit(0.99),
    };
    let program = lin.program();
    let sol = socp::solve(&program, &options, Some(lin.start()), |it| {
        let g = lin.extract(it.x);
        lin.dual_bound(&lin.weights(it.z)) - lin.primal_value(&g) <= target
    })
    .map_err(|e| OptimizerError::SubproblemFailed {
        iterations: 0,
        gap: f64::NAN,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        reason: e.to_string(),
    })?;

    let g = lin.extract(&sol.x);
    let value = lin.primal_value(&g);
    let bound = lin.dual_bound(&lin.weights(&sol.z));
    let gap = (bound - value).max(T::zero());
    if !(gap <= target) {
        let reason = match sol.status {
            IpmStatus::MaxIterations => "iteration cap reached",
            IpmStatus::Stalled => "step length collapsed",
            IpmStatus::Optimal | IpmStatus::Accepted => "duality certificate above tolerance",
        };
        return Err(OptimizerError::SubproblemFailed {
            iterations: sol.iterations,
            gap: (gap * power).as_f64(),
            primal_residual: sol.primal_residual.as_f64(),
            dual_residual: sol.dual_residual.as_f64(),
            reason: reason.into(),
        });
    }

    let kept_previous = value < start_value;
    let (chosen, tau) = if kept_previous {
        (u, start_value)
    } else {
        (g, value)
    };
    let vectors = chosen
        .into_iter()
        .map(|gl| CVector::new(gl.into_iter().map(|z| z * root).collect()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SubproblemSolution {
        vectors,
        t: tau * power,
        t_start: start_value * power,
        diagnostics: SubproblemDiagnostics {
            ipm_iterations: sol.iterations,
            certificate_gap: ((bound - tau).max(T::zero()) * power).as_f64(),
            primal_residual: sol.primal_residual.as_f64(),
            dual_residual: sol.dual_residual.as_f64(),
            kept_previous,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neighborhood::closeness;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(entries: &[(f64, f64)]) -> CVector<f64> {
        CVector::new(entries.iter().map(|&(r, i)| Complex::new(r, i)).collect()).unwrap()
    }

    fn random(rng: &mut ChaCha8Rng, m: usize) -> CVector<f64> {
        CVector::new(
            (0..m)
                .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn minorant_tangent_and_orthogonal_cases() {
        let h = v(&[(1.0, 0.5), (-0.2, 0.3)]);
        let w = v(&[(0.4, -0.1), (0.9, 0.2)]);
        let exact = inner_slices(h.as_slice(), w.as_slice()).norm_sqr();
        assert!((taylor_minorant(&h, &w, &w).unwrap() - exact).abs() < 1e-15);
        let h = v(&[(1.0, 0.0), (0.0, 0.0)]);
        let w = v(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(
            taylor_minorant(&h, &v(&[(3.0, 1.0), (2.0, 0.0)]), &w).unwrap(),
            0.0
        );
    }

    #[test]
    fn minorant_never_exceeds_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let m = rng.gen_range(1..=8);
            let (h, f, w) = (
                random(&mut rng, m),
                random(&mut rng, m),
                random(&mut rng, m),
            );
            let gain = inner_slices(h.as_slice(), f.as_slice()).norm_sqr();
            assert!(taylor_minorant(&h, &f, &w).unwrap() <= gain + 1e-10);
        }
    }

    #[test]
    fn mrt_is_a_fixed_point_for_one_channel() {
        let h = v(&[(0.3, 1.0), (-0.7, 0.2), (0.5, -0.5)]);
        let p: f64 = 2.0;
        let w = h.scale_real(p.sqrt() / h.norm());
        let sol = solve_subproblem(std::slice::from_ref(&h), &[w], p, 1e-9).unwrap();
        assert!((sol.t - p).abs() < 1e-8);
        assert!((closeness(&sol.vectors[0], &h).unwrap() - 1.0).abs() < 1e-8);
        assert!(sol.vectors[0].squared_norm() <= p + 1e-9);
    }

    #[test]
    fn symmetric_two_channel_instance() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let chans = [v(&[(1.0, 0.0), (0.0, 0.0)]), v(&[(0.0, 0.0), (1.0, 0.0)])];
        let w = v(&[(r, 0.0), (r, 0.0)]);
        let sol = solve_subproblem(&chans, std::slice::from_ref(&w), 1.0, 1e-9).unwrap();
        assert!((sol.t - 0.5).abs() < 1e-8, "t = {}", sol.t);
        assert!((closeness(&sol.vectors[0], &w).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn random_instances_ascend_and_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..20 {
            let m = rng.gen_range(2..=8);
            let k = rng.gen_range(1..=12);
            let l = rng.gen_range(1..=3);
            let p: f64 = rng.gen_range(0.5..4.0);
            let chans: Vec<_> = (0..k).map(|_| random(&mut rng, m)).collect();
            let w: Vec<_> = (0..l)
                .map(|_| {
                    let x = random(&mut rng, m);
                    x.scale_real(p.sqrt() / x.norm())
                })
                .collect();
            let sol = solve_subproblem(&chans, &w, p, 1e-8).unwrap();
            assert!(sol.t >= sol.t_start - 1e-8, "trial {trial}");
            assert!(sol.t <= p * l as f64 + 1e-9);
            assert!(sol.diagnostics.certificate_gap <= 1e-8);
            for f in &sol.vectors {
                assert!(f.squared_norm() <= p + 1e-9);
            }
            // t is exactly the minorant value of the returned point
            let direct = chans
                .iter()
                .map(|h| {
                    sol.vectors
                        .iter()
                        .zip(&w)
                        .map(|(f, wl)| taylor_minorant(h, f, wl).unwrap())
                        .sum::<f64>()
                        / h.squared_norm()
                })
                .fold(f64::INFINITY, f64::min);
            assert!((direct - sol.t).abs() < 1e-9);
        }
    }

    #[test]
    fn infeasible_start_rejected() {
        let h = v(&[(1.0, 0.0)]);
        assert!(matches!(
            solve_subproblem(std::slice::from_ref(&h), &[h.scale_real(2.0)], 1.0, 1e-8),
            Err(OptimizerError::PowerViolation { .. })
        ));
        assert!(matches!(
            solve_subproblem(&[], std::slice::from_ref(&h), 1.0, 1e-8),
            Err(OptimizerError::EmptyNeighborhood)
        ));
    }
}
