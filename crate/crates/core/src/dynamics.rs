//! Time evolution: the trace-normalised non-Hermitian flow, the Lindblad
//! master equation, marginal dynamics and the metric-operator picture.
//!
//! The normalised flow is
//! `dρ/dt = −i[H1, ρ] + {H2, ρ} − 2 Tr(ρ H2) ρ`, whose solution is
//! `U ρ0 U† / Tr(U ρ0 U†)` with `U = exp(−itH)`. [`evolve_normalized`] uses
//! that closed form; [`evolve_normalized_rk4`] integrates the equation
//! directly and serves as an independent cross-check.

use crate::error::{Error, Result};
use crate::hamiltonians::{JumpChannel, NonHermitianHamiltonian};
use crate::linalg::{
    matrix_expm1, matrix_exponential, min_eigenvalue_exceeds, normal_eigen, partial_trace,
    ComplexMatrix, C64,
};
use crate::states::{linear_entropy, purity, DensityMatrix};

/// Propagated traces at or below this value are reported as norm collapse.
pub const NORM_FLOOR: f64 = 1e-12;

const NORMAL_TOL: f64 = 1e-12;

/// Ascending, nonnegative sample times starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.first() != Some(&0.0) {
            return Err(Error::InvalidGrid("grid must start at t = 0".into()));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("grid contains a non-finite time".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("grid must be strictly ascending".into()));
        }
        Ok(Self { times })
    }

    /// `points` equally spaced times covering `[0, t_max]`.
    pub fn linspace(t_max: f64, points: usize) -> Result<Self> {
        if points < 2 || !(t_max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "need t_max > 0 and at least 2 points, got t_max = {t_max}, points = {points}"
            )));
        }
        let step = t_max / (points - 1) as f64;
        let mut times: Vec<f64> = (0..points).map(|k| k as f64 * step).collect();
        times[points - 1] = t_max;
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.times.last().expect("grid is nonempty")
    }
}

/// Which equation of motion produced a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvolutionLaw {
    NonHermitianNormalized,
    Lindblad,
    Metric,
}

/// Density-matrix snapshots on a time grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub law: EvolutionLaw,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn purities(&self) -> Vec<f64> {
        self.states.iter().map(purity).collect()
    }

    pub fn linear_entropies(&self) -> Result<Vec<f64>> {
        self.states.iter().map(linear_entropy).collect()
    }
}

fn check_dim(rho: usize, h: usize, context: &'static str) -> Result<()> {
    if rho != h {
        return Err(Error::DimensionMismatch {
            context,
            expected: h,
            actual: rho,
        });
    }
    Ok(())
}

/// `−i[H1, ρ] + {H2, ρ} − 2 Tr(ρ H2) ρ`.
pub fn normalized_flow_rhs(rho: &ComplexMatrix, h: &NonHermitianHamiltonian) -> ComplexMatrix {
    let i = C64::new(0.0, 1.0);
    let h1r = h.h1().matmul(rho);
    let h2r = h.h2().matmul(rho);
    // For Hermitian ρ, ρ H = (H ρ)†.
    let comm = &h1r - &rho.matmul(h.h1());
    let anti = &h2r + &rho.matmul(h.h2());
    let mean = rho.trace_product(h.h2());
    &(&comm.scale(-i) + &anti) - &rho.scale(mean * 2.0)
}

/// Right-hand side of the marginal equation of motion for the subsystems
/// `keep`: `Tr_B(−i[H1, ρ] + {H2, ρ}) − 2 Tr(ρ H2) ρ_A`.
pub fn reduced_flow_rhs(
    rho: &DensityMatrix,
    h: &NonHermitianHamiltonian,
    dims: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix> {
    check_dim(rho.dim(), h.dim(), "reduced_flow_rhs")?;
    let r = rho.matrix();
    let i = C64::new(0.0, 1.0);
    let unitary = &h.h1().matmul(r) - &r.matmul(h.h1());
    let dissipative = &h.h2().matmul(r) + &r.matmul(h.h2());
    let local = partial_trace(&(&unitary.scale(-i) + &dissipative), dims, keep)?;
    let marginal = partial_trace(r, dims, keep)?;
    let mean = rho.expectation(h.h2());
    Ok(&local - &marginal.scale(mean * 2.0))
}

/// Per-grid-point propagators `U(t_k) = exp(−i t_k H)`, built by stepping
/// with cached interval exponentials.
struct Stepper {
    minus_i_h: ComplexMatrix,
    cache: Vec<(u64, ComplexMatrix)>,
}

impl Stepper {
    fn new(h: &ComplexMatrix) -> Self {
        Self {
            minus_i_h: h.scale(C64::new(0.0, -1.0)),
            cache: Vec::new(),
        }
    }

    fn step(&mut self, dt: f64) -> Result<&ComplexMatrix> {
        let key = dt.to_bits();
        if let Some(pos) = self.cache.iter().position(|(k, _)| *k == key) {
            return Ok(&self.cache[pos].1);
        }
        // Uniform grids differ in the last bits of dt; keep the cache small.
        if self.cache.len() >= 8 {
            self.cache.remove(0);
        }
        let e = matrix_exponential(&self.minus_i_h.scale_real(dt))?;
        self.cache.push((key, e));
        Ok(&self.cache.last().unwrap().1)
    }
}

/// Closed-form normalised non-Hermitian evolution.
pub fn evolve_normalized(
    rho0: &DensityMatrix,
    h: &NonHermitianHamiltonian,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(grid.len());
    visit_normalized(rho0, h, grid, |_, rho| {
        states.push(rho.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        times: grid.times().to_vec(),
        states,
        law: EvolutionLaw::NonHermitianNormalized,
    })
}

/// Same evolution as [`evolve_normalized`], handing each snapshot to
/// `visit` (with its grid index) instead of storing it.
pub fn visit_normalized(
    rho0: &DensityMatrix,
    h: &NonHermitianHamiltonian,
    grid: &TimeGrid,
    mut visit: impl FnMut(usize, &DensityMatrix) -> Result<()>,
) -> Result<()> {
    check_dim(rho0.dim(), h.dim(), "evolve_normalized")?;
    let full = h.full();
    let times = grid.times();
    visit(0, rho0)?;

    if let Some(eig) = normal_eigen(&full, NORMAL_TOL) {
        let v = &eig.vectors;
        let n = rho0.dim();
        let rho_hat = v.adjoint().matmul(rho0.matrix()).matmul(v);
        for (idx, &t) in times.iter().enumerate().skip(1) {
            let phase: Vec<C64> = eig.values.iter().map(|&l| (l * C64::new(0.0, -t)).exp()).collect();
            let evolved = ComplexMatrix::from_fn(n, |i, j| rho_hat[(i, j)] * phase[i] * phase[j].conj());
            let tr = evolved.trace().re;
            if !(tr > NORM_FLOOR) {
                return Err(Error::NormCollapse { time: t, trace: tr });
            }
            let back = v.matmul(&evolved).matmul_adjoint(v);
            visit(idx, &DensityMatrix::from_trusted(back.scale_real(1.0 / tr)))?;
        }
    } else {
        // Propagate the state itself, renormalising each interval and
        // tracking the cumulative trace of U ρ0 U† in log form.
        let mut stepper = Stepper::new(&full);
        let mut current = DensityMatrix::from_trusted(rho0.matrix().clone());
        let mut log_trace = 0.0;
        for (idx, w) in times.windows(2).enumerate() {
            let t = w[1];
            let evolved = current.matrix().conjugate_by(stepper.step(w[1] - w[0])?);
            let tr = evolved.trace().re;
            log_trace += tr.ln();
            if !(tr > 0.0) || !(log_trace > NORM_FLOOR.ln()) {
                return Err(Error::NormCollapse {
                    time: t,
                    trace: log_trace.exp(),
                });
            }
            current = DensityMatrix::from_trusted(evolved.scale_real(1.0 / tr));
            visit(idx + 1, &current)?;
        }
    }
    Ok(())
}

/// Step-size control for the RK4 integrators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rk4Options {
    /// Initial step; `None` picks `1e-3` divided by the generator's energy
    /// scale.
    pub initial_step: Option<f64>,
    /// Successive halvings stop once every snapshot moves by less than this
    /// (Frobenius norm).
    pub tolerance: f64,
    pub max_halvings: u32,
}

impl Default for Rk4Options {
    fn default() -> Self {
        Self {
            initial_step: None,
            tolerance: 1e-8,
            max_halvings: 6,
        }
    }
}

type Rhs<'a> = dyn Fn(&ComplexMatrix) -> ComplexMatrix + 'a;
type Post<'a> = dyn Fn(ComplexMatrix, f64) -> Result<ComplexMatrix> + 'a;

fn rk4_step(y: &ComplexMatrix, dt: f64, rhs: &Rhs) -> ComplexMatrix {
    let k1 = rhs(y);
    let k2 = rhs(&(y + &k1.scale_real(0.5 * dt)));
    let k3 = rhs(&(y + &k2.scale_real(0.5 * dt)));
    let k4 = rhs(&(y + &k3.scale_real(dt)));
    let mut incr = k1;
    incr += &k2.scale_real(2.0);
    incr += &k3.scale_real(2.0);
    incr += &k4;
    y + &incr.scale_real(dt / 6.0)
}

fn rk4_pass(y0: &ComplexMatrix, times: &[f64], dt: f64, rhs: &Rhs, post: &Post) -> Result<Vec<ComplexMatrix>> {
    let mut out = Vec::with_capacity(times.len());
    let mut y = y0.clone();
    out.push(y.clone());
    for w in times.windows(2) {
        let span = w[1] - w[0];
        let steps = ((span / dt).ceil() as usize).max(1);
        let h = span / steps as f64;
        for s in 0..steps {
            y = post(rk4_step(&y, h, rhs), w[0] + (s + 1) as f64 * h)?;
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Runs RK4 at `dt0`, `dt0/2`, … until successive passes agree.
fn rk4_converged(
    y0: &ComplexMatrix,
    grid: &TimeGrid,
    dt0: f64,
    opts: Rk4Options,
    rhs: &Rhs,
    post: &Post,
) -> Result<Vec<ComplexMatrix>> {
    let times = grid.times();
    let mut dt = dt0;
    let mut prev = rk4_pass(y0, times, dt, rhs, post)?;
    let mut difference = f64::INFINITY;
    for _ in 0..opts.max_halvings {
        dt *= 0.5;
        let next = rk4_pass(y0, times, dt, rhs, post)?;
        difference = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| a.frobenius_distance(b))
            .fold(0.0, f64::max);
        if difference < opts.tolerance {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::IntegratorStepFailure {
        time: grid.last(),
        halvings: opts.max_halvings,
        difference,
    })
}

fn default_step(opts: Rk4Options, scale: f64) -> f64 {
    opts.initial_step
        .unwrap_or(if scale > 0.0 { 1e-3 / scale } else { f64::INFINITY })
}

/// RK4 integration of the normalised flow, renormalising and symmetrising
/// after every step.
pub fn evolve_normalized_rk4(
    rho0: &DensityMatrix,
    h: &NonHermitianHamiltonian,
    grid: &TimeGrid,
    opts: Rk4Options,
) -> Result<Trajectory> {
    check_dim(rho0.dim(), h.dim(), "evolve_normalized_rk4")?;
    let scale = h.h1().one_norm() + h.h2().one_norm();
    let rhs = |r: &ComplexMatrix| normalized_flow_rhs(r, h);
    let post = |r: ComplexMatrix, t: f64| {
        let tr = r.trace().re;
        if !(tr > NORM_FLOOR) {
            return Err(Error::NormCollapse { time: t, trace: tr });
        }
        Ok(r.hermitian_part().scale_real(1.0 / tr))
    };
    let ys = rk4_converged(rho0.matrix(), grid, default_step(opts, scale), opts, &rhs, &post)?;
    Ok(Trajectory {
        times: grid.times().to_vec(),
        states: ys.into_iter().map(DensityMatrix::from_trusted).collect(),
        law: EvolutionLaw::NonHermitianNormalized,
    })
}

fn lindblad_rhs_builder<'a>(
    h: &'a ComplexMatrix,
    channels: &'a [JumpChannel],
) -> Result<(NonHermitianHamiltonian, impl Fn(&ComplexMatrix) -> ComplexMatrix + 'a, f64)> {
    let eff = crate::hamiltonians::effective_from_jumps(h, channels)?;
    let heff = eff.full();
    let scale = h.one_norm() + eff.h2().one_norm();
    let rhs = move |r: &ComplexMatrix| {
        let mi = C64::new(0.0, -1.0);
        // −i(H ρ − ρ H†) = −i H ρ + (−i H ρ)† for Hermitian ρ.
        let a = heff.matmul(r).scale(mi);
        let mut out = &a + &a.adjoint();
        for ch in channels {
            out += &ch.op().matmul(r).matmul_adjoint(ch.op()).scale_real(ch.rate());
        }
        out
    };
    Ok((eff, rhs, scale))
}

/// Lindblad master equation with the given jump channels, by RK4.
pub fn evolve_lindblad(
    rho0: &DensityMatrix,
    h: &ComplexMatrix,
    channels: &[JumpChannel],
    grid: &TimeGrid,
) -> Result<Trajectory> {
    evolve_lindblad_with(rho0, h, channels, grid, Rk4Options::default())
}

pub fn evolve_lindblad_with(
    rho0: &DensityMatrix,
    h: &ComplexMatrix,
    channels: &[JumpChannel],
    grid: &TimeGrid,
    opts: Rk4Options,
) -> Result<Trajectory> {
    check_dim(rho0.dim(), h.dim(), "evolve_lindblad")?;
    let (_, rhs, scale) = lindblad_rhs_builder(h, channels)?;
    let post = |r: ComplexMatrix, _t: f64| Ok(r.hermitian_part());
    let ys = rk4_converged(rho0.matrix(), grid, default_step(opts, scale), opts, &rhs, &post)?;
    Ok(Trajectory {
        times: grid.times().to_vec(),
        states: ys.into_iter().map(DensityMatrix::from_trusted).collect(),
        law: EvolutionLaw::Lindblad,
    })
}

/// Snapshot-wise marginals of a trajectory.
pub fn reduced_trajectory(traj: &Trajectory, dims: &[usize], keep: &[usize]) -> Result<Trajectory> {
    let states = traj
        .states
        .iter()
        .map(|s| s.partial_trace(dims, keep))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        times: traj.times.clone(),
        states,
        law: traj.law,
    })
}

/// Output of [`evolve_metric`].
///
/// `states[k] = |ψ_k><ψ_k| G_k / <ψ_k|G_k|ψ_k>` is in general not Hermitian,
/// so the snapshots are plain matrices rather than [`DensityMatrix`] values.
#[derive(Clone, Debug)]
pub struct MetricTrajectory {
    pub times: Vec<f64>,
    /// Unnormalised propagated kets `U_t |ψ0>`.
    pub kets: Vec<Vec<C64>>,
    /// Metric operators `G_t`.
    pub metrics: Vec<ComplexMatrix>,
    pub states: Vec<ComplexMatrix>,
}

impl MetricTrajectory {
    pub fn law(&self) -> EvolutionLaw {
        EvolutionLaw::Metric
    }

    /// `Re Tr(ρ_t²)` per snapshot.
    pub fn purities(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.trace_product(s).re).collect()
    }
}

/// Metric-operator evolution of a pure state: integrates
/// `dG/dt = i(G H − H† G)` from `G_0 = I` by RK4 and propagates
/// `|ψ_t> = exp(−itH)|ψ0>` in closed form.
pub fn evolve_metric(psi0: &[C64], h: &NonHermitianHamiltonian, grid: &TimeGrid) -> Result<MetricTrajectory> {
    evolve_metric_with(psi0, h, grid, Rk4Options::default())
}

pub fn evolve_metric_with(
    psi0: &[C64],
    h: &NonHermitianHamiltonian,
    grid: &TimeGrid,
    opts: Rk4Options,
) -> Result<MetricTrajectory> {
    check_dim(psi0.len(), h.dim(), "evolve_metric")?;
    let norm2: f64 = psi0.iter().map(|z| z.norm_sqr()).sum();
    if (norm2 - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("initial ket has squared norm {norm2}")));
    }
    let full = h.full();
    let full_adj = full.adjoint();
    let i = C64::new(0.0, 1.0);
    let rhs = |g: &ComplexMatrix| (&g.matmul(&full) - &full_adj.matmul(g)).scale(i);
    let post = |g: ComplexMatrix, t: f64| {
        if !min_eigenvalue_exceeds(&g, 1e-12) {
            return Err(Error::MetricPositivityLoss { time: t });
        }
        Ok(g.hermitian_part())
    };
    let scale = full.one_norm();
    let metrics = rk4_converged(
        &ComplexMatrix::identity(h.dim()),
        grid,
        default_step(opts, scale),
        opts,
        &rhs,
        &post,
    )?;

    let times = grid.times();
    let mut kets = Vec::with_capacity(times.len());
    kets.push(psi0.to_vec());
    let mut stepper = Stepper::new(&full);
    for w in times.windows(2) {
        let next = stepper.step(w[1] - w[0])?.mul_vec(kets.last().unwrap());
        kets.push(next);
    }

    let mut states = Vec::with_capacity(times.len());
    for (ket, g) in kets.iter().zip(&metrics) {
        let norm = g.quadratic_form(ket);
        // |ψ><ψ| G = |ψ> (G†|ψ>)† = |ψ> (G|ψ>)† for Hermitian G.
        let g_ket = g.mul_vec(ket);
        let n = ket.len();
        states.push(ComplexMatrix::from_fn(n, |a, b| ket[a] * g_ket[b].conj() / norm));
    }
    Ok(MetricTrajectory {
        times: times.to_vec(),
        kets,
        metrics,
        states,
    })
}

/// `d^n/dt^n Tr(ρ̃_t²)` at `t = 0` for `n ∈ {1, 2}`, from the analytic first
/// and second time derivatives of the normalised state.
pub fn purity_derivatives(rho0: &DensityMatrix, h: &NonHermitianHamiltonian, order: u32) -> Result<f64> {
    check_dim(rho0.dim(), h.dim(), "purity_derivatives")?;
    let rho = rho0.matrix();
    let d1 = normalized_flow_rhs(rho, h);
    match order {
        1 => Ok(2.0 * rho.trace_product(&d1).re),
        2 => {
            let i = C64::new(0.0, 1.0);
            let comm = &h.h1().matmul(&d1) - &d1.matmul(h.h1());
            let anti = &h.h2().matmul(&d1) + &d1.matmul(h.h2());
            let m0 = rho.trace_product(h.h2());
            let m1 = d1.trace_product(h.h2());
            let mut d2 = &comm.scale(-i) + &anti;
            d2 -= &rho.scale(m1 * 2.0);
            d2 -= &d1.scale(m0 * 2.0);
            Ok(2.0 * (d1.trace_product(&d1).re + rho.trace_product(&d2).re))
        }
        _ => Err(Error::OutOfRange {
            name: "order",
            value: order as f64,
            allowed: "1 or 2",
        }),
    }
}

/// `Tr((ρ0 + Δ)²) − Tr(ρ0²) = Tr(Δ (2ρ0 + Δ))`, evaluated from the
/// increment `Δ` so that small changes are not lost to cancellation.
fn purity_change(rho0: &ComplexMatrix, delta: &ComplexMatrix) -> f64 {
    let mut two_rho = rho0.scale_real(2.0);
    two_rho += delta;
    delta.trace_product(&two_rho).re
}

/// Turns an unnormalised increment `Δ = Uρ0U† − ρ0` into the increment of
/// the normalised state, `(Δ − τ ρ0)/(1 + τ)` with `τ = Tr Δ`.
fn normalize_increment(rho0: &ComplexMatrix, delta: ComplexMatrix) -> ComplexMatrix {
    let tau = delta.trace().re;
    (&delta - &rho0.scale_real(tau)).scale_real(1.0 / (1.0 + tau))
}

/// `f(ρ̃_t) − f(ρ0)` for the normalised flow, for positive or negative `t`,
/// computed without forming `f(ρ̃_t)` itself.
pub fn normalized_purity_increment(rho0: &DensityMatrix, h: &NonHermitianHamiltonian, t: f64) -> Result<f64> {
    check_dim(rho0.dim(), h.dim(), "normalized_purity_increment")?;
    let full = h.full();
    let rho = rho0.matrix();
    if let Some(eig) = normal_eigen(&full, NORMAL_TOL) {
        // In the orthonormal eigenbasis only the moduli |e^{-iλt}|² = 1 + x
        // matter: the unnormalised purity gains δP = Σ |ρ_ab|² (x_a + x_b +
        // x_a x_b) and the trace gains τ = Σ ρ_aa x_a.
        let v = &eig.vectors;
        let rho_hat = v.adjoint().matmul(rho).matmul(v);
        let x: Vec<f64> = eig.values.iter().map(|l| (2.0 * t * l.im).exp_m1()).collect();
        let n = rho.dim();
        let (mut p0, mut dp, mut tau) = (0.0, 0.0, 0.0);
        for a in 0..n {
            tau += rho_hat[(a, a)].re * x[a];
            for b in 0..n {
                let w = rho_hat[(a, b)].norm_sqr();
                p0 += w;
                dp += w * (x[a] + x[b] + x[a] * x[b]);
            }
        }
        return Ok((dp - p0 * tau * (2.0 + tau)) / ((1.0 + tau) * (1.0 + tau)));
    }
    let k = matrix_expm1(&full.scale(C64::new(0.0, -t)))?;
    let kr = k.matmul(rho);
    let mut delta = &kr + &kr.adjoint();
    delta += &kr.matmul_adjoint(&k);
    let delta = normalize_increment(rho, delta);
    Ok(purity_change(rho, &delta))
}

/// `f(ρ_t) − f(ρ0)` for the Lindblad equation over one RK4 step of size `t`.
/// Intended for `|t|` small compared with the inverse energy scale.
pub fn lindblad_purity_increment(
    rho0: &DensityMatrix,
    h: &ComplexMatrix,
    channels: &[JumpChannel],
    t: f64,
) -> Result<f64> {
    check_dim(rho0.dim(), h.dim(), "lindblad_purity_increment")?;
    let (_, rhs, _) = lindblad_rhs_builder(h, channels)?;
    let rho = rho0.matrix();
    let k1 = rhs(rho);
    let k2 = rhs(&(rho + &k1.scale_real(0.5 * t)));
    let k3 = rhs(&(rho + &k2.scale_real(0.5 * t)));
    let k4 = rhs(&(rho + &k3.scale_real(t)));
    let mut incr = k1;
    incr += &k2.scale_real(2.0);
    incr += &k3.scale_real(2.0);
    incr += &k4;
    let delta = incr.scale_real(t / 6.0).hermitian_part();
    Ok(purity_change(rho, &delta))
}

/// First and second derivatives at 0 of a function given through its
/// increments `δ(s) = g(s) − g(0)`: central differences at `h` and `h/2`
/// combined by one Richardson step.
pub fn richardson_derivatives(delta: impl Fn(f64) -> Result<f64>, h: f64) -> Result<(f64, f64)> {
    let central = |s: f64| -> Result<(f64, f64)> {
        let (p, m) = (delta(s)?, delta(-s)?);
        Ok(((p - m) / (2.0 * s), (p + m) / (s * s)))
    };
    let (d1h, d2h) = central(h)?;
    let (d1q, d2q) = central(0.5 * h)?;
    Ok(((4.0 * d1q - d1h) / 3.0, (4.0 * d2q - d2h) / 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{driven_qubit, effective_from_jumps};
    use crate::linalg::pauli;
    use crate::states::{qubit_from_bloch, BlochParams};
    use std::f64::consts::FRAC_PI_4;

    fn qubit_setup(omega: f64) -> (DensityMatrix, NonHermitianHamiltonian) {
        let g = 1.0;
        let rho = qubit_from_bloch(BlochParams::new(0.25, FRAC_PI_4, FRAC_PI_4).unwrap());
        let h = effective_from_jumps(&driven_qubit(0.5 * g, omega * g), &[JumpChannel::qubit_decay(g).unwrap()])
            .unwrap();
        (rho, h)
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![0.1, 0.2]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.2, 0.1]).is_err());
        let g = TimeGrid::linspace(1.0, 5).unwrap();
        assert_eq!(g.times(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn closed_form_matches_rk4_oracle() {
        let (rho, h) = qubit_setup(1.0);
        let grid = TimeGrid::linspace(0.5, 11).unwrap();
        let exact = evolve_normalized(&rho, &h, &grid).unwrap();
        let opts = Rk4Options {
            initial_step: Some(1e-4),
            ..Rk4Options::default()
        };
        let rk = evolve_normalized_rk4(&rho, &h, &grid, opts).unwrap();
        for (a, b) in exact.states.iter().zip(&rk.states) {
            assert!(a.matrix().frobenius_distance(b.matrix()) < 1e-8);
        }
        assert_eq!(exact.states[0], rho);
    }

    #[test]
    fn unitary_limit_keeps_entropy() {
        let rho = qubit_from_bloch(BlochParams::new(0.6, 1.0, 2.0).unwrap());
        let h = NonHermitianHamiltonian::hermitian(driven_qubit(0.4, 1.7)).unwrap();
        let traj = evolve_normalized(&rho, &h, &TimeGrid::linspace(3.0, 31).unwrap()).unwrap();
        let s0 = linear_entropy(&rho).unwrap();
        for s in traj.linear_entropies().unwrap() {
            assert!((s - s0).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_decay_population() {
        let g = 0.7;
        let excited = DensityMatrix::from_ket(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let grid = TimeGrid::linspace(2.0, 21).unwrap();
        let traj = evolve_lindblad(&excited, &driven_qubit(0.0, 0.0), &[JumpChannel::qubit_decay(g).unwrap()], &grid)
            .unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((s.matrix()[(1, 1)].re - (-g * t).exp()).abs() < 1e-7);
            assert!((s.matrix().trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lindblad_without_channels_is_unitary() {
        let rho = qubit_from_bloch(BlochParams::new(0.8, 0.3, 1.0).unwrap());
        let h = driven_qubit(0.2, 1.1);
        let grid = TimeGrid::linspace(2.0, 9).unwrap();
        let lind = evolve_lindblad(&rho, &h, &[], &grid).unwrap();
        let nh = evolve_normalized(&rho, &NonHermitianHamiltonian::hermitian(h).unwrap(), &grid).unwrap();
        for (a, b) in lind.states.iter().zip(&nh.states) {
            assert!(a.matrix().frobenius_distance(b.matrix()) < 1e-9);
        }
    }

    #[test]
    fn metric_is_identity_for_hermitian_generator() {
        let h = NonHermitianHamiltonian::hermitian(pauli::x()).unwrap();
        let psi = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let traj = evolve_metric(&psi, &h, &TimeGrid::linspace(1.0, 5).unwrap()).unwrap();
        for g in &traj.metrics {
            assert!(g.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        }
        for p in traj.purities() {
            assert!((p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_orders() {
        let (rho, h) = qubit_setup(1.0);
        assert!(purity_derivatives(&rho, &h, 3).is_err());
        let (d1, d2) = richardson_derivatives(|t| normalized_purity_increment(&rho, &h, t), 1e-3).unwrap();
        assert!((purity_derivatives(&rho, &h, 1).unwrap() - d1).abs() < 1e-9);
        assert!((purity_derivatives(&rho, &h, 2).unwrap() - d2).abs() < 1e-7);
    }

    #[test]
    fn increment_matches_direct_purity() {
        let (rho, h) = qubit_setup(2.0);
        let t = 0.3;
        let traj = evolve_normalized(&rho, &h, &TimeGrid::new(vec![0.0, t]).unwrap()).unwrap();
        let direct = purity(&traj.states[1]) - purity(&rho);
        assert!((normalized_purity_increment(&rho, &h, t).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn norm_collapse_is_reported() {
        let h = NonHermitianHamiltonian::new(ComplexMatrix::zeros(2), ComplexMatrix::identity(2).scale_real(-1.0))
            .unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        let err = evolve_normalized(&rho, &h, &TimeGrid::new(vec![0.0, 1.0, 20.0]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NormCollapse { .. }));
    }
}
