//! Figure pipelines. All rates are in units of the decay rate `γ = 1` for the
//! qubit figures and of the coupling `J` for the spin-chain figures.

use std::f64::consts::PI;

use mixedness::dynamics::{
    evolve_lindblad, evolve_normalized, lindblad_purity_increment, normalized_purity_increment,
    richardson_derivatives, visit_normalized, TimeGrid,
};
use mixedness::hamiltonians::{
    driven_qubit, effective_from_jumps, ising_all_to_all, xy_chain, JumpChannel, NonHermitianHamiltonian,
};
use mixedness::states::{ghz_mixed_state, linear_entropy, qubit_from_bloch, BlochParams};
use mixedness::timescales::{
    ghz_xy_coefficients, qubit_coefficients, short_time_entropy, short_time_entropy_bipartite,
    BipartiteCoefficients, TimescaleReport,
};
use mixedness::{ComplexMatrix, Result};

use crate::config::{Experiment, ExperimentConfig};
use crate::csv::{Cell, Table};
use crate::error::CliResult;

/// Runs the pipeline named in `cfg`.
pub fn run(cfg: &ExperimentConfig) -> CliResult<Table> {
    let table = match cfg.pipeline {
        Experiment::Fig1 => fig1(cfg)?,
        Experiment::Fig2 => fig2(cfg)?,
        Experiment::Fig3 => ghz_sweep(cfg, false)?,
        Experiment::Fig4 | Experiment::Fig5 => ghz_sweep(cfg, true)?,
        Experiment::Fig6 => derivative_sweep(cfg, 1)?,
        Experiment::Fig7 => derivative_sweep(cfg, 2)?,
        Experiment::Custom => unreachable!("resolved configs always name a figure pipeline"),
    };
    Ok(table)
}

/// `n` evenly spaced points on `[0, max]`, with both ends exact.
fn mesh(max: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if i + 1 == n { max } else { max * (i as f64 / (n - 1) as f64) })
}

fn qubit_channels() -> Result<[JumpChannel; 1]> {
    Ok([JumpChannel::qubit_decay(1.0)?])
}

/// The driven qubit with `γ = 1` and its effective non-Hermitian generator.
fn decaying_qubit(delta: f64, omega: f64) -> Result<(ComplexMatrix, NonHermitianHamiltonian)> {
    let h = driven_qubit(delta, omega);
    let eff = effective_from_jumps(&h, &qubit_channels()?)?;
    Ok((h, eff))
}

pub fn fig1(cfg: &ExperimentConfig) -> CliResult<Table> {
    let mut t = Table::new(
        cfg.header_json(),
        &["omega_over_gamma", "r", "theta", "t1_inv_dimless", "t2_inv_sq_dimless"],
    );
    for &w in &cfg.omega_over_gamma {
        for r in mesh(1.0, cfg.r_steps) {
            for theta in mesh(PI, cfg.theta_steps) {
                let (t1, t2) = qubit_coefficients(BlochParams::new(r, theta, cfg.phi)?, w);
                t.push(vec![w.into(), r.into(), theta.into(), t1.into(), t2.into()]);
            }
        }
    }
    Ok(t)
}

pub fn fig2(cfg: &ExperimentConfig) -> CliResult<Table> {
    let mut t = Table::new(
        cfg.header_json(),
        &[
            "r",
            "theta",
            "omega_over_gamma",
            "gamma_t",
            "sl_const",
            "sl_lindblad",
            "sl_nonhermitian_exact",
            "sl_short_time",
        ],
    );
    let grid = TimeGrid::linspace(cfg.t_max, cfg.steps)?;
    for &r in &cfg.r {
        for &theta in &cfg.theta {
            let rho0 = qubit_from_bloch(BlochParams::new(r, theta, cfg.phi)?);
            let sl0 = linear_entropy(&rho0)?;
            for &w in &cfg.omega_over_gamma {
                let (h, eff) = decaying_qubit(cfg.delta_over_gamma, w)?;
                let exact = evolve_normalized(&rho0, &eff, &grid)?.linear_entropies()?;
                let lindblad = evolve_lindblad(&rho0, &h, &qubit_channels()?, &grid)?.linear_entropies()?;
                let report = short_time_entropy(&rho0, &eff)?;
                for (i, &time) in grid.times().iter().enumerate() {
                    t.push(vec![
                        r.into(),
                        theta.into(),
                        w.into(),
                        time.into(),
                        sl0.into(),
                        lindblad[i].into(),
                        exact[i].into(),
                        report.predict(time).into(),
                    ]);
                }
            }
        }
    }
    Ok(t)
}

/// The open XY chain plus `i` times the all-to-all Ising coupling.
pub fn ghz_hamiltonian(n: usize, j: f64, gamma_anis: f64, h: f64, jz: f64) -> Result<NonHermitianHamiltonian> {
    NonHermitianHamiltonian::new(xy_chain(n, j, gamma_anis, h)?, ising_all_to_all(n, jz)?)
}

fn closed_form_report(entropy0: f64, dim: usize, c: BipartiteCoefficients) -> TimescaleReport {
    TimescaleReport {
        entropy0,
        t1_inv: c.t1_inv(),
        t2_inv_sq: c.t2_inv_sq(),
        dim,
        split: Some(c),
    }
}

/// Pipelines fig3 to fig5. The exact marginal entropies come from one trajectory per
/// mixing weight. Without `closed_forms` the predictor uses the generic
/// bipartite coefficients; with it, the GHZ closed forms at the configured
/// `Jz` and at `Jz = 0`.
fn ghz_sweep(cfg: &ExperimentConfig, closed_forms: bool) -> CliResult<Table> {
    let mut columns = vec!["jt", "k", "p", "sl_exact", "sl_short_time"];
    if closed_forms {
        columns.push("sl_short_time_hermitian");
    }
    let mut t = Table::new(cfg.header_json(), &columns);
    let (n, j) = (cfg.n, cfg.j);
    let jz = cfg.jz_over_j * j;
    let h = ghz_hamiltonian(n, j, cfg.gamma_anis, cfg.h, jz)?;
    let grid = TimeGrid::linspace(cfg.t_max / j, cfg.steps)?;
    let splits: Vec<(usize, usize)> = cfg.k.iter().map(|&k| (1 << k, 1 << (n - k))).collect();

    for &p in &cfg.p {
        let rho0 = ghz_mixed_state(n, p)?;
        let mut predictors = Vec::with_capacity(cfg.k.len());
        for (&k, &dims) in cfg.k.iter().zip(&splits) {
            let generic = short_time_entropy_bipartite(&rho0, dims, &h)?;
            if closed_forms {
                let with = ghz_xy_coefficients(n, k, p, j, cfg.gamma_anis, jz)?;
                let without = ghz_xy_coefficients(n, k, p, j, cfg.gamma_anis, 0.0)?;
                predictors.push((
                    closed_form_report(generic.entropy0, dims.0, with),
                    Some(closed_form_report(generic.entropy0, dims.0, without)),
                ));
            } else {
                predictors.push((generic, None));
            }
        }

        // exact[k_index][time_index]
        let mut exact = vec![Vec::with_capacity(grid.len()); splits.len()];
        visit_normalized(&rho0, &h, &grid, |_, rho| {
            for (col, &(da, db)) in exact.iter_mut().zip(&splits) {
                col.push(linear_entropy(&rho.partial_trace(&[da, db], &[0])?)?);
            }
            Ok(())
        })?;

        for (ki, &k) in cfg.k.iter().enumerate() {
            let (pred, herm) = &predictors[ki];
            for (ti, &time) in grid.times().iter().enumerate() {
                let mut row: Vec<Cell> = vec![
                    (j * time).into(),
                    k.into(),
                    p.into(),
                    exact[ki][ti].into(),
                    pred.predict(time).into(),
                ];
                if let Some(herm) = herm {
                    row.push(herm.predict(time).into());
                }
                t.push(row);
            }
        }
    }
    Ok(t)
}

/// Pipelines fig6 and fig7: purity derivatives at `t = 0` from Richardson-extrapolated
/// central differences, next to the closed-form rates. `order = 1` gives
/// `f'(0)` against `1/T1`; `order = 2` gives `f''(0)/2` against `1/T2²`.
fn derivative_sweep(cfg: &ExperimentConfig, order: u32) -> CliResult<Table> {
    let mut t = Table::new(
        cfg.header_json(),
        &[
            "omega_over_gamma",
            "theta",
            "r",
            "deriv_unitary",
            "deriv_lindblad",
            "deriv_nonhermitian",
            "timescale_formula",
        ],
    );
    let pick = |(d1, d2): (f64, f64)| if order == 1 { d1 } else { 0.5 * d2 };
    let channels = qubit_channels()?;
    for &w in &cfg.omega_over_gamma {
        let (h, eff) = decaying_qubit(cfg.delta_over_gamma, w)?;
        let unitary = NonHermitianHamiltonian::hermitian(h.clone())?;
        for &theta in &cfg.theta {
            for r in mesh(1.0, cfg.r_steps) {
                let b = BlochParams::new(r, theta, cfg.phi)?;
                let rho0 = qubit_from_bloch(b);
                let step = cfg.fd_step;
                let du = richardson_derivatives(|s| normalized_purity_increment(&rho0, &unitary, s), step)?;
                let dl = richardson_derivatives(|s| lindblad_purity_increment(&rho0, &h, &channels, s), step)?;
                let dn = richardson_derivatives(|s| normalized_purity_increment(&rho0, &eff, s), step)?;
                let (t1, t2) = qubit_coefficients(b, w);
                let formula = if order == 1 { t1 } else { t2 };
                t.push(vec![
                    w.into(),
                    theta.into(),
                    r.into(),
                    pick(du).into(),
                    pick(dl).into(),
                    pick(dn).into(),
                    formula.into(),
                ]);
            }
        }
    }
    Ok(t)
}
