//! One function per subcommand. Each returns its tables; writing them is
//! left to the caller so the data can be checked in memory.

use rayon::prelude::*;

use metaline_core::dispersion::dom_approx_total;
use metaline_core::dynamics::{entropy_scan_with, Propagator};
use metaline_core::modes::{coupling_spectrum_with, qubit_at_antinode, SpatialFactor};
use metaline_core::spinboson::{phase_diagram_from, SweepResult};
use metaline_core::units::rad_to_ghz;
use metaline_core::{
    apply_disorder, build_matrices, build_rwa_hamiltonian, solve_modes, sweep_coupling,
    voltage_profile, CircuitSpec, CouplingSpectrum, ModeSet, QubitSpec,
};

use crate::config::{Placement, RunConfig};
use crate::csv::{Cell, Table};
use crate::error::CliError;

/// Population below which a mode is ignored by the entanglement witness.
pub const WITNESS_MIN_POPULATION: f64 = 1e-6;
/// Relative coupling below which `dynamics.truncate` drops a mode.
pub const TRUNCATION_THRESHOLD: f64 = 1e-3;

fn ln10() -> f64 {
    std::f64::consts::LN_10
}

fn circuit_comments(t: &mut Table, cfg: &RunConfig) {
    let c = &cfg.circuit;
    t.comment(format!(
        "omega_ir_ghz = {}",
        crate::csv::format_number(rad_to_ghz(c.omega_ir()))
    ));
    t.comment(format!(
        "circuit: n_left = {}, c_left = {:e} F, l_left = {:e} H, pitch = {:e} m, rhtl_length = {:e} m, n_right = {}",
        c.n_left, c.c_left, c.l_left, c.cell_pitch, c.rhtl_length, c.n_right
    ));
}

/// Modes, their couplings and the qubit they were computed for.
pub struct Coupled {
    pub modes: ModeSet,
    pub qubit: QubitSpec,
    pub main: CouplingSpectrum,
    /// Same weighting with the spatial factor forced to 1.
    pub flat: CouplingSpectrum,
}

pub fn solve(spec: &CircuitSpec) -> Result<ModeSet, CliError> {
    Ok(solve_modes(&build_matrices(spec)?, None)?)
}

pub fn couple(cfg: &RunConfig, spec: &CircuitSpec, delta0: f64) -> Result<Coupled, CliError> {
    let modes = solve(spec)?;
    let q = &cfg.qubit;
    let qubit = match q.placement {
        Placement::At(x) => {
            let qs = QubitSpec {
                delta0,
                position: x,
                extent: q.extent,
                g_global: q.g_global,
            };
            qs.validate(spec)?;
            qs
        }
        Placement::Antinode(target) => {
            qubit_at_antinode(&modes, spec, target, q.extent, delta0, q.g_global)?
        }
    };
    let main = coupling_spectrum_with(
        &modes,
        spec,
        &qubit,
        q.normalization,
        SpatialFactor::Footprint,
    )?;
    let flat = coupling_spectrum_with(&modes, spec, &qubit, q.normalization, SpatialFactor::Unity)?;
    Ok(Coupled {
        modes,
        qubit,
        main,
        flat,
    })
}

fn in_window(w: f64, window: Option<(f64, f64)>) -> bool {
    window.is_none_or(|(lo, hi)| w >= lo && w <= hi)
}

pub fn cmd_modes(cfg: &RunConfig, profiles: bool) -> Result<Vec<Table>, CliError> {
    let spec = &cfg.circuit;
    let omega_ir = spec.omega_ir();
    // the coupling needs Δ₀ only for validation
    let delta0 = cfg.qubit.delta0.unwrap_or(1.1 * omega_ir);
    let c = couple(cfg, spec, delta0)?;
    let keep: Vec<usize> = (0..c.modes.len())
        .filter(|&n| in_window(c.modes.frequencies[n], cfg.modes_window))
        .collect();

    let mut modes_t = Table::new(
        "modes.csv",
        &["n", "freq_ghz", "freq_over_ir", "lhtl_energy_fraction"],
    );
    circuit_comments(&mut modes_t, cfg);
    for &n in &keep {
        let w = c.modes.frequencies[n];
        modes_t.push(vec![
            n.into(),
            rad_to_ghz(w).into(),
            (w / omega_ir).into(),
            c.modes.lhtl_energy_fraction(spec, n)?.into(),
        ]);
    }

    let mut dom_t = Table::new("dom.csv", &["freq_ghz", "d_numeric", "d_approx"]);
    circuit_comments(&mut dom_t, cfg);
    dom_t.comment(
        "d_numeric = 1/(w[n+1] - w[n]) per rad/s; d_approx includes the right-handed background",
    );
    for pair in keep.windows(2) {
        let (w0, w1) = (c.modes.frequencies[pair[0]], c.modes.frequencies[pair[1]]);
        let approx = if w0 > omega_ir {
            dom_approx_total(w0, spec)?
        } else {
            f64::NAN
        };
        dom_t.push(vec![
            rad_to_ghz(w0).into(),
            (1.0 / (w1 - w0)).into(),
            approx.into(),
        ]);
    }

    let mut coup_t = Table::new(
        "couplings.csv",
        &["n", "freq_ghz", "relative_profile", "g_ghz"],
    );
    circuit_comments(&mut coup_t, cfg);
    coup_t.comment(format!(
        "qubit: position = {:e} m, extent = {:e} m, g_ghz = {}, normalization = {:?}",
        c.qubit.position,
        c.qubit.extent,
        crate::csv::format_number(rad_to_ghz(c.qubit.g_global)),
        cfg.qubit.normalization
    ));
    for &n in &keep {
        coup_t.push(vec![
            n.into(),
            rad_to_ghz(c.main.frequencies[n]).into(),
            c.main.relative_profile[n].into(),
            rad_to_ghz(c.main.couplings[n]).into(),
        ]);
    }

    let mut out = vec![modes_t, dom_t, coup_t];
    if profiles {
        let mut p = Table::new("profiles.csv", &["n", "node", "x_m", "flux", "voltage"]);
        circuit_comments(&mut p, cfg);
        for &n in &keep {
            let v = voltage_profile(&c.modes, n)?;
            for (node, volt) in v.iter().enumerate() {
                p.push(vec![
                    n.into(),
                    node.into(),
                    c.modes.node_positions[node].into(),
                    c.modes.profiles[(node, n)].into(),
                    (*volt).into(),
                ]);
            }
        }
        out.push(p);
    }
    Ok(out)
}

/// Entropy reports at each configured tg, for the modes that take part.
pub struct DynamicsRun {
    pub mode_index: Vec<usize>,
    pub frequencies: Vec<f64>,
    pub reports: Vec<metaline_core::EntropyReport>,
    pub tg: Vec<f64>,
}

pub fn run_dynamics(cfg: &RunConfig) -> Result<DynamicsRun, CliError> {
    let delta0 = cfg.delta0()?;
    let g = cfg.qubit.g_global;
    if !(g > 0.0) {
        return Err(CliError::Config(
            "dynamics needs qubit.g_ghz or qubit.g_over_ir > 0".to_string(),
        ));
    }
    let c = couple(cfg, &cfg.circuit, delta0)?;
    let keep: Vec<usize> = (0..c.main.len())
        .filter(|&n| in_window(c.main.frequencies[n], cfg.dynamics.window))
        .filter(|&n| !cfg.dynamics.truncate || c.main.relative_profile[n] >= TRUNCATION_THRESHOLD)
        .collect();
    if keep.is_empty() {
        return Err(CliError::Config("no modes left for dynamics".to_string()));
    }
    let sub = CouplingSpectrum {
        couplings: keep.iter().map(|&n| c.main.couplings[n]).collect(),
        relative_profile: keep.iter().map(|&n| c.main.relative_profile[n]).collect(),
        frequencies: keep.iter().map(|&n| c.main.frequencies[n]).collect(),
    };
    let h = build_rwa_hamiltonian(&sub, delta0)?;
    let prop = Propagator::new(&h)?;
    let reports = cfg
        .dynamics
        .tg
        .par_iter()
        .map(|&tg| {
            entropy_scan_with(&prop, tg / g).map(|mut r| {
                r.time = tg;
                r
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DynamicsRun {
        mode_index: keep,
        frequencies: sub.frequencies,
        reports,
        tg: cfg.dynamics.tg.clone(),
    })
}

pub fn cmd_dynamics(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let run = run_dynamics(cfg)?;
    let mut t = Table::new(
        "entropy.csv",
        &["tg", "n", "freq_ghz", "population", "e_n", "e_q"],
    );
    circuit_comments(&mut t, cfg);
    t.comment(format!(
        "rotating-wave single-excitation dynamics; entropies in nats; delta0_ghz = {}, g_ghz = {}, modes = {}",
        crate::csv::format_number(rad_to_ghz(cfg.delta0()?)),
        crate::csv::format_number(rad_to_ghz(cfg.qubit.g_global)),
        run.mode_index.len()
    ));
    let witness = run
        .reports
        .iter()
        .filter(|r| r.time > 0.0)
        .all(|r| r.witness_holds(WITNESS_MIN_POPULATION));
    t.comment(format!("witness E_n >= E_q > 0 at every tg > 0: {witness}"));
    for r in &run.reports {
        for (k, &n) in run.mode_index.iter().enumerate() {
            t.push(vec![
                r.time.into(),
                n.into(),
                rad_to_ghz(run.frequencies[k]).into(),
                r.populations[k].into(),
                r.e_per_mode[k].into(),
                r.e_qubit.into(),
            ]);
        }
    }
    Ok(vec![t])
}

pub fn run_renorm(cfg: &RunConfig) -> Result<SweepResult, CliError> {
    let delta0 = cfg.delta0()?;
    if cfg.renorm.g_over_ir.is_empty() {
        return Err(CliError::Config(
            "renorm.g_over_ir grid is required".to_string(),
        ));
    }
    let c = couple(cfg, &cfg.circuit, delta0)?;
    let w_ir = cfg.omega_ir();
    let g: Vec<f64> = cfg.renorm.g_over_ir.iter().map(|x| x * w_ir).collect();
    Ok(sweep_coupling(
        &c.main,
        Some(&c.flat),
        delta0,
        &g,
        cfg.renorm.variant,
    )?)
}

pub fn cmd_renorm(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let s = run_renorm(cfg)?;
    if let Some(p) = s
        .main
        .points
        .iter()
        .chain(&s.companion.points)
        .find(|p| !p.converged)
    {
        return Err(CliError::Numerical(metaline_core::Error::Divergent(
            format!("renormalization did not converge at g = {} rad/s", p.g),
        )));
    }
    let w_ir = cfg.omega_ir();
    let mut t = Table::new(
        "renorm.csv",
        &[
            "g_over_ir",
            "g_ghz",
            "delta_eff_ghz",
            "log10_ratio",
            "phase",
            "flat_delta_eff_ghz",
            "flat_log10_ratio",
            "flat_phase",
        ],
    );
    circuit_comments(&mut t, cfg);
    t.comment(format!(
        "delta0_over_ir = {}, variant = {:?}, normalization = {:?}",
        crate::csv::format_number(s.delta0 / w_ir),
        cfg.renorm.variant,
        cfg.qubit.normalization
    ));
    for j in &s.jumps {
        t.comment(format!(
            "jump: g_star_over_ir = {}, decades = {}",
            crate::csv::format_number(j.g_star / w_ir),
            crate::csv::format_number(j.decades)
        ));
    }
    for (m, f) in s.main.points.iter().zip(&s.companion.points) {
        t.push(vec![
            (m.g / w_ir).into(),
            rad_to_ghz(m.g).into(),
            rad_to_ghz(m.delta_eff).into(),
            (m.log_ratio / ln10()).into(),
            m.phase.as_str().into(),
            rad_to_ghz(f.delta_eff).into(),
            (f.log_ratio / ln10()).into(),
            f.phase.as_str().into(),
        ]);
    }
    let mut jt = Table::new(
        "jumps.csv",
        &["g_star_over_ir", "g_lo_over_ir", "g_hi_over_ir", "decades"],
    );
    circuit_comments(&mut jt, cfg);
    for j in &s.jumps {
        jt.push(vec![
            (j.g_star / w_ir).into(),
            (j.g_lo / w_ir).into(),
            (j.g_hi / w_ir).into(),
            j.decades.into(),
        ]);
    }
    Ok(vec![t, jt])
}

pub fn run_phase(
    cfg: &RunConfig,
    spec: &CircuitSpec,
) -> Result<metaline_core::PhaseDiagram, CliError> {
    let p = &cfg.phase;
    if p.g_over_ir.is_empty() || p.delta0_over_ir.is_empty() {
        return Err(CliError::Config(
            "phase.g_over_ir and phase.delta0_over_ir grids are required".to_string(),
        ));
    }
    if let Some(d) = p.delta0_over_ir.iter().find(|&&d| !(d > 1.0)) {
        return Err(CliError::Config(format!(
            "phase.delta0_over_ir values must lie above the cutoff (got {d})"
        )));
    }
    let w_ir = spec.omega_ir();
    let d0: Vec<f64> = p.delta0_over_ir.iter().map(|x| x * w_ir).collect();
    let g: Vec<f64> = p.g_over_ir.iter().map(|x| x * w_ir).collect();
    let c = couple(cfg, spec, d0[0])?;
    Ok(phase_diagram_from(&c.main, &g, &d0, p.variant)?)
}

pub fn cmd_phase(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let pd = run_phase(cfg, &cfg.circuit)?;
    let w_ir = cfg.omega_ir();
    let mut t = Table::new(
        "phase.csv",
        &[
            "delta0_over_ir",
            "g_over_ir",
            "delta_eff_ghz",
            "log10_ratio",
            "phase",
        ],
    );
    circuit_comments(&mut t, cfg);
    t.comment(format!(
        "variant = {:?}, normalization = {:?}",
        cfg.phase.variant, cfg.qubit.normalization
    ));
    for (i, &d0) in pd.delta0_axis.iter().enumerate() {
        for (j, &g) in pd.g_axis.iter().enumerate() {
            t.push(vec![
                (d0 / w_ir).into(),
                (g / w_ir).into(),
                rad_to_ghz(pd.delta_eff_grid[i][j]).into(),
                (pd.log_ratio_grid[i][j] / ln10()).into(),
                pd.phase_grid[i][j].as_str().into(),
            ]);
        }
    }
    let mut b = Table::new(
        "boundary.csv",
        &["g_star_over_ir", "delta0_over_ir", "g_star_ghz"],
    );
    circuit_comments(&mut b, cfg);
    b.comment("g_star: first coupling with delta_eff/delta0 < 1e-3, refined by bisection; nan if none in range");
    for &(d0, gs) in &pd.boundary {
        let gs = gs.unwrap_or(f64::NAN);
        b.push(vec![
            (gs / w_ir).into(),
            (d0 / w_ir).into(),
            rad_to_ghz(gs).into(),
        ]);
    }
    Ok(vec![t, b])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisorderSample {
    pub seed: u64,
    /// Lowest left-handed band mode (rad/s); NaN if the band is empty.
    pub edge: f64,
    pub band_count: usize,
}

pub fn run_disorder(cfg: &RunConfig) -> Result<Vec<DisorderSample>, CliError> {
    let d = &cfg.disorder;
    let (lo, hi) = d.band;
    (d.seed_base..d.seed_base + d.seeds)
        .into_par_iter()
        .map(|seed| {
            let spec = apply_disorder(&cfg.circuit, d.sigma, seed)?;
            let modes = solve(&spec)?;
            let band = modes.lhtl_band(&spec)?;
            let edge = band.first().map_or(f64::NAN, |&i| modes.frequencies[i]);
            let band_count = modes
                .frequencies
                .iter()
                .filter(|&&w| w >= lo && w <= hi)
                .count();
            Ok(DisorderSample {
                seed,
                edge,
                band_count,
            })
        })
        .collect()
}

/// Mean and population standard deviation.
pub fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn cmd_disorder(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let samples = run_disorder(cfg)?;
    let w_ir = cfg.omega_ir();
    let mut t = Table::new(
        "disorder.csv",
        &["kind", "seed", "edge_ghz", "edge_over_ir", "band_count"],
    );
    circuit_comments(&mut t, cfg);
    t.comment(format!(
        "sigma = {}, seeds = {}, band_ghz = [{}, {}], stddev is the population value",
        crate::csv::format_number(cfg.disorder.sigma),
        cfg.disorder.seeds,
        crate::csv::format_number(rad_to_ghz(cfg.disorder.band.0)),
        crate::csv::format_number(rad_to_ghz(cfg.disorder.band.1))
    ));
    for s in &samples {
        t.push(vec![
            "sample".into(),
            s.seed.into(),
            rad_to_ghz(s.edge).into(),
            (s.edge / w_ir).into(),
            Cell::Num(s.band_count as f64),
        ]);
    }
    let edges: Vec<f64> = samples.iter().map(|s| s.edge).collect();
    let counts: Vec<f64> = samples.iter().map(|s| s.band_count as f64).collect();
    let (em, es) = mean_std(&edges);
    let (cm, cs) = mean_std(&counts);
    t.push(vec![
        "mean".into(),
        Cell::Text(String::new()),
        rad_to_ghz(em).into(),
        (em / w_ir).into(),
        cm.into(),
    ]);
    t.push(vec![
        "stddev".into(),
        Cell::Text(String::new()),
        rad_to_ghz(es).into(),
        (es / w_ir).into(),
        cs.into(),
    ]);
    Ok(vec![t])
}
