//! Adiabatic renormalization of the qubit splitting by the discrete bath and
//! the localization transition it produces.
//!
//! All dressing sums are carried in log space, `L = ln(Δ_eff/Δ₀) = −2Σλ²`,
//! so deep in the localized phase the splitting can underflow to 0 without
//! losing the information needed to compare neighbouring couplings.

use rayon::prelude::*;

use crate::circuit::{build_matrices, CircuitSpec};
use crate::error::{Error, Result};
use crate::modes::{
    coupling_spectrum, solve_modes, CouplingNormalization, CouplingSpectrum, QubitSpec,
};

/// Δ_eff/Δ₀ below which the qubit is labelled localized.
pub const LOCALIZATION_THRESHOLD: f64 = 1e-3;
pub const MAX_ITERATIONS: usize = 10_000;
pub const REL_TOL: f64 = 1e-10;
/// Relative width in g at which jump and boundary bisection stop.
pub const BISECTION_TOL: f64 = 1e-4;
/// Adjacent-point drop factor that flags a jump.
pub const JUMP_FACTOR: f64 = 10.0;

/// How λ_n follows from g_n and ω_n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LambdaVariant {
    /// λ_n = g_n/ω_n, the usual polaron displacement.
    #[default]
    Standard,
    /// λ_n = g_n²/ω_n², as printed in some treatments.
    Literal,
}

impl LambdaVariant {
    pub fn lambda(self, g: f64, omega: f64) -> f64 {
        let r = g / omega;
        match self {
            LambdaVariant::Standard => r,
            LambdaVariant::Literal => r * r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Delocalized,
    Localized,
}

impl Phase {
    pub fn from_log_ratio(log_ratio: f64) -> Phase {
        if log_ratio < LOCALIZATION_THRESHOLD.ln() {
            Phase::Localized
        } else {
            Phase::Delocalized
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Delocalized => "delocalized",
            Phase::Localized => "localized",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenormResult {
    pub delta_eff: f64,
    /// ln(Δ_eff/Δ₀); finite even when `delta_eff` underflows.
    pub log_ratio: f64,
    /// λ_n·Θ(ω_n − Δ_eff).
    pub lambdas: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub phase: Phase,
    /// Σλ_n² over the dressing modes.
    pub cat_size: f64,
    /// Δ⁽ᵏ⁾ for k = 0, 1, … (rad/s).
    pub trace: Vec<f64>,
}

/// The dressing map in log space: L ↦ −2·Σ_{ω_n > Δ₀e^L} λ_n².
struct DressingMap {
    /// (ln(ω_n/Δ₀), λ_n²) sorted by descending frequency.
    modes: Vec<(f64, f64)>,
}

impl DressingMap {
    fn new(couplings: &CouplingSpectrum, delta0: f64, variant: LambdaVariant) -> Self {
        let mut modes: Vec<(f64, f64)> = couplings
            .frequencies
            .iter()
            .zip(&couplings.couplings)
            .map(|(&w, &g)| {
                let l = variant.lambda(g, w);
                ((w / delta0).ln(), l * l)
            })
            .collect();
        modes.sort_by(|a, b| b.0.total_cmp(&a.0));
        DressingMap { modes }
    }

    fn apply(&self, log_delta: f64) -> f64 {
        let mut s = 0.0;
        for &(lw, l2) in &self.modes {
            if lw <= log_delta {
                break;
            }
            s += l2;
        }
        -2.0 * s
    }
}

fn check_inputs(couplings: &CouplingSpectrum, delta0: f64) -> Result<()> {
    if couplings.is_empty() {
        return Err(Error::EmptyModes);
    }
    if couplings.couplings.len() != couplings.frequencies.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} couplings for {} modes",
            couplings.couplings.len(),
            couplings.frequencies.len()
        )));
    }
    if !(delta0 > 0.0 && delta0.is_finite()) {
        return Err(Error::domain(format!("delta0 must be > 0, got {delta0}")));
    }
    Ok(())
}

/// Self-consistent Δ_eff = Δ₀·exp(−2Σ_{ω_n>Δ_eff} λ_n²), iterated downward
/// from Δ₀. The iteration is monotone and stops at the largest fixed point.
pub fn renormalize(
    couplings: &CouplingSpectrum,
    delta0: f64,
    variant: LambdaVariant,
) -> Result<RenormResult> {
    check_inputs(couplings, delta0)?;
    let map = DressingMap::new(couplings, delta0, variant);
    let mut log_delta = 0.0;
    let mut trace = vec![delta0];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let next = map.apply(log_delta);
        iterations += 1;
        trace.push(delta0 * next.exp());
        // relative change of Δ is e^{|ΔL|} − 1
        let done = (next - log_delta).abs().exp_m1() <= REL_TOL;
        log_delta = next;
        if done {
            converged = true;
            break;
        }
    }
    let delta_eff = delta0 * log_delta.exp();
    let lambdas = couplings
        .frequencies
        .iter()
        .zip(&couplings.couplings)
        .map(|(&w, &g)| {
            if (w / delta0).ln() > log_delta {
                variant.lambda(g, w)
            } else {
                0.0
            }
        })
        .collect();
    Ok(RenormResult {
        delta_eff,
        log_ratio: log_delta,
        lambdas,
        iterations,
        converged,
        phase: Phase::from_log_ratio(log_delta),
        cat_size: -0.5 * log_delta,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub g: f64,
    pub delta_eff: f64,
    pub log_ratio: f64,
    pub converged: bool,
    pub phase: Phase,
}

impl SweepPoint {
    fn from_result(g: f64, r: &RenormResult) -> Self {
        SweepPoint {
            g,
            delta_eff: r.delta_eff,
            log_ratio: r.log_ratio,
            converged: r.converged,
            phase: r.phase,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurve {
    pub points: Vec<SweepPoint>,
}

impl SweepCurve {
    pub fn is_non_increasing(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].log_ratio <= w[0].log_ratio)
    }

    pub fn g_axis(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.g).collect()
    }
}

/// A discontinuous drop of Δ_eff located by bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    /// Refined bracket: Δ_eff(g_lo) ≫ Δ_eff(g_hi), g_hi − g_lo ≤ 1e-4·g_hi.
    pub g_lo: f64,
    pub g_hi: f64,
    pub g_star: f64,
    /// log10 of Δ_eff(g_lo)/Δ_eff(g_hi).
    pub decades: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub delta0: f64,
    pub main: SweepCurve,
    /// Same sweep with the spatial factor of every mode forced to 1.
    pub companion: SweepCurve,
    /// Jumps of the main curve that survive refinement.
    pub jumps: Vec<Jump>,
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain(format!("{name} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain(format!(
            "{name} grid must be finite and strictly ascending"
        )));
    }
    Ok(())
}

fn log_ratio_at(
    template: &CouplingSpectrum,
    delta0: f64,
    variant: LambdaVariant,
    g: f64,
) -> Result<f64> {
    Ok(renormalize(&template.with_global(g), delta0, variant)?.log_ratio)
}

fn sweep_curve(
    template: &CouplingSpectrum,
    delta0: f64,
    g_grid: &[f64],
    variant: LambdaVariant,
) -> Result<SweepCurve> {
    let points = g_grid
        .iter()
        .map(|&g| {
            renormalize(&template.with_global(g), delta0, variant)
                .map(|r| SweepPoint::from_result(g, &r))
        })
        .collect::<Result<_>>()?;
    Ok(SweepCurve { points })
}

/// Bisects `[lo, hi]` (with known log ratios) towards the sub-interval with
/// the larger drop.
fn refine_jump(
    template: &CouplingSpectrum,
    delta0: f64,
    variant: LambdaVariant,
    (mut lo, mut l_lo): (f64, f64),
    (mut hi, mut l_hi): (f64, f64),
) -> Result<Jump> {
    while hi - lo > BISECTION_TOL * hi {
        let mid = 0.5 * (lo + hi);
        let l_mid = log_ratio_at(template, delta0, variant, mid)?;
        if l_lo - l_mid >= l_mid - l_hi {
            hi = mid;
            l_hi = l_mid;
        } else {
            lo = mid;
            l_lo = l_mid;
        }
    }
    Ok(Jump {
        g_lo: lo,
        g_hi: hi,
        g_star: 0.5 * (lo + hi),
        decades: (l_lo - l_hi) / std::f64::consts::LN_10,
    })
}

/// Flags adjacent grid points whose Δ_eff differs by more than a factor 10
/// and refines each by bisection. Only drops that stay above a factor 10
/// after refinement are kept, which screens out steep but smooth decays.
pub fn detect_jumps(
    template: &CouplingSpectrum,
    delta0: f64,
    curve: &SweepCurve,
    variant: LambdaVariant,
) -> Result<Vec<Jump>> {
    let threshold = JUMP_FACTOR.ln();
    let mut jumps = Vec::new();
    for w in curve.points.windows(2) {
        if w[0].log_ratio - w[1].log_ratio > threshold {
            let j = refine_jump(
                template,
                delta0,
                variant,
                (w[0].g, w[0].log_ratio),
                (w[1].g, w[1].log_ratio),
            )?;
            if j.decades > 1.0 {
                jumps.push(j);
            }
        }
    }
    Ok(jumps)
}

/// Δ_eff over `g_grid` for the coupling profile of `template` (its own
/// `g_global` is ignored). `companion` is the flat-profile template; when
/// absent every mode gets relative coupling 1.
pub fn sweep_coupling(
    template: &CouplingSpectrum,
    companion: Option<&CouplingSpectrum>,
    delta0: f64,
    g_grid: &[f64],
    variant: LambdaVariant,
) -> Result<SweepResult> {
    check_inputs(template, delta0)?;
    check_grid("g", g_grid)?;
    if g_grid[0] < 0.0 {
        return Err(Error::domain("g grid must be non-negative"));
    }
    let flat;
    let companion = match companion {
        Some(c) => c,
        None => {
            flat = CouplingSpectrum::from_profile(
                template.frequencies.clone(),
                vec![1.0; template.len()],
                1.0,
            )?;
            &flat
        }
    };
    let main = sweep_curve(template, delta0, g_grid, variant)?;
    let companion_curve = sweep_curve(companion, delta0, g_grid, variant)?;
    let jumps = detect_jumps(template, delta0, &main, variant)?;
    Ok(SweepResult {
        delta0,
        main,
        companion: companion_curve,
        jumps,
    })
}

/// First coupling at which the qubit turns localized, refined by bisection,
/// or `None` if the curve never crosses the threshold.
pub fn localization_crossing(
    template: &CouplingSpectrum,
    delta0: f64,
    curve: &SweepCurve,
    variant: LambdaVariant,
) -> Result<Option<f64>> {
    let Some(k) = curve
        .points
        .iter()
        .position(|p| p.phase == Phase::Localized)
    else {
        return Ok(None);
    };
    if k == 0 {
        return Ok(Some(curve.points[0].g));
    }
    let (mut lo, mut hi) = (curve.points[k - 1].g, curve.points[k].g);
    while hi - lo > BISECTION_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if Phase::from_log_ratio(log_ratio_at(template, delta0, variant, mid)?) == Phase::Localized
        {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub g_axis: Vec<f64>,
    pub delta0_axis: Vec<f64>,
    /// One row per Δ₀, one column per g (rad/s).
    pub delta_eff_grid: Vec<Vec<f64>>,
    pub log_ratio_grid: Vec<Vec<f64>>,
    pub phase_grid: Vec<Vec<Phase>>,
    /// (Δ₀, g*) with g* the refined localization crossing of that row.
    pub boundary: Vec<(f64, Option<f64>)>,
    /// Jumps detected along each row.
    pub jumps: Vec<Vec<Jump>>,
}

impl PhaseDiagram {
    pub fn has_both_phases(&self) -> bool {
        let flat = || self.phase_grid.iter().flatten();
        flat().any(|p| *p == Phase::Localized) && flat().any(|p| *p == Phase::Delocalized)
    }
}

/// Rows of [`sweep_coupling`] over `delta0_grid`, evaluated in parallel and
/// assembled in grid order.
pub fn phase_diagram_from(
    template: &CouplingSpectrum,
    g_grid: &[f64],
    delta0_grid: &[f64],
    variant: LambdaVariant,
) -> Result<PhaseDiagram> {
    check_grid("g", g_grid)?;
    check_grid("delta0", delta0_grid)?;
    let rows: Vec<(SweepCurve, Vec<Jump>, Option<f64>)> = delta0_grid
        .par_iter()
        .map(|&d0| {
            check_inputs(template, d0)?;
            let curve = sweep_curve(template, d0, g_grid, variant)?;
            let jumps = detect_jumps(template, d0, &curve, variant)?;
            let crossing = localization_crossing(template, d0, &curve, variant)?;
            Ok((curve, jumps, crossing))
        })
        .collect::<Result<_>>()?;
    let mut out = PhaseDiagram {
        g_axis: g_grid.to_vec(),
        delta0_axis: delta0_grid.to_vec(),
        delta_eff_grid: Vec::new(),
        log_ratio_grid: Vec::new(),
        phase_grid: Vec::new(),
        boundary: Vec::new(),
        jumps: Vec::new(),
    };
    for (&d0, (curve, jumps, crossing)) in delta0_grid.iter().zip(rows) {
        out.delta_eff_grid
            .push(curve.points.iter().map(|p| p.delta_eff).collect());
        out.log_ratio_grid
            .push(curve.points.iter().map(|p| p.log_ratio).collect());
        out.phase_grid
            .push(curve.points.iter().map(|p| p.phase).collect());
        out.boundary.push((d0, crossing));
        out.jumps.push(jumps);
    }
    Ok(out)
}

/// Solves the circuit, builds the coupling profile for `qubit` and sweeps
/// (Δ₀, g). Every Δ₀ must lie above the cutoff.
pub fn phase_diagram(
    spec: &CircuitSpec,
    qubit: &QubitSpec,
    normalization: CouplingNormalization,
    g_grid: &[f64],
    delta0_grid: &[f64],
    variant: LambdaVariant,
) -> Result<PhaseDiagram> {
    let omega_ir = spec.omega_ir();
    if let Some(d) = delta0_grid.iter().find(|&&d| !(d > omega_ir)) {
        return Err(Error::domain(format!(
            "delta0 = {d} rad/s is not above the cutoff {omega_ir} rad/s"
        )));
    }
    let modes = solve_modes(&build_matrices(spec)?, None)?;
    let template = coupling_spectrum(&modes, spec, qubit, normalization)?;
    phase_diagram_from(&template, g_grid, delta0_grid, variant)
}
