//! Normal modes of the quantized network and what the qubit sees of them.

use nalgebra::DMatrix;

use crate::circuit::{CircuitSpec, NetworkMatrices, NodeLayout};
use crate::dispersion;
use crate::error::{Error, Result};
use crate::linalg::generalized_symmetric_eigen;

/// Eigenvalues ω² below this fraction of the largest are treated as the
/// inductive null space (free-charge modes) and dropped.
pub const ZERO_MODE_TOL: f64 = 1e-10;

/// Relative frequency difference below which two modes count as degenerate
/// for ordering purposes.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ModeSet {
    /// Mode frequencies ω_n (rad/s), ascending and strictly positive.
    pub frequencies: Vec<f64>,
    /// Column n is the node-flux vector v_n with v_nᵀ·cap·v_n = 1.
    pub profiles: DMatrix<f64>,
    pub node_positions: Vec<f64>,
    pub layout: NodeLayout,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n >= self.len() {
            Err(Error::IndexOutOfRange {
                index: n,
                len: self.len(),
            })
        } else {
            Ok(())
        }
    }

    pub fn profile(&self, n: usize) -> Result<Vec<f64>> {
        self.check_index(n)?;
        Ok(self.profiles.column(n).iter().copied().collect())
    }

    /// Fraction of mode `n`'s capacitive energy stored in the LHTL series
    /// capacitors (and the left terminating capacitor).
    pub fn lhtl_energy_fraction(&self, spec: &CircuitSpec, n: usize) -> Result<f64> {
        self.check_index(n)?;
        if self.layout != spec.layout() {
            return Err(Error::DimensionMismatch(
                "mode set was not computed from this circuit".to_string(),
            ));
        }
        let v = self.profiles.column(n);
        let mut energy = 0.0;
        for cell in 0..spec.n_left {
            let d = v[cell + 1] - v[cell];
            energy += spec.cell_capacitance(cell) * d * d;
        }
        if let Some(c) = spec.c_end_left {
            energy += c * v[0] * v[0];
        }
        Ok(energy)
    }

    /// Indices of the modes that live mainly in the left-handed line, i.e. the
    /// quasi-continuum above the cutoff. Modes dominated by the right-handed
    /// strip (its own standing waves) are excluded.
    pub fn lhtl_band(&self, spec: &CircuitSpec) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for n in 0..self.len() {
            if self.lhtl_energy_fraction(spec, n)? > 0.5 {
                out.push(n);
            }
        }
        Ok(out)
    }
}

/// Number of sign changes along `v`, ignoring entries negligible against its
/// largest magnitude.
pub fn sign_changes(v: &[f64]) -> usize {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = 1e-9 * scale;
    let mut last = 0.0f64;
    let mut count = 0;
    for &x in v {
        if x.abs() <= floor {
            continue;
        }
        if last != 0.0 && (x > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = x;
    }
    count
}

/// Normal modes from the pencil `inv_ind·v = ω²·cap·v`.
///
/// Zero modes are dropped; `freq_window` (rad/s, inclusive) restricts the
/// result further. Each profile is signed so that its value at the interface
/// node is non-negative (or, when that is negligible, its largest entry).
pub fn solve_modes(mat: &NetworkMatrices, freq_window: Option<(f64, f64)>) -> Result<ModeSet> {
    let n = mat.dim();
    let (values, vectors) = generalized_symmetric_eigen(&mat.inv_ind, &mat.cap)?;
    let lam_max = values.iter().copied().fold(0.0f64, f64::max);
    let cutoff = ZERO_MODE_TOL * lam_max;

    let mut picked: Vec<(f64, Vec<f64>)> = Vec::new();
    for (i, &lam) in values.iter().enumerate() {
        if !(lam > cutoff) {
            continue;
        }
        let omega = lam.sqrt();
        if let Some((lo, hi)) = freq_window {
            if omega < lo || omega > hi {
                continue;
            }
        }
        let mut v: Vec<f64> = vectors.column(i).iter().copied().collect();
        fix_sign(&mut v, mat.layout.interface());
        picked.push((omega, v));
    }

    order_with_ties(&mut picked);

    let mut profiles = DMatrix::zeros(n, picked.len());
    let mut frequencies = Vec::with_capacity(picked.len());
    for (col, (omega, v)) in picked.into_iter().enumerate() {
        frequencies.push(omega);
        profiles.set_column(col, &nalgebra::DVector::from_vec(v));
    }
    Ok(ModeSet {
        frequencies,
        profiles,
        node_positions: mat.node_positions.clone(),
        layout: mat.layout,
    })
}

fn fix_sign(v: &mut [f64], interface: Option<usize>) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let anchor = interface
        .filter(|&i| v[i].abs() > 1e-9 * scale)
        .unwrap_or_else(|| {
            // first entry of maximal magnitude
            let mut best = 0;
            for (i, x) in v.iter().enumerate() {
                if x.abs() > v[best].abs() {
                    best = i;
                }
            }
            best
        });
    if v[anchor] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn order_with_ties(modes: &mut [(f64, Vec<f64>)]) {
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut start = 0;
    while start < modes.len() {
        let mut end = start + 1;
        while end < modes.len() && modes[end].0 - modes[start].0 <= TIE_TOL * modes[start].0 {
            end += 1;
        }
        if end - start > 1 {
            modes[start..end].sort_by_key(|m| sign_changes(&m.1));
        }
        start = end;
    }
}

/// Node-voltage shape of mode `n`: ω_n·v_n.
pub fn voltage_profile(modes: &ModeSet, n: usize) -> Result<Vec<f64>> {
    let omega = *modes.frequencies.get(n).ok_or(Error::IndexOutOfRange {
        index: n,
        len: modes.len(),
    })?;
    Ok(modes.profiles.column(n).iter().map(|v| omega * v).collect())
}

/// Branch currents of mode `n` along the RHTL: flux difference across each
/// series inductor divided by l_r·δ, located at the branch midpoints.
pub fn rhtl_branch_currents(
    modes: &ModeSet,
    spec: &CircuitSpec,
    n: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    modes.check_index(n)?;
    if modes.layout != spec.layout() {
        return Err(Error::DimensionMismatch(
            "mode set was not computed from this circuit".to_string(),
        ));
    }
    let r0 = spec.n_left;
    let delta = spec.rhtl_cell();
    let l_branch = spec.l_right_per_len * delta;
    let v = modes.profiles.column(n);
    let mut x = Vec::with_capacity(spec.n_right - 1);
    let mut current = Vec::with_capacity(spec.n_right - 1);
    for j in 0..spec.n_right - 1 {
        x.push(0.5 * (modes.node_positions[r0 + j] + modes.node_positions[r0 + j + 1]));
        current.push((v[r0 + j + 1] - v[r0 + j]) / l_branch);
    }
    Ok((x, current))
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let j = xs.partition_point(|&p| p <= x) - 1;
    let t = (x - xs[j]) / (xs[j + 1] - xs[j]);
    ys[j] + t * (ys[j + 1] - ys[j])
}

/// ∫_a^b of the piecewise-linear interpolant through (xs, ys), held constant
/// outside the sample range.
fn integrate_linear(xs: &[f64], ys: &[f64], a: f64, b: f64) -> f64 {
    let mut knots = vec![a];
    knots.extend(xs.iter().copied().filter(|&x| x > a && x < b));
    knots.push(b);
    knots
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (interpolate(xs, ys, w[0]) + interpolate(xs, ys, w[1])))
        .sum()
}

fn check_footprint(spec: &CircuitSpec, x0: f64, extent: f64) -> Result<()> {
    let tol = 1e-12 * spec.rhtl_length;
    if !(extent >= 0.0) || !(x0 >= -tol) || !(x0 + extent <= spec.rhtl_length + tol) {
        return Err(Error::domain(format!(
            "footprint [{x0}, {}] m is not inside the RHTL [0, {}] m",
            x0 + extent,
            spec.rhtl_length
        )));
    }
    Ok(())
}

/// Magnitude of the mean branch current of mode `n` over `[x0, x0 + extent]`.
/// Currents are linearly interpolated between branch midpoints; a zero
/// extent gives the pointwise value at `x0`.
pub fn current_average(
    modes: &ModeSet,
    spec: &CircuitSpec,
    n: usize,
    x0: f64,
    extent: f64,
) -> Result<f64> {
    check_footprint(spec, x0, extent)?;
    let (xs, current) = rhtl_branch_currents(modes, spec, n)?;
    Ok(footprint_mean(&xs, &current, x0, extent).abs())
}

fn footprint_mean(xs: &[f64], current: &[f64], x0: f64, extent: f64) -> f64 {
    if extent == 0.0 {
        interpolate(xs, current, x0)
    } else {
        integrate_linear(xs, current, x0, x0 + extent) / extent
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitSpec {
    /// Bare splitting Δ₀ (rad/s).
    pub delta0: f64,
    /// Left edge of the footprint on the RHTL (m).
    pub position: f64,
    /// Footprint length (m).
    pub extent: f64,
    /// Global coupling scale g (rad/s).
    pub g_global: f64,
}

impl QubitSpec {
    pub fn validate(&self, spec: &CircuitSpec) -> Result<()> {
        if !(self.delta0 > 0.0) {
            return Err(Error::domain(format!(
                "delta0 must be > 0, got {}",
                self.delta0
            )));
        }
        if !(self.g_global >= 0.0) {
            return Err(Error::domain(format!(
                "g_global must be >= 0, got {}",
                self.g_global
            )));
        }
        if !(self.extent > 0.0) {
            return Err(Error::domain(format!(
                "qubit extent must be > 0, got {}",
                self.extent
            )));
        }
        check_footprint(spec, self.position, self.extent)
    }
}

/// Places a footprint of length `extent` centred on the strongest current
/// point of the mode closest to `target` (rad/s), clamped to the strip.
pub fn qubit_at_antinode(
    modes: &ModeSet,
    spec: &CircuitSpec,
    target: f64,
    extent: f64,
    delta0: f64,
    g_global: f64,
) -> Result<QubitSpec> {
    if modes.is_empty() {
        return Err(Error::EmptyModes);
    }
    let n = nearest_mode(&modes.frequencies, target);
    let (xs, current) = rhtl_branch_currents(modes, spec, n)?;
    let mut best = 0;
    for (j, c) in current.iter().enumerate() {
        if c.abs() > current[best].abs() {
            best = j;
        }
    }
    let position = (xs[best] - 0.5 * extent).clamp(0.0, (spec.rhtl_length - extent).max(0.0));
    let q = QubitSpec {
        delta0,
        position,
        extent,
        g_global,
    };
    q.validate(spec)?;
    Ok(q)
}

pub fn nearest_mode(frequencies: &[f64], target: f64) -> usize {
    let mut best = 0;
    for (i, w) in frequencies.iter().enumerate() {
        if (w - target).abs() < (frequencies[best] - target).abs() {
            best = i;
        }
    }
    best
}

/// Frequency weighting applied on top of the spatial current factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingNormalization {
    /// Pure footprint-averaged current shape.
    #[default]
    Spatial,
    /// Current shape times the approximate density of modes at ω_n (zero at
    /// and below the cutoff).
    DensityWeighted,
}

/// Whether the footprint current enters the coupling or is replaced by 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpatialFactor {
    #[default]
    Footprint,
    Unity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpectrum {
    /// g_n (rad/s).
    pub couplings: Vec<f64>,
    /// g_n / g_global, with maximum exactly 1.
    pub relative_profile: Vec<f64>,
    /// ω_n (rad/s).
    pub frequencies: Vec<f64>,
}

impl CouplingSpectrum {
    /// A spectrum built directly from a relative profile.
    pub fn from_profile(
        frequencies: Vec<f64>,
        relative_profile: Vec<f64>,
        g_global: f64,
    ) -> Result<Self> {
        if frequencies.len() != relative_profile.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} frequencies, {} profile entries",
                frequencies.len(),
                relative_profile.len()
            )));
        }
        let couplings = relative_profile.iter().map(|r| g_global * r).collect();
        Ok(CouplingSpectrum {
            couplings,
            relative_profile,
            frequencies,
        })
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Same profile at a different global coupling.
    pub fn with_global(&self, g_global: f64) -> Self {
        CouplingSpectrum {
            couplings: self.relative_profile.iter().map(|r| g_global * r).collect(),
            relative_profile: self.relative_profile.clone(),
            frequencies: self.frequencies.clone(),
        }
    }

    /// Drops modes whose relative profile is below `threshold`.
    pub fn truncated(&self, threshold: f64) -> Self {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.relative_profile[i] >= threshold)
            .collect();
        CouplingSpectrum {
            couplings: keep.iter().map(|&i| self.couplings[i]).collect(),
            relative_profile: keep.iter().map(|&i| self.relative_profile[i]).collect(),
            frequencies: keep.iter().map(|&i| self.frequencies[i]).collect(),
        }
    }
}

/// Per-mode couplings of a qubit on the RHTL.
///
/// The spatial factor of mode n is the footprint mean of its branch current
/// divided by the mode's peak RHTL branch current, so it only measures where
/// the qubit sits in the standing wave. It is multiplied by the chosen
/// frequency weighting and normalized by its maximum over modes.
pub fn coupling_spectrum(
    modes: &ModeSet,
    spec: &CircuitSpec,
    qubit: &QubitSpec,
    normalization: CouplingNormalization,
) -> Result<CouplingSpectrum> {
    coupling_spectrum_with(modes, spec, qubit, normalization, SpatialFactor::Footprint)
}

pub fn coupling_spectrum_with(
    modes: &ModeSet,
    spec: &CircuitSpec,
    qubit: &QubitSpec,
    normalization: CouplingNormalization,
    spatial: SpatialFactor,
) -> Result<CouplingSpectrum> {
    if modes.is_empty() {
        return Err(Error::EmptyModes);
    }
    qubit.validate(spec)?;
    let omega_ir = spec.omega_ir();
    let mut weight = Vec::with_capacity(modes.len());
    for (n, &omega) in modes.frequencies.iter().enumerate() {
        let shape = match spatial {
            SpatialFactor::Unity => 1.0,
            SpatialFactor::Footprint => {
                let (xs, current) = rhtl_branch_currents(modes, spec, n)?;
                let peak = current.iter().fold(0.0f64, |m, c| m.max(c.abs()));
                if peak > 0.0 {
                    footprint_mean(&xs, &current, qubit.position, qubit.extent).abs() / peak
                } else {
                    0.0
                }
            }
        };
        let s = match normalization {
            CouplingNormalization::Spatial => 1.0,
            CouplingNormalization::DensityWeighted => {
                if omega > omega_ir {
                    dispersion::dom_approx(omega, spec)?
                } else {
                    0.0
                }
            }
        };
        weight.push(shape * s);
    }
    let max = weight.iter().copied().fold(0.0f64, f64::max);
    if !(max > 0.0 && max.is_finite()) {
        return Err(Error::domain("qubit footprint couples to no mode"));
    }
    let relative = weight.iter().map(|w| w / max).collect();
    CouplingSpectrum::from_profile(modes.frequencies.clone(), relative, qubit.g_global)
}

/// Numerical density of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct DomHistogram {
    pub bin_width: f64,
    /// Bin centres (rad/s).
    pub bin_centers: Vec<f64>,
    /// Modes per rad/s in each bin.
    pub density: Vec<f64>,
    /// (ω_n, 1/(ω_{n+1} − ω_n)) for every mode but the last.
    pub spacing: Vec<(f64, f64)>,
}

/// Histogram of `frequencies` (ascending) in bins of `bin_width`, starting at
/// the lowest mode; only bins lying fully inside the spectrum are kept.
pub fn dom_numeric(frequencies: &[f64], bin_width: f64) -> Result<DomHistogram> {
    if !(bin_width > 0.0) {
        return Err(Error::domain(format!(
            "bin width must be > 0, got {bin_width}"
        )));
    }
    if frequencies.len() < 2 {
        return Err(Error::TooFewModes {
            needed: 2,
            got: frequencies.len(),
        });
    }
    let first = frequencies[0];
    let last = frequencies[frequencies.len() - 1];
    let span = (last - first) / bin_width;
    let n_bins = (span * (1.0 + 1e-12)).floor() as usize;
    let mut counts = vec![0usize; n_bins];
    for &w in frequencies {
        // nudge so that modes sitting exactly on an edge land in the upper bin
        let idx = ((w - first) / bin_width + 1e-9).floor();
        if idx >= 0.0 && (idx as usize) < n_bins {
            counts[idx as usize] += 1;
        }
    }
    let bin_centers = (0..n_bins)
        .map(|i| first + (i as f64 + 0.5) * bin_width)
        .collect();
    let density = counts.iter().map(|&c| c as f64 / bin_width).collect();
    let spacing = frequencies
        .windows(2)
        .map(|w| (w[0], 1.0 / (w[1] - w[0])))
        .collect();
    Ok(DomHistogram {
        bin_width,
        bin_centers,
        density,
        spacing,
    })
}
