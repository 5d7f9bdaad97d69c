//! Lumped-element description of the coupled line and its quantization
//! matrices.
//!
//! Node layout of [`build_matrices`]:
//!
//! ```text
//!  LHTL node 0 ──C_l── node 1 ──C_l── … node N_l-1 ──C_l── node N_l ─ l_rδ ─ … ─ node N_l+n_r-1
//!      │L_l             │L_l              │L_l              │c_rδ              │c_rδ
//!     ═══              ═══               ═══               ═══               ═══
//! ```
//!
//! Node `N_l` is shared: it is the right plate of the last series capacitor
//! and the first cell of the right-handed strip. It has no shunt inductor.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Per-cell LHTL element values, used once disorder has been applied.
#[derive(Debug, Clone, PartialEq)]
pub struct CellValues {
    pub c_left: Vec<f64>,
    pub l_left: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    /// Number of LHTL unit cells.
    pub n_left: usize,
    /// Series capacitance of one LHTL cell (F).
    pub c_left: f64,
    /// Shunt inductance of one LHTL cell (H).
    pub l_left: f64,
    /// Length of one LHTL cell (m).
    pub cell_pitch: f64,
    /// Length of the right-handed strip (m).
    pub rhtl_length: f64,
    /// RHTL capacitance per metre (F/m).
    pub c_right_per_len: f64,
    /// RHTL inductance per metre (H/m).
    pub l_right_per_len: f64,
    /// Number of cells used to discretize the RHTL.
    pub n_right: usize,
    /// Capacitance to ground at the open LHTL end (F); `None` is an open end.
    pub c_end_left: Option<f64>,
    /// Capacitance to ground at the far RHTL end (F).
    pub c_end_right: Option<f64>,
    /// Per-cell overrides of `c_left`/`l_left`; `None` means a uniform line.
    pub cells: Option<CellValues>,
}

impl CircuitSpec {
    /// A uniform line with open ends.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_left: usize,
        c_left: f64,
        l_left: f64,
        cell_pitch: f64,
        rhtl_length: f64,
        c_right_per_len: f64,
        l_right_per_len: f64,
        n_right: usize,
    ) -> Self {
        CircuitSpec {
            n_left,
            c_left,
            l_left,
            cell_pitch,
            rhtl_length,
            c_right_per_len,
            l_right_per_len,
            n_right,
            c_end_left: None,
            c_end_right: None,
            cells: None,
        }
    }

    /// The device of the reference figures: 200 cells of 100 µm designed for
    /// 50 Ω and a 4 GHz cutoff, joined to a 3 cm, 50 Ω strip holding one full
    /// wavelength at the cutoff.
    pub fn reference() -> Self {
        let omega_ir = crate::units::ghz_to_rad(4.0);
        let (c_left, l_left) = design_from_impedance(50.0, omega_ir).expect("positive inputs");
        let (c_r, l_r) = rhtl_per_length(50.0, 0.03 * 4e9).expect("positive inputs");
        CircuitSpec::new(200, c_left, l_left, 100e-6, 0.03, c_r, l_r, 300)
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let positive = |name: &str, v: f64, bad: &mut Vec<String>| {
            if !(v.is_finite() && v > 0.0) {
                bad.push(format!("{name} must be finite and > 0 (got {v})"));
            }
        };
        if self.n_left < 1 {
            bad.push("n_left must be >= 1".to_string());
        }
        if self.n_right < 2 {
            bad.push(format!("n_right must be >= 2 (got {})", self.n_right));
        }
        positive("c_left", self.c_left, &mut bad);
        positive("l_left", self.l_left, &mut bad);
        positive("cell_pitch", self.cell_pitch, &mut bad);
        positive("rhtl_length", self.rhtl_length, &mut bad);
        positive("c_right_per_len", self.c_right_per_len, &mut bad);
        positive("l_right_per_len", self.l_right_per_len, &mut bad);
        if let Some(c) = self.c_end_left {
            positive("c_end_left", c, &mut bad);
        }
        if let Some(c) = self.c_end_right {
            positive("c_end_right", c, &mut bad);
        }
        if let Some(cells) = &self.cells {
            if cells.c_left.len() != self.n_left || cells.l_left.len() != self.n_left {
                bad.push(format!(
                    "cells must hold n_left = {} values (got {} capacitors, {} inductors)",
                    self.n_left,
                    cells.c_left.len(),
                    cells.l_left.len()
                ));
            }
            for (i, &c) in cells.c_left.iter().enumerate() {
                positive(&format!("cells.c_left[{i}]"), c, &mut bad);
            }
            for (i, &l) in cells.l_left.iter().enumerate() {
                positive(&format!("cells.l_left[{i}]"), l, &mut bad);
            }
        }
        if bad.is_empty() {
            let w = self.omega_ir();
            let z = self.rhtl_impedance();
            if !(w.is_finite() && w > 0.0) {
                bad.push(format!("derived omega_ir = {w} is not finite and positive"));
            }
            if !(z.is_finite() && z > 0.0) {
                bad.push(format!(
                    "derived RHTL impedance = {z} is not finite and positive"
                ));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad))
        }
    }

    /// Infrared cutoff 1/(2√(C_l L_l)) of the nominal cell.
    pub fn omega_ir(&self) -> f64 {
        0.5 / (self.c_left * self.l_left).sqrt()
    }

    pub fn rhtl_impedance(&self) -> f64 {
        (self.l_right_per_len / self.c_right_per_len).sqrt()
    }

    pub fn rhtl_velocity(&self) -> f64 {
        1.0 / (self.l_right_per_len * self.c_right_per_len).sqrt()
    }

    /// Discretization step δ of the RHTL.
    pub fn rhtl_cell(&self) -> f64 {
        self.rhtl_length / self.n_right as f64
    }

    pub fn cell_capacitance(&self, cell: usize) -> f64 {
        match &self.cells {
            Some(c) => c.c_left[cell],
            None => self.c_left,
        }
    }

    pub fn cell_inductance(&self, cell: usize) -> f64 {
        match &self.cells {
            Some(c) => c.l_left[cell],
            None => self.l_left,
        }
    }

    pub fn layout(&self) -> NodeLayout {
        NodeLayout {
            n_lhtl: self.n_left,
            n_rhtl: self.n_right,
        }
    }
}

/// Series capacitance and shunt inductance giving impedance `z0` and cutoff
/// `omega_ir`: C_l = 1/(2ω_IR Z₀), L_l = Z₀/(2ω_IR).
pub fn design_from_impedance(z0: f64, omega_ir: f64) -> Result<(f64, f64)> {
    if !(z0 > 0.0 && z0.is_finite()) {
        return Err(Error::domain(format!("impedance must be > 0, got {z0}")));
    }
    if !(omega_ir > 0.0 && omega_ir.is_finite()) {
        return Err(Error::domain(format!("cutoff must be > 0, got {omega_ir}")));
    }
    Ok((1.0 / (2.0 * omega_ir * z0), z0 / (2.0 * omega_ir)))
}

/// Per-length capacitance and inductance of a strip with impedance `z` and
/// phase velocity `v`: c = 1/(Z v), l = Z/v.
pub fn rhtl_per_length(z: f64, v: f64) -> Result<(f64, f64)> {
    if !(z > 0.0 && z.is_finite() && v > 0.0 && v.is_finite()) {
        return Err(Error::domain(format!(
            "impedance and velocity must be > 0, got {z} and {v}"
        )));
    }
    Ok((1.0 / (z * v), z / v))
}

/// Which node indices belong to which line.
///
/// LHTL nodes come first (`0..n_lhtl`), followed by the RHTL nodes
/// (`n_lhtl..n_lhtl + n_rhtl`). When both are present the first RHTL node is
/// the interface node. Either count may be zero for single-line networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeLayout {
    pub n_lhtl: usize,
    pub n_rhtl: usize,
}

impl NodeLayout {
    pub fn dim(&self) -> usize {
        self.n_lhtl + self.n_rhtl
    }

    pub fn lhtl(&self) -> std::ops::Range<usize> {
        0..self.n_lhtl
    }

    pub fn rhtl(&self) -> std::ops::Range<usize> {
        self.n_lhtl..self.n_lhtl + self.n_rhtl
    }

    /// The node used for the eigenvector sign convention.
    pub fn interface(&self) -> Option<usize> {
        (self.n_rhtl > 0).then_some(self.n_lhtl)
    }
}

#[derive(Debug, Clone)]
pub struct NetworkMatrices {
    /// Capacitance matrix over node fluxes (F).
    pub cap: DMatrix<f64>,
    /// Inverse-inductance matrix over node fluxes (1/H).
    pub inv_ind: DMatrix<f64>,
    /// Node coordinates (m). The RHTL occupies [0, rhtl_length], the LHTL
    /// sits at negative x.
    pub node_positions: Vec<f64>,
    pub layout: NodeLayout,
}

impl NetworkMatrices {
    /// Wraps externally assembled matrices after checking shapes and symmetry.
    pub fn new(
        cap: DMatrix<f64>,
        inv_ind: DMatrix<f64>,
        node_positions: Vec<f64>,
        layout: NodeLayout,
    ) -> Result<Self> {
        let n = cap.nrows();
        if cap.ncols() != n || inv_ind.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "cap is {:?}, inv_ind is {:?}",
                cap.shape(),
                inv_ind.shape()
            )));
        }
        if node_positions.len() != n || layout.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} nodes but {} positions and layout of {}",
                node_positions.len(),
                layout.dim()
            )));
        }
        for m in [&cap, &inv_ind] {
            let asym = crate::linalg::max_asymmetry(m);
            let scale = m.amax().max(f64::MIN_POSITIVE);
            if asym > 1e-12 * scale {
                return Err(Error::NotSymmetric(asym));
            }
        }
        Ok(NetworkMatrices {
            cap,
            inv_ind,
            node_positions,
            layout,
        })
    }

    pub fn dim(&self) -> usize {
        self.cap.nrows()
    }
}

fn stamp_branch(m: &mut DMatrix<f64>, a: usize, b: usize, value: f64) {
    m[(a, a)] += value;
    m[(b, b)] += value;
    m[(a, b)] -= value;
    m[(b, a)] -= value;
}

/// Assembles the capacitance and inverse-inductance matrices of the coupled
/// line.
pub fn build_matrices(spec: &CircuitSpec) -> Result<NetworkMatrices> {
    spec.validate()?;
    let layout = spec.layout();
    let n = layout.dim();
    let mut cap = DMatrix::zeros(n, n);
    let mut inv_ind = DMatrix::zeros(n, n);

    for cell in 0..spec.n_left {
        stamp_branch(&mut cap, cell, cell + 1, spec.cell_capacitance(cell));
        inv_ind[(cell, cell)] += 1.0 / spec.cell_inductance(cell);
    }

    let delta = spec.rhtl_cell();
    let c_node = spec.c_right_per_len * delta;
    let y_branch = 1.0 / (spec.l_right_per_len * delta);
    let r0 = spec.n_left;
    for j in 0..spec.n_right {
        cap[(r0 + j, r0 + j)] += c_node;
    }
    for j in 0..spec.n_right - 1 {
        stamp_branch(&mut inv_ind, r0 + j, r0 + j + 1, y_branch);
    }

    if let Some(c) = spec.c_end_left {
        cap[(0, 0)] += c;
    }
    if let Some(c) = spec.c_end_right {
        cap[(n - 1, n - 1)] += c;
    }

    let mut node_positions = Vec::with_capacity(n);
    for i in 0..spec.n_left {
        node_positions.push((i as f64 - spec.n_left as f64) * spec.cell_pitch);
    }
    for j in 0..spec.n_right {
        node_positions.push((j as f64 + 0.5) * delta);
    }

    Ok(NetworkMatrices {
        cap,
        inv_ind,
        node_positions,
        layout,
    })
}

/// A bare right-handed ladder with open ends: `n` cells of length
/// `length / n`, each a capacitor to ground, joined by series inductors.
pub fn pure_rhtl(c_per_len: f64, l_per_len: f64, length: f64, n: usize) -> Result<NetworkMatrices> {
    if n < 2 || !(c_per_len > 0.0 && l_per_len > 0.0 && length > 0.0) {
        return Err(Error::domain(
            "pure RHTL needs n >= 2 and positive elements",
        ));
    }
    let delta = length / n as f64;
    let cap = DMatrix::from_diagonal_element(n, n, c_per_len * delta);
    let mut inv_ind = DMatrix::zeros(n, n);
    for j in 0..n - 1 {
        stamp_branch(&mut inv_ind, j, j + 1, 1.0 / (l_per_len * delta));
    }
    let pos = (0..n).map(|j| (j as f64 + 0.5) * delta).collect();
    NetworkMatrices::new(
        cap,
        inv_ind,
        pos,
        NodeLayout {
            n_lhtl: 0,
            n_rhtl: n,
        },
    )
}

/// A bare left-handed ladder of `n` shunt-inductor nodes whose outer series
/// capacitors are tied to ground, i.e. `n + 1` series capacitors in total.
pub fn pure_lhtl(c_left: f64, l_left: f64, dx: f64, n: usize) -> Result<NetworkMatrices> {
    if n < 1 || !(c_left > 0.0 && l_left > 0.0 && dx > 0.0) {
        return Err(Error::domain(
            "pure LHTL needs n >= 1 and positive elements",
        ));
    }
    let mut cap = DMatrix::zeros(n, n);
    for i in 0..n {
        cap[(i, i)] = 2.0 * c_left;
        if i + 1 < n {
            cap[(i, i + 1)] = -c_left;
            cap[(i + 1, i)] = -c_left;
        }
    }
    let inv_ind = DMatrix::from_diagonal_element(n, n, 1.0 / l_left);
    let pos = (0..n).map(|i| (i as f64 + 1.0) * dx).collect();
    NetworkMatrices::new(
        cap,
        inv_ind,
        pos,
        NodeLayout {
            n_lhtl: n,
            n_rhtl: 0,
        },
    )
}

/// Multiplies every cell's C_l and L_l by an independent factor 1 + ε with
/// ε ~ N(0, σ²) truncated to ±3σ. Deterministic in `seed`.
pub fn apply_disorder(spec: &CircuitSpec, relative_sigma: f64, seed: u64) -> Result<CircuitSpec> {
    if !(0.0..0.5).contains(&relative_sigma) {
        return Err(Error::domain(format!(
            "relative sigma must lie in [0, 0.5), got {relative_sigma}"
        )));
    }
    if relative_sigma == 0.0 {
        return Ok(spec.clone());
    }
    let normal = Normal::new(0.0, relative_sigma).map_err(|e| Error::domain(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || loop {
        let eps: f64 = normal.sample(&mut rng);
        if eps.abs() <= 3.0 * relative_sigma {
            break 1.0 + eps;
        }
    };
    let mut c_left = Vec::with_capacity(spec.n_left);
    let mut l_left = Vec::with_capacity(spec.n_left);
    for cell in 0..spec.n_left {
        c_left.push(spec.cell_capacitance(cell) * draw());
        l_left.push(spec.cell_inductance(cell) * draw());
    }
    let mut out = spec.clone();
    out.cells = Some(CellValues { c_left, l_left });
    Ok(out)
}
