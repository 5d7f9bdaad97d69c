//! Run configuration: TOML sections with dotted names, converted to SI and
//! angular frequency once, at load time.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use metaline_core::circuit::rhtl_per_length;
use metaline_core::units::ghz_to_rad;
use metaline_core::{design_from_impedance, CircuitSpec, CouplingNormalization, LambdaVariant};

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    circuit: RawCircuit,
    #[serde(default)]
    qubit: RawQubit,
    #[serde(default)]
    modes: RawModes,
    #[serde(default)]
    dynamics: RawDynamics,
    #[serde(default)]
    renorm: RawRenorm,
    #[serde(default)]
    phase: RawPhase,
    #[serde(default)]
    disorder: RawDisorder,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    n_left: usize,
    cell_pitch: f64,
    c_left: Option<f64>,
    l_left: Option<f64>,
    design_impedance: Option<f64>,
    cutoff_ghz: Option<f64>,
    rhtl_length: f64,
    c_right_per_len: Option<f64>,
    l_right_per_len: Option<f64>,
    rhtl_impedance: Option<f64>,
    rhtl_velocity: Option<f64>,
    n_right: usize,
    c_end_left: Option<f64>,
    c_end_right: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQubit {
    delta0_ghz: Option<f64>,
    delta0_over_ir: Option<f64>,
    position: Option<f64>,
    antinode_ghz: Option<f64>,
    extent: Option<f64>,
    g_ghz: Option<f64>,
    g_over_ir: Option<f64>,
    normalization: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModes {
    window_ghz: Option<[f64; 2]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDynamics {
    #[serde(default, deserialize_with = "grid")]
    tg: Option<RawGrid>,
    window_ghz: Option<[f64; 2]>,
    #[serde(default)]
    truncate: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRenorm {
    #[serde(default, deserialize_with = "grid")]
    g_over_ir: Option<RawGrid>,
    variant: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhase {
    #[serde(default, deserialize_with = "grid")]
    g_over_ir: Option<RawGrid>,
    #[serde(default, deserialize_with = "grid")]
    delta0_over_ir: Option<RawGrid>,
    variant: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDisorder {
    sigma: Option<f64>,
    seeds: Option<u64>,
    seed_base: Option<u64>,
    band_ghz: Option<[f64; 2]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    stem: Option<String>,
}

/// Either explicit `values` (or a bare array) or `points` samples from
/// `start` to `stop`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    values: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    points: Option<usize>,
    #[serde(default)]
    log: bool,
    #[serde(default)]
    include_zero: bool,
}

/// Bare arrays are shorthand for `{ values = [...] }`.
fn grid<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<RawGrid>, D::Error> {
    use serde::de::Error as _;
    let v = toml::Value::deserialize(d)?;
    if let toml::Value::Array(items) = v {
        let values = items
            .into_iter()
            .map(|x| match x {
                toml::Value::Float(f) => Ok(f),
                toml::Value::Integer(i) => Ok(i as f64),
                other => Err(D::Error::custom(format!(
                    "grid values must be numbers, got {}",
                    other.type_str()
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Some(RawGrid {
            values: Some(values),
            start: None,
            stop: None,
            points: None,
            log: false,
            include_zero: false,
        }));
    }
    RawGrid::deserialize(v).map(Some).map_err(D::Error::custom)
}

impl RawGrid {
    fn resolve(&self, field: &str) -> Result<Vec<f64>, String> {
        let mut out = match (&self.values, self.start, self.stop, self.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => {
                if n == 0 {
                    return Err(format!("{field}.points must be >= 1"));
                }
                if n == 1 {
                    vec![a]
                } else if self.log {
                    if !(a > 0.0 && b > 0.0) {
                        return Err(format!("{field}: log grid needs start, stop > 0"));
                    }
                    let (la, lb) = (a.ln(), b.ln());
                    (0..n)
                        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
                        .collect()
                } else {
                    (0..n)
                        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                        .collect()
                }
            }
            _ => {
                return Err(format!(
                    "{field}: give either `values` or all of `start`, `stop`, `points`"
                ))
            }
        };
        if self.include_zero && out.first() != Some(&0.0) {
            out.insert(0, 0.0);
        }
        if out.is_empty() {
            return Err(format!("{field} is empty"));
        }
        if out.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(format!("{field} values must be finite and >= 0"));
        }
        if out.windows(2).any(|w| w[1] <= w[0]) {
            return Err(format!("{field} must be strictly ascending"));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    /// Left edge of the footprint (m).
    At(f64),
    /// Centred on the current antinode of the mode nearest this frequency (rad/s).
    Antinode(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitSetup {
    /// rad/s
    pub delta0: Option<f64>,
    pub placement: Placement,
    pub extent: f64,
    /// rad/s
    pub g_global: f64,
    pub normalization: CouplingNormalization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsSetup {
    pub tg: Vec<f64>,
    pub window: Option<(f64, f64)>,
    pub truncate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenormSetup {
    /// In units of ω_IR.
    pub g_over_ir: Vec<f64>,
    pub variant: LambdaVariant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSetup {
    pub g_over_ir: Vec<f64>,
    pub delta0_over_ir: Vec<f64>,
    pub variant: LambdaVariant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisorderSetup {
    pub sigma: f64,
    pub seeds: u64,
    pub seed_base: u64,
    /// rad/s
    pub band: (f64, f64),
}

/// A fully resolved configuration. Frequencies are rad/s, lengths metres.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub circuit: CircuitSpec,
    pub qubit: QubitSetup,
    pub modes_window: Option<(f64, f64)>,
    pub dynamics: DynamicsSetup,
    pub renorm: RenormSetup,
    pub phase: PhaseSetup,
    pub disorder: DisorderSetup,
    pub out_dir: PathBuf,
    pub stem: String,
    /// Hex SHA-256 of the config text.
    pub hash: String,
}

fn one_of(
    errs: &mut Vec<String>,
    a: (&str, Option<f64>),
    b: (&str, Option<f64>),
) -> Option<Result<f64, f64>> {
    match (a.1, b.1) {
        (Some(x), None) => Some(Ok(x)),
        (None, Some(y)) => Some(Err(y)),
        (Some(_), Some(_)) => {
            errs.push(format!("{} and {} are mutually exclusive", a.0, b.0));
            None
        }
        (None, None) => None,
    }
}

fn window(errs: &mut Vec<String>, field: &str, w: Option<[f64; 2]>) -> Option<(f64, f64)> {
    let [lo, hi] = w?;
    if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
        errs.push(format!("{field} must satisfy 0 <= lo <= hi"));
        return None;
    }
    Some((ghz_to_rad(lo), ghz_to_rad(hi)))
}

fn variant(errs: &mut Vec<String>, field: &str, v: &Option<String>) -> LambdaVariant {
    match v.as_deref() {
        None | Some("standard") => LambdaVariant::Standard,
        Some("literal") => LambdaVariant::Literal,
        Some(other) => {
            errs.push(format!(
                "{field}: unknown variant `{other}` (standard | literal)"
            ));
            LambdaVariant::Standard
        }
    }
}

fn positive(errs: &mut Vec<String>, field: &str, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        errs.push(format!("{field} must be finite and > 0 (got {v})"));
    }
}

fn hex_digest(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let mut errs = Vec::new();

        let c = &raw.circuit;
        let (c_left, l_left) = match (c.c_left, c.l_left, c.design_impedance, c.cutoff_ghz) {
            (Some(cl), Some(ll), None, None) => (cl, ll),
            (None, None, Some(z), Some(f)) => design_from_impedance(z, ghz_to_rad(f))
                .unwrap_or_else(|e| {
                    errs.push(format!("circuit.design_impedance/cutoff_ghz: {e}"));
                    (f64::NAN, f64::NAN)
                }),
            _ => {
                errs.push(
                    "circuit: give either c_left and l_left, or design_impedance and cutoff_ghz"
                        .to_string(),
                );
                (f64::NAN, f64::NAN)
            }
        };
        let (c_r, l_r) = match (
            c.c_right_per_len,
            c.l_right_per_len,
            c.rhtl_impedance,
            c.rhtl_velocity,
        ) {
            (Some(cr), Some(lr), None, None) => (cr, lr),
            (None, None, Some(z), Some(v)) => rhtl_per_length(z, v).unwrap_or_else(|e| {
                errs.push(format!("circuit.rhtl_impedance/rhtl_velocity: {e}"));
                (f64::NAN, f64::NAN)
            }),
            _ => {
                errs.push(
                    "circuit: give either c_right_per_len and l_right_per_len, or rhtl_impedance and rhtl_velocity"
                        .to_string(),
                );
                (f64::NAN, f64::NAN)
            }
        };
        let mut circuit = CircuitSpec::new(
            c.n_left,
            c_left,
            l_left,
            c.cell_pitch,
            c.rhtl_length,
            c_r,
            l_r,
            c.n_right,
        );
        circuit.c_end_left = c.c_end_left;
        circuit.c_end_right = c.c_end_right;
        if errs.is_empty() {
            if let Err(metaline_core::Error::Validation(list)) = circuit.validate() {
                errs.extend(list.into_iter().map(|m| format!("circuit.{m}")));
            }
        }
        let omega_ir = circuit.omega_ir();

        let q = &raw.qubit;
        let delta0 = one_of(
            &mut errs,
            ("qubit.delta0_ghz", q.delta0_ghz),
            ("qubit.delta0_over_ir", q.delta0_over_ir),
        )
        .map(|v| match v {
            Ok(ghz) => ghz_to_rad(ghz),
            Err(r) => r * omega_ir,
        });
        if let Some(d) = delta0 {
            positive(&mut errs, "qubit.delta0", d);
        }
        let placement = match one_of(
            &mut errs,
            ("qubit.position", q.position),
            ("qubit.antinode_ghz", q.antinode_ghz),
        ) {
            Some(Ok(x)) => Placement::At(x),
            Some(Err(f)) => {
                positive(&mut errs, "qubit.antinode_ghz", f);
                Placement::Antinode(ghz_to_rad(f))
            }
            None => Placement::Antinode(ghz_to_rad(4.579)),
        };
        let extent = q.extent.unwrap_or(5e-4);
        positive(&mut errs, "qubit.extent", extent);
        let g_global = one_of(
            &mut errs,
            ("qubit.g_ghz", q.g_ghz),
            ("qubit.g_over_ir", q.g_over_ir),
        )
        .map(|v| match v {
            Ok(ghz) => ghz_to_rad(ghz),
            Err(r) => r * omega_ir,
        })
        .unwrap_or(0.0);
        if !(g_global >= 0.0 && g_global.is_finite()) {
            errs.push(format!("qubit.g must be finite and >= 0 (got {g_global})"));
        }
        let normalization = match q.normalization.as_deref() {
            None | Some("spatial") => CouplingNormalization::Spatial,
            Some("density") => CouplingNormalization::DensityWeighted,
            Some(other) => {
                errs.push(format!(
                    "qubit.normalization: unknown value `{other}` (spatial | density)"
                ));
                CouplingNormalization::Spatial
            }
        };

        let modes_window = window(&mut errs, "modes.window_ghz", raw.modes.window_ghz);

        let default_tg = RawGrid {
            values: None,
            start: Some(0.0),
            stop: Some(10.0),
            points: Some(11),
            log: false,
            include_zero: false,
        };
        let tg = raw
            .dynamics
            .tg
            .as_ref()
            .unwrap_or(&default_tg)
            .resolve("dynamics.tg")
            .unwrap_or_else(|e| {
                errs.push(e);
                Vec::new()
            });
        let dynamics = DynamicsSetup {
            tg,
            window: window(&mut errs, "dynamics.window_ghz", raw.dynamics.window_ghz),
            truncate: raw.dynamics.truncate,
        };

        let grid = |g: &Option<RawGrid>, field: &str, errs: &mut Vec<String>| match g {
            Some(g) => g.resolve(field).unwrap_or_else(|e| {
                errs.push(e);
                Vec::new()
            }),
            None => Vec::new(),
        };
        let renorm = RenormSetup {
            g_over_ir: grid(&raw.renorm.g_over_ir, "renorm.g_over_ir", &mut errs),
            variant: variant(&mut errs, "renorm.variant", &raw.renorm.variant),
        };
        let phase = PhaseSetup {
            g_over_ir: grid(&raw.phase.g_over_ir, "phase.g_over_ir", &mut errs),
            delta0_over_ir: grid(&raw.phase.delta0_over_ir, "phase.delta0_over_ir", &mut errs),
            variant: variant(&mut errs, "phase.variant", &raw.phase.variant),
        };

        let d = &raw.disorder;
        let sigma = d.sigma.unwrap_or(0.02);
        if !(0.0..0.5).contains(&sigma) {
            errs.push(format!("disorder.sigma must lie in [0, 0.5) (got {sigma})"));
        }
        let seeds = d.seeds.unwrap_or(50);
        if seeds == 0 {
            errs.push("disorder.seeds must be >= 1".to_string());
        }
        let band = window(
            &mut errs,
            "disorder.band_ghz",
            Some(d.band_ghz.unwrap_or([4.119, 5.039])),
        )
        .unwrap_or((0.0, 0.0));
        let disorder = DisorderSetup {
            sigma,
            seeds,
            seed_base: d.seed_base.unwrap_or(0),
            band,
        };

        if !errs.is_empty() {
            return Err(CliError::Config(errs.join("; ")));
        }
        Ok(RunConfig {
            circuit,
            qubit: QubitSetup {
                delta0,
                placement,
                extent,
                g_global,
                normalization,
            },
            modes_window,
            dynamics,
            renorm,
            phase,
            disorder,
            out_dir: raw.output.dir.unwrap_or_else(|| PathBuf::from("out")),
            stem: raw.output.stem.unwrap_or_default(),
            hash: hex_digest(text),
        })
    }

    pub fn omega_ir(&self) -> f64 {
        self.circuit.omega_ir()
    }

    pub fn delta0(&self) -> Result<f64, CliError> {
        self.qubit.delta0.ok_or_else(|| {
            CliError::Config("qubit.delta0_ghz or qubit.delta0_over_ir is required".to_string())
        })
    }
}
