use std::fmt;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use framelab_core::bounds::TestSpace;
use framelab_core::grid::PhaseGrid;
use framelab_core::io::{read_point_set, read_signal};
use framelab_core::pointsets::{lattice, random_separated, LatticeSpec, PointSet};
use framelab_core::{Descriptor, Geometry, PhasePoint, QuadratureSpec, Signal};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Transform,
    Kernel,
    Bounds,
    Stability,
    Density,
    Extract,
    Residuals,
    Reconstruct,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Transform => "transform",
            Command::Kernel => "kernel",
            Command::Bounds => "bounds",
            Command::Stability => "stability",
            Command::Density => "density",
            Command::Extract => "extract",
            Command::Residuals => "residuals",
            Command::Reconstruct => "reconstruct",
        }
    }

    fn needs_deltas(self) -> bool {
        matches!(self, Command::Stability | Command::Density | Command::Extract)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A closed-form descriptor string or a `t,re,im` CSV file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignalSpec {
    Descriptor(Descriptor),
    File { file: PathBuf },
}

impl SignalSpec {
    pub fn load(&self, base: &Path) -> Result<Signal, CliError> {
        match self {
            SignalSpec::Descriptor(d) => Signal::closed(*d).map_err(CliError::config),
            SignalSpec::File { file } => {
                let path = base.join(file);
                let f = File::open(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                read_signal(f).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
            }
        }
    }

    pub fn descriptor(&self) -> Option<Descriptor> {
        match self {
            SignalSpec::Descriptor(d) => Some(*d),
            SignalSpec::File { .. } => None,
        }
    }
}

impl FromStr for SignalSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        s.parse().map(SignalSpec::Descriptor).map_err(CliError::config)
    }
}

/// Where the point set comes from; its geometry is the run geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum PointsSpec {
    /// `x,y` CSV file.
    File(PathBuf),
    Lattice(LatticeSpec),
    /// `n` dart-throwing samples with separation `eps` on the run grid.
    Random {
        eps: f64,
        n: usize,
    },
    List(Vec<(f64, f64)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestSpaceSpec {
    /// Number of Hermite functions.
    pub dimension: usize,
    pub center: f64,
    pub scale: f64,
}

impl Default for TestSpaceSpec {
    fn default() -> Self {
        TestSpaceSpec {
            dimension: 8,
            center: 0.0,
            scale: 1.0,
        }
    }
}

impl TestSpaceSpec {
    pub fn build(&self) -> TestSpace {
        TestSpace::hermite_at(self.dimension, self.center, self.scale)
    }
}

/// Grids for the finite-difference residuals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResidualSpec {
    pub plane_radius: f64,
    pub plane_step: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub hx: f64,
    pub hu: f64,
    /// Exponent `a` of the wavelet `Re (t + i)^a`.
    pub exponent: f64,
    /// Shift of the Gaussian window for the translated-window residual.
    pub shift: (f64, f64),
    /// Restricts the ∂̄ residuals to `|z + z₀| ≤ disc`.
    pub disc: Option<f64>,
}

impl Default for ResidualSpec {
    fn default() -> Self {
        ResidualSpec {
            plane_radius: 3.0,
            plane_step: 0.05,
            x_max: 1.5,
            y_min: 0.5,
            y_max: 2.0,
            hx: 0.01,
            hu: 0.02,
            exponent: -2.0,
            shift: (0.3, 0.7),
            disc: Some(2.5),
        }
    }
}

/// The JSON configuration file. Missing fields take defaults; fields left
/// `null` are resolved from the geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub geometry: Geometry,
    /// Window (plane) or mother wavelet (half-plane).
    pub atom: Option<SignalSpec>,
    /// Analysed signal for `transform` and `residuals`.
    pub signal: Option<SignalSpec>,
    pub points: Option<PointsSpec>,
    pub quadrature: QuadratureSpec,
    pub deltas: Vec<f64>,
    pub test_space: TestSpaceSpec,
    pub residuals: ResidualSpec,
    /// Stride of the grid nodes used for suprema over `z`.
    pub sup_stride: usize,
    pub iterations: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            geometry: Geometry::Plane,
            atom: None,
            signal: None,
            points: None,
            quadrature: QuadratureSpec::default(),
            deltas: Vec::new(),
            test_space: TestSpaceSpec::default(),
            residuals: ResidualSpec::default(),
            sup_stride: 4,
            iterations: 10,
            seed: 0,
            out: PathBuf::from("framelab-out"),
        }
    }
}

/// Flag values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub geometry: Option<Geometry>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(g) = o.geometry {
            self.geometry = g;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
    }

    /// Fills geometry-dependent defaults and checks consistency.
    pub fn resolve(mut self, command: Command) -> Result<RunConfig, CliError> {
        self.command = Some(command);
        self.quadrature.validate().map_err(CliError::config)?;
        let g = self.geometry;
        if self.atom.is_none() {
            self.atom = Some(SignalSpec::Descriptor(match g {
                Geometry::Plane => Descriptor::Gaussian,
                Geometry::HalfPlane => Descriptor::PoissonComplex { alpha: 5.0 },
            }));
        }
        if self.signal.is_none() {
            self.signal = Some(SignalSpec::Descriptor(Descriptor::Gaussian));
        }
        if self.points.is_none() {
            let r = self.quadrature.radius;
            self.points = Some(PointsSpec::Lattice(match g {
                Geometry::Plane => LatticeSpec::Plane {
                    a: 0.5,
                    b: 0.5,
                    radius: r,
                },
                Geometry::HalfPlane => LatticeSpec::HalfPlane {
                    a: 2.0,
                    b: 1.0,
                    x_max: r,
                    y_min: 0.25,
                    y_max: 4.0,
                },
            }));
        }
        if let Some(PointsSpec::Lattice(spec)) = &self.points {
            if spec.geometry() != g {
                return Err(CliError::Config(format!(
                    "lattice is a {} lattice but the run geometry is {g}",
                    spec.geometry()
                )));
            }
        }
        if let Some(d) = self.atom.as_ref().and_then(SignalSpec::descriptor) {
            let poisson = d.exponent().is_some();
            if g == Geometry::Plane && poisson {
                return Err(CliError::Config(format!(
                    "atom {d} is a wavelet; use geometry halfplane"
                )));
            }
        }
        if self.deltas.is_empty() && command.needs_deltas() {
            self.deltas = match command {
                Command::Stability => vec![0.1, 0.05, 0.025],
                Command::Extract => vec![0.4],
                _ => vec![0.35],
            };
        }
        if self.deltas.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(CliError::Config(format!(
                "deltas must be positive, got {:?}",
                self.deltas
            )));
        }
        if self.sup_stride == 0 {
            return Err(CliError::Config("sup_stride must be at least 1".into()));
        }
        if self.test_space.dimension == 0 || !(self.test_space.scale > 0.0) {
            return Err(CliError::Config("test space needs dimension >= 1 and scale > 0".into()));
        }
        Ok(self)
    }

    pub fn atom_spec(&self) -> &SignalSpec {
        self.atom.as_ref().expect("resolved config")
    }

    pub fn signal_spec(&self) -> &SignalSpec {
        self.signal.as_ref().expect("resolved config")
    }

    /// Phase-space grid of the run, centered at the identity.
    pub fn grid(&self) -> Result<PhaseGrid, CliError> {
        let q = &self.quadrature;
        match self.geometry {
            Geometry::Plane => Ok(PhaseGrid::plane_box(q.radius, q.step, q.scheme)),
            Geometry::HalfPlane => {
                PhaseGrid::half_plane(q.radius, q.step, q.y_min, q.y_max, q.scheme).map_err(CliError::config)
            }
        }
    }

    pub fn load_points(&self, base: &Path) -> Result<PointSet, CliError> {
        let g = self.geometry;
        match self.points.as_ref().expect("resolved config") {
            PointsSpec::File(file) => {
                let path = base.join(file);
                let f = File::open(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                read_point_set(f, g).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
            }
            PointsSpec::Lattice(spec) => lattice(spec).map_err(CliError::config),
            PointsSpec::Random { eps, n } => {
                if !(*eps > 0.0) {
                    return Err(CliError::Config(format!("random point set needs eps > 0, got {eps}")));
                }
                Ok(random_separated(&self.grid()?, *eps, *n, self.seed))
            }
            PointsSpec::List(pts) => {
                PointSet::new(g, pts.iter().map(|&(x, y)| PhasePoint::new(x, y)).collect()).map_err(CliError::config)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_by_geometry() {
        let c = RunConfig::default().resolve(Command::Bounds).unwrap();
        assert_eq!(c.atom, Some(SignalSpec::Descriptor(Descriptor::Gaussian)));
        let mut h = RunConfig::default();
        h.apply(&Overrides {
            geometry: Some(Geometry::HalfPlane),
            ..Overrides::default()
        });
        let h = h.resolve(Command::Density).unwrap();
        assert!(matches!(
            h.points,
            Some(PointsSpec::Lattice(LatticeSpec::HalfPlane { .. }))
        ));
        assert_eq!(h.deltas, vec![0.35]);
    }

    #[test]
    fn config_parsing() {
        let c = RunConfig::from_json(
            r#"{"geometry": "plane", "atom": "hermite:1", "points": {"lattice": {"kind": "plane", "a": 1, "b": 1, "radius": 2}},
                "quadrature": {"step": 0.1}, "deltas": [0.2], "seed": 7}"#,
        )
        .unwrap();
        assert_eq!(c.atom, Some(SignalSpec::Descriptor(Descriptor::Hermite(1))));
        assert_eq!(c.quadrature.step, 0.1);
        assert_eq!(c.quadrature.radius, 4.0);
        let f = RunConfig::from_json(r#"{"atom": {"file": "g.csv"}, "points": {"file": "p.csv"}}"#).unwrap();
        assert_eq!(f.atom, Some(SignalSpec::File { file: "g.csv".into() }));
        assert!(RunConfig::from_json(r#"{"atomz": "gaussian"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"atom": "nonsense"}"#).is_err());
        assert!(RunConfig::from_json("{").is_err());
        for name in ["halfplane", "half-plane", "half_plane"] {
            let c = RunConfig::from_json(&format!(r#"{{"geometry": "{name}"}}"#)).unwrap();
            assert_eq!(c.geometry, Geometry::HalfPlane);
        }
    }

    #[test]
    fn inconsistent_configs_are_rejected() {
        let c = RunConfig::from_json(
            r#"{"geometry": "halfplane", "points": {"lattice": {"kind": "plane", "a": 1, "b": 1, "radius": 2}}}"#,
        )
        .unwrap();
        assert!(matches!(c.resolve(Command::Bounds), Err(CliError::Config(_))));
        let c = RunConfig::from_json(r#"{"atom": "poisson-real:3"}"#).unwrap();
        assert!(c.resolve(Command::Kernel).is_err());
        let c = RunConfig::from_json(r#"{"deltas": [0.1, -1]}"#).unwrap();
        assert!(c.resolve(Command::Density).is_err());
        let c = RunConfig::from_json(r#"{"quadrature": {"step": -1}}"#).unwrap();
        assert!(c.resolve(Command::Kernel).is_err());
    }

    #[test]
    fn flags_win() {
        let mut c = RunConfig::from_json(r#"{"seed": 3, "out": "a"}"#).unwrap();
        c.apply(&Overrides {
            geometry: None,
            seed: Some(9),
            out: Some("b".into()),
        });
        assert_eq!((c.seed, c.out.clone()), (9, PathBuf::from("b")));
    }
}
