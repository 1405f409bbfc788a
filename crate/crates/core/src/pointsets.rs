//! Finite point sets in the plane or the half-plane: separation, greedy
//! decompositions and nets, density checks, coverings, lattices and jitter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Geometry, PhasePoint};
use crate::grid::PhaseGrid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    geometry: Geometry,
    points: Vec<PhasePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    separation: Option<f64>,
}

impl PointSet {
    pub fn new(geometry: Geometry, points: Vec<PhasePoint>) -> Result<PointSet> {
        for &p in &points {
            geometry.validate(p)?;
        }
        Ok(PointSet {
            geometry,
            points,
            separation: None,
        })
    }

    pub fn empty(geometry: Geometry) -> PointSet {
        PointSet {
            geometry,
            points: Vec::new(),
            separation: None,
        }
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distance(&self, a: PhasePoint, b: PhasePoint) -> f64 {
        self.geometry.distance(a, b)
    }

    /// Separation, computed once and cached.
    pub fn separation(&mut self) -> Result<f64> {
        if let Some(s) = self.separation {
            return Ok(s);
        }
        let s = separation_constant(self)?;
        self.separation = Some(s);
        Ok(s)
    }

    pub fn cached_separation(&self) -> Option<f64> {
        self.separation
    }

    /// Union with another set of the same geometry, keeping order.
    pub fn union(&self, other: &PointSet) -> Result<PointSet> {
        if self.geometry != other.geometry {
            return Err(Error::GeometryMismatch {
                expected: self.geometry,
                found: other.geometry,
            });
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        Ok(PointSet::new_unchecked(self.geometry, points))
    }

    /// Points inside the grid box.
    pub fn restrict_to(&self, grid: &PhaseGrid) -> PointSet {
        PointSet::new_unchecked(
            self.geometry,
            self.points.iter().copied().filter(|&p| grid.covers(p)).collect(),
        )
    }

    fn new_unchecked(geometry: Geometry, points: Vec<PhasePoint>) -> PointSet {
        PointSet {
            geometry,
            points,
            separation: None,
        }
    }

    fn nearest(&self, z: PhasePoint) -> Option<(usize, f64)> {
        self.points
            .iter()
            .enumerate()
            .map(|(k, &p)| (k, self.distance(z, p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Minimum pairwise distance.
pub fn separation_constant(set: &PointSet) -> Result<f64> {
    if set.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            found: set.len(),
        });
    }
    let p = set.points();
    let mut best = f64::INFINITY;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            best = best.min(set.distance(p[i], p[j]));
        }
    }
    Ok(best)
}

/// Greedy coloring into subsets with separation at least `eps`: each point
/// joins the first subset it is `eps`-far from.
pub fn decompose_uniformly_discrete(set: &PointSet, eps: f64) -> Result<Vec<PointSet>> {
    if !(eps > 0.0) {
        return Err(invalid("eps", "must be positive"));
    }
    let mut parts: Vec<Vec<PhasePoint>> = Vec::new();
    for &p in set.points() {
        match parts
            .iter_mut()
            .find(|part| part.iter().all(|&q| set.distance(p, q) >= eps))
        {
            Some(part) => part.push(p),
            None => parts.push(vec![p]),
        }
    }
    Ok(parts
        .into_iter()
        .map(|pts| PointSet::new_unchecked(set.geometry(), pts))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub dense: bool,
    /// Largest distance from a grid node to the set.
    pub worst_gap: f64,
    pub worst_point: Option<PhasePoint>,
}

/// Whether every grid node lies within `delta` of the set.
pub fn density_check(set: &PointSet, delta: f64, grid: &PhaseGrid) -> Result<DensityReport> {
    if !(delta > 0.0) {
        return Err(invalid("delta", "must be positive"));
    }
    grid.require(set.geometry())?;
    if set.is_empty() {
        return Ok(DensityReport {
            dense: false,
            worst_gap: f64::INFINITY,
            worst_point: grid.points().next(),
        });
    }
    let mut worst = (0.0f64, None);
    for z in grid.points() {
        let (_, d) = set.nearest(z).expect("nonempty");
        if d > worst.0 {
            worst = (d, Some(z));
        }
    }
    Ok(DensityReport {
        dense: worst.0 < delta,
        worst_gap: worst.0,
        worst_point: worst.1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatedSubset {
    pub subset: PointSet,
    /// Largest number of points of the original set in one ball `B(w_i, δ)`.
    pub multiplicity: usize,
    /// Index into `subset` of the ball each original point was assigned to.
    pub assignment: Vec<usize>,
}

/// Greedy `δ`-net: a point joins the net unless it is within `δ` of an
/// earlier net point.
pub fn extract_separated_subset(set: &PointSet, delta: f64) -> Result<SeparatedSubset> {
    if !(delta > 0.0) {
        return Err(invalid("delta", "must be positive"));
    }
    let mut net: Vec<PhasePoint> = Vec::new();
    let mut assignment = Vec::with_capacity(set.len());
    for &p in set.points() {
        match net.iter().position(|&w| set.distance(p, w) < delta) {
            Some(i) => assignment.push(i),
            None => {
                assignment.push(net.len());
                net.push(p);
            }
        }
    }
    let multiplicity = net
        .iter()
        .map(|&w| set.points().iter().filter(|&&p| set.distance(p, w) < delta).count())
        .max()
        .unwrap_or(0);
    Ok(SeparatedSubset {
        subset: PointSet::new_unchecked(set.geometry(), net),
        multiplicity,
        assignment,
    })
}

/// A partition of a grid into cells `V_j` around the centers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Covering {
    pub centers: PointSet,
    /// Measure of each cell.
    pub cell_areas: Vec<f64>,
    pub delta: f64,
    pub inner_radius: f64,
    /// Cell index of every grid node.
    pub assignment: Vec<usize>,
    pub grid: PhaseGrid,
}

impl Covering {
    pub fn c_min(&self) -> f64 {
        self.cell_areas.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn c_max(&self) -> f64 {
        self.cell_areas.iter().copied().fold(0.0, f64::max)
    }

    /// Grid node indices of cell `j`.
    pub fn cell(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c == j)
            .map(|(k, _)| k)
    }

    /// Node lists of all cells.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); self.centers.len()];
        for (k, &c) in self.assignment.iter().enumerate() {
            cells[c].push(k);
        }
        cells
    }
}

/// Partition of `grid` into cells `V_j ⊆ B(z_j, δ)` containing the inner
/// balls `B(z_j, α/2)`, where `α` is the separation of the centers.
///
/// Nodes inside an inner ball go to its center; the rest go to the first
/// center within `δ`.
pub fn build_covering(centers: &PointSet, delta: f64, grid: &PhaseGrid) -> Result<Covering> {
    let density = density_check(centers, delta, grid)?;
    if !density.dense {
        return Err(Error::DensityFailure {
            gap: density.worst_gap,
            delta,
        });
    }
    let alpha = if centers.len() >= 2 {
        separation_constant(centers)?
    } else {
        2.0 * delta
    };
    if !(alpha > 0.0) {
        return Err(invalid("centers", "not uniformly discrete"));
    }
    let inner = 0.5 * alpha;
    let pts = centers.points();
    let mut assignment = Vec::with_capacity(grid.len());
    let mut areas = vec![0.0; pts.len()];
    for (k, z) in grid.points().enumerate() {
        let mut inner_hit = None;
        let mut first_hit = None;
        for (j, &c) in pts.iter().enumerate() {
            let d = centers.distance(z, c);
            if d < inner {
                inner_hit = Some(j);
                break;
            }
            if first_hit.is_none() && d < delta {
                first_hit = Some(j);
            }
        }
        let j = inner_hit.or(first_hit).expect("density check passed");
        if centers.distance(z, pts[j]) >= delta {
            return Err(Error::InnerBallViolation { center: j });
        }
        assignment.push(j);
        areas[j] += grid.weight_at(k);
    }
    if let Some(j) = areas.iter().position(|&a| a <= 0.0) {
        return Err(invalid("centers", format!("center {j} has an empty cell on the grid")));
    }
    Ok(Covering {
        centers: centers.clone(),
        cell_areas: areas,
        delta,
        inner_radius: inner,
        assignment,
        grid: grid.clone(),
    })
}

/// Lattice generators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LatticeSpec {
    /// `aℤ × bℤ ∩ [−R, R]²`.
    Plane { a: f64, b: f64, radius: f64 },
    /// `{(n·b·a^j, a^j)}` with `y_min ≤ a^j ≤ y_max` and `|n·b·a^j| ≤ x_max`.
    HalfPlane {
        a: f64,
        b: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
}

impl LatticeSpec {
    pub fn geometry(&self) -> Geometry {
        match self {
            LatticeSpec::Plane { .. } => Geometry::Plane,
            LatticeSpec::HalfPlane { .. } => Geometry::HalfPlane,
        }
    }
}

pub fn lattice(spec: &LatticeSpec) -> Result<PointSet> {
    const EPS: f64 = 1e-9;
    match *spec {
        LatticeSpec::Plane { a, b, radius } => {
            if !(a > 0.0 && b > 0.0 && radius >= 0.0) {
                return Err(invalid("lattice", "plane lattice needs a, b > 0 and radius >= 0"));
            }
            let (m, n) = ((radius / a + EPS).floor() as i64, (radius / b + EPS).floor() as i64);
            let points = (-m..=m)
                .flat_map(|i| (-n..=n).map(move |j| PhasePoint::new(i as f64 * a, j as f64 * b)))
                .collect();
            Ok(PointSet::new_unchecked(Geometry::Plane, points))
        }
        LatticeSpec::HalfPlane {
            a,
            b,
            x_max,
            y_min,
            y_max,
        } => {
            if !(a > 1.0) {
                return Err(invalid("a", "half-plane scale base must exceed 1"));
            }
            if !(b > 0.0 && x_max >= 0.0 && y_min > 0.0 && y_max >= y_min) {
                return Err(invalid(
                    "lattice",
                    "half-plane lattice needs b > 0 and 0 < y_min <= y_max",
                ));
            }
            let j0 = (y_min.ln() / a.ln() - EPS).ceil() as i64;
            let j1 = (y_max.ln() / a.ln() + EPS).floor() as i64;
            let mut points = Vec::new();
            for j in j0..=j1 {
                let y = a.powi(j as i32);
                let step = b * y;
                let n = (x_max / step + EPS).floor() as i64;
                points.extend((-n..=n).map(|k| PhasePoint::new(k as f64 * step, y)));
            }
            Ok(PointSet::new_unchecked(Geometry::HalfPlane, points))
        }
    }
}

/// Moves every point by less than `delta` in the set's metric, in a random
/// direction; deterministic per seed.
pub fn jitter(set: &PointSet, delta: f64, seed: u64) -> Result<PointSet> {
    if !(delta >= 0.0) {
        return Err(invalid("delta", "must be nonnegative"));
    }
    if delta == 0.0 {
        return Ok(PointSet::new_unchecked(set.geometry(), set.points().to_vec()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = set.geometry();
    let points = set
        .points()
        .iter()
        .map(|&p| {
            let r = delta * rng.random::<f64>();
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            let q = g.point_at(p, r, theta);
            debug_assert!(g.distance(p, q) < delta * (1.0 + 1e-12));
            q
        })
        .collect();
    Ok(PointSet::new_unchecked(g, points))
}

/// Largest displacement between paired points.
pub fn max_displacement(a: &PointSet, b: &PointSet) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch(a.len(), b.len()));
    }
    Ok(a.points()
        .iter()
        .zip(b.points())
        .map(|(&p, &q)| a.distance(p, q))
        .fold(0.0, f64::max))
}

/// Sample of `n` points uniformly in the grid box whose separation is at
/// least `eps`, by dart throwing; deterministic per seed.
pub fn random_separated(grid: &PhaseGrid, eps: f64, n: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = grid.geometry();
    let (x0, x1) = grid.x_range();
    let (y0, y1) = grid.y_range();
    let mut points: Vec<PhasePoint> = Vec::new();
    for _ in 0..50 * n.max(1) {
        if points.len() == n {
            break;
        }
        let x = rng.random_range(x0..=x1);
        let y = match g {
            Geometry::Plane => rng.random_range(y0..=y1),
            Geometry::HalfPlane => rng.random_range(y0.ln()..=y1.ln()).exp(),
        };
        let z = PhasePoint::new(x, y);
        if points.iter().all(|&p| g.distance(p, z) >= eps) {
            points.push(z);
        }
    }
    PointSet::new_unchecked(g, points)
}
