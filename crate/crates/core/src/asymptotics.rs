//! Logarithmic interaction energy of point configurations, the two-square
//! tilt sweep on the sphere, elliptic Fekete point optimization, and rigid
//! alignment of point sets.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Rotation3, Unit};
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::mesh::Vec3;
use crate::rational::RationalJson;

#[derive(Debug, Error, PartialEq)]
pub enum AsymptoticsError {
    #[error("points {0} and {1} coincide")]
    CoincidentPoints(usize, usize),
    #[error("point {0} is not on the unit sphere")]
    OffSphere(usize),
    #[error("{points} points but {indices} indices")]
    LengthMismatch { points: usize, indices: usize },
    #[error("square height must lie in (0, 1), got {0}")]
    InvalidHeight(f64),
    #[error("need at least {needed}, got {got}")]
    TooFew { needed: usize, got: usize },
}

const SPHERE_TOLERANCE: f64 = 1e-12;
const COINCIDENCE: f64 = 1e-9;

/// Half side of the inscribed cube, the default height of the two squares.
pub const DEFAULT_SQUARE_HEIGHT: f64 = 0.577_350_269_189_625_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Sphere,
    Planar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration {
    pub mode: Mode,
    pub points: Vec<Vec3>,
    pub indices: Vec<Ratio<i64>>,
}

impl PointConfiguration {
    pub fn new(mode: Mode, points: Vec<Vec3>, indices: Vec<Ratio<i64>>) -> Result<Self, AsymptoticsError> {
        if points.len() != indices.len() {
            return Err(AsymptoticsError::LengthMismatch {
                points: points.len(),
                indices: indices.len(),
            });
        }
        if mode == Mode::Sphere {
            if let Some(i) = points.iter().position(|p| (p.norm() - 1.0).abs() > SPHERE_TOLERANCE) {
                return Err(AsymptoticsError::OffSphere(i));
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if (points[i] - points[j]).norm() < COINCIDENCE {
                    return Err(AsymptoticsError::CoincidentPoints(i, j));
                }
            }
        }
        Ok(PointConfiguration { mode, points, indices })
    }

    /// Sphere configuration with every index equal to one.
    pub fn unit_charges(points: Vec<Vec3>) -> Result<Self, AsymptoticsError> {
        let n = points.len();
        Self::new(Mode::Sphere, points, vec![Ratio::from_integer(1); n])
    }
}

#[derive(Serialize)]
struct ConfigurationJson<'a> {
    mode: Mode,
    points: Vec<[f64; 3]>,
    indices: Vec<RationalJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    converged: Option<&'a bool>,
}

/// JSON form `{mode, points: [[x, y, z]..], indices: [{num, den}..]}`.
pub fn configuration_json(config: &PointConfiguration, energy: Option<f64>, converged: Option<&bool>) -> serde_json::Value {
    serde_json::to_value(ConfigurationJson {
        mode: config.mode,
        points: config.points.iter().map(|p| [p.x, p.y, p.z]).collect(),
        indices: config.indices.iter().map(|&q| q.into()).collect(),
        energy,
        converged,
    })
    .expect("configuration serializes")
}

fn ratio_f64(q: Ratio<i64>) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// `-π Σ_i Σ_{j≠i} index_i index_j log |x_i - x_j|` over ordered pairs, with
/// chordal distances.
pub fn log_interaction_energy(config: &PointConfiguration) -> Result<f64, AsymptoticsError> {
    let p = &config.points;
    let mut sum = 0.0;
    for i in 0..p.len() {
        for j in 0..p.len() {
            if i == j {
                continue;
            }
            let d = (p[i] - p[j]).norm();
            if d < COINCIDENCE {
                return Err(AsymptoticsError::CoincidentPoints(i.min(j), i.max(j)));
            }
            sum += ratio_f64(config.indices[i]) * ratio_f64(config.indices[j]) * d.ln();
        }
    }
    Ok(-PI * sum)
}

/// Two squares on the circles `z = ±h`; the lower square is turned by `tilt`.
pub fn two_squares(height: f64, tilt: f64) -> Result<Vec<Vec3>, AsymptoticsError> {
    if !(height > 0.0 && height < 1.0) {
        return Err(AsymptoticsError::InvalidHeight(height));
    }
    let r = (1.0 - height * height).sqrt();
    let mut pts = Vec::with_capacity(8);
    for (z, offset) in [(height, 0.0), (-height, tilt)] {
        for k in 0..4 {
            let a = k as f64 * FRAC_PI_2 + offset;
            pts.push(Vec3::new(r * a.cos(), r * a.sin(), z));
        }
    }
    Ok(pts)
}

/// Evenly spaced tilts over `[0, π/2]`.
pub fn tilt_samples(samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|i| FRAC_PI_2 * i as f64 / (samples - 1).max(1) as f64)
        .collect()
}

/// Interaction energy of the unit-index two-square configuration at each tilt.
pub fn tilt_sweep(height: f64, angles: &[f64]) -> Result<Vec<(f64, f64)>, AsymptoticsError> {
    if angles.len() < 2 {
        return Err(AsymptoticsError::TooFew {
            needed: 2,
            got: angles.len(),
        });
    }
    angles
        .iter()
        .map(|&t| {
            let config = PointConfiguration::unit_charges(two_squares(height, t)?)?;
            Ok((t, log_interaction_energy(&config)?))
        })
        .collect()
}

/// Height minimizing the two-square energy at a fixed tilt (golden-section
/// search over `(0, 1)`), with that energy.
pub fn optimal_square_height(tilt: f64) -> Result<(f64, f64), AsymptoticsError> {
    let energy = |h: f64| -> Result<f64, AsymptoticsError> {
        log_interaction_energy(&PointConfiguration::unit_charges(two_squares(h, tilt)?)?)
    };
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.01, 0.99);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (energy(c)?, energy(d)?);
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = energy(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = energy(d)?;
        }
    }
    let h = 0.5 * (a + b);
    Ok((h, energy(h)?))
}

/// `-Σ_i Σ_{j≠i} log |x_i - x_j|` and its gradient.
fn log_energy_and_gradient(points: &[Vec3]) -> (f64, Vec<Vec3>) {
    let mut e = 0.0;
    let mut g = vec![Vec3::zeros(); points.len()];
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = points[i] - points[j];
            let r2 = d.norm_squared();
            e -= r2.ln();
            let gi = -2.0 * d / r2;
            g[i] += gi;
            g[j] -= gi;
        }
    }
    (e, g)
}

fn tangential(points: &[Vec3], grad: &[Vec3]) -> Vec<Vec3> {
    points.iter().zip(grad).map(|(p, g)| g - p * g.dot(p)).collect()
}

#[derive(Debug, Clone)]
pub struct FeketeResult {
    pub configuration: PointConfiguration,
    /// `-Σ_i Σ_{j≠i} log |x_i - x_j|`.
    pub energy: f64,
    /// Largest tangential gradient component at the returned configuration.
    pub gradient_norm: f64,
    pub converged: bool,
}

pub const FEKETE_RESTARTS: usize = 8;
const FEKETE_GRADIENT_TOL: f64 = 1e-10;
const DESCENT_GRADIENT_TOL: f64 = 1e-5;
const DESCENT_MAX_ITER: usize = 5_000;
const NEWTON_MAX_ITER: usize = 30;

/// Minimizes the logarithmic energy of `count` points on the unit sphere from
/// [`FEKETE_RESTARTS`] random starts: projected gradient descent with
/// backtracking, then Newton steps on the product of spheres. Returns the
/// lowest-energy result.
pub fn fekete_optimize(count: usize, seed: u64) -> Result<FeketeResult, AsymptoticsError> {
    if count < 2 {
        return Err(AsymptoticsError::TooFew { needed: 2, got: count });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<FeketeResult> = None;
    for _ in 0..FEKETE_RESTARTS {
        let start: Vec<Vec3> = (0..count)
            .map(|_| {
                let v = Vec3::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                );
                v.normalize()
            })
            .collect();
        let (points, energy, gradient_norm) = descend(start);
        let better = best.as_ref().map_or(true, |b| energy < b.energy);
        if better {
            best = Some(FeketeResult {
                configuration: PointConfiguration::unit_charges(points)?,
                energy,
                gradient_norm,
                converged: gradient_norm <= FEKETE_GRADIENT_TOL,
            });
        }
    }
    let best = best.expect("at least one restart");
    if !best.converged {
        log::warn!("fekete_optimize({count}) stopped with gradient {:.2e}", best.gradient_norm);
    }
    Ok(best)
}

fn max_component(g: &[Vec3]) -> f64 {
    g.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn descend(start: Vec<Vec3>) -> (Vec<Vec3>, f64, f64) {
    let mut points = start;
    let (mut energy, grad) = log_energy_and_gradient(&points);
    let mut g = tangential(&points, &grad);
    let mut step = 1e-2;
    for _ in 0..DESCENT_MAX_ITER {
        if max_component(&g) <= DESCENT_GRADIENT_TOL {
            break;
        }
        let g2: f64 = g.iter().map(|v| v.norm_squared()).sum();
        loop {
            let trial: Vec<Vec3> = points.iter().zip(&g).map(|(p, gi)| (p - gi * step).normalize()).collect();
            let (e_trial, grad_trial) = log_energy_and_gradient(&trial);
            if e_trial <= energy - 1e-4 * step * g2 || step < 1e-14 {
                points = trial;
                energy = e_trial;
                g = tangential(&points, &grad_trial);
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
    }
    let points = newton_polish(points);
    let (energy, grad) = log_energy_and_gradient(&points);
    let gn = max_component(&tangential(&points, &grad));
    (points, energy, gn)
}

fn tangent_basis(p: &Vec3) -> [Vec3; 2] {
    let helper = if p.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = p.cross(&helper).normalize();
    [u, p.cross(&u)]
}

/// Riemannian Newton iterations; the three rotational null directions are
/// removed with a pseudo-inverse. Steps that do not reduce the gradient are
/// rejected.
fn newton_polish(mut points: Vec<Vec3>) -> Vec<Vec3> {
    let n = points.len();
    let gradient_of = |pts: &[Vec3]| max_component(&tangential(pts, &log_energy_and_gradient(pts).1));
    let mut current = gradient_of(&points);
    for _ in 0..NEWTON_MAX_ITER {
        if current <= FEKETE_GRADIENT_TOL {
            break;
        }
        let (_, grad) = log_energy_and_gradient(&points);
        let mut blocks = vec![Matrix3::<f64>::zeros(); n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = points[i] - points[j];
                let r2 = d.norm_squared();
                let h = -2.0 * (Matrix3::identity() / r2 - 2.0 * d * d.transpose() / (r2 * r2));
                blocks[i * n + i] += h;
                blocks[j * n + j] += h;
                blocks[i * n + j] -= h;
                blocks[j * n + i] -= h;
            }
        }
        let bases: Vec<[Vec3; 2]> = points.iter().map(tangent_basis).collect();
        let mut hess = nalgebra::DMatrix::<f64>::zeros(2 * n, 2 * n);
        let mut rhs = nalgebra::DVector::<f64>::zeros(2 * n);
        for i in 0..n {
            let radial = points[i].dot(&grad[i]);
            for a in 0..2 {
                rhs[2 * i + a] = -bases[i][a].dot(&grad[i]);
                for j in 0..n {
                    for b in 0..2 {
                        let mut v = bases[i][a].dot(&(blocks[i * n + j] * bases[j][b]));
                        if i == j && a == b {
                            v -= radial;
                        }
                        hess[(2 * i + a, 2 * j + b)] = v;
                    }
                }
            }
        }
        let svd = hess.svd(true, true);
        let cutoff = 1e-9 * svd.singular_values.max();
        let Ok(delta) = svd.solve(&rhs, cutoff) else { break };
        let trial: Vec<Vec3> = (0..n)
            .map(|i| (points[i] + bases[i][0] * delta[2 * i] + bases[i][1] * delta[2 * i + 1]).normalize())
            .collect();
        let g = gradient_of(&trial);
        if !(g < current) {
            break;
        }
        points = trial;
        current = g;
    }
    points
}

/// Regular cube inscribed in the unit sphere.
pub fn cube_vertices() -> Vec<Vec3> {
    let s = 1.0 / 3f64.sqrt();
    let mut v = Vec::with_capacity(8);
    for x in [-s, s] {
        for y in [-s, s] {
            for z in [-s, s] {
                v.push(Vec3::new(x, y, z));
            }
        }
    }
    v
}

/// Cuboctahedron inscribed in the unit sphere.
pub fn cuboctahedron_vertices() -> Vec<Vec3> {
    let s = 1.0 / 2f64.sqrt();
    let mut v = Vec::with_capacity(12);
    for a in [-s, s] {
        for b in [-s, s] {
            v.push(Vec3::new(a, b, 0.0));
            v.push(Vec3::new(a, 0.0, b));
            v.push(Vec3::new(0.0, a, b));
        }
    }
    v
}

/// Rigid rotation taking one point set onto another with unknown
/// correspondence.
#[derive(Debug, Clone)]
pub struct Alignment {
    pub rotation: Matrix3<f64>,
    /// `matching[i]` is the target matched with source point `i`.
    pub matching: Vec<usize>,
    pub max_distance: f64,
    pub rms_distance: f64,
}

fn greedy_matching(source: &[Vec3], target: &[Vec3]) -> Vec<usize> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(source.len() * target.len());
    for (i, s) in source.iter().enumerate() {
        for (j, t) in target.iter().enumerate() {
            pairs.push(((s - t).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut matching = vec![usize::MAX; source.len()];
    let mut taken = vec![false; target.len()];
    for (_, i, j) in pairs {
        if matching[i] == usize::MAX && !taken[j] {
            matching[i] = j;
            taken[j] = true;
        }
    }
    matching
}

/// Proper rotation minimizing `Σ |R a_i - b_{m(i)}|²` (Kabsch).
fn kabsch(source: &[Vec3], target: &[Vec3], matching: &[usize]) -> Matrix3<f64> {
    let mut h = Matrix3::zeros();
    for (i, s) in source.iter().enumerate() {
        h += target[matching[i]] * s.transpose();
    }
    let svd = h.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let d = (u * vt).determinant().signum();
    u * Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, d)) * vt
}

fn frame(a: &Vec3, b: &Vec3) -> Option<Matrix3<f64>> {
    let x = a.normalize();
    let y = b - x * x.dot(b);
    if y.norm() < 1e-6 {
        return None;
    }
    let y = y.normalize();
    Some(Matrix3::from_columns(&[x, y, x.cross(&y)]))
}

/// Best rotation of `source` onto `target` (same size) over all anchor-pair
/// correspondences, refined by Kabsch on the induced matching. Points are
/// compared as directions from the origin.
pub fn align(source: &[Vec3], target: &[Vec3]) -> Option<Alignment> {
    if source.len() != target.len() || source.len() < 2 {
        return None;
    }
    let src: Vec<Vec3> = source.iter().map(|p| p.normalize()).collect();
    let tgt: Vec<Vec3> = target.iter().map(|p| p.normalize()).collect();
    let a0 = 0;
    let a1 = (1..src.len())
        .max_by(|&i, &j| {
            let si = src[a0].cross(&src[i]).norm();
            let sj = src[a0].cross(&src[j]).norm();
            si.partial_cmp(&sj).unwrap()
        })
        .unwrap();
    let fa = frame(&src[a0], &src[a1])?;
    let angle = src[a0].dot(&src[a1]).acos();
    let mut best: Option<Alignment> = None;
    for j0 in 0..tgt.len() {
        for j1 in 0..tgt.len() {
            if j0 == j1 || (tgt[j0].dot(&tgt[j1]).clamp(-1.0, 1.0).acos() - angle).abs() > 0.5 {
                continue;
            }
            let Some(fb) = frame(&tgt[j0], &tgt[j1]) else { continue };
            let r0 = fb * fa.transpose();
            let rotated: Vec<Vec3> = src.iter().map(|p| r0 * p).collect();
            let matching = greedy_matching(&rotated, &tgt);
            let r = kabsch(&src, &tgt, &matching);
            let rotated: Vec<Vec3> = src.iter().map(|p| r * p).collect();
            let matching = greedy_matching(&rotated, &tgt);
            let dists: Vec<f64> = rotated.iter().zip(&matching).map(|(p, &m)| (p - tgt[m]).norm()).collect();
            let max_distance = dists.iter().copied().fold(0.0, f64::max);
            if best.as_ref().map_or(true, |b| max_distance < b.max_distance) {
                let rms_distance = (dists.iter().map(|d| d * d).sum::<f64>() / dists.len() as f64).sqrt();
                best = Some(Alignment {
                    rotation: r,
                    matching,
                    max_distance,
                    rms_distance,
                });
            }
        }
    }
    best
}

/// Applies a rotation about `axis` by `angle` to every point.
pub fn rotate_all(points: &[Vec3], axis: Vec3, angle: f64) -> Vec<Vec3> {
    let r = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
    points.iter().map(|p| r * p).collect()
}

/// Integer index multisets `{q_i}` (nonzero parts) with `Σ q_i = target`
/// that minimize the leading energy cost `Σ q_i²`, found by exhaustive
/// enumeration of every multiset whose cost does not exceed `|target|`
/// (the cost of the all-unit partition). Returns the minimal cost and all
/// minimizers, parts sorted ascending.
pub fn minimal_index_partitions(target: i64) -> (i64, Vec<Vec<i64>>) {
    let bound = target.abs();
    let mut best_cost = i64::MAX;
    let mut best = Vec::new();
    let mut parts = Vec::new();
    // Parts are enumerated in ascending order of value: -m..=-1, 1..=m.
    let m = (bound as f64).sqrt().floor() as i64;
    let values: Vec<i64> = (-m..=m).filter(|&v| v != 0).collect();
    fn recurse(
        values: &[i64],
        start: usize,
        parts: &mut Vec<i64>,
        cost: i64,
        sum: i64,
        bound: i64,
        target: i64,
        best_cost: &mut i64,
        best: &mut Vec<Vec<i64>>,
    ) {
        if sum == target {
            if cost < *best_cost {
                *best_cost = cost;
                best.clear();
            }
            if cost == *best_cost {
                best.push(parts.clone());
            }
        }
        for k in start..values.len() {
            let v = values[k];
            let c = cost + v * v;
            if c > bound {
                continue;
            }
            parts.push(v);
            recurse(values, k, parts, c, sum + v, bound, target, best_cost, best);
            parts.pop();
        }
    }
    recurse(&values, 0, &mut parts, 0, 0, bound, target, &mut best_cost, &mut best);
    (best_cost, best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antipodal_pair_energy() {
        let c = PointConfiguration::unit_charges(vec![Vec3::z(), -Vec3::z()]).unwrap();
        let e = log_interaction_energy(&c).unwrap();
        assert!((e - (-PI * 2.0 * 2f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn opposite_indices_attract() {
        let energy = |d: f64| {
            let c = PointConfiguration::new(
                Mode::Planar,
                vec![Vec3::zeros(), Vec3::new(d, 0.0, 0.0)],
                vec![Ratio::from_integer(1), Ratio::from_integer(-1)],
            )
            .unwrap();
            log_interaction_energy(&c).unwrap()
        };
        assert!((energy(0.5) - PI * 2.0 * 0.5f64.ln()).abs() < 1e-14);
        assert!(energy(0.25) < energy(0.5));
    }

    #[test]
    fn invalid_configurations() {
        assert!(PointConfiguration::unit_charges(vec![Vec3::z(), Vec3::z()]).is_err());
        assert!(PointConfiguration::unit_charges(vec![Vec3::new(0.0, 0.0, 1.1)]).is_err());
        assert!(tilt_sweep(1.5, &[0.0, 1.0]).is_err());
        assert!(tilt_sweep(0.5, &[0.0]).is_err());
        assert!(fekete_optimize(1, 0).is_err());
    }

    #[test]
    fn sweep_symmetries_and_minimum() {
        let angles = tilt_samples(91);
        let sweep = tilt_sweep(DEFAULT_SQUARE_HEIGHT, &angles).unwrap();
        assert!((sweep[0].1 - sweep[90].1).abs() < 1e-9);
        for i in 0..91 {
            assert!((sweep[i].1 - sweep[90 - i].1).abs() < 1e-9);
        }
        let (imin, _) = sweep
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
            .unwrap();
        assert_eq!(imin, 45);
    }

    #[test]
    fn fekete_two_points_are_antipodal() {
        let r = fekete_optimize(2, 0).unwrap();
        let p = &r.configuration.points;
        assert!(((p[0] - p[1]).norm() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn energy_is_rotation_invariant() {
        let pts = fekete_optimize(7, 3).unwrap().configuration.points;
        let a = log_interaction_energy(&PointConfiguration::unit_charges(pts.clone()).unwrap()).unwrap();
        let rotated = rotate_all(&pts, Vec3::new(0.3, -1.0, 0.2), 1.234);
        let b = log_interaction_energy(&PointConfiguration::unit_charges(rotated).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn alignment_recovers_a_rotation() {
        let pts = fekete_optimize(8, 1).unwrap().configuration.points;
        let mut rotated = rotate_all(&pts, Vec3::new(1.0, 2.0, -0.5), 0.9);
        rotated.reverse();
        let al = align(&rotated, &pts).unwrap();
        assert!(al.max_distance < 1e-8);
    }

    #[test]
    fn unit_partitions_minimize_the_leading_term() {
        for target in -12i64..=12 {
            let (cost, minimizers) = minimal_index_partitions(target);
            assert_eq!(cost, target.abs());
            assert_eq!(minimizers.len(), 1);
            assert!(minimizers[0].iter().all(|&q| q == target.signum()));
        }
    }
}
