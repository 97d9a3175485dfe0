//! Directions, hyperplanes, rays, the in-plane direction α(θ) and frames on Σ(s,θ).
//!
//! Coordinates are 0-based in code: `e1` is index 0, `e2` index 1 and so on.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::Error;

/// Default tolerance on |θ·e₁|, |θ·e₂| for membership in the degenerate set.
pub const DEGENERATE_TOL: f64 = 1e-9;
/// Offsets with |s| at or below this count as s = 0 in classification.
pub const PLANE_OFFSET_TOL: f64 = 1e-12;
const UNIT_TOL: f64 = 1e-12;
const RAY_FOOT_TOL: f64 = 1e-10;
const GS_SKIP: f64 = 1e-6;

/// A point of S^{d-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Checked constructor; the input must already be unit length.
    pub fn new(components: Vec<f64>) -> Result<Self, Error> {
        if components.len() < 2 {
            return Err(Error::Dimension(format!(
                "direction needs d >= 2, got {}",
                components.len()
            )));
        }
        let n = norm(&components);
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit(n));
        }
        Ok(Self(components))
    }

    /// Normalizes `v`; fails on the zero vector.
    pub fn normalized(v: Vec<f64>) -> Result<Self, Error> {
        let n = norm(&v);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotUnit(n));
        }
        Self::new(v.into_iter().map(|x| x / n).collect())
    }

    /// Standard basis vector e_{i+1} of R^d.
    pub fn basis(d: usize, i: usize) -> Self {
        assert!(d >= 2 && i < d);
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }

    /// Seeded sample from the uniform distribution on S^{d-1}.
    pub fn random<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        loop {
            let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
            if norm(&v) > 1e-6 {
                return Self::normalized(v).expect("nonzero vector");
            }
        }
    }
}

/// Σ(s,θ) = {x : x·θ = s}. Both (s,θ) and (−s,−θ) are accepted as given.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub s: f64,
    pub theta: Direction,
}

impl Hyperplane {
    pub fn new(s: f64, theta: Direction) -> Self {
        Self { s, theta }
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }
}

/// Oriented line {base + t·direction} with base the foot of the perpendicular.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub base: Vec<f64>,
    pub direction: Direction,
}

impl Ray {
    pub fn new(base: Vec<f64>, direction: Direction) -> Result<Self, Error> {
        if base.len() != direction.dim() {
            return Err(Error::Dimension(format!(
                "ray base has {} components, direction {}",
                base.len(),
                direction.dim()
            )));
        }
        let bd = dot(&base, direction.as_slice());
        if bd.abs() > RAY_FOOT_TOL {
            return Err(Error::RayBase(bd));
        }
        Ok(Self { base, direction })
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        let mut x = self.base.clone();
        axpy(t, self.direction.as_slice(), &mut x);
        x
    }
}

/// Orthonormal basis (α, β₁, …, β_{d−2}) of the hyperplane directions.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub alpha: Direction,
    pub betas: Vec<Direction>,
}

impl Frame {
    /// All d−1 vectors, α first.
    pub fn vectors(&self) -> impl Iterator<Item = &Direction> {
        std::iter::once(&self.alpha).chain(self.betas.iter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum IntersectionKind {
    Line,
    Plane,
    Empty,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// y += a·x
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn require_d3(theta: &Direction) -> Result<(), Error> {
    if theta.dim() < 3 {
        return Err(Error::Dimension(format!(
            "the degenerate set needs d >= 3, got {}",
            theta.dim()
        )));
    }
    Ok(())
}

/// θ ∈ Θ(e₁,e₂) up to `tol`.
pub fn is_degenerate(theta: &Direction, tol: f64) -> Result<bool, Error> {
    require_d3(theta)?;
    let t = theta.as_slice();
    Ok(t[0].abs() <= tol && t[1].abs() <= tol)
}

fn check_nondegenerate(theta: &Direction) -> Result<(), Error> {
    if is_degenerate(theta, DEGENERATE_TOL)? {
        return Err(Error::DegenerateDirection);
    }
    Ok(())
}

/// det of the d×d matrix with rows (a, θ, e₃, …, e_d).
///
/// Only the leading 2×2 minor survives the expansion along e₃..e_d, but we
/// keep the generic LU so the check does not share code with the formula.
pub fn orientation_det(a: &[f64], theta: &[f64]) -> f64 {
    let d = theta.len();
    let m = DMatrix::from_fn(d, d, |r, c| match r {
        0 => a[c],
        1 => theta[c],
        _ => {
            if c == r {
                1.0
            } else {
                0.0
            }
        }
    });
    m.determinant()
}

/// Unit direction of Σ(s,θ) ∩ Span(e₁,e₂), signed so that det(α, θ, e₃, …) > 0.
pub fn alpha_of_theta(theta: &Direction) -> Result<Direction, Error> {
    check_nondegenerate(theta)?;
    let t = theta.as_slice();
    let d = t.len();
    let rho = t[0].hypot(t[1]);
    let mut cand = vec![0.0; d];
    cand[0] = -t[1] / rho;
    cand[1] = t[0] / rho;
    let mut det = orientation_det(&cand, t);
    if det < 0.0 {
        cand[0] = -cand[0];
        cand[1] = -cand[1];
        det = -det;
    }
    assert!(det > 0.0, "orientation determinant vanished for non-degenerate theta");
    Ok(Direction(cand))
}

/// (−1)^{d−1} ⋆(θ ∧ e₃ ∧ … ∧ e_d), normalized.
///
/// The Hodge star of the (d−1)-blade is the vector v with v·u = det(u, θ, e₃, …)
/// for all u, so v_i is the cofactor of row 0, column i of that matrix.
pub fn alpha_hodge(theta: &Direction) -> Result<Direction, Error> {
    check_nondegenerate(theta)?;
    let t = theta.as_slice();
    let d = t.len();
    // rows θ, e₃, …, e_d; v_i = (−1)^i · minor with column i removed
    let rows = DMatrix::from_fn(d - 1, d, |r, c| match r {
        0 => t[c],
        _ => {
            if c == r + 1 {
                1.0
            } else {
                0.0
            }
        }
    });
    let v: Vec<f64> = (0..d)
        .map(|i| {
            let minor = rows.clone().remove_column(i);
            let sgn = if i % 2 == 0 { 1.0 } else { -1.0 };
            sgn * minor.determinant()
        })
        .collect();
    // v·u = det(u, θ, e₃, …) and ⋆(θ∧e₃∧…) = (−1)^{d−1} v
    let sign = if (d - 1) % 2 == 0 { 1.0 } else { -1.0 };
    let star: Vec<f64> = v.iter().map(|x| sign * x).collect();
    let hodge: Vec<f64> = star.iter().map(|x| sign * x).collect();
    Direction::normalized(hodge)
}

/// [η,θ]/|[η,θ]| in R³.
pub fn alpha_3d_legacy(theta: &Direction, eta: &Direction) -> Result<Direction, Error> {
    if theta.dim() != 3 || eta.dim() != 3 {
        return Err(Error::Dimension("legacy alpha is defined for d = 3".into()));
    }
    let (a, b) = (eta.as_slice(), theta.as_slice());
    let c = vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let n = norm(&c);
    if n <= 1e-9 {
        return Err(Error::ParallelEta);
    }
    Direction::normalized(c)
}

/// Index-ordered Gram–Schmidt completion of `start` (assumed orthonormal) to a basis of R^d.
fn gram_schmidt_complete(start: &[&[f64]], d: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = start.iter().map(|v| v.to_vec()).collect();
    let mut added = Vec::new();
    for i in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        // two passes keep the result orthogonal to round-off
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                axpy(-c, b, &mut v);
            }
        }
        let n = norm(&v);
        if n < GS_SKIP {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= n);
        basis.push(v.clone());
        added.push(v);
    }
    added
}

/// Random orthogonal k×k matrix from QR of a Gaussian matrix, signs fixed by diag(R) > 0.
fn random_orthogonal(k: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(k, k, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Orthonormal frame of Σ(s,θ): α(θ) followed by d−2 betas.
///
/// Seed 0 gives the deterministic Gram–Schmidt betas; any other seed rotates
/// them by a seeded orthogonal transform of their span.
pub fn frame_on_hyperplane(theta: &Direction, seed: u64) -> Result<Frame, Error> {
    let alpha = alpha_of_theta(theta)?;
    let d = theta.dim();
    let mut betas = gram_schmidt_complete(&[theta.as_slice(), alpha.as_slice()], d);
    if seed != 0 && betas.len() > 1 {
        let k = betas.len();
        let q = random_orthogonal(k, seed);
        betas = (0..k)
            .map(|j| {
                let mut v = vec![0.0; d];
                for (i, b) in betas.iter().enumerate() {
                    axpy(q[(i, j)], b, &mut v);
                }
                v
            })
            .collect();
    }
    Ok(Frame {
        alpha,
        betas: betas.into_iter().map(Direction).collect(),
    })
}

/// Some orthonormal basis of θ⊥ from index-ordered Gram–Schmidt; used where α is not needed.
pub fn orthonormal_completion(theta: &Direction) -> Vec<Direction> {
    gram_schmidt_complete(&[theta.as_slice()], theta.dim())
        .into_iter()
        .map(Direction)
        .collect()
}

/// Which of line / plane / empty the set Σ(s,θ) ∩ Span(e₁,e₂) is.
pub fn classify_intersection(plane: &Hyperplane) -> Result<IntersectionKind, Error> {
    if !is_degenerate(&plane.theta, DEGENERATE_TOL)? {
        Ok(IntersectionKind::Line)
    } else if plane.s.abs() <= PLANE_OFFSET_TOL {
        Ok(IntersectionKind::Plane)
    } else {
        Ok(IntersectionKind::Empty)
    }
}

/// Max |G − I| over the Gram matrix of `vs`.
pub fn gram_deviation(vs: &[&[f64]]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vs.iter().enumerate() {
        for (j, b) in vs.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(a, b) - target).abs());
        }
    }
    worst
}
