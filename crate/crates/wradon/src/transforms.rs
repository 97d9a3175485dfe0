//! P_w, R_W by direct hyperplane quadrature, R_W through rays along α(θ),
//! the 2D equivalence, and W(x,θ) = w(x, α(θ)).

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fields::ScalarField;
use crate::geometry::{
    alpha_of_theta, axpy, frame_on_hyperplane, is_degenerate, orthonormal_completion, Direction,
    Frame, Hyperplane, Ray, DEGENERATE_TOL,
};
use crate::quadrature::{integrate_along_ray, integrate_over_basis, FiberRule, HyperplaneRule, LineRule};
use crate::Error;

/// Number of (x, θ) pairs used to certify weight bounds.
pub const BOUND_SAMPLES: usize = 100_000;

type WeightFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// w(x, θ) on rays, with declared bounds c ≤ w ≤ C. A proper weight has c > 0.
#[derive(Clone)]
pub struct RayWeight {
    eval: Arc<WeightFn>,
    pub dim: usize,
    pub lower: f64,
    pub upper: f64,
}

impl fmt::Debug for RayWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RayWeight(d={}, [{}, {}])", self.dim, self.lower, self.upper)
    }
}

impl RayWeight {
    pub fn new<F>(dim: usize, lower: f64, upper: f64, eval: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            dim,
            lower,
            upper,
        }
    }

    pub fn unit(dim: usize) -> Self {
        Self::new(dim, 1.0, 1.0, |_, _| 1.0)
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new(dim, c, c, move |_, _| c)
    }

    pub fn evaluate(&self, x: &[f64], direction: &[f64]) -> f64 {
        (self.eval)(x, direction)
    }

    pub fn is_positive(&self) -> bool {
        self.lower > 0.0
    }
}

/// W(x, θ) on hyperplanes; `source` links back to the ray weight it came from.
#[derive(Clone)]
pub struct RadonWeight {
    eval: Arc<WeightFn>,
    pub dim: usize,
    pub lower: f64,
    pub upper: f64,
    pub source: Option<RayWeight>,
}

impl fmt::Debug for RadonWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RadonWeight(d={}, [{}, {}], derived={})",
            self.dim,
            self.lower,
            self.upper,
            self.source.is_some()
        )
    }
}

impl RadonWeight {
    pub fn new<F>(dim: usize, lower: f64, upper: f64, eval: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            dim,
            lower,
            upper,
            source: None,
        }
    }

    pub fn unit(dim: usize) -> Self {
        Self::new(dim, 1.0, 1.0, |_, _| 1.0)
    }

    pub fn evaluate(&self, x: &[f64], theta: &[f64]) -> f64 {
        (self.eval)(x, theta)
    }

    pub fn is_positive(&self) -> bool {
        self.lower > 0.0
    }

    /// c·W with the bounds scaled accordingly (c > 0).
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            eval: Arc::new(move |x, t| c * inner(x, t)),
            lower: c * self.lower,
            upper: c * self.upper,
            ..self.clone()
        }
    }
}

/// Smooth control weight (1.5 + 0.5 cos(x·v))·(1 + 0.25 θ₁θ₂), bounded in [0.875, 2.25].
pub fn separable_control_weight(d: usize) -> RayWeight {
    let v: Vec<f64> = (0..d).map(|i| 0.7 - 0.45 * i as f64).collect();
    RayWeight::new(d, 0.875, 2.25, move |x, t| {
        let phase: f64 = x.iter().zip(&v).map(|(a, b)| a * b).sum();
        (1.5 + 0.5 * phase.cos()) * (1.0 + 0.25 * t[0] * t[1])
    })
}

fn check_dims(d: usize, f: &ScalarField) -> Result<(), Error> {
    if f.dim() != d {
        return Err(Error::Dimension(format!(
            "field is {}-dimensional, geometry is {d}-dimensional",
            f.dim()
        )));
    }
    Ok(())
}

/// P_w f(x, θ) = ∫ w(x + tθ, θ) f(x + tθ) dt.
pub fn ray_transform(w: &RayWeight, f: &ScalarField, ray: &Ray, rule: &LineRule) -> Result<f64, Error> {
    let d = ray.base.len();
    check_dims(d, f)?;
    if w.dim != d {
        return Err(Error::Dimension(format!("weight is {}-dimensional, ray {d}", w.dim)));
    }
    let r = f.support_radius();
    if ray.base.iter().map(|b| b * b).sum::<f64>() > r * r {
        return Ok(0.0);
    }
    let dir = ray.direction.as_slice();
    Ok(integrate_along_ray(
        &|x| {
            let fx = f.evaluate(x);
            if fx == 0.0 {
                0.0
            } else {
                w.evaluate(x, dir) * fx
            }
        },
        ray,
        rule,
    ))
}

/// Orthonormal basis of the hyperplane used by the direct rule: the α-frame
/// (seed 0) when θ is non-degenerate, any Gram–Schmidt completion otherwise.
pub fn direct_basis(theta: &Direction) -> Vec<Direction> {
    let degenerate = theta.dim() < 3 || is_degenerate(theta, DEGENERATE_TOL).unwrap_or(true);
    if degenerate {
        orthonormal_completion(theta)
    } else {
        let fr = frame_on_hyperplane(theta, 0).expect("non-degenerate direction");
        fr.vectors().cloned().collect()
    }
}

/// R_W f(s, θ) = ∫_{x·θ=s} W(x,θ) f(x) dx on the given orthonormal basis of θ⊥.
pub fn radon_direct_in_basis(
    weight: &RadonWeight,
    f: &ScalarField,
    plane: &Hyperplane,
    basis: &[Direction],
    rule: &HyperplaneRule,
) -> Result<f64, Error> {
    let d = plane.dim();
    check_dims(d, f)?;
    if plane.s.abs() > f.support_radius() {
        return Ok(0.0);
    }
    let theta = plane.theta.as_slice();
    let vs: Vec<&[f64]> = basis.iter().map(|b| b.as_slice()).collect();
    integrate_over_basis(
        &|x| {
            let fx = f.evaluate(x);
            if fx == 0.0 {
                0.0
            } else {
                weight.evaluate(x, theta) * fx
            }
        },
        plane,
        &vs,
        rule,
    )
}

pub fn radon_direct(
    weight: &RadonWeight,
    f: &ScalarField,
    plane: &Hyperplane,
    rule: &HyperplaneRule,
) -> Result<f64, Error> {
    let basis = direct_basis(&plane.theta);
    radon_direct_in_basis(weight, f, plane, &basis, rule)
}

/// R_W f(s,θ) = ∫_{R^{d−2}} P_w f(sθ + Σ τᵢβᵢ, α(θ)) dτ.
pub fn radon_via_rays(
    w: &RayWeight,
    f: &ScalarField,
    plane: &Hyperplane,
    frame: &Frame,
    fiber: &FiberRule,
    line: &LineRule,
) -> Result<f64, Error> {
    let d = plane.dim();
    check_dims(d, f)?;
    if d < 3 {
        return Err(Error::Dimension("the ray decomposition needs d >= 3".into()));
    }
    if is_degenerate(&plane.theta, DEGENERATE_TOL)? {
        return Err(Error::DegenerateDirection);
    }
    if frame.betas.len() + 2 != d || fiber.axes.len() + 2 != d {
        return Err(Error::Dimension(format!(
            "need {} betas and fiber axes for d = {d}",
            d - 2
        )));
    }
    if plane.s.abs() > f.support_radius() {
        return Ok(0.0);
    }
    let center: Vec<f64> = plane.theta.as_slice().iter().map(|t| plane.s * t).collect();
    let mut acc = 0.0;
    let mut err = None;
    fiber.for_each(|tau, wt| {
        if err.is_some() {
            return;
        }
        let mut base = center.clone();
        for (ti, b) in tau.iter().zip(&frame.betas) {
            axpy(*ti, b.as_slice(), &mut base);
        }
        match Ray::new(base, frame.alpha.clone()).and_then(|ray| ray_transform(w, f, &ray, line)) {
            Ok(v) => acc += wt * v,
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

/// θ⊥ = (−θ₂, θ₁).
pub fn perp2(theta: &[f64]) -> [f64; 2] {
    [-theta[1], theta[0]]
}

/// R_W f(s,θ) in 2D as P_w f(sθ, θ⊥).
pub fn radon2d_from_ray(
    w: &RayWeight,
    f: &ScalarField,
    s: f64,
    theta: &Direction,
    rule: &LineRule,
) -> Result<f64, Error> {
    if theta.dim() != 2 {
        return Err(Error::Dimension("the 2D equivalence needs d = 2".into()));
    }
    let t = theta.as_slice();
    let ray = Ray::new(vec![s * t[0], s * t[1]], Direction::new(perp2(t).to_vec())?)?;
    ray_transform(w, f, &ray, rule)
}

thread_local! {
    // quadrature visits many x per θ; remember the last α(θ)
    static ALPHA_CACHE: std::cell::RefCell<(Vec<f64>, Vec<f64>)> =
        const { std::cell::RefCell::new((Vec::new(), Vec::new())) };
}

/// The seeded points on which `weight_from_ray_weight` checks its policy.
pub fn policy_sample_points(d: usize, radius: f64) -> impl Iterator<Item = Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..BOUND_SAMPLES).map(move |_| {
        let mut x: Vec<f64> = Direction::random(d, &mut rng).into_vec();
        let r = radius * rng.gen::<f64>().powf(1.0 / d as f64);
        x.iter_mut().for_each(|v| *v *= r);
        x
    })
}

/// W(x,θ) = w(x, α(θ)) off the degenerate set, `degenerate_policy(x)` on it.
///
/// Off the degenerate set W is a reparametrization of w and inherits its
/// bounds. The policy is checked against them on `BOUND_SAMPLES` seeded points
/// in the ball of radius `sample_radius`.
pub fn weight_from_ray_weight<P>(
    w: &RayWeight,
    degenerate_policy: P,
    sample_radius: f64,
) -> Result<RadonWeight, Error>
where
    P: Fn(&[f64]) -> f64 + Send + Sync + 'static,
{
    let d = w.dim;
    if d < 3 {
        return Err(Error::Dimension("W from w needs d >= 3".into()));
    }
    let policy = Arc::new(degenerate_policy);
    let inner = w.clone();
    let pol = policy.clone();
    let eval = move |x: &[f64], theta: &[f64]| -> f64 {
        let degenerate = theta[0].abs() <= DEGENERATE_TOL && theta[1].abs() <= DEGENERATE_TOL;
        if degenerate {
            pol(x)
        } else {
            ALPHA_CACHE.with(|c| {
                let mut c = c.borrow_mut();
                if c.0 != theta {
                    let t = Direction::new(theta.to_vec()).expect("unit theta");
                    let a = alpha_of_theta(&t).expect("non-degenerate theta");
                    *c = (theta.to_vec(), a.into_vec());
                }
                inner.evaluate(x, &c.1)
            })
        }
    };
    let slack = 1e-12 * (1.0 + w.upper.abs());
    for x in policy_sample_points(d, sample_radius) {
        let v = policy(&x);
        if !(v >= w.lower - slack && v <= w.upper + slack) {
            return Err(Error::WeightBounds(format!(
                "degenerate-set weight {v} at x = {x:?} outside [{}, {}]",
                w.lower, w.upper
            )));
        }
    }
    Ok(RadonWeight {
        eval: Arc::new(eval),
        dim: d,
        lower: w.lower,
        upper: w.upper,
        source: Some(w.clone()),
    })
}
