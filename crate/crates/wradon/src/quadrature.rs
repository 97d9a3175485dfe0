//! Gauss–Legendre rules on segments, tensor fibers, and hyperplane sums.

use crate::geometry::{axpy, Frame, Hyperplane, Ray};
use crate::Error;

pub const MAX_NODES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LineRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub truncation_radius: f64,
}

impl LineRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(t, w)| w * f(*t)).sum()
    }
}

/// Legendre P_n and its derivative at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// n-point Gauss–Legendre rule scaled to [−R, R].
///
/// Nodes are computed on the positive half and mirrored, so the rule is
/// exactly symmetric.
pub fn gauss_legendre_rule(n: usize, r: f64) -> Result<LineRule, Error> {
    if n < 2 {
        return Err(Error::Invalid(format!("Gauss-Legendre needs n >= 2, got {n}")));
    }
    if n > MAX_NODES {
        return Err(Error::Invalid(format!("{n} nodes exceeds the limit of {MAX_NODES}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Invalid(format!("truncation radius must be positive, got {r}")));
    }
    let nf = n as f64;
    let half = n / 2;
    let mut pos = Vec::with_capacity(half);
    for i in 0..half {
        // Tricomi initial guess for the i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos()
            * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        pos.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &(x, w) in &pos {
        nodes.push(-x * r);
        weights.push(w * r);
    }
    if n % 2 == 1 {
        let (_, dp) = legendre(n, 0.0);
        nodes.push(0.0);
        weights.push(2.0 / (dp * dp) * r);
    }
    for &(x, w) in pos.iter().rev() {
        nodes.push(x * r);
        weights.push(w * r);
    }
    Ok(LineRule {
        nodes,
        weights,
        truncation_radius: r,
    })
}

/// Tensor product of line rules; axis 0 is the outermost loop.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberRule {
    pub axes: Vec<LineRule>,
}

impl FiberRule {
    pub fn uniform(axes: usize, n: usize, r: f64) -> Result<Self, Error> {
        let rule = gauss_legendre_rule(n, r)?;
        Ok(Self {
            axes: vec![rule; axes],
        })
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    /// Calls `visit(coords, weight)` for every tensor node in lexicographic order.
    pub fn for_each(&self, mut visit: impl FnMut(&[f64], f64)) {
        let k = self.axes.len();
        if k == 0 {
            visit(&[], 1.0);
            return;
        }
        if self.axes.iter().any(|a| a.is_empty()) {
            return;
        }
        let mut idx = vec![0usize; k];
        let mut coords: Vec<f64> = self.axes.iter().map(|a| a.nodes[0]).collect();
        loop {
            let w: f64 = idx
                .iter()
                .zip(&self.axes)
                .map(|(&i, a)| a.weights[i])
                .product();
            visit(&coords, w);
            // odometer, last axis fastest
            let mut ax = k;
            loop {
                if ax == 0 {
                    return;
                }
                ax -= 1;
                idx[ax] += 1;
                if idx[ax] < self.axes[ax].len() {
                    coords[ax] = self.axes[ax].nodes[idx[ax]];
                    break;
                }
                idx[ax] = 0;
                coords[ax] = self.axes[ax].nodes[0];
            }
        }
    }
}

/// d−1 axes over a hyperplane: axis 0 runs along the first frame vector.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneRule {
    pub axes: FiberRule,
}

impl HyperplaneRule {
    pub fn uniform(d: usize, n: usize, r: f64) -> Result<Self, Error> {
        if d < 2 {
            return Err(Error::Dimension("hyperplane rules need d >= 2".into()));
        }
        Ok(Self {
            axes: FiberRule::uniform(d - 1, n, r)?,
        })
    }
}

pub fn integrate_along_ray(field_product: &dyn Fn(&[f64]) -> f64, ray: &Ray, rule: &LineRule) -> f64 {
    let dir = ray.direction.as_slice();
    let mut x = vec![0.0; ray.base.len()];
    let mut acc = 0.0;
    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
        x.copy_from_slice(&ray.base);
        axpy(*t, dir, &mut x);
        acc += w * field_product(&x);
    }
    acc
}

/// Tensor-product sum over x = sθ + Σ cᵢ vᵢ with v the vectors in `basis`.
pub fn integrate_over_basis(
    integrand: &dyn Fn(&[f64]) -> f64,
    plane: &Hyperplane,
    basis: &[&[f64]],
    rule: &HyperplaneRule,
) -> Result<f64, Error> {
    let d = plane.dim();
    if basis.len() + 1 != d || rule.axes.axes.len() + 1 != d {
        return Err(Error::Dimension(format!(
            "hyperplane in R^{d} needs {} axes, got {} vectors and {} rule axes",
            d - 1,
            basis.len(),
            rule.axes.axes.len()
        )));
    }
    let center: Vec<f64> = plane.theta.as_slice().iter().map(|t| plane.s * t).collect();
    let mut x = vec![0.0; d];
    let mut acc = 0.0;
    rule.axes.for_each(|c, w| {
        x.copy_from_slice(&center);
        for (ci, v) in c.iter().zip(basis) {
            axpy(*ci, v, &mut x);
        }
        acc += w * integrand(&x);
    });
    Ok(acc)
}

/// Sum over Σ(s,θ) using the frame (α first, then the betas) as coordinate axes.
pub fn integrate_over_hyperplane(
    integrand: &dyn Fn(&[f64]) -> f64,
    plane: &Hyperplane,
    frame: &Frame,
    rule: &HyperplaneRule,
) -> Result<f64, Error> {
    let basis: Vec<&[f64]> = frame.vectors().map(|v| v.as_slice()).collect();
    integrate_over_basis(integrand, plane, &basis, rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_rule() {
        let r = gauss_legendre_rule(2, 1.0).unwrap();
        let a = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] + a).abs() < 1e-15 && (r.nodes[1] - a).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15 && (r.weights[1] - 1.0).abs() < 1e-15);
        assert!((r.integrate(|t| t * t) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn guards() {
        assert!(gauss_legendre_rule(1, 1.0).is_err());
        assert!(gauss_legendre_rule(MAX_NODES + 1, 1.0).is_err());
        assert!(gauss_legendre_rule(4, 0.0).is_err());
    }

    #[test]
    fn symmetric_and_sorted() {
        for n in [2, 3, 7, 64, 129] {
            let r = gauss_legendre_rule(n, 1.7).unwrap();
            for k in 0..n {
                assert_eq!(r.nodes[k], -r.nodes[n - 1 - k]);
                assert_eq!(r.weights[k], r.weights[n - 1 - k]);
            }
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!((r.weights.iter().sum::<f64>() - 3.4).abs() < 1e-12);
        }
    }

    #[test]
    fn fiber_order_and_count() {
        let f = FiberRule {
            axes: vec![gauss_legendre_rule(2, 1.0).unwrap(), gauss_legendre_rule(3, 1.0).unwrap()],
        };
        let mut seen = Vec::new();
        f.for_each(|c, w| seen.push((c.to_vec(), w)));
        assert_eq!(seen.len(), 6);
        assert_eq!(f.node_count(), 6);
        assert!(seen[0].0[0] == seen[2].0[0] && seen[3].0[0] > seen[0].0[0]);
        assert!((seen.iter().map(|s| s.1).sum::<f64>() - 4.0).abs() < 1e-14);
    }
}
