//! A 2D weight/function pair annihilated on a family of lines, its lift to R^d,
//! and residual checks for R_W f = 0.
//!
//! Lines in the plane are written (s, φ) with direction u = (cos φ, sin φ),
//! normal ν = (−sin φ, cos φ) = u⊥ and points x = sν + tu, φ ∈ [0, π).
//! The same line with the opposite orientation is (−s, φ + π).

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cli::{Record, ResidualReport};
use crate::fields::{bump_psi, keys_stencil, lift_field, ScalarField};
use crate::geometry::{frame_on_hyperplane, is_degenerate, Direction, Hyperplane, DEGENERATE_TOL};
use crate::quadrature::{gauss_legendre_rule, FiberRule, HyperplaneRule, LineRule};
use crate::transforms::{radon_direct, radon_via_rays, policy_sample_points, weight_from_ray_weight, RadonWeight, RayWeight};
use crate::Error;

/// Default cap on sup|λ f₀| over family nodes.
pub const WEIGHT_BOUND_LIMIT: f64 = 2.0 / 3.0;
/// h_min = H_MIN_FACTOR · max|f₀|² · 2r₀.
pub const H_MIN_FACTOR: f64 = 1e-12;
const CERTIFY_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LineFamily2D {
    pub n_phi: usize,
    pub n_s: usize,
    pub r0: f64,
    pub rule: LineRule,
}

impl LineFamily2D {
    pub fn new(n_phi: usize, n_s: usize, r0: f64, line_nodes: usize) -> Result<Self, Error> {
        if n_phi < 8 || n_s < 8 {
            return Err(Error::Invalid(format!(
                "line family needs n_phi, n_s >= 8 (got {n_phi}, {n_s})"
            )));
        }
        Ok(Self {
            n_phi,
            n_s,
            r0,
            rule: gauss_legendre_rule(line_nodes, r0)?,
        })
    }

    pub fn phi(&self, j: usize) -> f64 {
        j as f64 * PI / self.n_phi as f64
    }

    pub fn offset(&self, i: usize) -> f64 {
        -self.r0 + 2.0 * self.r0 * i as f64 / (self.n_s - 1) as f64
    }

    fn ds(&self) -> f64 {
        2.0 * self.r0 / (self.n_s - 1) as f64
    }

    fn dphi(&self) -> f64 {
        PI / self.n_phi as f64
    }

    /// Quadrature points x = sν + t_k u and their weights on line (s, φ).
    pub fn line_points(&self, s: f64, phi: f64) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        let (sn, cs) = phi.sin_cos();
        self.rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .map(move |(t, w)| ([-s * sn + t * cs, s * cs + t * sn], *w))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// `None` records sup|λ f₀| without enforcing a limit.
    pub weight_bound_limit: Option<f64>,
    pub h_min_factor: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            weight_bound_limit: Some(WEIGHT_BOUND_LIMIT),
            h_min_factor: H_MIN_FACTOR,
        }
    }
}

/// Parameters that travel with an exported pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairHeader {
    pub f0: String,
    pub n_phi: usize,
    pub n_s: usize,
    pub r0: f64,
    pub line_nodes: usize,
    pub h_min: f64,
    pub rescale: f64,
    pub sup_lambda_f0: f64,
    pub weight_min: f64,
    pub weight_max: f64,
    pub sampled_min: f64,
    pub sampled_max: f64,
}

/// w₀(x, u) = c·(1 − λ(line)·f₀(x)) with λ = Σwf / Σwf² on each family line.
#[derive(Debug, Clone)]
pub struct NullPair2D {
    pub f0: ScalarField,
    pub f0_name: String,
    pub family: LineFamily2D,
    /// n_phi rows of n_s values.
    pub lambda: Vec<f64>,
    pub rescale: f64,
    pub h_min: f64,
    pub sup_lambda_f0: f64,
    /// Realized [min, max] of w₀ over family nodes, after rescaling.
    pub bounds: (f64, f64),
    /// Extremes of the interpolated w₀ over seeded random (x, u), with `bounds` folded in.
    pub sampled_bounds: (f64, f64),
}

fn line_sums(f0: &ScalarField, family: &LineFamily2D, s: f64, phi: f64) -> (f64, f64, f64) {
    let (mut g, mut h, mut a) = (0.0, 0.0, 0.0);
    for (x, w) in family.line_points(s, phi) {
        let v = f0.evaluate(&x);
        g += w * v;
        h += w * v * v;
        a += w * v.abs();
    }
    (g, h, a)
}

/// Builds λ on every family line and rescales so that sup w₀ = 1.
pub fn build_null_pair_2d(
    f0: &ScalarField,
    f0_name: &str,
    family: &LineFamily2D,
    opts: BuildOptions,
) -> Result<NullPair2D, Error> {
    if f0.dim() != 2 {
        return Err(Error::Dimension("null pairs are built from a 2D f0".into()));
    }
    let (np, ns) = (family.n_phi, family.n_s);
    let mut fmax: f64 = 0.0;
    for j in 0..np {
        for i in 0..ns {
            for (x, _) in family.line_points(family.offset(i), family.phi(j)) {
                fmax = fmax.max(f0.evaluate(&x).abs());
            }
        }
    }
    let h_min = opts.h_min_factor * fmax * fmax * 2.0 * family.r0;
    let mut lambda = vec![0.0; np * ns];
    let mut active = 0usize;
    for j in 0..np {
        for i in 0..ns {
            let (g, h, _) = line_sums(f0, family, family.offset(i), family.phi(j));
            if h > h_min {
                lambda[j * ns + i] = g / h;
                active += 1;
            }
        }
    }
    if active == 0 {
        return Err(Error::DegenerateF0);
    }
    let (mut sup, mut wmin, mut wmax) = (0.0f64, 1.0f64, 1.0f64);
    for j in 0..np {
        for i in 0..ns {
            let l = lambda[j * ns + i];
            for (x, _) in family.line_points(family.offset(i), family.phi(j)) {
                let lf = l * f0.evaluate(&x);
                sup = sup.max(lf.abs());
                wmin = wmin.min(1.0 - lf);
                wmax = wmax.max(1.0 - lf);
            }
        }
    }
    if let Some(limit) = opts.weight_bound_limit {
        if sup > limit {
            return Err(Error::WeightBoundViolation { ratio: sup, limit });
        }
    }
    let rescale = 1.0 / wmax;
    let bounds = (wmin * rescale, wmax * rescale);
    let mut pair = NullPair2D {
        f0: f0.clone(),
        f0_name: f0_name.to_string(),
        family: family.clone(),
        lambda,
        rescale,
        h_min,
        sup_lambda_f0: sup,
        bounds,
        sampled_bounds: bounds,
    };
    pair.sampled_bounds = pair.sample_bounds();
    Ok(pair)
}

/// (s, φ) of the line through x with direction u, φ folded into [0, π).
pub fn line_coordinates(x: &[f64], u: &[f64]) -> (f64, f64) {
    let mut s = -x[0] * u[1] + x[1] * u[0];
    let mut phi = u[1].atan2(u[0]);
    if phi < 0.0 {
        phi += PI;
        s = -s;
    }
    if phi >= PI {
        phi -= PI;
        s = -s;
    }
    (s, phi)
}

impl NullPair2D {
    fn table(&self, j: i64, i: i64) -> f64 {
        let (np, ns) = (self.family.n_phi as i64, self.family.n_s as i64);
        let jj = j.rem_euclid(np);
        let flips = j.div_euclid(np);
        let ii = if flips % 2 == 0 { i } else { ns - 1 - i };
        if ii < 0 || ii >= ns {
            0.0
        } else {
            self.lambda[(jj * ns + ii) as usize]
        }
    }

    /// Table value on family line (i, j).
    pub fn lambda_node(&self, j: usize, i: usize) -> f64 {
        self.lambda[j * self.family.n_s + i]
    }

    /// Bicubic λ(s, φ); φ is periodic through λ(s, φ + π) = λ(−s, φ).
    pub fn lambda_at(&self, s: f64, phi: f64) -> f64 {
        let fam = &self.family;
        let u = (s + fam.r0) / fam.ds();
        if !(u > -2.0 && u < fam.n_s as f64 + 1.0) {
            return 0.0;
        }
        let v = phi / fam.dphi();
        let (i0, wi) = keys_stencil(u);
        let (j0, wj) = keys_stencil(v);
        let mut acc = 0.0;
        for (a, wja) in wj.iter().enumerate() {
            if *wja == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for (b, wib) in wi.iter().enumerate() {
                if *wib != 0.0 {
                    row += wib * self.table(j0 - 1 + a as i64, i0 - 1 + b as i64);
                }
            }
            acc += wja * row;
        }
        acc
    }

    /// w₀(x, u) for a unit 2D direction u.
    pub fn eval_w0(&self, x: &[f64], u: &[f64]) -> f64 {
        let fx = self.f0.evaluate(x);
        if fx == 0.0 {
            return self.rescale;
        }
        let (s, phi) = line_coordinates(x, u);
        self.rescale * (1.0 - self.lambda_at(s, phi) * fx)
    }

    /// w₀ on family line (j, i) from the table, no interpolation.
    pub fn w0_on_family(&self, j: usize, i: usize, x: &[f64]) -> f64 {
        self.rescale * (1.0 - self.lambda_node(j, i) * self.f0.evaluate(x))
    }

    /// Largest per-line Σ w|f₀| over the family; the 2D scale for global normalization.
    pub fn abs_scale(&self) -> f64 {
        let fam = &self.family;
        (0..fam.n_phi)
            .flat_map(|j| (0..fam.n_s).map(move |i| (j, i)))
            .map(|(j, i)| line_sums(&self.f0, fam, fam.offset(i), fam.phi(j)).2)
            .fold(0.0, f64::max)
    }

    /// Bound on |Σ w f₀| for a floored line, by Cauchy–Schwarz on h ≤ h_min.
    pub fn floor_bound(&self) -> f64 {
        (2.0 * self.family.r0 * self.h_min).sqrt()
    }

    pub fn is_floored(&self, j: usize, i: usize) -> bool {
        let fam = &self.family;
        line_sums(&self.f0, fam, fam.offset(i), fam.phi(j)).1 <= self.h_min
    }

    fn sample_bounds(&self) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(0xb0b);
        let (mut lo, mut hi) = self.bounds;
        let r0 = self.family.r0;
        for k in 0..CERTIFY_SAMPLES {
            let r = r0 * rng.gen::<f64>().sqrt();
            let a = 2.0 * PI * rng.gen::<f64>();
            let x = [r * a.cos(), r * a.sin()];
            let u = if k % 4 == 0 {
                [1.0, 0.0]
            } else {
                let b = 2.0 * PI * rng.gen::<f64>();
                [b.cos(), b.sin()]
            };
            let w = self.eval_w0(&x, &u);
            lo = lo.min(w);
            hi = hi.max(w);
        }
        (lo, hi)
    }

    pub fn header(&self) -> PairHeader {
        PairHeader {
            f0: self.f0_name.clone(),
            n_phi: self.family.n_phi,
            n_s: self.family.n_s,
            r0: self.family.r0,
            line_nodes: self.family.rule.len(),
            h_min: self.h_min,
            rescale: self.rescale,
            sup_lambda_f0: self.sup_lambda_f0,
            weight_min: self.bounds.0,
            weight_max: self.bounds.1,
            sampled_min: self.sampled_bounds.0,
            sampled_max: self.sampled_bounds.1,
        }
    }

    /// JSON header to `header`, λ table (one row per angle) to `table`.
    pub fn export<H: Write, T: Write>(&self, header: H, table: T) -> Result<(), Error> {
        serde_json::to_writer_pretty(header, &self.header())?;
        let mut wr = csv::Writer::from_writer(table);
        let cols: Vec<String> = (0..self.family.n_s).map(|i| format!("s{i}")).collect();
        wr.write_record(std::iter::once("phi_index".to_string()).chain(cols))?;
        for j in 0..self.family.n_phi {
            let row = &self.lambda[j * self.family.n_s..(j + 1) * self.family.n_s];
            wr.write_record(
                std::iter::once(j.to_string()).chain(row.iter().map(|v| v.to_string())),
            )?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Inverse of `export`; `f0` must be the field the pair was built from.
    pub fn import<H: BufRead, T: BufRead>(f0: &ScalarField, header: H, table: T) -> Result<Self, Error> {
        let h: PairHeader = serde_json::from_reader(header)?;
        let family = LineFamily2D::new(h.n_phi, h.n_s, h.r0, h.line_nodes)?;
        let mut rd = csv::Reader::from_reader(table);
        let mut lambda = Vec::with_capacity(h.n_phi * h.n_s);
        for (j, rec) in rd.records().enumerate() {
            let rec = rec?;
            if rec.len() != h.n_s + 1 || rec[0].parse::<usize>().ok() != Some(j) {
                return Err(Error::Parse(format!("malformed lambda row {j}")));
            }
            for v in rec.iter().skip(1) {
                lambda.push(v.parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?);
            }
        }
        if lambda.len() != h.n_phi * h.n_s {
            return Err(Error::Parse(format!(
                "lambda table has {} values, expected {}",
                lambda.len(),
                h.n_phi * h.n_s
            )));
        }
        Ok(Self {
            f0: f0.clone(),
            f0_name: h.f0,
            family,
            lambda,
            rescale: h.rescale,
            h_min: h.h_min,
            sup_lambda_f0: h.sup_lambda_f0,
            bounds: (h.weight_min, h.weight_max),
            sampled_bounds: (h.sampled_min, h.sampled_max),
        })
    }
}

pub const PATH_FAMILY: &str = "family";
pub const PATH_FLOORED: &str = "family-floored";
pub const PATH_OFFGRID: &str = "offgrid";

/// Residuals of Σ w w₀ f₀ on family lines and on `offgrid_lines` random lines.
///
/// Active family lines are normalized per line by Σ w|f₀|. Floored lines and
/// off-family lines are normalized by `abs_scale`.
pub fn verify_null_pair_2d(pair: &NullPair2D, offgrid_lines: usize, seed: u64) -> ResidualReport {
    let start = Instant::now();
    let fam = &pair.family;
    let scale = pair.abs_scale();
    let mut records = Vec::new();
    for j in 0..fam.n_phi {
        let phi = fam.phi(j);
        for i in 0..fam.n_s {
            let s = fam.offset(i);
            let (mut res, mut a, mut h) = (0.0, 0.0, 0.0);
            for (x, w) in fam.line_points(s, phi) {
                let fx = pair.f0.evaluate(&x);
                res += w * pair.w0_on_family(j, i, &x) * fx;
                a += w * fx.abs();
                h += w * fx * fx;
            }
            let floored = h <= pair.h_min;
            let norm = if floored { scale } else { a };
            records.push(Record {
                s,
                theta: vec![-phi.sin(), phi.cos()],
                value: res,
                normalized: if norm > 0.0 { res.abs() / norm } else { 0.0 },
                path: if floored { PATH_FLOORED } else { PATH_FAMILY }.to_string(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..offgrid_lines {
        let s = fam.r0 * (2.0 * rng.gen::<f64>() - 1.0);
        let phi = PI * rng.gen::<f64>();
        let flip = rng.gen::<bool>();
        let (sn, cs) = phi.sin_cos();
        let u = if flip { [-cs, -sn] } else { [cs, sn] };
        let res: f64 = fam
            .line_points(s, phi)
            .map(|(x, w)| w * pair.eval_w0(&x, &u) * pair.f0.evaluate(&x))
            .sum();
        records.push(Record {
            s,
            theta: vec![-sn, cs],
            value: res,
            normalized: res.abs() / scale,
            path: PATH_OFFGRID.to_string(),
        });
    }
    ResidualReport::new(records, scale, pair.bounds, start.elapsed().as_secs_f64())
}

/// The lifted pair in R^d.
#[derive(Debug, Clone)]
pub struct LiftedPair {
    pub big_w: RadonWeight,
    pub f: ScalarField,
    pub w: RayWeight,
    pub d: usize,
    pub pair: Arc<NullPair2D>,
}

/// w(x, α) = w₀((x₁,x₂), (α₁,α₂)/|(α₁,α₂)|), f = ψ(x₃..x_d) f₀(x₁,x₂), W from w
/// with W(x, θ) = w₀((x₁,x₂), e₁) on the degenerate set.
pub fn lift_to_dimension(pair: Arc<NullPair2D>, d: usize) -> Result<LiftedPair, Error> {
    if d < 3 {
        return Err(Error::Dimension(format!("lift needs d >= 3, got {d}")));
    }
    let f = lift_field(&pair.f0, &bump_psi(d - 2)?, d)?;
    let p = pair.clone();
    // policy values are values of w at α = e₁, so they belong in its bounds
    let (lo, hi) = policy_sample_points(d, f.support_radius()).fold(pair.sampled_bounds, |(lo, hi), x| {
        let v = pair.eval_w0(&x[..2], &[1.0, 0.0]);
        (lo.min(v), hi.max(v))
    });
    let w = RayWeight::new(d, lo, hi, move |x, a| {
        let n = a[0].hypot(a[1]);
        if n == 0.0 {
            p.eval_w0(&x[..2], &[1.0, 0.0])
        } else {
            p.eval_w0(&x[..2], &[a[0] / n, a[1] / n])
        }
    });
    let p = pair.clone();
    let big_w = weight_from_ray_weight(&w, move |x| p.eval_w0(&x[..2], &[1.0, 0.0]), f.support_radius())?;
    Ok(LiftedPair {
        big_w,
        f,
        w,
        d,
        pair,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Reduction,
    Direct,
}

impl Mode {
    pub fn tag(self) -> &'static str {
        match self {
            Mode::Reduction => "reduction",
            Mode::Direct => "direct",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LiftRules {
    /// Nodes per axis for the direct rule.
    pub direct_n: usize,
    /// Nodes per τ-axis for the reduction fiber.
    pub fiber_n: usize,
}

impl Default for LiftRules {
    fn default() -> Self {
        Self {
            direct_n: 64,
            fiber_n: 64,
        }
    }
}

/// Max |R_W f| over `grid`, normalized by max R_1|f| over the same grid.
///
/// Reduction mode integrates rays along α(θ) with the family line rule and
/// skips degenerate θ, where α is undefined. Direct mode integrates W f over
/// each hyperplane with `direct_n` nodes per axis.
pub fn verify_lifted_pair(
    lp: &LiftedPair,
    grid: &[Hyperplane],
    mode: Mode,
    rules: LiftRules,
) -> Result<ResidualReport, Error> {
    let start = Instant::now();
    let d = lp.d;
    let r = lp.f.support_radius();
    let abs_f = {
        let f = lp.f.clone();
        ScalarField::new(d, r, f.smoothness(), move |x| f.evaluate(x).abs())
    };
    let line = lp.pair.family.rule.clone();
    let fiber = FiberRule::uniform(d - 2, rules.fiber_n, r)?;
    let hrule = HyperplaneRule::uniform(d, rules.direct_n, r)?;
    let unit_ray = RayWeight::unit(d);
    let unit = RadonWeight::unit(d);
    let rows: Vec<Result<Option<(f64, f64)>, Error>> = grid
        .par_iter()
        .map(|plane| -> Result<Option<(f64, f64)>, Error> {
            match mode {
                Mode::Reduction => {
                    if is_degenerate(&plane.theta, DEGENERATE_TOL)? {
                        return Ok(None);
                    }
                    let frame = frame_on_hyperplane(&plane.theta, 0)?;
                    let v = radon_via_rays(&lp.w, &lp.f, plane, &frame, &fiber, &line)?;
                    let n = radon_via_rays(&unit_ray, &abs_f, plane, &frame, &fiber, &line)?;
                    Ok(Some((v, n)))
                }
                Mode::Direct => {
                    let v = radon_direct(&lp.big_w, &lp.f, plane, &hrule)?;
                    let n = radon_direct(&unit, &abs_f, plane, &hrule)?;
                    Ok(Some((v, n)))
                }
            }
        })
        .collect();
    let mut vals = Vec::with_capacity(grid.len());
    for (plane, row) in grid.iter().zip(rows) {
        if let Some(v) = row? {
            vals.push((plane, v));
        }
    }
    let norm = vals.iter().map(|(_, (_, n))| *n).fold(0.0, f64::max);
    let records = vals
        .into_iter()
        .map(|(plane, (v, _))| Record {
            s: plane.s,
            theta: plane.theta.as_slice().to_vec(),
            value: v,
            normalized: if norm > 0.0 { v.abs() / norm } else { 0.0 },
            path: mode.tag().to_string(),
        })
        .collect();
    let mut rep = ResidualReport::new(
        records,
        norm,
        lp.pair.bounds,
        start.elapsed().as_secs_f64(),
    );
    rep.summary.skipped = grid.len() - rep.records.len();
    Ok(rep)
}

/// Hyperplanes whose reduction rays are family lines: θ = ν_j in Span(e₁,e₂), s = s_i.
pub fn aligned_grid(family: &LineFamily2D, d: usize, phi_stride: usize, s_stride: usize) -> Vec<Hyperplane> {
    let mut out = Vec::new();
    for j in (0..family.n_phi).step_by(phi_stride.max(1)) {
        let phi = family.phi(j);
        let mut t = vec![0.0; d];
        t[0] = -phi.sin();
        t[1] = phi.cos();
        let theta = Direction::new(t).expect("unit normal");
        for i in (0..family.n_s).step_by(s_stride.max(1)) {
            out.push(Hyperplane::new(family.offset(i), theta.clone()));
        }
    }
    out
}

/// Seeded hyperplanes with s in [−s_max, s_max], random θ plus ±e₁, ±e₂, ±e₃,
/// exactly degenerate and nearly degenerate directions.
pub fn generic_grid(d: usize, n_s: usize, n_theta: usize, s_max: f64, seed: u64) -> Vec<Hyperplane> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut thetas = Vec::new();
    for i in 0..3.min(d) {
        thetas.push(Direction::basis(d, i));
        thetas.push(Direction::basis(d, i).neg());
    }
    if d >= 3 {
        for k in 0..2 {
            let mut v = vec![0.0; d];
            for c in v.iter_mut().skip(2) {
                *c = rng.gen::<f64>() - 0.5;
            }
            let degenerate = Direction::normalized(v.clone()).expect("nonzero");
            thetas.push(degenerate.clone());
            let eps = if k == 0 { 1e-6 } else { 1e-3 };
            let mut near = degenerate.into_vec();
            near[0] = eps;
            near[1] = -0.5 * eps;
            thetas.push(Direction::normalized(near).expect("nonzero"));
        }
    }
    for _ in 0..n_theta {
        thetas.push(Direction::random(d, &mut rng));
    }
    let offsets: Vec<f64> = (0..n_s)
        .map(|k| {
            let base = -s_max + 2.0 * s_max * (k as f64 + 0.5) / n_s as f64;
            base + 0.25 * (2.0 * s_max / n_s as f64) * (rng.gen::<f64>() - 0.5)
        })
        .collect();
    let mut out = Vec::new();
    for t in &thetas {
        for &s in &offsets {
            out.push(Hyperplane::new(s, t.clone()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{default_f0, unbalanced_f0};

    fn small_family() -> LineFamily2D {
        LineFamily2D::new(16, 17, 1.0, 48).unwrap()
    }

    fn odd_f0() -> ScalarField {
        ScalarField::new(2, 1.0, crate::fields::Smoothness::Smooth, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            if r2 >= 1.0 {
                0.0
            } else {
                x[0] * (-1.0 / (1.0 - r2)).exp()
            }
        })
    }

    #[test]
    fn line_coordinates_fold_orientation() {
        let x = [0.3, -0.2];
        let (s1, p1) = line_coordinates(&x, &[0.6, 0.8]);
        let (s2, p2) = line_coordinates(&x, &[-0.6, -0.8]);
        assert!((s1 - s2).abs() < 1e-15 && (p1 - p2).abs() < 1e-15);
        assert!((0.0..PI).contains(&p1));
    }

    #[test]
    fn odd_field_gives_zero_lambda_through_origin() {
        let fam = small_family();
        let pair = build_null_pair_2d(&odd_f0(), "odd", &fam, BuildOptions::default());
        // x₁-odd field: every line through the origin has g = 0 by symmetry
        let pair = match pair {
            Ok(p) => p,
            Err(Error::WeightBoundViolation { .. }) => build_null_pair_2d(
                &odd_f0(),
                "odd",
                &fam,
                BuildOptions {
                    weight_bound_limit: None,
                    ..Default::default()
                },
            )
            .unwrap(),
            Err(e) => panic!("{e}"),
        };
        let mid = (fam.n_s - 1) / 2;
        assert!(fam.offset(mid).abs() < 1e-15);
        for j in 0..fam.n_phi {
            assert!(pair.lambda_node(j, mid).abs() < 1e-12);
        }
    }

    #[test]
    fn unbalanced_is_rejected() {
        let fam = small_family();
        let err = build_null_pair_2d(&unbalanced_f0(), "unbalanced", &fam, BuildOptions::default());
        assert!(matches!(err, Err(Error::WeightBoundViolation { .. })));
    }

    #[test]
    fn zero_field_is_degenerate() {
        let zero = ScalarField::new(2, 1.0, crate::fields::Smoothness::Analytic, |_| 0.0);
        let err = build_null_pair_2d(&zero, "zero", &small_family(), BuildOptions::default());
        assert!(matches!(err, Err(Error::DegenerateF0)));
    }

    #[test]
    fn interpolation_hits_nodes() {
        let fam = small_family();
        let opts = BuildOptions {
            weight_bound_limit: None,
            ..Default::default()
        };
        let pair = build_null_pair_2d(&default_f0(), "default", &fam, opts).unwrap();
        for j in 0..fam.n_phi {
            for i in 0..fam.n_s {
                let a = pair.lambda_at(fam.offset(i), fam.phi(j));
                let b = pair.lambda_node(j, i);
                assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{j} {i} {a} {b}");
            }
        }
    }
}
