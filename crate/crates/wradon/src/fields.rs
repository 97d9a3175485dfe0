//! Compactly supported scalar fields on R^d.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothness {
    Analytic,
    Smooth,
    Piecewise,
}

type Eval = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A real function on R^d that is exactly 0 outside the closed ball of `support_radius`.
#[derive(Clone)]
pub struct ScalarField {
    eval: Arc<Eval>,
    dim: usize,
    support_radius: f64,
    smoothness: Smoothness,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("support_radius", &self.support_radius)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl ScalarField {
    /// Wraps `eval`; points outside the support ball are cut to 0 here, not by the closure.
    pub fn new<F>(dim: usize, support_radius: f64, smoothness: Smoothness, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            dim,
            support_radius,
            smoothness,
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if r2 > self.support_radius * self.support_radius {
            return 0.0;
        }
        (self.eval)(x)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    /// Pointwise a·f.
    pub fn scaled(&self, a: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            eval: Arc::new(move |x| a * inner(x)),
            ..self.clone()
        }
    }
}

/// exp(1 − 1/(1 − |y|²)) on the open unit ball of R^m, 0 elsewhere.
pub fn bump_psi(m: usize) -> Result<ScalarField, Error> {
    if m == 0 {
        return Err(Error::Dimension("bump needs m >= 1".into()));
    }
    Ok(ScalarField::new(m, 1.0, Smoothness::Smooth, |y| {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        if r2 >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - r2)).exp()
        }
    }))
}

/// Radial 2D field (1 − 2|x|²)·exp(−1/(1−|x|²)) on the unit disk.
///
/// One sign change at |x| = 1/√2. See `nullpair` for why the λ-construction
/// rejects it under the default bound.
pub fn default_f0() -> ScalarField {
    ScalarField::new(2, 1.0, Smoothness::Smooth, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2 >= 1.0 {
            0.0
        } else {
            (1.0 - 2.0 * r2) * (-1.0 / (1.0 - r2)).exp()
        }
    })
}

/// Positive bump exp(−1/(1−|x|²)); no sign change, so no positive weight annihilates it.
pub fn unbalanced_f0() -> ScalarField {
    ScalarField::new(2, 1.0, Smoothness::Smooth, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2 >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - r2)).exp()
        }
    })
}

/// f(x) = ψ(x₃, …, x_d)·f₀(x₁, x₂).
pub fn lift_field(f0: &ScalarField, psi: &ScalarField, d: usize) -> Result<ScalarField, Error> {
    if d < 3 || f0.dim() != 2 || psi.dim() != d - 2 {
        return Err(Error::Dimension(format!(
            "lift needs a 2D base and a {}-dimensional bump for d = {d}, got {} and {}",
            d.saturating_sub(2),
            f0.dim(),
            psi.dim()
        )));
    }
    let r = f0.support_radius().hypot(psi.support_radius());
    let smooth = match (f0.smoothness(), psi.smoothness()) {
        (Smoothness::Analytic, Smoothness::Analytic) => Smoothness::Analytic,
        (Smoothness::Piecewise, _) | (_, Smoothness::Piecewise) => Smoothness::Piecewise,
        _ => Smoothness::Smooth,
    };
    let (f0, psi) = (f0.clone(), psi.clone());
    Ok(ScalarField::new(d, r, smooth, move |x| {
        let a = f0.evaluate(&x[..2]);
        if a == 0.0 {
            return 0.0;
        }
        psi.evaluate(&x[2..]) * a
    }))
}

/// exp(−|x|²) truncated to the ball of radius `truncation_r`.
pub fn gaussian_oracle(d: usize, truncation_r: f64) -> Result<ScalarField, Error> {
    if d < 2 {
        return Err(Error::Dimension("gaussian oracle needs d >= 2".into()));
    }
    if !(truncation_r >= 6.0) {
        return Err(Error::Invalid(format!(
            "gaussian truncation radius must be >= 6, got {truncation_r}"
        )));
    }
    Ok(ScalarField::new(d, truncation_r, Smoothness::Analytic, |x| {
        (-x.iter().map(|v| v * v).sum::<f64>()).exp()
    }))
}

/// Closed-form unweighted Radon transform of the untruncated Gaussian: π^{(d−1)/2} e^{−s²}.
pub fn gaussian_radon(d: usize, s: f64) -> f64 {
    std::f64::consts::PI.powf((d as f64 - 1.0) / 2.0) * (-s * s).exp()
}

const NODE_SNAP: f64 = 1e-12;

/// Keys cubic convolution kernel (a = −1/2).
pub(crate) fn keys(t: f64) -> f64 {
    let t = t.abs();
    if t < 1.0 {
        (1.5 * t - 2.5) * t * t + 1.0
    } else if t < 2.0 {
        ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0
    } else {
        0.0
    }
}

/// Node index i₀ and the four kernel weights for stencil i₀−1..=i₀+2 at fractional position `u`.
///
/// Positions within 1e-12 of a node snap onto it, so nodes are reproduced exactly.
pub(crate) fn keys_stencil(u: f64) -> (i64, [f64; 4]) {
    let mut i0 = u.floor();
    let mut fr = u - i0;
    if fr < NODE_SNAP {
        fr = 0.0;
    } else if fr > 1.0 - NODE_SNAP {
        i0 += 1.0;
        fr = 0.0;
    }
    (
        i0 as i64,
        [keys(1.0 + fr), keys(fr), keys(1.0 - fr), keys(2.0 - fr)],
    )
}

/// Values on a uniform n×n grid over [−L, L]², row-major with x₂ (row) outer.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField2D {
    half_width: f64,
    n: usize,
    values: Vec<f64>,
}

impl GridField2D {
    pub fn new(half_width: f64, n: usize, values: Vec<f64>) -> Result<Self, Error> {
        if n < 4 || values.len() != n * n || !(half_width > 0.0) {
            return Err(Error::Invalid(format!(
                "grid needs n >= 4, L > 0 and n² values (n = {n}, L = {half_width}, {} values)",
                values.len()
            )));
        }
        let g = Self {
            half_width,
            n,
            values,
        };
        for i in 0..n {
            for (r, c) in [(0, i), (n - 1, i), (i, 0), (i, n - 1)] {
                if g.values[r * n + c] != 0.0 {
                    return Err(Error::Invalid(format!(
                        "boundary ring must be zero, found {} at ({r},{c})",
                        g.values[r * n + c]
                    )));
                }
            }
        }
        Ok(g)
    }

    /// Samples `f` at the nodes and zeroes the boundary ring.
    pub fn sample(f: &ScalarField, half_width: f64, n: usize) -> Result<Self, Error> {
        if f.dim() != 2 {
            return Err(Error::Dimension("grid fields are 2D".into()));
        }
        let h = 2.0 * half_width / (n as f64 - 1.0);
        let mut values = vec![0.0; n * n];
        for r in 1..n.saturating_sub(1) {
            for c in 1..n - 1 {
                let x = [-half_width + c as f64 * h, -half_width + r as f64 * h];
                values[r * n + c] = f.evaluate(&x);
            }
        }
        Self::new(half_width, n, values)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n as f64 - 1.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn node(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n + col]
    }

    fn at(&self, row: i64, col: i64) -> f64 {
        let n = self.n as i64;
        if row < 0 || col < 0 || row >= n || col >= n {
            0.0
        } else {
            self.values[(row * n + col) as usize]
        }
    }

    /// Bicubic (Keys) interpolation; nodes are reproduced exactly and the
    /// field is 0 beyond the grid.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let h = self.spacing();
        let (u, v) = ((x[0] + self.half_width) / h, (x[1] + self.half_width) / h);
        let last = (self.n - 1) as f64;
        if !(u >= 0.0 && v >= 0.0 && u <= last && v <= last) {
            return 0.0;
        }
        let (c0, wc) = keys_stencil(u);
        let (r0, wr) = keys_stencil(v);
        let mut acc = 0.0;
        for (i, wri) in wr.iter().enumerate() {
            if *wri == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for (j, wcj) in wc.iter().enumerate() {
                if *wcj != 0.0 {
                    row += wcj * self.at(r0 - 1 + i as i64, c0 - 1 + j as i64);
                }
            }
            acc += wri * row;
        }
        acc
    }

    pub fn into_field(self) -> ScalarField {
        let r = self.half_width * std::f64::consts::SQRT_2;
        ScalarField::new(2, r, Smoothness::Piecewise, move |x| self.interpolate(x))
    }

    /// Header `L,h,n`, then its values, then n rows of n values.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), Error> {
        let mut wr = csv::WriterBuilder::new().flexible(true).from_writer(w);
        wr.write_record(["L", "h", "n"])?;
        wr.write_record([
            self.half_width.to_string(),
            self.spacing().to_string(),
            self.n.to_string(),
        ])?;
        for row in self.values.chunks(self.n) {
            wr.write_record(row.iter().map(|v| v.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, Error> {
        let mut rd = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(r);
        let hdr = rd.headers()?.clone();
        if hdr.iter().collect::<Vec<_>>() != ["L", "h", "n"] {
            return Err(Error::Parse(format!("expected header L,h,n, got {hdr:?}")));
        }
        let mut recs = rd.records();
        let meta = recs
            .next()
            .ok_or_else(|| Error::Parse("missing L,h,n values".into()))??;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
        let half_width = num(&meta[0])?;
        let n: usize = meta[2]
            .trim()
            .parse()
            .map_err(|e: std::num::ParseIntError| Error::Parse(e.to_string()))?;
        let mut values = Vec::with_capacity(n * n);
        for rec in recs {
            let rec = rec?;
            if rec.len() != n {
                return Err(Error::Parse(format!("row has {} values, expected {n}", rec.len())));
            }
            for v in rec.iter() {
                values.push(num(v)?);
            }
        }
        Self::new(half_width, n, values)
    }
}
