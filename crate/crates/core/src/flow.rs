//! Cellular velocity fields and the Brownian shift of the cell grid.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, STREAM_SHIFT};
use crate::spectral::{grid_coord, SpectralField2D};

pub type Point = [f64; 2];

const TWO_PI: f64 = 2.0 * PI;

/// `v_c(x − y) = (sin(x₁−y₁)cos(x₂−y₂), −cos(x₁−y₁)sin(x₂−y₂))`.
#[inline]
pub fn cellular_velocity(x: Point, y: Point) -> Point {
    let (s1, c1) = (x[0] - y[0]).sin_cos();
    let (s2, c2) = (x[1] - y[1]).sin_cos();
    [s1 * c2, -c1 * s2]
}

/// Stream function `ψ_c(x − y) = sin(x₁−y₁) sin(x₂−y₂)`, with `v_c = (∂₂ψ, −∂₁ψ)`.
#[inline]
pub fn cellular_stream(x: Point, y: Point) -> f64 {
    (x[0] - y[0]).sin() * (x[1] - y[1]).sin()
}

/// Tilted cellular flow `(sin x₂, sin x₁)`.
#[inline]
pub fn tilted_velocity(x: Point) -> Point {
    [x[1].sin(), x[0].sin()]
}

/// Largest `|v_c(x) − d⁻¹Rᵀ ṽ_c(dRx)|` over an `n × n` lattice,
/// with `d = √2` and `R` the rotation by π/4.
pub fn spiral_residual(n: usize) -> f64 {
    let r = 1.0 / SQRT_2;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = [grid_coord(i, n), grid_coord(j, n)];
            let lhs = cellular_velocity(x, [0.0, 0.0]);
            // dRx with R = r[[1, -1], [1, 1]]
            let z = [SQRT_2 * r * (x[0] - x[1]), SQRT_2 * r * (x[0] + x[1])];
            let w = tilted_velocity(z);
            // d⁻¹ Rᵀ w with Rᵀ = r[[1, 1], [-1, 1]]
            let rhs = [r * (w[0] + w[1]) / SQRT_2, r * (-w[0] + w[1]) / SQRT_2];
            let res = ((lhs[0] - rhs[0]).powi(2) + (lhs[1] - rhs[1]).powi(2)).sqrt();
            worst = worst.max(res);
        }
    }
    worst
}

/// Velocity components sampled on an `n × n` lattice.
pub fn sample_velocity(n: usize, v: impl Fn(Point) -> Point) -> Result<[SpectralField2D; 2]> {
    let mut u1 = Vec::with_capacity(n * n);
    let mut u2 = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let w = v([grid_coord(i, n), grid_coord(j, n)]);
            u1.push(w[0]);
            u2.push(w[1]);
        }
    }
    Ok([
        SpectralField2D::from_grid(n, &u1)?,
        SpectralField2D::from_grid(n, &u2)?,
    ])
}

/// `‖∇v‖_{L²(T²)}` of a spectrally sampled velocity.
pub fn enstrophy(v: &[SpectralField2D; 2]) -> f64 {
    let mut sq = 0.0;
    for comp in v {
        for axis in 0..2 {
            sq += comp.derivative(axis).l2_norm().powi(2);
        }
    }
    sq.sqrt()
}

/// Largest grid value of `|∇·v|`.
pub fn max_divergence(v: &[SpectralField2D; 2]) -> f64 {
    let div = &v[0].derivative(0) + &v[1].derivative(1);
    div.to_grid().iter().fold(0.0, |m, d| m.max(d.abs()))
}

/// One realization of `Y_{m+1} = Y_m + √(2ν dt) ξ_m` on T².
///
/// Samples are kept unwrapped so that sub-step values can be linearly
/// interpolated; accessors wrap into `[0, 2π)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPath {
    nu: f64,
    dt: f64,
    seed: u64,
    samples: Vec<Point>,
}

impl ShiftPath {
    pub fn sample(nu: f64, dt: f64, t_final: f64, seed: u64) -> Result<Self> {
        Self::sample_from(nu, dt, t_final, seed, [0.0, 0.0])
    }

    pub fn sample_from(nu: f64, dt: f64, t_final: f64, seed: u64, y0: Point) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!("shift diffusivity must be positive, got {nu}")));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        if !(t_final >= 0.0) {
            return Err(Error::InvalidParameter(format!("horizon must be nonnegative, got {t_final}")));
        }
        let steps = (t_final / dt - 1e-9).ceil().max(0.0) as usize;
        let sigma = (2.0 * nu * dt).sqrt();
        let mut rng = stream_rng(seed, STREAM_SHIFT);
        let mut samples = Vec::with_capacity(steps + 1);
        let mut y = y0;
        samples.push(y);
        for _ in 0..steps {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            y = [y[0] + sigma * a, y[1] + sigma * b];
            samples.push(y);
        }
        Ok(Self { nu, dt, seed, samples })
    }

    /// A path frozen at `y` (used for steady flows and reversibility checks).
    pub fn constant(y: Point, dt: f64, steps: usize) -> Self {
        Self {
            nu: 0.0,
            dt,
            seed: 0,
            samples: vec![y; steps + 1],
        }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t_final(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.dt
    }

    pub fn unwrapped(&self) -> &[Point] {
        &self.samples
    }

    /// Unwrapped position at time `t`, linearly interpolated; clamped to the path.
    pub fn unwrapped_at(&self, t: f64) -> Point {
        let s = (t / self.dt).max(0.0);
        let last = self.samples.len() - 1;
        let m = (s.floor() as usize).min(last);
        if m == last {
            return self.samples[last];
        }
        let w = s - m as f64;
        let (a, b) = (self.samples[m], self.samples[m + 1]);
        [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]
    }

    /// Position at time `t` wrapped into `[0, 2π)²`.
    pub fn at(&self, t: f64) -> Point {
        let y = self.unwrapped_at(t);
        [wrap(y[0]), wrap(y[1])]
    }

    /// Unwrapped per-axis increments.
    pub fn increments(&self) -> impl Iterator<Item = Point> + '_ {
        self.samples
            .windows(2)
            .map(|w| [w[1][0] - w[0][0], w[1][1] - w[0][1]])
    }

    /// CSV with columns `step, y1, y2` (wrapped).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["step", "y1", "y2"])?;
        for (m, y) in self.samples.iter().enumerate() {
            out.write_record(&[m.to_string(), wrap(y[0]).to_string(), wrap(y[1]).to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Reduce an angle into `[0, 2π)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(TWO_PI);
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    SteadyCellular,
    RandomCellular,
    TiltedCellular,
    /// No advection; used for diffusion controls.
    Still,
}

impl std::str::FromStr for FlowKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "steady_cellular" | "steady" => Ok(Self::SteadyCellular),
            "random_cellular" | "random" => Ok(Self::RandomCellular),
            "tilted_cellular" | "tilted" => Ok(Self::TiltedCellular),
            "still" | "none" => Ok(Self::Still),
            other => Err(Error::Config(format!("unknown flow kind '{other}'"))),
        }
    }
}

/// Velocity field selection with its optional shift path.
#[derive(Debug, Clone)]
pub struct FlowSpec {
    kind: FlowKind,
    shift: Option<ShiftPath>,
}

impl FlowSpec {
    pub fn new(kind: FlowKind, shift: Option<ShiftPath>) -> Result<Self> {
        if kind == FlowKind::RandomCellular && shift.is_none() {
            return Err(Error::InvalidParameter("random_cellular flow needs a shift path".into()));
        }
        Ok(Self { kind, shift })
    }

    pub fn steady() -> Self {
        Self { kind: FlowKind::SteadyCellular, shift: None }
    }

    pub fn still() -> Self {
        Self { kind: FlowKind::Still, shift: None }
    }

    pub fn random(path: ShiftPath) -> Self {
        Self { kind: FlowKind::RandomCellular, shift: Some(path) }
    }

    pub fn kind(&self) -> FlowKind {
        self.kind
    }

    pub fn shift(&self) -> Option<&ShiftPath> {
        self.shift.as_ref()
    }

    /// Cell centre at time `t`.
    pub fn center(&self, t: f64) -> Point {
        match (&self.kind, &self.shift) {
            (FlowKind::RandomCellular, Some(p)) => p.at(t),
            _ => [0.0, 0.0],
        }
    }

    pub fn velocity(&self, x: Point, t: f64) -> Point {
        match self.kind {
            FlowKind::SteadyCellular | FlowKind::RandomCellular => {
                cellular_velocity(x, self.center(t))
            }
            FlowKind::TiltedCellular => tilted_velocity(x),
            FlowKind::Still => [0.0, 0.0],
        }
    }

    /// Upper bound of `|v|`.
    pub fn max_speed(&self) -> f64 {
        match self.kind {
            FlowKind::Still => 0.0,
            FlowKind::SteadyCellular | FlowKind::RandomCellular => 1.0,
            FlowKind::TiltedCellular => SQRT_2,
        }
    }
}
