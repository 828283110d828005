//! Partial Dirichlet map `D`, partial Neumann map `N`, the side trace
//! `C0 = gamma_0 D` and the Neumann-to-Neumann map `B1` on the rectangle
//! `(0, pi) x (-1, 0)`, all as truncated separated-variable series.

use std::f64::consts::{FRAC_2_PI, PI, SQRT_2};
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hyperbolic::{cosh_depth_ratio, cosh_over_sinh, sinh_over_sinh};
use crate::io::fmt_f64;
use crate::quadrature::simpson;

/// Default number of top (cosine) modes.
pub const DEFAULT_TOP_MODES: usize = 64;
/// Default number of side modes.
pub const DEFAULT_SIDE_MODES: usize = 64;
/// Simpson panels for the Hilbert-bound integral.
pub const HILBERT_PANELS: usize = 2048;

/// Coefficients `eta_k = <eta, phi_k>`, `k = 1..=n`, against
/// `phi_k(x) = sqrt(2/pi) cos(kx)`. There is no `k = 0` term, so the
/// represented function always has zero mean.
#[derive(Debug, Clone, PartialEq)]
pub struct TopCoefficients(Vec<f64>);

impl TopCoefficients {
    pub fn new(eta: Vec<f64>) -> Result<Self> {
        if let Some(i) = eta.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("top coefficient {} is not finite", i + 1)));
        }
        Ok(Self(eta))
    }

    /// Unit vector on mode `k` (1-based) in a length-`n` truncation.
    pub fn unit(k: usize, n: usize) -> Self {
        assert!(k >= 1 && k <= n);
        let mut v = vec![0.0; n];
        v[k - 1] = 1.0;
        Self(v)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sum_k eta_k phi_k(x)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let c = FRAC_2_PI.sqrt();
        self.0
            .iter()
            .enumerate()
            .map(|(i, &e)| e * c * ((i + 1) as f64 * x).cos())
            .sum()
    }
}

/// Coefficients `v_k = <v, psi_k>` against
/// `psi_k(y) = sqrt(2) cos((2k - 1)(pi/2)(y + 1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SideCoefficients(Vec<f64>);

impl SideCoefficients {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::domain(format!("side coefficient {} is not finite", i + 1)));
        }
        Ok(Self(v))
    }

    pub fn unit(k: usize, n: usize) -> Self {
        assert!(k >= 1 && k <= n);
        let mut v = vec![0.0; n];
        v[k - 1] = 1.0;
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `sum_k v_k psi_k(y)`.
    pub fn evaluate(&self, y: f64) -> f64 {
        self.0.iter().enumerate().map(|(i, &v)| v * side_basis(i + 1, y)).sum()
    }
}

/// Half-frequency `(2k - 1) pi / 2` of side mode `k`.
fn side_rate(k: usize) -> f64 {
    (2 * k - 1) as f64 * PI / 2.0
}

fn alternating(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `cos((2k - 1)(pi/2)(y + 1))`, written as `(-1)^k sin((2k - 1)(pi/2) y)`
/// so that it vanishes exactly on the free surface `y = 0`.
fn side_cos(k: usize, y: f64) -> f64 {
    alternating(k) * (side_rate(k) * y).sin()
}

/// Side basis function `psi_k(y)`.
pub fn side_basis(k: usize, y: f64) -> f64 {
    SQRT_2 * side_cos(k, y)
}

/// Sampling lattice `x_i = i pi / nx`, `y_j = -1 + j / ny`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::domain(format!("grid needs nx, ny >= 1, got {nx} x {ny}")));
        }
        Ok(Self { nx, ny })
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.nx {
            PI
        } else {
            i as f64 * PI / self.nx as f64
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        if j == self.ny {
            0.0
        } else {
            -1.0 + j as f64 / self.ny as f64
        }
    }

    pub fn refined(&self) -> Self {
        Self {
            nx: 2 * self.nx,
            ny: 2 * self.ny,
        }
    }
}

/// Field sampled on a [`GridSpec`], stored row-major by `x` index:
/// `values[i * (ny + 1) + j]` holds the sample at `(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    spec: GridSpec,
    values: Vec<f64>,
}

impl FieldGrid {
    pub fn from_fn<F>(spec: GridSpec, exec: Execution, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        let rows = exec.map_range(spec.nx + 1, |i| {
            let x = spec.x(i);
            (0..=spec.ny).map(|j| f(x, spec.y(j))).collect::<Vec<_>>()
        });
        Self {
            spec,
            values: rows.concat(),
        }
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn nx(&self) -> usize {
        self.spec.nx
    }

    pub fn ny(&self) -> usize {
        self.spec.ny
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.spec.ny + 1) + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Samples along the top row `y = 0`.
    pub fn top_row(&self) -> Vec<f64> {
        (0..=self.spec.nx).map(|i| self.get(i, self.spec.ny)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `a * self + b * other`, on the same grid.
    pub fn combine(&self, a: f64, other: &FieldGrid, b: f64) -> FieldGrid {
        assert_eq!(self.spec, other.spec, "grids differ");
        FieldGrid {
            spec: self.spec,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    /// CSV with header `x,y,value`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,value")?;
        for i in 0..=self.spec.nx {
            let x = self.spec.x(i);
            for j in 0..=self.spec.ny {
                writeln!(
                    out,
                    "{},{},{}",
                    fmt_f64(x),
                    fmt_f64(self.spec.y(j)),
                    fmt_f64(self.get(i, j))
                )?;
            }
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }
}

/// `(D eta)(x, y)` at a single point.
pub fn dirichlet_map_point(eta: &TopCoefficients, x: f64, y: f64) -> f64 {
    let c = FRAC_2_PI.sqrt();
    eta.0
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let k = (i + 1) as f64;
            e * c * (k * x).cos() * cosh_depth_ratio(k, y)
        })
        .sum()
}

/// Harmonic extension of the top data with homogeneous Neumann data on the
/// other three sides.
pub fn dirichlet_map_eval(eta: &TopCoefficients, grid: GridSpec) -> FieldGrid {
    dirichlet_map_eval_with(eta, grid, Execution::default())
}

pub fn dirichlet_map_eval_with(eta: &TopCoefficients, grid: GridSpec, exec: Execution) -> FieldGrid {
    FieldGrid::from_fn(grid, exec, |x, y| dirichlet_map_point(eta, x, y))
}

/// Trace of `D eta` on the actuated wall `x = 0`.
pub fn trace_c0(eta: &TopCoefficients, ys: &[f64]) -> Vec<f64> {
    let c = FRAC_2_PI.sqrt();
    ys.iter()
        .map(|&y| {
            eta.0
                .iter()
                .enumerate()
                .map(|(i, &e)| c * e * cosh_depth_ratio((i + 1) as f64, y))
                .sum()
        })
        .collect()
}

/// Series coefficient `a_k` of `N v`, with the `1/sinh` factor left to the
/// caller's shifted ratio.
fn neumann_weight(k: usize, vk: f64) -> f64 {
    2.0 * SQRT_2 * vk / ((2 * k - 1) as f64 * PI)
}

/// `(N v)(x, y)` at a single point.
pub fn neumann_map_point(v: &SideCoefficients, x: f64, y: f64) -> f64 {
    v.0.iter()
        .enumerate()
        .map(|(i, &vk)| {
            let k = i + 1;
            let a = side_rate(k);
            neumann_weight(k, vk) * cosh_over_sinh(a, x) * side_cos(k, y)
        })
        .sum()
}

/// Harmonic function with Neumann data `-v` on the wall `x = 0`, zero
/// Dirichlet data on top and zero Neumann data elsewhere.
pub fn neumann_map_eval(v: &SideCoefficients, grid: GridSpec) -> FieldGrid {
    neumann_map_eval_with(v, grid, Execution::default())
}

pub fn neumann_map_eval_with(v: &SideCoefficients, grid: GridSpec, exec: Execution) -> FieldGrid {
    FieldGrid::from_fn(grid, exec, |x, y| neumann_map_point(v, x, y))
}

/// Term-wise `x`-derivative of `N v` at `(x, y)`.
pub fn neumann_map_dx(v: &SideCoefficients, x: f64, y: f64) -> f64 {
    v.0.iter()
        .enumerate()
        .map(|(i, &vk)| {
            let k = i + 1;
            let a = side_rate(k);
            neumann_weight(k, vk) * a * sinh_over_sinh(a, x) * side_cos(k, y)
        })
        .sum()
}

/// `max_y |d/dx (N v)(0, y) + v(y)|` with the derivative taken analytically.
pub fn neumann_bc_residual(v: &SideCoefficients, ys: &[f64]) -> f64 {
    ys.iter()
        .map(|&y| (neumann_map_dx(v, 0.0, y) + v.evaluate(y)).abs())
        .fold(0.0, f64::max)
}

/// Same residual with the derivative replaced by a second-order one-sided
/// difference of step `fd_step`.
pub fn neumann_bc_residual_fd(v: &SideCoefficients, ys: &[f64], fd_step: f64) -> Result<f64> {
    if !(fd_step > 0.0) {
        return Err(Error::domain(format!("fd_step must be positive, got {fd_step}")));
    }
    let h = fd_step;
    Ok(ys
        .iter()
        .map(|&y| {
            let d = (-3.0 * neumann_map_point(v, 0.0, y) + 4.0 * neumann_map_point(v, h, y)
                - neumann_map_point(v, 2.0 * h, y))
                / (2.0 * h);
            (d + v.evaluate(y)).abs()
        })
        .fold(0.0, f64::max))
}

/// Coefficient `(-1)^k sqrt(2) / sinh((2k - 1) pi^2 / 2)` of `B1 psi_k`,
/// returned as the prefactor of the shifted ratio.
fn ntn_sign(k: usize) -> f64 {
    alternating(k) * SQRT_2
}

/// Neumann-to-Neumann map: top normal derivative of `N v`.
pub fn ntn_b1(v: &SideCoefficients, xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            v.0.iter()
                .enumerate()
                .map(|(i, &vk)| {
                    let k = i + 1;
                    ntn_sign(k) * vk * cosh_over_sinh(side_rate(k), x)
                })
                .sum()
        })
        .collect()
}

/// `c_k = b_k exp((2k - 1) pi^2 / 2) = (-1)^k 2 sqrt(2) / (1 - exp(-(2k - 1) pi^2))`.
pub fn hilbert_weight(k: usize) -> f64 {
    let m = (2 * k - 1) as f64;
    alternating(k) * 2.0 * SQRT_2 / -(-m * PI * PI).exp_m1()
}

/// `g(x) = sum_k c_k v_k exp(-(2k - 1)(pi/2) x)`, the growing half of `B1 v`
/// rewritten with decaying exponentials.
pub fn hilbert_g(v: &SideCoefficients, x: f64) -> f64 {
    v.0.iter()
        .enumerate()
        .map(|(i, &vk)| hilbert_weight(i + 1) * vk * (-side_rate(i + 1) * x).exp())
        .sum()
}

/// `(int_0^pi |g|^2 dx) / sum_k |v_k|^2`, bounded by 10.
pub fn hilbert_bound_check(v: &SideCoefficients) -> Result<f64> {
    let norm2: f64 = v.0.iter().map(|x| x * x).sum();
    if norm2 == 0.0 {
        return Err(Error::domain("Hilbert ratio is undefined for v = 0"));
    }
    let integral = simpson(0.0, PI, HILBERT_PANELS, |x| hilbert_g(v, x).powi(2));
    Ok(integral / norm2)
}

/// Ratios for a batch of side vectors.
pub fn hilbert_bound_batch(vs: &[SideCoefficients], exec: Execution) -> Result<Vec<f64>> {
    exec.map_slice(vs, hilbert_bound_check).into_iter().collect()
}

/// Maximum absolute five-point Laplacian over interior nodes.
pub fn harmonicity_residual(field: &FieldGrid) -> Result<f64> {
    let GridSpec { nx, ny } = field.spec;
    if nx < 4 || ny < 4 {
        return Err(Error::domain(format!(
            "harmonicity check needs nx, ny >= 4, got {nx} x {ny}"
        )));
    }
    let dx2 = (PI / nx as f64).powi(2);
    let dy2 = (1.0 / ny as f64).powi(2);
    let mut worst = 0.0f64;
    for i in 1..nx {
        for j in 1..ny {
            let c = field.get(i, j);
            let lap = (field.get(i + 1, j) - 2.0 * c + field.get(i - 1, j)) / dx2
                + (field.get(i, j + 1) - 2.0 * c + field.get(i, j - 1)) / dy2;
            worst = worst.max(lap.abs());
        }
    }
    Ok(worst)
}

/// `log2` of the residual ratio between `grid` and its refinement.
pub fn harmonicity_order<F>(grid: GridSpec, eval: F) -> Result<f64>
where
    F: Fn(GridSpec) -> FieldGrid,
{
    let coarse = harmonicity_residual(&eval(grid))?;
    let fine = harmonicity_residual(&eval(grid.refined()))?;
    Ok((coarse / fine).log2())
}

/// Velocity-potential time derivative `-(D zeta) + u (N h)`, where `side` holds
/// the side-basis projection of the wavemaker profile.
pub fn reconstruct_field(zeta: &TopCoefficients, u_now: f64, side: &SideCoefficients, grid: GridSpec) -> FieldGrid {
    FieldGrid::from_fn(grid, Execution::default(), |x, y| {
        -dirichlet_map_point(zeta, x, y) + u_now * neumann_map_point(side, x, y)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_examples() {
        let grid = GridSpec::new(16, 8).unwrap();
        let e1 = TopCoefficients::unit(1, 4);
        let f = dirichlet_map_eval(&e1, grid);
        for i in 0..=16 {
            let x = grid.x(i);
            let expect = FRAC_2_PI.sqrt() * x.cos();
            assert!((f.get(i, 8) - expect).abs() < 1e-15);
        }
        assert!((f.get(0, 0) - 0.517_072_499_518_729_1).abs() < 1e-15);
        let z = dirichlet_map_eval(&TopCoefficients::zeros(5), grid);
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn trace_examples() {
        let e1 = TopCoefficients::unit(1, 3);
        let t = trace_c0(&e1, &[0.0, -1.0]);
        assert!((t[0] - FRAC_2_PI.sqrt()).abs() < 1e-16);
        assert!((t[1] - 0.517_072_499_518_729_1).abs() < 1e-15);
        assert!(trace_c0(&TopCoefficients::zeros(3), &[-0.5]).iter().all(|&v| v == 0.0));
        // agrees with the field evaluator on the wall
        let eta = TopCoefficients::new(vec![0.3, -1.2, 0.7]).unwrap();
        for &y in &[-1.0, -0.4, 0.0] {
            let a = trace_c0(&eta, &[y])[0];
            assert!((a - dirichlet_map_point(&eta, 0.0, y)).abs() < 1e-15);
        }
    }

    #[test]
    fn neumann_examples() {
        let e1 = SideCoefficients::unit(1, 3);
        // 2 sqrt(2) / (pi sinh(pi^2 / 2)), mpmath
        let a1 = 0.012_950_609_705_095_628;
        assert!((neumann_map_point(&e1, PI, -1.0) - a1).abs() < 1e-16);
        let v = SideCoefficients::new(vec![0.4, -2.0, 1.1, 5.0]).unwrap();
        for i in 0..=10 {
            let x = i as f64 * PI / 10.0;
            assert_eq!(neumann_map_point(&v, x, 0.0), 0.0);
        }
        assert_eq!(
            neumann_map_point(&SideCoefficients::new(vec![0.0; 4]).unwrap(), 1.0, -0.3),
            0.0
        );
    }

    #[test]
    fn neumann_boundary_condition() {
        let ys: Vec<f64> = (0..=50).map(|j| -1.0 + j as f64 / 50.0).collect();
        let e1 = SideCoefficients::unit(1, 1);
        assert!(neumann_bc_residual(&e1, &ys) < 1e-15);
        assert_eq!(
            neumann_bc_residual(&SideCoefficients::new(vec![0.0; 3]).unwrap(), &ys),
            0.0
        );
        let fd = neumann_bc_residual_fd(&e1, &ys, 1e-4).unwrap();
        assert!(fd < 1e-6, "fd residual {fd}");
        assert!(neumann_bc_residual_fd(&e1, &ys, 0.0).is_err());
    }

    #[test]
    fn ntn_examples() {
        let b = ntn_b1(&SideCoefficients::unit(1, 2), &[PI]);
        assert!((b[0] + 0.020_342_770_154_518_55).abs() < 1e-16);
        let b = ntn_b1(&SideCoefficients::unit(2, 2), &[PI]);
        assert!((b[0] - 1.052_138_465_834_964_7e-6).abs() < 1e-20);
        // 200 modes reach sinh arguments far past the f64 range
        let v = SideCoefficients::new(vec![1.0; 200]).unwrap();
        assert!(ntn_b1(&v, &[0.0, 1.0, PI]).iter().all(|x| x.is_finite()));
    }

    #[test]
    fn ntn_is_top_derivative_of_neumann_map() {
        // d/dy (N v)(x, 0) by central difference against the B1 series
        let v = SideCoefficients::new(vec![1.0, -0.5, 0.25]).unwrap();
        let h = 1e-5;
        for &x in &[0.5, 1.5, 3.0] {
            let d = (neumann_map_point(&v, x, 0.0) - neumann_map_point(&v, x, -h)) / h;
            let d2 = (neumann_map_point(&v, x, 0.0) - neumann_map_point(&v, x, -2.0 * h)) / (2.0 * h);
            let rich = 2.0 * d - d2;
            let b = ntn_b1(&v, &[x])[0];
            assert!((rich - b).abs() < 1e-6 * b.abs().max(1e-3), "x={x}: {rich} vs {b}");
        }
    }

    #[test]
    fn hilbert_examples() {
        let c1 = hilbert_weight(1).abs();
        assert!((c1 - 2.828_573_427_576_275_8).abs() < 1e-14);
        assert!(c1 < 10f64.sqrt());
        for k in 2..100 {
            assert!(hilbert_weight(k).abs() <= c1);
        }
        let e1 = SideCoefficients::unit(1, 5);
        let r = hilbert_bound_check(&e1).unwrap();
        // c_1^2 (1 - e^{-pi^2}) / pi, the closed form of the integral on [0, pi]
        let exact = c1 * c1 * -(-PI * PI).exp_m1() / PI;
        assert!((r - exact).abs() < 1e-10 * exact, "{r} vs {exact}");
        assert!(r <= 10.0);
        let scaled = SideCoefficients::new(vec![0.0, 0.0, 0.0, 0.0, 3.5]).unwrap();
        let unit5 = SideCoefficients::unit(5, 5);
        let a = hilbert_bound_check(&scaled).unwrap();
        let b = hilbert_bound_check(&unit5).unwrap();
        assert!((a - b).abs() < 1e-14 * b);
        assert!(hilbert_bound_check(&SideCoefficients::new(vec![0.0; 3]).unwrap()).is_err());
    }

    #[test]
    fn harmonicity_rejects_small_grids() {
        let f = dirichlet_map_eval(&TopCoefficients::unit(1, 1), GridSpec::new(3, 8).unwrap());
        assert!(harmonicity_residual(&f).is_err());
        let c = FieldGrid::from_fn(GridSpec::new(8, 8).unwrap(), Execution::Sequential, |_, _| 2.5);
        assert_eq!(harmonicity_residual(&c).unwrap(), 0.0);
    }

    #[test]
    fn parallel_fill_is_bitwise_sequential() {
        let eta = TopCoefficients::new((1..=20).map(|k| 1.0 / k as f64).collect()).unwrap();
        let g = GridSpec::new(33, 17).unwrap();
        let a = dirichlet_map_eval_with(&eta, g, Execution::Parallel);
        let b = dirichlet_map_eval_with(&eta, g, Execution::Sequential);
        assert_eq!(a, b);
    }
}
