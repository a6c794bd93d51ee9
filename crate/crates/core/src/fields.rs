//! Stabilized operator fields on grids and their canonical generators.
//!
//! A [`Window`] (p, q) fixes the active block ℂ_p^q. Outside it a unitary is
//! the identity, and a projection is the identity below p and zero above q.

use crate::error::{Error, Result};
use crate::form::MatrixForm;
use crate::grid::Grid;
use crate::linalg::{self, C64, I, ONE, ZERO};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub p: i64,
    pub q: i64,
}

impl Window {
    pub fn new(p: i64, q: i64) -> Result<Window> {
        if p >= q {
            return Err(Error::InvalidInput(format!("window ({p}, {q}) needs p < q")));
        }
        Ok(Window { p, q })
    }

    pub fn dim(&self) -> usize {
        (self.q - self.p) as usize
    }

    /// Global basis index of local coordinate `a`.
    pub fn global(&self, a: usize) -> i64 {
        self.p + a as i64
    }
}

/// Unitary field on the active block; identity outside the window.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryField {
    pub window: Window,
    pub values: MatrixForm,
}

/// Orthogonal projection field on the active block; identity below p and
/// zero above q.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionField {
    pub window: Window,
    pub values: MatrixForm,
}

/// Connection d + A in a fixed trivialization, optionally acting on the
/// image of a projection field. `gluing` records the clutching unitary of a
/// mapping-torus connection stored on an interval time axis.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionField {
    pub form: MatrixForm,
    pub subbundle: Option<ProjectionField>,
    pub gluing: Option<UnitaryField>,
}

fn check_values(values: &MatrixForm, window: &Window) -> Result<()> {
    if values.degree() != 0 {
        return Err(Error::Degree("field values must be a 0-form".into()));
    }
    if values.matdim() != window.dim() {
        return Err(Error::DimMismatch(format!("matdim {} for window ({}, {})", values.matdim(), window.p, window.q)));
    }
    Ok(())
}

fn blocks_from_fn(grid: &Grid, n: usize, f: impl Fn(&[f64]) -> Vec<C64>) -> Vec<C64> {
    let mut data = Vec::with_capacity(grid.nsites() * n * n);
    for s in 0..grid.nsites() {
        let b = f(&grid.point(s));
        debug_assert_eq!(b.len(), n * n);
        data.extend(b);
    }
    data
}

impl UnitaryField {
    pub fn new(window: Window, values: MatrixForm) -> Result<UnitaryField> {
        check_values(&values, &window)?;
        Ok(UnitaryField { window, values })
    }

    pub fn from_fn(grid: &Grid, window: Window, f: impl Fn(&[f64]) -> Vec<C64>) -> Result<UnitaryField> {
        let n = window.dim();
        UnitaryField::new(window, MatrixForm::from_blocks(grid, n, blocks_from_fn(grid, n, f))?)
    }

    pub fn identity(grid: &Grid, window: Window) -> UnitaryField {
        let n = window.dim();
        UnitaryField::from_fn(grid, window, |_| linalg::eye(n)).expect("shape")
    }

    pub fn grid(&self) -> &Grid {
        self.values.grid()
    }

    pub fn n(&self) -> usize {
        self.window.dim()
    }

    pub fn block(&self, site: usize) -> &[C64] {
        self.values.block(0, site)
    }

    /// Pointwise inverse (adjoint).
    pub fn inverse(&self) -> UnitaryField {
        let n = self.n();
        UnitaryField { window: self.window, values: self.values.map_blocks(n, |_, b| linalg::adjoint(b, n)) }
    }

    /// Pointwise product self·other on a common window.
    pub fn compose(&self, other: &UnitaryField) -> Result<UnitaryField> {
        if self.window != other.window {
            return Err(Error::InvalidInput("compose needs equal windows".into()));
        }
        Ok(UnitaryField { window: self.window, values: self.values.wedge(&other.values)? })
    }

    pub fn restrict(&self, axis: usize, index: usize) -> Result<UnitaryField> {
        Ok(UnitaryField { window: self.window, values: self.values.restrict(axis, index)? })
    }

    pub fn unitarity_residual(&self) -> f64 {
        let n = self.n();
        (0..self.grid().nsites()).map(|s| linalg::unitarity_residual(self.block(s), n)).fold(0.0, f64::max)
    }
}

impl ProjectionField {
    pub fn new(window: Window, values: MatrixForm) -> Result<ProjectionField> {
        check_values(&values, &window)?;
        Ok(ProjectionField { window, values })
    }

    pub fn from_fn(grid: &Grid, window: Window, f: impl Fn(&[f64]) -> Vec<C64>) -> Result<ProjectionField> {
        let n = window.dim();
        ProjectionField::new(window, MatrixForm::from_blocks(grid, n, blocks_from_fn(grid, n, f))?)
    }

    /// Constant projection onto ℂ_{−∞}^k, representable when p ≤ k ≤ q.
    pub fn i_k(grid: &Grid, window: Window, k: i64) -> Result<ProjectionField> {
        if k < window.p || k > window.q {
            return Err(Error::InvalidInput(format!("I_{k} not representable in ({}, {})", window.p, window.q)));
        }
        let n = window.dim();
        let mut b = vec![ZERO; n * n];
        for a in 0..n {
            if window.global(a) < k {
                b[a * n + a] = ONE;
            }
        }
        ProjectionField::from_fn(grid, window, |_| b.clone())
    }

    pub fn i0(grid: &Grid, window: Window) -> Result<ProjectionField> {
        ProjectionField::i_k(grid, window, 0)
    }

    pub fn grid(&self) -> &Grid {
        self.values.grid()
    }

    pub fn n(&self) -> usize {
        self.window.dim()
    }

    pub fn block(&self, site: usize) -> &[C64] {
        self.values.block(0, site)
    }

    pub fn restrict(&self, axis: usize, index: usize) -> Result<ProjectionField> {
        Ok(ProjectionField { window: self.window, values: self.values.restrict(axis, index)? })
    }

    /// Max over sites of ‖P² − P‖ and ‖P − P*‖.
    pub fn residuals(&self) -> (f64, f64) {
        let n = self.n();
        let mut idem: f64 = 0.0;
        let mut herm: f64 = 0.0;
        for s in 0..self.grid().nsites() {
            let b = self.block(s);
            idem = idem.max(linalg::opnorm(&linalg::sub(&linalg::matmul(b, b, n), b), n));
            herm = herm.max(linalg::opnorm(&linalg::sub(b, &linalg::adjoint(b, n)), n));
        }
        (idem, herm)
    }

    /// Stable rank p + dim(image in the active block), by eigenvalue count
    /// above 1/2. Fails when the count varies over the grid.
    pub fn rank(&self) -> Result<i64> {
        let n = self.n();
        let mut rank = None;
        for s in 0..self.grid().nsites() {
            let (vals, _) = linalg::hermitian_eig(self.block(s), n);
            let r = vals.iter().filter(|&&v| v > 0.5).count() as i64;
            match rank {
                None => rank = Some(r),
                Some(r0) if r0 != r => {
                    return Err(Error::Invariant(format!("active rank varies over the grid ({r0} vs {r})")))
                }
                _ => {}
            }
        }
        Ok(self.window.p + rank.unwrap_or(0))
    }
}

impl ConnectionField {
    pub fn new(form: MatrixForm) -> Result<ConnectionField> {
        if form.degree() != 1 {
            return Err(Error::Degree("a connection form has degree 1".into()));
        }
        Ok(ConnectionField { form, subbundle: None, gluing: None })
    }

    pub fn with_subbundle(form: MatrixForm, p: ProjectionField) -> Result<ConnectionField> {
        if p.grid() != form.grid() || p.n() != form.matdim() {
            return Err(Error::GridMismatch("subbundle shape".into()));
        }
        let mut c = ConnectionField::new(form)?;
        c.subbundle = Some(p);
        Ok(c)
    }

    pub fn grid(&self) -> &Grid {
        self.form.grid()
    }

    pub fn n(&self) -> usize {
        self.form.matdim()
    }

    /// The Grassmann connection of P, written on the whole trivial bundle
    /// as ∇_P ⊕ ∇_{P⊥}: A = (2P − 1)dP.
    pub fn grassmann(p: &ProjectionField) -> ConnectionField {
        let n = p.n();
        let two_p_minus_1 = p.values.map_blocks(n, |_, b| {
            let mut m = linalg::scale(b, C64::new(2.0, 0.0));
            for a in 0..n {
                m[a * n + a] -= ONE;
            }
            m
        });
        let form = two_p_minus_1.wedge(&p.values.d()).expect("same grid");
        ConnectionField { form, subbundle: Some(p.clone()), gluing: None }
    }
}

/// A field with a distinguished time axis.
#[derive(Clone, Debug, PartialEq)]
pub struct PathField<F> {
    pub field: F,
    pub time_axis: usize,
}

/// Operations shared by the field types that can carry a time axis.
pub trait Sliced: Sized {
    fn grid(&self) -> &Grid;
    fn restrict(&self, axis: usize, index: usize) -> Result<Self>;
    /// Max entrywise difference between two slices of equal shape.
    fn slice_distance(a: &Self, b: &Self) -> f64;
}

impl Sliced for UnitaryField {
    fn grid(&self) -> &Grid {
        self.values.grid()
    }
    fn restrict(&self, axis: usize, index: usize) -> Result<Self> {
        UnitaryField::restrict(self, axis, index)
    }
    fn slice_distance(a: &Self, b: &Self) -> f64 {
        a.values.sub(&b.values).map(|d| d.norm_inf()).unwrap_or(f64::INFINITY)
    }
}

impl Sliced for ProjectionField {
    fn grid(&self) -> &Grid {
        self.values.grid()
    }
    fn restrict(&self, axis: usize, index: usize) -> Result<Self> {
        ProjectionField::restrict(self, axis, index)
    }
    fn slice_distance(a: &Self, b: &Self) -> f64 {
        a.values.sub(&b.values).map(|d| d.norm_inf()).unwrap_or(f64::INFINITY)
    }
}

impl<F: Sliced> PathField<F> {
    pub fn new(field: F, time_axis: &str) -> Result<PathField<F>> {
        let t = field.grid().axis_index(time_axis)?;
        Ok(PathField { field, time_axis: t })
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn time_axis_name(&self) -> &str {
        &self.grid().axis(self.time_axis).name
    }

    pub fn nt(&self) -> usize {
        self.grid().axis(self.time_axis).size
    }

    pub fn periodic(&self) -> bool {
        self.grid().axis(self.time_axis).periodic
    }

    pub fn base_grid(&self) -> Grid {
        self.grid().without_axis(self.time_axis).expect("valid grid")
    }

    /// Slice at time index k.
    pub fn ev(&self, k: usize) -> Result<F> {
        self.field.restrict(self.time_axis, k)
    }

    pub fn start(&self) -> Result<F> {
        self.ev(0)
    }

    /// Final slice: the last sample on an interval, the first on a circle.
    pub fn end(&self) -> Result<F> {
        if self.periodic() {
            self.ev(0)
        } else {
            self.ev(self.nt() - 1)
        }
    }

    /// A periodic time axis, or matching endpoints to 1e−10.
    pub fn is_loop(&self) -> bool {
        if self.periodic() {
            return true;
        }
        match (self.ev(0), self.ev(self.nt() - 1)) {
            (Ok(a), Ok(b)) => F::slice_distance(&a, &b) <= 1e-10,
            _ => false,
        }
    }
}

/// diag(e^{2πi m_j t/L}) on the first entries of the active block.
pub fn winding_unitary(grid: &Grid, axis: &str, m: &[i64], window: Window) -> Result<UnitaryField> {
    let t = grid.axis_index(axis)?;
    if m.len() > window.dim() {
        return Err(Error::InvalidInput(format!("{} windings in a window of size {}", m.len(), window.dim())));
    }
    let n = window.dim();
    let len = grid.axis(t).length;
    let m = m.to_vec();
    UnitaryField::from_fn(grid, window, move |x| {
        let mut b = linalg::eye(n);
        for (j, &mj) in m.iter().enumerate() {
            b[j * n + j] = C64::from_polar(1.0, 2.0 * PI * mj as f64 * x[t] / len);
        }
        b
    })
}

fn pauli() -> [[C64; 4]; 3] {
    [[ZERO, ONE, ONE, ZERO], [ZERO, -I, I, ZERO], [ONE, ZERO, ZERO, -ONE]]
}

/// ½(1 + n·σ) for a unit vector n.
pub fn spin_projection(n: [f64; 3]) -> Vec<C64> {
    let s = pauli();
    (0..4)
        .map(|k| {
            let id = if k == 0 || k == 3 { ONE } else { ZERO };
            (id + s[0][k] * n[0] + s[1][k] * n[1] + s[2][k] * n[2]) * 0.5
        })
        .collect()
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / r, v[1] / r, v[2] / r]
}

/// Unit vector of the Bloch generator at angles (x, y) ∈ [0, 2π)².
///
/// With z = sin x + i sin y the map is proportional to
/// (Re z̄^d, Im z̄^d, 1 + cos x + cos y); it has degree d, and the sign
/// convention is fixed so that the degree-2 Chern integral equals +d.
/// d = 0 is the constant north pole.
pub fn bloch_vector(d: i64, x: f64, y: f64) -> [f64; 3] {
    if d == 0 {
        return [0.0, 0.0, 1.0];
    }
    let z = C64::new(x.sin(), -y.sin());
    let w = if d > 0 { z.powi(d as i32) } else { z.conj().powi((-d) as i32) };
    unit([w.re, w.im, 1.0 + x.cos() + y.cos()])
}

/// Bloch projection of degree d on a two-axis torus, window (0, 2).
pub fn bloch_projection(grid: &Grid, d: i64) -> Result<ProjectionField> {
    if grid.dim() != 2 || !grid.all_periodic() {
        return Err(Error::InvalidInput("bloch_projection needs a 2-torus".into()));
    }
    let (lx, ly) = (grid.axis(0).length, grid.axis(1).length);
    ProjectionField::from_fn(grid, Window::new(0, 2)?, move |x| {
        spin_projection(bloch_vector(d, 2.0 * PI * x[0] / lx, 2.0 * PI * x[1] / ly))
    })
}

/// SU(2)-valued map of degree d ∈ {−2, …, 2} on a 3-torus:
/// v ∝ (±sin x, sin y, sin z, m + cos x + cos y + cos z) read as
/// v₄ + i v·σ, with m = 2 for |d| = 1, m = 0 for |d| = 2, m = 4 for d = 0.
pub fn su2_degree_map(grid: &Grid, d: i64) -> Result<UnitaryField> {
    if grid.dim() != 3 || !grid.all_periodic() {
        return Err(Error::InvalidInput("su2_degree_map needs a 3-torus".into()));
    }
    let (m, flip) = match d {
        0 => (4.0, 1.0),
        1 => (2.0, 1.0),
        -1 => (2.0, -1.0),
        2 => (0.0, -1.0),
        -2 => (0.0, 1.0),
        _ => return Err(Error::InvalidInput(format!("degree {d} outside -2..=2"))),
    };
    let ls: Vec<f64> = grid.axes().iter().map(|a| a.length).collect();
    let s = pauli();
    UnitaryField::from_fn(grid, Window::new(0, 2)?, move |x| {
        let a: Vec<f64> = (0..3).map(|k| 2.0 * PI * x[k] / ls[k]).collect();
        let v = [flip * a[0].sin(), a[1].sin(), a[2].sin(), m + a[0].cos() + a[1].cos() + a[2].cos()];
        let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        (0..4)
            .map(|k| {
                let id = if k == 0 || k == 3 { ONE } else { ZERO };
                (id * v[3] + I * (s[0][k] * v[0] + s[1][k] * v[1] + s[2][k] * v[2])) / r
            })
            .collect()
    })
}

/// Abelian connection i(f(p) dq + g(s) dt) on a grid with axes (p, q, s, t).
pub fn abelian_example_connection(
    grid: &Grid,
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
) -> Result<ConnectionField> {
    if grid.dim() != 4 || !grid.all_periodic() {
        return Err(Error::InvalidInput("the example connection lives on a 4-torus (p, q, s, t)".into()));
    }
    let mut a = MatrixForm::zeros(grid, 1, 1);
    for site in 0..grid.nsites() {
        let x = grid.point(site);
        a.component_mut(&[1]).unwrap()[site] = I * f(x[0]);
        a.component_mut(&[3]).unwrap()[site] = I * g(x[2]);
    }
    ConnectionField::new(a)
}

/// A = i(cos p dq + sin s dt) on T³ × S¹ with coordinates (p, q, s, t).
pub fn paper_example_connection(grid: &Grid) -> Result<ConnectionField> {
    abelian_example_connection(grid, f64::cos, f64::sin)
}

/// Standard 4-torus (p, q, s, t) with lengths 2π for the abelian example.
pub fn example_grid(size: usize) -> Result<Grid> {
    Grid::torus(&["p", "q", "s", "t"], size, 2.0 * PI)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Unitary,
    Projection,
}

/// A field produced by the random generator.
#[derive(Clone, Debug, PartialEq)]
pub enum RandomField {
    Unitary(UnitaryField),
    Projection(ProjectionField),
}

#[derive(Clone, Debug)]
pub struct RandomSpec {
    pub kind: FieldKind,
    pub window: Window,
    pub seed: u64,
    /// Fourier modes −b..=b per axis.
    pub bandwidth: usize,
    /// Active rank of projection fields; half the block when absent.
    pub active_rank: Option<usize>,
}

const GAP_MIN: f64 = 0.2;
const MAX_RETRIES: u32 = 16;

/// Smooth complex matrix field as a truncated Fourier series, scaled so
/// that its largest entrywise Frobenius norm is 1. Interval axes use modes
/// of twice the axis length, so the field is not forced to be periodic.
fn fourier_field(grid: &Grid, n: usize, bandwidth: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<C64> {
    let b = bandwidth as i64;
    let nmodes_axis = (2 * b + 1) as usize;
    let dim = grid.dim();
    let total_modes = nmodes_axis.pow(dim as u32);
    let nn = n * n;
    let mut coeffs = Vec::with_capacity(total_modes * nn);
    for mode in 0..total_modes {
        let mut rem = mode;
        let mut k2 = 0.0;
        for _ in 0..dim {
            let k = (rem % nmodes_axis) as i64 - b;
            rem /= nmodes_axis;
            k2 += (k * k) as f64;
        }
        let amp = 1.0 / (1.0 + k2);
        for _ in 0..nn {
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            coeffs.push(C64::new(re, im) * amp);
        }
    }
    // Per-axis phase tables e^{2πi k x / L_eff}.
    let tables: Vec<Vec<Vec<C64>>> = grid
        .axes()
        .iter()
        .map(|ax| {
            let leff = if ax.periodic { ax.length } else { 2.0 * ax.length };
            (0..ax.size)
                .map(|i| (-b..=b).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 * ax.coord(i) / leff)).collect())
                .collect()
        })
        .collect();
    let mut data = vec![ZERO; grid.nsites() * nn];
    let mut phase = vec![ONE; total_modes];
    for s in 0..grid.nsites() {
        let idx = grid.multi_index(s);
        for (mode, ph) in phase.iter_mut().enumerate() {
            let mut rem = mode;
            let mut p = ONE;
            for a in 0..dim {
                let k = rem % nmodes_axis;
                rem /= nmodes_axis;
                p *= tables[a][idx[a]][k];
            }
            *ph = p;
        }
        let out = &mut data[s * nn..(s + 1) * nn];
        for (mode, ph) in phase.iter().enumerate() {
            for e in 0..nn {
                out[e] += coeffs[mode * nn + e] * ph;
            }
        }
    }
    let maxnorm = (0..grid.nsites())
        .map(|s| data[s * nn..(s + 1) * nn].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    if maxnorm > 0.0 {
        for x in data.iter_mut() {
            *x /= maxnorm;
        }
    }
    data
}

fn hermitian_part(data: &[C64], n: usize) -> Vec<C64> {
    let nn = n * n;
    let mut out = vec![ZERO; data.len()];
    for s in 0..data.len() / nn {
        let b = &data[s * nn..(s + 1) * nn];
        let h = linalg::scale(&linalg::add(b, &linalg::adjoint(b, n)), C64::new(0.5, 0.0));
        out[s * nn..(s + 1) * nn].copy_from_slice(&h);
    }
    out
}

/// Deterministic smooth random field per seed.
///
/// Unitaries are the polar factor of e^{iπH} + ½R for smooth Hermitian H and
/// complex R of unit size, which keeps the polar decomposition smooth.
/// Projections spectrally round diag(1,…,1,−1,…,−1) + 0.9·H onto the
/// positive eigenspace; a spectral gap below 0.2 triggers a retry with the
/// next derived seed.
pub fn random_smooth_field(grid: &Grid, spec: &RandomSpec) -> Result<RandomField> {
    let n = spec.window.dim();
    let nn = n * n;
    for retry in 0..MAX_RETRIES {
        let derived = spec.seed.wrapping_add((retry as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derived);
        match spec.kind {
            FieldKind::Unitary => {
                let h = hermitian_part(&fourier_field(grid, n, spec.bandwidth, &mut rng), n);
                let r = fourier_field(grid, n, spec.bandwidth, &mut rng);
                let mut data = Vec::with_capacity(grid.nsites() * nn);
                for s in 0..grid.nsites() {
                    let e = linalg::expm_i_hermitian(&h[s * nn..(s + 1) * nn], PI, n);
                    let m: Vec<C64> = e.iter().zip(&r[s * nn..(s + 1) * nn]).map(|(a, b)| a + b * 0.5).collect();
                    data.extend(linalg::polar_unitary(&m, n));
                }
                let f = UnitaryField::new(spec.window, MatrixForm::from_blocks(grid, n, data)?)?;
                return Ok(RandomField::Unitary(f));
            }
            FieldKind::Projection => {
                let rank = spec.active_rank.unwrap_or((n / 2).max(1));
                if rank > n {
                    return Err(Error::InvalidInput(format!("active rank {rank} exceeds block {n}")));
                }
                let h = hermitian_part(&fourier_field(grid, n, spec.bandwidth, &mut rng), n);
                let mut data = Vec::with_capacity(grid.nsites() * nn);
                let mut gap = f64::INFINITY;
                for s in 0..grid.nsites() {
                    let mut m = linalg::scale(&h[s * nn..(s + 1) * nn], C64::new(0.9, 0.0));
                    for a in 0..n {
                        m[a * n + a] += if a < rank { 1.0 } else { -1.0 };
                    }
                    let (vals, vecs) = linalg::hermitian_eig(&m, n);
                    // Ascending order: the top `rank` eigenvalues span the image.
                    let cut = n - rank;
                    if cut > 0 && rank > 0 {
                        gap = gap.min(vals[cut] - vals[cut - 1]);
                    }
                    let mut p = vec![ZERO; nn];
                    for k in cut..n {
                        for i in 0..n {
                            for j in 0..n {
                                p[i * n + j] += vecs[i * n + k] * vecs[j * n + k].conj();
                            }
                        }
                    }
                    data.extend(p);
                }
                if gap < GAP_MIN {
                    continue;
                }
                let f = ProjectionField::new(spec.window, MatrixForm::from_blocks(grid, n, data)?)?;
                return Ok(RandomField::Projection(f));
            }
        }
    }
    Err(Error::GapFailure(MAX_RETRIES))
}

pub fn random_unitary(grid: &Grid, window: Window, seed: u64, bandwidth: usize) -> Result<UnitaryField> {
    let spec = RandomSpec { kind: FieldKind::Unitary, window, seed, bandwidth, active_rank: None };
    match random_smooth_field(grid, &spec)? {
        RandomField::Unitary(u) => Ok(u),
        RandomField::Projection(_) => unreachable!(),
    }
}

pub fn random_projection(
    grid: &Grid,
    window: Window,
    seed: u64,
    bandwidth: usize,
    active_rank: usize,
) -> Result<ProjectionField> {
    let spec = RandomSpec { kind: FieldKind::Projection, window, seed, bandwidth, active_rank: Some(active_rank) };
    match random_smooth_field(grid, &spec)? {
        RandomField::Projection(p) => Ok(p),
        RandomField::Unitary(_) => unreachable!(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub kind: String,
    pub checks: Vec<InvariantCheck>,
    pub pass: bool,
}

impl ValidationReport {
    fn from_checks(kind: &str, checks: Vec<InvariantCheck>) -> ValidationReport {
        let pass = checks.iter().all(|c| c.pass);
        ValidationReport { kind: kind.into(), checks, pass }
    }

    /// Names of failing invariants.
    pub fn failures(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect()
    }
}

fn check(name: &str, residual: f64, tolerance: f64) -> InvariantCheck {
    InvariantCheck { name: name.into(), residual, tolerance, pass: residual <= tolerance }
}

pub fn validate_unitary(u: &UnitaryField) -> ValidationReport {
    ValidationReport::from_checks("unitary", vec![check("unitarity", u.unitarity_residual(), 1e-10)])
}

pub fn validate_projection(p: &ProjectionField) -> ValidationReport {
    let (idem, herm) = p.residuals();
    let mut checks = vec![check("idempotency", idem, 1e-10), check("hermiticity", herm, 1e-12)];
    let rank_ok = p.rank().is_ok();
    checks.push(check("constant_rank", if rank_ok { 0.0 } else { 1.0 }, 0.0));
    ValidationReport::from_checks("projection", checks)
}

pub fn validate_connection(c: &ConnectionField) -> ValidationReport {
    let mut checks = vec![check("degree_one", if c.form.degree() == 1 { 0.0 } else { 1.0 }, 0.0)];
    if let Some(p) = &c.subbundle {
        checks.extend(validate_projection(p).checks.into_iter().map(|mut k| {
            k.name = format!("subbundle_{}", k.name);
            k
        }));
    }
    ValidationReport::from_checks("connection", checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;

    #[test]
    fn window_rules() {
        assert!(Window::new(2, 2).is_err());
        assert_eq!(Window::new(-2, 2).unwrap().dim(), 4);
    }

    #[test]
    fn ranks_of_constants() {
        let g = Grid::torus(&["x", "y"], 4, 1.0).unwrap();
        let w = Window::new(-2, 2).unwrap();
        assert_eq!(ProjectionField::i0(&g, w).unwrap().rank().unwrap(), 0);
        assert_eq!(ProjectionField::i_k(&g, w, 2).unwrap().rank().unwrap(), 2);
        assert_eq!(ProjectionField::i_k(&g, w, -2).unwrap().rank().unwrap(), -2);
        assert!(ProjectionField::i_k(&g, w, 3).is_err());
    }

    #[test]
    fn bloch_rank_and_validity() {
        let g = Grid::torus(&["x", "y"], 16, 2.0 * PI).unwrap();
        for d in 0..3 {
            let p = bloch_projection(&g, d).unwrap();
            assert_eq!(p.rank().unwrap(), 1);
            assert!(validate_projection(&p).pass);
        }
    }

    #[test]
    fn bloch_vector_has_unit_length_and_degree_zero_is_constant() {
        for d in -2..=2 {
            for (x, y) in [(0.1, 0.2), (3.0, 1.0), (PI, PI)] {
                let v = bloch_vector(d, x, y);
                assert!((v.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-14);
            }
        }
        assert_eq!(bloch_vector(0, 1.0, 2.0), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn winding_constant_and_window_check() {
        let g = Grid::torus(&["t"], 8, 1.0).unwrap();
        let w = Window::new(0, 1).unwrap();
        let u = winding_unitary(&g, "t", &[0], w).unwrap();
        assert_eq!(u, UnitaryField::identity(&g, w));
        assert!(winding_unitary(&g, "t", &[1, 2], w).is_err());
        assert!(winding_unitary(&g, "s", &[1], w).is_err());
    }

    #[test]
    fn random_fields_are_deterministic_and_valid() {
        let g = Grid::new(vec![Axis::periodic("x", 8, 1.0), Axis::interval("t", 9, 1.0)]).unwrap();
        let w = Window::new(-1, 2).unwrap();
        let u1 = random_unitary(&g, w, 3, 2).unwrap();
        let u2 = random_unitary(&g, w, 3, 2).unwrap();
        assert_eq!(u1, u2);
        assert!(validate_unitary(&u1).pass);
        let p = random_projection(&g, w, 5, 2, 1).unwrap();
        assert_eq!(p, random_projection(&g, w, 5, 2, 1).unwrap());
        let rep = validate_projection(&p);
        assert!(rep.pass, "{rep:?}");
        assert_eq!(p.rank().unwrap(), 0);
        assert_ne!(random_unitary(&g, w, 4, 2).unwrap(), u1);
    }

    #[test]
    fn spectral_rounding_oracle() {
        // Rounding keeps eigenvectors: P commutes with the Hermitian field
        // it came from, so check P·v = v on the dominant eigenvector.
        let g = Grid::torus(&["x"], 8, 1.0).unwrap();
        let p = random_projection(&g, Window::new(0, 3).unwrap(), 1, 1, 2).unwrap();
        for s in 0..8 {
            let b = p.block(s);
            let (vals, _) = linalg::hermitian_eig(b, 3);
            assert!(vals[0].abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12 && (vals[2] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbed_projection_fails_validation() {
        let g = Grid::torus(&["x"], 8, 1.0).unwrap();
        let mut p = ProjectionField::i0(&g, Window::new(-1, 1).unwrap()).unwrap();
        p.values.components_mut()[0][0] += C64::new(1e-3, 0.0);
        let rep = validate_projection(&p);
        assert!(!rep.pass);
        assert_eq!(rep.failures(), vec!["idempotency".to_string()]);
        assert!(rep.checks[0].residual > 9e-4);
    }

    #[test]
    fn example_connection_shape() {
        let g = example_grid(8).unwrap();
        let c = paper_example_connection(&g).unwrap();
        assert_eq!(c.form.degree(), 1);
        assert_eq!(c.n(), 1);
        assert!(paper_example_connection(&Grid::torus(&["p", "q", "s"], 8, 1.0).unwrap()).is_err());
    }

    #[test]
    fn path_field_slices_and_loops() {
        let g = Grid::new(vec![Axis::periodic("x", 4, 1.0), Axis::interval("t", 5, 1.0)]).unwrap();
        let u = UnitaryField::identity(&g, Window::new(0, 2).unwrap());
        let path = PathField::new(u, "t").unwrap();
        assert_eq!(path.nt(), 5);
        assert!(path.is_loop());
        assert_eq!(path.ev(2).unwrap().grid().dim(), 1);
        assert!(PathField::new(path.field.clone(), "s").is_err());
    }
}
