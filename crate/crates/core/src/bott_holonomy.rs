//! The Bott map, parallel transport around a loop, the holonomy map h_*,
//! mapping-torus connections, and the η form with dη = ∫_{S¹}Ch − Ch(h_*).
//!
//! A loop is a family of connections d + A_M(t) + A_t(t)dt on a base M,
//! sampled at the nodes of a periodic time axis. Projection loops use the
//! Grassmann forms A_M = [P, d_M P], A_t = [P, Ṗ] on the whole active block
//! (the direct sum of the connections on Im P and its complement), with Ṗ
//! spectral in t. Transport solves ġ = −A_t g with d_M g = gW carried along
//! by Ẇ = −g⁻¹(d_M A_t)g, so that no stencil of g is ever taken.

use crate::chern::{self, TimeSlices};
use crate::error::{Error, Result};
use crate::fields::{ConnectionField, PathField, ProjectionField, UnitaryField, Window};
use crate::form::{MatrixForm, MixedForm};
use crate::grid::{Axis, Grid};
use crate::linalg::{self, C64, ONE, ZERO};
use crate::stable_ops::TIME_AXIS;
use serde::Serialize;
use std::f64::consts::PI;

/// Axis name of the interpolation parameter in the η reference route.
const R_AXIS: &str = "r";

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn i0_block(window: Window) -> Result<Vec<C64>> {
    if window.p > 0 || window.q < 0 {
        return Err(Error::InvalidInput(format!("I_0 is not representable in window ({}, {})", window.p, window.q)));
    }
    let n = window.dim();
    let mut b = vec![ZERO; n * n];
    for a in 0..n {
        if window.global(a) < 0 {
            b[a * n + a] = ONE;
        }
    }
    Ok(b)
}

/// E(P)(t) = exp 2πi(tP + (1−t)I₀) on an interval time axis t ∈ [0, 1].
pub fn bott_map(p: &ProjectionField, nt: usize) -> Result<PathField<UnitaryField>> {
    let i0 = i0_block(p.window)?;
    let base = p.grid();
    if base.axis_index(TIME_AXIS).is_ok() {
        return Err(Error::InvalidInput(format!("base already has an axis named {TIME_AXIS}")));
    }
    let grid = base.with_axis(Axis::interval(TIME_AXIS, nt, 1.0))?;
    let n = p.n();
    let mut data = Vec::with_capacity(grid.nsites() * n * n);
    for s in 0..base.nsites() {
        let pb = p.block(s);
        for k in 0..nt {
            let t = grid.axis(grid.dim() - 1).coord(k);
            let h: Vec<C64> = pb.iter().zip(&i0).map(|(x, y)| x * t + y * (1.0 - t)).collect();
            data.extend(linalg::expm_i_hermitian(&h, 2.0 * PI, n));
        }
    }
    let field = UnitaryField::new(p.window, MatrixForm::from_blocks(&grid, n, data)?)?;
    PathField::new(field, TIME_AXIS)
}

/// Winding number of det E(P)(t) over t, by summing principal phase steps.
/// The oracle for the degree-0 part of CS(E(P)).
pub fn det_winding(path: &PathField<UnitaryField>, site: usize) -> Result<f64> {
    let n = path.field.n();
    let nt = path.nt();
    let mut total = 0.0;
    let mut prev = linalg::det(path.ev(0)?.block(site), n);
    for k in 1..nt {
        let cur = linalg::det(path.ev(k)?.block(site), n);
        total += (cur / prev).arg();
        prev = cur;
    }
    Ok(total / (2.0 * PI))
}

/// Node data of a loop at one time sample.
struct Node {
    a_m: MatrixForm,
    a_t: MatrixForm,
    da_m: MatrixForm,
    p: Option<MatrixForm>,
}

enum LoopKind {
    Projection { p: Vec<MatrixForm>, pd: Vec<MatrixForm> },
    Connection { a_m: Vec<MatrixForm>, a_t: Vec<MatrixForm>, da_m: Vec<MatrixForm>, p: Option<Vec<MatrixForm>> },
}

/// A loop of connections on a base grid, sampled on a periodic time axis.
pub struct ConnectionLoop {
    base: Grid,
    length: f64,
    window: Window,
    kind: LoopKind,
}

fn commutator(a: &MatrixForm, b: &MatrixForm) -> Result<MatrixForm> {
    a.wedge(b)?.sub(&b.wedge(a)?)
}

fn spectral_apply(slices: &[Vec<C64>], length: f64) -> Vec<Vec<C64>> {
    let nt = slices.len();
    let m = chern::spectral_derivative_matrix(nt, length);
    (0..nt)
        .map(|j| {
            // Rows of m sum to zero; differencing against slice 0 makes a
            // constant loop have Ṗ = 0 exactly.
            let mut acc = vec![ZERO; slices[0].len()];
            for (k, s) in slices.iter().enumerate().skip(1) {
                let w = m[j * nt + k];
                if w != 0.0 {
                    acc.iter_mut().zip(s).zip(&slices[0]).for_each(|((a, x), x0)| *a += (x - x0) * w);
                }
            }
            acc
        })
        .collect()
}

/// Sample indices and length of a loop: all nodes of a periodic axis, or
/// all but the repeated endpoint of an interval axis.
fn loop_nodes<F: crate::fields::Sliced>(path: &PathField<F>) -> Result<(usize, f64)> {
    let ax = path.grid().axis(path.time_axis);
    if ax.periodic {
        Ok((ax.size, ax.length))
    } else if path.is_loop() {
        Ok((ax.size - 1, ax.length))
    } else {
        Err(Error::InvalidInput("path is not a loop".into()))
    }
}

impl ConnectionLoop {
    pub fn from_projections(path: &PathField<ProjectionField>) -> Result<ConnectionLoop> {
        let (nt, length) = loop_nodes(path)?;
        let grid = path.grid();
        let base = path.base_grid();
        let n = path.field.n();
        let data = &path.field.values.components()[0];
        let raw: Vec<Vec<C64>> = (0..nt).map(|k| grid.slice(data, n * n, path.time_axis, k)).collect();
        let raw_d = spectral_apply(&raw, length);
        let to_form = |v: Vec<C64>| MatrixForm::from_blocks(&base, n, v);
        Ok(ConnectionLoop {
            length,
            window: path.field.window,
            kind: LoopKind::Projection {
                p: raw.into_iter().map(to_form).collect::<Result<_>>()?,
                pd: raw_d.into_iter().map(to_form).collect::<Result<_>>()?,
            },
            base,
        })
    }

    /// A connection on base × S¹ with a periodic axis `t_axis`. A subbundle
    /// makes traces run over the image of its slices.
    pub fn from_connection(conn: &ConnectionField, t_axis: &str) -> Result<ConnectionLoop> {
        let grid = conn.grid();
        let t = grid.axis_index(t_axis)?;
        let ax = grid.axis(t).clone();
        if !ax.periodic {
            return Err(Error::InvalidInput("a connection loop needs a periodic time axis".into()));
        }
        if conn.form.degree() != 1 {
            return Err(Error::Degree("a connection is a 1-form".into()));
        }
        let base = grid.without_axis(t)?;
        let n = conn.n();
        let nn = n * n;
        let comp_slices = |axis: usize| -> Vec<Vec<C64>> {
            let data = conn.form.component(&[axis]).expect("1-form component");
            (0..ax.size).map(|k| grid.slice(data, nn, t, k)).collect()
        };
        let full_axes: Vec<usize> = (0..base.dim()).map(|j| if j < t { j } else { j + 1 }).collect();
        let per_axis: Vec<Vec<Vec<C64>>> = full_axes.iter().map(|&a| comp_slices(a)).collect();
        let per_axis_d: Vec<Vec<Vec<C64>>> = per_axis.iter().map(|s| spectral_apply(s, ax.length)).collect();
        let build = |src: &Vec<Vec<Vec<C64>>>, k: usize| {
            MatrixForm::from_components(&base, 1, n, src.iter().map(|s| s[k].clone()).collect())
        };
        let a_m = (0..ax.size).map(|k| build(&per_axis, k)).collect::<Result<Vec<_>>>()?;
        let da_m = (0..ax.size).map(|k| build(&per_axis_d, k)).collect::<Result<Vec<_>>>()?;
        let a_t =
            comp_slices(t).into_iter().map(|v| MatrixForm::from_blocks(&base, n, v)).collect::<Result<Vec<_>>>()?;
        let p = match &conn.subbundle {
            Some(pf) => {
                let data = &pf.values.components()[0];
                Some(
                    (0..ax.size)
                        .map(|k| MatrixForm::from_blocks(&base, n, grid.slice(data, nn, t, k)))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            None => None,
        };
        let window = match &conn.subbundle {
            Some(pf) => pf.window,
            None => Window::new(0, n as i64)?,
        };
        Ok(ConnectionLoop { base, length: ax.length, window, kind: LoopKind::Connection { a_m, a_t, da_m, p } })
    }

    pub fn base(&self) -> &Grid {
        &self.base
    }

    pub fn nt(&self) -> usize {
        match &self.kind {
            LoopKind::Projection { p, .. } => p.len(),
            LoopKind::Connection { a_t, .. } => a_t.len(),
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.window.dim()
    }

    fn subbundle(&self, k: usize) -> Option<&MatrixForm> {
        match &self.kind {
            LoopKind::Projection { p, .. } => Some(&p[k]),
            LoopKind::Connection { p, .. } => p.as_ref().map(|v| &v[k]),
        }
    }

    fn a_t(&self, k: usize) -> Result<MatrixForm> {
        match &self.kind {
            LoopKind::Projection { p, pd } => commutator(&p[k], &pd[k]),
            LoopKind::Connection { a_t, .. } => Ok(a_t[k].clone()),
        }
    }

    fn node(&self, k: usize) -> Result<Node> {
        match &self.kind {
            LoopKind::Projection { p, pd } => {
                let (p, pd) = (&p[k], &pd[k]);
                let dp = p.d();
                let dpd = pd.d();
                Ok(Node {
                    a_m: commutator(p, &dp)?,
                    a_t: commutator(p, pd)?,
                    da_m: commutator(pd, &dp)?.add(&commutator(p, &dpd)?)?,
                    p: Some(p.clone()),
                })
            }
            LoopKind::Connection { a_m, a_t, da_m, p } => Ok(Node {
                a_m: a_m[k].clone(),
                a_t: a_t[k].clone(),
                da_m: da_m[k].clone(),
                p: p.as_ref().map(|v| v[k].clone()),
            }),
        }
    }

    /// The same loop traversed backwards from the same base point.
    pub fn reversed(&self) -> ConnectionLoop {
        let nt = self.nt();
        let idx = |k: usize| (nt - k) % nt;
        let flip = |v: &Vec<MatrixForm>| (0..nt).map(|k| v[idx(k)].clone()).collect::<Vec<_>>();
        let neg = |v: &Vec<MatrixForm>| (0..nt).map(|k| v[idx(k)].scale(-ONE)).collect::<Vec<_>>();
        let kind = match &self.kind {
            LoopKind::Projection { p, pd } => LoopKind::Projection { p: flip(p), pd: neg(pd) },
            LoopKind::Connection { a_m, a_t, da_m, p } => {
                LoopKind::Connection { a_m: flip(a_m), a_t: neg(a_t), da_m: neg(da_m), p: p.as_ref().map(flip) }
            }
        };
        ConnectionLoop { base: self.base.clone(), length: self.length, window: self.window, kind }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TransportOptions {
    /// RK4 steps per time interval of the loop grid.
    pub substeps: usize,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions { substeps: 2 }
    }
}

/// Transport frames at the loop nodes, including the closing node.
struct Frames {
    g: Vec<MatrixForm>,
    w: Vec<MatrixForm>,
}

/// Weights D(τ − t_k) of periodic trigonometric interpolation at τ.
fn trig_weights(nt: usize, length: f64, tau: f64) -> Vec<f64> {
    let h = length / nt as f64;
    (0..nt)
        .map(|k| {
            let half = PI * (tau - k as f64 * h) / length;
            if half.sin().abs() < 1e-14 {
                // τ is node k itself, up to a whole period.
                return 1.0;
            }
            let nh = nt as f64 * half;
            if nt.is_multiple_of(2) {
                nh.sin() * half.cos() / (half.sin() * nt as f64)
            } else {
                nh.sin() / (half.sin() * nt as f64)
            }
        })
        .collect()
}

/// Nearest unitary to a near-unitary block by two Newton–Schulz steps.
fn reunitarize(g: &mut [C64], n: usize) {
    if n == 1 {
        g[0] /= g[0].norm();
        return;
    }
    for _ in 0..2 {
        let gh = linalg::adjoint(g, n);
        let mut m = linalg::matmul(&gh, g, n);
        m.iter_mut().for_each(|x| *x = -*x);
        for a in 0..n {
            m[a * n + a] += c(3.0);
        }
        let next = linalg::matmul(g, &m, n);
        g.iter_mut().zip(next).for_each(|(x, y)| *x = y * 0.5);
    }
}

/// Sites per transport block; bounds the memory of the sub-step samples.
const BLOCK: usize = 512;

/// Right-hand side of the augmented transport system for one site. `y` and
/// `a` share the layout [g | W_0 … W_{dm−1}] and [A_t | ∂_0A_t …].
fn transport_rhs(a: &[C64], y: &[C64], out: &mut [C64], n: usize, dm: usize) {
    let nn = n * n;
    out.iter_mut().for_each(|x| *x = ZERO);
    let g = &y[..nn];
    linalg::matmul_acc(&mut out[..nn], &a[..nn], g, n, -ONE);
    let gh = linalg::adjoint(g, n);
    let mut tmp = vec![ZERO; nn];
    for cmp in 1..=dm {
        tmp.iter_mut().for_each(|x| *x = ZERO);
        linalg::matmul_acc(&mut tmp, &a[cmp * nn..(cmp + 1) * nn], g, n, ONE);
        linalg::matmul_acc(&mut out[cmp * nn..(cmp + 1) * nn], &gh, &tmp, n, -ONE);
    }
}

fn transport_frames(lp: &ConnectionLoop, opts: TransportOptions) -> Result<Frames> {
    let base = &lp.base;
    let n = lp.n();
    let nn = n * n;
    let dm = base.dim();
    let ns = base.nsites();
    let nt = lp.nt();
    let per = (1 + dm) * nn;
    let sub = opts.substeps.max(1);
    let h = lp.length / nt as f64;
    let dt = h / sub as f64;
    let at_nodes: Vec<Vec<C64>> = (0..nt).map(|k| Ok(lp.a_t(k)?.into_components().remove(0))).collect::<Result<_>>()?;
    // Relative weights for the sample at node k + j·dt/2, j = 1 … 2·sub − 1.
    let shifts: Vec<Vec<f64>> = (1..2 * sub).map(|j| trig_weights(nt, lp.length, 0.5 * j as f64 * dt)).collect();
    let mut g_out = vec![vec![ZERO; ns * nn]; nt + 1];
    let mut w_out = vec![vec![vec![ZERO; ns * nn]; dm]; nt + 1];
    for b0 in (0..ns).step_by(BLOCK) {
        let bs = (b0 + BLOCK).min(ns) - b0;
        let mut nodes = vec![vec![ZERO; bs * per]; nt];
        for (k, node) in nodes.iter_mut().enumerate() {
            let at = &at_nodes[k];
            for l in 0..bs {
                let s = b0 + l;
                let dst = &mut node[l * per..(l + 1) * per];
                dst[..nn].copy_from_slice(&at[s * nn..(s + 1) * nn]);
                for cmp in 0..dm {
                    for (s2, w) in base.site_stencil(s, cmp) {
                        if w != 0.0 {
                            let src = &at[s2 * nn..(s2 + 1) * nn];
                            dst[(1 + cmp) * nn..(2 + cmp) * nn].iter_mut().zip(src).for_each(|(d, x)| *d += x * w);
                        }
                    }
                }
            }
        }
        let mut samples = Vec::with_capacity(2 * sub);
        for w in &shifts {
            let shifted: Vec<Vec<C64>> = (0..nt)
                .map(|k| {
                    let mut acc = vec![ZERO; bs * per];
                    for (d, &wd) in w.iter().enumerate() {
                        if wd.abs() > 1e-300 {
                            let src = &nodes[(k + d) % nt];
                            acc.iter_mut().zip(src).for_each(|(a, x)| *a += x * wd);
                        }
                    }
                    acc
                })
                .collect();
            samples.push(shifted);
        }
        samples.insert(0, nodes);
        let mut y = vec![ZERO; per];
        let mut stage = vec![ZERO; per];
        let mut ks = vec![vec![ZERO; per]; 4];
        for l in 0..bs {
            let s = b0 + l;
            y.iter_mut().for_each(|x| *x = ZERO);
            y[..nn].copy_from_slice(&linalg::eye(n));
            let mut record = |k: usize, y: &[C64]| {
                g_out[k][s * nn..(s + 1) * nn].copy_from_slice(&y[..nn]);
                for cmp in 0..dm {
                    w_out[k][cmp][s * nn..(s + 1) * nn].copy_from_slice(&y[(1 + cmp) * nn..(2 + cmp) * nn]);
                }
            };
            record(0, &y);
            for k in 0..nt {
                let sample = |j: usize| -> &[C64] {
                    let (kk, jj) = if j == 2 * sub { ((k + 1) % nt, 0) } else { (k, j) };
                    &samples[jj][kk][l * per..(l + 1) * per]
                };
                for st in 0..sub {
                    let (j0, j1, j2) = (2 * st, 2 * st + 1, 2 * st + 2);
                    transport_rhs(sample(j0), &y, &mut ks[0], n, dm);
                    stage.iter_mut().zip(&y).zip(&ks[0]).for_each(|((o, a), b)| *o = a + b * (0.5 * dt));
                    transport_rhs(sample(j1), &stage, &mut ks[1], n, dm);
                    stage.iter_mut().zip(&y).zip(&ks[1]).for_each(|((o, a), b)| *o = a + b * (0.5 * dt));
                    transport_rhs(sample(j1), &stage, &mut ks[2], n, dm);
                    stage.iter_mut().zip(&y).zip(&ks[2]).for_each(|((o, a), b)| *o = a + b * dt);
                    transport_rhs(sample(j2), &stage, &mut ks[3], n, dm);
                    for (i, v) in y.iter_mut().enumerate() {
                        *v += (ks[0][i] + ks[1][i] * 2.0 + ks[2][i] * 2.0 + ks[3][i]) * (dt / 6.0);
                    }
                    reunitarize(&mut y[..nn], n);
                }
                record(k + 1, &y);
            }
        }
    }
    let g = g_out.into_iter().map(|v| MatrixForm::from_blocks(base, n, v)).collect::<Result<_>>()?;
    let w = w_out.into_iter().map(|v| MatrixForm::from_components(base, 1, n, v)).collect::<Result<_>>()?;
    Ok(Frames { g, w })
}

/// Transport frames g_t along the loop, the time-1 value and the drift
/// max ‖P_t g_t − g_t P_0‖ of the image bundle (zero without one).
#[derive(Clone, Debug)]
pub struct TransportResult {
    pub g_t: PathField<UnitaryField>,
    pub hol: UnitaryField,
    pub fiber_drift: f64,
}

/// Drift limit past which the step count is considered too low.
pub const DRIFT_LIMIT: f64 = 1e-4;

fn transport_result(lp: &ConnectionLoop, frames: &Frames) -> Result<TransportResult> {
    let nt = lp.nt();
    let n = lp.n();
    let base = &lp.base;
    let mut drift: f64 = 0.0;
    if lp.subbundle(0).is_some() {
        let p0 = lp.subbundle(0).unwrap();
        for (k, g) in frames.g.iter().enumerate() {
            let pk = lp.subbundle(k % nt).unwrap();
            for s in 0..base.nsites() {
                let lhs = linalg::matmul(pk.block(0, s), g.block(0, s), n);
                let rhs = linalg::matmul(g.block(0, s), p0.block(0, s), n);
                drift = drift.max(linalg::opnorm(&linalg::sub(&lhs, &rhs), n));
            }
        }
    }
    let grid = base.with_axis(Axis::interval(TIME_AXIS, nt + 1, lp.length))?;
    let slices: Vec<Vec<C64>> = frames.g.iter().map(|g| g.components()[0].clone()).collect();
    let data = grid.stack(&slices, n * n, grid.dim() - 1);
    let g_t = PathField::new(UnitaryField::new(lp.window, MatrixForm::from_blocks(&grid, n, data)?)?, TIME_AXIS)?;
    let hol = UnitaryField::new(lp.window, frames.g[nt].clone())?;
    Ok(TransportResult { g_t, hol, fiber_drift: drift })
}

/// Parallel transport of the Grassmann connection, u̇ = [Ṗ_t, P_t]u.
pub fn parallel_transport(path: &PathField<ProjectionField>, opts: TransportOptions) -> Result<TransportResult> {
    let lp = ConnectionLoop::from_projections(path)?;
    let res = transport_result(&lp, &transport_frames(&lp, opts)?)?;
    if res.fiber_drift > DRIFT_LIMIT {
        return Err(Error::Drift(res.fiber_drift));
    }
    Ok(res)
}

/// Parallel transport of a connection around its periodic axis `t_axis`.
pub fn transport_connection(conn: &ConnectionField, t_axis: &str, opts: TransportOptions) -> Result<TransportResult> {
    let lp = ConnectionLoop::from_connection(conn, t_axis)?;
    transport_result(&lp, &transport_frames(&lp, opts)?)
}

/// hol ⊕ id: the holonomy on Im P_0 and the identity on its complement.
fn embed_holonomy(lp: &ConnectionLoop, hol: &MatrixForm) -> Result<MatrixForm> {
    let n = lp.n();
    match lp.subbundle(0) {
        None => Ok(hol.clone()),
        Some(p0) => {
            // I + (hol − I)P_0 is unitary only up to the transport drift.
            let eye = eye_form(&lp.base, n)?;
            Ok(eye.add(&hol.sub(&eye)?.wedge(p0)?)?.map_blocks(n, |_, b| linalg::polar_unitary(b, n)))
        }
    }
}

pub fn holonomy_map(path: &PathField<ProjectionField>, opts: TransportOptions) -> Result<UnitaryField> {
    let lp = ConnectionLoop::from_projections(path)?;
    let res = parallel_transport(path, opts)?;
    UnitaryField::new(lp.window, embed_holonomy(&lp, &res.hol.values)?)
}

/// A = t·g⁻¹dg on M × [0, 1] with the clutching unitary g recorded.
pub fn mapping_torus_connection(g: &UnitaryField, nt: usize) -> Result<ConnectionField> {
    let base = g.grid();
    if base.axis_index(TIME_AXIS).is_ok() {
        return Err(Error::InvalidInput(format!("base already has an axis named {TIME_AXIS}")));
    }
    let grid = base.with_axis(Axis::interval(TIME_AXIS, nt, 1.0))?;
    let t_ax = grid.dim() - 1;
    let n = g.n();
    let nn = n * n;
    let omega = chern::maurer_cartan(g)?;
    let mut comps = Vec::with_capacity(grid.dim());
    for comp in omega.components() {
        let slices: Vec<Vec<C64>> = (0..nt)
            .map(|k| {
                let t = grid.axis(t_ax).coord(k);
                comp.iter().map(|x| x * t).collect()
            })
            .collect();
        comps.push(grid.stack(&slices, nn, t_ax));
    }
    comps.push(vec![ZERO; grid.nsites() * nn]);
    let form = MatrixForm::from_components(&grid, 1, n, comps)?;
    Ok(ConnectionField { form, subbundle: None, gluing: Some(g.clone()) })
}

/// ∫_{S¹} Ch over the glued time axis of a mapping-torus connection.
pub fn mapping_torus_chern(conn: &ConnectionField, max_deg: Option<usize>) -> Result<MixedForm> {
    chern::connection_chern(conn, max_deg)?.fiber_integrate(TIME_AXIS)
}

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(m);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x.push(0.5 * (1.0 - z));
        w.push(1.0 / ((1.0 - z * z) * dp * dp));
    }
    (x, w)
}

fn compress(p: Option<&MatrixForm>, a: &MatrixForm) -> Result<MatrixForm> {
    match p {
        Some(p) => p.wedge(a)?.wedge(p),
        None => Ok(a.clone()),
    }
}

/// Coefficient of dr∧dt in Tr exp(F/2πi) for F = X + dr∧α + dt∧β:
/// −Σ_n 1/((n−1)!(2πi)^n) Σ_{j+k=n−2} Tr X^j α X^k β, up to degree `top`.
fn square_density(
    x: &MatrixForm,
    alpha: &MatrixForm,
    beta: &MatrixForm,
    p: Option<&MatrixForm>,
    top: usize,
) -> Result<MixedForm> {
    let (x, alpha, beta) = (compress(p, x)?, compress(p, alpha)?, compress(p, beta)?);
    let base = x.grid();
    let mut out = MixedForm::new(base, 1);
    let nmax = top / 2 + 1;
    let mut xp: Vec<MatrixForm> = Vec::new();
    for n in 2..=nmax {
        while xp.len() < n - 2 {
            let next = match xp.last() {
                None => x.clone(),
                Some(l) => l.wedge(&x)?,
            };
            xp.push(next);
        }
        let coef = -chern::even_coefficient(n) * n as f64;
        for j in 0..=n - 2 {
            let k = n - 2 - j;
            let mut term = if j == 0 { alpha.clone() } else { xp[j - 1].wedge(&alpha)? };
            if k > 0 {
                term = term.wedge(&xp[k - 1])?;
            }
            out.insert(term.wedge(&beta)?.trace().scale(coef))?;
        }
    }
    Ok(out)
}

/// The two double integrals of the η form and the holonomy they close up.
#[derive(Clone, Debug)]
pub struct EtaResult {
    pub eta: MixedForm,
    /// ∬ Ch((1−r)∇₀ + r·g_t^*∇_t) over (r, t).
    pub square1: MixedForm,
    /// ∬ Ch((1−r)t∇₀' + r(h_*)^*(t∇₀')) over (r, t), ∇₀' = ∇₀ ⊕ ∇₀^⊥.
    pub square2: MixedForm,
    pub holonomy: UnitaryField,
    /// h_*⁻¹dh_* assembled from the carried W rather than a stencil of h_*.
    pub holonomy_mc: MatrixForm,
    pub fiber_drift: f64,
}

#[derive(Clone, Copy, Debug)]
#[derive(Default)]
pub struct EtaOptions {
    pub transport: TransportOptions,
    /// Top degree on the base; the base dimension by default.
    pub max_deg: Option<usize>,
}


fn top_degree(base: &Grid, max_deg: Option<usize>) -> usize {
    max_deg.unwrap_or(base.dim()).min(base.dim())
}

fn eye_form(base: &Grid, n: usize) -> Result<MatrixForm> {
    MatrixForm::from_blocks(base, n, (0..base.nsites()).flat_map(|_| linalg::eye(n)).collect())
}

/// G = h_* and its Maurer–Cartan form from the carried W, with no stencil
/// of the transported frame.
fn holonomy_and_mc(lp: &ConnectionLoop, frames: &Frames) -> Result<(MatrixForm, MatrixForm)> {
    let nt = lp.nt();
    let n = lp.n();
    let (gl, wl) = (&frames.g[nt], &frames.w[nt]);
    let big_g = embed_holonomy(lp, gl)?;
    let dgl = gl.wedge(wl)?;
    let d_big_g = match lp.subbundle(0) {
        None => dgl,
        Some(p0) => dgl.wedge(p0)?.add(&gl.sub(&eye_form(&lp.base, n)?)?.wedge(&p0.d())?)?,
    };
    let ginv = big_g.map_blocks(n, |_, b| linalg::adjoint(b, n));
    Ok((big_g, ginv.wedge(&d_big_g)?))
}

fn eta_from_frames(lp: &ConnectionLoop, frames: &Frames, top: usize) -> Result<EtaResult> {
    let base = &lp.base;
    let n = lp.n();
    let nt = lp.nt();
    let nq = top / 2 + 2;
    let (rq, rw) = gauss_legendre(nq);
    let node0 = lp.node(0)?;
    let a0 = node0.a_m.clone();
    let da0 = a0.d();
    let p0 = node0.p.clone();
    let h = lp.length / nt as f64;

    // The integrand is smooth on [0, L] but not periodic (g_L ≠ g_0), so the
    // closing node enters with the trapezoid end weights.
    let mut sq1 = MixedForm::new(base, 1);
    for k in 0..=nt {
        let node = lp.node(k % nt)?;
        let wt = if k == 0 || k == nt { 0.5 * h } else { h };
        let g = &frames.g[k];
        let ginv = g.map_blocks(n, |_, b| linalg::adjoint(b, n));
        let b = ginv.wedge(&node.a_m)?.wedge(g)?.add(&frames.w[k])?;
        let dvec = b.sub(&a0)?;
        let ddvec = dvec.d();
        let e = node.da_m.sub(&node.a_t.d())?.add(&commutator(&node.a_t, &node.a_m)?)?;
        let beta1 = ginv.wedge(&e)?.wedge(g)?;
        for (&r, &wr) in rq.iter().zip(&rw) {
            let cf = a0.lincomb(ONE, &dvec, c(r))?;
            let x = da0.lincomb(ONE, &ddvec, c(r))?.add(&cf.wedge(&cf)?)?;
            let s = square_density(&x, &dvec, &beta1.scale(c(r)), p0.as_ref(), top)?;
            sq1 = sq1.lincomb(1.0, &s, wr * wt)?;
        }
    }

    let (big_g, omega_g) = holonomy_and_mc(lp, frames)?;
    let ginv = big_g.map_blocks(n, |_, b| linalg::adjoint(b, n));
    let delta = ginv.wedge(&a0)?.wedge(&big_g)?.sub(&a0)?;
    let mut sq2 = MixedForm::new(base, 1);
    for (&t, &wt) in rq.iter().zip(&rw) {
        let e_t = delta.lincomb(c(t), &omega_g, ONE)?;
        for (&r, &wr) in rq.iter().zip(&rw) {
            let cf = a0.lincomb(c(t), &e_t, c(r))?;
            let x = cf.d().add(&cf.wedge(&cf)?)?;
            let beta = a0.lincomb(ONE, &delta, c(r))?;
            let s = square_density(&x, &e_t, &beta, None, top)?;
            sq2 = sq2.lincomb(1.0, &s, wt * wr)?;
        }
    }
    let eta = sq2.sub(&sq1)?;
    let res = transport_result(lp, frames)?;
    Ok(EtaResult {
        eta,
        square1: sq1,
        square2: sq2,
        holonomy: UnitaryField::new(lp.window, big_g)?,
        holonomy_mc: omega_g,
        fiber_drift: res.fiber_drift,
    })
}

pub fn eta_loop(lp: &ConnectionLoop, opts: EtaOptions) -> Result<EtaResult> {
    let frames = transport_frames(lp, opts.transport)?;
    let out = eta_from_frames(lp, &frames, top_degree(&lp.base, opts.max_deg))?;
    if out.fiber_drift > DRIFT_LIMIT {
        return Err(Error::Drift(out.fiber_drift));
    }
    Ok(out)
}

/// η of a loop of projections.
pub fn eta_form(path: &PathField<ProjectionField>, opts: EtaOptions) -> Result<EtaResult> {
    eta_loop(&ConnectionLoop::from_projections(path)?, opts)
}

/// ∫_{S¹} Ch of the loop: P(dP)^{2n} with spectral Ṗ for projection loops,
/// Σ_n Tr(E F_M^{n−1})/((n−1)!(2πi)^n) for connection loops, where
/// F = F_M + dt∧E.
pub fn loop_chern(lp: &ConnectionLoop, max_deg: Option<usize>) -> Result<MixedForm> {
    let base = &lp.base;
    let top = top_degree(base, max_deg);
    let nt = lp.nt();
    let h = lp.length / nt as f64;
    match &lp.kind {
        LoopKind::Projection { p, pd } => {
            let slices = TimeSlices {
                base: base.clone(),
                values: p.clone(),
                derivs: pd.clone(),
                weights: vec![h; nt],
                spatial: None,
            };
            chern::fiber_even_chern(&slices, Some(top + 1))
        }
        LoopKind::Connection { .. } => {
            let mut out = MixedForm::new(base, 1);
            for k in 0..nt {
                let node = lp.node(k)?;
                let fm = node.a_m.d().add(&node.a_m.wedge(&node.a_m)?)?;
                let e = node.da_m.sub(&node.a_t.d())?.add(&commutator(&node.a_t, &node.a_m)?)?;
                let (e, fm) = (compress(node.p.as_ref(), &e)?, compress(node.p.as_ref(), &fm)?);
                let mut term = e.clone();
                let mut nn = 1;
                while term.degree() <= top {
                    let coef = chern::even_coefficient(nn) * nn as f64;
                    out.insert(term.trace().scale(coef * h))?;
                    if term.degree() + 2 > top {
                        break;
                    }
                    term = term.wedge(&fm)?;
                    nn += 1;
                }
            }
            Ok(out)
        }
    }
}

/// Both sides of dη = ∫_{S¹}Ch − Ch(h_*) and their largest gap.
#[derive(Clone, Debug)]
pub struct DetaReport {
    pub residual: f64,
    pub d_eta: MixedForm,
    pub loop_chern: MixedForm,
    /// Ch(h_*) from the transported Maurer–Cartan form.
    pub holonomy_chern: MixedForm,
    /// The same residual with Ch(h_*) from a stencil of h_*. Steep phases of
    /// h_* are damped by the stencil, so this one is only informational.
    pub stencil_residual: f64,
    pub eta: EtaResult,
}

pub fn deta_loop(lp: &ConnectionLoop, opts: EtaOptions) -> Result<DetaReport> {
    let eta = eta_loop(lp, opts)?;
    let top = top_degree(&lp.base, opts.max_deg);
    let d_eta = eta.eta.d();
    let lc = loop_chern(lp, Some(top))?;
    let hc = chern::odd_chern_from_mc(&eta.holonomy_mc, Some(top))?;
    let gap = d_eta.sub(&lc.sub(&hc)?)?;
    let stencil = d_eta.sub(&lc.sub(&chern::odd_chern(&eta.holonomy, Some(top))?)?)?;
    Ok(DetaReport {
        residual: gap.norm_inf(),
        d_eta,
        loop_chern: lc,
        holonomy_chern: hc,
        stencil_residual: stencil.norm_inf(),
        eta,
    })
}

/// ‖dη − ∫_{S¹}Ch(P_t) + Ch(h_*(P_t))‖_∞.
pub fn deta_residual(path: &PathField<ProjectionField>, opts: EtaOptions) -> Result<DetaReport> {
    deta_loop(&ConnectionLoop::from_projections(path)?, opts)
}

/// The η of the reversed loop against −η, and its holonomy against h_*⁻¹.
#[derive(Clone, Debug, Serialize)]
pub struct ReversalReport {
    pub eta_gap: f64,
    pub holonomy_gap: f64,
    pub eta_norm: f64,
}

pub fn reversal_loop(lp: &ConnectionLoop, opts: EtaOptions) -> Result<ReversalReport> {
    let fwd = eta_loop(lp, opts)?;
    let bwd = eta_loop(&lp.reversed(), opts)?;
    let eta_gap = fwd.eta.add(&bwd.eta)?.norm_inf();
    let holonomy_gap = bwd.holonomy.values.sub(&fwd.holonomy.inverse().values)?.norm_inf();
    Ok(ReversalReport { eta_gap, holonomy_gap, eta_norm: fwd.eta.norm_inf() })
}

pub fn reversal_check(path: &PathField<ProjectionField>, opts: EtaOptions) -> Result<ReversalReport> {
    reversal_loop(&ConnectionLoop::from_projections(path)?, opts)
}

/// P_t = P for all t on a periodic axis of `nt` samples.
pub fn constant_loop(p: &ProjectionField, nt: usize, length: f64) -> Result<PathField<ProjectionField>> {
    let base = p.grid();
    let grid = base.with_axis(Axis::periodic(TIME_AXIS, nt, length))?;
    let n = p.n();
    let data = &p.values.components()[0];
    let slices = vec![data.clone(); nt];
    let values = MatrixForm::from_blocks(&grid, n, grid.stack(&slices, n * n, grid.dim() - 1))?;
    PathField::new(ProjectionField::new(p.window, values)?, TIME_AXIS)
}

/// η by building both squares as connections on M × I_r × I_t and taking
/// the generic Chern character and two fiber integrals. Memory grows with
/// the product grid; meant for small cross-checks of the streamed route.
pub fn eta_reference(lp: &ConnectionLoop, opts: EtaOptions, nr: usize, nt2: usize) -> Result<(MixedForm, MixedForm)> {
    let frames = transport_frames(lp, opts.transport)?;
    let base = &lp.base;
    let top = top_degree(base, opts.max_deg);
    let n = lp.n();
    let nn = n * n;
    let nt = lp.nt();
    let node0 = lp.node(0)?;
    let a0 = node0.a_m.clone();

    // Square 1 on base × r × t with t the loop time.
    let grid1 =
        base.with_axis(Axis::interval(R_AXIS, nr, 1.0))?.with_axis(Axis::interval(TIME_AXIS, nt + 1, lp.length))?;
    let mut dvecs = Vec::with_capacity(nt + 1);
    for k in 0..=nt {
        let node = lp.node(k % nt)?;
        let g = &frames.g[k];
        let ginv = g.map_blocks(n, |_, b| linalg::adjoint(b, n));
        dvecs.push(ginv.wedge(&node.a_m)?.wedge(g)?.add(&frames.w[k])?.sub(&a0)?);
    }
    let r_coord = |i: usize| i as f64 / (nr - 1) as f64;
    let mut comps = Vec::new();
    for cmp in 0..base.dim() {
        let mut data = Vec::with_capacity(grid1.nsites() * nn);
        for s in 0..base.nsites() {
            let a = a0.block(cmp, s);
            for ir in 0..nr {
                for d in &dvecs {
                    let b = d.block(cmp, s);
                    data.extend(a.iter().zip(b).map(|(x, y)| x + y * r_coord(ir)));
                }
            }
        }
        comps.push(data);
    }
    comps.push(vec![ZERO; grid1.nsites() * nn]);
    comps.push(vec![ZERO; grid1.nsites() * nn]);
    let form1 = MatrixForm::from_components(&grid1, 1, n, comps)?;
    let sub1 = match &node0.p {
        Some(p) => {
            let mut data = Vec::with_capacity(grid1.nsites() * nn);
            for s in 0..base.nsites() {
                for _ in 0..nr * (nt + 1) {
                    data.extend_from_slice(p.block(0, s));
                }
            }
            Some(ProjectionField::new(lp.window, MatrixForm::from_blocks(&grid1, n, data)?)?)
        }
        None => None,
    };
    let conn1 = ConnectionField { form: form1, subbundle: sub1, gluing: None };
    let sq1 = chern::connection_chern(&conn1, Some(top + 2))?.fiber_integrate(R_AXIS)?.fiber_integrate(TIME_AXIS)?;

    // Square 2 on base × r × t with t ∈ [0, 1] the scaling parameter.
    let grid2 = base.with_axis(Axis::interval(R_AXIS, nr, 1.0))?.with_axis(Axis::interval(TIME_AXIS, nt2, 1.0))?;
    let (big_g, omega_g) = holonomy_and_mc(lp, &frames)?;
    let ginv = big_g.map_blocks(n, |_, b| linalg::adjoint(b, n));
    let delta = ginv.wedge(&a0)?.wedge(&big_g)?.sub(&a0)?;
    let t_coord = |i: usize| i as f64 / (nt2 - 1) as f64;
    let mut comps = Vec::new();
    for cmp in 0..base.dim() {
        let mut data = Vec::with_capacity(grid2.nsites() * nn);
        for s in 0..base.nsites() {
            let (a, dl, om) = (a0.block(cmp, s), delta.block(cmp, s), omega_g.block(cmp, s));
            for ir in 0..nr {
                let r = r_coord(ir);
                for it in 0..nt2 {
                    let t = t_coord(it);
                    data.extend((0..nn).map(|e| a[e] * t + (dl[e] * t + om[e]) * r));
                }
            }
        }
        comps.push(data);
    }
    comps.push(vec![ZERO; grid2.nsites() * nn]);
    comps.push(vec![ZERO; grid2.nsites() * nn]);
    let conn2 =
        ConnectionField { form: MatrixForm::from_components(&grid2, 1, n, comps)?, subbundle: None, gluing: None };
    let sq2 = chern::connection_chern(&conn2, Some(top + 2))?.fiber_integrate(R_AXIS)?.fiber_integrate(TIME_AXIS)?;
    Ok((sq1, sq2))
}

/// Streamed squares of the same loop, for comparison with [`eta_reference`].
pub fn eta_squares(lp: &ConnectionLoop, opts: EtaOptions) -> Result<(MixedForm, MixedForm)> {
    let frames = transport_frames(lp, opts.transport)?;
    let r = eta_from_frames(lp, &frames, top_degree(&lp.base, opts.max_deg))?;
    Ok((r.square1, r.square2))
}

/// The abelian example loop A = i(f(p)dq + g(s)dt) on T³ × S¹.
pub fn paper_example_loop(size: usize) -> Result<ConnectionLoop> {
    let grid = crate::fields::example_grid(size)?;
    ConnectionLoop::from_connection(&crate::fields::paper_example_connection(&grid)?, TIME_AXIS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields;

    pub(super) fn t3_loop(size: usize, nt: usize, seed: u64) -> ConnectionLoop {
        let g = Grid::new(vec![
            Axis::periodic("x", size, 1.0),
            Axis::periodic("y", size, 1.0),
            Axis::periodic("z", size, 1.0),
            Axis::periodic(TIME_AXIS, nt, 1.0),
        ])
        .unwrap();
        let p = fields::random_projection(&g, Window::new(0, 3).unwrap(), seed, 1, 1).unwrap();
        ConnectionLoop::from_projections(&PathField::new(p, TIME_AXIS).unwrap()).unwrap()
    }

    fn t2_projection(size: usize, seed: u64) -> ProjectionField {
        let g = Grid::torus(&["x", "y"], size, 1.0).unwrap();
        fields::random_projection(&g, Window::new(-1, 2).unwrap(), seed, 1, 1).unwrap()
    }

    #[test]
    fn constant_loop_has_no_eta_and_trivial_holonomy() {
        let p = t2_projection(8, 1);
        let path = constant_loop(&p, 8, 1.0).unwrap();
        let e = eta_form(&path, EtaOptions::default()).unwrap();
        assert_eq!(e.eta.norm_inf(), 0.0);
        assert_eq!(e.holonomy, UnitaryField::identity(p.grid(), p.window));
    }

    #[test]
    fn bott_degree_zero_is_the_rank() {
        for (seed, w) in [(2, Window::new(-2, 2).unwrap()), (3, Window::new(0, 3).unwrap())] {
            let g = Grid::torus(&["x", "y"], 4, 1.0).unwrap();
            let p = fields::random_projection(&g, w, seed, 1, 1).unwrap();
            let path = bott_map(&p, 2049).unwrap();
            let cs0 = chern::odd_cs_streamed(&path).unwrap().part_or_zero(0);
            let rank = p.rank().unwrap() as f64;
            for s in 0..g.nsites() {
                let v = cs0.block(0, s)[0];
                // Stencil error (2πδ)²/6 per unit of rank.
                assert!((v.re - rank).abs() < 2e-5 * rank.max(1.0), "{v} vs {rank}");
                assert!(v.im.abs() < 1e-12);
                assert!((det_winding(&path, s).unwrap() - rank).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn example_holonomy_is_the_abelian_phase() {
        let lp = paper_example_loop(8).unwrap();
        let res = transport_result(&lp, &transport_frames(&lp, TransportOptions { substeps: 32 }).unwrap()).unwrap();
        for s in 0..lp.base.nsites() {
            let x = lp.base.point(s);
            let want = C64::from_polar(1.0, -2.0 * PI * x[2].sin());
            // RK4 phase error: 256 steps of θ⁵/120 with θ ≤ π/128.
            assert!((res.hol.block(s)[0] - want).norm() < 1e-7, "{} {}", res.hol.block(s)[0], want);
        }
    }

    #[test]
    fn streamed_squares_match_the_reference_route() {
        let opts = EtaOptions::default();
        // Square 2 is polynomial in (r, t) and both routes are exact; square 1
        // differs by the reference route's t-stencil, O(h_t²).
        let mut gaps = Vec::new();
        for nt in [6, 12] {
            let lp = t3_loop(4, nt, 5);
            let (s1, s2) = eta_squares(&lp, opts).unwrap();
            let (r1, r2) = eta_reference(&lp, opts, 5, 5).unwrap();
            assert!(s1.norm_inf() > 1e-4 && s2.norm_inf() > 1e-4);
            let gap2 = s2.sub(&r2).unwrap().norm_inf();
            assert!(gap2 < 1e-12, "{gap2}");
            gaps.push(s1.sub(&r1).unwrap().norm_inf());
        }
        assert!(gaps[0] < 1e-4 && gaps[0] / gaps[1] > 3.5, "{gaps:?}");
    }

    fn means(m: &MatrixForm) -> Vec<C64> {
        m.components().iter().map(|c| c.iter().sum::<C64>() / c.len() as f64).collect()
    }

    #[test]
    fn reversal_negates_eta_up_to_an_exact_form() {
        // The reversed loop's first square interpolates to a gauge transform
        // of the forward one, so η + η̄ is exact rather than zero: its periods
        // (component means on the torus) vanish as the grid refines.
        let opts = EtaOptions { transport: TransportOptions { substeps: 8 }, max_deg: None };
        let lp = t3_loop(16, 16, 7);
        let fwd = eta_loop(&lp, opts).unwrap();
        let bwd = eta_loop(&lp.reversed(), opts).unwrap();
        let gap = fwd.eta.add(&bwd.eta).unwrap().part_or_zero(2);
        let big = |v: Vec<C64>| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let (pg, pe) = (big(means(&gap)), big(means(&fwd.eta.part_or_zero(2))));
        assert!(pe > 1e-6 && pg < 1e-2 * pe, "{pg} {pe}");
        let hol = bwd.holonomy.values.sub(&fwd.holonomy.inverse().values).unwrap().norm_inf();
        assert!(hol < 1e-8, "{hol}");
    }

    #[test]
    fn example_loop_reverses_exactly() {
        let r = reversal_loop(&paper_example_loop(8).unwrap(), EtaOptions::default()).unwrap();
        assert!(r.eta_gap < 1e-12 && r.holonomy_gap < 1e-6, "{r:?}");
    }

    #[test]
    fn eta_is_additive_under_block_sums() {
        let g = Grid::new(vec![
            Axis::periodic("x", 4, 1.0),
            Axis::periodic("y", 4, 1.0),
            Axis::periodic("z", 4, 1.0),
            Axis::periodic(TIME_AXIS, 16, 1.0),
        ])
        .unwrap();
        let w = Window::new(0, 2).unwrap();
        let a = PathField::new(fields::random_projection(&g, w, 11, 1, 1).unwrap(), TIME_AXIS).unwrap();
        let b = PathField::new(fields::random_projection(&g, w, 12, 1, 1).unwrap(), TIME_AXIS).unwrap();
        let ab = crate::stable_ops::path_sum(&a, &b, crate::stable_ops::oplus).unwrap();
        let opts = EtaOptions::default();
        let (ea, eb, eab) = (eta_form(&a, opts).unwrap(), eta_form(&b, opts).unwrap(), eta_form(&ab, opts).unwrap());
        assert!(ea.eta.norm_inf() > 1e-5);
        let gap = eab.eta.sub(&ea.eta.add(&eb.eta).unwrap()).unwrap().norm_inf();
        assert!(gap < 1e-12, "{gap}");
    }

    #[test]
    fn deta_residual_shrinks_at_second_order() {
        let opts = EtaOptions::default();
        let r8 = deta_loop(&t3_loop(8, 16, 0), opts).unwrap().residual;
        let r16 = deta_loop(&t3_loop(16, 16, 0), opts).unwrap().residual;
        assert!(r8 / r16 > 3.0, "{r8} {r16}");
    }

    #[test]
    fn mapping_torus_recovers_the_degree_one_chern_form() {
        let g = Grid::torus(&["x"], 64, 1.0).unwrap();
        let u = fields::winding_unitary(&g, "x", &[2], Window::new(0, 1).unwrap()).unwrap();
        let conn = mapping_torus_connection(&u, 5).unwrap();
        let lhs = mapping_torus_chern(&conn, None).unwrap().part_or_zero(1);
        let rhs = chern::odd_chern(&u, None).unwrap().part_or_zero(1);
        assert!(rhs.norm_inf() > 0.1);
        assert!(lhs.sub(&rhs).unwrap().norm_inf() < 1e-12, "{}", lhs.sub(&rhs).unwrap().norm_inf());
    }

    #[test]
    fn fast_loops_on_few_samples_report_drift() {
        let g = Grid::new(vec![Axis::periodic("x", 4, 1.0), Axis::periodic(TIME_AXIS, 4, 1.0)]).unwrap();
        let p = fields::random_projection(&g, Window::new(0, 3).unwrap(), 4, 3, 1).unwrap();
        let path = PathField::new(p, TIME_AXIS).unwrap();
        match parallel_transport(&path, TransportOptions { substeps: 1 }) {
            Err(Error::Drift(d)) => assert!(d > DRIFT_LIMIT),
            other => panic!("expected drift, got {:?}", other.map(|r| r.fiber_drift)),
        }
    }
}
