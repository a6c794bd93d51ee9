//! Stabilized sums, shifts and orthocomplements of windowed fields, and the
//! rotation homotopies whose Chern–Simons forms vanish.
//!
//! Homotopies are sampled on an interval time axis `t` ∈ [0, 1]; the
//! rotation angle is πt/2.

use crate::chern;
use crate::error::{Error, Result};
use crate::fields::{PathField, ProjectionField, UnitaryField, Window};
use crate::form::{MatrixForm, MixedForm};
use crate::grid::{Axis, Grid};
use crate::linalg::{self, C64, ONE, ZERO};
use std::f64::consts::FRAC_PI_2;

/// Name of the time axis added by the homotopy constructors.
pub const TIME_AXIS: &str = "t";

/// Fields carrying a window, with their padding convention outside it.
pub trait Windowed: Sized + Clone {
    fn window(&self) -> Window;
    fn values(&self) -> &MatrixForm;
    fn rebuild(window: Window, values: MatrixForm) -> Result<Self>;
    /// Diagonal value above the window: 1 for unitaries, 0 for projections.
    fn above() -> C64;
}

impl Windowed for UnitaryField {
    fn window(&self) -> Window {
        self.window
    }
    fn values(&self) -> &MatrixForm {
        &self.values
    }
    fn rebuild(window: Window, values: MatrixForm) -> Result<Self> {
        UnitaryField::new(window, values)
    }
    fn above() -> C64 {
        ONE
    }
}

impl Windowed for ProjectionField {
    fn window(&self) -> Window {
        self.window
    }
    fn values(&self) -> &MatrixForm {
        &self.values
    }
    fn rebuild(window: Window, values: MatrixForm) -> Result<Self> {
        ProjectionField::new(window, values)
    }
    fn above() -> C64 {
        ZERO
    }
}

/// Re-expresses a field on a larger window: identity below the old window,
/// the padding convention above it.
pub fn extend_window<F: Windowed>(f: &F, to: Window) -> Result<F> {
    let w = f.window();
    if to.p > w.p || to.q < w.q {
        return Err(Error::InvalidInput(format!("window ({}, {}) does not contain ({}, {})", to.p, to.q, w.p, w.q)));
    }
    let n = w.dim();
    let m = to.dim();
    let off = (w.p - to.p) as usize;
    let values = f.values().map_blocks(m, |_, b| {
        let mut out = vec![ZERO; m * m];
        for a in 0..m {
            if a < off {
                out[a * m + a] = ONE;
            } else if a >= off + n {
                out[a * m + a] = F::above();
            }
        }
        for i in 0..n {
            for j in 0..n {
                out[(off + i) * m + off + j] = b[i * n + j];
            }
        }
        out
    });
    F::rebuild(to, values)
}

/// Both fields extended to the window (min p, max q).
pub fn equalize<F: Windowed>(a: &F, b: &F) -> Result<(F, F)> {
    let (wa, wb) = (a.window(), b.window());
    let w = Window::new(wa.p.min(wb.p), wa.q.max(wb.q))?;
    Ok((extend_window(a, w)?, extend_window(b, w)?))
}

/// s_k: window (p + k, q + k), data unchanged.
pub fn shift<F: Windowed>(f: &F, k: i64) -> Result<F> {
    let w = f.window();
    F::rebuild(Window::new(w.p + k, w.q + k)?, f.values().clone())
}

fn check_grids(a: &MatrixForm, b: &MatrixForm) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch("sum of fields on different grids".into()));
    }
    Ok(())
}

/// Per-site block sum with an index placement: entry (i, j) of the first
/// block goes to (pa[i], pa[j]), of the second to (pb[i], pb[j]).
fn place(a: &MatrixForm, b: &MatrixForm, pa: &[usize], pb: &[usize]) -> Result<MatrixForm> {
    check_grids(a, b)?;
    let (na, nb) = (a.matdim(), b.matdim());
    let m = na + nb;
    let bd = &b.components()[0];
    Ok(a.map_blocks(m, |s, ab| {
        let bb = &bd[s * nb * nb..(s + 1) * nb * nb];
        let mut out = vec![ZERO; m * m];
        for i in 0..na {
            for j in 0..na {
                out[pa[i] * m + pa[j]] = ab[i * na + j];
            }
        }
        for i in 0..nb {
            for j in 0..nb {
                out[pb[i] * m + pb[j]] = bb[i * nb + j];
            }
        }
        out
    }))
}

/// Block sum: window (p₁ + p₂, q₁ + q₂) with the active blocks stacked.
pub fn oplus<F: Windowed>(a: &F, b: &F) -> Result<F> {
    let (wa, wb) = (a.window(), b.window());
    let (na, nb) = (wa.dim(), wb.dim());
    let pa: Vec<usize> = (0..na).collect();
    let pb: Vec<usize> = (na..na + nb).collect();
    let values = place(a.values(), b.values(), &pa, &pb)?;
    F::rebuild(Window::new(wa.p + wb.p, wa.q + wb.q)?, values)
}

/// Shuffle sum: after equalizing to (p, q), index 2k carries the first
/// field's index k and 2k + 1 the second's; window (2p, 2q).
pub fn boxplus<F: Windowed>(a: &F, b: &F) -> Result<F> {
    let (a, b) = equalize(a, b)?;
    let w = a.window();
    let n = w.dim();
    let pa: Vec<usize> = (0..n).map(|i| 2 * i).collect();
    let pb: Vec<usize> = (0..n).map(|i| 2 * i + 1).collect();
    let values = place(a.values(), b.values(), &pa, &pb)?;
    F::rebuild(Window::new(2 * w.p, 2 * w.q)?, values)
}

/// The relabeling σ with oplus(a, b)[i][j] = boxplus(a, b)[σ(i)][σ(j)] for
/// fields on a common window of size n.
pub fn oplus_to_boxplus_permutation(n: usize) -> Vec<usize> {
    (0..2 * n).map(|a| if a < n { 2 * a } else { 2 * (a - n) + 1 }).collect()
}

/// Adjacent transpositions (k, k+1), applied left to right, that sort σ
/// back to the identity; composing them in reverse rebuilds σ.
pub fn adjacent_transpositions(perm: &[usize]) -> Vec<usize> {
    let mut p = perm.to_vec();
    let mut swaps = Vec::new();
    loop {
        let mut done = true;
        for k in 0..p.len().saturating_sub(1) {
            if p[k] > p[k + 1] {
                p.swap(k, k + 1);
                swaps.push(k);
                done = false;
            }
        }
        if done {
            return swaps;
        }
    }
}

/// P^⊥: window (−q, −p) with active block 1 − A.
pub fn orthocomplement(p: &ProjectionField) -> Result<ProjectionField> {
    let w = p.window;
    let n = w.dim();
    let values = p.values.map_blocks(n, |_, b| linalg::sub(&linalg::eye(n), b));
    ProjectionField::new(Window::new(-w.q, -w.p)?, values)
}

/// Samples `f(base_site, τ)` on base × [0, 1] with `nt` time points.
fn build_path(base: &Grid, nt: usize, n: usize, f: impl Fn(usize, f64) -> Vec<C64>) -> Result<(Grid, MatrixForm)> {
    let grid = base.with_axis(Axis::interval(TIME_AXIS, nt, 1.0))?;
    let dt = grid.axis(grid.dim() - 1).spacing();
    let mut data = Vec::with_capacity(grid.nsites() * n * n);
    for s in 0..base.nsites() {
        for k in 0..nt {
            data.extend(f(s, k as f64 * dt));
        }
    }
    let values = MatrixForm::from_blocks(&grid, n, data)?;
    Ok((grid, values))
}

/// Block rotation [[c, s], [−s, c]] ⊗ 1_h at angle θ, size 2h.
fn rotation(h: usize, theta: f64) -> Vec<C64> {
    let (s, c) = theta.sin_cos();
    let m = 2 * h;
    let mut x = vec![ZERO; m * m];
    for i in 0..h {
        x[i * m + i] = C64::new(c, 0.0);
        x[(h + i) * m + h + i] = C64::new(c, 0.0);
        x[i * m + h + i] = C64::new(s, 0.0);
        x[(h + i) * m + i] = C64::new(-s, 0.0);
    }
    x
}

fn conj_by(x: &[C64], a: &[C64], n: usize) -> Vec<C64> {
    linalg::matmul3(x, a, &linalg::adjoint(x, n), n)
}

/// Γ from P ⊕ Q to Q ⊕ P: S_t = X(t)(P ⊕ Q)X(t)⁻¹ after equalizing windows.
pub fn commute_homotopy(p: &ProjectionField, q: &ProjectionField, nt: usize) -> Result<PathField<ProjectionField>> {
    let (p, q) = equalize(p, q)?;
    let f = oplus(&p, &q)?;
    let h = p.window.dim();
    let m = 2 * h;
    let (_, values) = build_path(f.grid(), nt, m, |s, t| conj_by(&rotation(h, FRAC_PI_2 * t), f.block(s), m))?;
    PathField::new(ProjectionField::new(f.window, values)?, TIME_AXIS)
}

/// Γ from P ⊕ P^⊥ to I₀: S_t = X(t) G X(t)⁻¹ H with G = A ⊕ 1, H = 1 ⊕ (1 − A).
pub fn annihilate_homotopy(p: &ProjectionField, nt: usize) -> Result<PathField<ProjectionField>> {
    let perp = orthocomplement(p)?;
    let f = oplus(p, &perp)?;
    let h = p.window.dim();
    let m = 2 * h;
    let (_, values) = build_path(p.grid(), nt, m, |s, t| {
        let a = p.block(s);
        let mut g = linalg::eye(m);
        let mut hh = linalg::eye(m);
        for i in 0..h {
            for j in 0..h {
                g[i * m + j] = a[i * h + j];
                let id = if i == j { ONE } else { ZERO };
                hh[(h + i) * m + h + j] = id - a[i * h + j];
            }
        }
        let x = rotation(h, FRAC_PI_2 * t);
        linalg::matmul(&conj_by(&x, &g, m), &hh, m)
    })?;
    PathField::new(ProjectionField::new(f.window, values)?, TIME_AXIS)
}

/// Γ_t = X(t) P X(t)⁻¹ with X the real rotation in the plane of the global
/// basis vectors e_k, e_{k+1}. The endpoint is the signed swap τDPDτ with
/// D = diag(…, 1, −1, …); it equals the plain swap when P has no entries
/// coupling e_k or e_{k+1} to the rest with a sign-sensitive phase.
pub fn transposition_homotopy(p: &ProjectionField, k: i64, nt: usize) -> Result<PathField<ProjectionField>> {
    let w = p.window;
    if k < w.p || k + 1 >= w.q {
        return Err(Error::InvalidInput(format!("transposition ({k}, {}) outside window ({}, {})", k + 1, w.p, w.q)));
    }
    let n = w.dim();
    let a = (k - w.p) as usize;
    let (_, values) = build_path(p.grid(), nt, n, |s, t| {
        let (sn, cs) = (FRAC_PI_2 * t).sin_cos();
        let mut x = linalg::eye(n);
        x[a * n + a] = C64::new(cs, 0.0);
        x[(a + 1) * n + a + 1] = C64::new(cs, 0.0);
        x[a * n + a + 1] = C64::new(sn, 0.0);
        x[(a + 1) * n + a] = C64::new(-sn, 0.0);
        conj_by(&x, p.block(s), n)
    })?;
    PathField::new(ProjectionField::new(w, values)?, TIME_AXIS)
}

/// Exact-form oracle for the transposition homotopy: its even CS is
/// −(π/2)/(2πi) · d Tr(J P) with J = e_k e_{k+1}ᵀ − e_{k+1} e_kᵀ in degree 1,
/// and has no higher-degree part on 2-dimensional bases.
pub fn transposition_cs_oracle(p: &ProjectionField, k: i64) -> Result<MatrixForm> {
    let w = p.window;
    let n = w.dim();
    let a = (k - w.p) as usize;
    let tr = p.values.map_blocks(1, |_, b| vec![b[(a + 1) * n + a] - b[a * n + a + 1]]);
    let c = C64::new(-FRAC_PI_2, 0.0) / C64::new(0.0, 2.0 * std::f64::consts::PI);
    Ok(tr.d().scale(c))
}

/// γ_g(t) = G X(t) H X(t)⁻¹ from g ⊕ g⁻¹ to the identity, with
/// G = g ⊕ 1, H = 1 ⊕ g⁻¹, on window (2p, 2q).
pub fn gamma_g(g: &UnitaryField, nt: usize) -> Result<PathField<UnitaryField>> {
    let w = g.window;
    let h = w.dim();
    let m = 2 * h;
    let (_, values) = build_path(g.grid(), nt, m, |s, t| {
        let b = g.block(s);
        let binv = linalg::adjoint(b, h);
        let mut gg = linalg::eye(m);
        let mut hh = linalg::eye(m);
        for i in 0..h {
            for j in 0..h {
                gg[i * m + j] = b[i * h + j];
                hh[(h + i) * m + h + j] = binv[i * h + j];
            }
        }
        let x = rotation(h, FRAC_PI_2 * t);
        linalg::matmul(&gg, &conj_by(&x, &hh, m), m)
    })?;
    PathField::new(UnitaryField::new(Window::new(2 * w.p, 2 * w.q)?, values)?, TIME_AXIS)
}

/// CS(γ_g) with both derivatives of γ taken by the chain rule,
/// dγ = dG·X H X⁻¹ + G X dH X⁻¹ with d(g⁻¹) = −g⁻¹(dg)g⁻¹. The stencil of
/// sampled g⁻¹ obeys this identity only up to O(h²), which is what
/// separates this value from `chern::odd_cs` of the sampled path.
pub fn gamma_g_cs(g: &UnitaryField, nt: usize) -> Result<MixedForm> {
    let path = gamma_g(g, nt)?;
    let mut slices = chern::time_slices(&path.field.values, path.time_axis, chern::TimeDerivative::Stencil)?;
    let h = g.n();
    let m = 2 * h;
    let base = g.grid();
    let ginv = g.inverse().values;
    let dg = g.values.d();
    let dginv = ginv.wedge(&dg)?.wedge(&ginv)?.scale(-ONE);
    let dt = 1.0 / (nt - 1) as f64;
    let mut spatial = Vec::with_capacity(nt);
    let mut derivs = Vec::with_capacity(nt);
    for k in 0..nt {
        let theta = FRAC_PI_2 * k as f64 * dt;
        let x = rotation(h, theta);
        let xt = linalg::adjoint(&x, m);
        // d/dt of the rotation is (π/2) times the rotation a quarter turn on.
        let xd: Vec<C64> = rotation(h, theta + FRAC_PI_2).iter().map(|v| v * FRAC_PI_2).collect();
        let xdt = linalg::adjoint(&xd, m);
        let embed = |s: usize| {
            let (b, binv) = (g.block(s), ginv.block(0, s));
            let mut gg = linalg::eye(m);
            let mut hh = linalg::eye(m);
            for i in 0..h {
                for j in 0..h {
                    gg[i * m + j] = b[i * h + j];
                    hh[(h + i) * m + h + j] = binv[i * h + j];
                }
            }
            (gg, hh)
        };
        let mut dot = Vec::with_capacity(base.nsites() * m * m);
        for s in 0..base.nsites() {
            let (gg, hh) = embed(s);
            let a = linalg::matmul(&gg, &linalg::matmul3(&xd, &hh, &xt, m), m);
            let b = linalg::matmul(&gg, &linalg::matmul3(&x, &hh, &xdt, m), m);
            dot.extend(linalg::add(&a, &b));
        }
        derivs.push(MatrixForm::from_components(base, 0, m, vec![dot])?);
        let mut comps = Vec::with_capacity(dg.num_components());
        for c in 0..dg.num_components() {
            let mut data = Vec::with_capacity(base.nsites() * m * m);
            for s in 0..base.nsites() {
                let (gg, hh) = embed(s);
                let (db, dbinv) = (dg.block(c, s), dginv.block(c, s));
                let mut dgg = vec![ZERO; m * m];
                let mut dhh = vec![ZERO; m * m];
                for i in 0..h {
                    for j in 0..h {
                        dgg[i * m + j] = db[i * h + j];
                        dhh[(h + i) * m + h + j] = dbinv[i * h + j];
                    }
                }
                let xhx = linalg::matmul3(&x, &hh, &xt, m);
                let xdhx = linalg::matmul3(&x, &dhh, &xt, m);
                data.extend(linalg::add(&linalg::matmul(&dgg, &xhx, m), &linalg::matmul(&gg, &xdhx, m)));
            }
            comps.push(data);
        }
        spatial.push(MatrixForm::from_components(base, 1, m, comps)?);
    }
    slices.derivs = derivs;
    slices.spatial = Some(spatial);
    chern::fiber_odd_chern(&slices, None)
}

/// Pointwise block sum of two paths on the same grid.
pub fn path_sum<F: Windowed>(a: &PathField<F>, b: &PathField<F>, op: fn(&F, &F) -> Result<F>) -> Result<PathField<F>> {
    if a.time_axis != b.time_axis {
        return Err(Error::GridMismatch("paths with different time axes".into()));
    }
    Ok(PathField { field: op(&a.field, &b.field)?, time_axis: a.time_axis })
}

/// The path run backwards.
pub fn reverse<F: Windowed>(p: &PathField<F>) -> Result<PathField<F>> {
    let w = p.field.window();
    Ok(PathField { field: F::rebuild(w, p.field.values().reflect(p.time_axis))?, time_axis: p.time_axis })
}

/// Constant-in-time path with the given time axis shape.
fn constant_path(g: &UnitaryField, time: &Axis) -> Result<PathField<UnitaryField>> {
    let grid = g.grid().with_axis(time.clone())?;
    let n = g.n();
    let nt = time.size;
    let mut data = Vec::with_capacity(grid.nsites() * n * n);
    for s in 0..g.grid().nsites() {
        for _ in 0..nt {
            data.extend_from_slice(g.block(s));
        }
    }
    let t = grid.dim() - 1;
    Ok(PathField { field: UnitaryField::new(g.window, MatrixForm::from_blocks(&grid, n, data)?)?, time_axis: t })
}

/// A concatenation stored as separate segments with shared endpoint slices.
#[derive(Clone, Debug)]
pub struct SegmentedPath {
    pub segments: Vec<PathField<UnitaryField>>,
}

impl SegmentedPath {
    /// CS of the concatenation: the sum of the per-segment CS forms.
    pub fn odd_cs(&self) -> Result<MixedForm> {
        let mut total: Option<MixedForm> = None;
        for s in &self.segments {
            let cs = chern::odd_cs_streamed(s)?;
            total = Some(match total {
                None => cs,
                Some(t) => t.add(&cs)?,
            });
        }
        total.ok_or_else(|| Error::InvalidInput("empty concatenation".into()))
    }

    pub fn start(&self) -> Result<UnitaryField> {
        self.segments[0].start()
    }

    pub fn end(&self) -> Result<UnitaryField> {
        self.segments.last().unwrap().end()
    }

    /// Largest mismatch between consecutive segment endpoints.
    pub fn junction_gap(&self) -> Result<f64> {
        let mut gap: f64 = 0.0;
        for w in self.segments.windows(2) {
            let d = w[0].end()?.values.sub(&w[1].start()?.values)?.norm_inf();
            gap = gap.max(d);
        }
        Ok(gap)
    }
}

/// Based loop of a free loop g_t: the concatenation
/// reverse(γ_{g₀}), g_t ⊕ g₀⁻¹, γ_{g₀}, which starts and ends at the identity.
pub fn based_loop(g: &PathField<UnitaryField>, nt_gamma: usize) -> Result<SegmentedPath> {
    if !g.is_loop() {
        return Err(Error::InvalidInput("based_loop needs a loop".into()));
    }
    let g0 = g.start()?;
    let gamma = gamma_g(&g0, nt_gamma)?;
    let time = g.grid().axis(g.time_axis).clone();
    if g.time_axis != g.grid().dim() - 1 {
        return Err(Error::InvalidInput("based_loop expects the time axis last".into()));
    }
    let inv = constant_path(&g0.inverse(), &time)?;
    let mut middle = path_sum(g, &inv, oplus)?;
    // The time axis name of the middle segment follows the input loop.
    middle.time_axis = g.time_axis;
    Ok(SegmentedPath { segments: vec![reverse(&gamma)?, middle, gamma] })
}
