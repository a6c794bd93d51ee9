//! Chern forms of unitary, projection and connection fields, and the
//! Chern–Simons transgressions of paths.
//!
//! All outputs are scalar forms stored as complex values; on valid fields
//! the imaginary parts are roundoff. Fiber integrals over a time axis are
//! taken fiber-first, so d·CS = Ch(end) − Ch(start).

use crate::error::{Error, Result};
use crate::fields::{ConnectionField, PathField, ProjectionField, Sliced, UnitaryField};
use crate::form::{MatrixForm, MixedForm};
use crate::grid::Grid;
use crate::linalg::{self, C64, ONE, ZERO};
use std::f64::consts::PI;

fn two_pi_i() -> C64 {
    C64::new(0.0, 2.0 * PI)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Coefficient (−1)^n/(2πi)^{n+1} · n!/(2n+1)! of Tr ω^{2n+1}.
pub fn odd_coefficient(n: usize) -> C64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    two_pi_i().powi(-(n as i32 + 1)) * (sign * factorial(n) / factorial(2 * n + 1))
}

/// Coefficient 1/((2πi)^n n!) of Tr P(dP)^{2n} and of Tr F^n.
pub fn even_coefficient(n: usize) -> C64 {
    two_pi_i().powi(-(n as i32)) / factorial(n)
}

/// a, a∧a, … up to the largest power whose degree fits the grid; entry k
/// holds a^{k+1}.
fn powers(a: &MatrixForm, max_deg: usize) -> Result<Vec<MatrixForm>> {
    let mut out = vec![a.clone()];
    if a.degree() == 0 {
        return Err(Error::Degree("powers of a 0-form are not graded".into()));
    }
    while out.last().unwrap().degree() + a.degree() <= max_deg.min(a.grid().dim()) {
        let next = out.last().unwrap().wedge(a)?;
        out.push(next);
    }
    Ok(out)
}

fn max_degree(grid: &Grid, max_deg: Option<usize>) -> usize {
    max_deg.unwrap_or(grid.dim()).min(grid.dim())
}

fn constant_scalar(grid: &Grid, v: C64) -> MatrixForm {
    MatrixForm::scalar_from_fn(grid, 0, |_| vec![v])
}

/// ω = g⁻¹dg = g*dg on the active block.
pub fn maurer_cartan(g: &UnitaryField) -> Result<MatrixForm> {
    let res = g.unitarity_residual();
    if res > 1e-8 {
        return Err(Error::Invariant(format!("unitarity residual {res:.2e}")));
    }
    g.inverse().values.wedge(&g.values.d())
}

/// Odd Chern series of a Maurer–Cartan form, degrees 1, 3, … ≤ max_deg.
pub fn odd_chern_from_mc(omega: &MatrixForm, max_deg: Option<usize>) -> Result<MixedForm> {
    let grid = omega.grid();
    let top = max_degree(grid, max_deg);
    let mut out = MixedForm::new(grid, 1);
    for (k, pow) in powers(omega, top)?.iter().enumerate() {
        let deg = k + 1;
        if deg % 2 == 1 {
            out.insert(pow.trace().scale(odd_coefficient(deg / 2)))?;
        }
    }
    Ok(out)
}

pub fn odd_chern(g: &UnitaryField, max_deg: Option<usize>) -> Result<MixedForm> {
    odd_chern_from_mc(&maurer_cartan(g)?, max_deg)
}

/// Even Chern series Σ Tr P(dP)^{2n}/((2πi)^n n!); the degree-0 part is
/// the stable rank p + Tr P.
pub fn even_chern(p: &ProjectionField, max_deg: Option<usize>) -> Result<MixedForm> {
    let grid = p.grid();
    let top = max_degree(grid, max_deg);
    let mut out = MixedForm::new(grid, 1);
    let rank0 = constant_scalar(grid, C64::new(p.window.p as f64, 0.0));
    out.insert(rank0.add(&p.values.trace())?)?;
    if top >= 2 {
        let dp = p.values.d();
        let pows = powers(&dp, top)?;
        for n in 1..=top / 2 {
            let term = p.values.wedge(&pows[2 * n - 1])?.trace();
            out.insert(term.scale(even_coefficient(n)))?;
        }
    }
    Ok(out)
}

/// F = dA + A∧A.
pub fn curvature(c: &ConnectionField) -> Result<MatrixForm> {
    c.form.d().add(&c.form.wedge(&c.form)?)
}

/// Tr exp(F/2πi). With a subbundle P the trace runs over Im P using the
/// compressed curvature PFP, and the degree-0 part is rank(P).
pub fn connection_chern(c: &ConnectionField, max_deg: Option<usize>) -> Result<MixedForm> {
    let grid = c.grid();
    let top = max_degree(grid, max_deg);
    let n = c.n();
    let mut f = curvature(c)?;
    let mut out = MixedForm::new(grid, 1);
    match &c.subbundle {
        Some(p) => {
            let pv = &p.values;
            f = pv.wedge(&f)?.wedge(pv)?;
            let rank0 = constant_scalar(grid, C64::new(p.window.p as f64, 0.0));
            out.insert(rank0.add(&pv.trace())?)?;
        }
        None => out.insert(constant_scalar(grid, C64::new(n as f64, 0.0)))?,
    }
    if top >= 2 {
        for (k, pow) in powers(&f, top)?.iter().enumerate() {
            out.insert(pow.trace().scale(even_coefficient(k + 1)))?;
        }
    }
    Ok(out)
}

/// How time derivatives of sampled paths are formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeDerivative {
    /// The exterior-derivative stencils (central, one-sided at interval ends).
    Stencil,
    /// Trigonometric differentiation; periodic axes only.
    Spectral,
}

/// Real periodic differentiation matrix for N equispaced samples on a
/// circle of length L; the Nyquist mode is dropped.
pub fn spectral_derivative_matrix(size: usize, length: f64) -> Vec<f64> {
    let mut d = vec![0.0; size * size];
    let h = 2.0 * PI / size as f64;
    for j in 0..size {
        for k in 0..size {
            if j == k {
                continue;
            }
            let x = (j as f64 - k as f64) * h;
            let sign = if (j + size - k).is_multiple_of(2) { 1.0 } else { -1.0 };
            d[j * size + k] = if size.is_multiple_of(2) { 0.5 * sign / (0.5 * x).tan() } else { 0.5 * sign / (0.5 * x).sin() };
        }
    }
    let scale = 2.0 * PI / length;
    d.iter_mut().for_each(|x| *x *= scale);
    d
}

/// Degree-0 slices of a field along the time axis and their derivatives.
pub struct TimeSlices {
    pub base: Grid,
    pub values: Vec<MatrixForm>,
    pub derivs: Vec<MatrixForm>,
    pub weights: Vec<f64>,
    /// Base differentials of the slices when known by the chain rule; the
    /// stencil d of each slice otherwise.
    pub spatial: Option<Vec<MatrixForm>>,
}

pub fn time_slices(values: &MatrixForm, t_axis: usize, mode: TimeDerivative) -> Result<TimeSlices> {
    let grid = values.grid();
    let ax = grid.axis(t_axis).clone();
    let base = grid.without_axis(t_axis)?;
    let n = values.matdim();
    let nn = n * n;
    let data = &values.components()[0];
    let raw: Vec<Vec<C64>> = (0..ax.size).map(|k| grid.slice(data, nn, t_axis, k)).collect();
    let raw_d: Vec<Vec<C64>> = match mode {
        TimeDerivative::Stencil => {
            let dd = grid.deriv(data, nn, t_axis);
            (0..ax.size).map(|k| grid.slice(&dd, nn, t_axis, k)).collect()
        }
        TimeDerivative::Spectral => {
            if !ax.periodic {
                return Err(Error::InvalidInput("spectral time derivative needs a periodic axis".into()));
            }
            let m = spectral_derivative_matrix(ax.size, ax.length);
            (0..ax.size)
                .map(|j| {
                    let mut acc = vec![ZERO; raw[0].len()];
                    for (k, r) in raw.iter().enumerate() {
                        let w = m[j * ax.size + k];
                        if w != 0.0 {
                            acc.iter_mut().zip(r).for_each(|(a, x)| *a += x * w);
                        }
                    }
                    acc
                })
                .collect()
        }
    };
    let to_form = |v: Vec<C64>| MatrixForm::from_blocks(&base, n, v);
    Ok(TimeSlices {
        values: raw.into_iter().map(to_form).collect::<Result<_>>()?,
        derivs: raw_d.into_iter().map(to_form).collect::<Result<_>>()?,
        weights: ax.weights(),
        spatial: None,
        base,
    })
}

fn accumulate(acc: &mut MixedForm, f: MatrixForm, w: C64) -> Result<()> {
    acc.insert(f.scale(w))
}

/// Σ_i (−1)^i L·x^i·y·x^{m−1−i}: the part of L(x + dt·y)^m linear in dt,
/// with dt moved to the front. `xp[k]` holds x^{k+1}; L is optional.
fn dt_linear_part(xp: &[MatrixForm], y: &MatrixForm, m: usize, left: Option<&MatrixForm>) -> Result<MatrixForm> {
    let mut sum: Option<MatrixForm> = None;
    for i in 0..m {
        let sign = if i % 2 == 0 { ONE } else { -ONE };
        let mut factors: Vec<&MatrixForm> = left.into_iter().collect();
        if i > 0 {
            factors.push(&xp[i - 1]);
        }
        factors.push(y);
        if m - 1 - i > 0 {
            factors.push(&xp[m - 2 - i]);
        }
        let mut term = factors[0].clone();
        for f in &factors[1..] {
            term = term.wedge(f)?;
        }
        sum = Some(match sum {
            None => term.scale(sign),
            Some(s) => s.lincomb(ONE, &term, sign)?,
        });
    }
    sum.ok_or_else(|| Error::Degree("empty power".into()))
}

/// ∫_t Ch(P_t) over the time axis, streamed slice by slice:
/// Σ_n (2πi)^{−n}/n! ∫ Σ_i (−1)^i Tr P(d_M P)^i Ṗ (d_M P)^{2n−1−i} dt.
pub fn fiber_even_chern(slices: &TimeSlices, max_deg: Option<usize>) -> Result<MixedForm> {
    let base = &slices.base;
    let top = max_degree(base, max_deg.map(|m| m.saturating_sub(1)));
    let mut acc = MixedForm::new(base, 1);
    for n in 1..=top.div_ceil(2) {
        acc.insert(MatrixForm::zeros(base, 2 * n - 1, 1))?;
    }
    if top == 0 {
        return Ok(acc);
    }
    for ((p, pd), &w) in slices.values.iter().zip(&slices.derivs).zip(&slices.weights) {
        let dp = p.d();
        let xp = powers(&dp, top)?;
        for n in 1..=top.div_ceil(2) {
            let f = dt_linear_part(&xp, pd, 2 * n, Some(p))?;
            accumulate(&mut acc, f.trace(), even_coefficient(n) * w)?;
        }
    }
    Ok(acc)
}

/// ∫_t Ch(g_t) over the time axis with ω = ω_M + dt·ω_t, streamed.
pub fn fiber_odd_chern(slices: &TimeSlices, max_deg: Option<usize>) -> Result<MixedForm> {
    let base = &slices.base;
    let top = max_degree(base, max_deg.map(|m| m.saturating_sub(1)));
    let mut acc = MixedForm::new(base, 1);
    for k in (0..=top).step_by(2) {
        acc.insert(MatrixForm::zeros(base, k, 1))?;
    }
    for (k, ((g, gd), &w)) in slices.values.iter().zip(&slices.derivs).zip(&slices.weights).enumerate() {
        let n = g.matdim();
        let ginv = g.map_blocks(n, |_, b| linalg::adjoint(b, n));
        let omega_t = ginv.wedge(gd)?;
        accumulate(&mut acc, omega_t.trace(), odd_coefficient(0) * w)?;
        if top >= 2 {
            let dg = match &slices.spatial {
                Some(v) => v[k].clone(),
                None => g.d(),
            };
            let omega_m = ginv.wedge(&dg)?;
            let xp = powers(&omega_m, top)?;
            for k in 1..=top / 2 {
                let f = dt_linear_part(&xp, &omega_t, 2 * k + 1, None)?;
                accumulate(&mut acc, f.trace(), odd_coefficient(k) * w)?;
            }
        }
    }
    Ok(acc)
}

/// Odd CS by the defining fiber integral of Ch over the full path field.
pub fn odd_cs(path: &PathField<UnitaryField>) -> Result<MixedForm> {
    let ch = odd_chern(&path.field, None)?;
    ch.fiber_integrate(path.time_axis_name())
}

/// Odd CS streamed over time slices, with stencil time derivatives; agrees
/// with `odd_cs` to roundoff.
pub fn odd_cs_streamed(path: &PathField<UnitaryField>) -> Result<MixedForm> {
    let s = time_slices(&path.field.values, path.time_axis, TimeDerivative::Stencil)?;
    fiber_odd_chern(&s, None)
}

/// Even CS computed by both routes.
#[derive(Clone, Debug)]
pub struct EvenCs {
    /// Fiber integral of the even Chern form of the path.
    pub fiber: MixedForm,
    /// Σ_n (2πi)^{−(n+1)}/n! ∫ Tr (2P−1)Ṗ(dP)^{2n+1} dt, real part.
    pub explicit: MixedForm,
    /// max-norm difference between the routes.
    pub route_gap: f64,
}

/// The explicit transgression formula alone.
pub fn even_cs_explicit(path: &PathField<ProjectionField>) -> Result<MixedForm> {
    let s = time_slices(&path.field.values, path.time_axis, TimeDerivative::Stencil)?;
    explicit_even_cs_slices(&s)
}

fn explicit_even_cs_slices(s: &TimeSlices) -> Result<MixedForm> {
    let base = &s.base;
    let top = base.dim();
    let mut acc = MixedForm::new(base, 1);
    for deg in (1..=top).step_by(2) {
        acc.insert(MatrixForm::zeros(base, deg, 1))?;
    }
    if top == 0 {
        return Ok(acc);
    }
    for ((p, pd), &w) in s.values.iter().zip(&s.derivs).zip(&s.weights) {
        let n = p.matdim();
        let two_p_minus_1 = p.map_blocks(n, |_, b| {
            let mut m = linalg::scale(b, C64::new(2.0, 0.0));
            (0..n).for_each(|a| m[a * n + a] -= ONE);
            m
        });
        let lead = two_p_minus_1.wedge(pd)?;
        let xp = powers(&p.d(), top)?;
        for k in 0..=(top - 1) / 2 {
            // The trace is real for exact projections; discrete dP leaves an
            // O(h⁴) imaginary residue, removed by taking the Hermitian part.
            let term = lead.wedge(&xp[2 * k])?.trace().scale(two_pi_i().powi(-(k as i32 + 1)));
            let term = term.map_blocks(1, |_, b| vec![C64::new(b[0].re, 0.0)]);
            accumulate(&mut acc, term, C64::new(w / factorial(k), 0.0))?;
        }
    }
    Ok(acc)
}

pub fn even_cs(path: &PathField<ProjectionField>) -> Result<EvenCs> {
    let s = time_slices(&path.field.values, path.time_axis, TimeDerivative::Stencil)?;
    let fiber = fiber_even_chern(&s, None)?;
    let explicit = explicit_even_cs_slices(&s)?;
    let route_gap = fiber.sub(&explicit)?.norm_inf();
    Ok(EvenCs { fiber, explicit, route_gap })
}

/// Even CS by the generic route: even Chern form of the whole path field,
/// then the fiber integral. Used to cross-check the streamed version.
pub fn even_cs_generic(path: &PathField<ProjectionField>) -> Result<MixedForm> {
    even_chern(&path.field, None)?.fiber_integrate(path.time_axis_name())
}

/// A path of either parity.
pub enum AnyPath<'a> {
    Unitary(&'a PathField<UnitaryField>),
    Projection(&'a PathField<ProjectionField>),
}

/// ‖d·CS − (Ch(end) − Ch(start))‖_∞ over all degrees of the base.
pub fn stokes_residual(path: AnyPath<'_>) -> Result<f64> {
    let (dcs, diff) = match path {
        AnyPath::Unitary(p) => {
            let cs = odd_cs_streamed(p)?;
            let ch1 = odd_chern(&p.end()?, None)?;
            let ch0 = odd_chern(&p.start()?, None)?;
            (cs.d(), ch1.sub(&ch0)?)
        }
        AnyPath::Projection(p) => {
            let cs = even_cs(p)?.fiber;
            let ch1 = even_chern(&p.end()?, None)?;
            let ch0 = even_chern(&p.start()?, None)?;
            (cs.d(), ch1.sub(&ch0)?)
        }
    };
    // Degree-0 parts of Ch differences have no CS counterpart; they vanish
    // for paths of constant rank.
    Ok(dcs.sub(&diff)?.norm_inf())
}

/// Integral of the top-degree part of a mixed form.
pub fn integrate_degree(f: &MixedForm, degree: usize) -> Result<C64> {
    if f.grid().dim() != degree {
        return Err(Error::Degree(format!("degree {degree} is not the top degree {}", f.grid().dim())));
    }
    f.part_or_zero(degree).integrate()
}

/// Sum of a Chern form over the degrees present, for reporting.
pub fn degree_part(f: &MixedForm, degree: usize) -> MatrixForm {
    f.part_or_zero(degree)
}

/// Check that a path is constant in time to a tolerance, useful for the
/// trivial branches.
pub fn is_constant_path<F: Sliced>(path: &PathField<F>, tol: f64) -> Result<bool> {
    let first = path.ev(0)?;
    for k in 1..path.nt() {
        if F::slice_distance(&first, &path.ev(k)?) > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{self, Window};
    use crate::grid::Axis;

    fn circle(n: usize) -> Grid {
        Grid::torus(&["t"], n, 1.0).unwrap()
    }

    #[test]
    fn coefficients() {
        assert!((odd_coefficient(0) - C64::new(0.0, -1.0 / (2.0 * PI))).norm() < 1e-15);
        // −1/(2πi)² · 1/6 = 1/(24π²)
        assert!((odd_coefficient(1) - C64::new(1.0 / (24.0 * PI * PI), 0.0)).norm() < 1e-15);
        assert!((even_coefficient(1) - C64::new(0.0, -1.0 / (2.0 * PI))).norm() < 1e-15);
    }

    #[test]
    fn maurer_cartan_of_phase() {
        let g = fields::winding_unitary(&circle(64), "t", &[1], Window::new(0, 1).unwrap()).unwrap();
        let w = maurer_cartan(&g).unwrap();
        let h = 1.0 / 64.0;
        let expect = 2.0 * PI * (2.0 * PI * h).sin() / (2.0 * PI * h);
        for s in 0..64 {
            let v = w.components()[0][s];
            assert!((v - C64::new(0.0, expect)).norm() < 1e-12);
        }
    }

    #[test]
    fn winding_integrals() {
        for m in -2i64..=3 {
            let g = fields::winding_unitary(&circle(32), "t", &[m], Window::new(0, 1).unwrap()).unwrap();
            let ch = odd_chern(&g, None).unwrap();
            let v = integrate_degree(&ch, 1).unwrap();
            // Trapezoid of sin(2πmh)/h is not exactly m; the winding
            // oracle is the discrete phase count.
            let h = 1.0 / 32.0;
            let discrete = (2.0 * PI * m as f64 * h).sin() / (2.0 * PI * h);
            assert!((v.re - discrete).abs() < 1e-12, "m={m}: {v}");
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn constant_fields_have_trivial_chern() {
        let g = Grid::torus(&["x", "y"], 8, 1.0).unwrap();
        let w = Window::new(-1, 2).unwrap();
        let ch = odd_chern(&UnitaryField::identity(&g, w), None).unwrap();
        assert!(ch.norm_inf() < 1e-15);
        let p = ProjectionField::i_k(&g, w, 1).unwrap();
        let ch = even_chern(&p, None).unwrap();
        assert!((ch.part(0).unwrap().components()[0][3] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(ch.part(2).unwrap().norm_inf() < 1e-15);
    }

    #[test]
    fn grassmann_connection_matches_even_chern() {
        // The routes differ by the failure of the discrete Leibniz rule,
        // which is second order.
        let mut gaps = Vec::new();
        for size in [32, 64] {
            let g = Grid::torus(&["x", "y"], size, 2.0 * PI).unwrap();
            let p = fields::bloch_projection(&g, 1).unwrap();
            let a = even_chern(&p, None).unwrap();
            let b = connection_chern(&ConnectionField::grassmann(&p), None).unwrap();
            gaps.push(a.sub(&b).unwrap().norm_inf());
            assert!((integrate_degree(&a, 2).unwrap().re - 1.0).abs() < 2e-2);
        }
        assert!(gaps[1] < 1e-3 && gaps[0] / gaps[1] > 3.0, "{gaps:?}");
    }

    #[test]
    fn flat_connection_is_rank() {
        let g = Grid::torus(&["x", "y"], 8, 1.0).unwrap();
        let c = ConnectionField::new(MatrixForm::zeros(&g, 1, 3)).unwrap();
        let ch = connection_chern(&c, None).unwrap();
        assert!((ch.part(0).unwrap().components()[0][0] - C64::new(3.0, 0.0)).norm() < 1e-15);
        assert!(ch.part(2).unwrap().norm_inf() == 0.0);
    }

    fn unitary_path(seed: u64, size: usize) -> PathField<UnitaryField> {
        let g = Grid::new(vec![
            Axis::periodic("x", size, 1.0),
            Axis::periodic("y", size, 1.0),
            Axis::interval("t", size + 1, 1.0),
        ])
        .unwrap();
        let u = fields::random_unitary(&g, Window::new(0, 2).unwrap(), seed, 1).unwrap();
        PathField::new(u, "t").unwrap()
    }

    fn projection_path(seed: u64, size: usize) -> PathField<ProjectionField> {
        let g = Grid::new(vec![
            Axis::periodic("x", size, 1.0),
            Axis::periodic("y", size, 1.0),
            Axis::interval("t", size + 1, 1.0),
        ])
        .unwrap();
        let p = fields::random_projection(&g, Window::new(0, 3).unwrap(), seed, 1, 1).unwrap();
        PathField::new(p, "t").unwrap()
    }

    #[test]
    fn streamed_routes_match_generic() {
        let up = unitary_path(1, 8);
        let a = odd_cs(&up).unwrap();
        let b = odd_cs_streamed(&up).unwrap();
        assert!(a.sub(&b).unwrap().norm_inf() < 1e-12);
        let pp = projection_path(2, 8);
        let a = even_cs_generic(&pp).unwrap();
        let b = even_cs(&pp).unwrap().fiber;
        assert!(a.sub(&b).unwrap().norm_inf() < 1e-12);
    }

    #[test]
    fn explicit_route_agrees_with_fiber_route() {
        for size in [16, 32] {
            let cs = even_cs(&projection_path(3, size)).unwrap();
            assert!(cs.route_gap < 1e-10, "{}", cs.route_gap);
            assert!(cs.fiber.max_imag() < 1e-9 && cs.explicit.max_imag() < 1e-9);
            assert!(cs.fiber.norm_inf() > 1e-2);
        }
    }

    #[test]
    fn odd_cs_of_exponential_path() {
        // g_t = e^{2πi t X}: degree-0 CS is Tr X.
        let g = Grid::new(vec![Axis::periodic("x", 4, 1.0), Axis::interval("t", 129, 1.0)]).unwrap();
        let x = [C64::new(0.3, 0.0), C64::new(0.1, 0.2), C64::new(0.1, -0.2), C64::new(-0.7, 0.0)];
        let u = UnitaryField::from_fn(&g, Window::new(0, 2).unwrap(), |pt| {
            linalg::expm_i_hermitian(&x, 2.0 * PI * pt[1], 2)
        })
        .unwrap();
        let cs = odd_cs(&PathField::new(u, "t").unwrap()).unwrap();
        let v = cs.part(0).unwrap().components()[0][0];
        assert!((v - C64::new(-0.4, 0.0)).norm() < 5e-4, "{v}");
    }

    #[test]
    fn stokes_orders() {
        let mut odd = Vec::new();
        let mut even = Vec::new();
        for size in [32, 64] {
            odd.push(stokes_residual(AnyPath::Unitary(&unitary_path(4, size))).unwrap());
            even.push(stokes_residual(AnyPath::Projection(&projection_path(5, size))).unwrap());
        }
        assert!((odd[0] / odd[1]).log2() > 1.8, "{odd:?}");
        assert!((even[0] / even[1]).log2() > 1.8, "{even:?}");
    }

    #[test]
    fn spectral_derivative_of_trig() {
        let n = 16;
        let m = spectral_derivative_matrix(n, 2.0);
        for j in 0..n {
            let d: f64 = (0..n).map(|k| m[j * n + k] * (PI * k as f64 * 2.0 / n as f64).sin()).sum();
            let t = 2.0 * j as f64 / n as f64;
            assert!((d - PI * (PI * t).cos()).abs() < 1e-12);
        }
    }
}
