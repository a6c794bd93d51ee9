//! Matrix-valued differential forms on a [`Grid`].
//!
//! A k-form stores one lattice of n×n blocks per strictly increasing k-subset
//! of axes, subsets in lexicographic order. Subsets are handled as bitmasks.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{self, C64, ZERO};
use std::collections::BTreeMap;

/// Increasing k-subsets of {0..dim} in lexicographic order, as bitmasks.
pub fn subsets(dim: usize, k: usize) -> Vec<u32> {
    fn rec(start: usize, dim: usize, k: usize, acc: u32, out: &mut Vec<u32>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for i in start..dim {
            if dim - i < k {
                break;
            }
            rec(i + 1, dim, k - 1, acc | (1 << i), out);
        }
    }
    let mut out = Vec::new();
    if k <= dim {
        rec(0, dim, k, 0, &mut out);
    }
    out
}

pub fn mask_axes(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

fn axes_mask(axes: &[usize]) -> u32 {
    axes.iter().fold(0, |m, a| m | (1 << a))
}

/// Sign of dx^I ∧ dx^J relative to the sorted wedge of I ∪ J.
fn shuffle_sign(i: u32, j: u32) -> f64 {
    let mut inv = 0;
    for a in mask_axes(i) {
        inv += (j & ((1u32 << a) - 1)).count_ones();
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Removes bit `axis` and shifts higher bits down.
fn drop_bit(mask: u32, axis: usize) -> u32 {
    let low = mask & ((1u32 << axis) - 1);
    let high = (mask >> (axis + 1)) << axis;
    low | high
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixForm {
    grid: Grid,
    degree: usize,
    n: usize,
    masks: Vec<u32>,
    comps: Vec<Vec<C64>>,
}

impl MatrixForm {
    pub fn zeros(grid: &Grid, degree: usize, n: usize) -> MatrixForm {
        let masks = subsets(grid.dim(), degree);
        let comps = masks.iter().map(|_| vec![ZERO; grid.nsites() * n * n]).collect();
        MatrixForm { grid: grid.clone(), degree, n, masks, comps }
    }

    /// Degree-0 form from one n×n block per site.
    pub fn from_blocks(grid: &Grid, n: usize, data: Vec<C64>) -> Result<MatrixForm> {
        MatrixForm::from_components(grid, 0, n, vec![data])
    }

    pub fn from_components(grid: &Grid, degree: usize, n: usize, comps: Vec<Vec<C64>>) -> Result<MatrixForm> {
        if degree > grid.dim() {
            return Err(Error::Degree(format!("degree {degree} exceeds grid dimension {}", grid.dim())));
        }
        let masks = subsets(grid.dim(), degree);
        if comps.len() != masks.len() {
            return Err(Error::Degree(format!("expected {} components, got {}", masks.len(), comps.len())));
        }
        for c in &comps {
            if c.len() != grid.nsites() * n * n {
                return Err(Error::DimMismatch(format!(
                    "component length {} for {} sites of {n}x{n}",
                    c.len(),
                    grid.nsites()
                )));
            }
        }
        Ok(MatrixForm { grid: grid.clone(), degree, n, masks, comps })
    }

    /// Scalar form from a closure over site coordinates, one closure value
    /// per component in lexicographic order.
    pub fn scalar_from_fn(grid: &Grid, degree: usize, f: impl Fn(&[f64]) -> Vec<C64>) -> MatrixForm {
        let mut out = MatrixForm::zeros(grid, degree, 1);
        for s in 0..grid.nsites() {
            let vals = f(&grid.point(s));
            for (c, v) in vals.into_iter().enumerate() {
                out.comps[c][s] = v;
            }
        }
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn matdim(&self) -> usize {
        self.n
    }

    pub fn num_components(&self) -> usize {
        self.comps.len()
    }

    /// Axis subsets of the components, in storage order.
    pub fn component_axes(&self) -> Vec<Vec<usize>> {
        self.masks.iter().map(|&m| mask_axes(m)).collect()
    }

    pub fn components(&self) -> &[Vec<C64>] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [Vec<C64>] {
        &mut self.comps
    }

    pub fn into_components(self) -> Vec<Vec<C64>> {
        self.comps
    }

    fn index_of(&self, mask: u32) -> Option<usize> {
        self.masks.iter().position(|&m| m == mask)
    }

    /// Component for an increasing list of axes.
    pub fn component(&self, axes: &[usize]) -> Option<&[C64]> {
        self.index_of(axes_mask(axes)).map(|i| self.comps[i].as_slice())
    }

    pub fn component_mut(&mut self, axes: &[usize]) -> Option<&mut Vec<C64>> {
        let i = self.index_of(axes_mask(axes))?;
        Some(&mut self.comps[i])
    }

    /// Block of component `c` at `site`.
    pub fn block(&self, c: usize, site: usize) -> &[C64] {
        let nn = self.n * self.n;
        &self.comps[c][site * nn..(site + 1) * nn]
    }

    fn same_shape(&self, other: &MatrixForm) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("forms live on different grids".into()));
        }
        if self.n != other.n {
            return Err(Error::DimMismatch(format!("matdim {} vs {}", self.n, other.n)));
        }
        Ok(())
    }

    pub fn add(&self, other: &MatrixForm) -> Result<MatrixForm> {
        self.lincomb(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &MatrixForm) -> Result<MatrixForm> {
        self.lincomb(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    /// a·self + b·other
    pub fn lincomb(&self, a: C64, other: &MatrixForm, b: C64) -> Result<MatrixForm> {
        self.same_shape(other)?;
        if self.degree != other.degree {
            return Err(Error::Degree(format!("adding degrees {} and {}", self.degree, other.degree)));
        }
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(x, y)| x.iter().zip(y).map(|(u, v)| a * u + b * v).collect())
            .collect();
        Ok(MatrixForm { comps, ..self.clone_shape() })
    }

    pub fn scale(&self, s: C64) -> MatrixForm {
        let comps = self.comps.iter().map(|c| c.iter().map(|x| x * s).collect()).collect();
        MatrixForm { comps, ..self.clone_shape() }
    }

    pub fn add_assign_scaled(&mut self, other: &MatrixForm, s: C64) -> Result<()> {
        self.same_shape(other)?;
        if self.degree != other.degree {
            return Err(Error::Degree("degree mismatch".into()));
        }
        for (x, y) in self.comps.iter_mut().zip(&other.comps) {
            for (u, v) in x.iter_mut().zip(y) {
                *u += s * v;
            }
        }
        Ok(())
    }

    fn clone_shape(&self) -> MatrixForm {
        MatrixForm {
            grid: self.grid.clone(),
            degree: self.degree,
            n: self.n,
            masks: self.masks.clone(),
            comps: Vec::new(),
        }
    }

    /// Applies a blockwise map to every component.
    pub fn map_blocks(&self, n_out: usize, f: impl Fn(usize, &[C64]) -> Vec<C64>) -> MatrixForm {
        let nn = self.n * self.n;
        let comps = self
            .comps
            .iter()
            .map(|c| {
                let mut out = Vec::with_capacity(self.grid.nsites() * n_out * n_out);
                for s in 0..self.grid.nsites() {
                    out.extend(f(s, &c[s * nn..(s + 1) * nn]));
                }
                out
            })
            .collect();
        MatrixForm { comps, n: n_out, ..self.clone_shape() }
    }

    /// Exterior product with matrix multiplication of coefficients.
    pub fn wedge(&self, other: &MatrixForm) -> Result<MatrixForm> {
        self.same_shape(other)?;
        let dim = self.grid.dim();
        let n = self.n;
        let nn = n * n;
        let degree = self.degree + other.degree;
        if degree > dim {
            return Ok(MatrixForm { grid: self.grid.clone(), degree, n, masks: Vec::new(), comps: Vec::new() });
        }
        let mut out = MatrixForm::zeros(&self.grid, degree, n);
        for (ia, &ma) in self.masks.iter().enumerate() {
            for (ib, &mb) in other.masks.iter().enumerate() {
                if ma & mb != 0 {
                    continue;
                }
                let k = out.index_of(ma | mb).expect("subset present");
                let sign = shuffle_sign(ma, mb);
                let a = &self.comps[ia];
                let b = &other.comps[ib];
                let dst = &mut out.comps[k];
                if n == 1 {
                    for s in 0..a.len() {
                        dst[s] += a[s] * b[s] * sign;
                    }
                } else {
                    let sc = C64::new(sign, 0.0);
                    for s in 0..self.grid.nsites() {
                        let r = s * nn..(s + 1) * nn;
                        linalg::matmul_acc(&mut dst[r.clone()], &a[r.clone()], &b[r], n, sc);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Discrete exterior derivative; zero form of degree k+1 at top degree.
    pub fn d(&self) -> MatrixForm {
        let dim = self.grid.dim();
        let nn = self.n * self.n;
        if self.degree >= dim {
            return MatrixForm {
                grid: self.grid.clone(),
                degree: self.degree + 1,
                n: self.n,
                masks: Vec::new(),
                comps: Vec::new(),
            };
        }
        let mut out = MatrixForm::zeros(&self.grid, self.degree + 1, self.n);
        for (ia, &ma) in self.masks.iter().enumerate() {
            for j in 0..dim {
                if ma & (1 << j) != 0 {
                    continue;
                }
                let k = out.index_of(ma | (1 << j)).expect("subset present");
                let before = (ma & ((1u32 << j) - 1)).count_ones();
                let sign = if before.is_multiple_of(2) { 1.0 } else { -1.0 };
                self.grid.deriv_acc(&mut out.comps[k], &self.comps[ia], nn, j, sign);
            }
        }
        out
    }

    /// Fiberwise trace; a scalar form of the same degree.
    pub fn trace(&self) -> MatrixForm {
        let n = self.n;
        self.map_blocks(1, |_, b| vec![linalg::trace(b, n)])
    }

    /// Integral of a top-degree scalar form.
    pub fn integrate(&self) -> Result<C64> {
        if self.degree != self.grid.dim() {
            return Err(Error::Degree(format!("integrate needs top degree {}, got {}", self.grid.dim(), self.degree)));
        }
        if self.n != 1 {
            return Err(Error::DimMismatch("integrate needs a scalar form".into()));
        }
        let w = self.grid.quadrature_weights();
        Ok(self.comps[0].iter().zip(&w).map(|(v, w)| v * w).sum())
    }

    /// Integration along one axis. The fiber differential is moved to the
    /// first slot, so ∫ dt∧β = (∫β dt) and d∫a + ∫da = ev₁a − ev₀a.
    pub fn fiber_integrate(&self, axis_name: &str) -> Result<MatrixForm> {
        let j = self.grid.axis_index(axis_name)?;
        self.fiber_integrate_index(j)
    }

    pub fn fiber_integrate_index(&self, j: usize) -> Result<MatrixForm> {
        if self.degree == 0 {
            return Err(Error::Degree("fiber integral of a 0-form".into()));
        }
        let grid = self.grid.without_axis(j)?;
        let nn = self.n * self.n;
        let mut out = MatrixForm::zeros(&grid, self.degree - 1, self.n);
        let ax = self.grid.axis(j);
        let w = ax.weights();
        let size = ax.size;
        let inner = self.grid.strides()[j] * nn;
        let outer = self.grid.nsites() / (size * self.grid.strides()[j]);
        for (ia, &ma) in self.masks.iter().enumerate() {
            if ma & (1 << j) == 0 {
                continue;
            }
            let before = (ma & ((1u32 << j) - 1)).count_ones();
            let sign = if before.is_multiple_of(2) { 1.0 } else { -1.0 };
            let k = out.index_of(drop_bit(ma, j)).expect("subset present");
            let src = &self.comps[ia];
            let dst = &mut out.comps[k];
            for o in 0..outer {
                for (i, wi) in w.iter().enumerate() {
                    let s0 = (o * size + i) * inner;
                    let d0 = o * inner;
                    for x in 0..inner {
                        dst[d0 + x] += src[s0 + x] * (wi * sign);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Pullback to the hyperplane `axis = index`.
    pub fn restrict(&self, axis: usize, index: usize) -> Result<MatrixForm> {
        let grid = self.grid.without_axis(axis)?;
        let nn = self.n * self.n;
        let mut out = MatrixForm::zeros(&grid, self.degree, self.n);
        for (ia, &ma) in self.masks.iter().enumerate() {
            if ma & (1 << axis) != 0 {
                continue;
            }
            let k = out.index_of(drop_bit(ma, axis)).expect("subset present");
            out.comps[k] = self.grid.slice(&self.comps[ia], nn, axis, index);
        }
        Ok(out)
    }

    /// Pullback along the reflection of one axis, t ↦ L − t on intervals
    /// and index i ↦ −i on circles.
    pub fn reflect(&self, axis: usize) -> MatrixForm {
        let nn = self.n * self.n;
        let ax = self.grid.axis(axis);
        let size = ax.size;
        let perm: Vec<usize> = (0..size).map(|i| if ax.periodic { (size - i) % size } else { size - 1 - i }).collect();
        let inner = self.grid.strides()[axis] * nn;
        let outer = self.grid.nsites() / (size * self.grid.strides()[axis]);
        let comps = self
            .masks
            .iter()
            .zip(&self.comps)
            .map(|(&m, c)| {
                let sign = if m & (1 << axis) != 0 { -1.0 } else { 1.0 };
                let mut out = vec![ZERO; c.len()];
                for o in 0..outer {
                    for i in 0..size {
                        let d0 = (o * size + i) * inner;
                        let s0 = (o * size + perm[i]) * inner;
                        for x in 0..inner {
                            out[d0 + x] = c[s0 + x] * sign;
                        }
                    }
                }
                out
            })
            .collect();
        MatrixForm { comps, ..self.clone_shape() }
    }

    /// Pullback along a permutation of axes: new axis `a` is old axis
    /// `perm[a]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<MatrixForm> {
        let dim = self.grid.dim();
        if perm.len() != dim {
            return Err(Error::InvalidInput("permutation length".into()));
        }
        let axes = perm.iter().map(|&p| self.grid.axis(p).clone()).collect();
        let grid = Grid::new(axes)?;
        let nn = self.n * self.n;
        let mut out = MatrixForm::zeros(&grid, self.degree, self.n);
        let mut inv = vec![0; dim];
        for (a, &p) in perm.iter().enumerate() {
            inv[p] = a;
        }
        for (ia, &ma) in self.masks.iter().enumerate() {
            let new_axes: Vec<usize> = mask_axes(ma).iter().map(|&a| inv[a]).collect();
            // Sign of sorting the image sequence.
            let mut inversions = 0;
            for x in 0..new_axes.len() {
                for y in x + 1..new_axes.len() {
                    if new_axes[x] > new_axes[y] {
                        inversions += 1;
                    }
                }
            }
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            let k = out.index_of(axes_mask(&new_axes)).expect("subset present");
            for s in 0..grid.nsites() {
                let idx = grid.multi_index(s);
                let mut old = vec![0; dim];
                for a in 0..dim {
                    old[perm[a]] = idx[a];
                }
                let os = self.grid.site(&old);
                for x in 0..nn {
                    out.comps[k][s * nn + x] = self.comps[ia][os * nn + x] * sign;
                }
            }
        }
        Ok(out)
    }

    /// Max over components and sites of the operator norm.
    pub fn norm_inf(&self) -> f64 {
        let nn = self.n * self.n;
        let mut m: f64 = 0.0;
        for c in &self.comps {
            for s in 0..self.grid.nsites() {
                m = m.max(linalg::opnorm(&c[s * nn..(s + 1) * nn], self.n));
            }
        }
        m
    }

    /// Largest imaginary part over all entries.
    pub fn max_imag(&self) -> f64 {
        self.comps.iter().flat_map(|c| c.iter()).map(|x| x.im.abs()).fold(0.0, f64::max)
    }

    /// Integrals over coordinate subtori of matching degree, taken at index 0
    /// in the remaining axes.
    pub fn periods(&self) -> Result<Vec<Period>> {
        if self.n != 1 {
            return Err(Error::DimMismatch("periods need a scalar form".into()));
        }
        let periodic: Vec<usize> = (0..self.grid.dim()).filter(|&a| self.grid.axis(a).periodic).collect();
        if periodic.len() < self.degree {
            return Err(Error::NotTorus(format!(
                "degree {} form but only {} periodic axes",
                self.degree,
                periodic.len()
            )));
        }
        let mut out = Vec::new();
        for sub in subsets(periodic.len(), self.degree) {
            let axes: Vec<usize> = mask_axes(sub).iter().map(|&i| periodic[i]).collect();
            let c = self.component(&axes).expect("component exists");
            let weights: Vec<Vec<f64>> = axes.iter().map(|&a| self.grid.axis(a).weights()).collect();
            let sizes: Vec<usize> = axes.iter().map(|&a| self.grid.axis(a).size).collect();
            let total: usize = sizes.iter().product();
            let mut sum = ZERO;
            let mut idx = vec![0; self.grid.dim()];
            for flat in 0..total {
                let mut rem = flat;
                let mut w = 1.0;
                for (k, &a) in axes.iter().enumerate().rev() {
                    idx[a] = rem % sizes[k];
                    rem /= sizes[k];
                    w *= weights[k][idx[a]];
                }
                sum += c[self.grid.site(&idx)] * w;
            }
            out.push(Period { axes: axes.iter().map(|&a| self.grid.axis(a).name.clone()).collect(), value: sum });
        }
        Ok(out)
    }

    /// Closedness plus vanishing periods, valid on all-periodic grids.
    pub fn is_exact_on_torus(&self, tol: f64) -> Result<Exactness> {
        if !self.grid.all_periodic() {
            return Err(Error::NotTorus("grid has interval axes".into()));
        }
        let closed_residual = self.d().norm_inf();
        let periods = self.periods()?;
        let max_period = periods.iter().map(|p| p.value.norm()).fold(0.0, f64::max);
        Ok(Exactness { exact: closed_residual <= tol && max_period <= tol, closed_residual, max_period, periods })
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct Period {
    pub axes: Vec<String>,
    #[serde(serialize_with = "ser_c64")]
    pub value: C64,
}

fn ser_c64<S: serde::Serializer>(v: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&v.re)?;
    t.serialize_element(&v.im)?;
    t.end()
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct Exactness {
    pub exact: bool,
    pub closed_residual: f64,
    pub max_period: f64,
    pub periods: Vec<Period>,
}

/// Forms of several degrees on one grid, as produced by the Chern series.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedForm {
    grid: Grid,
    n: usize,
    parts: BTreeMap<usize, MatrixForm>,
}

impl MixedForm {
    pub fn new(grid: &Grid, n: usize) -> MixedForm {
        MixedForm { grid: grid.clone(), n, parts: BTreeMap::new() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn matdim(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, f: MatrixForm) -> Result<()> {
        if f.grid() != &self.grid || f.matdim() != self.n {
            return Err(Error::GridMismatch("mixed form part has the wrong shape".into()));
        }
        match self.parts.get_mut(&f.degree()) {
            Some(existing) => existing.add_assign_scaled(&f, C64::new(1.0, 0.0))?,
            None => {
                self.parts.insert(f.degree(), f);
            }
        }
        Ok(())
    }

    pub fn part(&self, degree: usize) -> Option<&MatrixForm> {
        self.parts.get(&degree)
    }

    /// Part of the given degree, or the zero form if absent.
    pub fn part_or_zero(&self, degree: usize) -> MatrixForm {
        self.parts.get(&degree).cloned().unwrap_or_else(|| MatrixForm::zeros(&self.grid, degree, self.n))
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.parts.keys().copied().collect()
    }

    pub fn parts(&self) -> impl Iterator<Item = &MatrixForm> {
        self.parts.values()
    }

    pub fn d(&self) -> MixedForm {
        let mut out = MixedForm::new(&self.grid, self.n);
        for f in self.parts.values() {
            if f.degree() < self.grid.dim() {
                out.insert(f.d()).expect("same shape");
            }
        }
        out
    }

    pub fn lincomb(&self, a: f64, other: &MixedForm, b: f64) -> Result<MixedForm> {
        if other.grid != self.grid || other.n != self.n {
            return Err(Error::GridMismatch("mixed forms on different grids".into()));
        }
        let mut out = MixedForm::new(&self.grid, self.n);
        let degrees: std::collections::BTreeSet<usize> = self.parts.keys().chain(other.parts.keys()).copied().collect();
        for deg in degrees {
            let x = self.part_or_zero(deg);
            let y = other.part_or_zero(deg);
            out.insert(x.lincomb(C64::new(a, 0.0), &y, C64::new(b, 0.0))?)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MixedForm) -> Result<MixedForm> {
        self.lincomb(1.0, other, -1.0)
    }

    pub fn add(&self, other: &MixedForm) -> Result<MixedForm> {
        self.lincomb(1.0, other, 1.0)
    }

    pub fn norm_inf(&self) -> f64 {
        self.parts.values().map(|f| f.norm_inf()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.parts.values().map(|f| f.max_imag()).fold(0.0, f64::max)
    }

    pub fn fiber_integrate(&self, axis: &str) -> Result<MixedForm> {
        let j = self.grid.axis_index(axis)?;
        let grid = self.grid.without_axis(j)?;
        let mut out = MixedForm::new(&grid, self.n);
        for f in self.parts.values() {
            if f.degree() > 0 {
                out.insert(f.fiber_integrate_index(j)?)?;
            }
        }
        Ok(out)
    }

    pub fn restrict(&self, axis: usize, index: usize) -> Result<MixedForm> {
        let grid = self.grid.without_axis(axis)?;
        let mut out = MixedForm::new(&grid, self.n);
        for f in self.parts.values() {
            if f.degree() < self.grid.dim() {
                out.insert(f.restrict(axis, index)?)?;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn t2(n: usize) -> Grid {
        Grid::torus(&["x", "y"], n, 1.0).unwrap()
    }

    /// Smooth random scalar forms built from a few Fourier modes.
    fn smooth_form(grid: &Grid, degree: usize, n: usize, seed: u64) -> MatrixForm {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let ncomp = subsets(grid.dim(), degree).len();
        let coeffs: Vec<(f64, f64, Vec<f64>)> = (0..ncomp * n * n)
            .map(|_| {
                (
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    (0..grid.dim()).map(|_| rng.random_range(0.0..2.0 * PI)).collect(),
                )
            })
            .collect();
        let mut out = MatrixForm::zeros(grid, degree, n);
        for s in 0..grid.nsites() {
            let x = grid.point(s);
            for ci in 0..ncomp {
                for e in 0..n * n {
                    let (a, b, ph) = &coeffs[ci * n * n + e];
                    let mut arg = 0.0;
                    for (k, xk) in x.iter().enumerate() {
                        let l = grid.axis(k).length;
                        arg += (2.0 * PI * xk / l + ph[k]).sin();
                    }
                    out.comps[ci][s * n * n + e] = C64::new(a * arg.cos(), b * arg.sin());
                }
            }
        }
        out
    }

    #[test]
    fn subsets_are_lexicographic() {
        let s: Vec<Vec<usize>> = subsets(4, 2).into_iter().map(mask_axes).collect();
        assert_eq!(s, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(subsets(3, 0), vec![0]);
        assert!(subsets(2, 3).is_empty());
    }

    #[test]
    fn wedge_sign_rule() {
        let g = t2(4);
        let mut a = MatrixForm::zeros(&g, 1, 2);
        let mut b = MatrixForm::zeros(&g, 1, 2);
        // A = [[1,2],[0,1]] dx, B = [[0,1],[1,0]] dy
        let am = [c(1.0), c(2.0), c(0.0), c(1.0)];
        let bm = [c(0.0), c(1.0), c(1.0), c(0.0)];
        for s in 0..g.nsites() {
            a.comps[0][s * 4..s * 4 + 4].copy_from_slice(&am);
            b.comps[1][s * 4..s * 4 + 4].copy_from_slice(&bm);
        }
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        let prod_ab = linalg::matmul(&am, &bm, 2);
        let prod_ba = linalg::matmul(&bm, &am, 2);
        assert_eq!(ab.block(0, 3), prod_ab.as_slice());
        let neg: Vec<C64> = prod_ba.iter().map(|x| -x).collect();
        assert_eq!(ba.block(0, 3), neg.as_slice());
    }

    #[test]
    fn top_degree_overflow_is_zero() {
        let g = t2(4);
        let a = smooth_form(&g, 2, 1, 1);
        let w = a.wedge(&a).unwrap();
        assert_eq!(w.degree(), 4);
        assert_eq!(w.num_components(), 0);
        assert_eq!(w.norm_inf(), 0.0);
    }

    #[test]
    fn alpha_wedge_alpha_matches_hand_expansion() {
        let g = t2(6);
        let a = smooth_form(&g, 1, 3, 4);
        let aa = a.wedge(&a).unwrap();
        for s in 0..g.nsites() {
            let a1 = a.block(0, s);
            let a2 = a.block(1, s);
            let expect = linalg::sub(&linalg::matmul(a1, a2, 3), &linalg::matmul(a2, a1, 3));
            assert!(linalg::max_abs(&linalg::sub(aa.block(0, s), &expect)) < 1e-14);
        }
    }

    #[test]
    fn d_of_sine_dy() {
        let n = 64;
        let g = t2(n);
        let a = MatrixForm::scalar_from_fn(&g, 1, |x| vec![c(0.0), c((2.0 * PI * x[0]).sin())]);
        let da = a.d();
        let h = 1.0 / n as f64;
        let mut err: f64 = 0.0;
        for s in 0..g.nsites() {
            let x = g.point(s);
            err = err.max((da.comps[0][s] - c(2.0 * PI * (2.0 * PI * x[0]).cos())).norm());
        }
        // Central difference error is (2π)³h²/6 times the amplitude.
        assert!(err < (2.0 * PI).powi(3) * h * h / 6.0 * 1.01);
        assert!(err > 0.0);
    }

    #[test]
    fn d_of_constant_is_zero() {
        let g = Grid::new(vec![Axis::periodic("x", 5, 1.0), Axis::interval("t", 7, 2.0)]).unwrap();
        let a = MatrixForm::scalar_from_fn(&g, 0, |_| vec![c(3.5)]);
        assert!(a.d().norm_inf() < 1e-13);
    }

    #[test]
    fn trace_of_identity_and_commutator() {
        let g = t2(5);
        let id = MatrixForm::from_blocks(&g, 3, (0..g.nsites()).flat_map(|_| linalg::eye(3)).collect()).unwrap();
        let tr = id.trace();
        assert!(tr.components()[0].iter().all(|x| *x == c(3.0)));
        // tr(α∧β − β∧α) = 2 tr(α∧β) for 1-forms, by graded symmetry.
        let a = smooth_form(&g, 1, 3, 2);
        let b = smooth_form(&g, 1, 3, 3);
        let comm = a.wedge(&b).unwrap().sub(&b.wedge(&a).unwrap()).unwrap();
        let lhs = comm.trace();
        let rhs = a.wedge(&b).unwrap().trace().scale(c(2.0));
        assert!(lhs.sub(&rhs).unwrap().norm_inf() < 1e-13);
    }

    #[test]
    fn integrals() {
        let g = Grid::torus(&["t"], 8, 1.0).unwrap();
        let dt = MatrixForm::scalar_from_fn(&g, 1, |_| vec![c(1.0)]);
        assert!((dt.integrate().unwrap() - c(1.0)).norm() < 1e-15);
        let g = t2(32);
        let f = MatrixForm::scalar_from_fn(&g, 2, |x| vec![c((2.0 * PI * x[0]).sin().powi(2))]);
        assert!((f.integrate().unwrap() - c(0.5)).norm() < 1e-10);
        let a = smooth_form(&g, 1, 1, 9);
        assert!(a.d().integrate().unwrap().norm() < 1e-10);
    }

    #[test]
    fn fiber_integral_sign() {
        // Axes (x, t); f dx∧dt = −f dt∧dx.
        let g = Grid::new(vec![Axis::periodic("x", 6, 1.0), Axis::interval("t", 9, 1.0)]).unwrap();
        let f = |x: &[f64]| (x[1] * x[1]) * (1.0 + (2.0 * PI * x[0]).cos());
        let a = MatrixForm::scalar_from_fn(&g, 2, |x| vec![c(f(x))]);
        let r = a.fiber_integrate("t").unwrap();
        for s in 0..r.grid().nsites() {
            let x = r.grid().point(s)[0];
            let expect = -(1.0 / 3.0) * (1.0 + (2.0 * PI * x).cos());
            assert!((r.comps[0][s] - c(expect)).norm() < 1e-14);
        }
        // A form without a dt component integrates to zero.
        let b = MatrixForm::scalar_from_fn(&g, 1, |x| vec![c(x[1]), c(0.0)]);
        assert_eq!(b.fiber_integrate("t").unwrap().norm_inf(), 0.0);
        assert!(matches!(a.fiber_integrate("s"), Err(Error::AxisNotFound(_))));
    }

    #[test]
    fn projection_formula_on_interval_fiber() {
        for (deg, seed) in [(0, 1u64), (1, 2), (2, 3)] {
            let mut residual = Vec::new();
            for n in [16, 32] {
                let g = Grid::new(vec![
                    Axis::periodic("x", n, 1.0),
                    Axis::periodic("y", n, 1.0),
                    Axis::interval("t", n + 1, 1.0),
                ])
                .unwrap();
                let a = smooth_form(&g, deg, 2, seed);
                let t = 2;
                let lhs = if deg == 0 {
                    a.d().fiber_integrate_index(t).unwrap()
                } else {
                    a.fiber_integrate_index(t).unwrap().d().add(&a.d().fiber_integrate_index(t).unwrap()).unwrap()
                };
                let rhs = a.restrict(t, n).unwrap().sub(&a.restrict(t, 0).unwrap()).unwrap();
                residual.push(lhs.sub(&rhs).unwrap().norm_inf());
            }
            let order = (residual[0] / residual[1]).log2();
            assert!(order > 1.8, "degree {deg}: residuals {residual:?}");
        }
    }

    #[test]
    fn periods_and_exactness() {
        let g = Grid::torus(&["t"], 8, 1.0).unwrap();
        let dt = MatrixForm::scalar_from_fn(&g, 1, |_| vec![c(1.0)]);
        let p = dt.periods().unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].axes, vec!["t".to_string()]);
        assert!((p[0].value - c(1.0)).norm() < 1e-15);
        assert!(!dt.is_exact_on_torus(1e-8).unwrap().exact);

        let g = t2(16);
        let df = smooth_form(&g, 0, 1, 5).d();
        assert!(df.periods().unwrap().iter().all(|p| p.value.norm() < 1e-12));
        assert!(df.is_exact_on_torus(1e-8).unwrap().exact);

        let gi = Grid::new(vec![Axis::periodic("x", 6, 1.0), Axis::interval("t", 5, 1.0)]).unwrap();
        let f = MatrixForm::scalar_from_fn(&gi, 1, |_| vec![c(1.0), c(0.0)]);
        assert!(matches!(f.is_exact_on_torus(1e-8), Err(Error::NotTorus(_))));
    }

    #[test]
    fn reflect_and_permute() {
        let g = Grid::new(vec![Axis::periodic("x", 6, 1.0), Axis::interval("t", 7, 1.0)]).unwrap();
        let a = smooth_form(&g, 1, 2, 11);
        assert_eq!(a.reflect(1).reflect(1), a);
        // Reflection commutes with d up to the stencil symmetry (exactly).
        let lhs = a.reflect(1).d();
        let rhs = a.d().reflect(1);
        assert!(lhs.sub(&rhs).unwrap().norm_inf() < 1e-12);
        let p = a.permute_axes(&[1, 0]).unwrap();
        assert_eq!(p.permute_axes(&[1, 0]).unwrap(), a);
        let lhs = p.d();
        let rhs = a.d().permute_axes(&[1, 0]).unwrap();
        assert!(lhs.sub(&rhs).unwrap().norm_inf() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn d_squared_vanishes(seed in 0u64..10_000, deg in 0usize..3, periodic_t in proptest::bool::ANY) {
            let t = if periodic_t { Axis::periodic("t", 6, 1.3) } else { Axis::interval("t", 7, 1.3) };
            let g = Grid::new(vec![Axis::periodic("x", 5, 1.0), Axis::periodic("y", 4, 2.0), t]).unwrap();
            let a = smooth_form(&g, deg, 2, seed);
            prop_assert!(a.d().d().norm_inf() < 1e-9 * (1.0 + a.d().norm_inf()));
        }

        #[test]
        fn graded_trace_symmetry(seed in 0u64..10_000, da in 0usize..3, db in 0usize..3) {
            let g = Grid::torus(&["x", "y", "z"], 4, 1.0).unwrap();
            let a = smooth_form(&g, da, 3, seed);
            let b = smooth_form(&g, db, 3, seed + 77);
            let ab = a.wedge(&b).unwrap().trace();
            let ba = b.wedge(&a).unwrap().trace();
            let sign = if (da * db) % 2 == 0 { 1.0 } else { -1.0 };
            if ab.num_components() > 0 {
                prop_assert!(ab.lincomb(c(1.0), &ba, c(-sign)).unwrap().norm_inf() < 1e-12);
            }
        }

        #[test]
        fn wedge_is_associative(seed in 0u64..10_000) {
            let g = Grid::torus(&["x", "y", "z"], 4, 1.0).unwrap();
            let a = smooth_form(&g, 1, 2, seed);
            let b = smooth_form(&g, 1, 2, seed + 1);
            let cc = smooth_form(&g, 1, 2, seed + 2);
            let l = a.wedge(&b).unwrap().wedge(&cc).unwrap();
            let r = a.wedge(&b.wedge(&cc).unwrap()).unwrap();
            prop_assert!(l.sub(&r).unwrap().norm_inf() < 1e-12);
        }
    }

    #[test]
    fn graded_leibniz_is_second_order() {
        let mut res = Vec::new();
        for n in [32, 64] {
            let g = Grid::torus(&["x", "y", "z"], n, 1.0).unwrap();
            let a = smooth_form(&g, 1, 2, 21);
            let b = smooth_form(&g, 1, 2, 22);
            let lhs = a.wedge(&b).unwrap().d();
            let rhs = a.d().wedge(&b).unwrap().sub(&a.wedge(&b.d()).unwrap()).unwrap();
            res.push(lhs.sub(&rhs).unwrap().norm_inf());
        }
        assert!((res[0] / res[1]).log2() > 1.9, "{res:?}");
    }
}
