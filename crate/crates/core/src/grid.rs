//! Sampled products of circles and intervals.
//!
//! Sites are stored row-major (last axis fastest). Periodic axes of length L
//! with N points have spacing L/N and omit the endpoint; interval axes have
//! spacing L/(N−1), include both endpoints and must have an odd point count
//! so composite Simpson applies.

use crate::error::{Error, Result};
use crate::linalg::C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub size: usize,
    pub periodic: bool,
    pub length: f64,
}

impl Axis {
    pub fn periodic(name: &str, size: usize, length: f64) -> Axis {
        Axis { name: name.into(), size, periodic: true, length }
    }

    pub fn interval(name: &str, size: usize, length: f64) -> Axis {
        Axis { name: name.into(), size, periodic: false, length }
    }

    pub fn spacing(&self) -> f64 {
        if self.periodic {
            self.length / self.size as f64
        } else {
            self.length / (self.size - 1) as f64
        }
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Trapezoid weights on periodic axes, Simpson weights on intervals.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        if self.periodic {
            return vec![h; self.size];
        }
        let n = self.size;
        (0..n)
            .map(|i| {
                let w = if i == 0 || i == n - 1 {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * h / 3.0
            })
            .collect()
    }

    fn check(&self) -> Result<()> {
        if self.size < 4 {
            return Err(Error::InvalidGrid(format!("axis {} has {} < 4 points", self.name, self.size)));
        }
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::InvalidGrid(format!("axis {} has non-positive length", self.name)));
        }
        if !self.periodic && self.size.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "interval axis {} needs an odd point count for Simpson, got {}",
                self.name, self.size
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
    strides: Vec<usize>,
    nsites: usize,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Grid> {
        for (i, a) in axes.iter().enumerate() {
            a.check()?;
            if axes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::InvalidGrid(format!("duplicate axis name {}", a.name)));
            }
        }
        let mut strides = vec![1; axes.len()];
        for i in (0..axes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * axes[i + 1].size;
        }
        let nsites = axes.iter().map(|a| a.size).product();
        Ok(Grid { axes, strides, nsites })
    }

    /// All-periodic grid with the given axis names, equal sizes and lengths.
    pub fn torus(names: &[&str], size: usize, length: f64) -> Result<Grid> {
        Grid::new(names.iter().map(|n| Axis::periodic(n, size, length)).collect())
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn nsites(&self) -> usize {
        self.nsites
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn axis_index(&self, name: &str) -> Result<usize> {
        self.axes.iter().position(|a| a.name == name).ok_or_else(|| Error::AxisNotFound(name.to_string()))
    }

    pub fn all_periodic(&self) -> bool {
        self.axes.iter().all(|a| a.periodic)
    }

    pub fn multi_index(&self, mut site: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in 0..self.dim() {
            idx[a] = site / self.strides[a];
            site %= self.strides[a];
        }
        idx
    }

    pub fn site(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Coordinates of a site.
    pub fn point(&self, site: usize) -> Vec<f64> {
        self.multi_index(site).iter().zip(&self.axes).map(|(&i, a)| a.coord(i)).collect()
    }

    pub fn without_axis(&self, axis: usize) -> Result<Grid> {
        let mut axes = self.axes.clone();
        axes.remove(axis);
        Grid::new(axes)
    }

    /// Product grid: axes of `self` followed by axes of `other`.
    pub fn product(&self, other: &Grid) -> Result<Grid> {
        let mut axes = self.axes.clone();
        axes.extend(other.axes.iter().cloned());
        Grid::new(axes)
    }

    pub fn with_axis(&self, axis: Axis) -> Result<Grid> {
        let mut axes = self.axes.clone();
        axes.push(axis);
        Grid::new(axes)
    }

    /// Site weights of the product quadrature.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = self.axes.iter().map(|a| a.weights()).collect();
        (0..self.nsites)
            .map(|s| self.multi_index(s).iter().enumerate().map(|(a, &i)| per_axis[a][i]).product())
            .collect()
    }

    /// Indices along `axis` and weights of the derivative at index i.
    pub fn stencil(&self, axis: usize, i: usize, scale: f64) -> [(usize, f64); 3] {
        let ax = &self.axes[axis];
        let n = ax.size;
        let c = scale / (2.0 * ax.spacing());
        if ax.periodic {
            [((i + 1) % n, c), ((i + n - 1) % n, -c), (i, 0.0)]
        } else if i == 0 {
            [(0, -3.0 * c), (1, 4.0 * c), (2, -c)]
        } else if i == n - 1 {
            [(n - 1, 3.0 * c), (n - 2, -4.0 * c), (n - 3, c)]
        } else {
            [(i + 1, c), (i - 1, -c), (i, 0.0)]
        }
    }

    /// Neighbor sites and weights of the derivative along `axis` at `site`.
    pub fn site_stencil(&self, site: usize, axis: usize) -> [(usize, f64); 3] {
        let stride = self.strides[axis];
        let i = (site / stride) % self.axes[axis].size;
        let origin = site - i * stride;
        self.stencil(axis, i, 1.0).map(|(j, w)| (origin + j * stride, w))
    }

    /// out += scale·∂_axis(data), where data holds `bs` values per site.
    /// Central differences in the interior and on periodic axes, one-sided
    /// second-order stencils at interval ends.
    pub fn deriv_acc(&self, out: &mut [C64], data: &[C64], bs: usize, axis: usize, scale: f64) {
        let ax = &self.axes[axis];
        let n = ax.size;
        let inner = self.strides[axis] * bs;
        let outer = self.nsites / (n * self.strides[axis]);
        for o in 0..outer {
            let base = o * n * inner;
            for i in 0..n {
                let dst = base + i * inner;
                for (j, w) in self.stencil(axis, i, scale) {
                    if w == 0.0 {
                        continue;
                    }
                    let src = base + j * inner;
                    for k in 0..inner {
                        out[dst + k] += data[src + k] * w;
                    }
                }
            }
        }
    }

    pub fn deriv(&self, data: &[C64], bs: usize, axis: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); data.len()];
        self.deriv_acc(&mut out, data, bs, axis, 1.0);
        out
    }

    /// Copies the hyperplane `axis = index` out of a per-site array.
    pub fn slice(&self, data: &[C64], bs: usize, axis: usize, index: usize) -> Vec<C64> {
        let n = self.axes[axis].size;
        let inner = self.strides[axis] * bs;
        let outer = self.nsites / (n * self.strides[axis]);
        let mut out = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let start = (o * n + index) * inner;
            out.extend_from_slice(&data[start..start + inner]);
        }
        out
    }

    /// Inverse of `slice` over all indices: builds a per-site array on
    /// `self` from per-index slices on the grid without `axis`.
    pub fn stack(&self, slices: &[Vec<C64>], bs: usize, axis: usize) -> Vec<C64> {
        let n = self.axes[axis].size;
        assert_eq!(slices.len(), n);
        let inner = self.strides[axis] * bs;
        let outer = self.nsites / (n * self.strides[axis]);
        let mut out = Vec::with_capacity(self.nsites * bs);
        for o in 0..outer {
            for s in slices {
                out.extend_from_slice(&s[o * inner..(o + 1) * inner]);
            }
        }
        out
    }
}
