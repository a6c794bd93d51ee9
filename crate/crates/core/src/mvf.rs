//! The `.mvf` field container.
//!
//! Layout: the 4-byte magic `MVF1`, a little-endian u64 header length, the
//! JSON header, then every component of the form in lexicographic subset
//! order, each as sites in row-major order of n×n row-major blocks of
//! (re, im) little-endian f64 pairs.

use crate::error::{Error, Result};
use crate::fields::{ConnectionField, PathField, ProjectionField, UnitaryField, Window};
use crate::form::MatrixForm;
use crate::grid::{Axis, Grid};
use crate::linalg::C64;
use serde::{Deserialize, Serialize};
use std::path::Path;

const MAGIC: &[u8; 4] = b"MVF1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MvfKind {
    Unitary,
    Projection,
    Connection,
    Form,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MvfHeader {
    pub axes: Vec<Axis>,
    pub degree: usize,
    pub matdim: usize,
    pub kind: MvfKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    /// Name of the axis a path or loop runs along.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_axis: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MvfFile {
    pub header: MvfHeader,
    pub form: MatrixForm,
}

impl MvfFile {
    pub fn new(kind: MvfKind, form: MatrixForm, window: Option<Window>, time_axis: Option<String>) -> MvfFile {
        let header = MvfHeader {
            axes: form.grid().axes().to_vec(),
            degree: form.degree(),
            matdim: form.matdim(),
            kind,
            window,
            time_axis,
        };
        MvfFile { header, form }
    }

    pub fn unitary(u: &UnitaryField) -> MvfFile {
        MvfFile::new(MvfKind::Unitary, u.values.clone(), Some(u.window), None)
    }

    pub fn projection(p: &ProjectionField) -> MvfFile {
        MvfFile::new(MvfKind::Projection, p.values.clone(), Some(p.window), None)
    }

    pub fn projection_path(p: &PathField<ProjectionField>) -> MvfFile {
        let mut f = MvfFile::projection(&p.field);
        f.header.time_axis = Some(p.time_axis_name().to_string());
        f
    }

    pub fn unitary_path(u: &PathField<UnitaryField>) -> MvfFile {
        let mut f = MvfFile::unitary(&u.field);
        f.header.time_axis = Some(u.time_axis_name().to_string());
        f
    }

    pub fn connection(c: &ConnectionField, time_axis: Option<&str>) -> MvfFile {
        MvfFile::new(MvfKind::Connection, c.form.clone(), None, time_axis.map(str::to_string))
    }

    pub fn grid(&self) -> &Grid {
        self.form.grid()
    }

    fn window(&self) -> Result<Window> {
        match self.header.window {
            Some(w) => Ok(w),
            None => Window::new(0, self.header.matdim as i64),
        }
    }

    fn expect(&self, kind: MvfKind) -> Result<()> {
        if self.header.kind != kind {
            return Err(Error::Format(format!("expected a {kind:?} file, found {:?}", self.header.kind)));
        }
        Ok(())
    }

    pub fn to_unitary(&self) -> Result<UnitaryField> {
        self.expect(MvfKind::Unitary)?;
        UnitaryField::new(self.window()?, self.form.clone())
    }

    pub fn to_projection(&self) -> Result<ProjectionField> {
        self.expect(MvfKind::Projection)?;
        ProjectionField::new(self.window()?, self.form.clone())
    }

    pub fn to_connection(&self) -> Result<ConnectionField> {
        self.expect(MvfKind::Connection)?;
        ConnectionField::new(self.form.clone())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = serde_json::to_vec(&self.header).map_err(|e| Error::Format(e.to_string()))?;
        let payload: usize = self.form.components().iter().map(|c| c.len() * 16).sum();
        let mut out = Vec::with_capacity(12 + header.len() + payload);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for comp in self.form.components() {
            for z in comp {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<MvfFile> {
        if bytes.len() < 12 || &bytes[..4] != MAGIC {
            return Err(Error::Format("missing MVF1 magic".into()));
        }
        let hlen = u64::from_le_bytes(bytes[4..12].try_into().expect("8 bytes")) as usize;
        let body = bytes.get(12..12 + hlen).ok_or_else(|| Error::Format("truncated header".into()))?;
        let header: MvfHeader = serde_json::from_slice(body).map_err(|e| Error::Format(e.to_string()))?;
        let grid = Grid::new(header.axes.clone())?;
        let ncomp = crate::form::subsets(grid.dim(), header.degree).len();
        let per = grid.nsites() * header.matdim * header.matdim;
        let payload = &bytes[12 + hlen..];
        if payload.len() != ncomp * per * 16 {
            return Err(Error::Format(format!("payload has {} bytes, expected {}", payload.len(), ncomp * per * 16)));
        }
        let f64_at = |i: usize| f64::from_le_bytes(payload[i * 8..i * 8 + 8].try_into().expect("8 bytes"));
        let comps = (0..ncomp)
            .map(|c| (0..per).map(|k| C64::new(f64_at(2 * (c * per + k)), f64_at(2 * (c * per + k) + 1))).collect())
            .collect();
        let form = MatrixForm::from_components(&grid, header.degree, header.matdim, comps)?;
        Ok(MvfFile { header, form })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<MvfFile> {
        MvfFile::from_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields;

    #[test]
    fn bytes_round_trip_is_exact() {
        let g = Grid::new(vec![Axis::periodic("x", 6, 1.0), Axis::interval("t", 5, 1.0)]).unwrap();
        let u = fields::random_unitary(&g, Window::new(-1, 1).unwrap(), 4, 1).unwrap();
        let f = MvfFile::unitary(&u);
        let back = MvfFile::from_bytes(&f.to_bytes().unwrap()).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_unitary().unwrap(), u);
        let two = MvfFile::new(MvfKind::Form, u.values.d(), None, None);
        assert_eq!(MvfFile::from_bytes(&two.to_bytes().unwrap()).unwrap(), two);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(MvfFile::from_bytes(b"nope").is_err());
        let g = Grid::torus(&["x"], 4, 1.0).unwrap();
        let f = MvfFile::unitary(&UnitaryField::identity(&g, Window::new(0, 1).unwrap()));
        let mut b = f.to_bytes().unwrap();
        b.pop();
        assert!(MvfFile::from_bytes(&b).is_err());
        assert!(f.to_projection().is_err());
    }
}
