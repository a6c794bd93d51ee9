use chern_lab::fields::{self, PathField, Window};
use chern_lab::mvf::{MvfFile, MvfKind};
use chern_lab::Grid;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_fields_round_trip_bit_exactly(seed in 0u64..1000, size in 4usize..9, rank in 1usize..3) {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::torus(&["x", "y"], size, 1.0).unwrap();
        let w = Window::new(-1, 2).unwrap();
        let u = MvfFile::unitary(&fields::random_unitary(&g, w, seed, 1).unwrap());
        let p = MvfFile::projection(&fields::random_projection(&g, w, seed, 1, rank).unwrap());
        for (i, f) in [u, p].into_iter().enumerate() {
            let path = dir.path().join(format!("{i}.mvf"));
            f.write(&path).unwrap();
            let back = MvfFile::read(&path).unwrap();
            prop_assert_eq!(&back.header, &f.header);
            prop_assert_eq!(back.form.components(), f.form.components());
        }
    }
}

#[test]
fn loops_keep_their_time_axis() {
    let g = Grid::torus(&["x", "t"], 6, 1.0).unwrap();
    let p = fields::random_projection(&g, Window::new(0, 2).unwrap(), 3, 1, 1).unwrap();
    let f = MvfFile::projection_path(&PathField::new(p, "t").unwrap());
    let back = MvfFile::from_bytes(&f.to_bytes().unwrap()).unwrap();
    assert_eq!(back.header.kind, MvfKind::Projection);
    assert_eq!(back.header.time_axis.as_deref(), Some("t"));
    back.to_projection().unwrap();
}

#[test]
fn damaged_bytes_are_rejected() {
    let g = Grid::torus(&["x"], 8, 1.0).unwrap();
    let f = MvfFile::unitary(&fields::winding_unitary(&g, "x", &[1], Window::new(0, 1).unwrap()).unwrap());
    let bytes = f.to_bytes().unwrap();
    assert!(MvfFile::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    assert!(MvfFile::from_bytes(b"MVF0").is_err());
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(MvfFile::from_bytes(&bad).is_err());
}
