use jacobi_sets::fields::{
    apply_noise, gen_analytic, load_grid, save_grid, FieldError, GaussianMixtureSpec, GridFormat,
    NoiseSpec, ScalarGrid,
};

#[test]
fn files_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let (f, _) = gen_analytic(17, &GaussianMixtureSpec::default()).unwrap();
    let f = apply_noise(&f, &NoiseSpec::default_for(&f, 3)).unwrap();
    for (name, format) in [
        ("f.jgrid", GridFormat::TextGrid),
        ("f.csv", GridFormat::CsvMatrix),
    ] {
        let path = dir.path().join(name);
        save_grid(&f, &path, format).unwrap();
        assert_eq!(GridFormat::from_path(&path), format);
        let back = load_grid(&path, format).unwrap();
        assert_eq!(back, f, "{name}");
    }
}

#[test]
fn text_grid_keeps_origin_and_spacing() {
    let dir = tempfile::tempdir().unwrap();
    let g = ScalarGrid::from_fn(3, 4, [-1.5, 2.0], [0.25, 0.5], |x, y| x * y).unwrap();
    let path = dir.path().join("g.jgrid");
    save_grid(&g, &path, GridFormat::TextGrid).unwrap();
    assert_eq!(load_grid(&path, GridFormat::TextGrid).unwrap(), g);
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_grid(dir.path().join("absent.jgrid"), GridFormat::TextGrid).unwrap_err();
    assert!(matches!(err, FieldError::Io(_)));
}
