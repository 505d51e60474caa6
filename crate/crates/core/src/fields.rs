//! Scalar fields sampled on regular 2D lattices.
//!
//! A [`ScalarGrid`] stores `nx * ny` samples in row-major order: sample
//! `(i, j)` sits at `origin + (i * dx, j * dy)` and lives at index
//! `j * nx + i`. This module also holds the two on-disk formats, the
//! Gaussian-mixture generator for the analytic test dataset and the seeded
//! salt-and-pepper / Gaussian noise model.
//!
//! Noise is drawn from ChaCha8 (`rand_chacha::ChaCha8Rng`, seeded with
//! `seed_from_u64`), which is a counter-based generator with independent
//! 64-bit streams. Gaussian variates use the ziggurat sampler of
//! `rand_distr::Normal`. Index selection for salt-and-pepper replacement uses
//! `rand::seq::index::sample`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building, parsing or perturbing scalar grids.
#[derive(Debug, Error)]
pub enum FieldError {
    #[error("grid must have at least 2x2 samples, got {nx}x{ny}")]
    TooSmall { nx: usize, ny: usize },

    #[error("grid spacing must be positive and finite, got ({dx}, {dy})")]
    BadSpacing { dx: f64, dy: f64 },

    #[error("expected {expected} samples for a {nx}x{ny} grid, got {found}")]
    ValueCount {
        nx: usize,
        ny: usize,
        expected: usize,
        found: usize,
    },

    #[error("sample {index} is not finite ({value})")]
    NonFiniteValue { index: usize, value: f64 },

    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },

    #[error("line {line}: expected {expected} values, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: cannot parse `{token}` as a number")]
    BadNumber { line: usize, token: String },

    #[error("line {line}: non-finite value `{token}`")]
    NonFinite { line: usize, token: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FieldError>;

/// A scalar field sampled on a regular lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarGrid {
    nx: usize,
    ny: usize,
    origin: [f64; 2],
    spacing: [f64; 2],
    values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(
        nx: usize,
        ny: usize,
        origin: [f64; 2],
        spacing: [f64; 2],
        values: Vec<f64>,
    ) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(FieldError::TooSmall { nx, ny });
        }
        let [dx, dy] = spacing;
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(FieldError::BadSpacing { dx, dy });
        }
        if !(origin[0].is_finite() && origin[1].is_finite()) {
            return Err(FieldError::InvalidParameter(format!(
                "origin must be finite, got ({}, {})",
                origin[0], origin[1]
            )));
        }
        let expected = nx * ny;
        if values.len() != expected {
            return Err(FieldError::ValueCount {
                nx,
                ny,
                expected,
                found: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(FieldError::NonFiniteValue { index, value });
        }
        Ok(Self {
            nx,
            ny,
            origin,
            spacing,
            values,
        })
    }

    /// Samples `func(x, y)` at every lattice point.
    pub fn from_fn(
        nx: usize,
        ny: usize,
        origin: [f64; 2],
        spacing: [f64; 2],
        mut func: impl FnMut(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let y = origin[1] + j as f64 * spacing[1];
            for i in 0..nx {
                values.push(func(origin[0] + i as f64 * spacing[0], y));
            }
        }
        Self::new(nx, ny, origin, spacing, values)
    }

    /// Samples `func` on an `n x n` lattice covering the unit square.
    pub fn unit_square(n: usize, func: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(FieldError::TooSmall { nx: n, ny: n });
        }
        let h = 1.0 / (n - 1) as f64;
        Self::from_fn(n, n, [0.0, 0.0], [h, h], func)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample at flat (row-major) index.
    #[inline]
    pub fn at(&self, index: usize) -> f64 {
        self.values[index]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    /// World coordinates of lattice point `(i, j)`.
    #[inline]
    pub fn position(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + i as f64 * self.spacing[0],
            self.origin[1] + j as f64 * self.spacing[1],
        ]
    }

    /// Smallest and largest sample.
    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// True when both grids share lattice size, origin and spacing.
    pub fn same_lattice(&self, other: &ScalarGrid) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.origin == other.origin
            && self.spacing == other.spacing
    }

    /// Flat index of the largest sample (first on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = k;
            }
        }
        best
    }

    /// Flat index of the smallest sample (first on ties).
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (k, &v) in self.values.iter().enumerate() {
            if v < self.values[best] {
                best = k;
            }
        }
        best
    }
}

/// On-disk grid encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridFormat {
    /// `JGRID 1` header, dimensions, placement, then one row per line.
    TextGrid,
    /// Bare comma-separated matrix on the unit square.
    CsvMatrix,
}

impl GridFormat {
    /// Guesses the format from a file extension (`.csv` is a matrix, anything
    /// else is a text grid).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => GridFormat::CsvMatrix,
            _ => GridFormat::TextGrid,
        }
    }
}

pub fn load_grid(path: impl AsRef<Path>, format: GridFormat) -> Result<ScalarGrid> {
    let text = fs::read_to_string(path)?;
    match format {
        GridFormat::TextGrid => parse_text_grid(&text),
        GridFormat::CsvMatrix => parse_csv_matrix(&text),
    }
}

pub fn save_grid(grid: &ScalarGrid, path: impl AsRef<Path>, format: GridFormat) -> Result<()> {
    let text = match format {
        GridFormat::TextGrid => format_text_grid(grid),
        GridFormat::CsvMatrix => format_csv_matrix(grid),
    };
    fs::write(path, text)?;
    Ok(())
}

fn parse_number(token: &str, line: usize) -> Result<f64> {
    let value: f64 = token.parse().map_err(|_| FieldError::BadNumber {
        line,
        token: token.to_string(),
    })?;
    if !value.is_finite() {
        return Err(FieldError::NonFinite {
            line,
            token: token.to_string(),
        });
    }
    Ok(value)
}

fn parse_row(text: &str, line: usize, expected: usize, sep: Option<char>) -> Result<Vec<f64>> {
    let tokens: Vec<&str> = match sep {
        Some(c) => text.split(c).map(str::trim).collect(),
        None => text.split_whitespace().collect(),
    };
    if tokens.len() != expected {
        return Err(FieldError::DimensionMismatch {
            line,
            expected,
            found: tokens.len(),
        });
    }
    tokens.iter().map(|t| parse_number(t, line)).collect()
}

/// Parses the `JGRID 1` text format.
pub fn parse_text_grid(text: &str) -> Result<ScalarGrid> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let header = |reason: &str, line: usize| FieldError::MalformedHeader {
        line,
        reason: reason.to_string(),
    };

    let (ln, magic) = lines.next().ok_or_else(|| header("empty file", 1))?;
    let magic: Vec<&str> = magic.split_whitespace().collect();
    if magic != ["JGRID", "1"] {
        return Err(header("expected `JGRID 1`", ln));
    }

    let (ln, dims) = lines
        .next()
        .ok_or_else(|| header("missing `nx ny` line", 2))?;
    let dims: Vec<&str> = dims.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(header("expected `nx ny`", ln));
    }
    let parse_dim = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| header(&format!("`{s}` is not a sample count"), ln))
    };
    let nx = parse_dim(dims[0])?;
    let ny = parse_dim(dims[1])?;
    if nx < 2 || ny < 2 {
        return Err(header(
            &format!("grid must be at least 2x2, got {nx}x{ny}"),
            ln,
        ));
    }

    let (ln, placement) = lines
        .next()
        .ok_or_else(|| header("missing `x0 y0 dx dy` line", 3))?;
    let placement = parse_row(placement, ln, 4, None).map_err(|e| match e {
        FieldError::DimensionMismatch { .. } => header("expected `x0 y0 dx dy`", ln),
        other => other,
    })?;
    if !(placement[2] > 0.0 && placement[3] > 0.0) {
        return Err(header("spacing must be positive", ln));
    }

    let mut values = Vec::with_capacity(nx * ny);
    let mut last_line = ln;
    for _ in 0..ny {
        let Some((ln, row)) = lines.next() else {
            return Err(FieldError::DimensionMismatch {
                line: last_line + 1,
                expected: nx * ny,
                found: values.len(),
            });
        };
        values.extend(parse_row(row, ln, nx, None)?);
        last_line = ln;
    }
    if let Some((ln, row)) = lines.next() {
        return Err(FieldError::DimensionMismatch {
            line: ln,
            expected: 0,
            found: row.split_whitespace().count(),
        });
    }

    ScalarGrid::new(
        nx,
        ny,
        [placement[0], placement[1]],
        [placement[2], placement[3]],
        values,
    )
}

/// Parses a bare CSV matrix (`ny` rows of `nx` columns) onto the unit square.
pub fn parse_csv_matrix(text: &str) -> Result<ScalarGrid> {
    let mut values = Vec::new();
    let mut nx = None;
    let mut ny = 0;
    for (k, row) in text.lines().enumerate() {
        if row.trim().is_empty() {
            continue;
        }
        let line = k + 1;
        let width = *nx.get_or_insert_with(|| row.split(',').count());
        values.extend(parse_row(row, line, width, Some(','))?);
        ny += 1;
    }
    let nx = nx.unwrap_or(0);
    if nx < 2 || ny < 2 {
        return Err(FieldError::TooSmall { nx, ny });
    }
    let spacing = [1.0 / (nx - 1) as f64, 1.0 / (ny - 1) as f64];
    ScalarGrid::new(nx, ny, [0.0, 0.0], spacing, values)
}

/// Canonical `JGRID 1` serialization. Floats use the shortest representation
/// that parses back to the identical `f64`.
pub fn format_text_grid(grid: &ScalarGrid) -> String {
    let mut out = String::with_capacity(grid.len() * 20 + 64);
    let [x0, y0] = grid.origin;
    let [dx, dy] = grid.spacing;
    let _ = writeln!(out, "JGRID 1");
    let _ = writeln!(out, "{} {}", grid.nx, grid.ny);
    let _ = writeln!(out, "{x0} {y0} {dx} {dy}");
    write_rows(&mut out, grid, ' ');
    out
}

pub fn format_csv_matrix(grid: &ScalarGrid) -> String {
    let mut out = String::with_capacity(grid.len() * 20);
    write_rows(&mut out, grid, ',');
    out
}

fn write_rows(out: &mut String, grid: &ScalarGrid, sep: char) {
    for row in grid.values.chunks(grid.nx) {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(sep);
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
}

/// One bivariate normal bump `amplitude * exp(-0.5 * d^T C^-1 d)`.
///
/// The bump is peak-normalized: its value at the mean equals `amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian2 {
    pub mean: [f64; 2],
    /// Symmetric covariance `[[sxx, sxy], [sxy, syy]]`.
    pub covariance: [[f64; 2]; 2],
    pub amplitude: f64,
}

impl Gaussian2 {
    pub fn isotropic(mean: [f64; 2], sigma: f64, amplitude: f64) -> Self {
        let var = sigma * sigma;
        Self {
            mean,
            covariance: [[var, 0.0], [0.0, var]],
            amplitude,
        }
    }

    fn precision(&self) -> Result<[f64; 3]> {
        let [[a, b], [c, d]] = self.covariance;
        let det = a * d - b * c;
        if b != c || !(a > 0.0 && det > 0.0) || !det.is_finite() {
            return Err(FieldError::InvalidParameter(format!(
                "covariance {:?} is not symmetric positive definite",
                self.covariance
            )));
        }
        Ok([d / det, -b / det, a / det])
    }
}

/// Two Gaussian mixtures, one per field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureSpec {
    pub f: Vec<Gaussian2>,
    pub g: Vec<Gaussian2>,
}

impl Default for GaussianMixtureSpec {
    /// Reconstruction of the analytic dataset: `f` is a positive and a
    /// negative bump, `g` a single wide bump. At 80x80 this produces a
    /// Jacobi set with closed loops.
    ///
    /// The `g` mean sits slightly off the square's center. At the exact
    /// center every even resolution puts four equidistant samples around
    /// the peak, `g` is constant on two triangles and their `kappa` is
    /// exactly zero, which breaks the even-degree property.
    fn default() -> Self {
        Self {
            f: vec![
                Gaussian2::isotropic([0.3, 0.3], 0.15, 1.0),
                Gaussian2::isotropic([0.7, 0.6], 0.15, -0.8),
            ],
            g: vec![Gaussian2::isotropic([0.5173, 0.4881], 0.2, 1.0)],
        }
    }
}

fn mixture_sampler(components: &[Gaussian2]) -> Result<impl Fn(f64, f64) -> f64 + '_> {
    let precisions = components
        .iter()
        .map(Gaussian2::precision)
        .collect::<Result<Vec<_>>>()?;
    Ok(move |x: f64, y: f64| {
        components
            .iter()
            .zip(&precisions)
            .map(|(c, &[pxx, pxy, pyy])| {
                let dx = x - c.mean[0];
                let dy = y - c.mean[1];
                let q = pxx * dx * dx + 2.0 * pxy * dx * dy + pyy * dy * dy;
                c.amplitude * (-0.5 * q).exp()
            })
            .sum()
    })
}

/// Samples both mixtures on an `n x n` lattice over the unit square.
pub fn gen_analytic(n: usize, params: &GaussianMixtureSpec) -> Result<(ScalarGrid, ScalarGrid)> {
    if n < 2 {
        return Err(FieldError::TooSmall { nx: n, ny: n });
    }
    let f = ScalarGrid::unit_square(n, mixture_sampler(&params.f)?)?;
    let g = ScalarGrid::unit_square(n, mixture_sampler(&params.g)?)?;
    Ok((f, g))
}

/// Salt-and-pepper replacement followed by additive i.i.d. Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Fraction of samples replaced by `low` or `high` (coin flip each).
    pub salt_pepper_fraction: f64,
    /// Replacement value for "pepper"; `None` means the field minimum.
    pub salt_pepper_low: Option<f64>,
    /// Replacement value for "salt"; `None` means the field maximum.
    pub salt_pepper_high: Option<f64>,
    /// Standard deviation in field-value units.
    pub gaussian_sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub const DEFAULT_FRACTION: f64 = 0.005;
    pub const DEFAULT_RELATIVE_SIGMA: f64 = 0.01;

    /// Noise that leaves every grid untouched.
    pub fn none(seed: u64) -> Self {
        Self {
            salt_pepper_fraction: 0.0,
            salt_pepper_low: None,
            salt_pepper_high: None,
            gaussian_sigma: 0.0,
            seed,
        }
    }

    /// Default noise for `grid`: 0.5% salt-and-pepper and a Gaussian with
    /// 1% of the value range as standard deviation.
    pub fn default_for(grid: &ScalarGrid, seed: u64) -> Self {
        let (lo, hi) = grid.range();
        Self {
            salt_pepper_fraction: Self::DEFAULT_FRACTION,
            salt_pepper_low: None,
            salt_pepper_high: None,
            gaussian_sigma: Self::DEFAULT_RELATIVE_SIGMA * (hi - lo),
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.salt_pepper_fraction) {
            return Err(FieldError::InvalidParameter(format!(
                "salt_pepper_fraction {} outside [0, 1]",
                self.salt_pepper_fraction
            )));
        }
        if !(self.gaussian_sigma >= 0.0 && self.gaussian_sigma.is_finite()) {
            return Err(FieldError::InvalidParameter(format!(
                "gaussian_sigma {} must be finite and nonnegative",
                self.gaussian_sigma
            )));
        }
        for v in [self.salt_pepper_low, self.salt_pepper_high]
            .into_iter()
            .flatten()
        {
            if !v.is_finite() {
                return Err(FieldError::InvalidParameter(format!(
                    "salt-and-pepper value {v} is not finite"
                )));
            }
        }
        Ok(())
    }
}

/// Applies `spec` on stream 0 of the seeded generator.
pub fn apply_noise(grid: &ScalarGrid, spec: &NoiseSpec) -> Result<ScalarGrid> {
    apply_noise_on_stream(grid, spec, 0)
}

/// Applies `spec` using an independent ChaCha8 stream, so that several
/// fields can share one seed without sharing random numbers.
pub fn apply_noise_on_stream(
    grid: &ScalarGrid,
    spec: &NoiseSpec,
    stream: u64,
) -> Result<ScalarGrid> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream);

    let mut values = grid.values.clone();
    let n = values.len();

    let replaced = (spec.salt_pepper_fraction * n as f64).round() as usize;
    if replaced > 0 {
        let (lo, hi) = grid.range();
        let low = spec.salt_pepper_low.unwrap_or(lo);
        let high = spec.salt_pepper_high.unwrap_or(hi);
        for k in index::sample(&mut rng, n, replaced.min(n)) {
            values[k] = if rng.random::<bool>() { high } else { low };
        }
    }

    if spec.gaussian_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.gaussian_sigma)
            .map_err(|e| FieldError::InvalidParameter(e.to_string()))?;
        for v in &mut values {
            *v += normal.sample(&mut rng);
        }
    }

    ScalarGrid::new(grid.nx, grid.ny, grid.origin, grid.spacing, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2x2() -> ScalarGrid {
        ScalarGrid::new(2, 2, [0.0, 0.0], [1.0, 1.0], vec![0.0, 1.0, 2.0, 3.0]).unwrap()
    }

    #[test]
    fn parses_small_text_grid() {
        let g = parse_text_grid("JGRID 1\n2 2\n0 0 1 1\n0 1\n2 3\n").unwrap();
        assert_eq!(g, grid2x2());
        assert_eq!(g.get(1, 1), 3.0);
    }

    #[test]
    fn rejects_value_count_mismatch() {
        let err = parse_text_grid("JGRID 1\n3 3\n0 0 1 1\n0 1 2\n3 4 5\n6 7\n").unwrap_err();
        assert!(matches!(
            err,
            FieldError::DimensionMismatch {
                line: 6,
                expected: 3,
                found: 2
            }
        ));
        let err = parse_text_grid("JGRID 1\n3 3\n0 0 1 1\n0 1 2\n3 4 5\n").unwrap_err();
        assert!(matches!(err, FieldError::DimensionMismatch { line: 6, .. }));
    }

    #[test]
    fn header_errors_name_the_line() {
        let err = parse_text_grid("JGRID 2\n2 2\n").unwrap_err();
        assert!(matches!(err, FieldError::MalformedHeader { line: 1, .. }));
        let err = parse_text_grid("JGRID 1\n2\n").unwrap_err();
        assert!(matches!(err, FieldError::MalformedHeader { line: 2, .. }));
        let err = parse_text_grid("JGRID 1\n2 2\n0 0 1\n").unwrap_err();
        assert!(matches!(err, FieldError::MalformedHeader { line: 3, .. }));
        let err = parse_text_grid("JGRID 1\n1 2\n0 0 1 1\n0\n1\n").unwrap_err();
        assert!(matches!(err, FieldError::MalformedHeader { line: 2, .. }));
    }

    #[test]
    fn rejects_non_finite_samples() {
        let err = parse_text_grid("JGRID 1\n2 2\n0 0 1 1\n0 NaN\n2 3\n").unwrap_err();
        assert!(matches!(err, FieldError::NonFinite { line: 4, .. }));
        let err = parse_csv_matrix("0,1\ninf,3\n").unwrap_err();
        assert!(matches!(err, FieldError::NonFinite { line: 2, .. }));
        let err = parse_csv_matrix("0,1\n2,x\n").unwrap_err();
        assert!(matches!(err, FieldError::BadNumber { line: 2, .. }));
    }

    #[test]
    fn csv_matrix_lands_on_unit_square() {
        let g = parse_csv_matrix("0,1,2\n3,4,5\n").unwrap();
        assert_eq!((g.nx(), g.ny()), (3, 2));
        assert_eq!(g.spacing(), [0.5, 1.0]);
        assert_eq!(g.position(2, 1), [1.0, 1.0]);
        assert!(parse_csv_matrix("0,1\n2\n").is_err());
    }

    #[test]
    fn text_round_trip_is_canonical() {
        let g = ScalarGrid::from_fn(3, 2, [-1.0, 0.5], [0.1, 0.3], |x, y| x.sin() * y + 1e-300)
            .unwrap();
        let text = format_text_grid(&g);
        let back = parse_text_grid(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(format_text_grid(&back), text);
    }

    #[test]
    fn constructor_checks_invariants() {
        assert!(ScalarGrid::new(1, 2, [0.0; 2], [1.0; 2], vec![0.0; 2]).is_err());
        assert!(ScalarGrid::new(2, 2, [0.0; 2], [0.0, 1.0], vec![0.0; 4]).is_err());
        assert!(ScalarGrid::new(2, 2, [0.0; 2], [1.0; 2], vec![0.0; 3]).is_err());
        assert!(ScalarGrid::new(2, 2, [0.0; 2], [1.0; 2], vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn gaussian_peak_at_mean() {
        let spec = GaussianMixtureSpec {
            f: vec![Gaussian2::isotropic([0.5, 0.5], 0.1, 1.0)],
            g: vec![],
        };
        let (f, g) = gen_analytic(3, &spec).unwrap();
        assert_eq!(f.get(1, 1), 1.0);
        assert!(g.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn anisotropic_gaussian_matches_closed_form() {
        let c = Gaussian2 {
            mean: [0.4, 0.6],
            covariance: [[0.04, 0.01], [0.01, 0.02]],
            amplitude: 2.0,
        };
        let spec = GaussianMixtureSpec {
            f: vec![c],
            g: vec![],
        };
        let (f, _) = gen_analytic(5, &spec).unwrap();
        // Direct inverse of the 2x2 covariance.
        let det: f64 = 0.04 * 0.02 - 0.01 * 0.01;
        let (x, y) = (0.75 - 0.4, 0.25 - 0.6);
        let q = (0.02 * x * x - 2.0 * 0.01 * x * y + 0.04 * y * y) / det;
        approx::assert_relative_eq!(f.get(3, 1), 2.0 * (-0.5 * q).exp(), max_relative = 1e-14);
    }

    #[test]
    fn rejects_indefinite_covariance() {
        let bad = Gaussian2 {
            mean: [0.5, 0.5],
            covariance: [[1.0, 2.0], [2.0, 1.0]],
            amplitude: 1.0,
        };
        let spec = GaussianMixtureSpec {
            f: vec![bad],
            g: vec![],
        };
        assert!(matches!(
            gen_analytic(4, &spec),
            Err(FieldError::InvalidParameter(_))
        ));
        let zero = Gaussian2::isotropic([0.5, 0.5], 0.0, 1.0);
        let spec = GaussianMixtureSpec {
            f: vec![],
            g: vec![zero],
        };
        assert!(gen_analytic(4, &spec).is_err());
        assert!(gen_analytic(1, &GaussianMixtureSpec::default()).is_err());
    }

    #[test]
    fn default_mixture_extrema_sit_near_means() {
        let n = 80;
        let h = 1.0 / (n - 1) as f64;
        let spec = GaussianMixtureSpec::default();
        let (f, g) = gen_analytic(n, &spec).unwrap();
        let pos = |grid: &ScalarGrid, k: usize| grid.position(k % n, k / n);
        let near = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).abs() <= h && (p[1] - q[1]).abs() <= h;
        assert!(near(pos(&f, f.argmax()), spec.f[0].mean));
        assert!(near(pos(&f, f.argmin()), spec.f[1].mean));
        assert!(near(pos(&g, g.argmax()), spec.g[0].mean));
    }

    #[test]
    fn zero_noise_is_identity() {
        let g = grid2x2();
        assert_eq!(apply_noise(&g, &NoiseSpec::none(9)).unwrap(), g);
    }

    #[test]
    fn full_replacement_uses_replacement_value() {
        let g = ScalarGrid::unit_square(10, |x, y| x + y).unwrap();
        let spec = NoiseSpec {
            salt_pepper_fraction: 1.0,
            salt_pepper_low: Some(7.0),
            salt_pepper_high: Some(7.0),
            gaussian_sigma: 0.0,
            seed: 3,
        };
        let out = apply_noise(&g, &spec).unwrap();
        assert!(out.values().iter().all(|&v| v == 7.0));
    }

    #[test]
    fn salt_pepper_replaces_exact_count() {
        let g = ScalarGrid::unit_square(20, |_, _| 0.5).unwrap();
        let spec = NoiseSpec {
            salt_pepper_fraction: 0.013,
            salt_pepper_low: Some(0.0),
            salt_pepper_high: Some(1.0),
            gaussian_sigma: 0.0,
            seed: 11,
        };
        let out = apply_noise(&g, &spec).unwrap();
        let changed = out.values().iter().filter(|&&v| v != 0.5).count();
        assert_eq!(changed, (0.013f64 * 400.0).round() as usize);
    }

    #[test]
    fn gaussian_noise_mean_is_bounded() {
        let n = 64;
        let g = ScalarGrid::unit_square(n, |_, _| 2.0).unwrap();
        let sigma = 0.01;
        let spec = NoiseSpec {
            salt_pepper_fraction: 0.0,
            salt_pepper_low: None,
            salt_pepper_high: None,
            gaussian_sigma: sigma,
            seed: 42,
        };
        let out = apply_noise(&g, &spec).unwrap();
        let mean = out.values().iter().sum::<f64>() / out.len() as f64;
        assert!((mean - 2.0).abs() <= 3.0 * sigma / ((n * n) as f64).sqrt());
    }

    #[test]
    fn noise_is_reproducible_and_streams_differ() {
        let g = ScalarGrid::unit_square(16, |x, y| x * y).unwrap();
        let spec = NoiseSpec::default_for(&g, 42);
        let a = apply_noise(&g, &spec).unwrap();
        let b = apply_noise(&g, &spec).unwrap();
        assert_eq!(a, b);
        let c = apply_noise_on_stream(&g, &spec, 1).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_noise_is_rejected() {
        let g = grid2x2();
        let mut spec = NoiseSpec::none(0);
        spec.salt_pepper_fraction = 1.5;
        assert!(apply_noise(&g, &spec).is_err());
        let mut spec = NoiseSpec::none(0);
        spec.gaussian_sigma = -1.0;
        assert!(apply_noise(&g, &spec).is_err());
    }
}
