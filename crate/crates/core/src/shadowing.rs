//! Spatially correlated log-normal shadowing.
//!
//! Each base station owns a zero-mean Gaussian field (in dB) over the map
//! whose covariance between two points at distance `L` is
//! `sigma_s² · exp(−L / d_c)`. Fields are synthesized on a regular grid and
//! read back with bilinear interpolation.
//!
//! Two synthesis routes are available. Circulant embedding places the grid
//! inside a periodic torus, diagonalizes the (block-circulant) covariance with
//! a 2-D FFT and colors white noise in the spectral domain; it is exact as
//! long as the embedding spectrum is nonnegative, which is enforced by growing
//! the torus. The dense route factors the full covariance matrix with a
//! Cholesky decomposition and is only practical for small grids.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::geometry::{Position, Rectangle};

/// Largest grid (in nodes) the dense Cholesky route accepts.
pub const DENSE_MAX_NODES: usize = 2500;

const BINARY_MAGIC: &[u8; 8] = b"IRLVSHF1";

/// Relative size of the most negative embedding eigenvalue that is still
/// treated as round-off and clipped to zero.
const EMBEDDING_TOLERANCE: f64 = 1e-9;

/// Covariance `sigma² · exp(−lag / d_c)`.
pub fn exponential_covariance(lag: f64, sigma_s_db: f64, d_c_m: f64) -> f64 {
    sigma_s_db * sigma_s_db * (-lag / d_c_m).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldMethod {
    /// Circulant embedding, falling back to the dense route for small grids
    /// whose embedding cannot be made nonnegative.
    #[default]
    Auto,
    Circulant,
    Dense,
}

/// Regular grid: node `(i, j)` sits at `origin + (i, j) · spacing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: Position,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Smallest grid with the given spacing that covers `bounds`.
    pub fn covering(bounds: &Rectangle, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter("grid spacing must be positive".into()));
        }
        let nodes = |extent: f64| (extent / spacing - 1e-9).ceil().max(1.0) as usize + 1;
        Ok(Self {
            origin: bounds.min(),
            spacing,
            nx: nodes(bounds.width()),
            ny: nodes(bounds.height()),
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, i: usize, j: usize) -> Position {
        Position::new(
            self.origin.x + i as f64 * self.spacing,
            self.origin.y + j as f64 * self.spacing,
        )
    }
}

/// One realization of a shadowing field, in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowingField {
    grid: GridSpec,
    values: Vec<f64>,
    sigma_s_db: f64,
    d_c_m: f64,
    seed: u64,
}

impl ShadowingField {
    pub fn from_parts(
        grid: GridSpec,
        values: Vec<f64>,
        sigma_s_db: f64,
        d_c_m: f64,
        seed: u64,
    ) -> Result<Self> {
        if grid.nx < 2 || grid.ny < 2 || !(grid.spacing > 0.0) {
            return Err(Error::InvalidParameter("field grid needs at least 2x2 nodes".into()));
        }
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("field values must be finite".into()));
        }
        Ok(Self {
            grid,
            values,
            sigma_s_db,
            d_c_m,
            seed,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Node values, row-major with `x` varying fastest.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node_value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn sigma_s_db(&self) -> f64 {
        self.sigma_s_db
    }

    pub fn d_c_m(&self) -> f64 {
        self.d_c_m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Bilinear interpolation of the four nodes surrounding `pos`.
    pub fn value_at(&self, pos: Position) -> Result<f64> {
        let g = &self.grid;
        let locate = |coord: f64, origin: f64, n: usize| -> Option<(usize, f64)> {
            let f = (coord - origin) / g.spacing;
            let last = (n - 1) as f64;
            if !(f >= -1e-9 && f <= last + 1e-9) {
                return None;
            }
            let f = f.clamp(0.0, last);
            let i = (f.floor() as usize).min(n - 2);
            Some((i, f - i as f64))
        };
        let (Some((i, tx)), Some((j, ty))) = (
            locate(pos.x, g.origin.x, g.nx),
            locate(pos.y, g.origin.y, g.ny),
        ) else {
            return Err(Error::OutsideGrid { x: pos.x, y: pos.y });
        };
        let v00 = self.node_value(i, j);
        let v10 = self.node_value(i + 1, j);
        let v01 = self.node_value(i, j + 1);
        let v11 = self.node_value(i + 1, j + 1);
        Ok((1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11))
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BINARY_MAGIC)?;
        for v in [
            self.grid.origin.x,
            self.grid.origin.y,
            self.grid.spacing,
            self.sigma_s_db,
            self.d_c_m,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in [self.grid.nx as u64, self.grid.ny as u64, self.seed] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::Parse("not a shadowing field file".into()));
        }
        let mut word = [0u8; 8];
        let mut f64s = [0.0; 5];
        for v in &mut f64s {
            r.read_exact(&mut word)?;
            *v = f64::from_le_bytes(word);
        }
        let mut u64s = [0u64; 3];
        for v in &mut u64s {
            r.read_exact(&mut word)?;
            *v = u64::from_le_bytes(word);
        }
        let [ox, oy, spacing, sigma, dc] = f64s;
        let [nx, ny, seed] = u64s;
        let grid = GridSpec {
            origin: Position::new(ox, oy),
            spacing,
            nx: nx as usize,
            ny: ny as usize,
        };
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            r.read_exact(&mut word)?;
            values.push(f64::from_le_bytes(word));
        }
        Self::from_parts(grid, values, sigma, dc, seed)
    }

    /// CSV grid: a header record, a metadata record, then one record per grid
    /// row (`y` index) holding the `nx` node values. Values use the shortest
    /// representation that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
        out.write_record([
            "origin_x", "origin_y", "spacing", "nx", "ny", "sigma_s_db", "d_c_m", "seed",
        ])?;
        out.write_record([
            self.grid.origin.x.to_string(),
            self.grid.origin.y.to_string(),
            self.grid.spacing.to_string(),
            self.grid.nx.to_string(),
            self.grid.ny.to_string(),
            self.sigma_s_db.to_string(),
            self.d_c_m.to_string(),
            self.seed.to_string(),
        ])?;
        for row in self.values.chunks(self.grid.nx) {
            out.write_record(row.iter().map(f64::to_string))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .flexible(true)
            .has_headers(true)
            .from_reader(r);
        let mut records = rdr.records();
        let meta = records
            .next()
            .ok_or_else(|| Error::Parse("missing metadata record".into()))??;
        if meta.len() != 8 {
            return Err(Error::Parse("metadata record needs 8 fields".into()));
        }
        let num = |k: usize| -> Result<f64> {
            meta[k]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("metadata field {k}: {e}")))
        };
        let int = |k: usize| -> Result<u64> {
            meta[k]
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::Parse(format!("metadata field {k}: {e}")))
        };
        let grid = GridSpec {
            origin: Position::new(num(0)?, num(1)?),
            spacing: num(2)?,
            nx: int(3)? as usize,
            ny: int(4)? as usize,
        };
        let mut values = Vec::with_capacity(grid.len());
        for record in records {
            let record = record?;
            if record.len() != grid.nx {
                return Err(Error::Parse(format!(
                    "grid row has {} values, expected {}",
                    record.len(),
                    grid.nx
                )));
            }
            for v in record.iter() {
                values.push(
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("grid value: {e}")))?,
                );
            }
        }
        Self::from_parts(grid, values, num(5)?, num(6)?, int(7)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        if path.extension().is_some_and(|e| e == "csv") {
            self.write_csv(file)
        } else {
            self.write_binary(file)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        if path.extension().is_some_and(|e| e == "csv") {
            Self::read_csv(file)
        } else {
            Self::read_binary(file)
        }
    }
}

enum Synthesis {
    Zero,
    Circulant {
        mx: usize,
        my: usize,
        /// sqrt(eigenvalue / (mx·my)), row-major with x fastest.
        scale: Vec<f64>,
        fft_x: Arc<dyn Fft<f64>>,
        fft_y: Arc<dyn Fft<f64>>,
    },
    Dense {
        lower: DMatrix<f64>,
    },
}

/// Precomputed synthesis state for one grid and covariance; produces a new
/// independent field for every seed.
pub struct ShadowingGenerator {
    grid: GridSpec,
    sigma_s_db: f64,
    d_c_m: f64,
    synthesis: Synthesis,
}

impl std::fmt::Debug for ShadowingGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let method = match &self.synthesis {
            Synthesis::Zero => "zero".to_string(),
            Synthesis::Circulant { mx, my, .. } => format!("circulant {mx}x{my}"),
            Synthesis::Dense { .. } => "dense".to_string(),
        };
        f.debug_struct("ShadowingGenerator")
            .field("grid", &self.grid)
            .field("sigma_s_db", &self.sigma_s_db)
            .field("d_c_m", &self.d_c_m)
            .field("method", &method)
            .finish()
    }
}

impl ShadowingGenerator {
    /// Prepares synthesis over a grid of the given spacing covering `bounds`.
    /// The spacing must not exceed `d_c / 5`.
    pub fn new(
        bounds: Rectangle,
        params: &ChannelParams,
        spacing: f64,
        method: FieldMethod,
    ) -> Result<Self> {
        params.validate()?;
        let limit = params.d_c_m / 5.0;
        if spacing > limit {
            return Err(Error::GridTooCoarse { spacing, limit });
        }
        let grid = GridSpec::covering(&bounds, spacing)?;
        let (sigma, dc) = (params.sigma_s_db, params.d_c_m);
        let synthesis = if sigma == 0.0 {
            Synthesis::Zero
        } else {
            match method {
                FieldMethod::Circulant => circulant(&grid, sigma, dc)?,
                FieldMethod::Dense => dense(&grid, sigma, dc)?,
                FieldMethod::Auto => match circulant(&grid, sigma, dc) {
                    Ok(s) => s,
                    Err(Error::EmbeddingIndefinite(_)) if grid.len() <= DENSE_MAX_NODES => {
                        dense(&grid, sigma, dc)?
                    }
                    Err(e) => return Err(e),
                },
            }
        };
        Ok(Self {
            grid,
            sigma_s_db: sigma,
            d_c_m: dc,
            synthesis,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Size of the periodic embedding, if the circulant route is in use.
    pub fn embedding_size(&self) -> Option<(usize, usize)> {
        match self.synthesis {
            Synthesis::Circulant { mx, my, .. } => Some((mx, my)),
            _ => None,
        }
    }

    /// Deterministic field realization for `seed`.
    pub fn generate(&self, seed: u64) -> ShadowingField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = &self.grid;
        let values = match &self.synthesis {
            Synthesis::Zero => vec![0.0; g.len()],
            Synthesis::Circulant {
                mx,
                my,
                scale,
                fft_x,
                fft_y,
            } => {
                let mut buf: Vec<Complex<f64>> = scale
                    .iter()
                    .map(|s| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        Complex::new(s * re, s * im)
                    })
                    .collect();
                fft2(&mut buf, *mx, *my, fft_x.as_ref(), fft_y.as_ref());
                let mut values = Vec::with_capacity(g.len());
                for j in 0..g.ny {
                    values.extend(buf[j * mx..j * mx + g.nx].iter().map(|z| z.re));
                }
                values
            }
            Synthesis::Dense { lower } => {
                let z = DVector::from_iterator(
                    g.len(),
                    (0..g.len()).map(|_| StandardNormal.sample(&mut rng)),
                );
                (lower * z).iter().copied().collect()
            }
        };
        ShadowingField {
            grid: *g,
            values,
            sigma_s_db: self.sigma_s_db,
            d_c_m: self.d_c_m,
            seed,
        }
    }
}

/// One-shot helper: builds a generator over `bounds` and draws one field.
pub fn generate_shadowing_field(
    bounds: Rectangle,
    params: &ChannelParams,
    spacing: f64,
    seed: u64,
) -> Result<ShadowingField> {
    Ok(ShadowingGenerator::new(bounds, params, spacing, FieldMethod::Auto)?.generate(seed))
}

fn fft2(buf: &mut [Complex<f64>], mx: usize, my: usize, fft_x: &dyn Fft<f64>, fft_y: &dyn Fft<f64>) {
    // Rows are contiguous; rustfft transforms every chunk of length mx.
    fft_x.process(buf);
    let mut cols = vec![Complex::new(0.0, 0.0); mx * my];
    for j in 0..my {
        for i in 0..mx {
            cols[i * my + j] = buf[j * mx + i];
        }
    }
    fft_y.process(&mut cols);
    for i in 0..mx {
        for j in 0..my {
            buf[j * mx + i] = cols[i * my + j];
        }
    }
}

fn circulant(grid: &GridSpec, sigma: f64, dc: f64) -> Result<Synthesis> {
    let mut planner = FftPlanner::new();
    let mut mx = 2 * (grid.nx - 1);
    let mut my = 2 * (grid.ny - 1);
    let mut worst = f64::NEG_INFINITY;
    // Grow the torus until the embedding spectrum is nonnegative.
    for _ in 0..8 {
        let fft_x = planner.plan_fft_forward(mx);
        let fft_y = planner.plan_fft_forward(my);
        let mut buf = Vec::with_capacity(mx * my);
        for j in 0..my {
            let dy = j.min(my - j) as f64;
            for i in 0..mx {
                let dx = i.min(mx - i) as f64;
                let lag = grid.spacing * dx.hypot(dy);
                buf.push(Complex::new(exponential_covariance(lag, sigma, dc), 0.0));
            }
        }
        fft2(&mut buf, mx, my, fft_x.as_ref(), fft_y.as_ref());
        let max = buf.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let min = buf.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        worst = min / max;
        if worst >= -EMBEDDING_TOLERANCE {
            let m = (mx * my) as f64;
            let scale = buf.iter().map(|z| (z.re.max(0.0) / m).sqrt()).collect();
            return Ok(Synthesis::Circulant {
                mx,
                my,
                scale,
                fft_x,
                fft_y,
            });
        }
        mx = grow(mx);
        my = grow(my);
    }
    Err(Error::EmbeddingIndefinite(worst))
}

fn grow(m: usize) -> usize {
    let next = m + m / 4;
    next + next % 2
}

fn dense(grid: &GridSpec, sigma: f64, dc: f64) -> Result<Synthesis> {
    let n = grid.len();
    if n > DENSE_MAX_NODES {
        return Err(Error::InvalidParameter(format!(
            "dense synthesis supports at most {DENSE_MAX_NODES} nodes, grid has {n}"
        )));
    }
    let nodes: Vec<Position> = (0..grid.ny)
        .flat_map(|j| (0..grid.nx).map(move |i| (i, j)))
        .map(|(i, j)| grid.node(i, j))
        .collect();
    let cov = DMatrix::from_fn(n, n, |r, c| {
        exponential_covariance(nodes[r].distance(&nodes[c]), sigma, dc)
    });
    let chol = nalgebra::Cholesky::new(cov).ok_or(Error::NotPositiveDefinite)?;
    Ok(Synthesis::Dense { lower: chol.unpack() })
}

/// Empirical covariance at a lag of `lag_nodes` grid steps, averaged over all
/// horizontal and vertical node pairs of every field. The fields are zero-mean
/// by construction, so no sample mean is subtracted.
pub fn lag_covariance(fields: &[ShadowingField], lag_nodes: usize) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for f in fields {
        let g = f.grid();
        for j in 0..g.ny {
            for i in 0..g.nx {
                let v = f.node_value(i, j);
                if i + lag_nodes < g.nx {
                    sum += v * f.node_value(i + lag_nodes, j);
                    count += 1;
                }
                if j + lag_nodes < g.ny {
                    sum += v * f.node_value(i, j + lag_nodes);
                    count += 1;
                }
            }
        }
    }
    sum / count as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square(side: f64) -> Rectangle {
        Rectangle::new(Position::new(0.0, 0.0), Position::new(side, side)).unwrap()
    }

    #[test]
    fn spacing_limit() {
        let p = ChannelParams::default();
        let err = ShadowingGenerator::new(square(100.0), &p, 16.0, FieldMethod::Auto).unwrap_err();
        assert!(matches!(err, Error::GridTooCoarse { .. }));
        assert!(ShadowingGenerator::new(square(100.0), &p, 15.0, FieldMethod::Auto).is_ok());
    }

    #[test]
    fn grid_covers_bounds() {
        let g = GridSpec::covering(&square(525.0), 5.0).unwrap();
        assert_eq!((g.nx, g.ny), (106, 106));
        let g = GridSpec::covering(&square(523.0), 5.0).unwrap();
        assert!(g.node(g.nx - 1, 0).x >= 523.0);
    }

    #[test]
    fn same_seed_bit_identical() {
        let p = ChannelParams::default();
        let gen = ShadowingGenerator::new(square(525.0), &p, 5.0, FieldMethod::Circulant).unwrap();
        let a = gen.generate(11);
        let b = gen.generate(11);
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), gen.generate(12).values());
    }

    #[test]
    fn zero_sigma_gives_zero_field() {
        let p = ChannelParams::default().without_shadowing();
        let f = generate_shadowing_field(square(100.0), &p, 5.0, 3).unwrap();
        assert!(f.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn interpolation_identities() {
        let p = ChannelParams::default();
        let f = generate_shadowing_field(square(100.0), &p, 5.0, 4).unwrap();
        assert_eq!(f.value_at(Position::new(15.0, 35.0)).unwrap(), f.node_value(3, 7));
        let mid = f.value_at(Position::new(17.5, 35.0)).unwrap();
        let avg = 0.5 * (f.node_value(3, 7) + f.node_value(4, 7));
        assert!((mid - avg).abs() < 1e-12);
        // Far edge of the grid is still readable.
        assert!(f.value_at(Position::new(100.0, 100.0)).is_ok());
        assert!(matches!(
            f.value_at(Position::new(-1.0, 5.0)),
            Err(Error::OutsideGrid { .. })
        ));
        assert!(f.value_at(Position::new(5.0, 100.5)).is_err());
    }

    proptest! {
        #[test]
        fn interpolation_is_convex(x in 0.0..100.0f64, y in 0.0..100.0f64) {
            let p = ChannelParams::default();
            let f = generate_shadowing_field(square(100.0), &p, 5.0, 5).unwrap();
            let (i, j) = (((x / 5.0).floor() as usize).min(19), ((y / 5.0).floor() as usize).min(19));
            let corners = [
                f.node_value(i, j), f.node_value(i + 1, j),
                f.node_value(i, j + 1), f.node_value(i + 1, j + 1),
            ];
            let lo = corners.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let v = f.value_at(Position::new(x, y)).unwrap();
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }

    #[test]
    fn binary_and_csv_round_trip() {
        let p = ChannelParams::default();
        let f = generate_shadowing_field(square(60.0), &p, 5.0, 6).unwrap();
        let mut bin = Vec::new();
        f.write_binary(&mut bin).unwrap();
        assert_eq!(ShadowingField::read_binary(bin.as_slice()).unwrap(), f);
        let mut text = Vec::new();
        f.write_csv(&mut text).unwrap();
        assert_eq!(ShadowingField::read_csv(text.as_slice()).unwrap(), f);
        assert!(ShadowingField::read_binary(&b"garbage!"[..]).is_err());
    }

    #[test]
    fn embedding_is_nonnegative_for_map_grid() {
        let p = ChannelParams::default();
        let gen = ShadowingGenerator::new(square(525.0), &p, 5.0, FieldMethod::Circulant).unwrap();
        assert!(gen.embedding_size().is_some());
    }

    // Point statistics over many realizations, for both synthesis routes.
    fn point_stats(method: FieldMethod, n: u64) -> (f64, f64, f64) {
        let p = ChannelParams::default();
        let gen = ShadowingGenerator::new(square(150.0), &p, 7.5, method).unwrap();
        let (a, b) = (Position::new(37.5, 75.0), Position::new(112.5, 75.0));
        let (mut m, mut v, mut c) = (0.0, 0.0, 0.0);
        for seed in 0..n {
            let f = gen.generate(seed);
            let (x, y) = (f.value_at(a).unwrap(), f.value_at(b).unwrap());
            m += x;
            v += x * x;
            c += x * y;
        }
        let n = n as f64;
        (m / n, v / n, c / n)
    }

    #[test]
    fn point_statistics_both_routes() {
        let sigma2 = 64.0;
        for method in [FieldMethod::Circulant, FieldMethod::Dense] {
            let (mean, var, cov) = point_stats(method, 2000);
            assert!(mean.abs() < 3.0 * 8.0 / 2000f64.sqrt(), "{method:?} mean {mean}");
            assert!((var - sigma2).abs() < 0.15 * sigma2, "{method:?} var {var}");
            // Points are d_c apart: correlation e^-1.
            let rho = cov / var;
            assert!((rho - (-1f64).exp()).abs() < 0.05, "{method:?} rho {rho}");
        }
    }

    #[test]
    fn lag_covariance_matches_exponential() {
        let p = ChannelParams::default();
        let gen = ShadowingGenerator::new(square(300.0), &p, 7.5, FieldMethod::Circulant).unwrap();
        let fields: Vec<_> = (0..200).map(|s| gen.generate(s)).collect();
        for lag_nodes in [5usize, 10, 20] {
            let lag = 7.5 * lag_nodes as f64;
            let theory = exponential_covariance(lag, 8.0, 75.0);
            let emp = lag_covariance(&fields, lag_nodes);
            assert!((emp - theory).abs() < 0.1 * theory, "lag {lag}: {emp} vs {theory}");
        }
    }
}
