//! Orthonormal real bases of degree-m spherical harmonics built from zonal
//! reproducing kernels at well-spread poles.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{harmonic_dim, legendre, zonal_scale};
use crate::error::{invalid, Result};
use crate::sphere::{dot, Direction};

/// Degree-m block: `Y_i(x) = sum_j T_ij Z_m(x · y_j)` with `T` lower triangular.
#[derive(Debug)]
pub struct DegreeBlock {
    n: usize,
    degree: usize,
    dim: usize,
    scale: f64,
    poles: Vec<f64>,
    transform: Vec<f64>,
}

impl DegreeBlock {
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of basis functions, the dimension of the harmonic space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pole(&self, j: usize) -> &[f64] {
        &self.poles[j * self.n..(j + 1) * self.n]
    }

    /// Zonal kernel `Z_m(x · y_j)` at every pole.
    pub fn kernel_row(&self, x: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.scale * legendre(self.n, self.degree, dot(x, self.pole(j)));
        }
    }

    /// Applies `T`: kernel values at the poles to basis values.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                let row = &self.transform[i * self.dim..i * self.dim + i + 1];
                row.iter().zip(z).map(|(t, v)| t * v).sum()
            })
            .collect()
    }

    /// Applies `T^T`: basis coefficients to pole weights.
    pub fn apply_transpose(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, ci) in c.iter().enumerate() {
            let row = &self.transform[i * self.dim..i * self.dim + i + 1];
            for (o, t) in out.iter_mut().zip(row) {
                *o += t * ci;
            }
        }
        out
    }

    /// All basis functions of this degree at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.dim];
        self.kernel_row(x, &mut z);
        self.apply(&z)
    }
}

/// Cached basis block for `(n, m)`.
pub fn degree_block(n: usize, m: usize) -> Result<Arc<DegreeBlock>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<DegreeBlock>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(b) = cache.lock().unwrap().get(&(n, m)) {
        return Ok(b.clone());
    }
    let block = Arc::new(build_block(n, m)?);
    Ok(cache.lock().unwrap().entry((n, m)).or_insert(block).clone())
}

fn build_block(n: usize, m: usize) -> Result<DegreeBlock> {
    if n < 2 {
        return Err(invalid("harmonic bases need n >= 2"));
    }
    let dim = harmonic_dim(n, m);
    let scale = zonal_scale(n, m);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5ec7_1000 ^ ((n as u64) << 32) ^ m as u64);
    let pool_size = 2 * dim + 16;
    let pool: Vec<Direction> = (0..pool_size)
        .map(|_| Direction::random(n, &mut rng))
        .collect();
    let kernel =
        |a: usize, b: usize| scale * legendre(n, m, dot(pool[a].coords(), pool[b].coords()));

    // Greedy pivoted Cholesky of the pool Gram matrix.
    let mut diag = vec![scale; pool_size];
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim);
    let mut chosen = Vec::with_capacity(dim);
    for k in 0..dim {
        let (pivot, &d) =
            diag.iter().enumerate().fold(
                (0, &f64::MIN),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if d <= 1e-10 * scale {
            return Err(invalid(format!(
                "harmonic pole selection degenerated at degree {m}, step {k}"
            )));
        }
        let root = d.sqrt();
        let row: Vec<f64> = (0..pool_size)
            .map(|j| {
                let mut v = kernel(pivot, j);
                for r in &rows {
                    v -= r[pivot] * r[j];
                }
                v / root
            })
            .collect();
        for (dj, rj) in diag.iter_mut().zip(&row) {
            *dj -= rj * rj;
        }
        diag[pivot] = 0.0;
        chosen.push(pivot);
        rows.push(row);
    }

    // C[k][i] = rows[i][chosen[k]], lower triangular; T = C^{-1}.
    let c = |k: usize, i: usize| rows[i][chosen[k]];
    let mut transform = vec![0.0; dim * dim];
    for col in 0..dim {
        for k in col..dim {
            let mut v = if k == col { 1.0 } else { 0.0 };
            for i in col..k {
                v -= c(k, i) * transform[i * dim + col];
            }
            transform[k * dim + col] = v / c(k, k);
        }
    }
    let poles = chosen
        .iter()
        .flat_map(|&j| pool[j].coords().to_vec())
        .collect();
    Ok(DegreeBlock {
        n,
        degree: m,
        dim,
        scale,
        poles,
        transform,
    })
}
