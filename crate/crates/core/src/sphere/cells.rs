//! Orthant-aligned quadrature on great subspheres.
//!
//! The coordinate hyperplanes `x_i = 0` cut `S^{n-1} ∩ H` into spherical
//! polytopes. Each one is split into spherical simplices by pulling from a
//! vertex, and each simplex carries a collapsed Gauss–Legendre rule mapped
//! through `λ ↦ Vλ/|Vλ|`.

use nalgebra::DMatrix;

use super::{dot, norm, GridSpec, SphereGrid};
use crate::error::{invalid, Result};
use crate::quadrature::gauss_legendre;

const TIGHT: f64 = 1e-9;

struct Ray {
    dir: Vec<f64>,
    tight: Vec<usize>,
}

/// Builds the cell rule in subspace coordinates (`d = basis.len()`), then embeds.
pub(super) fn cell_grid(basis: &[Vec<f64>], ambient: usize, spec: GridSpec) -> Result<SphereGrid> {
    let d = basis.len();
    if d < 2 {
        return Err(invalid("cell rule needs subspace dimension >= 2"));
    }
    // constraint normals in subspace coordinates: a_i[j] = basis[j][i]
    let mut normals: Vec<Vec<f64>> = Vec::new();
    for i in 0..ambient {
        let a: Vec<f64> = basis.iter().map(|b| b[i]).collect();
        let r = norm(&a);
        if r > 1e-12 {
            normals.push(a.iter().map(|v| v / r).collect());
        }
    }
    let rays = extreme_rays(&normals, d);
    let q = spec.resolution / 2 + 4;
    let gl = gauss_legendre(q)?;
    let unit: Vec<(f64, f64)> = gl
        .nodes
        .iter()
        .zip(&gl.weights)
        .map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();

    let mut half_nodes: Vec<Vec<f64>> = Vec::new();
    let mut half_weights: Vec<f64> = Vec::new();
    let m = normals.len();
    // sign vectors with the first constraint positive; the rest are antipodes
    for code in 0..(1usize << (m - 1)) {
        let signs: Vec<f64> = (0..m)
            .map(|i| {
                if i == 0 || (code >> (i - 1)) & 1 == 0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        let verts: Vec<usize> = (0..rays.len())
            .filter(|&r| {
                normals
                    .iter()
                    .zip(&signs)
                    .all(|(a, s)| s * dot(a, &rays[r].dir) >= -TIGHT)
            })
            .collect();
        if rank(&rays, &verts) < d {
            continue;
        }
        for simplex in triangulate(&rays, &verts, d, m) {
            let corners: Vec<Vec<f64>> = simplex.iter().map(|&r| rays[r].dir.clone()).collect();
            simplex_rule(&corners, d, &unit, &mut half_nodes, &mut half_weights);
        }
    }

    let mut nodes = Vec::with_capacity(2 * half_nodes.len() * ambient);
    let mut weights = Vec::with_capacity(2 * half_nodes.len());
    for (u, w) in half_nodes.iter().zip(&half_weights) {
        let x: Vec<f64> = (0..ambient)
            .map(|k| (0..d).map(|j| u[j] * basis[j][k]).sum())
            .collect();
        nodes.extend(x.iter().copied());
        nodes.extend(x.iter().map(|v| -v));
        weights.push(*w);
        weights.push(*w);
    }
    Ok(SphereGrid {
        ambient,
        sphere_dim: d,
        spec,
        nodes,
        weights,
    })
}

// Intersections of d-1 independent constraint hyperplanes, both orientations.
fn extreme_rays(normals: &[Vec<f64>], d: usize) -> Vec<Ray> {
    let m = normals.len();
    let mut rays: Vec<Ray> = Vec::new();
    let mut subset: Vec<usize> = (0..d - 1).collect();
    loop {
        if let Some(r) = null_vector(normals, &subset, d) {
            for sign in [1.0, -1.0] {
                let dir: Vec<f64> = r.iter().map(|v| sign * v).collect();
                let dup = rays.iter().any(|q| {
                    q.dir
                        .iter()
                        .zip(&dir)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                        < 1e-9
                });
                if !dup {
                    let tight = (0..m)
                        .filter(|&i| dot(&normals[i], &dir).abs() <= TIGHT)
                        .collect();
                    rays.push(Ray { dir, tight });
                }
            }
        }
        if !next_subset(&mut subset, m) {
            return rays;
        }
    }
}

fn next_subset(s: &mut [usize], m: usize) -> bool {
    let k = s.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if s[i] < m - k + i {
            s[i] += 1;
            for j in i + 1..k {
                s[j] = s[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

// Generalized cross product of the selected rows; None when they are dependent.
fn null_vector(normals: &[Vec<f64>], subset: &[usize], d: usize) -> Option<Vec<f64>> {
    let mut r = vec![0.0; d];
    for (j, rj) in r.iter_mut().enumerate() {
        let minor = DMatrix::from_fn(d - 1, d - 1, |row, col| {
            let c = if col < j { col } else { col + 1 };
            normals[subset[row]][c]
        });
        let det = if d == 1 { 1.0 } else { minor.determinant() };
        *rj = if j % 2 == 0 { det } else { -det };
    }
    let len = norm(&r);
    if len < 1e-8 {
        return None;
    }
    Some(r.iter().map(|v| v / len).collect())
}

fn rank(rays: &[Ray], verts: &[usize]) -> usize {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &v in verts {
        let mut x = rays[v].dir.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&x, b);
                x.iter_mut().zip(b).for_each(|(a, bb)| *a -= c * bb);
            }
        }
        let r = norm(&x);
        if r > 1e-7 {
            x.iter_mut().for_each(|a| *a /= r);
            basis.push(x);
        }
    }
    basis.len()
}

// Pulling triangulation of the cone spanned by `verts` (of rank k).
fn triangulate(rays: &[Ray], verts: &[usize], k: usize, m: usize) -> Vec<Vec<usize>> {
    if k == 1 {
        return vec![vec![verts[0]]];
    }
    let apex = verts[0];
    let mut facets: Vec<Vec<usize>> = Vec::new();
    for i in 0..m {
        let face: Vec<usize> = verts
            .iter()
            .copied()
            .filter(|&v| rays[v].tight.contains(&i))
            .collect();
        if face.contains(&apex) || facets.contains(&face) || face.len() < k - 1 {
            continue;
        }
        if rank(rays, &face) == k - 1 {
            facets.push(face);
        }
    }
    let mut out = Vec::new();
    for face in &facets {
        for mut s in triangulate(rays, face, k - 1, m) {
            s.insert(0, apex);
            out.push(s);
        }
    }
    out
}

// Collapsed product rule on the spherical simplex with the given corners.
fn simplex_rule(
    corners: &[Vec<f64>],
    d: usize,
    unit: &[(f64, f64)],
    nodes: &mut Vec<Vec<f64>>,
    weights: &mut Vec<f64>,
) {
    let v = DMatrix::from_fn(d, d, |row, col| corners[col][row]);
    let det = v.determinant().abs();
    let free = d - 1;
    let q = unit.len();
    let mut idx = vec![0usize; free];
    let mut lambda = vec![0.0; d];
    loop {
        let mut rest = 1.0;
        let mut w = det;
        for j in 0..free {
            let (x, wx) = unit[idx[j]];
            lambda[j] = rest * x;
            w *= wx * rest;
            rest *= 1.0 - x;
        }
        lambda[free] = rest;
        let mut u = vec![0.0; d];
        for (c, &l) in lambda.iter().enumerate() {
            for (r, ur) in u.iter_mut().enumerate() {
                *ur += l * v[(r, c)];
            }
        }
        let len = norm(&u);
        u.iter_mut().for_each(|a| *a /= len);
        nodes.push(u);
        weights.push(w / len.powi(d as i32));

        let mut level = free;
        loop {
            if level == 0 {
                return;
            }
            level -= 1;
            idx[level] += 1;
            if idx[level] < q {
                break;
            }
            idx[level] = 0;
        }
    }
}
