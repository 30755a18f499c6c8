//! Shared generators and independent oracles for the integration suites.

#![allow(dead_code)]

use std::collections::BTreeMap;

use bpdiff_core::{Face, Field0, Field1, Model, Nerve, OperatorContext, Oracle, Shape};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random intersection-closed nerve with at most 8 vertices, 12 faces and
/// per-vertex cardinalities up to 3.
pub fn random_closed_nerve(rng: &mut ChaCha8Rng) -> (Nerve, Shape) {
    loop {
        let n_vertices: u32 = rng.random_range(1..=8);
        let n_faces: usize = rng.random_range(1..=4);
        let mut faces = Vec::with_capacity(n_faces);
        for _ in 0..n_faces {
            let size = rng.random_range(1..=n_vertices.min(4));
            let mut ids: Vec<u32> = (0..n_vertices).collect();
            for i in 0..size as usize {
                let j = rng.random_range(i..ids.len());
                ids.swap(i, j);
            }
            faces.push(Face::new(ids[..size as usize].iter().copied()).unwrap());
        }
        let nerve = Nerve::intersection_closure(&faces).unwrap();
        if nerve.face_count() > 12 {
            continue;
        }
        let cards: BTreeMap<u32, usize> = (0..n_vertices)
            .map(|v| (v, rng.random_range(1..=3usize)))
            .collect();
        let shape = Shape::new(cards).unwrap();
        return (nerve, shape);
    }
}

/// Uniform random entries in [-scale, scale].
pub fn random_field0(ctx: &OperatorContext, rng: &mut ChaCha8Rng, scale: f64) -> Field0 {
    ctx.field0_from_fn(|_, n| {
        Ok((0..n)
            .map(|_| scale * (2.0 * rng.random::<f64>() - 1.0))
            .collect())
    })
    .unwrap()
}

pub fn random_field1(ctx: &OperatorContext, rng: &mut ChaCha8Rng, scale: f64) -> Field1 {
    ctx.field1_from_fn(|_, _, n| {
        Ok((0..n)
            .map(|_| scale * (2.0 * rng.random::<f64>() - 1.0))
            .collect())
    })
    .unwrap()
}

/// A potential whose beliefs are the (always consistent) true marginals of
/// a random model: U = -ln(true marginals), u = mobius(U). Both flux
/// functionals vanish there.
pub fn consistent_potential(ctx: &OperatorContext, rng: &mut ChaCha8Rng) -> Field0 {
    let seed = random_field0(ctx, rng, 1.0);
    let marginals = Oracle::new(*ctx).true_marginals(&seed).unwrap();
    let mut logs = marginals.into_field();
    for t in logs.tensors_mut() {
        for v in t.values_mut() {
            *v = -v.ln();
        }
    }
    ctx.mobius(&logs).unwrap()
}

/// Bethe numbers by dense Gaussian elimination on the defining equations,
/// independent of the triangular recursion in the library.
#[allow(clippy::needless_range_loop)]
pub fn bethe_by_linear_solve(nerve: &Nerve) -> Vec<i64> {
    let n = nerve.face_count();
    let mut m = vec![vec![0.0f64; n + 1]; n];
    for (b, row) in m.iter_mut().enumerate() {
        for a in 0..n {
            if nerve.includes(a, b) {
                row[a] = 1.0;
            }
        }
        row[n] = 1.0;
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        assert!(m[col][col].abs() > 1e-9, "singular Bethe system");
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut c = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut acc = m[row][n];
        for k in (row + 1)..n {
            acc -= m[row][k] * c[k];
        }
        c[row] = acc / m[row][row];
    }
    let rounded: Vec<i64> = c.iter().map(|v| v.round() as i64).collect();
    // The solution must be integral and satisfy every defining equation
    // exactly.
    for (v, r) in c.iter().zip(&rounded) {
        assert!((v - *r as f64).abs() < 1e-6, "non-integer Bethe number {v}");
    }
    for b in 0..n {
        let total: i64 = (0..n)
            .filter(|&a| nerve.includes(a, b))
            .map(|a| rounded[a])
            .sum();
        assert_eq!(total, 1);
    }
    rounded
}

/// Model with every face carrying the given potential tensors.
pub fn model_with_potential(nerve: &Nerve, shape: &Shape, potential: Field0) -> Model {
    Model::new(shape.clone(), nerve.clone(), potential).unwrap()
}

/// Three-vertex path graph (two edges sharing a vertex), binary variables.
pub fn path3_model() -> Model {
    let faces = vec![Face::new([0, 1]).unwrap(), Face::new([1, 2]).unwrap()];
    let nerve = Nerve::intersection_closure(&faces).unwrap();
    let shape = Shape::uniform(&[0, 1, 2], 2).unwrap();
    let potential = Field0::zeros(&nerve, &shape).unwrap();
    Model::new(shape, nerve, potential).unwrap()
}

/// Nerve with a single maximal face covering all three vertices.
pub fn single_top_model() -> Model {
    let faces = vec![
        Face::new([0, 1, 2]).unwrap(),
        Face::new([0, 1]).unwrap(),
        Face::new([1, 2]).unwrap(),
    ];
    let nerve = Nerve::intersection_closure(&faces).unwrap();
    let shape = Shape::uniform(&[0, 1, 2], 2).unwrap();
    let potential = Field0::zeros(&nerve, &shape).unwrap();
    Model::new(shape, nerve, potential).unwrap()
}

pub fn max_abs_diff(a: &Field0, b: &Field0) -> f64 {
    let mut diff = a.clone();
    diff.axpy(-1.0, b).unwrap();
    diff.sup_norm()
}
