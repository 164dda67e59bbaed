//! Seeded random generators shared by unit and integration tests.
#![allow(dead_code)]

use crate::algebra::{dim, monomials, CMat3, CVec3, HomogPoly, Monomial, Poly, QuadForm, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vec3(x: f64, y: f64, z: f64) -> CVec3 {
    CVec3::new(x.into(), y.into(), z.into())
}

pub fn normal(r: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(r)
}

pub fn random_c64(r: &mut ChaCha8Rng) -> C64 {
    C64::new(normal(r), normal(r))
}

pub fn random_cvec3(r: &mut ChaCha8Rng) -> CVec3 {
    CVec3::new(random_c64(r), random_c64(r), random_c64(r))
}

pub fn random_real_vec3(r: &mut ChaCha8Rng) -> CVec3 {
    vec3(normal(r), normal(r), normal(r))
}

pub fn random_cmat3(r: &mut ChaCha8Rng) -> CMat3 {
    CMat3::from_fn(|_, _| random_c64(r))
}

pub fn random_homog(r: &mut ChaCha8Rng, d: usize) -> HomogPoly {
    HomogPoly::from_coeffs(d, (0..dim(d)).map(|_| random_c64(r)).collect())
}

pub fn random_real_homog(r: &mut ChaCha8Rng, d: usize) -> HomogPoly {
    HomogPoly::from_coeffs(d, (0..dim(d)).map(|_| normal(r).into()).collect())
}

pub fn random_poly(r: &mut ChaCha8Rng, d: usize) -> Poly {
    Poly::from_parts((0..=d).map(|k| random_homog(r, k)).collect())
}

pub fn random_real_poly(r: &mut ChaCha8Rng, d: usize) -> Poly {
    Poly::from_parts((0..=d).map(|k| random_real_homog(r, k)).collect())
}

pub fn random_monomial(r: &mut ChaCha8Rng, d: usize) -> Monomial {
    let k = r.random_range(0..dim(d));
    monomials(d).nth(k).expect("index within dimension")
}

pub fn random_unit(r: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [normal(r), normal(r), normal(r)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-3 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Sphere, hyperboloid, a random real form or a complex perturbation of the identity.
pub fn random_quadform(r: &mut ChaCha8Rng) -> QuadForm {
    match r.random_range(0..4) {
        0 => QuadForm::sphere(),
        1 => QuadForm::hyperboloid(),
        2 => loop {
            let m = CMat3::from_fn(|_, _| C64::new(normal(r), 0.0));
            let b = (m + m.transpose()) * C64::new(0.5, 0.0);
            if let Ok(q) = QuadForm::new(b) {
                if b.determinant().norm() > 0.1 {
                    return q;
                }
            }
        },
        _ => {
            let m = random_cmat3(r);
            let b = CMat3::identity() + (m + m.transpose()) * C64::new(0.15, 0.0);
            QuadForm::new(b).unwrap_or_else(|_| QuadForm::sphere())
        }
    }
}

/// Point of the ellipsoid `{Q = 1}` over a random unit-sphere direction.
pub fn random_surface_point(r: &mut ChaCha8Rng, q: &QuadForm) -> CVec3 {
    let s = random_unit(r);
    q.ellipsoid_point(&vec3(s[0], s[1], s[2]))
}

/// Random real rotation or reflection built from a QR factorization.
pub fn random_orthogonal(r: &mut ChaCha8Rng) -> CMat3 {
    let m = nalgebra::Matrix3::<f64>::from_fn(|_, _| normal(r));
    let q = m.qr().q();
    q.map(|x| C64::new(x, 0.0))
}

/// Random element of `O_Q`: `exp(K·B⁻¹)` with `K` antisymmetric.
pub fn random_q_orthogonal(r: &mut ChaCha8Rng, q: &QuadForm) -> CMat3 {
    let mut k = CMat3::zeros();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let c = random_c64(r) * 0.3;
        k[(i, j)] = c;
        k[(j, i)] = -c;
    }
    let x = k * q.inverse();
    let mut term = CMat3::identity();
    let mut sum = CMat3::identity();
    for n in 1..40 {
        term = term * x / C64::new(n as f64, 0.0);
        sum += term;
    }
    sum
}
