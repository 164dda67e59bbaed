//! Generalized Maxwell representation: iterated directional derivatives of
//! `Q^{−1/2}` and their inversion through a factorization on the conic.

use crate::algebra::{CVec3, HomogPoly, QuadForm, Tolerances, C64, ONE};
use crate::error::{Error, Result};
use crate::harmonic::apply_delta_q;
use crate::sylvester::{conic_roots, enumerate_parcellings, factor_with_roots, real_factor};

/// `N·Q^{−m/2}` with `m` odd.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTerm {
    pub numerator: HomogPoly,
    pub half_exponent: usize,
}

impl PotentialTerm {
    /// `Q^{−1/2}`.
    pub fn unit() -> Self {
        Self { numerator: HomogPoly::constant(ONE), half_exponent: 1 }
    }
}

/// `∇_u (N·Q^{−m/2}) = (Q·∇_u N − (m/2)·N·∇_u Q)·Q^{−(m+2)/2}`.
pub fn directional_derivative_potential(t: &PotentialTerm, u: &CVec3, q: &QuadForm) -> Result<PotentialTerm> {
    if u.iter().all(|c| c.norm() == 0.0) {
        return Err(Error::ZeroVector);
    }
    let n = &t.numerator;
    let m = t.half_exponent as f64;
    let mut next = n.mul(&q.gradient_along(u)).scale(C64::new(-m / 2.0, 0.0));
    if n.degree() > 0 {
        next = &next + &q.as_poly().mul(&n.directional(u));
    }
    Ok(PotentialTerm { numerator: next, half_exponent: t.half_exponent + 2 })
}

/// `Q^{d+1/2}·∇_{v1}…∇_{vd} Q^{−1/2}`, a Q-harmonic polynomial of degree `d`.
pub fn maxwell_poly(q: &QuadForm, vectors: &[CVec3]) -> Result<HomogPoly> {
    vectors
        .iter()
        .try_fold(PotentialTerm::unit(), |t, v| directional_derivative_potential(&t, v, q))
        .map(|t| t.numerator)
}

/// Relative size of `Δ_Q P` against `‖P‖` and the operator scale.
pub fn harmonic_residual(p: &HomogPoly, q: &QuadForm) -> f64 {
    let d = p.degree();
    if d < 2 {
        return 0.0;
    }
    let scale = p.norm() * (d * (d - 1)) as f64 * q.inverse().norm();
    apply_delta_q(p, q).norm() / scale
}

/// Vectors `u_ν = w_ν·B⁻¹` from the lines of one factorization, and `c` with `P = c·maxwell_poly(vectors)`.
pub fn maxwell_decompose(p: &HomogPoly, q: &QuadForm, tol: &Tolerances) -> Result<(Vec<CVec3>, C64)> {
    if p.is_zero() {
        return Err(Error::ZeroForm);
    }
    let residual = harmonic_residual(p, q);
    if !(residual <= tol.tol_harm) {
        return Err(Error::NotHarmonic { residual });
    }
    let real = q.is_real() && q.is_definite() && p.max_imag() <= tol.tol_fact * p.max_abs();
    let f = if real {
        real_factor(p, q, tol)?
    } else {
        let roots = conic_roots(p, q, tol)?;
        let first = enumerate_parcellings(&roots.multiplicities())?
            .into_iter()
            .next()
            .expect("every even multiplicity vector has a parcelling");
        factor_with_roots(p, q, &roots, &first, tol)?
    };
    let b_inv = q.inverse();
    let vectors: Vec<CVec3> = f.lines.iter().map(|l| b_inv.transpose() * l.linear_coeffs()).collect();
    let m = maxwell_poly(q, &vectors)?;
    let (num, den) = m
        .coeffs()
        .iter()
        .zip(p.coeffs())
        .fold((C64::new(0.0, 0.0), 0.0), |(n, d), (a, b)| (n + a.conj() * b, d + a.norm_sqr()));
    if den == 0.0 {
        return Err(Error::ZeroForm);
    }
    let c = num / den;
    let deviation = (p - &m.scale(c)).norm() / p.norm();
    if !(deviation <= tol.tol_fact) {
        return Err(Error::SolveFailure { residual: deviation });
    }
    Ok((vectors, c))
}
