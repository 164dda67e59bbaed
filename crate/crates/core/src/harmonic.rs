//! The operator `Δ_Q`, Q-harmonic projection, the splitting
//! `V(d) = ⊕ Qᵏ·Har_Q(d−2k)` and the polynomial Dirichlet problem on `{Q = 1}`.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{
    dim, grade_split, homogenize_on_quadric, monomials, multiplication_matrix, HomogPoly, Poly, QuadForm,
    C64, ONE,
};
use crate::error::{Error, Result};

/// `Σ (B⁻¹)_{jk} ∂_j∂_k P`; zero of degree 0 when `deg P < 2`.
pub fn apply_delta_q(p: &HomogPoly, q: &QuadForm) -> HomogPoly {
    let d = p.degree();
    if d < 2 {
        return HomogPoly::zero(0);
    }
    let bi = q.inverse();
    let first: Vec<HomogPoly> = (0..3).map(|j| p.partial(j)).collect();
    let mut out = HomogPoly::zero(d - 2);
    for j in 0..3 {
        for k in 0..3 {
            if bi[(j, k)] != C64::new(0.0, 0.0) {
                out = &out + &first[j].partial(k).scale(bi[(j, k)]);
            }
        }
    }
    out
}

/// Matrix of `Δ_Q` from `V(d)` to `V(d−2)`, `d ≥ 2`.
pub fn delta_matrix(q: &QuadForm, d: usize) -> DMatrix<C64> {
    assert!(d >= 2, "Δ_Q lowers the degree by two");
    let mut m = DMatrix::zeros(dim(d - 2), dim(d));
    for (j, mono) in monomials(d).enumerate() {
        let image = apply_delta_q(&HomogPoly::from_terms(d, &[(mono.0, ONE)]), q);
        for (i, c) in image.coeffs().iter().enumerate() {
            m[(i, j)] = *c;
        }
    }
    m
}

/// LU factorization of `R ↦ Δ_Q(Q·R)` on `V(d−2)`, reusable across inputs of degree `d`.
#[derive(Debug, Clone)]
pub struct HarmonicProjector {
    q: QuadForm,
    degree: usize,
    delta: DMatrix<C64>,
    t: DMatrix<C64>,
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl HarmonicProjector {
    pub fn new(q: &QuadForm, degree: usize) -> Self {
        assert!(degree >= 2, "projectors exist from degree 2 on");
        let delta = delta_matrix(q, degree);
        let t = &delta * multiplication_matrix(&q.as_poly(), degree - 2);
        let lu = t.clone().lu();
        Self { q: q.clone(), degree, delta, t, lu }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Condition number estimate of the assembled operator in the 2-norm.
    pub fn condition(&self) -> f64 {
        let s = self.t.clone().singular_values();
        let max = s.iter().copied().fold(0.0, f64::max);
        let min = s.iter().copied().fold(f64::INFINITY, f64::min);
        max / min
    }

    /// `P = H + Q·R` with `Δ_Q(H) = 0`.
    pub fn project(&self, p: &HomogPoly, tol_harm: f64) -> Result<(HomogPoly, HomogPoly)> {
        assert_eq!(p.degree(), self.degree, "degree mismatch");
        let rhs = &self.delta * DVector::from_column_slice(p.coeffs());
        let scale = rhs.norm();
        if scale == 0.0 {
            return Ok((p.clone(), HomogPoly::zero(self.degree - 2)));
        }
        let sol = self.lu.solve(&rhs).ok_or(Error::SolveFailure { residual: f64::INFINITY })?;
        let residual = (&self.t * &sol - &rhs).norm() / scale;
        if !(residual <= tol_harm) {
            return Err(Error::SolveFailure { residual });
        }
        let r = HomogPoly::from_coeffs(self.degree - 2, sol.iter().copied().collect());
        let h = p - &self.q.as_poly().mul(&r);
        Ok((h, r))
    }
}

/// Splits `P = H + Q·R` with `H` Q-harmonic; degrees below 2 are returned unchanged.
pub fn harmonic_project(p: &HomogPoly, q: &QuadForm, tol_harm: f64) -> Result<(HomogPoly, HomogPoly)> {
    if p.degree() < 2 {
        return Ok((p.clone(), HomogPoly::zero(0)));
    }
    HarmonicProjector::new(q, p.degree()).project(p, tol_harm)
}

/// Components `P_kᴴ` of `P = Σ Qᵏ·P_kᴴ`, with `deg P_kᴴ = d − 2k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicDecomp {
    pub components: Vec<HomogPoly>,
}

impl HarmonicDecomp {
    pub fn degree(&self) -> usize {
        self.components.first().map_or(0, |c| c.degree())
    }

    /// `Σ Qᵏ·P_kᴴ`.
    pub fn reconstruct(&self, q: &QuadForm) -> HomogPoly {
        let qp = q.as_poly();
        let mut out = HomogPoly::zero(self.degree());
        for (k, c) in self.components.iter().enumerate() {
            out = &out + &c.mul(&qp.pow(k));
        }
        out
    }

    /// `Σ P_kᴴ`: the values on `{Q = 1}` as an inhomogeneous harmonic polynomial.
    pub fn surface_sum(&self) -> Poly {
        self.components.iter().fold(Poly::zero(), |mut acc, c| {
            acc.add_homog(c);
            acc
        })
    }
}

pub fn harmonic_decompose(p: &HomogPoly, q: &QuadForm, tol_harm: f64) -> Result<HarmonicDecomp> {
    let mut components = Vec::with_capacity(p.degree() / 2 + 1);
    let mut rest = p.clone();
    loop {
        if rest.degree() < 2 {
            components.push(rest);
            break;
        }
        let (h, r) = harmonic_project(&rest, q, tol_harm)?;
        components.push(h);
        rest = r;
    }
    Ok(HarmonicDecomp { components })
}

/// Minimum-norm `T ∈ V(d+2)` with `Δ_Q(T) = M`, via QR of the adjoint of `Δ_Q`.
fn min_norm_preimage(m: &HomogPoly, q: &QuadForm) -> Result<HomogPoly> {
    let d = m.degree();
    let a = delta_matrix(q, d + 2).adjoint();
    let qr = a.qr();
    let r_adj = qr.r().adjoint();
    let rhs = DVector::from_column_slice(m.coeffs());
    let y = r_adj
        .solve_lower_triangular(&rhs)
        .ok_or(Error::SolveFailure { residual: f64::INFINITY })?;
    let t = qr.q() * y;
    Ok(HomogPoly::from_coeffs(d + 2, t.iter().copied().collect()))
}

/// Some `T` with `Δ_Q(T) = M`, built grade by grade from minimum-norm preimages.
pub fn delta_preimage(m: &Poly, q: &QuadForm, tol_harm: f64) -> Result<Poly> {
    let mut t = Poly::zero();
    for part in m.parts().iter().filter(|h| !h.is_zero()) {
        let pre = min_norm_preimage(part, q)?;
        let residual = (&apply_delta_q(&pre, q) - part).norm() / part.norm();
        if !(residual <= tol_harm) {
            return Err(Error::SolveFailure { residual });
        }
        t.add_homog(&pre);
    }
    Ok(t)
}

/// Deterministic, roughly uniform points of the unit sphere.
fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Completes a particular solution `T` of `Δ_Q T = M` to the solution with boundary values `N`.
pub fn dirichlet_complete(t: &Poly, n: &Poly, q: &QuadForm, tol_harm: f64) -> Result<Poly> {
    let diff = n.sub(t);
    let mut p = t.clone();
    let (even, odd) = grade_split(&diff);
    for part in [even, odd] {
        let (h, _) = homogenize_on_quadric(&part, q)?;
        if h.is_zero() {
            continue;
        }
        let dec = harmonic_decompose(&h, q, tol_harm)?;
        p = p.add(&dec.surface_sum());
    }
    let samples: Vec<_> = fibonacci_sphere(200)
        .into_iter()
        .map(|s| q.ellipsoid_point(&nalgebra::Vector3::new(s[0].into(), s[1].into(), s[2].into())))
        .collect();
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for v in &samples {
        err = err.max((p.eval(v) - n.eval(v)).norm());
        scale = scale.max(n.eval(v).norm()).max(t.eval(v).norm());
    }
    if scale > 0.0 && !(err <= tol_harm * scale) {
        return Err(Error::SolveFailure { residual: err / scale });
    }
    Ok(p)
}

/// The polynomial `P` with `Δ_Q P = M` and `P = N` on `{Q = 1}`.
pub fn dirichlet_solve(m: &Poly, n: &Poly, q: &QuadForm, tol_harm: f64) -> Result<Poly> {
    let t = delta_preimage(m, q, tol_harm)?;
    dirichlet_complete(&t, n, q, tol_harm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{inner_product, QuadratureRule};
    use crate::testutil::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-9;

    fn close(a: &HomogPoly, b: &HomogPoly, tol: f64) -> bool {
        a.degree() == b.degree() && (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
    }

    fn poly_close(a: &Poly, b: &Poly, tol: f64) -> bool {
        let d = a.degree().max(b.degree());
        (0..=d).all(|k| {
            let z = HomogPoly::zero(k);
            let pa = a.part(k).unwrap_or(&z);
            let pb = b.part(k).unwrap_or(&z);
            (pa - pb).norm() <= tol
        })
    }

    fn x() -> HomogPoly {
        HomogPoly::var(0)
    }
    fn y() -> HomogPoly {
        HomogPoly::var(1)
    }
    fn z() -> HomogPoly {
        HomogPoly::var(2)
    }
    fn k(c: f64) -> HomogPoly {
        HomogPoly::constant(c.into())
    }

    #[test]
    fn laplacian_examples() {
        let s = QuadForm::sphere();
        assert!(close(&apply_delta_q(&s.as_poly(), &s), &k(6.0), 1e-15));
        assert!(apply_delta_q(&x().mul(&y()), &s).is_zero());
        let h = QuadForm::hyperboloid();
        let p = &x().pow(2) + &z().pow(2);
        assert!(apply_delta_q(&p, &h).max_abs() < 1e-15);
        assert!(apply_delta_q(&x(), &s).is_zero());
    }

    #[test]
    fn projection_examples() {
        let s = QuadForm::sphere();
        let qp = s.as_poly();
        let (h, r) = harmonic_project(&x().pow(2), &s, TOL).unwrap();
        assert!(close(&h, &(&x().pow(2) - &qp.scale((1.0 / 3.0).into())), 1e-13));
        assert!(close(&r, &k(1.0 / 3.0), 1e-13));

        let xy = x().mul(&y());
        let (h, r) = harmonic_project(&xy, &s, TOL).unwrap();
        assert!(close(&h, &xy, 1e-14) && r.is_zero());

        for q in [QuadForm::sphere(), QuadForm::hyperboloid()] {
            let qz = q.as_poly().mul(&z());
            let (h, r) = harmonic_project(&qz, &q, TOL).unwrap();
            assert!(h.max_abs() < 1e-13);
            assert!(close(&r, &z(), 1e-13));
        }
    }

    #[test]
    fn decomposition_examples() {
        let s = QuadForm::sphere();
        let qp = s.as_poly();
        let dec = harmonic_decompose(&qp.pow(2), &s, TOL).unwrap();
        assert_eq!(dec.components.len(), 3);
        assert!(dec.components[0].max_abs() < 1e-13 && dec.components[1].max_abs() < 1e-13);
        assert!(close(&dec.components[2], &k(1.0), 1e-13));

        let dec = harmonic_decompose(&x().pow(2), &s, TOL).unwrap();
        assert!(close(&dec.components[1], &k(1.0 / 3.0), 1e-13));

        let x4 = x().pow(4);
        let dec = harmonic_decompose(&x4, &s, TOL).unwrap();
        assert_eq!(dec.components.len(), 3);
        let expected = &(&x4 - &qp.mul(&x().pow(2)).scale((6.0 / 7.0).into())) + &qp.pow(2).scale((3.0 / 35.0).into());
        assert!(close(&dec.components[0], &expected, 1e-13));
        for c in &dec.components {
            assert!(apply_delta_q(c, &s).max_abs() < 1e-12);
        }
        assert!(close(&dec.reconstruct(&s), &x4, 1e-13));
    }

    #[test]
    fn dirichlet_examples() {
        let s = QuadForm::sphere();
        let p = dirichlet_solve(&Poly::zero(), &x().into(), &s, TOL).unwrap();
        assert!(poly_close(&p, &x().into(), 1e-13));

        let p = dirichlet_solve(&Poly::constant(6.0.into()), &Poly::zero(), &s, TOL).unwrap();
        let expected = Poly::from_parts(vec![k(-1.0), HomogPoly::zero(1), s.as_poly()]);
        assert!(poly_close(&p, &expected, 1e-12), "{p:?}");

        let p = dirichlet_solve(&Poly::zero(), &x().pow(2).into(), &s, TOL).unwrap();
        let expected = Poly::from_parts(vec![
            k(1.0 / 3.0),
            HomogPoly::zero(1),
            &x().pow(2) - &s.as_poly().scale((1.0 / 3.0).into()),
        ]);
        assert!(poly_close(&p, &expected, 1e-12));
    }

    #[test]
    fn projector_is_well_conditioned() {
        for q in [QuadForm::sphere(), QuadForm::hyperboloid()] {
            for d in [2, 8, 16] {
                let c = HarmonicProjector::new(&q, d).condition();
                assert!(c.is_finite() && c > 0.0);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn projection_is_idempotent(d in 0usize..=8, seed in any::<u64>()) {
            let mut r = rng(seed);
            let q = random_quadform(&mut r);
            let p = random_homog(&mut r, d);
            let (h, rest) = harmonic_project(&p, &q, TOL).unwrap();
            prop_assert!(d < 2 || close(&(&h + &q.as_poly().mul(&rest)), &p, 1e-10));
            let (h2, r2) = harmonic_project(&h, &q, TOL).unwrap();
            prop_assert!(close(&h2, &h, 1e-10));
            prop_assert!(r2.norm() <= 1e-10 * (1.0 + h.norm()));
        }

        #[test]
        fn summands_are_orthogonal(d in 2usize..=8, seed in any::<u64>()) {
            let mut r = rng(seed);
            let q = match seed % 3 {
                0 => QuadForm::sphere(),
                _ => random_quadform(&mut r),
            };
            let p = random_homog(&mut r, d);
            let dec = harmonic_decompose(&p, &q, TOL).unwrap();
            prop_assert!(close(&dec.reconstruct(&q), &p, 1e-9));
            let rule = QuadratureRule::new(2 * d);
            let qp = q.as_poly();
            let terms: Vec<HomogPoly> =
                dec.components.iter().enumerate().map(|(k, c)| c.mul(&qp.pow(k))).collect();
            let norms: Vec<f64> =
                terms.iter().map(|t| inner_product(t, t, &q, &rule).unwrap().norm().sqrt()).collect();
            for a in 0..terms.len() {
                for b in a + 1..terms.len() {
                    let ip = inner_product(&terms[a], &terms[b], &q, &rule).unwrap();
                    prop_assert!(ip.norm() <= 1e-8 * (1e-300 + norms[a] * norms[b]).max(1e-12 * p.norm().powi(2)));
                }
            }
        }

        #[test]
        fn projection_is_equivariant(d in 2usize..=7, seed in any::<u64>()) {
            let mut r = rng(seed);
            let q = random_quadform(&mut r);
            let u = random_q_orthogonal(&mut r, &q);
            let p = random_homog(&mut r, d);
            let (h, rest) = harmonic_project(&p, &q, TOL).unwrap();
            let (hu, ru) = harmonic_project(&p.compose_linear(&u), &q, TOL).unwrap();
            prop_assert!(close(&hu, &h.compose_linear(&u), 1e-8));
            prop_assert!(close(&ru, &rest.compose_linear(&u), 1e-8));
        }

        #[test]
        fn dirichlet_solution_is_unique(dm in 0usize..=4, dn in 0usize..=5, seed in any::<u64>()) {
            let mut r = rng(seed);
            let q = random_quadform(&mut r);
            let m = random_poly(&mut r, dm);
            let n = random_poly(&mut r, dn);
            let p = dirichlet_solve(&m, &n, &q, TOL).unwrap();
            let t = delta_preimage(&m, &q, TOL).unwrap();
            let mut shifted = t.clone();
            for k in 0..=dm + 2 {
                let (h, _) = harmonic_project(&random_homog(&mut r, k), &q, TOL).unwrap();
                shifted.add_homog(&h);
            }
            let p2 = dirichlet_complete(&shifted, &n, &q, TOL).unwrap();
            prop_assert!(poly_close(&p, &p2, 1e-9 * (1.0 + p.norm())));
            let lap = p.parts().iter().skip(2).fold(Poly::zero(), |mut acc, h| {
                acc.add_homog(&apply_delta_q(h, &q));
                acc
            });
            prop_assert!(poly_close(&lap, &m, 1e-9 * (1.0 + m.norm())));
        }
    }
}
