//! Parcellings and the factorization `P = λ·∏L_ν + Q·R` driven by the roots of
//! `P` on the conic `{Q = 0}`.

use rayon::prelude::*;

use crate::algebra::{divide_by_quadric, divide_by_quadric_scaled, CVec3, HomogPoly, QuadForm, Tolerances, C64, ONE};
use crate::conic::{
    conic_param, conj_point, normalize_line, relative_discriminant, restrict_to_conic, roots_projective_with_noise,
    tangent_line, BinaryForm, ConicParam, ProjPoint1, RootCluster,
};
use crate::error::{Error, Result};

/// `(2d−1)!!`, the number of ways to pair `2d` distinct points.
pub fn count_parcellings(d: usize) -> u128 {
    (1..=d).map(|k| (2 * k - 1) as u128).product()
}

/// `d` pieces, each a pair `(i, j)`, `i ≤ j`, of root-cluster indices;
/// `i == j` stands for multiplicity two at one cluster.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeneralizedParcelling {
    pieces: Vec<(usize, usize)>,
}

impl GeneralizedParcelling {
    /// Pieces are stored sorted so equal multisets compare equal.
    pub fn new(pieces: Vec<(usize, usize)>) -> Self {
        let mut pieces: Vec<_> = pieces.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        pieces.sort_unstable();
        Self { pieces }
    }

    pub fn pieces(&self) -> &[(usize, usize)] {
        &self.pieces
    }

    pub fn degree(&self) -> usize {
        self.pieces.len()
    }

    /// `Σ_ν μ_ν` as a multiplicity vector over `clusters` indices.
    pub fn multiplicities(&self, clusters: usize) -> Vec<usize> {
        let mut mu = vec![0; clusters];
        for &(a, b) in &self.pieces {
            mu[a] += 1;
            mu[b] += 1;
        }
        mu
    }

    /// True when every piece is mapped to itself by the cluster permutation `sigma`.
    pub fn is_piecewise_invariant(&self, sigma: &[usize]) -> bool {
        self.pieces.iter().all(|&(a, b)| {
            let (x, y) = (sigma[a], sigma[b]);
            (x.min(y), x.max(y)) == (a, b)
        })
    }
}

/// All generalized parcellings of the multiplicity vector `mu`, in lexicographic order of pieces.
pub fn enumerate_parcellings(mu: &[usize]) -> Result<Vec<GeneralizedParcelling>> {
    let total: usize = mu.iter().sum();
    if total % 2 == 1 {
        return Err(Error::OddTotal { total });
    }
    let mut out = Vec::new();
    let mut rest = mu.to_vec();
    let mut current = Vec::with_capacity(total / 2);
    enumerate_rec(&mut rest, &mut current, &mut out);
    Ok(out)
}

fn enumerate_rec(
    rest: &mut [usize],
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<GeneralizedParcelling>,
) {
    let Some(i) = rest.iter().position(|&m| m > 0) else {
        out.push(GeneralizedParcelling { pieces: current.clone() });
        return;
    };
    let min_j = match current.last() {
        Some(&(a, b)) if a == i => b,
        _ => i,
    };
    for j in min_j..rest.len() {
        let available = if j == i { rest[i] >= 2 } else { rest[j] > 0 };
        if !available {
            continue;
        }
        rest[i] -= 1;
        rest[j] -= 1;
        current.push((i, j));
        enumerate_rec(rest, current, out);
        current.pop();
        rest[i] += 1;
        rest[j] += 1;
    }
}

/// Round-robin pairing over the clusters in their given order: units are listed
/// cycling through clusters with remaining multiplicity and paired consecutively.
pub fn canonical_parcelling(mu: &[usize]) -> Result<GeneralizedParcelling> {
    let total: usize = mu.iter().sum();
    if total % 2 == 1 {
        return Err(Error::OddTotal { total });
    }
    let mut rest = mu.to_vec();
    let mut units = Vec::with_capacity(total);
    while units.len() < total {
        for (i, r) in rest.iter_mut().enumerate() {
            if *r > 0 {
                *r -= 1;
                units.push(i);
            }
        }
    }
    Ok(GeneralizedParcelling::new(units.chunks(2).map(|c| (c[0], c[1])).collect()))
}

/// Root data of `P` on the conic.
#[derive(Debug, Clone)]
pub struct ConicRoots {
    pub param: ConicParam,
    pub form: BinaryForm,
    pub clusters: Vec<RootCluster>,
    /// Two distinct clusters lie within `10·eps_cluster` of each other.
    pub ill_conditioned: bool,
}

impl ConicRoots {
    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.multiplicity).collect()
    }

    pub fn has_multiple_root(&self) -> bool {
        self.clusters.iter().any(|c| c.multiplicity >= 2)
    }

    pub fn min_separation(&self) -> f64 {
        let c = &self.clusters;
        (0..c.len())
            .flat_map(|i| (i + 1..c.len()).map(move |j| (i, j)))
            .map(|(i, j)| c[i].point.distance(&c[j].point))
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_not_divisible(p: &HomogPoly, q: &QuadForm, tol: &Tolerances) -> Result<()> {
    if p.is_zero() || divide_by_quadric(p, q, tol.tol_div).is_ok() {
        Err(Error::DivisibleByQ)
    } else {
        Ok(())
    }
}

/// Roots of `P∘α` with multiplicities; `P` must not be divisible by `Q`.
pub fn conic_roots(p: &HomogPoly, q: &QuadForm, tol: &Tolerances) -> Result<ConicRoots> {
    check_not_divisible(p, q, tol)?;
    let param = conic_param(q);
    let form = restrict_to_conic(p, &param);
    let clusters = roots_projective_with_noise(&form, tol.eps_cluster, tol.coeff_noise)?;
    let mut roots = ConicRoots { param, form, clusters, ill_conditioned: false };
    roots.ill_conditioned = roots.min_separation() <= 10.0 * tol.eps_cluster;
    Ok(roots)
}

/// `P = λ·∏ lines + Q·remainder`, lines normalized to a unit max-modulus coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipoleFactorization {
    pub lambda: C64,
    pub lines: Vec<HomogPoly>,
    pub remainder: HomogPoly,
    pub parcelling: GeneralizedParcelling,
    pub ill_conditioned: bool,
}

impl MultipoleFactorization {
    pub fn degree(&self) -> usize {
        self.lines.len()
    }

    pub fn product(&self) -> HomogPoly {
        self.lines.iter().fold(HomogPoly::constant(ONE), |acc, l| acc.mul(l))
    }

    pub fn reconstruct(&self, q: &QuadForm) -> HomogPoly {
        let lead = self.product().scale(self.lambda);
        if self.degree() < 2 {
            lead
        } else {
            &lead + &q.as_poly().mul(&self.remainder)
        }
    }

    /// `‖P − λ∏L − Q·R‖ / ‖P‖`.
    pub fn residual(&self, p: &HomogPoly, q: &QuadForm) -> f64 {
        (p - &self.reconstruct(q)).norm() / p.norm()
    }

    pub fn multipole(&self) -> Multipole {
        Multipole::new(self.lambda, &self.lines)
    }
}

/// Canonical representative of `(λ, {L_ν})` modulo reordering and rescaling.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipole {
    pub lambda: C64,
    pub lines: Vec<CVec3>,
}

fn line_key(w: &CVec3) -> [f64; 6] {
    [w[0].re, w[0].im, w[1].re, w[1].im, w[2].re, w[2].im]
}

impl Multipole {
    pub fn new(lambda: C64, lines: &[HomogPoly]) -> Self {
        let mut lambda = lambda;
        let mut ws: Vec<CVec3> = lines
            .iter()
            .map(|l| {
                let (n, s) = normalize_line(l);
                lambda *= s;
                n.linear_coeffs()
            })
            .collect();
        ws.sort_by(|a, b| line_key(a).partial_cmp(&line_key(b)).expect("finite coefficients"));
        Self { lambda, lines: ws }
    }

    pub fn degree(&self) -> usize {
        self.lines.len()
    }

    /// `λ·∏ (w·x)` as a polynomial.
    pub fn to_poly(&self) -> HomogPoly {
        self.lines
            .iter()
            .fold(HomogPoly::constant(self.lambda), |acc, w| acc.mul(&HomogPoly::linear(w)))
    }

    pub fn eval(&self, x: &CVec3) -> C64 {
        self.lines.iter().fold(self.lambda, |acc, w| acc * w.dot(x))
    }

    /// Lines real up to scale and `λ` real, within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.lambda.im.abs() <= tol * self.lambda.norm().max(1.0)
            && self.lines.iter().all(|w| w.iter().all(|c| c.im.abs() <= tol))
    }

    /// Equality up to `tol`, matching lines greedily so near-ties in the order do not matter.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.lines.len() != other.lines.len()
            || (self.lambda - other.lambda).norm() > tol * (1.0 + self.lambda.norm())
        {
            return false;
        }
        let mut used = vec![false; other.lines.len()];
        self.lines.iter().all(|a| {
            let best = other
                .lines
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, b)| (j, (a - b).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1));
            match best {
                Some((j, dist)) if dist <= tol => {
                    used[j] = true;
                    true
                }
                _ => false,
            }
        })
    }
}

/// Deterministic trial parameters `[z_k : 1]`, `z_k` spread by golden-ratio rotation.
fn evaluation_parameter(k: usize) -> ProjPoint1 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let a = ((k + 1) as f64 * phi).fract();
    let b = ((k + 1) as f64 * phi * phi).fract();
    let z = C64::from_polar(0.35 + 1.3 * b, std::f64::consts::TAU * a);
    ProjPoint1::new(z, ONE).expect("nonzero parameter")
}

const EVALUATION_TRIALS: usize = 64;

fn line_for_piece(roots: &ConicRoots, q: &QuadForm, piece: (usize, usize)) -> HomogPoly {
    let pa = roots.param.image(&roots.clusters[piece.0].point);
    let raw = if piece.0 == piece.1 {
        tangent_line(&pa, q)
    } else {
        let pb = roots.param.image(&roots.clusters[piece.1].point);
        HomogPoly::linear(&pa.coords().cross(pb.coords()))
    };
    normalize_line(&raw).0
}

pub(crate) fn factor_with_roots_from(
    p: &HomogPoly,
    q: &QuadForm,
    roots: &ConicRoots,
    parcelling: &GeneralizedParcelling,
    tol: &Tolerances,
    first_trial: usize,
) -> Result<MultipoleFactorization> {
    let mu = roots.multiplicities();
    if parcelling.degree() != p.degree()
        || parcelling.pieces.iter().any(|&(_, b)| b >= mu.len())
        || parcelling.multiplicities(mu.len()) != mu
    {
        return Err(Error::ParcellingMismatch);
    }
    let lines: Vec<HomogPoly> = parcelling.pieces.iter().map(|&pc| line_for_piece(roots, q, pc)).collect();
    let product = lines.iter().fold(HomogPoly::constant(ONE), |acc, l| acc.mul(l));

    let threshold = 1e-4 * roots.form.max_abs();
    let far = 10.0 * tol.eps_cluster;
    let lambda = (first_trial..first_trial + EVALUATION_TRIALS)
        .map(evaluation_parameter)
        .find_map(|u| {
            let [u0, u1] = u.coords();
            let pv = roots.form.eval(u0, u1);
            let clear = roots.clusters.iter().all(|c| c.point.distance(&u) > far);
            if !clear || !(pv.norm() > threshold) {
                return None;
            }
            let lv = product.eval(&roots.param.eval(&u));
            (lv.norm() > 0.0).then(|| pv / lv)
        })
        .ok_or(Error::NoEvaluationPoint)?;

    let lead = product.scale(lambda);
    let remainder = if p.degree() < 2 {
        HomogPoly::zero(0)
    } else {
        let diff = p - &lead;
        divide_by_quadric_scaled(&diff, q, p.norm().max(lead.norm()), tol.tol_fact)?
    };
    let f = MultipoleFactorization {
        lambda,
        lines,
        remainder,
        parcelling: parcelling.clone(),
        ill_conditioned: roots.ill_conditioned,
    };
    let residual = f.residual(p, q);
    if !(residual <= tol.tol_fact) {
        return Err(Error::SolveFailure { residual });
    }
    Ok(f)
}

/// Factorization for a parcelling of precomputed conic roots.
pub fn factor_with_roots(
    p: &HomogPoly,
    q: &QuadForm,
    roots: &ConicRoots,
    parcelling: &GeneralizedParcelling,
    tol: &Tolerances,
) -> Result<MultipoleFactorization> {
    factor_with_roots_from(p, q, roots, parcelling, tol, 0)
}

pub fn factor_on_quadric(
    p: &HomogPoly,
    q: &QuadForm,
    parcelling: &GeneralizedParcelling,
    tol: &Tolerances,
) -> Result<MultipoleFactorization> {
    let roots = conic_roots(p, q, tol)?;
    factor_with_roots(p, q, &roots, parcelling, tol)
}

/// One factorization per generalized parcelling, in enumeration order.
pub fn all_factorizations(p: &HomogPoly, q: &QuadForm, tol: &Tolerances) -> Result<Vec<MultipoleFactorization>> {
    let roots = conic_roots(p, q, tol)?;
    let parcellings = enumerate_parcellings(&roots.multiplicities())?;
    parcellings.par_iter().map(|g| factor_with_roots(p, q, &roots, g, tol)).collect()
}

/// The factorization for [`canonical_parcelling`] of the sorted clusters.
pub fn canonical_factor(p: &HomogPoly, q: &QuadForm, tol: &Tolerances) -> Result<MultipoleFactorization> {
    let roots = conic_roots(p, q, tol)?;
    let g = canonical_parcelling(&roots.multiplicities())?;
    factor_with_roots(p, q, &roots, &g, tol)
}

/// Cluster permutation induced by complex conjugation of conic points.
pub fn conjugation_permutation(roots: &ConicRoots, tol: &Tolerances) -> Result<Vec<usize>> {
    let images: Vec<_> = roots.clusters.iter().map(|c| roots.param.image(&c.point)).collect();
    let limit = 100.0 * tol.eps_cluster;
    let sigma: Vec<usize> = images
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let target = conj_point(a);
            let (j, dist) = images
                .iter()
                .enumerate()
                .map(|(j, b)| (j, target.distance(b)))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .expect("at least one cluster");
            if dist <= limit && roots.clusters[j].multiplicity == roots.clusters[i].multiplicity {
                Ok(j)
            } else {
                Err(Error::ConjugationPairingFailure { cluster: i })
            }
        })
        .collect::<Result<_>>()?;
    if let Some(i) = (0..sigma.len()).find(|&i| sigma[sigma[i]] != i) {
        return Err(Error::ConjugationPairingFailure { cluster: i });
    }
    Ok(sigma)
}

fn check_real(p: &HomogPoly, q: &QuadForm, tol: &Tolerances) -> Result<()> {
    let imag = p.max_imag();
    if imag > tol.tol_fact * p.max_abs() {
        return Err(Error::NotReal { imag });
    }
    if !q.is_real() {
        return Err(Error::NotReal { imag: 0.0 });
    }
    Ok(())
}

/// All factorizations whose lines are real up to scale: every piece is conjugation invariant.
pub fn real_factorizations(p: &HomogPoly, q: &QuadForm, tol: &Tolerances) -> Result<Vec<MultipoleFactorization>> {
    check_real(p, q, tol)?;
    let roots = conic_roots(p, q, tol)?;
    let sigma = conjugation_permutation(&roots, tol)?;
    let parcellings: Vec<_> = enumerate_parcellings(&roots.multiplicities())?
        .into_iter()
        .filter(|g| g.is_piecewise_invariant(&sigma))
        .collect();
    parcellings.par_iter().map(|g| factor_with_roots(p, q, &roots, g, tol)).collect()
}

/// The unique real factorization over a definite real quadric.
pub fn real_factor(p: &HomogPoly, q: &QuadForm, tol: &Tolerances) -> Result<MultipoleFactorization> {
    check_real(p, q, tol)?;
    if !q.is_definite() {
        return Err(Error::NotDefinite);
    }
    let roots = conic_roots(p, q, tol)?;
    let sigma = conjugation_permutation(&roots, tol)?;
    let mut pieces = Vec::with_capacity(p.degree());
    for (i, c) in roots.clusters.iter().enumerate() {
        if sigma[i] == i {
            return Err(Error::ConjugationPairingFailure { cluster: i });
        }
        if i < sigma[i] {
            pieces.extend(std::iter::repeat_n((i, sigma[i]), c.multiplicity));
        }
    }
    factor_with_roots(p, q, &roots, &GeneralizedParcelling::new(pieces), tol)
}

/// Discriminant membership with the quantities behind the verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminantReport {
    pub in_discriminant: bool,
    pub relative_discriminant: f64,
    pub max_multiplicity: usize,
    pub min_separation: f64,
}

/// Root-clustering verdict on a multiple conic point, with the scaled resultant alongside.
pub fn discriminant_report(p: &HomogPoly, q: &QuadForm, tol: &Tolerances) -> Result<DiscriminantReport> {
    let roots = conic_roots(p, q, tol)?;
    let max_multiplicity = roots.clusters.iter().map(|c| c.multiplicity).max().unwrap_or(0);
    Ok(DiscriminantReport {
        in_discriminant: max_multiplicity >= 2,
        relative_discriminant: relative_discriminant(&roots.form),
        max_multiplicity,
        min_separation: roots.min_separation(),
    })
}

pub fn in_discriminant(p: &HomogPoly, q: &QuadForm, tol: &Tolerances) -> Result<bool> {
    Ok(discriminant_report(p, q, tol)?.in_discriminant)
}

/// Divides out the largest power of `Q`; returns the quotient and the exponent.
pub fn strip_q_powers(p: &HomogPoly, q: &QuadForm, tol_div: f64) -> (HomogPoly, usize) {
    let mut cur = p.clone();
    let mut k = 0;
    while cur.degree() >= 2 && !cur.is_zero() {
        match divide_by_quadric(&cur, q, tol_div) {
            Ok(r) => {
                cur = r;
                k += 1;
            }
            Err(_) => break,
        }
    }
    (cur, k)
}
