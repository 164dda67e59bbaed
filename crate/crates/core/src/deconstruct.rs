//! Full multipole decomposition `λ + Σ_k ∏_l L_{k,l}` of polynomials restricted to `{Q = 1}`.

use crate::algebra::{grade_split, homogenize_on_quadric, CVec3, HomogPoly, Poly, QuadForm, Tolerances, C64, ZERO};
use crate::error::{Error, Result};
use crate::sylvester::{
    all_factorizations, canonical_factor, count_parcellings, real_factor, real_factorizations, strip_q_powers,
    Multipole, MultipoleFactorization,
};

/// Upper limit on the number of sequences produced by [`Strategy::Enumerate`].
pub const ENUMERATION_LIMIT: usize = 1_000_000;

/// Bands whose norm is below this fraction of the input are treated as zero.
const ZERO_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Canonical,
    Enumerate,
    RealUnique,
}

/// `λ + Σ_{k=1}^{d} w_k`, with `terms[k-1]` the degree-`k` multipole or `None` when it vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipoleSequence {
    pub lambda: C64,
    pub terms: Vec<Option<Multipole>>,
}

impl MultipoleSequence {
    pub fn constant(lambda: C64) -> Self {
        Self { lambda, terms: Vec::new() }
    }

    pub fn degree(&self) -> usize {
        self.terms.len()
    }

    pub fn term(&self, k: usize) -> Option<&Multipole> {
        k.checked_sub(1).and_then(|i| self.terms.get(i)).and_then(Option::as_ref)
    }

    fn set(&mut self, m: Multipole) {
        let k = m.degree();
        if self.terms.len() < k {
            self.terms.resize(k, None);
        }
        self.terms[k - 1] = Some(m);
    }

    pub fn eval(&self, x: &CVec3) -> C64 {
        self.terms.iter().flatten().fold(self.lambda, |acc, m| acc + m.eval(x))
    }

    /// The literal sum of the expanded products plus `λ`.
    pub fn reconstruct(&self) -> Poly {
        let mut out = Poly::constant(self.lambda);
        for m in self.terms.iter().flatten() {
            out.add_homog(&m.to_poly());
        }
        out
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.lambda.im.abs() <= tol * self.lambda.norm().max(1.0)
            && self.terms.iter().flatten().all(|m| m.is_real(tol))
    }

    fn merge(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.lambda += other.lambda;
        for m in other.terms.iter().flatten() {
            out.set(m.clone());
        }
        out
    }
}

/// `∏_{k=1}^{d} (2k−1)!!`, the bound on the number of representations of a degree-`d` polynomial.
pub fn representation_bound(d: usize) -> u128 {
    (1..=d).map(count_parcellings).product()
}

/// Per-level factorization choices; `Canonical` and `RealUnique` return exactly one.
fn level_factorizations(
    h: &HomogPoly,
    q: &QuadForm,
    strategy: Strategy,
    tol: &Tolerances,
) -> Result<Vec<MultipoleFactorization>> {
    match strategy {
        Strategy::Canonical => Ok(vec![canonical_factor(h, q, tol)?]),
        Strategy::Enumerate => all_factorizations(h, q, tol),
        Strategy::RealUnique => {
            let mut f = real_factor(h, q, tol)?;
            f.remainder = f.remainder.re();
            Ok(vec![f])
        }
    }
}

/// Decompositions of a homogeneous `h` restricted to the surface.
fn decompose_homog(
    h: &HomogPoly,
    q: &QuadForm,
    strategy: Strategy,
    tol: &Tolerances,
    zero: f64,
    real_levels: bool,
) -> Result<Vec<MultipoleSequence>> {
    if h.norm() <= zero {
        return Ok(vec![MultipoleSequence::constant(ZERO)]);
    }
    let (h, _) = strip_q_powers(h, q, tol.tol_div);
    match h.degree() {
        0 => return Ok(vec![MultipoleSequence::constant(h.coeffs()[0])]),
        1 => {
            let mut s = MultipoleSequence::constant(ZERO);
            s.set(Multipole::new(C64::new(1.0, 0.0), &[h]));
            return Ok(vec![s]);
        }
        _ => {}
    }
    let factorizations = if real_levels {
        real_factorizations(&h, q, tol)?
    } else {
        level_factorizations(&h, q, strategy, tol)?
    };
    let mut out = Vec::new();
    for f in factorizations {
        let mut head = MultipoleSequence::constant(ZERO);
        head.set(f.multipole());
        let remainder = if real_levels { f.remainder.re() } else { f.remainder };
        for tail in decompose_homog(&remainder, q, strategy, tol, zero, real_levels)? {
            if out.len() >= ENUMERATION_LIMIT {
                return Err(Error::TooManyRepresentations { limit: ENUMERATION_LIMIT });
            }
            out.push(head.merge(&tail));
        }
    }
    Ok(out)
}

fn decompose_parts(
    p: &Poly,
    q: &QuadForm,
    strategy: Strategy,
    tol: &Tolerances,
    real_levels: bool,
) -> Result<Vec<MultipoleSequence>> {
    let zero = ZERO_BAND * p.norm();
    let (even, odd) = grade_split(p);
    let (he, _) = homogenize_on_quadric(&even, q)?;
    let (ho, _) = homogenize_on_quadric(&odd, q)?;
    let se = decompose_homog(&he, q, strategy, tol, zero, real_levels)?;
    let so = decompose_homog(&ho, q, strategy, tol, zero, real_levels)?;
    if se.len().saturating_mul(so.len()) > ENUMERATION_LIMIT {
        return Err(Error::TooManyRepresentations { limit: ENUMERATION_LIMIT });
    }
    Ok(se.iter().flat_map(|a| so.iter().map(move |b| a.merge(b))).collect())
}

/// Decomposes `p` on `{Q = 1}`. `Canonical` and `RealUnique` return one sequence, `Enumerate` all of them.
pub fn full_decompose(
    p: &Poly,
    q: &QuadForm,
    strategy: Strategy,
    tol: &Tolerances,
) -> Result<Vec<MultipoleSequence>> {
    if strategy == Strategy::RealUnique {
        if p.max_imag() > tol.tol_fact * p.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::StrategyMismatch("real_unique needs a real polynomial"));
        }
        if !q.is_real() || !q.is_definite() {
            return Err(Error::StrategyMismatch("real_unique needs a real definite quadric"));
        }
    }
    decompose_parts(p, q, strategy, tol, false)
}

/// Every decomposition whose levels all use conjugation-invariant parcellings, for real `p` and real `Q`.
pub fn real_decompositions(p: &Poly, q: &QuadForm, tol: &Tolerances) -> Result<Vec<MultipoleSequence>> {
    if !q.is_real() {
        return Err(Error::StrategyMismatch("real decompositions need a real quadric"));
    }
    decompose_parts(p, q, Strategy::Enumerate, tol, true)
}

/// Codimension of the multipole image in `V_Q^⊥(d)` for products of polynomials of the given degrees.
pub fn lemma9_gap(l: usize, degrees: &[usize]) -> Result<i64> {
    if l == 0 {
        return Err(Error::InvalidPartition("level must be positive"));
    }
    if degrees.is_empty() {
        return Err(Error::InvalidPartition("no factors"));
    }
    if degrees.contains(&0) {
        return Err(Error::InvalidPartition("factor of degree zero"));
    }
    let d: usize = degrees.iter().sum();
    if l > d {
        return Err(Error::InvalidPartition("level exceeds the total degree"));
    }
    let band = |l: i64, d: i64| l * (2 * d - l + 3) / 2;
    let l = l as i64;
    let mut gap = band(l, d as i64) + degrees.len() as i64 - 1;
    for &di in degrees {
        let di = di as i64;
        gap -= if di >= l { band(l, di) } else { di * (di + 3) / 2 };
    }
    Ok(gap)
}
