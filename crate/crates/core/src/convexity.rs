//! Self-adjoint subspaces `H ⊂ A_h` and the exponential sets `M = e^H`.
//!
//! `M` is geodesically convex exactly when `H` is a Lie triple system,
//! `[x, [x, y]] ∈ H` for all `x, y ∈ H`. Since the double bracket is
//! quadratic in `x`, the condition is checked on basis triples through the
//! polarized form `[h_i, [h_j, h_k]] + [h_j, [h_i, h_k]]`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::algebra::{ensure_same, matrix_unit, Algebra, AlgebraElement, HermitianElement, PositiveElement, C64};
use crate::error::{Error, Result};
use crate::geometry::{unwhiten, whiten};

/// Closure residual tolerance (basis elements have unit norm).
pub const DEFAULT_CLOSURE_TOL: f64 = 1e-9;

/// Membership tolerance, scaled by `1 + ‖ln a‖₂`.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-8;

/// Generators whose residual after orthogonalization falls below this
/// fraction of their norm are dropped as dependent.
pub const DEPENDENCE_TOL: f64 = 1e-10;

/// A τ-orthonormal basis of a real subspace of `A_h`.
#[derive(Debug, Clone)]
pub struct Subspace {
    algebra: Algebra,
    basis: Vec<HermitianElement>,
    closed_by_construction: bool,
}

impl Subspace {
    fn from_orthonormal(algebra: &Algebra, basis: Vec<HermitianElement>, closed: bool) -> Self {
        Self {
            algebra: algebra.clone(),
            basis,
            closed_by_construction: closed,
        }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn basis(&self) -> &[HermitianElement] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Set for the diagonal, block-diagonal, full and single-generator kinds.
    pub fn closed_by_construction(&self) -> bool {
        self.closed_by_construction
    }

    /// Coordinates `⟨x, h_i⟩₂`.
    pub fn coefficients(&self, x: &HermitianElement) -> Vec<f64> {
        self.basis.iter().map(|h| h.inner2(x)).collect()
    }

    /// `Σ c_i h_i`.
    pub fn combine(&self, coefficients: &[f64]) -> HermitianElement {
        let terms: Vec<(f64, &HermitianElement)> = coefficients.iter().copied().zip(&self.basis).collect();
        HermitianElement::combination(&self.algebra, &terms)
    }

    /// The τ-orthogonal projector `P_H`.
    pub fn project(&self, x: &HermitianElement) -> HermitianElement {
        self.combine(&self.coefficients(x))
    }

    /// `‖x − P_H x‖₂`.
    pub fn distance_to(&self, x: &HermitianElement) -> f64 {
        (x - &self.project(x)).norm2()
    }

    /// `max |⟨h_i, h_j⟩₂ − δ_ij|`.
    pub fn gram_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner2(b) - target).abs());
            }
        }
        worst
    }

    /// Extends `P_H` complex-linearly to all of `A`; for `H = B_h` with `B` a
    /// subalgebra this is the τ-preserving conditional expectation onto `B`.
    pub fn expectation(&self, x: &AlgebraElement) -> AlgebraElement {
        let re = HermitianElement::new(x.clone());
        let im = HermitianElement::new(x.scale_complex(C64::new(0.0, -1.0)));
        let pr = self.project(&re);
        let pi = self.project(&im);
        pr.as_element() + &pi.as_element().scale_complex(C64::new(0.0, 1.0))
    }
}

/// Modified Gram–Schmidt (with one reorthogonalization pass) under `⟨·,·⟩₂`.
pub fn orthonormalize(generators: &[HermitianElement]) -> Result<Subspace> {
    let first = generators
        .first()
        .ok_or_else(|| Error::InvalidArgument("no generators".into()))?;
    let algebra = first.algebra().clone();
    for g in generators {
        ensure_same(&algebra, g.algebra())?;
    }
    let basis = gram_schmidt(&[], generators);
    if basis.is_empty() {
        return Err(Error::EmptySubspace);
    }
    Ok(Subspace::from_orthonormal(&algebra, basis, false))
}

/// Orthonormalizes `candidates` against `fixed` (assumed orthonormal) and
/// against each other, dropping dependent candidates.
fn gram_schmidt(fixed: &[HermitianElement], candidates: &[HermitianElement]) -> Vec<HermitianElement> {
    let mut out: Vec<HermitianElement> = Vec::new();
    for g in candidates {
        let norm0 = g.norm2();
        if norm0 == 0.0 {
            continue;
        }
        let mut v = g.clone();
        for _ in 0..2 {
            for h in fixed.iter().chain(&out) {
                v = v.axpy(-h.inner2(&v), h);
            }
        }
        let n = v.norm2();
        if n > DEPENDENCE_TOL * norm0 {
            out.push(v.scale(1.0 / n));
        }
    }
    out
}

/// Algebra compatibility check, then `P_H x`.
pub fn project_subspace(h: &Subspace, x: &HermitianElement) -> Result<HermitianElement> {
    ensure_same(h.algebra(), x.algebra())?;
    Ok(h.project(x))
}

/// Hermitian generators of the full matrix algebra on each index group:
/// `E_ii`, `(E_ij + E_ji)/√2` and `i(E_ij − E_ji)/√2`.
fn group_generators(algebra: &Algebra, groups: &[(usize, Vec<usize>)]) -> Vec<HermitianElement> {
    let mut gens = Vec::new();
    for (block, idx) in groups {
        for (a, &i) in idx.iter().enumerate() {
            gens.push(HermitianElement::new(matrix_unit(algebra, *block, i, i)));
            for &j in &idx[a + 1..] {
                let eij = matrix_unit(algebra, *block, i, j);
                let eji = matrix_unit(algebra, *block, j, i);
                gens.push(HermitianElement::new((&eij + &eji).scale(FRAC_1_SQRT_2)));
                gens.push(HermitianElement::new(
                    (&eij - &eji).scale_complex(C64::new(0.0, FRAC_1_SQRT_2)),
                ));
            }
        }
    }
    gens
}

/// An orthonormal basis of `A_h`.
pub fn hermitian_basis(algebra: &Algebra) -> Vec<HermitianElement> {
    let groups: Vec<(usize, Vec<usize>)> = algebra
        .blocks()
        .iter()
        .enumerate()
        .map(|(b, shape)| (b, (0..shape.dim).collect()))
        .collect();
    gram_schmidt(&[], &group_generators(algebra, &groups))
}

/// The τ-orthogonal complement `S` of `H` in `A_h`.
pub fn orthogonal_supplement(h: &Subspace) -> Subspace {
    let candidates = hermitian_basis(h.algebra());
    let basis = gram_schmidt(h.basis(), &candidates);
    Subspace::from_orthonormal(h.algebra(), basis, false)
}

/// Named subspaces of `A_h`.
#[derive(Debug, Clone)]
pub enum SubspaceKind {
    /// Diagonal Hermitians (the maximal abelian case).
    Diagonal,
    /// Hermitian part of the subalgebra of matrices supported on the given
    /// index groups. Indices are 0-based positions along the concatenated
    /// diagonal; every group must lie inside one algebra block and the
    /// groups must partition the diagonal.
    BlockDiagonal(Vec<Vec<usize>>),
    /// All of `A_h`.
    Full,
    SingleGenerator(HermitianElement),
    Span(Vec<HermitianElement>),
}

/// Maps a global diagonal partition to `(block, local indices)` groups.
fn resolve_partition(algebra: &Algebra, partition: &[Vec<usize>]) -> Result<Vec<(usize, Vec<usize>)>> {
    let n = algebra.total_dim();
    let mut owner = Vec::with_capacity(n);
    for (b, shape) in algebra.blocks().iter().enumerate() {
        let offset = owner.len();
        owner.extend((0..shape.dim).map(|i| (b, offset, i)));
    }
    let mut seen = vec![false; n];
    let mut groups = Vec::new();
    for group in partition {
        let Some(&first) = group.first() else {
            return Err(Error::InvalidPartition("empty group".into()));
        };
        if first >= n {
            return Err(Error::InvalidPartition(format!("index {first} out of range")));
        }
        let block = owner[first].0;
        let mut local = Vec::with_capacity(group.len());
        for &g in group {
            if g >= n {
                return Err(Error::InvalidPartition(format!("index {g} out of range")));
            }
            if seen[g] {
                return Err(Error::InvalidPartition(format!("index {g} repeated")));
            }
            seen[g] = true;
            let (b, _, i) = owner[g];
            if b != block {
                return Err(Error::InvalidPartition(format!(
                    "group {group:?} spans several algebra blocks"
                )));
            }
            local.push(i);
        }
        groups.push((block, local));
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(format!("index {missing} not covered")));
    }
    Ok(groups)
}

pub fn standard_subspace(algebra: &Algebra, kind: &SubspaceKind) -> Result<Subspace> {
    match kind {
        SubspaceKind::Diagonal => {
            let partition: Vec<Vec<usize>> = (0..algebra.total_dim()).map(|i| vec![i]).collect();
            standard_subspace(algebra, &SubspaceKind::BlockDiagonal(partition))
        }
        SubspaceKind::BlockDiagonal(partition) => {
            let groups = resolve_partition(algebra, partition)?;
            let basis = gram_schmidt(&[], &group_generators(algebra, &groups));
            Ok(Subspace::from_orthonormal(algebra, basis, true))
        }
        SubspaceKind::Full => Ok(Subspace::from_orthonormal(algebra, hermitian_basis(algebra), true)),
        SubspaceKind::SingleGenerator(x) => {
            ensure_same(algebra, x.algebra())?;
            let mut s = orthonormalize(std::slice::from_ref(x))?;
            s.closed_by_construction = true;
            Ok(s)
        }
        SubspaceKind::Span(gens) => {
            for g in gens {
                ensure_same(algebra, g.algebra())?;
            }
            orthonormalize(gens)
        }
    }
}

/// A pair `(x, y)` in `H` with `[x, [x, y]] ∉ H`.
#[derive(Debug, Clone)]
pub struct ClosureWitness {
    pub x: HermitianElement,
    pub y: HermitianElement,
    /// Basis triple `(i, j, k)` of the failing polarized bracket.
    pub triple: (usize, usize, usize),
    /// `[x, [x, y]]`.
    pub offending: HermitianElement,
    /// `‖offending − P_H offending‖₂`.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub enum Closure {
    Pass { max_residual: f64 },
    Fail(Box<ClosureWitness>),
}

impl Closure {
    pub fn passed(&self) -> bool {
        matches!(self, Closure::Pass { .. })
    }
}

fn double_bracket(x: &HermitianElement, y: &HermitianElement) -> HermitianElement {
    let inner = x.as_element().commutator(y.as_element());
    HermitianElement::new(x.as_element().commutator(&inner))
}

/// Polarized double-bracket test over all basis triples.
pub fn check_double_bracket(h: &Subspace, tol: f64) -> Closure {
    let basis = h.basis();
    let k = basis.len();
    // The residual is measured in whichever of H and its complement is
    // smaller.
    let complement = (2 * k > h.algebra().hermitian_dim()).then(|| orthogonal_supplement(h));
    let residual = |b: &HermitianElement| match &complement {
        Some(s) => s.project(b).norm2(),
        None => h.distance_to(b),
    };

    let commutators: Vec<Vec<AlgebraElement>> = basis
        .iter()
        .map(|a| {
            basis
                .iter()
                .map(|b| a.as_element().commutator(b.as_element()))
                .collect()
        })
        .collect();

    let mut max_residual: f64 = 0.0;
    for i in 0..k {
        for j in i..k {
            for l in 0..k {
                let b = HermitianElement::new(
                    &basis[i].as_element().commutator(&commutators[j][l])
                        + &basis[j].as_element().commutator(&commutators[i][l]),
                );
                let r = residual(&b);
                if r > tol {
                    return Closure::Fail(Box::new(witness(h, i, j, l, tol)));
                }
                max_residual = max_residual.max(r);
            }
        }
    }
    Closure::Pass { max_residual }
}

fn witness(h: &Subspace, i: usize, j: usize, l: usize, tol: f64) -> ClosureWitness {
    let basis = h.basis();
    let y = basis[l].clone();
    let make = |x: HermitianElement| {
        let offending = double_bracket(&x, &y);
        let residual = h.distance_to(&offending);
        (x, offending, residual)
    };
    let mut candidates = vec![make(basis[i].clone())];
    if j != i {
        candidates.push(make(basis[j].clone()));
        // Diagonal terms in H make the polarized term the failing part of
        // [h_i + h_j, [h_i + h_j, y]].
        candidates.push(make(&basis[i] + &basis[j]));
    }
    let (x, offending, residual) = candidates
        .into_iter()
        .find(|c| c.2 > tol)
        .expect("polarized failure implies a failing double bracket");
    ClosureWitness {
        x,
        y,
        triple: (i, j, l),
        offending,
        residual,
    }
}

/// `M = e^H`, with a flag recording whether `H` passed the closure test.
#[derive(Debug, Clone)]
pub struct ConvexSubmanifold {
    subspace: Subspace,
    closure_certified: bool,
}

impl ConvexSubmanifold {
    /// Runs [`check_double_bracket`] (skipped for subspaces closed by
    /// construction) and certifies on success.
    pub fn certify(subspace: Subspace) -> std::result::Result<Self, Box<ClosureWitness>> {
        Self::certify_with_tol(subspace, DEFAULT_CLOSURE_TOL)
    }

    pub fn certify_with_tol(subspace: Subspace, tol: f64) -> std::result::Result<Self, Box<ClosureWitness>> {
        if !subspace.closed_by_construction {
            if let Closure::Fail(w) = check_double_bracket(&subspace, tol) {
                return Err(w);
            }
        }
        Ok(Self {
            subspace,
            closure_certified: true,
        })
    }

    /// `e^H` without a closure certificate; membership still works.
    pub fn uncertified(subspace: Subspace) -> Self {
        Self {
            subspace,
            closure_certified: false,
        }
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn algebra(&self) -> &Algebra {
        self.subspace.algebra()
    }

    pub fn closure_certified(&self) -> bool {
        self.closure_certified
    }

    /// `‖ln a − P_H ln a‖₂ / (1 + ‖ln a‖₂)`.
    pub fn membership_residual(&self, a: &PositiveElement) -> f64 {
        let l = a.ln();
        self.subspace.distance_to(&l) / (1.0 + l.norm2())
    }

    /// `a ∈ e^H` iff `ln a ∈ H` within `tol·(1 + ‖ln a‖₂)`.
    pub fn membership(&self, a: &PositiveElement, tol: f64) -> bool {
        self.membership_residual(a) <= tol
    }

    pub fn tangent_at(&self, p: &PositiveElement) -> Result<TangentProjector> {
        ensure_same(self.algebra(), p.algebra())?;
        let residual = self.membership_residual(p);
        if residual > DEFAULT_MEMBERSHIP_TOL {
            return Err(Error::NotInSubmanifold { residual });
        }
        Ok(TangentProjector {
            base: p.clone(),
            sqrt: p.sqrt(),
            inv_sqrt: p.inv_sqrt(),
            subspace: self.subspace.clone(),
        })
    }

    /// Whether `aba ∈ M` for `a, b ∈ M`.
    pub fn aba_closure_test(&self, a: &PositiveElement, b: &PositiveElement, tol: f64) -> Result<bool> {
        ensure_same(self.algebra(), a.algebra())?;
        ensure_same(self.algebra(), b.algebra())?;
        for p in [a, b] {
            let residual = self.membership_residual(p);
            if residual > tol {
                return Err(Error::NotInSubmanifold { residual });
            }
        }
        let aba = PositiveElement::new(a.value().sandwich(b.value()))?;
        Ok(self.membership(&aba, tol))
    }
}

/// Searches `a = e^{s x}`, `b = e^{t y}` over `grid × grid` for a pair with
/// `aba ∉ M`. Returns the first `(s, t)` found.
pub fn falsification_scan(
    m: &ConvexSubmanifold,
    x: &HermitianElement,
    y: &HermitianElement,
    grid: &[f64],
    tol: f64,
) -> Result<Option<(f64, f64)>> {
    ensure_same(m.algebra(), x.algebra())?;
    ensure_same(m.algebra(), y.algebra())?;
    for &s in grid {
        let a = PositiveElement::exp(&x.scale(s))?;
        for &t in grid {
            let b = PositiveElement::exp(&y.scale(t))?;
            let aba = PositiveElement::new(a.value().sandwich(b.value()))?;
            if !m.membership(&aba, tol) {
                return Ok(Some((s, t)));
            }
        }
    }
    Ok(None)
}

/// `Q_p(v) = p^{1/2} P_H(p^{-1/2} v p^{-1/2}) p^{1/2}`, the metric-orthogonal
/// projector onto `T_pM = p^{1/2} H p^{1/2}`.
#[derive(Debug, Clone)]
pub struct TangentProjector {
    base: PositiveElement,
    sqrt: HermitianElement,
    inv_sqrt: HermitianElement,
    subspace: Subspace,
}

impl TangentProjector {
    pub fn base(&self) -> &PositiveElement {
        &self.base
    }

    pub fn apply(&self, v: &HermitianElement) -> HermitianElement {
        let w = self.inv_sqrt.sandwich(v);
        self.sqrt.sandwich(&self.subspace.project(&w))
    }

    /// Components `⟨v, p^{1/2} h_i p^{1/2}⟩_p = τ(h_i p^{-1/2} v p^{-1/2})`.
    pub fn components(&self, v: &HermitianElement) -> Vec<f64> {
        self.subspace.coefficients(&self.inv_sqrt.sandwich(v))
    }

    /// `p^{1/2} h_i p^{1/2}`, a metric-orthonormal basis of `T_pM`.
    pub fn tangent_basis(&self) -> Vec<HermitianElement> {
        self.subspace.basis().iter().map(|h| unwhiten(&self.base, h)).collect()
    }

    /// `v` transported to the identity, `p^{-1/2} v p^{-1/2}`.
    pub fn whiten(&self, v: &HermitianElement) -> HermitianElement {
        whiten(&self.base, v)
    }
}
