//! Finite-dimensional commutative local algebras over a prime field.
//!
//! An algebra is given by structure constants on a fixed basis, a unit
//! vector, and a designated basis of the maximal ideal. Locality is never
//! inferred: the loader proves that the declared ideal is nilpotent and of
//! codimension one, which certifies residue field k.
//!
//! Tensor products use the left-factor-major lexicographic basis order
//! throughout: the pair (i, j) sits at index `i * dim_right + j`. Iterated
//! tensors are left-nested, which makes the flattened order associative.
//! Large tensor powers keep a lazy pair representation instead of a
//! materialized structure-constant table.

use crate::field::PrimeField;
use crate::linalg::{rref_rank, solve_affine, Backend, Matrix};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Tensor products up to this dimension get a materialized table.
pub const TABLE_DIM_LIMIT: usize = 1024;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("exponent must be at least 2, got {0}")]
    InvalidExponent(usize),
    #[error("field mismatch between tensor factors")]
    FieldMismatch,
    #[error("factor index {j} out of range 1..={n}")]
    IndexOutOfRange { j: usize, n: usize },
    #[error("multiplication not associative at basis triple ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("multiplication not commutative at basis pair ({0}, {1})")]
    NotCommutative(usize, usize),
    #[error("declared unit does not act as identity on basis element {0}")]
    UnitNotIdentity(usize),
    #[error("not local: {0}")]
    NotLocal(String),
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
}

type SparseVec = Vec<(u32, u64)>;

#[derive(Clone, Debug)]
enum AlgebraKind {
    /// Flat table of basis products, index `u * dim + v`.
    Table(Vec<SparseVec>),
    /// Lazy tensor pair; products are computed factorwise on demand.
    TensorPair {
        left: Arc<FiniteDimAlgebra>,
        right: Arc<FiniteDimAlgebra>,
    },
}

/// A finite-dimensional commutative algebra with certified local structure.
#[derive(Clone, Debug)]
pub struct FiniteDimAlgebra {
    field: PrimeField,
    dim: usize,
    labels: Vec<String>,
    kind: AlgebraKind,
    unit: Vec<u64>,
    maxideal: Vec<Vec<u64>>,
    /// The residue functional: 1 on the unit, 0 on the maximal ideal.
    counit: Vec<u64>,
}

/// Proof artifact from [`FiniteDimAlgebra::verify_local`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalCertificate {
    /// Least N with m^N = 0.
    pub nilpotency_index: usize,
    /// Always 1 for a certified algebra.
    pub codim: usize,
}

impl fmt::Display for FiniteDimAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "algebra of dim {} over F_{}", self.dim, self.field.p())
    }
}

impl FiniteDimAlgebra {
    /// k[x]/(x^e) with basis 1, x, ..., x^{e-1} and maximal ideal (x).
    pub fn truncated_polynomial(field: PrimeField, e: usize) -> Result<Arc<Self>, AlgebraError> {
        if e < 2 {
            return Err(AlgebraError::InvalidExponent(e));
        }
        let mut table = vec![SparseVec::new(); e * e];
        for u in 0..e {
            for v in 0..e {
                if u + v < e {
                    table[u * e + v] = vec![((u + v) as u32, 1)];
                }
            }
        }
        let labels = (0..e)
            .map(|i| match i {
                0 => "1".to_string(),
                1 => "x".to_string(),
                i => format!("x^{i}"),
            })
            .collect();
        let mut unit = vec![0u64; e];
        unit[0] = 1;
        let maxideal = (1..e)
            .map(|i| {
                let mut v = vec![0u64; e];
                v[i] = 1;
                v
            })
            .collect();
        let alg = FiniteDimAlgebra {
            field,
            dim: e,
            labels,
            kind: AlgebraKind::Table(table),
            unit,
            maxideal,
            counit: {
                let mut c = vec![0u64; e];
                c[0] = 1;
                c
            },
        };
        alg.verify_local()?;
        Ok(Arc::new(alg))
    }

    /// The field itself as a one-dimensional algebra (empty maximal ideal).
    /// Accepted by the loader; the theorem pipeline rejects it later because
    /// its residue field is projective.
    pub fn ground_field(field: PrimeField) -> Arc<Self> {
        FiniteDimAlgebra::from_structure_constants(
            field,
            1,
            vec!["1".to_string()],
            &[(0, 0, 0, 1)],
            vec![1],
            vec![],
        )
        .expect("the ground field is a valid local algebra")
    }

    /// Build from explicit structure constants and verify every invariant:
    /// commutativity, associativity, unit, ideal closure, nilpotency,
    /// codimension one.
    pub fn from_structure_constants(
        field: PrimeField,
        dim: usize,
        labels: Vec<String>,
        triples: &[(usize, usize, usize, u64)],
        unit: Vec<u64>,
        maxideal: Vec<Vec<u64>>,
    ) -> Result<Arc<Self>, AlgebraError> {
        if dim == 0 {
            return Err(AlgebraError::Dimension("dimension must be positive".into()));
        }
        if labels.len() != dim {
            return Err(AlgebraError::Dimension(format!(
                "{} labels for dimension {}",
                labels.len(),
                dim
            )));
        }
        if unit.len() != dim {
            return Err(AlgebraError::Dimension("unit vector has wrong length".into()));
        }
        for v in &maxideal {
            if v.len() != dim {
                return Err(AlgebraError::Dimension(
                    "maximal ideal basis vector has wrong length".into(),
                ));
            }
        }
        let mut table = vec![SparseVec::new(); dim * dim];
        for &(u, v, w, c) in triples {
            if u >= dim || v >= dim || w >= dim {
                return Err(AlgebraError::Dimension(format!(
                    "structure constant index ({u},{v},{w}) out of range"
                )));
            }
            let c = field.reduce(c);
            if c == 0 {
                continue;
            }
            let row = &mut table[u * dim + v];
            match row.binary_search_by_key(&(w as u32), |e| e.0) {
                Ok(i) => {
                    let s = field.add(row[i].1, c);
                    if s == 0 {
                        row.remove(i);
                    } else {
                        row[i].1 = s;
                    }
                }
                Err(i) => row.insert(i, (w as u32, c)),
            }
        }
        let unit: Vec<u64> = unit.into_iter().map(|v| field.reduce(v)).collect();
        let maxideal: Vec<Vec<u64>> = maxideal
            .into_iter()
            .map(|v| v.into_iter().map(|x| field.reduce(x)).collect())
            .collect();
        let mut alg = FiniteDimAlgebra {
            field,
            dim,
            labels,
            kind: AlgebraKind::Table(table),
            unit,
            maxideal,
            counit: vec![],
        };
        alg.verify_table_axioms()?;
        alg.verify_local()?;
        alg.counit = alg.solve_counit()?;
        Ok(Arc::new(alg))
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn unit(&self) -> &[u64] {
        &self.unit
    }

    pub fn maxideal_basis(&self) -> &[Vec<u64>] {
        &self.maxideal
    }

    /// Residue functional: coordinates of the projection A -> A/m = k.
    pub fn counit(&self) -> &[u64] {
        &self.counit
    }

    /// Unit component of an element (its image in A/m pulled back along 1).
    pub fn unit_component(&self, x: &[u64]) -> u64 {
        let f = self.field;
        x.iter()
            .zip(self.counit.iter())
            .fold(0u64, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
    }

    /// Product of two basis elements as a sparse coordinate vector.
    pub fn mul_basis(&self, u: usize, v: usize) -> SparseVec {
        match &self.kind {
            AlgebraKind::Table(t) => t[u * self.dim + v].clone(),
            AlgebraKind::TensorPair { left, right } => {
                let dr = right.dim;
                let (ul, ur) = (u / dr, u % dr);
                let (vl, vr) = (v / dr, v % dr);
                let pl = left.mul_basis(ul, vl);
                let pr = right.mul_basis(ur, vr);
                let f = self.field;
                let mut out = SparseVec::with_capacity(pl.len() * pr.len());
                for &(wl, cl) in &pl {
                    for &(wr, cr) in &pr {
                        out.push((wl * dr as u32 + wr, f.mul(cl, cr)));
                    }
                }
                out.sort_by_key(|e| e.0);
                out
            }
        }
    }

    /// Product of two coordinate vectors.
    pub fn mul_elems(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let f = self.field;
        let mut out = vec![0u64; self.dim];
        for (u, &xu) in x.iter().enumerate() {
            if xu == 0 {
                continue;
            }
            for (v, &yv) in y.iter().enumerate() {
                if yv == 0 {
                    continue;
                }
                let c = f.mul(xu, yv);
                for &(w, cw) in &self.mul_basis(u, v) {
                    out[w as usize] = f.add(out[w as usize], f.mul(c, cw));
                }
            }
        }
        out
    }

    /// Matrix of left multiplication by `x` on the regular module.
    pub fn left_mult_matrix(&self, x: &[u64], backend: Backend) -> Matrix {
        let f = self.field;
        let mut entries = Vec::new();
        for (u, &xu) in x.iter().enumerate() {
            if xu == 0 {
                continue;
            }
            for v in 0..self.dim {
                for &(w, c) in &self.mul_basis(u, v) {
                    entries.push((w as usize, v, f.mul(xu, c)));
                }
            }
        }
        Matrix::from_entries(f, self.dim, self.dim, backend, entries)
    }

    fn verify_table_axioms(&self) -> Result<(), AlgebraError> {
        // Unit acts as identity.
        for v in 0..self.dim {
            let mut e = vec![0u64; self.dim];
            e[v] = 1;
            if self.mul_elems(&self.unit, &e) != e || self.mul_elems(&e, &self.unit) != e {
                return Err(AlgebraError::UnitNotIdentity(v));
            }
        }
        // Commutativity on basis pairs.
        for u in 0..self.dim {
            for v in (u + 1)..self.dim {
                if self.mul_basis(u, v) != self.mul_basis(v, u) {
                    return Err(AlgebraError::NotCommutative(u, v));
                }
            }
        }
        // Associativity on basis triples.
        let basis = |i: usize| {
            let mut e = vec![0u64; self.dim];
            e[i] = 1;
            e
        };
        for u in 0..self.dim {
            for v in 0..self.dim {
                let uv = self.mul_elems(&basis(u), &basis(v));
                for w in 0..self.dim {
                    let lhs = self.mul_elems(&uv, &basis(w));
                    let vw = self.mul_elems(&basis(v), &basis(w));
                    let rhs = self.mul_elems(&basis(u), &vw);
                    if lhs != rhs {
                        return Err(AlgebraError::NotAssociative(u, v, w));
                    }
                }
            }
        }
        Ok(())
    }

    fn solve_counit(&self) -> Result<Vec<u64>, AlgebraError> {
        let mut rows = vec![self.unit.clone()];
        rows.extend(self.maxideal.iter().cloned());
        let m = Matrix::from_rows(self.field, self.dim, rows);
        let mut rhs = vec![0u64; m.rows()];
        rhs[0] = 1;
        match solve_affine(&m, &rhs).expect("dimensions agree") {
            Some(s) if s.kernel_basis.is_empty() => Ok(s.particular),
            _ => Err(AlgebraError::NotLocal(
                "unit and maximal ideal do not span the algebra uniquely".into(),
            )),
        }
    }

    /// Prove locality: span(m) is a two-sided nilpotent ideal of codimension
    /// one not containing the unit. Returns the nilpotency index.
    pub fn verify_local(&self) -> Result<LocalCertificate, AlgebraError> {
        let f = self.field;
        let mrank = if self.maxideal.is_empty() {
            0
        } else {
            rref_rank(&Matrix::from_rows(f, self.dim, self.maxideal.to_vec())).rank
        };
        if self.dim - mrank != 1 {
            return Err(AlgebraError::NotLocal(format!(
                "maximal ideal has codimension {}, expected 1",
                self.dim - mrank
            )));
        }
        if mrank != self.maxideal.len() {
            return Err(AlgebraError::NotLocal(
                "maximal ideal basis is linearly dependent".into(),
            ));
        }
        // Unit must lie outside the ideal.
        {
            let mut rows = self.maxideal.to_vec();
            rows.push(self.unit.clone());
            let r = rref_rank(&Matrix::from_rows(f, self.dim, rows)).rank;
            if r != mrank + 1 {
                return Err(AlgebraError::NotLocal("unit lies in the maximal ideal".into()));
            }
        }
        // Ideal closure: e_u * g stays in span(m) for every basis element.
        let mspan = if self.maxideal.is_empty() {
            None
        } else {
            Some(rref_rank(&Matrix::from_rows(f, self.dim, self.maxideal.to_vec())))
        };
        if let Some(ref span) = mspan {
            for u in 0..self.dim {
                let mut e = vec![0u64; self.dim];
                e[u] = 1;
                for g in &self.maxideal {
                    let prod = self.mul_elems(&e, g);
                    if !in_row_span(f, &span.matrix, &span.pivots, &prod) {
                        return Err(AlgebraError::NotLocal(format!(
                            "product of basis element {u} with an ideal generator leaves the ideal"
                        )));
                    }
                }
            }
        }
        // Nilpotency: iterate ideal powers until they vanish.
        let mut power: Vec<Vec<u64>> = self.maxideal.to_vec();
        let mut index = 1usize;
        while !power.is_empty() {
            if index > self.dim + 1 {
                return Err(AlgebraError::NotLocal(
                    "maximal ideal is not nilpotent".into(),
                ));
            }
            let mut next: Vec<Vec<u64>> = Vec::new();
            for x in &power {
                for g in &self.maxideal {
                    let prod = self.mul_elems(x, g);
                    if prod.iter().any(|&v| v != 0) {
                        next.push(prod);
                    }
                }
            }
            if next.is_empty() {
                power = next;
            } else {
                let red = rref_rank(&Matrix::from_rows(f, self.dim, next));
                let mut basis = Vec::with_capacity(red.rank);
                for i in 0..red.rank {
                    let mut v = vec![0u64; self.dim];
                    for (c, val) in red.matrix.row_entries(i) {
                        v[c] = val;
                    }
                    basis.push(v);
                }
                power = basis;
            }
            index += 1;
        }
        Ok(LocalCertificate {
            nilpotency_index: index,
            codim: 1,
        })
    }

    /// Tensor product over the common ground field.
    pub fn tensor(
        a: &Arc<FiniteDimAlgebra>,
        b: &Arc<FiniteDimAlgebra>,
    ) -> Result<Arc<FiniteDimAlgebra>, AlgebraError> {
        if a.field != b.field {
            return Err(AlgebraError::FieldMismatch);
        }
        let f = a.field;
        let dim = a.dim * b.dim;
        let labels: Vec<String> = (0..a.dim)
            .flat_map(|i| {
                let b_labels = &b.labels;
                let al = a.labels[i].clone();
                b_labels.iter().map(move |bl| format!("{al}⊗{bl}"))
            })
            .collect();
        let unit = kron_vec(f, &a.unit, &b.unit);
        // m_{A⊗B} = m_A ⊗ B + A ⊗ m_B. A basis: {g ⊗ e_j} for g in m_A and
        // all j, plus {1_A ⊗ h} for h in m_B. Counting gives codimension one.
        let mut maxideal = Vec::with_capacity(dim - 1);
        for g in &a.maxideal {
            for j in 0..b.dim {
                let mut ej = vec![0u64; b.dim];
                ej[j] = 1;
                maxideal.push(kron_vec(f, g, &ej));
            }
        }
        for h in &b.maxideal {
            maxideal.push(kron_vec(f, &a.unit, h));
        }
        let counit = kron_vec(f, &a.counit, &b.counit);
        let kind = if dim <= TABLE_DIM_LIMIT {
            let lazy = AlgebraKind::TensorPair { left: a.clone(), right: b.clone() };
            let probe = FiniteDimAlgebra {
                field: f,
                dim,
                labels: Vec::new(),
                kind: lazy,
                unit: Vec::new(),
                maxideal: Vec::new(),
                counit: Vec::new(),
            };
            let mut table = vec![SparseVec::new(); dim * dim];
            for u in 0..dim {
                for v in 0..dim {
                    table[u * dim + v] = probe.mul_basis(u, v);
                }
            }
            AlgebraKind::Table(table)
        } else {
            AlgebraKind::TensorPair { left: a.clone(), right: b.clone() }
        };
        Ok(Arc::new(FiniteDimAlgebra {
            field: f,
            dim,
            labels,
            kind,
            unit,
            maxideal,
            counit,
        }))
    }

    /// Left-nested n-fold tensor power; returns all stages R_1, ..., R_n.
    pub fn tensor_power_stages(
        r1: &Arc<FiniteDimAlgebra>,
        n: usize,
    ) -> Result<Vec<Arc<FiniteDimAlgebra>>, AlgebraError> {
        assert!(n >= 1);
        let mut stages = vec![r1.clone()];
        for _ in 1..n {
            let prev = stages.last().unwrap();
            stages.push(FiniteDimAlgebra::tensor(prev, r1)?);
        }
        Ok(stages)
    }

    /// Exhaustive structural check, intended for tests and small algebras.
    pub fn verify_invariants(&self) -> Result<LocalCertificate, AlgebraError> {
        self.verify_table_axioms()?;
        self.verify_local()
    }
}

/// Membership of `v` in the row span of an RREF matrix.
fn in_row_span(f: PrimeField, rref_matrix: &Matrix, pivots: &[usize], v: &[u64]) -> bool {
    let mut w = v.to_vec();
    for (i, &pc) in pivots.iter().enumerate() {
        let c = w[pc];
        if c != 0 {
            let neg = f.neg(c);
            for (col, val) in rref_matrix.row_entries(i) {
                w[col] = f.add(w[col], f.mul(neg, val));
            }
        }
    }
    w.iter().all(|&x| x == 0)
}

/// Kronecker product of coordinate vectors, left factor major.
pub fn kron_vec(f: PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() * b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0 {
                out[i * b.len() + j] = f.mul(x, y);
            }
        }
    }
    out
}

/// A unit- and multiplication-preserving map of algebras.
#[derive(Clone, Debug)]
pub struct AlgebraMorphism {
    pub source: Arc<FiniteDimAlgebra>,
    pub target: Arc<FiniteDimAlgebra>,
    pub matrix: Matrix,
}

impl AlgebraMorphism {
    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        self.matrix.mul_vec(x).expect("morphism dimensions match")
    }

    /// Check unit preservation and multiplicativity on all basis pairs.
    pub fn verify(&self) -> Result<(), AlgebraError> {
        if self.apply(self.source.unit()) != self.target.unit() {
            return Err(AlgebraError::UnitNotIdentity(usize::MAX));
        }
        let sd = self.source.dim();
        for u in 0..sd {
            let mut eu = vec![0u64; sd];
            eu[u] = 1;
            let fu = self.apply(&eu);
            for v in 0..sd {
                let mut ev = vec![0u64; sd];
                ev[v] = 1;
                let fv = self.apply(&ev);
                let lhs = self.target.mul_elems(&fu, &fv);
                let prod = self.source.mul_elems(&eu, &ev);
                let rhs = self.apply(&prod);
                if lhs != rhs {
                    return Err(AlgebraError::NotAssociative(u, v, usize::MAX));
                }
            }
        }
        Ok(())
    }
}

/// The j-th factor embedding R_1 -> R_n, x |-> 1 ⊗ ... ⊗ x ⊗ ... ⊗ 1.
///
/// `stages` must be the left-nested tensor stages of R_1 (see
/// [`FiniteDimAlgebra::tensor_power_stages`]); `j` is 1-based.
pub fn factor_embedding(
    stages: &[Arc<FiniteDimAlgebra>],
    j: usize,
) -> Result<AlgebraMorphism, AlgebraError> {
    let n = stages.len();
    if j < 1 || j > n {
        return Err(AlgebraError::IndexOutOfRange { j, n });
    }
    let r1 = &stages[0];
    let rn = &stages[n - 1];
    let f = r1.field();
    let d1 = r1.dim();
    let unit_v = r1.unit().to_vec();
    let mut cols: Vec<Vec<u64>> = Vec::with_capacity(d1);
    for u in 0..d1 {
        let mut eu = vec![0u64; d1];
        eu[u] = 1;
        let mut acc: Vec<u64> = vec![1];
        for slot in 1..=n {
            let factor: &[u64] = if slot == j { &eu } else { &unit_v };
            acc = kron_vec(f, &acc, factor);
        }
        cols.push(acc);
    }
    let mut m = Matrix::zeros(f, rn.dim(), d1, Backend::Auto);
    for (c, col) in cols.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            if v != 0 {
                m.set(r, c, v);
            }
        }
    }
    Ok(AlgebraMorphism {
        source: r1.clone(),
        target: rn.clone(),
        matrix: m,
    })
}

/// Inclusion R_n -> R_{n+1} of the first n tensor factors, x |-> x ⊗ 1.
pub fn stage_inclusion(
    stages: &[Arc<FiniteDimAlgebra>],
    n: usize,
) -> Result<AlgebraMorphism, AlgebraError> {
    if n < 1 || n + 1 > stages.len() {
        return Err(AlgebraError::IndexOutOfRange { j: n, n: stages.len() });
    }
    let rn = &stages[n - 1];
    let rn1 = &stages[n];
    let r1 = &stages[0];
    let f = rn.field();
    let mut m = Matrix::zeros(f, rn1.dim(), rn.dim(), Backend::Auto);
    for w in 0..rn.dim() {
        let mut ew = vec![0u64; rn.dim()];
        ew[w] = 1;
        let img = kron_vec(f, &ew, r1.unit());
        for (r, &v) in img.iter().enumerate() {
            if v != 0 {
                m.set(r, w, v);
            }
        }
    }
    Ok(AlgebraMorphism {
        source: rn.clone(),
        target: rn1.clone(),
        matrix: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn trunc_poly_f2_square() {
        let a = FiniteDimAlgebra::truncated_polynomial(f(2), 2).unwrap();
        assert_eq!(a.dim(), 2);
        assert_eq!(a.maxideal_basis().len(), 1);
        // x * x = 0
        assert!(a.mul_basis(1, 1).is_empty());
        let cert = a.verify_local().unwrap();
        assert_eq!(cert.nilpotency_index, 2);
    }

    #[test]
    fn trunc_poly_f3_cube() {
        let a = FiniteDimAlgebra::truncated_polynomial(f(3), 3).unwrap();
        assert_eq!(a.dim(), 3);
        assert_eq!(a.maxideal_basis().len(), 2);
        assert_eq!(a.verify_local().unwrap().nilpotency_index, 3);
    }

    #[test]
    fn trunc_poly_f2_fourth() {
        let a = FiniteDimAlgebra::truncated_polynomial(f(2), 4).unwrap();
        // m^3 != 0 (contains x^3), m^4 = 0.
        assert_eq!(a.verify_local().unwrap().nilpotency_index, 4);
    }

    #[test]
    fn invalid_exponent_rejected() {
        assert_eq!(
            FiniteDimAlgebra::truncated_polynomial(f(2), 1).unwrap_err(),
            AlgebraError::InvalidExponent(1)
        );
    }

    #[test]
    fn structure_constants_round_trip() {
        // F_2[x]/(x^2) by explicit table.
        let a = FiniteDimAlgebra::from_structure_constants(
            f(2),
            2,
            vec!["1".into(), "x".into()],
            &[(0, 0, 0, 1), (0, 1, 1, 1), (1, 0, 1, 1)],
            vec![1, 0],
            vec![vec![0, 1]],
        )
        .unwrap();
        let b = FiniteDimAlgebra::truncated_polynomial(f(2), 2).unwrap();
        assert_eq!(a.dim(), b.dim());
        for u in 0..2 {
            for v in 0..2 {
                assert_eq!(a.mul_basis(u, v), b.mul_basis(u, v));
            }
        }
    }

    #[test]
    fn square_zero_plane_is_local() {
        // F_2[x,y]/(x^2, y^2, xy): dim 3, m^2 = 0.
        let a = FiniteDimAlgebra::from_structure_constants(
            f(2),
            3,
            vec!["1".into(), "x".into(), "y".into()],
            &[
                (0, 0, 0, 1),
                (0, 1, 1, 1),
                (1, 0, 1, 1),
                (0, 2, 2, 1),
                (2, 0, 2, 1),
            ],
            vec![1, 0, 0],
            vec![vec![0, 1, 0], vec![0, 0, 1]],
        )
        .unwrap();
        assert_eq!(a.verify_local().unwrap().nilpotency_index, 2);
    }

    #[test]
    fn bad_unit_rejected() {
        // unit = x is not an identity.
        let err = FiniteDimAlgebra::from_structure_constants(
            f(2),
            2,
            vec!["1".into(), "x".into()],
            &[(0, 0, 0, 1), (0, 1, 1, 1), (1, 0, 1, 1)],
            vec![0, 1],
            vec![vec![0, 1]],
        )
        .unwrap_err();
        assert!(matches!(err, AlgebraError::UnitNotIdentity(_)));
    }

    #[test]
    fn tensor_square_dims_and_ideal() {
        let a = FiniteDimAlgebra::truncated_polynomial(f(2), 2).unwrap();
        let t = FiniteDimAlgebra::tensor(&a, &a).unwrap();
        assert_eq!(t.dim(), 4);
        assert_eq!(t.maxideal_basis().len(), 3);
        // Nilpotency index of m_{R_2}: (x⊗1)(1⊗x) = x⊗x != 0, all cubes vanish.
        assert_eq!(t.verify_local().unwrap().nilpotency_index, 3);
        assert!(t.verify_invariants().is_ok());
    }

    #[test]
    fn tensor_with_ground_field_is_identity_like() {
        let a = FiniteDimAlgebra::truncated_polynomial(f(3), 3).unwrap();
        let k = FiniteDimAlgebra::ground_field(f(3));
        let t = FiniteDimAlgebra::tensor(&a, &k).unwrap();
        assert_eq!(t.dim(), a.dim());
        for u in 0..a.dim() {
            for v in 0..a.dim() {
                assert_eq!(t.mul_basis(u, v), a.mul_basis(u, v));
            }
        }
    }

    #[test]
    fn iterated_tensor_dimension() {
        let a = FiniteDimAlgebra::truncated_polynomial(f(2), 2).unwrap();
        let stages = FiniteDimAlgebra::tensor_power_stages(&a, 5).unwrap();
        for (i, s) in stages.iter().enumerate() {
            assert_eq!(s.dim(), 1 << (i + 1));
        }
    }

    #[test]
    fn tensor_flattening_is_associative() {
        let a = FiniteDimAlgebra::truncated_polynomial(f(3), 2).unwrap();
        let b = FiniteDimAlgebra::truncated_polynomial(f(3), 3).unwrap();
        let c = FiniteDimAlgebra::truncated_polynomial(f(3), 2).unwrap();
        let ab_c = FiniteDimAlgebra::tensor(&FiniteDimAlgebra::tensor(&a, &b).unwrap(), &c).unwrap();
        let a_bc = FiniteDimAlgebra::tensor(&a, &FiniteDimAlgebra::tensor(&b, &c).unwrap()).unwrap();
        assert_eq!(ab_c.dim(), a_bc.dim());
        for u in 0..ab_c.dim() {
            for v in 0..ab_c.dim() {
                assert_eq!(ab_c.mul_basis(u, v), a_bc.mul_basis(u, v));
            }
        }
    }

    #[test]
    fn factor_embeddings_f2_square() {
        let a = FiniteDimAlgebra::truncated_polynomial(f(2), 2).unwrap();
        let stages = FiniteDimAlgebra::tensor_power_stages(&a, 2).unwrap();
        let phi1 = factor_embedding(&stages, 1).unwrap();
        let phi2 = factor_embedding(&stages, 2).unwrap();
        phi1.verify().unwrap();
        phi2.verify().unwrap();
        // x ⊗ 1 is basis index 2 (pair (1,0)), 1 ⊗ x is index 1 (pair (0,1)).
        assert_eq!(phi1.apply(&[0, 1]), vec![0, 0, 1, 0]);
        assert_eq!(phi2.apply(&[0, 1]), vec![0, 1, 0, 0]);
        // Images of distinct factors multiply to the mixed monomial x⊗x.
        let t = &stages[1];
        let prod = t.mul_elems(&phi1.apply(&[0, 1]), &phi2.apply(&[0, 1]));
        assert_eq!(prod, vec![0, 0, 0, 1]);
    }

    #[test]
    fn identity_embedding_for_n_one() {
        let a = FiniteDimAlgebra::truncated_polynomial(f(5), 5).unwrap();
        let stages = FiniteDimAlgebra::tensor_power_stages(&a, 1).unwrap();
        let phi = factor_embedding(&stages, 1).unwrap();
        assert_eq!(phi.matrix, Matrix::identity(f(5), 5, Backend::Dense));
    }

    #[test]
    fn embedding_out_of_range() {
        let a = FiniteDimAlgebra::truncated_polynomial(f(2), 2).unwrap();
        let stages = FiniteDimAlgebra::tensor_power_stages(&a, 2).unwrap();
        assert!(matches!(
            factor_embedding(&stages, 3),
            Err(AlgebraError::IndexOutOfRange { j: 3, n: 2 })
        ));
    }

    #[test]
    fn embedding_commutes_with_stage_inclusion() {
        let a = FiniteDimAlgebra::truncated_polynomial(f(2), 2).unwrap();
        let stages = FiniteDimAlgebra::tensor_power_stages(&a, 3).unwrap();
        let phi_n: AlgebraMorphism = factor_embedding(&stages[..2], 1).unwrap();
        let phi_n1 = factor_embedding(&stages, 1).unwrap();
        let incl = stage_inclusion(&stages, 2).unwrap();
        for u in 0..2 {
            let mut e = vec![0u64; 2];
            e[u] = 1;
            assert_eq!(incl.apply(&phi_n.apply(&e)), phi_n1.apply(&e));
        }
    }

    #[test]
    fn counit_kills_ideal() {
        let a = FiniteDimAlgebra::truncated_polynomial(f(3), 3).unwrap();
        let t = FiniteDimAlgebra::tensor(&a, &a).unwrap();
        assert_eq!(t.unit_component(t.unit()), 1);
        for g in t.maxideal_basis() {
            assert_eq!(t.unit_component(g), 0);
        }
    }
}
