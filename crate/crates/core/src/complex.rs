//! Cochain complexes of finite-dimensional modules.
//!
//! Degrees are integers; `modules[t]` sits in degree `min_deg + t` and
//! `diffs[t]` is the map out of it. Every constructor checks d∘d = 0 and
//! equivariance of the differentials.
//!
//! Conventions, fixed once and used everywhere:
//!   shift: (C[i])^m = C^{m+i}, differential scaled by (-1)^i;
//!   truncation τ^{≥n}: degrees below n die, degree n becomes the cokernel
//!   of the incoming differential, with the deterministic pivot rule picking
//!   the cokernel basis.

use crate::algebra::FiniteDimAlgebra;
use crate::field::PrimeField;
use crate::linalg::{
    kernel, rref_rank, solve_affine, AffineSolutionSet, Backend, Matrix, Rref,
};
use crate::module::{FDModule, ModuleError, ModuleMap};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("field mismatch between complexes")]
    FieldMismatch,
    #[error("differentials do not compose to zero at degree {0}")]
    NotAComplex(i64),
    #[error("chain has {modules} modules but {diffs} differentials")]
    LengthMismatch { modules: usize, diffs: usize },
    #[error("cochain of degree {0} is not a cycle")]
    NotACycle(i64),
    #[error("degree {0} is outside the stored range")]
    DegreeOutOfRange(i64),
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error(transparent)]
    LinAlg(#[from] crate::linalg::LinAlgError),
}

/// A bounded cochain complex of verified modules.
#[derive(Clone, Debug)]
pub struct CochainComplex {
    algebra: Arc<FiniteDimAlgebra>,
    min_deg: i64,
    modules: Vec<FDModule>,
    /// `diffs[t]` maps degree `min_deg + t` to `min_deg + t + 1`;
    /// `diffs.len() == modules.len() - 1` (empty complexes store nothing).
    diffs: Vec<Matrix>,
}

/// An element of one degree of a complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    pub degree: i64,
    pub vector: Vec<u64>,
}

impl CochainComplex {
    pub fn new(
        algebra: Arc<FiniteDimAlgebra>,
        min_deg: i64,
        modules: Vec<FDModule>,
        diffs: Vec<Matrix>,
    ) -> Result<Self, ComplexError> {
        if !modules.is_empty() && diffs.len() + 1 != modules.len() {
            return Err(ComplexError::LengthMismatch {
                modules: modules.len(),
                diffs: diffs.len(),
            });
        }
        // Differentials must be equivariant module maps.
        for (t, d) in diffs.iter().enumerate() {
            ModuleMap::new(&modules[t], &modules[t + 1], d.clone())?;
        }
        // d ∘ d = 0.
        for t in 0..diffs.len().saturating_sub(1) {
            let dd = diffs[t + 1].mul_mat(&diffs[t])?;
            if !dd.is_zero() {
                return Err(ComplexError::NotAComplex(min_deg + t as i64));
            }
        }
        Ok(CochainComplex { algebra, min_deg, modules, diffs })
    }

    /// The empty (zero) complex.
    pub fn zero(algebra: Arc<FiniteDimAlgebra>) -> Self {
        CochainComplex { algebra, min_deg: 0, modules: Vec::new(), diffs: Vec::new() }
    }

    /// One module concentrated in a single degree.
    pub fn concentrated(module: FDModule, degree: i64) -> Self {
        CochainComplex {
            algebra: module.algebra().clone(),
            min_deg: degree,
            modules: vec![module],
            diffs: Vec::new(),
        }
    }

    pub fn algebra(&self) -> &Arc<FiniteDimAlgebra> {
        &self.algebra
    }

    pub fn field(&self) -> PrimeField {
        self.algebra.field()
    }

    pub fn min_degree(&self) -> i64 {
        self.min_deg
    }

    pub fn max_degree(&self) -> i64 {
        self.min_deg + self.modules.len() as i64 - 1
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> + '_ {
        self.min_deg..=self.max_degree()
    }

    pub fn module_at(&self, degree: i64) -> Option<&FDModule> {
        if self.modules.is_empty() || degree < self.min_deg || degree > self.max_degree() {
            None
        } else {
            Some(&self.modules[(degree - self.min_deg) as usize])
        }
    }

    pub fn dim_at(&self, degree: i64) -> usize {
        self.module_at(degree).map_or(0, FDModule::dim)
    }

    /// The differential out of `degree`; zero map when out of range.
    pub fn diff_at(&self, degree: i64) -> Matrix {
        let f = self.field();
        if self.modules.is_empty() || degree < self.min_deg || degree > self.max_degree() {
            return Matrix::zeros(f, self.dim_at(degree + 1), self.dim_at(degree), Backend::Dense);
        }
        let t = (degree - self.min_deg) as usize;
        if t < self.diffs.len() {
            self.diffs[t].clone()
        } else {
            Matrix::zeros(f, self.dim_at(degree + 1), self.dim_at(degree), Backend::Dense)
        }
    }

    /// Shift: (C[i])^m = C^{m+i}, differentials scaled by (-1)^i.
    pub fn shift(&self, i: i64) -> CochainComplex {
        let f = self.field();
        let flip = i.rem_euclid(2) == 1;
        let diffs = self
            .diffs
            .iter()
            .map(|d| {
                if !flip {
                    return d.clone();
                }
                let mut m = Matrix::zeros(f, d.rows(), d.cols(), if d.is_sparse() { Backend::Sparse } else { Backend::Dense });
                for r in 0..d.rows() {
                    for (c, v) in d.row_entries(r) {
                        m.set(r, c, f.neg(v));
                    }
                }
                m
            })
            .collect();
        CochainComplex {
            algebra: self.algebra.clone(),
            min_deg: self.min_deg - i,
            modules: self.modules.clone(),
            diffs,
        }
    }

    /// Degreewise direct sum. Finite sums and finite products coincide.
    pub fn sum(parts: &[&CochainComplex]) -> Result<CochainComplex, ComplexError> {
        let nonempty: Vec<&&CochainComplex> = parts.iter().filter(|c| !c.is_empty()).collect();
        let Some(first) = nonempty.first() else {
            return Ok(CochainComplex::zero(
                parts.first().map(|c| c.algebra.clone()).expect("sum of no complexes"),
            ));
        };
        let algebra = first.algebra.clone();
        let min = nonempty.iter().map(|c| c.min_deg).min().unwrap();
        let max = nonempty.iter().map(|c| c.max_degree()).max().unwrap();
        let f = algebra.field();
        let mut modules = Vec::new();
        let mut diffs = Vec::new();
        for deg in min..=max {
            let total: usize = nonempty.iter().map(|c| c.dim_at(deg)).sum();
            let mut acc: Option<FDModule> = None;
            for c in &nonempty {
                if let Some(m) = c.module_at(deg) {
                    acc = Some(match acc {
                        None => m.clone(),
                        Some(prev) => prev.direct_sum(m)?,
                    });
                }
            }
            let module = acc.unwrap_or_else(|| {
                zero_module(&algebra)
            });
            debug_assert_eq!(module.dim(), total);
            modules.push(module);
            if deg < max {
                let rows: usize = nonempty.iter().map(|c| c.dim_at(deg + 1)).sum();
                let cols: usize = nonempty.iter().map(|c| c.dim_at(deg)).sum();
                let mut d = Matrix::zeros(f, rows, cols, Backend::Auto);
                let mut row_off = 0usize;
                let mut col_off = 0usize;
                for c in &nonempty {
                    let block = c.diff_at(deg);
                    for r in 0..block.rows() {
                        for (cc, v) in block.row_entries(r) {
                            d.set(row_off + r, col_off + cc, v);
                        }
                    }
                    row_off += c.dim_at(deg + 1);
                    col_off += c.dim_at(deg);
                }
                diffs.push(d);
            }
        }
        CochainComplex::new(algebra, min, modules, diffs)
    }

    /// dim H^n = dim ker(d^n) - dim im(d^{n-1}).
    pub fn cohomology_dim(&self, n: i64) -> usize {
        let dim_n = self.dim_at(n);
        if dim_n == 0 {
            return 0;
        }
        let out = self.diff_at(n);
        let rank_out = if out.rows() == 0 { 0 } else { rref_rank(&out).rank };
        let inc = self.diff_at(n - 1);
        let rank_in = if inc.cols() == 0 || inc.rows() == 0 { 0 } else { rref_rank(&inc).rank };
        dim_n - rank_out - rank_in
    }

    /// A deterministic basis of representatives for H^n.
    pub fn cohomology_representatives(&self, n: i64) -> Vec<Vec<u64>> {
        let dim_n = self.dim_at(n);
        if dim_n == 0 {
            return Vec::new();
        }
        let f = self.field();
        let out = self.diff_at(n);
        let ker = kernel(&out).canonical().kernel_basis;
        let inc = self.diff_at(n - 1);
        // Boundaries as RREF rows.
        let mut rows: Vec<Vec<u64>> = Vec::new();
        for c in 0..inc.cols() {
            let mut unit = vec![0u64; inc.cols()];
            unit[c] = 1;
            let img = inc.mul_vec(&unit).expect("dims agree");
            if img.iter().any(|&x| x != 0) {
                rows.push(img);
            }
        }
        let mut reps = Vec::new();
        let mut span = rows;
        let mut span_red: Option<Rref> = if span.is_empty() {
            None
        } else {
            Some(rref_rank(&Matrix::from_rows(f, dim_n, span.clone())))
        };
        for v in ker {
            let in_span = match &span_red {
                None => v.iter().all(|&x| x == 0),
                Some(red) => {
                    let mut w = v.clone();
                    for (i, &pc) in red.pivots.iter().enumerate() {
                        let c = w[pc];
                        if c != 0 {
                            let neg = f.neg(c);
                            for (col, val) in red.matrix.row_entries(i) {
                                w[col] = f.add(w[col], f.mul(neg, val));
                            }
                        }
                    }
                    w.iter().all(|&x| x == 0)
                }
            };
            if !in_span {
                reps.push(v.clone());
                span = match span_red {
                    Some(red) => {
                        let mut rows: Vec<Vec<u64>> = (0..red.rank)
                            .map(|i| {
                                let mut r = vec![0u64; dim_n];
                                for (c, val) in red.matrix.row_entries(i) {
                                    r[c] = val;
                                }
                                r
                            })
                            .collect();
                        rows.push(v);
                        rows
                    }
                    None => vec![v],
                };
                span_red = Some(rref_rank(&Matrix::from_rows(f, dim_n, span.clone())));
            }
        }
        reps
    }

    /// Truncation τ^{≥n}: degrees below n vanish, degree n becomes the
    /// cokernel of the incoming differential.
    pub fn truncate_geq(&self, n: i64) -> Result<CochainComplex, ComplexError> {
        if self.is_empty() || n <= self.min_deg {
            return Ok(self.clone());
        }
        if n > self.max_degree() {
            return Ok(CochainComplex::zero(self.algebra.clone()));
        }
        let f = self.field();
        let inc = self.diff_at(n - 1);
        // Row space of the image, for the canonical projection.
        let im_rows: Vec<Vec<u64>> = (0..inc.cols())
            .filter_map(|c| {
                let mut unit = vec![0u64; inc.cols()];
                unit[c] = 1;
                let img = inc.mul_vec(&unit).expect("dims agree");
                img.iter().any(|&x| x != 0).then_some(img)
            })
            .collect();
        let dim_n = self.dim_at(n);
        let (pivots, red): (Vec<usize>, Option<Rref>) = if im_rows.is_empty() {
            (Vec::new(), None)
        } else {
            let red = rref_rank(&Matrix::from_rows(f, dim_n, im_rows));
            (red.pivots.clone(), Some(red))
        };
        let free: Vec<usize> = (0..dim_n).filter(|c| !pivots.contains(c)).collect();
        let qdim = free.len();
        // π: reduce modulo the image, then read off free coordinates.
        let project = |v: &[u64]| -> Vec<u64> {
            let mut w = v.to_vec();
            if let Some(red) = &red {
                for (i, &pc) in red.pivots.iter().enumerate() {
                    let c = w[pc];
                    if c != 0 {
                        let neg = f.neg(c);
                        for (col, val) in red.matrix.row_entries(i) {
                            w[col] = f.add(w[col], f.mul(neg, val));
                        }
                    }
                }
            }
            free.iter().map(|&c| w[c]).collect()
        };
        // ι: free coordinates are genuine coordinates of C^n.
        let module_n = self.module_at(n).expect("degree n is in range");
        let backend = if qdim > 64 { Backend::Sparse } else { Backend::Dense };
        let q_actions: Vec<Matrix> = (0..self.algebra.dim())
            .map(|u| {
                let mut m = Matrix::zeros(f, qdim, qdim, backend);
                for (j, &fc) in free.iter().enumerate() {
                    let mut e = vec![0u64; dim_n];
                    e[fc] = 1;
                    let mut basis_elt = vec![0u64; self.algebra.dim()];
                    basis_elt[u] = 1;
                    let moved = module_n.apply(&basis_elt, &e).expect("dims agree");
                    for (i, v) in project(&moved).into_iter().enumerate() {
                        if v != 0 {
                            m.set(i, j, v);
                        }
                    }
                }
                m
            })
            .collect();
        let q_module = FDModule::new(self.algebra.clone(), qdim, q_actions)?;
        // New outgoing differential: d^n ∘ ι (well defined on the cokernel).
        let out = self.diff_at(n);
        let mut new_d = Matrix::zeros(f, out.rows(), qdim, Backend::Auto);
        for (j, &fc) in free.iter().enumerate() {
            let mut e = vec![0u64; dim_n];
            e[fc] = 1;
            let img = out.mul_vec(&e).expect("dims agree");
            for (r, &v) in img.iter().enumerate() {
                if v != 0 {
                    new_d.set(r, j, v);
                }
            }
        }
        let mut modules = vec![q_module];
        let mut diffs = Vec::new();
        if n < self.max_degree() {
            diffs.push(new_d);
            for deg in (n + 1)..=self.max_degree() {
                modules.push(self.module_at(deg).unwrap().clone());
                if deg < self.max_degree() {
                    diffs.push(self.diff_at(deg));
                }
            }
        }
        CochainComplex::new(self.algebra.clone(), n, modules, diffs)
    }

    /// All preimages of a cycle under the incoming differential.
    pub fn preimage_set(&self, z: &Cochain) -> Result<Option<AffineSolutionSet>, ComplexError> {
        let n = z.degree;
        if z.vector.len() != self.dim_at(n) {
            return Err(ComplexError::DegreeOutOfRange(n));
        }
        let out = self.diff_at(n);
        let dz = out.mul_vec(&z.vector)?;
        if dz.iter().any(|&x| x != 0) {
            return Err(ComplexError::NotACycle(n));
        }
        let inc = self.diff_at(n - 1);
        if inc.cols() == 0 {
            // No incoming module: only the zero cochain is a boundary.
            return Ok(if z.vector.iter().all(|&x| x == 0) {
                Some(AffineSolutionSet {
                    field: self.field(),
                    ambient: 0,
                    particular: Vec::new(),
                    kernel_basis: Vec::new(),
                })
            } else {
                None
            });
        }
        Ok(solve_affine(&inc, &z.vector)?)
    }
}

/// The zero module over an algebra.
pub fn zero_module(algebra: &Arc<FiniteDimAlgebra>) -> FDModule {
    let f = algebra.field();
    let actions = (0..algebra.dim())
        .map(|_| Matrix::zeros(f, 0, 0, Backend::Dense))
        .collect();
    FDModule::new(algebra.clone(), 0, actions).expect("the zero module is always valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FiniteDimAlgebra;
    use crate::field::PrimeField;

    fn trunc(p: u64, e: usize) -> Arc<FiniteDimAlgebra> {
        FiniteDimAlgebra::truncated_polynomial(PrimeField::new(p).unwrap(), e).unwrap()
    }

    fn residue_at(a: &Arc<FiniteDimAlgebra>, deg: i64) -> CochainComplex {
        CochainComplex::concentrated(FDModule::residue(a), deg)
    }

    #[test]
    fn shift_conventions() {
        let a = trunc(2, 2);
        // H^{-i}(k[i]) = k
        for i in 0..5 {
            let c = residue_at(&a, 0).shift(i);
            assert_eq!(c.cohomology_dim(-i), 1);
            for m in -6..=6 {
                if m != -i {
                    assert_eq!(c.cohomology_dim(m), 0);
                }
            }
        }
    }

    #[test]
    fn double_shift_is_identity() {
        let a = trunc(3, 3);
        let k = residue_at(&a, 0);
        let back = k.shift(1).shift(-1);
        assert_eq!(back.min_degree(), k.min_degree());
        assert_eq!(back.dim_at(0), 1);
    }

    #[test]
    fn finite_sum_h0_vanishes() {
        // H^0(⊕_{i=1}^n k[i]) = 0 for all n >= 1.
        let a = trunc(2, 2);
        for n in 1..=8 {
            let shifted: Vec<CochainComplex> =
                (1..=n).map(|i| residue_at(&a, 0).shift(i)).collect();
            let refs: Vec<&CochainComplex> = shifted.iter().collect();
            let total = CochainComplex::sum(&refs).unwrap();
            assert_eq!(total.cohomology_dim(0), 0, "n = {n}");
        }
    }

    #[test]
    fn sum_cohomology_is_degreewise() {
        // H^{-i}(⊕_{i=0}^N k[i]) = 1 for 0 <= i <= N.
        let a = trunc(2, 2);
        let n = 5i64;
        let shifted: Vec<CochainComplex> =
            (0..=n).map(|i| residue_at(&a, 0).shift(i)).collect();
        let refs: Vec<&CochainComplex> = shifted.iter().collect();
        let total = CochainComplex::sum(&refs).unwrap();
        for i in 0..=n {
            assert_eq!(total.cohomology_dim(-i), 1);
        }
        assert_eq!(total.cohomology_dim(1), 0);
        assert_eq!(total.cohomology_dim(-n - 1), 0);
    }

    #[test]
    fn truncation_kills_low_degrees() {
        let a = trunc(2, 2);
        // τ^{≥-1}(k[0] ⊕ k[1] ⊕ k[2]): H^0 = H^{-1} = k, H^{-2} = 0.
        let parts: Vec<CochainComplex> = (0..=2).map(|i| residue_at(&a, 0).shift(i)).collect();
        let refs: Vec<&CochainComplex> = parts.iter().collect();
        let total = CochainComplex::sum(&refs).unwrap();
        let t = total.truncate_geq(-1).unwrap();
        assert_eq!(t.cohomology_dim(0), 1);
        assert_eq!(t.cohomology_dim(-1), 1);
        assert_eq!(t.cohomology_dim(-2), 0);
    }

    #[test]
    fn truncation_above_range_is_zero() {
        let a = trunc(2, 2);
        let t = residue_at(&a, 0).truncate_geq(1).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.cohomology_dim(0), 0);
    }

    #[test]
    fn truncation_matches_identity_family() {
        // cohomology of τ^{≥-n}(⊕_{i=0}^N k[i]) matches ⊕_{i=0}^n k[i].
        let a = trunc(2, 2);
        for nn in 0..=4i64 {
            for n in 0..=nn {
                let parts: Vec<CochainComplex> =
                    (0..=nn).map(|i| residue_at(&a, 0).shift(i)).collect();
                let refs: Vec<&CochainComplex> = parts.iter().collect();
                let total = CochainComplex::sum(&refs).unwrap();
                let t = total.truncate_geq(-n).unwrap();
                for m in -(nn + 1)..=1 {
                    let expected = if m <= 0 && m >= -n { 1 } else { 0 };
                    assert_eq!(t.cohomology_dim(m), expected, "N={nn} n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn truncation_of_exact_piece_preserves_upper_cohomology() {
        // Complex R --x--> R over F_2[x]/(x^2) in degrees 0, 1:
        // H^0 = ker(x) = (x), H^1 = coker(x) = R/(x).
        let a = trunc(2, 2);
        let reg = FDModule::regular(&a);
        let d = a.left_mult_matrix(&[0, 1], Backend::Dense);
        let c = CochainComplex::new(a.clone(), 0, vec![reg.clone(), reg.clone()], vec![d]).unwrap();
        assert_eq!(c.cohomology_dim(0), 1);
        assert_eq!(c.cohomology_dim(1), 1);
        let t = c.truncate_geq(1).unwrap();
        assert_eq!(t.cohomology_dim(1), c.cohomology_dim(1));
        assert_eq!(t.cohomology_dim(0), 0);
    }

    #[test]
    fn preimage_of_zero_is_kernel_through_origin() {
        let a = trunc(2, 2);
        let reg = FDModule::regular(&a);
        let d = a.left_mult_matrix(&[0, 1], Backend::Dense);
        let c = CochainComplex::new(a.clone(), 0, vec![reg.clone(), reg], vec![d]).unwrap();
        let z = Cochain { degree: 1, vector: vec![0, 0] };
        let s = c.preimage_set(&z).unwrap().unwrap();
        assert!(s.particular.iter().all(|&x| x == 0));
        assert_eq!(s.dim(), 1); // ker(x) = (x) is one dimensional
    }

    #[test]
    fn preimage_rejects_non_cycles() {
        let a = trunc(2, 2);
        let reg = FDModule::regular(&a);
        let d = a.left_mult_matrix(&[0, 1], Backend::Dense);
        let c = CochainComplex::new(a.clone(), 0, vec![reg.clone(), reg], vec![d]).unwrap();
        // e_1 = "1" has d(1) = x != 0.
        let z = Cochain { degree: 0, vector: vec![1, 0] };
        assert!(matches!(c.preimage_set(&z), Err(ComplexError::NotACycle(0))));
    }

    #[test]
    fn preimage_at_bottom_degree() {
        let a = trunc(2, 2);
        let k = residue_at(&a, 0);
        let z = Cochain { degree: 0, vector: vec![1] };
        // No degree -1 module: the generator is not a boundary.
        assert!(k.preimage_set(&z).unwrap().is_none());
    }
}
