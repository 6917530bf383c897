//! Deterministic exact linear algebra over prime fields.
//!
//! Matrices come in a dense and a sparse flavor behind one type; the
//! backend is chosen automatically above [`DENSE_LIMIT`] unless forced.
//! Elimination uses a fixed pivoting rule (lowest column, then lowest row)
//! so every reduced form, kernel basis, and solution set is byte-reproducible
//! across runs and backends.

use crate::field::PrimeField;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dimension above which `Backend::Auto` switches to the sparse representation.
pub const DENSE_LIMIT: usize = 512;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinAlgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("field mismatch: operands live over different prime fields")]
    FieldMismatch,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Backend {
    Dense,
    Sparse,
    Auto,
}

impl Backend {
    fn pick(self, rows: usize, cols: usize) -> Backend {
        match self {
            Backend::Auto => {
                if rows.max(cols) > DENSE_LIMIT {
                    Backend::Sparse
                } else {
                    Backend::Dense
                }
            }
            b => b,
        }
    }
}

/// Sorted list of `(column, nonzero value)` pairs.
type SparseRow = Vec<(u32, u64)>;

#[derive(Clone, PartialEq, Eq, Debug)]
enum Repr {
    Dense(Vec<u64>),
    Sparse(Vec<SparseRow>),
}

/// An exact matrix over F_p. Zero entries are never stored in sparse form.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    repr: Repr,
}

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize, backend: Backend) -> Self {
        let repr = match backend.pick(rows, cols) {
            Backend::Dense => Repr::Dense(vec![0; rows * cols]),
            _ => Repr::Sparse(vec![Vec::new(); rows]),
        };
        Matrix { field, rows, cols, repr }
    }

    pub fn identity(field: PrimeField, n: usize, backend: Backend) -> Self {
        let mut m = Matrix::zeros(field, n, n, backend);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(field: PrimeField, cols: usize, rows: Vec<Vec<u64>>) -> Self {
        let n = rows.len();
        let mut m = Matrix::zeros(field, n, cols, Backend::Auto);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "row length mismatch");
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, field.reduce(v));
            }
        }
        m
    }

    pub fn from_entries<I>(
        field: PrimeField,
        rows: usize,
        cols: usize,
        backend: Backend,
        entries: I,
    ) -> Self
    where
        I: IntoIterator<Item = (usize, usize, u64)>,
    {
        let mut m = Matrix::zeros(field, rows, cols, backend);
        for (r, c, v) in entries {
            let cur = m.get(r, c);
            m.set(r, c, field.add(cur, field.reduce(v)));
        }
        m
    }

    /// Build from (row, col, value) triples; duplicates are summed.
    /// The triples are sorted internally, so arbitrary generation order is fine.
    pub fn from_triples(
        field: PrimeField,
        rows: usize,
        cols: usize,
        backend: Backend,
        mut triples: Vec<(u32, u32, u64)>,
    ) -> Self {
        triples.sort_unstable_by_key(|&(r, c, _)| (r, c));
        match backend.pick(rows, cols) {
            Backend::Dense => {
                let mut d = vec![0u64; rows * cols];
                for &(r, c, v) in &triples {
                    let idx = r as usize * cols + c as usize;
                    d[idx] = field.add(d[idx], field.reduce(v));
                }
                Matrix { field, rows, cols, repr: Repr::Dense(d) }
            }
            _ => {
                let mut srows: Vec<SparseRow> = vec![Vec::new(); rows];
                let mut i = 0;
                while i < triples.len() {
                    let (r, c, _) = triples[i];
                    let mut s = 0u64;
                    while i < triples.len() && triples[i].0 == r && triples[i].1 == c {
                        s = field.add(s, field.reduce(triples[i].2));
                        i += 1;
                    }
                    if s != 0 {
                        srows[r as usize].push((c, s));
                    }
                }
                Matrix { field, rows, cols, repr: Repr::Sparse(srows) }
            }
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.repr, Repr::Sparse(_))
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        debug_assert!(r < self.rows && c < self.cols);
        match &self.repr {
            Repr::Dense(d) => d[r * self.cols + c],
            Repr::Sparse(s) => match s[r].binary_search_by_key(&(c as u32), |e| e.0) {
                Ok(i) => s[r][i].1,
                Err(_) => 0,
            },
        }
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        debug_assert!(r < self.rows && c < self.cols);
        debug_assert!(v < self.field.p());
        match &mut self.repr {
            Repr::Dense(d) => d[r * self.cols + c] = v,
            Repr::Sparse(s) => match s[r].binary_search_by_key(&(c as u32), |e| e.0) {
                Ok(i) => {
                    if v == 0 {
                        s[r].remove(i);
                    } else {
                        s[r][i].1 = v;
                    }
                }
                Err(i) => {
                    if v != 0 {
                        s[r].insert(i, (c as u32, v));
                    }
                }
            },
        }
    }

    /// Nonzero entries of one row, in column order.
    pub fn row_entries(&self, r: usize) -> Vec<(usize, u64)> {
        match &self.repr {
            Repr::Dense(d) => (0..self.cols)
                .filter_map(|c| {
                    let v = d[r * self.cols + c];
                    (v != 0).then_some((c, v))
                })
                .collect(),
            Repr::Sparse(s) => s[r].iter().map(|&(c, v)| (c as usize, v)).collect(),
        }
    }

    pub fn nnz(&self) -> usize {
        match &self.repr {
            Repr::Dense(d) => d.iter().filter(|&&v| v != 0).count(),
            Repr::Sparse(s) => s.iter().map(|r| r.len()).sum(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    pub fn with_backend(&self, backend: Backend) -> Matrix {
        let target = backend.pick(self.rows, self.cols);
        match (&self.repr, target) {
            (Repr::Dense(_), Backend::Dense) | (Repr::Sparse(_), Backend::Sparse) => self.clone(),
            _ => {
                let mut m = Matrix::zeros(self.field, self.rows, self.cols, target);
                for r in 0..self.rows {
                    for (c, v) in self.row_entries(r) {
                        m.set(r, c, v);
                    }
                }
                m
            }
        }
    }

    pub fn mul_vec(&self, x: &[u64]) -> Result<Vec<u64>, LinAlgError> {
        if x.len() != self.cols {
            return Err(LinAlgError::DimensionMismatch(format!(
                "matrix has {} columns, vector has length {}",
                self.cols,
                x.len()
            )));
        }
        let f = self.field;
        let mut out = vec![0u64; self.rows];
        match &self.repr {
            Repr::Dense(d) => {
                for r in 0..self.rows {
                    let mut acc = 0u64;
                    for c in 0..self.cols {
                        let v = d[r * self.cols + c];
                        if v != 0 && x[c] != 0 {
                            acc = f.add(acc, f.mul(v, x[c]));
                        }
                    }
                    out[r] = acc;
                }
            }
            Repr::Sparse(s) => {
                for r in 0..self.rows {
                    let mut acc = 0u64;
                    for &(c, v) in &s[r] {
                        if x[c as usize] != 0 {
                            acc = f.add(acc, f.mul(v, x[c as usize]));
                        }
                    }
                    out[r] = acc;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_mat(&self, other: &Matrix) -> Result<Matrix, LinAlgError> {
        if self.field != other.field {
            return Err(LinAlgError::FieldMismatch);
        }
        if self.cols != other.rows {
            return Err(LinAlgError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let backend = if self.is_sparse() || other.is_sparse() {
            Backend::Sparse
        } else {
            Backend::Auto
        };
        let mut out = Matrix::zeros(f, self.rows, other.cols, backend);
        for r in 0..self.rows {
            let mut acc: Vec<(usize, u64)> = Vec::new();
            for (k, v) in self.row_entries(r) {
                for (c, w) in other.row_entries(k) {
                    acc.push((c, f.mul(v, w)));
                }
            }
            acc.sort_by_key(|e| e.0);
            let mut i = 0;
            while i < acc.len() {
                let c = acc[i].0;
                let mut s = 0u64;
                while i < acc.len() && acc[i].0 == c {
                    s = f.add(s, acc[i].1);
                    i += 1;
                }
                if s != 0 {
                    out.set(r, c, s);
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let backend = if self.is_sparse() { Backend::Sparse } else { Backend::Dense };
        let mut out = Matrix::zeros(self.field, self.cols, self.rows, backend);
        for r in 0..self.rows {
            for (c, v) in self.row_entries(r) {
                out.set(c, r, v);
            }
        }
        out
    }

    /// Stack matrices on top of each other. All must share column count and field.
    pub fn vstack(parts: &[&Matrix]) -> Result<Matrix, LinAlgError> {
        assert!(!parts.is_empty());
        let field = parts[0].field;
        let cols = parts[0].cols;
        let mut rows = 0;
        for p in parts {
            if p.field != field {
                return Err(LinAlgError::FieldMismatch);
            }
            if p.cols != cols {
                return Err(LinAlgError::DimensionMismatch(
                    "vstack requires equal column counts".into(),
                ));
            }
            rows += p.rows;
        }
        let sparse = parts.iter().any(|p| p.is_sparse());
        let backend = if sparse { Backend::Sparse } else { Backend::Auto };
        let mut out = Matrix::zeros(field, rows, cols, backend);
        let mut off = 0;
        for p in parts {
            for r in 0..p.rows {
                for (c, v) in p.row_entries(r) {
                    out.set(off + r, c, v);
                }
            }
            off += p.rows;
        }
        Ok(out)
    }

    /// Deterministic byte encoding, independent of the backend. Used for
    /// content hashing in certificates.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.field.p()).to_le_bytes());
        out.extend_from_slice(&(self.rows as u64).to_le_bytes());
        out.extend_from_slice(&(self.cols as u64).to_le_bytes());
        for r in 0..self.rows {
            for (c, v) in self.row_entries(r) {
                out.extend_from_slice(&(r as u64).to_le_bytes());
                out.extend_from_slice(&(c as u64).to_le_bytes());
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }
}

/// Result of row reduction: the unique RREF, its rank, and the pivot columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: Matrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

/// Which elimination order to use. Both yield the same (unique) RREF; having
/// two genuinely different operation orders gives an internal cross-check.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Elimination {
    /// Sweep columns left to right, taking the lowest available row as pivot.
    ColumnSweep,
    /// Feed rows in order into a growing set of reduced pivot rows.
    RowInsertion,
}

// Internal working form for elimination: one sparse row per matrix row.
// Sparse rows are cheap for the complexes that show up here, and using one
// working form for both backends keeps the pivot rule identical.
struct Work {
    field: PrimeField,
    rows: Vec<SparseRow>,
}

impl Work {
    fn from_matrix(m: &Matrix) -> Work {
        let rows = (0..m.rows())
            .map(|r| {
                m.row_entries(r)
                    .into_iter()
                    .map(|(c, v)| (c as u32, v))
                    .collect()
            })
            .collect();
        Work { field: m.field, rows }
    }

    fn scale(&mut self, i: usize, factor: u64) {
        if factor == 1 {
            return;
        }
        let f = self.field;
        for e in &mut self.rows[i] {
            e.1 = f.mul(e.1, factor);
        }
    }

    /// rows[dst] += factor * rows[src]
    fn axpy(&mut self, dst: usize, src: usize, factor: u64) {
        if factor == 0 {
            return;
        }
        let f = self.field;
        let src_row = std::mem::take(&mut self.rows[src]);
        let dst_row = std::mem::take(&mut self.rows[dst]);
        let mut out = SparseRow::with_capacity(dst_row.len() + src_row.len());
        let (mut i, mut j) = (0usize, 0usize);
        while i < dst_row.len() || j < src_row.len() {
            if j >= src_row.len() || (i < dst_row.len() && dst_row[i].0 < src_row[j].0) {
                out.push(dst_row[i]);
                i += 1;
            } else if i >= dst_row.len() || src_row[j].0 < dst_row[i].0 {
                let v = f.mul(src_row[j].1, factor);
                if v != 0 {
                    out.push((src_row[j].0, v));
                }
                j += 1;
            } else {
                let v = f.add(dst_row[i].1, f.mul(src_row[j].1, factor));
                if v != 0 {
                    out.push((dst_row[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
        self.rows[src] = src_row;
        self.rows[dst] = out;
    }

    fn entry(&self, i: usize, c: usize) -> u64 {
        match self.rows[i].binary_search_by_key(&(c as u32), |e| e.0) {
            Ok(k) => self.rows[i][k].1,
            Err(_) => 0,
        }
    }

    fn leading(&self, i: usize) -> Option<(usize, u64)> {
        self.rows[i].first().map(|&(c, v)| (c as usize, v))
    }
}

/// Row-reduce `m` to its unique reduced row echelon form.
pub fn rref(m: &Matrix, order: Elimination) -> Rref {
    let mut w = Work::from_matrix(m);
    let f = m.field();
    let nrows = m.rows();
    let mut pivots: Vec<usize> = Vec::new();

    match order {
        Elimination::ColumnSweep => {
            let mut next = 0usize;
            for c in 0..m.cols() {
                let Some(pr) = (next..nrows).find(|&i| w.entry(i, c) != 0) else {
                    continue;
                };
                w.rows.swap(next, pr);
                let inv = f.inv(w.entry(next, c));
                w.scale(next, inv);
                for i in 0..nrows {
                    if i != next {
                        let v = w.entry(i, c);
                        if v != 0 {
                            w.axpy(i, next, f.neg(v));
                        }
                    }
                }
                pivots.push(c);
                next += 1;
                if next == nrows {
                    break;
                }
            }
        }
        Elimination::RowInsertion => {
            // `done` counts fully reduced pivot rows kept at the top,
            // ordered by insertion; sorted by pivot column at the end.
            let mut done = 0usize;
            for i in 0..nrows {
                w.rows.swap(done, i);
                // Reduce the incoming row against all pivot rows.
                for k in 0..done {
                    let (pc, _) = w.leading(k).expect("pivot rows are nonzero");
                    let v = w.entry(done, pc);
                    if v != 0 {
                        w.axpy(done, k, f.neg(v));
                    }
                }
                if let Some((pc, lead)) = w.leading(done) {
                    w.scale(done, f.inv(lead));
                    for k in 0..done {
                        let v = w.entry(k, pc);
                        if v != 0 {
                            w.axpy(k, done, f.neg(v));
                        }
                    }
                    done += 1;
                }
            }
            w.rows[..done].sort_by_key(|r| r.first().map(|e| e.0).unwrap_or(u32::MAX));
            pivots = (0..done)
                .map(|i| w.leading(i).expect("pivot rows are nonzero").0)
                .collect();
        }
    }

    let rank = pivots.len();
    let backend = if m.is_sparse() { Backend::Sparse } else { Backend::Dense };
    let mut out = Matrix::zeros(m.field(), nrows, m.cols(), backend);
    for (i, row) in w.rows.iter().enumerate() {
        for &(c, v) in row {
            out.set(i, c as usize, v);
        }
    }
    Rref { matrix: out, rank, pivots }
}

/// Rank and reduced form with the default elimination order.
pub fn rref_rank(m: &Matrix) -> Rref {
    rref(m, Elimination::ColumnSweep)
}

/// The set of solutions of a linear system, as particular point plus kernel.
///
/// The particular vector has zeros in all free coordinates, and the kernel
/// basis is the standard one indexed by free columns, so equal systems give
/// byte-equal solution sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineSolutionSet {
    pub field: PrimeField,
    pub ambient: usize,
    pub particular: Vec<u64>,
    pub kernel_basis: Vec<Vec<u64>>,
}

impl AffineSolutionSet {
    /// Dimension of the solution set.
    pub fn dim(&self) -> usize {
        self.kernel_basis.len()
    }

    /// Number of points, if it fits in u64 within `limit`.
    pub fn count_within(&self, limit: u64) -> Option<u64> {
        let mut n: u64 = 1;
        for _ in 0..self.kernel_basis.len() {
            n = n.checked_mul(self.field.p())?;
            if n > limit {
                return None;
            }
        }
        Some(n)
    }

    /// Enumerate every member, in lexicographic order of kernel coefficients.
    /// Returns `None` when the set has more than `limit` points.
    pub fn enumerate(&self, limit: u64) -> Option<Vec<Vec<u64>>> {
        self.count_within(limit)?;
        let f = self.field;
        let k = self.kernel_basis.len();
        let mut coeffs = vec![0u64; k];
        let mut out = Vec::new();
        loop {
            let mut v = self.particular.clone();
            for (i, &c) in coeffs.iter().enumerate() {
                if c != 0 {
                    for (x, &b) in v.iter_mut().zip(self.kernel_basis[i].iter()) {
                        *x = f.add(*x, f.mul(c, b));
                    }
                }
            }
            out.push(v);
            // next coefficient tuple
            let mut i = k;
            loop {
                if i == 0 {
                    return Some(out);
                }
                i -= 1;
                coeffs[i] += 1;
                if coeffs[i] < f.p() {
                    break;
                }
                coeffs[i] = 0;
            }
        }
    }

    /// Canonical form: kernel basis in RREF, particular vector reduced to
    /// have zeros at all kernel pivot columns. Two descriptions of the same
    /// affine set canonicalize to byte-equal values.
    pub fn canonical(&self) -> AffineSolutionSet {
        let f = self.field;
        if self.kernel_basis.is_empty() {
            return self.clone();
        }
        let kmat = Matrix::from_rows(f, self.ambient, self.kernel_basis.clone());
        let red = rref_rank(&kmat);
        let mut basis = Vec::with_capacity(red.rank);
        for i in 0..red.rank {
            let mut v = vec![0u64; self.ambient];
            for (c, val) in red.matrix.row_entries(i) {
                v[c] = val;
            }
            basis.push(v);
        }
        let mut part = self.particular.clone();
        for (i, &pc) in red.pivots.iter().enumerate() {
            let c = part[pc];
            if c != 0 {
                let neg = f.neg(c);
                for (x, &b) in part.iter_mut().zip(basis[i].iter()) {
                    *x = f.add(*x, f.mul(neg, b));
                }
            }
        }
        AffineSolutionSet {
            field: f,
            ambient: self.ambient,
            particular: part,
            kernel_basis: basis,
        }
    }

    /// Membership test (canonicalizes the kernel internally).
    pub fn contains(&self, v: &[u64]) -> bool {
        if v.len() != self.ambient {
            return false;
        }
        let f = self.field;
        let canon = self.canonical();
        let mut diff: Vec<u64> = v
            .iter()
            .zip(canon.particular.iter())
            .map(|(&a, &b)| f.sub(a, b))
            .collect();
        for b in &canon.kernel_basis {
            let pc = b.iter().position(|&x| x != 0).expect("canonical basis rows are nonzero");
            let c = diff[pc];
            if c != 0 {
                let neg = f.neg(c);
                for (x, &bv) in diff.iter_mut().zip(b.iter()) {
                    *x = f.add(*x, f.mul(neg, bv));
                }
            }
        }
        diff.iter().all(|&x| x == 0)
    }
}

/// Solve `a x = b`. `Ok(None)` means the system has no solution.
pub fn solve_affine(a: &Matrix, b: &[u64]) -> Result<Option<AffineSolutionSet>, LinAlgError> {
    if b.len() != a.rows() {
        return Err(LinAlgError::DimensionMismatch(format!(
            "matrix has {} rows, right-hand side has length {}",
            a.rows(),
            b.len()
        )));
    }
    solve_with(a, b, Elimination::ColumnSweep)
}

/// Same as [`solve_affine`] with an explicit elimination order.
pub fn solve_with(
    a: &Matrix,
    b: &[u64],
    order: Elimination,
) -> Result<Option<AffineSolutionSet>, LinAlgError> {
    if b.len() != a.rows() {
        return Err(LinAlgError::DimensionMismatch(format!(
            "matrix has {} rows, right-hand side has length {}",
            a.rows(),
            b.len()
        )));
    }
    let f = a.field();
    let cols = a.cols();
    // Augmented matrix [a | b].
    let backend = if a.is_sparse() { Backend::Sparse } else { Backend::Dense };
    let mut aug = Matrix::zeros(f, a.rows(), cols + 1, backend);
    for r in 0..a.rows() {
        for (c, v) in a.row_entries(r) {
            aug.set(r, c, v);
        }
        if b[r] != 0 {
            aug.set(r, cols, b[r]);
        }
    }
    let red = rref(&aug, order);
    if red.pivots.last() == Some(&cols) {
        return Ok(None);
    }
    let mut particular = vec![0u64; cols];
    for (i, &pc) in red.pivots.iter().enumerate() {
        particular[pc] = red.matrix.get(i, cols);
    }
    let pivot_set: Vec<bool> = {
        let mut s = vec![false; cols];
        for &pc in &red.pivots {
            s[pc] = true;
        }
        s
    };
    let mut kernel_basis = Vec::new();
    for free in 0..cols {
        if pivot_set[free] {
            continue;
        }
        let mut v = vec![0u64; cols];
        v[free] = 1;
        for (i, &pc) in red.pivots.iter().enumerate() {
            let e = red.matrix.get(i, free);
            if e != 0 {
                v[pc] = f.neg(e);
            }
        }
        kernel_basis.push(v);
    }
    Ok(Some(AffineSolutionSet {
        field: f,
        ambient: cols,
        particular,
        kernel_basis,
    }))
}

/// Basis of the kernel of `a`, as an [`AffineSolutionSet`] through the origin.
pub fn kernel(a: &Matrix) -> AffineSolutionSet {
    solve_affine(a, &vec![0u64; a.rows()])
        .expect("dimensions match by construction")
        .expect("homogeneous systems are solvable")
}

/// Restrict an affine solution set to the kernel of `b`.
///
/// Returns `Ok(None)` (empty) when no member of `s` is killed by `b`.
pub fn intersect_affine_with_kernel(
    s: &AffineSolutionSet,
    b: &Matrix,
) -> Result<Option<AffineSolutionSet>, LinAlgError> {
    if b.cols() != s.ambient {
        return Err(LinAlgError::DimensionMismatch(format!(
            "constraint matrix has {} columns, ambient dimension is {}",
            b.cols(),
            s.ambient
        )));
    }
    let f = s.field;
    let bp = b.mul_vec(&s.particular)?;
    if s.kernel_basis.is_empty() {
        return Ok(if bp.iter().all(|&x| x == 0) {
            Some(s.clone())
        } else {
            None
        });
    }
    // Columns of bk are b applied to each kernel basis vector.
    let k = s.kernel_basis.len();
    let mut bk = Matrix::zeros(f, b.rows(), k, Backend::Auto);
    for (j, kv) in s.kernel_basis.iter().enumerate() {
        let col = b.mul_vec(kv)?;
        for (i, &v) in col.iter().enumerate() {
            if v != 0 {
                bk.set(i, j, v);
            }
        }
    }
    let rhs: Vec<u64> = bp.iter().map(|&x| f.neg(x)).collect();
    let Some(beta) = solve_affine(&bk, &rhs)? else {
        return Ok(None);
    };
    // Map the coefficient solution set back into the ambient space.
    let expand = |coeffs: &[u64]| -> Vec<u64> {
        let mut v = vec![0u64; s.ambient];
        for (i, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                for (x, &bv) in v.iter_mut().zip(s.kernel_basis[i].iter()) {
                    *x = f.add(*x, f.mul(c, bv));
                }
            }
        }
        v
    };
    let mut particular = s.particular.clone();
    for (x, &d) in particular.iter_mut().zip(expand(&beta.particular).iter()) {
        *x = f.add(*x, d);
    }
    let kernel_basis: Vec<Vec<u64>> = beta.kernel_basis.iter().map(|w| expand(w)).collect();
    Ok(Some(
        AffineSolutionSet {
            field: f,
            ambient: s.ambient,
            particular,
            kernel_basis,
        }
        .canonical(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn rank_duplicate_rows_f2() {
        let m = Matrix::from_rows(f(2), 2, vec![vec![1, 1], vec![1, 1]]);
        assert_eq!(rref_rank(&m).rank, 1);
    }

    #[test]
    fn rank_identity_f3() {
        let m = Matrix::identity(f(3), 4, Backend::Dense);
        let r = rref_rank(&m);
        assert_eq!(r.rank, 4);
        assert_eq!(r.pivots, vec![0, 1, 2, 3]);
    }

    #[test]
    fn rank_zero_matrix() {
        let m = Matrix::zeros(f(2), 3, 5, Backend::Dense);
        assert_eq!(rref_rank(&m).rank, 0);
    }

    #[test]
    fn solve_one_equation_f2() {
        // x + y = 1 over F_2
        let a = Matrix::from_rows(f(2), 2, vec![vec![1, 1]]);
        let s = solve_affine(&a, &[1]).unwrap().unwrap();
        assert_eq!(s.particular, vec![1, 0]);
        assert_eq!(s.kernel_basis, vec![vec![1, 1]]);
    }

    #[test]
    fn solve_identity_case() {
        let a = Matrix::identity(f(5), 3, Backend::Dense);
        let b = vec![2, 0, 4];
        let s = solve_affine(&a, &b).unwrap().unwrap();
        assert_eq!(s.particular, b);
        assert!(s.kernel_basis.is_empty());
    }

    #[test]
    fn solve_inconsistent() {
        let a = Matrix::from_rows(f(2), 1, vec![vec![0], vec![1]]);
        assert!(solve_affine(&a, &[1, 0]).unwrap().is_none());
    }

    #[test]
    fn solve_dimension_mismatch() {
        let a = Matrix::identity(f(2), 2, Backend::Dense);
        assert!(matches!(
            solve_affine(&a, &[1]),
            Err(LinAlgError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn intersect_whole_space_with_zero_map() {
        let s = kernel(&Matrix::zeros(f(2), 1, 3, Backend::Dense));
        assert_eq!(s.dim(), 3);
        let b = Matrix::zeros(f(2), 2, 3, Backend::Dense);
        let t = intersect_affine_with_kernel(&s, &b).unwrap().unwrap();
        assert_eq!(t.dim(), 3);
    }

    #[test]
    fn intersect_two_candidate_check() {
        // s = {(1,0) + t(1,1)} over F_2, b = [[1,0]] -> only (0,1) survives.
        let s = AffineSolutionSet {
            field: f(2),
            ambient: 2,
            particular: vec![1, 0],
            kernel_basis: vec![vec![1, 1]],
        };
        let b = Matrix::from_rows(f(2), 2, vec![vec![1, 0]]);
        let t = intersect_affine_with_kernel(&s, &b).unwrap().unwrap();
        assert_eq!(t.dim(), 0);
        assert_eq!(t.particular, vec![0, 1]);
    }

    #[test]
    fn intersect_empty_result() {
        let s = AffineSolutionSet {
            field: f(2),
            ambient: 2,
            particular: vec![1, 0],
            kernel_basis: vec![],
        };
        let b = Matrix::from_rows(f(2), 2, vec![vec![1, 0]]);
        assert!(intersect_affine_with_kernel(&s, &b).unwrap().is_none());
    }

    #[test]
    fn both_orders_agree_on_rref() {
        let m = Matrix::from_rows(
            f(5),
            4,
            vec![vec![0, 2, 1, 3], vec![4, 0, 0, 1], vec![4, 2, 1, 4], vec![3, 3, 3, 3]],
        );
        let a = rref(&m, Elimination::ColumnSweep);
        let b = rref(&m, Elimination::RowInsertion);
        assert_eq!(a.rank, b.rank);
        assert_eq!(a.pivots, b.pivots);
        assert_eq!(a.matrix, b.matrix);
    }

    #[test]
    fn enumerate_matches_solve() {
        // Over F_3: one equation x + 2y = 1 in 3 unknowns -> 9 solutions.
        let a = Matrix::from_rows(f(3), 3, vec![vec![1, 2, 0]]);
        let s = solve_affine(&a, &[1]).unwrap().unwrap();
        let all = s.enumerate(1 << 16).unwrap();
        assert_eq!(all.len(), 9);
        for v in &all {
            assert_eq!(a.mul_vec(v).unwrap(), vec![1]);
        }
    }

    #[test]
    fn canonical_form_is_stable() {
        let s = AffineSolutionSet {
            field: f(2),
            ambient: 3,
            particular: vec![1, 0, 0],
            kernel_basis: vec![vec![1, 1, 0], vec![0, 1, 1]],
        };
        // Same coset of the same plane, presented differently.
        let t = AffineSolutionSet {
            field: f(2),
            ambient: 3,
            particular: vec![0, 1, 0],
            kernel_basis: vec![vec![0, 1, 1], vec![1, 0, 1]],
        };
        // Same affine set, different presentations.
        assert_eq!(s.canonical(), t.canonical());
        assert!(s.contains(&[0, 0, 1]));
        assert!(!s.contains(&[0, 0, 0]));
    }

    #[test]
    fn sparse_dense_round_trip() {
        let m = Matrix::from_rows(f(7), 3, vec![vec![1, 0, 6], vec![0, 0, 2]]);
        let s = m.with_backend(Backend::Sparse);
        assert!(s.is_sparse());
        assert_eq!(s.with_backend(Backend::Dense), m);
        assert_eq!(s.canonical_bytes(), m.canonical_bytes());
    }
}
