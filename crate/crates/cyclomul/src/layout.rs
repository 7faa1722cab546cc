//! Data movement: multidimensional arrays, out-of-place transposition,
//! and the coprime-length re-indexing that turns one long cyclic
//! convolution into a multidimensional one.
//!
//! The element type is generic so the same kernels move field residues
//! and full ring elements. Indexing is lexicographic with the last
//! axis fastest: dims `[d0, d1, ..., dk]` store entry `(i0, ..., ik)`
//! at flat position `((i0*d1 + i1)*d2 + ...) + ik`.

use crate::error::{Error, Result};
use crate::nt::{gcd, inv_mod};

/// Dense array of arbitrary rank with lexicographic layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiDimArray<T> {
    dims: Vec<usize>,
    elems: Vec<T>,
}

impl<T: Clone> MultiDimArray<T> {
    pub fn new(dims: Vec<usize>, elems: Vec<T>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::Mismatch("dimensions must be positive".into()));
        }
        let size: usize = dims.iter().product();
        if size != elems.len() {
            return Err(Error::Mismatch(format!(
                "{} elements for shape {:?}",
                elems.len(),
                dims
            )));
        }
        Ok(MultiDimArray { dims, elems })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn elems(&self) -> &[T] {
        &self.elems
    }

    pub fn elems_mut(&mut self) -> &mut [T] {
        &mut self.elems
    }

    pub fn into_elems(self) -> Vec<T> {
        self.elems
    }

    /// Same storage, new shape; the element count must match.
    pub fn reshape(self, dims: Vec<usize>) -> Result<Self> {
        MultiDimArray::new(dims, self.elems)
    }

    /// Rows of length `row_len` (the fastest axis of a 2-D view).
    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        let row_len = *self.dims.last().unwrap();
        self.elems.chunks(row_len)
    }
}

const TRANSPOSE_BASE: usize = 4;

/// Out-of-place transpose of a 2-D array, recursive halving along the
/// longer extent until the short side is at most 4, then direct copy.
pub fn transpose<T: Clone>(a: &MultiDimArray<T>) -> Result<MultiDimArray<T>> {
    if a.dims.len() != 2 {
        return Err(Error::Mismatch(format!(
            "transpose expects rank 2, got {:?}",
            a.dims
        )));
    }
    let (rows, cols) = (a.dims[0], a.dims[1]);
    let mut out = a.elems.clone(); // placeholder values, fully overwritten
    transpose_block(&a.elems, &mut out, cols, rows, 0, rows, 0, cols);
    MultiDimArray::new(vec![cols, rows], out)
}

#[allow(clippy::too_many_arguments)]
fn transpose_block<T: Clone>(
    src: &[T],
    dst: &mut [T],
    src_cols: usize,
    dst_cols: usize,
    r0: usize,
    r1: usize,
    c0: usize,
    c1: usize,
) {
    let nr = r1 - r0;
    let nc = c1 - c0;
    if nr.min(nc) <= TRANSPOSE_BASE {
        for r in r0..r1 {
            for c in c0..c1 {
                dst[c * dst_cols + r] = src[r * src_cols + c].clone();
            }
        }
        return;
    }
    if nr >= nc {
        let mid = r0 + nr / 2;
        transpose_block(src, dst, src_cols, dst_cols, r0, mid, c0, c1);
        transpose_block(src, dst, src_cols, dst_cols, mid, r1, c0, c1);
    } else {
        let mid = c0 + nc / 2;
        transpose_block(src, dst, src_cols, dst_cols, r0, r1, c0, mid);
        transpose_block(src, dst, src_cols, dst_cols, r0, r1, mid, c1);
    }
}

fn rotate_right<T: Clone>(row: &mut [T], by: usize) {
    let n = row.len();
    if n > 1 {
        row.rotate_right(by % n);
    }
}

fn rotate_left<T: Clone>(row: &mut [T], by: usize) {
    let n = row.len();
    if n > 1 {
        row.rotate_left(by % n);
    }
}

/// Splits a cyclic sequence of coprime composite length n*m into an
/// m-by-n array realizing X -> Y^c Z with c = m^{-1} mod n: view the
/// input as n rows of m, transpose, then rotate row j right by
/// j*c mod n. Afterwards entry (j, i) is the coefficient of Y^i Z^j.
pub fn agarwal_cooley_fwd<T: Clone>(f: &[T], n: usize, m: usize) -> Result<MultiDimArray<T>> {
    if n == 0 || m == 0 || f.len() != n * m {
        return Err(Error::Mismatch(format!(
            "sequence of {} for an {n}-by-{m} split",
            f.len()
        )));
    }
    if gcd(n as u64, m as u64) != 1 {
        return Err(Error::NotCoprime(format!(
            "cyclic split needs coprime lengths, got {n} and {m}"
        )));
    }
    let c = inv_mod(m as u64 % n as u64, n as u64)? as usize;
    let viewed = MultiDimArray::new(vec![n, m], f.to_vec())?;
    let mut arr = transpose(&viewed)?; // dims [m, n]
    for (j, row) in arr.elems.chunks_mut(n).enumerate() {
        rotate_right(row, j * c % n);
    }
    Ok(arr)
}

/// Inverse of `agarwal_cooley_fwd`: takes the m-by-n array back to the
/// flat cyclic sequence.
pub fn agarwal_cooley_inv<T: Clone>(a: &MultiDimArray<T>) -> Result<Vec<T>> {
    if a.dims.len() != 2 {
        return Err(Error::Mismatch(format!(
            "cyclic merge expects rank 2, got {:?}",
            a.dims
        )));
    }
    let (m, n) = (a.dims[0], a.dims[1]);
    if gcd(n as u64, m as u64) != 1 {
        return Err(Error::NotCoprime(format!(
            "cyclic merge needs coprime lengths, got {n} and {m}"
        )));
    }
    let c = inv_mod(m as u64 % n as u64, n as u64)? as usize;
    let mut arr = a.clone();
    for (j, row) in arr.elems.chunks_mut(n).enumerate() {
        rotate_left(row, j * c % n);
    }
    Ok(transpose(&arr)?.into_elems())
}

/// Iterates the coprime split across every axis: maps a cyclic
/// sequence of length prod(dims) onto an array of shape `dims`
/// (pairwise coprime), turning cyclic convolution into
/// multidimensional cyclic convolution. Rank 1 is the identity.
pub fn multidim_cyclic_map<T: Clone>(f: &[T], dims: &[usize]) -> Result<MultiDimArray<T>> {
    check_pairwise_coprime(dims)?;
    multidim_fwd_unchecked(f, dims)
}

fn multidim_fwd_unchecked<T: Clone>(f: &[T], dims: &[usize]) -> Result<MultiDimArray<T>> {
    if dims.is_empty() {
        return Err(Error::Mismatch("need at least one dimension".into()));
    }
    if dims.len() == 1 {
        return MultiDimArray::new(vec![dims[0]], f.to_vec());
    }
    let n1 = dims[0];
    let rest: usize = dims[1..].iter().product();
    let split = agarwal_cooley_fwd(f, n1, rest)?; // [rest, n1]
    let by_y = transpose(&split)?; // [n1, rest]: row i = Z-sequence at Y^i
    let mut out = Vec::with_capacity(f.len());
    for row in by_y.elems.chunks(rest) {
        let sub = multidim_fwd_unchecked(row, &dims[1..])?;
        out.extend(sub.into_elems());
    }
    MultiDimArray::new(dims.to_vec(), out)
}

/// Inverse of `multidim_cyclic_map`.
pub fn multidim_cyclic_inv<T: Clone>(a: &MultiDimArray<T>) -> Result<Vec<T>> {
    check_pairwise_coprime(&a.dims)?;
    multidim_inv_unchecked(&a.elems, &a.dims)
}

fn multidim_inv_unchecked<T: Clone>(elems: &[T], dims: &[usize]) -> Result<Vec<T>> {
    if dims.len() == 1 {
        return Ok(elems.to_vec());
    }
    let n1 = dims[0];
    let rest: usize = dims[1..].iter().product();
    let mut rows = Vec::with_capacity(elems.len());
    for row in elems.chunks(rest) {
        rows.extend(multidim_inv_unchecked(row, &dims[1..])?);
    }
    let by_y = MultiDimArray::new(vec![n1, rest], rows)?;
    let split = transpose(&by_y)?; // [rest, n1]
    agarwal_cooley_inv(&split)
}

fn check_pairwise_coprime(dims: &[usize]) -> Result<()> {
    for i in 0..dims.len() {
        for j in i + 1..dims.len() {
            if gcd(dims[i] as u64, dims[j] as u64) != 1 {
                return Err(Error::NotCoprime(format!(
                    "dimensions {} and {} share a factor",
                    dims[i], dims[j]
                )));
            }
        }
    }
    Ok(())
}
