//! Dynamic-programming kernels for zero-sum questions in `Z_n`.
//!
//! The central table records, for every count `c`, the set of residues
//! reachable as a sum of exactly `c` terms. Residue sets are `u128` masks and
//! adding `j` copies of residue `r` is a cyclic rotation by `j * r`, so each
//! residue class is folded in with its full multiplicity at once.

use serde::Serialize;

use crate::zn::{lpr, ZnSeq};
use crate::{Error, Result};

type Mask = u128;

#[inline]
fn rotate(mask: Mask, shift: usize, n: usize) -> Mask {
    if shift == 0 || mask == 0 {
        return mask;
    }
    let full = if n == 128 { Mask::MAX } else { (1 << n) - 1 };
    ((mask << shift) | (mask >> (n - shift))) & full
}

#[inline]
fn has(mask: Mask, r: usize) -> bool {
    mask >> r & 1 == 1
}

/// Fold `m` copies of residue `r` into `table` in place.
/// `table[c]` becomes the set of sums of exactly `c` chosen terms.
fn fold_residue(table: &mut [Mask], r: usize, m: usize, n: usize) {
    let cap = table.len() - 1;
    for c in (1..=cap).rev() {
        let mut acc = table[c];
        let mut shift = 0;
        for j in 1..=m.min(c) {
            shift += r;
            if shift >= n {
                shift -= n;
            }
            acc |= rotate(table[c - j], shift, n);
        }
        table[c] = acc;
    }
}

fn count_table(s: &ZnSeq, cap: usize) -> Vec<Mask> {
    let mut table = vec![0; cap + 1];
    table[0] = 1;
    for (r, m) in s.powers() {
        fold_residue(&mut table, r, m, s.modulus());
    }
    table
}

/// Incremental form of the exact-count table, used by the enumerator to
/// abandon partial multisets early.
#[derive(Clone, Debug)]
pub struct ZeroSumTracker {
    n: usize,
    table: Vec<Mask>,
}

impl ZeroSumTracker {
    /// Tracks sums of exactly `0..=cap` terms.
    pub fn new(n: usize, cap: usize) -> Self {
        let mut table = vec![0; cap + 1];
        table[0] = 1;
        ZeroSumTracker { n, table }
    }

    pub fn add(&mut self, r: usize, m: usize) {
        if m > 0 {
            fold_residue(&mut self.table, r, m, self.n);
        }
    }

    /// Is residue 0 a sum of exactly `count` terms?
    pub fn zero_at(&self, count: usize) -> bool {
        self.table.get(count).is_some_and(|&t| has(t, 0))
    }
}

/// Sums reachable by subsequences of each exact length.
#[derive(Clone, Debug)]
pub struct SumsByLength {
    n: usize,
    table: Vec<Mask>,
}

impl SumsByLength {
    pub fn new(s: &ZnSeq) -> Self {
        SumsByLength {
            n: s.modulus(),
            table: count_table(s, s.len()),
        }
    }

    pub fn max_len(&self) -> usize {
        self.table.len() - 1
    }

    pub fn contains(&self, len: usize, residue: usize) -> bool {
        residue < self.n && self.table.get(len).is_some_and(|&t| has(t, residue))
    }

    pub fn sums_at(&self, len: usize) -> Vec<usize> {
        (0..self.n).filter(|&r| self.contains(len, r)).collect()
    }
}

/// Choose a subsequence of `s` of exactly `len` terms summing to `target`,
/// or `None` if there is none. Rebuilds the table layer by layer to walk it back.
fn subsequence_with(s: &ZnSeq, len: usize, target: usize) -> Option<ZnSeq> {
    let n = s.modulus();
    let powers: Vec<(usize, usize)> = s.powers().collect();
    let mut layers = Vec::with_capacity(powers.len() + 1);
    let mut table = vec![0; len + 1];
    table[0] = 1;
    layers.push(table.clone());
    for &(r, m) in &powers {
        fold_residue(&mut table, r, m, n);
        layers.push(table.clone());
    }
    if !has(table[len], target) {
        return None;
    }
    let mut out = ZnSeq::empty(n).expect("valid modulus");
    let (mut c, mut t) = (len, target);
    for (i, &(r, m)) in powers.iter().enumerate().rev() {
        let prev = &layers[i];
        let j = (0..=m.min(c))
            .find(|&j| has(prev[c - j], (t + n - (j * r) % n) % n))
            .expect("table layers are consistent");
        if j > 0 {
            out.push(r, j);
        }
        c -= j;
        t = (t + n - (j * r) % n) % n;
    }
    debug_assert_eq!((c, t), (0, 0));
    Some(out)
}

/// A zero-sum subsequence of `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZeroSubseqWitness {
    pub subsequence: ZnSeq,
    pub len: usize,
}

/// A subsequence of exactly `t` terms with sum `0 (mod n)`, if one exists.
pub fn has_zero_sum_of_length(s: &ZnSeq, t: usize) -> Result<Option<ZeroSubseqWitness>> {
    if t > s.len() {
        return Err(Error::Precondition(format!(
            "target length {t} exceeds sequence length {}",
            s.len()
        )));
    }
    Ok(subsequence_with(s, t, 0).map(|sub| ZeroSubseqWitness {
        len: sub.len(),
        subsequence: sub,
    }))
}

/// No subsequence of length `n` sums to zero. Vacuous when `|s| < n`.
pub fn is_n_zero_free(s: &ZnSeq) -> bool {
    let n = s.modulus();
    if s.len() < n {
        return true;
    }
    let mut tracker = ZeroSumTracker::new(n, n);
    for (r, m) in s.powers() {
        tracker.add(r, m);
        if tracker.zero_at(n) {
            return false;
        }
    }
    true
}

/// A witness of length `n` when `s` is not n-zero-free.
pub fn n_zero_sum_witness(s: &ZnSeq) -> Option<ZeroSubseqWitness> {
    let n = s.modulus();
    if s.len() < n {
        return None;
    }
    has_zero_sum_of_length(s, n).expect("n <= |s|")
}

/// No nonempty subsequence sums to zero.
pub fn is_zero_free(s: &ZnSeq) -> bool {
    let n = s.modulus();
    // Any n terms in Z_n contain a nonempty zero sum.
    if s.len() >= n {
        return false;
    }
    let table = count_table(s, s.len());
    table.iter().skip(1).all(|&t| !has(t, 0))
}

/// A shortest nonempty zero-sum subsequence, if any.
pub fn shortest_zero_subsequence(s: &ZnSeq) -> Option<ZeroSubseqWitness> {
    let cap = s.len().min(s.modulus());
    let table = count_table(s, cap);
    let c = (1..=cap).find(|&c| has(table[c], 0))?;
    has_zero_sum_of_length(s, c).expect("c <= |s|")
}

/// Among zero-sum subsequences using only nonzero terms, one of maximum
/// length (possibly empty).
pub fn max_nonzero_zero_subsequence(s: &ZnSeq) -> ZeroSubseqWitness {
    let nonzero = s.restricted(|r| r != 0);
    let table = count_table(&nonzero, nonzero.len());
    let best = (0..=nonzero.len())
        .rev()
        .find(|&c| has(table[c], 0))
        .expect("the empty subsequence sums to zero");
    let sub = subsequence_with(&nonzero, best, 0).expect("length was found reachable");
    ZeroSubseqWitness {
        len: sub.len(),
        subsequence: sub,
    }
}

/// For every length `L > n`, each sum of a length-`L` subsequence is also
/// the sum of a length-`n` subsequence. Requires that 0 is a most repeated term.
pub fn gao_property_holds(s: &ZnSeq) -> Result<bool> {
    let zeros = s.mult(0);
    if let Some((r, m)) = s.powers().find(|&(_, m)| m > zeros) {
        return Err(Error::Precondition(format!(
            "residue {r} has multiplicity {m} > multiplicity {zeros} of 0 in {s}"
        )));
    }
    let n = s.modulus();
    if s.len() <= n {
        return Ok(true);
    }
    let table = count_table(s, s.len());
    let at_n = table[n];
    Ok(table[n + 1..].iter().all(|&t| t & !at_n == 0))
}

/// Maximum and minimum subsequence length for each achievable sum of a
/// sequence of positive integers.
#[derive(Debug, Clone)]
pub struct SumLenTable {
    terms: Vec<usize>,
    total: usize,
    max_len: Vec<Option<usize>>,
    min_len: Vec<Option<usize>>,
}

impl SumLenTable {
    pub fn build(terms: &[usize]) -> Result<Self> {
        if let Some(pos) = terms.iter().position(|&t| t == 0) {
            return Err(Error::Precondition(format!(
                "term {pos} is not a positive integer"
            )));
        }
        let total: usize = terms.iter().sum();
        let mut max_len = vec![None; total + 1];
        let mut min_len = vec![None; total + 1];
        max_len[0] = Some(0);
        min_len[0] = Some(0);
        let mut reach = 0;
        for &p in terms {
            reach += p;
            for t in (p..=reach).rev() {
                if let Some(l) = max_len[t - p] {
                    max_len[t] = max_len[t].max(Some(l + 1));
                }
                if let Some(l) = min_len[t - p] {
                    min_len[t] = Some(min_len[t].map_or(l + 1, |cur: usize| cur.min(l + 1)));
                }
            }
        }
        Ok(SumLenTable {
            terms: terms.to_vec(),
            total,
            max_len,
            min_len,
        })
    }

    /// Lprs of a sequence in `Z_n`, as a table over positive integers.
    pub fn from_lprs(s: &ZnSeq) -> Self {
        let n = s.modulus();
        let terms: Vec<usize> = s.terms().map(|r| lpr(r, n)).collect();
        Self::build(&terms).expect("lprs are positive")
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn ones(&self) -> usize {
        self.terms.iter().filter(|&&t| t == 1).count()
    }

    pub fn max_len(&self, x: usize) -> Option<usize> {
        self.max_len.get(x).copied().flatten()
    }

    pub fn min_len(&self, x: usize) -> Option<usize> {
        self.min_len.get(x).copied().flatten()
    }

    /// Is `x` the sum of a subsequence with at least `min_len` terms?
    pub fn query(&self, x: usize, min_len: usize) -> bool {
        self.max_len(x).is_some_and(|l| l >= min_len)
    }

    /// Integers representable as nonempty subsequence sums.
    pub fn sumset(&self) -> Vec<usize> {
        (1..=self.total).filter(|&x| self.max_len(x).is_some()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> ZnSeq {
        s.parse().unwrap()
    }

    fn check_witness(host: &ZnSeq, w: &ZeroSubseqWitness, len: usize) {
        assert_eq!(w.len, len);
        assert_eq!(w.subsequence.len(), len);
        assert_eq!(w.subsequence.sum_mod(), 0);
        assert!(w.subsequence.is_subsequence_of(host));
    }

    #[test]
    fn rotate_wraps_within_modulus() {
        assert_eq!(rotate(0b001, 1, 3), 0b010);
        assert_eq!(rotate(0b100, 1, 3), 0b001);
        assert_eq!(rotate(1, 127, 128), 1 << 127);
        assert_eq!(rotate(1 << 127, 1, 128), 1);
    }

    #[test]
    fn zero_sum_of_length_examples() {
        let s = seq("n=3: 0 1 2");
        let w = has_zero_sum_of_length(&s, 3).unwrap().unwrap();
        check_witness(&s, &w, 3);
        assert_eq!(w.subsequence, s);

        assert!(has_zero_sum_of_length(&seq("n=4: 0^3 1^3"), 4).unwrap().is_none());

        let s = seq("n=5: 0 0 1 1 1 2 4");
        let w = has_zero_sum_of_length(&s, 5).unwrap().unwrap();
        check_witness(&s, &w, 5);

        assert!(matches!(
            has_zero_sum_of_length(&seq("n=5: 1 2"), 3),
            Err(Error::Precondition(_))
        ));
        let w = has_zero_sum_of_length(&seq("n=5: 1 2"), 0).unwrap().unwrap();
        assert!(w.subsequence.is_empty());
    }

    #[test]
    fn n_zero_free_examples() {
        assert!(is_n_zero_free(&seq("n=4: 0^3 1^3")));
        assert!(is_n_zero_free(&seq("n=5: 0^2 1^4 4")));
        assert!(!is_n_zero_free(&seq("n=3: 0 1 2 1")));
        assert!(is_n_zero_free(&seq("n=7:")));
        assert!(!is_n_zero_free(&seq("n=1: 0")));
    }

    #[test]
    fn zero_free_examples() {
        assert!(is_zero_free(&seq("n=5: 4 4 3")));
        assert!(!is_zero_free(&seq("n=5: 1 4")));
        assert!(is_zero_free(&seq("n=5:")));
        assert!(!is_zero_free(&seq("n=5: 0")));
        let w = shortest_zero_subsequence(&seq("n=5: 1 4 2 2 1")).unwrap();
        assert_eq!(w.len, 2);
    }

    #[test]
    fn max_nonzero_zero_subsequence_examples() {
        assert!(max_nonzero_zero_subsequence(&seq("n=5: 0^3 3 4^2")).subsequence.is_empty());
        let s = seq("n=4: 1 1 2 3");
        let w = max_nonzero_zero_subsequence(&s);
        check_witness(&s, &w, 3);
        assert_eq!(w.subsequence, seq("n=4: 1^2 2"));
        assert_eq!(max_nonzero_zero_subsequence(&seq("n=6: 1^5")).len, 0);
    }

    #[test]
    fn sum_len_table_examples() {
        let t = SumLenTable::build(&[1, 1, 2]).unwrap();
        assert!(t.query(3, 2));
        for x in 2..=4 {
            assert!(t.query(x, 2), "x={x}");
        }
        assert_eq!(t.max_len(0), Some(0));
        assert_eq!(t.max_len(4), Some(3));
        assert_eq!(t.min_len(2), Some(1));
        assert_eq!(t.sumset(), vec![1, 2, 3, 4]);

        let t = SumLenTable::build(&[2, 2]).unwrap();
        assert!(!t.query(1, 1));
        assert!(SumLenTable::build(&[1, 0]).is_err());
    }

    #[test]
    fn gao_property_examples() {
        assert!(gao_property_holds(&seq("n=3: 0 0 1 1 2")).unwrap());
        assert!(gao_property_holds(&seq("n=4: 0 0 1 1")).unwrap());
        assert!(gao_property_holds(&seq("n=2: 0 0 1 1")).unwrap());
        assert!(matches!(
            gao_property_holds(&seq("n=3: 0 1 1")),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn sums_by_length_matches_witness_search() {
        let s = seq("n=6: 0^2 1^3 4 5");
        let table = SumsByLength::new(&s);
        for len in 0..=s.len() {
            for r in 0..6 {
                let found = subsequence_with(&s, len, r);
                assert_eq!(table.contains(len, r), found.is_some());
                if let Some(sub) = found {
                    assert_eq!(sub.sum_mod(), r);
                    assert_eq!(sub.len(), len);
                }
            }
        }
    }
}
