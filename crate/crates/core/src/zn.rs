//! Residues, sequences and affine maps in `Z_n`.
//!
//! A sequence is stored as its multiplicity vector: order of terms never
//! matters for any question asked here, and every kernel downstream works
//! residue class by residue class.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Largest modulus accepted. Residue sets are packed into `u128` masks.
pub const MAX_MODULUS: usize = 128;

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// All `a` in `[1, n-1]` coprime to `n`, ascending. `units(1) == [1]`.
pub fn units(n: usize) -> Vec<usize> {
    if n <= 1 {
        return vec![1];
    }
    (1..n).filter(|&a| gcd(a, n) == 1).collect()
}

/// Euler's totient, with `phi(1) = 1`.
pub fn phi(n: usize) -> usize {
    units(n).len()
}

/// Least positive representative: the integer in `[1, n]` congruent to `x`.
pub fn lpr(x: usize, n: usize) -> usize {
    debug_assert!(x < n);
    if x == 0 {
        n
    } else {
        x
    }
}

/// Reduce any integer into `[0, n)`.
pub fn reduce(x: i64, n: usize) -> usize {
    x.rem_euclid(n as i64) as usize
}

fn check_modulus(n: usize) -> Result<()> {
    if n == 0 || n > MAX_MODULUS {
        Err(Error::ModulusOutOfRange(n))
    } else {
        Ok(())
    }
}

fn inverse_mod(a: usize, n: usize) -> Option<usize> {
    if n == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i64, n as i64);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| reduce(old_s, n))
}

/// A finite multiset of residues modulo `n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ZnSeq {
    modulus: usize,
    mult: Vec<usize>,
    len: usize,
}

impl ZnSeq {
    /// The empty sequence in `Z_n`.
    pub fn empty(n: usize) -> Result<Self> {
        check_modulus(n)?;
        Ok(ZnSeq {
            modulus: n,
            mult: vec![0; n],
            len: 0,
        })
    }

    pub fn from_mults(n: usize, mult: Vec<usize>) -> Result<Self> {
        check_modulus(n)?;
        if mult.len() != n {
            return Err(Error::Precondition(format!(
                "multiplicity vector has {} entries, expected {n}",
                mult.len()
            )));
        }
        let len = mult.iter().sum();
        Ok(ZnSeq {
            modulus: n,
            mult,
            len,
        })
    }

    /// Build from arbitrary integers, each reduced modulo `n`.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = i64>,
    {
        let mut seq = Self::empty(n)?;
        for t in terms {
            seq.push(reduce(t, n), 1);
        }
        Ok(seq)
    }

    /// Build from `(value, multiplicity)` pairs; values are reduced modulo `n`.
    pub fn from_powers(n: usize, powers: &[(i64, usize)]) -> Result<Self> {
        let mut seq = Self::empty(n)?;
        for &(v, m) in powers {
            seq.push(reduce(v, n), m);
        }
        Ok(seq)
    }

    /// Append `count` copies of residue `r` (which must lie in `[0, n)`).
    pub fn push(&mut self, r: usize, count: usize) {
        assert!(r < self.modulus, "residue {r} out of range for n={}", self.modulus);
        self.mult[r] += count;
        self.len += count;
    }

    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn mult(&self, r: usize) -> usize {
        self.mult[r]
    }

    pub fn mults(&self) -> &[usize] {
        &self.mult
    }

    /// Residues present, ascending, paired with their multiplicities.
    pub fn powers(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.mult
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(r, &m)| (r, m))
    }

    /// All terms with repetition, ascending.
    pub fn terms(&self) -> impl Iterator<Item = usize> + '_ {
        self.powers()
            .flat_map(|(r, m)| std::iter::repeat(r).take(m))
    }

    pub fn distinct_count(&self) -> usize {
        self.mult.iter().filter(|&&m| m > 0).count()
    }

    pub fn contains(&self, r: usize) -> bool {
        self.mult[r] > 0
    }

    pub fn max_mult(&self) -> usize {
        self.mult.iter().copied().max().unwrap_or(0)
    }

    /// Sum of the terms as an element of `Z_n`.
    pub fn sum_mod(&self) -> usize {
        let n = self.modulus;
        self.powers().fold(0, |acc, (r, m)| (acc + r * (m % n)) % n)
    }

    /// `L(s)`: the sum of the least positive representatives of the terms.
    pub fn lpr_sum(&self) -> usize {
        self.powers().map(|(r, m)| lpr(r, self.modulus) * m).sum()
    }

    /// The sequence `1 - s`, term by term.
    pub fn one_minus(&self) -> ZnSeq {
        let n = self.modulus;
        let mut out = vec![0; n];
        for (r, m) in self.powers() {
            out[(n + 1 - r) % n] += m;
        }
        ZnSeq {
            modulus: n,
            mult: out,
            len: self.len,
        }
    }

    /// Multiply every term by `c` (not necessarily a unit).
    pub fn scaled(&self, c: usize) -> ZnSeq {
        let n = self.modulus;
        let mut out = vec![0; n];
        for (r, m) in self.powers() {
            out[(r * c) % n] += m;
        }
        ZnSeq {
            modulus: n,
            mult: out,
            len: self.len,
        }
    }

    pub fn apply_affine(&self, map: &AffineMap) -> Result<ZnSeq> {
        self.same_modulus(map.modulus())?;
        let n = self.modulus;
        let mut out = vec![0; n];
        for (r, m) in self.powers() {
            out[map.apply(r)] += m;
        }
        Ok(ZnSeq {
            modulus: n,
            mult: out,
            len: self.len,
        })
    }

    pub fn union(&self, other: &ZnSeq) -> Result<ZnSeq> {
        self.same_modulus(other.modulus)?;
        let mult = self.mult.iter().zip(&other.mult).map(|(a, b)| a + b).collect();
        Ok(ZnSeq {
            modulus: self.modulus,
            mult,
            len: self.len + other.len,
        })
    }

    /// Termwise containment: every residue occurs in `self` at most as often as in `host`.
    pub fn is_subsequence_of(&self, host: &ZnSeq) -> bool {
        self.modulus == host.modulus && self.mult.iter().zip(&host.mult).all(|(a, b)| a <= b)
    }

    /// Remove the terms of `part` from `self`.
    pub fn without(&self, part: &ZnSeq) -> Result<ZnSeq> {
        self.same_modulus(part.modulus)?;
        if !part.is_subsequence_of(self) {
            return Err(Error::Precondition(format!("{part} is not a subsequence of {self}")));
        }
        let mult = self.mult.iter().zip(&part.mult).map(|(a, b)| a - b).collect();
        Ok(ZnSeq {
            modulus: self.modulus,
            mult,
            len: self.len - part.len,
        })
    }

    /// Restriction to the given residues (all other multiplicities zeroed).
    pub fn restricted<F: Fn(usize) -> bool>(&self, keep: F) -> ZnSeq {
        let mult: Vec<usize> = self
            .mult
            .iter()
            .enumerate()
            .map(|(r, &m)| if keep(r) { m } else { 0 })
            .collect();
        let len = mult.iter().sum();
        ZnSeq {
            modulus: self.modulus,
            mult,
            len,
        }
    }

    /// Compare multiplicity vectors lexicographically, `mult[0]` first.
    pub fn cmp_vector(&self, other: &ZnSeq) -> Ordering {
        self.mult.cmp(&other.mult)
    }

    fn same_modulus(&self, other: usize) -> Result<()> {
        if self.modulus == other {
            Ok(())
        } else {
            Err(Error::ModulusMismatch {
                left: self.modulus,
                right: other,
            })
        }
    }

    /// Orbit representative under all affine maps: the image whose
    /// multiplicity vector is lexicographically greatest, with the first
    /// map (ascending `a`, then `b`) that produces it.
    pub fn canonical_similitude(&self) -> (ZnSeq, AffineMap) {
        let n = self.modulus;
        let top = self.max_mult();
        let mut best: Option<(ZnSeq, AffineMap)> = None;
        for a in units(n) {
            // Only maps sending a most-repeated residue to 0 can win.
            for r in (0..n).filter(|&r| self.mult[r] == top) {
                let b = reduce(-((a * r) as i64), n);
                let map = AffineMap { a, b, n };
                let image = self.apply_affine(&map).expect("same modulus");
                let better = match &best {
                    None => true,
                    Some((cur, cur_map)) => match image.cmp_vector(cur) {
                        Ordering::Greater => true,
                        Ordering::Equal => (map.a, map.b) < (cur_map.a, cur_map.b),
                        Ordering::Less => false,
                    },
                };
                if better {
                    best = Some((image, map));
                }
            }
        }
        best.expect("at least one unit exists")
    }

    /// Orbit representative under multiplication by units only.
    pub fn canonical_equivalence(&self) -> (ZnSeq, AffineMap) {
        let n = self.modulus;
        let mut best: Option<(ZnSeq, AffineMap)> = None;
        for a in units(n) {
            let image = self.scaled(a);
            if best.as_ref().is_none_or(|(cur, _)| image.cmp_vector(cur) == Ordering::Greater) {
                best = Some((image, AffineMap { a, b: 0, n }));
            }
        }
        best.expect("at least one unit exists")
    }

    pub fn is_similar_to(&self, other: &ZnSeq) -> bool {
        self.modulus == other.modulus
            && self.len == other.len
            && self.canonical_similitude().0 == other.canonical_similitude().0
    }

    pub fn is_canonical(&self) -> bool {
        is_canonical_vector(&self.mult, &units(self.modulus))
    }
}

/// Whether `mult` is the lexicographically greatest vector in its affine
/// orbit. `units` must be `units(mult.len())`.
pub fn is_canonical_vector(mult: &[usize], units: &[usize]) -> bool {
    let n = mult.len();
    let top = mult[0];
    if mult.iter().any(|&m| m > top) {
        return false;
    }
    // Image under x -> a x - a r is y -> mult[(a^-1 y + r) mod n].
    for r in (0..n).filter(|&r| mult[r] == top) {
        for &ai in units {
            let mut idx = r;
            for &m in mult {
                let im = mult[idx];
                match im.cmp(&m) {
                    Ordering::Greater => return false,
                    Ordering::Less => break,
                    Ordering::Equal => {}
                }
                idx += ai;
                if idx >= n {
                    idx -= n;
                }
            }
        }
    }
    true
}

/// Number of affine maps fixing `mult`. The orbit size is `n * phi(n)` divided by this.
pub fn stabilizer_order(mult: &[usize], units: &[usize]) -> usize {
    let n = mult.len();
    // A fixing map must send some residue of multiplicity mult[0] to 0.
    (0..n)
        .filter(|&r| mult[r] == mult[0])
        .map(|r| {
            units
                .iter()
                .filter(|&&ai| (0..n).all(|y| mult[(ai * y + r) % n] == mult[y]))
                .count()
        })
        .sum()
}

impl PartialOrd for ZnSeq {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by modulus, then length, then multiplicity vector.
impl Ord for ZnSeq {
    fn cmp(&self, other: &Self) -> Ordering {
        self.modulus
            .cmp(&other.modulus)
            .then(self.len.cmp(&other.len))
            .then_with(|| self.mult.cmp(&other.mult))
    }
}

impl fmt::Display for ZnSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}:", self.modulus)?;
        for (r, m) in self.powers() {
            if m == 1 {
                write!(f, " {r}")?;
            } else {
                write!(f, " {r}^{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ZnSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ZnSeq({self})")
    }
}

fn parse_err(token: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        token: token.to_string(),
        reason: reason.into(),
    }
}

/// Parses `n=<modulus>: v1^m1 v2^m2 ...`. Negative values are reduced
/// modulo `n`; values `>= n` and zero exponents are rejected.
impl FromStr for ZnSeq {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, body) = s
            .split_once(':')
            .ok_or_else(|| parse_err(s, "expected `n=<modulus>:` header"))?;
        let head = head.trim();
        let n_str = head
            .strip_prefix("n=")
            .or_else(|| head.strip_prefix("n ="))
            .ok_or_else(|| parse_err(head, "expected `n=<modulus>`"))?;
        let n: usize = n_str
            .trim()
            .parse()
            .map_err(|_| parse_err(head, "modulus is not a positive integer"))?;
        let mut seq = ZnSeq::empty(n).map_err(|e| parse_err(head, e.to_string()))?;
        for token in body.split_whitespace() {
            let (value, exp) = match token.split_once('^') {
                Some((v, e)) => (v, Some(e)),
                None => (token, None),
            };
            let value: i64 = value
                .parse()
                .map_err(|_| parse_err(token, "value is not an integer"))?;
            if value >= n as i64 {
                return Err(parse_err(token, format!("value must be < n = {n}")));
            }
            let count = match exp {
                None => 1,
                Some(e) => e
                    .parse::<usize>()
                    .map_err(|_| parse_err(token, "exponent is not a nonnegative integer"))?,
            };
            if count == 0 {
                return Err(parse_err(token, "zero exponent"));
            }
            seq.push(reduce(value, n), count);
        }
        Ok(seq)
    }
}

impl Serialize for ZnSeq {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ZnSeq {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `x -> a x + b` on `Z_n` with `gcd(a, n) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineMap {
    a: usize,
    b: usize,
    n: usize,
}

impl AffineMap {
    pub fn new(a: i64, b: i64, n: usize) -> Result<Self> {
        check_modulus(n)?;
        let ar = reduce(a, n);
        let ar = if n == 1 { 1 } else { ar };
        if gcd(ar, n) != 1 {
            return Err(Error::NotAUnit { a, n });
        }
        Ok(AffineMap {
            a: ar,
            b: reduce(b, n),
            n,
        })
    }

    pub fn identity(n: usize) -> Self {
        AffineMap { a: 1, b: 0, n }
    }

    pub fn translation(b: i64, n: usize) -> Self {
        AffineMap {
            a: 1,
            b: reduce(b, n),
            n,
        }
    }

    /// `x -> 1 - x`, which swaps 0 and 1.
    pub fn reflection(n: usize) -> Self {
        AffineMap {
            a: if n == 1 { 1 } else { n - 1 },
            b: 1 % n,
            n,
        }
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn modulus(&self) -> usize {
        self.n
    }

    pub fn apply(&self, x: usize) -> usize {
        (self.a * x + self.b) % self.n
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        assert_eq!(self.n, inner.n, "modulus mismatch");
        let n = self.n;
        AffineMap {
            a: (self.a * inner.a) % n,
            b: (self.a * inner.b + self.b) % n,
            n,
        }
        .normalized()
    }

    pub fn inverse(&self) -> AffineMap {
        let n = self.n;
        let ai = inverse_mod(self.a, n).expect("a is a unit");
        AffineMap {
            a: ai,
            b: (n - (ai * self.b) % n) % n,
            n,
        }
        .normalized()
    }

    fn normalized(self) -> Self {
        if self.n == 1 {
            AffineMap { a: 1, b: 0, n: 1 }
        } else {
            self
        }
    }

    /// Every affine map on `Z_n`, ascending `a` then `b`.
    pub fn all(n: usize) -> impl Iterator<Item = AffineMap> {
        units(n)
            .into_iter()
            .flat_map(move |a| (0..n).map(move |b| AffineMap { a, b, n }))
    }
}

impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x -> {}x + {} (mod {})", self.a, self.b, self.n)
    }
}

/// Evaluates both sides of `L(1 - s) = Σ_{b ≠ 0} lpr(-b) + |s|` and reports equality.
pub fn lpr_one_minus_identity_check(s: &ZnSeq) -> bool {
    let n = s.modulus();
    let lhs = s.one_minus().lpr_sum();
    let rhs: usize = s
        .powers()
        .filter(|&(r, _)| r != 0)
        .map(|(r, m)| lpr((n - r) % n, n) * m)
        .sum::<usize>()
        + s.len();
    lhs == rhs
}
