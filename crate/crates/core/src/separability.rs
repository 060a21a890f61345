//! Splitting a sequence, up to an affine map, into `α ∪ β` with
//! `L(α) < n` and `L(1 − β) < n`.
//!
//! Two independent routes are provided. [`is_separable`] searches the whole
//! affine orbit with a two-budget knapsack; [`decompose_via_proof`] builds the
//! split directly for long n-zero-free sequences by normalizing the most
//! repeated term to 0, peeling off a longest zero-sum block of nonzero terms,
//! and rescaling the zero-free remainder by a unit.

use serde::Serialize;

use crate::engine;
use crate::zn::{lpr, units, AffineMap, ZnSeq};
use crate::{Error, Result};

/// Witness of separability: `apply_affine(γ, map) = alpha ∪ beta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub map: AffineMap,
    pub alpha: ZnSeq,
    pub beta: ZnSeq,
}

impl Decomposition {
    pub fn modulus(&self) -> usize {
        self.alpha.modulus()
    }

    pub fn union(&self) -> ZnSeq {
        self.alpha.union(&self.beta).expect("same modulus")
    }

    pub fn len(&self) -> usize {
        self.alpha.len() + self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `L(α)` and `L(1 − β)`.
    pub fn costs(&self) -> (usize, usize) {
        (self.alpha.lpr_sum(), self.beta.one_minus().lpr_sum())
    }

    /// Check every invariant against the original sequence.
    pub fn validate(&self, original: &ZnSeq) -> Result<()> {
        let n = self.modulus();
        let fail = |what: String| Err(Error::Consistency(format!("{what}; decomposition {self:?}")));
        if original.modulus() != n || self.beta.modulus() != n || self.map.modulus() != n {
            return fail("modulus mismatch".into());
        }
        if original.apply_affine(&self.map)? != self.union() {
            return fail(format!("image of {original} under {} is not α ∪ β", self.map));
        }
        let (la, lb) = self.costs();
        if la >= n {
            return fail(format!("L(α) = {la} >= {n}"));
        }
        if lb >= n {
            return fail(format!("L(1-β) = {lb} >= {n}"));
        }
        if self.alpha.contains(0) {
            return fail("α contains 0".into());
        }
        if n > 1 && self.beta.contains(1) {
            return fail("β contains 1".into());
        }
        Ok(())
    }

    /// The image under `x -> 1 - x`: `(1 − β, 1 − α)`, swapping the roles of 0 and 1.
    pub fn flipped(&self) -> Decomposition {
        let n = self.modulus();
        Decomposition {
            map: AffineMap::reflection(n).compose(&self.map),
            alpha: self.beta.one_minus(),
            beta: self.alpha.one_minus(),
        }
    }

    /// The decomposition or its flip, whichever has `mult(1) <= mult(0)`.
    pub fn normalized(&self) -> Decomposition {
        let stats = mult_stats(&self.union());
        if stats.u <= stats.v {
            self.clone()
        } else {
            self.flipped()
        }
    }
}

/// Split `s` itself (no map) into `α ∪ β` with `L(α) <= n-1` and `L(1-β) <= n-1`.
///
/// Each term `x` costs `lpr(x)` on the α side and `lpr(1-x)` on the β side.
/// The table maps every achievable α-cost to the least β-cost of the rest.
pub fn is_separable_fixed(s: &ZnSeq) -> Option<(ZnSeq, ZnSeq)> {
    let n = s.modulus();
    let budget = n - 1;
    if s.len() > 2 * budget {
        return None;
    }
    let powers: Vec<(usize, usize)> = s.powers().collect();
    let mut best: Vec<Option<usize>> = vec![None; budget + 1];
    best[0] = Some(0);
    // choices[i][a] = copies of powers[i] sent to α on the best path reaching α-cost a.
    let mut choices: Vec<Vec<usize>> = Vec::with_capacity(powers.len());
    for &(r, m) in &powers {
        let ca = lpr(r, n);
        let cb = lpr((n + 1 - r) % n, n);
        let mut next: Vec<Option<usize>> = vec![None; budget + 1];
        let mut pick = vec![0usize; budget + 1];
        for (a0, b0) in best.iter().enumerate() {
            let Some(b0) = *b0 else { continue };
            for j in 0..=m {
                let a = a0 + j * ca;
                if a > budget {
                    break;
                }
                let b = b0 + (m - j) * cb;
                if b <= budget && next[a].is_none_or(|cur| b < cur) {
                    next[a] = Some(b);
                    pick[a] = j;
                }
            }
        }
        best = next;
        choices.push(pick);
    }
    let mut a = best.iter().position(Option::is_some)?;
    let mut alpha = ZnSeq::empty(n).expect("valid modulus");
    let mut beta = ZnSeq::empty(n).expect("valid modulus");
    for (i, &(r, m)) in powers.iter().enumerate().rev() {
        let j = choices[i][a];
        alpha.push(r, j);
        beta.push(r, m - j);
        a -= j * lpr(r, n);
    }
    debug_assert_eq!(a, 0);
    Some((alpha, beta))
}

/// Search the affine orbit in order (ascending `a`, then `b`) for an image
/// that splits; returns the first hit.
pub fn is_separable(s: &ZnSeq) -> Option<Decomposition> {
    let n = s.modulus();
    if s.len() > 2 * (n - 1) {
        return None;
    }
    AffineMap::all(n).find_map(|map| {
        let image = s.apply_affine(&map).expect("same modulus");
        is_separable_fixed(&image).map(|(alpha, beta)| Decomposition { map, alpha, beta })
    })
}

/// Smallest unit `c` with `L(c·τ) < n`. Exists for every zero-free `τ` longer than `n/2`.
pub fn unit_with_small_lpr_sum(tau: &ZnSeq) -> Option<usize> {
    let n = tau.modulus();
    units(n).into_iter().find(|&c| tau.scaled(c).lpr_sum() < n)
}

/// `|s| > 3n/2 − 1`.
pub fn is_long(len: usize, n: usize) -> bool {
    2 * len + 2 > 3 * n
}

/// Build the split constructively for an n-zero-free sequence longer than `3n/2 − 1`.
pub fn decompose_via_proof(s: &ZnSeq) -> Result<Decomposition> {
    let n = s.modulus();
    if !is_long(s.len(), n) {
        return Err(Error::Precondition(format!(
            "length {} is not greater than 3n/2 - 1 = {}",
            s.len(),
            3.0 * n as f64 / 2.0 - 1.0
        )));
    }
    if let Some(w) = engine::n_zero_sum_witness(s) {
        return Err(Error::Precondition(format!(
            "{s} is not n-zero-free (zero sum {})",
            w.subsequence
        )));
    }
    let dump = |what: &str, extra: String| {
        Error::Consistency(format!("{what}; input {s}; {extra}"))
    };

    // Move the most repeated term (smallest residue on ties) to 0.
    let top = s.max_mult();
    let r0 = (0..n).find(|&r| s.mult(r) == top).expect("n >= 1");
    let shift = AffineMap::translation(-(r0 as i64), n);
    let gamma = s.apply_affine(&shift)?;
    let v = gamma.mult(0);

    let sigma = engine::max_nonzero_zero_subsequence(&gamma).subsequence;
    let tau = gamma.restricted(|r| r != 0).without(&sigma)?;
    if sigma.len() + v >= n {
        return Err(dump("zero subsequence of length >= n", format!("σ = {sigma}, v = {v}")));
    }
    if 2 * tau.len() <= n || !engine::is_zero_free(&tau) {
        return Err(dump("τ is not zero-free of length > n/2", format!("τ = {tau}")));
    }

    let c = unit_with_small_lpr_sum(&tau)
        .ok_or_else(|| dump("no unit c with L(c·τ) < n", format!("τ = {tau}")))?;
    let scale = AffineMap::new(c as i64, 0, n)?;
    let map = scale.compose(&shift);
    let tau = tau.scaled(c);
    let sigma = sigma.scaled(c);

    let w = sigma.mult(1 % n);
    let rest = sigma.restricted(|r| r != 1 % n);
    let neg_sum: usize = rest.powers().map(|(b, m)| lpr((n - b) % n, n) * m).sum();
    let l_tau = tau.lpr_sum();
    if l_tau + neg_sum >= n || w != neg_sum {
        return Err(dump(
            "L(τ) + Σ lpr(-b_j) < n fails",
            format!("c = {c}, τ = {tau}, σ = {sigma}, L(τ) = {l_tau}, Σ = {neg_sum}, w = {w}"),
        ));
    }

    let mut alpha = tau;
    alpha.push(1 % n, w);
    let mut beta = rest;
    beta.push(0, v);
    let d = Decomposition { map, alpha, beta };
    d.validate(s)?;
    Ok(d)
}

/// Multiplicity profile of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MultStats {
    /// Multiplicity of 1 (0 when `n = 1`).
    pub u: usize,
    /// Multiplicity of 0.
    pub v: usize,
    pub top1: usize,
    pub top2sum: usize,
    /// `|s| − (n − 1)`.
    pub k: i64,
}

pub fn mult_stats(s: &ZnSeq) -> MultStats {
    let n = s.modulus();
    let mut sorted = s.mults().to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    MultStats {
        u: if n > 1 { s.mult(1) } else { 0 },
        v: s.mult(0),
        top1: sorted.first().copied().unwrap_or(0),
        top2sum: sorted.iter().take(2).sum(),
        k: s.len() as i64 - (n as i64 - 1),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NamedCheck {
    pub name: String,
    pub pass: bool,
}

/// Outcome of checking the structural consequences of a split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitStructureReport {
    pub n: usize,
    pub k: usize,
    pub u: usize,
    pub v: usize,
    /// `(p, q) = (|α|, |β|)` when `u + v = 2k`.
    pub uv_equality: Option<(usize, usize)>,
    pub max_equality: bool,
    pub checks: Vec<NamedCheck>,
}

impl SplitStructureReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

fn equality_shape(n: usize, p: usize, q: usize) -> Option<(ZnSeq, ZnSeq)> {
    if 2 * p + 1 < n || 2 * q + 1 < n || p >= n || q >= n {
        return None;
    }
    let alpha = ZnSeq::from_powers(n, &[(1, 2 * p + 1 - n), (2, n - 1 - p)]).ok()?;
    let beta = ZnSeq::from_powers(n, &[(0, 2 * q + 1 - n), (-1, n - 1 - q)]).ok()?;
    Some((alpha, beta))
}

/// Check every consequence that holds for a split of length `n − 1 + k`.
pub fn verify_split_structure(d: &Decomposition, k: usize) -> Result<SplitStructureReport> {
    let n = d.modulus();
    if k == 0 || k >= n {
        return Err(Error::Precondition(format!("need 0 < k < n, got k = {k}, n = {n}")));
    }
    if d.len() != n - 1 + k {
        return Err(Error::Precondition(format!(
            "|α| + |β| = {} but n - 1 + k = {}",
            d.len(),
            n - 1 + k
        )));
    }
    let (la, lb) = d.costs();
    if la >= n || lb >= n {
        return Err(Error::Precondition(format!(
            "malformed decomposition: L(α) = {la}, L(1-β) = {lb}, n = {n}"
        )));
    }

    let union = d.union();
    let stats = mult_stats(&union);
    let (u, v) = (stats.u, stats.v);
    let (p, q) = (d.alpha.len(), d.beta.len());
    let mut checks = Vec::new();
    let mut check = |name: &str, pass: bool| {
        checks.push(NamedCheck {
            name: name.to_string(),
            pass,
        })
    };

    check("union is n-zero-free", engine::is_n_zero_free(&union));

    check("k <= |α| < n", k <= p && p < n);
    check("k <= |β| < n", k <= q && q < n);
    let gap_ok = d.alpha.powers().all(|(a, _)| {
        d.beta
            .powers()
            .all(|(b, _)| lpr(b, n) >= lpr(a, n) + k)
    });
    check("lpr(b) - lpr(a) >= k", gap_ok);
    check(
        "α and β share no term",
        d.alpha.powers().all(|(a, _)| !d.beta.contains(a)),
    );

    check("u + v >= 2k", u + v >= 2 * k);
    check("max(u, v) >= k", u.max(v) >= k);
    check("min(u, v) >= 2k - n + 1", u.min(v) + n >= 2 * k + 1);

    let uv_equality = u + v == 2 * k;
    let uv_shape = equality_shape(n, p, q).is_some_and(|(a, b)| a == d.alpha && b == d.beta);
    check("u + v = 2k iff equality shape", uv_equality == uv_shape);

    let max_equality = u.max(v) == k;
    let max_shape = (n - k) % 2 == 1 && {
        let h = (n - 1 - k) / 2;
        let a = ZnSeq::from_powers(n, &[(1, k), (2, h)]).expect("valid modulus");
        let b = ZnSeq::from_powers(n, &[(0, k), (-1, h)]).expect("valid modulus");
        a == d.alpha && b == d.beta
    };
    check("max(u, v) = k iff parity shape", max_equality == max_shape);

    if 2 * k + 1 >= n {
        check("top multiplicity is max(u, v)", stats.top1 == u.max(v));
    }

    Ok(SplitStructureReport {
        n,
        k,
        u,
        v,
        uv_equality: uv_equality.then_some((p, q)),
        max_equality,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> ZnSeq {
        s.parse().unwrap()
    }

    fn decomposition(n: usize, alpha: &str, beta: &str) -> Decomposition {
        Decomposition {
            map: AffineMap::identity(n),
            alpha: seq(alpha),
            beta: seq(beta),
        }
    }

    #[test]
    fn fixed_split_examples() {
        let (a, b) = is_separable_fixed(&seq("n=4: 0^3 1^3")).unwrap();
        assert_eq!(a, seq("n=4: 1^3"));
        assert_eq!(b, seq("n=4: 0^3"));
        assert!(is_separable_fixed(&seq("n=6: 0^5 2^2 3")).is_none());
        let (a, b) = is_separable_fixed(&seq("n=3:")).unwrap();
        assert!(a.is_empty() && b.is_empty());
    }

    #[test]
    fn fixed_split_agrees_with_brute_force() {
        // every split of every multiset of length <= 6 over Z_5
        fn brute(s: &ZnSeq) -> bool {
            let terms: Vec<usize> = s.terms().collect();
            let n = s.modulus();
            (0u32..1 << terms.len()).any(|mask| {
                let (mut la, mut lb) = (0, 0);
                for (i, &t) in terms.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        la += lpr(t, n);
                    } else {
                        lb += lpr((n + 1 - t) % n, n);
                    }
                }
                la < n && lb < n
            })
        }
        let n = 5;
        let mut stack = vec![ZnSeq::empty(n).unwrap()];
        while let Some(s) = stack.pop() {
            let got = is_separable_fixed(&s);
            assert_eq!(got.is_some(), brute(&s), "{s}");
            if let Some((a, b)) = got {
                assert_eq!(a.union(&b).unwrap(), s);
                assert!(a.lpr_sum() < n && b.one_minus().lpr_sum() < n);
            }
            if s.len() < 6 {
                let last = s.powers().map(|(r, _)| r).last().unwrap_or(0);
                for r in last..n {
                    let mut t = s.clone();
                    t.push(r, 1);
                    stack.push(t);
                }
            }
        }
    }

    #[test]
    fn orbit_search_examples() {
        let s = seq("n=5: 0^2 1^4 4");
        let d = is_separable(&s).unwrap();
        d.validate(&s).unwrap();
        assert_eq!(d.map, AffineMap::identity(5));
        assert_eq!(d.costs(), (4, 4));

        assert!(is_separable(&seq("n=9: 0^8 2^2 3^2")).is_none());

        let s = seq("n=3: 0^2 1^2");
        let d = is_separable(&s).unwrap();
        assert_eq!(d.alpha, seq("n=3: 1^2"));
        assert_eq!(d.beta, seq("n=3: 0^2"));
    }

    #[test]
    fn proof_route_examples() {
        let s = seq("n=5: 0^2 1^4 4");
        let d = decompose_via_proof(&s).unwrap();
        assert_eq!(d.map, AffineMap::new(4, 1, 5).unwrap());
        assert_eq!(d.alpha, seq("n=5: 1^2 2"));
        assert_eq!(d.beta, seq("n=5: 0^4"));
        assert_eq!(d.costs(), (4, 4));

        let s = seq("n=4: 0^3 1^3");
        let d = decompose_via_proof(&s).unwrap();
        assert_eq!(d.map, AffineMap::identity(4));
        assert_eq!(d.alpha, seq("n=4: 1^3"));
        assert_eq!(d.beta, seq("n=4: 0^3"));

        let s = seq("n=6: 0^5 1^4");
        let d = decompose_via_proof(&s).unwrap();
        d.validate(&s).unwrap();
    }

    #[test]
    fn proof_route_preconditions() {
        assert!(matches!(
            decompose_via_proof(&seq("n=3: 0 1")),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            decompose_via_proof(&seq("n=4: 0^5 1")),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn unit_search() {
        // 3 4^2 in Z_5: c = 4 gives 2 1 1
        assert_eq!(unit_with_small_lpr_sum(&seq("n=5: 3 4^2")), Some(4));
        assert_eq!(unit_with_small_lpr_sum(&seq("n=5: 1 1")), Some(1));
    }

    #[test]
    fn mult_stats_examples() {
        let m = mult_stats(&seq("n=7: 0^4 1^4 2 6"));
        assert_eq!((m.u, m.v, m.top1, m.top2sum, m.k), (4, 4, 4, 8, 4));
        let m = mult_stats(&seq("n=4: 0^3 1^3"));
        assert_eq!((m.u, m.v, m.top1, m.top2sum, m.k), (3, 3, 3, 6, 3));
        let m = mult_stats(&seq("n=5: 0^4 1^2 2"));
        assert_eq!((m.u, m.v, m.top1, m.top2sum, m.k), (2, 4, 4, 6, 3));
        assert_eq!(mult_stats(&seq("n=5: 1")).k, -3);
    }

    #[test]
    fn split_structure_examples() {
        let r = verify_split_structure(&decomposition(7, "n=7: 1^4 2", "n=7: 0^4 6"), 4).unwrap();
        assert!(r.all_pass(), "{:?}", r.failed());
        assert_eq!((r.u, r.v), (4, 4));
        assert_eq!(r.uv_equality, Some((5, 5)));
        // n=7, k=4 have different parity and the split is 1^4 2^1 / 0^4 (-1)^1
        assert!(r.max_equality);

        let r = verify_split_structure(&decomposition(4, "n=4: 1^3", "n=4: 0^3"), 3).unwrap();
        assert!(r.all_pass());
        assert_eq!(r.uv_equality, Some((3, 3)));

        let r = verify_split_structure(&decomposition(5, "n=5: 1^2 2", "n=5: 0^4"), 3).unwrap();
        assert!(r.all_pass(), "{:?}", r.failed());
        assert_eq!((r.u, r.v), (2, 4));
        assert_eq!(r.uv_equality, Some((3, 4)));
        assert!(!r.max_equality);
    }

    #[test]
    fn split_structure_rejects_malformed() {
        let d = decomposition(5, "n=5: 1^2 2", "n=5: 0^4");
        assert!(verify_split_structure(&d, 2).is_err());
        assert!(verify_split_structure(&d, 5).is_err());
        let bad = decomposition(5, "n=5: 3^2 2", "n=5: 0^4");
        assert!(verify_split_structure(&bad, 3).is_err());
    }

    #[test]
    fn flip_swaps_zero_and_one() {
        let s = seq("n=5: 0^2 1^4 4");
        let d = is_separable(&s).unwrap();
        let f = d.flipped();
        f.validate(&s).unwrap();
        let (a, b) = (mult_stats(&d.union()), mult_stats(&f.union()));
        assert_eq!((a.u, a.v), (b.v, b.u));
        let nd = d.normalized();
        nd.validate(&s).unwrap();
        let st = mult_stats(&nd.union());
        assert!(st.u <= st.v);
    }
}
