//! Constructors for the named extremal and boundary families.
//!
//! Each instance carries the properties it is claimed to have, so callers
//! (and the `gen --check` command) can confirm them with the engine.

use std::fmt;

use serde::Serialize;

use crate::engine;
use crate::separability::{self, mult_stats, Decomposition};
use crate::zn::{AffineMap, ZnSeq};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    EqualityUv,
    MinMaxMult,
    Boundary,
    GnkLower,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::EqualityUv => "equality-uv",
            Family::MinMaxMult => "min-max-mult",
            Family::Boundary => "boundary",
            Family::GnkLower => "gnk-lower",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Claimed properties; `None` means the family makes no claim.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Claims {
    pub length: usize,
    pub n_zero_free: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separable: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distinct_terms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_plus_v: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top2sum: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClaimCheck {
    pub claim: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyInstance {
    pub family: Family,
    pub params: Vec<(String, usize)>,
    pub seq: ZnSeq,
    /// The α/β split the family is built from, when it has one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<Decomposition>,
    pub claims: Claims,
}

impl FamilyInstance {
    /// Recompute every claim with the engine.
    pub fn check_claims(&self) -> Vec<ClaimCheck> {
        let s = &self.seq;
        let stats = mult_stats(s);
        let mut out = Vec::new();
        let mut push = |claim: &str, expected: String, observed: String| {
            out.push(ClaimCheck {
                claim: claim.to_string(),
                pass: expected == observed,
                expected,
                observed,
            })
        };
        push("length", self.claims.length.to_string(), s.len().to_string());
        push(
            "n-zero-free",
            self.claims.n_zero_free.to_string(),
            engine::is_n_zero_free(s).to_string(),
        );
        if let Some(sep) = self.claims.separable {
            push(
                "separable",
                sep.to_string(),
                separability::is_separable(s).is_some().to_string(),
            );
        }
        if let Some(d) = self.claims.distinct_terms {
            push("distinct terms", d.to_string(), s.distinct_count().to_string());
        }
        if let Some(uv) = self.claims.u_plus_v {
            push("u + v", uv.to_string(), (stats.u + stats.v).to_string());
        }
        if let Some(t) = self.claims.top1 {
            push("top multiplicity", t.to_string(), stats.top1.to_string());
        }
        if let Some(t) = self.claims.top2sum {
            push("top two multiplicities", t.to_string(), stats.top2sum.to_string());
        }
        if let Some(d) = &self.split {
            let ok = d.validate(s).is_ok();
            push("split is valid", "true".into(), ok.to_string());
        }
        out
    }
}

fn violated(msg: String) -> Error {
    Error::Parameter(msg)
}

fn split(n: usize, alpha: &[(i64, usize)], beta: &[(i64, usize)]) -> Result<Decomposition> {
    Ok(Decomposition {
        map: AffineMap::identity(n),
        alpha: ZnSeq::from_powers(n, alpha)?,
        beta: ZnSeq::from_powers(n, beta)?,
    })
}

/// `1^{2p−n+1} 2^{n−1−p} ∪ 0^{2q−n+1} (−1)^{n−1−q}`, the sequences with `u + v = 2k`.
pub fn gen_equality_uv(n: usize, k: usize, p: usize, q: usize) -> Result<FamilyInstance> {
    if !(0 < k && k < n) {
        return Err(violated(format!("0 < k < n violated (k={k}, n={n})")));
    }
    for (name, x) in [("p", p), ("q", q)] {
        if 2 * x + 1 < n {
            return Err(violated(format!("(n-1)/2 <= {name} violated ({name}={x}, n={n})")));
        }
        if x >= n {
            return Err(violated(format!("{name} < n violated ({name}={x}, n={n})")));
        }
    }
    if p + q != n - 1 + k {
        return Err(violated(format!(
            "p + q = n - 1 + k violated (p+q={}, n-1+k={})",
            p + q,
            n - 1 + k
        )));
    }
    let d = split(
        n,
        &[(1, 2 * p + 1 - n), (2, n - 1 - p)],
        &[(0, 2 * q + 1 - n), (-1, n - 1 - q)],
    )?;
    Ok(FamilyInstance {
        family: Family::EqualityUv,
        params: vec![("n".into(), n), ("k".into(), k), ("p".into(), p), ("q".into(), q)],
        seq: d.union(),
        split: Some(d),
        claims: Claims {
            length: n - 1 + k,
            n_zero_free: true,
            u_plus_v: Some(2 * k),
            ..Claims::default()
        },
    })
}

/// Sequences of length `n − 1 + k` whose top multiplicity is as small as possible.
pub fn gen_min_max_mult(n: usize, k: usize) -> Result<FamilyInstance> {
    if !(2 * k > n && k < n) {
        return Err(violated(format!("n/2 < k < n violated (k={k}, n={n})")));
    }
    let (d, top) = if (n - k) % 2 == 1 {
        let h = (n - 1 - k) / 2;
        (split(n, &[(1, k), (2, h)], &[(0, k), (-1, h)])?, k)
    } else {
        (
            split(
                n,
                &[(1, k - 1), (2, (n - k) / 2)],
                &[(0, k + 1), (-1, (n - k - 2) / 2)],
            )?,
            k + 1,
        )
    };
    Ok(FamilyInstance {
        family: Family::MinMaxMult,
        params: vec![("n".into(), n), ("k".into(), k)],
        seq: d.union(),
        split: Some(d),
        claims: Claims {
            length: n - 1 + k,
            n_zero_free: true,
            top1: Some(top),
            top2sum: Some(2 * k),
            ..Claims::default()
        },
    })
}

/// n-zero-free sequences of length `n − 1 + ⌊n/2⌋` with no split.
pub fn gen_boundary_counterexample(n: usize) -> Result<FamilyInstance> {
    let seq = if n % 2 == 1 {
        if n < 9 {
            return Err(violated(format!("odd n >= 9 violated (n={n})")));
        }
        ZnSeq::from_powers(n, &[(0, n - 1), (2, (n - 5) / 2), (3, 2)])?
    } else {
        if n < 6 {
            return Err(violated(format!("even n >= 6 violated (n={n})")));
        }
        ZnSeq::from_powers(n, &[(0, n - 1), (2, n / 2 - 1), (3, 1)])?
    };
    Ok(FamilyInstance {
        family: Family::Boundary,
        params: vec![("n".into(), n)],
        seq,
        split: None,
        claims: Claims {
            length: n - 1 + n / 2,
            n_zero_free: true,
            separable: Some(false),
            ..Claims::default()
        },
    })
}

/// Long n-zero-free sequences with exactly `k` distinct terms.
pub fn gen_gnk_lower_bound(n: usize, k: usize) -> Result<FamilyInstance> {
    let (negatives, zeros, ones, top) = if k % 2 == 0 {
        if k < 2 {
            return Err(violated(format!("even k >= 2 violated (k={k})")));
        }
        if (k * k + 2 * k) % 8 != 0 {
            return Err(violated(format!("(k^2+2k)/8 is not an integer (k={k})")));
        }
        let e = (k * k + 2 * k) / 8;
        if n < e + 1 {
            return Err(violated(format!("n >= (k^2+2k)/8 + 1 = {} violated (n={n})", e + 1)));
        }
        ((k - 2) / 2, n - e, n - e, k / 2)
    } else {
        if k < 3 {
            return Err(violated(format!("odd k >= 3 violated (k={k})")));
        }
        if (k * k - 1) % 8 != 0 || (k * k + 4 * k + 3) % 8 != 0 {
            return Err(violated(format!("family exponents are not integers (k={k})")));
        }
        let e0 = (k * k - 1) / 8;
        let e1 = (k * k + 4 * k + 3) / 8;
        if n < e1 + 1 {
            return Err(violated(format!(
                "n >= (k^2+4k+3)/8 + 1 = {} violated (n={n})",
                e1 + 1
            )));
        }
        ((k - 3) / 2, n - e0, n - e1, (k + 1) / 2)
    };
    let mut beta: Vec<(i64, usize)> = (1..=negatives as i64).map(|j| (-j, 1)).collect();
    beta.push((0, zeros));
    let mut alpha: Vec<(i64, usize)> = vec![(1, ones)];
    alpha.extend((2..=top as i64).map(|j| (j, 1)));
    let d = split(n, &alpha, &beta)?;
    let seq = d.union();
    if seq.distinct_count() != k {
        return Err(violated(format!(
            "terms collide modulo n (n={n}, k={k}): {seq}"
        )));
    }
    let h = (k - 1) / 2;
    let length = 2 * n - 2 - h * h - if k % 2 == 0 { h } else { 0 };
    Ok(FamilyInstance {
        family: Family::GnkLower,
        params: vec![("n".into(), n), ("k".into(), k)],
        seq,
        split: Some(d),
        claims: Claims {
            length,
            n_zero_free: true,
            distinct_terms: Some(k),
            ..Claims::default()
        },
    })
}

/// `⌊((k − 1)/2)²⌋`.
pub fn floor_half_square(k: usize) -> usize {
    let km = k.saturating_sub(1);
    km * km / 4
}
