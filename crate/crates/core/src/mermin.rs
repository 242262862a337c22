//! Mermin polynomials: recursive construction, classical bounds by
//! exhaustive enumeration, and quantum (Tsirelson-type) bounds.
//!
//! The polynomials are built symbolically with exact rational coefficients,
//! starting from M_1 = 2 A_1 and applying
//! M_n = 1/2 M_{n-1} (A_n + A_n') + 1/2 M'_{n-1} (A_n - A_n'),
//! where the primed polynomial swaps primed and unprimed observables
//! everywhere. Under this normalization M_2 is the Bell-CHSH operator and the
//! classical bound is 2 for every n up to the enumeration limit.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;

use crate::error::{Error, Result};

/// Whether a party measures its unprimed (A) or primed (A') observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Choice {
    Unprimed,
    Primed,
}

impl Choice {
    fn swapped(self) -> Self {
        match self {
            Choice::Unprimed => Choice::Primed,
            Choice::Primed => Choice::Unprimed,
        }
    }
}

/// One monomial: a rational coefficient times one observable per party.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerminTerm {
    pub coefficient: Rational64,
    pub choices: Vec<Choice>,
}

impl MerminTerm {
    /// Human-readable label like "A'BC" (party letters with prime marks).
    pub fn label(&self) -> String {
        let mut s = String::new();
        for (i, choice) in self.choices.iter().enumerate() {
            s.push((b'A' + (i % 26) as u8) as char);
            if *choice == Choice::Primed {
                s.push('\'');
            }
        }
        s
    }
}

/// A Mermin polynomial in collected, canonically ordered form.
///
/// Terms are sorted lexicographically by choice vector and carry nonzero
/// coefficients; equal polynomials therefore compare equal structurally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerminPolynomial {
    n: usize,
    terms: Vec<MerminTerm>,
}

/// Classical (local-hidden-variable) and quantum bounds for a polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair {
    pub classical: f64,
    pub quantum: f64,
}

/// Enumeration limit for classical bounds: 4^n deterministic assignments.
pub const MAX_ENUMERATION_PARTIES: usize = 6;

type TermMap = BTreeMap<Vec<Choice>, Rational64>;

fn collect(n: usize, map: TermMap) -> MerminPolynomial {
    let zero = Rational64::from_integer(0);
    let terms = map
        .into_iter()
        .filter(|(_, c)| *c != zero)
        .map(|(choices, coefficient)| MerminTerm {
            coefficient,
            choices,
        })
        .collect();
    MerminPolynomial { n, terms }
}

impl MerminPolynomial {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[MerminTerm] {
        &self.terms
    }

    fn term_map(&self) -> TermMap {
        self.terms
            .iter()
            .map(|t| (t.choices.clone(), t.coefficient))
            .collect()
    }

    /// Swap primed and unprimed observables everywhere (the M' operation).
    pub fn prime_swap(&self) -> Self {
        let map = self
            .terms
            .iter()
            .map(|t| {
                let choices: Vec<Choice> = t.choices.iter().map(|c| c.swapped()).collect();
                (choices, t.coefficient)
            })
            .collect();
        collect(self.n, map)
    }

    /// Multiply every coefficient by an exact rational factor.
    pub fn scaled(&self, factor: Rational64) -> Self {
        let map = self
            .terms
            .iter()
            .map(|t| (t.choices.clone(), t.coefficient * factor))
            .collect();
        collect(self.n, map)
    }

    /// Value of the polynomial under a deterministic +-1 assignment;
    /// `signs[i]` holds (A_i, A_i').
    fn evaluate(&self, signs: &[(i64, i64)]) -> Rational64 {
        let mut total = Rational64::from_integer(0);
        for term in &self.terms {
            let mut sign = 1i64;
            for (i, choice) in term.choices.iter().enumerate() {
                sign *= match choice {
                    Choice::Unprimed => signs[i].0,
                    Choice::Primed => signs[i].1,
                };
            }
            total += term.coefficient * Rational64::from_integer(sign);
        }
        total
    }

    /// Classical and quantum bounds for this (unscaled) polynomial.
    pub fn bound_pair(&self) -> Result<BoundPair> {
        Ok(BoundPair {
            classical: classical_bound(self)?,
            quantum: quantum_bound(self.n)?,
        })
    }
}

impl fmt::Display for MerminPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let one = Rational64::from_integer(1);
        for (i, term) in self.terms.iter().enumerate() {
            let coeff = term.coefficient;
            if i == 0 {
                if coeff < Rational64::from_integer(0) {
                    write!(f, "-")?;
                }
            } else if coeff < Rational64::from_integer(0) {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = if coeff < Rational64::from_integer(0) {
                -coeff
            } else {
                coeff
            };
            if mag != one {
                write!(f, "{mag} ")?;
            }
            write!(f, "{}", term.label())?;
        }
        Ok(())
    }
}

/// Build M_n by the recursion, fully collected and canonically ordered.
pub fn build_mermin(n: usize) -> Result<MerminPolynomial> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "Mermin polynomials need at least one party".into(),
        ));
    }
    let mut map: TermMap = TermMap::new();
    map.insert(vec![Choice::Unprimed], Rational64::from_integer(2));
    let half = Rational64::new(1, 2);
    for _ in 2..=n {
        let prev = map;
        let mut next = TermMap::new();
        let mut add = |choices: Vec<Choice>, coeff: Rational64| {
            let cell = next.entry(choices).or_insert(Rational64::from_integer(0));
            *cell += coeff;
        };
        for (choices, coeff) in &prev {
            // 1/2 M_{n-1} (A_n + A_n')
            for last in [Choice::Unprimed, Choice::Primed] {
                let mut v = choices.clone();
                v.push(last);
                add(v, half * coeff);
            }
            // 1/2 M'_{n-1} (A_n - A_n')
            let swapped: Vec<Choice> = choices.iter().map(|c| c.swapped()).collect();
            for (last, sign) in [(Choice::Unprimed, 1), (Choice::Primed, -1)] {
                let mut v = swapped.clone();
                v.push(last);
                add(v, half * coeff * Rational64::from_integer(sign));
            }
        }
        map = next;
        map.retain(|_, c| *c != Rational64::from_integer(0));
    }
    Ok(collect(n, map))
}

/// Max |value| over all 4^n deterministic +-1 assignments.
pub fn classical_bound(poly: &MerminPolynomial) -> Result<f64> {
    let n = poly.n;
    if n > MAX_ENUMERATION_PARTIES {
        return Err(Error::EnumerationTooLarge {
            n,
            max: MAX_ENUMERATION_PARTIES,
        });
    }
    let mut best = Rational64::from_integer(0);
    let mut signs = vec![(1i64, 1i64); n];
    for assignment in 0u64..(1 << (2 * n)) {
        for (i, pair) in signs.iter_mut().enumerate() {
            pair.0 = 1 - 2 * ((assignment >> (2 * i)) & 1) as i64;
            pair.1 = 1 - 2 * ((assignment >> (2 * i + 1)) & 1) as i64;
        }
        let mut value = poly.evaluate(&signs);
        if value < Rational64::from_integer(0) {
            value = -value;
        }
        if value > best {
            best = value;
        }
    }
    Ok(*best.numer() as f64 / *best.denom() as f64)
}

/// Tsirelson-type bound 2^{(n+1)/2}.
pub fn quantum_bound(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "quantum bound is defined for n >= 2".into(),
        ));
    }
    if (n + 1) % 2 == 0 {
        Ok(2f64.powi(((n + 1) / 2) as i32))
    } else {
        Ok(2f64.powi((n / 2) as i32) * std::f64::consts::SQRT_2)
    }
}

/// Substitute A_i = A_i' = +1 for the given (0-based) parties and re-collect
/// over the remaining ones.
pub fn reduce_with_identity(poly: &MerminPolynomial, fixed: &[usize]) -> Result<MerminPolynomial> {
    let mut drop = vec![false; poly.n];
    for &party in fixed {
        if party >= poly.n {
            return Err(Error::InvalidArgument(format!(
                "party {party} out of range for an n={} polynomial",
                poly.n
            )));
        }
        drop[party] = true;
    }
    let remaining = poly.n - drop.iter().filter(|&&d| d).count();
    if remaining == 0 {
        return Err(Error::InvalidArgument(
            "cannot fix every party; at least one must remain".into(),
        ));
    }
    let mut map = TermMap::new();
    for (choices, coeff) in poly.term_map() {
        let kept: Vec<Choice> = choices
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop[*i])
            .map(|(_, c)| *c)
            .collect();
        let cell = map.entry(kept).or_insert(Rational64::from_integer(0));
        *cell += coeff;
    }
    Ok(collect(remaining, map))
}
