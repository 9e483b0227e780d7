//! Exact operator algebra of two bosons on a finite periodic lattice.
//!
//! States are integer combinations of creation-operator monomials
//! `C_a† C_b† |φ⟩` (unordered site pairs); every action is evaluated from
//! the defining commutators `[C_a, C_b†] = δ_ab`, in integer arithmetic, so
//! the translation-operator identities can be checked exactly rather than
//! numerically. A parallel representation with symmetrized Wannier kets
//! carries the same algebra for the comparison.

use std::collections::BTreeMap;

use crate::{DqwError, Result};

/// Integer combination of two-boson Fock monomials on a periodic lattice of
/// `m` sites. Keys are canonically ordered site pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockState {
    m: i64,
    terms: BTreeMap<(i64, i64), i64>,
}

impl FockState {
    pub fn vacuum_pair(m: i64, a: i64, b: i64) -> Result<Self> {
        if m < 4 {
            return Err(DqwError::domain(format!("lattice too small: {m}")));
        }
        let mut terms = BTreeMap::new();
        terms.insert(canon(m, a, b), 1);
        Ok(FockState { m, terms })
    }

    pub fn lattice_size(&self) -> i64 {
        self.m
    }

    pub fn terms(&self) -> &BTreeMap<(i64, i64), i64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, key: (i64, i64), coeff: i64) {
        let entry = self.terms.entry(key).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.terms.remove(&key);
        }
    }

    pub fn sub(&self, other: &FockState) -> FockState {
        let mut out = self.clone();
        for (&k, &c) in &other.terms {
            out.add_term(k, -c);
        }
        out
    }
}

fn canon(m: i64, a: i64, b: i64) -> (i64, i64) {
    let a = a.rem_euclid(m);
    let b = b.rem_euclid(m);
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// One-boson intermediates that appear while commuting an annihilator
/// through.
#[derive(Debug, Clone, Default)]
struct OneBoson {
    terms: BTreeMap<i64, i64>,
}

/// `C_s` applied from the commutators:
/// `C_s C_a† C_b† |φ⟩ = δ_{sa} C_b†|φ⟩ + δ_{sb} C_a†|φ⟩`.
fn lower(state: &FockState, s: i64) -> OneBoson {
    let s = s.rem_euclid(state.m);
    let mut out = OneBoson::default();
    for (&(a, b), &c) in &state.terms {
        if s == a {
            *out.terms.entry(b).or_insert(0) += c;
        }
        if s == b {
            *out.terms.entry(a).or_insert(0) += c;
        }
    }
    out.terms.retain(|_, c| *c != 0);
    out
}

/// `C_s†` on a one-boson combination.
fn raise(state: &OneBoson, s: i64, m: i64, out: &mut FockState) {
    for (&t, &c) in &state.terms {
        out.add_term(canon(m, s, t), c);
    }
}

/// Translation operator `R = Σ_s C_{s-1}† C_s`, evaluated from its
/// definition (not from any derived action).
pub fn apply_r(state: &FockState) -> FockState {
    let m = state.m;
    let mut out = FockState {
        m,
        terms: BTreeMap::new(),
    };
    for s in 0..m {
        let lowered = lower(state, s);
        raise(&lowered, s - 1, m, &mut out);
    }
    out
}

/// `R† = Σ_s C_{s+1}† C_s`.
pub fn apply_r_dagger(state: &FockState) -> FockState {
    let m = state.m;
    let mut out = FockState {
        m,
        terms: BTreeMap::new(),
    };
    for s in 0..m {
        let lowered = lower(state, s);
        raise(&lowered, s + 1, m, &mut out);
    }
    out
}

/// Integer combination of symmetric Wannier kets `|a, b⟩_S` (unordered
/// pairs) on the same periodic lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymWannierState {
    m: i64,
    terms: BTreeMap<(i64, i64), i64>,
}

impl SymWannierState {
    pub fn basis(m: i64, a: i64, b: i64) -> Result<Self> {
        if m < 4 {
            return Err(DqwError::domain(format!("lattice too small: {m}")));
        }
        let mut terms = BTreeMap::new();
        terms.insert(canon(m, a, b), 1);
        Ok(SymWannierState { m, terms })
    }

    pub fn terms(&self) -> &BTreeMap<(i64, i64), i64> {
        &self.terms
    }

    fn add_term(&mut self, key: (i64, i64), coeff: i64) {
        let entry = self.terms.entry(key).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.terms.remove(&key);
        }
    }

    pub fn sub(&self, other: &SymWannierState) -> SymWannierState {
        let mut out = self.clone();
        for (&k, &c) in &other.terms {
            out.add_term(k, -c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The equivalence map onto Fock monomials (coefficient-preserving).
    pub fn to_fock(&self) -> FockState {
        FockState {
            m: self.m,
            terms: self.terms.clone(),
        }
    }
}

/// `T₁₂ |a,b⟩_S = |a-1, b⟩_S + |a, b-1⟩_S`.
pub fn apply_t12(state: &SymWannierState) -> SymWannierState {
    let m = state.m;
    let mut out = SymWannierState {
        m,
        terms: BTreeMap::new(),
    };
    for (&(a, b), &c) in &state.terms {
        out.add_term(canon(m, a - 1, b), c);
        out.add_term(canon(m, a, b - 1), c);
    }
    out
}

/// `T₁₂† |a,b⟩_S = |a+1, b⟩_S + |a, b+1⟩_S`.
pub fn apply_t12_dagger(state: &SymWannierState) -> SymWannierState {
    let m = state.m;
    let mut out = SymWannierState {
        m,
        terms: BTreeMap::new(),
    };
    for (&(a, b), &c) in &state.terms {
        out.add_term(canon(m, a + 1, b), c);
        out.add_term(canon(m, a, b + 1), c);
    }
    out
}

/// Ordered-pair states for the distinguishable-particle shift operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistState {
    m: i64,
    terms: BTreeMap<(i64, i64), i64>,
}

impl DistState {
    pub fn basis(m: i64, a: i64, b: i64) -> Result<Self> {
        if m < 4 {
            return Err(DqwError::domain(format!("lattice too small: {m}")));
        }
        let mut terms = BTreeMap::new();
        terms.insert((a.rem_euclid(m), b.rem_euclid(m)), 1);
        Ok(DistState { m, terms })
    }

    pub fn terms(&self) -> &BTreeMap<(i64, i64), i64> {
        &self.terms
    }

    fn add_term(&mut self, key: (i64, i64), coeff: i64) {
        let entry = self.terms.entry(key).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.terms.remove(&key);
        }
    }

    pub fn sub(&self, other: &DistState) -> DistState {
        let mut out = self.clone();
        for (&k, &c) in &other.terms {
            out.add_term(k, -c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Pair shift `a₁₂ |s_j, s_l⟩ = |s_j - 1, s_l⟩ + |s_j, s_l - 1⟩`.
pub fn apply_a12(state: &DistState) -> DistState {
    let m = state.m;
    let mut out = DistState {
        m,
        terms: BTreeMap::new(),
    };
    for (&(a, b), &c) in &state.terms {
        out.add_term(((a - 1).rem_euclid(m), b), c);
        out.add_term((a, (b - 1).rem_euclid(m)), c);
    }
    out
}

/// `a₁₂† |s_j, s_l⟩ = |s_j + 1, s_l⟩ + |s_j, s_l + 1⟩`.
pub fn apply_a12_dagger(state: &DistState) -> DistState {
    let m = state.m;
    let mut out = DistState {
        m,
        terms: BTreeMap::new(),
    };
    for (&(a, b), &c) in &state.terms {
        out.add_term(((a + 1).rem_euclid(m), b), c);
        out.add_term((a, (b + 1).rem_euclid(m)), c);
    }
    out
}

/// One identity check of the lab report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lattice: i64,
    pub pass: bool,
}

/// Run every operator identity over all two-boson basis states of an
/// `m`-site periodic lattice, in exact integer arithmetic.
pub fn run_identity_lab(m: i64) -> Result<Vec<IdentityCheck>> {
    let mut all = vec![
        ("translate-down action", true),
        ("translate-up action", true),
        ("number-conserving hop exchange", true),
        ("translation operators commute", true),
        ("symmetric-ket pair algebra", true),
        ("fock / symmetric-ket equivalence", true),
        ("distinguishable pair-shift algebra", true),
    ];
    for a in 0..m {
        for b in a..m {
            let f = FockState::vacuum_pair(m, a, b)?;

            // R C_a†C_b†|φ⟩ = C_{a-1}†C_b†|φ⟩ + C_{b-1}†C_a†|φ⟩.
            let mut want = FockState {
                m,
                terms: BTreeMap::new(),
            };
            want.add_term(canon(m, a - 1, b), 1);
            want.add_term(canon(m, b - 1, a), 1);
            all[0].1 &= apply_r(&f) == want;

            // R† C_a†C_b†|φ⟩ = C_{a+1}†C_b†|φ⟩ + C_{b+1}†C_a†|φ⟩.
            let mut want = FockState {
                m,
                terms: BTreeMap::new(),
            };
            want.add_term(canon(m, a + 1, b), 1);
            want.add_term(canon(m, b + 1, a), 1);
            all[1].1 &= apply_r_dagger(&f) == want;

            // R R† = 2 + exchange hops.
            let mut want = FockState {
                m,
                terms: BTreeMap::new(),
            };
            want.add_term(canon(m, a, b), 2);
            want.add_term(canon(m, a - 1, b + 1), 1);
            want.add_term(canon(m, a + 1, b - 1), 1);
            all[2].1 &= apply_r(&apply_r_dagger(&f)) == want;

            // [R, R†] = 0.
            let comm = apply_r(&apply_r_dagger(&f)).sub(&apply_r_dagger(&apply_r(&f)));
            all[3].1 &= comm.is_zero();

            // T₁₂† T₁₂ |a,b⟩_S = 2|a,b⟩_S + |a-1,b+1⟩_S + |a+1,b-1⟩_S.
            let sym = SymWannierState::basis(m, a, b)?;
            let mut want = SymWannierState {
                m,
                terms: BTreeMap::new(),
            };
            want.add_term(canon(m, a, b), 2);
            want.add_term(canon(m, a - 1, b + 1), 1);
            want.add_term(canon(m, a + 1, b - 1), 1);
            all[4].1 &= apply_t12_dagger(&apply_t12(&sym)) == want;

            // The equivalence: ι T₁₂ = R ι and ι T₁₂† = R† ι.
            all[5].1 &= apply_t12(&sym).to_fock() == apply_r(&f)
                && apply_t12_dagger(&sym).to_fock() == apply_r_dagger(&f);
        }
    }
    // Distinguishable pairs run over ordered bases.
    for a in 0..m {
        for b in 0..m {
            let d = DistState::basis(m, a, b)?;
            let mut want = DistState {
                m,
                terms: BTreeMap::new(),
            };
            want.add_term((a, b), 2);
            want.add_term(((a - 1).rem_euclid(m), (b + 1).rem_euclid(m)), 1);
            want.add_term(((a + 1).rem_euclid(m), (b - 1).rem_euclid(m)), 1);
            let prod = apply_a12(&apply_a12_dagger(&d));
            let comm = prod.sub(&apply_a12_dagger(&apply_a12(&d)));
            all[6].1 &= prod == want && comm.is_zero();
        }
    }
    Ok(all
        .into_iter()
        .map(|(name, pass)| IdentityCheck {
            name: name.to_string(),
            lattice: m,
            pass,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_action_examples() {
        let m = 16;
        let f = FockState::vacuum_pair(m, 5, 9).unwrap();
        let r = apply_r(&f);
        assert_eq!(r.terms().len(), 2);
        assert_eq!(r.terms()[&(4, 9)], 1);
        assert_eq!(r.terms()[&(5, 8)], 1);

        // Coincident sites double.
        let f = FockState::vacuum_pair(m, 7, 7).unwrap();
        let r = apply_r(&f);
        assert_eq!(r.terms().len(), 1);
        assert_eq!(r.terms()[&(6, 7)], 2);

        // RR† on separated sites.
        let f = FockState::vacuum_pair(m, 5, 9).unwrap();
        let rr = apply_r(&apply_r_dagger(&f));
        assert_eq!(rr.terms()[&(5, 9)], 2);
        assert_eq!(rr.terms()[&(4, 10)], 1);
        assert_eq!(rr.terms()[&(6, 8)], 1);
    }

    #[test]
    fn identity_lab_both_lattices() {
        for m in [8, 16] {
            let checks = run_identity_lab(m).unwrap();
            for c in &checks {
                assert!(c.pass, "identity '{}' failed on M = {m}", c.name);
            }
        }
    }

    #[test]
    fn wrap_around_is_exact() {
        let m = 8;
        let f = FockState::vacuum_pair(m, 0, 7).unwrap();
        let r = apply_r(&f);
        // 0 - 1 wraps to 7; (7, 7) and (6, 0) canonicalized.
        assert_eq!(r.terms()[&(7, 7)], 1);
        assert_eq!(r.terms()[&(0, 6)], 1);
    }
}
