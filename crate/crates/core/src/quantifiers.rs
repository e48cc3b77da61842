//! Mostowski (local) quantifiers, team quantifiers, the lifts from the
//! former to the latter, and the structural/logicality property checks.
//!
//! A Mostowski quantifier is localized on a structure M to a family
//! Q^M ⊆ ℘(M). A team quantifier classifies families 𝔉 ⊆ ℘(M)^X of
//! supplementing functions; formulas denote such families via their
//! meaning sets, and `(TQ.q v/V) ψ` holds when the meaning set is accepted.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{
    all_subsets, enumerate_functions_raw, mask_card, mask_full, Structure, SubsetMask, SuppFn,
    Team,
};
use crate::{Error, Result};

/// Domain-size guard for localizing and checking Mostowski quantifiers.
pub const MOSTOWSKI_GUARD: usize = 6;
/// Guard on |℘(M)^X| for team-quantifier property checks.
pub const FAMILY_SPACE_GUARD: usize = 16;

// ---------------------------------------------------------------------------
// cardinality predicates (intensional Mostowski quantifiers)

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CardExpr {
    Num(i64),
    /// card(S) — the size of the candidate subset.
    CardS,
    /// card(M) — the size of the domain.
    CardM,
    Add(Box<CardExpr>, Box<CardExpr>),
    Sub(Box<CardExpr>, Box<CardExpr>),
    Mul(Box<CardExpr>, Box<CardExpr>),
}

impl CardExpr {
    fn eval(&self, card_s: i64, card_m: i64) -> i64 {
        match self {
            CardExpr::Num(n) => *n,
            CardExpr::CardS => card_s,
            CardExpr::CardM => card_m,
            CardExpr::Add(a, b) => a.eval(card_s, card_m) + b.eval(card_s, card_m),
            CardExpr::Sub(a, b) => a.eval(card_s, card_m) - b.eval(card_s, card_m),
            CardExpr::Mul(a, b) => a.eval(card_s, card_m) * b.eval(card_s, card_m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
}

impl CmpOp {
    fn test(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Le => a <= b,
            CmpOp::Ge => a >= b,
            CmpOp::Lt => a < b,
            CmpOp::Gt => a > b,
        }
    }
}

/// `lhs op rhs` over integer expressions in card(S) and card(M).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardPredicate {
    pub lhs: CardExpr,
    pub op: CmpOp,
    pub rhs: CardExpr,
}

impl CardPredicate {
    pub fn holds(&self, card_s: usize, card_m: usize) -> bool {
        self.op
            .test(self.lhs.eval(card_s as i64, card_m as i64), self.rhs.eval(card_s as i64, card_m as i64))
    }

    fn card_s_cmp(op: CmpOp, k: i64) -> CardPredicate {
        CardPredicate { lhs: CardExpr::CardS, op, rhs: CardExpr::Num(k) }
    }
}

// ---------------------------------------------------------------------------
// Mostowski quantifiers

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MostowskiDef {
    /// Isomorphism-closed type (1) quantifier: membership of S in Q^M is a
    /// predicate on (card(S), card(M)).
    Intensional(CardPredicate),
    /// Per-domain-size tables of accepted subsets, each subset given by
    /// element names resolved against the structure's domain.
    Extensional(BTreeMap<usize, Vec<BTreeSet<String>>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MostowskiQuantifier {
    pub name: String,
    pub def: MostowskiDef,
}

impl MostowskiQuantifier {
    pub fn intensional(name: &str, pred: CardPredicate) -> Self {
        MostowskiQuantifier { name: name.to_string(), def: MostowskiDef::Intensional(pred) }
    }

    /// ∃≥k
    pub fn atleast(k: usize) -> Self {
        Self::intensional(&format!("atleast{k}"), CardPredicate::card_s_cmp(CmpOp::Ge, k as i64))
    }

    /// ∃₌k
    pub fn exactly(k: usize) -> Self {
        Self::intensional(&format!("exactly{k}"), CardPredicate::card_s_cmp(CmpOp::Eq, k as i64))
    }

    /// ∃≤k
    pub fn atmost(k: usize) -> Self {
        Self::intensional(&format!("atmost{k}"), CardPredicate::card_s_cmp(CmpOp::Le, k as i64))
    }

    /// ∃ = "card(S) ≥ 1"
    pub fn exists() -> Self {
        Self::intensional("exists", CardPredicate::card_s_cmp(CmpOp::Ge, 1))
    }

    /// ∀ = "card(S) = card(M)"
    pub fn forall() -> Self {
        Self::intensional(
            "forall",
            CardPredicate { lhs: CardExpr::CardS, op: CmpOp::Eq, rhs: CardExpr::CardM },
        )
    }

    /// most: 2·card(S) ≥ card(M)
    pub fn most() -> Self {
        Self::intensional(
            "most",
            CardPredicate {
                lhs: CardExpr::Mul(Box::new(CardExpr::Num(2)), Box::new(CardExpr::CardS)),
                op: CmpOp::Ge,
                rhs: CardExpr::CardM,
            },
        )
    }

    /// Trivial quantifier: Q^M = ℘(M).
    pub fn trivial() -> Self {
        Self::intensional(
            "trivial",
            CardPredicate { lhs: CardExpr::Num(0), op: CmpOp::Eq, rhs: CardExpr::Num(0) },
        )
    }

    /// Whether a subset mask belongs to Q^M for this structure.
    pub fn contains(&self, m: &Structure, subset: SubsetMask) -> Result<bool> {
        match &self.def {
            MostowskiDef::Intensional(p) => Ok(p.holds(mask_card(subset), m.size())),
            MostowskiDef::Extensional(tables) => {
                let table = tables.get(&m.size()).ok_or_else(|| {
                    Error::Eval(format!(
                        "extensional quantifier `{}` has no table for domain size {}",
                        self.name,
                        m.size()
                    ))
                })?;
                for named in table {
                    let mut mask: SubsetMask = 0;
                    for el in named {
                        let i = m.elem_index(el).ok_or_else(|| {
                            Error::Eval(format!(
                                "extensional quantifier `{}` mentions unknown element `{el}`",
                                self.name
                            ))
                        })?;
                        mask |= 1 << i;
                    }
                    if mask == subset {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    /// Materialize the local quantifier Q^M as a sorted list of masks.
    pub fn localize(&self, m: &Structure) -> Result<Vec<SubsetMask>> {
        let mut out = Vec::new();
        for s in all_subsets(m.size()) {
            if self.contains(m, s)? {
                out.push(s);
            }
        }
        Ok(out)
    }

    fn localize_guarded(&self, m: &Structure) -> Result<Vec<SubsetMask>> {
        if m.size() > MOSTOWSKI_GUARD {
            return Err(Error::Guard(format!(
                "property check on domain size {} exceeds guard {MOSTOWSKI_GUARD}",
                m.size()
            )));
        }
        self.localize(m)
    }

    /// Monotone on M: A ∈ Q^M and A ⊆ B imply B ∈ Q^M.
    pub fn is_monotone_on(&self, m: &Structure) -> Result<bool> {
        let local: BTreeSet<SubsetMask> = self.localize_guarded(m)?.into_iter().collect();
        let full = mask_full(m.size());
        for &a in &local {
            for b in all_subsets(m.size()) {
                if a & b == a && b & full == b && !local.contains(&b) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Union-closed on M: every union of a nonempty subfamily of Q^M stays
    /// in Q^M. On finite families closure under pairwise unions suffices.
    pub fn is_union_closed_on(&self, m: &Structure) -> Result<bool> {
        let local: Vec<SubsetMask> = self.localize_guarded(m)?;
        let set: BTreeSet<SubsetMask> = local.iter().copied().collect();
        for &a in &local {
            for &b in &local {
                if !set.contains(&(a | b)) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Emptyset-free on M: ∅ ∉ Q^M.
    pub fn is_emptyset_free_on(&self, m: &Structure) -> Result<bool> {
        Ok(!self.localize_guarded(m)?.contains(&0))
    }
}

// ---------------------------------------------------------------------------
// team quantifiers

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TeamDef {
    /// Accepts when 𝔉 has a member with every value nonempty.
    HatExists,
    /// Accepts when 𝔉 has a member with every value the full domain.
    HatForall,
    /// ∃F ∈ 𝔉 with every value of size k.
    HatExactlyFn(usize),
    /// 𝔉 ≠ ∅ and every member has every value of size k.
    HatExactlyNm(usize),
    /// The bounded-style variant: lift_B applied to exactly(k).
    HatExactlyB(usize),
    /// card(𝔉) = k and every member is nonempty. With `values_nonempty`
    /// the nonemptiness is read as "all values nonempty" instead of
    /// "the graph is nonempty".
    HatCountFunctions { k: usize, values_nonempty: bool },
    /// card(𝔉 ∩ ℘¹(M)^X) ≥ card(M^X)/2 where ℘¹ keeps singleton values.
    MostFunctions,
    LiftE(MostowskiQuantifier),
    LiftB(MostowskiQuantifier),
    LiftBPrime(MostowskiQuantifier),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TeamQuantifier {
    pub name: String,
    pub def: TeamDef,
}

fn all_values_in(f: &SuppFn, local: &BTreeSet<SubsetMask>) -> bool {
    f.values.iter().all(|v| local.contains(v))
}

impl TeamQuantifier {
    pub fn new(name: &str, def: TeamDef) -> Self {
        TeamQuantifier { name: name.to_string(), def }
    }

    pub fn lift_e(q: MostowskiQuantifier) -> Self {
        TeamQuantifier { name: format!("liftE_{}", q.name), def: TeamDef::LiftE(q) }
    }

    pub fn lift_b(q: MostowskiQuantifier) -> Self {
        TeamQuantifier { name: format!("liftB_{}", q.name), def: TeamDef::LiftB(q) }
    }

    pub fn lift_b_prime(q: MostowskiQuantifier) -> Self {
        TeamQuantifier { name: format!("liftBprime_{}", q.name), def: TeamDef::LiftBPrime(q) }
    }

    /// Decide membership of the family 𝔉 in this quantifier on (M, X).
    /// `fam` members must all be functions on the rows of `team`.
    pub fn accepts(&self, m: &Structure, team: &Team, fam: &[SuppFn]) -> Result<bool> {
        let rows = team.len();
        if fam.iter().any(|f| f.values.len() != rows) {
            return Err(Error::Eval(format!(
                "family member arity mismatch for quantifier `{}`",
                self.name
            )));
        }
        match &self.def {
            TeamDef::HatExists => Ok(fam.iter().any(|f| f.values.iter().all(|&v| v != 0))),
            TeamDef::HatForall => {
                let full = mask_full(m.size());
                Ok(fam.iter().any(|f| f.values.iter().all(|&v| v == full)))
            }
            TeamDef::HatExactlyFn(k) => {
                Ok(fam.iter().any(|f| f.values.iter().all(|&v| mask_card(v) == *k)))
            }
            TeamDef::HatExactlyNm(k) => Ok(!fam.is_empty()
                && fam.iter().all(|f| f.values.iter().all(|&v| mask_card(v) == *k))),
            TeamDef::HatExactlyB(k) => {
                TeamQuantifier::lift_b(MostowskiQuantifier::exactly(*k)).accepts(m, team, fam)
            }
            TeamDef::HatCountFunctions { k, values_nonempty } => {
                let nonempty = |f: &SuppFn| {
                    if *values_nonempty {
                        f.values.iter().all(|&v| v != 0)
                    } else {
                        !f.is_empty_function()
                    }
                };
                Ok(fam.len() == *k && fam.iter().all(nonempty))
            }
            TeamDef::MostFunctions => {
                let singleton_valued = fam
                    .iter()
                    .filter(|f| f.values.iter().all(|&v| mask_card(v) == 1))
                    .count();
                // card(M^X) = |M|^rows; avoid the rational by doubling
                let space: u128 = (m.size() as u128).pow(rows as u32);
                Ok(2 * singleton_valued as u128 >= space)
            }
            TeamDef::LiftE(q) => {
                let local: BTreeSet<SubsetMask> = q.localize(m)?.into_iter().collect();
                Ok(fam.iter().any(|f| all_values_in(f, &local)))
            }
            TeamDef::LiftB(q) => {
                let local: BTreeSet<SubsetMask> = q.localize(m)?.into_iter().collect();
                Ok(fam.iter().any(|f| {
                    (0..rows).all(|i| {
                        local.contains(&f.values[i])
                            && fam
                                .iter()
                                .filter(|fp| fp.pointwise_geq(f))
                                .all(|fp| local.contains(&fp.values[i]))
                    })
                }))
            }
            TeamDef::LiftBPrime(q) => {
                let local: BTreeSet<SubsetMask> = q.localize(m)?.into_iter().collect();
                Ok(!fam.is_empty() && fam.iter().all(|f| all_values_in(f, &local)))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// logicality checks

/// All functions X → ℘(M), guarded by [`FAMILY_SPACE_GUARD`].
pub fn function_space(m: &Structure, team: &Team) -> Result<Vec<SuppFn>> {
    let candidates: Vec<SubsetMask> = all_subsets(m.size()).collect();
    let size = candidates.len().checked_pow(team.len() as u32);
    match size {
        Some(s) if s <= FAMILY_SPACE_GUARD => {}
        _ => {
            return Err(Error::Guard(format!(
                "function space 2^{}^{} exceeds guard {FAMILY_SPACE_GUARD}",
                m.size(),
                team.len()
            )))
        }
    }
    Ok(enumerate_functions_raw(team.len(), &candidates)
        .map(|values| SuppFn { values })
        .collect())
}

fn family_from_bits(space: &[SuppFn], bits: u32) -> Vec<SuppFn> {
    space
        .iter()
        .enumerate()
        .filter(|(i, _)| bits >> i & 1 == 1)
        .map(|(_, f)| f.clone())
        .collect()
}

/// Accept-vector over all families 𝔉 ⊆ ℘(M)^X, indexed by family bitmask.
fn accept_table(q: &TeamQuantifier, m: &Structure, team: &Team) -> Result<(Vec<SuppFn>, Vec<bool>)> {
    let space = function_space(m, team)?;
    let n = space.len();
    let mut table = Vec::with_capacity(1 << n);
    for bits in 0..(1u32 << n) {
        table.push(q.accepts(m, team, &family_from_bits(&space, bits))?);
    }
    Ok((space, table))
}

/// Team-theoretic monotonicity: 𝔉 ∈ Q̂^{M,X} and 𝔉 ⊆ 𝔉′ imply 𝔉′ ∈ Q̂^{M,X}.
pub fn team_monotone_on(q: &TeamQuantifier, m: &Structure, team: &Team) -> Result<bool> {
    let (space, table) = accept_table(q, m, team)?;
    let n = space.len();
    // upward closure in a finite powerset lattice is closure under adding
    // one element at a time
    for bits in 0..(1u32 << n) {
        if table[bits as usize] {
            for i in 0..n {
                if !table[(bits | 1 << i) as usize] {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Permutation invariance: for every permutation g of dom(M) fixing X
/// setwise, 𝔉 ∈ Q̂^{M,X} ⟺ g″(𝔉) ∈ Q̂^{M,X}.
pub fn permutation_invariant_on(q: &TeamQuantifier, m: &Structure, team: &Team) -> Result<bool> {
    let (space, table) = accept_table(q, m, team)?;
    let n = space.len();
    let index_of: BTreeMap<&SuppFn, usize> = space.iter().zip(0..).collect();
    for g in permutations(m.size()) {
        // g′(X): rows mapped pointwise; require g′(X) = X to stay on the
        // same (M, X) pair
        let mapped_rows: Option<Vec<usize>> = team
            .rows()
            .iter()
            .map(|r| {
                let img: Vec<usize> = r.iter().map(|&e| g[e]).collect();
                team.rows().iter().position(|r2| r2 == &img)
            })
            .collect();
        let Some(row_map) = mapped_rows else { continue };
        if {
            let mut seen: Vec<usize> = row_map.clone();
            seen.sort_unstable();
            seen.windows(2).any(|w| w[0] == w[1])
        } {
            continue;
        }
        // g″(F): value at row g′(s) is g[F(s)]
        let image = |f: &SuppFn| -> SuppFn {
            let mut values = vec![0 as SubsetMask; f.values.len()];
            for (i, &v) in f.values.iter().enumerate() {
                let mut img: SubsetMask = 0;
                for e in 0..m.size() {
                    if v >> e & 1 == 1 {
                        img |= 1 << g[e];
                    }
                }
                values[row_map[i]] = img;
            }
            SuppFn { values }
        };
        for bits in 0..(1u32 << n) {
            let mut img_bits: u32 = 0;
            for i in 0..n {
                if bits >> i & 1 == 1 {
                    img_bits |= 1 << index_of[&image(&space[i])];
                }
            }
            if table[bits as usize] != table[img_bits as usize] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Strict cardinality condition: membership of 𝔉 depends only on card(𝔉)
/// (with card of the complement, which on a fixed finite space follows).
pub fn cardinality_condition_on(q: &TeamQuantifier, m: &Structure, team: &Team) -> Result<bool> {
    let (space, table) = accept_table(q, m, team)?;
    let n = space.len();
    let mut by_count: BTreeMap<u32, bool> = BTreeMap::new();
    for bits in 0..(1u32 << n) {
        let c = bits.count_ones();
        match by_count.get(&c) {
            None => {
                by_count.insert(c, table[bits as usize]);
            }
            Some(&v) => {
                if v != table[bits as usize] {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Relaxed quality condition: the strict conditional restricted to
/// 𝔉′ ⊆ q(Q̂,M,X) where q(Q̂,M,X) = ⋃ Q̂^{M,X}.
pub fn quality_condition_on(q: &TeamQuantifier, m: &Structure, team: &Team) -> Result<bool> {
    let (space, table) = accept_table(q, m, team)?;
    let n = space.len();
    let mut quality: u32 = 0;
    for bits in 0..(1u32 << n) {
        if table[bits as usize] {
            quality |= bits;
        }
    }
    for f1 in 0..(1u32 << n) {
        if !table[f1 as usize] {
            continue;
        }
        for f2 in 0..(1u32 << n) {
            if f2.count_ones() == f1.count_ones() && f2 & quality == f2 && !table[f2 as usize] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for i in 0..n {
            let mut p = rest.clone();
            p.insert(i, n - 1);
            out.push(p);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// registry

/// Name resolution for `Q.name` / `TQ.name`: user-configured entries first,
/// then built-in patterns (`exactlyK`, `atleastK`, `atmostK`, `most`,
/// `trivial`, `exists`, `forall`; `hat_exists`, `hat_forall`,
/// `hat_exactly_fnK`, `hat_exactly_nmK`, `hat_exactly_bK`,
/// `hat_count_functionsK`, `most_functions`).
#[derive(Debug, Clone, Default)]
pub struct Registry {
    mostowski: BTreeMap<String, MostowskiQuantifier>,
    team: BTreeMap<String, TeamQuantifier>,
}

fn numeric_suffix(name: &str, prefix: &str) -> Option<usize> {
    name.strip_prefix(prefix)
        .filter(|s| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|s| s.parse().ok())
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    pub fn register_mostowski(&mut self, q: MostowskiQuantifier) -> Result<()> {
        check_name(&q.name)?;
        self.mostowski.insert(q.name.clone(), q);
        Ok(())
    }

    pub fn register_team(&mut self, q: TeamQuantifier) -> Result<()> {
        check_name(&q.name)?;
        self.team.insert(q.name.clone(), q);
        Ok(())
    }

    pub fn mostowski(&self, name: &str) -> Result<MostowskiQuantifier> {
        if let Some(q) = self.mostowski.get(name) {
            return Ok(q.clone());
        }
        let builtin = match name {
            "most" => Some(MostowskiQuantifier::most()),
            "trivial" => Some(MostowskiQuantifier::trivial()),
            "exists" => Some(MostowskiQuantifier::exists()),
            "forall" => Some(MostowskiQuantifier::forall()),
            _ => numeric_suffix(name, "exactly")
                .map(MostowskiQuantifier::exactly)
                .or_else(|| numeric_suffix(name, "atleast").map(MostowskiQuantifier::atleast))
                .or_else(|| numeric_suffix(name, "atmost").map(MostowskiQuantifier::atmost)),
        };
        let mut q = builtin
            .ok_or_else(|| Error::Config(format!("unknown Mostowski quantifier `Q.{name}`")))?;
        q.name = name.to_string();
        Ok(q)
    }

    pub fn team(&self, name: &str) -> Result<TeamQuantifier> {
        if let Some(q) = self.team.get(name) {
            return Ok(q.clone());
        }
        let def = match name {
            "hat_exists" => Some(TeamDef::HatExists),
            "hat_forall" => Some(TeamDef::HatForall),
            "most_functions" => Some(TeamDef::MostFunctions),
            _ => numeric_suffix(name, "hat_exactly_fn")
                .map(TeamDef::HatExactlyFn)
                .or_else(|| numeric_suffix(name, "hat_exactly_nm").map(TeamDef::HatExactlyNm))
                .or_else(|| numeric_suffix(name, "hat_exactly_b").map(TeamDef::HatExactlyB))
                .or_else(|| {
                    numeric_suffix(name, "hat_count_functions")
                        .map(|k| TeamDef::HatCountFunctions { k, values_nonempty: false })
                }),
        };
        let def =
            def.ok_or_else(|| Error::Config(format!("unknown team quantifier `TQ.{name}`")))?;
        Ok(TeamQuantifier::new(name, def))
    }

    pub fn mostowski_entries(&self) -> impl Iterator<Item = &MostowskiQuantifier> {
        self.mostowski.values()
    }

    pub fn team_entries(&self) -> impl Iterator<Item = &TeamQuantifier> {
        self.team.values()
    }
}

fn check_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_')
        && !name.as_bytes()[0].is_ascii_digit();
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("invalid quantifier name `{name}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::mask_elems;

    fn extensional(name: &str, size: usize, sets: &[&[&str]]) -> MostowskiQuantifier {
        let table = sets
            .iter()
            .map(|s| s.iter().map(|e| e.to_string()).collect::<BTreeSet<_>>())
            .collect();
        MostowskiQuantifier {
            name: name.into(),
            def: MostowskiDef::Extensional([(size, table)].into()),
        }
    }

    fn named(n: usize) -> Structure {
        let names: Vec<String> = ["a", "b", "c", "d", "e", "f"][..n]
            .iter()
            .map(|s| s.to_string())
            .collect();
        Structure::new(names, Default::default(), Default::default()).unwrap()
    }

    #[test]
    fn localize_builtins() {
        let m2 = named(2);
        assert_eq!(MostowskiQuantifier::forall().localize(&m2).unwrap(), vec![0b11]);
        assert_eq!(
            MostowskiQuantifier::exists().localize(&m2).unwrap(),
            vec![0b01, 0b10, 0b11]
        );
        let m4 = named(4);
        let loc = MostowskiQuantifier::exactly(3).localize(&m4).unwrap();
        assert_eq!(loc.len(), 4);
        assert!(loc.iter().all(|&s| mask_card(s) == 3));
        // trivial quantifier keeps the empty set
        assert_eq!(MostowskiQuantifier::trivial().localize(&m2).unwrap().len(), 4);
    }

    #[test]
    fn structural_properties() {
        let m3 = named(3);
        let e = MostowskiQuantifier::exists();
        assert!(e.is_monotone_on(&m3).unwrap());
        assert!(e.is_union_closed_on(&m3).unwrap());
        assert!(e.is_emptyset_free_on(&m3).unwrap());

        // singleton {A}, A ≠ M: union-closed but not monotone
        let q = extensional("qa", 3, &[&["a"]]);
        assert!(q.is_union_closed_on(&m3).unwrap());
        assert!(!q.is_monotone_on(&m3).unwrap());

        let e2 = MostowskiQuantifier::exactly(2);
        assert!(!e2.is_monotone_on(&m3).unwrap());
        // {a,b} ∪ {b,c} has 3 elements
        assert!(!e2.is_union_closed_on(&m3).unwrap());
        assert!(e2.is_emptyset_free_on(&m3).unwrap());
        assert!(!MostowskiQuantifier::atmost(2).is_emptyset_free_on(&m3).unwrap());

        // monotone ⇒ union-closed on every tested M
        for q in [
            MostowskiQuantifier::exists(),
            MostowskiQuantifier::forall(),
            MostowskiQuantifier::most(),
            MostowskiQuantifier::atleast(2),
            MostowskiQuantifier::exactly(2),
            MostowskiQuantifier::atmost(1),
            MostowskiQuantifier::trivial(),
        ] {
            for n in 1..=4 {
                let m = named(n);
                if q.is_monotone_on(&m).unwrap() {
                    assert!(q.is_union_closed_on(&m).unwrap(), "{} size {n}", q.name);
                }
            }
        }

        let m7 = Structure::with_size(7, Default::default(), Default::default()).unwrap();
        assert!(matches!(e.is_monotone_on(&m7), Err(Error::Guard(_))));
    }

    fn one_row_team() -> Team {
        Team::from_rows(vec!["v".into()], vec![vec![0]]).unwrap()
    }

    #[test]
    fn lift_e_cases() {
        let m = named(2);
        let x = one_row_team();
        let q = TeamQuantifier::lift_e(MostowskiQuantifier::forall());
        assert!(!q.accepts(&m, &x, &[]).unwrap());
        assert!(q.accepts(&m, &x, &[SuppFn::constant(1, 0b11)]).unwrap());

        let m4 = named(4);
        let q = TeamQuantifier::lift_e(MostowskiQuantifier::exactly(3));
        let fam: Vec<SuppFn> = all_subsets(4)
            .filter(|&s| mask_card(s) >= 3)
            .map(|s| SuppFn::constant(1, s))
            .collect();
        assert!(q.accepts(&m4, &x, &fam).unwrap());
        // no 3-element value anywhere → reject
        let fam = vec![SuppFn::constant(1, 0b1111)];
        assert!(!q.accepts(&m4, &x, &fam).unwrap());
    }

    #[test]
    fn lift_b_cases() {
        let m = named(2);
        let x = one_row_team();
        let q = TeamQuantifier::lift_b(MostowskiQuantifier::exactly(1));
        assert!(!q.accepts(&m, &x, &[]).unwrap());
        // {F_{a}, F_{ab}}: F_{ab} ≥ F_{a} stays in 𝔉 with a 2-element value
        let fam = vec![SuppFn::constant(1, 0b01), SuppFn::constant(1, 0b11)];
        assert!(!q.accepts(&m, &x, &fam).unwrap());
        // {F_{a}} alone is fine
        assert!(q.accepts(&m, &x, &fam[..1]).unwrap());

        // monotone Q: lift_B = lift_E on all families over this space
        for q in [MostowskiQuantifier::exists(), MostowskiQuantifier::atleast(1)] {
            let (qb, qe) = (TeamQuantifier::lift_b(q.clone()), TeamQuantifier::lift_e(q));
            let space = function_space(&m, &x).unwrap();
            for bits in 0..(1u32 << space.len()) {
                let fam = family_from_bits(&space, bits);
                assert_eq!(
                    qb.accepts(&m, &x, &fam).unwrap(),
                    qe.accepts(&m, &x, &fam).unwrap()
                );
            }
        }
    }

    #[test]
    fn lift_b_prime_cases() {
        let m = named(2);
        let x = one_row_team();
        let q = TeamQuantifier::lift_b_prime(MostowskiQuantifier::exactly(1));
        assert!(!q.accepts(&m, &x, &[]).unwrap());
        let good = vec![SuppFn::constant(1, 0b01), SuppFn::constant(1, 0b10)];
        assert!(q.accepts(&m, &x, &good).unwrap());
        let mixed = vec![SuppFn::constant(1, 0b01), SuppFn::constant(1, 0b11)];
        assert!(!q.accepts(&m, &x, &mixed).unwrap());
    }

    #[test]
    fn most_functions_cases() {
        let m = named(2);
        let x = one_row_team();
        let q = TeamQuantifier::new("most_functions", TeamDef::MostFunctions);
        // card(M^X) = 2, threshold 1
        let both = vec![SuppFn::constant(1, 0b01), SuppFn::constant(1, 0b10)];
        assert!(q.accepts(&m, &x, &both).unwrap());
        assert!(q.accepts(&m, &x, &both[..1]).unwrap());
        let none = vec![SuppFn::constant(1, 0b11)];
        assert!(!q.accepts(&m, &x, &none).unwrap());
        // X = ∅: card(M^∅) = 1; the empty function is singleton-valued
        // vacuously, so any family containing it is accepted
        let empty_team = Team::empty(vec!["v".into()]);
        assert!(q.accepts(&m, &empty_team, &[SuppFn::empty()]).unwrap());
        assert!(!q.accepts(&m, &empty_team, &[]).unwrap());
    }

    #[test]
    fn hat_count_functions_readings() {
        let m = named(2);
        let x = one_row_team();
        let graph = TeamQuantifier::new(
            "c2",
            TeamDef::HatCountFunctions { k: 2, values_nonempty: false },
        );
        let values = TeamQuantifier::new(
            "c2v",
            TeamDef::HatCountFunctions { k: 2, values_nonempty: true },
        );
        // a constant-∅ function has nonempty graph but an empty value
        let fam = vec![SuppFn::constant(1, 0), SuppFn::constant(1, 0b01)];
        assert!(graph.accepts(&m, &x, &fam).unwrap());
        assert!(!values.accepts(&m, &x, &fam).unwrap());
        assert!(!graph.accepts(&m, &x, &fam[..1]).unwrap());
    }

    #[test]
    fn team_monotonicity() {
        let m = named(2);
        let x = one_row_team();
        let hat_e = TeamQuantifier::new("hat_exists", TeamDef::HatExists);
        assert!(team_monotone_on(&hat_e, &m, &x).unwrap());
        let hat_a = TeamQuantifier::new("hat_forall", TeamDef::HatForall);
        assert!(team_monotone_on(&hat_a, &m, &x).unwrap());
        let nm = TeamQuantifier::new("nm1", TeamDef::HatExactlyNm(1));
        assert!(!team_monotone_on(&nm, &m, &x).unwrap());
        for q in [MostowskiQuantifier::exactly(1), MostowskiQuantifier::most()] {
            assert!(team_monotone_on(&TeamQuantifier::lift_e(q), &m, &x).unwrap());
        }
    }

    #[test]
    fn permutation_invariance() {
        let m = named(2);
        let x = one_row_team();
        for q in [
            TeamQuantifier::new("hat_exists", TeamDef::HatExists),
            TeamQuantifier::new("fn1", TeamDef::HatExactlyFn(1)),
            TeamQuantifier::new("c1", TeamDef::HatCountFunctions { k: 1, values_nonempty: false }),
            TeamQuantifier::new("mf", TeamDef::MostFunctions),
            TeamQuantifier::lift_e(MostowskiQuantifier::most()),
        ] {
            assert!(permutation_invariant_on(&q, &m, &x).unwrap(), "{}", q.name);
        }
        // Q^M = {{a}} lifted by Ê distinguishes a from b
        let q = TeamQuantifier::lift_e(extensional("qa", 2, &[&["a"]]));
        // team fixed by the swap: both rows present
        let x2 = Team::from_rows(vec!["v".into()], vec![vec![0], vec![1]]).unwrap();
        assert!(!permutation_invariant_on(&q, &m, &x2).unwrap());
    }

    #[test]
    fn cardinality_and_quality_conditions() {
        let m = named(2);
        let x = one_row_team();
        let cf = TeamQuantifier::new(
            "c2",
            TeamDef::HatCountFunctions { k: 2, values_nonempty: false },
        );
        assert!(cardinality_condition_on(&cf, &m, &x).unwrap());
        assert!(quality_condition_on(&cf, &m, &x).unwrap());

        // strict fails for a nontrivial Ê(Q): membership depends on which
        // functions are present, not how many
        let le = TeamQuantifier::lift_e(MostowskiQuantifier::exactly(1));
        assert!(!cardinality_condition_on(&le, &m, &x).unwrap());

        // strict ⇒ relaxed and strict ⇒ permutation invariance
        for q in [
            cf,
            TeamQuantifier::new("c1", TeamDef::HatCountFunctions { k: 1, values_nonempty: true }),
            le,
            TeamQuantifier::new("hat_exists", TeamDef::HatExists),
        ] {
            if cardinality_condition_on(&q, &m, &x).unwrap() {
                assert!(quality_condition_on(&q, &m, &x).unwrap(), "{}", q.name);
                assert!(permutation_invariant_on(&q, &m, &x).unwrap(), "{}", q.name);
            }
        }
    }

    #[test]
    fn family_space_guard() {
        let m = named(3);
        let x = Team::from_rows(vec!["v".into()], vec![vec![0], vec![1]]).unwrap();
        // (2^3)^2 = 64 > 16
        assert!(matches!(function_space(&m, &x), Err(Error::Guard(_))));
    }

    #[test]
    fn registry_resolution() {
        let reg = Registry::new();
        assert_eq!(
            reg.mostowski("exactly3").unwrap().def,
            MostowskiQuantifier::exactly(3).def
        );
        assert!(reg.mostowski("exactly").is_err());
        assert!(reg.mostowski("nonsense").is_err());
        assert!(matches!(reg.team("hat_exists").unwrap().def, TeamDef::HatExists));
        assert!(matches!(
            reg.team("hat_exactly_b2").unwrap().def,
            TeamDef::HatExactlyB(2)
        ));
        assert!(matches!(
            reg.team("hat_count_functions3").unwrap().def,
            TeamDef::HatCountFunctions { k: 3, values_nonempty: false }
        ));
        assert!(reg.team("bogus").is_err());

        let mut reg = Registry::new();
        reg.register_mostowski(MostowskiQuantifier::intensional(
            "most",
            CardPredicate::card_s_cmp(CmpOp::Ge, 5),
        ))
        .unwrap();
        // user entries shadow builtins
        assert_eq!(reg.mostowski("most").unwrap().def, CardPredicateDef(5));
        assert!(reg.register_mostowski(MostowskiQuantifier::exactly(0)).is_ok());
        assert!(reg
            .register_team(TeamQuantifier::new("bad name", TeamDef::HatExists))
            .is_err());
    }

    #[allow(non_snake_case)]
    fn CardPredicateDef(k: i64) -> MostowskiDef {
        MostowskiDef::Intensional(CardPredicate::card_s_cmp(CmpOp::Ge, k))
    }

    #[test]
    fn extensional_masks_resolve_by_name() {
        let m = named(2);
        let q = extensional("qab", 2, &[&["a"], &["a", "b"]]);
        assert_eq!(q.localize(&m).unwrap(), vec![0b01, 0b11]);
        assert_eq!(mask_elems(0b01).collect::<Vec<_>>(), vec![0]);
        // missing table size errors
        let m3 = named(3);
        assert!(q.localize(&m3).is_err());
        // unknown element name errors
        let q = extensional("qz", 2, &[&["z"]]);
        assert!(q.localize(&m).is_err());
    }
}
