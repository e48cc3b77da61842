//! Finite structures, assignments, teams and supplementing functions,
//! together with the team operations used by every semantical clause:
//! duplication, supplementation, V-equivalence and V-uniformity.

use std::collections::{BTreeMap, BTreeSet};

use crate::{Error, Result};

/// Index into a structure's ordered domain.
pub type Elem = usize;

/// A subset of a structure's domain as a bitmask over element indices.
/// Domains are guarded to at most 63 elements, far above what any of the
/// brute-force machinery ever enumerates.
pub type SubsetMask = u64;

pub fn mask_full(n: usize) -> SubsetMask {
    (1u64 << n) - 1
}

pub fn mask_card(m: SubsetMask) -> usize {
    m.count_ones() as usize
}

pub fn mask_elems(m: SubsetMask) -> impl Iterator<Item = Elem> {
    (0..64).filter(move |i| m & (1 << i) != 0)
}

/// All subsets of an `n`-element domain, in increasing mask order.
pub fn all_subsets(n: usize) -> impl Iterator<Item = SubsetMask> {
    0..=mask_full(n)
}

/// A finite relational structure: an ordered domain of named elements,
/// relation tables and constant interpretations. Function symbols are
/// excluded; terms are variables or constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    domain: Vec<String>,
    relations: BTreeMap<String, (usize, BTreeSet<Vec<Elem>>)>,
    constants: BTreeMap<String, Elem>,
}

impl Structure {
    pub fn new(
        domain: Vec<String>,
        relations: BTreeMap<String, (usize, BTreeSet<Vec<Elem>>)>,
        constants: BTreeMap<String, Elem>,
    ) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::Model("domain must be nonempty".into()));
        }
        if domain.len() > 63 {
            return Err(Error::Model("domain too large (max 63 elements)".into()));
        }
        let mut seen = BTreeSet::new();
        for e in &domain {
            if !seen.insert(e) {
                return Err(Error::Model(format!("duplicate domain element `{e}`")));
            }
        }
        for (name, (arity, tuples)) in &relations {
            for t in tuples {
                if t.len() != *arity {
                    return Err(Error::Model(format!(
                        "tuple of arity {} in relation `{name}/{arity}`",
                        t.len()
                    )));
                }
                if t.iter().any(|&e| e >= domain.len()) {
                    return Err(Error::Model(format!(
                        "tuple component outside domain in relation `{name}`"
                    )));
                }
            }
        }
        for (name, &e) in &constants {
            if e >= domain.len() {
                return Err(Error::Model(format!("constant `{name}` outside domain")));
            }
        }
        Ok(Structure { domain, relations, constants })
    }

    /// Structure over elements named `e0..e{n-1}` with the given relation
    /// tables; convenient for enumeration and tests.
    pub fn with_size(
        n: usize,
        relations: BTreeMap<String, (usize, BTreeSet<Vec<Elem>>)>,
        constants: BTreeMap<String, Elem>,
    ) -> Result<Self> {
        let domain = (0..n).map(|i| format!("e{i}")).collect();
        Structure::new(domain, relations, constants)
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn elem_index(&self, name: &str) -> Option<Elem> {
        self.domain.iter().position(|e| e == name)
    }

    pub fn elem_name(&self, e: Elem) -> &str {
        &self.domain[e]
    }

    pub fn relations(&self) -> &BTreeMap<String, (usize, BTreeSet<Vec<Elem>>)> {
        &self.relations
    }

    pub fn relation(&self, name: &str) -> Option<&(usize, BTreeSet<Vec<Elem>>)> {
        self.relations.get(name)
    }

    pub fn constant(&self, name: &str) -> Option<Elem> {
        self.constants.get(name).copied()
    }

    pub fn constants(&self) -> &BTreeMap<String, Elem> {
        &self.constants
    }
}

/// A finite mapping from variable names to domain elements.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Assignment {
    bindings: BTreeMap<String, Elem>,
}

impl Assignment {
    pub fn new(bindings: BTreeMap<String, Elem>) -> Self {
        Assignment { bindings }
    }

    pub fn empty() -> Self {
        Assignment::default()
    }

    pub fn get(&self, var: &str) -> Option<Elem> {
        self.bindings.get(var).copied()
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.bindings.keys().map(|s| s.as_str())
    }

    pub fn bindings(&self) -> &BTreeMap<String, Elem> {
        &self.bindings
    }

    /// `s(a/v)`: extend or overwrite the binding for `v`.
    pub fn extend(&self, var: &str, a: Elem) -> Self {
        let mut b = self.bindings.clone();
        b.insert(var.to_string(), a);
        Assignment { bindings: b }
    }

    /// `s↾V`.
    pub fn restrict(&self, vars: &BTreeSet<String>) -> Self {
        Assignment {
            bindings: self
                .bindings
                .iter()
                .filter(|(k, _)| vars.contains(*k))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    /// `s₋ᵥ`.
    pub fn drop(&self, var: &str) -> Self {
        let mut b = self.bindings.clone();
        b.remove(var);
        Assignment { bindings: b }
    }
}

/// `s ∼_V t`: the two assignments agree on every variable outside `V`.
/// Errors unless the domains coincide.
pub fn v_equivalent(s: &Assignment, t: &Assignment, v: &BTreeSet<String>) -> Result<bool> {
    if s.bindings.keys().ne(t.bindings.keys()) {
        return Err(Error::Model("V-equivalence requires equal assignment domains".into()));
    }
    Ok(s.bindings
        .iter()
        .all(|(x, a)| v.contains(x) || t.bindings[x] == *a))
}

/// A team: a set of assignments sharing a variable domain. Rows are kept
/// sorted and deduplicated so that team equality is structural equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Team {
    vars: Vec<String>,
    rows: Vec<Vec<Elem>>,
}

impl Team {
    /// The empty team over the given variable domain.
    pub fn empty(vars: Vec<String>) -> Self {
        let mut vars = vars;
        vars.sort();
        vars.dedup();
        Team { vars, rows: Vec::new() }
    }

    /// The singleton team containing the empty assignment (domain ∅).
    pub fn unit() -> Self {
        Team { vars: Vec::new(), rows: vec![Vec::new()] }
    }

    pub fn from_rows(vars: Vec<String>, mut rows: Vec<Vec<Elem>>) -> Result<Self> {
        let mut sorted = vars.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != vars.len() {
            return Err(Error::Model("team variables must be distinct".into()));
        }
        // reorder each row to the sorted variable order
        let perm: Vec<usize> = sorted
            .iter()
            .map(|v| vars.iter().position(|w| w == v).unwrap())
            .collect();
        for row in rows.iter_mut() {
            if row.len() != vars.len() {
                return Err(Error::Model("row length does not match team domain".into()));
            }
            *row = perm.iter().map(|&i| row[i]).collect();
        }
        rows.sort();
        rows.dedup();
        Ok(Team { vars: sorted, rows })
    }

    pub fn from_assignments(vars: &BTreeSet<String>, assignments: &[Assignment]) -> Result<Self> {
        let sorted: Vec<String> = vars.iter().cloned().collect();
        let mut rows = Vec::with_capacity(assignments.len());
        for s in assignments {
            if s.bindings.len() != sorted.len() || !s.vars().eq(sorted.iter().map(|v| v.as_str())) {
                return Err(Error::Model("assignment domain does not match team domain".into()));
            }
            rows.push(sorted.iter().map(|v| s.bindings[v]).collect());
        }
        rows.sort();
        rows.dedup();
        Ok(Team { vars: sorted, rows })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_set(&self) -> BTreeSet<String> {
        self.vars.iter().cloned().collect()
    }

    pub fn var_index(&self, var: &str) -> Option<usize> {
        self.vars.binary_search_by(|v| v.as_str().cmp(var)).ok()
    }

    pub fn rows(&self) -> &[Vec<Elem>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn assignment(&self, i: usize) -> Assignment {
        Assignment::new(
            self.vars
                .iter()
                .cloned()
                .zip(self.rows[i].iter().copied())
                .collect(),
        )
    }

    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        (0..self.rows.len()).map(|i| self.assignment(i))
    }

    /// `X↾U`. Errors unless `U ⊆ dom(X)`.
    pub fn restrict(&self, u: &BTreeSet<String>) -> Result<Team> {
        for v in u {
            if self.var_index(v).is_none() {
                return Err(Error::Model(format!("restriction variable `{v}` not in team domain")));
            }
        }
        let keep: Vec<usize> = self
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| u.contains(*v))
            .map(|(i, _)| i)
            .collect();
        let vars = keep.iter().map(|&i| self.vars[i].clone()).collect();
        let mut rows: Vec<Vec<Elem>> = self
            .rows
            .iter()
            .map(|r| keep.iter().map(|&i| r[i]).collect())
            .collect();
        rows.sort();
        rows.dedup();
        Ok(Team { vars, rows })
    }

    /// `X₋ᵥ`.
    pub fn drop(&self, var: &str) -> Team {
        let mut u = self.var_set();
        u.remove(var);
        self.restrict(&u).expect("subset of domain")
    }

    /// `X(v₁,…,vₙ)`: the associated n-ary relation.
    pub fn relation_of(&self, vars: &[String]) -> Result<BTreeSet<Vec<Elem>>> {
        let idx: Vec<usize> = vars
            .iter()
            .map(|v| {
                self.var_index(v)
                    .ok_or_else(|| Error::Model(format!("variable `{v}` not in team domain")))
            })
            .collect::<Result<_>>()?;
        Ok(self
            .rows
            .iter()
            .map(|r| idx.iter().map(|&i| r[i]).collect())
            .collect())
    }

    /// `X[z/x]`: rename variable `x` to `z`. Errors if `z` already occurs.
    pub fn rename(&self, x: &str, z: &str) -> Result<Team> {
        if self.var_index(x).is_none() {
            return Err(Error::Model(format!("variable `{x}` not in team domain")));
        }
        if self.var_index(z).is_some() {
            return Err(Error::Model(format!("variable `{z}` already in team domain")));
        }
        let vars: Vec<String> = self
            .vars
            .iter()
            .map(|v| if v == x { z.to_string() } else { v.clone() })
            .collect();
        Team::from_rows(vars, self.rows.clone())
    }

    /// Row indices partitioned into ∼_V equivalence classes; deterministic
    /// order (classes sorted by their smallest row).
    pub fn uniform_classes(&self, v: &BTreeSet<String>) -> Vec<Vec<usize>> {
        let outside: Vec<usize> = self
            .vars
            .iter()
            .enumerate()
            .filter(|(_, x)| !v.contains(*x))
            .map(|(i, _)| i)
            .collect();
        let mut classes: BTreeMap<Vec<Elem>, Vec<usize>> = BTreeMap::new();
        for (i, row) in self.rows.iter().enumerate() {
            let key: Vec<Elem> = outside.iter().map(|&j| row[j]).collect();
            classes.entry(key).or_default().push(i);
        }
        let mut out: Vec<Vec<usize>> = classes.into_values().collect();
        out.sort_by_key(|c| c[0]);
        out
    }

    /// Whether row set `Y` (by index into this team) is a W-uniform subset
    /// of this team, i.e. a union of ∼_W classes.
    pub fn uniform_subset(&self, y: &BTreeSet<usize>, w: &BTreeSet<String>) -> Result<bool> {
        if y.iter().any(|&i| i >= self.rows.len()) {
            return Err(Error::Model("row index outside team".into()));
        }
        for class in self.uniform_classes(w) {
            let hits = class.iter().filter(|i| y.contains(i)).count();
            if hits != 0 && hits != class.len() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Subteam from a set of row indices.
    pub fn subteam(&self, idx: &BTreeSet<usize>) -> Team {
        Team {
            vars: self.vars.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// `X[M/v]`: extend every row by every domain element; overwrites an
    /// existing binding for `v`.
    pub fn duplicate(&self, m: &Structure, v: &str) -> Team {
        let choices = mask_full(m.size());
        let f = SuppFn { values: vec![choices; self.rows.len()] };
        self.supplement_unchecked(&f, v)
    }

    /// `X[F/v]`. Errors unless `F` is total on the rows of `X`.
    pub fn supplement(&self, f: &SuppFn, v: &str) -> Result<Team> {
        if f.values.len() != self.rows.len() {
            return Err(Error::Model("supplementing function not total on team".into()));
        }
        Ok(self.supplement_unchecked(f, v))
    }

    fn supplement_unchecked(&self, f: &SuppFn, v: &str) -> Team {
        let (vars, vpos, overwrite) = match self.var_index(v) {
            Some(i) => (self.vars.clone(), i, true),
            None => {
                let mut vars = self.vars.clone();
                let pos = vars
                    .binary_search_by(|w| w.as_str().cmp(v))
                    .unwrap_err();
                vars.insert(pos, v.to_string());
                (vars, pos, false)
            }
        };
        let mut rows: Vec<Vec<Elem>> = Vec::new();
        for (row, &mask) in self.rows.iter().zip(f.values.iter()) {
            for a in mask_elems(mask) {
                let mut r = row.clone();
                if overwrite {
                    r[vpos] = a;
                } else {
                    r.insert(vpos, a);
                }
                rows.push(r);
            }
        }
        rows.sort();
        rows.dedup();
        Team { vars, rows }
    }

    /// All v-expansions of this team: teams `Xᵥ` with `dom(Xᵥ) = dom(X) ∪ {v}`
    /// and `Xᵥ↾dom(X) = X`. Requires `v ∉ dom(X)`.
    pub fn v_expansions(&self, v: &str, m: &Structure) -> Result<Vec<Team>> {
        if self.var_index(v).is_some() {
            return Err(Error::Model(format!("`{v}` already in team domain")));
        }
        let nonempty: Vec<SubsetMask> = all_subsets(m.size()).skip(1).collect();
        let total = nonempty.len().checked_pow(self.rows.len() as u32);
        match total {
            Some(t) if t <= 1 << 20 => {}
            _ => return Err(Error::Guard("too many v-expansions to enumerate".into())),
        }
        Ok(enumerate_functions_raw(self.rows.len(), &nonempty)
            .map(|values| self.supplement_unchecked(&SuppFn { values }, v))
            .collect())
    }
}

/// A supplementing function `F : X → ℘(M)` for a fixed team: one subset of
/// the domain per row, aligned with the team's canonical row order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SuppFn {
    pub values: Vec<SubsetMask>,
}

impl SuppFn {
    pub fn constant(rows: usize, mask: SubsetMask) -> Self {
        SuppFn { values: vec![mask; rows] }
    }

    /// The empty function: the unique function on the empty team.
    pub fn empty() -> Self {
        SuppFn { values: Vec::new() }
    }

    pub fn is_empty_function(&self) -> bool {
        self.values.is_empty()
    }

    /// `F′ ≥ F`: pointwise value inclusion.
    pub fn pointwise_geq(&self, other: &SuppFn) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(other.values.iter())
                .all(|(a, b)| a & b == *b)
    }

    /// Whether `F` is V-uniform on the given team (constant on ∼_V classes).
    pub fn is_uniform(&self, team: &Team, v: &BTreeSet<String>) -> bool {
        team.uniform_classes(v)
            .iter()
            .all(|class| class.iter().all(|&i| self.values[i] == self.values[class[0]]))
    }
}

/// All functions `rows → candidates` in mixed-radix order (last row varies
/// fastest), without any uniformity constraint.
pub fn enumerate_functions_raw(
    rows: usize,
    candidates: &[SubsetMask],
) -> impl Iterator<Item = Vec<SubsetMask>> + '_ {
    let total: usize = candidates.len().pow(rows as u32);
    (0..total).map(move |mut k| {
        let mut values = vec![0; rows];
        for i in (0..rows).rev() {
            values[i] = candidates[k % candidates.len()];
            k /= candidates.len();
        }
        values
    })
}

/// All V-uniform functions from the team into the candidate subsets, i.e.
/// `|candidates|^(#∼_V classes)` functions, each constant per class, in a
/// deterministic order. `X = ∅` yields exactly the empty function.
pub fn enumerate_uniform_functions<'a>(
    team: &'a Team,
    v: &BTreeSet<String>,
    candidates: &'a [SubsetMask],
) -> Box<dyn Iterator<Item = SuppFn> + 'a> {
    let classes = team.uniform_classes(v);
    if team.is_empty() {
        return Box::new(std::iter::once(SuppFn::empty()));
    }
    if candidates.is_empty() {
        return Box::new(std::iter::empty());
    }
    let rows = team.len();
    Box::new(
        enumerate_functions_raw(classes.len(), candidates).map(move |per_class| {
            let mut values = vec![0; rows];
            for (c, &mask) in classes.iter().zip(per_class.iter()) {
                for &i in c {
                    values[i] = mask;
                }
            }
            SuppFn { values }
        }),
    )
}
