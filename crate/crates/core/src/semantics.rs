//! The three evaluators: Tarskian satisfaction for first-order formulas
//! with Mostowski quantifiers, team satisfaction for IF*/DF formulas with
//! generalized and team quantifiers, and the bounded variant ⊨ᵇ; plus
//! meaning sets, flatness and conservativity checks.

use std::collections::{BTreeSet, HashMap};

use crate::model::{
    all_subsets, enumerate_functions_raw, mask_full, Assignment, Elem, Structure,
    SubsetMask, SuppFn, Team,
};
use crate::quantifiers::Registry;
use crate::syntax::{Formula, QuantKind, Term, VarSet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExistsMode {
    /// F ranges over ℘(M)∖{∅}.
    Lax,
    /// F ranges over singletons.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundedUniformity {
    /// F and F′ range over V-uniform functions (matches the B̂ lift).
    Uniform,
    /// F′ ranges over all functions ≥ F (the literal unslashed clause).
    Raw,
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub mode: ExistsMode,
    pub bounded_uniformity: BoundedUniformity,
    pub memo: bool,
    /// Cap on the number of ∼_W classes in a disjunction split (3^classes
    /// labelings are enumerated).
    pub split_class_guard: usize,
    /// Caps for meaning-set enumeration: number of ∼_V classes and domain
    /// size (|℘(M)|^classes candidates).
    pub meaning_class_guard: usize,
    pub meaning_domain_guard: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            mode: ExistsMode::Lax,
            bounded_uniformity: BoundedUniformity::Uniform,
            memo: true,
            split_class_guard: 10,
            meaning_class_guard: 6,
            meaning_domain_guard: 4,
        }
    }
}

fn term_value(m: &Structure, s: &Assignment, t: &Term) -> Result<Elem> {
    match t {
        Term::Var(v) => s
            .get(v)
            .ok_or_else(|| Error::Eval(format!("variable `{v}` unbound"))),
        Term::Const(c) => m
            .constant(c)
            .ok_or_else(|| Error::Eval(format!("constant `{c}` not interpreted"))),
    }
}

fn atom_holds(m: &Structure, s: &Assignment, f: &Formula) -> Result<bool> {
    match f {
        Formula::Atom { rel, args, negated } => {
            let (arity, table) = m
                .relation(rel)
                .ok_or_else(|| Error::Eval(format!("relation `{rel}` not interpreted")))?;
            if *arity != args.len() {
                return Err(Error::Eval(format!(
                    "relation `{rel}` has arity {arity}, got {} arguments",
                    args.len()
                )));
            }
            let tuple: Vec<Elem> = args
                .iter()
                .map(|t| term_value(m, s, t))
                .collect::<Result<_>>()?;
            Ok(table.contains(&tuple) != *negated)
        }
        Formula::Eq { left, right, negated } => {
            Ok((term_value(m, s, left)? == term_value(m, s, right)?) != *negated)
        }
        _ => Err(Error::Eval("not an atom".into())),
    }
}

/// Tarskian satisfaction for first-order formulas with Mostowski
/// quantifiers (all slash sets empty, no team quantifiers, no backslash).
pub fn eval_tarski(m: &Structure, s: &Assignment, f: &Formula, reg: &Registry) -> Result<bool> {
    let dom: BTreeSet<String> = s.vars().map(str::to_string).collect();
    if !f.free_variables().is_subset(&dom) {
        return Err(Error::Eval("assignment does not cover the free variables".into()));
    }
    tarski(m, s, f, reg)
}

fn tarski(m: &Structure, s: &Assignment, f: &Formula, reg: &Registry) -> Result<bool> {
    match f {
        Formula::Atom { .. } | Formula::Eq { .. } => atom_holds(m, s, f),
        Formula::And { left, right, slash } | Formula::Or { left, right, slash } => {
            if !slash.is_empty() {
                return Err(Error::Eval("slashed connective in Tarskian evaluation".into()));
            }
            let (a, b) = (tarski(m, s, left, reg)?, tarski(m, s, right, reg)?);
            Ok(if matches!(f, Formula::And { .. }) { a && b } else { a || b })
        }
        Formula::Quant { kind, var, slash, backslash, body } => {
            if !slash.is_empty() || *backslash {
                return Err(Error::Eval("slashed quantifier in Tarskian evaluation".into()));
            }
            match kind {
                QuantKind::Exists => {
                    for a in 0..m.size() {
                        if tarski(m, &s.extend(var, a), body, reg)? {
                            return Ok(true);
                        }
                    }
                    Ok(false)
                }
                QuantKind::Forall => {
                    for a in 0..m.size() {
                        if !tarski(m, &s.extend(var, a), body, reg)? {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
                QuantKind::Mostowski(name) => {
                    // {a | M, s(a/v) ⊨ ψ} ∈ Q^M
                    let q = reg.mostowski(name)?;
                    let mut mask: SubsetMask = 0;
                    for a in 0..m.size() {
                        if tarski(m, &s.extend(var, a), body, reg)? {
                            mask |= 1 << a;
                        }
                    }
                    q.contains(m, mask)
                }
                QuantKind::Team(_) => {
                    Err(Error::Eval("team quantifier in Tarskian evaluation".into()))
                }
            }
        }
    }
}

struct Evaluator<'a> {
    m: &'a Structure,
    reg: &'a Registry,
    cfg: &'a EvalConfig,
    bounded: bool,
    memo: HashMap<(usize, Team), bool>,
}

impl<'a> Evaluator<'a> {
    fn new(m: &'a Structure, reg: &'a Registry, cfg: &'a EvalConfig, bounded: bool) -> Self {
        Evaluator { m, reg, cfg, bounded, memo: HashMap::new() }
    }

    fn eval(&mut self, x: &Team, f: &Formula) -> Result<bool> {
        let key = (f as *const Formula as usize, x.clone());
        if self.cfg.memo {
            if let Some(&v) = self.memo.get(&key) {
                return Ok(v);
            }
        }
        let v = self.eval_uncached(x, f)?;
        if self.cfg.memo {
            self.memo.insert(key, v);
        }
        Ok(v)
    }

    fn eval_uncached(&mut self, x: &Team, f: &Formula) -> Result<bool> {
        match f {
            Formula::Atom { .. } | Formula::Eq { .. } => {
                for s in x.assignments() {
                    if !atom_holds(self.m, &s, f)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            // ∧_{/W} is evaluated exactly like ∧; W matters only to FV
            Formula::And { left, right, .. } => {
                Ok(self.eval(x, left)? && self.eval(x, right)?)
            }
            Formula::Or { left, right, slash } => self.or_split(x, left, right, slash),
            Formula::Quant { kind, var, slash, backslash, body } => {
                let v_eff: VarSet = if *backslash {
                    x.var_set().difference(slash).cloned().collect()
                } else {
                    slash.clone()
                };
                match kind {
                    QuantKind::Exists => {
                        let cands: Vec<SubsetMask> = match self.cfg.mode {
                            ExistsMode::Lax => all_subsets(self.m.size()).skip(1).collect(),
                            ExistsMode::Strict => {
                                (0..self.m.size()).map(|i| 1 << i).collect()
                            }
                        };
                        self.exists_function(x, &v_eff, &cands, var, body)
                    }
                    // the universal clause ignores the slash set
                    QuantKind::Forall => {
                        let dup = x.duplicate(self.m, var);
                        self.eval(&dup, body)
                    }
                    QuantKind::Mostowski(name) => {
                        let q = self.reg.mostowski(name)?;
                        let cands = q.localize(self.m)?;
                        if self.bounded {
                            self.bounded_quant(x, &v_eff, &q, var, body)
                        } else {
                            self.exists_function(x, &v_eff, &cands, var, body)
                        }
                    }
                    QuantKind::Team(name) => {
                        if self.bounded {
                            return Err(Error::Eval(
                                "team quantifiers are not defined under bounded semantics".into(),
                            ));
                        }
                        let tq = self.reg.team(name)?;
                        let fam = self.meaning_set(x, body, var, &v_eff)?;
                        tq.accepts(self.m, x, &fam)
                    }
                }
            }
        }
    }

    fn exists_function(
        &mut self,
        x: &Team,
        v: &VarSet,
        cands: &[SubsetMask],
        var: &str,
        body: &Formula,
    ) -> Result<bool> {
        let classes = x.uniform_classes(v).len();
        let rows = x.len();
        // pre-compute candidate functions class-wise (same scheme as
        // enumerate_uniform_functions, inlined to allow early exit)
        if rows == 0 {
            let sup = x.supplement(&SuppFn::empty(), var)?;
            return self.eval(&sup, body);
        }
        if cands.is_empty() {
            return Ok(false);
        }
        let class_list = x.uniform_classes(v);
        for per_class in enumerate_functions_raw(classes, cands) {
            let mut values = vec![0; rows];
            for (c, &mask) in class_list.iter().zip(per_class.iter()) {
                for &i in c {
                    values[i] = mask;
                }
            }
            let sup = x.supplement(&SuppFn { values }, var)?;
            if self.eval(&sup, body)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// ⊨ᵇ clause for a Mostowski node: some V-uniform F with values in Q^M
    /// such that (1) X[F/x] ⊨ᵇ ψ and (2) every F′ ≥ F (V-uniform or raw,
    /// per configuration) with X[F′/x] ⊨ᵇ ψ has all values in Q^M.
    fn bounded_quant(
        &mut self,
        x: &Team,
        v: &VarSet,
        q: &crate::quantifiers::MostowskiQuantifier,
        var: &str,
        body: &Formula,
    ) -> Result<bool> {
        let local: BTreeSet<SubsetMask> = q.localize(self.m)?.into_iter().collect();
        let cands: Vec<SubsetMask> = local.iter().copied().collect();
        if x.is_empty() {
            // the empty function: condition (2) quantifies over F′ on no rows
            let sup = x.supplement(&SuppFn::empty(), var)?;
            return self.eval(&sup, body);
        }
        if cands.is_empty() {
            return Ok(false);
        }
        let classes = x.uniform_classes(v);
        'outer: for per_class in enumerate_functions_raw(classes.len(), &cands) {
            let f = spread(&classes, &per_class, x.len());
            let sup = x.supplement(&f, var)?;
            if !self.eval(&sup, body)? {
                continue;
            }
            // enumerate F′ ≥ F
            let primes: Vec<SuppFn> = match self.cfg.bounded_uniformity {
                BoundedUniformity::Uniform => {
                    let per_class_supersets: Vec<Vec<SubsetMask>> = per_class
                        .iter()
                        .map(|&m0| supersets(m0, self.m.size()))
                        .collect();
                    product_functions(&per_class_supersets)
                        .into_iter()
                        .map(|pc| spread(&classes, &pc, x.len()))
                        .collect()
                }
                BoundedUniformity::Raw => {
                    let per_row_supersets: Vec<Vec<SubsetMask>> = f
                        .values
                        .iter()
                        .map(|&m0| supersets(m0, self.m.size()))
                        .collect();
                    product_functions(&per_row_supersets)
                        .into_iter()
                        .map(|values| SuppFn { values })
                        .collect()
                }
            };
            for fp in primes {
                let supp = x.supplement(&fp, var)?;
                if self.eval(&supp, body)? && !fp.values.iter().all(|mv| local.contains(mv)) {
                    continue 'outer;
                }
            }
            return Ok(true);
        }
        Ok(false)
    }

    /// [ψ]^{v,V}_{M,X}: the V-uniform F : X → ℘(M) with X[F/v] ⊨ ψ.
    fn meaning_set(&mut self, x: &Team, body: &Formula, var: &str, v: &VarSet) -> Result<Vec<SuppFn>> {
        let classes = x.uniform_classes(v);
        if classes.len() > self.cfg.meaning_class_guard
            || self.m.size() > self.cfg.meaning_domain_guard
        {
            return Err(Error::Guard(format!(
                "meaning set with {} classes over domain size {} exceeds guards ({}, {})",
                classes.len(),
                self.m.size(),
                self.cfg.meaning_class_guard,
                self.cfg.meaning_domain_guard
            )));
        }
        let cands: Vec<SubsetMask> = all_subsets(self.m.size()).collect();
        let mut out = Vec::new();
        if x.is_empty() {
            let sup = x.supplement(&SuppFn::empty(), var)?;
            if self.eval(&sup, body)? {
                out.push(SuppFn::empty());
            }
            return Ok(out);
        }
        for per_class in enumerate_functions_raw(classes.len(), &cands) {
            let f = spread(&classes, &per_class, x.len());
            let sup = x.supplement(&f, var)?;
            if self.eval(&sup, body)? {
                out.push(f);
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn or_split(&mut self, x: &Team, left: &Formula, right: &Formula, w: &VarSet) -> Result<bool> {
        if x.is_empty() {
            return Ok(self.eval(x, left)? && self.eval(x, right)?);
        }
        let classes = x.uniform_classes(w);
        if classes.len() > self.cfg.split_class_guard {
            return Err(Error::Guard(format!(
                "disjunction split over {} classes exceeds guard {}",
                classes.len(),
                self.cfg.split_class_guard
            )));
        }
        let k = classes.len();
        let total = 3usize.pow(k as u32);
        // each ∼_W class goes left, right, or both; Y ∪ Z = X
        'labels: for mut code in 0..total {
            let mut yidx: BTreeSet<usize> = BTreeSet::new();
            let mut zidx: BTreeSet<usize> = BTreeSet::new();
            for class in &classes {
                match code % 3 {
                    0 => yidx.extend(class.iter().copied()),
                    1 => zidx.extend(class.iter().copied()),
                    _ => {
                        yidx.extend(class.iter().copied());
                        zidx.extend(class.iter().copied());
                    }
                }
                code /= 3;
            }
            let y = x.subteam(&yidx);
            let z = x.subteam(&zidx);
            if !self.eval(&y, left)? {
                continue 'labels;
            }
            if self.eval(&z, right)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn spread(classes: &[Vec<usize>], per_class: &[SubsetMask], rows: usize) -> SuppFn {
    let mut values = vec![0; rows];
    for (c, &mask) in classes.iter().zip(per_class.iter()) {
        for &i in c {
            values[i] = mask;
        }
    }
    SuppFn { values }
}

/// All supersets of `mask` within an `n`-element domain.
fn supersets(mask: SubsetMask, n: usize) -> Vec<SubsetMask> {
    let free = mask_full(n) & !mask;
    let mut out = Vec::new();
    // iterate subsets of the complement
    let mut sub: SubsetMask = 0;
    loop {
        out.push(mask | sub);
        if sub == free {
            break;
        }
        sub = (sub.wrapping_sub(free)) & free;
    }
    out
}

/// Cartesian product of per-position candidate lists.
fn product_functions(choices: &[Vec<SubsetMask>]) -> Vec<Vec<SubsetMask>> {
    let mut out: Vec<Vec<SubsetMask>> = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(out.len() * c.len());
        for partial in &out {
            for &v in c {
                let mut p = partial.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn check_suitable(x: &Team, f: &Formula) -> Result<()> {
    if f.free_variables().is_subset(&x.var_set()) {
        Ok(())
    } else {
        Err(Error::Eval(format!(
            "team domain {:?} does not cover the free variables {:?}",
            x.vars(),
            f.free_variables()
        )))
    }
}

/// M,X ⊨ φ.
pub fn eval_team(
    m: &Structure,
    x: &Team,
    f: &Formula,
    reg: &Registry,
    cfg: &EvalConfig,
) -> Result<bool> {
    check_suitable(x, f)?;
    Evaluator::new(m, reg, cfg, false).eval(x, f)
}

/// M,X ⊨ᵇ φ (no team quantifiers).
pub fn eval_bounded(
    m: &Structure,
    x: &Team,
    f: &Formula,
    reg: &Registry,
    cfg: &EvalConfig,
) -> Result<bool> {
    check_suitable(x, f)?;
    Evaluator::new(m, reg, cfg, true).eval(x, f)
}

/// [ψ]^{v,V}_{M,X}: the set of V-uniform supplementing functions F with
/// M,X[F/v] ⊨ ψ, sorted canonically.
pub fn meaning_set(
    m: &Structure,
    x: &Team,
    body: &Formula,
    var: &str,
    v: &VarSet,
    reg: &Registry,
    cfg: &EvalConfig,
) -> Result<Vec<SuppFn>> {
    let mut fv = body.free_variables();
    fv.remove(var);
    fv.extend(v.iter().cloned());
    if !fv.is_subset(&x.var_set()) {
        return Err(Error::Eval("team does not cover the meaning-set free variables".into()));
    }
    Evaluator::new(m, reg, cfg, false).meaning_set(x, body, var, v)
}

/// |ψ|^v_M = { F(∅) | F ∈ [ψ]^{v,∅}_{M,{∅}} }: the subsets S ⊆ M with
/// M, {∅}[S/v] ⊨ ψ. Requires FV(ψ) ⊆ {v}.
pub fn sentence_initial_meaning(
    m: &Structure,
    body: &Formula,
    var: &str,
    reg: &Registry,
    cfg: &EvalConfig,
) -> Result<Vec<SubsetMask>> {
    let fv = body.free_variables();
    if !fv.iter().all(|x| x == var) {
        return Err(Error::Eval(format!(
            "sentence-initial meaning requires FV ⊆ {{{var}}}, got {fv:?}"
        )));
    }
    let unit = Team::unit();
    let fam = meaning_set(m, &unit, body, var, &VarSet::new(), reg, cfg)?;
    Ok(fam.into_iter().map(|f| f.values[0]).collect())
}

/// Flatness of φ over all structures of size ≤ `size_bound` (signature
/// read off φ) and all teams whose domain is FV(φ) plus up to
/// `extra_vars` fresh variables. Returns the first counterexample.
pub fn is_flat(
    f: &Formula,
    size_bound: usize,
    extra_vars: usize,
    reg: &Registry,
    cfg: &EvalConfig,
) -> Result<Option<(Structure, Team)>> {
    for (m, x) in crate::verify::eval_grid(f, size_bound, extra_vars)? {
        let whole = eval_team(&m, &x, f, reg, cfg)?;
        let mut rows = true;
        for i in 0..x.len() {
            let single = x.subteam(&[i].into());
            if !eval_team(&m, &single, f, reg, cfg)? {
                rows = false;
                break;
            }
        }
        if whole != rows {
            return Ok(Some((m, x)));
        }
    }
    Ok(None)
}

/// For monotone Q and flat ψ: M,X ⊨ (Qv)ψ ⟺ for all s ∈ X, M,s ⊨ (Qv)ψ
/// in the Mostowski sense. Returns the first counterexample.
pub fn check_conservativity(
    q_name: &str,
    body: &Formula,
    var: &str,
    size_bound: usize,
    reg: &Registry,
    cfg: &EvalConfig,
) -> Result<Option<(Structure, Team)>> {
    let f = Formula::quant(QuantKind::Mostowski(q_name.to_string()), var, VarSet::new(), body.clone());
    for (m, x) in crate::verify::eval_grid(&f, size_bound, 0)? {
        let team_side = eval_team(&m, &x, &f, reg, cfg)?;
        let mut row_side = true;
        for s in x.assignments() {
            if !eval_tarski(&m, &s, &f, reg)? {
                row_side = false;
                break;
            }
        }
        if team_side != row_side {
            return Ok(Some((m, x)));
        }
    }
    Ok(None)
}

/// Check that every value of every member of a meaning set obeys V-uniformity
/// (diagnostic helper used by tests and the verifier).
pub fn meaning_set_is_uniform(x: &Team, fam: &[SuppFn], v: &VarSet) -> bool {
    fam.iter().all(|f| f.is_uniform(x, v))
}
