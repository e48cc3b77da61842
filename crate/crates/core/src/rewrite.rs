//! Rewrite calculus: renaming of bound variables, strong regularization,
//! quantifier extraction (weak and strong), slash elimination, quantifier
//! swapping, prenex normal form and the primality reduction.
//!
//! Every rule produces a [`RewriteStep`] carrying the claimed equivalence
//! modulus Z: the two formulas agree on all teams whose domain avoids Z.
//! Rules are applied at a tree path inside a host formula; a step is only
//! accepted when Z is disjoint from the free variables of both sides, as
//! the definition of Z-equivalence demands.

use std::collections::{BTreeSet, VecDeque};

use crate::model::Structure;
use crate::quantifiers::MostowskiQuantifier;
use crate::syntax::{Formula, QuantKind, VarSet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: String,
    pub path: Vec<usize>,
    pub result: Formula,
    pub z: VarSet,
}

fn make_step(
    rule: &str,
    host: &Formula,
    path: &[usize],
    replacement: Formula,
    z: VarSet,
) -> Result<RewriteStep> {
    let result = host.replace_at(path, replacement)?;
    let mut fv = host.free_variables();
    fv.extend(result.free_variables());
    if !fv.is_disjoint(&z) {
        return Err(Error::Rewrite(format!(
            "rule `{rule}`: modulus {z:?} intersects the free variables"
        )));
    }
    Ok(RewriteStep { rule: rule.to_string(), path: path.to_vec(), result, z })
}

fn quant_parts(f: &Formula) -> Option<(&QuantKind, &str, &VarSet, bool, &Formula)> {
    match f {
        Formula::Quant { kind, var, slash, backslash, body } => {
            Some((kind, var, slash, *backslash, body))
        }
        _ => None,
    }
}

/// Whether a Mostowski kind can be certified emptyset-free on all domain
/// sizes up to 6 (∃ and ∀ always qualify; team quantifiers never do).
fn emptyset_free_kind(kind: &QuantKind, reg: &crate::quantifiers::Registry) -> bool {
    match kind {
        QuantKind::Exists | QuantKind::Forall => true,
        QuantKind::Mostowski(name) => match reg.mostowski(name) {
            Ok(q) => mostowski_emptyset_free_upto(&q, 6),
            Err(_) => false,
        },
        QuantKind::Team(_) => false,
    }
}

fn mostowski_emptyset_free_upto(q: &MostowskiQuantifier, max: usize) -> bool {
    for n in 1..=max {
        let m = Structure::with_size(n, Default::default(), Default::default()).unwrap();
        match q.contains(&m, 0) {
            Ok(true) => return false,
            Ok(false) => {}
            // extensional quantifier with no table for this size constrains
            // nothing here
            Err(_) => {}
        }
    }
    true
}

/// Extraction through a (possibly slashed) disjunction:
/// (Qv/V)ψ ∨_{/W} χ  ≡_v  (Qv/V)(ψ ∨_{/Wv} χ_{/v})
/// requiring v to occur in neither χ, V nor W. Applies symmetrically when
/// the quantifier is the right disjunct.
pub fn weak_extract(host: &Formula, path: &[usize]) -> Result<RewriteStep> {
    extract_through(host, path, false, "weak_extract")
}

/// The conjunction dual of weak extraction, sound for emptyset-free
/// quantifiers (oracle-verified; not stated in the source calculus):
/// (Qv/V)ψ ∧_{/W} χ  ≡_v  (Qv/V)(ψ ∧_{/Wv} χ_{/v}).
pub fn and_extract(host: &Formula, path: &[usize]) -> Result<RewriteStep> {
    extract_through(host, path, true, "and_extract")
}

fn extract_through(
    host: &Formula,
    path: &[usize],
    conj: bool,
    rule: &str,
) -> Result<RewriteStep> {
    let node = host.at(path)?;
    let (left, right, w) = match (node, conj) {
        (Formula::And { left, right, slash }, true) => (left, right, slash),
        (Formula::Or { left, right, slash }, false) => (left, right, slash),
        _ => return Err(Error::Rewrite(format!("rule `{rule}`: wrong connective"))),
    };
    // prefer the left disjunct; fall back to the right one (the connectives
    // are symmetric under team semantics)
    let (q, chi) = if quant_parts(left).is_some() {
        (left.as_ref(), right.as_ref())
    } else if quant_parts(right).is_some() {
        (right.as_ref(), left.as_ref())
    } else {
        return Err(Error::Rewrite(format!("rule `{rule}`: no quantified operand")));
    };
    let (kind, v, slash, backslash, body) = quant_parts(q).unwrap();
    if backslash {
        return Err(Error::Rewrite(format!("rule `{rule}`: backslashed quantifier")));
    }
    if chi.all_variables().contains(v) || slash.contains(v) || w.contains(v) {
        return Err(Error::Rewrite(format!(
            "rule `{rule}`: variable `{v}` occurs in the other operand or a slash set"
        )));
    }
    if conj {
        let reg = crate::quantifiers::Registry::new();
        if !emptyset_free_kind(kind, &reg) {
            return Err(Error::Rewrite(format!(
                "rule `{rule}`: quantifier not certified emptyset-free"
            )));
        }
    }
    let vset: VarSet = [v.to_string()].into();
    let mut inner_w = w.clone();
    inner_w.insert(v.to_string());
    let chi_slashed = chi.slash_all(&vset);
    let (new_left, new_right) = if quant_parts(left).is_some() {
        (body.clone(), chi_slashed)
    } else {
        (chi_slashed, body.clone())
    };
    let inner = if conj {
        Formula::And { left: Box::new(new_left), right: Box::new(new_right), slash: inner_w }
    } else {
        Formula::Or { left: Box::new(new_left), right: Box::new(new_right), slash: inner_w }
    };
    let replacement = Formula::Quant {
        kind: kind.clone(),
        var: v.to_string(),
        slash: slash.clone(),
        backslash: false,
        body: Box::new(inner),
    };
    make_step(rule, host, path, replacement, vset)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenameVariant {
    /// (Qx/V)ψ ≡_{xz} (Qz/V)ψ[z/x]; needs x not bound in ψ and x ∉ V.
    Plain,
    /// (Qx/V)ψ ≡_z (Qz/V)(ψ[z/x]_{/{x}}); needs x not bound in ψ.
    Shielded,
}

/// Rename the bound variable of the quantifier at `path` to the fresh
/// variable `z` (which must not occur anywhere in the host formula).
pub fn rename_bound(
    host: &Formula,
    path: &[usize],
    z: &str,
    variant: RenameVariant,
) -> Result<RewriteStep> {
    let node = host.at(path)?;
    let Some((kind, x, slash, backslash, body)) = quant_parts(node) else {
        return Err(Error::Rewrite("rule `rename_bound`: not a quantifier".into()));
    };
    if host.all_variables().contains(z) {
        return Err(Error::Rewrite(format!("rule `rename_bound`: `{z}` occurs in the formula")));
    }
    if body.bound_variables().contains(x) {
        return Err(Error::Rewrite(format!(
            "rule `rename_bound`: `{x}` occurs bound in the body"
        )));
    }
    let (new_body, z_set, rule) = match variant {
        RenameVariant::Plain => {
            if slash.contains(x) {
                return Err(Error::Rewrite(format!(
                    "rule `rename_bound`: `{x}` occurs in its own slash set"
                )));
            }
            (
                body.substitute(x, z)?,
                [x.to_string(), z.to_string()].into(),
                "rename_bound_a",
            )
        }
        RenameVariant::Shielded => (
            body.substitute(x, z)?.slash_all(&[x.to_string()].into()),
            [z.to_string()].into(),
            "rename_bound_b",
        ),
    };
    let replacement = Formula::Quant {
        kind: kind.clone(),
        var: z.to_string(),
        slash: slash.clone(),
        backslash,
        body: Box::new(new_body),
    };
    make_step(rule, host, path, replacement, z_set)
}

fn fully_slashed_in(f: &Formula, v: &str) -> bool {
    // f = χ_{/v} for some χ without v: v appears in every slash set and
    // nowhere outside slash sets
    fn slashes_contain(f: &Formula, v: &str) -> bool {
        match f {
            Formula::Atom { .. } | Formula::Eq { .. } => true,
            Formula::And { left, right, slash } | Formula::Or { left, right, slash } => {
                slash.contains(v) && slashes_contain(left, v) && slashes_contain(right, v)
            }
            Formula::Quant { slash, body, .. } => slash.contains(v) && slashes_contain(body, v),
        }
    }
    let vset: VarSet = [v.to_string()].into();
    slashes_contain(f, v) && !f.unslash_all(&vset).all_variables().contains(v)
}

/// Slash elimination below an intermediate quantifier:
/// (Rv/V)(ψ ∨_{/v} χ_{/v})  ≡_v  (Rv/V)(ψ ∨ χ_{/v}), v ∉ V.
pub fn slash_elim_r(host: &Formula, path: &[usize]) -> Result<RewriteStep> {
    let node = host.at(path)?;
    let Some((kind, v, slash, backslash, body)) = quant_parts(node) else {
        return Err(Error::Rewrite("rule `slash_elim_R`: not a quantifier".into()));
    };
    if !matches!(kind, QuantKind::Mostowski(_)) || backslash || slash.contains(v) {
        return Err(Error::Rewrite("rule `slash_elim_R`: needs (Rv/V) with v ∉ V".into()));
    }
    let Formula::Or { left, right, slash: w } = body else {
        return Err(Error::Rewrite("rule `slash_elim_R`: body is not a disjunction".into()));
    };
    let vset: VarSet = [v.to_string()].into();
    if w != &vset || !fully_slashed_in(right, v) {
        return Err(Error::Rewrite(
            "rule `slash_elim_R`: needs ψ ∨_{/v} χ_{/v} with the displayed shape".into(),
        ));
    }
    let inner = Formula::Or { left: left.clone(), right: right.clone(), slash: VarSet::new() };
    let replacement = Formula::Quant {
        kind: kind.clone(),
        var: v.to_string(),
        slash: slash.clone(),
        backslash: false,
        body: Box::new(inner),
    };
    make_step("slash_elim_R", host, path, replacement, vset)
}

/// Slash elimination below ∃ or ∀: remove the quantified variable from the
/// slash set of a disjunction directly beneath it, provided the right
/// disjunct has the shape χ_{/v} (fully slashed on v). For (∃v/V) this
/// additionally needs the residual slash W ⊆ V and v ∉ V; for (∀v/V) any
/// W is allowed.
pub fn slash_elim_quantifier(host: &Formula, path: &[usize]) -> Result<RewriteStep> {
    let node = host.at(path)?;
    let Some((kind, v, slash, backslash, body)) = quant_parts(node) else {
        return Err(Error::Rewrite("rule `slash_elim_Q`: not a quantifier".into()));
    };
    if backslash {
        return Err(Error::Rewrite("rule `slash_elim_Q`: backslashed quantifier".into()));
    }
    let Formula::Or { left, right, slash: w } = body else {
        return Err(Error::Rewrite("rule `slash_elim_Q`: body is not a disjunction".into()));
    };
    if !w.contains(v) {
        return Err(Error::Rewrite(
            "rule `slash_elim_Q`: quantified variable not in the disjunction slash".into(),
        ));
    }
    if !fully_slashed_in(right, v) {
        return Err(Error::Rewrite(
            "rule `slash_elim_Q`: right disjunct must be fully slashed on the quantified \
             variable"
                .into(),
        ));
    }
    let mut residual = w.clone();
    residual.remove(v);
    let rule = match kind {
        QuantKind::Exists => {
            if !residual.is_subset(slash) || slash.contains(v) {
                return Err(Error::Rewrite(
                    "rule `slash_elim_exists`: needs W ⊆ V and v ∉ V".into(),
                ));
            }
            "slash_elim_exists"
        }
        QuantKind::Forall => "slash_elim_forall",
        _ => {
            return Err(Error::Rewrite(
                "rule `slash_elim_Q`: only ∃ and ∀ here (use slash_elim_R)".into(),
            ))
        }
    };
    let inner = Formula::Or { left: left.clone(), right: right.clone(), slash: residual };
    let replacement = Formula::Quant {
        kind: kind.clone(),
        var: v.to_string(),
        slash: slash.clone(),
        backslash: false,
        body: Box::new(inner),
    };
    make_step(rule, host, path, replacement, [v.to_string()].into())
}

/// ψ_{/v} ≡ ψ|_v for v not occurring in ψ: rewrite the node at `path`
/// from the `_{/v}` form (v in every slash set) to the `|_v` form (v only
/// in the slash sets that stay nonempty without it). Z = ∅.
pub fn verticalize(host: &Formula, path: &[usize], v: &str) -> Result<RewriteStep> {
    let node = host.at(path)?;
    if !fully_slashed_in(node, v) {
        return Err(Error::Rewrite(format!(
            "rule `verticalize`: node is not of the form ψ_{{/{v}}}"
        )));
    }
    let vset: VarSet = [v.to_string()].into();
    let replacement = node.unslash_all(&vset).slash_nonempty(&vset);
    make_step("verticalize", host, path, replacement, VarSet::new())
}

/// Strong extraction: (Qv/V)ψ ∨ χ  ≡_v  (Qv/V)(ψ ∨ χ|_v), for v occurring
/// in neither χ nor V, with a plain (unslashed) disjunction.
pub fn strong_extract(host: &Formula, path: &[usize]) -> Result<RewriteStep> {
    let node = host.at(path)?;
    let Formula::Or { left, right, slash: w } = node else {
        return Err(Error::Rewrite("rule `strong_extract`: not a disjunction".into()));
    };
    if !w.is_empty() {
        return Err(Error::Rewrite("rule `strong_extract`: disjunction must be unslashed".into()));
    }
    let (q, chi, q_left) = if quant_parts(left).is_some() {
        (left.as_ref(), right.as_ref(), true)
    } else if quant_parts(right).is_some() {
        (right.as_ref(), left.as_ref(), false)
    } else {
        return Err(Error::Rewrite("rule `strong_extract`: no quantified operand".into()));
    };
    let (kind, v, slash, backslash, body) = quant_parts(q).unwrap();
    if backslash || chi.all_variables().contains(v) || slash.contains(v) {
        return Err(Error::Rewrite(format!(
            "rule `strong_extract`: `{v}` occurs in the other operand or the slash set"
        )));
    }
    let vset: VarSet = [v.to_string()].into();
    let chi_v = chi.slash_nonempty(&vset);
    let (new_left, new_right) = if q_left {
        (body.clone(), chi_v)
    } else {
        (chi_v, body.clone())
    };
    let inner = Formula::Or { left: Box::new(new_left), right: Box::new(new_right), slash: VarSet::new() };
    let replacement = Formula::Quant {
        kind: kind.clone(),
        var: v.to_string(),
        slash: slash.clone(),
        backslash: false,
        body: Box::new(inner),
    };
    make_step("strong_extract", host, path, replacement, vset)
}

/// Swap two adjacent independent quantifiers:
/// (Q₁u/U)(Q₂v/Vu)ψ  ≡_{uv}  (Q₂v/V)(Q₁u/Uv)ψ.
/// Both quantifiers must be certified emptyset-free; never offered under
/// bounded semantics, where the equivalence fails.
pub fn swap_quantifiers(
    host: &Formula,
    path: &[usize],
    bounded: bool,
    reg: &crate::quantifiers::Registry,
) -> Result<RewriteStep> {
    if bounded {
        return Err(Error::Rewrite(
            "rule `swap_quantifiers`: not sound under bounded semantics".into(),
        ));
    }
    let node = host.at(path)?;
    let Some((k1, u, us, b1, body1)) = quant_parts(node) else {
        return Err(Error::Rewrite("rule `swap_quantifiers`: not a quantifier".into()));
    };
    let Some((k2, v, vs, b2, body2)) = quant_parts(body1) else {
        return Err(Error::Rewrite("rule `swap_quantifiers`: no nested quantifier".into()));
    };
    if b1 || b2 {
        return Err(Error::Rewrite("rule `swap_quantifiers`: backslashed quantifier".into()));
    }
    if u == v || !vs.contains(u) || us.contains(v) {
        return Err(Error::Rewrite(
            "rule `swap_quantifiers`: needs distinct u,v with u in the inner slash set".into(),
        ));
    }
    if !emptyset_free_kind(k1, reg) || !emptyset_free_kind(k2, reg) {
        return Err(Error::Rewrite(
            "rule `swap_quantifiers`: quantifier not certified emptyset-free".into(),
        ));
    }
    let mut inner_slash = us.clone();
    inner_slash.insert(v.to_string());
    let mut outer_slash = vs.clone();
    outer_slash.remove(u);
    let replacement = Formula::Quant {
        kind: k2.clone(),
        var: v.to_string(),
        slash: outer_slash,
        backslash: false,
        body: Box::new(Formula::Quant {
            kind: k1.clone(),
            var: u.to_string(),
            slash: inner_slash,
            backslash: false,
            body: body2.clone().into(),
        }),
    };
    make_step(
        "swap_quantifiers",
        host,
        path,
        replacement,
        [u.to_string(), v.to_string()].into(),
    )
}

fn binder_kinds_above<'f>(host: &'f Formula, path: &[usize]) -> Result<Vec<(&'f str, &'f QuantKind)>> {
    let mut out = Vec::new();
    let mut node = host;
    for &i in path {
        if let Formula::Quant { kind, var, .. } = node {
            out.push((var.as_str(), kind));
        }
        node = node.at(&[i])?;
    }
    Ok(out)
}

/// Empty a slash set all of whose variables are existentially quantified
/// strictly above the node. Z = ∅.
pub fn drop_existential_slashes(host: &Formula, path: &[usize]) -> Result<RewriteStep> {
    let binders = binder_kinds_above(host, path)?;
    let node = host.at(path)?;
    let slash = match node {
        Formula::Quant { slash, backslash: false, .. } => slash,
        Formula::And { slash, .. } | Formula::Or { slash, .. } => slash,
        _ => return Err(Error::Rewrite("rule `drop_existential_slashes`: no slash set".into())),
    };
    if slash.is_empty() {
        return Err(Error::Rewrite("rule `drop_existential_slashes`: slash set empty".into()));
    }
    for w in slash {
        let bound_exists = binders
            .iter()
            .any(|(x, k)| *x == w && matches!(k, QuantKind::Exists));
        if !bound_exists {
            return Err(Error::Rewrite(format!(
                "rule `drop_existential_slashes`: `{w}` is not existentially bound above"
            )));
        }
    }
    let replacement = clear_slash(node);
    make_step("drop_existential_slashes", host, path, replacement, VarSet::new())
}

/// Empty the slash set of a universal quantifier or of a conjunction, both
/// of which the semantics ignores. Z = ∅.
pub fn drop_universal_slashes(host: &Formula, path: &[usize]) -> Result<RewriteStep> {
    let node = host.at(path)?;
    match node {
        Formula::Quant { kind: QuantKind::Forall, slash, backslash: false, .. }
        | Formula::And { slash, .. }
            if !slash.is_empty() => {}
        _ => {
            return Err(Error::Rewrite(
                "rule `drop_universal_slashes`: needs a slashed ∀ or ∧".into(),
            ))
        }
    }
    let replacement = clear_slash(node);
    make_step("drop_universal_slashes", host, path, replacement, VarSet::new())
}

fn clear_slash(node: &Formula) -> Formula {
    match node {
        Formula::Quant { kind, var, backslash, body, .. } => Formula::Quant {
            kind: kind.clone(),
            var: var.clone(),
            slash: VarSet::new(),
            backslash: *backslash,
            body: body.clone(),
        },
        Formula::And { left, right, .. } => {
            Formula::And { left: left.clone(), right: right.clone(), slash: VarSet::new() }
        }
        Formula::Or { left, right, .. } => {
            Formula::Or { left: left.clone(), right: right.clone(), slash: VarSet::new() }
        }
        other => other.clone(),
    }
}

/// Supply of fresh variables `v1, v2, …` avoiding everything in `used`.
pub struct FreshVars {
    used: VarSet,
    next: usize,
}

impl FreshVars {
    pub fn new(f: &Formula) -> Self {
        FreshVars { used: f.all_variables(), next: 1 }
    }

    pub fn take(&mut self) -> String {
        loop {
            let v = format!("v{}", self.next);
            self.next += 1;
            if !self.used.contains(&v) {
                self.used.insert(v.clone());
                return v;
            }
        }
    }
}

fn quant_paths(f: &Formula) -> Vec<Vec<usize>> {
    // depth-first, innermost quantifiers last
    fn walk(f: &Formula, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        match f {
            Formula::Atom { .. } | Formula::Eq { .. } => {}
            Formula::And { left, right, .. } | Formula::Or { left, right, .. } => {
                path.push(0);
                walk(left, path, out);
                path.pop();
                path.push(1);
                walk(right, path, out);
                path.pop();
            }
            Formula::Quant { body, .. } => {
                out.push(path.clone());
                path.push(0);
                walk(body, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(f, &mut Vec::new(), &mut out);
    out
}

/// Rename every bound variable to a fresh one (innermost first, shielded
/// renaming), producing a strongly regular formula whose bound variables
/// are disjoint from the input's. Returns the result, the accumulated
/// modulus Z (all fresh variables), and the step trace.
pub fn strong_regularize(f: &Formula) -> Result<(Formula, VarSet, Vec<RewriteStep>)> {
    let mut fresh = FreshVars::new(f);
    let mut current = f.clone();
    let mut z = VarSet::new();
    let mut steps = Vec::new();
    loop {
        // innermost quantifier still binding a non-fresh variable
        let paths = quant_paths(&current);
        let target = paths.into_iter().rev().find(|p| {
            match current.at(p) {
                Ok(Formula::Quant { var, .. }) => !z.contains(var),
                _ => false,
            }
        });
        let Some(path) = target else { break };
        let zvar = fresh.take();
        let step = rename_bound(&current, &path, &zvar, RenameVariant::Shielded)?;
        current = step.result.clone();
        z.insert(zvar);
        steps.push(step);
    }
    debug_assert!(current.is_strongly_regular());
    Ok((current, z, steps))
}

/// Prenex normal form: strong regularization followed by exhaustive
/// extraction through connectives. The result is strongly regular and
/// prenex, and ∅-equivalent to the input whenever Z consists of fresh
/// variables only (always the case here). Backslashed quantifiers and
/// team quantifiers are not covered by the extraction rules and are
/// rejected; a conjunction over a non-emptyset-free quantifier is rejected
/// as well.
pub fn prenexify(f: &Formula) -> Result<(Formula, VarSet, Vec<RewriteStep>)> {
    fn has_backslash_or_team(f: &Formula) -> bool {
        match f {
            Formula::Atom { .. } | Formula::Eq { .. } => false,
            Formula::And { left, right, .. } | Formula::Or { left, right, .. } => {
                has_backslash_or_team(left) || has_backslash_or_team(right)
            }
            Formula::Quant { kind, backslash, body, .. } => {
                *backslash || matches!(kind, QuantKind::Team(_)) || has_backslash_or_team(body)
            }
        }
    }
    if has_backslash_or_team(f) {
        return Err(Error::Rewrite(
            "prenex rules cover slashed ∃/∀ and Mostowski quantifiers only".into(),
        ));
    }
    let (mut current, mut z, mut steps) = strong_regularize(f)?;
    loop {
        if current.is_prenex() {
            break;
        }
        // leftmost-outermost connective with a directly quantified operand
        let Some(path) = find_extractable(&current, &mut Vec::new()) else {
            return Err(Error::Rewrite(
                "prenexification stuck: no extraction rule applies".into(),
            ));
        };
        let step = match current.at(&path)? {
            Formula::Or { .. } => weak_extract(&current, &path)?,
            Formula::And { .. } => and_extract(&current, &path)?,
            _ => unreachable!(),
        };
        current = step.result.clone();
        z.extend(step.z.iter().cloned());
        steps.push(step);
    }
    debug_assert!(current.is_prenex() && current.is_strongly_regular());
    Ok((current, z, steps))
}

fn find_extractable(f: &Formula, path: &mut Vec<usize>) -> Option<Vec<usize>> {
    match f {
        Formula::Atom { .. } | Formula::Eq { .. } => None,
        Formula::And { left, right, .. } | Formula::Or { left, right, .. } => {
            if quant_parts(left).is_some() || quant_parts(right).is_some() {
                return Some(path.clone());
            }
            path.push(0);
            if let Some(p) = find_extractable(left, path) {
                path.pop();
                return Some(p);
            }
            path.pop();
            path.push(1);
            let r = find_extractable(right, path);
            path.pop();
            r
        }
        Formula::Quant { body, .. } => {
            path.push(0);
            let r = find_extractable(body, path);
            path.pop();
            r
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimalityOutcome {
    /// A sequence of the three rules emptied every slash set.
    Reduced { result: Formula, steps: Vec<RewriteStep> },
    /// No rule sequence within the depth cap reaches a slash-free form.
    Stuck { formula: Formula },
}

fn all_paths(f: &Formula) -> Vec<Vec<usize>> {
    fn walk(f: &Formula, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(path.clone());
        match f {
            Formula::Atom { .. } | Formula::Eq { .. } => {}
            Formula::And { left, right, .. } | Formula::Or { left, right, .. } => {
                path.push(0);
                walk(left, path, out);
                path.pop();
                path.push(1);
                walk(right, path, out);
                path.pop();
            }
            Formula::Quant { body, .. } => {
                path.push(0);
                walk(body, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(f, &mut Vec::new(), &mut out);
    out
}

/// Primality reduction for a regular prenex sentence: breadth-first search
/// over quantifier swaps, existential slash removal and universal slash
/// removal. `Reduced` iff some rule sequence empties every slash set.
pub fn primality_reduce(
    f: &Formula,
    reg: &crate::quantifiers::Registry,
    depth_cap: usize,
) -> Result<PrimalityOutcome> {
    if !f.is_regular() || !f.is_prenex() {
        return Err(Error::Rewrite("primality reduction needs a regular prenex formula".into()));
    }
    if !f.free_variables().is_empty() {
        return Err(Error::Rewrite("primality reduction needs a sentence".into()));
    }
    let mut visited: BTreeSet<Formula> = [f.clone()].into();
    let mut queue: VecDeque<(Formula, Vec<RewriteStep>)> = [(f.clone(), Vec::new())].into();
    while let Some((current, trace)) = queue.pop_front() {
        if current.is_slash_free() {
            return Ok(PrimalityOutcome::Reduced { result: current, steps: trace });
        }
        if trace.len() >= depth_cap {
            continue;
        }
        let mut successors: Vec<RewriteStep> = Vec::new();
        for path in all_paths(&current) {
            if let Ok(step) = swap_quantifiers(&current, &path, false, reg) {
                successors.push(step);
            }
            if let Ok(step) = drop_existential_slashes(&current, &path) {
                successors.push(step);
            }
            if let Ok(step) = drop_universal_slashes(&current, &path) {
                successors.push(step);
            }
        }
        for step in successors {
            if visited.insert(step.result.clone()) {
                let mut t = trace.clone();
                let next = step.result.clone();
                t.push(step);
                queue.push_back((next, t));
            }
        }
    }
    Ok(PrimalityOutcome::Stuck { formula: f.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::quantifiers::Registry;

    #[test]
    fn weak_extract_schema() {
        let f = parse("((E x) P(x) | Q(y))").unwrap();
        let step = weak_extract(&f, &[]).unwrap();
        assert_eq!(step.result, parse("(E x) (P(x) | /{x} Q(y))").unwrap());
        assert_eq!(step.z, crate::syntax::varset(&["x"]));

        let f = parse("((Q.exactly3 x) P(x) | Q(y))").unwrap();
        let step = weak_extract(&f, &[]).unwrap();
        assert_eq!(step.result, parse("(Q.exactly3 x) (P(x) | /{x} Q(y))").unwrap());

        // χ slash sets gain v too
        let f = parse("((E x) P(x) | (Q(y) | /{y} P(y)))").unwrap();
        let step = weak_extract(&f, &[]).unwrap();
        assert_eq!(
            step.result,
            parse("(E x) (P(x) | /{x} (Q(y) | /{x,y} P(y)))").unwrap()
        );

        // v occurring in χ blocks the rule
        let f = parse("((E x) P(x) | Q(x))").unwrap();
        assert!(weak_extract(&f, &[]).is_err());
        // right-hand quantifier works symmetrically
        let f = parse("(Q(y) | (E x) P(x))").unwrap();
        let step = weak_extract(&f, &[]).unwrap();
        assert_eq!(step.result, parse("(E x) (Q(y) | /{x} P(x))").unwrap());
    }

    #[test]
    fn and_extract_schema() {
        let f = parse("((E x) P(x) & Q(y))").unwrap();
        let step = and_extract(&f, &[]).unwrap();
        assert_eq!(step.result, parse("(E x) (P(x) & /{x} Q(y))").unwrap());
        // non-emptyset-free quantifier is rejected
        let f = parse("((Q.atmost2 x) P(x) & Q(y))").unwrap();
        assert!(and_extract(&f, &[]).is_err());
        let f = parse("((Q.exactly3 x) P(x) & Q(y))").unwrap();
        assert!(and_extract(&f, &[]).is_ok());
    }

    #[test]
    fn rename_variants() {
        let f = parse("(E x) R(x,y)").unwrap();
        let a = rename_bound(&f, &[], "z", RenameVariant::Plain).unwrap();
        assert_eq!(a.result, parse("(E z) R(z,y)").unwrap());
        assert_eq!(a.z, crate::syntax::varset(&["x", "z"]));

        let b = rename_bound(&f, &[], "z", RenameVariant::Shielded).unwrap();
        assert_eq!(b.result, parse("(E z) R(z,y)").unwrap()); // no slash sets to shield
        assert_eq!(b.z, crate::syntax::varset(&["z"]));

        let f = parse("(Q.most x)(E u/{y}) R(x,u)").unwrap();
        let b = rename_bound(&f, &[], "z", RenameVariant::Shielded).unwrap();
        assert_eq!(b.result, parse("(Q.most z)(E u/{x,y}) R(z,u)").unwrap());

        // z occurring in the formula is rejected
        assert!(rename_bound(&f, &[], "y", RenameVariant::Plain).is_err());
        // variant (a) needs the modulus {x,z} free-variable-disjoint: x free
        // elsewhere in the host blocks it
        let host = parse("(P(x) & (E x) Q(x))").unwrap();
        assert!(rename_bound(&host, &[1], "z", RenameVariant::Plain).is_err());
        assert!(rename_bound(&host, &[1], "z", RenameVariant::Shielded).is_ok());
    }

    #[test]
    fn slash_elimination_rules() {
        // (Rv/∅)(ψ ∨_{/v} χ_{/v}) drops the disjunction slash
        let f = parse("(Q.exactly3 v) (P(u) | /{v} (Q(w) | /{v} P(w)))").unwrap();
        let step = slash_elim_r(&f, &[]).unwrap();
        assert_eq!(
            step.result,
            parse("(Q.exactly3 v) (P(u) | (Q(w) | /{v} P(w)))").unwrap()
        );
        // wrong shape: right disjunct not fully slashed
        let f = parse("(Q.exactly3 v) (P(u) | /{v} Q(v))").unwrap();
        assert!(slash_elim_r(&f, &[]).is_err());

        // ∃ version: W ⊆ V
        let f = parse("(E v/{y}) (P(u) | /{v,y} Q(w))").unwrap();
        let step = slash_elim_quantifier(&f, &[]).unwrap();
        assert_eq!(step.result, parse("(E v/{y}) (P(u) | /{y} Q(w))").unwrap());
        let f = parse("(E v) (P(u) | /{v,y} Q(w))").unwrap();
        assert!(slash_elim_quantifier(&f, &[]).is_err()); // y ∉ V

        // ∀ version: any residual W
        let f = parse("(A v) (P(u) | /{v,y} Q(w))").unwrap();
        let step = slash_elim_quantifier(&f, &[]).unwrap();
        assert_eq!(step.result, parse("(A v) (P(u) | /{y} Q(w))").unwrap());

        // right disjunct must be fully slashed on v
        let f = parse("(A v) (P(u) | /{v,y} (Q(w) | /{y} P(w)))").unwrap();
        assert!(slash_elim_quantifier(&f, &[]).is_err());
        let f = parse("(A v) (P(u) | /{v,y} (Q(w) | /{v,y} P(w)))").unwrap();
        assert!(slash_elim_quantifier(&f, &[]).is_ok());
    }

    #[test]
    fn verticalize_schema() {
        // ((E u/{v,x}) P(u) | /{v} Q(w)) = ψ_{/v} with ψ = ((E u/{x})P(u) | Q(w))
        let f = parse("((E u/{v,x}) P(u) | /{v} Q(w))").unwrap();
        let step = verticalize(&f, &[], "v").unwrap();
        // |_v keeps v only in the slash sets nonempty without it
        assert_eq!(step.result, parse("((E u/{v,x}) P(u) | Q(w))").unwrap());
        assert!(step.z.is_empty());
        // not fully slashed → inapplicable
        let f = parse("((E u/{x}) P(u) | /{v} Q(w))").unwrap();
        assert!(verticalize(&f, &[], "v").is_err());
    }

    #[test]
    fn strong_extract_schema() {
        // classical first-order extraction: χ|_v = χ
        let f = parse("((E x) P(x) | Q(y))").unwrap();
        let step = strong_extract(&f, &[]).unwrap();
        assert_eq!(step.result, parse("(E x) (P(x) | Q(y))").unwrap());

        // the nonempty slash set of χ gains v
        let f = parse("((Q.most x) P(x) | ((E u/{y}) R(u,y) | Q(y)))").unwrap();
        let step = strong_extract(&f, &[]).unwrap();
        assert_eq!(
            step.result,
            parse("(Q.most x) (P(x) | ((E u/{x,y}) R(u,y) | Q(y)))").unwrap()
        );

        // slashed disjunction is not the strong-extraction shape
        let f = parse("((E x) P(x) | /{y} Q(y))").unwrap();
        assert!(strong_extract(&f, &[]).is_err());
    }

    #[test]
    fn swap_schema() {
        let reg = Registry::new();
        let f = parse("(Q.atleast2 u)(Q.atleast2 v/{u}) R(u,v)").unwrap();
        let step = swap_quantifiers(&f, &[], false, &reg).unwrap();
        assert_eq!(
            step.result,
            parse("(Q.atleast2 v)(Q.atleast2 u/{v}) R(u,v)").unwrap()
        );
        assert_eq!(step.z, crate::syntax::varset(&["u", "v"]));

        let f = parse("(E v)(Q.exactly3 u/{v}) R(u,v)").unwrap();
        let step = swap_quantifiers(&f, &[], false, &reg).unwrap();
        assert_eq!(step.result, parse("(Q.exactly3 u)(E v/{u}) R(u,v)").unwrap());

        // refused in bounded mode
        assert!(swap_quantifiers(&f, &[], true, &reg).is_err());
        // refused for non-emptyset-free quantifiers
        let f = parse("(Q.atmost2 u)(E v/{u}) R(u,v)").unwrap();
        assert!(swap_quantifiers(&f, &[], false, &reg).is_err());
        // inner slash must contain the outer variable
        let f = parse("(E u)(E v) R(u,v)").unwrap();
        assert!(swap_quantifiers(&f, &[], false, &reg).is_err());
    }

    #[test]
    fn drop_slash_rules() {
        let f = parse("(E x)(E y/{x}) R(x,y)").unwrap();
        let step = drop_existential_slashes(&f, &[0]).unwrap();
        assert_eq!(step.result, parse("(E x)(E y) R(x,y)").unwrap());

        // universally bound slash variable blocks rule 2
        let f = parse("(A x)(E y/{x}) R(x,y)").unwrap();
        assert!(drop_existential_slashes(&f, &[0]).is_err());
        // Mostowski-bound slash variable blocks rule 2
        let f = parse("(Q.most x)(E y/{x}) R(x,y)").unwrap();
        assert!(drop_existential_slashes(&f, &[0]).is_err());

        // rule 3: ∀ slash sets and ∧ slash sets are always droppable
        let f = parse("(E y)(A x/{y}) R(x,y)").unwrap();
        let step = drop_universal_slashes(&f, &[0]).unwrap();
        assert_eq!(step.result, parse("(E y)(A x) R(x,y)").unwrap());
        let f = parse("(E y)(A x) (P(x) & /{y} P(y))").unwrap();
        let step = drop_universal_slashes(&f, &[0, 0]).unwrap();
        assert_eq!(step.result, parse("(E y)(A x) (P(x) & P(y))").unwrap());
    }

    #[test]
    fn strong_regularization() {
        let f = parse("((E x) P(x) & (E x) Q(x))").unwrap();
        let (g, z, steps) = strong_regularize(&f).unwrap();
        assert!(g.is_strongly_regular());
        assert!(g.bound_variables().is_disjoint(&f.bound_variables()));
        assert!(z.is_subset(&g.bound_variables()));
        assert_eq!(steps.len(), 2);

        // quantifier-free input is untouched
        let f = parse("(P(x) & Q(y))").unwrap();
        let (g, z, steps) = strong_regularize(&f).unwrap();
        assert_eq!(g, f);
        assert!(z.is_empty() && steps.is_empty());

        // already strongly regular formulas still get fresh binders
        let f = parse("(E x) P(x)").unwrap();
        let (g, _, _) = strong_regularize(&f).unwrap();
        assert!(g.is_strongly_regular());
        assert_ne!(g, f);
    }

    #[test]
    fn prenexify_cases() {
        let f = parse("((E x) P(x) | (E y) Q(y))").unwrap();
        let (g, z, steps) = prenexify(&f).unwrap();
        assert!(g.is_prenex() && g.is_strongly_regular());
        let (prefix, _) = g.prenex_split();
        assert_eq!(prefix.len(), 2);
        assert!(!steps.is_empty());
        // Z consists of fresh bound variables only
        assert!(z.is_disjoint(&f.free_variables()));
        assert!(z.is_subset(&g.bound_variables()));

        // already-prenex stays prenex (binders may still be refreshed)
        let f = parse("(E x)(A y) R(x,y)").unwrap();
        let (g, _, _) = prenexify(&f).unwrap();
        assert!(g.is_prenex());

        // Mostowski + slashed disjunction
        let f = parse("((Q.most x) P(x) | ((E u) R(u,u) | /{w} Q(w)))").unwrap();
        let (g, _, _) = prenexify(&f).unwrap();
        assert!(g.is_prenex() && g.is_strongly_regular());

        // backslash and team quantifiers are rejected
        assert!(prenexify(&parse("((E y\\{x}) R(x,y) | P(x))").unwrap()).is_err());
        assert!(prenexify(&parse("((TQ.hat_exists v) P(v) | Q(y))").unwrap()).is_err());
    }

    #[test]
    fn primality_cases() {
        let reg = Registry::new();
        // existential slash: reducible
        let f = parse("(E x)(E y/{x}) R(x,y)").unwrap();
        match primality_reduce(&f, &reg, 32).unwrap() {
            PrimalityOutcome::Reduced { result, steps } => {
                assert_eq!(result, parse("(E x)(E y) R(x,y)").unwrap());
                assert_eq!(steps.len(), 1);
            }
            other => panic!("{other:?}"),
        }

        // signalling pattern: swap then drop the universal slash, i.e.
        // (A x)(E y/{x}) → (E y)(A x/{y}) → (E y)(A x)
        let f = parse("(A x)(E y/{x}) R(x,y)").unwrap();
        match primality_reduce(&f, &reg, 32).unwrap() {
            PrimalityOutcome::Reduced { result, .. } => assert!(result.is_slash_free()),
            other => panic!("{other:?}"),
        }

        // Henkin dependency pattern: z must ignore x but may depend on y,
        // and no swap or drop applies — stuck
        let f = parse("(A x)(A y)(E z/{x}) R(x,y,z)").unwrap();
        assert!(matches!(
            primality_reduce(&f, &reg, 32).unwrap(),
            PrimalityOutcome::Stuck { .. }
        ));

        // non-emptyset-free head blocks the swap; the slash variable is
        // Mostowski-bound, so the existential drop is blocked too — stuck
        let f = parse("(Q.atmost2 x)(E y/{x}) R(x,y)").unwrap();
        assert!(matches!(
            primality_reduce(&f, &reg, 32).unwrap(),
            PrimalityOutcome::Stuck { .. }
        ));

        // slash-free: trivially reduced
        let f = parse("(E x)(A y) R(x,y)").unwrap();
        assert!(matches!(
            primality_reduce(&f, &reg, 32).unwrap(),
            PrimalityOutcome::Reduced { ref steps, .. } if steps.is_empty()
        ));

        // a two-stage reduction: swap the inner pair to
        // (E x)(E z/{x})(A y/{z}), then drop both slashes
        let f = parse("(E x)(A y)(E z/{x,y}) R(x,z)").unwrap();
        match primality_reduce(&f, &reg, 32).unwrap() {
            PrimalityOutcome::Reduced { result, .. } => assert!(result.is_slash_free()),
            other => panic!("{other:?}"),
        }

        // a swap-then-drop success: (A y)(E x/{y})(E z/{x}) R(x,z) — the
        // inner pair is droppable after clearing {x}: z depends only on x
        let f = parse("(E x)(E z/{x})(A y/{x,z}) R(x,z)").unwrap();
        match primality_reduce(&f, &reg, 32).unwrap() {
            PrimalityOutcome::Reduced { result, .. } => assert!(result.is_slash_free()),
            other => panic!("{other:?}"),
        }

        // preconditions
        assert!(primality_reduce(&parse("(E x) P(y)").unwrap(), &reg, 32).is_err());
        assert!(primality_reduce(
            &parse("((E x) P(x) | (E y) Q(y))").unwrap(),
            &reg,
            32
        )
        .is_err());
    }
}
