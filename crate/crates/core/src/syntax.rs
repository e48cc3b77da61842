//! Abstract syntax of IF* formulas with slashed/backslashed quantifiers and
//! slashed connectives, plus the syntactic operations the rewrite calculus
//! is built from: free variables, renaming substitution, the slash-set
//! transformations ψ_{/V} and ψ|_V, tree paths and regularity predicates.

use std::collections::BTreeSet;

use crate::{Error, Result};

pub type VarSet = BTreeSet<String>;

pub fn varset(vs: &[&str]) -> VarSet {
    vs.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

/// Quantifier kind: the two first-order quantifiers, a named Mostowski
/// quantifier evaluated by the supplementing-function clause, or a named
/// team quantifier evaluated on the meaning set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QuantKind {
    Exists,
    Forall,
    Mostowski(String),
    Team(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    /// R(t₁,…,tₙ) or its atomic negation.
    Atom { rel: String, args: Vec<Term>, negated: bool },
    /// t₁ = t₂ or t₁ ≠ t₂.
    Eq { left: Term, right: Term, negated: bool },
    And { left: Box<Formula>, right: Box<Formula>, slash: VarSet },
    Or { left: Box<Formula>, right: Box<Formula>, slash: VarSet },
    Quant {
        kind: QuantKind,
        var: String,
        slash: VarSet,
        /// DF-style backslash: uniformity over dom(X)∖V instead of V.
        backslash: bool,
        body: Box<Formula>,
    },
}

impl Formula {
    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And { left: Box::new(l), right: Box::new(r), slash: VarSet::new() }
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or { left: Box::new(l), right: Box::new(r), slash: VarSet::new() }
    }

    pub fn or_slashed(l: Formula, r: Formula, slash: VarSet) -> Formula {
        Formula::Or { left: Box::new(l), right: Box::new(r), slash }
    }

    pub fn quant(kind: QuantKind, var: &str, slash: VarSet, body: Formula) -> Formula {
        Formula::Quant { kind, var: var.to_string(), slash, backslash: false, body: Box::new(body) }
    }

    pub fn exists(var: &str, body: Formula) -> Formula {
        Formula::quant(QuantKind::Exists, var, VarSet::new(), body)
    }

    pub fn forall(var: &str, body: Formula) -> Formula {
        Formula::quant(QuantKind::Forall, var, VarSet::new(), body)
    }

    pub fn atom(rel: &str, args: &[&str]) -> Formula {
        Formula::Atom {
            rel: rel.to_string(),
            args: args.iter().map(|a| Term::Var(a.to_string())).collect(),
            negated: false,
        }
    }

    /// Free variables per the inductive clauses: slash sets of quantifiers
    /// and connectives contribute all of their members.
    pub fn free_variables(&self) -> VarSet {
        match self {
            Formula::Atom { args, .. } => {
                args.iter().filter_map(|t| t.var()).map(str::to_string).collect()
            }
            Formula::Eq { left, right, .. } => [left, right]
                .iter()
                .filter_map(|t| t.var())
                .map(str::to_string)
                .collect(),
            Formula::And { left, right, slash } | Formula::Or { left, right, slash } => {
                let mut fv = left.free_variables();
                fv.extend(right.free_variables());
                fv.extend(slash.iter().cloned());
                fv
            }
            Formula::Quant { var, slash, body, .. } => {
                let mut fv = body.free_variables();
                fv.remove(var);
                fv.extend(slash.iter().cloned());
                fv
            }
        }
    }

    /// Every variable occurring anywhere: atoms, slash sets, binders.
    pub fn all_variables(&self) -> VarSet {
        match self {
            Formula::Atom { args, .. } => {
                args.iter().filter_map(|t| t.var()).map(str::to_string).collect()
            }
            Formula::Eq { left, right, .. } => [left, right]
                .iter()
                .filter_map(|t| t.var())
                .map(str::to_string)
                .collect(),
            Formula::And { left, right, slash } | Formula::Or { left, right, slash } => {
                let mut vs = left.all_variables();
                vs.extend(right.all_variables());
                vs.extend(slash.iter().cloned());
                vs
            }
            Formula::Quant { var, slash, body, .. } => {
                let mut vs = body.all_variables();
                vs.insert(var.clone());
                vs.extend(slash.iter().cloned());
                vs
            }
        }
    }

    /// Variables with at least one quantifier occurrence.
    pub fn bound_variables(&self) -> VarSet {
        match self {
            Formula::Atom { .. } | Formula::Eq { .. } => VarSet::new(),
            Formula::And { left, right, .. } | Formula::Or { left, right, .. } => {
                let mut b = left.bound_variables();
                b.extend(right.bound_variables());
                b
            }
            Formula::Quant { var, body, .. } => {
                let mut b = body.bound_variables();
                b.insert(var.clone());
                b
            }
        }
    }

    /// All relation symbols with their arities.
    pub fn relation_symbols(&self) -> BTreeSet<(String, usize)> {
        match self {
            Formula::Atom { rel, args, .. } => [(rel.clone(), args.len())].into(),
            Formula::Eq { .. } => BTreeSet::new(),
            Formula::And { left, right, .. } | Formula::Or { left, right, .. } => {
                let mut s = left.relation_symbols();
                s.extend(right.relation_symbols());
                s
            }
            Formula::Quant { body, .. } => body.relation_symbols(),
        }
    }

    /// All constant symbols occurring in terms.
    pub fn constant_symbols(&self) -> BTreeSet<String> {
        fn from_terms(ts: &[&Term]) -> BTreeSet<String> {
            ts.iter()
                .filter_map(|t| match t {
                    Term::Const(c) => Some(c.clone()),
                    Term::Var(_) => None,
                })
                .collect()
        }
        match self {
            Formula::Atom { args, .. } => from_terms(&args.iter().collect::<Vec<_>>()),
            Formula::Eq { left, right, .. } => from_terms(&[left, right]),
            Formula::And { left, right, .. } | Formula::Or { left, right, .. } => {
                let mut s = left.constant_symbols();
                s.extend(right.constant_symbols());
                s
            }
            Formula::Quant { body, .. } => body.constant_symbols(),
        }
    }

    /// Names of team quantifiers and Mostowski quantifiers used.
    pub fn quantifier_names(&self) -> BTreeSet<QuantKind> {
        match self {
            Formula::Atom { .. } | Formula::Eq { .. } => BTreeSet::new(),
            Formula::And { left, right, .. } | Formula::Or { left, right, .. } => {
                let mut s = left.quantifier_names();
                s.extend(right.quantifier_names());
                s
            }
            Formula::Quant { kind, body, .. } => {
                let mut s = body.quantifier_names();
                s.insert(kind.clone());
                s
            }
        }
    }

    /// A formula is first-order when every slash set (including those of
    /// connectives) is empty and no backslash or team quantifier occurs.
    pub fn is_first_order(&self) -> bool {
        match self {
            Formula::Atom { .. } | Formula::Eq { .. } => true,
            Formula::And { left, right, slash } | Formula::Or { left, right, slash } => {
                slash.is_empty() && left.is_first_order() && right.is_first_order()
            }
            Formula::Quant { kind, slash, backslash, body, .. } => {
                slash.is_empty()
                    && !backslash
                    && !matches!(kind, QuantKind::Team(_))
                    && body.is_first_order()
            }
        }
    }

    /// `ψ[z/x]`: replace every free occurrence of `x` (including slash-set
    /// occurrences where `x` is free) by `z`. Errors if `z` occurs in `ψ`,
    /// mirroring the hypotheses of the renaming theorem.
    pub fn substitute(&self, x: &str, z: &str) -> Result<Formula> {
        if self.all_variables().contains(z) {
            return Err(Error::Syntax(format!("substitution target `{z}` occurs in formula")));
        }
        Ok(self.substitute_unchecked(x, z))
    }

    fn substitute_unchecked(&self, x: &str, z: &str) -> Formula {
        let sub_term = |t: &Term| match t {
            Term::Var(v) if v == x => Term::Var(z.to_string()),
            other => other.clone(),
        };
        let sub_set = |s: &VarSet| -> VarSet {
            s.iter()
                .map(|v| if v == x { z.to_string() } else { v.clone() })
                .collect()
        };
        match self {
            Formula::Atom { rel, args, negated } => Formula::Atom {
                rel: rel.clone(),
                args: args.iter().map(sub_term).collect(),
                negated: *negated,
            },
            Formula::Eq { left, right, negated } => Formula::Eq {
                left: sub_term(left),
                right: sub_term(right),
                negated: *negated,
            },
            Formula::And { left, right, slash } => Formula::And {
                left: Box::new(left.substitute_unchecked(x, z)),
                right: Box::new(right.substitute_unchecked(x, z)),
                slash: sub_set(slash),
            },
            Formula::Or { left, right, slash } => Formula::Or {
                left: Box::new(left.substitute_unchecked(x, z)),
                right: Box::new(right.substitute_unchecked(x, z)),
                slash: sub_set(slash),
            },
            Formula::Quant { kind, var, slash, backslash, body } => Formula::Quant {
                kind: kind.clone(),
                var: var.clone(),
                // slash-set occurrences of x are free even when var == x
                slash: sub_set(slash),
                backslash: *backslash,
                body: if var == x {
                    body.clone()
                } else {
                    Box::new(body.substitute_unchecked(x, z))
                },
            },
        }
    }

    /// `ψ_{/V}`: add `V` to every slash set, including connective slashes.
    pub fn slash_all(&self, v: &VarSet) -> Formula {
        self.map_slashes(&|s| {
            let mut s = s.clone();
            s.extend(v.iter().cloned());
            s
        })
    }

    /// `ψ|_V`: add `V` to every nonempty slash set.
    pub fn slash_nonempty(&self, v: &VarSet) -> Formula {
        self.map_slashes(&|s| {
            if s.is_empty() {
                s.clone()
            } else {
                let mut s = s.clone();
                s.extend(v.iter().cloned());
                s
            }
        })
    }

    /// Remove `V` from every slash set.
    pub fn unslash_all(&self, v: &VarSet) -> Formula {
        self.map_slashes(&|s| s.difference(v).cloned().collect())
    }

    fn map_slashes(&self, f: &dyn Fn(&VarSet) -> VarSet) -> Formula {
        match self {
            Formula::Atom { .. } | Formula::Eq { .. } => self.clone(),
            Formula::And { left, right, slash } => Formula::And {
                left: Box::new(left.map_slashes(f)),
                right: Box::new(right.map_slashes(f)),
                slash: f(slash),
            },
            Formula::Or { left, right, slash } => Formula::Or {
                left: Box::new(left.map_slashes(f)),
                right: Box::new(right.map_slashes(f)),
                slash: f(slash),
            },
            Formula::Quant { kind, var, slash, backslash, body } => Formula::Quant {
                kind: kind.clone(),
                var: var.clone(),
                slash: f(slash),
                backslash: *backslash,
                body: Box::new(body.map_slashes(f)),
            },
        }
    }

    /// Every slash set (quantifier and connective) is empty.
    pub fn is_slash_free(&self) -> bool {
        match self {
            Formula::Atom { .. } | Formula::Eq { .. } => true,
            Formula::And { left, right, slash } | Formula::Or { left, right, slash } => {
                slash.is_empty() && left.is_slash_free() && right.is_slash_free()
            }
            Formula::Quant { slash, body, .. } => slash.is_empty() && body.is_slash_free(),
        }
    }

    /// Subformula at a tree path (child-index list; quantifier body is
    /// child 0, connective children are 0 and 1).
    pub fn at(&self, path: &[usize]) -> Result<&Formula> {
        let mut node = self;
        for &i in path {
            node = match (node, i) {
                (Formula::And { left, .. } | Formula::Or { left, .. }, 0) => left,
                (Formula::And { right, .. } | Formula::Or { right, .. }, 1) => right,
                (Formula::Quant { body, .. }, 0) => body,
                _ => return Err(Error::Syntax(format!("invalid tree path {path:?}"))),
            };
        }
        Ok(node)
    }

    /// `φ(θ/χ)`: replace the occurrence at the given path.
    pub fn replace_at(&self, path: &[usize], replacement: Formula) -> Result<Formula> {
        if path.is_empty() {
            return Ok(replacement);
        }
        let (i, rest) = (path[0], &path[1..]);
        match (self, i) {
            (Formula::And { left, right, slash }, 0) => Ok(Formula::And {
                left: Box::new(left.replace_at(rest, replacement)?),
                right: right.clone(),
                slash: slash.clone(),
            }),
            (Formula::And { left, right, slash }, 1) => Ok(Formula::And {
                left: left.clone(),
                right: Box::new(right.replace_at(rest, replacement)?),
                slash: slash.clone(),
            }),
            (Formula::Or { left, right, slash }, 0) => Ok(Formula::Or {
                left: Box::new(left.replace_at(rest, replacement)?),
                right: right.clone(),
                slash: slash.clone(),
            }),
            (Formula::Or { left, right, slash }, 1) => Ok(Formula::Or {
                left: left.clone(),
                right: Box::new(right.replace_at(rest, replacement)?),
                slash: slash.clone(),
            }),
            (Formula::Quant { kind, var, slash, backslash, body }, 0) => Ok(Formula::Quant {
                kind: kind.clone(),
                var: var.clone(),
                slash: slash.clone(),
                backslash: *backslash,
                body: Box::new(body.replace_at(rest, replacement)?),
            }),
            _ => Err(Error::Syntax(format!("invalid tree path {path:?}"))),
        }
    }

    /// Regular: no variable occurs both bound and free, and no quantifier
    /// over `v` occurs in the scope of another quantifier over `v`.
    pub fn is_regular(&self) -> bool {
        fn no_rebinding(f: &Formula, in_scope: &mut VarSet) -> bool {
            match f {
                Formula::Atom { .. } | Formula::Eq { .. } => true,
                Formula::And { left, right, .. } | Formula::Or { left, right, .. } => {
                    no_rebinding(left, in_scope) && no_rebinding(right, in_scope)
                }
                Formula::Quant { var, body, .. } => {
                    if in_scope.contains(var) {
                        return false;
                    }
                    in_scope.insert(var.clone());
                    let ok = no_rebinding(body, in_scope);
                    in_scope.remove(var);
                    ok
                }
            }
        }
        self.bound_variables().is_disjoint(&self.free_variables())
            && no_rebinding(self, &mut VarSet::new())
    }

    /// Strongly regular: each variable is quantified at most once.
    pub fn is_strongly_regular(&self) -> bool {
        fn count(f: &Formula, seen: &mut VarSet) -> bool {
            match f {
                Formula::Atom { .. } | Formula::Eq { .. } => true,
                Formula::And { left, right, .. } | Formula::Or { left, right, .. } => {
                    count(left, seen) && count(right, seen)
                }
                Formula::Quant { var, body, .. } => seen.insert(var.clone()) && count(body, seen),
            }
        }
        count(self, &mut VarSet::new())
    }

    /// Prenex: a (possibly empty) prefix of quantifiers over a matrix
    /// without quantifiers.
    pub fn is_prenex(&self) -> bool {
        let mut node = self;
        while let Formula::Quant { body, .. } = node {
            node = body;
        }
        node.is_quantifier_free()
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Atom { .. } | Formula::Eq { .. } => true,
            Formula::And { left, right, .. } | Formula::Or { left, right, .. } => {
                left.is_quantifier_free() && right.is_quantifier_free()
            }
            Formula::Quant { .. } => false,
        }
    }

    /// Split a prenex formula into its quantifier prefix (outermost first)
    /// and matrix.
    pub fn prenex_split(&self) -> (Vec<&Formula>, &Formula) {
        let mut prefix = Vec::new();
        let mut node = self;
        while let Formula::Quant { body, .. } = node {
            prefix.push(node);
            node = body;
        }
        (prefix, node)
    }

    /// Negation of a quantifier-free, slash-free first-order formula, with
    /// negation pushed to atoms. Used by the `<->` surface form.
    pub fn negate_quantifier_free(&self) -> Result<Formula> {
        match self {
            Formula::Atom { rel, args, negated } => Ok(Formula::Atom {
                rel: rel.clone(),
                args: args.clone(),
                negated: !negated,
            }),
            Formula::Eq { left, right, negated } => Ok(Formula::Eq {
                left: left.clone(),
                right: right.clone(),
                negated: !negated,
            }),
            Formula::And { left, right, slash } if slash.is_empty() => Ok(Formula::or(
                left.negate_quantifier_free()?,
                right.negate_quantifier_free()?,
            )),
            Formula::Or { left, right, slash } if slash.is_empty() => Ok(Formula::and(
                left.negate_quantifier_free()?,
                right.negate_quantifier_free()?,
            )),
            _ => Err(Error::Syntax(
                "negation is only defined for quantifier-free slash-free subformulas".into(),
            )),
        }
    }
}

fn fmt_varset(s: &VarSet) -> String {
    let inner: Vec<&str> = s.iter().map(|v| v.as_str()).collect();
    format!("{{{}}}", inner.join(","))
}

fn fmt_term(t: &Term) -> String {
    match t {
        Term::Var(v) => v.clone(),
        Term::Const(c) => format!("#{c}"),
    }
}

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Formula::Atom { rel, args, negated } => {
                let args: Vec<String> = args.iter().map(fmt_term).collect();
                write!(f, "{}{rel}({})", if *negated { "~" } else { "" }, args.join(","))
            }
            Formula::Eq { left, right, negated } => {
                let op = if *negated { "!=" } else { "=" };
                write!(f, "{} {op} {}", fmt_term(left), fmt_term(right))
            }
            Formula::And { left, right, slash } | Formula::Or { left, right, slash } => {
                let op = if matches!(self, Formula::And { .. }) { "&" } else { "|" };
                if slash.is_empty() {
                    write!(f, "({left} {op} {right})")
                } else {
                    write!(f, "({left} {op} /{} {right})", fmt_varset(slash))
                }
            }
            Formula::Quant { kind, var, slash, backslash, body } => {
                let head = match kind {
                    QuantKind::Exists => "E".to_string(),
                    QuantKind::Forall => "A".to_string(),
                    QuantKind::Mostowski(n) => format!("Q.{n}"),
                    QuantKind::Team(n) => format!("TQ.{n}"),
                };
                let sep = if *backslash { "\\" } else { "/" };
                if slash.is_empty() && !backslash {
                    write!(f, "({head} {var}) {body}")
                } else {
                    write!(f, "({head} {var}{sep}{}) {body}", fmt_varset(slash))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    #[test]
    fn free_variables_slashed_quantifier() {
        // ∃z(∃y/{x})R(y,z) has exactly one free variable, x
        let f = parse("(E z)(E y/{x}) R(y,z)").unwrap();
        assert_eq!(f.free_variables(), varset(&["x"]));
    }

    #[test]
    fn free_variables_atom_and_connective() {
        assert_eq!(parse("R(x,y)").unwrap().free_variables(), varset(&["x", "y"]));
        // slash set of a connective contributes to FV
        let f = parse("(P(x) | /{w} Q(y))").unwrap();
        assert_eq!(f.free_variables(), varset(&["x", "y", "w"]));
    }

    #[test]
    fn substitution_cases() {
        let f = parse("P(x)").unwrap();
        assert_eq!(f.substitute("x", "z").unwrap(), parse("P(z)").unwrap());

        let f = parse("(E x) P(x)").unwrap();
        assert_eq!(f.substitute("x", "z").unwrap(), f);

        // slash-set occurrence of x is free
        let f = parse("(E y/{x}) R(x,y)").unwrap();
        assert_eq!(
            f.substitute("x", "z").unwrap(),
            parse("(E y/{z}) R(z,y)").unwrap()
        );

        // z occurring anywhere is an error
        let f = parse("R(x,z)").unwrap();
        assert!(f.substitute("x", "z").is_err());
    }

    #[test]
    fn substitution_free_variable_bookkeeping() {
        for src in ["(E y/{x}) R(x,y)", "(P(x) | Q(x))", "((E y) R(x,y) & P(x))"] {
            let f = parse(src).unwrap();
            let fv = f.free_variables();
            assert!(fv.contains("x"));
            let g = f.substitute("x", "z").unwrap();
            let mut expect = fv.clone();
            expect.remove("x");
            expect.insert("z".to_string());
            assert_eq!(g.free_variables(), expect);
        }
    }

    #[test]
    fn slash_all_and_nonempty() {
        let f = parse("(E y) P(y)").unwrap();
        assert_eq!(f.slash_all(&varset(&["v"])), parse("(E y/{v}) P(y)").unwrap());
        assert_eq!(f.slash_nonempty(&varset(&["v"])), f);

        // only the nonempty slash set gains v
        let f = parse("((E y/{x}) P(y) | Q(y))").unwrap();
        assert_eq!(
            f.slash_nonempty(&varset(&["v"])),
            parse("((E y/{x,v}) P(y) | Q(y))").unwrap()
        );

        // identities
        let g = parse("((E y/{x}) P(y) | /{w} Q(y))").unwrap();
        assert_eq!(g.slash_all(&VarSet::new()), g);
        assert_eq!(g.slash_nonempty(&VarSet::new()), g);
        let v = varset(&["u"]);
        assert_eq!(g.slash_all(&v).slash_all(&v), g.slash_all(&v));
    }

    #[test]
    fn slash_variants_differ_exactly_on_empty_sets() {
        // for φ without v, slash_all and slash_nonempty differ exactly on
        // the empty slash sets
        let f = parse("((E y/{x}) P(y) | (A u) Q(u))").unwrap();
        let v = varset(&["v"]);
        let a = f.slash_all(&v);
        let b = f.slash_nonempty(&v);
        assert_ne!(a, b);
        // removing v from everything recovers φ in both cases
        assert_eq!(a.unslash_all(&v), f);
        assert_eq!(b.unslash_all(&v), f);
    }

    #[test]
    fn replace_at_paths() {
        let f = parse("((E x) P(x) & Q(y))").unwrap();
        let theta = parse("R(y,y)").unwrap();
        let g = f.replace_at(&[1], theta.clone()).unwrap();
        assert_eq!(g, parse("((E x) P(x) & R(y,y))").unwrap());
        let h = f.replace_at(&[0, 0], theta.clone()).unwrap();
        assert_eq!(h, parse("((E x) R(y,y) & Q(y))").unwrap());
        let i = f.replace_at(&[], theta.clone()).unwrap();
        assert_eq!(i, theta);
        assert!(f.at(&[2]).is_err());
        assert!(f.replace_at(&[0, 0, 0], theta).is_err());
    }

    #[test]
    fn regularity_predicates() {
        let f = parse("(E x) P(x)").unwrap();
        assert!(f.is_regular() && f.is_strongly_regular() && f.is_prenex());

        let f = parse("(E x)(E x) P(x)").unwrap();
        assert!(!f.is_regular());
        assert!(!f.is_strongly_regular());

        let f = parse("(P(x) & (E x) Q(x))").unwrap();
        assert!(!f.is_regular());
        // quantified once, so still strongly regular by the definition
        assert!(f.is_strongly_regular());

        let f = parse("((E x) P(x) | (E x) Q(x))").unwrap();
        assert!(!f.is_strongly_regular());

        let f = parse("(E x)(A y) (P(x) | Q(y))").unwrap();
        assert!(f.is_prenex());
        let f = parse("((E x) P(x) | Q(y))").unwrap();
        assert!(!f.is_prenex());
    }
}
