//! Line-oriented text formats for structures, teams and quantifier
//! configuration, with printers that round-trip through the parsers.
//!
//! Structure file:
//! ```text
//! domain: a b c
//! rel P/1: a b
//! rel R/2: (a,b) (b,c)
//! const c0 = a
//! ```
//!
//! Team file (rows resolved against a structure):
//! ```text
//! vars: x y
//! x=a y=b
//! x=c y=c
//! ```
//!
//! Quantifier configuration:
//! ```text
//! mostowski exactly3 = card(S) == 3
//! mostowski most = 2*card(S) >= card(M)
//! extensional Qa @size2 = {a}
//! team tq1 = liftE(exactly3)
//! team tq3 = count_functions(3)
//! team tq4 = most_functions
//! ```

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{Elem, Structure, Team};
use crate::quantifiers::{
    CardExpr, CardPredicate, CmpOp, MostowskiDef, MostowskiQuantifier, Registry, TeamDef,
    TeamQuantifier,
};
use crate::{Error, Result};

fn err(file: &str, line_no: usize, msg: impl AsRef<str>) -> Error {
    Error::Config(format!("{file} file line {line_no}: {}", msg.as_ref()))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

// ---------------------------------------------------------------------------
// Structures
// ---------------------------------------------------------------------------

pub fn parse_structure(text: &str) -> Result<Structure> {
    let mut domain: Option<Vec<String>> = None;
    let mut relations: BTreeMap<String, (usize, BTreeSet<Vec<Elem>>)> = BTreeMap::new();
    let mut constants: BTreeMap<String, Elem> = BTreeMap::new();
    let lookup = |domain: &Option<Vec<String>>, name: &str, n: usize| -> Result<Elem> {
        domain
            .as_ref()
            .ok_or_else(|| err("structure", n, "domain must be declared first"))?
            .iter()
            .position(|e| e == name)
            .ok_or_else(|| err("structure", n, format!("unknown element `{name}`")))
    };
    for (n, line) in content_lines(text) {
        if let Some(rest) = line.strip_prefix("domain:") {
            if domain.is_some() {
                return Err(err("structure", n, "duplicate domain line"));
            }
            let elems: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
            if elems.is_empty() {
                return Err(err("structure", n, "empty domain"));
            }
            domain = Some(elems);
        } else if let Some(rest) = line.strip_prefix("rel ") {
            let (head, body) = rest
                .split_once(':')
                .ok_or_else(|| err("structure", n, "expected `rel NAME/ARITY: ...`"))?;
            let (name, arity) = head
                .trim()
                .split_once('/')
                .ok_or_else(|| err("structure", n, "expected `NAME/ARITY`"))?;
            let arity: usize = arity
                .trim()
                .parse()
                .map_err(|_| err("structure", n, format!("bad arity `{arity}`")))?;
            if arity == 0 {
                return Err(err("structure", n, "arity must be positive"));
            }
            let mut tuples = BTreeSet::new();
            let body = body.trim();
            if arity == 1 && !body.contains('(') {
                for e in body.split_whitespace() {
                    tuples.insert(vec![lookup(&domain, e, n)?]);
                }
            } else {
                let mut rest = body;
                while !rest.is_empty() {
                    let open = rest
                        .find('(')
                        .ok_or_else(|| err("structure", n, "expected `(a,b)` tuple"))?;
                    let close = rest
                        .find(')')
                        .ok_or_else(|| err("structure", n, "unclosed tuple"))?;
                    let inner = &rest[open + 1..close];
                    let tuple: Result<Vec<Elem>> =
                        inner.split(',').map(|e| lookup(&domain, e.trim(), n)).collect();
                    let tuple = tuple?;
                    if tuple.len() != arity {
                        return Err(err(
                            "structure",
                            n,
                            format!("tuple arity {} does not match {arity}", tuple.len()),
                        ));
                    }
                    tuples.insert(tuple);
                    rest = rest[close + 1..].trim_start();
                }
            }
            if relations.insert(name.trim().to_string(), (arity, tuples)).is_some() {
                return Err(err("structure", n, format!("duplicate relation `{name}`")));
            }
        } else if let Some(rest) = line.strip_prefix("const ") {
            let (name, val) = rest
                .split_once('=')
                .ok_or_else(|| err("structure", n, "expected `const NAME = elem`"))?;
            let elem = lookup(&domain, val.trim(), n)?;
            if constants.insert(name.trim().to_string(), elem).is_some() {
                return Err(err("structure", n, format!("duplicate constant `{name}`")));
            }
        } else {
            return Err(err("structure", n, format!("unrecognized line `{line}`")));
        }
    }
    let domain = domain.ok_or_else(|| err("structure", 1, "missing `domain:` line"))?;
    Structure::new(domain, relations, constants)
}

pub fn print_structure(m: &Structure) -> String {
    let mut out = String::new();
    out.push_str("domain:");
    for i in 0..m.size() {
        out.push(' ');
        out.push_str(m.elem_name(i));
    }
    out.push('\n');
    for (name, (arity, tuples)) in m.relations() {
        out.push_str(&format!("rel {name}/{arity}:"));
        for t in tuples {
            if *arity == 1 {
                out.push(' ');
                out.push_str(m.elem_name(t[0]));
            } else {
                let names: Vec<&str> = t.iter().map(|&e| m.elem_name(e)).collect();
                out.push_str(&format!(" ({})", names.join(",")));
            }
        }
        out.push('\n');
    }
    for (name, &e) in m.constants() {
        out.push_str(&format!("const {name} = {}\n", m.elem_name(e)));
    }
    out
}

// ---------------------------------------------------------------------------
// Teams
// ---------------------------------------------------------------------------

pub fn parse_team(text: &str, m: &Structure) -> Result<Team> {
    let mut lines = content_lines(text);
    let (n, first) = lines
        .next()
        .ok_or_else(|| err("team", 1, "missing `vars:` line"))?;
    let rest = first
        .strip_prefix("vars:")
        .ok_or_else(|| err("team", n, "first line must be `vars: ...`"))?;
    let vars: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
    let sorted = {
        let mut v = vars.clone();
        v.sort();
        v.dedup();
        if v.len() != vars.len() {
            return Err(err("team", n, "duplicate variable"));
        }
        v
    };
    let mut rows = Vec::new();
    for (n, line) in lines {
        let mut bindings: BTreeMap<String, Elem> = BTreeMap::new();
        // `-` denotes the empty assignment (row of a zero-variable team)
        let pairs = if line.trim() == "-" { "" } else { line };
        for pair in pairs.split_whitespace() {
            let (var, val) = pair
                .split_once('=')
                .ok_or_else(|| err("team", n, format!("expected `var=elem`, got `{pair}`")))?;
            let elem = m
                .elem_index(val)
                .ok_or_else(|| err("team", n, format!("unknown element `{val}`")))?;
            if bindings.insert(var.to_string(), elem).is_some() {
                return Err(err("team", n, format!("duplicate binding for `{var}`")));
            }
        }
        if bindings.len() != sorted.len() || !sorted.iter().all(|v| bindings.contains_key(v)) {
            return Err(err("team", n, "row does not bind exactly the declared variables"));
        }
        rows.push(sorted.iter().map(|v| bindings[v]).collect());
    }
    Team::from_rows(sorted, rows)
}

pub fn print_team(x: &Team, m: &Structure) -> String {
    let mut out = String::new();
    out.push_str("vars:");
    for v in x.vars() {
        out.push(' ');
        out.push_str(v);
    }
    out.push('\n');
    for row in x.rows() {
        let pairs: Vec<String> = x
            .vars()
            .iter()
            .zip(row.iter())
            .map(|(v, &e)| format!("{v}={}", m.elem_name(e)))
            .collect();
        if pairs.is_empty() {
            out.push('-');
        } else {
            out.push_str(&pairs.join(" "));
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Quantifier configuration
// ---------------------------------------------------------------------------

struct ExprParser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    src: &'a str,
}

impl<'a> ExprParser<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        ExprParser { chars: src.chars().collect(), pos: 0, line, src }
    }

    fn error(&self, msg: impl AsRef<str>) -> Error {
        err("quantifier", self.line, format!("{} in `{}`", msg.as_ref(), self.src))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, lit: &str) -> bool {
        self.skip_ws();
        let end = self.pos + lit.chars().count();
        if end <= self.chars.len() && self.chars[self.pos..end].iter().collect::<String>() == lit {
            self.pos = end;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<CardExpr> {
        let mut acc = self.term()?;
        loop {
            if self.eat("+") {
                acc = CardExpr::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat("-") {
                acc = CardExpr::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<CardExpr> {
        let mut acc = self.factor()?;
        while self.eat("*") {
            acc = CardExpr::Mul(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<CardExpr> {
        if self.eat("card(S)") {
            return Ok(CardExpr::CardS);
        }
        if self.eat("card(M)") {
            return Ok(CardExpr::CardM);
        }
        if self.eat("(") {
            let e = self.expr()?;
            if !self.eat(")") {
                return Err(self.error("expected `)`"));
            }
            return Ok(e);
        }
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let num: String = self.chars[start..self.pos].iter().collect();
                Ok(CardExpr::Num(num.parse().map_err(|_| self.error("bad number"))?))
            }
            _ => Err(self.error("expected card(S), card(M), a number, or `(`")),
        }
    }

    fn cmp(&mut self) -> Result<CmpOp> {
        for (lit, op) in [
            ("==", CmpOp::Eq),
            ("!=", CmpOp::Ne),
            ("<=", CmpOp::Le),
            (">=", CmpOp::Ge),
            ("<", CmpOp::Lt),
            (">", CmpOp::Gt),
        ] {
            if self.eat(lit) {
                return Ok(op);
            }
        }
        Err(self.error("expected a comparator (==, !=, <=, >=, <, >)"))
    }

    fn done(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.chars.len()
    }
}

fn parse_predicate(src: &str, line: usize) -> Result<CardPredicate> {
    let mut p = ExprParser::new(src, line);
    let lhs = p.expr()?;
    let op = p.cmp()?;
    let rhs = p.expr()?;
    if !p.done() {
        return Err(p.error("trailing input"));
    }
    Ok(CardPredicate { lhs, op, rhs })
}

fn parse_elem_set(src: &str, line: usize) -> Result<BTreeSet<String>> {
    let inner = src
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| err("quantifier", line, format!("expected `{{a,b}}`, got `{src}`")))?;
    Ok(inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect())
}

/// Load a quantifier configuration file into the registry. Later lines may
/// refer to Mostowski quantifiers defined earlier (or to built-ins).
pub fn load_quantifiers(text: &str, reg: &mut Registry) -> Result<()> {
    // extensional tables may span several lines (one per size)
    let mut extensional: BTreeMap<String, BTreeMap<usize, Vec<BTreeSet<String>>>> =
        BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for (n, line) in content_lines(text) {
        if let Some(rest) = line.strip_prefix("mostowski ") {
            let (name, body) = rest
                .split_once('=')
                .ok_or_else(|| err("quantifier", n, "expected `mostowski NAME = predicate`"))?;
            let pred = parse_predicate(body, n)?;
            reg.register_mostowski(MostowskiQuantifier::intensional(name.trim(), pred))?;
        } else if let Some(rest) = line.strip_prefix("extensional ") {
            let (head, body) = rest
                .split_once('=')
                .ok_or_else(|| err("quantifier", n, "expected `extensional NAME @sizeK = ...`"))?;
            let (name, size) = head
                .trim()
                .split_once("@size")
                .ok_or_else(|| err("quantifier", n, "expected `NAME @sizeK`"))?;
            let size: usize = size
                .trim()
                .parse()
                .map_err(|_| err("quantifier", n, format!("bad size `{size}`")))?;
            let sets: Result<Vec<BTreeSet<String>>> =
                body.split_whitespace().map(|s| parse_elem_set(s, n)).collect();
            let name = name.trim().to_string();
            if !extensional.contains_key(&name) {
                order.push(name.clone());
            }
            extensional.entry(name).or_default().insert(size, sets?);
        } else if let Some(rest) = line.strip_prefix("team ") {
            let (name, body) = rest
                .split_once('=')
                .ok_or_else(|| err("quantifier", n, "expected `team NAME = constructor`"))?;
            let name = name.trim();
            let body = body.trim();
            // flush pending extensional tables so lifts can refer to them
            flush_extensional(&mut extensional, &mut order, reg)?;
            let def = if body == "most_functions" {
                TeamDef::MostFunctions
            } else if let Some(arg) = call_arg(body, "count_functions") {
                let k: usize = arg
                    .parse()
                    .map_err(|_| err("quantifier", n, format!("bad count `{arg}`")))?;
                TeamDef::HatCountFunctions { k, values_nonempty: false }
            } else if let Some(arg) = call_arg(body, "liftE") {
                TeamDef::LiftE(reg.mostowski(arg)?)
            } else if let Some(arg) = call_arg(body, "liftB") {
                TeamDef::LiftB(reg.mostowski(arg)?)
            } else if let Some(arg) = call_arg(body, "liftBprime") {
                TeamDef::LiftBPrime(reg.mostowski(arg)?)
            } else {
                return Err(err(
                    "quantifier",
                    n,
                    format!(
                        "unknown team constructor `{body}` (expected liftE/liftB/liftBprime/\
                         count_functions/most_functions)"
                    ),
                ));
            };
            reg.register_team(TeamQuantifier::new(name, def))?;
        } else {
            return Err(err("quantifier", n, format!("unrecognized line `{line}`")));
        }
    }
    flush_extensional(&mut extensional, &mut order, reg)
}

fn flush_extensional(
    pending: &mut BTreeMap<String, BTreeMap<usize, Vec<BTreeSet<String>>>>,
    order: &mut Vec<String>,
    reg: &mut Registry,
) -> Result<()> {
    for name in order.drain(..) {
        let tables = pending.remove(&name).unwrap_or_default();
        reg.register_mostowski(MostowskiQuantifier {
            name,
            def: MostowskiDef::Extensional(tables),
        })?;
    }
    Ok(())
}

fn call_arg<'a>(body: &'a str, head: &str) -> Option<&'a str> {
    body.strip_prefix(head)
        .and_then(|s| s.trim().strip_prefix('('))
        .and_then(|s| s.trim_end().strip_suffix(')'))
        .map(str::trim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Assignment;

    const STRUCT: &str = "\
# four elements, spec example
domain: a b c d
rel P/1: a b c
rel R/2: (a,b) (b,c)
const c0 = a
";

    #[test]
    fn structure_roundtrip() {
        let m = parse_structure(STRUCT).unwrap();
        assert_eq!(m.size(), 4);
        assert_eq!(m.relation("P").unwrap().1.len(), 3);
        assert_eq!(m.relation("R").unwrap().1.len(), 2);
        assert_eq!(m.constant("c0"), Some(0));
        let printed = print_structure(&m);
        assert_eq!(parse_structure(&printed).unwrap(), m);
    }

    #[test]
    fn structure_errors() {
        assert!(parse_structure("rel P/1: a\ndomain: a").is_err()); // domain not first
        assert!(parse_structure("domain: a\nrel P/1: b").is_err()); // unknown element
        assert!(parse_structure("domain: a\nrel R/2: (a,a,a)").is_err()); // arity mismatch
        assert!(parse_structure("domain: a\nnonsense").is_err());
        assert!(parse_structure("").is_err());
    }

    #[test]
    fn team_roundtrip() {
        let m = parse_structure(STRUCT).unwrap();
        let x = parse_team("vars: x y\nx=a y=b\nx=c y=c\n", &m).unwrap();
        assert_eq!(x.len(), 2);
        assert_eq!(x.vars(), &["x".to_string(), "y".to_string()]);
        let printed = print_team(&x, &m);
        assert_eq!(parse_team(&printed, &m).unwrap(), x);
        // empty team: just the header
        let e = parse_team("vars: x\n", &m).unwrap();
        assert!(e.is_empty());
        // binding mismatch
        assert!(parse_team("vars: x y\nx=a\n", &m).is_err());
        assert!(parse_team("vars: x\nx=zzz\n", &m).is_err());
    }

    #[test]
    fn quantifier_config() {
        let mut reg = Registry::new();
        load_quantifiers(
            "\
mostowski my_most = 2*card(S) >= card(M)
mostowski my_exactly3 = card(S) == 3
extensional Qa @size2 = {a}
extensional Qa @size3 = {a} {a,b}
team tq1 = liftE(my_exactly3)
team tq2 = liftB(exactly3)
team tq3 = count_functions(3)
team tq4 = most_functions
",
            &mut reg,
        )
        .unwrap();
        // the configured `most` matches the builtin on every size
        let builtin = reg.mostowski("most").unwrap();
        let mine = reg.mostowski("my_most").unwrap();
        for size in 1..=4 {
            let m = Structure::with_size(size, Default::default(), Default::default()).unwrap();
            assert_eq!(mine.localize(&m).unwrap(), builtin.localize(&m).unwrap());
        }
        // extensional tables resolve element names per size
        let qa = reg.mostowski("Qa").unwrap();
        let m2 = parse_structure("domain: a b").unwrap();
        assert_eq!(qa.localize(&m2).unwrap(), vec![0b01]);
        let m3 = parse_structure("domain: a b c").unwrap();
        assert_eq!(qa.localize(&m3).unwrap(), vec![0b01, 0b011]);
        // team constructors
        assert!(matches!(reg.team("tq1").unwrap().def, TeamDef::LiftE(_)));
        assert!(matches!(reg.team("tq2").unwrap().def, TeamDef::LiftB(_)));
        assert!(matches!(
            reg.team("tq3").unwrap().def,
            TeamDef::HatCountFunctions { k: 3, values_nonempty: false }
        ));
        assert!(matches!(reg.team("tq4").unwrap().def, TeamDef::MostFunctions));
    }

    #[test]
    fn quantifier_config_errors() {
        let mut reg = Registry::new();
        assert!(load_quantifiers("mostowski bad = card(S) ??", &mut reg).is_err());
        assert!(load_quantifiers("team t = liftE(no_such_q)", &mut reg).is_err());
        assert!(load_quantifiers("gibberish", &mut reg).is_err());
        assert!(load_quantifiers("extensional Q @sizeX = {a}", &mut reg).is_err());
    }

    #[test]
    fn team_rows_resolve_against_structure_order() {
        let m = parse_structure("domain: b a").unwrap();
        let x = parse_team("vars: x\nx=a\n", &m).unwrap();
        let s: Vec<Assignment> = x.assignments().collect();
        assert_eq!(s[0].get("x"), Some(1)); // `a` is the second element
    }
}
