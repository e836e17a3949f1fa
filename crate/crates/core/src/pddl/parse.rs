use std::collections::HashSet;
use std::fmt;

use indexmap::IndexSet;

use super::sexpr::{read, Pos, ReadError, SExpr};
use super::{ActionDef, DomainDef, Effect, Literal, OneOf, Outcome, ProblemDef};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Unsupported,
    UndeclaredPredicate,
    NegatedSubtree,
    DuplicateLabel,
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    fn new(kind: ParseErrorKind, pos: Pos, message: impl fmt::Display) -> Self {
        ParseError { kind, pos, message: message.to_string() }
    }

    fn syntax(pos: Pos, message: impl fmt::Display) -> Self {
        Self::new(ParseErrorKind::Syntax, pos, message)
    }

    fn unsupported(pos: Pos, message: impl fmt::Display) -> Self {
        Self::new(ParseErrorKind::Unsupported, pos, message)
    }
}

impl From<ReadError> for ParseError {
    fn from(e: ReadError) -> Self {
        match e {
            ReadError::UnexpectedClose(p) => ParseError::syntax(p, "unexpected ')'"),
            ReadError::Unclosed(p) => ParseError::syntax(p, "unclosed '('"),
            ReadError::Trailing(p) => ParseError::syntax(p, "trailing input after definition"),
            ReadError::Empty => ParseError::syntax(Pos { line: 1, col: 1 }, "empty input"),
        }
    }
}

type Result<T> = std::result::Result<T, ParseError>;

fn expect_list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr]> {
    e.list().ok_or_else(|| ParseError::syntax(e.pos(), format!("expected {what}")))
}

fn expect_atom<'a>(e: &'a SExpr, what: &str) -> Result<&'a str> {
    e.atom().ok_or_else(|| ParseError::syntax(e.pos(), format!("expected {what}")))
}

/// Splits `(define (<kind> NAME) sections...)` into its name and sections.
fn define<'a>(root: &'a SExpr, kind: &str) -> Result<(String, &'a [SExpr])> {
    let items = expect_list(root, "(define ...)")?;
    match items.first().and_then(SExpr::atom) {
        Some(a) if a.eq_ignore_ascii_case("define") => {}
        _ => return Err(ParseError::syntax(root.pos(), "expected (define ...)")),
    }
    let header = items
        .get(1)
        .ok_or_else(|| ParseError::syntax(root.pos(), format!("missing ({kind} NAME)")))?;
    let h = expect_list(header, &format!("({kind} NAME)"))?;
    match (h.first().and_then(SExpr::atom), h.get(1).and_then(SExpr::atom), h.len()) {
        (Some(k), Some(name), 2) if k.eq_ignore_ascii_case(kind) => Ok((name.to_string(), &items[2..])),
        _ => Err(ParseError::syntax(header.pos(), format!("expected ({kind} NAME)"))),
    }
}

/// A zero-arity atom `(p)`.
fn atom_fluent(e: &SExpr) -> Result<String> {
    let items = expect_list(e, "(predicate)")?;
    let name = items
        .first()
        .ok_or_else(|| ParseError::syntax(e.pos(), "empty predicate"))
        .and_then(|h| expect_atom(h, "predicate name"))?;
    if name.starts_with('?') || name.starts_with(':') {
        return Err(ParseError::syntax(e.pos(), format!("invalid predicate name {name}")));
    }
    if items.len() > 1 {
        return Err(ParseError::unsupported(
            e.pos(),
            format!("predicate {name} has arguments; only propositional PDDL is supported"),
        ));
    }
    Ok(name.to_string())
}

const OPERATORS: &[&str] = &[
    "and", "oneof", "labeled-oneof", "outcome", "not", "or", "when", "forall", "exists", "imply",
    "increase", "decrease", "probabilistic",
];

fn is_operator(e: &SExpr) -> Option<String> {
    let h = e.head()?;
    OPERATORS.contains(&h.as_str()).then_some(h)
}

/// Signed atom; records the reference for the predicate check.
fn literal(e: &SExpr, refs: &mut Vec<(String, Pos)>) -> Result<Literal> {
    match is_operator(e).as_deref() {
        Some("not") => {
            let items = expect_list(e, "(not ...)")?;
            if items.len() != 2 {
                return Err(ParseError::syntax(e.pos(), "(not ...) takes exactly one argument"));
            }
            if is_operator(&items[1]).is_some() {
                return Err(ParseError::new(
                    ParseErrorKind::NegatedSubtree,
                    items[1].pos(),
                    "negation is only allowed on atoms",
                ));
            }
            let f = atom_fluent(&items[1])?;
            refs.push((f.clone(), items[1].pos()));
            Ok(Literal::neg(f))
        }
        Some(op) => Err(ParseError::syntax(e.pos(), format!("expected a literal, found ({op} ...)"))),
        None => {
            let f = atom_fluent(e)?;
            refs.push((f.clone(), e.pos()));
            Ok(Literal::pos(f))
        }
    }
}

fn precondition(e: &SExpr, out: &mut IndexSet<Literal>, refs: &mut Vec<(String, Pos)>) -> Result<()> {
    match is_operator(e).as_deref() {
        Some("and") => {
            for c in &expect_list(e, "(and ...)")?[1..] {
                precondition(c, out, refs)?;
            }
            Ok(())
        }
        Some("not") | None => {
            if e.list().is_some_and(<[SExpr]>::is_empty) {
                return Ok(());
            }
            out.insert(literal(e, refs)?);
            Ok(())
        }
        Some(op) => Err(ParseError::unsupported(
            e.pos(),
            format!("({op} ...) is not supported in preconditions"),
        )),
    }
}

fn effect(e: &SExpr, refs: &mut Vec<(String, Pos)>) -> Result<Effect> {
    match is_operator(e).as_deref() {
        None | Some("not") => Ok(Effect::Lit(literal(e, refs)?)),
        Some("and") => {
            let items = expect_list(e, "(and ...)")?;
            let children = items[1..].iter().map(|c| effect(c, refs)).collect::<Result<Vec<_>>>()?;
            Ok(Effect::and(children))
        }
        Some("oneof") => {
            let items = expect_list(e, "(oneof ...)")?;
            if items.len() < 2 {
                return Err(ParseError::syntax(e.pos(), "(oneof) needs at least one outcome"));
            }
            let mut outcomes = Vec::new();
            for c in &items[1..] {
                if c.head().as_deref() == Some("outcome") {
                    return Err(ParseError::syntax(c.pos(), "(outcome ...) is only allowed inside labeled-oneof"));
                }
                outcomes.push(Outcome { label: None, effect: effect(c, refs)? });
            }
            Ok(Effect::OneOf(OneOf { label: None, outcomes }))
        }
        Some("labeled-oneof") => {
            let items = expect_list(e, "(labeled-oneof ...)")?;
            let label = items
                .get(1)
                .ok_or_else(|| ParseError::syntax(e.pos(), "labeled-oneof needs a label"))
                .and_then(|l| expect_atom(l, "oneof label"))?
                .to_string();
            if items.len() < 3 {
                return Err(ParseError::syntax(e.pos(), "labeled-oneof needs at least one outcome"));
            }
            let mut seen = HashSet::new();
            let mut outcomes = Vec::new();
            for c in &items[2..] {
                let parts = expect_list(c, "(outcome LABEL EFFECT)")?;
                if c.head().as_deref() != Some("outcome") || parts.len() != 3 {
                    return Err(ParseError::syntax(c.pos(), "expected (outcome LABEL EFFECT)"));
                }
                let l = expect_atom(&parts[1], "outcome label")?.to_string();
                if !seen.insert(l.clone()) {
                    return Err(ParseError::new(
                        ParseErrorKind::DuplicateLabel,
                        parts[1].pos(),
                        format!("duplicate outcome label {l} in {label}"),
                    ));
                }
                outcomes.push(Outcome { label: Some(l), effect: effect(&parts[2], refs)? });
            }
            Ok(Effect::OneOf(OneOf { label: Some(label), outcomes }))
        }
        Some("outcome") => Err(ParseError::syntax(e.pos(), "(outcome ...) is only allowed inside labeled-oneof")),
        Some("or") => Err(ParseError::unsupported(e.pos(), "(or ...) is not allowed in effects; use oneof")),
        Some(op) => Err(ParseError::unsupported(e.pos(), format!("({op} ...) is not supported in effects"))),
    }
}

fn check_empty(section: &[SExpr], what: &str) -> Result<()> {
    match section.get(1) {
        None => Ok(()),
        Some(e) => Err(ParseError::unsupported(
            e.pos(),
            format!("{what} are not supported; the dialect is propositional"),
        )),
    }
}

fn action(items: &[SExpr], pos: Pos, refs: &mut Vec<(String, Pos)>) -> Result<ActionDef> {
    let name = items
        .get(1)
        .ok_or_else(|| ParseError::syntax(pos, "action needs a name"))
        .and_then(|n| expect_atom(n, "action name"))?
        .to_string();
    let mut pre = IndexSet::new();
    let mut eff = None;
    let mut i = 2;
    while i < items.len() {
        let key = expect_atom(&items[i], "action keyword")?.to_ascii_lowercase();
        let value = items
            .get(i + 1)
            .ok_or_else(|| ParseError::syntax(items[i].pos(), format!("{key} needs a value")))?;
        match key.as_str() {
            ":parameters" => {
                if !expect_list(value, "parameter list")?.is_empty() {
                    return Err(ParseError::unsupported(
                        value.pos(),
                        format!("action {name} has parameters; only zero-arity actions are supported"),
                    ));
                }
            }
            ":precondition" => precondition(value, &mut pre, refs)?,
            ":effect" => eff = Some(effect(value, refs)?),
            other => return Err(ParseError::unsupported(items[i].pos(), format!("unknown action keyword {other}"))),
        }
        i += 2;
    }
    Ok(ActionDef { name, precondition: pre, effect: eff.unwrap_or(Effect::And(Vec::new())) })
}

/// Parses a domain file of the propositional dialect.
pub fn parse_domain(text: &str) -> Result<DomainDef> {
    let root = read(text)?;
    let (name, sections) = define(&root, "domain")?;
    let mut requirements = Vec::new();
    let mut predicates = IndexSet::new();
    let mut actions: Vec<ActionDef> = Vec::new();
    let mut refs = Vec::new();

    for s in sections {
        let items = expect_list(s, "domain section")?;
        let head = items
            .first()
            .and_then(SExpr::atom)
            .ok_or_else(|| ParseError::syntax(s.pos(), "expected (:section ...)"))?
            .to_ascii_lowercase();
        match head.as_str() {
            ":requirements" => {
                for r in &items[1..] {
                    requirements.push(expect_atom(r, "requirement")?.to_string());
                }
            }
            ":types" => check_empty(items, "types")?,
            ":constants" => check_empty(items, "constants")?,
            ":predicates" => {
                for p in &items[1..] {
                    let f = atom_fluent(p)?;
                    if !predicates.insert(f.clone()) {
                        return Err(ParseError::new(
                            ParseErrorKind::Duplicate,
                            p.pos(),
                            format!("predicate {f} declared twice"),
                        ));
                    }
                }
            }
            ":action" => {
                let a = action(items, s.pos(), &mut refs)?;
                if actions.iter().any(|b| b.name == a.name) {
                    return Err(ParseError::new(
                        ParseErrorKind::Duplicate,
                        s.pos(),
                        format!("action {} defined twice", a.name),
                    ));
                }
                actions.push(a);
            }
            other => {
                return Err(ParseError::unsupported(s.pos(), format!("section {other} is not supported")))
            }
        }
    }
    if let Some((f, pos)) = refs.iter().find(|(f, _)| !predicates.contains(f)) {
        return Err(ParseError::new(
            ParseErrorKind::UndeclaredPredicate,
            *pos,
            format!("undeclared predicate {f}"),
        ));
    }
    Ok(DomainDef { name, requirements, predicates, actions })
}

fn positive_atoms(e: &SExpr, out: &mut IndexSet<String>) -> Result<()> {
    match is_operator(e).as_deref() {
        Some("and") => {
            for c in &expect_list(e, "(and ...)")?[1..] {
                positive_atoms(c, out)?;
            }
            Ok(())
        }
        None => {
            out.insert(atom_fluent(e)?);
            Ok(())
        }
        Some(_) => Err(ParseError::syntax(e.pos(), "init and goal may only contain positive atoms")),
    }
}

/// Parses a problem file. Use [`ProblemDef::validate`] to check it against its domain.
pub fn parse_problem(text: &str) -> Result<ProblemDef> {
    let root = read(text)?;
    let (name, sections) = define(&root, "problem")?;
    let mut domain = None;
    let mut init = IndexSet::new();
    let mut goal = IndexSet::new();
    for s in sections {
        let items = expect_list(s, "problem section")?;
        let head = items
            .first()
            .and_then(SExpr::atom)
            .ok_or_else(|| ParseError::syntax(s.pos(), "expected (:section ...)"))?
            .to_ascii_lowercase();
        match head.as_str() {
            ":domain" => {
                let d = items.get(1).ok_or_else(|| ParseError::syntax(s.pos(), "(:domain NAME)"))?;
                domain = Some(expect_atom(d, "domain name")?.to_string());
            }
            ":objects" => check_empty(items, "objects")?,
            ":requirements" => {}
            ":init" => {
                for f in &items[1..] {
                    if f.head().is_some_and(|h| h == "not") {
                        return Err(ParseError::syntax(f.pos(), "init may only contain positive atoms"));
                    }
                    init.insert(atom_fluent(f)?);
                }
            }
            ":goal" => {
                for g in &items[1..] {
                    positive_atoms(g, &mut goal)?;
                }
            }
            other => {
                return Err(ParseError::unsupported(s.pos(), format!("section {other} is not supported")))
            }
        }
    }
    let domain = domain.ok_or_else(|| ParseError::syntax(root.pos(), "problem has no (:domain NAME)"))?;
    Ok(ProblemDef { name, domain, init, goal })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_domain() {
        let d = parse_domain("(define (domain d) (:requirements :strips) (:predicates (p)) )").unwrap();
        assert_eq!(d.predicates.len(), 1);
        assert!(d.actions.is_empty());
        assert_eq!(d.requirements, vec![":strips"]);
    }

    #[test]
    fn rejects_negated_subtree() {
        let text = "(define (domain d) (:predicates (p) (q))
            (:action a :parameters () :precondition (and) :effect (not (and (p) (q)))))";
        let e = parse_domain(text).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::NegatedSubtree);
        assert_eq!(e.pos.line, 2);
    }

    #[test]
    fn rejects_or_in_effects() {
        let text = "(define (domain d) (:predicates (p) (q))
            (:action a :effect (or (p) (q))))";
        assert_eq!(parse_domain(text).unwrap_err().kind, ParseErrorKind::Unsupported);
    }

    #[test]
    fn rejects_parameters_and_typed_predicates() {
        let t1 = "(define (domain d) (:predicates (at ?x)))";
        assert_eq!(parse_domain(t1).unwrap_err().kind, ParseErrorKind::Unsupported);
        let t2 = "(define (domain d) (:predicates (p)) (:action a :parameters (?x) :effect (p)))";
        let e = parse_domain(t2).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Unsupported);
        assert!(e.message.contains("parameters"));
    }

    #[test]
    fn rejects_undeclared_predicate_with_position() {
        let text = "(define (domain d) (:predicates (p))\n (:action a :precondition (q) :effect (p)))";
        let e = parse_domain(text).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UndeclaredPredicate);
        assert_eq!(e.pos, Pos { line: 2, col: 27 });
    }

    #[test]
    fn rejects_duplicate_outcome_labels() {
        let text = "(define (domain d) (:predicates (p))
            (:action a :effect (labeled-oneof r (outcome x (p)) (outcome x (not (p))))))";
        assert_eq!(parse_domain(text).unwrap_err().kind, ParseErrorKind::DuplicateLabel);
    }

    #[test]
    fn duplicate_conjuncts_collapse() {
        let text = "(define (domain d) (:predicates (p) (q))
            (:action a :effect (and (p) (q) (p))))";
        let d = parse_domain(text).unwrap();
        assert_eq!(d.actions[0].effect, Effect::and([Effect::Lit(Literal::pos("p")), Effect::Lit(Literal::pos("q"))]));
    }

    #[test]
    fn problem_parsing() {
        let p = parse_problem("(define (problem p) (:domain d) (:init) (:goal (and (g))))").unwrap();
        assert!(p.init.is_empty());
        assert_eq!(p.goal.iter().collect::<Vec<_>>(), vec!["g"]);
        let e = parse_problem("(define (problem p) (:domain d) (:init) (:goal (not (g))))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
    }
}
