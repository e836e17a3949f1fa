use std::fmt::Write;

use super::{DomainDef, Effect, Literal, ProblemDef};

/// Output tree for the pretty printer: atoms and lists of nodes.
enum Doc {
    Atom(String),
    List(Vec<Doc>),
}

fn atom(s: impl Into<String>) -> Doc {
    Doc::Atom(s.into())
}

fn fluent(f: &str) -> Doc {
    Doc::List(vec![atom(f)])
}

fn literal(l: &Literal) -> Doc {
    if l.positive {
        fluent(&l.fluent)
    } else {
        Doc::List(vec![atom("not"), fluent(&l.fluent)])
    }
}

fn effect_doc(e: &Effect) -> Doc {
    match e {
        Effect::Lit(l) => literal(l),
        Effect::And(cs) => {
            let mut v = vec![atom("and")];
            v.extend(cs.iter().map(effect_doc));
            Doc::List(v)
        }
        Effect::OneOf(o) => match &o.label {
            Some(label) => {
                let mut v = vec![atom("labeled-oneof"), atom(label)];
                for (i, c) in o.outcomes.iter().enumerate() {
                    v.push(Doc::List(vec![
                        atom("outcome"),
                        atom(o.outcome_label(i)),
                        effect_doc(&c.effect),
                    ]));
                }
                Doc::List(v)
            }
            None => {
                let mut v = vec![atom("oneof")];
                v.extend(o.outcomes.iter().map(|c| effect_doc(&c.effect)));
                Doc::List(v)
            }
        },
    }
}

const INDENT: &str = "    ";

/// Lists made only of atoms go on one line; otherwise the leading atoms stay
/// on the opening line and every remaining element gets its own line.
fn render(doc: &Doc, depth: usize, out: &mut String) {
    match doc {
        Doc::Atom(a) => out.push_str(a),
        Doc::List(items) => {
            let lead = items.iter().take_while(|d| matches!(d, Doc::Atom(_))).count();
            out.push('(');
            for (i, d) in items[..lead].iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                render(d, depth, out);
            }
            if lead == items.len() {
                out.push(')');
                return;
            }
            for d in &items[lead..] {
                out.push('\n');
                out.push_str(&INDENT.repeat(depth + 1));
                render(d, depth + 1, out);
            }
            out.push('\n');
            out.push_str(&INDENT.repeat(depth));
            out.push(')');
        }
    }
}

pub fn print_effect(e: &Effect) -> String {
    let mut s = String::new();
    render(&effect_doc(e), 0, &mut s);
    s
}

fn conjunction(lits: impl Iterator<Item = Doc>) -> Doc {
    let mut v = vec![atom("and")];
    v.extend(lits);
    Doc::List(v)
}

/// Prints a domain in the layout used by the planner toolchain. Output is
/// deterministic and parses back to an equal value.
pub fn print_domain(d: &DomainDef) -> String {
    let mut out = String::new();
    out.push_str("(define\n");
    let _ = writeln!(out, "{INDENT}(domain {})", d.name);
    if !d.requirements.is_empty() {
        let _ = writeln!(out, "{INDENT}(:requirements {})", d.requirements.join(" "));
    }
    let _ = writeln!(out, "{INDENT}(:predicates");
    for p in &d.predicates {
        let _ = writeln!(out, "{INDENT}{INDENT}({p})");
    }
    let _ = writeln!(out, "{INDENT})");
    for a in &d.actions {
        let _ = writeln!(out, "{INDENT}(:action {}", a.name);
        let _ = writeln!(out, "{INDENT}{INDENT}:parameters ()");
        let _ = write!(out, "{INDENT}{INDENT}:precondition\n{INDENT}{INDENT}{INDENT}");
        render(&conjunction(a.precondition.iter().map(literal)), 3, &mut out);
        let _ = write!(out, "\n{INDENT}{INDENT}:effect\n{INDENT}{INDENT}{INDENT}");
        render(&effect_doc(&a.effect), 3, &mut out);
        let _ = writeln!(out, "\n{INDENT})");
    }
    out.push_str(")\n");
    out
}

pub fn print_problem(p: &ProblemDef) -> String {
    let mut out = String::new();
    out.push_str("(define\n");
    let _ = writeln!(out, "{INDENT}(problem {})", p.name);
    let _ = writeln!(out, "{INDENT}(:domain {})", p.domain);
    let _ = writeln!(out, "{INDENT}(:init");
    for f in &p.init {
        let _ = writeln!(out, "{INDENT}{INDENT}({f})");
    }
    let _ = writeln!(out, "{INDENT})");
    let _ = write!(out, "{INDENT}(:goal\n{INDENT}{INDENT}");
    render(&conjunction(p.goal.iter().map(|g| fluent(g))), 2, &mut out);
    let _ = writeln!(out, "\n{INDENT})");
    out.push_str(")\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{parse_domain, OneOf, Outcome};

    #[test]
    fn unlabeled_oneof_prints_plain_form() {
        let e = Effect::oneof([Effect::Lit(Literal::pos("a")), Effect::Lit(Literal::neg("a"))]);
        let s = print_effect(&e);
        assert!(s.starts_with("(oneof"));
        assert!(!s.contains("outcome"));
    }

    #[test]
    fn labeled_oneof_prints_outcomes() {
        let e = Effect::OneOf(OneOf {
            label: Some("resolve".into()),
            outcomes: vec![Outcome { label: Some("yes".into()), effect: Effect::Lit(Literal::pos("a")) }],
        });
        assert_eq!(print_effect(&e), "(labeled-oneof resolve\n    (outcome yes\n        (a)\n    )\n)");
    }

    #[test]
    fn printing_is_deterministic_and_reparses() {
        let text = "(define (domain d) (:predicates (p) (q))
            (:action a :precondition (and (p) (not (q)))
               :effect (and (q) (oneof (p) (not (p))))))";
        let d = parse_domain(text).unwrap();
        let once = print_domain(&d);
        assert_eq!(once, print_domain(&d));
        assert_eq!(parse_domain(&once).unwrap(), d);
    }
}
