//! Condition language for ordered-condition determiners.
//!
//! ```text
//! expr    := or
//! or      := and (("or" | "||") and)*
//! and     := unary (("and" | "&&") unary)*
//! unary   := ("not" | "!") unary | compare
//! compare := operand (op operand)?
//! op      := "=" | "==" | "!=" | "≠" | "<" | "<=" | "≤" | ">" | ">=" | "≥"
//! operand := number | string | "true" | "false" | "null" | "otherwise"
//!          | name ("." name)* | "(" expr ")"
//! ```
//!
//! Names are looked up in the filtered context by variable name; a dotted
//! path descends into JSON objects. Missing names evaluate to `null`.

use std::fmt;

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Value),
    Var(Vec<String>),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("condition {source_text:?}: {message} at offset {offset}")]
pub struct ExprError {
    pub source_text: String,
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Str(String),
    Name(String),
    Op(CmpOp),
    And,
    Or,
    Not,
    LParen,
    RParen,
}

fn lex(s: &str) -> Result<Vec<(Tok, usize)>, (usize, String)> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (off, c) = chars[i];
        let next = chars.get(i + 1).map(|p| p.1);
        let two = |t: Tok| (t, off);
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => out.push(two(Tok::LParen)),
            ')' => out.push(two(Tok::RParen)),
            '≠' => out.push(two(Tok::Op(CmpOp::Ne))),
            '≤' => out.push(two(Tok::Op(CmpOp::Le))),
            '≥' => out.push(two(Tok::Op(CmpOp::Ge))),
            '=' => {
                if next == Some('=') {
                    i += 1;
                }
                out.push(two(Tok::Op(CmpOp::Eq)));
            }
            '!' if next == Some('=') => {
                i += 1;
                out.push(two(Tok::Op(CmpOp::Ne)));
            }
            '!' => out.push(two(Tok::Not)),
            '<' | '>' => {
                let eq = next == Some('=');
                if eq {
                    i += 1;
                }
                let op = match (c, eq) {
                    ('<', false) => CmpOp::Lt,
                    ('<', true) => CmpOp::Le,
                    ('>', false) => CmpOp::Gt,
                    _ => CmpOp::Ge,
                };
                out.push(two(Tok::Op(op)));
            }
            '&' if next == Some('&') => {
                i += 1;
                out.push(two(Tok::And));
            }
            '|' if next == Some('|') => {
                i += 1;
                out.push(two(Tok::Or));
            }
            '"' | '\'' => {
                let mut j = i + 1;
                let mut text = String::new();
                while j < chars.len() && chars[j].1 != c {
                    text.push(chars[j].1);
                    j += 1;
                }
                if j == chars.len() {
                    return Err((off, "unterminated string".into()));
                }
                out.push(two(Tok::Str(text)));
                i = j;
            }
            c if c.is_ascii_digit() || (c == '-' && next.is_some_and(|n| n.is_ascii_digit())) => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].1.is_ascii_digit() || chars[j].1 == '.') {
                    j += 1;
                }
                let end = chars.get(j).map_or(s.len(), |p| p.0);
                let n = s[off..end].parse::<f64>().map_err(|_| (off, "bad number".to_string()))?;
                out.push(two(Tok::Num(n)));
                i = j;
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len()
                    && (chars[j].1.is_alphanumeric() || matches!(chars[j].1, '_' | '-' | '.'))
                {
                    j += 1;
                }
                let end = chars.get(j).map_or(s.len(), |p| p.0);
                let word = &s[off..end];
                out.push(two(match word.to_ascii_lowercase().as_str() {
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "not" => Tok::Not,
                    _ => Tok::Name(word.to_string()),
                }));
                i = j;
                continue;
            }
            other => return Err((off, format!("unexpected character {other:?}"))),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    at: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.1)
    }

    fn or(&mut self) -> Result<Expr, (usize, String)> {
        let mut e = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.at += 1;
            e = Expr::Or(Box::new(e), Box::new(self.and()?));
        }
        Ok(e)
    }

    fn and(&mut self) -> Result<Expr, (usize, String)> {
        let mut e = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.at += 1;
            e = Expr::And(Box::new(e), Box::new(self.unary()?));
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr, (usize, String)> {
        if self.peek() == Some(&Tok::Not) {
            self.at += 1;
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        let lhs = self.operand()?;
        if let Some(Tok::Op(op)) = self.peek() {
            let op = *op;
            self.at += 1;
            let rhs = self.operand()?;
            return Ok(Expr::Cmp(op, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn operand(&mut self) -> Result<Expr, (usize, String)> {
        let off = self.offset();
        let tok = self.peek().cloned().ok_or((off, "expected an operand".to_string()))?;
        self.at += 1;
        Ok(match tok {
            Tok::Num(n) => Expr::Lit(serde_json::Number::from_f64(n).map_or(Value::Null, Value::Number)),
            Tok::Str(s) => Expr::Lit(Value::String(s)),
            Tok::Name(n) => match n.as_str() {
                "true" | "otherwise" | "else" => Expr::Lit(Value::Bool(true)),
                "false" => Expr::Lit(Value::Bool(false)),
                "null" => Expr::Lit(Value::Null),
                _ => Expr::Var(n.split('.').map(str::to_string).collect()),
            },
            Tok::LParen => {
                let e = self.or()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err((self.offset(), "expected )".into()));
                }
                self.at += 1;
                e
            }
            _ => return Err((off, "expected an operand".into())),
        })
    }
}

pub fn parse(s: &str) -> Result<Expr, ExprError> {
    let err = |(offset, message): (usize, String)| ExprError { source_text: s.to_string(), offset, message };
    let toks = lex(s).map_err(err)?;
    let mut p = Parser { toks: &toks, at: 0, end: s.len() };
    let e = p.or().map_err(err)?;
    if p.at != toks.len() {
        return Err(err((p.offset(), "unexpected trailing input".into())));
    }
    Ok(e)
}

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

pub fn truthy(v: &Value) -> bool {
    match v {
        Value::Null => false,
        Value::Bool(b) => *b,
        Value::Number(n) => n.as_f64().is_some_and(|x| x != 0.0),
        Value::String(s) => !s.is_empty(),
        Value::Array(a) => !a.is_empty(),
        Value::Object(o) => !o.is_empty(),
    }
}

fn compare(op: CmpOp, a: &Value, b: &Value) -> bool {
    let numeric = matches!(a, Value::Number(_)) || matches!(b, Value::Number(_));
    if numeric {
        if let (Some(x), Some(y)) = (as_number(a), as_number(b)) {
            return match op {
                CmpOp::Eq => x == y,
                CmpOp::Ne => x != y,
                CmpOp::Lt => x < y,
                CmpOp::Le => x <= y,
                CmpOp::Gt => x > y,
                CmpOp::Ge => x >= y,
            };
        }
    }
    match op {
        CmpOp::Eq => a == b,
        CmpOp::Ne => a != b,
        _ => match (a, b) {
            (Value::String(x), Value::String(y)) => match op {
                CmpOp::Lt => x < y,
                CmpOp::Le => x <= y,
                CmpOp::Gt => x > y,
                _ => x >= y,
            },
            _ => false,
        },
    }
}

impl Expr {
    pub fn eval(&self, lookup: &dyn Fn(&str) -> Option<Value>) -> Value {
        match self {
            Expr::Lit(v) => v.clone(),
            Expr::Var(path) => {
                let mut cur = lookup(&path[0]).unwrap_or(Value::Null);
                for key in &path[1..] {
                    cur = cur.get(key).cloned().unwrap_or(Value::Null);
                }
                cur
            }
            Expr::Not(e) => Value::Bool(!e.holds(lookup)),
            Expr::And(a, b) => Value::Bool(a.holds(lookup) && b.holds(lookup)),
            Expr::Or(a, b) => Value::Bool(a.holds(lookup) || b.holds(lookup)),
            Expr::Cmp(op, a, b) => Value::Bool(compare(*op, &a.eval(lookup), &b.eval(lookup))),
        }
    }

    pub fn holds(&self, lookup: &dyn Fn(&str) -> Option<Value>) -> bool {
        truthy(&self.eval(lookup))
    }

    pub fn is_catch_all(&self) -> bool {
        *self == Expr::Lit(Value::Bool(true))
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        })
    }
}
