use std::fmt;

/// 1-based line/column of a token in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum SExpr {
    Atom(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub(crate) fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub(crate) fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub(crate) fn list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Atom(..) => None,
        }
    }

    /// First element if it is an atom, lowercased.
    pub(crate) fn head(&self) -> Option<String> {
        self.list()?.first()?.atom().map(str::to_ascii_lowercase)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum ReadError {
    UnexpectedClose(Pos),
    Unclosed(Pos),
    Trailing(Pos),
    Empty,
}

/// Reads exactly one s-expression from `text`. `;` starts a comment.
pub(crate) fn read(text: &str) -> Result<SExpr, ReadError> {
    let mut stack: Vec<(Vec<SExpr>, Pos)> = Vec::new();
    let mut done: Option<SExpr> = None;
    let mut line = 1;
    let mut col = 0;
    let mut chars = text.chars().peekable();
    let mut atom = String::new();
    let mut atom_pos = Pos::default();

    fn flush(
        atom: &mut String,
        pos: Pos,
        stack: &mut [(Vec<SExpr>, Pos)],
        done: &Option<SExpr>,
    ) -> Result<Option<SExpr>, ReadError> {
        if atom.is_empty() {
            return Ok(None);
        }
        let a = SExpr::Atom(std::mem::take(atom), pos);
        match stack.last_mut() {
            Some((items, _)) => {
                items.push(a);
                Ok(None)
            }
            None if done.is_some() => Err(ReadError::Trailing(pos)),
            None => Ok(Some(a)),
        }
    }

    while let Some(c) = chars.next() {
        if c == '\n' {
            line += 1;
            col = 0;
        } else {
            col += 1;
        }
        let here = Pos { line, col };
        match c {
            ';' => {
                if let Some(a) = flush(&mut atom, atom_pos, &mut stack, &done)? {
                    done = Some(a);
                }
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                if let Some(a) = flush(&mut atom, atom_pos, &mut stack, &done)? {
                    done = Some(a);
                }
                if stack.is_empty() && done.is_some() {
                    return Err(ReadError::Trailing(here));
                }
                stack.push((Vec::new(), here));
            }
            ')' => {
                if let Some(a) = flush(&mut atom, atom_pos, &mut stack, &done)? {
                    done = Some(a);
                }
                let (items, open) = stack.pop().ok_or(ReadError::UnexpectedClose(here))?;
                let list = SExpr::List(items, open);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => done = Some(list),
                }
            }
            c if c.is_whitespace() => {
                if let Some(a) = flush(&mut atom, atom_pos, &mut stack, &done)? {
                    done = Some(a);
                }
            }
            c => {
                if stack.is_empty() && done.is_some() {
                    return Err(ReadError::Trailing(here));
                }
                if atom.is_empty() {
                    atom_pos = here;
                }
                atom.push(c);
            }
        }
    }
    if let Some(a) = flush(&mut atom, atom_pos, &mut stack, &done)? {
        done = Some(a);
    }
    if let Some((_, open)) = stack.pop() {
        return Err(ReadError::Unclosed(open));
    }
    done.ok_or(ReadError::Empty)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_comments() {
        let e = read("; header\n(a (b c) ; trailing\n  d)").unwrap();
        let items = e.list().unwrap();
        assert_eq!(items.len(), 3);
        assert_eq!(items[0].atom(), Some("a"));
        assert_eq!(items[1].list().unwrap().len(), 2);
        assert_eq!(e.pos(), Pos { line: 2, col: 1 });
        assert_eq!(items[2].pos(), Pos { line: 3, col: 3 });
    }

    #[test]
    fn reports_unbalanced_parens() {
        assert_eq!(read("(a (b)"), Err(ReadError::Unclosed(Pos { line: 1, col: 1 })));
        assert_eq!(read("(a))"), Err(ReadError::UnexpectedClose(Pos { line: 1, col: 4 })));
        assert_eq!(read("(a) (b)"), Err(ReadError::Trailing(Pos { line: 1, col: 5 })));
        assert_eq!(read("  ; nothing"), Err(ReadError::Empty));
    }
}
