use super::ast::{Expr, Node};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text.parse().map_err(|_| Error::Syntax {
                line: l0,
                col: c0,
                msg: format!("malformed number `{text}`"),
            })?;
            col += i - start;
            out.push(Token { tok: Tok::Num(v), line: l0, col: c0 });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: l0, col: c0 });
            continue;
        }
        if "+-*/^(),".contains(c) {
            out.push(Token { tok: Tok::Sym(c), line: l0, col: c0 });
            i += 1;
            col += 1;
            continue;
        }
        return Err(Error::Syntax { line: l0, col: c0, msg: format!("unexpected character `{c}`") });
    }
    out.push(Token { tok: Tok::End, line, col });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    vars: Option<&'a [String]>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn err(&self, t: &Token, msg: impl Into<String>) -> Error {
        Error::Syntax { line: t.line, col: t.col, msg: msg.into() }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            Err(self.err(&t, format!("expected `{c}`, found {}", describe(&t.tok))))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.is_sym('+') {
                self.next();
                terms.push(self.term()?);
            } else if self.is_sym('-') {
                self.next();
                let t = self.term()?;
                terms.push(Expr::new(Node::Neg(t)));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::new(Node::Sum(terms)) })
    }

    fn term(&mut self) -> Result<Expr> {
        if self.is_sym('-') {
            self.next();
            let t = self.term()?;
            return Ok(Expr::new(Node::Neg(t)));
        }
        let mut factors = vec![self.factor()?];
        loop {
            if self.is_sym('*') {
                self.next();
                factors.push(self.factor()?);
            } else if self.is_sym('/') {
                self.next();
                let den = self.factor()?;
                let num = collapse(std::mem::take(&mut factors));
                factors.push(Expr::new(Node::Quot(num, den)));
            } else {
                break;
            }
        }
        Ok(collapse(factors))
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.is_sym('-') {
            self.next();
            let f = self.factor()?;
            return Ok(Expr::new(Node::Neg(f)));
        }
        let base = self.base()?;
        if self.is_sym('^') {
            self.next();
            let p = self.exponent()?;
            return Ok(Expr::new(Node::Pow(base, p)));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<f64> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Num(v) => {
                self.next();
                Ok(v)
            }
            Tok::Sym('-') => {
                self.next();
                Ok(-self.exponent()?)
            }
            Tok::Sym('(') => {
                self.next();
                let e = self.expr()?;
                self.expect(')')?;
                e.eval_with(&|_| None).ok_or_else(|| self.err(&t, "exponent must be a constant"))
            }
            _ => Err(self.err(&t, format!("expected exponent, found {}", describe(&t.tok)))),
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let t = self.next();
        match &t.tok {
            Tok::Num(v) => Ok(Expr::constant(*v)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Sym('-') => {
                let b = self.base()?;
                Ok(Expr::new(Node::Neg(b)))
            }
            Tok::Ident(name) => {
                if self.is_sym('(') {
                    self.next();
                    let mut args = vec![self.expr()?];
                    while self.is_sym(',') {
                        self.next();
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    self.call(name, args, &t)
                } else if name == "pi" {
                    Ok(Expr::constant(std::f64::consts::PI))
                } else {
                    if let Some(vars) = self.vars {
                        if !vars.iter().any(|v| v == name) {
                            return Err(Error::UnknownIdentifier { name: name.clone(), line: t.line, col: t.col });
                        }
                    }
                    Ok(Expr::var(name))
                }
            }
            other => Err(self.err(&t, format!("unexpected {}", describe(other)))),
        }
    }

    fn call(&self, name: &str, mut args: Vec<Expr>, t: &Token) -> Result<Expr> {
        let expected = match name {
            "exp" | "ln" | "log" | "sin" | "cos" | "sqrt" => 1,
            "if" => 3,
            _ => return Err(Error::UnknownIdentifier { name: name.to_string(), line: t.line, col: t.col }),
        };
        if args.len() != expected {
            return Err(Error::Arity {
                name: name.to_string(),
                expected,
                got: args.len(),
                line: t.line,
                col: t.col,
            });
        }
        let a = args.remove(0);
        Ok(Expr::new(match name {
            "exp" => Node::Exp(a),
            "ln" | "log" => Node::Ln(a),
            "sin" => Node::Sin(a),
            "cos" => Node::Cos(a),
            "sqrt" => Node::Pow(a, 0.5),
            _ => {
                let neg = args.pop().unwrap();
                let pos = args.pop().unwrap();
                Node::Cond { test: a, pos, neg }
            }
        }))
    }
}

fn collapse(mut factors: Vec<Expr>) -> Expr {
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expr::new(Node::Product(factors))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::End => "end of input".to_string(),
    }
}

fn parse_inner(source: &str, vars: Option<&[String]>) -> Result<Expr> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0, vars };
    if p.peek().tok == Tok::End {
        let t = p.peek().clone();
        return Err(p.err(&t, "empty expression"));
    }
    let e = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return Err(p.err(&t, format!("unexpected {}", describe(&t.tok))));
    }
    Ok(e)
}

/// Parses an expression; every identifier not followed by `(` is a variable.
pub fn parse_expression(source: &str) -> Result<Expr> {
    parse_inner(source, None)
}

/// Parses an expression whose variables must come from `vars`.
pub fn parse_with_vars(source: &str, vars: &[String]) -> Result<Expr> {
    parse_inner(source, Some(vars))
}

/// A `def name(vars) = expr` line from a function file.
#[derive(Debug, Clone)]
pub struct Definition {
    pub name: String,
    pub vars: Vec<String>,
    pub body: Expr,
}

/// Parses a function file: one `def name(v1, v2) = expr` per line, `#`
/// starts a comment.
pub fn parse_function_file(src: &str) -> Result<Vec<Definition>> {
    let mut defs = Vec::new();
    for (ln, raw) in src.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let syn = |col: usize, msg: &str| Error::Syntax { line: line_no, col, msg: msg.to_string() };
        let trimmed = line.trim_start();
        let indent = line.len() - trimmed.len();
        let rest = trimmed.strip_prefix("def").ok_or_else(|| syn(indent + 1, "expected `def`"))?;
        let open = rest.find('(').ok_or_else(|| syn(indent + 4, "expected `(` after name"))?;
        let name = rest[..open].trim().to_string();
        if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(syn(indent + 4, "invalid function name"));
        }
        let close = rest.find(')').ok_or_else(|| syn(indent + 4 + open, "expected `)`"))?;
        let vars: Vec<String> = rest[open + 1..close]
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect();
        let after = &rest[close + 1..];
        let eq = after.find('=').ok_or_else(|| syn(indent + 4 + close + 1, "expected `=`"))?;
        let body_src = &after[eq + 1..];
        let body_col = indent + 3 + close + 1 + eq + 2;
        let body = parse_with_vars(body_src, &vars).map_err(|e| shift(e, line_no, body_col))?;
        defs.push(Definition { name, vars, body });
    }
    Ok(defs)
}

fn shift(e: Error, line: usize, col0: usize) -> Error {
    match e {
        Error::Syntax { col, msg, .. } => Error::Syntax { line, col: col + col0 - 1, msg },
        Error::UnknownIdentifier { name, col, .. } => Error::UnknownIdentifier { name, line, col: col + col0 - 1 },
        Error::Arity { name, expected, got, col, .. } => {
            Error::Arity { name, expected, got, line, col: col + col0 - 1 }
        }
        other => other,
    }
}
